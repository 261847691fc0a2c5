use num_complex::Complex;
use num_traits::Zero;

use super::cmat::CMat;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

const MAX_SWEEPS: usize = 64;

/// Eigendecomposition `A = V diag(values) V^H` of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct HermitianEig<T: Scalar> {
    /// Ascending.
    pub values: Vec<T>,
    /// Unitary; column `k` belongs to `values[k]`.
    pub vectors: CMat<T>,
}

impl<T: Scalar> HermitianEig<T> {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn vector(&self, k: usize) -> Vec<Complex<T>> {
        self.vectors.column(k)
    }

    /// `V f(diag) V^H` for an arbitrary complex spectral function.
    pub fn map_spectrum(&self, f: impl Fn(T) -> Complex<T>) -> CMat<T> {
        let n = self.dim();
        let fv: Vec<Complex<T>> = self.values.iter().map(|&l| f(l)).collect();
        let v = &self.vectors;
        CMat::from_fn(n, n, |r, c| {
            (0..n).map(|k| v[(r, k)] * fv[k] * v[(c, k)].conj()).sum()
        })
    }

    pub fn reconstruct(&self) -> CMat<T> {
        self.map_spectrum(|l| Complex::new(l, T::zero()))
    }

    /// Eigenvectors whose eigenvalue exceeds `threshold`, as columns.
    pub fn vectors_above(&self, threshold: T) -> Vec<Vec<Complex<T>>> {
        (0..self.dim())
            .filter(|&k| self.values[k] > threshold)
            .map(|k| self.vector(k))
            .collect()
    }
}

/// Default Hermiticity acceptance for `herm_eig`: 1e-12 in double precision,
/// loosened to a few ulps for narrower types.
pub fn hermitian_tolerance<T: Scalar>() -> T {
    T::lit(1e-12).max(T::epsilon() * T::lit(64.0))
}

/// Hermitian eigendecomposition by cyclic complex Jacobi rotations.
pub fn herm_eig<T: Scalar>(a: &CMat<T>) -> Result<HermitianEig<T>> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "eigendecomposition needs a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let scale = T::one().max(a.max_abs());
    let defect = a.hermiticity_defect();
    if !(defect <= hermitian_tolerance::<T>() * scale) {
        return Err(Error::NotHermitian {
            defect: defect.to_f64().unwrap_or(f64::NAN),
        });
    }

    let n = a.rows();
    let mut m = a.hermitian_part();
    let mut v = CMat::<T>::identity(n);
    if n == 0 {
        return Ok(HermitianEig {
            values: Vec::new(),
            vectors: v,
        });
    }

    // rounding leaves an off-diagonal floor of order n·ε‖A‖; the absolute
    // floor matches the Hermiticity check so rounding-noise matrices terminate
    let total = T::one().max(m.frobenius_norm());
    let stop = (T::from_usize_lossy(n) * T::epsilon() * total).powi(2);
    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let off: T = (0..n)
            .flat_map(|r| (0..n).filter(move |&c| c != r).map(move |c| (r, c)))
            .map(|(r, c)| m[(r, c)].norm_sqr())
            .sum();
        if off <= stop || off.is_zero() {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut m, &mut v, p, q);
            }
        }
    }
    if !converged {
        return Err(Error::NoConvergence { sweeps: MAX_SWEEPS });
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<T> = (0..n).map(|i| m[(i, i)].re).collect();
    order.sort_by(|&i, &j| diag[i].partial_cmp(&diag[j]).unwrap_or(std::cmp::Ordering::Equal));
    let values = order.iter().map(|&i| diag[i]).collect();
    let vectors = CMat::from_fn(n, n, |r, c| v[(r, order[c])]);
    Ok(HermitianEig { values, vectors })
}

/// One Jacobi step annihilating `m[p][q]`. The 2x2 block is first made real by a
/// diagonal phase, then diagonalized by a real Givens rotation.
fn rotate<T: Scalar>(m: &mut CMat<T>, v: &mut CMat<T>, p: usize, q: usize) {
    let apq = m[(p, q)];
    let mag = apq.norm();
    if mag <= T::min_positive_value() {
        return;
    }
    let app = m[(p, p)].re;
    let aqq = m[(q, q)].re;
    let theta = (aqq - app) / (T::lit(2.0) * mag);
    let t = if theta.is_infinite() {
        T::zero()
    } else {
        let sign = if theta < T::zero() { -T::one() } else { T::one() };
        sign / (theta.abs() + (theta * theta + T::one()).sqrt())
    };
    let c = T::one() / (t * t + T::one()).sqrt();
    let s = t * c;
    // e^{-i phi} with a_pq = |a_pq| e^{i phi}
    let phase = apq.conj() / Complex::new(mag, T::zero());
    let re = |x: T| Complex::new(x, T::zero());
    let (vpp, vpq, vqp, vqq) = (re(c), re(s), phase * re(-s), phase * re(c));

    let n = m.rows();
    for k in 0..n {
        let akp = m[(k, p)];
        let akq = m[(k, q)];
        m[(k, p)] = akp * vpp + akq * vqp;
        m[(k, q)] = akp * vpq + akq * vqq;
    }
    for k in 0..n {
        let apk = m[(p, k)];
        let aqk = m[(q, k)];
        m[(p, k)] = vpp.conj() * apk + vqp.conj() * aqk;
        m[(q, k)] = vpq.conj() * apk + vqq.conj() * aqk;
    }
    m[(p, q)] = Complex::zero();
    m[(q, p)] = Complex::zero();
    m[(p, p)] = re(m[(p, p)].re);
    m[(q, q)] = re(m[(q, q)].re);

    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * vpp + vkq * vqp;
        v[(k, q)] = vkp * vpq + vkq * vqq;
    }
}

/// `exp(-i t H)` for Hermitian `H`, through its eigendecomposition.
pub fn unitary_exp<T: Scalar>(h: &CMat<T>, t: T) -> Result<CMat<T>> {
    let eig = herm_eig(h)?;
    Ok(eig.map_spectrum(|l| {
        let phi = -t * l;
        Complex::new(phi.cos(), phi.sin())
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::random::random_hermitian;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    type M = CMat<f64>;
    type C = Complex<f64>;

    fn sigma_z() -> M {
        M::from_real_rows(&[&[1.0, 0.0], &[0.0, -1.0]])
    }

    #[test]
    fn rounding_noise_matrix() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let noise = random_hermitian(16, &mut rng).scale_real(1e-17);
        let e = herm_eig(&noise).unwrap();
        assert!(e.values.iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn zero_matrix() {
        let e = herm_eig(&M::zeros(2, 2)).unwrap();
        assert_eq!(e.values, vec![0.0, 0.0]);
        assert_eq!(e.vectors, M::identity(2));
    }

    #[test]
    fn pauli_z_spectrum() {
        let e = herm_eig(&sigma_z()).unwrap();
        assert_eq!(e.values, vec![-1.0, 1.0]);
    }

    #[test]
    fn rejects_non_hermitian() {
        let a = M::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]);
        assert!(matches!(herm_eig(&a), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn random_9x9_reconstructs() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let a = random_hermitian(9, &mut rng);
        let e = herm_eig(&a).unwrap();
        assert!(e.reconstruct().max_abs_diff(&a) < 1e-12 * a.frobenius_norm());
        let vv = e.vectors.adjoint().matmul(&e.vectors);
        assert!(vv.max_abs_diff(&M::identity(9)) < 1e-12);
        assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn exp_at_zero_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let h = random_hermitian(5, &mut rng);
        assert!(unitary_exp(&h, 0.0).unwrap().max_abs_diff(&M::identity(5)) < 1e-14);
    }

    #[test]
    fn exp_of_half_sigma_z() {
        let h = sigma_z().scale_real(0.5);
        let u = unitary_exp(&h, std::f64::consts::PI).unwrap();
        let expected = M::diag(&[C::new(0.0, -1.0), C::new(0.0, 1.0)]);
        assert!(u.max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn exp_group_law() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for n in [2, 5, 11] {
            let h = random_hermitian(n, &mut rng);
            let u1 = unitary_exp(&h, 0.37).unwrap();
            let u2 = unitary_exp(&h, -1.21).unwrap();
            let u12 = unitary_exp(&h, 0.37 - 1.21).unwrap();
            assert!(u1.matmul(&u2).max_abs_diff(&u12) < 1e-11);
        }
    }

    #[test]
    fn single_precision_instantiation() {
        let a = CMat::<f32>::from_fn(4, 4, |r, c| {
            let x = (r + 2 * c) as f32 * 0.25;
            if r == c {
                Complex::new(x, 0.0)
            } else if r < c {
                Complex::new(x, 0.5)
            } else {
                Complex::new((c + 2 * r) as f32 * 0.25, -0.5)
            }
        });
        let e = herm_eig(&a).unwrap();
        assert!(e.reconstruct().max_abs_diff(&a) < 1e-5);
    }
}
