use num_complex::Complex;
use num_traits::Zero;

use super::cmat::CMat;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Kronecker product `A ⊗ B`.
pub fn kron<T: Scalar>(a: &CMat<T>, b: &CMat<T>) -> CMat<T> {
    let (br, bc) = (b.rows(), b.cols());
    CMat::from_fn(a.rows() * br, a.cols() * bc, |r, c| {
        a[(r / br, c / bc)] * b[(r % br, c % bc)]
    })
}

/// Kronecker product of two vectors.
pub fn kron_vec<T: Scalar>(a: &[Complex<T>], b: &[Complex<T>]) -> Vec<Complex<T>> {
    a.iter().flat_map(|&x| b.iter().map(move |&y| x * y)).collect()
}

/// Traces out every tensor factor not listed in `keep`. Factors are ordered
/// as in `dims` (first factor most significant); the kept factors stay in
/// their original relative order.
pub fn partial_trace<T: Scalar>(rho: &CMat<T>, dims: &[usize], keep: &[usize]) -> Result<CMat<T>> {
    let total: usize = dims.iter().product();
    if !rho.is_square() || rho.rows() != total {
        return Err(Error::DimensionMismatch(format!(
            "operator is {}x{} but factor dims {:?} multiply to {}",
            rho.rows(),
            rho.cols(),
            dims,
            total
        )));
    }
    let mut kept: Vec<usize> = keep.to_vec();
    kept.sort_unstable();
    kept.dedup();
    if kept.iter().any(|&k| k >= dims.len()) {
        return Err(Error::DimensionMismatch(format!(
            "keep set {keep:?} out of range for {} factors",
            dims.len()
        )));
    }
    let traced: Vec<usize> = (0..dims.len()).filter(|i| !kept.contains(i)).collect();
    let kept_dims: Vec<usize> = kept.iter().map(|&i| dims[i]).collect();
    let traced_dims: Vec<usize> = traced.iter().map(|&i| dims[i]).collect();
    let out_dim: usize = kept_dims.iter().product();
    let env_dim: usize = traced_dims.iter().product();

    let strides: Vec<usize> = (0..dims.len())
        .map(|i| dims[i + 1..].iter().product())
        .collect();
    let compose = |kept_idx: usize, env_idx: usize| -> usize {
        let mut flat = 0;
        let mut rem = kept_idx;
        for (pos, &f) in kept.iter().enumerate().rev() {
            let d = kept_dims[pos];
            flat += (rem % d) * strides[f];
            rem /= d;
        }
        let mut rem = env_idx;
        for (pos, &f) in traced.iter().enumerate().rev() {
            let d = traced_dims[pos];
            flat += (rem % d) * strides[f];
            rem /= d;
        }
        flat
    };

    let mut out = CMat::zeros(out_dim, out_dim);
    for r in 0..out_dim {
        for c in 0..out_dim {
            let mut acc = Complex::<T>::zero();
            for e in 0..env_dim {
                acc += rho[(compose(r, e), compose(c, e))];
            }
            out[(r, c)] = acc;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::random::random_matrix;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    type M = CMat<f64>;
    type C = Complex<f64>;

    #[test]
    fn kron_identities() {
        assert_eq!(kron(&M::identity(2), &M::identity(2)), M::identity(4));
    }

    #[test]
    fn bell_state_marginal_is_maximally_mixed() {
        let h = 1.0 / 2f64.sqrt();
        let phi = vec![C::new(h, 0.0), C::zero(), C::zero(), C::new(h, 0.0)];
        let rho = M::outer(&phi, &phi);
        let r = partial_trace(&rho, &[2, 2], &[0]).unwrap();
        assert!(r.max_abs_diff(&M::identity(2).scale_real(0.5)) < 1e-15);
    }

    #[test]
    fn traces_out_second_factor() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random_matrix(3, 3, &mut rng);
        let b = random_matrix(4, 4, &mut rng);
        let ab = kron(&a, &b);
        let ra = partial_trace(&ab, &[3, 4], &[0]).unwrap();
        assert!(ra.max_abs_diff(&a.scale(b.trace())) < 1e-12);
        let rb = partial_trace(&ab, &[3, 4], &[1]).unwrap();
        assert!(rb.max_abs_diff(&b.scale(a.trace())) < 1e-12);
    }

    #[test]
    fn middle_factor_of_three() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let a = random_matrix(2, 2, &mut rng);
        let b = random_matrix(3, 3, &mut rng);
        let c = random_matrix(2, 2, &mut rng);
        let abc = kron(&kron(&a, &b), &c);
        let rb = partial_trace(&abc, &[2, 3, 2], &[1]).unwrap();
        assert!(rb.max_abs_diff(&b.scale(a.trace() * c.trace())) < 1e-12);
        let rac = partial_trace(&abc, &[2, 3, 2], &[0, 2]).unwrap();
        assert!(rac.max_abs_diff(&kron(&a, &c).scale(b.trace())) < 1e-12);
    }

    #[test]
    fn dims_checked() {
        assert!(partial_trace(&M::identity(5), &[2, 2], &[0]).is_err());
        assert!(partial_trace(&M::identity(4), &[2, 2], &[2]).is_err());
    }
}
