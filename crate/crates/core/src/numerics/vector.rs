//! Helpers for complex amplitude vectors stored as plain slices.

use num_complex::Complex;
use num_traits::Zero;

use crate::scalar::Scalar;

/// `<u|v>`, antilinear in the first argument.
pub fn inner<T: Scalar>(u: &[Complex<T>], v: &[Complex<T>]) -> Complex<T> {
    assert_eq!(u.len(), v.len(), "inner product dimension mismatch");
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

pub fn norm_sqr<T: Scalar>(v: &[Complex<T>]) -> T {
    v.iter().map(|z| z.norm_sqr()).sum()
}

pub fn norm<T: Scalar>(v: &[Complex<T>]) -> T {
    norm_sqr(v).sqrt()
}

pub fn scale<T: Scalar>(v: &[Complex<T>], s: Complex<T>) -> Vec<Complex<T>> {
    v.iter().map(|&z| z * s).collect()
}

pub fn add<T: Scalar>(u: &[Complex<T>], v: &[Complex<T>]) -> Vec<Complex<T>> {
    u.iter().zip(v).map(|(&a, &b)| a + b).collect()
}

pub fn sub<T: Scalar>(u: &[Complex<T>], v: &[Complex<T>]) -> Vec<Complex<T>> {
    u.iter().zip(v).map(|(&a, &b)| a - b).collect()
}

/// `u += s v`.
pub fn axpy<T: Scalar>(u: &mut [Complex<T>], s: Complex<T>, v: &[Complex<T>]) {
    for (a, &b) in u.iter_mut().zip(v) {
        *a += s * b;
    }
}

/// Returns the normalized vector together with its original norm, or `None`
/// when the norm falls below `floor`.
pub fn normalized<T: Scalar>(v: &[Complex<T>], floor: T) -> Option<(Vec<Complex<T>>, T)> {
    let n = norm(v);
    if n < floor {
        return None;
    }
    let inv = Complex::new(T::one() / n, T::zero());
    Some((scale(v, inv), n))
}

/// Rotates the global phase so the largest-magnitude entry (first one on ties)
/// is real and positive.
pub fn fix_global_phase<T: Scalar>(v: &mut [Complex<T>]) {
    let mut best = 0;
    let mut best_abs = T::zero();
    let slack = T::lit(1e-9);
    for (i, z) in v.iter().enumerate() {
        if z.norm() > best_abs + slack {
            best = i;
            best_abs = z.norm();
        }
    }
    if best_abs.is_zero() {
        return;
    }
    let phase = v[best].conj() / Complex::new(best_abs, T::zero());
    for z in v.iter_mut() {
        *z *= phase;
    }
}

/// `1 - |<u|v>|^2` for unit vectors: zero iff equal up to global phase.
pub fn infidelity<T: Scalar>(u: &[Complex<T>], v: &[Complex<T>]) -> T {
    T::one() - inner(u, v).norm_sqr()
}

/// Largest amplitude difference after aligning the global phase of `v` to `u`.
pub fn phase_aligned_distance<T: Scalar>(u: &[Complex<T>], v: &[Complex<T>]) -> T {
    let ov = inner(v, u);
    let phase = if ov.norm() > T::zero() {
        ov / Complex::new(ov.norm(), T::zero())
    } else {
        Complex::new(T::one(), T::zero())
    };
    u.iter()
        .zip(v)
        .fold(T::zero(), |m, (&a, &b)| m.max((a - b * phase).norm()))
}

/// Gram-Schmidt (modified) over `vectors`, dropping any that fall below `floor`
/// after projection.
pub fn orthonormalize<T: Scalar>(vectors: &[Vec<Complex<T>>], floor: T) -> Vec<Vec<Complex<T>>> {
    let mut out: Vec<Vec<Complex<T>>> = Vec::new();
    for v in vectors {
        let mut w = v.clone();
        for _ in 0..2 {
            for q in &out {
                let c = inner(q, &w);
                axpy(&mut w, -c, q);
            }
        }
        if let Some((w, _)) = normalized(&w, floor) {
            out.push(w);
        }
    }
    out
}

pub fn zeros<T: Scalar>(n: usize) -> Vec<Complex<T>> {
    vec![Complex::zero(); n]
}

#[cfg(test)]
mod tests {
    use super::*;

    type C = Complex<f64>;

    #[test]
    fn phase_fix_makes_peak_real() {
        let mut v = vec![C::new(0.0, 0.6), C::new(0.0, -0.8)];
        fix_global_phase(&mut v);
        assert!((v[1] - C::new(0.8, 0.0)).norm() < 1e-15);
        assert!((v[0] - C::new(-0.6, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn gram_schmidt_drops_dependent() {
        let a = vec![C::new(1.0, 0.0), C::new(1.0, 0.0)];
        let b = vec![C::new(2.0, 0.0), C::new(2.0, 0.0)];
        let c = vec![C::new(0.0, 1.0), C::new(0.0, 0.0)];
        let q = orthonormalize(&[a, b, c], 1e-10);
        assert_eq!(q.len(), 2);
        assert!(inner(&q[0], &q[1]).norm() < 1e-15);
    }
}
