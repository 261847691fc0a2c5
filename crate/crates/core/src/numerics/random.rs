//! Seeded random test objects: Gaussian (Ginibre) matrices, Haar-random pure states
//! and random rotation vectors.

use num_complex::Complex;
use rand::Rng;
use rand_distr::StandardNormal;

use super::cmat::CMat;
use super::vector;

pub fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> Complex<f64> {
    Complex::new(standard_normal(rng), standard_normal(rng)) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn random_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMat<f64> {
    CMat::from_fn(rows, cols, |_, _| complex_normal(rng))
}

pub fn random_hermitian<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMat<f64> {
    random_matrix(n, n, rng).hermitian_part()
}

/// Haar-random unit vector.
pub fn random_unit_vector<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<Complex<f64>> {
    loop {
        let v: Vec<_> = (0..n).map(|_| complex_normal(rng)).collect();
        if let Some((u, _)) = vector::normalized(&v, 1e-8) {
            return u;
        }
    }
}

/// Uniformly distributed direction in R^3.
pub fn random_direction<R: Rng + ?Sized>(rng: &mut R) -> [f64; 3] {
    loop {
        let v = [standard_normal(rng), standard_normal(rng), standard_normal(rng)];
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if n > 1e-8 {
            return [v[0] / n, v[1] / n, v[2] / n];
        }
    }
}

/// Rotation vector `angle * axis` of a Haar-random SU(2) element.
///
/// The rotation angle of a Haar element has density proportional to
/// `sin^2(angle / 2)` on `[0, 2π]`; it is drawn from a uniform unit quaternion.
pub fn haar_rotation_vector<R: Rng + ?Sized>(rng: &mut R) -> [f64; 3] {
    let q: Vec<f64> = loop {
        let q: Vec<f64> = (0..4).map(|_| standard_normal(rng)).collect();
        let n = q.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-8 {
            break q.iter().map(|x| x / n).collect();
        }
    };
    let angle = 2.0 * q[0].clamp(-1.0, 1.0).acos();
    let s = (1.0 - q[0] * q[0]).max(0.0).sqrt();
    if s < 1e-12 {
        return [0.0; 3];
    }
    [angle * q[1] / s, angle * q[2] / s, angle * q[3] / s]
}
