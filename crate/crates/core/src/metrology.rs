//! Metrology conditions, quantum Fisher information at arbitrary θ, scalar
//! Cramér-Rao curves and the shifted-field probe.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{random, vector};
use crate::spinrep::{collective_moments, Moments, SpinRep};
use crate::state::ProbeState;
use crate::{RMatrix, C64};

/// Smallest QFIM eigenvalue accepted as invertible.
pub const SINGULAR_QFIM_THRESHOLD: f64 = 1e-10;

/// Moment-level report on the optimality conditions at θ = 0.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConditionReport {
    pub two_j: u32,
    /// ⟨J_i⟩
    pub first_moments: [f64; 3],
    /// ⟨J_i ∘ J_l⟩ off the diagonal, zeros on it.
    pub cross_moments: [[f64; 3]; 3],
    /// ⟨J_i²⟩
    pub variances: [f64; 3],
    pub target_variance: f64,
    pub max_residual: f64,
    /// max over i ≠ l of |Im⟨J_iJ_l⟩|
    pub weak_commutativity: f64,
}

impl ConditionReport {
    pub fn from_moments(m: &Moments) -> Self {
        let j = f64::from(m.two_j) / 2.0;
        let target = j * (j + 1.0) / 3.0;
        let mut cross = [[0.0; 3]; 3];
        let mut variances = [0.0; 3];
        let mut worst = 0.0f64;
        let mut weak = 0.0f64;
        for i in 0..3 {
            variances[i] = m.jordan(i, i);
            worst = worst.max(m.first[i].abs()).max((variances[i] - target).abs());
            for l in 0..3 {
                if i != l {
                    cross[i][l] = m.jordan(i, l);
                    worst = worst.max(cross[i][l].abs());
                    weak = weak.max(m.second[i][l].im.abs());
                }
            }
        }
        Self {
            two_j: m.two_j,
            first_moments: m.first,
            cross_moments: cross,
            variances,
            target_variance: target,
            max_residual: worst,
            weak_commutativity: weak,
        }
    }

    /// Sum-of-squares residual minimized by the probe fine-tuner.
    pub fn squared_residual(&self) -> f64 {
        let mut r = 0.0;
        for i in 0..3 {
            r += self.first_moments[i].powi(2);
            r += (self.variances[i] - self.target_variance).powi(2);
            for l in 0..3 {
                r += self.cross_moments[i][l].powi(2);
            }
        }
        r
    }
}

pub fn check_conditions(state: &ProbeState) -> ConditionReport {
    ConditionReport::from_moments(&collective_moments(state))
}

/// sin(x)/x with a series branch near zero.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

/// 2 sin²(x/2)/x², the coefficient of the cross-product term.
fn versine_ratio(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        0.5 - x2 / 24.0 + x2 * x2 / 720.0
    } else {
        2.0 * (x / 2.0).sin().powi(2) / (x * x)
    }
}

/// (1 − sinc x)/x², the coefficient of the θθ projection.
fn one_minus_sinc_ratio(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 / 6.0 - x2 / 120.0 + x2 * x2 / 5040.0
    } else {
        (1.0 - x.sin() / x) / (x * x)
    }
}

/// Coefficient vectors of A⁽ʲ⁾(θ) = A⃗⁽ʲ⁾·J.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AMatrixSet {
    pub theta: [f64; 3],
    pub a_vectors: [[f64; 3]; 3],
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub fn norm3(v: [f64; 3]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn a_matrices(theta: [f64; 3]) -> AMatrixSet {
    let t = norm3(theta);
    let s = sinc(t);
    let p = one_minus_sinc_ratio(t);
    let v = versine_ratio(t);
    let mut a = [[0.0; 3]; 3];
    for (j, row) in a.iter_mut().enumerate() {
        let mut e = [0.0; 3];
        e[j] = 1.0;
        let x = cross(e, theta);
        for k in 0..3 {
            row[k] = s * e[k] + p * theta[j] * theta[k] + v * x[k];
        }
    }
    AMatrixSet { theta, a_vectors: a }
}

/// Quantum Fisher information matrix at `theta`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Qfim {
    pub theta: Vec<f64>,
    pub matrix: RMatrix,
}

impl Qfim {
    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    /// Ascending eigenvalues.
    pub fn eigenvalues(&self) -> Vec<f64> {
        self.matrix.sym_eigenvalues()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    pub fn condition_number(&self) -> f64 {
        let ev = self.eigenvalues();
        ev[ev.len() - 1] / ev[0]
    }

    pub fn inverse(&self) -> Result<RMatrix> {
        let min_eig = self.min_eigenvalue();
        if !(min_eig >= SINGULAR_QFIM_THRESHOLD) {
            return Err(Error::SingularQfim { min_eig });
        }
        self.matrix
            .symmetrized()
            .inverse_adjugate()
            .ok_or(Error::SingularQfim { min_eig })
    }

    pub fn trace_inverse(&self) -> Result<f64> {
        Ok(self.inverse()?.trace())
    }
}

/// 4 Aᵢ·Cov·Aⱼ from the covariance of the initial state.
pub fn qfim_from_covariance(cov: &[[f64; 3]; 3], theta: [f64; 3]) -> Qfim {
    let a = a_matrices(theta).a_vectors;
    let m = RMatrix::from_fn(3, 3, |j, k| {
        let mut acc = 0.0;
        for p in 0..3 {
            for q in 0..3 {
                acc += a[j][p] * cov[p][q] * a[k][q];
            }
        }
        4.0 * acc
    });
    Qfim {
        theta: theta.to_vec(),
        matrix: m.symmetrized(),
    }
}

pub fn qfim(state: &ProbeState, theta: [f64; 3]) -> Qfim {
    qfim_from_covariance(&collective_moments(state).covariance_matrix(), theta)
}

/// |ψ(θ)⟩ = U(θ)|ψ⟩.
pub fn evolved(state: &ProbeState, theta: [f64; 3]) -> Vec<C64> {
    let rep = SpinRep::new(state.two_j());
    state.apply_factor(&rep.rotation(theta))
}

/// QFIM from the Hessian of the infidelity 1 − |⟨ψ(θ)|ψ(θ+δ)⟩|², which is
/// F/4 to second order.
pub fn qfim_finite_difference(state: &ProbeState, theta: [f64; 3], step: f64) -> RMatrix {
    let base = evolved(state, theta);
    let d = |shift: [f64; 3]| {
        let t = [theta[0] + shift[0], theta[1] + shift[1], theta[2] + shift[2]];
        let v = evolved(state, t);
        1.0 - vector::inner(&base, &v).norm_sqr()
    };
    let unit = |i: usize, s: f64| {
        let mut e = [0.0; 3];
        e[i] = s;
        e
    };
    let mut h = RMatrix::zeros(3, 3);
    for i in 0..3 {
        h[(i, i)] = (d(unit(i, step)) + d(unit(i, -step))) / (step * step);
        for k in (i + 1)..3 {
            let pp = {
                let mut e = unit(i, step);
                e[k] = step;
                e
            };
            let pm = {
                let mut e = unit(i, step);
                e[k] = -step;
                e
            };
            let mp = {
                let mut e = unit(i, -step);
                e[k] = step;
                e
            };
            let mm = {
                let mut e = unit(i, -step);
                e[k] = -step;
                e
            };
            let v = (d(pp) - d(pm) - d(mp) + d(mm)) / (4.0 * step * step);
            h[(i, k)] = v;
            h[(k, i)] = v;
        }
    }
    h.scale(2.0)
}

/// F(0) rebuilt from the one- and two-qubit marginals of the symmetric
/// N-qubit reading of the state.
pub fn qfim_from_reduced_states(state: &ProbeState) -> Result<RMatrix> {
    let (rho1, rho2) = crate::spinrep::reduced_qubit_states(state)?;
    let n = f64::from(state.two_j());
    let s = crate::spinrep::pauli();
    let r: Vec<f64> = s.iter().map(|p| rho1.matmul(p).trace().re).collect();
    Ok(RMatrix::from_fn(3, 3, |i, j| {
        let t = rho2
            .matmul(&crate::numerics::kron(&s[i], &s[j]))
            .trace()
            .re;
        let delta = if i == j { n } else { 0.0 };
        delta + n * (n - 1.0) * t - n * n * r[i] * r[j]
    }))
}

/// 9/(N(N+2)), the smallest possible tr F(0)⁻¹ for N = 2J.
pub fn qcrb_floor(two_j: u32) -> f64 {
    let n = f64::from(two_j);
    9.0 / (n * (n + 2.0))
}

/// tr F⁻¹ along (t/‖n‖)n for a state meeting the conditions.
pub fn optimal_curve_value(two_j: u32, t: f64) -> f64 {
    let n = f64::from(two_j);
    (3.0 + 6.0 / sinc(t / 2.0).powi(2)) / (n * (n + 2.0))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CrbPoint {
    pub t: f64,
    /// NaN where the QFIM is singular.
    pub trace_inv_qfim: f64,
    pub min_eig: f64,
    pub is_singular: bool,
}

pub fn unit_direction(direction: [f64; 3]) -> Result<[f64; 3]> {
    let n = norm3(direction);
    if !(n > 0.0) || !n.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "direction {direction:?} has no length"
        )));
    }
    Ok([direction[0] / n, direction[1] / n, direction[2] / n])
}

/// tr F(t·n)⁻¹ over a grid of t; singular points are marked and skipped.
pub fn scalar_crb_curve(state: &ProbeState, direction: [f64; 3], t_grid: &[f64]) -> Result<Vec<CrbPoint>> {
    let n = unit_direction(direction)?;
    let cov = collective_moments(state).covariance_matrix();
    Ok(t_grid
        .par_iter()
        .map(|&t| {
            let f = qfim_from_covariance(&cov, [t * n[0], t * n[1], t * n[2]]);
            let min_eig = f.min_eigenvalue();
            match f.trace_inverse() {
                Ok(v) => CrbPoint {
                    t,
                    trace_inv_qfim: v,
                    min_eig,
                    is_singular: false,
                },
                Err(_) => CrbPoint {
                    t,
                    trace_inv_qfim: f64::NAN,
                    min_eig,
                    is_singular: true,
                },
            }
        })
        .collect())
}

/// e^{−i(θ−ξ)·J}|ψ⟩, the probe seen after a known field ξ is compensated.
pub fn shifted_probe(state: &ProbeState, xi: [f64; 3], theta: [f64; 3]) -> Vec<C64> {
    evolved(state, [theta[0] - xi[0], theta[1] - xi[1], theta[2] - xi[2]])
}

/// Pure-state QFIM 4 Re[⟨∂ᵢψ|∂ⱼψ⟩ − ⟨∂ᵢψ|ψ⟩⟨ψ|∂ⱼψ⟩] of the shifted probe,
/// with derivatives from a five-point stencil.
pub fn shifted_qfim(state: &ProbeState, xi: [f64; 3], theta: [f64; 3]) -> Qfim {
    const H: f64 = 1e-3;
    let psi = shifted_probe(state, xi, theta);
    let grads: Vec<Vec<C64>> = (0..3)
        .map(|j| {
            let at = |s: f64| {
                let mut t = theta;
                t[j] += s;
                shifted_probe(state, xi, t)
            };
            let (p1, m1, p2, m2) = (at(H), at(-H), at(2.0 * H), at(-2.0 * H));
            (0..psi.len())
                .map(|k| (m2[k] - p2[k] + (p1[k] - m1[k]) * 8.0) / (12.0 * H))
                .collect()
        })
        .collect();
    let proj: Vec<C64> = grads.iter().map(|g| vector::inner(&psi, g)).collect();
    let m = RMatrix::from_fn(3, 3, |i, j| {
        4.0 * (vector::inner(&grads[i], &grads[j]) - proj[i].conj() * proj[j]).re
    });
    Qfim {
        theta: theta.to_vec(),
        matrix: m.symmetrized(),
    }
}

/// Largest entrywise change of the QFIM under random SU(2) frame changes,
/// each probed at five random θ.
pub fn su2_invariance_check(state: &ProbeState, trials: usize, seed: u64) -> f64 {
    let rep = SpinRep::new(state.two_j());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cov = collective_moments(state).covariance_matrix();
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let v = rep.rotation(random::haar_rotation_vector(&mut rng));
        let rotated = collective_moments(&state.transformed(&v)).covariance_matrix();
        for _ in 0..5 {
            let d = random::random_direction(&mut rng);
            let t = rand::Rng::gen_range(&mut rng, 0.0..std::f64::consts::PI);
            let theta = [d[0] * t, d[1] * t, d[2] * t];
            let a = qfim_from_covariance(&cov, theta);
            let b = qfim_from_covariance(&rotated, theta);
            worst = worst.max(a.matrix.max_abs_diff(&b.matrix));
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{herm_eig, unitary_exp};
    use crate::{Axis, CMatrix};

    fn ghz_z(two_j: u32) -> ProbeState {
        let d = two_j as usize + 1;
        let mut v = vector::zeros(d);
        v[0] = C64::new(1.0, 0.0);
        v[d - 1] = C64::new(1.0, 0.0);
        ProbeState::new(two_j, v).unwrap()
    }

    fn j3_tetrahedral() -> ProbeState {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let mut v = vector::zeros(7);
        v[1] = C64::new(h, 0.0);
        v[5] = C64::new(-h, 0.0);
        ProbeState::new(6, v).unwrap()
    }

    fn random_state(two_j: u32, seed: u64) -> ProbeState {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        ProbeState::new(two_j, random::random_unit_vector(two_j as usize + 1, &mut rng)).unwrap()
    }

    fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
        let jac = CMatrix::from_fn(n, n, |r, c| {
            if r.abs_diff(c) == 1 {
                let k = r.max(c) as f64;
                C64::new(k / (4.0 * k * k - 1.0).sqrt(), 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        let e = herm_eig(&jac).unwrap();
        (0..n)
            .map(|k| (e.values[k], 2.0 * e.vector(k)[0].norm_sqr()))
            .collect()
    }

    #[test]
    fn ghz_report() {
        let r = check_conditions(&ghz_z(6));
        assert!((r.variances[0] - 1.5).abs() < 1e-12);
        assert!((r.variances[2] - 9.0).abs() < 1e-12);
        assert!((r.max_residual - 5.0).abs() < 1e-12);
    }

    #[test]
    fn j3_tetrahedral_is_optimal() {
        let s = j3_tetrahedral();
        let r = check_conditions(&s);
        assert!(r.max_residual < 1e-12);
        assert!(r.weak_commutativity < 1e-12);
        let f = qfim(&s, [0.0; 3]);
        assert!(f.matrix.max_abs_diff(&RMatrix::identity(3).scale(16.0)) < 1e-12);
        assert!((f.trace_inverse().unwrap() - 0.1875).abs() < 1e-12);
    }

    #[test]
    fn a_vectors_limits() {
        let a = a_matrices([0.0; 3]);
        assert_eq!(a.a_vectors, [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);
        let a = a_matrices([std::f64::consts::PI, 0.0, 0.0]);
        assert!((a.a_vectors[0][0] - 1.0).abs() < 1e-15);
        assert!(a.a_vectors[0][1].abs() < 1e-15 && a.a_vectors[0][2].abs() < 1e-15);
    }

    #[test]
    fn a_vectors_match_quadrature() {
        let rep = SpinRep::new(4);
        let theta = [0.3, 0.4, 0.5];
        let h = rep.dot(theta);
        let a = a_matrices(theta);
        for (j, gen) in rep.generators().iter().enumerate() {
            let mut integral = CMatrix::zeros(5, 5);
            for (x, w) in gauss_legendre(24) {
                let alpha = 0.5 * (x + 1.0);
                let u = unitary_exp(&h, -alpha).unwrap();
                let term = u.matmul(gen).matmul(&u.adjoint());
                integral = &integral + &term.scale_real(0.5 * w);
            }
            let closed = rep.dot(a.a_vectors[j]);
            assert!(integral.max_abs_diff(&closed) < 1e-12);
        }
    }

    #[test]
    fn factorized_matches_fidelity_oracle() {
        for seed in 0..4 {
            let s = random_state(4, seed);
            let theta = [0.4 - 0.1 * seed as f64, 0.7, -0.3];
            let exact = qfim(&s, theta).matrix;
            let fd = qfim_finite_difference(&s, theta, 1e-4);
            assert!(exact.max_abs_diff(&fd) < 1e-6 * exact.max_abs(), "{exact:?} {fd:?}");
        }
    }

    #[test]
    fn reduced_state_reconstruction() {
        for seed in 0..5 {
            let s = random_state(5, 100 + seed);
            let f = qfim(&s, [0.0; 3]).matrix;
            let g = qfim_from_reduced_states(&s).unwrap();
            assert!(f.max_abs_diff(&g) < 1e-9);
        }
    }

    #[test]
    fn optimal_curve() {
        let s = j3_tetrahedral();
        let grid = [0.0, 0.5, 1.5, 3.0];
        for p in scalar_crb_curve(&s, [1.0, 1.0, 1.0], &grid).unwrap() {
            assert!((p.trace_inv_qfim - optimal_curve_value(6, p.t)).abs() < 1e-12);
        }
        assert!((optimal_curve_value(8, std::f64::consts::FRAC_PI_2) - 0.130_03).abs() < 1e-5);
    }

    #[test]
    fn singular_points_are_flagged() {
        let s = ProbeState::new(2, vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)]).unwrap();
        let pts = scalar_crb_curve(&s, [0.0, 0.0, 1.0], &[0.0, 0.2]).unwrap();
        assert!(pts.iter().all(|p| p.is_singular && p.trace_inv_qfim.is_nan()));
        assert!(matches!(qfim(&s, [0.0; 3]).trace_inverse(), Err(Error::SingularQfim { .. })));
    }

    #[test]
    fn shift_identity() {
        let s = random_state(4, 7);
        let xi = [0.2, -0.1, 0.3];
        let theta = [0.5, 0.4, -0.2];
        let left = shifted_qfim(&s, xi, theta).matrix;
        let right = qfim(&s, [0.3, 0.5, -0.5]).matrix;
        assert!(left.max_abs_diff(&right) < 1e-9);
        let at_zero = shifted_qfim(&s, theta, theta).matrix;
        assert!(at_zero.max_abs_diff(&qfim(&s, [0.0; 3]).matrix) < 1e-9);
    }

    #[test]
    fn frame_invariance() {
        assert!(su2_invariance_check(&j3_tetrahedral(), 20, 1) < 1e-9);
        assert!(su2_invariance_check(&ghz_z(6), 20, 1) > 1e-3);
    }

    #[test]
    fn floor_is_a_lower_bound() {
        for seed in 0..50 {
            let s = random_state(6, 500 + seed);
            if let Ok(v) = qfim(&s, [0.0; 3]).trace_inverse() {
                assert!(v >= qcrb_floor(6) - 1e-12);
            }
        }
        let x = SpinRep::new(6).axis_rotation(Axis::X, 0.3);
        let r = check_conditions(&j3_tetrahedral().transformed(&x));
        assert!(r.max_residual < 1e-12);
    }
}
