//! Spin Wigner functions from the spherical-tensor expansion of a state.
//!
//! Normalization: ((2J+1)/4π) ∬ W_ρ W_σ dΩ = tr(ρσ), so W integrates to
//! 4π/(2J+1) · ... i.e. ((2J+1)/4π) ∬ W dΩ = 1.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::vector;
use crate::state::ProbeState;
use crate::{CMatrix, C64};

/// Largest 2J accepted by the grid evaluator.
pub const MAX_TWO_J: u32 = 40;

fn ln_factorial(n: i64) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// ⟨j₁ m₁; j₂ m₂ | J M⟩ from Racah's formula, all arguments doubled.
/// Returns 0 when a selection rule fails.
pub fn clebsch_gordan(two_j1: i64, two_m1: i64, two_j2: i64, two_m2: i64, two_j: i64, two_m: i64) -> f64 {
    if two_m1 + two_m2 != two_m
        || two_m1.abs() > two_j1
        || two_m2.abs() > two_j2
        || two_m.abs() > two_j
        || two_j < (two_j1 - two_j2).abs()
        || two_j > two_j1 + two_j2
        || (two_j1 + two_j2 + two_j) % 2 != 0
        || (two_j1 + two_m1) % 2 != 0
        || (two_j2 + two_m2) % 2 != 0
        || (two_j + two_m) % 2 != 0
    {
        return 0.0;
    }
    let h = |x: i64| x / 2;
    let a = h(two_j1 + two_j2 - two_j);
    let b = h(two_j1 - two_m1);
    let c = h(two_j2 + two_m2);
    let d = h(two_j - two_j2 + two_m1);
    let e = h(two_j - two_j1 - two_m2);
    let prefactor = 0.5
        * (((two_j + 1) as f64).ln() + ln_factorial(h(two_j + two_j1 - two_j2)) + ln_factorial(h(two_j - two_j1 + two_j2))
            + ln_factorial(a)
            - ln_factorial(h(two_j1 + two_j2 + two_j) + 1)
            + ln_factorial(h(two_j + two_m))
            + ln_factorial(h(two_j - two_m))
            + ln_factorial(b)
            + ln_factorial(h(two_j1 + two_m1))
            + ln_factorial(h(two_j2 - two_m2))
            + ln_factorial(c));
    let k_min = 0.max(-d).max(-e);
    let k_max = a.min(b).min(c);
    let mut sum = 0.0;
    for k in k_min..=k_max {
        let ln_den = ln_factorial(k)
            + ln_factorial(a - k)
            + ln_factorial(b - k)
            + ln_factorial(c - k)
            + ln_factorial(d + k)
            + ln_factorial(e + k);
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign * (prefactor - ln_den).exp();
    }
    sum
}

/// T_kq on the spin-J irrep: ⟨J m'|T_kq|J m⟩ = √((2k+1)/(2J+1)) ⟨J m; k q|J m'⟩.
pub fn spherical_tensor(two_j: u32, k: u32, q: i64) -> CMatrix {
    let d = two_j as usize + 1;
    let tj = i64::from(two_j);
    let pre = ((2 * k + 1) as f64 / (two_j + 1) as f64).sqrt();
    CMatrix::from_fn(d, d, |r, c| {
        let m_out = tj - 2 * r as i64;
        let m_in = tj - 2 * c as i64;
        C64::new(
            pre * clebsch_gordan(tj, m_in, 2 * i64::from(k), 2 * q, tj, m_out),
            0.0,
        )
    })
}

/// Orthonormal associated Legendre values P̄_l^m(cos θ) for 0 ≤ m ≤ l ≤ l_max,
/// including the Condon-Shortley phase; Y_lm = P̄_l^m e^{imφ}.
fn normalized_legendre(l_max: usize, theta: f64) -> Vec<Vec<f64>> {
    let x = theta.cos();
    let s = theta.sin();
    let mut p = vec![vec![0.0; l_max + 1]; l_max + 1];
    let mut pmm = (1.0 / (4.0 * PI)).sqrt();
    for m in 0..=l_max {
        if m > 0 {
            pmm *= -s * ((2 * m + 1) as f64 / (2 * m) as f64).sqrt();
        }
        p[m][m] = pmm;
        if m < l_max {
            p[m + 1][m] = ((2 * m + 3) as f64).sqrt() * x * pmm;
        }
        for l in (m + 2)..=l_max {
            let lf = l as f64;
            let mf = m as f64;
            let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
            let prev = l as f64 - 1.0;
            let b = ((4.0 * prev * prev - 1.0) / (prev * prev - mf * mf)).sqrt();
            p[l][m] = a * (x * p[l - 1][m] - p[l - 2][m] / b);
        }
    }
    p
}

/// Y_kq(θ, φ) with the Condon-Shortley phase.
pub fn spherical_harmonic(k: u32, q: i64, theta: f64, phi: f64) -> C64 {
    let p = normalized_legendre(k as usize, theta);
    let m = q.unsigned_abs() as usize;
    if m > k as usize {
        return C64::new(0.0, 0.0);
    }
    let y = C64::from_polar(p[k as usize][m], m as f64 * phi);
    if q >= 0 {
        y
    } else if m % 2 == 0 {
        y.conj()
    } else {
        -y.conj()
    }
}

/// Multipole coefficients ρ_kq = tr(ρ T_kq†) of a pure state.
#[derive(Clone, Debug)]
pub struct Multipoles {
    pub two_j: u32,
    /// Indexed [k][q + k].
    pub coefficients: Vec<Vec<C64>>,
}

impl Multipoles {
    pub fn of_state(state: &ProbeState) -> Result<Self> {
        if state.is_tensor() {
            return Err(Error::InvalidArgument(
                "Wigner functions are defined for single-irrep states".into(),
            ));
        }
        let two_j = state.two_j();
        if two_j > MAX_TWO_J {
            return Err(Error::InvalidArgument(format!("2J = {two_j} exceeds {MAX_TWO_J}")));
        }
        let psi = state.amps();
        let coefficients = (0..=two_j)
            .into_par_iter()
            .map(|k| {
                (-i64::from(k)..=i64::from(k))
                    .map(|q| {
                        let t = spherical_tensor(two_j, k, q);
                        vector::inner(psi, &t.apply(psi)).conj()
                    })
                    .collect()
            })
            .collect();
        Ok(Self { two_j, coefficients })
    }

    fn prefactor(&self) -> f64 {
        (4.0 * PI / f64::from(self.two_j + 1)).sqrt()
    }

    /// Σ_q e^{iqφ} c_q for one polar angle, returned as (q, c_q) with
    /// c_q = Σ_k ρ_kq P̄_k^{|q|} (signs folded in).
    fn azimuthal_coefficients(&self, theta: f64) -> Vec<C64> {
        let kmax = self.two_j as usize;
        let p = normalized_legendre(kmax, theta);
        let mut c = vec![C64::new(0.0, 0.0); 2 * kmax + 1];
        for (k, row) in self.coefficients.iter().enumerate() {
            for (idx, &rho) in row.iter().enumerate() {
                let q = idx as i64 - k as i64;
                let m = q.unsigned_abs() as usize;
                let sign = if q < 0 && m % 2 == 1 { -1.0 } else { 1.0 };
                c[(q + kmax as i64) as usize] += rho * (sign * p[k][m]);
            }
        }
        c
    }

    /// Complex value of the expansion; the imaginary part vanishes up to rounding.
    pub fn evaluate_complex(&self, theta: f64, phi: f64) -> C64 {
        let kmax = self.two_j as i64;
        let c = self.azimuthal_coefficients(theta);
        let sum: C64 = c
            .iter()
            .enumerate()
            .map(|(i, &v)| v * C64::from_polar(1.0, (i as i64 - kmax) as f64 * phi))
            .sum();
        sum * self.prefactor()
    }

    pub fn evaluate(&self, theta: f64, phi: f64) -> f64 {
        self.evaluate_complex(theta, phi).re
    }
}

/// W(θ, φ) at a single point.
pub fn wigner_at(state: &ProbeState, theta: f64, phi: f64) -> Result<f64> {
    Ok(Multipoles::of_state(state)?.evaluate(theta, phi))
}

/// Clenshaw-Curtis weights for ∫₋₁¹ f(x) dx at x_i = cos(iπ/(n−1)).
pub fn clenshaw_curtis_weights(n: usize) -> Vec<f64> {
    assert!(n >= 2, "Clenshaw-Curtis needs at least two nodes");
    let big_n = n - 1;
    (0..n)
        .map(|i| {
            let c = if i == 0 || i == big_n { 1.0 } else { 2.0 };
            let mut s = 1.0;
            for k in 1..=big_n / 2 {
                let b = if 2 * k == big_n { 1.0 } else { 2.0 };
                let kk = k as f64;
                s -= b / (4.0 * kk * kk - 1.0) * (2.0 * kk * i as f64 * PI / big_n as f64).cos();
            }
            c * s / big_n as f64
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct WignerGrid {
    pub two_j: u32,
    /// θ_i = iπ/(n_θ − 1)
    pub thetas: Vec<f64>,
    /// φ_j = 2πj/n_φ
    pub phis: Vec<f64>,
    /// values[i][j] = W(θ_i, φ_j)
    pub values: Vec<Vec<f64>>,
    /// Largest imaginary part met while assembling.
    pub max_imaginary: f64,
}

impl WignerGrid {
    /// ((2J+1)/4π) ∬ f dΩ over the grid.
    fn integrate(&self, f: impl Fn(usize, usize) -> f64) -> f64 {
        let wt = clenshaw_curtis_weights(self.thetas.len());
        let dphi = 2.0 * PI / self.phis.len() as f64;
        let mut acc = 0.0;
        for (i, w) in wt.iter().enumerate() {
            let row: f64 = (0..self.phis.len()).map(|j| f(i, j)).sum();
            acc += w * row * dphi;
        }
        acc * f64::from(self.two_j + 1) / (4.0 * PI)
    }

    /// Should be 1.
    pub fn normalization(&self) -> f64 {
        self.integrate(|i, j| self.values[i][j])
    }

    /// ((2J+1)/4π) ∬ W_a W_b dΩ, which should equal tr(ρ_a ρ_b).
    pub fn overlap(&self, other: &WignerGrid) -> Result<f64> {
        if self.values.len() != other.values.len() || self.phis.len() != other.phis.len() || self.two_j != other.two_j {
            return Err(Error::DimensionMismatch("Wigner grids differ in shape".into()));
        }
        Ok(self.integrate(|i, j| self.values[i][j] * other.values[i][j]))
    }

    /// Grid index with the largest value.
    pub fn argmax(&self) -> (usize, usize) {
        let mut best = (0, 0);
        for (i, row) in self.values.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if v > self.values[best.0][best.1] {
                    best = (i, j);
                }
            }
        }
        best
    }
}

pub fn spin_wigner(state: &ProbeState, n_theta: usize, n_phi: usize) -> Result<WignerGrid> {
    if n_theta < 2 || n_phi < 1 {
        return Err(Error::InvalidArgument(format!(
            "grid {n_theta}×{n_phi} is too small"
        )));
    }
    let mp = Multipoles::of_state(state)?;
    let thetas: Vec<f64> = (0..n_theta).map(|i| PI * i as f64 / (n_theta - 1) as f64).collect();
    let phis: Vec<f64> = (0..n_phi).map(|j| 2.0 * PI * j as f64 / n_phi as f64).collect();
    let kmax = mp.two_j as i64;
    let pre = mp.prefactor();
    let rows: Vec<(Vec<f64>, f64)> = thetas
        .par_iter()
        .map(|&theta| {
            let c = mp.azimuthal_coefficients(theta);
            let mut worst = 0.0f64;
            let row = phis
                .iter()
                .map(|&phi| {
                    let v: C64 = c
                        .iter()
                        .enumerate()
                        .map(|(i, &x)| x * C64::from_polar(1.0, (i as i64 - kmax) as f64 * phi))
                        .sum::<C64>()
                        * pre;
                    worst = worst.max(v.im.abs());
                    v.re
                })
                .collect();
            (row, worst)
        })
        .collect();
    let max_imaginary = rows.iter().fold(0.0f64, |m, r| m.max(r.1));
    Ok(WignerGrid {
        two_j: mp.two_j,
        thetas,
        phis,
        values: rows.into_iter().map(|r| r.0).collect(),
        max_imaginary,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::random;
    use crate::spinrep::{coherent_state, SpinRep, Zeta};
    use rand::{Rng, SeedableRng};

    #[test]
    fn cg_values() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((clebsch_gordan(1, 1, 1, -1, 0, 0) - h).abs() < 1e-14);
        assert!((clebsch_gordan(2, 0, 2, 0, 4, 0) - (2.0f64 / 3.0).sqrt()).abs() < 1e-14);
        assert_eq!(clebsch_gordan(2, 0, 2, 0, 2, 0), 0.0);
        assert_eq!(clebsch_gordan(2, 2, 2, 2, 2, 2), 0.0);
    }

    #[test]
    fn cg_orthogonality() {
        let (j1, j2) = (3i64, 3i64);
        for two_j in [0i64, 2, 4, 6] {
            for two_jp in [0i64, 2, 4, 6] {
                for two_m in (-two_j.min(two_jp)..=two_j.min(two_jp)).step_by(2) {
                    let mut s = 0.0;
                    for m1 in (-j1..=j1).step_by(2) {
                        let m2 = two_m - m1;
                        s += clebsch_gordan(j1, m1, j2, m2, two_j, two_m) * clebsch_gordan(j1, m1, j2, m2, two_jp, two_m);
                    }
                    let expect = if two_j == two_jp { 1.0 } else { 0.0 };
                    assert!((s - expect).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn tensors_are_orthonormal() {
        let two_j = 5;
        let ts: Vec<CMatrix> = (0..=two_j)
            .flat_map(|k| (-(k as i64)..=k as i64).map(move |q| spherical_tensor(two_j, k, q)))
            .collect();
        for (a, ta) in ts.iter().enumerate() {
            for (b, tb) in ts.iter().enumerate() {
                let g = ta.adjoint().matmul(tb).trace();
                let expect = if a == b { 1.0 } else { 0.0 };
                assert!((g - C64::new(expect, 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn harmonics_low_order() {
        let (t, p) = (0.7, 1.3);
        let y10 = spherical_harmonic(1, 0, t, p);
        assert!((y10.re - (3.0 / (4.0 * PI)).sqrt() * t.cos()).abs() < 1e-14);
        let y11 = spherical_harmonic(1, 1, t, p);
        let e = C64::from_polar(-(3.0 / (8.0 * PI)).sqrt() * t.sin(), p);
        assert!((y11 - e).norm() < 1e-14);
    }

    #[test]
    fn grid_normalization_and_purity() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for two_j in [2, 5, 8] {
            let s = ProbeState::new(two_j, random::random_unit_vector(two_j as usize + 1, &mut rng)).unwrap();
            let g = spin_wigner(&s, 61, 64).unwrap();
            assert!(g.max_imaginary < 1e-10);
            assert!((g.normalization() - 1.0).abs() < 1e-10);
            assert!((g.overlap(&g).unwrap() - 1.0).abs() < 1e-10);
            let o = ProbeState::new(two_j, random::random_unit_vector(two_j as usize + 1, &mut rng)).unwrap();
            let go = spin_wigner(&o, 61, 64).unwrap();
            let expect = vector::inner(s.amps(), o.amps()).norm_sqr();
            assert!((g.overlap(&go).unwrap() - expect).abs() < 1e-10);
        }
    }

    #[test]
    fn coherent_peak_at_pole() {
        let s = coherent_state(6, Zeta::real(0.0));
        let g = spin_wigner(&s, 37, 36).unwrap();
        assert_eq!(g.argmax().0, 0);
    }

    fn rotate(theta: [f64; 3], n: [f64; 3]) -> [f64; 3] {
        let a = crate::metrology::norm3(theta);
        let k = theta.map(|x| x / a);
        let (c, s) = (a.cos(), a.sin());
        let kn = k[0] * n[0] + k[1] * n[1] + k[2] * n[2];
        let kx = [k[1] * n[2] - k[2] * n[1], k[2] * n[0] - k[0] * n[2], k[0] * n[1] - k[1] * n[0]];
        std::array::from_fn(|i| n[i] * c + kx[i] * s + k[i] * kn * (1.0 - c))
    }

    fn angles(n: [f64; 3]) -> (f64, f64) {
        (n[2].clamp(-1.0, 1.0).acos(), n[1].atan2(n[0]))
    }

    #[test]
    fn rotation_covariance() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        for two_j in [1, 3, 6, 10] {
            let rep = SpinRep::new(two_j);
            let s = ProbeState::new(two_j, random::random_unit_vector(two_j as usize + 1, &mut rng)).unwrap();
            let theta = random::haar_rotation_vector(&mut rng);
            let r = s.transformed(&rep.rotation(theta));
            let (ms, mr) = (Multipoles::of_state(&s).unwrap(), Multipoles::of_state(&r).unwrap());
            for _ in 0..10 {
                let n = random::random_direction(&mut rng);
                let back = rotate(theta.map(|x| -x), n);
                let (t1, p1) = angles(n);
                let (t0, p0) = angles(back);
                assert!((mr.evaluate(t1, p1) - ms.evaluate(t0, p0)).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn tetrahedral_point_symmetry() {
        let s = crate::probes::tetrahedral_state(&SpinRep::new(6), None).unwrap();
        let g = spin_wigner(&s, 19, 24).unwrap();
        for i in 0..19 {
            for j in 0..24 {
                assert!((g.values[i][j] - g.values[i][(j + 12) % 24]).abs() < 1e-10);
            }
        }
        let mp = Multipoles::of_state(&s).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            let n = random::random_direction(&mut rng);
            // 120° about (1,1,1) cycles the axes
            let (t0, p0) = angles(n);
            let (t1, p1) = angles([n[2], n[0], n[1]]);
            assert!((mp.evaluate(t0, p0) - mp.evaluate(t1, p1)).abs() < 1e-10);
            let _ = rng.gen::<f64>();
        }
    }
}
