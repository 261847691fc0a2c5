//! Probe-state constructors: GHZ and compass states, group-invariant states,
//! twirled coherent states, fine-tuned invariant combinations and the
//! maximally entangled two-copy probe.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::groups::{build_group, trivial_irrep, twirl, FiniteGroupRep, GroupName};
use crate::metrology::{check_conditions, ConditionReport};
use crate::numerics::optimize::{levenberg_marquardt, nelder_mead};
use crate::numerics::{random, vector};
use crate::spinrep::{coherent_state, Axis, SpinRep, Zeta};
use crate::state::{ProbeState, ZERO_NORM_FLOOR};
use crate::{CMatrix, RMatrix, C64};

/// Fine-tuned states with a larger max residual than this are flagged.
pub const DEFAULT_FINE_TUNE_THRESHOLD: f64 = 1e-8;
/// Random restarts used by [`fine_tune_invariant`].
pub const FINE_TUNE_RESTARTS: u64 = 10;

/// (|J, m = J⟩ + |J, m = −J⟩)/√2 along `axis`.
pub fn ghz_state(rep: &SpinRep, axis: Axis) -> ProbeState {
    let d = rep.dim();
    let mut v = vector::zeros(d);
    v[0] = C64::new(1.0, 0.0);
    v[d - 1] = C64::new(1.0, 0.0);
    let v = match axis {
        Axis::Z => v,
        Axis::X => rep.axis_rotation(Axis::Y, PI / 2.0).apply(&v),
        Axis::Y => rep.axis_rotation(Axis::X, -PI / 2.0).apply(&v),
    };
    ProbeState::new(rep.two_j(), v).expect("GHZ state is normalizable")
}

fn ghz_triple(rep: &SpinRep) -> [Vec<C64>; 3] {
    Axis::ALL.map(|a| ghz_state(rep, a).into_amps())
}

/// Normalized Σ_ℓ e^{iδ_ℓ}|GHZ_ℓ⟩.
pub fn compass_state(rep: &SpinRep, deltas: [f64; 3]) -> Result<ProbeState> {
    let ghz = ghz_triple(rep);
    let mut acc = vector::zeros(rep.dim());
    for (g, d) in ghz.iter().zip(deltas) {
        vector::axpy(&mut acc, C64::from_polar(1.0, d), g);
    }
    let norm = vector::norm(&acc);
    if norm < ZERO_NORM_FLOOR {
        return Err(Error::ZeroNorm { norm });
    }
    ProbeState::new(rep.two_j(), acc)
}

/// Gram and projected-Gram matrices of the three GHZ states, so the compass
/// overlap is a ratio of two quadratic forms in the phases.
struct CompassForms {
    gram: [[C64; 3]; 3],
    projected: [[C64; 3]; 3],
}

impl CompassForms {
    fn new(rep: &SpinRep, projector: &CMatrix) -> Self {
        let ghz = ghz_triple(rep);
        let pg: Vec<Vec<C64>> = ghz.iter().map(|g| projector.apply(g)).collect();
        let mut gram = [[C64::new(0.0, 0.0); 3]; 3];
        let mut projected = gram;
        for i in 0..3 {
            for k in 0..3 {
                gram[i][k] = vector::inner(&ghz[i], &ghz[k]);
                projected[i][k] = vector::inner(&ghz[i], &pg[k]);
            }
        }
        Self { gram, projected }
    }

    fn overlap(&self, deltas: &[f64]) -> f64 {
        let u: Vec<C64> = deltas.iter().map(|&d| C64::from_polar(1.0, d)).collect();
        let form = |m: &[[C64; 3]; 3]| {
            let mut acc = C64::new(0.0, 0.0);
            for i in 0..3 {
                for k in 0..3 {
                    acc += u[i].conj() * m[i][k] * u[k];
                }
            }
            acc.re
        };
        let den = form(&self.gram);
        if den < ZERO_NORM_FLOOR * ZERO_NORM_FLOOR {
            0.0
        } else {
            form(&self.projected) / den
        }
    }
}

fn a4_projector(rep: &SpinRep) -> Result<CMatrix> {
    Ok(trivial_irrep(&build_group(GroupName::A4Tetrahedral, rep)?)?.projector)
}

/// ‖Π_{A4} |compass(δ)⟩‖² for N = `two_j` (N even).
pub fn compass_trivial_overlap(two_j: u32, deltas: [f64; 3]) -> Result<f64> {
    let rep = SpinRep::new(two_j);
    let forms = CompassForms::new(&rep, &a4_projector(&rep)?);
    Ok(forms.overlap(&deltas))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CompassOverlap {
    pub n: u32,
    pub deltas: [f64; 3],
    pub overlap: f64,
}

/// Overlap with the A4-invariant subspace at δ = 0 for each even N.
pub fn compass_trivial_overlap_scan(ns: &[u32]) -> Result<Vec<CompassOverlap>> {
    ns.par_iter()
        .map(|&n| {
            Ok(CompassOverlap {
                n,
                deltas: [0.0; 3],
                overlap: compass_trivial_overlap(n, [0.0; 3])?,
            })
        })
        .collect()
}

/// Maximizes the A4 overlap over the compass phases: coarse 16³ grid, then
/// a simplex refinement from the best grid point.
pub fn optimize_compass_deltas(two_j: u32) -> Result<CompassOverlap> {
    let rep = SpinRep::new(two_j);
    let forms = CompassForms::new(&rep, &a4_projector(&rep)?);
    let step = 2.0 * PI / 16.0;
    let mut best = ([0.0; 3], forms.overlap(&[0.0; 3]));
    for a in 0..16 {
        for b in 0..16 {
            for c in 0..16 {
                let d = [a as f64 * step, b as f64 * step, c as f64 * step];
                let v = forms.overlap(&d);
                if v > best.1 {
                    best = (d, v);
                }
            }
        }
    }
    let refined = nelder_mead(|x| -forms.overlap(x), &best.0, step / 4.0, 1e-15, 2000);
    let (deltas, overlap) = if -refined.value > best.1 {
        ([refined.x[0], refined.x[1], refined.x[2]], -refined.value)
    } else {
        best
    };
    let wrap = |x: f64| x.rem_euclid(2.0 * PI);
    Ok(CompassOverlap {
        n: two_j,
        deltas: deltas.map(wrap),
        overlap,
    })
}

/// The A4-invariant state (first basis vector, or the given combination of
/// the invariant basis when the multiplicity exceeds one).
pub fn tetrahedral_state(rep: &SpinRep, coefficients: Option<&[C64]>) -> Result<ProbeState> {
    let group = build_group(GroupName::A4Tetrahedral, rep)?;
    let data = trivial_irrep(&group)?;
    if data.multiplicity == 0 {
        return Err(Error::NoTrivialIrrep { two_j: rep.two_j() });
    }
    let amps = match coefficients {
        None => data.basis[0].clone(),
        Some(c) => combine(&data.basis, c)?,
    };
    ProbeState::new(rep.two_j(), amps)
}

fn combine(basis: &[Vec<C64>], coefficients: &[C64]) -> Result<Vec<C64>> {
    if coefficients.len() != basis.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} coefficients for an invariant basis of size {}",
            coefficients.len(),
            basis.len()
        )));
    }
    let mut acc = vector::zeros(basis[0].len());
    for (b, &c) in basis.iter().zip(coefficients) {
        vector::axpy(&mut acc, c, b);
    }
    Ok(acc)
}

/// S3 twirl of the coherent state pointing at polar angle `xi`, azimuth 0.
pub fn s3_prism_state(rep: &SpinRep, xi: f64) -> Result<ProbeState> {
    let group = build_group(GroupName::S3Prism, rep)?;
    twirl(&group, &coherent_state(rep.two_j(), Zeta::from_angles(xi, 0.0)))
}

/// The same state written out as six coherent states on the corners of a
/// triangular prism.
pub fn prism_superposition(two_j: u32, xi: f64) -> Result<ProbeState> {
    let n = f64::from(two_j);
    let third = 2.0 * PI / 3.0;
    let terms = [
        (0.0, xi, 0.0),
        (PI * n / 3.0, xi, -third),
        (2.0 * PI * n / 3.0, xi, -2.0 * third),
        (PI * n / 2.0, PI - xi, 0.0),
        (PI * n / 6.0, PI - xi, third),
        (5.0 * PI * n / 6.0, PI - xi, 2.0 * third),
    ];
    let mut acc = vector::zeros(two_j as usize + 1);
    for (phase, polar, azimuth) in terms {
        let c = coherent_state(two_j, Zeta::from_angles(polar, azimuth));
        vector::axpy(&mut acc, C64::from_polar(1.0, phase), c.amps());
    }
    let norm = vector::norm(&acc);
    if norm < ZERO_NORM_FLOOR {
        return Err(Error::ZeroProjection { norm });
    }
    ProbeState::new(two_j, acc)
}

#[derive(Clone, Debug, Serialize)]
pub struct FineTuneResult {
    #[serde(skip)]
    pub state: ProbeState,
    /// Phase-fixed coefficients over the invariant basis.
    #[serde(skip)]
    pub coefficients: Vec<C64>,
    pub multiplicity: usize,
    /// Sum-of-squares condition residual R.
    pub squared_residual: f64,
    pub report: ConditionReport,
    /// True when the max residual exceeds the threshold.
    pub flagged: bool,
}

/// Residual quadratic forms over the invariant basis, in the real embedding
/// c = a + ib ↦ x = (a, b). Each residual is xᵀMx/xᵀx − offset.
struct ResidualForms {
    forms: Vec<(RMatrix, f64)>,
}

impl ResidualForms {
    fn new(rep: &SpinRep, basis: &[Vec<C64>]) -> Self {
        let m = basis.len();
        let images: Vec<[Vec<C64>; 3]> = basis
            .iter()
            .map(|b| rep.generators().clone().map(|g| g.apply(b)))
            .collect();
        let embed = |h: &dyn Fn(usize, usize) -> C64| {
            RMatrix::from_fn(2 * m, 2 * m, |r, c| {
                let v = h(r % m, c % m);
                match (r < m, c < m) {
                    (true, true) | (false, false) => v.re,
                    (true, false) => -v.im,
                    (false, true) => v.im,
                }
            })
        };
        let target = rep.casimir() / 3.0;
        let mut forms = Vec::with_capacity(9);
        for i in 0..3 {
            forms.push((embed(&|k, l| vector::inner(&basis[k], &images[l][i])), 0.0));
        }
        // each unordered pair stands for both orderings in R
        let w = std::f64::consts::SQRT_2;
        for (i, l) in [(0, 1), (0, 2), (1, 2)] {
            let h = |k: usize, q: usize| {
                (vector::inner(&images[k][i], &images[q][l]) + vector::inner(&images[k][l], &images[q][i]))
                    * (0.5 * w)
            };
            forms.push((embed(&h), 0.0));
        }
        for i in 0..3 {
            forms.push((embed(&|k, l| vector::inner(&images[k][i], &images[l][i])), target));
        }
        Self { forms }
    }

    fn model(&self, x: &[f64]) -> (Vec<f64>, RMatrix) {
        let nn: f64 = x.iter().map(|v| v * v).sum();
        let mut r = Vec::with_capacity(self.forms.len());
        let mut jac = RMatrix::zeros(self.forms.len(), x.len());
        for (row, (m, offset)) in self.forms.iter().enumerate() {
            let mx = m.apply(x);
            let q = x.iter().zip(&mx).map(|(a, b)| a * b).sum::<f64>() / nn;
            r.push(q - offset);
            for k in 0..x.len() {
                jac[(row, k)] = 2.0 * (mx[k] - q * x[k]) / nn;
            }
        }
        (r, jac)
    }
}

/// Minimizes the condition residual over unit combinations of the group's
/// invariant vectors, from [`FINE_TUNE_RESTARTS`] seeded starts.
pub fn fine_tune_invariant(group: &FiniteGroupRep, rep: &SpinRep) -> Result<FineTuneResult> {
    let seeds: Vec<u64> = (0..FINE_TUNE_RESTARTS).collect();
    fine_tune_with_seeds(group, rep, &seeds, DEFAULT_FINE_TUNE_THRESHOLD)
}

pub fn fine_tune_with_seeds(
    group: &FiniteGroupRep,
    rep: &SpinRep,
    seeds: &[u64],
    threshold: f64,
) -> Result<FineTuneResult> {
    let data = trivial_irrep(group)?;
    let m = data.multiplicity;
    if m == 0 {
        return Err(Error::NoTrivialIrrep { two_j: rep.two_j() });
    }
    let coefficients = if m == 1 {
        vec![C64::new(1.0, 0.0)]
    } else {
        let forms = ResidualForms::new(rep, &data.basis);
        let normalize = |x: &mut Vec<f64>| {
            let n = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            x.iter_mut().for_each(|v| *v /= n);
        };
        let best = seeds
            .par_iter()
            .map(|&seed| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let x0: Vec<f64> = (0..2 * m).map(|_| random::standard_normal(&mut rng)).collect();
                levenberg_marquardt(|x| forms.model(x), normalize, &x0, 1e-30, 500)
            })
            .min_by(|a, b| a.value.partial_cmp(&b.value).unwrap_or(std::cmp::Ordering::Equal))
            .ok_or_else(|| Error::InvalidArgument("no restart seeds".into()))?;
        let mut c: Vec<C64> = (0..m).map(|k| C64::new(best.x[k], best.x[k + m])).collect();
        vector::fix_global_phase(&mut c);
        c
    };
    let state = ProbeState::new(rep.two_j(), combine(&data.basis, &coefficients)?)?;
    let report = check_conditions(&state);
    Ok(FineTuneResult {
        flagged: report.max_residual > threshold,
        squared_residual: report.squared_residual(),
        report,
        multiplicity: m,
        coefficients,
        state,
    })
}

/// (2J+1)^{−1/2} Σ_m |J,m⟩|J,m⟩.
pub fn maximally_entangled_probe(rep: &SpinRep) -> ProbeState {
    let d = rep.dim();
    let mut v = vector::zeros(d * d);
    for k in 0..d {
        v[k * d + k] = C64::new(1.0, 0.0);
    }
    ProbeState::new_tensor(rep.two_j(), v).expect("maximally entangled state is normalizable")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrology::qfim;

    #[test]
    fn ghz_axes() {
        let rep = SpinRep::new(6);
        let z = ghz_state(&rep, Axis::Z);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((z.amps()[0].re - h).abs() < 1e-15 && (z.amps()[6].re - h).abs() < 1e-15);
        for axis in Axis::ALL {
            let s = ghz_state(&rep, axis);
            let m = crate::spinrep::collective_moments(&s);
            assert!((m.jordan(axis.index(), axis.index()) - 9.0).abs() < 1e-12);
        }
        let half = ghz_state(&SpinRep::new(1), Axis::X);
        let m = crate::spinrep::collective_moments(&half);
        assert!((m.jordan(0, 0) - 0.25).abs() < 1e-14);
    }

    #[test]
    fn j4_compass_is_tetrahedral() {
        let rep = SpinRep::new(8);
        let c = compass_state(&rep, [0.0; 3]).unwrap();
        let t = tetrahedral_state(&rep, None).unwrap();
        assert!(vector::infidelity(c.amps(), t.amps()) < 1e-12);
        let a = |k: usize| c.amps()[k].norm_sqr();
        assert!((a(0) - 5.0 / 24.0).abs() < 1e-12);
        assert!((a(8) - 5.0 / 24.0).abs() < 1e-12);
        assert!((a(4) - 7.0 / 12.0).abs() < 1e-12);
    }

    #[test]
    fn j3_compass_is_not_optimal() {
        let c = compass_state(&SpinRep::new(6), [0.0; 3]).unwrap();
        assert!(check_conditions(&c).max_residual > 0.1);
        assert!(qfim(&c, [0.0; 3]).trace_inverse().unwrap() > 0.1875 + 1e-3);
    }

    #[test]
    fn mod_eight_periodicity() {
        let ns: Vec<u32> = (2..=12).map(|k| 2 * k).collect();
        for row in compass_trivial_overlap_scan(&ns).unwrap() {
            if row.n % 8 == 0 {
                assert!((row.overlap - 1.0).abs() < 1e-10, "{row:?}");
            } else {
                assert!(row.overlap < 0.999, "{row:?}");
            }
        }
    }

    #[test]
    fn optimized_phases_never_lose() {
        for n in [6, 8] {
            let at_zero = compass_trivial_overlap(n, [0.0; 3]).unwrap();
            let opt = optimize_compass_deltas(n).unwrap();
            assert!(opt.overlap >= at_zero - 1e-12);
            let direct = compass_trivial_overlap(n, opt.deltas).unwrap();
            assert!((direct - opt.overlap).abs() < 1e-12);
        }
    }

    #[test]
    fn tetrahedral_absent_and_present() {
        for two_j in [2, 4, 10] {
            assert!(matches!(
                tetrahedral_state(&SpinRep::new(two_j), None),
                Err(Error::NoTrivialIrrep { .. })
            ));
        }
        for two_j in [6, 8, 12, 14, 16] {
            let s = tetrahedral_state(&SpinRep::new(two_j), None).unwrap();
            assert!(check_conditions(&s).max_residual < 1e-10);
        }
    }

    #[test]
    fn twirl_matches_prism_sum() {
        for two_j in [6, 8, 10, 14] {
            let rep = SpinRep::new(two_j);
            for xi in [0.3, 1.1, (1.0 / 3f64.sqrt()).acos()] {
                let a = s3_prism_state(&rep, xi).unwrap();
                let b = prism_superposition(two_j, xi).unwrap();
                assert!(vector::infidelity(a.amps(), b.amps()) < 1e-12, "2J={two_j} ξ={xi}");
            }
        }
    }

    #[test]
    fn prism_state_large_j_balance() {
        let rep = SpinRep::new(20);
        let s = s3_prism_state(&rep, (1.0 / 3f64.sqrt()).acos()).unwrap();
        let m = crate::spinrep::collective_moments(&s);
        let target = 10.0 * 11.0 / 3.0;
        for i in 0..3 {
            assert!((m.jordan(i, i) / target - 1.0).abs() < 0.02);
        }
        let group = build_group(GroupName::S3Prism, &rep).unwrap();
        assert!(crate::groups::invariance_defect(&group, &[s.amps().to_vec()]) < 1e-10);
    }

    #[test]
    fn fine_tuned_s3_j4() {
        let rep = SpinRep::new(8);
        let group = build_group(GroupName::S3Prism, &rep).unwrap();
        let r = fine_tune_invariant(&group, &rep).unwrap();
        assert_eq!(r.multiplicity, 2);
        assert!(!r.flagged);
        assert!(r.report.max_residual < 1e-10);
        let a = |k: usize| r.state.amps()[k].norm_sqr();
        assert!((a(1) - 10.0 / 27.0).abs() < 1e-8);
        assert!((a(7) - 10.0 / 27.0).abs() < 1e-8);
        assert!((a(4) - 7.0 / 27.0).abs() < 1e-8);
    }

    #[test]
    fn fine_tune_j3_is_flagged() {
        let rep = SpinRep::new(6);
        let group = build_group(GroupName::S3Prism, &rep).unwrap();
        let r = fine_tune_invariant(&group, &rep).unwrap();
        assert_eq!(r.multiplicity, 1);
        assert!(r.flagged && r.report.max_residual > 1e-3);
    }

    #[test]
    fn entangled_probe_moments() {
        for two_j in [1, 4, 7] {
            let s = maximally_entangled_probe(&SpinRep::new(two_j));
            assert!(check_conditions(&s).max_residual < 1e-12);
        }
    }
}
