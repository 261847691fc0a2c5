//! Measurement schemes for locally optimal estimation: the projective basis
//! built from |ψ⟩ and J_i|ψ⟩, parity observables, classical Fisher
//! information and the method-of-moments matrix.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::metrology::{a_matrices, check_conditions};
use crate::numerics::{herm_eig, unitary_exp, vector};
use crate::spinrep::SpinRep;
use crate::state::{apply_on_first_factor, ProbeState};
use crate::{CMatrix, RMatrix, C64};

/// Outcomes less likely than this are candidates for pruning.
pub const PROBABILITY_FLOOR: f64 = 1e-14;
/// Largest probability gradient tolerated on a pruned outcome.
pub const GRADIENT_FLOOR: f64 = 1e-10;
/// Default smallest covariance eigenvalue accepted by [`moments_matrix`].
pub const DEFAULT_COVARIANCE_FLOOR: f64 = 1e-14;
/// Largest residual a probe may have for [`kl_scheme`].
pub const KL_RESIDUAL_LIMIT: f64 = 1e-8;
/// Eigenvalues closer than this share one spectral projector.
pub const EIGENVALUE_MERGE_TOL: f64 = 1e-8;
/// Joint-density entries below this count as negative.
pub const NEGATIVITY_TOL: f64 = 1e-9;

/// Applies a single-factor operator to a state vector, lifting it to the
/// first factor when the vector lives on two copies.
fn act(op: &CMatrix, v: &[C64]) -> Vec<C64> {
    if op.cols() == v.len() {
        op.apply(v)
    } else {
        apply_on_first_factor(op, v, true)
    }
}

/// |ψ(θ)⟩ together with its three partial derivatives.
#[derive(Clone, Debug)]
pub struct EvolvedProbe {
    pub psi: Vec<C64>,
    pub grads: [Vec<C64>; 3],
}

/// ∂_j|ψ(θ)⟩ = −i U(θ) A⁽ʲ⁾(θ)|ψ⟩.
pub fn evolve_with_gradients(state: &ProbeState, theta: [f64; 3]) -> EvolvedProbe {
    let rep = SpinRep::new(state.two_j());
    let u = rep.rotation(theta);
    let images = rep.images(state);
    let a = a_matrices(theta).a_vectors;
    let minus_i = C64::new(0.0, -1.0);
    let grads = a.map(|row| {
        let mut w = vector::zeros(state.dim());
        for (img, &c) in images.iter().zip(&row) {
            vector::axpy(&mut w, C64::new(c, 0.0), img);
        }
        vector::scale(&state.apply_factor_vec(&u, &w), minus_i)
    });
    EvolvedProbe {
        psi: state.apply_factor(&u),
        grads,
    }
}

/// Projective measurement given by orthonormal range bases.
#[derive(Clone, Debug)]
pub struct MeasurementScheme {
    pub labels: Vec<String>,
    pub projectors: Vec<CMatrix>,
    ranges: Vec<Vec<Vec<C64>>>,
}

impl MeasurementScheme {
    pub fn from_ranges(labels: Vec<String>, ranges: Vec<Vec<Vec<C64>>>) -> Result<Self> {
        let dim = ranges
            .iter()
            .flatten()
            .map(Vec::len)
            .next()
            .ok_or_else(|| Error::InvalidArgument("empty measurement".into()))?;
        if labels.len() != ranges.len() || ranges.iter().flatten().any(|b| b.len() != dim) {
            return Err(Error::DimensionMismatch("inconsistent measurement ranges".into()));
        }
        let projectors = ranges
            .iter()
            .map(|r| {
                r.iter().fold(CMatrix::zeros(dim, dim), |acc, b| &acc + &CMatrix::outer(b, b))
            })
            .collect();
        Ok(Self {
            labels,
            projectors,
            ranges,
        })
    }

    pub fn len(&self) -> usize {
        self.projectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.projectors.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.projectors[0].rows()
    }

    pub fn range(&self, k: usize) -> &[Vec<C64>] {
        &self.ranges[k]
    }

    /// ‖Σ Π_k − I‖_max
    pub fn completeness_defect(&self) -> f64 {
        let d = self.dim();
        let sum = self.projectors.iter().fold(CMatrix::zeros(d, d), |a, p| &a + p);
        sum.max_abs_diff(&CMatrix::identity(d))
    }

    /// max over k ≠ l of ‖Π_kΠ_l‖_max
    pub fn orthogonality_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for (k, a) in self.projectors.iter().enumerate() {
            for b in &self.projectors[k + 1..] {
                worst = worst.max(a.matmul(b).max_abs());
            }
        }
        worst
    }

    /// max over k of ‖Π_k² − Π_k‖_max and of the Hermiticity defect.
    pub fn idempotence_defect(&self) -> f64 {
        self.projectors.iter().fold(0.0f64, |m, p| {
            m.max(p.matmul(p).max_abs_diff(p)).max(p.hermiticity_defect())
        })
    }
}

/// {|ψ⟩⟨ψ|, P₁, P₂, P₃, Q} with P_i the projector onto J_i|ψ⟩ and Q the rest.
pub fn kl_scheme(state: &ProbeState) -> Result<MeasurementScheme> {
    let report = check_conditions(state);
    if report.max_residual > KL_RESIDUAL_LIMIT {
        return Err(Error::NotOptimalProbe {
            residual: report.max_residual,
        });
    }
    let rep = SpinRep::new(state.two_j());
    let psi = state.amps().to_vec();
    let images = rep.images(state);
    let mut seeds = vec![psi.clone()];
    for img in &images {
        let (u, _) = vector::normalized(img, 1e-12).ok_or(Error::NotOptimalProbe {
            residual: report.max_residual,
        })?;
        seeds.push(u);
    }
    let d = state.dim();
    let mut all = seeds.clone();
    all.extend((0..d).map(|k| {
        let mut e = vector::zeros(d);
        e[k] = C64::new(1.0, 0.0);
        e
    }));
    let complement: Vec<Vec<C64>> = vector::orthonormalize(&all, 1e-8).split_off(4);
    let mut ranges: Vec<Vec<Vec<C64>>> = seeds.into_iter().map(|s| vec![s]).collect();
    ranges.push(complement);
    let labels = ["psi", "P1", "P2", "P3", "Q"].map(String::from).to_vec();
    MeasurementScheme::from_ranges(labels, ranges)
}

fn range_probability(range: &[Vec<C64>], psi: &[C64]) -> f64 {
    range.iter().map(|b| vector::inner(b, psi).norm_sqr()).sum()
}

pub fn outcome_probabilities(scheme: &MeasurementScheme, state: &ProbeState, theta: [f64; 3]) -> Vec<f64> {
    let rep = SpinRep::new(state.two_j());
    let psi = state.apply_factor(&rep.rotation(theta));
    scheme.ranges.iter().map(|r| range_probability(r, &psi)).collect()
}

/// Probabilities and their θ-gradients, analytic.
pub fn outcome_probabilities_with_gradients(
    scheme: &MeasurementScheme,
    state: &ProbeState,
    theta: [f64; 3],
) -> Vec<(f64, [f64; 3])> {
    let ev = evolve_with_gradients(state, theta);
    scheme
        .ranges
        .iter()
        .map(|range| {
            let mut p = 0.0;
            let mut g = [0.0; 3];
            for b in range {
                let a = vector::inner(b, &ev.psi);
                p += a.norm_sqr();
                for (gj, dj) in g.iter_mut().zip(&ev.grads) {
                    *gj += 2.0 * (a.conj() * vector::inner(b, dj)).re;
                }
            }
            (p, g)
        })
        .collect()
}

/// Σ_k ∂p_k ∂p_kᵀ / p_k, skipping outcomes whose probability and gradient
/// both vanish.
pub fn fisher_from_distribution(dist: &[(f64, [f64; 3])]) -> Result<RMatrix> {
    let mut f = RMatrix::zeros(3, 3);
    for (k, (p, g)) in dist.iter().enumerate() {
        if *p < PROBABILITY_FLOOR {
            let gradient = g.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            if gradient > GRADIENT_FLOOR {
                return Err(Error::SingularOutcome {
                    outcome: k,
                    probability: *p,
                    gradient,
                });
            }
            continue;
        }
        for i in 0..3 {
            for j in 0..3 {
                f[(i, j)] += g[i] * g[j] / p;
            }
        }
    }
    Ok(f.symmetrized())
}

pub fn classical_fim(scheme: &MeasurementScheme, state: &ProbeState, theta: [f64; 3]) -> Result<RMatrix> {
    fisher_from_distribution(&outcome_probabilities_with_gradients(scheme, state, theta))
}

/// One eigenvalue of an observable with its spectral projector.
#[derive(Clone, Debug)]
pub struct SpectralProjector {
    pub eigenvalue: f64,
    pub projector: CMatrix,
    pub basis: Vec<Vec<C64>>,
}

/// Hermitian observables with merged spectral decompositions.
#[derive(Clone, Debug)]
pub struct ObservableList {
    pub labels: Vec<String>,
    pub observables: Vec<CMatrix>,
    pub spectra: Vec<Vec<SpectralProjector>>,
}

fn spectral_projectors(op: &CMatrix) -> Result<Vec<SpectralProjector>> {
    let eig = herm_eig(op)?;
    let mut out: Vec<SpectralProjector> = Vec::new();
    for k in 0..eig.dim() {
        let lambda = eig.values[k];
        let v = eig.vector(k);
        let outer = CMatrix::outer(&v, &v);
        match out.last_mut() {
            Some(last) if (lambda - last.eigenvalue).abs() < EIGENVALUE_MERGE_TOL => {
                last.projector = &last.projector + &outer;
                last.basis.push(v);
            }
            _ => out.push(SpectralProjector {
                eigenvalue: lambda,
                projector: outer,
                basis: vec![v],
            }),
        }
    }
    Ok(out)
}

impl ObservableList {
    pub fn new(labels: Vec<String>, observables: Vec<CMatrix>) -> Result<Self> {
        if labels.len() != observables.len() || observables.is_empty() {
            return Err(Error::DimensionMismatch("labels and observables differ in number".into()));
        }
        let spectra = observables.iter().map(spectral_projectors).collect::<Result<_>>()?;
        Ok(Self {
            labels,
            observables,
            spectra,
        })
    }

    /// The projectors of a scheme as observables, without the last one.
    pub fn from_scheme(scheme: &MeasurementScheme) -> Result<Self> {
        let k = scheme.len() - 1;
        Self::new(scheme.labels[..k].to_vec(), scheme.projectors[..k].to_vec())
    }

    pub fn len(&self) -> usize {
        self.observables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observables.is_empty()
    }

    /// max over observables of ‖Σ_ℓ E_ℓ − I‖_max
    pub fn resolution_defect(&self) -> f64 {
        self.spectra.iter().fold(0.0f64, |m, spec| {
            let d = spec[0].projector.rows();
            let sum = spec.iter().fold(CMatrix::zeros(d, d), |a, e| &a + &e.projector);
            m.max(sum.max_abs_diff(&CMatrix::identity(d)))
        })
    }

    /// Largest commutator entry between two list members.
    pub fn commutator_norm(&self) -> f64 {
        let mut worst = 0.0f64;
        for (k, a) in self.observables.iter().enumerate() {
            for b in &self.observables[k + 1..] {
                worst = worst.max(a.commutator(b).max_abs());
            }
        }
        worst
    }
}

/// O_i = exp(iπ(N/2 − J_i)), each with spectrum {±1}.
pub fn parity_observables(rep: &SpinRep) -> ObservableList {
    let half_n = f64::from(rep.two_j()) / 2.0;
    let shift = CMatrix::identity(rep.dim()).scale_real(half_n);
    let observables: Vec<CMatrix> = rep
        .generators()
        .iter()
        .map(|g| {
            let h = &shift - g;
            unitary_exp(&h, -PI).expect("shifted generator is Hermitian").hermitian_part()
        })
        .collect();
    ObservableList::new(vec!["Ox".into(), "Oy".into(), "Oz".into()], observables)
        .expect("parity operators have a spectral decomposition")
}

#[derive(Clone, Debug, Serialize)]
pub struct MomentsMatrix {
    pub matrix: RMatrix,
    pub means: Vec<f64>,
    pub covariance: RMatrix,
    /// ∂_j⟨O_s⟩, one row per observable.
    pub mean_gradient: RMatrix,
}

pub fn moments_matrix(obs: &ObservableList, state: &ProbeState, theta: [f64; 3]) -> Result<MomentsMatrix> {
    moments_matrix_with_floor(obs, state, theta, DEFAULT_COVARIANCE_FLOOR)
}

/// M = ∂⟨O⟩ᵀ Cov(O)⁻¹ ∂⟨O⟩ with the Jordan-product covariance.
pub fn moments_matrix_with_floor(
    obs: &ObservableList,
    state: &ProbeState,
    theta: [f64; 3],
    covariance_floor: f64,
) -> Result<MomentsMatrix> {
    let ev = evolve_with_gradients(state, theta);
    let k = obs.len();
    let images: Vec<Vec<C64>> = obs.observables.iter().map(|o| act(o, &ev.psi)).collect();
    let means: Vec<f64> = images.iter().map(|v| vector::inner(&ev.psi, v).re).collect();
    let covariance = RMatrix::from_fn(k, k, |s, t| {
        vector::inner(&images[s], &images[t]).re - means[s] * means[t]
    })
    .symmetrized();
    let mean_gradient = RMatrix::from_fn(k, 3, |s, j| 2.0 * vector::inner(&images[s], &ev.grads[j]).re);
    let min_eig = covariance.sym_eigenvalues()[0];
    if !(min_eig > covariance_floor) {
        return Err(Error::SingularCovariance { min_eig });
    }
    let mut solved = RMatrix::zeros(k, 3);
    for j in 0..3 {
        let col: Vec<f64> = (0..k).map(|s| mean_gradient[(s, j)]).collect();
        let x = covariance.solve(&col).ok_or(Error::SingularCovariance { min_eig })?;
        for s in 0..k {
            solved[(s, j)] = x[s];
        }
    }
    let matrix = mean_gradient.transpose().matmul(&solved).symmetrized();
    Ok(MomentsMatrix {
        matrix,
        means,
        covariance,
        mean_gradient,
    })
}

/// Permutation-symmetrized joint density over the spectral grid of a list.
#[derive(Clone, Debug, Serialize)]
pub struct JointDensity {
    /// Number of distinct eigenvalues per observable.
    pub shape: Vec<usize>,
    pub eigenvalues: Vec<Vec<f64>>,
    /// Row-major over the multi-index.
    pub values: Vec<f64>,
    /// ∂_j p(ℓ), aligned with `values`.
    #[serde(skip)]
    pub gradients: Vec<[f64; 3]>,
    pub min_value: f64,
    /// Largest gap between a marginal and tr[E⁽ˢ⁾ρ_θ].
    pub marginal_defect: f64,
    /// False when some entry is below −[`NEGATIVITY_TOL`].
    pub normalizable: bool,
}

impl JointDensity {
    pub fn index(&self, multi: &[usize]) -> usize {
        multi.iter().zip(&self.shape).fold(0, |acc, (&l, &n)| acc * n + l)
    }

    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let mut out = vec![0; self.shape.len()];
        for (slot, &n) in out.iter_mut().zip(&self.shape).rev() {
            *slot = flat % n;
            flat /= n;
        }
        out
    }

    /// Classical Fisher information of the density; meaningful only when
    /// `normalizable`.
    pub fn fisher(&self) -> Result<RMatrix> {
        let dist: Vec<(f64, [f64; 3])> = self
            .values
            .iter()
            .zip(&self.gradients)
            .map(|(&p, &g)| (p.max(0.0), g))
            .collect();
        fisher_from_distribution(&dist)
    }
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(k - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, k - 1);
            out.push(q);
        }
    }
    out
}

/// p_θ(ℓ) = (1/K!) Σ_σ Re⟨ψ(θ)|E⁽σ¹⁾…E⁽σᴷ⁾|ψ(θ)⟩ with gradients.
pub fn symmetrized_joint_density(obs: &ObservableList, state: &ProbeState, theta: [f64; 3]) -> JointDensity {
    let ev = evolve_with_gradients(state, theta);
    let shape: Vec<usize> = obs.spectra.iter().map(Vec::len).collect();
    let total: usize = shape.iter().product();
    let perms = permutations(obs.len());
    let weight = 1.0 / perms.len() as f64;
    let mut density = JointDensity {
        eigenvalues: obs
            .spectra
            .iter()
            .map(|s| s.iter().map(|e| e.eigenvalue).collect())
            .collect(),
        shape,
        values: Vec::new(),
        gradients: Vec::new(),
        min_value: 0.0,
        marginal_defect: 0.0,
        normalizable: true,
    };
    let cells: Vec<(f64, [f64; 3])> = (0..total)
        .into_par_iter()
        .map(|flat| {
            let multi = density.multi_index(flat);
            let mut p = 0.0;
            let mut g = [0.0; 3];
            for perm in &perms {
                // rightmost factor acts first
                let chain = |v: &[C64]| {
                    perm.iter().rev().fold(v.to_vec(), |w, &s| act(&obs.spectra[s][multi[s]].projector, &w))
                };
                let x_psi = chain(&ev.psi);
                p += vector::inner(&ev.psi, &x_psi).re;
                for (gj, dj) in g.iter_mut().zip(&ev.grads) {
                    let x_d = chain(dj);
                    *gj += (vector::inner(dj, &x_psi) + vector::inner(&ev.psi, &x_d)).re;
                }
            }
            (p * weight, g.map(|x| x * weight))
        })
        .collect();
    density.values = cells.iter().map(|c| c.0).collect();
    density.gradients = cells.iter().map(|c| c.1).collect();
    density.min_value = density.values.iter().copied().fold(f64::INFINITY, f64::min);
    density.normalizable = density.min_value >= -NEGATIVITY_TOL;
    let mut defect = 0.0f64;
    for (s, spec) in obs.spectra.iter().enumerate() {
        for (l, e) in spec.iter().enumerate() {
            let direct = vector::inner(&ev.psi, &act(&e.projector, &ev.psi)).re;
            let marginal: f64 = (0..total)
                .filter(|&flat| density.multi_index(flat)[s] == l)
                .map(|flat| density.values[flat])
                .sum();
            defect = defect.max((marginal - direct).abs());
        }
    }
    density.marginal_defect = defect;
    density
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrology::qfim;
    use crate::probes::{ghz_state, tetrahedral_state};
    use crate::Axis;

    fn tetra(two_j: u32) -> ProbeState {
        tetrahedral_state(&SpinRep::new(two_j), None).unwrap()
    }

    fn psd_gap(a: &RMatrix, b: &RMatrix) -> f64 {
        (a - b).sym_eigenvalues()[0]
    }

    #[test]
    fn kl_scheme_resolves_identity() {
        for two_j in [6, 8] {
            let s = tetra(two_j);
            let scheme = kl_scheme(&s).unwrap();
            assert_eq!(scheme.len(), 5);
            assert!(scheme.completeness_defect() < 1e-10);
            assert!(scheme.orthogonality_defect() < 1e-10);
            assert!(scheme.idempotence_defect() < 1e-10);
        }
        assert!(matches!(
            kl_scheme(&ghz_state(&SpinRep::new(6), Axis::Z)),
            Err(Error::NotOptimalProbe { .. })
        ));
    }

    #[test]
    fn small_angle_probabilities() {
        let s = tetra(8);
        let scheme = kl_scheme(&s).unwrap();
        let p = outcome_probabilities(&scheme, &s, [0.0; 3]);
        assert!((p[0] - 1.0).abs() < 1e-12 && p[1..].iter().all(|x| x.abs() < 1e-12));
        let p = outcome_probabilities(&scheme, &s, [0.01, 0.0, 0.0]);
        assert!((p[1] - 1e-4 * 20.0 / 3.0).abs() < 2e-6);
        let p = outcome_probabilities(&scheme, &s, [0.4, -0.7, 0.2]);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cfi_limit_and_ordering() {
        let s = tetra(6);
        let scheme = kl_scheme(&s).unwrap();
        let f = classical_fim(&scheme, &s, [1e-3 / 3f64.sqrt(); 3]).unwrap();
        for i in 0..3 {
            assert!((f[(i, i)] / 16.0 - 1.0).abs() < 1e-3);
            for j in 0..3 {
                if i != j {
                    assert!(f[(i, j)].abs() < 1e-4);
                }
            }
        }
        for theta in [[0.3, 0.1, -0.2], [0.8, 0.5, 0.4]] {
            let c = classical_fim(&scheme, &s, theta).unwrap();
            assert!(psd_gap(&qfim(&s, theta).matrix, &c) > -1e-8);
        }
    }

    #[test]
    fn cfi_matches_finite_differences() {
        let s = tetra(8);
        let scheme = kl_scheme(&s).unwrap();
        let theta = [0.2, -0.3, 0.25];
        let h = 1e-5;
        let p0 = outcome_probabilities(&scheme, &s, theta);
        let grads: Vec<Vec<f64>> = (0..3)
            .map(|j| {
                let mut tp = theta;
                let mut tm = theta;
                tp[j] += h;
                tm[j] -= h;
                let (a, b) = (
                    outcome_probabilities(&scheme, &s, tp),
                    outcome_probabilities(&scheme, &s, tm),
                );
                a.iter().zip(&b).map(|(x, y)| (x - y) / (2.0 * h)).collect()
            })
            .collect();
        let fd = RMatrix::from_fn(3, 3, |i, j| {
            (0..p0.len()).map(|k| grads[i][k] * grads[j][k] / p0[k]).sum()
        });
        let exact = classical_fim(&scheme, &s, theta).unwrap();
        assert!(exact.max_abs_diff(&fd) < 1e-6 * exact.max_abs());
    }

    #[test]
    fn moments_of_projector_list_equal_cfi() {
        let s = tetra(6);
        let scheme = kl_scheme(&s).unwrap();
        let obs = ObservableList::from_scheme(&scheme).unwrap();
        let theta = [0.3, 0.2, 0.1];
        let m = moments_matrix(&obs, &s, theta).unwrap();
        let c = classical_fim(&scheme, &s, theta).unwrap();
        assert!(m.matrix.max_abs_diff(&c) < 1e-8);
        assert!(matches!(
            moments_matrix(&obs, &s, [0.0; 3]),
            Err(Error::SingularCovariance { .. })
        ));
    }

    #[test]
    fn parity_spectrum() {
        for two_j in [1, 2, 3, 6] {
            let p = parity_observables(&SpinRep::new(two_j));
            assert!(p.resolution_defect() < 1e-10);
            for (o, spec) in p.observables.iter().zip(&p.spectra) {
                assert!(o.matmul(o).max_abs_diff(&CMatrix::identity(o.rows())) < 1e-11);
                assert!(spec.iter().all(|e| (e.eigenvalue.abs() - 1.0).abs() < 1e-10));
            }
            // π rotations about orthogonal axes commute for integer spin
            // and anticommute for half-integer spin
            if two_j % 2 == 0 {
                assert!(p.commutator_norm() < 1e-10);
            } else {
                assert!(p.commutator_norm() > 0.1);
            }
        }
    }

    #[test]
    fn parity_moments_below_qfim() {
        let s = tetra(6);
        let obs = parity_observables(&SpinRep::new(6));
        let theta = [0.2, 0.1, 0.15];
        let m = moments_matrix(&obs, &s, theta).unwrap();
        assert!(psd_gap(&qfim(&s, theta).matrix, &m.matrix) > -1e-9);
        let jd = symmetrized_joint_density(&obs, &s, theta);
        assert_eq!(jd.shape, vec![2, 2, 2]);
        assert!(jd.marginal_defect < 1e-10);
        assert!((jd.values.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn joint_density_is_symmetric_in_its_labels() {
        let s = tetra(6);
        let p = parity_observables(&SpinRep::new(6));
        let theta = [0.3, -0.2, 0.5];
        let a = symmetrized_joint_density(&p, &s, theta);
        let swapped = ObservableList::new(
            vec![p.labels[1].clone(), p.labels[0].clone(), p.labels[2].clone()],
            vec![p.observables[1].clone(), p.observables[0].clone(), p.observables[2].clone()],
        )
        .unwrap();
        let b = symmetrized_joint_density(&swapped, &s, theta);
        for flat in 0..a.values.len() {
            let m = a.multi_index(flat);
            let other = b.index(&[m[1], m[0], m[2]]);
            assert!((a.values[flat] - b.values[other]).abs() < 1e-12);
        }
    }

    #[test]
    fn half_integer_parity_density() {
        let rep = SpinRep::new(5);
        let s = ProbeState::new(5, (0..6).map(|k| C64::new(1.0 + k as f64, 0.5 * k as f64)).collect()).unwrap();
        let obs = parity_observables(&rep);
        let theta = [0.3, -0.1, 0.2];
        let jd = symmetrized_joint_density(&obs, &s, theta);
        assert!(jd.marginal_defect < 1e-10);
        assert!((jd.values.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let m = moments_matrix(&obs, &s, theta).unwrap();
        assert!(psd_gap(&qfim(&s, theta).matrix, &m.matrix) > -1e-9);
    }

    #[test]
    fn negative_density_is_flagged() {
        use crate::numerics::random;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let obs = parity_observables(&SpinRep::new(1));
        let flagged = (0..40)
            .map(|_| {
                let s = ProbeState::new(1, random::random_unit_vector(2, &mut rng)).unwrap();
                let d = random::random_direction(&mut rng);
                symmetrized_joint_density(&obs, &s, d.map(|x| 0.5 * x))
            })
            .filter(|jd| !jd.normalizable)
            .inspect(|jd| assert!(jd.min_value < -NEGATIVITY_TOL && jd.marginal_defect < 1e-12))
            .count();
        assert!(flagged > 0);
    }

    #[test]
    fn commuting_density_reproduces_cfi() {
        let s = tetra(6);
        let scheme = kl_scheme(&s).unwrap();
        let obs = ObservableList::from_scheme(&scheme).unwrap();
        let theta = [0.3, 0.2, 0.1];
        let jd = symmetrized_joint_density(&obs, &s, theta);
        assert!(jd.normalizable);
        let f = jd.fisher().unwrap();
        assert!(f.max_abs_diff(&classical_fim(&scheme, &s, theta).unwrap()) < 1e-8);
    }
}
