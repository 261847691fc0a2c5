//! The numbered acceptance checks, shared by the test suite and the CLI.
//! Each check returns a verdict plus a one-line detail; nothing panics.

use std::f64::consts::PI;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::groups::{build_group, trivial_irrep, twirl_vector, GroupName};
use crate::measurement::{
    classical_fim, kl_scheme, moments_matrix, parity_observables, ObservableList,
};
use crate::metrology::{
    check_conditions, qcrb_floor, qfim, optimal_curve_value, shifted_qfim, su2_invariance_check,
};
use crate::numerics::{random, vector};
use crate::probes::{compass_state, fine_tune_invariant, maximally_entangled_probe, tetrahedral_state};
use crate::spinrep::{reduced_qubit_states, reduced_qubit_states_brute_force, pauli, SpinRep};
use crate::su4::{
    build_su4_problem, circulant_fit, circulant_trace_inverse, circulant_trace_inverse_gradient, Su4Space,
};
use crate::wigner::{spin_wigner, Multipoles};
use crate::{numerics::kron, CMatrix, ProbeState, RMatrix, C64};

pub const CRITERIA: u8 = 13;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CriterionResult {
    pub number: u8,
    pub title: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for CriterionResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "[{tag}] {:>2} {}: {}", self.number, self.title, self.detail)
    }
}

/// Collects sub-check failures so one criterion reports all of them.
#[derive(Default)]
struct Ledger {
    failures: Vec<String>,
    notes: Vec<String>,
}

impl Ledger {
    fn require(&mut self, ok: bool, what: impl FnOnce() -> String) {
        if !ok {
            self.failures.push(what());
        }
    }

    fn note(&mut self, s: impl Into<String>) {
        self.notes.push(s.into());
    }

    fn absorb<T>(&mut self, r: Result<T>, context: &str) -> Option<T> {
        match r {
            Ok(v) => Some(v),
            Err(e) => {
                self.failures.push(format!("{context}: {e}"));
                None
            }
        }
    }

    fn finish(self, number: u8, title: &'static str) -> CriterionResult {
        let passed = self.failures.is_empty();
        let mut parts = self.failures;
        parts.extend(self.notes);
        CriterionResult {
            number,
            title,
            passed,
            detail: parts.join("; "),
        }
    }
}

pub fn title(number: u8) -> &'static str {
    match number {
        1 => "compass periodicity",
        2 => "exact invariant states",
        3 => "trivial-irrep multiplicities",
        4 => "metrology conditions",
        5 => "QCRB floor",
        6 => "scalar bound curve",
        7 => "shift identity",
        8 => "frame invariance",
        9 => "measurement saturation",
        10 => "Fisher ordering",
        11 => "reduced-state lemma",
        12 => "SU(4) relations and circulant QFIM",
        13 => "Wigner function properties",
        _ => "unknown",
    }
}

pub fn run(number: u8) -> CriterionResult {
    let t = title(number);
    match number {
        1 => compass_periodicity().finish(1, t),
        2 => exact_states().finish(2, t),
        3 => multiplicities().finish(3, t),
        4 => metrology_conditions().finish(4, t),
        5 => qcrb_floor_check().finish(5, t),
        6 => scalar_curve().finish(6, t),
        7 => shift_identity().finish(7, t),
        8 => frame_invariance().finish(8, t),
        9 => measurement_saturation().finish(9, t),
        10 => fisher_ordering().finish(10, t),
        11 => reduced_state_lemma().finish(11, t),
        12 => su4_checks().finish(12, t),
        13 => wigner_properties().finish(13, t),
        _ => CriterionResult {
            number,
            title: t,
            passed: false,
            detail: format!("no criterion {number}"),
        },
    }
}

pub fn run_all() -> Vec<CriterionResult> {
    (1..=CRITERIA).into_par_iter().map(run).collect()
}

fn tetra(two_j: u32) -> ProbeState {
    tetrahedral_state(&SpinRep::new(two_j), None).expect("A4 invariant exists")
}

fn trace_inverse_or_inf(state: &ProbeState, theta: [f64; 3]) -> f64 {
    qfim(state, theta).trace_inverse().unwrap_or(f64::INFINITY)
}

fn min_gap(a: &RMatrix, b: &RMatrix) -> f64 {
    (a - b).sym_eigenvalues()[0]
}

fn compass_periodicity() -> Ledger {
    let mut l = Ledger::default();
    let ns: Vec<u32> = (4..=32).step_by(2).collect();
    let Some(scan) = l.absorb(crate::probes::compass_trivial_overlap_scan(&ns), "scan") else {
        return l;
    };
    let mut ones = Vec::new();
    for row in &scan {
        if row.n % 8 == 0 {
            ones.push(row.n);
            l.require((row.overlap - 1.0).abs() < 1e-10, || format!("N={} overlap {}", row.n, row.overlap));
        } else {
            l.require(row.overlap < 0.999, || format!("N={} overlap {} ≥ 0.999", row.n, row.overlap));
        }
    }
    let worst_off = scan
        .iter()
        .filter(|r| r.n % 8 != 0)
        .fold(0.0f64, |m, r| m.max(r.overlap));
    l.note(format!("overlap 1 at N={ones:?}, largest elsewhere {worst_off:.4}"));
    l
}

fn exact_states() -> Ledger {
    let mut l = Ledger::default();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let s3 = tetra(6);
    let plus: Vec<C64> = (0..7)
        .map(|k| if k == 1 || k == 5 { C64::new(h, 0.0) } else { C64::new(0.0, 0.0) })
        .collect();
    let mut minus = plus.clone();
    minus[5] = -minus[5];
    let d_plus = vector::phase_aligned_distance(&plus, s3.amps());
    let d_minus = vector::phase_aligned_distance(&minus, s3.amps());
    l.require(d_plus < 1e-10, || {
        format!("J=3 differs from (|3,2⟩+|3,−2⟩)/√2 by {d_plus:.3} (matches the − combination to {d_minus:.1e})")
    });
    let plus_state = ProbeState::new(6, plus).expect("unit vector");
    l.note(format!(
        "J=3 + combination condition residual {:.1e}",
        check_conditions(&plus_state).max_residual
    ));
    let s4 = tetra(8);
    let mut expect = vector::zeros(9);
    expect[0] = C64::new((5.0f64 / 24.0).sqrt(), 0.0);
    expect[8] = expect[0];
    expect[4] = C64::new((7.0f64 / 12.0).sqrt(), 0.0);
    let d4 = vector::phase_aligned_distance(&expect, s4.amps());
    l.require(d4 < 1e-10, || format!("J=4 differs by {d4:.3e}"));
    l.note(format!("J=4 amplitude error {d4:.1e}"));
    l
}

fn multiplicities() -> Ledger {
    let mut l = Ledger::default();
    let a4: Vec<(u32, Result<usize>)> = (0..=20u32)
        .into_par_iter()
        .map(|j| {
            let rep = SpinRep::new(2 * j);
            (j, build_group(GroupName::A4Tetrahedral, &rep).and_then(|g| trivial_irrep(&g)).map(|d| d.multiplicity))
        })
        .collect();
    for (j, m) in a4 {
        if let Some(m) = l.absorb(m, &format!("A4 J={j}")) {
            let ok = if [1, 2, 5].contains(&j) { m == 0 } else { m >= 1 };
            l.require(ok, || format!("A4 J={j} multiplicity {m}"));
        }
    }
    let s3: Vec<(u32, Result<f64>)> = (0..=30u32)
        .into_par_iter()
        .map(|j| {
            let rep = SpinRep::new(2 * j);
            (j, build_group(GroupName::S3Prism, &rep).and_then(|g| trivial_irrep(&g)).map(|d| d.projector.trace().re))
        })
        .collect();
    for (j, tr) in s3 {
        if let Some(tr) = l.absorb(tr, &format!("S3 J={j}")) {
            let f = crate::groups::s3_multiplicity_formula(j);
            l.require(tr.round() as u32 == f && (tr - tr.round()).abs() < 1e-8, || {
                format!("S3 J={j} trace {tr} vs formula {f}")
            });
        }
    }
    l.note("A4 over J≤20, S3 over J≤30");
    l
}

fn metrology_conditions() -> Ledger {
    let mut l = Ledger::default();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst_a4 = 0.0f64;
    for j in 0..=20u32 {
        let rep = SpinRep::new(2 * j);
        let Some(group) = l.absorb(build_group(GroupName::A4Tetrahedral, &rep), "A4") else {
            continue;
        };
        let Some(data) = l.absorb(trivial_irrep(&group), "A4 irrep") else {
            continue;
        };
        if data.multiplicity == 0 || j == 0 {
            continue;
        }
        let mut states = data.basis.clone();
        for _ in 0..3 {
            let mut acc = vector::zeros(rep.dim());
            for b in &data.basis {
                vector::axpy(&mut acc, random::complex_normal(&mut rng), b);
            }
            states.push(acc);
        }
        for s in states {
            if let Some(p) = l.absorb(ProbeState::new(2 * j, s), "state") {
                worst_a4 = worst_a4.max(check_conditions(&p).max_residual);
            }
        }
    }
    l.require(worst_a4 < 1e-10, || format!("A4 invariant residual {worst_a4:.2e}"));
    let worst_me = (1..=40u32)
        .into_par_iter()
        .map(|tj| check_conditions(&maximally_entangled_probe(&SpinRep::new(tj))).max_residual)
        .reduce(|| 0.0, f64::max);
    l.require(worst_me < 1e-10, || format!("entangled residual {worst_me:.2e}"));
    let rep = SpinRep::new(8);
    if let Some(g) = l.absorb(build_group(GroupName::S3Prism, &rep), "S3") {
        if let Some(ft) = l.absorb(fine_tune_invariant(&g, &rep), "fine-tune") {
            let a = ft.state.amps();
            let (p3, m3) = (a[1].norm_sqr(), a[7].norm_sqr());
            l.require(ft.report.max_residual < 1e-10, || {
                format!("fine-tuned residual {:.2e}", ft.report.max_residual)
            });
            l.require((p3 - 10.0 / 27.0).abs() < 1e-8 && (m3 - 10.0 / 27.0).abs() < 1e-8, || {
                format!("|amp(±3)|² = {p3:.10}, {m3:.10}")
            });
            l.note(format!(
                "fine-tuned J=4 residual {:.1e}, |amp(±3)|² = {p3:.10}, |amp(0)|² = {:.10}",
                ft.report.max_residual,
                a[4].norm_sqr()
            ));
        }
    }
    l.note(format!("A4 worst {worst_a4:.1e}, entangled worst {worst_me:.1e}"));
    l
}

fn qcrb_floor_check() -> Ledger {
    let mut l = Ledger::default();
    let mut optimal: Vec<(String, ProbeState)> = [6u32, 8, 12, 14, 16]
        .iter()
        .map(|&n| (format!("A4 N={n}"), tetra(n)))
        .collect();
    for tj in [1u32, 4, 7, 10] {
        optimal.push((format!("entangled 2J={tj}"), maximally_entangled_probe(&SpinRep::new(tj))));
    }
    for (name, s) in &optimal {
        let v = trace_inverse_or_inf(s, [0.0; 3]);
        let floor = qcrb_floor(s.two_j());
        l.require((v - floor).abs() < 1e-10, || format!("{name}: tr F⁻¹ {v} vs {floor}"));
    }
    let rep = SpinRep::new(6);
    let floor = qcrb_floor(6);
    if let Some(c) = l.absorb(compass_state(&rep, [0.0; 3]), "compass") {
        let v = trace_inverse_or_inf(&c, [0.0; 3]);
        l.require(v >= floor + 1e-3, || format!("J=3 compass tr F⁻¹ {v} not above {floor}"));
        l.note(format!("J=3 compass {v:.4}"));
    }
    let s3 = build_group(GroupName::S3Prism, &rep)
        .and_then(|g| trivial_irrep(&g))
        .and_then(|d| ProbeState::new(6, d.basis[0].clone()));
    if let Some(s) = l.absorb(s3, "S3 J=3") {
        let v = trace_inverse_or_inf(&s, [0.0; 3]);
        l.require(v >= floor + 1e-3, || format!("J=3 S3 tr F⁻¹ {v} not above {floor}"));
        l.note(format!("J=3 S3 {v:.4}"));
    }
    l.note(format!("floor at J=3 {floor}"));
    l
}

fn scalar_curve() -> Ledger {
    let mut l = Ledger::default();
    let dir = 1.0 / 3f64.sqrt();
    let grid: Vec<f64> = (0..=60).map(|k| 3.0 * k as f64 / 60.0).collect();
    let mut worst = 0.0f64;
    for n in [6u32, 8] {
        let s = tetra(n);
        for &t in &grid {
            let v = trace_inverse_or_inf(&s, [t * dir; 3]);
            worst = worst.max((v - optimal_curve_value(n, t)).abs());
        }
    }
    l.require(worst < 1e-8, || format!("max deviation {worst:.2e}"));
    l.note(format!("J=3,4 on 61 points in [0,3], max deviation {worst:.1e}"));
    l
}

fn shift_identity() -> Ledger {
    let mut l = Ledger::default();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let probes = [
        tetra(6),
        ProbeState::new(8, random::random_unit_vector(9, &mut rng)).expect("unit vector"),
    ];
    let mut worst = 0.0f64;
    for k in 0..20 {
        let s = &probes[k % 2];
        let xi: [f64; 3] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
        let theta: [f64; 3] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
        let left = shifted_qfim(s, xi, theta).matrix;
        let right = qfim(s, [theta[0] - xi[0], theta[1] - xi[1], theta[2] - xi[2]]).matrix;
        worst = worst.max(left.max_abs_diff(&right));
    }
    l.require(worst < 1e-8, || format!("max deviation {worst:.2e}"));
    l.note(format!("20 pairs, max deviation {worst:.1e}"));
    l
}

fn frame_invariance() -> Ledger {
    let mut l = Ledger::default();
    let mut worst = 0.0f64;
    for (k, n) in [6u32, 8, 12].into_iter().enumerate() {
        worst = worst.max(su2_invariance_check(&tetra(n), 20, k as u64));
    }
    worst = worst.max(su2_invariance_check(&maximally_entangled_probe(&SpinRep::new(5)), 20, 9));
    let rep = SpinRep::new(6);
    let ghz = su2_invariance_check(&crate::probes::ghz_state(&rep, crate::Axis::Z), 20, 1);
    l.require(worst < 1e-9, || format!("optimal probes deviate by {worst:.2e}"));
    l.require(ghz > 1e-3, || format!("GHZ control deviates only {ghz:.2e}"));
    l.note(format!("optimal worst {worst:.1e}, GHZ control {ghz:.3}"));
    l
}

/// 20 log-spaced points on [10⁻³, 0.8].
pub fn saturation_grid() -> Vec<f64> {
    let (a, b) = (1e-3f64.ln(), 0.8f64.ln());
    (0..20).map(|k| (a + (b - a) * k as f64 / 19.0).exp()).collect()
}

fn measurement_saturation() -> Ledger {
    let mut l = Ledger::default();
    let dir = 1.0 / 3f64.sqrt();
    for n in [6u32, 8] {
        let s = tetra(n);
        let j = f64::from(n) / 2.0;
        let target = 4.0 * j * (j + 1.0) / 3.0;
        let Some(scheme) = l.absorb(kl_scheme(&s), "kl scheme") else {
            continue;
        };
        let Some(obs) = l.absorb(ObservableList::from_scheme(&scheme), "observables") else {
            continue;
        };
        if let Some(c) = l.absorb(classical_fim(&scheme, &s, [1e-3 * dir; 3]), "CFI") {
            for i in 0..3 {
                l.require((c[(i, i)] / target - 1.0).abs() < 1e-3, || {
                    format!("N={n} CFI[{i}{i}] {} vs {target}", c[(i, i)])
                });
                for k in 0..3 {
                    if k != i {
                        l.require(c[(i, k)].abs() < 1e-4, || format!("N={n} CFI[{i}{k}] {}", c[(i, k)]));
                    }
                }
            }
        }
        let mut gaps_c = Vec::new();
        let mut gaps_m = Vec::new();
        for t in saturation_grid() {
            let theta = [t * dir; 3];
            let f = qfim(&s, theta).matrix.trace();
            if let Some(c) = l.absorb(classical_fim(&scheme, &s, theta), "CFI") {
                gaps_c.push((f - c.trace()) / f);
            }
            if let Some(m) = l.absorb(moments_matrix(&obs, &s, theta), "moments") {
                gaps_m.push((f - m.matrix.trace()) / f);
            }
        }
        let monotone = |g: &[f64]| g.windows(2).all(|w| w[1] >= w[0] - 1e-12);
        l.require(monotone(&gaps_c), || format!("N={n} CFI gap not monotone: {gaps_c:?}"));
        l.require(monotone(&gaps_m), || format!("N={n} moments gap not monotone: {gaps_m:?}"));
        l.note(format!(
            "N={n} relative gap at t=1e-3 {:.1e} (CFI), {:.1e} (moments)",
            gaps_c.first().copied().unwrap_or(f64::NAN),
            gaps_m.first().copied().unwrap_or(f64::NAN)
        ));
    }
    l
}

fn fisher_ordering() -> Ledger {
    let mut l = Ledger::default();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut worst = f64::INFINITY;
    let mut count = 0usize;
    let mut singular = 0usize;
    let mut states: Vec<ProbeState> = vec![tetra(6), tetra(8), tetra(12)];
    for tj in [3u32, 5, 6, 7] {
        states.push(ProbeState::new(tj, random::random_unit_vector(tj as usize + 1, &mut rng)).expect("unit vector"));
    }
    for s in &states {
        let rep = SpinRep::new(s.two_j());
        let parity = parity_observables(&rep);
        let kl = kl_scheme(s).ok();
        for _ in 0..5 {
            let d = random::random_direction(&mut rng);
            let t = rng.gen_range(0.05..1.5);
            let theta = d.map(|x| x * t);
            let f = qfim(s, theta).matrix;
            if let Some(scheme) = &kl {
                if let Some(c) = l.absorb(classical_fim(scheme, s, theta), "CFI") {
                    worst = worst.min(min_gap(&f, &c));
                    count += 1;
                }
                let obs = ObservableList::from_scheme(scheme).expect("projector list");
                match moments_matrix(&obs, s, theta) {
                    Ok(m) => {
                        worst = worst.min(min_gap(&f, &m.matrix));
                        count += 1;
                    }
                    Err(_) => singular += 1,
                }
            }
            match moments_matrix(&parity, s, theta) {
                Ok(m) => {
                    worst = worst.min(min_gap(&f, &m.matrix));
                    count += 1;
                }
                Err(_) => singular += 1,
            }
        }
    }
    l.require(worst >= -1e-9, || format!("smallest eigenvalue {worst:.2e}"));
    l.note(format!(
        "{count} combinations, smallest eigenvalue of the gap {worst:.1e}, {singular} skipped as singular"
    ));
    l
}

fn optimal_reduced_states() -> (CMatrix, CMatrix) {
    let s = pauli();
    let id2 = CMatrix::identity(2);
    let mut rho2 = CMatrix::identity(4).scale_real(0.25);
    for p in &s {
        rho2 = &rho2 + &kron(p, p).scale_real(1.0 / 12.0);
    }
    (id2.scale_real(0.5), rho2)
}

fn reduced_state_lemma() -> Ledger {
    let mut l = Ledger::default();
    let n = 6u32;
    let rep = SpinRep::new(n);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (r1, r2) = optimal_reduced_states();
    let base = tetra(n);
    let floor = qcrb_floor(n);
    let (mut n_opt, mut n_match, mut fast_vs_brute) = (0, 0, 0.0f64);
    for k in 0..50 {
        let s = match k % 3 {
            0 => base.transformed(&rep.rotation(random::haar_rotation_vector(&mut rng))),
            1 => ProbeState::new(n, random::random_unit_vector(7, &mut rng)).expect("unit vector"),
            _ => {
                // departure from an optimal probe, kept ≥ 1e-3 so the second-order
                // change of tr F⁻¹ stays resolvable
                let mut v = base.transformed(&rep.rotation(random::haar_rotation_vector(&mut rng))).into_amps();
                let eps = 10f64.powi(-(k % 3 + 1));
                vector::axpy(&mut v, C64::new(eps, 0.0), &random::random_unit_vector(7, &mut rng));
                ProbeState::new(n, v).expect("nonzero")
            }
        };
        let optimal = (trace_inverse_or_inf(&s, [0.0; 3]) - floor).abs() < 1e-10;
        let Some((b1, b2)) = l.absorb(reduced_qubit_states_brute_force(&s), "brute force") else {
            continue;
        };
        if let Some((f1, f2)) = l.absorb(reduced_qubit_states(&s), "formula") {
            fast_vs_brute = fast_vs_brute.max(f1.max_abs_diff(&b1)).max(f2.max_abs_diff(&b2));
        }
        let matches = b1.max_abs_diff(&r1) < 1e-8 && b2.max_abs_diff(&r2) < 1e-8;
        n_opt += usize::from(optimal);
        n_match += usize::from(matches);
        l.require(optimal == matches, || format!("state {k}: floor {optimal}, reduced states {matches}"));
    }
    l.require(fast_vs_brute < 1e-10, || format!("moment formula vs embedding {fast_vs_brute:.2e}"));
    l.note(format!(
        "50 states, {n_opt} at the floor, {n_match} with matching marginals, formula vs embedding {fast_vs_brute:.1e}"
    ));
    l
}

fn su4_checks() -> Ledger {
    let mut l = Ledger::default();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for space in Su4Space::ALL {
        let p = build_su4_problem(space);
        let r = p.relation_residuals();
        let others = r.w_shift.max(r.z_flip).max(r.w_order).max(r.z_order);
        l.require(others < 1e-11, || format!("{space:?}: shift/flip/order residual {others:.2e}"));
        l.require(r.zw_order < 1e-11, || {
            format!(
                "{space:?}: (ZW)⁴ − I = {:.2e}, (ZW)⁴ + I = {:.2e}",
                r.zw_order, r.zw_order_up_to_sign
            )
        });
        let Some(cyc) = l.absorb(p.cyclic_group(), "cyclic group") else {
            continue;
        };
        let mut worst = 0.0f64;
        for _ in 0..5 {
            let v = random::random_unit_vector(p.dim(), &mut rng);
            let Some(t) = l.absorb(twirl_vector(&cyc, &v), "twirl") else {
                continue;
            };
            if let Some(f) = l.absorb(p.qfim(&t), "qfim") {
                worst = worst.max(circulant_fit(&f.matrix).defect);
            }
        }
        l.require(worst < 1e-10, || format!("{space:?}: off-pattern QFIM entry {worst:.2e}"));
    }
    // five-point stencil: truncation and rounding both stay near 1e-12
    let h = 1e-3;
    let stencil = |f: &dyn Fn(f64) -> f64| (f(-2.0 * h) - 8.0 * f(-h) + 8.0 * f(h) - f(2.0 * h)) / (12.0 * h);
    let mut grad = 0.0f64;
    for a in [0.5, 1.0, 2.5] {
        let fd_b = stencil(&|x| circulant_trace_inverse(a, x, 0.0));
        let fd_c = stencil(&|x| circulant_trace_inverse(a, 0.0, x));
        let exact = circulant_trace_inverse_gradient(a, 0.0, 0.0);
        grad = grad.max(fd_b.abs()).max(fd_c.abs()).max(exact[0].abs()).max(exact[1].abs());
    }
    l.require(grad < 1e-10, || format!("gradient at b=c=0 is {grad:.2e}"));
    l.note(format!("numeric gradient at b=c=0 {grad:.1e}"));
    let pair = build_su4_problem(Su4Space::EntangledPair);
    if let Some(phi) = l.absorb(pair.maximally_entangled(), "entangled probe") {
        if let Some(c) = l.absorb(pair.conditions(&phi), "conditions") {
            l.require(c.max_residual < 1e-12, || format!("entangled probe residual {:.2e}", c.max_residual));
            l.note(format!("entangled probe residual {:.1e}, a = {}", c.max_residual, c.a));
        }
    }
    l
}

/// The twelve rotations of the tetrahedron as 3×3 matrices: cyclic axis
/// permutations times sign flips of an even number of axes.
fn tetrahedral_rotations() -> Vec<[[f64; 3]; 3]> {
    let signs = [[1.0, 1.0, 1.0], [-1.0, -1.0, 1.0], [-1.0, 1.0, -1.0], [1.0, -1.0, -1.0]];
    let mut out = Vec::new();
    for shift in 0..3 {
        for s in signs {
            out.push(std::array::from_fn(|r| {
                std::array::from_fn(|c| if c == (r + shift) % 3 { s[r] } else { 0.0 })
            }));
        }
    }
    out
}

fn angles(n: [f64; 3]) -> (f64, f64) {
    (n[2].clamp(-1.0, 1.0).acos(), n[1].atan2(n[0]))
}

fn direction(theta: f64, phi: f64) -> [f64; 3] {
    [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()]
}

/// Rodrigues rotation of `n` by the rotation vector `w`.
fn rotate(w: [f64; 3], n: [f64; 3]) -> [f64; 3] {
    let a = crate::metrology::norm3(w);
    if a == 0.0 {
        return n;
    }
    let k = w.map(|x| x / a);
    let (c, s) = (a.cos(), a.sin());
    let kn = k[0] * n[0] + k[1] * n[1] + k[2] * n[2];
    let kx = [k[1] * n[2] - k[2] * n[1], k[2] * n[0] - k[0] * n[2], k[0] * n[1] - k[1] * n[0]];
    std::array::from_fn(|i| n[i] * c + kx[i] * s + k[i] * kn * (1.0 - c))
}

fn wigner_properties() -> Ledger {
    let mut l = Ledger::default();
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let (mut imag, mut purity, mut covariance) = (0.0f64, 0.0f64, 0.0f64);
    for tj in 1..=10u32 {
        let rep = SpinRep::new(tj);
        let s = ProbeState::new(tj, random::random_unit_vector(tj as usize + 1, &mut rng)).expect("unit vector");
        if let Some(g) = l.absorb(spin_wigner(&s, 41, 48), "grid") {
            imag = imag.max(g.max_imaginary);
            if let Some(o) = l.absorb(g.overlap(&g), "overlap") {
                purity = purity.max((o - 1.0).abs());
            }
        }
        let w = random::haar_rotation_vector(&mut rng);
        let rotated = s.transformed(&rep.rotation(w));
        let (Some(m0), Some(m1)) = (
            l.absorb(Multipoles::of_state(&s), "multipoles"),
            l.absorb(Multipoles::of_state(&rotated), "multipoles"),
        ) else {
            continue;
        };
        for _ in 0..20 {
            let n = random::random_direction(&mut rng);
            let (t1, p1) = angles(n);
            let (t0, p0) = angles(rotate(w.map(|x| -x), n));
            covariance = covariance.max((m1.evaluate(t1, p1) - m0.evaluate(t0, p0)).abs());
        }
    }
    l.require(imag < 1e-10, || format!("imaginary part {imag:.2e}"));
    l.require(purity < 1e-6, || format!("purity overlap off by {purity:.2e}"));
    l.require(covariance < 1e-4, || format!("rotation covariance off by {covariance:.2e}"));
    let mut orbit = 0.0f64;
    if let Some(m) = l.absorb(Multipoles::of_state(&tetra(6)), "tetrahedral multipoles") {
        let rots = tetrahedral_rotations();
        for i in 0..=18 {
            for j in 0..24 {
                let (theta, phi) = (PI * i as f64 / 18.0, 2.0 * PI * j as f64 / 24.0);
                let n = direction(theta, phi);
                let w0 = m.evaluate(theta, phi);
                for r in &rots {
                    let rn: [f64; 3] = std::array::from_fn(|a| (0..3).map(|b| r[a][b] * n[b]).sum());
                    let (t, p) = angles(rn);
                    orbit = orbit.max((m.evaluate(t, p) - w0).abs());
                }
            }
        }
    }
    l.require(orbit < 1e-8, || format!("A4 orbit defect {orbit:.2e}"));
    l.note(format!(
        "2J≤10: imaginary {imag:.1e}, purity {purity:.1e}, covariance {covariance:.1e}, J=3 A4 orbit {orbit:.1e}"
    ));
    l
}

/// Used by the CLI: index of the first failing criterion, if any.
pub fn first_failure(results: &[CriterionResult]) -> Option<&CriterionResult> {
    results.iter().find(|r| !r.passed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rotations_form_the_tetrahedral_group() {
        let rots = tetrahedral_rotations();
        assert_eq!(rots.len(), 12);
        for r in &rots {
            let det = r[0][0] * (r[1][1] * r[2][2] - r[1][2] * r[2][1])
                - r[0][1] * (r[1][0] * r[2][2] - r[1][2] * r[2][0])
                + r[0][2] * (r[1][0] * r[2][1] - r[1][1] * r[2][0]);
            assert_eq!(det, 1.0);
        }
    }

    #[test]
    fn grid_is_log_spaced() {
        let g = saturation_grid();
        assert_eq!(g.len(), 20);
        assert!((g[0] - 1e-3).abs() < 1e-15 && (g[19] - 0.8).abs() < 1e-12);
        let r = g[1] / g[0];
        assert!(g.windows(2).all(|w| (w[1] / w[0] - r).abs() < 1e-9));
    }

    #[test]
    fn unknown_criterion_fails() {
        assert!(!run(14).passed);
    }
}
