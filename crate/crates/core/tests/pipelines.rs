use su2metro::groups::{build_group, trivial_irrep, GroupName};
use su2metro::measurement::{classical_fim, kl_scheme};
use su2metro::metrology::{check_conditions, qcrb_floor, qfim, scalar_crb_curve};
use su2metro::numerics::vector;
use su2metro::probes::{
    fine_tune_invariant, maximally_entangled_probe, optimize_compass_deltas, prism_superposition,
    s3_prism_state, tetrahedral_state,
};
use su2metro::su4::{build_su4_problem, Su4Space};
use su2metro::wigner::spin_wigner;
use su2metro::{ProbeState, SpinRep};

#[test]
fn state_json_round_trip_preserves_report() {
    let s = tetrahedral_state(&SpinRep::new(6), None).unwrap();
    let back = ProbeState::from_json_str(&s.to_json_string()).unwrap();
    assert!(vector::phase_aligned_distance(back.amps(), s.amps()) < 1e-15);
    assert!(check_conditions(&back).max_residual < 1e-12);
    let e = maximally_entangled_probe(&SpinRep::new(3));
    let back = ProbeState::from_json_str(&e.to_json_string()).unwrap();
    assert!(back.is_tensor());
    assert!(check_conditions(&back).max_residual < 1e-12);
}

#[test]
fn crb_curve_starts_at_floor_only_for_optimal_probe() {
    let rep = SpinRep::new(6);
    let tetra = tetrahedral_state(&rep, None).unwrap();
    let ghz = su2metro::probes::ghz_state(&rep, su2metro::Axis::Z);
    let a = scalar_crb_curve(&tetra, [1.0, 1.0, 1.0], &[0.0]).unwrap();
    let b = scalar_crb_curve(&ghz, [1.0, 1.0, 1.0], &[0.0]).unwrap();
    assert!((a[0].trace_inv_qfim - 0.1875).abs() < 1e-12);
    assert!(b[0].is_singular || (b[0].trace_inv_qfim - 0.1875).abs() > 1e-3);
}

#[test]
fn prism_sum_equals_twirl() {
    let rep = SpinRep::new(8);
    for xi in [0.4, 1.1, 2.0] {
        let a = s3_prism_state(&rep, xi).unwrap();
        let b = prism_superposition(8, xi).unwrap();
        assert!(vector::infidelity(a.amps(), b.amps()) < 1e-12);
    }
}

#[test]
fn fine_tuned_state_feeds_measurement() {
    let rep = SpinRep::new(8);
    let g = build_group(GroupName::S3Prism, &rep).unwrap();
    let ft = fine_tune_invariant(&g, &rep).unwrap();
    assert!(!ft.flagged);
    let scheme = kl_scheme(&ft.state).unwrap();
    let theta = [0.05, -0.02, 0.03];
    let c = classical_fim(&scheme, &ft.state, theta).unwrap();
    let f = qfim(&ft.state, theta).matrix;
    assert!((&f - &c).sym_eigenvalues()[0] > -1e-9);
    assert!((qfim(&ft.state, [0.0; 3]).trace_inverse().unwrap() - qcrb_floor(8)).abs() < 1e-10);
}

#[test]
fn optimized_compass_phases_beat_zero_phases() {
    let best = optimize_compass_deltas(6).unwrap();
    let zero = su2metro::probes::compass_trivial_overlap(6, [0.0; 3]).unwrap();
    assert!(best.overlap >= zero - 1e-12);
    assert!(best.overlap <= 1.0 + 1e-12);
}

#[test]
fn su4_entangled_pair_has_one_invariant() {
    let p = build_su4_problem(Su4Space::EntangledPair);
    let data = p.trivial_irrep().unwrap();
    assert_eq!(data.multiplicity, 1);
    let phi = p.maximally_entangled().unwrap();
    assert!(vector::infidelity(&data.basis[0], &phi) < 1e-12);
    let f = p.qfim(&phi).unwrap();
    assert!(f.matrix.max_abs_diff(&su2metro::RMatrix::identity(4).scale(2.0)) < 1e-12);
}

#[test]
fn wigner_of_invariant_state_is_normalized() {
    let rep = SpinRep::new(8);
    let g = build_group(GroupName::A4Tetrahedral, &rep).unwrap();
    let s = trivial_irrep(&g).unwrap().basis_states(8).unwrap().remove(0);
    let w = spin_wigner(&s, 61, 72).unwrap();
    assert!((w.normalization() - 1.0).abs() < 1e-10);
    assert!(w.max_imaginary < 1e-10);
}
