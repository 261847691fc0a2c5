use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::{bail, Context, Result};
use rand::SeedableRng;
use serde::Serialize;
use serde_json::json;

use su2metro::acceptance;
use su2metro::groups::{build_group, s3_multiplicity_formula, trivial_irrep, twirl_vector, GroupName};
use su2metro::measurement::{
    classical_fim, kl_scheme, moments_matrix, parity_observables, symmetrized_joint_density, ObservableList,
};
use su2metro::metrology::{check_conditions, qfim, scalar_crb_curve, unit_direction, ConditionReport};
use su2metro::numerics::random;
use su2metro::probes::{
    compass_state, compass_trivial_overlap_scan, ghz_state, maximally_entangled_probe,
    optimize_compass_deltas, s3_prism_state, tetrahedral_state,
};
use su2metro::su4::{build_su4_problem, circulant_fit, Su4Space};
use su2metro::wigner::spin_wigner;
use su2metro::{Axis, ProbeState, SpinRep};

use crate::args::*;

/// A numerical check did not pass; maps to exit code 1.
#[derive(Debug)]
pub struct NumericFailure(pub String);

impl std::fmt::Display for NumericFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for NumericFailure {}

pub fn dispatch(command: Command, config: &RunConfig) -> Result<()> {
    match command {
        Command::Probe(a) => probe(a, config),
        Command::Check(a) => check(a, config),
        Command::GroupInfo(a) => group_info(a),
        Command::CrbCurve(a) => crb_curve(a),
        Command::CfiCurve(a) => cfi_curve(a),
        Command::CompassScan(a) => compass_scan(a),
        Command::Su4Check(a) => su4_check(a, config),
        Command::Wigner(a) => wigner(a),
        Command::VerifyAll(a) => verify_all(a),
    }
}

fn print_json(value: &impl Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    match writeln!(std::io::stdout().lock(), "{text}") {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        other => Ok(other?),
    }
}

/// Reads a bare state document or the `state` field of a `probe` dump.
fn load_state(path: &Path) -> Result<ProbeState> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    let doc = value.get("state").cloned().unwrap_or(value);
    let doc: su2metro::state::StateJson =
        serde_json::from_value(doc).with_context(|| format!("{} is not a state document", path.display()))?;
    Ok(ProbeState::from_json(&doc)?)
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn write_csv<R: Serialize>(path: Option<&Path>, rows: &[R]) -> Result<()> {
    let sink: Box<dyn Write> = match path {
        Some(p) => Box::new(fs::File::create(p).with_context(|| format!("creating {}", p.display()))?),
        None => Box::new(std::io::stdout()),
    };
    let mut w = csv::Writer::from_writer(sink);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

fn direction(v: &[f64]) -> Result<[f64; 3]> {
    let d: [f64; 3] = v.try_into().context("direction needs three components")?;
    Ok(unit_direction(d)?)
}

fn t_grid(tmax: f64, points: usize) -> Result<Vec<f64>> {
    if points < 2 || !(tmax > 0.0) || !tmax.is_finite() {
        bail!("need at least two points and a positive finite tmax");
    }
    Ok((0..points).map(|k| tmax * k as f64 / (points - 1) as f64).collect())
}

fn build_probe(a: &ProbeArgs, config: &RunConfig) -> Result<(ProbeState, serde_json::Value)> {
    let rep = SpinRep::new(a.two_j);
    let mut extra = json!({});
    let state = match a.kind {
        ProbeKind::Ghz => {
            let axis = match a.axis {
                AxisArg::X => Axis::X,
                AxisArg::Y => Axis::Y,
                AxisArg::Z => Axis::Z,
            };
            ghz_state(&rep, axis)
        }
        ProbeKind::Compass => {
            let d: [f64; 3] = match &a.deltas {
                Some(v) => v.as_slice().try_into().context("--deltas needs three values")?,
                None => [0.0; 3],
            };
            compass_state(&rep, d)?
        }
        ProbeKind::Tetrahedral => tetrahedral_state(&rep, None)?,
        ProbeKind::S3Prism => {
            let xi = a.xi.context("s3-prism needs --xi")?;
            s3_prism_state(&rep, xi)?
        }
        ProbeKind::S3Finetuned => {
            let g = build_group(GroupName::S3Prism, &rep)?;
            let seeds: Vec<u64> = (0..su2metro::probes::FINE_TUNE_RESTARTS).map(|k| config.seed + k).collect();
            let ft = su2metro::probes::fine_tune_with_seeds(
                &g,
                &rep,
                &seeds,
                su2metro::probes::DEFAULT_FINE_TUNE_THRESHOLD,
            )?;
            extra = json!({
                "multiplicity": ft.multiplicity,
                "squared_residual": ft.squared_residual,
                "flagged": ft.flagged,
                "coefficients": ft.coefficients.iter().map(|c| [c.re, c.im]).collect::<Vec<_>>(),
            });
            ft.state
        }
        ProbeKind::Entangled => maximally_entangled_probe(&rep),
    };
    Ok((state, extra))
}

fn probe(a: ProbeArgs, config: &RunConfig) -> Result<()> {
    let (state, extra) = build_probe(&a, config)?;
    let report = check_conditions(&state);
    let doc = json!({
        "kind": format!("{:?}", a.kind).to_lowercase(),
        "state": state.to_json(),
        "report": report,
        "optimal": report.max_residual < config.tol,
        "details": extra,
    });
    match &a.out {
        Some(path) => {
            write_text(path, &state.to_json_string())?;
            print_json(&json!({ "report": doc["report"], "optimal": doc["optimal"], "details": doc["details"] }))
        }
        None => print_json(&doc),
    }
}

fn check(a: CheckArgs, config: &RunConfig) -> Result<()> {
    let state = load_state(&a.state)?;
    let report: ConditionReport = check_conditions(&state);
    print_json(&report)?;
    if report.max_residual >= config.tol {
        return Err(NumericFailure(format!(
            "metrology conditions: max residual {:e} ≥ tolerance {:e}",
            report.max_residual, config.tol
        ))
        .into());
    }
    Ok(())
}

fn group_info(a: GroupInfoArgs) -> Result<()> {
    let rep = SpinRep::new(a.two_j);
    let name = match a.group {
        GroupArg::A4 => GroupName::A4Tetrahedral,
        GroupArg::S3 => GroupName::S3Prism,
    };
    let g = build_group(name, &rep)?;
    let data = trivial_irrep(&g)?;
    let residuals: Vec<f64> = data
        .basis_states(a.two_j)?
        .iter()
        .map(|s| check_conditions(s).max_residual)
        .collect();
    let formula = (name == GroupName::S3Prism).then(|| s3_multiplicity_formula(a.two_j / 2));
    print_json(&json!({
        "group": format!("{name:?}"),
        "two_j": a.two_j,
        "order": g.order(),
        "generators": g.generator_descriptions,
        "closure_defect": g.closure_defect(),
        "multiplicity": data.multiplicity,
        "multiplicity_formula": formula,
        "basis": data.basis.iter().map(|b| b.iter().map(|c| [c.re, c.im]).collect::<Vec<_>>()).collect::<Vec<_>>(),
        "basis_condition_residuals": residuals,
    }))
}

fn crb_curve(a: CrbCurveArgs) -> Result<()> {
    let state = load_state(&a.state)?;
    let dir = direction(&a.direction)?;
    let points = scalar_crb_curve(&state, dir, &t_grid(a.tmax, a.points)?)?;
    write_csv(Some(&a.out), &points)
}

#[derive(Serialize)]
struct CfiRow {
    t: f64,
    cfi_trace: f64,
    moments_trace: f64,
    qfim_trace: f64,
}

fn cfi_curve(a: CfiCurveArgs) -> Result<()> {
    let state = load_state(&a.state)?;
    let dir = direction(&a.direction)?;
    // t = 0 is skipped: every outcome but ψ has p = ∂p = 0 there
    let grid: Vec<f64> = t_grid(a.tmax, a.points + 1)?.split_off(1);
    let rows: Vec<CfiRow> = match a.scheme {
        SchemeArg::Kl => {
            let scheme = kl_scheme(&state)?;
            let obs = ObservableList::from_scheme(&scheme)?;
            grid.iter()
                .map(|&t| {
                    let theta = dir.map(|x| x * t);
                    CfiRow {
                        t,
                        cfi_trace: classical_fim(&scheme, &state, theta).map_or(f64::NAN, |m| m.trace()),
                        moments_trace: moments_matrix(&obs, &state, theta).map_or(f64::NAN, |m| m.matrix.trace()),
                        qfim_trace: qfim(&state, theta).matrix.trace(),
                    }
                })
                .collect()
        }
        SchemeArg::Parity => {
            let obs = parity_observables(&SpinRep::new(state.two_j()));
            grid.iter()
                .map(|&t| {
                    let theta = dir.map(|x| x * t);
                    let jd = symmetrized_joint_density(&obs, &state, theta);
                    let cfi = if jd.normalizable { jd.fisher().map_or(f64::NAN, |m| m.trace()) } else { f64::NAN };
                    CfiRow {
                        t,
                        cfi_trace: cfi,
                        moments_trace: moments_matrix(&obs, &state, theta).map_or(f64::NAN, |m| m.matrix.trace()),
                        qfim_trace: qfim(&state, theta).matrix.trace(),
                    }
                })
                .collect()
        }
    };
    write_csv(Some(&a.out), &rows)
}

#[derive(Serialize)]
struct CompassRow {
    n: u32,
    overlap: f64,
    delta_x: Option<f64>,
    delta_y: Option<f64>,
    delta_z: Option<f64>,
    optimized_overlap: Option<f64>,
}

fn compass_scan(a: CompassScanArgs) -> Result<()> {
    let start = a.nmin + a.nmin % 2;
    if start > a.nmax {
        bail!("empty range of even N between {} and {}", a.nmin, a.nmax);
    }
    let ns: Vec<u32> = (start..=a.nmax).step_by(2).collect();
    let scan = compass_trivial_overlap_scan(&ns)?;
    let mut rows = Vec::with_capacity(scan.len());
    for s in scan {
        let best = if a.optimize_deltas { Some(optimize_compass_deltas(s.n)?) } else { None };
        rows.push(CompassRow {
            n: s.n,
            overlap: s.overlap,
            delta_x: best.as_ref().map(|b| b.deltas[0]),
            delta_y: best.as_ref().map(|b| b.deltas[1]),
            delta_z: best.as_ref().map(|b| b.deltas[2]),
            optimized_overlap: best.as_ref().map(|b| b.overlap),
        });
    }
    write_csv(a.out.as_deref(), &rows)
}

fn su4_check(a: Su4CheckArgs, config: &RunConfig) -> Result<()> {
    let mut spaces = Vec::new();
    for space in Su4Space::ALL {
        let p = build_su4_problem(space);
        let g = p.group()?;
        let data = trivial_irrep(&g)?;
        spaces.push(json!({
            "space": space,
            "dim": p.dim(),
            "relations": p.relation_residuals(),
            "group_order": g.order(),
            "multiplicity": data.multiplicity,
        }));
    }
    let (space, state, how) = match a.probe {
        Su4ProbeArg::Entangled => {
            let p = build_su4_problem(Su4Space::EntangledPair);
            let phi = p.maximally_entangled()?;
            (Su4Space::EntangledPair, phi, "maximally entangled pair")
        }
        Su4ProbeArg::Twirled => {
            let space = match a.space {
                Su4SpaceArg::Defining => Su4Space::Defining,
                Su4SpaceArg::Tensor => Su4Space::TensorSquare,
                Su4SpaceArg::Symmetric => Su4Space::SymmetricSquare,
                Su4SpaceArg::Entangled => Su4Space::EntangledPair,
            };
            let p = build_su4_problem(space);
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(config.seed);
            let v = random::random_unit_vector(p.dim(), &mut rng);
            let full = p.group()?;
            if trivial_irrep(&full)?.multiplicity > 0 {
                (space, twirl_vector(&full, &v)?, "twirl over the full group")
            } else {
                (space, twirl_vector(&p.cyclic_group()?, &v)?, "twirl over the W subgroup (no full-group invariant)")
            }
        }
    };
    let p = build_su4_problem(space);
    let f = p.qfim(&state)?;
    print_json(&json!({
        "spaces": spaces,
        "probe": {
            "space": space,
            "construction": how,
            "conditions": p.conditions(&state)?,
            "qfim": f.matrix,
            "circulant": circulant_fit(&f.matrix),
            "trace_inverse": f.trace_inverse().ok(),
        },
    }))
}

#[derive(Serialize)]
struct WignerRow {
    theta: f64,
    phi: f64,
    w: f64,
}

fn wigner(a: WignerArgs) -> Result<()> {
    let state = load_state(&a.state)?;
    let grid = spin_wigner(&state, a.ntheta, a.nphi)?;
    let mut rows = Vec::with_capacity(a.ntheta * a.nphi);
    for (i, &theta) in grid.thetas.iter().enumerate() {
        for (j, &phi) in grid.phis.iter().enumerate() {
            rows.push(WignerRow { theta, phi, w: grid.values[i][j] });
        }
    }
    write_csv(Some(&a.out), &rows)?;
    if let Some(script) = &a.gnuplot {
        let text = format!(
            "set datafile separator ','\n\
             set xlabel 'phi'\nset ylabel 'theta'\n\
             set xrange [0:2*pi]\nset yrange [pi:0]\n\
             set view map\nset palette defined (-1 'blue', 0 'white', 1 'red')\n\
             splot '{}' every ::1 using 2:1:3 with image notitle\n",
            a.out.display()
        );
        write_text(script, &text)?;
    }
    eprintln!(
        "normalization {:.12}, max imaginary part {:.1e}",
        grid.normalization(),
        grid.max_imaginary
    );
    Ok(())
}

fn verify_all(a: VerifyAllArgs) -> Result<()> {
    let results = if a.only.is_empty() {
        acceptance::run_all()
    } else {
        for &n in &a.only {
            if n == 0 || n > acceptance::CRITERIA {
                bail!("criteria are numbered 1..={}", acceptance::CRITERIA);
            }
        }
        a.only.iter().map(|&n| acceptance::run(n)).collect()
    };
    if a.json {
        print_json(&results)?;
    } else {
        for r in &results {
            println!("{r}");
        }
    }
    let failed: Vec<String> = results
        .iter()
        .filter(|r| !r.passed)
        .map(|r| format!("{} ({})", r.number, r.title))
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(NumericFailure(format!("failing criteria: {}", failed.join(", "))).into())
    }
}
