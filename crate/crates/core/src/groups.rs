//! Finite subgroups of SU(2) (and of U(4)) as explicit lists of unitaries,
//! with trivial-irrep projectors and invariant bases.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::numerics::{herm_eig, unitary_exp, vector};
use crate::spinrep::SpinRep;
use crate::state::{ProbeState, ZERO_NORM_FLOOR};
use crate::{CMatrix, C64};

/// Two elements closer than this (max entry difference) are identified.
pub const DEDUP_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GroupName {
    /// Rotation group of the tetrahedron, order 12.
    A4Tetrahedral,
    /// Symmetries of a triangular prism, order 6.
    S3Prism,
    Custom,
}

impl GroupName {
    pub fn expected_order(self) -> Option<usize> {
        match self {
            GroupName::A4Tetrahedral => Some(12),
            GroupName::S3Prism => Some(6),
            GroupName::Custom => None,
        }
    }
}

impl std::str::FromStr for GroupName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "a4" | "a4_tetrahedral" | "2t" => Ok(GroupName::A4Tetrahedral),
            "s3" | "s3_prism" => Ok(GroupName::S3Prism),
            other => Err(Error::InvalidArgument(format!("unknown group '{other}'"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct FiniteGroupRep {
    pub name: GroupName,
    /// Identity first, then breadth-first order of discovery.
    pub elements: Vec<CMatrix>,
    pub generators: Vec<CMatrix>,
    pub generator_descriptions: Vec<String>,
}

impl FiniteGroupRep {
    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn dim(&self) -> usize {
        self.elements[0].rows()
    }

    /// Largest deviation from closure: every product must be within
    /// [`DEDUP_TOL`] of some element.
    pub fn closure_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for a in &self.elements {
            for b in &self.elements {
                let ab = a.matmul(b);
                let best = self
                    .elements
                    .iter()
                    .map(|g| g.max_abs_diff(&ab))
                    .fold(f64::INFINITY, f64::min);
                worst = worst.max(best);
            }
        }
        worst
    }
}

/// `A4_tetrahedral` or `S3_prism` in the given integer-spin irrep.
pub fn build_group(name: GroupName, rep: &SpinRep) -> Result<FiniteGroupRep> {
    if !rep.is_integer_spin() {
        return Err(Error::NotIntegerSpin { two_j: rep.two_j() });
    }
    let exp = |h: &CMatrix, t: f64| unitary_exp(h, t).expect("generator exponent is Hermitian");
    let (gens, desc) = match name {
        GroupName::A4Tetrahedral => {
            let axis = rep.dot([1.0 / 3f64.sqrt(); 3]);
            (
                vec![exp(&axis, -2.0 * PI / 3.0), exp(rep.jz(), PI)],
                vec![
                    "exp(2πi (Jx+Jy+Jz)/(3√3))".to_string(),
                    "exp(−iπ Jz)".to_string(),
                ],
            )
        }
        GroupName::S3Prism => (
            vec![exp(rep.jz(), -2.0 * PI / 3.0), exp(rep.jx(), -PI)],
            vec!["exp(2πi Jz/3)".to_string(), "exp(iπ Jx)".to_string()],
        ),
        GroupName::Custom => {
            return Err(Error::InvalidArgument(
                "custom groups are built with close_group".into(),
            ))
        }
    };
    close_group(name, gens, desc, name.expected_order())
}

/// Breadth-first closure of the generated matrix group. Fails with
/// `ClosureOverflow` past 4× the expected order (or 4096 elements when no
/// order is expected).
pub fn close_group(
    name: GroupName,
    generators: Vec<CMatrix>,
    generator_descriptions: Vec<String>,
    expected_order: Option<usize>,
) -> Result<FiniteGroupRep> {
    let Some(first) = generators.first() else {
        return Err(Error::InvalidArgument("a group needs at least one generator".into()));
    };
    let d = first.rows();
    if generators.iter().any(|g| !g.is_square() || g.rows() != d) {
        return Err(Error::DimensionMismatch("generators differ in shape".into()));
    }
    let limit = expected_order.map_or(4096, |n| 4 * n);
    let mut elements = vec![CMatrix::identity(d)];
    let mut frontier = 0;
    while frontier < elements.len() {
        let g = elements[frontier].clone();
        frontier += 1;
        for h in &generators {
            let gh = g.matmul(h);
            if !elements.iter().any(|e| e.max_abs_diff(&gh) < DEDUP_TOL) {
                elements.push(gh);
                if elements.len() > limit {
                    return Err(Error::ClosureOverflow {
                        limit,
                        expected: expected_order.unwrap_or(0),
                    });
                }
            }
        }
    }
    Ok(FiniteGroupRep {
        name,
        elements,
        generators,
        generator_descriptions,
    })
}

#[derive(Clone, Debug)]
pub struct TrivialIrrepData {
    pub projector: CMatrix,
    pub multiplicity: usize,
    /// Orthonormal invariant vectors, each phase-fixed (largest entry real positive).
    pub basis: Vec<Vec<C64>>,
}

impl TrivialIrrepData {
    /// Basis vectors as single-irrep probe states.
    pub fn basis_states(&self, two_j: u32) -> Result<Vec<ProbeState>> {
        self.basis
            .iter()
            .map(|b| ProbeState::new(two_j, b.clone()))
            .collect()
    }
}

/// Group average `(1/|G|) Σ g`.
pub fn group_average(group: &FiniteGroupRep) -> CMatrix {
    let d = group.dim();
    let sum = group
        .elements
        .iter()
        .fold(CMatrix::zeros(d, d), |acc, g| &acc + g);
    sum.scale_real(1.0 / group.order() as f64)
}

pub fn trivial_irrep(group: &FiniteGroupRep) -> Result<TrivialIrrepData> {
    let projector = group_average(group);
    let trace = projector.trace().re;
    let rounded = trace.round();
    if (trace - rounded).abs() > 1e-6 {
        return Err(Error::NonIntegerTrace { trace });
    }
    let eig = herm_eig(&projector.hermitian_part())?;
    let basis: Vec<Vec<C64>> = eig
        .vectors_above(0.5)
        .into_iter()
        .map(|mut b| {
            vector::fix_global_phase(&mut b);
            b
        })
        .collect();
    Ok(TrivialIrrepData {
        projector,
        multiplicity: rounded.max(0.0) as usize,
        basis,
    })
}

/// Multiplicity of the S₃ trivial irrep in the spin-J irrep, from the
/// character formula.
pub fn s3_multiplicity_formula(j: u32) -> u32 {
    let jf = f64::from(j);
    let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
    let rot = 2.0 * (PI * (2.0 * jf + 1.0) / 3.0).sin() / (PI / 3.0).sin();
    ((2.0 * jf + 1.0 + 3.0 * sign + rot) / 6.0).round() as u32
}

/// `Π v`, normalized.
pub fn twirl_vector(group: &FiniteGroupRep, v: &[C64]) -> Result<Vec<C64>> {
    if v.len() != group.dim() {
        return Err(Error::DimensionMismatch(format!(
            "vector of length {} for a group acting on dimension {}",
            v.len(),
            group.dim()
        )));
    }
    let mut acc = vector::zeros(v.len());
    for g in &group.elements {
        let gv = g.apply(v);
        vector::axpy(&mut acc, C64::new(1.0, 0.0), &gv);
    }
    let acc = vector::scale(&acc, C64::new(1.0 / group.order() as f64, 0.0));
    let norm = vector::norm(&acc);
    vector::normalized(&acc, ZERO_NORM_FLOOR)
        .map(|(u, _)| u)
        .ok_or(Error::ZeroProjection { norm })
}

/// Projection of a single-irrep state onto the group's invariant subspace.
pub fn twirl(group: &FiniteGroupRep, state: &ProbeState) -> Result<ProbeState> {
    if state.is_tensor() {
        return Err(Error::DimensionMismatch(
            "twirl acts on single-irrep states".into(),
        ));
    }
    ProbeState::new(state.two_j(), twirl_vector(group, state.amps())?)
}

/// Largest `‖g b − b‖_max` over elements and basis vectors.
pub fn invariance_defect(group: &FiniteGroupRep, basis: &[Vec<C64>]) -> f64 {
    let mut worst: f64 = 0.0;
    for g in &group.elements {
        for b in basis {
            let gb = g.apply(b);
            let d = gb
                .iter()
                .zip(b)
                .fold(0.0f64, |m, (x, y)| m.max((x - y).norm()));
            worst = worst.max(d);
        }
    }
    worst
}
