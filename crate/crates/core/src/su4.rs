//! Four-parameter estimation with the generators X₁₂, X₂₄, X₃₄, X₁₃ of u(4),
//! the cyclic symmetry W, the sign flip Z and the group they generate.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::groups::{close_group, trivial_irrep, twirl_vector, FiniteGroupRep, GroupName, TrivialIrrepData};
use crate::metrology::Qfim;
use crate::numerics::{kron, unitary_exp, vector};
use crate::state::ZERO_NORM_FLOOR;
use crate::{CMatrix, RMatrix, C64};

/// Matrix unit E_ij (zero-based indices).
pub fn matrix_unit(i: usize, j: usize) -> CMatrix {
    CMatrix::from_fn(4, 4, |r, c| {
        if (r, c) == (i, j) {
            C64::new(1.0, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

/// X_ij = E_ij + E_ji (zero-based).
pub fn x_gen(i: usize, j: usize) -> CMatrix {
    &matrix_unit(i, j) + &matrix_unit(j, i)
}

/// Y_ij = iE_ij − iE_ji (zero-based).
pub fn y_gen(i: usize, j: usize) -> CMatrix {
    (&matrix_unit(i, j) - &matrix_unit(j, i)).scale(C64::new(0.0, 1.0))
}

/// The sixteen Hermitian basis elements E_kk, Y_ij, X_ij (i < j).
pub fn hermitian_basis() -> Vec<CMatrix> {
    let mut out: Vec<CMatrix> = (0..4).map(|k| matrix_unit(k, k)).collect();
    for i in 0..4 {
        for j in (i + 1)..4 {
            out.push(y_gen(i, j));
            out.push(x_gen(i, j));
        }
    }
    out
}

/// The permutation matrix W with W†X_iW = X_{i⊕1}.
pub fn w_matrix() -> CMatrix {
    CMatrix::from_real_rows(&[
        &[0.0, 1.0, 0.0, 0.0],
        &[0.0, 0.0, 0.0, 1.0],
        &[1.0, 0.0, 0.0, 0.0],
        &[0.0, 0.0, 1.0, 0.0],
    ])
}

/// exp[iπ/4 (X₁₂+X₁₃+X₂₄+X₃₄ − Y₁₂ − Y₂₄ + Y₁₃ + Y₃₄ + Σ E_kk)].
/// Not equal to `w_matrix()`; its fourth power is −I.
pub fn w_exponential_form() -> CMatrix {
    let terms = [
        x_gen(0, 1),
        x_gen(0, 2),
        x_gen(1, 3),
        x_gen(2, 3),
        y_gen(0, 1).scale_real(-1.0),
        y_gen(1, 3).scale_real(-1.0),
        y_gen(0, 2),
        y_gen(2, 3),
        CMatrix::identity(4),
    ];
    let h = terms.iter().fold(CMatrix::zeros(4, 4), |a, t| &a + t);
    unitary_exp(&h, -PI / 4.0).expect("exponent is Hermitian")
}

/// Z = exp(−iπ/2 (E₁₁ − E₂₂ − E₃₃ − E₄₄)).
pub fn z_matrix() -> CMatrix {
    let h = CMatrix::diag(&[1.0, -1.0, -1.0, -1.0].map(|x| C64::new(x, 0.0)));
    unitary_exp(&h, PI / 2.0).expect("diagonal is Hermitian")
}

/// X₀..X₃ = X₁₂, X₂₄, X₃₄, X₁₃.
pub fn defining_generators() -> [CMatrix; 4] {
    [x_gen(0, 1), x_gen(1, 3), x_gen(2, 3), x_gen(0, 2)]
}

/// Spaces in which the problem is realized.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Su4Space {
    /// C⁴ with the generators themselves.
    Defining,
    /// C⁴ ⊗ C⁴, generators X ⊗ I + I ⊗ X, symmetry g ⊗ g.
    TensorSquare,
    /// Symmetric part of the tensor square (dimension 10).
    SymmetricSquare,
    /// C⁴ ⊗ C⁴, generators X ⊗ I on the first copy, symmetry g ⊗ ḡ.
    EntangledPair,
}

impl Su4Space {
    pub const ALL: [Su4Space; 4] = [
        Su4Space::Defining,
        Su4Space::TensorSquare,
        Su4Space::SymmetricSquare,
        Su4Space::EntangledPair,
    ];
}

impl std::str::FromStr for Su4Space {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "defining" => Ok(Su4Space::Defining),
            "tensor" | "tensor-square" => Ok(Su4Space::TensorSquare),
            "symmetric" | "symmetric-square" => Ok(Su4Space::SymmetricSquare),
            "entangled" | "entangled-pair" => Ok(Su4Space::EntangledPair),
            other => Err(Error::InvalidArgument(format!("unknown SU(4) space '{other}'"))),
        }
    }
}

/// The problem realized on one space: generators, symmetries and the
/// Hermitian basis used for the quadratic Casimir.
#[derive(Clone, Debug)]
pub struct Su4Problem {
    pub space: Su4Space,
    pub generators: [CMatrix; 4],
    pub w: CMatrix,
    pub z: CMatrix,
    pub casimir: CMatrix,
}

fn symmetric_isometry() -> CMatrix {
    let mut cols: Vec<Vec<C64>> = Vec::new();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    for i in 0..4 {
        for j in i..4 {
            let mut v = vector::zeros(16);
            if i == j {
                v[4 * i + i] = C64::new(1.0, 0.0);
            } else {
                v[4 * i + j] = C64::new(h, 0.0);
                v[4 * j + i] = C64::new(h, 0.0);
            }
            cols.push(v);
        }
    }
    CMatrix::from_fn(16, cols.len(), |r, c| cols[c][r])
}

fn lift(space: Su4Space, a: &CMatrix) -> CMatrix {
    let id = CMatrix::identity(4);
    match space {
        Su4Space::Defining => a.clone(),
        Su4Space::TensorSquare => &kron(a, &id) + &kron(&id, a),
        Su4Space::SymmetricSquare => {
            let v = symmetric_isometry();
            v.adjoint().matmul(&lift(Su4Space::TensorSquare, a)).matmul(&v)
        }
        Su4Space::EntangledPair => kron(a, &id),
    }
}

fn lift_group_element(space: Su4Space, g: &CMatrix) -> CMatrix {
    match space {
        Su4Space::Defining => g.clone(),
        Su4Space::TensorSquare => kron(g, g),
        Su4Space::SymmetricSquare => {
            let v = symmetric_isometry();
            v.adjoint().matmul(&kron(g, g)).matmul(&v)
        }
        Su4Space::EntangledPair => kron(g, &g.conj()),
    }
}

pub fn build_su4_problem(space: Su4Space) -> Su4Problem {
    let generators = defining_generators().map(|x| lift(space, &x));
    let casimir = hermitian_basis().iter().fold(
        CMatrix::zeros(generators[0].rows(), generators[0].rows()),
        |acc, b| {
            let l = lift(space, b);
            &acc + &l.matmul(&l)
        },
    );
    Su4Problem {
        space,
        generators,
        w: lift_group_element(space, &w_matrix()),
        z: lift_group_element(space, &z_matrix()),
        casimir,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RelationResiduals {
    /// max_i ‖W†X_iW − X_{i⊕1}‖_max
    pub w_shift: f64,
    /// max_i ‖Z†X_iZ ∓ X_i‖_max with signs (−, +, +, −)
    pub z_flip: f64,
    /// ‖W⁴ − I‖_max
    pub w_order: f64,
    /// ‖Z⁴ − I‖_max
    pub z_order: f64,
    /// ‖(ZW)⁴ − I‖_max
    pub zw_order: f64,
    /// ‖(ZW)⁴ + I‖_max
    pub zw_order_up_to_sign: f64,
}

impl RelationResiduals {
    pub fn max(&self) -> f64 {
        self.w_shift
            .max(self.z_flip)
            .max(self.w_order)
            .max(self.z_order)
            .max(self.zw_order)
    }
}

impl Su4Problem {
    pub fn dim(&self) -> usize {
        self.w.rows()
    }

    pub fn relation_residuals(&self) -> RelationResiduals {
        let id = CMatrix::identity(self.dim());
        let mut w_shift = 0.0f64;
        let mut z_flip = 0.0f64;
        let signs = [-1.0, 1.0, 1.0, -1.0];
        for i in 0..4 {
            let wx = self.w.adjoint().matmul(&self.generators[i]).matmul(&self.w);
            w_shift = w_shift.max(wx.max_abs_diff(&self.generators[(i + 1) % 4]));
            let zx = self.z.adjoint().matmul(&self.generators[i]).matmul(&self.z);
            z_flip = z_flip.max(zx.max_abs_diff(&self.generators[i].scale_real(signs[i])));
        }
        let zw4 = self.z.matmul(&self.w).pow(4);
        RelationResiduals {
            w_shift,
            z_flip,
            w_order: self.w.pow(4).max_abs_diff(&id),
            z_order: self.z.pow(4).max_abs_diff(&id),
            zw_order: zw4.max_abs_diff(&id),
            zw_order_up_to_sign: zw4.max_abs_diff(&id.scale_real(-1.0)),
        }
    }

    /// The matrix group generated by W and Z on this space.
    pub fn group(&self) -> Result<FiniteGroupRep> {
        close_group(
            GroupName::Custom,
            vec![self.w.clone(), self.z.clone()],
            vec!["W".into(), "Z".into()],
            None,
        )
    }

    /// The cyclic subgroup generated by W alone.
    pub fn cyclic_group(&self) -> Result<FiniteGroupRep> {
        close_group(GroupName::Custom, vec![self.w.clone()], vec!["W".into()], Some(4))
    }

    pub fn trivial_irrep(&self) -> Result<TrivialIrrepData> {
        trivial_irrep(&self.group()?)
    }

    /// Σ Φ_kk over the two copies; meaningful on the entangled pair.
    pub fn maximally_entangled(&self) -> Result<Vec<C64>> {
        if self.space != Su4Space::EntangledPair {
            return Err(Error::InvalidArgument(
                "the maximally entangled probe lives on the entangled pair".into(),
            ));
        }
        let mut v = vector::zeros(16);
        for k in 0..4 {
            v[5 * k] = C64::new(0.5, 0.0);
        }
        Ok(v)
    }

    fn check_state(&self, state: &[C64]) -> Result<()> {
        if state.len() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "state of length {} on a space of dimension {}",
                state.len(),
                self.dim()
            )));
        }
        Ok(())
    }

    /// F(0)_ij = 2⟨[X_i − ⟨X_i⟩, X_j − ⟨X_j⟩]₊⟩.
    pub fn qfim(&self, state: &[C64]) -> Result<Qfim> {
        self.check_state(state)?;
        let (first, second) = self.moments(state);
        let m = RMatrix::from_fn(4, 4, |i, j| 4.0 * (second[i][j].re - first[i] * first[j]));
        Ok(Qfim {
            theta: vec![0.0; 4],
            matrix: m.symmetrized(),
        })
    }

    fn moments(&self, state: &[C64]) -> ([f64; 4], [[C64; 4]; 4]) {
        let images: Vec<Vec<C64>> = self.generators.iter().map(|x| x.apply(state)).collect();
        let mut first = [0.0; 4];
        let mut second = [[C64::new(0.0, 0.0); 4]; 4];
        for i in 0..4 {
            first[i] = vector::inner(state, &images[i]).re;
            for j in 0..4 {
                second[i][j] = vector::inner(&images[i], &images[j]);
            }
        }
        (first, second)
    }

    pub fn conditions(&self, state: &[C64]) -> Result<Su4ConditionReport> {
        self.check_state(state)?;
        let (first, second) = self.moments(state);
        let diag: [f64; 4] = std::array::from_fn(|i| second[i][i].re);
        let a = diag.iter().sum::<f64>() / 4.0;
        let neighbor: [f64; 4] = std::array::from_fn(|i| second[i][(i + 1) % 4].re);
        let opposite: [f64; 4] = std::array::from_fn(|i| second[i][(i + 2) % 4].re);
        let spread = diag.iter().fold(f64::NEG_INFINITY, |m, &x| m.max(x))
            - diag.iter().fold(f64::INFINITY, |m, &x| m.min(x));
        let max_abs = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let max_residual = max_abs(&first)
            .max(max_abs(&diag.map(|d| d - a)))
            .max(max_abs(&neighbor))
            .max(max_abs(&opposite));
        let casimir_bound = vector::inner(state, &self.casimir.apply(state)).re / 4.0;
        Ok(Su4ConditionReport {
            first_moments: first,
            second_moments: diag,
            a,
            spread,
            neighbor,
            opposite,
            max_residual,
            casimir_bound,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Su4ConditionReport {
    /// ⟨X_i⟩
    pub first_moments: [f64; 4],
    /// ⟨X_i²⟩
    pub second_moments: [f64; 4],
    /// Mean of ⟨X_i²⟩.
    pub a: f64,
    /// max − min of ⟨X_i²⟩.
    pub spread: f64,
    /// ⟨X_i ∘ X_{i⊕1}⟩
    pub neighbor: [f64; 4],
    /// ⟨X_i ∘ X_{i⊕2}⟩
    pub opposite: [f64; 4],
    pub max_residual: f64,
    /// ⟨C₂⟩/4, an upper bound on a.
    pub casimir_bound: f64,
}

/// Projection onto the invariant vectors of `group`, normalized.
pub fn su4_twirl(group: &FiniteGroupRep, state: &[C64]) -> Result<Vec<C64>> {
    twirl_vector(group, state)
}

/// tr F(0)⁻¹ for the circulant matrix with diagonal a, neighbors b and
/// opposite entries c.
pub fn circulant_trace_inverse(a: f64, b: f64, c: f64) -> f64 {
    2.0 / (a - c) + 1.0 / (a + 2.0 * b + c) + 1.0 / (a - 2.0 * b + c)
}

/// (∂f/∂b, ∂f/∂c)
pub fn circulant_trace_inverse_gradient(a: f64, b: f64, c: f64) -> [f64; 2] {
    let p = a + 2.0 * b + c;
    let m = a - 2.0 * b + c;
    [
        2.0 / (m * m) - 2.0 / (p * p),
        2.0 / ((a - c) * (a - c)) - 1.0 / (p * p) - 1.0 / (m * m),
    ]
}

/// Circulant fit (a, b, c) of a 4×4 matrix and the largest off-pattern entry.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CirculantFit {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub defect: f64,
}

pub fn circulant_fit(m: &RMatrix) -> CirculantFit {
    let mean = |f: &dyn Fn(usize) -> f64| (0..4).map(f).sum::<f64>() / 4.0;
    let a = mean(&|i| m[(i, i)]);
    let b = mean(&|i| m[(i, (i + 1) % 4)]);
    let c = mean(&|i| m[(i, (i + 2) % 4)]);
    let mut defect = 0.0f64;
    for i in 0..4 {
        for j in 0..4 {
            let expected = match (j + 4 - i) % 4 {
                0 => a,
                2 => c,
                _ => b,
            };
            defect = defect.max((m[(i, j)] - expected).abs());
        }
    }
    CirculantFit { a, b, c, defect }
}

/// Normalizes a raw vector, failing below the zero-norm floor.
pub fn normalize(v: &[C64]) -> Result<Vec<C64>> {
    let norm = vector::norm(v);
    vector::normalized(v, ZERO_NORM_FLOOR)
        .map(|(u, _)| u)
        .ok_or(Error::ZeroNorm { norm })
}
