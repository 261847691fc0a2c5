use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::vector;
use crate::{CMatrix, C64};

/// Norm below which a candidate state is treated as the zero vector.
pub const ZERO_NORM_FLOOR: f64 = 1e-10;

/// Pure probe state in the `|J, m⟩` basis (m = J..−J), either on a single
/// spin-J irrep or on the tensor product of two copies of it. For tensor
/// states the collective generators act on the first factor only.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbeState {
    two_j: u32,
    tensor: bool,
    amps: Vec<C64>,
}

impl ProbeState {
    /// Single-irrep state; amplitudes are normalized.
    pub fn new(two_j: u32, amps: Vec<C64>) -> Result<Self> {
        Self::from_parts(two_j, false, amps)
    }

    /// Two-copy state with amplitude index `a * (2J+1) + b`; normalized.
    pub fn new_tensor(two_j: u32, amps: Vec<C64>) -> Result<Self> {
        Self::from_parts(two_j, true, amps)
    }

    pub fn from_parts(two_j: u32, tensor: bool, amps: Vec<C64>) -> Result<Self> {
        let d = two_j as usize + 1;
        let expected = if tensor { d * d } else { d };
        if amps.len() != expected {
            return Err(Error::DimensionMismatch(format!(
                "2J = {two_j} {} state needs {expected} amplitudes, got {}",
                if tensor { "tensor" } else { "single" },
                amps.len()
            )));
        }
        if amps.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::InvalidState("non-finite amplitude".into()));
        }
        let norm = vector::norm(&amps);
        let (amps, _) = vector::normalized(&amps, ZERO_NORM_FLOOR).ok_or(Error::ZeroNorm { norm })?;
        Ok(Self { two_j, tensor, amps })
    }

    pub fn two_j(&self) -> u32 {
        self.two_j
    }

    pub fn j(&self) -> f64 {
        f64::from(self.two_j) / 2.0
    }

    pub fn is_tensor(&self) -> bool {
        self.tensor
    }

    /// Dimension of one factor, 2J + 1.
    pub fn factor_dim(&self) -> usize {
        self.two_j as usize + 1
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amps(&self) -> &[C64] {
        &self.amps
    }

    pub fn into_amps(self) -> Vec<C64> {
        self.amps
    }

    /// `(op ⊗ I)|ψ⟩` for tensor states, `op|ψ⟩` otherwise.
    pub fn apply_factor(&self, op: &CMatrix) -> Vec<C64> {
        apply_on_first_factor(op, &self.amps, self.tensor)
    }

    /// Same lifting as [`apply_factor`](Self::apply_factor), on an arbitrary
    /// vector of this state's shape.
    pub fn apply_factor_vec(&self, op: &CMatrix, v: &[C64]) -> Vec<C64> {
        apply_on_first_factor(op, v, self.tensor)
    }

    /// The state transformed by a unitary acting on the (first) factor.
    pub fn transformed(&self, u: &CMatrix) -> Self {
        Self {
            two_j: self.two_j,
            tensor: self.tensor,
            amps: self.apply_factor(u),
        }
    }

    pub fn to_json(&self) -> StateJson {
        StateJson {
            two_j: self.two_j,
            tensor: self.tensor,
            amps: self.amps.iter().map(|a| [a.re, a.im]).collect(),
        }
    }

    pub fn from_json(doc: &StateJson) -> Result<Self> {
        let amps = doc.amps.iter().map(|&[re, im]| C64::new(re, im)).collect();
        Self::from_parts(doc.two_j, doc.tensor, amps)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_json()).expect("state serializes")
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let doc: StateJson =
            serde_json::from_str(text).map_err(|e| Error::InvalidState(e.to_string()))?;
        Self::from_json(&doc)
    }
}

/// Serialized form of a [`ProbeState`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateJson {
    pub two_j: u32,
    #[serde(default)]
    pub tensor: bool,
    pub amps: Vec<[f64; 2]>,
}

/// Applies `op` to the first tensor factor of `v` (or to `v` itself when
/// `tensor` is false).
pub fn apply_on_first_factor(op: &CMatrix, v: &[C64], tensor: bool) -> Vec<C64> {
    if !tensor {
        return op.apply(v);
    }
    let d = op.rows();
    let mut out = vec![C64::new(0.0, 0.0); v.len()];
    for a in 0..d {
        for k in 0..d {
            let w = op[(a, k)];
            if w.re == 0.0 && w.im == 0.0 {
                continue;
            }
            for b in 0..d {
                out[a * d + b] += w * v[k * d + b];
            }
        }
    }
    out
}
