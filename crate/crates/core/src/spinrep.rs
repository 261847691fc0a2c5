//! Spin-J irreducible representations of SU(2) in the `|J, m⟩` basis ordered
//! m = J, J−1, …, −J.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::numerics::{kron, partial_trace, unitary_exp, vector};
use crate::state::ProbeState;
use crate::{CMatrix, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }

    pub fn unit(self) -> [f64; 3] {
        let mut e = [0.0; 3];
        e[self.index()] = 1.0;
        e
    }
}

impl std::str::FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "x" => Ok(Axis::X),
            "y" => Ok(Axis::Y),
            "z" => Ok(Axis::Z),
            other => Err(Error::InvalidArgument(format!("unknown axis '{other}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpinRep {
    two_j: u32,
    gens: [CMatrix; 3],
}

impl SpinRep {
    /// Builds `J_x, J_y, J_z` from the ladder operators.
    pub fn new(two_j: u32) -> Self {
        let d = two_j as usize + 1;
        let j = f64::from(two_j) / 2.0;
        let m = |k: usize| j - k as f64;
        // J+ |m⟩ = sqrt(J(J+1) − m(m+1)) |m+1⟩, and |m+1⟩ sits one row above |m⟩.
        let mut jp = CMatrix::zeros(d, d);
        for k in 1..d {
            let mk = m(k);
            jp[(k - 1, k)] = C64::new((j * (j + 1.0) - mk * (mk + 1.0)).max(0.0).sqrt(), 0.0);
        }
        let jm = jp.adjoint();
        let jx = (&jp + &jm).scale_real(0.5);
        let jy = (&jp - &jm).scale(C64::new(0.0, -0.5));
        let jz = CMatrix::diag(&(0..d).map(|k| C64::new(m(k), 0.0)).collect::<Vec<_>>());
        Self {
            two_j,
            gens: [jx, jy, jz],
        }
    }

    pub fn two_j(&self) -> u32 {
        self.two_j
    }

    pub fn j(&self) -> f64 {
        f64::from(self.two_j) / 2.0
    }

    pub fn dim(&self) -> usize {
        self.two_j as usize + 1
    }

    /// J(J+1).
    pub fn casimir(&self) -> f64 {
        let j = self.j();
        j * (j + 1.0)
    }

    pub fn is_integer_spin(&self) -> bool {
        self.two_j % 2 == 0
    }

    pub fn generator(&self, axis: Axis) -> &CMatrix {
        &self.gens[axis.index()]
    }

    pub fn generators(&self) -> &[CMatrix; 3] {
        &self.gens
    }

    pub fn jx(&self) -> &CMatrix {
        &self.gens[0]
    }

    pub fn jy(&self) -> &CMatrix {
        &self.gens[1]
    }

    pub fn jz(&self) -> &CMatrix {
        &self.gens[2]
    }

    /// `J_i ⊗ I` on two copies of the irrep.
    pub fn tensor_generator(&self, axis: Axis) -> CMatrix {
        kron(self.generator(axis), &CMatrix::identity(self.dim()))
    }

    /// `n·J` for a real 3-vector `n`.
    pub fn dot(&self, n: [f64; 3]) -> CMatrix {
        let mut out = CMatrix::zeros(self.dim(), self.dim());
        for (g, &c) in self.gens.iter().zip(&n) {
            if c != 0.0 {
                out = &out + &g.scale_real(c);
            }
        }
        out
    }

    /// `U(θ) = exp(−i θ·J)`.
    pub fn rotation(&self, theta: [f64; 3]) -> CMatrix {
        unitary_exp(&self.dot(theta), 1.0).expect("θ·J is Hermitian")
    }

    /// `exp(−i angle J_axis)`.
    pub fn axis_rotation(&self, axis: Axis, angle: f64) -> CMatrix {
        let mut theta = [0.0; 3];
        theta[axis.index()] = angle;
        self.rotation(theta)
    }

    /// `|J, m_z = m⟩` for `m = J − k`.
    pub fn basis_state(&self, k: usize) -> Vec<C64> {
        let mut v = vector::zeros(self.dim());
        v[k] = C64::new(1.0, 0.0);
        v
    }

    /// Image vectors `J_i|ψ⟩` (or `(J_i ⊗ I)|ψ⟩` for two-copy states).
    pub fn images(&self, state: &ProbeState) -> [Vec<C64>; 3] {
        self.check(state);
        [
            state.apply_factor(&self.gens[0]),
            state.apply_factor(&self.gens[1]),
            state.apply_factor(&self.gens[2]),
        ]
    }

    fn check(&self, state: &ProbeState) {
        assert_eq!(
            self.two_j,
            state.two_j(),
            "state and representation disagree on 2J"
        );
    }
}

/// Stereographic coordinate of a coherent state; `Infinity` is the south pole.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Zeta {
    Finite(C64),
    Infinity,
}

impl Zeta {
    pub fn real(x: f64) -> Self {
        Zeta::Finite(C64::new(x, 0.0))
    }

    /// Coordinate of the direction with polar angle `theta`, azimuth `phi`.
    pub fn from_angles(theta: f64, phi: f64) -> Self {
        if (theta - std::f64::consts::PI).abs() < 1e-15 {
            return Zeta::Infinity;
        }
        Zeta::Finite(C64::from_polar((theta / 2.0).tan(), phi))
    }
}

fn binomial(n: u32, k: u32) -> f64 {
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * f64::from(n - i) / f64::from(i + 1))
}

/// Spin coherent state with amplitudes ∝ ζ^{J−m} √C(N, J−m).
pub fn coherent_state(two_j: u32, zeta: Zeta) -> ProbeState {
    let d = two_j as usize + 1;
    let amps = match zeta {
        Zeta::Infinity => {
            let mut v = vector::zeros(d);
            v[d - 1] = C64::new(1.0, 0.0);
            v
        }
        Zeta::Finite(z) => {
            let r2 = z.norm_sqr();
            let pre = (1.0 + r2).powf(-f64::from(two_j) / 2.0);
            let mut zk = C64::new(1.0, 0.0);
            let mut v = Vec::with_capacity(d);
            for k in 0..d as u32 {
                v.push(zk * (binomial(two_j, k).sqrt() * pre));
                zk *= z;
            }
            v
        }
    };
    ProbeState::new(two_j, amps).expect("coherent state is normalizable")
}

/// First and second collective-spin moments of a state.
#[derive(Clone, Debug, PartialEq)]
pub struct Moments {
    pub two_j: u32,
    /// ⟨J_i⟩
    pub first: [f64; 3],
    /// ⟨J_i J_l⟩ (complex for i ≠ l)
    pub second: [[C64; 3]; 3],
}

impl Moments {
    /// ⟨(J_iJ_l + J_lJ_i)/2⟩
    pub fn jordan(&self, i: usize, l: usize) -> f64 {
        self.second[i][l].re
    }

    /// Symmetrized covariance ⟨J_i ∘ J_l⟩ − ⟨J_i⟩⟨J_l⟩.
    pub fn covariance(&self, i: usize, l: usize) -> f64 {
        self.jordan(i, l) - self.first[i] * self.first[l]
    }

    pub fn covariance_matrix(&self) -> [[f64; 3]; 3] {
        let mut c = [[0.0; 3]; 3];
        for (i, row) in c.iter_mut().enumerate() {
            for (l, x) in row.iter_mut().enumerate() {
                *x = self.covariance(i, l);
            }
        }
        c
    }
}

pub fn collective_moments(state: &ProbeState) -> Moments {
    let rep = SpinRep::new(state.two_j());
    moments_from_images(state, &rep.images(state))
}

/// Moments from precomputed `J_i|ψ⟩`.
pub fn moments_from_images(state: &ProbeState, images: &[Vec<C64>; 3]) -> Moments {
    let psi = state.amps();
    let mut first = [0.0; 3];
    let mut second = [[C64::new(0.0, 0.0); 3]; 3];
    for i in 0..3 {
        first[i] = vector::inner(psi, &images[i]).re;
        for l in 0..3 {
            second[i][l] = vector::inner(&images[i], &images[l]);
        }
    }
    Moments {
        two_j: state.two_j(),
        first,
        second,
    }
}

/// Pauli matrices σ_x, σ_y, σ_z.
pub fn pauli() -> [CMatrix; 3] {
    let i = C64::new(0.0, 1.0);
    let z = C64::new(0.0, 0.0);
    let o = C64::new(1.0, 0.0);
    [
        CMatrix::from_fn(2, 2, |r, c| if r != c { o } else { z }),
        CMatrix::from_fn(2, 2, |r, c| match (r, c) {
            (0, 1) => -i,
            (1, 0) => i,
            _ => z,
        }),
        CMatrix::diag(&[o, -o]),
    ]
}

/// One- and two-qubit marginals of a single-irrep state read as a permutation
/// symmetric state of N = 2J qubits.
pub fn reduced_qubit_states(state: &ProbeState) -> Result<(CMatrix, CMatrix)> {
    let n = state.two_j();
    if n < 2 || state.is_tensor() {
        return Err(Error::NotSymmetricContext { n });
    }
    let mo = collective_moments(state);
    let nf = f64::from(n);
    let s = pauli();
    let id2 = CMatrix::identity(2);
    let r: Vec<f64> = mo.first.iter().map(|x| 2.0 * x / nf).collect();

    let mut rho1 = id2.clone();
    for i in 0..3 {
        rho1 = &rho1 + &s[i].scale_real(r[i]);
    }
    let rho1 = rho1.scale_real(0.5);

    let mut rho2 = CMatrix::identity(4);
    for i in 0..3 {
        let local = &kron(&s[i], &id2) + &kron(&id2, &s[i]);
        rho2 = &rho2 + &local.scale_real(r[i]);
        for l in 0..3 {
            let delta = if i == l { nf } else { 0.0 };
            let t = (4.0 * mo.jordan(i, l) - delta) / (nf * (nf - 1.0));
            rho2 = &rho2 + &kron(&s[i], &s[l]).scale_real(t);
        }
    }
    Ok((rho1, rho2.scale_real(0.25)))
}

/// Isometry from the spin-N/2 irrep onto the symmetric subspace of N qubits,
/// `|J, J−k⟩ ↦` normalized sum of bit strings with k ones (`|0⟩` is σ_z = +1).
/// Columns follow the m = J..−J ordering; qubit 1 is the most significant bit.
pub fn dicke_embedding(n_qubits: u32) -> CMatrix {
    let n = n_qubits as usize;
    let dim = 1usize << n;
    let mut out = CMatrix::zeros(dim, n + 1);
    for bits in 0..dim {
        let k = bits.count_ones() as usize;
        let norm = binomial(n_qubits, k as u32).sqrt();
        out[(bits, k)] = Complex::new(1.0 / norm, 0.0);
    }
    out
}

/// Brute-force marginals via the explicit qubit embedding; reference for
/// [`reduced_qubit_states`].
pub fn reduced_qubit_states_brute_force(state: &ProbeState) -> Result<(CMatrix, CMatrix)> {
    let n = state.two_j();
    if n < 2 || state.is_tensor() {
        return Err(Error::NotSymmetricContext { n });
    }
    let v = dicke_embedding(n).apply(state.amps());
    let rho = CMatrix::outer(&v, &v);
    let dims = vec![2usize; n as usize];
    Ok((
        partial_trace(&rho, &dims, &[0])?,
        partial_trace(&rho, &dims, &[0, 1])?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::random::random_unit_vector;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn spin_half_is_half_pauli() {
        let rep = SpinRep::new(1);
        for (g, s) in rep.generators().iter().zip(pauli().iter()) {
            assert!(g.max_abs_diff(&s.scale_real(0.5)) < 1e-15);
        }
    }

    #[test]
    fn algebra_and_casimir() {
        for two_j in 0..=12 {
            let rep = SpinRep::new(two_j);
            let [x, y, z] = rep.generators();
            let i = C64::new(0.0, 1.0);
            assert!(x.commutator(y).max_abs_diff(&z.scale(i)) < 1e-12);
            assert!(y.commutator(z).max_abs_diff(&x.scale(i)) < 1e-12);
            assert!(z.commutator(x).max_abs_diff(&y.scale(i)) < 1e-12);
            let cas = &(&x.matmul(x) + &y.matmul(y)) + &z.matmul(z);
            let target = CMatrix::identity(rep.dim()).scale_real(rep.casimir());
            assert!(cas.max_abs_diff(&target) < 1e-12);
        }
    }

    #[test]
    fn ladder_coefficients_j4() {
        let rep = SpinRep::new(8);
        let j = 4.0f64;
        for k in 1..9 {
            let m = j - k as f64;
            let expect = 0.5 * (j * (j + 1.0) - m * (m + 1.0)).sqrt();
            assert!((rep.jx()[(k - 1, k)].re - expect).abs() < 1e-14);
            assert!((rep.jx()[(k, k - 1)].re - expect).abs() < 1e-14);
        }
    }

    #[test]
    fn rotation_basics() {
        let rep = SpinRep::new(1);
        let phi = 0.7;
        let u = rep.rotation([0.0, 0.0, phi]);
        let d = CMatrix::diag(&[C64::from_polar(1.0, -phi / 2.0), C64::from_polar(1.0, phi / 2.0)]);
        assert!(u.max_abs_diff(&d) < 1e-14);
        let rep = SpinRep::new(6);
        assert!(rep.rotation([0.0; 3]).max_abs_diff(&CMatrix::identity(7)) < 1e-14);
        let n = 2.0 * std::f64::consts::PI / 3f64.sqrt();
        assert!(rep.rotation([n, n, n]).max_abs_diff(&CMatrix::identity(7)) < 1e-11);
        let th = [0.3, -0.2, 0.9];
        let back = rep.rotation([-th[0], -th[1], -th[2]]);
        assert!(rep.rotation(th).adjoint().max_abs_diff(&back) < 1e-13);
    }

    #[test]
    fn coherent_state_poles_and_mean() {
        let s = coherent_state(6, Zeta::real(0.0));
        assert!((s.amps()[0].re - 1.0).abs() < 1e-15);
        let s = coherent_state(6, Zeta::Infinity);
        assert!((s.amps()[6].re - 1.0).abs() < 1e-15);
        let xi = (1.0 / 3f64.sqrt()).acos();
        let s = coherent_state(20, Zeta::real((xi / 2.0).tan()));
        let mo = collective_moments(&s);
        assert!((mo.first[2] - 10.0 / 3f64.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn coherent_overlap_law() {
        let n = 7u32;
        let z1 = C64::new(0.3, -0.8);
        let z2 = C64::new(-1.1, 0.4);
        let a = coherent_state(n, Zeta::Finite(z1));
        let b = coherent_state(n, Zeta::Finite(z2));
        let got = vector::inner(a.amps(), b.amps()).norm_sqr();
        let num = (C64::new(1.0, 0.0) + z1.conj() * z2) * (C64::new(1.0, 0.0) + z1 * z2.conj());
        let expect = (num.re / ((1.0 + z1.norm_sqr()) * (1.0 + z2.norm_sqr()))).powi(n as i32);
        assert!((got - expect).abs() < 1e-10);
    }

    #[test]
    fn highest_weight_moments() {
        let mut v = vector::zeros(7);
        v[0] = C64::new(1.0, 0.0);
        let mo = collective_moments(&ProbeState::new(6, v).unwrap());
        assert!((mo.first[2] - 3.0).abs() < 1e-14);
        assert!((mo.jordan(2, 2) - 9.0).abs() < 1e-13);
        assert!((mo.jordan(0, 0) - 1.5).abs() < 1e-13);
        assert!((mo.jordan(1, 1) - 1.5).abs() < 1e-13);
    }

    #[test]
    fn reduced_states_of_product_state() {
        let mut v = vector::zeros(5);
        v[0] = C64::new(1.0, 0.0);
        let (r1, r2) = reduced_qubit_states(&ProbeState::new(4, v).unwrap()).unwrap();
        let mut p1 = CMatrix::zeros(2, 2);
        p1[(0, 0)] = C64::new(1.0, 0.0);
        let mut p2 = CMatrix::zeros(4, 4);
        p2[(0, 0)] = C64::new(1.0, 0.0);
        assert!(r1.max_abs_diff(&p1) < 1e-14);
        assert!(r2.max_abs_diff(&p2) < 1e-14);
    }

    #[test]
    fn reduced_states_match_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in 2..=6u32 {
            for _ in 0..10 {
                let s = ProbeState::new(n, random_unit_vector(n as usize + 1, &mut rng)).unwrap();
                let (a1, a2) = reduced_qubit_states(&s).unwrap();
                let (b1, b2) = reduced_qubit_states_brute_force(&s).unwrap();
                assert!(a1.max_abs_diff(&b1) < 1e-10);
                assert!(a2.max_abs_diff(&b2) < 1e-10);
            }
        }
    }

    #[test]
    fn reduced_states_need_two_qubits() {
        let s = coherent_state(1, Zeta::real(0.2));
        assert!(matches!(
            reduced_qubit_states(&s),
            Err(Error::NotSymmetricContext { n: 1 })
        ));
    }

    #[test]
    fn embedding_intertwines_generators() {
        // Σ_a σ_i^a / 2 restricted to the symmetric subspace equals J_i
        let n = 4u32;
        let rep = SpinRep::new(n);
        let e = dicke_embedding(n);
        let s = pauli();
        let id2 = CMatrix::identity(2);
        for (i, g) in rep.generators().iter().enumerate() {
            let mut total = CMatrix::zeros(16, 16);
            for q in 0..n as usize {
                let mut op = CMatrix::identity(1);
                for r in 0..n as usize {
                    op = kron(&op, if r == q { &s[i] } else { &id2 });
                }
                total = &total + &op.scale_real(0.5);
            }
            let restricted = e.adjoint().matmul(&total).matmul(&e);
            assert!(restricted.max_abs_diff(g) < 1e-13);
        }
    }
}
