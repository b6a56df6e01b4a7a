//! Density matrices and the state families used throughout the experiments.
//!
//! Bell states use the convention
//! `phi± = (|00> ± |11>)/√2` and `psi± = (|01> ± |10>)/√2`.
//! In correlation coordinates `c_j = tr(rho sigma_j ⊗ sigma_j)` they sit at the
//! tetrahedron vertices
//!
//! | state | (c1, c2, c3)  |
//! |-------|---------------|
//! | phi+  | ( 1, -1,  1)  |
//! | phi-  | (-1,  1,  1)  |
//! | psi+  | ( 1,  1, -1)  |
//! | psi-  | (-1, -1, -1)  |

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    self, hermitian_eigen, kron, partial_trace, ComplexMatrix, Subsystem, C64, ONE, ZERO,
};

/// Tolerance for the Hermitian, unit-trace and PSD checks on a state.
pub const STATE_TOL: f64 = 1e-9;

/// A validated density matrix on one qubit (dim 2) or two qubits (dim 4).
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    /// Validates `matrix` as a state: Hermitian, unit trace and PSD, each
    /// within [`STATE_TOL`].
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let deviation = matrix.hermiticity_deviation();
        if deviation > STATE_TOL {
            return Err(Error::NotAState(format!(
                "not Hermitian (deviation {deviation:.3e})"
            )));
        }
        let matrix = matrix.hermitian_part();
        let trace = matrix.trace().re;
        if (trace - 1.0).abs() > STATE_TOL {
            return Err(Error::NotAState(format!("trace is {trace}")));
        }
        let eig = hermitian_eigen(&matrix)?;
        let min = *eig.eigenvalues.last().unwrap();
        if min < -STATE_TOL {
            return Err(Error::NotAState(format!("negative eigenvalue {min:.3e}")));
        }
        Ok(Self { matrix })
    }

    /// Normalizes a PSD operator to unit trace and validates it.
    pub fn from_unnormalized(matrix: ComplexMatrix) -> Result<Self> {
        let trace = matrix.trace().re;
        if trace.is_nan() || trace <= 0.0 {
            return Err(Error::NotAState(format!("trace is {trace}")));
        }
        Self::new(matrix.scale_real(1.0 / trace))
    }

    /// `|psi><psi|` for a (not necessarily normalized) vector.
    pub fn from_pure(psi: &[C64]) -> Result<Self> {
        Self::from_unnormalized(ComplexMatrix::outer(psi)?)
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        let m = ComplexMatrix::identity(dim).scale_real(1.0 / dim as f64);
        Self { matrix: m }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::hermitian_eigenvalues(&self.matrix).expect("states are Hermitian")
    }

    pub fn purity(&self) -> f64 {
        self.matrix.trace_product(&self.matrix).re
    }

    /// Reduced state of `party`, i.e. the other qubit traced out.
    pub fn reduced(&self, party: Subsystem) -> Result<DensityMatrix> {
        let traced = match party {
            Subsystem::A => Subsystem::B,
            Subsystem::B => Subsystem::A,
        };
        let m = partial_trace(&self.matrix, traced)?;
        Ok(Self {
            matrix: m.hermitian_part(),
        })
    }

    /// `(U ⊗ V) rho (U ⊗ V)^dagger`.
    pub fn local_unitary(&self, u: &ComplexMatrix, v: &ComplexMatrix) -> Result<DensityMatrix> {
        let w = kron(u, v)?;
        let m = &(&w * &self.matrix) * &w.adjoint();
        Self::new(m.hermitian_part())
    }

    /// Mixes with the maximally mixed state: `(1 - e) rho + e 1/d`.
    pub fn with_white_noise(&self, e: f64) -> Result<DensityMatrix> {
        check_unit_interval("e", e)?;
        let d = self.dim();
        let noise = ComplexMatrix::identity(d).scale_real(e / d as f64);
        let m = &self.matrix.scale_real(1.0 - e) + &noise;
        Self::new(m)
    }
}

/// Free-function form of [`DensityMatrix::with_white_noise`].
pub fn with_white_noise(rho: &DensityMatrix, e: f64) -> Result<DensityMatrix> {
    rho.with_white_noise(e)
}

fn check_unit_interval(name: &'static str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            name,
            value,
            range: "[0, 1]",
        })
    }
}

pub fn product_state(a: &DensityMatrix, b: &DensityMatrix) -> Result<DensityMatrix> {
    DensityMatrix::new(kron(a.matrix(), b.matrix())?)
}

/// `cos(theta)|00> + sin(theta)|11>`.
///
/// Any real `theta` gives a valid state; values outside `[0, pi/2]` are
/// related to one inside by local unitaries, so every correlation measure
/// depends only on `|sin 2 theta|`.
pub fn pure_schmidt(theta: f64) -> DensityMatrix {
    let (s, c) = theta.sin_cos();
    let psi = [C64::new(c, 0.0), ZERO, ZERO, C64::new(s, 0.0)];
    DensityMatrix::from_pure(&psi).expect("unit vector")
}

/// `(1 - e)|psi-><psi-| + e 1/4`.
pub fn werner(e: f64) -> Result<DensityMatrix> {
    BellState::PsiMinus.density().with_white_noise(e)
}

/// `p|psi+><psi+| + (1 - p)|00><00|`, a rank-2 family bounding the EA–EoF plane.
pub fn rank2_boundary(p: f64) -> Result<DensityMatrix> {
    check_unit_interval("p", p)?;
    let psi_plus = BellState::PsiPlus.density().into_matrix().scale_real(p);
    let mut m = psi_plus;
    m[(0, 0)] += C64::new(1.0 - p, 0.0);
    DensityMatrix::new(m)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BellState {
    PhiPlus,
    PhiMinus,
    PsiPlus,
    PsiMinus,
}

impl BellState {
    /// In the order used by [`bell_mixture`].
    pub const ALL: [BellState; 4] = [
        BellState::PhiPlus,
        BellState::PhiMinus,
        BellState::PsiPlus,
        BellState::PsiMinus,
    ];

    pub fn vector(self) -> [C64; 4] {
        let s = C64::new(FRAC_1_SQRT_2, 0.0);
        match self {
            BellState::PhiPlus => [s, ZERO, ZERO, s],
            BellState::PhiMinus => [s, ZERO, ZERO, -s],
            BellState::PsiPlus => [ZERO, s, s, ZERO],
            BellState::PsiMinus => [ZERO, s, -s, ZERO],
        }
    }

    pub fn density(self) -> DensityMatrix {
        DensityMatrix::from_pure(&self.vector()).expect("unit vector")
    }

    /// Tetrahedron vertex of this Bell state.
    pub fn vertex(self) -> BellDiagonalCoords {
        let c = match self {
            BellState::PhiPlus => [1.0, -1.0, 1.0],
            BellState::PhiMinus => [-1.0, 1.0, 1.0],
            BellState::PsiPlus => [1.0, 1.0, -1.0],
            BellState::PsiMinus => [-1.0, -1.0, -1.0],
        };
        BellDiagonalCoords { c }
    }

    pub fn name(self) -> &'static str {
        match self {
            BellState::PhiPlus => "phi+",
            BellState::PhiMinus => "phi-",
            BellState::PsiPlus => "psi+",
            BellState::PsiMinus => "psi-",
        }
    }
}

/// Diagonal of the correlation matrix of a Bell-diagonal state.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BellDiagonalCoords {
    pub c: [f64; 3],
}

impl BellDiagonalCoords {
    pub fn new(c1: f64, c2: f64, c3: f64) -> Self {
        Self { c: [c1, c2, c3] }
    }

    /// Bell-basis weights `(p_phi+, p_phi-, p_psi+, p_psi-)`.
    pub fn weights(&self) -> [f64; 4] {
        let [c1, c2, c3] = self.c;
        [
            0.25 * (1.0 + c1 - c2 + c3),
            0.25 * (1.0 - c1 + c2 + c3),
            0.25 * (1.0 + c1 + c2 - c3),
            0.25 * (1.0 - c1 - c2 - c3),
        ]
    }

    pub fn from_weights(p: [f64; 4]) -> Self {
        let c = BellState::ALL
            .iter()
            .zip(p)
            .fold([0.0; 3], |mut acc, (b, w)| {
                for (a, v) in acc.iter_mut().zip(b.vertex().c) {
                    *a += w * v;
                }
                acc
            });
        Self { c }
    }

    /// Correlation coordinates `tr(rho sigma_j ⊗ sigma_j)` of any two-qubit state.
    pub fn of_state(rho: &DensityMatrix) -> Result<Self> {
        let mut c = [0.0; 3];
        for (cj, p) in c.iter_mut().zip(linalg::paulis()) {
            *cj = rho.matrix().trace_product(&kron(&p, &p)?).re;
        }
        Ok(Self { c })
    }

    pub fn l1_norm(&self) -> f64 {
        self.c.iter().map(|x| x.abs()).sum()
    }

    /// Inside the tetrahedron of valid Bell-diagonal states.
    pub fn in_tetrahedron(&self, tol: f64) -> bool {
        self.weights().iter().all(|&w| w >= -tol)
    }

    /// Inside the separable octahedron `|c1| + |c2| + |c3| <= 1`.
    pub fn in_octahedron(&self, tol: f64) -> bool {
        self.l1_norm() <= 1.0 + tol
    }

    pub fn distance(&self, other: &Self) -> f64 {
        self.c
            .iter()
            .zip(other.c)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    /// `(1 - t) self + t other`.
    pub fn lerp(&self, other: &Self, t: f64) -> Self {
        let mut c = [0.0; 3];
        for (k, ck) in c.iter_mut().enumerate() {
            *ck = (1.0 - t) * self.c[k] + t * other.c[k];
        }
        Self { c }
    }
}

/// `1/4 (1 + sum_j c_j sigma_j ⊗ sigma_j)`.
pub fn bell_diagonal(coords: BellDiagonalCoords) -> Result<DensityMatrix> {
    let mut m = ComplexMatrix::identity(4);
    for (cj, p) in coords.c.iter().zip(linalg::paulis()) {
        m = &m + &kron(&p, &p)?.scale_real(*cj);
    }
    DensityMatrix::new(m.scale_real(0.25))
        .map_err(|e| Error::NotAState(format!("{coords:?} is outside the tetrahedron: {e}")))
}

fn check_distribution(p: &[f64]) -> Result<()> {
    if let Some(bad) = p.iter().find(|&&x| x.is_nan() || x < 0.0) {
        return Err(Error::NotADistribution(format!("negative weight {bad}")));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::NotADistribution(format!("weights sum to {total}")));
    }
    Ok(())
}

/// `p1 phi+ + p2 phi- + p3 psi+ + p4 psi-`.
pub fn bell_mixture(p: [f64; 4]) -> Result<DensityMatrix> {
    check_distribution(&p)?;
    let mut m = ComplexMatrix::zeros(4);
    for (w, b) in p.iter().zip(BellState::ALL) {
        m = &m + &b.density().into_matrix().scale_real(*w);
    }
    DensityMatrix::new(m)
}

/// Rank-≤3 state on the tetrahedron face opposite `psi-`, from barycentric
/// weights over `(phi+, phi-, psi+)`.
pub fn face_state(weights: [f64; 3]) -> Result<DensityMatrix> {
    bell_mixture([weights[0], weights[1], weights[2], 0.0])
}

/// `|0><0| ⊗ rho_B + |0><1| ⊗ phi_B + |1><0| ⊗ phi_B^dagger + |1><1| ⊗ rho_B`,
/// normalized. Measuring Alice in the computational basis leaves Bob in
/// `rho_B` whatever the outcome, so the state carries no entropic accord.
pub fn zero_ea_state(rho_b: &DensityMatrix, phi_b: &ComplexMatrix) -> Result<DensityMatrix> {
    if rho_b.dim() != 2 || phi_b.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: rho_b.dim().max(phi_b.dim()),
        });
    }
    let block = |i: usize, j: usize| -> ComplexMatrix {
        match (i, j) {
            (0, 1) => phi_b.clone(),
            (1, 0) => phi_b.adjoint(),
            _ => rho_b.matrix().clone(),
        }
    };
    let mut m = ComplexMatrix::zeros(4);
    for i in 0..2 {
        for j in 0..2 {
            let b = block(i, j);
            for k in 0..2 {
                for l in 0..2 {
                    m[(2 * i + k, 2 * j + l)] = b[(k, l)] * 0.5;
                }
            }
        }
    }
    DensityMatrix::new(m)
}

/// `sum_mn c_mn |m,n><m,n|` in the computational basis.
pub fn classical_state(weights: [[f64; 2]; 2]) -> Result<DensityMatrix> {
    let flat = [weights[0][0], weights[0][1], weights[1][0], weights[1][1]];
    check_distribution(&flat)?;
    DensityMatrix::new(ComplexMatrix::from_diagonal(&flat)?)
}

/// Ensemble of random mixed two-qubit states.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RandomMeasure {
    /// Hilbert–Schmidt measure induced by a square Ginibre matrix.
    Haar,
    Bures,
}

impl std::str::FromStr for RandomMeasure {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "haar" | "hs" => Ok(RandomMeasure::Haar),
            "bures" => Ok(RandomMeasure::Bures),
            other => Err(format!(
                "unknown measure '{other}' (expected haar or bures)"
            )),
        }
    }
}

impl std::fmt::Display for RandomMeasure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            RandomMeasure::Haar => "haar",
            RandomMeasure::Bures => "bures",
        })
    }
}

/// Deterministic random stream: ChaCha20 seeded from a 64-bit seed, one
/// ChaCha stream per item index. Uniforms take the top 53 bits of each
/// 64-bit word and normals come from Box–Muller, so a `(seed, index)` pair
/// yields the same values on every platform.
pub struct StateRng {
    rng: ChaCha20Rng,
}

impl StateRng {
    pub fn new(seed: u64, index: u64) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        rng.set_stream(index);
        Self { rng }
    }

    /// Uniform in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// A pair of independent standard normals.
    pub fn normal_pair(&mut self) -> (f64, f64) {
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        let r = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (2.0 * PI * u2).sin_cos();
        (r * c, r * s)
    }

    pub fn complex_normal(&mut self) -> C64 {
        let (re, im) = self.normal_pair();
        C64::new(re, im)
    }

    pub fn ginibre(&mut self, dim: usize) -> ComplexMatrix {
        let entries = (0..dim * dim).map(|_| self.complex_normal()).collect();
        ComplexMatrix::new(dim, entries).expect("dim is 2 or 4")
    }

    /// Haar-random unitary from the QR decomposition of a Ginibre matrix,
    /// with the diagonal of R made positive.
    pub fn haar_unitary(&mut self, dim: usize) -> ComplexMatrix {
        let g = self.ginibre(dim);
        gram_schmidt_columns(&g)
    }

    /// Uniform point in the Bell-diagonal tetrahedron (flat Dirichlet weights).
    pub fn tetrahedron_point(&mut self) -> BellDiagonalCoords {
        let mut w = [0.0; 4];
        for x in &mut w {
            *x = -(1.0 - self.uniform()).ln();
        }
        let total: f64 = w.iter().sum();
        BellDiagonalCoords::from_weights(w.map(|x| x / total))
    }
}

/// Modified Gram–Schmidt on the columns; R's diagonal comes out positive.
fn gram_schmidt_columns(g: &ComplexMatrix) -> ComplexMatrix {
    let n = g.dim();
    let mut q = g.clone();
    for k in 0..n {
        for j in 0..k {
            let mut dot = ZERO;
            for i in 0..n {
                dot += q[(i, j)].conj() * q[(i, k)];
            }
            for i in 0..n {
                let qij = q[(i, j)];
                q[(i, k)] -= dot * qij;
            }
        }
        let norm = (0..n).map(|i| q[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        for i in 0..n {
            q[(i, k)] /= norm;
        }
    }
    q
}

/// The `index`-th state of the random corpus identified by `seed`.
pub fn random_state_at(seed: u64, measure: RandomMeasure, index: u64) -> DensityMatrix {
    let mut rng = StateRng::new(seed, index);
    let g = rng.ginibre(4);
    let m = match measure {
        RandomMeasure::Haar => &g * &g.adjoint(),
        RandomMeasure::Bures => {
            let u = rng.haar_unitary(4);
            let a = &(&ComplexMatrix::identity(4) + &u) * &g;
            &a * &a.adjoint()
        }
    };
    DensityMatrix::from_unnormalized(m.hermitian_part()).expect("Gram matrices are PSD")
}

/// `count` random states: item `i` is `random_state_at(seed, measure, i)`.
pub fn random_states(seed: u64, measure: RandomMeasure, count: usize) -> Vec<DensityMatrix> {
    (0..count as u64)
        .map(|i| random_state_at(seed, measure, i))
        .collect()
}

/// A pair of Haar-random single-qubit unitaries.
pub fn random_local_unitaries(seed: u64, index: u64) -> (ComplexMatrix, ComplexMatrix) {
    let mut rng = StateRng::new(seed, index);
    (rng.haar_unitary(2), rng.haar_unitary(2))
}

/// Computational basis product `|ab>`.
pub fn basis_state(a: usize, b: usize) -> DensityMatrix {
    let mut psi = [ZERO; 4];
    psi[2 * a + b] = ONE;
    DensityMatrix::from_pure(&psi).expect("unit vector")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{partial_transpose, pauli_x};
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, FRAC_PI_6};

    fn mixed4() -> ComplexMatrix {
        ComplexMatrix::identity(4).scale_real(0.25)
    }

    #[test]
    fn validation_rejects_bad_matrices() {
        let not_unit = ComplexMatrix::identity(4).scale_real(0.3);
        assert!(DensityMatrix::new(not_unit).is_err());
        let negative = ComplexMatrix::from_diagonal(&[1.2, -0.2, 0.0, 0.0]).unwrap();
        assert!(DensityMatrix::new(negative).is_err());
        let mut skew = mixed4();
        skew[(0, 1)] = C64::new(0.1, 0.0);
        assert!(DensityMatrix::new(skew).is_err());
    }

    #[test]
    fn pure_schmidt_examples() {
        assert!(pure_schmidt(0.0)
            .matrix()
            .approx_eq(basis_state(0, 0).matrix(), 1e-15));
        assert!(pure_schmidt(FRAC_PI_4)
            .matrix()
            .approx_eq(BellState::PhiPlus.density().matrix(), 1e-15));
        let ra = pure_schmidt(FRAC_PI_6).reduced(Subsystem::A).unwrap();
        assert!((ra.matrix()[(0, 0)].re - 0.75).abs() < 1e-15);
        assert!((ra.matrix()[(1, 1)].re - 0.25).abs() < 1e-15);
    }

    #[test]
    fn white_noise_examples() {
        let singlet = BellState::PsiMinus.density();
        assert_eq!(singlet.with_white_noise(0.0).unwrap(), singlet);
        assert!(singlet
            .with_white_noise(1.0)
            .unwrap()
            .matrix()
            .approx_eq(&mixed4(), 1e-15));
        let ev = singlet.with_white_noise(0.5).unwrap().eigenvalues();
        for (got, want) in ev.iter().zip([0.625, 0.125, 0.125, 0.125]) {
            assert!((got - want).abs() < 1e-12);
        }
        assert!(matches!(
            singlet.with_white_noise(1.5),
            Err(Error::OutOfRange { .. })
        ));
    }

    #[test]
    fn werner_examples() {
        assert!(werner(0.0)
            .unwrap()
            .matrix()
            .approx_eq(BellState::PsiMinus.density().matrix(), 1e-15));
        assert!(werner(1.0).unwrap().matrix().approx_eq(&mixed4(), 1e-15));
        let c = BellDiagonalCoords::of_state(&werner(0.3).unwrap()).unwrap();
        for cj in c.c {
            assert!((cj + 0.7).abs() < 1e-14);
        }
        assert!(werner(-0.1).is_err());
    }

    #[test]
    fn tetrahedron_vertices_are_bell_states() {
        // Evaluate the Pauli-sum form at each vertex and match projectors.
        assert!(bell_diagonal(BellDiagonalCoords::new(0.0, 0.0, 0.0))
            .unwrap()
            .matrix()
            .approx_eq(&mixed4(), 1e-15));
        let expected = [
            ([1.0, -1.0, 1.0], BellState::PhiPlus),
            ([-1.0, 1.0, 1.0], BellState::PhiMinus),
            ([1.0, 1.0, -1.0], BellState::PsiPlus),
            ([-1.0, -1.0, -1.0], BellState::PsiMinus),
        ];
        for (c, bell) in expected {
            let rho = bell_diagonal(BellDiagonalCoords { c }).unwrap();
            assert!(
                rho.matrix().approx_eq(bell.density().matrix(), 1e-15),
                "{bell:?}"
            );
            assert_eq!(bell.vertex().c, c);
        }
        assert!(matches!(
            bell_diagonal(BellDiagonalCoords::new(1.0, 1.0, 1.0)),
            Err(Error::NotAState(_))
        ));
    }

    #[test]
    fn bell_mixture_examples() {
        assert!(bell_mixture([1.0, 0.0, 0.0, 0.0])
            .unwrap()
            .matrix()
            .approx_eq(BellState::PhiPlus.density().matrix(), 1e-15));
        assert!(bell_mixture([0.25; 4])
            .unwrap()
            .matrix()
            .approx_eq(&mixed4(), 1e-15));
        let edge = bell_mixture([0.3, 0.0, 0.0, 0.7]).unwrap();
        let c = BellDiagonalCoords::of_state(&edge).unwrap();
        let want = BellState::PhiPlus
            .vertex()
            .lerp(&BellState::PsiMinus.vertex(), 0.7);
        assert!(c.distance(&want) < 1e-14);
        assert!(bell_mixture([0.5, 0.6, 0.0, -0.1]).is_err());
        assert!(bell_mixture([0.5, 0.6, 0.0, 0.0]).is_err());
    }

    #[test]
    fn zero_ea_examples() {
        let half = DensityMatrix::maximally_mixed(2);
        let zero = ComplexMatrix::zeros(2);
        assert!(zero_ea_state(&half, &zero)
            .unwrap()
            .matrix()
            .approx_eq(&mixed4(), 1e-15));

        let rho_b = DensityMatrix::new(
            ComplexMatrix::new(
                2,
                vec![
                    C64::new(0.8, 0.0),
                    C64::new(0.1, 0.1),
                    C64::new(0.1, -0.1),
                    C64::new(0.2, 0.0),
                ],
            )
            .unwrap(),
        )
        .unwrap();
        let prod = product_state(&half, &rho_b).unwrap();
        assert!(zero_ea_state(&rho_b, &zero)
            .unwrap()
            .matrix()
            .approx_eq(prod.matrix(), 1e-15));

        let phi = pauli_x().scale_real(0.25);
        let rho = zero_ea_state(&half, &phi).unwrap();
        let pt = partial_transpose(rho.matrix(), Subsystem::A).unwrap();
        assert!(hermitian_eigen(&pt).unwrap().eigenvalues[3] >= -1e-9);

        let too_big = pauli_x().scale_real(2.0);
        assert!(zero_ea_state(&half, &too_big).is_err());
    }

    #[test]
    fn classical_examples() {
        let cc = classical_state([[0.5, 0.0], [0.0, 0.5]]).unwrap();
        assert_eq!(
            cc.matrix(),
            &ComplexMatrix::from_diagonal(&[0.5, 0.0, 0.0, 0.5]).unwrap()
        );
        assert!(classical_state([[0.25; 2]; 2])
            .unwrap()
            .matrix()
            .approx_eq(&mixed4(), 0.0));
        assert!(classical_state([[0.5, 0.5], [0.5, 0.0]]).is_err());
    }

    #[test]
    fn random_corpus_is_deterministic_and_valid() {
        for measure in [RandomMeasure::Haar, RandomMeasure::Bures] {
            let a = random_states(17, measure, 10);
            let b = random_states(17, measure, 10);
            assert_eq!(a, b);
            let c = random_states(18, measure, 10);
            assert_ne!(a, c);
            for rho in &a {
                assert!(DensityMatrix::new(rho.matrix().clone()).is_ok());
            }
        }
        // Stream splitting: item i does not depend on how many items precede it.
        assert_eq!(
            random_state_at(5, RandomMeasure::Bures, 7),
            random_states(5, RandomMeasure::Bures, 8)[7]
        );
    }

    #[test]
    fn haar_unitaries_are_unitary() {
        let mut rng = StateRng::new(1, 0);
        for dim in [2, 4] {
            let u = rng.haar_unitary(dim);
            assert!((&u * &u.adjoint()).approx_eq(&ComplexMatrix::identity(dim), 1e-12));
        }
    }

    #[test]
    fn haar_mean_purity_matches_moment() {
        // Monte-Carlo oracle: brute average of tr(rho^2) over the corpus.
        let n = 10_000;
        let mean: f64 = random_states(2024, RandomMeasure::Haar, n)
            .iter()
            .map(|r| r.purity())
            .sum::<f64>()
            / n as f64;
        assert!((mean - 8.0 / 17.0).abs() < 0.01, "mean purity {mean}");
    }

    #[test]
    fn schmidt_angle_range_is_free() {
        assert!(pure_schmidt(FRAC_PI_2 + 0.3).purity() > 1.0 - 1e-12);
    }

    proptest! {
        #[test]
        fn pure_states_are_pure(theta in -3.0f64..3.0) {
            prop_assert!((pure_schmidt(theta).purity() - 1.0).abs() < 1e-12);
        }

        #[test]
        fn bell_coords_round_trip(w in prop::array::uniform4(0.0f64..1.0)) {
            let total: f64 = w.iter().sum();
            prop_assume!(total > 1e-3);
            let p = w.map(|x| x / total);
            let coords = BellDiagonalCoords::from_weights(p);
            let rho = bell_diagonal(coords).unwrap();
            let back = BellDiagonalCoords::of_state(&rho).unwrap();
            prop_assert!(back.distance(&coords) < 1e-12);
            for (a, b) in back.weights().iter().zip(p) {
                prop_assert!((a - b).abs() < 1e-12);
            }
            let mixed = bell_mixture(p).unwrap();
            prop_assert!(mixed.matrix().approx_eq(rho.matrix(), 1e-12));
        }

        #[test]
        fn random_states_satisfy_invariants(seed in any::<u64>(), idx in 0u64..1000) {
            for m in [RandomMeasure::Haar, RandomMeasure::Bures] {
                let rho = random_state_at(seed, m, idx);
                prop_assert!((rho.matrix().trace().re - 1.0).abs() < 1e-12);
                prop_assert!(rho.eigenvalues()[3] > -1e-12);
            }
        }
    }
}
