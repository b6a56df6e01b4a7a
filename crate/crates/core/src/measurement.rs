//! Local projective measurements on a shared two-qubit state.
//!
//! A qubit projective measurement is fixed by the Bloch direction `n` of its
//! `+` projector, `P± = (1 ± n·sigma)/2`; antipodal directions describe the
//! same measurement with the outcome labels swapped.
//!
//! [`BlochForm`] holds the Pauli decomposition
//! `rho = 1/4 (1 + r·sigma ⊗ 1 + 1 ⊗ s·tau + sum_ij T_ij sigma_i ⊗ tau_j)`
//! and evaluates outcome statistics from it without any matrix products. The
//! optimizers call it millions of times per state; the trace-based functions
//! in this module are the reference it is tested against.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, kron, partial_trace, ComplexMatrix, Subsystem, C64};
use crate::states::DensityMatrix;

/// Eigenvalues or probabilities below this contribute nothing to an entropy.
pub const ENTROPY_FLOOR: f64 = 1e-14;
/// Outcomes less likely than this have no well-defined post-measurement state.
pub const MIN_OUTCOME_PROBABILITY: f64 = 1e-12;

pub type Direction = [f64; 3];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Outcome {
    Plus,
    Minus,
}

impl Outcome {
    pub const BOTH: [Outcome; 2] = [Outcome::Plus, Outcome::Minus];

    pub fn sign(self) -> f64 {
        match self {
            Outcome::Plus => 1.0,
            Outcome::Minus => -1.0,
        }
    }

    fn index(self) -> usize {
        match self {
            Outcome::Plus => 0,
            Outcome::Minus => 1,
        }
    }
}

/// Qubit projective measurement along the Bloch direction `(theta, phi)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProjectiveBasis {
    pub theta: f64,
    pub phi: f64,
}

impl ProjectiveBasis {
    pub fn new(theta: f64, phi: f64) -> Self {
        Self { theta, phi }
    }

    /// sigma_z eigenbasis.
    pub fn z() -> Self {
        Self::new(0.0, 0.0)
    }

    pub fn x() -> Self {
        Self::new(std::f64::consts::FRAC_PI_2, 0.0)
    }

    pub fn y() -> Self {
        Self::new(std::f64::consts::FRAC_PI_2, std::f64::consts::FRAC_PI_2)
    }

    /// From any non-zero vector; it is normalized first.
    pub fn from_direction(n: Direction) -> Self {
        let len = norm(&n);
        let z = (n[2] / len).clamp(-1.0, 1.0);
        let phi = if n[0] == 0.0 && n[1] == 0.0 {
            0.0
        } else {
            n[1].atan2(n[0])
        };
        Self::new(z.acos(), phi)
    }

    pub fn direction(&self) -> Direction {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        [st * cp, st * sp, ct]
    }

    /// Same measurement, outcome labels swapped.
    pub fn antipode(&self) -> Self {
        let [x, y, z] = self.direction();
        Self::from_direction([-x, -y, -z])
    }

    /// `(1 ± n·sigma)/2`.
    pub fn projector(&self, outcome: Outcome) -> ComplexMatrix {
        let n = self.direction();
        let sign = outcome.sign();
        let mut m = ComplexMatrix::identity(2);
        for (ni, p) in n.iter().zip(linalg::paulis()) {
            m = &m + &p.scale_real(sign * ni);
        }
        m.scale_real(0.5)
    }

    /// Basis whose `+` projector is `U P+ U^dagger`.
    pub fn rotated(&self, u: &ComplexMatrix) -> Self {
        let p = &(u * &self.projector(Outcome::Plus)) * &u.adjoint();
        let mut n = [0.0; 3];
        for (ni, s) in n.iter_mut().zip(linalg::paulis()) {
            *ni = p.trace_product(&s).re;
        }
        Self::from_direction(n)
    }
}

/// Outcome probabilities `p[a][b]`, index 0 for `+` and 1 for `-`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct JointDistribution {
    pub p: [[f64; 2]; 2],
}

impl JointDistribution {
    pub fn new(p: [[f64; 2]; 2]) -> Result<Self> {
        let flat = [p[0][0], p[0][1], p[1][0], p[1][1]];
        if flat.iter().any(|&x| x.is_nan() || x < -1e-12) {
            return Err(Error::NotADistribution(format!("negative entry in {p:?}")));
        }
        let total: f64 = flat.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::NotADistribution(format!("entries sum to {total}")));
        }
        Ok(Self {
            p: p.map(|row| row.map(|x| x.max(0.0))),
        })
    }

    pub fn get(&self, a: Outcome, b: Outcome) -> f64 {
        self.p[a.index()][b.index()]
    }

    pub fn marginal_a(&self) -> [f64; 2] {
        [self.p[0][0] + self.p[0][1], self.p[1][0] + self.p[1][1]]
    }

    pub fn marginal_b(&self) -> [f64; 2] {
        [self.p[0][0] + self.p[1][0], self.p[0][1] + self.p[1][1]]
    }

    pub fn mutual_information(&self) -> f64 {
        mutual_information(self)
    }
}

/// `p(a, b) = tr[(P_a ⊗ P_b) rho]`.
pub fn joint_distribution(
    rho: &DensityMatrix,
    basis_a: &ProjectiveBasis,
    basis_b: &ProjectiveBasis,
) -> Result<JointDistribution> {
    require_two_qubit(rho)?;
    let mut p = [[0.0; 2]; 2];
    for a in Outcome::BOTH {
        for b in Outcome::BOTH {
            let proj = kron(&basis_a.projector(a), &basis_b.projector(b))?;
            p[a.index()][b.index()] = rho.matrix().trace_product(&proj).re;
        }
    }
    JointDistribution::new(p)
}

fn require_two_qubit(rho: &DensityMatrix) -> Result<()> {
    if rho.dim() != 4 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            found: rho.dim(),
        });
    }
    Ok(())
}

#[inline]
fn plogp(p: f64) -> f64 {
    if p < ENTROPY_FLOOR {
        0.0
    } else {
        p * p.log2()
    }
}

/// Shannon entropy in bits.
pub fn shannon_entropy(p: &[f64]) -> f64 {
    -p.iter().map(|&x| plogp(x)).sum::<f64>()
}

/// `h(x) = -x log2 x - (1 - x) log2 (1 - x)`.
#[inline]
pub fn binary_entropy(x: f64) -> f64 {
    -(plogp(x) + plogp(1.0 - x))
}

/// Entropy of a qubit whose Bloch vector has length `len`.
#[inline]
pub fn qubit_entropy(len: f64) -> f64 {
    binary_entropy(0.5 * (1.0 + len.clamp(0.0, 1.0)))
}

/// Classical mutual information of a 2×2 table, in bits.
pub fn mutual_information(d: &JointDistribution) -> f64 {
    let pa = d.marginal_a();
    let pb = d.marginal_b();
    let mut acc = 0.0;
    for (i, row) in d.p.iter().enumerate() {
        for (j, &pab) in row.iter().enumerate() {
            if pab < ENTROPY_FLOOR {
                continue;
            }
            acc += pab * (pab / (pa[i] * pb[j])).log2();
        }
    }
    acc.max(0.0)
}

/// `S(rho) = -sum lambda log2 lambda`.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    shannon_entropy(&rho.eigenvalues())
}

/// Post-measurement state of the unmeasured qubit and the outcome probability.
pub fn conditional_state_of(
    rho: &DensityMatrix,
    measured: Subsystem,
    basis: &ProjectiveBasis,
    outcome: Outcome,
) -> Result<(f64, DensityMatrix)> {
    require_two_qubit(rho)?;
    let proj = basis.projector(outcome);
    let id = ComplexMatrix::identity(2);
    let op = match measured {
        Subsystem::A => kron(&proj, &id)?,
        Subsystem::B => kron(&id, &proj)?,
    };
    let post = &(&op * rho.matrix()) * &op;
    let reduced = partial_trace(&post, measured)?;
    let probability = reduced.trace().re;
    if probability <= MIN_OUTCOME_PROBABILITY {
        return Err(Error::ZeroProbabilityOutcome { probability });
    }
    let state = DensityMatrix::new(reduced.scale_real(1.0 / probability).hermitian_part())?;
    Ok((probability, state))
}

/// Bob's state after Alice measures `basis_a` and sees `outcome`.
pub fn conditional_state(
    rho: &DensityMatrix,
    basis_a: &ProjectiveBasis,
    outcome: Outcome,
) -> Result<(f64, DensityMatrix)> {
    conditional_state_of(rho, Subsystem::A, basis_a, outcome)
}

#[inline]
fn dot(a: &Direction, b: &Direction) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
fn norm(a: &Direction) -> f64 {
    dot(a, a).sqrt()
}

/// Pauli decomposition of a two-qubit state.
#[derive(Clone, Debug, PartialEq)]
pub struct BlochForm {
    /// Alice's Bloch vector `r_i = tr(rho sigma_i ⊗ 1)`.
    pub alice: Direction,
    /// Bob's Bloch vector `s_j = tr(rho 1 ⊗ tau_j)`.
    pub bob: Direction,
    /// `T_ij = tr(rho sigma_i ⊗ tau_j)`.
    pub correlations: [[f64; 3]; 3],
}

impl BlochForm {
    pub fn new(rho: &DensityMatrix) -> Result<Self> {
        require_two_qubit(rho)?;
        let paulis = linalg::paulis();
        let id = ComplexMatrix::identity(2);
        let m = rho.matrix();
        let mut alice = [0.0; 3];
        let mut bob = [0.0; 3];
        let mut correlations = [[0.0; 3]; 3];
        for i in 0..3 {
            alice[i] = m.trace_product(&kron(&paulis[i], &id)?).re;
            bob[i] = m.trace_product(&kron(&id, &paulis[i])?).re;
            for j in 0..3 {
                correlations[i][j] = m.trace_product(&kron(&paulis[i], &paulis[j])?).re;
            }
        }
        Ok(Self {
            alice,
            bob,
            correlations,
        })
    }

    /// Reassembles the 4×4 matrix from the decomposition.
    pub fn to_matrix(&self) -> ComplexMatrix {
        let paulis = linalg::paulis();
        let id = ComplexMatrix::identity(2);
        let mut m = ComplexMatrix::identity(4);
        for i in 0..3 {
            m = &m + &kron(&paulis[i], &id).unwrap().scale_real(self.alice[i]);
            m = &m + &kron(&id, &paulis[i]).unwrap().scale_real(self.bob[i]);
            for j in 0..3 {
                m = &m
                    + &kron(&paulis[i], &paulis[j])
                        .unwrap()
                        .scale_real(self.correlations[i][j]);
            }
        }
        m.scale_real(0.25)
    }

    /// `T n`, the correlation vector seen by Alice when Bob measures along `n`.
    #[inline]
    pub fn correlate_bob(&self, n: &Direction) -> Direction {
        let t = &self.correlations;
        [dot(&t[0], n), dot(&t[1], n), dot(&t[2], n)]
    }

    /// `T^T a`, the correlation vector seen by Bob when Alice measures along `a`.
    #[inline]
    pub fn correlate_alice(&self, a: &Direction) -> Direction {
        let t = &self.correlations;
        let mut out = [0.0; 3];
        for (j, o) in out.iter_mut().enumerate() {
            *o = t[0][j] * a[0] + t[1][j] * a[1] + t[2][j] * a[2];
        }
        out
    }

    /// Outcome table for unit directions `a` (Alice) and `b` (Bob).
    pub fn joint_probabilities(&self, a: &Direction, b: &Direction) -> [[f64; 2]; 2] {
        let ra = dot(&self.alice, a);
        let sb = dot(&self.bob, b);
        let tab = dot(a, &self.correlate_bob(b));
        let mut p = [[0.0; 2]; 2];
        for (i, sa) in [1.0, -1.0].into_iter().enumerate() {
            for (j, sb_sign) in [1.0, -1.0].into_iter().enumerate() {
                p[i][j] = (0.25 * (1.0 + sa * ra + sb_sign * sb + sa * sb_sign * tab)).max(0.0);
            }
        }
        p
    }

    pub fn mutual_information(&self, a: &Direction, b: &Direction) -> f64 {
        self.given_alice(a).mutual_information(b)
    }

    /// Precomputes what Bob sees once Alice's direction is fixed.
    pub fn given_alice(&self, a: &Direction) -> AliceConditioned {
        let ra = dot(&self.alice, a);
        let ta = self.correlate_alice(a);
        let mut weights = [0.0; 2];
        let mut conditional = [[0.0; 3]; 2];
        for (k, sign) in [1.0, -1.0].into_iter().enumerate() {
            let q = 0.5 * (1.0 + sign * ra);
            weights[k] = q;
            if q > MIN_OUTCOME_PROBABILITY {
                for j in 0..3 {
                    conditional[k][j] = 0.5 * (self.bob[j] + sign * ta[j]) / q;
                }
            }
        }
        AliceConditioned {
            bob: self.bob,
            weights,
            conditional,
        }
    }

    /// Bob-side classical correlation `J(rho, pi_B) = S(rho_A) - sum_b p(b) S(rho_A|b)`.
    pub fn classical_correlation_bob(&self, n: &Direction) -> f64 {
        let sn = dot(&self.bob, n);
        let tn = self.correlate_bob(n);
        let mut conditional_entropy = 0.0;
        for sign in [1.0, -1.0] {
            let p = 0.5 * (1.0 + sign * sn);
            if p <= MIN_OUTCOME_PROBABILITY {
                continue;
            }
            let v = [
                (self.alice[0] + sign * tn[0]) / (2.0 * p),
                (self.alice[1] + sign * tn[1]) / (2.0 * p),
                (self.alice[2] + sign * tn[2]) / (2.0 * p),
            ];
            conditional_entropy += p * qubit_entropy(norm(&v));
        }
        qubit_entropy(norm(&self.alice)) - conditional_entropy
    }
}

/// Alice's outcome weights and Bob's conditional Bloch vectors for a fixed
/// Alice measurement.
#[derive(Clone, Debug)]
pub struct AliceConditioned {
    bob: Direction,
    weights: [f64; 2],
    conditional: [Direction; 2],
}

impl AliceConditioned {
    /// Mutual information when Bob measures along the unit vector `b`.
    #[inline]
    pub fn mutual_information(&self, b: &Direction) -> f64 {
        let mut mi = binary_entropy(0.5 * (1.0 + dot(&self.bob, b).clamp(-1.0, 1.0)));
        for k in 0..2 {
            let q = self.weights[k];
            if q > MIN_OUTCOME_PROBABILITY {
                let x = dot(&self.conditional[k], b).clamp(-1.0, 1.0);
                mi -= q * binary_entropy(0.5 * (1.0 + x));
            }
        }
        mi.max(0.0)
    }
}

/// `tr(rho sigma_i ⊗ tau_j)` as a single complex number, for diagnostics.
pub fn pauli_expectation(rho: &DensityMatrix, i: usize, j: usize) -> Result<C64> {
    let id = ComplexMatrix::identity(2);
    let ops = [
        id.clone(),
        linalg::pauli_x(),
        linalg::pauli_y(),
        linalg::pauli_z(),
    ];
    Ok(rho.matrix().trace_product(&kron(&ops[i], &ops[j])?))
}
