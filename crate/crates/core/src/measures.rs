//! Correlation measures for two-qubit states: concurrence and entanglement of
//! formation, quantum discord, entropic accord, quantum mutual information
//! and the PPT test.
//!
//! Discord measures on Bob's side. Entropic accord is
//! `min_{pi_A} max_{pi_B} I(A;B)` over local projective measurements, solved
//! as a nested problem: Bob's best response is computed in full for every
//! Alice measurement the outer search probes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    hermitian_eigen, kron, matrix_sqrt_psd, partial_transpose, pauli_y, psd_eigen, ComplexMatrix,
    Subsystem,
};
use crate::measurement::{binary_entropy, von_neumann_entropy, BlochForm, ProjectiveBasis};
use crate::minimax::{GridOracle, OptimizerConfig, SphereOptimizer};
use crate::states::DensityMatrix;

/// Measures in `[-MEASURE_CLAMP, 0)` are reported as zero.
pub const MEASURE_CLAMP: f64 = 1e-9;
/// PPT threshold on the smallest eigenvalue of the partial transpose.
pub const PPT_TOL: f64 = 1e-9;
/// Eigenvalues of `rho rho~` below this are rounding noise; their square
/// roots would otherwise leak ~1e-8 into the concurrence.
const SPIN_FLIP_FLOOR: f64 = 1e-14;

fn clamp_measure(name: &'static str, value: f64) -> Result<f64> {
    if value >= 0.0 {
        Ok(value)
    } else if value >= -MEASURE_CLAMP {
        Ok(0.0)
    } else {
        Err(Error::NegativeMeasure { name, value })
    }
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

/// `(sigma_y ⊗ sigma_y) rho* (sigma_y ⊗ sigma_y)`.
pub fn spin_flip(rho: &DensityMatrix) -> ComplexMatrix {
    let yy = kron(&pauli_y(), &pauli_y()).expect("2x2 factors");
    &(&yy * &rho.matrix().conj()) * &yy
}

/// Square roots of the eigenvalues of `rho rho~`, descending, via the
/// Hermitian matrix `sqrt(rho) rho~ sqrt(rho)`.
pub fn spin_flip_spectrum(rho: &DensityMatrix) -> Result<[f64; 4]> {
    require_two_qubit(rho)?;
    let sqrt_rho = matrix_sqrt_psd(rho.matrix())?;
    let m = (&(&sqrt_rho * &spin_flip(rho)) * &sqrt_rho).hermitian_part();
    let eig = psd_eigen(&m)?;
    let mut lambdas = [0.0; 4];
    for (l, &mu) in lambdas.iter_mut().zip(&eig.eigenvalues) {
        *l = if mu < SPIN_FLIP_FLOOR { 0.0 } else { mu.sqrt() };
    }
    Ok(lambdas)
}

/// `max(0, l1 - l2 - l3 - l4)`.
pub fn concurrence(rho: &DensityMatrix) -> Result<f64> {
    let l = spin_flip_spectrum(rho)?;
    Ok((l[0] - l[1] - l[2] - l[3]).clamp(0.0, 1.0))
}

/// `h((1 + sqrt(1 - C^2))/2)`.
pub fn eof_from_concurrence(c: f64) -> f64 {
    let c = c.clamp(0.0, 1.0);
    binary_entropy(0.5 * (1.0 + (1.0 - c * c).sqrt()))
}

/// Entanglement of formation in bits.
pub fn eof(rho: &DensityMatrix) -> Result<f64> {
    concurrence(rho).map(eof_from_concurrence)
}

/// Entropy of entanglement of `cos(theta)|00> + sin(theta)|11>`:
/// `h(cos^2 theta)`.
pub fn pure_state_entropy(theta: f64) -> f64 {
    binary_entropy(theta.cos().powi(2))
}

/// Mutual information when both parties of `cos(theta)|00> + sin(theta)|11>`
/// measure `sigma_x`: `[(1+x) log(1+x) + (1-x) log(1-x)] / 2` with
/// `x = sin 2 theta`. An upper bound on the entropic accord of that state.
pub fn sigma_x_information(theta: f64) -> f64 {
    let x = (2.0 * theta).sin().abs().min(1.0);
    let t = |y: f64| if y > 0.0 { y * y.log2() } else { 0.0 };
    0.5 * (t(1.0 + x) + t(1.0 - x))
}

/// `S(rho_A) + S(rho_B) - S(rho)`.
pub fn quantum_mutual_information(rho: &DensityMatrix) -> Result<f64> {
    require_two_qubit(rho)?;
    let sa = von_neumann_entropy(&rho.reduced(Subsystem::A)?);
    let sb = von_neumann_entropy(&rho.reduced(Subsystem::B)?);
    clamp_measure(
        "quantum mutual information",
        sa + sb - von_neumann_entropy(rho),
    )
}

/// Smallest eigenvalue of the partial transpose on Alice.
pub fn partial_transpose_min_eigenvalue(rho: &DensityMatrix) -> Result<f64> {
    require_two_qubit(rho)?;
    let pt = partial_transpose(rho.matrix(), Subsystem::A)?;
    Ok(*hermitian_eigen(&pt)?.eigenvalues.last().unwrap())
}

/// Positive partial transpose; for two qubits this is separability.
pub fn is_ppt(rho: &DensityMatrix) -> Result<bool> {
    Ok(partial_transpose_min_eigenvalue(rho)? >= -PPT_TOL)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscordResult {
    pub value: f64,
    /// Bob's measurement attaining the largest classical correlation.
    pub basis: ProjectiveBasis,
    pub classical_correlation: f64,
    pub iterations: usize,
    pub final_step: f64,
    pub evaluations: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AccordResult {
    pub value: f64,
    pub alice: ProjectiveBasis,
    pub bob: ProjectiveBasis,
    pub outer_iterations: usize,
    pub outer_final_step: f64,
    pub inner_iterations: usize,
    pub inner_final_step: f64,
    pub evaluations: usize,
}

/// How the sphere optimizations are solved.
#[derive(Clone, Debug)]
pub enum Solver {
    Optimizer(SphereOptimizer),
    Oracle(GridOracle),
}

/// Optimizer counters gathered while computing a [`MeasureReport`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub ea_outer_iterations: usize,
    pub ea_inner_iterations: usize,
    pub ea_final_step: f64,
    pub ea_evaluations: usize,
    pub discord_iterations: usize,
    pub discord_final_step: f64,
    pub discord_evaluations: usize,
}

/// All measures of one state.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasureReport {
    pub concurrence: f64,
    pub eof: f64,
    pub discord: f64,
    pub ea: f64,
    pub quantum_mutual_information: f64,
    pub ea_alice: ProjectiveBasis,
    pub ea_bob: ProjectiveBasis,
    pub discord_basis: ProjectiveBasis,
    pub diagnostics: Diagnostics,
}

/// Evaluates discord and entropic accord with a fixed solver.
#[derive(Clone, Debug)]
pub struct MeasureEngine {
    solver: Solver,
}

impl Default for MeasureEngine {
    fn default() -> Self {
        Self {
            solver: Solver::Optimizer(SphereOptimizer::default().antipodal()),
        }
    }
}

impl MeasureEngine {
    pub fn new(config: OptimizerConfig) -> Result<Self> {
        Ok(Self {
            solver: Solver::Optimizer(SphereOptimizer::new(config)?.antipodal()),
        })
    }

    pub fn oracle(oracle: GridOracle) -> Self {
        Self {
            solver: Solver::Oracle(oracle),
        }
    }

    pub fn solver(&self) -> &Solver {
        &self.solver
    }

    pub fn discord(&self, rho: &DensityMatrix) -> Result<DiscordResult> {
        let qmi = quantum_mutual_information(rho)?;
        let form = BlochForm::new(rho)?;
        let j = |n: &[f64; 3]| form.classical_correlation_bob(n);
        let (best, direction, iterations, final_step, evaluations) = match &self.solver {
            Solver::Optimizer(opt) => {
                let r = opt.maximize(j)?;
                (
                    r.value,
                    r.direction,
                    r.iterations,
                    r.final_step,
                    r.evaluations,
                )
            }
            Solver::Oracle(oracle) => {
                let (v, d) = oracle.maximize(j);
                (v, d, 0, 0.0, 0)
            }
        };
        Ok(DiscordResult {
            value: clamp_measure("discord", qmi - best)?,
            basis: ProjectiveBasis::from_direction(direction),
            classical_correlation: best,
            iterations,
            final_step,
            evaluations,
        })
    }

    pub fn entropic_accord(&self, rho: &DensityMatrix) -> Result<AccordResult> {
        let form = BlochForm::new(rho)?;
        match &self.solver {
            Solver::Optimizer(opt) => {
                let r = opt.minimax_with(|a| {
                    let given = form.given_alice(a);
                    move |b: &[f64; 3]| given.mutual_information(b)
                })?;
                Ok(AccordResult {
                    value: clamp_measure("entropic accord", r.value)?,
                    alice: ProjectiveBasis::from_direction(r.alice),
                    bob: ProjectiveBasis::from_direction(r.bob),
                    outer_iterations: r.outer_iterations,
                    outer_final_step: r.outer_final_step,
                    inner_iterations: r.inner_iterations,
                    inner_final_step: r.inner_final_step,
                    evaluations: r.evaluations,
                })
            }
            Solver::Oracle(oracle) => {
                let (v, a, b) = oracle.minimax(|a, b| form.mutual_information(a, b));
                Ok(AccordResult {
                    value: clamp_measure("entropic accord", v)?,
                    alice: ProjectiveBasis::from_direction(a),
                    bob: ProjectiveBasis::from_direction(b),
                    outer_iterations: 0,
                    outer_final_step: 0.0,
                    inner_iterations: 0,
                    inner_final_step: 0.0,
                    evaluations: 0,
                })
            }
        }
    }

    pub fn report(&self, rho: &DensityMatrix) -> Result<MeasureReport> {
        let concurrence = concurrence(rho)?;
        let discord = self.discord(rho)?;
        let ea = self.entropic_accord(rho)?;
        Ok(MeasureReport {
            concurrence,
            eof: eof_from_concurrence(concurrence),
            discord: discord.value,
            ea: ea.value,
            quantum_mutual_information: quantum_mutual_information(rho)?,
            ea_alice: ea.alice,
            ea_bob: ea.bob,
            discord_basis: discord.basis,
            diagnostics: Diagnostics {
                ea_outer_iterations: ea.outer_iterations,
                ea_inner_iterations: ea.inner_iterations,
                ea_final_step: ea.outer_final_step,
                ea_evaluations: ea.evaluations,
                discord_iterations: discord.iterations,
                discord_final_step: discord.final_step,
                discord_evaluations: discord.evaluations,
            },
        })
    }
}

/// Discord with the default optimizer.
pub fn discord(rho: &DensityMatrix) -> Result<DiscordResult> {
    MeasureEngine::default().discord(rho)
}

/// Entropic accord with the default optimizer.
pub fn entropic_accord(rho: &DensityMatrix) -> Result<AccordResult> {
    MeasureEngine::default().entropic_accord(rho)
}

/// Every measure with the default optimizer.
pub fn measure_report(rho: &DensityMatrix) -> Result<MeasureReport> {
    MeasureEngine::default().report(rho)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measurement::{joint_distribution, mutual_information};
    use crate::states::*;
    use std::f64::consts::FRAC_PI_4;

    fn pure_entropy(theta: f64) -> f64 {
        let (s2, c2) = (theta.sin().powi(2), theta.cos().powi(2));
        let t = |x: f64| if x > 0.0 { -x * x.log2() } else { 0.0 };
        t(s2) + t(c2)
    }

    #[test]
    fn pure_state_curves_match_measurement_tables() {
        for k in 0..=40 {
            let theta = k as f64 * std::f64::consts::FRAC_PI_2 / 40.0;
            let rho = pure_schmidt(theta);
            assert!((pure_state_entropy(theta) - pure_entropy(theta)).abs() < 1e-12);
            let x = ProjectiveBasis::x();
            let table = joint_distribution(&rho, &x, &x).unwrap();
            let direct = mutual_information(&table);
            assert!(
                (sigma_x_information(theta) - direct).abs() < 1e-10,
                "theta {theta}"
            );
        }
        assert!((sigma_x_information(FRAC_PI_4) - 1.0).abs() < 1e-15);
        assert_eq!(sigma_x_information(0.0), 0.0);
    }

    #[test]
    fn concurrence_examples() {
        assert!((concurrence(&BellState::PsiMinus.density()).unwrap() - 1.0).abs() < 1e-12);
        let a = random_state_at(1, RandomMeasure::Haar, 0)
            .reduced(Subsystem::A)
            .unwrap();
        let b = random_state_at(1, RandomMeasure::Haar, 1)
            .reduced(Subsystem::B)
            .unwrap();
        assert!(concurrence(&product_state(&a, &b).unwrap()).unwrap() < 1e-9);
        for e in [0.0, 0.2, 0.5, 0.8] {
            let c = concurrence(&werner(e).unwrap()).unwrap();
            assert!((c - (1.0 - 1.5 * e).max(0.0)).abs() < 1e-9, "e = {e}: {c}");
        }
    }

    #[test]
    fn eof_examples() {
        assert_eq!(eof_from_concurrence(0.0), 0.0);
        assert!((eof_from_concurrence(1.0) - 1.0).abs() < 1e-15);
        for theta in [0.05, 0.3, 0.6, FRAC_PI_4] {
            let e = eof(&pure_schmidt(theta)).unwrap();
            assert!((e - pure_entropy(theta)).abs() < 1e-9, "theta {theta}");
            let via_c = eof_from_concurrence((2.0 * theta).sin());
            assert!((via_c - pure_entropy(theta)).abs() < 1e-12);
        }
    }

    #[test]
    fn qmi_examples() {
        assert!(quantum_mutual_information(&basis_state(0, 1)).unwrap() < 1e-12);
        assert!(
            (quantum_mutual_information(&BellState::PhiPlus.density()).unwrap() - 2.0).abs()
                < 1e-12
        );
        assert_eq!(
            quantum_mutual_information(&DensityMatrix::maximally_mixed(4)).unwrap(),
            0.0
        );
    }

    #[test]
    fn ppt_examples() {
        assert!(is_ppt(&basis_state(1, 0)).unwrap());
        assert!(!is_ppt(&BellState::PhiMinus.density()).unwrap());
        assert!(
            (partial_transpose_min_eigenvalue(&BellState::PsiMinus.density()).unwrap() + 0.5).abs()
                < 1e-12
        );
        assert!(is_ppt(&bell_diagonal(BellDiagonalCoords::new(0.4, -0.3, 0.3)).unwrap()).unwrap());
        assert!(!is_ppt(&bell_diagonal(BellDiagonalCoords::new(0.4, -0.4, 0.3)).unwrap()).unwrap());
    }

    #[test]
    fn classical_states_have_no_quantum_correlations() {
        for w in [
            [[0.5, 0.0], [0.0, 0.5]],
            [[0.1, 0.2], [0.3, 0.4]],
            [[0.7, 0.0], [0.1, 0.2]],
        ] {
            let rho = classical_state(w).unwrap();
            assert!(discord(&rho).unwrap().value < 1e-6);
            assert!(entropic_accord(&rho).unwrap().value < 1e-6);
        }
    }

    #[test]
    fn pure_state_discord_equals_entanglement() {
        for theta in [0.1, 0.35, 0.6, FRAC_PI_4] {
            let rho = pure_schmidt(theta);
            let d = discord(&rho).unwrap().value;
            assert!((d - eof(&rho).unwrap()).abs() < 1e-6, "theta {theta}: {d}");
        }
    }

    #[test]
    fn werner_discord_matches_grid_oracle() {
        let rho = werner(0.5).unwrap();
        let fast = discord(&rho).unwrap().value;
        let oracle = MeasureEngine::oracle(GridOracle::new(2000))
            .discord(&rho)
            .unwrap()
            .value;
        assert!((fast - oracle).abs() < 1e-5, "{fast} vs {oracle}");
    }

    #[test]
    fn singlet_accord_is_one_bit() {
        let rho = BellState::PsiMinus.density();
        let ea = entropic_accord(&rho).unwrap();
        assert!((ea.value - 1.0).abs() < 1e-9);
        let oracle = MeasureEngine::oracle(GridOracle::new(100))
            .entropic_accord(&rho)
            .unwrap();
        assert!((oracle.value - 1.0).abs() < 1e-9);
    }

    #[test]
    fn bell_diagonal_accord_closed_form() {
        // For Bell-diagonal states Bob's best reply to Alice's direction a is
        // along C a, giving 1 - h((1 + |C a|)/2); Alice minimizes |C a|.
        for c in [[0.3, -0.5, 0.2], [-0.9, -0.8, -0.7], [0.1, 0.6, -0.25]] {
            let rho = bell_diagonal(BellDiagonalCoords { c }).unwrap();
            let cmin = c
                .iter()
                .map(|x: &f64| x.abs())
                .fold(f64::INFINITY, f64::min);
            let want = 1.0 - binary_entropy(0.5 * (1.0 + cmin));
            let got = entropic_accord(&rho).unwrap().value;
            assert!((got - want).abs() < 1e-6, "{c:?}: {got} vs {want}");
        }
    }

    #[test]
    fn zero_ea_state_has_zero_accord_but_discord() {
        // rho_B must not commute with phi_B, or the state is classical.
        let rho_b = DensityMatrix::new(
            crate::linalg::ComplexMatrix::from_real(2, &[0.7, 0.0, 0.0, 0.3]).unwrap(),
        )
        .unwrap();
        let rho = zero_ea_state(&rho_b, &crate::linalg::pauli_x().scale_real(0.2)).unwrap();
        assert!(entropic_accord(&rho).unwrap().value < 1e-6);
        assert!(discord(&rho).unwrap().value > 1e-3);
    }

    #[test]
    fn saddle_bases_reproduce_value() {
        let rho = random_state_at(8, RandomMeasure::Bures, 3);
        let ea = entropic_accord(&rho).unwrap();
        let d = joint_distribution(&rho, &ea.alice, &ea.bob).unwrap();
        assert!((mutual_information(&d) - ea.value).abs() < 1e-7);
        let flipped = joint_distribution(&rho, &ea.alice.antipode(), &ea.bob).unwrap();
        assert!((mutual_information(&flipped) - ea.value).abs() < 1e-9);
    }

    #[test]
    fn clamping_rules() {
        assert_eq!(clamp_measure("x", -5e-10).unwrap(), 0.0);
        assert_eq!(clamp_measure("x", 0.3).unwrap(), 0.3);
        assert!(matches!(
            clamp_measure("x", -1e-6),
            Err(Error::NegativeMeasure { .. })
        ));
    }
}
