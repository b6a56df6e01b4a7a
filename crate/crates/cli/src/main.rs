//! `qaccord`: measures of two-qubit states and the experiments comparing them.
//!
//! Exit codes: 0 success, 2 usage or parse error, 3 invalid state, 4 optimizer
//! did not converge, 5 audit violations, 1 anything else.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qaccord::experiments::table::Table;
use qaccord::experiments::{
    self, regenerate_plots, Experiment, ExperimentSpec, LineSpec, RunOutput, SolverChoice,
};
use qaccord::statefile::read_state;
use qaccord::{Error, GridOracle, MeasureReport, OptimizerConfig, ProjectiveBasis, RandomMeasure};

#[derive(Parser)]
#[command(
    name = "qaccord",
    version,
    about = "Entropic accord, discord and entanglement of two-qubit states"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate every measure for the state in FILE.
    Measure(MeasureArgs),
    /// Accord of pure states against the two analytic upper bounds.
    PureUpperBound(ExperimentArgs),
    /// Pure states mixed with white noise over a theta-by-noise grid.
    PureNoiseSweep(ExperimentArgs),
    /// Bell-diagonal experiments.
    Bell {
        #[command(subcommand)]
        which: BellCommand,
    },
    /// Measures of random states, with the envelope curves.
    RandomScatter(RandomArgs),
    /// Check the nesting of zero sets and local-unitary invariance.
    HierarchyAudit(AuditArgs),
    /// Redraw the SVG charts of a results directory from its CSV files.
    Plot { dir: PathBuf },
}

#[derive(Subcommand)]
enum BellCommand {
    /// Werner, edge, face and vertex-to-face lines through the tetrahedron.
    Slices(LineArgs),
    /// Raster of the plane through (0,1,0), phi+ and psi-.
    FacePlane(ExperimentArgs),
    /// Transects starting at psi-, parametrized by the distance p from it.
    Lines(LineArgs),
}

#[derive(Args, Clone)]
struct SolverArgs {
    /// Use the dense-grid reference solver instead of the optimizer.
    #[arg(long)]
    oracle: bool,
    /// Lattice size of the reference solver.
    #[arg(long, default_value_t = GridOracle::default().resolution, requires = "oracle")]
    oracle_resolution: usize,
    /// Target accuracy of the optimized measures, in bits.
    #[arg(long, default_value_t = OptimizerConfig::default().value_tolerance)]
    tol: f64,
    /// Compass rounds allowed per optimizer start.
    #[arg(long, default_value_t = OptimizerConfig::default().max_refine_iterations)]
    max_iterations: usize,
}

impl SolverArgs {
    fn choice(&self) -> SolverChoice {
        if self.oracle {
            SolverChoice::Oracle(GridOracle::new(self.oracle_resolution))
        } else {
            SolverChoice::Optimizer(OptimizerConfig {
                value_tolerance: self.tol,
                max_refine_iterations: self.max_iterations,
                ..OptimizerConfig::default()
            })
        }
    }
}

#[derive(Args)]
struct MeasureArgs {
    file: PathBuf,
    #[command(flatten)]
    solver: SolverArgs,
    /// Also write the report as measure.csv into DIR.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Print the report as JSON.
    #[arg(long)]
    json: bool,
}

#[derive(Args, Clone)]
struct ExperimentArgs {
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Points per grid axis (default depends on the experiment).
    #[arg(long)]
    grid: Option<usize>,
    #[command(flatten)]
    solver: SolverArgs,
    /// Output directory (default results/<experiment>).
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct LineArgs {
    #[command(flatten)]
    common: ExperimentArgs,
    /// Custom line NAME=c1,c2,c3:c1,c2,c3 replacing the built-in set; repeatable.
    #[arg(long = "line", value_name = "LINE")]
    lines: Vec<LineSpec>,
}

#[derive(Args)]
struct RandomArgs {
    #[command(flatten)]
    common: ExperimentArgs,
    /// Number of random states.
    #[arg(long)]
    count: Option<usize>,
    /// Random-state ensemble: haar or bures.
    #[arg(long, default_value = "haar")]
    measure: RandomMeasure,
}

#[derive(Args)]
struct AuditArgs {
    #[command(flatten)]
    common: ExperimentArgs,
    /// Haar states and Bures states sampled.
    #[arg(long)]
    count: Option<usize>,
    /// States in each targeted family.
    #[arg(long, default_value_t = 100)]
    targeted: usize,
    /// Random states checked for local-unitary invariance.
    #[arg(long, default_value_t = 20)]
    lu_states: usize,
    /// Local unitaries applied to each of those states.
    #[arg(long, default_value_t = 50)]
    lu_trials: usize,
    /// Below this a measure counts as zero.
    #[arg(long, default_value_t = 1e-6)]
    zero_tol: f64,
    /// A measure implied to vanish must stay below this.
    #[arg(long, default_value_t = 1e-5)]
    implied_tol: f64,
    /// Largest allowed change under local unitaries.
    #[arg(long, default_value_t = 1e-5)]
    lu_tol: f64,
}

/// Run outcome besides errors.
enum Outcome {
    Done,
    Violations(usize),
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Parse { .. } | Error::InvalidConfig(_) => 2,
        Error::NotAState(_)
        | Error::OutOfRange { .. }
        | Error::NotADistribution(_)
        | Error::NotPsd { .. }
        | Error::NotHermitian { .. }
        | Error::DimensionMismatch { .. }
        | Error::UnsupportedDimension(_) => 3,
        Error::OptimizerDidNotConverge { .. } => 4,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(Outcome::Done) => ExitCode::SUCCESS,
        Ok(Outcome::Violations(n)) => {
            eprintln!("error: {n} audit violation(s)");
            ExitCode::from(5)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn dispatch(command: Command) -> qaccord::Result<Outcome> {
    match command {
        Command::Measure(args) => measure(args),
        Command::PureUpperBound(a) => experiment(base_spec(Experiment::PureUpperBound, &a), &a),
        Command::PureNoiseSweep(a) => experiment(base_spec(Experiment::PureNoiseSweep, &a), &a),
        Command::Bell { which } => match which {
            BellCommand::Slices(a) => lines(Experiment::BellSlices, a),
            BellCommand::FacePlane(a) => experiment(base_spec(Experiment::BellFacePlane, &a), &a),
            BellCommand::Lines(a) => lines(Experiment::BellLines, a),
        },
        Command::RandomScatter(a) => {
            let mut spec = base_spec(Experiment::RandomScatter, &a.common);
            spec.count = a.count.unwrap_or(spec.count);
            spec.measure = a.measure;
            experiment(spec, &a.common)
        }
        Command::HierarchyAudit(a) => {
            let mut spec = base_spec(Experiment::HierarchyAudit, &a.common);
            spec.count = a.count.unwrap_or(spec.count);
            spec.targeted = a.targeted;
            spec.lu_states = a.lu_states;
            spec.lu_trials = a.lu_trials;
            spec.tolerances.zero = a.zero_tol;
            spec.tolerances.implied = a.implied_tol;
            spec.tolerances.local_unitary = a.lu_tol;
            experiment(spec, &a.common)
        }
        Command::Plot { dir } => {
            for path in regenerate_plots(&dir)? {
                println!("{}", path.display());
            }
            Ok(Outcome::Done)
        }
    }
}

fn base_spec(experiment: Experiment, a: &ExperimentArgs) -> ExperimentSpec {
    let mut spec = ExperimentSpec::new(experiment);
    spec.seed = a.seed;
    spec.grid = a.grid.unwrap_or(spec.grid);
    spec.solver = a.solver.choice();
    spec
}

fn lines(experiment: Experiment, a: LineArgs) -> qaccord::Result<Outcome> {
    let mut spec = base_spec(experiment, &a.common);
    spec.lines = a.lines;
    self::experiment(spec, &a.common)
}

fn experiment(spec: ExperimentSpec, a: &ExperimentArgs) -> qaccord::Result<Outcome> {
    let out = a
        .out
        .clone()
        .unwrap_or_else(|| Path::new("results").join(spec.experiment.name()));
    let run: RunOutput = experiments::run(&spec)?;
    run.write(&out)?;
    println!(
        "{}",
        serde_json::to_string_pretty(&run.summary).expect("summary is JSON")
    );
    println!("wrote {}", out.display());
    Ok(if run.violations > 0 {
        Outcome::Violations(run.violations)
    } else {
        Outcome::Done
    })
}

/// Drops the sign of negative zero.
fn tidy(x: f64) -> f64 {
    x + 0.0
}

fn basis(b: &ProjectiveBasis) -> String {
    let n = b.direction();
    format!(
        "theta={:.6} phi={:.6} n=({:.6}, {:.6}, {:.6})",
        b.theta, b.phi, n[0], n[1], n[2]
    )
}

fn measure(args: MeasureArgs) -> qaccord::Result<Outcome> {
    let spec = read_state(&args.file)?;
    let engine = args.solver.choice().engine()?;
    let r: MeasureReport = engine.report(&spec.state)?;
    if args.json {
        let value = serde_json::json!({ "state": spec.description, "report": r });
        println!(
            "{}",
            serde_json::to_string_pretty(&value).expect("report is JSON")
        );
    } else {
        println!("state        {}", spec.description);
        println!("concurrence  {:.10}", tidy(r.concurrence));
        println!("eof          {:.10}", tidy(r.eof));
        println!("discord      {:.10}", tidy(r.discord));
        println!("ea           {:.10}", tidy(r.ea));
        println!("qmi          {:.10}", tidy(r.quantum_mutual_information));
        println!("ea alice     {}", basis(&r.ea_alice));
        println!("ea bob       {}", basis(&r.ea_bob));
        println!("discord bob  {}", basis(&r.discord_basis));
        let d = &r.diagnostics;
        println!(
            "iterations   ea outer {} inner {}, discord {}",
            d.ea_outer_iterations, d.ea_inner_iterations, d.discord_iterations
        );
    }
    if let Some(dir) = args.out {
        std::fs::create_dir_all(&dir)?;
        let mut columns: Vec<&str> = vec!["state"];
        columns.extend(experiments::MEASURE_COLUMNS);
        columns.extend([
            "ea_alice_theta",
            "ea_alice_phi",
            "ea_bob_theta",
            "ea_bob_phi",
            "discord_theta",
            "discord_phi",
        ]);
        let mut t = Table::new(columns);
        let mut row = vec![spec.description.as_str().into()];
        row.extend(experiments::measure_cells(&r));
        for b in [r.ea_alice, r.ea_bob, r.discord_basis] {
            row.push(b.theta.into());
            row.push(b.phi.into());
        }
        t.push(row);
        t.write_csv(&dir.join("measure.csv"))?;
    }
    Ok(Outcome::Done)
}
