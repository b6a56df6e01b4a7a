//! Experiment harness: every comparison of the three measures, as CSV tables,
//! SVG charts drawn from those tables, and a manifest to rerun it.
//!
//! Rows are evaluated in parallel and always emitted in input order, so a
//! run is reproducible byte for byte from its [`ExperimentSpec`].

pub mod plot;
mod runs;
pub mod table;

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::{MeasureEngine, MeasureReport};
use crate::minimax::{GridOracle, OptimizerConfig};
use crate::states::{BellDiagonalCoords, DensityMatrix, RandomMeasure};
use plot::{render_svg, PlotSpec};
use table::{Table, Value};

pub use runs::{envelope_excess, Envelope};

/// Name of the manifest written next to the results.
pub const MANIFEST: &str = "manifest.json";
/// Name of the summary written next to the results.
pub const SUMMARY: &str = "summary.json";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    PureUpperBound,
    PureNoiseSweep,
    BellSlices,
    BellFacePlane,
    BellLines,
    RandomScatter,
    HierarchyAudit,
}

impl Experiment {
    pub const ALL: [Experiment; 7] = [
        Experiment::PureUpperBound,
        Experiment::PureNoiseSweep,
        Experiment::BellSlices,
        Experiment::BellFacePlane,
        Experiment::BellLines,
        Experiment::RandomScatter,
        Experiment::HierarchyAudit,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::PureUpperBound => "pure-upper-bound",
            Experiment::PureNoiseSweep => "pure-noise-sweep",
            Experiment::BellSlices => "bell-slices",
            Experiment::BellFacePlane => "bell-face-plane",
            Experiment::BellLines => "bell-lines",
            Experiment::RandomScatter => "random-scatter",
            Experiment::HierarchyAudit => "hierarchy-audit",
        }
    }

    /// Command-line words that select this experiment.
    pub fn command(self) -> &'static str {
        match self {
            Experiment::BellSlices => "bell slices",
            Experiment::BellFacePlane => "bell face-plane",
            Experiment::BellLines => "bell lines",
            other => other.name(),
        }
    }

    /// File stem of the main CSV table.
    pub fn stem(self) -> String {
        self.name().replace('-', "_")
    }

    pub fn default_grid(self) -> usize {
        match self {
            // Odd, so the grid over [0, pi/2] contains pi/4.
            Experiment::PureUpperBound => 51,
            Experiment::BellFacePlane => 40,
            _ => 50,
        }
    }

    pub fn default_count(self) -> usize {
        match self {
            Experiment::RandomScatter => 20_000,
            Experiment::HierarchyAudit => 500,
            _ => 0,
        }
    }
}

impl std::fmt::Display for Experiment {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Experiment {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| format!("unknown experiment '{s}'"))
    }
}

/// How discord and accord are optimized.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverChoice {
    Optimizer(OptimizerConfig),
    /// Dense-grid reference solver.
    Oracle(GridOracle),
}

impl Default for SolverChoice {
    fn default() -> Self {
        SolverChoice::Optimizer(OptimizerConfig::default())
    }
}

impl SolverChoice {
    pub fn engine(&self) -> Result<MeasureEngine> {
        match self {
            SolverChoice::Optimizer(c) => MeasureEngine::new(c.clone()),
            SolverChoice::Oracle(o) => Ok(MeasureEngine::oracle(o.clone())),
        }
    }
}

/// Straight segment through the Bell-diagonal tetrahedron.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineSpec {
    pub name: String,
    pub start: [f64; 3],
    pub end: [f64; 3],
}

impl LineSpec {
    pub fn new(name: &str, start: [f64; 3], end: [f64; 3]) -> Self {
        Self {
            name: name.to_string(),
            start,
            end,
        }
    }

    /// Point at fraction `t` from `start`.
    pub fn at(&self, t: f64) -> BellDiagonalCoords {
        BellDiagonalCoords { c: self.start }.lerp(&BellDiagonalCoords { c: self.end }, t)
    }

    pub fn length(&self) -> f64 {
        BellDiagonalCoords { c: self.start }.distance(&BellDiagonalCoords { c: self.end })
    }
}

impl std::str::FromStr for LineSpec {
    type Err = String;

    /// `NAME=c1,c2,c3:c1,c2,c3`.
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let usage = || format!("line '{s}' is not NAME=c1,c2,c3:c1,c2,c3");
        let (name, rest) = s.split_once('=').ok_or_else(usage)?;
        let (a, b) = rest.split_once(':').ok_or_else(usage)?;
        let point = |p: &str| -> std::result::Result<[f64; 3], String> {
            let v: Vec<f64> = p
                .split(',')
                .map(|x| x.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| usage())?;
            <[f64; 3]>::try_from(v).map_err(|_| usage())
        };
        if name.is_empty() || name.contains([',', '"', '\n']) {
            return Err(usage());
        }
        Ok(LineSpec::new(name, point(a)?, point(b)?))
    }
}

/// Thresholds of the zero-set audit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditTolerances {
    /// A measure below this counts as zero.
    pub zero: f64,
    /// A measure implied to vanish must stay below this.
    pub implied: f64,
    /// Largest change of any measure under local unitaries.
    pub local_unitary: f64,
}

impl Default for AuditTolerances {
    fn default() -> Self {
        Self {
            zero: 1e-6,
            implied: 1e-5,
            local_unitary: 1e-5,
        }
    }
}

/// Everything needed to run an experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub experiment: Experiment,
    pub seed: u64,
    /// Points per grid axis or per line.
    pub grid: usize,
    /// Random states per ensemble.
    pub count: usize,
    pub measure: RandomMeasure,
    pub solver: SolverChoice,
    /// Lines for `bell-slices` and `bell-lines`; empty selects the built-in set.
    #[serde(default)]
    pub lines: Vec<LineSpec>,
    /// States per targeted family in the audit.
    pub targeted: usize,
    /// Random states checked for local-unitary invariance in the audit.
    pub lu_states: usize,
    /// Local unitaries applied to each of those states.
    pub lu_trials: usize,
    pub tolerances: AuditTolerances,
}

impl ExperimentSpec {
    pub fn new(experiment: Experiment) -> Self {
        Self {
            experiment,
            seed: 1,
            grid: experiment.default_grid(),
            count: experiment.default_count(),
            measure: RandomMeasure::Haar,
            solver: SolverChoice::default(),
            lines: Vec::new(),
            targeted: 100,
            lu_states: 20,
            lu_trials: 50,
            tolerances: AuditTolerances::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.grid < 2 {
            return bad(format!("grid must be at least 2, got {}", self.grid));
        }
        let needs_count = matches!(
            self.experiment,
            Experiment::RandomScatter | Experiment::HierarchyAudit
        );
        if needs_count && self.count == 0 {
            return bad("count must be at least 1".to_string());
        }
        for line in &self.lines {
            for p in [line.start, line.end] {
                let c = BellDiagonalCoords { c: p };
                if !c.in_tetrahedron(1e-12) {
                    return bad(format!(
                        "line '{}': {p:?} lies outside the tetrahedron",
                        line.name
                    ));
                }
            }
        }
        let t = &self.tolerances;
        if !(t.zero > 0.0 && t.implied > 0.0 && t.local_unitary > 0.0) {
            return bad("audit tolerances must be positive".to_string());
        }
        match &self.solver {
            SolverChoice::Optimizer(c) => c.validate(),
            SolverChoice::Oracle(o) if o.resolution < 16 => bad(format!(
                "oracle resolution must be at least 16, got {}",
                o.resolution
            )),
            SolverChoice::Oracle(_) => Ok(()),
        }
    }

    /// Command line that reproduces this run.
    pub fn command_line(&self, out: &str) -> String {
        let d = ExperimentSpec::new(self.experiment);
        let mut parts = vec![format!("qaccord {}", self.experiment.command())];
        parts.push(format!("--seed {}", self.seed));
        parts.push(format!("--grid {}", self.grid));
        if self.count != d.count {
            parts.push(format!("--count {}", self.count));
        }
        if self.measure != d.measure {
            parts.push(format!("--measure {}", self.measure));
        }
        match &self.solver {
            SolverChoice::Optimizer(c) => {
                let d = OptimizerConfig::default();
                if c.value_tolerance != d.value_tolerance {
                    parts.push(format!("--tol {}", c.value_tolerance));
                }
                if c.max_refine_iterations != d.max_refine_iterations {
                    parts.push(format!("--max-iterations {}", c.max_refine_iterations));
                }
            }
            SolverChoice::Oracle(o) => {
                parts.push("--oracle".to_string());
                parts.push(format!("--oracle-resolution {}", o.resolution));
            }
        }
        for l in &self.lines {
            let p = |c: [f64; 3]| format!("{},{},{}", c[0], c[1], c[2]);
            parts.push(format!("--line {}={}:{}", l.name, p(l.start), p(l.end)));
        }
        if self.experiment == Experiment::HierarchyAudit {
            parts.push(format!("--targeted {}", self.targeted));
            parts.push(format!("--lu-states {}", self.lu_states));
            parts.push(format!("--lu-trials {}", self.lu_trials));
            let t = &self.tolerances;
            parts.push(format!("--zero-tol {}", t.zero));
            parts.push(format!("--implied-tol {}", t.implied));
            parts.push(format!("--lu-tol {}", t.local_unitary));
        }
        parts.push(format!("--out {out}"));
        parts.join(" ")
    }
}

/// Tables, charts and findings of one run.
#[derive(Clone, Debug)]
pub struct RunOutput {
    pub spec: ExperimentSpec,
    /// CSV file name and contents, main table first.
    pub tables: Vec<(String, Table)>,
    pub plots: Vec<PlotSpec>,
    pub summary: serde_json::Value,
    /// Audit violations; zero for experiments that only report.
    pub violations: usize,
}

#[derive(Serialize, Deserialize)]
struct Manifest {
    tool: String,
    version: String,
    experiment: Experiment,
    command: String,
    spec: ExperimentSpec,
    tables: Vec<TableEntry>,
    plots: Vec<PlotSpec>,
    summary: String,
}

#[derive(Serialize, Deserialize)]
struct TableEntry {
    file: String,
    rows: usize,
    columns: Vec<String>,
}

impl RunOutput {
    pub fn table(&self, file: &str) -> Option<&Table> {
        self.tables.iter().find(|(f, _)| f == file).map(|(_, t)| t)
    }

    pub fn main_table(&self) -> &Table {
        &self.tables[0].1
    }

    fn manifest_json(&self, out: &str) -> Result<String> {
        let manifest = Manifest {
            tool: "qaccord".to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            experiment: self.spec.experiment,
            command: self.spec.command_line(out),
            spec: self.spec.clone(),
            tables: self
                .tables
                .iter()
                .map(|(f, t)| TableEntry {
                    file: f.clone(),
                    rows: t.len(),
                    columns: t.columns().to_vec(),
                })
                .collect(),
            plots: self.plots.clone(),
            summary: SUMMARY.to_string(),
        };
        let mut s =
            serde_json::to_string_pretty(&manifest).map_err(|e| Error::Io(e.to_string()))?;
        s.push('\n');
        Ok(s)
    }

    /// Writes tables, summary, manifest and charts into `dir`, creating it if
    /// needed. Returns the written paths.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        for (file, table) in &self.tables {
            let path = dir.join(file);
            table.write_csv(&path)?;
            written.push(path);
        }
        let summary_path = dir.join(SUMMARY);
        let mut summary =
            serde_json::to_string_pretty(&self.summary).map_err(|e| Error::Io(e.to_string()))?;
        summary.push('\n');
        std::fs::write(&summary_path, summary)?;
        written.push(summary_path);

        let manifest_path = dir.join(MANIFEST);
        std::fs::write(
            &manifest_path,
            self.manifest_json(&dir.display().to_string())?,
        )?;
        written.push(manifest_path);

        written.extend(render_plots(dir, &self.plots)?);
        Ok(written)
    }
}

fn render_plots(dir: &Path, plots: &[PlotSpec]) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    for spec in plots {
        let svg = render_svg(spec, &mut |file| Table::read_csv(&dir.join(file)))?;
        let path = dir.join(&spec.svg);
        std::fs::write(&path, svg)?;
        written.push(path);
    }
    Ok(written)
}

/// Redraws every chart listed in `dir/manifest.json` from the CSV files in
/// `dir`.
pub fn regenerate_plots(dir: &Path) -> Result<Vec<PathBuf>> {
    let text = std::fs::read_to_string(dir.join(MANIFEST))?;
    let manifest: Manifest = serde_json::from_str(&text).map_err(|e| Error::Table {
        file: MANIFEST.to_string(),
        message: e.to_string(),
    })?;
    render_plots(dir, &manifest.plots)
}

/// Reads the spec recorded in `dir/manifest.json`.
pub fn read_manifest_spec(dir: &Path) -> Result<ExperimentSpec> {
    let text = std::fs::read_to_string(dir.join(MANIFEST))?;
    let manifest: Manifest = serde_json::from_str(&text).map_err(|e| Error::Table {
        file: MANIFEST.to_string(),
        message: e.to_string(),
    })?;
    Ok(manifest.spec)
}

/// Runs the experiment described by `spec`.
pub fn run(spec: &ExperimentSpec) -> Result<RunOutput> {
    spec.validate()?;
    let engine = spec.solver.engine()?;
    match spec.experiment {
        Experiment::PureUpperBound => runs::pure_upper_bound(spec, &engine),
        Experiment::PureNoiseSweep => runs::pure_noise_sweep(spec, &engine),
        Experiment::BellSlices => runs::bell_lines(spec, &engine, runs::default_slices()),
        Experiment::BellFacePlane => runs::bell_face_plane(spec, &engine),
        Experiment::BellLines => runs::bell_lines(spec, &engine, runs::default_transects()),
        Experiment::RandomScatter => runs::random_scatter(spec, &engine),
        Experiment::HierarchyAudit => runs::hierarchy_audit(spec, &engine),
    }
}

/// Column names matching [`measure_cells`].
pub const MEASURE_COLUMNS: [&str; 8] = [
    "concurrence",
    "eof",
    "discord",
    "ea",
    "qmi",
    "ea_outer_iterations",
    "ea_inner_iterations",
    "discord_iterations",
];

pub fn measure_cells(r: &MeasureReport) -> Vec<Value> {
    vec![
        r.concurrence.into(),
        r.eof.into(),
        r.discord.into(),
        r.ea.into(),
        r.quantum_mutual_information.into(),
        r.diagnostics.ea_outer_iterations.into(),
        r.diagnostics.ea_inner_iterations.into(),
        r.diagnostics.discord_iterations.into(),
    ]
}

/// Reports for `states`, in order. The first failure (by position) wins.
pub fn evaluate_states(
    engine: &MeasureEngine,
    states: &[DensityMatrix],
) -> Result<Vec<MeasureReport>> {
    let results: Vec<Result<MeasureReport>> = states.par_iter().map(|s| engine.report(s)).collect();
    results.into_iter().collect()
}

/// `n` evenly spaced points from `a` to `b` inclusive.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => (0..n)
            .map(|i| {
                if i == n - 1 {
                    b
                } else {
                    a + (b - a) * i as f64 / (n - 1) as f64
                }
            })
            .collect(),
    }
}
