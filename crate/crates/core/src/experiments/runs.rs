//! The individual experiments.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use rayon::prelude::*;
use serde_json::json;

use super::plot::{Layer, LayerKind, PlotSpec};
use super::table::{format_significant, Table, Value};
use super::{
    evaluate_states, linspace, measure_cells, ExperimentSpec, LineSpec, RunOutput, MEASURE_COLUMNS,
};
use crate::error::Result;
use crate::linalg::{matrix_sqrt_psd, ComplexMatrix};
use crate::measurement::binary_entropy;
use crate::measures::{
    eof_from_concurrence, is_ppt, pure_state_entropy, sigma_x_information, MeasureEngine,
    MeasureReport,
};
use crate::states::{
    bell_diagonal, bell_mixture, classical_state, pure_schmidt, random_local_unitaries,
    random_state_at, rank2_boundary, werner, with_white_noise, zero_ea_state, BellDiagonalCoords,
    BellState, DensityMatrix, RandomMeasure, StateRng,
};

/// Allowed excess of a random state over the EA–discord envelope.
pub const ENVELOPE_TOLERANCE: f64 = 2e-4;

/// Allowed excess of the numeric EA over an analytic upper bound.
const BOUND_TOLERANCE: f64 = 1e-5;

/// Values at or below this count as zero in reported statistics.
const ZERO: f64 = 1e-6;

fn columns(prefix: &[&str]) -> Vec<String> {
    prefix
        .iter()
        .chain(MEASURE_COLUMNS.iter())
        .map(|s| s.to_string())
        .collect()
}

fn row(prefix: Vec<Value>, r: &MeasureReport) -> Vec<Value> {
    let mut cells = prefix;
    cells.extend(measure_cells(r));
    cells
}

fn plot(svg: &str, title: &str, x: &str, y: &str, layers: Vec<Layer>) -> PlotSpec {
    PlotSpec {
        svg: svg.to_string(),
        title: title.to_string(),
        x_label: x.to_string(),
        y_label: y.to_string(),
        layers,
    }
}

fn max_of(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(f64::NEG_INFINITY, f64::max)
}

fn file_safe(name: &str) -> String {
    name.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

pub(super) fn pure_upper_bound(spec: &ExperimentSpec, engine: &MeasureEngine) -> Result<RunOutput> {
    let thetas = linspace(0.0, FRAC_PI_2, spec.grid);
    let states: Vec<_> = thetas.iter().map(|&t| pure_schmidt(t)).collect();
    let reports = evaluate_states(engine, &states)?;

    let csv = format!("{}.csv", spec.experiment.stem());
    let mut table = Table::new(columns(&["theta", "eq9_value", "eq11_value", "ea_numeric"]));
    let (mut over_sigma_x, mut over_eof) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for (&theta, r) in thetas.iter().zip(&reports) {
        let entropy = pure_state_entropy(theta);
        let sigma_x = sigma_x_information(theta);
        over_sigma_x = over_sigma_x.max(r.ea - sigma_x);
        over_eof = over_eof.max(r.ea - r.eof);
        table.push(row(
            vec![theta.into(), entropy.into(), sigma_x.into(), r.ea.into()],
            r,
        ));
    }
    let bound_violations = reports
        .iter()
        .zip(&thetas)
        .filter(|(r, &t)| {
            r.ea > sigma_x_information(t) + BOUND_TOLERANCE || r.ea > r.eof + BOUND_TOLERANCE
        })
        .count();

    let plots = vec![plot(
        "pure_upper_bound.svg",
        "Pure states: mutual information against Schmidt angle",
        "theta",
        "bits",
        vec![
            Layer::new(
                &csv,
                LayerKind::Line,
                "theta",
                "eq9_value",
                "entropy of entanglement",
            ),
            Layer::new(
                &csv,
                LayerKind::Line,
                "theta",
                "eq11_value",
                "sigma_x strategy",
            ),
            Layer::new(
                &csv,
                LayerKind::Scatter,
                "theta",
                "ea_numeric",
                "entropic accord",
            ),
        ],
    )];
    let summary = json!({
        "rows": table.len(),
        "max_ea_minus_sigma_x_information": over_sigma_x,
        "max_ea_minus_eof": over_eof,
        "bound_tolerance": BOUND_TOLERANCE,
        "bound_violations": bound_violations,
    });
    Ok(RunOutput {
        spec: spec.clone(),
        tables: vec![(csv, table)],
        plots,
        summary,
        violations: 0,
    })
}

/// Accord of the Werner state with entanglement of formation `eof`; for
/// `eof = 0` the largest accord among separable Werner states.
fn werner_ea_at_eof(eof: f64) -> f64 {
    // Invert EoF(C) by bisection; EoF is increasing in C.
    let (mut lo, mut hi) = (0.0, 1.0);
    if eof > 0.0 {
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if eof_from_concurrence(mid) < eof {
                lo = mid;
            } else {
                hi = mid;
            }
        }
    }
    let c = 0.5 * (lo + hi);
    // concurrence = 1 - 3e/2 on the entangled side.
    let e = 2.0 * (1.0 - c) / 3.0;
    1.0 - binary_entropy((2.0 - e) / 2.0)
}

pub(super) fn pure_noise_sweep(spec: &ExperimentSpec, engine: &MeasureEngine) -> Result<RunOutput> {
    let thetas = linspace(0.0, FRAC_PI_4, spec.grid);
    let noises = linspace(0.0, 1.0, spec.grid);
    let mut params = Vec::with_capacity(thetas.len() * noises.len());
    for &theta in &thetas {
        for &e in &noises {
            params.push((theta, e));
        }
    }
    let states = params
        .iter()
        .map(|&(t, e)| with_white_noise(&pure_schmidt(t), e))
        .collect::<Result<Vec<_>>>()?;
    let reports = evaluate_states(engine, &states)?;

    let csv = format!("{}.csv", spec.experiment.stem());
    let mut table = Table::new(columns(&["theta", "e"]));
    for (&(theta, e), r) in params.iter().zip(&reports) {
        table.push(row(vec![theta.into(), e.into()], r));
    }

    // Werner rows: theta = pi/4.
    let werner: Vec<&MeasureReport> = params
        .iter()
        .zip(&reports)
        .filter(|((t, _), _)| *t == FRAC_PI_4)
        .map(|(_, r)| r)
        .collect();
    let mut werner_excess = f64::NEG_INFINITY;
    for (&(t, _), r) in params.iter().zip(&reports) {
        if t != FRAC_PI_4 {
            werner_excess = werner_excess.max(r.ea - werner_ea_at_eof(r.eof));
        }
    }
    let separable_with_accord = werner
        .iter()
        .filter(|r| r.eof <= ZERO && r.ea > ZERO)
        .count();

    let werner_theta = format_significant(FRAC_PI_4);
    let layers = |x: &str, y: &str| {
        vec![
            Layer::new(&csv, LayerKind::Scatter, x, y, "pure states with noise"),
            Layer::new(&csv, LayerKind::Line, x, y, "Werner (theta = pi/4)")
                .filtered("theta", &werner_theta),
        ]
    };
    let plots = vec![
        plot(
            "pure_noise_ea_eof.svg",
            "Entropic accord against entanglement of formation",
            "eof",
            "ea",
            layers("eof", "ea"),
        ),
        plot(
            "pure_noise_ea_discord.svg",
            "Entropic accord against discord",
            "discord",
            "ea",
            layers("discord", "ea"),
        ),
        plot(
            "pure_noise_discord_eof.svg",
            "Discord against entanglement of formation",
            "eof",
            "discord",
            layers("eof", "discord"),
        ),
    ];
    let summary = json!({
        "rows": table.len(),
        "werner_rows_with_zero_eof_and_positive_ea": separable_with_accord,
        "max_ea_above_werner_at_equal_eof": werner_excess,
        "max_ea_at_unit_noise": max_of(params.iter().zip(&reports).filter(|((_, e), _)| *e == 1.0).map(|(_, r)| r.ea)),
    });
    Ok(RunOutput {
        spec: spec.clone(),
        tables: vec![(csv, table)],
        plots,
        summary,
        violations: 0,
    })
}

/// Lines preconfigured for `bell slices`.
pub(super) fn default_slices() -> Vec<LineSpec> {
    let v = |b: BellState| b.vertex().c;
    let psi_minus = v(BellState::PsiMinus);
    let phi_plus = v(BellState::PhiPlus);
    vec![
        LineSpec::new("werner", psi_minus, [0.0, 0.0, 0.0]),
        LineSpec::new("edge", psi_minus, phi_plus),
        LineSpec::new("face-median", phi_plus, [0.0, 1.0, 0.0]),
        LineSpec::new("face-midline", [0.0, 0.0, 1.0], [1.0, 0.0, 0.0]),
        LineSpec::new(
            "rank4-centroid",
            psi_minus,
            [1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0],
        ),
        LineSpec::new("rank4-edge-mid", psi_minus, [0.0, 0.0, 1.0]),
    ]
}

/// Transects from `psi-` to points along the face segment from the
/// `phi-`/`psi+` edge midpoint to `phi+`.
pub(super) fn default_transects() -> Vec<LineSpec> {
    let a = [0.0, 1.0, 0.0];
    let phi_plus = BellState::PhiPlus.vertex().c;
    let psi_minus = BellState::PsiMinus.vertex().c;
    [0.0, 0.25, 0.5, 0.75, 1.0]
        .into_iter()
        .map(|s| {
            let end = [0, 1, 2].map(|k| a[k] + s * (phi_plus[k] - a[k]));
            LineSpec::new(&format!("s{s}"), psi_minus, end)
        })
        .collect()
}

pub(super) fn bell_lines(
    spec: &ExperimentSpec,
    engine: &MeasureEngine,
    defaults: Vec<LineSpec>,
) -> Result<RunOutput> {
    let lines = if spec.lines.is_empty() {
        defaults
    } else {
        spec.lines.clone()
    };
    let ts = linspace(0.0, 1.0, spec.grid);
    let mut params = Vec::new();
    for line in &lines {
        for &t in &ts {
            params.push((line, t, line.at(t)));
        }
    }
    let states = params
        .iter()
        .map(|(_, _, c)| bell_diagonal(*c))
        .collect::<Result<Vec<_>>>()?;
    let reports = evaluate_states(engine, &states)?;

    let stem = spec.experiment.stem();
    let csv = format!("{stem}.csv");
    let mut table = Table::new(columns(&[
        "line",
        "t",
        "p",
        "c1",
        "c2",
        "c3",
        "in_octahedron",
    ]));
    let mut separable_with_entanglement = 0;
    for ((line, t, c), r) in params.iter().zip(&reports) {
        let inside = c.in_octahedron(1e-12);
        if inside && r.eof > ZERO {
            separable_with_entanglement += 1;
        }
        let p = t * line.length();
        table.push(row(
            vec![
                line.name.as_str().into(),
                (*t).into(),
                p.into(),
                c.c[0].into(),
                c.c[1].into(),
                c.c[2].into(),
                inside.into(),
            ],
            r,
        ));
    }

    let mut line_summaries = Vec::new();
    let mut plots = Vec::new();
    for line in &lines {
        let rows: Vec<(f64, &MeasureReport)> = params
            .iter()
            .zip(&reports)
            .filter(|((l, _, _), _)| l.name == line.name)
            .map(|((_, t, _), r)| (t * line.length(), r))
            .collect();
        // First distance along the line past which a measure stays at zero,
        // if it does.
        let vanishes_from = |get: fn(&MeasureReport) -> f64| -> Option<f64> {
            let mut from = None;
            for &(p, r) in rows.iter().rev() {
                if get(r) > ZERO {
                    break;
                }
                from = Some(p);
            }
            from
        };
        line_summaries.push(json!({
            "name": line.name,
            "start": line.start,
            "end": line.end,
            "length": line.length(),
            "eof_zero_from_p": vanishes_from(|r| r.eof),
            "discord_zero_from_p": vanishes_from(|r| r.discord),
            "ea_zero_from_p": vanishes_from(|r| r.ea),
            "max_ea": max_of(rows.iter().map(|(_, r)| r.ea)),
        }));
        let layer = |y: &str, label: &str| {
            Layer::new(&csv, LayerKind::Line, "p", y, label).filtered("line", &line.name)
        };
        plots.push(plot(
            &format!("{stem}_{}.svg", file_safe(&line.name)),
            &format!("Measures along line {}", line.name),
            "p (distance from line start)",
            "bits",
            vec![
                layer("eof", "eof"),
                layer("discord", "discord"),
                layer("ea", "entropic accord"),
            ],
        ));
    }
    for (measure, label) in [
        ("ea", "entropic accord"),
        ("discord", "discord"),
        ("eof", "eof"),
    ] {
        plots.push(plot(
            &format!("{stem}_{measure}.svg"),
            &format!("{label} along every line"),
            "p (distance from line start)",
            measure,
            vec![Layer::new(&csv, LayerKind::Line, "p", measure, label).grouped("line")],
        ));
    }
    let summary = json!({
        "rows": table.len(),
        "octahedron_points_with_positive_eof": separable_with_entanglement,
        "lines": line_summaries,
    });
    Ok(RunOutput {
        spec: spec.clone(),
        tables: vec![(csv, table)],
        plots,
        summary,
        violations: 0,
    })
}

pub(super) fn bell_face_plane(spec: &ExperimentSpec, engine: &MeasureEngine) -> Result<RunOutput> {
    // Triangle with corners A = (0,1,0), phi+ and psi-.
    let a = [0.0, 1.0, 0.0];
    let b = BellState::PhiPlus.vertex().c;
    let c = BellState::PsiMinus.vertex().c;
    let n = spec.grid;
    let mut params = Vec::new();
    for j in 0..n {
        for i in 0..n - j {
            let v = i as f64 / (n - 1) as f64;
            let w = j as f64 / (n - 1) as f64;
            let u = (1.0 - v - w).max(0.0);
            let coords = BellDiagonalCoords {
                c: [0, 1, 2].map(|k| u * a[k] + v * b[k] + w * c[k]),
            };
            params.push(([u, v, w], coords));
        }
    }
    let states = params
        .iter()
        .map(|(_, c)| bell_diagonal(*c))
        .collect::<Result<Vec<_>>>()?;
    let reports = evaluate_states(engine, &states)?;

    let csv = format!("{}.csv", spec.experiment.stem());
    let mut table = Table::new(columns(&[
        "u",
        "v",
        "w",
        "x",
        "y",
        "c1",
        "c2",
        "c3",
        "in_octahedron",
    ]));
    let height = 3f64.sqrt() / 2.0;
    for (([u, v, w], coords), r) in params.iter().zip(&reports) {
        table.push(row(
            vec![
                (*u).into(),
                (*v).into(),
                (*w).into(),
                (v + 0.5 * w).into(),
                (height * w).into(),
                coords.c[0].into(),
                coords.c[1].into(),
                coords.c[2].into(),
                coords.in_octahedron(1e-12).into(),
            ],
            r,
        ));
    }
    let plots = [
        ("ea", "Entropic accord"),
        ("discord", "Discord"),
        ("eof", "Entanglement of formation"),
    ]
    .into_iter()
    .map(|(m, title)| {
        plot(
            &format!("bell_face_plane_{m}.svg"),
            &format!("{title} on the plane through (0,1,0), phi+ and psi-"),
            "x (toward phi+)",
            "y (toward psi-)",
            vec![Layer::new(&csv, LayerKind::Heatmap, "x", "y", m).colored_by(m)],
        )
    })
    .collect();
    let summary = json!({
        "rows": table.len(),
        "max_ea": max_of(reports.iter().map(|r| r.ea)),
        "max_discord": max_of(reports.iter().map(|r| r.discord)),
        "max_eof": max_of(reports.iter().map(|r| r.eof)),
    });
    Ok(RunOutput {
        spec: spec.clone(),
        tables: vec![(csv, table)],
        plots,
        summary,
        violations: 0,
    })
}

/// Upper boundary of a set of `(x, y)` curves.
#[derive(Clone, Debug, Default)]
pub struct Envelope {
    curves: Vec<Vec<(f64, f64)>>,
}

impl Envelope {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_curve(&mut self, mut points: Vec<(f64, f64)>) {
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        self.curves.push(points);
    }

    /// Largest interpolated curve value at `x` among curves whose range
    /// contains `x`; outside every range, the nearest endpoint value.
    pub fn at(&self, x: f64) -> f64 {
        let inside = max_of(self.curves.iter().filter_map(|c| interpolate(c, x)));
        if inside.is_finite() {
            return inside;
        }
        let nearest = |c: &Vec<(f64, f64)>| {
            let (first, last) = (c[0], c[c.len() - 1]);
            if x < first.0 {
                (first.0 - x, first.1)
            } else {
                (x - last.0, last.1)
            }
        };
        self.curves
            .iter()
            .filter(|c| !c.is_empty())
            .map(nearest)
            .min_by(|a, b| a.0.total_cmp(&b.0).then(b.1.total_cmp(&a.1)))
            .map_or(f64::NAN, |(_, y)| y)
    }
}

/// Linear interpolation on points sorted by `x`; `None` outside their range.
fn interpolate(points: &[(f64, f64)], x: f64) -> Option<f64> {
    let first = points.first()?;
    let last = points.last()?;
    if x < first.0 || x > last.0 {
        return None;
    }
    let k = points.partition_point(|p| p.0 < x);
    if k == 0 {
        // x equals the first abscissa; take the largest value there.
        return Some(max_of(points.iter().take_while(|p| p.0 == x).map(|p| p.1)));
    }
    let (x0, y0) = points[k - 1];
    let (x1, y1) = points[k];
    if x1 == x0 {
        return Some(y0.max(y1));
    }
    Some(y0 + (y1 - y0) * (x - x0) / (x1 - x0))
}

/// Largest `y - envelope(x)` over `points`.
pub fn envelope_excess(envelope: &Envelope, points: &[(f64, f64)]) -> f64 {
    max_of(points.iter().map(|&(x, y)| y - envelope.at(x)))
}

fn curve_states(grid: usize) -> Result<Vec<(&'static str, f64, DensityMatrix)>> {
    let mut out = Vec::new();
    for p in linspace(0.0, 1.0, grid) {
        out.push(("rank2", p, rank2_boundary(p)?));
    }
    for theta in linspace(0.0, FRAC_PI_4, grid) {
        out.push(("pure", theta, pure_schmidt(theta)));
    }
    for p in linspace(0.0, 1.0, grid) {
        out.push(("edge", p, bell_mixture([p, 0.0, 0.0, 1.0 - p])?));
    }
    for e in linspace(0.0, 1.0, grid) {
        out.push(("werner", e, werner(e)?));
    }
    let median = LineSpec::new(
        "face-median",
        BellState::PhiPlus.vertex().c,
        [0.0, 1.0, 0.0],
    );
    for t in linspace(0.0, 1.0, grid) {
        out.push(("face-median", t, bell_diagonal(median.at(t))?));
    }
    Ok(out)
}

pub(super) fn random_scatter(spec: &ExperimentSpec, engine: &MeasureEngine) -> Result<RunOutput> {
    let results: Vec<Result<MeasureReport>> = (0..spec.count as u64)
        .into_par_iter()
        .map(|i| engine.report(&random_state_at(spec.seed, spec.measure, i)))
        .collect();
    let reports = results.into_iter().collect::<Result<Vec<_>>>()?;

    let csv = format!("{}.csv", spec.experiment.stem());
    let mut table = Table::new(columns(&["index"]));
    for (i, r) in reports.iter().enumerate() {
        table.push(row(vec![i.into()], r));
    }

    let curves = curve_states(spec.grid.max(2))?;
    let states: Vec<DensityMatrix> = curves.iter().map(|(_, _, s)| s.clone()).collect();
    let curve_reports = evaluate_states(engine, &states)?;
    let mut envelopes = Table::new(columns(&["curve", "parameter"]));
    for ((name, param, _), r) in curves.iter().zip(&curve_reports) {
        envelopes.push(row(vec![(*name).into(), (*param).into()], r));
    }

    let mut envelope = Envelope::new();
    for name in ["pure", "edge"] {
        envelope.add_curve(
            curves
                .iter()
                .zip(&curve_reports)
                .filter(|((n, _, _), _)| *n == name)
                .map(|(_, r)| (r.discord, r.ea))
                .collect(),
        );
    }
    let points: Vec<(f64, f64)> = reports.iter().map(|r| (r.discord, r.ea)).collect();
    let excess = envelope_excess(&envelope, &points);
    let above = points
        .iter()
        .filter(|&&(x, y)| y - envelope.at(x) > ENVELOPE_TOLERANCE)
        .count();
    let below_zero = reports.iter().filter(|r| r.ea < 0.0).count();

    let env_csv = "envelopes.csv".to_string();
    let overlay = |x: &str, y: &str| {
        let mut layers = vec![Layer::new(&csv, LayerKind::Scatter, x, y, "random states")];
        for (name, label) in [
            ("rank2", "rank-2 family"),
            ("pure", "pure states"),
            ("edge", "edge states"),
            ("werner", "Werner states"),
            ("face-median", "face median"),
        ] {
            layers.push(Layer::new(&env_csv, LayerKind::Line, x, y, label).filtered("curve", name));
        }
        layers
    };
    let plots = vec![
        plot(
            "random_ea_eof.svg",
            &format!("{} random states: accord against EoF", spec.count),
            "eof",
            "ea",
            overlay("eof", "ea"),
        ),
        plot(
            "random_ea_discord.svg",
            &format!("{} random states: accord against discord", spec.count),
            "discord",
            "ea",
            overlay("discord", "ea"),
        ),
    ];
    let summary = json!({
        "count": spec.count,
        "measure": spec.measure,
        "entangled_with_zero_ea": reports.iter().filter(|r| r.eof > ZERO && r.ea < ZERO).count(),
        "ea_with_zero_discord": reports.iter().filter(|r| r.ea > ZERO && r.discord < ZERO).count(),
        "max_excess_over_pure_edge_envelope": excess,
        "envelope_tolerance": ENVELOPE_TOLERANCE,
        "points_above_envelope": above,
        "points_below_zero": below_zero,
        "max_ea": max_of(reports.iter().map(|r| r.ea)),
        "max_discord": max_of(reports.iter().map(|r| r.discord)),
    });
    Ok(RunOutput {
        spec: spec.clone(),
        tables: vec![(csv, table), (env_csv, envelopes)],
        plots,
        summary,
        violations: 0,
    })
}

/// Stream offsets that keep the audit's random families independent.
const BURES_STREAM: u64 = 1 << 48;
const CLASSICAL_STREAM: u64 = 2 << 48;
const ZERO_EA_STREAM: u64 = 3 << 48;
const BOUNDARY_STREAM: u64 = 4 << 48;
const LU_STATE_STREAM: u64 = 5 << 48;
const LU_UNITARY_STREAM: u64 = 6 << 48;

fn random_qubit_state(rng: &mut StateRng) -> Result<DensityMatrix> {
    let g = rng.ginibre(2);
    DensityMatrix::from_unnormalized((&g * &g.adjoint()).hermitian_part())
}

/// `sqrt(rho_B) W sqrt(rho_B)` with `||W|| < 1`, so the block matrix of
/// [`zero_ea_state`] is positive.
fn random_zero_ea_state(rng: &mut StateRng) -> Result<DensityMatrix> {
    let rho_b = random_qubit_state(rng)?;
    let g = rng.ginibre(2);
    // The Frobenius norm bounds the operator norm.
    let w = g.scale_real(0.999 * rng.uniform() / g.frobenius_norm());
    let root = matrix_sqrt_psd(rho_b.matrix())?;
    let phi: ComplexMatrix = &(&root * &w) * &root;
    zero_ea_state(&rho_b, &phi)
}

fn random_classical_state(rng: &mut StateRng) -> Result<DensityMatrix> {
    let mut w = [0.0; 4];
    for x in &mut w {
        *x = -(1.0 - rng.uniform()).ln();
    }
    let total: f64 = w.iter().sum();
    let w = w.map(|x| x / total);
    classical_state([[w[0], w[1]], [w[2], w[3]]])
}

/// Bell-diagonal state on the octahedron surface, the separable boundary.
fn random_boundary_state(rng: &mut StateRng) -> Result<DensityMatrix> {
    loop {
        let c = rng.tetrahedron_point();
        let norm = c.l1_norm();
        if norm > 1e-3 {
            return bell_diagonal(BellDiagonalCoords {
                c: c.c.map(|x| x / norm),
            });
        }
    }
}

const BATCHES: [&str; 5] = ["haar", "bures", "classical", "zero-ea", "bell-boundary"];

pub(super) fn hierarchy_audit(spec: &ExperimentSpec, engine: &MeasureEngine) -> Result<RunOutput> {
    let tol = spec.tolerances;
    let seed = spec.seed;
    let mut items: Vec<(&str, u64)> = Vec::new();
    for batch in BATCHES {
        let n = if matches!(batch, "haar" | "bures") {
            spec.count
        } else {
            spec.targeted
        };
        items.extend((0..n as u64).map(|i| (batch, i)));
    }
    let make = |batch: &str, i: u64| -> Result<DensityMatrix> {
        match batch {
            "haar" => Ok(random_state_at(seed, RandomMeasure::Haar, i)),
            "bures" => Ok(random_state_at(
                seed,
                RandomMeasure::Bures,
                BURES_STREAM | i,
            )),
            "classical" => random_classical_state(&mut StateRng::new(seed, CLASSICAL_STREAM | i)),
            "zero-ea" => random_zero_ea_state(&mut StateRng::new(seed, ZERO_EA_STREAM | i)),
            _ => random_boundary_state(&mut StateRng::new(seed, BOUNDARY_STREAM | i)),
        }
    };
    let states = items
        .iter()
        .map(|&(b, i)| make(b, i))
        .collect::<Result<Vec<_>>>()?;
    let reports = evaluate_states(engine, &states)?;
    let ppt = states.iter().map(is_ppt).collect::<Result<Vec<_>>>()?;

    let mut audit = Table::new(
        columns(&["batch", "index"]).into_iter().chain(
            [
                "ppt",
                "discord_zero_ea_nonzero",
                "ea_zero_entangled",
                "classical_nonzero",
                "zero_ea_form_failed",
            ]
            .map(String::from),
        ),
    );
    let mut per_batch = serde_json::Map::new();
    let mut violations = 0;
    for batch in BATCHES {
        let mut counts = [0usize; 4];
        let mut max_ea = f64::NEG_INFINITY;
        let mut n = 0;
        for (((b, i), r), &is_ppt) in items.iter().zip(&reports).zip(&ppt) {
            if *b != batch {
                continue;
            }
            n += 1;
            max_ea = max_ea.max(r.ea);
            let flags = [
                r.discord < tol.zero && r.ea >= tol.implied,
                r.ea < tol.zero && r.concurrence >= tol.implied,
                batch == "classical"
                    && [r.concurrence, r.eof, r.discord, r.ea]
                        .iter()
                        .any(|&m| m >= tol.zero),
                batch == "zero-ea" && (r.ea >= tol.implied || !is_ppt),
            ];
            for (c, &f) in counts.iter_mut().zip(&flags) {
                *c += f as usize;
            }
            let mut cells = vec![batch.into(), (*i).into()];
            cells.extend(measure_cells(r));
            cells.push(is_ppt.into());
            cells.extend(flags.map(Value::from));
            audit.push(cells);
        }
        let batch_violations: usize = counts.iter().sum();
        violations += batch_violations;
        per_batch.insert(
            batch.to_string(),
            json!({
                "states": n,
                "max_ea": max_ea,
                "discord_zero_ea_nonzero": counts[0],
                "ea_zero_entangled": counts[1],
                "classical_nonzero": counts[2],
                "zero_ea_form_failed": counts[3],
                "violations": batch_violations,
            }),
        );
    }

    // Local-unitary invariance.
    let lu_items: Vec<(u64, u64)> = (0..spec.lu_states as u64)
        .flat_map(|s| (0..spec.lu_trials as u64).map(move |k| (s, k)))
        .collect();
    let base_states: Vec<DensityMatrix> = (0..spec.lu_states as u64)
        .map(|s| random_state_at(seed, RandomMeasure::Haar, LU_STATE_STREAM | s))
        .collect();
    let base = evaluate_states(engine, &base_states)?;
    let rotated = lu_items
        .iter()
        .map(|&(s, k)| {
            let (u, v) =
                random_local_unitaries(seed, LU_UNITARY_STREAM | (s * spec.lu_trials as u64 + k));
            base_states[s as usize].local_unitary(&u, &v)
        })
        .collect::<Result<Vec<_>>>()?;
    let rotated_reports = evaluate_states(engine, &rotated)?;
    let mut lu = Table::new([
        "state",
        "trial",
        "d_concurrence",
        "d_eof",
        "d_discord",
        "d_ea",
        "d_qmi",
        "max_change",
    ]);
    let mut lu_violations = 0;
    let mut lu_max = 0.0f64;
    for (&(s, k), r) in lu_items.iter().zip(&rotated_reports) {
        let b = &base[s as usize];
        let d = [
            (r.concurrence - b.concurrence).abs(),
            (r.eof - b.eof).abs(),
            (r.discord - b.discord).abs(),
            (r.ea - b.ea).abs(),
            (r.quantum_mutual_information - b.quantum_mutual_information).abs(),
        ];
        let worst = max_of(d);
        lu_max = lu_max.max(worst);
        if worst >= tol.local_unitary {
            lu_violations += 1;
        }
        let mut cells: Vec<Value> = vec![s.into(), k.into()];
        cells.extend(d.map(Value::from));
        cells.push(worst.into());
        lu.push(cells);
    }
    violations += lu_violations;

    let audit_csv = format!("{}.csv", spec.experiment.stem());
    let plots = vec![
        plot(
            "hierarchy_ea_discord.svg",
            "Zero-set audit: accord against discord",
            "discord",
            "ea",
            vec![
                Layer::new(&audit_csv, LayerKind::Scatter, "discord", "ea", "batch")
                    .grouped("batch"),
            ],
        ),
        plot(
            "hierarchy_concurrence_ea.svg",
            "Zero-set audit: concurrence against accord",
            "ea",
            "concurrence",
            vec![
                Layer::new(&audit_csv, LayerKind::Scatter, "ea", "concurrence", "batch")
                    .grouped("batch"),
            ],
        ),
    ];
    let summary = json!({
        "tolerances": tol,
        "batches": per_batch,
        "local_unitary": {
            "states": spec.lu_states,
            "trials": spec.lu_trials,
            "max_change": lu_max,
            "violations": lu_violations,
        },
        "violations": violations,
    });
    Ok(RunOutput {
        spec: spec.clone(),
        tables: vec![(audit_csv, audit), ("local_unitary.csv".to_string(), lu)],
        plots,
        summary,
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolation_and_envelope() {
        let pts = [(0.0, 0.0), (1.0, 1.0)];
        assert_eq!(interpolate(&pts, 0.25), Some(0.25));
        assert_eq!(interpolate(&pts, 1.5), None);
        let mut env = Envelope::new();
        env.add_curve(vec![(1.0, 1.0), (0.0, 0.0)]);
        env.add_curve(vec![(0.0, 0.0), (0.5, 0.4)]);
        assert!((env.at(0.25) - 0.25).abs() < 1e-15);
        assert!((env.at(2.0) - 1.0).abs() < 1e-15);
        assert!((envelope_excess(&env, &[(0.5, 0.6), (0.1, 0.0)]) - 0.1).abs() < 1e-12);
    }

    #[test]
    fn default_lines_lie_in_tetrahedron() {
        for l in default_slices().iter().chain(&default_transects()) {
            for t in [0.0, 0.5, 1.0] {
                assert!(l.at(t).in_tetrahedron(1e-12), "{}", l.name);
            }
        }
    }

    #[test]
    fn targeted_families_are_what_they_claim() {
        for i in 0..20 {
            let z = random_zero_ea_state(&mut StateRng::new(3, i)).unwrap();
            assert!(is_ppt(&z).unwrap());
            let b = random_boundary_state(&mut StateRng::new(3, i)).unwrap();
            let c = BellDiagonalCoords::of_state(&b).unwrap();
            assert!((c.l1_norm() - 1.0).abs() < 1e-9);
        }
    }
}
