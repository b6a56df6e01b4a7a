//! Derivative-free optimization over one or two copies of the unit sphere.
//!
//! [`SphereOptimizer`] seeds from a Fibonacci lattice and polishes the best
//! seeds with a compass search in the tangent plane, halving the step on
//! every unsuccessful round. [`SphereOptimizer::minimax`] nests a complete
//! inner maximization inside every evaluation of the outer minimization.
//!
//! [`GridOracle`] is the independent reference: exhaustive lattice scans
//! followed by zooming local grids, sharing nothing with the compass search.
//!
//! Objectives take unit vectors. Use [`ProjectiveBasis`](crate::measurement::ProjectiveBasis)
//! to convert from `(theta, phi)` angles.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measurement::Direction;

/// Grids smaller than this threshold are evaluated serially.
const PARALLEL_GRID_MIN: usize = 64;
/// Smallest improvement accepted when the objective is evaluated exactly,
/// as a fraction of the value tolerance.
const EXACT_GAIN: f64 = 0.1;

/// A move must also gain at least this times step squared, relative to the
/// value range of the coarse grid, or the step halves.
const SUFFICIENT_GAIN: f64 = 1e-3;

/// A deterministic point set on the unit sphere.
#[derive(Clone, Debug, PartialEq)]
pub struct SphereGrid {
    points: Vec<Direction>,
}

impl SphereGrid {
    /// Fibonacci lattice with `n` points covering the whole sphere.
    pub fn fibonacci(n: usize) -> Self {
        let golden_angle = PI * (3.0 - 5f64.sqrt());
        let points = (0..n)
            .map(|i| {
                let z = 1.0 - (2.0 * i as f64 + 1.0) / n as f64;
                let r = (1.0 - z * z).max(0.0).sqrt();
                let (s, c) = (golden_angle * i as f64).sin_cos();
                [r * c, r * s, z]
            })
            .collect();
        Self { points }
    }

    /// Equiangular grid on the closed upper hemisphere: `rings + 1` polar
    /// rings (the pole counted once) with `4 * rings` azimuths each. The grid
    /// for `2 * rings` contains every point of the grid for `rings`.
    pub fn nested_hemisphere(rings: usize) -> Self {
        let rings = rings.max(1);
        let mut points = vec![[0.0, 0.0, 1.0]];
        let azimuths = 4 * rings;
        for i in 1..=rings {
            let theta = 0.5 * PI * i as f64 / rings as f64;
            let (st, ct) = theta.sin_cos();
            for j in 0..azimuths {
                let phi = 2.0 * PI * j as f64 / azimuths as f64;
                let (sp, cp) = phi.sin_cos();
                points.push([st * cp, st * sp, ct]);
            }
        }
        Self { points }
    }

    /// Keeps the points with `z >= 0`. For objectives invariant under
    /// `n -> -n` this covers the sphere as densely as the full set.
    pub fn folded(&self) -> Self {
        Self {
            points: self
                .points
                .iter()
                .copied()
                .filter(|p| p[2] >= 0.0)
                .collect(),
        }
    }

    pub fn points(&self) -> &[Direction] {
        &self.points
    }

    pub fn resolution(&self) -> usize {
        self.points.len()
    }

    /// Typical nearest-neighbour spacing in radians.
    pub fn spacing(&self) -> f64 {
        (4.0 * PI / self.points.len().max(1) as f64).sqrt()
    }
}

fn evaluate_grid<F>(points: &[Direction], f: &F) -> Vec<f64>
where
    F: Fn(&Direction) -> f64 + Sync,
{
    if points.len() >= PARALLEL_GRID_MIN && rayon::current_num_threads() > 1 {
        points.par_iter().map(f).collect()
    } else {
        points.iter().map(f).collect()
    }
}

/// Indices of the `k` largest values, ties broken by lowest index.
fn top_indices(values: &[f64], k: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[j].total_cmp(&values[i]).then(i.cmp(&j)));
    order.truncate(k.max(1));
    order
}

/// Orthonormal tangent vectors at `x`.
fn tangent_frame(x: &Direction) -> (Direction, Direction) {
    let helper = if x[2].abs() < 0.9 {
        [0.0, 0.0, 1.0]
    } else {
        [1.0, 0.0, 0.0]
    };
    let t1 = normalize(cross(&helper, x));
    let t2 = cross(x, &t1);
    (t1, t2)
}

fn cross(a: &Direction, b: &Direction) -> Direction {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn normalize(v: Direction) -> Direction {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    [v[0] / n, v[1] / n, v[2] / n]
}

fn angle_between(a: &Direction, b: &Direction) -> f64 {
    let d = a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
    d.clamp(-1.0, 1.0).acos()
}

/// Continues the great circle from `from` through `at` for `len` radians past `at`.
fn walk_away(from: &Direction, at: &Direction, len: f64) -> Direction {
    let d = from[0] * at[0] + from[1] * at[1] + from[2] * at[2];
    let t = normalize([
        at[0] * d - from[0],
        at[1] * d - from[1],
        at[2] * d - from[2],
    ]);
    let (s, c) = len.sin_cos();
    normalize([
        c * at[0] + s * t[0],
        c * at[1] + s * t[1],
        c * at[2] + s * t[2],
    ])
}

/// Walks a geodesic from `x` along tangent coordinates `(u, v)`.
fn exp_map(x: &Direction, frame: &(Direction, Direction), u: f64, v: f64) -> Direction {
    let (t1, t2) = frame;
    let len = (u * u + v * v).sqrt();
    if len == 0.0 {
        return *x;
    }
    let (s, c) = len.sin_cos();
    let k = s / len;
    normalize([
        c * x[0] + k * (u * t1[0] + v * t2[0]),
        c * x[1] + k * (u * t1[1] + v * t2[1]),
        c * x[2] + k * (u * t1[2] + v * t2[2]),
    ])
}

/// Tunables for [`SphereOptimizer`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    /// Fibonacci lattice size used to seed each solve.
    pub coarse_resolution: usize,
    /// Factor applied to the compass step after an unsuccessful round.
    pub refine_shrink: f64,
    /// Initial compass step in radians.
    pub refine_initial_step: f64,
    /// Target accuracy of the optimal value in bits. The search stops once
    /// the step falls to `sqrt(value_tolerance) / 10`, where a smooth optimum
    /// moves by well under `value_tolerance`. Outer moves of a minimax must
    /// gain at least this much.
    pub value_tolerance: f64,
    /// Budget of compass rounds per refinement start.
    pub max_refine_iterations: usize,
    /// Number of best lattice points refined independently.
    pub refine_starts: usize,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            coarse_resolution: 400,
            refine_shrink: 0.5,
            refine_initial_step: 0.2,
            value_tolerance: 1e-7,
            max_refine_iterations: 60,
            refine_starts: 3,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.to_string()));
        if self.coarse_resolution == 0 {
            return bad("coarse_resolution must be positive");
        }
        if !(self.refine_shrink > 0.0 && self.refine_shrink < 1.0) {
            return bad("refine_shrink must lie in (0, 1)");
        }
        if self.refine_initial_step.is_nan() || self.refine_initial_step <= 0.0 {
            return bad("refine_initial_step must be positive");
        }
        if !(self.value_tolerance > 0.0 && self.value_tolerance < self.refine_initial_step) {
            return bad("value_tolerance must be positive and below refine_initial_step");
        }
        if self.max_refine_iterations == 0 || self.refine_starts == 0 {
            return bad("iteration budgets must be positive");
        }
        Ok(())
    }

    /// Step size at which a compass search is considered converged.
    pub fn step_tolerance(&self) -> f64 {
        (0.1 * self.value_tolerance.sqrt()).min(self.refine_initial_step)
    }
}

/// Maximizer of the quadratic fitted to a compass round: `f0` at the centre
/// and `samples` at distance `step` along the directions of the round, in
/// order +u, -u, +v, -v, +(u+v), -(u+v), +(u-v), -(u-v). `None` unless the
/// model is concave. The step is capped at a quarter turn.
fn newton_step(f0: f64, samples: &[f64; 8], step: f64) -> Option<(f64, f64)> {
    let s2 = step * step;
    let gu = (samples[0] - samples[1]) / (2.0 * step);
    let gv = (samples[2] - samples[3]) / (2.0 * step);
    let huu = (samples[0] + samples[1] - 2.0 * f0) / s2;
    let hvv = (samples[2] + samples[3] - 2.0 * f0) / s2;
    let huv = ((samples[4] + samples[5]) - (samples[6] + samples[7])) / (2.0 * s2);
    let det = huu * hvv - huv * huv;
    if !(huu < 0.0 && det > 0.0) {
        return None;
    }
    let du = -(hvv * gu - huv * gv) / det;
    let dv = -(huu * gv - huv * gu) / det;
    let len = du.hypot(dv);
    if !len.is_finite() || len == 0.0 {
        return None;
    }
    let cap = std::f64::consts::FRAC_PI_4;
    let k = if len > cap { cap / len } else { 1.0 };
    Some((du * k, dv * k))
}

/// Best point found on the sphere.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SphereOptimum {
    pub value: f64,
    pub direction: Direction,
    /// Compass rounds spent by the winning start.
    pub iterations: usize,
    /// Step size when the winning start stopped.
    pub final_step: f64,
    pub evaluations: usize,
}

/// Saddle point of `min_a max_b f(a, b)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinimaxOptimum {
    pub value: f64,
    pub alice: Direction,
    pub bob: Direction,
    pub outer_iterations: usize,
    pub outer_final_step: f64,
    /// Compass rounds of the inner solve at the returned Alice direction.
    pub inner_iterations: usize,
    pub inner_final_step: f64,
    pub evaluations: usize,
}

/// Coarse-lattice seeding plus compass-search refinement.
///
/// The optimizer is immutable after construction; one instance can serve
/// any number of concurrent solves.
#[derive(Clone, Debug)]
pub struct SphereOptimizer {
    config: OptimizerConfig,
    grid: SphereGrid,
}

impl Default for SphereOptimizer {
    fn default() -> Self {
        Self::new(OptimizerConfig::default()).expect("default config is valid")
    }
}

impl SphereOptimizer {
    pub fn new(config: OptimizerConfig) -> Result<Self> {
        config.validate()?;
        let grid = SphereGrid::fibonacci(config.coarse_resolution);
        Ok(Self { config, grid })
    }

    /// Seeds from the upper half of the lattice only. Valid when every
    /// objective handed to this optimizer is unchanged by flipping its
    /// argument(s) to the antipode, as projective measurement statistics are.
    pub fn antipodal(mut self) -> Self {
        self.grid = self.grid.folded();
        self
    }

    pub fn config(&self) -> &OptimizerConfig {
        &self.config
    }

    pub fn grid(&self) -> &SphereGrid {
        &self.grid
    }

    /// Maximizes `f` over unit vectors.
    pub fn maximize<F>(&self, f: F) -> Result<SphereOptimum>
    where
        F: Fn(&Direction) -> f64 + Sync,
    {
        let points = self.grid.points();
        let values = evaluate_grid(points, &f);
        let mut evaluations = values.len();
        let seeds = top_indices(&values, self.config.refine_starts);

        let max = values[seeds[0]];
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        if max - min <= self.config.value_tolerance {
            // Flat landscape: nothing to refine.
            return Ok(SphereOptimum {
                value: max,
                direction: points[seeds[0]],
                iterations: 0,
                final_step: 0.0,
                evaluations,
            });
        }

        let mut best: Option<SphereOptimum> = None;
        for &seed in &seeds {
            let run = self.compass_search(
                &f,
                points[seed],
                values[seed],
                EXACT_GAIN * self.config.value_tolerance,
                max - min,
            )?;
            evaluations += run.evaluations;
            if best.is_none_or(|b| run.value > b.value) {
                best = Some(run);
            }
        }
        let mut best = best.expect("at least one seed");
        best.evaluations = evaluations;
        Ok(best)
    }

    /// Minimizes `f` over unit vectors.
    pub fn minimize<F>(&self, f: F) -> Result<SphereOptimum>
    where
        F: Fn(&Direction) -> f64 + Sync,
    {
        let mut opt = self.maximize(|x| -f(x))?;
        opt.value = -opt.value;
        Ok(opt)
    }

    fn compass_search<F>(
        &self,
        f: &F,
        start: Direction,
        start_value: f64,
        min_gain: f64,
        range: f64,
    ) -> Result<SphereOptimum>
    where
        F: Fn(&Direction) -> f64,
    {
        const ROUND: [(f64, f64); 8] = [
            (1.0, 0.0),
            (-1.0, 0.0),
            (0.0, 1.0),
            (0.0, -1.0),
            (
                std::f64::consts::FRAC_1_SQRT_2,
                std::f64::consts::FRAC_1_SQRT_2,
            ),
            (
                -std::f64::consts::FRAC_1_SQRT_2,
                -std::f64::consts::FRAC_1_SQRT_2,
            ),
            (
                std::f64::consts::FRAC_1_SQRT_2,
                -std::f64::consts::FRAC_1_SQRT_2,
            ),
            (
                -std::f64::consts::FRAC_1_SQRT_2,
                std::f64::consts::FRAC_1_SQRT_2,
            ),
        ];
        let step_tol = self.config.step_tolerance();

        let mut x = start;
        let mut fx = start_value;
        // Point the search stood on one accepted move ago.
        let mut anchor: Option<Direction> = None;
        let mut step = self.config.refine_initial_step;
        let mut evaluations = 0;
        let mut iterations = 0;

        while step > step_tol {
            if iterations == self.config.max_refine_iterations {
                return Err(Error::OptimizerDidNotConverge { iterations, step });
            }
            iterations += 1;
            let frame = tangent_frame(&x);
            let required = |s: f64| min_gain.max(SUFFICIENT_GAIN * range * s * s);
            let mut samples = [0.0; 8];
            // Best candidate as (tangent displacement, point, value).
            let mut best: Option<((f64, f64), Direction, f64)> = None;
            for (k, (u, v)) in ROUND.into_iter().enumerate() {
                let y = exp_map(&x, &frame, step * u, step * v);
                let fy = f(&y);
                samples[k] = fy;
                evaluations += 1;
                if fy > fx + required(step) && best.is_none_or(|(_, _, fb)| fy > fb) {
                    best = Some(((step * u, step * v), y, fy));
                }
            }
            // Newton step on the quadratic model through the round's samples.
            if let Some((du, dv)) = newton_step(fx, &samples, step) {
                let len = du.hypot(dv);
                let y = exp_map(&x, &frame, du, dv);
                let fy = f(&y);
                evaluations += 1;
                if fy > fx + required(len.min(step)) && best.is_none_or(|(_, _, fb)| fy > fb) {
                    best = Some(((du, dv), y, fy));
                }
            }
            let Some(((du, dv), mut y, mut fy)) = best else {
                anchor = None;
                step *= self.config.refine_shrink;
                continue;
            };
            // Keep doubling along a direction that works.
            let mut reach = du.hypot(dv);
            let mut scale = 1.0;
            while reach * 2.0 <= std::f64::consts::PI {
                let z = exp_map(&x, &frame, 2.0 * scale * du, 2.0 * scale * dv);
                let fz = f(&z);
                evaluations += 1;
                if fz <= fy + required(reach) {
                    break;
                }
                reach *= 2.0;
                scale *= 2.0;
                y = z;
                fy = fz;
            }
            // Pattern move: repeat the net displacement of the last two moves,
            // which cuts across the zigzag of a narrow or kinked valley.
            let before = x;
            if let Some(p) = anchor {
                let mut span = angle_between(&p, &y);
                while span > 0.0 && span <= std::f64::consts::FRAC_PI_2 {
                    let z = walk_away(&p, &y, span);
                    let fz = f(&z);
                    evaluations += 1;
                    if fz <= fy + required(span) {
                        break;
                    }
                    y = z;
                    fy = fz;
                    span *= 2.0;
                }
            }
            anchor = Some(before);
            x = y;
            fx = fy;
        }

        Ok(SphereOptimum {
            value: fx,
            direction: x,
            iterations,
            final_step: step,
            evaluations,
        })
    }

    /// `min_a max_b f(a, b)`: each outer probe runs a full inner maximization.
    pub fn minimax<F>(&self, f: F) -> Result<MinimaxOptimum>
    where
        F: Fn(&Direction, &Direction) -> f64 + Sync,
    {
        let f = &f;
        self.minimax_with(|a| {
            let a = *a;
            move |b: &Direction| f(&a, b)
        })
    }

    /// Like [`minimax`](Self::minimax), but the objective for a fixed Alice
    /// direction is built once per outer probe by `inner_for`, which lets
    /// callers precompute anything that depends on `a` alone.
    pub fn minimax_with<G, H>(&self, inner_for: G) -> Result<MinimaxOptimum>
    where
        G: Fn(&Direction) -> H + Sync,
        H: Fn(&Direction) -> f64 + Sync,
    {
        let counted = |a: &Direction| -> Result<SphereOptimum> { self.maximize(inner_for(a)) };

        let points = self.grid.points();
        let inner_results: Vec<Result<SphereOptimum>> =
            if points.len() >= PARALLEL_GRID_MIN && rayon::current_num_threads() > 1 {
                points.par_iter().map(counted).collect()
            } else {
                points.iter().map(counted).collect()
            };
        // Negated so that top_indices picks the smallest g(a).
        let mut seeds_values = Vec::with_capacity(points.len());
        let mut evaluations = 0;
        for r in inner_results {
            let r = r?;
            evaluations += r.evaluations;
            seeds_values.push(-r.value);
        }

        let seeds = top_indices(&seeds_values, self.config.refine_starts);
        let hi = seeds_values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        let lo = seeds_values.iter().copied().fold(f64::INFINITY, f64::min);

        let mut best: Option<(Direction, f64, usize, f64)> = None;
        if hi - lo <= self.config.value_tolerance {
            let s = seeds[0];
            best = Some((points[s], -seeds_values[s], 0, 0.0));
        } else {
            for &s in &seeds {
                let err = std::cell::Cell::new(None);
                let calls = std::cell::Cell::new(0usize);
                let g = |a: &Direction| -> f64 {
                    match counted(a) {
                        Ok(r) => {
                            calls.set(calls.get() + r.evaluations);
                            -r.value
                        }
                        Err(e) => {
                            err.set(Some(e));
                            f64::NEG_INFINITY
                        }
                    }
                };
                // g is only known to the inner tolerance, so smaller gains are noise.
                let run = self.compass_search(
                    &g,
                    points[s],
                    seeds_values[s],
                    self.config.value_tolerance,
                    hi - lo,
                );
                if let Some(e) = err.take() {
                    return Err(e);
                }
                let run = run?;
                evaluations += calls.get();
                if best.is_none_or(|(_, v, _, _)| -run.value < v) {
                    best = Some((run.direction, -run.value, run.iterations, run.final_step));
                }
            }
        }

        let (alice, _, outer_iterations, outer_final_step) = best.expect("at least one seed");
        // Re-solve at the winner to report Bob's direction.
        let inner = self.maximize(inner_for(&alice))?;
        evaluations += inner.evaluations;
        Ok(MinimaxOptimum {
            value: inner.value,
            alice,
            bob: inner.direction,
            outer_iterations,
            outer_final_step,
            inner_iterations: inner.iterations,
            inner_final_step: inner.final_step,
            evaluations,
        })
    }
}

/// Maximizes `f` with the default configuration.
pub fn maximize_on_sphere<F>(f: F, config: &OptimizerConfig) -> Result<SphereOptimum>
where
    F: Fn(&Direction) -> f64 + Sync,
{
    SphereOptimizer::new(config.clone())?.maximize(f)
}

/// `min_a max_b f(a, b)` with the given configuration.
pub fn minimax_on_spheres<F>(f: F, config: &OptimizerConfig) -> Result<MinimaxOptimum>
where
    F: Fn(&Direction, &Direction) -> f64 + Sync,
{
    SphereOptimizer::new(config.clone())?.minimax(f)
}

/// Largest value of `f` over the points of `grid`; lowest index wins ties.
pub fn brute_force_maximize<F>(f: F, grid: &SphereGrid) -> (f64, Direction)
where
    F: Fn(&Direction) -> f64 + Sync,
{
    let values = evaluate_grid(grid.points(), &f);
    let i = top_indices(&values, 1)[0];
    (values[i], grid.points()[i])
}

/// Exhaustive double scan over a Fibonacci lattice of `resolution` points
/// for each party. No refinement.
pub fn brute_force_minimax<F>(f: F, resolution: usize) -> Result<(f64, Direction, Direction)>
where
    F: Fn(&Direction, &Direction) -> f64 + Sync,
{
    if resolution < 16 {
        return Err(Error::OutOfRange {
            name: "resolution",
            value: resolution as f64,
            range: "[16, inf)",
        });
    }
    let grid = SphereGrid::fibonacci(resolution);
    let inner: Vec<(f64, Direction)> = grid
        .points()
        .iter()
        .map(|a| brute_force_maximize(|b| f(a, b), &grid))
        .collect();
    let negated: Vec<f64> = inner.iter().map(|(v, _)| -v).collect();
    let i = top_indices(&negated, 1)[0];
    Ok((inner[i].0, grid.points()[i], inner[i].1))
}

/// Dense-grid reference optimizer: a lattice scan followed by zooming
/// square grids around the best few lattice points. Every level shrinks the
/// window to one grid spacing of the previous level.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridOracle {
    pub resolution: usize,
    pub zoom_levels: usize,
    /// Points per side of each zoom window.
    pub zoom_points: usize,
    /// Lattice points refined at each level of the nesting.
    pub candidates: usize,
}

impl Default for GridOracle {
    fn default() -> Self {
        Self {
            resolution: 200,
            zoom_levels: 8,
            zoom_points: 9,
            candidates: 3,
        }
    }
}

impl GridOracle {
    pub fn new(resolution: usize) -> Self {
        Self {
            resolution,
            ..Self::default()
        }
    }

    fn zoom<F>(
        &self,
        f: &F,
        start: Direction,
        start_value: f64,
        half_width: f64,
    ) -> (f64, Direction)
    where
        F: Fn(&Direction) -> f64,
    {
        let n = self.zoom_points.max(3);
        let mut center = start;
        let mut best = start_value;
        let mut h = half_width;
        for _ in 0..self.zoom_levels {
            let frame = tangent_frame(&center);
            let spacing = 2.0 * h / (n - 1) as f64;
            let mut next = center;
            for i in 0..n {
                for j in 0..n {
                    let u = -h + spacing * i as f64;
                    let v = -h + spacing * j as f64;
                    let y = exp_map(&center, &frame, u, v);
                    let fy = f(&y);
                    if fy > best {
                        best = fy;
                        next = y;
                    }
                }
            }
            center = next;
            h = spacing;
        }
        (best, center)
    }

    /// Maximizes `f` by lattice scan plus zooming.
    pub fn maximize<F>(&self, f: F) -> (f64, Direction)
    where
        F: Fn(&Direction) -> f64 + Sync,
    {
        let grid = SphereGrid::fibonacci(self.resolution);
        self.maximize_on(&grid, &f)
    }

    fn maximize_on<F>(&self, grid: &SphereGrid, f: &F) -> (f64, Direction)
    where
        F: Fn(&Direction) -> f64 + Sync,
    {
        let values = evaluate_grid(grid.points(), f);
        let mut best = (f64::NEG_INFINITY, grid.points()[0]);
        for i in top_indices(&values, self.candidates) {
            let (v, d) = self.zoom(f, grid.points()[i], values[i], grid.spacing());
            if v > best.0 {
                best = (v, d);
            }
        }
        best
    }

    /// `min_a max_b f(a, b)` with both levels solved by the oracle.
    pub fn minimax<F>(&self, f: F) -> (f64, Direction, Direction)
    where
        F: Fn(&Direction, &Direction) -> f64 + Sync,
    {
        let grid = SphereGrid::fibonacci(self.resolution);
        let g = |a: &Direction| -> f64 { -self.maximize_on(&grid, &|b: &Direction| f(a, b)).0 };
        let (neg_value, alice) = self.maximize_on(&grid, &g);
        let (value, bob) = self.maximize_on(&grid, &|b: &Direction| f(&alice, b));
        debug_assert!((value + neg_value).abs() < 1e-12);
        (value, alice, bob)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measurement::BlochForm;
    use crate::states::BellState;

    fn dot(a: &Direction, b: &Direction) -> f64 {
        a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
    }

    #[test]
    fn fibonacci_points_are_unit_and_deterministic() {
        let g = SphereGrid::fibonacci(400);
        assert_eq!(g.resolution(), 400);
        for p in g.points() {
            assert!((dot(p, p) - 1.0).abs() < 1e-12);
        }
        assert_eq!(g, SphereGrid::fibonacci(400));
    }

    #[test]
    fn nested_grids_are_nested() {
        let coarse = SphereGrid::nested_hemisphere(4);
        let fine = SphereGrid::nested_hemisphere(8);
        for p in coarse.points() {
            assert!(fine
                .points()
                .iter()
                .any(|q| (dot(p, q) - 1.0).abs() < 1e-12));
        }
    }

    #[test]
    fn constant_landscape_returns_first_point() {
        let opt = SphereOptimizer::default();
        let r = opt.maximize(|_| 0.37).unwrap();
        assert_eq!(r.value, 0.37);
        assert_eq!(r.direction, opt.grid().points()[0]);
    }

    #[test]
    fn linear_height_peaks_at_north_pole() {
        let r = SphereOptimizer::default().maximize(|n| n[2]).unwrap();
        assert!((r.value - 1.0).abs() < 1e-6);
        assert!(r.direction[2] > 1.0 - 1e-6);
        let r = SphereOptimizer::default().minimize(|n| n[2]).unwrap();
        assert!((r.value + 1.0).abs() < 1e-6);
    }

    #[test]
    fn singlet_bob_landscape() {
        let form = BlochForm::new(&BellState::PsiMinus.density()).unwrap();
        let alice = form.given_alice(&[0.0, 0.0, 1.0]);
        let f = |b: &Direction| alice.mutual_information(b);
        let oracle = brute_force_maximize(f, &SphereGrid::fibonacci(10_000));
        let r = SphereOptimizer::default().maximize(f).unwrap();
        assert!((r.value - 1.0).abs() < 1e-6);
        assert!(r.direction[2].abs() > 1.0 - 1e-3);
        assert!(r.value >= oracle.0 - 1e-12);
    }

    #[test]
    fn refinement_never_loses_the_seed() {
        let f = |n: &Direction| (3.0 * n[0]).sin() * n[1] + 0.2 * n[2] * n[2];
        let opt = SphereOptimizer::default();
        let (grid_best, _) = brute_force_maximize(f, opt.grid());
        let r = opt.maximize(f).unwrap();
        assert!(r.value >= grid_best);
        assert!((f(&r.direction) - r.value).abs() < 1e-15);
    }

    #[test]
    fn degenerate_outer_problem() {
        let f = |_: &Direction, b: &Direction| -(b[0] - 0.6).powi(2) - b[1] * b[1];
        let r = SphereOptimizer::default().minimax(f).unwrap();
        let inner = SphereOptimizer::default()
            .maximize(|b| -(b[0] - 0.6).powi(2) - b[1] * b[1])
            .unwrap();
        assert!((r.value - inner.value).abs() < 1e-12);
    }

    #[test]
    fn outer_minimum_found() {
        // g(a) = max_b (a·b + 1)/2 * (1 + a_z^2) = 1 + a_z^2, minimized on the equator.
        let f = |a: &Direction, b: &Direction| 0.5 * (dot(a, b) + 1.0) * (1.0 + a[2] * a[2]);
        let r = SphereOptimizer::default().minimax(f).unwrap();
        assert!((r.value - 1.0).abs() < 1e-6, "{r:?}");
        assert!(r.alice[2].abs() < 1e-3);
        assert!(dot(&r.alice, &r.bob) > 1.0 - 1e-6);
    }

    #[test]
    fn brute_force_examples() {
        let (v, _, _) = brute_force_minimax(|_, _| 0.5, 16).unwrap();
        assert_eq!(v, 0.5);
        assert!(brute_force_minimax(|_, _| 0.5, 8).is_err());

        // Both parties share the lattice, so Bob can always match Alice exactly.
        let form = BlochForm::new(&BellState::PsiMinus.density()).unwrap();
        let f = |a: &Direction, b: &Direction| form.mutual_information(a, b);
        for res in [16, 64, 256] {
            let (v, a, b) = brute_force_minimax(f, res).unwrap();
            assert!((v - 1.0).abs() < 1e-12);
            assert!(dot(&a, &b).abs() > 1.0 - 1e-12);
        }
    }

    #[test]
    fn nested_grid_inner_max_is_monotone() {
        let form = BlochForm::new(&crate::states::random_state_at(
            11,
            crate::states::RandomMeasure::Haar,
            0,
        ))
        .unwrap();
        let alice = form.given_alice(&[0.3, -0.5, 0.81_f64.sqrt()]);
        let f = |b: &Direction| alice.mutual_information(b);
        let mut previous = f64::NEG_INFINITY;
        for rings in [2, 4, 8, 16, 32] {
            let (v, _) = brute_force_maximize(f, &SphereGrid::nested_hemisphere(rings));
            assert!(v >= previous - 1e-12);
            previous = v;
        }
    }

    #[test]
    fn oracle_finds_singlet_value() {
        let form = BlochForm::new(&BellState::PsiMinus.density()).unwrap();
        let (v, a, b) = GridOracle::new(64).minimax(|a, b| form.mutual_information(a, b));
        assert!((v - 1.0).abs() < 1e-9);
        assert!(dot(&a, &b).abs() > 1.0 - 1e-6);
    }

    #[test]
    fn config_validation() {
        let mut c = OptimizerConfig::default();
        assert!(c.validate().is_ok());
        c.refine_shrink = 1.5;
        assert!(SphereOptimizer::new(c.clone()).is_err());
        c.refine_shrink = 0.5;
        c.value_tolerance = 1.0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let config = OptimizerConfig {
            max_refine_iterations: 2,
            ..OptimizerConfig::default()
        };
        let opt = SphereOptimizer::new(config).unwrap();
        assert!(matches!(
            opt.maximize(|n| n[0]),
            Err(Error::OptimizerDidNotConverge { .. })
        ));
    }

    #[test]
    fn deterministic_results() {
        let form = BlochForm::new(&crate::states::random_state_at(
            1,
            crate::states::RandomMeasure::Bures,
            4,
        ))
        .unwrap();
        let f = |a: &Direction, b: &Direction| form.mutual_information(a, b);
        let opt = SphereOptimizer::default();
        assert_eq!(opt.minimax(f).unwrap(), opt.minimax(f).unwrap());
    }
}
