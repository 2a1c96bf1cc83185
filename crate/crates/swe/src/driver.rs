//! Batch driver: turns a run configuration into a finished simulation with
//! artifacts — per-output-time solution and mesh snapshots, a per-step energy
//! history, a log of bottom-dissipation gate firings, error norms against
//! exact or stored reference solutions, and convergence tables.
//!
//! Step recipe, identical in both dimensions. On a moving mesh the new mesh
//! is proposed from the current fields, the displacement is limited so no
//! node crosses half a neighbour gap, and the mesh velocity is fixed for the
//! whole step; the step size is the CFL bound including that velocity,
//! clipped so output times are landed on exactly. On a static mesh the
//! velocity is zero and the mesh terms drop out identically.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use ndarray::Array1;

use crate::boundary::{self, Boundary};
use crate::config::{min_resolution, RunConfig};
use crate::error::SolverError;
use crate::mesh::{
    limit_and_move_1d, limit_and_move_2d, mesh_velocity, propose_mesh_1d, propose_mesh_2d,
    MonitorParams,
};
use crate::metrics::{at, metrics_1d, spatial_metrics, Grid1, Grid2};
use crate::output::{
    self, norms, GateRow, MeshRow, Norms, SolutionRow,
};
use crate::problems::{self, Problem1, Problem2, ProblemSpec};
use crate::rhs_1d::Fields1;
use crate::rhs_2d::Fields2;
use crate::state::{energy_pair, energy_pair_1d, Conserved1, Conserved2, PhysicsParams};
use crate::time::{
    cfl_dt_1d, cfl_dt_2d, clip_to_target, ssp_rk3_step_1d, ssp_rk3_step_2d, State1, State2,
    StepContext,
};

/// Mesh-adaptation rounds applied to the initial data before time starts,
/// resampling the analytic initial state after each move.
const PRE_ADAPT_ROUNDS: usize = 10;

/// Relative slack under which a remaining interval counts as already at the
/// target time.
const TIME_EPS: f64 = 1e-13;

/// Hard cap on retained gate rows; later firings are counted but not stored.
const GATE_LOG_CAP: usize = 2_000_000;

/// One finished 1D run.
pub struct RunData1 {
    pub grid: Grid1,
    pub ctx: StepContext,
    /// `(time, state)` at each requested output time, in order.
    pub snapshots: Vec<(f64, State1)>,
    /// `(time, total energy)` after every step, starting at time zero.
    pub energy: Vec<(f64, f64)>,
    pub gates: Vec<GateRow>,
    pub gates_dropped: usize,
    pub steps: u64,
    pub wall: Duration,
    pub exact: Option<Box<dyn Fn(f64, f64) -> Conserved1 + Send + Sync>>,
}

/// One finished 2D run.
pub struct RunData2 {
    pub grid: Grid2,
    pub ctx: StepContext,
    pub snapshots: Vec<(f64, State2)>,
    pub energy: Vec<(f64, f64)>,
    pub gates: Vec<GateRow>,
    pub gates_dropped: usize,
    pub steps: u64,
    pub wall: Duration,
    pub exact: Option<Box<dyn Fn(f64, f64, f64) -> Conserved2 + Send + Sync>>,
    /// Largest depth mismatch under a quarter turn of the final field, for
    /// problems whose solution has that symmetry.
    pub quarter_turn_asymmetry: Option<f64>,
}

pub enum RunOutcome {
    One(RunData1),
    Two(RunData2),
}

impl RunOutcome {
    pub fn final_time(&self) -> f64 {
        match self {
            RunOutcome::One(d) => d.snapshots.last().expect("runs produce snapshots").0,
            RunOutcome::Two(d) => d.snapshots.last().expect("runs produce snapshots").0,
        }
    }

    pub fn wall(&self) -> Duration {
        match self {
            RunOutcome::One(d) => d.wall,
            RunOutcome::Two(d) => d.wall,
        }
    }
}

/// Builds and advances the configured run to its end time.
pub fn execute(cfg: &RunConfig) -> Result<RunOutcome, SolverError> {
    match problems::build(&cfg.problem, &cfg.options)? {
        ProblemSpec::One(p) => run_1d(cfg, p).map(RunOutcome::One),
        ProblemSpec::Two(p) => run_2d(cfg, p).map(RunOutcome::Two),
    }
}

fn resolve_params(
    base: PhysicsParams,
    gravity: Option<f64>,
    gamma: Option<f64>,
) -> Result<PhysicsParams, SolverError> {
    PhysicsParams::new(gravity.unwrap_or(base.gravity), gamma.unwrap_or(base.gamma))
}

fn resolve_monitor(
    base: &MonitorParams,
    cfg: &RunConfig,
) -> Result<MonitorParams, SolverError> {
    let mut monitor = base.clone();
    if let Some(over) = &cfg.monitor {
        over.apply(&mut monitor)?;
    }
    Ok(monitor)
}

fn check_resolution(n: usize, cfg: &RunConfig) -> Result<(), SolverError> {
    let floor = min_resolution(cfg.order);
    if n < floor {
        return Err(SolverError::Config(format!(
            "resolution {n} is below the minimum {floor} for this order"
        )));
    }
    Ok(())
}

/// Output targets: the configured (or registry) output times up to the end
/// time, with the end time itself always last.
fn output_targets(cfg: &RunConfig, problem_times: &[f64]) -> Vec<f64> {
    let times = cfg.output_times.as_deref().unwrap_or(problem_times);
    let end = cfg.end_time.unwrap_or_else(|| *times.last().expect("registry times are nonempty"));
    let mut out: Vec<f64> = times.iter().copied().filter(|&t| t < end * (1.0 - TIME_EPS)).collect();
    out.push(end);
    out
}

fn fields_from_state_1d(state: &State1, grid: &Grid1, bc: Boundary) -> Fields1 {
    let mut fields = Fields1::alloc(grid);
    for i in 0..grid.n as isize {
        fields.set(i, state.point_state(i));
    }
    fields.fill_halos(grid, bc);
    fields
}

fn fields_from_state_2d(state: &State2, grid: &Grid2, bc: Boundary) -> Fields2 {
    let mut fields = Fields2::alloc(grid);
    for i in 0..grid.n1 as isize {
        for j in 0..grid.n2 as isize {
            fields.set(i, j, state.point_state(i, j));
        }
    }
    fields.fill_halos(grid, bc);
    fields
}

/// Discrete total energy `sum eta_i J_i dxi` over the interior (one copy of
/// each periodic node).
pub fn total_energy_1d(state: &State1, grid: &Grid1, params: PhysicsParams) -> f64 {
    let top = if grid.periodic { grid.n - 1 } else { grid.n };
    let mut total = 0.0;
    for i in 0..top as isize {
        total += energy_pair_1d(state.point_state(i), params).eta * state.jac[at(i)];
    }
    total * grid.dxi()
}

pub fn total_energy_2d(state: &State2, grid: &Grid2, params: PhysicsParams) -> f64 {
    let (t1, t2) = if grid.periodic { (grid.n1 - 1, grid.n2 - 1) } else { (grid.n1, grid.n2) };
    let mut total = 0.0;
    for i in 0..t1 as isize {
        for j in 0..t2 as isize {
            total += energy_pair(state.point_state(i, j), params).eta * state.jac[[at(i), at(j)]];
        }
    }
    total * grid.dxi1() * grid.dxi2()
}

/// Replaces the state on the current node positions with freshly sampled
/// initial data, with the Jacobian taken from the discrete metric of those
/// positions.
fn resample_initial_1d(p: &Problem1, grid: &Grid1, bc: Boundary, state: &mut State1) {
    boundary::fill_coords_1d(&mut state.x, grid, bc);
    let zero = grid.alloc();
    let metrics = metrics_1d(&state.x, &zero, grid, crate::metrics::SchemeOrder::Sixth);
    for i in 0..grid.n as isize {
        state.jac[at(i)] = metrics.jac[at(i)];
        state.set_point(i, (p.init)(state.x[at(i)]));
    }
    if grid.periodic {
        state.set_point((grid.n - 1) as isize, state.point_state(0));
    }
}

fn resample_initial_2d(p: &Problem2, grid: &Grid2, bc: Boundary, state: &mut State2) {
    boundary::fill_coords_2d(&mut state.x1, &mut state.x2, grid, bc);
    let m = spatial_metrics(&state.x1, &state.x2, grid, crate::metrics::SchemeOrder::Sixth);
    for i in 0..grid.n1 as isize {
        for j in 0..grid.n2 as isize {
            let w = [at(i), at(j)];
            state.jac[w] = m.jac[w];
            state.set_point(i, j, (p.init)(state.x1[w], state.x2[w]));
        }
    }
    if grid.periodic {
        let (l1, l2) = ((grid.n1 - 1) as isize, (grid.n2 - 1) as isize);
        for j in 0..grid.n2 as isize {
            state.set_point(l1, j, state.point_state(0, j));
        }
        for i in 0..grid.n1 as isize {
            state.set_point(i, l2, state.point_state(i, 0));
        }
    }
}

/// Iterates mesh proposal and analytic resampling so the first step already
/// sees a mesh adapted to the initial data.
fn pre_adapt_1d(
    p: &Problem1,
    grid: &Grid1,
    bc: Boundary,
    monitor: &MonitorParams,
    state: &mut State1,
) {
    for _ in 0..PRE_ADAPT_ROUNDS {
        let fields = fields_from_state_1d(state, grid, bc);
        let candidate = propose_mesh_1d(&fields, &state.x, grid, monitor);
        let (dtau, delta) = limit_and_move_1d(&state.x, &candidate, grid);
        for i in 0..grid.n as isize {
            state.x[at(i)] += dtau * delta[at(i)];
        }
        resample_initial_1d(p, grid, bc, state);
    }
}

fn pre_adapt_2d(
    p: &Problem2,
    grid: &Grid2,
    bc: Boundary,
    monitor: &MonitorParams,
    state: &mut State2,
) {
    for _ in 0..PRE_ADAPT_ROUNDS {
        let fields = fields_from_state_2d(state, grid, bc);
        let (c1, c2) = propose_mesh_2d(&fields, &state.x1, &state.x2, grid, monitor);
        let (dtau, d1, d2) = limit_and_move_2d(&state.x1, &state.x2, &c1, &c2, grid);
        for i in 0..grid.n1 as isize {
            for j in 0..grid.n2 as isize {
                let w = [at(i), at(j)];
                state.x1[w] += dtau * d1[w];
                state.x2[w] += dtau * d2[w];
            }
        }
        resample_initial_2d(p, grid, bc, state);
    }
}

struct GateLog {
    rows: Vec<GateRow>,
    dropped: usize,
}

impl GateLog {
    fn new() -> Self {
        Self { rows: Vec::new(), dropped: 0 }
    }

    fn push(&mut self, row: GateRow) {
        if self.rows.len() < GATE_LOG_CAP {
            self.rows.push(row);
        } else {
            self.dropped += 1;
        }
    }
}

fn run_1d(cfg: &RunConfig, p: Problem1) -> Result<RunData1, SolverError> {
    let n = match cfg.resolution {
        None => p.default_resolution,
        Some((n, None)) => n,
        Some((_, Some(_))) => {
            return Err(SolverError::Config(format!(
                "problem `{}` is one-dimensional and takes a single resolution",
                p.name
            )))
        }
    };
    check_resolution(n, cfg)?;
    let grid = Grid1::new(n, p.domain, p.periodic)?;
    let bc = if p.periodic { Boundary::Periodic } else { Boundary::Outflow };
    let params = resolve_params(p.params, cfg.gravity, cfg.gamma)?;
    let monitor = resolve_monitor(&p.monitor, cfg)?;
    let targets = output_targets(cfg, &p.output_times);
    let ctx = StepContext { order: cfg.order, scheme: cfg.scheme, bc, params };

    let mut state = problems::initial_state_1d(&p, &grid);
    if cfg.moving_mesh {
        pre_adapt_1d(&p, &grid, bc, &monitor, &mut state);
    }

    let forcing = p.forcing.as_deref().map(|f| f as &dyn Fn(f64, f64) -> [f64; 3]);
    let mut energy = vec![(0.0, total_energy_1d(&state, &grid, params))];
    let mut gates = GateLog::new();
    let mut snapshots = Vec::with_capacity(targets.len());
    let mut steps: u64 = 0;
    let started = Instant::now();

    for &target in &targets {
        while target - state.t > TIME_EPS * target.max(1.0) {
            let t_pre = state.t;
            let x_pre = cfg.moving_mesh.then(|| state.x.clone());
            if cfg.moving_mesh {
                let fields = fields_from_state_1d(&state, &grid, bc);
                let candidate = propose_mesh_1d(&fields, &state.x, &grid, &monitor);
                let (dtau, delta) = limit_and_move_1d(&state.x, &candidate, &grid);
                state.xdot.fill(0.0);
                let dt0 = cfl_dt_1d(&state, &grid, &ctx, &cfg.controls);
                state.xdot = mesh_velocity(dtau, &delta, dt0);
                let dt = cfl_dt_1d(&state, &grid, &ctx, &cfg.controls).min(dt0);
                let dt = clip_to_target(dt, state.t, target);
                let fired = ssp_rk3_step_1d(&mut state, &grid, &ctx, dt, steps, forcing)?;
                let x_pre = x_pre.as_ref().expect("cloned for moving meshes");
                for interface in fired {
                    gates.push(gate_row_1d(t_pre, interface, x_pre, &grid));
                }
            } else {
                let dt = cfl_dt_1d(&state, &grid, &ctx, &cfg.controls);
                let dt = clip_to_target(dt, state.t, target);
                let fired = ssp_rk3_step_1d(&mut state, &grid, &ctx, dt, steps, forcing)?;
                for interface in fired {
                    gates.push(gate_row_1d(t_pre, interface, &state.x, &grid));
                }
            }
            steps += 1;
            energy.push((state.t, total_energy_1d(&state, &grid, params)));
        }
        state.t = target;
        snapshots.push((target, state.clone()));
    }

    Ok(RunData1 {
        grid,
        ctx,
        snapshots,
        energy,
        gates: gates.rows,
        gates_dropped: gates.dropped,
        steps,
        wall: started.elapsed(),
        exact: p.exact,
    })
}

fn run_2d(cfg: &RunConfig, p: Problem2) -> Result<RunData2, SolverError> {
    let (n1, n2) = match cfg.resolution {
        None => p.default_resolution,
        Some((n1, n2)) => (n1, n2.unwrap_or(n1)),
    };
    check_resolution(n1, cfg)?;
    check_resolution(n2, cfg)?;
    let grid = Grid2::new(n1, n2, p.domain1, p.domain2, p.periodic)?;
    let bc = if p.periodic { Boundary::Periodic } else { Boundary::Outflow };
    let params = resolve_params(p.params, cfg.gravity, cfg.gamma)?;
    let monitor = resolve_monitor(&p.monitor, cfg)?;
    let targets = output_targets(cfg, &p.output_times);
    let ctx = StepContext { order: cfg.order, scheme: cfg.scheme, bc, params };

    let mut state = problems::initial_state_2d(&p, &grid);
    if cfg.moving_mesh {
        pre_adapt_2d(&p, &grid, bc, &monitor, &mut state);
    }

    let mut energy = vec![(0.0, total_energy_2d(&state, &grid, params))];
    let mut gates = GateLog::new();
    let mut snapshots = Vec::with_capacity(targets.len());
    let mut steps: u64 = 0;
    let started = Instant::now();

    for &target in &targets {
        while target - state.t > TIME_EPS * target.max(1.0) {
            let t_pre = state.t;
            let coords_pre = cfg.moving_mesh.then(|| (state.x1.clone(), state.x2.clone()));
            if cfg.moving_mesh {
                let fields = fields_from_state_2d(&state, &grid, bc);
                let (c1, c2) = propose_mesh_2d(&fields, &state.x1, &state.x2, &grid, &monitor);
                let (dtau, d1, d2) = limit_and_move_2d(&state.x1, &state.x2, &c1, &c2, &grid);
                state.xdot1.fill(0.0);
                state.xdot2.fill(0.0);
                let dt0 = cfl_dt_2d(&state, &grid, &ctx, &cfg.controls);
                state.xdot1 = d1.mapv(|d| dtau * d / dt0);
                state.xdot2 = d2.mapv(|d| dtau * d / dt0);
                let dt = cfl_dt_2d(&state, &grid, &ctx, &cfg.controls).min(dt0);
                let dt = clip_to_target(dt, state.t, target);
                let fired = ssp_rk3_step_2d(&mut state, &grid, &ctx, dt, steps)?;
                let (x1_pre, x2_pre) = coords_pre.as_ref().expect("cloned for moving meshes");
                for event in fired {
                    gates.push(gate_row_2d(t_pre, &event, x1_pre, x2_pre, &grid));
                }
            } else {
                let dt = cfl_dt_2d(&state, &grid, &ctx, &cfg.controls);
                let dt = clip_to_target(dt, state.t, target);
                let fired = ssp_rk3_step_2d(&mut state, &grid, &ctx, dt, steps)?;
                for event in fired {
                    gates.push(gate_row_2d(t_pre, &event, &state.x1, &state.x2, &grid));
                }
            }
            steps += 1;
            energy.push((state.t, total_energy_2d(&state, &grid, params)));
        }
        state.t = target;
        snapshots.push((target, state.clone()));
    }

    let quarter_turn_asymmetry = if p.quarter_turn_symmetric {
        quarter_turn_asymmetry(&snapshots.last().expect("runs produce snapshots").1, &grid)
    } else {
        None
    };

    Ok(RunData2 {
        grid,
        ctx,
        snapshots,
        energy,
        gates: gates.rows,
        gates_dropped: gates.dropped,
        steps,
        wall: started.elapsed(),
        exact: p.exact,
        quarter_turn_asymmetry,
    })
}

/// Physical location of 1D interface `i` (between nodes `i-1` and `i`),
/// clamped to the boundary nodes at the domain ends.
fn gate_row_1d(t: f64, interface: usize, x: &Array1<f64>, grid: &Grid1) -> GateRow {
    let il = interface.saturating_sub(1).min(grid.n - 1) as isize;
    let ir = interface.min(grid.n - 1) as isize;
    GateRow { t, x1: 0.5 * (x[at(il)] + x[at(ir)]), x2: 0.0, axis: 1 }
}

fn gate_row_2d(
    t: f64,
    event: &crate::rhs_2d::GateEvent,
    x1: &ndarray::Array2<f64>,
    x2: &ndarray::Array2<f64>,
    grid: &Grid2,
) -> GateRow {
    let (n_along, _) = if event.axis == 1 { (grid.n1, grid.n2) } else { (grid.n2, grid.n1) };
    let kl = event.interface.saturating_sub(1).min(n_along - 1) as isize;
    let kr = event.interface.min(n_along - 1) as isize;
    let p = event.pencil as isize;
    let (wl, wr) = if event.axis == 1 {
        ([at(kl), at(p)], [at(kr), at(p)])
    } else {
        ([at(p), at(kl)], [at(p), at(kr)])
    };
    GateRow {
        t,
        x1: 0.5 * (x1[wl] + x1[wr]),
        x2: 0.5 * (x2[wl] + x2[wr]),
        axis: event.axis,
    }
}

/// Largest depth mismatch of a square-grid field under a quarter turn about
/// the domain centre. `None` when the grid is not square.
pub fn quarter_turn_asymmetry(state: &State2, grid: &Grid2) -> Option<f64> {
    if grid.n1 != grid.n2 {
        return None;
    }
    let n = grid.n1 as isize;
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in 0..n {
            let a = state.point_state(i, j).h;
            let b = state.point_state(j, n - 1 - i).h;
            worst = worst.max((a - b).abs());
        }
    }
    Some(worst)
}

/// Error norms of snapshot `k` against the problem's exact solution, as
/// `(variable, norms)` lines. `None` when no exact solution is attached.
pub fn exact_error_norms_1d(d: &RunData1, k: usize) -> Option<Vec<(String, Norms)>> {
    let exact = d.exact.as_ref()?;
    let (t, state) = &d.snapshots[k];
    let top = if d.grid.periodic { d.grid.n - 1 } else { d.grid.n };
    let mut e_h = Vec::with_capacity(top);
    let mut e_v1 = Vec::with_capacity(top);
    let mut e_surface = Vec::with_capacity(top);
    for i in 0..top as isize {
        let u = state.point_state(i);
        let want = exact(state.x[at(i)], *t);
        e_h.push((u.h - want.h).abs());
        e_v1.push((u.hv1 / u.h - want.hv1 / want.h).abs());
        e_surface.push((u.h + u.b - want.h - want.b).abs());
    }
    let w = d.grid.dxi();
    Some(vec![
        ("h".into(), norms(e_h, w)),
        ("v1".into(), norms(e_v1, w)),
        ("h+b".into(), norms(e_surface, w)),
    ])
}

pub fn exact_error_norms_2d(d: &RunData2, k: usize) -> Option<Vec<(String, Norms)>> {
    let exact = d.exact.as_ref()?;
    let (t, state) = &d.snapshots[k];
    let (t1, t2) =
        if d.grid.periodic { (d.grid.n1 - 1, d.grid.n2 - 1) } else { (d.grid.n1, d.grid.n2) };
    let mut e_h = Vec::with_capacity(t1 * t2);
    let mut e_v1 = Vec::with_capacity(t1 * t2);
    let mut e_v2 = Vec::with_capacity(t1 * t2);
    let mut e_surface = Vec::with_capacity(t1 * t2);
    for i in 0..t1 as isize {
        for j in 0..t2 as isize {
            let w = [at(i), at(j)];
            let u = state.point_state(i, j);
            let want = exact(state.x1[w], state.x2[w], *t);
            e_h.push((u.h - want.h).abs());
            e_v1.push((u.hv1 / u.h - want.hv1 / want.h).abs());
            e_v2.push((u.hv2 / u.h - want.hv2 / want.h).abs());
            e_surface.push((u.h + u.b - want.h - want.b).abs());
        }
    }
    let w = d.grid.dxi1() * d.grid.dxi2();
    Some(vec![
        ("h".into(), norms(e_h, w)),
        ("v1".into(), norms(e_v1, w)),
        ("v2".into(), norms(e_v2, w)),
        ("h+b".into(), norms(e_surface, w)),
    ])
}

/// Runs the base configuration at each resolution and collects final-time
/// error norms; callers set `accuracy_mode` on the base when the study is
/// meant to expose the spatial order.
pub fn convergence_study(
    base: &RunConfig,
    resolutions: &[(usize, Option<usize>)],
) -> Result<Vec<output::ErrorRow>, SolverError> {
    let mut rows = Vec::with_capacity(resolutions.len());
    for &res in resolutions {
        let mut cfg = base.clone();
        cfg.resolution = Some(res);
        let outcome = execute(&cfg)?;
        let no_exact = || {
            SolverError::Config(format!(
                "problem `{}` has no exact solution; a convergence study needs one",
                base.problem
            ))
        };
        let (label, lines) = match &outcome {
            RunOutcome::One(d) => {
                let lines = exact_error_norms_1d(d, d.snapshots.len() - 1).ok_or_else(no_exact)?;
                (format!("{}", d.grid.n), lines)
            }
            RunOutcome::Two(d) => {
                let lines = exact_error_norms_2d(d, d.snapshots.len() - 1).ok_or_else(no_exact)?;
                (format!("{}x{}", d.grid.n1, d.grid.n2), lines)
            }
        };
        rows.push(output::ErrorRow { resolution: label, lines });
    }
    Ok(rows)
}

/// One sample of a solution cut along a line of constant `x2`.
#[derive(Clone, Copy, Debug)]
pub struct CutSample {
    pub x1: f64,
    pub h: f64,
    pub surface: f64,
}

/// Piecewise-linear sample of the solution along `x2 = c` in physical
/// coordinates: each logical `i`-line contributes the interpolant of the mesh
/// segment that brackets the cut, so the extraction works unchanged on moving
/// meshes. Pencils that never cross the cut contribute nothing.
pub fn cut_line_2d(state: &State2, grid: &Grid2, c: f64) -> Vec<CutSample> {
    let mut out = Vec::with_capacity(grid.n1);
    for i in 0..grid.n1 as isize {
        for j in 0..(grid.n2 as isize - 1) {
            let (wa, wb) = ([at(i), at(j)], [at(i), at(j + 1)]);
            let (ya, yb) = (state.x2[wa], state.x2[wb]);
            if (ya <= c && c <= yb) && ya != yb {
                let th = (c - ya) / (yb - ya);
                let ua = state.point_state(i, j);
                let ub = state.point_state(i, j + 1);
                let lerp = |a: f64, b: f64| a + th * (b - a);
                out.push(CutSample {
                    x1: lerp(state.x1[wa], state.x1[wb]),
                    h: lerp(ua.h, ub.h),
                    surface: lerp(ua.h + ua.b, ub.h + ub.b),
                });
                break;
            }
        }
    }
    out
}

/// Same extraction from parsed solution rows in row-major `(i, j)` order.
pub fn cut_line_from_rows(rows: &[SolutionRow], n1: usize, n2: usize, c: f64) -> Vec<CutSample> {
    assert_eq!(rows.len(), n1 * n2, "row count must match the stated grid");
    let mut out = Vec::with_capacity(n1);
    for i in 0..n1 {
        for j in 0..n2 - 1 {
            let (a, b) = (&rows[i * n2 + j], &rows[i * n2 + j + 1]);
            if (a.x2 <= c && c <= b.x2) && a.x2 != b.x2 {
                let th = (c - a.x2) / (b.x2 - a.x2);
                let lerp = |p: f64, q: f64| p + th * (q - p);
                out.push(CutSample {
                    x1: lerp(a.x1, b.x1),
                    h: lerp(a.h, b.h),
                    surface: lerp(a.h + a.b, b.h + b.b),
                });
                break;
            }
        }
    }
    out
}

/// Mean absolute depth difference between two cut lines: the denser line is
/// interpolated (piecewise-linearly in `x1`) at the sparser line's abscissae,
/// skipping points outside the overlap.
pub fn cut_line_l1_difference(a: &[CutSample], b: &[CutSample]) -> f64 {
    let (coarse, fine) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    let mut sum = 0.0;
    let mut count = 0usize;
    for s in coarse {
        let Some(h) = interpolate_cut(fine, s.x1) else { continue };
        sum += (s.h - h).abs();
        count += 1;
    }
    if count == 0 {
        return f64::INFINITY;
    }
    sum / count as f64
}

fn interpolate_cut(line: &[CutSample], x: f64) -> Option<f64> {
    if line.len() < 2 || x < line[0].x1 || x > line[line.len() - 1].x1 {
        return None;
    }
    let k = line.partition_point(|s| s.x1 <= x).min(line.len() - 1).max(1);
    let (a, b) = (&line[k - 1], &line[k]);
    if a.x1 == b.x1 {
        return Some(a.h);
    }
    let th = (x - a.x1) / (b.x1 - a.x1);
    Some(a.h + th * (b.h - a.h))
}

fn solution_rows_1d(state: &State1, grid: &Grid1) -> Vec<SolutionRow> {
    (0..grid.n as isize)
        .map(|i| {
            let u = state.point_state(i);
            SolutionRow { x1: state.x[at(i)], x2: 0.0, h: u.h, v1: u.hv1 / u.h, v2: 0.0, b: u.b }
        })
        .collect()
}

fn solution_rows_2d(state: &State2, grid: &Grid2) -> Vec<SolutionRow> {
    let mut rows = Vec::with_capacity(grid.n1 * grid.n2);
    for i in 0..grid.n1 as isize {
        for j in 0..grid.n2 as isize {
            let w = [at(i), at(j)];
            let u = state.point_state(i, j);
            rows.push(SolutionRow {
                x1: state.x1[w],
                x2: state.x2[w],
                h: u.h,
                v1: u.hv1 / u.h,
                v2: u.hv2 / u.h,
                b: u.b,
            });
        }
    }
    rows
}

/// Writes the run's artifacts under `dir`: `solution-XXX.csv` and
/// `mesh-XXX.csv` per output time, `energy.csv`, `gates.csv`, and a
/// `meta.txt` stating the grid shape, plus `solution-final.csv` naming the
/// last snapshot for reference consumers.
pub fn write_run_artifacts(outcome: &RunOutcome, dir: &Path) -> Result<(), SolverError> {
    match outcome {
        RunOutcome::One(d) => {
            for (k, (_, state)) in d.snapshots.iter().enumerate() {
                let csv = output::render_solution_csv(solution_rows_1d(state, &d.grid));
                output::write_artifact(dir, &format!("solution-{k:03}.csv"), &csv)?;
                let mesh = output::render_mesh_csv(
                    (0..d.grid.n).map(|i| MeshRow { i, j: 0, x1: state.x[at(i as isize)], x2: 0.0 }),
                );
                output::write_artifact(dir, &format!("mesh-{k:03}.csv"), &mesh)?;
            }
            let last = &d.snapshots.last().expect("runs produce snapshots").1;
            let final_csv = output::render_solution_csv(solution_rows_1d(last, &d.grid));
            output::write_artifact(dir, "solution-final.csv", &final_csv)?;
            output::write_artifact(dir, "energy.csv", &output::render_energy_csv(&d.energy))?;
            output::write_artifact(dir, "gates.csv", &output::render_gates_csv(&d.gates))?;
            let meta = format!(
                "dimension=1\nn1={}\nn2=1\nperiodic={}\nfinal-time={}\n",
                d.grid.n,
                d.grid.periodic,
                output::fmt17(d.snapshots.last().expect("runs produce snapshots").0),
            );
            output::write_artifact(dir, "meta.txt", &meta)?;
        }
        RunOutcome::Two(d) => {
            for (k, (_, state)) in d.snapshots.iter().enumerate() {
                let csv = output::render_solution_csv(solution_rows_2d(state, &d.grid));
                output::write_artifact(dir, &format!("solution-{k:03}.csv"), &csv)?;
                let mut mesh_rows = Vec::with_capacity(d.grid.n1 * d.grid.n2);
                for i in 0..d.grid.n1 {
                    for j in 0..d.grid.n2 {
                        let w = [at(i as isize), at(j as isize)];
                        mesh_rows.push(MeshRow { i, j, x1: state.x1[w], x2: state.x2[w] });
                    }
                }
                let mesh = output::render_mesh_csv(mesh_rows);
                output::write_artifact(dir, &format!("mesh-{k:03}.csv"), &mesh)?;
            }
            let last = &d.snapshots.last().expect("runs produce snapshots").1;
            let final_csv = output::render_solution_csv(solution_rows_2d(last, &d.grid));
            output::write_artifact(dir, "solution-final.csv", &final_csv)?;
            output::write_artifact(dir, "energy.csv", &output::render_energy_csv(&d.energy))?;
            output::write_artifact(dir, "gates.csv", &output::render_gates_csv(&d.gates))?;
            let meta = format!(
                "dimension=2\nn1={}\nn2={}\nperiodic={}\nfinal-time={}\n",
                d.grid.n1,
                d.grid.n2,
                d.grid.periodic,
                output::fmt17(d.snapshots.last().expect("runs produce snapshots").0),
            );
            output::write_artifact(dir, "meta.txt", &meta)?;
        }
    }
    Ok(())
}

/// A cached reference run: where it lives and, when it was produced by this
/// call, the in-memory outcome.
pub struct ReferenceHandle {
    pub run_id: String,
    pub dir: PathBuf,
    /// `Some` when the reference was computed by this call rather than found
    /// in the cache.
    pub fresh: Option<RunOutcome>,
}

/// Returns the cached reference run for `cfg`, computing and storing it on
/// first use. The cache key is the content hash of the producing config; a
/// key whose stored config text disagrees is a hard error, never silently
/// reused.
pub fn ensure_reference(cfg: &RunConfig, cache_root: &Path) -> Result<ReferenceHandle, SolverError> {
    let run_id = cfg.content_hash();
    let dir = cache_root.join("references").join(&run_id);
    let marker = dir.join("config.txt");
    if marker.exists() {
        let stored = fs::read_to_string(&marker)?;
        if stored != cfg.canonical_string() {
            return Err(SolverError::Config(format!(
                "reference cache {run_id} holds a different config; refusing to reuse it"
            )));
        }
        return Ok(ReferenceHandle { run_id, dir, fresh: None });
    }
    let outcome = execute(cfg)?;
    write_run_artifacts(&outcome, &dir)?;
    fs::write(&marker, cfg.canonical_string())?;
    Ok(ReferenceHandle { run_id, dir, fresh: Some(outcome) })
}

/// Grid shape stored next to reference artifacts.
pub struct ReferenceMeta {
    pub dimension: usize,
    pub n1: usize,
    pub n2: usize,
    pub periodic: bool,
}

pub fn read_reference_meta(dir: &Path) -> Result<ReferenceMeta, SolverError> {
    let text = fs::read_to_string(dir.join("meta.txt"))?;
    let field = |key: &str| -> Result<String, SolverError> {
        text.lines()
            .find_map(|l| l.strip_prefix(key).and_then(|r| r.strip_prefix('=')))
            .map(str::to_string)
            .ok_or_else(|| SolverError::Config(format!("reference meta lacks `{key}`")))
    };
    let parse = |key: &str| -> Result<usize, SolverError> {
        field(key)?
            .parse()
            .map_err(|_| SolverError::Config(format!("reference meta `{key}` is not a number")))
    };
    Ok(ReferenceMeta {
        dimension: parse("dimension")?,
        n1: parse("n1")?,
        n2: parse("n2")?,
        periodic: field("periodic")? == "true",
    })
}

/// Error norms of a finished run against a stored reference, available only
/// when the config declares the reference's run id. 1D compares node values
/// against the piecewise-linear interpolant of the reference in physical
/// coordinates; 2D compares depth along the cut line through the middle of
/// the second coordinate.
pub fn compare_to_reference(
    cfg: &RunConfig,
    outcome: &RunOutcome,
    cache_root: &Path,
) -> Result<Vec<(String, Norms)>, SolverError> {
    let Some(declared) = &cfg.reference else {
        return Err(SolverError::Config(
            "error report against a stored solution requires a declared reference run id \
             (set reference.run-id to the producing config's content hash)"
                .into(),
        ));
    };
    let dir = cache_root.join("references").join(declared);
    if !dir.join("config.txt").exists() {
        return Err(SolverError::Config(format!(
            "declared reference {declared} not found under {}",
            dir.display()
        )));
    }
    let meta = read_reference_meta(&dir)?;
    let rows = output::parse_solution_csv(&fs::read_to_string(dir.join("solution-final.csv"))?)
        .map_err(SolverError::Config)?;
    match outcome {
        RunOutcome::One(d) => {
            if meta.dimension != 1 {
                return Err(SolverError::Config(
                    "reference dimension does not match the run".into(),
                ));
            }
            let (_, state) = d.snapshots.last().expect("runs produce snapshots");
            let line: Vec<CutSample> =
                rows.iter().map(|r| CutSample { x1: r.x1, h: r.h, surface: r.h + r.b }).collect();
            let surface_line: Vec<CutSample> =
                line.iter().map(|s| CutSample { x1: s.x1, h: s.surface, surface: s.surface }).collect();
            let top = if d.grid.periodic { d.grid.n - 1 } else { d.grid.n };
            let mut e_h = Vec::with_capacity(top);
            let mut e_surface = Vec::with_capacity(top);
            for i in 0..top as isize {
                let u = state.point_state(i);
                let x = state.x[at(i)];
                if let Some(h_ref) = interpolate_cut(&line, x) {
                    e_h.push((u.h - h_ref).abs());
                }
                if let Some(s_ref) = interpolate_cut(&surface_line, x) {
                    e_surface.push((u.h + u.b - s_ref).abs());
                }
            }
            let w = d.grid.dxi();
            Ok(vec![("h".into(), norms(e_h, w)), ("h+b".into(), norms(e_surface, w))])
        }
        RunOutcome::Two(d) => {
            if meta.dimension != 2 {
                return Err(SolverError::Config(
                    "reference dimension does not match the run".into(),
                ));
            }
            let (_, state) = d.snapshots.last().expect("runs produce snapshots");
            let c = 0.5 * (d.grid.a2 + d.grid.b2);
            let run_cut = cut_line_2d(state, &d.grid, c);
            let ref_cut = cut_line_from_rows(&rows, meta.n1, meta.n2, c);
            let l1 = cut_line_l1_difference(&run_cut, &ref_cut);
            Ok(vec![(format!("h(cut x2={c})"), Norms { l1, linf: l1 })])
        }
    }
}
