//! Built-in problem registry: domains, physical constants, initial data,
//! boundary treatment, monitor recipes, and — where known — forcing terms and
//! exact solutions.
//!
//! Initial data for periodic grids is canonicalised so the duplicated end
//! nodes copy their images bitwise; the wrap convention of the halo fills
//! assumes exactly that.

use crate::boundary::Boundary;
use crate::error::SolverError;
use crate::mesh::{MonitorComponent, MonitorParams, MonitorVariable};
use crate::metrics::{Grid1, Grid2};
use crate::state::{Conserved1, Conserved2, PhysicsParams};
use crate::time::{State1, State2};

const PI: f64 = std::f64::consts::PI;

/// A 1D experiment: everything the driver needs to set up and assess a run.
pub struct Problem1 {
    pub name: &'static str,
    pub domain: (f64, f64),
    pub periodic: bool,
    pub params: PhysicsParams,
    pub default_resolution: usize,
    pub output_times: Vec<f64>,
    pub monitor: MonitorParams,
    pub init: Box<dyn Fn(f64) -> Conserved1 + Send + Sync>,
    pub forcing: Option<Box<dyn Fn(f64, f64) -> [f64; 3] + Send + Sync>>,
    pub exact: Option<Box<dyn Fn(f64, f64) -> Conserved1 + Send + Sync>>,
}

/// A 2D experiment; `exact` takes `(x1, x2, t)`.
pub struct Problem2 {
    pub name: &'static str,
    pub domain1: (f64, f64),
    pub domain2: (f64, f64),
    pub periodic: bool,
    pub params: PhysicsParams,
    pub default_resolution: (usize, usize),
    pub output_times: Vec<f64>,
    pub monitor: MonitorParams,
    /// Whether the solution is invariant under quarter turns about the domain
    /// centre, enabling the rotation-asymmetry diagnostic.
    pub quarter_turn_symmetric: bool,
    pub init: Box<dyn Fn(f64, f64) -> Conserved2 + Send + Sync>,
    pub exact: Option<Box<dyn Fn(f64, f64, f64) -> Conserved2 + Send + Sync>>,
}

/// One entry of the registry.
pub enum ProblemSpec {
    One(Problem1),
    Two(Problem2),
}

impl ProblemSpec {
    pub fn boundary(&self) -> Boundary {
        let periodic = match self {
            ProblemSpec::One(p) => p.periodic,
            ProblemSpec::Two(p) => p.periodic,
        };
        if periodic {
            Boundary::Periodic
        } else {
            Boundary::Outflow
        }
    }
}

/// Variant knobs shared across the registry.
#[derive(Clone, Copy, Debug)]
pub struct ProblemOptions {
    /// Selects the discontinuous bottom variant where one exists.
    pub blocky_bottom: bool,
    /// Perturbation amplitude for the lake-disturbance problems.
    pub epsilon: f64,
    /// Runs the 1D perturbation problem on the enlarged domain used for
    /// energy histories, far from the boundaries.
    pub wide_domain: bool,
}

impl Default for ProblemOptions {
    fn default() -> Self {
        Self { blocky_bottom: false, epsilon: 0.2, wide_domain: false }
    }
}

/// Registry names, in presentation order.
pub const PROBLEM_NAMES: [&str; 8] = [
    "manufactured-1d",
    "lake-at-rest-1d",
    "perturbation-1d",
    "vortex-2d",
    "lake-at-rest-2d",
    "perturbation-2d",
    "dam-break-circular",
    "dam-break-bed",
];

/// One-line description for the registry listing.
pub fn describe(name: &str) -> &'static str {
    match name {
        "manufactured-1d" => "1D accuracy test with a forced exact solution (periodic, g=1)",
        "lake-at-rest-1d" => "1D lake at rest over a Gaussian or square-step bottom (g=1)",
        "perturbation-1d" => "1D small disturbance over a cosine hump (g=9.812)",
        "vortex-2d" => "2D travelling vortex with an exact solution (periodic, g=1)",
        "lake-at-rest-2d" => "2D lake at rest over a Gaussian or block bottom (g=1)",
        "perturbation-2d" => "2D small disturbance over an oval hump (g=9.812)",
        "dam-break-circular" => "2D circular dam break over a flat bottom (g=9.812)",
        "dam-break-bed" => "2D circular dam break over a cosine river bed (g=9.812)",
        _ => "",
    }
}

fn surface_monitor(theta: f64) -> MonitorParams {
    MonitorParams {
        components: vec![MonitorComponent { variable: MonitorVariable::Surface, theta }],
        ..MonitorParams::default()
    }
}

fn depth_monitor(theta: f64) -> MonitorParams {
    MonitorParams {
        components: vec![MonitorComponent { variable: MonitorVariable::Depth, theta }],
        ..MonitorParams::default()
    }
}

fn manufactured_state(x: f64, t: f64) -> Conserved1 {
    Conserved1 {
        h: 4.0 + (PI * x).cos() * (PI * t).cos(),
        hv1: (PI * x).sin() * (PI * t).sin(),
        b: 1.5 + (PI * x).sin(),
    }
}

fn manufactured_forcing(x: f64, t: f64) -> [f64; 3] {
    let (cx, sx) = ((PI * x).cos(), (PI * x).sin());
    let (ct, st) = ((PI * t).cos(), (PI * t).sin());
    let den = ct * cx + 4.0;
    let momentum = 4.0 * PI * cx + PI * ct * cx * cx
        - 3.0 * PI * ct * sx
        - PI * ct * ct * cx * sx
        + PI * ct * st * st * sx * sx * sx / (den * den)
        + 2.0 * PI * cx * st * st * sx / den;
    [0.0, momentum, 0.0]
}

fn manufactured_1d() -> Problem1 {
    Problem1 {
        name: "manufactured-1d",
        domain: (0.0, 2.0),
        periodic: true,
        params: PhysicsParams::with_gravity(1.0),
        default_resolution: 100,
        output_times: vec![0.2],
        monitor: surface_monitor(10.0),
        init: Box::new(|x| manufactured_state(x, 0.0)),
        forcing: Some(Box::new(manufactured_forcing)),
        exact: Some(Box::new(manufactured_state)),
    }
}

fn gaussian_bump_1d(x: f64) -> f64 {
    5.0 * (-0.4 * (x - 5.0) * (x - 5.0)).exp()
}

fn square_step_1d(x: f64) -> f64 {
    if (4.0..=8.0).contains(&x) {
        4.0
    } else {
        0.0
    }
}

fn lake_at_rest_1d(opts: &ProblemOptions) -> Problem1 {
    let bottom: fn(f64) -> f64 = if opts.blocky_bottom { square_step_1d } else { gaussian_bump_1d };
    Problem1 {
        name: "lake-at-rest-1d",
        domain: (0.0, 10.0),
        periodic: false,
        params: PhysicsParams::with_gravity(1.0),
        default_resolution: 100,
        output_times: vec![0.2],
        monitor: depth_monitor(100.0),
        init: Box::new(move |x| {
            let b = bottom(x);
            Conserved1 { h: 10.0 - b, hv1: 0.0, b }
        }),
        forcing: None,
        exact: Some(Box::new(move |x, _t| {
            let b = bottom(x);
            Conserved1 { h: 10.0 - b, hv1: 0.0, b }
        })),
    }
}

fn perturbation_1d(opts: &ProblemOptions) -> Problem1 {
    let epsilon = opts.epsilon;
    let (domain, default_resolution) =
        if opts.wide_domain { ((-5.0, 5.0), 1000) } else { ((0.0, 2.0), 200) };
    Problem1 {
        name: "perturbation-1d",
        domain,
        periodic: false,
        params: PhysicsParams::with_gravity(9.812),
        default_resolution,
        output_times: vec![0.2],
        monitor: surface_monitor(100.0),
        init: Box::new(move |x| {
            let b = if (1.4..=1.6).contains(&x) {
                0.25 * ((10.0 * PI * (x - 1.5)).cos() + 1.0)
            } else {
                0.0
            };
            let h = if (1.1..=1.2).contains(&x) { 1.0 - b + epsilon } else { 1.0 - b };
            Conserved1 { h, hv1: 0.0, b }
        }),
        forcing: None,
        exact: None,
    }
}

/// Rotating steady state carried across the domain at unit diagonal speed;
/// periodic images keep the evaluation inside one fundamental cell.
fn vortex_state(x1: f64, x2: f64, t: f64) -> Conserved2 {
    let wrap = |z: f64| (z + 10.0).rem_euclid(20.0) - 10.0;
    let (dx, dy) = (wrap(x1 - t), wrap(x2 - t));
    let r2 = dx * dx + dy * dy;
    let h = 1.0 - 0.2 * 0.2 * (1.0 - r2).exp() / 2.0;
    let swirl = 0.2 * (0.5 * (1.0 - r2)).exp();
    let v1 = 1.0 - swirl * dy;
    let v2 = 1.0 + swirl * dx;
    Conserved2 { h, hv1: h * v1, hv2: h * v2, b: 0.0 }
}

fn vortex_2d() -> Problem2 {
    let mut monitor = surface_monitor(15.0);
    monitor.laplacian = Some(MonitorComponent { variable: MonitorVariable::Surface, theta: 10.0 });
    Problem2 {
        name: "vortex-2d",
        domain1: (-10.0, 10.0),
        domain2: (-10.0, 10.0),
        periodic: true,
        params: PhysicsParams::with_gravity(1.0),
        default_resolution: (40, 40),
        output_times: vec![2.0, 4.0],
        monitor,
        quarter_turn_symmetric: false,
        init: Box::new(|x1, x2| vortex_state(x1, x2, 0.0)),
        exact: Some(Box::new(vortex_state)),
    }
}

fn gaussian_bump_2d(x1: f64, x2: f64) -> f64 {
    0.8 * (-50.0 * ((x1 - 0.5) * (x1 - 0.5) + (x2 - 0.5) * (x2 - 0.5))).exp()
}

fn block_2d(x1: f64, x2: f64) -> f64 {
    if (0.3..=0.5).contains(&x1) && (0.3..=0.5).contains(&x2) {
        0.5
    } else {
        0.0
    }
}

fn lake_at_rest_2d(opts: &ProblemOptions) -> Problem2 {
    let bottom: fn(f64, f64) -> f64 = if opts.blocky_bottom { block_2d } else { gaussian_bump_2d };
    Problem2 {
        name: "lake-at-rest-2d",
        domain1: (0.0, 1.0),
        domain2: (0.0, 1.0),
        periodic: false,
        params: PhysicsParams::with_gravity(1.0),
        default_resolution: (100, 100),
        output_times: vec![0.1],
        monitor: depth_monitor(100.0),
        quarter_turn_symmetric: false,
        init: Box::new(move |x1, x2| {
            let b = bottom(x1, x2);
            Conserved2 { h: 1.0 - b, hv1: 0.0, hv2: 0.0, b }
        }),
        exact: Some(Box::new(move |x1, x2, _t| {
            let b = bottom(x1, x2);
            Conserved2 { h: 1.0 - b, hv1: 0.0, hv2: 0.0, b }
        })),
    }
}

fn perturbation_2d(opts: &ProblemOptions) -> Problem2 {
    let epsilon = opts.epsilon;
    Problem2 {
        name: "perturbation-2d",
        domain1: (0.0, 2.0),
        domain2: (0.0, 1.0),
        periodic: false,
        params: PhysicsParams::with_gravity(9.812),
        default_resolution: (300, 150),
        output_times: vec![0.12, 0.24, 0.36, 0.48, 0.6],
        monitor: surface_monitor(800.0),
        quarter_turn_symmetric: false,
        init: Box::new(move |x1, x2| {
            let b = 0.8
                * (-5.0 * (x1 - 0.9) * (x1 - 0.9) - 50.0 * (x2 - 0.5) * (x2 - 0.5)).exp();
            let h = if (0.05..=0.15).contains(&x1) { 1.0 - b + epsilon } else { 1.0 - b };
            Conserved2 { h, hv1: 0.0, hv2: 0.0, b }
        }),
        exact: None,
    }
}

fn dam_break_circular() -> Problem2 {
    Problem2 {
        name: "dam-break-circular",
        domain1: (0.0, 50.0),
        domain2: (0.0, 50.0),
        periodic: false,
        params: PhysicsParams::with_gravity(9.812),
        default_resolution: (200, 200),
        output_times: vec![0.2, 0.4, 0.6, 0.8, 1.0],
        monitor: surface_monitor(800.0),
        quarter_turn_symmetric: true,
        init: Box::new(|x1, x2| {
            let r = ((x1 - 25.0) * (x1 - 25.0) + (x2 - 25.0) * (x2 - 25.0)).sqrt();
            let h = if r <= 11.0 { 10.0 } else { 1.0 };
            Conserved2 { h, hv1: 0.0, hv2: 0.0, b: 0.0 }
        }),
        exact: None,
    }
}

fn dam_break_bed() -> Problem2 {
    Problem2 {
        name: "dam-break-bed",
        domain1: (0.0, 2.0),
        domain2: (0.0, 2.0),
        periodic: false,
        params: PhysicsParams::with_gravity(9.812),
        default_resolution: (200, 200),
        output_times: vec![0.15],
        monitor: surface_monitor(800.0),
        quarter_turn_symmetric: false,
        init: Box::new(|x1, x2| {
            let rb = ((x1 - 1.5) * (x1 - 1.5) + (x2 - 1.0) * (x2 - 1.0)).sqrt();
            let b = if rb <= 0.5 {
                0.125 * ((2.0 * PI * (x1 - 0.5)).cos() + 1.0) * ((2.0 * PI * x2).cos() + 1.0)
            } else {
                0.0
            };
            let rh = ((x1 - 1.25) * (x1 - 1.25) + (x2 - 1.0) * (x2 - 1.0)).sqrt();
            let h = if rh <= 0.1 { 1.1 - b } else { 0.6 - b };
            Conserved2 { h, hv1: 0.0, hv2: 0.0, b }
        }),
        exact: None,
    }
}

/// Builds a registry entry by name.
pub fn build(name: &str, opts: &ProblemOptions) -> Result<ProblemSpec, SolverError> {
    match name {
        "manufactured-1d" => Ok(ProblemSpec::One(manufactured_1d())),
        "lake-at-rest-1d" => Ok(ProblemSpec::One(lake_at_rest_1d(opts))),
        "perturbation-1d" => Ok(ProblemSpec::One(perturbation_1d(opts))),
        "vortex-2d" => Ok(ProblemSpec::Two(vortex_2d())),
        "lake-at-rest-2d" => Ok(ProblemSpec::Two(lake_at_rest_2d(opts))),
        "perturbation-2d" => Ok(ProblemSpec::Two(perturbation_2d(opts))),
        "dam-break-circular" => Ok(ProblemSpec::Two(dam_break_circular())),
        "dam-break-bed" => Ok(ProblemSpec::Two(dam_break_bed())),
        _ => Err(SolverError::Config(format!(
            "unknown problem `{name}`; available: {}",
            PROBLEM_NAMES.join(", ")
        ))),
    }
}

/// Samples the initial data on the uniform mesh; the duplicated end node of a
/// periodic grid copies node zero bitwise.
pub fn initial_state_1d(p: &Problem1, grid: &Grid1) -> State1 {
    let mut state = State1::new(grid);
    for i in 0..grid.n as isize {
        state.set_point(i, (p.init)(grid.xi(i)));
    }
    if grid.periodic {
        state.set_point((grid.n - 1) as isize, state.point_state(0));
    }
    state
}

/// 2D analogue of [`initial_state_1d`]; both duplicated edges (and the far
/// corner) copy their images.
pub fn initial_state_2d(p: &Problem2, grid: &Grid2) -> State2 {
    let mut state = State2::new(grid);
    for i in 0..grid.n1 as isize {
        for j in 0..grid.n2 as isize {
            state.set_point(i, j, (p.init)(grid.xi1(i), grid.xi2(j)));
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
    state
}
