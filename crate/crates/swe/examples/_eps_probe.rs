use swe::boundary::Boundary;
use swe::config::RunConfig;
use swe::driver::{self, RunOutcome};
use swe::grid::at;
use swe::mesh::{limit_and_move_1d, propose_mesh_1d, MonitorParams};
use swe::Scheme;

fn main() {
    // recover the state mid-run, then watch the mesh proposal evolve
    let mut cfg = RunConfig::default();
    cfg.problem = "perturbation-1d".into();
    cfg.scheme = Scheme::EnergyStable;
    cfg.moving_mesh = true;
    cfg.resolution = Some((200, None));
    cfg.options.epsilon = 0.001;
    cfg.end_time = Some(0.1);
    cfg.output_times = Some(vec![0.1]);
    let outcome = driver::execute(&cfg).expect("benign");
    let RunOutcome::One(d) = outcome else { unreachable!() };
    let (_, state) = &d.snapshots[0];
    let grid = &d.grid;
    let monitor = MonitorParams::default();

    // one proposal from the converged run state
    let fields = swe::driver::fields_from_state_1d(state, grid, Boundary::Outflow);
    let candidate = propose_mesh_1d(&fields, &state.x, grid, &monitor);
    let (dtau, delta) = limit_and_move_1d(&state.x, &candidate, grid);
    let dmax = (0..grid.n as isize).map(|i| delta[at(i)].abs()).fold(0.0_f64, f64::max);
    let davg = (0..grid.n as isize).map(|i| delta[at(i)].abs()).sum::<f64>() / grid.n as f64;
    println!("dtau {dtau:.3}  max|delta| {dmax:.3e}  avg|delta| {davg:.3e}  (uniform gap {:.3e})", 10.0f64/999.0);

    // iterate the proposal map with frozen fields: does it settle or cycle?
    let mut x = state.x.clone();
    for k in 0..12 {
        let cand = propose_mesh_1d(&fields, &x, grid, &monitor);
        let (dt2, dl2) = limit_and_move_1d(&x, &cand, grid);
        let m = (0..grid.n as isize).map(|i| dl2[at(i)].abs()).fold(0.0_f64, f64::max);
        for i in 0..grid.n as isize {
            x[at(i)] += dt2 * dl2[at(i)];
        }
        println!("  frozen-field sweep {k}: dtau {dt2:.3} max|delta| {m:.3e}");
    }
}
