//! Adaptive mesh redistribution: a gradient monitor built from the solution,
//! low-pass smoothing, Jacobi sweeps of the discrete Winslow mesh equations,
//! and a movement limiter that guards against tangling.
//!
//! Redistribution happens in computational space once per time step from the
//! solution at the step start. Endpoints (1D) and corners (2D) never move;
//! 2D edge nodes slide along their boundary so the physical domain stays
//! rectangular. The accepted move is `dtau * delta`, and the mesh velocity
//! handed to the integrator is that displacement divided by the step.

use ndarray::{Array1, Array2};

use crate::metrics::{at, Grid1, Grid2};
use crate::rhs_1d::Fields1;
use crate::rhs_2d::Fields2;

/// Solution quantity feeding one monitor term.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MonitorVariable {
    /// Water depth `h`.
    Depth,
    /// Surface level `h + b`.
    Surface,
}

/// One monitor term: a variable and its weight.
#[derive(Clone, Copy, Debug)]
pub struct MonitorComponent {
    pub variable: MonitorVariable,
    pub theta: f64,
}

/// Monitor recipe plus iteration counts for smoothing and mesh relaxation.
#[derive(Clone, Debug)]
pub struct MonitorParams {
    /// Gradient terms `theta * (|grad sigma| / max |grad sigma|)^2`.
    pub components: Vec<MonitorComponent>,
    /// Optional curvature term `theta * |lap sigma| / max |lap sigma|`.
    pub laplacian: Option<MonitorComponent>,
    pub smoothing_passes: usize,
    pub jacobi_iterations: usize,
}

impl Default for MonitorParams {
    fn default() -> Self {
        Self {
            components: vec![MonitorComponent { variable: MonitorVariable::Surface, theta: 100.0 }],
            laplacian: None,
            smoothing_passes: 5,
            jacobi_iterations: 10,
        }
    }
}

fn sigma_1d(fields: &Fields1, variable: MonitorVariable, i: isize) -> f64 {
    match variable {
        MonitorVariable::Depth => fields.h[at(i)],
        MonitorVariable::Surface => fields.h[at(i)] + fields.b[at(i)],
    }
}

fn sigma_2d(fields: &Fields2, variable: MonitorVariable, i: isize, j: isize) -> f64 {
    let w = [at(i), at(j)];
    match variable {
        MonitorVariable::Depth => fields.h[w],
        MonitorVariable::Surface => fields.h[w] + fields.b[w],
    }
}

/// Monitor value field `omega >= 1` on the interior nodes. Gradients and
/// curvatures use second-order central differences in computational space
/// (the fields' halos must be filled) and are normalised by their maxima;
/// a vanishing maximum contributes nothing.
pub fn monitor_1d(fields: &Fields1, grid: &Grid1, params: &MonitorParams) -> Array1<f64> {
    let n = grid.n as isize;
    let inv2 = 1.0 / (2.0 * grid.dxi());
    let mut acc = vec![0.0; grid.n];

    for comp in &params.components {
        let grad: Vec<f64> = (0..n)
            .map(|i| {
                (sigma_1d(fields, comp.variable, i + 1) - sigma_1d(fields, comp.variable, i - 1))
                    .abs()
                    * inv2
            })
            .collect();
        let gmax = grad.iter().cloned().fold(0.0, f64::max);
        if gmax > 0.0 {
            for (a, g) in acc.iter_mut().zip(&grad) {
                let r = g / gmax;
                *a += comp.theta * r * r;
            }
        }
    }
    if let Some(lap) = &params.laplacian {
        let invd2 = 1.0 / (grid.dxi() * grid.dxi());
        let curv: Vec<f64> = (0..n)
            .map(|i| {
                let (sm, s0, sp) = (
                    sigma_1d(fields, lap.variable, i - 1),
                    sigma_1d(fields, lap.variable, i),
                    sigma_1d(fields, lap.variable, i + 1),
                );
                ((sp - 2.0 * s0 + sm) * invd2).abs()
            })
            .collect();
        let cmax = curv.iter().cloned().fold(0.0, f64::max);
        if cmax > 0.0 {
            for (a, c) in acc.iter_mut().zip(&curv) {
                *a += lap.theta * c / cmax;
            }
        }
    }

    let mut omega = grid.alloc();
    for (i, a) in acc.iter().enumerate() {
        omega[at(i as isize)] = (1.0 + a).sqrt();
    }
    omega
}

/// 2D monitor; see [`monitor_1d`].
pub fn monitor_2d(fields: &Fields2, grid: &Grid2, params: &MonitorParams) -> Array2<f64> {
    let (n1, n2) = (grid.n1 as isize, grid.n2 as isize);
    let (inv1, inv2) = (1.0 / (2.0 * grid.dxi1()), 1.0 / (2.0 * grid.dxi2()));
    let mut acc = Array2::<f64>::zeros((grid.n1, grid.n2));

    for comp in &params.components {
        let mut grad = Array2::<f64>::zeros((grid.n1, grid.n2));
        let mut gmax = 0.0_f64;
        for i in 0..n1 {
            for j in 0..n2 {
                let g1 = (sigma_2d(fields, comp.variable, i + 1, j)
                    - sigma_2d(fields, comp.variable, i - 1, j))
                    * inv1;
                let g2 = (sigma_2d(fields, comp.variable, i, j + 1)
                    - sigma_2d(fields, comp.variable, i, j - 1))
                    * inv2;
                let g = g1.hypot(g2);
                grad[[i as usize, j as usize]] = g;
                gmax = gmax.max(g);
            }
        }
        if gmax > 0.0 {
            for (a, g) in acc.iter_mut().zip(grad.iter()) {
                let r = g / gmax;
                *a += comp.theta * r * r;
            }
        }
    }
    if let Some(lap) = &params.laplacian {
        let (invd1, invd2) =
            (1.0 / (grid.dxi1() * grid.dxi1()), 1.0 / (grid.dxi2() * grid.dxi2()));
        let mut curv = Array2::<f64>::zeros((grid.n1, grid.n2));
        let mut cmax = 0.0_f64;
        for i in 0..n1 {
            for j in 0..n2 {
                let s0 = sigma_2d(fields, lap.variable, i, j);
                let l1 = (sigma_2d(fields, lap.variable, i + 1, j) - 2.0 * s0
                    + sigma_2d(fields, lap.variable, i - 1, j))
                    * invd1;
                let l2 = (sigma_2d(fields, lap.variable, i, j + 1) - 2.0 * s0
                    + sigma_2d(fields, lap.variable, i, j - 1))
                    * invd2;
                let c = (l1 + l2).abs();
                curv[[i as usize, j as usize]] = c;
                cmax = cmax.max(c);
            }
        }
        if cmax > 0.0 {
            for (a, c) in acc.iter_mut().zip(curv.iter()) {
                *a += lap.theta * c / cmax;
            }
        }
    }

    let mut omega = grid.alloc();
    for i in 0..n1 {
        for j in 0..n2 {
            omega[[at(i), at(j)]] = (1.0 + acc[[i as usize, j as usize]]).sqrt();
        }
    }
    omega
}

/// Applies the low-pass kernel `(1/4, 1/2, 1/4)` the given number of times,
/// clamping the stencil at the interior boundary. Bounds are preserved.
pub fn smooth_monitor_1d(omega: &mut Array1<f64>, grid: &Grid1, passes: usize) {
    let n = grid.n as isize;
    let clamp = |i: isize| at(i.clamp(0, n - 1));
    for _ in 0..passes {
        let src = omega.clone();
        for i in 0..n {
            omega[at(i)] =
                0.25 * src[clamp(i - 1)] + 0.5 * src[clamp(i)] + 0.25 * src[clamp(i + 1)];
        }
    }
}

/// Applies the nine-point low-pass kernel (center 1/4, edges 1/8, corners
/// 1/16) the given number of times, clamping at the interior boundary.
pub fn smooth_monitor_2d(omega: &mut Array2<f64>, grid: &Grid2, passes: usize) {
    let (n1, n2) = (grid.n1 as isize, grid.n2 as isize);
    let weights = [0.25, 0.5, 0.25];
    for _ in 0..passes {
        let src = omega.clone();
        for i in 0..n1 {
            for j in 0..n2 {
                let mut acc = 0.0;
                for (di, wi) in (-1..=1).zip(weights) {
                    for (dj, wj) in (-1..=1).zip(weights) {
                        let ci = at((i + di).clamp(0, n1 - 1));
                        let cj = at((j + dj).clamp(0, n2 - 1));
                        acc += wi * wj * src[[ci, cj]];
                    }
                }
                omega[[at(i), at(j)]] = acc;
            }
        }
    }
}

/// One Jacobi sweep of the 1D mesh equation with fixed endpoints: each
/// interior node moves to the monitor-weighted average of its neighbours, so
/// the fixed point equidistributes `(omega_i + omega_{i+1}) * gap`.
pub fn jacobi_sweep_1d(x: &Array1<f64>, omega: &Array1<f64>, grid: &Grid1) -> Array1<f64> {
    let n = grid.n as isize;
    let mut out = x.clone();
    for i in 1..n - 1 {
        let ap = omega[at(i)] + omega[at(i + 1)];
        let am = omega[at(i)] + omega[at(i - 1)];
        out[at(i)] = (ap * x[at(i + 1)] + am * x[at(i - 1)]) / (ap + am);
    }
    out
}

/// One Jacobi sweep of the 2D Winslow equations. Interior nodes solve the
/// five-point relation with coefficients `(omega_c + omega_nb) / dxi^2` for
/// both coordinates; corners stay put; edge nodes apply the tangential 1D
/// relation so they slide along the boundary.
pub fn jacobi_sweep_2d(
    x1: &Array2<f64>,
    x2: &Array2<f64>,
    omega: &Array2<f64>,
    grid: &Grid2,
) -> (Array2<f64>, Array2<f64>) {
    let (n1, n2) = (grid.n1 as isize, grid.n2 as isize);
    let inv1 = 1.0 / (grid.dxi1() * grid.dxi1());
    let inv2 = 1.0 / (grid.dxi2() * grid.dxi2());
    let mut o1 = x1.clone();
    let mut o2 = x2.clone();
    for i in 0..n1 {
        for j in 0..n2 {
            let on_i = i == 0 || i == n1 - 1;
            let on_j = j == 0 || j == n2 - 1;
            let w = [at(i), at(j)];
            let oc = omega[w];
            if on_i && on_j {
                continue;
            }
            if on_i {
                let ap = (oc + omega[[at(i), at(j + 1)]]) * inv2;
                let am = (oc + omega[[at(i), at(j - 1)]]) * inv2;
                o2[w] = (ap * x2[[at(i), at(j + 1)]] + am * x2[[at(i), at(j - 1)]]) / (ap + am);
            } else if on_j {
                let ap = (oc + omega[[at(i + 1), at(j)]]) * inv1;
                let am = (oc + omega[[at(i - 1), at(j)]]) * inv1;
                o1[w] = (ap * x1[[at(i + 1), at(j)]] + am * x1[[at(i - 1), at(j)]]) / (ap + am);
            } else {
                let ae = (oc + omega[[at(i + 1), at(j)]]) * inv1;
                let aw = (oc + omega[[at(i - 1), at(j)]]) * inv1;
                let an = (oc + omega[[at(i), at(j + 1)]]) * inv2;
                let as_ = (oc + omega[[at(i), at(j - 1)]]) * inv2;
                let denom = ae + aw + an + as_;
                o1[w] = (ae * x1[[at(i + 1), at(j)]]
                    + aw * x1[[at(i - 1), at(j)]]
                    + an * x1[[at(i), at(j + 1)]]
                    + as_ * x1[[at(i), at(j - 1)]])
                    / denom;
                o2[w] = (ae * x2[[at(i + 1), at(j)]]
                    + aw * x2[[at(i - 1), at(j)]]
                    + an * x2[[at(i), at(j + 1)]]
                    + as_ * x2[[at(i), at(j - 1)]])
                    / denom;
            }
        }
    }
    (o1, o2)
}

/// Candidate mesh for the current solution: monitor, smoothing, then the
/// configured number of Jacobi sweeps starting from the current coordinates.
pub fn propose_mesh_1d(
    fields: &Fields1,
    x: &Array1<f64>,
    grid: &Grid1,
    params: &MonitorParams,
) -> Array1<f64> {
    let mut omega = monitor_1d(fields, grid, params);
    smooth_monitor_1d(&mut omega, grid, params.smoothing_passes);
    let mut candidate = x.clone();
    for _ in 0..params.jacobi_iterations {
        candidate = jacobi_sweep_1d(&candidate, &omega, grid);
    }
    candidate
}

/// 2D analogue of [`propose_mesh_1d`].
pub fn propose_mesh_2d(
    fields: &Fields2,
    x1: &Array2<f64>,
    x2: &Array2<f64>,
    grid: &Grid2,
    params: &MonitorParams,
) -> (Array2<f64>, Array2<f64>) {
    let mut omega = monitor_2d(fields, grid, params);
    smooth_monitor_2d(&mut omega, grid, params.smoothing_passes);
    let mut c1 = x1.clone();
    let mut c2 = x2.clone();
    for _ in 0..params.jacobi_iterations {
        (c1, c2) = jacobi_sweep_2d(&c1, &c2, &omega, grid);
    }
    (c1, c2)
}

/// Movement limiter: the displacement toward the candidate mesh and the
/// largest factor `dtau <= 1` that keeps every node within half of each
/// original neighbour gap, so node ordering survives the move.
pub fn limit_and_move_1d(
    x_old: &Array1<f64>,
    x_candidate: &Array1<f64>,
    grid: &Grid1,
) -> (f64, Array1<f64>) {
    let n = grid.n as isize;
    let mut delta = grid.alloc();
    for i in 0..n {
        delta[at(i)] = x_candidate[at(i)] - x_old[at(i)];
    }
    let mut dtau = 1.0_f64;
    for i in 0..n - 1 {
        let gap = x_old[at(i + 1)] - x_old[at(i)];
        let closing = (delta[at(i)] - delta[at(i + 1)]).abs();
        if closing > 0.0 {
            dtau = dtau.min(0.5 * gap / closing);
        }
    }
    (dtau, delta)
}

/// 2D analogue of [`limit_and_move_1d`]; gaps and relative displacements are
/// measured along both mesh-edge families in the Euclidean norm.
pub fn limit_and_move_2d(
    x1_old: &Array2<f64>,
    x2_old: &Array2<f64>,
    x1_candidate: &Array2<f64>,
    x2_candidate: &Array2<f64>,
    grid: &Grid2,
) -> (f64, Array2<f64>, Array2<f64>) {
    let (n1, n2) = (grid.n1 as isize, grid.n2 as isize);
    let mut d1 = grid.alloc();
    let mut d2 = grid.alloc();
    for i in 0..n1 {
        for j in 0..n2 {
            let w = [at(i), at(j)];
            d1[w] = x1_candidate[w] - x1_old[w];
            d2[w] = x2_candidate[w] - x2_old[w];
        }
    }
    let mut dtau = 1.0_f64;
    let mut apply = |c: [usize; 2], nb: [usize; 2]| {
        let gap = (x1_old[nb] - x1_old[c]).hypot(x2_old[nb] - x2_old[c]);
        let closing = (d1[c] - d1[nb]).hypot(d2[c] - d2[nb]);
        if closing > 0.0 {
            dtau = dtau.min(0.5 * gap / closing);
        }
    };
    for i in 0..n1 {
        for j in 0..n2 {
            if i + 1 < n1 {
                apply([at(i), at(j)], [at(i + 1), at(j)]);
            }
            if j + 1 < n2 {
                apply([at(i), at(j)], [at(i), at(j + 1)]);
            }
        }
    }
    (dtau, d1, d2)
}

/// Mesh velocity for the coming step: the limited displacement per unit time,
/// so one step of size `dt` lands the mesh on `x_old + dtau * delta`.
pub fn mesh_velocity(dtau: f64, delta: &Array1<f64>, dt: f64) -> Array1<f64> {
    delta.mapv(|d| dtau * d / dt)
}
