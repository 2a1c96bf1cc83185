//! Two-point interface kernels: energy-conservative fluxes, the bottom
//! source kernel, and the numerical energy flux.
//!
//! Everything here is built from arithmetic means `{a} = (a_L + a_R)/2` and
//! jumps `[a] = a_R - a_L`. The state and Cartesian flux kernels are
//!
//! ```text
//! U~   = ({h}, {h}{v1}, {h}{v2}, {b}),
//! F~_1 = ({h}{v1}, {h}{v1}^2 + P, {h}{v1}{v2}, 0),
//! F~_2 = ({h}{v2}, {h}{v1}{v2}, {h}{v2}^2 + P, 0),
//! P    = (g/2){h^2} + g({hb} - {h}{b}),
//! ```
//!
//! and an interface flux along one computational axis combines them with
//! averaged metrics,
//!
//! ```text
//! calF~ = {mt} U~ + {m_1} F~_1 + {m_2} F~_2.
//! ```
//!
//! The defining property is the jump condition
//!
//! ```text
//! [V]^T calF~ = {mt}[phi] + sum_k {m_k} ([psi_k] - (g/2)[h v_k](b_L + b_R)),
//! ```
//!
//! which, combined with the bottom kernel `B~` (components `{m_k}{b}` in the
//! momentum slots), makes the semi-discrete nodal energy change only through
//! the numerical energy flux
//!
//! ```text
//! Q~ = {V}^T calF~ - (1/4)(mt_L + mt_R)(phi_L + phi_R)
//!      - sum_k (1/4)(m_kL + m_kR)(psi_kL + psi_kR)
//!      + sum_k (g/8)(m_kL + m_kR)((h v_k)_L + (h v_k)_R)(b_L + b_R),
//! ```
//!
//! whose equal-state value is the physical energy flux `mt eta + sum m_k q_k`.
//! One-dimensional variants specialise to the state `(h, hv1, b)` with the
//! spatial metric identically one, so only `J dxi/dt` remains as data.

use crate::state::{
    energy_pair, energy_pair_1d, energy_variables, energy_variables_1d, Conserved1, Conserved2,
    PhysicsParams,
};

/// Per-node metric triple for one computational axis:
/// `mt = J dxi_l/dt` and `m = (J dxi_l/dx_1, J dxi_l/dx_2)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AxisMetric {
    pub mt: f64,
    pub m: [f64; 2],
}

impl AxisMetric {
    pub const fn new(mt: f64, m1: f64, m2: f64) -> Self {
        Self { mt, m: [m1, m2] }
    }

    /// Static identity-mesh metric for the first computational axis.
    pub const STATIC_X1: AxisMetric = AxisMetric::new(0.0, 1.0, 0.0);
    /// Static identity-mesh metric for the second computational axis.
    pub const STATIC_X2: AxisMetric = AxisMetric::new(0.0, 0.0, 1.0);
}

/// Arithmetic mean with a fixed evaluation order, `(l + r) * 0.5`.
#[inline]
pub fn mean(l: f64, r: f64) -> f64 {
    (l + r) * 0.5
}

/// Jump with a fixed evaluation order, `r - l`.
#[inline]
pub fn jump(l: f64, r: f64) -> f64 {
    r - l
}

/// Temporal two-point kernel `U~ = ({h}, {h}{v1}, {h}{v2}, {b})`.
pub fn two_point_state(l: Conserved2, r: Conserved2) -> [f64; 4] {
    let mh = mean(l.h, r.h);
    [mh, mh * mean(l.v1(), r.v1()), mh * mean(l.v2(), r.v2()), mean(l.b, r.b)]
}

/// Cartesian two-point flux kernel `F~_dir`; `dir` is 1 or 2.
pub fn two_point_flux(l: Conserved2, r: Conserved2, p: PhysicsParams, dir: usize) -> [f64; 4] {
    let g = p.gravity;
    let mh = mean(l.h, r.h);
    let mv1 = mean(l.v1(), r.v1());
    let mv2 = mean(l.v2(), r.v2());
    let pressure = 0.5 * g * mean(l.h * l.h, r.h * r.h)
        + g * (mean(l.h * l.b, r.h * r.b) - mh * mean(l.b, r.b));
    let cross = mh * (mv1 * mv2);
    match dir {
        1 => [mh * mv1, mh * mv1 * mv1 + pressure, cross, 0.0],
        2 => [mh * mv2, cross, mh * mv2 * mv2 + pressure, 0.0],
        _ => panic!("flux direction must be 1 or 2, got {dir}"),
    }
}

/// Interface flux along one axis, `{mt} U~ + {m_1} F~_1 + {m_2} F~_2`.
pub fn curvilinear_flux(
    l: Conserved2,
    r: Conserved2,
    p: PhysicsParams,
    ml: AxisMetric,
    mr: AxisMetric,
) -> [f64; 4] {
    let u = two_point_state(l, r);
    let f1 = two_point_flux(l, r, p, 1);
    let f2 = two_point_flux(l, r, p, 2);
    let wt = mean(ml.mt, mr.mt);
    let w1 = mean(ml.m[0], mr.m[0]);
    let w2 = mean(ml.m[1], mr.m[1]);
    std::array::from_fn(|k| wt * u[k] + w1 * f1[k] + w2 * f2[k])
}

/// Two-point bottom kernel `B~ = (0, {m_1}{b}, {m_2}{b}, 0)`; the update
/// multiplies its interface differences by `-g h_i`.
pub fn two_point_source(b_l: f64, b_r: f64, ml: AxisMetric, mr: AxisMetric) -> [f64; 4] {
    let mb = mean(b_l, b_r);
    [0.0, mean(ml.m[0], mr.m[0]) * mb, mean(ml.m[1], mr.m[1]) * mb, 0.0]
}

/// `|LHS - RHS|` of the jump condition satisfied by [`curvilinear_flux`].
pub fn ec_condition_residual(
    l: Conserved2,
    r: Conserved2,
    p: PhysicsParams,
    ml: AxisMetric,
    mr: AxisMetric,
) -> f64 {
    let flux = curvilinear_flux(l, r, p, ml, mr);
    let (vl, vr) = (energy_variables(l, p), energy_variables(r, p));
    let lhs: f64 = (0..4).map(|k| jump(vl[k], vr[k]) * flux[k]).sum();

    let (el, er) = (energy_pair(l, p), energy_pair(r, p));
    let hv = [[l.hv1, r.hv1], [l.hv2, r.hv2]];
    let b_sum = l.b + r.b;
    let mut rhs = mean(ml.mt, mr.mt) * jump(el.phi, er.phi);
    for k in 0..2 {
        rhs += mean(ml.m[k], mr.m[k])
            * (jump(el.psi[k], er.psi[k]) - 0.5 * p.gravity * jump(hv[k][0], hv[k][1]) * b_sum);
    }
    (lhs - rhs).abs()
}

/// Magnitude against which the jump-condition residual is meaningful:
/// `max(1, |phi|, |psi|, |metric| * |U|)` over both sides.
pub fn ec_residual_scale(
    l: Conserved2,
    r: Conserved2,
    p: PhysicsParams,
    ml: AxisMetric,
    mr: AxisMetric,
) -> f64 {
    let (el, er) = (energy_pair(l, p), energy_pair(r, p));
    let metric_mag = [ml.mt, ml.m[0], ml.m[1], mr.mt, mr.m[0], mr.m[1]]
        .into_iter()
        .fold(0.0f64, |a, x| a.max(x.abs()));
    let state_mag = l
        .as_array()
        .into_iter()
        .chain(r.as_array())
        .fold(0.0f64, |a, x| a.max(x.abs()));
    [
        1.0,
        el.phi.abs(),
        er.phi.abs(),
        el.psi[0].abs(),
        el.psi[1].abs(),
        er.psi[0].abs(),
        er.psi[1].abs(),
        metric_mag * state_mag,
    ]
    .into_iter()
    .fold(0.0f64, f64::max)
}

/// Numerical energy flux `Q~` matching [`curvilinear_flux`]; symmetric in
/// its two sides, with equal-state value `mt eta + sum_k m_k q_k`.
pub fn energy_flux(
    l: Conserved2,
    r: Conserved2,
    p: PhysicsParams,
    ml: AxisMetric,
    mr: AxisMetric,
) -> f64 {
    let flux = curvilinear_flux(l, r, p, ml, mr);
    let (vl, vr) = (energy_variables(l, p), energy_variables(r, p));
    let v_dot: f64 = (0..4).map(|k| mean(vl[k], vr[k]) * flux[k]).sum();

    let (el, er) = (energy_pair(l, p), energy_pair(r, p));
    let hv = [[l.hv1, r.hv1], [l.hv2, r.hv2]];
    let mut q = v_dot - 0.25 * (ml.mt + mr.mt) * (el.phi + er.phi);
    for k in 0..2 {
        let m_sum = ml.m[k] + mr.m[k];
        q -= 0.25 * m_sum * (el.psi[k] + er.psi[k]);
        q += 0.125 * p.gravity * m_sum * (hv[k][0] + hv[k][1]) * (l.b + r.b);
    }
    q
}

/// One-dimensional temporal kernel `({h}, {h}{v1}, {b})`.
pub fn two_point_state_1d(l: Conserved1, r: Conserved1) -> [f64; 3] {
    let mh = mean(l.h, r.h);
    [mh, mh * mean(l.v1(), r.v1()), mean(l.b, r.b)]
}

/// One-dimensional Cartesian flux kernel.
pub fn two_point_flux_1d(l: Conserved1, r: Conserved1, p: PhysicsParams) -> [f64; 3] {
    let g = p.gravity;
    let mh = mean(l.h, r.h);
    let mv1 = mean(l.v1(), r.v1());
    let pressure = 0.5 * g * mean(l.h * l.h, r.h * r.h)
        + g * (mean(l.h * l.b, r.h * r.b) - mh * mean(l.b, r.b));
    [mh * mv1, mh * mv1 * mv1 + pressure, 0.0]
}

/// One-dimensional interface flux `{jxt} U~ + F~`; the spatial metric is
/// identically one.
pub fn curvilinear_flux_1d(
    l: Conserved1,
    r: Conserved1,
    p: PhysicsParams,
    jxt_l: f64,
    jxt_r: f64,
) -> [f64; 3] {
    let u = two_point_state_1d(l, r);
    let f = two_point_flux_1d(l, r, p);
    let wt = mean(jxt_l, jxt_r);
    std::array::from_fn(|k| wt * u[k] + f[k])
}

/// One-dimensional bottom kernel, the momentum-slot value `{b}`.
pub fn two_point_source_1d(b_l: f64, b_r: f64) -> f64 {
    mean(b_l, b_r)
}

/// `|LHS - RHS|` of the one-dimensional jump condition.
pub fn ec_condition_residual_1d(
    l: Conserved1,
    r: Conserved1,
    p: PhysicsParams,
    jxt_l: f64,
    jxt_r: f64,
) -> f64 {
    let flux = curvilinear_flux_1d(l, r, p, jxt_l, jxt_r);
    let (vl, vr) = (energy_variables_1d(l, p), energy_variables_1d(r, p));
    let lhs: f64 = (0..3).map(|k| jump(vl[k], vr[k]) * flux[k]).sum();

    let (el, er) = (energy_pair_1d(l, p), energy_pair_1d(r, p));
    let rhs = mean(jxt_l, jxt_r) * jump(el.phi, er.phi) + jump(el.psi[0], er.psi[0])
        - 0.5 * p.gravity * jump(l.hv1, r.hv1) * (l.b + r.b);
    (lhs - rhs).abs()
}

/// One-dimensional residual scale; see [`ec_residual_scale`].
pub fn ec_residual_scale_1d(
    l: Conserved1,
    r: Conserved1,
    p: PhysicsParams,
    jxt_l: f64,
    jxt_r: f64,
) -> f64 {
    let (el, er) = (energy_pair_1d(l, p), energy_pair_1d(r, p));
    let metric_mag = jxt_l.abs().max(jxt_r.abs()).max(1.0);
    let state_mag = l
        .as_array()
        .into_iter()
        .chain(r.as_array())
        .fold(0.0f64, |a, x| a.max(x.abs()));
    [1.0, el.phi.abs(), er.phi.abs(), el.psi[0].abs(), er.psi[0].abs(), metric_mag * state_mag]
        .into_iter()
        .fold(0.0f64, f64::max)
}

/// One-dimensional numerical energy flux with equal-state value
/// `jxt eta + q_1`.
pub fn energy_flux_1d(
    l: Conserved1,
    r: Conserved1,
    p: PhysicsParams,
    jxt_l: f64,
    jxt_r: f64,
) -> f64 {
    let flux = curvilinear_flux_1d(l, r, p, jxt_l, jxt_r);
    let (vl, vr) = (energy_variables_1d(l, p), energy_variables_1d(r, p));
    let v_dot: f64 = (0..3).map(|k| mean(vl[k], vr[k]) * flux[k]).sum();

    let (el, er) = (energy_pair_1d(l, p), energy_pair_1d(r, p));
    v_dot - 0.25 * (jxt_l + jxt_r) * (el.phi + er.phi) - 0.5 * (el.psi[0] + er.psi[0])
        + 0.25 * p.gravity * (l.hv1 + r.hv1) * (l.b + r.b)
}
