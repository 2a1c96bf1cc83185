//! Interface dissipation operators that turn the energy-conservative scheme
//! into an energy-stable one.
//!
//! Two operators act at each interface. Both measure a jump by WENO
//! interpolation from the left (window centred on the left neighbour) and the
//! right (window centred on the right neighbour), and each component is
//! switched by sign agreement between that reconstructed jump and the plain
//! two-node jump; a zero sign never closes a switch. The switches make the
//! interface energy production of each operator nonnegative,
//! `[V~]^T Y <V~> >= 0`, without smearing smooth regions, where the
//! reconstructed jump is high-order small.
//!
//! - [`dissipation_hat`] acts on entropy-scaled characteristic variables of
//!   the plain flat-bottom system. The interface state, metric direction and
//!   eigen-scaling are frozen at arithmetic averages of the two adjacent
//!   nodes; each stencil node's entropy variables are rotated into the
//!   metric-aligned frame and scaled by the transposed eigenvector matrix
//!   before interpolation, and the switched jump is mapped back through the
//!   eigenvector matrix and the inverse rotation. The coefficient is the
//!   largest local wave speed, [`spectral_radius`]. The result has no bottom
//!   component: it never disturbs the discrete steady state of still water.
//! - [`dissipation_ring`] damps the oscillations created when a rough bottom
//!   is transported by mesh motion. It acts on the conserved variables
//!   directly and is scaled by the temporal metric magnitude, so it vanishes
//!   identically on static meshes. Depth and bottom are reconstructed with
//!   shared bottom-driven weights and their switches are coupled: the two
//!   components fire together, and on still water (flat surface, zero
//!   velocity) their sum cancels so the surface stays flat.
//!
//! The stencil convention for an interface is six consecutive nodes, the
//! third and fourth of which are its left and right neighbours.

use crate::error::SolverError;
use crate::flux::{mean, AxisMetric};
use crate::state::{
    eigen_scaling, eigen_scaling_1d, energy_variables, energy_variables_1d,
    original_entropy_variables, original_entropy_variables_1d, rotate, rotation_matrix,
    Conserved1, Conserved2, PhysicsParams,
};
use crate::weno;

/// Largest absolute wave speed of the one-axis curvilinear system at state
/// `u`:
///
/// ```text
/// max(|mt + L*(vn + c)|, |mt + L*(vn - c)|, |mt + L*vn|),
/// L = |m|, vn = m.v/L, c = sqrt(g h).
/// ```
///
/// Used as the dissipation coefficient and for CFL control. A zero metric
/// row degenerates gracefully to `|mt|`.
pub fn spectral_radius(u: Conserved2, metric: AxisMetric, p: PhysicsParams) -> f64 {
    let l = metric.m[0].hypot(metric.m[1]);
    let vn = if l > 0.0 {
        (metric.m[0] * u.v1() + metric.m[1] * u.v2()) / l
    } else {
        0.0
    };
    let c = (p.gravity * u.h).sqrt();
    let candidates = [vn + c, vn - c, vn];
    candidates
        .iter()
        .map(|&w| (metric.mt + l * w).abs())
        .fold(0.0, f64::max)
}

/// One-dimensional wave-speed bound `max(|jxt + v + c|, |jxt + v - c|)`.
pub fn spectral_radius_1d(u: Conserved1, jxt: f64, p: PhysicsParams) -> f64 {
    let v = u.v1();
    let c = (p.gravity * u.h).sqrt();
    (jxt + v + c).abs().max((jxt + v - c).abs())
}

/// Sign-agreement switch: `true` keeps the dissipation component. A zero on
/// either side counts as agreement.
pub fn gate_open(reconstructed_jump: f64, plain_jump: f64) -> bool {
    sign(reconstructed_jump) * sign(plain_jump) >= 0.0
}

fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Characteristic interface dissipation with its switching diagnostics.
///
/// `N` is 3 in two dimensions (depth and both momenta) and 2 in one
/// dimension; the bottom slot of the flux is never touched.
#[derive(Debug, Clone, Copy)]
pub struct HatDissipation<const N: usize> {
    /// Dissipation vector in conserved-variable slots.
    pub d: [f64; N],
    /// Switched WENO jumps of the scaled characteristic variables.
    pub gated: [f64; N],
    /// Plain two-node jumps of the scaled characteristic variables.
    pub plain: [f64; N],
}

impl<const N: usize> HatDissipation<N> {
    /// `[V~]^T Y <V~>`; nonnegative by construction of the switches.
    pub fn quadratic_form(&self) -> f64 {
        (0..N).map(|k| self.plain[k] * self.gated[k]).sum()
    }
}

/// Mesh-transport interface dissipation with its switching diagnostics.
///
/// `N` is 4 in two dimensions and 3 in one dimension; the bottom slot is
/// last.
#[derive(Debug, Clone, Copy)]
pub struct RingDissipation<const N: usize> {
    /// Dissipation vector in conserved-variable slots.
    pub d: [f64; N],
    /// Switched WENO jumps of the conserved variables.
    pub gated: [f64; N],
    /// Plain two-node jumps of the energy variables, against which the
    /// switches test sign agreement.
    pub v_jump: [f64; N],
}

impl<const N: usize> RingDissipation<N> {
    /// `[V]^T Y <U>`; nonnegative by construction of the switches.
    pub fn quadratic_form(&self) -> f64 {
        (0..N).map(|k| self.v_jump[k] * self.gated[k]).sum()
    }

    /// Whether the bottom component damps this interface. The per-interface
    /// map of this flag shows where bottom transport needed stabilising.
    pub fn bottom_active(&self) -> bool {
        self.d[N - 1] != 0.0
    }
}

fn average_state(l: Conserved2, r: Conserved2) -> Conserved2 {
    Conserved2 {
        h: mean(l.h, r.h),
        hv1: mean(l.hv1, r.hv1),
        hv2: mean(l.hv2, r.hv2),
        b: mean(l.b, r.b),
    }
}

fn average_state_1d(l: Conserved1, r: Conserved1) -> Conserved1 {
    Conserved1 {
        h: mean(l.h, r.h),
        hv1: mean(l.hv1, r.hv1),
        b: mean(l.b, r.b),
    }
}

/// Reconstructed interface jump of one scalar over the six-node stencil:
/// right limit (windows nodes 1..=5) minus left limit (nodes 0..=4).
fn weno_jump(vals: [f64; 6]) -> f64 {
    let left: [f64; 5] = vals[0..5].try_into().unwrap();
    let right: [f64; 5] = vals[1..6].try_into().unwrap();
    weno::weno_right(&right).value - weno::weno_left(&left).value
}

/// Bottom-driven paired jumps of `(h, b)`: both sides reconstruct `b`, and
/// `h` reuses the same combination coefficients. Returns `(<h>, <b>)`.
fn paired_weno_jumps(b: [f64; 6], h: [f64; 6]) -> (f64, f64) {
    let bl: [f64; 5] = b[0..5].try_into().unwrap();
    let hl: [f64; 5] = h[0..5].try_into().unwrap();
    let br: [f64; 5] = b[1..6].try_into().unwrap();
    let hr: [f64; 5] = h[1..6].try_into().unwrap();
    let (b_left, h_left) = weno::paired_left(&bl, &hl);
    let (b_right, h_right) = weno::paired_right(&br, &hr);
    (h_right - h_left, b_right.value - b_left.value)
}

/// Characteristic dissipation at the interface between `stencil[2]` and
/// `stencil[3]`, whose nodal metric rows are `ml` and `mr`.
///
/// Fails only when the averaged metric row is identically zero, which a
/// nondegenerate mesh cannot produce.
pub fn dissipation_hat(
    stencil: &[Conserved2; 6],
    ml: AxisMetric,
    mr: AxisMetric,
    p: PhysicsParams,
) -> Result<HatDissipation<3>, SolverError> {
    let um = average_state(stencil[2], stencil[3]);
    let mm = AxisMetric::new(
        mean(ml.mt, mr.mt),
        mean(ml.m[0], mr.m[0]),
        mean(ml.m[1], mr.m[1]),
    );
    let t = rotation_matrix(mm.m[0], mm.m[1])?;
    let rot = rotate(&t, [um.h, um.hv1, um.hv2], false);
    let aligned = Conserved2 {
        h: um.h,
        hv1: rot[1],
        hv2: rot[2],
        b: um.b,
    };
    let (r, _) = eigen_scaling(aligned, p);
    let alpha = spectral_radius(um, mm, p);

    let mut scaled = [[0.0_f64; 6]; 3];
    for (node, &u) in stencil.iter().enumerate() {
        let tv = rotate(&t, original_entropy_variables(u, p), false);
        for comp in 0..3 {
            scaled[comp][node] = r[0][comp] * tv[0] + r[1][comp] * tv[1] + r[2][comp] * tv[2];
        }
    }

    let mut gated = [0.0; 3];
    let mut plain = [0.0; 3];
    for comp in 0..3 {
        let wj = weno_jump(scaled[comp]);
        plain[comp] = scaled[comp][3] - scaled[comp][2];
        if gate_open(wj, plain[comp]) {
            gated[comp] = wj;
        }
    }

    let back = std::array::from_fn(|i| {
        r[i][0] * gated[0] + r[i][1] * gated[1] + r[i][2] * gated[2]
    });
    let d = rotate(&t, back, true).map(|x| 0.5 * alpha * x);
    Ok(HatDissipation { d, gated, plain })
}

/// One-dimensional characteristic dissipation at the interface between
/// `stencil[2]` and `stencil[3]`, with nodal temporal metrics `jxt_l`,
/// `jxt_r`. No rotation is involved.
pub fn dissipation_hat_1d(
    stencil: &[Conserved1; 6],
    jxt_l: f64,
    jxt_r: f64,
    p: PhysicsParams,
) -> HatDissipation<2> {
    let um = average_state_1d(stencil[2], stencil[3]);
    let jxt = mean(jxt_l, jxt_r);
    let (r, _) = eigen_scaling_1d(um, p);
    let alpha = spectral_radius_1d(um, jxt, p);

    let mut scaled = [[0.0_f64; 6]; 2];
    for (node, &u) in stencil.iter().enumerate() {
        let vh = original_entropy_variables_1d(u, p);
        for comp in 0..2 {
            scaled[comp][node] = r[0][comp] * vh[0] + r[1][comp] * vh[1];
        }
    }

    let mut gated = [0.0; 2];
    let mut plain = [0.0; 2];
    for comp in 0..2 {
        let wj = weno_jump(scaled[comp]);
        plain[comp] = scaled[comp][3] - scaled[comp][2];
        if gate_open(wj, plain[comp]) {
            gated[comp] = wj;
        }
    }

    let d = std::array::from_fn(|i| {
        0.5 * alpha * (r[i][0] * gated[0] + r[i][1] * gated[1])
    });
    HatDissipation { d, gated, plain }
}

/// Mesh-transport dissipation at the interface between `stencil[2]` and
/// `stencil[3]`. Depth and bottom share reconstruction coefficients and a
/// coupled switch; the momenta are switched independently.
pub fn dissipation_ring(
    stencil: &[Conserved2; 6],
    ml: AxisMetric,
    mr: AxisMetric,
    p: PhysicsParams,
) -> RingDissipation<4> {
    let mt = mean(ml.mt, mr.mt);
    let vl = energy_variables(stencil[2], p);
    let vr = energy_variables(stencil[3], p);
    let v_jump = std::array::from_fn(|k| vr[k] - vl[k]);

    let (h_jump, b_jump) = paired_weno_jumps(stencil.map(|u| u.b), stencil.map(|u| u.h));
    let hv1_jump = weno_jump(stencil.map(|u| u.hv1));
    let hv2_jump = weno_jump(stencil.map(|u| u.hv2));

    let coupled = gate_open(h_jump, v_jump[0]) && gate_open(b_jump, v_jump[3]);
    let mut gated = [0.0; 4];
    if coupled {
        gated[0] = h_jump;
        gated[3] = b_jump;
    }
    if gate_open(hv1_jump, v_jump[1]) {
        gated[1] = hv1_jump;
    }
    if gate_open(hv2_jump, v_jump[2]) {
        gated[2] = hv2_jump;
    }

    let s = 0.5 * mt.abs();
    RingDissipation {
        d: gated.map(|x| s * x),
        gated,
        v_jump,
    }
}

/// One-dimensional mesh-transport dissipation; slots are `(h, hv1, b)` with
/// the depth and bottom switches coupled as in two dimensions.
pub fn dissipation_ring_1d(
    stencil: &[Conserved1; 6],
    jxt_l: f64,
    jxt_r: f64,
    p: PhysicsParams,
) -> RingDissipation<3> {
    let jxt = mean(jxt_l, jxt_r);
    let vl = energy_variables_1d(stencil[2], p);
    let vr = energy_variables_1d(stencil[3], p);
    let v_jump = std::array::from_fn(|k| vr[k] - vl[k]);

    let (h_jump, b_jump) = paired_weno_jumps(stencil.map(|u| u.b), stencil.map(|u| u.h));
    let hv1_jump = weno_jump(stencil.map(|u| u.hv1));

    let coupled = gate_open(h_jump, v_jump[0]) && gate_open(b_jump, v_jump[2]);
    let mut gated = [0.0; 3];
    if coupled {
        gated[0] = h_jump;
        gated[2] = b_jump;
    }
    if gate_open(hv1_jump, v_jump[1]) {
        gated[1] = hv1_jump;
    }

    let s = 0.5 * jxt.abs();
    RingDissipation {
        d: gated.map(|x| s * x),
        gated,
        v_jump,
    }
}

/// Stabilised interface flux: the conservative flux minus both dissipation
/// vectors. The characteristic part carries no bottom slot.
pub fn es_interface_flux(ec: [f64; 4], hat: [f64; 3], ring: [f64; 4]) -> [f64; 4] {
    [
        ec[0] - hat[0] - ring[0],
        ec[1] - hat[1] - ring[1],
        ec[2] - hat[2] - ring[2],
        ec[3] - ring[3],
    ]
}

/// One-dimensional stabilised interface flux.
pub fn es_interface_flux_1d(ec: [f64; 3], hat: [f64; 2], ring: [f64; 3]) -> [f64; 3] {
    [
        ec[0] - hat[0] - ring[0],
        ec[1] - hat[1] - ring[1],
        ec[2] - ring[2],
    ]
}
