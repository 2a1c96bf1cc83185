//! Two-dimensional semi-discrete operator.
//!
//! The evolved unknowns at a node are `JU = J (h, hv1, hv2, b)` and the mesh
//! Jacobian `J`. Each computational axis contributes interface-flux
//! differences assembled pencil by pencil from two-point kernels over node
//! pairs `(i, i+m)`, `m = 1..=p`, weighted by [`SchemeOrder::alpha`]:
//!
//! ```text
//! d(JU)_ij/dt = -sum_l [ (F_l[k+1] - F_l[k]) + g h_ij (B_l[k+1] - B_l[k]) ] / dxi_l
//! dJ_ij/dt    = -sum_l (W_l[k+1] - W_l[k]) / dxi_l
//! ```
//!
//! with `F_l` the curvilinear fluxes of [`curvilinear_flux`], `B_l` the
//! metric-weighted bottom means of [`two_point_source`] (momentum slots), and
//! `W_l` the combined means of the temporal metric `mt_l`. Because `J`
//! evolves by the same interface pattern, constant states stay constant on
//! any moving mesh up to the rounding of the metric identities, and
//! still-water states stay still.
//!
//! The conservative flux satisfies the per-node energy identity against the
//! interface energy fluxes of [`axis_energy_fluxes`], modulo the rounding of
//! the surface conservation laws. The stabilised variant subtracts switched
//! dissipation (rotated characteristic ordering plus a bottom-coupled part
//! active only on moving meshes) at every interface.
//!
//! States must be positive-depth and filled on the ghost frame; metrics must
//! be valid on the stencil-extended box. Along a pencil, interface `I` sits
//! between nodes `I-1` and `I`.

use ndarray::Array2;

use crate::boundary::{self, Boundary};
use crate::dissipation::{dissipation_hat, dissipation_ring, es_interface_flux};
use crate::error::SolverError;
use crate::flux::{curvilinear_flux, energy_flux, mean, two_point_source, AxisMetric};
use crate::metrics::{at, Grid2, Metrics2, SchemeOrder, STENCIL};
use crate::rhs_1d::combine_pairs;
use crate::state::{Conserved2, PhysicsParams};
use crate::Scheme;

/// Nodal conserved components on the ghost-framed grid.
#[derive(Clone, Debug)]
pub struct Fields2 {
    pub h: Array2<f64>,
    pub hv1: Array2<f64>,
    pub hv2: Array2<f64>,
    pub b: Array2<f64>,
}

impl Fields2 {
    pub fn alloc(grid: &Grid2) -> Self {
        Self { h: grid.alloc(), hv1: grid.alloc(), hv2: grid.alloc(), b: grid.alloc() }
    }

    #[inline]
    pub fn get(&self, i: isize, j: isize) -> Conserved2 {
        let w = [at(i), at(j)];
        Conserved2 { h: self.h[w], hv1: self.hv1[w], hv2: self.hv2[w], b: self.b[w] }
    }

    #[inline]
    pub fn set(&mut self, i: isize, j: isize, u: Conserved2) {
        let w = [at(i), at(j)];
        self.h[w] = u.h;
        self.hv1[w] = u.hv1;
        self.hv2[w] = u.hv2;
        self.b[w] = u.b;
    }

    pub fn fill_halos(&mut self, grid: &Grid2, bc: Boundary) {
        boundary::fill_scalar_2d(&mut self.h, grid, bc);
        boundary::fill_scalar_2d(&mut self.hv1, grid, bc);
        boundary::fill_scalar_2d(&mut self.hv2, grid, bc);
        boundary::fill_scalar_2d(&mut self.b, grid, bc);
    }
}

/// An interface at which the bottom-slot dissipation fired: the sweep axis,
/// the pencil index across it, and the interface index `I` along it (the
/// interface sits between pencil nodes `I-1` and `I`).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GateEvent {
    pub axis: u8,
    pub pencil: usize,
    pub interface: usize,
}

/// Nodal rates produced by [`rhs_2d`]: `du` holds `d(JU)/dt` per component,
/// `dj` holds `dJ/dt`, and `bottom_gates` the fired bottom-dissipation
/// interfaces (empty for the conservative flux and on static meshes).
#[derive(Clone, Debug)]
pub struct SemiDiscrete2 {
    pub du: [Array2<f64>; 4],
    pub dj: Array2<f64>,
    pub bottom_gates: Vec<GateEvent>,
}

/// Copies pencil nodes `-STENCIL..len+STENCIL` of states and axis metrics
/// into contiguous lines; index `k` holds node `k - STENCIL`.
fn extract_pencil(
    fields: &Fields2,
    metrics: &Metrics2,
    axis: usize,
    pencil: usize,
    len: usize,
) -> (Vec<Conserved2>, Vec<AxisMetric>) {
    let (ma, mb) = metrics.row(axis);
    let mt = metrics.mt(axis);
    let s = STENCIL as isize;
    let mut states = Vec::with_capacity(len + 2 * STENCIL);
    let mut ms = Vec::with_capacity(len + 2 * STENCIL);
    for k in -s..(len as isize + s) {
        let w = match axis {
            1 => [at(k), at(pencil as isize)],
            _ => [at(pencil as isize), at(k)],
        };
        states.push(Conserved2 {
            h: fields.h[w],
            hv1: fields.hv1[w],
            hv2: fields.hv2[w],
            b: fields.b[w],
        });
        ms.push(AxisMetric { mt: mt[w], m: [ma[w], mb[w]] });
    }
    (states, ms)
}

/// Interface fluxes of one pencil for the requested scheme, plus the
/// interfaces whose bottom dissipation gate fired.
pub fn axis_interface_fluxes(
    fields: &Fields2,
    metrics: &Metrics2,
    grid: &Grid2,
    axis: usize,
    pencil: usize,
    order: SchemeOrder,
    scheme: Scheme,
    params: PhysicsParams,
) -> Result<(Vec<[f64; 4]>, Vec<usize>), SolverError> {
    let len = if axis == 1 { grid.n1 } else { grid.n2 };
    let (states, ms) = extract_pencil(fields, metrics, axis, pencil, len);
    let s = STENCIL as isize;
    let mut flux = combine_pairs::<4>(len, order, |l, r| {
        curvilinear_flux(
            states[(l + s) as usize],
            states[(r + s) as usize],
            params,
            ms[(l + s) as usize],
            ms[(r + s) as usize],
        )
    });
    let mut gates = Vec::new();
    if scheme.stabilised() {
        for (i, slot) in flux.iter_mut().enumerate() {
            let stencil: [Conserved2; 6] = std::array::from_fn(|k| states[i + k]);
            let (ml, mr) = (ms[i + 2], ms[i + 3]);
            let hat = dissipation_hat(&stencil, ml, mr, params)?;
            let ring = if scheme.transport_dissipation() {
                let ring = dissipation_ring(&stencil, ml, mr, params);
                if ring.bottom_active() {
                    gates.push(i);
                }
                ring.d
            } else {
                [0.0; 4]
            };
            *slot = es_interface_flux(*slot, hat.d, ring);
        }
    }
    Ok((flux, gates))
}

/// Interface energy fluxes of one pencil, matching the conservative flux of
/// the same order.
pub fn axis_energy_fluxes(
    fields: &Fields2,
    metrics: &Metrics2,
    grid: &Grid2,
    axis: usize,
    pencil: usize,
    order: SchemeOrder,
    params: PhysicsParams,
) -> Vec<f64> {
    let len = if axis == 1 { grid.n1 } else { grid.n2 };
    let (states, ms) = extract_pencil(fields, metrics, axis, pencil, len);
    let s = STENCIL as isize;
    combine_pairs::<1>(len, order, |l, r| {
        [energy_flux(
            states[(l + s) as usize],
            states[(r + s) as usize],
            params,
            ms[(l + s) as usize],
            ms[(r + s) as usize],
        )]
    })
    .into_iter()
    .map(|v| v[0])
    .collect()
}

/// Semi-discrete rates at the interior nodes. Ghost entries of the output
/// arrays stay zero.
pub fn rhs_2d(
    fields: &Fields2,
    metrics: &Metrics2,
    grid: &Grid2,
    order: SchemeOrder,
    scheme: Scheme,
    params: PhysicsParams,
) -> Result<SemiDiscrete2, SolverError> {
    let mut du = [grid.alloc(), grid.alloc(), grid.alloc(), grid.alloc()];
    let mut dj = grid.alloc();
    let mut bottom_gates = Vec::new();
    let s = STENCIL as isize;

    for axis in [1usize, 2] {
        let (len, pencils, inv) = match axis {
            1 => (grid.n1, grid.n2, 1.0 / grid.dxi1()),
            _ => (grid.n2, grid.n1, 1.0 / grid.dxi2()),
        };
        for pencil in 0..pencils {
            let (states, ms) = extract_pencil(fields, metrics, axis, pencil, len);
            let mut flux = combine_pairs::<4>(len, order, |l, r| {
                curvilinear_flux(
                    states[(l + s) as usize],
                    states[(r + s) as usize],
                    params,
                    ms[(l + s) as usize],
                    ms[(r + s) as usize],
                )
            });
            if scheme.stabilised() {
                for (i, slot) in flux.iter_mut().enumerate() {
                    let stencil: [Conserved2; 6] = std::array::from_fn(|k| states[i + k]);
                    let (ml, mr) = (ms[i + 2], ms[i + 3]);
                    let hat = dissipation_hat(&stencil, ml, mr, params)?;
                    let ring = if scheme.transport_dissipation() {
                        let ring = dissipation_ring(&stencil, ml, mr, params);
                        if ring.bottom_active() {
                            bottom_gates.push(GateEvent { axis: axis as u8, pencil, interface: i });
                        }
                        ring.d
                    } else {
                        [0.0; 4]
                    };
                    *slot = es_interface_flux(*slot, hat.d, ring);
                }
            }
            let source = combine_pairs::<2>(len, order, |l, r| {
                let v = two_point_source(
                    states[(l + s) as usize].b,
                    states[(r + s) as usize].b,
                    ms[(l + s) as usize],
                    ms[(r + s) as usize],
                );
                [v[1], v[2]]
            });
            let vcl = combine_pairs::<1>(len, order, |l, r| {
                [mean(ms[(l + s) as usize].mt, ms[(r + s) as usize].mt)]
            });

            // Each momentum slot receives one fused value per axis (flux
            // difference plus source), so the two axis passes meet in a
            // single commutative pair at every node and swapping the axes
            // of a symmetric state reproduces the rates bitwise.
            for k in 0..len {
                let w = match axis {
                    1 => [at(k as isize), at(pencil as isize)],
                    _ => [at(pencil as isize), at(k as isize)],
                };
                let gh = params.gravity * fields.h[w];
                for (c, component) in du.iter_mut().enumerate() {
                    let mut t = flux[k + 1][c] - flux[k][c];
                    if c == 1 {
                        t += gh * (source[k + 1][0] - source[k][0]);
                    } else if c == 2 {
                        t += gh * (source[k + 1][1] - source[k][1]);
                    }
                    component[w] -= t * inv;
                }
                dj[w] -= (vcl[k + 1][0] - vcl[k][0]) * inv;
            }
        }
    }
    Ok(SemiDiscrete2 { du, dj, bottom_gates })
}
