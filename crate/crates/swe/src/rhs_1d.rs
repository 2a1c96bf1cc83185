//! One-dimensional semi-discrete operator.
//!
//! The evolved unknowns at a node are `JU = J (h, hv1, b)` together with the
//! mesh Jacobian `J` itself, so a moving mesh enters only through the
//! temporal metric `jxt = -xdot` (the spatial metric of the reformulated
//! one-dimensional system is identically one). Interface values of order
//! `2p` combine two-point kernels over node pairs `(i, i+m)`, `m = 1..=p`,
//! with the coefficients of [`SchemeOrder::alpha`]:
//!
//! ```text
//! d(JU)_i/dt = -(F[i+1] - F[i])/dxi - g h_i (B[i+1] - B[i])/dxi * e_1
//! dJ_i/dt    = -(W[i+1] - W[i])/dxi
//! ```
//!
//! where `F` are curvilinear interface fluxes, `B` the combined bottom means
//! feeding the momentum source, and `W` the combined `jxt` means whose
//! differences evolve `J` compatibly — constant states then stay constant and
//! still water stays still, to rounding, for any mesh motion.
//!
//! The conservative flux satisfies a per-node energy identity: with
//! `E = J eta`, `dE_i/dt` equals the difference of the interface energy
//! fluxes of [`interface_energy_fluxes_1d`]. The stabilised variant subtracts
//! switched dissipation at each interface, which can only lower `dE`.
//!
//! States must be positive-depth and filled on the ghost frame before
//! calling; interfaces `I = 0..=n` sit between nodes `I-1` and `I`.

use ndarray::Array1;

use crate::boundary::{self, Boundary};
use crate::dissipation::{dissipation_hat_1d, dissipation_ring_1d, es_interface_flux_1d};
use crate::flux::{curvilinear_flux_1d, energy_flux_1d};
use crate::metrics::{at, interface_flux_line, Grid1, Metrics1, SchemeOrder, STENCIL};
use crate::state::{Conserved1, PhysicsParams};
use crate::Scheme;

/// Nodal conserved components on the ghost-framed grid.
#[derive(Clone, Debug)]
pub struct Fields1 {
    pub h: Array1<f64>,
    pub hv1: Array1<f64>,
    pub b: Array1<f64>,
}

impl Fields1 {
    pub fn alloc(grid: &Grid1) -> Self {
        Self { h: grid.alloc(), hv1: grid.alloc(), b: grid.alloc() }
    }

    #[inline]
    pub fn get(&self, i: isize) -> Conserved1 {
        Conserved1 { h: self.h[at(i)], hv1: self.hv1[at(i)], b: self.b[at(i)] }
    }

    #[inline]
    pub fn set(&mut self, i: isize, u: Conserved1) {
        self.h[at(i)] = u.h;
        self.hv1[at(i)] = u.hv1;
        self.b[at(i)] = u.b;
    }

    pub fn fill_halos(&mut self, grid: &Grid1, bc: Boundary) {
        boundary::fill_scalar_1d(&mut self.h, grid, bc);
        boundary::fill_scalar_1d(&mut self.hv1, grid, bc);
        boundary::fill_scalar_1d(&mut self.b, grid, bc);
    }
}

/// Nodal rates produced by [`rhs_1d`]: `du` holds `d(JU)/dt` per component,
/// `dj` holds `dJ/dt`, and `bottom_gates` lists the interfaces whose
/// bottom-slot dissipation fired (always empty for the conservative flux and
/// on static meshes).
#[derive(Clone, Debug)]
pub struct SemiDiscrete1 {
    pub du: [Array1<f64>; 3],
    pub dj: Array1<f64>,
    pub bottom_gates: Vec<usize>,
}

/// Combines per-pair interface values of width `NC` with the order's
/// `alpha` coefficients; interface `I` gathers `pair_value(i, i+m)` over the
/// straddling pairs `i = I-m ..= I-1` for each `m`. Mirrors
/// [`interface_flux_line`]. Each width's group is summed outside-in and the
/// widths are folded in ascending order, so reversing a line reproduces the
/// combined values bitwise (up to each kernel's own symmetry).
pub(crate) fn combine_pairs<const NC: usize>(
    n: usize,
    order: SchemeOrder,
    mut pair_value: impl FnMut(isize, isize) -> [f64; NC],
) -> Vec<[f64; NC]> {
    let mut out = vec![[0.0; NC]; n + 1];
    for (k, &a) in order.alpha().iter().enumerate() {
        let m = (k + 1) as isize;
        // vals[(i + m) as usize] holds pair_value(i, i + m).
        let vals: Vec<[f64; NC]> = (-m..n as isize).map(|i| pair_value(i, i + m)).collect();
        for (iface, slot) in out.iter_mut().enumerate() {
            let group = &vals[iface..iface + m as usize];
            for c in 0..NC {
                let g = match group.len() {
                    1 => group[0][c],
                    2 => group[0][c] + group[1][c],
                    3 => (group[0][c] + group[2][c]) + group[1][c],
                    _ => unreachable!("pair widths run 1..=3"),
                };
                slot[c] += a * g;
            }
        }
    }
    out
}

/// Copies nodes `-STENCIL..n+STENCIL` of a ghost-framed array into a plain
/// line for [`interface_flux_line`].
fn line_of(field: &Array1<f64>, n: usize) -> Vec<f64> {
    (-(STENCIL as isize)..(n + STENCIL) as isize).map(|i| field[at(i)]).collect()
}

/// Interface fluxes of order `2p` for the requested scheme, plus the list of
/// interfaces whose bottom dissipation gate fired.
pub fn interface_fluxes_1d(
    fields: &Fields1,
    metrics: &Metrics1,
    grid: &Grid1,
    order: SchemeOrder,
    scheme: Scheme,
    params: PhysicsParams,
) -> (Vec<[f64; 3]>, Vec<usize>) {
    let n = grid.n;
    let mut flux = combine_pairs::<3>(n, order, |l, r| {
        curvilinear_flux_1d(fields.get(l), fields.get(r), params, metrics.jxt[at(l)], metrics.jxt[at(r)])
    });
    let mut gates = Vec::new();
    if scheme.stabilised() {
        for (i, slot) in flux.iter_mut().enumerate() {
            let i = i as isize;
            let stencil: [Conserved1; 6] = std::array::from_fn(|k| fields.get(i - 3 + k as isize));
            let (jl, jr) = (metrics.jxt[at(i - 1)], metrics.jxt[at(i)]);
            let hat = dissipation_hat_1d(&stencil, jl, jr, params);
            let ring = if scheme.transport_dissipation() {
                let ring = dissipation_ring_1d(&stencil, jl, jr, params);
                if ring.bottom_active() {
                    gates.push(i as usize);
                }
                ring.d
            } else {
                [0.0; 3]
            };
            *slot = es_interface_flux_1d(*slot, hat.d, ring);
        }
    }
    (flux, gates)
}

/// Combined interface means of the bottom, whose differences scaled by
/// `-g h_i / dxi` form the momentum source.
pub fn bottom_means_1d(fields: &Fields1, grid: &Grid1, order: SchemeOrder) -> Vec<f64> {
    let line = line_of(&fields.b, grid.n);
    let mut out = vec![0.0; grid.n + 1];
    interface_flux_line(&line, order, &mut out);
    out
}

/// Combined interface means of `jxt`, whose differences evolve `J`.
pub fn vcl_fluxes_1d(metrics: &Metrics1, grid: &Grid1, order: SchemeOrder) -> Vec<f64> {
    let line = line_of(&metrics.jxt, grid.n);
    let mut out = vec![0.0; grid.n + 1];
    interface_flux_line(&line, order, &mut out);
    out
}

/// Interface energy fluxes matching the conservative flux of the same order.
pub fn interface_energy_fluxes_1d(
    fields: &Fields1,
    metrics: &Metrics1,
    grid: &Grid1,
    order: SchemeOrder,
    params: PhysicsParams,
) -> Vec<f64> {
    combine_pairs::<1>(grid.n, order, |l, r| {
        [energy_flux_1d(fields.get(l), fields.get(r), params, metrics.jxt[at(l)], metrics.jxt[at(r)])]
    })
    .into_iter()
    .map(|v| v[0])
    .collect()
}

/// Semi-discrete rates at the interior nodes. Ghost entries of the output
/// arrays stay zero.
pub fn rhs_1d(
    fields: &Fields1,
    metrics: &Metrics1,
    grid: &Grid1,
    order: SchemeOrder,
    scheme: Scheme,
    params: PhysicsParams,
) -> SemiDiscrete1 {
    let n = grid.n;
    let inv = 1.0 / grid.dxi();
    let (flux, bottom_gates) = interface_fluxes_1d(fields, metrics, grid, order, scheme, params);
    let source = bottom_means_1d(fields, grid, order);
    let vcl = vcl_fluxes_1d(metrics, grid, order);

    let mut du = [grid.alloc(), grid.alloc(), grid.alloc()];
    let mut dj = grid.alloc();
    for i in 0..n {
        for (c, component) in du.iter_mut().enumerate() {
            component[at(i as isize)] = -(flux[i + 1][c] - flux[i][c]) * inv;
        }
        du[1][at(i as isize)] -=
            params.gravity * fields.h[at(i as isize)] * (source[i + 1] - source[i]) * inv;
        dj[at(i as isize)] = -(vcl[i + 1] - vcl[i]) * inv;
    }
    SemiDiscrete1 { du, dj, bottom_gates }
}
