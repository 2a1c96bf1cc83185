//! Halo filling for nodal fields, mesh coordinates, and mesh velocities.
//!
//! Grids carry both domain endpoints, so a periodic field repeats with
//! period `n - 1`: the last node samples the same physical point as the
//! first, and ghost values wrap as `f(-k) = f(n-1-k)`, `f(n-1+k) = f(k)`.
//! Ghost coordinates additionally shift by the domain length per winding,
//! which keeps the extended mesh strictly monotone through the seam.
//!
//! Outflow ghosts copy the boundary node's value (zeroth order) and continue
//! coordinates linearly from the outermost node pair. The copy keeps
//! constant and still-water states exact through the closure; the linear
//! continuation keeps the metric terms of an affine boundary mesh exact.
//!
//! Two-dimensional fills run axis 1 over interior rows first, then axis 2
//! over the full extended index range, so corner blocks are filled by the
//! second pass. For periodic meshes the two wrap orders commute; for outflow
//! the corner inherits the nearest boundary node's value either way.

use ndarray::{Array1, Array2};

use crate::metrics::{at, Grid1, Grid2, HALO};

/// Boundary closure applied when filling ghost nodes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Boundary {
    /// The domain wraps with period `n - 1` nodes.
    Periodic,
    /// States copy the boundary node outward; coordinates continue linearly.
    Outflow,
}

/// Fills the ghost frame of a nodal scalar (a solution component or a mesh
/// velocity component).
pub fn fill_scalar_1d(f: &mut Array1<f64>, grid: &Grid1, bc: Boundary) {
    let n = grid.n as isize;
    debug_assert!(grid.n >= HALO + 2);
    for k in 1..=HALO as isize {
        match bc {
            Boundary::Periodic => {
                f[at(-k)] = f[at(n - 1 - k)];
                f[at(n - 1 + k)] = f[at(k)];
            }
            Boundary::Outflow => {
                f[at(-k)] = f[at(0)];
                f[at(n - 1 + k)] = f[at(n - 1)];
            }
        }
    }
}

/// Fills ghost coordinates. Periodic ghosts wrap and shift by the domain
/// length; outflow ghosts continue linearly from the outermost node pair.
pub fn fill_coords_1d(x: &mut Array1<f64>, grid: &Grid1, bc: Boundary) {
    let n = grid.n as isize;
    let length = grid.b - grid.a;
    for k in 1..=HALO as isize {
        match bc {
            Boundary::Periodic => {
                x[at(-k)] = x[at(n - 1 - k)] - length;
                x[at(n - 1 + k)] = x[at(k)] + length;
            }
            Boundary::Outflow => {
                let kf = k as f64;
                x[at(-k)] = x[at(0)] - kf * (x[at(1)] - x[at(0)]);
                x[at(n - 1 + k)] = x[at(n - 1)] + kf * (x[at(n - 1)] - x[at(n - 2)]);
            }
        }
    }
}

/// Fills the ghost frame of a nodal scalar on a two-dimensional grid.
pub fn fill_scalar_2d(f: &mut Array2<f64>, grid: &Grid2, bc: Boundary) {
    let n1 = grid.n1 as isize;
    let n2 = grid.n2 as isize;
    debug_assert!(grid.n1 >= HALO + 2 && grid.n2 >= HALO + 2);
    for j in 0..n2 {
        for k in 1..=HALO as isize {
            match bc {
                Boundary::Periodic => {
                    f[[at(-k), at(j)]] = f[[at(n1 - 1 - k), at(j)]];
                    f[[at(n1 - 1 + k), at(j)]] = f[[at(k), at(j)]];
                }
                Boundary::Outflow => {
                    f[[at(-k), at(j)]] = f[[at(0), at(j)]];
                    f[[at(n1 - 1 + k), at(j)]] = f[[at(n1 - 1), at(j)]];
                }
            }
        }
    }
    for i in -(HALO as isize)..n1 + HALO as isize {
        for k in 1..=HALO as isize {
            match bc {
                Boundary::Periodic => {
                    f[[at(i), at(-k)]] = f[[at(i), at(n2 - 1 - k)]];
                    f[[at(i), at(n2 - 1 + k)]] = f[[at(i), at(k)]];
                }
                Boundary::Outflow => {
                    f[[at(i), at(-k)]] = f[[at(i), at(0)]];
                    f[[at(i), at(n2 - 1 + k)]] = f[[at(i), at(n2 - 1)]];
                }
            }
        }
    }
}

/// Fills ghost coordinates on a two-dimensional grid. A wrap across axis 1
/// shifts `x1` by the axis-1 domain length and leaves `x2` unshifted, and
/// symmetrically for axis 2; outflow continues both coordinate components
/// linearly along the filled axis.
pub fn fill_coords_2d(x1: &mut Array2<f64>, x2: &mut Array2<f64>, grid: &Grid2, bc: Boundary) {
    let n1 = grid.n1 as isize;
    let n2 = grid.n2 as isize;
    let len1 = grid.b1 - grid.a1;
    let len2 = grid.b2 - grid.a2;
    for j in 0..n2 {
        for k in 1..=HALO as isize {
            match bc {
                Boundary::Periodic => {
                    x1[[at(-k), at(j)]] = x1[[at(n1 - 1 - k), at(j)]] - len1;
                    x2[[at(-k), at(j)]] = x2[[at(n1 - 1 - k), at(j)]];
                    x1[[at(n1 - 1 + k), at(j)]] = x1[[at(k), at(j)]] + len1;
                    x2[[at(n1 - 1 + k), at(j)]] = x2[[at(k), at(j)]];
                }
                Boundary::Outflow => {
                    let kf = k as f64;
                    for x in [&mut *x1, &mut *x2] {
                        x[[at(-k), at(j)]] =
                            x[[at(0), at(j)]] - kf * (x[[at(1), at(j)]] - x[[at(0), at(j)]]);
                        x[[at(n1 - 1 + k), at(j)]] = x[[at(n1 - 1), at(j)]]
                            + kf * (x[[at(n1 - 1), at(j)]] - x[[at(n1 - 2), at(j)]]);
                    }
                }
            }
        }
    }
    for i in -(HALO as isize)..n1 + HALO as isize {
        for k in 1..=HALO as isize {
            match bc {
                Boundary::Periodic => {
                    x1[[at(i), at(-k)]] = x1[[at(i), at(n2 - 1 - k)]];
                    x2[[at(i), at(-k)]] = x2[[at(i), at(n2 - 1 - k)]] - len2;
                    x1[[at(i), at(n2 - 1 + k)]] = x1[[at(i), at(k)]];
                    x2[[at(i), at(n2 - 1 + k)]] = x2[[at(i), at(k)]] + len2;
                }
                Boundary::Outflow => {
                    let kf = k as f64;
                    for x in [&mut *x1, &mut *x2] {
                        x[[at(i), at(-k)]] =
                            x[[at(i), at(0)]] - kf * (x[[at(i), at(1)]] - x[[at(i), at(0)]]);
                        x[[at(i), at(n2 - 1 + k)]] = x[[at(i), at(n2 - 1)]]
                            + kf * (x[[at(i), at(n2 - 1)]] - x[[at(i), at(n2 - 2)]]);
                    }
                }
            }
        }
    }
}
