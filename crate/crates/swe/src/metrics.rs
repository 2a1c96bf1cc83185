//! Grids, discrete mesh metrics, and geometric conservation-law residuals.
//!
//! Physical coordinates `x(xi, tau)` live on a uniform computational grid
//! with nodes at both ends, `xi_i = a + i*dxi`, `dxi = (b-a)/(N-1)`. All
//! derivative and flux operators are built from one coefficient family
//! `alpha_{p,m}` (orders `2p = 2, 4, 6`), so the metric identities below hold
//! to rounding rather than merely to truncation order:
//!
//! ```text
//! m_11 =  D2(x2),  m_12 = -D2(x1),  m_21 = -D1(x2),  m_22 = D1(x1),
//! J = m_11*m_22 - m_12*m_21,
//! mt_l = -xdot1*m_l1 - xdot2*m_l2,
//! ```
//!
//! where `Dl` is the central difference `Dl f = sum_m alpha_m
//! (f(+m) - f(-m)) / (2 dxi_l)` along direction `l`. Because interface-flux
//! differencing telescopes exactly to `Dl`, the discrete surface conservation
//! laws `D1(m_1k) + D2(m_2k) = 0` follow from commuting one-dimensional
//! differences and hold to rounding on any mesh; the volume conservation law
//! is enforced by evolving `J` with the interface fluxes of `mt_l`.
//!
//! Arrays carry a frame of [`HALO`] ghost nodes. Stencils reach at most
//! [`STENCIL`] nodes outward, and metrics are provided on the
//! stencil-extended box, which is why coordinates need the full frame.

use ndarray::{Array1, Array2};

use crate::error::SolverError;

/// Ghost-frame width of every field array. Coordinates must be valid on the
/// whole frame; metrics are computed on the inner `STENCIL`-extended box.
pub const HALO: usize = 6;

/// Maximum stencil reach of flux combinations and reconstructions.
pub const STENCIL: usize = 3;

/// Array index of logical node `i` (interior nodes are `0..n`).
#[inline]
pub fn at(i: isize) -> usize {
    debug_assert!(i >= -(HALO as isize));
    (i + HALO as isize) as usize
}

/// Discretisation order `2p` with its flux-combination coefficients.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SchemeOrder {
    /// `p = 1`, second order.
    Second,
    /// `p = 2`, fourth order.
    Fourth,
    /// `p = 3`, sixth order.
    Sixth,
}

impl SchemeOrder {
    pub fn from_p(p: usize) -> Result<Self, SolverError> {
        match p {
            1 => Ok(SchemeOrder::Second),
            2 => Ok(SchemeOrder::Fourth),
            3 => Ok(SchemeOrder::Sixth),
            _ => Err(SolverError::Config(format!("half-order p must be 1, 2 or 3, got {p}"))),
        }
    }

    #[inline]
    pub fn p(self) -> usize {
        match self {
            SchemeOrder::Second => 1,
            SchemeOrder::Fourth => 2,
            SchemeOrder::Sixth => 3,
        }
    }

    /// Coefficients `alpha_{p,m}` for `m = 1..=p`, satisfying the moment
    /// conditions `sum_m m*alpha_m = 1` and `sum_m m^(2s-1)*alpha_m = 0`
    /// for `s = 2..=p`.
    #[inline]
    pub fn alpha(self) -> &'static [f64] {
        match self {
            SchemeOrder::Second => &[1.0],
            SchemeOrder::Fourth => &[4.0 / 3.0, -1.0 / 6.0],
            SchemeOrder::Sixth => &[1.5, -0.3, 1.0 / 30.0],
        }
    }
}

/// Uniform computational grid in two dimensions; extents double as the
/// physical domain of the initial mesh.
#[derive(Clone, Copy, Debug)]
pub struct Grid2 {
    pub n1: usize,
    pub n2: usize,
    pub a1: f64,
    pub b1: f64,
    pub a2: f64,
    pub b2: f64,
    pub periodic: bool,
}

impl Grid2 {
    pub fn new(
        n1: usize,
        n2: usize,
        extent1: (f64, f64),
        extent2: (f64, f64),
        periodic: bool,
    ) -> Result<Self, SolverError> {
        if n1 < 2 || n2 < 2 {
            return Err(SolverError::Config(format!("grid needs at least 2 nodes per direction, got {n1}x{n2}")));
        }
        if !(extent1.0 < extent1.1) || !(extent2.0 < extent2.1) {
            return Err(SolverError::Config("grid extents must be increasing finite intervals".into()));
        }
        Ok(Self { n1, n2, a1: extent1.0, b1: extent1.1, a2: extent2.0, b2: extent2.1, periodic })
    }

    #[inline]
    pub fn dxi1(&self) -> f64 {
        (self.b1 - self.a1) / (self.n1 - 1) as f64
    }

    #[inline]
    pub fn dxi2(&self) -> f64 {
        (self.b2 - self.a2) / (self.n2 - 1) as f64
    }

    #[inline]
    pub fn xi1(&self, i: isize) -> f64 {
        self.a1 + i as f64 * self.dxi1()
    }

    #[inline]
    pub fn xi2(&self, j: isize) -> f64 {
        self.a2 + j as f64 * self.dxi2()
    }

    /// Zeroed field array covering the grid plus ghost frame.
    pub fn alloc(&self) -> Array2<f64> {
        Array2::zeros((self.n1 + 2 * HALO, self.n2 + 2 * HALO))
    }

    /// Coordinates of the uniform (identity) mesh on the whole ghost frame.
    pub fn uniform_mesh(&self) -> (Array2<f64>, Array2<f64>) {
        let mut x1 = self.alloc();
        let mut x2 = self.alloc();
        for i in -(HALO as isize)..(self.n1 + HALO) as isize {
            for j in -(HALO as isize)..(self.n2 + HALO) as isize {
                x1[[at(i), at(j)]] = self.xi1(i);
                x2[[at(i), at(j)]] = self.xi2(j);
            }
        }
        (x1, x2)
    }
}

/// Uniform computational grid in one dimension.
#[derive(Clone, Copy, Debug)]
pub struct Grid1 {
    pub n: usize,
    pub a: f64,
    pub b: f64,
    pub periodic: bool,
}

impl Grid1 {
    pub fn new(n: usize, extent: (f64, f64), periodic: bool) -> Result<Self, SolverError> {
        if n < 2 {
            return Err(SolverError::Config(format!("grid needs at least 2 nodes, got {n}")));
        }
        if !(extent.0 < extent.1) {
            return Err(SolverError::Config("grid extent must be an increasing finite interval".into()));
        }
        Ok(Self { n, a: extent.0, b: extent.1, periodic })
    }

    #[inline]
    pub fn dxi(&self) -> f64 {
        (self.b - self.a) / (self.n - 1) as f64
    }

    #[inline]
    pub fn xi(&self, i: isize) -> f64 {
        self.a + i as f64 * self.dxi()
    }

    pub fn alloc(&self) -> Array1<f64> {
        Array1::zeros(self.n + 2 * HALO)
    }

    pub fn uniform_mesh(&self) -> Array1<f64> {
        let mut x = self.alloc();
        for i in -(HALO as isize)..(self.n + HALO) as isize {
            x[at(i)] = self.xi(i);
        }
        x
    }
}

/// Mesh metrics on the stencil-extended box: `m_lk` approximates
/// `J * d(xi_l)/d(x_k)`, `mt_l` approximates `J * d(xi_l)/dt`, and `jac` is
/// the metric determinant.
#[derive(Clone, Debug)]
pub struct Metrics2 {
    pub m11: Array2<f64>,
    pub m12: Array2<f64>,
    pub m21: Array2<f64>,
    pub m22: Array2<f64>,
    pub mt1: Array2<f64>,
    pub mt2: Array2<f64>,
    pub jac: Array2<f64>,
}

impl Metrics2 {
    /// Metric row `(m_l1, m_l2)` for sweep axis `l` (1 or 2).
    #[inline]
    pub fn row(&self, axis: usize) -> (&Array2<f64>, &Array2<f64>) {
        match axis {
            1 => (&self.m11, &self.m12),
            2 => (&self.m21, &self.m22),
            _ => panic!("axis must be 1 or 2, got {axis}"),
        }
    }

    #[inline]
    pub fn mt(&self, axis: usize) -> &Array2<f64> {
        match axis {
            1 => &self.mt1,
            2 => &self.mt2,
            _ => panic!("axis must be 1 or 2, got {axis}"),
        }
    }
}

/// One-dimensional metrics: the discrete `J = dx/dxi` and `jxt = J*d(xi)/dt
/// = -xdot` (the spatial metric `J*d(xi)/dx` is identically one).
#[derive(Clone, Debug)]
pub struct Metrics1 {
    pub jac: Array1<f64>,
    pub jxt: Array1<f64>,
}

/// Spatial metrics from coordinates, on the stencil-extended box.
/// Coordinates must be valid on the full ghost frame.
pub fn spatial_metrics(x1: &Array2<f64>, x2: &Array2<f64>, grid: &Grid2, order: SchemeOrder) -> Metrics2 {
    let alpha = order.alpha();
    let (d1, d2) = (grid.dxi1(), grid.dxi2());
    let mut m = Metrics2 {
        m11: grid.alloc(),
        m12: grid.alloc(),
        m21: grid.alloc(),
        m22: grid.alloc(),
        mt1: grid.alloc(),
        mt2: grid.alloc(),
        jac: grid.alloc(),
    };
    let ext = STENCIL as isize;
    for i in -ext..(grid.n1 as isize + ext) {
        for j in -ext..(grid.n2 as isize + ext) {
            let (ia, ja) = (at(i), at(j));
            let mut m11 = 0.0;
            let mut m12 = 0.0;
            let mut m21 = 0.0;
            let mut m22 = 0.0;
            for (k, &a) in alpha.iter().enumerate() {
                let s = (k + 1) as isize;
                m11 += a * (x2[[ia, at(j + s)]] - x2[[ia, at(j - s)]]);
                m12 -= a * (x1[[ia, at(j + s)]] - x1[[ia, at(j - s)]]);
                m21 -= a * (x2[[at(i + s), ja]] - x2[[at(i - s), ja]]);
                m22 += a * (x1[[at(i + s), ja]] - x1[[at(i - s), ja]]);
            }
            m11 /= 2.0 * d2;
            m12 /= 2.0 * d2;
            m21 /= 2.0 * d1;
            m22 /= 2.0 * d1;
            m.m11[[ia, ja]] = m11;
            m.m12[[ia, ja]] = m12;
            m.m21[[ia, ja]] = m21;
            m.m22[[ia, ja]] = m22;
            m.jac[[ia, ja]] = m11 * m22 - m12 * m21;
        }
    }
    m
}

/// Temporal metrics `mt_l = -xdot1*m_l1 - xdot2*m_l2` on the
/// stencil-extended box; spatial metrics must already be present.
pub fn temporal_metrics(m: &mut Metrics2, xdot1: &Array2<f64>, xdot2: &Array2<f64>, grid: &Grid2) {
    let ext = STENCIL as isize;
    for i in -ext..(grid.n1 as isize + ext) {
        for j in -ext..(grid.n2 as isize + ext) {
            let (ia, ja) = (at(i), at(j));
            let (v1, v2) = (xdot1[[ia, ja]], xdot2[[ia, ja]]);
            m.mt1[[ia, ja]] = -v1 * m.m11[[ia, ja]] - v2 * m.m12[[ia, ja]];
            m.mt2[[ia, ja]] = -v1 * m.m21[[ia, ja]] - v2 * m.m22[[ia, ja]];
        }
    }
}

/// One-dimensional metrics from coordinates and mesh velocity.
pub fn metrics_1d(x: &Array1<f64>, xdot: &Array1<f64>, grid: &Grid1, order: SchemeOrder) -> Metrics1 {
    let alpha = order.alpha();
    let dxi = grid.dxi();
    let mut out = Metrics1 { jac: grid.alloc(), jxt: grid.alloc() };
    let ext = STENCIL as isize;
    for i in -ext..(grid.n as isize + ext) {
        let mut j = 0.0;
        for (k, &a) in alpha.iter().enumerate() {
            let s = (k + 1) as isize;
            j += a * (x[at(i + s)] - x[at(i - s)]);
        }
        out.jac[at(i)] = j / (2.0 * dxi);
        out.jxt[at(i)] = -xdot[at(i)];
    }
    out
}

/// Combined two-point interface fluxes of a scalar node line.
///
/// `line[k]` holds node `k - STENCIL`; `out[I]` receives the flux through the
/// interface between nodes `I-1` and `I`, for `I = 0..=n` with
/// `n = line.len() - 2*STENCIL`:
///
/// ```text
/// out[I] = sum_{m=1}^{p} alpha_m sum_{pairs (i, i+m) straddling I} (line_i + line_{i+m})/2.
/// ```
pub fn interface_flux_line(line: &[f64], order: SchemeOrder, out: &mut [f64]) {
    let n = line.len() - 2 * STENCIL;
    debug_assert_eq!(out.len(), n + 1);
    out.fill(0.0);
    let alpha = order.alpha();
    let mut pair = vec![0.0; line.len()];
    for (k, &a) in alpha.iter().enumerate() {
        let m = k + 1;
        for t in 0..line.len() - m {
            pair[t] = 0.5 * (line[t] + line[t + m]);
        }
        // Interface I is straddled by the pairs starting at nodes
        // I-m ..= I-1, i.e. line offsets I+STENCIL-m ..= I+STENCIL-1. The
        // group is summed outside-in and the widths fold in ascending order
        // so that reversed lines combine to bitwise-identical values.
        for (iface, slot) in out.iter_mut().enumerate() {
            let base = iface + STENCIL - m;
            let g = match m {
                1 => pair[base],
                2 => pair[base] + pair[base + 1],
                3 => (pair[base] + pair[base + 2]) + pair[base + 1],
                _ => unreachable!("pair widths run 1..=3"),
            };
            *slot += a * g;
        }
    }
}

/// Surface conservation-law residuals of a metric set at the interior nodes:
///
/// ```text
/// r_k = (1/dxi1) * d(flux of m_1k) + (1/dxi2) * d(flux of m_2k),  k = 1, 2.
/// ```
///
/// Both residual fields vanish to rounding for metrics produced by
/// [`spatial_metrics`].
pub fn scl_residual(m: &Metrics2, grid: &Grid2, order: SchemeOrder) -> (Array2<f64>, Array2<f64>) {
    let mut r1 = grid.alloc();
    let mut r2 = grid.alloc();
    let (n1, n2) = (grid.n1, grid.n2);
    let (d1, d2) = (grid.dxi1(), grid.dxi2());

    let mut line = vec![0.0; n1.max(n2) + 2 * STENCIL];
    let mut flux = vec![0.0; n1.max(n2) + 1];

    for (field, which, axis) in [
        (&m.m11, 1, 1),
        (&m.m12, 2, 1),
        (&m.m21, 1, 2),
        (&m.m22, 2, 2),
    ] {
        let res = if which == 1 { &mut r1 } else { &mut r2 };
        if axis == 1 {
            for j in 0..n2 as isize {
                for i in -(STENCIL as isize)..(n1 + STENCIL) as isize {
                    line[(i + STENCIL as isize) as usize] = field[[at(i), at(j)]];
                }
                interface_flux_line(&line[..n1 + 2 * STENCIL], order, &mut flux[..n1 + 1]);
                for i in 0..n1 {
                    res[[at(i as isize), at(j)]] += (flux[i + 1] - flux[i]) / d1;
                }
            }
        } else {
            for i in 0..n1 as isize {
                for j in -(STENCIL as isize)..(n2 + STENCIL) as isize {
                    line[(j + STENCIL as isize) as usize] = field[[at(i), at(j)]];
                }
                interface_flux_line(&line[..n2 + 2 * STENCIL], order, &mut flux[..n2 + 1]);
                for j in 0..n2 {
                    res[[at(i), at(j as isize)]] += (flux[j + 1] - flux[j]) / d2;
                }
            }
        }
    }
    (r1, r2)
}

/// Minimum Jacobian over the interior and its location; used for tangling
/// detection on freshly computed metrics.
pub fn min_jacobian(m: &Metrics2, grid: &Grid2) -> (f64, (usize, usize)) {
    let mut best = f64::INFINITY;
    let mut loc = (0, 0);
    for i in 0..grid.n1 {
        for j in 0..grid.n2 {
            let v = m.jac[[at(i as isize), at(j as isize)]];
            if v < best {
                best = v;
                loc = (i, j);
            }
        }
    }
    (best, loc)
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOL_MOMENT: f64 = 1e-14;
    const TOL_EXACT: f64 = 1e-13;
    const TOL_SCL: f64 = 1e-12;

    #[test]
    fn alpha_satisfies_moment_conditions() {
        for order in [SchemeOrder::Second, SchemeOrder::Fourth, SchemeOrder::Sixth] {
            let alpha = order.alpha();
            let p = order.p();
            assert_eq!(alpha.len(), p);
            for s in 1..=p {
                let want = if s == 1 { 1.0 } else { 0.0 };
                let sum: f64 = alpha
                    .iter()
                    .enumerate()
                    .map(|(k, &a)| ((k + 1) as f64).powi(2 * s as i32 - 1) * a)
                    .sum();
                assert!((sum - want).abs() < TOL_MOMENT, "p = {p}, s = {s}: {sum}");
            }
        }
    }

    #[test]
    fn order_construction_validates() {
        assert!(SchemeOrder::from_p(0).is_err());
        assert!(SchemeOrder::from_p(4).is_err());
        assert_eq!(SchemeOrder::from_p(2).unwrap(), SchemeOrder::Fourth);
    }

    fn analytic_mesh(
        grid: &Grid2,
        f: impl Fn(f64, f64) -> (f64, f64),
    ) -> (Array2<f64>, Array2<f64>) {
        let mut x1 = grid.alloc();
        let mut x2 = grid.alloc();
        for i in -(HALO as isize)..(grid.n1 + HALO) as isize {
            for j in -(HALO as isize)..(grid.n2 + HALO) as isize {
                let (u, v) = f(grid.xi1(i), grid.xi2(j));
                x1[[at(i), at(j)]] = u;
                x2[[at(i), at(j)]] = v;
            }
        }
        (x1, x2)
    }

    #[test]
    fn identity_mesh_has_unit_metrics() {
        let grid = Grid2::new(9, 11, (0.0, 1.0), (0.0, 2.0), false).unwrap();
        let (x1, x2) = grid.uniform_mesh();
        for order in [SchemeOrder::Second, SchemeOrder::Fourth, SchemeOrder::Sixth] {
            let m = spatial_metrics(&x1, &x2, &grid, order);
            for i in 0..grid.n1 as isize {
                for j in 0..grid.n2 as isize {
                    assert!((m.m11[[at(i), at(j)]] - 1.0).abs() < TOL_EXACT);
                    assert!(m.m12[[at(i), at(j)]].abs() < TOL_EXACT);
                    assert!(m.m21[[at(i), at(j)]].abs() < TOL_EXACT);
                    assert!((m.m22[[at(i), at(j)]] - 1.0).abs() < TOL_EXACT);
                    assert!((m.jac[[at(i), at(j)]] - 1.0).abs() < TOL_EXACT);
                }
            }
        }
    }

    #[test]
    fn affine_mesh_metrics_are_exact() {
        let grid = Grid2::new(8, 8, (0.0, 1.0), (0.0, 1.0), false).unwrap();
        let (x1, x2) = analytic_mesh(&grid, |u, v| (2.0 * u, 3.0 * v));
        let m = spatial_metrics(&x1, &x2, &grid, SchemeOrder::Fourth);
        let (i, j) = (at(3), at(4));
        assert!((m.m11[[i, j]] - 3.0).abs() < TOL_EXACT);
        assert!(m.m12[[i, j]].abs() < TOL_EXACT);
        assert!(m.m21[[i, j]].abs() < TOL_EXACT);
        assert!((m.m22[[i, j]] - 2.0).abs() < TOL_EXACT);
        assert!((m.jac[[i, j]] - 6.0).abs() < TOL_EXACT);
    }

    #[test]
    fn rotated_mesh_keeps_unit_jacobian() {
        let grid = Grid2::new(10, 10, (0.0, 1.0), (0.0, 1.0), false).unwrap();
        let theta = 0.37f64;
        let (c, s) = (theta.cos(), theta.sin());
        let (x1, x2) = analytic_mesh(&grid, |u, v| (c * u - s * v, s * u + c * v));
        for order in [SchemeOrder::Second, SchemeOrder::Fourth, SchemeOrder::Sixth] {
            let m = spatial_metrics(&x1, &x2, &grid, order);
            for i in 0..grid.n1 as isize {
                for j in 0..grid.n2 as isize {
                    assert!((m.jac[[at(i), at(j)]] - 1.0).abs() < TOL_EXACT);
                }
            }
        }
    }

    #[test]
    fn temporal_metrics_read_off() {
        let grid = Grid2::new(6, 6, (0.0, 1.0), (0.0, 1.0), false).unwrap();
        let (x1, x2) = grid.uniform_mesh();
        let mut m = spatial_metrics(&x1, &x2, &grid, SchemeOrder::Second);
        let mut v1 = grid.alloc();
        let mut v2 = grid.alloc();
        v1.fill(1.0);
        v2.fill(2.0);
        temporal_metrics(&mut m, &v1, &v2, &grid);
        // Identity metrics: mt1 = -xdot1, mt2 = -xdot2.
        assert!((m.mt1[[at(2), at(3)]] + 1.0).abs() < TOL_EXACT);
        assert!((m.mt2[[at(2), at(3)]] + 2.0).abs() < TOL_EXACT);
    }

    #[test]
    fn interface_flux_constant_and_linear() {
        for order in [SchemeOrder::Second, SchemeOrder::Fourth, SchemeOrder::Sixth] {
            let n = 9usize;
            let mut line = vec![0.0; n + 2 * STENCIL];
            let mut flux = vec![0.0; n + 1];

            line.fill(2.75);
            interface_flux_line(&line, order, &mut flux);
            for &f in &flux {
                assert!((f - 2.75).abs() < TOL_EXACT);
            }

            for (k, slot) in line.iter_mut().enumerate() {
                *slot = k as f64 - STENCIL as f64;
            }
            interface_flux_line(&line, order, &mut flux);
            for (iface, &f) in flux.iter().enumerate() {
                let want = iface as f64 - 0.5;
                assert!((f - want).abs() < TOL_EXACT, "order {order:?}, interface {iface}");
            }
        }
    }

    #[test]
    fn scl_residual_vanishes_on_identity_mesh() {
        let grid = Grid2::new(12, 12, (0.0, 1.0), (0.0, 1.0), false).unwrap();
        let (x1, x2) = grid.uniform_mesh();
        let m = spatial_metrics(&x1, &x2, &grid, SchemeOrder::Sixth);
        let (r1, r2) = scl_residual(&m, &grid, SchemeOrder::Sixth);
        for i in 0..grid.n1 as isize {
            for j in 0..grid.n2 as isize {
                assert_eq!(r1[[at(i), at(j)]], 0.0);
                assert_eq!(r2[[at(i), at(j)]], 0.0);
            }
        }
    }

    #[test]
    fn scl_residual_vanishes_on_wavy_mesh() {
        let grid = Grid2::new(20, 20, (0.0, 1.0), (0.0, 1.0), false).unwrap();
        let pi = std::f64::consts::PI;
        let (x1, x2) = analytic_mesh(&grid, |u, v| {
            (
                u + 0.1 * (pi * u).sin() * (pi * v).sin(),
                v + 0.1 * (pi * u).sin() * (pi * v).sin(),
            )
        });
        for order in [SchemeOrder::Fourth, SchemeOrder::Sixth] {
            let m = spatial_metrics(&x1, &x2, &grid, order);
            let mut scale = 0f64;
            for v in m.m11.iter().chain(&m.m12).chain(&m.m21).chain(&m.m22) {
                scale = scale.max(v.abs());
            }
            scale *= 1.0 / grid.dxi1() + 1.0 / grid.dxi2();
            let (r1, r2) = scl_residual(&m, &grid, order);
            for i in 0..grid.n1 as isize {
                for j in 0..grid.n2 as isize {
                    assert!(r1[[at(i), at(j)]].abs() <= TOL_SCL * scale);
                    assert!(r2[[at(i), at(j)]].abs() <= TOL_SCL * scale);
                }
            }
        }
    }

    #[test]
    fn one_dimensional_jacobian_is_exact_for_affine() {
        let grid = Grid1::new(11, (0.0, 2.0), false).unwrap();
        let mut x = grid.alloc();
        let mut xdot = grid.alloc();
        for i in -(HALO as isize)..(grid.n + HALO) as isize {
            x[at(i)] = 1.5 * grid.xi(i) + 0.25;
            xdot[at(i)] = 0.4;
        }
        let m = metrics_1d(&x, &xdot, &grid, SchemeOrder::Sixth);
        for i in 0..grid.n as isize {
            assert!((m.jac[at(i)] - 1.5).abs() < TOL_EXACT);
            assert!((m.jxt[at(i)] + 0.4).abs() < TOL_EXACT);
        }
    }

    /// Semi-discrete volume conservation: the interface fluxes of `mt`
    /// approximate the time derivative of the discrete Jacobian at order
    /// `2p`. The mesh moves linearly in time, so a central difference of the
    /// discrete Jacobian in `tau` is exact and serves as the oracle.
    #[test]
    fn vcl_flux_converges_to_jacobian_rate() {
        let pi = std::f64::consts::PI;
        for order in [SchemeOrder::Second, SchemeOrder::Fourth, SchemeOrder::Sixth] {
            let sizes = [12usize, 18, 27];
            let mut errors = Vec::new();
            for &n in &sizes {
                let grid = Grid2::new(n, n, (0.0, 1.0), (0.0, 1.0), false).unwrap();
                let shape = |u: f64, v: f64| (pi * u).sin() * (2.0 * pi * v).cos();
                let mesh_at = |tau: f64| {
                    analytic_mesh(&grid, |u, v| {
                        let s = shape(u, v);
                        (u + (0.02 + 0.03 * tau) * s, v - (0.01 + 0.02 * tau) * s)
                    })
                };

                // Oracle: d(J_discrete)/d(tau) by central difference; J is
                // quadratic in tau, so this is exact up to rounding.
                let dtau = 0.05;
                let (x1p, x2p) = mesh_at(dtau);
                let (x1m, x2m) = mesh_at(-dtau);
                let jp = spatial_metrics(&x1p, &x2p, &grid, order).jac;
                let jm = spatial_metrics(&x1m, &x2m, &grid, order).jac;

                // Scheme side at tau = 0: interface fluxes of mt.
                let (x1, x2) = mesh_at(0.0);
                let mut xd1 = grid.alloc();
                let mut xd2 = grid.alloc();
                for i in -(HALO as isize)..(grid.n1 + HALO) as isize {
                    for j in -(HALO as isize)..(grid.n2 + HALO) as isize {
                        let s = shape(grid.xi1(i), grid.xi2(j));
                        xd1[[at(i), at(j)]] = 0.03 * s;
                        xd2[[at(i), at(j)]] = -0.02 * s;
                    }
                }
                let mut m = spatial_metrics(&x1, &x2, &grid, order);
                temporal_metrics(&mut m, &xd1, &xd2, &grid);

                let mut worst = 0f64;
                let mut line = vec![0.0; n + 2 * STENCIL];
                let mut flux = vec![0.0; n + 1];
                let mut rate = grid.alloc();
                for j in 0..n as isize {
                    for i in -(STENCIL as isize)..(n + STENCIL) as isize {
                        line[(i + STENCIL as isize) as usize] = m.mt1[[at(i), at(j)]];
                    }
                    interface_flux_line(&line, order, &mut flux);
                    for i in 0..n {
                        rate[[at(i as isize), at(j)]] -= (flux[i + 1] - flux[i]) / grid.dxi1();
                    }
                }
                for i in 0..n as isize {
                    for j in -(STENCIL as isize)..(n + STENCIL) as isize {
                        line[(j + STENCIL as isize) as usize] = m.mt2[[at(i), at(j)]];
                    }
                    interface_flux_line(&line, order, &mut flux);
                    for j in 0..n {
                        rate[[at(i), at(j as isize)]] -= (flux[j + 1] - flux[j]) / grid.dxi2();
                    }
                }
                for i in 0..n as isize {
                    for j in 0..n as isize {
                        let oracle = (jp[[at(i), at(j)]] - jm[[at(i), at(j)]]) / (2.0 * dtau);
                        worst = worst.max((rate[[at(i), at(j)]] - oracle).abs());
                    }
                }
                errors.push(worst);
            }
            let p = order.p() as f64;
            for w in errors.windows(2) {
                let rate = (w[0] / w[1]).ln() / (1.5f64).ln();
                assert!(
                    rate >= 2.0 * p - 0.5,
                    "order {order:?}: observed rate {rate} from errors {errors:?}"
                );
            }
        }
    }
}
