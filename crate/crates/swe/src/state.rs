//! Pointwise state algebra for the reformulated shallow water equations.
//!
//! The two-dimensional state is `U = (h, hv1, hv2, b)` with fluxes
//!
//! ```text
//! F1 = (hv1, hv1*v1 + g*h^2/2, hv1*v2, 0),
//! F2 = (hv2, hv2*v1, hv2*v2 + g*h^2/2, 0),
//! ```
//!
//! and a non-conservative source `-g*h * d(b)/dx_l` acting on the momentum
//! components. The modified energy pair carries a quadratic bottom term,
//!
//! ```text
//! eta  = h*(v1^2+v2^2)/2 + g*h^2/2 + g*h*b + gamma*g*b^2,
//! q_l  = h*v_l*(v1^2+v2^2)/2 + g*h^2*v_l + g*h*b*v_l,
//! ```
//!
//! whose gradient `V = d(eta)/dU = (g*(h+b) - (v1^2+v2^2)/2, v1, v2,
//! g*h + 2*gamma*g*b)` is the energy-variable vector used throughout the
//! flux and dissipation constructions. The potentials
//!
//! ```text
//! phi   = V.U  - eta = g*h^2/2 + g*h*b + gamma*g*b^2,
//! psi_l = V.F_l - q_l + g*h*v_l*b = g*h^2*v_l/2 + g*h*v_l*b,
//! ```
//!
//! close the energy analysis. One-dimensional variants use the reduced state
//! `(h, hv1, b)` with the same formulas restricted to `v2 = 0`.
//!
//! The interface dissipation additionally needs the entropy machinery of the
//! plain three-variable system: the first three energy variables, the scaled
//! eigenvector matrix `R` with `R R^T = d(U_hat)/d(V_hat)`, and the rotation
//! that aligns a metric direction with the first coordinate axis.

use crate::error::SolverError;

/// Depths below this are treated as positivity violations.
pub const H_MIN: f64 = 1e-13;

/// Gravity and the bottom-energy weight `gamma`.
///
/// The energy Hessian is invertible iff `gamma != 1/2` and positive definite
/// for `gamma > 1/2`; construction rejects `gamma` within `1e-12` of `1/2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhysicsParams {
    pub gravity: f64,
    pub gamma: f64,
}

impl PhysicsParams {
    pub fn new(gravity: f64, gamma: f64) -> Result<Self, SolverError> {
        if !(gravity > 0.0) {
            return Err(SolverError::Config(format!("gravity must be positive, got {gravity}")));
        }
        if (gamma - 0.5).abs() <= 1e-12 {
            return Err(SolverError::Config(format!(
                "gamma = {gamma} is too close to 1/2; the energy Hessian degenerates"
            )));
        }
        Ok(Self { gravity, gamma })
    }

    /// Default bottom-energy weight `gamma = 1`.
    pub fn with_gravity(gravity: f64) -> Self {
        Self { gravity, gamma: 1.0 }
    }
}

/// Two-dimensional conserved state `(h, hv1, hv2, b)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Conserved2 {
    pub h: f64,
    pub hv1: f64,
    pub hv2: f64,
    pub b: f64,
}

/// One-dimensional conserved state `(h, hv1, b)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Conserved1 {
    pub h: f64,
    pub hv1: f64,
    pub b: f64,
}

impl Conserved2 {
    /// Validating constructor; rejects depths below [`H_MIN`].
    pub fn new(h: f64, hv1: f64, hv2: f64, b: f64) -> Result<Self, SolverError> {
        if !(h >= H_MIN) {
            return Err(SolverError::Config(format!("depth must be at least {H_MIN:e}, got {h}")));
        }
        Ok(Self { h, hv1, hv2, b })
    }

    pub fn from_primitive(h: f64, v1: f64, v2: f64, b: f64) -> Self {
        Self { h, hv1: h * v1, hv2: h * v2, b }
    }

    #[inline]
    pub fn v1(&self) -> f64 {
        self.hv1 / self.h
    }

    #[inline]
    pub fn v2(&self) -> f64 {
        self.hv2 / self.h
    }

    #[inline]
    pub fn as_array(&self) -> [f64; 4] {
        [self.h, self.hv1, self.hv2, self.b]
    }
}

impl Conserved1 {
    pub fn new(h: f64, hv1: f64, b: f64) -> Result<Self, SolverError> {
        if !(h >= H_MIN) {
            return Err(SolverError::Config(format!("depth must be at least {H_MIN:e}, got {h}")));
        }
        Ok(Self { h, hv1, b })
    }

    pub fn from_primitive(h: f64, v1: f64, b: f64) -> Self {
        Self { h, hv1: h * v1, b }
    }

    #[inline]
    pub fn v1(&self) -> f64 {
        self.hv1 / self.h
    }

    #[inline]
    pub fn as_array(&self) -> [f64; 3] {
        [self.h, self.hv1, self.b]
    }
}

/// Energy density, energy fluxes and the potentials that close the
/// energy analysis; all evaluated pointwise from one state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnergyQuantities {
    /// Energy density `eta`.
    pub eta: f64,
    /// Energy fluxes `q_l`.
    pub q: [f64; 2],
    /// Potential `phi = V.U - eta`.
    pub phi: f64,
    /// Flux potentials `psi_l = V.F_l - q_l + g*h*v_l*b`.
    pub psi: [f64; 2],
}

/// Physical flux `F_dir(U)`; `dir` is 1 or 2.
pub fn physical_flux(u: Conserved2, p: PhysicsParams, dir: usize) -> [f64; 4] {
    let (h, v1, v2) = (u.h, u.v1(), u.v2());
    let pressure = 0.5 * p.gravity * h * h;
    match dir {
        1 => [u.hv1, u.hv1 * v1 + pressure, u.hv1 * v2, 0.0],
        2 => [u.hv2, u.hv2 * v1, u.hv2 * v2 + pressure, 0.0],
        _ => panic!("flux direction must be 1 or 2, got {dir}"),
    }
}

/// One-dimensional physical flux `(hv1, hv1*v1 + g*h^2/2, 0)`.
pub fn physical_flux_1d(u: Conserved1, p: PhysicsParams) -> [f64; 3] {
    [u.hv1, u.hv1 * u.v1() + 0.5 * p.gravity * u.h * u.h, 0.0]
}

/// Energy density, fluxes and potentials of one state.
pub fn energy_pair(u: Conserved2, p: PhysicsParams) -> EnergyQuantities {
    let (g, gamma) = (p.gravity, p.gamma);
    let (h, b, v1, v2) = (u.h, u.b, u.v1(), u.v2());
    let kinetic = 0.5 * h * (v1 * v1 + v2 * v2);
    let eta = kinetic + 0.5 * g * h * h + g * h * b + gamma * g * b * b;
    let q_common = |vl: f64| kinetic * vl + g * h * h * vl + g * h * b * vl;
    let phi = 0.5 * g * h * h + g * h * b + gamma * g * b * b;
    let psi = |vl: f64| 0.5 * g * h * h * vl + g * h * vl * b;
    EnergyQuantities { eta, q: [q_common(v1), q_common(v2)], phi, psi: [psi(v1), psi(v2)] }
}

/// One-dimensional energy pair; `q` and `psi` carry only the `x1` component.
pub fn energy_pair_1d(u: Conserved1, p: PhysicsParams) -> EnergyQuantities {
    let full = energy_pair(Conserved2 { h: u.h, hv1: u.hv1, hv2: 0.0, b: u.b }, p);
    EnergyQuantities { eta: full.eta, q: [full.q[0], 0.0], phi: full.phi, psi: [full.psi[0], 0.0] }
}

/// Energy variables `V = d(eta)/dU`.
pub fn energy_variables(u: Conserved2, p: PhysicsParams) -> [f64; 4] {
    let (g, gamma) = (p.gravity, p.gamma);
    let (v1, v2) = (u.v1(), u.v2());
    [
        g * (u.h + u.b) - 0.5 * (v1 * v1 + v2 * v2),
        v1,
        v2,
        g * u.h + 2.0 * gamma * g * u.b,
    ]
}

/// One-dimensional energy variables `(g*(h+b) - v1^2/2, v1, g*h + 2*gamma*g*b)`.
pub fn energy_variables_1d(u: Conserved1, p: PhysicsParams) -> [f64; 3] {
    let v = energy_variables(Conserved2 { h: u.h, hv1: u.hv1, hv2: 0.0, b: u.b }, p);
    [v[0], v[1], v[3]]
}

/// Hessian `d^2(eta)/dU^2 = dV/dU`; symmetric, invertible iff `gamma != 1/2`,
/// positive definite for `gamma > 1/2`.
pub fn energy_hessian(u: Conserved2, p: PhysicsParams) -> [[f64; 4]; 4] {
    let (g, gamma) = (p.gravity, p.gamma);
    let (h, v1, v2) = (u.h, u.v1(), u.v2());
    let gh = g * h;
    [
        [(gh + v1 * v1 + v2 * v2) / h, -v1 / h, -v2 / h, g],
        [-v1 / h, 1.0 / h, 0.0, 0.0],
        [-v2 / h, 0.0, 1.0 / h, 0.0],
        [g, 0.0, 0.0, 2.0 * gamma * g],
    ]
}

/// First three energy variables: the entropy variables `V_hat` of the plain
/// three-variable system at frozen bottom.
pub fn original_entropy_variables(u: Conserved2, p: PhysicsParams) -> [f64; 3] {
    let v = energy_variables(u, p);
    [v[0], v[1], v[2]]
}

/// First two energy variables in one dimension: the entropy variables of the
/// plain `(h, hv1)` system at frozen bottom.
pub fn original_entropy_variables_1d(u: Conserved1, p: PhysicsParams) -> [f64; 2] {
    let v = energy_variables_1d(u, p);
    [v[0], v[1]]
}

/// Scaled eigenvector matrix and wave speeds of the plain system's
/// `x1`-direction Jacobian:
///
/// ```text
/// R = [[1, 1, 0], [v1+c, v1-c, 0], [v2, v2, 1]] * diag(1/sqrt(2g), 1/sqrt(2g), sqrt(h)),
/// lambda = (v1 + c, v1 - c, v1),   c = sqrt(g*h),
/// ```
///
/// normalised so that `R R^T = d(U_hat)/d(V_hat)`.
pub fn eigen_scaling(u: Conserved2, p: PhysicsParams) -> ([[f64; 3]; 3], [f64; 3]) {
    let g = p.gravity;
    let (h, v1, v2) = (u.h, u.v1(), u.v2());
    let c = (g * h).sqrt();
    let s = 1.0 / (2.0 * g).sqrt();
    let sh = h.sqrt();
    let r = [
        [s, s, 0.0],
        [s * (v1 + c), s * (v1 - c), 0.0],
        [s * v2, s * v2, sh],
    ];
    (r, [v1 + c, v1 - c, v1])
}

/// One-dimensional eigen-scaling: `R = [[1, 1], [v1+c, v1-c]] / sqrt(2g)`,
/// `lambda = (v1 + c, v1 - c)`, with `R R^T = d(U_hat)/d(V_hat)`.
pub fn eigen_scaling_1d(u: Conserved1, p: PhysicsParams) -> ([[f64; 2]; 2], [f64; 2]) {
    let g = p.gravity;
    let (h, v1) = (u.h, u.v1());
    let c = (g * h).sqrt();
    let s = 1.0 / (2.0 * g).sqrt();
    ([[s, s], [s * (v1 + c), s * (v1 - c)]], [v1 + c, v1 - c])
}

/// Rotation aligning the metric direction `(n1, n2)` with the first axis,
/// acting on `(h, hv1, hv2)`:
///
/// ```text
/// T = [[1, 0, 0], [0, cos, sin], [0, -sin, cos]],  (cos, sin) = (n1, n2)/|n|.
/// ```
///
/// Fails on a zero direction vector.
pub fn rotation_matrix(n1: f64, n2: f64) -> Result<[[f64; 3]; 3], SolverError> {
    let norm = (n1 * n1 + n2 * n2).sqrt();
    if norm == 0.0 {
        return Err(SolverError::Config("rotation direction must be nonzero".into()));
    }
    let (c, s) = (n1 / norm, n2 / norm);
    Ok([[1.0, 0.0, 0.0], [0.0, c, s], [0.0, -s, c]])
}

/// Apply the rotation (or with `transpose` its inverse) to a 3-vector.
#[inline]
pub fn rotate(t: &[[f64; 3]; 3], w: [f64; 3], transpose: bool) -> [f64; 3] {
    if transpose {
        [
            t[0][0] * w[0] + t[1][0] * w[1] + t[2][0] * w[2],
            t[0][1] * w[0] + t[1][1] * w[1] + t[2][1] * w[2],
            t[0][2] * w[0] + t[1][2] * w[1] + t[2][2] * w[2],
        ]
    } else {
        [
            t[0][0] * w[0] + t[0][1] * w[1] + t[0][2] * w[2],
            t[1][0] * w[0] + t[1][1] * w[1] + t[1][2] * w[2],
            t[2][0] * w[0] + t[2][1] * w[1] + t[2][2] * w[2],
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const TOL_EXACT: f64 = 1e-13;
    const TOL_IDENTITY: f64 = 1e-13;
    const TOL_FD_EXAMPLE: f64 = 1e-7;
    const TOL_FD_PROP: f64 = 1e-6;
    const TOL_SCALING: f64 = 1e-12;
    const TOL_FD_JACOBIAN: f64 = 1e-6;

    fn p(g: f64) -> PhysicsParams {
        PhysicsParams::with_gravity(g)
    }

    /// Central-difference gradient of `eta` with respect to `U`.
    fn fd_energy_gradient(u: Conserved2, params: PhysicsParams, step: f64) -> [f64; 4] {
        let mut grad = [0.0; 4];
        let base = u.as_array();
        for k in 0..4 {
            let mut up = base;
            let mut dn = base;
            up[k] += step;
            dn[k] -= step;
            let eta = |w: [f64; 4]| {
                energy_pair(Conserved2 { h: w[0], hv1: w[1], hv2: w[2], b: w[3] }, params).eta
            };
            grad[k] = (eta(up) - eta(dn)) / (2.0 * step);
        }
        grad
    }

    /// Central-difference Jacobian of a 3-vector map of a 3-vector.
    fn fd_jacobian3(f: impl Fn([f64; 3]) -> [f64; 3], at: [f64; 3], step: f64) -> [[f64; 3]; 3] {
        let mut jac = [[0.0; 3]; 3];
        for k in 0..3 {
            let mut up = at;
            let mut dn = at;
            up[k] += step;
            dn[k] -= step;
            let (fu, fd) = (f(up), f(dn));
            for r in 0..3 {
                jac[r][k] = (fu[r] - fd[r]) / (2.0 * step);
            }
        }
        jac
    }

    /// Inverse map `U_hat(V_hat)` of the plain system at fixed bottom.
    fn u_hat_of_v_hat(v: [f64; 3], b: f64, g: f64) -> [f64; 3] {
        let (v1, v2) = (v[1], v[2]);
        let h = (v[0] + 0.5 * (v1 * v1 + v2 * v2)) / g - b;
        [h, h * v1, h * v2]
    }

    fn mat3_mul(a: [[f64; 3]; 3], b: [[f64; 3]; 3]) -> [[f64; 3]; 3] {
        let mut c = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    c[i][j] += a[i][k] * b[k][j];
                }
            }
        }
        c
    }

    fn mat3_transpose(a: [[f64; 3]; 3]) -> [[f64; 3]; 3] {
        let mut t = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                t[i][j] = a[j][i];
            }
        }
        t
    }

    #[test]
    fn params_reject_degenerate_gamma_and_gravity() {
        assert!(PhysicsParams::new(9.812, 1.0).is_ok());
        assert!(PhysicsParams::new(0.0, 1.0).is_err());
        assert!(PhysicsParams::new(-1.0, 1.0).is_err());
        assert!(PhysicsParams::new(1.0, 0.5).is_err());
        assert!(PhysicsParams::new(1.0, 0.5 + 5e-13).is_err());
        assert!(PhysicsParams::new(1.0, 0.5 + 1e-11).is_ok());
        assert_eq!(PhysicsParams::with_gravity(1.0).gamma, 1.0);
    }

    #[test]
    fn state_construction_rejects_dry_depth() {
        assert!(Conserved2::new(1.0, 0.0, 0.0, 0.0).is_ok());
        assert!(Conserved2::new(0.0, 0.0, 0.0, 0.0).is_err());
        assert!(Conserved2::new(5e-14, 0.0, 0.0, 0.0).is_err());
        assert!(Conserved2::new(-1.0, 0.0, 0.0, 0.0).is_err());
        assert!(Conserved1::new(1e-20, 0.0, 0.0).is_err());
    }

    #[test]
    fn physical_flux_matches_closed_forms() {
        // (h, v1, v2, b) = (2, 0.3, 0, 1), g = 1, dir 1: (0.6, 0.18 + 2, 0, 0).
        let f = physical_flux(Conserved2::from_primitive(2.0, 0.3, 0.0, 1.0), p(1.0), 1);
        for (got, want) in f.iter().zip([0.6, 2.18, 0.0, 0.0]) {
            assert!((got - want).abs() < TOL_EXACT, "got {got}, want {want}");
        }

        // Lake at rest, g = 9.812: only the pressure survives.
        let f = physical_flux(Conserved2::from_primitive(1.0, 0.0, 0.0, 5.0), p(9.812), 1);
        for (got, want) in f.iter().zip([0.0, 4.906, 0.0, 0.0]) {
            assert!((got - want).abs() < TOL_EXACT);
        }

        // dir 2 with both velocities nonzero.
        let f = physical_flux(Conserved2::from_primitive(1.0, 1.0, 2.0, 0.0), p(1.0), 2);
        for (got, want) in f.iter().zip([2.0, 2.0, 4.5, 0.0]) {
            assert!((got - want).abs() < TOL_EXACT);
        }

        let f1 = physical_flux_1d(Conserved1::from_primitive(2.0, 0.3, 1.0), p(1.0));
        for (got, want) in f1.iter().zip([0.6, 2.18, 0.0]) {
            assert!((got - want).abs() < TOL_EXACT);
        }
    }

    #[test]
    fn energy_pair_matches_closed_forms() {
        // (h, v, b) = (1, 0, 1), gamma = 1: eta = 1/2 + 1 + 1 = 2.5.
        let e = energy_pair(Conserved2::from_primitive(1.0, 0.0, 0.0, 1.0), p(1.0));
        assert!((e.eta - 2.5).abs() < TOL_EXACT);

        // (h, v1, b) = (2, 1, 0): eta = 1 + 2 = 3, q1 = 1 + 4 = 5, psi1 = 2.
        let e = energy_pair(Conserved2::from_primitive(2.0, 1.0, 0.0, 0.0), p(1.0));
        assert!((e.eta - 3.0).abs() < TOL_EXACT);
        assert!((e.q[0] - 5.0).abs() < TOL_EXACT);
        assert!((e.psi[0] - 2.0).abs() < TOL_EXACT);
    }

    #[test]
    fn energy_variables_match_fd_gradient_example() {
        let u = Conserved2::from_primitive(2.0, 0.3, -0.4, 1.0);
        let params = p(9.812);
        let v = energy_variables(u, params);
        let fd = fd_energy_gradient(u, params, 1e-6);
        for k in 0..4 {
            let scale = v[k].abs().max(1.0);
            assert!((v[k] - fd[k]).abs() / scale < TOL_FD_EXAMPLE, "component {k}");
        }
    }

    #[test]
    fn entropy_variables_match_read_off() {
        let v = original_entropy_variables(
            Conserved2::from_primitive(4.0, 0.5, 0.0, 1.5),
            p(1.0),
        );
        // g*(h+b) - v1^2/2 = 5.5 - 0.125 = 5.375.
        assert!((v[0] - 5.375).abs() < TOL_EXACT);
        assert!((v[1] - 0.5).abs() < TOL_EXACT);
        assert!(v[2].abs() < TOL_EXACT);
    }

    #[test]
    fn eigen_scaling_at_rest_state() {
        // h = 1, v = 0, g = 1: lambda = (1, -1, 0), R columns scaled by 1/sqrt(2).
        let (r, lambda) = eigen_scaling(Conserved2::from_primitive(1.0, 0.0, 0.0, 0.0), p(1.0));
        let s = 1.0 / 2f64.sqrt();
        let want = [[s, s, 0.0], [s, -s, 0.0], [0.0, 0.0, 1.0]];
        for i in 0..3 {
            assert!((lambda[i] - [1.0, -1.0, 0.0][i]).abs() < TOL_EXACT);
            for j in 0..3 {
                assert!((r[i][j] - want[i][j]).abs() < TOL_EXACT);
            }
        }
    }

    #[test]
    fn eigen_scaling_satisfies_scaling_identity() {
        // R R^T must equal d(U_hat)/d(V_hat); the oracle is a Richardson-refined
        // finite-difference Jacobian of the closed-form inverse map.
        let params = p(9.812);
        let u = Conserved2::from_primitive(3.2, 0.7, -1.1, 0.6);
        let (r, _) = eigen_scaling(u, params);
        let rrt = mat3_mul(r, mat3_transpose(r));

        // The inverse map is cubic in V_hat, so the Richardson combination of
        // two central stencils has no truncation error; wide steps keep the
        // roundoff in the differences below the 1e-12 target.
        let v = original_entropy_variables(u, params);
        let inverse = |vh: [f64; 3]| u_hat_of_v_hat(vh, u.b, params.gravity);
        let coarse = fd_jacobian3(inverse, v, 2e-2);
        let fine = fd_jacobian3(inverse, v, 1e-2);
        for i in 0..3 {
            for j in 0..3 {
                // Fourth-order Richardson combination of the two central stencils.
                let oracle = (4.0 * fine[i][j] - coarse[i][j]) / 3.0;
                let scale = oracle.abs().max(1.0);
                assert!(
                    (rrt[i][j] - oracle).abs() / scale < TOL_SCALING,
                    "entry ({i}, {j}): {} vs {}",
                    rrt[i][j],
                    oracle
                );
            }
        }
    }

    #[test]
    fn eigen_scaling_diagonalises_flux_jacobian() {
        // R diag(lambda) R^{-1} = dF_hat/dU_hat, checked against a finite
        // difference Jacobian of the first three flux components.
        let params = p(9.812);
        let u = Conserved2::from_primitive(2.5, 0.8, -0.3, 0.4);
        let (r, lambda) = eigen_scaling(u, params);

        let flux_hat = |w: [f64; 3]| {
            let s = Conserved2 { h: w[0], hv1: w[1], hv2: w[2], b: u.b };
            let f = physical_flux(s, params, 1);
            [f[0], f[1], f[2]]
        };
        let jac = fd_jacobian3(flux_hat, [u.h, u.hv1, u.hv2], 1e-6);

        // A = R diag(lambda): check A R^T = jac * (R R^T) instead of inverting R.
        let mut a = r;
        for i in 0..3 {
            for j in 0..3 {
                a[i][j] *= lambda[j];
            }
        }
        let lhs = mat3_mul(a, mat3_transpose(r));
        let rhs = mat3_mul(jac, mat3_mul(r, mat3_transpose(r)));
        for i in 0..3 {
            for j in 0..3 {
                let scale = rhs[i][j].abs().max(1.0);
                assert!((lhs[i][j] - rhs[i][j]).abs() / scale < TOL_FD_JACOBIAN);
            }
        }
    }

    #[test]
    fn rotation_matrix_axis_cases() {
        let t = rotation_matrix(1.0, 0.0).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((t[i][j] - want).abs() < TOL_EXACT);
            }
        }

        let t = rotation_matrix(0.0, 1.0).unwrap();
        let want = [[1.0, 0.0, 0.0], [0.0, 0.0, 1.0], [0.0, -1.0, 0.0]];
        for i in 0..3 {
            for j in 0..3 {
                assert!((t[i][j] - want[i][j]).abs() < TOL_EXACT);
            }
        }

        let t = rotation_matrix(1.0, 1.0).unwrap();
        let r = 0.5f64.sqrt();
        assert!((t[1][1] - r).abs() < TOL_EXACT);
        assert!((t[1][2] - r).abs() < TOL_EXACT);
        assert!((t[2][1] + r).abs() < TOL_EXACT);
        assert!((t[2][2] - r).abs() < TOL_EXACT);

        assert!(rotation_matrix(0.0, 0.0).is_err());
    }

    #[test]
    fn rotation_is_orthogonal_round_trip() {
        let t = rotation_matrix(0.3, -0.7).unwrap();
        let w = [1.3, -0.2, 2.4];
        let back = rotate(&t, rotate(&t, w, false), true);
        for k in 0..3 {
            assert!((back[k] - w[k]).abs() < TOL_EXACT);
        }
    }

    /// Attempted Cholesky factorisation; returns false on a nonpositive pivot.
    fn is_positive_definite(mut m: [[f64; 4]; 4]) -> bool {
        for k in 0..4 {
            if m[k][k] <= 0.0 {
                return false;
            }
            let d = m[k][k].sqrt();
            for i in k..4 {
                m[i][k] /= d;
            }
            for j in (k + 1)..4 {
                for i in j..4 {
                    m[i][j] -= m[i][k] * m[j][k];
                }
            }
        }
        true
    }

    fn random_state_strategy() -> impl Strategy<Value = (f64, f64, f64, f64)> {
        (0.1f64..10.0, -5.0f64..5.0, -5.0f64..5.0, -5.0f64..5.0)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn potential_identities_hold((h, v1, v2, b) in random_state_strategy()) {
            let params = p(9.812);
            let u = Conserved2::from_primitive(h, v1, v2, b);
            let e = energy_pair(u, params);
            let v = energy_variables(u, params);
            let uvec = u.as_array();

            // The identities cancel terms far larger than their results, so
            // "relative" is measured against the terms entering them.
            let vu: f64 = (0..4).map(|k| v[k] * uvec[k]).sum();
            let scale = vu.abs().max(e.eta.abs()).max(1.0);
            prop_assert!((e.phi - (vu - e.eta)).abs() / scale < TOL_IDENTITY);

            for dir in 1..=2 {
                let f = physical_flux(u, params, dir);
                let vf: f64 = (0..4).map(|k| v[k] * f[k]).sum();
                let vl = if dir == 1 { v1 } else { v2 };
                let want = vf - e.q[dir - 1] + params.gravity * h * vl * b;
                let scale = vf.abs().max(e.q[dir - 1].abs()).max(1.0);
                prop_assert!((e.psi[dir - 1] - want).abs() / scale < TOL_IDENTITY);
            }
        }

        #[test]
        fn energy_variables_are_energy_gradient((h, v1, v2, b) in random_state_strategy()) {
            let params = p(9.812);
            let u = Conserved2::from_primitive(h, v1, v2, b);
            let v = energy_variables(u, params);
            let fd = fd_energy_gradient(u, params, 1e-6);
            for k in 0..4 {
                let scale = v[k].abs().max(1.0);
                prop_assert!((v[k] - fd[k]).abs() / scale < TOL_FD_PROP);
            }
        }

        #[test]
        fn hessian_is_gradient_of_energy_variables((h, v1, v2, b) in random_state_strategy()) {
            let params = p(9.812);
            let u = Conserved2::from_primitive(h, v1, v2, b);
            let hess = energy_hessian(u, params);
            let base = u.as_array();
            for k in 0..4 {
                let step = 1e-6;
                let mut up = base;
                let mut dn = base;
                up[k] += step;
                dn[k] -= step;
                let vu = energy_variables(Conserved2 { h: up[0], hv1: up[1], hv2: up[2], b: up[3] }, params);
                let vd = energy_variables(Conserved2 { h: dn[0], hv1: dn[1], hv2: dn[2], b: dn[3] }, params);
                for r in 0..4 {
                    let fd = (vu[r] - vd[r]) / (2.0 * step);
                    let scale = hess[r][k].abs().max(1.0);
                    prop_assert!((hess[r][k] - fd).abs() / scale < 2e-5);
                }
            }
        }

        #[test]
        fn hessian_positive_definite_for_large_gamma((h, v1, v2, b) in random_state_strategy()) {
            let params = PhysicsParams::new(9.812, 1.0).unwrap();
            let u = Conserved2::from_primitive(h, v1, v2, b);
            prop_assert!(is_positive_definite(energy_hessian(u, params)));

            // Just above the degenerate weight it is still positive definite;
            // below it is not.
            let above = PhysicsParams::new(9.812, 0.51).unwrap();
            prop_assert!(is_positive_definite(energy_hessian(u, above)));
            let below = PhysicsParams::new(9.812, 0.49).unwrap();
            prop_assert!(!is_positive_definite(energy_hessian(u, below)));
        }

        #[test]
        fn one_dimensional_variants_agree_with_planar_states((h, v1, b) in (0.1f64..10.0, -5.0f64..5.0, -5.0f64..5.0)) {
            let params = p(9.812);
            let u1 = Conserved1::from_primitive(h, v1, b);
            let u2 = Conserved2::from_primitive(h, v1, 0.0, b);

            let f1 = physical_flux_1d(u1, params);
            let f2 = physical_flux(u2, params, 1);
            for k in 0..2 {
                prop_assert!((f1[k] - f2[k]).abs() < TOL_EXACT);
            }

            let e1 = energy_pair_1d(u1, params);
            let e2 = energy_pair(u2, params);
            prop_assert!((e1.eta - e2.eta).abs() < TOL_EXACT);
            prop_assert!((e1.q[0] - e2.q[0]).abs() < TOL_EXACT);
            prop_assert!((e1.phi - e2.phi).abs() < TOL_EXACT);
            prop_assert!((e1.psi[0] - e2.psi[0]).abs() < TOL_EXACT);

            let v1d = energy_variables_1d(u1, params);
            let v2d = energy_variables(u2, params);
            prop_assert!((v1d[0] - v2d[0]).abs() < TOL_EXACT);
            prop_assert!((v1d[1] - v2d[1]).abs() < TOL_EXACT);
            prop_assert!((v1d[2] - v2d[3]).abs() < TOL_EXACT);

            let ((r1, l1), (r2, l2)) = (eigen_scaling_1d(u1, params), eigen_scaling(u2, params));
            for i in 0..2 {
                prop_assert!((l1[i] - l2[i]).abs() < TOL_EXACT);
                for j in 0..2 {
                    prop_assert!((r1[i][j] - r2[i][j]).abs() < TOL_EXACT);
                }
            }
        }
    }
}
