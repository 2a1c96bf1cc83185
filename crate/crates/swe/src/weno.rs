//! Fifth-order WENO-Z interpolation of point values to interface midpoints.
//!
//! A reconstruction takes a window of five consecutive nodal values and
//! returns the interpolated value half a spacing to the right of the window
//! centre (left-biased limit) or to the left of it (right-biased limit).
//! Three quadratic sub-stencils are blended with nonlinear weights
//!
//! ```text
//! omega_k ~ d_k (1 + (tau5 / (beta_k + eps))^2),
//! ```
//!
//! where `beta_k` are the Jiang-Shu smoothness indicators, `tau5 =
//! |beta_0 - beta_2|`, and `d = (1/16, 5/8, 5/16)` are the ideal weights
//! that recover the unique degree-4 interpolant of the window evaluated at
//! the midpoint. On smooth data the value is fifth-order accurate; near a
//! discontinuity the weights collapse onto the smooth sub-stencils.
//!
//! Every reconstruction also materialises its five effective per-node
//! coefficients (weights times sub-stencil coefficients). Reusing the
//! coefficients computed for the bottom topography on the water depth keeps
//! `h + b` reconstructions exactly linear in `h + b`, which is what the
//! well-balanced dissipation needs.

/// Ideal (linear) weights of the left-biased midpoint interpolation.
pub const IDEAL_WEIGHTS: [f64; 3] = [1.0 / 16.0, 5.0 / 8.0, 5.0 / 16.0];

/// Quadratic sub-stencil coefficients at the midpoint; stencil `k` spans
/// window indices `k..k+3`.
const SUB_COEFFS: [[f64; 3]; 3] = [
    [3.0 / 8.0, -10.0 / 8.0, 15.0 / 8.0],
    [-1.0 / 8.0, 6.0 / 8.0, 3.0 / 8.0],
    [3.0 / 8.0, 6.0 / 8.0, -1.0 / 8.0],
];

const EPS: f64 = 1e-40;

/// One interface reconstruction: the interpolated value, the nonlinear
/// weights, and the effective per-node coefficients, all indexed in the
/// original window order (`weights[k]` belongs to window indices `k..k+3`,
/// `value = sum coeffs[r] * window[r]`).
#[derive(Clone, Copy, Debug)]
pub struct Reconstruction {
    pub value: f64,
    pub weights: [f64; 3],
    pub coeffs: [f64; 5],
}

/// Apply effective coefficients to a window. The summation tree pairs
/// mirror-image terms so that reversing both arguments reproduces the same
/// value bitwise; interface quantities built from opposite-biased
/// reconstructions then stay exactly symmetric on symmetric data.
#[inline]
pub fn apply_coeffs(coeffs: &[f64; 5], w: &[f64; 5]) -> f64 {
    let t: [f64; 5] = std::array::from_fn(|r| coeffs[r] * w[r]);
    ((t[0] + t[4]) + (t[1] + t[3])) + t[2]
}

/// Left-biased limit: interpolates to half a spacing right of the window
/// centre (the interface between window indices 2 and 3).
pub fn weno_left(w: &[f64; 5]) -> Reconstruction {
    let beta = [
        13.0 / 12.0 * (w[0] - 2.0 * w[1] + w[2]).powi(2)
            + 0.25 * (w[0] - 4.0 * w[1] + 3.0 * w[2]).powi(2),
        13.0 / 12.0 * (w[1] - 2.0 * w[2] + w[3]).powi(2) + 0.25 * (w[1] - w[3]).powi(2),
        13.0 / 12.0 * (w[2] - 2.0 * w[3] + w[4]).powi(2)
            + 0.25 * (3.0 * w[2] - 4.0 * w[3] + w[4]).powi(2),
    ];
    let tau5 = (beta[0] - beta[2]).abs();

    let mut weights = [0.0; 3];
    let mut total = 0.0;
    for k in 0..3 {
        let ratio = tau5 / (beta[k] + EPS);
        weights[k] = IDEAL_WEIGHTS[k] * (1.0 + ratio * ratio);
        total += weights[k];
    }
    for wk in &mut weights {
        *wk /= total;
    }

    let mut coeffs = [0.0; 5];
    for k in 0..3 {
        for j in 0..3 {
            coeffs[k + j] += weights[k] * SUB_COEFFS[k][j];
        }
    }
    Reconstruction { value: apply_coeffs(&coeffs, w), weights, coeffs }
}

/// Right-biased limit: interpolates to half a spacing left of the window
/// centre (the interface between window indices 1 and 2). Mirror of
/// [`weno_left`]; weights and coefficients are reported in the original
/// window order, so the ideal weights read `(5/16, 5/8, 1/16)`.
pub fn weno_right(w: &[f64; 5]) -> Reconstruction {
    let reversed = [w[4], w[3], w[2], w[1], w[0]];
    let mut rec = weno_left(&reversed);
    rec.weights.reverse();
    rec.coeffs.reverse();
    rec.value = apply_coeffs(&rec.coeffs, w);
    rec
}

/// Reconstruct `b` with its own nonlinear weights, then interpolate `h`
/// with the identical effective coefficients. Returns the `b`
/// reconstruction and the coupled `h` value.
pub fn paired_left(b: &[f64; 5], h: &[f64; 5]) -> (Reconstruction, f64) {
    let rec = weno_left(b);
    let h_value = apply_coeffs(&rec.coeffs, h);
    (rec, h_value)
}

/// Right-biased variant of [`paired_left`].
pub fn paired_right(b: &[f64; 5], h: &[f64; 5]) -> (Reconstruction, f64) {
    let rec = weno_right(b);
    let h_value = apply_coeffs(&rec.coeffs, h);
    (rec, h_value)
}
