//! Scalar kernels shared by the closed-form solvers.
//!
//! The time-allocation conditions reduce to inverting
//! `f_t(x) = (ln(1+x) - x/(1+x)) / ln 2`, the marginal spectral efficiency
//! of a slot with post-combining SNR `x`. Its inverse has a closed form via
//! the principal Lambert W branch.

const LN2: f64 = std::f64::consts::LN_2;

/// Principal branch W_0 of the Lambert W function on [-1/e, inf).
///
/// Halley iteration from a branch-aware initial guess; near the branch point
/// the series in sqrt(2(1 + e z)) keeps full accuracy where the iteration
/// alone loses digits.
pub fn lambert_w0(z: f64) -> f64 {
    assert!(z.is_finite(), "lambert_w0: non-finite argument {z}");
    let min_z = -(-1.0f64).exp();
    assert!(
        z >= min_z - 1e-15,
        "lambert_w0: argument {z} below branch point -1/e"
    );
    if z == 0.0 {
        return 0.0;
    }

    // p = sqrt(2 (e z + 1)) parameterizes the distance to the branch point.
    let p_sq = 2.0 * (std::f64::consts::E * z + 1.0);
    let mut w = if p_sq < 0.5 {
        // series about z = -1/e: W = -1 + p - p^2/3 + 11 p^3/72 - ...
        let p = p_sq.max(0.0).sqrt();
        -1.0 + p - p_sq / 3.0 + 11.0 / 72.0 * p * p_sq
    } else if z < std::f64::consts::E {
        // low-order Pade-like start is fine this close to 0
        let l = (1.0 + z).ln();
        l * (1.0 - l.ln_1p() / (2.0 + l))
    } else {
        // asymptotic start W ~ ln z - ln ln z
        let l1 = z.ln();
        let l2 = l1.ln();
        l1 - l2 + l2 / l1
    };

    for _ in 0..40 {
        let ew = w.exp();
        let f = w * ew - z;
        if f == 0.0 {
            break;
        }
        let wp1 = w + 1.0;
        let denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
        let dw = f / denom;
        w -= dw;
        if dw.abs() <= 1e-16 * w.abs().max(1e-300) {
            break;
        }
    }
    w
}

/// Marginal spectral efficiency `f_t(x) = (ln(1+x) - x/(1+x)) / ln 2`.
///
/// Strictly increasing and nonnegative on x >= 0; this is the derivative of
/// `t log2(1 + c e / t)` with respect to t at SNR `x = c e / t`.
pub fn f_t(x: f64) -> f64 {
    assert!(x >= 0.0, "f_t: negative SNR {x}");
    // ln(1+x) - x/(1+x) suffers cancellation for small x; use the series.
    if x < 1e-4 {
        let x2 = x * x;
        return (x2 / 2.0 - 2.0 * x2 * x / 3.0 + 3.0 * x2 * x2 / 4.0) / LN2;
    }
    (x.ln_1p() - x / (1.0 + x)) / LN2
}

/// Inverse of [`f_t`] on y >= 0.
///
/// Closed form: `x = exp(W_0(-e^{-(1 + y ln 2)}) + 1 + y ln 2) - 1`, followed
/// by one Newton polish on f_t itself to absorb rounding in the exponentials.
pub fn f_t_inverse(y: f64) -> f64 {
    assert!(y >= 0.0 && y.is_finite(), "f_t_inverse: bad argument {y}");
    if y == 0.0 {
        return 0.0;
    }
    let a = 1.0 + y * LN2;
    let x = if a < 700.0 {
        (lambert_w0(-(-a).exp()) + a).exp() - 1.0
    } else {
        // -e^{-a} underflows; W_0(-e^{-a}) ~ -e^{-a}, so x ~ e^a - 1.
        a.exp() - 1.0
    };
    if !x.is_finite() {
        return x;
    }
    // f_t'(x) = x / ((1+x)^2 ln 2)
    let resid = f_t(x) - y;
    let slope = x / ((1.0 + x) * (1.0 + x) * LN2);
    if slope > 0.0 {
        (x - resid / slope).max(0.0)
    } else {
        x
    }
}
