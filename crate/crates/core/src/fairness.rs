//! Alpha-fair utility family and fairness metrics.
//!
//! `u_alpha(R) = ln R` for alpha = 1 and `R^(1-alpha)/(1-alpha)` otherwise,
//! interpolating from plain throughput maximization (alpha = 0) through
//! proportional fairness (alpha = 1) towards max-min fairness as
//! alpha grows. Raw utility values are only comparable at a fixed alpha:
//! the two branches differ by an additive constant, so the numerical guard
//! around alpha = 1 (see [`ALPHA_ONE_GUARD`]) only avoids overflow of
//! 1/(1-alpha) and does not make cross-alpha utilities commensurable.

use crate::error::Error;

/// Width of the logarithmic branch around alpha = 1.
pub const ALPHA_ONE_GUARD: f64 = 1e-5;

/// Fairness control parameter: a finite alpha >= 0 or the max-min limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FairnessParam {
    Alpha(f64),
    MaxMin,
}

impl FairnessParam {
    pub fn validate(&self) -> Result<(), Error> {
        match self {
            FairnessParam::Alpha(a) if !a.is_finite() || *a < 0.0 => Err(Error::domain(
                "fairness",
                format!("alpha must be a finite nonnegative real, got {a}"),
            )),
            _ => Ok(()),
        }
    }

    pub fn as_finite(&self) -> Option<f64> {
        match self {
            FairnessParam::Alpha(a) => Some(*a),
            FairnessParam::MaxMin => None,
        }
    }
}

impl std::fmt::Display for FairnessParam {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FairnessParam::Alpha(a) => write!(f, "{a}"),
            FairnessParam::MaxMin => write!(f, "max-min"),
        }
    }
}

/// Alpha-fair utility of a data size `r` [bit].
///
/// `r = 0` is allowed only for alpha < 1 (continuous extension u = 0);
/// the max-min sentinel is rejected here because that regime is handled by
/// its own epigraph solver rather than by a pointwise utility.
pub fn utility(alpha: FairnessParam, r: f64) -> Result<f64, Error> {
    let a = finite_alpha(alpha, "utility")?;
    if r < 0.0 {
        return Err(Error::domain("utility", format!("negative data size {r}")));
    }
    if (a - 1.0).abs() < ALPHA_ONE_GUARD {
        if r <= 0.0 {
            return Err(Error::domain("utility", "ln branch requires R > 0"));
        }
        return Ok(r.ln());
    }
    if r == 0.0 {
        if a < 1.0 {
            return Ok(0.0);
        }
        return Err(Error::domain("utility", "R = 0 requires alpha < 1"));
    }
    Ok(r.powf(1.0 - a) / (1.0 - a))
}

/// Marginal utility `u'_alpha(r) = r^(-alpha)`.
pub fn utility_derivative(alpha: FairnessParam, r: f64) -> Result<f64, Error> {
    let a = finite_alpha(alpha, "utility_derivative")?;
    if r <= 0.0 {
        return Err(Error::domain("utility_derivative", format!("requires R > 0, got {r}")));
    }
    Ok(r.powf(-a))
}

/// Jain's fairness index `(sum R)^2 / (K sum R^2)`, in (0, 1].
pub fn jain_index(rates: &[f64]) -> Result<f64, Error> {
    if rates.is_empty() {
        return Err(Error::domain("jain_index", "empty rate vector"));
    }
    if rates.iter().any(|r| *r < 0.0) {
        return Err(Error::domain("jain_index", "negative rate"));
    }
    let sum: f64 = rates.iter().sum();
    let sum_sq: f64 = rates.iter().map(|r| r * r).sum();
    if sum_sq == 0.0 {
        return Err(Error::domain("jain_index", "all-zero rate vector"));
    }
    Ok(sum * sum / (rates.len() as f64 * sum_sq))
}

fn finite_alpha(alpha: FairnessParam, context: &'static str) -> Result<f64, Error> {
    alpha.validate()?;
    alpha
        .as_finite()
        .ok_or_else(|| Error::domain(context, "max-min sentinel is not a pointwise utility"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn a(v: f64) -> FairnessParam {
        FairnessParam::Alpha(v)
    }

    #[test]
    fn utility_examples() {
        assert_eq!(utility(a(0.0), 5.0).unwrap(), 5.0);
        assert!((utility(a(1.0), std::f64::consts::E).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(utility(a(2.0), 2.0).unwrap(), -0.5);
    }

    #[test]
    fn utility_zero_rate() {
        assert_eq!(utility(a(0.5), 0.0).unwrap(), 0.0);
        assert!(utility(a(2.0), 0.0).is_err());
        assert!(utility(a(1.0), 0.0).is_err());
    }

    #[test]
    fn derivative_examples() {
        assert_eq!(utility_derivative(a(0.0), 7.0).unwrap(), 1.0);
        assert_eq!(utility_derivative(a(1.0), 2.0).unwrap(), 0.5);
        assert_eq!(utility_derivative(a(2.0), 4.0).unwrap(), 0.0625);
    }

    #[test]
    fn derivative_matches_finite_difference() {
        for &alpha in &[0.0, 0.5, 2.0, 3.7] {
            for &r in &[0.5, 2.0, 100.0, 5e4] {
                let h = 1e-6 * r;
                let fd = (utility(a(alpha), r + h).unwrap() - utility(a(alpha), r - h).unwrap())
                    / (2.0 * h);
                let an = utility_derivative(a(alpha), r).unwrap();
                assert!(
                    (fd - an).abs() <= 1e-6 * an.abs().max(1e-12),
                    "alpha={alpha} r={r}: fd={fd} analytic={an}"
                );
            }
        }
    }

    #[test]
    fn alpha_one_continuity() {
        for &r in &[0.1, 1.0, 10.0, 1e3, 1e6] {
            let base = utility(a(1.0), r).unwrap();
            for &da in &[-1e-6, 1e-6] {
                let near = utility(a(1.0 + da), r).unwrap();
                assert!((near - base).abs() <= 1e-4, "r={r} da={da}");
            }
        }
    }

    #[test]
    fn jain_examples() {
        assert_eq!(jain_index(&[1.0, 1.0, 1.0, 1.0]).unwrap(), 1.0);
        assert_eq!(jain_index(&[1.0, 0.0, 0.0, 0.0]).unwrap(), 0.25);
        let j = jain_index(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert!((j - 100.0 / 120.0).abs() < 1e-15);
        assert!(jain_index(&[0.0, 0.0]).is_err());
    }

    proptest! {
        #[test]
        fn utility_strictly_increasing(
            alpha in 0.0f64..5.0,
            r in 0.01f64..1e6,
            bump in 0.01f64..10.0,
        ) {
            let lo = utility(a(alpha), r).unwrap();
            let hi = utility(a(alpha), r * (1.0 + bump)).unwrap();
            prop_assert!(hi > lo);
        }

        #[test]
        fn derivative_non_increasing(
            alpha in 0.0f64..5.0,
            r in 0.01f64..1e6,
            bump in 0.01f64..10.0,
        ) {
            let lo = utility_derivative(a(alpha), r * (1.0 + bump)).unwrap();
            let hi = utility_derivative(a(alpha), r).unwrap();
            prop_assert!(lo <= hi);
        }

        #[test]
        fn jain_scale_invariant(
            rates in proptest::collection::vec(0.1f64..1e4, 1..8),
            scale in 0.001f64..1e3,
        ) {
            let j1 = jain_index(&rates).unwrap();
            let scaled: Vec<f64> = rates.iter().map(|r| r * scale).collect();
            let j2 = jain_index(&scaled).unwrap();
            prop_assert!((j1 - j2).abs() < 1e-12);
        }
    }
}
