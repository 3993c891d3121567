use crate::error::{Error, Result};
use crate::geometry::{Geometry, SpdPoint};
use crate::inference::fit::{fit_scalar, Restriction, Z_95};
use crate::model::build_dataset;
use crate::scalar::Scalar;

/// One candidate lag in a [`select_lag`] sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct LagStep<T: Scalar> {
    pub lag: usize,
    /// `α̂_L` of the scalar fit at this lag.
    pub alpha: T,
    pub std_error: T,
    pub lower: T,
    pub upper: T,
    /// Whether the 95% interval for `α_L` excludes zero.
    pub significant: bool,
    pub aic: T,
    pub r2: T,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LagSelection<T: Scalar> {
    pub lag: usize,
    pub trace: Vec<LagStep<T>>,
}

/// Fits full scalar models for `L = 1..=lag_max` and picks the largest `L`
/// whose top coefficient `α_L` is significant at the 95% level, or 0.
pub fn select_lag<T: Scalar>(
    g: Geometry,
    points: &[SpdPoint<T>],
    attractor: &SpdPoint<T>,
    lag_max: usize,
) -> Result<LagSelection<T>> {
    if lag_max == 0 {
        return Err(Error::Dimension("lag_max must be at least 1".into()));
    }
    let needed = 2 * lag_max + 3;
    if points.len() < needed {
        return Err(Error::InsufficientData {
            needed,
            available: points.len(),
        });
    }
    let z = T::lit(Z_95);
    let mut trace = Vec::with_capacity(lag_max);
    for lag in 1..=lag_max {
        let ds = build_dataset(g, points, lag, attractor)?;
        let fit = fit_scalar(&ds, Restriction::Full)?;
        let alpha = fit.estimates()[lag - 1];
        let se = fit.std_errors[lag - 1];
        let (lower, upper) = (alpha - z * se, alpha + z * se);
        let significant = lower > T::zero() || upper < T::zero();
        trace.push(LagStep {
            lag,
            alpha,
            std_error: se,
            lower,
            upper,
            significant,
            aic: fit.aic,
            r2: fit.r2,
        });
    }
    let lag = trace
        .iter()
        .rev()
        .find(|s| s.significant)
        .map_or(0, |s| s.lag);
    Ok(LagSelection { lag, trace })
}
