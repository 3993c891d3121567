//! Closed-form maximum likelihood for the scalar and diagonal models, with
//! Fisher-information uncertainty, lag selection and between-series comparison.

mod compare;
mod fit;
mod select;

pub use compare::{mahalanobis_compare, SeizureComparison};
pub use fit::{
    aic, akaike, confidence_intervals, confidence_intervals_z, dataset_r_squared,
    fisher_information, fit, fit_diagonal, fit_scalar, fit_series, r_squared, FitResult,
    Restriction, TermNorms, CONDITION_LIMIT, Z_95,
};
pub use select::{select_lag, LagSelection, LagStep};
