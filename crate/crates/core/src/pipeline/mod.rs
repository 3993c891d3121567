//! From raw multichannel signals to a reduced covariance series.

mod reduce;
mod signal;

pub use reduce::{
    apply_reduction, min_eig_objective, pair_attractor, plan_greedy_mineig, plan_variance_max,
    ReductionKind, ReductionPlan,
};
pub use signal::{window_covariances, window_samples, SignalMatrix};
