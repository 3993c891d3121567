use rand::Rng;

use crate::error::{Error, Result};
use crate::geometry::{SpdPoint, Tangent};
use crate::model::{CovSeries, ModelParams, SeriesMeta};
use crate::scalar::Scalar;

/// Runs the model forward from a seed history.
///
/// `init` holds the first `L + 1` points; the returned series has `n` points
/// in total (the seed history included). Each step draws
/// `v_k = Σ_ℓ A_ℓ v_{kℓ} + B v*_k + ε_k` in frame coordinates at `S_k` and sets
/// `S_{k+1} = Exp_{S_k}(V_k)`. Euclidean steps that leave SPD(p) are kept and
/// listed in `meta.not_pd_steps`.
pub fn simulate<T: Scalar, R: Rng + ?Sized>(
    params: &ModelParams<T>,
    init: &[SpdPoint<T>],
    n: usize,
    rng: &mut R,
) -> Result<CovSeries<T>> {
    params.validate()?;
    let lag = params.lag();
    let g = params.geometry();
    if init.len() != lag + 1 {
        return Err(Error::InsufficientData {
            needed: lag + 1,
            available: init.len(),
        });
    }
    if n < lag + 1 {
        return Err(Error::InsufficientData {
            needed: lag + 1,
            available: n,
        });
    }
    let p = params.attractor().dim();
    for x in init {
        x.matrix().check_dim(p)?;
    }
    let noise = params.noise();
    let star = params.attractor();

    let mut points: Vec<SpdPoint<T>> = init.to_vec();
    let mut steps: Vec<Tangent<T>> = Vec::with_capacity(n);
    for k in 0..lag {
        steps.push(
            g.log_map(&points[k], &points[k + 1])
                .map_err(|e| e.at_step(k))?,
        );
    }
    let mut not_pd = Vec::new();
    for k in lag..n.saturating_sub(1) {
        let step = (|| {
            let base = &points[k];
            let lagged = (1..=lag)
                .map(|l| g.transported_coords(&points[k - l], base, &steps[k - l]))
                .collect::<Result<Vec<_>>>()?;
            let to_star = g.to_coords(base, &g.log_map(base, star)?)?;
            let v = params.drift(&lagged, &to_star) + noise.sample(rng);
            let tangent = g.from_coords(base, &v)?;
            let next = g.exp_map(base, &tangent)?;
            Ok::<_, Error>((tangent, next))
        })()
        .map_err(|e| e.at_step(k))?;
        let (tangent, next) = step;
        if !next.is_pd() {
            not_pd.push(k + 1);
        }
        steps.push(tangent);
        points.push(next);
    }
    let meta = SeriesMeta {
        not_pd_steps: not_pd,
        ..SeriesMeta::default()
    };
    CovSeries::with_meta(points, 1.0, meta)
}
