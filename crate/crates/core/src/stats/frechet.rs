use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::geometry::{Geometry, SpdPoint, SymMatrix};
use crate::scalar::Scalar;

pub const DEFAULT_TOL: f64 = 1e-9;
pub const DEFAULT_MAX_ITER: usize = 200;
const MAX_STEP_HALVINGS: usize = 5;

/// Fréchet sample mean together with the Fréchet sample variance at it.
#[derive(Clone, Debug)]
pub struct FrechetResult<T: Scalar> {
    pub mean: SpdPoint<T>,
    pub variance: T,
    pub iterations: usize,
    pub final_gradient_norm: T,
}

/// Fréchet function `F(y) = (1/n) Σ d(y, x_i)²`.
pub fn frechet_function<T: Scalar>(
    g: Geometry,
    y: &SpdPoint<T>,
    points: &[SpdPoint<T>],
) -> Result<T> {
    if points.is_empty() {
        return Err(Error::InsufficientData {
            needed: 1,
            available: 0,
        });
    }
    let mut acc = T::zero();
    for x in points {
        let d = g.dist(y, x)?;
        acc += d * d;
    }
    Ok(acc / T::from_usize_lossy(points.len()))
}

fn arithmetic_mean<T: Scalar>(points: &[SpdPoint<T>]) -> SymMatrix<T> {
    let p = points[0].dim();
    let mut sum = DMatrix::<T>::zeros(p, p);
    for x in points {
        sum += x.matrix().as_matrix();
    }
    SymMatrix::symmetrize(sum / T::from_usize_lossy(points.len()))
}

struct Probe<T: Scalar> {
    value: T,
    gradient: SymMatrix<T>,
    gradient_norm: T,
}

// Fréchet function value and Riemannian gradient direction (1/n) Σ Log_y(x_i).
fn probe<T: Scalar>(g: Geometry, y: &SpdPoint<T>, points: &[SpdPoint<T>]) -> Result<Probe<T>> {
    let p = y.dim();
    let n = T::from_usize_lossy(points.len());
    let mut grad = DMatrix::<T>::zeros(p, p);
    let mut value = T::zero();
    for x in points {
        let v = g.log_map(y, x)?;
        let d = g.norm(y, &v)?;
        value += d * d;
        grad += v.as_matrix();
    }
    let gradient = SymMatrix::symmetrize(grad / n);
    let gradient_norm = g.norm(y, &gradient)?;
    Ok(Probe {
        value: value / n,
        gradient,
        gradient_norm,
    })
}

/// Fréchet sample mean by Riemannian gradient descent,
/// `S ← Exp_S(τ · (1/n) Σ Log_S(x_i))` with `τ = 1`, stopping once the
/// gradient norm drops below `tol`. An increase of the Fréchet function halves
/// `τ` and restarts from the best iterate, at most five times.
///
/// For the Euclidean geometry the arithmetic mean is returned directly.
pub fn frechet_mean<T: Scalar>(
    g: Geometry,
    points: &[SpdPoint<T>],
    tol: T,
    max_iter: usize,
) -> Result<FrechetResult<T>> {
    if points.is_empty() {
        return Err(Error::InsufficientData {
            needed: 1,
            available: 0,
        });
    }
    let p = points[0].dim();
    for x in points {
        x.matrix().check_dim(p)?;
    }
    let start = arithmetic_mean(points);
    match g {
        Geometry::Euclidean => {
            let mean = SpdPoint::ambient(start);
            let probe = probe(g, &mean, points)?;
            Ok(FrechetResult {
                mean,
                variance: probe.value,
                iterations: 0,
                final_gradient_norm: probe.gradient_norm,
            })
        }
        Geometry::AffineInvariant => {
            for x in points {
                x.inv_sqrt()?;
            }
            // the arithmetic mean of SPD matrices is SPD
            let mut current = SpdPoint::new(start)?;
            let mut state = probe(g, &current, points)?;
            let mut step = T::one();
            let mut iterations = 0;
            for _attempt in 0..=MAX_STEP_HALVINGS {
                let mut diverged = false;
                for _ in 0..max_iter {
                    if state.gradient_norm < tol {
                        return Ok(FrechetResult {
                            mean: current,
                            variance: state.value,
                            iterations,
                            final_gradient_norm: state.gradient_norm,
                        });
                    }
                    iterations += 1;
                    let next = g.exp_map(&current, &state.gradient.scale(step))?;
                    let next_state = probe(g, &next, points)?;
                    let slack = T::lit(1e-12) * (state.value + T::lit(f64::MIN_POSITIVE));
                    if next_state.value > state.value + slack {
                        diverged = true;
                        break;
                    }
                    current = next;
                    state = next_state;
                }
                if state.gradient_norm < tol {
                    return Ok(FrechetResult {
                        mean: current,
                        variance: state.value,
                        iterations,
                        final_gradient_norm: state.gradient_norm,
                    });
                }
                log::debug!(
                    "Fréchet descent {} at step {}; halving step size",
                    if diverged { "diverged" } else { "stalled" },
                    step
                );
                step *= T::lit(0.5);
            }
            Err(Error::NoConvergence {
                iterations,
                gradient_norm: state.gradient_norm.to_f64_lossy(),
            })
        }
    }
}

/// [`frechet_mean`] with tolerance `1e-9` and at most 200 iterations.
pub fn frechet_mean_default<T: Scalar>(
    g: Geometry,
    points: &[SpdPoint<T>],
) -> Result<FrechetResult<T>> {
    frechet_mean(g, points, T::lit(DEFAULT_TOL), DEFAULT_MAX_ITER)
}
