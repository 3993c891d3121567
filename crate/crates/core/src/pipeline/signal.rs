use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::geometry::SymMatrix;
use crate::scalar::Scalar;

/// Multichannel recording: one row per time sample, one column per channel.
#[derive(Clone, Debug, PartialEq)]
pub struct SignalMatrix<T: Scalar> {
    samples: DMatrix<T>,
    /// Samples per second.
    pub rate: f64,
    pub channels: Vec<String>,
}

impl<T: Scalar> SignalMatrix<T> {
    /// Channels are named `ch0, ch1, …`.
    pub fn new(samples: DMatrix<T>, rate: f64) -> Result<Self> {
        let channels = (0..samples.ncols()).map(|c| format!("ch{c}")).collect();
        Self::with_channels(samples, rate, channels)
    }

    pub fn with_channels(samples: DMatrix<T>, rate: f64, channels: Vec<String>) -> Result<Self> {
        if !(rate.is_finite() && rate > 0.0) {
            return Err(Error::Format(format!(
                "sampling rate must be positive, got {rate}"
            )));
        }
        if channels.len() != samples.ncols() {
            return Err(Error::DimensionMismatch {
                expected: samples.ncols(),
                found: channels.len(),
            });
        }
        if samples.ncols() == 0 {
            return Err(Error::Dimension("signal has no channels".into()));
        }
        Ok(Self {
            samples,
            rate,
            channels,
        })
    }

    pub fn samples(&self) -> &DMatrix<T> {
        &self.samples
    }

    pub fn num_samples(&self) -> usize {
        self.samples.nrows()
    }

    pub fn num_channels(&self) -> usize {
        self.samples.ncols()
    }
}

/// Samples per window for a window of `seconds`.
pub fn window_samples(rate: f64, seconds: f64) -> Result<usize> {
    let n = (rate * seconds + 1e-9).floor();
    if !(n.is_finite() && n >= 2.0) {
        return Err(Error::WindowTooShort {
            samples: if n.is_finite() && n > 0.0 {
                n as usize
            } else {
                0
            },
        });
    }
    Ok(n as usize)
}

/// Sample covariance (divisor `n_w − 1`) of each non-overlapping window of
/// `seconds`; a trailing partial window is dropped.
pub fn window_covariances<T: Scalar>(
    z: &SignalMatrix<T>,
    seconds: f64,
) -> Result<Vec<SymMatrix<T>>> {
    let nw = window_samples(z.rate, seconds)?;
    let count = z.num_samples() / nw;
    if count == 0 {
        return Err(Error::InsufficientData {
            needed: nw,
            available: z.num_samples(),
        });
    }
    let q = z.num_channels();
    let denom = T::from_usize_lossy(nw - 1);
    let nf = T::from_usize_lossy(nw);
    Ok((0..count)
        .map(|i| {
            let block = z.samples.rows(i * nw, nw);
            let means: Vec<T> = (0..q).map(|c| block.column(c).sum() / nf).collect();
            let centred = DMatrix::from_fn(nw, q, |r, c| block[(r, c)] - means[c]);
            SymMatrix::symmetrize(centred.transpose() * &centred / denom)
        })
        .collect())
}
