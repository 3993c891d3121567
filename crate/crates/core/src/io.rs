//! File formats for series, parameters, fits, reduction plans and signals.
//!
//! Matrices are stored row-major. Non-finite numbers are written as the
//! strings `"NaN"`, `"inf"` and `"-inf"` so every file is valid JSON.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::geometry::{Geometry, SpdPoint, SymMatrix};
use crate::inference::{confidence_intervals, FitResult, Restriction, TermNorms};
use crate::model::{CovSeries, DiagParams, ModelKind, ModelParams, ScalarParams, SeriesMeta};
use crate::pipeline::{ReductionKind, ReductionPlan, SignalMatrix};

/// A number that may be non-finite.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Num(pub f64);

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let x = self.0;
        if x.is_finite() {
            s.serialize_f64(x)
        } else if x.is_nan() {
            s.serialize_str("NaN")
        } else if x > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }
}

impl<'de> Deserialize<'de> for Num {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            N(f64),
            S(String),
        }
        match Raw::deserialize(d)? {
            Raw::N(x) => Ok(Num(x)),
            Raw::S(s) => match s.to_ascii_lowercase().as_str() {
                "nan" => Ok(Num(f64::NAN)),
                "inf" | "+inf" | "infinity" => Ok(Num(f64::INFINITY)),
                "-inf" | "-infinity" => Ok(Num(f64::NEG_INFINITY)),
                _ => Err(serde::de::Error::custom(format!("not a number: {s}"))),
            },
        }
    }
}

fn nums(v: impl IntoIterator<Item = f64>) -> Vec<Num> {
    v.into_iter().map(Num).collect()
}

fn plain(v: &[Num]) -> Vec<f64> {
    v.iter().map(|n| n.0).collect()
}

fn rows_of(m: &DMatrix<f64>) -> Vec<Vec<Num>> {
    m.row_iter().map(|r| nums(r.iter().copied())).collect()
}

fn matrix_from_rows(rows: &[Vec<Num>], cols: usize) -> Result<DMatrix<f64>> {
    if rows.iter().any(|r| r.len() != cols) {
        return Err(Error::Format(format!("expected rows of length {cols}")));
    }
    Ok(DMatrix::from_fn(rows.len(), cols, |i, j| rows[i][j].0))
}

/// Square symmetric matrix as `{p, data}` with `data` row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixFile {
    pub p: usize,
    pub data: Vec<f64>,
}

impl MatrixFile {
    pub fn from_sym(s: &SymMatrix<f64>) -> Self {
        Self {
            p: s.dim(),
            data: s.row_major(),
        }
    }

    pub fn to_sym(&self) -> Result<SymMatrix<f64>> {
        SymMatrix::from_row_slice(self.p, &self.data)
    }

    pub fn to_point(&self) -> Result<SpdPoint<f64>> {
        SpdPoint::new(self.to_sym()?)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SeriesFile {
    pub p: usize,
    pub n: usize,
    pub dt: f64,
    pub points: Vec<Vec<f64>>,
    #[serde(default)]
    pub meta: SeriesMeta,
}

impl SeriesFile {
    pub fn from_series(s: &CovSeries<f64>) -> Self {
        Self {
            p: s.dim(),
            n: s.len(),
            dt: s.dt,
            points: s.points().iter().map(|x| x.matrix().row_major()).collect(),
            meta: s.meta.clone(),
        }
    }

    /// Points listed in `meta.not_pd_steps` are loaded without a PD check.
    pub fn to_series(&self) -> Result<CovSeries<f64>> {
        if self.points.len() != self.n {
            return Err(Error::Format(format!(
                "series declares n = {} but has {} points",
                self.n,
                self.points.len()
            )));
        }
        let points = self
            .points
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let m = SymMatrix::from_row_slice(self.p, row).map_err(|e| e.at_step(i))?;
                if self.meta.not_pd_steps.contains(&i) {
                    Ok(SpdPoint::ambient(m))
                } else {
                    SpdPoint::new(m).map_err(|e| e.at_step(i))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        CovSeries::with_meta(points, self.dt, self.meta.clone())
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "lowercase")]
pub enum ParamsFile {
    Scalar {
        geometry: Geometry,
        alpha: Vec<f64>,
        beta: f64,
        sigma: f64,
        attractor: MatrixFile,
    },
    Diagonal {
        geometry: Geometry,
        a: Vec<Vec<f64>>,
        b: Vec<f64>,
        sigma: Vec<f64>,
        attractor: MatrixFile,
    },
}

impl ParamsFile {
    pub fn from_params(p: &ModelParams<f64>) -> Self {
        match p {
            ModelParams::Scalar(s) => ParamsFile::Scalar {
                geometry: s.geometry,
                alpha: s.alpha.clone(),
                beta: s.beta,
                sigma: s.sigma,
                attractor: MatrixFile::from_sym(s.attractor.matrix()),
            },
            ModelParams::Diagonal(d) => ParamsFile::Diagonal {
                geometry: d.geometry,
                a: d.a
                    .row_iter()
                    .map(|r| r.iter().copied().collect())
                    .collect(),
                b: d.b.iter().copied().collect(),
                sigma: d.sigma.iter().copied().collect(),
                attractor: MatrixFile::from_sym(d.attractor.matrix()),
            },
        }
    }

    pub fn to_params(&self) -> Result<ModelParams<f64>> {
        let params: ModelParams<f64> = match self {
            ParamsFile::Scalar {
                geometry,
                alpha,
                beta,
                sigma,
                attractor,
            } => ScalarParams {
                alpha: alpha.clone(),
                beta: *beta,
                sigma: *sigma,
                attractor: attractor.to_point()?,
                geometry: *geometry,
            }
            .into(),
            ParamsFile::Diagonal {
                geometry,
                a,
                b,
                sigma,
                attractor,
            } => {
                let m = b.len();
                if a.iter().any(|r| r.len() != m) {
                    return Err(Error::Format(format!("rows of 'a' must have length {m}")));
                }
                DiagParams {
                    a: DMatrix::from_fn(a.len(), m, |i, j| a[i][j]),
                    b: DVector::from_vec(b.clone()),
                    sigma: DVector::from_vec(sigma.clone()),
                    attractor: attractor.to_point()?,
                    geometry: *geometry,
                }
                .into()
            }
        };
        params.validate()?;
        Ok(params)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TermsRow {
    pub index: usize,
    pub response: Num,
    pub autoregressive: Num,
    pub reversion: Num,
    pub residual: Num,
}

/// Everything about a fit, including derived intervals for convenience.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FitFile {
    pub params: ParamsFile,
    pub restricted: String,
    pub lag: usize,
    pub names: Vec<String>,
    pub estimates: Vec<Num>,
    pub std_errors: Vec<Num>,
    pub ci95: Vec<[Num; 2]>,
    pub fisher: Vec<Vec<Num>>,
    pub log_lik: Num,
    pub aic: Num,
    pub r2: Num,
    pub n_used: usize,
    pub condition: Num,
    #[serde(default)]
    pub degenerate: Vec<usize>,
    #[serde(default)]
    pub terms: Vec<TermsRow>,
}

impl FitFile {
    pub fn from_fit(fit: &FitResult<f64>) -> Self {
        let ci = confidence_intervals(fit)
            .unwrap_or_else(|_| vec![(f64::NAN, f64::NAN); fit.num_params()])
            .into_iter()
            .map(|(lo, hi)| [Num(lo), Num(hi)])
            .collect();
        Self {
            params: ParamsFile::from_params(&fit.params),
            restricted: fit.restricted.to_string(),
            lag: fit.lag(),
            names: fit.param_names(),
            estimates: nums(fit.estimates().iter().copied()),
            std_errors: nums(fit.std_errors.iter().copied()),
            ci95: ci,
            fisher: rows_of(&fit.fisher),
            log_lik: Num(fit.log_lik),
            aic: Num(fit.aic),
            r2: Num(fit.r2),
            n_used: fit.n_used,
            condition: Num(fit.condition),
            degenerate: fit.degenerate.clone(),
            terms: fit
                .terms
                .iter()
                .map(|t| TermsRow {
                    index: t.index,
                    response: Num(t.response),
                    autoregressive: Num(t.autoregressive),
                    reversion: Num(t.reversion),
                    residual: Num(t.residual),
                })
                .collect(),
        }
    }

    pub fn to_fit(&self) -> Result<FitResult<f64>> {
        let params = self.params.to_params()?;
        let j = self.std_errors.len();
        let fisher = matrix_from_rows(&self.fisher, j)?;
        if fisher.nrows() != j {
            return Err(Error::DimensionMismatch {
                expected: j,
                found: fisher.nrows(),
            });
        }
        if params.lag() != self.lag {
            return Err(Error::Format(format!(
                "fit declares lag {} but parameters have lag {}",
                self.lag,
                params.lag()
            )));
        }
        Ok(FitResult {
            params,
            restricted: self.restricted.parse::<Restriction>()?,
            fisher,
            std_errors: DVector::from_vec(plain(&self.std_errors)),
            log_lik: self.log_lik.0,
            aic: self.aic.0,
            r2: self.r2.0,
            n_used: self.n_used,
            condition: self.condition.0,
            degenerate: self.degenerate.clone(),
            terms: self
                .terms
                .iter()
                .map(|t| TermNorms {
                    index: t.index,
                    response: t.response.0,
                    autoregressive: t.autoregressive.0,
                    reversion: t.reversion.0,
                    residual: t.residual.0,
                })
                .collect(),
        })
    }

    pub fn kind(&self) -> ModelKind {
        match self.params {
            ParamsFile::Scalar { .. } => ModelKind::Scalar,
            ParamsFile::Diagonal { .. } => ModelKind::Diagonal,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PlanFile {
    pub kind: ReductionKind,
    pub p: usize,
    pub q: usize,
    pub projection: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub channels: Vec<usize>,
    pub retained: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub objective: Option<f64>,
}

impl PlanFile {
    pub fn from_plan(plan: &ReductionPlan<f64>) -> Self {
        Self {
            kind: plan.kind,
            p: plan.p(),
            q: plan.q(),
            projection: plan.rows(),
            channels: plan.channels.clone(),
            retained: plan.retained,
            objective: plan.objective,
        }
    }

    pub fn to_plan(&self) -> Result<ReductionPlan<f64>> {
        if self.projection.len() != self.p || self.projection.iter().any(|r| r.len() != self.q) {
            return Err(Error::Format(format!(
                "projection must be {} × {}",
                self.p, self.q
            )));
        }
        if self.kind == ReductionKind::GreedyMinEig
            && (self.channels.len() != self.p || self.channels.iter().any(|&c| c >= self.q))
        {
            return Err(Error::Format(
                "channel list does not match the plan dimensions".into(),
            ));
        }
        Ok(ReductionPlan {
            kind: self.kind,
            projection: DMatrix::from_fn(self.p, self.q, |i, j| self.projection[i][j]),
            channels: self.channels.clone(),
            retained: self.retained,
            objective: self.objective,
        })
    }
}

/// Sidecar of a raw binary signal: `n_z · q` little-endian `f64`, sample-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignalHeader {
    pub q: usize,
    pub f: f64,
    pub n_z: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub channels: Option<Vec<String>>,
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

/// Pretty-printed JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

pub fn read_series(path: &Path) -> Result<CovSeries<f64>> {
    read_json::<SeriesFile>(path)?.to_series()
}

pub fn write_series(path: &Path, series: &CovSeries<f64>) -> Result<()> {
    write_json(path, &SeriesFile::from_series(series))
}

pub fn read_params(path: &Path) -> Result<ModelParams<f64>> {
    read_json::<ParamsFile>(path)?.to_params()
}

pub fn write_params(path: &Path, params: &ModelParams<f64>) -> Result<()> {
    write_json(path, &ParamsFile::from_params(params))
}

pub fn read_fit(path: &Path) -> Result<FitResult<f64>> {
    read_json::<FitFile>(path)?.to_fit()
}

pub fn write_fit(path: &Path, fit: &FitResult<f64>) -> Result<()> {
    write_json(path, &FitFile::from_fit(fit))
}

pub fn read_plan(path: &Path) -> Result<ReductionPlan<f64>> {
    read_json::<PlanFile>(path)?.to_plan()
}

pub fn write_plan(path: &Path, plan: &ReductionPlan<f64>) -> Result<()> {
    write_json(path, &PlanFile::from_plan(plan))
}

pub fn read_point(path: &Path) -> Result<SpdPoint<f64>> {
    read_json::<MatrixFile>(path)?.to_point()
}

pub fn write_point(path: &Path, s: &SpdPoint<f64>) -> Result<()> {
    write_json(path, &MatrixFile::from_sym(s.matrix()))
}

/// CSV with a header row of channel names and one row per sample.
pub fn read_signal_csv(path: &Path, rate: f64) -> Result<SignalMatrix<f64>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(csv_error)?;
    let channels: Vec<String> = rdr
        .headers()
        .map_err(csv_error)?
        .iter()
        .map(str::to_owned)
        .collect();
    let q = channels.len();
    let mut data = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(csv_error)?;
        if rec.len() != q {
            return Err(Error::Format(format!(
                "row {} has {} fields, expected {q}",
                line + 1,
                rec.len()
            )));
        }
        for field in rec.iter() {
            data.push(
                field
                    .parse::<f64>()
                    .map_err(|e| Error::Format(format!("row {}: {e}", line + 1)))?,
            );
        }
    }
    let n = data.len() / q.max(1);
    SignalMatrix::with_channels(DMatrix::from_row_slice(n, q, &data), rate, channels)
}

pub fn write_signal_csv(path: &Path, z: &SignalMatrix<f64>) -> Result<()> {
    let header: Vec<&str> = z.channels.iter().map(String::as_str).collect();
    let rows = z
        .samples()
        .row_iter()
        .map(|r| r.iter().copied().collect::<Vec<_>>());
    write_table(path, &header, rows)
}

/// Sidecar path of a binary signal: the same path with a `.json` extension.
pub fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("json")
}

pub fn read_signal_bin(path: &Path) -> Result<SignalMatrix<f64>> {
    let header: SignalHeader = read_json(&sidecar_path(path))?;
    let bytes = fs::read(path)?;
    let expected = header.n_z * header.q * 8;
    if bytes.len() != expected {
        return Err(Error::Format(format!(
            "{} holds {} bytes, sidecar implies {expected}",
            path.display(),
            bytes.len()
        )));
    }
    let data: Vec<f64> = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect();
    let samples = DMatrix::from_row_slice(header.n_z, header.q, &data);
    match header.channels {
        Some(names) => SignalMatrix::with_channels(samples, header.f, names),
        None => SignalMatrix::new(samples, header.f),
    }
}

pub fn write_signal_bin(path: &Path, z: &SignalMatrix<f64>) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    for row in z.samples().row_iter() {
        for x in row.iter() {
            w.write_all(&x.to_le_bytes())?;
        }
    }
    w.flush()?;
    let header = SignalHeader {
        q: z.num_channels(),
        f: z.rate,
        n_z: z.num_samples(),
        channels: Some(z.channels.clone()),
    };
    write_json(&sidecar_path(path), &header)
}

/// Reads a signal by extension: `.csv` needs `rate`, anything else is binary
/// with a sidecar.
pub fn read_signal(path: &Path, rate: Option<f64>) -> Result<SignalMatrix<f64>> {
    let is_csv = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    if is_csv {
        let rate = rate.ok_or_else(|| {
            Error::Format(format!(
                "{}: CSV signals need a sampling rate",
                path.display()
            ))
        })?;
        read_signal_csv(path, rate)
    } else {
        read_signal_bin(path)
    }
}

fn csv_error(e: csv::Error) -> Error {
    Error::Format(e.to_string())
}

/// Writes a CSV table with a one-line header; numbers use the shortest
/// representation that reads back exactly.
pub fn write_table<I, R>(path: &Path, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = R>,
    R: AsRef<[f64]>,
{
    let mut w = csv::Writer::from_path(path).map_err(csv_error)?;
    w.write_record(header).map_err(csv_error)?;
    for row in rows {
        w.write_record(row.as_ref().iter().map(|x| x.to_string()))
            .map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

/// Like [`write_table`] but with a leading text column.
pub fn write_labelled_table<'a, I>(path: &Path, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = (&'a str, Vec<f64>)>,
{
    let mut w = csv::Writer::from_path(path).map_err(csv_error)?;
    w.write_record(header).map_err(csv_error)?;
    for (label, values) in rows {
        let mut rec = vec![label.to_owned()];
        rec.extend(values.iter().map(|x| x.to_string()));
        w.write_record(&rec).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a headed numeric CSV into `(header, rows)`.
pub fn read_table(path: &Path) -> Result<(Vec<String>, DMatrix<f64>)> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(csv_error)?;
    let header: Vec<String> = rdr
        .headers()
        .map_err(csv_error)?
        .iter()
        .map(str::to_owned)
        .collect();
    let mut data = Vec::new();
    let mut n = 0;
    for rec in rdr.records() {
        let rec = rec.map_err(csv_error)?;
        if rec.len() != header.len() {
            return Err(Error::Format(format!(
                "row {} has {} fields",
                n + 1,
                rec.len()
            )));
        }
        for f in rec.iter() {
            data.push(
                f.parse::<f64>()
                    .map_err(|e| Error::Format(format!("row {}: {e}", n + 1)))?,
            );
        }
        n += 1;
    }
    Ok((
        header.clone(),
        DMatrix::from_row_slice(n, header.len(), &data),
    ))
}
