//! Short-horizon forecasting of traffic load and harvested energy.
//!
//! Two predictors share one interface: seasonal-naive (repeat the value one
//! season earlier) and an order-`p` autoregression with intercept fitted by
//! least squares. Fitting only reads the leading `train_fraction` of the
//! history; the remainder is the chronological hold-out.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::trace::{SeriesLabel, TraceSeries};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PredictorKind {
    SeasonalNaive,
    Autoregressive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PredictorConfig {
    pub kind: PredictorKind,
    pub season_length: usize,
    /// Autoregressive order; ignored by seasonal-naive.
    pub order: usize,
    pub train_fraction: f64,
}

impl Default for PredictorConfig {
    fn default() -> Self {
        PredictorConfig { kind: PredictorKind::Autoregressive, season_length: 48, order: 4, train_fraction: 0.7 }
    }
}

impl PredictorConfig {
    pub fn seasonal_naive(season_length: usize) -> Self {
        PredictorConfig { kind: PredictorKind::SeasonalNaive, season_length, ..Default::default() }
    }

    pub fn autoregressive(order: usize) -> Self {
        PredictorConfig { kind: PredictorKind::Autoregressive, order, ..Default::default() }
    }
}

/// A fitted predictor. Immutable after [`fit`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Predictor {
    pub kind: PredictorKind,
    pub season_length: usize,
    /// `[intercept, phi_1, .., phi_p]` for the autoregression, empty otherwise.
    pub coefficients: Vec<f64>,
    pub train_fraction: f64,
    /// Forecasts are clamped to `[lower, upper]`.
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastResult {
    pub horizon: usize,
    pub predicted: Vec<f64>,
    pub actual: Option<Vec<f64>>,
}

impl ForecastResult {
    pub fn rmse(&self) -> Option<f64> {
        self.actual.as_ref().and_then(|a| rmse(&self.predicted, a).ok())
    }
}

fn training_len(n: usize, fraction: f64) -> usize {
    ((n as f64 * fraction).round() as usize).clamp(1, n)
}

pub fn fit(history: &TraceSeries, config: &PredictorConfig) -> Result<Predictor> {
    if config.season_length == 0 {
        return Err(Error::Domain("season length must be at least 1".into()));
    }
    if !(0.0..=1.0).contains(&config.train_fraction) || config.train_fraction == 0.0 {
        return Err(Error::Domain(format!("train fraction {} outside (0, 1]", config.train_fraction)));
    }
    let needed = 2 * config.season_length;
    if history.len() < needed {
        return Err(Error::NotEnoughData { needed, got: history.len() });
    }
    let filled = history.fill_gaps();
    let train = &filled.values[..training_len(filled.len(), config.train_fraction)];

    let (lo, hi) = train.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let headroom = 0.1 * (hi - lo);
    let lower = (lo - headroom).max(0.0);
    let upper = hi + headroom;

    let coefficients = match config.kind {
        PredictorKind::SeasonalNaive => Vec::new(),
        PredictorKind::Autoregressive => {
            let p = config.order.max(1);
            if train.len() < 2 * (p + 1) {
                return Err(Error::NotEnoughData { needed: 2 * (p + 1), got: train.len() });
            }
            fit_autoregression(train, p)
        }
    };
    Ok(Predictor {
        kind: config.kind,
        season_length: config.season_length,
        coefficients,
        train_fraction: config.train_fraction,
        lower,
        upper,
    })
}

fn fit_autoregression(train: &[f64], p: usize) -> Vec<f64> {
    let rows = train.len() - p;
    let design = DMatrix::from_fn(rows, p + 1, |r, c| if c == 0 { 1.0 } else { train[p + r - c] });
    let target = DVector::from_fn(rows, |r, _| train[p + r]);
    let svd = design.svd(true, true);
    match svd.solve(&target, 1e-10) {
        Ok(beta) => beta.iter().copied().collect(),
        // Degenerate fit: fall back to the training mean.
        Err(_) => {
            let mut c = vec![0.0; p + 1];
            c[0] = train.iter().sum::<f64>() / train.len() as f64;
            c
        }
    }
}

impl Predictor {
    /// `horizon` values following the end of `history`, clamped and
    /// non-negative.
    pub fn forecast(&self, history: &[f64], horizon: usize) -> Vec<f64> {
        let mut ext: Vec<f64> = history.to_vec();
        let n = history.len();
        for _ in 0..horizon {
            let len = ext.len();
            let raw = match self.kind {
                PredictorKind::SeasonalNaive => {
                    if len >= self.season_length {
                        ext[len - self.season_length]
                    } else {
                        ext.last().copied().unwrap_or(0.0)
                    }
                }
                PredictorKind::Autoregressive => {
                    let p = self.coefficients.len().saturating_sub(1);
                    if len >= p && p > 0 {
                        self.coefficients[0]
                            + (1..=p).map(|i| self.coefficients[i] * ext[len - i]).sum::<f64>()
                    } else {
                        ext.last().copied().unwrap_or(0.0)
                    }
                }
            };
            ext.push(self.clamp(raw));
        }
        ext.split_off(n)
    }

    fn clamp(&self, v: f64) -> f64 {
        let v = if v.is_nan() { self.lower } else { v };
        v.clamp(self.lower, self.upper).max(0.0)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Predictor> {
        Ok(serde_json::from_str(s)?)
    }
}

pub fn predict(p: &Predictor, history_up_to_t: &TraceSeries, horizon: usize) -> Result<ForecastResult> {
    if horizon == 0 {
        return Err(Error::Domain("forecast horizon must be at least 1".into()));
    }
    let filled = history_up_to_t.fill_gaps();
    Ok(ForecastResult { horizon, predicted: p.forecast(&filled.values, horizon), actual: None })
}

pub fn rmse(predicted: &[f64], actual: &[f64]) -> Result<f64> {
    if predicted.len() != actual.len() {
        return Err(Error::Domain(format!(
            "length mismatch: {} predictions vs {} observations",
            predicted.len(),
            actual.len()
        )));
    }
    if predicted.is_empty() {
        return Err(Error::Domain("rmse of an empty series".into()));
    }
    let sse: f64 = predicted.iter().zip(actual).map(|(p, a)| (p - a) * (p - a)).sum();
    Ok((sse / predicted.len() as f64).sqrt())
}

/// Rolling-origin error on the hold-out: at every origin in the test span the
/// predictor sees only the past and forecasts `horizon` slots; all forecast
/// values of every window are pooled into one RMSE.
pub fn holdout_rmse(series: &TraceSeries, config: &PredictorConfig, horizon: usize) -> Result<f64> {
    let predictor = fit(series, config)?;
    let filled = series.fill_gaps();
    let values = &filled.values;
    let start = training_len(values.len(), config.train_fraction);
    let mut predicted = Vec::new();
    let mut actual = Vec::new();
    for origin in start..values.len() {
        if origin + horizon > values.len() {
            break;
        }
        predicted.extend(predictor.forecast(&values[..origin], horizon));
        actual.extend_from_slice(&values[origin..origin + horizon]);
    }
    if predicted.is_empty() {
        return Err(Error::NotEnoughData { needed: start + horizon, got: values.len() });
    }
    rmse(&predicted, &actual)
}

/// Per-series, per-horizon hold-out RMSE.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RmseTable {
    pub horizons: Vec<usize>,
    pub rows: Vec<(SeriesLabel, Vec<f64>)>,
}

impl RmseTable {
    pub fn compute(series: &[(TraceSeries, PredictorConfig)], horizons: &[usize]) -> Result<RmseTable> {
        let mut rows = Vec::with_capacity(series.len());
        for (s, cfg) in series {
            let errs = horizons.iter().map(|&h| holdout_rmse(s, cfg, h)).collect::<Result<Vec<_>>>()?;
            rows.push((s.label, errs));
        }
        Ok(RmseTable { horizons: horizons.to_vec(), rows })
    }

    pub fn get(&self, label: SeriesLabel, horizon: usize) -> Option<f64> {
        let col = self.horizons.iter().position(|&h| h == horizon)?;
        self.rows.iter().find(|(l, _)| *l == label).map(|(_, v)| v[col])
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        let mut header = vec!["series".to_string()];
        header.extend(self.horizons.iter().map(|h| format!("T={h}")));
        w.write_record(&header)?;
        for (label, errs) in &self.rows {
            let mut rec = vec![label.to_string()];
            rec.extend(errs.iter().map(|e| format!("{e:.6}")));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Fitted predictors for the four exogenous processes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictorSet {
    pub traffic_a: Predictor,
    pub traffic_b: Predictor,
    pub solar: Predictor,
    pub wind: Predictor,
}

/// Forecasts for slots `t, t+1, .., t+T-1`, in raw units (bits, joules).
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ForecastWindow {
    pub load_a: Vec<f64>,
    pub load_b: Vec<f64>,
    pub solar: Vec<f64>,
    pub wind: Vec<f64>,
}

impl ForecastWindow {
    pub fn horizon(&self) -> usize {
        self.load_a.len()
    }

    /// A window repeating the same values for `horizon` slots.
    pub fn constant(horizon: usize, load_a: f64, load_b: f64, solar: f64, wind: f64) -> Self {
        ForecastWindow {
            load_a: vec![load_a; horizon],
            load_b: vec![load_b; horizon],
            solar: vec![solar; horizon],
            wind: vec![wind; horizon],
        }
    }
}

impl PredictorSet {
    /// Forecasts `horizon` slots following the given histories.
    pub fn forecast(
        &self,
        traffic_a: &[f64],
        traffic_b: &[f64],
        solar: &[f64],
        wind: &[f64],
        horizon: usize,
    ) -> ForecastWindow {
        ForecastWindow {
            load_a: self.traffic_a.forecast(traffic_a, horizon),
            load_b: self.traffic_b.forecast(traffic_b, horizon),
            solar: self.solar.forecast(solar, horizon),
            wind: self.wind.forecast(wind, horizon),
        }
    }
}
