//! Exogenous time series: operator traffic loads and harvested energy.
//!
//! Traffic samples are bits per observation window and harvest samples are
//! joules per observation window, so aggregation is a plain sum. Missing
//! observations are carried as `NaN` until they are filled by linear
//! interpolation.

use std::fmt;
use std::path::Path;

use chrono::{DateTime, NaiveDateTime};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Slots per day for synthetic traces (30 minute slots).
pub const SYNTH_SLOTS_PER_DAY: usize = 48;
pub const SYNTH_SLOT_SECONDS: f64 = 1800.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeriesLabel {
    TrafficA,
    TrafficB,
    Solar,
    Wind,
}

impl SeriesLabel {
    pub const ALL: [SeriesLabel; 4] =
        [SeriesLabel::TrafficA, SeriesLabel::TrafficB, SeriesLabel::Wind, SeriesLabel::Solar];

    pub fn as_str(self) -> &'static str {
        match self {
            SeriesLabel::TrafficA => "traffic_a",
            SeriesLabel::TrafficB => "traffic_b",
            SeriesLabel::Solar => "solar",
            SeriesLabel::Wind => "wind",
        }
    }
}

impl fmt::Display for SeriesLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceSeries {
    /// Seconds covered by one sample.
    pub slot_duration: f64,
    /// Epoch seconds of the first sample.
    pub start_time: i64,
    pub values: Vec<f64>,
    pub label: SeriesLabel,
}

impl TraceSeries {
    pub fn new(label: SeriesLabel, slot_duration: f64, values: Vec<f64>) -> Self {
        TraceSeries { slot_duration, start_time: 0, values, label }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn has_gaps(&self) -> bool {
        self.values.iter().any(|v| v.is_nan())
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().filter(|v| !v.is_nan()).fold(0.0, f64::max)
    }

    pub fn with_label(mut self, label: SeriesLabel) -> Self {
        self.label = label;
        self
    }

    /// Returns the window `[from, to)` as a new series.
    pub fn slice(&self, from: usize, to: usize) -> TraceSeries {
        TraceSeries {
            slot_duration: self.slot_duration,
            start_time: self.start_time + (from as f64 * self.slot_duration) as i64,
            values: self.values[from..to].to_vec(),
            label: self.label,
        }
    }

    pub fn scaled(&self, factor: f64) -> TraceSeries {
        TraceSeries {
            values: self.values.iter().map(|v| v * factor).collect(),
            ..self.clone()
        }
    }

    /// Fills missing samples: interior gaps are linearly interpolated between
    /// their neighbours, leading and trailing gaps copy the nearest sample.
    pub fn fill_gaps(&self) -> TraceSeries {
        let mut out = self.clone();
        let known: Vec<usize> = (0..self.values.len()).filter(|&i| !self.values[i].is_nan()).collect();
        if known.is_empty() {
            out.values.iter_mut().for_each(|v| *v = 0.0);
            return out;
        }
        let first = known[0];
        let last = *known.last().unwrap();
        for i in 0..first {
            out.values[i] = self.values[first];
        }
        for i in last + 1..self.values.len() {
            out.values[i] = self.values[last];
        }
        for pair in known.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            let (va, vb) = (self.values[a], self.values[b]);
            for i in a + 1..b {
                let w = (i - a) as f64 / (b - a) as f64;
                out.values[i] = va + w * (vb - va);
            }
        }
        out
    }
}

fn parse_timestamp(raw: &str) -> Option<i64> {
    let raw = raw.trim();
    if let Ok(secs) = raw.parse::<i64>() {
        return Some(secs);
    }
    if let Ok(dt) = DateTime::parse_from_rfc3339(raw) {
        return Some(dt.timestamp());
    }
    for fmt in ["%Y-%m-%dT%H:%M:%S", "%Y-%m-%d %H:%M:%S", "%Y-%m-%dT%H:%M", "%Y-%m-%d %H:%M"] {
        if let Ok(dt) = NaiveDateTime::parse_from_str(raw, fmt) {
            return Some(dt.and_utc().timestamp());
        }
    }
    None
}

/// Reads a `timestamp,value` CSV at its native resolution.
///
/// Rows may arrive in any order; rows sharing a timestamp are summed and
/// absent slots are left as gaps (`NaN`).
pub fn load_trace(path: &Path, label: SeriesLabel, native_resolution: f64) -> Result<TraceSeries> {
    if native_resolution <= 0.0 {
        return Err(Error::Domain(format!("native resolution must be positive, got {native_resolution}")));
    }
    let mut reader = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_path(path)?;
    let parse_err = |line: usize, msg: String| Error::Parse { path: path.to_path_buf(), line, msg };

    let mut rows: Vec<(i64, f64)> = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        // header is line 1
        let line = idx + 2;
        let record = record.map_err(|e| parse_err(line, e.to_string()))?;
        if record.len() < 2 {
            return Err(parse_err(line, "expected `timestamp,value`".into()));
        }
        let ts = parse_timestamp(&record[0])
            .ok_or_else(|| parse_err(line, format!("unparseable timestamp `{}`", &record[0])))?;
        let value: f64 = record[1]
            .trim()
            .parse()
            .map_err(|_| parse_err(line, format!("unparseable value `{}`", &record[1])))?;
        if !value.is_finite() || value < 0.0 {
            return Err(parse_err(line, format!("value must be a non-negative number, got {value}")));
        }
        rows.push((ts, value));
    }
    if rows.is_empty() {
        return Err(Error::EmptySeries(path.to_path_buf()));
    }
    rows.sort_by_key(|&(ts, _)| ts);

    let start = rows[0].0;
    let span = (rows.last().unwrap().0 - start) as f64;
    let n = (span / native_resolution).round() as usize + 1;
    let mut values = vec![f64::NAN; n];
    for &(ts, v) in &rows {
        let pos = (ts - start) as f64 / native_resolution;
        let idx = pos.round() as usize;
        if (pos - idx as f64).abs() > 1e-6 {
            return Err(Error::Domain(format!(
                "{}: timestamp {ts} is not aligned to the {native_resolution}s resolution",
                path.display()
            )));
        }
        values[idx] = if values[idx].is_nan() { v } else { values[idx] + v };
    }
    Ok(TraceSeries { slot_duration: native_resolution, start_time: start, values, label })
}

/// Writes a series as `timestamp,value` with epoch-second timestamps.
pub fn save_trace(series: &TraceSeries, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["timestamp", "value"])?;
    for (i, v) in series.values.iter().enumerate() {
        let ts = series.start_time + (i as f64 * series.slot_duration).round() as i64;
        w.write_record([ts.to_string(), v.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Sums consecutive samples into slots of `slot_duration` seconds, filling
/// gaps first. A trailing partial window is summed over what it holds.
pub fn aggregate(series: &TraceSeries, slot_duration: f64) -> Result<TraceSeries> {
    let ratio = slot_duration / series.slot_duration;
    let factor = ratio.round();
    if factor < 1.0 || (ratio - factor).abs() > 1e-9 * ratio.max(1.0) {
        return Err(Error::ResolutionMismatch { native: series.slot_duration, target: slot_duration });
    }
    let factor = factor as usize;
    let filled = series.fill_gaps();
    let values = filled.values.chunks(factor).map(|w| w.iter().sum()).collect();
    Ok(TraceSeries { slot_duration, start_time: series.start_time, values, label: series.label })
}

/// Scales a series into `[0, 1]` by its maximum. An all-zero series is
/// returned unchanged.
pub fn normalize(series: &TraceSeries) -> TraceSeries {
    let filled = if series.has_gaps() { series.fill_gaps() } else { series.clone() };
    let max = filled.max();
    if max <= 0.0 {
        return filled;
    }
    TraceSeries { values: filled.values.iter().map(|v| v / max).collect(), ..filled }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorkloadSplit {
    pub total: u64,
    pub delay_sensitive: u64,
    pub delay_tolerant: u64,
}

pub const DEFAULT_SENSITIVE_FRACTION: f64 = 0.8;

pub fn split_workload(total: u64, sensitive_fraction: f64) -> Result<WorkloadSplit> {
    if !(0.0..=1.0).contains(&sensitive_fraction) {
        return Err(Error::Domain(format!("sensitive fraction {sensitive_fraction} outside [0, 1]")));
    }
    let delay_sensitive = ((total as f64) * sensitive_fraction).round().min(total as f64) as u64;
    Ok(WorkloadSplit { total, delay_sensitive, delay_tolerant: total - delay_sensitive })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SynthProfile {
    DiurnalTraffic,
    Solar,
    Wind,
}

/// Generates a deterministic stand-in trace on 30 minute slots.
///
/// * diurnal traffic: daily raised cosine (trough at 04:00, peak at 16:00)
///   plus Gaussian noise, unitless with a peak close to 1;
/// * solar: squared-sine daylight bell between 06:00 and 18:00 scaled by a
///   per-day cloudiness factor, exactly zero at night;
/// * wind: mean-reverting AR(1) process around 0.6.
pub fn synth_trace(profile: SynthProfile, n_slots: usize, seed: u64) -> TraceSeries {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let per_day = SYNTH_SLOTS_PER_DAY as f64;
    let hour = |i: usize| (i % SYNTH_SLOTS_PER_DAY) as f64 * 24.0 / per_day;
    let values: Vec<f64> = match profile {
        SynthProfile::DiurnalTraffic => {
            let noise = Normal::new(0.0, 0.03).unwrap();
            (0..n_slots)
                .map(|i| {
                    let phase = 2.0 * std::f64::consts::PI * (hour(i) - 4.0) / 24.0;
                    let shape = 0.2 + 0.8 * (0.5 - 0.5 * phase.cos());
                    (shape + noise.sample(&mut rng)).max(0.0)
                })
                .collect()
        }
        SynthProfile::Solar => {
            let cloud = Normal::new(0.0, 0.08).unwrap();
            let jitter = Normal::new(0.0, 0.02).unwrap();
            let mut day_factor: f64 = 0.9;
            (0..n_slots)
                .map(|i| {
                    if i % SYNTH_SLOTS_PER_DAY == 0 {
                        day_factor = (0.85 + 0.5 * (day_factor - 0.85) + cloud.sample(&mut rng)).clamp(0.55, 1.0);
                    }
                    let h = hour(i) + 0.25;
                    if !(6.0..18.0).contains(&h) {
                        return 0.0;
                    }
                    let bell = (std::f64::consts::PI * (h - 6.0) / 12.0).sin().powi(2);
                    (day_factor * bell * (1.0 + jitter.sample(&mut rng))).max(0.0)
                })
                .collect()
        }
        SynthProfile::Wind => {
            let innovation = Normal::new(0.0, 0.04).unwrap();
            let (mean, phi): (f64, f64) = (0.6, 0.95);
            let mut x: f64 = mean;
            (0..n_slots)
                .map(|_| {
                    x = mean + phi * (x - mean) + innovation.sample(&mut rng);
                    x = x.max(0.0);
                    x
                })
                .collect()
        }
    };
    let label = match profile {
        SynthProfile::DiurnalTraffic => SeriesLabel::TrafficA,
        SynthProfile::Solar => SeriesLabel::Solar,
        SynthProfile::Wind => SeriesLabel::Wind,
    };
    TraceSeries::new(label, SYNTH_SLOT_SECONDS, values)
}

#[cfg(test)]
mod tests {
    use std::io::Write;

    use super::*;

    fn csv_file(body: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        write!(f, "timestamp,value\n{body}").unwrap();
        f
    }

    #[test]
    fn load_keeps_row_count() {
        let body: String = (0..48).map(|i| format!("{},{}\n", i * 600, i)).collect();
        let f = csv_file(&body);
        let s = load_trace(f.path(), SeriesLabel::TrafficA, 600.0).unwrap();
        assert_eq!(s.len(), 48);
        assert!(!s.has_gaps());
    }

    #[test]
    fn load_sorts_and_merges_duplicates() {
        let f = csv_file("1200,3\n0,1\n600,2\n600,5\n");
        let s = load_trace(f.path(), SeriesLabel::Solar, 600.0).unwrap();
        assert_eq!(s.values, vec![1.0, 7.0, 3.0]);
        assert_eq!(s.start_time, 0);
    }

    #[test]
    fn load_accepts_iso_timestamps() {
        let f = csv_file("2015-01-01T00:10:00Z,4\n2015-01-01 00:00:00,2\n");
        let s = load_trace(f.path(), SeriesLabel::TrafficB, 600.0).unwrap();
        assert_eq!(s.values, vec![2.0, 4.0]);
    }

    #[test]
    fn load_rejects_negative_with_line() {
        let f = csv_file("0,1\n600,-2\n");
        let err = load_trace(f.path(), SeriesLabel::TrafficA, 600.0).unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn load_rejects_empty_file() {
        let f = csv_file("");
        assert!(matches!(load_trace(f.path(), SeriesLabel::Wind, 900.0), Err(Error::EmptySeries(_))));
    }

    #[test]
    fn load_leaves_gaps() {
        let f = csv_file("0,1\n1800,4\n");
        let s = load_trace(f.path(), SeriesLabel::Wind, 600.0).unwrap();
        assert_eq!(s.len(), 4);
        assert!(s.values[1].is_nan() && s.values[2].is_nan());
    }

    #[test]
    fn aggregate_single_window() {
        let s = TraceSeries::new(SeriesLabel::TrafficA, 600.0, vec![2.0, 3.0, 5.0]);
        assert_eq!(aggregate(&s, 1800.0).unwrap().values, vec![10.0]);
    }

    #[test]
    fn aggregate_uniform() {
        let s = TraceSeries::new(SeriesLabel::Solar, 900.0, vec![1.0; 6]);
        assert_eq!(aggregate(&s, 1800.0).unwrap().values, vec![2.0, 2.0, 2.0]);
    }

    #[test]
    fn aggregate_fills_gap_before_summing() {
        // interpolation by hand: [1, 2, 3, 3, 3]
        let s = TraceSeries::new(SeriesLabel::Wind, 600.0, vec![1.0, f64::NAN, 3.0, f64::NAN, f64::NAN]);
        assert_eq!(aggregate(&s, 3000.0).unwrap().values, vec![12.0]);
        let lead = TraceSeries::new(SeriesLabel::Wind, 600.0, vec![f64::NAN, 4.0, f64::NAN, 8.0, 2.0]);
        // [4, 4, 6, 8, 2]
        assert_eq!(aggregate(&lead, 3000.0).unwrap().values, vec![24.0]);
    }

    #[test]
    fn aggregate_partial_tail_and_mismatch() {
        let s = TraceSeries::new(SeriesLabel::TrafficA, 600.0, vec![1.0; 7]);
        assert_eq!(aggregate(&s, 1800.0).unwrap().values, vec![3.0, 3.0, 1.0]);
        assert!(matches!(aggregate(&s, 1000.0), Err(Error::ResolutionMismatch { .. })));
    }

    #[test]
    fn normalize_examples() {
        let s = TraceSeries::new(SeriesLabel::TrafficA, 1800.0, vec![2.0, 4.0, 8.0]);
        assert_eq!(normalize(&s).values, vec![0.25, 0.5, 1.0]);
        let z = TraceSeries::new(SeriesLabel::TrafficA, 1800.0, vec![0.0; 3]);
        assert_eq!(normalize(&z).values, vec![0.0; 3]);
    }

    #[test]
    fn split_examples() {
        let s = split_workload(10_000_000, 0.8).unwrap();
        assert_eq!((s.delay_sensitive, s.delay_tolerant), (8_000_000, 2_000_000));
        assert_eq!(split_workload(77, 0.0).unwrap().delay_sensitive, 0);
        assert_eq!(split_workload(77, 1.0).unwrap().delay_tolerant, 0);
        assert!(split_workload(1, 1.2).is_err());
        assert!(split_workload(1, -0.1).is_err());
    }

    #[test]
    fn solar_is_dark_at_night() {
        let s = synth_trace(SynthProfile::Solar, 48, 3);
        for (i, v) in s.values.iter().enumerate() {
            let h = i as f64 * 0.5;
            if !(6.0..=17.5).contains(&h) {
                assert_eq!(*v, 0.0, "slot {i}");
            }
        }
        assert!(s.max() > 0.3);
    }

    #[test]
    fn synth_is_deterministic() {
        for p in [SynthProfile::DiurnalTraffic, SynthProfile::Solar, SynthProfile::Wind] {
            assert_eq!(synth_trace(p, 200, 9), synth_trace(p, 200, 9));
            assert_ne!(synth_trace(p, 200, 9), synth_trace(p, 200, 10));
            assert!(synth_trace(p, 500, 1).values.iter().all(|v| *v >= 0.0));
        }
    }

    #[test]
    fn save_then_load() {
        let s = synth_trace(SynthProfile::Wind, 20, 4).with_label(SeriesLabel::Wind);
        let f = tempfile::NamedTempFile::new().unwrap();
        save_trace(&s, f.path()).unwrap();
        let back = load_trace(f.path(), SeriesLabel::Wind, s.slot_duration).unwrap();
        assert_eq!(back, s);
    }
}
