use std::fs;

use proptest::prelude::*;

use remote_site::trace::{
    aggregate, load_trace, normalize, save_trace, split_workload, synth_trace, SeriesLabel, SynthProfile, TraceSeries,
};

#[test]
fn unordered_rows_are_sorted_summed_and_gapped() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("t.csv");
    fs::write(&p, "timestamp,value\n1970-01-01T01:00:00Z,3\n0,1\n900,2\n0,4\n").unwrap();
    let s = load_trace(&p, SeriesLabel::Wind, 900.0).unwrap();
    assert_eq!(s.len(), 5);
    assert_eq!(s.values[0], 5.0);
    assert_eq!(s.values[1], 2.0);
    assert!(s.values[2].is_nan() && s.values[3].is_nan());
    assert_eq!(s.values[4], 3.0);
    let slots = aggregate(&s, 1800.0).unwrap();
    assert_eq!(slots.values[0], 7.0);
    assert!((slots.values[1] - 5.0).abs() < 1e-12);
    assert_eq!(slots.values[2], 3.0);
}

#[test]
fn malformed_files_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        "timestamp,value\n",
        "timestamp,value\nyesterday,1\n",
        "timestamp,value\n0,abc\n",
        "timestamp,value\n0,-1\n",
        "timestamp,value\n0,1\n450,1\n",
    ];
    for (i, body) in cases.iter().enumerate() {
        let p = dir.path().join(format!("{i}.csv"));
        fs::write(&p, body).unwrap();
        assert!(load_trace(&p, SeriesLabel::Solar, 900.0).is_err(), "{body:?}");
    }
    assert!(load_trace(&dir.path().join("missing.csv"), SeriesLabel::Solar, 900.0).is_err());
}

#[test]
fn saved_traces_load_back() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("s.csv");
    let s = synth_trace(SynthProfile::Solar, 96, 5).with_label(SeriesLabel::Solar);
    save_trace(&s, &p).unwrap();
    let back = load_trace(&p, SeriesLabel::Solar, 1800.0).unwrap();
    assert_eq!(back.values, s.values);
}

#[test]
fn resolution_must_divide_the_slot() {
    let s = TraceSeries::new(SeriesLabel::TrafficA, 700.0, vec![1.0; 10]);
    assert!(aggregate(&s, 1800.0).is_err());
    assert!(aggregate(&s, 350.0).is_err());
}

#[test]
fn synthetic_traces_are_seeded() {
    let a = synth_trace(SynthProfile::DiurnalTraffic, 200, 9);
    assert_eq!(a, synth_trace(SynthProfile::DiurnalTraffic, 200, 9));
    assert_ne!(a, synth_trace(SynthProfile::DiurnalTraffic, 200, 10));
    let solar = synth_trace(SynthProfile::Solar, 48, 1);
    assert_eq!(solar.values[0], 0.0);
    assert!(solar.values[24] > 0.0);
}

proptest! {
    #[test]
    fn aggregation_conserves_the_total(v in prop::collection::vec(0.0f64..1e6, 1..200), k in 1usize..8) {
        let s = TraceSeries::new(SeriesLabel::TrafficB, 300.0, v.clone());
        let a = aggregate(&s, 300.0 * k as f64).unwrap();
        prop_assert_eq!(a.len(), v.len().div_ceil(k));
        let (x, y): (f64, f64) = (v.iter().sum(), a.values.iter().sum());
        prop_assert!((x - y).abs() <= 1e-9 * x.max(1.0));
    }

    #[test]
    fn normalized_series_peak_at_one(v in prop::collection::vec(0.0f64..1e6, 1..100)) {
        let n = normalize(&TraceSeries::new(SeriesLabel::Wind, 1800.0, v.clone()));
        prop_assert!(n.values.iter().all(|x| (0.0..=1.0).contains(x)));
        if v.iter().any(|&x| x > 0.0) {
            prop_assert_eq!(n.max(), 1.0);
        }
    }

    #[test]
    fn workload_split_adds_up(total in any::<u32>(), f in 0.0f64..=1.0) {
        let w = split_workload(total as u64, f).unwrap();
        prop_assert_eq!(w.delay_sensitive + w.delay_tolerant, total as u64);
    }
}
