use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use super::{SavingsPoint, SlotRecord};
use crate::error::Result;

/// Column order of `report.csv`.
pub const REPORT_COLUMNS: [&str; 38] = [
    "slot",
    "load_a_bits",
    "load_b_bits",
    "offered_sensitive_bits",
    "gamma_star_bits",
    "processed_bits",
    "dequeued_bits",
    "q_in_bits",
    "q_out_bits",
    "sigma",
    "zeta",
    "containers",
    "rate_mbps",
    "drivers",
    "delta_nic",
    "theta_comm_j",
    "theta_cp_j",
    "theta_sw_j",
    "theta_of_j",
    "theta_lk_j",
    "theta_ls_j",
    "theta_ch_j",
    "theta_comp_j",
    "theta_site_j",
    "solar_j",
    "wind_j",
    "harvest_j",
    "source",
    "battery_before_j",
    "battery_after_j",
    "level",
    "cost",
    "expected_cost",
    "slot_delay_s",
    "path_delay_s",
    "emergency",
    "fallback",
    "savings_percent",
];

/// Writes slot records as CSV rows, flushing each row so partial runs can
/// be inspected.
pub struct ReportWriter<W: Write> {
    out: csv::Writer<W>,
    baseline_j: f64,
}

impl ReportWriter<BufWriter<File>> {
    pub fn create(path: &Path, baseline_j: f64) -> Result<Self> {
        ReportWriter::new(BufWriter::new(File::create(path)?), baseline_j)
    }
}

impl<W: Write> ReportWriter<W> {
    pub fn new(inner: W, baseline_j: f64) -> Result<Self> {
        let mut out = csv::Writer::from_writer(inner);
        out.write_record(REPORT_COLUMNS)?;
        Ok(ReportWriter { out, baseline_j })
    }

    pub fn write(&mut self, r: &SlotRecord) -> Result<()> {
        let e = &r.energy;
        let flag = |b: bool| if b { "1" } else { "0" }.to_string();
        let level = serde_json::to_value(r.level)?.as_str().unwrap_or_default().to_string();
        let row = [
            r.slot.to_string(),
            r.load_a.to_string(),
            r.load_b.to_string(),
            r.offered_sensitive.to_string(),
            r.gamma_star.to_string(),
            r.processed.to_string(),
            r.dequeued.to_string(),
            r.q_in.to_string(),
            r.q_out.to_string(),
            flag(r.sigma),
            r.zeta.to_string(),
            r.containers.to_string(),
            r.rate_mbps.to_string(),
            r.drivers.to_string(),
            flag(r.delta_nic),
            e.comm.to_string(),
            e.cp.to_string(),
            e.sw.to_string(),
            e.of.to_string(),
            e.lk.to_string(),
            e.ls.to_string(),
            e.ch.to_string(),
            e.comp.to_string(),
            e.site.to_string(),
            r.solar_j.to_string(),
            r.wind_j.to_string(),
            r.harvest_j.to_string(),
            r.source.as_str().to_string(),
            r.battery_before_j.to_string(),
            r.battery_after_j.to_string(),
            level,
            r.cost.to_string(),
            r.expected_cost.to_string(),
            r.slot_delay_s.to_string(),
            r.path_delay_s.to_string(),
            flag(r.emergency),
            flag(r.fallback),
            (100.0 * (1.0 - e.site / self.baseline_j)).to_string(),
        ];
        self.out.write_record(&row)?;
        self.out.flush()?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<()> {
        self.out.flush()?;
        Ok(())
    }
}

pub fn write_report_csv(path: &Path, records: &[SlotRecord], baseline_j: f64) -> Result<()> {
    let mut w = ReportWriter::create(path, baseline_j)?;
    for r in records {
        w.write(r)?;
    }
    w.finish()
}

/// Savings curve with columns `n_users,drc_rs_savings,rrm_savings`.
pub fn write_savings_csv(path: &Path, points: &[SavingsPoint]) -> Result<()> {
    let mut out = csv::Writer::from_path(path)?;
    out.write_record(["n_users", "drc_rs_savings", "rrm_savings"])?;
    for p in points {
        out.write_record([p.n_users.to_string(), format!("{:.6}", p.drc_rs), format!("{:.6}", p.rrm)])?;
    }
    out.flush()?;
    Ok(())
}
