//! Report emission: one CSV row per run, plus full JSON reports.

use std::io::Write;

use anyhow::Result;
use bfeq::UpdateReport;
use serde::Serialize;

pub const CSV_HEADER: [&str; 9] = ["dataset", "strategy", "|E|", "|Π|", "|E⁻|", "|I|", "ΔI", "D", "T_ms"];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CsvRow {
    #[serde(rename = "dataset")]
    pub dataset: String,
    #[serde(rename = "strategy")]
    pub strategy: String,
    #[serde(rename = "|E|")]
    pub explicit: usize,
    #[serde(rename = "|Π|")]
    pub rules: usize,
    #[serde(rename = "|E⁻|")]
    pub deletions: usize,
    /// Stored facts after the update.
    #[serde(rename = "|I|")]
    pub facts: usize,
    /// Net change in stored facts.
    #[serde(rename = "ΔI")]
    pub delta: i64,
    #[serde(rename = "D")]
    pub derivations: u64,
    #[serde(rename = "T_ms")]
    pub wall_ms: f64,
}

impl CsvRow {
    pub fn new(dataset: &str, explicit: usize, rules: usize, report: &UpdateReport) -> CsvRow {
        CsvRow {
            dataset: dataset.to_string(),
            strategy: report.strategy.clone(),
            explicit,
            rules,
            deletions: report.requested,
            facts: report.facts_after,
            delta: report.facts_after as i64 - report.facts_before as i64,
            derivations: report.total_derivations,
            wall_ms: (report.wall_ms * 1e3).round() / 1e3,
        }
    }
}

/// Writes `rows` as CSV with the fixed header.
pub fn write_csv<W: Write>(out: W, rows: &[CsvRow]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(CSV_HEADER)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_comes_first_even_without_rows() {
        let mut buf = Vec::new();
        write_csv(&mut buf, &[]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "dataset,strategy,|E|,|Π|,|E⁻|,|I|,ΔI,D,T_ms\n");
    }

    #[test]
    fn rows_follow_the_header_order() {
        let report = UpdateReport {
            strategy: "bfeq".into(),
            requested: 1,
            facts_before: 5,
            facts_after: 8,
            total_derivations: 12,
            wall_ms: 0.25,
            ..Default::default()
        };
        let mut buf = Vec::new();
        write_csv(&mut buf, &[CsvRow::new("ex", 3, 2, &report)]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().nth(1), Some("ex,bfeq,3,2,1,8,3,12,0.25"));
    }
}
