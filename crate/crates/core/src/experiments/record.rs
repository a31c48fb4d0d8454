//! One sweep point as a CSV row.
//!
//! Floats are written with Rust's shortest round-trip formatting, so a row
//! parses back to the identical record. Per-message lists are joined by `;`.
//! The wall time is the last column so determinism checks can drop it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub n: usize,
    #[serde(rename = "T")]
    pub delay: usize,
    pub t: f64,
    #[serde(rename = "M")]
    pub m: u32,
    pub log2_m_target: f64,
    pub log2_m_realized: f64,
    pub infeasible: bool,
    #[serde(rename = "S")]
    pub streams: usize,
    pub trials: u64,
    pub errors: Vec<u64>,
    pub eps_hat: Vec<f64>,
    pub ci_lo: Vec<f64>,
    pub ci_hi: Vec<f64>,
    /// One-based index of the message with the largest error estimate.
    pub max_k: usize,
    pub max_eps_hat: f64,
    pub max_ci_lo: f64,
    pub max_ci_hi: f64,
    pub md_constant: f64,
    pub md_censored: bool,
    pub seed: u64,
    pub wall_time_s: f64,
}

const HEADER: [&str; COLUMNS] = [
    "n",
    "T",
    "t",
    "M",
    "log2_m_target",
    "log2_m_realized",
    "infeasible",
    "S",
    "trials",
    "errors",
    "eps_hat",
    "ci_lo",
    "ci_hi",
    "max_k",
    "max_eps_hat",
    "max_ci_lo",
    "max_ci_hi",
    "md_constant",
    "md_censored",
    "seed",
    "wall_time_s",
];

const COLUMNS: usize = 21;

fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(";")
}

fn split<T: std::str::FromStr>(s: &str, column: &str) -> Result<Vec<T>> {
    if s.is_empty() {
        return Ok(Vec::new());
    }
    s.split(';').map(|x| parse(x, column)).collect()
}

fn parse<T: std::str::FromStr>(s: &str, column: &str) -> Result<T> {
    s.parse().map_err(|_| Error::Parse(format!("column {column}: cannot parse {s:?}")))
}

impl RunRecord {
    pub fn header() -> &'static [&'static str] {
        &HEADER
    }

    pub fn to_row(&self) -> Vec<String> {
        vec![
            self.n.to_string(),
            self.delay.to_string(),
            self.t.to_string(),
            self.m.to_string(),
            self.log2_m_target.to_string(),
            self.log2_m_realized.to_string(),
            self.infeasible.to_string(),
            self.streams.to_string(),
            self.trials.to_string(),
            join(&self.errors),
            join(&self.eps_hat),
            join(&self.ci_lo),
            join(&self.ci_hi),
            self.max_k.to_string(),
            self.max_eps_hat.to_string(),
            self.max_ci_lo.to_string(),
            self.max_ci_hi.to_string(),
            self.md_constant.to_string(),
            self.md_censored.to_string(),
            self.seed.to_string(),
            self.wall_time_s.to_string(),
        ]
    }

    pub fn from_row(row: &csv::StringRecord) -> Result<Self> {
        if row.len() != COLUMNS {
            return Err(Error::Parse(format!("expected {COLUMNS} columns, found {}", row.len())));
        }
        let h = Self::header();
        let f = |i: usize| &row[i];
        Ok(RunRecord {
            n: parse(f(0), h[0])?,
            delay: parse(f(1), h[1])?,
            t: parse(f(2), h[2])?,
            m: parse(f(3), h[3])?,
            log2_m_target: parse(f(4), h[4])?,
            log2_m_realized: parse(f(5), h[5])?,
            infeasible: parse(f(6), h[6])?,
            streams: parse(f(7), h[7])?,
            trials: parse(f(8), h[8])?,
            errors: split(f(9), h[9])?,
            eps_hat: split(f(10), h[10])?,
            ci_lo: split(f(11), h[11])?,
            ci_hi: split(f(12), h[12])?,
            max_k: parse(f(13), h[13])?,
            max_eps_hat: parse(f(14), h[14])?,
            max_ci_lo: parse(f(15), h[15])?,
            max_ci_hi: parse(f(16), h[16])?,
            md_constant: parse(f(17), h[17])?,
            md_censored: parse(f(18), h[18])?,
            seed: parse(f(19), h[19])?,
            wall_time_s: parse(f(20), h[20])?,
        })
    }

    /// Reads every record of a sweep CSV.
    pub fn read_all(path: &std::path::Path) -> Result<Vec<RunRecord>> {
        let mut rdr = csv::Reader::from_path(path)?;
        let header = rdr.headers()?.clone();
        if header.iter().collect::<Vec<_>>() != Self::header() {
            return Err(Error::Parse(format!("{} does not have the sweep header", path.display())));
        }
        rdr.records().map(|r| RunRecord::from_row(&r?)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> RunRecord {
        RunRecord {
            n: 40,
            delay: 2,
            t: 0.3,
            m: 110,
            log2_m_target: 6.776_953_112_3,
            log2_m_realized: 110f64.log2(),
            infeasible: false,
            streams: 3,
            trials: 1000,
            errors: vec![0, 3, 17],
            eps_hat: vec![0.0, 0.003, 0.017],
            ci_lo: vec![0.0, 0.000_618_7, 0.009_934_1],
            ci_hi: vec![0.003_682, 0.008_742_3, 0.027_094],
            max_k: 3,
            max_eps_hat: 0.017,
            max_ci_lo: 0.009_934_1,
            max_ci_hi: 0.027_094,
            md_constant: 1.0 / 3.0,
            md_censored: false,
            seed: u64::MAX - 5,
            wall_time_s: 0.1 + 0.2,
        }
    }

    #[test]
    fn csv_round_trip_is_identity() {
        let rec = sample();
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(RunRecord::header()).unwrap();
        w.write_record(rec.to_row()).unwrap();
        let bytes = w.into_inner().unwrap();
        let mut r = csv::Reader::from_reader(bytes.as_slice());
        let back = RunRecord::from_row(&r.records().next().unwrap().unwrap()).unwrap();
        assert_eq!(back, rec);
    }

    #[test]
    fn malformed_rows_are_rejected() {
        let row = csv::StringRecord::from(vec!["1", "2"]);
        assert!(RunRecord::from_row(&row).is_err());
        let mut fields = sample().to_row();
        fields[9] = "1;x".into();
        assert!(RunRecord::from_row(&csv::StringRecord::from(fields)).is_err());
    }
}
