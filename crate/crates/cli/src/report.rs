//! Versioned JSON reports, their fingerprints, and the CSV series.

use std::path::Path;
use std::time::Duration;

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};
use treefpp::fpp::{Bound, FppSeries};

use crate::{CliResult, Outcome};

pub const SCHEMA: &str = "treefpp/1";

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema: &'static str,
    pub tool_version: &'static str,
    pub command: &'static str,
    pub config: Value,
    pub group: Option<Value>,
    pub results: Value,
    pub inconclusive: bool,
    pub timing_ms: u64,
    /// Hex SHA-256 of the serialized `results`.
    pub fingerprint: String,
    #[serde(skip)]
    pub series: Option<FppSeries>,
}

/// Hex SHA-256 of the compact JSON serialization of `results`.
pub fn fingerprint(results: &Value) -> CliResult<String> {
    let bytes = serde_json::to_vec(results)?;
    Ok(Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect())
}

impl Report {
    pub fn new(command: &'static str, config: Value, outcome: Outcome, elapsed: Duration) -> CliResult<Self> {
        Ok(Report {
            schema: SCHEMA,
            tool_version: env!("CARGO_PKG_VERSION"),
            command,
            config,
            group: outcome.group,
            fingerprint: fingerprint(&outcome.results)?,
            results: outcome.results,
            inconclusive: outcome.inconclusive,
            timing_ms: elapsed.as_millis() as u64,
            series: outcome.series,
        })
    }
}

pub const CSV_HEADER: [&str; 10] = [
    "level",
    "provenance",
    "exact_num",
    "exact_den",
    "mc_estimate",
    "mc_stderr",
    "samples",
    "quotient_order",
    "enclosure_lo",
    "enclosure_hi",
];

pub fn write_csv(path: &Path, series: &FppSeries) -> CliResult<()> {
    let mut w = csv::Writer::from_path(path)?;
    write_csv_to(&mut w, series)?;
    w.flush()?;
    Ok(())
}

pub fn write_csv_to<W: std::io::Write>(w: &mut csv::Writer<W>, series: &FppSeries) -> CliResult<()> {
    w.write_record(CSV_HEADER)?;
    let opt = |v: Option<String>| v.unwrap_or_default();
    for e in &series.entries {
        let provenance = serde_json::to_value(e.provenance)?;
        let (lo, hi) = match &e.enclosure {
            Some(Bound::Enclosure { lo, hi }) => (Some(lo.to_string()), Some(hi.to_string())),
            _ => (None, None),
        };
        w.write_record([
            e.level.to_string(),
            provenance.as_str().unwrap_or_default().to_string(),
            opt(e.exact.as_ref().map(|x| x.numer().to_string())),
            opt(e.exact.as_ref().map(|x| x.denom().to_string())),
            opt(e.mc.map(|m| m.estimate.to_string())),
            opt(e.mc.map(|m| m.std_error.to_string())),
            opt(e.mc.map(|m| m.samples.to_string())),
            opt(e.quotient_order.map(|q| q.to_string())),
            opt(lo),
            opt(hi),
        ])?;
    }
    Ok(())
}
