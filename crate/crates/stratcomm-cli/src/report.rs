//! Results of checks and how they are written out.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;
use stratcomm::engine::{GameOutcome, RateEstimate};
use stratcomm::rational::{format_rational, format_real, int, to_f64, Rat};

use crate::error::CliResult;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self { name: name.into(), passed, detail: detail.into() }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub name: String,
    pub passed: bool,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn new(name: impl Into<String>, checks: Vec<Check>) -> Self {
        Self { name: name.into(), passed: checks.iter().all(|c| c.passed), checks }
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }

    /// One `PASS`/`FAIL` line per check.
    pub fn summary(&self) -> String {
        let mut s = String::new();
        for c in &self.checks {
            s.push_str(&format!("{} {}/{}: {}\n", if c.passed { "PASS" } else { "FAIL" }, self.name, c.name, c.detail));
        }
        s
    }
}

pub const CSV_COLUMNS: [&str; 9] = [
    "n",
    "strategy_id",
    "engine",
    "recovered_prob_strategic",
    "recovered_prob_cooperative",
    "error_prob",
    "rate_bits",
    "image_rate_bits",
    "recovered_prob_exact",
];

/// One evaluated decoder.
#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub n: usize,
    pub strategy_id: String,
    pub engine: String,
    pub strategic: Rat,
    pub cooperative: Rat,
    pub rate: RateEstimate,
    pub image_rate: RateEstimate,
}

impl Row {
    pub fn new(strategy_id: impl Into<String>, out: &GameOutcome) -> Self {
        Self {
            n: out.n,
            strategy_id: strategy_id.into(),
            engine: out.engine.to_string(),
            strategic: out.recovered_prob.clone(),
            cooperative: out.coop_recovered_prob.clone(),
            rate: out.rate(),
            image_rate: out.image_rate(),
        }
    }

    fn record(&self) -> [String; 9] {
        [
            self.n.to_string(),
            self.strategy_id.clone(),
            self.engine.clone(),
            format_real(to_f64(&self.strategic)),
            format_real(to_f64(&self.cooperative)),
            format_real(to_f64(&(int(1) - &self.strategic))),
            self.rate.to_string(),
            self.image_rate.to_string(),
            format_rational(&self.strategic),
        ]
    }
}

/// `# config:` lines, a header and one record per row, LF-terminated.
pub fn render_csv(echo: &[String], rows: &[Row]) -> CliResult<String> {
    let mut buf: Vec<u8> = Vec::new();
    for line in echo {
        writeln!(buf, "# config: {line}")?;
    }
    {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(&mut buf);
        w.write_record(CSV_COLUMNS)?;
        for r in rows {
            w.write_record(r.record())?;
        }
        w.flush()?;
    }
    Ok(String::from_utf8(buf).expect("csv output is utf-8"))
}

/// Pretty JSON with a trailing newline.
pub fn render_json<T: Serialize>(value: &T) -> CliResult<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

/// Writes to `out`, or to standard output when no path is given.
pub fn emit(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(p) => fs::write(p, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}
