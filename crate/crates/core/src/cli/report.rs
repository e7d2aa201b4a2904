//! Diagnostics report: one summary line per check, CSV sections, timings.
//!
//! `report.txt` and the CSV files are a pure function of the config and
//! seed. Wall-clock timings go to `timings.txt` so that determinism can be
//! checked byte for byte on everything else.

use std::fmt;
use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::Path;
use std::time::Duration;

use crate::semigroup::Decision;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    Inconclusive,
}

impl Status {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }

    pub fn from_decision(d: Decision) -> Self {
        match d {
            Decision::Integrable => Status::Pass,
            Decision::NotIntegrable => Status::Fail,
            Decision::Inconclusive => Status::Inconclusive,
        }
    }

    pub fn combine(self, other: Status) -> Status {
        use Status::*;
        match (self, other) {
            (Fail, _) | (_, Fail) => Fail,
            (Inconclusive, _) | (_, Inconclusive) => Inconclusive,
            _ => Pass,
        }
    }

    /// Process exit code: 0 pass, 1 fail, 2 inconclusive.
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Pass => 0,
            Status::Fail => 1,
            Status::Inconclusive => 2,
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckRecord {
    pub name: String,
    pub status: Status,
    pub statistic: f64,
    pub threshold: f64,
    pub note: Option<String>,
}

impl CheckRecord {
    pub fn new(name: impl Into<String>, status: Status, statistic: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            status,
            statistic,
            threshold,
            note: None,
        }
    }

    /// Passes iff `statistic ≤ threshold`.
    pub fn at_most(name: impl Into<String>, statistic: f64, threshold: f64) -> Self {
        Self::new(name, Status::from_bool(statistic <= threshold), statistic, threshold)
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

/// A CSV file written next to the report.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvSection {
    pub file_name: String,
    pub header: String,
    pub rows: Vec<String>,
}

impl CsvSection {
    pub fn new(file_name: impl Into<String>, header: impl Into<String>) -> Self {
        Self {
            file_name: file_name.into(),
            header: header.into(),
            rows: Vec::new(),
        }
    }
}

/// 17 significant digits; empty for NaN so absent thresholds stay blank.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        String::new()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.16e}")
    }
}

#[derive(Debug, Clone, Default)]
pub struct DiagnosticsReport {
    pub command: String,
    pub config_echo: String,
    pub records: Vec<CheckRecord>,
    pub sections: Vec<CsvSection>,
    pub timings: Vec<(String, Duration)>,
}

impl DiagnosticsReport {
    pub fn new(command: impl Into<String>, config_echo: impl Into<String>) -> Self {
        Self {
            command: command.into(),
            config_echo: config_echo.into(),
            ..Default::default()
        }
    }

    pub fn push(&mut self, record: CheckRecord) {
        self.records.push(record);
    }

    /// Appends rows to the section for `file_name`, creating it if needed.
    pub fn section(&mut self, file_name: &str, header: &str) -> &mut CsvSection {
        if let Some(i) = self.sections.iter().position(|s| s.file_name == file_name) {
            return &mut self.sections[i];
        }
        self.sections.push(CsvSection::new(file_name, header));
        self.sections.last_mut().unwrap()
    }

    pub fn time(&mut self, label: impl Into<String>, elapsed: Duration) {
        self.timings.push((label.into(), elapsed));
    }

    pub fn merge(&mut self, other: DiagnosticsReport) {
        self.records.extend(other.records);
        for s in other.sections {
            let target = self.section(&s.file_name, &s.header);
            target.rows.extend(s.rows);
        }
        self.timings.extend(other.timings);
    }

    pub fn overall(&self) -> Status {
        self.records.iter().fold(Status::Pass, |acc, r| acc.combine(r.status))
    }

    pub fn summary(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("# command={}\n", self.command));
        out.push_str(&format!("# config={}\n", self.config_echo));
        out.push_str("check_name,status,statistic,threshold\n");
        for r in &self.records {
            out.push_str(&format!("{},{},{},{}\n", r.name, r.status, num(r.statistic), num(r.threshold)));
        }
        out.push_str(&format!("overall,{},,\n", self.overall()));
        for r in self.records.iter().filter(|r| r.note.is_some()) {
            out.push_str(&format!("# {}: {}\n", r.name, r.note.as_deref().unwrap()));
        }
        out
    }

    /// Writes `report.txt`, `timings.txt` and every CSV section into `dir`.
    pub fn write(&self, dir: &Path) -> io::Result<()> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("report.txt"), self.summary())?;
        for s in &self.sections {
            let mut w = BufWriter::new(fs::File::create(dir.join(&s.file_name))?);
            writeln!(w, "{}", s.header)?;
            for row in &s.rows {
                writeln!(w, "{row}")?;
            }
            w.flush()?;
        }
        let mut t = String::from("label,seconds\n");
        for (label, d) in &self.timings {
            t.push_str(&format!("{label},{:.6}\n", d.as_secs_f64()));
        }
        fs::write(dir.join("timings.txt"), t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overall_status_and_exit_codes() {
        let mut r = DiagnosticsReport::new("verify", "{}");
        assert_eq!(r.overall(), Status::Pass);
        r.push(CheckRecord::at_most("a", 0.1, 0.2));
        r.push(CheckRecord::new("b", Status::Inconclusive, 1.0, f64::NAN));
        assert_eq!(r.overall().exit_code(), 2);
        r.push(CheckRecord::at_most("c", 0.3, 0.2));
        assert_eq!(r.overall().exit_code(), 1);
    }

    #[test]
    fn summary_format() {
        let mut r = DiagnosticsReport::new("check", "{\"seed\":1}");
        r.push(CheckRecord::at_most("cf", 0.125, 0.02).with_note("detail"));
        let s = r.summary();
        assert!(s.contains("\ncf,fail,1.2500000000000000e-1,2.0000000000000000e-2\n"), "{s}");
        assert!(s.contains("overall,fail,,\n"));
        assert!(s.ends_with("# cf: detail\n"));
        assert_eq!(num(f64::NAN), "");
    }

    #[test]
    fn writes_files() {
        let dir = tempfile::tempdir().unwrap();
        let mut r = DiagnosticsReport::new("verify", "{}");
        r.section("x.csv", "a,b").rows.push("1,2".into());
        r.time("x", Duration::from_millis(5));
        r.write(dir.path()).unwrap();
        assert_eq!(fs::read_to_string(dir.path().join("x.csv")).unwrap(), "a,b\n1,2\n");
        assert!(dir.path().join("timings.txt").exists());
    }
}
