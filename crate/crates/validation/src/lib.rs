//! Verdict lines for the acceptance run.

use std::fmt;
use std::io::Write;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    /// Reported but not gating.
    Info,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Info => "INFO",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub id: String,
    pub status: Status,
    pub detail: String,
}

impl Verdict {
    pub fn gate(id: impl Into<String>, pass: bool, detail: impl Into<String>) -> Self {
        let status = if pass { Status::Pass } else { Status::Fail };
        Self { id: id.into(), status, detail: detail.into() }
    }

    pub fn info(id: impl Into<String>, detail: impl Into<String>) -> Self {
        Self { id: id.into(), status: Status::Info, detail: detail.into() }
    }

    pub fn line(&self) -> String {
        format!("{} {}: {}", self.status, self.id, self.detail)
    }
}

/// Writes one line per verdict straight to stdout and flushes.
pub fn emit(v: &Verdict) {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{}", v.line());
    let _ = out.flush();
}

/// Number of gating failures.
pub fn failures(all: &[Verdict]) -> usize {
    all.iter().filter(|v| v.status == Status::Fail).count()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lines_and_counts() {
        let all = [
            Verdict::gate("criterion 1", true, "ok"),
            Verdict::gate("criterion 2", false, "no"),
            Verdict::info("note", "x"),
        ];
        assert_eq!(all[0].line(), "PASS criterion 1: ok");
        assert_eq!(all[1].line(), "FAIL criterion 2: no");
        assert_eq!(all[2].line(), "INFO note: x");
        assert_eq!(failures(&all), 1);
    }
}
