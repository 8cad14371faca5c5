//! Per-level verification reports.

use std::fmt;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail(String),
    Unverifiable(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckResult {
    pub level: usize,
    pub hypothesis: String,
    pub status: Status,
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.status {
            Status::Pass => write!(f, "level {} {}: PASS", self.level, self.hypothesis),
            Status::Fail(d) => write!(f, "level {} {}: FAIL {d}", self.level, self.hypothesis),
            Status::Unverifiable(d) => {
                write!(
                    f,
                    "level {} {}: UNVERIFIABLE {d}",
                    self.level, self.hypothesis
                )
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct VerifyReport {
    pub checks: Vec<CheckResult>,
    /// Summary lines such as `rank: exactly 3`.
    pub certificates: Vec<String>,
}

impl VerifyReport {
    pub fn push(&mut self, level: usize, hypothesis: &str, status: Status) {
        self.checks.push(CheckResult {
            level,
            hypothesis: hypothesis.to_string(),
            status,
        });
    }

    /// Records a pass, or a failure with the detail produced by `detail`.
    pub fn check(
        &mut self,
        level: usize,
        hypothesis: &str,
        ok: bool,
        detail: impl FnOnce() -> String,
    ) {
        let status = if ok {
            Status::Pass
        } else {
            Status::Fail(detail())
        };
        self.push(level, hypothesis, status);
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.status == Status::Pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks
            .iter()
            .filter(|c| matches!(c.status, Status::Fail(_)))
    }

    pub fn first_failure(&self) -> Option<&CheckResult> {
        self.failures().next()
    }

    pub fn unverifiable(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks
            .iter()
            .filter(|c| matches!(c.status, Status::Unverifiable(_)))
    }

    /// Whether the check `hypothesis` passed at `level`.
    pub fn passed(&self, level: usize, hypothesis: &str) -> bool {
        let mut found = false;
        for c in &self.checks {
            if c.level == level && c.hypothesis == hypothesis {
                if c.status != Status::Pass {
                    return false;
                }
                found = true;
            }
        }
        found
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "{c}")?;
        }
        for c in &self.certificates {
            writeln!(f, "{c}")?;
        }
        let failed = self.failures().count();
        let unverifiable = self.unverifiable().count();
        writeln!(
            f,
            "summary: {} checks, {} failed, {} unverifiable",
            self.checks.len(),
            failed,
            unverifiable
        )
    }
}
