//! Verdicts and reports.

use std::fmt::Write as _;

use crate::coding::Nat;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail { witness: Nat },
    Inconclusive,
}

impl Verdict {
    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail { .. } => "fail",
            Verdict::Inconclusive => "inconclusive",
        }
    }

    pub fn is_fail(&self) -> bool {
        matches!(self, Verdict::Fail { .. })
    }

    /// The first failure wins; otherwise any inconclusive part makes the
    /// whole inconclusive.
    pub fn and(self, other: Verdict) -> Verdict {
        match (self, other) {
            (f @ Verdict::Fail { .. }, _) | (_, f @ Verdict::Fail { .. }) => f,
            (Verdict::Inconclusive, _) | (_, Verdict::Inconclusive) => Verdict::Inconclusive,
            _ => Verdict::Pass,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Check {
    pub name: String,
    pub verdict: Verdict,
}

impl Check {
    pub fn new(name: impl Into<String>, verdict: Verdict) -> Self {
        Check { name: name.into(), verdict }
    }

    pub fn line(&self) -> String {
        match &self.verdict {
            Verdict::Fail { witness } => format!("CHECK {} fail witness={witness}", self.name),
            v => format!("CHECK {} {}", self.name, v.label()),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Report {
    pub title: String,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
}

impl Report {
    pub fn new(title: impl Into<String>) -> Self {
        Report { title: title.into(), ..Default::default() }
    }

    pub fn push(&mut self, name: impl Into<String>, verdict: Verdict) {
        self.checks.push(Check::new(name, verdict));
    }

    pub fn note(&mut self, note: impl Into<String>) {
        self.notes.push(note.into());
    }

    /// Appends another report's checks under a name prefix.
    pub fn absorb(&mut self, prefix: &str, other: Report) {
        for c in other.checks {
            self.checks.push(Check::new(format!("{prefix}{}", c.name), c.verdict));
        }
        self.notes.extend(other.notes);
    }

    pub fn count(&self, label: &str) -> usize {
        self.checks.iter().filter(|c| c.verdict.label() == label).count()
    }

    pub fn has_failure(&self) -> bool {
        self.checks.iter().any(|c| c.verdict.is_fail())
    }

    pub fn get(&self, name: &str) -> Option<&Verdict> {
        self.checks.iter().find(|c| c.name == name).map(|c| &c.verdict)
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "REPORT {}", self.title);
        for n in &self.notes {
            let _ = writeln!(out, "NOTE {n}");
        }
        for c in &self.checks {
            let _ = writeln!(out, "{}", c.line());
        }
        let _ = writeln!(
            out,
            "SUMMARY pass={} fail={} inconclusive={}",
            self.count("pass"),
            self.count("fail"),
            self.count("inconclusive")
        );
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coding::nat;

    #[test]
    fn lines_and_summary() {
        let mut r = Report::new("demo");
        r.push("a", Verdict::Pass);
        r.push("b", Verdict::Fail { witness: nat(7) });
        r.push("c", Verdict::Inconclusive);
        let text = r.render_text();
        assert!(text.contains("CHECK b fail witness=7\n"));
        assert!(text.ends_with("SUMMARY pass=1 fail=1 inconclusive=1\n"));
        assert!(r.has_failure());
    }

    #[test]
    fn combining_verdicts() {
        assert_eq!(Verdict::Pass.and(Verdict::Inconclusive), Verdict::Inconclusive);
        assert!(Verdict::Inconclusive.and(Verdict::Fail { witness: nat(1) }).is_fail());
        assert_eq!(Verdict::Pass.and(Verdict::Pass), Verdict::Pass);
    }
}
