//! Report files and the slack summary.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use crate::config::Kind;

/// Worst slack of one report, with whether it passed its tolerance
/// (`-1e-9` exact, `-3 SE` Monte Carlo).
#[derive(Debug, Clone, PartialEq)]
pub struct SlackEntry {
    pub theorem: String,
    /// Sort key; instance number or grid index.
    pub id: usize,
    pub label: String,
    pub min_slack: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, Default)]
pub struct RunOutcome {
    /// File name and contents.
    pub files: Vec<(String, String)>,
    pub slacks: Vec<SlackEntry>,
    /// Constants worth reporting, in insertion order.
    pub notes: Vec<(String, f64)>,
    /// Reports that could not be produced because a hypothesis failed.
    pub inapplicable: Vec<(usize, String)>,
}

impl RunOutcome {
    pub fn note(&mut self, key: &str, value: f64) {
        self.notes.push((key.to_string(), value));
    }

    pub fn violated(&self) -> bool {
        self.slacks.iter().any(|s| !s.holds)
    }

    pub fn status(&self) -> &'static str {
        if !self.inapplicable.is_empty() {
            "hypothesis-violation"
        } else if self.violated() {
            "bound-violation"
        } else {
            "ok"
        }
    }

    pub fn summary(&self, kind: Kind, seed: u64) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "kind: {}", kind.name());
        let _ = writeln!(out, "seed: {seed}");
        let _ = writeln!(out, "status: {}", self.status());
        let _ = writeln!(out, "reports: {}", self.files.len());

        let mut by_theorem: BTreeMap<&str, Vec<&SlackEntry>> = BTreeMap::new();
        for s in &self.slacks {
            by_theorem.entry(&s.theorem).or_default().push(s);
        }
        for (theorem, mut entries) in by_theorem {
            entries.sort_by_key(|e| e.id);
            let worst = entries
                .iter()
                .min_by(|a, b| a.min_slack.total_cmp(&b.min_slack))
                .expect("non-empty group");
            let failed = entries.iter().filter(|e| !e.holds).count();
            let _ = writeln!(
                out,
                "min slack {theorem}: {} (at {}; {} reports, {failed} violated)",
                worst.min_slack,
                worst.label,
                entries.len()
            );
        }
        for (k, v) in &self.notes {
            let _ = writeln!(out, "{k}: {v}");
        }
        let mut inapplicable = self.inapplicable.clone();
        inapplicable.sort();
        for (_, msg) in inapplicable {
            let _ = writeln!(out, "inapplicable: {msg}");
        }
        out
    }
}

/// Writes through a temporary file in the same directory and renames it
/// into place, so readers never see a partial file.
pub fn write_atomic(dir: &Path, name: &str, contents: &str) -> std::io::Result<()> {
    let tmp = dir.join(format!(".{name}.tmp{}", std::process::id()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents.as_bytes())?;
        f.sync_all()?;
    }
    fs::rename(&tmp, dir.join(name))
}

pub fn write_all(dir: &Path, outcome: &RunOutcome, summary: &str) -> std::io::Result<()> {
    fs::create_dir_all(dir)?;
    for (name, contents) in &outcome.files {
        write_atomic(dir, name, contents)?;
    }
    write_atomic(dir, "summary.txt", summary)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entry(theorem: &str, id: usize, min_slack: f64, holds: bool) -> SlackEntry {
        SlackEntry {
            theorem: theorem.into(),
            id,
            label: format!("#{id}"),
            min_slack,
            holds,
        }
    }

    #[test]
    fn summary_is_order_independent() {
        let mut a = RunOutcome {
            slacks: vec![
                entry("b", 1, 0.5, true),
                entry("a", 0, 0.25, true),
                entry("b", 0, 0.125, true),
            ],
            ..RunOutcome::default()
        };
        let mut b = a.clone();
        b.slacks.reverse();
        assert_eq!(a.summary(Kind::Ar1, 3), b.summary(Kind::Ar1, 3));
        assert!(a
            .summary(Kind::Ar1, 3)
            .contains("min slack b: 0.125 (at #0; 2 reports, 0 violated)"));
        assert_eq!(a.status(), "ok");
        a.slacks.push(entry("a", 2, -1.0, false));
        assert_eq!(a.status(), "bound-violation");
        a.inapplicable.push((0, "x".into()));
        assert_eq!(a.status(), "hypothesis-violation");
    }

    #[test]
    fn atomic_write_leaves_no_temp_file() {
        let dir = tempfile::tempdir().unwrap();
        write_atomic(dir.path(), "x.csv", "a\n").unwrap();
        write_atomic(dir.path(), "x.csv", "b\n").unwrap();
        assert_eq!(fs::read_to_string(dir.path().join("x.csv")).unwrap(), "b\n");
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
