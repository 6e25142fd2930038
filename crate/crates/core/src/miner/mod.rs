//! Commit-history mining.
//!
//! A history is read from a textual name-status log (one `commit <sha>` header
//! followed by `A`/`D`/`M`/`R<score>` records, oldest commit first). A commit
//! migrates a file when it removes `X.java` and adds `X.kt` with the same
//! file stem; directories may differ.

mod git;

pub use git::{git_name_status_log, GitError};
pub(crate) use git::run_git as git_run;

use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MineError {
    #[error("malformed log at line {0}")]
    MalformedLog(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ChangeStatus {
    Added,
    Deleted,
    Modified,
    Renamed,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChangeRecord {
    pub status: ChangeStatus,
    pub path: String,
    /// Source path of a rename; `Some` iff `status == Renamed`.
    pub old_path: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommitDelta {
    pub sha: String,
    /// 1-based position in the history, oldest first.
    pub ordinal: usize,
    pub changes: Vec<ChangeRecord>,
}

impl CommitDelta {
    /// Paths removed by this commit, rename sources included.
    pub fn removed_paths(&self) -> impl Iterator<Item = &str> {
        self.changes.iter().filter_map(|c| match c.status {
            ChangeStatus::Deleted => Some(c.path.as_str()),
            ChangeStatus::Renamed => c.old_path.as_deref(),
            _ => None,
        })
    }

    /// Paths introduced by this commit, rename targets included.
    pub fn added_paths(&self) -> impl Iterator<Item = &str> {
        self.changes.iter().filter_map(|c| match c.status {
            ChangeStatus::Added | ChangeStatus::Renamed => Some(c.path.as_str()),
            _ => None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MigrationPair {
    pub java: String,
    pub kotlin: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MigrationEvent {
    pub sha: String,
    pub pairs: Vec<MigrationPair>,
    /// Set when some stem had more than one candidate on either side.
    pub ambiguous: bool,
}

impl MigrationEvent {
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("migration events always serialize")
    }

    pub fn is_migrated(&self, java_path: &str) -> bool {
        self.pairs.iter().any(|p| p.java == java_path)
    }
}

/// Number of migration commits keyed by how many files each one migrated.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MigrationHistogram(pub BTreeMap<usize, usize>);

impl MigrationHistogram {
    pub fn total_commits(&self) -> usize {
        self.0.values().sum()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("files_migrated,commits\n");
        for (files, commits) in &self.0 {
            out.push_str(&format!("{files},{commits}\n"));
        }
        out
    }
}

/// Parses a name-status log into commit deltas, assigning ordinals in input
/// order. Empty input yields no deltas.
pub fn parse_name_status_log(text: &str) -> Result<Vec<CommitDelta>, MineError> {
    let mut deltas: Vec<CommitDelta> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if line.trim().is_empty() {
            continue;
        }
        if let Some(sha) = line.strip_prefix("commit ") {
            let sha = sha.trim();
            if sha.is_empty() || !sha.chars().all(|c| c.is_ascii_hexdigit()) {
                return Err(MineError::MalformedLog(line_no));
            }
            deltas.push(CommitDelta {
                sha: sha.to_string(),
                ordinal: deltas.len() + 1,
                changes: Vec::new(),
            });
            continue;
        }
        let record = parse_record(line).ok_or(MineError::MalformedLog(line_no))?;
        let current = deltas.last_mut().ok_or(MineError::MalformedLog(line_no))?;
        let duplicate = current
            .changes
            .iter()
            .any(|c| c.status == record.status && c.path == record.path);
        if !duplicate {
            current.changes.push(record);
        }
    }
    Ok(deltas)
}

fn parse_record(line: &str) -> Option<ChangeRecord> {
    let mut fields = line.split('\t');
    let status = fields.next()?;
    let valid_path = |p: &str| !p.is_empty() && !p.contains('\\');
    let record = match status {
        "A" | "D" | "M" => {
            let path = fields.next()?;
            if !valid_path(path) || fields.next().is_some() {
                return None;
            }
            let status = match status {
                "A" => ChangeStatus::Added,
                "D" => ChangeStatus::Deleted,
                _ => ChangeStatus::Modified,
            };
            ChangeRecord {
                status,
                path: path.to_string(),
                old_path: None,
            }
        }
        s if s.starts_with('R') && s.len() > 1 && s[1..].bytes().all(|b| b.is_ascii_digit()) => {
            let old = fields.next()?;
            let new = fields.next()?;
            if !valid_path(old) || !valid_path(new) || fields.next().is_some() {
                return None;
            }
            ChangeRecord {
                status: ChangeStatus::Renamed,
                path: new.to_string(),
                old_path: Some(old.to_string()),
            }
        }
        _ => return None,
    };
    Some(record)
}

/// File name without directory and without its final extension.
pub fn stem(path: &str) -> &str {
    let name = path.rsplit('/').next().unwrap_or(path);
    match name.rfind('.') {
        Some(dot) if dot > 0 => &name[..dot],
        _ => name,
    }
}

fn parent_dir(path: &str) -> &str {
    path.rfind('/').map_or("", |i| &path[..i])
}

/// Detects Java to Kotlin migrations commit by commit. Commits without a
/// migrated file are omitted.
pub fn detect_migrations(history: &[CommitDelta]) -> Vec<MigrationEvent> {
    history.iter().filter_map(detect_in_commit).collect()
}

fn detect_in_commit(delta: &CommitDelta) -> Option<MigrationEvent> {
    let mut removed_java: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    for path in delta.removed_paths().filter(|p| p.ends_with(".java")) {
        removed_java.entry(stem(path)).or_default().insert(path);
    }
    let mut added_kotlin: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    for path in delta.added_paths().filter(|p| p.ends_with(".kt")) {
        added_kotlin.entry(stem(path)).or_default().insert(path);
    }

    let mut pairs = Vec::new();
    let mut ambiguous = false;
    for (stem, javas) in &removed_java {
        let Some(kotlins) = added_kotlin.get(stem) else {
            continue;
        };
        if javas.len() > 1 || kotlins.len() > 1 {
            ambiguous = true;
        }
        pairs.extend(match_stem_group(javas, kotlins));
    }
    if pairs.is_empty() {
        return None;
    }
    pairs.sort();
    Some(MigrationEvent {
        sha: delta.sha.clone(),
        pairs,
        ambiguous,
    })
}

/// Same-directory matches first, then the leftovers zipped in path order.
fn match_stem_group(javas: &BTreeSet<&str>, kotlins: &BTreeSet<&str>) -> Vec<MigrationPair> {
    let mut free_java: Vec<&str> = javas.iter().copied().collect();
    let mut free_kotlin: Vec<&str> = kotlins.iter().copied().collect();
    let mut pairs = Vec::new();

    free_java.retain(|java| {
        let dir = parent_dir(java);
        match free_kotlin.iter().position(|kt| parent_dir(kt) == dir) {
            Some(pos) => {
                let kt = free_kotlin.remove(pos);
                pairs.push(MigrationPair {
                    java: java.to_string(),
                    kotlin: kt.to_string(),
                });
                false
            }
            None => true,
        }
    });
    pairs.extend(free_java.iter().zip(&free_kotlin).map(|(j, k)| MigrationPair {
        java: j.to_string(),
        kotlin: k.to_string(),
    }));
    pairs
}

pub fn summarize_migrations(events: &[MigrationEvent]) -> MigrationHistogram {
    let mut hist = BTreeMap::new();
    for event in events {
        *hist.entry(event.pairs.len()).or_insert(0) += 1;
    }
    MigrationHistogram(hist)
}

/// Reads migration events back from JSON lines; blank lines are skipped.
pub fn read_migration_events(jsonl: &str) -> Result<Vec<MigrationEvent>, serde_json::Error> {
    jsonl
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(serde_json::from_str)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pair(j: &str, k: &str) -> MigrationPair {
        MigrationPair {
            java: j.into(),
            kotlin: k.into(),
        }
    }

    fn mine(log: &str) -> Vec<MigrationEvent> {
        detect_migrations(&parse_name_status_log(log).unwrap())
    }

    #[test]
    fn parses_added_record() {
        let deltas = parse_name_status_log("commit a1\nA\tsrc/Foo.kt").unwrap();
        assert_eq!(
            deltas,
            vec![CommitDelta {
                sha: "a1".into(),
                ordinal: 1,
                changes: vec![ChangeRecord {
                    status: ChangeStatus::Added,
                    path: "src/Foo.kt".into(),
                    old_path: None
                }]
            }]
        );
    }

    #[test]
    fn parses_rename_with_score() {
        let deltas = parse_name_status_log("commit a1\nR100\tsrc/A.java\tsrc/A.kt").unwrap();
        let change = &deltas[0].changes[0];
        assert_eq!(change.status, ChangeStatus::Renamed);
        assert_eq!(change.old_path.as_deref(), Some("src/A.java"));
        assert_eq!(change.path, "src/A.kt");
    }

    #[test]
    fn unknown_status_is_malformed() {
        assert_eq!(
            parse_name_status_log("commit a1\nX\tfoo"),
            Err(MineError::MalformedLog(2))
        );
    }

    #[test]
    fn record_before_header_is_malformed() {
        assert_eq!(
            parse_name_status_log("\nA\tfoo.kt"),
            Err(MineError::MalformedLog(2))
        );
    }

    #[test]
    fn rename_without_score_or_target_is_malformed() {
        assert!(parse_name_status_log("commit a1\nR\ta\tb").is_err());
        assert!(parse_name_status_log("commit a1\nR90\ta").is_err());
        assert!(parse_name_status_log("commit a1\nA\t").is_err());
        assert!(parse_name_status_log("commit zz").is_err());
    }

    #[test]
    fn empty_input_has_no_deltas() {
        assert!(parse_name_status_log("").unwrap().is_empty());
        assert!(parse_name_status_log("\n\n").unwrap().is_empty());
    }

    #[test]
    fn ordinals_follow_input_order_and_duplicates_collapse() {
        let deltas =
            parse_name_status_log("commit a\nM\tx\nM\tx\n\ncommit b\ncommit c\nD\tx\n").unwrap();
        let ords: Vec<_> = deltas.iter().map(|d| d.ordinal).collect();
        assert_eq!(ords, vec![1, 2, 3]);
        assert_eq!(deltas[0].changes.len(), 1);
        assert!(deltas[1].changes.is_empty());
    }

    #[test]
    fn delete_plus_add_with_same_stem_is_a_migration() {
        let events = mine("commit c1\nD\tsrc/Login.java\nA\tsrc/Login.kt\n");
        assert_eq!(events.len(), 1);
        assert_eq!(events[0].pairs, vec![pair("src/Login.java", "src/Login.kt")]);
        assert!(!events[0].ambiguous);
    }

    #[test]
    fn directories_may_differ() {
        let events = mine("commit c1\nD\ta/Foo.java\nA\tb/Foo.kt\n");
        assert_eq!(events[0].pairs, vec![pair("a/Foo.java", "b/Foo.kt")]);
    }

    #[test]
    fn stem_mismatch_is_not_a_migration() {
        assert!(mine("commit c1\nD\tFoo.java\nA\tBar.kt\n").is_empty());
    }

    #[test]
    fn stem_comparison_is_case_sensitive() {
        assert!(mine("commit c1\nD\tfoo.java\nA\tFoo.kt\n").is_empty());
    }

    #[test]
    fn rename_record_counts_as_migration() {
        let events = mine("commit c1\nR087\tsrc/A.java\tsrc/A.kt\n");
        assert_eq!(events[0].pairs, vec![pair("src/A.java", "src/A.kt")]);
    }

    #[test]
    fn deletion_and_addition_in_different_commits_do_not_pair() {
        assert!(mine("commit c1\nD\tA.java\ncommit c2\nA\tA.kt\n").is_empty());
    }

    #[test]
    fn ambiguous_stems_prefer_same_directory() {
        let log = "commit c1\nD\tx/Util.java\nD\ty/Util.java\nA\ty/Util.kt\nA\tz/Util.kt\n";
        let events = mine(log);
        assert!(events[0].ambiguous);
        assert_eq!(
            events[0].pairs,
            vec![pair("x/Util.java", "z/Util.kt"), pair("y/Util.java", "y/Util.kt")]
        );
    }

    #[test]
    fn ambiguous_stems_pair_min_of_both_sides() {
        let log = "commit c1\nD\ta/K.java\nA\tb/K.kt\nA\tc/K.kt\n";
        let events = mine(log);
        assert!(events[0].ambiguous);
        assert_eq!(events[0].pairs, vec![pair("a/K.java", "b/K.kt")]);
    }

    #[test]
    fn stem_handles_dotfiles_and_nested_extensions() {
        assert_eq!(stem("a/b/Foo.java"), "Foo");
        assert_eq!(stem("Foo.test.kt"), "Foo.test");
        assert_eq!(stem(".hidden"), ".hidden");
    }

    #[test]
    fn histogram_counts_pairs_per_event() {
        let ev = |n: usize| MigrationEvent {
            sha: "a".into(),
            pairs: (0..n).map(|i| pair(&format!("{i}.java"), &format!("{i}.kt"))).collect(),
            ambiguous: false,
        };
        let hist = summarize_migrations(&[ev(1), ev(1), ev(3)]);
        assert_eq!(hist.0, BTreeMap::from([(1, 2), (3, 1)]));
        assert_eq!(hist.to_csv(), "files_migrated,commits\n1,2\n3,1\n");
        assert!(summarize_migrations(&[]).0.is_empty());
    }

    #[test]
    fn json_line_shape() {
        let ev = MigrationEvent {
            sha: "ab".into(),
            pairs: vec![pair("A.java", "A.kt")],
            ambiguous: false,
        };
        assert_eq!(
            ev.to_json_line(),
            r#"{"sha":"ab","pairs":[{"java":"A.java","kotlin":"A.kt"}],"ambiguous":false}"#
        );
        assert_eq!(read_migration_events(&ev.to_json_line()).unwrap(), vec![ev]);
    }

    fn arb_log() -> impl Strategy<Value = String> {
        let stems = prop::sample::select(vec!["A", "B", "Main", "Util"]);
        let dirs = prop::sample::select(vec!["", "src/", "app/src/"]);
        let exts = prop::sample::select(vec![".java", ".kt", ".xml"]);
        let status = prop::sample::select(vec!["A", "D", "M", "R100"]);
        let record = (status, dirs.clone(), stems.clone(), exts.clone(), dirs, stems, exts)
            .prop_map(|(s, d, n, e, d2, n2, e2)| {
                if s == "R100" {
                    format!("{s}\t{d}{n}{e}\t{d2}{n2}{e2}")
                } else {
                    format!("{s}\t{d}{n}{e}")
                }
            });
        prop::collection::vec(prop::collection::vec(record, 0..6), 0..8).prop_map(|commits| {
            commits
                .iter()
                .enumerate()
                .map(|(i, recs)| format!("commit {:x}\n{}\n", i + 10, recs.join("\n")))
                .collect()
        })
    }

    proptest! {
        #[test]
        fn pairs_are_sound(log in arb_log()) {
            let history = parse_name_status_log(&log).unwrap();
            for event in detect_migrations(&history) {
                let delta = history.iter().find(|d| d.sha == event.sha).unwrap();
                prop_assert!(!event.pairs.is_empty());
                for p in &event.pairs {
                    prop_assert!(p.java.ends_with(".java") && p.kotlin.ends_with(".kt"));
                    prop_assert_eq!(stem(&p.java), stem(&p.kotlin));
                    prop_assert!(delta.removed_paths().any(|r| r == p.java));
                    prop_assert!(delta.added_paths().any(|a| a == p.kotlin));
                }
            }
        }

        #[test]
        fn appending_commits_keeps_earlier_events(log in arb_log(), tail in arb_log()) {
            let before = detect_migrations(&parse_name_status_log(&log).unwrap());
            let tail = tail.replace("commit ", "commit ff");
            let after = detect_migrations(&parse_name_status_log(&format!("{log}{tail}")).unwrap());
            prop_assert_eq!(&after[..before.len()], &before[..]);
        }

        #[test]
        fn mining_is_deterministic(log in arb_log()) {
            let a = detect_migrations(&parse_name_status_log(&log).unwrap());
            let b = detect_migrations(&parse_name_status_log(&log).unwrap());
            prop_assert_eq!(a, b);
        }
    }
}
