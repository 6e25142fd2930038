//! Fixture loaders shared by the core integration tests and the acceptance suite.

#![allow(dead_code)]

use migrank::metrics::catalog::AndroidCatalog;
use migrank::metrics::{Feature, FeatureExtractor};
use migrank::miner::{detect_migrations, parse_name_status_log, summarize_migrations, MigrationHistogram};
use migrank::ProjectSnapshot;
use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

pub fn fixtures_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures")
}

fn sorted_entries(dir: &Path, suffix: &str) -> Vec<PathBuf> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .unwrap_or_else(|e| panic!("cannot list {}: {e}", dir.display()))
        .map(|e| e.unwrap().path())
        .filter(|p| p.to_string_lossy().ends_with(suffix))
        .collect();
    paths.sort();
    paths
}

pub struct MiningCase {
    pub name: String,
    pub log: String,
    pub expected_jsonl: String,
}

pub fn mining_cases() -> Vec<MiningCase> {
    sorted_entries(&fixtures_dir().join("mining"), ".log")
        .into_iter()
        .map(|log| {
            let name = log.file_stem().unwrap().to_string_lossy().into_owned();
            let expected = log.with_file_name(format!("{name}.expected.jsonl"));
            MiningCase {
                log: fs::read_to_string(&log).unwrap(),
                expected_jsonl: fs::read_to_string(&expected)
                    .unwrap_or_else(|e| panic!("cannot read {}: {e}", expected.display())),
                name,
            }
        })
        .collect()
}

/// Mines one fixture; on mismatch returns both JSONL texts.
pub fn check_mining(case: &MiningCase) -> Result<MigrationHistogram, String> {
    let history = parse_name_status_log(&case.log).map_err(|e| format!("{}: {e}", case.name))?;
    let events = detect_migrations(&history);
    let actual: String = events.iter().map(|e| e.to_json_line() + "\n").collect();
    if actual == case.expected_jsonl {
        Ok(summarize_migrations(&events))
    } else {
        Err(format!("{}:\nexpected:\n{}actual:\n{}", case.name, case.expected_jsonl, actual))
    }
}

/// Expected nonzero features of one file; every other feature is 0.
pub struct GoldenFile {
    pub path: String,
    pub features: Vec<(Feature, f64)>,
}

pub struct GoldenCase {
    pub name: String,
    pub root: PathBuf,
    pub files: Vec<GoldenFile>,
}

fn parse_value(text: &str) -> f64 {
    match text.split_once('/') {
        Some((n, d)) => n.parse::<f64>().unwrap() / d.parse::<f64>().unwrap(),
        None => text.parse().unwrap_or_else(|_| panic!("bad value {text}")),
    }
}

fn parse_expected(text: &str) -> Vec<GoldenFile> {
    let mut files: Vec<GoldenFile> = Vec::new();
    for line in text.lines() {
        let line = line.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        if let Some(path) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            files.push(GoldenFile { path: path.to_string(), features: Vec::new() });
            continue;
        }
        let (name, value) = line.split_once(char::is_whitespace).unwrap_or_else(|| panic!("bad line {line}"));
        let feature = Feature::from_name(name).unwrap_or_else(|| panic!("unknown feature {name}"));
        files.last_mut().expect("feature before file header").features.push((feature, parse_value(value.trim())));
    }
    files
}

pub fn golden_cases() -> Vec<GoldenCase> {
    sorted_entries(&fixtures_dir().join("golden"), ".expected")
        .into_iter()
        .map(|expected| {
            let name = expected.file_stem().unwrap().to_string_lossy().into_owned();
            GoldenCase {
                root: expected.with_file_name(&name),
                files: parse_expected(&fs::read_to_string(&expected).unwrap()),
                name,
            }
        })
        .collect()
}

/// Extracts every listed file and returns one line per disagreeing feature.
pub fn check_golden(case: &GoldenCase, tolerance: f64) -> Vec<String> {
    let snapshot = ProjectSnapshot::from_dir(&case.root).unwrap();
    let index = snapshot.index();
    let catalog = AndroidCatalog::default();
    let extractor = FeatureExtractor::new(&index, &catalog);
    let mut mismatches = Vec::new();
    for file in &case.files {
        let Some(source) = snapshot.files.get(&file.path) else {
            mismatches.push(format!("{}: {} not in snapshot", case.name, file.path));
            continue;
        };
        let extraction = extractor.extract(&file.path, source);
        if !extraction.diagnostics.is_empty() {
            mismatches.push(format!("{}: {}: diagnostics {:?}", case.name, file.path, extraction.diagnostics));
        }
        let expected: BTreeMap<Feature, f64> = file.features.iter().copied().collect();
        for &f in Feature::ALL {
            let want = expected.get(&f).copied().unwrap_or(0.0);
            let got = extraction.features.get(f);
            if (want - got).abs() > tolerance {
                mismatches.push(format!("{}: {}: {} expected {want}, got {got}", case.name, file.path, f.name()));
            }
        }
    }
    mismatches
}
