use crate::{CliError, CliResult, EvaluateArgs, ExtractArgs, ImportanceArgs, MineArgs, RankArgs, TrainArgs};
use anyhow::{anyhow, bail, Context};
use migrank::eval::{evaluate, EvalConfig, Strategy, TrMode};
use migrank::ltr::{
    deserialize_model, feature_importance, predict, rank, serialize_model, train_with_report, CommitFeatures,
    RankerModel, RankingDocument, RankingQuery, TrainConfig,
};
use migrank::metrics::catalog::AndroidCatalog;
use migrank::metrics::FeatureExtractor;
use migrank::miner::{
    detect_migrations, git_name_status_log, parse_name_status_log, read_migration_events, summarize_migrations,
};
use migrank::ProjectSnapshot;
use serde_json::json;
use std::fs;
use std::path::Path;

const K_MAX_LIMIT: usize = 100;

fn internal(msg: String) -> CliError {
    CliError::Internal(anyhow!(msg))
}

fn require_exists(path: &Path, what: &str) -> anyhow::Result<()> {
    if !path.exists() {
        bail!("{what} {} does not exist", path.display());
    }
    Ok(())
}

fn write(path: &Path, bytes: impl AsRef<[u8]>) -> anyhow::Result<()> {
    fs::write(path, bytes).with_context(|| format!("cannot write {}", path.display()))
}

fn create_dir(path: &Path) -> anyhow::Result<()> {
    fs::create_dir_all(path).with_context(|| format!("cannot create {}", path.display()))
}

fn load_catalog(path: Option<&Path>) -> anyhow::Result<AndroidCatalog> {
    match path {
        None => Ok(AndroidCatalog::default()),
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("cannot read catalog {}", p.display()))?;
            AndroidCatalog::parse(&text).with_context(|| format!("invalid catalog {}", p.display()))
        }
    }
}

fn load_model(path: &Path) -> anyhow::Result<RankerModel> {
    let bytes = fs::read(path).with_context(|| format!("cannot read model {}", path.display()))?;
    deserialize_model(&bytes).with_context(|| format!("cannot load model {}", path.display()))
}

/// Reads every `*.json` feature file of `dir` in file-name order.
fn load_feature_dir(dir: &Path) -> anyhow::Result<Vec<RankingQuery>> {
    require_exists(dir, "feature directory")?;
    let mut paths: Vec<_> = fs::read_dir(dir)
        .with_context(|| format!("cannot list {}", dir.display()))?
        .map(|e| e.map(|e| e.path()))
        .collect::<Result<_, _>>()?;
    paths.retain(|p| p.extension().is_some_and(|e| e == "json"));
    paths.sort();
    paths
        .iter()
        .map(|p| {
            let text = fs::read_to_string(p).with_context(|| format!("cannot read {}", p.display()))?;
            let commit: CommitFeatures =
                serde_json::from_str(&text).with_context(|| format!("invalid feature file {}", p.display()))?;
            Ok(commit.to_query())
        })
        .collect()
}

pub fn cmd_mine(args: &MineArgs) -> CliResult {
    let log = match (&args.source.log, &args.source.git) {
        (Some(log), _) => {
            fs::read_to_string(log).with_context(|| format!("cannot read log {}", log.display()))?
        }
        (None, Some(repo)) => git_name_status_log(repo)?,
        (None, None) => return Err(anyhow!("one of --log or --git is required").into()),
    };
    let history = parse_name_status_log(&log)?;
    let events = detect_migrations(&history);
    let histogram = summarize_migrations(&events);

    create_dir(&args.out)?;
    let jsonl: String = events.iter().map(|e| e.to_json_line() + "\n").collect();
    write(&args.out.join("migrations.jsonl"), jsonl)?;
    write(&args.out.join("histogram.csv"), histogram.to_csv())?;
    let ambiguous = events.iter().filter(|e| e.ambiguous).count();
    println!(
        "{} commits, {} migration commits ({} ambiguous), {} files migrated",
        history.len(),
        events.len(),
        ambiguous,
        events.iter().map(|e| e.pairs.len()).sum::<usize>()
    );
    Ok(())
}

pub fn cmd_extract(args: &ExtractArgs) -> CliResult {
    require_exists(&args.migrations, "migrations file")?;
    let text = fs::read_to_string(&args.migrations)?;
    let events = read_migration_events(&text).context("invalid migrations file")?;
    let catalog = load_catalog(args.catalog.as_deref())?;
    if let Some(dir) = &args.source.snapshots {
        require_exists(dir, "snapshot directory")?;
    }
    create_dir(&args.out)?;

    for event in &events {
        let snapshot = match (&args.source.snapshots, &args.source.git) {
            (Some(dir), _) => {
                let root = dir.join(&event.sha);
                if !root.is_dir() {
                    return Err(anyhow!("missing snapshot for commit {}: {} not found", event.sha, root.display()).into());
                }
                ProjectSnapshot::from_dir(&root)?
            }
            (None, Some(repo)) => ProjectSnapshot::from_git_parent(repo, &event.sha)
                .with_context(|| format!("missing snapshot for commit {}", event.sha))?,
            (None, None) => return Err(anyhow!("one of --snapshots or --git is required").into()),
        };
        let commit = CommitFeatures::extract(event, &snapshot, &catalog);
        for f in &commit.files {
            for d in &f.diagnostics {
                eprintln!("{}: {}: {d}", event.sha, f.path);
            }
        }
        let mut json = serde_json::to_string_pretty(&commit).map_err(|e| internal(e.to_string()))?;
        json.push('\n');
        write(&args.out.join(format!("{}.json", event.sha)), json)?;
    }
    println!("wrote {} feature files to {}", events.len(), args.out.display());
    Ok(())
}

pub fn cmd_train(args: &TrainArgs) -> CliResult {
    let queries = load_feature_dir(&args.features)?;
    let config = TrainConfig {
        rounds: args.rounds,
        learning_rate: args.eta,
        max_depth: args.depth,
        seed: args.seed,
        ..TrainConfig::default()
    };
    let (model, report) = train_with_report(&queries, &config)?;
    for d in &report.diagnostics {
        eprintln!("{d}");
    }
    write(&args.out, serialize_model(&model))?;
    println!(
        "trained {} trees on {} queries; loss {:.4} -> {:.4}",
        model.trees.len(),
        queries.len() - report.diagnostics.len(),
        report.loss.first().copied().unwrap_or_default(),
        report.loss.last().copied().unwrap_or_default()
    );
    Ok(())
}

pub fn cmd_rank(args: &RankArgs) -> CliResult {
    require_exists(&args.snapshot, "snapshot directory")?;
    let model = load_model(&args.model)?;
    let catalog = load_catalog(args.catalog.as_deref())?;
    let snapshot = ProjectSnapshot::from_dir(&args.snapshot)?;
    let index = snapshot.index();
    let extractor = FeatureExtractor::new(&index, &catalog);
    let documents: Vec<RankingDocument> = snapshot
        .files
        .iter()
        .map(|(path, source)| RankingDocument {
            doc_id: path.clone(),
            features: extractor.extract(path, source).features.as_slice().to_vec(),
            label: 0,
        })
        .collect();
    let scores = predict(&model, &documents).map_err(|e| internal(e.to_string()))?;
    if let Some(bad) = scores.iter().position(|s| !s.is_finite()) {
        return Err(internal(format!("non-finite score for {}", documents[bad].doc_id)));
    }
    if documents.is_empty() {
        eprintln!("no .java files in {}", args.snapshot.display());
    }
    let ids: Vec<&str> = documents.iter().map(|d| d.doc_id.as_str()).collect();
    let order = rank(&ids, &scores);
    let mut listing = Vec::new();
    for (r, &i) in order.iter().enumerate() {
        println!("{:>4}  {:>9.4}  {}", r + 1, scores[i], ids[i]);
        listing.push(json!({"rank": r + 1, "score": scores[i], "path": ids[i]}));
    }
    if let Some(out) = &args.out {
        let mut text = serde_json::to_string_pretty(&listing).map_err(|e| internal(e.to_string()))?;
        text.push('\n');
        write(out, text)?;
    }
    Ok(())
}

pub fn cmd_evaluate(args: &EvaluateArgs) -> CliResult {
    if !(1..=K_MAX_LIMIT).contains(&args.kmax) {
        return Err(anyhow!("--kmax must be between 1 and {K_MAX_LIMIT}").into());
    }
    if args.trials == 0 {
        return Err(anyhow!("--trials must be at least 1").into());
    }
    let strategies: Vec<Strategy> =
        args.strategies.iter().map(|s| s.parse::<Strategy>().map_err(|e| anyhow!(e))).collect::<Result<_, _>>()?;
    let model = match &args.model {
        Some(p) => Some(load_model(p)?),
        None if strategies.contains(&Strategy::Learned) => {
            return Err(anyhow!("--model is required for the learned strategy").into())
        }
        None => None,
    };
    let queries = load_feature_dir(&args.features)?;
    let config = EvalConfig {
        k_max: args.kmax,
        trials: args.trials,
        seed: args.seed,
        tr_mode: if args.all_relevant { TrMode::AllRelevant } else { TrMode::RetrievedInTopK },
    };
    let report = evaluate(&queries, &strategies, model.as_ref(), &config)?;
    for row in &report.strategies {
        if row.map.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(internal(format!("MAP of {} outside [0, 1]", row.strategy.name())));
        }
    }
    for d in &report.diagnostics {
        eprintln!("{d}");
    }
    create_dir(&args.out)?;
    write(&args.out.join("report.csv"), report.to_csv())?;
    let mut json = serde_json::to_string_pretty(&report).map_err(|e| internal(e.to_string()))?;
    json.push('\n');
    write(&args.out.join("report.json"), json)?;
    print!("{}", report.to_table());
    Ok(())
}

pub fn cmd_importance(args: &ImportanceArgs) -> CliResult {
    let model = load_model(&args.model)?;
    let shares = feature_importance(&model)?;
    let mut csv = String::from("feature,gain_share\n");
    for (feature, share) in &shares {
        println!("{:<38} {share:.4}", feature.name());
        csv.push_str(&format!("{},{share:.6}\n", feature.name()));
    }
    if let Some(out) = &args.out {
        write(out, csv)?;
    }
    Ok(())
}
