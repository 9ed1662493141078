//! `hgsl` subcommands. Each reads a JSON config; flags override it.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use hgsl_core::dgp::{synthesize, SynthParams};
use hgsl_core::solver::SolverConfig;
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};
use crate::experiment::{
    evaluate_saved, ground_truth_dataset, run_experiment, synthetic_protocol, write_table, DatasetSource,
    ExperimentSpec, Metric, ResultTable, TrialRow,
};
use crate::io::{self, DatasetPaths, SchemaFile};
use crate::study::{rhr_correlation_study, sdor_sweep, write_rhr_study, write_sdor_table, SubsampleParams};

#[derive(Debug, Parser)]
#[command(name = "hgsl", version, about = "Heterogeneous graph structure learning from node signals")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate synthetic datasets.
    Synth(Overrides),
    /// Run seeded fitting trials.
    Fit(Overrides),
    /// Score saved results against a dataset's true graph.
    Eval(Overrides),
    /// AUC of HGSL and the homogeneous baseline over an SDOR grid.
    SweepSdor(Overrides),
    /// Correlation of relaxed homophily with AUC over subgraphs.
    StudyRhr(Overrides),
}

#[derive(Debug, Clone, Args)]
pub struct Overrides {
    /// JSON config for the subcommand.
    #[arg(long)]
    pub config: PathBuf,
    /// Base seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Number of trials (datasets for `synth`, subgraphs for `study-rhr`).
    #[arg(long)]
    pub trials: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthSpec {
    pub schema: SchemaFile,
    pub params: SynthParams,
    pub seed: u64,
    pub count: usize,
    pub output_dir: Option<PathBuf>,
}

impl Default for SynthSpec {
    fn default() -> Self {
        let DatasetSource::Synthetic { schema, params } = synthetic_protocol(300).dataset else {
            unreachable!()
        };
        Self { schema, params, seed: 0, count: 1, output_dir: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalSpec {
    /// Must include the edge file.
    pub dataset: DatasetPaths,
    /// A `fit` output directory, or a single trial directory.
    pub results_dir: PathBuf,
    #[serde(default)]
    pub truth_embeddings: Option<PathBuf>,
    #[serde(default = "all_metrics")]
    pub metrics: Vec<Metric>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

fn all_metrics() -> Vec<Metric> {
    Metric::ALL.to_vec()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepSpec {
    pub base: ExperimentSpec,
    pub grid: Vec<f64>,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self { base: ExperimentSpec::default(), grid: (0..=10).map(|i| i as f64 / 10.0).collect() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RhrSpec {
    pub dataset: DatasetPaths,
    pub metapath: String,
    #[serde(default)]
    pub subsample: SubsampleParams,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

/// Runs one subcommand; the caller maps errors to exit codes.
pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Synth(o) => synth(o),
        Command::Fit(o) => fit(o),
        Command::Eval(o) => eval(o),
        Command::SweepSdor(o) => sweep(o),
        Command::StudyRhr(o) => study(o),
    }
}

fn output_dir(flag: &Option<PathBuf>, config: &Option<PathBuf>) -> Result<PathBuf> {
    flag.clone()
        .or_else(|| config.clone())
        .ok_or_else(|| HarnessError::Config("no output directory; set `output_dir` or pass --out".into()))
}

fn apply(spec: &mut ExperimentSpec, o: &Overrides) {
    if let Some(s) = o.seed {
        spec.base_seed = s;
    }
    if let Some(t) = o.trials {
        spec.trials = t;
    }
    if let Some(d) = &o.out {
        spec.output_dir = Some(d.clone());
    }
}

fn print_aggregate(table: &ResultTable) {
    for (k, a) in &table.aggregate {
        let std = a.std.map_or_else(|| "-".to_string(), |s| format!("{s:.4}"));
        println!("{k:<24} {:>10.4} {std:>10} n={}", a.mean, a.count);
    }
    if table.failures() > 0 {
        println!("{} of {} trials failed", table.failures(), table.rows.len());
    }
}

fn synth(o: &Overrides) -> Result<()> {
    let mut spec: SynthSpec = io::read_json(&o.config)?;
    if let Some(s) = o.seed {
        spec.seed = s;
    }
    if let Some(t) = o.trials {
        spec.count = t;
    }
    let dir = output_dir(&o.out, &spec.output_dir)?;
    spec.output_dir = Some(dir.clone());
    if spec.count == 0 {
        return Err(HarnessError::Config("dataset count must be at least 1".into()));
    }
    let schema = spec.schema.to_schema()?;
    io::create_dir(&dir)?;
    io::write_json(&dir.join("resolved_spec.json"), &spec)?;
    for i in 0..spec.count as u64 {
        let seed = spec.seed + i;
        let gt = synthesize(&schema, &spec.params, seed)?;
        let sub = if spec.count == 1 { dir.clone() } else { dir.join(format!("seed_{seed}")) };
        io::save_dataset(&ground_truth_dataset(&gt), &sub)?;
        io::save_embeddings(&sub.join("true_embeddings.csv"), &schema, &gt.embeddings)?;
        let info = serde_json::json!({
            "seed": seed,
            "achieved_sdor": gt.achieved_sdor,
            "supports": gt.supports,
            "dropped_edges": gt.dropped_edges,
            "warnings": gt.warnings,
        });
        io::write_json(&sub.join("truth.json"), &info)?;
        for w in &gt.warnings {
            eprintln!("seed {seed}: {w}");
        }
        println!("seed {seed}: {} nodes, {} edges -> {}", gt.graph.num_nodes(), gt.graph.edges().len(), sub.display());
    }
    Ok(())
}

fn fit(o: &Overrides) -> Result<()> {
    let mut spec: ExperimentSpec = io::read_json(&o.config)?;
    apply(&mut spec, o);
    let table = run_experiment(&spec)?;
    print_aggregate(&table);
    Ok(())
}

/// Trial directories under `dir` as `(seed, path)`, sorted by seed.
fn trial_dirs(dir: &Path) -> Result<Vec<(u64, PathBuf)>> {
    if dir.join("learned_edges.csv").is_file() {
        return Ok(vec![(0, dir.to_path_buf())]);
    }
    let root = dir.join("trials");
    let entries = std::fs::read_dir(&root).map_err(|e| HarnessError::io(&root, e))?;
    let mut out = Vec::new();
    for e in entries {
        let e = e.map_err(|err| HarnessError::io(&root, err))?;
        let name = e.file_name();
        if let Some(seed) = name.to_str().and_then(|n| n.strip_prefix("seed_")).and_then(|s| s.parse().ok()) {
            out.push((seed, e.path()));
        }
    }
    out.sort();
    Ok(out)
}

fn eval(o: &Overrides) -> Result<()> {
    let mut spec: EvalSpec = io::read_json(&o.config)?;
    let dir = output_dir(&o.out, &spec.output_dir)?;
    spec.output_dir = Some(dir.clone());
    spec.dataset.check_exist()?;
    if spec.dataset.edges.is_none() {
        return Err(HarnessError::Config("evaluation needs `dataset.edges`".into()));
    }
    let ds = io::load_dataset(&spec.dataset)?;
    let truth_e = spec.truth_embeddings.as_deref().map(|p| io::load_embeddings(p, &ds.schema)).transpose()?;
    let mut trials = trial_dirs(&spec.results_dir)?;
    if let Some(s) = o.seed {
        trials.retain(|(seed, _)| *seed >= s);
    }
    if let Some(t) = o.trials {
        trials.truncate(t);
    }
    if trials.is_empty() {
        return Err(HarnessError::file(&spec.results_dir, "no trial results found"));
    }
    let rows: Vec<TrialRow> = trials
        .iter()
        .map(|(seed, path)| {
            let emb = path.join("embeddings.csv");
            let res = evaluate_saved(
                &ds,
                &path.join("learned_edges.csv"),
                emb.is_file().then_some(emb.as_path()),
                truth_e.as_ref(),
                &spec.metrics,
            );
            let (metrics, error) = match res {
                Ok(m) => (m, None),
                Err(e) => (BTreeMap::new(), Some(e.to_string())),
            };
            TrialRow {
                seed: *seed,
                metrics,
                converged: error.is_none(),
                outer_iterations: 0,
                error,
                diverged: false,
                runtime_secs: 0.0,
            }
        })
        .collect();
    let table = ResultTable::from_rows(rows);
    io::create_dir(&dir)?;
    io::write_json(&dir.join("resolved_spec.json"), &spec)?;
    write_table(&dir, &table)?;
    print_aggregate(&table);
    if table.failures() == table.rows.len() {
        return Err(HarnessError::AllTrialsFailed {
            trials: table.rows.len(),
            divergent: false,
            first: table.rows[0].error.clone().unwrap_or_default(),
        });
    }
    Ok(())
}

fn sweep(o: &Overrides) -> Result<()> {
    let mut spec: SweepSpec = io::read_json(&o.config)?;
    apply(&mut spec.base, o);
    let dir = output_dir(&None, &spec.base.output_dir)?;
    let rows = sdor_sweep(&spec.base, &spec.grid)?;
    io::create_dir(&dir)?;
    io::write_json(&dir.join("resolved_spec.json"), &spec)?;
    write_sdor_table(&dir.join("sdor_sweep.csv"), &rows)?;
    for r in &rows {
        let f = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |x| format!("{x:.4}"));
        println!(
            "target {:<6} achieved {:>8} hgsl {:>8} baseline {:>8} gain {:>8} {}",
            r.target,
            f(r.achieved),
            f(r.hgsl_auc),
            f(r.baseline_auc),
            f(r.relative_gain),
            r.note.as_deref().unwrap_or("")
        );
    }
    Ok(())
}

fn study(o: &Overrides) -> Result<()> {
    let mut spec: RhrSpec = io::read_json(&o.config)?;
    if let Some(s) = o.seed {
        spec.subsample.seed = s;
    }
    if let Some(t) = o.trials {
        spec.subsample.subgraphs = t;
    }
    let dir = output_dir(&o.out, &spec.output_dir)?;
    spec.output_dir = Some(dir.clone());
    spec.dataset.check_exist()?;
    spec.solver.validate()?;
    let ds = io::load_dataset(&spec.dataset)?;
    let result = rhr_correlation_study(&ds, &spec.metapath, &spec.subsample, &spec.solver)?;
    io::create_dir(&dir)?;
    io::write_json(&dir.join("resolved_spec.json"), &spec)?;
    write_rhr_study(&dir, &result)?;
    println!(
        "{} subgraphs ({}), {} undefined RHR, {} failed, pearson r = {:.4}{}",
        result.points.len(),
        result.method,
        result.skipped_undefined,
        result.skipped_failed,
        result.pearson,
        if result.degenerate { " (degenerate)" } else { "" }
    );
    Ok(())
}
