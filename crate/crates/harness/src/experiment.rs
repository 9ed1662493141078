//! Seeded trials, evaluation and result tables.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use hgsl_core::dgp::{synthesize, BackboneParams, DgpConfig, GroundTruth, SdorTarget, SynthParams};
use hgsl_core::graph::{enumerate_candidates, vectorize, CandidateEdgeSet, HeteroGraph, RelationEmbeddings, SignalMatrix};
use hgsl_core::metrics::{auc_edge_type, gmse, gmse_true_edges, nrmse_embeddings, sdor, EvalReport};
use hgsl_core::solver::{fit, fit_homogeneous, FitResult, SolverConfig};
use indexmap::IndexMap;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};
use crate::io::{self, Dataset, DatasetPaths, SchemaFile};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DatasetSource {
    /// Regenerated per trial with the trial seed.
    Synthetic { schema: SchemaFile, params: SynthParams },
    Files(DatasetPaths),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Auc,
    Gmse,
    GmseTrueEdges,
    Nrmse,
    Sdor,
}

impl Metric {
    pub const ALL: [Metric; 5] = [Metric::Auc, Metric::Gmse, Metric::GmseTrueEdges, Metric::Nrmse, Metric::Sdor];
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentSpec {
    pub dataset: DatasetSource,
    pub solver: SolverConfig,
    pub metrics: Vec<Metric>,
    pub trials: usize,
    pub base_seed: u64,
    pub output_dir: Option<PathBuf>,
    /// Extraction threshold for the learned graph.
    pub threshold: f64,
    /// Also fit the single-relation baseline in every trial.
    pub baseline: bool,
    /// Dimension count for the measured SDOR; ground-truth active count by
    /// default, else ⌈K/10⌉.
    pub sdor_dims: Option<usize>,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        synthetic_protocol(300)
    }
}

/// Two node types, r1:(A,A) and r2:(A,B), SBM 25/25 with p = 0.2, q = 0.02,
/// half of the K dims active per relation, standardized signals, 30 trials.
pub fn synthetic_protocol(num_dims: usize) -> ExperimentSpec {
    let mut node_types = IndexMap::new();
    node_types.insert("A".to_string(), 1);
    node_types.insert("B".to_string(), 1);
    let mut relations = IndexMap::new();
    relations.insert("r1".to_string(), ("A".to_string(), "A".to_string()));
    relations.insert("r2".to_string(), ("A".to_string(), "B".to_string()));
    ExperimentSpec {
        dataset: DatasetSource::Synthetic {
            schema: SchemaFile { node_types, relations },
            params: SynthParams {
                backbone: BackboneParams::Sbm { block_sizes: vec![25, 25], p: 0.2, q: 0.02 },
                num_dims,
                active_dims: num_dims.div_ceil(2),
                sdor: vec![SdorTarget { a: 0, b: 1, target: 0.0 }],
                magnitude: (0.5, 1.5),
                dgp: DgpConfig::default(),
                block_labels: false,
            },
        },
        solver: SolverConfig { standardize: true, ..SolverConfig::default() },
        metrics: Metric::ALL.to_vec(),
        trials: 30,
        base_seed: 0,
        output_dir: None,
        threshold: 0.0,
        baseline: true,
        sdor_dims: None,
    }
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(HarnessError::Config("trial count must be at least 1".into()));
        }
        if self.threshold.is_nan() || self.threshold < 0.0 {
            return Err(HarnessError::Config(format!("threshold {} must be nonnegative", self.threshold)));
        }
        self.solver.validate()?;
        match &self.dataset {
            DatasetSource::Synthetic { schema, params } => {
                schema.to_schema()?;
                params.backbone.validate()?;
                params.dgp.validate()?;
            }
            DatasetSource::Files(paths) => paths.check_exist()?,
        }
        Ok(())
    }

    pub fn seeds(&self) -> Vec<u64> {
        (0..self.trials as u64).map(|i| self.base_seed + i).collect()
    }
}

/// One trial. Runtime is excluded from equality so repeated runs compare equal.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrialRow {
    pub seed: u64,
    pub metrics: BTreeMap<String, f64>,
    pub converged: bool,
    pub outer_iterations: usize,
    pub error: Option<String>,
    pub diverged: bool,
    pub runtime_secs: f64,
}

impl PartialEq for TrialRow {
    fn eq(&self, other: &Self) -> bool {
        self.seed == other.seed
            && self.metrics == other.metrics
            && self.converged == other.converged
            && self.outer_iterations == other.outer_iterations
            && self.error == other.error
            && self.diverged == other.diverged
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub mean: f64,
    /// Unbiased (n − 1) estimator; absent for a single value.
    pub std: Option<f64>,
    pub count: usize,
}

impl Aggregate {
    pub fn of(values: &[f64]) -> Option<Self> {
        let n = values.len();
        if n == 0 {
            return None;
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let std = (n > 1).then(|| {
            let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
            (ss / (n - 1) as f64).sqrt()
        });
        Some(Self { mean, std, count: n })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultTable {
    pub rows: Vec<TrialRow>,
    pub aggregate: BTreeMap<String, Aggregate>,
}

impl ResultTable {
    /// Sorts rows by seed and aggregates every metric over the rows having it.
    pub fn from_rows(mut rows: Vec<TrialRow>) -> Self {
        rows.sort_by_key(|r| r.seed);
        let mut values: BTreeMap<String, Vec<f64>> = BTreeMap::new();
        for row in &rows {
            for (k, v) in &row.metrics {
                values.entry(k.clone()).or_default().push(*v);
            }
        }
        let aggregate = values
            .into_iter()
            .filter_map(|(k, v)| Aggregate::of(&v).map(|a| (k, a)))
            .collect();
        Self { rows, aggregate }
    }

    pub fn mean(&self, metric: &str) -> Option<f64> {
        self.aggregate.get(metric).map(|a| a.mean)
    }

    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| r.error.is_some()).count()
    }
}

/// Truth available for scoring a fit.
pub struct Reference<'a> {
    pub graph: Option<&'a HeteroGraph>,
    pub embeddings: Option<&'a RelationEmbeddings>,
    pub active_dims: Option<usize>,
}

/// Baseline weight of each pair copied to every admissible relation on it.
pub fn broadcast_baseline(baseline: &FitResult, candidates: &CandidateEdgeSet) -> Vec<f64> {
    candidates
        .triples()
        .iter()
        .map(|t| baseline.w[baseline.candidates.index_of(t.u, t.v, 0).expect("baseline covers all pairs")])
        .collect()
}

fn score_weights(
    w: &[f64],
    candidates: &CandidateEdgeSet,
    truth: &HeteroGraph,
    metrics: &[Metric],
    prefix: &str,
    out: &mut BTreeMap<String, f64>,
) -> Result<Option<hgsl_core::metrics::AucReport>> {
    let mut auc = None;
    let tv = vectorize(truth, candidates)?;
    let has_edges = tv.iter().any(|&v| v != 0.0);
    for m in metrics {
        match m {
            Metric::Auc => {
                let rep = auc_edge_type(truth, candidates, w)?;
                if !rep.per_class.is_empty() {
                    out.insert(format!("{prefix}auc"), rep.macro_auc);
                }
                auc = Some(rep);
            }
            Metric::Gmse if has_edges => {
                out.insert(format!("{prefix}gmse"), gmse(&tv, w)?);
            }
            Metric::GmseTrueEdges if has_edges => {
                let v = gmse_true_edges(&tv, w, candidates.num_nodes(), candidates.num_relations())?;
                out.insert(format!("{prefix}gmse_true_edges"), v);
            }
            _ => {}
        }
    }
    Ok(auc)
}

/// Metrics of `fit` (and optionally the baseline) against whatever truth is known.
pub fn evaluate(
    x: &SignalMatrix,
    fitted: &FitResult,
    baseline: Option<&FitResult>,
    reference: &Reference<'_>,
    spec: &ExperimentSpec,
) -> Result<(EvalReport, BTreeMap<String, f64>)> {
    let mut values = BTreeMap::new();
    let mut report = EvalReport {
        auc: None,
        gmse: None,
        gmse_true_edges: None,
        nrmse: None,
        sdor: None,
        conflicts: fitted.extract(spec.threshold)?.conflicts,
        provenance: BTreeMap::new(),
    };
    if let Some(truth) = reference.graph {
        report.auc = score_weights(&fitted.w, &fitted.candidates, truth, &spec.metrics, "", &mut values)?;
        if let Some(b) = baseline {
            let bw = broadcast_baseline(b, &fitted.candidates);
            score_weights(&bw, &fitted.candidates, truth, &spec.metrics, "baseline_", &mut values)?;
        }
        report.gmse = values.get("gmse").copied();
        report.gmse_true_edges = values.get("gmse_true_edges").copied();
    }
    if spec.metrics.contains(&Metric::Nrmse) {
        if let Some(e) = reference.embeddings {
            let rep = nrmse_embeddings(e, &fitted.embeddings)?;
            values.insert("nrmse".into(), rep.value);
            report.nrmse = Some(rep);
        }
    }
    if spec.metrics.contains(&Metric::Sdor) && fitted.candidates.num_relations() >= 2 {
        let m = spec
            .sdor_dims
            .or(reference.active_dims)
            .unwrap_or_else(|| x.ncols().div_ceil(10))
            .clamp(1, x.ncols());
        if let Ok(rep) = sdor(x, &fitted.candidates, &fitted.w, 0, 1, m) {
            values.insert("sdor".into(), rep.value);
            report.sdor = Some(rep.value);
        }
    }
    Ok((report, values))
}

/// Scores a `learned_edges.csv` (and optionally its `embeddings.csv`) against
/// a dataset that carries its true graph.
pub fn evaluate_saved(
    ds: &Dataset,
    learned_edges: &Path,
    learned_embeddings: Option<&Path>,
    truth_embeddings: Option<&RelationEmbeddings>,
    metrics: &[Metric],
) -> Result<BTreeMap<String, f64>> {
    let truth = ds
        .graph
        .as_ref()
        .ok_or_else(|| HarnessError::Config("evaluation needs the dataset's edge file".into()))?;
    let candidates = enumerate_candidates(&ds.node_types, &ds.schema)?;
    let w = io::load_scores(learned_edges, ds, &candidates)?;
    let mut out = BTreeMap::new();
    score_weights(&w, &candidates, truth, metrics, "", &mut out)?;
    if let (true, Some(path), Some(te)) = (metrics.contains(&Metric::Nrmse), learned_embeddings, truth_embeddings) {
        let learned = io::load_embeddings(path, &ds.schema)?;
        out.insert("nrmse".into(), nrmse_embeddings(te, &learned)?.value);
    }
    Ok(out)
}

/// Everything a trial produced, kept for writing.
pub struct TrialOutput {
    pub row: TrialRow,
    pub artifacts: Option<TrialArtifacts>,
}

pub struct TrialArtifacts {
    pub dataset: Dataset,
    pub fit: FitResult,
    pub report: EvalReport,
}

pub fn ground_truth_dataset(gt: &GroundTruth) -> Dataset {
    Dataset {
        schema: gt.schema.clone(),
        node_ids: (0..gt.graph.num_nodes()).map(|i| i.to_string()).collect(),
        node_types: gt.graph.node_types().to_vec(),
        labels: gt.graph.labels().map(<[usize]>::to_vec),
        graph: Some(gt.graph.clone()),
        signals: gt.signals.clone(),
    }
}

fn trial_inner(spec: &ExperimentSpec, seed: u64, files: Option<&Dataset>) -> Result<(TrialRow, TrialArtifacts)> {
    let start = Instant::now();
    let (dataset, truth_e, active, achieved) = match (&spec.dataset, files) {
        (DatasetSource::Synthetic { schema, params }, _) => {
            let gt = synthesize(&schema.to_schema()?, params, seed)?;
            let achieved = gt.achieved_sdor.first().copied();
            (ground_truth_dataset(&gt), Some(gt.embeddings), Some(params.active_dims), achieved)
        }
        (DatasetSource::Files(_), Some(ds)) => (ds.clone(), None, None, None),
        (DatasetSource::Files(_), None) => unreachable!("file datasets are loaded before trials"),
    };
    let cfg = SolverConfig { seed, ..spec.solver };
    let fitted = fit(&dataset.signals, &dataset.node_types, &dataset.schema, &cfg)?;
    let baseline = if spec.baseline { Some(fit_homogeneous(&dataset.signals, &cfg)?) } else { None };
    let reference = Reference { graph: dataset.graph.as_ref(), embeddings: truth_e.as_ref(), active_dims: active };
    let (mut report, mut metrics) = evaluate(&dataset.signals, &fitted, baseline.as_ref(), &reference, spec)?;
    if let Some(a) = achieved {
        metrics.insert("achieved_sdor".into(), a);
    }
    report.provenance.insert("seed".into(), seed.to_string());
    report.provenance.insert(
        "solver".into(),
        serde_json::to_string(&cfg).map_err(|e| HarnessError::Config(e.to_string()))?,
    );
    metrics.insert("objective".into(), *fitted.objective_trace.last().unwrap_or(&f64::NAN));
    let row = TrialRow {
        seed,
        metrics,
        converged: fitted.converged(),
        outer_iterations: fitted.objective_trace.len(),
        error: None,
        diverged: false,
        runtime_secs: start.elapsed().as_secs_f64(),
    };
    Ok((row, TrialArtifacts { dataset, fit: fitted, report }))
}

pub fn run_trial(spec: &ExperimentSpec, seed: u64, files: Option<&Dataset>) -> TrialOutput {
    let start = Instant::now();
    match trial_inner(spec, seed, files) {
        Ok((row, art)) => TrialOutput { row, artifacts: Some(art) },
        Err(e) => TrialOutput {
            row: TrialRow {
                seed,
                metrics: BTreeMap::new(),
                converged: false,
                outer_iterations: 0,
                diverged: matches!(e, HarnessError::Core(hgsl_core::Error::Divergence { .. })),
                error: Some(e.to_string()),
                runtime_secs: start.elapsed().as_secs_f64(),
            },
            artifacts: None,
        },
    }
}

/// Runs the given seeds in parallel; rows come back sorted by seed.
pub fn run_seeds(spec: &ExperimentSpec, seeds: &[u64]) -> Result<(ResultTable, Vec<TrialOutput>)> {
    spec.validate()?;
    let files = match &spec.dataset {
        DatasetSource::Files(p) => Some(io::load_dataset(p)?),
        DatasetSource::Synthetic { .. } => None,
    };
    let mut outputs: Vec<TrialOutput> = seeds.par_iter().map(|&s| run_trial(spec, s, files.as_ref())).collect();
    outputs.sort_by_key(|o| o.row.seed);
    let table = ResultTable::from_rows(outputs.iter().map(|o| o.row.clone()).collect());
    if table.failures() == table.rows.len() {
        return Err(HarnessError::AllTrialsFailed {
            trials: table.rows.len(),
            divergent: table.rows.iter().all(|r| r.diverged),
            first: table.rows[0].error.clone().unwrap_or_default(),
        });
    }
    Ok((table, outputs))
}

/// Runs seeds `base_seed..base_seed + trials` and writes every artifact when
/// an output directory is set.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ResultTable> {
    let (table, outputs) = run_seeds(spec, &spec.seeds())?;
    if let Some(dir) = &spec.output_dir {
        write_experiment(dir, spec, &table, &outputs)?;
    }
    Ok(table)
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| x.to_string())
}

pub fn write_table(dir: &Path, table: &ResultTable) -> Result<()> {
    let keys: Vec<&String> = table.aggregate.keys().collect();
    let path = dir.join("results.csv");
    let mut w = csv::Writer::from_path(&path).map_err(|e| HarnessError::file(&path, e.to_string()))?;
    let mut head = vec!["seed".to_string(), "converged".into(), "outer_iterations".into(), "error".into()];
    head.extend(keys.iter().map(|k| k.to_string()));
    w.write_record(&head).map_err(|e| HarnessError::file(&path, e.to_string()))?;
    for r in &table.rows {
        let mut rec = vec![
            r.seed.to_string(),
            r.converged.to_string(),
            r.outer_iterations.to_string(),
            r.error.clone().unwrap_or_default(),
        ];
        rec.extend(keys.iter().map(|k| fmt_opt(r.metrics.get(*k).copied())));
        w.write_record(&rec).map_err(|e| HarnessError::file(&path, e.to_string()))?;
    }
    w.flush().map_err(|e| HarnessError::io(&path, e))?;

    let path = dir.join("aggregate.csv");
    let mut w = csv::Writer::from_path(&path).map_err(|e| HarnessError::file(&path, e.to_string()))?;
    w.write_record(["metric", "mean", "std", "count"]).map_err(|e| HarnessError::file(&path, e.to_string()))?;
    for (k, a) in &table.aggregate {
        w.write_record([k.clone(), a.mean.to_string(), fmt_opt(a.std), a.count.to_string()])
            .map_err(|e| HarnessError::file(&path, e.to_string()))?;
    }
    w.flush().map_err(|e| HarnessError::io(&path, e))?;

    // Wall-clock kept apart so the files above are reproducible byte for byte.
    let path = dir.join("timing.csv");
    let mut w = csv::Writer::from_path(&path).map_err(|e| HarnessError::file(&path, e.to_string()))?;
    w.write_record(["seed", "runtime_secs"]).map_err(|e| HarnessError::file(&path, e.to_string()))?;
    for r in &table.rows {
        w.write_record([r.seed.to_string(), r.runtime_secs.to_string()])
            .map_err(|e| HarnessError::file(&path, e.to_string()))?;
    }
    w.flush().map_err(|e| HarnessError::io(&path, e))
}

pub fn write_experiment(dir: &Path, spec: &ExperimentSpec, table: &ResultTable, outputs: &[TrialOutput]) -> Result<()> {
    io::create_dir(dir)?;
    io::write_json(&dir.join("resolved_spec.json"), spec)?;
    write_table(dir, table)?;
    for out in outputs {
        if let Some(a) = &out.artifacts {
            let tdir = dir.join("trials").join(format!("seed_{}", out.row.seed));
            io::save_result(&tdir, &a.dataset, &a.fit, &a.report, spec.threshold)?;
        }
    }
    Ok(())
}
