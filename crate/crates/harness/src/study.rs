//! SDOR sweep and relaxed-homophily vs. AUC correlation.

use std::collections::VecDeque;
use std::path::Path;

use hgsl_core::dgp::{make_embeddings_with_sdor, rng_from_seed, SdorTarget};
use hgsl_core::graph::{Edge, HeteroGraph};
use hgsl_core::metrics::{auc_edge_type, relaxed_homophily_ratio, MetaPath};
use hgsl_core::solver::{fit, SolverConfig};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};
use crate::experiment::{run_seeds, write_experiment, DatasetSource, ExperimentSpec};
use crate::io::{self, Dataset};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SdorRow {
    pub target: f64,
    pub achieved: Option<f64>,
    pub hgsl_auc: Option<f64>,
    pub hgsl_auc_std: Option<f64>,
    pub baseline_auc: Option<f64>,
    pub baseline_auc_std: Option<f64>,
    /// (HGSL − baseline) / baseline.
    pub relative_gain: Option<f64>,
    pub note: Option<String>,
}

/// One experiment per target with the base seeds; infeasible targets are
/// skipped with a note.
pub fn sdor_sweep(base: &ExperimentSpec, grid: &[f64]) -> Result<Vec<SdorRow>> {
    let DatasetSource::Synthetic { schema, params } = &base.dataset else {
        return Err(HarnessError::Config("SDOR sweep needs a synthetic dataset".into()));
    };
    if schema.to_schema()?.num_relations() != 2 {
        return Err(HarnessError::Config("SDOR sweep needs exactly two relations".into()));
    }
    let mut rows = Vec::new();
    for &target in grid {
        let mut p = params.clone();
        p.sdor = vec![SdorTarget { a: 0, b: 1, target }];
        let blank = SdorRow {
            target,
            achieved: None,
            hgsl_auc: None,
            hgsl_auc_std: None,
            baseline_auc: None,
            baseline_auc_std: None,
            relative_gain: None,
            note: None,
        };
        if let Err(e) = make_embeddings_with_sdor(p.num_dims, p.active_dims, 2, &p.sdor, p.magnitude, base.base_seed) {
            rows.push(SdorRow { note: Some(e.to_string()), ..blank });
            continue;
        }
        let spec = ExperimentSpec {
            dataset: DatasetSource::Synthetic { schema: schema.clone(), params: p },
            baseline: true,
            output_dir: base.output_dir.as_ref().map(|d| d.join(format!("sdor_{target}"))),
            ..base.clone()
        };
        let (table, outputs) = match run_seeds(&spec, &spec.seeds()) {
            Ok(v) => v,
            Err(HarnessError::AllTrialsFailed { .. }) => {
                rows.push(SdorRow { note: Some("all trials failed".into()), ..blank });
                continue;
            }
            Err(e) => return Err(e),
        };
        if let Some(dir) = &spec.output_dir {
            write_experiment(dir, &spec, &table, &outputs)?;
        }
        let agg = |k: &str| table.aggregate.get(k).copied();
        let (h, b) = (agg("auc"), agg("baseline_auc"));
        rows.push(SdorRow {
            achieved: agg("achieved_sdor").map(|a| a.mean),
            hgsl_auc: h.map(|a| a.mean),
            hgsl_auc_std: h.and_then(|a| a.std),
            baseline_auc: b.map(|a| a.mean),
            baseline_auc_std: b.and_then(|a| a.std),
            relative_gain: h.zip(b).map(|(h, b)| (h.mean - b.mean) / b.mean),
            note: (table.failures() > 0).then(|| format!("{} failed trials", table.failures())),
            ..blank
        });
    }
    Ok(rows)
}

pub fn write_sdor_table(path: &Path, rows: &[SdorRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| HarnessError::file(path, e.to_string()))?;
    let o = |v: Option<f64>| v.map_or_else(String::new, |x| x.to_string());
    w.write_record([
        "target",
        "achieved",
        "hgsl_auc",
        "hgsl_auc_std",
        "baseline_auc",
        "baseline_auc_std",
        "relative_gain",
        "note",
    ])
    .map_err(|e| HarnessError::file(path, e.to_string()))?;
    for r in rows {
        w.write_record([
            r.target.to_string(),
            o(r.achieved),
            o(r.hgsl_auc),
            o(r.hgsl_auc_std),
            o(r.baseline_auc),
            o(r.baseline_auc_std),
            o(r.relative_gain),
            r.note.clone().unwrap_or_default(),
        ])
        .map_err(|e| HarnessError::file(path, e.to_string()))?;
    }
    w.flush().map_err(|e| HarnessError::io(path, e))
}

/// Pearson r; `(0, true)` when either side has zero variance.
pub fn pearson(x: &[f64], y: &[f64]) -> (f64, bool) {
    let n = x.len().min(y.len());
    if n < 2 {
        return (0.0, true);
    }
    let constant = |v: &[f64]| v.iter().all(|&a| a == v[0]);
    if constant(&x[..n]) || constant(&y[..n]) {
        return (0.0, true);
    }
    let mx = x[..n].iter().sum::<f64>() / n as f64;
    let my = y[..n].iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for i in 0..n {
        let (dx, dy) = (x[i] - mx, y[i] - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    (sxy / (sxx * syy).sqrt(), false)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SubsampleParams {
    pub subgraphs: usize,
    pub min_nodes: usize,
    pub max_nodes: usize,
    pub seed: u64,
}

impl Default for SubsampleParams {
    fn default() -> Self {
        Self { subgraphs: 30, min_nodes: 50, max_nodes: 200, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RhrPoint {
    pub root: usize,
    pub nodes: usize,
    pub rhr: f64,
    pub auc: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RhrStudy {
    /// Subsampling scheme, always `bfs-ball`.
    pub method: String,
    pub metapath: String,
    pub points: Vec<RhrPoint>,
    pub skipped_undefined: usize,
    pub skipped_failed: usize,
    pub pearson: f64,
    pub degenerate: bool,
}

/// First `size` nodes reached by BFS from `root`, neighbours in index order.
pub fn bfs_ball(graph: &HeteroGraph, root: usize, size: usize) -> Vec<usize> {
    let n = graph.num_nodes();
    let mut adj = vec![Vec::new(); n];
    for e in graph.edges() {
        adj[e.u].push(e.v);
        adj[e.v].push(e.u);
    }
    adj.iter_mut().for_each(|a| a.sort_unstable());
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([root]);
    seen[root] = true;
    let mut out = Vec::new();
    while let Some(v) = queue.pop_front() {
        out.push(v);
        if out.len() == size {
            break;
        }
        for &nb in &adj[v] {
            if !seen[nb] {
                seen[nb] = true;
                queue.push_back(nb);
            }
        }
    }
    out.sort_unstable();
    out
}

/// Node-induced sub-dataset on `nodes` (sorted).
pub fn induced(ds: &Dataset, nodes: &[usize]) -> Result<Dataset> {
    let mut pos = vec![usize::MAX; ds.num_nodes()];
    for (i, &v) in nodes.iter().enumerate() {
        pos[v] = i;
    }
    let types: Vec<usize> = nodes.iter().map(|&v| ds.node_types[v]).collect();
    let graph = match &ds.graph {
        Some(g) => {
            let edges = g
                .edges()
                .iter()
                .filter(|e| pos[e.u] != usize::MAX && pos[e.v] != usize::MAX)
                .map(|e| Edge { u: pos[e.u], v: pos[e.v], ..*e })
                .collect();
            Some(HeteroGraph::new(&ds.schema, types.clone(), None, edges)?)
        }
        None => None,
    };
    Ok(Dataset {
        schema: ds.schema.clone(),
        node_ids: nodes.iter().map(|&v| ds.node_ids[v].clone()).collect(),
        node_types: types,
        labels: ds.labels.as_ref().map(|l| nodes.iter().map(|&v| l[v]).collect()),
        graph,
        signals: ds.signals.select_rows(nodes),
    })
}

enum Outcome {
    Point(RhrPoint),
    Undefined,
    Failed,
}

pub fn rhr_correlation_study(
    ds: &Dataset,
    metapath: &str,
    sub: &SubsampleParams,
    cfg: &SolverConfig,
) -> Result<RhrStudy> {
    let graph = ds
        .graph
        .as_ref()
        .ok_or_else(|| HarnessError::Config("RHR study needs an edge file".into()))?;
    if ds.labels.is_none() {
        return Err(HarnessError::Config("RHR study needs node labels".into()));
    }
    if sub.subgraphs == 0 || sub.min_nodes < 2 || sub.min_nodes > sub.max_nodes {
        return Err(HarnessError::Config(format!(
            "need at least one subgraph and 2 <= min_nodes <= max_nodes, got {sub:?}"
        )));
    }
    let path = MetaPath::parse(&ds.schema, metapath)?;
    let n = ds.num_nodes();
    let mut rng = rng_from_seed(sub.seed);
    let plan: Vec<(usize, usize)> = (0..sub.subgraphs)
        .map(|_| (rng.random_range(0..n), rng.random_range(sub.min_nodes..=sub.max_nodes.min(n))))
        .collect();
    let outcomes: Vec<Outcome> = plan
        .par_iter()
        .enumerate()
        .map(|(i, &(root, size))| {
            let run = || -> Result<Outcome> {
                let nodes = bfs_ball(graph, root, size);
                let part = induced(ds, &nodes)?;
                let lg = part.labelled_graph()?;
                let Some(rhr) = relaxed_homophily_ratio(&lg, &path)? else {
                    return Ok(Outcome::Undefined);
                };
                let c = SolverConfig { seed: sub.seed + i as u64, ..*cfg };
                let f = fit(&part.signals, &part.node_types, &part.schema, &c)?;
                let auc = auc_edge_type(&lg, &f.candidates, &f.w)?;
                if auc.per_class.is_empty() {
                    return Ok(Outcome::Undefined);
                }
                Ok(Outcome::Point(RhrPoint { root, nodes: nodes.len(), rhr: rhr.value, auc: auc.macro_auc }))
            };
            run().unwrap_or(Outcome::Failed)
        })
        .collect();
    let mut points = Vec::new();
    let (mut undefined, mut failed) = (0, 0);
    for o in outcomes {
        match o {
            Outcome::Point(p) => points.push(p),
            Outcome::Undefined => undefined += 1,
            Outcome::Failed => failed += 1,
        }
    }
    let xs: Vec<f64> = points.iter().map(|p| p.rhr).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.auc).collect();
    let (r, degenerate) = pearson(&xs, &ys);
    Ok(RhrStudy {
        method: "bfs-ball".into(),
        metapath: metapath.into(),
        points,
        skipped_undefined: undefined,
        skipped_failed: failed,
        pearson: r,
        degenerate,
    })
}

pub fn write_rhr_study(dir: &Path, study: &RhrStudy) -> Result<()> {
    io::create_dir(dir)?;
    let path = dir.join("rhr_points.csv");
    let mut w = csv::Writer::from_path(&path).map_err(|e| HarnessError::file(&path, e.to_string()))?;
    w.write_record(["root", "nodes", "rhr", "auc"]).map_err(|e| HarnessError::file(&path, e.to_string()))?;
    for p in &study.points {
        w.write_record([p.root.to_string(), p.nodes.to_string(), p.rhr.to_string(), p.auc.to_string()])
            .map_err(|e| HarnessError::file(&path, e.to_string()))?;
    }
    w.flush().map_err(|e| HarnessError::io(&path, e))?;
    io::write_json(&dir.join("rhr_study.json"), study)
}

#[cfg(test)]
mod tests {
    use hgsl_core::graph::RelationSchema;

    use super::*;

    #[test]
    fn pearson_sign() {
        assert!((pearson(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).0 + 1.0).abs() < 1e-15);
        assert_eq!(pearson(&[2.0, 2.0], &[1.0, 5.0]), (0.0, true));
    }

    #[test]
    fn ball_on_a_path() {
        let s = RelationSchema::from_names(&[("A", 1)], &[("r", "A", "A")]).unwrap();
        let e = |u, v| Edge { u, v, relation: 0, weight: 1.0 };
        let g = HeteroGraph::new(&s, vec![0; 5], None, vec![e(0, 1), e(1, 2), e(2, 3), e(3, 4)]).unwrap();
        assert_eq!(bfs_ball(&g, 2, 3), vec![1, 2, 3]);
        assert_eq!(bfs_ball(&g, 0, 10), vec![0, 1, 2, 3, 4]);
        assert_eq!(bfs_ball(&g, 4, 1), vec![4]);
    }
}
