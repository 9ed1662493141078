//! Text formats: `nodes.csv`, `edges.csv`, `features.csv`, `schema.json` in,
//! `learned_edges.csv`, `embeddings.csv`, `metrics.json` out.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use hgsl_core::graph::{
    tensor_from_weights, Edge, HeteroGraph, NodeTypeSet, RelationEmbeddings, RelationSchema, SignalMatrix,
};
use hgsl_core::metrics::EvalReport;
use hgsl_core::solver::FitResult;
use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

/// `schema.json`: type name → class count, relation name → [type, type].
/// Declaration order is preserved and fixes relation indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemaFile {
    pub node_types: IndexMap<String, usize>,
    pub relations: IndexMap<String, (String, String)>,
}

impl SchemaFile {
    pub fn to_schema(&self) -> Result<RelationSchema> {
        let types = NodeTypeSet::new(self.node_types.iter().map(|(k, v)| (k.clone(), *v)))?;
        let rels: Vec<(&str, &str, &str)> = self
            .relations
            .iter()
            .map(|(name, (a, b))| (name.as_str(), a.as_str(), b.as_str()))
            .collect();
        Ok(RelationSchema::new(types, &rels)?)
    }

    pub fn from_schema(schema: &RelationSchema) -> Self {
        let nt = schema.node_types();
        Self {
            node_types: (0..nt.len()).map(|t| (nt.name(t).to_string(), nt.class_count(t))).collect(),
            relations: schema
                .relations()
                .iter()
                .map(|r| {
                    let (a, b) = r.endpoints;
                    (r.name.clone(), (nt.name(a).to_string(), nt.name(b).to_string()))
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetPaths {
    pub nodes: PathBuf,
    #[serde(default)]
    pub edges: Option<PathBuf>,
    pub features: PathBuf,
    pub schema: PathBuf,
}

impl DatasetPaths {
    /// Standard file names in `dir`; `edges.csv` only if present.
    pub fn in_dir(dir: impl AsRef<Path>) -> Self {
        let dir = dir.as_ref();
        let edges = dir.join("edges.csv");
        Self {
            nodes: dir.join("nodes.csv"),
            edges: edges.exists().then_some(edges),
            features: dir.join("features.csv"),
            schema: dir.join("schema.json"),
        }
    }

    pub fn check_exist(&self) -> Result<()> {
        let mut all = vec![&self.nodes, &self.features, &self.schema];
        all.extend(self.edges.iter());
        for p in all {
            if !p.is_file() {
                return Err(HarnessError::file(p, "file not found"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub schema: RelationSchema,
    pub node_ids: Vec<String>,
    pub node_types: Vec<usize>,
    pub labels: Option<Vec<usize>>,
    /// Present when an edge file was supplied.
    pub graph: Option<HeteroGraph>,
    pub signals: SignalMatrix,
}

impl Dataset {
    pub fn num_nodes(&self) -> usize {
        self.node_ids.len()
    }

    /// Graph with labels attached, or an edgeless one when no edge file was given.
    pub fn labelled_graph(&self) -> Result<HeteroGraph> {
        let g = match &self.graph {
            Some(g) => g.clone(),
            None => HeteroGraph::new(&self.schema, self.node_types.clone(), None, vec![])?,
        };
        Ok(match &self.labels {
            Some(l) => g.with_labels(&self.schema, l.clone())?,
            None => g,
        })
    }
}

fn reader(path: &Path) -> Result<csv::Reader<fs::File>> {
    csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_error(path, e))
}

fn writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    csv::Writer::from_path(path).map_err(|e| csv_error(path, e))
}

fn csv_error(path: &Path, e: csv::Error) -> HarnessError {
    let line = e.position().map(|p| p.line());
    match line {
        Some(line) => HarnessError::Row { path: path.into(), line, message: e.to_string() },
        None => HarnessError::file(path, e.to_string()),
    }
}

fn row_error(path: &Path, rec: &csv::StringRecord, message: impl Into<String>) -> HarnessError {
    HarnessError::Row {
        path: path.into(),
        line: rec.position().map_or(0, |p| p.line()),
        message: message.into(),
    }
}

fn headers(path: &Path, rdr: &mut csv::Reader<fs::File>) -> Result<Vec<String>> {
    Ok(rdr
        .headers()
        .map_err(|e| csv_error(path, e))?
        .iter()
        .map(str::to_string)
        .collect())
}

fn expect_headers(path: &Path, got: &[String], want: &[&str]) -> Result<()> {
    if got.len() != want.len() || got.iter().zip(want).any(|(a, b)| a != b) {
        return Err(HarnessError::file(
            path,
            format!("header must be `{}`, found `{}`", want.join(","), got.join(",")),
        ));
    }
    Ok(())
}

fn parse_f64(path: &Path, rec: &csv::StringRecord, col: usize, what: &str) -> Result<f64> {
    let raw = rec.get(col).unwrap_or("");
    raw.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| row_error(path, rec, format!("{what} `{raw}` is not a finite number")))
}

pub fn load_schema(path: &Path) -> Result<RelationSchema> {
    let text = fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    let file: SchemaFile =
        serde_json::from_str(&text).map_err(|e| HarnessError::file(path, e.to_string()))?;
    file.to_schema()
}

struct Nodes {
    ids: Vec<String>,
    types: Vec<usize>,
    labels: Option<Vec<usize>>,
}

fn load_nodes(path: &Path, schema: &RelationSchema) -> Result<Nodes> {
    let mut rdr = reader(path)?;
    let h = headers(path, &mut rdr)?;
    let labelled = h.len() == 3;
    if labelled {
        expect_headers(path, &h, &["id", "type", "label"])?;
    } else {
        expect_headers(path, &h, &["id", "type"])?;
    }
    let nt = schema.node_types();
    let mut seen = HashMap::new();
    let (mut ids, mut types, mut labels) = (Vec::new(), Vec::new(), Vec::new());
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        let id = rec.get(0).unwrap_or("").to_string();
        if id.is_empty() {
            return Err(row_error(path, &rec, "empty node id"));
        }
        if seen.insert(id.clone(), ()).is_some() {
            return Err(row_error(path, &rec, format!("duplicate node id `{id}`")));
        }
        let tname = rec.get(1).unwrap_or("");
        let t = nt
            .index_of(tname)
            .ok_or_else(|| row_error(path, &rec, format!("unknown node type `{tname}`")))?;
        if labelled {
            let raw = rec.get(2).unwrap_or("");
            let label = if raw.is_empty() && nt.class_count(t) == 1 {
                0
            } else {
                raw.parse::<usize>()
                    .ok()
                    .filter(|&c| c < nt.class_count(t))
                    .ok_or_else(|| {
                        row_error(
                            path,
                            &rec,
                            format!("label `{raw}` is not a class of `{tname}` (0..{})", nt.class_count(t)),
                        )
                    })?
            };
            labels.push(label);
        }
        ids.push(id);
        types.push(t);
    }
    Ok(Nodes { ids, types, labels: labelled.then_some(labels) })
}

fn load_edges(path: &Path, schema: &RelationSchema, nodes: &Nodes) -> Result<HeteroGraph> {
    let mut rdr = reader(path)?;
    let h = headers(path, &mut rdr)?;
    expect_headers(path, &h, &["u", "v", "relation", "weight"])?;
    let index: HashMap<&str, usize> = nodes.ids.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
    let mut pairs = HashMap::new();
    let mut edges = Vec::new();
    let nt = schema.node_types();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        let node = |col: usize| -> Result<usize> {
            let id = rec.get(col).unwrap_or("");
            index
                .get(id)
                .copied()
                .ok_or_else(|| row_error(path, &rec, format!("unknown node id `{id}`")))
        };
        let (u, v) = (node(0)?, node(1)?);
        if u == v {
            return Err(row_error(path, &rec, "self-loop"));
        }
        let rname = rec.get(2).unwrap_or("");
        let r = schema
            .relation_index(rname)
            .ok_or_else(|| row_error(path, &rec, format!("unknown relation `{rname}`")))?;
        let (tu, tv) = (nodes.types[u], nodes.types[v]);
        if !schema.admissible(tu, tv, r) {
            return Err(row_error(
                path,
                &rec,
                format!("relation `{rname}` not allowed between `{}` and `{}`", nt.name(tu), nt.name(tv)),
            ));
        }
        let weight = parse_f64(path, &rec, 3, "weight")?;
        if weight <= 0.0 {
            return Err(row_error(path, &rec, format!("weight {weight} must be positive")));
        }
        let line = rec.position().map_or(0, |p| p.line());
        if let Some(first) = pairs.insert((u.min(v), u.max(v)), line) {
            return Err(row_error(path, &rec, format!("duplicate edge for pair already given on line {first}")));
        }
        edges.push(Edge { u, v, relation: r, weight });
    }
    Ok(HeteroGraph::new(schema, nodes.types.clone(), None, edges)?)
}

fn load_features(path: &Path, nodes: &Nodes) -> Result<SignalMatrix> {
    let mut rdr = reader(path)?;
    let h = headers(path, &mut rdr)?;
    let k = h.len().saturating_sub(1);
    let want: Vec<String> = std::iter::once("id".to_string()).chain((0..k).map(|i| format!("f{i}"))).collect();
    let want_ref: Vec<&str> = want.iter().map(String::as_str).collect();
    expect_headers(path, &h, &want_ref)?;
    if k == 0 {
        return Err(HarnessError::file(path, "no feature columns"));
    }
    let index: HashMap<&str, usize> = nodes.ids.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
    let n = nodes.ids.len();
    let mut data = vec![0.0; n * k];
    let mut filled = vec![false; n];
    let mut rows = 0;
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        rows += 1;
        let id = rec.get(0).unwrap_or("");
        let Some(&i) = index.get(id) else {
            return Err(row_error(path, &rec, format!("unknown node id `{id}`")));
        };
        if filled[i] {
            return Err(row_error(path, &rec, format!("duplicate feature row for `{id}`")));
        }
        filled[i] = true;
        for d in 0..k {
            data[i * k + d] = parse_f64(path, &rec, d + 1, &format!("f{d}"))?;
        }
    }
    if rows != n {
        return Err(HarnessError::file(path, format!("{rows} feature rows for {n} nodes")));
    }
    Ok(SignalMatrix::new(n, k, data)?)
}

pub fn load_dataset(paths: &DatasetPaths) -> Result<Dataset> {
    paths.check_exist()?;
    let schema = load_schema(&paths.schema)?;
    let nodes = load_nodes(&paths.nodes, &schema)?;
    let graph = match &paths.edges {
        Some(p) => Some(load_edges(p, &schema, &nodes)?),
        None => None,
    };
    let signals = load_features(&paths.features, &nodes)?;
    Ok(Dataset {
        schema,
        node_ids: nodes.ids,
        node_types: nodes.types,
        labels: nodes.labels,
        graph,
        signals,
    })
}

fn write_rows(path: &Path, header: &[String], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(header).map_err(|e| csv_error(path, e))?;
    for row in rows {
        w.write_record(&row).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| HarnessError::io(path, e))
}

fn header(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

fn feature_header(first: &str, k: usize) -> Vec<String> {
    std::iter::once(first.to_string()).chain((0..k).map(|i| format!("f{i}"))).collect()
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| HarnessError::file(path, e.to_string()))?;
    fs::write(path, text + "\n").map_err(|e| HarnessError::io(path, e))
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| HarnessError::file(path, e.to_string()))
}

pub fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))
}

fn write_edges(path: &Path, ids: &[String], schema: &RelationSchema, graph: &HeteroGraph) -> Result<()> {
    write_rows(
        path,
        &header(&["u", "v", "relation", "weight"]),
        graph.edges().iter().map(|e| {
            vec![
                ids[e.u].clone(),
                ids[e.v].clone(),
                schema.relation(e.relation).name.clone(),
                e.weight.to_string(),
            ]
        }),
    )
}

pub fn save_embeddings(path: &Path, schema: &RelationSchema, e: &RelationEmbeddings) -> Result<()> {
    write_rows(
        path,
        &feature_header("relation", e.ncols()),
        (0..e.nrows()).map(|r| {
            std::iter::once(schema.relation(r).name.clone())
                .chain(e.row(r).iter().map(f64::to_string))
                .collect()
        }),
    )
}

pub fn load_embeddings(path: &Path, schema: &RelationSchema) -> Result<RelationEmbeddings> {
    let mut rdr = reader(path)?;
    let h = headers(path, &mut rdr)?;
    let k = h.len().saturating_sub(1);
    let want = feature_header("relation", k);
    expect_headers(path, &h, &want.iter().map(String::as_str).collect::<Vec<_>>())?;
    let nr = schema.num_relations();
    let mut rows: Vec<Option<Vec<f64>>> = vec![None; nr];
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        let name = rec.get(0).unwrap_or("");
        let r = schema
            .relation_index(name)
            .ok_or_else(|| row_error(path, &rec, format!("unknown relation `{name}`")))?;
        let vals = (0..k).map(|d| parse_f64(path, &rec, d + 1, &format!("f{d}"))).collect::<Result<Vec<_>>>()?;
        rows[r] = Some(vals);
    }
    let rows = rows
        .into_iter()
        .enumerate()
        .map(|(r, v)| v.ok_or_else(|| HarnessError::file(path, format!("missing relation `{}`", schema.relation(r).name))))
        .collect::<Result<Vec<_>>>()?;
    Ok(RelationEmbeddings::from_rows(&rows)?)
}

pub fn save_dataset(ds: &Dataset, dir: &Path) -> Result<()> {
    create_dir(dir)?;
    write_json(&dir.join("schema.json"), &SchemaFile::from_schema(&ds.schema))?;
    let nt = ds.schema.node_types();
    let mut nodes_header = header(&["id", "type"]);
    if ds.labels.is_some() {
        nodes_header.push("label".into());
    }
    write_rows(
        &dir.join("nodes.csv"),
        &nodes_header,
        (0..ds.num_nodes()).map(|i| {
            let mut row = vec![ds.node_ids[i].clone(), nt.name(ds.node_types[i]).to_string()];
            if let Some(l) = &ds.labels {
                row.push(l[i].to_string());
            }
            row
        }),
    )?;
    if let Some(g) = &ds.graph {
        write_edges(&dir.join("edges.csv"), &ds.node_ids, &ds.schema, g)?;
    }
    let x = &ds.signals;
    write_rows(
        &dir.join("features.csv"),
        &feature_header("id", x.ncols()),
        (0..x.nrows()).map(|i| {
            std::iter::once(ds.node_ids[i].clone())
                .chain(x.row(i).iter().map(f64::to_string))
                .collect()
        }),
    )
}

/// Every candidate scoring above `threshold`: `weight` is the extracted
/// graph's weight (0 where a stronger relation won the pair), `score` the raw
/// learned value.
pub fn save_result(dir: &Path, ds: &Dataset, fit: &FitResult, report: &EvalReport, threshold: f64) -> Result<()> {
    create_dir(dir)?;
    let extracted = tensor_from_weights(&fit.candidates, &fit.w, threshold)?;
    let kept: HashMap<(usize, usize, usize), f64> = extracted
        .graph
        .edges()
        .iter()
        .map(|e| ((e.u, e.v, e.relation), e.weight))
        .collect();
    let rows = fit
        .candidates
        .triples()
        .iter()
        .zip(&fit.w)
        .filter(|(_, &w)| w > threshold)
        .map(|(c, &w)| {
            let weight = kept.get(&(c.u, c.v, c.relation)).copied().unwrap_or(0.0);
            vec![
                ds.node_ids[c.u].clone(),
                ds.node_ids[c.v].clone(),
                ds.schema.relation(c.relation).name.clone(),
                weight.to_string(),
                w.to_string(),
            ]
        });
    write_rows(&dir.join("learned_edges.csv"), &header(&["u", "v", "relation", "weight", "score"]), rows)?;
    save_embeddings(&dir.join("embeddings.csv"), &ds.schema, &fit.embeddings)?;
    write_json(&dir.join("metrics.json"), report)
}

/// Scores from a `learned_edges.csv` laid out over `ds`'s candidates;
/// candidates absent from the file score 0.
pub fn load_scores(path: &Path, ds: &Dataset, candidates: &hgsl_core::graph::CandidateEdgeSet) -> Result<Vec<f64>> {
    let mut rdr = reader(path)?;
    let h = headers(path, &mut rdr)?;
    expect_headers(path, &h, &["u", "v", "relation", "weight", "score"])?;
    let index: HashMap<&str, usize> = ds.node_ids.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
    let mut w = vec![0.0; candidates.len()];
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        let node = |col: usize| -> Result<usize> {
            let id = rec.get(col).unwrap_or("");
            index.get(id).copied().ok_or_else(|| row_error(path, &rec, format!("unknown node id `{id}`")))
        };
        let (u, v) = (node(0)?, node(1)?);
        let rname = rec.get(2).unwrap_or("");
        let r = ds
            .schema
            .relation_index(rname)
            .ok_or_else(|| row_error(path, &rec, format!("unknown relation `{rname}`")))?;
        let i = candidates
            .index_of(u.min(v), u.max(v), r)
            .ok_or_else(|| row_error(path, &rec, "not a schema-admissible candidate"))?;
        w[i] = parse_f64(path, &rec, 4, "score")?;
    }
    Ok(w)
}
