//! Typed graphs, schema-admissible candidate edges and the node-degree operator.

use std::collections::HashMap;
use std::ops::Range;

use crate::error::{check_len, Error, Result};

/// Node types with their per-type class counts.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeTypeSet {
    names: Vec<String>,
    class_counts: Vec<usize>,
}

impl NodeTypeSet {
    pub fn new<S: Into<String>>(entries: impl IntoIterator<Item = (S, usize)>) -> Result<Self> {
        let mut names = Vec::new();
        let mut class_counts = Vec::new();
        for (name, count) in entries {
            let name = name.into();
            if name.is_empty() {
                return Err(Error::Param("empty node type name".into()));
            }
            if names.contains(&name) {
                return Err(Error::Param(format!("duplicate node type `{name}`")));
            }
            if count == 0 {
                return Err(Error::Param(format!("node type `{name}` has zero classes")));
            }
            names.push(name);
            class_counts.push(count);
        }
        Ok(Self { names, class_counts })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, t: usize) -> &str {
        &self.names[t]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn class_count(&self, t: usize) -> usize {
        self.class_counts[t]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Relation {
    pub name: String,
    /// Endpoint types as declared; orientation fixes the row/column types of B_r.
    pub endpoints: (usize, usize),
}

fn pair_key(a: usize, b: usize) -> (usize, usize) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Relations with their endpoint types, plus the inverse index from an
/// unordered type pair to the relations allowed between them.
#[derive(Debug, Clone, PartialEq)]
pub struct RelationSchema {
    node_types: NodeTypeSet,
    relations: Vec<Relation>,
    index: HashMap<(usize, usize), Vec<usize>>,
}

impl RelationSchema {
    pub fn new<S: AsRef<str>>(node_types: NodeTypeSet, relations: &[(S, S, S)]) -> Result<Self> {
        let mut rels: Vec<Relation> = Vec::with_capacity(relations.len());
        for (name, a, b) in relations {
            let name = name.as_ref();
            if name.is_empty() {
                return Err(Error::Param("empty relation name".into()));
            }
            if rels.iter().any(|r| r.name == name) {
                return Err(Error::Param(format!("duplicate relation `{name}`")));
            }
            let lookup = |t: &str| {
                node_types.index_of(t).ok_or_else(|| {
                    Error::SchemaMismatch(format!("relation `{name}` uses unknown node type `{t}`"))
                })
            };
            let ends = (lookup(a.as_ref())?, lookup(b.as_ref())?);
            rels.push(Relation {
                name: name.to_string(),
                endpoints: ends,
            });
        }
        Ok(Self::from_parts(node_types, rels))
    }

    /// Shorthand for tests and examples: `(type, classes)` and `(relation, a, b)` lists.
    pub fn from_names(types: &[(&str, usize)], relations: &[(&str, &str, &str)]) -> Result<Self> {
        let nt = NodeTypeSet::new(types.iter().map(|(n, c)| (*n, *c)))?;
        Self::new(nt, relations)
    }

    fn from_parts(node_types: NodeTypeSet, relations: Vec<Relation>) -> Self {
        let index = build_index(&relations);
        Self {
            node_types,
            relations,
            index,
        }
    }

    pub fn node_types(&self) -> &NodeTypeSet {
        &self.node_types
    }

    pub fn relations(&self) -> &[Relation] {
        &self.relations
    }

    pub fn num_relations(&self) -> usize {
        self.relations.len()
    }

    pub fn relation(&self, r: usize) -> &Relation {
        &self.relations[r]
    }

    pub fn relation_index(&self, name: &str) -> Option<usize> {
        self.relations.iter().position(|r| r.name == name)
    }

    /// ℛ_{a,b}, in declaration order.
    pub fn relations_between(&self, a: usize, b: usize) -> &[usize] {
        self.index.get(&pair_key(a, b)).map_or(&[], |v| v.as_slice())
    }

    pub fn admissible(&self, a: usize, b: usize, r: usize) -> bool {
        self.relations_between(a, b).contains(&r)
    }

    /// Node types that take part in no relation.
    pub fn isolated_types(&self) -> Vec<usize> {
        (0..self.node_types.len())
            .filter(|&t| {
                !self
                    .relations
                    .iter()
                    .any(|r| r.endpoints.0 == t || r.endpoints.1 == t)
            })
            .collect()
    }

    /// Rebuilds the inverse index from the endpoint map and compares.
    pub fn is_consistent(&self) -> bool {
        build_index(&self.relations) == self.index
            && self.relations.iter().enumerate().all(|(r, rel)| {
                self.index
                    .iter()
                    .filter(|(_, rs)| rs.contains(&r))
                    .map(|(k, _)| *k)
                    .collect::<Vec<_>>()
                    == vec![pair_key(rel.endpoints.0, rel.endpoints.1)]
            })
    }
}

fn build_index(relations: &[Relation]) -> HashMap<(usize, usize), Vec<usize>> {
    let mut index: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
    for (r, rel) in relations.iter().enumerate() {
        index
            .entry(pair_key(rel.endpoints.0, rel.endpoints.1))
            .or_default()
            .push(r);
    }
    index
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub relation: usize,
    pub weight: f64,
}

/// Typed, optionally labelled, undirected weighted graph. Edges are kept
/// sorted by `(u, v, relation)` with `u < v`.
#[derive(Debug, Clone, PartialEq)]
pub struct HeteroGraph {
    node_types: Vec<usize>,
    labels: Option<Vec<usize>>,
    edges: Vec<Edge>,
}

impl HeteroGraph {
    pub fn new(
        schema: &RelationSchema,
        node_types: Vec<usize>,
        labels: Option<Vec<usize>>,
        edges: Vec<Edge>,
    ) -> Result<Self> {
        let n = node_types.len();
        let nt = schema.node_types();
        for (i, &t) in node_types.iter().enumerate() {
            if t >= nt.len() {
                return Err(Error::SchemaMismatch(format!("node {i} has unknown type {t}")));
            }
        }
        if let Some(l) = &labels {
            check_len("labels", l.len(), n)?;
            for (i, (&c, &t)) in l.iter().zip(&node_types).enumerate() {
                if c >= nt.class_count(t) {
                    return Err(Error::Domain(format!(
                        "node {i}: label {c} out of range for type `{}` ({} classes)",
                        nt.name(t),
                        nt.class_count(t)
                    )));
                }
            }
        }
        let mut edges: Vec<Edge> = edges
            .into_iter()
            .map(|e| {
                if e.u > e.v {
                    Edge { u: e.v, v: e.u, ..e }
                } else {
                    e
                }
            })
            .collect();
        for e in &edges {
            if e.u == e.v {
                return Err(Error::Domain(format!("self-loop on node {}", e.u)));
            }
            if e.v >= n {
                return Err(Error::Dimension(format!(
                    "edge ({}, {}) references node beyond {n}",
                    e.u, e.v
                )));
            }
            if !(e.weight.is_finite() && e.weight > 0.0) {
                return Err(Error::Domain(format!(
                    "edge ({}, {}) has non-positive weight {}",
                    e.u, e.v, e.weight
                )));
            }
            if e.relation >= schema.num_relations()
                || !schema.admissible(node_types[e.u], node_types[e.v], e.relation)
            {
                return Err(Error::SchemaMismatch(format!(
                    "edge ({}, {}) has relation {} not allowed between `{}` and `{}`",
                    e.u,
                    e.v,
                    e.relation,
                    nt.name(node_types[e.u]),
                    nt.name(node_types[e.v])
                )));
            }
        }
        edges.sort_by_key(|e| (e.u, e.v, e.relation));
        for pair in edges.windows(2) {
            if (pair[0].u, pair[0].v) == (pair[1].u, pair[1].v) {
                let what = if pair[0].relation == pair[1].relation {
                    "duplicate edge"
                } else {
                    "several relations on pair"
                };
                return Err(Error::Domain(format!("{what} ({}, {})", pair[0].u, pair[0].v)));
            }
        }
        Ok(Self {
            node_types,
            labels,
            edges,
        })
    }

    pub fn num_nodes(&self) -> usize {
        self.node_types.len()
    }

    pub fn node_types(&self) -> &[usize] {
        &self.node_types
    }

    pub fn labels(&self) -> Option<&[usize]> {
        self.labels.as_deref()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn with_labels(mut self, schema: &RelationSchema, labels: Vec<usize>) -> Result<Self> {
        let edges = std::mem::take(&mut self.edges);
        Self::new(schema, self.node_types, Some(labels), edges)
    }
}

/// Row-major N×K matrix of node signals.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl SignalMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        check_len("signal data", data.len(), rows * cols)?;
        if let Some(i) = data.iter().position(|x| !x.is_finite()) {
            return Err(Error::Domain(format!(
                "non-finite signal at ({}, {})",
                i / cols.max(1),
                i % cols.max(1)
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != cols {
                return Err(Error::Dimension(format!(
                    "signal row {i} has {} entries, expected {cols}",
                    r.len()
                )));
            }
            data.extend_from_slice(r);
        }
        Self::new(rows.len(), cols, data)
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn get(&self, i: usize, k: usize) -> f64 {
        self.data[i * self.cols + k]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x * c).collect(),
        }
    }

    /// Rescales every column to unit sample variance around its mean.
    /// Constant columns are left centred.
    pub fn standardized_columns(&self) -> Self {
        let n = self.rows as f64;
        let mut out = self.data.clone();
        for k in 0..self.cols {
            let mean = (0..self.rows).map(|i| self.get(i, k)).sum::<f64>() / n;
            let var = (0..self.rows)
                .map(|i| (self.get(i, k) - mean).powi(2))
                .sum::<f64>()
                / n;
            let scale = if var > 0.0 { 1.0 / var.sqrt() } else { 1.0 };
            for i in 0..self.rows {
                out[i * self.cols + k] = (self.get(i, k) - mean) * scale;
            }
        }
        Self {
            rows: self.rows,
            cols: self.cols,
            data: out,
        }
    }

    /// Keeps the given rows, in order.
    pub fn select_rows(&self, rows: &[usize]) -> Self {
        let mut data = Vec::with_capacity(rows.len() * self.cols);
        for &i in rows {
            data.extend_from_slice(self.row(i));
        }
        Self {
            rows: rows.len(),
            cols: self.cols,
            data,
        }
    }
}

/// Row-major |ℛ|×K nonnegative matrix of relation embeddings.
#[derive(Debug, Clone, PartialEq)]
pub struct RelationEmbeddings {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl RelationEmbeddings {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        check_len("embedding data", data.len(), rows * cols)?;
        if let Some(i) = data.iter().position(|x| !(x.is_finite() && *x >= 0.0)) {
            return Err(Error::Domain(format!(
                "embedding entry ({}, {}) = {} is not a finite nonnegative number",
                i / cols,
                i % cols,
                data[i]
            )));
        }
        let e = Self { rows, cols, data };
        for r in 0..rows {
            if e.row(r).iter().all(|&x| x == 0.0) {
                return Err(Error::Domain(format!("embedding row {r} is all zero")));
            }
        }
        Ok(e)
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::Dimension("embedding rows differ in length".into()));
        }
        Self::new(rows.len(), cols, rows.concat())
    }

    pub fn uniform(rows: usize, cols: usize, value: f64) -> Self {
        Self {
            rows,
            cols,
            data: vec![value; rows * cols],
        }
    }

    pub(crate) fn from_raw_unchecked(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        Self { rows, cols, data }
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn get(&self, r: usize, k: usize) -> f64 {
        self.data[r * self.cols + k]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Each row scaled to unit Euclidean norm.
    pub fn normalized(&self) -> Self {
        let mut data = self.data.clone();
        for row in data.chunks_mut(self.cols.max(1)) {
            let norm = row.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 0.0 {
                row.iter_mut().for_each(|x| *x /= norm);
            }
        }
        Self::from_raw_unchecked(self.rows, self.cols, data)
    }

    /// Indices of the strictly positive entries of row `r`.
    pub fn support(&self, r: usize) -> Vec<usize> {
        (0..self.cols).filter(|&k| self.get(r, k) > 0.0).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Candidate {
    pub u: usize,
    pub v: usize,
    pub relation: usize,
}

/// The ordered set E′ of admissible `(u, v, r)` triples.
#[derive(Debug, Clone)]
pub struct CandidateEdgeSet {
    node_types: Vec<usize>,
    num_relations: usize,
    triples: Vec<Candidate>,
    lookup: HashMap<Candidate, usize>,
    by_relation: Vec<Vec<usize>>,
    pairs: Vec<(usize, usize, Range<usize>)>,
}

impl CandidateEdgeSet {
    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    pub fn num_nodes(&self) -> usize {
        self.node_types.len()
    }

    pub fn num_relations(&self) -> usize {
        self.num_relations
    }

    pub fn node_types(&self) -> &[usize] {
        &self.node_types
    }

    pub fn triples(&self) -> &[Candidate] {
        &self.triples
    }

    pub fn get(&self, i: usize) -> Candidate {
        self.triples[i]
    }

    pub fn index_of(&self, u: usize, v: usize, relation: usize) -> Option<usize> {
        let (u, v) = pair_key(u, v);
        self.lookup.get(&Candidate { u, v, relation }).copied()
    }

    /// Flat indices of E′_r.
    pub fn relation_slice(&self, r: usize) -> &[usize] {
        &self.by_relation[r]
    }

    /// Node pairs with at least one candidate, with the index range of their triples.
    pub fn pairs(&self) -> &[(usize, usize, Range<usize>)] {
        &self.pairs
    }

    pub fn endpoints(&self) -> Vec<(usize, usize)> {
        self.triples.iter().map(|c| (c.u, c.v)).collect()
    }

    pub fn degree_operator(&self) -> DegreeOperator {
        DegreeOperator::new(self.num_nodes(), self.endpoints())
    }
}

/// All schema-admissible triples in lexicographic `(u, v, r)` order.
pub fn enumerate_candidates(types: &[usize], schema: &RelationSchema) -> Result<CandidateEdgeSet> {
    let nt = schema.node_types().len();
    if let Some(i) = types.iter().position(|&t| t >= nt) {
        return Err(Error::SchemaMismatch(format!(
            "node {i} has type {} outside the schema's {nt} types",
            types[i]
        )));
    }
    let mut triples = Vec::new();
    let mut pairs = Vec::new();
    for u in 0..types.len() {
        for v in u + 1..types.len() {
            let start = triples.len();
            for &r in schema.relations_between(types[u], types[v]) {
                triples.push(Candidate { u, v, relation: r });
            }
            if triples.len() > start {
                pairs.push((u, v, start..triples.len()));
            }
        }
    }
    let lookup = triples.iter().enumerate().map(|(i, c)| (*c, i)).collect();
    let mut by_relation = vec![Vec::new(); schema.num_relations()];
    for (i, c) in triples.iter().enumerate() {
        by_relation[c.relation].push(i);
    }
    Ok(CandidateEdgeSet {
        node_types: types.to_vec(),
        num_relations: schema.num_relations(),
        triples,
        lookup,
        by_relation,
        pairs,
    })
}

/// Maps candidate weights to node degrees: each triple adds its weight to both endpoints.
#[derive(Debug, Clone)]
pub struct DegreeOperator {
    num_nodes: usize,
    endpoints: Vec<(usize, usize)>,
    norm: f64,
}

const POWER_ITERATIONS: usize = 100;
const POWER_TOL: f64 = 1e-9;

impl DegreeOperator {
    pub fn new(num_nodes: usize, endpoints: Vec<(usize, usize)>) -> Self {
        let mut op = Self {
            num_nodes,
            endpoints,
            norm: 0.0,
        };
        op.norm = op.power_norm();
        op
    }

    // Power iteration on T Tᵀ (N×N) with a Rayleigh-quotient estimate.
    fn power_norm(&self) -> f64 {
        if self.endpoints.is_empty() {
            return 0.0;
        }
        let n = self.num_nodes;
        let mut x = vec![1.0 / (n as f64).sqrt(); n];
        let mut w = vec![0.0; self.endpoints.len()];
        let mut y = vec![0.0; n];
        let mut lambda = 0.0;
        for _ in 0..POWER_ITERATIONS {
            self.adjoint_into(&x, &mut w);
            self.apply_into(&w, &mut y);
            let next: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
            let ny = y.iter().map(|v| v * v).sum::<f64>().sqrt();
            if ny == 0.0 {
                break;
            }
            for (xi, yi) in x.iter_mut().zip(&y) {
                *xi = yi / ny;
            }
            let done = (next - lambda).abs() <= POWER_TOL * next.abs();
            lambda = next;
            if done {
                break;
            }
        }
        lambda.max(0.0).sqrt()
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn num_candidates(&self) -> usize {
        self.endpoints.len()
    }

    pub fn endpoints(&self) -> &[(usize, usize)] {
        &self.endpoints
    }

    /// Cached ‖T‖.
    pub fn norm(&self) -> f64 {
        self.norm
    }

    pub fn apply(&self, w: &[f64]) -> Result<Vec<f64>> {
        check_len("weight vector", w.len(), self.endpoints.len())?;
        let mut d = vec![0.0; self.num_nodes];
        self.apply_into(w, &mut d);
        Ok(d)
    }

    pub fn apply_adjoint(&self, d: &[f64]) -> Result<Vec<f64>> {
        check_len("degree vector", d.len(), self.num_nodes)?;
        let mut w = vec![0.0; self.endpoints.len()];
        self.adjoint_into(d, &mut w);
        Ok(w)
    }

    pub(crate) fn apply_into(&self, w: &[f64], d: &mut [f64]) {
        d.iter_mut().for_each(|x| *x = 0.0);
        for (&(u, v), &wi) in self.endpoints.iter().zip(w) {
            d[u] += wi;
            d[v] += wi;
        }
    }

    pub(crate) fn adjoint_into(&self, d: &[f64], w: &mut [f64]) {
        for (wi, &(u, v)) in w.iter_mut().zip(&self.endpoints) {
            *wi = d[u] + d[v];
        }
    }
}

/// Result of thresholding a candidate weight vector back into a graph.
#[derive(Debug, Clone, PartialEq)]
pub struct Extraction {
    pub graph: HeteroGraph,
    /// Pairs where more than one relation exceeded the threshold.
    pub conflicts: usize,
}

pub fn tensor_from_weights(
    candidates: &CandidateEdgeSet,
    w: &[f64],
    threshold: f64,
) -> Result<Extraction> {
    check_len("weight vector", w.len(), candidates.len())?;
    if let Some(i) = w.iter().position(|x| !(*x >= 0.0)) {
        return Err(Error::Domain(format!("weight {i} is negative or NaN: {}", w[i])));
    }
    if !(threshold >= 0.0) {
        return Err(Error::Param(format!("threshold {threshold} must be nonnegative")));
    }
    let mut edges = Vec::new();
    let mut conflicts = 0;
    for (u, v, range) in candidates.pairs() {
        let mut best: Option<usize> = None;
        let mut above = 0;
        for i in range.clone() {
            if w[i] > threshold {
                above += 1;
                if best.is_none_or(|b| w[i] > w[b]) {
                    best = Some(i);
                }
            }
        }
        if above > 1 {
            conflicts += 1;
        }
        if let Some(b) = best {
            edges.push(Edge {
                u: *u,
                v: *v,
                relation: candidates.get(b).relation,
                weight: w[b],
            });
        }
    }
    Ok(Extraction {
        graph: HeteroGraph {
            node_types: candidates.node_types().to_vec(),
            labels: None,
            edges,
        },
        conflicts,
    })
}

/// Half-vectorization of a graph over the candidate layout.
pub fn vectorize(graph: &HeteroGraph, candidates: &CandidateEdgeSet) -> Result<Vec<f64>> {
    check_len("graph nodes", graph.num_nodes(), candidates.num_nodes())?;
    let mut w = vec![0.0; candidates.len()];
    for e in graph.edges() {
        let i = candidates.index_of(e.u, e.v, e.relation).ok_or_else(|| {
            Error::SchemaMismatch(format!(
                "edge ({}, {}, {}) is not a candidate",
                e.u, e.v, e.relation
            ))
        })?;
        w[i] = e.weight;
    }
    Ok(w)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn schema_ab() -> RelationSchema {
        RelationSchema::from_names(
            &[("A", 1), ("B", 1)],
            &[("r1", "A", "B"), ("r2", "A", "B"), ("r3", "A", "A")],
        )
        .unwrap()
    }

    #[test]
    fn enumerate_small_cases() {
        let s = RelationSchema::from_names(&[("A", 1), ("B", 1)], &[("r1", "A", "B")]).unwrap();
        let c = enumerate_candidates(&[0, 1, 0], &s).unwrap();
        let got: Vec<_> = c.triples().iter().map(|t| (t.u, t.v, t.relation)).collect();
        assert_eq!(got, vec![(0, 1, 0), (1, 2, 0)]);
        assert!(enumerate_candidates(&[0, 0], &s).unwrap().is_empty());
        // 4 A–B pairs × 2 relations + 1 A–A pair × 1.
        assert_eq!(enumerate_candidates(&[0, 1, 0, 1], &schema_ab()).unwrap().len(), 9);
        assert!(matches!(
            enumerate_candidates(&[0, 2], &s),
            Err(Error::SchemaMismatch(_))
        ));
    }

    #[test]
    fn schema_index_is_consistent() {
        let s = schema_ab();
        assert!(s.is_consistent());
        assert_eq!(s.relations_between(1, 0), &[0, 1]);
        assert_eq!(s.relations_between(1, 1), &[] as &[usize]);
        assert!(RelationSchema::from_names(&[("A", 1)], &[("r", "A", "A"), ("r", "A", "A")]).is_err());
        assert!(NodeTypeSet::new([("A", 0)]).is_err());
    }

    #[test]
    fn degree_examples() {
        let s = RelationSchema::from_names(&[("A", 1)], &[("r", "A", "A")]).unwrap();
        let op = enumerate_candidates(&[0, 0, 0], &s).unwrap().degree_operator();
        assert_eq!(op.apply(&[1.0, 1.0, 1.0]).unwrap(), vec![2.0, 2.0, 2.0]);
        assert_eq!(op.apply(&[0.0; 3]).unwrap(), vec![0.0; 3]);
        assert!(op.apply(&[1.0]).is_err());

        let c = enumerate_candidates(&[0, 1, 0, 1], &schema_ab()).unwrap();
        let mut w = vec![0.0; c.len()];
        w[0] = 1.0;
        let d = c.degree_operator().apply(&w).unwrap();
        let first = c.get(0);
        for (i, x) in d.iter().enumerate() {
            let expected = if i == first.u || i == first.v { 1.0 } else { 0.0 };
            assert_eq!(*x, expected);
        }
    }

    #[test]
    fn triangle_norm() {
        // T Tᵀ = D + A for the triangle, largest eigenvalue 4.
        let op = DegreeOperator::new(3, vec![(0, 1), (0, 2), (1, 2)]);
        assert!((op.norm() - 2.0).abs() < 1e-9);
        assert_eq!(DegreeOperator::new(3, vec![]).norm(), 0.0);
    }

    #[test]
    fn extraction_examples() {
        let c = enumerate_candidates(&[0, 1, 0, 1], &schema_ab()).unwrap();
        let mut w = vec![0.0; c.len()];
        w[3] = 0.5;
        let ex = tensor_from_weights(&c, &w, 0.0).unwrap();
        assert_eq!(ex.graph.num_edges(), 1);
        assert_eq!(ex.conflicts, 0);

        let below = vec![0.1; c.len()];
        assert_eq!(tensor_from_weights(&c, &below, 0.2).unwrap().graph.num_edges(), 0);

        let i1 = c.index_of(0, 1, 0).unwrap();
        let i2 = c.index_of(0, 1, 1).unwrap();
        let mut w = vec![0.0; c.len()];
        w[i1] = 0.9;
        w[i2] = 0.4;
        let ex = tensor_from_weights(&c, &w, 0.0).unwrap();
        assert_eq!(ex.conflicts, 1);
        assert_eq!(ex.graph.edges()[0].relation, 0);
        assert_eq!(ex.graph.edges()[0].weight, 0.9);

        w[i1] = -0.1;
        assert!(matches!(tensor_from_weights(&c, &w, 0.0), Err(Error::Domain(_))));
    }

    #[test]
    fn extraction_ties_follow_declaration_order() {
        let c = enumerate_candidates(&[0, 1], &schema_ab()).unwrap();
        let ex = tensor_from_weights(&c, &[0.7, 0.7], 0.0).unwrap();
        assert_eq!(ex.graph.edges()[0].relation, 0);
    }

    #[test]
    fn graph_validation() {
        let s = schema_ab();
        let e = |u, v, r, w| Edge { u, v, relation: r, weight: w };
        assert!(HeteroGraph::new(&s, vec![0, 1], None, vec![e(1, 0, 0, 1.0)]).is_ok());
        assert!(HeteroGraph::new(&s, vec![0, 1], None, vec![e(0, 0, 0, 1.0)]).is_err());
        assert!(HeteroGraph::new(&s, vec![0, 1], None, vec![e(0, 1, 2, 1.0)]).is_err());
        assert!(HeteroGraph::new(&s, vec![0, 1], None, vec![e(0, 1, 0, 0.0)]).is_err());
        assert!(HeteroGraph::new(
            &s,
            vec![0, 1],
            None,
            vec![e(0, 1, 0, 1.0), e(0, 1, 1, 1.0)]
        )
        .is_err());
        assert!(HeteroGraph::new(&s, vec![0, 1], Some(vec![0, 1]), vec![]).is_err());
    }

    #[test]
    fn embeddings_validation() {
        assert!(RelationEmbeddings::new(1, 2, vec![0.0, 0.0]).is_err());
        assert!(RelationEmbeddings::new(1, 2, vec![-1.0, 1.0]).is_err());
        let e = RelationEmbeddings::new(1, 2, vec![3.0, 4.0]).unwrap().normalized();
        assert_eq!(e.row(0), &[0.6, 0.8]);
        assert_eq!(e.support(0), vec![0, 1]);
    }
}
