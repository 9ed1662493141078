//! Evaluation: edge-type AUC, graph and embedding errors, homophily measures, SDOR.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::graph::{CandidateEdgeSet, HeteroGraph, RelationEmbeddings, RelationSchema, SignalMatrix};

/// Class-pair connection probabilities B_r (entries sum to one).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConnectivityMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl ConnectivityMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        check_len("connectivity entries", data.len(), rows * cols)?;
        if data.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::Domain("connectivity entries must be finite and nonnegative".into()));
        }
        let total: f64 = data.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::Domain(format!("connectivity entries sum to {total}, not 1")));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::Dimension("connectivity rows differ in length".into()));
        }
        Self::new(rows.len(), cols, rows.concat())
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, p: usize, q: usize) -> f64 {
        self.data[p * self.cols + q]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }
}

/// Mann–Whitney AUC, ties credited 0.5. `None` without both classes.
pub fn mann_whitney_auc(scores: &[f64], positive: &[bool]) -> Option<f64> {
    let n_pos = positive.iter().filter(|&&p| p).count();
    let n_neg = positive.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return None;
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut rank_sum = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            if positive[idx] {
                rank_sum += avg;
            }
        }
        i = j + 1;
    }
    let np = n_pos as f64;
    Some((rank_sum - np * (np + 1.0) / 2.0) / (np * n_neg as f64))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeClass {
    Relation(usize),
    NoEdge,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassAuc {
    pub class: EdgeClass,
    pub auc: Option<f64>,
    pub positives: usize,
    pub negatives: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AucReport {
    pub macro_auc: f64,
    pub per_class: Vec<ClassAuc>,
    /// Classes without both positives and negatives.
    pub skipped: Vec<EdgeClass>,
}

/// One-vs-rest AUC for each relation and for "no edge", macro-averaged.
pub fn auc_edge_type(
    truth: &HeteroGraph,
    candidates: &CandidateEdgeSet,
    predicted: &[f64],
) -> Result<AucReport> {
    check_len("predicted weights", predicted.len(), candidates.len())?;
    check_len("truth nodes", truth.num_nodes(), candidates.num_nodes())?;
    let mut truth_of: HashMap<(usize, usize), usize> = HashMap::new();
    for e in truth.edges() {
        if candidates.index_of(e.u, e.v, e.relation).is_none() {
            return Err(Error::SchemaMismatch(format!(
                "true edge ({}, {}, {}) is not a candidate",
                e.u, e.v, e.relation
            )));
        }
        truth_of.insert((e.u, e.v), e.relation);
    }
    let mut per_class = Vec::new();
    for r in 0..candidates.num_relations() {
        let slots = candidates.relation_slice(r);
        let scores: Vec<f64> = slots.iter().map(|&i| predicted[i]).collect();
        let labels: Vec<bool> = slots
            .iter()
            .map(|&i| {
                let c = candidates.get(i);
                truth_of.get(&(c.u, c.v)) == Some(&r)
            })
            .collect();
        per_class.push(class_auc(EdgeClass::Relation(r), &scores, &labels));
    }
    let (scores, labels): (Vec<f64>, Vec<bool>) = candidates
        .pairs()
        .iter()
        .map(|(u, v, range)| {
            let best = range.clone().map(|i| predicted[i]).fold(f64::NEG_INFINITY, f64::max);
            (-best, !truth_of.contains_key(&(*u, *v)))
        })
        .unzip();
    per_class.push(class_auc(EdgeClass::NoEdge, &scores, &labels));

    let valid: Vec<f64> = per_class.iter().filter_map(|c| c.auc).collect();
    let skipped = per_class.iter().filter(|c| c.auc.is_none()).map(|c| c.class).collect();
    if valid.is_empty() {
        return Err(Error::Undefined("no class has both positives and negatives".into()));
    }
    Ok(AucReport {
        macro_auc: valid.iter().sum::<f64>() / valid.len() as f64,
        per_class,
        skipped,
    })
}

fn class_auc(class: EdgeClass, scores: &[f64], labels: &[bool]) -> ClassAuc {
    let positives = labels.iter().filter(|&&l| l).count();
    ClassAuc {
        class,
        auc: mann_whitney_auc(scores, labels),
        positives,
        negatives: labels.len() - positives,
    }
}

fn frobenius(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// ‖Ŵ/‖Ŵ‖ − W/‖W‖‖²_F over the candidate space.
pub fn gmse(truth: &[f64], predicted: &[f64]) -> Result<f64> {
    check_len("predicted tensor", predicted.len(), truth.len())?;
    let nt = frobenius(truth);
    if nt == 0.0 {
        return Err(Error::Undefined("truth tensor is all zero".into()));
    }
    let np = frobenius(predicted);
    let sp = if np > 0.0 { 1.0 / np } else { 0.0 };
    Ok(truth
        .iter()
        .zip(predicted)
        .map(|(t, p)| (p * sp - t / nt).powi(2))
        .sum())
}

/// The per-entry relative error summed over true edges only, divided by N²|ℛ|.
pub fn gmse_true_edges(
    truth: &[f64],
    predicted: &[f64],
    num_nodes: usize,
    num_relations: usize,
) -> Result<f64> {
    check_len("predicted tensor", predicted.len(), truth.len())?;
    if !truth.iter().any(|&t| t != 0.0) {
        return Err(Error::Undefined("truth tensor is all zero".into()));
    }
    let s: f64 = truth
        .iter()
        .zip(predicted)
        .filter(|(t, _)| **t != 0.0)
        .map(|(t, p)| (p - t).powi(2) / (t * t))
        .sum();
    Ok(s / ((num_nodes * num_nodes * num_relations) as f64))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NrmseReport {
    pub value: f64,
    /// Truth rows with max = min.
    pub skipped_rows: Vec<usize>,
}

/// (1/|ℛ|) Σ_r (‖e_r − ê_r‖/K) / (max e_r − min e_r), rows unit-normalized first.
pub fn nrmse_embeddings(truth: &RelationEmbeddings, estimate: &RelationEmbeddings) -> Result<NrmseReport> {
    check_len("estimated rows", estimate.nrows(), truth.nrows())?;
    check_len("estimated columns", estimate.ncols(), truth.ncols())?;
    let (t, e) = (truth.normalized(), estimate.normalized());
    let k = t.ncols() as f64;
    let mut total = 0.0;
    let mut used = 0;
    let mut skipped_rows = Vec::new();
    for r in 0..t.nrows() {
        let row = t.row(r);
        let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let min = row.iter().cloned().fold(f64::INFINITY, f64::min);
        if max == min {
            skipped_rows.push(r);
            continue;
        }
        let dist = row
            .iter()
            .zip(e.row(r))
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt();
        total += dist / k / (max - min);
        used += 1;
    }
    if used == 0 {
        return Err(Error::Undefined("every truth row is constant".into()));
    }
    Ok(NrmseReport {
        value: total / used as f64,
        skipped_rows,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HomophilyReport {
    /// +∞ when no entry avoids both the argmax row and column.
    pub ratio: f64,
    pub argmax: (usize, usize),
    pub condition: bool,
}

/// HR = B[p*,q*] / Σ_{p≠p*, q≠q*} B[p,q].
pub fn homophily_ratio(b: &ConnectivityMatrix) -> HomophilyReport {
    let mut best = (0, 0);
    for p in 0..b.nrows() {
        for q in 0..b.ncols() {
            if b.get(p, q) > b.get(best.0, best.1) {
                best = (p, q);
            }
        }
    }
    let mut rest = 0.0;
    for p in 0..b.nrows() {
        for q in 0..b.ncols() {
            if p != best.0 && q != best.1 {
                rest += b.get(p, q);
            }
        }
    }
    let top = b.get(best.0, best.1);
    let ratio = if rest == 0.0 { f64::INFINITY } else { top / rest };
    HomophilyReport {
        ratio,
        argmax: best,
        condition: top - rest > 0.0,
    }
}

/// Typed path template `A1-R1-A2-...-AL` with `A1 = AL`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetaPath {
    node_types: Vec<usize>,
    relations: Vec<usize>,
}

impl MetaPath {
    pub fn new(schema: &RelationSchema, node_types: Vec<usize>, relations: Vec<usize>) -> Result<Self> {
        if relations.is_empty() || node_types.len() != relations.len() + 1 {
            return Err(Error::Param(format!(
                "meta-path needs L types and L−1 relations, got {} and {}",
                node_types.len(),
                relations.len()
            )));
        }
        if node_types.first() != node_types.last() {
            return Err(Error::Param("meta-path endpoints must share a type".into()));
        }
        for (l, &r) in relations.iter().enumerate() {
            if r >= schema.num_relations() || !schema.admissible(node_types[l], node_types[l + 1], r) {
                return Err(Error::SchemaMismatch(format!(
                    "meta-path step {l} uses relation {r} between incompatible types"
                )));
            }
        }
        Ok(Self { node_types, relations })
    }

    /// Parses `A-r1-B-r2-A` style names.
    pub fn parse(schema: &RelationSchema, text: &str) -> Result<Self> {
        let parts: Vec<&str> = text.split('-').map(str::trim).collect();
        let mut types = Vec::new();
        let mut rels = Vec::new();
        for (i, p) in parts.iter().enumerate() {
            if i % 2 == 0 {
                types.push(schema.node_types().index_of(p).ok_or_else(|| {
                    Error::SchemaMismatch(format!("unknown node type `{p}` in meta-path"))
                })?);
            } else {
                rels.push(schema.relation_index(p).ok_or_else(|| {
                    Error::SchemaMismatch(format!("unknown relation `{p}` in meta-path"))
                })?);
            }
        }
        Self::new(schema, types, rels)
    }

    pub fn node_types(&self) -> &[usize] {
        &self.node_types
    }

    pub fn relations(&self) -> &[usize] {
        &self.relations
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RhrReport {
    pub value: f64,
    /// Distinct (start, end) pairs joined by a matching path.
    pub pairs: usize,
    pub same_label: usize,
}

/// Endpoint pairs `(min, max)` of simple paths matching the template.
pub fn metapath_pairs(graph: &HeteroGraph, path: &MetaPath) -> BTreeSet<(usize, usize)> {
    let n = graph.num_nodes();
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for e in graph.edges() {
        adj[e.u].push((e.v, e.relation));
        adj[e.v].push((e.u, e.relation));
    }
    let types = graph.node_types();
    let mut pairs = BTreeSet::new();
    let mut stack = Vec::new();
    let mut on_path = vec![false; n];
    for start in 0..n {
        if types[start] != path.node_types[0] {
            continue;
        }
        on_path[start] = true;
        stack.push(start);
        extend(&adj, types, path, &mut stack, &mut on_path, &mut pairs);
        stack.pop();
        on_path[start] = false;
    }
    pairs
}

fn extend(
    adj: &[Vec<(usize, usize)>],
    types: &[usize],
    path: &MetaPath,
    stack: &mut Vec<usize>,
    on_path: &mut [bool],
    pairs: &mut BTreeSet<(usize, usize)>,
) {
    let depth = stack.len() - 1;
    let here = stack[depth];
    if depth == path.relations.len() {
        let start = stack[0];
        if start != here {
            pairs.insert((start.min(here), start.max(here)));
        }
        return;
    }
    let (rel, next_type) = (path.relations[depth], path.node_types[depth + 1]);
    for &(nb, r) in &adj[here] {
        if r == rel && types[nb] == next_type && !on_path[nb] {
            on_path[nb] = true;
            stack.push(nb);
            extend(adj, types, path, stack, on_path, pairs);
            stack.pop();
            on_path[nb] = false;
        }
    }
}

/// Fraction of meta-path-induced pairs whose endpoints share a label;
/// `None` when no path matches.
pub fn relaxed_homophily_ratio(graph: &HeteroGraph, path: &MetaPath) -> Result<Option<RhrReport>> {
    let labels = graph
        .labels()
        .ok_or_else(|| Error::Domain("relaxed homophily needs node labels".into()))?;
    let pairs = metapath_pairs(graph, path);
    if pairs.is_empty() {
        return Ok(None);
    }
    let same = pairs.iter().filter(|(a, b)| labels[*a] == labels[*b]).count();
    Ok(Some(RhrReport {
        value: same as f64 / pairs.len() as f64,
        pairs: pairs.len(),
        same_label: same,
    }))
}

/// Indices of the `m` smallest values, ties by index, returned sorted.
pub fn smoothest_dims(s: &[f64], m: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..s.len()).collect();
    order.sort_by(|&a, &b| s[a].total_cmp(&s[b]).then(a.cmp(&b)));
    let mut top: Vec<usize> = order.into_iter().take(m).collect();
    top.sort_unstable();
    top
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SdorReport {
    pub value: f64,
    pub first: Vec<usize>,
    pub second: Vec<usize>,
}

fn relation_dim_smoothness(
    x: &SignalMatrix,
    edges: impl Iterator<Item = (usize, usize, usize, f64)>,
    r: usize,
) -> (Vec<f64>, f64) {
    let mut s = vec![0.0; x.ncols()];
    let mut total = 0.0;
    for (u, v, rel, w) in edges {
        if rel != r || w == 0.0 {
            continue;
        }
        total += w;
        let (xu, xv) = (x.row(u), x.row(v));
        for k in 0..s.len() {
            s[k] += w * (xv[k] - xu[k]).powi(2);
        }
    }
    (s, total)
}

fn sdor_with<I>(x: &SignalMatrix, edges: impl Fn() -> I, r: usize, r2: usize, m: usize) -> Result<SdorReport>
where
    I: Iterator<Item = (usize, usize, usize, f64)>,
{
    if m == 0 || m > x.ncols() {
        return Err(Error::Param(format!("M = {m} must lie in 1..={}", x.ncols())));
    }
    let mut tops = Vec::new();
    for rel in [r, r2] {
        let (s, total) = relation_dim_smoothness(x, edges(), rel);
        if total == 0.0 {
            return Err(Error::Undefined(format!("relation {rel} has zero total weight")));
        }
        tops.push(smoothest_dims(&s, m));
    }
    let second = tops.pop().unwrap_or_default();
    let first = tops.pop().unwrap_or_default();
    Ok(SdorReport {
        value: crate::dgp::jaccard(&first, &second),
        first,
        second,
    })
}

/// SDOR of relations `r` and `r2` measured with candidate weights `w`.
pub fn sdor(
    x: &SignalMatrix,
    candidates: &CandidateEdgeSet,
    w: &[f64],
    r: usize,
    r2: usize,
    m: usize,
) -> Result<SdorReport> {
    check_len("weight vector", w.len(), candidates.len())?;
    check_len("signal rows", x.nrows(), candidates.num_nodes())?;
    sdor_with(
        x,
        || candidates.triples().iter().zip(w).map(|(c, &wi)| (c.u, c.v, c.relation, wi)),
        r,
        r2,
        m,
    )
}

/// SDOR of relations `r` and `r2` measured on a graph's edges.
pub fn sdor_from_graph(x: &SignalMatrix, graph: &HeteroGraph, r: usize, r2: usize, m: usize) -> Result<SdorReport> {
    check_len("signal rows", x.nrows(), graph.num_nodes())?;
    sdor_with(
        x,
        || graph.edges().iter().map(|e| (e.u, e.v, e.relation, e.weight)),
        r,
        r2,
        m,
    )
}

/// Metrics of one fit against ground truth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub auc: Option<AucReport>,
    pub gmse: Option<f64>,
    pub gmse_true_edges: Option<f64>,
    pub nrmse: Option<NrmseReport>,
    pub sdor: Option<f64>,
    pub conflicts: usize,
    pub provenance: BTreeMap<String, String>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{enumerate_candidates, Edge};

    #[test]
    fn auc_basics() {
        assert_eq!(mann_whitney_auc(&[0.1, 0.9], &[false, true]), Some(1.0));
        assert_eq!(mann_whitney_auc(&[0.5, 0.5, 0.5], &[false, true, true]), Some(0.5));
        assert_eq!(mann_whitney_auc(&[0.5, 0.1], &[true, true]), None);
    }

    #[test]
    fn hand_case_two_slots() {
        let s = RelationSchema::from_names(&[("A", 1), ("B", 1)], &[("r1", "A", "B")]).unwrap();
        let g = HeteroGraph::new(&s, vec![0, 1, 0], None, vec![Edge { u: 0, v: 1, relation: 0, weight: 1.0 }]).unwrap();
        let c = enumerate_candidates(&[0, 1, 0], &s).unwrap();
        let rep = auc_edge_type(&g, &c, &[0.9, 0.2]).unwrap();
        assert_eq!(rep.per_class[0].auc, Some(1.0));
        assert_eq!(rep.per_class[1].auc, Some(1.0));
        assert_eq!(rep.macro_auc, 1.0);
    }

    #[test]
    fn auc_constant_scores() {
        let s = RelationSchema::from_names(&[("A", 1)], &[("r", "A", "A"), ("q", "A", "A")]).unwrap();
        let edges = vec![
            Edge { u: 0, v: 1, relation: 0, weight: 1.0 },
            Edge { u: 1, v: 2, relation: 1, weight: 1.0 },
        ];
        let g = HeteroGraph::new(&s, vec![0; 4], None, edges).unwrap();
        let c = enumerate_candidates(&[0; 4], &s).unwrap();
        let rep = auc_edge_type(&g, &c, &vec![0.3; c.len()]).unwrap();
        assert!(rep.per_class.iter().all(|p| p.auc == Some(0.5)));
        let truth = crate::graph::vectorize(&g, &c).unwrap();
        assert_eq!(auc_edge_type(&g, &c, &truth).unwrap().macro_auc, 1.0);
    }

    #[test]
    fn auc_reports_skipped_class() {
        let s = RelationSchema::from_names(&[("A", 1)], &[("r", "A", "A"), ("q", "A", "A")]).unwrap();
        let g = HeteroGraph::new(&s, vec![0; 3], None, vec![Edge { u: 0, v: 1, relation: 0, weight: 1.0 }]).unwrap();
        let c = enumerate_candidates(&[0; 3], &s).unwrap();
        let rep = auc_edge_type(&g, &c, &vec![0.3; c.len()]).unwrap();
        assert_eq!(rep.skipped, vec![EdgeClass::Relation(1)]);
    }

    #[test]
    fn gmse_examples() {
        let w = [1.0, 0.0, 2.0];
        assert_eq!(gmse(&w, &w).unwrap(), 0.0);
        assert!(gmse(&w, &[3.0, 0.0, 6.0]).unwrap() < 1e-15);
        assert!((gmse(&[1.0, 0.0], &[0.0, 5.0]).unwrap() - 2.0).abs() < 1e-15);
        assert!(gmse(&[0.0, 0.0], &[1.0, 0.0]).is_err());
        assert_eq!(gmse_true_edges(&[2.0, 0.0], &[1.0, 9.0], 2, 1).unwrap(), 0.25 / 4.0);
    }

    #[test]
    fn nrmse_examples() {
        let e = RelationEmbeddings::from_rows(&[vec![1.0, 0.0]]).unwrap();
        let f = RelationEmbeddings::from_rows(&[vec![0.0, 1.0]]).unwrap();
        assert_eq!(nrmse_embeddings(&e, &e).unwrap().value, 0.0);
        assert!((nrmse_embeddings(&e, &f).unwrap().value - 2f64.sqrt() / 2.0).abs() < 1e-15);
        let flat = RelationEmbeddings::uniform(1, 2, 1.0);
        assert!(nrmse_embeddings(&flat, &e).is_err());
    }

    #[test]
    fn homophily_examples() {
        let b = ConnectivityMatrix::from_rows(&[vec![0.4, 0.1], vec![0.1, 0.4]]).unwrap();
        let h = homophily_ratio(&b);
        assert_eq!((h.argmax, h.ratio, h.condition), ((0, 0), 1.0, false));
        let b = ConnectivityMatrix::from_rows(&[vec![0.7, 0.1], vec![0.1, 0.1]]).unwrap();
        let h = homophily_ratio(&b);
        assert!((h.ratio - 7.0).abs() < 1e-12 && h.condition);
        let b = ConnectivityMatrix::from_rows(&[vec![0.25, 0.25], vec![0.25, 0.25]]).unwrap();
        let h = homophily_ratio(&b);
        assert_eq!((h.ratio, h.condition), (1.0, false));
        let b = ConnectivityMatrix::from_rows(&[vec![0.5, 0.5]]).unwrap();
        let h = homophily_ratio(&b);
        assert_eq!((h.ratio, h.condition), (f64::INFINITY, true));
        assert!(ConnectivityMatrix::from_rows(&[vec![0.5, 0.4]]).is_err());
    }

    #[test]
    fn rhr_star() {
        let s = RelationSchema::from_names(&[("M", 2), ("A", 1)], &[("acts", "M", "A")]).unwrap();
        let edges = vec![
            Edge { u: 0, v: 2, relation: 0, weight: 1.0 },
            Edge { u: 1, v: 2, relation: 0, weight: 1.0 },
        ];
        let g = HeteroGraph::new(&s, vec![0, 0, 1], Some(vec![0, 1, 0]), edges.clone()).unwrap();
        let p = MetaPath::parse(&s, "M-acts-A-acts-M").unwrap();
        let r = relaxed_homophily_ratio(&g, &p).unwrap().unwrap();
        assert_eq!((r.value, r.pairs), (0.0, 1));
        let g = HeteroGraph::new(&s, vec![0, 0, 1], Some(vec![1, 1, 0]), edges).unwrap();
        assert_eq!(relaxed_homophily_ratio(&g, &p).unwrap().unwrap().value, 1.0);
        let lonely = HeteroGraph::new(&s, vec![0, 0, 1], Some(vec![1, 1, 0]), vec![]).unwrap();
        assert_eq!(relaxed_homophily_ratio(&lonely, &p).unwrap(), None);
        assert!(MetaPath::parse(&s, "M-acts-A").is_err());
    }

    #[test]
    fn sdor_examples() {
        let s = RelationSchema::from_names(&[("A", 1)], &[("r", "A", "A"), ("q", "A", "A")]).unwrap();
        let c = enumerate_candidates(&[0; 3], &s).unwrap();
        // dims 0,1 smooth on (0,1); dims 2,3 smooth on (1,2).
        let x = SignalMatrix::from_rows(&[
            vec![0.0, 0.0, 5.0, 5.0],
            vec![0.0, 0.0, 0.0, 0.0],
            vec![5.0, 5.0, 0.0, 0.0],
        ])
        .unwrap();
        let mut w = vec![0.0; c.len()];
        w[c.index_of(0, 1, 0).unwrap()] = 1.0;
        w[c.index_of(1, 2, 1).unwrap()] = 1.0;
        assert_eq!(sdor(&x, &c, &w, 0, 1, 2).unwrap().value, 0.0);
        assert_eq!(sdor(&x, &c, &w, 0, 0, 2).unwrap().value, 1.0);
        let w0 = vec![0.0; c.len()];
        assert!(matches!(sdor(&x, &c, &w0, 0, 1, 2), Err(Error::Undefined(_))));
        assert_eq!(smoothest_dims(&[1.0, 0.0, 0.0, 2.0], 2), vec![1, 2]);
        assert_eq!(smoothest_dims(&[0.0, 0.0, 0.0], 2), vec![0, 1]);
    }
}
