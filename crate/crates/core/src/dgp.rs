//! Synthetic heterogeneous graphs and Gaussian node signals.
//!
//! Pipeline: backbone (SBM or Watts–Strogatz) → BFS node typing → relation
//! embeddings with a controlled smoothest-dimension overlap → per-dimension
//! Gaussian sampling with precision (2/σ)(L_k + νI).

use std::collections::{BTreeSet, HashSet, VecDeque};

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::graph::{Edge, HeteroGraph, RelationEmbeddings, RelationSchema, SignalMatrix};

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum BackboneParams {
    Sbm {
        block_sizes: Vec<usize>,
        p: f64,
        q: f64,
    },
    WattsStrogatz {
        n: usize,
        k: usize,
        rewire: f64,
    },
}

impl BackboneParams {
    pub fn num_nodes(&self) -> usize {
        match self {
            Self::Sbm { block_sizes, .. } => block_sizes.iter().sum(),
            Self::WattsStrogatz { n, .. } => *n,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let prob = |name: &str, x: f64| {
            if (0.0..=1.0).contains(&x) {
                Ok(())
            } else {
                Err(Error::Param(format!("{name} = {x} is not a probability")))
            }
        };
        match self {
            Self::Sbm { block_sizes, p, q } => {
                prob("p", *p)?;
                prob("q", *q)?;
                if block_sizes.is_empty() {
                    return Err(Error::Param("SBM needs at least one block".into()));
                }
            }
            Self::WattsStrogatz { n, k, rewire } => {
                prob("rewire", *rewire)?;
                if *k < 1 {
                    return Err(Error::Param("ring half-degree k must be at least 1".into()));
                }
                if 2 * k >= *n {
                    return Err(Error::Param(format!("ring degree 2k = {} needs n > 2k, n = {n}", 2 * k)));
                }
            }
        }
        Ok(())
    }

    /// Block index of each node (a single block for Watts–Strogatz).
    pub fn blocks(&self) -> Vec<usize> {
        match self {
            Self::Sbm { block_sizes, .. } => block_sizes
                .iter()
                .enumerate()
                .flat_map(|(b, &s)| std::iter::repeat_n(b, s))
                .collect(),
            Self::WattsStrogatz { n, .. } => vec![0; *n],
        }
    }
}

/// Simple undirected graph with sorted `(u, v)` edges, `u < v`.
#[derive(Debug, Clone, PartialEq)]
pub struct Backbone {
    pub num_nodes: usize,
    pub edges: Vec<(usize, usize)>,
}

impl Backbone {
    pub fn new(num_nodes: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let set: BTreeSet<(usize, usize)> = edges
            .into_iter()
            .filter(|(u, v)| u != v)
            .map(|(u, v)| (u.min(v), u.max(v)))
            .collect();
        Self {
            num_nodes,
            edges: set.into_iter().collect(),
        }
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.num_nodes];
        for &(u, v) in &self.edges {
            d[u] += 1;
            d[v] += 1;
        }
        d
    }

    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.num_nodes];
        for &(u, v) in &self.edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        for a in &mut adj {
            a.sort_unstable();
        }
        adj
    }
}

pub fn generate_backbone(params: &BackboneParams, seed: u64) -> Result<Backbone> {
    params.validate()?;
    let mut rng = rng_from_seed(seed);
    match params {
        BackboneParams::Sbm { p, q, .. } => {
            let blocks = params.blocks();
            let n = blocks.len();
            let mut edges = Vec::new();
            for u in 0..n {
                for v in u + 1..n {
                    let prob = if blocks[u] == blocks[v] { *p } else { *q };
                    if rng.random::<f64>() < prob {
                        edges.push((u, v));
                    }
                }
            }
            Ok(Backbone::new(n, edges))
        }
        BackboneParams::WattsStrogatz { n, k, rewire } => {
            let n = *n;
            let mut set: HashSet<(usize, usize)> = HashSet::new();
            let key = |a: usize, b: usize| (a.min(b), a.max(b));
            for u in 0..n {
                for j in 1..=*k {
                    set.insert(key(u, (u + j) % n));
                }
            }
            let mut degree = vec![2 * k; n];
            for j in 1..=*k {
                for u in 0..n {
                    let v = (u + j) % n;
                    if rng.random::<f64>() >= *rewire || degree[u] >= n - 1 {
                        continue;
                    }
                    let mut w = rng.random_range(0..n);
                    while w == u || set.contains(&key(u, w)) {
                        w = rng.random_range(0..n);
                    }
                    set.remove(&key(u, v));
                    set.insert(key(u, w));
                    degree[v] -= 1;
                    degree[w] += 1;
                }
            }
            Ok(Backbone::new(n, set))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TypeAssignment {
    pub node_types: Vec<usize>,
    /// Surviving backbone edges with their relation, `(u, v, r)`.
    pub edges: Vec<(usize, usize, usize)>,
    pub dropped: usize,
    pub warnings: Vec<String>,
}

/// BFS typing: roots draw uniformly over all types, children uniformly over
/// the types their parent can connect to; each edge then draws a relation
/// uniformly from ℛ_{a,b}, or is dropped when that set is empty.
pub fn assign_types(backbone: &Backbone, schema: &RelationSchema, seed: u64) -> Result<TypeAssignment> {
    let nt = schema.node_types().len();
    if nt == 0 || schema.num_relations() == 0 {
        return Err(Error::Param("schema has no node types or no relations".into()));
    }
    let warnings = schema
        .isolated_types()
        .into_iter()
        .map(|t| {
            format!(
                "node type `{}` takes part in no relation",
                schema.node_types().name(t)
            )
        })
        .collect();
    let compatible: Vec<Vec<usize>> = (0..nt)
        .map(|a| {
            let c: Vec<usize> = (0..nt)
                .filter(|&b| !schema.relations_between(a, b).is_empty())
                .collect();
            if c.is_empty() {
                (0..nt).collect()
            } else {
                c
            }
        })
        .collect();

    let mut rng = rng_from_seed(seed);
    let n = backbone.num_nodes;
    let adj = backbone.adjacency();
    let mut types: Vec<Option<usize>> = vec![None; n];
    let mut queue = VecDeque::new();
    for root in 0..n {
        if types[root].is_some() {
            continue;
        }
        types[root] = Some(rng.random_range(0..nt));
        queue.push_back(root);
        while let Some(u) = queue.pop_front() {
            let parent = types[u].unwrap_or_default();
            for &v in &adj[u] {
                if types[v].is_none() {
                    let choices = &compatible[parent];
                    types[v] = Some(choices[rng.random_range(0..choices.len())]);
                    queue.push_back(v);
                }
            }
        }
    }
    let node_types: Vec<usize> = types.into_iter().map(|t| t.unwrap_or_default()).collect();

    let mut edges = Vec::with_capacity(backbone.edges.len());
    let mut dropped = 0;
    for &(u, v) in &backbone.edges {
        let rs = schema.relations_between(node_types[u], node_types[v]);
        if rs.is_empty() {
            dropped += 1;
        } else {
            edges.push((u, v, rs[rng.random_range(0..rs.len())]));
        }
    }
    Ok(TypeAssignment {
        node_types,
        edges,
        dropped,
        warnings,
    })
}

/// Target overlap between the supports of two relations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SdorTarget {
    pub a: usize,
    pub b: usize,
    pub target: f64,
}

/// Number of shared dims whose Jaccard ratio s/(2M−s) is closest to `target`.
pub fn shared_dims(target: f64, m: usize) -> usize {
    (target * 2.0 * m as f64 / (1.0 + target)).round() as usize
}

pub fn jaccard(a: &[usize], b: &[usize]) -> f64 {
    let sa: BTreeSet<_> = a.iter().collect();
    let sb: BTreeSet<_> = b.iter().collect();
    let union = sa.union(&sb).count();
    if union == 0 {
        return 0.0;
    }
    sa.intersection(&sb).count() as f64 / union as f64
}

#[derive(Debug, Clone, PartialEq)]
pub struct SdorEmbeddings {
    pub embeddings: RelationEmbeddings,
    pub supports: Vec<Vec<usize>>,
    /// Achieved Jaccard overlap, one entry per requested target.
    pub achieved: Vec<f64>,
}

const SUPPORT_SEARCH_LIMIT: usize = 1_000_000;

pub fn make_embeddings_with_sdor(
    k: usize,
    m: usize,
    num_relations: usize,
    targets: &[SdorTarget],
    magnitude: (f64, f64),
    seed: u64,
) -> Result<SdorEmbeddings> {
    if m == 0 || m > k {
        return Err(Error::Param(format!("active dims M = {m} must lie in 1..={k}")));
    }
    if !(magnitude.0 > 0.0 && magnitude.0 <= magnitude.1 && magnitude.1.is_finite()) {
        return Err(Error::Param(format!("magnitude range {magnitude:?} must satisfy 0 < lo <= hi")));
    }
    if num_relations > 64 {
        return Err(Error::Param("at most 64 relations are supported".into()));
    }
    let mut need: Vec<Vec<(usize, usize)>> = vec![Vec::new(); num_relations];
    for t in targets {
        if t.a >= num_relations || t.b >= num_relations {
            return Err(Error::Param(format!("target names relation outside 0..{num_relations}")));
        }
        if !(0.0..=1.0).contains(&t.target) {
            return Err(Error::Param(format!("SDOR target {} outside [0, 1]", t.target)));
        }
        let s = shared_dims(t.target, m);
        if t.a == t.b {
            if s != m {
                return Err(Error::Infeasible(format!(
                    "relation {} cannot overlap itself by {s} of {m} dims",
                    t.a
                )));
            }
            continue;
        }
        let (lo, hi) = (t.a.min(t.b), t.a.max(t.b));
        if let Some(prev) = need[hi].iter().find(|(c, _)| *c == lo) {
            if prev.1 != s {
                return Err(Error::Infeasible(format!(
                    "conflicting targets for relations {lo} and {hi}"
                )));
            }
            continue;
        }
        need[hi].push((lo, s));
    }

    let mut rng = rng_from_seed(seed);
    let mut order: Vec<usize> = (0..k).collect();
    order.shuffle(&mut rng);
    let mut masks = vec![0u64; k];
    let mut supports: Vec<Vec<usize>> = Vec::with_capacity(num_relations);
    for (r, need_r) in need.iter().enumerate().take(num_relations) {
        let chosen = choose_support(&order, &masks, need_r, m).ok_or_else(|| {
            Error::Infeasible(format!(
                "no support for relation {r} meets overlaps {need_r:?} with M = {m}, K = {k}"
            ))
        })?;
        for &d in &chosen {
            masks[d] |= 1 << r;
        }
        let mut sorted = chosen;
        sorted.sort_unstable();
        supports.push(sorted);
    }

    let mut data = vec![0.0; num_relations * k];
    for (r, sup) in supports.iter().enumerate() {
        for &d in sup {
            data[r * k + d] = rng.random_range(magnitude.0..=magnitude.1);
        }
    }
    let embeddings = RelationEmbeddings::new(num_relations, k, data)?.normalized();
    let achieved = targets
        .iter()
        .map(|t| jaccard(&supports[t.a], &supports[t.b]))
        .collect();
    Ok(SdorEmbeddings {
        embeddings,
        supports,
        achieved,
    })
}

// Picks M dims whose overlap with each constrained earlier support is exact.
// Dims are grouped by which earlier supports contain them; fresh groups are
// tried first so unconstrained relations stay as disjoint as K allows.
fn choose_support(order: &[usize], masks: &[u64], need: &[(usize, usize)], m: usize) -> Option<Vec<usize>> {
    let mut atoms: Vec<(u64, Vec<usize>)> = Vec::new();
    for &d in order {
        match atoms.iter_mut().find(|(mask, _)| *mask == masks[d]) {
            Some((_, dims)) => dims.push(d),
            None => atoms.push((masks[d], vec![d])),
        }
    }
    atoms.sort_by_key(|(mask, _)| (mask.count_ones(), *mask));
    let mut counts = vec![0usize; atoms.len()];
    let mut remaining: Vec<usize> = need.iter().map(|&(_, s)| s).collect();
    let mut budget = SUPPORT_SEARCH_LIMIT;
    if search(&atoms, need, 0, m, &mut remaining, &mut counts, &mut budget) {
        Some(
            atoms
                .iter()
                .zip(&counts)
                .flat_map(|((_, dims), &c)| dims[..c].iter().copied())
                .collect(),
        )
    } else {
        None
    }
}

fn search(
    atoms: &[(u64, Vec<usize>)],
    need: &[(usize, usize)],
    at: usize,
    slots: usize,
    remaining: &mut [usize],
    counts: &mut [usize],
    budget: &mut usize,
) -> bool {
    if *budget == 0 {
        return false;
    }
    *budget -= 1;
    if at == atoms.len() {
        return slots == 0 && remaining.iter().all(|&x| x == 0);
    }
    if remaining.iter().any(|&x| x > slots) {
        return false;
    }
    let (mask, dims) = &atoms[at];
    let mut cap = slots.min(dims.len());
    for (j, &(c, _)) in need.iter().enumerate() {
        if mask & (1 << c) != 0 {
            cap = cap.min(remaining[j]);
        }
    }
    for n in (0..=cap).rev() {
        for (j, &(c, _)) in need.iter().enumerate() {
            if mask & (1 << c) != 0 {
                remaining[j] -= n;
            }
        }
        counts[at] = n;
        if search(atoms, need, at + 1, slots - n, remaining, counts, budget) {
            return true;
        }
        for (j, &(c, _)) in need.iter().enumerate() {
            if mask & (1 << c) != 0 {
                remaining[j] += n;
            }
        }
    }
    counts[at] = 0;
    false
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DgpConfig {
    pub sigma: f64,
    pub nu: f64,
    pub weight_low: f64,
    pub weight_high: f64,
}

impl Default for DgpConfig {
    fn default() -> Self {
        Self {
            sigma: 2.0,
            nu: 0.01,
            weight_low: 1.0,
            weight_high: 2.0,
        }
    }
}

impl DgpConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0) {
            return Err(Error::Param(format!("sigma = {} must be positive", self.sigma)));
        }
        if !(self.nu > 0.0) {
            return Err(Error::Param(format!("nu = {} must be positive", self.nu)));
        }
        if !(self.weight_low > 0.0 && self.weight_low <= self.weight_high) {
            return Err(Error::Param(format!(
                "edge weight range [{}, {}] must satisfy 0 < lo <= hi",
                self.weight_low, self.weight_high
            )));
        }
        Ok(())
    }
}

fn check_pairing(graph: &HeteroGraph, embeddings: &RelationEmbeddings) -> Result<()> {
    if let Some(e) = graph.edges().iter().find(|e| e.relation >= embeddings.nrows()) {
        return Err(Error::Dimension(format!(
            "edge relation {} has no embedding row ({} rows)",
            e.relation,
            embeddings.nrows()
        )));
    }
    Ok(())
}

/// Laplacian of the graph reweighted by w·e_{r,k}² for one dimension.
pub fn dimension_laplacian(graph: &HeteroGraph, embeddings: &RelationEmbeddings, k: usize) -> DMatrix<f64> {
    let n = graph.num_nodes();
    let mut l = DMatrix::zeros(n, n);
    for e in graph.edges() {
        let c = e.weight * embeddings.get(e.relation, k).powi(2);
        l[(e.u, e.u)] += c;
        l[(e.v, e.v)] += c;
        l[(e.u, e.v)] -= c;
        l[(e.v, e.u)] -= c;
    }
    l
}

/// Draws each column x_{:,k} ~ N(0, Λ_k⁻¹), Λ_k = (2/σ)(L_k + νI).
pub fn sample_signals(
    graph: &HeteroGraph,
    embeddings: &RelationEmbeddings,
    config: &DgpConfig,
    seed: u64,
) -> Result<SignalMatrix> {
    config.validate()?;
    check_pairing(graph, embeddings)?;
    let n = graph.num_nodes();
    let k = embeddings.ncols();
    let mut rng = rng_from_seed(seed);
    let mut data = vec![0.0; n * k];
    let idle_sd = (config.sigma / (2.0 * config.nu)).sqrt();
    for dim in 0..k {
        let g = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
        let active = graph
            .edges()
            .iter()
            .any(|e| embeddings.get(e.relation, dim) > 0.0);
        let x = if active {
            let mut lambda = dimension_laplacian(graph, embeddings, dim);
            for i in 0..n {
                lambda[(i, i)] += config.nu;
            }
            lambda *= 2.0 / config.sigma;
            let chol = lambda
                .cholesky()
                .ok_or_else(|| Error::Internal(format!("precision of dim {dim} is not positive definite")))?;
            chol.l().tr_solve_lower_triangular(&g).ok_or_else(|| {
                Error::Internal(format!("singular Cholesky factor in dim {dim}"))
            })?
        } else {
            g * idle_sd
        };
        for i in 0..n {
            data[i * k + dim] = x[i];
        }
    }
    SignalMatrix::new(n, k, data)
}

/// Σ_edges w‖e_r ∘ (x_v − x_u)‖² + ν‖X‖²_F.
pub fn energy(
    graph: &HeteroGraph,
    embeddings: &RelationEmbeddings,
    signals: &SignalMatrix,
    nu: f64,
) -> Result<f64> {
    check_len("signal rows", signals.nrows(), graph.num_nodes())?;
    check_len("signal columns", signals.ncols(), embeddings.ncols())?;
    check_pairing(graph, embeddings)?;
    let mut total = 0.0;
    for e in graph.edges() {
        let (xu, xv, er) = (signals.row(e.u), signals.row(e.v), embeddings.row(e.relation));
        let s: f64 = xu
            .iter()
            .zip(xv)
            .zip(er)
            .map(|((a, b), c)| (c * (b - a)).powi(2))
            .sum();
        total += e.weight * s;
    }
    total += nu * signals.as_slice().iter().map(|x| x * x).sum::<f64>();
    Ok(total)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthParams {
    pub backbone: BackboneParams,
    pub num_dims: usize,
    pub active_dims: usize,
    #[serde(default)]
    pub sdor: Vec<SdorTarget>,
    pub magnitude: (f64, f64),
    #[serde(default)]
    pub dgp: DgpConfig,
    /// Node labels copied from SBM blocks (modulo each type's class count).
    #[serde(default)]
    pub block_labels: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub schema: RelationSchema,
    pub graph: HeteroGraph,
    pub embeddings: RelationEmbeddings,
    pub signals: SignalMatrix,
    pub supports: Vec<Vec<usize>>,
    pub achieved_sdor: Vec<f64>,
    pub dropped_edges: usize,
    pub warnings: Vec<String>,
    pub params: SynthParams,
    pub seed: u64,
}

pub fn synthesize(schema: &RelationSchema, params: &SynthParams, seed: u64) -> Result<GroundTruth> {
    params.dgp.validate()?;
    let mut seeds = rng_from_seed(seed);
    let backbone_seed = seeds.next_u64();
    let typing_seed = seeds.next_u64();
    let embedding_seed = seeds.next_u64();
    let weight_seed = seeds.next_u64();
    let signal_seed = seeds.next_u64();

    let backbone = generate_backbone(&params.backbone, backbone_seed)?;
    let typed = assign_types(&backbone, schema, typing_seed)?;
    let emb = make_embeddings_with_sdor(
        params.num_dims,
        params.active_dims,
        schema.num_relations(),
        &params.sdor,
        params.magnitude,
        embedding_seed,
    )?;
    let mut wrng = rng_from_seed(weight_seed);
    let edges = typed
        .edges
        .iter()
        .map(|&(u, v, r)| Edge {
            u,
            v,
            relation: r,
            weight: wrng.random_range(params.dgp.weight_low..=params.dgp.weight_high),
        })
        .collect();
    let labels = params.block_labels.then(|| {
        params
            .backbone
            .blocks()
            .iter()
            .zip(&typed.node_types)
            .map(|(&b, &t)| b % schema.node_types().class_count(t))
            .collect()
    });
    let graph = HeteroGraph::new(schema, typed.node_types, labels, edges)?;
    let signals = sample_signals(&graph, &emb.embeddings, &params.dgp, signal_seed)?;
    Ok(GroundTruth {
        schema: schema.clone(),
        graph,
        embeddings: emb.embeddings,
        signals,
        supports: emb.supports,
        achieved_sdor: emb.achieved,
        dropped_edges: typed.dropped,
        warnings: typed.warnings,
        params: params.clone(),
        seed,
    })
}
