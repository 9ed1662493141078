//! Alternating estimation of candidate-edge weights and relation embeddings.

mod embedding;
mod pds;

pub use embedding::{
    dimension_smoothness, embedding_gradient, embedding_objective, gd_update, ir_update,
    smoothness_vector,
};
pub use pds::{
    fidelity_value, graph_objective, graph_step, step_size, Fidelity, GraphStepOutput, PdsSettings,
};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dgp::rng_from_seed;
use crate::error::{check_len, Error, Result};
use crate::graph::{
    enumerate_candidates, tensor_from_weights, CandidateEdgeSet, DegreeOperator, Extraction,
    RelationEmbeddings, RelationSchema, SignalMatrix,
};
use crate::metrics::ConnectivityMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EmbeddingUpdate {
    #[default]
    Ir,
    Gd,
    /// Keep the initial embeddings; a single graph step is run.
    Fixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EmbeddingInit {
    /// Every entry 1/K.
    #[default]
    InverseK,
    /// Every entry 1/√K (unit rows).
    UnitNorm,
}

impl EmbeddingInit {
    pub fn build(self, rows: usize, k: usize) -> RelationEmbeddings {
        let v = match self {
            Self::InverseK => 1.0 / k as f64,
            Self::UnitNorm => 1.0 / (k as f64).sqrt(),
        };
        RelationEmbeddings::uniform(rows, k, v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GdSettings {
    pub step: f64,
    pub iters: usize,
}

impl Default for GdSettings {
    fn default() -> Self {
        Self {
            step: 1e-3,
            iters: 100,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub alpha: f64,
    pub beta: f64,
    /// λ₁′ of the reweighting update.
    pub ir_scale: f64,
    /// λ₂′ of the reweighting update.
    pub ir_shift: f64,
    /// λ₁, ridge weight on E (gradient update and reported objective).
    pub ridge: f64,
    /// λ₂, L1 weight on E (gradient update and reported objective).
    pub l1: f64,
    pub update: EmbeddingUpdate,
    pub gd: GdSettings,
    pub init: EmbeddingInit,
    pub fidelity: Fidelity,
    pub max_outer: usize,
    pub outer_tol: f64,
    pub pds: PdsSettings,
    /// Rescale signal columns to unit variance before fitting.
    pub standardize: bool,
    pub nu: f64,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            beta: 0.1,
            ir_scale: 1.0,
            ir_shift: 0.0,
            ridge: 0.0,
            l1: 0.0,
            update: EmbeddingUpdate::Ir,
            gd: GdSettings::default(),
            init: EmbeddingInit::InverseK,
            fidelity: Fidelity::Quadratic,
            max_outer: 20,
            outer_tol: 1e-4,
            pds: PdsSettings::default(),
            standardize: false,
            nu: 0.01,
            seed: 0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0) {
            return Err(Error::Param(format!("alpha = {} must be positive", self.alpha)));
        }
        if !(self.beta >= 0.0) {
            return Err(Error::Param(format!("beta = {} must be nonnegative", self.beta)));
        }
        if !(self.ir_scale > 0.0) {
            return Err(Error::Param(format!("ir_scale = {} must be positive", self.ir_scale)));
        }
        if !(self.ridge >= 0.0 && self.l1 >= 0.0) {
            return Err(Error::Param("ridge and l1 must be nonnegative".into()));
        }
        if !(self.outer_tol > 0.0 && self.pds.tol > 0.0) {
            return Err(Error::Param("tolerances must be positive".into()));
        }
        if self.max_outer == 0 || self.pds.max_iter == 0 {
            return Err(Error::Param("iteration caps must be positive".into()));
        }
        if !(self.pds.safety > 0.0 && self.pds.safety < 1.0) {
            return Err(Error::Param(format!("safety = {} must lie in (0, 1)", self.pds.safety)));
        }
        if self.update == EmbeddingUpdate::Gd && !(self.gd.step > 0.0) {
            return Err(Error::Param(format!("gd step = {} must be positive", self.gd.step)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    /// Relative objective change fell below the outer tolerance.
    Tolerance,
    MaxOuter,
    /// Embeddings fixed, so one graph step is the whole fit.
    SingleStep,
}

#[derive(Debug, Clone)]
pub struct FitResult {
    pub candidates: CandidateEdgeSet,
    pub w: Vec<f64>,
    pub embeddings: RelationEmbeddings,
    pub objective_trace: Vec<f64>,
    pub inner_iterations: Vec<usize>,
    /// Graph steps that stopped at the iteration cap.
    pub inner_capped: usize,
    pub reason: StopReason,
    /// Outer steps whose objective did not decrease.
    pub increases: usize,
    /// Three consecutive outer steps without decrease.
    pub non_monotone: bool,
}

impl FitResult {
    pub fn converged(&self) -> bool {
        self.reason != StopReason::MaxOuter && self.inner_capped == 0
    }

    pub fn extract(&self, threshold: f64) -> Result<Extraction> {
        tensor_from_weights(&self.candidates, &self.w, threshold)
    }
}

fn initial_weights(len: usize, seed: u64) -> Vec<f64> {
    let mut rng = rng_from_seed(seed);
    (0..len).map(|_| rng.random::<f64>()).collect()
}

fn full_objective(
    x: &SignalMatrix,
    e: &RelationEmbeddings,
    w: &[f64],
    candidates: &CandidateEdgeSet,
    op: &DegreeOperator,
    cfg: &SolverConfig,
) -> Result<f64> {
    let z = smoothness_vector(x, e, candidates)?;
    let g = graph_objective(&z, op, cfg.alpha, cfg.beta, cfg.fidelity, w)?;
    let reg: f64 = e
        .as_slice()
        .iter()
        .map(|v| cfg.ridge * v * v + cfg.l1 * v.abs())
        .sum();
    Ok(g + reg)
}

fn run(
    x: &SignalMatrix,
    candidates: CandidateEdgeSet,
    mut e: RelationEmbeddings,
    cfg: &SolverConfig,
) -> Result<FitResult> {
    cfg.validate()?;
    let x = if cfg.standardize {
        x.standardized_columns()
    } else {
        x.clone()
    };
    let op = candidates.degree_operator();
    let mut w = initial_weights(candidates.len(), cfg.seed);
    let mut trace = Vec::new();
    let mut inner = Vec::new();
    let mut capped = 0;
    let mut increases = 0;
    let mut streak = 0;
    let mut non_monotone = false;
    let mut reason = StopReason::MaxOuter;

    for _ in 0..cfg.max_outer {
        let z = smoothness_vector(&x, &e, &candidates)?;
        let step = graph_step(&z, &op, cfg.alpha, cfg.beta, cfg.fidelity, &cfg.pds, &w)?;
        inner.push(step.iterations);
        if !step.converged {
            capped += 1;
        }
        w = step.w;
        e = match cfg.update {
            EmbeddingUpdate::Fixed => {
                trace.push(full_objective(&x, &e, &w, &candidates, &op, cfg)?);
                reason = StopReason::SingleStep;
                break;
            }
            EmbeddingUpdate::Ir => ir_update(&w, &x, &candidates, cfg.ir_scale, cfg.ir_shift)?,
            EmbeddingUpdate::Gd => gd_update(
                &e,
                &w,
                &x,
                &candidates,
                cfg.ridge,
                cfg.l1,
                cfg.gd.step,
                cfg.gd.iters,
            )?,
        };
        let obj = full_objective(&x, &e, &w, &candidates, &op, cfg)?;
        if let Some(&prev) = trace.last() {
            if obj >= prev {
                increases += 1;
                streak += 1;
                if streak >= 3 {
                    non_monotone = true;
                }
            } else {
                streak = 0;
            }
            trace.push(obj);
            if (prev - obj).abs() < cfg.outer_tol * prev.abs().max(f64::MIN_POSITIVE) {
                reason = StopReason::Tolerance;
                break;
            }
        } else {
            trace.push(obj);
        }
    }
    Ok(FitResult {
        candidates,
        w,
        embeddings: e,
        objective_trace: trace,
        inner_iterations: inner,
        inner_capped: capped,
        reason,
        increases,
        non_monotone,
    })
}

fn check_signals(x: &SignalMatrix, n: usize) -> Result<()> {
    check_len("signal rows", x.nrows(), n)?;
    if x.ncols() == 0 {
        return Err(Error::Dimension("signals have no dimensions".into()));
    }
    Ok(())
}

/// Alternating graph step and embedding update.
pub fn fit(
    x: &SignalMatrix,
    types: &[usize],
    schema: &RelationSchema,
    cfg: &SolverConfig,
) -> Result<FitResult> {
    check_signals(x, types.len())?;
    let candidates = enumerate_candidates(types, schema)?;
    let e = cfg.init.build(schema.num_relations(), x.ncols());
    run(x, candidates, e, cfg)
}

/// Single-relation baseline over all node pairs with unit uniform embeddings.
pub fn fit_homogeneous(x: &SignalMatrix, cfg: &SolverConfig) -> Result<FitResult> {
    let schema = RelationSchema::from_names(&[("node", 1)], &[("edge", "node", "node")])?;
    let types = vec![0; x.nrows()];
    check_signals(x, types.len())?;
    let candidates = enumerate_candidates(&types, &schema)?;
    let cfg = SolverConfig {
        update: EmbeddingUpdate::Fixed,
        init: EmbeddingInit::UnitNorm,
        ..*cfg
    };
    let e = cfg.init.build(1, x.ncols());
    run(x, candidates, e, &cfg)
}

/// z_i = Σ_{p,q} B_r[p,q] (y_a[p] − y_b[q])², where y_a, y_b are the one-hot
/// labels of the endpoints typed as the relation's first and second type.
pub fn label_smoothness(
    labels: &[Vec<f64>],
    schema: &RelationSchema,
    connectivity: &[ConnectivityMatrix],
    candidates: &CandidateEdgeSet,
) -> Result<Vec<f64>> {
    let types = candidates.node_types();
    check_len("labels", labels.len(), types.len())?;
    check_len("connectivity matrices", connectivity.len(), schema.num_relations())?;
    for (i, (y, &t)) in labels.iter().zip(types).enumerate() {
        let c = schema.node_types().class_count(t);
        let ones = y.iter().filter(|&&v| v == 1.0).count();
        let zeros = y.iter().filter(|&&v| v == 0.0).count();
        if y.len() != c || ones != 1 || ones + zeros != c {
            return Err(Error::Domain(format!("label of node {i} is not one-hot over {c} classes")));
        }
    }
    for (r, b) in connectivity.iter().enumerate() {
        let (a, bt) = schema.relation(r).endpoints;
        let want = (
            schema.node_types().class_count(a),
            schema.node_types().class_count(bt),
        );
        if (b.nrows(), b.ncols()) != want {
            return Err(Error::Dimension(format!(
                "connectivity of relation {r} is {}×{}, expected {}×{}",
                b.nrows(),
                b.ncols(),
                want.0,
                want.1
            )));
        }
    }
    Ok(candidates
        .triples()
        .iter()
        .map(|c| {
            let (a, _) = schema.relation(c.relation).endpoints;
            let (pu, qv) = if types[c.u] == a { (c.u, c.v) } else { (c.v, c.u) };
            let b = &connectivity[c.relation];
            let mut z = 0.0;
            for p in 0..b.nrows() {
                for q in 0..b.ncols() {
                    z += b.get(p, q) * (labels[pu][p] - labels[qv][q]).powi(2);
                }
            }
            z
        })
        .collect())
}

/// Graph step on label-derived smoothness, connectivity given.
pub fn fit_from_labels(
    labels: &[Vec<f64>],
    types: &[usize],
    schema: &RelationSchema,
    connectivity: &[ConnectivityMatrix],
    cfg: &SolverConfig,
) -> Result<FitResult> {
    cfg.validate()?;
    let candidates = enumerate_candidates(types, schema)?;
    let z = label_smoothness(labels, schema, connectivity, &candidates)?;
    let op = candidates.degree_operator();
    let w0 = initial_weights(candidates.len(), cfg.seed);
    let step = graph_step(&z, &op, cfg.alpha, cfg.beta, cfg.fidelity, &cfg.pds, &w0)?;
    let obj = graph_objective(&z, &op, cfg.alpha, cfg.beta, cfg.fidelity, &step.w)?;
    Ok(FitResult {
        candidates,
        w: step.w,
        embeddings: EmbeddingInit::UnitNorm.build(schema.num_relations(), 1),
        objective_trace: vec![obj],
        inner_iterations: vec![step.iterations],
        inner_capped: usize::from(!step.converged),
        reason: StopReason::SingleStep,
        increases: 0,
        non_monotone: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_pair_gets_more_weight() {
        let x = SignalMatrix::from_rows(&[vec![1.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let fit = fit_homogeneous(&x, &SolverConfig::default()).unwrap();
        let idx = |u, v| fit.candidates.index_of(u, v, 0).unwrap();
        assert!(fit.w[idx(0, 1)] > fit.w[idx(0, 2)]);
        assert!(fit.w[idx(0, 1)] > fit.w[idx(1, 2)]);
        assert_eq!(fit.reason, StopReason::SingleStep);
    }

    #[test]
    fn config_validation() {
        let bad = SolverConfig { alpha: 0.0, ..SolverConfig::default() };
        assert!(bad.validate().is_err());
        let bad = SolverConfig { ir_scale: 0.0, ..SolverConfig::default() };
        assert!(bad.validate().is_err());
        assert!(SolverConfig::default().validate().is_ok());
    }

    #[test]
    fn label_smoothness_rejects_soft_labels() {
        let s = RelationSchema::from_names(&[("A", 2)], &[("r", "A", "A")]).unwrap();
        let c = enumerate_candidates(&[0, 0], &s).unwrap();
        let b = ConnectivityMatrix::new(2, 2, vec![0.25; 4]).unwrap();
        let soft = vec![vec![0.5, 0.5], vec![1.0, 0.0]];
        assert!(matches!(label_smoothness(&soft, &s, std::slice::from_ref(&b), &c), Err(Error::Domain(_))));
        let hard = vec![vec![0.0, 1.0], vec![1.0, 0.0]];
        let z = label_smoothness(&hard, &s, &[b], &c).unwrap();
        // Row sum + column sum − 2·B[1,0] = 0.5 + 0.5 − 0.5.
        assert!((z[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn fit_traces_are_finite() {
        let s = RelationSchema::from_names(&[("A", 1)], &[("r", "A", "A"), ("q", "A", "A")]).unwrap();
        let x = SignalMatrix::from_rows(&[
            vec![1.0, 0.2, -0.3],
            vec![0.9, 0.1, 0.5],
            vec![-1.0, 0.4, 0.0],
            vec![0.3, -0.8, 0.2],
        ])
        .unwrap();
        for update in [EmbeddingUpdate::Ir, EmbeddingUpdate::Gd] {
            let cfg = SolverConfig { update, ..SolverConfig::default() };
            let f = fit(&x, &[0; 4], &s, &cfg).unwrap();
            assert!(f.objective_trace.iter().all(|v| v.is_finite()));
            assert!(f.w.iter().all(|&v| v >= 0.0));
            for r in 0..2 {
                let n: f64 = f.embeddings.row(r).iter().map(|v| v * v).sum();
                assert!((n - 1.0).abs() < 1e-12);
            }
        }
    }
}
