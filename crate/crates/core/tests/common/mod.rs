//! Independent reference computations shared by the integration tests.
#![allow(dead_code, clippy::too_many_arguments)]

use hgsl_core::graph::{enumerate_candidates, CandidateEdgeSet, RelationSchema};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct StepInstance {
    pub candidates: CandidateEdgeSet,
    pub z: Vec<f64>,
    pub alpha: f64,
    pub beta: f64,
}

/// Random graph-step problem on at most `max_nodes` nodes with 2 relations.
pub fn random_step_instance(seed: u64, max_nodes: usize) -> StepInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let schema = RelationSchema::from_names(&[("A", 1), ("B", 1)], &[("r1", "A", "A"), ("r2", "A", "B")]).unwrap();
    loop {
        let n = rng.random_range(2..=max_nodes);
        let types: Vec<usize> = (0..n).map(|_| rng.random_range(0..2)).collect();
        let candidates = enumerate_candidates(&types, &schema).unwrap();
        if candidates.is_empty() {
            continue;
        }
        let z = (0..candidates.len()).map(|_| rng.random_range(0.05..2.0)).collect();
        return StepInstance {
            candidates,
            z,
            alpha: rng.random_range(0.3..2.0),
            beta: rng.random_range(0.0..1.0),
        };
    }
}

fn degrees(n: usize, ends: &[(usize, usize)], w: &[f64]) -> Vec<f64> {
    let mut d = vec![0.0; n];
    for (&(u, v), wi) in ends.iter().zip(w) {
        d[u] += wi;
        d[v] += wi;
    }
    d
}

fn touched(n: usize, ends: &[(usize, usize)]) -> Vec<bool> {
    let mut t = vec![false; n];
    for &(u, v) in ends {
        t[u] = true;
        t[v] = true;
    }
    t
}

/// Σ(z_i w_i)² (or Σ z_i w_i) − α Σ_v log d_v + β Σ w_i over touched nodes.
pub fn reference_objective(
    n: usize,
    ends: &[(usize, usize)],
    z: &[f64],
    alpha: f64,
    beta: f64,
    quadratic: bool,
    w: &[f64],
) -> f64 {
    let d = degrees(n, ends, w);
    let t = touched(n, ends);
    let mut f = 0.0;
    for (zi, wi) in z.iter().zip(w) {
        f += if quadratic { (zi * wi) * (zi * wi) } else { zi * wi } + beta * wi;
    }
    for v in 0..n {
        if t[v] {
            if d[v] <= 0.0 {
                return f64::INFINITY;
            }
            f -= alpha * d[v].ln();
        }
    }
    f
}

/// Projected gradient with Armijo backtracking onto w ≥ 0.
pub fn projected_gradient(
    n: usize,
    ends: &[(usize, usize)],
    z: &[f64],
    alpha: f64,
    beta: f64,
    quadratic: bool,
    max_iter: usize,
    tol: f64,
) -> (Vec<f64>, f64) {
    let m = ends.len();
    let obj = |w: &[f64]| reference_objective(n, ends, z, alpha, beta, quadratic, w);
    let mut w = vec![1.0; m];
    let mut f = obj(&w);
    let mut t = 1.0;
    for _ in 0..max_iter {
        let d = degrees(n, ends, &w);
        let g: Vec<f64> = (0..m)
            .map(|i| {
                let (u, v) = ends[i];
                let fid = if quadratic { 2.0 * z[i] * z[i] * w[i] } else { z[i] };
                fid + beta - alpha * (1.0 / d[u] + 1.0 / d[v])
            })
            .collect();
        let mut accepted = false;
        let mut moved = 0.0;
        for _ in 0..200 {
            let cand: Vec<f64> = (0..m).map(|i| (w[i] - t * g[i]).max(0.0)).collect();
            let fc = obj(&cand);
            let lin: f64 = (0..m).map(|i| g[i] * (cand[i] - w[i])).sum();
            let sq: f64 = (0..m).map(|i| (cand[i] - w[i]).powi(2)).sum();
            if fc.is_finite() && fc <= f + lin + sq / (2.0 * t) {
                moved = sq.sqrt();
                w = cand;
                f = fc;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
        let scale = 1.0 + w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if moved < tol * scale {
            break;
        }
        t = (t * 2.0).min(1e3);
    }
    (w, f)
}
