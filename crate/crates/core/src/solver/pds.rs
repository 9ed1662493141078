//! Forward-backward-forward primal-dual splitting for the graph step
//!
//! min_w  h(w) − α Σ_v log (Tw)_v + β‖w‖₁  s.t. w ≥ 0

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::graph::DegreeOperator;

/// Shape of the smoothness term h.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fidelity {
    /// h(w) = ‖w ∘ z‖²
    #[default]
    Quadratic,
    /// h(w) = ⟨w, z⟩
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PdsSettings {
    pub max_iter: usize,
    pub safety: f64,
    pub tol: f64,
}

impl Default for PdsSettings {
    fn default() -> Self {
        Self {
            max_iter: 20_000,
            safety: 0.9,
            tol: 1e-5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraphStepOutput {
    pub w: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub step: f64,
}

fn fidelity_grad(fidelity: Fidelity, z: &[f64], w: &[f64], out: &mut [f64]) {
    match fidelity {
        Fidelity::Quadratic => {
            for ((g, zi), wi) in out.iter_mut().zip(z).zip(w) {
                *g = 2.0 * zi * zi * wi;
            }
        }
        Fidelity::Linear => out.copy_from_slice(z),
    }
}

pub fn fidelity_value(fidelity: Fidelity, z: &[f64], w: &[f64]) -> f64 {
    match fidelity {
        Fidelity::Quadratic => z.iter().zip(w).map(|(zi, wi)| (zi * wi).powi(2)).sum(),
        Fidelity::Linear => z.iter().zip(w).map(|(zi, wi)| zi * wi).sum(),
    }
}

/// Value of the graph-step objective. Nodes the operator never touches are
/// left out of the barrier; a zero degree elsewhere gives +∞.
pub fn graph_objective(
    z: &[f64],
    op: &DegreeOperator,
    alpha: f64,
    beta: f64,
    fidelity: Fidelity,
    w: &[f64],
) -> Result<f64> {
    check_len("smoothness vector", z.len(), op.num_candidates())?;
    check_len("weight vector", w.len(), op.num_candidates())?;
    if w.iter().any(|&x| x < 0.0) {
        return Ok(f64::INFINITY);
    }
    let d = op.apply(w)?;
    let touched = touched_nodes(op);
    let mut barrier = 0.0;
    for (dv, t) in d.iter().zip(&touched) {
        if *t {
            if *dv <= 0.0 {
                return Ok(f64::INFINITY);
            }
            barrier += dv.ln();
        }
    }
    Ok(fidelity_value(fidelity, z, w) - alpha * barrier + beta * w.iter().sum::<f64>())
}

fn touched_nodes(op: &DegreeOperator) -> Vec<bool> {
    let mut touched = vec![false; op.num_nodes()];
    for &(u, v) in op.endpoints() {
        touched[u] = true;
        touched[v] = true;
    }
    touched
}

pub fn step_size(z: &[f64], op: &DegreeOperator, fidelity: Fidelity, safety: f64) -> f64 {
    let lip = match fidelity {
        Fidelity::Quadratic => 2.0 * z.iter().fold(0.0f64, |m, x| m.max(x * x)),
        Fidelity::Linear => 0.0,
    };
    safety / (lip + op.norm())
}

pub fn graph_step(
    z: &[f64],
    op: &DegreeOperator,
    alpha: f64,
    beta: f64,
    fidelity: Fidelity,
    settings: &PdsSettings,
    w_init: &[f64],
) -> Result<GraphStepOutput> {
    let m = op.num_candidates();
    check_len("smoothness vector", z.len(), m)?;
    check_len("initial weights", w_init.len(), m)?;
    if !(alpha > 0.0) {
        return Err(Error::Param(format!("alpha = {alpha} must be positive")));
    }
    if !(beta >= 0.0) {
        return Err(Error::Param(format!("beta = {beta} must be nonnegative")));
    }
    if !(settings.safety > 0.0 && settings.safety < 1.0) {
        return Err(Error::Param(format!("safety = {} must lie in (0, 1)", settings.safety)));
    }
    if !(settings.tol > 0.0) || settings.max_iter == 0 {
        return Err(Error::Param("PDS tolerance and iteration cap must be positive".into()));
    }
    if let Some(i) = z.iter().position(|x| !x.is_finite()) {
        return Err(Error::Domain(format!("smoothness entry {i} is not finite")));
    }
    if m == 0 {
        return Ok(GraphStepOutput {
            w: Vec::new(),
            iterations: 0,
            converged: true,
            step: 0.0,
        });
    }

    let n = op.num_nodes();
    let gamma = step_size(z, op, fidelity, settings.safety);
    let mut w: Vec<f64> = w_init.iter().map(|x| x.max(0.0)).collect();
    let mut v = vec![0.0; n];
    op.apply_into(&w, &mut v);

    let mut grad = vec![0.0; m];
    let mut tv = vec![0.0; m];
    let mut tw = vec![0.0; n];
    let mut y = vec![0.0; m];
    let mut yb = vec![0.0; n];
    let mut p = vec![0.0; m];
    let mut pb = vec![0.0; n];
    let mut q = vec![0.0; m];
    let mut qb = vec![0.0; n];
    let four_ag = 4.0 * alpha * gamma;

    for it in 1..=settings.max_iter {
        fidelity_grad(fidelity, z, &w, &mut grad);
        op.adjoint_into(&v, &mut tv);
        op.apply_into(&w, &mut tw);
        for i in 0..m {
            y[i] = w[i] - gamma * (grad[i] + tv[i]);
            p[i] = (y[i] - gamma * beta).max(0.0);
        }
        for j in 0..n {
            yb[j] = v[j] + gamma * tw[j];
            pb[j] = (yb[j] - (yb[j] * yb[j] + four_ag).sqrt()) / 2.0;
        }
        fidelity_grad(fidelity, z, &p, &mut grad);
        op.adjoint_into(&pb, &mut tv);
        op.apply_into(&p, &mut tw);
        let mut diff = 0.0;
        let mut norm = 0.0;
        for i in 0..m {
            q[i] = p[i] - gamma * (grad[i] + tv[i]);
            let next = w[i] - y[i] + q[i];
            diff += (next - w[i]).powi(2);
            norm += w[i] * w[i];
            w[i] = next;
        }
        for j in 0..n {
            qb[j] = pb[j] + gamma * tw[j];
            v[j] = v[j] - yb[j] + qb[j];
        }
        if !diff.is_finite() {
            return Err(Error::Divergence {
                iteration: it,
                step: gamma,
            });
        }
        if diff.sqrt() < settings.tol * norm.sqrt().max(f64::MIN_POSITIVE) {
            return Ok(GraphStepOutput {
                w: clamp(w),
                iterations: it,
                converged: true,
                step: gamma,
            });
        }
    }
    Ok(GraphStepOutput {
        w: clamp(w),
        iterations: settings.max_iter,
        converged: false,
        step: gamma,
    })
}

// The primal iterate can sit a rounding error below zero after the final
// forward step; the minimizer lives on w ≥ 0.
fn clamp(mut w: Vec<f64>) -> Vec<f64> {
    w.iter_mut().for_each(|x| *x = x.max(0.0));
    w
}
