//! Relation-embedding updates: closed-form reweighting and projected gradient.

use crate::error::{check_len, Error, Result};
use crate::graph::{CandidateEdgeSet, RelationEmbeddings, SignalMatrix};

fn check_shapes(x: &SignalMatrix, candidates: &CandidateEdgeSet, w: &[f64]) -> Result<()> {
    check_len("signal rows", x.nrows(), candidates.num_nodes())?;
    check_len("weight vector", w.len(), candidates.len())
}

/// z_i = ‖e_{r(i)} ∘ (x_v − x_u)‖² for every candidate.
pub fn smoothness_vector(
    x: &SignalMatrix,
    e: &RelationEmbeddings,
    candidates: &CandidateEdgeSet,
) -> Result<Vec<f64>> {
    check_len("signal rows", x.nrows(), candidates.num_nodes())?;
    check_len("embedding rows", e.nrows(), candidates.num_relations())?;
    check_len("embedding columns", e.ncols(), x.ncols())?;
    let sq: Vec<Vec<f64>> = (0..e.nrows())
        .map(|r| e.row(r).iter().map(|v| v * v).collect())
        .collect();
    Ok(candidates
        .triples()
        .iter()
        .map(|c| {
            let (xu, xv, er) = (x.row(c.u), x.row(c.v), &sq[c.relation]);
            let mut s = 0.0;
            for k in 0..er.len() {
                let d = xv[k] - xu[k];
                s += er[k] * d * d;
            }
            s
        })
        .collect())
}

/// Per-relation, per-dimension weighted squared differences
/// S_{r,k} = Σ_{i∈E′_r} w_i (x_{v,k} − x_{u,k})².
pub fn dimension_smoothness(
    x: &SignalMatrix,
    w: &[f64],
    candidates: &CandidateEdgeSet,
) -> Result<Vec<Vec<f64>>> {
    check_shapes(x, candidates, w)?;
    let k = x.ncols();
    let mut s = vec![vec![0.0; k]; candidates.num_relations()];
    for (c, &wi) in candidates.triples().iter().zip(w) {
        if wi == 0.0 {
            continue;
        }
        let (xu, xv) = (x.row(c.u), x.row(c.v));
        let row = &mut s[c.relation];
        for d in 0..k {
            row[d] += wi * (xv[d] - xu[d]).powi(2);
        }
    }
    Ok(s)
}

// Clamped rows that end up all zero fall back to uniform before normalizing.
fn finish_rows(rows: usize, cols: usize, mut data: Vec<f64>) -> RelationEmbeddings {
    for row in data.chunks_mut(cols.max(1)) {
        row.iter_mut().for_each(|x| *x = x.max(0.0));
        if row.iter().all(|&x| x == 0.0) {
            row.iter_mut().for_each(|x| *x = 1.0 / cols as f64);
        }
    }
    RelationEmbeddings::from_raw_unchecked(rows, cols, data).normalized()
}

/// raw_{r,k} = λ₁′ Σ_{i∈E′_r} w_i x_{v,k} x_{u,k} − λ₂′, clamped, normalized.
pub fn ir_update(
    w: &[f64],
    x: &SignalMatrix,
    candidates: &CandidateEdgeSet,
    lambda1: f64,
    lambda2: f64,
) -> Result<RelationEmbeddings> {
    check_shapes(x, candidates, w)?;
    if let Some(i) = w.iter().position(|v| !(*v >= 0.0)) {
        return Err(Error::Domain(format!("weight {i} is negative or NaN")));
    }
    let k = x.ncols();
    let nr = candidates.num_relations();
    let mut raw = vec![0.0; nr * k];
    for (c, &wi) in candidates.triples().iter().zip(w) {
        if wi == 0.0 {
            continue;
        }
        let (xu, xv) = (x.row(c.u), x.row(c.v));
        let row = &mut raw[c.relation * k..(c.relation + 1) * k];
        for d in 0..k {
            row[d] += wi * xv[d] * xu[d];
        }
    }
    raw.iter_mut().for_each(|v| *v = lambda1 * *v - lambda2);
    Ok(finish_rows(nr, k, raw))
}

/// S(X, E, W) + λ₁‖E‖² + λ₂‖E‖₁ with the element-wise fidelity.
pub fn embedding_objective(
    e: &RelationEmbeddings,
    w: &[f64],
    x: &SignalMatrix,
    candidates: &CandidateEdgeSet,
    lambda1: f64,
    lambda2: f64,
) -> Result<f64> {
    let s = dimension_smoothness(x, w, candidates)?;
    check_len("embedding rows", e.nrows(), s.len())?;
    let mut total = 0.0;
    for (r, sr) in s.iter().enumerate() {
        for (k, skr) in sr.iter().enumerate() {
            let v = e.get(r, k);
            total += v * v * skr + lambda1 * v * v + lambda2 * v.abs();
        }
    }
    Ok(total)
}

fn gradient_from(e: &[f64], s: &[Vec<f64>], lambda1: f64, lambda2: f64, out: &mut [f64]) {
    let k = s.first().map_or(0, Vec::len);
    for (r, sr) in s.iter().enumerate() {
        for d in 0..k {
            let v = e[r * k + d];
            out[r * k + d] = 2.0 * v * sr[d] + 2.0 * lambda1 * v + lambda2;
        }
    }
}

/// Gradient of [`embedding_objective`] on the positive orthant, row-major |ℛ|×K.
pub fn embedding_gradient(
    e: &RelationEmbeddings,
    w: &[f64],
    x: &SignalMatrix,
    candidates: &CandidateEdgeSet,
    lambda1: f64,
    lambda2: f64,
) -> Result<Vec<f64>> {
    let s = dimension_smoothness(x, w, candidates)?;
    check_len("embedding rows", e.nrows(), s.len())?;
    let mut g = vec![0.0; e.as_slice().len()];
    gradient_from(e.as_slice(), &s, lambda1, lambda2, &mut g);
    Ok(g)
}

/// Projected gradient descent on the embedding objective from `e`, rows
/// renormalized at the end.
#[allow(clippy::too_many_arguments)]
pub fn gd_update(
    e: &RelationEmbeddings,
    w: &[f64],
    x: &SignalMatrix,
    candidates: &CandidateEdgeSet,
    lambda1: f64,
    lambda2: f64,
    step: f64,
    iters: usize,
) -> Result<RelationEmbeddings> {
    if !(step > 0.0) {
        return Err(Error::Param(format!("step = {step} must be positive")));
    }
    let s = dimension_smoothness(x, w, candidates)?;
    check_len("embedding rows", e.nrows(), s.len())?;
    check_len("embedding columns", e.ncols(), x.ncols())?;
    let mut cur = e.as_slice().to_vec();
    let mut g = vec![0.0; cur.len()];
    for it in 0..iters {
        gradient_from(&cur, &s, lambda1, lambda2, &mut g);
        if g.iter().any(|v| !v.is_finite()) {
            return Err(Error::Divergence { iteration: it, step });
        }
        for (c, gi) in cur.iter_mut().zip(&g) {
            *c = (*c - step * gi).max(0.0);
        }
    }
    Ok(finish_rows(e.nrows(), e.ncols(), cur))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{enumerate_candidates, RelationSchema};

    fn pair() -> CandidateEdgeSet {
        let s = RelationSchema::from_names(&[("A", 1)], &[("r", "A", "A")]).unwrap();
        enumerate_candidates(&[0, 0], &s).unwrap()
    }

    #[test]
    fn smoothness_examples() {
        let c = pair();
        let x = SignalMatrix::from_rows(&[vec![1.0, 2.0, 3.0], vec![1.0, 2.0, 3.0]]).unwrap();
        let e = RelationEmbeddings::uniform(1, 3, 0.5);
        assert_eq!(smoothness_vector(&x, &e, &c).unwrap(), vec![0.0]);
        let x = SignalMatrix::from_rows(&[vec![1.0, 2.0, 3.0], vec![4.0, -2.0, 0.0]]).unwrap();
        let e = RelationEmbeddings::from_rows(&[vec![0.0, 1.0, 0.0]]).unwrap();
        assert_eq!(smoothness_vector(&x, &e, &c).unwrap(), vec![16.0]);
    }

    #[test]
    fn ir_examples() {
        let c = pair();
        let x = SignalMatrix::from_rows(&[vec![1.0, 0.0], vec![1.0, 0.0]]).unwrap();
        let e = ir_update(&[0.0], &x, &c, 1.0, 0.0).unwrap();
        let u = 1.0 / 2f64.sqrt();
        assert_eq!(e.row(0), &[u, u]);
        assert_eq!(ir_update(&[1.0], &x, &c, 1.0, 0.0).unwrap().row(0), &[1.0, 0.0]);
        let x = SignalMatrix::from_rows(&[vec![1.0, 1.0], vec![1.0, -1.0]]).unwrap();
        assert_eq!(ir_update(&[1.0], &x, &c, 1.0, 0.0).unwrap().row(0), &[1.0, 0.0]);
        assert!(ir_update(&[-1.0], &x, &c, 1.0, 0.0).is_err());
    }

    #[test]
    fn gd_pure_ridge_keeps_direction() {
        let c = pair();
        let x = SignalMatrix::from_rows(&[vec![1.0, 5.0, -2.0], vec![0.0, 1.0, 3.0]]).unwrap();
        let e0 = RelationEmbeddings::from_rows(&[vec![0.2, 0.5, 0.9]]).unwrap();
        let e = gd_update(&e0, &[0.0], &x, &c, 0.3, 0.0, 0.1, 50).unwrap();
        let n = e0.normalized();
        for k in 0..3 {
            assert!((e.get(0, k) - n.get(0, k)).abs() < 1e-12);
        }
        assert!(gd_update(&e0, &[0.0], &x, &c, 0.3, 0.0, 0.0, 5).is_err());
    }

    #[test]
    fn gd_diverges_loudly() {
        let c = pair();
        let x = SignalMatrix::from_rows(&[vec![0.0], vec![1e200]]).unwrap();
        let e0 = RelationEmbeddings::from_rows(&[vec![1.0]]).unwrap();
        assert!(matches!(
            gd_update(&e0, &[1e200], &x, &c, 0.0, 0.0, 1.0, 3),
            Err(Error::Divergence { .. })
        ));
    }
}
