use hgsl_core::dgp::*;
use hgsl_core::graph::*;
use hgsl_core::solver::smoothness_vector;
use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn single() -> RelationSchema {
    RelationSchema::from_names(&[("A", 1)], &[("r", "A", "A")]).unwrap()
}

fn two_relations() -> RelationSchema {
    RelationSchema::from_names(&[("A", 1), ("B", 1)], &[("r1", "A", "A"), ("r2", "A", "B")]).unwrap()
}

fn path3() -> HeteroGraph {
    let e = |u, v| Edge { u, v, relation: 0, weight: 1.0 };
    HeteroGraph::new(&single(), vec![0; 3], None, vec![e(0, 1), e(1, 2)]).unwrap()
}

fn column_covariance(x: &SignalMatrix) -> DMatrix<f64> {
    let (n, k) = (x.nrows(), x.ncols());
    let mut c = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            c[(i, j)] = (0..k).map(|d| x.get(i, d) * x.get(j, d)).sum::<f64>() / k as f64;
        }
    }
    c
}

fn dense_laplacian(n: usize, edges: &[(usize, usize, f64)]) -> DMatrix<f64> {
    let mut l = DMatrix::zeros(n, n);
    for &(u, v, w) in edges {
        l[(u, u)] += w;
        l[(v, v)] += w;
        l[(u, v)] -= w;
        l[(v, u)] -= w;
    }
    l
}

fn small_params(k: usize) -> SynthParams {
    SynthParams {
        backbone: BackboneParams::Sbm { block_sizes: vec![25, 25], p: 0.2, q: 0.02 },
        num_dims: k,
        active_dims: k / 2,
        sdor: vec![SdorTarget { a: 0, b: 1, target: 0.0 }],
        magnitude: (0.5, 1.5),
        dgp: DgpConfig::default(),
        block_labels: false,
    }
}

#[test]
fn path_covariance_matches_closed_form() {
    let k = 100_000;
    let e = RelationEmbeddings::uniform(1, k, 1.0);
    let cfg = DgpConfig { sigma: 2.0, nu: 0.5, ..DgpConfig::default() };
    let x = sample_signals(&path3(), &e, &cfg, 3).unwrap();
    let mut precision = dense_laplacian(3, &[(0, 1, 1.0), (1, 2, 1.0)]);
    precision += DMatrix::identity(3, 3) * 0.5;
    let want = precision.try_inverse().unwrap();
    let got = column_covariance(&x);
    for i in 0..3 {
        for j in 0..3 {
            let rel = (got[(i, j)] - want[(i, j)]).abs() / want[(i, j)].abs();
            assert!(rel < 0.05, "({i},{j}): {} vs {}", got[(i, j)], want[(i, j)]);
        }
    }
}

#[test]
fn random_small_graph_covariance() {
    let s = single();
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let n = 4;
    let mut edges = Vec::new();
    let mut dense = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.random_bool(0.7) {
                let w = rng.random_range(0.5..2.0);
                edges.push(Edge { u, v, relation: 0, weight: w });
                dense.push((u, v, w));
            }
        }
    }
    let g = HeteroGraph::new(&s, vec![0; n], None, edges).unwrap();
    let k = 100_000;
    let cfg = DgpConfig { sigma: 1.5, nu: 0.8, ..DgpConfig::default() };
    let x = sample_signals(&g, &RelationEmbeddings::uniform(1, k, 1.0), &cfg, 9).unwrap();
    let mut precision = dense_laplacian(n, &dense);
    precision += DMatrix::identity(n, n) * cfg.nu;
    precision *= 2.0 / cfg.sigma;
    let want = precision.try_inverse().unwrap();
    let got = column_covariance(&x);
    for i in 0..n {
        let tol = 0.03 * (want[(i, i)] + want.diagonal().max());
        for j in 0..n {
            assert!((got[(i, j)] - want[(i, j)]).abs() < tol);
        }
    }
}

#[test]
fn empty_graph_gives_standard_normals() {
    let s = single();
    let g = HeteroGraph::new(&s, vec![0; 5], None, vec![]).unwrap();
    let cfg = DgpConfig { sigma: 2.0, nu: 1.0, ..DgpConfig::default() };
    let x = sample_signals(&g, &RelationEmbeddings::uniform(1, 20_000, 1.0), &cfg, 1).unwrap();
    let v = x.as_slice();
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    let var = v.iter().map(|a| a * a).sum::<f64>() / v.len() as f64;
    assert!(mean.abs() < 0.01 && (var - 1.0).abs() < 0.02, "{mean} {var}");
}

#[test]
fn inactive_dims_ignore_the_graph() {
    let e = RelationEmbeddings::new(1, 2, vec![1.0, 0.0]).unwrap();
    let cfg = DgpConfig { sigma: 2.0, nu: 0.25, ..DgpConfig::default() };
    let mut acc = 0.0;
    let mut count = 0;
    for seed in 0..4000 {
        let x = sample_signals(&path3(), &e, &cfg, seed).unwrap();
        for i in 0..3 {
            acc += x.get(i, 1).powi(2);
            count += 1;
        }
    }
    let var = acc / count as f64;
    let want = cfg.sigma / (2.0 * cfg.nu);
    assert!((var - want).abs() < 0.05 * want, "{var} vs {want}");
}

#[test]
fn energy_equals_quadratic_form() {
    let s = two_relations();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..10 {
        let n = 5;
        let k = 3;
        let types: Vec<usize> = (0..n).map(|_| rng.random_range(0..2)).collect();
        let c = enumerate_candidates(&types, &s).unwrap();
        let mut edges = Vec::new();
        for (u, v, range) in c.pairs() {
            if rng.random_bool(0.6) {
                let i = rng.random_range(range.clone());
                edges.push(Edge { u: *u, v: *v, relation: c.get(i).relation, weight: rng.random_range(1.0..2.0) });
            }
        }
        let g = HeteroGraph::new(&s, types, None, edges).unwrap();
        let e = RelationEmbeddings::new(2, k, (0..2 * k).map(|_| rng.random_range(0.0..1.0)).collect()).unwrap();
        let x = SignalMatrix::new(n, k, (0..n * k).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap();
        let nu = 0.3;
        let mut q = 0.0;
        for d in 0..k {
            let weighted: Vec<_> = g
                .edges()
                .iter()
                .map(|ed| (ed.u, ed.v, ed.weight * e.get(ed.relation, d).powi(2)))
                .collect();
            let m = dense_laplacian(n, &weighted) + DMatrix::identity(n, n) * nu;
            let col = DVector::from_fn(n, |i, _| x.get(i, d));
            q += (col.transpose() * &m * &col)[(0, 0)];
        }
        let en = energy(&g, &e, &x, nu).unwrap();
        assert!((q - en).abs() <= 1e-10 * en.abs());
    }
}

#[test]
fn log_density_is_scaled_negative_energy() {
    let g = path3();
    let e = RelationEmbeddings::new(1, 2, vec![0.8, 0.3]).unwrap();
    let cfg = DgpConfig { sigma: 1.7, nu: 0.2, ..DgpConfig::default() };
    let mut precisions = Vec::new();
    for d in 0..2 {
        let c = e.get(0, d).powi(2);
        let mut m = dense_laplacian(3, &[(0, 1, c), (1, 2, c)]);
        m += DMatrix::identity(3, 3) * cfg.nu;
        precisions.push(m * (2.0 / cfg.sigma));
    }
    let log_density = |x: &SignalMatrix| -> f64 {
        (0..2)
            .map(|d| {
                let col = DVector::from_fn(3, |i, _| x.get(i, d));
                -0.5 * (col.transpose() * &precisions[d] * &col)[(0, 0)]
            })
            .sum()
    };
    let samples: Vec<SignalMatrix> = (0..6).map(|s| sample_signals(&g, &e, &cfg, s).unwrap()).collect();
    for a in &samples {
        for b in &samples {
            let lhs = log_density(a) - log_density(b);
            let rhs = -(energy(&g, &e, a, cfg.nu).unwrap() - energy(&g, &e, b, cfg.nu).unwrap()) / cfg.sigma;
            assert!((lhs - rhs).abs() < 1e-10 * (1.0 + lhs.abs()));
        }
    }
}

#[test]
fn sbm_edge_count_matches_binomial() {
    let params = BackboneParams::Sbm { block_sizes: vec![20, 20], p: 0.5, q: 0.1 };
    let mean = 0.5 * 190.0 * 2.0 + 0.1 * 400.0;
    let sd = (380.0 * 0.25 + 400.0 * 0.09f64).sqrt();
    let counts: Vec<f64> = (0..100)
        .map(|s| generate_backbone(&params, s).unwrap().edges.len() as f64)
        .collect();
    let inside = counts.iter().filter(|&&c| (c - mean).abs() <= 3.0 * sd).count();
    assert!(inside >= 98, "{inside}/100 within 3σ");
    let avg = counts.iter().sum::<f64>() / 100.0;
    assert!((avg - mean).abs() <= 3.0 * sd / 10.0, "mean {avg}");
}

#[test]
fn star_typing_distribution() {
    // Hub 0 roots the BFS. Root A (1/2): each leaf is A or B with 1/2 each,
    // A–A edges use r2 and A–B edges r1. Root B (1/2): every leaf is A, all r1.
    let s = RelationSchema::from_names(&[("A", 1), ("B", 1)], &[("r1", "A", "B"), ("r2", "A", "A")]).unwrap();
    let star = Backbone::new(7, (1..7).map(|l| (0, l)));
    let binom = [1.0, 6.0, 15.0, 20.0, 15.0, 6.0, 1.0];
    let mut p = [0.0; 7];
    for k in 0..7 {
        p[k] = 0.5 * binom[k] / 64.0;
    }
    p[6] += 0.5;
    let mut observed = [0.0; 7];
    let trials = 200;
    for seed in 0..trials {
        let t = assign_types(&star, &s, seed).unwrap();
        assert_eq!(t.dropped, 0);
        let r1 = t.edges.iter().filter(|e| e.2 == 0).count();
        observed[r1] += 1.0;
    }
    // bins {0,1}, 2, 3, 4, 5, 6
    let merge = |v: &[f64; 7]| [v[0] + v[1], v[2], v[3], v[4], v[5], v[6]];
    let (o, e) = (merge(&observed), merge(&p));
    let chi2: f64 = o.iter().zip(&e).map(|(o, e)| (o - e * trials as f64).powi(2) / (e * trials as f64)).sum();
    assert!(chi2 < 20.52, "chi² = {chi2}, observed {observed:?}");
}

#[test]
fn synthesize_is_reproducible() {
    let s = two_relations();
    let a = synthesize(&s, &small_params(60), 17).unwrap();
    let b = synthesize(&s, &small_params(60), 17).unwrap();
    assert_eq!(a, b);
    let bits = |g: &GroundTruth| g.signals.as_slice().iter().map(|x| x.to_bits()).collect::<Vec<_>>();
    assert_eq!(bits(&a), bits(&b));
    let c = synthesize(&s, &small_params(60), 18).unwrap();
    assert_ne!(bits(&a), bits(&c));
}

#[test]
fn synthesize_shapes() {
    let s = two_relations();
    let gt = synthesize(&s, &small_params(60), 4).unwrap();
    assert_eq!((gt.signals.nrows(), gt.signals.ncols()), (50, 60));
    assert_eq!(gt.embeddings.nrows(), 2);
    let c = enumerate_candidates(gt.graph.node_types(), &s).unwrap();
    assert!(c.len() <= 50 * 49 / 2 * 2);
    for r in 0..2 {
        assert_eq!(gt.embeddings.support(r).len(), 30);
        let norm: f64 = gt.embeddings.row(r).iter().map(|x| x * x).sum();
        assert!((norm - 1.0).abs() < 1e-12);
    }
    assert_eq!(gt.achieved_sdor, vec![0.0]);
}

#[test]
fn true_graph_beats_weight_permutations() {
    let s = two_relations();
    let mut wins = 0;
    for seed in 0..100 {
        let gt = synthesize(&s, &small_params(60), seed).unwrap();
        let c = enumerate_candidates(gt.graph.node_types(), &s).unwrap();
        let w = vectorize(&gt.graph, &c).unwrap();
        let z = smoothness_vector(&gt.signals, &gt.embeddings, &c).unwrap();
        let dot = |w: &[f64]| w.iter().zip(&z).map(|(a, b)| a * b).sum::<f64>();
        let truth = dot(&w);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut shuffled = w.clone();
        let beaten = (0..100).all(|_| {
            shuffled.shuffle(&mut rng);
            truth < dot(&shuffled)
        });
        wins += usize::from(beaten);
    }
    assert!(wins >= 95, "{wins}/100");
}
