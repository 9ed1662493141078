use std::fs;
use std::path::Path;

use hgsl_core::graph::{enumerate_candidates, Edge, HeteroGraph, RelationSchema, SignalMatrix};
use hgsl_core::solver::{fit, SolverConfig};
use hgsl_harness::experiment::{evaluate, ExperimentSpec, Reference};
use hgsl_harness::io::{self, Dataset, DatasetPaths};
use hgsl_harness::HarnessError;

fn write(dir: &Path, name: &str, body: &str) {
    fs::write(dir.join(name), body).unwrap();
}

fn two_node_files(dir: &Path) {
    write(dir, "schema.json", r#"{"node_types":{"A":2,"B":1},"relations":{"r1":["A","B"]}}"#);
    write(dir, "nodes.csv", "id,type,label\nn0,A,1\nn1,B,0\n");
    write(dir, "edges.csv", "u,v,relation,weight\nn0,n1,r1,0.75\n");
    write(dir, "features.csv", "id,f0,f1,f2\nn0,0.1,-2.5,3\nn1,1e-7,0.3333333333333333,-0\n");
}

#[test]
fn two_node_dataset_round_trips() {
    let a = tempfile::tempdir().unwrap();
    two_node_files(a.path());
    let first = io::load_dataset(&DatasetPaths::in_dir(a.path())).unwrap();
    assert_eq!(first.num_nodes(), 2);
    assert_eq!(first.labels, Some(vec![1, 0]));
    assert_eq!(first.graph.as_ref().unwrap().edges().len(), 1);

    let b = tempfile::tempdir().unwrap();
    io::save_dataset(&first, b.path()).unwrap();
    let second = io::load_dataset(&DatasetPaths::in_dir(b.path())).unwrap();
    assert_eq!(first, second);
}

#[test]
fn unknown_node_id_names_the_row() {
    let d = tempfile::tempdir().unwrap();
    two_node_files(d.path());
    write(d.path(), "edges.csv", "u,v,relation,weight\nn0,n1,r1,0.75\nn0,ghost,r1,1\n");
    let err = io::load_dataset(&DatasetPaths::in_dir(d.path())).unwrap_err();
    match &err {
        HarnessError::Row { line, message, .. } => {
            assert_eq!(*line, 3);
            assert!(message.contains("ghost"), "{message}");
        }
        other => panic!("unexpected error {other:?}"),
    }
    let text = err.to_string();
    assert!(text.contains("edges.csv") && text.contains("line 3"), "{text}");
}

#[test]
fn feature_row_count_mismatch_names_both_counts() {
    let d = tempfile::tempdir().unwrap();
    two_node_files(d.path());
    write(d.path(), "features.csv", "id,f0\nn0,1\n");
    let text = io::load_dataset(&DatasetPaths::in_dir(d.path())).unwrap_err().to_string();
    assert!(text.contains("1 feature rows") && text.contains("2 nodes"), "{text}");
}

#[test]
fn malformed_inputs_are_rejected() {
    let cases = [
        ("edges.csv", "u,v,relation,weight\nn0,n1,r1,0.75\nn1,n0,r1,2\n", "duplicate"),
        ("edges.csv", "u,v,relation,weight\nn0,n1,r9,1\n", "r9"),
        ("edges.csv", "u,v,relation,weight\nn0,n1,r1,-1\n", "weight"),
        ("nodes.csv", "id,type,label\nn0,C,0\nn1,B,0\n", "C"),
        ("nodes.csv", "id,type,label\nn0,A,5\nn1,B,0\n", "label"),
        ("features.csv", "id,f0\nn0,abc\nn1,1\n", "abc"),
        ("features.csv", "id,x0\nn0,1\nn1,1\n", "header"),
    ];
    for (file, body, needle) in cases {
        let d = tempfile::tempdir().unwrap();
        two_node_files(d.path());
        write(d.path(), file, body);
        let text = io::load_dataset(&DatasetPaths::in_dir(d.path())).unwrap_err().to_string();
        assert!(text.contains(needle), "{file}: `{text}` lacks `{needle}`");
    }
}

#[test]
fn inadmissible_edge_type_pair_is_rejected() {
    let d = tempfile::tempdir().unwrap();
    two_node_files(d.path());
    write(d.path(), "nodes.csv", "id,type,label\nn0,A,1\nn1,A,0\n");
    let text = io::load_dataset(&DatasetPaths::in_dir(d.path())).unwrap_err().to_string();
    assert!(text.contains("line 2"), "{text}");
}

fn small_dataset() -> Dataset {
    let schema = RelationSchema::new(
        hgsl_core::graph::NodeTypeSet::new([("A", 1), ("B", 1)]).unwrap(),
        &[("r1", "A", "A"), ("r2", "A", "B")],
    )
    .unwrap();
    let types = vec![0, 0, 0, 1, 1];
    let edges = vec![
        Edge { u: 0, v: 1, relation: 0, weight: 1.0 },
        Edge { u: 1, v: 3, relation: 1, weight: 0.5 },
        Edge { u: 2, v: 4, relation: 1, weight: 2.0 },
    ];
    let graph = HeteroGraph::new(&schema, types.clone(), None, edges).unwrap();
    let signals = SignalMatrix::from_rows(&[
        vec![0.1, 0.4, -0.3, 1.0],
        vec![0.2, 0.5, -0.2, 0.9],
        vec![1.0, -1.0, 0.3, 0.0],
        vec![0.0, 0.6, -0.1, 0.8],
        vec![1.1, -0.8, 0.2, 0.1],
    ])
    .unwrap();
    Dataset {
        schema,
        node_ids: ["a", "b", "c", "d", "e"].map(String::from).to_vec(),
        node_types: types,
        labels: None,
        graph: Some(graph),
        signals,
    }
}

#[test]
fn saved_results_reload_to_the_learned_scores() {
    let ds = small_dataset();
    let f = fit(&ds.signals, &ds.node_types, &ds.schema, &SolverConfig::default()).unwrap();
    let spec = ExperimentSpec::default();
    let reference = Reference { graph: ds.graph.as_ref(), embeddings: None, active_dims: None };
    let (report, _) = evaluate(&ds.signals, &f, None, &reference, &spec).unwrap();
    let d = tempfile::tempdir().unwrap();
    io::save_result(d.path(), &ds, &f, &report, 0.0).unwrap();

    let cands = enumerate_candidates(&ds.node_types, &ds.schema).unwrap();
    let w = io::load_scores(&d.path().join("learned_edges.csv"), &ds, &cands).unwrap();
    let expect: Vec<f64> = f.w.iter().map(|&x| if x > 0.0 { x } else { 0.0 }).collect();
    assert_eq!(w, expect);

    let e = io::load_embeddings(&d.path().join("embeddings.csv"), &ds.schema).unwrap();
    assert_eq!(e, f.embeddings);
    let m: serde_json::Value = io::read_json(&d.path().join("metrics.json")).unwrap();
    assert!(m.get("auc").is_some() && m.get("provenance").is_some());
}

#[test]
fn empty_label_allowed_only_for_single_class_types() {
    let d = tempfile::tempdir().unwrap();
    two_node_files(d.path());
    write(d.path(), "nodes.csv", "id,type,label\nn0,A,0\nn1,B,\n");
    assert!(io::load_dataset(&DatasetPaths::in_dir(d.path())).is_ok());
    write(d.path(), "nodes.csv", "id,type,label\nn0,A,\nn1,B,0\n");
    assert!(io::load_dataset(&DatasetPaths::in_dir(d.path())).is_err());
}
