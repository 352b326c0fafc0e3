use std::collections::BTreeMap;
use std::path::PathBuf;

use reasonkit::pipeline::{
    self, batch_explain, cross_validate, learn_tree, BatchConfig, Dataset, ExplainKind,
};
use reasonkit::tree_format::serialize_tree;
use reasonkit::{DecisionTree, Literal};

fn breast_cancer() -> Dataset {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data/breast_cancer.csv");
    pipeline::ingest_csv(path, "diagnosis", Some("malignant")).unwrap()
}

#[test]
fn ingestion_of_the_fixture() {
    let d = breast_cancer();
    assert_eq!(d.len(), 569);
    assert_eq!(d.columns().len(), 30);
    assert_eq!(d.positive_class(), "malignant");
    assert_eq!(d.labels().iter().filter(|&&l| l).count(), 212);
}

#[test]
fn learned_tree_is_valid_and_consistent_with_its_leaves() {
    let d = breast_cancer();
    let rows: Vec<usize> = (0..d.len()).collect();
    let model = learn_tree(&d, &rows).unwrap();
    let tree = &model.tree;
    // rebuilding runs every structural and read-once check again
    let rebuilt = DecisionTree::new(tree.n(), tree.nodes().to_vec(), tree.root()).unwrap();
    assert_eq!(&rebuilt, tree);
    assert_eq!(tree.n(), model.features.len());

    // the learner stops only on pure nodes or zero gain, so each leaf carries
    // the majority label of the training rows reaching it
    let mut leaves: BTreeMap<Vec<Literal>, (bool, usize, usize)> = BTreeMap::new();
    for &r in &rows {
        let (path, label) = tree.path(&model.binarize_row(&d, r)).unwrap();
        let e = leaves.entry(path).or_insert((label, 0, 0));
        e.1 += 1;
        e.2 += usize::from(d.labels()[r]);
    }
    for (label, total, positive) in leaves.values() {
        assert_eq!(*label, 2 * positive > *total, "{positive} of {total}");
    }
}

#[test]
fn feature_map_reproduces_the_boolean_matrix() {
    let d = breast_cancer();
    let rows: Vec<usize> = (0..200).collect();
    let model = learn_tree(&d, &rows).unwrap();
    let b = model.features.materialize(&d);
    assert_eq!(b.rows.len(), d.len());
    for (r, x) in b.rows.iter().enumerate() {
        assert_eq!(*x, model.binarize_row(&d, r));
        assert_eq!(model.tree.evaluate(x).unwrap(), model.predict(&d, r));
    }
}

#[test]
fn cross_validation_is_deterministic() {
    let d = breast_cancer();
    let a = cross_validate(&d, 10, 3).unwrap();
    let b = cross_validate(&d, 10, 3).unwrap();
    assert_eq!(a.len(), 10);
    let mut seen = vec![false; d.len()];
    for (fa, fb) in a.iter().zip(&b) {
        assert_eq!(fa.test_rows, fb.test_rows);
        assert_eq!(
            serialize_tree(&fa.model.tree),
            serialize_tree(&fb.model.tree)
        );
        assert!(
            fa.accuracy > 0.75,
            "fold {} accuracy {}",
            fa.fold,
            fa.accuracy
        );
        for &r in &fa.test_rows {
            assert!(!seen[r]);
            seen[r] = true;
        }
    }
    assert!(seen.iter().all(|&s| s));
}

#[test]
fn batch_on_a_learned_tree() {
    let d = breast_cancer();
    let folds = cross_validate(&d, 10, 1).unwrap();
    let fold = &folds[0];
    let instances: Vec<_> = fold
        .test_rows
        .iter()
        .map(|&r| fold.model.binarize_row(&d, r))
        .collect();
    let config = BatchConfig {
        kinds: vec![
            ExplainKind::Direct,
            ExplainKind::Sufficient,
            ExplainKind::Minimal,
            ExplainKind::Probable,
        ],
        ..BatchConfig::default()
    };
    let mut out = batch_explain(&fold.model.tree, &instances, &config).unwrap();
    out.stats.accuracy = Some(fold.accuracy);
    assert_eq!(out.reports.len(), instances.len());
    for r in &out.reports {
        assert!(r.errors.is_empty());
        let (d, s, m) = (
            r.direct.as_ref().unwrap().size,
            r.sufficient.as_ref().unwrap().size,
            r.minimal.as_ref().unwrap().size,
        );
        assert!(m <= s && s <= d);
        assert_eq!(r.probable[0].size, s);
    }
    let sizes = &out.stats.sizes;
    assert!(sizes["minimal"].median <= sizes["direct"].median);
    assert_eq!(sizes["probable@1/1"], sizes["sufficient"]);
    let json = serde_json::to_value(&out.stats).unwrap();
    assert!(json["timings"]["minimal"]["p90_ms"].is_number());
}

#[test]
fn multi_class_labels_need_a_target() {
    let text = "x,species\n1,setosa\n2,versicolor\n3,virginica\n4,setosa\n";
    let d = Dataset::from_reader(text.as_bytes(), "species", Some("virginica")).unwrap();
    assert_eq!(d.labels(), &[false, false, true, false]);
    let model = learn_tree(&d, &[0, 1, 2, 3]).unwrap();
    assert_eq!(model.accuracy(&d, &[0, 1, 2, 3]), 1.0);
    assert!(Dataset::from_reader(text.as_bytes(), "species", None).is_err());
}
