use std::collections::BTreeMap;

use super::dataset::{ColumnData, Dataset, FeatureMap, Predicate};
use crate::error::{Error, Result};
use crate::logic::Instance;
use crate::tree::{DecisionTree, NodeId, TreeBuilder};

/// A learned tree together with the predicates its variables stand for.
#[derive(Clone, Debug)]
pub struct LearnedTree {
    pub tree: DecisionTree,
    pub features: FeatureMap,
}

impl LearnedTree {
    pub fn binarize_row(&self, data: &Dataset, row: usize) -> Instance {
        self.features.binarize_row(data, row)
    }

    pub fn predict(&self, data: &Dataset, row: usize) -> bool {
        self.tree
            .evaluate(&self.binarize_row(data, row))
            .expect("instance built from the feature map")
    }

    /// Share of `rows` whose label the tree predicts.
    pub fn accuracy(&self, data: &Dataset, rows: &[usize]) -> f64 {
        if rows.is_empty() {
            return 0.0;
        }
        let hits = rows
            .iter()
            .filter(|&&r| self.predict(data, r) == data.labels()[r])
            .count();
        hits as f64 / rows.len() as f64
    }
}

fn gini(pos: usize, total: usize) -> f64 {
    if total == 0 {
        return 0.0;
    }
    let p = pos as f64 / total as f64;
    2.0 * p * (1.0 - p)
}

struct Split {
    gain: f64,
    predicate: Predicate,
}

struct Learner<'a> {
    data: &'a Dataset,
    features: FeatureMap,
    builder: TreeBuilder,
    path: Vec<usize>,
}

impl Learner<'_> {
    fn on_path(&self, p: &Predicate) -> bool {
        self.path.iter().any(|&v| self.features.features[v] == *p)
    }

    fn consider(&self, best: &mut Option<Split>, predicate: Predicate, gain: f64) {
        if gain > best.as_ref().map_or(1e-12, |s| s.gain) && !self.on_path(&predicate) {
            *best = Some(Split { gain, predicate });
        }
    }

    fn best_split(&self, rows: &[usize]) -> Option<Split> {
        let labels = self.data.labels();
        let n = rows.len();
        let pos = rows.iter().filter(|&&r| labels[r]).count();
        let parent = gini(pos, n);
        let weighted = |lp: usize, ln: usize| {
            let (rp, rn) = (pos - lp, n - ln);
            parent - (ln as f64 * gini(lp, ln) + rn as f64 * gini(rp, rn)) / n as f64
        };
        let mut best: Option<Split> = None;
        for (c, column) in self.data.columns().iter().enumerate() {
            match &column.data {
                ColumnData::Numeric(values) => {
                    let mut sorted: Vec<(f64, bool)> =
                        rows.iter().map(|&r| (values[r], labels[r])).collect();
                    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
                    let mut left_pos = 0;
                    for i in 0..n - 1 {
                        left_pos += usize::from(sorted[i].1);
                        let (a, b) = (sorted[i].0, sorted[i + 1].0);
                        let threshold = a + (b - a) / 2.0;
                        if a < b && threshold < b {
                            let predicate = Predicate::Threshold {
                                column: c,
                                name: column.name.clone(),
                                threshold,
                            };
                            self.consider(&mut best, predicate, weighted(left_pos, i + 1));
                        }
                    }
                }
                ColumnData::Categorical(values) => {
                    let mut counts: BTreeMap<&str, (usize, usize)> = BTreeMap::new();
                    for &r in rows {
                        let e = counts.entry(values[r].as_str()).or_default();
                        e.0 += 1;
                        e.1 += usize::from(labels[r]);
                    }
                    if counts.len() < 2 {
                        continue;
                    }
                    for (category, (count, cat_pos)) in counts {
                        // left branch: rows not in the category
                        let predicate = Predicate::Equals {
                            column: c,
                            name: column.name.clone(),
                            category: category.to_string(),
                        };
                        self.consider(&mut best, predicate, weighted(pos - cat_pos, n - count));
                    }
                }
            }
        }
        best
    }

    fn grow(&mut self, rows: Vec<usize>) -> NodeId {
        let labels = self.data.labels();
        let pos = rows.iter().filter(|&&r| labels[r]).count();
        let majority = 2 * pos > rows.len();
        if pos == 0 || pos == rows.len() {
            return self.builder.leaf(majority);
        }
        let Some(split) = self.best_split(&rows) else {
            return self.builder.leaf(majority);
        };
        let (right, left): (Vec<usize>, Vec<usize>) = rows
            .into_iter()
            .partition(|&r| split.predicate.eval(self.data, r));
        let var = self.features.intern(split.predicate);
        self.path.push(var);
        let l = self.grow(left);
        let r = self.grow(right);
        self.path.pop();
        self.builder.internal(var, l, r)
    }
}

/// Greedy top-down tree on `rows` of `data`, splitting on the Gini impurity
/// decrease without depth limit. Thresholds are midpoints between the
/// values present at each node. A node becomes a leaf with its majority
/// label (0 on ties) when it is pure or no split lowers the impurity.
pub fn learn_tree(data: &Dataset, rows: &[usize]) -> Result<LearnedTree> {
    if rows.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    let mut learner = Learner {
        data,
        features: FeatureMap::default(),
        builder: TreeBuilder::new(),
        path: Vec::new(),
    };
    let root = learner.grow(rows.to_vec());
    let n = learner.features.len();
    let tree = learner.builder.build(n, root)?;
    Ok(LearnedTree {
        tree,
        features: learner.features,
    })
}
