//! Brute-force and recursive reference computations, plus generators for the
//! extremal tree families and random test trees.
//!
//! Nothing here goes through the restricted clause set or the hitting-set
//! engine; the oracles only evaluate the tree.

use std::collections::BTreeSet;

use num_bigint::BigUint;
use rand::Rng;

use crate::abductive::Rational;
use crate::error::{Error, Result};
use crate::logic::{Instance, Literal, Term};
use crate::tree::{DecisionTree, Node, NodeId, TreeBuilder};

pub const DEFAULT_ORACLE_LIMIT: usize = 16;

/// Exhaustive implicant table of a tree around one positive instance, over
/// the variables the tree actually tests.
pub struct BruteForce {
    vars: Vec<usize>,
    x_mask: usize,
    implicant: Vec<bool>,
    x: Instance,
}

impl BruteForce {
    pub fn new(tree: &DecisionTree, x: &Instance, limit: usize) -> Result<Self> {
        let vars: Vec<usize> = tree.vars().into_iter().collect();
        let m = vars.len();
        if m > limit {
            return Err(Error::OracleLimit { vars: m, limit });
        }
        if !tree.evaluate(x)? {
            return Err(Error::NegativeInstance);
        }
        let full = (1usize << m) - 1;
        let mut values = x.values().to_vec();
        let table: Vec<bool> = (0..=full)
            .map(|a| {
                for (i, &v) in vars.iter().enumerate() {
                    values[v] = a >> i & 1 == 1;
                }
                tree.evaluate(&Instance::new(values.clone()))
                    .expect("length checked above")
            })
            .collect();
        let x_mask = vars
            .iter()
            .enumerate()
            .filter(|(_, &v)| x.value(v))
            .fold(0, |acc, (i, _)| acc | 1 << i);

        // S is an implicant iff every completion of x restricted to S is a model
        let implicant = (0..=full)
            .map(|s: usize| {
                let fixed = x_mask & s;
                let free = full & !s;
                let mut sub = free;
                loop {
                    if !table[fixed | sub] {
                        return false;
                    }
                    if sub == 0 {
                        return true;
                    }
                    sub = (sub - 1) & free;
                }
            })
            .collect();
        Ok(BruteForce {
            vars,
            x_mask,
            implicant,
            x: x.clone(),
        })
    }

    pub fn vars(&self) -> &[usize] {
        &self.vars
    }

    fn term_of(&self, mask: usize) -> Term {
        Term::new(
            self.vars
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, &v)| self.x.literal(v)),
        )
        .expect("subterm of t_x")
    }

    /// Mask of a subterm of `t_x`; `None` if `t` is not such a subterm or
    /// uses variables outside `Var(T)`.
    pub fn mask_of(&self, t: &Term) -> Option<usize> {
        let mut mask = 0;
        for l in t.iter() {
            let i = self.vars.iter().position(|&v| v == l.var)?;
            if l.positive != (self.x_mask >> i & 1 == 1) {
                return None;
            }
            mask |= 1 << i;
        }
        Some(mask)
    }

    pub fn is_implicant_mask(&self, mask: usize) -> bool {
        self.implicant[mask]
    }

    /// Subterms of `t_x` over `Var(T)`, each with its implicant status.
    pub fn subterms(&self) -> impl Iterator<Item = (Term, bool)> + '_ {
        (0..self.implicant.len()).map(|s| (self.term_of(s), self.implicant[s]))
    }

    /// Prime implicants covering `x`.
    pub fn sufficient_reasons(&self) -> BTreeSet<Term> {
        (0..self.implicant.len())
            .filter(|&s| {
                self.implicant[s]
                    && (0..self.vars.len())
                        .filter(|i| s >> i & 1 == 1)
                        .all(|i| !self.implicant[s & !(1 << i)])
            })
            .map(|s| self.term_of(s))
            .collect()
    }
}

/// Every prime implicant of the tree covering `x`, found by testing every
/// subterm of `t_x` over `Var(T)` against all of its completions.
pub fn brute_force_sufficient_reasons(
    tree: &DecisionTree,
    x: &Instance,
    limit: usize,
) -> Result<BTreeSet<Term>> {
    Ok(BruteForce::new(tree, x, limit)?.sufficient_reasons())
}

fn term_implies_subtree(tree: &DecisionTree, node: NodeId, t: &Term) -> bool {
    match tree.node(node) {
        Node::Leaf(label) => label,
        Node::Internal { var, left, right } => match t.literal_of(var) {
            Some(l) if l.positive => term_implies_subtree(tree, right, t),
            Some(_) => term_implies_subtree(tree, left, t),
            None => term_implies_subtree(tree, left, t) && term_implies_subtree(tree, right, t),
        },
    }
}

/// Keeps the terms that have no strict subset in the collection.
fn inclusion_minimal(terms: impl IntoIterator<Item = Term>) -> BTreeSet<Term> {
    let all: BTreeSet<Term> = terms.into_iter().collect();
    all.iter()
        .filter(|t| !all.iter().any(|u| u != *t && u.is_subset(t)))
        .cloned()
        .collect()
}

fn shannon_at(tree: &DecisionTree, node: NodeId, x: &Instance) -> BTreeSet<Term> {
    match tree.node(node) {
        Node::Leaf(true) => [Term::empty()].into_iter().collect(),
        Node::Leaf(false) => BTreeSet::new(),
        Node::Internal { var, left, right } => {
            let lit = x.literal(var);
            let (agree, other) = if lit.positive {
                (right, left)
            } else {
                (left, right)
            };
            let with = shannon_at(tree, agree, x);
            let without = shannon_at(tree, other, x);
            // sr((f|ℓ) ∧ (f|¬ℓ)): weakest pairwise conjunctions
            let merged = inclusion_minimal(with.iter().flat_map(|a| {
                without
                    .iter()
                    .map(move |b| Term::new(a.iter().chain(b.iter())).expect("both cover x"))
            }));
            let extended = with
                .iter()
                .filter(|a| !term_implies_subtree(tree, other, a))
                .map(|a| Term::new(a.iter().chain([lit])).expect("covers x"));
            merged.into_iter().chain(extended).collect()
        }
    }
}

/// Sufficient reasons by the Shannon-style recursion on the root literal
/// agreed by `x`.
pub fn shannon_sr(tree: &DecisionTree, x: &Instance, limit: usize) -> Result<BTreeSet<Term>> {
    let m = tree.vars().len();
    if m > limit {
        return Err(Error::OracleLimit { vars: m, limit });
    }
    if x.len() != tree.n() {
        return Err(Error::LengthMismatch {
            expected: tree.n(),
            got: x.len(),
        });
    }
    Ok(shannon_at(tree, tree.root(), x))
}

/// Inclusion-minimal sets of literals meeting every member of `sets`, by
/// subset enumeration over the literals that occur.
pub fn brute_force_minimal_hitting_sets(
    sets: &BTreeSet<Term>,
    limit: usize,
) -> Result<BTreeSet<Term>> {
    let universe: Vec<Literal> = sets
        .iter()
        .flat_map(|t| t.iter())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    if universe.len() > limit {
        return Err(Error::OracleLimit {
            vars: universe.len(),
            limit,
        });
    }
    let masks: Vec<usize> = sets
        .iter()
        .map(|t| {
            t.iter()
                .map(|l| 1 << universe.binary_search(&l).expect("collected above"))
                .fold(0, |a, b| a | b)
        })
        .collect();
    let hits = |s: usize| masks.iter().all(|&m| m & s != 0);
    let mut out = BTreeSet::new();
    for s in 0..1usize << universe.len() {
        if hits(s)
            && (0..universe.len())
                .filter(|i| s >> i & 1 == 1)
                .all(|i| !hits(s & !(1 << i)))
        {
            out.insert(
                Term::new(
                    (0..universe.len())
                        .filter(|i| s >> i & 1 == 1)
                        .map(|i| universe[i]),
                )
                .expect("literals of consistent terms over one instance"),
            );
        }
    }
    Ok(out)
}

/// Assignments to `over` satisfying the tree and `condition`, by enumeration.
pub fn brute_force_count(tree: &DecisionTree, condition: &Term, over: &[usize]) -> BigUint {
    let free: Vec<usize> = over
        .iter()
        .copied()
        .filter(|&v| !condition.contains_var(v))
        .collect();
    let mut values = vec![false; tree.n()];
    for l in condition.iter() {
        if l.var < values.len() {
            values[l.var] = l.positive;
        }
    }
    let mut count = BigUint::default();
    for a in 0..1u64 << free.len() {
        for (i, &v) in free.iter().enumerate() {
            if v < values.len() {
                values[v] = a >> i & 1 == 1;
            }
        }
        if tree
            .evaluate(&Instance::new(values.clone()))
            .expect("sized to n")
        {
            count += 1u32;
        }
    }
    count
}

/// Precision of `t` by enumerating its completions over `Var(T) ∪ Var(t)`.
pub fn brute_force_precision(tree: &DecisionTree, t: &Term) -> Rational {
    let mut over = tree.vars();
    over.extend(t.vars());
    let over: Vec<usize> = over.into_iter().collect();
    let free = over.len() - t.len();
    let models = brute_force_count(tree, t, &over);
    Rational::new(models.into(), (BigUint::from(1u32) << free).into())
}

/// Can switching exactly the literals of `t` (in `x`) change the class for
/// some completion? `t` must be a subterm of `t_x`; only `Var(T)` matters.
fn flip_possible(tree: &DecisionTree, x: &Instance, switchable: &[usize]) -> bool {
    let mut values = x.values().to_vec();
    let target = tree.evaluate(x).expect("sized to n");
    for a in 0..1u64 << switchable.len() {
        for (i, &v) in switchable.iter().enumerate() {
            values[v] = a >> i & 1 == 1;
        }
        if tree
            .evaluate(&Instance::new(values.clone()))
            .expect("sized to n")
            != target
        {
            return true;
        }
    }
    false
}

/// Checks the definition of a contrastive explanation directly: freeing the
/// literals of `t` can flip the class, freeing any proper subset cannot.
pub fn is_contrastive(tree: &DecisionTree, x: &Instance, t: &Term) -> bool {
    if !t.iter().all(|l| l.var < x.len() && x.literal(l.var) == l) {
        return false;
    }
    let vars: Vec<usize> = t.vars().collect();
    flip_possible(tree, x, &vars)
        && vars.iter().all(|&drop| {
            let rest: Vec<usize> = vars.iter().copied().filter(|&v| v != drop).collect();
            !flip_possible(tree, x, &rest)
        })
}

/// Complete tree of depth `depth` with breadth-first variable labels; each
/// bottom internal node has a 0-leaf on the left and a 1-leaf on the right.
pub fn make_complete_tree(depth: usize) -> DecisionTree {
    assert!(depth >= 1, "depth must be at least 1");
    fn build(b: &mut TreeBuilder, index: usize, level: usize, depth: usize) -> NodeId {
        if level + 1 == depth {
            let l = b.leaf(false);
            let r = b.leaf(true);
            return b.internal(index, l, r);
        }
        let l = build(b, 2 * index + 1, level + 1, depth);
        let r = build(b, 2 * index + 2, level + 1, depth);
        b.internal(index, l, r)
    }
    let mut b = TreeBuilder::new();
    let root = build(&mut b, 0, 0, depth);
    b.build((1 << depth) - 1, root)
        .expect("valid by construction")
}

/// Comb of depth `k`: the root's left child is a single fresh test with a
/// 0-leaf and a 1-leaf, its right child a comb of depth `k − 1`. Uses
/// `n = 2k − 1` distinct variables and has `2n + 1` nodes.
pub fn make_comb_tree(k: usize) -> DecisionTree {
    assert!(k >= 1, "k must be at least 1");
    fn build(b: &mut TreeBuilder, base: usize, k: usize) -> NodeId {
        let l = b.leaf(false);
        let r = b.leaf(true);
        if k == 1 {
            return b.internal(base, l, r);
        }
        let side = b.internal(base + 1, l, r);
        let rest = build(b, base + 2, k - 1);
        b.internal(base, side, rest)
    }
    let mut b = TreeBuilder::new();
    let root = build(&mut b, 0, k);
    b.build(2 * k - 1, root).expect("valid by construction")
}

/// A random read-once tree over `n` variables. Below the root each node
/// becomes a leaf with probability `leaf_prob`; depth never exceeds
/// `max_depth`.
pub fn random_tree(rng: &mut impl Rng, n: usize, max_depth: usize, leaf_prob: f64) -> DecisionTree {
    fn grow(
        rng: &mut impl Rng,
        b: &mut TreeBuilder,
        free: &mut Vec<usize>,
        depth: usize,
        max_depth: usize,
        leaf_prob: f64,
    ) -> NodeId {
        if free.is_empty() || depth == max_depth || (depth > 0 && rng.gen_bool(leaf_prob)) {
            return b.leaf(rng.gen_bool(0.5));
        }
        let pick = rng.gen_range(0..free.len());
        let var = free.swap_remove(pick);
        let left = grow(rng, b, free, depth + 1, max_depth, leaf_prob);
        let right = grow(rng, b, free, depth + 1, max_depth, leaf_prob);
        free.push(var);
        let last = free.len() - 1;
        free.swap(pick, last);
        b.internal(var, left, right)
    }
    let mut b = TreeBuilder::new();
    let mut free: Vec<usize> = (0..n).collect();
    let root = grow(rng, &mut b, &mut free, 0, max_depth, leaf_prob);
    b.build(n, root).expect("read-once by construction")
}

/// A random tree over at most `max_vars` variables with a random instance it
/// classifies 1 (the tree is negated when the instance lands on a 0-leaf).
pub fn random_positive_query(rng: &mut impl Rng, max_vars: usize) -> (DecisionTree, Instance) {
    let n = rng.gen_range(1..=max_vars.max(1));
    let max_depth = n.min(8);
    let leaf_prob = rng.gen_range(0.1..0.4);
    let tree = random_tree(rng, n, max_depth, leaf_prob);
    let x = Instance::new((0..n).map(|_| rng.gen_bool(0.5)).collect());
    if tree.evaluate(&x).expect("sized to n") {
        (tree, x)
    } else {
        (tree.negate(), x)
    }
}
