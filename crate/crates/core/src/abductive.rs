//! Abductive reasons: direct, sufficient, minimal and δ-probable.
//!
//! All of them are subterms of the instance term `t_x` that hit every clause
//! of the restricted CNF (or, for probable reasons, keep enough precision).
//! Functions here assume the instance is classified 1; callers explaining a
//! negative instance pass the negated tree.

use std::collections::BTreeSet;
use std::fmt;
use std::ops::ControlFlow;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::hitting::Hypergraph;
use crate::logic::{Instance, Term};
use crate::restriction::MonotoneClauseSet;
use crate::tree::DecisionTree;

/// Exact rational used for δ thresholds, precisions and importances.
pub type Rational = BigRational;

/// Formats a rational as `p/q`.
pub fn format_ratio(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Parses `p/q` with integer `p` and positive `q`. Decimal notation is refused.
pub fn parse_ratio(s: &str) -> Result<Rational> {
    let bad = || Error::InvalidDelta(s.to_string());
    let (p, q) = s.trim().split_once('/').ok_or_else(bad)?;
    let p: BigInt = p.trim().parse().map_err(|_| bad())?;
    let q: BigInt = q.trim().parse().map_err(|_| bad())?;
    if q <= BigInt::zero() {
        return Err(bad());
    }
    Ok(Rational::new(p, q))
}

fn serialize_ratio<S: Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(&format_ratio(r))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ReasonKind {
    Direct,
    Sufficient,
    Minimal,
    Probable,
}

/// Where a greedy reduction started.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Seed {
    /// Not produced by a greedy reduction.
    None,
    Instance,
    Direct,
    GreedyCover,
    Custom,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Reason {
    pub kind: ReasonKind,
    pub term: Term,
    pub size: usize,
    #[serde(serialize_with = "serialize_ratio")]
    pub delta: Rational,
    pub seed: Seed,
}

impl Reason {
    fn new(kind: ReasonKind, term: Term, seed: Seed) -> Self {
        Reason {
            kind,
            size: term.len(),
            term,
            delta: Rational::one(),
            seed,
        }
    }

    pub fn with_seed(mut self, seed: Seed) -> Self {
        self.seed = seed;
        self
    }
}

impl fmt::Display for Reason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}({})", self.kind, self.term)
    }
}

/// The order in which a greedy reduction tries to drop literals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RemovalOrder {
    /// Ascending variable index.
    Index,
    /// The listed variables first, in order; any other seed variable after
    /// them in ascending order.
    Sequence(Vec<usize>),
}

/// How the CLI and batch runner pick a [`RemovalOrder`] for an instance.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OrderStrategy {
    /// Deepest literal of the direct path first.
    #[default]
    Path,
    Index,
}

impl RemovalOrder {
    /// Variables of the direct path of `x`, deepest first.
    pub fn path_depth(tree: &DecisionTree, x: &Instance) -> Result<Self> {
        let (lits, _) = tree.path(x)?;
        Ok(RemovalOrder::Sequence(
            lits.iter().rev().map(|l| l.var).collect(),
        ))
    }

    pub fn for_strategy(
        strategy: OrderStrategy,
        tree: &DecisionTree,
        x: &Instance,
    ) -> Result<Self> {
        match strategy {
            OrderStrategy::Path => Self::path_depth(tree, x),
            OrderStrategy::Index => Ok(RemovalOrder::Index),
        }
    }

    /// Variables of `seed` in the order they should be tried.
    pub fn sequence(&self, seed: &Term) -> Vec<usize> {
        match self {
            RemovalOrder::Index => seed.vars().collect(),
            RemovalOrder::Sequence(listed) => {
                let mut seen = BTreeSet::new();
                let mut out: Vec<usize> = listed
                    .iter()
                    .copied()
                    .filter(|&v| seed.contains_var(v) && seen.insert(v))
                    .collect();
                out.extend(seed.vars().filter(|v| !seen.contains(v)));
                out
            }
        }
    }
}

fn require_positive(tree: &DecisionTree, x: &Instance) -> Result<()> {
    if tree.evaluate(x)? {
        Ok(())
    } else {
        Err(Error::NegativeInstance)
    }
}

/// The literals of the root-to-leaf path compatible with `x`.
pub fn direct_reason(tree: &DecisionTree, x: &Instance) -> Result<Reason> {
    let (lits, label) = tree.path(x)?;
    if !label {
        return Err(Error::NegativeInstance);
    }
    let term = Term::new(lits).expect("read-once paths are consistent");
    Ok(Reason::new(ReasonKind::Direct, term, Seed::None))
}

/// Greedy reduction of an implicant `seed` to a prime implicant: each literal
/// in `order` is dropped if the rest still hits every clause.
pub fn sufficient_reason(
    g: &MonotoneClauseSet,
    seed: &Term,
    order: &RemovalOrder,
) -> Result<Reason> {
    if !g.hits_all(seed)? {
        return Err(Error::SeedNotImplicant);
    }
    // hits[c]: how many literals of the current term clause c contains
    let mut by_var: std::collections::HashMap<usize, Vec<usize>> = Default::default();
    let mut hits = vec![0usize; g.len()];
    for (i, clause) in g.clauses().iter().enumerate() {
        for &v in clause {
            if seed.contains_var(v) {
                hits[i] += 1;
                by_var.entry(v).or_default().push(i);
            }
        }
    }
    let mut kept: BTreeSet<usize> = seed.vars().collect();
    for v in order.sequence(seed) {
        let clauses = by_var.get(&v).map(Vec::as_slice).unwrap_or(&[]);
        if clauses.iter().all(|&c| hits[c] > 1) {
            for &c in clauses {
                hits[c] -= 1;
            }
            kept.remove(&v);
        }
    }
    let term = g.term_of(&kept.into_iter().collect::<Vec<_>>());
    let tag = if seed == g.anchor() {
        Seed::Instance
    } else {
        Seed::Custom
    };
    Ok(Reason::new(ReasonKind::Sufficient, term, tag))
}

/// A minimum-size sufficient reason, by exact branch and bound over the
/// minimized clause set. This is the optimum of the Partial MaxSAT problem
/// with the restricted clauses hard and one unit soft clause `¬ℓ` per
/// literal of the instance.
pub fn minimal_reason(g: &MonotoneClauseSet) -> Reason {
    let min = g.minimize();
    let graph = Hypergraph::new(min.clauses());
    let best = graph.to_vars(&graph.min_hitting_set());
    Reason::new(ReasonKind::Minimal, min.term_of(&best), Seed::None)
}

/// Max-degree greedy cover of the minimized clause set, then pruned to a
/// prime implicant. Returned with kind `sufficient`: it is not guaranteed to
/// be of minimum size.
pub fn minimal_reason_greedy(g: &MonotoneClauseSet) -> Reason {
    let min = g.minimize();
    let graph = Hypergraph::new(min.clauses());
    let cover = min.term_of(&graph.to_vars(&graph.greedy_cover()));
    sufficient_reason(&min, &cover, &RemovalOrder::Index)
        .expect("a cover hits every clause")
        .with_seed(Seed::GreedyCover)
}

/// Upper bound on the greedy cover size for `clauses` minimized clauses and
/// an optimum of `opt`: `⌈(ln m − ln ln m + 0.78)·opt⌉`. The greedy cover is
/// exact for `m ≤ 1`.
pub fn greedy_bound(clauses: usize, opt: usize) -> usize {
    if clauses <= 1 {
        return opt;
    }
    let m = clauses as f64;
    let factor = m.ln() - m.ln().ln() + 0.78;
    (factor * opt as f64).ceil() as usize
}

/// Result of a capped enumeration.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Enumeration<T> {
    pub items: Vec<T>,
    /// False when the cap stopped the search before it was exhausted.
    pub complete: bool,
}

/// Streams every minimum-size sufficient reason to `sink` in lexicographic
/// order of variable indices.
pub fn for_each_minimal_reason(
    g: &MonotoneClauseSet,
    mut sink: impl FnMut(Reason) -> ControlFlow<()>,
) -> ControlFlow<()> {
    let min = g.minimize();
    let graph = Hypergraph::new(min.clauses());
    let k = graph.min_hitting_set().len();
    graph.for_each_hitting_set_of_size(k, &mut |local| {
        let term = min.term_of(&graph.to_vars(local));
        sink(Reason::new(ReasonKind::Minimal, term, Seed::None))
    })
}

/// All minimum-size sufficient reasons, up to `cap` of them.
pub fn enumerate_minimal_reasons(g: &MonotoneClauseSet, cap: usize) -> Result<Enumeration<Reason>> {
    if cap == 0 {
        return Err(Error::ZeroCap);
    }
    let mut items = Vec::new();
    let mut complete = true;
    let _ = for_each_minimal_reason(g, |r| {
        if items.len() == cap {
            complete = false;
            return ControlFlow::Break(());
        }
        items.push(r);
        ControlFlow::Continue(())
    });
    Ok(Enumeration { items, complete })
}

/// Fraction of the completions of `t` (over `Var(T) ∪ Var(t)`) that the tree
/// classifies 1.
pub fn precision(tree: &DecisionTree, t: &Term) -> Result<Rational> {
    let mut over = tree.vars();
    over.extend(t.vars());
    let free = over.len() - t.len();
    let models = tree.count_models(t, &over)?;
    let total = BigUint::one() << free;
    Ok(Rational::new(models.into(), total.into()))
}

/// Greedy δ-probable reason seeded at the direct reason: literals are dropped
/// in `order` while precision stays at least `delta`, repeating full passes
/// until none can be dropped.
pub fn probable_reason(
    tree: &DecisionTree,
    x: &Instance,
    delta: &Rational,
    order: &RemovalOrder,
) -> Result<Reason> {
    if *delta <= Rational::zero() || *delta > Rational::one() {
        return Err(Error::InvalidDelta(format_ratio(delta)));
    }
    require_positive(tree, x)?;
    let direct = direct_reason(tree, x)?.term;
    let sequence = order.sequence(&direct);
    let mut term = direct;
    loop {
        let mut changed = false;
        for &v in &sequence {
            if !term.contains_var(v) {
                continue;
            }
            let candidate = term.without_var(v);
            if precision(tree, &candidate)? >= *delta {
                term = candidate;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let mut reason = Reason::new(ReasonKind::Probable, term, Seed::Direct);
    reason.delta = delta.clone();
    Ok(reason)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::Literal;
    use crate::restriction::restrict;
    use crate::tree::cattleya;

    fn ones() -> Instance {
        "1111".parse().unwrap()
    }

    fn pos(vars: &[usize]) -> Term {
        Term::new(vars.iter().map(|&v| Literal::pos(v))).unwrap()
    }

    fn ratio(p: i64, q: i64) -> Rational {
        Rational::new(p.into(), q.into())
    }

    #[test]
    fn direct_reason_is_the_path() {
        let r = direct_reason(&cattleya(), &ones()).unwrap();
        assert_eq!(r.term, pos(&[0, 1, 2, 3]));
        let leaf = DecisionTree::constant(2, true);
        assert!(direct_reason(&leaf, &"01".parse().unwrap())
            .unwrap()
            .term
            .is_empty());
        assert!(matches!(
            direct_reason(&cattleya(), &"1110".parse().unwrap()),
            Err(Error::NegativeInstance)
        ));
    }

    #[test]
    fn greedy_sufficient_on_running_example() {
        let tree = cattleya();
        let g = restrict(&tree, &ones()).unwrap();
        let seed = direct_reason(&tree, &ones()).unwrap().term;
        let r = sufficient_reason(&g, &seed, &RemovalOrder::Index).unwrap();
        assert_eq!(r.term, pos(&[1, 2, 3]));
        // deepest first keeps x0 and x3
        let order = RemovalOrder::path_depth(&tree, &ones()).unwrap();
        let r = sufficient_reason(&g, &seed, &order).unwrap();
        assert_eq!(r.term, pos(&[0, 3]));
    }

    #[test]
    fn sufficient_reason_rejects_non_implicant_seed() {
        let g = restrict(&cattleya(), &ones()).unwrap();
        assert!(matches!(
            sufficient_reason(&g, &pos(&[0]), &RemovalOrder::Index),
            Err(Error::SeedNotImplicant)
        ));
    }

    #[test]
    fn empty_clause_set_gives_empty_reasons() {
        let leaf = DecisionTree::constant(3, true);
        let x: Instance = "101".parse().unwrap();
        let g = restrict(&leaf, &x).unwrap();
        assert!(sufficient_reason(&g, &x.term(), &RemovalOrder::Index)
            .unwrap()
            .term
            .is_empty());
        assert_eq!(minimal_reason(&g).size, 0);
        assert_eq!(minimal_reason_greedy(&g).size, 0);
        let all = enumerate_minimal_reasons(&g, 5).unwrap();
        assert_eq!(all.items.len(), 1);
        assert!(all.complete);
    }

    #[test]
    fn minimal_and_greedy_on_running_example() {
        let g = restrict(&cattleya(), &ones()).unwrap();
        let m = minimal_reason(&g);
        assert_eq!(m.term, pos(&[0, 3]));
        assert_eq!(m.size, 2);
        let greedy = minimal_reason_greedy(&g);
        assert_eq!(greedy.term, pos(&[0, 3]));
        assert_eq!(greedy.seed, Seed::GreedyCover);
        let all = enumerate_minimal_reasons(&g, 10).unwrap();
        assert!(all.complete);
        assert_eq!(
            all.items.iter().map(|r| r.term.clone()).collect::<Vec<_>>(),
            vec![pos(&[0, 3])]
        );
        assert!(matches!(
            enumerate_minimal_reasons(&g, 0),
            Err(Error::ZeroCap)
        ));
    }

    #[test]
    fn precision_values() {
        let tree = cattleya();
        // brute force over the completions: x3 alone reaches a 1-leaf in 5 of 8
        assert_eq!(precision(&tree, &pos(&[3])).unwrap(), ratio(5, 8));
        assert_eq!(precision(&tree, &Term::empty()).unwrap(), ratio(5, 16));
        assert_eq!(precision(&tree, &pos(&[0, 3])).unwrap(), ratio(1, 1));
        assert_eq!(precision(&tree, &pos(&[2, 3])).unwrap(), ratio(3, 4));
        let zero = DecisionTree::constant(2, false);
        assert!(precision(&zero, &Term::empty()).unwrap().is_zero());
    }

    #[test]
    fn probable_reasons_on_running_example() {
        let tree = cattleya();
        let x = ones();
        let path = RemovalOrder::path_depth(&tree, &x).unwrap();
        let three_quarters = ratio(3, 4);
        let r = probable_reason(&tree, &x, &three_quarters, &RemovalOrder::Index).unwrap();
        assert_eq!(r.term, pos(&[2, 3]));
        assert_eq!(r.kind, ReasonKind::Probable);
        let r = probable_reason(&tree, &x, &three_quarters, &path).unwrap();
        assert_eq!(r.term, pos(&[0, 3]));
        let half = ratio(1, 2);
        let r = probable_reason(&tree, &x, &half, &RemovalOrder::Index).unwrap();
        assert_eq!(r.term, pos(&[3]));
        let r = probable_reason(&tree, &x, &half, &path).unwrap();
        assert_eq!(r.term, pos(&[0]));
    }

    #[test]
    fn probable_with_delta_one_is_sufficient() {
        let tree = cattleya();
        let x = ones();
        let g = restrict(&tree, &x).unwrap();
        let seed = direct_reason(&tree, &x).unwrap().term;
        for order in [
            RemovalOrder::Index,
            RemovalOrder::path_depth(&tree, &x).unwrap(),
        ] {
            let p = probable_reason(&tree, &x, &Rational::one(), &order).unwrap();
            let s = sufficient_reason(&g, &seed, &order).unwrap();
            assert_eq!(p.term, s.term);
        }
    }

    #[test]
    fn delta_validation() {
        let tree = cattleya();
        for bad in [ratio(0, 1), ratio(3, 2), ratio(-1, 2)] {
            assert!(matches!(
                probable_reason(&tree, &ones(), &bad, &RemovalOrder::Index),
                Err(Error::InvalidDelta(_))
            ));
        }
    }

    #[test]
    fn ratio_parsing() {
        assert_eq!(parse_ratio("75/100").unwrap(), ratio(3, 4));
        assert_eq!(format_ratio(&parse_ratio("75/100").unwrap()), "3/4");
        assert!(parse_ratio("0.75").is_err());
        assert!(parse_ratio("1").is_err());
        assert!(parse_ratio("1/0").is_err());
    }

    #[test]
    fn greedy_bound_values() {
        assert_eq!(greedy_bound(0, 0), 0);
        assert_eq!(greedy_bound(1, 1), 1);
        // ln 2 - ln ln 2 + 0.78 ≈ 1.839
        assert_eq!(greedy_bound(2, 1), 2);
        assert_eq!(greedy_bound(2, 2), 4);
        assert!(greedy_bound(100, 3) >= 3);
    }
}
