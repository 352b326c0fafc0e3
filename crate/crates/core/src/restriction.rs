//! The instance-restricted CNF `g = {c ∩ t_x : c ∈ CNF(T)}`.
//!
//! Every literal of `g` has the polarity it has in `t_x`, so clauses are kept
//! as sorted variable lists and the signs are read off the anchor term.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::logic::{Clause, Instance, Literal, Term};
use crate::tree::{DecisionTree, Node};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MonotoneClauseSet {
    n: usize,
    anchor: Term,
    clauses: Vec<Vec<usize>>,
}

impl MonotoneClauseSet {
    /// Builds a clause set directly from variable lists over `anchor`.
    /// Clauses are deduplicated and put in canonical order.
    pub fn from_clauses(
        n: usize,
        anchor: Term,
        clauses: impl IntoIterator<Item = Vec<usize>>,
    ) -> Result<Self> {
        let mut set = BTreeSet::new();
        for mut clause in clauses {
            clause.sort_unstable();
            clause.dedup();
            if clause.is_empty() {
                return Err(Error::NotSubsetOfAnchor);
            }
            if let Some(&v) = clause.iter().find(|&&v| !anchor.contains_var(v)) {
                return Err(Error::VariableOutOfRange { var: v, n });
            }
            set.insert(clause);
        }
        Ok(MonotoneClauseSet {
            n,
            anchor,
            clauses: set.into_iter().collect(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// The instance term this set was restricted against.
    pub fn anchor(&self) -> &Term {
        &self.anchor
    }

    /// Clauses as sorted variable lists, in canonical (lexicographic) order.
    pub fn clauses(&self) -> &[Vec<usize>] {
        &self.clauses
    }

    pub fn len(&self) -> usize {
        self.clauses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clauses.is_empty()
    }

    /// The anchor's literal over `var`.
    pub fn literal(&self, var: usize) -> Literal {
        self.anchor
            .literal_of(var)
            .expect("clause variables belong to the anchor")
    }

    pub fn clause(&self, i: usize) -> Clause {
        Clause::new(self.clauses[i].iter().map(|&v| self.literal(v))).expect("monotone")
    }

    /// Clauses read as terms over the anchor's literals.
    pub fn clause_terms(&self) -> Vec<Term> {
        self.clauses.iter().map(|c| self.term_of(c)).collect()
    }

    pub(crate) fn term_of(&self, vars: &[usize]) -> Term {
        Term::new(vars.iter().map(|&v| self.literal(v))).expect("monotone")
    }

    /// Removes every clause that strictly contains another one.
    pub fn minimize(&self) -> MonotoneClauseSet {
        let mut by_len: Vec<&Vec<usize>> = self.clauses.iter().collect();
        by_len.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        let mut kept: Vec<Vec<usize>> = Vec::new();
        for clause in by_len {
            if !kept.iter().any(|k| is_sorted_subset(k, clause)) {
                kept.push(clause.clone());
            }
        }
        kept.sort();
        MonotoneClauseSet {
            n: self.n,
            anchor: self.anchor.clone(),
            clauses: kept,
        }
    }

    /// True when no clause is contained in another one.
    pub fn is_antichain(&self) -> bool {
        self.clauses.iter().enumerate().all(|(i, a)| {
            self.clauses
                .iter()
                .enumerate()
                .all(|(j, b)| i == j || !is_sorted_subset(a, b))
        })
    }

    /// Does `t` intersect every clause? For `t ⊆ t_x` this holds exactly when
    /// `t` is an implicant of the tree.
    pub fn hits_all(&self, t: &Term) -> Result<bool> {
        if !t.is_subset(&self.anchor) {
            return Err(Error::NotSubsetOfAnchor);
        }
        Ok(self.hits_all_vars(|v| t.contains_var(v)))
    }

    pub(crate) fn hits_all_vars(&self, chosen: impl Fn(usize) -> bool) -> bool {
        self.clauses.iter().all(|c| c.iter().any(|&v| chosen(v)))
    }
}

/// Both slices sorted ascending.
pub(crate) fn is_sorted_subset(small: &[usize], big: &[usize]) -> bool {
    if small.len() > big.len() {
        return false;
    }
    let mut it = big.iter();
    'outer: for s in small {
        for b in it.by_ref() {
            if b == s {
                continue 'outer;
            }
            if b > s {
                return false;
            }
        }
        return false;
    }
    true
}

/// `{c ∩ t_x : c ∈ CNF(T)}`, deduplicated. Requires `T(x) = 1`.
pub fn restrict(tree: &DecisionTree, x: &Instance) -> Result<MonotoneClauseSet> {
    if !tree.evaluate(x)? {
        return Err(Error::NegativeInstance);
    }
    // For the clause of a 0-path, c ∩ t_x keeps exactly the path tests that x
    // answers differently, so a DFS carrying those variables is enough.
    let mut set: BTreeSet<Vec<usize>> = BTreeSet::new();
    let mut disagree: Vec<usize> = Vec::new();
    let mut stack = vec![(tree.root(), 0usize, None::<usize>)];
    while let Some((id, depth, via)) = stack.pop() {
        disagree.truncate(depth);
        if let Some(var) = via {
            disagree.push(var);
        }
        match tree.node(id) {
            Node::Leaf(true) => {}
            Node::Leaf(false) => {
                assert!(
                    !disagree.is_empty(),
                    "a 0-leaf path agreeing with x contradicts T(x) = 1"
                );
                let mut clause = disagree.clone();
                clause.sort_unstable();
                set.insert(clause);
            }
            Node::Internal { var, left, right } => {
                let d = disagree.len();
                let (same, other) = if x.value(var) {
                    (right, left)
                } else {
                    (left, right)
                };
                stack.push((other, d, Some(var)));
                stack.push((same, d, None));
            }
        }
    }
    Ok(MonotoneClauseSet {
        n: tree.n(),
        anchor: x.term(),
        clauses: set.into_iter().collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::cattleya;

    fn all_ones() -> Instance {
        "1111".parse().unwrap()
    }

    fn term(vars: &[usize]) -> Term {
        Term::new(vars.iter().map(|&v| Literal::pos(v))).unwrap()
    }

    #[test]
    fn cattleya_restriction() {
        let g = restrict(&cattleya(), &all_ones()).unwrap();
        // hand intersection of the seven CNF clauses with t_x
        let expected: Vec<Vec<usize>> = vec![
            vec![0, 1],
            vec![0, 2],
            vec![0, 3],
            vec![1, 2, 3],
            vec![1, 3],
            vec![2, 3],
            vec![3],
        ];
        assert_eq!(g.clauses(), expected.as_slice());
        let m = g.minimize();
        assert_eq!(m.clauses(), &[vec![0, 1], vec![0, 2], vec![3]]);
        assert!(m.is_antichain());
        assert_eq!(m.minimize(), m);
    }

    #[test]
    fn restriction_requires_positive_instance() {
        let x: Instance = "1110".parse().unwrap();
        assert!(matches!(
            restrict(&cattleya(), &x),
            Err(Error::NegativeInstance)
        ));
        assert!(restrict(&cattleya().negate(), &x).is_ok());
    }

    #[test]
    fn constant_true_gives_empty_set() {
        let t = DecisionTree::constant(3, true);
        let x: Instance = "010".parse().unwrap();
        let g = restrict(&t, &x).unwrap();
        assert!(g.is_empty());
        assert!(g.hits_all(&Term::empty()).unwrap());
    }

    #[test]
    fn minimize_drops_strict_supersets() {
        let g = MonotoneClauseSet::from_clauses(
            4,
            all_ones().term(),
            [vec![0, 1], vec![0, 1, 2], vec![3]],
        )
        .unwrap();
        assert_eq!(g.minimize().clauses(), &[vec![0, 1], vec![3]]);
    }

    #[test]
    fn hits_all_examples() {
        let g = restrict(&cattleya(), &all_ones()).unwrap();
        assert!(g.hits_all(&term(&[0, 3])).unwrap());
        assert!(!g.hits_all(&term(&[0])).unwrap());
        let outside = Term::new([Literal::neg(0)]).unwrap();
        assert!(matches!(
            g.hits_all(&outside),
            Err(Error::NotSubsetOfAnchor)
        ));
    }

    #[test]
    fn sorted_subset() {
        assert!(is_sorted_subset(&[], &[1]));
        assert!(is_sorted_subset(&[1, 3], &[0, 1, 2, 3]));
        assert!(!is_sorted_subset(&[1, 4], &[0, 1, 2, 3]));
        assert!(!is_sorted_subset(&[0, 2], &[1, 2]));
    }
}
