//! Read-once Boolean decision trees stored as a flat node pool.

use std::collections::BTreeSet;

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::logic::{Clause, Instance, Literal, Term};

pub type NodeId = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Node {
    /// `left` is taken when `var` is 0, `right` when it is 1.
    Internal {
        var: usize,
        left: NodeId,
        right: NodeId,
    },
    Leaf(bool),
}

impl Node {
    pub fn is_leaf(&self) -> bool {
        matches!(self, Node::Leaf(_))
    }
}

/// A validated decision tree over `n` Boolean features.
///
/// Construction checks that the pool forms a single tree rooted at `root`,
/// that every variable index is below `n`, and that no variable is tested
/// twice on a root-to-leaf path. After that the tree is immutable.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecisionTree {
    n: usize,
    nodes: Vec<Node>,
    root: NodeId,
}

impl DecisionTree {
    pub fn new(n: usize, nodes: Vec<Node>, root: NodeId) -> Result<Self> {
        if root >= nodes.len() {
            return Err(Error::MissingRoot(root));
        }
        let mut parents = vec![0usize; nodes.len()];
        for (id, node) in nodes.iter().enumerate() {
            if let Node::Internal { var, left, right } = *node {
                if var >= n {
                    return Err(Error::VariableOutOfRange { var, n });
                }
                for child in [left, right] {
                    if child >= nodes.len() {
                        return Err(Error::DanglingChild { node: id, child });
                    }
                    parents[child] += 1;
                }
            }
        }
        for (id, &count) in parents.iter().enumerate() {
            let expected = usize::from(id != root);
            if count != expected {
                return Err(Error::NotATree {
                    node: id,
                    parents: count,
                });
            }
        }

        // Parent counts are right, so a DFS from the root visits every node at
        // most once; anything it misses sits on a detached cycle.
        let mut visited = vec![false; nodes.len()];
        let mut path: Vec<usize> = Vec::new();
        let mut stack = vec![(root, 0usize)];
        while let Some((id, depth)) = stack.pop() {
            visited[id] = true;
            path.truncate(depth);
            if let Node::Internal { var, left, right } = nodes[id] {
                if path.contains(&var) {
                    return Err(Error::ReadOnceViolation { var, node: id });
                }
                path.push(var);
                stack.push((right, depth + 1));
                stack.push((left, depth + 1));
            }
        }
        if let Some(id) = visited.iter().position(|v| !v) {
            return Err(Error::NotATree {
                node: id,
                parents: parents[id],
            });
        }
        Ok(DecisionTree { n, nodes, root })
    }

    /// A tree made of a single leaf.
    pub fn constant(n: usize, label: bool) -> Self {
        DecisionTree {
            n,
            nodes: vec![Node::Leaf(label)],
            root: 0,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> Node {
        self.nodes[id]
    }

    /// Number of nodes, `|T|`.
    pub fn size(&self) -> usize {
        self.nodes.len()
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes.iter().filter(|n| n.is_leaf()).count()
    }

    /// `Var(T)`: the variables labelling some internal node.
    pub fn vars(&self) -> BTreeSet<usize> {
        self.nodes
            .iter()
            .filter_map(|n| match *n {
                Node::Internal { var, .. } => Some(var),
                Node::Leaf(_) => None,
            })
            .collect()
    }

    pub fn depth(&self) -> usize {
        self.paths().iter().map(|(p, _)| p.len()).max().unwrap_or(0)
    }

    fn check_len(&self, x: &Instance) -> Result<()> {
        if x.len() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                got: x.len(),
            });
        }
        Ok(())
    }

    /// Literals of the root-to-leaf path followed by `x`, root first, and the
    /// label of the leaf it ends in.
    pub fn path(&self, x: &Instance) -> Result<(Vec<Literal>, bool)> {
        self.check_len(x)?;
        let mut lits = Vec::new();
        let mut id = self.root;
        loop {
            match self.nodes[id] {
                Node::Leaf(label) => return Ok((lits, label)),
                Node::Internal { var, left, right } => {
                    let value = x.value(var);
                    lits.push(Literal::new(var, value));
                    id = if value { right } else { left };
                }
            }
        }
    }

    pub fn evaluate(&self, x: &Instance) -> Result<bool> {
        self.path(x).map(|(_, label)| label)
    }

    /// The same tree with every leaf label complemented.
    pub fn negate(&self) -> DecisionTree {
        let nodes = self
            .nodes
            .iter()
            .map(|n| match *n {
                Node::Leaf(label) => Node::Leaf(!label),
                internal => internal,
            })
            .collect();
        DecisionTree {
            n: self.n,
            nodes,
            root: self.root,
        }
    }

    /// Every root-to-leaf path as (literals, leaf label), in left-to-right order.
    pub fn paths(&self) -> Vec<(Vec<Literal>, bool)> {
        let mut out = Vec::new();
        let mut path: Vec<Literal> = Vec::new();
        let mut stack = vec![(self.root, 0usize, None::<Literal>)];
        while let Some((id, depth, via)) = stack.pop() {
            path.truncate(depth);
            if let Some(lit) = via {
                path.push(lit);
            }
            match self.nodes[id] {
                Node::Leaf(label) => out.push((path.clone(), label)),
                Node::Internal { var, left, right } => {
                    let d = path.len();
                    stack.push((right, d, Some(Literal::pos(var))));
                    stack.push((left, d, Some(Literal::neg(var))));
                }
            }
        }
        out
    }

    /// One clause per 0-leaf: the negation of the path leading to it.
    /// Duplicates are kept.
    pub fn to_cnf(&self) -> Vec<Clause> {
        self.paths()
            .into_iter()
            .filter(|(_, label)| !label)
            .map(|(lits, _)| {
                Term::new(lits)
                    .expect("read-once paths are consistent")
                    .negation()
            })
            .collect()
    }

    /// One term per 1-leaf.
    pub fn to_dnf(&self) -> Vec<Term> {
        self.paths()
            .into_iter()
            .filter(|(_, label)| *label)
            .map(|(lits, _)| Term::new(lits).expect("read-once paths are consistent"))
            .collect()
    }

    /// Does every leaf compatible with `t` carry label 1?
    pub fn is_implied_by(&self, t: &Term) -> bool {
        let mut stack = vec![self.root];
        while let Some(id) = stack.pop() {
            match self.nodes[id] {
                Node::Leaf(false) => return false,
                Node::Leaf(true) => {}
                Node::Internal { var, left, right } => match t.literal_of(var) {
                    Some(l) if l.positive => stack.push(right),
                    Some(_) => stack.push(left),
                    None => {
                        stack.push(left);
                        stack.push(right);
                    }
                },
            }
        }
        true
    }

    /// Number of assignments to the variables in `over` that satisfy both the
    /// tree and `condition`.
    ///
    /// `over` must contain `Var(T)` and every variable of `condition`.
    pub fn count_models(&self, condition: &Term, over: &BTreeSet<usize>) -> Result<BigUint> {
        for var in condition.vars().chain(self.vars()) {
            if !over.contains(&var) {
                return Err(Error::UniverseTooSmall(var));
            }
        }
        let free_base = over.len() - condition.len();
        let mut total = BigUint::zero();
        // (node, number of path variables not fixed by the condition)
        let mut stack = vec![(self.root, 0usize)];
        while let Some((id, fixed)) = stack.pop() {
            match self.nodes[id] {
                Node::Leaf(true) => total += BigUint::one() << (free_base - fixed),
                Node::Leaf(false) => {}
                Node::Internal { var, left, right } => match condition.literal_of(var) {
                    Some(l) => stack.push((if l.positive { right } else { left }, fixed)),
                    None => {
                        stack.push((left, fixed + 1));
                        stack.push((right, fixed + 1));
                    }
                },
            }
        }
        Ok(total)
    }
}

/// Incremental construction of a node pool.
#[derive(Debug, Default)]
pub struct TreeBuilder {
    nodes: Vec<Node>,
}

impl TreeBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn leaf(&mut self, label: bool) -> NodeId {
        self.nodes.push(Node::Leaf(label));
        self.nodes.len() - 1
    }

    pub fn internal(&mut self, var: usize, left: NodeId, right: NodeId) -> NodeId {
        self.nodes.push(Node::Internal { var, left, right });
        self.nodes.len() - 1
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn build(self, n: usize, root: NodeId) -> Result<DecisionTree> {
        DecisionTree::new(n, self.nodes, root)
    }
}

/// A small orchid classifier used as a fixture: `x0` fragrant flowers,
/// `x1` one or two leaves, `x2` large flowers, `x3` sympodial.
pub fn cattleya() -> DecisionTree {
    let mut b = TreeBuilder::new();
    let root_left = {
        let no = b.leaf(false);
        let x3 = {
            let l = b.leaf(false);
            let r = b.leaf(true);
            b.internal(3, l, r)
        };
        let x2 = {
            let l = b.leaf(false);
            b.internal(2, l, x3)
        };
        b.internal(1, no, x2)
    };
    let sympodial = |b: &mut TreeBuilder| {
        let l = b.leaf(false);
        let r = b.leaf(true);
        b.internal(3, l, r)
    };
    let root_right = {
        let a = sympodial(&mut b);
        let c = sympodial(&mut b);
        let x2_left = b.internal(2, a, c);
        let d = sympodial(&mut b);
        let e = sympodial(&mut b);
        let x2_right = b.internal(2, d, e);
        b.internal(1, x2_left, x2_right)
    };
    let root = b.internal(0, root_left, root_right);
    b.build(4, root).expect("fixture is a valid tree")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(s: &str) -> Instance {
        s.parse().unwrap()
    }

    fn clause(lits: &[(usize, bool)]) -> Clause {
        Clause::new(lits.iter().map(|&(v, p)| Literal::new(v, p))).unwrap()
    }

    #[test]
    fn cattleya_evaluation() {
        let t = cattleya();
        assert_eq!(t.size(), 23);
        assert_eq!(t.leaf_count(), 12);
        assert!(t.evaluate(&x("1111")).unwrap());
        assert!(!t.evaluate(&x("1110")).unwrap());
        assert!(t.negate().evaluate(&x("1110")).unwrap());
    }

    #[test]
    fn constant_tree_evaluates_to_its_label() {
        let t = DecisionTree::constant(3, true);
        for bits in 0..8 {
            assert!(t.evaluate(&Instance::from_mask(bits, 3)).unwrap());
        }
        assert!(t.to_cnf().is_empty());
        assert!(DecisionTree::constant(3, false).to_dnf().is_empty());
        assert_eq!(t.negate(), DecisionTree::constant(3, false));
    }

    #[test]
    fn evaluate_rejects_wrong_length() {
        let err = cattleya().evaluate(&x("111")).unwrap_err();
        assert!(matches!(
            err,
            Error::LengthMismatch {
                expected: 4,
                got: 3
            }
        ));
    }

    #[test]
    fn cattleya_cnf_matches_listing() {
        // x1..x4 of the running example are x0..x3 here.
        let mut cnf = cattleya().to_cnf();
        cnf.sort();
        let mut expected = vec![
            clause(&[(0, true), (1, true)]),
            clause(&[(0, true), (1, false), (2, true)]),
            clause(&[(0, true), (1, false), (2, false), (3, true)]),
            clause(&[(0, false), (1, true), (2, true), (3, true)]),
            clause(&[(0, false), (1, true), (2, false), (3, true)]),
            clause(&[(0, false), (1, false), (2, true), (3, true)]),
            clause(&[(0, false), (1, false), (2, false), (3, true)]),
        ];
        expected.sort();
        assert_eq!(cnf, expected);
    }

    #[test]
    fn cattleya_dnf_contains_left_branch_term() {
        let t = Term::new([
            Literal::neg(0),
            Literal::pos(1),
            Literal::pos(2),
            Literal::pos(3),
        ])
        .unwrap();
        assert!(cattleya().to_dnf().contains(&t));
    }

    #[test]
    fn count_models_examples() {
        let over: BTreeSet<usize> = [0, 1].into_iter().collect();
        let one = DecisionTree::constant(2, true);
        assert_eq!(
            one.count_models(&Term::empty(), &over).unwrap(),
            4u32.into()
        );

        let t = cattleya();
        let all: BTreeSet<usize> = (0..4).collect();
        let cond = Term::new([Literal::pos(0), Literal::pos(3)]).unwrap();
        assert_eq!(t.count_models(&cond, &all).unwrap(), 4u32.into());
        assert_eq!(t.count_models(&Term::empty(), &all).unwrap(), 5u32.into());

        let small: BTreeSet<usize> = (0..3).collect();
        assert!(matches!(
            t.count_models(&cond, &small),
            Err(Error::UniverseTooSmall(3))
        ));
    }

    #[test]
    fn validation_errors_are_distinct() {
        // x0 tested twice on the same path
        let mut b = TreeBuilder::new();
        let l = b.leaf(false);
        let r = b.leaf(true);
        let inner = b.internal(0, l, r);
        let l2 = b.leaf(false);
        let root = b.internal(0, l2, inner);
        assert!(matches!(
            b.build(1, root),
            Err(Error::ReadOnceViolation { var: 0, .. })
        ));

        let dangling = vec![
            Node::Internal {
                var: 0,
                left: 1,
                right: 7,
            },
            Node::Leaf(true),
        ];
        assert!(matches!(
            DecisionTree::new(1, dangling, 0),
            Err(Error::DanglingChild { node: 0, child: 7 })
        ));

        let shared = vec![
            Node::Internal {
                var: 0,
                left: 1,
                right: 1,
            },
            Node::Leaf(true),
        ];
        assert!(matches!(
            DecisionTree::new(1, shared, 0),
            Err(Error::NotATree {
                node: 1,
                parents: 2
            })
        ));

        let out_of_range = vec![
            Node::Internal {
                var: 5,
                left: 1,
                right: 2,
            },
            Node::Leaf(true),
            Node::Leaf(false),
        ];
        assert!(matches!(
            DecisionTree::new(2, out_of_range, 0),
            Err(Error::VariableOutOfRange { var: 5, n: 2 })
        ));

        // two nodes pointing at each other, detached from the root
        let cycle = vec![
            Node::Leaf(true),
            Node::Internal {
                var: 0,
                left: 2,
                right: 3,
            },
            Node::Internal {
                var: 1,
                left: 1,
                right: 4,
            },
            Node::Leaf(true),
            Node::Leaf(false),
        ];
        assert!(matches!(
            DecisionTree::new(2, cycle, 0),
            Err(Error::NotATree { .. })
        ));
    }

    #[test]
    fn implication_check() {
        let t = cattleya();
        let x1x4 = Term::new([Literal::pos(0), Literal::pos(3)]).unwrap();
        assert!(t.is_implied_by(&x1x4));
        assert!(!t.is_implied_by(&Term::new([Literal::pos(3)]).unwrap()));
    }
}
