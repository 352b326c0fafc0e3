//! Contrastive explanations, explanatory features, and the full set of
//! sufficient reasons with per-literal importance.
//!
//! For a monotone clause set the contrastive explanations are its ⊆-minimal
//! clauses and the sufficient reasons are its minimal hitting sets.

use std::collections::BTreeMap;
use std::ops::ControlFlow;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use crate::abductive::{format_ratio, Enumeration, Rational};
use crate::error::{Error, Result};
use crate::hitting::Hypergraph;
use crate::logic::{Literal, Term};
use crate::restriction::MonotoneClauseSet;

fn serialize_big<S: Serializer>(n: &BigUint, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(n)
}

/// Every contrastive explanation: the clauses of `minimize(g)` read as terms
/// of literals to switch.
pub fn all_contrastive(g: &MonotoneClauseSet) -> Vec<Term> {
    g.minimize().clause_terms()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FeatureReport {
    pub necessary: Vec<Literal>,
    pub relevant: Vec<Literal>,
    pub irrelevant: Vec<Literal>,
}

/// Necessary literals are the unit clauses of the minimized set; relevant
/// literals are those occurring in it; the rest of the `2n` literals are
/// irrelevant.
pub fn explanatory_features(g: &MonotoneClauseSet) -> FeatureReport {
    let min = g.minimize();
    let necessary: Vec<Literal> = min
        .clauses()
        .iter()
        .filter(|c| c.len() == 1)
        .map(|c| min.literal(c[0]))
        .collect();
    let mut relevant: Vec<Literal> = min
        .clauses()
        .iter()
        .flatten()
        .map(|&v| min.literal(v))
        .collect();
    relevant.sort_unstable();
    relevant.dedup();
    let irrelevant = (0..g.n())
        .flat_map(|v| [Literal::neg(v), Literal::pos(v)])
        .filter(|l| relevant.binary_search(l).is_err())
        .collect();
    FeatureReport {
        necessary,
        relevant,
        irrelevant,
    }
}

/// Streams every sufficient reason (minimal hitting set of `minimize(g)`) to
/// `sink`, each exactly once, in search order.
pub fn for_each_sufficient_reason(
    g: &MonotoneClauseSet,
    mut sink: impl FnMut(Term) -> ControlFlow<()>,
) -> ControlFlow<()> {
    let min = g.minimize();
    let graph = Hypergraph::new(min.clauses());
    graph.for_each_minimal_transversal(&mut |local| sink(min.term_of(&graph.to_vars(local))))
}

/// All sufficient reasons, up to `cap`, sorted lexicographically.
pub fn enumerate_sufficient_reasons(
    g: &MonotoneClauseSet,
    cap: usize,
) -> Result<Enumeration<Term>> {
    if cap == 0 {
        return Err(Error::ZeroCap);
    }
    let mut items = Vec::new();
    let mut complete = true;
    let _ = for_each_sufficient_reason(g, |t| {
        if items.len() == cap {
            complete = false;
            return ControlFlow::Break(());
        }
        items.push(t);
        ControlFlow::Continue(())
    });
    items.sort();
    Ok(Enumeration { items, complete })
}

/// How often each literal occurs among the sufficient reasons.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ImportanceMap {
    n: usize,
    occurrences: BTreeMap<Literal, BigUint>,
    total_count: BigUint,
    exact: bool,
}

impl ImportanceMap {
    /// Number of sufficient reasons seen; a lower bound when not exact.
    pub fn total_count(&self) -> &BigUint {
        &self.total_count
    }

    /// False when the enumeration was cut by the cap.
    pub fn is_exact(&self) -> bool {
        self.exact
    }

    pub fn occurrences(&self, lit: Literal) -> BigUint {
        self.occurrences.get(&lit).cloned().unwrap_or_default()
    }

    /// Fraction of the sufficient reasons containing `lit`.
    pub fn importance(&self, lit: Literal) -> Rational {
        if self.total_count.is_zero() {
            return Rational::zero();
        }
        Rational::new(
            self.occurrences(lit).into(),
            self.total_count.clone().into(),
        )
    }

    /// Literals with nonzero importance, ascending.
    pub fn nonzero(&self) -> impl Iterator<Item = (Literal, Rational)> + '_ {
        self.occurrences.keys().map(|&l| (l, self.importance(l)))
    }

    /// CSV over all `2n` literals: `variable,polarity,importance_num,importance_den`.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["variable", "polarity", "importance_num", "importance_den"])?;
        for v in 0..self.n {
            for lit in [Literal::pos(v), Literal::neg(v)] {
                let imp = self.importance(lit);
                w.write_record([
                    v.to_string(),
                    if lit.positive { "1" } else { "0" }.to_string(),
                    imp.numer().to_string(),
                    imp.denom().to_string(),
                ])?;
            }
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is ASCII"))
    }
}

impl Serialize for ImportanceMap {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;

        let entries: BTreeMap<String, String> = self
            .nonzero()
            .map(|(l, r)| (l.to_string(), format_ratio(&r)))
            .collect();
        let mut st = s.serialize_struct("ImportanceMap", 3)?;
        st.serialize_field("total_count", &self.total_count.to_string())?;
        st.serialize_field("exact", &self.exact)?;
        st.serialize_field("importance", &entries)?;
        st.end()
    }
}

/// Counts sufficient reasons and literal occurrences by enumeration, stopping
/// after `cap` reasons.
pub fn count_and_importance(g: &MonotoneClauseSet, cap: usize) -> Result<ImportanceMap> {
    if cap == 0 {
        return Err(Error::ZeroCap);
    }
    let mut occurrences: BTreeMap<Literal, BigUint> = BTreeMap::new();
    let mut total = 0usize;
    let flow = for_each_sufficient_reason(g, |t| {
        if total == cap {
            return ControlFlow::Break(());
        }
        total += 1;
        for l in t.iter() {
            *occurrences.entry(l).or_default() += 1u32;
        }
        ControlFlow::Continue(())
    });
    Ok(ImportanceMap {
        n: g.n(),
        occurrences,
        total_count: BigUint::from(total),
        exact: flow.is_continue(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ContrastiveStats {
    #[serde(serialize_with = "serialize_big")]
    pub count: BigUint,
    pub min_size: Option<usize>,
    pub median_size: Option<f64>,
    pub max_size: Option<usize>,
}

pub fn contrastive_stats(explanations: &[Term]) -> ContrastiveStats {
    let mut sizes: Vec<usize> = explanations.iter().map(Term::len).collect();
    sizes.sort_unstable();
    let median_size = match sizes.len() {
        0 => None,
        len if len % 2 == 1 => Some(sizes[len / 2] as f64),
        len => Some((sizes[len / 2 - 1] + sizes[len / 2]) as f64 / 2.0),
    };
    ContrastiveStats {
        count: BigUint::from(sizes.len()),
        min_size: sizes.first().copied(),
        median_size,
        max_size: sizes.last().copied(),
    }
}

impl ContrastiveStats {
    pub fn count_u64(&self) -> u64 {
        self.count.to_u64().unwrap_or(u64::MAX)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::Instance;
    use crate::restriction::restrict;
    use crate::tree::{cattleya, DecisionTree};

    fn pos(vars: &[usize]) -> Term {
        Term::new(vars.iter().map(|&v| Literal::pos(v))).unwrap()
    }

    fn cattleya_g() -> MonotoneClauseSet {
        restrict(&cattleya(), &"1111".parse().unwrap()).unwrap()
    }

    fn ratio(p: u32, q: u32) -> Rational {
        Rational::new(p.into(), q.into())
    }

    #[test]
    fn contrastive_on_running_example() {
        let c = all_contrastive(&cattleya_g());
        assert_eq!(c, vec![pos(&[0, 1]), pos(&[0, 2]), pos(&[3])]);
        let stats = contrastive_stats(&c);
        assert_eq!(stats.count_u64(), 3);
        assert_eq!(stats.min_size, Some(1));
        assert_eq!(stats.median_size, Some(2.0));
        assert_eq!(stats.max_size, Some(2));
    }

    #[test]
    fn features_on_running_example() {
        let f = explanatory_features(&cattleya_g());
        assert_eq!(f.necessary, vec![Literal::pos(3)]);
        assert_eq!(f.relevant, (0..4).map(Literal::pos).collect::<Vec<_>>());
        assert_eq!(f.irrelevant, (0..4).map(Literal::neg).collect::<Vec<_>>());
    }

    #[test]
    fn sufficient_reasons_and_importance_on_running_example() {
        let g = cattleya_g();
        let all = enumerate_sufficient_reasons(&g, 100).unwrap();
        assert!(all.complete);
        assert_eq!(all.items, vec![pos(&[0, 3]), pos(&[1, 2, 3])]);

        let imp = count_and_importance(&g, 100).unwrap();
        assert!(imp.is_exact());
        assert_eq!(imp.total_count(), &BigUint::from(2u32));
        assert_eq!(imp.importance(Literal::pos(3)), ratio(1, 1));
        for v in 0..3 {
            assert_eq!(imp.importance(Literal::pos(v)), ratio(1, 2));
        }
        for v in 0..4 {
            assert!(imp.importance(Literal::neg(v)).is_zero());
        }
    }

    #[test]
    fn constant_true_tree() {
        let x: Instance = "01".parse().unwrap();
        let g = restrict(&DecisionTree::constant(2, true), &x).unwrap();
        assert!(all_contrastive(&g).is_empty());
        let f = explanatory_features(&g);
        assert!(f.necessary.is_empty() && f.relevant.is_empty());
        assert_eq!(f.irrelevant.len(), 4);
        let imp = count_and_importance(&g, 10).unwrap();
        assert_eq!(imp.total_count(), &BigUint::from(1u32));
        assert_eq!(imp.nonzero().count(), 0);
        assert_eq!(contrastive_stats(&[]).count_u64(), 0);
        assert_eq!(contrastive_stats(&[]).min_size, None);
    }

    #[test]
    fn cap_marks_enumeration_incomplete() {
        let g = cattleya_g();
        let one = enumerate_sufficient_reasons(&g, 1).unwrap();
        assert_eq!(one.items.len(), 1);
        assert!(!one.complete);
        let two = enumerate_sufficient_reasons(&g, 2).unwrap();
        assert!(two.complete);
        assert!(!count_and_importance(&g, 1).unwrap().is_exact());
        assert!(matches!(
            enumerate_sufficient_reasons(&g, 0),
            Err(Error::ZeroCap)
        ));
    }

    #[test]
    fn importance_csv_layout() {
        let csv = count_and_importance(&cattleya_g(), 10)
            .unwrap()
            .to_csv()
            .unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "variable,polarity,importance_num,importance_den");
        assert_eq!(lines.len(), 1 + 8);
        assert!(lines.contains(&"3,1,1,1"));
        assert!(lines.contains(&"0,1,1,2"));
        assert!(lines.contains(&"0,0,0,1"));
    }
}
