//! Randomized agreement checks between the explanation algorithms and the
//! oracles, over read-once trees small enough for exhaustive enumeration.
//!
//! In mutant mode every query hands the algorithms a copy of the tree with
//! one leaf off the instance's path flipped, while the oracles keep the
//! original. A healthy harness must then report failures.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::abductive::{self, format_ratio, greedy_bound, probable_reason, Rational, RemovalOrder};
use crate::contrastive::{
    all_contrastive, count_and_importance, enumerate_sufficient_reasons, explanatory_features,
};
use crate::error::Result;
use crate::logic::{Instance, Literal, Term};
use crate::oracles::{self, BruteForce};
use crate::restriction::restrict;
use crate::tree::{DecisionTree, Node};

/// The δ values exercised by the probable-reason checks, largest first.
pub fn default_deltas() -> Vec<Rational> {
    [(1, 1), (95, 100), (9, 10), (3, 4), (1, 2)]
        .into_iter()
        .map(|(p, q): (u32, u32)| Rational::new(p.into(), q.into()))
        .collect()
}

#[derive(Clone, Debug)]
pub struct VerifyConfig {
    pub trials: usize,
    pub max_vars: usize,
    pub seed: u64,
    pub oracle_limit: usize,
    pub deltas: Vec<Rational>,
    pub mutant: bool,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            trials: 1000,
            max_vars: 12,
            seed: 0,
            oracle_limit: oracles::DEFAULT_ORACLE_LIMIT,
            deltas: default_deltas(),
            mutant: false,
        }
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct CheckTally {
    pub passed: usize,
    pub failed: usize,
    pub first_failure: Option<String>,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct GreedyRatio {
    /// Queries with a nonempty optimum.
    pub samples: usize,
    pub mean: f64,
    pub max: f64,
    /// Share of those queries where greedy found an optimum.
    pub optimal_share: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub trials: usize,
    pub mutant: bool,
    pub checks: BTreeMap<String, CheckTally>,
    pub greedy_ratio: GreedyRatio,
    /// Mean probable-reason size per δ, in the configured δ order.
    pub probable_mean_sizes: Vec<(String, f64)>,
    pub mean_sufficient_count: f64,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.values().all(|t| t.failed == 0)
    }

    pub fn failed(&self, check: &str) -> usize {
        self.checks.get(check).map_or(0, |t| t.failed)
    }

    /// One line per check: name, pass/fail verdict and counts.
    pub fn matrix(&self) -> String {
        let width = self.checks.keys().map(String::len).max().unwrap_or(0);
        let mut out = String::new();
        for (name, t) in &self.checks {
            let verdict = if t.failed == 0 { "pass" } else { "FAIL" };
            let _ = writeln!(
                out,
                "{name:<width$}  {verdict}  {} passed, {} failed",
                t.passed, t.failed
            );
            if let Some(msg) = &t.first_failure {
                let _ = writeln!(out, "{:<width$}    first failure: {msg}", "");
            }
        }
        out
    }
}

/// Outcome of all checks on one query.
#[derive(Default)]
struct QueryOutcome {
    checks: Vec<(&'static str, std::result::Result<(), String>)>,
    greedy_ratio: Option<f64>,
    probable_sizes: Vec<usize>,
    sufficient_count: usize,
}

impl QueryOutcome {
    fn record(&mut self, name: &'static str, ok: bool, detail: impl FnOnce() -> String) {
        self.checks
            .push((name, if ok { Ok(()) } else { Err(detail()) }));
    }
}

fn flip_off_path_leaf(tree: &DecisionTree, x: &Instance, rng: &mut impl Rng) -> DecisionTree {
    let mut on_path = BTreeSet::new();
    let mut id = tree.root();
    loop {
        on_path.insert(id);
        match tree.node(id) {
            Node::Leaf(_) => break,
            Node::Internal { var, left, right } => id = if x.value(var) { right } else { left },
        }
    }
    let candidates: Vec<usize> = (0..tree.size())
        .filter(|&i| tree.node(i).is_leaf() && !on_path.contains(&i))
        .collect();
    if candidates.is_empty() {
        return tree.clone();
    }
    let target = candidates[rng.gen_range(0..candidates.len())];
    let mut nodes = tree.nodes().to_vec();
    if let Node::Leaf(label) = nodes[target] {
        nodes[target] = Node::Leaf(!label);
    }
    DecisionTree::new(tree.n(), nodes, tree.root()).expect("same shape")
}

fn show(set: &BTreeSet<Term>) -> String {
    let items: Vec<String> = set.iter().map(|t| format!("[{t}]")).collect();
    format!("{{{}}}", items.join(", "))
}

fn literal_intersection(set: &BTreeSet<Term>) -> BTreeSet<Literal> {
    let mut it = set.iter();
    let Some(first) = it.next() else {
        return BTreeSet::new();
    };
    let mut acc: BTreeSet<Literal> = first.iter().collect();
    for t in it {
        acc.retain(|l| t.contains(*l));
    }
    acc
}

/// Runs every check on one positive query. `tree` feeds the oracles and
/// `subject` the algorithms under test; they are equal outside mutant mode.
fn check_query(
    tree: &DecisionTree,
    subject: &DecisionTree,
    x: &Instance,
    config: &VerifyConfig,
    rng: &mut impl Rng,
) -> Result<QueryOutcome> {
    let mut out = QueryOutcome::default();
    let n = tree.n();
    let brute = BruteForce::new(tree, x, config.oracle_limit)?;
    let oracle = brute.sufficient_reasons();
    out.sufficient_count = oracle.len();

    // normal forms, negation
    let cnf = subject.to_cnf();
    let dnf = subject.to_dnf();
    let negated = subject.negate();
    let mut normal_forms = Ok(());
    for bits in 0..1u64 << n {
        let z = Instance::from_mask(bits, n);
        let value = tree.evaluate(&z)?;
        let by_cnf = cnf.iter().all(|c| c.satisfied_by(&z));
        let by_dnf = dnf.iter().any(|t| t.covers(&z));
        if by_cnf != value || by_dnf != value || negated.evaluate(&z)? == value {
            normal_forms = Err(format!("assignment {z} evaluates to {value}"));
            break;
        }
    }
    out.checks.push(("normal-forms", normal_forms));

    // model counting and precision against enumeration
    let mut cond_lits = Vec::new();
    for v in 0..n {
        if rng.gen_bool(0.3) {
            cond_lits.push(Literal::new(v, rng.gen_bool(0.5)));
        }
    }
    let cond = Term::new(cond_lits).expect("one literal per variable");
    let mut over: BTreeSet<usize> = tree.vars();
    over.extend(cond.vars());
    let counted = subject.count_models(&cond, &over)?;
    let expected =
        oracles::brute_force_count(tree, &cond, &over.iter().copied().collect::<Vec<_>>());
    out.record("model-count", counted == expected, || {
        format!("count_models({cond}) = {counted}, enumeration gives {expected}")
    });

    // restriction: hitting every clause of g is implicant-ness
    let g = restrict(subject, x)?;
    let mut restriction = Ok(());
    for (t, implicant) in brute.subterms() {
        if g.hits_all(&t)? != implicant {
            restriction = Err(format!(
                "[{t}] implicant={implicant} but hits_all disagrees"
            ));
            break;
        }
    }
    out.checks.push(("restriction", restriction));

    let shannon = oracles::shannon_sr(tree, x, config.oracle_limit)?;
    out.record("oracle-agreement", shannon == oracle, || {
        format!(
            "subset oracle {} vs recursion {}",
            show(&oracle),
            show(&shannon)
        )
    });

    let enumerated = enumerate_sufficient_reasons(&g, usize::MAX)?;
    let enumerated_set: BTreeSet<Term> = enumerated.items.iter().cloned().collect();
    out.record(
        "sufficient-enumeration",
        enumerated.complete
            && enumerated_set == oracle
            && enumerated_set.len() == enumerated.items.len(),
        || {
            format!(
                "enumerated {} vs oracle {}",
                show(&enumerated_set),
                show(&oracle)
            )
        },
    );

    let direct = abductive::direct_reason(subject, x)?;
    let path_order = RemovalOrder::path_depth(subject, x)?;
    let mut greedy_ok = true;
    let mut greedy_detail = String::new();
    let mut sufficient_path = None;
    for order in [path_order.clone(), RemovalOrder::Index] {
        let r = abductive::sufficient_reason(&g, &direct.term, &order)?;
        if !oracle.contains(&r.term) {
            greedy_ok = false;
            greedy_detail = format!("[{}] from {order:?} is not a sufficient reason", r.term);
        }
        sufficient_path.get_or_insert(r);
    }
    let sufficient_path = sufficient_path.expect("two orders tried");
    out.record("greedy-sufficient", greedy_ok, || greedy_detail);

    let min_size = oracle.iter().map(Term::len).min().unwrap_or(0);
    let minimal = abductive::minimal_reason(&g);
    out.record(
        "minimal",
        minimal.size == min_size && oracle.contains(&minimal.term),
        || {
            format!(
                "minimal [{}] but oracle minimum size is {min_size}",
                minimal.term
            )
        },
    );

    let all_minimal = abductive::enumerate_minimal_reasons(&g, usize::MAX)?;
    let minimal_terms: Vec<Term> = all_minimal.items.iter().map(|r| r.term.clone()).collect();
    let expected_minimal: Vec<Term> = oracle
        .iter()
        .filter(|t| t.len() == min_size)
        .cloned()
        .collect();
    let mut sorted = minimal_terms.clone();
    sorted.sort_by(|a, b| a.vars().cmp(b.vars()));
    let minimal_set: BTreeSet<Term> = minimal_terms.iter().cloned().collect();
    out.record(
        "minimal-enumeration",
        all_minimal.complete
            && sorted == minimal_terms
            && minimal_set == expected_minimal.iter().cloned().collect::<BTreeSet<_>>()
            && minimal_set.len() == minimal_terms.len(),
        || {
            format!(
                "enumerated {:?} vs oracle minimum-size {:?}",
                minimal_terms, expected_minimal
            )
        },
    );

    out.record(
        "size-chain",
        minimal.size <= sufficient_path.size
            && sufficient_path.size <= direct.size
            && direct.size <= n,
        || {
            format!(
                "minimal {} sufficient {} direct {}",
                minimal.size, sufficient_path.size, direct.size
            )
        },
    );

    let contrastive: BTreeSet<Term> = all_contrastive(&g).into_iter().collect();
    let dual = oracles::brute_force_minimal_hitting_sets(&oracle, config.oracle_limit)?;
    let back = oracles::brute_force_minimal_hitting_sets(&contrastive, config.oracle_limit)?;
    out.record("duality", contrastive == dual && back == oracle, || {
        format!(
            "contrastive {} vs hitting sets of reasons {}; hitting sets of contrastive {} vs reasons {}",
            show(&contrastive),
            show(&dual),
            show(&back),
            show(&oracle)
        )
    });

    let bad = contrastive
        .iter()
        .find(|c| !oracles::is_contrastive(tree, x, c));
    out.record("contrastive-semantics", bad.is_none(), || {
        format!("[{}] is not a minimal flipping set", bad.expect("failed"))
    });

    let features = explanatory_features(&g);
    let necessary: BTreeSet<Literal> = features.necessary.iter().copied().collect();
    let relevant: BTreeSet<Literal> = features.relevant.iter().copied().collect();
    let union: BTreeSet<Literal> = oracle.iter().flat_map(|t| t.iter()).collect();
    let intersection = literal_intersection(&oracle);
    out.record(
        "features",
        necessary == intersection && relevant == union,
        || format!("necessary {necessary:?} relevant {relevant:?}, oracle ∩ {intersection:?} ∪ {union:?}"),
    );

    let importance = count_and_importance(&g, usize::MAX)?;
    let total = oracle.len();
    let mut importance_ok =
        importance.is_exact() && importance.total_count().to_usize() == Some(total);
    for v in 0..n {
        for lit in [Literal::pos(v), Literal::neg(v)] {
            let k = oracle.iter().filter(|t| t.contains(lit)).count();
            let expected = Rational::new(k.into(), total.max(1).into());
            let imp = importance.importance(lit);
            importance_ok &= imp == expected
                && (k == total && total > 0) == necessary.contains(&lit)
                && (!imp.is_zero()) == relevant.contains(&lit);
        }
    }
    out.record("importance", importance_ok, || {
        format!(
            "importance disagrees with frequencies over {}",
            show(&oracle)
        )
    });

    let m = g.minimize().len();
    let greedy = abductive::minimal_reason_greedy(&g);
    let bound = greedy_bound(m, min_size);
    out.record(
        "greedy-bound",
        greedy.size <= bound && oracle.contains(&greedy.term),
        || {
            format!(
                "greedy [{}] size {} over bound {bound} (m={m}, opt={min_size})",
                greedy.term, greedy.size
            )
        },
    );
    if min_size > 0 {
        out.greedy_ratio = Some(greedy.size as f64 / min_size as f64);
    }

    let mut probable_ok = Ok(());
    for delta in &config.deltas {
        let r = probable_reason(subject, x, delta, &path_order)?;
        out.probable_sizes.push(r.size);
        let claimed = abductive::precision(subject, &r.term)?;
        let actual = oracles::brute_force_precision(tree, &r.term);
        let locally_minimal = r
            .term
            .vars()
            .all(|v| oracles::brute_force_precision(tree, &r.term.without_var(v)) < *delta);
        let at_one = !delta.is_integer() || r.term == sufficient_path.term;
        if actual < *delta
            || claimed != actual
            || !locally_minimal
            || !at_one
            || !r.term.is_subset(&direct.term)
        {
            probable_ok = Err(format!(
                "δ={}: [{}] precision {} (claimed {}), locally minimal {locally_minimal}",
                format_ratio(delta),
                r.term,
                format_ratio(&actual),
                format_ratio(&claimed)
            ));
            break;
        }
    }
    out.checks.push(("probable", probable_ok));
    Ok(out)
}

/// Runs `config.trials` random queries in parallel. Query `i` draws from its
/// own stream of the seeded generator, so results do not depend on
/// scheduling.
pub fn run(config: &VerifyConfig) -> Result<VerifyReport> {
    let outcomes: Vec<QueryOutcome> = (0..config.trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(i as u64);
            let (tree, x) = oracles::random_positive_query(&mut rng, config.max_vars);
            let subject = if config.mutant {
                flip_off_path_leaf(&tree, &x, &mut rng)
            } else {
                tree.clone()
            };
            check_query(&tree, &subject, &x, config, &mut rng)
        })
        .collect::<Result<_>>()?;

    let mut checks: BTreeMap<String, CheckTally> = BTreeMap::new();
    let mut ratios = Vec::new();
    let mut size_sums = vec![0usize; config.deltas.len()];
    let mut count_sum = 0usize;
    for o in &outcomes {
        for (name, result) in &o.checks {
            let tally = checks.entry(name.to_string()).or_default();
            match result {
                Ok(()) => tally.passed += 1,
                Err(msg) => {
                    tally.failed += 1;
                    tally.first_failure.get_or_insert_with(|| msg.clone());
                }
            }
        }
        ratios.extend(o.greedy_ratio);
        for (sum, s) in size_sums.iter_mut().zip(&o.probable_sizes) {
            *sum += s;
        }
        count_sum += o.sufficient_count;
    }
    let trials = outcomes.len().max(1) as f64;
    let greedy_ratio = GreedyRatio {
        samples: ratios.len(),
        mean: if ratios.is_empty() {
            1.0
        } else {
            ratios.iter().sum::<f64>() / ratios.len() as f64
        },
        max: ratios.iter().copied().fold(1.0, f64::max),
        optimal_share: if ratios.is_empty() {
            1.0
        } else {
            ratios.iter().filter(|&&r| r == 1.0).count() as f64 / ratios.len() as f64
        },
    };
    Ok(VerifyReport {
        trials: outcomes.len(),
        mutant: config.mutant,
        checks,
        greedy_ratio,
        probable_mean_sizes: config
            .deltas
            .iter()
            .zip(size_sums)
            .map(|(d, s)| (format_ratio(d), s as f64 / trials))
            .collect(),
        mean_sufficient_count: count_sum as f64 / trials,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_run_passes() {
        let report = run(&VerifyConfig {
            trials: 60,
            max_vars: 8,
            seed: 3,
            ..VerifyConfig::default()
        })
        .unwrap();
        assert_eq!(report.trials, 60);
        assert!(report.all_passed(), "{}", report.matrix());
        assert!(report.checks.contains_key("duality"));
    }

    #[test]
    fn mutant_breaks_duality() {
        let report = run(&VerifyConfig {
            trials: 60,
            max_vars: 8,
            seed: 3,
            mutant: true,
            ..VerifyConfig::default()
        })
        .unwrap();
        assert!(report.failed("duality") > 0, "{}", report.matrix());
    }

    #[test]
    fn runs_are_reproducible() {
        let config = VerifyConfig {
            trials: 20,
            max_vars: 6,
            seed: 11,
            ..VerifyConfig::default()
        };
        let a = run(&config).unwrap();
        let b = run(&config).unwrap();
        assert_eq!(a.probable_mean_sizes, b.probable_mean_sizes);
        assert_eq!(a.mean_sufficient_count, b.mean_sufficient_count);
    }
}
