use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::statistics::{Data, Max, OrderStatistics, Statistics};

use crate::abductive::{
    self, format_ratio, Enumeration, OrderStrategy, Rational, Reason, RemovalOrder, Seed,
};
use crate::contrastive::{self, contrastive_stats, ContrastiveStats, FeatureReport, ImportanceMap};
use crate::error::{Error, Result};
use crate::logic::{Instance, Term};
use crate::restriction::restrict;
use crate::tree::DecisionTree;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExplainKind {
    Direct,
    Sufficient,
    Minimal,
    MinimalGreedy,
    MinimalAll,
    Probable,
    Contrastive,
    Features,
    Importance,
    SufficientAll,
}

impl ExplainKind {
    pub const ALL: [ExplainKind; 10] = [
        ExplainKind::Direct,
        ExplainKind::Sufficient,
        ExplainKind::Minimal,
        ExplainKind::MinimalGreedy,
        ExplainKind::MinimalAll,
        ExplainKind::Probable,
        ExplainKind::Contrastive,
        ExplainKind::Features,
        ExplainKind::Importance,
        ExplainKind::SufficientAll,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExplainKind::Direct => "direct",
            ExplainKind::Sufficient => "sufficient",
            ExplainKind::Minimal => "minimal",
            ExplainKind::MinimalGreedy => "minimal-greedy",
            ExplainKind::MinimalAll => "minimal-all",
            ExplainKind::Probable => "probable",
            ExplainKind::Contrastive => "contrastive",
            ExplainKind::Features => "features",
            ExplainKind::Importance => "importance",
            ExplainKind::SufficientAll => "sufficient-all",
        }
    }
}

impl fmt::Display for ExplainKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExplainKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        ExplainKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = ExplainKind::ALL.iter().map(|k| k.name()).collect();
                format!("unknown kind {s:?}; expected one of {}", names.join(", "))
            })
    }
}

#[derive(Clone, Debug)]
pub struct BatchConfig {
    pub kinds: Vec<ExplainKind>,
    /// Thresholds for probable reasons.
    pub deltas: Vec<Rational>,
    /// Limit for every enumeration (minimal-all, sufficient-all, importance).
    pub cap: usize,
    pub order: OrderStrategy,
    /// At most this many instances are explained, picked with `seed`.
    pub sample_limit: usize,
    pub seed: u64,
    /// Worker threads; 0 uses the global pool.
    pub jobs: usize,
}

impl Default for BatchConfig {
    fn default() -> Self {
        BatchConfig {
            kinds: vec![
                ExplainKind::Direct,
                ExplainKind::Sufficient,
                ExplainKind::Minimal,
            ],
            deltas: vec![Rational::from_integer(1.into())],
            cap: 10_000,
            order: OrderStrategy::Path,
            sample_limit: 100,
            seed: 0,
            jobs: 0,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ContrastiveReport {
    pub explanations: Vec<Term>,
    pub stats: ContrastiveStats,
}

/// Everything computed for one instance. Reasons for an instance of class 0
/// are reasons for the negated tree.
#[derive(Clone, Debug, Serialize)]
pub struct ReasonReport {
    /// Position of the instance in the caller's list.
    pub index: usize,
    pub instance: String,
    pub class: Option<u8>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub direct: Option<Reason>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sufficient: Option<Reason>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub minimal: Option<Reason>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub minimal_greedy: Option<Reason>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub minimal_all: Option<Enumeration<Term>>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub probable: Vec<Reason>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub contrastive: Option<ContrastiveReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub features: Option<FeatureReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub importance: Option<ImportanceMap>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sufficient_all: Option<Enumeration<Term>>,
    /// Wall time per query in milliseconds, keyed like [`BatchStats::timings`].
    pub timings_ms: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub errors: Vec<String>,
}

impl ReasonReport {
    fn new(index: usize, x: &Instance) -> Self {
        ReasonReport {
            index,
            instance: x.to_string(),
            class: None,
            direct: None,
            sufficient: None,
            minimal: None,
            minimal_greedy: None,
            minimal_all: None,
            probable: Vec::new(),
            contrastive: None,
            features: None,
            importance: None,
            sufficient_all: None,
            timings_ms: BTreeMap::new(),
            errors: Vec::new(),
        }
    }
}

fn probable_key(delta: &Rational) -> String {
    format!("probable@{}", format_ratio(delta))
}

fn timed<T>(report: &mut ReasonReport, key: String, run: impl FnOnce() -> Result<T>) -> Option<T> {
    let start = Instant::now();
    let out = run();
    report
        .timings_ms
        .insert(key.clone(), start.elapsed().as_secs_f64() * 1e3);
    match out {
        Ok(v) => Some(v),
        Err(e) => {
            report.errors.push(format!("{key}: {e}"));
            None
        }
    }
}

/// Computes the requested kinds for one instance. Failures are recorded in
/// the report instead of being returned.
pub fn explain_instance(
    tree: &DecisionTree,
    index: usize,
    x: &Instance,
    config: &BatchConfig,
) -> ReasonReport {
    let mut report = ReasonReport::new(index, x);
    let positive = match tree.evaluate(x) {
        Ok(p) => p,
        Err(e) => {
            report.errors.push(e.to_string());
            return report;
        }
    };
    report.class = Some(u8::from(positive));
    let negated;
    let t = if positive {
        tree
    } else {
        negated = tree.negate();
        &negated
    };
    let order = || RemovalOrder::for_strategy(config.order, t, x);

    let mut kinds = config.kinds.clone();
    kinds.sort_unstable();
    kinds.dedup();
    for kind in kinds {
        let key = kind.name().to_string();
        match kind {
            ExplainKind::Direct => {
                report.direct = timed(&mut report, key, || abductive::direct_reason(t, x));
            }
            ExplainKind::Sufficient => {
                report.sufficient = timed(&mut report, key, || {
                    let g = restrict(t, x)?;
                    let seed = abductive::direct_reason(t, x)?.term;
                    Ok(abductive::sufficient_reason(&g, &seed, &order()?)?.with_seed(Seed::Direct))
                });
            }
            ExplainKind::Minimal => {
                report.minimal = timed(&mut report, key, || {
                    Ok(abductive::minimal_reason(&restrict(t, x)?))
                });
            }
            ExplainKind::MinimalGreedy => {
                report.minimal_greedy = timed(&mut report, key, || {
                    Ok(abductive::minimal_reason_greedy(&restrict(t, x)?))
                });
            }
            ExplainKind::MinimalAll => {
                report.minimal_all = timed(&mut report, key, || {
                    let all = abductive::enumerate_minimal_reasons(&restrict(t, x)?, config.cap)?;
                    Ok(Enumeration {
                        items: all.items.into_iter().map(|r| r.term).collect(),
                        complete: all.complete,
                    })
                });
            }
            ExplainKind::Probable => {
                for delta in &config.deltas {
                    let r = timed(&mut report, probable_key(delta), || {
                        abductive::probable_reason(t, x, delta, &order()?)
                    });
                    report.probable.extend(r);
                }
            }
            ExplainKind::Contrastive => {
                report.contrastive = timed(&mut report, key, || {
                    let explanations = contrastive::all_contrastive(&restrict(t, x)?);
                    let stats = contrastive_stats(&explanations);
                    Ok(ContrastiveReport {
                        explanations,
                        stats,
                    })
                });
            }
            ExplainKind::Features => {
                report.features = timed(&mut report, key, || {
                    Ok(contrastive::explanatory_features(&restrict(t, x)?))
                });
            }
            ExplainKind::Importance => {
                report.importance = timed(&mut report, key, || {
                    contrastive::count_and_importance(&restrict(t, x)?, config.cap)
                });
            }
            ExplainKind::SufficientAll => {
                report.sufficient_all = timed(&mut report, key, || {
                    contrastive::enumerate_sufficient_reasons(&restrict(t, x)?, config.cap)
                });
            }
        }
    }
    report
}

/// Up to `limit` distinct indices below `total`, ascending, chosen with `seed`.
pub fn sample_indices(total: usize, limit: usize, seed: u64) -> Vec<usize> {
    if total <= limit {
        return (0..total).collect();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked = rand::seq::index::sample(&mut rng, total, limit).into_vec();
    picked.sort_unstable();
    picked
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SummaryStats {
    pub count: usize,
    pub median: f64,
    pub max: f64,
    pub mean: f64,
    pub stddev: f64,
}

impl SummaryStats {
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mut data = Data::new(values.to_vec());
        Some(SummaryStats {
            count: values.len(),
            median: OrderStatistics::median(&mut data),
            max: Max::max(&data),
            mean: values.mean(),
            stddev: values.population_std_dev(),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TimingStats {
    pub median_ms: f64,
    pub p90_ms: f64,
    pub max_ms: f64,
    pub mean_ms: f64,
}

impl TimingStats {
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mut data = Data::new(values.to_vec());
        Some(TimingStats {
            median_ms: OrderStatistics::median(&mut data),
            p90_ms: data.quantile(0.9),
            max_ms: Max::max(&data),
            mean_ms: values.mean(),
        })
    }
}

/// Aggregates over the explained instances.
#[derive(Clone, Debug, Serialize)]
pub struct BatchStats {
    pub instances: usize,
    /// Instances with at least one failed query.
    pub instances_with_errors: usize,
    pub node_count: usize,
    /// Set by callers that know the test labels.
    pub accuracy: Option<f64>,
    /// Reason sizes per kind; `contrastive` pools every explanation.
    pub sizes: BTreeMap<String, SummaryStats>,
    /// Per-instance numbers of explanations for the enumerating kinds.
    pub counts: BTreeMap<String, SummaryStats>,
    pub timings: BTreeMap<String, TimingStats>,
}

impl BatchStats {
    pub fn from_reports(tree: &DecisionTree, reports: &[ReasonReport]) -> Self {
        let mut sizes: BTreeMap<String, Vec<f64>> = BTreeMap::new();
        let mut counts: BTreeMap<String, Vec<f64>> = BTreeMap::new();
        let mut timings: BTreeMap<String, Vec<f64>> = BTreeMap::new();
        let push = |map: &mut BTreeMap<String, Vec<f64>>, key: &str, v: f64| {
            map.entry(key.to_string()).or_default().push(v);
        };
        for r in reports {
            for (kind, reason) in [
                ("direct", &r.direct),
                ("sufficient", &r.sufficient),
                ("minimal", &r.minimal),
                ("minimal-greedy", &r.minimal_greedy),
            ] {
                if let Some(reason) = reason {
                    push(&mut sizes, kind, reason.size as f64);
                }
            }
            for p in &r.probable {
                push(&mut sizes, &probable_key(&p.delta), p.size as f64);
            }
            if let Some(c) = &r.contrastive {
                for t in &c.explanations {
                    push(&mut sizes, "contrastive", t.len() as f64);
                }
                push(&mut counts, "contrastive", c.explanations.len() as f64);
            }
            if let Some(all) = &r.minimal_all {
                push(&mut counts, "minimal-all", all.items.len() as f64);
            }
            if let Some(all) = &r.sufficient_all {
                push(&mut counts, "sufficient-all", all.items.len() as f64);
            }
            for (key, ms) in &r.timings_ms {
                push(&mut timings, key, *ms);
            }
        }
        let summarize = |m: BTreeMap<String, Vec<f64>>| {
            m.into_iter()
                .filter_map(|(k, v)| SummaryStats::of(&v).map(|s| (k, s)))
                .collect()
        };
        BatchStats {
            instances: reports.len(),
            instances_with_errors: reports.iter().filter(|r| !r.errors.is_empty()).count(),
            node_count: tree.size(),
            accuracy: None,
            sizes: summarize(sizes),
            counts: summarize(counts),
            timings: timings
                .into_iter()
                .filter_map(|(k, v)| TimingStats::of(&v).map(|s| (k, s)))
                .collect(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BatchOutput {
    pub reports: Vec<ReasonReport>,
    pub stats: BatchStats,
}

/// Explains a seeded sample of at most `config.sample_limit` instances,
/// concurrently, returning reports in input order.
pub fn batch_explain(
    tree: &DecisionTree,
    instances: &[Instance],
    config: &BatchConfig,
) -> Result<BatchOutput> {
    if config.cap == 0 {
        return Err(Error::ZeroCap);
    }
    let picked = sample_indices(instances.len(), config.sample_limit, config.seed);
    let work = || -> Vec<ReasonReport> {
        picked
            .par_iter()
            .map(|&i| explain_instance(tree, i, &instances[i], config))
            .collect()
    };
    let reports = if config.jobs == 0 {
        work()
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(config.jobs)
            .build()
            .map_err(|e| Error::Dataset(format!("cannot start worker pool: {e}")))?
            .install(work)
    };
    let stats = BatchStats::from_reports(tree, &reports);
    Ok(BatchOutput { reports, stats })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::cattleya;

    fn all_instances(n: usize) -> Vec<Instance> {
        (0..1u64 << n).map(|b| Instance::from_mask(b, n)).collect()
    }

    #[test]
    fn kind_names_round_trip() {
        for k in ExplainKind::ALL {
            assert_eq!(k.name().parse::<ExplainKind>().unwrap(), k);
        }
        assert!("nope".parse::<ExplainKind>().is_err());
    }

    #[test]
    fn size_chain_over_every_instance() {
        let tree = cattleya();
        let config = BatchConfig {
            kinds: ExplainKind::ALL.to_vec(),
            ..BatchConfig::default()
        };
        let out = batch_explain(&tree, &all_instances(4), &config).unwrap();
        assert_eq!(out.reports.len(), 16);
        for r in &out.reports {
            assert!(r.errors.is_empty(), "{:?}", r.errors);
            let (d, s, m) = (
                r.direct.as_ref().unwrap().size,
                r.sufficient.as_ref().unwrap().size,
                r.minimal.as_ref().unwrap().size,
            );
            assert!(m <= s && s <= d);
            // δ = 1 gives the greedy sufficient reason
            assert_eq!(r.probable[0].term, r.sufficient.as_ref().unwrap().term);
        }
        assert_eq!(out.stats.instances, 16);
        assert_eq!(out.stats.node_count, 23);
        assert!(out.stats.timings.contains_key("probable@1/1"));
        assert!(out.stats.sizes["minimal"].median <= out.stats.sizes["direct"].median);
    }

    #[test]
    fn negative_instances_use_the_negated_tree() {
        let tree = cattleya();
        let x: Instance = "1110".parse().unwrap();
        let r = explain_instance(&tree, 0, &x, &BatchConfig::default());
        assert_eq!(r.class, Some(0));
        assert_eq!(r.minimal.unwrap().term.to_string(), "-x3");
    }

    #[test]
    fn per_instance_errors_do_not_stop_the_batch() {
        let tree = cattleya();
        let xs = vec!["1111".parse().unwrap(), "11".parse().unwrap()];
        let out = batch_explain(&tree, &xs, &BatchConfig::default()).unwrap();
        assert!(out.reports[0].errors.is_empty());
        assert_eq!(out.reports[1].errors.len(), 1);
        assert_eq!(out.stats.instances_with_errors, 1);
    }

    #[test]
    fn sampling_is_seeded_and_bounded() {
        let a = sample_indices(1000, 100, 4);
        assert_eq!(a.len(), 100);
        assert!(a.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(a, sample_indices(1000, 100, 4));
        assert_eq!(sample_indices(5, 100, 4), vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn jobs_do_not_change_output() {
        let tree = cattleya();
        let config = BatchConfig {
            kinds: ExplainKind::ALL.to_vec(),
            jobs: 3,
            ..BatchConfig::default()
        };
        let a = batch_explain(&tree, &all_instances(4), &config).unwrap();
        let b =
            batch_explain(&tree, &all_instances(4), &BatchConfig { jobs: 1, ..config }).unwrap();
        let strip = |o: &BatchOutput| -> Vec<String> {
            o.reports
                .iter()
                .map(|r| {
                    let mut r = r.clone();
                    r.timings_ms.clear();
                    serde_json::to_string(&r).unwrap()
                })
                .collect()
        };
        assert_eq!(strip(&a), strip(&b));
    }
}
