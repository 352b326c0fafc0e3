//! Hitting-set search over the hypergraph whose hyperedges are the clauses of
//! a monotone clause set and whose vertices are the variables occurring in it.
//!
//! Vertices are renumbered densely in ascending variable order, so ascending
//! local order is ascending variable order.

use std::ops::ControlFlow;

pub(crate) struct Hypergraph {
    vars: Vec<usize>,
    edges: Vec<Vec<usize>>,
    incidence: Vec<Vec<usize>>,
}

impl Hypergraph {
    pub fn new(clauses: &[Vec<usize>]) -> Self {
        let mut vars: Vec<usize> = clauses.iter().flatten().copied().collect();
        vars.sort_unstable();
        vars.dedup();
        let local = |v: usize| vars.binary_search(&v).expect("collected above");
        let edges: Vec<Vec<usize>> = clauses
            .iter()
            .map(|c| {
                let mut e: Vec<usize> = c.iter().map(|&v| local(v)).collect();
                e.sort_unstable();
                e
            })
            .collect();
        let mut incidence = vec![Vec::new(); vars.len()];
        for (i, e) in edges.iter().enumerate() {
            for &v in e {
                incidence[v].push(i);
            }
        }
        Hypergraph {
            vars,
            edges,
            incidence,
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.vars.len()
    }

    /// Local vertex ids back to variable indices, ascending.
    pub fn to_vars(&self, local: &[usize]) -> Vec<usize> {
        let mut out: Vec<usize> = local.iter().map(|&v| self.vars[v]).collect();
        out.sort_unstable();
        out
    }

    /// Repeatedly takes a vertex of maximal degree in the uncovered edges,
    /// smallest index on ties.
    pub fn greedy_cover(&self) -> Vec<usize> {
        let mut covered = vec![false; self.edges.len()];
        let mut degree: Vec<usize> = self.incidence.iter().map(Vec::len).collect();
        let mut chosen = Vec::new();
        while let Some((best, _)) = degree
            .iter()
            .enumerate()
            .filter(|(_, &d)| d > 0)
            .max_by(|a, b| a.1.cmp(b.1).then_with(|| b.0.cmp(&a.0)))
        {
            chosen.push(best);
            for &e in &self.incidence[best] {
                if !covered[e] {
                    covered[e] = true;
                    for &u in &self.edges[e] {
                        degree[u] -= 1;
                    }
                }
            }
        }
        chosen.sort_unstable();
        chosen
    }

    /// Lower bound on the vertices still needed: a greedy packing of
    /// pairwise-disjoint uncovered edges, shortest first, counting only
    /// vertices accepted by `usable`.
    fn packing_bound(
        &self,
        count: &[u32],
        usable: impl Fn(usize) -> bool,
        scratch: &mut Vec<bool>,
    ) -> Option<usize> {
        let mut open: Vec<(usize, usize)> = Vec::new();
        for (i, e) in self.edges.iter().enumerate() {
            if count[i] == 0 {
                let size = e.iter().filter(|&&v| usable(v)).count();
                if size == 0 {
                    return None;
                }
                open.push((size, i));
            }
        }
        open.sort_unstable();
        scratch.clear();
        scratch.resize(self.vars.len(), false);
        let mut bound = 0;
        for (_, i) in open {
            let e = &self.edges[i];
            if e.iter().all(|&v| !usable(v) || !scratch[v]) {
                bound += 1;
                for &v in e {
                    scratch[v] = true;
                }
            }
        }
        Some(bound)
    }

    fn add(&self, v: usize, count: &mut [u32]) {
        for &e in &self.incidence[v] {
            count[e] += 1;
        }
    }

    fn remove(&self, v: usize, count: &mut [u32]) {
        for &e in &self.incidence[v] {
            count[e] -= 1;
        }
    }

    /// A minimum-cardinality hitting set by branch and bound.
    pub fn min_hitting_set(&self) -> Vec<usize> {
        let mut search = MinSearch {
            graph: self,
            count: vec![0; self.edges.len()],
            forbidden: vec![false; self.vars.len()],
            chosen: Vec::new(),
            best: self.greedy_cover(),
            scratch: Vec::new(),
        };
        search.run();
        let mut best = search.best;
        best.sort_unstable();
        best
    }

    /// Calls `sink` with every hitting set of exactly `k` vertices that
    /// contains no useless vertex, in lexicographic order. When `k` is the
    /// minimum size these are all the minimum hitting sets. Returns
    /// `ControlFlow::Break` if the sink stopped the search.
    pub fn for_each_hitting_set_of_size(
        &self,
        k: usize,
        sink: &mut dyn FnMut(&[usize]) -> ControlFlow<()>,
    ) -> ControlFlow<()> {
        let mut search = SizedSearch {
            graph: self,
            k,
            count: vec![0; self.edges.len()],
            chosen: Vec::new(),
            scratch: Vec::new(),
            sink,
        };
        search.visit(0)
    }

    /// Calls `sink` with every inclusion-minimal hitting set, each once.
    pub fn for_each_minimal_transversal(
        &self,
        sink: &mut dyn FnMut(&[usize]) -> ControlFlow<()>,
    ) -> ControlFlow<()> {
        let mut search = TransversalSearch {
            graph: self,
            count: vec![0; self.edges.len()],
            candidate: vec![true; self.vars.len()],
            chosen: Vec::new(),
            sink,
        };
        search.visit()
    }
}

struct MinSearch<'a> {
    graph: &'a Hypergraph,
    count: Vec<u32>,
    forbidden: Vec<bool>,
    chosen: Vec<usize>,
    best: Vec<usize>,
    scratch: Vec<bool>,
}

impl MinSearch<'_> {
    fn run(&mut self) {
        let g = self.graph;
        let forbidden = &self.forbidden;
        let Some(bound) = g.packing_bound(&self.count, |v| !forbidden[v], &mut self.scratch) else {
            return;
        };
        if self.chosen.len() + bound >= self.best.len() {
            return;
        }
        // branch on a shortest uncovered edge
        let mut target: Option<(usize, usize)> = None;
        for (i, e) in g.edges.iter().enumerate() {
            if self.count[i] == 0 {
                let size = e.iter().filter(|&&v| !self.forbidden[v]).count();
                if target.is_none_or(|(s, _)| size < s) {
                    target = Some((size, i));
                }
            }
        }
        let Some((_, edge)) = target else {
            self.best = self.chosen.clone();
            return;
        };
        let mut branch: Vec<usize> = g.edges[edge]
            .iter()
            .copied()
            .filter(|&v| !self.forbidden[v])
            .collect();
        // most uncovered edges first
        branch.sort_by_key(|&v| {
            let deg = g.incidence[v]
                .iter()
                .filter(|&&e| self.count[e] == 0)
                .count();
            (std::cmp::Reverse(deg), v)
        });
        for &v in &branch {
            self.chosen.push(v);
            g.add(v, &mut self.count);
            self.run();
            g.remove(v, &mut self.count);
            self.chosen.pop();
            // later branches exclude the vertices already tried
            self.forbidden[v] = true;
        }
        for &v in &branch {
            self.forbidden[v] = false;
        }
    }
}

struct SizedSearch<'a, 's> {
    graph: &'a Hypergraph,
    k: usize,
    count: Vec<u32>,
    chosen: Vec<usize>,
    scratch: Vec<bool>,
    sink: &'s mut dyn FnMut(&[usize]) -> ControlFlow<()>,
}

impl SizedSearch<'_, '_> {
    fn visit(&mut self, next: usize) -> ControlFlow<()> {
        let g = self.graph;
        let Some(bound) = g.packing_bound(&self.count, |v| v >= next, &mut self.scratch) else {
            return ControlFlow::Continue(());
        };
        if bound == 0 {
            // everything is hit
            if self.chosen.len() == self.k {
                return (self.sink)(&self.chosen);
            }
            return ControlFlow::Continue(());
        }
        if self.chosen.len() + bound > self.k || next == g.vertex_count() {
            return ControlFlow::Continue(());
        }
        let useful = g.incidence[next].iter().any(|&e| self.count[e] == 0);
        if useful {
            self.chosen.push(next);
            g.add(next, &mut self.count);
            let flow = self.visit(next + 1);
            g.remove(next, &mut self.count);
            self.chosen.pop();
            flow?;
        }
        self.visit(next + 1)
    }
}

struct TransversalSearch<'a, 's> {
    graph: &'a Hypergraph,
    count: Vec<u32>,
    candidate: Vec<bool>,
    chosen: Vec<usize>,
    sink: &'s mut dyn FnMut(&[usize]) -> ControlFlow<()>,
}

impl TransversalSearch<'_, '_> {
    fn visit(&mut self) -> ControlFlow<()> {
        let g = self.graph;
        let mut target: Option<(usize, usize)> = None;
        for (i, e) in g.edges.iter().enumerate() {
            if self.count[i] == 0 {
                let size = e.iter().filter(|&&v| self.candidate[v]).count();
                if target.is_none_or(|(s, _)| size < s) {
                    target = Some((size, i));
                }
            }
        }
        let Some((_, edge)) = target else {
            let mut out = self.chosen.clone();
            out.sort_unstable();
            return (self.sink)(&out);
        };
        let branch: Vec<usize> = g.edges[edge]
            .iter()
            .copied()
            .filter(|&v| self.candidate[v])
            .collect();
        for &v in &branch {
            self.candidate[v] = false;
        }
        let mut flow = ControlFlow::Continue(());
        for &v in &branch {
            g.add(v, &mut self.count);
            self.chosen.push(v);
            if self.every_vertex_critical() {
                flow = self.visit();
            }
            self.chosen.pop();
            g.remove(v, &mut self.count);
            self.candidate[v] = true;
            if flow.is_break() {
                break;
            }
        }
        for &v in &branch {
            self.candidate[v] = true;
        }
        flow
    }

    /// Each chosen vertex must be the only chosen cover of some edge.
    fn every_vertex_critical(&self) -> bool {
        self.chosen
            .iter()
            .all(|&u| self.graph.incidence[u].iter().any(|&e| self.count[e] == 1))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn collect_transversals(g: &Hypergraph) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        let _ = g.for_each_minimal_transversal(&mut |s| {
            out.push(s.to_vec());
            ControlFlow::Continue(())
        });
        out.sort();
        out
    }

    #[test]
    fn triangle() {
        let g = Hypergraph::new(&[vec![0, 1], vec![1, 2], vec![0, 2]]);
        assert_eq!(g.min_hitting_set().len(), 2);
        assert_eq!(
            collect_transversals(&g),
            vec![vec![0, 1], vec![0, 2], vec![1, 2]]
        );
    }

    #[test]
    fn empty_hypergraph() {
        let g = Hypergraph::new(&[]);
        assert!(g.min_hitting_set().is_empty());
        assert!(g.greedy_cover().is_empty());
        assert_eq!(collect_transversals(&g), vec![Vec::<usize>::new()]);
        let mut seen = 0;
        let _ = g.for_each_hitting_set_of_size(0, &mut |_| {
            seen += 1;
            ControlFlow::Continue(())
        });
        assert_eq!(seen, 1);
    }

    #[test]
    fn sized_enumeration_is_lexicographic() {
        // vertices renumbered: 10->0, 11->1, 12->2, 13->3
        let g = Hypergraph::new(&[vec![10, 11], vec![12, 13]]);
        let mut out = Vec::new();
        let _ = g.for_each_hitting_set_of_size(2, &mut |s| {
            out.push(g.to_vars(s));
            ControlFlow::Continue(())
        });
        assert_eq!(
            out,
            vec![vec![10, 12], vec![10, 13], vec![11, 12], vec![11, 13]]
        );
    }

    #[test]
    fn sink_can_stop_the_search() {
        let g = Hypergraph::new(&[vec![0, 1], vec![2, 3]]);
        let mut seen = 0;
        let flow = g.for_each_minimal_transversal(&mut |_| {
            seen += 1;
            ControlFlow::Break(())
        });
        assert!(flow.is_break());
        assert_eq!(seen, 1);
    }
}
