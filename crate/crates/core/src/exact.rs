//! Exact decision procedure for "`G` contains the r-th power of a tight
//! Hamilton cycle".
//!
//! The search fixes vertex 0 at position 0, fills positions `1, 2, ..` in
//! order and breaks the reflection symmetry by requiring the vertex at
//! position 1 to be smaller than the one at position `n − 1`. Every k-subset of
//! every cyclic window of positions is checked exactly once, at the moment its
//! last position is filled, so wrap-around windows are constrained as soon as
//! the final positions are placed.
//!
//! Pruning:
//! - the symmetry rule needs an unplaced vertex above the one at position 1;
//! - fail-first value ordering: candidates with fewer admissible successors go
//!   first, and a candidate with none is discarded;
//! - an independent set `I` of `G` can put at most `k − 1` vertices into any
//!   `h` consecutive positions, so `m` consecutive free positions hold at most
//!   `(k−1)·⌊m/h⌋ + min(k−1, m mod h)` vertices of `I`, and the whole cycle at
//!   most `⌊(k−1)n/h⌋`;
//! - for graphs (`k = 2`), a low-degree set `B` whose unplaced part cannot be
//!   split into few enough paths of `G[B]`: every maximal run of `B`-vertices
//!   in the order is such a path, and runs are separated by other vertices;
//! - a table of failed states keyed by the used set, the first
//!   `max(h−1, 2)` and the last `h−1` placed vertices (for `n <= 128`).

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::combin::for_each_subset;
use crate::error::{invalid, Result};
use crate::hypergraph::{KGraph, MAX_UNIFORMITY};
use crate::power::spans_power_cycle_unchecked;

/// Default node budget.
pub const DEFAULT_EXACT_BUDGET: u64 = 100_000_000;

/// Largest graph accepted by [`brute_force_oracle`].
pub const ORACLE_MAX_N: usize = 9;

/// Entries kept in the failed-state table before it stops growing.
const MEMO_CAPACITY: usize = 4_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum ExactOutcome {
    Found { order: Vec<usize>, nodes: u64 },
    NotFound { nodes: u64 },
    Timeout { nodes: u64 },
}

impl ExactOutcome {
    pub fn nodes(&self) -> u64 {
        match self {
            ExactOutcome::Found { nodes, .. } | ExactOutcome::NotFound { nodes } | ExactOutcome::Timeout { nodes } => {
                *nodes
            }
        }
    }

    pub fn is_found(&self) -> bool {
        matches!(self, ExactOutcome::Found { .. })
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
struct MemoKey {
    used: u128,
    head: Vec<u8>,
    tail: Vec<u8>,
}

struct Search<'a> {
    g: &'a KGraph,
    n: usize,
    k: usize,
    h: usize,
    /// `checks[i]`: k-sets of positions whose largest position is `i`, stored
    /// as the other `k − 1` positions.
    checks: Vec<Vec<Vec<usize>>>,
    independent: Vec<bool>,
    order: Vec<usize>,
    used: Vec<bool>,
    free_independent: usize,
    nodes: u64,
    budget: u64,
    memo: Option<HashSet<MemoKey>>,
    /// Adjacency masks and the run-bound set, for `k = 2` and `n <= 128`.
    adj: Vec<u128>,
    runs_set: u128,
    runs_excess: isize,
}

enum Step {
    Found,
    Fail,
    Timeout,
}

/// Bound on independent-set vertices in `m` consecutive positions.
fn window_bound(k: usize, h: usize, m: usize) -> usize {
    (k - 1) * (m / h) + (k - 1).min(m % h)
}

/// Maximum matching between an out-copy and an in-copy of `comp`, with an arc
/// `u → v` for every edge `uv`. Orienting each path of a linear forest gives
/// such a matching, so its size bounds the forest's edge count.
fn orientation_matching(adj: &[u128], comp: u128) -> usize {
    fn augment(adj: &[u128], comp: u128, u: usize, seen: &mut u128, owner: &mut [usize]) -> bool {
        let mut cand = adj[u] & comp & !*seen;
        while cand != 0 {
            let v = cand.trailing_zeros() as usize;
            cand &= cand - 1;
            *seen |= 1 << v;
            if owner[v] == usize::MAX || augment(adj, comp, owner[v], seen, owner) {
                owner[v] = u;
                return true;
            }
        }
        false
    }
    let mut owner = vec![usize::MAX; adj.len()];
    let mut size = 0;
    let mut rest = comp;
    while rest != 0 {
        let u = rest.trailing_zeros() as usize;
        rest &= rest - 1;
        let mut seen = 0u128;
        size += augment(adj, comp, u, &mut seen, &mut owner) as usize;
    }
    size
}

/// Lower bound on the number of vertex-disjoint paths of `G[set]` needed to
/// cover `set`: a component `C` has a linear forest with at most
/// `min(|C| − 1, ⌊Σ min(deg_C, 2) / 2⌋, orientation matching)` edges.
fn path_cover_bound(adj: &[u128], set: u128) -> usize {
    let mut left = set;
    let mut paths = 0;
    while left != 0 {
        let mut comp = 1u128 << left.trailing_zeros();
        let mut frontier = comp;
        while frontier != 0 {
            let v = frontier.trailing_zeros() as usize;
            frontier &= frontier - 1;
            let fresh = adj[v] & set & !comp;
            comp |= fresh;
            frontier |= fresh;
        }
        left &= !comp;
        let size = comp.count_ones() as usize;
        let mut ends = 0;
        let mut rest = comp;
        while rest != 0 {
            let v = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            ends += (adj[v] & comp).count_ones().min(2) as usize;
        }
        let mut forest = (size - 1).min(ends / 2);
        if forest > 0 {
            forest = forest.min(orientation_matching(adj, comp));
        }
        paths += size - forest;
    }
    paths
}

/// Among the sets of the `t` lowest-degree vertices, the one whose path-cover
/// bound most exceeds the number of other vertices.
fn tightest_low_degree_set(adj: &[u128]) -> (u128, isize) {
    let n = adj.len();
    let mut by_degree: Vec<usize> = (0..n).collect();
    by_degree.sort_by_key(|&v| (adj[v].count_ones(), v));
    let mut best = (0u128, isize::MIN);
    let mut set = 0u128;
    for (t, &v) in by_degree.iter().enumerate().take(n - 1) {
        set |= 1 << v;
        let excess = path_cover_bound(adj, set) as isize - (n - t - 1) as isize;
        if excess > best.1 {
            best = (set, excess);
        }
    }
    best
}

/// Greedy independent set (no edge inside), taking vertices by increasing degree.
pub fn greedy_independent_set(g: &KGraph) -> Vec<usize> {
    let n = g.n();
    let mut incident: Vec<Vec<&[usize]>> = vec![Vec::new(); n];
    for e in g.edges() {
        for &v in e {
            incident[v].push(e);
        }
    }
    let mut by_degree: Vec<usize> = (0..n).collect();
    by_degree.sort_by_key(|&v| (incident[v].len(), v));
    let mut inside = vec![false; n];
    let mut out = Vec::new();
    for v in by_degree {
        let blocked = incident[v].iter().any(|e| e.iter().all(|&x| x == v || inside[x]));
        if !blocked {
            inside[v] = true;
            out.push(v);
        }
    }
    out.sort_unstable();
    out
}

impl<'a> Search<'a> {
    fn new(g: &'a KGraph, r: usize, budget: u64, memo: bool) -> Self {
        let (n, k) = (g.n(), g.k());
        let h = k + r - 1;
        let mut sets = HashSet::new();
        let mut window = vec![0usize; h];
        for s in 0..n {
            for (j, w) in window.iter_mut().enumerate() {
                *w = (s + j) % n;
            }
            for_each_subset(&window, k, |sub| {
                let mut v = sub.to_vec();
                v.sort_unstable();
                sets.insert(v);
            });
        }
        let mut checks = vec![Vec::new(); n];
        let mut sets: Vec<Vec<usize>> = sets.into_iter().collect();
        sets.sort_unstable();
        for mut s in sets {
            let last = s.pop().unwrap();
            checks[last].push(s);
        }
        let mut independent = vec![false; n];
        let ind = greedy_independent_set(g);
        for &v in &ind {
            independent[v] = true;
        }
        let adj: Vec<u128> = if k == 2 && n <= 128 {
            let mut adj = vec![0u128; n];
            for e in g.edges() {
                adj[e[0]] |= 1 << e[1];
                adj[e[1]] |= 1 << e[0];
            }
            adj
        } else {
            Vec::new()
        };
        let (runs_set, runs_excess) = if adj.is_empty() {
            (0, isize::MIN)
        } else {
            tightest_low_degree_set(&adj)
        };
        Search {
            g,
            n,
            k,
            h,
            checks,
            free_independent: ind.len(),
            independent,
            order: Vec::with_capacity(n),
            used: vec![false; n],
            nodes: 0,
            budget,
            memo: (memo && n <= 128).then(HashSet::new),
            adj,
            runs_set,
            runs_excess,
        }
    }

    /// Whether `v` can go at position `i` given positions `0..i` are filled.
    fn admissible(&self, i: usize, v: usize) -> bool {
        if i == self.n - 1 && v < self.order[1] {
            return false;
        }
        let mut buf = [0usize; MAX_UNIFORMITY];
        let k = self.k;
        self.checks[i].iter().all(|others| {
            for (b, &p) in buf.iter_mut().zip(others) {
                *b = self.order[p];
            }
            buf[k - 1] = v;
            self.g.contains(&buf[..k])
        })
    }

    /// Graph-only checks on the unplaced vertices `U`. They fill the open
    /// segment between the last and the first placed vertex, so `G[U]` needs a
    /// Hamilton path whose ends attach to those two. Separately, the unplaced
    /// part of the run-bound set needs more paths than the segment separates.
    fn graph_bounds_fail(&self) -> bool {
        if self.adj.is_empty() || self.order.is_empty() {
            return false;
        }
        let mut placed = 0u128;
        for &v in &self.order {
            placed |= 1 << v;
        }
        let all = if self.n == 128 {
            u128::MAX
        } else {
            (1u128 << self.n) - 1
        };
        let free_all = all & !placed;
        if free_all == 0 {
            return false;
        }
        let (first, last) = (self.order[0], self.order[self.order.len() - 1]);
        let mut rest = free_all;
        while rest != 0 {
            let v = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            let attached = (self.adj[v] >> first & 1) + (self.adj[v] >> last & 1);
            if (self.adj[v] & free_all).count_ones() as u128 + attached < 2 {
                return true;
            }
        }
        if path_cover_bound(&self.adj, free_all) > 1 {
            return true;
        }
        let free = self.runs_set & free_all;
        let others = (self.n - self.order.len()) - free.count_ones() as usize;
        path_cover_bound(&self.adj, free) > others + 1
    }

    fn memo_key(&self) -> MemoKey {
        let mut used = 0u128;
        for &v in &self.order {
            used |= 1 << v;
        }
        let hl = (self.h - 1).max(2).min(self.order.len());
        let tl = (self.h - 1).min(self.order.len());
        MemoKey {
            used,
            head: self.order[..hl].iter().map(|&v| v as u8).collect(),
            tail: self.order[self.order.len() - tl..].iter().map(|&v| v as u8).collect(),
        }
    }

    fn place(&mut self, v: usize) {
        self.order.push(v);
        self.used[v] = true;
        if self.independent[v] {
            self.free_independent -= 1;
        }
    }

    fn unplace(&mut self) {
        let v = self.order.pop().unwrap();
        self.used[v] = false;
        if self.independent[v] {
            self.free_independent += 1;
        }
    }

    fn run(&mut self) -> Step {
        let i = self.order.len();
        if i == self.n {
            return Step::Found;
        }
        if self.free_independent > window_bound(self.k, self.h, self.n - i) {
            return Step::Fail;
        }
        // Position n − 1 still needs a vertex above the one at position 1.
        if i >= 2 && !(self.order[1] + 1..self.n).any(|w| !self.used[w]) {
            return Step::Fail;
        }
        if self.graph_bounds_fail() {
            return Step::Fail;
        }
        let key = if self.memo.is_some() && i >= self.h && i + 1 < self.n {
            let key = self.memo_key();
            if self.memo.as_ref().is_some_and(|m| m.contains(&key)) {
                return Step::Fail;
            }
            Some(key)
        } else {
            None
        };
        let mut cands: Vec<(usize, usize)> = Vec::new();
        for v in 0..self.n {
            if self.used[v] || !self.admissible(i, v) {
                continue;
            }
            // Position 1 needs a larger vertex left for position n − 1.
            if i == 1 && v == self.n - 1 {
                continue;
            }
            let successors = if i + 1 < self.n {
                self.place(v);
                let s = (0..self.n)
                    .filter(|&w| !self.used[w] && self.admissible(i + 1, w))
                    .count();
                self.unplace();
                if s == 0 {
                    continue;
                }
                s
            } else {
                0
            };
            cands.push((successors, v));
        }
        cands.sort_unstable();
        for (_, v) in cands {
            if self.nodes >= self.budget {
                return Step::Timeout;
            }
            self.nodes += 1;
            self.place(v);
            match self.run() {
                Step::Found => return Step::Found,
                Step::Timeout => {
                    self.unplace();
                    return Step::Timeout;
                }
                Step::Fail => self.unplace(),
            }
        }
        if let (Some(key), Some(memo)) = (key, self.memo.as_mut()) {
            if memo.len() < MEMO_CAPACITY {
                memo.insert(key);
            }
        }
        Step::Fail
    }
}

/// Decides whether `g` contains the r-th power of a tight Hamilton cycle.
pub fn contains_power_hamilton(g: &KGraph, r: usize, budget: u64) -> Result<ExactOutcome> {
    search(g, r, budget, true)
}

/// Same search without the failed-state table.
pub fn contains_power_hamilton_plain(g: &KGraph, r: usize, budget: u64) -> Result<ExactOutcome> {
    search(g, r, budget, false)
}

fn search(g: &KGraph, r: usize, budget: u64, memo: bool) -> Result<ExactOutcome> {
    if r < 1 {
        return Err(invalid("r must be at least 1"));
    }
    let h = g.k() + r - 1;
    let n = g.n();
    if n < 2 * h {
        return Err(invalid(format!("exact search needs n >= 2h = {}, got n = {n}", 2 * h)));
    }
    let mut s = Search::new(g, r, budget, memo);
    if s.free_independent > (g.k() - 1) * n / h || s.runs_excess > 0 {
        return Ok(ExactOutcome::NotFound { nodes: 0 });
    }
    s.place(0);
    s.nodes = 1;
    Ok(match s.run() {
        Step::Found => {
            debug_assert!(spans_power_cycle_unchecked(g, h, &s.order));
            ExactOutcome::Found {
                order: s.order,
                nodes: s.nodes,
            }
        }
        Step::Fail => ExactOutcome::NotFound { nodes: s.nodes },
        Step::Timeout => ExactOutcome::Timeout { nodes: s.nodes },
    })
}

/// Tests all `(n−1)!/2` cyclic orders with the full window predicate.
pub fn brute_force_oracle(g: &KGraph, r: usize) -> Result<bool> {
    let n = g.n();
    if n > ORACLE_MAX_N {
        return Err(invalid(format!(
            "brute force oracle is limited to n <= {ORACLE_MAX_N}, got {n}"
        )));
    }
    if r < 1 {
        return Err(invalid("r must be at least 1"));
    }
    let h = g.k() + r - 1;
    if n < h {
        return Err(invalid(format!("cyclic windows need n >= h = {h}, got n = {n}")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    Ok(permute(g, h, &mut order, 1))
}

fn permute(g: &KGraph, h: usize, order: &mut [usize], i: usize) -> bool {
    let n = order.len();
    if i == n {
        return (n < 3 || order[1] < order[n - 1]) && spans_power_cycle_unchecked(g, h, order);
    }
    for j in i..n {
        order.swap(i, j);
        if permute(g, h, order, i + 1) {
            return true;
        }
        order.swap(i, j);
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::power::{is_power_hamilton_cycle, power_cycle};

    #[test]
    fn complete_and_empty() {
        let g = KGraph::complete(3, 8).unwrap();
        let out = contains_power_hamilton(&g, 1, DEFAULT_EXACT_BUDGET).unwrap();
        match &out {
            ExactOutcome::Found { order, .. } => assert!(is_power_hamilton_cycle(&g, 1, order).unwrap()),
            other => panic!("{other:?}"),
        }
        assert!(brute_force_oracle(&g, 1).unwrap());
        let e = KGraph::empty(3, 8).unwrap();
        assert!(matches!(
            contains_power_hamilton(&e, 1, DEFAULT_EXACT_BUDGET).unwrap(),
            ExactOutcome::NotFound { .. }
        ));
        assert!(!brute_force_oracle(&e, 1).unwrap());
        assert!(contains_power_hamilton(&g, 3, 10).is_err());
        assert!(brute_force_oracle(&KGraph::complete(2, 10).unwrap(), 1).is_err());
    }

    #[test]
    fn path_cover_bounds() {
        let adj = |n: usize, edges: &[[usize; 2]]| {
            let mut a = vec![0u128; n];
            for &[x, y] in edges {
                a[x] |= 1 << y;
                a[y] |= 1 << x;
            }
            a
        };
        // A 4-leaf star needs 3 paths: the center has one arc in, one out.
        let star = adj(5, &[[0, 1], [0, 2], [0, 3], [0, 4]]);
        assert_eq!(path_cover_bound(&star, 0b11111), 3);
        assert_eq!(orientation_matching(&star, 0b11111), 2);
        let path = adj(4, &[[0, 1], [1, 2], [2, 3]]);
        assert_eq!(path_cover_bound(&path, 0b1111), 1);
        assert_eq!(path_cover_bound(&path, 0b1001), 2);
        assert_eq!(path_cover_bound(&path, 0), 0);
    }

    /// Two hubs joined to a large independent class: 5 runs, 2 separators.
    #[test]
    fn run_bound_rejects_without_search() {
        let mut edges = Vec::new();
        for hub in [0, 1] {
            for v in 2..7 {
                edges.push([hub, v]);
            }
        }
        edges.push([0, 1]);
        edges.push([2, 3]);
        let g = KGraph::new(2, 7, edges).unwrap();
        assert_eq!(
            contains_power_hamilton(&g, 1, 1000).unwrap(),
            ExactOutcome::NotFound { nodes: 0 }
        );
        assert!(!brute_force_oracle(&g, 1).unwrap());
    }

    #[test]
    fn broken_cycle() {
        let c5 = KGraph::new(2, 5, [[0, 1], [1, 2], [2, 3], [3, 4]]).unwrap();
        assert!(!contains_power_hamilton(&c5, 1, 1000).unwrap().is_found());
        assert!(!brute_force_oracle(&c5, 1).unwrap());
        let full = power_cycle(2, 1, 5).unwrap();
        assert!(contains_power_hamilton(&full, 1, 1000).unwrap().is_found());
    }

    #[test]
    fn shuffled_power_cycle_is_found() {
        let g = power_cycle(2, 2, 9).unwrap();
        let perm = [4, 7, 1, 0, 8, 2, 6, 3, 5];
        let relabelled = KGraph::new(2, 9, g.edges().map(|e| [perm[e[0]], perm[e[1]]])).unwrap();
        assert!(contains_power_hamilton(&relabelled, 2, 10_000).unwrap().is_found());
        assert!(brute_force_oracle(&relabelled, 2).unwrap());
    }

    #[test]
    fn timeout_reports_nodes() {
        let g = KGraph::complete(2, 12).unwrap();
        assert_eq!(
            contains_power_hamilton_plain(&g, 2, 3).unwrap(),
            ExactOutcome::Timeout { nodes: 3 }
        );
    }

    #[test]
    fn independent_sets() {
        let g = crate::hosts::split_host(2, 30, 0.3).unwrap();
        assert_eq!(greedy_independent_set(&g), (9..30).collect::<Vec<_>>());
        assert_eq!(
            contains_power_hamilton(&g, 1, 100).unwrap(),
            ExactOutcome::NotFound { nodes: 0 }
        );
        assert_eq!(window_bound(3, 4, 9), 2 * 2 + 1);
    }
}
