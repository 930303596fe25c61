//! Labelled copies of a small pattern `F` in a host `G`: counting by
//! backtracking, family checks, the "every large induced subgraph contains
//! `F`" property and overlapping pairs of copies.

use std::collections::HashMap;
use std::ops::ControlFlow;

use rand::seq::index::sample;
use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::combin::{binomial, next_combination};
use crate::error::{invalid, Error, Result};
use crate::hypergraph::KGraph;

/// Default cap on partial assignments explored by [`count_labelled_copies`].
pub const DEFAULT_COUNT_BUDGET: u64 = 10_000_000;

/// Largest pattern order accepted by the counter.
pub const MAX_PATTERN_VERTICES: usize = 12;

/// Subset counts up to this size are checked exhaustively.
const EXHAUSTIVE_SUBSET_LIMIT: u128 = 100_000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CopyCountReport {
    pub labelled_count: u64,
    /// Unordered pairs of distinct labelled copies whose vertex sets meet.
    pub overlapping_pairs: u128,
    /// Budget hit; both counts are then lower bounds.
    pub truncated: bool,
    pub nodes: u64,
}

/// Backtracking embedder of `F` into `G` restricted to a set of host vertices.
pub(crate) struct Embedder<'a> {
    host: &'a KGraph,
    /// Pattern vertices in placement order.
    order: Vec<usize>,
    /// For each placement step, the pattern edges completed at that step,
    /// given as placement positions.
    checks: Vec<Vec<Vec<usize>>>,
    candidates: Vec<usize>,
    pub(crate) nodes: u64,
    budget: u64,
}

impl<'a> Embedder<'a> {
    pub(crate) fn new(pattern: &KGraph, host: &'a KGraph, candidates: Vec<usize>, budget: u64) -> Result<Self> {
        if pattern.k() != host.k() {
            return Err(Error::Mismatch(format!(
                "pattern is a {}-graph, host a {}-graph",
                pattern.k(),
                host.k()
            )));
        }
        let v = pattern.n();
        let edges: Vec<&[usize]> = pattern.edges().collect();
        let mut degree = vec![0usize; v];
        for e in &edges {
            for &x in *e {
                degree[x] += 1;
            }
        }
        // Greedy order: most edges into the placed set, then highest degree.
        let mut placed = vec![false; v];
        let mut order = Vec::with_capacity(v);
        for _ in 0..v {
            let score = |x: usize| {
                let back = edges
                    .iter()
                    .filter(|e| e.contains(&x) && e.iter().filter(|&&y| y != x).all(|&y| placed[y]))
                    .count();
                let touch = edges
                    .iter()
                    .filter(|e| e.contains(&x) && e.iter().any(|&y| placed[y]))
                    .count();
                (back, touch, degree[x], std::cmp::Reverse(x))
            };
            let next = (0..v).filter(|&x| !placed[x]).max_by_key(|&x| score(x)).unwrap();
            placed[next] = true;
            order.push(next);
        }
        let mut pos = vec![0usize; v];
        for (i, &x) in order.iter().enumerate() {
            pos[x] = i;
        }
        let mut checks = vec![Vec::new(); v];
        for e in &edges {
            let ps: Vec<usize> = e.iter().map(|&x| pos[x]).collect();
            let last = *ps.iter().max().unwrap();
            checks[last].push(ps);
        }
        Ok(Embedder {
            host,
            order,
            checks,
            candidates,
            nodes: 0,
            budget,
        })
    }

    /// Visits every injection; `visit` receives the image indexed by pattern
    /// vertex. Returns `Break(true)` on budget exhaustion, `Break(false)` if the
    /// visitor stopped the search.
    pub(crate) fn run<V: FnMut(&[usize]) -> ControlFlow<()>>(&mut self, visit: &mut V) -> ControlFlow<bool> {
        let v = self.order.len();
        let mut image = vec![usize::MAX; v];
        let mut assign = vec![0usize; v];
        let mut used = vec![false; self.host.n()];
        self.step(0, &mut assign, &mut image, &mut used, visit)
    }

    fn step<V: FnMut(&[usize]) -> ControlFlow<()>>(
        &mut self,
        i: usize,
        assign: &mut [usize],
        image: &mut [usize],
        used: &mut [bool],
        visit: &mut V,
    ) -> ControlFlow<bool> {
        if i == assign.len() {
            return match visit(image) {
                ControlFlow::Continue(()) => ControlFlow::Continue(()),
                ControlFlow::Break(()) => ControlFlow::Break(false),
            };
        }
        let mut buf = [0usize; crate::hypergraph::MAX_UNIFORMITY];
        let k = self.host.k();
        for ci in 0..self.candidates.len() {
            let c = self.candidates[ci];
            if used[c] {
                continue;
            }
            if self.nodes >= self.budget {
                return ControlFlow::Break(true);
            }
            self.nodes += 1;
            assign[i] = c;
            let ok = self.checks[i].iter().all(|ps| {
                for (b, &p) in buf[..k].iter_mut().zip(ps) {
                    *b = assign[p];
                }
                self.host.contains(&buf[..k])
            });
            if !ok {
                continue;
            }
            used[c] = true;
            image[self.order[i]] = c;
            let flow = self.step(i + 1, assign, image, used, visit);
            used[c] = false;
            image[self.order[i]] = usize::MAX;
            flow?;
        }
        ControlFlow::Continue(())
    }
}

fn check_pattern(pattern: &KGraph, host: &KGraph) -> Result<()> {
    if pattern.n() > MAX_PATTERN_VERTICES {
        return Err(invalid(format!(
            "pattern has {} vertices; at most {MAX_PATTERN_VERTICES} supported",
            pattern.n()
        )));
    }
    if pattern.k() != host.k() {
        return Err(Error::Mismatch(format!(
            "pattern is a {}-graph, host a {}-graph",
            pattern.k(),
            host.k()
        )));
    }
    Ok(())
}

/// Counts injections `V(F) → V(G)` mapping edges to edges, together with the
/// number of unordered overlapping pairs among the copies found.
pub fn count_labelled_copies(pattern: &KGraph, host: &KGraph, budget: u64) -> Result<CopyCountReport> {
    check_pattern(pattern, host)?;
    if budget == 0 {
        return Err(invalid("budget must be positive"));
    }
    let mut by_set: HashMap<Vec<usize>, u64> = HashMap::new();
    let mut count = 0u64;
    let mut e = Embedder::new(pattern, host, (0..host.n()).collect(), budget)?;
    let flow = if pattern.n() > host.n() {
        ControlFlow::Continue(())
    } else {
        e.run(&mut |img: &[usize]| {
            count += 1;
            let mut s = img.to_vec();
            s.sort_unstable();
            *by_set.entry(s).or_insert(0) += 1;
            ControlFlow::Continue(())
        })
    };
    let groups: Vec<(Vec<usize>, u64)> = by_set.into_iter().collect();
    Ok(CopyCountReport {
        labelled_count: count,
        overlapping_pairs: overlapping_pairs_grouped(&groups),
        truncated: flow == ControlFlow::Break(true),
        nodes: e.nodes,
    })
}

/// Whether `G[W]` contains a copy of `F`, searching only inside `vertices`.
pub fn contains_copy_within(pattern: &KGraph, host: &KGraph, vertices: &[usize]) -> Result<bool> {
    check_pattern(pattern, host)?;
    if vertices.len() < pattern.n() {
        return Ok(false);
    }
    let mut found = false;
    let mut e = Embedder::new(pattern, host, vertices.to_vec(), u64::MAX)?;
    let _ = e.run(&mut |_: &[usize]| {
        found = true;
        ControlFlow::Break(())
    });
    Ok(found)
}

/// Members of `family` whose identity labelling spans `F` in `G`, i.e. with
/// `tuple[e_1] .. tuple[e_k]` an edge of `G` for every edge `e` of `F`.
pub fn count_in_family(pattern: &KGraph, host: &KGraph, family: &[Vec<usize>]) -> Result<u64> {
    check_pattern(pattern, host)?;
    let edges: Vec<&[usize]> = pattern.edges().collect();
    let mut hits = 0u64;
    let mut buf = vec![0usize; pattern.k()];
    for t in family {
        if t.len() != pattern.n() {
            return Err(Error::Arity {
                edge: t.clone(),
                expected: pattern.n(),
                found: t.len(),
            });
        }
        crate::hypergraph::canonical_set(t, host.n())?;
        let spans = edges.iter().all(|e| {
            for (b, &x) in buf.iter_mut().zip(*e) {
                *b = t[x];
            }
            host.contains(&buf)
        });
        hits += spans as u64;
    }
    Ok(hits)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InducedReport {
    /// Sampled subsets whose induced subgraph has no copy of `F`.
    pub failures: u64,
    pub sampled: u64,
    pub exhaustive: bool,
}

/// Checks that `G[W]` contains `F` for vertex sets `W` of size `⌈γ n⌉`: every
/// such `W` when there are at most `10^5` of them, otherwise `sample_count`
/// uniform ones.
pub fn induced_contains_everywhere<R: RngCore + ?Sized>(
    pattern: &KGraph,
    host: &KGraph,
    gamma: f64,
    sample_count: u64,
    rng: &mut R,
) -> Result<InducedReport> {
    check_pattern(pattern, host)?;
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(invalid(format!("γ must lie in (0, 1], got {gamma}")));
    }
    let n = host.n();
    let s = ((gamma * n as f64) - 1e-9).ceil() as usize;
    if s < pattern.n() {
        return Err(invalid(format!(
            "⌈γn⌉ = {s} is smaller than the pattern order {}",
            pattern.n()
        )));
    }
    let mut failures = 0u64;
    let total = binomial(n as u64, s as u64);
    if total <= EXHAUSTIVE_SUBSET_LIMIT {
        let mut w: Vec<usize> = (0..s).collect();
        loop {
            failures += !contains_copy_within(pattern, host, &w)? as u64;
            if !next_combination(&mut w, n) {
                break;
            }
        }
        return Ok(InducedReport {
            failures,
            sampled: total as u64,
            exhaustive: true,
        });
    }
    for _ in 0..sample_count {
        let mut w = sample(rng, n, s).into_vec();
        w.sort_unstable();
        failures += !contains_copy_within(pattern, host, &w)? as u64;
    }
    Ok(InducedReport {
        failures,
        sampled: sample_count,
        exhaustive: false,
    })
}

/// Unordered pairs of list entries whose vertex sets intersect. Entries are
/// grouped by vertex set, and a pair of distinct sets is counted once, in the
/// bucket of their smallest shared vertex.
pub fn overlapping_pairs(copies: &[Vec<usize>]) -> u128 {
    let mut by_set: HashMap<Vec<usize>, u64> = HashMap::new();
    for c in copies {
        let mut s = c.clone();
        s.sort_unstable();
        s.dedup();
        *by_set.entry(s).or_insert(0) += 1;
    }
    overlapping_pairs_grouped(&by_set.into_iter().collect::<Vec<_>>())
}

fn smallest_common(a: &[usize], b: &[usize]) -> Option<usize> {
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => return Some(a[i]),
        }
    }
    None
}

fn overlapping_pairs_grouped(groups: &[(Vec<usize>, u64)]) -> u128 {
    let mut total = 0u128;
    let mut buckets: HashMap<usize, Vec<usize>> = HashMap::new();
    for (gi, (set, mult)) in groups.iter().enumerate() {
        if !set.is_empty() {
            total += (*mult as u128) * (*mult as u128 - 1) / 2;
        }
        for &v in set {
            buckets.entry(v).or_default().push(gi);
        }
    }
    for (&v, members) in &buckets {
        for (a, &i) in members.iter().enumerate() {
            for &j in &members[a + 1..] {
                if smallest_common(&groups[i].0, &groups[j].0) == Some(v) {
                    total += groups[i].1 as u128 * groups[j].1 as u128;
                }
            }
        }
    }
    total
}

/// Scale `4 b² n^{2b−1} p^{2a}` for overlapping pairs of copies of a pattern
/// with `b` vertices and `a` edges.
pub fn overlap_scale(b: usize, a: usize, n: f64, p: f64) -> f64 {
    4.0 * (b * b) as f64 * n.powi(2 * b as i32 - 1) * p.powi(2 * a as i32)
}
