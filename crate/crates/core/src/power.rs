//! r-th powers of tight paths and cycles.
//!
//! In `P_m^{k,r}` the vertices `0..m` are in natural order and every window of
//! `h = k + r - 1` consecutive vertices spans a complete k-graph. The cycle
//! version uses cyclic windows. Recognition predicates test containment: extra
//! host edges never matter.

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::combin::{all_subsets, binomial, for_each_subset};
use crate::error::{invalid, Error, Result};
use crate::hypergraph::{canonical_set, KGraph};

/// Derived constants of an instance: `h = k + r − 1`, `c = 1 / C(k+r−2, k−1)`
/// and `t = g(2h)`, the edge count of `P_{2h}^{k,r}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Parameters {
    pub k: usize,
    pub r: usize,
    pub h: usize,
    pub t: u64,
}

impl Parameters {
    pub fn new(k: usize, r: usize) -> Result<Self> {
        if !(2..=crate::hypergraph::MAX_UNIFORMITY).contains(&k) || r < 1 {
            return Err(invalid(format!("need k >= 2 and r >= 1 (got k = {k}, r = {r})")));
        }
        let h = k + r - 1;
        Ok(Parameters {
            k,
            r,
            h,
            t: g_edges(k, r, 2 * h)?,
        })
    }

    /// Whether `k + r >= 4`, the range covered by the perturbed-model theorem.
    /// `(k, r) = (2, 1)`, plain Hamilton cycles in graphs, is accepted too.
    pub fn in_theorem_range(&self) -> bool {
        self.k + self.r >= 4
    }

    /// The exponent `c = 1 / C(k+r−2, k−1)`.
    pub fn c(&self) -> Ratio<u64> {
        Ratio::new(1, self.window_degree())
    }

    pub fn c_f64(&self) -> f64 {
        1.0 / self.window_degree() as f64
    }

    /// `C(h−1, k−1)`: edges gained per extra vertex of a power path.
    pub fn window_degree(&self) -> u64 {
        binomial((self.h - 1) as u64, (self.k - 1) as u64) as u64
    }

    pub fn g(&self, b: usize) -> Result<u64> {
        g_edges(self.k, self.r, b)
    }
}

/// Edge count of `P_b^{k,r}`: `C(h, k) + (b − h)·C(h−1, k−1)` for `b >= h`.
pub fn g_edges(k: usize, r: usize, b: usize) -> Result<u64> {
    if k < 2 || r < 1 {
        return Err(invalid(format!("need k >= 2 and r >= 1 (got k = {k}, r = {r})")));
    }
    let h = k + r - 1;
    if b < h {
        return Err(invalid(format!("g(b) is defined for b >= h = {h}, got b = {b}")));
    }
    let head = binomial(h as u64, k as u64) as u64;
    let step = binomial((h - 1) as u64, (k - 1) as u64) as u64;
    Ok(head + (b - h) as u64 * step)
}

/// Collects all k-subsets of each listed window of vertex ids.
fn window_edges<I>(k: usize, windows: I) -> Vec<Vec<usize>>
where
    I: IntoIterator<Item = Vec<usize>>,
{
    let mut out = Vec::new();
    for w in windows {
        for_each_subset(&w, k, |s| {
            let mut e = s.to_vec();
            e.sort_unstable();
            out.push(e);
        });
    }
    out
}

/// `P_m^{k,r}` on vertices `0..m` in natural order.
pub fn power_path(k: usize, r: usize, m: usize) -> Result<KGraph> {
    let h = k + r - 1;
    if k < 2 || r < 1 {
        return Err(invalid(format!("need k >= 2 and r >= 1 (got k = {k}, r = {r})")));
    }
    if m < h {
        return Err(invalid(format!("power path needs m >= h = {h}, got m = {m}")));
    }
    let windows = (0..=m - h).map(|i| (i..i + h).collect::<Vec<_>>());
    Ok(KGraph::from_canonical_edges(k, m, window_edges(k, windows)))
}

/// `C_m^{k,r}` on vertices `0..m` in natural cyclic order; requires `m >= 2h`.
pub fn power_cycle(k: usize, r: usize, m: usize) -> Result<KGraph> {
    let h = k + r - 1;
    if k < 2 || r < 1 {
        return Err(invalid(format!("need k >= 2 and r >= 1 (got k = {k}, r = {r})")));
    }
    if m < 2 * h {
        return Err(invalid(format!("power cycle needs m >= 2h = {}, got m = {m}", 2 * h)));
    }
    let windows = (0..m).map(|i| (0..h).map(|j| (i + j) % m).collect::<Vec<_>>());
    Ok(KGraph::from_canonical_edges(k, m, window_edges(k, windows)))
}

/// Whether `tuple` spans a labelled copy of `P_{|tuple|}^{k,r}` in `g`: every
/// window of `h` consecutive entries spans a clique.
pub fn is_labelled_power_path(g: &KGraph, r: usize, tuple: &[usize]) -> Result<bool> {
    let h = g.k() + r - 1;
    if tuple.len() < h {
        return Err(invalid(format!(
            "tuple of length {} is shorter than h = {h}",
            tuple.len()
        )));
    }
    canonical_set(tuple, g.n())?;
    Ok(spans_power_path_unchecked(g, h, tuple))
}

/// Window test without validation. Each k-subset is checked once: by its last
/// position, inside the window ending there.
pub(crate) fn spans_power_path_unchecked(g: &KGraph, h: usize, tuple: &[usize]) -> bool {
    let k = g.k();
    let mut scratch = Vec::with_capacity(k);
    for i in 0..tuple.len() {
        let lo = (i + 1).saturating_sub(h);
        if i - lo + 1 < k {
            continue;
        }
        let earlier = &tuple[lo..i];
        let ok = all_subsets(earlier, k - 1, |s| {
            scratch.clear();
            scratch.extend_from_slice(s);
            scratch.push(tuple[i]);
            g.contains(&scratch)
        });
        if !ok {
            return false;
        }
    }
    true
}

/// Whether `order` (a permutation of `0..n`) is the cyclic vertex order of an
/// r-th power of a tight Hamilton cycle contained in `g`.
pub fn is_power_hamilton_cycle(g: &KGraph, r: usize, order: &[usize]) -> Result<bool> {
    let n = g.n();
    if order.len() != n {
        return Err(invalid(format!(
            "order has {} entries, graph has {n} vertices",
            order.len()
        )));
    }
    canonical_set(order, n).map_err(|e| match e {
        Error::RepeatedVertex { vertex, .. } => {
            invalid(format!("order is not a permutation: vertex {vertex} repeated"))
        }
        other => other,
    })?;
    let h = g.k() + r - 1;
    if n < h {
        return Err(invalid(format!("cyclic windows need n >= h = {h}, got n = {n}")));
    }
    Ok(spans_power_cycle_unchecked(g, h, order))
}

/// Cyclic window test on a sequence of distinct vertices (not necessarily spanning).
pub(crate) fn spans_power_cycle_unchecked(g: &KGraph, h: usize, order: &[usize]) -> bool {
    let m = order.len();
    let mut window = vec![0usize; h];
    for i in 0..m {
        for (j, w) in window.iter_mut().enumerate() {
            *w = order[(i + j) % m];
        }
        if !all_subsets(&window, g.k(), |s| g.contains(s)) {
            return false;
        }
    }
    true
}

/// An (r,k)-path embedded in some host, with its vertex order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PowerPathInstance {
    pub params: Parameters,
    pub order: Vec<usize>,
}

impl PowerPathInstance {
    pub fn new(params: Parameters, order: Vec<usize>) -> Result<Self> {
        if order.len() < params.h {
            return Err(invalid(format!(
                "path of order {} is shorter than h = {}",
                order.len(),
                params.h
            )));
        }
        Ok(PowerPathInstance { params, order })
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// First `h` vertices in path order.
    pub fn start(&self) -> &[usize] {
        &self.order[..self.params.h]
    }

    /// Last `h` vertices in path order.
    pub fn end(&self) -> &[usize] {
        &self.order[self.order.len() - self.params.h..]
    }

    pub fn reversed(&self) -> Self {
        let mut order = self.order.clone();
        order.reverse();
        PowerPathInstance {
            params: self.params,
            order,
        }
    }

    pub fn verify(&self, g: &KGraph) -> Result<bool> {
        is_labelled_power_path(g, self.params.r, &self.order)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent edge count: test every k-subset of 0..m for having span < h.
    fn brute_path_edges(k: usize, r: usize, m: usize) -> usize {
        let h = k + r - 1;
        let mut count = 0;
        for_each_subset(&(0..m).collect::<Vec<_>>(), k, |s| {
            if s[k - 1] - s[0] < h {
                count += 1;
            }
        });
        count
    }

    #[test]
    fn g_matches_known_values() {
        assert_eq!(g_edges(3, 2, 4).unwrap(), 4);
        assert_eq!(g_edges(3, 2, 5).unwrap(), 7);
        assert_eq!(g_edges(2, 2, 6).unwrap(), 9);
        assert_eq!(Parameters::new(2, 2).unwrap().t, 9);
        assert!(g_edges(3, 2, 3).is_err());
        for b in 2..=10 {
            assert_eq!(g_edges(2, 1, b).unwrap(), (b - 1) as u64);
            assert_eq!(brute_path_edges(2, 1, b), b - 1);
        }
        assert_eq!(brute_path_edges(2, 2, 6), 9);
    }

    #[test]
    fn g_agrees_with_fractional_display() {
        for k in 2..=4usize {
            for r in 1..=3usize {
                if k + r < 4 {
                    continue;
                }
                let h = (k + r - 1) as f64;
                let step = binomial((k + r - 2) as u64, (k - 1) as u64) as f64;
                for b in k + r - 1..=14 {
                    let display = (b as f64 - (k as f64 - 1.0) * h / k as f64) * step;
                    assert!((display - g_edges(k, r, b).unwrap() as f64).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn paths() {
        let p = power_path(2, 1, 4).unwrap();
        assert_eq!(p, KGraph::new(2, 4, [[0, 1], [1, 2], [2, 3]]).unwrap());
        assert_eq!(power_path(3, 2, 5).unwrap().edge_count(), 7);
        let sq = power_path(2, 2, 5).unwrap();
        let expect = KGraph::new(2, 5, [[0, 1], [1, 2], [2, 3], [3, 4], [0, 2], [1, 3], [2, 4]]).unwrap();
        assert_eq!(sq, expect);
        assert!(power_path(3, 2, 3).is_err());
    }

    #[test]
    fn cycles() {
        let c5 = power_cycle(2, 1, 5).unwrap();
        assert_eq!(c5.edge_count(), 5);
        assert!(c5.has_edge(&[0, 4]).unwrap());
        assert!(power_cycle(2, 2, 5).is_err());
        let tight6 = power_cycle(3, 1, 6).unwrap();
        // cyclic windows {i, i+1, i+2}
        let expect: Vec<Vec<usize>> = (0..6)
            .map(|i| {
                let mut e = vec![i, (i + 1) % 6, (i + 2) % 6];
                e.sort();
                e
            })
            .collect();
        assert_eq!(tight6, KGraph::new(3, 6, expect).unwrap());
    }

    #[test]
    fn recognition() {
        let g = power_path(3, 2, 6).unwrap();
        let id: Vec<usize> = (0..6).collect();
        assert!(is_labelled_power_path(&g, 2, &id).unwrap());
        let k7 = KGraph::complete(3, 7).unwrap();
        assert!(is_labelled_power_path(&k7, 2, &[6, 2, 4, 0, 1]).unwrap());
        let sq = power_path(2, 2, 6).unwrap();
        let pruned = KGraph::new(2, 6, sq.edges().filter(|e| *e != [3, 4]).map(|e| e.to_vec())).unwrap();
        assert!(!is_labelled_power_path(&pruned, 2, &id).unwrap());
        assert!(is_labelled_power_path(&g, 2, &[0, 1, 2]).is_err());
    }

    #[test]
    fn hamilton_cycles() {
        let k5 = KGraph::complete(2, 5).unwrap();
        assert!(is_power_hamilton_cycle(&k5, 2, &[0, 1, 2, 3, 4]).unwrap());
        let c5 = power_cycle(2, 1, 5).unwrap();
        assert!(is_power_hamilton_cycle(&c5, 1, &[0, 1, 2, 3, 4]).unwrap());
        assert!(!is_power_hamilton_cycle(&c5, 1, &[0, 2, 4, 1, 3]).unwrap());
        let pc = power_cycle(3, 2, 8).unwrap();
        assert!(is_power_hamilton_cycle(&pc, 2, &(0..8).collect::<Vec<_>>()).unwrap());
        assert!(is_power_hamilton_cycle(&c5, 1, &[0, 1, 2, 3, 3]).is_err());
        assert!(is_power_hamilton_cycle(&c5, 1, &[0, 1, 2, 3]).is_err());
    }

    #[test]
    fn c_values() {
        assert_eq!(Parameters::new(2, 1).unwrap().c(), Ratio::new(1, 1));
        assert_eq!(Parameters::new(2, 2).unwrap().c(), Ratio::new(1, 2));
        assert_eq!(Parameters::new(3, 2).unwrap().c(), Ratio::new(1, 3));
        assert!(!Parameters::new(2, 1).unwrap().in_theorem_range());
        assert!(Parameters::new(3, 1).unwrap().in_theorem_range());
        assert!(Parameters::new(3, 0).is_err());
        assert!(Parameters::new(1, 3).is_err());
    }
}
