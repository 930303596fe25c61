//! Canonical k-uniform hypergraphs.
//!
//! Vertices are the dense integers `0..n`. Every edge is stored as a strictly
//! increasing k-tuple; the edge list is sorted lexicographically and indexed by
//! colex rank, either in a dense bitset (small `C(n, k)`) or in a hash set.
//! Graphs are immutable once built: unions and induced subgraphs return new
//! values, so a `KGraph` can be shared read-only across threads.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::hash::{BuildHasherDefault, Hasher};
use std::path::Path;

use crate::combin::{binomial, BinomialTable};
use crate::error::{invalid, Error, Result};

/// Largest uniformity supported by the fixed-size scratch buffers.
pub const MAX_UNIFORMITY: usize = 16;

/// Dense bitset index is used while `C(n, k)` stays below this many bits.
const DENSE_INDEX_LIMIT: u128 = 1 << 25;

#[derive(Default)]
struct RankHasher(u64);

impl Hasher for RankHasher {
    fn finish(&self) -> u64 {
        self.0
    }

    fn write(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.0 = (self.0.rotate_left(5) ^ b as u64).wrapping_mul(0x51_7c_c1_b7_27_22_0a_95);
        }
    }

    fn write_u128(&mut self, v: u128) {
        let folded = (v as u64) ^ ((v >> 64) as u64).rotate_left(29);
        self.0 = (folded ^ (folded >> 31)).wrapping_mul(0x9e37_79b9_7f4a_7c15);
    }
}

type RankSet = HashSet<u128, BuildHasherDefault<RankHasher>>;

#[derive(Clone, Debug)]
enum EdgeIndex {
    Dense(Vec<u64>),
    Hashed(RankSet),
}

/// A k-uniform hypergraph on vertices `0..n`.
#[derive(Clone, Debug)]
pub struct KGraph {
    k: usize,
    n: usize,
    /// Flat, stride `k`, lexicographically sorted.
    edges: Vec<usize>,
    ranks: BinomialTable,
    index: EdgeIndex,
}

impl PartialEq for KGraph {
    fn eq(&self, other: &Self) -> bool {
        self.k == other.k && self.n == other.n && self.edges == other.edges
    }
}

impl Eq for KGraph {}

impl KGraph {
    /// Builds a canonical graph. Edges may be listed in any vertex order and
    /// repeated; repeats collapse.
    pub fn new<I, E>(k: usize, n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = E>,
        E: AsRef<[usize]>,
    {
        if !(2..=MAX_UNIFORMITY).contains(&k) {
            return Err(invalid(format!("uniformity k = {k} outside 2..={MAX_UNIFORMITY}")));
        }
        let mut canon: Vec<Vec<usize>> = Vec::new();
        for e in edges {
            let e = e.as_ref();
            canon.push(canonical_edge(e, k, n)?);
        }
        canon.sort_unstable();
        canon.dedup();
        Ok(Self::from_sorted_unique(k, n, canon.into_iter().flatten().collect()))
    }

    /// The empty k-graph on `n` vertices.
    pub fn empty(k: usize, n: usize) -> Result<Self> {
        Self::new(k, n, std::iter::empty::<Vec<usize>>())
    }

    /// The complete k-graph `K_n^(k)`.
    pub fn complete(k: usize, n: usize) -> Result<Self> {
        if !(2..=MAX_UNIFORMITY).contains(&k) {
            return Err(invalid(format!("uniformity k = {k} outside 2..={MAX_UNIFORMITY}")));
        }
        let mut flat = Vec::new();
        if n >= k {
            let mut idx: Vec<usize> = (0..k).collect();
            loop {
                flat.extend_from_slice(&idx);
                if !crate::combin::next_combination(&mut idx, n) {
                    break;
                }
            }
        }
        Ok(Self::from_sorted_unique(k, n, flat))
    }

    /// `flat` must already be canonical: sorted edges, sorted tuples, no repeats.
    pub(crate) fn from_sorted_unique(k: usize, n: usize, flat: Vec<usize>) -> Self {
        let ranks = BinomialTable::new(n, k);
        let total = binomial(n as u64, k as u64);
        let index = if total <= DENSE_INDEX_LIMIT {
            let mut bits = vec![0u64; (total as usize).div_ceil(64).max(1)];
            for e in flat.chunks_exact(k) {
                let r = ranks.rank(e) as usize;
                bits[r / 64] |= 1 << (r % 64);
            }
            EdgeIndex::Dense(bits)
        } else {
            EdgeIndex::Hashed(flat.chunks_exact(k).map(|e| ranks.rank(e)).collect())
        };
        KGraph {
            k,
            n,
            edges: flat,
            ranks,
            index,
        }
    }

    /// Builds from an unsorted list of canonical edges (each sorted), deduplicating.
    pub(crate) fn from_canonical_edges(k: usize, n: usize, mut edges: Vec<Vec<usize>>) -> Self {
        edges.sort_unstable();
        edges.dedup();
        Self::from_sorted_unique(k, n, edges.into_iter().flatten().collect())
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len() / self.k
    }

    /// Edges in lexicographic order, each a sorted slice.
    pub fn edges(&self) -> impl ExactSizeIterator<Item = &[usize]> + '_ {
        self.edges.chunks_exact(self.k)
    }

    #[inline]
    fn contains_rank(&self, r: u128) -> bool {
        match &self.index {
            EdgeIndex::Dense(bits) => {
                let r = r as usize;
                bits[r / 64] >> (r % 64) & 1 == 1
            }
            EdgeIndex::Hashed(set) => set.contains(&r),
        }
    }

    /// Membership for a strictly increasing k-tuple of in-range vertices.
    #[inline]
    pub fn contains_sorted(&self, sorted: &[usize]) -> bool {
        debug_assert_eq!(sorted.len(), self.k);
        self.contains_rank(self.ranks.rank(sorted))
    }

    /// Membership for distinct in-range vertices in any order. No validation;
    /// this is the inner-loop query used by the search code.
    #[inline]
    pub fn contains(&self, set: &[usize]) -> bool {
        let mut buf = [0usize; MAX_UNIFORMITY];
        let buf = &mut buf[..set.len()];
        buf.copy_from_slice(set);
        insertion_sort(buf);
        self.contains_sorted(buf)
    }

    /// Validated membership query.
    pub fn has_edge(&self, set: &[usize]) -> Result<bool> {
        let canon = canonical_edge(set, self.k, self.n)?;
        Ok(self.contains_sorted(&canon))
    }

    /// The vertices `v` outside `set` with `set ∪ {v}` an edge.
    pub fn neighborhood(&self, set: &[usize]) -> Result<Vec<usize>> {
        let mut canon = canonical_set(set, self.n)?;
        if canon.len() + 1 != self.k {
            return Err(Error::Arity {
                edge: set.to_vec(),
                expected: self.k - 1,
                found: set.len(),
            });
        }
        let mut out = Vec::new();
        canon.push(0);
        for v in 0..self.n {
            if set.contains(&v) {
                continue;
            }
            let last = canon.len() - 1;
            canon[last] = v;
            if self.contains(&canon) {
                out.push(v);
            }
        }
        Ok(out)
    }

    /// Codegree of a (k−1)-set.
    pub fn codegree(&self, set: &[usize]) -> Result<usize> {
        Ok(self.neighborhood(set)?.len())
    }

    /// Minimum codegree over all (k−1)-subsets of the vertex set.
    pub fn min_codegree(&self) -> Result<usize> {
        if self.n < self.k {
            return Err(invalid(format!(
                "minimum codegree needs n >= k (n = {}, k = {})",
                self.n, self.k
            )));
        }
        let d = self.k - 1;
        let total = binomial(self.n as u64, d as u64);
        // Each edge contributes one to each of its k (k−1)-subsets.
        let mut counts: std::collections::HashMap<u128, usize, BuildHasherDefault<RankHasher>> = Default::default();
        let mut sub = vec![0usize; d];
        for e in self.edges() {
            for skip in 0..self.k {
                let mut j = 0;
                for (i, &v) in e.iter().enumerate() {
                    if i != skip {
                        sub[j] = v;
                        j += 1;
                    }
                }
                *counts.entry(self.ranks.rank(&sub)).or_insert(0) += 1;
            }
        }
        if (counts.len() as u128) < total {
            return Ok(0);
        }
        Ok(counts.values().copied().min().unwrap_or(0))
    }

    /// Edge-set union of two graphs on the same vertex set.
    pub fn union(&self, other: &KGraph) -> Result<KGraph> {
        if self.k != other.k || self.n != other.n {
            return Err(Error::Mismatch(format!(
                "union needs equal (k, n); got ({}, {}) and ({}, {})",
                self.k, self.n, other.k, other.n
            )));
        }
        let mut merged = Vec::with_capacity(self.edges.len() + other.edges.len());
        let (mut a, mut b) = (self.edges().peekable(), other.edges().peekable());
        loop {
            match (a.peek(), b.peek()) {
                (Some(x), Some(y)) => match x.cmp(y) {
                    std::cmp::Ordering::Less => merged.extend_from_slice(a.next().unwrap()),
                    std::cmp::Ordering::Greater => merged.extend_from_slice(b.next().unwrap()),
                    std::cmp::Ordering::Equal => {
                        merged.extend_from_slice(a.next().unwrap());
                        b.next();
                    }
                },
                (Some(_), None) => merged.extend_from_slice(a.next().unwrap()),
                (None, Some(_)) => merged.extend_from_slice(b.next().unwrap()),
                (None, None) => break,
            }
        }
        Ok(Self::from_sorted_unique(self.k, self.n, merged))
    }

    /// Union of several graphs on the same vertex set.
    pub fn union_all<'a, I: IntoIterator<Item = &'a KGraph>>(&self, others: I) -> Result<KGraph> {
        let mut acc = self.clone();
        for g in others {
            acc = acc.union(g)?;
        }
        Ok(acc)
    }

    /// Subgraph induced on `vertices`, relabelled to `0..|W|` in increasing
    /// vertex order. Returns the graph and the map from new labels to old.
    pub fn induced_subgraph(&self, vertices: &[usize]) -> Result<(KGraph, Vec<usize>)> {
        let map = canonical_set(vertices, self.n)?;
        let mut new_label = vec![usize::MAX; self.n];
        for (i, &v) in map.iter().enumerate() {
            new_label[v] = i;
        }
        let mut flat = Vec::new();
        for e in self.edges() {
            if e.iter().all(|&v| new_label[v] != usize::MAX) {
                flat.extend(e.iter().map(|&v| new_label[v]));
            }
        }
        // Relabelling is monotone, so the edge order is preserved.
        Ok((Self::from_sorted_unique(self.k, map.len(), flat), map))
    }

    /// Whether every k-subset of `tuple` is an edge.
    pub fn spans_clique(&self, tuple: &[usize]) -> Result<bool> {
        if tuple.len() < self.k {
            return Err(invalid(format!(
                "clique test needs at least k = {} vertices, got {}",
                self.k,
                tuple.len()
            )));
        }
        canonical_set(tuple, self.n)?;
        Ok(crate::combin::all_subsets(tuple, self.k, |s| self.contains(s)))
    }

    /// Serializes to the line-oriented text format: `k n m`, then one edge per line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{} {} {}", self.k, self.n, self.edge_count());
        for e in self.edges() {
            let mut first = true;
            for v in e {
                if !first {
                    out.push(' ');
                }
                first = false;
                let _ = write!(out, "{v}");
            }
            out.push('\n');
        }
        out
    }

    /// Parses the text format. Comment lines start with `#`; blank lines are
    /// ignored; duplicate edge lines are rejected.
    pub fn from_text(text: &str) -> Result<KGraph> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
            .filter(|(_, l)| !l.starts_with('#') && !l.trim().is_empty());
        let (hline, header) = lines.next().ok_or(Error::Parse {
            line: 0,
            message: "missing header `k n m`".into(),
        })?;
        let nums = parse_numbers(header, hline)?;
        if nums.len() != 3 {
            return Err(Error::Parse {
                line: hline,
                message: format!("header must be `k n m`, found {} fields", nums.len()),
            });
        }
        let (k, n, m) = (nums[0], nums[1], nums[2]);
        if !(2..=MAX_UNIFORMITY).contains(&k) {
            return Err(Error::Parse {
                line: hline,
                message: format!("uniformity {k} outside 2..={MAX_UNIFORMITY}"),
            });
        }
        let mut seen = HashSet::new();
        let mut edges = Vec::with_capacity(m);
        for (line, l) in lines {
            let e = parse_numbers(l, line)?;
            if e.len() != k {
                return Err(Error::Parse {
                    line,
                    message: format!("expected {k} vertex ids, found {}", e.len()),
                });
            }
            if e.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::Parse {
                    line,
                    message: "vertex ids must be strictly increasing".into(),
                });
            }
            if let Some(&v) = e.iter().find(|&&v| v >= n) {
                return Err(Error::Parse {
                    line,
                    message: format!("vertex {v} out of range for n = {n}"),
                });
            }
            if !seen.insert(e.clone()) {
                return Err(Error::Parse {
                    line,
                    message: format!("duplicate edge {e:?}"),
                });
            }
            edges.push(e);
        }
        if edges.len() != m {
            return Err(Error::Parse {
                line: hline,
                message: format!("header announces {m} edges, found {}", edges.len()),
            });
        }
        Ok(Self::from_canonical_edges(k, n, edges))
    }

    pub fn read_from(path: impl AsRef<Path>) -> Result<KGraph> {
        Self::from_text(&std::fs::read_to_string(path)?)
    }

    pub fn write_to(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }
}

fn parse_numbers(line: &str, lineno: usize) -> Result<Vec<usize>> {
    line.split(' ')
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<usize>().map_err(|_| Error::Parse {
                line: lineno,
                message: format!("not a non-negative integer: {t:?}"),
            })
        })
        .collect()
}

#[inline]
pub(crate) fn insertion_sort(buf: &mut [usize]) {
    for i in 1..buf.len() {
        let mut j = i;
        while j > 0 && buf[j - 1] > buf[j] {
            buf.swap(j - 1, j);
            j -= 1;
        }
    }
}

/// Validates distinctness and range; returns the sorted copy.
pub(crate) fn canonical_set(set: &[usize], n: usize) -> Result<Vec<usize>> {
    let mut s = set.to_vec();
    s.sort_unstable();
    for w in s.windows(2) {
        if w[0] == w[1] {
            return Err(Error::RepeatedVertex {
                edge: set.to_vec(),
                vertex: w[0],
            });
        }
    }
    if let Some(&v) = s.last() {
        if v >= n {
            return Err(Error::VertexOutOfRange {
                edge: set.to_vec(),
                vertex: v,
                n,
            });
        }
    }
    Ok(s)
}

fn canonical_edge(e: &[usize], k: usize, n: usize) -> Result<Vec<usize>> {
    if e.len() != k {
        return Err(Error::Arity {
            edge: e.to_vec(),
            expected: k,
            found: e.len(),
        });
    }
    canonical_set(e, n)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c5() -> KGraph {
        KGraph::new(2, 5, [[0, 1], [1, 2], [2, 3], [3, 4], [4, 0]]).unwrap()
    }

    #[test]
    fn duplicates_collapse() {
        let g = KGraph::new(2, 3, [[0, 1], [1, 2], [1, 0]]).unwrap();
        assert_eq!(g.edge_count(), 2);
        let edges: Vec<_> = g.edges().map(|e| e.to_vec()).collect();
        assert_eq!(edges, vec![vec![0, 1], vec![1, 2]]);
    }

    #[test]
    fn complete_three_graph_on_four() {
        let g = KGraph::new(3, 4, [[0, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]]).unwrap();
        assert_eq!(g.edge_count(), 4);
        assert_eq!(g, KGraph::complete(3, 4).unwrap());
        assert!(g.has_edge(&[2, 0, 1]).unwrap());
    }

    #[test]
    fn invalid_edges_name_the_culprit() {
        let err = KGraph::new(3, 3, [[0, 1, 1]]).unwrap_err();
        assert!(err.to_string().contains("repeated vertex"), "{err}");
        assert!(err.to_string().contains("[0, 1, 1]"));
        assert!(matches!(KGraph::new(2, 3, [vec![0, 1, 2]]), Err(Error::Arity { .. })));
        assert!(matches!(
            KGraph::new(2, 3, [[0, 3]]),
            Err(Error::VertexOutOfRange { vertex: 3, .. })
        ));
    }

    #[test]
    fn membership() {
        let g = c5();
        assert!(!g.has_edge(&[0, 2]).unwrap());
        assert!(g.has_edge(&[0, 4]).unwrap());
        assert!(!KGraph::empty(3, 6).unwrap().has_edge(&[0, 1, 2]).unwrap());
        assert!(g.has_edge(&[0, 1, 2]).is_err());
    }

    #[test]
    fn codegrees() {
        assert_eq!(c5().codegree(&[0]).unwrap(), 2);
        let g = KGraph::new(3, 5, [[0, 1, 2], [0, 1, 3]]).unwrap();
        assert_eq!(g.codegree(&[0, 1]).unwrap(), 2);
        assert_eq!(g.neighborhood(&[1, 0]).unwrap(), vec![2, 3]);
        assert!(g.codegree(&[0]).is_err());
        for (k, n) in [(2, 5), (3, 6), (4, 7)] {
            let kn = KGraph::complete(k, n).unwrap();
            assert_eq!(kn.codegree(&(0..k - 1).collect::<Vec<_>>()).unwrap(), n - k + 1);
        }
    }

    #[test]
    fn min_codegrees() {
        assert_eq!(KGraph::complete(3, 6).unwrap().min_codegree().unwrap(), 4);
        assert_eq!(KGraph::empty(2, 5).unwrap().min_codegree().unwrap(), 0);
        assert_eq!(c5().min_codegree().unwrap(), 2);
        assert!(KGraph::empty(3, 2).unwrap().min_codegree().is_err());
    }

    #[test]
    fn unions_and_induced() {
        let c = c5();
        assert_eq!(c.union(&c).unwrap(), c);
        let path = KGraph::new(2, 3, [[0, 1], [1, 2]]).unwrap();
        let chord = KGraph::new(2, 3, [[0, 2]]).unwrap();
        assert_eq!(path.union(&chord).unwrap(), KGraph::complete(2, 3).unwrap());
        assert!(path.union(&c).is_err());
        let (sub, map) = KGraph::complete(2, 5).unwrap().induced_subgraph(&[2, 0, 1]).unwrap();
        assert_eq!(sub, KGraph::complete(2, 3).unwrap());
        assert_eq!(map, vec![0, 1, 2]);
    }

    #[test]
    fn cliques() {
        let k4 = KGraph::complete(3, 4).unwrap();
        assert!(k4.spans_clique(&[0, 1, 2, 3]).unwrap());
        let missing = KGraph::new(3, 4, [[0, 1, 2], [0, 1, 3], [0, 2, 3]]).unwrap();
        assert!(!missing.spans_clique(&[0, 1, 2, 3]).unwrap());
        assert!(missing.spans_clique(&[2, 0, 3]).unwrap());
        assert!(missing.spans_clique(&[0, 1]).is_err());
    }

    #[test]
    fn text_round_trip_and_errors() {
        let g = c5();
        let text = g.to_text();
        assert!(text.starts_with("2 5 5\n0 1\n"));
        assert_eq!(KGraph::from_text(&text).unwrap(), g);
        let commented = "# a comment\n2 3 1\n# another\n0 2\n";
        assert_eq!(KGraph::from_text(commented).unwrap().edge_count(), 1);
        let dup = KGraph::from_text("2 3 2\n0 1\n0 1\n").unwrap_err();
        assert!(matches!(dup, Error::Parse { line: 3, .. }), "{dup}");
        assert!(KGraph::from_text("2 3 1\n1 0\n").is_err());
        assert!(KGraph::from_text("2 3 2\n0 1\n").is_err());
    }

    #[test]
    fn hashed_index_for_large_graphs() {
        // C(400, 4) exceeds the dense limit.
        let g = KGraph::new(4, 400, [[1, 50, 200, 399], [0, 1, 2, 3]]).unwrap();
        assert!(matches!(g.index, EdgeIndex::Hashed(_)));
        assert!(g.contains(&[399, 1, 200, 50]));
        assert!(!g.contains(&[399, 1, 200, 51]));
    }
}
