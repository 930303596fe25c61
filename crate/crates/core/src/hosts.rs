//! Dense host k-graphs: the complete graph, the split host and hosts meeting
//! a prescribed minimum codegree.

use rand::RngCore;

use crate::combin::{binomial, next_colex, BinomialTable};
use crate::error::{invalid, Error, Result};
use crate::hypergraph::KGraph;
use crate::power::Parameters;
use crate::random::sample_gnp;

/// Added to the base rate `δ / (n − k + 1)` when sampling a codegree host.
pub const CODEGREE_SLACK: f64 = 0.05;

/// `K_n^(k)`.
pub fn complete_host(k: usize, n: usize) -> Result<KGraph> {
    KGraph::complete(k, n)
}

/// Size of the small class of the split host: `⌈α n⌉`.
pub fn split_class_size(n: usize, alpha: f64) -> usize {
    (alpha * n as f64 - 1e-9).ceil().max(0.0) as usize
}

/// Every k-set meeting the small class `A = {0, .., ⌈αn⌉ − 1}`. The large class
/// `B = V ∖ A` is independent, so for `k = 2` this is the complete bipartite
/// graph `K_{|A|, |B|}` with a clique added on `A`. Every (k−1)-set inside `B`
/// has codegree exactly `|A|`.
pub fn split_host(k: usize, n: usize, alpha: f64) -> Result<KGraph> {
    if !(alpha > 0.0 && alpha < 0.5) {
        return Err(invalid(format!("split host needs 0 < α < 1/2, got {alpha}")));
    }
    let a = split_class_size(n, alpha);
    if a < 1 {
        return Err(invalid(format!("class A = ⌈{alpha}·{n}⌉ is empty")));
    }
    KGraph::empty(k, n)?;
    let mut flat = Vec::new();
    if n >= k {
        let mut idx: Vec<usize> = (0..k).collect();
        loop {
            // Lexicographic order; the smallest vertex decides membership of A.
            if idx[0] < a {
                flat.extend_from_slice(&idx);
            }
            if !crate::combin::next_combination(&mut idx, n) {
                break;
            }
        }
    }
    Ok(KGraph::from_sorted_unique(k, n, flat))
}

/// `⌈(1 − c + α) n⌉`, capped at `n − k + 1`: the codegree the perturbed
/// Hamiltonicity result asks of the host.
pub fn theorem_codegree_target(params: &Parameters, n: usize, alpha: f64) -> usize {
    let want = ((1.0 - params.c_f64() + alpha) * n as f64 - 1e-9).ceil().max(0.0) as usize;
    want.min((n + 1).saturating_sub(params.k))
}

/// A host with `min_codegree >= delta_target`.
///
/// Up to `max_attempts` samples of `G^(k)(n, q)` at
/// `q = min(1, δ / (n − k + 1) + 0.05)` are drawn; the first meeting the target
/// is returned with `repaired = false`. Otherwise the last sample is repaired
/// by visiting (k−1)-sets in colex order and adding their missing extensions
/// in increasing vertex order until each reaches the target.
pub fn codegree_host<R: RngCore + ?Sized>(
    k: usize,
    n: usize,
    delta_target: usize,
    rng: &mut R,
    max_attempts: usize,
) -> Result<(KGraph, bool)> {
    if n < k {
        return Err(invalid(format!("codegree host needs n >= k (n = {n}, k = {k})")));
    }
    let max_codegree = n - k + 1;
    if delta_target > max_codegree {
        return Err(invalid(format!(
            "codegree target {delta_target} exceeds n − k + 1 = {max_codegree}"
        )));
    }
    if max_attempts == 0 {
        return Err(invalid("max_attempts must be at least 1"));
    }
    let q = (delta_target as f64 / max_codegree as f64 + CODEGREE_SLACK).min(1.0);
    let mut last = None;
    for _ in 0..max_attempts {
        let g = sample_gnp(k, n, q, rng)?;
        if g.min_codegree()? >= delta_target {
            return Ok((g, false));
        }
        last = Some(g);
    }
    let repaired = repair_codegree(&last.expect("at least one attempt"), delta_target);
    if repaired.min_codegree()? < delta_target {
        return Err(Error::InvalidArgument(format!(
            "repair did not reach codegree {delta_target} after {max_attempts} attempts"
        )));
    }
    Ok((repaired, true))
}

fn repair_codegree(g: &KGraph, target: usize) -> KGraph {
    let (k, n) = (g.k(), g.n());
    let d = k - 1;
    let table = BinomialTable::new(n, d);
    let mut counts = vec![0usize; binomial(n as u64, d as u64) as usize];
    let mut sub = vec![0usize; d];
    let bump = |e: &[usize], counts: &mut Vec<usize>, sub: &mut Vec<usize>| {
        for skip in 0..k {
            let mut j = 0;
            for (i, &v) in e.iter().enumerate() {
                if i != skip {
                    sub[j] = v;
                    j += 1;
                }
            }
            counts[table.rank(sub) as usize] += 1;
        }
    };
    let mut edges: Vec<Vec<usize>> = g.edges().map(|e| e.to_vec()).collect();
    for e in &edges {
        bump(e, &mut counts, &mut sub);
    }
    let mut added = std::collections::HashSet::new();
    let mut s: Vec<usize> = (0..d).collect();
    let mut cand = vec![0usize; k];
    loop {
        let rank = table.rank(&s) as usize;
        let mut v = 0;
        while counts[rank] < target && v < n {
            if !s.contains(&v) {
                cand[..d].copy_from_slice(&s);
                cand[d] = v;
                cand.sort_unstable();
                if !g.contains_sorted(&cand) && added.insert(cand.clone()) {
                    bump(&cand, &mut counts, &mut sub);
                    edges.push(cand.clone());
                }
            }
            v += 1;
        }
        if !next_colex(&mut s, n) {
            break;
        }
    }
    KGraph::from_canonical_edges(k, n, edges)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::RngStream;

    #[test]
    fn complete_hosts() {
        let g = complete_host(3, 6).unwrap();
        assert_eq!(g.edge_count(), 20);
        assert_eq!(g.min_codegree().unwrap(), 4);
    }

    #[test]
    fn split_hosts() {
        let g = split_host(2, 10, 0.3).unwrap();
        assert_eq!(split_class_size(10, 0.3), 3);
        assert_eq!(g.edge_count(), 45 - 21);
        assert_eq!(g.min_codegree().unwrap(), 3);
        for u in 3..10 {
            for v in u + 1..10 {
                assert!(!g.has_edge(&[u, v]).unwrap());
            }
        }
        let h = split_host(3, 9, 1.0 / 3.0).unwrap();
        assert_eq!(split_class_size(9, 1.0 / 3.0), 3);
        assert_eq!(h.codegree(&[5, 7]).unwrap(), 3);
        assert_eq!(h.codegree(&[0, 1]).unwrap(), 7);
        assert_eq!(h.min_codegree().unwrap(), 3);
        assert!(split_host(2, 10, 0.5).is_err());
        assert!(split_host(2, 10, 0.0).is_err());
        assert!(split_host(2, 1, 0.3).is_ok());
    }

    #[test]
    fn codegree_hosts() {
        let mut rng = RngStream::new(11, 0);
        let (g, repaired) = codegree_host(3, 9, 7, &mut rng, 2).unwrap();
        assert_eq!(g, KGraph::complete(3, 9).unwrap());
        assert!(repaired || g.min_codegree().unwrap() == 7);
        let (g, repaired) = codegree_host(2, 12, 0, &mut rng, 3).unwrap();
        assert!(!repaired);
        assert!(g.edge_count() < 66);
        for target in [3, 6, 9] {
            let (g, _) = codegree_host(3, 12, target, &mut rng, 2).unwrap();
            assert!(g.min_codegree().unwrap() >= target);
        }
        assert!(codegree_host(3, 9, 8, &mut rng, 2).is_err());
        assert!(codegree_host(3, 9, 2, &mut rng, 0).is_err());
    }

    #[test]
    fn theorem_targets() {
        let p = Parameters::new(2, 2).unwrap();
        assert_eq!(theorem_codegree_target(&p, 30, 0.1), 18);
        let p = Parameters::new(2, 1).unwrap();
        assert_eq!(theorem_codegree_target(&p, 30, 0.1), 3);
        let p = Parameters::new(3, 3).unwrap();
        assert_eq!(theorem_codegree_target(&p, 10, 0.5), 8);
    }
}
