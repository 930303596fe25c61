//! Randomized depth-first filling of empty slots in a sequence so that every
//! window of `h` consecutive slots of each listed view spans a clique.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::RngCore;

use crate::combin::for_each_subset;
use crate::hypergraph::{KGraph, MAX_UNIFORMITY};

pub(crate) const EMPTY: usize = usize::MAX;

/// Slot layout plus the k-sets of slots to test at each fill step.
pub(crate) struct Frame {
    k: usize,
    len: usize,
    order: Vec<usize>,
    /// `checks[t]`: the other `k − 1` slots of each k-set completed at step `t`.
    checks: Vec<Vec<Vec<usize>>>,
}

impl Frame {
    /// `views` are sequences of slot indices; each must be at least `h` long.
    /// `order` lists the empty slots in fill order. k-sets made only of slots
    /// outside `order` are assumed to be valid already.
    pub(crate) fn new(k: usize, h: usize, len: usize, views: &[Vec<usize>], order: Vec<usize>) -> Self {
        let mut step = vec![usize::MAX; len];
        for (t, &s) in order.iter().enumerate() {
            step[s] = t;
        }
        let mut sets = HashSet::new();
        for view in views {
            debug_assert!(view.len() >= h);
            for w in view.windows(h) {
                for_each_subset(w, k, |sub| {
                    let mut v = sub.to_vec();
                    v.sort_unstable();
                    sets.insert(v);
                });
            }
        }
        let mut sets: Vec<Vec<usize>> = sets.into_iter().collect();
        sets.sort_unstable();
        let mut checks = vec![Vec::new(); order.len()];
        for set in sets {
            let Some(&last) = set.iter().filter(|&&s| step[s] != usize::MAX).max_by_key(|&&s| step[s]) else {
                continue;
            };
            let others: Vec<usize> = set.iter().copied().filter(|&s| s != last).collect();
            checks[step[last]].push(others);
        }
        Frame { k, len, order, checks }
    }

    /// Fills the empty slots of `values` (marked [`EMPTY`]) with distinct
    /// vertices `v` having `!blocked[v]`, exploring at most `budget` nodes.
    pub(crate) fn fill<R: RngCore + ?Sized>(
        &self,
        g: &KGraph,
        values: &[usize],
        blocked: &[bool],
        rng: &mut R,
        budget: u64,
    ) -> Option<Vec<usize>> {
        debug_assert_eq!(values.len(), self.len);
        let mut seq = values.to_vec();
        let mut taken = blocked.to_vec();
        for &v in values {
            if v != EMPTY {
                taken[v] = true;
            }
        }
        let mut nodes = 0u64;
        self.step(g, 0, &mut seq, &mut taken, rng, &mut nodes, budget)
            .then_some(seq)
    }

    #[allow(clippy::too_many_arguments)]
    fn step<R: RngCore + ?Sized>(
        &self,
        g: &KGraph,
        t: usize,
        seq: &mut [usize],
        taken: &mut [bool],
        rng: &mut R,
        nodes: &mut u64,
        budget: u64,
    ) -> bool {
        if t == self.order.len() {
            return true;
        }
        let slot = self.order[t];
        let mut cands: Vec<usize> = (0..taken.len()).filter(|&v| !taken[v]).collect();
        cands.shuffle(rng);
        let mut buf = [0usize; MAX_UNIFORMITY];
        let k = self.k;
        for v in cands {
            if *nodes >= budget {
                return false;
            }
            *nodes += 1;
            let ok = self.checks[t].iter().all(|others| {
                for (b, &s) in buf.iter_mut().zip(others) {
                    *b = seq[s];
                }
                buf[k - 1] = v;
                g.contains(&buf[..k])
            });
            if !ok {
                continue;
            }
            seq[slot] = v;
            taken[v] = true;
            if self.step(g, t + 1, seq, taken, rng, nodes, budget) {
                return true;
            }
            taken[v] = false;
            seq[slot] = EMPTY;
        }
        false
    }
}

/// Frame for a power path of `len` slots where slot 0 is fixed.
pub(crate) fn rooted_path(k: usize, h: usize, len: usize) -> Frame {
    Frame::new(k, h, len, &[(0..len).collect()], (1..len).collect())
}

/// Frame for a `2h`-tuple around a fixed middle vertex at slot `h`: both the
/// `2h + 1` sequence and the `2h` sequence without the middle are power paths.
/// Slots are filled outward from the middle.
pub(crate) fn absorber(k: usize, h: usize) -> Frame {
    let with: Vec<usize> = (0..=2 * h).collect();
    let without: Vec<usize> = (0..=2 * h).filter(|&s| s != h).collect();
    let mut order = Vec::with_capacity(2 * h);
    for d in 1..=h {
        order.push(h - d);
        order.push(h + d);
    }
    Frame::new(k, h, 2 * h + 1, &[with, without], order)
}

/// Frame `A C B` with fixed `h`-tuples `A`, `B` and a `2h`-slot gap `C`,
/// filled forward from `A` then backward from `B`.
pub(crate) fn connector(k: usize, h: usize) -> Frame {
    let order: Vec<usize> = (h..2 * h).chain((2 * h..3 * h).rev()).collect();
    Frame::new(k, h, 4 * h, &[(0..4 * h).collect()], order)
}

/// Frame extending a fixed `h`-tuple by `h` slots; `front` puts the new slots
/// before the tuple (filled right to left), otherwise after it.
pub(crate) fn extension(k: usize, h: usize, front: bool) -> Frame {
    let order: Vec<usize> = if front {
        (0..h).rev().collect()
    } else {
        (h..2 * h).collect()
    };
    Frame::new(k, h, 2 * h, &[(0..2 * h).collect()], order)
}
