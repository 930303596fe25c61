//! Seeded sampling of the binomial random k-graph `G^(k)(n, p)`.
//!
//! Every trial owns an [`RngStream`]: ChaCha8 keyed by `seed` with the 64-bit
//! ChaCha stream selector set to `stream_id`. The keystream is a pure function
//! of `(seed, stream_id, counter)`, so samples are reproducible bit for bit on
//! every platform and distinct trials never share state.
//!
//! k-sets are visited in colex rank order `0, 1, ..., C(n, k) − 1`. For
//! `p < 0.05` the sampler jumps over non-edges with geometric skips; otherwise
//! it draws one uniform per k-set.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Geometric};

use crate::combin::{binomial, next_colex, unrank_colex};
use crate::error::{invalid, Result};
use crate::hypergraph::KGraph;
use crate::prob::split_probability;

/// Below this edge probability the sampler uses geometric skips.
pub const SKIP_THRESHOLD: f64 = 0.05;

/// A reproducible random stream identified by `(seed, stream_id)`.
#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    inner: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream_id);
        RngStream { seed, stream_id, inner }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Number of 32-bit words consumed so far.
    pub fn word_position(&self) -> u128 {
        self.inner.get_word_pos()
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}

fn check_p(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(invalid(format!("edge probability must lie in [0, 1], got {p}")));
    }
    Ok(())
}

/// One sample of `G^(k)(n, p)`, choosing the skip or the Bernoulli path by `p`.
pub fn sample_gnp<R: RngCore + ?Sized>(k: usize, n: usize, p: f64, rng: &mut R) -> Result<KGraph> {
    check_p(p)?;
    if p < SKIP_THRESHOLD {
        sample_gnp_skip(k, n, p, rng)
    } else {
        sample_gnp_bernoulli(k, n, p, rng)
    }
}

/// Bernoulli path: one `U[0, 1)` draw per k-set in colex order.
pub fn sample_gnp_bernoulli<R: RngCore + ?Sized>(k: usize, n: usize, p: f64, rng: &mut R) -> Result<KGraph> {
    check_p(p)?;
    let mut edges = Vec::new();
    if n >= k && p > 0.0 {
        let mut a: Vec<usize> = (0..k).collect();
        loop {
            if rng.random::<f64>() < p {
                edges.push(a.clone());
            }
            if !next_colex(&mut a, n) {
                break;
            }
        }
    }
    finish(k, n, edges)
}

/// Skip path: the gap to the next edge in colex order is geometric with
/// success probability `p`, which gives the same law as independent trials.
pub fn sample_gnp_skip<R: RngCore + ?Sized>(k: usize, n: usize, p: f64, rng: &mut R) -> Result<KGraph> {
    check_p(p)?;
    let total = binomial(n as u64, k as u64);
    let mut edges = Vec::new();
    if p > 0.0 && total > 0 {
        let geo = Geometric::new(p).map_err(|e| invalid(e.to_string()))?;
        let mut rank: u128 = 0;
        loop {
            rank = rank.saturating_add(geo.sample(rng) as u128);
            if rank >= total {
                break;
            }
            edges.push(unrank_colex(rank, k));
            rank += 1;
        }
    }
    finish(k, n, edges)
}

fn finish(k: usize, n: usize, edges: Vec<Vec<usize>>) -> Result<KGraph> {
    // Validates k; the edge list itself is canonical by construction.
    KGraph::empty(k, n)?;
    Ok(KGraph::from_canonical_edges(k, n, edges))
}

/// `rounds` independent samples at `split_probability(p, rounds)`; their union
/// has the law of `G^(k)(n, p)`.
pub fn sample_rounds<R: RngCore + ?Sized>(
    k: usize,
    n: usize,
    p: f64,
    rounds: usize,
    rng: &mut R,
) -> Result<Vec<KGraph>> {
    let q = split_probability(p, rounds)?;
    (0..rounds).map(|_| sample_gnp(k, n, q, rng)).collect()
}
