//! Closed-form quantities of the second-moment method, evaluated in the log
//! domain: `Φ_F`, expected labelled copy counts, the pair-overlap bound on
//! `Δ_X`, the Janson and Chebyshev tails, the `Φ` threshold check for power
//! paths, the first-moment count of spanning powers and probability splitting.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Div, Mul};

use num_rational::Ratio;

use crate::combin::{binomial, ln_factorial, ln_falling};
use crate::error::{invalid, Result};
use crate::hypergraph::KGraph;
use crate::power::{g_edges, power_path, Parameters};

/// Comparisons between log magnitudes use this absolute tolerance.
pub const LOG_TOLERANCE: f64 = 1e-12;

/// Largest edge count `phi` enumerates subsets of (`2^24 − 1` candidates).
pub const PHI_EDGE_CAP: usize = 24;

/// Largest vertex count for the vertex-support enumeration.
pub const PHI_VERTEX_CAP: usize = 30;

/// A non-negative magnitude stored as its natural logarithm. Zero is `ln = −∞`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogValue {
    ln: f64,
}

impl LogValue {
    pub const ZERO: LogValue = LogValue { ln: f64::NEG_INFINITY };
    pub const ONE: LogValue = LogValue { ln: 0.0 };

    pub fn from_ln(ln: f64) -> Self {
        debug_assert!(!ln.is_nan());
        LogValue { ln }
    }

    pub fn from_linear(x: f64) -> Result<Self> {
        if !(x >= 0.0) {
            return Err(invalid(format!("log-domain values are non-negative, got {x}")));
        }
        Ok(LogValue { ln: x.ln() })
    }

    pub fn ln(self) -> f64 {
        self.ln
    }

    pub fn is_zero(self) -> bool {
        self.ln == f64::NEG_INFINITY
    }

    /// Linear value, or `None` when it is not representable as a finite `f64`.
    pub fn to_linear(self) -> Option<f64> {
        let v = self.ln.exp();
        v.is_finite().then_some(v)
    }

    pub fn powf(self, e: f64) -> Self {
        if e == 0.0 {
            return LogValue::ONE;
        }
        LogValue { ln: self.ln * e }
    }

    /// Ordering with ties within [`LOG_TOLERANCE`].
    pub fn cmp_tol(self, other: LogValue) -> Ordering {
        if self.ln == other.ln || (self.ln - other.ln).abs() <= LOG_TOLERANCE {
            Ordering::Equal
        } else if self.ln < other.ln {
            Ordering::Less
        } else {
            Ordering::Greater
        }
    }

    pub fn approx_eq(self, other: LogValue) -> bool {
        self.cmp_tol(other) == Ordering::Equal
    }
}

impl Mul for LogValue {
    type Output = LogValue;
    fn mul(self, rhs: LogValue) -> LogValue {
        if self.is_zero() || rhs.is_zero() {
            return LogValue::ZERO;
        }
        LogValue { ln: self.ln + rhs.ln }
    }
}

impl Div for LogValue {
    type Output = LogValue;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: LogValue) -> LogValue {
        if self.is_zero() {
            return LogValue::ZERO;
        }
        LogValue { ln: self.ln - rhs.ln }
    }
}

impl fmt::Display for LogValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "exp({})", self.ln)
    }
}

/// The minimizer of `n^{v_H} p^{e_H}` over subgraphs with at least one edge.
#[derive(Clone, Debug)]
pub struct PhiReport {
    pub phi: LogValue,
    /// Edges of the minimizing subgraph, in the pattern's labels.
    pub argmin_edges: Vec<Vec<usize>>,
    /// Vertex support of those edges.
    pub argmin_vertices: Vec<usize>,
    pub candidates_examined: u64,
}

impl PhiReport {
    pub fn v(&self) -> usize {
        self.argmin_vertices.len()
    }

    pub fn e(&self) -> usize {
        self.argmin_edges.len()
    }
}

fn check_np(pattern: &KGraph, n: f64, p: f64) -> Result<()> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(invalid(format!("need 0 < p <= 1, got {p}")));
    }
    if !(n >= pattern.n() as f64) {
        return Err(invalid(format!("need n >= v_F = {}, got n = {n}", pattern.n())));
    }
    Ok(())
}

/// `Φ_F(n, p)` by enumerating every non-empty edge subset of `F` in Gray-code
/// order. Isolated vertices are never added to a candidate: they multiply the
/// value by `n >= 1`.
pub fn phi(pattern: &KGraph, n: f64, p: f64) -> Result<PhiReport> {
    let m = pattern.edge_count();
    if m == 0 {
        return Err(invalid("Φ is undefined for a pattern without edges"));
    }
    if m > PHI_EDGE_CAP {
        return Err(invalid(format!(
            "pattern has {m} edges; edge-subset enumeration is capped at {PHI_EDGE_CAP}"
        )));
    }
    check_np(pattern, n, p)?;
    let (ln_n, ln_p) = (n.ln(), p.ln());
    let edges: Vec<&[usize]> = pattern.edges().collect();
    let mut cover = vec![0u32; pattern.n()];
    let mut covered = 0usize;
    let mut mask = 0u32;
    let mut best = (f64::INFINITY, 0u32);
    let total = (1u64 << m) - 1;
    for i in 1..=total {
        let bit = i.trailing_zeros() as usize;
        mask ^= 1 << bit;
        let adding = mask >> bit & 1 == 1;
        for &v in edges[bit] {
            if adding {
                cover[v] += 1;
                if cover[v] == 1 {
                    covered += 1;
                }
            } else {
                cover[v] -= 1;
                if cover[v] == 0 {
                    covered -= 1;
                }
            }
        }
        let value = covered as f64 * ln_n + mask.count_ones() as f64 * ln_p;
        if value < best.0 - LOG_TOLERANCE {
            best = (value, mask);
        }
    }
    let argmin_edges: Vec<Vec<usize>> = (0..m)
        .filter(|&j| best.1 >> j & 1 == 1)
        .map(|j| edges[j].to_vec())
        .collect();
    let mut argmin_vertices: Vec<usize> = argmin_edges.iter().flatten().copied().collect();
    argmin_vertices.sort_unstable();
    argmin_vertices.dedup();
    Ok(PhiReport {
        phi: LogValue::from_ln(best.0),
        argmin_edges,
        argmin_vertices,
        candidates_examined: total,
    })
}

/// `Φ_F(n, p)` by enumerating vertex supports `W ⊆ V(F)` and taking the
/// induced subgraph `F[W]`. For `p <= 1` a subgraph on support `W` never has
/// more edges than `F[W]`, so the minimum over induced subgraphs with at least
/// one edge equals the minimum over all subgraphs. Handles patterns above the
/// edge cap as long as `v_F <= 30`.
pub fn phi_by_vertex_supports(pattern: &KGraph, n: f64, p: f64) -> Result<PhiReport> {
    let v = pattern.n();
    if pattern.edge_count() == 0 {
        return Err(invalid("Φ is undefined for a pattern without edges"));
    }
    if v > PHI_VERTEX_CAP {
        return Err(invalid(format!(
            "pattern has {v} vertices; support enumeration is capped at {PHI_VERTEX_CAP}"
        )));
    }
    check_np(pattern, n, p)?;
    let (ln_n, ln_p) = (n.ln(), p.ln());
    // For each vertex, the vertex masks of its incident edges.
    let mut incident: Vec<Vec<u32>> = vec![Vec::new(); v];
    for e in pattern.edges() {
        let m = e.iter().fold(0u32, |acc, &x| acc | 1 << x);
        for &x in e {
            incident[x].push(m);
        }
    }
    let mut mask = 0u32;
    let mut edges_in = 0usize;
    let mut best = (f64::INFINITY, 0u32);
    let total = (1u64 << v) - 1;
    for i in 1..=total {
        let bit = i.trailing_zeros() as usize;
        let adding = mask >> bit & 1 == 0;
        let rest = mask & !(1 << bit);
        let delta = incident[bit]
            .iter()
            .filter(|&&em| em & !(1 << bit) & !rest == 0)
            .count();
        if adding {
            edges_in += delta;
        } else {
            edges_in -= delta;
        }
        mask ^= 1 << bit;
        if edges_in > 0 {
            let value = mask.count_ones() as f64 * ln_n + edges_in as f64 * ln_p;
            if value < best.0 - LOG_TOLERANCE {
                best = (value, mask);
            }
        }
    }
    let argmin_vertices: Vec<usize> = (0..v).filter(|&x| best.1 >> x & 1 == 1).collect();
    let argmin_edges: Vec<Vec<usize>> = pattern
        .edges()
        .filter(|e| e.iter().all(|&x| best.1 >> x & 1 == 1))
        .map(|e| e.to_vec())
        .collect();
    Ok(PhiReport {
        phi: LogValue::from_ln(best.0),
        argmin_edges,
        argmin_vertices,
        candidates_examined: total,
    })
}

/// `λ = (n)_{v_F} p^{e_F}`, the expected number of ordered `v_F`-tuples of
/// `G^(k)(n, p)` spanning a labelled copy of `F`.
pub fn expected_labelled_copies(pattern: &KGraph, n: u64, p: f64) -> Result<LogValue> {
    let v = pattern.n() as u64;
    if n < v {
        return Err(invalid(format!("need n >= v_F = {v}, got n = {n}")));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(invalid(format!("need 0 <= p <= 1, got {p}")));
    }
    let e = pattern.edge_count() as f64;
    if p == 0.0 && e > 0.0 {
        return Ok(LogValue::ZERO);
    }
    Ok(LogValue::from_ln(ln_falling(n, v) + e * p.ln()))
}

/// Upper bound `s! 2^{2s} n^{2s} p^{2f} / Φ_F` on `Δ_X` for any family of
/// ordered `s`-sets, where `s = v_F` and `f = e_F`.
pub fn delta_bound(pattern: &KGraph, n: f64, p: f64) -> Result<LogValue> {
    let report = phi(pattern, n, p)?;
    Ok(delta_bound_with(pattern, n, p, report.phi))
}

pub(crate) fn delta_bound_with(pattern: &KGraph, n: f64, p: f64, phi: LogValue) -> LogValue {
    let s = pattern.n() as f64;
    let f = pattern.edge_count() as f64;
    let ln = ln_factorial(pattern.n() as u64) + 2.0 * s * std::f64::consts::LN_2 + 2.0 * s * n.ln() + 2.0 * f * p.ln();
    LogValue::from_ln(ln) / phi
}

/// Janson's lower tail: `P(X <= λ − t) <= exp(−t² / (2 Δ_X))` for `0 <= t <= λ`.
pub fn janson_tail(lambda: LogValue, slack: f64, delta: LogValue) -> Result<f64> {
    if !(slack >= 0.0) {
        return Err(invalid(format!("slack must be non-negative, got {slack}")));
    }
    if slack > 0.0 && slack.ln() > lambda.ln() + LOG_TOLERANCE {
        return Err(invalid(format!("slack {slack} exceeds λ = {lambda}")));
    }
    if delta.is_zero() {
        return Err(invalid("Δ must be positive"));
    }
    if slack == 0.0 {
        return Ok(1.0);
    }
    let exponent = (2.0 * slack.ln() - std::f64::consts::LN_2 - delta.ln()).exp();
    Ok((-exponent).exp().clamp(0.0, 1.0))
}

/// Chebyshev's upper tail: `P(X >= 2λ) <= min(1, Δ_X / λ²)`.
pub fn chebyshev_tail(lambda: LogValue, delta: LogValue) -> Result<f64> {
    if lambda.is_zero() {
        return Err(invalid("Chebyshev tail needs λ > 0"));
    }
    if delta.is_zero() {
        return Ok(0.0);
    }
    Ok((delta.ln() - 2.0 * lambda.ln()).exp().min(1.0))
}

/// `min{1 / (2 g(b)), 1 / (3 C(k+r−1, k))}`: the admissible range for ε in the
/// power-path `Φ` threshold.
pub fn epsilon_cap(k: usize, r: usize, b: usize) -> Result<Ratio<u64>> {
    let g = g_edges(k, r, b)?;
    let h = k + r - 1;
    let clique = binomial(h as u64, k as u64) as u64;
    Ok(Ratio::new(1, 2 * g).min(Ratio::new(1, 3 * clique)))
}

/// Finite-n verdict of the power-path threshold at `p = n^{−c−ε}`.
#[derive(Clone, Debug)]
pub struct ThresholdCheck {
    pub holds: bool,
    pub p: f64,
    pub phi: PhiReport,
    /// `C · n`.
    pub threshold: LogValue,
}

/// Evaluates `Φ_{P_b^r}(n, n^{−c−ε})` exactly and compares it with `C·n`.
/// Patterns above the edge cap use the vertex-support enumeration.
pub fn phi_threshold_check(k: usize, r: usize, b: usize, big_c: f64, n: f64, epsilon: f64) -> Result<ThresholdCheck> {
    let params = Parameters::new(k, r)?;
    let cap = epsilon_cap(k, r, b)?;
    let cap_f = *cap.numer() as f64 / *cap.denom() as f64;
    if !(epsilon > 0.0 && epsilon < cap_f) {
        return Err(invalid(format!(
            "ε must lie in the open interval (0, {cap}), got {epsilon}"
        )));
    }
    if !(big_c > 0.0) {
        return Err(invalid(format!("C must be positive, got {big_c}")));
    }
    let p = n.powf(-params.c_f64() - epsilon);
    let pattern = power_path(k, r, b)?;
    let report = if pattern.edge_count() <= PHI_EDGE_CAP {
        phi(&pattern, n, p)?
    } else {
        phi_by_vertex_supports(&pattern, n, p)?
    };
    let threshold = LogValue::from_ln(big_c.ln() + n.ln());
    Ok(ThresholdCheck {
        holds: report.phi.cmp_tol(threshold) != Ordering::Less,
        p,
        phi: report,
        threshold,
    })
}

/// Which spanning structure the first-moment count refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpanningShape {
    /// `P_n^{k,r}`, with `g(n)` edges.
    Path,
    /// `C_n^{k,r}`, with `n·C(h−1, k−1)` edges; the `2n` symmetry factor is ignored.
    Cycle,
}

/// Natural log of `n! · p^{e}` with `e` the edge count of the spanning shape:
/// the expected number of labelled spanning copies in `G^(k)(n, p)`.
pub fn first_moment_log(k: usize, r: usize, n: usize, p: f64, shape: SpanningShape) -> Result<f64> {
    let params = Parameters::new(k, r)?;
    if n < 2 * params.h {
        return Err(invalid(format!("need n >= 2h = {}, got n = {n}", 2 * params.h)));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(invalid(format!("need 0 <= p <= 1, got {p}")));
    }
    let edges = match shape {
        SpanningShape::Path => g_edges(k, r, n)?,
        SpanningShape::Cycle => n as u64 * params.window_degree(),
    } as f64;
    if p == 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(ln_factorial(n as u64) + edges * p.ln())
}

/// `p' = 1 − (1 − p)^{1/rounds}`: the union of `rounds` independent samples at
/// `p'` has the law of one sample at `p`.
pub fn split_probability(p: f64, rounds: usize) -> Result<f64> {
    if rounds == 0 {
        return Err(invalid("rounds must be at least 1"));
    }
    if !(0.0..1.0).contains(&p) {
        return Err(invalid(format!("splitting needs 0 <= p < 1, got {p}")));
    }
    if rounds == 1 {
        return Ok(p);
    }
    Ok(1.0 - (1.0 - p).powf(1.0 / rounds as f64))
}
