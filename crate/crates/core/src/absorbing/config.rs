use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::power::Parameters;

/// Search effort granted to each randomized step.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageBudget {
    /// Nodes per randomized depth-first fill.
    pub fill_nodes: u64,
    /// Fresh attempts per object before a stage gives up.
    pub restarts: usize,
}

impl Default for StageBudget {
    fn default() -> Self {
        StageBudget {
            fill_nodes: 20_000,
            restarts: 40,
        }
    }
}

/// Constants of the absorbing method plus desk-scale overrides.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub alpha: f64,
    pub epsilon: f64,
    pub beta: f64,
    pub zeta: f64,
    pub gamma: f64,
    pub rounds: usize,
    pub connector_target: Option<usize>,
    pub absorber_target: Option<usize>,
    pub cover_segment_length: Option<usize>,
    pub selection_q_override: Option<f64>,
    pub budget: StageBudget,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            alpha: 0.4,
            epsilon: 0.05,
            beta: 0.1,
            zeta: 0.2,
            gamma: 0.5,
            rounds: 3,
            connector_target: None,
            absorber_target: None,
            cover_segment_length: None,
            selection_q_override: None,
            budget: StageBudget::default(),
        }
    }
}

/// Targets after resolving defaults for a concrete `n` and `(k, r)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResolvedTargets {
    pub connector_target: usize,
    pub absorber_target: usize,
    pub cover_segment_length: usize,
}

impl PipelineConfig {
    /// Checks ranges and the strict ordering `ε < β < ζ < α`.
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("alpha", self.alpha),
            ("epsilon", self.epsilon),
            ("beta", self.beta),
            ("zeta", self.zeta),
            ("gamma", self.gamma),
        ] {
            if !(v > 0.0 && v < 1.0) {
                return Err(invalid(format!("{name} must lie in (0, 1), got {v}")));
            }
        }
        if !(self.epsilon < self.beta && self.beta < self.zeta && self.zeta < self.alpha) {
            return Err(invalid(format!(
                "need epsilon < beta < zeta < alpha, got {} {} {} {}",
                self.epsilon, self.beta, self.zeta, self.alpha
            )));
        }
        if self.rounds == 0 {
            return Err(invalid("rounds must be at least 1"));
        }
        for (name, t) in [
            ("connector_target", self.connector_target),
            ("absorber_target", self.absorber_target),
        ] {
            if t == Some(0) {
                return Err(invalid(format!("{name} must be at least 1")));
            }
        }
        if let Some(q) = self.selection_q_override {
            if !(q > 0.0 && q <= 1.0) {
                return Err(invalid(format!("selection q must lie in (0, 1], got {q}")));
            }
        }
        if self.budget.fill_nodes == 0 || self.budget.restarts == 0 {
            return Err(invalid("stage budgets must be positive"));
        }
        Ok(())
    }

    /// Connector target `max(1, ⌈β²n/(2h)²⌉)`, absorber target
    /// `max(1, ⌈ζ²n/(2h)²⌉)` and `m = max(2h, round(g⁻¹(1/(2ε))))`, unless
    /// overridden.
    pub fn resolve(&self, params: &Parameters, n: usize) -> Result<ResolvedTargets> {
        let h = params.h;
        let two_h_sq = (2 * h * 2 * h) as f64;
        let scaled = |c: f64| ((c * c * n as f64 / two_h_sq - 1e-9).ceil() as usize).max(1);
        let m = match self.cover_segment_length {
            Some(m) if m < 2 * h => {
                return Err(invalid(format!("cover segment length must be at least 2h = {}", 2 * h)))
            }
            Some(m) => m,
            None => {
                let head = params.g(h)? as f64;
                let step = params.window_degree() as f64;
                let b = h as f64 + (1.0 / (2.0 * self.epsilon) - head) / step;
                (b.round().max(0.0) as usize).max(2 * h)
            }
        };
        Ok(ResolvedTargets {
            connector_target: self.connector_target.unwrap_or_else(|| scaled(self.beta)),
            absorber_target: self.absorber_target.unwrap_or_else(|| scaled(self.zeta)),
            cover_segment_length: m,
        })
    }

    /// Subselection rate `β / (2 (2h)² n^{2h−1} p^t)` clamped to `(0, 1]`.
    pub fn selection_q(&self, params: &Parameters, n: usize, p: f64) -> f64 {
        if let Some(q) = self.selection_q_override {
            return q;
        }
        let h = params.h as f64;
        let ln =
            self.beta.ln() - (2.0 * 4.0 * h * h).ln() - (2.0 * h - 1.0) * (n as f64).ln() - params.t as f64 * p.ln();
        if ln.is_nan() || ln >= 0.0 {
            1.0
        } else {
            ln.exp().max(f64::MIN_POSITIVE)
        }
    }
}
