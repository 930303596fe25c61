use std::time::Instant;

use rand::RngCore;
use serde::{Deserialize, Serialize};

use super::*;
use crate::power::is_power_hamilton_cycle;
use crate::random::sample_rounds;

/// `run_pipeline` rejects hosts with fewer than `8h` vertices.
pub const PIPELINE_FLOOR_FACTOR: usize = 8;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum PipelineOutcome {
    Success { order: Vec<usize> },
    Failure(StageFailure),
}

impl PipelineOutcome {
    pub fn is_success(&self) -> bool {
        matches!(self, PipelineOutcome::Success { .. })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageStat {
    pub stage: String,
    pub millis: u64,
    /// Objects produced by the stage (absorbers, connectors, paths, vertices).
    pub produced: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub outcome: PipelineOutcome,
    pub targets: ResolvedTargets,
    pub absorbing_path_len: usize,
    pub reservoir_size: usize,
    pub cover_paths: usize,
    pub leftover: usize,
    pub stages: Vec<StageStat>,
}

struct Recorder {
    stages: Vec<StageStat>,
    clock: Instant,
}

impl Recorder {
    fn lap(&mut self, stage: &str, produced: usize) {
        self.stages.push(StageStat {
            stage: stage.to_string(),
            millis: self.clock.elapsed().as_millis() as u64,
            produced,
        });
        self.clock = Instant::now();
    }
}

/// Runs the absorbing method on `H ∪ G^(k)(n, p)` with the random part
/// exposed in `cfg.rounds` rounds. Round 1 feeds the absorbing path, round 2
/// the reservoir and round 3 the cover (with fewer rounds the last one is
/// reused); end extension, closing and absorption work in the full union.
/// A success is returned only after the spanning cyclic order passes the
/// window test against `H` plus all rounds.
pub fn run_pipeline<R: RngCore + ?Sized>(
    host: &KGraph,
    r: usize,
    p: f64,
    cfg: &PipelineConfig,
    rng: &mut R,
) -> Result<PipelineReport> {
    cfg.validate()?;
    let params = Parameters::new(host.k(), r)?;
    let (n, k, h) = (host.n(), host.k(), params.h);
    if n < PIPELINE_FLOOR_FACTOR * h {
        return Err(invalid(format!(
            "pipeline needs n >= {PIPELINE_FLOOR_FACTOR}h = {}, got n = {n}",
            PIPELINE_FLOOR_FACTOR * h
        )));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(invalid(format!("need 0 <= p <= 1, got {p}")));
    }
    let targets = cfg.resolve(&params, n)?;
    let rounds = if p >= 1.0 {
        vec![KGraph::complete(k, n)?; cfg.rounds]
    } else {
        sample_rounds(k, n, p, cfg.rounds, rng)?
    };
    let round = |i: usize| &rounds[i.min(rounds.len() - 1)];
    let work1 = host.union(round(0))?;
    let work2 = host.union(round(1))?;
    let work3 = host.union(round(2))?;
    let full = host.union_all(rounds.iter())?;
    let budget = &cfg.budget;
    let mut rec = Recorder {
        stages: Vec::new(),
        clock: Instant::now(),
    };
    let mut report = PipelineReport {
        outcome: PipelineOutcome::Failure(StageFailure::new(STAGE_HARVEST, "not started")),
        targets,
        absorbing_path_len: 0,
        reservoir_size: 0,
        cover_paths: 0,
        leftover: 0,
        stages: Vec::new(),
    };
    let outcome = (|| -> std::result::Result<Vec<usize>, StageFailure> {
        let abs = build_absorbing_path(&work1, r, targets.absorber_target, budget, rng)?;
        rec.lap("absorbing path", abs.family_size);
        report.absorbing_path_len = abs.path.len();
        let on_abs = mask(n, abs.path.order.iter().copied());
        let rest: Vec<usize> = (0..n).filter(|&v| !on_abs[v]).collect();

        // Enough connectors to close the cycle through every cover path, while
        // leaving 2h vertices for the end extension.
        let m = targets.cover_segment_length;
        let n_rest = rest.len();
        let needed = (n_rest + m).saturating_sub(2 * h).div_ceil(m + 2 * h);
        let cap = n_rest.saturating_sub(2 * h) / (2 * h);
        let wanted = needed.max(targets.connector_target).min(cap);
        if wanted < targets.connector_target {
            return Err(StageFailure::new(
                STAGE_RESERVOIR,
                format!(
                    "{n_rest} vertices left, room for {cap} connectors, target {}",
                    targets.connector_target
                ),
            ));
        }
        let q = cfg.selection_q(&params, n, p);
        let reservoir = build_connector_reservoir(&work2, r, &rest, wanted, targets.connector_target, q, budget, rng)?;
        rec.lap(STAGE_RESERVOIR, reservoir.len());
        report.reservoir_size = reservoir.len();

        let mut blocked = on_abs.clone();
        for &v in &reservoir.used_vertices {
            blocked[v] = true;
        }
        let Some(extended) = extend_both_ends(&full, h, &abs.path.order, &blocked, budget, rng) else {
            return Err(StageFailure::new(
                STAGE_END_EXTENSION,
                "no h-vertex extension of the absorbing path",
            ));
        };
        rec.lap(STAGE_END_EXTENSION, 2 * h);
        for &v in &extended {
            blocked[v] = true;
        }

        let forbidden: Vec<usize> = (0..n).filter(|&v| blocked[v]).collect();
        let (cover, _) = greedy_path_cover(&work3, r, &forbidden, m, Some(reservoir.len() - 1), budget, rng)
            .map_err(|e| StageFailure::new(STAGE_COVER, e.to_string()))?;
        rec.lap(STAGE_COVER, cover.len());
        report.cover_paths = cover.len();

        let mut paths = vec![PowerPathInstance {
            params,
            order: extended.clone(),
        }];
        paths.extend(cover.paths.iter().cloned());
        let cycle = close_cycle(&full, r, &paths, &reservoir)?;
        rec.lap("close cycle", paths.len());

        let on_cycle = mask(n, cycle.iter().copied());
        let leftover: Vec<usize> = (0..n).filter(|&v| !on_cycle[v]).collect();
        report.leftover = leftover.len();
        let absorbed = absorb_leftover_rescanning(&abs.path, &abs.registry, &leftover, &full)?;
        rec.lap(STAGE_ABSORB, leftover.len());

        // The cycle starts with the extended absorbing path: h new vertices,
        // then the absorbing path itself.
        let len = abs.path.len();
        let mut order = Vec::with_capacity(n);
        order.extend_from_slice(&cycle[..h]);
        order.extend_from_slice(&absorbed.order);
        order.extend_from_slice(&cycle[h + len..]);
        match is_power_hamilton_cycle(&full, r, &order) {
            Ok(true) => {
                rec.lap(STAGE_VERIFY, n);
                Ok(order)
            }
            Ok(false) => Err(StageFailure::new(STAGE_VERIFY, "final cycle failed the window test")),
            Err(e) => Err(StageFailure::new(STAGE_VERIFY, e.to_string())),
        }
    })();
    report.outcome = match outcome {
        Ok(order) => PipelineOutcome::Success { order },
        Err(f) => PipelineOutcome::Failure(f),
    };
    report.stages = rec.stages;
    Ok(report)
}
