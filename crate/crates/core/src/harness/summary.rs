use std::collections::BTreeMap;

use super::RunRecord;
use crate::error::{invalid, Result};

/// Normal quantile for a two-sided 95% interval.
pub const WILSON_Z: f64 = 1.96;

/// Wilson score interval for `successes` out of `trials`.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let phat = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (phat + z2 / (2.0 * n)) / denom;
    let half = z / denom * (phat * (1.0 - phat) / n + z2 / (4.0 * n * n)).sqrt();
    ((center - half).max(0.0), (center + half).min(1.0))
}

type GroupKey = (usize, usize, usize, u64, &'static str, u64, &'static str);

fn group_key(r: &RunRecord) -> GroupKey {
    let s = &r.spec;
    // p and alpha are non-negative, so bit order is numeric order.
    (
        s.k,
        s.r,
        s.n,
        s.p.to_bits(),
        s.host.kind.name(),
        s.host.alpha.to_bits(),
        s.mode.name(),
    )
}

/// Aggregates records into CSV rows, one per grid point, sorted by
/// `(k, r, n, p, host, host_alpha, mode)`. The result does not depend on the
/// order of the input.
pub fn summarize_records(records: &[RunRecord]) -> Result<String> {
    let mut groups: BTreeMap<GroupKey, Vec<&RunRecord>> = BTreeMap::new();
    for r in records {
        groups.entry(group_key(r)).or_default().push(r);
    }
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let header = [
        "k",
        "r",
        "n",
        "p",
        "host",
        "host_alpha",
        "mode",
        "trials",
        "successes",
        "success_rate",
        "ci_low",
        "ci_high",
        "mean_runtime_ms",
        "mean_count",
        "errors",
        "warning",
    ];
    w.write_record(header).map_err(|e| invalid(e.to_string()))?;
    for (key, mut rs) in groups {
        rs.sort_by(|a, b| {
            (a.spec.trial, a.spec.seed, a.stream_id, a.runtime_ms, &a.version).cmp(&(
                b.spec.trial,
                b.spec.seed,
                b.stream_id,
                b.runtime_ms,
                &b.version,
            ))
        });
        let trials = rs.len() as u64;
        let successes = rs.iter().filter(|r| r.outcome.is_success()).count() as u64;
        let errors = rs.iter().filter(|r| r.outcome.status == "error").count();
        let (lo, hi) = wilson_interval(successes, trials, WILSON_Z);
        let runtime = rs.iter().map(|r| r.runtime_ms as f64).sum::<f64>() / trials as f64;
        let counts: Vec<f64> = rs
            .iter()
            .filter_map(|r| r.outcome.counts.get("labelled_count").copied())
            .collect();
        let mean_count = if counts.len() == rs.len() {
            format!("{:.6}", counts.iter().sum::<f64>() / counts.len() as f64)
        } else {
            String::new()
        };
        let first = &rs[0].version;
        let warning = if rs.iter().any(|r| &r.version != first) {
            "mixed artifact versions"
        } else {
            ""
        };
        let s = &rs[0].spec;
        w.write_record([
            key.0.to_string(),
            key.1.to_string(),
            key.2.to_string(),
            format!("{}", s.p),
            key.4.to_string(),
            format!("{}", s.host.alpha),
            key.6.to_string(),
            trials.to_string(),
            successes.to_string(),
            format!("{:.6}", successes as f64 / trials as f64),
            format!("{lo:.6}"),
            format!("{hi:.6}"),
            format!("{runtime:.3}"),
            mean_count,
            errors.to_string(),
            warning.to_string(),
        ])
        .map_err(|e| invalid(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| invalid(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| invalid(e.to_string()))
}

/// Reads a records file and summarizes it.
pub fn summarize(records_path: &std::path::Path) -> Result<String> {
    summarize_records(&super::load_records(records_path)?)
}
