//! Acceptance suite. Each criterion prints one `PASS`/`FAIL` line; the test
//! fails if any criterion does.

use std::collections::BTreeSet;
use std::io::Write;
use std::time::Instant;

use num_rational::Ratio;
use powercycle::absorbing::{run_pipeline, PipelineConfig, PipelineOutcome};
use powercycle::combin::for_each_subset;
use powercycle::counting::{count_labelled_copies, DEFAULT_COUNT_BUDGET};
use powercycle::exact::{brute_force_oracle, contains_power_hamilton, ExactOutcome};
use powercycle::harness::{load_records, plot, replay, run_sweep, summarize, PlotSpec, SweepConfig};
use powercycle::hosts::split_host;
use powercycle::power::{g_edges, is_power_hamilton_cycle, power_cycle, power_path, Parameters};
use powercycle::prob::{
    chebyshev_tail, delta_bound, expected_labelled_copies, first_moment_log, janson_tail, phi, phi_threshold_check,
    split_probability, SpanningShape,
};
use powercycle::random::{sample_gnp, sample_rounds, RngStream};
use powercycle::KGraph;
use rand::Rng;

type Verdict = Result<String, String>;
type Criterion = (usize, &'static str, fn() -> Verdict);

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {{
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($fmt)+));
        }
    }};
}

fn e<E: std::fmt::Display>(err: E) -> String {
    err.to_string()
}

/// Theorem-range pairs plus `(2, 1)`.
const PAIRS: [(usize, usize); 6] = [(2, 1), (2, 2), (2, 3), (3, 1), (3, 2), (4, 1)];

fn binom(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

fn criterion_1() -> Verdict {
    let mut checked = 0;
    for k in 2..=4 {
        for r in 1..=3 {
            if k + r < 4 {
                continue;
            }
            let h = k + r - 1;
            for m in h..=12 {
                let got = power_path(k, r, m).map_err(e)?.edge_count() as u64;
                let want = g_edges(k, r, m).map_err(e)?;
                ensure!(got == want, "k={k} r={r} m={m}: {got} edges, g = {want}");
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} (k, r, m) triples"))
}

fn criterion_2() -> Verdict {
    for ((k, r), want) in [
        ((2, 1), Ratio::new(1, 1)),
        ((2, 2), Ratio::new(1, 2)),
        ((3, 2), Ratio::new(1, 3)),
    ] {
        let c = Parameters::new(k, r).map_err(e)?.c();
        ensure!(c == want, "c({k}, {r}) = {c}, expected {want}");
    }
    Ok("c = 1, 1/2, 1/3".into())
}

fn corpus(k: usize, r: usize, rng: &mut RngStream) -> Result<Vec<KGraph>, String> {
    let h = k + r - 1;
    let mut out = Vec::new();
    for i in 0..200 {
        let n = rng.random_range(2 * h..=8);
        let p = [0.3, 0.5, 0.7, 0.8, 0.9, 0.95][i % 6];
        out.push(sample_gnp(k, n, p, rng).map_err(e)?);
    }
    for n in 2 * h..=8 {
        out.push(KGraph::complete(k, n).map_err(e)?);
        out.push(KGraph::empty(k, n).map_err(e)?);
        out.push(split_host(k, n, 0.3).map_err(e)?);
        let c = power_cycle(k, r, n).map_err(e)?;
        for drop in c.edges().take(3) {
            let rest: Vec<Vec<usize>> = c.edges().filter(|x| *x != drop).map(<[usize]>::to_vec).collect();
            out.push(KGraph::new(k, n, rest).map_err(e)?);
        }
        out.push(c);
    }
    Ok(out)
}

fn criterion_3() -> Verdict {
    let mut rng = RngStream::new(3, 0);
    let mut total = 0;
    for (k, r) in PAIRS {
        for g in corpus(k, r, &mut rng)? {
            let fast = match contains_power_hamilton(&g, r, 100_000_000).map_err(e)? {
                ExactOutcome::Found { order, .. } => {
                    ensure!(
                        is_power_hamilton_cycle(&g, r, &order).map_err(e)?,
                        "bad certificate at k={k} r={r}"
                    );
                    true
                }
                ExactOutcome::NotFound { .. } => false,
                ExactOutcome::Timeout { nodes } => return Err(format!("timeout after {nodes} nodes")),
            };
            let slow = brute_force_oracle(&g, r).map_err(e)?;
            ensure!(fast == slow, "k={k} r={r} n={}: search {fast}, oracle {slow}", g.n());
            total += 1;
        }
    }
    Ok(format!("{total} instances agree"))
}

/// Every distinct `(v_H, e_H)` over subgraphs `H ⊆ F` with at least one edge,
/// isolated vertices included.
fn subgraph_shapes(f: &KGraph) -> BTreeSet<(usize, usize)> {
    let edges: Vec<Vec<usize>> = f.edges().map(<[usize]>::to_vec).collect();
    let mut shapes = BTreeSet::new();
    for mask in 1u32..(1 << edges.len()) {
        let chosen: Vec<&Vec<usize>> = (0..edges.len())
            .filter(|i| mask >> i & 1 == 1)
            .map(|i| &edges[i])
            .collect();
        let support: BTreeSet<usize> = chosen.iter().flat_map(|x| x.iter().copied()).collect();
        for vmask in 0u32..(1 << f.n()) {
            if support.iter().all(|&v| vmask >> v & 1 == 1) {
                shapes.insert((vmask.count_ones() as usize, chosen.len()));
            }
        }
    }
    shapes
}

fn oracle_ln(shapes: &BTreeSet<(usize, usize)>, n: f64, p: f64) -> f64 {
    shapes
        .iter()
        .map(|&(v, m)| v as f64 * n.ln() + m as f64 * p.ln())
        .fold(f64::INFINITY, f64::min)
}

fn criterion_4() -> Verdict {
    let mut rng = RngStream::new(4, 0);
    let points: Vec<(f64, f64)> = (0..100)
        .map(|_| (rng.random_range(5.0..1e6), rng.random_range(1e-4..=1.0)))
        .collect();
    let mut patterns = 0;
    for k in [2, 3] {
        let all: Vec<Vec<usize>> = {
            let mut v = Vec::new();
            for_each_subset(&[0, 1, 2, 3, 4], k, |s| v.push(s.to_vec()));
            v
        };
        for mask in 1u32..(1 << all.len()) {
            if mask.count_ones() > 5 {
                continue;
            }
            let chosen = (0..all.len()).filter(|i| mask >> i & 1 == 1).map(|i| all[i].clone());
            let f = KGraph::new(k, 5, chosen).map_err(e)?;
            let shapes = subgraph_shapes(&f);
            for &(n, p) in &points {
                let got = phi(&f, n, p).map_err(e)?.phi.ln();
                let want = oracle_ln(&shapes, n, p);
                ensure!(
                    (got - want).abs() <= 1e-9,
                    "k={k} mask={mask:#x} n={n} p={p}: {got} vs {want}"
                );
            }
            patterns += 1;
        }
    }
    // Threshold verdicts against the same oracle on power paths.
    let mut verdicts = [0; 2];
    for i in 0..100 {
        let (k, r) = PAIRS[i % PAIRS.len()];
        let h = k + r - 1;
        let b = h + rng.random_range(1..=3);
        let f = power_path(k, r, b).map_err(e)?;
        if f.edge_count() > 14 {
            continue;
        }
        let cap = powercycle::prob::epsilon_cap(k, r, b).map_err(e)?;
        let cap = *cap.numer() as f64 / *cap.denom() as f64;
        let eps = cap * rng.random_range(0.05..0.95);
        let big_c = rng.random_range(0.01..100.0);
        let n = rng.random_range((b as f64)..1e6);
        let check = phi_threshold_check(k, r, b, big_c, n, eps).map_err(e)?;
        let direct = oracle_ln(&subgraph_shapes(&f), n, check.p);
        let thr = big_c.ln() + n.ln();
        if (direct - thr).abs() < 1e-9 {
            continue;
        }
        ensure!(
            check.holds == (direct > thr),
            "k={k} r={r} b={b} n={n} ε={eps} C={big_c}"
        );
        verdicts[check.holds as usize] += 1;
    }
    Ok(format!(
        "{patterns} patterns x 100 (n, p); threshold verdicts {} hold, {} fail",
        verdicts[1], verdicts[0]
    ))
}

fn criterion_5() -> Verdict {
    let f = power_path(2, 2, 4).map_err(e)?;
    let (n, p, trials) = (30usize, 0.3, 300u64);
    let lambda_log = expected_labelled_copies(&f, n as u64, p).map_err(e)?;
    let lambda = lambda_log.to_linear().ok_or("λ not representable")?;
    ensure!((lambda - 1598.26).abs() < 0.01, "λ = {lambda}");
    let delta = delta_bound(&f, n as f64, p).map_err(e)?;
    let cheb = chebyshev_tail(lambda_log, delta).map_err(e)?;
    let jans = janson_tail(lambda_log, lambda / 2.0, delta).map_err(e)?;
    let xs: Vec<f64> = (0..trials)
        .map(|s| {
            let g = sample_gnp(2, n, p, &mut RngStream::new(s, 55))?;
            Ok(count_labelled_copies(&f, &g, DEFAULT_COUNT_BUDGET)?.labelled_count as f64)
        })
        .collect::<powercycle::Result<_>>()
        .map_err(e)?;
    let t = trials as f64;
    let mean = xs.iter().sum::<f64>() / t;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (t - 1.0);
    let se = (var / t).sqrt();
    ensure!((mean - lambda).abs() <= 4.0 * se, "mean {mean} vs λ {lambda}, se {se}");
    let bse = |q: f64| (q.max(1.0 / t) * (1.0 - q.min(1.0 - 1.0 / t)) / t).sqrt();
    let upper = xs.iter().filter(|&&x| x >= 2.0 * lambda).count() as f64 / t;
    let lower = xs.iter().filter(|&&x| x <= lambda / 2.0).count() as f64 / t;
    ensure!(
        upper <= cheb + 3.0 * bse(cheb),
        "P(X >= 2λ) = {upper} above chebyshev {cheb}"
    );
    ensure!(
        lower <= jans + 3.0 * bse(jans),
        "P(X <= λ/2) = {lower} above janson {jans}"
    );
    Ok(format!(
        "mean {mean:.2} vs λ {lambda:.2} (se {se:.2}); upper {upper:.4} <= {cheb:.4}; lower {lower:.4} <= {jans:.4}"
    ))
}

fn criterion_6() -> Verdict {
    let q = split_probability(0.75, 2).map_err(e)?;
    ensure!(q == 0.5, "split_probability(0.75, 2) = {q}");
    let (k, n, p, rounds, trials) = (3, 5, 0.3, 3, 10_000u64);
    let mut rng = RngStream::new(6, 0);
    let mut hits = 0u64;
    for _ in 0..trials {
        let parts = sample_rounds(k, n, p, rounds, &mut rng).map_err(e)?;
        hits += parts.iter().any(|g| g.contains(&[0, 1, 2])) as u64;
    }
    let freq = hits as f64 / trials as f64;
    let se = (p * (1.0 - p) / trials as f64).sqrt();
    ensure!((freq - p).abs() <= 3.0 * se, "edge frequency {freq} vs {p}, se {se}");
    Ok(format!("marginal {freq:.4} vs {p} (se {se:.4})"))
}

fn criterion_7() -> Verdict {
    let cfg = PipelineConfig::default();
    let mut runs = 0;
    for (k, r) in [(2, 1), (2, 2), (3, 1), (3, 2)] {
        let h = k + r - 1;
        for n in 8 * h..=10 * h {
            let host = KGraph::complete(k, n).map_err(e)?;
            let rep = run_pipeline(&host, r, 0.0, &cfg, &mut RngStream::new(n as u64, 7)).map_err(e)?;
            match rep.outcome {
                PipelineOutcome::Success { order } => {
                    ensure!(
                        is_power_hamilton_cycle(&host, r, &order).map_err(e)?,
                        "k={k} r={r} n={n}: bad certificate"
                    )
                }
                PipelineOutcome::Failure(f) => return Err(format!("k={k} r={r} n={n}: failed at {}", f.stage)),
            }
            runs += 1;
        }
    }
    let empty = KGraph::empty(2, 24).map_err(e)?;
    let stage = match run_pipeline(&empty, 1, 0.0, &cfg, &mut RngStream::new(0, 7))
        .map_err(e)?
        .outcome
    {
        PipelineOutcome::Failure(f) => f.stage,
        PipelineOutcome::Success { .. } => return Err("empty host succeeded".into()),
    };
    ensure!(!stage.is_empty(), "empty host failed without a stage");

    let (k, r, n, seeds) = (2, 1, 30, 40u64);
    let host = split_host(k, n, 0.3).map_err(e)?;
    let mut rates = Vec::new();
    for p in [0.0, 0.1, 0.3, 0.6] {
        let mut wins = 0;
        for seed in 0..seeds {
            let g = host
                .union(&sample_gnp(k, n, p, &mut RngStream::new(seed, 70)).map_err(e)?)
                .map_err(e)?;
            match contains_power_hamilton(&g, r, 100_000_000).map_err(e)? {
                ExactOutcome::Found { order, .. } => {
                    ensure!(
                        is_power_hamilton_cycle(&g, r, &order).map_err(e)?,
                        "bad certificate at p={p}"
                    );
                    wins += 1;
                }
                ExactOutcome::NotFound { .. } => {}
                ExactOutcome::Timeout { nodes } => return Err(format!("p={p} seed={seed}: timeout after {nodes}")),
            }
        }
        rates.push(wins as f64 / seeds as f64);
    }
    ensure!(rates[0] == 0.0, "success at p = 0: {rates:?}");
    let se = |x: f64| (x * (1.0 - x) / seeds as f64).sqrt();
    for w in rates.windows(2) {
        ensure!(
            w[1] + 2.0 * (se(w[0]) + se(w[1])) >= w[0],
            "rates not monotone: {rates:?}"
        );
    }
    Ok(format!(
        "{runs} complete-host runs; empty host fails at {stage:?}; split-host rates {rates:?}"
    ))
}

/// `ln n!` from the Stirling series.
fn stirling_ln_factorial(n: f64) -> f64 {
    let pi = std::f64::consts::PI;
    n * n.ln() - n + 0.5 * (2.0 * pi * n).ln() + 1.0 / (12.0 * n) - 1.0 / (360.0 * n.powi(3))
        + 1.0 / (1260.0 * n.powi(5))
}

fn criterion_8() -> Verdict {
    let mut rng = RngStream::new(8, 0);
    for _ in 0..50 {
        let (k, r) = PAIRS[rng.random_range(0..PAIRS.len())];
        let h = (k + r - 1) as u64;
        let n = rng.random_range(2 * h..=400);
        let p: f64 = rng.random_range(0.001..=1.0);
        let window = binom(h - 1, k as u64 - 1) as f64;
        let path_edges = binom(h, k as u64) as f64 + (n - h) as f64 * window;
        for (shape, edges) in [
            (SpanningShape::Path, path_edges),
            (SpanningShape::Cycle, n as f64 * window),
        ] {
            let got = first_moment_log(k, r, n as usize, p, shape).map_err(e)?;
            let want = stirling_ln_factorial(n as f64) + edges * p.ln();
            ensure!(
                (got - want).abs() <= 1e-6 * want.abs(),
                "k={k} r={r} n={n} p={p} {shape:?}: {got} vs {want}"
            );
        }
    }
    for shape in [SpanningShape::Path, SpanningShape::Cycle] {
        let mut last = f64::NEG_INFINITY;
        for i in 1..=50 {
            let v = first_moment_log(3, 2, 40, i as f64 / 50.0, shape).map_err(e)?;
            ensure!(v > last, "{shape:?} not increasing at p = {}", i as f64 / 50.0);
            last = v;
        }
    }
    let (k, r, n) = (2, 1, 50);
    let c = Parameters::new(k, r).map_err(e)?.c_f64();
    let p = (0.9 * std::f64::consts::E / n as f64).powf(c);
    let path = first_moment_log(k, r, n, p, SpanningShape::Path).map_err(e)?;
    let cycle = first_moment_log(k, r, n, p, SpanningShape::Cycle).map_err(e)?;
    println!("first moment at (2, 1, 50), p = {p:.6}: path {path:.6}, cycle {cycle:.6}");
    ensure!(cycle < 0.0, "cycle first moment {cycle} is not negative");
    Ok(format!("50 Stirling checks; cycle value {cycle:.4} < 0 at p = {p:.5}"))
}

/// The CSV without its wall-clock column.
fn without_runtime(csv: &str) -> Vec<String> {
    let header: Vec<&str> = csv.lines().next().unwrap_or("").split(',').collect();
    let col = header.iter().position(|c| *c == "mean_runtime_ms");
    csv.lines()
        .map(|l| {
            l.split(',')
                .enumerate()
                .filter(|(i, _)| Some(*i) != col)
                .map(|(_, f)| f)
                .collect::<Vec<_>>()
                .join(",")
        })
        .collect()
}

fn criterion_9() -> Verdict {
    let text = "[sweep]\nseed = 9\ntrials = 3\nk = 2\nr = 1\nn = 16\np = 0.1, 0.4\nhost = complete, split\n\
                mode = exact, pipeline, count, lemma-check\npattern_b = 3\ngamma = 0.5\ninduced_samples = 5\n\
                [pipeline]\nselection_q = 1\n";
    let cfg = SweepConfig::parse(text).map_err(e)?;
    let dir = tempfile::tempdir().map_err(e)?;
    let spec = PlotSpec::default();
    let mut sweeps = Vec::new();
    let mut replayed = 0;
    for name in ["a", "b"] {
        let out = dir.path().join(format!("{name}.jsonl"));
        run_sweep(&cfg, &out).map_err(e)?;
        for rec in &load_records(&out).map_err(e)? {
            ensure!(replay(rec) == rec.outcome, "replay differs for {}", rec.spec.key());
            replayed += 1;
        }
        // Two runs of summarize and plot on the same records.
        let csv = summarize(&out).map_err(e)?;
        ensure!(csv == summarize(&out).map_err(e)?, "CSV differs between runs on {name}");
        let svg = plot(&csv, &spec).map_err(e)?;
        ensure!(
            svg == plot(&csv, &spec).map_err(e)?,
            "SVG differs between runs on {name}"
        );
        sweeps.push(csv);
    }
    // Independent sweeps agree on everything except wall-clock time.
    ensure!(
        without_runtime(&sweeps[0]) == without_runtime(&sweeps[1]),
        "sweeps disagree"
    );
    Ok(format!(
        "{replayed} records replayed; CSV and SVG identical across runs"
    ))
}

#[test]
fn acceptance() {
    let criteria: [Criterion; 9] = [
        (1, "edge-count identity", criterion_1),
        (2, "constant cross-check", criterion_2),
        (3, "oracle equivalence", criterion_3),
        (4, "phi correctness", criterion_4),
        (5, "concentration suite", criterion_5),
        (6, "probability splitting", criterion_6),
        (7, "pipeline soundness and sanity", criterion_7),
        (8, "first-moment calculator", criterion_8),
        (9, "determinism and replay", criterion_9),
    ];
    let results: Vec<(Verdict, f64)> = std::thread::scope(|s| {
        let handles: Vec<_> = criteria
            .iter()
            .map(|&(_, _, f)| {
                s.spawn(move || {
                    let t = Instant::now();
                    (f(), t.elapsed().as_secs_f64())
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or_else(|_| (Err("panicked".into()), 0.0)))
            .collect()
    });
    // Written straight to stderr so the verdicts show without --nocapture.
    let mut err = std::io::stderr();
    let mut failed = Vec::new();
    for ((id, name, _), (verdict, secs)) in criteria.iter().zip(&results) {
        match verdict {
            Ok(detail) => writeln!(err, "PASS criterion {id} ({name}, {secs:.2}s): {detail}").unwrap(),
            Err(why) => {
                writeln!(err, "FAIL criterion {id} ({name}, {secs:.2}s): {why}").unwrap();
                failed.push(*id);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
