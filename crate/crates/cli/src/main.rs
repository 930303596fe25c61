use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use powercycle::absorbing::{run_pipeline, PipelineConfig};
use powercycle::counting::count_labelled_copies;
use powercycle::exact::contains_power_hamilton;
use powercycle::harness::{self, KvConfig, PlotSpec, SweepConfig};
use powercycle::hosts::{codegree_host, complete_host, split_host, theorem_codegree_target};
use powercycle::power::power_path;
use powercycle::prob::{
    chebyshev_tail, delta_bound, epsilon_cap, expected_labelled_copies, first_moment_log, janson_tail, phi,
    phi_by_vertex_supports, phi_threshold_check, split_probability, LogValue, SpanningShape, PHI_EDGE_CAP,
};
use powercycle::random::{sample_gnp, sample_rounds, RngStream};
use powercycle::{Error, KGraph, Parameters};

#[derive(Parser)]
#[command(
    name = "powercycle",
    version,
    about = "Powers of tight Hamilton cycles in randomly perturbed hypergraphs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Complete,
    Split,
    Codegree,
}

#[derive(Subcommand)]
enum Command {
    /// Sample G^(k)(n, p); with --rounds, one file per round plus the union.
    Gen {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 0)]
        stream: u64,
        #[arg(long)]
        rounds: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Build a host graph.
    Host {
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        n: usize,
        /// Small class fraction (split) or the α of the codegree target.
        #[arg(long, default_value_t = 0.3)]
        alpha: f64,
        /// Power used for the codegree target (1 − c + α) n.
        #[arg(long, default_value_t = 1)]
        r: usize,
        /// Explicit codegree target, overriding --r and --alpha.
        #[arg(long)]
        delta: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10)]
        max_attempts: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Φ of a power path P_b^{k,r}, or of a pattern file.
    Phi {
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        r: Option<usize>,
        #[arg(long)]
        b: Option<usize>,
        #[arg(long)]
        pattern: Option<PathBuf>,
        #[arg(long)]
        n: f64,
        #[arg(long)]
        p: f64,
    },
    /// λ, the Δ bound and both tail bounds for P_b^{k,r}.
    Bounds {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        r: usize,
        #[arg(long)]
        b: usize,
        #[arg(long)]
        n: u64,
        #[arg(long)]
        p: f64,
        /// Janson slack t; defaults to λ/2.
        #[arg(long)]
        slack: Option<f64>,
    },
    /// Finite-n check of Φ_{P_b} ≥ C n at p = n^{−c−ε}.
    Threshold {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        r: usize,
        #[arg(long)]
        b: usize,
        #[arg(long = "C", default_value_t = 1.0)]
        big_c: f64,
        #[arg(long)]
        n: f64,
        #[arg(long)]
        epsilon: f64,
    },
    /// Log expected number of spanning power paths and cycles.
    FirstMoment {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        r: usize,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: f64,
    },
    /// Per-round probability for multi-round exposure.
    Split {
        #[arg(long)]
        p: f64,
        #[arg(long)]
        rounds: usize,
    },
    /// Count labelled copies of a pattern in a host.
    Count {
        #[arg(long)]
        pattern: PathBuf,
        #[arg(long)]
        host: PathBuf,
        #[arg(long, default_value_t = powercycle::counting::DEFAULT_COUNT_BUDGET)]
        budget: u64,
    },
    /// Exact search for the r-th power of a tight Hamilton cycle.
    Exact {
        #[arg(long)]
        host: PathBuf,
        #[arg(long)]
        r: usize,
        #[arg(long, default_value_t = powercycle::exact::DEFAULT_EXACT_BUDGET)]
        budget: u64,
    },
    /// Run the absorbing pipeline on host ∪ G^(k)(n, p).
    Pipeline {
        #[arg(long)]
        host: PathBuf,
        #[arg(long)]
        r: usize,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 0)]
        stream: u64,
        /// File with a [pipeline] section.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Run (or resume) a parameter sweep.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Aggregate sweep records into CSV.
    Summarize {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Render a summary CSV as SVG.
    Plot {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Twelve significant digits, fixed notation for moderate magnitudes.
fn fmt12(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let mag = x.abs().log10().floor() as i32;
    if (-4..12).contains(&mag) {
        let s = format!("{:.*}", (11 - mag) as usize, x);
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        format!("{x:.11e}")
    }
}

fn print_log(name: &str, v: LogValue) {
    println!("ln_{name} = {}", fmt12(v.ln()));
    match v.to_linear() {
        Some(x) => println!("{name} = {}", fmt12(x)),
        None => println!("{name} = unrepresentable"),
    }
}

fn read_text(path: &Path) -> powercycle::Result<String> {
    Ok(std::fs::read_to_string(path)?)
}

fn pipeline_config(path: Option<&Path>) -> powercycle::Result<PipelineConfig> {
    match path {
        None => Ok(PipelineConfig::default()),
        Some(p) => {
            let cfg = KvConfig::parse(&read_text(p)?)?;
            harness::pipeline_config_from(&cfg, "pipeline")
        }
    }
}

fn run(cli: Cli) -> powercycle::Result<ExitCode> {
    match cli.command {
        Command::Gen {
            k,
            n,
            p,
            seed,
            stream,
            rounds,
            out,
        } => {
            let mut rng = RngStream::new(seed, stream);
            match rounds {
                None => sample_gnp(k, n, p, &mut rng)?.write_to(&out)?,
                Some(rounds) => {
                    let parts = sample_rounds(k, n, p, rounds, &mut rng)?;
                    for (i, g) in parts.iter().enumerate() {
                        let mut name = out.clone().into_os_string();
                        name.push(format!(".round{}", i + 1));
                        g.write_to(PathBuf::from(name))?;
                    }
                    KGraph::empty(k, n)?.union_all(&parts)?.write_to(&out)?;
                }
            }
        }
        Command::Host {
            kind,
            k,
            n,
            alpha,
            r,
            delta,
            seed,
            max_attempts,
            out,
        } => {
            let g = match kind {
                Kind::Complete => complete_host(k, n)?,
                Kind::Split => split_host(k, n, alpha)?,
                Kind::Codegree => {
                    let target = match delta {
                        Some(d) => d,
                        None => theorem_codegree_target(&Parameters::new(k, r)?, n, alpha),
                    };
                    let mut rng = RngStream::new(seed, 0);
                    let (g, repaired) = codegree_host(k, n, target, &mut rng, max_attempts)?;
                    eprintln!("codegree target {target}, repaired = {repaired}");
                    g
                }
            };
            g.write_to(&out)?;
        }
        Command::Phi { k, r, b, pattern, n, p } => {
            let f = match (pattern, k, r, b) {
                (Some(path), None, None, None) => KGraph::read_from(path)?,
                (None, Some(k), Some(r), Some(b)) => power_path(k, r, b)?,
                _ => {
                    return Err(Error::InvalidArgument(
                        "give either --pattern or all of --k --r --b".into(),
                    ))
                }
            };
            let rep = if f.edge_count() <= PHI_EDGE_CAP {
                phi(&f, n, p)?
            } else {
                phi_by_vertex_supports(&f, n, p)?
            };
            print_log("phi", rep.phi);
            println!("argmin_vertices = {}", rep.argmin_vertices.len());
            println!("argmin_edges = {}", rep.argmin_edges.len());
            println!("candidates_examined = {}", rep.candidates_examined);
        }
        Command::Bounds { k, r, b, n, p, slack } => {
            let f = power_path(k, r, b)?;
            let lambda = expected_labelled_copies(&f, n, p)?;
            let delta = delta_bound(&f, n as f64, p)?;
            print_log("lambda", lambda);
            print_log("delta_bound", delta);
            let t = slack.unwrap_or_else(|| lambda.to_linear().unwrap_or(f64::MAX) / 2.0);
            println!("chebyshev_tail = {}", fmt12(chebyshev_tail(lambda, delta)?));
            println!("janson_slack = {}", fmt12(t));
            println!("janson_tail = {}", fmt12(janson_tail(lambda, t, delta)?));
            println!("epsilon_cap = {}", epsilon_cap(k, r, b)?);
        }
        Command::Threshold {
            k,
            r,
            b,
            big_c,
            n,
            epsilon,
        } => {
            let check = phi_threshold_check(k, r, b, big_c, n, epsilon)?;
            println!("p = {}", fmt12(check.p));
            print_log("phi", check.phi.phi);
            print_log("threshold", check.threshold);
            println!("holds = {}", check.holds);
        }
        Command::FirstMoment { k, r, n, p } => {
            let path = first_moment_log(k, r, n, p, SpanningShape::Path)?;
            let cycle = first_moment_log(k, r, n, p, SpanningShape::Cycle)?;
            print_log("path_expectation", LogValue::from_ln(path));
            print_log("cycle_expectation", LogValue::from_ln(cycle));
        }
        Command::Split { p, rounds } => {
            let q = split_probability(p, rounds)?;
            println!("p_round = {}", fmt12(q));
            if q > 0.0 {
                println!("ln_p_round = {}", fmt12(q.ln()));
            }
        }
        Command::Count { pattern, host, budget } => {
            let rep = count_labelled_copies(&KGraph::read_from(pattern)?, &KGraph::read_from(host)?, budget)?;
            println!("{}", json!(rep));
        }
        Command::Exact { host, r, budget } => {
            let out = contains_power_hamilton(&KGraph::read_from(host)?, r, budget)?;
            println!("{}", json!(out));
        }
        Command::Pipeline {
            host,
            r,
            p,
            seed,
            stream,
            config,
        } => {
            let cfg = pipeline_config(config.as_deref())?;
            let mut rng = RngStream::new(seed, stream);
            let report = run_pipeline(&KGraph::read_from(host)?, r, p, &cfg, &mut rng)?;
            println!("{}", json!(report));
        }
        Command::Sweep { config, out } => {
            let cfg = SweepConfig::parse(&read_text(&config)?)?;
            let s = harness::run_sweep(&cfg, &out)?;
            eprintln!(
                "{} trials: {} ran, {} resumed, {} errored",
                s.total, s.ran, s.skipped, s.errored
            );
            if s.errored > 0 {
                return Ok(ExitCode::from(3));
            }
        }
        Command::Summarize { input, out } => {
            std::fs::write(out, harness::summarize(&input)?)?;
        }
        Command::Plot { input, spec, out } => {
            let spec = PlotSpec::parse(&read_text(&spec)?)?;
            std::fs::write(out, harness::plot(&read_text(&input)?, &spec)?)?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Io(_) => ExitCode::from(1),
                _ => ExitCode::from(2),
            }
        }
    }
}
