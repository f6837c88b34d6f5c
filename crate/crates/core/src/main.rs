use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use discord_merge::commands::{compute, sweep, sweep_family, sweep_params, ComputeOptions};
use discord_merge::io::MatrixJson;
use discord_merge::optimize::OptimizerConfig;
use discord_merge::report::{sig12, InputSpec, SWEEP_HEADER};
use discord_merge::states::{StateSpec, RNG_SPEC};
use discord_merge::verify::{render, render_csv, run_suite, Suite};
use discord_merge::{Error, Result};

const EXIT_VIOLATION: u8 = 1;
const EXIT_INVALID: u8 = 2;
const EXIT_NOT_CONVERGED: u8 = 3;

/// Quantum discord, classical correlation and state-merging costs of
/// bipartite states.
#[derive(Parser)]
#[command(name = "discord-merge", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy)]
struct Grid {
    theta: usize,
    phi: usize,
}

fn parse_grid(s: &str) -> std::result::Result<Grid, String> {
    let (t, p) = s.split_once('x').ok_or("expected THETAxPHI, e.g. 24x48")?;
    Ok(Grid { theta: t.trim().parse().map_err(|e| format!("{e}"))?, phi: p.trim().parse().map_err(|e| format!("{e}"))? })
}

fn parse_edge(s: &str) -> std::result::Result<(usize, usize), String> {
    let (i, j) = s.split_once(',').ok_or("expected i,j")?;
    Ok((i.trim().parse().map_err(|e| format!("{e}"))?, j.trim().parse().map_err(|e| format!("{e}"))?))
}

#[derive(Args)]
struct OptArgs {
    /// Seed for random families and randomized search starts.
    #[arg(long, env = "DISCORD_MERGE_SEED", default_value_t = 0)]
    seed: u64,
    /// Coarse measurement grid as THETAxPHI.
    #[arg(long, value_parser = parse_grid)]
    grid: Option<Grid>,
    /// Number of well-separated grid candidates to polish.
    #[arg(long)]
    multistarts: Option<usize>,
    /// Iteration budget of each simplex descent.
    #[arg(long)]
    max_iter: Option<usize>,
    /// Also search rank-one POVMs (reported separately as a lower bound).
    #[arg(long)]
    povm: bool,
    /// Keep optimizer traces and print diagnostics to stderr.
    #[arg(long)]
    verbose: bool,
}

impl OptArgs {
    fn config(&self) -> OptimizerConfig {
        let mut cfg = OptimizerConfig { seed: self.seed, povm: self.povm, ..OptimizerConfig::default() };
        if let Some(g) = self.grid {
            cfg.grid_theta = g.theta;
            cfg.grid_phi = g.phi;
        }
        if let Some(k) = self.multistarts {
            cfg.multistarts = k;
        }
        if let Some(m) = self.max_iter {
            cfg.max_iter = m;
        }
        cfg
    }
}

#[derive(Subcommand)]
enum Command {
    /// Compute I, J, D and the merge ledger of one state (and kappa with --all).
    Compute {
        /// Named family: bell, bell_diagonal, werner, product,
        /// classical_quantum, random_ginibre, random_pure.
        #[arg(long, conflicts_with = "matrix", required_unless_present = "matrix")]
        family: Option<String>,
        /// JSON file {"dims":[..],"re":[[..]],"im":[[..]]}.
        #[arg(long)]
        matrix: Option<PathBuf>,
        /// Werner parameter.
        #[arg(long)]
        p: Option<f64>,
        /// Family parameters as a JSON object.
        #[arg(long)]
        params: Option<String>,
        /// Also compute the local purity rate kappa.
        #[arg(long)]
        all: bool,
        /// Emit the JSON report (default).
        #[arg(long, conflicts_with = "csv")]
        json: bool,
        /// Emit one CSV row in the sweep format.
        #[arg(long)]
        csv: bool,
        /// Record wall-clock time in the report.
        #[arg(long)]
        timing: bool,
        #[command(flatten)]
        opt: OptArgs,
    },
    /// Sweep a one-parameter family and emit one CSV row per value.
    Sweep {
        /// werner or bell_diagonal.
        #[arg(long)]
        family: String,
        #[arg(long, default_value_t = 0.0)]
        from: f64,
        #[arg(long, default_value_t = 1.0)]
        to: f64,
        #[arg(long, default_value_t = 11)]
        steps: usize,
        /// Simplex edge i,j for bell_diagonal: p on state i, 1 - p on state j.
        #[arg(long, value_parser = parse_edge)]
        edge: Option<(usize, usize)>,
        /// Emit a JSON array instead of CSV.
        #[arg(long, conflicts_with = "csv")]
        json: bool,
        /// Emit CSV (default).
        #[arg(long)]
        csv: bool,
        #[command(flatten)]
        opt: OptArgs,
    },
    /// Run a randomized property suite: ssa, markup, bounds, purestate,
    /// zerodiscord or all.
    Verify {
        suite: String,
        /// Number of random instances per suite.
        #[arg(short = 'n', long = "n", default_value_t = 100)]
        n: usize,
        /// Emit one CSV row per instance instead of the summary.
        #[arg(long)]
        csv: bool,
        #[command(flatten)]
        opt: OptArgs,
    },
}

fn input_spec(family: Option<String>, matrix: Option<PathBuf>, p: Option<f64>, params: Option<String>, seed: u64) -> Result<InputSpec> {
    if let Some(path) = matrix {
        let text = std::fs::read_to_string(&path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        return Ok(InputSpec::Matrix(serde_json::from_str::<MatrixJson>(&text)?));
    }
    let family = family.expect("clap requires --family or --matrix");
    let mut params: Value = match params {
        Some(text) => serde_json::from_str(&text)?,
        None => json!({}),
    };
    if let Some(p) = p {
        params.as_object_mut().ok_or_else(|| Error::Parse("--params must be a JSON object".into()))?.insert("p".into(), json!(p));
    }
    let mut spec: StateSpec = serde_json::from_value(json!({ "family": family, "params": params }))?;
    if spec.is_random() {
        spec.seed = Some(seed);
    }
    Ok(InputSpec::Family(spec))
}

fn fail(e: &Error) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(EXIT_INVALID)
}

fn verbose_header(opt: &OptArgs, cfg: &OptimizerConfig) {
    if opt.verbose {
        eprintln!("rng: {RNG_SPEC}; seed {}", opt.seed);
        eprintln!("optimizer: {}", serde_json::to_string(cfg).unwrap_or_default());
    }
}

fn run() -> ExitCode {
    match Cli::parse().command {
        Command::Compute { family, matrix, p, params, all, json: _, csv, timing, opt } => {
            let cfg = opt.config();
            verbose_header(&opt, &cfg);
            let start = Instant::now();
            let input = match input_spec(family, matrix, p, params, opt.seed) {
                Ok(i) => i,
                Err(e) => return fail(&e),
            };
            let opts = ComputeOptions { cfg, all: all || csv, verbose: opt.verbose };
            let mut report = match compute(input, &opts) {
                Ok(r) => r,
                Err(e) => return fail(&e),
            };
            if timing {
                report.timing_ms = Some(start.elapsed().as_secs_f64() * 1e3);
            }
            if csv {
                let (d, l, k) = (
                    report.results.discord.as_ref().expect("computed"),
                    report.results.ledger.as_ref().expect("computed"),
                    report.results.purity.as_ref().expect("computed"),
                );
                let status = if d.converged { "ok" } else { "nonconverged" };
                println!("{SWEEP_HEADER}");
                let cells = [d.mutual_info.get(), d.classical_corr.get(), d.discord.get(), l.cost_before.get(), l.markup.get(), k.kappa];
                let cells: Vec<String> = cells.iter().map(|&x| sig12(x)).collect();
                println!("{},{},{status}", sig12(p.unwrap_or(f64::NAN)), cells.join(","));
            } else {
                match report.to_json() {
                    Ok(text) => println!("{text}"),
                    Err(e) => return fail(&e),
                }
            }
            if report.converged() {
                ExitCode::SUCCESS
            } else {
                eprintln!("error: optimizer did not converge");
                ExitCode::from(EXIT_NOT_CONVERGED)
            }
        }
        Command::Sweep { family, from, to, steps, edge, json, csv: _, opt } => {
            let cfg = opt.config();
            verbose_header(&opt, &cfg);
            let rows = match sweep_family(&family, edge)
                .and_then(|f| sweep_params(from, to, steps).map(|ps| (f, ps)))
                .and_then(|(f, ps)| sweep(f, &ps, &cfg))
            {
                Ok(rows) => rows,
                Err(e) => return fail(&e),
            };
            if json {
                let out: Vec<Value> = rows
                    .iter()
                    .map(|r| {
                        let v = r.values.map(|v| v.to_vec());
                        json!({"param": r.param, "values": v, "status": r.status})
                    })
                    .collect();
                println!("{}", serde_json::to_string_pretty(&out).expect("rows serialize"));
            } else {
                println!("{SWEEP_HEADER}");
                for r in &rows {
                    println!("{}", r.to_csv());
                }
            }
            if rows.iter().any(|r| r.status.starts_with("error")) {
                ExitCode::from(EXIT_INVALID)
            } else if rows.iter().any(|r| r.status == "nonconverged") {
                ExitCode::from(EXIT_NOT_CONVERGED)
            } else {
                ExitCode::SUCCESS
            }
        }
        Command::Verify { suite, n, csv, opt } => {
            let cfg = opt.config();
            verbose_header(&opt, &cfg);
            let suite: Suite = match suite.parse() {
                Ok(s) => s,
                Err(e) => return fail(&e),
            };
            if let Err(e) = cfg.validate() {
                return fail(&e);
            }
            let summaries = run_suite(suite, n, opt.seed, &cfg);
            if csv {
                print!("{}", render_csv(&summaries));
                for f in summaries.iter().flat_map(|s| &s.failures) {
                    eprintln!("violation seed={}: {} state={}", f.seed, f.detail, f.state_json);
                }
            } else {
                print!("{}", render(&summaries, opt.seed));
            }
            if summaries.iter().all(|s| s.all_passed()) {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_VIOLATION)
            }
        }
    }
}

fn main() -> ExitCode {
    run()
}
