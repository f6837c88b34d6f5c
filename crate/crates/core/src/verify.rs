//! Randomized property suites shared by the `verify` subcommand and the
//! test suites. Instance `k` of a run uses seed `root_seed + k`, and
//! results are reported in instance order, so a run is reproducible
//! byte for byte.

use std::fmt::Write as _;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;

use crate::correlations::{discord, is_zero_discord, mutual_information};
use crate::density::DensityMatrix;
use crate::error::{Error, Result};
use crate::io::density_to_json;
use crate::linalg::eigvalsh;
use crate::measurement::Measurement;
use crate::merging::{check_ssa, merge_markup, minimize_markup};
use crate::optimize::OptimizerConfig;
use crate::report::sig12;
use crate::states::{ginibre, item_seed, random_classical_quantum, random_pure, rng_for, RNG_SPEC};

pub const SSA_TOL: f64 = 1e-8;
pub const MARKUP_TOL: f64 = 1e-6;
pub const BOUND_TOL: f64 = 1e-7;
pub const PURE_TOL: f64 = 1e-5;
pub const CHAIN_TOL: f64 = 1e-8;
pub const ZERO_DISCORD_TOL: f64 = 1e-5;
pub const WITNESS_MARKUP_TOL: f64 = 1e-7;
pub const STRUCTURAL_TOL: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Ssa,
    Markup,
    Bounds,
    PureState,
    ZeroDiscord,
    All,
}

impl Suite {
    pub const EACH: [Suite; 5] = [Suite::Ssa, Suite::Markup, Suite::Bounds, Suite::PureState, Suite::ZeroDiscord];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Ssa => "ssa",
            Suite::Markup => "markup",
            Suite::Bounds => "bounds",
            Suite::PureState => "purestate",
            Suite::ZeroDiscord => "zerodiscord",
            Suite::All => "all",
        }
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ssa" => Ok(Suite::Ssa),
            "markup" => Ok(Suite::Markup),
            "bounds" => Ok(Suite::Bounds),
            "purestate" => Ok(Suite::PureState),
            "zerodiscord" => Ok(Suite::ZeroDiscord),
            "all" => Ok(Suite::All),
            other => Err(Error::InvalidParams(format!(
                "unknown suite {other:?}; expected ssa, markup, bounds, purestate, zerodiscord or all"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    pub index: usize,
    pub seed: u64,
    pub detail: String,
    pub state_json: String,
}

/// Outcome of one suite. `worst_residual` is the suite's headline
/// statistic at its most adverse instance (see [`run_suite`]).
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteSummary {
    pub suite: Suite,
    pub n: usize,
    pub passed: usize,
    pub worst_residual: f64,
    pub failures: Vec<Failure>,
    /// Every instance in order.
    pub instances: Vec<InstanceRecord>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InstanceRecord {
    pub seed: u64,
    pub residual: f64,
    pub pass: bool,
}

impl SuiteSummary {
    pub fn all_passed(&self) -> bool {
        self.failures.is_empty()
    }
}

struct Instance {
    residual: f64,
    failure: Option<(String, DensityMatrix)>,
}

fn ok(residual: f64) -> Instance {
    Instance { residual, failure: None }
}

fn check(residual: f64, problems: Vec<String>, state: &DensityMatrix) -> Instance {
    let failure = (!problems.is_empty()).then(|| (problems.join("; "), state.clone()));
    Instance { residual, failure }
}

fn failed(residual: f64, detail: String, state: &DensityMatrix) -> Instance {
    Instance { residual, failure: Some((detail, state.clone())) }
}

fn random_two_qubit(seed: u64) -> DensityMatrix {
    let mut rng = rng_for(seed);
    let rank = rng.random_range(1..=4);
    DensityMatrix::new(ginibre(4, rank, &mut rng), vec![2, 2]).expect("Ginibre states are valid")
}

/// Random two-qubit state with a negative partial transpose, by rejection.
pub fn random_entangled(seed: u64) -> DensityMatrix {
    let mut rng = rng_for(seed);
    loop {
        let rank = rng.random_range(1..=2);
        let rho = DensityMatrix::new(ginibre(4, rank, &mut rng), vec![2, 2]).expect("Ginibre states are valid");
        let pt = rho.partial_transpose(1).expect("bipartite");
        if eigvalsh(&pt)[0] < -1e-3 {
            return rho;
        }
    }
}

fn ssa_instance(seed: u64) -> Instance {
    let mut rng = rng_for(seed);
    let rank = rng.random_range(1..=8);
    let rho = DensityMatrix::new(ginibre(8, rank, &mut rng), vec![2, 2, 2]).expect("Ginibre states are valid");
    match check_ssa(&rho) {
        Ok(r) if r >= -SSA_TOL => ok(r),
        Ok(r) => failed(r, format!("S(A|B) - S(A|BC) = {r:e} < -{SSA_TOL:e}"), &rho),
        Err(e) => failed(f64::NAN, e.to_string(), &rho),
    }
}

fn markup_instance(seed: u64, cfg: &OptimizerConfig) -> Instance {
    let rho = random_two_qubit(seed);
    let run = || -> Result<Instance> {
        let d = discord(&rho, cfg)?;
        let opt = minimize_markup(&rho, cfg)?;
        let diff = (opt.markup - d.discord).abs().get();
        let mut problems = Vec::new();
        if diff > MARKUP_TOL {
            problems.push(format!("|min markup - D| = {diff:e}"));
        }
        let i_ab = mutual_information(&rho)?.get();
        for m in [&opt.measurement, &d.best_measurement] {
            let t = merge_markup(&rho, m)?.transcript;
            let gap = (t.mutual_info_with_ancilla.get() - i_ab).abs();
            if gap > CHAIN_TOL {
                problems.push(format!("|I(A':B'C') - I(A:B)| = {gap:e}"));
            }
            if t.mutual_info_after.get() > i_ab + CHAIN_TOL {
                problems.push(format!("I(A':B') = {} exceeds I(A:B) = {i_ab}", t.mutual_info_after.get()));
            }
        }
        Ok(check(diff, problems, &rho))
    };
    run().unwrap_or_else(|e| failed(f64::NAN, e.to_string(), &rho))
}

fn bounds_instance(seed: u64, cfg: &OptimizerConfig) -> Instance {
    let rho = random_two_qubit(seed);
    let run = || -> Result<Instance> {
        let d = discord(&rho, cfg)?.discord.get();
        let s_b = rho.entropy_of(&[1])?.get();
        let violation = (-d).max(d - s_b);
        let mut problems = Vec::new();
        if d < -BOUND_TOL {
            problems.push(format!("D = {d:e} is negative"));
        }
        if d > s_b + BOUND_TOL {
            problems.push(format!("D = {d} exceeds S(B) = {s_b}"));
        }
        Ok(check(violation, problems, &rho))
    };
    run().unwrap_or_else(|e| failed(f64::NAN, e.to_string(), &rho))
}

fn pure_instance(seed: u64, cfg: &OptimizerConfig) -> Instance {
    let rho = random_pure(&[2, 2], seed).expect("valid dims").density();
    let run = || -> Result<Instance> {
        let d = discord(&rho, cfg)?;
        let s_a = rho.entropy_of(&[0])?.get();
        let diff = (d.discord.get() - s_a).abs();
        let ledger = merge_markup(&rho, &d.best_measurement)?;
        let mut problems = Vec::new();
        if diff > PURE_TOL {
            problems.push(format!("|D - S(A)| = {diff:e}"));
        }
        if (ledger.cost_before.get() + s_a).abs() > 1e-8 {
            problems.push(format!("cost_before = {} but -S(A) = {}", ledger.cost_before.get(), -s_a));
        }
        if ledger.cost_after.get().abs() > 1e-6 {
            problems.push(format!("cost_after = {:e}", ledger.cost_after.get()));
        }
        Ok(check(diff, problems, &rho))
    };
    run().unwrap_or_else(|e| failed(f64::NAN, e.to_string(), &rho))
}

fn zero_discord_instance(seed: u64, cfg: &OptimizerConfig) -> Instance {
    let (rho, _) = random_classical_quantum(2, 2, seed);
    let run = || -> Result<Instance> {
        let d = discord(&rho, cfg)?.discord.get();
        let mut problems = Vec::new();
        if d > ZERO_DISCORD_TOL {
            problems.push(format!("classical-quantum state has D = {d:e}"));
        }
        let test = is_zero_discord(&rho, STRUCTURAL_TOL)?;
        match &test.witness {
            Some(basis) if test.zero_discord => {
                let markup = merge_markup(&rho, &Measurement::from_basis(basis)?)?.markup.get();
                if markup.abs() > WITNESS_MARKUP_TOL {
                    problems.push(format!("markup in witness basis = {markup:e}"));
                }
            }
            _ => problems.push(format!("structural test rejected a classical-quantum state (residual {:e})", test.residual)),
        }
        let entangled = random_entangled(seed ^ 0x5eed_0000_0000_0000);
        if is_zero_discord(&entangled, STRUCTURAL_TOL)?.zero_discord {
            problems.push(format!("structural test accepted entangled state {}", density_to_json(&entangled)));
        }
        Ok(check(d, problems, &rho))
    };
    run().unwrap_or_else(|e| failed(f64::NAN, e.to_string(), &rho))
}

/// Runs `n` instances of one suite (or of every suite for [`Suite::All`]).
///
/// Headline statistics: `ssa` reports the smallest SSA slack, `markup`
/// the largest `|min markup - D|`, `bounds` the largest bound violation
/// `max(-D, D - S(B))` (negative inside the bounds), `purestate` the largest
/// `|D - S(A)|`, and `zerodiscord` the largest D on classical-quantum states.
pub fn run_suite(suite: Suite, n: usize, root_seed: u64, cfg: &OptimizerConfig) -> Vec<SuiteSummary> {
    if suite == Suite::All {
        return Suite::EACH.iter().flat_map(|&s| run_suite(s, n, root_seed, cfg)).collect();
    }
    let instances: Vec<Instance> = (0..n)
        .into_par_iter()
        .map(|k| {
            let seed = item_seed(root_seed, k);
            match suite {
                Suite::Ssa => ssa_instance(seed),
                Suite::Markup => markup_instance(seed, cfg),
                Suite::Bounds => bounds_instance(seed, cfg),
                Suite::PureState => pure_instance(seed, cfg),
                Suite::ZeroDiscord => zero_discord_instance(seed, cfg),
                Suite::All => unreachable!(),
            }
        })
        .collect();
    let minimize = suite == Suite::Ssa;
    let worst_residual = instances
        .iter()
        .map(|i| i.residual)
        .filter(|r| !r.is_nan())
        .fold(if minimize { f64::INFINITY } else { f64::NEG_INFINITY }, |a, b| if minimize { a.min(b) } else { a.max(b) });
    let records = instances
        .iter()
        .enumerate()
        .map(|(k, inst)| InstanceRecord { seed: item_seed(root_seed, k), residual: inst.residual, pass: inst.failure.is_none() })
        .collect();
    let failures: Vec<Failure> = instances
        .into_iter()
        .enumerate()
        .filter_map(|(index, inst)| {
            inst.failure.map(|(detail, state)| Failure {
                index,
                seed: item_seed(root_seed, index),
                detail,
                state_json: density_to_json(&state),
            })
        })
        .collect();
    vec![SuiteSummary { suite, n, passed: n - failures.len(), worst_residual, failures, instances: records }]
}

/// Plain-text report: one header line, then one line per suite and one per
/// failure.
pub fn render(summaries: &[SuiteSummary], root_seed: u64) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "verify root_seed={root_seed} rng=\"{RNG_SPEC}\"");
    for s in summaries {
        let status = if s.all_passed() { "PASS" } else { "FAIL" };
        let _ = writeln!(
            out,
            "{status} {}: {}/{} passed, {} failed, worst residual {:.12e}",
            s.suite.name(),
            s.passed,
            s.n,
            s.failures.len(),
            s.worst_residual
        );
        for f in &s.failures {
            let _ = writeln!(out, "  violation index={} seed={}: {}", f.index, f.seed, f.detail);
            let _ = writeln!(out, "  state={}", f.state_json);
        }
    }
    out
}

/// One CSV row per instance: `suite,index,seed,residual,status`.
pub fn render_csv(summaries: &[SuiteSummary]) -> String {
    let mut out = String::from("suite,index,seed,residual,status\n");
    for s in summaries {
        for (k, r) in s.instances.iter().enumerate() {
            let status = if r.pass { "pass" } else { "fail" };
            let _ = writeln!(out, "{},{k},{},{},{status}", s.suite.name(), r.seed, sig12(r.residual));
        }
    }
    out
}
