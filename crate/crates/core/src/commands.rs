//! Single-state computation and parameter sweeps behind the command-line
//! tool.

use rayon::prelude::*;

use crate::correlations::discord;
use crate::density::DensityMatrix;
use crate::error::{Error, Result};
use crate::measures::local_purity_rate;
use crate::merging::merge_markup;
use crate::optimize::OptimizerConfig;
use crate::report::{InputSpec, ReportEnvelope, Results, SweepRow};
use crate::states::{bell_diagonal, make, werner};

#[derive(Debug, Clone, Default)]
pub struct ComputeOptions {
    pub cfg: OptimizerConfig,
    /// Also compute the local purity rate.
    pub all: bool,
    /// Keep the optimizer trace in the report.
    pub verbose: bool,
}

pub fn load(input: &InputSpec) -> Result<DensityMatrix> {
    match input {
        InputSpec::Family(spec) => make(spec),
        InputSpec::Matrix(m) => m.to_density(),
    }
}

/// Discord and the merge ledger at the optimal measurement, plus the purity
/// report when `opts.all` is set.
pub fn compute(input: InputSpec, opts: &ComputeOptions) -> Result<ReportEnvelope> {
    let rho = load(&input)?;
    let d = discord(&rho, &opts.cfg)?;
    let ledger = merge_markup(&rho, &d.best_measurement)?;
    let purity = if opts.all { Some(local_purity_rate(&rho, &d)?) } else { None };
    let d = if opts.verbose { d } else { d.without_trace() };
    Ok(ReportEnvelope::new(input, Results { discord: Some(d), ledger: Some(ledger), purity }))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SweepFamily {
    /// Werner states with singlet weight `p`.
    Werner,
    /// Bell-diagonal states `p |i><i| + (1 - p) |j><j|` along one edge of
    /// the probability simplex, in the Bell basis order phi+, phi-, psi+, psi-.
    BellDiagonalEdge(usize, usize),
}

impl SweepFamily {
    pub fn state(self, p: f64) -> Result<DensityMatrix> {
        match self {
            SweepFamily::Werner => werner(p),
            SweepFamily::BellDiagonalEdge(i, j) => {
                let mut probs = [0.0; 4];
                probs[i] += p;
                probs[j] += 1.0 - p;
                bell_diagonal(probs)
            }
        }
    }
}

/// `steps` evenly spaced values from `from` to `to` inclusive.
pub fn sweep_params(from: f64, to: f64, steps: usize) -> Result<Vec<f64>> {
    if steps == 0 || !from.is_finite() || !to.is_finite() {
        return Err(Error::InvalidParams("sweep needs finite bounds and at least one step".into()));
    }
    if steps == 1 {
        return Ok(vec![from]);
    }
    Ok((0..steps).map(|k| if k + 1 == steps { to } else { from + (to - from) * k as f64 / (steps - 1) as f64 }).collect())
}

pub fn sweep_family(family: &str, edge: Option<(usize, usize)>) -> Result<SweepFamily> {
    match (family, edge) {
        ("werner", None) => Ok(SweepFamily::Werner),
        ("bell_diagonal", Some((i, j))) if i < 4 && j < 4 && i != j => Ok(SweepFamily::BellDiagonalEdge(i, j)),
        ("bell_diagonal", _) => {
            Err(Error::InvalidParams("bell_diagonal sweeps need --edge i,j with distinct i, j in 0..4".into()))
        }
        (other, _) => Err(Error::InvalidParams(format!("cannot sweep family {other:?}; expected werner or bell_diagonal"))),
    }
}

fn sweep_row(family: SweepFamily, p: f64, cfg: &OptimizerConfig) -> SweepRow {
    let run = || -> Result<([f64; 6], bool)> {
        let rho = family.state(p)?;
        let d = discord(&rho, cfg)?;
        let ledger = merge_markup(&rho, &d.best_measurement)?;
        let purity = local_purity_rate(&rho, &d)?;
        let values = [
            d.mutual_info.get(),
            d.classical_corr.get(),
            d.discord.get(),
            ledger.cost_before.get(),
            ledger.markup.get(),
            purity.kappa,
        ];
        Ok((values, d.converged))
    };
    match run() {
        Ok((values, true)) => SweepRow { param: p, values: Some(values), status: "ok".into() },
        Ok((values, false)) => SweepRow { param: p, values: Some(values), status: "nonconverged".into() },
        Err(e) => SweepRow { param: p, values: None, status: format!("error:{}", e.name()) },
    }
}

/// One row per parameter, computed in parallel and returned in input order.
pub fn sweep(family: SweepFamily, params: &[f64], cfg: &OptimizerConfig) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    Ok(params.par_iter().map(|&p| sweep_row(family, p, cfg)).collect())
}
