//! Maximization of a measurement-dependent objective.
//!
//! Qubit measurements are parameterized by the Bloch angles of the first
//! projector; higher-dimensional projective measurements by a product of
//! complex Givens rotations; rank-1 POVMs by unnormalized frame vectors.
//! The search is a coarse scan, a pick of well-separated top candidates,
//! and a Nelder-Mead simplex polish with restarts for each candidate.

use std::f64::consts::{PI, TAU};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, CMatrix, CVector};
use crate::measurement::Measurement;
use crate::states::rng_for;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub grid_theta: usize,
    pub grid_phi: usize,
    /// Simplex restarts after the first descent from each candidate.
    pub refinements: usize,
    pub multistarts: usize,
    pub tol_obj: f64,
    pub max_iter: usize,
    pub seed: u64,
    /// Also search rank-1 POVMs with up to d_B^2 outcomes.
    #[serde(default)]
    pub povm: bool,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self { grid_theta: 24, grid_phi: 48, refinements: 3, multistarts: 8, tol_obj: 1e-7, max_iter: 500, seed: 0, povm: false }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.grid_theta < 2 || self.grid_phi < 2 {
            return Err(Error::InvalidParams("grid counts must be at least 2".into()));
        }
        if self.tol_obj.is_nan() || self.tol_obj <= 0.0 {
            return Err(Error::InvalidParams("tol_obj must be positive".into()));
        }
        if self.multistarts == 0 || self.max_iter == 0 {
            return Err(Error::InvalidParams("multistarts and max_iter must be positive".into()));
        }
        Ok(())
    }
}

/// One diagnostic sample of the search: parameters and objective value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub params: Vec<f64>,
    pub objective: f64,
}

#[derive(Debug, Clone)]
pub struct SearchOutcome {
    pub measurement: Measurement,
    pub value: f64,
    pub converged: bool,
    pub trace: Vec<TracePoint>,
}

#[derive(Debug, Clone)]
pub(crate) struct Simplex {
    pub x: Vec<f64>,
    pub fx: f64,
    pub converged: bool,
}

/// Nelder-Mead minimization. Stops once the spread of objective values is
/// at most `tol` and the simplex diameter is at most `xtol`.
pub(crate) fn nelder_mead(f: &dyn Fn(&[f64]) -> f64, x0: &[f64], step: &[f64], tol: f64, xtol: f64, max_iter: usize) -> Simplex {
    let n = x0.len();
    let mut pts: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    pts.push(x0.to_vec());
    for i in 0..n {
        let mut p = x0.to_vec();
        p[i] += step[i];
        pts.push(p);
    }
    let mut vals: Vec<f64> = pts.iter().map(|p| f(p)).collect();
    let lerp = |a: &[f64], b: &[f64], t: f64| -> Vec<f64> { a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect() };

    let mut converged = false;
    for _ in 0..max_iter {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        pts = order.iter().map(|&k| pts[k].clone()).collect();
        vals = order.iter().map(|&k| vals[k]).collect();

        let spread = vals[n] - vals[0];
        let diameter = pts[1..]
            .iter()
            .map(|p| p.iter().zip(&pts[0]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        if spread <= tol && diameter <= xtol {
            converged = true;
            break;
        }

        let centroid: Vec<f64> = (0..n).map(|j| pts[..n].iter().map(|p| p[j]).sum::<f64>() / n as f64).collect();
        let reflected = lerp(&centroid, &pts[n], -1.0);
        let fr = f(&reflected);
        if fr < vals[0] {
            let expanded = lerp(&centroid, &pts[n], -2.0);
            let fe = f(&expanded);
            if fe < fr {
                pts[n] = expanded;
                vals[n] = fe;
            } else {
                pts[n] = reflected;
                vals[n] = fr;
            }
        } else if fr < vals[n - 1] {
            pts[n] = reflected;
            vals[n] = fr;
        } else {
            let (contracted, fc) = if fr < vals[n] {
                let p = lerp(&centroid, &reflected, 0.5);
                let v = f(&p);
                (p, v)
            } else {
                let p = lerp(&centroid, &pts[n], 0.5);
                let v = f(&p);
                (p, v)
            };
            if fc < vals[n].min(fr) {
                pts[n] = contracted;
                vals[n] = fc;
            } else {
                for k in 1..=n {
                    pts[k] = lerp(&pts[0], &pts[k], 0.5);
                    vals[k] = f(&pts[k]);
                }
            }
        }
    }
    let best = (0..=n).min_by(|&a, &b| vals[a].total_cmp(&vals[b])).unwrap_or(0);
    Simplex { x: pts[best].clone(), fx: vals[best], converged }
}

/// Descent from `x0` followed by up to `refinements` restarts with halved
/// steps, stopping early once a restart gains less than `tol_obj`.
fn polish(f: &dyn Fn(&[f64]) -> f64, x0: &[f64], step: f64, cfg: &OptimizerConfig, max_iter: usize) -> Simplex {
    let xtol = 1e-5;
    let steps = vec![step; x0.len()];
    let mut best = nelder_mead(f, x0, &steps, cfg.tol_obj * 0.1, xtol, max_iter);
    let mut scale = step;
    for _ in 0..cfg.refinements {
        scale *= 0.5;
        let steps = vec![scale.max(1e-3); x0.len()];
        let next = nelder_mead(f, &best.x, &steps, cfg.tol_obj * 0.1, xtol, max_iter);
        let gain = best.fx - next.fx;
        let done = gain < cfg.tol_obj;
        if next.fx <= best.fx {
            best = Simplex { converged: next.converged, ..next };
        }
        if done {
            break;
        }
    }
    best
}

fn lexicographic(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            std::cmp::Ordering::Equal => continue,
            other => return other,
        }
    }
    a.len().cmp(&b.len())
}

/// Bloch axis of (theta, phi), mapped to the upper hemisphere. A qubit
/// projective measurement and its antipodal relabeling are the same.
fn canonical_qubit(params: &[f64]) -> [f64; 2] {
    let (t, p) = (params[0], params[1]);
    let mut n = [t.sin() * p.cos(), t.sin() * p.sin(), t.cos()];
    if n[2] < 0.0 || (n[2] == 0.0 && (n[1] < 0.0 || (n[1] == 0.0 && n[0] < 0.0))) {
        n = n.map(|x| -x);
    }
    let theta = n[2].clamp(-1.0, 1.0).acos();
    let mut phi = if theta.sin().abs() < 1e-15 { 0.0 } else { n[1].atan2(n[0]) };
    if phi < 0.0 {
        phi += TAU;
    }
    if phi >= TAU {
        phi -= TAU;
    }
    [theta, phi]
}

fn axis(params: &[f64]) -> [f64; 3] {
    let (t, p) = (params[0], params[1]);
    [t.sin() * p.cos(), t.sin() * p.sin(), t.cos()]
}

/// Picks up to `k` candidates by descending value (ties: smallest params),
/// skipping those `too_close` to one already picked.
fn pick_starts(mut scored: Vec<(Vec<f64>, f64)>, k: usize, too_close: impl Fn(&[f64], &[f64]) -> bool) -> Vec<(Vec<f64>, f64)> {
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| lexicographic(&a.0, &b.0)));
    let mut picked: Vec<(Vec<f64>, f64)> = Vec::with_capacity(k);
    for cand in &scored {
        if picked.len() == k {
            break;
        }
        if picked.iter().all(|p| !too_close(&p.0, &cand.0)) {
            picked.push(cand.clone());
        }
    }
    for cand in scored {
        if picked.len() == k {
            break;
        }
        if !picked.iter().any(|p| p.0 == cand.0) {
            picked.push(cand);
        }
    }
    picked
}

/// Deterministic reduction over polished candidates: highest value wins,
/// values within `tol` are tied and resolved by the smallest parameters.
fn reduce(results: Vec<(Vec<f64>, f64, bool)>, tol: f64) -> (Vec<f64>, f64, bool) {
    let top = results.iter().map(|r| r.1).fold(f64::NEG_INFINITY, f64::max);
    results
        .into_iter()
        .filter(|r| r.1 >= top - tol)
        .min_by(|a, b| lexicographic(&a.0, &b.0))
        .expect("at least one candidate")
}

/// Maximizes `objective` over rank-1 projective measurements on a system
/// of dimension `d_b`.
pub fn maximize_projective(d_b: usize, cfg: &OptimizerConfig, objective: &dyn Fn(&Measurement) -> f64) -> SearchOutcome {
    if d_b == 2 {
        maximize_qubit(cfg, objective)
    } else {
        maximize_givens(d_b, cfg, objective)
    }
}

fn maximize_qubit(cfg: &OptimizerConfig, objective: &dyn Fn(&Measurement) -> f64) -> SearchOutcome {
    let eval = |x: &[f64]| objective(&Measurement::projective_qubit(x[0], x[1]));
    let d_theta = (PI / 2.0) / (cfg.grid_theta - 1) as f64;
    let d_phi = TAU / cfg.grid_phi as f64;
    let mut scored = Vec::with_capacity(cfg.grid_theta * cfg.grid_phi);
    for i in 0..cfg.grid_theta {
        let theta = d_theta * i as f64;
        let phis = if i == 0 { 1 } else { cfg.grid_phi };
        for j in 0..phis {
            let x = vec![theta, d_phi * j as f64];
            let v = eval(&x);
            scored.push((x, v));
        }
    }
    let min_sep = (1.5 * d_theta).cos();
    let starts = pick_starts(scored, cfg.multistarts, |a, b| {
        let (u, v) = (axis(a), axis(b));
        (u[0] * v[0] + u[1] * v[1] + u[2] * v[2]).abs() > min_sep
    });

    let neg = |x: &[f64]| -eval(x);
    let mut trace = Vec::new();
    let mut results = Vec::with_capacity(starts.len());
    for (x0, v0) in starts {
        trace.push(TracePoint { params: x0.clone(), objective: v0 });
        let s = polish(&neg, &x0, d_theta.max(1e-3), cfg, cfg.max_iter);
        let x = canonical_qubit(&s.x).to_vec();
        trace.push(TracePoint { params: x.clone(), objective: -s.fx });
        results.push((x, -s.fx, s.converged));
    }
    let (x, _, converged) = reduce(results, cfg.tol_obj);
    let measurement = Measurement::projective_qubit(x[0], x[1]);
    let value = objective(&measurement);
    SearchOutcome { measurement, value, converged, trace }
}

/// Unitary from `d(d-1)/2` complex Givens rotations, each with a mixing
/// angle and a phase.
pub fn givens_unitary(d: usize, params: &[f64]) -> CMatrix {
    let mut u = CMatrix::identity(d, d);
    let mut k = 0;
    for i in 0..d {
        for j in (i + 1)..d {
            let (alpha, beta) = (params[2 * k], params[2 * k + 1]);
            let (s, co) = (alpha.sin(), alpha.cos());
            let phase = c(beta.cos(), beta.sin());
            let mut g = CMatrix::identity(d, d);
            g[(i, i)] = c(co, 0.0);
            g[(j, j)] = c(co, 0.0);
            g[(i, j)] = -phase.conj() * s;
            g[(j, i)] = phase * s;
            u = g * u;
            k += 1;
        }
    }
    u
}

fn maximize_givens(d_b: usize, cfg: &OptimizerConfig, objective: &dyn Fn(&Measurement) -> f64) -> SearchOutcome {
    let n_params = d_b * (d_b - 1);
    let build = |x: &[f64]| {
        Measurement::from_basis(&givens_unitary(d_b, x)).expect("Givens products are unitary").with_params(x.to_vec())
    };
    let eval = |x: &[f64]| objective(&build(x));
    let mut rng = rng_for(cfg.seed);
    let samples = (cfg.grid_theta * cfg.grid_phi / 4).max(64);
    let mut scored = vec![(vec![0.0; n_params], eval(&vec![0.0; n_params]))];
    for _ in 0..samples {
        let x: Vec<f64> = (0..n_params).map(|_| rng.random::<f64>() * TAU).collect();
        let v = eval(&x);
        scored.push((x, v));
    }
    let starts = pick_starts(scored, cfg.multistarts, |a, b| a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-3));
    let neg = |x: &[f64]| -eval(x);
    let mut trace = Vec::new();
    let mut results = Vec::new();
    for (x0, v0) in starts {
        trace.push(TracePoint { params: x0.clone(), objective: v0 });
        let s = polish(&neg, &x0, 0.3, cfg, cfg.max_iter * n_params);
        trace.push(TracePoint { params: s.x.clone(), objective: -s.fx });
        results.push((s.x, -s.fx, s.converged));
    }
    let (x, _, converged) = reduce(results, cfg.tol_obj);
    let measurement = build(&x);
    let value = objective(&measurement);
    SearchOutcome { measurement, value, converged, trace }
}

fn povm_from_params(d_b: usize, x: &[f64]) -> Option<Measurement> {
    let vectors: Vec<CVector> = x
        .chunks(2 * d_b)
        .map(|chunk| CVector::from_fn(d_b, |i, _| c(chunk[2 * i], chunk[2 * i + 1])))
        .collect();
    Measurement::rank_one_povm(&vectors).ok().map(|m| m.with_params(x.to_vec()))
}

/// Maximizes over rank-1 POVMs with `d_b^2` outcomes. The result is a lower
/// bound on the POVM optimum.
pub fn maximize_povm(d_b: usize, cfg: &OptimizerConfig, objective: &dyn Fn(&Measurement) -> f64) -> SearchOutcome {
    let outcomes = d_b * d_b;
    let n_params = 2 * d_b * outcomes;
    let eval = |x: &[f64]| povm_from_params(d_b, x).map_or(f64::NEG_INFINITY, |m| objective(&m));
    let mut rng = rng_for(cfg.seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut scored = Vec::new();
    for _ in 0..(cfg.multistarts * 8).max(32) {
        let x: Vec<f64> = (0..n_params).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
        let v = eval(&x);
        scored.push((x, v));
    }
    let starts = pick_starts(scored, cfg.multistarts, |_, _| false);
    let neg = |x: &[f64]| -eval(x);
    let mut trace = Vec::new();
    let mut results = Vec::new();
    for (x0, v0) in starts {
        trace.push(TracePoint { params: x0.clone(), objective: v0 });
        let s = polish(&neg, &x0, 0.25, cfg, cfg.max_iter * n_params);
        trace.push(TracePoint { params: s.x.clone(), objective: -s.fx });
        results.push((s.x, -s.fx, s.converged));
    }
    let (x, _, converged) = reduce(results, cfg.tol_obj);
    let measurement = povm_from_params(d_b, &x).expect("winning POVM parameters are valid");
    let value = objective(&measurement);
    SearchOutcome { measurement, value, converged, trace }
}
