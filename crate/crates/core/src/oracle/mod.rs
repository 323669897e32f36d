//! Randomized instance generation, independent re-evaluation, shrinking and sweeps.

pub mod naive;
pub mod sampling;
mod shrink;

pub use shrink::shrink;

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{evaluate, BoundReport, Instance, TheoremId};
use crate::convexity::{
    certify_derivative_superadditive, uniform_grid, ConvexityClass, FunctionSpec,
};
use crate::error::{Error, Result};
use crate::tolerance::Tolerance;

fn default_theorems() -> Vec<TheoremId> {
    TheoremId::ALL.to_vec()
}

fn default_classes() -> Vec<ConvexityClass> {
    ConvexityClass::ALL.to_vec()
}

fn default_n_range() -> [usize; 2] {
    [2, 8]
}

fn default_tol() -> f64 {
    1e-9
}

/// Parameters of a fuzz campaign. `trials` counts trials per theorem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FuzzConfig {
    pub seed: u64,
    pub trials: u64,
    #[serde(default = "default_n_range")]
    pub n_range: [usize; 2],
    #[serde(default = "default_theorems")]
    pub theorem_set: Vec<TheoremId>,
    /// Theorems stated for a class outside this set are skipped; theorems
    /// without a class always run.
    #[serde(default = "default_classes")]
    pub class_set: Vec<ConvexityClass>,
    #[serde(default = "default_tol")]
    pub tol_abs: f64,
    #[serde(default = "default_tol")]
    pub tol_rel: f64,
}

impl FuzzConfig {
    pub fn new(seed: u64, trials: u64) -> Self {
        FuzzConfig {
            seed,
            trials,
            n_range: default_n_range(),
            theorem_set: default_theorems(),
            class_set: default_classes(),
            tol_abs: default_tol(),
            tol_rel: default_tol(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: FuzzConfig = serde_json::from_str(text).map_err(|e| {
            Error::Parse(format!(
                "fuzz config JSON, line {} column {}: {e}",
                e.line(),
                e.column()
            ))
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials < 1 {
            return Err(Error::Config("trials must be >= 1".into()));
        }
        let [lo, hi] = self.n_range;
        if lo < 2 || hi < lo || hi > 64 {
            return Err(Error::Config(format!(
                "n_range [{lo}, {hi}] must satisfy 2 <= lo <= hi <= 64"
            )));
        }
        if !(self.tol_abs >= 0.0 && self.tol_rel >= 0.0) {
            return Err(Error::Config("tolerances must be >= 0".into()));
        }
        if self.theorem_set.is_empty() {
            return Err(Error::Config("theorem_set is empty".into()));
        }
        Ok(())
    }

    pub fn tolerance(&self) -> Tolerance {
        Tolerance::new(self.tol_abs, self.tol_rel)
    }

    /// Theorems of `theorem_set` admitted by `class_set`, deduplicated, in set order.
    pub fn active_theorems(&self) -> Vec<TheoremId> {
        let mut out: Vec<TheoremId> = Vec::new();
        for &t in &self.theorem_set {
            let admitted = t.class().is_none_or(|c| self.class_set.contains(&c));
            if admitted && !out.contains(&t) {
                out.push(t);
            }
        }
        out
    }
}

fn ordinal(theorem: TheoremId) -> u64 {
    TheoremId::ALL
        .iter()
        .position(|&t| t == theorem)
        .unwrap_or(TheoremId::ALL.len()) as u64
}

fn trial_rng(seed: u64, theorem: TheoremId, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((ordinal(theorem) << 40) | trial);
    rng
}

/// Draws the `trial`-th instance for `theorem`. The result satisfies the
/// theorem's hypotheses and depends only on `(seed, n_range, theorem, trial)`.
pub fn generate(config: &FuzzConfig, theorem: TheoremId, trial: u64) -> Instance {
    use TheoremId::*;
    let mut rng = trial_rng(config.seed, theorem, trial);
    let n = rng.gen_range(config.n_range[0]..=config.n_range[1]);
    let class = theorem.class();
    let spec = sampling::catalog_spec(
        &mut rng,
        class == Some(ConvexityClass::Superquadratic),
        class == Some(ConvexityClass::StronglyConvex),
    );
    let dom = spec.domain();
    let mut x = sampling::points(&mut rng, n, dom.lo, dom.hi);
    let mut inst = Instance::new(spec, vec![]);
    inst.class = class;
    inst.theorem = Some(theorem);
    match theorem {
        Thm3 | Thm4Lower | Thm4Upper => {
            let q = sampling::simplex(&mut rng, n);
            let p = if rng.gen_bool(0.05) {
                q.clone()
            } else {
                sampling::simplex(&mut rng, n)
            };
            inst.p = Some(p);
            inst.q = Some(q);
        }
        Thm5 | Thm19Lower | Thm19Upper | Thm20Lower | Thm20Upper => {
            x.sort_by(f64::total_cmp);
            let q = sampling::interior_steffensen(&mut rng, n);
            let mut p = if rng.gen_bool(0.05) {
                q.clone()
            } else {
                sampling::steffensen(&mut rng, n, 1.0)
            };
            let mut q = q;
            let distinct = x.windows(2).all(|w| w[0] < w[1]);
            if theorem == Thm5 && distinct {
                let perm = sampling::permutation(&mut rng, n);
                let apply = |v: &[f64]| perm.iter().map(|&i| v[i]).collect::<Vec<_>>();
                x = apply(&x);
                p = apply(&p);
                q = apply(&q);
            }
            inst.p = Some(p);
            inst.q = Some(q);
        }
        Thm6 | Thm6Convex => {
            x.sort_by(f64::total_cmp);
            let total = rng.gen_range(0.2..=3.0);
            inst.a = Some(sampling::steffensen(&mut rng, n, total));
            if rng.gen_bool(0.6) {
                inst.c = Some(rng.gen_range(dom.lo..=dom.hi));
            }
        }
        _ => {
            inst.a = Some(sampling::simplex(&mut rng, n));
            if theorem.is_lambda() {
                inst.lambda = Some(sampling::lambda(&mut rng, n));
            }
            if class == Some(ConvexityClass::PhiConvex) {
                inst.error_scale = Some(rng.gen_range(0.0..=3.0));
            }
        }
    }
    inst.x = x;
    inst
}

/// A violation confirmed by both evaluation paths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Counterexample {
    pub theorem: TheoremId,
    pub instance: Instance,
    /// `-slack`, positive.
    pub violation: f64,
    pub allowance: f64,
    pub shrink_steps: usize,
    pub report: BoundReport,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CheckOutcome {
    Pass(BoundReport),
    /// The report fails but the plain recomputation does not (or vice versa).
    Unconfirmed(BoundReport),
    Violation(Box<Counterexample>),
}

impl CheckOutcome {
    pub fn report(&self) -> &BoundReport {
        match self {
            CheckOutcome::Pass(r) | CheckOutcome::Unconfirmed(r) => r,
            CheckOutcome::Violation(c) => &c.report,
        }
    }
}

/// Evaluates `theorem` through the bounds module and through the plain
/// recomputation, requiring both to agree within tolerance.
pub fn check(inst: &Instance, theorem: TheoremId, tol: Tolerance) -> Result<CheckOutcome> {
    let report = evaluate(inst, theorem, tol)?;
    let chain = naive::recompute(inst, theorem)?;
    let allowed = |a: f64, b: f64| (a - b).abs() <= tol.allowance(report.scale) || a == b;
    let pairs = [
        ("lhs", report.lhs, chain.lhs),
        ("mid", report.mid.unwrap_or(0.0), chain.mid.unwrap_or(0.0)),
        ("rhs", report.rhs, chain.rhs),
    ];
    for (what, reported, recomputed) in pairs {
        if !allowed(reported, recomputed) {
            return Err(Error::OracleMismatch {
                what: format!("{theorem} {what}"),
                reported,
                recomputed,
            });
        }
    }
    let naive_fails = chain.slack() < -report.allowance || chain.slack().is_nan();
    Ok(match (report.pass, naive_fails) {
        (true, false) => CheckOutcome::Pass(report),
        (false, true) => CheckOutcome::Violation(Box::new(Counterexample {
            theorem,
            instance: inst.clone(),
            violation: -report.slack,
            allowance: report.allowance,
            shrink_steps: 0,
            report,
        })),
        _ => CheckOutcome::Unconfirmed(report),
    })
}

/// One row of a λ sweep: `λ_i = t` for every `i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub t: f64,
    pub report: BoundReport,
}

pub fn sweep_lambda(
    inst: &Instance,
    theorem: TheoremId,
    grid_density: usize,
    tol: Tolerance,
) -> Result<Vec<SweepRow>> {
    if !theorem.is_lambda() {
        return Err(Error::InvalidArgument(format!(
            "{theorem} has no λ parameter; sweep needs one of thm1_sandwich, thm1_upper, thm8, thm10, thm12, thm14, thm16, thm18"
        )));
    }
    if grid_density < 2 {
        return Err(Error::InvalidArgument(format!(
            "grid density must be >= 2, got {grid_density}"
        )));
    }
    uniform_grid(0.0, 1.0, grid_density)
        .into_iter()
        .map(|t| {
            let mut probe = inst.clone();
            probe.lambda = Some(vec![t; inst.x.len()]);
            Ok(SweepRow {
                t,
                report: evaluate(&probe, theorem, tol)?,
            })
        })
        .collect()
}

/// Outcome of sampling `D(y) = f(y) − f(z) − f′(z)(y−z) − s·Φ(|y−z|)` around `z`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeVerdict {
    pub z: f64,
    pub samples: usize,
    pub min_d: f64,
    /// Largest increase of `D` between consecutive samples left of `z`.
    pub left_increase: f64,
    /// Largest decrease of `D` between consecutive samples right of `z`.
    pub right_decrease: f64,
    pub passed: bool,
}

/// Probe floor for `D` and step tolerance for the monotone pattern.
pub const PROBE_FLOOR: f64 = 1e-12;

pub fn monotonicity_probe(
    spec: &FunctionSpec,
    z: f64,
    grid_density: usize,
) -> Result<ProbeVerdict> {
    monotonicity_probe_scaled(spec, 1.0, z, grid_density)
}

/// As [`monotonicity_probe`] with Φ replaced by `phi_scale·Φ`. The pairing is
/// certified first; a failed certification is a violated hypothesis.
pub fn monotonicity_probe_scaled(
    spec: &FunctionSpec,
    phi_scale: f64,
    z: f64,
    grid_density: usize,
) -> Result<ProbeVerdict> {
    let dom = spec.domain();
    dom.check(z)?;
    let cert = certify_derivative_superadditive(spec, phi_scale, 64, Tolerance::default())?;
    if !cert.passed {
        return Err(Error::HypothesisViolated(format!(
            "f' is not Phi'-superadditive for Phi scaled by {phi_scale} (min slack {} at {:?})",
            cert.min_slack, cert.worst
        )));
    }
    let d = |y: f64| {
        let h = y - z;
        spec.tangent_excess(z, h) + (1.0 - phi_scale) * spec.modulus_value(h.abs())
    };
    let left: Vec<f64> = uniform_grid(dom.lo, z, grid_density)
        .into_iter()
        .map(d)
        .collect();
    let right: Vec<f64> = uniform_grid(z, dom.hi, grid_density)
        .into_iter()
        .map(d)
        .collect();
    let min_d = left
        .iter()
        .chain(&right)
        .copied()
        .fold(f64::INFINITY, f64::min);
    let step = |w: &[f64]| w[1] - w[0];
    let left_increase = left.windows(2).map(step).fold(0.0f64, f64::max);
    let right_decrease = right.windows(2).map(|w| -step(w)).fold(0.0f64, f64::max);
    let step_tol = |v: f64| PROBE_FLOOR * (1.0 + v.abs());
    let monotone = left.windows(2).all(|w| w[1] - w[0] <= step_tol(w[0]))
        && right.windows(2).all(|w| w[0] - w[1] <= step_tol(w[0]));
    Ok(ProbeVerdict {
        z,
        samples: left.len() + right.len(),
        min_d,
        left_increase,
        right_decrease,
        passed: monotone && min_d >= -PROBE_FLOOR,
    })
}

/// Per-theorem campaign statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremStats {
    pub trials: u64,
    pub passed: u64,
    pub unconfirmed: u64,
    pub counterexamples: u64,
    pub errors: u64,
    /// Reports carrying a note (e.g. `c` outside `[x_1, x_n]`).
    pub flagged: u64,
    pub min_slack: Option<f64>,
    /// Smallest `slack / allowance`; below `-1` is a failure.
    pub min_slack_ratio: Option<f64>,
}

impl TheoremStats {
    fn new() -> Self {
        TheoremStats {
            trials: 0,
            passed: 0,
            unconfirmed: 0,
            counterexamples: 0,
            errors: 0,
            flagged: 0,
            min_slack: None,
            min_slack_ratio: None,
        }
    }

    fn observe(&mut self, r: &BoundReport) {
        let fmin = |cur: Option<f64>, v: f64| Some(cur.map_or(v, |c| c.min(v)));
        self.min_slack = fmin(self.min_slack, r.slack);
        self.min_slack_ratio = fmin(self.min_slack_ratio, r.slack / r.allowance);
        if !r.notes.is_empty() {
            self.flagged += 1;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialError {
    pub theorem: TheoremId,
    pub trial: u64,
    pub message: String,
}

/// Violations of a sign variant evaluated next to its theorem; reported, not failed on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariantFinding {
    pub evaluated_with: TheoremId,
    pub stats: TheoremStats,
    pub example: Option<Counterexample>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FuzzSummary {
    pub version: String,
    pub config: FuzzConfig,
    pub theorems: BTreeMap<TheoremId, TheoremStats>,
    pub confirmed_counterexamples: u64,
    /// Shrunk counterexamples, at most [`MAX_STORED`] per theorem.
    pub counterexamples: Vec<Counterexample>,
    pub errors: Vec<TrialError>,
    pub variant_findings: BTreeMap<TheoremId, VariantFinding>,
}

impl FuzzSummary {
    /// Campaign verdict: no confirmed counterexamples and no evaluation errors.
    pub fn clean(&self) -> bool {
        self.confirmed_counterexamples == 0 && self.errors.is_empty()
    }
}

pub const MAX_STORED: usize = 5;

/// Sign variants evaluated alongside a theorem on the same instances.
fn variants(theorem: TheoremId) -> &'static [TheoremId] {
    match theorem {
        TheoremId::Thm13 => &[TheoremId::Thm13Printed],
        _ => &[],
    }
}

type TrialResult = (Result<CheckOutcome>, Vec<Result<CheckOutcome>>);

fn tally(
    theorem: TheoremId,
    results: Vec<(u64, Result<CheckOutcome>)>,
    tol: Tolerance,
    stats: &mut TheoremStats,
    stored: &mut Vec<Counterexample>,
    cap: usize,
    errors: &mut Vec<TrialError>,
) {
    for (trial, res) in results {
        stats.trials += 1;
        match res {
            Ok(outcome) => {
                stats.observe(outcome.report());
                match outcome {
                    CheckOutcome::Pass(_) => stats.passed += 1,
                    CheckOutcome::Unconfirmed(_) => stats.unconfirmed += 1,
                    CheckOutcome::Violation(cex) => {
                        stats.counterexamples += 1;
                        if stored.len() < cap {
                            stored.push(shrink(*cex, tol));
                        }
                    }
                }
            }
            Err(e) => {
                stats.errors += 1;
                errors.push(TrialError {
                    theorem,
                    trial,
                    message: e.to_string(),
                });
            }
        }
    }
}

/// Runs the campaign. Trials run in parallel; results are merged in trial
/// order so the summary depends only on the config.
pub fn run_fuzz(config: &FuzzConfig) -> Result<FuzzSummary> {
    config.validate()?;
    let tol = config.tolerance();
    let mut summary = FuzzSummary {
        version: env!("CARGO_PKG_VERSION").to_string(),
        config: config.clone(),
        theorems: BTreeMap::new(),
        confirmed_counterexamples: 0,
        counterexamples: Vec::new(),
        errors: Vec::new(),
        variant_findings: BTreeMap::new(),
    };
    for theorem in config.active_theorems() {
        let results: Vec<TrialResult> = (0..config.trials)
            .into_par_iter()
            .map(|trial| {
                let inst = generate(config, theorem, trial);
                let main = check(&inst, theorem, tol);
                let extra = variants(theorem)
                    .iter()
                    .map(|&v| check(&inst, v, tol))
                    .collect();
                (main, extra)
            })
            .collect();
        let mut main = Vec::with_capacity(results.len());
        let mut extra: Vec<Vec<(u64, Result<CheckOutcome>)>> =
            vec![Vec::new(); variants(theorem).len()];
        for (trial, (m, e)) in results.into_iter().enumerate() {
            main.push((trial as u64, m));
            for (slot, r) in e.into_iter().enumerate() {
                extra[slot].push((trial as u64, r));
            }
        }
        let mut stats = TheoremStats::new();
        let mut stored = Vec::new();
        tally(
            theorem,
            main,
            tol,
            &mut stats,
            &mut stored,
            MAX_STORED,
            &mut summary.errors,
        );
        summary.confirmed_counterexamples += stats.counterexamples;
        summary.counterexamples.extend(stored);
        summary.theorems.insert(theorem, stats);

        for (&variant, results) in variants(theorem).iter().zip(extra) {
            let mut vstats = TheoremStats::new();
            let mut vstored = Vec::new();
            let mut verrors = Vec::new();
            tally(
                variant,
                results,
                tol,
                &mut vstats,
                &mut vstored,
                1,
                &mut verrors,
            );
            summary.errors.extend(verrors);
            summary.variant_findings.insert(
                variant,
                VariantFinding {
                    evaluated_with: theorem,
                    stats: vstats,
                    example: vstored.into_iter().next(),
                },
            );
        }
    }
    Ok(summary)
}

#[cfg(test)]
mod tests;
