//! Monte Carlo simulation of the switched process under threshold strategies.
//!
//! The state is stepped exactly in log space within a regime. Switching is
//! checked on the time grid (no bridge correction). Profit over a regime
//! segment `[τ, τ']` is accounted by optional stopping of the martingale
//! `e^{−rt} K X_t^γ + ∫_0^t e^{−rs} X_s^γ ds`, so a path contributes
//! `K x0^γ + Σ e^{−rτ} [(K_new − K_old) X_τ^γ ∓ cost]`. This is unbiased for the
//! payoff and only needs evaluations at switching times.
//!
//! Every path draws from its own ChaCha8 stream `(seed, path index)`, and
//! results are reduced in path order, so serial and parallel runs agree bit
//! for bit.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::closedform::{Region, Solution};
use crate::math::{abs, exp, ln, map_indexed, pairwise_sum, powf, sqrt};
use crate::model::{GameSpec, Regime, RegimeDerived};

/// One player's rule in one of its own regimes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Rule {
    /// Stay.
    Never,
    /// Leave at once.
    Always,
    /// Leave once `x ≥ t`.
    Above(f64),
    /// Leave once `x ≤ t`.
    Below(f64),
}

impl Rule {
    /// Whether the rule fires at `x`.
    #[inline]
    pub fn fires(&self, x: f64) -> bool {
        match *self {
            Rule::Never => false,
            Rule::Always => true,
            Rule::Above(t) => x >= t,
            Rule::Below(t) => x <= t,
        }
    }

    /// Same test in log space.
    #[inline]
    fn fires_log(&self, y: f64, log_t: f64) -> bool {
        match *self {
            Rule::Never => false,
            Rule::Always => true,
            Rule::Above(_) => y >= log_t,
            Rule::Below(_) => y <= log_t,
        }
    }

    fn log_threshold(&self) -> f64 {
        match *self {
            Rule::Above(t) | Rule::Below(t) => ln(t),
            _ => 0.0,
        }
    }

    /// The rule with its threshold multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Rule {
        match *self {
            Rule::Above(t) => Rule::Above(t * factor),
            Rule::Below(t) => Rule::Below(t * factor),
            r => r,
        }
    }

    /// Rule realizing a switching region.
    pub fn from_region(region: Region) -> Rule {
        match region {
            Region::Empty => Rule::Never,
            Region::All => Rule::Always,
            Region::Above(t) => Rule::Above(t),
            Region::Below(t) => Rule::Below(t),
        }
    }
}

/// Threshold rules of both players, indexed by each player's own regime.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThresholdStrategy {
    /// Player I's rule in regime 1 and 2.
    pub max: [Rule; 2],
    /// Player II's rule in regime 1 and 2.
    pub min: [Rule; 2],
}

/// Why a strategy or configuration cannot be simulated.
#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum SimError {
    /// A threshold is not positive and finite.
    #[error("strategy thresholds must be positive and finite")]
    BadThreshold,
    /// The rules depend on the other player's regime.
    #[error("switching region of player {0} depends on the other player's regime")]
    NotThresholdForm(&'static str),
    /// Bad configuration.
    #[error("invalid simulation config: {0}")]
    Config(&'static str),
    /// The spec has no finite no-switch value.
    #[error(transparent)]
    Model(#[from] crate::model::ModelError),
}

impl ThresholdStrategy {
    /// Nobody ever switches.
    pub fn never() -> ThresholdStrategy {
        ThresholdStrategy { max: [Rule::Never; 2], min: [Rule::Never; 2] }
    }

    /// Rules read off a solution's switching regions.
    pub fn from_solution(solution: &Solution) -> Result<ThresholdStrategy, SimError> {
        let r = &solution.regions;
        if r.max[0][0] != r.max[0][1] || r.max[1][0] != r.max[1][1] {
            return Err(SimError::NotThresholdForm("I"));
        }
        if r.min[0][0] != r.min[1][0] || r.min[0][1] != r.min[1][1] {
            return Err(SimError::NotThresholdForm("II"));
        }
        Ok(ThresholdStrategy {
            max: [Rule::from_region(r.max[0][0]), Rule::from_region(r.max[1][0])],
            min: [Rule::from_region(r.min[0][0]), Rule::from_region(r.min[0][1])],
        })
    }

    /// Checks thresholds.
    pub fn validate(&self) -> Result<(), SimError> {
        for rule in self.max.iter().chain(&self.min) {
            if let Rule::Above(t) | Rule::Below(t) = *rule {
                if !(t > 0.0 && t.is_finite()) {
                    return Err(SimError::BadThreshold);
                }
            }
        }
        Ok(())
    }
}

/// Simulation parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimConfig {
    /// Number of paths (pairs count as two when antithetic).
    pub paths: usize,
    /// Time step.
    pub dt: f64,
    /// Truncation horizon.
    pub horizon: f64,
    /// Base seed.
    pub seed: u64,
    /// Pair each path with its mirror image.
    pub antithetic: bool,
}

/// Smallest allowed `r·T`.
pub const MIN_DISCOUNTED_HORIZON: f64 = 20.0;

impl SimConfig {
    /// 10⁴ paths, `dt = 1e-3`, `T = max(20/r, 50)`.
    pub fn for_spec(spec: &GameSpec, seed: u64) -> SimConfig {
        SimConfig {
            paths: 10_000,
            dt: 1e-3,
            horizon: (MIN_DISCOUNTED_HORIZON / spec.discount).max(50.0),
            seed,
            antithetic: false,
        }
    }

    /// Checks the configuration against the spec.
    pub fn validate(&self, spec: &GameSpec) -> Result<(), SimError> {
        if self.paths < 2 {
            return Err(SimError::Config("need at least two paths"));
        }
        if self.antithetic && !self.paths.is_multiple_of(2) {
            return Err(SimError::Config("antithetic runs need an even path count"));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(SimError::Config("dt must be positive"));
        }
        if !(spec.discount * self.horizon >= MIN_DISCOUNTED_HORIZON * (1.0 - 1e-12)) {
            return Err(SimError::Config("discount * horizon must be at least 20"));
        }
        Ok(())
    }

    fn samples(&self) -> usize {
        if self.antithetic {
            self.paths / 2
        } else {
            self.paths
        }
    }
}

/// Mean and standard error of i.i.d. samples.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    /// Sample mean.
    pub mean: f64,
    /// Standard error of the mean.
    pub std_error: f64,
    /// Number of samples.
    pub samples: usize,
}

impl Estimate {
    /// Mean and standard error, summed pairwise in slice order.
    pub fn from_samples(xs: &[f64]) -> Estimate {
        let n = xs.len();
        let mean = pairwise_sum(xs) / n as f64;
        let dev: Vec<f64> = xs.iter().map(|x| (x - mean) * (x - mean)).collect();
        let var = if n > 1 { pairwise_sum(&dev) / (n - 1) as f64 } else { 0.0 };
        Estimate { mean, std_error: sqrt(var / n as f64), samples: n }
    }

    /// `|mean − target|` in standard errors.
    pub fn z_score(&self, target: f64) -> f64 {
        abs(self.mean - target) / self.std_error
    }
}

/// Result of [`simulate_payoff`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PayoffEstimate {
    /// Estimate of `J`.
    pub estimate: Estimate,
    /// Paths whose discounted cost sums broke the a priori bounds.
    pub cost_bound_violations: usize,
    /// Average number of switches per path.
    pub mean_switches: f64,
}

struct Ctx {
    derived: [[RegimeDerived; 2]; 2],
    // Log-space drift and volatility per step, per joint regime.
    mu: [[f64; 2]; 2],
    sig: [[f64; 2]; 2],
    gamma: f64,
    r: f64,
    cost_max: [[f64; 2]; 2],
    cost_min: [[f64; 2]; 2],
    strategy: ThresholdStrategy,
    log_t_max: [f64; 2],
    log_t_min: [f64; 2],
    horizon: f64,
}

impl Ctx {
    fn new(spec: &GameSpec, strategy: &ThresholdStrategy, horizon: f64) -> Result<Ctx, SimError> {
        strategy.validate()?;
        let derived = spec.derive_all()?;
        let mu = spec.drift.map(|_| [0.0; 2]);
        let mut ctx = Ctx {
            derived,
            mu,
            sig: spec.vol,
            gamma: spec.gamma,
            r: spec.discount,
            cost_max: spec.cost_max,
            cost_min: spec.cost_min,
            strategy: *strategy,
            log_t_max: strategy.max.map(|r| r.log_threshold()),
            log_t_min: strategy.min.map(|r| r.log_threshold()),
            horizon,
        };
        for i in 0..2 {
            for j in 0..2 {
                let s = spec.vol[i][j];
                ctx.mu[i][j] = spec.drift[i][j] - 0.5 * s * s;
            }
        }
        Ok(ctx)
    }

    fn absorbing(&self, i: usize, j: usize) -> bool {
        matches!(self.strategy.max[i], Rule::Never) && matches!(self.strategy.min[j], Rule::Never)
    }
}

#[derive(Clone, Copy, Debug)]
struct PathState {
    i: usize,
    j: usize,
    y: f64,
    t: f64,
    // e^{−rt} as of the last switch
    disc: f64,
    payoff: f64,
    sum_c: f64,
    sum_chi: f64,
    switches: u32,
    absorbed: bool,
}

/// A row of a path trace.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TracePoint {
    /// Path index.
    pub path: usize,
    /// Time.
    pub t: f64,
    /// State.
    pub x: f64,
    /// Player I regime.
    pub i: Regime,
    /// Player II regime.
    pub j: Regime,
    /// Expected discounted profit earned so far, net of switching costs.
    pub cumulative: f64,
}

const MAX_SWITCHES_PER_INSTANT: usize = 8;

impl PathState {
    fn start(ctx: &Ctx, i: usize, j: usize, x0: f64) -> PathState {
        let y = ln(x0);
        let mut s = PathState {
            i,
            j,
            y,
            t: 0.0,
            disc: 1.0,
            payoff: ctx.derived[i][j].k * exp(ctx.gamma * y),
            sum_c: 0.0,
            sum_chi: 0.0,
            switches: 0,
            absorbed: false,
        };
        s.apply_switches(ctx);
        s
    }

    fn apply_switches(&mut self, ctx: &Ctx) {
        for _ in 0..MAX_SWITCHES_PER_INSTANT {
            let (i, j) = (self.i, self.j);
            let fire_max = ctx.strategy.max[i].fires_log(self.y, ctx.log_t_max[i]);
            let fire_min = !fire_max && ctx.strategy.min[j].fires_log(self.y, ctx.log_t_min[j]);
            if !fire_max && !fire_min {
                break;
            }
            self.disc = exp(-ctx.r * self.t);
            let xg = exp(ctx.gamma * self.y);
            let (ni, nj) = if fire_max { (1 - i, j) } else { (i, 1 - j) };
            let dk = ctx.derived[ni][nj].k - ctx.derived[i][j].k;
            if fire_max {
                let c = self.disc * ctx.cost_max[i][ni];
                self.sum_c += c;
                self.payoff += self.disc * dk * xg - c;
            } else {
                let c = self.disc * ctx.cost_min[j][nj];
                self.sum_chi += c;
                self.payoff += self.disc * dk * xg + c;
            }
            self.i = ni;
            self.j = nj;
            self.switches += 1;
        }
        self.absorbed = ctx.absorbing(self.i, self.j);
    }

    #[inline]
    fn step(&mut self, ctx: &Ctx, h: f64, z: f64) {
        let (i, j) = (self.i, self.j);
        self.y += ctx.mu[i][j] * h + ctx.sig[i][j] * sqrt(h) * z;
        self.t += h;
        self.apply_switches(ctx);
    }

    fn finished(&self, ctx: &Ctx) -> bool {
        self.absorbed || self.t >= ctx.horizon * (1.0 - 1e-12)
    }

    fn bounds_ok(&self, ctx: &Ctx, i0: usize, j0: usize) -> bool {
        let tol = 1e-12;
        let max_bound = (-ctx.cost_max[i0][1 - i0]).max(0.0);
        let min_bound = ctx.cost_min[j0][1 - j0].min(0.0);
        -self.sum_c <= max_bound + tol && self.sum_chi >= min_bound - tol
    }

    fn trace_point(&self, ctx: &Ctx, path: usize) -> TracePoint {
        let x = exp(self.y);
        let remaining = exp(-ctx.r * self.t) * ctx.derived[self.i][self.j].k * powf(x, ctx.gamma);
        TracePoint {
            path,
            t: self.t,
            x,
            i: Regime::ALL[self.i],
            j: Regime::ALL[self.j],
            cumulative: self.payoff - remaining,
        }
    }
}

fn path_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

fn steps_of(config: &SimConfig) -> (usize, f64) {
    let n = libm::ceil(config.horizon / config.dt).max(1.0) as usize;
    (n, config.horizon / n as f64)
}

struct PathOutcome {
    payoff: f64,
    bounds_ok: bool,
    switches: u32,
}

fn run_path(ctx: &Ctx, start: (usize, usize), x0: f64, config: &SimConfig, index: usize, sign: f64) -> PathOutcome {
    let mut rng = path_rng(config.seed, index);
    let (n, h) = steps_of(config);
    let mut s = PathState::start(ctx, start.0, start.1, x0);
    for _ in 0..n {
        if s.finished(ctx) {
            break;
        }
        let z: f64 = rng.sample(StandardNormal);
        s.step(ctx, h, sign * z);
    }
    PathOutcome { payoff: s.payoff, bounds_ok: s.bounds_ok(ctx, start.0, start.1), switches: s.switches }
}

/// Estimates the payoff of `strategy` from joint regime `start` at `spec.x0`.
pub fn simulate_payoff(
    spec: &GameSpec,
    strategy: &ThresholdStrategy,
    start: (Regime, Regime),
    config: &SimConfig,
) -> Result<PayoffEstimate, SimError> {
    config.validate(spec)?;
    let ctx = Ctx::new(spec, strategy, config.horizon)?;
    let st = (start.0.index(), start.1.index());
    let outcomes = map_indexed(config.samples(), |k| {
        let a = run_path(&ctx, st, spec.x0, config, k, 1.0);
        if config.antithetic {
            let b = run_path(&ctx, st, spec.x0, config, k, -1.0);
            PathOutcome {
                payoff: 0.5 * (a.payoff + b.payoff),
                bounds_ok: a.bounds_ok && b.bounds_ok,
                switches: a.switches + b.switches,
            }
        } else {
            a
        }
    });
    let payoffs: Vec<f64> = outcomes.iter().map(|o| o.payoff).collect();
    let switches: Vec<f64> = outcomes.iter().map(|o| o.switches as f64).collect();
    Ok(PayoffEstimate {
        estimate: Estimate::from_samples(&payoffs),
        cost_bound_violations: outcomes.iter().filter(|o| !o.bounds_ok).count(),
        mean_switches: pairwise_sum(&switches) / config.paths as f64,
    })
}

/// Estimates at `dt` and `dt/2` on the same Brownian paths.
///
/// Each coarse step draws two normals; the fine path takes them one per half
/// step and the coarse path their normalized sum. The third estimate is the
/// per-path difference `fine − coarse`, whose standard error measures how
/// precisely the discretization effect is resolved.
pub fn simulate_refinement(
    spec: &GameSpec,
    strategy: &ThresholdStrategy,
    start: (Regime, Regime),
    config: &SimConfig,
) -> Result<[Estimate; 3], SimError> {
    config.validate(spec)?;
    let ctx = Ctx::new(spec, strategy, config.horizon)?;
    let (i0, j0) = (start.0.index(), start.1.index());
    let (n, h) = steps_of(config);
    let pairs = map_indexed(config.paths, |k| {
        let mut rng = path_rng(config.seed, k);
        let mut coarse = PathState::start(&ctx, i0, j0, spec.x0);
        let mut fine = coarse;
        for _ in 0..n {
            if coarse.finished(&ctx) && fine.finished(&ctx) {
                break;
            }
            let z1: f64 = rng.sample(StandardNormal);
            let z2: f64 = rng.sample(StandardNormal);
            if !coarse.finished(&ctx) {
                coarse.step(&ctx, h, (z1 + z2) * core::f64::consts::FRAC_1_SQRT_2);
            }
            if !fine.finished(&ctx) {
                fine.step(&ctx, 0.5 * h, z1);
                if !fine.finished(&ctx) {
                    fine.step(&ctx, 0.5 * h, z2);
                }
            }
        }
        (coarse.payoff, fine.payoff)
    });
    let c: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let f: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let d: Vec<f64> = pairs.iter().map(|p| p.1 - p.0).collect();
    Ok([Estimate::from_samples(&c), Estimate::from_samples(&f), Estimate::from_samples(&d)])
}

/// Per-path traces for the first `paths` paths (at most 100), sampled every
/// `every` steps and at every switch.
pub fn trace_paths(
    spec: &GameSpec,
    strategy: &ThresholdStrategy,
    start: (Regime, Regime),
    config: &SimConfig,
    paths: usize,
    every: usize,
) -> Result<Vec<TracePoint>, SimError> {
    config.validate(spec)?;
    let ctx = Ctx::new(spec, strategy, config.horizon)?;
    let (n, h) = steps_of(config);
    let every = every.max(1);
    let mut out = Vec::new();
    for k in 0..paths.min(100).min(config.paths) {
        let mut rng = path_rng(config.seed, k);
        let mut s = PathState::start(&ctx, start.0.index(), start.1.index(), spec.x0);
        out.push(s.trace_point(&ctx, k));
        for step in 0..n {
            if s.finished(&ctx) {
                break;
            }
            let before = s.switches;
            let z: f64 = rng.sample(StandardNormal);
            s.step(&ctx, h, z);
            if s.switches != before || (step + 1) % every == 0 || s.finished(&ctx) {
                out.push(s.trace_point(&ctx, k));
            }
        }
    }
    Ok(out)
}

/// Estimates `E[X_t]` under `strategy`.
pub fn moment_estimate(
    spec: &GameSpec,
    strategy: &ThresholdStrategy,
    start: (Regime, Regime),
    t: f64,
    config: &SimConfig,
) -> Result<Estimate, SimError> {
    let ctx = Ctx::new(spec, strategy, t)?;
    let cfg = SimConfig { horizon: t, ..*config };
    let (n, h) = steps_of(&cfg);
    let xs = map_indexed(config.paths, |k| {
        let mut rng = path_rng(config.seed, k);
        let mut s = PathState::start(&ctx, start.0.index(), start.1.index(), spec.x0);
        for _ in 0..n {
            let z: f64 = rng.sample(StandardNormal);
            s.step(&ctx, h, z);
        }
        exp(s.y)
    });
    Ok(Estimate::from_samples(&xs))
}

/// A deviation tested by [`dominance_probe`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Perturbation {
    /// Multiply player I's threshold in its regime `regime` by `factor`.
    ScaleMax {
        /// Player I regime.
        regime: Regime,
        /// Multiplier.
        factor: f64,
    },
    /// Multiply player II's threshold in its regime `regime` by `factor`.
    ScaleMin {
        /// Player II regime.
        regime: Regime,
        /// Multiplier.
        factor: f64,
    },
    /// Replace player I's rule in `regime`.
    ReplaceMax {
        /// Player I regime.
        regime: Regime,
        /// New rule.
        rule: Rule,
    },
    /// Replace player II's rule in `regime`.
    ReplaceMin {
        /// Player II regime.
        regime: Regime,
        /// New rule.
        rule: Rule,
    },
}

impl Perturbation {
    /// Whether the maximizer deviates.
    pub fn by_max(&self) -> bool {
        matches!(self, Perturbation::ScaleMax { .. } | Perturbation::ReplaceMax { .. })
    }

    /// `strategy` with the deviation applied.
    pub fn apply(&self, strategy: &ThresholdStrategy) -> ThresholdStrategy {
        let mut s = *strategy;
        match *self {
            Perturbation::ScaleMax { regime, factor } => s.max[regime.index()] = s.max[regime.index()].scaled(factor),
            Perturbation::ScaleMin { regime, factor } => s.min[regime.index()] = s.min[regime.index()].scaled(factor),
            Perturbation::ReplaceMax { regime, rule } => s.max[regime.index()] = rule,
            Perturbation::ReplaceMin { regime, rule } => s.min[regime.index()] = rule,
        }
        s
    }
}

/// Outcome of one deviation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProbeResult {
    /// The deviation.
    pub perturbation: Perturbation,
    /// Payoff under the deviation.
    pub estimate: Estimate,
    /// Closed-form value.
    pub value: f64,
    /// Deviation gain for the deviating player, in standard errors.
    pub gain_in_se: f64,
}

impl ProbeResult {
    /// The deviation does not help its author by more than `k` standard errors.
    pub fn holds(&self, k: f64) -> bool {
        self.gain_in_se <= k
    }
}

/// Simulates each deviation from the solution's strategy and compares with `v`.
pub fn dominance_probe(
    solution: &Solution,
    start: (Regime, Regime),
    config: &SimConfig,
    perturbations: &[Perturbation],
) -> Result<Vec<ProbeResult>, SimError> {
    let base = ThresholdStrategy::from_solution(solution)?;
    let spec = &solution.spec;
    let value = solution.value(start.0, start.1).value(spec.x0);
    perturbations
        .iter()
        .map(|p| {
            let est = simulate_payoff(spec, &p.apply(&base), start, config)?.estimate;
            let gain = if p.by_max() { est.mean - value } else { value - est.mean };
            Ok(ProbeResult { perturbation: *p, estimate: est, value, gain_in_se: gain / est.std_error })
        })
        .collect()
}

/// Monte Carlo estimates of the first-passage functionals.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PassageEstimates {
    /// `E[e^{−rτ_a}]`
    pub r1: Estimate,
    /// `E[e^{−rτ_ab}]`, `τ_ab` the first hit of `b` after `τ_a`.
    pub r2: Estimate,
    /// `E[e^{−rτ_a} 1{τ_a < τ_b}]`
    pub r3_a: Estimate,
    /// `E[e^{−rτ_b} 1{τ_b < τ_a}]`
    pub r3_b: Estimate,
    /// `E[∫_0^{τ_a} e^{−rs} X_s^γ ds]`
    pub f1: Estimate,
    /// `E[∫_{τ_a}^{τ_ab} e^{−rs} X_s^γ ds]`
    pub f2: Estimate,
    /// `E[∫_0^{τ_a ∧ τ_b} e^{−rs} X_s^γ ds]`
    pub f3: Estimate,
}

/// Simulates first passages of the `(i, j)` diffusion from `x` to `a < x` and
/// then to `b > x`.
///
/// Barrier crossings inside a step are detected with the exact Brownian
/// bridge probability in log space and dated at mid-step; profit is
/// integrated with the trapezoid rule. Nothing here uses the closed forms.
pub fn passage_estimates(
    spec: &GameSpec,
    i: Regime,
    j: Regime,
    x: f64,
    a: f64,
    b: f64,
    config: &SimConfig,
) -> Result<PassageEstimates, SimError> {
    if !(0.0 < a && a < x && x < b) {
        return Err(SimError::Config("need 0 < a < x < b"));
    }
    config.validate(spec)?;
    let (r, g) = (spec.discount, spec.gamma);
    let s = spec.sigma(i, j);
    let mu = spec.b(i, j) - 0.5 * s * s;
    let (la, lb) = (ln(a), ln(b));
    let (n, h) = steps_of(config);
    let sq = s * sqrt(h);
    let profit = |t0: f64, y0: f64, t1: f64, y1: f64| 0.5 * (t1 - t0) * (exp(-r * t0 + g * y0) + exp(-r * t1 + g * y1));
    let rows = map_indexed(config.paths, |k| {
        let mut rng = path_rng(config.seed, k);
        let mut y = ln(x);
        let mut t = 0.0;
        // [r1, r2, r3_a, r3_b, f1, f2, f3]
        let mut out = [0.0; 7];
        let mut hit_a = false;
        let mut exited = false;
        for _ in 0..n {
            let z: f64 = rng.sample(StandardNormal);
            let u: f64 = rng.random();
            let y1 = y + mu * h + sq * z;
            let t1 = t + h;
            let target = if hit_a { lb } else { la };
            let d0 = if hit_a { target - y } else { y - target };
            let d1 = if hit_a { target - y1 } else { y1 - target };
            let crossed = d1 <= 0.0 || u < exp(-2.0 * d0 * d1 / (s * s * h));
            // Exit from (a, b) before a: only the upper barrier matters here.
            let exit_b = !hit_a && !exited && (lb - y1 <= 0.0 || u < exp(-2.0 * (lb - y) * (lb - y1) / (s * s * h)));
            if crossed {
                let tm = t + 0.5 * h;
                let seg = profit(t, y, tm, target);
                let disc = exp(-r * tm);
                if hit_a {
                    out[5] += seg;
                    out[1] = disc;
                    break;
                }
                out[4] += seg;
                out[0] = disc;
                if !exited {
                    out[6] += seg;
                    out[2] = disc;
                    exited = true;
                }
                hit_a = true;
                y = target;
                t = tm;
                continue;
            }
            if exit_b {
                let tm = t + 0.5 * h;
                out[6] += profit(t, y, tm, lb);
                out[3] = exp(-r * tm);
                exited = true;
            }
            let seg = profit(t, y, t1, y1);
            if hit_a {
                out[5] += seg;
            } else {
                out[4] += seg;
                if !exited && !exit_b {
                    out[6] += seg;
                }
            }
            y = y1;
            t = t1;
        }
        out
    });
    let col = |c: usize| Estimate::from_samples(&rows.iter().map(|row| row[c]).collect::<Vec<_>>());
    Ok(PassageEstimates { r1: col(0), r2: col(1), r3_a: col(2), r3_b: col(3), f1: col(4), f2: col(5), f3: col(6) })
}
