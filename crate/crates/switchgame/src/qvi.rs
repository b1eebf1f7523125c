//! Pointwise check of the Isaacs quasi-variational inequalities.
//!
//! For each joint regime `(i, j)` and state `x` three quantities are formed:
//! the generator residual `G = r v − L v − x^γ`, the maximizer's obstacle gap
//! `v − M[v]` and the minimizer's gap `v − N[v]`. The upper system
//! `max{min[G, v−M], v−N} = 0` and the lower system
//! `min{max[G, v−N], v−M} = 0` must both hold.

use alloc::vec::Vec;
use core::fmt;

use crate::closedform::{Player, Solution};
use crate::math::{abs, exp, ln, powf};
use crate::model::{GameSpec, Regime};
use crate::piecewise::PiecewiseValue;

/// Tolerance on the composite residuals and one-sided inequalities.
pub const RESIDUAL_TOL: f64 = 1e-8;
/// Default number of grid points.
pub const GRID_POINTS: usize = 400;
/// Grid points this close to a breakpoint (relative) are pushed off it.
pub const BREAKPOINT_OFFSET: f64 = 1e-7;
/// [`apply_generator`] refuses points closer than this to a breakpoint.
pub const BREAKPOINT_GUARD: f64 = 1e-12;

/// Error from the pointwise operators.
#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum QviError {
    /// `x` is not positive.
    #[error("x must be positive, got {0}")]
    NonPositive(f64),
    /// `x` sits on a breakpoint where the second derivative is undefined.
    #[error("x = {0} is within 1e-12 of a breakpoint; offset it")]
    NearBreakpoint(f64),
}

fn check_point(pv: &PiecewiseValue, x: f64) -> Result<(), QviError> {
    if !(x > 0.0) {
        return Err(QviError::NonPositive(x));
    }
    if pv.breakpoint_distance(x) < BREAKPOINT_GUARD {
        return Err(QviError::NearBreakpoint(x));
    }
    Ok(())
}

/// `L_ij v(x) = ½σ²x²v'' + b x v'`, evaluated term by term.
pub fn apply_generator(spec: &GameSpec, i: Regime, j: Regime, pv: &PiecewiseValue, x: f64) -> Result<f64, QviError> {
    check_point(pv, x)?;
    let (b, s) = (spec.b(i, j), spec.sigma(i, j));
    let p = pv.piece_at(x);
    Ok(p.terms(pv.gamma()).map(|(c, e)| c * (0.5 * s * s * e * (e - 1.0) + b * e) * powf(x, e)).sum())
}

/// `r v − L_ij v − x^γ`.
///
/// The `x^γ` coefficient is combined before multiplying by `x^γ`, so an exact
/// no-switch term cancels to rounding.
pub fn generator_residual(spec: &GameSpec, i: Regime, j: Regime, pv: &PiecewiseValue, x: f64) -> Result<f64, QviError> {
    check_point(pv, x)?;
    let (b, s, r, g) = (spec.b(i, j), spec.sigma(i, j), spec.discount, spec.gamma);
    let q = |e: f64| r - 0.5 * s * s * e * (e - 1.0) - b * e;
    let p = pv.piece_at(x);
    let mut acc = (p.coef_gamma * q(g) - 1.0) * powf(x, g) + r * p.constant;
    for (c, e) in [(p.coef_mplus, p.m_plus_used), (p.coef_mminus, p.m_minus_used)] {
        if c != 0.0 {
            acc += c * q(e) * powf(x, e);
        }
    }
    Ok(acc)
}

/// `M_ij[v](x) = v_kj(x) − c_ik` with `k` the other regime.
pub fn intervention_max(solution: &Solution, i: Regime, j: Regime, x: f64) -> f64 {
    let k = i.other();
    solution.value(k, j).value(x) - solution.spec.c(i, k)
}

/// `N_ij[v](x) = v_il(x) + χ_jl` with `l` the other regime.
pub fn intervention_min(solution: &Solution, i: Regime, j: Regime, x: f64) -> f64 {
    let l = j.other();
    solution.value(i, l).value(x) + solution.spec.chi(j, l)
}

/// Which branch of the pointwise conditions certifies a point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Tag {
    /// `G = 0`, `v − M ≥ 0`, `v − N ≤ 0`: nobody switches.
    A1,
    /// `G ≥ 0`, `v − M = 0`, `v − N ≤ 0`: the maximizer switches.
    A2,
    /// `v − N = 0`, `min(G, v − M) ≤ 0`: the minimizer switches.
    A3,
    /// None of the above within tolerance.
    Violation,
}

impl Tag {
    /// Label used in reports.
    pub fn label(self) -> &'static str {
        match self {
            Tag::A1 => "A1",
            Tag::A2 => "A2",
            Tag::A3 => "A3",
            Tag::Violation => "violation",
        }
    }
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Tags a point from `G`, `v − M` and `v − N`.
///
/// A minimizer switch takes precedence over a maximizer switch, which takes
/// precedence over continuation.
pub fn tag_point(g: f64, v_minus_m: f64, v_minus_n: f64, tol: f64) -> Tag {
    if abs(v_minus_n) <= tol && g.min(v_minus_m) <= tol {
        Tag::A3
    } else if abs(v_minus_m) <= tol && g >= -tol && v_minus_n <= tol {
        Tag::A2
    } else if abs(g) <= tol && v_minus_m >= -tol && v_minus_n <= tol {
        Tag::A1
    } else {
        Tag::Violation
    }
}

/// Grid used by [`verify`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec {
    /// Number of log-spaced points.
    pub points: usize,
    /// Explicit range; by default one decade beyond the outermost thresholds,
    /// or `[0.01, 100]` without thresholds.
    pub range: Option<(f64, f64)>,
    /// Relative push-off from breakpoints.
    pub offset: f64,
    /// Residual tolerance.
    pub tol: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { points: GRID_POINTS, range: None, offset: BREAKPOINT_OFFSET, tol: RESIDUAL_TOL }
    }
}

/// Log-spaced grid for `solution`, pushed off every breakpoint.
pub fn grid(solution: &Solution, gs: &GridSpec) -> Vec<f64> {
    let (lo, hi) = gs.range.unwrap_or_else(|| {
        let pts = solution.thresholds.points();
        if pts.is_empty() {
            (0.01, 100.0)
        } else {
            let lo = pts.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
            let hi = pts.iter().map(|p| p.1).fold(0.0, f64::max);
            (lo / 10.0, hi * 10.0)
        }
    });
    let breaks: Vec<f64> = solution.values.iter().flatten().flat_map(|v| v.breakpoints()).collect();
    let n = gs.points.max(2);
    let (a, b) = (ln(lo), ln(hi));
    (0..n)
        .map(|k| {
            let mut x = exp(a + (b - a) * k as f64 / (n - 1) as f64);
            for &bp in &breaks {
                if abs(x - bp) <= gs.offset * bp {
                    x = if x >= bp { bp * (1.0 + gs.offset) } else { bp * (1.0 - gs.offset) };
                }
            }
            x
        })
        .collect()
}

/// One row of a [`QviReport`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QviPoint {
    /// State.
    pub x: f64,
    /// Player I regime.
    pub i: Regime,
    /// Player II regime.
    pub j: Regime,
    /// `r v − L v − x^γ`.
    pub g: f64,
    /// `v − M[v]`.
    pub v_minus_m: f64,
    /// `v − N[v]`.
    pub v_minus_n: f64,
    /// `max{min[G, v−M], v−N}`.
    pub upper: f64,
    /// `min{max[G, v−N], v−M}`.
    pub lower: f64,
    /// Certifying branch.
    pub tag: Tag,
}

/// Result of [`verify`].
#[derive(Clone, Debug, PartialEq)]
pub struct QviReport {
    /// One row per grid point and joint regime.
    pub points: Vec<QviPoint>,
    /// Largest `|upper|` or `|lower|`.
    pub worst_residual: f64,
    /// Tolerance used.
    pub tol: f64,
}

impl QviReport {
    /// Both systems hold within tolerance and every point carries a tag.
    pub fn passed(&self) -> bool {
        self.worst_residual <= self.tol && self.points.iter().all(|p| p.tag != Tag::Violation)
    }

    /// Rows of one joint regime.
    pub fn regime(&self, i: Regime, j: Regime) -> impl Iterator<Item = &QviPoint> {
        self.points.iter().filter(move |p| p.i == i && p.j == j)
    }
}

/// Evaluates both systems and the branch tags on a grid.
pub fn verify(spec: &GameSpec, solution: &Solution, gs: &GridSpec) -> QviReport {
    let xs = grid(solution, gs);
    let mut points = Vec::with_capacity(4 * xs.len());
    let mut worst: f64 = 0.0;
    for i in Regime::ALL {
        for j in Regime::ALL {
            let pv = solution.value(i, j);
            for &x in &xs {
                let v = pv.value(x);
                // Grid points are pushed off breakpoints, so this cannot fail;
                // a NaN would surface as a violation anyway.
                let g = generator_residual(spec, i, j, pv, x).unwrap_or(f64::NAN);
                let v_minus_m = v - intervention_max(solution, i, j, x);
                let v_minus_n = v - intervention_min(solution, i, j, x);
                let upper = g.min(v_minus_m).max(v_minus_n);
                let lower = g.max(v_minus_n).min(v_minus_m);
                let r = abs(upper).max(abs(lower));
                worst = if r.is_nan() { f64::INFINITY } else { worst.max(r) };
                let tag = tag_point(g, v_minus_m, v_minus_n, gs.tol);
                points.push(QviPoint { x, i, j, g, v_minus_m, v_minus_n, upper, lower, tag });
            }
        }
    }
    QviReport { points, worst_residual: worst, tol: gs.tol }
}

/// The tag implied by the solution's switching regions at `x`.
///
/// Inside the minimizer's region A3, else inside the maximizer's region A2,
/// else A1.
pub fn expected_tag(solution: &Solution, i: Regime, j: Regime, x: f64) -> Tag {
    if solution.regions.get(Player::Min, i, j).contains(x) {
        Tag::A3
    } else if solution.regions.get(Player::Max, i, j).contains(x) {
        Tag::A2
    } else {
        Tag::A1
    }
}

/// Report points whose tag differs from [`expected_tag`], skipping points
/// within relative distance `skip` of a threshold.
pub fn tag_mismatches<'a>(report: &'a QviReport, solution: &Solution, skip: f64) -> Vec<&'a QviPoint> {
    let thresholds: Vec<f64> = solution.thresholds.points().iter().map(|p| p.1).collect();
    report
        .points
        .iter()
        .filter(|p| !thresholds.iter().any(|t| abs(p.x / t - 1.0) < skip))
        .filter(|p| p.tag != expected_tag(solution, p.i, p.j, p.x))
        .collect()
}

/// Continuity defects of one value function at one breakpoint.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BreakpointJump {
    /// Player I regime.
    pub i: Regime,
    /// Player II regime.
    pub j: Regime,
    /// Breakpoint.
    pub x: f64,
    /// `|Δv| / max(1, |v|)`.
    pub value_jump: f64,
    /// `|x Δv'| / max(1, |x v'|)`.
    pub derivative_jump: f64,
}

/// Value and derivative jumps at every interior breakpoint of every `v_ij`.
///
/// Derivatives enter as `x v'`, which has the units of `v`.
pub fn smooth_fit_check(solution: &Solution) -> Vec<BreakpointJump> {
    let mut out = Vec::new();
    for i in Regime::ALL {
        for j in Regime::ALL {
            let pv = solution.value(i, j);
            for (n, x) in pv.breakpoints().enumerate() {
                let (vl, dl) = pv.piece_value(n, x);
                let (vr, dr) = pv.piece_value(n + 1, x);
                out.push(BreakpointJump {
                    i,
                    j,
                    x,
                    value_jump: abs(vl - vr) / abs(vl).max(abs(vr)).max(1.0),
                    derivative_jump: x * abs(dl - dr) / (x * abs(dl)).max(x * abs(dr)).max(1.0),
                });
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::{CostCondition, OrderCase};
    use crate::closedform::{build, solve};
    use crate::model::derive;

    fn spec() -> GameSpec {
        GameSpec::uniform(0.05, 0.8, 1.0, 0.5).with_cost_max(1.0, 1.0).with_cost_min(1.0, 1.0)
    }

    #[test]
    fn generator_kills_no_switch_value() {
        let s = spec();
        let k = derive(&s, Regime::One, Regime::One).unwrap().k;
        let pv = PiecewiseValue::power(s.gamma, k, 0.0);
        for x in [0.01, 0.5, 2.0, 100.0] {
            let g = generator_residual(&s, Regime::One, Regime::One, &pv, x).unwrap();
            assert!(abs(g) < 1e-12 * powf(x, s.gamma), "{g}");
        }
    }

    #[test]
    fn generator_kills_characteristic_power() {
        let s = spec();
        let d = derive(&s, Regime::One, Regime::Two).unwrap();
        let pv = PiecewiseValue::new(
            s.gamma,
            alloc::vec![crate::Piece::power(0.0, f64::INFINITY, 0.0, 0.0).with_mplus(1.0, d.m_plus)],
        )
        .unwrap();
        let x = 1.7;
        let lv = apply_generator(&s, Regime::One, Regime::Two, &pv, x).unwrap();
        assert!(abs(s.discount * pv.value(x) - lv) < 1e-12);
    }

    #[test]
    fn generator_on_constant() {
        let s = spec();
        let pv = PiecewiseValue::power(s.gamma, 0.0, 0.3);
        assert_eq!(apply_generator(&s, Regime::Two, Regime::Two, &pv, 3.0).unwrap(), 0.0);
        let g = generator_residual(&s, Regime::Two, Regime::Two, &pv, 4.0).unwrap();
        assert!(abs(g - (s.discount * 0.3 - 2.0)) < 1e-15);
    }

    #[test]
    fn generator_refuses_breakpoints() {
        let pv = PiecewiseValue::new(
            0.5,
            alloc::vec![crate::Piece::power(0.0, 2.0, 1.0, 0.0), crate::Piece::power(2.0, f64::INFINITY, 1.0, 0.0)],
        )
        .unwrap();
        assert_eq!(apply_generator(&spec(), Regime::One, Regime::One, &pv, 2.0), Err(QviError::NearBreakpoint(2.0)));
        assert!(apply_generator(&spec(), Regime::One, Regime::One, &pv, 2.0 * (1.0 + 1e-7)).is_ok());
    }

    #[test]
    fn intervention_operators_on_eq_b1() {
        let s = spec();
        let sol = build(&s, OrderCase::Eq, CostCondition::B1).unwrap();
        let x = 3.0;
        let v11 = sol.value(Regime::One, Regime::One).value(x);
        assert!(abs(v11 - intervention_max(&sol, Regime::One, Regime::One, x) - 1.0) < 1e-15);
        assert!(abs(v11 - intervention_min(&sol, Regime::One, Regime::One, x) + 1.0) < 1e-15);
    }

    #[test]
    fn tags_follow_conditions() {
        assert_eq!(tag_point(0.0, 1.0, -1.0, 1e-8), Tag::A1);
        assert_eq!(tag_point(0.5, 0.0, -1.0, 1e-8), Tag::A2);
        assert_eq!(tag_point(-0.5, 1.0, 0.0, 1e-8), Tag::A3);
        assert_eq!(tag_point(0.5, 1.0, -1.0, 1e-8), Tag::Violation);
        assert_eq!(tag_point(0.0, -0.1, -1.0, 1e-8), Tag::Violation);
    }

    #[test]
    fn eq_b1_all_a1() {
        let s = spec();
        let sol = solve(&s).unwrap();
        let rep = verify(&s, &sol, &GridSpec::default());
        assert!(rep.worst_residual < 1e-10, "{}", rep.worst_residual);
        assert!(rep.points.iter().all(|p| p.tag == Tag::A1));
        assert_eq!(rep.points.len(), 4 * GRID_POINTS);
    }

    #[test]
    fn row_lt_b1_tags_split_at_threshold() {
        let mut s = spec();
        s.drift = [[0.0, 0.0], [0.05, 0.05]];
        s.vol = [[1.0; 2]; 2];
        s.cost_max = [[0.0, 0.2], [1.0, 0.0]];
        let sol = solve(&s).unwrap();
        let xs = sol.thresholds.x_star.unwrap();
        let rep = verify(&s, &sol, &GridSpec::default());
        assert!(rep.passed(), "{}", rep.worst_residual);
        for p in rep.regime(Regime::One, Regime::One) {
            if p.x < xs * 0.999 {
                assert_eq!(p.tag, Tag::A1, "x={}", p.x);
            } else if p.x > xs * 1.001 {
                assert_eq!(p.tag, Tag::A2, "x={}", p.x);
            }
        }
    }

    #[test]
    fn corrupted_coefficient_detected() {
        let mut s = spec();
        s.drift = [[0.0, 0.0], [0.05, 0.05]];
        s.vol = [[1.0; 2]; 2];
        s.cost_max = [[0.0, 0.2], [1.0, 0.0]];
        let mut sol = solve(&s).unwrap();
        sol.values[0][0].pieces_mut()[0].coef_mplus *= 1.01;
        let rep = verify(&s, &sol, &GridSpec::default());
        let jumps = smooth_fit_check(&sol);
        let worst_d = jumps.iter().map(|j| j.derivative_jump).fold(0.0, f64::max);
        assert!(rep.worst_residual > 1e-4 || worst_d > 1e-9);
    }
}
