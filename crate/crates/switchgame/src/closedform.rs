//! Explicit solutions for the twenty covered cells.
//!
//! Outside the all-equal case exactly one player's regime moves `K`. That
//! player (the active one) faces a one-player switching problem between its
//! worse regime `L` and better regime `H`; the other player either never
//! switches or always leaves regime 1, which shifts values by a constant.
//!
//! The one-player problem is solved for a maximizer of `w = s·J` with `s = +1`
//! for player I and `s = −1` for player II, and has three shapes:
//!
//! * both own costs positive: `L` switches to `H` above a single threshold `x*`;
//! * `c_LH < 0`: `L` always switches;
//! * `c_HL < 0 < c_LH`: `H` switches down at or below `x_A`, `L` switches up at
//!   or above `x_B`.
//!
//! Thresholds always come from the smooth-fit equations themselves.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::classify::{self, Cell, ClassifyError, CostCondition, OrderCase};
use crate::math::{abs, exp, ln, powf};
use crate::model::{GameSpec, Regime, RegimeDerived};
use crate::piecewise::{Piece, PiecewiseValue};
use crate::roots::{self, RootError};

/// Number of scan points used to bracket the `λ` root.
pub const LAMBDA_SCAN_POINTS: usize = 1024;
/// Shrink applied to both ends of the `λ` bracket.
pub const LAMBDA_BRACKET_SHRINK: f64 = 1e-9;
/// Absolute tolerance on `λ`.
pub const LAMBDA_XTOL: f64 = 1e-13;

/// One of the two players.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Player {
    /// Player I, who maximizes and pays `c`.
    Max,
    /// Player II, who minimizes and pays `χ`.
    Min,
}

/// A switching region of one player in one joint regime.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Region {
    /// Never switch.
    Empty,
    /// Switch on `(0, t]`.
    Below(f64),
    /// Switch on `[t, ∞)`.
    Above(f64),
    /// Always switch.
    All,
}

impl Region {
    /// Whether `x` lies in the region.
    pub fn contains(&self, x: f64) -> bool {
        match *self {
            Region::Empty => false,
            Region::Below(t) => x <= t,
            Region::Above(t) => x >= t,
            Region::All => true,
        }
    }

    /// The boundary point, if any.
    pub fn threshold(&self) -> Option<f64> {
        match *self {
            Region::Below(t) | Region::Above(t) => Some(t),
            _ => None,
        }
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Region::Empty => write!(f, "empty"),
            Region::Below(t) => write!(f, "(0, {t:.16e}]"),
            Region::Above(t) => write!(f, "[{t:.16e}, inf)"),
            Region::All => write!(f, "(0, inf)"),
        }
    }
}

/// Switching regions, indexed `[i][j]` by joint regime.
#[derive(Clone, Debug, PartialEq)]
pub struct Regions {
    /// Player I.
    pub max: [[Region; 2]; 2],
    /// Player II.
    pub min: [[Region; 2]; 2],
}

impl Regions {
    /// Region of `player` in joint regime `(i, j)`.
    pub fn get(&self, player: Player, i: Regime, j: Regime) -> Region {
        match player {
            Player::Max => self.max[i.index()][j.index()],
            Player::Min => self.min[i.index()][j.index()],
        }
    }
}

/// Named thresholds of a solution.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Thresholds {
    /// Single switching threshold.
    pub x_star: Option<f64>,
    /// Lower threshold of a two-threshold cell.
    pub x_a: Option<f64>,
    /// Upper threshold of a two-threshold cell.
    pub x_b: Option<f64>,
    /// `x_A / x_B`.
    pub lambda: Option<f64>,
}

impl Thresholds {
    /// `(name, value)` for every threshold that is set, `λ` excluded.
    pub fn points(&self) -> Vec<(&'static str, f64)> {
        [("x_star", self.x_star), ("x_A", self.x_a), ("x_B", self.x_b)]
            .into_iter()
            .filter_map(|(n, v)| v.map(|v| (n, v)))
            .collect()
    }

    /// `(name, value)` for every set entry, `λ` included.
    pub fn named(&self) -> Vec<(&'static str, f64)> {
        let mut out = self.points();
        if let Some(l) = self.lambda {
            out.push(("lambda", l));
        }
        out
    }
}

/// A non-fatal remark produced while building.
#[derive(Clone, Debug, PartialEq)]
pub enum Warning {
    /// The `λ` scan found several sign changes; the smallest root was used.
    MultipleLambdaRoots(usize),
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Warning::MultipleLambdaRoots(n) => {
                write!(f, "lambda scan found {n} sign changes; using the smallest root")
            }
        }
    }
}

/// A complete explicit solution.
#[derive(Clone, Debug, PartialEq)]
pub struct Solution {
    /// The spec it was built for.
    pub spec: GameSpec,
    /// Cell of the spec.
    pub cell: Cell,
    /// `v_ij`, indexed `[i][j]`.
    pub values: [[PiecewiseValue; 2]; 2],
    /// Switching regions.
    pub regions: Regions,
    /// Thresholds.
    pub thresholds: Thresholds,
    /// Build remarks.
    pub warnings: Vec<Warning>,
}

impl Solution {
    /// `v_ij`
    pub fn value(&self, i: Regime, j: Regime) -> &PiecewiseValue {
        &self.values[i.index()][j.index()]
    }

    /// Constant `C` with `|v_ij(x)| ≤ C (1 + x)` for every `x > 0`.
    ///
    /// Each term is bounded on its own piece: `x^γ ≤ 1 + x`, constants are
    /// bounded, positive powers are capped at the right end of a bounded
    /// piece and negative powers at the left end of a piece away from 0.
    pub fn growth_constant(&self) -> f64 {
        let mut c: f64 = 0.0;
        for v in self.values.iter().flatten() {
            for p in v.pieces() {
                let mut bound = abs(p.coef_gamma) + abs(p.constant);
                for (coef, e) in [(p.coef_mplus, p.m_plus_used), (p.coef_mminus, p.m_minus_used)] {
                    if coef == 0.0 {
                        continue;
                    }
                    let edge = if e > 1.0 {
                        p.hi
                    } else if e < 0.0 {
                        p.lo
                    } else {
                        f64::NAN
                    };
                    // Exponents in [0, 1] never occur; a NaN here makes the bound infinite.
                    bound +=
                        if edge.is_finite() && edge > 0.0 { abs(coef) * powf(edge, e).max(1.0) } else { f64::INFINITY };
                }
                c = c.max(bound);
            }
        }
        c
    }

    /// A copy with every breakpoint at `threshold` moved to `threshold·factor`.
    ///
    /// Coefficients are left unchanged, so the copy violates smooth fit.
    pub fn with_threshold_scaled(&self, threshold: f64, factor: f64) -> Option<Solution> {
        let mut out = self.clone();
        let to = threshold * factor;
        for v in out.values.iter_mut().flatten() {
            *v = v.with_breakpoint_moved(threshold, to)?;
        }
        let fix = |t: &mut Option<f64>| {
            if let Some(x) = t {
                if abs(*x - threshold) <= 1e-12 * threshold {
                    *x = to;
                }
            }
        };
        fix(&mut out.thresholds.x_star);
        fix(&mut out.thresholds.x_a);
        fix(&mut out.thresholds.x_b);
        Some(out)
    }
}

/// Failure to build a solution.
#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum BuildError {
    /// The spec is not in a covered cell.
    #[error(transparent)]
    Classify(#[from] ClassifyError),
    /// The requested cell does not match the spec.
    #[error("spec is in cell {actual}, not {requested}")]
    CellMismatch {
        /// Cell asked for.
        requested: Cell,
        /// Cell of the spec.
        actual: Cell,
    },
    /// Bad arguments to a threshold equation.
    #[error("threshold equation precondition failed: {0}")]
    Precondition(&'static str),
    /// No root of the `λ` equation in its bracket.
    #[error("lambda equation: no root found in ({lo}, {hi})")]
    NoLambdaRoot {
        /// Left end of the scanned bracket.
        lo: f64,
        /// Right end of the scanned bracket.
        hi: f64,
    },
    /// A bracketed root search failed.
    #[error("root search failed: {0}")]
    Root(#[from] RootError),
    /// The smooth-fit system did not converge.
    #[error("smooth-fit system diverged from initial guess x_A={guess_a}, x_B={guess_b} (residual {residual:e})")]
    Diverged {
        /// Initial `x_A`.
        guess_a: f64,
        /// Initial `x_B`.
        guess_b: f64,
        /// Final scaled residual.
        residual: f64,
    },
}

/// `(x*, A)` for the single-threshold shape.
///
/// `A` is the coefficient of `x^{m⁺}` added to the worse regime's no-switch
/// value below `x*`, in the units of the player solving the problem.
pub fn solve_single_threshold(
    k_lo: f64,
    k_hi: f64,
    m_plus: f64,
    gamma: f64,
    cost: f64,
) -> Result<(f64, f64), BuildError> {
    if !(cost > 0.0) {
        return Err(BuildError::Precondition("cost must be positive"));
    }
    if !(k_hi > k_lo) {
        return Err(BuildError::Precondition("Khi must exceed Klo"));
    }
    if !(m_plus > 1.0 && gamma > 0.0 && gamma < 1.0) {
        return Err(BuildError::Precondition("need m+ > 1 > gamma > 0"));
    }
    let d = k_hi - k_lo;
    let x_star = powf(m_plus * cost / ((m_plus - gamma) * d), 1.0 / gamma);
    let a = d * (gamma / m_plus) * powf(x_star, gamma - m_plus);
    Ok((x_star, a))
}

/// The `λ` equation, scaled so it stays bounded on `(0, 1]`.
///
/// With `p = m⁺` of the worse regime, `m = m⁻` of the better one,
/// `c_hl < 0 < c_lh` the own costs down and up:
///
/// `p(m−γ)(1−λ^{p−γ})(c_hl λ^{γ−m} + c_lh λ^γ) − m(p−γ)(λ^{γ−m} − 1)(c_hl + c_lh λ^p)`
pub fn lambda_residual(m_plus: f64, m_minus: f64, gamma: f64, c_hl: f64, c_lh: f64, lambda: f64) -> f64 {
    let (p, m, g) = (m_plus, m_minus, gamma);
    let lg = powf(lambda, g - m);
    p * (m - g) * (1.0 - powf(lambda, p - g)) * (c_hl * lg + c_lh * powf(lambda, g))
        - m * (p - g) * (lg - 1.0) * (c_hl + c_lh * powf(lambda, p))
}

/// Root of the `λ` equation with diagnostics.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LambdaRoot {
    /// `λ = x_A / x_B`.
    pub lambda: f64,
    /// `|g(λ)|` for [`lambda_residual`].
    pub residual: f64,
    /// Sign changes seen on the scan.
    pub sign_changes: usize,
    /// Upper end of the bracket before shrinking.
    pub bracket_hi: f64,
}

/// Solves the `λ` equation on `(0, (−c12/c21)^{1/m⁺})`.
///
/// Arguments follow the row case: `c12 = c_HL < 0 < c21 = c_LH`.
pub fn solve_lambda(m_plus: f64, m_minus: f64, gamma: f64, c12: f64, c21: f64) -> Result<LambdaRoot, BuildError> {
    if !(c12 < 0.0 && c21 > 0.0 && c12 + c21 > 0.0) {
        return Err(BuildError::Precondition("need c12 < 0 < c21 and c12 + c21 > 0"));
    }
    let bracket_hi = powf(-c12 / c21, 1.0 / m_plus);
    let lo = LAMBDA_BRACKET_SHRINK;
    let hi = bracket_hi - LAMBDA_BRACKET_SHRINK;
    let g = |l: f64| lambda_residual(m_plus, m_minus, gamma, c12, c21, l);
    let changes = roots::sign_changes(g, lo, hi, LAMBDA_SCAN_POINTS);
    let &(a, b) = changes.first().ok_or(BuildError::NoLambdaRoot { lo, hi })?;
    let lambda = roots::bisect_secant(g, a, b, LAMBDA_XTOL)?;
    Ok(LambdaRoot { lambda, residual: abs(g(lambda)), sign_changes: changes.len(), bracket_hi })
}

/// Thresholds and coefficients of the two-threshold shape.
///
/// In the solving player's units: the better regime's value is
/// `K_H x^γ + α x^m` on `(x_A, ∞)` and the worse one's is
/// `K_L x^γ + β x^p` on `(0, x_B)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwoThreshold {
    /// Lower threshold.
    pub x_a: f64,
    /// Upper threshold.
    pub x_b: f64,
    /// Coefficient of `x^m` (the better regime's `m⁻`).
    pub alpha: f64,
    /// Coefficient of `x^p` (the worse regime's `m⁺`).
    pub beta: f64,
    /// `x_A / x_B`.
    pub lambda: f64,
}

/// Inputs of the two-threshold problem in the solving player's units.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwoThresholdProblem {
    /// `K_H − K_L > 0`.
    pub d: f64,
    /// Profit exponent.
    pub gamma: f64,
    /// `m⁺` of the worse regime.
    pub p: f64,
    /// `m⁻` of the better regime.
    pub m: f64,
    /// Cost of moving up (worse to better), positive.
    pub c_lh: f64,
    /// Cost of moving down, negative.
    pub c_hl: f64,
}

impl TwoThresholdProblem {
    /// Closed-form route through `λ`.
    pub fn via_lambda(&self) -> Result<(TwoThreshold, LambdaRoot), BuildError> {
        let &TwoThresholdProblem { d, gamma: g, p, m, c_lh, c_hl } = self;
        let root = solve_lambda(p, m, g, c_hl, c_lh)?;
        let l = root.lambda;
        let u = -p * (c_lh * powf(l, m) + c_hl) / ((p - g) * (1.0 - powf(l, m - g)));
        let x_a = powf(u / d, 1.0 / g);
        let alpha = (p * c_hl + (p - g) * u) / (m - p) * powf(x_a, -m);
        let beta = (m * c_hl + (m - g) * u) / (m - p) * powf(x_a, -p);
        Ok((TwoThreshold { x_a, x_b: x_a / l, alpha, beta, lambda: l }, root))
    }

    // Coefficients scaled to the thresholds: α̃ = α x_A^m, β̃ = β x_B^p.
    fn coefficients(&self, a: f64, b: f64) -> (f64, f64) {
        let &TwoThresholdProblem { d, gamma: g, p, m, c_lh, c_hl } = self;
        let l = a / b;
        let (lp, lm) = (powf(l, p), powf(l, -m));
        // [1, −λ^p; λ^{−m}, −1] (α̃, β̃) = (r1, r2)
        let r1 = -c_hl - d * powf(a, g);
        let r2 = c_lh - d * powf(b, g);
        let det = -1.0 + lp * lm;
        let at = (-r1 + lp * r2) / det;
        let bt = (r2 - lm * r1) / det;
        (at, bt)
    }

    /// Derivative mismatch `x h'(x)` at both thresholds, scaled by the costs.
    fn fit_residual(&self, la: f64, lb: f64) -> [f64; 2] {
        let &TwoThresholdProblem { d, gamma: g, p, m, c_lh, c_hl } = self;
        let (a, b) = (exp(la), exp(lb));
        let (at, bt) = self.coefficients(a, b);
        let l = a / b;
        let scale = abs(c_lh) + abs(c_hl);
        [
            (g * d * powf(a, g) + m * at - p * bt * powf(l, p)) / scale,
            (g * d * powf(b, g) + m * at * powf(l, -m) - p * bt) / scale,
        ]
    }

    /// Direct solve of the four smooth-fit equations from an initial guess.
    ///
    /// Value matching at both thresholds is linear in `(α, β)` and solved
    /// exactly; damped Newton on `(ln x_A, ln x_B)` then zeroes the
    /// derivative mismatch.
    pub fn solve_system(&self, guess_a: f64, guess_b: f64) -> Result<TwoThreshold, BuildError> {
        let norm = |r: [f64; 2]| abs(r[0]).max(abs(r[1]));
        let mut z = [ln(guess_a), ln(guess_b)];
        let mut r = self.fit_residual(z[0], z[1]);
        for _ in 0..100 {
            if norm(r) < 1e-15 || !(z[0] < z[1]) {
                break;
            }
            let h = 1e-6;
            let mut jac = [[0.0; 2]; 2];
            for k in 0..2 {
                let (mut zp, mut zm) = (z, z);
                zp[k] += h;
                zm[k] -= h;
                let (rp, rm) = (self.fit_residual(zp[0], zp[1]), self.fit_residual(zm[0], zm[1]));
                jac[0][k] = (rp[0] - rm[0]) / (2.0 * h);
                jac[1][k] = (rp[1] - rm[1]) / (2.0 * h);
            }
            let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
            if det == 0.0 || !det.is_finite() {
                break;
            }
            let dz = [-(r[0] * jac[1][1] - jac[0][1] * r[1]) / det, -(jac[0][0] * r[1] - jac[1][0] * r[0]) / det];
            let mut t = 1.0;
            let mut improved = false;
            for _ in 0..40 {
                let cand = [z[0] + t * dz[0], z[1] + t * dz[1]];
                let rc = self.fit_residual(cand[0], cand[1]);
                if cand[0] < cand[1] && norm(rc) < norm(r) {
                    z = cand;
                    r = rc;
                    improved = true;
                    break;
                }
                t *= 0.5;
            }
            if !improved {
                break;
            }
        }
        let residual = norm(r);
        if !(residual < 1e-10) || !(z[0] < z[1]) {
            return Err(BuildError::Diverged { guess_a, guess_b, residual });
        }
        let (a, b) = (exp(z[0]), exp(z[1]));
        let (at, bt) = self.coefficients(a, b);
        Ok(TwoThreshold { x_a: a, x_b: b, alpha: at * powf(a, -self.m), beta: bt * powf(b, -self.p), lambda: a / b })
    }
}

/// `(x_A, x_B, A, B)` for a two-threshold cell, in value units.
///
/// `A` multiplies `x^{m⁻}` in the better regime, `B` multiplies `x^{m⁺}` in
/// the worse one.
pub fn solve_two_threshold(spec: &GameSpec, cell: Cell) -> Result<(f64, f64, f64, f64), BuildError> {
    let derived = spec.derive_all().map_err(ClassifyError::from)?;
    let own = own_problem(spec, &derived, cell.case).ok_or(BuildError::Precondition("cell has no active player"))?;
    if !(own.c_hl < 0.0) {
        return Err(BuildError::Precondition("cell is not a two-threshold cell"));
    }
    let (tt, _) = own.two_threshold()?;
    Ok((tt.x_a, tt.x_b, own.sign * tt.alpha, own.sign * tt.beta))
}

/// The `λ` equation as set up for a two-threshold cell.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LambdaSetup {
    /// `m⁺` of the worse regime.
    pub m_plus: f64,
    /// `m⁻` of the better regime.
    pub m_minus: f64,
    /// Own cost of moving from the better to the worse regime (negative).
    pub c_hl: f64,
    /// Own cost of moving back (positive).
    pub c_lh: f64,
    /// The root found on the scan.
    pub root: LambdaRoot,
}

/// Runs the `λ` route for `cell`; `None` when the active player has no
/// two-threshold shape there.
pub fn lambda_setup(spec: &GameSpec, cell: Cell) -> Result<Option<LambdaSetup>, BuildError> {
    let derived = spec.derive_all().map_err(ClassifyError::from)?;
    let Some(own) = own_problem(spec, &derived, cell.case) else {
        return Ok(None);
    };
    if !(own.c_hl < 0.0 && own.c_lh > 0.0) {
        return Ok(None);
    }
    let root = solve_lambda(own.p, own.m, own.gamma, own.c_hl, own.c_lh)?;
    Ok(Some(LambdaSetup { m_plus: own.p, m_minus: own.m, c_hl: own.c_hl, c_lh: own.c_lh, root }))
}

/// The active player's one-player problem.
#[derive(Clone, Copy, Debug)]
struct OwnProblem {
    player: Player,
    low: Regime,
    high: Regime,
    sign: f64,
    // In the solving player's units.
    k_low: f64,
    k_high: f64,
    p: f64,
    m: f64,
    c_lh: f64,
    c_hl: f64,
    gamma: f64,
}

fn own_problem(spec: &GameSpec, derived: &[[RegimeDerived; 2]; 2], case: OrderCase) -> Option<OwnProblem> {
    let (player, low, high) = classify::active_player(case)?;
    let (dl, dh, sign, c_lh, c_hl) = match player {
        Player::Max => (derived[low.index()][0], derived[high.index()][0], 1.0, spec.c(low, high), spec.c(high, low)),
        Player::Min => {
            (derived[0][low.index()], derived[0][high.index()], -1.0, spec.chi(low, high), spec.chi(high, low))
        }
    };
    Some(OwnProblem {
        player,
        low,
        high,
        sign,
        k_low: sign * dl.k,
        k_high: sign * dh.k,
        p: dl.m_plus,
        m: dh.m_minus,
        c_lh,
        c_hl,
        gamma: spec.gamma,
    })
}

impl OwnProblem {
    fn two_threshold(&self) -> Result<(TwoThreshold, LambdaRoot), BuildError> {
        let prob = TwoThresholdProblem {
            d: self.k_high - self.k_low,
            gamma: self.gamma,
            p: self.p,
            m: self.m,
            c_lh: self.c_lh,
            c_hl: self.c_hl,
        };
        let (guess, root) = prob.via_lambda()?;
        Ok((prob.solve_system(guess.x_a, guess.x_b)?, root))
    }

    /// Values of the low and high regime (value units), their regions and thresholds.
    fn solve(&self) -> Result<OwnSolution, BuildError> {
        let g = self.gamma;
        let inf = f64::INFINITY;
        let s = self.sign;
        let mut thresholds = Thresholds::default();
        let mut warnings = Vec::new();
        let (w_low, w_high, r_low, r_high) = if self.c_lh < 0.0 {
            // The worse regime is left immediately.
            (
                PiecewiseValue::power(g, self.k_high, -self.c_lh),
                PiecewiseValue::power(g, self.k_high, 0.0),
                Region::All,
                Region::Empty,
            )
        } else if self.c_hl > 0.0 {
            let (x, a) = solve_single_threshold(self.k_low, self.k_high, self.p, g, self.c_lh)?;
            thresholds.x_star = Some(x);
            let low = PiecewiseValue::new(
                g,
                alloc::vec![
                    Piece::power(0.0, x, self.k_low, 0.0).with_mplus(a, self.p),
                    Piece::power(x, inf, self.k_high, -self.c_lh),
                ],
            )
            .expect("threshold is positive and finite");
            (low, PiecewiseValue::power(g, self.k_high, 0.0), Region::Above(x), Region::Empty)
        } else {
            let (tt, root) = self.two_threshold()?;
            if root.sign_changes > 1 {
                warnings.push(Warning::MultipleLambdaRoots(root.sign_changes));
            }
            thresholds.x_a = Some(tt.x_a);
            thresholds.x_b = Some(tt.x_b);
            thresholds.lambda = Some(tt.lambda);
            let cont_low = |lo, hi| Piece::power(lo, hi, self.k_low, 0.0).with_mplus(tt.beta, self.p);
            let cont_high = |lo, hi| Piece::power(lo, hi, self.k_high, 0.0).with_mminus(tt.alpha, self.m);
            let low = PiecewiseValue::new(
                g,
                alloc::vec![cont_low(0.0, tt.x_b), {
                    let mut p = cont_high(tt.x_b, inf);
                    p.constant = -self.c_lh;
                    p
                }],
            )
            .expect("thresholds are ordered");
            let high = PiecewiseValue::new(
                g,
                alloc::vec![
                    {
                        let mut p = cont_low(0.0, tt.x_a);
                        p.constant = -self.c_hl;
                        p
                    },
                    cont_high(tt.x_a, inf),
                ],
            )
            .expect("thresholds are ordered");
            (low, high, Region::Above(tt.x_b), Region::Below(tt.x_a))
        };
        let to_value = |w: PiecewiseValue| if s > 0.0 { w } else { w.negated() };
        let mut values = [PiecewiseValue::power(g, 0.0, 0.0), PiecewiseValue::power(g, 0.0, 0.0)];
        let mut regions = [Region::Empty; 2];
        values[self.low.index()] = to_value(w_low);
        values[self.high.index()] = to_value(w_high);
        regions[self.low.index()] = r_low;
        regions[self.high.index()] = r_high;
        Ok(OwnSolution { values, regions, thresholds, warnings })
    }
}

struct OwnSolution {
    values: [PiecewiseValue; 2],
    regions: [Region; 2],
    thresholds: Thresholds,
    warnings: Vec<Warning>,
}

/// Regions of a player that never moves `K`: leave regime 1 at once when
/// paid to, otherwise stay.
fn passive_regions(cost12: f64) -> [Region; 2] {
    if cost12 < 0.0 {
        [Region::All, Region::Empty]
    } else {
        [Region::Empty, Region::Empty]
    }
}

/// Classifies `spec` and builds its solution.
pub fn solve(spec: &GameSpec) -> Result<Solution, BuildError> {
    let cell = classify::classify(spec)?;
    build(spec, cell.case, cell.condition)
}

/// Builds the solution of `spec`, which must lie in cell `(case, condition)`.
pub fn build(spec: &GameSpec, case: OrderCase, condition: CostCondition) -> Result<Solution, BuildError> {
    let requested = Cell { case, condition };
    let actual = classify::classify(spec)?;
    if actual != requested {
        return Err(BuildError::CellMismatch { requested, actual });
    }
    let derived = spec.derive_all().map_err(ClassifyError::from)?;
    let g = spec.gamma;
    let empty = [[Region::Empty; 2]; 2];
    let mut regions = Regions { max: empty, min: empty };
    let mut thresholds = Thresholds::default();
    let mut warnings = Vec::new();

    let mut values: [[PiecewiseValue; 2]; 2] = match own_problem(spec, &derived, case) {
        None => core::array::from_fn(|i| core::array::from_fn(|j| PiecewiseValue::power(g, derived[i][j].k, 0.0))),
        Some(own) => {
            let sol = own.solve()?;
            thresholds = sol.thresholds;
            warnings = sol.warnings;
            match own.player {
                Player::Max => {
                    regions.max = [[sol.regions[0]; 2], [sol.regions[1]; 2]];
                    core::array::from_fn(|i| [sol.values[i].clone(), sol.values[i].clone()])
                }
                Player::Min => {
                    regions.min = [sol.regions, sol.regions];
                    [sol.values.clone(), sol.values]
                }
            }
        }
    };

    let active = classify::active_player(case).map(|(p, _, _)| p);
    if active != Some(Player::Max) {
        let r = passive_regions(spec.c12());
        regions.max = [[r[0]; 2], [r[1]; 2]];
        if spec.c12() < 0.0 {
            values[0] = [values[1][0].shifted(-spec.c12()), values[1][1].shifted(-spec.c12())];
        }
    }
    if active != Some(Player::Min) {
        let r = passive_regions(spec.chi12());
        regions.min = [r, r];
        if spec.chi12() < 0.0 {
            for row in values.iter_mut() {
                row[0] = row[1].shifted(spec.chi12());
            }
        }
    }

    Ok(Solution { spec: spec.clone(), cell: actual, values, regions, thresholds, warnings })
}

/// Human-readable region summary, one line per player and joint regime.
pub fn regions_summary(solution: &Solution) -> String {
    use core::fmt::Write;
    let mut s = String::new();
    let _ = writeln!(s, "cell {}", solution.cell);
    for (name, player) in [("max", Player::Max), ("min", Player::Min)] {
        for i in Regime::ALL {
            for j in Regime::ALL {
                let _ = writeln!(s, "{name} ({i},{j}): {}", solution.regions.get(player, i, j));
            }
        }
    }
    for w in &solution.warnings {
        let _ = writeln!(s, "warning: {w}");
    }
    s
}
