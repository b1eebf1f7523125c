//! First-passage functionals of a single GBM regime, the recursive payoff of a
//! fixed four-threshold region structure, and a min-max grid search over it.
//!
//! The region structure: player I switches `1 → 2` on `[x12, ∞)` and `2 → 1`
//! on `(0, y21]`; player II switches `1 → 2` on `[x'12, ∞)` and never back.
//! `y21 = 0` and `x12 = ∞` turn player I's rules off, `x'12 = ∞` turns
//! player II off.

use alloc::vec::Vec;

use crate::math::{abs, ln, map_indexed, powf};
use crate::model::{GameSpec, ModelError, Regime};

/// Bad input to a passage functional or the search.
#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum HittingError {
    /// A state or barrier is not positive.
    #[error("state and barriers must be positive")]
    NonPositive,
    /// `x` is not between the two barriers.
    #[error("x = {x} is not between the barriers {a} and {b}")]
    OutsideInterval {
        /// State.
        x: f64,
        /// First barrier.
        a: f64,
        /// Second barrier.
        b: f64,
    },
    /// Thresholds violate `y21 < x'12 < x12`.
    #[error("thresholds must satisfy 0 <= y21 < x'12 < x12 (got {0}, {1}, {2})")]
    Ordering(f64, f64, f64),
    /// The cycle denominator `1 − R1 R1` is not positive.
    #[error("cycle denominator {0} is not positive")]
    Denominator(f64),
    /// No feasible tuple on the grids.
    #[error("no feasible threshold tuple on the grids")]
    EmptyGrid,
    /// The spec has no finite no-switch value.
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Passage functionals of the diffusion of one joint regime.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PassageFunctionals {
    m_plus: f64,
    m_minus: f64,
    k: f64,
    gamma: f64,
}

fn is_barrier(a: f64) -> bool {
    a >= 0.0 && !a.is_nan()
}

impl PassageFunctionals {
    /// Functionals of regime `(i, j)`.
    pub fn new(spec: &GameSpec, i: Regime, j: Regime) -> Result<PassageFunctionals, HittingError> {
        let d = crate::model::derive(spec, i, j)?;
        Ok(PassageFunctionals { m_plus: d.m_plus, m_minus: d.m_minus, k: d.k, gamma: spec.gamma })
    }

    /// `K x^γ`.
    pub fn no_switch(&self, x: f64) -> f64 {
        if x == 0.0 {
            0.0
        } else {
            self.k * powf(x, self.gamma)
        }
    }

    /// `R1(x, a) = E[e^{−rτ_a}]`. A barrier at `0` or `∞` is never hit.
    pub fn r1(&self, x: f64, a: f64) -> Result<f64, HittingError> {
        if !(x > 0.0 && x.is_finite() && is_barrier(a)) {
            return Err(HittingError::NonPositive);
        }
        Ok(if a == x {
            1.0
        } else if a == 0.0 || a.is_infinite() {
            0.0
        } else if a > x {
            powf(x / a, self.m_plus)
        } else {
            powf(x / a, self.m_minus)
        })
    }

    /// `R2(x, a, b) = R1(x, a) R1(a, b)`.
    pub fn r2(&self, x: f64, a: f64, b: f64) -> Result<f64, HittingError> {
        let first = self.r1(x, a)?;
        if first == 0.0 {
            return Ok(0.0);
        }
        Ok(first * self.r1(a, b)?)
    }

    /// `R3(x, a, b) = E[e^{−rτ_a} 1{τ_a < τ_b}]` for `x` between `a` and `b`.
    pub fn r3(&self, x: f64, a: f64, b: f64) -> Result<f64, HittingError> {
        if !(x > 0.0 && x.is_finite() && is_barrier(a) && is_barrier(b)) {
            return Err(HittingError::NonPositive);
        }
        if !((a <= x && x <= b) || (b <= x && x <= a)) || a == b {
            return Err(HittingError::OutsideInterval { x, a, b });
        }
        if x == a {
            return Ok(1.0);
        }
        if x == b || a == 0.0 || a.is_infinite() {
            return Ok(0.0);
        }
        if b == 0.0 || b.is_infinite() {
            return self.r1(x, a);
        }
        let (p, q) = (self.m_plus, self.m_minus);
        let t = powf(b / a, p - q);
        let (ua, la) = (powf(x / a, p), powf(x / a, q));
        Ok(if t > 1.0 {
            let s = 1.0 / t;
            (ua * s - la) / (s - 1.0)
        } else {
            (ua - la * t) / (1.0 - t)
        })
    }

    /// `F1(x, a) = E[∫_0^{τ_a} e^{−rs} X_s^γ ds] = V̂(x) − R1(x, a) V̂(a)`.
    pub fn f1(&self, x: f64, a: f64) -> Result<f64, HittingError> {
        let r = self.r1(x, a)?;
        if r == 0.0 {
            return Ok(self.no_switch(x));
        }
        Ok(self.no_switch(x) - r * self.no_switch(a))
    }

    /// `F2(x, a, b) = E[∫_{τ_a}^{τ_ab} e^{−rs} X_s^γ ds] = R1(x, a) F1(a, b)`.
    pub fn f2(&self, x: f64, a: f64, b: f64) -> Result<f64, HittingError> {
        let r = self.r1(x, a)?;
        if r == 0.0 {
            return Ok(0.0);
        }
        Ok(r * self.f1(a, b)?)
    }

    /// `F3(x, a, b) = E[∫_0^{τ_a ∧ τ_b} e^{−rs} X_s^γ ds]`.
    pub fn f3(&self, x: f64, a: f64, b: f64) -> Result<f64, HittingError> {
        let mut v = self.no_switch(x);
        for (near, far) in [(a, b), (b, a)] {
            let w = self.r3(x, near, far)?;
            if w != 0.0 {
                v -= w * self.no_switch(near);
            }
        }
        Ok(v)
    }
}

/// `R1` of regime `(i, j)`.
pub fn laplace_hit(spec: &GameSpec, i: Regime, j: Regime, x: f64, a: f64) -> Result<f64, HittingError> {
    PassageFunctionals::new(spec, i, j)?.r1(x, a)
}

/// `R2` of regime `(i, j)`.
pub fn laplace_two_stage(spec: &GameSpec, i: Regime, j: Regime, x: f64, a: f64, b: f64) -> Result<f64, HittingError> {
    PassageFunctionals::new(spec, i, j)?.r2(x, a, b)
}

/// `R3` of regime `(i, j)`.
pub fn laplace_exit(spec: &GameSpec, i: Regime, j: Regime, x: f64, a: f64, b: f64) -> Result<f64, HittingError> {
    PassageFunctionals::new(spec, i, j)?.r3(x, a, b)
}

/// `F1` of regime `(i, j)`.
pub fn profit_until(spec: &GameSpec, i: Regime, j: Regime, x: f64, a: f64) -> Result<f64, HittingError> {
    PassageFunctionals::new(spec, i, j)?.f1(x, a)
}

/// The region thresholds.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RegionTuple {
    /// Player I switches `2 → 1` at or below this level (`0`: never).
    pub y21: f64,
    /// Player II switches `1 → 2` at or above this level (`∞`: never).
    pub x12_prime: f64,
    /// Player I switches `1 → 2` at or above this level (`∞`: never).
    pub x12: f64,
}

impl RegionTuple {
    /// Checked constructor.
    pub fn new(y21: f64, x12_prime: f64, x12: f64) -> Result<RegionTuple, HittingError> {
        let t = RegionTuple { y21, x12_prime, x12 };
        if t.is_feasible() {
            Ok(t)
        } else {
            Err(HittingError::Ordering(y21, x12_prime, x12))
        }
    }

    /// `0 ≤ y21 < x'12 < x12`, where an infinite `x'12` drops the constraints
    /// that involve it.
    pub fn is_feasible(&self) -> bool {
        let RegionTuple { y21, x12_prime, x12 } = *self;
        if !(y21 >= 0.0 && y21.is_finite() && x12 > 0.0 && x12_prime > 0.0 && y21 < x12) {
            return false;
        }
        x12_prime.is_infinite() || (y21 < x12_prime && x12_prime < x12)
    }
}

// Player I's up/down cycle with player II frozen in `col`.
#[derive(Clone, Copy, Debug)]
struct Cycle {
    low: PassageFunctionals,
    high: PassageFunctionals,
    c12: f64,
    c21: f64,
    y21: f64,
    x12: f64,
    // J_high(x12); unused when x12 = ∞.
    high_at_x12: f64,
}

impl Cycle {
    fn new(spec: &GameSpec, col: Regime, y21: f64, x12: f64) -> Result<Cycle, HittingError> {
        let low = PassageFunctionals::new(spec, Regime::One, col)?;
        let high = PassageFunctionals::new(spec, Regime::Two, col)?;
        let mut c = Cycle { low, high, c12: spec.c12(), c21: spec.c21(), y21, x12, high_at_x12: 0.0 };
        if x12.is_finite() {
            let down = high.r1(x12, y21)?;
            let up = low.r1(y21.max(f64::MIN_POSITIVE), x12)?;
            let den = 1.0 - down * up;
            if !(den > 0.0) {
                return Err(HittingError::Denominator(den));
            }
            let mut num = high.f1(x12, y21)?;
            if down != 0.0 {
                num += down * (-c.c21 + low.f1(y21, x12)? - up * c.c12);
            }
            c.high_at_x12 = num / den;
        }
        Ok(c)
    }

    fn low_at(&self, x: f64) -> Result<f64, HittingError> {
        if x >= self.x12 {
            return Ok(-self.c12 + self.high_at(x)?);
        }
        let r = self.low.r1(x, self.x12)?;
        let mut v = self.low.f1(x, self.x12)?;
        if r != 0.0 {
            v += r * (-self.c12 + self.high_at_x12);
        }
        Ok(v)
    }

    fn high_at(&self, x: f64) -> Result<f64, HittingError> {
        if x <= self.y21 {
            return Ok(-self.c21 + self.low_at(x)?);
        }
        let r = self.high.r1(x, self.y21)?;
        let mut v = self.high.f1(x, self.y21)?;
        if r != 0.0 {
            v += r * (-self.c21 + self.low_at(self.y21)?);
        }
        Ok(v)
    }

    fn fixed_point_residual(&self) -> Result<f64, HittingError> {
        if self.x12.is_infinite() {
            return Ok(0.0);
        }
        let again = self.high.f1(self.x12, self.y21)?
            + self.high.r1(self.x12, self.y21)? * (-self.c21 + self.low_at(self.y21.max(f64::MIN_POSITIVE))?);
        Ok(abs(again - self.high_at_x12) / self.high_at_x12.abs().max(1.0))
    }
}

/// Payoffs `J_ij` of the strategy pair encoded by a [`RegionTuple`].
#[derive(Clone, Copy, Debug)]
pub struct JValues {
    tuple: RegionTuple,
    col2: Cycle,
    col1: Option<Cycle>,
    f11: PassageFunctionals,
    f21: PassageFunctionals,
    chi12: f64,
}

impl JValues {
    /// Solves the column-2 cycle (and column 1 when player II never moves).
    pub fn new(spec: &GameSpec, tuple: RegionTuple) -> Result<JValues, HittingError> {
        if !tuple.is_feasible() {
            return Err(HittingError::Ordering(tuple.y21, tuple.x12_prime, tuple.x12));
        }
        let col2 = Cycle::new(spec, Regime::Two, tuple.y21, tuple.x12)?;
        let col1 = if tuple.x12_prime.is_infinite() {
            Some(Cycle::new(spec, Regime::One, tuple.y21, tuple.x12)?)
        } else {
            None
        };
        Ok(JValues {
            tuple,
            col2,
            col1,
            f11: PassageFunctionals::new(spec, Regime::One, Regime::One)?,
            f21: PassageFunctionals::new(spec, Regime::Two, Regime::One)?,
            chi12: spec.chi12(),
        })
    }

    /// The tuple.
    pub fn tuple(&self) -> RegionTuple {
        self.tuple
    }

    /// `J22` at `x12` from the linear solve (`None` when `x12 = ∞`).
    pub fn cycle_value(&self) -> Option<f64> {
        self.tuple.x12.is_finite().then_some(self.col2.high_at_x12)
    }

    /// Relative residual of the `J22(x12)` fixed-point equation.
    pub fn fixed_point_residual(&self) -> Result<f64, HittingError> {
        let mut worst = self.col2.fixed_point_residual()?;
        if let Some(c) = &self.col1 {
            worst = worst.max(c.fixed_point_residual()?);
        }
        Ok(worst)
    }

    /// `J_ij(x)`.
    pub fn at(&self, i: Regime, j: Regime, x: f64) -> Result<f64, HittingError> {
        if !(x > 0.0 && x.is_finite()) {
            return Err(HittingError::NonPositive);
        }
        match (j, &self.col1) {
            (Regime::Two, _) => match i {
                Regime::One => self.col2.low_at(x),
                Regime::Two => self.col2.high_at(x),
            },
            (Regime::One, Some(c)) => match i {
                Regime::One => c.low_at(x),
                Regime::Two => c.high_at(x),
            },
            (Regime::One, None) => match i {
                Regime::One => self.j11(x),
                Regime::Two => self.j21(x),
            },
        }
    }

    /// All four values, indexed `[i][j]`.
    pub fn all(&self, x: f64) -> Result<[[f64; 2]; 2], HittingError> {
        let mut out = [[0.0; 2]; 2];
        for i in Regime::ALL {
            for j in Regime::ALL {
                out[i.index()][j.index()] = self.at(i, j, x)?;
            }
        }
        Ok(out)
    }

    fn j11(&self, x: f64) -> Result<f64, HittingError> {
        let xp = self.tuple.x12_prime;
        if x >= xp {
            return Ok(self.chi12 + self.col2.low_at(x)?);
        }
        Ok(self.f11.f1(x, xp)? + self.f11.r1(x, xp)? * (self.chi12 + self.col2.low_at(xp)?))
    }

    fn j21(&self, x: f64) -> Result<f64, HittingError> {
        let RegionTuple { y21, x12_prime: xp, .. } = self.tuple;
        if x >= xp {
            return Ok(self.chi12 + self.col2.high_at(x)?);
        }
        if x <= y21 {
            return Ok(-self.col2.c21 + self.j11(x)?);
        }
        let mut v = self.f21.f3(x, y21, xp)? + self.f21.r3(x, xp, y21)? * (self.chi12 + self.col2.high_at(xp)?);
        let down = self.f21.r3(x, y21, xp)?;
        if down != 0.0 {
            v += down * (-self.col2.c21 + self.j11(y21)?);
        }
        Ok(v)
    }
}

/// `J_ij(x)` for all four starting regimes.
pub fn j_values(spec: &GameSpec, x: f64, tuple: RegionTuple) -> Result<[[f64; 2]; 2], HittingError> {
    JValues::new(spec, tuple)?.all(x)
}

/// `n` log-spaced points on `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return alloc::vec![lo];
    }
    let (a, b) = (ln(lo), ln(hi));
    (0..n).map(|k| if k + 1 == n { hi } else { crate::math::exp(a + (b - a) * k as f64 / (n - 1) as f64) }).collect()
}

/// Candidate thresholds for each coordinate of the tuple.
#[derive(Clone, Debug, PartialEq)]
pub struct SearchGrids {
    /// Candidates for `y21`; include `0` to allow "never".
    pub y21: Vec<f64>,
    /// Candidates for `x'12`; include `∞` to allow "never".
    pub x12_prime: Vec<f64>,
    /// Candidates for `x12`; include `∞` to allow "never".
    pub x12: Vec<f64>,
}

/// Default points per threshold.
pub const DEFAULT_GRID_POINTS: usize = 64;

impl SearchGrids {
    /// The same log grid on `[lo, hi]` for every coordinate.
    pub fn uniform(lo: f64, hi: f64, n: usize) -> SearchGrids {
        let g = log_grid(lo, hi, n);
        SearchGrids { y21: g.clone(), x12_prime: g.clone(), x12: g }
    }
}

/// One evaluated tuple.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SurfacePoint {
    /// The tuple.
    pub tuple: RegionTuple,
    /// `J_ij(x)` under it.
    pub value: f64,
}

/// Result of [`threshold_search`].
#[derive(Clone, Debug, PartialEq)]
pub struct SearchResult {
    /// Min-max optimal tuple.
    pub best: RegionTuple,
    /// `J_ij(x)` at `best`.
    pub value: f64,
    /// `min over x'12 of max over (y21, x12)`.
    pub minmax: f64,
    /// `max over (y21, x12) of min over x'12`.
    pub maxmin: f64,
    /// `|minmax − maxmin|`.
    pub gap: f64,
    /// Twice the largest value change between `best` and a neighbouring cell.
    pub cell_tolerance: f64,
    /// Every feasible tuple, ordered by `(x'12, y21, x12)` grid index.
    pub surface: Vec<SurfacePoint>,
}

/// Exhaustive min-max search of `J_ij(x)` over the grids.
///
/// Ties go to the smallest grid index.
pub fn threshold_search(
    spec: &GameSpec,
    start: (Regime, Regime),
    x: f64,
    grids: &SearchGrids,
) -> Result<SearchResult, HittingError> {
    let (ny, nx) = (grids.y21.len(), grids.x12.len());
    let inner = ny * nx;
    // table[k][p]: x'12 index k, (y21, x12) index p = iy * nx + ix
    let table: Vec<Vec<Option<f64>>> = map_indexed(grids.x12_prime.len(), |k| {
        (0..inner)
            .map(|p| {
                let t = RegionTuple { y21: grids.y21[p / nx], x12_prime: grids.x12_prime[k], x12: grids.x12[p % nx] };
                if !t.is_feasible() {
                    return Ok(None);
                }
                JValues::new(spec, t)?.at(start.0, start.1, x).map(Some)
            })
            .collect::<Result<Vec<_>, _>>()
    })
    .into_iter()
    .collect::<Result<_, _>>()?;

    let mut best: Option<(usize, usize, f64)> = None;
    for (k, row) in table.iter().enumerate() {
        let mut row_best: Option<(usize, f64)> = None;
        for (p, v) in row.iter().enumerate() {
            if let Some(v) = *v {
                if row_best.is_none_or(|(_, b)| v > b) {
                    row_best = Some((p, v));
                }
            }
        }
        if let Some((p, v)) = row_best {
            if best.is_none_or(|(_, _, b)| v < b) {
                best = Some((k, p, v));
            }
        }
    }
    let (bk, bp, minmax) = best.ok_or(HittingError::EmptyGrid)?;

    let mut maxmin = f64::NEG_INFINITY;
    for p in 0..inner {
        let col_min = table.iter().filter_map(|row| row[p]).fold(f64::INFINITY, f64::min);
        if col_min.is_finite() {
            maxmin = maxmin.max(col_min);
        }
    }

    let (by, bx) = (bp / nx, bp % nx);
    let mut cell: f64 = 0.0;
    let neighbours = [(0i64, -1i64, 0i64), (0, 1, 0), (0, 0, -1), (0, 0, 1), (-1, 0, 0), (1, 0, 0)];
    for (dk, dy, dx) in neighbours {
        let (k, y, xx) = (bk as i64 + dk, by as i64 + dy, bx as i64 + dx);
        if k < 0 || y < 0 || xx < 0 || k as usize >= table.len() || y as usize >= ny || xx as usize >= nx {
            continue;
        }
        if let Some(v) = table[k as usize][y as usize * nx + xx as usize] {
            cell = cell.max(abs(v - minmax));
        }
    }

    let mut surface = Vec::new();
    for (k, row) in table.iter().enumerate() {
        for (p, v) in row.iter().enumerate() {
            if let Some(v) = *v {
                let tuple =
                    RegionTuple { y21: grids.y21[p / nx], x12_prime: grids.x12_prime[k], x12: grids.x12[p % nx] };
                surface.push(SurfacePoint { tuple, value: v });
            }
        }
    }
    Ok(SearchResult {
        best: RegionTuple { y21: grids.y21[by], x12_prime: grids.x12_prime[bk], x12: grids.x12[bx] },
        value: minmax,
        minmax,
        maxmin,
        gap: abs(minmax - maxmin),
        cell_tolerance: 2.0 * cell,
        surface,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::rel_close;

    fn spec() -> GameSpec {
        GameSpec::uniform(0.0, 1.0, 0.5, 0.5).with_cost_max(0.5, 0.5).with_cost_min(0.5, 0.5)
    }

    fn pf() -> PassageFunctionals {
        PassageFunctionals::new(&spec(), Regime::One, Regime::One).unwrap()
    }

    #[test]
    fn r1_known_value() {
        let r = pf().r1(1.0, 2.0).unwrap();
        let golden = (1.0 + 5f64.sqrt()) / 2.0;
        assert!(rel_close(r, powf(0.5, golden), 1e-14));
        assert_eq!(pf().r1(1.3, 1.3).unwrap(), 1.0);
        assert_eq!(pf().r1(1.3, f64::INFINITY).unwrap(), 0.0);
        assert_eq!(pf().r1(1.3, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn r3_edges() {
        let p = pf();
        assert_eq!(p.r3(0.5, 0.5, 2.0).unwrap(), 1.0);
        assert_eq!(p.r3(2.0, 0.5, 2.0).unwrap(), 0.0);
        assert!(p.r3(3.0, 0.5, 2.0).is_err());
        let s = p.r3(1.0, 0.5, 2.0).unwrap() + p.r3(1.0, 2.0, 0.5).unwrap();
        assert!(s < 1.0 && s > 0.0);
        assert_eq!(p.r3(1.0, 0.5, f64::INFINITY).unwrap(), p.r1(1.0, 0.5).unwrap());
    }

    #[test]
    fn f_functionals_vanish_at_barrier() {
        let p = pf();
        assert_eq!(p.f1(1.7, 1.7).unwrap(), 0.0);
        assert!(abs(p.f1(1.7, 1e12).unwrap() - p.no_switch(1.7)) < 1e-6);
        assert!(abs(p.f1(1.7, 1e-12).unwrap() - p.no_switch(1.7)) < 1e-6);
        assert_eq!(p.f2(1.0, 0.5, 0.5).unwrap(), 0.0);
        assert!(abs(p.f3(1.0, 0.5, 2.0).unwrap()) < p.no_switch(1.0));
    }

    #[test]
    fn tuple_ordering() {
        assert!(RegionTuple::new(0.5, 1.0, 2.0).is_ok());
        assert!(RegionTuple::new(0.0, f64::INFINITY, f64::INFINITY).is_ok());
        assert!(RegionTuple::new(1.5, 1.0, 2.0).is_err());
        assert!(RegionTuple::new(0.5, 3.0, 2.0).is_err());
    }

    #[test]
    fn never_everywhere_is_no_switch() {
        let s = spec();
        let t = RegionTuple::new(0.0, f64::INFINITY, f64::INFINITY).unwrap();
        let j = j_values(&s, 1.3, t).unwrap();
        let v = pf().no_switch(1.3);
        for row in j {
            for x in row {
                assert!(rel_close(x, v, 1e-14));
            }
        }
    }

    #[test]
    fn fixed_point_holds() {
        let mut s = spec();
        s.drift = [[0.0, 0.0], [0.1, 0.1]];
        let j = JValues::new(&s, RegionTuple::new(0.6, 1.2, 2.5).unwrap()).unwrap();
        assert!(j.fixed_point_residual().unwrap() < 1e-12);
        // Immediate switches above x12.
        let v = j.all(3.0).unwrap();
        assert!(rel_close(v[0][1], -s.c12() + v[1][1], 1e-14));
        assert!(rel_close(v[0][0], s.chi12() + v[0][1], 1e-14));
    }

    #[test]
    fn log_grid_endpoints() {
        let g = log_grid(0.5, 8.0, 5);
        assert_eq!(g[0], 0.5);
        assert_eq!(g[4], 8.0);
        assert!(rel_close(g[2], 2.0, 1e-15));
    }
}
