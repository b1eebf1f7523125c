//! Piecewise-analytic value functions.
//!
//! Each piece is `k x^γ + a x^p + b x^q + c` on `[lo, hi)`. The first piece
//! starts at 0 and the last one ends at `+∞`.

use alloc::vec::Vec;

use crate::math::{abs, powf};

/// One analytic piece on `[lo, hi)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Piece {
    /// Left end (inclusive).
    pub lo: f64,
    /// Right end (exclusive), possibly `+∞`.
    pub hi: f64,
    /// Coefficient of `x^γ`.
    pub coef_gamma: f64,
    /// Coefficient of `x^{m_plus_used}`.
    pub coef_mplus: f64,
    /// Coefficient of `x^{m_minus_used}`.
    pub coef_mminus: f64,
    /// Exponent of the A-type term.
    pub m_plus_used: f64,
    /// Exponent of the B-type term.
    pub m_minus_used: f64,
    /// Additive constant.
    pub constant: f64,
}

impl Piece {
    /// `k x^γ + c` on `[lo, hi)`.
    pub fn power(lo: f64, hi: f64, k: f64, constant: f64) -> Piece {
        Piece {
            lo,
            hi,
            coef_gamma: k,
            coef_mplus: 0.0,
            coef_mminus: 0.0,
            m_plus_used: 1.0,
            m_minus_used: -1.0,
            constant,
        }
    }

    /// Adds `a x^p`.
    pub fn with_mplus(mut self, a: f64, p: f64) -> Piece {
        self.coef_mplus = a;
        self.m_plus_used = p;
        self
    }

    /// Adds `b x^q`.
    pub fn with_mminus(mut self, b: f64, q: f64) -> Piece {
        self.coef_mminus = b;
        self.m_minus_used = q;
        self
    }

    /// The power terms as `(coefficient, exponent)`, skipping zero coefficients.
    pub fn terms(&self, gamma: f64) -> impl Iterator<Item = (f64, f64)> {
        [(self.coef_gamma, gamma), (self.coef_mplus, self.m_plus_used), (self.coef_mminus, self.m_minus_used)]
            .into_iter()
            .filter(|&(c, _)| c != 0.0)
    }

    fn eval(&self, gamma: f64, x: f64, order: u8) -> f64 {
        let mut acc = if order == 0 { self.constant } else { 0.0 };
        for (c, e) in self.terms(gamma) {
            acc += match order {
                0 => c * powf(x, e),
                1 => c * e * powf(x, e - 1.0),
                _ => c * e * (e - 1.0) * powf(x, e - 2.0),
            };
        }
        acc
    }

    fn shifted(mut self, c: f64) -> Piece {
        self.constant += c;
        self
    }

    fn negated(mut self) -> Piece {
        self.coef_gamma = -self.coef_gamma;
        self.coef_mplus = -self.coef_mplus;
        self.coef_mminus = -self.coef_mminus;
        self.constant = -self.constant;
        self
    }
}

/// Why a list of pieces does not form a valid partition of `(0, ∞)`.
#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum PiecewiseError {
    /// No pieces.
    #[error("a piecewise value needs at least one piece")]
    Empty,
    /// First piece does not start at 0 or last does not end at `+∞`.
    #[error("pieces must cover (0, ∞)")]
    Coverage,
    /// Neighbouring pieces do not meet or overlap.
    #[error("pieces {0} and {1} are not contiguous")]
    Gap(usize, usize),
    /// A piece has `lo >= hi` or a non-finite coefficient.
    #[error("piece {0} is malformed")]
    Malformed(usize),
}

/// A value function as an ordered list of analytic pieces.
#[derive(Clone, Debug, PartialEq)]
pub struct PiecewiseValue {
    gamma: f64,
    pieces: Vec<Piece>,
}

impl PiecewiseValue {
    /// Checks that `pieces` partition `(0, ∞)`.
    pub fn new(gamma: f64, pieces: Vec<Piece>) -> Result<PiecewiseValue, PiecewiseError> {
        let first = pieces.first().ok_or(PiecewiseError::Empty)?;
        let last = pieces.last().ok_or(PiecewiseError::Empty)?;
        if first.lo != 0.0 || last.hi != f64::INFINITY {
            return Err(PiecewiseError::Coverage);
        }
        for (n, p) in pieces.iter().enumerate() {
            let finite = [p.coef_gamma, p.coef_mplus, p.coef_mminus, p.m_plus_used, p.m_minus_used, p.constant]
                .iter()
                .all(|v| v.is_finite());
            if !(p.lo < p.hi) || !finite {
                return Err(PiecewiseError::Malformed(n));
            }
        }
        for (n, w) in pieces.windows(2).enumerate() {
            if w[0].hi != w[1].lo {
                return Err(PiecewiseError::Gap(n, n + 1));
            }
        }
        Ok(PiecewiseValue { gamma, pieces })
    }

    /// A single piece `k x^γ + c` on `(0, ∞)`.
    pub fn power(gamma: f64, k: f64, constant: f64) -> PiecewiseValue {
        PiecewiseValue { gamma, pieces: alloc::vec![Piece::power(0.0, f64::INFINITY, k, constant)] }
    }

    /// Profit exponent `γ`.
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// The pieces, left to right.
    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    /// Interior breakpoints, increasing.
    pub fn breakpoints(&self) -> impl Iterator<Item = f64> + '_ {
        self.pieces.iter().skip(1).map(|p| p.lo)
    }

    /// The piece containing `x`; a breakpoint belongs to the piece on its right.
    pub fn piece_at(&self, x: f64) -> &Piece {
        let n = self.pieces.partition_point(|p| p.hi <= x);
        &self.pieces[n.min(self.pieces.len() - 1)]
    }

    /// `v(x)`
    pub fn value(&self, x: f64) -> f64 {
        self.piece_at(x).eval(self.gamma, x, 0)
    }

    /// `v'(x)`
    pub fn derivative(&self, x: f64) -> f64 {
        self.piece_at(x).eval(self.gamma, x, 1)
    }

    /// `v''(x)`
    pub fn second_derivative(&self, x: f64) -> f64 {
        self.piece_at(x).eval(self.gamma, x, 2)
    }

    /// Value and first derivative of piece `n` at `x`, ignoring its interval.
    pub fn piece_value(&self, n: usize, x: f64) -> (f64, f64) {
        let p = &self.pieces[n];
        (p.eval(self.gamma, x, 0), p.eval(self.gamma, x, 1))
    }

    /// Distance from `x` to the nearest breakpoint, relative to `x`.
    pub fn breakpoint_distance(&self, x: f64) -> f64 {
        self.breakpoints().map(|b| abs(x - b) / x).fold(f64::INFINITY, f64::min)
    }

    /// `v + c`
    pub fn shifted(&self, c: f64) -> PiecewiseValue {
        PiecewiseValue { gamma: self.gamma, pieces: self.pieces.iter().map(|p| p.shifted(c)).collect() }
    }

    /// `−v`
    pub fn negated(&self) -> PiecewiseValue {
        PiecewiseValue { gamma: self.gamma, pieces: self.pieces.iter().map(|p| p.negated()).collect() }
    }

    /// Moves every breakpoint equal to `from` (relative `1e-12`) to `to`.
    ///
    /// Coefficients are kept, so the result is generally no longer smooth.
    /// Returns `None` when the move would break the ordering of pieces.
    pub fn with_breakpoint_moved(&self, from: f64, to: f64) -> Option<PiecewiseValue> {
        let mut pieces = self.pieces.clone();
        for n in 1..pieces.len() {
            if abs(pieces[n].lo - from) <= 1e-12 * from {
                pieces[n].lo = to;
                pieces[n - 1].hi = to;
            }
        }
        PiecewiseValue::new(self.gamma, pieces).ok()
    }

    /// Mutable access for deliberate corruption in tests and tooling.
    pub fn pieces_mut(&mut self) -> &mut [Piece] {
        &mut self.pieces
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn two_piece() -> PiecewiseValue {
        PiecewiseValue::new(
            0.5,
            vec![Piece::power(0.0, 2.0, 1.0, 0.0).with_mplus(0.25, 2.0), Piece::power(2.0, f64::INFINITY, 3.0, -1.0)],
        )
        .unwrap()
    }

    #[test]
    fn breakpoint_uses_right_piece() {
        let v = two_piece();
        let right = 3.0 * powf(2.0, 0.5) - 1.0;
        assert_eq!(v.value(2.0), right);
        assert_eq!(v.piece_at(1.999_999).coef_mplus, 0.25);
    }

    #[test]
    fn derivatives_by_power_rule() {
        let v = two_piece();
        let x: f64 = 1.5;
        let d1 = 0.5 * powf(x, -0.5) + 0.5 * x;
        let d2 = -0.25 * powf(x, -1.5) + 0.5;
        assert!(abs(v.derivative(x) - d1) < 1e-15);
        assert!(abs(v.second_derivative(x) - d2) < 1e-15);
    }

    #[test]
    fn partition_is_enforced() {
        let gap = vec![Piece::power(0.0, 1.0, 1.0, 0.0), Piece::power(1.5, f64::INFINITY, 1.0, 0.0)];
        assert_eq!(PiecewiseValue::new(0.5, gap), Err(PiecewiseError::Gap(0, 1)));
        let short = vec![Piece::power(0.0, 5.0, 1.0, 0.0)];
        assert_eq!(PiecewiseValue::new(0.5, short), Err(PiecewiseError::Coverage));
        assert_eq!(PiecewiseValue::new(0.5, vec![]), Err(PiecewiseError::Empty));
    }

    #[test]
    fn zero_coefficient_terms_never_evaluated() {
        // x^-3 overflows near zero; a zero coefficient must not turn it into NaN.
        let v =
            PiecewiseValue::new(0.5, vec![Piece::power(0.0, f64::INFINITY, 1.0, 0.0).with_mminus(0.0, -3.0)]).unwrap();
        assert!(v.value(1e-300).is_finite());
    }

    #[test]
    fn move_breakpoint() {
        let v = two_piece().with_breakpoint_moved(2.0, 2.02).unwrap();
        assert_eq!(v.breakpoints().collect::<Vec<_>>(), vec![2.02]);
        assert!(two_piece().with_breakpoint_moved(2.0, f64::INFINITY).is_none());
    }
}
