//! Problem specification, validation of the standing assumptions and the
//! per-regime constants `m⁺`, `m⁻`, `K`.

use alloc::vec::Vec;
use core::fmt;

use crate::math::{abs, powf, sqrt};

/// One of the two regimes available to each player.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Regime {
    /// Regime 1.
    One,
    /// Regime 2.
    Two,
}

impl Regime {
    /// Both regimes in index order.
    pub const ALL: [Regime; 2] = [Regime::One, Regime::Two];

    /// Zero-based array index.
    #[inline]
    pub fn index(self) -> usize {
        match self {
            Regime::One => 0,
            Regime::Two => 1,
        }
    }

    /// The regime a switch leads to.
    #[inline]
    pub fn other(self) -> Regime {
        match self {
            Regime::One => Regime::Two,
            Regime::Two => Regime::One,
        }
    }

    /// One-based label as printed in output files.
    pub fn label(self) -> u8 {
        self.index() as u8 + 1
    }

    /// Inverse of [`Regime::label`].
    pub fn from_label(label: u8) -> Option<Regime> {
        match label {
            1 => Some(Regime::One),
            2 => Some(Regime::Two),
            _ => None,
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.label())
    }
}

/// A full problem instance.
///
/// Arrays are indexed `[i][j]` with `i` the regime of player I and `j` the
/// regime of player II (zero-based). Diagonal entries of the cost matrices
/// are unused and must be zero.
#[derive(Clone, Debug, PartialEq)]
pub struct GameSpec {
    /// Growth rate `b_ij`.
    pub drift: [[f64; 2]; 2],
    /// Volatility `σ_ij`.
    pub vol: [[f64; 2]; 2],
    /// Discount rate `r`.
    pub discount: f64,
    /// Profit exponent `γ`.
    pub gamma: f64,
    /// Player I switching costs `c_ik`.
    pub cost_max: [[f64; 2]; 2],
    /// Player II switching costs `χ_jl`.
    pub cost_min: [[f64; 2]; 2],
    /// Initial state.
    pub x0: f64,
}

impl GameSpec {
    /// Same `(b, σ)` in every joint regime.
    pub fn uniform(drift: f64, vol: f64, discount: f64, gamma: f64) -> GameSpec {
        GameSpec {
            drift: [[drift; 2]; 2],
            vol: [[vol; 2]; 2],
            discount,
            gamma,
            cost_max: [[0.0; 2]; 2],
            cost_min: [[0.0; 2]; 2],
            x0: 1.0,
        }
    }

    /// Sets `(c12, c21)`.
    pub fn with_cost_max(mut self, c12: f64, c21: f64) -> GameSpec {
        self.cost_max = [[0.0, c12], [c21, 0.0]];
        self
    }

    /// Sets `(χ12, χ21)`.
    pub fn with_cost_min(mut self, chi12: f64, chi21: f64) -> GameSpec {
        self.cost_min = [[0.0, chi12], [chi21, 0.0]];
        self
    }

    /// Sets the initial state.
    pub fn with_x0(mut self, x0: f64) -> GameSpec {
        self.x0 = x0;
        self
    }

    /// Drift of joint regime `(i, j)`.
    #[inline]
    pub fn b(&self, i: Regime, j: Regime) -> f64 {
        self.drift[i.index()][j.index()]
    }

    /// Volatility of joint regime `(i, j)`.
    #[inline]
    pub fn sigma(&self, i: Regime, j: Regime) -> f64 {
        self.vol[i.index()][j.index()]
    }

    /// Player I's cost of switching from `i` to `k` (zero when `i == k`).
    #[inline]
    pub fn c(&self, i: Regime, k: Regime) -> f64 {
        self.cost_max[i.index()][k.index()]
    }

    /// Player II's cost of switching from `j` to `l` (zero when `j == l`).
    #[inline]
    pub fn chi(&self, j: Regime, l: Regime) -> f64 {
        self.cost_min[j.index()][l.index()]
    }

    /// `c12`
    pub fn c12(&self) -> f64 {
        self.cost_max[0][1]
    }

    /// `c21`
    pub fn c21(&self) -> f64 {
        self.cost_max[1][0]
    }

    /// `χ12`
    pub fn chi12(&self) -> f64 {
        self.cost_min[0][1]
    }

    /// `χ21`
    pub fn chi21(&self) -> f64 {
        self.cost_min[1][0]
    }

    /// Growth constant used in the linear growth and moment bounds.
    pub fn rho(&self) -> f64 {
        self.drift.iter().flatten().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Denominator of `K_ij`.
    pub fn k_denominator(&self, i: Regime, j: Regime) -> f64 {
        let (b, s) = (self.b(i, j), self.sigma(i, j));
        let g = self.gamma;
        self.discount - b * g + 0.5 * s * s * g * (1.0 - g)
    }

    /// Per-regime constants for all four joint regimes.
    pub fn derive_all(&self) -> Result<[[RegimeDerived; 2]; 2], ModelError> {
        let d = |i, j| derive(self, i, j);
        Ok([
            [d(Regime::One, Regime::One)?, d(Regime::One, Regime::Two)?],
            [d(Regime::Two, Regime::One)?, d(Regime::Two, Regime::Two)?],
        ])
    }
}

/// A violated standing assumption.
#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    /// Some field is NaN or infinite.
    NonFinite(&'static str),
    /// `γ` outside `(0, 1)`.
    GammaRange(f64),
    /// `r ≤ 0`.
    Discount(f64),
    /// `σ_ij ≤ 0`.
    #[allow(missing_docs)]
    Volatility { i: Regime, j: Regime, value: f64 },
    /// `x0 ≤ 0`.
    InitialState(f64),
    /// A diagonal cost entry is not zero.
    Diagonal(&'static str),
    /// `c12 + c21 ≤ 0`.
    H3Max(f64),
    /// `χ12 + χ21 ≤ 0`.
    H3Min(f64),
    /// `r − bγ + ½σ²γ(1−γ) ≤ 0`.
    #[allow(missing_docs)]
    NoSwitchValue { i: Regime, j: Regime, denominator: f64 },
    /// `r ≤ max b`.
    #[allow(missing_docs)]
    Growth { rho: f64 },
}

impl Violation {
    /// Short assumption label.
    pub fn label(&self) -> &'static str {
        match self {
            Violation::NonFinite(_) => "finite",
            Violation::GammaRange(_) => "gamma-range",
            Violation::Discount(_) | Violation::Volatility { .. } | Violation::InitialState(_) => "positivity",
            Violation::Diagonal(_) => "diagonal",
            Violation::H3Max(_) | Violation::H3Min(_) => "H3",
            Violation::NoSwitchValue { .. } => "no-switch",
            Violation::Growth { .. } => "growth",
        }
    }

    /// Name of the input field the violation is attributed to.
    pub fn field(&self) -> &'static str {
        match self {
            Violation::NonFinite(f) | Violation::Diagonal(f) => f,
            Violation::GammaRange(_) => "gamma",
            Violation::Discount(_) | Violation::Growth { .. } => "discount",
            Violation::Volatility { .. } | Violation::NoSwitchValue { .. } => "vol",
            Violation::InitialState(_) => "x0",
            Violation::H3Max(_) => "cost_max",
            Violation::H3Min(_) => "cost_min",
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NonFinite(field) => write!(f, "{field} is not finite"),
            Violation::GammaRange(g) => write!(f, "gamma out of (0,1): {g}"),
            Violation::Discount(r) => write!(f, "discount must be positive: {r}"),
            Violation::Volatility { i, j, value } => {
                write!(f, "vol[{i}][{j}] must be positive: {value}")
            }
            Violation::InitialState(x) => write!(f, "x0 must be positive: {x}"),
            Violation::Diagonal(field) => write!(f, "{field} diagonal entries must be 0"),
            Violation::H3Max(s) => write!(f, "H3: c12+c21 ≤ 0 (sum {s})"),
            Violation::H3Min(s) => write!(f, "H3: χ12+χ21 ≤ 0 (sum {s})"),
            Violation::NoSwitchValue { i, j, denominator } => {
                write!(f, "no-switch value undefined for regime ({i},{j}): denominator {denominator}")
            }
            Violation::Growth { rho } => {
                write!(f, "growth: discount must exceed max drift {rho}")
            }
        }
    }
}

/// Result of [`validate`]; empty when the spec is usable.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ValidationReport {
    /// Every violated assumption, in check order.
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    /// True when no assumption is violated.
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.violations {
            writeln!(f, "[{}] {}", v.label(), v)?;
        }
        Ok(())
    }
}

/// Checks every standing assumption and lists the violations.
pub fn validate(spec: &GameSpec) -> ValidationReport {
    let mut out = Vec::new();
    let finite = |xs: &[[f64; 2]; 2]| xs.iter().flatten().all(|v| v.is_finite());
    for (name, ok) in [
        ("drift", finite(&spec.drift)),
        ("vol", finite(&spec.vol)),
        ("cost_max", finite(&spec.cost_max)),
        ("cost_min", finite(&spec.cost_min)),
        ("discount", spec.discount.is_finite()),
        ("gamma", spec.gamma.is_finite()),
        ("x0", spec.x0.is_finite()),
    ] {
        if !ok {
            out.push(Violation::NonFinite(name));
        }
    }
    if !out.is_empty() {
        return ValidationReport { violations: out };
    }

    if !(spec.gamma > 0.0 && spec.gamma < 1.0) {
        out.push(Violation::GammaRange(spec.gamma));
    }
    if spec.discount <= 0.0 {
        out.push(Violation::Discount(spec.discount));
    }
    for i in Regime::ALL {
        for j in Regime::ALL {
            let s = spec.sigma(i, j);
            if s <= 0.0 {
                out.push(Violation::Volatility { i, j, value: s });
            }
        }
    }
    if spec.x0 <= 0.0 {
        out.push(Violation::InitialState(spec.x0));
    }
    if spec.cost_max[0][0] != 0.0 || spec.cost_max[1][1] != 0.0 {
        out.push(Violation::Diagonal("cost_max"));
    }
    if spec.cost_min[0][0] != 0.0 || spec.cost_min[1][1] != 0.0 {
        out.push(Violation::Diagonal("cost_min"));
    }
    let sum_c = spec.c12() + spec.c21();
    if sum_c <= 0.0 {
        out.push(Violation::H3Max(sum_c));
    }
    let sum_chi = spec.chi12() + spec.chi21();
    if sum_chi <= 0.0 {
        out.push(Violation::H3Min(sum_chi));
    }
    for i in Regime::ALL {
        for j in Regime::ALL {
            let d = spec.k_denominator(i, j);
            if d <= 0.0 {
                out.push(Violation::NoSwitchValue { i, j, denominator: d });
            }
        }
    }
    let rho = spec.rho();
    if spec.discount <= rho {
        out.push(Violation::Growth { rho });
    }
    ValidationReport { violations: out }
}

/// Errors from the derived-constant computations.
#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum ModelError {
    /// The `K` denominator is not positive.
    #[error("no-switch value undefined for regime ({i},{j}): denominator {denominator}")]
    NoSwitchUndefined {
        /// Player I regime.
        i: Regime,
        /// Player II regime.
        j: Regime,
        /// Offending denominator.
        denominator: f64,
    },
    /// A state argument was not positive.
    #[error("state must be positive, got {0}")]
    NonPositiveState(f64),
}

/// Constants attached to one joint regime.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RegimeDerived {
    /// Positive root of `½σ²m(m−1) + bm − r = 0` (greater than 1).
    pub m_plus: f64,
    /// Negative root of the same quadratic.
    pub m_minus: f64,
    /// No-switch coefficient `1 / (r − bγ + ½σ²γ(1−γ))`.
    pub k: f64,
}

/// Roots of `½σ²m(m−1) + bm − r = 0` as `(m⁺, m⁻)`.
///
/// The smaller root comes from Vieta's product so it keeps full relative
/// precision.
pub fn characteristic_roots(b: f64, sigma: f64, r: f64) -> (f64, f64) {
    let s2 = sigma * sigma;
    let a = 0.5 - b / s2;
    let q = 2.0 * r / s2;
    let m_plus = a + sqrt(a * a + q);
    (m_plus, -q / m_plus)
}

/// `m±` and `K` for joint regime `(i, j)`.
pub fn derive(spec: &GameSpec, i: Regime, j: Regime) -> Result<RegimeDerived, ModelError> {
    let denominator = spec.k_denominator(i, j);
    if denominator <= 0.0 {
        return Err(ModelError::NoSwitchUndefined { i, j, denominator });
    }
    let (m_plus, m_minus) = characteristic_roots(spec.b(i, j), spec.sigma(i, j), spec.discount);
    Ok(RegimeDerived { m_plus, m_minus, k: 1.0 / denominator })
}

/// `V̂_ij(x) = K_ij x^γ`, the value when nobody ever switches.
pub fn no_switch_value(spec: &GameSpec, i: Regime, j: Regime, x: f64) -> Result<f64, ModelError> {
    if x <= 0.0 {
        return Err(ModelError::NonPositiveState(x));
    }
    Ok(derive(spec, i, j)?.k * powf(x, spec.gamma))
}

/// `½σ²m(m−1) + bm − r` relative to the largest of its terms.
pub fn characteristic_residual(b: f64, sigma: f64, r: f64, m: f64) -> f64 {
    let quad = 0.5 * sigma * sigma * m * (m - 1.0);
    let lin = b * m;
    let scale = abs(0.5 * sigma * sigma * m * m).max(abs(lin)).max(r);
    abs(quad + lin - r) / scale
}
