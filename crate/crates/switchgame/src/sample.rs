//! Random valid specs for a requested cell.

use rand::Rng;

use crate::classify::{Cell, CostCondition, OrderCase, K_AMBIGUOUS_TOL};
use crate::model::GameSpec;

/// Ranges the sampler draws from.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SampleRanges {
    /// Discount rate `r`.
    pub discount: (f64, f64),
    /// Profit exponent `γ`.
    pub gamma: (f64, f64),
    /// Volatility `σ`.
    pub vol: (f64, f64),
    /// Drift as a fraction of `r`, symmetric around 0.
    pub drift_frac: f64,
    /// Positive cost magnitudes.
    pub cost: (f64, f64),
    /// A negative cost is `−u` times the opposite positive cost.
    pub negative_frac: (f64, f64),
    /// Minimum ratio between the two distinct `K` values.
    pub min_k_ratio: f64,
}

impl Default for SampleRanges {
    fn default() -> Self {
        SampleRanges {
            discount: (0.2, 2.0),
            gamma: (0.25, 0.75),
            vol: (0.1, 1.5),
            drift_frac: 0.5,
            cost: (0.2, 2.0),
            negative_frac: (0.2, 0.8),
            min_k_ratio: 1.05,
        }
    }
}

fn draw<R: Rng + ?Sized>(rng: &mut R, (lo, hi): (f64, f64)) -> f64 {
    rng.random_range(lo..=hi)
}

/// A spec that classifies into `cell`, with `x0 = 1`.
pub fn random_spec<R: Rng + ?Sized>(cell: Cell, ranges: &SampleRanges, rng: &mut R) -> GameSpec {
    let r = draw(rng, ranges.discount);
    let gamma = draw(rng, ranges.gamma);
    let k_of = |b: f64, s: f64| 1.0 / (r - b * gamma + 0.5 * s * s * gamma * (1.0 - gamma));
    let group = |rng: &mut R| {
        let b = draw(rng, (-ranges.drift_frac * r, ranges.drift_frac * r));
        let s = draw(rng, ranges.vol);
        (b, s)
    };
    let (lo, hi) = loop {
        let (g1, g2) = (group(rng), group(rng));
        let (k1, k2) = (k_of(g1.0, g1.1), k_of(g2.0, g2.1));
        let ratio = k1.max(k2) / k1.min(k2);
        if ratio >= ranges.min_k_ratio.max(1.0 + 10.0 * K_AMBIGUOUS_TOL) {
            break if k1 < k2 { (g1, g2) } else { (g2, g1) };
        }
    };
    let params = match cell.case {
        OrderCase::Eq => [[lo, lo], [lo, lo]],
        OrderCase::RowLt => [[lo, lo], [hi, hi]],
        OrderCase::RowGt => [[hi, hi], [lo, lo]],
        OrderCase::ColLt => [[lo, hi], [lo, hi]],
        OrderCase::ColGt => [[hi, lo], [hi, lo]],
    };
    let c21 = draw(rng, ranges.cost);
    let chi21 = draw(rng, ranges.cost);
    let mut c12 = draw(rng, ranges.cost);
    let mut chi12 = draw(rng, ranges.cost);
    if matches!(cell.condition, CostCondition::B2 | CostCondition::B4) {
        c12 = -draw(rng, ranges.negative_frac) * c21;
    }
    if matches!(cell.condition, CostCondition::B3 | CostCondition::B4) {
        chi12 = -draw(rng, ranges.negative_frac) * chi21;
    }
    GameSpec {
        drift: params.map(|row| row.map(|p| p.0)),
        vol: params.map(|row| row.map(|p| p.1)),
        discount: r,
        gamma,
        cost_max: [[0.0, c12], [c21, 0.0]],
        cost_min: [[0.0, chi12], [chi21, 0.0]],
        x0: 1.0,
    }
}
