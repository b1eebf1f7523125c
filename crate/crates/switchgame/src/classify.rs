//! Cost sign pattern and `K`-ordering of a spec.

use core::fmt;

use crate::math::{abs, rel_close};
use crate::model::{GameSpec, ModelError, Regime, RegimeDerived};

/// Relative tolerance under which two `K` values count as equal.
pub const K_EQUAL_TOL: f64 = 1e-9;
/// Two `K` values closer than this but not equal are rejected as ambiguous.
pub const K_AMBIGUOUS_TOL: f64 = 1e-6;

/// Sign pattern of the switching costs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CostCondition {
    /// All four costs positive.
    B1,
    /// `c12 < 0`.
    B2,
    /// `χ12 < 0`.
    B3,
    /// `c12 < 0` and `χ12 < 0`.
    B4,
}

impl CostCondition {
    /// All conditions in table order.
    pub const ALL: [CostCondition; 4] = [CostCondition::B1, CostCondition::B2, CostCondition::B3, CostCondition::B4];

    /// Short label.
    pub fn label(self) -> &'static str {
        match self {
            CostCondition::B1 => "B1",
            CostCondition::B2 => "B2",
            CostCondition::B3 => "B3",
            CostCondition::B4 => "B4",
        }
    }

    /// Player I gets paid to leave regime 1.
    pub fn max_negative(self) -> bool {
        matches!(self, CostCondition::B2 | CostCondition::B4)
    }

    /// Player II gets paid to leave regime 1.
    pub fn min_negative(self) -> bool {
        matches!(self, CostCondition::B3 | CostCondition::B4)
    }
}

/// Ordering of the four `K` values.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum OrderCase {
    /// All four equal.
    Eq,
    /// `K11 = K12 < K21 = K22`.
    RowLt,
    /// `K11 = K12 > K21 = K22`.
    RowGt,
    /// `K11 = K21 < K12 = K22`.
    ColLt,
    /// `K11 = K21 > K12 = K22`.
    ColGt,
}

impl OrderCase {
    /// All cases.
    pub const ALL: [OrderCase; 5] =
        [OrderCase::Eq, OrderCase::RowLt, OrderCase::RowGt, OrderCase::ColLt, OrderCase::ColGt];

    /// Short label.
    pub fn label(self) -> &'static str {
        match self {
            OrderCase::Eq => "EQ",
            OrderCase::RowLt => "ROW_LT",
            OrderCase::RowGt => "ROW_GT",
            OrderCase::ColLt => "COL_LT",
            OrderCase::ColGt => "COL_GT",
        }
    }
}

/// One of the twenty covered `(OrderCase, CostCondition)` combinations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Cell {
    /// `K` ordering.
    pub case: OrderCase,
    /// Cost sign pattern.
    pub condition: CostCondition,
}

impl Cell {
    /// Every covered cell.
    pub fn all() -> impl Iterator<Item = Cell> {
        OrderCase::ALL
            .into_iter()
            .flat_map(|case| CostCondition::ALL.into_iter().map(move |condition| Cell { case, condition }))
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.case.label(), self.condition.label())
    }
}

/// Why a spec could not be placed in a covered cell.
#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum ClassifyError {
    /// Cost signs match no row of the condition table.
    #[error("unsupported cost pattern (c12={c12}, c21={c21}, χ12={chi12}, χ21={chi21})")]
    UnsupportedCostPattern {
        /// `c12`
        c12: f64,
        /// `c21`
        c21: f64,
        /// `χ12`
        chi12: f64,
        /// `χ21`
        chi21: f64,
    },
    /// The `K` values pair up in a way that is not covered.
    #[error("uncovered K ordering: K11={0}, K12={1}, K21={2}, K22={3}")]
    UncoveredOrdering(f64, f64, f64, f64),
    /// Two `K` values are too close to tell equal from distinct.
    #[error("ambiguous K ordering: K{a} and K{b} differ by {rel:e} relative")]
    AmbiguousOrdering {
        /// First regime pair, as `ij`.
        a: &'static str,
        /// Second regime pair.
        b: &'static str,
        /// Relative difference.
        rel: f64,
    },
    /// Grouped regimes share `K` but not the characteristic roots.
    #[error("K{a} = K{b} but their characteristic roots differ; equal-K regimes must share (b, σ)")]
    MismatchedRoots {
        /// First regime pair.
        a: &'static str,
        /// Second regime pair.
        b: &'static str,
    },
    /// Derived constants could not be computed.
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Maps the cost signs to B1–B4.
pub fn classify_costs(spec: &GameSpec) -> Result<CostCondition, ClassifyError> {
    let (c12, c21, chi12, chi21) = (spec.c12(), spec.c21(), spec.chi12(), spec.chi21());
    let err = || ClassifyError::UnsupportedCostPattern { c12, c21, chi12, chi21 };
    if !(c21 > 0.0 && chi21 > 0.0 && c12 + c21 > 0.0 && chi12 + chi21 > 0.0) {
        return Err(err());
    }
    match (c12 > 0.0, c12 < 0.0, chi12 > 0.0, chi12 < 0.0) {
        (true, _, true, _) => Ok(CostCondition::B1),
        (_, true, true, _) => Ok(CostCondition::B2),
        (true, _, _, true) => Ok(CostCondition::B3),
        (_, true, _, true) => Ok(CostCondition::B4),
        _ => Err(err()),
    }
}

type Pair = (usize, usize);

const NAMES: [[&str; 2]; 2] = [["11", "12"], ["21", "22"]];

/// Maps the four `K` values to one of the covered orderings.
pub fn classify_order(derived: &[[RegimeDerived; 2]; 2]) -> Result<OrderCase, ClassifyError> {
    let k = |i: usize, j: usize| derived[i][j].k;
    let cells = [(0, 0), (0, 1), (1, 0), (1, 1)];
    for (n, &(ai, aj)) in cells.iter().enumerate() {
        for &(bi, bj) in &cells[n + 1..] {
            let (ka, kb) = (k(ai, aj), k(bi, bj));
            if !rel_close(ka, kb, K_EQUAL_TOL) && rel_close(ka, kb, K_AMBIGUOUS_TOL) {
                return Err(ClassifyError::AmbiguousOrdering {
                    a: NAMES[ai][aj],
                    b: NAMES[bi][bj],
                    rel: abs(ka - kb) / abs(ka).max(abs(kb)),
                });
            }
        }
    }
    let eq = |a: (usize, usize), b: (usize, usize)| rel_close(k(a.0, a.1), k(b.0, b.1), K_EQUAL_TOL);
    let row_pairs = eq((0, 0), (0, 1)) && eq((1, 0), (1, 1));
    let col_pairs = eq((0, 0), (1, 0)) && eq((0, 1), (1, 1));

    let (case, groups): (OrderCase, &[(Pair, Pair)]) = if row_pairs && col_pairs {
        (OrderCase::Eq, &[((0, 0), (0, 1)), ((0, 0), (1, 0)), ((0, 0), (1, 1))])
    } else if row_pairs {
        let case = if k(0, 0) < k(1, 0) { OrderCase::RowLt } else { OrderCase::RowGt };
        (case, &[((0, 0), (0, 1)), ((1, 0), (1, 1))])
    } else if col_pairs {
        let case = if k(0, 0) < k(0, 1) { OrderCase::ColLt } else { OrderCase::ColGt };
        (case, &[((0, 0), (1, 0)), ((0, 1), (1, 1))])
    } else {
        return Err(ClassifyError::UncoveredOrdering(k(0, 0), k(0, 1), k(1, 0), k(1, 1)));
    };

    for &(a, b) in groups {
        let (da, db) = (&derived[a.0][a.1], &derived[b.0][b.1]);
        if !rel_close(da.m_plus, db.m_plus, K_EQUAL_TOL) || !rel_close(da.m_minus, db.m_minus, K_EQUAL_TOL) {
            return Err(ClassifyError::MismatchedRoots { a: NAMES[a.0][a.1], b: NAMES[b.0][b.1] });
        }
    }
    Ok(case)
}

/// Cost condition and ordering of a spec.
pub fn classify(spec: &GameSpec) -> Result<Cell, ClassifyError> {
    let condition = classify_costs(spec)?;
    let case = classify_order(&spec.derive_all()?)?;
    Ok(Cell { case, condition })
}

/// The player whose regime changes `K`, with its worse and better regime.
///
/// `None` for [`OrderCase::Eq`].
pub(crate) fn active_player(case: OrderCase) -> Option<(crate::closedform::Player, Regime, Regime)> {
    use crate::closedform::Player;
    match case {
        OrderCase::Eq => None,
        OrderCase::RowLt => Some((Player::Max, Regime::One, Regime::Two)),
        OrderCase::RowGt => Some((Player::Max, Regime::Two, Regime::One)),
        // The minimizer prefers the smaller K.
        OrderCase::ColLt => Some((Player::Min, Regime::Two, Regime::One)),
        OrderCase::ColGt => Some((Player::Min, Regime::One, Regime::Two)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn costs(c12: f64, c21: f64, chi12: f64, chi21: f64) -> GameSpec {
        GameSpec::uniform(0.0, 1.0, 1.0, 0.5).with_cost_max(c12, c21).with_cost_min(chi12, chi21)
    }

    fn ks(k: [[f64; 2]; 2]) -> [[RegimeDerived; 2]; 2] {
        // Roots are irrelevant here; keep them identical.
        k.map(|row| row.map(|k| RegimeDerived { m_plus: 2.0, m_minus: -1.0, k }))
    }

    #[test]
    fn cost_table_rows() {
        assert_eq!(classify_costs(&costs(1.0, 1.0, 1.0, 1.0)), Ok(CostCondition::B1));
        assert_eq!(classify_costs(&costs(-0.5, 1.0, 1.0, 1.0)), Ok(CostCondition::B2));
        assert_eq!(classify_costs(&costs(1.0, 1.0, -0.5, 1.0)), Ok(CostCondition::B3));
        assert_eq!(classify_costs(&costs(-0.5, 1.0, -0.5, 1.0)), Ok(CostCondition::B4));
    }

    #[test]
    fn unsupported_cost_patterns() {
        for c in [costs(1.0, -0.5, 1.0, 1.0), costs(0.0, 1.0, 1.0, 1.0), costs(1.0, 1.0, 1.0, -0.5)] {
            assert!(matches!(classify_costs(&c), Err(ClassifyError::UnsupportedCostPattern { .. })));
        }
    }

    #[test]
    fn orderings() {
        assert_eq!(classify_order(&ks([[0.9, 0.9], [0.9, 0.9]])), Ok(OrderCase::Eq));
        assert_eq!(classify_order(&ks([[0.8, 0.8], [0.9, 0.9]])), Ok(OrderCase::RowLt));
        assert_eq!(classify_order(&ks([[0.9, 0.9], [0.8, 0.8]])), Ok(OrderCase::RowGt));
        assert_eq!(classify_order(&ks([[0.8, 0.9], [0.8, 0.9]])), Ok(OrderCase::ColLt));
        assert_eq!(classify_order(&ks([[0.9, 0.8], [0.9, 0.8]])), Ok(OrderCase::ColGt));
    }

    #[test]
    fn cross_pairing_not_covered() {
        assert!(matches!(classify_order(&ks([[0.8, 0.9], [0.9, 0.8]])), Err(ClassifyError::UncoveredOrdering(..))));
    }

    #[test]
    fn near_equal_is_ambiguous() {
        assert!(matches!(
            classify_order(&ks([[0.8, 0.8 * (1.0 + 1e-7)], [0.9, 0.9]])),
            Err(ClassifyError::AmbiguousOrdering { .. })
        ));
        assert_eq!(classify_order(&ks([[0.8, 0.8 * (1.0 + 1e-12)], [0.9, 0.9]])), Ok(OrderCase::RowLt));
    }

    #[test]
    fn equal_k_with_different_roots_rejected() {
        let mut d = ks([[0.8, 0.8], [0.9, 0.9]]);
        d[0][1].m_plus = 2.5;
        assert!(matches!(classify_order(&d), Err(ClassifyError::MismatchedRoots { .. })));
    }

    #[test]
    fn spec_with_distinct_params_but_equal_k_rejected() {
        // Same denominator r − bγ + ½σ²γ(1−γ) from different (b, σ).
        let mut spec = costs(1.0, 1.0, 1.0, 1.0);
        spec.drift[0][1] = 0.1;
        spec.vol[0][1] = crate::math::sqrt(1.0 + 0.05 / 0.125);
        assert!(matches!(classify(&spec), Err(ClassifyError::MismatchedRoots { .. })));
    }

    #[test]
    fn all_cells_distinct() {
        assert_eq!(Cell::all().count(), 20);
    }
}
