//! JSON form of a built solution, so `verify` can check what `solve` wrote.

use serde::{Deserialize, Serialize};
use switchgame::classify::{Cell, CostCondition, OrderCase};
use switchgame::closedform::Warning;
use switchgame::{GameSpec, Piece, PiecewiseValue, Region, Regions, Solution, Thresholds};

use crate::spec_file::SpecFile;
use crate::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PieceFile {
    lo: f64,
    /// `None` for `+∞`.
    hi: Option<f64>,
    coef_gamma: f64,
    coef_mplus: f64,
    coef_mminus: f64,
    m_plus_used: f64,
    m_minus_used: f64,
    constant: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "threshold", rename_all = "lowercase")]
enum RegionFile {
    Empty,
    All,
    Above(f64),
    Below(f64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SolutionFile {
    spec: SpecFile,
    case: String,
    condition: String,
    gamma: f64,
    /// Pieces of `v11, v12, v21, v22`.
    values: [Vec<PieceFile>; 4],
    max_regions: [RegionFile; 4],
    min_regions: [RegionFile; 4],
    x_star: Option<f64>,
    x_a: Option<f64>,
    x_b: Option<f64>,
    lambda: Option<f64>,
    /// Sign changes of the `λ` scan when there was more than one.
    lambda_sign_changes: Option<usize>,
}

fn region_out(r: Region) -> RegionFile {
    match r {
        Region::Empty => RegionFile::Empty,
        Region::All => RegionFile::All,
        Region::Above(t) => RegionFile::Above(t),
        Region::Below(t) => RegionFile::Below(t),
    }
}

fn region_in(r: &RegionFile) -> Region {
    match *r {
        RegionFile::Empty => Region::Empty,
        RegionFile::All => Region::All,
        RegionFile::Above(t) => Region::Above(t),
        RegionFile::Below(t) => Region::Below(t),
    }
}

fn flat<T: Copy>(a: &[[T; 2]; 2]) -> [T; 4] {
    [a[0][0], a[0][1], a[1][0], a[1][1]]
}

fn square<T: Clone>(a: [T; 4]) -> [[T; 2]; 2] {
    let [a, b, c, d] = a;
    [[a, b], [c, d]]
}

/// Serializes a solution.
pub fn to_json(solution: &Solution) -> String {
    let pieces = |v: &PiecewiseValue| {
        v.pieces()
            .iter()
            .map(|p| PieceFile {
                lo: p.lo,
                hi: p.hi.is_finite().then_some(p.hi),
                coef_gamma: p.coef_gamma,
                coef_mplus: p.coef_mplus,
                coef_mminus: p.coef_mminus,
                m_plus_used: p.m_plus_used,
                m_minus_used: p.m_minus_used,
                constant: p.constant,
            })
            .collect::<Vec<_>>()
    };
    let v = &solution.values;
    let file = SolutionFile {
        spec: SpecFile::from(&solution.spec),
        case: solution.cell.case.label().to_string(),
        condition: solution.cell.condition.label().to_string(),
        gamma: solution.spec.gamma,
        values: [pieces(&v[0][0]), pieces(&v[0][1]), pieces(&v[1][0]), pieces(&v[1][1])],
        max_regions: flat(&solution.regions.max).map(region_out),
        min_regions: flat(&solution.regions.min).map(region_out),
        x_star: solution.thresholds.x_star,
        x_a: solution.thresholds.x_a,
        x_b: solution.thresholds.x_b,
        lambda: solution.thresholds.lambda,
        lambda_sign_changes: solution.warnings.iter().map(|Warning::MultipleLambdaRoots(n)| *n).next(),
    };
    let mut s = serde_json::to_string_pretty(&file).expect("solution serializes");
    s.push('\n');
    s
}

/// Reads a solution back.
pub fn from_json(text: &str) -> Result<Solution, CliError> {
    let bad = |m: String| CliError::BadSolution(m);
    let file: SolutionFile = serde_json::from_str(text).map_err(|e| bad(e.to_string()))?;
    let case = OrderCase::ALL
        .into_iter()
        .find(|c| c.label() == file.case)
        .ok_or_else(|| bad(format!("unknown case {}", file.case)))?;
    let condition = CostCondition::ALL
        .into_iter()
        .find(|c| c.label() == file.condition)
        .ok_or_else(|| bad(format!("unknown condition {}", file.condition)))?;
    let mut values = Vec::with_capacity(4);
    for pieces in &file.values {
        let ps = pieces
            .iter()
            .map(|p| Piece {
                lo: p.lo,
                hi: p.hi.unwrap_or(f64::INFINITY),
                coef_gamma: p.coef_gamma,
                coef_mplus: p.coef_mplus,
                coef_mminus: p.coef_mminus,
                m_plus_used: p.m_plus_used,
                m_minus_used: p.m_minus_used,
                constant: p.constant,
            })
            .collect();
        values.push(PiecewiseValue::new(file.gamma, ps).map_err(|e| bad(format!("{e:?}")))?);
    }
    let values: [PiecewiseValue; 4] = values.try_into().expect("four values");
    Ok(Solution {
        spec: GameSpec::from(file.spec),
        cell: Cell { case, condition },
        values: square(values),
        regions: Regions {
            max: square(file.max_regions.each_ref().map(region_in)),
            min: square(file.min_regions.each_ref().map(region_in)),
        },
        thresholds: Thresholds { x_star: file.x_star, x_a: file.x_a, x_b: file.x_b, lambda: file.lambda },
        warnings: file.lambda_sign_changes.map(Warning::MultipleLambdaRoots).into_iter().collect(),
    })
}
