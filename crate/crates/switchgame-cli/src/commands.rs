//! The subcommands. Each returns a short human-readable summary.

use std::path::PathBuf;

use switchgame::closedform::regions_summary;
use switchgame::hitting::{log_grid, threshold_search, SearchGrids, DEFAULT_GRID_POINTS};
use switchgame::montecarlo::{simulate_payoff, trace_paths, SimConfig, ThresholdStrategy};
use switchgame::qvi::{self, GridSpec, RESIDUAL_TOL};
use switchgame::{solve, GameSpec, Regime, Solution};

use crate::spec_file::read_spec;
use crate::{ensure_dir, num, opt_num, solution_file, write_csv, write_text, CliError};

/// Limit on smooth-fit defects accepted by `verify`.
pub const SMOOTH_FIT_TOL: f64 = 1e-9;

/// Options shared by the subcommands.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub input: PathBuf,
    pub out: PathBuf,
    /// Grid points (solution/verify grid, or per search axis).
    pub grid: Option<usize>,
    pub paths: Option<usize>,
    pub seed: u64,
    pub dt: Option<f64>,
    pub horizon: Option<f64>,
    /// Starting regime for `search` and the trace.
    pub regime: (Regime, Regime),
    /// Paths to trace in `simulate` (at most 100).
    pub trace: usize,
}

impl RunConfig {
    pub fn new(input: impl Into<PathBuf>, out: impl Into<PathBuf>) -> RunConfig {
        RunConfig {
            input: input.into(),
            out: out.into(),
            grid: None,
            paths: None,
            seed: 0,
            dt: None,
            horizon: None,
            regime: (Regime::One, Regime::One),
            trace: 0,
        }
    }
}

/// Parses `"12"` into `(One, Two)`.
pub fn parse_regime(s: &str) -> Result<(Regime, Regime), CliError> {
    let b = s.as_bytes();
    let r = |c: u8| Regime::from_label(c.wrapping_sub(b'0'));
    match (b.len(), b.first().and_then(|&c| r(c)), b.get(1).and_then(|&c| r(c))) {
        (2, Some(i), Some(j)) => Ok((i, j)),
        _ => Err(CliError::Args(format!("regime must be one of 11, 12, 21, 22; got {s:?}"))),
    }
}

fn build(spec: &GameSpec) -> Result<Solution, CliError> {
    solve(spec).map_err(|e| CliError::Classification(e.to_string()))
}

fn grid_spec(cfg: &RunConfig) -> GridSpec {
    GridSpec { points: cfg.grid.unwrap_or(qvi::GRID_POINTS), ..GridSpec::default() }
}

fn regime_label((i, j): (Regime, Regime)) -> String {
    format!("{i}{j}")
}

/// `solve`: solution.csv, thresholds.csv, regions.txt, solution.json.
pub fn run_solve(cfg: &RunConfig) -> Result<String, CliError> {
    let spec = read_spec(&cfg.input)?;
    let sol = build(&spec)?;
    ensure_dir(&cfg.out)?;
    let xs = qvi::grid(&sol, &grid_spec(cfg));
    write_csv(
        &cfg.out.join("solution.csv"),
        &["x", "v11", "v12", "v21", "v22"],
        xs.iter().map(|&x| {
            let mut row = vec![num(x)];
            for i in Regime::ALL {
                for j in Regime::ALL {
                    row.push(num(sol.value(i, j).value(x)));
                }
            }
            row
        }),
    )?;
    write_csv(
        &cfg.out.join("thresholds.csv"),
        &["name", "value"],
        sol.thresholds.named().into_iter().map(|(n, v)| vec![n.to_string(), num(v)]),
    )?;
    write_text(&cfg.out.join("regions.txt"), &regions_summary(&sol))?;
    write_text(&cfg.out.join("solution.json"), &solution_file::to_json(&sol))?;
    let th: Vec<String> = sol.thresholds.named().iter().map(|(n, v)| format!("{n}={v:.6}")).collect();
    Ok(format!(
        "cell {}; thresholds [{}]; v11(x0) = {:.6}",
        sol.cell,
        th.join(", "),
        sol.value(Regime::One, Regime::One).value(spec.x0)
    ))
}

fn load_solution(cfg: &RunConfig, spec: &GameSpec) -> Result<Solution, CliError> {
    let path = cfg.out.join("solution.json");
    if path.exists() {
        let text = std::fs::read_to_string(&path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        solution_file::from_json(&text)
    } else {
        build(spec)
    }
}

/// `verify`: qvi_report.csv; fails when a residual or a smooth-fit defect
/// exceeds its tolerance.
pub fn run_verify(cfg: &RunConfig) -> Result<String, CliError> {
    let spec = read_spec(&cfg.input)?;
    let sol = load_solution(cfg, &spec)?;
    ensure_dir(&cfg.out)?;
    let report = qvi::verify(&spec, &sol, &grid_spec(cfg));
    write_csv(
        &cfg.out.join("qvi_report.csv"),
        &["x", "regime_i", "regime_j", "G", "v_minus_M", "v_minus_N", "tag"],
        report.points.iter().map(|p| {
            vec![
                num(p.x),
                p.i.to_string(),
                p.j.to_string(),
                num(p.g),
                num(p.v_minus_m),
                num(p.v_minus_n),
                p.tag.label().to_string(),
            ]
        }),
    )?;
    let jump = qvi::smooth_fit_check(&sol).iter().map(|j| j.value_jump.max(j.derivative_jump)).fold(0.0, f64::max);
    let summary = format!(
        "worst residual {:.3e} (tol {RESIDUAL_TOL:e}); worst smooth-fit defect {jump:.3e}",
        report.worst_residual
    );
    if !report.passed() || !(jump <= SMOOTH_FIT_TOL) {
        return Err(CliError::VerifyFailed(summary));
    }
    Ok(summary)
}

fn sim_config(cfg: &RunConfig, spec: &GameSpec) -> SimConfig {
    let mut c = SimConfig::for_spec(spec, cfg.seed);
    if let Some(p) = cfg.paths {
        c.paths = p;
    }
    if let Some(dt) = cfg.dt {
        c.dt = dt;
    }
    if let Some(h) = cfg.horizon {
        c.horizon = h;
    }
    c
}

/// `simulate`: simulate.csv with the payoff estimate from each starting
/// regime, and trace.csv when requested.
pub fn run_simulate(cfg: &RunConfig) -> Result<String, CliError> {
    let spec = read_spec(&cfg.input)?;
    let sol = build(&spec)?;
    let strategy = ThresholdStrategy::from_solution(&sol).map_err(|e| CliError::Args(e.to_string()))?;
    let sc = sim_config(cfg, &spec);
    ensure_dir(&cfg.out)?;
    let mut rows = Vec::new();
    let mut worst_z: f64 = 0.0;
    for i in Regime::ALL {
        for j in Regime::ALL {
            let est = simulate_payoff(&spec, &strategy, (i, j), &sc).map_err(|e| CliError::Args(e.to_string()))?;
            let v = sol.value(i, j).value(spec.x0);
            let diff = est.estimate.mean - v;
            if est.estimate.std_error > 0.0 {
                worst_z = worst_z.max(diff.abs() / est.estimate.std_error);
            }
            rows.push(vec![
                i.to_string(),
                j.to_string(),
                num(v),
                num(est.estimate.mean),
                num(est.estimate.std_error),
                num(diff),
                est.cost_bound_violations.to_string(),
                num(est.mean_switches),
            ]);
        }
    }
    write_csv(
        &cfg.out.join("simulate.csv"),
        &[
            "regime_i",
            "regime_j",
            "closed_form",
            "mean",
            "std_error",
            "difference",
            "cost_bound_violations",
            "mean_switches",
        ],
        rows,
    )?;
    if cfg.trace > 0 {
        let every = (0.01 / sc.dt).round().max(1.0) as usize;
        let trace = trace_paths(&spec, &strategy, cfg.regime, &sc, cfg.trace, every)
            .map_err(|e| CliError::Args(e.to_string()))?;
        write_csv(
            &cfg.out.join("trace.csv"),
            &["path", "t", "X", "regime_i", "regime_j", "cumulative_payoff"],
            trace.iter().map(|p| {
                vec![p.path.to_string(), num(p.t), num(p.x), p.i.to_string(), p.j.to_string(), num(p.cumulative)]
            }),
        )?;
    }
    Ok(format!(
        "{} paths, dt {}, horizon {}; largest |mean - v| is {worst_z:.2} standard errors",
        sc.paths, sc.dt, sc.horizon
    ))
}

/// Default grids: log-spaced on `[x0/10, 10 x0]`, plus the "never" choices
/// (`y21 = 0`, `x'12 = ∞`, `x12 = ∞`).
pub fn default_grids(x0: f64, n: usize) -> SearchGrids {
    let g = log_grid(x0 / 10.0, x0 * 10.0, n);
    let mut y21 = vec![0.0];
    y21.extend(&g);
    let mut upper = g;
    upper.push(f64::INFINITY);
    SearchGrids { y21, x12_prime: upper.clone(), x12: upper }
}

/// `search`: surface.csv with every feasible tuple and search.csv with the
/// min-max tuple.
pub fn run_search(cfg: &RunConfig) -> Result<String, CliError> {
    let spec = read_spec(&cfg.input)?;
    let grids = default_grids(spec.x0, cfg.grid.unwrap_or(DEFAULT_GRID_POINTS));
    let res = threshold_search(&spec, cfg.regime, spec.x0, &grids).map_err(|e| CliError::Args(e.to_string()))?;
    ensure_dir(&cfg.out)?;
    write_csv(
        &cfg.out.join("surface.csv"),
        &["y21", "x12_prime", "x12", "value"],
        res.surface.iter().map(|p| vec![num(p.tuple.y21), num(p.tuple.x12_prime), num(p.tuple.x12), num(p.value)]),
    )?;
    write_csv(
        &cfg.out.join("search.csv"),
        &["regime", "x", "y21", "x12_prime", "x12", "value", "minmax", "maxmin", "gap", "cell_tolerance"],
        [vec![
            regime_label(cfg.regime),
            num(spec.x0),
            num(res.best.y21),
            num(res.best.x12_prime),
            num(res.best.x12),
            num(res.value),
            num(res.minmax),
            num(res.maxmin),
            num(res.gap),
            num(res.cell_tolerance),
        ]],
    )?;
    Ok(format!(
        "v{}(x0) ~ {:.6} at y21={:.4}, x'12={:.4}, x12={:.4}; gap {:.2e} (cell tolerance {:.2e})",
        regime_label(cfg.regime),
        res.value,
        res.best.y21,
        res.best.x12_prime,
        res.best.x12,
        res.gap,
        res.cell_tolerance
    ))
}

/// Scalar inputs `sweep` can vary.
pub const SWEEP_PARAMS: [&str; 7] = ["discount", "gamma", "x0", "c12", "c21", "chi12", "chi21"];

fn set_param(spec: &mut GameSpec, name: &str, v: f64) -> Result<(), CliError> {
    match name {
        "discount" => spec.discount = v,
        "gamma" => spec.gamma = v,
        "x0" => spec.x0 = v,
        "c12" => spec.cost_max[0][1] = v,
        "c21" => spec.cost_max[1][0] = v,
        "chi12" => spec.cost_min[0][1] = v,
        "chi21" => spec.cost_min[1][0] = v,
        _ => return Err(CliError::Args(format!("unknown sweep parameter {name:?}; expected one of {SWEEP_PARAMS:?}"))),
    }
    Ok(())
}

/// Sweep settings.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRange {
    pub param: String,
    pub from: f64,
    pub to: f64,
    pub steps: usize,
}

/// `sweep`: sweep.csv with the cell, thresholds and `v_ij(x0)` as one input
/// varies linearly. Points that fail to validate or classify are reported in
/// the `status` column.
pub fn run_sweep(cfg: &RunConfig, range: &SweepRange) -> Result<String, CliError> {
    let base = read_spec(&cfg.input)?;
    if range.steps < 2 {
        return Err(CliError::Args("sweep needs at least 2 steps".into()));
    }
    set_param(&mut base.clone(), &range.param, range.from)?;
    ensure_dir(&cfg.out)?;
    let mut ok = 0;
    let rows: Vec<Vec<String>> = (0..range.steps)
        .map(|k| {
            let v = range.from + (range.to - range.from) * k as f64 / (range.steps - 1) as f64;
            let mut spec = base.clone();
            set_param(&mut spec, &range.param, v).expect("checked above");
            let report = switchgame::model::validate(&spec);
            let mut row = vec![num(v)];
            let result = if report.is_valid() {
                solve(&spec).map_err(|e| e.to_string())
            } else {
                Err(report.violations.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))
            };
            match result {
                Ok(sol) => {
                    ok += 1;
                    row.push(sol.cell.to_string());
                    let t = sol.thresholds;
                    row.extend([opt_num(t.x_star), opt_num(t.x_a), opt_num(t.x_b), opt_num(t.lambda)]);
                    for i in Regime::ALL {
                        for j in Regime::ALL {
                            row.push(num(sol.value(i, j).value(spec.x0)));
                        }
                    }
                    row.push("ok".into());
                }
                Err(msg) => {
                    row.extend(std::iter::repeat_n(String::new(), 9));
                    row.push(msg);
                }
            }
            row
        })
        .collect();
    write_csv(
        &cfg.out.join("sweep.csv"),
        &[range.param.as_str(), "cell", "x_star", "x_A", "x_B", "lambda", "v11", "v12", "v21", "v22", "status"],
        rows,
    )?;
    Ok(format!("{ok} of {} points solved", range.steps))
}
