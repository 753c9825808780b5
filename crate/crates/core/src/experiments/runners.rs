use std::f64::consts::PI;

use rayon::prelude::*;

use super::config::{ExperimentConfig, ExperimentKind, Sweep};
use super::setup::{Scenario, SweepPoint};
use super::table::{fmt_f64, fmt_opt, Table};
use crate::assembly::{
    apply_strong_bc, assemble, condition_number, error_norms, gen_eig_extremes, gram_1h, solve,
    LinearSystem,
};
use crate::stabilization::{stability_ratio, StabMode};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityRow {
    pub eps: f64,
    pub mode: StabMode,
    pub theta: f64,
    pub lambda_max: f64,
    pub lambda_min: f64,
    /// Largest local stability ratio over the cut cells.
    pub stab_const: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub h: f64,
    pub dofs: usize,
    pub err_nnorm: f64,
    pub err_l2: f64,
    pub rate_nnorm: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditioningRow {
    pub study: String,
    pub variable: &'static str,
    pub value: f64,
    pub theta: f64,
    pub eps: Option<f64>,
    pub eta: f64,
    pub mode: StabMode,
    pub kappa_plain: f64,
    pub kappa_jacobi: f64,
}

/// Solved system together with its error summary.
#[derive(Debug, Clone)]
pub struct SolveOutput {
    pub system: LinearSystem,
    pub coeffs: Vec<f64>,
    pub row: ConvergenceRow,
}

/// `(mode, θ)` pairs of a configuration. Mode `none` runs once with `θ = 0`.
pub fn variants(cfg: &ExperimentConfig) -> Vec<(StabMode, f64)> {
    let mut out = Vec::new();
    for &m in &cfg.stab_modes {
        if m == StabMode::None {
            out.push((m, 0.0));
        } else {
            out.extend(cfg.theta.iter().map(|&t| (m, t)));
        }
    }
    out
}

/// `log(e_{i-1}/e_i) / log(h_{i-1}/h_i)`, blank for the first entry.
pub fn observed_rates(h: &[f64], e: &[f64]) -> Vec<Option<f64>> {
    (0..h.len().min(e.len()))
        .map(|i| (i > 0).then(|| (e[i - 1] / e[i]).ln() / (h[i - 1] / h[i]).ln()))
        .collect()
}

fn with_context(what: String, e: Error) -> Error {
    if e.is_config() {
        e
    } else {
        Error::Numerical(format!("{what}: {e}"))
    }
}

/// Assembled system with strong conditions applied.
fn system(sc: &Scenario) -> Result<LinearSystem> {
    let sys = assemble(&sc.space, &sc.tm, &sc.map, &sc.plan, &sc.data)?;
    apply_strong_bc(
        sys,
        &sc.space,
        &sc.map,
        &sc.tm,
        &sc.data.g_d,
        &sc.data.strong_sides(),
    )
}

pub fn run_stability_sweep(cfg: &ExperimentConfig) -> Result<Vec<StabilityRow>> {
    if cfg.experiment != ExperimentKind::Stability {
        return Err(Error::Config("not a stability configuration".into()));
    }
    if cfg.eps_list.is_empty() || cfg.levels.len() != 1 {
        return Err(Error::Config(
            "stability sweeps need eps_list and exactly one level".into(),
        ));
    }
    let level = cfg.levels[0];
    let jobs: Vec<(f64, StabMode, f64)> = cfg
        .eps_list
        .iter()
        .flat_map(|&e| variants(cfg).into_iter().map(move |(m, t)| (e, m, t)))
        .collect();
    jobs.par_iter()
        .map(|&(eps, mode, theta)| {
            let at = SweepPoint {
                level,
                eps: Some(eps),
                angle: None,
            };
            stability_point(cfg, at, mode, theta)
                .map_err(|e| with_context(format!("eps = {eps:e}, mode {}", mode.as_str()), e))
        })
        .collect()
}

fn stability_point(
    cfg: &ExperimentConfig,
    at: SweepPoint,
    mode: StabMode,
    theta: f64,
) -> Result<StabilityRow> {
    let sc = Scenario::build(cfg, at, theta, mode)?;
    let sys = system(&sc)?;
    let gram = gram_1h(&sc.space, &sc.tm, &sc.map, sc.data.weak_boundary())?;
    let (lambda_min, lambda_max) = gen_eig_extremes(&sys.matrix, &gram, &sys.free_dofs())?;
    let cut: Vec<usize> = sc.tm.cut_cells().collect();
    let ratios = cut
        .par_iter()
        .map(|&c| stability_ratio(&sc.plan, &sc.tm, &sc.space, &sc.map, c))
        .collect::<Result<Vec<f64>>>()?;
    let stab_const = ratios.into_iter().fold(0.0, f64::max);
    Ok(StabilityRow {
        eps: at.eps.unwrap_or(0.0),
        mode,
        theta,
        lambda_max,
        lambda_min,
        stab_const,
    })
}

pub fn stability_table(rows: &[StabilityRow]) -> Table {
    let mut t = Table::new(&["eps", "mode", "lambda_max", "lambda_min"]);
    for r in rows {
        t.push(vec![
            fmt_f64(r.eps),
            r.mode.as_str().into(),
            fmt_f64(r.lambda_max),
            fmt_f64(r.lambda_min),
        ]);
    }
    t
}

fn single_variant(cfg: &ExperimentConfig) -> Result<(StabMode, f64)> {
    match variants(cfg).as_slice() {
        [v] => Ok(*v),
        _ => Err(Error::Config(
            "this experiment runs exactly one stab_mode and one theta".into(),
        )),
    }
}

fn solve_point(
    cfg: &ExperimentConfig,
    at: SweepPoint,
    mode: StabMode,
    theta: f64,
) -> Result<SolveOutput> {
    let sc = Scenario::build(cfg, at, theta, mode)?;
    let system = system(&sc)?;
    let coeffs = solve(&system)?;
    let u = sc.solution.u.clone();
    let g = sc.solution.grad.clone();
    let (err_nnorm, err_l2) = error_norms(
        &sc.space,
        &sc.tm,
        &sc.map,
        &coeffs,
        &*u,
        &*g,
        sc.data.weak_boundary(),
    )?;
    let dofs = system.active.iter().filter(|&&a| a).count();
    let row = ConvergenceRow {
        h: 0.5f64.powi(at.level as i32),
        dofs,
        err_nnorm,
        err_l2,
        rate_nnorm: None,
    };
    Ok(SolveOutput {
        system,
        coeffs,
        row,
    })
}

pub fn run_convergence(cfg: &ExperimentConfig) -> Result<Vec<ConvergenceRow>> {
    if cfg.experiment != ExperimentKind::Convergence {
        return Err(Error::Config("not a convergence configuration".into()));
    }
    if cfg.eps_list.len() > 1 {
        return Err(Error::Config(
            "convergence runs take at most one eps".into(),
        ));
    }
    let (mode, theta) = single_variant(cfg)?;
    let eps = cfg.eps_list.first().copied();
    let mut rows = cfg
        .levels
        .par_iter()
        .map(|&level| {
            solve_point(
                cfg,
                SweepPoint {
                    level,
                    eps,
                    angle: None,
                },
                mode,
                theta,
            )
            .map(|o| o.row)
            .map_err(|e| with_context(format!("level {level}"), e))
        })
        .collect::<Result<Vec<_>>>()?;
    let h: Vec<f64> = rows.iter().map(|r| r.h).collect();
    let e: Vec<f64> = rows.iter().map(|r| r.err_nnorm).collect();
    for (r, rate) in rows.iter_mut().zip(observed_rates(&h, &e)) {
        r.rate_nnorm = rate;
    }
    Ok(rows)
}

pub fn convergence_table(rows: &[ConvergenceRow]) -> Table {
    let mut t = Table::new(&["h", "dofs", "err_nnorm", "err_l2", "rate_nnorm"]);
    for r in rows {
        t.push(vec![
            fmt_f64(r.h),
            r.dofs.to_string(),
            fmt_f64(r.err_nnorm),
            fmt_f64(r.err_l2),
            fmt_opt(r.rate_nnorm),
        ]);
    }
    t
}

/// Sweep points of a conditioning study, in output order.
pub fn conditioning_points(cfg: &ExperimentConfig) -> Vec<(&'static str, f64, SweepPoint)> {
    let l0 = cfg.levels[0];
    match cfg.sweep {
        Sweep::H => {
            let eps: Vec<Option<f64>> = if cfg.eps_list.is_empty() {
                vec![None]
            } else {
                cfg.eps_list.iter().map(|&e| Some(e)).collect()
            };
            eps.iter()
                .flat_map(|&eps| {
                    cfg.levels.iter().map(move |&level| {
                        (
                            "h",
                            0.5f64.powi(level as i32),
                            SweepPoint {
                                level,
                                eps,
                                angle: None,
                            },
                        )
                    })
                })
                .collect()
        }
        Sweep::Eps => cfg
            .eps_list
            .iter()
            .map(|&e| {
                (
                    "eps",
                    e,
                    SweepPoint {
                        level: l0,
                        eps: Some(e),
                        angle: None,
                    },
                )
            })
            .collect(),
        Sweep::Angle => (0..cfg.angle_steps)
            .map(|i| {
                let a = i as f64 * PI / cfg.angle_div;
                (
                    "angle",
                    a,
                    SweepPoint {
                        level: l0,
                        eps: None,
                        angle: Some(a),
                    },
                )
            })
            .collect(),
    }
}

pub fn run_conditioning(cfg: &ExperimentConfig) -> Result<Vec<ConditioningRow>> {
    if cfg.experiment != ExperimentKind::Conditioning {
        return Err(Error::Config("not a conditioning configuration".into()));
    }
    if cfg.sweep == Sweep::Eps && cfg.eps_list.is_empty() {
        return Err(Error::Config("sweep = eps needs eps_list".into()));
    }
    let jobs: Vec<_> = conditioning_points(cfg)
        .into_iter()
        .flat_map(|pt| variants(cfg).into_iter().map(move |v| (pt, v)))
        .collect();
    jobs.par_iter()
        .map(|&((variable, value, at), (mode, theta))| {
            conditioning_point(cfg, variable, value, at, mode, theta)
                .map_err(|e| with_context(format!("{variable} = {value:e}, theta = {theta}"), e))
        })
        .collect()
}

fn conditioning_point(
    cfg: &ExperimentConfig,
    variable: &'static str,
    value: f64,
    at: SweepPoint,
    mode: StabMode,
    theta: f64,
) -> Result<ConditioningRow> {
    let sc = Scenario::build(cfg, at, theta, mode)?;
    let sys = system(&sc)?;
    let free = sys.free_dofs();
    Ok(ConditioningRow {
        study: cfg.study.clone(),
        variable,
        value,
        theta,
        eps: at.eps,
        eta: sc.tm.min_cut_volume(),
        mode,
        kappa_plain: condition_number(&sys.matrix, &free, false)?,
        kappa_jacobi: condition_number(&sys.matrix, &free, true)?,
    })
}

pub fn conditioning_table(rows: &[ConditioningRow]) -> Table {
    let mut t = Table::new(&[
        "study",
        "variable",
        "value",
        "theta",
        "eps",
        "eta",
        "mode",
        "kappa_plain",
        "kappa_jacobi",
    ]);
    for r in rows {
        t.push(vec![
            r.study.clone(),
            r.variable.into(),
            fmt_f64(r.value),
            fmt_f64(r.theta),
            fmt_opt(r.eps),
            fmt_f64(r.eta),
            r.mode.as_str().into(),
            fmt_f64(r.kappa_plain),
            fmt_f64(r.kappa_jacobi),
        ]);
    }
    t
}

/// Solves on the first level with the single configured variant.
pub fn run_solve(cfg: &ExperimentConfig) -> Result<SolveOutput> {
    let (mode, theta) = single_variant(cfg)?;
    let at = SweepPoint {
        level: cfg.levels[0],
        eps: cfg.eps_list.first().copied(),
        angle: None,
    };
    solve_point(cfg, at, mode, theta)
}

pub fn solve_table(out: &SolveOutput) -> Table {
    let mut t = Table::new(&["h", "dofs", "err_nnorm", "err_l2"]);
    let r = &out.row;
    t.push(vec![
        fmt_f64(r.h),
        r.dofs.to_string(),
        fmt_f64(r.err_nnorm),
        fmt_f64(r.err_l2),
    ]);
    t
}

/// Runs the configured experiment and returns its CSV table.
///
/// Sets faer to sequential mode so results do not depend on thread count.
pub fn run(cfg: &ExperimentConfig) -> Result<Table> {
    faer::set_global_parallelism(faer::Par::Seq);
    match cfg.experiment {
        ExperimentKind::Stability => run_stability_sweep(cfg).map(|r| stability_table(&r)),
        ExperimentKind::Convergence => run_convergence(cfg).map(|r| convergence_table(&r)),
        ExperimentKind::Conditioning => run_conditioning(cfg).map(|r| conditioning_table(&r)),
        ExperimentKind::Solve => run_solve(cfg).map(|o| solve_table(&o)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rates_of_synthetic_errors() {
        let h: Vec<f64> = (2..7).map(|k| 0.5f64.powi(k)).collect();
        for k in [0.5, 2.0 / 3.0, 1.0, 3.0] {
            let e: Vec<f64> = h.iter().map(|h| 3.7 * h.powf(k)).collect();
            let r = observed_rates(&h, &e);
            assert_eq!(r[0], None);
            for x in &r[1..] {
                assert!((x.unwrap() - k).abs() < 1e-12);
            }
        }
    }
}
