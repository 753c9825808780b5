use std::f64::consts::PI;

use super::runners::observed_rates;
use super::solutions::{self, ManufacturedSolution};
use crate::assembly::{apply_strong_bc, assemble, error_norms, solve, BcKind, ProblemData};
use crate::geometry::{c0_quarter_annulus, quarter_annulus, GeometryMap};
use crate::linalg::CsrMatrix;
use crate::spline::TensorSplineSpace;
use crate::stabilization::{StabMode, StabilizationPlan};
use crate::trimming::{classify_cells, TrimRegion};
use crate::Result;

/// Outcome of one invariant check.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn bound(name: &'static str, value: f64, tol: f64) -> Self {
        Self {
            name,
            passed: value.is_finite() && value <= tol,
            detail: format!("{value:.3e} (tol {tol:e})"),
        }
    }
}

/// Low-discrepancy points in `[lo, hi]`.
fn halton(n: usize, lo: [f64; 2], hi: [f64; 2]) -> Vec<[f64; 2]> {
    let radical = |mut i: usize, b: usize| {
        let (mut f, mut r) = (1.0, 0.0);
        while i > 0 {
            f /= b as f64;
            r += f * (i % b) as f64;
            i /= b;
        }
        r
    };
    (1..=n)
        .map(|i| {
            [
                lo[0] + (hi[0] - lo[0]) * radical(i, 2),
                lo[1] + (hi[1] - lo[1]) * radical(i, 3),
            ]
        })
        .collect()
}

fn rel_diff(a: &CsrMatrix, b: &CsrMatrix) -> f64 {
    let mut d: f64 = 0.0;
    for (i, j, v) in a.iter() {
        d = d.max((v - b.get(i, j)).abs());
    }
    for (i, j, v) in b.iter() {
        d = d.max((v - a.get(i, j)).abs());
    }
    d / a.max_abs().max(b.max_abs())
}

fn rate_check() -> Check {
    let h: Vec<f64> = (2..7).map(|k| 0.5f64.powi(k)).collect();
    let worst = [0.5, 2.0 / 3.0, 3.0]
        .iter()
        .flat_map(|&k| {
            let e: Vec<f64> = h.iter().map(|h| 2.0 * h.powf(k)).collect();
            observed_rates(&h, &e)
                .into_iter()
                .flatten()
                .map(move |r| (r - k).abs())
        })
        .fold(0.0, f64::max);
    Check::bound("rate_computation", worst, 1e-12)
}

fn solution_check() -> Check {
    let mut worst: f64 = 0.0;
    worst = worst.max(solutions::exp_sin().fd_mismatch(&halton(100, [-2.0, -2.0], [2.0, 2.0])));
    for p in 1..=3 {
        worst = worst.max(solutions::poly(p).fd_mismatch(&halton(100, [0.0, 0.0], [1.0, 1.0])));
    }
    let l = solutions::lshape();
    worst = worst.max(l.fd_mismatch(&halton(50, [-2.0, 0.1], [1.0, 2.0])));
    worst = worst.max(l.fd_mismatch(&halton(50, [-2.0, -1.0], [-0.1, 0.0])));
    Check::bound("manufactured_solutions", worst, 1e-5)
}

fn jacobian_check() -> Result<Check> {
    let maps = [
        GeometryMap::affine([-2.0, -1.0], [3.0, 3.0])?,
        quarter_annulus(),
        c0_quarter_annulus(),
    ];
    let d = 1e-6;
    let mut worst: f64 = 0.0;
    for m in &maps {
        for xi in halton(200, [0.01, 0.01], [0.99, 0.99]) {
            // keep the stencil on one side of any kink
            let e = m.eval_anchored(xi, xi)?;
            for dir in 0..2 {
                let mut a = xi;
                let mut b = xi;
                a[dir] += d;
                b[dir] -= d;
                let pa = m.eval_anchored(a, xi)?.point;
                let pb = m.eval_anchored(b, xi)?.point;
                for c in 0..2 {
                    let fd = (pa[c] - pb[c]) / (2.0 * d);
                    worst = worst.max((fd - e.jac[c][dir]).abs() / (1.0 + e.jac[c][dir].abs()));
                }
            }
        }
    }
    Ok(Check::bound("jacobian_vs_differences", worst, 1e-6))
}

fn disk_checks() -> Result<Vec<Check>> {
    let space = TensorSplineSpace::uniform(8, 2, 1)?;
    let region = TrimRegion::DiskParam {
        center: [0.0, 0.0],
        radius: 0.76,
        keep_outside: true,
    };
    let tm = classify_cells(&space, &GeometryMap::Identity, &region, 0.1, 4)?;
    let area = 1.0 - PI * 0.76 * 0.76 / 4.0;
    let len = 0.38 * PI;
    let tq = classify_cells(&space, &quarter_annulus(), &region, 0.1, 4)?;
    Ok(vec![
        Check::bound("disk_area", (tm.param_area() - area).abs(), 1e-6),
        Check::bound("arc_length", (tm.trim_length() - len).abs(), 1e-6),
        Check::bound(
            "annulus_area_partition",
            (tq.param_area() - area).abs(),
            1e-6,
        ),
    ])
}

fn half_plane_data(
    p: usize,
) -> (
    TensorSplineSpace,
    TrimRegion,
    ProblemData,
    ManufacturedSolution,
) {
    let s = solutions::poly(p);
    let g = s.grad.clone();
    let data = ProblemData {
        f: s.f.clone(),
        g_d: s.u.clone(),
        g_n: std::sync::Arc::new(move |x, n| {
            let d = g(x);
            d[0] * n[0] + d[1] * n[1]
        }),
        sides: [
            BcKind::StrongDirichlet,
            BcKind::StrongDirichlet,
            BcKind::Neumann,
            BcKind::StrongDirichlet,
        ],
        trim: BcKind::WeakDirichlet,
        beta: 10.0 * (p + 1) as f64,
    };
    let space = TensorSplineSpace::uniform(8, p, p - 1).expect("uniform space");
    let region = TrimRegion::HalfPlaneParam {
        axis: 1,
        threshold: 0.757,
        keep_below: true,
    };
    (space, region, data, s)
}

fn equivalence_checks() -> Result<Vec<Check>> {
    let map = GeometryMap::Identity;
    let (space, region, data, s) = half_plane_data(2);
    let q = 4;
    let matrix = |theta: f64, mode: StabMode| -> Result<CsrMatrix> {
        let tm = classify_cells(&space, &map, &region, theta, q)?;
        let plan = StabilizationPlan::build(&space, &map, &tm, mode, q)?;
        Ok(assemble(&space, &tm, &map, &plan, &data)?.matrix)
    };
    let none = matrix(0.0, StabMode::None)?;
    let zero = matrix(0.0, StabMode::Parametric)?;
    let par = matrix(1.0, StabMode::Parametric)?;
    let phys = matrix(1.0, StabMode::Physical)?;

    let tm = classify_cells(&space, &map, &region, 1.0, q)?;
    let plan = StabilizationPlan::build(&space, &map, &tm, StabMode::Physical, q)?;
    let sys = assemble(&space, &tm, &map, &plan, &data)?;
    let sys = apply_strong_bc(sys, &space, &map, &tm, &data.g_d, &data.strong_sides())?;
    let c = solve(&sys)?;
    let (e, _) = error_norms(&space, &tm, &map, &c, &*s.u, &*s.grad, data.weak_boundary())?;
    let zc = vec![0.0; c.len()];
    let (n, _) = error_norms(
        &space,
        &tm,
        &map,
        &zc,
        &*s.u,
        &*s.grad,
        data.weak_boundary(),
    )?;
    Ok(vec![
        Check {
            name: "theta_zero_is_unstabilized",
            passed: none == zero,
            detail: "exact matrix equality".into(),
        },
        Check::bound(
            "identity_parametric_equals_physical",
            rel_diff(&par, &phys),
            1e-10,
        ),
        Check::bound("patch_test_p2", e / n, 1e-9),
    ])
}

/// Runs the built-in invariant suite.
pub fn run_verify() -> Result<Vec<Check>> {
    faer::set_global_parallelism(faer::Par::Seq);
    let mut out = vec![rate_check(), solution_check(), jacobian_check()?];
    out.extend(disk_checks()?);
    out.extend(equivalence_checks()?);
    Ok(out)
}

#[cfg(test)]
mod tests {
    #[test]
    fn invariant_suite_passes() {
        for c in super::run_verify().unwrap() {
            assert!(c.passed, "{}: {}", c.name, c.detail);
        }
    }
}
