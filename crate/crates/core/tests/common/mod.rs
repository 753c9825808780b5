//! Oracle measurements shared by the oracle, equivalence and acceptance targets.
#![allow(dead_code)]

use std::f64::consts::PI;
use std::sync::Arc;

use faer::linalg::solvers::Solve;
use faer::{Mat, Side};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use trimstab::assembly::{apply_strong_bc, assemble, error_norms, solve, BcKind, ProblemData};
use trimstab::experiments::{build_space, ExperimentConfig};
use trimstab::geometry::GeometryMap;
use trimstab::linalg::{condition_number_dense, gen_eig_extremes_dense, CsrMatrix};
use trimstab::spline::{insert_knot, l2_project_global, KnotVector, TensorSplineSpace};
use trimstab::stabilization::{StabMode, StabilizationPlan};
use trimstab::trimming::{classify_cells, TrimRegion};

pub fn random_spd(rng: &mut ChaCha8Rng, n: usize, shift: f64) -> Mat<f64> {
    let g = Mat::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
    let mut m = &g * g.transpose();
    for i in 0..n {
        m[(i, i)] += shift;
    }
    m
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// Worst relative deviation of the pencil extremes from the eigenvalues of `B⁻¹A`.
pub fn pencil_error(seed: u64, cases: usize) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..cases {
        let a = random_spd(&mut rng, 40, 0.5);
        let b = random_spd(&mut rng, 40, 1.0);
        let (lo, hi) = gen_eig_extremes_dense(&a, &b).unwrap();
        let bia = b.llt(Side::Lower).unwrap().solve(&a);
        let ev: Vec<f64> = bia.eigenvalues().unwrap().iter().map(|z| z.re).collect();
        let blo = ev.iter().copied().fold(f64::INFINITY, f64::min);
        let bhi = ev.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        worst = worst.max(rel(lo, blo)).max(rel(hi, bhi));
    }
    worst
}

/// Worst relative deviation of the condition number from the singular value ratio.
pub fn condition_error(seed: u64, cases: usize) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..cases {
        let a = random_spd(&mut rng, 40, 1e-2);
        let sv = a.singular_values().unwrap();
        let smax = sv.iter().copied().fold(0.0, f64::max);
        let smin = sv.iter().copied().fold(f64::INFINITY, f64::min);
        worst = worst.max(rel(condition_number_dense(&a, false).unwrap(), smax / smin));
    }
    worst
}

/// Largest pointwise change of a spline curve under single knot insertions.
pub fn insertion_error() -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let kv = KnotVector::from_breakpoints(3, &[0.0, 0.2, 0.45, 0.7, 1.0], &[1, 2, 1]).unwrap();
    let c: Vec<f64> = (0..kv.num_basis())
        .map(|_| rng.gen_range(-1.0..1.0))
        .collect();
    let mut worst: f64 = 0.0;
    for x in [0.1, 0.45, 0.5, 0.999] {
        let (kv2, c2) = insert_knot(&kv, &c, x).unwrap();
        assert_eq!(kv2.num_basis(), kv.num_basis() + 1);
        for i in 0..=200 {
            let t = i as f64 / 200.0;
            worst = worst
                .max((kv.eval_spline(&c, t).unwrap() - kv2.eval_spline(&c2, t).unwrap()).abs());
        }
    }
    worst
}

/// Largest value or gradient mismatch between Bernstein and direct evaluation.
pub fn extraction_error() -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let kx =
        KnotVector::from_breakpoints(3, &[0.0, 0.13, 0.4, 0.55, 0.81, 1.0], &[1, 1, 1, 1]).unwrap();
    let ky = KnotVector::from_breakpoints(3, &[0.0, 0.3, 0.62, 1.0], &[1, 1]).unwrap();
    let space = TensorSplineSpace::new(kx, ky).unwrap();
    let coeffs: Vec<f64> = (0..space.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mut worst: f64 = 0.0;
    for _ in 0..300 {
        let xi = [rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)];
        let cell = space.cell_of_point(xi);
        let ext = space.extraction(cell);
        let local: Vec<f64> = space.cell_dofs(cell).iter().map(|&d| coeffs[d]).collect();
        let (v, g) = ext.eval(&ext.apply(&local), xi);
        let (v0, g0) = space.eval_in_cell(&coeffs, cell, xi);
        worst = worst
            .max((v - v0).abs())
            .max((g[0] - g0[0]).abs())
            .max((g[1] - g0[1]).abs());
    }
    worst
}

/// Flux of every extension at the trim frames of bad cells, against the exact
/// normal derivative of a polynomial represented exactly in the space.
pub fn flux_error(map: &GeometryMap, mode: StabMode) -> f64 {
    let p = 2;
    let space = TensorSplineSpace::uniform(8, p, p - 1).unwrap();
    let q = |x: [f64; 2]| 1.0 + x[0] - 2.0 * x[1] + x[0] * x[0] * x[1] + 0.5 * x[1] * x[1];
    let dq = |x: [f64; 2]| [1.0 + 2.0 * x[0] * x[1], -2.0 + x[0] * x[0] + x[1]];
    let region = TrimRegion::HalfPlaneParam {
        axis: 1,
        threshold: 0.757,
        keep_below: true,
    };
    let tm = classify_cells(&space, map, &region, 1.0, p + 2).unwrap();
    let plan = StabilizationPlan::build(&space, map, &tm, mode, p + 2).unwrap();
    let parametric = mode == StabMode::Parametric;
    // parametric polynomial for the parametric check, physical otherwise
    let coeffs = if parametric {
        l2_project_global(&space, q, p + 3).unwrap()
    } else {
        l2_project_global(&space, |xi| q(map.map_eval(xi).unwrap().point), p + 3).unwrap()
    };
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for cell in tm.bad_cells() {
        let frames = &tm.cell(cell).trim_frames;
        let rh = plan.eval_rh(&space, map, &coeffs, cell, frames).unwrap();
        for (f, r) in frames.iter().zip(rh) {
            let g = if parametric {
                map.map_eval(f.xi).unwrap().push_gradient(dq(f.xi))
            } else {
                dq(f.frame.point)
            };
            worst = worst.max((r - (g[0] * f.frame.normal[0] + g[1] * f.frame.normal[1])).abs());
            count += 1;
        }
    }
    assert!(count > 0);
    worst
}

/// Errors of the removed quarter-disk area and its arc length.
pub fn disk_errors() -> (f64, f64) {
    let space = TensorSplineSpace::uniform(16, 2, 1).unwrap();
    let region = TrimRegion::DiskParam {
        center: [0.0, 0.0],
        radius: 0.76,
        keep_outside: false,
    };
    let tm = classify_cells(&space, &GeometryMap::Identity, &region, 0.1, 4).unwrap();
    (
        (tm.param_area() - PI * 0.76 * 0.76 / 4.0).abs(),
        (tm.trim_length() - 0.38 * PI).abs(),
    )
}

const EPS_MESH: &str = "experiment = stability
geometry = identity
region.kind = half_plane
region.threshold = 0.757
degree = 3
levels = 4
";

/// Nitsche matrix on the cubic eps mesh of level 4.
pub fn eps_matrix(map: &GeometryMap, eps: f64, theta: f64, mode: StabMode) -> CsrMatrix {
    let cfg = ExperimentConfig::parse(EPS_MESH).unwrap();
    let space = build_space(&cfg, 4, Some(eps), map).unwrap();
    let q = 5;
    let tm = classify_cells(&space, map, &cfg.region, theta, q).unwrap();
    let plan = StabilizationPlan::build(&space, map, &tm, mode, q).unwrap();
    let mut data = ProblemData::homogeneous([BcKind::Neumann; 4], BcKind::WeakDirichlet, 1.0);
    data.f = Arc::new(|x| x[0] + x[1]);
    assemble(&space, &tm, map, &plan, &data).unwrap().matrix
}

/// Entrywise difference relative to the largest entry; infinite on a pattern mismatch.
pub fn matrix_rel_diff(a: &CsrMatrix, b: &CsrMatrix) -> f64 {
    if a.nnz() != b.nnz() {
        return f64::INFINITY;
    }
    a.iter()
        .map(|(i, j, v)| (v - b.get(i, j)).abs())
        .fold(0.0, f64::max)
        / a.max_abs()
}

/// Relative 1,h error of a tensor polynomial solution on the half-plane trim.
pub fn patch_error(p: usize, mode: StabMode) -> f64 {
    let pf = p as i32;
    let u = move |x: [f64; 2]| (1.0 + x[0] + x[0].powi(pf)) * (2.0 - x[1] + 0.5 * x[1].powi(pf));
    let du = move |x: [f64; 2]| {
        let a = 1.0 + x[0] + x[0].powi(pf);
        let b = 2.0 - x[1] + 0.5 * x[1].powi(pf);
        let da = 1.0 + pf as f64 * x[0].powi(pf - 1);
        let db = -1.0 + 0.5 * pf as f64 * x[1].powi(pf - 1);
        [da * b, a * db]
    };
    let f = move |x: [f64; 2]| {
        let a = 1.0 + x[0] + x[0].powi(pf);
        let b = 2.0 - x[1] + 0.5 * x[1].powi(pf);
        let k = (pf * (pf - 1)) as f64;
        let dda = if p >= 2 { k * x[0].powi(pf - 2) } else { 0.0 };
        let ddb = if p >= 2 {
            0.5 * k * x[1].powi(pf - 2)
        } else {
            0.0
        };
        -(dda * b + a * ddb)
    };
    let space = TensorSplineSpace::uniform(8, p, p - 1).unwrap();
    let map = GeometryMap::Identity;
    let region = TrimRegion::HalfPlaneParam {
        axis: 1,
        threshold: 0.757,
        keep_below: true,
    };
    let q = p + 2;
    let tm = classify_cells(&space, &map, &region, 1.0, q).unwrap();
    assert!(tm.bad_cells().count() > 0);
    let plan = StabilizationPlan::build(&space, &map, &tm, mode, q).unwrap();
    let data = ProblemData {
        f: Arc::new(f),
        g_d: Arc::new(u),
        g_n: Arc::new(move |x, n| {
            let g = du(x);
            g[0] * n[0] + g[1] * n[1]
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
    let sys = assemble(&space, &tm, &map, &plan, &data).unwrap();
    let sys = apply_strong_bc(sys, &space, &map, &tm, &data.g_d, &data.strong_sides()).unwrap();
    let c = solve(&sys).unwrap();
    let weak = data.weak_boundary();
    let (e, _) = error_norms(&space, &tm, &map, &c, &u, &du, weak).unwrap();
    let zero = vec![0.0; c.len()];
    let (norm, _) = error_norms(&space, &tm, &map, &zero, &u, &du, weak).unwrap();
    e / norm
}
