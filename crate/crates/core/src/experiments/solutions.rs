use std::f64::consts::PI;
use std::sync::Arc;

use crate::{Error, Result};

type Field = Arc<dyn Fn([f64; 2]) -> f64 + Send + Sync>;
type Grad = Arc<dyn Fn([f64; 2]) -> [f64; 2] + Send + Sync>;

/// Analytic `u`, `∇u` and `f = -Δu`.
#[derive(Clone)]
pub struct ManufacturedSolution {
    pub name: String,
    pub u: Field,
    pub grad: Grad,
    pub f: Field,
}

impl std::fmt::Debug for ManufacturedSolution {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ManufacturedSolution")
            .field("name", &self.name)
            .finish()
    }
}

pub const SOLUTION_NAMES: [&str; 4] = ["exp_sin", "lshape", "poly", "zero"];

impl ManufacturedSolution {
    /// Looks up a registered solution; `degree` is used by `poly`.
    pub fn by_name(name: &str, degree: usize) -> Result<Self> {
        match name {
            "exp_sin" => Ok(exp_sin()),
            "lshape" => Ok(lshape()),
            "poly" => Ok(poly(degree)),
            "zero" => Ok(Self {
                name: "zero".into(),
                u: Arc::new(|_| 0.0),
                grad: Arc::new(|_| [0.0, 0.0]),
                f: Arc::new(|_| 0.0),
            }),
            _ => Err(Error::Config(format!(
                "unknown solution '{name}' (expected one of {})",
                SOLUTION_NAMES.join(", ")
            ))),
        }
    }
}

/// `u = eˣ sin(xy)`.
impl ManufacturedSolution {
    /// Largest scaled mismatch between `f` and the five-point `-Δu`, and
    /// between `∇u` and central differences, over `points`.
    pub fn fd_mismatch(&self, points: &[[f64; 2]]) -> f64 {
        let h = 1e-4;
        let mut worst: f64 = 0.0;
        for p in points {
            let u = |dx: f64, dy: f64| (self.u)([p[0] + dx, p[1] + dy]);
            let lap =
                (u(h, 0.0) + u(-h, 0.0) + u(0.0, h) + u(0.0, -h) - 4.0 * u(0.0, 0.0)) / (h * h);
            let f = (self.f)(*p);
            let g = (self.grad)(*p);
            let gx = (u(h, 0.0) - u(-h, 0.0)) / (2.0 * h);
            let gy = (u(0.0, h) - u(0.0, -h)) / (2.0 * h);
            worst = worst
                .max((f + lap).abs() / (1.0 + f.abs()))
                .max(10.0 * (g[0] - gx).abs() / (1.0 + gx.abs()))
                .max(10.0 * (g[1] - gy).abs() / (1.0 + gy.abs()));
        }
        worst
    }
}

pub fn exp_sin() -> ManufacturedSolution {
    ManufacturedSolution {
        name: "exp_sin".into(),
        u: Arc::new(|p| p[0].exp() * (p[0] * p[1]).sin()),
        grad: Arc::new(|p| {
            let (x, y) = (p[0], p[1]);
            let (s, c) = (x * y).sin_cos();
            let e = x.exp();
            [e * (s + y * c), e * x * c]
        }),
        f: Arc::new(|p| {
            let (x, y) = (p[0], p[1]);
            let (s, c) = (x * y).sin_cos();
            -x.exp() * ((1.0 - x * x - y * y) * s + 2.0 * y * c)
        }),
    }
}

/// Angle in `[-π/4, 7π/4)`. The cut ray leaves the L-shape through the
/// removed quadrant, and `r^{2/3} sin(2φ/3)` is continuous across it.
fn lshape_angle(p: [f64; 2]) -> f64 {
    let phi = p[1].atan2(p[0]);
    if phi < -0.25 * PI {
        phi + 2.0 * PI
    } else {
        phi
    }
}

/// `u = r^{2/3} sin(2φ/3)`, harmonic, vanishing on the re-entrant edges.
pub fn lshape() -> ManufacturedSolution {
    ManufacturedSolution {
        name: "lshape".into(),
        u: Arc::new(|p| {
            let r = p[0].hypot(p[1]);
            r.powf(2.0 / 3.0) * (2.0 * lshape_angle(p) / 3.0).sin()
        }),
        grad: Arc::new(|p| {
            let r = p[0].hypot(p[1]);
            if r == 0.0 {
                return [f64::INFINITY, f64::INFINITY];
            }
            let phi = lshape_angle(p);
            let k = 2.0 / 3.0 * r.powf(-1.0 / 3.0);
            [-k * (phi / 3.0).sin(), k * (phi / 3.0).cos()]
        }),
        f: Arc::new(|_| 0.0),
    }
}

/// `u = (1 + x + xᵖ)(2 − y + yᵖ/2) ∈ Q_p`.
pub fn poly(p: usize) -> ManufacturedSolution {
    let k = p as i32;
    let a = move |x: f64| 1.0 + x + x.powi(k);
    let da = move |x: f64| 1.0 + k as f64 * x.powi(k - 1);
    let dda = move |x: f64| {
        if k >= 2 {
            (k * (k - 1)) as f64 * x.powi(k - 2)
        } else {
            0.0
        }
    };
    let b = move |y: f64| 2.0 - y + 0.5 * y.powi(k);
    let db = move |y: f64| -1.0 + 0.5 * k as f64 * y.powi(k - 1);
    let ddb = move |y: f64| {
        if k >= 2 {
            0.5 * (k * (k - 1)) as f64 * y.powi(k - 2)
        } else {
            0.0
        }
    };
    ManufacturedSolution {
        name: "poly".into(),
        u: Arc::new(move |p| a(p[0]) * b(p[1])),
        grad: Arc::new(move |p| [da(p[0]) * b(p[1]), a(p[0]) * db(p[1])]),
        f: Arc::new(move |p| -(dda(p[0]) * b(p[1]) + a(p[0]) * ddb(p[1]))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn fd_check(s: &ManufacturedSolution, lo: [f64; 2], hi: [f64; 2]) {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let pts: Vec<[f64; 2]> = (0..100)
            .map(|_| [rng.gen_range(lo[0]..hi[0]), rng.gen_range(lo[1]..hi[1])])
            .collect();
        let m = s.fd_mismatch(&pts);
        assert!(m < 1e-5, "{}: mismatch {m:e}", s.name);
    }

    #[test]
    fn sources_match_finite_differences() {
        fd_check(&exp_sin(), [-2.0, -2.0], [2.0, 2.0]);
        for p in 1..=3 {
            fd_check(&poly(p), [0.0, 0.0], [1.0, 1.0]);
        }
        // stay off the cut ray and the origin
        fd_check(&lshape(), [-2.0, 0.1], [1.0, 2.0]);
        fd_check(&lshape(), [-2.0, -1.0], [-0.1, 0.0]);
    }

    #[test]
    fn lshape_vanishes_on_reentrant_edges_and_is_continuous_across_the_cut() {
        let s = lshape();
        for t in [0.1, 0.5, 0.9] {
            assert!((s.u)([t, 0.0]).abs() < 1e-15);
            assert!((s.u)([0.0, -t]).abs() < 1e-12);
            let a = (s.u)([t + 1e-12, -t]);
            let b = (s.u)([t - 1e-12, -t]);
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn unknown_name_is_a_config_error() {
        assert!(ManufacturedSolution::by_name("bessel", 2)
            .unwrap_err()
            .is_config());
    }
}
