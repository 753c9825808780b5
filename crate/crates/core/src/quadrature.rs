//! Gauss–Legendre rules on intervals and tensor rules on boxes.

use std::f64::consts::PI;

/// Points and weights of an `n`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0, "a quadrature rule needs at least one point");
    let mut points = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi initial guess, then Newton on P_n.
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        points[i] = -x;
        points[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        points[n / 2] = 0.0;
    }
    (points, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Gauss rule mapped to `[a, b]`.
pub fn gauss_on_interval(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    (
        x.iter().map(|t| mid + half * t).collect(),
        w.iter().map(|wi| wi * half).collect(),
    )
}

/// A 2D rule: parametric points with positive weights.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct QuadRule {
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
}

impl QuadRule {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn push(&mut self, p: [f64; 2], w: f64) {
        self.points.push(p);
        self.weights.push(w);
    }

    /// Tensor Gauss rule with `n` points per direction on a box.
    pub fn tensor_box(n: usize, bounds: [[f64; 2]; 2]) -> Self {
        let (x, wx) = gauss_on_interval(n, bounds[0][0], bounds[0][1]);
        let (y, wy) = gauss_on_interval(n, bounds[1][0], bounds[1][1]);
        let mut rule = QuadRule::default();
        for (yj, wyj) in y.iter().zip(&wy) {
            for (xi, wxi) in x.iter().zip(&wx) {
                rule.push([*xi, *yj], wxi * wyj);
            }
        }
        rule
    }

    pub fn integrate(&self, f: impl Fn([f64; 2]) -> f64) -> f64 {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(p, w)| w * f(*p))
            .sum()
    }
}

/// Legendre polynomials `P_0..=P_n` and their derivatives at `x`.
pub fn legendre_table(n: usize, x: f64) -> (Vec<f64>, Vec<f64>) {
    let mut p = vec![0.0; n + 1];
    let mut d = vec![0.0; n + 1];
    p[0] = 1.0;
    if n >= 1 {
        p[1] = x;
        d[1] = 1.0;
    }
    for k in 2..=n {
        let kf = k as f64;
        p[k] = ((2.0 * kf - 1.0) * x * p[k - 1] - (kf - 1.0) * p[k - 2]) / kf;
        d[k] = d[k - 2] + (2.0 * kf - 1.0) * p[k - 1];
    }
    (p, d)
}
