pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Bernstein polynomials of degree `p` on `[0, 1]` and derivatives up to
/// `max_order`: `out[k][j]` is the k-th derivative of `B_{j,p}` at `t`.
///
/// `t` may lie outside `[0, 1]`; the polynomials are simply continued.
pub fn bernstein_ders(p: usize, t: f64, max_order: usize) -> Vec<Vec<f64>> {
    // tables[q] holds the degree-q Bernstein values.
    let mut tables: Vec<Vec<f64>> = Vec::with_capacity(p + 1);
    tables.push(vec![1.0]);
    for q in 1..=p {
        let prev = &tables[q - 1];
        let mut cur = vec![0.0; q + 1];
        for j in 0..=q {
            let a = if j < q { (1.0 - t) * prev[j] } else { 0.0 };
            let b = if j > 0 { t * prev[j - 1] } else { 0.0 };
            cur[j] = a + b;
        }
        tables.push(cur);
    }
    let mut out = vec![vec![0.0; p + 1]; max_order + 1];
    for k in 0..=max_order {
        if k > p {
            continue;
        }
        // d^k/dt^k B_{j,p} = p!/(p-k)! Σ_i (-1)^(k-i) C(k,i) B_{j-i,p-k}
        let scale: f64 = (0..k).map(|i| (p - i) as f64).product();
        let low = &tables[p - k];
        for j in 0..=p {
            let mut acc = 0.0;
            for i in 0..=k {
                if j >= i && j - i <= p - k {
                    let sign = if (k - i) % 2 == 0 { 1.0 } else { -1.0 };
                    acc += sign * binomial(k, i) * low[j - i];
                }
            }
            out[k][j] = scale * acc;
        }
    }
    out
}
