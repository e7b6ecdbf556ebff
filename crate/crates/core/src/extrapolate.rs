//! Limits of sequences sampled on a geometric ladder of distances.

use nalgebra::{DMatrix, DVector};

/// Geometric ladder of `n` distances from `hi` down to `lo`.
pub fn ladder(hi: f64, lo: f64, n: usize) -> Vec<f64> {
    let q = (lo / hi).powf(1.0 / (n - 1) as f64);
    (0..n).map(|k| hi * q.powi(k as i32)).collect()
}

/// Least squares solution of `rows * x = y`.
pub fn lstsq(rows: &[Vec<f64>], y: &[f64]) -> Vec<f64> {
    let m = rows.len();
    let n = rows[0].len();
    let a = DMatrix::from_fn(m, n, |i, j| rows[i][j]);
    let b = DVector::from_column_slice(y);
    let svd = a.svd(true, true);
    svd.solve(&b, 1e-14).map(|x| x.iter().copied().collect()).unwrap_or_else(|_| vec![f64::NAN; n])
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LimitMethod {
    Exact,
    Power,
    LogRational,
}

#[derive(Clone, Copy, Debug)]
pub struct LimitEstimate {
    pub value: f64,
    /// Disagreement between the two most refined estimates.
    pub spread: f64,
    pub method: LimitMethod,
    /// Estimated convergence order in `d` (power-law case).
    pub order: f64,
}

fn aitken(g: &[f64]) -> (f64, f64) {
    let d1 = g[0] - g[1];
    let d2 = g[1] - g[2];
    if d1 == 0.0 || d2 == 0.0 {
        return (g[2], 0.0);
    }
    let r = d2 / d1;
    (g[2] - d2 * r / (1.0 - r), r)
}

/// Fit `g = limit + sum_k a_k / (ln d - b)^k`, optimizing `b` by scan.
pub fn log_rational_fit(ds: &[f64], gs: &[f64], degree: usize) -> (f64, f64) {
    let ls: Vec<f64> = ds.iter().map(|d| d.ln()).collect();
    let lmax = ls.iter().cloned().fold(f64::MIN, f64::max);
    let lmin = ls.iter().cloned().fold(f64::MAX, f64::min);
    let fit = |b: f64| -> (f64, f64) {
        let rows: Vec<Vec<f64>> = ls
            .iter()
            .map(|l| (0..=degree).map(|k| (l - b).powi(-(k as i32))).collect())
            .collect();
        let x = lstsq(&rows, gs);
        let res: f64 = rows
            .iter()
            .zip(gs)
            .map(|(r, g)| (r.iter().zip(&x).map(|(a, c)| a * c).sum::<f64>() - g).powi(2))
            .sum();
        (x[0], res.sqrt())
    };
    let mut cands: Vec<f64> = Vec::new();
    for i in 0..=400 {
        let b = lmax + 0.25 + 40.0 * i as f64 / 400.0;
        cands.push(b);
        let b2 = lmin - 0.25 - 40.0 * i as f64 / 400.0;
        cands.push(b2);
    }
    let mut best = (f64::NAN, f64::INFINITY, 0.0);
    for &b in &cands {
        let (v, r) = fit(b);
        if r.is_finite() && r < best.1 {
            best = (v, r, b);
        }
    }
    // local golden refinement
    let (mut lo, mut hi) = (best.2 - 0.1, best.2 + 0.1);
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..60 {
        let m1 = hi - phi * (hi - lo);
        let m2 = lo + phi * (hi - lo);
        let ok = |b: f64| b > lmax + 1e-3 || b < lmin - 1e-3;
        let r1 = if ok(m1) { fit(m1).1 } else { f64::INFINITY };
        let r2 = if ok(m2) { fit(m2).1 } else { f64::INFINITY };
        if r1 < r2 {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    let b = 0.5 * (lo + hi);
    let (v, r) = fit(b);
    if r.is_finite() && r <= best.1 {
        (v, r)
    } else {
        (best.0, best.1)
    }
}

/// Estimate `lim_{d -> 0} g(d)` from samples on a geometric ladder (decreasing `ds`).
///
/// Power-law convergence is accelerated with Aitken's process. When the
/// apparent order is small the sequence is treated as logarithmic.
pub fn estimate_limit(ds: &[f64], gs: &[f64]) -> LimitEstimate {
    let n = gs.len();
    assert!(n >= 3 && ds.len() == n);
    let scale = gs.iter().fold(0.0f64, |m, g| m.max(g.abs())).max(1.0);
    if gs.iter().all(|g| (g - gs[n - 1]).abs() <= 1e-13 * scale) {
        return LimitEstimate { value: gs[n - 1], spread: 0.0, method: LimitMethod::Exact, order: f64::INFINITY };
    }
    let q = ds[1] / ds[0];
    let (a_last, r_last) = aitken(&gs[n - 3..]);
    let a_prev = if n >= 4 { aitken(&gs[n - 4..n - 1]).0 } else { a_last };
    let order = if r_last > 0.0 { r_last.ln() / q.ln() } else { f64::NAN };
    let tiny_steps = (gs[n - 1] - gs[n - 2]).abs() <= 1e-12 * scale;
    if tiny_steps || (order.is_finite() && order > 0.25) {
        return LimitEstimate { value: a_last, spread: (a_last - a_prev).abs(), method: LimitMethod::Power, order };
    }
    let deg = if n >= 5 { 2 } else { 1 };
    let (v, res) = log_rational_fit(ds, gs, deg);
    let (v1, _) = log_rational_fit(ds, gs, 1);
    LimitEstimate { value: v, spread: res.max((v - v1).abs() * 0.1), method: LimitMethod::LogRational, order: 0.0 }
}

/// True when `|g|` keeps growing geometrically along the ladder.
pub fn diverging(gs: &[f64]) -> bool {
    let n = gs.len();
    n >= 3 && (n - 3..n - 1).all(|i| gs[i + 1].abs() > 1.5 * gs[i].abs() && gs[i + 1].abs() > 1e-6)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_law_sequence() {
        let ds = ladder(1e-2, 1e-5, 5);
        let gs: Vec<f64> = ds.iter().map(|d| 0.5 + 3.0 * d.powf(1.5) - d * d).collect();
        let e = estimate_limit(&ds, &gs);
        assert_eq!(e.method, LimitMethod::Power);
        assert!((e.value - 0.5).abs() < 1e-9, "{e:?}");
    }

    #[test]
    fn log_sequence() {
        let ds = ladder(1e-2, 1e-5, 5);
        let gs: Vec<f64> = ds.iter().map(|d| 2.0 + 2.0 / (d.ln() - 1.693)).collect();
        let e = estimate_limit(&ds, &gs);
        assert_eq!(e.method, LimitMethod::LogRational);
        assert!((e.value - 2.0).abs() < 1e-6, "{e:?}");
    }

    #[test]
    fn lstsq_line() {
        let rows = vec![vec![1.0, 0.0], vec![1.0, 1.0], vec![1.0, 2.0]];
        let x = lstsq(&rows, &[1.0, 3.0, 5.0]);
        assert!((x[0] - 1.0).abs() < 1e-12 && (x[1] - 2.0).abs() < 1e-12);
    }
}
