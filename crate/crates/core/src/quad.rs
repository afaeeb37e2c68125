//! Gauss-Legendre quadrature with cached nodes and adaptive bisection.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`,
/// computed by Newton iteration on the Legendre recurrence and cached.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    assert!(n >= 1);
    static CACHE: OnceLock<Mutex<HashMap<usize, Vec<(f64, f64)>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(rule) = cache.lock().unwrap().get(&n) {
        return rule.clone();
    }
    let rule = compute_rule(n);
    cache.lock().unwrap().insert(n, rule.clone());
    rule
}

fn compute_rule(n: usize) -> Vec<(f64, f64)> {
    let mut rule = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.push((x, w));
    }
    rule.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    rule
}

/// Legendre polynomial `P_n(x)` and its derivative.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = (n as f64) * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Fixed-order Gauss-Legendre on `[a, b]`.
pub fn integrate(f: &impl Fn(f64) -> f64, a: f64, b: f64, order: usize) -> f64 {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    gauss_legendre(order)
        .iter()
        .map(|&(x, w)| w * f(mid + half * x))
        .sum::<f64>()
        * half
}

/// Adaptive bisection: subdivide until two successive refinement levels
/// agree to `rel_tol` (with `abs_tol` as a floor) or `max_depth` is hit.
pub fn integrate_adaptive(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    order: usize,
    rel_tol: f64,
    abs_tol: f64,
    max_depth: u32,
) -> f64 {
    let whole = integrate(f, a, b, order);
    adapt(f, a, b, order, whole, rel_tol, abs_tol, max_depth)
}

fn adapt(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    order: usize,
    whole: f64,
    rel_tol: f64,
    abs_tol: f64,
    depth: u32,
) -> f64 {
    let mid = 0.5 * (a + b);
    let left = integrate(f, a, mid, order);
    let right = integrate(f, mid, b, order);
    let refined = left + right;
    let err = (refined - whole).abs();
    if depth == 0 || err <= rel_tol * refined.abs() + abs_tol {
        return refined;
    }
    adapt(f, a, mid, order, left, rel_tol, abs_tol * 0.5, depth - 1)
        + adapt(f, mid, b, order, right, rel_tol, abs_tol * 0.5, depth - 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn low_order_rules_match_known_values() {
        let r1 = gauss_legendre(1);
        assert!((r1[0].0).abs() < 1e-15 && (r1[0].1 - 2.0).abs() < 1e-15);
        let r2 = gauss_legendre(2);
        let x = 1.0 / 3.0_f64.sqrt();
        assert!((r2[0].0 + x).abs() < 1e-14 && (r2[1].0 - x).abs() < 1e-14);
        assert!((r2[0].1 - 1.0).abs() < 1e-14);
    }

    #[test]
    fn weights_sum_to_interval_length() {
        for n in [3, 8, 17, 32] {
            let s: f64 = gauss_legendre(n).iter().map(|&(_, w)| w).sum();
            assert!((s - 2.0).abs() < 1e-13, "n={n}");
        }
    }

    #[test]
    fn exact_for_polynomials() {
        // order n is exact through degree 2n-1
        let f = |x: f64| 5.0 * x.powi(7) - x.powi(4) + 2.0;
        let got = integrate(&f, 0.0, 1.0, 4);
        let want = 5.0 / 8.0 - 1.0 / 5.0 + 2.0;
        assert!((got - want).abs() < 1e-13);
    }

    #[test]
    fn adaptive_handles_algebraic_endpoint() {
        // int_0^1 sqrt(t) dt = 2/3; plain GL-6 is off, adaptivity fixes it.
        let f = |t: f64| t.sqrt();
        let got = integrate_adaptive(&f, 0.0, 1.0, 6, 1e-12, 1e-15, 30);
        assert!((got - 2.0 / 3.0).abs() < 1e-10, "got {got}");
    }
}
