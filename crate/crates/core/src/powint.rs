//! Closed-form integrals of `|s(t)|^p`-type expressions for an affine
//! `s(t) = a + (b-a) t` on `[0, 1]`.
//!
//! The antiderivatives `s |s|^p / (p+1)` and `|s|^p / p` are globally C^1,
//! so these formulas are exact across a sign change of `s`. Near `a = b`
//! the difference quotients cancel catastrophically; a midpoint Taylor
//! expansion takes over below a relative gap of 1e-5.

const SMALL_GAP_REL: f64 = 1e-5;

/// `int_0^1 |a + (b-a) t|^p dt`, exact for any `p > 0`.
pub fn int_abs_pow(a: f64, b: f64, p: f64) -> f64 {
    debug_assert!(p > 0.0);
    let d = b - a;
    let m = a.abs() + b.abs();
    if m == 0.0 {
        return 0.0;
    }
    if d.abs() <= SMALL_GAP_REL * m {
        let c = 0.5 * (a + b);
        let f = c.abs().powf(p);
        let f2 = p * (p - 1.0) * c.abs().powf(p - 2.0);
        return f + f2 * d * d / 24.0;
    }
    (b * b.abs().powf(p) - a * a.abs().powf(p)) / ((p + 1.0) * d)
}

/// `int_0^1 |s|^{p-2} s dt`, the signed-power mean; exact for `p > 1`.
pub fn int_signed_pow(a: f64, b: f64, p: f64) -> f64 {
    debug_assert!(p > 1.0);
    let d = b - a;
    let m = a.abs() + b.abs();
    if m == 0.0 {
        return 0.0;
    }
    if d.abs() <= SMALL_GAP_REL * m {
        let c = 0.5 * (a + b);
        let g = c.abs().powf(p - 2.0) * c;
        let g2 = (p - 1.0) * (p - 2.0) * c.abs().powf(p - 4.0) * c;
        return g + g2 * d * d / 24.0;
    }
    (b.abs().powf(p) - a.abs().powf(p)) / (p * d)
}

/// `int_0^1 |s|^{p-2} s t dt`; with [`int_signed_pow`] this gives the
/// endpoint-weighted moments needed for boundary-term gradients.
pub fn int_signed_pow_t(a: f64, b: f64, p: f64) -> f64 {
    debug_assert!(p > 1.0);
    let d = b - a;
    let m = a.abs() + b.abs();
    if m == 0.0 {
        return 0.0;
    }
    if d.abs() <= SMALL_GAP_REL * m {
        let c = 0.5 * (a + b);
        let g = c.abs().powf(p - 2.0) * c;
        let g1 = (p - 1.0) * c.abs().powf(p - 2.0);
        let g2 = (p - 1.0) * (p - 2.0) * c.abs().powf(p - 4.0) * c;
        return 0.5 * g + g1 * d / 12.0 + g2 * d * d / 48.0;
    }
    ((b * b.abs().powf(p) - a * a.abs().powf(p)) / (p + 1.0)
        - a * (b.abs().powf(p) - a.abs().powf(p)) / p)
        / (d * d)
}

#[cfg(test)]
mod tests {
    use super::*;

    // Composite Simpson oracle, independent of the closed forms.
    fn simpson(f: impl Fn(f64) -> f64, n: usize) -> f64 {
        let h = 1.0 / n as f64;
        let mut s = f(0.0) + f(1.0);
        for i in 1..n {
            let w = if i % 2 == 0 { 2.0 } else { 4.0 };
            s += w * f(i as f64 * h);
        }
        s * h / 3.0
    }

    fn sval(a: f64, b: f64, t: f64) -> f64 {
        a + (b - a) * t
    }

    #[test]
    fn abs_pow_matches_simpson() {
        for &(a, b, p) in &[
            (0.0, 1.0, 2.0),
            (-0.5, 0.5, 2.0),
            (-1.3, 2.7, 3.5),
            (2.0, 5.0, 1.2),
            (-4.0, -1.0, 6.0),
        ] {
            let got = int_abs_pow(a, b, p);
            let want = simpson(|t| sval(a, b, t).abs().powf(p), 40_000);
            assert!(
                (got - want).abs() <= 1e-9 * (1.0 + want.abs()),
                "a={a} b={b} p={p}: {got} vs {want}"
            );
        }
    }

    #[test]
    fn abs_pow_simple_cases() {
        // int_0^1 t^2 dt = 1/3
        assert!((int_abs_pow(0.0, 1.0, 2.0) - 1.0 / 3.0).abs() < 1e-15);
        // constant segment
        assert!((int_abs_pow(2.0, 2.0, 3.0) - 8.0).abs() < 1e-12);
        assert_eq!(int_abs_pow(0.0, 0.0, 2.0), 0.0);
    }

    #[test]
    fn signed_pow_matches_simpson() {
        for &(a, b, p) in &[
            (-1.0, 1.0, 2.0),
            (-0.3, 1.9, 4.0),
            (0.5, 3.5, 2.8),
            (-2.0, -0.1, 5.0),
        ] {
            let got = int_signed_pow(a, b, p);
            let want = simpson(
                |t| {
                    let s = sval(a, b, t);
                    s.abs().powf(p - 2.0) * s
                },
                40_000,
            );
            assert!(
                (got - want).abs() <= 1e-9 * (1.0 + want.abs()),
                "a={a} b={b} p={p}: {got} vs {want}"
            );
        }
    }

    #[test]
    fn signed_pow_odd_symmetry() {
        // s antisymmetric on [-1,1] integrates to zero.
        assert!(int_signed_pow(-1.0, 1.0, 3.0).abs() < 1e-15);
        assert!((int_signed_pow(1.0, 1.0, 3.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn signed_pow_t_matches_simpson() {
        for &(a, b, p) in &[
            (-1.0, 1.0, 2.0),
            (-0.3, 1.9, 4.0),
            (0.5, 3.5, 2.8),
            (-2.0, -0.1, 5.0),
            (1.0, 1.0 + 1e-4, 3.0),
        ] {
            let got = int_signed_pow_t(a, b, p);
            let want = simpson(
                |t| {
                    let s = sval(a, b, t);
                    s.abs().powf(p - 2.0) * s * t
                },
                40_000,
            );
            assert!(
                (got - want).abs() <= 1e-8 * (1.0 + want.abs()),
                "a={a} b={b} p={p}: {got} vs {want}"
            );
        }
    }

    #[test]
    fn small_gap_branch_is_smooth() {
        // Values just above and below the Taylor cutoff must agree.
        let p = 3.3;
        let a = 1.0;
        for &eps in &[1.9e-5, 2.1e-5] {
            let direct = int_signed_pow_t(a, a + eps, p);
            let mid = int_signed_pow_t(a, a + 2.0 * eps, p);
            assert!((direct - mid).abs() < 1e-4 * mid.abs());
        }
        let lo = int_abs_pow(a, a + 0.9e-5 * 2.0 * a, p);
        let hi = int_abs_pow(a, a + 1.1e-5 * 2.0 * a, p);
        assert!((lo / hi - 1.0).abs() < 1e-4);
    }

    #[test]
    fn endpoint_weight_identity() {
        // int g * t + int g * (1-t) = int g.
        let (a, b, p) = (-0.7, 2.2, 3.7);
        let total = int_signed_pow(a, b, p);
        let right = int_signed_pow_t(a, b, p);
        let left = total - right;
        let want_left = simpson(
            |t| {
                let s = sval(a, b, t);
                s.abs().powf(p - 2.0) * s * (1.0 - t)
            },
            40_000,
        );
        assert!((left - want_left).abs() < 1e-9);
    }
}
