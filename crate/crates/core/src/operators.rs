//! Pointwise evaluators for the orthotropic interior and boundary
//! operators: the (negated) orthotropic p-Laplacian, the Steklov boundary
//! residual, the orthotropic infinity-Laplacian and the three-branch
//! limit boundary operator.
//!
//! Hessians are passed as row-major `n x n` slices; only diagonal entries
//! enter the orthotropic operators.

use crate::error::{Error, Result};
use crate::lp::{lp_norm, max_index_set, Exponent};

/// Relative scale of the epsilon regularization of `|t|^{p-2}` near
/// `t = 0` for `p < 2`. The `p >= 2` path is exact.
const POW_EPS_REL: f64 = 1e-12;

/// `|t|^{p-2}`, regularized as `(t^2 + eps^2)^{(p-2)/2}` for `p < 2`
/// so the factor stays finite at `t = 0`.
pub(crate) fn abs_pow_pm2(t: f64, p: f64, scale: f64) -> f64 {
    let q = p - 2.0;
    if q == 0.0 {
        1.0
    } else if q > 0.0 {
        t.abs().powf(q)
    } else {
        let eps = POW_EPS_REL * scale;
        (t * t + eps * eps).powf(q / 2.0)
    }
}

/// `|t|^{p-2} t`, with the same regularization for `p < 2`.
pub(crate) fn signed_pow_pm1(t: f64, p: f64, scale: f64) -> f64 {
    if t == 0.0 {
        return 0.0;
    }
    abs_pow_pm2(t, p, scale) * t
}

fn check_square(hess: &[f64], n: usize) -> Result<()> {
    if hess.len() != n * n {
        return Err(Error::Domain(format!(
            "hessian must be {n}x{n} row-major, got {} entries",
            hess.len()
        )));
    }
    if hess.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("non-finite entry in hessian".into()));
    }
    Ok(())
}

fn check_finite(v: &[f64], what: &str) -> Result<()> {
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::Domain(format!("non-finite entry in {what}")));
    }
    Ok(())
}

/// Orthotropic infinity-Laplacian: sum of `g_j^2 * H_jj` over the
/// coordinates where `|g_j|` attains the max norm (tie tolerance `tau`).
/// Returns 0 for a zero gradient.
pub fn inf_laplacian(grad: &[f64], hess: &[f64], tau: f64) -> Result<f64> {
    check_finite(grad, "gradient")?;
    check_square(hess, grad.len())?;
    if grad.iter().all(|&g| g == 0.0) {
        return Ok(0.0);
    }
    let idx = max_index_set(grad, tau)?;
    let n = grad.len();
    Ok(idx
        .iter()
        .map(|j| grad[j] * grad[j] * hess[j * n + j])
        .sum())
}

/// Negated orthotropic p-Laplacian of a C^2 function, evaluated from its
/// gradient and Hessian: `-(p-1) * sum_j |g_j|^{p-2} H_jj`.
pub fn neg_p_laplacian(p: f64, grad: &[f64], hess: &[f64]) -> Result<f64> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(Error::Domain(format!("p must be finite and > 1, got {p}")));
    }
    check_finite(grad, "gradient")?;
    check_square(hess, grad.len())?;
    let scale = 1.0 + grad.iter().fold(0.0_f64, |a, g| a.max(g.abs()));
    let n = grad.len();
    let s: f64 = (0..n)
        .map(|j| {
            let h = hess[j * n + j];
            if h == 0.0 {
                0.0
            } else {
                abs_pow_pm2(grad[j], p, scale) * h
            }
        })
        .sum();
    Ok(-(p - 1.0) * s)
}

/// Steklov boundary residual
/// `sum_j |g_j|^{p-2} g_j nu_j - sigma |u|^{p-2} u rho_p(nu)`.
pub fn steklov_boundary_residual(
    p: f64,
    sigma: f64,
    normal: &[f64],
    u: f64,
    grad: &[f64],
) -> Result<f64> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(Error::Domain(format!("p must be finite and > 1, got {p}")));
    }
    check_finite(grad, "gradient")?;
    if !u.is_finite() || !sigma.is_finite() {
        return Err(Error::Domain("non-finite u or sigma".into()));
    }
    if grad.len() != normal.len() {
        return Err(Error::Domain("gradient/normal dimension mismatch".into()));
    }
    let rho = crate::lp::rho_weight(normal, Exponent::finite(p)?)?;
    let gscale = 1.0 + grad.iter().fold(0.0_f64, |a, g| a.max(g.abs()));
    let flux: f64 = grad
        .iter()
        .zip(normal)
        .map(|(&g, &nu)| signed_pow_pm1(g, p, gscale) * nu)
        .sum();
    Ok(flux - sigma * signed_pow_pm1(u, p, 1.0 + u.abs()) * rho)
}

/// Three-branch limit boundary operator. The directional sum runs over
/// the maximal-index set of `eta`; for `eta = 0` it is taken to be 0
/// (the zero-gradient case only ever enters through the normal
/// derivative of a test function, which then vanishes).
pub fn limit_boundary_operator(
    sigma_inf: f64,
    normal: &[f64],
    u: f64,
    eta: &[f64],
    tau: f64,
) -> f64 {
    debug_assert!(
        (lp_norm(normal, Exponent::TWO).unwrap_or(0.0) - 1.0).abs() <= 1e-9,
        "limit_boundary_operator expects a unit normal"
    );
    let dir_sum = if eta.iter().all(|&e| e == 0.0) {
        0.0
    } else {
        max_index_set(eta, tau)
            .map(|idx| idx.iter().map(|j| eta[j] * normal[j]).sum())
            .unwrap_or(0.0)
    };
    if u == 0.0 {
        return dir_sum;
    }
    let linf = eta.iter().fold(0.0_f64, |a, e| a.max(e.abs()));
    if u > 0.0 {
        (linf - sigma_inf * u.abs()).min(dir_sum)
    } else {
        (sigma_inf * u.abs() - linf).max(dir_sum)
    }
}
