//! P1 finite elements for the Steklov problem of the orthotropic
//! p-Laplacian on a triangulated convex polygon.
//!
//! The discrete object is the Rayleigh quotient
//! `R_p[u] = int |grad u|_p^p dx / int |u|^p rho_p dH` over nodal fields
//! satisfying the signed boundary moment constraint
//! `int |u|^{p-2} u rho_p dH = 0`. At `p = 2` this is a generalized
//! symmetric eigenproblem solved by inverse power iteration; for other
//! `p` the quotient is minimized by projected descent on `log R_p` with
//! continuation in `p`.
//!
//! P1 gradients are constant per triangle, so the interior integral is
//! exact; boundary integrals of powers of the (linear) trace use the
//! closed forms from [`crate::powint`].

use std::sync::atomic::{AtomicU64, Ordering};

use serde::Serialize;

use crate::body::ConvexBody;
use crate::error::{Error, Result};
use crate::lp::{Exponent, DEFAULT_TIE_TOL};
use crate::mesh::{triangulate, TriMesh};
use crate::operators::{limit_boundary_operator, signed_pow_pm1};
use crate::powint::{int_abs_pow, int_signed_pow, int_signed_pow_t};

/// Hard cap on the exponent for FE solves; beyond this the `|.|^{p-2}`
/// factors lose too much precision in f64. The limit eigenvalue itself
/// always comes from the geometric formula `2 / diam_1`.
pub const MAX_FEM_P: f64 = 64.0;

static SOLVE_COUNT: AtomicU64 = AtomicU64::new(0);

/// Number of eigensolves performed by this process (instrumentation for
/// geometry-only modes).
pub fn solve_count() -> u64 {
    SOLVE_COUNT.load(Ordering::Relaxed)
}

/// Nodal values of a piecewise-linear function on a mesh.
#[derive(Debug, Clone)]
pub struct ScalarField {
    pub values: Vec<f64>,
}

impl ScalarField {
    pub fn from_fn(mesh: &TriMesh, f: impl Fn([f64; 2]) -> f64) -> Self {
        ScalarField {
            values: mesh.nodes.iter().map(|&x| f(x)).collect(),
        }
    }

    pub fn scaled(&self, s: f64) -> Self {
        ScalarField {
            values: self.values.iter().map(|v| v * s).collect(),
        }
    }
}

/// Converged (or flagged) output of one eigensolve.
#[derive(Debug, Clone, Serialize)]
pub struct SpectralResult {
    pub p: f64,
    /// `Sigma_p = R_p^{1/p}` at the final iterate.
    pub sigma_p: f64,
    /// `Sigma_p^p = R_p` at the final iterate.
    pub sigma_p_pow_p: f64,
    #[serde(skip)]
    pub field: ScalarField,
    /// Signed boundary moment of the stored field.
    pub constraint_residual: f64,
    /// `|boundary_term / V - 1|` of the stored field.
    pub normalization_residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Per-triangle P1 data: area and the constant basis gradients.
struct P1 {
    area: Vec<f64>,
    grad: Vec<[[f64; 2]; 3]>,
    volume: f64,
}

impl P1 {
    fn build(mesh: &TriMesh) -> P1 {
        let nt = mesh.triangles.len();
        let mut area = Vec::with_capacity(nt);
        let mut grad = Vec::with_capacity(nt);
        for t in 0..nt {
            let [a, b, c] = mesh.triangles[t];
            let (pa, pb, pc) = (mesh.nodes[a], mesh.nodes[b], mesh.nodes[c]);
            let two_a = (pb[0] - pa[0]) * (pc[1] - pa[1]) - (pc[0] - pa[0]) * (pb[1] - pa[1]);
            area.push(0.5 * two_a);
            grad.push([
                [(pb[1] - pc[1]) / two_a, (pc[0] - pb[0]) / two_a],
                [(pc[1] - pa[1]) / two_a, (pa[0] - pc[0]) / two_a],
                [(pa[1] - pb[1]) / two_a, (pb[0] - pa[0]) / two_a],
            ]);
        }
        let volume = area.iter().sum();
        P1 { area, grad, volume }
    }

    fn field_gradient(&self, mesh: &TriMesh, u: &[f64], t: usize) -> [f64; 2] {
        let [a, b, c] = mesh.triangles[t];
        let g = &self.grad[t];
        [
            u[a] * g[0][0] + u[b] * g[1][0] + u[c] * g[2][0],
            u[a] * g[0][1] + u[b] * g[1][1] + u[c] * g[2][1],
        ]
    }
}

/// `rho_p` per boundary edge.
fn edge_weights(mesh: &TriMesh, p: Exponent) -> Vec<f64> {
    mesh.boundary_edges
        .iter()
        .map(|e| crate::lp::lp_norm(&e.normal, p.dual()).expect("unit normal"))
        .collect()
}

/// Constant P1 gradient of `u` on triangle `t`.
pub fn triangle_gradient(mesh: &TriMesh, u: &ScalarField, t: usize) -> [f64; 2] {
    P1::build_single(mesh, t, &u.values)
}

impl P1 {
    fn build_single(mesh: &TriMesh, t: usize, u: &[f64]) -> [f64; 2] {
        let [a, b, c] = mesh.triangles[t];
        let (pa, pb, pc) = (mesh.nodes[a], mesh.nodes[b], mesh.nodes[c]);
        let two_a = (pb[0] - pa[0]) * (pc[1] - pa[1]) - (pc[0] - pa[0]) * (pb[1] - pa[1]);
        let g = [
            [(pb[1] - pc[1]) / two_a, (pc[0] - pb[0]) / two_a],
            [(pc[1] - pa[1]) / two_a, (pa[0] - pc[0]) / two_a],
            [(pa[1] - pb[1]) / two_a, (pb[0] - pa[0]) / two_a],
        ];
        [
            u[a] * g[0][0] + u[b] * g[1][0] + u[c] * g[2][0],
            u[a] * g[0][1] + u[b] * g[1][1] + u[c] * g[2][1],
        ]
    }
}

fn check_field(mesh: &TriMesh, u: &ScalarField) {
    assert_eq!(
        u.values.len(),
        mesh.nodes.len(),
        "field/mesh node count mismatch"
    );
}

/// Interior energy `int |grad u|_p^p dx`, exact for P1 fields.
pub fn energy(mesh: &TriMesh, u: &ScalarField, p: f64) -> f64 {
    assert!(p > 1.0, "energy needs p > 1");
    check_field(mesh, u);
    let p1 = P1::build(mesh);
    energy_with(&p1, mesh, &u.values, p)
}

fn energy_with(p1: &P1, mesh: &TriMesh, u: &[f64], p: f64) -> f64 {
    let mut e = 0.0;
    for t in 0..mesh.triangles.len() {
        let g = p1.field_gradient(mesh, u, t);
        e += p1.area[t] * (g[0].abs().powf(p) + g[1].abs().powf(p));
    }
    e
}

/// Boundary integral `int |u|^p rho_p dH`, exact for linear traces.
pub fn boundary_term(mesh: &TriMesh, u: &ScalarField, p: f64) -> f64 {
    assert!(p > 1.0, "boundary_term needs p > 1");
    check_field(mesh, u);
    let rho = edge_weights(mesh, Exponent::Finite(p));
    boundary_term_with(mesh, &rho, &u.values, p)
}

fn boundary_term_with(mesh: &TriMesh, rho: &[f64], u: &[f64], p: f64) -> f64 {
    mesh.boundary_edges
        .iter()
        .zip(rho)
        .map(|(e, &w)| e.length * w * int_abs_pow(u[e.nodes[0]], u[e.nodes[1]], p))
        .sum()
}

/// Signed boundary moment `int |u|^{p-2} u rho_p dH`.
pub fn boundary_signed_moment(mesh: &TriMesh, u: &ScalarField, p: f64) -> f64 {
    check_field(mesh, u);
    let rho = edge_weights(mesh, Exponent::Finite(p));
    signed_moment_with(mesh, &rho, &u.values, p, 0.0)
}

fn signed_moment_with(mesh: &TriMesh, rho: &[f64], u: &[f64], p: f64, shift: f64) -> f64 {
    mesh.boundary_edges
        .iter()
        .zip(rho)
        .map(|(e, &w)| {
            e.length * w * int_signed_pow(u[e.nodes[0]] - shift, u[e.nodes[1]] - shift, p)
        })
        .sum()
}

fn boundary_minmax(mesh: &TriMesh, u: &[f64]) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for e in &mesh.boundary_edges {
        for &n in &e.nodes {
            lo = lo.min(u[n]);
            hi = hi.max(u[n]);
        }
    }
    (lo, hi)
}

/// The shift `c` with `int |u - c|^{p-2} (u - c) rho_p dH = 0`, found by
/// bisection of the strictly decreasing moment map on
/// `[min u, max u]` over the boundary.
pub fn recenter(mesh: &TriMesh, u: &ScalarField, p: f64) -> Result<f64> {
    check_field(mesh, u);
    let rho = edge_weights(mesh, Exponent::Finite(p));
    recenter_with(mesh, &rho, &u.values, p)
}

fn recenter_with(mesh: &TriMesh, rho: &[f64], u: &[f64], p: f64) -> Result<f64> {
    let (mut lo, mut hi) = boundary_minmax(mesh, u);
    let spread = hi - lo;
    if !(spread > 1e-14 * (lo.abs() + hi.abs() + 1.0)) {
        return Err(Error::Degenerate(
            "constant boundary trace cannot be recentered".into(),
        ));
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if signed_moment_with(mesh, rho, u, p, mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let c = 0.5 * (lo + hi);
    let residual = signed_moment_with(mesh, rho, u, p, c).abs();
    let weight: f64 = mesh
        .boundary_edges
        .iter()
        .zip(rho)
        .map(|(e, &w)| e.length * w)
        .sum();
    let scale = weight * (hi - c).abs().max((lo - c).abs()).max(spread).powf(p - 1.0);
    if residual > 1e-12 * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::Numerical(format!(
            "recentering residual {residual:e} above tolerance"
        )));
    }
    Ok(c)
}

// ---------------------------------------------------------------------------
// linear solve at p = 2
// ---------------------------------------------------------------------------

/// Compressed sparse rows, symmetric storage of the full matrix.
struct Csr {
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
    diag: Vec<f64>,
}

impl Csr {
    fn from_triplets(n: usize, mut trip: Vec<(usize, usize, f64)>) -> Csr {
        trip.sort_by_key(|&(i, j, _)| (i, j));
        let mut row_ptr = vec![0usize; n + 1];
        let mut cols = Vec::new();
        let mut vals: Vec<f64> = Vec::new();
        // merge duplicates
        let mut k = 0;
        while k < trip.len() {
            let (i, j, mut v) = trip[k];
            let mut m = k + 1;
            while m < trip.len() && trip[m].0 == i && trip[m].1 == j {
                v += trip[m].2;
                m += 1;
            }
            row_ptr[i + 1] += 1;
            cols.push(j);
            vals.push(v);
            k = m;
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        let mut diag = vec![0.0; n];
        for i in 0..n {
            for k in row_ptr[i]..row_ptr[i + 1] {
                if cols[k] == i {
                    diag[i] = vals[k];
                }
            }
        }
        Csr {
            row_ptr,
            cols,
            vals,
            diag,
        }
    }

    fn matvec(&self, x: &[f64], y: &mut [f64]) {
        let n = self.row_ptr.len() - 1;
        for i in 0..n {
            let mut s = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                s += self.vals[k] * x[self.cols[k]];
            }
            y[i] = s;
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn project_mean(x: &mut [f64]) {
    let m = x.iter().sum::<f64>() / x.len() as f64;
    x.iter_mut().for_each(|v| *v -= m);
}

/// Jacobi-preconditioned CG on the singular Neumann stiffness matrix,
/// kept on the subspace orthogonal to constants.
fn pcg(k: &Csr, b: &[f64], rel_tol: f64, max_iter: usize) -> Result<Vec<f64>> {
    let n = b.len();
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    project_mean(&mut r);
    let norm_b = dot(&r, &r).sqrt();
    if norm_b == 0.0 {
        return Ok(x);
    }
    let precond = |r: &[f64], z: &mut [f64], diag: &[f64]| {
        for i in 0..r.len() {
            z[i] = r[i] / diag[i];
        }
        project_mean(z);
    };
    let mut z = vec![0.0; n];
    precond(&r, &mut z, &k.diag);
    let mut pdir = z.clone();
    let mut rz = dot(&r, &z);
    let mut kp = vec![0.0; n];
    for _ in 0..max_iter {
        k.matvec(&pdir, &mut kp);
        let alpha = rz / dot(&pdir, &kp);
        for i in 0..n {
            x[i] += alpha * pdir[i];
            r[i] -= alpha * kp[i];
        }
        if dot(&r, &r).sqrt() <= rel_tol * norm_b {
            project_mean(&mut x);
            return Ok(x);
        }
        precond(&r, &mut z, &k.diag);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            pdir[i] = z[i] + beta * pdir[i];
        }
    }
    Err(Error::Numerical(format!(
        "conjugate gradient did not reach residual {rel_tol:e} in {max_iter} iterations"
    )))
}

/// Consistent boundary mass `y += M_b u` (at `p = 2`, where `rho_2 = 1`).
fn boundary_mass_apply(mesh: &TriMesh, u: &[f64], y: &mut [f64]) {
    y.iter_mut().for_each(|v| *v = 0.0);
    for e in &mesh.boundary_edges {
        let [a, b] = e.nodes;
        let l = e.length;
        y[a] += l * (u[a] / 3.0 + u[b] / 6.0);
        y[b] += l * (u[a] / 6.0 + u[b] / 3.0);
    }
}

fn boundary_integral(mesh: &TriMesh, u: &[f64]) -> f64 {
    mesh.boundary_edges
        .iter()
        .map(|e| e.length * 0.5 * (u[e.nodes[0]] + u[e.nodes[1]]))
        .sum()
}

fn boundary_length(mesh: &TriMesh) -> f64 {
    mesh.boundary_edges.iter().map(|e| e.length).sum()
}

/// First nontrivial Steklov eigenpair at `p = 2`: inverse power
/// iteration on stiffness vs boundary mass, with projection against
/// constants in the boundary-mass inner product.
pub fn solve_sigma2(mesh: &TriMesh) -> Result<SpectralResult> {
    SOLVE_COUNT.fetch_add(1, Ordering::Relaxed);
    let n = mesh.nodes.len();
    let p1 = P1::build(mesh);

    let mut trip = Vec::with_capacity(9 * mesh.triangles.len());
    for t in 0..mesh.triangles.len() {
        let idx = mesh.triangles[t];
        for a in 0..3 {
            for b in 0..3 {
                let g = &p1.grad[t];
                let v = p1.area[t] * (g[a][0] * g[b][0] + g[a][1] * g[b][1]);
                trip.push((idx[a], idx[b], v));
            }
        }
    }
    let k = Csr::from_triplets(n, trip);

    let blen = boundary_length(mesh);
    let project_b = |u: &mut Vec<f64>| {
        let m = boundary_integral(mesh, u) / blen;
        u.iter_mut().for_each(|v| *v -= m);
    };

    // deterministic start with overlap on both coordinate-like modes
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x53474d41);
    let golden = 0.618_033_988_749_894_9;
    let mut y: Vec<f64> = mesh
        .nodes
        .iter()
        .map(|&[x, yy]| x + golden * yy + 1e-6 * rng.gen_range(-1.0..1.0))
        .collect();
    project_b(&mut y);

    let mut mb = vec![0.0; n];
    boundary_mass_apply(mesh, &y, &mut mb);
    let ynorm = dot(&y, &mb).sqrt();
    y.iter_mut().for_each(|v| *v /= ynorm);

    let mut sigma = f64::INFINITY;
    let mut iterations = 0;
    let mut kx = vec![0.0; n];
    for outer in 0..500 {
        iterations = outer + 1;
        boundary_mass_apply(mesh, &y, &mut mb);
        let mut x = pcg(&k, &mb, 1e-10, 100 * (n.max(100)))?;
        project_b(&mut x);
        boundary_mass_apply(mesh, &x, &mut mb);
        let xmx = dot(&x, &mb);
        k.matvec(&x, &mut kx);
        let xkx = dot(&x, &kx);
        let sigma_new = xkx / xmx;
        let done = (sigma_new - sigma).abs() <= 1e-11 * sigma_new.abs();
        sigma = sigma_new;
        let s = xmx.sqrt();
        y = x;
        y.iter_mut().for_each(|v| *v /= s);
        if done {
            break;
        }
        if outer == 499 {
            return Err(Error::Numerical(
                "inverse iteration did not converge in 500 steps".into(),
            ));
        }
    }

    finalize(mesh, &p1, ScalarField { values: y }, 2.0, iterations, true)
}

/// Recenters, rescales to the unit boundary normalization and fills in
/// the diagnostics of a final iterate.
fn finalize(
    mesh: &TriMesh,
    p1: &P1,
    field: ScalarField,
    p: f64,
    iterations: usize,
    converged: bool,
) -> Result<SpectralResult> {
    let rho = edge_weights(mesh, Exponent::Finite(p));
    let mut u = field.values;
    let c = recenter_with(mesh, &rho, &u, p)?;
    u.iter_mut().for_each(|v| *v -= c);
    let b = boundary_term_with(mesh, &rho, &u, p);
    let lambda = (p1.volume / b).powf(1.0 / p);
    u.iter_mut().for_each(|v| *v *= lambda);
    let e = energy_with(p1, mesh, &u, p);
    let b = boundary_term_with(mesh, &rho, &u, p);
    let r = e / b;
    Ok(SpectralResult {
        p,
        sigma_p: r.powf(1.0 / p),
        sigma_p_pow_p: r,
        constraint_residual: signed_moment_with(mesh, &rho, &u, p, 0.0),
        normalization_residual: (b / p1.volume - 1.0).abs(),
        field: ScalarField { values: u },
        iterations,
        converged,
    })
}

/// Options for the nonlinear solver.
#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    pub max_iter: usize,
    /// Relative change of `R_p` that counts as converged.
    pub rel_tol: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            max_iter: 10_000,
            rel_tol: 1e-10,
        }
    }
}

/// Minimize the Rayleigh quotient at exponent `p` by projected descent
/// on `log R_p` from the given starting field. Each accepted step is
/// recentered onto the constraint set and rescaled to the unit boundary
/// normalization. A non-converged run is returned flagged, never hidden.
pub fn solve_sigma_p(
    mesh: &TriMesh,
    p: f64,
    init: &ScalarField,
    opts: SolveOptions,
) -> Result<SpectralResult> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(Error::Domain(format!("p must be finite and > 1, got {p}")));
    }
    if p > MAX_FEM_P {
        return Err(Error::Unsupported(format!(
            "p = {p} beyond the f64 conditioning cap {MAX_FEM_P}; \
             the limit value comes from 2/diam_1"
        )));
    }
    check_field(mesh, init);
    SOLVE_COUNT.fetch_add(1, Ordering::Relaxed);

    let p1 = P1::build(mesh);
    let rho = edge_weights(mesh, Exponent::Finite(p));
    let nt = mesh.triangles.len();

    let project = |u: &mut Vec<f64>| -> Result<(f64, f64)> {
        let c = recenter_with(mesh, &rho, u, p)?;
        u.iter_mut().for_each(|v| *v -= c);
        let b = boundary_term_with(mesh, &rho, u, p);
        let lambda = (p1.volume / b).powf(1.0 / p);
        u.iter_mut().for_each(|v| *v *= lambda);
        let e = energy_with(&p1, mesh, u, p);
        Ok((e, p1.volume))
    };

    let mut u = init.values.clone();
    let (mut e_val, mut b_val) = project(&mut u)?;
    let mut f_val = e_val.ln() - b_val.ln();

    let assemble_gradient = |u: &[f64], e_val: f64, b_val: f64, grad: &mut [f64]| {
        grad.iter_mut().for_each(|g| *g = 0.0);
        for t in 0..nt {
            let g = p1.field_gradient(mesh, u, t);
            let scale = 1.0 + g[0].abs().max(g[1].abs());
            let w0 = p * signed_pow_pm1(g[0], p, scale) * p1.area[t] / e_val;
            let w1 = p * signed_pow_pm1(g[1], p, scale) * p1.area[t] / e_val;
            let idx = mesh.triangles[t];
            for k in 0..3 {
                grad[idx[k]] += w0 * p1.grad[t][k][0] + w1 * p1.grad[t][k][1];
            }
        }
        for (e, &w) in mesh.boundary_edges.iter().zip(&rho) {
            let [a, b] = e.nodes;
            let coef = e.length * w * p / b_val;
            let right = int_signed_pow_t(u[a], u[b], p);
            let total = int_signed_pow(u[a], u[b], p);
            grad[a] -= coef * (total - right);
            grad[b] -= coef * right;
        }
    };

    let n = u.len();
    // lumped area mass: the descent direction is the L^2 representation
    // of the gradient, which keeps the step size meaningful across mesh
    // refinement
    let mut mass = vec![0.0; n];
    for t in 0..nt {
        let w = p1.area[t] / 3.0;
        for &i in &mesh.triangles[t] {
            mass[i] += w;
        }
    }

    let mut grad = vec![0.0; n];
    let mut dir = vec![0.0; n];
    let mut prev_u: Option<Vec<f64>> = None;
    let mut prev_grad = vec![0.0; n];
    let mut alpha = 1.0_f64;
    let mut converged = false;
    let mut iterations = 0;
    // Barzilai-Borwein steps are non-monotone: accept against the worst
    // of a short window, and call the run converged once the best value
    // stops improving at the requested relative resolution over a
    // trailing window of accepted steps.
    let mut f_window = std::collections::VecDeque::from([f_val]);
    let mut best_f = f_val;
    let mut stalled = 0;

    for iter in 0..opts.max_iter {
        iterations = iter + 1;
        assemble_gradient(&u, e_val, b_val, &mut grad);
        for i in 0..n {
            dir[i] = grad[i] / mass[i];
        }
        let decrease = dot(&grad, &dir);

        if let Some(pu) = &prev_u {
            // alternating Barzilai-Borwein steps in the mass inner product
            let mut sy = 0.0;
            let mut ss = 0.0;
            let mut yy = 0.0;
            for i in 0..n {
                let s = u[i] - pu[i];
                let y = grad[i] - prev_grad[i];
                sy += s * y;
                ss += s * s * mass[i];
                yy += y * y / mass[i];
            }
            if sy > 0.0 && ss > 0.0 && yy > 0.0 {
                let bb = if iter % 2 == 0 { ss / sy } else { sy / yy };
                alpha = bb.clamp(1e-12, 1e6);
            } else {
                alpha = (alpha * 2.0).min(1e3);
            }
        }
        prev_u = Some(u.clone());
        prev_grad.copy_from_slice(&grad);

        let f_ref = f_window.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut accepted = false;
        let mut flat = true;
        for _ in 0..60 {
            let mut trial: Vec<f64> = u
                .iter()
                .zip(&dir)
                .map(|(&ui, &di)| ui - alpha * di)
                .collect();
            match project(&mut trial) {
                Ok((e_t, _)) => {
                    let b_t = p1.volume;
                    let f_t = e_t.ln() - b_t.ln();
                    if (f_t - f_val).abs() > 1e-12 * f_val.abs().max(1.0) {
                        flat = false;
                    }
                    if f_t <= f_ref - 1e-4 * alpha * decrease {
                        u = trial;
                        e_val = e_t;
                        b_val = b_t;
                        f_val = f_t;
                        accepted = true;
                        f_window.push_back(f_val);
                        if f_window.len() > 10 {
                            f_window.pop_front();
                        }
                        if f_val < best_f - opts.rel_tol * f_val.abs().max(1.0) {
                            best_f = f_val;
                            stalled = 0;
                        } else {
                            best_f = best_f.min(f_val);
                            stalled += 1;
                        }
                        if stalled >= 25 {
                            converged = true;
                        }
                        break;
                    }
                }
                Err(_) => {
                    // projection can degenerate for wild trial steps; shrink
                }
            }
            alpha *= 0.5;
        }
        if converged {
            break;
        }
        if !accepted {
            // numerically stationary: no descent direction at f64 resolution
            converged = flat;
            break;
        }
    }

    let mut result = finalize(mesh, &p1, ScalarField { values: u }, p, iterations, converged)?;
    result.iterations = iterations;
    Ok(result)
}

/// Least-squares fit of `sigma_p ~ sigma_inf + c / p`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct InversePFit {
    pub sigma_infty: f64,
    pub coeff: f64,
    /// Root-mean-square misfit over the fitted points.
    pub residual: f64,
    pub points_used: usize,
}

/// Output of a continuation sweep in `p`.
#[derive(Debug, Clone, Serialize)]
pub struct SweepOutcome {
    pub stages: Vec<SpectralResult>,
    pub fit: Option<InversePFit>,
    /// True when a stage failed to converge and the sweep stopped early.
    pub aborted: bool,
    /// Stage indices where `sigma_p` increased beyond the trend tolerance
    /// (reported, not asserted; the limit theorem is monotone only
    /// asymptotically).
    pub trend_violations: Vec<usize>,
}

fn fit_inverse_p(points: &[(f64, f64)]) -> Option<InversePFit> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let sx: f64 = points.iter().map(|&(p, _)| 1.0 / p).sum();
    let sy: f64 = points.iter().map(|&(_, s)| s).sum();
    let sxx: f64 = points.iter().map(|&(p, _)| 1.0 / (p * p)).sum();
    let sxy: f64 = points.iter().map(|&(p, s)| s / p).sum();
    let det = n * sxx - sx * sx;
    let coeff = (n * sxy - sx * sy) / det;
    let intercept = (sy - coeff * sx) / n;
    let rss: f64 = points
        .iter()
        .map(|&(p, s)| {
            let r = s - (intercept + coeff / p);
            r * r
        })
        .sum();
    Some(InversePFit {
        sigma_infty: intercept,
        coeff,
        residual: (rss / n).sqrt(),
        points_used: points.len(),
    })
}

/// Continuation sweep: solve at each `p` in ascending order, warm-started
/// from the previous eigenfield, then extrapolate `sigma_p` to
/// `p = infinity` with a `1/p` model fitted on the top half of the sweep.
pub fn sweep_p(body: &ConvexBody, p_list: &[f64], h: f64) -> Result<SweepOutcome> {
    sweep_p_with(body, p_list, h, SolveOptions::default())
}

pub fn sweep_p_with(
    body: &ConvexBody,
    p_list: &[f64],
    h: f64,
    opts: SolveOptions,
) -> Result<SweepOutcome> {
    if p_list.is_empty() {
        return Err(Error::Domain("empty p list".into()));
    }
    if (p_list[0] - 2.0).abs() > 1e-12 {
        return Err(Error::Domain("sweep must start at p = 2".into()));
    }
    if p_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Domain("p list must be strictly ascending".into()));
    }
    let poly = body.as_polygon(crate::body::DEFAULT_BALL_VERTICES)?;
    let mesh = triangulate(&poly, h)?;

    let mut stages: Vec<SpectralResult> = Vec::with_capacity(p_list.len());
    let mut aborted = false;
    for (k, &p) in p_list.iter().enumerate() {
        let result = if k == 0 {
            solve_sigma2(&mesh)?
        } else {
            solve_sigma_p(&mesh, p, &stages[k - 1].field, opts)?
        };
        let ok = result.converged;
        stages.push(result);
        if !ok {
            aborted = true;
            break;
        }
    }

    let trend_tol = 1e-3;
    let mut trend_violations = Vec::new();
    for i in 1..stages.len() {
        if stages[i].sigma_p > stages[i - 1].sigma_p * (1.0 + trend_tol) {
            trend_violations.push(i);
        }
    }

    let fit = if stages.len() >= 2 && !aborted {
        // fit on the strict top half of the sweep (p above the median),
        // never fewer than two points
        let m = (stages.len() / 2).max(2);
        let pts: Vec<(f64, f64)> = stages[stages.len() - m..]
            .iter()
            .map(|s| (s.p, s.sigma_p))
            .collect();
        fit_inverse_p(&pts)
    } else {
        None
    };

    Ok(SweepOutcome {
        stages,
        fit,
        aborted,
        trend_violations,
    })
}

/// Nodal interpolant of the `l^1` distance to an interior point,
/// recentered onto the constraint set, together with the Rayleigh bound
/// `R_p[w]^{1/p}` it certifies for the discrete eigenvalue.
pub fn distance_candidate(
    mesh: &TriMesh,
    x0: [f64; 2],
    p: f64,
) -> Result<(ScalarField, f64)> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(Error::Domain(format!("p must be finite and > 1, got {p}")));
    }
    if !mesh.source_polygon().contains_strict(x0) {
        return Err(Error::Domain(format!(
            "candidate base point ({}, {}) is not strictly inside the domain",
            x0[0], x0[1]
        )));
    }
    let w = ScalarField::from_fn(mesh, |x| (x[0] - x0[0]).abs() + (x[1] - x0[1]).abs());
    let c = recenter(mesh, &w, p)?;
    let field = ScalarField {
        values: w.values.iter().map(|v| v - c).collect(),
    };
    let e = energy(mesh, &field, p);
    let b = boundary_term(mesh, &field, p);
    Ok((field, (e / b).powf(1.0 / p)))
}

/// Max over triangles of the `l^inf` norm of the P1 gradient.
pub fn max_linf_gradient(mesh: &TriMesh, u: &ScalarField) -> f64 {
    check_field(mesh, u);
    let p1 = P1::build(mesh);
    (0..mesh.triangles.len())
        .map(|t| {
            let g = p1.field_gradient(mesh, &u.values, t);
            g[0].abs().max(g[1].abs())
        })
        .fold(0.0, f64::max)
}

/// Largest `l^inf` gradient norm per triangle, for per-triangle checks.
pub fn triangle_linf_gradients(mesh: &TriMesh, u: &ScalarField) -> Vec<f64> {
    check_field(mesh, u);
    let p1 = P1::build(mesh);
    (0..mesh.triangles.len())
        .map(|t| {
            let g = p1.field_gradient(mesh, &u.values, t);
            g[0].abs().max(g[1].abs())
        })
        .collect()
}

/// Value range of a field over the boundary nodes.
pub fn boundary_range(mesh: &TriMesh, u: &ScalarField) -> (f64, f64) {
    check_field(mesh, u);
    boundary_minmax(mesh, &u.values)
}

/// Boundary sample of the limit operator: midpoint of each boundary
/// edge, trace value there and the operator value computed from the
/// owning triangle's gradient.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct LambdaSample {
    pub point: [f64; 2],
    pub u: f64,
    pub lambda: f64,
    pub directional_sum: f64,
}

pub fn lambda_boundary_samples(
    mesh: &TriMesh,
    u: &ScalarField,
    sigma_inf: f64,
) -> Vec<LambdaSample> {
    check_field(mesh, u);
    use std::collections::HashMap;
    let mut owner: HashMap<(usize, usize), usize> = HashMap::new();
    for (t, tri) in mesh.triangles.iter().enumerate() {
        for k in 0..3 {
            let a = tri[k];
            let b = tri[(k + 1) % 3];
            owner.insert((a.min(b), a.max(b)), t);
        }
    }
    mesh.boundary_edges
        .iter()
        .filter_map(|e| {
            let [a, b] = e.nodes;
            let t = *owner.get(&(a.min(b), a.max(b)))?;
            let g = P1::build_single(mesh, t, &u.values);
            let pa = mesh.nodes[a];
            let pb = mesh.nodes[b];
            let point = [0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])];
            let um = 0.5 * (u.values[a] + u.values[b]);
            let lambda = limit_boundary_operator(sigma_inf, &e.normal, um, &g, DEFAULT_TIE_TOL);
            let dir = if g[0] == 0.0 && g[1] == 0.0 {
                0.0
            } else {
                crate::lp::max_index_set(&g, DEFAULT_TIE_TOL)
                    .map(|idx| idx.iter().map(|j| g[j] * e.normal[j]).sum())
                    .unwrap_or(0.0)
            };
            Some(LambdaSample {
                point,
                u: um,
                lambda,
                directional_sum: dir,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::body::{ConvexBody, Polygon2d};
    use crate::mesh::refine;

    fn unit_square_mesh(h: f64) -> TriMesh {
        let poly =
            Polygon2d::new(vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]).unwrap();
        triangulate(&poly, h).unwrap()
    }

    fn centered_square_mesh(h: f64) -> TriMesh {
        let poly = Polygon2d::new(vec![
            [0.5, -0.5],
            [0.5, 0.5],
            [-0.5, 0.5],
            [-0.5, -0.5],
        ])
        .unwrap();
        triangulate(&poly, h).unwrap()
    }

    #[test]
    fn energy_of_coordinate_field_is_volume() {
        let mesh = unit_square_mesh(0.3);
        let u = ScalarField::from_fn(&mesh, |x| x[0]);
        for p in [1.5, 2.0, 3.0, 8.0] {
            assert!((energy(&mesh, &u, p) - 1.0).abs() < 1e-12, "p={p}");
        }
        let c = ScalarField::from_fn(&mesh, |_| 3.0);
        assert_eq!(energy(&mesh, &c, 2.0), 0.0);
    }

    #[test]
    fn energy_of_diagonal_field() {
        let mesh = unit_square_mesh(0.3);
        let u = ScalarField::from_fn(&mesh, |x| x[0] + x[1]);
        assert!((energy(&mesh, &u, 3.0) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn boundary_term_of_ones_is_perimeter() {
        let poly = Polygon2d::new(vec![
            [1.0, -1.0],
            [1.0, 1.0],
            [-1.0, 1.0],
            [-1.0, -1.0],
        ])
        .unwrap();
        let mesh = triangulate(&poly, 0.5).unwrap();
        let u = ScalarField::from_fn(&mesh, |_| 1.0);
        assert!((boundary_term(&mesh, &u, 2.0) - 8.0).abs() < 1e-12);
        let z = ScalarField::from_fn(&mesh, |_| 0.0);
        assert_eq!(boundary_term(&mesh, &z, 2.0), 0.0);
    }

    #[test]
    fn boundary_term_of_coordinate_on_centered_square() {
        let mesh = centered_square_mesh(0.25);
        let u = ScalarField::from_fn(&mesh, |x| x[0]);
        // two edges at x = +-1/2 contribute 1/4 each, two lateral edges 1/12
        assert!((boundary_term(&mesh, &u, 2.0) - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn homogeneity_of_both_terms() {
        let mesh = unit_square_mesh(0.4);
        let u = ScalarField::from_fn(&mesh, |x| x[0] * x[0] - 0.3 * x[1]);
        for p in [1.5, 2.0, 4.7] {
            let lam = 2.3_f64;
            let e1 = energy(&mesh, &u, p);
            let e2 = energy(&mesh, &u.scaled(lam), p);
            assert!((e2 - lam.powf(p) * e1).abs() < 1e-12 * e2, "energy p={p}");
            let b1 = boundary_term(&mesh, &u, p);
            let b2 = boundary_term(&mesh, &u.scaled(lam), p);
            assert!((b2 - lam.powf(p) * b1).abs() < 1e-12 * b2, "boundary p={p}");
        }
    }

    #[test]
    fn recenter_odd_field_is_zero() {
        let mesh = centered_square_mesh(0.25);
        let u = ScalarField::from_fn(&mesh, |x| x[0]);
        let c = recenter(&mesh, &u, 2.0).unwrap();
        assert!(c.abs() < 1e-12, "{c}");
        let c3 = recenter(&mesh, &u, 3.0).unwrap();
        assert!(c3.abs() < 1e-12, "{c3}");
    }

    #[test]
    fn recenter_removes_shift() {
        let mesh = centered_square_mesh(0.25);
        let u = ScalarField::from_fn(&mesh, |x| x[0] + 5.0);
        let c = recenter(&mesh, &u, 2.0).unwrap();
        assert!((c - 5.0).abs() < 1e-10, "{c}");
    }

    #[test]
    fn recenter_self_check_on_random_field() {
        let mesh = unit_square_mesh(0.25);
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let u = ScalarField {
            values: (0..mesh.nodes.len())
                .map(|_| rng.gen_range(-1.0..1.0))
                .collect(),
        };
        for p in [1.5, 2.0, 3.7] {
            let c = recenter(&mesh, &u, p).unwrap();
            let shifted = ScalarField {
                values: u.values.iter().map(|v| v - c).collect(),
            };
            let m = boundary_signed_moment(&mesh, &shifted, p);
            assert!(m.abs() < 1e-12, "p={p}: {m:e}");
        }
    }

    #[test]
    fn recenter_rejects_constant_trace() {
        let mesh = unit_square_mesh(0.5);
        let u = ScalarField::from_fn(&mesh, |_| 2.0);
        assert!(matches!(
            recenter(&mesh, &u, 2.0),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn sigma2_on_square_scaling_law() {
        let mesh1 = centered_square_mesh(0.125);
        let r1 = solve_sigma2(&mesh1).unwrap();
        let poly2 = Polygon2d::new(vec![
            [1.0, -1.0],
            [1.0, 1.0],
            [-1.0, 1.0],
            [-1.0, -1.0],
        ])
        .unwrap();
        let mesh2 = triangulate(&poly2, 0.25).unwrap();
        let r2 = solve_sigma2(&mesh2).unwrap();
        // sigma(t Omega) = sigma(Omega) / t at p = 2
        assert!(
            (r1.sigma_p_pow_p - 2.0 * r2.sigma_p_pow_p).abs() < 1e-6 * r1.sigma_p_pow_p,
            "{} vs {}",
            r1.sigma_p_pow_p,
            2.0 * r2.sigma_p_pow_p
        );
    }

    #[test]
    fn sigma2_solver_contract() {
        let mesh = centered_square_mesh(0.125);
        let r = solve_sigma2(&mesh).unwrap();
        assert!(r.converged);
        let e = energy(&mesh, &r.field, 2.0);
        let b = boundary_term(&mesh, &r.field, 2.0);
        assert!((r.sigma_p_pow_p - e / b).abs() <= 1e-10 * r.sigma_p_pow_p);
        assert!(r.normalization_residual < 1e-12);
        let bscale = boundary_term(&mesh, &r.field, 2.0);
        assert!(r.constraint_residual.abs() <= 1e-9 * bscale);
        // the eigenfield changes sign on the boundary
        let (lo, hi) = boundary_range(&mesh, &r.field);
        assert!(lo < 0.0 && hi > 0.0);
    }

    #[test]
    fn sigma_p_at_two_matches_linear_solver() {
        let mesh = centered_square_mesh(0.25);
        let reference = solve_sigma2(&mesh).unwrap();
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let init = ScalarField {
            values: mesh
                .nodes
                .iter()
                .map(|&[x, y]| x + 0.3 * y + 0.05 * rng.gen_range(-1.0..1.0))
                .collect(),
        };
        let r = solve_sigma_p(&mesh, 2.0, &init, SolveOptions::default()).unwrap();
        assert!(r.converged, "did not converge in {} iters", r.iterations);
        assert!(
            (r.sigma_p_pow_p - reference.sigma_p_pow_p).abs()
                <= 1e-6 * reference.sigma_p_pow_p,
            "descent {} vs linear {}",
            r.sigma_p_pow_p,
            reference.sigma_p_pow_p
        );
    }

    #[test]
    fn sigma_p_respects_coordinate_bound_on_square() {
        let mesh = centered_square_mesh(0.125);
        let r = solve_sigma2(&mesh).unwrap();
        // coordinate bound of the centered unit square at p = 2 is 3/2
        assert!(r.sigma_p_pow_p <= 1.5 + 1e-8, "{}", r.sigma_p_pow_p);
    }

    #[test]
    fn sigma_p_restart_is_stable() {
        let mesh = centered_square_mesh(0.25);
        let base = solve_sigma2(&mesh).unwrap();
        let opts = SolveOptions {
            rel_tol: 1e-13,
            ..SolveOptions::default()
        };
        let r1 = solve_sigma_p(&mesh, 4.0, &base.field, opts).unwrap();
        let r2 = solve_sigma_p(&mesh, 4.0, &r1.field.scaled(7.5), opts).unwrap();
        assert!(r1.converged && r2.converged);
        assert!(
            (r1.sigma_p_pow_p - r2.sigma_p_pow_p).abs() <= 1e-9 * r1.sigma_p_pow_p,
            "{} vs {}",
            r1.sigma_p_pow_p,
            r2.sigma_p_pow_p
        );
    }

    #[test]
    fn sigma_p_rejects_out_of_range_p() {
        let mesh = centered_square_mesh(0.5);
        let u = ScalarField::from_fn(&mesh, |x| x[0]);
        assert!(solve_sigma_p(&mesh, 1.0, &u, SolveOptions::default()).is_err());
        assert!(solve_sigma_p(&mesh, 100.0, &u, SolveOptions::default()).is_err());
    }

    #[test]
    fn sweep_validates_input() {
        let body = ConvexBody::box_body(vec![1.0, 1.0], None).unwrap();
        assert!(sweep_p(&body, &[], 0.5).is_err());
        assert!(sweep_p(&body, &[3.0, 4.0], 0.5).is_err());
        assert!(sweep_p(&body, &[2.0, 2.0], 0.5).is_err());
    }

    #[test]
    fn distance_candidate_bounds_the_solver() {
        let mesh = centered_square_mesh(0.125);
        let x0 = [0.0, 0.0];
        let (field, bound) = distance_candidate(&mesh, x0, 2.0).unwrap();
        let r = solve_sigma2(&mesh).unwrap();
        assert!(bound >= r.sigma_p, "bound {bound} below sigma {}", r.sigma_p);
        // the l^1 cone is affine with gradient (+-1, +-1) away from its
        // kink lines, so the interpolant is exact there; triangles cut by
        // a kink line carry a bounded overshoot (exactly 2 on the fan
        // triangle whose apex sits at the cone tip)
        let per_tri = triangle_linf_gradients(&mesh, &field);
        let mut worst_clean = 0.0_f64;
        let mut worst_all = 0.0_f64;
        for (t, &g) in per_tri.iter().enumerate() {
            worst_all = worst_all.max(g);
            let tri = mesh.triangles[t];
            let xs: Vec<f64> = tri.iter().map(|&n| mesh.nodes[n][0] - x0[0]).collect();
            let ys: Vec<f64> = tri.iter().map(|&n| mesh.nodes[n][1] - x0[1]).collect();
            let crosses = |v: &[f64]| v.iter().any(|&a| a > 1e-14) && v.iter().any(|&a| a < -1e-14);
            if !crosses(&xs) && !crosses(&ys) {
                worst_clean = worst_clean.max(g);
            }
        }
        assert!(worst_clean <= 1.0 + 1e-12, "kink-free max grad {worst_clean}");
        assert!(worst_all <= 2.0 + 1e-12, "global max grad {worst_all}");
    }

    #[test]
    fn distance_candidate_rejects_outside_point() {
        let mesh = centered_square_mesh(0.25);
        assert!(distance_candidate(&mesh, [2.0, 0.0], 2.0).is_err());
    }

    #[test]
    fn refinement_decreases_sigma2_error() {
        // interior consistency: refining changes sigma by a shrinking amount
        let mesh0 = centered_square_mesh(0.25);
        let mesh1 = refine(&mesh0).unwrap();
        let s0 = solve_sigma2(&mesh0).unwrap().sigma_p_pow_p;
        let s1 = solve_sigma2(&mesh1).unwrap().sigma_p_pow_p;
        assert!(s1 <= s0, "refinement should not raise the discrete minimum");
    }

    #[test]
    fn solve_counter_increments() {
        let before = solve_count();
        let mesh = centered_square_mesh(0.5);
        let _ = solve_sigma2(&mesh).unwrap();
        assert!(solve_count() > before);
    }
}
