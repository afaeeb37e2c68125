//! Property-testing campaign over the eigenvalue/geometry inequalities:
//! per-body slack records, equality-case detection and a deterministic
//! machine-readable report.
//!
//! Every record states `lhs <= rhs` with `slack = rhs - lhs`; a check
//! passes when the slack is above `-tolerance`. Geometry-only checks use
//! an absolute budget, eigensolver-backed checks a relative one (the
//! discretization error dominates there).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::body::{ball_reference_2d, ConvexBody};
use crate::error::{Error, Result};
use crate::fem::{solve_sigma2, solve_sigma_p, SolveOptions};
use crate::lp::Exponent;
use crate::mesh::triangulate;

/// Where a `Sigma_p^p` value used by a check came from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SigmaSource {
    /// Finite-element eigensolve at mesh size `h`.
    Fem,
    /// The coordinate upper bound `N V / M_p`; only a consistency probe,
    /// not an eigenvalue.
    CoordinateBound,
}

/// One inequality evaluation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckRecord {
    pub body: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub check: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<Exponent>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub tolerance: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma_source: Option<SigmaSource>,
    /// Set when the parameter sits on the `r = N` endpoint, where the
    /// statement holds but the proof route needs `r < N`.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub flagged_endpoint: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub equality_case: Option<bool>,
}

impl CheckRecord {
    fn new(body: &str, check: &str, lhs: f64, rhs: f64, tolerance: f64) -> CheckRecord {
        CheckRecord {
            body: body.to_string(),
            seed: None,
            check: check.to_string(),
            p: None,
            q: None,
            r: None,
            lhs,
            rhs,
            slack: rhs - lhs,
            tolerance,
            pass: rhs - lhs >= -tolerance,
            sigma_source: None,
            flagged_endpoint: false,
            equality_case: None,
        }
    }
}

/// Reference quantities of the extremal ball `W_p` at an exponent;
/// exact for `p in {1, inf}`, Richardson-extrapolated otherwise (2D).
fn wp_quantities_2d(p: Exponent) -> Result<(f64, f64)> {
    match p {
        Exponent::Infinity => {
            let w = ConvexBody::ball(Exponent::Infinity, 2, 1.0, None)?;
            Ok((w.volume(), w.anisotropic_perimeter(p)))
        }
        Exponent::Finite(pf) if pf == 1.0 => {
            let w = ConvexBody::ball(Exponent::ONE, 2, 1.0, None)?;
            Ok((w.volume(), w.anisotropic_perimeter(p)))
        }
        Exponent::Finite(pf) => {
            let r = ball_reference_2d(pf)?;
            Ok((r.volume, r.perimeter))
        }
    }
}

/// Eigenvalue-perimeter-volume inequality at parameters `(p, q, r)` with
/// `p/N = q + r/N`, `q >= 0`, `r in [0, N]`:
/// `Sigma_p^p P_p^{(r-1)/(N-1)} V^q <= [same on W_p]`.
pub fn check_step(
    body: &ConvexBody,
    body_id: &str,
    p: f64,
    q: f64,
    r: f64,
    sigma_pp: f64,
    source: SigmaSource,
    tolerance_rel: f64,
) -> Result<CheckRecord> {
    let n = body.dim() as f64;
    if body.dim() != 2 {
        return Err(Error::Unsupported(
            "eigenvalue-backed checks are two-dimensional".into(),
        ));
    }
    if !(q >= 0.0) || !(0.0..=n).contains(&r) {
        return Err(Error::Domain(format!(
            "need q >= 0 and r in [0, {n}], got q={q} r={r}"
        )));
    }
    if (p / n - q - r / n).abs() > 1e-12 {
        return Err(Error::Domain(format!(
            "parameter relation p/N = q + r/N violated: p={p} q={q} r={r}"
        )));
    }
    let ex = (r - 1.0) / (n - 1.0);
    let lhs = sigma_pp * body.anisotropic_perimeter(Exponent::finite(p)?).powf(ex)
        * body.volume().powf(q);
    let (wv, wp) = wp_quantities_2d(Exponent::finite(p)?)?;
    let rhs = wp.powf(ex) * wv.powf(q);
    let mut rec = CheckRecord::new(body_id, "step", lhs, rhs, tolerance_rel * rhs.abs());
    rec.p = Some(Exponent::Finite(p));
    rec.q = Some(q);
    rec.r = Some(r);
    rec.sigma_source = Some(source);
    rec.flagged_endpoint = (r - n).abs() < 1e-12;
    Ok(rec)
}

/// Perimeter-normalized eigenvalue inequality for `p in (1, N]`:
/// `Sigma_p^p P_p^{(p-1)/(N-1)} <= P_p(W_p)^{(p-1)/(N-1)}`.
pub fn check_weinstock_p(
    body: &ConvexBody,
    body_id: &str,
    p: f64,
    sigma_pp: f64,
    source: SigmaSource,
    tolerance_rel: f64,
) -> Result<CheckRecord> {
    let n = body.dim() as f64;
    if !(p > 1.0 && p <= n) {
        return Err(Error::Domain(format!(
            "perimeter-normalized inequality needs p in (1, N] = (1, {n}], got {p}"
        )));
    }
    let mut rec = check_step(
        body,
        body_id,
        p,
        0.0,
        p,
        sigma_pp,
        source,
        tolerance_rel,
    )?;
    rec.check = "weinstock_p".into();
    rec.flagged_endpoint = false;
    Ok(rec)
}

/// Volume-normalized limit inequality
/// `sigma_inf V^{1/N} <= sigma_inf(W_1) V(W_1)^{1/N}`, equality exactly
/// on `W_1` up to translation and scaling. Purely geometric.
pub fn check_isodiametric(body: &ConvexBody, body_id: &str, tolerance: f64) -> CheckRecord {
    let n = body.dim();
    let lhs = body.sigma_infty() * body.volume().powf(1.0 / n as f64);
    let w1 = ConvexBody::ball(Exponent::ONE, n, 1.0, None).expect("unit cross-polytope");
    let rhs = w1.sigma_infty() * w1.volume().powf(1.0 / n as f64);
    let mut rec = CheckRecord::new(body_id, "isodiametric", lhs, rhs, tolerance);
    rec.equality_case = Some(rec.slack.abs() <= tolerance.max(1e-12));
    rec
}

/// Planar perimeter-normalized limit inequality
/// `sigma_inf P_inf <= sigma_inf(W_1) P_inf(W_1) = 8`, with the equality
/// flag raised for bodies of constant `l^1` width.
pub fn check_rosenthal_szasz(
    body: &ConvexBody,
    body_id: &str,
    tolerance: f64,
) -> Result<CheckRecord> {
    if body.dim() != 2 {
        return Err(Error::Domain(
            "perimeter-normalized limit inequality is planar".into(),
        ));
    }
    let lhs = body.sigma_infty() * body.anisotropic_perimeter(Exponent::Infinity);
    let w1 = ConvexBody::ball(Exponent::ONE, 2, 1.0, None)?;
    let rhs = w1.sigma_infty() * w1.anisotropic_perimeter(Exponent::Infinity);
    let mut rec = CheckRecord::new(body_id, "rosenthal_szasz", lhs, rhs, tolerance);
    let (wlo, whi) = body.l1_width_extremes(720)?;
    rec.equality_case = Some(whi - wlo <= 1e-9 * body.l1_diameter());
    Ok(rec)
}

/// Anisotropic isoperimetric ratio `V^{1-1/N} / P_p <= [same on W_p]`.
pub fn check_isoperimetric(
    body: &ConvexBody,
    body_id: &str,
    p: Exponent,
    tolerance: f64,
) -> Result<CheckRecord> {
    let n = body.dim() as f64;
    let lhs = body.volume().powf(1.0 - 1.0 / n) / body.anisotropic_perimeter(p);
    let rhs = match p {
        Exponent::Finite(pf) if pf > 1.0 && body.dim() == 2 => {
            let (wv, wpp) = wp_quantities_2d(p)?;
            wv.powf(1.0 - 1.0 / n) / wpp
        }
        _ => {
            let wp = ConvexBody::ball(p, body.dim(), 1.0, None)?;
            wp.volume().powf(1.0 - 1.0 / n) / wp.anisotropic_perimeter(p)
        }
    };
    let mut rec = CheckRecord::new(body_id, "isoperimetric", lhs, rhs, tolerance);
    rec.p = Some(p);
    Ok(rec)
}

/// Shape-ratio inequality `I_p(Omega) >= I_p(W_p)` on the p-centered
/// body (the p-center minimizes the momentum, so this is the sharp
/// placement). Stored with `lhs = I_p(W_p)` so that slack >= 0 still
/// means "inequality holds".
pub fn check_shape_ratio(
    body: &ConvexBody,
    body_id: &str,
    p: f64,
    tolerance: f64,
) -> Result<CheckRecord> {
    if body.dim() != 2 {
        return Err(Error::Unsupported(
            "shape-ratio reference values are two-dimensional".into(),
        ));
    }
    let c = body.boundary_p_center(p)?;
    let centered = body.translated(&c.iter().map(|x| -x).collect::<Vec<_>>())?;
    let rhs = centered.shape_functional(p)?;
    let lhs = match Exponent::finite(p)? {
        Exponent::Finite(pf) if pf > 1.0 => ball_reference_2d(pf)?.shape,
        _ => return Err(Error::Domain("shape ratio needs finite p > 1".into())),
    };
    let mut rec = CheckRecord::new(body_id, "shape_ratio", lhs, rhs, tolerance);
    rec.p = Some(Exponent::Finite(p));
    Ok(rec)
}

// ---------------------------------------------------------------------------
// campaign
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CampaignMode {
    GeometryOnly,
    Fem,
}

/// Declarative campaign description; the file format of the CLI.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CampaignConfig {
    #[serde(default = "default_version")]
    pub version: u32,
    #[serde(default = "default_mode")]
    pub mode: CampaignMode,
    /// Number of seeded random polygons.
    #[serde(default = "default_count")]
    pub random_count: u64,
    /// First seed; bodies use `seed0, seed0 + 1, ...`.
    #[serde(default = "default_seed0")]
    pub seed0: u64,
    /// Include the analytic extremal bodies (balls, boxes).
    #[serde(default = "default_true")]
    pub include_analytic: bool,
    /// Optionally include an inscribed polygon approximation of the
    /// Euclidean disk with this many vertices. Near-extremal at `p = 2`,
    /// so eigensolver-backed checks on it expose the tolerance budget.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub include_disk_approx: Option<usize>,
    /// Finite exponents for the per-p geometric checks.
    #[serde(default = "default_p_grid")]
    pub p_grid: Vec<f64>,
    /// `r` values of the eigenvalue-backed parameter family; the matching
    /// `q = (p - r)/N` is derived, and values with `r > min(p, N)` are
    /// skipped.
    #[serde(default = "default_r_grid")]
    pub r_grid: Vec<f64>,
    /// Mesh size for eigensolves.
    #[serde(default = "default_fem_h")]
    pub fem_h: f64,
    /// Exponents solved by FEM (ascending, starting at 2).
    #[serde(default = "default_fem_p")]
    pub fem_p: Vec<f64>,
    /// Absolute slack budget for geometry-only checks.
    #[serde(default = "default_tol_geometry")]
    pub tol_geometry: f64,
    /// Relative slack budget for eigensolver-backed checks.
    #[serde(default = "default_tol_fem_rel")]
    pub tol_fem_rel: f64,
}

fn default_version() -> u32 {
    1
}
fn default_mode() -> CampaignMode {
    CampaignMode::GeometryOnly
}
fn default_count() -> u64 {
    200
}
fn default_seed0() -> u64 {
    1
}
fn default_true() -> bool {
    true
}
fn default_p_grid() -> Vec<f64> {
    vec![1.5, 2.0, 3.0, 5.0]
}
fn default_r_grid() -> Vec<f64> {
    vec![0.0, 0.5, 1.0, 2.0]
}
fn default_fem_h() -> f64 {
    0.08
}
fn default_fem_p() -> Vec<f64> {
    vec![2.0]
}
fn default_tol_geometry() -> f64 {
    1e-9
}
fn default_tol_fem_rel() -> f64 {
    1e-4
}

impl Default for CampaignConfig {
    fn default() -> Self {
        CampaignConfig {
            version: default_version(),
            mode: default_mode(),
            random_count: default_count(),
            seed0: default_seed0(),
            include_analytic: true,
            include_disk_approx: None,
            p_grid: default_p_grid(),
            r_grid: default_r_grid(),
            fem_h: default_fem_h(),
            fem_p: default_fem_p(),
            tol_geometry: default_tol_geometry(),
            tol_fem_rel: default_tol_fem_rel(),
        }
    }
}

/// Per-check aggregate.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckSummary {
    pub check: String,
    pub records: usize,
    pub failures: usize,
    pub min_slack: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CampaignReport {
    pub version: u32,
    pub config: CampaignConfig,
    pub records: Vec<CheckRecord>,
    pub summaries: Vec<CheckSummary>,
    pub failures: usize,
    /// Body-level errors (body id, message); these do not abort the run.
    pub errors: Vec<(String, String)>,
}

struct BodyEntry {
    id: String,
    seed: Option<u64>,
    body: ConvexBody,
}

fn analytic_bodies() -> Vec<BodyEntry> {
    let mk = |id: &str, body: ConvexBody| BodyEntry {
        id: id.to_string(),
        seed: None,
        body,
    };
    vec![
        mk("w1_n2", ConvexBody::ball(Exponent::ONE, 2, 1.0, None).unwrap()),
        mk(
            "winf_n2",
            ConvexBody::ball(Exponent::Infinity, 2, 1.0, None).unwrap(),
        ),
        mk("w1_n3", ConvexBody::ball(Exponent::ONE, 3, 1.0, None).unwrap()),
        mk(
            "winf_n3",
            ConvexBody::ball(Exponent::Infinity, 3, 1.0, None).unwrap(),
        ),
        mk(
            "box_2x1_n2",
            ConvexBody::box_body(vec![1.0, 0.5], None).unwrap(),
        ),
        mk(
            "box_3x2x1_n3",
            ConvexBody::box_body(vec![1.5, 1.0, 0.5], None).unwrap(),
        ),
    ]
}

fn run_body(cfg: &CampaignConfig, entry: &BodyEntry) -> (Vec<CheckRecord>, Vec<(String, String)>) {
    let mut records = Vec::new();
    let mut errors = Vec::new();
    let body = &entry.body;
    let id = &entry.id;
    let tol = cfg.tol_geometry;
    let planar = body.dim() == 2;

    let mut rec = check_isodiametric(body, id, tol);
    rec.seed = entry.seed;
    records.push(rec);

    if planar {
        match check_rosenthal_szasz(body, id, tol) {
            Ok(mut rec) => {
                rec.seed = entry.seed;
                records.push(rec);
            }
            Err(e) => errors.push((id.clone(), e.to_string())),
        }
    }

    let mut iso_exponents: Vec<Exponent> = vec![Exponent::ONE, Exponent::Infinity];
    if planar {
        iso_exponents.extend(cfg.p_grid.iter().map(|&p| Exponent::Finite(p)));
    }
    for p in iso_exponents {
        match check_isoperimetric(body, id, p, tol) {
            Ok(mut rec) => {
                rec.seed = entry.seed;
                records.push(rec);
            }
            Err(e) => errors.push((id.clone(), e.to_string())),
        }
    }

    if planar {
        for &p in &cfg.p_grid {
            if p <= 1.0 {
                continue;
            }
            match check_shape_ratio(body, id, p, tol) {
                Ok(mut rec) => {
                    rec.seed = entry.seed;
                    records.push(rec);
                }
                Err(e) => errors.push((id.clone(), e.to_string())),
            }
        }
    }

    if cfg.mode == CampaignMode::Fem && planar {
        match fem_checks(cfg, entry) {
            Ok(mut recs) => records.append(&mut recs),
            Err(e) => errors.push((id.clone(), e.to_string())),
        }
    }

    (records, errors)
}

fn fem_checks(cfg: &CampaignConfig, entry: &BodyEntry) -> Result<Vec<CheckRecord>> {
    let body = &entry.body;
    let poly = body.as_polygon(crate::body::DEFAULT_BALL_VERTICES)?;
    let mesh = triangulate(&poly, cfg.fem_h)?;
    let mut records = Vec::new();
    let mut prev = None;
    for &p in &cfg.fem_p {
        let result = if (p - 2.0).abs() < 1e-12 {
            solve_sigma2(&mesh)?
        } else {
            let init = prev.ok_or_else(|| {
                Error::Domain("fem_p must start at 2 for continuation".into())
            })?;
            solve_sigma_p(&mesh, p, &init, SolveOptions::default())?
        };
        if !result.converged {
            return Err(Error::Numerical(format!(
                "eigensolve at p = {p} did not converge"
            )));
        }
        let sigma_pp = result.sigma_p_pow_p;
        let n = body.dim() as f64;
        for &r in &cfg.r_grid {
            if r > n.min(p) + 1e-12 {
                continue;
            }
            let q = ((p - r) / n).max(0.0);
            let mut rec = check_step(
                body,
                &entry.id,
                p,
                q,
                r,
                sigma_pp,
                SigmaSource::Fem,
                cfg.tol_fem_rel,
            )?;
            rec.seed = entry.seed;
            records.push(rec);
        }
        if p > 1.0 && p <= body.dim() as f64 {
            let mut rec = check_weinstock_p(
                body,
                &entry.id,
                p,
                sigma_pp,
                SigmaSource::Fem,
                cfg.tol_fem_rel,
            )?;
            rec.seed = entry.seed;
            records.push(rec);
        }
        prev = Some(result.field);
    }
    Ok(records)
}

/// Run the configured campaign. Bodies are evaluated in parallel and the
/// report is reassembled in a fixed order, so the output is a pure
/// function of the configuration.
pub fn run_campaign(cfg: &CampaignConfig) -> CampaignReport {
    let mut entries: Vec<BodyEntry> = Vec::new();
    if cfg.include_analytic {
        entries.extend(analytic_bodies());
    }
    if let Some(n) = cfg.include_disk_approx {
        if let Ok(body) = ConvexBody::ball(Exponent::TWO, 2, 1.0, Some(n)) {
            entries.push(BodyEntry {
                id: format!("w2_gon{n}"),
                seed: None,
                body,
            });
        }
    }
    for k in 0..cfg.random_count {
        let seed = cfg.seed0 + k;
        entries.push(BodyEntry {
            id: format!("random_{seed:05}"),
            seed: Some(seed),
            body: ConvexBody::random_polygon(seed),
        });
    }

    let mut results: Vec<(usize, Vec<CheckRecord>, Vec<(String, String)>)> = entries
        .par_iter()
        .enumerate()
        .map(|(i, e)| {
            let (r, errs) = run_body(cfg, e);
            (i, r, errs)
        })
        .collect();
    results.sort_by_key(|&(i, _, _)| i);

    let mut records = Vec::new();
    let mut errors = Vec::new();
    for (_, mut recs, mut errs) in results {
        records.append(&mut recs);
        errors.append(&mut errs);
    }

    let mut names: Vec<String> = records.iter().map(|r| r.check.clone()).collect();
    names.sort();
    names.dedup();
    let summaries: Vec<CheckSummary> = names
        .into_iter()
        .map(|name| {
            let rs: Vec<&CheckRecord> = records.iter().filter(|r| r.check == name).collect();
            CheckSummary {
                check: name,
                records: rs.len(),
                failures: rs.iter().filter(|r| !r.pass).count(),
                min_slack: rs.iter().map(|r| r.slack).fold(f64::INFINITY, f64::min),
            }
        })
        .collect();
    let failures = records.iter().filter(|r| !r.pass).count();

    CampaignReport {
        version: cfg.version,
        config: cfg.clone(),
        records,
        summaries,
        failures,
        errors,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_parameter_relation_is_enforced() {
        let body = ConvexBody::box_body(vec![1.0, 1.0], None).unwrap();
        assert!(check_step(&body, "sq", 2.0, 0.3, 1.0, 1.0, SigmaSource::Fem, 1e-4).is_err());
        assert!(check_step(&body, "sq", 2.0, 0.5, 3.0, 1.0, SigmaSource::Fem, 1e-4).is_err());
        assert!(check_step(&body, "sq", 2.0, 0.5, 1.0, 1.0, SigmaSource::Fem, 1e-4).is_ok());
        // r = N endpoint is allowed but flagged
        let rec = check_step(&body, "sq", 2.0, 0.0, 2.0, 1.0, SigmaSource::Fem, 1e-4).unwrap();
        assert!(rec.flagged_endpoint);
    }

    #[test]
    fn weinstock_requires_p_at_most_n() {
        let body = ConvexBody::box_body(vec![1.0, 1.0], None).unwrap();
        assert!(check_weinstock_p(&body, "sq", 3.0, 1.0, SigmaSource::Fem, 1e-4).is_err());
        assert!(check_weinstock_p(&body, "sq", 2.0, 0.5, SigmaSource::Fem, 1e-4).is_ok());
    }

    #[test]
    fn isodiametric_equality_on_the_cross_polytope() {
        let w1 = ConvexBody::ball(Exponent::ONE, 2, 1.0, None).unwrap();
        let rec = check_isodiametric(&w1, "w1", 1e-9);
        assert!(rec.pass);
        assert!(rec.slack.abs() < 1e-12, "slack {}", rec.slack);
        assert_eq!(rec.equality_case, Some(true));
    }

    #[test]
    fn isodiametric_strict_on_the_square() {
        // box [-1,1]^2: sigma_inf = 1/2, V = 4 -> lhs = 1 < sqrt(2)
        let sq = ConvexBody::box_body(vec![1.0, 1.0], None).unwrap();
        let rec = check_isodiametric(&sq, "sq", 1e-9);
        assert!((rec.lhs - 1.0).abs() < 1e-14);
        assert!((rec.rhs - 2.0_f64.sqrt()).abs() < 1e-14);
        assert!(rec.pass && rec.slack > 0.1);
    }

    #[test]
    fn rosenthal_szasz_values() {
        let w1 = ConvexBody::ball(Exponent::ONE, 2, 1.0, None).unwrap();
        let rec = check_rosenthal_szasz(&w1, "w1", 1e-9).unwrap();
        assert!((rec.lhs - 8.0).abs() < 1e-12 && (rec.rhs - 8.0).abs() < 1e-12);
        assert!(rec.slack.abs() < 1e-12);
        assert_eq!(rec.equality_case, Some(true));

        let sq = ConvexBody::box_body(vec![1.0, 1.0], None).unwrap();
        let rec = check_rosenthal_szasz(&sq, "sq", 1e-9).unwrap();
        assert!((rec.lhs - 4.0).abs() < 1e-12);
        assert_eq!(rec.equality_case, Some(false));
    }

    #[test]
    fn isoperimetric_self_comparison_and_thin_box() {
        let w1 = ConvexBody::ball(Exponent::ONE, 2, 1.0, None).unwrap();
        let rec = check_isoperimetric(&w1, "w1", Exponent::ONE, 1e-12).unwrap();
        assert!(rec.slack.abs() < 1e-12);
        let thin = ConvexBody::box_body(vec![5.0, 0.2], None).unwrap();
        let rec = check_isoperimetric(&thin, "thin", Exponent::Infinity, 1e-9).unwrap();
        assert!(rec.pass && rec.slack > 0.0);
    }

    #[test]
    fn shape_ratio_on_random_bodies() {
        for seed in [1u64, 8, 23] {
            let body = ConvexBody::random_polygon(seed);
            for p in [1.5, 2.0, 3.0] {
                let rec = check_shape_ratio(&body, "rnd", p, 1e-9).unwrap();
                assert!(rec.pass, "seed {seed} p {p}: slack {}", rec.slack);
            }
        }
    }

    #[test]
    fn empty_campaign_is_empty_success() {
        let cfg = CampaignConfig {
            random_count: 0,
            include_analytic: false,
            ..CampaignConfig::default()
        };
        let report = run_campaign(&cfg);
        assert_eq!(report.records.len(), 0);
        assert_eq!(report.failures, 0);
    }

    #[test]
    fn small_geometry_campaign_passes_and_is_deterministic() {
        let cfg = CampaignConfig {
            random_count: 8,
            ..CampaignConfig::default()
        };
        let a = run_campaign(&cfg);
        let b = run_campaign(&cfg);
        assert_eq!(a.failures, 0, "summaries: {:?}", a.summaries);
        assert!(a.errors.is_empty(), "{:?}", a.errors);
        let ja = serde_json::to_string(&a).unwrap();
        let jb = serde_json::to_string(&b).unwrap();
        assert_eq!(ja, jb);
    }
}
