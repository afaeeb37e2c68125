//! `l^p` norms, dual exponents, maximal-index sets and the elementary
//! vector inequalities the rest of the crate is built on.
//!
//! Everything here is a pure function of its arguments. The extended
//! exponent range `[1, inf]` is modelled by [`Exponent`], which keeps
//! `inf` as a distinct tag so that `dual(inf) = 1` and the weight
//! `rho_inf = |nu|_1` are exact rather than large-float approximations.

use std::fmt;
use std::str::FromStr;

use serde::de::{self, Deserializer, Visitor};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Extended exponent in `[1, inf]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Exponent {
    Finite(f64),
    Infinity,
}

impl Exponent {
    pub const ONE: Exponent = Exponent::Finite(1.0);
    pub const TWO: Exponent = Exponent::Finite(2.0);

    /// A finite exponent; must be a finite float `>= 1`.
    pub fn finite(p: f64) -> Result<Self> {
        if !p.is_finite() || p < 1.0 {
            return Err(Error::Domain(format!("exponent must be >= 1, got {p}")));
        }
        Ok(Exponent::Finite(p))
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Exponent::Infinity)
    }

    /// The finite value, if any.
    pub fn as_finite(self) -> Option<f64> {
        match self {
            Exponent::Finite(p) => Some(p),
            Exponent::Infinity => None,
        }
    }

    /// Conjugate exponent `p' = p/(p-1)`, with `dual(1) = inf` and
    /// `dual(inf) = 1` exact.
    pub fn dual(self) -> Exponent {
        match self {
            Exponent::Infinity => Exponent::Finite(1.0),
            Exponent::Finite(p) if p == 1.0 => Exponent::Infinity,
            Exponent::Finite(p) => Exponent::Finite(p / (p - 1.0)),
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Finite(p) => write!(f, "{p}"),
            Exponent::Infinity => write!(f, "inf"),
        }
    }
}

impl FromStr for Exponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "Inf" | "INF" | "infinity" | "Infinity" => Ok(Exponent::Infinity),
            t => {
                let p: f64 = t
                    .parse()
                    .map_err(|_| Error::Domain(format!("cannot parse exponent {s:?}")))?;
                Exponent::finite(p)
            }
        }
    }
}

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Exponent::Finite(p) => serializer.serialize_f64(*p),
            Exponent::Infinity => serializer.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct ExpVisitor;

        impl Visitor<'_> for ExpVisitor {
            type Value = Exponent;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a number >= 1 or the string \"inf\"")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Exponent, E> {
                Exponent::finite(v).map_err(E::custom)
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Exponent, E> {
                self.visit_f64(v as f64)
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Exponent, E> {
                self.visit_f64(v as f64)
            }

            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Exponent, E> {
                v.parse().map_err(E::custom)
            }
        }

        deserializer.deserialize_any(ExpVisitor)
    }
}

/// Coordinate indices attaining (up to a relative tie tolerance) the
/// `l^inf` norm of a vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexSet {
    indices: Vec<usize>,
}

impl IndexSet {
    pub fn as_slice(&self) -> &[usize] {
        &self.indices
    }

    pub fn contains(&self, j: usize) -> bool {
        self.indices.contains(&j)
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.indices.iter().copied()
    }
}

/// Default relative tie tolerance for [`max_index_set`]. Gradients coming
/// out of the FE solver carry O(h) noise, so exact ties must be detected
/// with slack.
pub const DEFAULT_TIE_TOL: f64 = 1e-9;

fn ensure_finite(x: &[f64], what: &str) -> Result<()> {
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain(format!("non-finite entry in {what}")));
    }
    Ok(())
}

/// `l^p` norm of a vector, `p` in `[1, inf]`, with overflow-safe rescaling
/// by the max entry.
pub fn lp_norm(x: &[f64], p: Exponent) -> Result<f64> {
    ensure_finite(x, "lp_norm input")?;
    let m = x.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    if m == 0.0 {
        return Ok(0.0);
    }
    Ok(match p {
        Exponent::Infinity => m,
        Exponent::Finite(p) if p == 1.0 => x.iter().map(|v| v.abs()).sum(),
        Exponent::Finite(p) => {
            let s: f64 = x.iter().map(|v| (v.abs() / m).powf(p)).sum();
            m * s.powf(1.0 / p)
        }
    })
}

/// The set `{ j : |x_j| >= (1 - tau) * |x|_inf }`.
///
/// Errors on the zero vector; the caller decides what a degenerate
/// argument means for its operator.
pub fn max_index_set(x: &[f64], tau: f64) -> Result<IndexSet> {
    ensure_finite(x, "max_index_set input")?;
    let m = x.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    if m == 0.0 {
        return Err(Error::Degenerate("max_index_set of the zero vector".into()));
    }
    let threshold = (1.0 - tau) * m;
    let indices = x
        .iter()
        .enumerate()
        .filter(|(_, v)| v.abs() >= threshold)
        .map(|(j, _)| j)
        .collect();
    Ok(IndexSet { indices })
}

/// Boundary weight `rho_p(nu) = |nu|_{p'}` for a Euclidean unit normal.
pub fn rho_weight(normal: &[f64], p: Exponent) -> Result<f64> {
    let n2 = lp_norm(normal, Exponent::TWO)?;
    if (n2 - 1.0).abs() > 1e-12 {
        return Err(Error::Domain(format!(
            "rho_weight expects a Euclidean unit normal, |nu|_2 = {n2}"
        )));
    }
    lp_norm(normal, p.dual())
}

/// Gap `<|x|^{p-2}x - |y|^{p-2}y, x - y> - 2^{2-p} |x - y|^p` (Euclidean
/// norms), which is non-negative for `p >= 2` up to rounding.
pub fn power_monotonicity_gap(x: &[f64], y: &[f64], p: f64) -> Result<f64> {
    ensure_finite(x, "power_monotonicity_gap x")?;
    ensure_finite(y, "power_monotonicity_gap y")?;
    if !(p >= 2.0) {
        return Err(Error::Domain(format!(
            "power monotonicity requires p >= 2, got {p}"
        )));
    }
    if x.len() != y.len() {
        return Err(Error::Domain("mismatched vector lengths".into()));
    }
    let nx = lp_norm(x, Exponent::TWO)?;
    let ny = lp_norm(y, Exponent::TWO)?;
    let ax = if nx > 0.0 { nx.powf(p - 2.0) } else { 0.0 };
    let ay = if ny > 0.0 { ny.powf(p - 2.0) } else { 0.0 };
    let lhs: f64 = x
        .iter()
        .zip(y)
        .map(|(&xi, &yi)| (ax * xi - ay * yi) * (xi - yi))
        .sum();
    let diff: Vec<f64> = x.iter().zip(y).map(|(&xi, &yi)| xi - yi).collect();
    let nd = lp_norm(&diff, Exponent::TWO)?;
    let rhs = 2.0_f64.powf(2.0 - p) * nd.powf(p);
    Ok(lhs - rhs)
}
