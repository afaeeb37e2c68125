//! Shape-spec documents: the JSON schema the CLI accepts for domains.

use anyhow::{bail, Context};
use orthosteklov::body::ConvexBody;
use orthosteklov::lp::Exponent;
use serde::{Deserialize, Serialize};

/// Versioned shape description.
///
/// ```json
/// {"version":1,"kind":"regular_polygon","sides":6,"circumradius":1.0}
/// {"version":1,"kind":"polygon","vertices":[[0,0],[1,0],[0,1]]}
/// {"version":1,"kind":"box","half_widths":[1.0,0.5],"center":[0,0]}
/// {"version":1,"kind":"lp_ball","dim":2,"p":"inf","radius":1.0}
/// {"version":1,"kind":"random","seed":7,"points":20}
/// ```
///
/// `center` translates the built body; `lp_ball` accepts `p` as a number
/// or the string `"inf"`, plus an optional `vertices` count for the
/// inscribed approximation at finite `p` not equal to 1.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ShapeSpec {
    #[serde(default = "default_version")]
    pub version: u32,
    #[serde(flatten)]
    pub kind: ShapeKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<Vec<f64>>,
}

fn default_version() -> u32 {
    1
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ShapeKind {
    RegularPolygon {
        sides: usize,
        circumradius: f64,
    },
    Polygon {
        vertices: Vec<[f64; 2]>,
    },
    Box {
        half_widths: Vec<f64>,
    },
    LpBall {
        dim: usize,
        p: Exponent,
        radius: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        vertices: Option<usize>,
    },
    Random {
        seed: u64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        points: Option<usize>,
    },
}

impl ShapeSpec {
    /// Parse an inline JSON document (starts with `{`) or a file path.
    pub fn load(arg: &str) -> anyhow::Result<ShapeSpec> {
        let text = if arg.trim_start().starts_with('{') {
            arg.to_string()
        } else {
            std::fs::read_to_string(arg)
                .with_context(|| format!("cannot read shape file {arg}"))?
        };
        let spec: ShapeSpec = serde_json::from_str(&text)
            .with_context(|| format!("shape spec parse error in {arg}"))?;
        if spec.version != 1 {
            bail!("unsupported shape spec version {}", spec.version);
        }
        Ok(spec)
    }

    pub fn build(&self) -> anyhow::Result<ConvexBody> {
        let body = match &self.kind {
            ShapeKind::RegularPolygon {
                sides,
                circumradius,
            } => ConvexBody::regular_polygon(*sides, *circumradius)?,
            ShapeKind::Polygon { vertices } => ConvexBody::polygon(vertices.clone())?,
            ShapeKind::Box { half_widths } => ConvexBody::box_body(half_widths.clone(), None)?,
            ShapeKind::LpBall {
                dim,
                p,
                radius,
                vertices,
            } => ConvexBody::ball(*p, *dim, *radius, *vertices)?,
            ShapeKind::Random { seed, points } => match points {
                Some(k) => ConvexBody::random_polygon_with_points(*seed, *k)?,
                None => ConvexBody::random_polygon(*seed),
            },
        };
        match &self.center {
            Some(c) => Ok(body.translated(c)?),
            None => Ok(body),
        }
    }
}
