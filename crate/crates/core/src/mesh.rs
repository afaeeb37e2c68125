//! Triangulation of convex polygons: centroid fan plus uniform 4-way
//! (midpoint) refinement. Boundary edges carry the outward normal of the
//! polygon edge they descend from, exactly.

use std::collections::HashMap;

use crate::body::Polygon2d;
use crate::error::{Error, Result};

/// Default cap on node count for [`triangulate`]/[`refine`].
pub const DEFAULT_NODE_CAP: usize = 200_000;

#[derive(Debug, Clone)]
pub struct BoundaryEdge {
    /// Node pair, ordered so the cycle runs counterclockwise.
    pub nodes: [usize; 2],
    /// Outward Euclidean unit normal, inherited from the parent edge.
    pub normal: [f64; 2],
    pub length: f64,
    /// Index of the polygon edge this boundary edge descends from.
    pub parent_edge: usize,
}

#[derive(Debug, Clone)]
pub struct TriMesh {
    pub nodes: Vec<[f64; 2]>,
    /// Counterclockwise index triples.
    pub triangles: Vec<[usize; 3]>,
    /// Closed counterclockwise cycle.
    pub boundary_edges: Vec<BoundaryEdge>,
    /// Max triangle diameter (longest edge).
    pub h: f64,
    source: Polygon2d,
}

impl TriMesh {
    pub fn source_polygon(&self) -> &Polygon2d {
        &self.source
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t];
        let (pa, pb, pc) = (self.nodes[a], self.nodes[b], self.nodes[c]);
        0.5 * ((pb[0] - pa[0]) * (pc[1] - pa[1]) - (pc[0] - pa[0]) * (pb[1] - pa[1]))
    }

    pub fn total_area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.triangle_area(t)).sum()
    }

    /// Indices of nodes lying on the boundary, in cycle order.
    pub fn boundary_nodes(&self) -> Vec<usize> {
        self.boundary_edges.iter().map(|e| e.nodes[0]).collect()
    }

    /// Smallest interior angle over all triangles, in radians.
    pub fn min_angle(&self) -> f64 {
        let mut best = f64::INFINITY;
        for t in &self.triangles {
            for k in 0..3 {
                let o = self.nodes[t[k]];
                let a = self.nodes[t[(k + 1) % 3]];
                let b = self.nodes[t[(k + 2) % 3]];
                let u = [a[0] - o[0], a[1] - o[1]];
                let v = [b[0] - o[0], b[1] - o[1]];
                let dot = u[0] * v[0] + u[1] * v[1];
                let nu = u[0].hypot(u[1]);
                let nv = v[0].hypot(v[1]);
                best = best.min((dot / (nu * nv)).clamp(-1.0, 1.0).acos());
            }
        }
        best
    }

    fn max_diameter(nodes: &[[f64; 2]], triangles: &[[usize; 3]]) -> f64 {
        let mut h = 0.0_f64;
        for t in triangles {
            for k in 0..3 {
                let a = nodes[t[k]];
                let b = nodes[t[(k + 1) % 3]];
                h = h.max((a[0] - b[0]).hypot(a[1] - b[1]));
            }
        }
        h
    }

    /// Debug validation of the structural invariants.
    pub fn validate(&self) -> Result<()> {
        for t in 0..self.triangles.len() {
            if self.triangle_area(t) <= 0.0 {
                return Err(Error::Numerical(format!("triangle {t} not positively oriented")));
            }
        }
        let area = self.total_area();
        let want = self.source.area();
        if ((area - want) / want).abs() > 1e-10 {
            return Err(Error::Numerical(format!(
                "triangle areas sum to {area}, polygon area is {want}"
            )));
        }
        let m = self.boundary_edges.len();
        for (i, e) in self.boundary_edges.iter().enumerate() {
            let next = &self.boundary_edges[(i + 1) % m];
            if e.nodes[1] != next.nodes[0] {
                return Err(Error::Numerical("boundary cycle broken".into()));
            }
            let parent = &self.source.edges()[e.parent_edge];
            let dn = (e.normal[0] - parent.normal[0]).abs()
                + (e.normal[1] - parent.normal[1]).abs();
            if dn > 1e-12 {
                return Err(Error::Numerical("boundary normal drifted from parent".into()));
            }
        }
        Ok(())
    }
}

/// Fan triangulation from the centroid, refined uniformly until the max
/// triangle diameter is at most `h_target`.
pub fn triangulate(polygon: &Polygon2d, h_target: f64) -> Result<TriMesh> {
    triangulate_with_cap(polygon, h_target, DEFAULT_NODE_CAP)
}

pub fn triangulate_with_cap(
    polygon: &Polygon2d,
    h_target: f64,
    node_cap: usize,
) -> Result<TriMesh> {
    if !(h_target > 0.0) {
        return Err(Error::Domain(format!("h_target must be > 0, got {h_target}")));
    }
    let nv = polygon.vertices().len();
    let mut nodes: Vec<[f64; 2]> = polygon.vertices().to_vec();
    nodes.push(polygon.centroid());
    let center = nv;
    let triangles: Vec<[usize; 3]> = (0..nv).map(|i| [center, i, (i + 1) % nv]).collect();
    let boundary_edges: Vec<BoundaryEdge> = polygon
        .edges()
        .iter()
        .enumerate()
        .map(|(i, e)| BoundaryEdge {
            nodes: [e.from, e.to],
            normal: e.normal,
            length: e.length,
            parent_edge: i,
        })
        .collect();
    let h = TriMesh::max_diameter(&nodes, &triangles);
    let mut mesh = TriMesh {
        nodes,
        triangles,
        boundary_edges,
        h,
        source: polygon.clone(),
    };
    // tolerate rounding when h lands exactly on the target after halving
    while mesh.h > h_target * (1.0 + 1e-12) {
        mesh = refine_with_cap(&mesh, node_cap)?;
    }
    Ok(mesh)
}

/// Uniform refinement: every triangle is split into four by its edge
/// midpoints; `h` halves and all invariants are preserved exactly.
pub fn refine(mesh: &TriMesh) -> Result<TriMesh> {
    refine_with_cap(mesh, DEFAULT_NODE_CAP)
}

pub fn refine_with_cap(mesh: &TriMesh, node_cap: usize) -> Result<TriMesh> {
    let mut nodes = mesh.nodes.clone();
    let mut midpoints: HashMap<(usize, usize), usize> = HashMap::new();
    let mut mid = |a: usize, b: usize, nodes: &mut Vec<[f64; 2]>| -> usize {
        let key = (a.min(b), a.max(b));
        *midpoints.entry(key).or_insert_with(|| {
            let pa = nodes[a];
            let pb = nodes[b];
            nodes.push([0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])]);
            nodes.len() - 1
        })
    };

    let mut triangles = Vec::with_capacity(4 * mesh.triangles.len());
    for &[a, b, c] in &mesh.triangles {
        let ab = mid(a, b, &mut nodes);
        let bc = mid(b, c, &mut nodes);
        let ca = mid(c, a, &mut nodes);
        triangles.push([a, ab, ca]);
        triangles.push([ab, b, bc]);
        triangles.push([ca, bc, c]);
        triangles.push([ab, bc, ca]);
    }
    if nodes.len() > node_cap {
        return Err(Error::Resource(format!(
            "refinement would need {} nodes (cap {node_cap})",
            nodes.len()
        )));
    }

    let mut boundary_edges = Vec::with_capacity(2 * mesh.boundary_edges.len());
    for e in &mesh.boundary_edges {
        let [a, b] = e.nodes;
        let m = mid(a, b, &mut nodes);
        let half = 0.5 * e.length;
        boundary_edges.push(BoundaryEdge {
            nodes: [a, m],
            normal: e.normal,
            length: half,
            parent_edge: e.parent_edge,
        });
        boundary_edges.push(BoundaryEdge {
            nodes: [m, b],
            normal: e.normal,
            length: half,
            parent_edge: e.parent_edge,
        });
    }

    let h = TriMesh::max_diameter(&nodes, &triangles);
    Ok(TriMesh {
        nodes,
        triangles,
        boundary_edges,
        h,
        source: mesh.source.clone(),
    })
}
