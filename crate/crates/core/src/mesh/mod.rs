//! Triangle meshes embedded in 3-space and their circumcentric duals.
//!
//! A [`SimplicialMesh`] owns the primal complex: vertices, triangles and
//! the derived edge list with its adjacency tables. [`DualMetrics`] holds
//! the primal/dual measures the discrete Laplacian is built from.

mod dual;
pub mod generate;
mod off;

pub use dual::{
    circumcenter, dual_metrics, dual_metrics_strict, quality_report, CircumcenterLocation,
    DualMetrics, WellCenteredReport,
};
pub use off::{load_mesh, read_off_file, write_off};

use crate::geometry::Vec3;

/// Relative threshold below which a triangle's sine of angle counts as zero.
pub(crate) const DEGENERACY_TOL: f64 = 1e-12;

#[derive(Debug, thiserror::Error)]
pub enum MeshError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("triangle {triangle}: vertex index {index} out of range ({count} vertices)")]
    IndexOutOfRange {
        triangle: usize,
        index: usize,
        count: usize,
    },

    #[error("triangle {triangle} is degenerate (repeated vertex or zero area)")]
    DegenerateTriangle { triangle: usize },

    #[error("edge ({a}, {b}) is non-manifold: triangle {triangle} would be its third face")]
    NonManifoldEdge { a: usize, b: usize, triangle: usize },

    #[error("points are collinear, circumcenter undefined")]
    CollinearPoints,

    #[error("mesh has no triangles")]
    Empty,

    #[error("triangle {triangle} has its circumcenter outside (strict mode)")]
    NotWellCentered { triangle: usize },

    #[error("line {line}: {source}")]
    AtLine {
        line: usize,
        #[source]
        source: Box<MeshError>,
    },

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl MeshError {
    /// Triangle index the error refers to, if any.
    pub fn triangle(&self) -> Option<usize> {
        match *self {
            MeshError::IndexOutOfRange { triangle, .. }
            | MeshError::DegenerateTriangle { triangle }
            | MeshError::NonManifoldEdge { triangle, .. }
            | MeshError::NotWellCentered { triangle } => Some(triangle),
            _ => None,
        }
    }

    /// Source line of the error when it came from a parsed file.
    pub fn line(&self) -> Option<usize> {
        match *self {
            MeshError::Parse { line, .. } | MeshError::AtLine { line, .. } => Some(line),
            _ => None,
        }
    }
}

/// A validated 2-manifold (possibly with boundary) triangle complex.
#[derive(Clone, Debug, PartialEq)]
pub struct SimplicialMesh {
    vertices: Vec<Vec3>,
    triangles: Vec<[usize; 3]>,
    /// Canonical `(min, max)` pairs, sorted lexicographically.
    edges: Vec<[usize; 2]>,
    /// One or two incident triangles per edge.
    edge_triangles: Vec<EdgeFaces>,
    /// Incident edge indices per vertex, ascending.
    vertex_edges: Vec<Vec<usize>>,
    /// For each triangle, the edge indices opposite vertex 0, 1, 2.
    triangle_edges: Vec<[usize; 3]>,
    boundary_vertex: Vec<bool>,
}

/// Triangles incident to an edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EdgeFaces {
    Boundary(usize),
    Interior(usize, usize),
}

#[allow(clippy::len_without_is_empty)]
impl EdgeFaces {
    pub fn iter(self) -> impl Iterator<Item = usize> {
        let (a, b) = match self {
            EdgeFaces::Boundary(t) => (t, None),
            EdgeFaces::Interior(t, u) => (t, Some(u)),
        };
        std::iter::once(a).chain(b)
    }

    pub fn len(self) -> usize {
        match self {
            EdgeFaces::Boundary(_) => 1,
            EdgeFaces::Interior(..) => 2,
        }
    }

    pub fn is_boundary(self) -> bool {
        matches!(self, EdgeFaces::Boundary(_))
    }
}

impl SimplicialMesh {
    /// Builds a mesh, deriving edges and adjacency and checking every invariant.
    pub fn new(vertices: Vec<Vec3>, triangles: Vec<[usize; 3]>) -> Result<Self, MeshError> {
        if triangles.is_empty() {
            return Err(MeshError::Empty);
        }
        let n = vertices.len();
        for (t, tri) in triangles.iter().enumerate() {
            for &i in tri {
                if i >= n {
                    return Err(MeshError::IndexOutOfRange {
                        triangle: t,
                        index: i,
                        count: n,
                    });
                }
            }
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                return Err(MeshError::DegenerateTriangle { triangle: t });
            }
            let [a, b, c] = tri.map(|i| vertices[i]);
            let (u, v) = (b - a, c - a);
            let cross = u.cross(v).norm();
            if !(cross > DEGENERACY_TOL * u.norm() * v.norm()) {
                return Err(MeshError::DegenerateTriangle { triangle: t });
            }
        }

        // Collect (edge, triangle, opposite-corner) incidences and sort them so
        // edge numbering is independent of triangle order.
        let mut incid: Vec<([usize; 2], usize, usize)> = Vec::with_capacity(3 * triangles.len());
        for (t, tri) in triangles.iter().enumerate() {
            for corner in 0..3 {
                let a = tri[(corner + 1) % 3];
                let b = tri[(corner + 2) % 3];
                incid.push(([a.min(b), a.max(b)], t, corner));
            }
        }
        incid.sort_unstable();

        let mut edges = Vec::new();
        let mut edge_triangles = Vec::new();
        let mut triangle_edges = vec![[usize::MAX; 3]; triangles.len()];
        let mut i = 0;
        while i < incid.len() {
            let key = incid[i].0;
            let mut j = i;
            while j < incid.len() && incid[j].0 == key {
                j += 1;
            }
            if j - i > 2 {
                return Err(MeshError::NonManifoldEdge {
                    a: key[0],
                    b: key[1],
                    triangle: incid[i..j].iter().map(|x| x.1).nth(2).unwrap(),
                });
            }
            let e = edges.len();
            edges.push(key);
            edge_triangles.push(if j - i == 1 {
                EdgeFaces::Boundary(incid[i].1)
            } else {
                EdgeFaces::Interior(incid[i].1, incid[i + 1].1)
            });
            for &(_, t, corner) in &incid[i..j] {
                triangle_edges[t][corner] = e;
            }
            i = j;
        }

        let mut vertex_edges = vec![Vec::new(); n];
        let mut boundary_vertex = vec![false; n];
        for (e, &[a, b]) in edges.iter().enumerate() {
            vertex_edges[a].push(e);
            vertex_edges[b].push(e);
            if edge_triangles[e].is_boundary() {
                boundary_vertex[a] = true;
                boundary_vertex[b] = true;
            }
        }

        Ok(SimplicialMesh {
            vertices,
            triangles,
            edges,
            edge_triangles,
            vertex_edges,
            triangle_edges,
            boundary_vertex,
        })
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    pub fn edge_triangles(&self) -> &[EdgeFaces] {
        &self.edge_triangles
    }

    pub fn vertex_edges(&self, v: usize) -> &[usize] {
        &self.vertex_edges[v]
    }

    /// Edge indices of triangle `t`, ordered opposite its vertices 0, 1, 2.
    pub fn triangle_edges(&self, t: usize) -> [usize; 3] {
        self.triangle_edges[t]
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    /// Vertices touching at least one boundary edge.
    pub fn boundary_vertices(&self) -> &[bool] {
        &self.boundary_vertex
    }

    pub fn is_boundary_vertex(&self, v: usize) -> bool {
        self.boundary_vertex[v]
    }

    /// Looks up the index of the edge joining `a` and `b`.
    pub fn find_edge(&self, a: usize, b: usize) -> Option<usize> {
        let key = [a.min(b), a.max(b)];
        self.edges.binary_search(&key).ok()
    }

    /// The vertex across edge `e` from `v`.
    pub fn other_vertex(&self, e: usize, v: usize) -> usize {
        let [a, b] = self.edges[e];
        if a == v {
            b
        } else {
            a
        }
    }

    pub fn triangle_points(&self, t: usize) -> [Vec3; 3] {
        self.triangles[t].map(|i| self.vertices[i])
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangle_points(t);
        0.5 * (b - a).cross(c - a).norm()
    }

    pub fn total_area(&self) -> f64 {
        (0..self.n_triangles()).map(|t| self.triangle_area(t)).sum()
    }

    /// Index of the vertex closest to `p` (lowest index on ties).
    pub fn nearest_vertex(&self, p: Vec3) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, v) in self.vertices.iter().enumerate() {
            let d = (*v - p).norm_squared();
            if d < best_d {
                best_d = d;
                best = i;
            }
        }
        best
    }
}
