//! Circumcentric dual measures.

use super::{MeshError, SimplicialMesh, DEGENERACY_TOL};
use crate::geometry::Vec3;

/// Below this (relative) magnitude an angle's cotangent is treated as zero
/// when classifying circumcenter positions.
const RIGHT_ANGLE_TOL: f64 = 1e-12;

/// Circumcenter of the triangle `abc`, in its plane.
pub fn circumcenter(a: Vec3, b: Vec3, c: Vec3) -> Result<Vec3, MeshError> {
    let u = b - a;
    let v = c - a;
    let w = u.cross(v);
    let w2 = w.norm_squared();
    if !(w2.sqrt() > DEGENERACY_TOL * u.norm() * v.norm()) {
        return Err(MeshError::CollinearPoints);
    }
    let offset = (v * u.norm_squared() - u * v.norm_squared()).cross(w) / (2.0 * w2);
    Ok(a + offset)
}

/// Primal and dual measures of a mesh.
#[derive(Clone, Debug)]
pub struct DualMetrics {
    /// Length of each primal edge.
    pub primal_edge_length: Vec<f64>,
    /// Sum over incident triangles of |circumcenter - edge midpoint|.
    pub dual_edge_length: Vec<f64>,
    /// Area of each vertex's dual cell (signed quadrangle sums).
    pub dual_area: Vec<f64>,
    pub circumcenters: Vec<Vec3>,
    /// Cotangent of each triangle's angle at corner 0, 1, 2. Negative means
    /// obtuse: the circumcenter lies beyond the opposite edge.
    pub corner_cotangent: Vec<[f64; 3]>,
}

impl DualMetrics {
    pub fn n_vertices(&self) -> usize {
        self.dual_area.len()
    }

    pub fn n_edges(&self) -> usize {
        self.primal_edge_length.len()
    }

    /// Hodge-star weight of edge `e`: dual length over primal length.
    #[inline]
    pub fn edge_weight(&self, e: usize) -> f64 {
        self.dual_edge_length[e] / self.primal_edge_length[e]
    }
}

/// Computes edge lengths, circumcentric dual edge lengths and dual areas.
///
/// Each triangle contributes `|e|/2 * |cot(theta)|` to the dual length of the
/// edge opposite angle `theta`. That is the distance from its circumcenter to
/// the edge midpoint, evaluated so that right angles give exactly zero.
/// Dual areas are sums of signed quadrangles `(v, m1, c, m2)` so they always
/// partition the surface, even where circumcenters fall outside a triangle.
pub fn dual_metrics(mesh: &SimplicialMesh) -> Result<DualMetrics, MeshError> {
    let primal_edge_length: Vec<f64> = mesh
        .edges()
        .iter()
        .map(|&[a, b]| mesh.vertices()[a].distance(mesh.vertices()[b]))
        .collect();

    let mut dual_edge_length = vec![0.0; mesh.n_edges()];
    let mut dual_area = vec![0.0; mesh.n_vertices()];
    let mut circumcenters = Vec::with_capacity(mesh.n_triangles());
    let mut corner_cotangent = Vec::with_capacity(mesh.n_triangles());

    for (t, tri) in mesh.triangles().iter().enumerate() {
        let p = mesh.triangle_points(t);
        let cc = circumcenter(p[0], p[1], p[2])
            .map_err(|_| MeshError::DegenerateTriangle { triangle: t })?;
        let normal = (p[1] - p[0]).cross(p[2] - p[0]);
        let unit_normal = normal / normal.norm();
        let edges = mesh.triangle_edges(t);

        let mut cots = [0.0; 3];
        for k in 0..3 {
            let (v, next, prev) = (p[k], p[(k + 1) % 3], p[(k + 2) % 3]);
            let (u, w) = (next - v, prev - v);
            let cot = u.dot(w) / u.cross(w).norm();
            cots[k] = cot;
            let e = edges[k];
            dual_edge_length[e] += 0.5 * primal_edge_length[e] * cot.abs();

            let m_next = v.midpoint(next);
            let m_prev = v.midpoint(prev);
            let quad = 0.5 * unit_normal.dot((m_next - v).cross(cc - v))
                + 0.5 * unit_normal.dot((cc - v).cross(m_prev - v));
            dual_area[tri[k]] += quad;
        }
        circumcenters.push(cc);
        corner_cotangent.push(cots);
    }

    let metrics = DualMetrics {
        primal_edge_length,
        dual_edge_length,
        dual_area,
        circumcenters,
        corner_cotangent,
    };
    let report = quality_report(mesh, &metrics);
    if let Some(worst) = report.worst_triangle {
        log::warn!(
            "mesh is not well-centered: {} triangles with exterior circumcenters, \
             {} negative dual-edge contributions (worst triangle {worst})",
            report.count(CircumcenterLocation::Exterior),
            report.negative_contributions,
        );
    }
    Ok(metrics)
}

/// Like [`dual_metrics`] but rejects any triangle whose circumcenter lies
/// strictly outside it.
pub fn dual_metrics_strict(mesh: &SimplicialMesh) -> Result<DualMetrics, MeshError> {
    let metrics = dual_metrics(mesh)?;
    let report = quality_report(mesh, &metrics);
    match report.worst_triangle {
        Some(t) => Err(MeshError::NotWellCentered { triangle: t }),
        None => Ok(metrics),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CircumcenterLocation {
    Interior,
    OnBoundary,
    Exterior,
}

/// Per-triangle classification of circumcenter positions.
#[derive(Clone, Debug)]
pub struct WellCenteredReport {
    pub locations: Vec<CircumcenterLocation>,
    /// Number of (triangle, edge) pairs whose circumcenter segment points
    /// inward past the edge, i.e. an obtuse opposite angle.
    pub negative_contributions: usize,
    /// Most obtuse triangle among those with exterior circumcenters.
    pub worst_triangle: Option<usize>,
}

impl WellCenteredReport {
    pub fn count(&self, loc: CircumcenterLocation) -> usize {
        self.locations.iter().filter(|&&l| l == loc).count()
    }

    pub fn is_well_centered(&self) -> bool {
        self.worst_triangle.is_none()
    }
}

pub fn quality_report(mesh: &SimplicialMesh, metrics: &DualMetrics) -> WellCenteredReport {
    let mut locations = Vec::with_capacity(mesh.n_triangles());
    let mut negative_contributions = 0;
    let mut worst: Option<(usize, f64)> = None;
    for (t, cots) in metrics.corner_cotangent.iter().enumerate() {
        let negatives = cots.iter().filter(|&&c| c < -RIGHT_ANGLE_TOL).count();
        negative_contributions += negatives;
        let min = cots.iter().copied().fold(f64::INFINITY, f64::min);
        let loc = if negatives > 0 {
            CircumcenterLocation::Exterior
        } else if min <= RIGHT_ANGLE_TOL {
            CircumcenterLocation::OnBoundary
        } else {
            CircumcenterLocation::Interior
        };
        if loc == CircumcenterLocation::Exterior && worst.is_none_or(|(_, w)| min < w) {
            worst = Some((t, min));
        }
        locations.push(loc);
    }
    WellCenteredReport {
        locations,
        negative_contributions,
        worst_triangle: worst.map(|(t, _)| t),
    }
}
