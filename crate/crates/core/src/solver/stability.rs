use super::SolverError;
use crate::media::MaterialField;
use crate::mesh::{DualMetrics, SimplicialMesh};

/// Largest time step for which the lossless explicit update is stable:
///
/// ```text
/// min_v (1 / c0(v)) * sqrt(2 / ((1 / P_v) * sum_{e at v} dual_len(e) / primal_len(e)))
/// ```
///
/// Vertices with no incident weight do not couple to the wave and are skipped.
pub fn stable_dt(
    mesh: &SimplicialMesh,
    metrics: &DualMetrics,
    media: &MaterialField,
) -> Result<f64, SolverError> {
    if media.len() != mesh.n_vertices() {
        return Err(SolverError::LengthMismatch {
            expected: mesh.n_vertices(),
            got: media.len(),
        });
    }
    let mut best: Option<f64> = None;
    for v in 0..mesh.n_vertices() {
        let weight: f64 = mesh
            .vertex_edges(v)
            .iter()
            .map(|&e| metrics.edge_weight(e))
            .sum();
        if !(weight > 0.0) {
            continue;
        }
        let bound = (2.0 * metrics.dual_area[v] / weight).sqrt() / media.get(v).c0;
        best = Some(best.map_or(bound, |b: f64| b.min(bound)));
    }
    best.ok_or(SolverError::NoCoupledVertices)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Vec3;
    use crate::media::{assign_regions, MaterialParams, Region, RegionSpec};
    use crate::mesh::{dual_metrics, generate};

    #[test]
    fn square_grid_bound() {
        for (n, c0) in [(10usize, 1.0), (32, 340.0), (7, 1500.0)] {
            let size = 0.01 * n as f64;
            let m = generate::square_grid(n, size);
            let d = dual_metrics(&m).unwrap();
            let f = MaterialField::uniform(m.n_vertices(), MaterialParams::linear(c0));
            let dt = stable_dt(&m, &d, &f).unwrap();
            let expect = std::f64::consts::FRAC_1_SQRT_2 * 0.01 / c0;
            assert!((dt - expect).abs() <= 1e-12 * expect, "{dt} vs {expect}");
        }
    }

    #[test]
    fn two_media_bound_follows_fast_region() {
        let m = generate::square_grid(10, 0.1);
        let d = dual_metrics(&m).unwrap();
        let slow = MaterialParams::linear(340.0);
        let uniform = stable_dt(&m, &d, &MaterialField::uniform(m.n_vertices(), slow)).unwrap();
        let spec = RegionSpec {
            default: slow,
            overrides: vec![(
                Region::Box {
                    min: Vec3::new(0.05, -1.0, -1.0),
                    max: Vec3::new(1.0, 1.0, 1.0),
                },
                MaterialParams::linear(3400.0),
            )],
        };
        let two = stable_dt(&m, &d, &assign_regions(&m, &spec)).unwrap();
        assert!((two - uniform / 10.0).abs() <= 1e-12 * two);
    }

    #[test]
    fn length_mismatch() {
        let m = generate::square_grid(2, 1.0);
        let d = dual_metrics(&m).unwrap();
        let f = MaterialField::uniform(3, MaterialParams::linear(1.0));
        assert!(stable_dt(&m, &d, &f).is_err());
    }
}
