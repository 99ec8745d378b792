//! Property checks for the mesh, dual metrics and Laplacian assembly.

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use westervelt_core::dec::{laplacian_stencil_reference, DecError};
use westervelt_core::mesh::{load_mesh, quality_report, write_off};
use westervelt_core::prelude::*;

fn test_meshes() -> Vec<(&'static str, SimplicialMesh)> {
    vec![
        ("grid", generate::square_grid(12, 1.0)),
        ("jittered_grid", generate::perturbed_grid(10, 2.0, 0.3, 9)),
        ("lattice", generate::triangular_lattice(9, 8, 0.2, 0.15, 4)),
        ("icosphere", generate::icosphere(3, 1.0)),
        ("bumpy", generate::bumpy_sphere(3, 1.0, 0.15)),
    ]
}

fn arb_mesh() -> impl Strategy<Value = SimplicialMesh> {
    prop_oneof![
        (2usize..10, 0.1..5.0f64, 0.0..0.4f64, any::<u64>())
            .prop_map(|(n, size, amp, seed)| generate::perturbed_grid(n, size, amp, seed)),
        (
            2usize..8,
            2usize..8,
            0.05..2.0f64,
            0.0..0.3f64,
            any::<u64>()
        )
            .prop_map(|(nx, ny, s, amp, seed)| generate::triangular_lattice(nx, ny, s, amp, seed)),
        (0u32..3, 0.1..3.0f64, 0.0..0.2f64).prop_map(|(l, r, a)| generate::bumpy_sphere(l, r, a)),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn dual_areas_partition_surface(mesh in arb_mesh()) {
        let d = dual_metrics(&mesh).unwrap();
        let sum: f64 = d.dual_area.iter().sum();
        let total = mesh.total_area();
        prop_assert!((sum - total).abs() <= 1e-9 * total);
        prop_assert!(d.dual_edge_length.iter().all(|&l| l >= 0.0));
        for (e, &[a, b]) in mesh.edges().iter().enumerate() {
            let direct = mesh.vertices()[a].distance(mesh.vertices()[b]);
            prop_assert_eq!(d.primal_edge_length[e], direct);
        }
    }

    #[test]
    fn circumcenters_are_equidistant(mesh in arb_mesh()) {
        let d = dual_metrics(&mesh).unwrap();
        for (t, c) in d.circumcenters.iter().enumerate() {
            let [a, b, p] = mesh.triangle_points(t);
            let (ra, rb, rc) = (c.distance(a), c.distance(b), c.distance(p));
            prop_assert!((ra - rb).abs() <= 1e-12 * ra);
            prop_assert!((ra - rc).abs() <= 1e-12 * ra);
        }
    }

    #[test]
    fn quality_flags_are_exclusive(mesh in arb_mesh()) {
        let d = dual_metrics(&mesh).unwrap();
        let r = quality_report(&mesh, &d);
        use westervelt_core::mesh::CircumcenterLocation::*;
        prop_assert_eq!(
            r.count(Interior) + r.count(OnBoundary) + r.count(Exterior),
            mesh.n_triangles()
        );
        prop_assert_eq!(r.worst_triangle.is_some(), r.count(Exterior) > 0);
    }

    #[test]
    fn off_round_trip_is_deterministic(mesh in arb_mesh()) {
        let mut buf = Vec::new();
        write_off(&mesh, &mut buf).unwrap();
        let a = load_mesh(&buf[..]).unwrap();
        let b = load_mesh(&buf[..]).unwrap();
        prop_assert_eq!(a.edges(), b.edges());
        prop_assert_eq!(a.edge_triangles(), b.edge_triangles());
        prop_assert_eq!(&a, &mesh);
    }

    #[test]
    fn stiffness_is_symmetric_with_constant_kernel(mesh in arb_mesh()) {
        let d = dual_metrics(&mesh).unwrap();
        // Strongly jittered meshes can have inverted dual cells, which assembly rejects.
        let lap = match assemble_laplacian(&mesh, &d) {
            Ok(lap) => lap,
            Err(DecError::NonPositiveDualArea { .. }) => return Ok(()),
            Err(e) => panic!("{e}"),
        };
        for (r, c, v) in lap.stiffness.entries() {
            let w = lap.stiffness.get(c, r);
            prop_assert!((v - w).abs() <= 1e-12 * v.abs().max(w.abs()));
        }
        let ones = vec![1.0; mesh.n_vertices()];
        for (v, x) in lap.apply(&ones).iter().enumerate() {
            let (_, vals) = lap.matrix.row(v);
            let scale = vals.iter().fold(0.0f64, |m, y| m.max(y.abs()));
            prop_assert!(x.abs() <= 1e-10 * scale.max(1.0));
        }
    }
}

fn relative_deviation(assembled: f64, reference: f64, scale: f64) -> f64 {
    (assembled - reference).abs() / scale.max(f64::MIN_POSITIVE)
}

#[test]
fn assembled_matches_stencil_on_random_fields() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for (name, mesh) in test_meshes() {
        let d = dual_metrics(&mesh).unwrap();
        let lap = assemble_laplacian(&mesh, &d).unwrap();
        let mut worst = 0.0f64;
        for _ in 0..100 {
            let field: Vec<f64> = (0..mesh.n_vertices())
                .map(|_| rng.gen_range(-1.0..1.0))
                .collect();
            let applied = lap.apply(&field);
            for v in 0..mesh.n_vertices() {
                let reference = laplacian_stencil_reference(&mesh, &d, v, &field);
                // Scale by the magnitude of the terms being summed.
                let scale: f64 = mesh
                    .vertex_edges(v)
                    .iter()
                    .map(|&e| {
                        d.edge_weight(e) * (field[mesh.other_vertex(e, v)].abs() + field[v].abs())
                    })
                    .sum::<f64>()
                    / d.dual_area[v];
                worst = worst.max(relative_deviation(applied[v], reference, scale));
            }
        }
        assert!(worst <= 1e-12, "{name}: worst relative deviation {worst:e}");
    }
}

#[test]
fn square_grid_rows_are_five_point() {
    let n = 16;
    let ds = 1.0 / n as f64;
    let mesh = generate::square_grid(n, 1.0);
    let lap = assemble_laplacian(&mesh, &dual_metrics(&mesh).unwrap()).unwrap();
    for v in 0..mesh.n_vertices() {
        if mesh.is_boundary_vertex(v) {
            continue;
        }
        let (cols, vals) = lap.matrix.row(v);
        let off: Vec<(usize, f64)> = cols
            .iter()
            .zip(vals)
            .filter(|(&c, _)| c != v)
            .map(|(&c, &x)| (c, x))
            .collect();
        assert_eq!(off.len(), 4);
        let mut neighbours: Vec<usize> = off.iter().map(|o| o.0).collect();
        neighbours.sort_unstable();
        assert_eq!(neighbours, vec![v - n - 1, v - 1, v + 1, v + n + 1]);
        for (_, x) in off {
            assert!((x - 1.0 / (ds * ds)).abs() <= 1e-12 / (ds * ds));
        }
    }
}
