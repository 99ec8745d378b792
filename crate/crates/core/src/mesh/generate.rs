//! Procedural meshes for tests, benchmarks and the shipped example configs.

use std::collections::HashMap;

use super::SimplicialMesh;
use crate::geometry::Vec3;

/// `nx` by `ny` cells over `[0, lx] x [0, ly]` at `z = 0`, each cell split
/// along its `(i, j) - (i+1, j+1)` diagonal. Vertex `(i, j)` has index
/// `j * (nx + 1) + i`.
pub fn rect_grid(nx: usize, ny: usize, lx: f64, ly: f64) -> SimplicialMesh {
    assert!(nx > 0 && ny > 0);
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            vertices.push(Vec3::new(
                lx * i as f64 / nx as f64,
                ly * j as f64 / ny as f64,
                0.0,
            ));
        }
    }
    let idx = |i: usize, j: usize| j * (nx + 1) + i;
    let mut triangles = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let (a, b, c, d) = (idx(i, j), idx(i + 1, j), idx(i, j + 1), idx(i + 1, j + 1));
            triangles.push([a, b, d]);
            triangles.push([a, d, c]);
        }
    }
    SimplicialMesh::new(vertices, triangles).expect("grid is a valid mesh")
}

/// Unit-spaced `n x n` grid scaled to side `size`.
pub fn square_grid(n: usize, size: f64) -> SimplicialMesh {
    rect_grid(n, n, size, size)
}

/// A square grid whose interior vertices are jittered in-plane by up to
/// `amplitude` grid spacings. Deterministic in `seed`. Not well-centered.
pub fn perturbed_grid(n: usize, size: f64, amplitude: f64, seed: u64) -> SimplicialMesh {
    jitter(&square_grid(n, size), amplitude * size / n as f64, seed)
}

/// Equilateral triangles of side `s`, `nx` wide and `ny` rows tall, with
/// interior vertices jittered by up to `amplitude * s`.
pub fn triangular_lattice(
    nx: usize,
    ny: usize,
    s: f64,
    amplitude: f64,
    seed: u64,
) -> SimplicialMesh {
    assert!(nx > 0 && ny > 0);
    let h = s * 3f64.sqrt() / 2.0;
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        let shift = if j % 2 == 1 { 0.5 } else { 0.0 };
        for i in 0..=nx {
            vertices.push(Vec3::new((i as f64 + shift) * s, j as f64 * h, 0.0));
        }
    }
    let idx = |i: usize, j: usize| j * (nx + 1) + i;
    let mut triangles = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            if j % 2 == 0 {
                triangles.push([idx(i, j), idx(i + 1, j), idx(i, j + 1)]);
                triangles.push([idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1)]);
            } else {
                triangles.push([idx(i, j), idx(i + 1, j + 1), idx(i, j + 1)]);
                triangles.push([idx(i, j), idx(i + 1, j), idx(i + 1, j + 1)]);
            }
        }
    }
    let lattice = SimplicialMesh::new(vertices, triangles).expect("lattice is valid");
    jitter(&lattice, amplitude * s, seed)
}

fn jitter(mesh: &SimplicialMesh, max_offset: f64, seed: u64) -> SimplicialMesh {
    let mut state = seed;
    let mut next = move || {
        // splitmix64
        state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^= z >> 31;
        (z >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
    };
    let vertices = mesh
        .vertices()
        .iter()
        .enumerate()
        .map(|(v, &p)| {
            let (dx, dy) = (next(), next());
            if mesh.is_boundary_vertex(v) || max_offset == 0.0 {
                p
            } else {
                p + Vec3::new(dx, dy, 0.0) * max_offset
            }
        })
        .collect();
    SimplicialMesh::new(vertices, mesh.triangles().to_vec()).expect("jittered mesh is valid")
}

/// Six equilateral triangles of side `s` around vertex 0 at the origin.
pub fn hexagon_fan(s: f64) -> SimplicialMesh {
    let mut vertices = vec![Vec3::ZERO];
    for k in 0..6 {
        let a = std::f64::consts::FRAC_PI_3 * k as f64;
        vertices.push(Vec3::new(s * a.cos(), s * a.sin(), 0.0));
    }
    let triangles = (0..6).map(|k| [0, 1 + k, 1 + (k + 1) % 6]).collect();
    SimplicialMesh::new(vertices, triangles).expect("hexagon fan is valid")
}

/// Geodesic sphere: an icosahedron subdivided `level` times, projected to
/// `radius`. Has `10 * 4^level + 2` vertices.
pub fn icosphere(level: u32, radius: f64) -> SimplicialMesh {
    let (vertices, triangles) = icosphere_raw(level);
    SimplicialMesh::new(
        vertices.into_iter().map(|p| p * radius).collect(),
        triangles,
    )
    .expect("icosphere is valid")
}

/// An icosphere with smooth radial bumps, `r = radius * (1 + amplitude * f)`.
pub fn bumpy_sphere(level: u32, radius: f64, amplitude: f64) -> SimplicialMesh {
    let (vertices, triangles) = icosphere_raw(level);
    let vertices = vertices
        .into_iter()
        .map(|p| {
            let f = (3.0 * p.x()).sin() * (2.0 * p.y()).cos() + 0.5 * (4.0 * p.z()).sin();
            p * (radius * (1.0 + amplitude * f))
        })
        .collect();
    SimplicialMesh::new(vertices, triangles).expect("bumpy sphere is valid")
}

fn icosphere_raw(level: u32) -> (Vec<Vec3>, Vec<[usize; 3]>) {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let mut vertices: Vec<Vec3> = [
        [-1.0, t, 0.0],
        [1.0, t, 0.0],
        [-1.0, -t, 0.0],
        [1.0, -t, 0.0],
        [0.0, -1.0, t],
        [0.0, 1.0, t],
        [0.0, -1.0, -t],
        [0.0, 1.0, -t],
        [t, 0.0, -1.0],
        [t, 0.0, 1.0],
        [-t, 0.0, -1.0],
        [-t, 0.0, 1.0],
    ]
    .iter()
    .map(|&p| {
        let v = Vec3(p);
        v / v.norm()
    })
    .collect();
    let mut triangles: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for _ in 0..level {
        let mut cache: HashMap<(usize, usize), usize> = HashMap::new();
        let mut mid = |a: usize, b: usize, vertices: &mut Vec<Vec3>| {
            *cache.entry((a.min(b), a.max(b))).or_insert_with(|| {
                let m = vertices[a].midpoint(vertices[b]);
                vertices.push(m / m.norm());
                vertices.len() - 1
            })
        };
        let mut next = Vec::with_capacity(4 * triangles.len());
        for &[a, b, c] in &triangles {
            let ab = mid(a, b, &mut vertices);
            let bc = mid(b, c, &mut vertices);
            let ca = mid(c, a, &mut vertices);
            next.extend_from_slice(&[[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        triangles = next;
    }
    (vertices, triangles)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_counts_match_enumeration() {
        for n in 1..6 {
            let m = square_grid(n, 1.0);
            assert_eq!(m.n_vertices(), (n + 1) * (n + 1));
            assert_eq!(m.n_triangles(), 2 * n * n);
            // Brute force: count distinct vertex pairs appearing in triangles.
            let mut pairs = std::collections::BTreeSet::new();
            for t in m.triangles() {
                for k in 0..3 {
                    let (a, b) = (t[k], t[(k + 1) % 3]);
                    pairs.insert((a.min(b), a.max(b)));
                }
            }
            assert_eq!(pairs.len(), m.n_edges());
            assert_eq!(m.n_edges(), n * (n + 1) * 2 + n * n);
            // Euler characteristic of a disk.
            let chi = m.n_vertices() as i64 - m.n_edges() as i64 + m.n_triangles() as i64;
            assert_eq!(chi, 1);
        }
    }

    #[test]
    fn lattice_is_well_centered() {
        let m = triangular_lattice(6, 5, 1.0, 0.1, 2);
        let d = crate::mesh::dual_metrics(&m).unwrap();
        assert!(crate::mesh::quality_report(&m, &d).is_well_centered());
        let sum: f64 = d.dual_area.iter().sum();
        assert!((sum - m.total_area()).abs() < 1e-12 * sum);
    }

    #[test]
    fn icosphere_is_closed_genus_zero() {
        let m = icosphere(4, 1.0);
        assert_eq!(m.n_vertices(), 2562);
        assert!(m.edge_triangles().iter().all(|f| f.len() == 2));
        let chi = m.n_vertices() as i64 - m.n_edges() as i64 + m.n_triangles() as i64;
        assert_eq!(chi, 2);
        assert!(m.boundary_vertices().iter().all(|&b| !b));
    }
}
