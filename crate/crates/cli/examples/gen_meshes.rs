//! Regenerates the OFF meshes used by the bundled configs.
//!
//! cargo run -p westervelt-cli --example gen_meshes -- configs/meshes

use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;

use westervelt_core::mesh::write_off;
use westervelt_core::prelude::*;

fn main() -> std::io::Result<()> {
    let dir = PathBuf::from(
        std::env::args()
            .nth(1)
            .unwrap_or_else(|| "configs/meshes".into()),
    );
    std::fs::create_dir_all(&dir)?;
    let meshes = [
        ("square_32.off", generate::square_grid(32, 0.32)),
        ("icosphere_4.off", generate::icosphere(4, 1.0)),
        ("bumpy_sphere_4.off", generate::bumpy_sphere(4, 1.0, 0.12)),
    ];
    for (name, mesh) in meshes {
        let path = dir.join(name);
        write_off(&mesh, BufWriter::new(File::create(&path)?))?;
        println!(
            "{}: {} vertices, {} triangles",
            path.display(),
            mesh.n_vertices(),
            mesh.n_triangles()
        );
    }
    Ok(())
}
