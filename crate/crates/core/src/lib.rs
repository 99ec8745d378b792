//! Finite-amplitude acoustic wave simulation on triangulated surfaces.
//!
//! The crate discretizes the Westervelt equation with discrete exterior
//! calculus: pressure lives on mesh vertices, the Laplacian comes from the
//! circumcentric dual, and time is advanced with explicit, implicit or
//! semi-implicit schemes.
//!
//! ```
//! use westervelt_core::prelude::*;
//!
//! let mesh = generate::square_grid(16, 1.0);
//! let sim = Discretization::new(mesh).unwrap();
//! let media = MaterialField::uniform(sim.mesh.n_vertices(), MaterialParams::linear(1.0));
//! let dt = 0.9 * stable_dt(&sim.mesh, &sim.metrics, &media).unwrap();
//! let mut state = init_state(&sim.mesh, dt, Scheme::Explicit, BoundaryPolicy::Natural).unwrap();
//! let src = SourceSpec::unit(sim.mesh.nearest_vertex(Vec3::new(0.5, 0.5, 0.0)));
//! for _ in 0..10 {
//!     let t = state.time();
//!     inject_source(&mut state, &src, t);
//!     step(&mut state, &sim.laplacian, &media, &LinearSolveConfig::default()).unwrap();
//! }
//! assert!(state.max_abs() > 0.0);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod dec;
pub mod geometry;
pub mod media;
pub mod mesh;
pub mod solver;

use dec::{assemble_laplacian, DecError, LaplacianOperator};
use mesh::{DualMetrics, MeshError, SimplicialMesh};

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Dec(#[from] DecError),
    #[error(transparent)]
    Media(#[from] media::MediaError),
    #[error(transparent)]
    Solver(#[from] solver::SolverError),
}

/// A mesh together with its dual metrics and assembled Laplacian.
#[derive(Clone, Debug)]
pub struct Discretization {
    pub mesh: SimplicialMesh,
    pub metrics: DualMetrics,
    pub laplacian: LaplacianOperator,
}

impl Discretization {
    pub fn new(mesh: SimplicialMesh) -> Result<Self, Error> {
        let metrics = mesh::dual_metrics(&mesh)?;
        Self::from_parts(mesh, metrics)
    }

    /// Rejects meshes with circumcenters outside their triangles.
    pub fn new_strict(mesh: SimplicialMesh) -> Result<Self, Error> {
        let metrics = mesh::dual_metrics_strict(&mesh)?;
        Self::from_parts(mesh, metrics)
    }

    fn from_parts(mesh: SimplicialMesh, metrics: DualMetrics) -> Result<Self, Error> {
        let laplacian = assemble_laplacian(&mesh, &metrics)?;
        Ok(Discretization {
            mesh,
            metrics,
            laplacian,
        })
    }
}

pub mod prelude {
    pub use crate::dec::{assemble_laplacian, LaplacianOperator, SparseOperator};
    pub use crate::geometry::Vec3;
    pub use crate::media::{assign_regions, MaterialField, MaterialParams, Region, RegionSpec};
    pub use crate::mesh::{dual_metrics, generate, load_mesh, DualMetrics, SimplicialMesh};
    pub use crate::solver::{
        init_state, inject_source, source_signal, stable_dt, step, BoundaryPolicy,
        LinearSolveConfig, Scheme, SolverState, SourceMode, SourceSpec,
    };
    pub use crate::{Discretization, Error};
}
