//! Shared fixtures for the criterion benchmarks.

use westervelt_core::prelude::*;

/// Linear medium on a diagonal-split square grid of `n x n` cells.
pub fn grid_problem(n: usize) -> (Discretization, MaterialField) {
    let sim = Discretization::new(generate::square_grid(n, 1.0)).expect("grid discretizes");
    let media = MaterialField::uniform(sim.mesh.n_vertices(), MaterialParams::linear(1.0));
    (sim, media)
}

/// Westervelt medium on an icosphere.
pub fn sphere_problem(level: u32) -> (Discretization, MaterialField) {
    let sim = Discretization::new(generate::icosphere(level, 1.0)).expect("sphere discretizes");
    let params = MaterialParams::new(340.0, 10000.0, 0.01, 1.0).expect("valid medium");
    let media = MaterialField::uniform(sim.mesh.n_vertices(), params);
    (sim, media)
}

/// A state with a smooth bump in its history so steps do real work.
pub fn warm_state(
    sim: &Discretization,
    media: &MaterialField,
    scheme: Scheme,
    dt_factor: f64,
) -> SolverState {
    let dt = dt_factor * stable_dt(&sim.mesh, &sim.metrics, media).expect("bound exists");
    let mut state = init_state(&sim.mesh, dt, scheme, BoundaryPolicy::Natural).expect("valid dt");
    let centre = sim.mesh.vertices()[0];
    for (v, p) in sim.mesh.vertices().iter().enumerate() {
        state.current_mut()[v] = (-(*p - centre).norm_squared() * 20.0).exp();
    }
    state
}
