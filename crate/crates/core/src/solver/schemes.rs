use rayon::prelude::*;

use super::{
    conjugate_gradient, temporal_split, LinearSolveConfig, Scheme, SolverError, SolverState,
};
use crate::dec::LaplacianOperator;
use crate::media::MaterialField;

/// Vertex loops below this size run serially.
const PAR_VERTICES: usize = 4096;

/// Diagnostics from one step.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct StepReport {
    /// Linear-solver iterations (implicit scheme only).
    pub iterations: usize,
    pub residual: f64,
}

fn fill<F>(out: &mut [f64], f: F) -> Result<(), SolverError>
where
    F: Fn(usize) -> Result<f64, SolverError> + Sync,
{
    if out.len() >= PAR_VERTICES {
        out.par_iter_mut()
            .enumerate()
            .try_for_each(|(v, o)| f(v).map(|x| *o = x))
    } else {
        out.iter_mut()
            .enumerate()
            .try_for_each(|(v, o)| f(v).map(|x| *o = x))
    }
}

fn check_sizes(
    state: &SolverState,
    lap: &LaplacianOperator,
    media: &MaterialField,
) -> Result<(), SolverError> {
    let n = state.n_vertices();
    for got in [lap.n_vertices(), media.len()] {
        if got != n {
            return Err(SolverError::LengthMismatch { expected: n, got });
        }
    }
    Ok(())
}

/// Advances one step with the scheme recorded in `state`.
pub fn step(
    state: &mut SolverState,
    lap: &LaplacianOperator,
    media: &MaterialField,
    cfg: &LinearSolveConfig,
) -> Result<StepReport, SolverError> {
    match state.scheme() {
        Scheme::Explicit => step_explicit(state, lap, media),
        Scheme::Implicit => step_implicit(state, lap, media, cfg),
        Scheme::SemiImplicit => step_semi_implicit(state, lap, media),
    }
}

/// Laplacian at level `n-1` equals `L p^{n-1}`; solved for `p^n` per vertex.
pub fn step_explicit(
    state: &mut SolverState,
    lap: &LaplacianOperator,
    media: &MaterialField,
) -> Result<StepReport, SolverError> {
    check_sizes(state, lap, media)?;
    let dt = state.dt;
    let SolverState {
        history,
        scratch,
        work,
        ..
    } = state;
    lap.matrix.apply_into(&history[0], work);
    let (h, work) = (&*history, &*work);
    fill(scratch, |v| {
        let (coef, known) = temporal_split(h[0][v], h[1][v], h[2][v], h[3][v], dt, media.get(v));
        Ok((work[v] - known) / coef)
    })?;
    state.commit()?;
    Ok(StepReport::default())
}

/// Laplacian at level `n` equals `L p^{n-1}`. Moving the `p^n` part of `L`
/// left gives `(lap - C) p^n = r`; scaled by `-dual_area` this is the SPD
/// system `(K + A C) p^n = -A r` with `K` the stiffness matrix.
pub fn step_implicit(
    state: &mut SolverState,
    lap: &LaplacianOperator,
    media: &MaterialField,
    cfg: &LinearSolveConfig,
) -> Result<StepReport, SolverError> {
    check_sizes(state, lap, media)?;
    cfg.validate()?;
    let n = state.n_vertices();
    let dt = state.dt;
    let mut fixed = vec![false; n];
    for &v in state.boundary_vertices() {
        fixed[v] = true;
    }

    let mut mass = vec![0.0; n];
    let mut rhs = vec![0.0; n];
    {
        let h = &state.history;
        for v in 0..n {
            let (coef, known) =
                temporal_split(h[0][v], h[1][v], h[2][v], h[3][v], dt, media.get(v));
            mass[v] = lap.dual_area[v] * coef;
            rhs[v] = if fixed[v] {
                0.0
            } else {
                -lap.dual_area[v] * known
            };
        }
    }
    let diag: Vec<f64> = (0..n)
        .map(|v| {
            if fixed[v] {
                1.0
            } else {
                lap.weight_sum(v) + mass[v]
            }
        })
        .collect();

    let apply = |x: &[f64], y: &mut [f64]| {
        let masked: Vec<f64>;
        let x_in = if fixed.iter().any(|&f| f) {
            masked = x
                .iter()
                .zip(&fixed)
                .map(|(&xi, &f)| if f { 0.0 } else { xi })
                .collect();
            &masked[..]
        } else {
            x
        };
        lap.stiffness.apply_into(x_in, y);
        for v in 0..y.len() {
            y[v] = if fixed[v] {
                x[v]
            } else {
                y[v] + mass[v] * x_in[v]
            };
        }
    };

    let SolverState {
        history, scratch, ..
    } = state;
    for v in 0..n {
        scratch[v] = if fixed[v] {
            0.0
        } else {
            2.0 * history[0][v] - history[1][v]
        };
    }
    let stats = conjugate_gradient(apply, &diag, &rhs, scratch, cfg)?;
    state.commit()?;
    Ok(StepReport {
        iterations: stats.iterations,
        residual: stats.residual,
    })
}

/// Neighbours at level `n-1`, centre at level `n`: each vertex update is the
/// scalar equation
/// `(sum_w W_vw p^{n-1}_w - W_v p^n_v) = coef p^n_v + known`.
pub fn step_semi_implicit(
    state: &mut SolverState,
    lap: &LaplacianOperator,
    media: &MaterialField,
) -> Result<StepReport, SolverError> {
    check_sizes(state, lap, media)?;
    let dt = state.dt;
    let SolverState {
        history, scratch, ..
    } = state;
    let h = &*history;
    fill(scratch, |v| {
        let (coef, known) = temporal_split(h[0][v], h[1][v], h[2][v], h[3][v], dt, media.get(v));
        let (cols, vals) = lap.matrix.row(v);
        let mut neighbours = 0.0;
        let mut centre = 0.0;
        for (&w, &m) in cols.iter().zip(vals) {
            if w == v {
                centre = m;
            } else {
                neighbours += m * h[0][w];
            }
        }
        let denom = coef - centre;
        if !(denom > 0.0 && denom.is_finite()) {
            return Err(SolverError::ZeroCoefficient { vertex: v });
        }
        Ok((neighbours - known) / denom)
    })?;
    state.commit()?;
    Ok(StepReport::default())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dec::assemble_laplacian;
    use crate::geometry::Vec3;
    use crate::media::MaterialParams;
    use crate::mesh::{dual_metrics, generate, SimplicialMesh};
    use crate::solver::{init_state, stable_dt, BoundaryPolicy};

    struct Setup {
        mesh: SimplicialMesh,
        lap: LaplacianOperator,
        media: MaterialField,
        bound: f64,
    }

    fn setup(mesh: SimplicialMesh, params: MaterialParams) -> Setup {
        let metrics = dual_metrics(&mesh).unwrap();
        let lap = assemble_laplacian(&mesh, &metrics).unwrap();
        let media = MaterialField::uniform(mesh.n_vertices(), params);
        let bound = stable_dt(&mesh, &metrics, &media).unwrap();
        Setup {
            mesh,
            lap,
            media,
            bound,
        }
    }

    fn run(s: &Setup, scheme: Scheme, dt: f64, levels: [Vec<f64>; 4]) -> Vec<f64> {
        let mut st = init_state(&s.mesh, dt, scheme, BoundaryPolicy::Natural).unwrap();
        st.set_history(levels).unwrap();
        step(&mut st, &s.lap, &s.media, &Default::default()).unwrap();
        st.current().to_vec()
    }

    #[test]
    fn quiescent_for_all_schemes() {
        let s = setup(
            generate::square_grid(6, 1.0),
            MaterialParams::new(1.5, 10000.0, 0.01, 1.0).unwrap(),
        );
        for scheme in [Scheme::Explicit, Scheme::Implicit, Scheme::SemiImplicit] {
            for boundary in [BoundaryPolicy::Natural, BoundaryPolicy::DirichletZero] {
                let mut st = init_state(&s.mesh, 0.5 * s.bound, scheme, boundary).unwrap();
                for _ in 0..20 {
                    step(&mut st, &s.lap, &s.media, &Default::default()).unwrap();
                }
                assert!(st.current().iter().all(|&x| x == 0.0));
                assert_eq!(st.step_index(), 20);
            }
        }
    }

    #[test]
    fn explicit_impulse_hand_expansion() {
        let s = setup(
            generate::triangular_lattice(4, 4, 1.0, 0.1, 5),
            MaterialParams::linear(2.0),
        );
        let metrics = dual_metrics(&s.mesh).unwrap();
        let v = (0..s.mesh.n_vertices())
            .find(|&v| !s.mesh.is_boundary_vertex(v))
            .unwrap();
        let dt = 0.3 * s.bound;
        let mut p1 = vec![0.0; s.mesh.n_vertices()];
        p1[v] = 1.0;
        let zero = vec![0.0; p1.len()];
        let out = run(
            &s,
            Scheme::Explicit,
            dt,
            [p1, zero.clone(), zero.clone(), zero],
        );

        let cdt2 = (2.0 * dt) * (2.0 * dt);
        let wsum: f64 = s
            .mesh
            .vertex_edges(v)
            .iter()
            .map(|&e| metrics.edge_weight(e))
            .sum();
        let expect_v = 2.0 - cdt2 * wsum / metrics.dual_area[v];
        assert!((out[v] - expect_v).abs() < 1e-13);
        for &e in s.mesh.vertex_edges(v) {
            let w = s.mesh.other_vertex(e, v);
            let expect = cdt2 * metrics.edge_weight(e) / metrics.dual_area[w];
            assert!((out[w] - expect).abs() < 1e-13);
        }
    }

    #[test]
    fn implicit_matches_dense_solve_on_single_triangle() {
        let mesh = SimplicialMesh::new(
            vec![
                Vec3::new(0.0, 0.0, 0.0),
                Vec3::new(1.0, 0.1, 0.0),
                Vec3::new(0.3, 0.9, 0.0),
            ],
            vec![[0, 1, 2]],
        )
        .unwrap();
        let s = setup(mesh, MaterialParams::linear(1.3));
        let dt = 0.7;
        let p1 = vec![0.3, -0.8, 0.45];
        let p2 = vec![0.1, 0.2, -0.6];
        let out = run(
            &s,
            Scheme::Implicit,
            dt,
            [p1.clone(), p2.clone(), vec![0.0; 3], vec![0.0; 3]],
        );

        // Oracle: (lap - C) x = -(2 p1 - p2) C, Gaussian elimination with pivoting.
        let c = 1.0 / (1.3 * dt * 1.3 * dt);
        let dense = s.lap.matrix.to_dense();
        let mut a: Vec<Vec<f64>> = (0..3)
            .map(|i| {
                let mut row = dense[i].clone();
                row[i] -= c;
                row.push(-(2.0 * p1[i] - p2[i]) * c);
                row
            })
            .collect();
        for col in 0..3 {
            let piv = (col..3)
                .max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))
                .unwrap();
            a.swap(col, piv);
            for r in 0..3 {
                if r != col {
                    let f = a[r][col] / a[col][col];
                    for k in col..4 {
                        a[r][k] -= f * a[col][k];
                    }
                }
            }
        }
        for i in 0..3 {
            let x = a[i][3] / a[i][i];
            assert!(
                (out[i] - x).abs() < 1e-9 * x.abs().max(1.0),
                "{i}: {} vs {x}",
                out[i]
            );
        }
    }

    #[test]
    fn semi_implicit_scalar_equation() {
        let mesh = SimplicialMesh::new(
            vec![
                Vec3::new(0.0, 0.0, 0.0),
                Vec3::new(1.0, 0.0, 0.0),
                Vec3::new(0.4, 0.8, 0.0),
            ],
            vec![[0, 1, 2]],
        )
        .unwrap();
        let s = setup(mesh, MaterialParams::linear(1.0));
        let metrics = dual_metrics(&s.mesh).unwrap();
        let dt = 0.25;
        let zero = vec![0.0; 3];
        let out = run(
            &s,
            Scheme::SemiImplicit,
            dt,
            [vec![1.0, 0.0, 0.0], zero.clone(), zero.clone(), zero],
        );
        // Vertex 0: sum_w W (0 - x) / P = (x - 2) / dt^2
        //   =>  x = 2 / (1 + dt^2 sum_w W / P).
        let wsum: f64 = s
            .mesh
            .vertex_edges(0)
            .iter()
            .map(|&e| metrics.edge_weight(e))
            .sum();
        let x = 2.0 / (1.0 + dt * dt * wsum / metrics.dual_area[0]);
        assert!((out[0] - x).abs() < 1e-14);
        // Other vertices: W_0w (1 - y) / P_w - W_rest y / P_w = y / dt^2 with p^{n-2} = 0.
        for w in 1..3 {
            let e0 = s.mesh.find_edge(0, w).unwrap();
            let ws: f64 = s
                .mesh
                .vertex_edges(w)
                .iter()
                .map(|&e| metrics.edge_weight(e))
                .sum();
            let pw = metrics.dual_area[w];
            let y = (metrics.edge_weight(e0) / pw) / (1.0 / (dt * dt) + ws / pw);
            assert!((out[w] - y).abs() < 1e-14);
        }
    }

    #[test]
    fn history_rotates() {
        let s = setup(generate::square_grid(3, 1.0), MaterialParams::linear(1.0));
        let n = s.mesh.n_vertices();
        let mut st = init_state(&s.mesh, 0.1, Scheme::Explicit, BoundaryPolicy::Natural).unwrap();
        let tags: [Vec<f64>; 4] = std::array::from_fn(|k| vec![(k + 1) as f64; n]);
        st.set_history(tags).unwrap();
        step(&mut st, &s.lap, &s.media, &Default::default()).unwrap();
        assert_eq!(st.level(2), &vec![1.0; n][..]);
        assert_eq!(st.level(3), &vec![2.0; n][..]);
        assert_eq!(st.level(4), &vec![3.0; n][..]);
        // Constant history 1, 2: p^n = 2*1 - 2 = 0 everywhere.
        assert!(st.current().iter().all(|x| x.abs() < 1e-12));
    }

    #[test]
    fn dirichlet_clamps_boundary() {
        let s = setup(generate::square_grid(5, 1.0), MaterialParams::linear(1.0));
        let n = s.mesh.n_vertices();
        for scheme in [Scheme::Explicit, Scheme::Implicit, Scheme::SemiImplicit] {
            let mut st = init_state(
                &s.mesh,
                0.5 * s.bound,
                scheme,
                BoundaryPolicy::DirichletZero,
            )
            .unwrap();
            st.set_history(std::array::from_fn(|k| vec![1.0 + k as f64; n]))
                .unwrap();
            step(&mut st, &s.lap, &s.media, &Default::default()).unwrap();
            for v in 0..n {
                if s.mesh.is_boundary_vertex(v) {
                    assert_eq!(st.current()[v], 0.0);
                }
            }
        }
    }

    #[test]
    fn divergence_is_reported() {
        let s = setup(generate::square_grid(4, 1.0), MaterialParams::linear(1.0));
        let n = s.mesh.n_vertices();
        let mut st = init_state(&s.mesh, 0.1, Scheme::Explicit, BoundaryPolicy::Natural).unwrap();
        let mut levels: [Vec<f64>; 4] = std::array::from_fn(|_| vec![0.0; n]);
        levels[0][3] = f64::NAN;
        st.set_history(levels).unwrap();
        let err = step(&mut st, &s.lap, &s.media, &Default::default()).unwrap_err();
        assert!(matches!(err, SolverError::Divergence { step: 1, .. }));
        assert_eq!(st.step_index(), 0);

        let mut st = init_state(&s.mesh, 0.1, Scheme::Explicit, BoundaryPolicy::Natural).unwrap();
        st.set_divergence_limit(0.5);
        st.current_mut()[3] = 1.0;
        assert!(step(&mut st, &s.lap, &s.media, &Default::default()).is_err());
    }

    #[test]
    fn implicit_iteration_budget() {
        let s = setup(generate::square_grid(8, 1.0), MaterialParams::linear(1.0));
        let mut st = init_state(
            &s.mesh,
            4.0 * s.bound,
            Scheme::Implicit,
            BoundaryPolicy::Natural,
        )
        .unwrap();
        st.current_mut()[40] = 1.0;
        let cfg = LinearSolveConfig {
            tolerance: 1e-12,
            max_iterations: Some(2),
        };
        let err = step(&mut st, &s.lap, &s.media, &cfg).unwrap_err();
        assert!(matches!(
            err,
            SolverError::NotConverged { iterations: 2, .. }
        ));
    }
}
