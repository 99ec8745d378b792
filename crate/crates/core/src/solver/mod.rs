//! Time stepping for the Westervelt equation
//!
//! ```text
//! lap p - p_tt / c0^2 + delta / c0^4 p_ttt + beta / (rho0 c0^4) (p^2)_tt = 0
//! ```
//!
//! with the DEC Laplacian in space and backward differences in time. Three
//! schemes share the temporal operator `L` (see [`nonlinear_rhs_l`]) and
//! differ in which time level the Laplacian is evaluated at:
//!
//! * explicit: all neighbours and the centre at `n-1`;
//! * implicit: everything at `n`, one sparse SPD solve per step;
//! * semi-implicit: neighbours at `n-1`, centre at `n`, a scalar solve per vertex.

mod cg;
mod schemes;
mod source;
mod stability;

pub use cg::{conjugate_gradient, CgStats};
pub use schemes::{step, step_explicit, step_implicit, step_semi_implicit, StepReport};
pub use source::{inject_source, source_signal, SourceMode, SourceSpec};
pub use stability::stable_dt;

use crate::media::MaterialField;
use crate::mesh::SimplicialMesh;

#[derive(Debug, thiserror::Error)]
pub enum SolverError {
    #[error("solution diverged at step {step}: max |p| = {max_abs:e}")]
    Divergence { step: u64, max_abs: f64 },

    #[error(
        "linear solve did not converge in {iterations} iterations (relative residual {residual:e})"
    )]
    NotConverged { iterations: usize, residual: f64 },

    #[error("vertex {vertex} has a non-positive update coefficient")]
    ZeroCoefficient { vertex: usize },

    #[error("no vertex has positive coupling weight; stability bound undefined")]
    NoCoupledVertices,

    #[error("invalid source: {0}")]
    InvalidSource(String),

    #[error("invalid solver setting: {0}")]
    InvalidSetting(String),

    #[error("field length {got} does not match vertex count {expected}")]
    LengthMismatch { expected: usize, got: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scheme {
    Explicit,
    Implicit,
    SemiImplicit,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::Explicit => "explicit",
            Scheme::Implicit => "implicit",
            Scheme::SemiImplicit => "semi_implicit",
        }
    }
}

impl std::str::FromStr for Scheme {
    type Err = SolverError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "explicit" => Ok(Scheme::Explicit),
            "implicit" => Ok(Scheme::Implicit),
            "semi_implicit" | "semi-implicit" => Ok(Scheme::SemiImplicit),
            _ => Err(SolverError::InvalidSetting(format!("unknown scheme `{s}`"))),
        }
    }
}

/// What happens at vertices on the mesh boundary.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundaryPolicy {
    /// Boundary rows keep only the dual contributions that exist.
    Natural,
    /// Boundary vertices are held at zero.
    DirichletZero,
}

impl BoundaryPolicy {
    pub fn name(self) -> &'static str {
        match self {
            BoundaryPolicy::Natural => "natural",
            BoundaryPolicy::DirichletZero => "dirichlet_zero",
        }
    }
}

impl std::str::FromStr for BoundaryPolicy {
    type Err = SolverError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "natural" => Ok(BoundaryPolicy::Natural),
            "dirichlet_zero" | "dirichlet" => Ok(BoundaryPolicy::DirichletZero),
            _ => Err(SolverError::InvalidSetting(format!(
                "unknown boundary policy `{s}`"
            ))),
        }
    }
}

/// Settings for the implicit scheme's linear solve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearSolveConfig {
    /// Relative residual target.
    pub tolerance: f64,
    /// Iteration cap; `None` means ten times the vertex count.
    pub max_iterations: Option<usize>,
}

impl Default for LinearSolveConfig {
    fn default() -> Self {
        LinearSolveConfig {
            tolerance: 1e-10,
            max_iterations: None,
        }
    }
}

impl LinearSolveConfig {
    pub fn validate(&self) -> Result<(), SolverError> {
        if !(self.tolerance > 0.0 && self.tolerance < 1.0) {
            return Err(SolverError::InvalidSetting(format!(
                "linear solve tolerance {} not in (0, 1)",
                self.tolerance
            )));
        }
        if self.max_iterations == Some(0) {
            return Err(SolverError::InvalidSetting(
                "max_iterations must be at least 1".into(),
            ));
        }
        Ok(())
    }

    pub fn iteration_cap(&self, n: usize) -> usize {
        self.max_iterations.unwrap_or(10 * n.max(1))
    }
}

/// Number of stored time levels: `n-1` through `n-4`.
pub const HISTORY_LEVELS: usize = 4;

/// Pressure history and stepping settings.
///
/// With `step_index == k` the newest stored field (level `n-1` from the point
/// of view of the next step) is the pressure at time `k * dt`.
#[derive(Clone, Debug)]
pub struct SolverState {
    step_index: u64,
    /// `history[0]` is level `n-1`, `history[3]` is level `n-4`.
    history: [Vec<f64>; HISTORY_LEVELS],
    dt: f64,
    scheme: Scheme,
    boundary: BoundaryPolicy,
    boundary_vertices: Vec<usize>,
    divergence_limit: f64,
    scratch: Vec<f64>,
    work: Vec<f64>,
}

/// Creates a state at rest: every history level is zero.
pub fn init_state(
    mesh: &SimplicialMesh,
    dt: f64,
    scheme: Scheme,
    boundary: BoundaryPolicy,
) -> Result<SolverState, SolverError> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(SolverError::InvalidSetting(format!(
            "time step {dt} must be positive"
        )));
    }
    let n = mesh.n_vertices();
    let boundary_vertices = match boundary {
        BoundaryPolicy::Natural => Vec::new(),
        BoundaryPolicy::DirichletZero => (0..n).filter(|&v| mesh.is_boundary_vertex(v)).collect(),
    };
    Ok(SolverState {
        step_index: 0,
        history: std::array::from_fn(|_| vec![0.0; n]),
        dt,
        scheme,
        boundary,
        boundary_vertices,
        divergence_limit: f64::INFINITY,
        scratch: vec![0.0; n],
        work: vec![0.0; n],
    })
}

impl SolverState {
    pub fn step_index(&self) -> u64 {
        self.step_index
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Time of the newest stored level.
    pub fn time(&self) -> f64 {
        self.step_index as f64 * self.dt
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn boundary(&self) -> BoundaryPolicy {
        self.boundary
    }

    pub fn n_vertices(&self) -> usize {
        self.history[0].len()
    }

    /// Newest pressure field.
    pub fn current(&self) -> &[f64] {
        &self.history[0]
    }

    pub fn current_mut(&mut self) -> &mut [f64] {
        &mut self.history[0]
    }

    /// Field `lag` levels back: `level(1)` is the newest, `level(4)` the oldest.
    pub fn level(&self, lag: usize) -> &[f64] {
        assert!((1..=HISTORY_LEVELS).contains(&lag), "lag must be in 1..=4");
        &self.history[lag - 1]
    }

    /// Overwrites the history, newest first. Used for prescribed initial data.
    pub fn set_history(&mut self, levels: [Vec<f64>; HISTORY_LEVELS]) -> Result<(), SolverError> {
        let n = self.n_vertices();
        if let Some(bad) = levels.iter().find(|l| l.len() != n) {
            return Err(SolverError::LengthMismatch {
                expected: n,
                got: bad.len(),
            });
        }
        self.history = levels;
        Ok(())
    }

    /// Steps abort once max |p| exceeds this value.
    pub fn set_divergence_limit(&mut self, limit: f64) {
        self.divergence_limit = limit;
    }

    pub fn divergence_limit(&self) -> f64 {
        self.divergence_limit
    }

    pub fn boundary_vertices(&self) -> &[usize] {
        &self.boundary_vertices
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.history[0])
    }

    /// Clamps, checks and commits `scratch` as the new level `n-1`.
    fn commit(&mut self) -> Result<(), SolverError> {
        for &v in &self.boundary_vertices {
            self.scratch[v] = 0.0;
        }
        let peak = self
            .scratch
            .iter()
            .try_fold(0.0f64, |m, &x| x.is_finite().then(|| m.max(x.abs())));
        match peak {
            Some(m) if m <= self.divergence_limit => {}
            other => {
                return Err(SolverError::Divergence {
                    step: self.step_index + 1,
                    max_abs: other.unwrap_or(f64::NAN),
                })
            }
        }
        self.history.rotate_right(1);
        std::mem::swap(&mut self.history[0], &mut self.scratch);
        self.step_index += 1;
        Ok(())
    }
}

pub(crate) fn max_abs(x: &[f64]) -> f64 {
    x.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

/// Splits `L p^{n-1}` at vertex `v` into the coefficient of the unknown
/// `p^n_v` and the part fixed by the stored history.
///
/// ```text
/// L p^{n-1} = (p^n - 2p^{n-1} + p^{n-2}) / (c0 dt)^2
///           - delta / (c0^4 dt^3) (p^{n-1} - 3p^{n-2} + 3p^{n-3} - p^{n-4})
///           - beta / (rho0 c0^4 dt^2) ((p^2)^{n-1} - 2(p^2)^{n-2} + (p^2)^{n-3})
/// ```
pub fn nonlinear_rhs_l(state: &SolverState, media: &MaterialField, v: usize) -> (f64, f64) {
    let h = &state.history;
    temporal_split(h[0][v], h[1][v], h[2][v], h[3][v], state.dt, media.get(v))
}

#[inline]
pub(crate) fn temporal_split(
    p1: f64,
    p2: f64,
    p3: f64,
    p4: f64,
    dt: f64,
    m: &crate::media::MaterialParams,
) -> (f64, f64) {
    let cdt = m.c0 * dt;
    let coef = 1.0 / (cdt * cdt);
    let c4 = m.c0 * m.c0 * m.c0 * m.c0;
    let mut known = -(2.0 * p1 - p2) * coef;
    if m.delta != 0.0 {
        known -= m.delta / (c4 * dt * dt * dt) * (p1 - 3.0 * p2 + 3.0 * p3 - p4);
    }
    if m.beta != 0.0 {
        known -= m.beta / (m.rho0 * c4 * dt * dt) * (p1 * p1 - 2.0 * p2 * p2 + p3 * p3);
    }
    (coef, known)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::media::MaterialParams;
    use crate::mesh::generate;

    fn state_with(levels: [f64; 4], dt: f64) -> SolverState {
        let m = generate::hexagon_fan(1.0);
        let mut s = init_state(&m, dt, Scheme::Explicit, BoundaryPolicy::Natural).unwrap();
        s.set_history(levels.map(|x| vec![x; 7])).unwrap();
        s
    }

    #[test]
    fn l_split_zero_history() {
        let s = state_with([0.0; 4], 0.1);
        let f = MaterialField::uniform(7, MaterialParams::new(2.0, 1.0, 0.3, 2.0).unwrap());
        let (coef, known) = nonlinear_rhs_l(&s, &f, 3);
        assert!((coef - 1.0 / (0.2f64 * 0.2)).abs() < 1e-12);
        assert_eq!(known, 0.0);
    }

    #[test]
    fn l_split_linear_media() {
        let (a, b) = (0.7, -0.2);
        let s = state_with([a, b, 5.0, -3.0], 0.05);
        let f = MaterialField::uniform(7, MaterialParams::linear(3.0));
        let (_, known) = nonlinear_rhs_l(&s, &f, 0);
        let cdt2 = (3.0f64 * 0.05).powi(2);
        assert!((known - (-(2.0 * a - b) / cdt2)).abs() < 1e-12);
    }

    #[test]
    fn l_split_reference_parameters() {
        let s = state_with([1.0; 4], 0.1);
        let f = MaterialField::uniform(7, MaterialParams::new(1.0, 10000.0, 0.01, 1.0).unwrap());
        let (coef, known) = nonlinear_rhs_l(&s, &f, 2);
        assert!((coef - 100.0).abs() < 1e-10);
        assert!((known + 100.0).abs() < 1e-10);
    }

    #[test]
    fn init_state_is_at_rest() {
        let m = generate::square_grid(3, 1.0);
        let s = init_state(&m, 1e-3, Scheme::Implicit, BoundaryPolicy::DirichletZero).unwrap();
        assert_eq!(s.step_index(), 0);
        for lag in 1..=4 {
            assert_eq!(s.level(lag), &vec![0.0; 16][..]);
        }
        assert_eq!(s.boundary_vertices().len(), 12);
        assert!(init_state(&m, 0.0, Scheme::Explicit, BoundaryPolicy::Natural).is_err());
    }

    #[test]
    fn parse_names() {
        assert_eq!(
            "semi_implicit".parse::<Scheme>().unwrap(),
            Scheme::SemiImplicit
        );
        assert!("rk4".parse::<Scheme>().is_err());
        assert_eq!(
            "dirichlet_zero".parse::<BoundaryPolicy>().unwrap(),
            BoundaryPolicy::DirichletZero
        );
    }

    #[test]
    fn linear_solve_config_validation() {
        assert!(LinearSolveConfig::default().validate().is_ok());
        assert!(LinearSolveConfig {
            tolerance: 1.0,
            max_iterations: None
        }
        .validate()
        .is_err());
        assert!(LinearSolveConfig {
            tolerance: 1e-8,
            max_iterations: Some(0)
        }
        .validate()
        .is_err());
        assert_eq!(LinearSolveConfig::default().iteration_cap(7), 70);
    }
}
