//! Discrete exterior calculus operators on 0- and 1-forms.
//!
//! The Laplacian on vertex functions is assembled as
//! `-(*0)^-1 d0^T *1 d0`, which at vertex `v` evaluates
//! `sum_w (dual_len / primal_len) (p_w - p_v) / dual_area[v]`.

mod sparse;

pub use sparse::SparseOperator;

use crate::mesh::{DualMetrics, SimplicialMesh};

#[derive(Debug, thiserror::Error)]
pub enum DecError {
    #[error("entry ({row}, {col}) outside a {rows}x{cols} operator")]
    IndexOutOfRange {
        row: usize,
        col: usize,
        rows: usize,
        cols: usize,
    },

    #[error("duplicate entry at ({row}, {col})")]
    DuplicateEntry { row: usize, col: usize },

    #[error("cannot compose {left:?} with {right:?}")]
    DimensionMismatch {
        left: (usize, usize),
        right: (usize, usize),
    },

    #[error("vertex {vertex} has nonpositive dual area {area:e}")]
    NonPositiveDualArea { vertex: usize, area: f64 },

    #[error("edge {edge} has zero primal length")]
    ZeroPrimalLength { edge: usize },
}

/// Coboundary on 0-forms: row `e = (i, j)`, `i < j`, has -1 at `i` and +1 at `j`.
pub fn incidence_d0(mesh: &SimplicialMesh) -> SparseOperator {
    let entries = mesh
        .edges()
        .iter()
        .enumerate()
        .flat_map(|(e, &[i, j])| [(e, i, -1.0), (e, j, 1.0)])
        .collect();
    SparseOperator::from_triplets(mesh.n_edges(), mesh.n_vertices(), entries)
        .expect("edges have distinct endpoints")
}

/// Diagonal Hodge star on 0-forms: the dual cell area of each vertex.
pub fn hodge_star0(metrics: &DualMetrics) -> Result<SparseOperator, DecError> {
    if let Some((vertex, &area)) = metrics
        .dual_area
        .iter()
        .enumerate()
        .find(|(_, &a)| !(a > 0.0))
    {
        return Err(DecError::NonPositiveDualArea { vertex, area });
    }
    Ok(SparseOperator::diagonal(&metrics.dual_area))
}

/// Diagonal Hodge star on 1-forms: dual over primal edge length. Zero
/// weights stay on the diagonal.
pub fn hodge_star1(metrics: &DualMetrics) -> Result<SparseOperator, DecError> {
    if let Some(edge) = metrics.primal_edge_length.iter().position(|&l| !(l > 0.0)) {
        return Err(DecError::ZeroPrimalLength { edge });
    }
    let w: Vec<f64> = (0..metrics.n_edges())
        .map(|e| metrics.edge_weight(e))
        .collect();
    Ok(SparseOperator::diagonal(&w))
}

/// The discrete Laplace-Beltrami operator on vertex functions.
#[derive(Clone, Debug)]
pub struct LaplacianOperator {
    /// Approximates the Laplacian: `(matrix * p)[v]` is the stencil at `v`.
    pub matrix: SparseOperator,
    /// `d0^T *1 d0`, i.e. `-(*0) matrix`. Symmetric.
    pub stiffness: SparseOperator,
    pub dual_area: Vec<f64>,
    /// Whether every row sums to zero within tolerance.
    pub row_sum_zero: bool,
}

impl LaplacianOperator {
    pub fn n_vertices(&self) -> usize {
        self.dual_area.len()
    }

    pub fn apply(&self, p: &[f64]) -> Vec<f64> {
        self.matrix.apply(p)
    }

    /// Sum of incident edge weights at `v`, the stiffness diagonal.
    pub fn weight_sum(&self, v: usize) -> f64 {
        self.stiffness.get(v, v)
    }
}

/// Assembles `-(*0)^-1 d0^T *1 d0` by sparse composition. Exact zeros
/// (edges with no dual length) are dropped from the pattern, and diagonals
/// are set to minus their row's off-diagonal sum.
pub fn assemble_laplacian(
    mesh: &SimplicialMesh,
    metrics: &DualMetrics,
) -> Result<LaplacianOperator, DecError> {
    let d0 = incidence_d0(mesh);
    let star0 = hodge_star0(metrics)?;
    let star1 = hodge_star1(metrics)?;
    let inv_area: Vec<f64> = metrics.dual_area.iter().map(|a| 1.0 / a).collect();
    debug_assert_eq!(star0.nnz(), inv_area.len());

    let stiffness = d0
        .transpose()
        .compose(&star1.compose(&d0)?)?
        .drop_zeros()
        .balance_diagonal();
    let matrix = SparseOperator::diagonal(&inv_area)
        .compose(&stiffness)?
        .scale(-1.0)
        .balance_diagonal();

    let row_sum_zero = (0..matrix.rows()).all(|r| {
        let (_, vals) = matrix.row(r);
        let sum: f64 = vals.iter().sum();
        let max = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        sum.abs() <= 1e-10 * max.max(f64::MIN_POSITIVE)
    });

    Ok(LaplacianOperator {
        matrix,
        stiffness,
        dual_area: metrics.dual_area.clone(),
        row_sum_zero,
    })
}

/// Evaluates the Laplacian at one vertex by walking its incident edges,
/// without any matrix.
pub fn laplacian_stencil_reference(
    mesh: &SimplicialMesh,
    metrics: &DualMetrics,
    vertex: usize,
    field: &[f64],
) -> f64 {
    let pv = field[vertex];
    let sum: f64 = mesh
        .vertex_edges(vertex)
        .iter()
        .map(|&e| {
            let w = metrics.dual_edge_length[e] / metrics.primal_edge_length[e];
            w * (field[mesh.other_vertex(e, vertex)] - pv)
        })
        .sum();
    sum / metrics.dual_area[vertex]
}
