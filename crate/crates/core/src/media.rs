//! Per-vertex physical parameters and region-based assignment.

use crate::geometry::Vec3;
use crate::mesh::SimplicialMesh;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum MediaError {
    #[error("sound speed c0 must be positive, got {0}")]
    SoundSpeed(f64),
    #[error("ambient density rho0 must be positive, got {0}")]
    Density(f64),
    #[error("diffusivity delta must be non-negative, got {0}")]
    Diffusivity(f64),
    #[error("nonlinearity beta must be finite, got {0}")]
    Nonlinearity(f64),
    #[error("box minimum exceeds maximum on axis {axis}")]
    InvertedBox { axis: usize },
    #[error("sphere radius must be positive, got {0}")]
    Radius(f64),
    #[error("vertex {index} out of range ({count} vertices)")]
    VertexOutOfRange { index: usize, count: usize },
}

/// Coefficients of the Westervelt equation at a point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MaterialParams {
    /// Small-signal sound speed (m/s).
    pub c0: f64,
    /// Ambient density (kg/m^3).
    pub rho0: f64,
    /// Diffusivity of sound (m^2/s).
    pub delta: f64,
    /// Coefficient of nonlinearity.
    pub beta: f64,
}

impl MaterialParams {
    pub fn new(c0: f64, rho0: f64, delta: f64, beta: f64) -> Result<Self, MediaError> {
        let p = MaterialParams {
            c0,
            rho0,
            delta,
            beta,
        };
        p.validate()?;
        Ok(p)
    }

    /// Lossless linear medium with sound speed `c0` and unit density.
    pub fn linear(c0: f64) -> Self {
        MaterialParams {
            c0,
            rho0: 1.0,
            delta: 0.0,
            beta: 0.0,
        }
    }

    pub fn validate(&self) -> Result<(), MediaError> {
        if !(self.c0 > 0.0 && self.c0.is_finite()) {
            return Err(MediaError::SoundSpeed(self.c0));
        }
        if !(self.rho0 > 0.0 && self.rho0.is_finite()) {
            return Err(MediaError::Density(self.rho0));
        }
        if !(self.delta >= 0.0 && self.delta.is_finite()) {
            return Err(MediaError::Diffusivity(self.delta));
        }
        if !self.beta.is_finite() {
            return Err(MediaError::Nonlinearity(self.beta));
        }
        Ok(())
    }
}

/// Closed geometric region in mesh coordinates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Region {
    Box { min: Vec3, max: Vec3 },
    Sphere { center: Vec3, radius: f64 },
}

impl Region {
    pub fn validate(&self) -> Result<(), MediaError> {
        match *self {
            Region::Box { min, max } => match (0..3).find(|&a| min[a] > max[a]) {
                Some(axis) => Err(MediaError::InvertedBox { axis }),
                None => Ok(()),
            },
            Region::Sphere { radius, .. } if !(radius > 0.0) => Err(MediaError::Radius(radius)),
            Region::Sphere { .. } => Ok(()),
        }
    }

    /// Boundary points count as inside.
    pub fn contains(&self, p: Vec3) -> bool {
        match *self {
            Region::Box { min, max } => (0..3).all(|a| min[a] <= p[a] && p[a] <= max[a]),
            Region::Sphere { center, radius } => (p - center).norm_squared() <= radius * radius,
        }
    }
}

/// Default material plus ordered overrides; later overrides win.
#[derive(Clone, Debug, PartialEq)]
pub struct RegionSpec {
    pub default: MaterialParams,
    pub overrides: Vec<(Region, MaterialParams)>,
}

impl RegionSpec {
    pub fn homogeneous(params: MaterialParams) -> Self {
        RegionSpec {
            default: params,
            overrides: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<(), MediaError> {
        self.default.validate()?;
        for (region, params) in &self.overrides {
            region.validate()?;
            params.validate()?;
        }
        Ok(())
    }
}

/// Material parameters for every mesh vertex.
#[derive(Clone, Debug, PartialEq)]
pub struct MaterialField {
    params: Vec<MaterialParams>,
}

impl MaterialField {
    pub fn uniform(n_vertices: usize, params: MaterialParams) -> Self {
        MaterialField {
            params: vec![params; n_vertices],
        }
    }

    pub fn from_params(params: Vec<MaterialParams>) -> Result<Self, MediaError> {
        params.iter().try_for_each(MaterialParams::validate)?;
        Ok(MaterialField { params })
    }

    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    pub fn as_slice(&self) -> &[MaterialParams] {
        &self.params
    }

    #[inline]
    pub fn get(&self, v: usize) -> &MaterialParams {
        &self.params[v]
    }

    pub fn max_c0(&self) -> f64 {
        self.params.iter().map(|p| p.c0).fold(0.0, f64::max)
    }
}

/// Gives each vertex the parameters of the last override containing it,
/// otherwise the default.
pub fn assign_regions(mesh: &SimplicialMesh, spec: &RegionSpec) -> MaterialField {
    let params = mesh
        .vertices()
        .iter()
        .map(|&p| {
            spec.overrides
                .iter()
                .rev()
                .find(|(region, _)| region.contains(p))
                .map_or(spec.default, |&(_, params)| params)
        })
        .collect();
    MaterialField { params }
}

pub fn material_at(field: &MaterialField, v: usize) -> Result<MaterialParams, MediaError> {
    field
        .params
        .get(v)
        .copied()
        .ok_or(MediaError::VertexOutOfRange {
            index: v,
            count: field.len(),
        })
}
