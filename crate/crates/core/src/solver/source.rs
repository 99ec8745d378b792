use super::{SolverError, SolverState};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SourceMode {
    /// Adds the signal to the current field.
    Additive,
    /// Overwrites the current field with the signal.
    Hard,
}

impl std::str::FromStr for SourceMode {
    type Err = SolverError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "additive" => Ok(SourceMode::Additive),
            "hard" => Ok(SourceMode::Hard),
            _ => Err(SolverError::InvalidSource(format!("unknown mode `{s}`"))),
        }
    }
}

impl SourceMode {
    pub fn name(self) -> &'static str {
        match self {
            SourceMode::Additive => "additive",
            SourceMode::Hard => "hard",
        }
    }
}

/// A Gaussian-windowed cosine injected at a set of vertices.
#[derive(Clone, Debug, PartialEq)]
pub struct SourceSpec {
    pub vertices: Vec<usize>,
    /// Amplitude `A` (Pa s); the peak value is `A / (sigma sqrt(2 pi))`.
    pub amplitude: f64,
    /// Envelope centre (s).
    pub t0: f64,
    /// Envelope width (s).
    pub sigma: f64,
    /// Carrier angular frequency (rad/s).
    pub omega: f64,
    pub mode: SourceMode,
    /// The signal is zero before this time, when set.
    pub onset: Option<f64>,
}

impl SourceSpec {
    /// `exp(-t^2/2) cos(t) / sqrt(2 pi)` at one vertex.
    pub fn unit(vertex: usize) -> Self {
        SourceSpec {
            vertices: vec![vertex],
            amplitude: 1.0,
            t0: 0.0,
            sigma: 1.0,
            omega: 1.0,
            mode: SourceMode::Additive,
            onset: None,
        }
    }

    pub fn validate(&self, n_vertices: usize) -> Result<(), SolverError> {
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(SolverError::InvalidSource(format!(
                "sigma must be positive, got {}",
                self.sigma
            )));
        }
        if self.vertices.is_empty() {
            return Err(SolverError::InvalidSource("no injection vertices".into()));
        }
        if let Some(&v) = self.vertices.iter().find(|&&v| v >= n_vertices) {
            return Err(SolverError::InvalidSource(format!(
                "vertex {v} out of range ({n_vertices} vertices)"
            )));
        }
        if ![self.amplitude, self.t0, self.omega]
            .iter()
            .all(|x| x.is_finite())
        {
            return Err(SolverError::InvalidSource("non-finite parameter".into()));
        }
        Ok(())
    }

    /// Envelope maximum `A / (sigma sqrt(2 pi))`.
    pub fn peak(&self) -> f64 {
        self.amplitude.abs() / (self.sigma * (2.0 * std::f64::consts::PI).sqrt())
    }
}

/// `A / (sigma sqrt(2 pi)) exp(-(t - t0)^2 / (2 sigma^2)) cos(omega (t - t0))`.
pub fn source_signal(t: f64, spec: &SourceSpec) -> f64 {
    if spec.onset.is_some_and(|on| t < on) {
        return 0.0;
    }
    let s = (t - spec.t0) / spec.sigma;
    let norm = spec.amplitude / (spec.sigma * (2.0 * std::f64::consts::PI).sqrt());
    norm * (-0.5 * s * s).exp() * (spec.omega * (t - spec.t0)).cos()
}

/// Applies the source at time `t` to the newest stored field.
pub fn inject_source(state: &mut SolverState, spec: &SourceSpec, t: f64) {
    let value = source_signal(t, spec);
    let field = state.current_mut();
    match spec.mode {
        SourceMode::Additive => {
            for &v in &spec.vertices {
                field[v] += value;
            }
        }
        SourceMode::Hard => {
            for &v in &spec.vertices {
                field[v] = value;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::generate;
    use crate::solver::{init_state, BoundaryPolicy, Scheme};
    use std::f64::consts::PI;

    #[test]
    fn signal_values() {
        let s = SourceSpec::unit(0);
        assert!((source_signal(0.0, &s) - 1.0 / (2.0 * PI).sqrt()).abs() < 1e-15);
        assert!((source_signal(0.0, &s) - 0.39894).abs() < 1e-5);
        assert!(source_signal(PI / 2.0, &s).abs() < 1e-16);
        assert!(source_signal(60.0, &s).abs() < 1e-300);
        assert!(source_signal(-60.0, &s).abs() < 1e-300);

        let shifted = SourceSpec {
            t0: 2.0,
            sigma: 0.5,
            amplitude: 3.0,
            ..s.clone()
        };
        let peak = 3.0 / (0.5 * (2.0 * PI).sqrt());
        assert!((source_signal(2.0, &shifted) - peak).abs() < 1e-14);
        assert_eq!(shifted.peak(), source_signal(2.0, &shifted));

        let gated = SourceSpec {
            onset: Some(1.0),
            ..s
        };
        assert_eq!(source_signal(0.5, &gated), 0.0);
        assert!(source_signal(1.0, &gated) > 0.0);
    }

    #[test]
    fn validation() {
        let mut s = SourceSpec::unit(3);
        assert!(s.validate(4).is_ok());
        assert!(s.validate(3).is_err());
        s.sigma = 0.0;
        assert!(s.validate(4).is_err());
        s.sigma = 1.0;
        s.vertices.clear();
        assert!(s.validate(4).is_err());
    }

    #[test]
    fn injection_modes() {
        let m = generate::square_grid(2, 1.0);
        let mut st = init_state(&m, 0.1, Scheme::Explicit, BoundaryPolicy::Natural).unwrap();
        let mut spec = SourceSpec::unit(4);

        inject_source(&mut st, &spec, 1e3);
        assert!(st.current().iter().all(|&x| x == 0.0));

        inject_source(&mut st, &spec, 0.3);
        inject_source(&mut st, &spec, 0.3);
        assert_eq!(st.current()[4], 2.0 * source_signal(0.3, &spec));

        spec.mode = SourceMode::Hard;
        spec.t0 = 0.7;
        inject_source(&mut st, &spec, 0.7);
        assert_eq!(st.current()[4], 1.0 / (2.0 * PI).sqrt());
        assert_eq!(st.current().iter().filter(|&&x| x != 0.0).count(), 1);
    }
}
