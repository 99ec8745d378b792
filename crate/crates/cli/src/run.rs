//! The simulation driver loop.

use std::path::PathBuf;
use std::time::{Duration, Instant};

use westervelt_core::mesh::{quality_report, read_off_file};
use westervelt_core::prelude::*;
use westervelt_core::solver::SolverError;

use crate::config::{Location, SimulationConfig, TimeStep};
use crate::output::{write_probe, write_snapshot, Manifest, OutputError, ProbeRecord};

pub const MANIFEST_NAME: &str = "manifest.txt";
pub const PROBE_NAME: &str = "probes.csv";

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Core(#[from] westervelt_core::Error),
    #[error(transparent)]
    Output(#[from] OutputError),
    #[error("{0}")]
    Setup(String),
}

impl From<SolverError> for RunError {
    fn from(e: SolverError) -> Self {
        RunError::Core(e.into())
    }
}

/// Everything a run needs before the first step.
#[derive(Debug)]
pub struct Prepared {
    pub sim: Discretization,
    pub media: MaterialField,
    pub stable_dt: f64,
    pub dt: f64,
    pub source: Option<SourceSpec>,
    pub probes: Vec<usize>,
}

fn vertices_for(mesh: &SimplicialMesh, loc: &Location) -> Vec<usize> {
    match loc {
        Location::Point(p) => vec![mesh.nearest_vertex(*p)],
        Location::Vertices(v) => v.clone(),
    }
}

/// Loads the mesh and builds metrics, Laplacian, media and time step.
pub fn prepare(config: &SimulationConfig) -> Result<Prepared, RunError> {
    let mesh = read_off_file(&config.mesh)
        .map_err(|e| RunError::Setup(format!("{}: {e}", config.mesh.display())))?;
    let sim = Discretization::new(mesh)?;
    let media = assign_regions(&sim.mesh, &config.media);
    let stable = stable_dt(&sim.mesh, &sim.metrics, &media)?;
    let dt = match config.time_step {
        TimeStep::Fixed(dt) => dt,
        TimeStep::Factor(f) => f * stable,
    };
    if dt > stable && config.scheme == Scheme::Explicit {
        log::warn!("dt = {dt:e} exceeds the explicit stability bound {stable:e}");
    }

    let source = match &config.source {
        None => None,
        Some(s) => {
            let spec = SourceSpec {
                vertices: vertices_for(&sim.mesh, &s.location),
                amplitude: s.amplitude,
                t0: s.t0,
                sigma: s.sigma,
                omega: s.omega,
                mode: s.mode,
                onset: s.onset,
            };
            spec.validate(sim.mesh.n_vertices())?;
            Some(spec)
        }
    };

    let mut probes = Vec::with_capacity(config.probes.len());
    for loc in &config.probes {
        let v = vertices_for(&sim.mesh, loc)[0];
        if v >= sim.mesh.n_vertices() {
            return Err(RunError::Setup(format!(
                "probe vertex {v} out of range ({} vertices)",
                sim.mesh.n_vertices()
            )));
        }
        probes.push(v);
    }

    Ok(Prepared {
        sim,
        media,
        stable_dt: stable,
        dt,
        source,
        probes,
    })
}

#[derive(Clone, Debug)]
pub struct RunSummary {
    pub steps_run: u64,
    pub final_max_abs: f64,
    pub wall_time: Duration,
    pub dt: f64,
    pub stable_dt: f64,
    /// Snapshots and probe file, in emission order.
    pub outputs: Vec<PathBuf>,
    pub manifest: PathBuf,
}

fn join<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(T::to_string).collect::<Vec<_>>().join(" ")
}

fn describe_region(r: &Region, p: &MaterialParams) -> String {
    let shape = match r {
        Region::Box { min, max } => format!("box {} {}", join(&min.0), join(&max.0)),
        Region::Sphere { center, radius } => format!("sphere {} {radius}", join(&center.0)),
    };
    format!(
        "{shape} c0={} rho0={} delta={} beta={}",
        p.c0, p.rho0, p.delta, p.beta
    )
}

fn manifest_header(config: &SimulationConfig, prep: &Prepared) -> Manifest {
    let mesh = &prep.sim.mesh;
    let quality = quality_report(mesh, &prep.sim.metrics);
    let mut m = Manifest::default();
    m.push("mesh", config.mesh.display());
    m.push("vertices", mesh.n_vertices());
    m.push("edges", mesh.n_edges());
    m.push("triangles", mesh.n_triangles());
    m.push("well_centered", quality.is_well_centered());
    m.push("scheme", config.scheme.name());
    m.push("boundary", config.boundary.name());
    m.push("steps", config.steps);
    m.push("output_every", config.output_every);
    m.push("stable_dt", prep.stable_dt);
    if let TimeStep::Factor(f) = config.time_step {
        m.push("dt_factor", f);
    }
    m.push("dt", prep.dt);
    let d = config.media.default;
    m.push("c0", d.c0);
    m.push("rho0", d.rho0);
    m.push("delta", d.delta);
    m.push("beta", d.beta);
    for (r, p) in &config.media.overrides {
        m.push("region", describe_region(r, p));
    }
    if let Some(s) = &prep.source {
        m.push("source_vertices", join(&s.vertices));
        m.push("source_amplitude", s.amplitude);
        m.push("source_sigma", s.sigma);
        m.push("source_omega", s.omega);
        m.push("source_t0", s.t0);
        m.push("source_mode", s.mode.name());
        if let Some(on) = s.onset {
            m.push("source_onset", on);
        }
    }
    if !prep.probes.is_empty() {
        m.push("probe_vertices", join(&prep.probes));
    }
    if config.scheme == Scheme::Implicit {
        m.push("linear_tolerance", config.linear_solve.tolerance);
    }
    m
}

/// Runs the configured simulation, writing snapshots, probes and a manifest
/// into the output directory.
pub fn run_simulation(config: &SimulationConfig) -> Result<RunSummary, RunError> {
    let started = Instant::now();
    let prep = prepare(config)?;
    let out_dir = &config.output_dir;
    std::fs::create_dir_all(out_dir).map_err(|source| OutputError::Io {
        path: out_dir.clone(),
        source,
    })?;

    let mesh = &prep.sim.mesh;
    let mut state = init_state(mesh, prep.dt, config.scheme, config.boundary)?;
    let limit = config
        .divergence_limit
        .unwrap_or_else(|| match &prep.source {
            Some(s) if s.peak() > 0.0 => 1e12 * s.peak(),
            _ => f64::INFINITY,
        });
    state.set_divergence_limit(limit);

    let mut manifest = manifest_header(config, &prep);
    let mut outputs = Vec::new();
    let mut records = Vec::with_capacity(if prep.probes.is_empty() {
        0
    } else {
        config.steps as usize
    });

    if let Some(src) = &prep.source {
        inject_source(&mut state, src, 0.0);
    }
    let mut iterations = 0usize;
    for n in 1..=config.steps {
        let report = step(
            &mut state,
            &prep.sim.laplacian,
            &prep.media,
            &config.linear_solve,
        )?;
        iterations += report.iterations;
        let t = state.time();
        if let Some(src) = &prep.source {
            inject_source(&mut state, src, t);
        }
        if !prep.probes.is_empty() {
            let p = state.current();
            records.push(ProbeRecord {
                step: n,
                time: t,
                values: prep.probes.iter().map(|&v| p[v]).collect(),
            });
        }
        if n % config.output_every == 0 {
            let path = out_dir.join(format!("snapshot_{n:06}.vtk"));
            write_snapshot(mesh, state.current(), &path)?;
            log::debug!("step {n}: wrote {}", path.display());
            outputs.push(path);
        }
    }

    if !prep.probes.is_empty() {
        let path = out_dir.join(PROBE_NAME);
        write_probe(&records, prep.probes.len(), &path)?;
        outputs.push(path);
    }

    let final_max_abs = state.max_abs();
    manifest.push("steps_run", state.step_index());
    manifest.push("final_max_abs", final_max_abs);
    if config.scheme == Scheme::Implicit {
        manifest.push("linear_iterations", iterations);
    }
    manifest.outputs = outputs.clone();
    let manifest_path = out_dir.join(MANIFEST_NAME);
    manifest.write(&manifest_path)?;

    Ok(RunSummary {
        steps_run: state.step_index(),
        final_max_abs,
        wall_time: started.elapsed(),
        dt: prep.dt,
        stable_dt: prep.stable_dt,
        outputs,
        manifest: manifest_path,
    })
}
