//! Simulation configuration files.
//!
//! Configs are TOML documents. Top-level keys set the run, `[material]` the
//! default medium, and the repeated sections `[[region]]` and `[[probe]]`
//! add material overrides and pressure probes:
//!
//! ```toml
//! mesh = "meshes/sphere.off"   # relative to the config file
//! steps = 2000
//! scheme = "explicit"          # explicit | implicit | semi-implicit
//! dt_factor = 0.9              # or `dt = <seconds>`, not both
//! output_every = 100
//! output_dir = "out"
//! boundary = "natural"         # natural | dirichlet
//!
//! [material]
//! c0 = 340.0
//! rho0 = 10000.0
//! delta = 0.01
//! beta = 1.0
//!
//! [[region]]
//! box_min = [0.0, -2.0, -2.0]
//! box_max = [2.0, 2.0, 2.0]
//! c0 = 3400.0
//!
//! [source]
//! point = [-1.0, 0.0, 0.0]
//! amplitude = 1.0
//! sigma = 1e-3
//! omega = 3141.6
//! t0 = 4e-3
//! mode = "additive"            # additive | hard
//!
//! [[probe]]
//! point = [1.0, 0.0, 0.0]
//! ```

use std::ops::Range;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use toml::Spanned;
use westervelt_core::media::{MaterialParams, Region, RegionSpec};
use westervelt_core::prelude::{BoundaryPolicy, LinearSolveConfig, Scheme, SourceMode, Vec3};

pub const DEFAULT_DT_FACTOR: f64 = 0.9;
pub const DEFAULT_OUTPUT_EVERY: u64 = 10;
pub const DEFAULT_RHO0: f64 = 10000.0;
pub const DEFAULT_DELTA: f64 = 0.01;
pub const DEFAULT_BETA: f64 = 1.0;

#[derive(Debug, thiserror::Error, PartialEq)]
#[error("{}{message}", line.map(|l| format!("line {l}: ")).unwrap_or_default())]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TimeStep {
    /// Absolute step in seconds.
    Fixed(f64),
    /// Multiple of the stability bound.
    Factor(f64),
}

/// Where something attaches to the mesh.
#[derive(Clone, Debug, PartialEq)]
pub enum Location {
    /// Nearest vertex to a point.
    Point(Vec3),
    Vertices(Vec<usize>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SourceConfig {
    pub location: Location,
    pub amplitude: f64,
    pub sigma: f64,
    pub omega: f64,
    pub t0: f64,
    pub mode: SourceMode,
    pub onset: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimulationConfig {
    pub mesh: PathBuf,
    pub scheme: Scheme,
    pub time_step: TimeStep,
    pub steps: u64,
    pub output_every: u64,
    pub output_dir: PathBuf,
    pub boundary: BoundaryPolicy,
    pub media: RegionSpec,
    pub source: Option<SourceConfig>,
    pub probes: Vec<Location>,
    pub linear_solve: LinearSolveConfig,
    /// Runs abort once max |p| exceeds this; defaults to 1e12 times the source peak.
    pub divergence_limit: Option<f64>,
}

impl SimulationConfig {
    /// Resolves relative mesh and output paths against `base`.
    pub fn resolve_paths(&mut self, base: &Path) {
        if self.mesh.is_relative() {
            self.mesh = base.join(&self.mesh);
        }
        if self.output_dir.is_relative() {
            self.output_dir = base.join(&self.output_dir);
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    mesh: Option<Spanned<String>>,
    steps: Option<Spanned<i64>>,
    scheme: Option<Spanned<String>>,
    dt: Option<Spanned<f64>>,
    dt_factor: Option<Spanned<f64>>,
    output_every: Option<Spanned<i64>>,
    output_dir: Option<String>,
    boundary: Option<Spanned<String>>,
    divergence_limit: Option<Spanned<f64>>,
    material: Option<Spanned<RawMaterial>>,
    #[serde(default)]
    region: Vec<Spanned<RawRegion>>,
    source: Option<Spanned<RawSource>>,
    #[serde(default)]
    probe: Vec<Spanned<RawProbe>>,
    solver: Option<Spanned<RawSolver>>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawMaterial {
    c0: Option<f64>,
    rho0: Option<f64>,
    delta: Option<f64>,
    beta: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRegion {
    box_min: Option<[f64; 3]>,
    box_max: Option<[f64; 3]>,
    sphere_center: Option<[f64; 3]>,
    sphere_radius: Option<f64>,
    c0: Option<f64>,
    rho0: Option<f64>,
    delta: Option<f64>,
    beta: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSource {
    point: Option<[f64; 3]>,
    vertices: Option<Vec<usize>>,
    amplitude: Option<f64>,
    sigma: f64,
    omega: f64,
    t0: Option<f64>,
    mode: Option<String>,
    onset: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProbe {
    point: Option<[f64; 3]>,
    vertex: Option<usize>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSolver {
    tolerance: Option<f64>,
    max_iterations: Option<usize>,
}

struct Ctx<'a> {
    text: &'a str,
}

impl Ctx<'_> {
    fn line(&self, span: Range<usize>) -> usize {
        let end = span.start.min(self.text.len());
        self.text[..end].bytes().filter(|&b| b == b'\n').count() + 1
    }

    fn err<T>(&self, span: Range<usize>, message: impl Into<String>) -> Result<T, ConfigError> {
        Err(ConfigError {
            line: Some(self.line(span)),
            message: message.into(),
        })
    }
}

fn parse_enum<T: std::str::FromStr>(
    ctx: &Ctx,
    value: Option<Spanned<String>>,
    default: T,
    what: &str,
) -> Result<T, ConfigError> {
    match value {
        None => Ok(default),
        Some(v) => {
            let span = v.span();
            let s = v.into_inner();
            s.parse()
                .or_else(|_| ctx.err(span, format!("unknown {what} `{s}`")))
        }
    }
}

fn positive_count(ctx: &Ctx, v: Spanned<i64>, what: &str) -> Result<u64, ConfigError> {
    let span = v.span();
    match u64::try_from(*v.get_ref()) {
        Ok(n) if n >= 1 => Ok(n),
        _ => ctx.err(
            span,
            format!("{what} must be at least 1, got {}", v.get_ref()),
        ),
    }
}

/// Parses and validates a config document.
///
/// Paths are returned as written; see [`load_config`] for file-relative
/// resolution.
pub fn parse_config(text: &str) -> Result<SimulationConfig, ConfigError> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| ConfigError {
        line: e.span().map(|s| Ctx { text }.line(s)),
        message: e.message().to_string(),
    })?;
    let ctx = Ctx { text };

    let mesh = match raw.mesh {
        Some(m) if m.get_ref().trim().is_empty() => return ctx.err(m.span(), "empty mesh path"),
        Some(m) => PathBuf::from(m.into_inner()),
        None => {
            return Err(ConfigError {
                line: Some(1),
                message: "missing required key `mesh`".into(),
            })
        }
    };
    let steps = match raw.steps {
        Some(s) => positive_count(&ctx, s, "steps")?,
        None => {
            return Err(ConfigError {
                line: Some(1),
                message: "missing required key `steps`".into(),
            })
        }
    };
    let output_every = match raw.output_every {
        Some(s) => positive_count(&ctx, s, "output_every")?,
        None => DEFAULT_OUTPUT_EVERY,
    };

    let time_step = match (raw.dt, raw.dt_factor) {
        (Some(a), Some(b)) => {
            let later = if a.span().start > b.span().start {
                a.span()
            } else {
                b.span()
            };
            return ctx.err(later, "`dt` and `dt_factor` are mutually exclusive");
        }
        (Some(dt), None) => {
            if !(*dt.get_ref() > 0.0 && dt.get_ref().is_finite()) {
                return ctx.err(dt.span(), "dt must be positive");
            }
            TimeStep::Fixed(dt.into_inner())
        }
        (None, Some(f)) => {
            if !(*f.get_ref() > 0.0 && f.get_ref().is_finite()) {
                return ctx.err(f.span(), "dt_factor must be positive");
            }
            TimeStep::Factor(f.into_inner())
        }
        (None, None) => TimeStep::Factor(DEFAULT_DT_FACTOR),
    };

    let scheme = parse_enum(&ctx, raw.scheme, Scheme::Explicit, "scheme")?;
    let boundary = parse_enum(
        &ctx,
        raw.boundary,
        BoundaryPolicy::Natural,
        "boundary policy",
    )?;

    let default = match raw.material {
        Some(m) => {
            let span = m.span();
            let m = m.into_inner();
            let Some(c0) = m.c0 else {
                return ctx.err(span, "[material] requires `c0`");
            };
            let p = MaterialParams {
                c0,
                rho0: m.rho0.unwrap_or(DEFAULT_RHO0),
                delta: m.delta.unwrap_or(DEFAULT_DELTA),
                beta: m.beta.unwrap_or(DEFAULT_BETA),
            };
            if let Err(e) = p.validate() {
                return ctx.err(span, e.to_string());
            }
            p
        }
        None => MaterialParams {
            c0: 340.0,
            rho0: DEFAULT_RHO0,
            delta: DEFAULT_DELTA,
            beta: DEFAULT_BETA,
        },
    };

    let mut overrides = Vec::with_capacity(raw.region.len());
    for r in raw.region {
        let span = r.span();
        let r = r.into_inner();
        let region = match (r.box_min, r.box_max, r.sphere_center, r.sphere_radius) {
            (Some(min), Some(max), None, None) => Region::Box {
                min: min.into(),
                max: max.into(),
            },
            (None, None, Some(center), Some(radius)) => Region::Sphere {
                center: center.into(),
                radius,
            },
            _ => {
                return ctx.err(
                    span,
                    "[[region]] needs either box_min/box_max or sphere_center/sphere_radius",
                )
            }
        };
        let params = MaterialParams {
            c0: r.c0.unwrap_or(default.c0),
            rho0: r.rho0.unwrap_or(default.rho0),
            delta: r.delta.unwrap_or(default.delta),
            beta: r.beta.unwrap_or(default.beta),
        };
        if let Err(e) = region.validate().and_then(|_| params.validate()) {
            return ctx.err(span, e.to_string());
        }
        overrides.push((region, params));
    }

    let source = match raw.source {
        None => None,
        Some(s) => {
            let span = s.span();
            let s = s.into_inner();
            let location = match (s.point, s.vertices) {
                (Some(p), None) => Location::Point(p.into()),
                (None, Some(v)) if !v.is_empty() => Location::Vertices(v),
                _ => return ctx.err(span, "[source] needs exactly one of `point` or `vertices`"),
            };
            if !(s.sigma > 0.0 && s.sigma.is_finite()) {
                return ctx.err(span, "source sigma must be positive");
            }
            let mode = match s.mode.as_deref() {
                None => SourceMode::Additive,
                Some(m) => match m.parse() {
                    Ok(mode) => mode,
                    Err(_) => return ctx.err(span, format!("unknown source mode `{m}`")),
                },
            };
            let cfg = SourceConfig {
                location,
                amplitude: s.amplitude.unwrap_or(1.0),
                sigma: s.sigma,
                omega: s.omega,
                t0: s.t0.unwrap_or(4.0 * s.sigma),
                mode,
                onset: s.onset,
            };
            if ![cfg.amplitude, cfg.omega, cfg.t0]
                .iter()
                .all(|x| x.is_finite())
                || cfg.onset.is_some_and(|o| !o.is_finite())
            {
                return ctx.err(span, "source parameters must be finite");
            }
            Some(cfg)
        }
    };

    let mut probes = Vec::with_capacity(raw.probe.len());
    for p in raw.probe {
        let span = p.span();
        let p = p.into_inner();
        probes.push(match (p.point, p.vertex) {
            (Some(x), None) => Location::Point(x.into()),
            (None, Some(v)) => Location::Vertices(vec![v]),
            _ => return ctx.err(span, "[[probe]] needs exactly one of `point` or `vertex`"),
        });
    }

    let mut linear_solve = LinearSolveConfig::default();
    if let Some(s) = raw.solver {
        let span = s.span();
        let s = s.into_inner();
        if let Some(t) = s.tolerance {
            linear_solve.tolerance = t;
        }
        linear_solve.max_iterations = s.max_iterations.or(linear_solve.max_iterations);
        if let Err(e) = linear_solve.validate() {
            return ctx.err(span, e.to_string());
        }
    }

    let divergence_limit = match raw.divergence_limit {
        Some(d) if d.get_ref().is_nan() || *d.get_ref() <= 0.0 => {
            return ctx.err(d.span(), "divergence_limit must be positive")
        }
        d => d.map(Spanned::into_inner),
    };

    Ok(SimulationConfig {
        mesh,
        scheme,
        time_step,
        steps,
        output_every,
        output_dir: PathBuf::from(raw.output_dir.unwrap_or_else(|| "output".into())),
        boundary,
        media: RegionSpec { default, overrides },
        source,
        probes,
        linear_solve,
        divergence_limit,
    })
}

/// Reads a config file and resolves its paths relative to the file's directory.
pub fn load_config(path: impl AsRef<Path>) -> Result<SimulationConfig, ConfigError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
        line: None,
        message: format!("{}: {e}", path.display()),
    })?;
    let mut cfg = parse_config(&text).map_err(|e| ConfigError {
        message: format!("{}: {}", path.display(), e.message),
        ..e
    })?;
    cfg.resolve_paths(path.parent().unwrap_or(Path::new(".")));
    Ok(cfg)
}
