use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use westervelt_cli::config::TimeStep;
use westervelt_cli::{load_config, prepare, run_simulation};
use westervelt_core::mesh::{quality_report, read_off_file, CircumcenterLocation};
use westervelt_core::prelude::*;

#[derive(Parser)]
#[command(
    name = "westervelt",
    version,
    about = "Nonlinear acoustic wave simulation on triangle meshes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a simulation described by a config file.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Report mesh structure and dual-cell quality.
    CheckMesh {
        #[arg(long)]
        mesh: PathBuf,
        /// Write the assembled Laplacian in coordinate format.
        #[arg(long)]
        dump_laplacian: Option<PathBuf>,
    },
    /// Print the explicit stability bound and the resolved time step.
    StableDt {
        #[arg(long)]
        config: PathBuf,
    },
}

fn run(config: PathBuf) -> Result<()> {
    let cfg = load_config(&config)?;
    let summary = run_simulation(&cfg)?;
    println!("steps run      {}", summary.steps_run);
    println!(
        "dt             {:e} s ({:.4} x stable)",
        summary.dt,
        summary.dt / summary.stable_dt
    );
    println!("final max |p|  {:e}", summary.final_max_abs);
    println!("wall time      {:.3} s", summary.wall_time.as_secs_f64());
    println!("outputs        {}", summary.outputs.len());
    println!("manifest       {}", summary.manifest.display());
    Ok(())
}

fn check_mesh(mesh: PathBuf, dump: Option<PathBuf>) -> Result<()> {
    let m = read_off_file(&mesh).with_context(|| format!("loading {}", mesh.display()))?;
    let sim = Discretization::new(m)?;
    let report = quality_report(&sim.mesh, &sim.metrics);
    let boundary = sim.mesh.boundary_vertices().iter().filter(|&&b| b).count();
    let min_area = sim
        .metrics
        .dual_area
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    println!("vertices               {}", sim.mesh.n_vertices());
    println!("edges                  {}", sim.mesh.n_edges());
    println!("triangles              {}", sim.mesh.n_triangles());
    println!("boundary vertices      {boundary}");
    println!("surface area           {:e}", sim.mesh.total_area());
    println!("min dual area          {min_area:e}");
    println!(
        "circumcenter interior  {}",
        report.count(CircumcenterLocation::Interior)
    );
    println!(
        "circumcenter on edge   {}",
        report.count(CircumcenterLocation::OnBoundary)
    );
    println!(
        "circumcenter exterior  {}",
        report.count(CircumcenterLocation::Exterior)
    );
    println!("negative dual pieces   {}", report.negative_contributions);
    if let Some(t) = report.worst_triangle {
        println!("worst triangle         {t}");
    }
    println!("well-centered          {}", report.is_well_centered());
    if let Some(path) = dump {
        let f = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        sim.laplacian.matrix.write_coo(BufWriter::new(f))?;
        println!("laplacian written to   {}", path.display());
    }
    Ok(())
}

fn stable(config: PathBuf) -> Result<()> {
    let cfg = load_config(&config)?;
    let prep = prepare(&cfg)?;
    println!("stable_dt  {:e} s", prep.stable_dt);
    match cfg.time_step {
        TimeStep::Factor(f) => println!("dt         {:e} s (dt_factor {f})", prep.dt),
        TimeStep::Fixed(_) => println!("dt         {:e} s (fixed)", prep.dt),
    }
    Ok(())
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config } => run(config),
        Command::CheckMesh {
            mesh,
            dump_laplacian,
        } => check_mesh(mesh, dump_laplacian),
        Command::StableDt { config } => stable(config),
    };
    if let Err(e) = result {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
