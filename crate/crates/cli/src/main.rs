//! `anisohist`: spectra, merge trees, subdivisions, and contours of the
//! squared eigenvalue-difference anisotropy of 2D symmetric tensor meshes.
//!
//! Exit codes: 0 success, 1 input/validation failure, 2 numerical/kernel
//! failure. Every command is deterministic given (input, flags, seed) and
//! independent of `--workers`.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use anisohist_core::areas::mc_sublevel_area;
use anisohist_core::io;
use anisohist_core::spectrum::{cumulative_histogram, Mode};
use anisohist_core::subdivision::subdivide_mesh;
use anisohist_core::synth::{generate_synthetic, AngleDistribution, SynthOptions};
use anisohist_core::topology::{extract_contours, join_tree_subdivided, split_tree_subdivided};
use anisohist_core::{
    ContourSpectrum64, Error, JoinTree64, Result, SubdividedMesh64, TensorMesh64,
};

#[derive(Parser)]
#[command(
    name = "anisohist",
    version,
    about = "Continuous histograms, contours, and join trees of tensor anisotropy"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute contour spectra (cumulative histogram and density) per mode.
    Spectrum(SpectrumArgs),
    /// Export join trees (optionally split trees) per mode.
    Tree(TreeArgs),
    /// Export the monotone subdivision of the quadratic anisotropy field.
    Subdivide(SubdivideArgs),
    /// Extract contour polylines at given isovalues per mode.
    Contours(ContourArgs),
    /// Generate a synthetic grid mesh.
    Synth(SynthArgs),
    /// Monte Carlo sublevel-area estimate for one triangle's quadratic field.
    Oracle(OracleArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Input mesh (.json, or .csv tensor grid).
    #[arg(long)]
    input: Option<PathBuf>,
    /// Output path; formats follow the extension where applicable.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Interpolation modes, comma separated subset of a,b,c.
    #[arg(long, value_delimiter = ',')]
    modes: Vec<String>,
    /// Worker threads for parallel sections.
    #[arg(long)]
    workers: Option<usize>,
    /// Optional JSON config file; flags take precedence over its fields.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct SpectrumArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Number of histogram bins.
    #[arg(long)]
    bins: Option<usize>,
}

#[derive(Args)]
struct TreeArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Also export split trees.
    #[arg(long)]
    split: bool,
}

#[derive(Args)]
struct SubdivideArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Also dump per-triangle quadric coefficients as CSV to this path.
    #[arg(long)]
    quadrics: Option<PathBuf>,
}

#[derive(Args)]
struct ContourArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Isovalues, repeatable or comma separated.
    #[arg(long = "isovalue", value_delimiter = ',')]
    isovalues: Vec<f64>,
}

#[derive(Args)]
struct SynthArgs {
    /// Vertices per grid side.
    #[arg(long)]
    grid: Option<usize>,
    /// Randomize eigenvector directions per vertex.
    #[arg(long)]
    perturb: bool,
    /// RNG seed for direction draws.
    #[arg(long)]
    seed: Option<u64>,
    /// Major eigenvalue at every vertex.
    #[arg(long)]
    lambda1: Option<f64>,
    /// Minor eigenvalue at every vertex.
    #[arg(long)]
    lambda2: Option<f64>,
    /// Angle distribution: lattice (exact) or uniform.
    #[arg(long)]
    angles: Option<String>,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long)]
    input: Option<PathBuf>,
    /// Triangle index in the input mesh.
    #[arg(long)]
    tri: Option<usize>,
    /// Threshold value for the sublevel set.
    #[arg(long)]
    value: Option<f64>,
    /// Sample count.
    #[arg(long)]
    samples: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    config: Option<PathBuf>,
}

/// Optional config file; field names match the flag names.
#[derive(Deserialize, Default)]
#[serde(default)]
struct FileConfig {
    input: Option<PathBuf>,
    output: Option<PathBuf>,
    modes: Option<Vec<String>>,
    bins: Option<usize>,
    workers: Option<usize>,
    split: Option<bool>,
    isovalues: Option<Vec<f64>>,
    quadrics: Option<PathBuf>,
    grid: Option<usize>,
    perturb: Option<bool>,
    seed: Option<u64>,
    lambda1: Option<f64>,
    lambda2: Option<f64>,
    angles: Option<String>,
    tri: Option<usize>,
    value: Option<f64>,
    samples: Option<u64>,
}

impl FileConfig {
    fn load(path: Option<&PathBuf>) -> Result<Self> {
        match path {
            None => Ok(Self::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p)?;
                Ok(serde_json::from_str(&text)?)
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            if err.is_input_error() {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Spectrum(args) => cmd_spectrum(args),
        Command::Tree(args) => cmd_tree(args),
        Command::Subdivide(args) => cmd_subdivide(args),
        Command::Contours(args) => cmd_contours(args),
        Command::Synth(args) => cmd_synth(args),
        Command::Oracle(args) => cmd_oracle(args),
    }
}

fn parse_modes(flag: &[String], cfg: Option<&Vec<String>>) -> Result<Vec<Mode>> {
    let source: Vec<String> = if !flag.is_empty() {
        flag.to_vec()
    } else if let Some(cfg) = cfg {
        cfg.clone()
    } else {
        vec!["a".into(), "b".into(), "c".into()]
    };
    let mut modes: Vec<Mode> = source
        .iter()
        .map(|s| s.trim().parse())
        .collect::<Result<_>>()?;
    modes.sort();
    modes.dedup();
    if modes.is_empty() {
        return Err(Error::InvalidInput("at least one mode is required".into()));
    }
    Ok(modes)
}

fn require_input(flag: Option<PathBuf>, cfg: Option<PathBuf>) -> Result<PathBuf> {
    flag.or(cfg)
        .ok_or_else(|| Error::InvalidInput("--input is required".into()))
}

fn thread_pool(workers: usize) -> Result<rayon::ThreadPool> {
    if workers == 0 {
        return Err(Error::InvalidInput("--workers must be at least 1".into()));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidInput(format!("cannot build thread pool: {e}")))
}

/// Output path variant for one mode: `spec.csv` -> `spec_a.csv`.
fn mode_path(base: &Path, mode: Mode, extra: &str) -> PathBuf {
    let stem = base
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("output");
    let ext = base.extension().and_then(|s| s.to_str()).unwrap_or("json");
    base.with_file_name(format!("{stem}_{}{extra}.{ext}", mode.letter()))
}

struct MeshBundle {
    mesh: TensorMesh64,
    sub: SubdividedMesh64,
}

fn load_bundle(input: &Path) -> Result<MeshBundle> {
    let mesh: TensorMesh64 = io::read_mesh(input)?;
    let sub = subdivide_mesh(&mesh)?;
    Ok(MeshBundle { mesh, sub })
}

fn cmd_spectrum(args: SpectrumArgs) -> Result<()> {
    let cfg = FileConfig::load(args.common.config.as_ref())?;
    let input = require_input(args.common.input, cfg.input)?;
    let output = args
        .common
        .output
        .or(cfg.output)
        .unwrap_or_else(|| PathBuf::from("spectrum.csv"));
    let modes = parse_modes(&args.common.modes, cfg.modes.as_ref())?;
    let bins = args.bins.or(cfg.bins).unwrap_or(256);
    if bins < 2 {
        return Err(Error::InvalidInput("--bins must be at least 2".into()));
    }
    let workers = args.common.workers.or(cfg.workers).unwrap_or(1);
    let pool = thread_pool(workers)?;

    let bundle = load_bundle(&input)?;
    let spectra: Vec<ContourSpectrum64> = pool.install(|| {
        modes
            .iter()
            .map(|&m| cumulative_histogram(&bundle.mesh, &bundle.sub, m, bins))
            .collect::<Result<_>>()
    })?;

    let mesh_area = bundle.mesh.total_area();
    for s in &spectra {
        let reached = s.cumulative[s.bins()];
        let rel = ((reached - mesh_area) / mesh_area).abs();
        eprintln!(
            "mode {}: cumulative[{}] = {reached:.6e}, mesh area = {mesh_area:.6e}, rel diff = {rel:.3e}, monotonicity fix = {:.3e}",
            s.mode.letter(),
            s.bins(),
            s.monotonicity_fix
        );
    }

    let refs: Vec<&ContourSpectrum64> = spectra.iter().collect();
    if output.extension().and_then(|e| e.to_str()) == Some("json") {
        io::write_spectra_json(&output, &refs)?;
    } else {
        io::write_spectra_csv(&output, &refs)?;
    }
    Ok(())
}

fn cmd_tree(args: TreeArgs) -> Result<()> {
    let cfg = FileConfig::load(args.common.config.as_ref())?;
    let input = require_input(args.common.input, cfg.input)?;
    let output = args
        .common
        .output
        .or(cfg.output)
        .unwrap_or_else(|| PathBuf::from("tree.json"));
    let modes = parse_modes(&args.common.modes, cfg.modes.as_ref())?;
    let split = args.split || cfg.split.unwrap_or(false);
    let workers = args.common.workers.or(cfg.workers).unwrap_or(1);
    let _pool = thread_pool(workers)?;

    let bundle = load_bundle(&input)?;
    for &mode in &modes {
        let join: JoinTree64 = match mode {
            Mode::A => anisohist_core::topology::join_tree(&bundle.mesh, Mode::A)?,
            Mode::B | Mode::C => join_tree_subdivided(&bundle.sub)?,
        };
        io::write_tree_json(&mode_path(&output, mode, ""), &join)?;
        if split {
            let split_tree: JoinTree64 = match mode {
                Mode::A => anisohist_core::topology::split_tree(&bundle.mesh, Mode::A)?,
                Mode::B | Mode::C => split_tree_subdivided(&bundle.sub)?,
            };
            io::write_tree_json(&mode_path(&output, mode, "_split"), &split_tree)?;
        }
    }
    Ok(())
}

fn cmd_subdivide(args: SubdivideArgs) -> Result<()> {
    let cfg = FileConfig::load(args.common.config.as_ref())?;
    let input = require_input(args.common.input, cfg.input)?;
    let output = args
        .common
        .output
        .or(cfg.output)
        .unwrap_or_else(|| PathBuf::from("subdivided.json"));
    let bundle = load_bundle(&input)?;
    io::write_subdivided_json(&output, &bundle.mesh, &bundle.sub)?;
    if let Some(qpath) = args.quadrics.or(cfg.quadrics) {
        io::write_quadrics_csv(&qpath, &bundle.sub)?;
    }
    Ok(())
}

fn cmd_contours(args: ContourArgs) -> Result<()> {
    let cfg = FileConfig::load(args.common.config.as_ref())?;
    let input = require_input(args.common.input, cfg.input)?;
    let output = args
        .common
        .output
        .or(cfg.output)
        .unwrap_or_else(|| PathBuf::from("contours.csv"));
    let modes = parse_modes(&args.common.modes, cfg.modes.as_ref())?;
    let isovalues = if !args.isovalues.is_empty() {
        args.isovalues
    } else {
        cfg.isovalues.unwrap_or_default()
    };
    if isovalues.is_empty() {
        return Err(Error::InvalidInput(
            "at least one --isovalue is required".into(),
        ));
    }
    let bundle = load_bundle(&input)?;
    for &mode in &modes {
        let sets = isovalues
            .iter()
            .map(|&v| extract_contours(&bundle.mesh, &bundle.sub, mode, v))
            .collect::<Result<Vec<_>>>()?;
        let refs: Vec<_> = sets.iter().collect();
        io::write_contours_csv(&mode_path(&output, mode, ""), &refs)?;
    }
    Ok(())
}

fn cmd_synth(args: SynthArgs) -> Result<()> {
    let cfg = FileConfig::load(args.config.as_ref())?;
    let output = args
        .output
        .or(cfg.output)
        .unwrap_or_else(|| PathBuf::from("synthetic.json"));
    let angles = match args
        .angles
        .or(cfg.angles)
        .unwrap_or_else(|| "lattice".into())
        .as_str()
    {
        "lattice" => AngleDistribution::Lattice,
        "uniform" => AngleDistribution::Uniform,
        other => {
            return Err(Error::InvalidInput(format!(
                "unknown angle distribution '{other}' (expected lattice or uniform)"
            )))
        }
    };
    let opts = SynthOptions {
        grid_n: args.grid.or(cfg.grid).unwrap_or(5),
        seed: args.seed.or(cfg.seed).unwrap_or(0),
        lambda1: args.lambda1.or(cfg.lambda1).unwrap_or(2.0),
        lambda2: args.lambda2.or(cfg.lambda2).unwrap_or(1.0),
        perturb_directions: args.perturb || cfg.perturb.unwrap_or(false),
        angles,
    };
    let mesh = generate_synthetic(&opts)?;
    io::write_mesh_json(&output, &mesh)?;
    Ok(())
}

fn cmd_oracle(args: OracleArgs) -> Result<()> {
    let cfg = FileConfig::load(args.config.as_ref())?;
    let input = require_input(args.input, cfg.input)?;
    let tri = args
        .tri
        .or(cfg.tri)
        .ok_or_else(|| Error::InvalidInput("--tri is required".into()))?;
    let value = args
        .value
        .or(cfg.value)
        .ok_or_else(|| Error::InvalidInput("--value is required".into()))?;
    let samples = args.samples.or(cfg.samples).unwrap_or(1_000_000);
    let seed = args.seed.or(cfg.seed).unwrap_or(0);

    let mesh: TensorMesh64 = io::read_mesh(&input)?;
    if tri >= mesh.triangles.len() {
        return Err(Error::InvalidInput(format!(
            "triangle index {tri} out of range ({} triangles)",
            mesh.triangles.len()
        )));
    }
    let [ce, cf, cg] = anisohist_core::mesh::tensor_field_coeffs(&mesh, tri);
    let q = anisohist_core::quadric::QuadricModel::from_tensor_coeffs(&ce, &cf, &cg);
    let verts = mesh.triangle_points(tri);
    let (estimate, std_error) =
        mc_sublevel_area(|p| q.eval(p), &verts, value, samples, seed);
    println!("{estimate},{std_error}");
    Ok(())
}
