//! The `omnivr` command line.
//!
//! Exit codes: 0 on success, 2 for invalid arguments, 1 for IO and other
//! runtime failures.

use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use omnivr_core::metrics::evaluate;
use omnivr_core::{Image, Interpolation, MobiusMatrix, UserCommand};
use serde::Serialize;
use serde_json::json;

use crate::dataset::{self, DatasetConfig, MatrixJson, Mode};
use crate::error::Result;
use crate::io;
use crate::parallel::{self, run_in};
use crate::server::{self, Panorama};
use crate::view::ViewRequest;

#[derive(Debug, Parser)]
#[command(
    name = "omnivr",
    version,
    about = "Möbius navigation and zoom for equirectangular panoramas"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Upsample and warp a panorama by a rotation/zoom command.
    Transform(TransformArgs),
    /// Render a perspective view of a panorama.
    Project(ProjectArgs),
    /// WS-PSNR and WS-SSIM of a test panorama against a reference.
    Metrics(MetricsArgs),
    /// Generate LR / transformed-HR pairs from a folder of panoramas.
    Dataset(DatasetArgs),
    /// Serve the HTTP view API for one panorama.
    Serve(ServeArgs),
}

fn parse_interp(s: &str) -> Result<Interpolation, String> {
    s.parse().map_err(|_| {
        format!("unknown interpolation {s:?}; expected slerp, slerp-exact, slerp-raw, slerp-exact-raw, bicubic or nearest")
    })
}

fn parse_zoom(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("zoom level must satisfy s > 0, got {v}"))
    }
}

fn parse_angle(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err("angle must be finite".into())
    }
}

fn parse_mode(s: &str) -> Result<Mode, String> {
    s.parse()
}

#[derive(Debug, Args)]
pub struct TransformArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    /// Horizontal rotation, radians.
    #[arg(long, default_value_t = 0.0, value_parser = parse_angle, allow_hyphen_values = true)]
    pub beta: f64,
    /// Vertical rotation, radians.
    #[arg(long, default_value_t = 0.0, value_parser = parse_angle, allow_hyphen_values = true)]
    pub gamma: f64,
    /// Zoom level s (> 0).
    #[arg(long, default_value_t = 1.0, value_parser = parse_zoom, allow_hyphen_values = true)]
    pub zoom: f64,
    /// Up-sampling factor applied before the warp: 1, 2, 4, 8 or 16.
    #[arg(long, default_value_t = 1)]
    pub scale: usize,
    #[arg(long, default_value = "slerp", value_parser = parse_interp)]
    pub interp: Interpolation,
}

#[derive(Debug, Args)]
pub struct ProjectArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long, default_value_t = 0.0, value_parser = parse_angle, allow_hyphen_values = true)]
    pub yaw: f64,
    #[arg(long, default_value_t = 0.0, value_parser = parse_angle, allow_hyphen_values = true)]
    pub pitch: f64,
    /// Horizontal field of view, radians.
    #[arg(long, default_value_t = std::f64::consts::FRAC_PI_2, value_parser = parse_angle)]
    pub fov: f64,
    /// Magnification about the view centre (> 0).
    #[arg(long, default_value_t = 1.0, value_parser = parse_zoom, allow_hyphen_values = true)]
    pub zoom: f64,
    #[arg(long, default_value_t = 512)]
    pub width: usize,
    #[arg(long, default_value_t = 512)]
    pub height: usize,
    #[arg(long, default_value = "slerp", value_parser = parse_interp)]
    pub interp: Interpolation,
}

#[derive(Debug, Args)]
pub struct MetricsArgs {
    #[arg(long)]
    pub reference: PathBuf,
    #[arg(long)]
    pub test: PathBuf,
}

#[derive(Debug, Args)]
pub struct DatasetArgs {
    /// Folder of HR equirectangular PNGs.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long, default_value_t = 8)]
    pub scale: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "train-random", value_parser = parse_mode)]
    pub mode: Mode,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long)]
    pub image: PathBuf,
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: std::net::IpAddr,
}

#[derive(Serialize)]
struct Dims {
    height: usize,
    width: usize,
    channels: usize,
}

impl From<&Image> for Dims {
    fn from(img: &Image) -> Self {
        Dims {
            height: img.height(),
            width: img.width(),
            channels: img.channels(),
        }
    }
}

fn print_json(v: &impl Serialize) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(v)?);
    Ok(())
}

fn elapsed_ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

pub fn cmd_transform(args: &TransformArgs) -> Result<()> {
    let cmd = UserCommand::new(args.beta, args.gamma, args.zoom)?;
    let m = MobiusMatrix::from_command(&cmd)?;
    let pool = parallel::pool_from_env()?;
    let input = io::load_png(&args.input)?;
    let t = Instant::now();
    let out = run_in(pool.as_ref(), || {
        parallel::transform_image(&input, &cmd, args.scale, args.interp)
    })?;
    let ms = elapsed_ms(t);
    io::save_png(&args.output, &out)?;
    print_json(&json!({
        "dims": { "input": Dims::from(&input), "output": Dims::from(&out) },
        "matrix": MatrixJson::from(m),
        "interp": args.interp.name(),
        "elapsed_ms": ms,
    }))
}

pub fn cmd_project(args: &ProjectArgs) -> Result<()> {
    let req = ViewRequest {
        yaw: args.yaw,
        pitch: args.pitch,
        fov: args.fov,
        zoom: args.zoom,
        width: args.width,
        height: args.height,
        interp: args.interp,
    };
    req.check_size()?;
    req.camera()?;
    let pool = parallel::pool_from_env()?;
    let input = io::load_png(&args.input)?;
    let t = Instant::now();
    let png = run_in(pool.as_ref(), || req.render_png(&input))?;
    let ms = elapsed_ms(t);
    std::fs::write(&args.output, &png).map_err(|source| crate::Error::Write {
        path: args.output.clone(),
        source,
    })?;
    let m = MobiusMatrix::zoom_at(req.camera()?.center(), req.zoom)?;
    print_json(&json!({
        "dims": { "input": Dims::from(&input), "output": { "height": req.height, "width": req.width } },
        "matrix": MatrixJson::from(m),
        "interp": args.interp.name(),
        "elapsed_ms": ms,
    }))
}

pub fn cmd_metrics(args: &MetricsArgs) -> Result<()> {
    let reference = io::load_png(&args.reference)?;
    let test = io::load_png(&args.test)?;
    let r = evaluate(&reference, &test)?;
    print_json(&json!({
        "ws_psnr": r.ws_psnr,
        "ws_ssim": r.ws_ssim,
        "width": r.width,
        "height": r.height,
    }))
}

pub fn cmd_dataset(args: &DatasetArgs) -> Result<()> {
    let config = DatasetConfig {
        scale: args.scale,
        seed: args.seed,
        mode: args.mode,
    };
    let pool = parallel::pool_from_env()?;
    let inputs = dataset::list_pngs(&args.input)?;
    let t = Instant::now();
    let manifest = run_in(pool.as_ref(), || {
        dataset::generate(&inputs, &args.output, &config)
    })?;
    print_json(&json!({
        "records": manifest.records.len(),
        "manifest": args.output.join("manifest.json"),
        "elapsed_ms": elapsed_ms(t),
    }))
}

pub fn cmd_serve(args: &ServeArgs) -> Result<()> {
    let panorama = Panorama::load(&args.image)?;
    let pool = parallel::pool_from_env()?;
    let addr = SocketAddr::new(args.host, args.port);
    let runtime = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(crate::Error::Server)?;
    runtime.block_on(server::serve(addr, panorama, pool))
}

pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Transform(a) => cmd_transform(a),
        Command::Project(a) => cmd_project(a),
        Command::Metrics(a) => cmd_metrics(a),
        Command::Dataset(a) => cmd_dataset(a),
        Command::Serve(a) => cmd_serve(a),
    }
}

/// Parses `std::env::args`, runs, and maps errors to exit codes.
pub fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_usage() { 2 } else { 1 })
        }
    }
}
