//! Paired LR / transformed-HR dataset generation.
//!
//! For each HR panorama the LR input is the bicubic down-sample of the
//! original, and the ground truth is the original warped by a sampled
//! command at full resolution. Output layout:
//!
//! ```text
//! out/lr/0000.png
//! out/hr_t/0000.png
//! out/manifest.json
//! ```

use std::f64::consts::{FRAC_PI_2, TAU};
use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use omnivr_core::metrics::ws_psnr;
use omnivr_core::pipeline::SUPPORTED_FACTORS;
use omnivr_core::{downsample_bicubic, Image, Interpolation, MobiusMatrix, UserCommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::{io, parallel};

pub const MANIFEST_VERSION: u32 = 1;
pub const ZOOM_RANGE: (f64, f64) = (0.5, 2.0);

/// Draws one command: `β ∈ [0, 2π)`, `γ ∈ [-π/2, π/2]`, `s ∈ [0.5, 2]`.
pub fn sample_command<R: Rng + ?Sized>(rng: &mut R) -> UserCommand {
    let beta = rng.random_range(0.0..TAU);
    let gamma = rng.random_range(-FRAC_PI_2..=FRAC_PI_2);
    let s = rng.random_range(ZOOM_RANGE.0..=ZOOM_RANGE.1);
    UserCommand { beta, gamma, s }
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// One stream shared by all images, consumed in index order.
    TrainRandom,
    /// Each image gets its own stream keyed by `(seed, index)`.
    EvalFixed,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::TrainRandom => "train-random",
            Mode::EvalFixed => "eval-fixed",
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "train-random" => Ok(Mode::TrainRandom),
            "eval-fixed" => Ok(Mode::EvalFixed),
            _ => Err(format!(
                "unknown mode {s:?}; expected train-random or eval-fixed"
            )),
        }
    }
}

/// Command of image `index` in eval-fixed mode.
pub fn eval_command(seed: u64, index: usize) -> UserCommand {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64 + 1);
    sample_command(&mut rng)
}

/// Commands for `count` images.
pub fn commands(seed: u64, mode: Mode, count: usize) -> Vec<UserCommand> {
    match mode {
        Mode::TrainRandom => {
            let mut rng = rng_from_seed(seed);
            (0..count).map(|_| sample_command(&mut rng)).collect()
        }
        Mode::EvalFixed => (0..count).map(|i| eval_command(seed, i)).collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CommandJson {
    pub beta: f64,
    pub gamma: f64,
    pub s: f64,
}

impl From<UserCommand> for CommandJson {
    fn from(c: UserCommand) -> Self {
        Self {
            beta: c.beta,
            gamma: c.gamma,
            s: c.s,
        }
    }
}

impl From<CommandJson> for UserCommand {
    fn from(c: CommandJson) -> Self {
        UserCommand {
            beta: c.beta,
            gamma: c.gamma,
            s: c.s,
        }
    }
}

/// Matrix entries as `[re, im]` pairs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub a: [f64; 2],
    pub b: [f64; 2],
    pub c: [f64; 2],
    pub d: [f64; 2],
}

impl From<MobiusMatrix> for MatrixJson {
    fn from(m: MobiusMatrix) -> Self {
        let pair = |z: Complex64| [z.re, z.im];
        Self {
            a: pair(m.a),
            b: pair(m.b),
            c: pair(m.c),
            d: pair(m.d),
        }
    }
}

impl MatrixJson {
    pub fn to_matrix(&self) -> Result<MobiusMatrix> {
        let z = |p: [f64; 2]| Complex64::new(p[0], p[1]);
        Ok(MobiusMatrix::new(
            z(self.a),
            z(self.b),
            z(self.c),
            z(self.d),
        )?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetRecord {
    pub id: String,
    pub source: String,
    pub lr_path: String,
    pub hr_transformed_path: String,
    pub command: CommandJson,
    pub matrix: MatrixJson,
    pub scale: usize,
    pub hr_height: usize,
    pub hr_width: usize,
    pub lr_height: usize,
    pub lr_width: usize,
    /// WS-PSNR of the bicubic-upsampled LR, transformed, against the ground
    /// truth (both as stored, 8-bit).
    pub baseline_ws_psnr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: u32,
    pub seed: u64,
    pub mode: Mode,
    pub scale: usize,
    pub interpolation: String,
    pub zoom_range: [f64; 2],
    pub records: Vec<DatasetRecord>,
}

impl Manifest {
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    /// Parses a manifest and checks every record's matrix against its command.
    pub fn from_json(s: &str) -> Result<Self> {
        let m: Manifest = serde_json::from_str(s)?;
        m.validate()?;
        Ok(m)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let s = fs::read_to_string(path).map_err(|source| Error::Read {
            path: path.to_owned(),
            source,
        })?;
        Self::from_json(&s)
    }

    pub fn validate(&self) -> Result<()> {
        for r in &self.records {
            let bad = |reason: String| Error::Manifest {
                id: r.id.clone(),
                reason,
            };
            let expected = MobiusMatrix::from_command(&r.command.into())?;
            let stored = r.matrix.to_matrix()?;
            if !stored.approx_eq_projective(&expected, 1e-9) {
                return Err(bad("matrix does not match command".into()));
            }
            if r.scale == 0
                || r.lr_height * r.scale != r.hr_height
                || r.lr_width * r.scale != r.hr_width
            {
                return Err(bad("LR dimensions are not HR / scale".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DatasetConfig {
    pub scale: usize,
    pub seed: u64,
    pub mode: Mode,
}

/// One generated pair, before it is written out.
#[derive(Debug, Clone)]
pub struct Sample {
    pub record: DatasetRecord,
    pub lr: Image,
    pub hr_transformed: Image,
}

fn check_inputs(images: &[(String, Image)], scale: usize) -> Result<()> {
    if scale == 0 || !SUPPORTED_FACTORS.contains(&scale) {
        return Err(omnivr_core::Error::UnsupportedFactor(scale).into());
    }
    let problems: Vec<String> = images
        .iter()
        .filter_map(|(name, img)| {
            let (h, w) = (img.height(), img.width());
            if w != 2 * h {
                Some(format!("{name}: {w}x{h} is not 2:1 equirectangular"))
            } else if h % scale != 0 {
                Some(format!(
                    "{name}: height {h} is not divisible by scale {scale}"
                ))
            } else if h / scale < 2 {
                Some(format!("{name}: height {h} is too small for scale {scale}"))
            } else {
                None
            }
        })
        .collect();
    if problems.is_empty() {
        Ok(())
    } else {
        Err(Error::InvalidInputs(problems))
    }
}

fn make_sample(
    index: usize,
    name: &str,
    hr: &Image,
    cmd: UserCommand,
    scale: usize,
) -> Result<Sample> {
    let id = format!("{index:04}");
    let lr = io::quantized(&downsample_bicubic(hr, scale)?);
    let gt = io::quantized(&parallel::transform_image(
        hr,
        &cmd,
        1,
        Interpolation::SLERP,
    )?);
    let baseline = io::quantized(&parallel::transform_image(
        &lr,
        &cmd,
        scale,
        Interpolation::SLERP,
    )?);
    let record = DatasetRecord {
        lr_path: format!("lr/{id}.png"),
        hr_transformed_path: format!("hr_t/{id}.png"),
        id,
        source: name.to_owned(),
        command: cmd.into(),
        matrix: MobiusMatrix::from_command(&cmd)?.into(),
        scale,
        hr_height: hr.height(),
        hr_width: hr.width(),
        lr_height: lr.height(),
        lr_width: lr.width(),
        baseline_ws_psnr: ws_psnr(&gt, &baseline)?,
    };
    Ok(Sample {
        record,
        lr,
        hr_transformed: gt,
    })
}

/// Generates all samples in memory, in input order.
pub fn generate_samples(
    images: &[(String, Image)],
    config: &DatasetConfig,
) -> Result<(Manifest, Vec<Sample>)> {
    check_inputs(images, config.scale)?;
    let cmds = commands(config.seed, config.mode, images.len());
    for c in &cmds {
        c.validate()?;
    }
    let samples: Vec<Sample> = images
        .par_iter()
        .zip(cmds.par_iter())
        .enumerate()
        .map(|(i, ((name, img), cmd))| make_sample(i, name, img, *cmd, config.scale))
        .collect::<Result<_>>()?;
    let manifest = Manifest {
        version: MANIFEST_VERSION,
        seed: config.seed,
        mode: config.mode,
        scale: config.scale,
        interpolation: Interpolation::SLERP.name().to_owned(),
        zoom_range: [ZOOM_RANGE.0, ZOOM_RANGE.1],
        records: samples.iter().map(|s| s.record.clone()).collect(),
    };
    Ok((manifest, samples))
}

/// PNG files in `dir`, sorted by file name.
pub fn list_pngs(dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    let rd = fs::read_dir(dir).map_err(|source| Error::Read {
        path: dir.to_owned(),
        source,
    })?;
    let mut files = Vec::new();
    for entry in rd {
        let path = entry
            .map_err(|source| Error::Read {
                path: dir.to_owned(),
                source,
            })?
            .path();
        let is_png = path
            .extension()
            .is_some_and(|e| e.eq_ignore_ascii_case("png"));
        if is_png && path.is_file() {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|source| Error::Write {
        path: path.to_owned(),
        source,
    })
}

/// Reads `inputs`, generates the dataset and writes it under `out_dir`.
pub fn generate(
    inputs: &[PathBuf],
    out_dir: impl AsRef<Path>,
    config: &DatasetConfig,
) -> Result<Manifest> {
    let out_dir = out_dir.as_ref();
    let images: Vec<(String, Image)> = inputs
        .iter()
        .map(|p| {
            let name = p
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_else(|| p.display().to_string());
            Ok((name, io::load_png(p)?))
        })
        .collect::<Result<_>>()?;
    let (manifest, samples) = generate_samples(&images, config)?;
    create_dir(&out_dir.join("lr"))?;
    create_dir(&out_dir.join("hr_t"))?;
    for s in &samples {
        io::save_png(out_dir.join(&s.record.lr_path), &s.lr)?;
        io::save_png(
            out_dir.join(&s.record.hr_transformed_path),
            &s.hr_transformed,
        )?;
    }
    let path = out_dir.join("manifest.json");
    fs::write(&path, manifest.to_json()?).map_err(|source| Error::Write { path, source })?;
    Ok(manifest)
}
