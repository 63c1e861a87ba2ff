//! Row-parallel versions of the core pipeline stages.
//!
//! Every output row is computed by exactly the same code as the sequential
//! functions in `omnivr_core`, so results are bit-identical to them and
//! independent of the thread count. Work runs on the current rayon pool; wrap
//! calls in [`ThreadPool::install`] to bound it.

use std::env;

use omnivr_core::mobius::transform_index_map_rows;
use omnivr_core::pipeline::SUPPORTED_FACTORS;
use omnivr_core::resample::Resampler;
use omnivr_core::{
    build_view_index_map, erp_grid, Error as CoreError, Image, IndexMap, Interpolation,
    MobiusMatrix, PerspectiveCamera, UserCommand,
};
use rayon::prelude::*;
use rayon::{ThreadPool, ThreadPoolBuilder};

use crate::error::{Error, Result};

pub const THREADS_ENV: &str = "OMNIVR_THREADS";

const ROWS_PER_TASK: usize = 4;

/// Builds a pool sized by `OMNIVR_THREADS`, or `None` when it is unset so
/// the global pool is used.
pub fn pool_from_env() -> Result<Option<ThreadPool>> {
    match env::var(THREADS_ENV) {
        Ok(v) => {
            let n: usize = v
                .trim()
                .parse()
                .ok()
                .filter(|&n| n > 0)
                .ok_or_else(|| Error::Threads(v.clone()))?;
            Ok(Some(ThreadPoolBuilder::new().num_threads(n).build()?))
        }
        Err(_) => Ok(None),
    }
}

/// Runs `f` on `pool` if given, otherwise on the global pool.
pub fn run_in<R: Send>(pool: Option<&ThreadPool>, f: impl FnOnce() -> R + Send) -> R {
    match pool {
        Some(p) => p.install(f),
        None => f(),
    }
}

pub fn transform_index_map(map: &IndexMap, m: &MobiusMatrix) -> IndexMap {
    let mut out = map.clone();
    let w = map.width();
    if w == 0 {
        return out;
    }
    out.as_mut_slice()
        .par_chunks_mut(w * ROWS_PER_TASK)
        .enumerate()
        .for_each(|(k, chunk)| {
            let start = k * ROWS_PER_TASK;
            transform_index_map_rows(map, m, start..start + chunk.len() / w, chunk);
        });
    out
}

pub fn resample(src: &Image, map: &IndexMap, interp: Interpolation) -> Result<Image> {
    let sampler = Resampler::new(src, interp)?;
    let (w, c) = (map.width(), src.channels());
    let mut out = Image::zeros(map.height(), w, c);
    if w == 0 || c == 0 {
        return Ok(out);
    }
    out.as_mut_slice()
        .par_chunks_mut(w * c * ROWS_PER_TASK)
        .zip(map.as_slice().par_chunks(w * ROWS_PER_TASK))
        .for_each(|(dst, coords)| sampler.sample_into(coords, dst));
    Ok(out)
}

pub fn upsample_bicubic(img: &Image, factor: usize) -> Result<Image> {
    if !SUPPORTED_FACTORS.contains(&factor) {
        return Err(CoreError::UnsupportedFactor(factor).into());
    }
    img.check_erp()?;
    if factor == 1 {
        return Ok(img.clone());
    }
    let grid = erp_grid(img.height() * factor, img.width() * factor)?;
    resample(img, &grid, Interpolation::Bicubic)
}

pub fn warp_image(img: &Image, m: &MobiusMatrix, interp: Interpolation) -> Result<Image> {
    img.check_erp()?;
    let grid = erp_grid(img.height(), img.width())?;
    let map = transform_index_map(&grid, &m.inverse());
    resample(img, &map, interp)
}

/// Parallel [`omnivr_core::transform_image`].
pub fn transform_image(
    img: &Image,
    cmd: &UserCommand,
    up_factor: usize,
    interp: Interpolation,
) -> Result<Image> {
    let m = MobiusMatrix::from_command(cmd)?;
    let hr = upsample_bicubic(img, up_factor)?;
    warp_image(&hr, &m, interp)
}

/// Parallel [`omnivr_core::projection::render_zoomed_view`].
pub fn render_view(
    img: &Image,
    cam: &PerspectiveCamera,
    zoom: f64,
    interp: Interpolation,
) -> Result<Image> {
    let m = MobiusMatrix::zoom_at(cam.center(), zoom)?;
    let mut map = build_view_index_map(cam)?;
    if zoom != 1.0 {
        map = transform_index_map(&map, &m);
    }
    resample(img, &map, interp)
}
