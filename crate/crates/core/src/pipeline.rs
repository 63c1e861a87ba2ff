//! End-to-end ERP transformation: upsample to the high-resolution grid,
//! then warp it backward through a command-derived Möbius map.
//!
//! Warping pulls every output pixel from the source location given by the
//! inverse transform, so the output has no holes. With this convention a
//! horizontal rotation `β = 2πk/W` moves image content `k` columns towards
//! larger column indices (eastwards).

use alloc::vec::Vec;

use num_traits::Float;

use crate::error::{Error, Result};
use crate::geometry::{erp_grid, IndexMap};
use crate::image::Image;
use crate::mobius::{transform_index_map, MobiusMatrix, UserCommand};
use crate::resample::{cubic_weights_at, resample, Interpolation};

/// Up-sampling factors accepted by [`upsample_bicubic`].
pub const SUPPORTED_FACTORS: [usize; 5] = [1, 2, 4, 8, 16];

fn check_factor(factor: usize) -> Result<()> {
    if SUPPORTED_FACTORS.contains(&factor) {
        Ok(())
    } else {
        Err(Error::UnsupportedFactor(factor))
    }
}

/// Bicubic up-sampling of an ERP raster onto the `factor`-times finer grid.
pub fn upsample_bicubic(img: &Image, factor: usize) -> Result<Image> {
    check_factor(factor)?;
    img.check_erp()?;
    if factor == 1 {
        return Ok(img.clone());
    }
    let grid = erp_grid(img.height() * factor, img.width() * factor)?;
    resample(img, &grid, Interpolation::Bicubic)
}

/// Anti-aliased bicubic down-sampling by an integer `factor`: the
/// Catmull-Rom kernel is stretched by `factor` and its taps renormalised.
/// Columns wrap; rows past a pole read across it.
pub fn downsample_bicubic(img: &Image, factor: usize) -> Result<Image> {
    img.check_erp()?;
    if factor == 0 || !img.height().is_multiple_of(factor) {
        return Err(Error::UnsupportedFactor(factor));
    }
    let (h, w, c) = img.shape();
    let (lh, lw) = (h / factor, w / factor);
    if lh < 2 {
        return Err(Error::TooSmall {
            height: lh,
            width: lw,
            min: 2,
        });
    }
    if factor == 1 {
        return Ok(img.clone());
    }
    let taps = stretched_taps(factor);

    // Horizontal pass: h x lw.
    let mut tmp = alloc::vec![0.0; h * lw * c];
    for row in 0..h {
        let src_row = img.row(row);
        for col in 0..lw {
            let dst = &mut tmp[(row * lw + col) * c..(row * lw + col + 1) * c];
            let base = (col * factor) as isize;
            for &(offset, wt) in &taps {
                let sc = (base + offset).rem_euclid(w as isize) as usize;
                for (d, s) in dst.iter_mut().zip(&src_row[sc * c..(sc + 1) * c]) {
                    *d += wt * s;
                }
            }
        }
    }

    // Vertical pass with reflection over the poles; half a turn is lw / 2 columns.
    let mut out = Image::zeros(lh, lw, c);
    for row in 0..lh {
        let base = (row * factor) as isize;
        for col in 0..lw {
            let dst = out.pixel_mut(row, col);
            for &(offset, wt) in &taps {
                let sr = base + offset;
                let (sr, sc) = if sr < 0 {
                    (-1 - sr, (col + lw / 2) % lw)
                } else if sr >= h as isize {
                    (2 * h as isize - 1 - sr, (col + lw / 2) % lw)
                } else {
                    (sr, col)
                };
                let sr = sr as usize;
                let s = &tmp[(sr * lw + sc) * c..(sr * lw + sc + 1) * c];
                for (d, v) in dst.iter_mut().zip(s) {
                    *d += wt * v;
                }
            }
        }
    }
    Ok(out)
}

/// Offsets (relative to `i * factor`) and normalised weights of one output
/// sample whose centre sits at `(i + 0.5) * factor - 0.5` in input pixels.
fn stretched_taps(factor: usize) -> Vec<(isize, f64)> {
    let f = factor as f64;
    let center = 0.5 * f - 0.5;
    let lo = Float::ceil(center - 2.0 * f) as isize;
    let hi = Float::floor(center + 2.0 * f) as isize;
    let mut taps: Vec<(isize, f64)> = (lo..=hi)
        .map(|k| (k, cubic_weights_at((k as f64 - center) / f)))
        .filter(|&(_, w)| w != 0.0)
        .collect();
    let sum: f64 = taps.iter().map(|t| t.1).sum();
    for t in &mut taps {
        t.1 /= sum;
    }
    taps
}

/// Index map that warps an `height x width` ERP raster by `m`: entry
/// `(i, j)` is where output pixel `(i, j)` reads the source.
pub fn backward_index_map(height: usize, width: usize, m: &MobiusMatrix) -> Result<IndexMap> {
    Ok(transform_index_map(&erp_grid(height, width)?, &m.inverse()))
}

/// Warps an ERP raster by the sphere map of `m` without changing its size.
pub fn warp_image(img: &Image, m: &MobiusMatrix, interp: Interpolation) -> Result<Image> {
    img.check_erp()?;
    let map = backward_index_map(img.height(), img.width(), m)?;
    resample(img, &map, interp)
}

/// Upsamples by `up_factor`, then applies the Möbius transform of `cmd`.
/// The output is `up_factor` times larger than `img` in both directions.
pub fn transform_image(
    img: &Image,
    cmd: &UserCommand,
    up_factor: usize,
    interp: Interpolation,
) -> Result<Image> {
    let m = MobiusMatrix::from_command(cmd)?;
    check_factor(up_factor)?;
    let hr = upsample_bicubic(img, up_factor)?;
    warp_image(&hr, &m, interp)
}
