//! Latitude-weighted PSNR and SSIM for ERP images.
//!
//! Every ERP row covers the same number of pixels, but rows near the poles
//! cover far less of the sphere; each row is weighted by the cosine of its
//! latitude.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_traits::Float;

use crate::error::{Error, Result};
use crate::geometry::check_erp;
use crate::image::Image;

/// Reported instead of `+∞` when the weighted error is zero.
pub const PSNR_CAP: f64 = 99.0;
pub const SSIM_WINDOW: usize = 11;
pub const SSIM_SIGMA: f64 = 1.5;
pub const SSIM_K1: f64 = 0.01;
pub const SSIM_K2: f64 = 0.03;
/// Dynamic range of normalised samples.
pub const DYNAMIC_RANGE: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QualityReport {
    pub ws_psnr: f64,
    pub ws_ssim: f64,
    pub width: usize,
    pub height: usize,
}

/// Row weights `cos((i + 0.5 - H/2) π / H)` of an `height x width` ERP
/// raster; every column of a row shares its row's weight.
pub fn latitude_weights(height: usize, width: usize) -> Result<Vec<f64>> {
    check_erp(height, width)?;
    Ok(row_weights(height))
}

fn row_weights(height: usize) -> Vec<f64> {
    let h = height as f64;
    (0..height)
        .map(|i| Float::cos((i as f64 + 0.5 - h / 2.0) * PI / h))
        .collect()
}

fn check_weights(img: &Image, weights: &[f64]) -> Result<()> {
    if weights.len() != img.height() {
        return Err(Error::ShapeMismatch {
            expected: (img.height(), 1, 1),
            found: (weights.len(), 1, 1),
        });
    }
    Ok(())
}

pub fn ws_psnr(reference: &Image, test: &Image) -> Result<f64> {
    ws_psnr_weighted(reference, test, &row_weights(reference.height()))
}

/// WS-PSNR with caller-supplied row weights (e.g. zero outside a latitude band).
pub fn ws_psnr_weighted(reference: &Image, test: &Image, weights: &[f64]) -> Result<f64> {
    reference.check_same_shape(test)?;
    check_weights(reference, weights)?;
    let (h, w, c) = reference.shape();
    let mut num = 0.0;
    let mut den = 0.0;
    for (row, &wt) in weights.iter().enumerate().take(h) {
        if wt == 0.0 {
            continue;
        }
        let a = reference.row(row);
        let b = test.row(row);
        let mut row_err = 0.0;
        for px in 0..w {
            let mut e = 0.0;
            for ch in 0..c {
                let d = a[px * c + ch] - b[px * c + ch];
                e += d * d;
            }
            row_err += e / c as f64;
        }
        num += wt * row_err;
        den += wt * w as f64;
    }
    let wmse = num / den;
    if wmse == 0.0 {
        return Ok(PSNR_CAP);
    }
    Ok((10.0 * Float::log10(DYNAMIC_RANGE * DYNAMIC_RANGE / wmse)).min(PSNR_CAP))
}

/// Row weights that keep only rows whose centre latitude satisfies
/// `|φ| <= max_abs_lat`.
pub fn band_weights(height: usize, max_abs_lat: f64) -> Vec<f64> {
    let h = height as f64;
    row_weights(height)
        .into_iter()
        .enumerate()
        .map(|(i, w)| {
            let phi = PI / 2.0 - PI * (i as f64 + 0.5) / h;
            if Float::abs(phi) <= max_abs_lat {
                w
            } else {
                0.0
            }
        })
        .collect()
}

fn gaussian_window() -> [f64; SSIM_WINDOW] {
    let mut g = [0.0; SSIM_WINDOW];
    let half = (SSIM_WINDOW / 2) as f64;
    for (i, v) in g.iter_mut().enumerate() {
        let x = i as f64 - half;
        *v = Float::exp(-x * x / (2.0 * SSIM_SIGMA * SSIM_SIGMA));
    }
    let sum: f64 = g.iter().sum();
    for v in &mut g {
        *v /= sum;
    }
    g
}

pub fn ws_ssim(reference: &Image, test: &Image) -> Result<f64> {
    ws_ssim_weighted(reference, test, &row_weights(reference.height()))
}

/// Latitude-weighted mean of the SSIM map.
///
/// The Gaussian window wraps around in longitude and is only evaluated on
/// rows where it fits vertically. Per-pixel SSIM is averaged over channels
/// before weighting.
pub fn ws_ssim_weighted(reference: &Image, test: &Image, weights: &[f64]) -> Result<f64> {
    reference.check_same_shape(test)?;
    check_weights(reference, weights)?;
    let (h, w, _) = reference.shape();
    if h < SSIM_WINDOW || w < SSIM_WINDOW {
        return Err(Error::TooSmall {
            height: h,
            width: w,
            min: SSIM_WINDOW,
        });
    }
    let map = ssim_map(reference, test);
    let half = SSIM_WINDOW / 2;
    let mut num = 0.0;
    let mut den = 0.0;
    for (k, row) in map.chunks_exact(w).enumerate() {
        let wt = weights[k + half];
        num += wt * row.iter().sum::<f64>();
        den += wt * w as f64;
    }
    Ok(num / den)
}

/// SSIM map of the rows `half..h-half`, averaged over channels.
fn ssim_map(a: &Image, b: &Image) -> Vec<f64> {
    let (h, w, c) = a.shape();
    let half = SSIM_WINDOW / 2;
    let out_rows = h - 2 * half;
    let g = gaussian_window();
    let c1 = (SSIM_K1 * DYNAMIC_RANGE) * (SSIM_K1 * DYNAMIC_RANGE);
    let c2 = (SSIM_K2 * DYNAMIC_RANGE) * (SSIM_K2 * DYNAMIC_RANGE);
    let mut map = vec![0.0; out_rows * w];

    // Five filtered moments per pixel: x, y, xx, yy, xy.
    let mut horiz = vec![[0.0f64; 5]; h * w];
    for ch in 0..c {
        for row in 0..h {
            let ra = a.row(row);
            let rb = b.row(row);
            for col in 0..w {
                let mut acc = [0.0; 5];
                for (k, &gk) in g.iter().enumerate() {
                    let sc = (col + w + k - half) % w;
                    let x = ra[sc * c + ch];
                    let y = rb[sc * c + ch];
                    acc[0] += gk * x;
                    acc[1] += gk * y;
                    acc[2] += gk * (x * x);
                    acc[3] += gk * (y * y);
                    acc[4] += gk * (x * y);
                }
                horiz[row * w + col] = acc;
            }
        }
        for orow in 0..out_rows {
            for col in 0..w {
                let mut m = [0.0; 5];
                for (k, &gk) in g.iter().enumerate() {
                    let src = &horiz[(orow + k) * w + col];
                    for (mi, si) in m.iter_mut().zip(src) {
                        *mi += gk * si;
                    }
                }
                let (mx, my) = (m[0], m[1]);
                let sxx = m[2] - mx * mx;
                let syy = m[3] - my * my;
                let sxy = m[4] - mx * my;
                let s = ((2.0 * mx * my + c1) * (2.0 * sxy + c2))
                    / ((mx * mx + my * my + c1) * (sxx + syy + c2));
                map[orow * w + col] += s;
            }
        }
    }
    if c > 1 {
        for v in &mut map {
            *v /= c as f64;
        }
    }
    map
}

pub fn evaluate(reference: &Image, test: &Image) -> Result<QualityReport> {
    Ok(QualityReport {
        ws_psnr: ws_psnr(reference, test)?,
        ws_ssim: ws_ssim(reference, test)?,
        width: reference.width(),
        height: reference.height(),
    })
}
