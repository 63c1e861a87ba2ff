//! Sampling an ERP raster at arbitrary spherical coordinates.
//!
//! Three interpolators share the same neighbourhood rules:
//!
//! * longitude is periodic, so neighbour columns wrap modulo `W`;
//! * a query between the outermost row and a pole reads its missing
//!   neighbour row from across the pole (row `-1` is row `0` shifted by
//!   half a turn, row `H` is row `H-1` shifted likewise);
//! * queries within [`SNAP_TOLERANCE`] pixels of a pixel centre are snapped
//!   onto it, so grids that should land on pixel centres reproduce their
//!   source bit-exactly despite round-off in the projection chain.
//!
//! [`Interpolation::Slerp`] is the spherical two-stage scheme: the two
//! corner pixels of the upper and lower rows are blended along their
//! great-circle arcs to the query's longitude, and those two intermediate
//! points are blended along the meridian to the query.

use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, PI, TAU};
use core::fmt;
use core::ops::Range;
use core::str::FromStr;

use num_traits::Float;

use crate::error::{Error, Result};
use crate::geometry::{spherical_to_pixel, IndexMap, SpherePoint, SphericalCoord};
use crate::image::Image;

/// Pixel distance under which a query snaps onto a pixel centre.
pub const SNAP_TOLERANCE: f64 = 1e-9;
/// Arc angles below this fall back to linear weights.
pub const DEGENERATE_ANGLE: f64 = 1e-8;
/// [`slerp`] refuses endpoints closer than this to antipodal.
pub const ANTIPODAL_MARGIN: f64 = 1e-6;
/// Catmull-Rom parameter of the bicubic kernel.
pub const CATMULL_ROM_A: f64 = -0.5;

/// How the first-stage weight along a row arc is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LongitudeWeights {
    /// `t = (θq - θ0) / (θ1 - θ0)`, treating the arc as if it stayed on the
    /// row's latitude.
    #[default]
    Simplified,
    /// The `t` whose arc point has exactly the query's longitude. The arc
    /// bulges towards the pole, so that point's latitude then feeds the
    /// meridian stage.
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SlerpOptions {
    pub longitude: LongitudeWeights,
    /// Divide each stage's weights by their sum. The raw slerp weights sum
    /// to slightly more than one inside an arc, so without this a constant
    /// image is not reproduced exactly.
    pub normalize: bool,
}

impl Default for SlerpOptions {
    fn default() -> Self {
        Self {
            longitude: LongitudeWeights::Simplified,
            normalize: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Interpolation {
    Slerp(SlerpOptions),
    Bicubic,
    Nearest,
}

impl Default for Interpolation {
    fn default() -> Self {
        Self::SLERP
    }
}

impl Interpolation {
    pub const SLERP: Interpolation = Interpolation::Slerp(SlerpOptions {
        longitude: LongitudeWeights::Simplified,
        normalize: true,
    });
    pub const SLERP_EXACT: Interpolation = Interpolation::Slerp(SlerpOptions {
        longitude: LongitudeWeights::Exact,
        normalize: true,
    });
    pub const ALL: [Interpolation; 3] = [
        Interpolation::SLERP,
        Interpolation::Bicubic,
        Interpolation::Nearest,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Interpolation::Slerp(o) => match (o.longitude, o.normalize) {
                (LongitudeWeights::Simplified, true) => "slerp",
                (LongitudeWeights::Exact, true) => "slerp-exact",
                (LongitudeWeights::Simplified, false) => "slerp-raw",
                (LongitudeWeights::Exact, false) => "slerp-exact-raw",
            },
            Interpolation::Bicubic => "bicubic",
            Interpolation::Nearest => "nearest",
        }
    }
}

impl fmt::Display for Interpolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseInterpolationError;

impl fmt::Display for ParseInterpolationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(
            "expected one of: slerp, slerp-exact, slerp-raw, slerp-exact-raw, bicubic, nearest",
        )
    }
}

impl core::error::Error for ParseInterpolationError {}

impl FromStr for Interpolation {
    type Err = ParseInterpolationError;

    fn from_str(s: &str) -> core::result::Result<Self, Self::Err> {
        let slerp = |longitude, normalize| {
            Interpolation::Slerp(SlerpOptions {
                longitude,
                normalize,
            })
        };
        Ok(match s {
            "slerp" => slerp(LongitudeWeights::Simplified, true),
            "slerp-exact" => slerp(LongitudeWeights::Exact, true),
            "slerp-raw" => slerp(LongitudeWeights::Simplified, false),
            "slerp-exact-raw" => slerp(LongitudeWeights::Exact, false),
            "bicubic" => Interpolation::Bicubic,
            "nearest" => Interpolation::Nearest,
            _ => return Err(ParseInterpolationError),
        })
    }
}

/// Raw slerp weights `(sin((1-t)α)/sin α, sin(tα)/sin α)`, linear for tiny `α`.
#[inline]
fn slerp_weights(t: f64, alpha: f64) -> (f64, f64) {
    if alpha < DEGENERATE_ANGLE {
        return (1.0 - t, t);
    }
    let s = Float::sin(alpha);
    (Float::sin((1.0 - t) * alpha) / s, Float::sin(t * alpha) / s)
}

/// Spherical linear interpolation: constant-speed motion from `a` (`t = 0`)
/// to `b` (`t = 1`) along their great circle.
pub fn slerp(a: SpherePoint, b: SpherePoint, t: f64) -> Result<SpherePoint> {
    let angle = a.angle_to(b);
    if angle > PI - ANTIPODAL_MARGIN {
        return Err(Error::DegenerateGeodesic { angle });
    }
    if angle < DEGENERATE_ANGLE {
        let p = a.scale(1.0 - t).add(b.scale(t));
        return Ok(p.normalized().unwrap_or(a));
    }
    let (wa, wb) = slerp_weights(t, angle);
    Ok(a.scale(wa).add(b.scale(wb)))
}

#[inline]
fn snap(x: f64) -> f64 {
    let r = Float::round(x);
    if Float::abs(x - r) < SNAP_TOLERANCE {
        r
    } else {
        x
    }
}

/// Catmull-Rom weights for the taps at offsets `-1, 0, 1, 2` from the
/// integer part; exactly `(0, 1, 0, 0)` at `t = 0`.
#[inline]
fn cubic_weights(t: f64) -> [f64; 4] {
    let a = CATMULL_ROM_A;
    let t2 = t * t;
    let t3 = t2 * t;
    [
        a * t3 - 2.0 * a * t2 + a * t,
        (a + 2.0) * t3 - (a + 3.0) * t2 + 1.0,
        -(a + 2.0) * t3 + (2.0 * a + 3.0) * t2 - a * t,
        -a * t3 + a * t2,
    ]
}

/// The Catmull-Rom kernel evaluated at signed distance `x`.
pub(crate) fn cubic_weights_at(x: f64) -> f64 {
    let a = CATMULL_ROM_A;
    let x = Float::abs(x);
    if x <= 1.0 {
        (a + 2.0) * x * x * x - (a + 3.0) * x * x + 1.0
    } else if x < 2.0 {
        a * x * x * x - 5.0 * a * x * x + 8.0 * a * x - 4.0 * a
    } else {
        0.0
    }
}

struct RowBlend {
    left: f64,
    right: f64,
    /// Latitude of the blended point, in the row's (possibly past-the-pole) frame.
    phi: f64,
}

/// Samples one ERP source raster. Cheap to build; shareable across threads.
pub struct Resampler<'a> {
    src: &'a Image,
    interp: Interpolation,
    height: usize,
    width: usize,
    /// Longitude step between adjacent columns.
    step: f64,
    /// Arc angle between horizontally adjacent pixels for rows `-1..=H`.
    row_alpha: Vec<f64>,
}

impl<'a> Resampler<'a> {
    pub fn new(src: &'a Image, interp: Interpolation) -> Result<Self> {
        src.check_erp()?;
        let height = src.height();
        let width = src.width();
        let step = TAU / width as f64;
        let half_step_sin = Float::sin(step / 2.0);
        let row_alpha = (-1..=height as isize)
            .map(|row| {
                let phi = virtual_phi(row, height);
                2.0 * Float::asin((Float::abs(Float::cos(phi)) * half_step_sin).min(1.0))
            })
            .collect();
        Ok(Self {
            src,
            interp,
            height,
            width,
            step,
            row_alpha,
        })
    }

    pub fn channels(&self) -> usize {
        self.src.channels()
    }

    /// Pixel `(row, col)` with columns wrapped and rows past either pole
    /// reflected over it.
    #[inline]
    fn fetch(&self, row: isize, col: isize) -> &[f64] {
        let h = self.height as isize;
        let w = self.width as isize;
        let (row, col) = if row < 0 {
            (-1 - row, col + w / 2)
        } else if row >= h {
            (2 * h - 1 - row, col + w / 2)
        } else {
            (row, col)
        };
        self.src.pixel(row as usize, col.rem_euclid(w) as usize)
    }

    /// Writes the sample at `q` into `out` (one value per channel).
    #[inline]
    pub fn sample(&self, q: SphericalCoord, out: &mut [f64]) {
        let q = q.normalized();
        let (row, col) = spherical_to_pixel(q, self.height, self.width);
        let (row, col) = (snap(row), snap(col));
        let r0 = Float::floor(row);
        let c0 = Float::floor(col);
        let fr = row - r0;
        let fc = col - c0;
        let (r0, c0) = (r0 as isize, c0 as isize);

        if fr == 0.0 && fc == 0.0 {
            out.copy_from_slice(self.fetch(r0, c0));
            return;
        }
        match self.interp {
            Interpolation::Slerp(opts) => self.sample_slerp(opts, row, r0, c0, fr, fc, out),
            Interpolation::Bicubic => self.sample_bicubic(r0, c0, fr, fc, out),
            Interpolation::Nearest => self.sample_nearest(q, r0, c0, out),
        }
    }

    /// Samples every coordinate of `coords` into consecutive pixels of `out`.
    pub fn sample_into(&self, coords: &[SphericalCoord], out: &mut [f64]) {
        let c = self.channels();
        assert_eq!(
            coords.len() * c,
            out.len(),
            "output buffer does not match coordinates"
        );
        for (q, px) in coords.iter().zip(out.chunks_exact_mut(c)) {
            self.sample(*q, px);
        }
    }

    fn blend_row(&self, opts: SlerpOptions, row: isize, fc: f64) -> RowBlend {
        let phi_row = virtual_phi(row, self.height);
        if fc == 0.0 {
            return RowBlend {
                left: 1.0,
                right: 0.0,
                phi: phi_row,
            };
        }
        let alpha = self.row_alpha[(row + 1) as usize];
        let t = match opts.longitude {
            LongitudeWeights::Simplified => fc,
            LongitudeWeights::Exact => exact_longitude_weight(fc, self.step, alpha),
        };
        let (mut left, mut right) = slerp_weights(t, alpha);
        let phi = match opts.longitude {
            LongitudeWeights::Simplified => phi_row,
            LongitudeWeights::Exact => arc_point_latitude(phi_row, left + right),
        };
        if opts.normalize {
            let sum = left + right;
            left /= sum;
            right /= sum;
        }
        RowBlend { left, right, phi }
    }

    #[allow(clippy::too_many_arguments)]
    fn sample_slerp(
        &self,
        opts: SlerpOptions,
        row: f64,
        r0: isize,
        c0: isize,
        fr: f64,
        fc: f64,
        out: &mut [f64],
    ) {
        // p0 = (r0, c0), p1 = (r0, c0+1), p2 = (r0+1, c0+1), p3 = (r0+1, c0)
        let top = self.blend_row(opts, r0, fc);
        let p0 = self.fetch(r0, c0);
        let p1 = self.fetch(r0, c0 + 1);
        if fr == 0.0 {
            for (o, (&a, &b)) in out.iter_mut().zip(p0.iter().zip(p1)) {
                *o = top.left * a + top.right * b;
            }
            return;
        }
        let bottom = self.blend_row(opts, r0 + 1, fc);
        let p2 = self.fetch(r0 + 1, c0 + 1);
        let p3 = self.fetch(r0 + 1, c0);

        let (tq, omega) = match opts.longitude {
            LongitudeWeights::Simplified => (fr, PI / self.height as f64),
            LongitudeWeights::Exact => {
                let phi_q = virtual_phi_continuous(row, self.height);
                (
                    (phi_q - top.phi) / (bottom.phi - top.phi),
                    Float::abs(bottom.phi - top.phi),
                )
            }
        };
        let (mut up, mut down) = slerp_weights(tq, omega);
        if opts.normalize {
            let sum = up + down;
            up /= sum;
            down /= sum;
        }
        for ch in 0..out.len() {
            let f01 = top.left * p0[ch] + top.right * p1[ch];
            let f23 = bottom.left * p3[ch] + bottom.right * p2[ch];
            out[ch] = up * f01 + down * f23;
        }
    }

    fn sample_bicubic(&self, r0: isize, c0: isize, fr: f64, fc: f64, out: &mut [f64]) {
        let wy = cubic_weights(fr);
        let wx = cubic_weights(fc);
        out.fill(0.0);
        for (i, &wr) in wy.iter().enumerate() {
            if wr == 0.0 {
                continue;
            }
            let r = r0 - 1 + i as isize;
            for (j, &wc) in wx.iter().enumerate() {
                let w = wr * wc;
                if w == 0.0 {
                    continue;
                }
                let px = self.fetch(r, c0 - 1 + j as isize);
                for (o, &v) in out.iter_mut().zip(px) {
                    *o += w * v;
                }
            }
        }
    }

    fn sample_nearest(&self, q: SphericalCoord, r0: isize, c0: isize, out: &mut [f64]) {
        let target = q.to_sphere();
        let corners = [(r0, c0), (r0, c0 + 1), (r0 + 1, c0 + 1), (r0 + 1, c0)];
        let mut best = corners[0];
        let mut best_dot = f64::NEG_INFINITY;
        for &(r, c) in &corners {
            let theta = self.step * (c as f64 + 0.5) - PI;
            // Past-the-pole latitudes land on the reflected pixel directly.
            let p = SphericalCoord::new(theta, virtual_phi(r, self.height)).to_sphere();
            let d = p.dot(target);
            if d > best_dot {
                best_dot = d;
                best = (r, c);
            }
        }
        out.copy_from_slice(self.fetch(best.0, best.1));
    }
}

/// Latitude of row `row`'s pixel centres; rows `-1` and `H` lie past the poles.
#[inline]
fn virtual_phi(row: isize, height: usize) -> f64 {
    FRAC_PI_2 - PI * (row as f64 + 0.5) / height as f64
}

#[inline]
fn virtual_phi_continuous(row: f64, height: usize) -> f64 {
    FRAC_PI_2 - PI * (row + 0.5) / height as f64
}

/// The slerp weight along a row arc whose point lies on the query longitude.
///
/// With `u`, `v` the longitude gaps from the query to the left and right
/// pixels, the arc point's horizontal direction hits the query longitude
/// when `sin(tα) / sin((1-t)α) = sin u / sin v`, which solves in closed form.
fn exact_longitude_weight(fc: f64, step: f64, alpha: f64) -> f64 {
    if alpha < DEGENERATE_ANGLE {
        return fc;
    }
    let ratio = Float::sin(fc * step) / Float::sin((1.0 - fc) * step);
    let (sin_a, cos_a) = Float::sin_cos(alpha);
    Float::atan2(ratio * sin_a, 1.0 + ratio * cos_a) / alpha
}

/// Latitude of an arc point between two pixels of the row at `phi_row`,
/// given the sum of its raw slerp weights, in the row's frame.
fn arc_point_latitude(phi_row: f64, weight_sum: f64) -> f64 {
    let z = (Float::sin(phi_row) * weight_sum).clamp(-1.0, 1.0);
    let real = Float::asin(z);
    if phi_row > FRAC_PI_2 {
        PI - real
    } else if phi_row < -FRAC_PI_2 {
        -PI - real
    } else {
        real
    }
}

/// Samples `src` at every entry of `map`; the output has the map's size.
pub fn resample(src: &Image, map: &IndexMap, interp: Interpolation) -> Result<Image> {
    let sampler = Resampler::new(src, interp)?;
    let mut out = Image::zeros(map.height(), map.width(), src.channels());
    sampler.sample_into(map.as_slice(), out.as_mut_slice());
    Ok(out)
}

/// Row-range form of [`resample`]: fills `out` with output rows `rows`.
pub fn resample_rows(
    src: &Image,
    map: &IndexMap,
    interp: Interpolation,
    rows: Range<usize>,
    out: &mut [f64],
) -> Result<()> {
    let sampler = Resampler::new(src, interp)?;
    let expected = rows.len() * map.width() * src.channels();
    if out.len() != expected {
        return Err(Error::ShapeMismatch {
            expected: (rows.len(), map.width(), src.channels()),
            found: (out.len(), 1, 1),
        });
    }
    sampler.sample_into(map.rows(rows), out);
    Ok(())
}

pub fn spherical_resample(src: &Image, map: &IndexMap) -> Result<Image> {
    resample(src, map, Interpolation::SLERP)
}

pub fn bicubic_resample(src: &Image, map: &IndexMap) -> Result<Image> {
    resample(src, map, Interpolation::Bicubic)
}

pub fn nearest_resample(src: &Image, map: &IndexMap) -> Result<Image> {
    resample(src, map, Interpolation::Nearest)
}
