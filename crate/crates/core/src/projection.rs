//! Rectilinear (pinhole) views of an ERP panorama.
//!
//! The camera looks along `(yaw, pitch)`; screen-right points towards
//! increasing longitude and screen-up towards increasing latitude, so a
//! view reads the panorama the same way round as the ERP raster. Roll is
//! always zero.

use core::f64::consts::FRAC_PI_2;

use num_traits::Float;

use crate::error::{Error, Result};
use crate::geometry::{IndexMap, SpherePoint, SphericalCoord};
use crate::image::Image;
use crate::mobius::{transform_index_map, MobiusMatrix};
use crate::resample::{resample, Interpolation};

pub const MIN_FOV: f64 = 0.01;
pub const PITCH_LIMIT: f64 = FRAC_PI_2 - 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerspectiveCamera {
    /// Longitude of the view centre, radians.
    pub yaw: f64,
    /// Latitude of the view centre, radians.
    pub pitch: f64,
    /// Horizontal field of view, radians.
    pub fov_h: f64,
    pub width: usize,
    pub height: usize,
}

impl PerspectiveCamera {
    pub fn new(yaw: f64, pitch: f64, fov_h: f64, width: usize, height: usize) -> Result<Self> {
        let cam = Self {
            yaw,
            pitch,
            fov_h,
            width,
            height,
        };
        cam.validate()?;
        Ok(cam)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.yaw.is_finite() {
            return Err(Error::InvalidCamera("yaw must be finite"));
        }
        if !(Float::abs(self.pitch) <= PITCH_LIMIT) {
            return Err(Error::InvalidCamera(
                "pitch must satisfy |pitch| <= pi/2 - 1e-6",
            ));
        }
        if !(self.fov_h > MIN_FOV && self.fov_h < core::f64::consts::PI - MIN_FOV) {
            return Err(Error::InvalidCamera("fov must lie in (0.01, pi - 0.01)"));
        }
        if self.width == 0 || self.height == 0 {
            return Err(Error::InvalidCamera("output size must be non-zero"));
        }
        Ok(())
    }

    /// Focal length in pixels.
    pub fn focal(&self) -> f64 {
        (self.width as f64 / 2.0) / Float::tan(self.fov_h / 2.0)
    }

    pub fn fov_v(&self) -> f64 {
        2.0 * Float::atan(self.height as f64 / self.width as f64 * Float::tan(self.fov_h / 2.0))
    }

    pub fn center(&self) -> SphericalCoord {
        SphericalCoord::new(self.yaw, self.pitch).normalized()
    }

    /// Unit ray through the continuous image-plane position `(x, y)`, in
    /// pixels from the top-left corner; pixel `(i, j)` has its centre at
    /// `(j + 0.5, i + 0.5)`.
    pub fn ray(&self, x: f64, y: f64) -> SpherePoint {
        let f = self.focal();
        let u = x - self.width as f64 / 2.0;
        let v = self.height as f64 / 2.0 - y;
        let (sp, cp) = Float::sin_cos(self.pitch);
        let (sy, cy) = Float::sin_cos(self.yaw);
        let forward = SpherePoint::new(cp * cy, cp * sy, sp);
        let right = SpherePoint::new(-sy, cy, 0.0);
        let up = SpherePoint::new(-sp * cy, -sp * sy, cp);
        let d = forward.scale(f).add(right.scale(u)).add(up.scale(v));
        d.scale(1.0 / d.norm())
    }
}

/// Per-pixel viewing directions of `cam`.
pub fn build_view_index_map(cam: &PerspectiveCamera) -> Result<IndexMap> {
    cam.validate()?;
    Ok(IndexMap::from_fn(cam.height, cam.width, |row, col| {
        cam.ray(col as f64 + 0.5, row as f64 + 0.5)
            .to_spherical_unchecked()
    }))
}

/// Renders the view of `img` seen by `cam`.
pub fn render_perspective(
    img: &Image,
    cam: &PerspectiveCamera,
    interp: Interpolation,
) -> Result<Image> {
    let map = build_view_index_map(cam)?;
    resample(img, &map, interp)
}

/// Viewing directions of `cam` after magnifying the panorama by `zoom`
/// about the view centre.
///
/// `zoom` is the on-screen magnification at the centre: each direction `v`
/// reads the panorama at `M v` with `M = MobiusMatrix::zoom_at(center, zoom)`,
/// which pulls directions towards the centre when `zoom > 1`. `zoom == 1`
/// returns the plain view map.
pub fn zoomed_view_index_map(cam: &PerspectiveCamera, zoom: f64) -> Result<IndexMap> {
    let m = MobiusMatrix::zoom_at(cam.center(), zoom)?;
    let map = build_view_index_map(cam)?;
    if zoom == 1.0 {
        return Ok(map);
    }
    Ok(transform_index_map(&map, &m))
}

/// One resampling pass rendering a zoomed perspective view.
pub fn render_zoomed_view(
    img: &Image,
    cam: &PerspectiveCamera,
    zoom: f64,
    interp: Interpolation,
) -> Result<Image> {
    let map = zoomed_view_index_map(cam, zoom)?;
    resample(img, &map, interp)
}
