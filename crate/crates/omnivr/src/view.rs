//! A single perspective-view request, shared by the CLI and the HTTP service
//! so both paths produce identical bytes.

use std::f64::consts::FRAC_PI_2;

use omnivr_core::{Image, Interpolation, PerspectiveCamera};

use crate::error::{Error, Result};
use crate::{io, parallel};

/// Largest raster a view may request, in pixels.
pub const MAX_VIEW_PIXELS: usize = 4096 * 4096;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ViewRequest {
    pub yaw: f64,
    pub pitch: f64,
    pub fov: f64,
    /// On-screen magnification about the view centre.
    pub zoom: f64,
    pub width: usize,
    pub height: usize,
    pub interp: Interpolation,
}

impl Default for ViewRequest {
    fn default() -> Self {
        Self {
            yaw: 0.0,
            pitch: 0.0,
            fov: FRAC_PI_2,
            zoom: 1.0,
            width: 512,
            height: 512,
            interp: Interpolation::SLERP,
        }
    }
}

impl ViewRequest {
    pub fn check_size(&self) -> Result<()> {
        match self.width.checked_mul(self.height) {
            Some(n) if n <= MAX_VIEW_PIXELS => Ok(()),
            _ => Err(Error::TooLarge {
                width: self.width,
                height: self.height,
            }),
        }
    }

    pub fn camera(&self) -> Result<PerspectiveCamera> {
        Ok(PerspectiveCamera::new(
            self.yaw,
            self.pitch,
            self.fov,
            self.width,
            self.height,
        )?)
    }

    pub fn render(&self, panorama: &Image) -> Result<Image> {
        self.check_size()?;
        let cam = self.camera()?;
        parallel::render_view(panorama, &cam, self.zoom, self.interp)
    }

    pub fn render_png(&self, panorama: &Image) -> Result<Vec<u8>> {
        io::encode_png(&self.render(panorama)?)
    }
}
