//! Geometry and resampling core for navigating and Möbius-zooming
//! equirectangular (ERP) panoramas.
//!
//! The crate is `no_std` and only needs `alloc`. Everything here is a pure
//! function of its inputs: file formats, threading and the HTTP service live
//! in the companion `omnivr` crate.
//!
//! The processing chain is
//!
//! ```text
//! ERP pixel ──erp_grid──▶ (θ, φ) ──sp──▶ S² ──stp──▶ ℂ ──Möbius──▶ ℂ ──stp⁻¹──▶ S² ──sp⁻¹──▶ (θ', φ')
//! ```
//!
//! followed by a resampling pass that reads the source raster at the
//! transformed coordinates.

#![no_std]
#![forbid(unsafe_code)]
// `!(x <= limit)` is used deliberately so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod error;
pub mod geometry;
pub mod image;
pub mod metrics;
pub mod mobius;
pub mod pipeline;
pub mod projection;
pub mod resample;

pub use error::{Error, Result};
pub use geometry::{
    erp_grid, spherical_to_pixel, ComplexPoint, IndexMap, SpherePoint, SphericalCoord,
};
pub use image::Image;
pub use metrics::{ws_psnr, ws_ssim, QualityReport};
pub use mobius::{transform_index_map, MobiusMatrix, UserCommand};
pub use pipeline::{downsample_bicubic, transform_image, upsample_bicubic};
pub use projection::{build_view_index_map, render_perspective, PerspectiveCamera};
pub use resample::{resample, slerp, Interpolation, LongitudeWeights, SlerpOptions};
