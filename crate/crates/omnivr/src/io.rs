//! PNG decoding/encoding. Samples are normalised to `[0, 1]` on load and
//! rounded to 8 bits on save; nothing else in the pipeline quantises.

use std::fs;
use std::io::Cursor;
use std::path::Path;

use image::codecs::png::PngEncoder;
use image::{DynamicImage, ExtendedColorType, ImageEncoder, ImageFormat};
use omnivr_core::Image;

use crate::error::{Error, Result};

pub fn decode_png(bytes: &[u8]) -> Result<Image> {
    let decoded = image::load_from_memory_with_format(bytes, ImageFormat::Png)?;
    let (w, h) = (decoded.width() as usize, decoded.height() as usize);
    let (channels, raw) = match decoded {
        DynamicImage::ImageLuma8(b) => (1, b.into_raw()),
        DynamicImage::ImageLumaA8(b) => (2, b.into_raw()),
        DynamicImage::ImageRgb8(b) => (3, b.into_raw()),
        DynamicImage::ImageRgba8(b) => (4, b.into_raw()),
        DynamicImage::ImageLuma16(_) => (1, decoded.to_luma8().into_raw()),
        DynamicImage::ImageLumaA16(_) => (2, decoded.to_luma_alpha8().into_raw()),
        DynamicImage::ImageRgb16(_) => (3, decoded.to_rgb8().into_raw()),
        DynamicImage::ImageRgba16(_) => (4, decoded.to_rgba8().into_raw()),
        other => return Err(Error::UnsupportedLayout(format!("{:?}", other.color()))),
    };
    let data = raw.into_iter().map(|v| v as f64 / 255.0).collect();
    Ok(Image::from_vec(h, w, channels, data)?)
}

pub fn load_png(path: impl AsRef<Path>) -> Result<Image> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|source| Error::Read {
        path: path.to_owned(),
        source,
    })?;
    decode_png(&bytes)
}

#[inline]
pub fn quantize(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

/// Rounds every sample to 8 bits and back, as a save/load cycle would.
pub fn quantized(img: &Image) -> Image {
    let data = img
        .as_slice()
        .iter()
        .map(|&v| quantize(v) as f64 / 255.0)
        .collect();
    Image::from_vec(img.height(), img.width(), img.channels(), data)
        .expect("quantising preserves shape")
}

pub fn encode_png(img: &Image) -> Result<Vec<u8>> {
    let color = match img.channels() {
        1 => ExtendedColorType::L8,
        2 => ExtendedColorType::La8,
        3 => ExtendedColorType::Rgb8,
        4 => ExtendedColorType::Rgba8,
        c => return Err(Error::UnsupportedLayout(format!("{c} channels"))),
    };
    let bytes: Vec<u8> = img.as_slice().iter().map(|&v| quantize(v)).collect();
    let mut out = Vec::new();
    PngEncoder::new(Cursor::new(&mut out)).write_image(
        &bytes,
        img.width() as u32,
        img.height() as u32,
        color,
    )?;
    Ok(out)
}

pub fn save_png(path: impl AsRef<Path>, img: &Image) -> Result<()> {
    let path = path.as_ref();
    let bytes = encode_png(img)?;
    fs::write(path, bytes).map_err(|source| Error::Write {
        path: path.to_owned(),
        source,
    })
}
