//! Raster file formats.
//!
//! Depth maps are single-channel 16-bit PNG or binary PGM holding
//! `round(meters / scale)`; 0 marks an invalid pixel. Binary masks are 8-bit
//! gray with edges at 255. Soft masks store `round(p · 255)`.

use std::path::Path;

use image::{DynamicImage, ImageBuffer, ImageFormat, Luma, Rgb};

use furrow_core::image::INVALID_DEPTH;
use furrow_core::{DepthMap, EdgeMask, RgbImage, SoftMask};

use crate::error::{Error, Result};

/// Meters per stored depth unit unless configured otherwise.
pub const DEFAULT_DEPTH_SCALE: f64 = 0.001;

fn open(path: &Path) -> Result<DynamicImage> {
    image::open(path).map_err(|source| Error::Image {
        path: path.to_path_buf(),
        source,
    })
}

fn format_for(path: &Path) -> Result<ImageFormat> {
    match path
        .extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase)
        .as_deref()
    {
        Some("png") => Ok(ImageFormat::Png),
        Some("pgm") | Some("pnm") => Ok(ImageFormat::Pnm),
        _ => Err(Error::format(path, "expected a .png or .pgm file name")),
    }
}

fn ensure_parent(path: &Path) -> Result<()> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() => std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e)),
        _ => Ok(()),
    }
}

fn save(img: DynamicImage, path: &Path) -> Result<()> {
    let format = format_for(path)?;
    ensure_parent(path)?;
    img.save_with_format(path, format).map_err(|source| Error::Image {
        path: path.to_path_buf(),
        source,
    })
}

fn check_scale(scale: f64) -> Result<()> {
    if scale > 0.0 && scale.is_finite() {
        Ok(())
    } else {
        Err(Error::Core(furrow_core::Error::InvalidParameter(
            "depth scale must be positive",
        )))
    }
}

/// Stored units to meters. 8-bit inputs are taken as raw units, not rescaled.
pub fn depth_from_units(width: usize, height: usize, units: &[u16], scale: f64) -> Result<DepthMap> {
    check_scale(scale)?;
    let data = units
        .iter()
        .map(|&u| {
            if u == 0 {
                INVALID_DEPTH
            } else {
                (f64::from(u) * scale) as f32
            }
        })
        .collect();
    Ok(DepthMap::new(width, height, data)?)
}

/// Meters to stored units; invalid, negative and non-finite depths become 0,
/// ranges beyond the 16-bit limit saturate.
pub fn depth_to_units(depth: &DepthMap, scale: f64) -> Result<Vec<u16>> {
    check_scale(scale)?;
    Ok(depth
        .data()
        .iter()
        .map(|&d| {
            if d.is_finite() && d > INVALID_DEPTH {
                (f64::from(d) / scale).round().clamp(0.0, f64::from(u16::MAX)) as u16
            } else {
                0
            }
        })
        .collect())
}

pub fn load_depth(path: &Path, scale: f64) -> Result<DepthMap> {
    let img = open(path)?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    let units: Vec<u16> = match img {
        DynamicImage::ImageLuma16(buf) => buf.into_raw(),
        DynamicImage::ImageLuma8(buf) => buf.into_raw().into_iter().map(u16::from).collect(),
        _ => return Err(Error::format(path, "depth maps must be single-channel")),
    };
    depth_from_units(w, h, &units, scale)
}

pub fn save_depth(path: &Path, depth: &DepthMap, scale: f64) -> Result<()> {
    let units = depth_to_units(depth, scale)?;
    let buf = ImageBuffer::<Luma<u16>, _>::from_raw(depth.width() as u32, depth.height() as u32, units)
        .expect("buffer length matches dims");
    save(DynamicImage::ImageLuma16(buf), path)
}

pub fn load_rgb(path: &Path) -> Result<RgbImage> {
    let img = open(path)?.into_rgb8();
    let (w, h) = (img.width() as usize, img.height() as usize);
    Ok(RgbImage::from_raw_rgb(w, h, img.as_raw())?)
}

pub fn save_rgb(path: &Path, img: &RgbImage) -> Result<()> {
    let buf = ImageBuffer::<Rgb<u8>, _>::from_raw(img.width() as u32, img.height() as u32, img.to_raw_rgb())
        .expect("buffer length matches dims");
    save(DynamicImage::ImageRgb8(buf), path)
}

fn gray8(path: &Path) -> Result<(usize, usize, Vec<u8>)> {
    let img = open(path)?;
    if img.color().has_color() {
        return Err(Error::format(path, "masks must be single-channel"));
    }
    let img = img.into_luma8();
    Ok((img.width() as usize, img.height() as usize, img.into_raw()))
}

fn save_gray8(path: &Path, width: usize, height: usize, data: Vec<u8>) -> Result<()> {
    let buf =
        ImageBuffer::<Luma<u8>, _>::from_raw(width as u32, height as u32, data).expect("buffer length matches dims");
    save(DynamicImage::ImageLuma8(buf), path)
}

/// Any pixel above mid-gray is an edge.
pub fn load_mask(path: &Path) -> Result<EdgeMask> {
    let (w, h, data) = gray8(path)?;
    Ok(EdgeMask::new(w, h, data.into_iter().map(|v| v > 127).collect())?)
}

pub fn save_mask(path: &Path, mask: &EdgeMask) -> Result<()> {
    let data = mask.data().iter().map(|&e| if e { 255 } else { 0 }).collect();
    save_gray8(path, mask.width(), mask.height(), data)
}

pub fn load_soft_mask(path: &Path) -> Result<SoftMask> {
    let (w, h, data) = gray8(path)?;
    Ok(SoftMask::new(
        w,
        h,
        data.into_iter().map(|v| f32::from(v) / 255.0).collect(),
    )?)
}

pub fn save_soft_mask(path: &Path, mask: &SoftMask) -> Result<()> {
    let data = mask
        .data()
        .iter()
        .map(|&p| (f64::from(p).clamp(0.0, 1.0) * 255.0).round() as u8)
        .collect();
    save_gray8(path, mask.width(), mask.height(), data)
}
