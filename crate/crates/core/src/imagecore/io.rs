use std::io::Cursor;
use std::path::Path;

use image::{ImageFormat, ImageReader};

use super::image::{quantize_u8, Encoding, Image};
use crate::error::{Error, Result};

/// Decodes PNG or JPEG bytes into an `Srgb8` image. Grey files are
/// expanded to three equal channels and alpha is dropped.
pub fn decode_image_bytes(bytes: &[u8]) -> Result<Image> {
    let reader = ImageReader::new(Cursor::new(bytes))
        .with_guessed_format()
        .map_err(|e| Error::Format(e.to_string()))?;
    match reader.format() {
        Some(ImageFormat::Png) | Some(ImageFormat::Jpeg) => {}
        other => return Err(Error::Format(format!("unsupported format {other:?}"))),
    }
    let decoded = reader.decode().map_err(|e| Error::Format(e.to_string()))?;
    let rgb = decoded.to_rgb8();
    let (w, h) = rgb.dimensions();
    Image::srgb8(w as usize, h as usize, rgb.into_raw())
}

pub fn decode_image(path: impl AsRef<Path>) -> Result<Image> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_image_bytes(&bytes)
}

/// Writes an `Srgb8` image as RGB PNG or a `GrayF` image as 8-bit grey PNG.
pub fn encode_image(img: &Image, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let (w, h) = (img.width() as u32, img.height() as u32);
    let result = match img.encoding() {
        Encoding::Srgb8 => {
            let buf = image::RgbImage::from_raw(w, h, img.as_bytes().unwrap().to_vec())
                .expect("validated buffer");
            buf.save_with_format(path, ImageFormat::Png)
        }
        Encoding::GrayF => {
            let bytes = img
                .as_floats()
                .unwrap()
                .iter()
                .map(|v| quantize_u8(v * 255.0))
                .collect();
            let buf = image::GrayImage::from_raw(w, h, bytes).expect("validated buffer");
            buf.save_with_format(path, ImageFormat::Png)
        }
        other => {
            return Err(Error::Contract(format!(
                "encode_image accepts Srgb8 or GrayF, got {other:?}"
            )))
        }
    };
    result.map_err(|e| match e {
        image::ImageError::IoError(io) => Error::io(path, io),
        other => Error::Format(other.to_string()),
    })
}

/// Image files (`.png`, `.jpg`, `.jpeg`, any case) directly inside `dir`,
/// sorted by path.
pub fn list_images(dir: impl AsRef<Path>) -> Result<Vec<std::path::PathBuf>> {
    let dir = dir.as_ref();
    let mut out = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        let is_image = path
            .extension()
            .and_then(|e| e.to_str())
            .is_some_and(|e| matches!(e.to_ascii_lowercase().as_str(), "png" | "jpg" | "jpeg"));
        if is_image && path.is_file() {
            out.push(path);
        }
    }
    out.sort();
    Ok(out)
}
