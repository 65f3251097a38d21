use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Colour encoding of an [`Image`] buffer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Encoding {
    /// Gamma-encoded sRGB, 8 bits per channel, 3 channels.
    Srgb8,
    /// Linear-light sRGB primaries in [0, 1], 3 channels.
    LinearRgbF,
    /// CIELAB under D65, L* in [0, 100], 3 channels.
    CielabF,
    /// Single channel in [0, 1].
    GrayF,
}

impl Encoding {
    pub fn channels(self) -> usize {
        match self {
            Encoding::GrayF => 1,
            _ => 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Buffer {
    U8(Vec<u8>),
    F64(Vec<f64>),
}

/// Row-major pixel buffer tagged with its colour encoding.
///
/// `Srgb8` images store bytes; every other encoding stores `f64`. The
/// constructors check the buffer length and value ranges so that an
/// `Image` in hand is always well formed.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    width: usize,
    height: usize,
    encoding: Encoding,
    data: Buffer,
}

fn check_dims(width: usize, height: usize, channels: usize, len: usize) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(Error::Contract(format!(
            "image dimensions must be nonzero, got {width}x{height}"
        )));
    }
    let expected = width
        .checked_mul(height)
        .and_then(|n| n.checked_mul(channels))
        .ok_or_else(|| Error::Contract("image dimensions overflow".into()))?;
    if expected != len {
        return Err(Error::Contract(format!(
            "buffer length {len} does not match {width}x{height}x{channels}"
        )));
    }
    Ok(())
}

impl Image {
    pub fn srgb8(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        check_dims(width, height, 3, data.len())?;
        Ok(Image {
            width,
            height,
            encoding: Encoding::Srgb8,
            data: Buffer::U8(data),
        })
    }

    /// Builds a floating-point image, validating the range rules of `encoding`.
    pub fn float(width: usize, height: usize, encoding: Encoding, data: Vec<f64>) -> Result<Self> {
        if encoding == Encoding::Srgb8 {
            return Err(Error::Contract("Srgb8 images must be built from bytes".into()));
        }
        check_dims(width, height, encoding.channels(), data.len())?;
        let ok = match encoding {
            Encoding::CielabF => data
                .chunks_exact(3)
                .all(|p| p.iter().all(|v| v.is_finite()) && (0.0..=100.0).contains(&p[0])),
            _ => data.iter().all(|v| (0.0..=1.0).contains(v)),
        };
        if !ok {
            return Err(Error::Contract(format!("values out of range for {encoding:?}")));
        }
        Ok(Image {
            width,
            height,
            encoding,
            data: Buffer::F64(data),
        })
    }

    pub fn filled_srgb(width: usize, height: usize, rgb: [u8; 3]) -> Result<Self> {
        Self::srgb8(width, height, rgb.repeat(width * height))
    }

    /// Builds an sRGB image by evaluating `f(x, y)` at every pixel.
    pub fn from_fn_srgb(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> [u8; 3],
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height * 3);
        for y in 0..height {
            for x in 0..width {
                data.extend_from_slice(&f(x, y));
            }
        }
        Self::srgb8(width, height, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.encoding.channels()
    }

    pub fn encoding(&self) -> Encoding {
        self.encoding
    }

    pub fn pixel_count(&self) -> usize {
        self.width * self.height
    }

    /// Byte buffer of an `Srgb8` image.
    pub fn as_bytes(&self) -> Option<&[u8]> {
        match &self.data {
            Buffer::U8(v) => Some(v),
            Buffer::F64(_) => None,
        }
    }

    /// Float buffer of a non-`Srgb8` image.
    pub fn as_floats(&self) -> Option<&[f64]> {
        match &self.data {
            Buffer::F64(v) => Some(v),
            Buffer::U8(_) => None,
        }
    }

    pub fn into_bytes(self) -> Option<Vec<u8>> {
        match self.data {
            Buffer::U8(v) => Some(v),
            Buffer::F64(_) => None,
        }
    }

    pub fn rgb_at(&self, x: usize, y: usize) -> Option<[u8; 3]> {
        let bytes = self.as_bytes()?;
        let i = (y * self.width + x) * 3;
        Some([bytes[i], bytes[i + 1], bytes[i + 2]])
    }

    /// Returns the sRGB bytes or a contract error naming `op`.
    pub(crate) fn require_srgb(&self, op: &str) -> Result<&[u8]> {
        self.as_bytes().ok_or_else(|| {
            Error::Contract(format!("{op} requires an Srgb8 image, got {:?}", self.encoding))
        })
    }

    /// Channel `c` as a plane of f64 values in the image's native units.
    pub fn plane(&self, c: usize) -> Vec<f64> {
        let n = self.channels();
        match &self.data {
            Buffer::U8(v) => v.iter().skip(c).step_by(n).map(|&b| b as f64).collect(),
            Buffer::F64(v) => v.iter().skip(c).step_by(n).copied().collect(),
        }
    }

    /// Crops the rectangle `[x0, x0+w) x [y0, y0+h)`.
    pub fn crop(&self, x0: usize, y0: usize, w: usize, h: usize) -> Result<Image> {
        if w == 0 || h == 0 || x0 + w > self.width || y0 + h > self.height {
            return Err(Error::Contract(format!(
                "crop {w}x{h}+{x0}+{y0} outside {}x{}",
                self.width, self.height
            )));
        }
        let n = self.channels();
        let rows = y0..y0 + h;
        let span = |y: usize| (y * self.width + x0) * n..(y * self.width + x0 + w) * n;
        let data = match &self.data {
            Buffer::U8(v) => Buffer::U8(rows.flat_map(|y| v[span(y)].to_vec()).collect()),
            Buffer::F64(v) => Buffer::F64(rows.flat_map(|y| v[span(y)].to_vec()).collect()),
        };
        Ok(Image {
            width: w,
            height: h,
            encoding: self.encoding,
            data,
        })
    }

    pub(crate) fn from_planes_unchecked(
        width: usize,
        height: usize,
        encoding: Encoding,
        planes: &[Vec<f64>],
    ) -> Image {
        let n = planes.len();
        let mut out = Vec::with_capacity(width * height * n);
        for i in 0..width * height {
            out.extend(planes.iter().map(|p| p[i]));
        }
        match encoding {
            Encoding::Srgb8 => Image {
                width,
                height,
                encoding,
                data: Buffer::U8(out.into_iter().map(quantize_u8).collect()),
            },
            _ => Image {
                width,
                height,
                encoding,
                data: Buffer::F64(out),
            },
        }
    }
}

/// Rounds to the nearest code value, halves away from zero, and clamps.
pub fn quantize_u8(v: f64) -> u8 {
    v.clamp(0.0, 255.0).round() as u8
}

/// Per-pixel weights in [0, 1]; 1 marks foreground / included pixels.
#[derive(Debug, Clone, PartialEq)]
pub struct Mask {
    width: usize,
    height: usize,
    weights: Vec<f64>,
}

impl Mask {
    pub fn new(width: usize, height: usize, weights: Vec<f64>) -> Result<Self> {
        check_dims(width, height, 1, weights.len())?;
        if weights.iter().any(|w| !(0.0..=1.0).contains(w)) {
            return Err(Error::Contract("mask weights must lie in [0, 1]".into()));
        }
        Ok(Mask {
            width,
            height,
            weights,
        })
    }

    pub fn filled(width: usize, height: usize, weight: f64) -> Result<Self> {
        Self::new(width, height, vec![weight; width * height])
    }

    /// Centred ellipse with semi-axes `semi_x`, `semi_y` (pixels).
    ///
    /// Pixels whose centre lies inside the ellipse get weight 1. Outside,
    /// the weight falls linearly to 0 over `feather` pixels measured along
    /// the ray from the centre; `feather == 0` gives a hard mask.
    pub fn ellipse(width: usize, height: usize, semi_x: f64, semi_y: f64, feather: f64) -> Result<Self> {
        if !(semi_x > 0.0 && semi_y > 0.0 && feather >= 0.0) {
            return Err(Error::Parameter(format!(
                "ellipse needs positive semi-axes and non-negative feather, got ({semi_x}, {semi_y}, {feather})"
            )));
        }
        let cx = width as f64 / 2.0;
        let cy = height as f64 / 2.0;
        let mut weights = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                let dx = x as f64 + 0.5 - cx;
                let dy = y as f64 + 0.5 - cy;
                let rho = ((dx / semi_x).powi(2) + (dy / semi_y).powi(2)).sqrt();
                let w = if rho <= 1.0 {
                    1.0
                } else if feather == 0.0 {
                    0.0
                } else {
                    let outside = dx.hypot(dy) * (1.0 - 1.0 / rho);
                    (1.0 - outside / feather).clamp(0.0, 1.0)
                };
                weights.push(w);
            }
        }
        Self::new(width, height, weights)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Whether pixel `i` takes part in masked statistics (weight ≥ 0.5).
    pub fn includes(&self, i: usize) -> bool {
        self.weights[i] >= 0.5
    }

    pub(crate) fn check_matches(&self, width: usize, height: usize) -> Result<()> {
        if self.width != width || self.height != height {
            return Err(Error::Contract(format!(
                "mask is {}x{} but image is {width}x{height}",
                self.width, self.height
            )));
        }
        Ok(())
    }
}

/// One real value per pixel.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    pub width: usize,
    pub height: usize,
    pub values: Vec<f64>,
}

impl ScalarField {
    pub fn new(width: usize, height: usize, values: Vec<f64>) -> Result<Self> {
        check_dims(width, height, 1, values.len())?;
        Ok(ScalarField {
            width,
            height,
            values,
        })
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.values[y * self.width + x]
    }
}
