//! sRGB, linear RGB, XYZ and CIELAB conversions.
//!
//! Everything is fixed to the sRGB primaries and the D65 white point. The
//! matrices are the IEC 61966-2-1 values; the white point is the XYZ of
//! linear RGB (1, 1, 1) under that matrix so that white maps to a* = b* = 0.

use super::image::{quantize_u8, Encoding, Image};
use crate::error::{Error, Result};

pub type Mat3 = [[f64; 3]; 3];

pub const RGB_TO_XYZ: Mat3 = [
    [0.4124564, 0.3575761, 0.1804375],
    [0.2126729, 0.7151522, 0.0721750],
    [0.0193339, 0.1191920, 0.9503041],
];

pub const XYZ_TO_RGB: Mat3 = [
    [3.2404542, -1.5371385, -0.4985314],
    [-0.9692660, 1.8760108, 0.0415560],
    [0.0556434, -0.2040259, 1.0572252],
];

/// D65 reference white (Y = 1).
pub const D65_WHITE: [f64; 3] = [0.95047, 1.0, 1.08883];

/// Rec. 709 luma weights, applied to gamma-encoded values.
pub const LUMA_WEIGHTS: [f64; 3] = [0.2126, 0.7152, 0.0722];

const LAB_EPSILON: f64 = 216.0 / 24389.0;
const LAB_KAPPA: f64 = 24389.0 / 27.0;

pub fn mat_vec(m: &Mat3, v: [f64; 3]) -> [f64; 3] {
    [
        m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
        m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
        m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
    ]
}

pub fn mat_mul(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut out = [[0.0; 3]; 3];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            *cell = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

pub fn mat_inverse(m: &Mat3) -> Mat3 {
    let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    let inv = 1.0 / det;
    [
        [
            (m[1][1] * m[2][2] - m[1][2] * m[2][1]) * inv,
            (m[0][2] * m[2][1] - m[0][1] * m[2][2]) * inv,
            (m[0][1] * m[1][2] - m[0][2] * m[1][1]) * inv,
        ],
        [
            (m[1][2] * m[2][0] - m[1][0] * m[2][2]) * inv,
            (m[0][0] * m[2][2] - m[0][2] * m[2][0]) * inv,
            (m[0][2] * m[1][0] - m[0][0] * m[1][2]) * inv,
        ],
        [
            (m[1][0] * m[2][1] - m[1][1] * m[2][0]) * inv,
            (m[0][1] * m[2][0] - m[0][0] * m[2][1]) * inv,
            (m[0][0] * m[1][1] - m[0][1] * m[1][0]) * inv,
        ],
    ]
}

/// sRGB transfer function, encoded [0, 1] to linear [0, 1].
#[inline]
pub fn decode_transfer(v: f64) -> f64 {
    if v <= 0.04045 {
        v / 12.92
    } else {
        ((v + 0.055) / 1.055).powf(2.4)
    }
}

#[inline]
pub fn encode_transfer(l: f64) -> f64 {
    if l <= 0.0031308 {
        l * 12.92
    } else {
        1.055 * l.powf(1.0 / 2.4) - 0.055
    }
}

/// Linear value for every 8-bit code.
pub fn linear_lut() -> [f64; 256] {
    let mut lut = [0.0; 256];
    for (i, v) in lut.iter_mut().enumerate() {
        *v = decode_transfer(i as f64 / 255.0);
    }
    lut
}

#[inline]
fn lab_f(t: f64) -> f64 {
    if t > LAB_EPSILON {
        t.cbrt()
    } else {
        (LAB_KAPPA * t + 16.0) / 116.0
    }
}

#[inline]
fn lab_f_inv(f: f64) -> f64 {
    let f3 = f * f * f;
    if f3 > LAB_EPSILON {
        f3
    } else {
        (116.0 * f - 16.0) / LAB_KAPPA
    }
}

pub fn xyz_to_lab(xyz: [f64; 3]) -> [f64; 3] {
    let fx = lab_f(xyz[0] / D65_WHITE[0]);
    let fy = lab_f(xyz[1] / D65_WHITE[1]);
    let fz = lab_f(xyz[2] / D65_WHITE[2]);
    [116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)]
}

pub fn lab_to_xyz(lab: [f64; 3]) -> [f64; 3] {
    let fy = (lab[0] + 16.0) / 116.0;
    let fx = fy + lab[1] / 500.0;
    let fz = fy - lab[2] / 200.0;
    let y = if lab[0] > LAB_KAPPA * LAB_EPSILON {
        fy * fy * fy
    } else {
        lab[0] / LAB_KAPPA
    };
    [
        lab_f_inv(fx) * D65_WHITE[0],
        y * D65_WHITE[1],
        lab_f_inv(fz) * D65_WHITE[2],
    ]
}

pub fn linear_rgb_to_lab(rgb: [f64; 3]) -> [f64; 3] {
    let lab = xyz_to_lab(mat_vec(&RGB_TO_XYZ, rgb));
    // Rounding can push L* a hair outside [0, 100] at black and white.
    [lab[0].clamp(0.0, 100.0), lab[1], lab[2]]
}

pub fn lab_to_linear_rgb(lab: [f64; 3]) -> [f64; 3] {
    mat_vec(&XYZ_TO_RGB, lab_to_xyz(lab))
}

pub fn srgb_pixel_to_lab(rgb: [u8; 3]) -> [f64; 3] {
    let lin = rgb.map(|c| decode_transfer(c as f64 / 255.0));
    linear_rgb_to_lab(lin)
}

/// Lab to 8-bit sRGB with per-channel clipping of out-of-gamut values.
pub fn lab_pixel_to_srgb(lab: [f64; 3]) -> [u8; 3] {
    lab_to_linear_rgb(lab).map(|l| quantize_u8(encode_transfer(l.clamp(0.0, 1.0)) * 255.0))
}

/// Rec. 709 luma of gamma-encoded code values, in [0, 255].
#[inline]
pub fn luma(rgb: [f64; 3]) -> f64 {
    LUMA_WEIGHTS[0] * rgb[0] + LUMA_WEIGHTS[1] * rgb[1] + LUMA_WEIGHTS[2] * rgb[2]
}

pub fn srgb_to_linear(img: &Image) -> Result<Image> {
    let bytes = img.require_srgb("srgb_to_linear")?;
    let lut = linear_lut();
    let data = bytes.iter().map(|&b| lut[b as usize]).collect();
    Image::float(img.width(), img.height(), Encoding::LinearRgbF, data)
}

pub fn linear_to_srgb(img: &Image) -> Result<Image> {
    let data = match (img.encoding(), img.as_floats()) {
        (Encoding::LinearRgbF, Some(v)) => v,
        _ => {
            return Err(Error::Contract(format!(
                "linear_to_srgb requires LinearRgbF, got {:?}",
                img.encoding()
            )))
        }
    };
    let bytes = data
        .iter()
        .map(|&l| quantize_u8(encode_transfer(l) * 255.0))
        .collect();
    Image::srgb8(img.width(), img.height(), bytes)
}

pub fn srgb_to_lab(img: &Image) -> Result<Image> {
    let bytes = img.require_srgb("srgb_to_lab")?;
    let lut = linear_lut();
    let mut data = Vec::with_capacity(bytes.len());
    for p in bytes.chunks_exact(3) {
        let lin = [lut[p[0] as usize], lut[p[1] as usize], lut[p[2] as usize]];
        data.extend_from_slice(&linear_rgb_to_lab(lin));
    }
    Image::float(img.width(), img.height(), Encoding::CielabF, data)
}

pub fn lab_to_srgb(img: &Image) -> Result<Image> {
    let data = match (img.encoding(), img.as_floats()) {
        (Encoding::CielabF, Some(v)) => v,
        _ => {
            return Err(Error::Contract(format!(
                "lab_to_srgb requires CielabF, got {:?}",
                img.encoding()
            )))
        }
    };
    let mut bytes = Vec::with_capacity(data.len());
    for p in data.chunks_exact(3) {
        bytes.extend_from_slice(&lab_pixel_to_srgb([p[0], p[1], p[2]]));
    }
    Image::srgb8(img.width(), img.height(), bytes)
}

/// CIE daylight-locus chromaticity (x, y) for a correlated colour temperature.
pub fn daylight_chromaticity(kelvin: f64) -> (f64, f64) {
    let t = kelvin;
    let x = if t <= 7000.0 {
        -4.6070e9 / t.powi(3) + 2.9678e6 / t.powi(2) + 0.09911e3 / t + 0.244063
    } else {
        -2.0064e9 / t.powi(3) + 1.9018e6 / t.powi(2) + 0.24748e3 / t + 0.237040
    };
    let y = -3.0 * x * x + 2.870 * x - 0.275;
    (x, y)
}

pub fn chromaticity_to_xyz(x: f64, y: f64) -> [f64; 3] {
    [x / y, 1.0, (1.0 - x - y) / y]
}

const BRADFORD: Mat3 = [
    [0.8951, 0.2664, -0.1614],
    [-0.7502, 1.7135, 0.0367],
    [0.0389, -0.0685, 1.0296],
];

/// Bradford adaptation matrix taking XYZ under `src_white` to `dst_white`.
pub fn bradford_adaptation(src_white: [f64; 3], dst_white: [f64; 3]) -> Mat3 {
    let src = mat_vec(&BRADFORD, src_white);
    let dst = mat_vec(&BRADFORD, dst_white);
    let scale = [
        [dst[0] / src[0], 0.0, 0.0],
        [0.0, dst[1] / src[1], 0.0],
        [0.0, 0.0, dst[2] / src[2]],
    ];
    mat_mul(&mat_inverse(&BRADFORD), &mat_mul(&scale, &BRADFORD))
}
