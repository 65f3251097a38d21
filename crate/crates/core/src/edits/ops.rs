//! The nine editing operators. All of them take and return `Srgb8` images.

use crate::error::{Error, Result};
use crate::imagecore::color::{
    bradford_adaptation, chromaticity_to_xyz, daylight_chromaticity, encode_transfer,
    lab_pixel_to_srgb, linear_lut, luma, mat_mul, mat_vec, srgb_pixel_to_lab, D65_WHITE,
    RGB_TO_XYZ, XYZ_TO_RGB,
};
use crate::imagecore::filter::blur_plane;
use crate::imagecore::{quantize_u8, Image, Mask};

fn param(ok: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::Parameter(msg()))
    }
}

fn planes_of(img: &Image) -> [Vec<f64>; 3] {
    [img.plane(0), img.plane(1), img.plane(2)]
}

fn from_planes(img: &Image, planes: &[Vec<f64>; 3]) -> Image {
    let mut bytes = Vec::with_capacity(img.pixel_count() * 3);
    for i in 0..img.pixel_count() {
        bytes.extend(planes.iter().map(|p| quantize_u8(p[i])));
    }
    Image::srgb8(img.width(), img.height(), bytes).expect("same shape as input")
}

fn map_pixels(img: &Image, mut f: impl FnMut(usize, [u8; 3]) -> [u8; 3]) -> Image {
    let bytes = img.as_bytes().expect("caller checked encoding");
    let mut out = Vec::with_capacity(bytes.len());
    for (i, p) in bytes.chunks_exact(3).enumerate() {
        out.extend_from_slice(&f(i, [p[0], p[1], p[2]]));
    }
    Image::srgb8(img.width(), img.height(), out).expect("same shape as input")
}

/// Cubic Hermite step `3t² − 2t³` of `x` between `edge0` and `edge1`.
pub fn smoothstep(edge0: f64, edge1: f64, x: f64) -> f64 {
    let t = ((x - edge0) / (edge1 - edge0)).clamp(0.0, 1.0);
    t * t * (3.0 - 2.0 * t)
}

/// Foreground ellipse used by the background operators when no mask is given.
pub fn default_foreground_mask(width: usize, height: usize) -> Mask {
    let (w, h) = (width as f64, height as f64);
    Mask::ellipse(width, height, 0.38 * w, 0.45 * h, 0.05 * w.min(h))
        .expect("positive axes for nonzero dimensions")
}

/// Unsharp mask on each gamma-encoded channel.
pub fn sharpen(img: &Image, amount: f64, sigma: f64) -> Result<Image> {
    img.require_srgb("sharpen")?;
    param(amount >= 0.0 && amount.is_finite(), || format!("sharpen amount must be >= 0, got {amount}"))?;
    param(sigma > 0.0 && sigma.is_finite(), || format!("sharpen sigma must be > 0, got {sigma}"))?;
    let (w, h) = (img.width(), img.height());
    let mut planes = planes_of(img);
    for p in planes.iter_mut() {
        let blurred = blur_plane(p, w, h, sigma)?;
        for (v, b) in p.iter_mut().zip(blurred) {
            *v += amount * (*v - b);
        }
    }
    Ok(from_planes(img, &planes))
}

fn blend_background(img: &Image, mask: Option<&Mask>, sigma: f64, darken: f64) -> Result<Image> {
    param(sigma > 0.0 && sigma.is_finite(), || format!("background sigma must be > 0, got {sigma}"))?;
    let (w, h) = (img.width(), img.height());
    let fallback;
    let mask = match mask {
        Some(m) => {
            m.check_matches(w, h)?;
            m
        }
        None => {
            fallback = default_foreground_mask(w, h);
            &fallback
        }
    };
    let weights = mask.weights();
    let mut planes = planes_of(img);
    for p in planes.iter_mut() {
        let blurred = blur_plane(p, w, h, sigma)?;
        for ((v, b), &m) in p.iter_mut().zip(blurred).zip(weights) {
            *v = m * *v + (1.0 - m) * darken * b;
        }
    }
    Ok(from_planes(img, &planes))
}

/// Keeps the foreground and replaces the background with its blur.
pub fn blur_background(img: &Image, mask: Option<&Mask>, sigma: f64) -> Result<Image> {
    img.require_srgb("blur_background")?;
    blend_background(img, mask, sigma, 1.0)
}

/// As [`blur_background`], with the blurred background scaled by `darken`.
pub fn blur_darken_background(
    img: &Image,
    mask: Option<&Mask>,
    sigma: f64,
    darken: f64,
) -> Result<Image> {
    img.require_srgb("blur_darken_background")?;
    param(darken > 0.0 && darken <= 1.0, || format!("darken must be in (0, 1], got {darken}"))?;
    blend_background(img, mask, sigma, darken)
}

/// Rec. 709 luma of the gamma-encoded values, copied to all three channels.
pub fn grayscale(img: &Image) -> Result<Image> {
    img.require_srgb("grayscale")?;
    Ok(map_pixels(img, |_, p| {
        let y = quantize_u8(luma(p.map(f64::from)));
        [y, y, y]
    }))
}

/// Linear stretch about mid-grey in gamma space.
pub fn increase_contrast(img: &Image, strength: f64) -> Result<Image> {
    img.require_srgb("increase_contrast")?;
    param(strength >= 1.0 && strength.is_finite(), || {
        format!("contrast strength must be >= 1, got {strength}")
    })?;
    let mut lut = [0u8; 256];
    for (c, out) in lut.iter_mut().enumerate() {
        let v = c as f64 / 255.0;
        *out = quantize_u8((0.5 + strength * (v - 0.5)).clamp(0.0, 1.0) * 255.0);
    }
    Ok(map_pixels(img, |_, p| p.map(|c| lut[c as usize])))
}

/// Linear-RGB matrix adapting D65 content to a daylight white at `kelvin`.
pub fn temperature_matrix(kelvin: f64) -> [[f64; 3]; 3] {
    let (x, y) = daylight_chromaticity(kelvin);
    let cat = bradford_adaptation(D65_WHITE, chromaticity_to_xyz(x, y));
    mat_mul(&XYZ_TO_RGB, &mat_mul(&cat, &RGB_TO_XYZ))
}

/// Bradford chromatic adaptation from D65 to the daylight white at `kelvin`.
pub fn color_temperature(img: &Image, kelvin: f64) -> Result<Image> {
    img.require_srgb("color_temperature")?;
    param((4000.0..=10000.0).contains(&kelvin), || {
        format!("kelvin must be in [4000, 10000], got {kelvin}")
    })?;
    let m = temperature_matrix(kelvin);
    let lut = linear_lut();
    Ok(map_pixels(img, |_, p| {
        let lin = mat_vec(&m, p.map(|c| lut[c as usize]));
        lin.map(|l| quantize_u8(encode_transfer(l.clamp(0.0, 1.0)) * 255.0))
    }))
}

/// Saturation boost of one pixel (channels in [0, 1]) with HSV hue and value fixed.
pub fn vibrance_pixel(rgb: [f64; 3], amount: f64) -> [f64; 3] {
    let v = rgb[0].max(rgb[1]).max(rgb[2]);
    let min = rgb[0].min(rgb[1]).min(rgb[2]);
    if v <= 0.0 || v == min {
        return rgb;
    }
    let s = (v - min) / v;
    let boosted = (s + amount * 4.0 * s * (1.0 - s)).clamp(0.0, 1.0);
    // Scaling every channel's distance from the max by s'/s changes only S.
    let k = boosted / s;
    rgb.map(|c| v - (v - c) * k)
}

pub fn vibrance(img: &Image, amount: f64) -> Result<Image> {
    img.require_srgb("vibrance")?;
    param(amount >= 0.0 && amount.is_finite(), || format!("vibrance amount must be >= 0, got {amount}"))?;
    Ok(map_pixels(img, |_, p| {
        vibrance_pixel(p.map(|c| c as f64 / 255.0), amount).map(|c| quantize_u8(c * 255.0))
    }))
}

/// Large-radius unsharp mask on L* only.
pub fn clarity(img: &Image, amount: f64, radius_frac: f64) -> Result<Image> {
    img.require_srgb("clarity")?;
    param(amount >= 0.0 && amount.is_finite(), || format!("clarity amount must be >= 0, got {amount}"))?;
    param(radius_frac > 0.0 && radius_frac < 1.0, || {
        format!("clarity radius_frac must be in (0, 1), got {radius_frac}")
    })?;
    let (w, h) = (img.width(), img.height());
    let bytes = img.as_bytes().unwrap();
    let lab: Vec<[f64; 3]> = bytes
        .chunks_exact(3)
        .map(|p| srgb_pixel_to_lab([p[0], p[1], p[2]]))
        .collect();
    let lightness: Vec<f64> = lab.iter().map(|p| p[0]).collect();
    let sigma = radius_frac * w.min(h) as f64;
    let blurred = blur_plane(&lightness, w, h, sigma)?;
    let mut out = Vec::with_capacity(bytes.len());
    for (p, b) in lab.iter().zip(blurred) {
        let l = (p[0] + amount * (p[0] - b)).clamp(0.0, 100.0);
        out.extend_from_slice(&lab_pixel_to_srgb([l, p[1], p[2]]));
    }
    Image::srgb8(w, h, out)
}

/// Radial darkening: factor `1 − strength·smoothstep(inner, 1, r)`, where
/// `r` is the distance from the centre scaled so the corners sit at 1.
pub fn vignette(img: &Image, strength: f64, inner: f64) -> Result<Image> {
    img.require_srgb("vignette")?;
    param((0.0..=1.0).contains(&strength), || format!("vignette strength must be in [0, 1], got {strength}"))?;
    param((0.0..1.0).contains(&inner), || format!("vignette inner must be in [0, 1), got {inner}"))?;
    let w = img.width();
    let cx = (w as f64 - 1.0) / 2.0;
    let cy = (img.height() as f64 - 1.0) / 2.0;
    let r_max = cx.hypot(cy);
    Ok(map_pixels(img, |i, p| {
        let (x, y) = ((i % w) as f64, (i / w) as f64);
        let r = if r_max > 0.0 { (x - cx).hypot(y - cy) / r_max } else { 0.0 };
        let f = 1.0 - strength * smoothstep(inner, 1.0, r);
        p.map(|c| quantize_u8(c as f64 * f))
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imagecore::srgb_to_lab;

    fn card() -> Image {
        Image::from_fn_srgb(32, 24, |x, y| {
            [(x * 8) as u8, (y * 10) as u8, ((x * y) % 256) as u8]
        })
        .unwrap()
    }

    fn mean_grad(img: &Image) -> f64 {
        let g = crate::imagecore::gradient_magnitude(img);
        g.values.iter().sum::<f64>() / g.values.len() as f64
    }

    #[test]
    fn identity_parameters() {
        let img = card();
        assert_eq!(sharpen(&img, 0.0, 1.5).unwrap(), img);
        assert_eq!(increase_contrast(&img, 1.0).unwrap(), img);
        assert_eq!(vibrance(&img, 0.0).unwrap(), img);
        assert_eq!(vignette(&img, 0.0, 0.4).unwrap(), img);
    }

    #[test]
    fn constant_image_survives_sharpen() {
        let img = Image::filled_srgb(10, 10, [90, 30, 200]).unwrap();
        assert_eq!(sharpen(&img, 2.0, 1.0).unwrap(), img);
    }

    #[test]
    fn sharpen_steepens_a_step_edge() {
        let img = Image::from_fn_srgb(20, 8, |x, _| if x < 10 { [0; 3] } else { [255; 3] }).unwrap();
        let out = sharpen(&img, 1.0, 1.5).unwrap();
        // Saturated step: the unsharp overshoot clips, so add a mid-grey step.
        let soft = Image::from_fn_srgb(20, 8, |x, _| if x < 10 { [60; 3] } else { [190; 3] }).unwrap();
        assert!(mean_grad(&sharpen(&soft, 1.0, 1.5).unwrap()) > mean_grad(&soft));
        assert!(mean_grad(&out) >= mean_grad(&img));
    }

    #[test]
    fn background_blend_regions() {
        let img = card();
        let all = Mask::filled(32, 24, 1.0).unwrap();
        assert_eq!(blur_background(&img, Some(&all), 4.0).unwrap(), img);
        let none = Mask::filled(32, 24, 0.0).unwrap();
        let blurred = crate::imagecore::gaussian_blur(&img, 4.0).unwrap();
        assert_eq!(blur_background(&img, Some(&none), 4.0).unwrap(), blurred);

        let half: Vec<f64> = (0..32 * 24).map(|i| if i % 32 < 16 { 1.0 } else { 0.0 }).collect();
        let half = Mask::new(32, 24, half).unwrap();
        let out = blur_background(&img, Some(&half), 4.0).unwrap();
        for y in 0..24 {
            for x in 0..32 {
                let want = if x < 16 { img.rgb_at(x, y) } else { blurred.rgb_at(x, y) };
                assert_eq!(out.rgb_at(x, y), want);
            }
        }
        let wrong = Mask::filled(5, 5, 1.0).unwrap();
        assert!(matches!(blur_background(&img, Some(&wrong), 4.0), Err(Error::Contract(_))));
    }

    #[test]
    fn darken_reduces_to_blur_and_scales_constants() {
        let img = card();
        assert_eq!(
            blur_darken_background(&img, None, 4.0, 1.0).unwrap(),
            blur_background(&img, None, 4.0).unwrap()
        );
        let all = Mask::filled(32, 24, 1.0).unwrap();
        assert_eq!(blur_darken_background(&img, Some(&all), 4.0, 0.7).unwrap(), img);
        let c = Image::filled_srgb(12, 12, [200, 200, 200]).unwrap();
        let none = Mask::filled(12, 12, 0.0).unwrap();
        let out = blur_darken_background(&c, Some(&none), 3.0, 0.5).unwrap();
        assert!(out.as_bytes().unwrap().iter().all(|&b| b == 100));
        assert!(blur_darken_background(&c, None, 3.0, 0.0).is_err());
        assert!(blur_darken_background(&c, None, 3.0, 1.1).is_err());
    }

    #[test]
    fn grayscale_fixed_point_and_red() {
        let gray = Image::from_fn_srgb(6, 6, |x, y| [(x * 40 + y) as u8; 3]).unwrap();
        assert_eq!(grayscale(&gray).unwrap(), gray);
        let red = Image::filled_srgb(1, 1, [255, 0, 0]).unwrap();
        assert_eq!(grayscale(&red).unwrap().rgb_at(0, 0), Some([54, 54, 54]));
        let lab = srgb_to_lab(&grayscale(&card()).unwrap()).unwrap();
        for p in lab.as_floats().unwrap().chunks_exact(3) {
            assert!(p[1].abs() < 0.6 && p[2].abs() < 0.6);
        }
    }

    #[test]
    fn contrast_formula() {
        // v = 0.6 is not a code value; check the formula on its nearest neighbours.
        let v: f64 = 0.6;
        assert!((0.5 + 1.25 * (v - 0.5) - 0.625).abs() < 1e-12);
        let mid = Image::filled_srgb(1, 1, [153, 128, 0]).unwrap();
        let out = increase_contrast(&mid, 1.25).unwrap();
        // 153/255 = 0.6 exactly -> 0.625 * 255 = 159.375
        assert_eq!(out.rgb_at(0, 0), Some([159, 128, 0]));
        assert!(increase_contrast(&mid, 0.9).is_err());
    }

    #[test]
    fn temperature_warms_grey_and_keeps_black() {
        let grey = Image::filled_srgb(2, 2, [128, 128, 128]).unwrap();
        let warm = color_temperature(&grey, 5000.0).unwrap();
        let [r, _, b] = warm.rgb_at(0, 0).unwrap();
        assert!(r > b, "{r} {b}");
        let black = Image::filled_srgb(2, 2, [0, 0, 0]).unwrap();
        assert_eq!(color_temperature(&black, 5000.0).unwrap(), black);
        assert!(color_temperature(&grey, 3000.0).is_err());
        assert!(color_temperature(&grey, 12000.0).is_err());
    }

    #[test]
    fn temperature_near_d65_is_near_identity() {
        let img = card();
        let out = color_temperature(&img, 6504.0).unwrap();
        let worst = img
            .as_bytes()
            .unwrap()
            .iter()
            .zip(out.as_bytes().unwrap())
            .map(|(a, b)| (*a as i32 - *b as i32).abs())
            .max()
            .unwrap();
        assert!(worst <= 2, "{worst}");
    }

    #[test]
    fn vibrance_weights() {
        assert_eq!(vibrance_pixel([1.0, 0.0, 0.0], 0.3), [1.0, 0.0, 0.0]);
        assert_eq!(vibrance_pixel([0.4, 0.4, 0.4], 0.3), [0.4, 0.4, 0.4]);
        // s = 0.5 -> 0.8
        let out = vibrance_pixel([0.8, 0.4, 0.6], 0.3);
        let (mx, mn) = (out[0].max(out[1]).max(out[2]), out[0].min(out[1]).min(out[2]));
        assert!(((mx - mn) / mx - 0.8).abs() < 1e-12);
        assert!((mx - 0.8).abs() < 1e-12);
        assert!(vibrance(&card(), -0.1).is_err());
    }

    #[test]
    fn clarity_identity_within_one_code() {
        let img = card();
        let out = clarity(&img, 0.0, 0.05).unwrap();
        for (a, b) in img.as_bytes().unwrap().iter().zip(out.as_bytes().unwrap()) {
            assert!((*a as i32 - *b as i32).abs() <= 1);
        }
        assert!(clarity(&img, 0.5, 0.0).is_err());
        assert!(clarity(&img, 0.5, 1.0).is_err());
    }

    #[test]
    fn vignette_centre_and_corner() {
        let img = Image::filled_srgb(9, 7, [200, 200, 200]).unwrap();
        let out = vignette(&img, 0.5, 0.4).unwrap();
        assert_eq!(out.rgb_at(4, 3), Some([200; 3]));
        for (x, y) in [(0, 0), (8, 0), (0, 6), (8, 6)] {
            assert_eq!(out.rgb_at(x, y), Some([100; 3]));
        }
        assert!(vignette(&img, 1.5, 0.4).is_err());
        assert!(vignette(&img, 0.5, 1.0).is_err());
    }

    #[test]
    fn smoothstep_endpoints() {
        assert_eq!(smoothstep(0.4, 1.0, 1.0), 1.0);
        assert_eq!(smoothstep(0.4, 1.0, 0.2), 0.0);
        assert_eq!(smoothstep(0.0, 1.0, 0.5), 0.5);
    }

    #[test]
    fn operators_reject_non_srgb() {
        let lab = Image::float(2, 2, crate::imagecore::Encoding::CielabF, vec![50.0; 12]).unwrap();
        assert!(matches!(grayscale(&lab), Err(Error::Contract(_))));
        assert!(matches!(sharpen(&lab, 1.0, 1.0), Err(Error::Contract(_))));
    }
}
