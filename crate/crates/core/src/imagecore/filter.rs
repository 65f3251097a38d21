use super::color::luma;
use super::image::{Encoding, Image, ScalarField};
use crate::error::{Error, Result};

/// Normalised Gaussian taps for radius `ceil(3 sigma)`.
pub fn gaussian_kernel(sigma: f64) -> Result<Vec<f64>> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::Parameter(format!("sigma must be > 0, got {sigma}")));
    }
    let radius = (3.0 * sigma).ceil() as isize;
    let mut k: Vec<f64> = (-radius..=radius)
        .map(|i| (-(i * i) as f64 / (2.0 * sigma * sigma)).exp())
        .collect();
    let sum: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= sum);
    Ok(k)
}

/// Separable Gaussian blur of one plane with clamp-to-edge sampling.
pub fn blur_plane(plane: &[f64], width: usize, height: usize, sigma: f64) -> Result<Vec<f64>> {
    let kernel = gaussian_kernel(sigma)?;
    let r = (kernel.len() / 2) as isize;
    let clamp = |i: isize, n: usize| i.clamp(0, n as isize - 1) as usize;

    let mut tmp = vec![0.0; plane.len()];
    for y in 0..height {
        let row = &plane[y * width..(y + 1) * width];
        for x in 0..width {
            let mut acc = 0.0;
            for (t, w) in kernel.iter().enumerate() {
                acc += w * row[clamp(x as isize + t as isize - r, width)];
            }
            tmp[y * width + x] = acc;
        }
    }
    let mut out = vec![0.0; plane.len()];
    for y in 0..height {
        for x in 0..width {
            let mut acc = 0.0;
            for (t, w) in kernel.iter().enumerate() {
                acc += w * tmp[clamp(y as isize + t as isize - r, height) * width + x];
            }
            out[y * width + x] = acc;
        }
    }
    Ok(out)
}

/// Gaussian blur of every channel; `Srgb8` results are rounded back to bytes.
pub fn gaussian_blur(img: &Image, sigma: f64) -> Result<Image> {
    let planes = (0..img.channels())
        .map(|c| blur_plane(&img.plane(c), img.width(), img.height(), sigma))
        .collect::<Result<Vec<_>>>()?;
    Ok(Image::from_planes_unchecked(
        img.width(),
        img.height(),
        img.encoding(),
        &planes,
    ))
}

/// Single-channel reduction used by the gradient and statistics code.
///
/// `Srgb8` and `LinearRgbF` use Rec. 709 luma weights on the stored values
/// (code values for `Srgb8`); `CielabF` uses L*; `GrayF` is passed through.
pub fn luma_plane(img: &Image) -> Vec<f64> {
    match img.encoding() {
        Encoding::GrayF => img.plane(0),
        Encoding::CielabF => img.plane(0),
        Encoding::Srgb8 | Encoding::LinearRgbF => {
            let (r, g, b) = (img.plane(0), img.plane(1), img.plane(2));
            (0..img.pixel_count())
                .map(|i| luma([r[i], g[i], b[i]]))
                .collect()
        }
    }
}

/// Central-difference gradient magnitude of a scalar field.
///
/// Neighbour indices are clamped at the border, so a border pixel uses a
/// one-sided difference halved.
pub fn gradient_field(field: &ScalarField) -> ScalarField {
    let (w, h) = (field.width, field.height);
    let mut values = Vec::with_capacity(w * h);
    for y in 0..h {
        let (ym, yp) = (y.saturating_sub(1), (y + 1).min(h - 1));
        for x in 0..w {
            let (xm, xp) = (x.saturating_sub(1), (x + 1).min(w - 1));
            let gx = (field.get(xp, y) - field.get(xm, y)) / 2.0;
            let gy = (field.get(x, yp) - field.get(x, ym)) / 2.0;
            values.push((gx * gx + gy * gy).sqrt());
        }
    }
    ScalarField {
        width: w,
        height: h,
        values,
    }
}

pub fn gradient_magnitude(img: &Image) -> ScalarField {
    let field = ScalarField {
        width: img.width(),
        height: img.height(),
        values: luma_plane(img),
    };
    gradient_field(&field)
}

/// Bilinear resampling of one plane with half-pixel-centred coordinates.
pub fn resize_plane(plane: &[f64], w: usize, h: usize, new_w: usize, new_h: usize) -> Vec<f64> {
    let sx = w as f64 / new_w as f64;
    let sy = h as f64 / new_h as f64;
    let mut out = Vec::with_capacity(new_w * new_h);
    for y in 0..new_h {
        let fy = ((y as f64 + 0.5) * sy - 0.5).clamp(0.0, (h - 1) as f64);
        let y0 = fy.floor() as usize;
        let y1 = (y0 + 1).min(h - 1);
        let ty = fy - y0 as f64;
        for x in 0..new_w {
            let fx = ((x as f64 + 0.5) * sx - 0.5).clamp(0.0, (w - 1) as f64);
            let x0 = fx.floor() as usize;
            let x1 = (x0 + 1).min(w - 1);
            let tx = fx - x0 as f64;
            let top = plane[y0 * w + x0] * (1.0 - tx) + plane[y0 * w + x1] * tx;
            let bottom = plane[y1 * w + x0] * (1.0 - tx) + plane[y1 * w + x1] * tx;
            out.push(top * (1.0 - ty) + bottom * ty);
        }
    }
    out
}

pub fn resize_bilinear(img: &Image, new_w: usize, new_h: usize) -> Result<Image> {
    if new_w == 0 || new_h == 0 {
        return Err(Error::Parameter(format!(
            "target size must be at least 1x1, got {new_w}x{new_h}"
        )));
    }
    if new_w == img.width() && new_h == img.height() {
        return Ok(img.clone());
    }
    let planes: Vec<Vec<f64>> = (0..img.channels())
        .map(|c| resize_plane(&img.plane(c), img.width(), img.height(), new_w, new_h))
        .collect();
    Ok(Image::from_planes_unchecked(
        new_w,
        new_h,
        img.encoding(),
        &planes,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gray(w: usize, h: usize, v: Vec<f64>) -> Image {
        Image::float(w, h, Encoding::GrayF, v).unwrap()
    }

    #[test]
    fn kernel_is_normalised_with_three_sigma_radius() {
        let k = gaussian_kernel(1.5).unwrap();
        assert_eq!(k.len(), 2 * 5 + 1);
        assert!((k.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(gaussian_kernel(0.0).is_err());
        assert!(gaussian_kernel(-1.0).is_err());
    }

    #[test]
    fn blur_of_constant_is_constant() {
        let img = Image::filled_srgb(9, 7, [40, 120, 250]).unwrap();
        assert_eq!(gaussian_blur(&img, 2.3).unwrap(), img);
    }

    #[test]
    fn impulse_response_sums_to_one() {
        let mut v = vec![0.0; 41 * 41];
        v[20 * 41 + 20] = 1.0;
        let out = gaussian_blur(&gray(41, 41, v), 2.0).unwrap();
        let sum: f64 = out.as_floats().unwrap().iter().sum();
        assert!((sum - 1.0).abs() < 1e-6);
    }

    #[test]
    fn matches_dense_convolution_on_a_row() {
        let row: Vec<f64> = (0..23).map(|i| ((i * 37) % 11) as f64 / 11.0).collect();
        let sigma = 0.3;
        let out = gaussian_blur(&gray(23, 1, row.clone()), sigma).unwrap();
        // Dense oracle: explicit weights over every tap, clamped indices.
        let r = (3.0f64 * sigma).ceil() as i64;
        let weights: Vec<f64> = (-r..=r)
            .map(|i| (-(i * i) as f64 / (2.0 * sigma * sigma)).exp())
            .collect();
        let total: f64 = weights.iter().sum();
        for x in 0..23i64 {
            let mut acc = 0.0;
            for (t, w) in (-r..=r).zip(&weights) {
                acc += w / total * row[(x + t).clamp(0, 22) as usize];
            }
            assert!((out.as_floats().unwrap()[x as usize] - acc).abs() < 1e-6);
        }
    }

    #[test]
    fn gradient_of_ramp_is_one_inside() {
        let v: Vec<f64> = (0..6 * 5).map(|i| (i % 6) as f64).collect();
        let g = gradient_field(&ScalarField::new(6, 5, v).unwrap());
        for y in 0..5 {
            for x in 1..5 {
                assert_eq!(g.get(x, y), 1.0);
            }
            assert_eq!(g.get(0, y), 0.5);
        }
    }

    #[test]
    fn gradient_of_constant_is_zero() {
        let img = Image::filled_srgb(5, 5, [10, 20, 30]).unwrap();
        assert!(gradient_magnitude(&img).values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn resize_two_by_two_to_one_averages() {
        let img = Image::from_fn_srgb(2, 2, |_, y| if y == 0 { [0; 3] } else { [255; 3] }).unwrap();
        let out = resize_bilinear(&img, 1, 1).unwrap();
        assert_eq!(out.rgb_at(0, 0), Some([128, 128, 128]));
        let g = resize_bilinear(&gray(2, 2, vec![0.0, 0.0, 1.0, 1.0]), 1, 1).unwrap();
        assert_eq!(g.as_floats().unwrap(), &[0.5]);
    }

    #[test]
    fn resize_identity_and_constant() {
        let img = Image::from_fn_srgb(5, 3, |x, y| [(x * 40) as u8, (y * 60) as u8, 7]).unwrap();
        assert_eq!(resize_bilinear(&img, 5, 3).unwrap(), img);
        let c = Image::filled_srgb(7, 4, [128, 128, 128]).unwrap();
        let out = resize_bilinear(&c, 13, 2).unwrap();
        assert!(out.as_bytes().unwrap().iter().all(|&b| b == 128));
        assert!(matches!(resize_bilinear(&img, 0, 3), Err(Error::Parameter(_))));
    }
}
