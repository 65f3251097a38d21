//! Multi-level neighbourhood contrast in CIELAB.
//!
//! Each level of a 2x2 block-average pyramid contributes the mean, over
//! pixels, of the mean absolute difference between a pixel and its
//! neighbours. Channel terms are combined with fixed weights and levels are
//! averaged with equal weight. Values are in raw Lab units.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imagecore::color::srgb_pixel_to_lab;
use crate::imagecore::{Image, Mask};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Neighborhood {
    Four,
    Eight,
}

impl Neighborhood {
    fn offsets(self) -> &'static [(isize, isize)] {
        match self {
            Neighborhood::Four => &[(-1, 0), (1, 0), (0, -1), (0, 1)],
            Neighborhood::Eight => &[
                (-1, -1),
                (0, -1),
                (1, -1),
                (-1, 0),
                (1, 0),
                (-1, 1),
                (0, 1),
                (1, 1),
            ],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WlfParams {
    /// Pyramid depth; `None` keeps halving while the short side stays ≥ 8.
    pub levels: Option<usize>,
    pub channel_weights: [f64; 3],
    pub neighborhood: Neighborhood,
}

impl Default for WlfParams {
    fn default() -> Self {
        WlfParams {
            levels: None,
            channel_weights: [1.0 / 3.0; 3],
            neighborhood: Neighborhood::Eight,
        }
    }
}

/// Smallest allowed side, in pixels, for the input and the coarsest level.
pub const MIN_SIDE: usize = 8;

/// Number of pyramid levels whose short side stays ≥ [`MIN_SIDE`].
pub fn default_levels(width: usize, height: usize) -> usize {
    let mut side = width.min(height);
    let mut n = 0;
    while side >= MIN_SIDE {
        n += 1;
        side /= 2;
    }
    n
}

#[derive(Clone)]
struct Level {
    w: usize,
    h: usize,
    channels: [Vec<f64>; 3],
    weight: Vec<f64>,
}

impl Level {
    fn downsample(&self) -> Level {
        let (w, h) = (self.w / 2, self.h / 2);
        let avg = |p: &[f64], x: usize, y: usize| {
            (p[2 * y * self.w + 2 * x]
                + p[2 * y * self.w + 2 * x + 1]
                + p[(2 * y + 1) * self.w + 2 * x]
                + p[(2 * y + 1) * self.w + 2 * x + 1])
                / 4.0
        };
        let plane = |p: &[f64]| -> Vec<f64> {
            (0..h)
                .flat_map(|y| (0..w).map(move |x| (x, y)))
                .map(|(x, y)| avg(p, x, y))
                .collect()
        };
        Level {
            w,
            h,
            channels: [
                plane(&self.channels[0]),
                plane(&self.channels[1]),
                plane(&self.channels[2]),
            ],
            weight: plane(&self.weight),
        }
    }

    /// Per-channel mean neighbourhood contrast over included pixels.
    fn contrast(&self, nb: Neighborhood) -> Option<[f64; 3]> {
        let mut sums = [0.0; 3];
        let mut count = 0usize;
        for y in 0..self.h {
            for x in 0..self.w {
                let i = y * self.w + x;
                if self.weight[i] < 0.5 {
                    continue;
                }
                let mut local = [0.0; 3];
                let mut n = 0usize;
                for &(dx, dy) in nb.offsets() {
                    let (nx, ny) = (x as isize + dx, y as isize + dy);
                    if nx < 0 || ny < 0 || nx >= self.w as isize || ny >= self.h as isize {
                        continue;
                    }
                    let j = ny as usize * self.w + nx as usize;
                    if self.weight[j] < 0.5 {
                        continue;
                    }
                    for c in 0..3 {
                        local[c] += (self.channels[c][i] - self.channels[c][j]).abs();
                    }
                    n += 1;
                }
                if n > 0 {
                    for c in 0..3 {
                        sums[c] += local[c] / n as f64;
                    }
                }
                count += 1;
            }
        }
        (count > 0).then(|| sums.map(|s| s / count as f64))
    }
}

/// Per-level channel-combined contrast terms (finest level first).
pub fn wlf_levels(img: &Image, mask: Option<&Mask>, params: &WlfParams) -> Result<Vec<f64>> {
    let bytes = img.require_srgb("wlf_contrast")?;
    let (w, h) = (img.width(), img.height());
    if w < MIN_SIDE || h < MIN_SIDE {
        return Err(Error::Size(format!("wlf_contrast needs at least 8x8, got {w}x{h}")));
    }
    if let Some(m) = mask {
        m.check_matches(w, h)?;
    }
    let levels = params.levels.unwrap_or_else(|| default_levels(w, h));
    if levels == 0 || levels > default_levels(w, h) {
        return Err(Error::Parameter(format!(
            "levels must be in 1..={} for a {w}x{h} image, got {levels}",
            default_levels(w, h)
        )));
    }
    let mut channels: [Vec<f64>; 3] = Default::default();
    for p in bytes.chunks_exact(3) {
        let lab = srgb_pixel_to_lab([p[0], p[1], p[2]]);
        for c in 0..3 {
            channels[c].push(lab[c]);
        }
    }
    let weight = match mask {
        Some(m) => m.weights().to_vec(),
        None => vec![1.0; w * h],
    };
    if !weight.iter().any(|&v| v >= 0.5) {
        return Err(Error::EmptyDomain);
    }
    let mut level = Level { w, h, channels, weight };
    let mut terms = Vec::with_capacity(levels);
    for k in 0..levels {
        if k > 0 {
            level = level.downsample();
        }
        // A mask can vanish at coarse levels; such levels contribute nothing.
        if let Some(c) = level.contrast(params.neighborhood) {
            terms.push((0..3).map(|i| params.channel_weights[i] * c[i]).sum());
        }
    }
    Ok(terms)
}

pub fn wlf_contrast(img: &Image, mask: Option<&Mask>, params: &WlfParams) -> Result<f64> {
    let terms = wlf_levels(img, mask, params)?;
    if terms.is_empty() {
        return Err(Error::EmptyDomain);
    }
    Ok(terms.iter().sum::<f64>() / terms.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn checker(n: usize, cell: usize, lo: u8, hi: u8) -> Image {
        Image::from_fn_srgb(n, n, |x, y| {
            if (x / cell + y / cell) % 2 == 0 {
                [lo; 3]
            } else {
                [hi; 3]
            }
        })
        .unwrap()
    }

    #[test]
    fn constant_is_zero() {
        let img = Image::filled_srgb(32, 32, [10, 200, 30]).unwrap();
        assert_eq!(wlf_contrast(&img, None, &WlfParams::default()).unwrap(), 0.0);
    }

    #[test]
    fn default_levels_keep_short_side_at_least_eight() {
        assert_eq!(default_levels(128, 128), 5);
        assert_eq!(default_levels(8, 100), 1);
        assert_eq!(default_levels(15, 15), 1);
        assert_eq!(default_levels(16, 16), 2);
    }

    #[test]
    fn small_image_is_size_error() {
        let img = Image::filled_srgb(7, 20, [0; 3]).unwrap();
        assert!(matches!(wlf_contrast(&img, None, &WlfParams::default()), Err(Error::Size(_))));
    }

    #[test]
    fn checkerboard_level_zero_closed_form() {
        // L* alternates 0 / 100 with a* = b* = 0.
        let img = checker(16, 1, 0, 255);
        let four = WlfParams {
            levels: Some(1),
            neighborhood: Neighborhood::Four,
            ..Default::default()
        };
        let t = wlf_levels(&img, None, &four).unwrap();
        assert!((t[0] - 100.0 / 3.0).abs() < 1e-4, "{t:?}");

        // With diagonals: interior pixels see 4 of 8 differing neighbours,
        // edge pixels 3 of 5, corners 2 of 3.
        let eight = WlfParams { levels: Some(1), ..Default::default() };
        let t = wlf_levels(&img, None, &eight).unwrap();
        let n = 16.0f64;
        let interior = (n - 2.0) * (n - 2.0) * 50.0;
        let edges = 4.0 * (n - 2.0) * (300.0 / 5.0);
        let corners = 4.0 * (200.0 / 3.0);
        let expected = (interior + edges + corners) / (n * n) / 3.0;
        assert!((t[0] - expected).abs() < 1e-4, "{} vs {expected}", t[0]);
    }

    #[test]
    fn stronger_checker_has_higher_contrast() {
        let p = WlfParams::default();
        let weak = wlf_contrast(&checker(64, 4, 100, 150), None, &p).unwrap();
        let strong = wlf_contrast(&checker(64, 4, 50, 200), None, &p).unwrap();
        assert!(strong > weak);
    }

    #[test]
    fn mask_restricts_domain() {
        let img = checker(32, 2, 0, 255);
        let empty = Mask::filled(32, 32, 0.0).unwrap();
        assert!(matches!(wlf_contrast(&img, Some(&empty), &WlfParams::default()), Err(Error::EmptyDomain)));
        let full = Mask::filled(32, 32, 1.0).unwrap();
        assert_eq!(
            wlf_contrast(&img, Some(&full), &WlfParams::default()).unwrap(),
            wlf_contrast(&img, None, &WlfParams::default()).unwrap()
        );
    }
}
