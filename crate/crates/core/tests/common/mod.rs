//! Deterministic synthetic images shared by the integration tests.
#![allow(dead_code)]

use std::path::Path;

use memlab::imagecore::{encode_image, Image};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn clamp_mid(v: f64) -> u8 {
    // Kept well inside [0, 255] so contrast and sharpening do not clip much.
    v.clamp(40.0, 215.0).round() as u8
}

/// Smooth two-colour sinusoidal gradient.
pub fn gradient(w: usize, h: usize, rng: &mut ChaCha8Rng) -> Image {
    let fx: f64 = rng.random_range(1.0..3.0);
    let fy: f64 = rng.random_range(1.0..3.0);
    let phase: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    let base: [f64; 3] = [rng.random_range(90.0..160.0), rng.random_range(90.0..160.0), rng.random_range(90.0..160.0)];
    let amp: [f64; 3] = [rng.random_range(20.0..50.0), rng.random_range(20.0..50.0), rng.random_range(20.0..50.0)];
    Image::from_fn_srgb(w, h, |x, y| {
        let u = x as f64 / w as f64 * std::f64::consts::TAU * fx;
        let v = y as f64 / h as f64 * std::f64::consts::TAU * fy;
        let t = (u + phase).sin() * 0.6 + (v - phase).cos() * 0.4;
        [
            clamp_mid(base[0] + amp[0] * t),
            clamp_mid(base[1] - amp[1] * t),
            clamp_mid(base[2] + amp[2] * (u * 0.5).cos()),
        ]
    })
    .unwrap()
}

/// Value noise with a random colour tint.
pub fn texture(w: usize, h: usize, rng: &mut ChaCha8Rng) -> Image {
    let cell = rng.random_range(2..6usize);
    let gw = w / cell + 2;
    let gh = h / cell + 2;
    let grid: Vec<f64> = (0..gw * gh).map(|_| rng.random_range(-1.0..1.0)).collect();
    let tint: [f64; 3] = [rng.random_range(0.6..1.2), rng.random_range(0.6..1.2), rng.random_range(0.6..1.2)];
    let base: f64 = rng.random_range(100.0..150.0);
    Image::from_fn_srgb(w, h, |x, y| {
        let (gx, gy) = (x as f64 / cell as f64, y as f64 / cell as f64);
        let (x0, y0) = (gx.floor() as usize, gy.floor() as usize);
        let (tx, ty) = (gx - x0 as f64, gy - y0 as f64);
        let g = |i: usize, j: usize| grid[j * gw + i];
        let v = g(x0, y0) * (1.0 - tx) * (1.0 - ty)
            + g(x0 + 1, y0) * tx * (1.0 - ty)
            + g(x0, y0 + 1) * (1.0 - tx) * ty
            + g(x0 + 1, y0 + 1) * tx * ty;
        [0, 1, 2].map(|c| clamp_mid(base + 60.0 * v * tint[c]))
    })
    .unwrap()
}

/// Face-like card: a skin-toned ellipse with shaded features on a coloured
/// background, plus mild noise.
pub fn portrait(w: usize, h: usize, rng: &mut ChaCha8Rng) -> Image {
    let bg: [f64; 3] = [rng.random_range(60.0..200.0), rng.random_range(60.0..200.0), rng.random_range(60.0..200.0)];
    let skin: [f64; 3] = [rng.random_range(170.0..205.0), rng.random_range(120.0..160.0), rng.random_range(90.0..130.0)];
    let noise: Vec<f64> = (0..w * h).map(|_| rng.random_range(-6.0..6.0)).collect();
    let (cx, cy) = (w as f64 / 2.0, h as f64 / 2.0);
    let (a, b) = (w as f64 * 0.3, h as f64 * 0.4);
    Image::from_fn_srgb(w, h, |x, y| {
        let (dx, dy) = ((x as f64 + 0.5 - cx) / a, (y as f64 + 0.5 - cy) / b);
        let r2 = dx * dx + dy * dy;
        let n = noise[y * w + x];
        let eye = |ex: f64| ((dx - ex).powi(2) + (dy + 0.25).powi(2)) < 0.02;
        let px = if r2 > 1.0 {
            bg
        } else if eye(-0.35) || eye(0.35) {
            [60.0, 50.0, 50.0]
        } else if dy > 0.35 && dy < 0.45 && dx.abs() < 0.3 {
            [150.0, 70.0, 70.0]
        } else {
            let shade = 1.0 - 0.25 * r2;
            skin.map(|c| c * shade)
        };
        px.map(|c| clamp_mid(c + n))
    })
    .unwrap()
}

/// `n` images cycling through gradients, textures and portraits.
pub fn corpus(n: usize, w: usize, h: usize, seed: u64) -> Vec<Image> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| match i % 3 {
            0 => gradient(w, h, &mut rng),
            1 => texture(w, h, &mut rng),
            _ => portrait(w, h, &mut rng),
        })
        .collect()
}

/// Writes `img_000.png`, `img_001.png`, … into `dir`.
pub fn write_corpus(dir: &Path, images: &[Image]) {
    std::fs::create_dir_all(dir).unwrap();
    for (i, img) in images.iter().enumerate() {
        encode_image(img, dir.join(format!("img_{i:03}.png"))).unwrap();
    }
}

/// Every file in `dir` with its bytes, sorted by name.
pub fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap())
        })
        .collect();
    files.sort();
    files
}
