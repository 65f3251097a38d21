//! Image statistics: luma intensity moments, mean gradient, CIELAB gamut
//! volume, multi-level contrast and luma histograms.

pub mod hull;
pub mod wlf;

use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imagecore::color::{luma, srgb_pixel_to_lab};
use crate::imagecore::filter::gradient_field;
use crate::imagecore::{Image, Mask, ScalarField};

pub use self::wlf::{wlf_contrast, Neighborhood, WlfParams};

/// Seed used for hull subsampling unless the caller supplies one.
pub const DEFAULT_SEED: u64 = 42;

/// Unique colours kept before the hull is computed.
pub const MAX_HULL_POINTS: usize = 50_000;

/// One row of image statistics.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct StatsRecord {
    pub mean: f64,
    pub std: f64,
    pub mean_grad: f64,
    /// Cubic CIELAB units, unscaled.
    pub gamut_volume: f64,
    pub wlf: f64,
}

impl StatsRecord {
    /// Field-wise mean of several records.
    pub fn mean_of(records: &[StatsRecord]) -> Option<StatsRecord> {
        if records.is_empty() {
            return None;
        }
        let n = records.len() as f64;
        let sum = records.iter().fold(StatsRecord::default(), |a, r| StatsRecord {
            mean: a.mean + r.mean,
            std: a.std + r.std,
            mean_grad: a.mean_grad + r.mean_grad,
            gamut_volume: a.gamut_volume + r.gamut_volume,
            wlf: a.wlf + r.wlf,
        });
        Some(StatsRecord {
            mean: sum.mean / n,
            std: sum.std / n,
            mean_grad: sum.mean_grad / n,
            gamut_volume: sum.gamut_volume / n,
            wlf: sum.wlf / n,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Normalization {
    Counts,
    Probability,
}

/// 256-bin luma histogram.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub bins: Vec<f64>,
    pub normalization: Normalization,
}

/// Options shared by the statistics that depend on more than the image.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricOptions {
    pub seed: u64,
    pub wlf: WlfParams,
}

impl Default for MetricOptions {
    fn default() -> Self {
        MetricOptions {
            seed: DEFAULT_SEED,
            wlf: WlfParams::default(),
        }
    }
}

/// Rec. 709 luma of every pixel, in [0, 255].
pub fn luma_field(img: &Image, mask: Option<&Mask>) -> Result<ScalarField> {
    let bytes = img.require_srgb("luma_field")?;
    if let Some(m) = mask {
        m.check_matches(img.width(), img.height())?;
    }
    let values = bytes
        .chunks_exact(3)
        .map(|p| luma([p[0] as f64, p[1] as f64, p[2] as f64]))
        .collect();
    ScalarField::new(img.width(), img.height(), values)
}

/// Values of `field` at pixels the mask includes (all pixels without a mask).
fn masked_values<'a>(field: &'a ScalarField, mask: Option<&'a Mask>) -> impl Iterator<Item = f64> + 'a {
    field
        .values
        .iter()
        .enumerate()
        .filter(move |(i, _)| mask.is_none_or(|m| m.includes(*i)))
        .map(|(_, v)| *v)
}

/// Population mean and standard deviation of the masked luma.
pub fn intensity_stats(img: &Image, mask: Option<&Mask>) -> Result<(f64, f64)> {
    let field = luma_field(img, mask)?;
    let values: Vec<f64> = masked_values(&field, mask).collect();
    if values.is_empty() {
        return Err(Error::EmptyDomain);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    Ok((mean, var.sqrt()))
}

/// Mean luma gradient magnitude over the masked pixels.
///
/// Gradients are taken on the full field, then averaged over the mask.
pub fn mean_gradient(img: &Image, mask: Option<&Mask>) -> Result<f64> {
    let grad = gradient_field(&luma_field(img, mask)?);
    let (sum, n) = masked_values(&grad, mask).fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        return Err(Error::EmptyDomain);
    }
    Ok(sum / n as f64)
}

/// Deduplicated (and, if needed, subsampled) Lab point cloud of the mask.
pub fn lab_point_cloud(img: &Image, mask: Option<&Mask>, seed: u64) -> Result<Vec<[f64; 3]>> {
    let bytes = img.require_srgb("gamut_volume")?;
    if let Some(m) = mask {
        m.check_matches(img.width(), img.height())?;
    }
    let mut colours: Vec<[u8; 3]> = bytes
        .chunks_exact(3)
        .enumerate()
        .filter(|(i, _)| mask.is_none_or(|m| m.includes(*i)))
        .map(|(_, p)| [p[0], p[1], p[2]])
        .collect();
    if colours.is_empty() {
        return Err(Error::EmptyDomain);
    }
    colours.sort_unstable();
    colours.dedup();
    if colours.len() > MAX_HULL_POINTS {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut keep = rand::seq::index::sample(&mut rng, colours.len(), MAX_HULL_POINTS).into_vec();
        keep.sort_unstable();
        colours = keep.into_iter().map(|i| colours[i]).collect();
    }
    Ok(colours.into_iter().map(srgb_pixel_to_lab).collect())
}

/// Volume of the convex hull of the masked pixels in CIELAB.
pub fn gamut_volume(img: &Image, mask: Option<&Mask>, seed: u64) -> Result<f64> {
    Ok(hull::hull_volume(&lab_point_cloud(img, mask, seed)?))
}

fn luma_bin(v: f64) -> usize {
    v.round().clamp(0.0, 255.0) as usize
}

/// Luma histogram of one image over the masked pixels.
pub fn histogram(img: &Image, mask: Option<&Mask>, normalization: Normalization) -> Result<Histogram> {
    let field = luma_field(img, mask)?;
    let mut bins = vec![0.0; 256];
    let mut n = 0usize;
    for v in masked_values(&field, mask) {
        bins[luma_bin(v)] += 1.0;
        n += 1;
    }
    if n == 0 {
        return Err(Error::EmptyDomain);
    }
    if normalization == Normalization::Probability {
        bins.iter_mut().for_each(|b| *b /= n as f64);
    }
    Ok(Histogram {
        bins,
        normalization,
    })
}

/// Average of per-image probability histograms.
pub fn mean_histogram(imgs: &[Image], mask: Option<&Mask>) -> Result<Histogram> {
    if imgs.is_empty() {
        return Err(Error::Contract("mean_histogram needs at least one image".into()));
    }
    let mut acc = vec![0.0; 256];
    for img in imgs {
        let h = histogram(img, mask, Normalization::Probability)?;
        acc.iter_mut().zip(h.bins).for_each(|(a, b)| *a += b);
    }
    let n = imgs.len() as f64;
    acc.iter_mut().for_each(|a| *a /= n);
    Ok(Histogram {
        bins: acc,
        normalization: Normalization::Probability,
    })
}

pub fn stats_record(img: &Image, mask: Option<&Mask>, opts: &MetricOptions) -> Result<StatsRecord> {
    let (mean, std) = intensity_stats(img, mask)?;
    Ok(StatsRecord {
        mean,
        std,
        mean_grad: mean_gradient(img, mask)?,
        gamut_volume: gamut_volume(img, mask, opts.seed)?,
        wlf: wlf_contrast(img, mask, &opts.wlf)?,
    })
}

pub const STATS_CSV_HEADER: [&str; 6] = ["image_id", "mean", "std", "mean_grad", "gamut_volume", "wlf"];

/// Writes `image_id,mean,std,mean_grad,gamut_volume,wlf` rows.
pub fn write_stats_csv<W: Write>(out: W, rows: &[(String, StatsRecord)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let wrap = |e: csv::Error| Error::Format(e.to_string());
    w.write_record(STATS_CSV_HEADER).map_err(wrap)?;
    for (id, r) in rows {
        w.write_record([
            id.clone(),
            r.mean.to_string(),
            r.std.to_string(),
            r.mean_grad.to_string(),
            r.gamut_volume.to_string(),
            r.wlf.to_string(),
        ])
        .map_err(wrap)?;
    }
    w.flush().map_err(|e| Error::io("<stats csv>", e))
}

/// Writes a `bin,value` CSV.
pub fn write_histogram_csv<W: Write>(out: W, hist: &Histogram) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let wrap = |e: csv::Error| Error::Format(e.to_string());
    w.write_record(["bin", "value"]).map_err(wrap)?;
    for (i, v) in hist.bins.iter().enumerate() {
        w.write_record([i.to_string(), v.to_string()]).map_err(wrap)?;
    }
    w.flush().map_err(|e| Error::io("<histogram csv>", e))
}
