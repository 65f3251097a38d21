//! Oval-mask, crop and resize preparation of face photographs.

use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imagecore::{decode_image, encode_image, resize_bilinear, Image, Mask};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrepConfig {
    /// Ellipse width as a fraction of image width.
    pub axis_frac_x: f64,
    /// Ellipse height as a fraction of image height.
    pub axis_frac_y: f64,
    pub fill: [u8; 3],
    pub out_size: usize,
    /// Soft-edge width as a fraction of the shorter image side.
    pub feather: f64,
}

impl Default for PrepConfig {
    fn default() -> Self {
        PrepConfig {
            axis_frac_x: 0.80,
            axis_frac_y: 0.90,
            fill: [255, 255, 255],
            out_size: 128,
            feather: 0.02,
        }
    }
}

impl PrepConfig {
    pub fn validate(&self) -> Result<()> {
        let frac = |v: f64| v > 0.0 && v <= 1.0;
        if !frac(self.axis_frac_x) || !frac(self.axis_frac_y) {
            return Err(Error::Parameter(format!(
                "axis fractions must be in (0, 1], got ({}, {})",
                self.axis_frac_x, self.axis_frac_y
            )));
        }
        if self.out_size < 8 {
            return Err(Error::Parameter(format!("out_size must be >= 8, got {}", self.out_size)));
        }
        if !(0.0..1.0).contains(&self.feather) {
            return Err(Error::Parameter(format!("feather must be in [0, 1), got {}", self.feather)));
        }
        Ok(())
    }

    fn semi_axes(&self, w: usize, h: usize) -> (f64, f64) {
        (self.axis_frac_x * w as f64 / 2.0, self.axis_frac_y * h as f64 / 2.0)
    }
}

/// Centred elliptical mask for a `w` x `h` image.
pub fn make_oval_mask(w: usize, h: usize, cfg: &PrepConfig) -> Result<Mask> {
    cfg.validate()?;
    let (a, b) = cfg.semi_axes(w, h);
    Mask::ellipse(w, h, a, b, cfg.feather * w.min(h) as f64)
}

/// Masks the background with the fill colour, crops to the ellipse's
/// bounding box and resizes to `out_size` x `out_size`.
pub fn prepare_face(img: &Image, cfg: &PrepConfig) -> Result<Image> {
    let bytes = img.require_srgb("prepare_face")?;
    let (w, h) = (img.width(), img.height());
    let mask = make_oval_mask(w, h, cfg)?;
    let mut out = Vec::with_capacity(bytes.len());
    for (p, &m) in bytes.chunks_exact(3).zip(mask.weights()) {
        for c in 0..3 {
            let v = m * p[c] as f64 + (1.0 - m) * cfg.fill[c] as f64;
            out.push(crate::imagecore::quantize_u8(v));
        }
    }
    let composited = Image::srgb8(w, h, out)?;

    let (a, b) = cfg.semi_axes(w, h);
    let x0 = ((w as f64 / 2.0 - a).floor().max(0.0)) as usize;
    let x1 = ((w as f64 / 2.0 + a).ceil() as usize).min(w);
    let y0 = ((h as f64 / 2.0 - b).floor().max(0.0)) as usize;
    let y1 = ((h as f64 / 2.0 + b).ceil() as usize).min(h);
    let cropped = composited.crop(x0, y0, (x1 - x0).max(1), (y1 - y0).max(1))?;
    resize_bilinear(&cropped, cfg.out_size, cfg.out_size)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PrepStatus {
    Ok,
    /// The source was smaller than the output and had to be upscaled.
    Upscaled,
    Failed(String),
}

impl PrepStatus {
    pub fn as_text(&self) -> String {
        match self {
            PrepStatus::Ok => "ok".into(),
            PrepStatus::Upscaled => "ok-upscaled".into(),
            PrepStatus::Failed(msg) => format!("failed: {msg}"),
        }
    }

    pub fn is_ok(&self) -> bool {
        !matches!(self, PrepStatus::Failed(_))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ManifestRow {
    pub source: PathBuf,
    pub output: Option<PathBuf>,
    pub status: PrepStatus,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Manifest {
    pub config: PrepConfig,
    pub rows: Vec<ManifestRow>,
}

impl Manifest {
    /// Writes the manifest CSV. The first line is a `#` comment echoing the
    /// configuration, followed by `source,output,status` rows.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let c = &self.config;
        writeln!(
            out,
            "# axis_frac_x={} axis_frac_y={} fill={},{},{} out_size={} feather={}",
            c.axis_frac_x, c.axis_frac_y, c.fill[0], c.fill[1], c.fill[2], c.out_size, c.feather
        )
        .map_err(|e| Error::io("<manifest>", e))?;
        let mut w = csv::Writer::from_writer(out);
        let wrap = |e: csv::Error| Error::Format(e.to_string());
        w.write_record(["source", "output", "status"]).map_err(wrap)?;
        for r in &self.rows {
            w.write_record([
                r.source.display().to_string(),
                r.output.as_ref().map(|p| p.display().to_string()).unwrap_or_default(),
                r.status.as_text(),
            ])
            .map_err(wrap)?;
        }
        w.flush().map_err(|e| Error::io("<manifest>", e))
    }
}

/// Regular files directly inside `dir`, sorted by path.
pub fn list_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut files = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let path = entry.path();
        if path.is_file() {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

fn prepare_one(src: &Path, out_dir: &Path, cfg: &PrepConfig) -> ManifestRow {
    let result = (|| -> Result<(PathBuf, PrepStatus)> {
        let img = decode_image(src)?;
        let status = if img.width() < cfg.out_size || img.height() < cfg.out_size {
            PrepStatus::Upscaled
        } else {
            PrepStatus::Ok
        };
        let out = prepare_face(&img, cfg)?;
        let stem = src.file_stem().unwrap_or_default().to_string_lossy();
        let dest = out_dir.join(format!("{stem}.png"));
        encode_image(&out, &dest)?;
        Ok((dest, status))
    })();
    match result {
        Ok((dest, status)) => ManifestRow {
            source: src.to_path_buf(),
            output: Some(dest),
            status,
        },
        Err(e) => ManifestRow {
            source: src.to_path_buf(),
            output: None,
            status: PrepStatus::Failed(e.to_string()),
        },
    }
}

/// Prepares every file in `in_dir`, writing PNGs and `manifest.csv` into
/// `out_dir`. Undecodable files become failed rows.
pub fn prepare_dataset(in_dir: &Path, out_dir: &Path, cfg: &PrepConfig) -> Result<Manifest> {
    cfg.validate()?;
    let files = list_files(in_dir)?;
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let rows: Vec<ManifestRow> = files
        .par_iter()
        .map(|src| prepare_one(src, out_dir, cfg))
        .collect();
    let manifest = Manifest { config: *cfg, rows };
    let path = out_dir.join("manifest.csv");
    let file = std::fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
    manifest.write_csv(std::io::BufWriter::new(file))?;
    Ok(manifest)
}
