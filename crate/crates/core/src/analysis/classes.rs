use std::collections::HashMap;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::faceprep::{make_oval_mask, PrepConfig};
use crate::imagecore::{decode_image, list_images};
use crate::labels::{LabelTable, MemClass};
use crate::metrics::{histogram, stats_record, write_histogram_csv, Histogram, MetricOptions, Normalization, StatsRecord};
use crate::predictor::image_id;

#[derive(Debug, Clone, PartialEq)]
pub struct ClassRow {
    pub class: MemClass,
    pub n: usize,
    /// Field-wise mean over the class; `None` for an empty class.
    pub stats: Option<StatsRecord>,
    /// Mean probability histogram; `None` for an empty class.
    pub histogram: Option<Histogram>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassAnalysis {
    /// Low, med, high.
    pub rows: Vec<ClassRow>,
}

/// Per-class means of the image statistics and luma histograms, measured
/// inside the face oval of each image.
///
/// Writes `class_stats.csv` (gamut volume in thousands) and one
/// `histogram_<class>.csv` per non-empty class into `out_dir`.
pub fn class_analysis(
    labels: &LabelTable,
    image_dir: &Path,
    out_dir: &Path,
    prep: &PrepConfig,
    opts: &MetricOptions,
) -> Result<ClassAnalysis> {
    prep.validate()?;
    let by_id: HashMap<String, std::path::PathBuf> = list_images(image_dir)?
        .into_iter()
        .map(|p| (image_id(&p), p))
        .collect();
    let missing: Vec<String> = labels
        .rows
        .iter()
        .filter(|r| !by_id.contains_key(&r.image_id))
        .map(|r| r.image_id.clone())
        .collect();
    if !missing.is_empty() {
        return Err(Error::Lookup(missing));
    }

    let mut members = labels.rows.clone();
    members.sort_by(|a, b| a.image_id.cmp(&b.image_id));
    let measured: Vec<Result<(StatsRecord, Histogram)>> = members
        .par_iter()
        .map(|r| {
            let img = decode_image(&by_id[&r.image_id])?;
            let mask = make_oval_mask(img.width(), img.height(), prep)?;
            Ok((
                stats_record(&img, Some(&mask), opts)?,
                histogram(&img, Some(&mask), Normalization::Probability)?,
            ))
        })
        .collect();

    let mut rows = Vec::new();
    for class in MemClass::ALL {
        let mut stats = Vec::new();
        let mut hist: Option<Vec<f64>> = None;
        for (r, m) in members.iter().zip(&measured) {
            if r.class != class {
                continue;
            }
            let (s, h) = m.as_ref().map_err(|e| Error::Format(format!("{}: {e}", r.image_id)))?;
            stats.push(*s);
            match &mut hist {
                Some(acc) => acc.iter_mut().zip(&h.bins).for_each(|(a, b)| *a += b),
                None => hist = Some(h.bins.clone()),
            }
        }
        let n = stats.len();
        rows.push(ClassRow {
            class,
            n,
            stats: StatsRecord::mean_of(&stats),
            histogram: hist.map(|mut bins| {
                bins.iter_mut().for_each(|b| *b /= n as f64);
                Histogram {
                    bins,
                    normalization: Normalization::Probability,
                }
            }),
        });
    }

    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let path = out_dir.join("class_stats.csv");
    let mut text = String::from("class,n,mean,std,mean_grad,gamut_volume_1e3,wlf\n");
    for row in &rows {
        match &row.stats {
            Some(s) => text.push_str(&format!(
                "{},{},{:.3},{:.3},{:.3},{:.3},{:.3}\n",
                row.class,
                row.n,
                s.mean,
                s.std,
                s.mean_grad,
                s.gamut_volume / 1e3,
                s.wlf
            )),
            // Empty classes keep their row so the table shape is stable.
            None => text.push_str(&format!("{},0,,,,,\n", row.class)),
        }
    }
    std::fs::File::create(&path)
        .and_then(|mut f| f.write_all(text.as_bytes()))
        .map_err(|e| Error::io(&path, e))?;
    for row in &rows {
        if let Some(h) = &row.histogram {
            let path = out_dir.join(format!("histogram_{}.csv", row.class));
            let f = std::fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
            write_histogram_csv(std::io::BufWriter::new(f), h)?;
        }
    }
    Ok(ClassAnalysis { rows })
}
