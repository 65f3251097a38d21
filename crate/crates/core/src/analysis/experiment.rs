use std::collections::HashSet;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{delta_stats, DeltaStats};
use crate::edits::{EditRecipe, RecipeSpec};
use crate::error::{Error, Result};
use crate::imagecore::{decode_image, encode_image, list_images, Image, Mask};
use crate::predictor::{image_id, stub_score, Predictor, PredictorHandle};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// Image directory, or a file listing images (one path per line, or a
    /// preparation manifest with an `output` column).
    pub images: PathBuf,
    pub recipes: Vec<RecipeSpec>,
    pub predictor: PredictorHandle,
    pub out_dir: Option<PathBuf>,
    pub workers: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageRow {
    pub image_id: String,
    pub original: f64,
    pub edited: f64,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecipeResult {
    pub label: String,
    pub recipe: EditRecipe,
    /// Sorted by original score descending, ties by id.
    pub rows: Vec<ImageRow>,
    pub stats: Option<DeltaStats>,
    /// Images dropped from this recipe, with the reason.
    pub failures: Vec<(String, String)>,
    /// Set when the whole recipe was abandoned (e.g. predictor protocol error).
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub tool_version: String,
    pub started_unix: u64,
    pub finished_unix: u64,
    pub n_images: usize,
    /// Images whose original could not be decoded or scored.
    pub original_failures: Vec<(String, String)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub metadata: RunMetadata,
    pub recipes: Vec<RecipeResult>,
}

fn unix_now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

/// Image paths of a dataset, sorted by id. Ids must be unique.
pub fn load_dataset(source: &Path) -> Result<Vec<PathBuf>> {
    let mut paths = if source.is_dir() {
        list_images(source)?
    } else {
        read_listing(source)?
    };
    paths.sort_by_key(|p| image_id(p));
    let mut seen = HashSet::new();
    for p in &paths {
        let id = image_id(p);
        if !seen.insert(id.clone()) {
            return Err(Error::Contract(format!("two dataset images share the id `{id}`")));
        }
    }
    Ok(paths)
}

fn read_listing(file: &Path) -> Result<Vec<PathBuf>> {
    let text = std::fs::read_to_string(file).map_err(|e| Error::io(file, e))?;
    let base = file.parent().unwrap_or(Path::new("."));
    let lines: Vec<&str> = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .collect();
    let resolve = |p: &str| {
        let p = PathBuf::from(p);
        if p.is_absolute() { p } else { base.join(p) }
    };
    let Some(header) = lines.first() else {
        return Ok(Vec::new());
    };
    let cols: Vec<&str> = header.split(',').collect();
    let Some(out_col) = cols.iter().position(|c| *c == "output") else {
        return Ok(lines.into_iter().map(resolve).collect());
    };
    let status_col = cols.iter().position(|c| *c == "status");
    // Manifest rows; failed preparations are skipped.
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line() as usize),
            msg: e.to_string(),
        })?;
        let ok = status_col.and_then(|c| rec.get(c)).is_none_or(|s| s.starts_with("ok"));
        match rec.get(out_col) {
            Some(p) if ok && !p.is_empty() => out.push(resolve(p)),
            _ => {}
        }
    }
    Ok(out)
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.recipes.is_empty() {
            return Err(Error::Parameter("experiment needs at least one recipe".into()));
        }
        if self.workers == 0 {
            return Err(Error::Parameter("workers must be at least 1".into()));
        }
        for spec in &self.recipes {
            spec.expand()?;
        }
        Ok(())
    }
}

struct Original {
    id: String,
    path: PathBuf,
    score: f64,
}

/// Scores originals once, applies every recipe (and sweep point) to every
/// image, scores the edits and summarises the changes.
///
/// Work fans out over `cfg.workers` threads; every aggregate is built from
/// id-sorted collections, so a deterministic predictor gives identical
/// results for any worker count.
pub fn run_edit_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let started_unix = unix_now();
    let predictor = cfg.predictor.open()?;
    let recipes: Vec<EditRecipe> = cfg
        .recipes
        .iter()
        .map(RecipeSpec::expand)
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    let paths = load_dataset(&cfg.images)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::Parameter(format!("cannot start worker pool: {e}")))?;

    pool.install(|| {
        let (originals, original_failures) = score_originals(&predictor, &paths, cfg.workers)?;
        let results = recipes
            .iter()
            .map(|r| run_recipe(&predictor, r, &originals, cfg.workers))
            .collect();
        Ok(ExperimentReport {
            config: cfg.clone(),
            metadata: RunMetadata {
                tool_version: env!("CARGO_PKG_VERSION").to_string(),
                started_unix,
                finished_unix: unix_now(),
                n_images: paths.len(),
                original_failures,
            },
            recipes: results,
        })
    })
}

type Failures = Vec<(String, String)>;

fn score_originals(predictor: &Predictor, paths: &[PathBuf], workers: usize) -> Result<(Vec<Original>, Failures)> {
    let mut failures = Vec::new();
    let mut originals = Vec::new();
    if predictor.needs_files() {
        let out = predictor.predict_sharded(paths, workers)?;
        failures = out.failures;
        for p in paths {
            let id = image_id(p);
            if let Some(score) = out.scores.get(&id) {
                originals.push(Original {
                    id,
                    path: p.clone(),
                    score,
                });
            }
        }
    } else {
        let scored: Vec<Result<f64>> = paths
            .par_iter()
            .map(|p| decode_image(p).and_then(|img| stub_score(&img)))
            .collect();
        for (p, s) in paths.iter().zip(scored) {
            match s {
                Ok(score) => originals.push(Original {
                    id: image_id(p),
                    path: p.clone(),
                    score,
                }),
                Err(e) => failures.push((image_id(p), e.to_string())),
            }
        }
    }
    Ok((originals, failures))
}

fn edit_one(path: &Path, recipe: &EditRecipe, mask: Option<&Mask>) -> Result<Image> {
    let img = decode_image(path)?;
    recipe.op.apply(&img, mask)
}

fn run_recipe(predictor: &Predictor, recipe: &EditRecipe, originals: &[Original], workers: usize) -> RecipeResult {
    let mut result = RecipeResult {
        label: recipe.label(),
        recipe: recipe.clone(),
        rows: Vec::new(),
        stats: None,
        failures: Vec::new(),
        error: None,
    };
    let mask = if recipe.op.kind().uses_mask() {
        match recipe.load_mask() {
            Ok(m) => m,
            Err(e) => {
                result.error = Some(e.to_string());
                return result;
            }
        }
    } else {
        None
    };

    let edited: Vec<Result<f64>> = if predictor.needs_files() {
        match score_edits_from_files(predictor, recipe, mask.as_ref(), originals, workers) {
            Ok(v) => v,
            Err(e) => {
                result.error = Some(e.to_string());
                return result;
            }
        }
    } else {
        originals
            .par_iter()
            .map(|o| edit_one(&o.path, recipe, mask.as_ref()).and_then(|img| stub_score(&img)))
            .collect()
    };

    for (o, e) in originals.iter().zip(edited) {
        match e {
            Ok(score) => result.rows.push(ImageRow {
                image_id: o.id.clone(),
                original: o.score,
                edited: score,
                delta: score - o.score,
            }),
            Err(err) => result.failures.push((o.id.clone(), err.to_string())),
        }
    }
    result
        .rows
        .sort_by(|a, b| b.original.total_cmp(&a.original).then_with(|| a.image_id.cmp(&b.image_id)));
    if !result.rows.is_empty() {
        let orig: Vec<f64> = result.rows.iter().map(|r| r.original).collect();
        let edit: Vec<f64> = result.rows.iter().map(|r| r.edited).collect();
        result.stats = delta_stats(&orig, &edit).ok();
    }
    result
}

/// Writes edited copies to a scratch directory and scores them through the
/// path-based predictor protocol. The outer error aborts the recipe.
fn score_edits_from_files(
    predictor: &Predictor,
    recipe: &EditRecipe,
    mask: Option<&Mask>,
    originals: &[Original],
    workers: usize,
) -> Result<Vec<Result<f64>>> {
    let scratch = tempfile::tempdir().map_err(|e| Error::io(std::env::temp_dir(), e))?;
    let written: Vec<Result<PathBuf>> = originals
        .par_iter()
        .map(|o| {
            let img = edit_one(&o.path, recipe, mask)?;
            let dest = scratch.path().join(format!("{}.png", o.id));
            encode_image(&img, &dest)?;
            Ok(dest)
        })
        .collect();
    let ok_paths: Vec<PathBuf> = written.iter().filter_map(|w| w.as_ref().ok().cloned()).collect();
    let out = predictor.predict_sharded(&ok_paths, workers)?;
    Ok(originals
        .iter()
        .zip(written)
        .map(|(o, w)| {
            w.and_then(|_| {
                out.scores.get(&o.id).ok_or_else(|| {
                    let why = out
                        .failures
                        .iter()
                        .find(|(id, _)| *id == o.id)
                        .map_or("no score returned".to_string(), |(_, w)| w.clone());
                    Error::Protocol {
                        line: String::new(),
                        msg: why,
                    }
                })
            })
        })
        .collect())
}
