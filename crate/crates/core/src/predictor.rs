//! Memorability scoring back ends.
//!
//! Three kinds of predictor share one interface: a precomputed score table,
//! an external process speaking a line protocol, and a deterministic
//! built-in stub driven by image statistics.
//!
//! Wire protocol for external predictors: the parent writes one absolute
//! path per line to the child's stdin and closes it; the child answers with
//! `<path>\t<score>` per line on stdout, in request order, and exits 0. A
//! child may answer `<path>\tERROR` for an image it could not score.

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imagecore::{decode_image, Image};
use crate::labels::parse_score;
use crate::metrics::{intensity_stats, mean_gradient};

/// Environment variable naming the default external predictor command.
pub const PREDICTOR_CMD_ENV: &str = "MEMLAB_PREDICTOR_CMD";

/// Scores keyed by image id.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ScoreTable {
    scores: BTreeMap<String, f64>,
}

impl ScoreTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts a score; rejects values outside [0, 1] and duplicate ids.
    pub fn insert(&mut self, id: impl Into<String>, score: f64) -> Result<()> {
        let id = id.into();
        if !(0.0..=1.0).contains(&score) {
            return Err(Error::Validation {
                line: 0,
                msg: format!("score {score} for `{id}` outside [0, 1]"),
            });
        }
        if self.scores.contains_key(&id) {
            return Err(Error::Validation {
                line: 0,
                msg: format!("duplicate id `{id}`"),
            });
        }
        self.scores.insert(id, score);
        Ok(())
    }

    pub fn get(&self, id: &str) -> Option<f64> {
        self.scores.get(id).copied()
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    /// Entries in id order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.scores.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn merge(&mut self, other: ScoreTable) -> Result<()> {
        for (id, s) in other.scores {
            self.insert(id, s)?;
        }
        Ok(())
    }

    /// Parses `image_id,score` CSV text.
    pub fn read_csv<R: BufRead>(input: R) -> Result<ScoreTable> {
        let mut table = ScoreTable::new();
        let mut seen_header = false;
        for (i, line) in input.lines().enumerate() {
            let line_no = i + 1;
            let line = line.map_err(|e| Error::io("<scores>", e))?;
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            if !seen_header {
                if line.trim() != "image_id,score" {
                    return Err(Error::Parse {
                        line: line_no,
                        msg: format!("expected header `image_id,score`, got `{line}`"),
                    });
                }
                seen_header = true;
                continue;
            }
            let Some((id, score)) = line.split_once(',') else {
                return Err(Error::Parse {
                    line: line_no,
                    msg: "expected `image_id,score`".into(),
                });
            };
            if score.contains(',') {
                return Err(Error::Parse {
                    line: line_no,
                    msg: "too many fields".into(),
                });
            }
            let id = id.trim();
            if id.is_empty() {
                return Err(Error::Parse {
                    line: line_no,
                    msg: "empty image_id".into(),
                });
            }
            let score = parse_score(score, line_no)?;
            table.insert(id, score).map_err(|e| match e {
                Error::Validation { msg, .. } => Error::Validation { line: line_no, msg },
                other => other,
            })?;
        }
        if !seen_header {
            return Err(Error::Parse {
                line: 1,
                msg: "missing header `image_id,score`".into(),
            });
        }
        Ok(table)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let io = |e| Error::io("<scores>", e);
        writeln!(out, "image_id,score").map_err(io)?;
        for (id, s) in self.iter() {
            writeln!(out, "{id},{s}").map_err(io)?;
        }
        out.flush().map_err(io)
    }
}

pub fn load_score_csv(path: impl AsRef<Path>) -> Result<ScoreTable> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    ScoreTable::read_csv(BufReader::new(file))
}

pub fn save_score_csv(table: &ScoreTable, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    table.write_csv(BufWriter::new(file))
}

/// Id of an image file: its file name without extension.
pub fn image_id(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

/// Deterministic stand-in score from the luma gradient and spread.
///
/// `clamp(0.15 + 0.5·min(mean_grad/40, 1) + 0.35·min(std/80, 1), 0, 1)`.
/// It is a test oracle, not a model of human memory.
pub fn stub_score(img: &Image) -> Result<f64> {
    let g = (mean_gradient(img, None)? / 40.0).min(1.0);
    let (_, std) = intensity_stats(img, None)?;
    let s = (std / 80.0).min(1.0);
    Ok((0.15 + 0.5 * g + 0.35 * s).clamp(0.0, 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "source")]
pub enum PredictorHandle {
    ScoreStore(PathBuf),
    /// Shell command line, run with `sh -c`.
    ExternalCommand(String),
    Stub,
}

/// Loaded, ready-to-query predictor.
#[derive(Debug, Clone)]
pub enum Predictor {
    Store(ScoreTable),
    External(String),
    Stub,
}

impl PredictorHandle {
    /// Parses `stub`, `store:<path>` or `cmd:<command line>`.
    pub fn parse(spec: &str) -> Result<PredictorHandle> {
        if spec == "stub" {
            Ok(PredictorHandle::Stub)
        } else if let Some(p) = spec.strip_prefix("store:") {
            Ok(PredictorHandle::ScoreStore(PathBuf::from(p)))
        } else if let Some(c) = spec.strip_prefix("cmd:") {
            Ok(PredictorHandle::ExternalCommand(c.to_string()))
        } else {
            Err(Error::Parameter(format!(
                "predictor must be `stub`, `store:<csv>` or `cmd:<command>`, got `{spec}`"
            )))
        }
    }

    /// `cmd:` predictor from [`PREDICTOR_CMD_ENV`], if set and non-empty.
    pub fn from_env() -> Option<PredictorHandle> {
        std::env::var(PREDICTOR_CMD_ENV)
            .ok()
            .filter(|c| !c.trim().is_empty())
            .map(PredictorHandle::ExternalCommand)
    }

    pub fn open(&self) -> Result<Predictor> {
        match self {
            PredictorHandle::ScoreStore(p) => Ok(Predictor::Store(load_score_csv(p)?)),
            PredictorHandle::ExternalCommand(c) if c.trim().is_empty() => {
                Err(Error::Parameter("external predictor command is empty".into()))
            }
            PredictorHandle::ExternalCommand(c) => Ok(Predictor::External(c.clone())),
            PredictorHandle::Stub => Ok(Predictor::Stub),
        }
    }

    /// Text that changes whenever the predictor's answers could change.
    pub fn fingerprint(&self) -> String {
        match self {
            PredictorHandle::ScoreStore(p) => format!("store:{}", p.display()),
            PredictorHandle::ExternalCommand(c) => format!("cmd:{c}"),
            PredictorHandle::Stub => "stub".into(),
        }
    }
}

/// Scores plus per-image failures reported by the predictor.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct BatchOutcome {
    pub scores: ScoreTable,
    pub failures: Vec<(String, String)>,
}

impl Predictor {
    /// Whether scoring needs images on disk (as opposed to in memory).
    pub fn needs_files(&self) -> bool {
        !matches!(self, Predictor::Stub)
    }

    /// Scores every path; per-image failures become an error.
    pub fn predict_batch(&self, paths: &[PathBuf]) -> Result<ScoreTable> {
        let out = self.predict_batch_lenient(paths)?;
        if let Some((id, why)) = out.failures.first() {
            return Err(Error::Protocol {
                line: format!("{id}\tERROR"),
                msg: format!("predictor could not score `{id}`: {why}"),
            });
        }
        Ok(out.scores)
    }

    /// Scores every path, collecting images the predictor flagged as
    /// unscorable instead of failing.
    pub fn predict_batch_lenient(&self, paths: &[PathBuf]) -> Result<BatchOutcome> {
        let ids: Vec<String> = paths.iter().map(|p| image_id(p)).collect();
        {
            let mut seen = std::collections::HashSet::new();
            if let Some(dup) = ids.iter().find(|id| !seen.insert(id.as_str())) {
                return Err(Error::Contract(format!("duplicate image id `{dup}` in request")));
            }
        }
        match self {
            Predictor::Store(table) => {
                let missing: Vec<String> = ids.iter().filter(|id| table.get(id).is_none()).cloned().collect();
                if !missing.is_empty() {
                    return Err(Error::Lookup(missing));
                }
                let mut scores = ScoreTable::new();
                for id in ids {
                    let s = table.get(&id).unwrap();
                    scores.insert(id, s)?;
                }
                Ok(BatchOutcome {
                    scores,
                    failures: Vec::new(),
                })
            }
            Predictor::Stub => {
                let mut out = BatchOutcome::default();
                for (path, id) in paths.iter().zip(ids) {
                    match decode_image(path).and_then(|img| stub_score(&img)) {
                        Ok(s) => out.scores.insert(id, s)?,
                        Err(e) => out.failures.push((id, e.to_string())),
                    }
                }
                Ok(out)
            }
            Predictor::External(cmd) => run_external(cmd, paths),
        }
    }

    /// Splits `paths` into `shards` contiguous chunks, each scored by its
    /// own child process, and merges the results.
    pub fn predict_sharded(&self, paths: &[PathBuf], shards: usize) -> Result<BatchOutcome> {
        let shards = shards.max(1).min(paths.len().max(1));
        if shards == 1 || !matches!(self, Predictor::External(_)) {
            return self.predict_batch_lenient(paths);
        }
        let chunk = paths.len().div_ceil(shards);
        let results: Vec<Result<BatchOutcome>> = std::thread::scope(|s| {
            let handles: Vec<_> = paths
                .chunks(chunk)
                .map(|part| s.spawn(move || self.predict_batch_lenient(part)))
                .collect();
            handles.into_iter().map(|h| h.join().expect("scoring thread panicked")).collect()
        });
        let mut merged = BatchOutcome::default();
        for r in results {
            let r = r?;
            merged.scores.merge(r.scores)?;
            merged.failures.extend(r.failures);
        }
        merged.failures.sort();
        Ok(merged)
    }
}

/// Result of parsing one response line of the wire protocol.
#[derive(Debug, Clone, PartialEq)]
pub enum Response {
    Score(String, f64),
    Failed(String),
}

/// Parses `<path>\t<score>` or `<path>\tERROR`.
pub fn parse_response_line(line: &str) -> Result<Response> {
    let protocol = |msg: &str| Error::Protocol {
        line: line.to_string(),
        msg: msg.to_string(),
    };
    let (path, value) = line
        .rsplit_once('\t')
        .ok_or_else(|| protocol("expected `<path>\\t<score>`"))?;
    if path.is_empty() {
        return Err(protocol("empty path"));
    }
    if value == "ERROR" {
        return Ok(Response::Failed(path.to_string()));
    }
    let score: f64 = value
        .parse()
        .map_err(|_| protocol("score is not a number"))?;
    if !(0.0..=1.0).contains(&score) {
        return Err(Error::Validation {
            line: 0,
            msg: format!("score {score} outside [0, 1] in line `{line}`"),
        });
    }
    Ok(Response::Score(path.to_string(), score))
}

fn run_external(cmd: &str, paths: &[PathBuf]) -> Result<BatchOutcome> {
    let abs: Vec<String> = paths
        .iter()
        .map(|p| {
            std::path::absolute(p)
                .map(|a| a.display().to_string())
                .map_err(|e| Error::io(p, e))
        })
        .collect::<Result<_>>()?;
    if let Some(bad) = abs.iter().find(|p| p.contains('\n') || p.contains('\t')) {
        return Err(Error::Contract(format!("path `{bad}` cannot be sent over the line protocol")));
    }

    let mut child = Command::new("sh")
        .arg("-c")
        .arg(cmd)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::inherit())
        .spawn()
        .map_err(|e| Error::io(cmd, e))?;

    let stdin = child.stdin.take().expect("piped stdin");
    let stdout = child.stdout.take().expect("piped stdout");

    let outcome = std::thread::scope(|s| {
        let writer = s.spawn(|| -> std::io::Result<()> {
            let mut w = BufWriter::new(stdin);
            for p in &abs {
                writeln!(w, "{p}")?;
            }
            w.flush()
            // Dropping the writer closes the pipe and signals end of input.
        });

        let mut out = BatchOutcome::default();
        let mut lines = BufReader::new(stdout).lines();
        let mut result = Ok(());
        for (p, path) in abs.iter().zip(paths) {
            let line = match lines.next() {
                Some(Ok(l)) => l,
                Some(Err(e)) => {
                    result = Err(Error::io(cmd, e));
                    break;
                }
                None => {
                    result = Err(Error::Protocol {
                        line: String::new(),
                        msg: format!("child stopped answering before `{p}`"),
                    });
                    break;
                }
            };
            let resp = match parse_response_line(&line) {
                Ok(r) => r,
                Err(e) => {
                    result = Err(e);
                    break;
                }
            };
            let echoed = match &resp {
                Response::Score(q, _) | Response::Failed(q) => q,
            };
            if echoed != p {
                result = Err(Error::Protocol {
                    line: line.clone(),
                    msg: format!("expected answer for `{p}`"),
                });
                break;
            }
            let id = image_id(path);
            match resp {
                Response::Score(_, s) => {
                    if let Err(e) = out.scores.insert(id, s) {
                        result = Err(e);
                        break;
                    }
                }
                Response::Failed(_) => out.failures.push((id, "predictor reported ERROR".into())),
            }
        }
        if result.is_ok() {
            if let Some(Ok(extra)) = lines.next() {
                result = Err(Error::Protocol {
                    line: extra,
                    msg: "more responses than requests".into(),
                });
            }
        }
        // Drain so a chatty child is not blocked on a full pipe.
        for _ in lines.by_ref() {}
        let _ = writer.join();
        result.map(|_| out)
    });

    let status = child.wait().map_err(|e| Error::io(cmd, e))?;
    let out = outcome?;
    if !status.success() {
        return Err(Error::Protocol {
            line: String::new(),
            msg: format!("predictor exited with {status}"),
        });
    }
    Ok(out)
}
