//! Memorability scores, percentile thresholds and low/med/high binning.

use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A memorability score in [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct MemScore(f64);

impl MemScore {
    pub fn new(value: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&value) {
            Ok(MemScore(value))
        } else {
            Err(Error::Validation {
                line: 0,
                msg: format!("score {value} outside [0, 1]"),
            })
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for MemScore {
    type Error = Error;
    fn try_from(v: f64) -> Result<Self> {
        MemScore::new(v)
    }
}

impl From<MemScore> for f64 {
    fn from(s: MemScore) -> f64 {
        s.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MemClass {
    Low,
    Med,
    High,
}

impl MemClass {
    pub const ALL: [MemClass; 3] = [MemClass::Low, MemClass::Med, MemClass::High];

    pub fn as_str(self) -> &'static str {
        match self {
            MemClass::Low => "low",
            MemClass::Med => "med",
            MemClass::High => "high",
        }
    }
}

impl fmt::Display for MemClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MemClass {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "low" => Ok(MemClass::Low),
            "med" => Ok(MemClass::Med),
            "high" => Ok(MemClass::High),
            other => Err(Error::Parse {
                line: 0,
                msg: format!("unknown class `{other}`"),
            }),
        }
    }
}

/// Fractions of the data assigned to the low and high classes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub low_frac: f64,
    pub high_frac: f64,
}

impl SplitSpec {
    pub fn new(low_frac: f64, high_frac: f64) -> Result<Self> {
        if !(low_frac > 0.0 && high_frac > 0.0 && low_frac + high_frac < 1.0) {
            return Err(Error::Parameter(format!(
                "split needs low, high > 0 and low + high < 1, got ({low_frac}, {high_frac})"
            )));
        }
        Ok(SplitSpec { low_frac, high_frac })
    }

    pub fn mid_frac(&self) -> f64 {
        1.0 - self.low_frac - self.high_frac
    }
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            low_frac: 0.1,
            high_frac: 0.1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub t_low: f64,
    pub t_high: f64,
}

/// Percentile by linear interpolation between closest ranks.
///
/// `rank = p/100 * (n - 1)` on the ascending-sorted values.
pub fn percentile(values: &[f64], p: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::Contract("percentile of an empty list".into()));
    }
    if !(0.0..=100.0).contains(&p) {
        return Err(Error::Parameter(format!("percentile p must be in [0, 100], got {p}")));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(percentile_sorted(&sorted, p))
}

/// [`percentile`] on an already ascending-sorted, nonempty slice.
///
/// Upper percentiles are interpolated from the top end, so negating and
/// reversing the input maps the p-th percentile exactly onto the negated
/// (100 − p)-th.
pub fn percentile_sorted(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    let from_top = p > 50.0;
    let q = if from_top { 100.0 - p } else { p };
    let rank = q / 100.0 * (n - 1) as f64;
    let lo = rank.floor() as usize;
    let frac = rank - lo as f64;
    let at = |i: usize| if from_top { sorted[n - 1 - i] } else { sorted[i] };
    if frac == 0.0 {
        at(lo)
    } else if frac == 0.5 {
        (at(lo) + at(lo + 1)) / 2.0
    } else {
        at(lo) + frac * (at(lo + 1) - at(lo))
    }
}

pub fn compute_thresholds(scores: &[f64], split: &SplitSpec) -> Result<Thresholds> {
    let mut sorted = scores.to_vec();
    if sorted.is_empty() {
        return Err(Error::Contract("thresholds need at least one score".into()));
    }
    sorted.sort_by(f64::total_cmp);
    Ok(Thresholds {
        t_low: percentile_sorted(&sorted, 100.0 * split.low_frac),
        t_high: percentile_sorted(&sorted, 100.0 * (1.0 - split.high_frac)),
    })
}

/// Low below `t_low`, High at or above `t_high`, Med otherwise.
pub fn classify(score: f64, t: &Thresholds) -> MemClass {
    if score >= t.t_high {
        MemClass::High
    } else if score < t.t_low {
        MemClass::Low
    } else {
        MemClass::Med
    }
}

/// Thresholds at the `k - 1` interior k-quantiles, for a k-class split.
pub fn quantile_thresholds(scores: &[f64], k: usize) -> Result<Vec<f64>> {
    if k < 2 {
        return Err(Error::Parameter(format!("need at least 2 classes, got {k}")));
    }
    let mut sorted = scores.to_vec();
    if sorted.is_empty() {
        return Err(Error::Contract("thresholds need at least one score".into()));
    }
    sorted.sort_by(f64::total_cmp);
    Ok((1..k)
        .map(|i| percentile_sorted(&sorted, 100.0 * i as f64 / k as f64))
        .collect())
}

/// Class index in `0..=thresholds.len()`, using the same boundary rule as
/// [`classify`].
pub fn classify_k(score: f64, thresholds: &[f64]) -> usize {
    thresholds.iter().take_while(|&&t| score >= t).count()
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabelRow {
    pub image_id: String,
    pub score: f64,
    pub class: MemClass,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabelTable {
    pub thresholds: Thresholds,
    pub rows: Vec<LabelRow>,
}

/// Thresholds from the whole table, then a class for every entry.
pub fn bin_dataset(scores: &[(String, f64)], split: &SplitSpec) -> Result<LabelTable> {
    let values: Vec<f64> = scores.iter().map(|(_, s)| *s).collect();
    let thresholds = compute_thresholds(&values, split)?;
    let rows = scores
        .iter()
        .map(|(id, s)| LabelRow {
            image_id: id.clone(),
            score: *s,
            class: classify(*s, &thresholds),
        })
        .collect();
    Ok(LabelTable { thresholds, rows })
}

impl LabelTable {
    /// `# t_low=..,t_high=..` then `image_id,score,class` rows.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(
            out,
            "# t_low={},t_high={}",
            self.thresholds.t_low, self.thresholds.t_high
        )
        .map_err(|e| Error::io("<labels>", e))?;
        let mut w = csv::Writer::from_writer(out);
        let wrap = |e: csv::Error| Error::Format(e.to_string());
        w.write_record(["image_id", "score", "class"]).map_err(wrap)?;
        for r in &self.rows {
            w.write_record([r.image_id.clone(), r.score.to_string(), r.class.to_string()])
                .map_err(wrap)?;
        }
        w.flush().map_err(|e| Error::io("<labels>", e))
    }

    /// Reads a label CSV. The threshold comment line is optional; without it
    /// the thresholds are reported as NaN.
    pub fn read_csv<R: BufRead>(input: R) -> Result<LabelTable> {
        let mut thresholds = Thresholds {
            t_low: f64::NAN,
            t_high: f64::NAN,
        };
        let mut rows = Vec::new();
        let mut seen_header = false;
        for (i, line) in input.lines().enumerate() {
            let line_no = i + 1;
            let line = line.map_err(|e| Error::io("<labels>", e))?;
            let line = line.trim_end_matches('\r');
            if let Some(comment) = line.strip_prefix('#') {
                if let Some(t) = parse_threshold_comment(comment) {
                    thresholds = t;
                }
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            if !seen_header {
                if line.trim() != "image_id,score,class" {
                    return Err(Error::Parse {
                        line: line_no,
                        msg: format!("expected header `image_id,score,class`, got `{line}`"),
                    });
                }
                seen_header = true;
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 3 {
                return Err(Error::Parse {
                    line: line_no,
                    msg: format!("expected 3 fields, got {}", fields.len()),
                });
            }
            let score = parse_score(fields[1], line_no)?;
            let class = fields[2]
                .trim()
                .parse()
                .map_err(|_| Error::Parse {
                    line: line_no,
                    msg: format!("unknown class `{}`", fields[2]),
                })?;
            rows.push(LabelRow {
                image_id: fields[0].trim().to_string(),
                score,
                class,
            });
        }
        if !seen_header {
            return Err(Error::Parse {
                line: 1,
                msg: "missing header `image_id,score,class`".into(),
            });
        }
        Ok(LabelTable { thresholds, rows })
    }
}

fn parse_threshold_comment(comment: &str) -> Option<Thresholds> {
    let mut low = None;
    let mut high = None;
    for part in comment.trim().split(',') {
        let (k, v) = part.split_once('=')?;
        let v: f64 = v.trim().parse().ok()?;
        match k.trim() {
            "t_low" => low = Some(v),
            "t_high" => high = Some(v),
            _ => {}
        }
    }
    Some(Thresholds {
        t_low: low?,
        t_high: high?,
    })
}

/// Parses a score field, checking it is a finite decimal in [0, 1].
pub(crate) fn parse_score(field: &str, line: usize) -> Result<f64> {
    let v: f64 = field.trim().parse().map_err(|_| Error::Parse {
        line,
        msg: format!("`{field}` is not a number"),
    })?;
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::Validation {
            line,
            msg: format!("score {v} outside [0, 1]"),
        });
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn percentile_examples() {
        assert_eq!(percentile(&[5.0], 37.0).unwrap(), 5.0);
        assert_eq!(percentile(&[0.0, 1.0, 2.0, 3.0, 4.0], 50.0).unwrap(), 2.0);
        assert!((percentile(&[1.0, 2.0, 3.0, 4.0], 90.0).unwrap() - 3.7).abs() < 1e-12);
        assert!(matches!(percentile(&[], 50.0), Err(Error::Contract(_))));
        assert!(matches!(percentile(&[1.0], 101.0), Err(Error::Parameter(_))));
    }

    #[test]
    fn thresholds_on_grid() {
        let grid: Vec<f64> = (0..=100).map(|i| i as f64 / 100.0).collect();
        let t = compute_thresholds(&grid, &SplitSpec::new(0.1, 0.1).unwrap()).unwrap();
        assert!((t.t_low - 0.10).abs() < 1e-12 && (t.t_high - 0.90).abs() < 1e-12);
        let third = SplitSpec::new(1.0 / 3.0, 1.0 / 3.0).unwrap();
        let t = compute_thresholds(&grid, &third).unwrap();
        assert!((t.t_low - 1.0 / 3.0).abs() < 1e-9 && (t.t_high - 2.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn classify_examples() {
        let t = Thresholds { t_low: 0.44, t_high: 0.63 };
        assert_eq!(classify(0.30, &t), MemClass::Low);
        assert_eq!(classify(0.50, &t), MemClass::Med);
        assert_eq!(classify(0.63, &t), MemClass::High);
        assert_eq!(classify(0.44, &t), MemClass::Med);
    }

    #[test]
    fn split_validation() {
        assert!(SplitSpec::new(0.5, 0.5).is_err());
        assert!(SplitSpec::new(0.0, 0.1).is_err());
        assert!(SplitSpec::new(0.25, 0.25).is_ok());
    }

    #[test]
    fn ten_scores_one_low() {
        let scores: Vec<(String, f64)> = (0..10).map(|i| (format!("i{i}"), i as f64 / 10.0)).collect();
        let table = bin_dataset(&scores, &SplitSpec::default()).unwrap();
        let lows = table.rows.iter().filter(|r| r.class == MemClass::Low).count();
        assert_eq!(lows, 1);
    }

    #[test]
    fn identical_scores_all_high() {
        let scores: Vec<(String, f64)> = (0..7).map(|i| (i.to_string(), 0.5)).collect();
        let table = bin_dataset(&scores, &SplitSpec::default()).unwrap();
        assert_eq!(table.thresholds.t_low, table.thresholds.t_high);
        assert!(table.rows.iter().all(|r| r.class == MemClass::High));
    }

    #[test]
    fn uniform_fractions() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let scores: Vec<(String, f64)> = (0..10_000).map(|i| (i.to_string(), rng.random::<f64>())).collect();
        let table = bin_dataset(&scores, &SplitSpec::default()).unwrap();
        let frac = |c| table.rows.iter().filter(|r| r.class == c).count() as f64 / 10_000.0;
        assert!((frac(MemClass::Low) - 0.1).abs() <= 0.01);
        assert!((frac(MemClass::Med) - 0.8).abs() <= 0.01);
        assert!((frac(MemClass::High) - 0.1).abs() <= 0.01);
    }

    #[test]
    fn k_quantile_split() {
        let grid: Vec<f64> = (0..=100).map(|i| i as f64 / 100.0).collect();
        let t = quantile_thresholds(&grid, 10).unwrap();
        assert_eq!(t.len(), 9);
        assert_eq!(classify_k(0.05, &t), 0);
        assert_eq!(classify_k(0.95, &t), 9);
        assert!(quantile_thresholds(&grid, 1).is_err());
    }

    #[test]
    fn label_csv_round_trip() {
        let scores = vec![("a".to_string(), 0.1), ("b".to_string(), 0.5), ("c".to_string(), 0.9)];
        let table = bin_dataset(&scores, &SplitSpec::default()).unwrap();
        let mut buf = Vec::new();
        table.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("# t_low="));
        let back = LabelTable::read_csv(&buf[..]).unwrap();
        assert_eq!(back, table);
        assert!(LabelTable::read_csv(&b"image_id,score,class\nx,0.5,huge\n"[..]).is_err());
        assert!(matches!(
            LabelTable::read_csv(&b"image_id,score,class\nx,1.5,high\n"[..]),
            Err(Error::Validation { line: 2, .. })
        ));
    }

    proptest! {
        #[test]
        fn classify_is_monotone(a in 0.0..=1.0f64, b in 0.0..=1.0f64, lo in 0.0..=1.0f64, hi in 0.0..=1.0f64) {
            let t = Thresholds { t_low: lo.min(hi), t_high: lo.max(hi) };
            let (s1, s2) = (a.min(b), a.max(b));
            prop_assert!(classify(s1, &t) <= classify(s2, &t));
        }

        #[test]
        fn percentile_bounds_and_monotone(v in proptest::collection::vec(-1e3..1e3f64, 1..50), p in 0.0..=100.0f64, q in 0.0..=100.0f64) {
            let min = v.iter().copied().fold(f64::INFINITY, f64::min);
            let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            prop_assert_eq!(percentile(&v, 0.0).unwrap(), min);
            prop_assert_eq!(percentile(&v, 100.0).unwrap(), max);
            let (p1, p2) = (p.min(q), p.max(q));
            prop_assert!(percentile(&v, p1).unwrap() <= percentile(&v, p2).unwrap() + 1e-9);
        }

        #[test]
        fn thresholds_permutation_invariant(mut v in proptest::collection::vec(0.0..=1.0f64, 1..60), r in 0usize..60) {
            let split = SplitSpec::default();
            let a = compute_thresholds(&v, &split).unwrap();
            let k = r % v.len();
            v.rotate_left(k);
            v.reverse();
            prop_assert_eq!(compute_thresholds(&v, &split).unwrap(), a);
        }
    }
}
