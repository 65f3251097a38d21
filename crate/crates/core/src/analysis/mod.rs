//! Score-change statistics, the batch edit experiment and its report.

mod classes;
mod experiment;
mod report;
pub mod svg;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::labels::percentile_sorted;
use crate::predictor::ScoreTable;

pub use self::classes::{class_analysis, ClassAnalysis, ClassRow};
pub use self::experiment::{
    load_dataset, run_edit_experiment, ExperimentConfig, ExperimentReport, ImageRow, RecipeResult, RunMetadata,
};
pub use self::report::{emit_report, format_summary_row, load_run_manifest, recipe_file_stem, SUMMARY_HEADER};

/// Summary of paired score changes `edited − original`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeltaStats {
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
    pub median: f64,
    pub p5: f64,
    pub p95: f64,
    pub n: usize,
    /// Fraction of strictly positive deltas.
    pub direction_positive_frac: f64,
}

pub fn delta_stats(original: &[f64], edited: &[f64]) -> Result<DeltaStats> {
    if original.len() != edited.len() {
        return Err(Error::Contract(format!(
            "delta_stats needs paired lists, got {} and {}",
            original.len(),
            edited.len()
        )));
    }
    if original.is_empty() {
        return Err(Error::Contract("delta_stats needs at least one pair".into()));
    }
    let deltas: Vec<f64> = edited.iter().zip(original).map(|(e, o)| e - o).collect();
    let n = deltas.len() as f64;
    let mean = deltas.iter().sum::<f64>() / n;
    let std = (deltas.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / n).sqrt();
    let mut sorted = deltas.clone();
    sorted.sort_by(f64::total_cmp);
    Ok(DeltaStats {
        mean,
        std,
        median: percentile_sorted(&sorted, 50.0),
        p5: percentile_sorted(&sorted, 5.0),
        p95: percentile_sorted(&sorted, 95.0),
        n: deltas.len(),
        direction_positive_frac: direction_fraction(&deltas, 1),
    })
}

/// Fraction of deltas with the strict sign of `expected_sign`; zeros count
/// as the wrong direction. Empty input gives 0.
pub fn direction_fraction(deltas: &[f64], expected_sign: i8) -> f64 {
    if deltas.is_empty() {
        return 0.0;
    }
    let hits = deltas
        .iter()
        .filter(|&&d| if expected_sign >= 0 { d > 0.0 } else { d < 0.0 })
        .count();
    hits as f64 / deltas.len() as f64
}

/// Subset of predictions closest to a reference.
#[derive(Debug, Clone, PartialEq)]
pub struct ReliableSubset {
    /// Predicted scores of the selected ids.
    pub table: ScoreTable,
    pub max_abs_error: f64,
    pub mean_abs_error: f64,
}

/// The `n` ids present in both tables with the smallest
/// |predicted − reference|, ties broken by id.
pub fn select_reliable_subset(predicted: &ScoreTable, reference: &ScoreTable, n: usize) -> Result<ReliableSubset> {
    let mut errors: Vec<(f64, &str, f64)> = predicted
        .iter()
        .filter_map(|(id, p)| reference.get(id).map(|r| ((p - r).abs(), id, p)))
        .collect();
    if errors.len() < n {
        return Err(Error::Contract(format!(
            "only {} ids in common, {n} requested",
            errors.len()
        )));
    }
    errors.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(b.1)));
    errors.truncate(n);
    let mut table = ScoreTable::new();
    for (_, id, p) in &errors {
        table.insert(*id, *p)?;
    }
    let max_abs_error = errors.iter().map(|e| e.0).fold(0.0, f64::max);
    let mean_abs_error = if n == 0 {
        0.0
    } else {
        errors.iter().map(|e| e.0).sum::<f64>() / n as f64
    };
    Ok(ReliableSubset {
        table,
        max_abs_error,
        mean_abs_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_lists_are_zero() {
        let x = [0.3, 0.5, 0.9];
        let s = delta_stats(&x, &x).unwrap();
        assert_eq!((s.mean, s.std, s.median, s.p5, s.p95), (0.0, 0.0, 0.0, 0.0, 0.0));
        assert_eq!(s.direction_positive_frac, 0.0);
    }

    #[test]
    fn symmetric_triple() {
        let s = delta_stats(&[0.0; 3], &[0.1, 0.2, 0.3]).unwrap();
        assert!((s.mean - 0.2).abs() < 1e-15);
        assert!((s.median - 0.2).abs() < 1e-15);
        assert_eq!(s.direction_positive_frac, 1.0);
    }

    #[test]
    fn mismatched_lengths() {
        assert!(matches!(delta_stats(&[0.1], &[0.1, 0.2]), Err(Error::Contract(_))));
        assert!(matches!(delta_stats(&[], &[]), Err(Error::Contract(_))));
    }

    #[test]
    fn direction_examples() {
        assert_eq!(direction_fraction(&[0.1, 0.2], 1), 1.0);
        assert_eq!(direction_fraction(&[0.0, 0.0], 1), 0.0);
        assert_eq!(direction_fraction(&[0.0, 0.0], -1), 0.0);
        assert!((direction_fraction(&[0.2, -0.1, 0.3], 1) - 2.0 / 3.0).abs() < 1e-15);
    }

    fn table(entries: &[(&str, f64)]) -> ScoreTable {
        let mut t = ScoreTable::new();
        for (k, v) in entries {
            t.insert(*k, *v).unwrap();
        }
        t
    }

    #[test]
    fn reliable_subset_enumeration() {
        let reference = table(&[("a", 0.5), ("b", 0.5), ("c", 0.5)]);
        let predicted = table(&[("a", 0.5), ("b", 0.55), ("c", 0.51)]);
        let sel = select_reliable_subset(&predicted, &reference, 2).unwrap();
        let ids: Vec<&str> = sel.table.iter().map(|(k, _)| k).collect();
        assert_eq!(ids, ["a", "c"]);
        assert!((sel.max_abs_error - 0.01).abs() < 1e-12);

        let all = select_reliable_subset(&reference, &reference, 3).unwrap();
        assert_eq!(all.table.len(), 3);
        assert_eq!(all.max_abs_error, 0.0);
        assert!(matches!(select_reliable_subset(&predicted, &reference, 4), Err(Error::Contract(_))));
    }
}
