//! The external-predictor line protocol, exercised against small shell
//! programs that play the adapter's part.

mod common;

use std::path::PathBuf;

use memlab::analysis::{run_edit_experiment, ExperimentConfig};
use memlab::edits::{EditRecipe, OpKind, RecipeSpec};
use memlab::predictor::{Predictor, PredictorHandle};
use memlab::Error;

const ECHO: &str = r#"while IFS= read -r p; do printf '%s\t0.5\n' "$p"; done"#;
const ERROR_ON_MISSING: &str =
    r#"while IFS= read -r p; do if [ -f "$p" ]; then printf '%s\t0.5\n' "$p"; else printf '%s\tERROR\n' "$p"; fi; done"#;

fn external(cmd: &str) -> Predictor {
    PredictorHandle::ExternalCommand(cmd.into()).open().unwrap()
}

fn files(n: usize) -> (tempfile::TempDir, Vec<PathBuf>) {
    let dir = tempfile::tempdir().unwrap();
    let imgs = common::corpus(n, 16, 16, 3);
    common::write_corpus(dir.path(), &imgs);
    let paths = (0..n).map(|i| dir.path().join(format!("img_{i:03}.png"))).collect();
    (dir, paths)
}

#[test]
fn echo_adapter_scores_every_path_in_order() {
    let (_dir, paths) = files(3);
    let scores = external(ECHO).predict_batch(&paths).unwrap();
    assert_eq!(scores.len(), 3);
    for (id, s) in scores.iter() {
        assert!(id.starts_with("img_"));
        assert_eq!(s, 0.5);
    }
}

#[test]
fn empty_request_is_empty_answer() {
    let out = external(ECHO).predict_batch(&[]).unwrap();
    assert!(out.is_empty());
}

#[test]
fn error_sentinel_is_reported_per_image() {
    let (dir, mut paths) = files(2);
    paths.push(dir.path().join("missing.png"));
    let p = external(ERROR_ON_MISSING);
    let out = p.predict_batch_lenient(&paths).unwrap();
    assert_eq!(out.scores.len(), 2);
    assert_eq!(out.failures.len(), 1);
    assert_eq!(out.failures[0].0, "missing");
    assert!(matches!(p.predict_batch(&paths), Err(Error::Protocol { .. })));
}

#[test]
fn reordered_answers_are_rejected() {
    let (_dir, paths) = files(3);
    let cmd = r#"tac | while IFS= read -r p; do printf '%s\t0.5\n' "$p"; done"#;
    assert!(matches!(external(cmd).predict_batch(&paths), Err(Error::Protocol { .. })));
}

#[test]
fn short_and_long_answers_are_rejected() {
    let (_dir, paths) = files(3);
    let short = r#"head -n 1 | while IFS= read -r p; do printf '%s\t0.5\n' "$p"; done"#;
    assert!(matches!(external(short).predict_batch(&paths), Err(Error::Protocol { .. })));
    let long = format!("{ECHO}; echo 'extra\t0.1'");
    assert!(matches!(external(&long).predict_batch(&paths), Err(Error::Protocol { .. })));
}

#[test]
fn malformed_and_out_of_range_scores() {
    let (_dir, paths) = files(1);
    let spaces = r#"while IFS= read -r p; do printf '%s 0.5\n' "$p"; done"#;
    assert!(matches!(external(spaces).predict_batch(&paths), Err(Error::Protocol { .. })));
    let big = r#"while IFS= read -r p; do printf '%s\t1.5\n' "$p"; done"#;
    assert!(matches!(external(big).predict_batch(&paths), Err(Error::Validation { .. })));
}

#[test]
fn nonzero_exit_is_an_error() {
    let (_dir, paths) = files(2);
    let cmd = format!("{ECHO}; exit 3");
    assert!(matches!(external(&cmd).predict_batch(&paths), Err(Error::Protocol { .. })));
}

#[test]
fn child_that_ignores_input_does_not_hang() {
    let (_dir, paths) = files(2);
    assert!(external("true").predict_batch(&paths).is_err());
}

#[test]
fn sharded_scoring_merges_all_children() {
    let (_dir, paths) = files(10);
    let out = external(ECHO).predict_sharded(&paths, 3).unwrap();
    assert_eq!(out.scores.len(), 10);
    assert!(out.failures.is_empty());
}

fn config(images: PathBuf, cmd: &str, recipes: Vec<EditRecipe>) -> ExperimentConfig {
    ExperimentConfig {
        images,
        recipes: recipes.into_iter().map(|recipe| RecipeSpec { recipe, sweep: None }).collect(),
        predictor: PredictorHandle::ExternalCommand(cmd.into()),
        out_dir: None,
        workers: 2,
    }
}

#[test]
fn experiment_through_external_predictor() {
    let (dir, _) = files(4);
    let cfg = config(dir.path().to_path_buf(), ECHO, vec![EditRecipe::defaults(OpKind::Sharpen)]);
    let report = run_edit_experiment(&cfg).unwrap();
    let r = &report.recipes[0];
    assert_eq!(r.rows.len(), 4);
    assert!(r.rows.iter().all(|row| row.delta == 0.0));
    assert_eq!(r.stats.unwrap().direction_positive_frac, 0.0);
}

#[test]
fn protocol_failure_aborts_only_the_recipe() {
    let (dir, _) = files(3);
    // Answers correctly for the dataset, garbles anything else (the edits).
    let root = std::path::absolute(dir.path()).unwrap();
    let cmd = format!(
        r#"while IFS= read -r p; do case "$p" in {}/*) printf '%s\t0.5\n' "$p";; *) echo garbage;; esac; done"#,
        root.display()
    );
    let cfg = config(
        dir.path().to_path_buf(),
        &cmd,
        vec![EditRecipe::defaults(OpKind::Grayscale), EditRecipe::defaults(OpKind::Vignette)],
    );
    let report = run_edit_experiment(&cfg).unwrap();
    assert_eq!(report.recipes.len(), 2);
    for r in &report.recipes {
        assert!(r.error.is_some());
        assert!(r.stats.is_none());
    }
}
