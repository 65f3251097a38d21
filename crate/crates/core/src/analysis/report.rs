use std::io::Write;
use std::path::{Path, PathBuf};

use super::svg::{line_chart, range_chart};
use super::{DeltaStats, ExperimentReport};
use crate::error::{Error, Result};

pub const SUMMARY_HEADER: &str = "tool,mean,std,median,p5,p95,direction_frac,n";

/// Quotes a CSV field only when it needs it.
fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// One summary line: signed mean and median, three decimals throughout.
pub fn format_summary_row(label: &str, s: &DeltaStats) -> String {
    format!(
        "{},{:+.3},{:.3},{:+.3},{:.3},{:.3},{:.3},{}",
        csv_field(label),
        s.mean,
        s.std,
        s.median,
        s.p5,
        s.p95,
        s.direction_positive_frac,
        s.n
    )
}

/// File-name stem for the `index`-th recipe: `03_grayscale`.
pub fn recipe_file_stem(index: usize, label: &str) -> String {
    let mut slug = String::new();
    for c in label.chars() {
        if c.is_ascii_alphanumeric() {
            slug.push(c.to_ascii_lowercase());
        } else if !slug.ends_with('_') {
            slug.push('_');
        }
    }
    let slug = slug.trim_matches('_');
    format!("{:02}_{}", index + 1, if slug.is_empty() { "recipe" } else { slug })
}

fn write_file(path: &Path, contents: &[u8]) -> Result<()> {
    let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(contents).map_err(|e| Error::io(path, e))
}

/// Writes `summary.csv`, per-recipe rows CSVs and charts, and `run.json`
/// into `out_dir`. Returns the written paths.
pub fn emit_report(report: &ExperimentReport, out_dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut written = Vec::new();

    let mut summary = format!("{SUMMARY_HEADER}\n");
    for r in &report.recipes {
        if let Some(s) = &r.stats {
            summary.push_str(&format_summary_row(&r.label, s));
            summary.push('\n');
        }
    }
    let path = out_dir.join("summary.csv");
    write_file(&path, summary.as_bytes())?;
    written.push(path);

    for (i, r) in report.recipes.iter().enumerate() {
        let stem = recipe_file_stem(i, &r.label);

        let mut rows = String::from("image_id,original_score,edited_score,delta\n");
        for row in &r.rows {
            rows.push_str(&format!(
                "{},{},{},{}\n",
                csv_field(&row.image_id),
                row.original,
                row.edited,
                row.delta
            ));
        }
        let path = out_dir.join(format!("{stem}_rows.csv"));
        write_file(&path, rows.as_bytes())?;
        written.push(path);

        let original: Vec<f64> = r.rows.iter().map(|x| x.original).collect();
        let edited: Vec<f64> = r.rows.iter().map(|x| x.edited).collect();
        let svg = line_chart(&r.label, &[("original", &original), ("edited", &edited)], Some((0.0, 1.0)));
        let path = out_dir.join(format!("{stem}_scores.svg"));
        write_file(&path, svg.as_bytes())?;
        written.push(path);

        let deltas: Vec<f64> = r.rows.iter().map(|x| x.delta).collect();
        let (p5, median, p95) = r.stats.map_or((0.0, 0.0, 0.0), |s| (s.p5, s.median, s.p95));
        let svg = range_chart(&format!("{} — score change", r.label), &deltas, p5, median, p95);
        let path = out_dir.join(format!("{stem}_range.svg"));
        write_file(&path, svg.as_bytes())?;
        written.push(path);
    }

    let json = serde_json::to_string_pretty(report).map_err(|e| Error::Format(e.to_string()))?;
    let path = out_dir.join("run.json");
    write_file(&path, json.as_bytes())?;
    written.push(path);
    Ok(written)
}

/// Reads a `run.json` written by [`emit_report`].
pub fn load_run_manifest(path: &Path) -> Result<ExperimentReport> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        line: e.line(),
        msg: e.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn signed_columns() {
        let s = DeltaStats {
            mean: 0.023,
            std: 0.126,
            median: 0.015,
            p5: -0.169,
            p95: 0.234,
            n: 10,
            direction_positive_frac: 0.5,
        };
        assert_eq!(
            format_summary_row("Sharpening", &s),
            "Sharpening,+0.023,0.126,+0.015,-0.169,0.234,0.500,10"
        );
    }

    #[test]
    fn stems() {
        assert_eq!(recipe_file_stem(0, "BG blurring + darkening"), "01_bg_blurring_darkening");
        assert_eq!(recipe_file_stem(10, "Sharpening [amount=0.5]"), "11_sharpening_amount_0_5");
        assert_eq!(recipe_file_stem(1, "+++"), "02_recipe");
    }
}
