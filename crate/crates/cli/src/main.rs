use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use memlab::analysis::{self, ExperimentConfig};
use memlab::edits::{self, EditRecipe, OpKind, RecipeSpec};
use memlab::faceprep::{self, PrepConfig};
use memlab::imagecore::{decode_image, encode_image, list_images, Mask};
use memlab::labels::{self, LabelTable, SplitSpec};
use memlab::metrics::{self, MetricOptions, Neighborhood, Normalization, WlfParams};
use memlab::predictor::{self, PredictorHandle};
use memlab::Error;

#[derive(Parser)]
#[command(name = "memlab", version, about = "Photo-edit memorability experiments")]
#[command(arg_required_else_help = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Mask faces with an oval, crop and resize a directory of images.
    Prep(PrepArgs),
    /// Apply one editing operator to an image or a directory of images.
    Edit(EditArgs),
    /// Per-image statistics as CSV.
    Metrics(MetricsArgs),
    /// Split a score table into low/med/high classes.
    Bin(BinArgs),
    /// Score images with a predictor.
    Predict(PredictArgs),
    /// Run every recipe over a dataset and report score changes.
    Experiment(ExperimentArgs),
    /// Per-class statistics and histograms for a labelled dataset.
    ClassAnalysis(ClassArgs),
    /// Re-render CSVs and charts from a saved run.json.
    Report(ReportArgs),
}

#[derive(Args)]
struct OvalArgs {
    #[arg(long, alias = "axis_frac_x", default_value_t = 0.8)]
    axis_frac_x: f64,
    #[arg(long, alias = "axis_frac_y", default_value_t = 0.9)]
    axis_frac_y: f64,
    /// Relative feather width of the oval edge.
    #[arg(long, default_value_t = 0.02)]
    feather: f64,
}

#[derive(Args)]
struct PrepArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
    #[command(flatten)]
    oval: OvalArgs,
    /// Background fill as R,G,B.
    #[arg(long, default_value = "255,255,255", value_parser = parse_rgb)]
    fill: [u8; 3],
    #[arg(long, alias = "out_size", default_value_t = 128)]
    out_size: usize,
}

#[derive(Args)]
struct EditArgs {
    /// Recipe file holding exactly one recipe (without a sweep).
    #[arg(long)]
    recipe: Option<PathBuf>,
    #[arg(long)]
    op: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    amount: Option<f64>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    darken: Option<f64>,
    #[arg(long)]
    strength: Option<f64>,
    #[arg(long)]
    kelvin: Option<f64>,
    #[arg(long, alias = "radius_frac")]
    radius_frac: Option<f64>,
    #[arg(long)]
    inner: Option<f64>,
    /// Foreground mask image (white = keep sharp).
    #[arg(long)]
    mask: Option<PathBuf>,
    input: PathBuf,
    output: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum NeighborhoodArg {
    Four,
    Eight,
}

#[derive(Args)]
struct MetricsArgs {
    /// Image file or directory.
    input: PathBuf,
    /// Output CSV (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Measure inside the face oval only.
    #[arg(long)]
    oval: bool,
    #[command(flatten)]
    oval_shape: OvalArgs,
    /// Mask image applied to every input (white = measured).
    #[arg(long, conflicts_with = "oval")]
    mask: Option<PathBuf>,
    /// Seed for gamut-hull subsampling.
    #[arg(long, default_value_t = metrics::DEFAULT_SEED)]
    seed: u64,
    /// Contrast pyramid levels (default: as many as fit).
    #[arg(long)]
    levels: Option<usize>,
    #[arg(long, value_enum, default_value_t = NeighborhoodArg::Eight)]
    neighborhood: NeighborhoodArg,
    /// Also write the mean luma histogram of all inputs to this CSV.
    #[arg(long)]
    histogram: Option<PathBuf>,
}

#[derive(Args)]
struct BinArgs {
    /// `image_id,score` CSV.
    #[arg(long)]
    scores: PathBuf,
    #[arg(long, alias = "low_frac", default_value_t = 0.1)]
    low_frac: f64,
    #[arg(long, alias = "high_frac", default_value_t = 0.1)]
    high_frac: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PredictorArg {
    /// `stub`, `store:<scores.csv>` or `cmd:<command line>`.
    #[arg(long, env = predictor::PREDICTOR_CMD_ENV, value_parser = parse_predictor)]
    predictor: Option<PredictorHandle>,
}

impl PredictorArg {
    fn handle(&self) -> Result<PredictorHandle, Error> {
        self.predictor
            .clone()
            .ok_or_else(|| Error::Parameter(format!("no predictor: pass --predictor or set {}", predictor::PREDICTOR_CMD_ENV)))
    }
}

#[derive(Args)]
struct PredictArgs {
    #[command(flatten)]
    predictor: PredictorArg,
    #[arg(long)]
    images: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Recipe file, or `all-defaults` for the nine operators with defaults.
    #[arg(long)]
    recipes: String,
    #[command(flatten)]
    predictor: PredictorArg,
    #[arg(long)]
    images: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args)]
struct ClassArgs {
    /// Label CSV written by `bin`.
    #[arg(long)]
    labels: PathBuf,
    #[arg(long)]
    images: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    oval: OvalArgs,
    #[arg(long, default_value_t = metrics::DEFAULT_SEED)]
    seed: u64,
}

#[derive(Args)]
struct ReportArgs {
    /// run.json from an earlier experiment.
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

fn parse_rgb(s: &str) -> Result<[u8; 3], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err("expected R,G,B".into());
    }
    let mut rgb = [0u8; 3];
    for (c, p) in rgb.iter_mut().zip(parts) {
        *c = p.parse().map_err(|_| format!("`{p}` is not a value in 0..=255"))?;
    }
    Ok(rgb)
}

fn parse_predictor(s: &str) -> Result<PredictorHandle, String> {
    // A bare command from the environment is treated as `cmd:`.
    match PredictorHandle::parse(s) {
        Ok(h) => Ok(h),
        Err(_) if std::env::var(predictor::PREDICTOR_CMD_ENV).is_ok_and(|v| v == s) => {
            Ok(PredictorHandle::ExternalCommand(s.to_string()))
        }
        Err(e) => Err(e.to_string()),
    }
}

fn workers(n: Option<usize>) -> usize {
    n.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

fn prep_config(oval: &OvalArgs) -> PrepConfig {
    PrepConfig {
        axis_frac_x: oval.axis_frac_x,
        axis_frac_y: oval.axis_frac_y,
        feather: oval.feather,
        ..Default::default()
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, Error> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::Io { path: path.into(), source: e })
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>, Error> {
    Ok(match path {
        Some(p) => Box::new(create(p)?),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn inputs(path: &Path) -> Result<Vec<PathBuf>, Error> {
    if path.is_dir() {
        list_images(path)
    } else {
        Ok(vec![path.to_path_buf()])
    }
}

fn run_prep(a: PrepArgs) -> Result<(), Error> {
    let cfg = PrepConfig {
        fill: a.fill,
        out_size: a.out_size,
        ..prep_config(&a.oval)
    };
    let manifest = faceprep::prepare_dataset(&a.input, &a.output, &cfg)?;
    let failed = manifest.rows.iter().filter(|r| !r.status.is_ok()).count();
    eprintln!("prepared {} of {} images", manifest.rows.len() - failed, manifest.rows.len());
    Ok(())
}

fn parse_op(name: &str) -> Result<OpKind, Error> {
    name.parse().map_err(|e: Error| Error::Parameter(e.to_string()))
}

/// Flag > recipe file > default.
fn edit_recipe(a: &EditArgs) -> Result<EditRecipe, Error> {
    let mut recipe = match &a.recipe {
        Some(path) => {
            let mut specs = edits::load_recipe_file(path)?;
            if specs.len() != 1 || specs[0].sweep.is_some() {
                return Err(Error::Parameter("edit needs a recipe file with exactly one recipe and no sweep".into()));
            }
            specs.remove(0).recipe
        }
        None => {
            let op = a
                .op
                .as_deref()
                .ok_or_else(|| Error::Parameter("pass --op or --recipe".into()))?;
            EditRecipe::defaults(parse_op(op)?)
        }
    };
    if let Some(op) = &a.op {
        let kind = parse_op(op)?;
        if kind != recipe.op.kind() {
            recipe = EditRecipe {
                op: edits::EditOp::default_for(kind),
                ..recipe
            };
        }
    }
    let flags = [
        ("amount", a.amount),
        ("sigma", a.sigma),
        ("darken", a.darken),
        ("strength", a.strength),
        ("kelvin", a.kelvin),
        ("radius_frac", a.radius_frac),
        ("inner", a.inner),
    ];
    for (name, value) in flags {
        if let Some(v) = value {
            recipe.op.set(name, v)?;
        }
    }
    if let Some(m) = &a.mask {
        if !recipe.op.kind().uses_mask() {
            return Err(Error::Parameter(format!("{} does not take a mask", recipe.op.kind().name())));
        }
        recipe.mask = Some(m.clone());
    }
    recipe.op.validate()?;
    Ok(recipe)
}

fn run_edit(a: EditArgs) -> Result<(), Error> {
    let recipe = edit_recipe(&a)?;
    if a.input.is_dir() {
        std::fs::create_dir_all(&a.output).map_err(|e| Error::Io { path: a.output.clone(), source: e })?;
        for src in list_images(&a.input)? {
            let img = decode_image(&src)?;
            let stem = predictor::image_id(&src);
            encode_image(&edits::apply_recipe(&img, &recipe)?, a.output.join(format!("{stem}.png")))?;
        }
    } else {
        let img = decode_image(&a.input)?;
        encode_image(&edits::apply_recipe(&img, &recipe)?, &a.output)?;
    }
    Ok(())
}

fn run_metrics(a: MetricsArgs) -> Result<(), Error> {
    let opts = MetricOptions {
        seed: a.seed,
        wlf: WlfParams {
            levels: a.levels,
            neighborhood: match a.neighborhood {
                NeighborhoodArg::Four => Neighborhood::Four,
                NeighborhoodArg::Eight => Neighborhood::Eight,
            },
            ..Default::default()
        },
    };
    let fixed_mask = a.mask.as_deref().map(edits::load_mask_file).transpose()?;
    let cfg = prep_config(&a.oval_shape);
    let mut rows = Vec::new();
    let mut hist_sum: Option<Vec<f64>> = None;
    let files = inputs(&a.input)?;
    for path in &files {
        let img = decode_image(path)?;
        let oval: Option<Mask> = if a.oval {
            Some(faceprep::make_oval_mask(img.width(), img.height(), &cfg)?)
        } else {
            None
        };
        let mask = oval.as_ref().or(fixed_mask.as_ref());
        rows.push((predictor::image_id(path), metrics::stats_record(&img, mask, &opts)?));
        if a.histogram.is_some() {
            let h = metrics::histogram(&img, mask, Normalization::Probability)?;
            match &mut hist_sum {
                Some(acc) => acc.iter_mut().zip(h.bins).for_each(|(x, y)| *x += y),
                None => hist_sum = Some(h.bins),
            }
        }
    }
    metrics::write_stats_csv(output(a.out.as_deref())?, &rows)?;
    if let Some(path) = &a.histogram {
        let mut bins = hist_sum.ok_or_else(|| Error::Contract("no images to build a histogram from".into()))?;
        bins.iter_mut().for_each(|b| *b /= files.len() as f64);
        let hist = metrics::Histogram {
            bins,
            normalization: Normalization::Probability,
        };
        metrics::write_histogram_csv(create(path)?, &hist)?;
    }
    Ok(())
}

fn run_bin(a: BinArgs) -> Result<(), Error> {
    let split = SplitSpec::new(a.low_frac, a.high_frac)?;
    let table = predictor::load_score_csv(&a.scores)?;
    let scores: Vec<(String, f64)> = table.iter().map(|(k, v)| (k.to_string(), v)).collect();
    let labels = labels::bin_dataset(&scores, &split)?;
    labels.write_csv(output(a.out.as_deref())?)
}

fn run_predict(a: PredictArgs) -> Result<(), Error> {
    let p = a.predictor.handle()?.open()?;
    let paths = analysis::load_dataset(&a.images)?;
    let out = p.predict_sharded(&paths, workers(a.workers))?;
    for (id, why) in &out.failures {
        eprintln!("warning: {id}: {why}");
    }
    out.scores.write_csv(output(a.out.as_deref())?)
}

fn load_recipes(arg: &str) -> Result<Vec<RecipeSpec>, Error> {
    if arg == "all-defaults" && !Path::new(arg).exists() {
        return Ok(EditRecipe::all_defaults()
            .into_iter()
            .map(|recipe| RecipeSpec { recipe, sweep: None })
            .collect());
    }
    edits::load_recipe_file(arg)
}

fn run_experiment(a: ExperimentArgs) -> Result<(), Error> {
    let cfg = ExperimentConfig {
        images: a.images,
        recipes: load_recipes(&a.recipes)?,
        predictor: a.predictor.handle()?,
        out_dir: Some(a.out.clone()),
        workers: workers(a.workers),
    };
    let report = analysis::run_edit_experiment(&cfg)?;
    for r in &report.recipes {
        if let Some(e) = &r.error {
            eprintln!("warning: recipe `{}` aborted: {e}", r.label);
        }
        if !r.failures.is_empty() {
            eprintln!("warning: recipe `{}` skipped {} image(s)", r.label, r.failures.len());
        }
    }
    for (id, why) in &report.metadata.original_failures {
        eprintln!("warning: {id}: {why}");
    }
    analysis::emit_report(&report, &a.out)?;
    Ok(())
}

fn run_class_analysis(a: ClassArgs) -> Result<(), Error> {
    let file = File::open(&a.labels).map_err(|e| Error::Io { path: a.labels.clone(), source: e })?;
    let table = LabelTable::read_csv(BufReader::new(file))?;
    let opts = MetricOptions {
        seed: a.seed,
        ..Default::default()
    };
    let result = analysis::class_analysis(&table, &a.images, &a.out, &prep_config(&a.oval), &opts)?;
    for row in result.rows.iter().filter(|r| r.n == 0) {
        eprintln!("warning: class {} has no images", row.class);
    }
    Ok(())
}

fn run_report(a: ReportArgs) -> Result<(), Error> {
    let report = analysis::load_run_manifest(&a.manifest)?;
    analysis::emit_report(&report, &a.out)?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    let result = match cli.command {
        Command::Prep(a) => run_prep(a),
        Command::Edit(a) => run_edit(a),
        Command::Metrics(a) => run_metrics(a),
        Command::Bin(a) => run_bin(a),
        Command::Predict(a) => run_predict(a),
        Command::Experiment(a) => run_experiment(a),
        Command::ClassAnalysis(a) => run_class_analysis(a),
        Command::Report(a) => run_report(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_data_error() { 2 } else { 1 })
        }
    }
}
