//! `omoments` — command-line front end for the ortho-moments toolkit.
//!
//! Every subcommand is deterministic: identical arguments and inputs
//! produce byte-identical primary output files. Errors go to stderr only;
//! exit codes are 1 for usage errors, 2 for I/O or file-format errors and
//! 3 for numeric-domain errors.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ortho_moments::bench::{records_to_csv, run_sweep, PipelineId};
use ortho_moments::classify::{rotation_protocol, LabeledFeatures};
use ortho_moments::error::Error;
use ortho_moments::glcm::{
    glcm_moment_features, glcm_with, image_moment_features, FeatureVector, GlcmAngle,
    GlcmConfig,
};
use ortho_moments::imageio::{
    load_pgm, model_image, read_manifest, save_pgm, texture_dataset, write_texture_dataset,
    GrayImage,
};
use ortho_moments::moments::{
    chebyshev2_moments, discrete_chebyshev_moments, legendre_moments,
    legendre_moments_closed_form, reconstruct, reconstruction_error, MomentFamily,
    MomentMatrix,
};

#[derive(Parser)]
#[command(
    name = "omoments",
    about = "Orthogonal image moments, GLCM texture features and 1-NN evaluation",
    version
)]
struct Cli {
    /// Cap the worker thread count (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute a moment matrix of a PGM image and write it as CSV.
    Moments(MomentsArgs),
    /// Reconstruct an image from a moment CSV; optionally print the
    /// relative error against a reference image.
    Reconstruct(ReconstructArgs),
    /// Write the co-occurrence counts of a PGM image as CSV.
    Glcm(GlcmArgs),
    /// Extract feature vectors for every image in a dataset manifest.
    Features(FeaturesArgs),
    /// Run the rotation protocol on a features CSV and write a JSON report.
    Classify(ClassifyArgs),
    /// Run the reconstruction or timing benchmark suite.
    Bench(BenchArgs),
    /// Generate the synthetic model image or a rotated-texture dataset.
    Synth(SynthArgs),
}

#[derive(Args)]
struct MomentsArgs {
    /// Input PGM (P2 or P5).
    #[arg(long = "in")]
    input: PathBuf,
    /// legendre | cheb2 | dcheb | legendre-cf
    #[arg(long)]
    family: String,
    /// Maximum moment order q; the output matrix is (q+1) x (q+1).
    #[arg(long)]
    order: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ReconstructArgs {
    /// Moment CSV produced by the moments subcommand.
    #[arg(long)]
    moments: PathBuf,
    #[arg(long)]
    rows: usize,
    #[arg(long)]
    cols: usize,
    /// Output PGM (values clamped to [0, 1] for storage).
    #[arg(long)]
    out: PathBuf,
    /// Print max|F - R| / max|F| against this reference image.
    #[arg(long = "error-against")]
    error_against: Option<PathBuf>,
}

#[derive(Args)]
struct GlcmArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, default_value_t = 1)]
    distance: usize,
    /// 0 | 45 | 90 | 135
    #[arg(long)]
    angle: u32,
    /// Gray-level count; the image is re-quantized if its native level
    /// count differs.
    #[arg(long, default_value_t = 256)]
    levels: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct FeaturesArgs {
    /// Dataset manifest JSON (see the synth subcommand).
    #[arg(long = "in")]
    input: PathBuf,
    /// image | glcm
    #[arg(long)]
    source: String,
    #[arg(long)]
    family: String,
    #[arg(long)]
    order: usize,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 1)]
    distance: usize,
    #[arg(long, default_value_t = 256)]
    levels: usize,
    /// Comma-separated angle list, e.g. 0,45,90,135.
    #[arg(long, default_value = "0,45,90,135")]
    angles: String,
}

#[derive(Args)]
struct ClassifyArgs {
    /// Features CSV produced by the features subcommand.
    #[arg(long)]
    features: PathBuf,
    #[arg(long, default_value_t = 100)]
    repeats: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    /// reconstruction | timing
    #[arg(long)]
    suite: String,
    #[arg(long)]
    out: PathBuf,
    /// Override the image sizes (comma-separated).
    #[arg(long)]
    sizes: Option<String>,
    /// Override the moment counts (comma-separated).
    #[arg(long)]
    orders: Option<String>,
}

#[derive(Args)]
struct SynthArgs {
    /// model | dataset
    #[arg(long)]
    what: String,
    #[arg(long, default_value_t = 1023)]
    size: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long = "out-dir")]
    out_dir: PathBuf,
    #[arg(long, default_value_t = 5)]
    classes: usize,
    /// Comma-separated orientation list in degrees.
    #[arg(long, default_value = "0,30,60,90")]
    orientations: String,
    #[arg(long, default_value_t = 8)]
    samples: usize,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap renders usage/help; route everything to stderr and use
            // exit code 1 for usage problems, 0 for --help/--version
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            eprint!("{e}");
            return ExitCode::from(1);
        }
    };

    if let Some(threads) = cli.threads {
        // ignore failure: the global pool can only be set once
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }

    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match &e {
                CliError::Usage(_) => ExitCode::from(1),
                CliError::Lib(inner) if inner.is_domain() => ExitCode::from(3),
                CliError::Lib(_) => ExitCode::from(2),
            }
        }
    }
}

enum CliError {
    Usage(String),
    Lib(Error),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "{msg}"),
            CliError::Lib(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Lib(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Lib(Error::Io(e))
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Moments(args) => cmd_moments(args),
        Command::Reconstruct(args) => cmd_reconstruct(args),
        Command::Glcm(args) => cmd_glcm(args),
        Command::Features(args) => cmd_features(args),
        Command::Classify(args) => cmd_classify(args),
        Command::Bench(args) => cmd_bench(args),
        Command::Synth(args) => cmd_synth(args),
    }
}

fn parse_family(id: &str) -> Result<MomentFamily, CliError> {
    MomentFamily::from_id(id).map_err(|e| usage(e.to_string()))
}

fn compute_moments(
    image: &GrayImage,
    family: MomentFamily,
    order: usize,
) -> Result<MomentMatrix, Error> {
    match family {
        MomentFamily::Legendre => legendre_moments(image, order),
        MomentFamily::ChebyshevSecondKind => chebyshev2_moments(image, order),
        MomentFamily::DiscreteChebyshev => discrete_chebyshev_moments(image, order),
        MomentFamily::LegendreClosedForm => legendre_moments_closed_form(image, order),
    }
}

fn cmd_moments(args: MomentsArgs) -> Result<(), CliError> {
    let family = parse_family(&args.family)?;
    let image = load_pgm(&args.input)?;
    let mm = compute_moments(&image, family, args.order)?;
    std::fs::write(&args.out, mm.to_csv())?;
    Ok(())
}

fn cmd_reconstruct(args: ReconstructArgs) -> Result<(), CliError> {
    let text = std::fs::read_to_string(&args.moments)?;
    let mm = MomentMatrix::from_csv(&text)?;
    let rec = reconstruct(&mm, args.rows, args.cols)?;
    if let Some(reference_path) = &args.error_against {
        let reference = load_pgm(reference_path)?;
        let err = reconstruction_error(&reference, &rec)?;
        println!("{err:.16e}");
    }
    save_pgm(&rec, &args.out)?;
    Ok(())
}

fn cmd_glcm(args: GlcmArgs) -> Result<(), CliError> {
    let angle = GlcmAngle::from_degrees(args.angle)?;
    let image = load_pgm(&args.input)?;
    let image = if image.level_count() == Some(args.levels) {
        image
    } else {
        image.quantize(args.levels)?
    };
    let cm = glcm_with(&image, args.distance, angle, false)?;
    let mut out = format!(
        "# glcm distance={} angle={} levels={} normalized=false\n",
        args.distance,
        args.angle,
        args.levels
    );
    for row in cm.counts().rows() {
        let line: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    std::fs::write(&args.out, out)?;
    Ok(())
}

fn parse_angles(list: &str) -> Result<Vec<GlcmAngle>, CliError> {
    list.split(',')
        .map(|token| {
            token
                .trim()
                .parse::<u32>()
                .map_err(|_| usage(format!("bad angle {token:?}")))
                .and_then(|deg| GlcmAngle::from_degrees(deg).map_err(CliError::from))
        })
        .collect()
}

fn parse_list(list: &str, what: &str) -> Result<Vec<usize>, CliError> {
    list.split(',')
        .map(|token| {
            token
                .trim()
                .parse::<usize>()
                .map_err(|_| usage(format!("bad {what} {token:?}")))
        })
        .collect()
}

fn cmd_features(args: FeaturesArgs) -> Result<(), CliError> {
    use rayon::prelude::*;

    let family = parse_family(&args.family)?;
    let manifest = read_manifest(&args.input)?;
    if manifest.is_empty() {
        return Err(usage("manifest is empty"));
    }
    let base = args.input.parent().unwrap_or(Path::new("."));

    enum Source {
        Image,
        Glcm(GlcmConfig),
    }
    let source = match args.source.as_str() {
        "image" => Source::Image,
        "glcm" => Source::Glcm(GlcmConfig {
            distance: args.distance,
            angles: parse_angles(&args.angles)?,
            level_count: args.levels,
            symmetric: false,
        }),
        other => return Err(usage(format!("unknown source {other:?} (expected image|glcm)"))),
    };

    let rows: Result<Vec<(FeatureVector, &ortho_moments::imageio::ManifestEntry)>, Error> =
        manifest
            .par_iter()
            .map(|entry| {
                let image = load_pgm(&base.join(&entry.path))?;
                let fv = match &source {
                    Source::Image => image_moment_features(&image, family, args.order)?,
                    Source::Glcm(config) => {
                        glcm_moment_features(&image, family, args.order, config)?
                    }
                };
                Ok((fv, entry))
            })
            .collect();
    let rows = rows?;

    let descriptor = rows[0].0.descriptor.to_string();
    let width = rows[0].0.values.len();
    let mut out = format!("# descriptor={descriptor}\n");
    out.push_str("path,class,orientation_degrees,sample_index");
    for i in 0..width {
        out.push_str(&format!(",f{i}"));
    }
    out.push('\n');
    for (fv, entry) in &rows {
        out.push_str(&format!(
            "{},{},{},{}",
            entry.path.display(),
            entry.class,
            entry.orientation_degrees,
            entry.sample_index
        ));
        for v in &fv.values {
            out.push_str(&format!(",{v:.16e}"));
        }
        out.push('\n');
    }
    std::fs::write(&args.out, out)?;
    Ok(())
}

fn cmd_classify(args: ClassifyArgs) -> Result<(), CliError> {
    let text = std::fs::read_to_string(&args.features)?;
    let (descriptor, data) = parse_features_csv(&text)?;
    let report = rotation_protocol(&data, &descriptor, args.repeats, args.seed)?;
    let json = serde_json::to_string_pretty(&report).map_err(Error::from)?;
    std::fs::write(&args.out, json)?;
    Ok(())
}

fn parse_features_csv(text: &str) -> Result<(String, LabeledFeatures), CliError> {
    let mut lines = text.lines();
    let descriptor = lines
        .next()
        .and_then(|l| l.strip_prefix("# descriptor="))
        .ok_or_else(|| Error::MalformedCsv("missing descriptor header".into()))?
        .to_string();
    let header = lines
        .next()
        .ok_or_else(|| Error::MalformedCsv("missing column header".into()))?;
    let value_cols = header.split(',').count().saturating_sub(4);
    if value_cols == 0 {
        return Err(Error::MalformedCsv("no feature columns".into()).into());
    }
    let mut features = Vec::new();
    let mut labels = Vec::new();
    let mut orientations = Vec::new();
    for line in lines.filter(|l| !l.trim().is_empty()) {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != value_cols + 4 {
            return Err(Error::MalformedCsv(format!(
                "row has {} fields, expected {}",
                fields.len(),
                value_cols + 4
            ))
            .into());
        }
        labels.push(
            fields[1]
                .parse::<usize>()
                .map_err(|_| Error::MalformedCsv(format!("bad class {:?}", fields[1])))?,
        );
        orientations.push(
            fields[2]
                .parse::<f64>()
                .map_err(|_| Error::MalformedCsv(format!("bad angle {:?}", fields[2])))?,
        );
        let values: Result<Vec<f64>, CliError> = fields[4..]
            .iter()
            .map(|v| {
                v.parse::<f64>()
                    .map_err(|_| Error::MalformedCsv(format!("bad value {v:?}")).into())
            })
            .collect();
        features.push(values?);
    }
    Ok((descriptor, LabeledFeatures::new(features, labels, orientations)?))
}

fn cmd_bench(args: BenchArgs) -> Result<(), CliError> {
    let records = match args.suite.as_str() {
        "reconstruction" => {
            let sizes = match &args.sizes {
                Some(list) => parse_list(list, "size")?,
                None => vec![1023],
            };
            let orders = match &args.orders {
                Some(list) => parse_list(list, "order")?,
                None => (1..=10).map(|k| 5 * k).collect(),
            };
            run_sweep(&sizes, &orders, PipelineId::ALL.as_slice())?
        }
        "timing" => {
            let sizes = match &args.sizes {
                Some(list) => parse_list(list, "size")?,
                None => vec![200, 500, 1000, 1500, 2000],
            };
            let orders = match &args.orders {
                Some(list) => parse_list(list, "order")?,
                None => (3..=10).collect(),
            };
            run_sweep(
                &sizes,
                &orders,
                &[PipelineId::RecurrenceLegendre, PipelineId::ClosedFormLegendre],
            )?
        }
        other => {
            return Err(usage(format!(
                "unknown suite {other:?} (expected reconstruction|timing)"
            )))
        }
    };
    std::fs::write(&args.out, records_to_csv(&records))?;
    Ok(())
}

fn cmd_synth(args: SynthArgs) -> Result<(), CliError> {
    std::fs::create_dir_all(&args.out_dir)?;
    match args.what.as_str() {
        "model" => {
            let image = model_image(args.size, args.size)?;
            // 16-bit PGM: the most faithful representation the format allows
            let quantized = image.quantize(65536)?;
            save_pgm(&quantized, &args.out_dir.join("model.pgm"))?;
            Ok(())
        }
        "dataset" => {
            let orientations: Result<Vec<f64>, CliError> = args
                .orientations
                .split(',')
                .map(|t| {
                    t.trim()
                        .parse::<f64>()
                        .map_err(|_| usage(format!("bad orientation {t:?}")))
                })
                .collect();
            let samples =
                texture_dataset(args.classes, &orientations?, args.samples, args.size, args.seed)?;
            write_texture_dataset(&samples, &args.out_dir)?;
            Ok(())
        }
        other => Err(usage(format!("unknown synth target {other:?} (expected model|dataset)"))),
    }
}
