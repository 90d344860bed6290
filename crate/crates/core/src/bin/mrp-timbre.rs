use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use mrp_timbre::audio_io::encode_wav_f32;
use mrp_timbre::dataset::{
    extract_all, load_manifest_audio, read_features, read_manifest, synth_corpus, write_features,
    ExtractConfig, FeatureSet, ManifestEntry, SynthSpec, CHANNEL_LEN, MRP_CHANNELS, SPEC_CHANNELS,
};
use mrp_timbre::model::{cross_validate, write_params, CvConfig, NetShape, TrainConfig, Variant};
use mrp_timbre::mrp::IMAGE_SIDE;
use mrp_timbre::nn::{DecayMode, SgdConfig};
use mrp_timbre::pgm::encode_pgm;
use mrp_timbre::spectrogram::{SpectrogramConfig, Window};
use mrp_timbre::{Error, Result};

#[derive(Parser)]
#[command(
    name = "mrp-timbre",
    version,
    about = "Timbre classification from multiresolution recurrence plots"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Render a synthetic tone corpus to WAV files plus a manifest.
    Synth(SynthArgs),
    /// Extract MRP and spectrogram features from a manifest into an FTC file.
    Extract(ExtractArgs),
    /// Cross-validate one network variant on a feature file.
    Train(TrainArgs),
    /// Dump one feature channel as a binary PGM image.
    Render(RenderArgs),
}

#[derive(Args, Serialize)]
struct SynthArgs {
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Synthesis spec (JSON).
    #[arg(long)]
    spec: PathBuf,
    /// Overrides the seed in the synthesis spec.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum WindowArg {
    Rectangular,
    Hann,
}

#[derive(Args, Serialize)]
struct ExtractArgs {
    #[arg(long)]
    manifest: PathBuf,
    /// Output FTC file.
    #[arg(long)]
    out: PathBuf,
    /// Emit 13 time-shifted examples per source instead of 1.
    #[arg(long)]
    augment: bool,
    /// Spectrogram frame window.
    #[arg(long, value_enum, default_value = "rectangular")]
    window: WindowArg,
    /// Seed recorded in the feature header.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Serialize)]
struct TrainArgs {
    #[arg(long)]
    features: PathBuf,
    /// mrp, spec or combined.
    #[arg(long)]
    #[serde(serialize_with = "as_display")]
    variant: Variant,
    #[arg(long, default_value_t = 10)]
    folds: usize,
    #[arg(long, default_value_t = 30)]
    epochs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 16)]
    f1: usize,
    #[arg(long, default_value_t = 32)]
    f2: usize,
    #[arg(long, default_value_t = 128)]
    hidden: usize,
    #[arg(long, default_value_t = 16)]
    batch_size: usize,
    #[arg(long, default_value_t = 1e-2)]
    learning_rate: f64,
    #[arg(long, default_value_t = 1e-4)]
    decay: f64,
    #[arg(long, default_value_t = 0.8)]
    momentum: f64,
    /// Treat decay as L2 weight decay instead of learning-rate decay.
    #[arg(long)]
    l2_decay: bool,
    /// Feed raw feature values without per-fold input scaling.
    #[arg(long)]
    no_standardize: bool,
}

#[derive(Args, Serialize)]
struct RenderArgs {
    #[arg(long)]
    features: PathBuf,
    /// Example index.
    #[arg(long)]
    example: usize,
    /// Channel index: 0..55 MRP (point*7+layer), 56..63 spectrogram.
    #[arg(long)]
    channel: usize,
    /// Output PGM file.
    #[arg(long)]
    out: PathBuf,
}

fn as_display<S: serde::Serializer>(v: &Variant, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(v.name())
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::from(e).in_file(path))
}

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| Error::from(e).in_file(path))
}

/// Sibling path with `suffix` appended to the file name.
fn sidecar(path: &Path, suffix: &str) -> PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(suffix);
    path.with_file_name(name)
}

fn cmd_synth(args: &SynthArgs) -> Result<()> {
    let text = fs::read_to_string(&args.spec).map_err(|e| Error::from(e).in_file(&args.spec))?;
    let mut spec: SynthSpec = serde_json::from_str(&text)
        .map_err(|e| Error::Config(format!("invalid synthesis spec: {e}")).in_file(&args.spec))?;
    if let Some(seed) = args.seed {
        spec.seed = seed;
    }
    let tones = synth_corpus(&spec)?;
    create_dir(&args.out)?;
    let mut manifest = Vec::with_capacity(tones.len());
    for t in &tones {
        let name = PathBuf::from(format!("{}.wav", t.source_id));
        let path = args.out.join(&name);
        fs::write(
            &path,
            encode_wav_f32(t.series.samples(), t.series.sample_rate()),
        )
        .map_err(|e| Error::from(e).in_file(&path))?;
        manifest.push(ManifestEntry {
            path: name,
            label: t.label,
            source_id: t.source_id.clone(),
        });
    }
    write_json(&args.out.join("manifest.json"), &manifest)?;
    write_json(&args.out.join("synth_config.json"), &spec)?;
    log::info!("wrote {} tones to {}", tones.len(), args.out.display());
    Ok(())
}

fn cmd_extract(args: &ExtractArgs) -> Result<()> {
    let entries = read_manifest(&args.manifest)?;
    let audio = load_manifest_audio(&args.manifest, &entries)?;
    let cfg = ExtractConfig {
        spectrogram: SpectrogramConfig {
            window: match args.window {
                WindowArg::Rectangular => Window::Rectangular,
                WindowArg::Hann => Window::Hann,
            },
            ..SpectrogramConfig::default()
        },
    };
    let examples = extract_all(&audio, args.augment, &cfg)?;
    let num_classes = entries.iter().map(|e| e.label).max().unwrap_or(0) + 1;
    let set = FeatureSet {
        examples,
        num_classes,
        seed: args.seed,
    };
    if let Some(dir) = args.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        create_dir(dir)?;
    }
    write_features(&args.out, &set)?;
    #[derive(Serialize)]
    struct Resolved<'a> {
        args: &'a ExtractArgs,
        extract: ExtractConfig,
        num_classes: usize,
        example_count: usize,
    }
    write_json(
        &sidecar(&args.out, ".config.json"),
        &Resolved {
            args,
            extract: cfg,
            num_classes,
            example_count: set.examples.len(),
        },
    )?;
    log::info!(
        "wrote {} examples to {}",
        set.examples.len(),
        args.out.display()
    );
    Ok(())
}

fn cmd_train(args: &TrainArgs) -> Result<()> {
    let set = read_features(&args.features)?;
    let cfg = CvConfig {
        folds: args.folds,
        shape: NetShape {
            f1: args.f1,
            f2: args.f2,
            hidden: args.hidden,
        },
        train: TrainConfig {
            epochs: args.epochs,
            batch_size: args.batch_size,
            sgd: SgdConfig {
                learning_rate: args.learning_rate,
                decay: args.decay,
                momentum: args.momentum,
                decay_mode: if args.l2_decay {
                    DecayMode::L2
                } else {
                    DecayMode::LearningRate
                },
            },
            seed: args.seed,
        },
        seed: args.seed,
        standardize: !args.no_standardize,
    };
    cfg.train.sgd.validate()?;
    create_dir(&args.out)?;
    #[derive(Serialize)]
    struct Resolved<'a> {
        args: &'a TrainArgs,
        cv: &'a CvConfig,
        num_classes: usize,
    }
    write_json(
        &args.out.join("config.json"),
        &Resolved {
            args,
            cv: &cfg,
            num_classes: set.num_classes,
        },
    )?;
    let outcome = cross_validate(&set, args.variant, &cfg)?;
    for (f, fold) in outcome.folds.iter().enumerate() {
        write_params(
            args.out.join(format!("fold_{f:02}.params.ftc")),
            &fold.net,
            &fold.loss_trace,
        )?;
    }
    write_json(&args.out.join("results.json"), &outcome.result)?;
    log::info!(
        "{} mean error {:.4} over {} folds",
        args.variant,
        outcome.result.mean_error,
        args.folds
    );
    Ok(())
}

fn cmd_render(args: &RenderArgs) -> Result<()> {
    let set = read_features(&args.features)?;
    let ex = set.examples.get(args.example).ok_or_else(|| {
        Error::Parameter(format!(
            "example {} out of range (file holds {})",
            args.example,
            set.examples.len()
        ))
    })?;
    let channel = ex.channel(args.channel).ok_or_else(|| {
        Error::Parameter(format!(
            "channel {} out of range (0..{})",
            args.channel,
            MRP_CHANNELS + SPEC_CHANNELS
        ))
    })?;
    debug_assert_eq!(channel.len(), CHANNEL_LEN);
    let values: Vec<f64> = channel.iter().map(|&v| v as f64).collect();
    let img = encode_pgm(&values, IMAGE_SIDE, IMAGE_SIDE)?;
    if let Some(dir) = args.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        create_dir(dir)?;
    }
    fs::write(&args.out, img).map_err(|e| Error::from(e).in_file(&args.out))?;
    write_json(&sidecar(&args.out, ".config.json"), args)
}

fn configure_threads() -> Result<()> {
    let Ok(value) = std::env::var("MRP_THREADS") else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("MRP_THREADS must be a thread count, got '{value}'")))?;
    if n > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config(format!("cannot size the worker pool: {e}")))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    let run = configure_threads().and_then(|()| match &cli.command {
        Command::Synth(a) => cmd_synth(a),
        Command::Extract(a) => cmd_extract(a),
        Command::Train(a) => cmd_train(a),
        Command::Render(a) => cmd_render(a),
    });
    match run {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_config() {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
