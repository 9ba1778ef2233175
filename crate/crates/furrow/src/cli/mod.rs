//! The `furrow` command line.
//!
//! Exit codes: 0 success, 1 usage error, 2 processing error. Per-frame
//! detection failures are reported in the output and do not change the exit
//! code; unreadable inputs and failed writes do.

mod commands;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::config::AppConfig;

#[derive(Debug, Parser)]
#[command(name = "furrow", version, about = "Furrow edge detection on RGB-D frames")]
pub struct Cli {
    /// TOML config file; missing keys take their defaults.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Directory for written files (default: io.out_dir from the config, else ".").
    #[arg(long, global = true, value_name = "DIR")]
    pub out_dir: Option<PathBuf>,
    /// Worker threads for frame-parallel commands.
    #[arg(long, global = true, value_name = "N")]
    pub jobs: Option<usize>,
    /// Overrides every seed in the config (detector, augment) and seeds synth and split assignment.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Meters per stored depth unit in 16-bit depth files.
    #[arg(long, global = true, value_name = "METERS")]
    pub depth_scale: Option<f64>,
    /// Print the built-in default config as TOML and exit.
    #[arg(long)]
    pub dump_defaults: bool,
    /// More log output (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Detect the furrow edge on depth maps; one JSON line per frame on stdout.
    DetectTm {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        /// Also write the rasterized edge as <stem>_tm_mask.png.
        #[arg(long)]
        mask: bool,
        /// Also dump band candidates as <stem>_candidates.csv (band,x,y,score).
        #[arg(long)]
        candidates: bool,
    },
    /// Otsu + Canny edge masks from RGB images, written as <stem>_canny.png.
    DetectCanny {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
    },
    /// Render synthetic frames into <out>/<capture>/frame_NNNN_{depth,mask,rgb}.png.
    Synth {
        #[arg(long, default_value_t = 1)]
        count: usize,
        #[arg(long, default_value = "synthetic")]
        capture: String,
        /// JSON scene spec used for every frame instead of random scenes.
        #[arg(long, value_name = "FILE")]
        scene: Option<PathBuf>,
        /// Fraction of the frame covered by dropout holes.
        #[arg(long, default_value_t = 0.0)]
        dropout: f64,
        /// Radius of each dropout hole, pixels.
        #[arg(long, default_value_t = 12.0)]
        blob_radius: f64,
        /// Range noise standard deviation per squared meter.
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
        /// Drop a soil pile on the edge 2 m ahead.
        #[arg(long)]
        pile: bool,
    },
    /// Auto-label every *_depth.png / *.pgm under DIR and write manifest.tsv.
    Annotate { dir: PathBuf },
    /// Augment a manifest's frames into crops and write a new manifest.tsv.
    Augment { manifest: PathBuf },
    /// Draw the edge, lane lines and departure status on an RGB frame.
    Overlay {
        rgb: PathBuf,
        /// detect-tm output to take the edge model from.
        #[arg(long, value_name = "FILE", conflicts_with = "depth")]
        detection: Option<PathBuf>,
        /// Depth map to run the detector on.
        #[arg(long, value_name = "FILE")]
        depth: Option<PathBuf>,
    },
    /// Score predictions listed in a pred_path/gt_path TSV; prints a JSON report.
    Eval {
        pairs: PathBuf,
        /// Match distance, pixels.
        #[arg(long, default_value_t = 3.0)]
        tolerance: f64,
        /// Binarization threshold for the fixed-threshold scores.
        #[arg(long, default_value_t = 0.5)]
        threshold: f64,
    },
}

/// Marks errors that are the caller's fault (exit code 1).
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct UsageError(pub String);

/// Settings shared by every command after flags are applied.
pub struct Context {
    pub config: AppConfig,
    pub out_dir: PathBuf,
    pub seed: u64,
    pool: rayon::ThreadPool,
}

impl Context {
    fn new(cli: &Cli) -> anyhow::Result<Self> {
        let mut config = match &cli.config {
            Some(path) => AppConfig::load(path).map_err(|e| UsageError(e.report()))?,
            None => AppConfig::default(),
        };
        if let Some(seed) = cli.seed {
            config.detector.rng_seed = seed;
            config.augment.rng_seed = seed;
        }
        if let Some(scale) = cli.depth_scale {
            if !(scale > 0.0 && scale.is_finite()) {
                return Err(UsageError("--depth-scale must be positive".into()).into());
            }
            config.io.depth_scale = scale;
        }
        let out_dir = cli
            .out_dir
            .clone()
            .or_else(|| config.io.out_dir.clone())
            .unwrap_or_else(|| PathBuf::from("."));
        let jobs = match cli.jobs {
            Some(0) => return Err(UsageError("--jobs must be at least 1".into()).into()),
            Some(n) => n,
            None => 0,
        };
        let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs).build()?;
        Ok(Self {
            seed: cli.seed.unwrap_or(config.augment.rng_seed),
            config,
            out_dir,
            pool,
        })
    }

    pub fn install<R: Send>(&self, f: impl FnOnce() -> R + Send) -> R {
        self.pool.install(f)
    }
}

fn init_logging(verbose: u8) {
    let level = match verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_target(false)
        .try_init();
}

fn execute(cli: Cli) -> anyhow::Result<()> {
    if cli.dump_defaults {
        print!("{}", AppConfig::default().to_toml()?);
        return Ok(());
    }
    let Some(command) = &cli.command else {
        return Err(UsageError("a subcommand is required (see --help)".into()).into());
    };
    let ctx = Context::new(&cli)?;
    match command {
        Command::DetectTm {
            inputs,
            mask,
            candidates,
        } => commands::detect_tm(&ctx, inputs, *mask, *candidates),
        Command::DetectCanny { inputs } => commands::detect_canny(&ctx, inputs),
        Command::Synth {
            count,
            capture,
            scene,
            dropout,
            blob_radius,
            noise,
            pile,
        } => commands::synth(
            &ctx,
            &commands::SynthArgs {
                count: *count,
                capture,
                scene: scene.as_deref(),
                dropout: *dropout,
                blob_radius: *blob_radius,
                noise: *noise,
                pile: *pile,
            },
        ),
        Command::Annotate { dir } => commands::annotate(&ctx, dir),
        Command::Augment { manifest } => commands::augment(&ctx, manifest),
        Command::Overlay { rgb, detection, depth } => {
            commands::overlay(&ctx, rgb, detection.as_deref(), depth.as_deref())
        }
        Command::Eval {
            pairs,
            tolerance,
            threshold,
        } => commands::eval(&ctx, pairs, *tolerance, *threshold),
    }
}

/// Runs the CLI on `args` (including the program name) and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
        }
    };
    init_logging(cli.verbose);
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() {
                1
            } else {
                2
            }
        }
    }
}
