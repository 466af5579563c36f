use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use facetrack_bench::config::load_config;
use facetrack_bench::results::{parse_results, write_curves};
use facetrack_bench::runner::{run_to_dir, InitMode, RunOptions};
use facetrack_bench::sequence::load_boxes;
use facetrack_bench::synth::{synth_sequence, write_sequence, Scenario, SynthConfig};
use facetrack_core::metrics::evaluate;
use facetrack_core::{BoundingBox, TrackerConfig};
use rayon::prelude::*;

#[derive(Parser)]
#[command(name = "facetrack", version, about = "Multi-model face tracker and benchmark tools")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Track one or more OTB-style sequences and score them.
    Run(RunArgs),
    /// Generate a synthetic sequence.
    Synth(SynthArgs),
    /// Score a results file against ground truth.
    Eval(EvalArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum InitArg {
    Gt,
    Detections,
}

#[derive(Args)]
struct RunArgs {
    /// Sequence directory (repeatable).
    #[arg(long = "seq", required = true)]
    seqs: Vec<PathBuf>,
    #[arg(long, value_enum, default_value = "gt")]
    init: InitArg,
    /// Detections CSV (single sequence only; defaults to detections.csv in the sequence).
    #[arg(long)]
    detections: Option<PathBuf>,
    /// Precomputed keypoints CSV (single sequence only).
    #[arg(long)]
    keypoints: Option<PathBuf>,
    /// Tracker config file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    /// Sequences tracked in parallel.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u16).range(1..))]
    jobs: u16,
    /// Also write per-frame overlay PNGs.
    #[arg(long)]
    overlays: bool,
    #[arg(long)]
    no_detector: bool,
    #[arg(long)]
    no_candidates: bool,
    #[arg(long)]
    no_updates: bool,
    #[arg(long)]
    no_grm_edit: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScenarioArg {
    Translation,
    ScaleRamp,
    Occlusion,
    Clutter,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, value_enum)]
    scenario: ScenarioArg,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u32).range(2..))]
    frames: u32,
    #[arg(long, default_value_t = 2.0, allow_negative_numbers = true)]
    vx: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    vy: f64,
    #[arg(long, default_value_t = 1.0)]
    scale_start: f64,
    #[arg(long, default_value_t = 1.5)]
    scale_end: f64,
    /// First occluded frame (1-based).
    #[arg(long, default_value_t = 40)]
    occlusion_start: usize,
    /// Last occluded frame (1-based).
    #[arg(long, default_value_t = 60)]
    occlusion_end: usize,
    #[arg(long, default_value_t = 1.0)]
    coverage: f64,
    #[arg(long, default_value_t = 3)]
    distractors: usize,
    /// Detection noise standard deviation in pixels.
    #[arg(long, default_value_t = 1.5)]
    jitter: f64,
    /// Probability of a missed detection per frame.
    #[arg(long, default_value_t = 0.0)]
    dropout: f64,
}

#[derive(Args)]
struct EvalArgs {
    /// Results CSV, or one x,y,w,h box per line.
    #[arg(long)]
    results: PathBuf,
    /// Ground-truth boxes, one x,y,w,h per line.
    #[arg(long)]
    gt: PathBuf,
    /// Where to write the curves CSV.
    #[arg(long, default_value = "curves.csv")]
    curves: PathBuf,
}

fn cmd_run(args: RunArgs) -> Result<()> {
    let mut config = match &args.config {
        Some(p) => load_config(p)?,
        None => TrackerConfig::default(),
    };
    config.disable_detector |= args.no_detector;
    config.disable_candidates |= args.no_candidates;
    config.disable_template_updates |= args.no_updates;
    config.disable_grm_add_delete |= args.no_grm_edit;
    if args.seqs.len() > 1 && (args.detections.is_some() || args.keypoints.is_some()) {
        bail!("--detections and --keypoints apply to a single --seq");
    }
    let opts = RunOptions {
        config,
        init: match args.init {
            InitArg::Gt => InitMode::GroundTruth,
            InitArg::Detections => InitMode::Detections,
        },
        detections: args.detections.clone(),
        keypoints: args.keypoints.clone(),
        overlays: args.overlays,
    };
    let out_for = |seq: &Path| -> PathBuf {
        if args.seqs.len() == 1 {
            args.out.clone()
        } else {
            args.out.join(seq.file_name().unwrap_or(seq.as_os_str()))
        }
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(usize::from(args.jobs))
        .build()
        .context("building thread pool")?;
    let outcomes: Vec<_> = pool.install(|| {
        args.seqs
            .par_iter()
            .map(|seq| run_to_dir(seq, &opts, &out_for(seq)).with_context(|| format!("sequence {}", seq.display())))
            .collect()
    });
    let mut failed = 0;
    for outcome in outcomes {
        match outcome {
            Ok(s) => println!(
                "{}: precision@20 {:.3}  success AUC {:.3}  {:.1} fps",
                s.sequence, s.precision_at_20, s.success_auc, s.fps
            ),
            Err(e) => {
                eprintln!("error: {e:#}");
                failed += 1;
            }
        }
    }
    if failed > 0 {
        bail!("{failed} of {} sequences failed", args.seqs.len());
    }
    Ok(())
}

fn cmd_synth(args: SynthArgs) -> Result<()> {
    let scenario = match args.scenario {
        ScenarioArg::Translation => Scenario::Translation {
            vx: args.vx,
            vy: args.vy,
        },
        ScenarioArg::ScaleRamp => Scenario::ScaleRamp {
            start: args.scale_start,
            end: args.scale_end,
        },
        ScenarioArg::Occlusion => Scenario::Occlusion {
            start: args.occlusion_start,
            end: args.occlusion_end,
            coverage: args.coverage,
        },
        ScenarioArg::Clutter => Scenario::Clutter {
            distractors: args.distractors,
        },
    };
    let cfg = SynthConfig {
        frames: args.frames as usize,
        seed: args.seed,
        detection_jitter: args.jitter,
        detection_dropout: args.dropout,
        ..SynthConfig::new(scenario)
    };
    let seq = synth_sequence(&cfg)?;
    write_sequence(&seq, &args.out)?;
    println!("wrote {} frames to {}", seq.frames.len(), args.out.display());
    Ok(())
}

fn load_result_boxes(path: &Path) -> Result<Vec<BoundingBox>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    if text.trim_start().starts_with("frame") {
        Ok(parse_results(path, &text)?.into_iter().map(|r| r.bbox).collect())
    } else {
        Ok(load_boxes(path)?)
    }
}

fn cmd_eval(args: EvalArgs) -> Result<()> {
    let results = load_result_boxes(&args.results)?;
    let gt = load_boxes(&args.gt)?;
    let curves = evaluate(&results, &gt)?;
    write_curves(&args.curves, &curves)?;
    println!("precision@20 {:.3}", curves.precision_at_20);
    println!("success AUC {:.3}", curves.success_auc);
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Synth(a) => cmd_synth(a),
        Command::Eval(a) => cmd_eval(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
