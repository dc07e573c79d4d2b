use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use owt_core::datamodel::{apply_split, load_annotations, load_proposals, load_split, load_tracks, write_tracks, CategorySplit, Dataset, GtView, SplitMode};
use owt_core::metrics::{
    assoc_top1_benchmark, detection_recall_analysis, evaluate, parse_alpha_grid, recall_curve_csv, track_recall_csv,
    track_recall_curve, Accumulation, AssocBenchConfig, EvalConfig, EvalMode, SizeBins,
};
use owt_core::par::Executor;
use owt_core::scoring::ScoringMethod;
use owt_core::similarity::SimilarityMethod;
use owt_core::synth::{gen_scenario, Motion, ScenarioConfig};
use owt_core::tracker::{run_owtb, FlowSource, TrackerConfig};
use owt_core::{Error, Result};

mod output;

use output::{write_atomic, write_dir_atomic};

#[derive(Parser, Debug)]
#[command(name = "owt", version, about = "Open-world tracking: evaluation, baseline tracker and analyses")]
struct Cli {
    /// Worker threads; 0 uses every core.
    #[arg(long, global = true, env = "OWT_THREADS", default_value_t = 0)]
    threads: usize,
    /// Seed for commands that draw random numbers.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// error, warn, info, debug or trace.
    #[arg(long, global = true, default_value = "info")]
    log_level: log::LevelFilter,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Score predicted tracks against ground truth (OWTA, or HOTA in closed mode).
    Eval(EvalArgs),
    /// Run the baseline tracker over per-frame proposals.
    Track(TrackArgs),
    /// Proposal recall by top-k and object size, plus track recall.
    Recall(RecallArgs),
    /// Top-1 association accuracy of similarity methods.
    AssocBench(AssocArgs),
    /// Generate a seeded synthetic corpus.
    Synth(SynthArgs),
}

#[derive(Args, Debug)]
struct GtArgs {
    /// Annotation file (TAO/COCO-style JSON).
    #[arg(long)]
    gt: PathBuf,
    /// Category split JSON; without it every category counts as known.
    #[arg(long)]
    split: Option<PathBuf>,
    /// Which categories to evaluate: known or unknown.
    #[arg(long, default_value = "known")]
    class_split: SplitMode,
}

#[derive(Args, Debug)]
struct EvalArgs {
    #[command(flatten)]
    gt: GtArgs,
    /// Predicted tracks (JSON lines).
    #[arg(long)]
    pred: PathBuf,
    /// open (OWTA, false positives ignored) or closed (adds DetA and HOTA).
    #[arg(long, default_value = "open")]
    mode: EvalMode,
    /// Alpha grid as start:stop:step.
    #[arg(long)]
    alphas: Option<String>,
    /// Average per video instead of accumulating over the whole set.
    #[arg(long)]
    per_video: bool,
    /// Keep unknown-mode predictions that match known-category objects.
    #[arg(long)]
    keep_other: bool,
    /// Report path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct TrackArgs {
    #[arg(long)]
    gt: PathBuf,
    #[arg(long)]
    proposals: PathBuf,
    /// Directory holding `<video>/<frame>.flo`.
    #[arg(long)]
    flows: Option<PathBuf>,
    /// Tracker configuration JSON.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the configured similarity method.
    #[arg(long)]
    similarity: Option<SimilarityMethod>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct RecallArgs {
    #[command(flatten)]
    gt: GtArgs,
    #[arg(long)]
    proposals: PathBuf,
    #[arg(long, default_value_t = ScoringMethod::default())]
    scoring: ScoringMethod,
    /// Comma-separated k values.
    #[arg(long, value_delimiter = ',', default_value = "1,2,5,10,20,50,100,200,500,1000")]
    ks: Vec<usize>,
    /// Proposals per frame for track recall.
    #[arg(long, default_value_t = 100)]
    track_k: usize,
    /// Comma-separated coverage fractions for track recall.
    #[arg(long, value_delimiter = ',', default_value = "0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1.0")]
    ps: Vec<f64>,
    /// Writes recall.json, recall_curve.csv and track_recall.csv here.
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args, Debug)]
struct AssocArgs {
    #[command(flatten)]
    gt: GtArgs,
    #[arg(long)]
    proposals: PathBuf,
    #[arg(long)]
    flows: Option<PathBuf>,
    /// Methods to compare (repeatable or comma-separated).
    #[arg(long, value_delimiter = ',', default_value = "box-iou")]
    method: Vec<SimilarityMethod>,
    /// Annotated-frame steps between paired frames.
    #[arg(long, default_value_t = 1)]
    gap: usize,
    /// Chain through every intermediate proposal frame.
    #[arg(long)]
    chain: bool,
    /// Chain hops below this similarity are skipped.
    #[arg(long)]
    assoc_threshold: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SynthArgs {
    /// Output directory; must not exist yet.
    #[arg(long)]
    out: PathBuf,
    /// Scenario configuration JSON; flags below override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    videos: Option<usize>,
    #[arg(long)]
    frames: Option<u32>,
    #[arg(long)]
    objects: Option<usize>,
    /// static, linear or crossing.
    #[arg(long, value_parser = parse_motion)]
    motion: Option<Motion>,
    #[arg(long)]
    jitter: Option<f64>,
    #[arg(long)]
    drop_prob: Option<f64>,
    #[arg(long)]
    clutter: Option<f64>,
    #[arg(long)]
    no_flows: bool,
}

fn parse_motion(s: &str) -> std::result::Result<Motion, String> {
    serde_json::from_value(serde_json::Value::String(s.to_string())).map_err(|_| format!("unknown motion {s:?}"))
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn load_view(a: &GtArgs) -> Result<(Dataset, GtView)> {
    let dataset = load_annotations(&a.gt)?;
    let split = match &a.split {
        Some(p) => load_split(p)?,
        None => CategorySplit::all_known(&dataset),
    };
    let view = apply_split(&dataset, &split, a.class_split)?;
    Ok((dataset, view))
}

fn flow_source(dir: &Option<PathBuf>) -> FlowSource {
    dir.clone().map_or(FlowSource::None, FlowSource::Dir)
}

fn json_line(v: &impl serde::Serialize) -> String {
    serde_json::to_string_pretty(v).expect("serializable") + "\n"
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(p) => write_atomic(p, text.as_bytes()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let exec = Executor::new(cli.threads);
    log::info!("event=start threads={} parallel={}", exec.threads(), exec.is_parallel());
    match cli.command {
        Command::Eval(a) => {
            let alphas = match &a.alphas {
                Some(s) => parse_alpha_grid(s)?,
                None => owt_core::metrics::default_alphas(),
            };
            let cfg = EvalConfig {
                alphas,
                mode: a.mode,
                remove_other: !a.keep_other,
                accumulation: if a.per_video { Accumulation::PerVideo } else { Accumulation::Global },
            };
            let (_, view) = load_view(&a.gt)?;
            let preds = load_tracks(&a.pred)?;
            let report = evaluate(&preds, &view, &cfg, &exec)?;
            log::info!("event=eval mode={} split={} owta={:.6} empty={}", a.mode, a.gt.class_split, report.mean.owta, report.empty);
            emit(&a.out, &report.to_json_pretty())
        }
        Command::Track(a) => {
            let mut cfg = match &a.config {
                Some(p) => TrackerConfig::from_json(&read_text(p)?)?,
                None => TrackerConfig::default(),
            };
            if let Some(m) = a.similarity {
                cfg.similarity = m;
            }
            let dataset = load_annotations(&a.gt)?;
            let proposals = load_proposals(&a.proposals, None)?;
            let tracks = run_owtb(&dataset, &proposals, &flow_source(&a.flows), &cfg, &exec)?;
            log::info!("event=track videos={} tracks={} detections={}", tracks.videos.len(), tracks.num_tracks(), tracks.num_detections());
            let mut buf = Vec::new();
            write_tracks(&tracks, &mut buf).map_err(|e| Error::io(&a.out, e))?;
            write_atomic(&a.out, &buf)
        }
        Command::Recall(a) => {
            let (_, view) = load_view(&a.gt)?;
            let proposals = load_proposals(&a.proposals, None)?;
            let table = detection_recall_analysis(&proposals, &view, a.scoring, &a.ks, SizeBins::default(), &exec)?;
            let curve = track_recall_curve(&proposals, &view, a.scoring, a.track_k, &a.ps, &exec)?;
            log::info!("event=recall gt_detections={} rows={}", table.counts.iter().sum::<u64>(), table.rows.len());
            write_dir_atomic(
                &a.out_dir,
                &[
                    ("recall.json", json_line(&table)),
                    ("recall_curve.csv", recall_curve_csv(&table)),
                    ("track_recall.csv", track_recall_csv(&curve)),
                ],
            )
        }
        Command::AssocBench(a) => {
            let (_, view) = load_view(&a.gt)?;
            let proposals = load_proposals(&a.proposals, None)?;
            let flows = flow_source(&a.flows);
            let mut results = Vec::new();
            for &method in &a.method {
                let cfg = AssocBenchConfig { method, gap: a.gap, chain: a.chain, assoc_threshold: a.assoc_threshold };
                let r = assoc_top1_benchmark(&view, &proposals, &flows, &cfg, &exec)?;
                log::info!("event=assoc method={} successes={} total={}", r.method, r.successes, r.total);
                results.push(r);
            }
            emit(&a.out, &json_line(&results))
        }
        Command::Synth(a) => {
            let mut cfg: ScenarioConfig = match &a.config {
                Some(p) => serde_json::from_str(&read_text(p)?)
                    .map_err(|e| Error::config(format!("{}: {e}", p.display())))?,
                None => ScenarioConfig::default(),
            };
            cfg.seed = cli.seed;
            macro_rules! set {
                ($($f:ident <- $v:expr),*) => { $(if let Some(v) = $v { cfg.$f = v; })* };
            }
            set!(videos <- a.videos, frames <- a.frames, objects <- a.objects, motion <- a.motion,
                 jitter <- a.jitter, drop_prob <- a.drop_prob, clutter_rate <- a.clutter);
            if a.no_flows {
                cfg.flows = false;
            }
            let scenario = gen_scenario(&cfg, &exec)?;
            output::write_tree_atomic(&a.out, |dir| {
                scenario.write_to(dir)?;
                std::fs::write(dir.join("config.json"), json_line(&cfg)).map_err(|e| Error::io(dir.join("config.json"), e))
            })?;
            log::info!("event=synth videos={} proposals={} out={}", cfg.videos, scenario.proposals.len(), a.out.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    output::init_logging(cli.log_level);
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let code = if e.is_config() { 2 } else { 1 };
            log::error!("event=failed exit={code} error={:?}", e.to_string());
            ExitCode::from(code)
        }
    }
}
