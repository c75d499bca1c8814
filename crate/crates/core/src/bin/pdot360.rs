use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::{Args, Parser, Subcommand};

use pdot360::aggregate::FrameVerdict;
use pdot360::dataset::parse_annotations;
use pdot360::pipeline::{
    cmd_build_direct_dataset, cmd_build_pdot_dataset, cmd_crop, cmd_eval, cmd_identify, cmd_segment, cmd_synth,
    frame_id_of, read_jsonl, render_eval_table, write_json, write_jsonl, GroundTruthLabel, RunConfig, StartYawMode,
};

#[derive(Parser)]
#[command(name = "pdot360", version, about = "Intersection identification in 360-degree frames")]
struct Cli {
    /// Increase log verbosity (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct ConfigArgs {
    /// TOML run config; flags below override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    views: Option<usize>,
    #[arg(long)]
    fov: Option<f64>,
    #[arg(long)]
    out_size: Option<usize>,
    /// Minimum PDoT count for an intersection.
    #[arg(short = 'k', long = "min-pdots")]
    k: Option<usize>,
    #[arg(long)]
    threshold: Option<f64>,
    /// depth[:tau], linear:<path> or predictions:<path>.
    #[arg(long)]
    classifier: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Draw each frame's ring start yaw from the seeded generator.
    #[arg(long)]
    random_start: bool,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    min_run: Option<usize>,
    #[arg(long)]
    stride: Option<usize>,
    #[arg(long)]
    keep_negative: Option<f64>,
    #[arg(long)]
    jitter: Option<f64>,
}

impl ConfigArgs {
    fn resolve(&self) -> anyhow::Result<RunConfig> {
        let mut c = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        macro_rules! set {
            ($($field:ident <- $flag:ident),*) => {$(
                if let Some(v) = self.$flag.clone() { c.$field = v; }
            )*};
        }
        set!(views <- views, fov_deg <- fov, out_size <- out_size, k <- k, score_threshold <- threshold,
             classifier <- classifier, seed <- seed, workers <- workers, min_run <- min_run,
             stride <- stride, keep_negative <- keep_negative, jitter_deg <- jitter);
        if self.random_start {
            c.start_yaw = StartYawMode::Random;
        }
        c.validate()?;
        Ok(c)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Write the view ring of each panorama as PNG crops.
    Crop {
        /// Image, directory of images, or text file listing images.
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Build PDoT training crops from an annotation file.
    BuildPdotDataset {
        #[arg(long)]
        annotations: PathBuf,
        /// Directory with `<frame_id>.png|jpg` panoramas.
        #[arg(long)]
        images: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Build the soft-labeled frame list for the direct baseline.
    BuildDirectDataset {
        #[arg(long)]
        annotations: PathBuf,
        #[arg(long)]
        images: Option<PathBuf>,
        /// Output manifest (JSON).
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Classify frames as intersection or not.
    Identify {
        /// Image, directory or frame list. Optional with a predictions classifier.
        #[arg(long)]
        input: Option<PathBuf>,
        /// Verdict records (JSONL); a `.manifest.json` sidecar is written next to it.
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Split a video at detected intersections.
    Segment {
        /// Verdict records of one video, in frame order.
        #[arg(long)]
        verdicts: PathBuf,
        /// Defaults to the verdict file stem.
        #[arg(long)]
        video_id: Option<String>,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Generate a synthetic corpus with ground truth.
    Synth {
        /// Scenes per kind.
        #[arg(long, default_value_t = 10)]
        count: usize,
        #[arg(long, default_value_t = 1024)]
        width: usize,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Score verdicts against ground-truth labels.
    Eval {
        #[arg(long)]
        verdicts: PathBuf,
        #[arg(long)]
        labels: PathBuf,
        #[arg(long, default_value = "pdot")]
        method: String,
        #[arg(long, default_value = "-")]
        train_domain: String,
        /// Optional JSON report.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn sidecar(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Crop { input, out, cfg } => {
            let m = cmd_crop(&input, &out, &cfg.resolve()?)?;
            println!("{} crops written to {}", m.entries.len(), out.display());
        }
        Command::BuildPdotDataset {
            annotations,
            images,
            out,
            cfg,
        } => {
            let anns = parse_annotations(&annotations)?;
            let m = cmd_build_pdot_dataset(&anns, &images, &out, &cfg.resolve()?)?;
            println!(
                "{} positives, {} negatives ({} short), {} frames skipped",
                m.positives,
                m.negatives,
                m.balance_shortfall,
                m.skipped_frames.len()
            );
        }
        Command::BuildDirectDataset {
            annotations,
            images,
            out,
            cfg,
        } => {
            let anns = parse_annotations(&annotations)?;
            let m = cmd_build_direct_dataset(&anns, images.as_deref(), &out, &cfg.resolve()?)?;
            println!("{} frames written to {}", m.entries.len(), out.display());
        }
        Command::Identify { input, out, cfg } => {
            let res = cmd_identify(input.as_deref(), &cfg.resolve()?)?;
            write_jsonl(&out, &res.verdicts)?;
            write_json(
                sidecar(&out),
                &serde_json::json!({
                    "run_config": res.run_config,
                    "frames": res.verdicts.len(),
                    "intersections": res.verdicts.iter().filter(|v| v.is_intersection).count(),
                    "skipped": res.skipped,
                }),
            )?;
            println!(
                "{} frames, {} intersections, {} skipped",
                res.verdicts.len(),
                res.verdicts.iter().filter(|v| v.is_intersection).count(),
                res.skipped.len()
            );
        }
        Command::Segment {
            verdicts,
            video_id,
            out,
            cfg,
        } => {
            let v: Vec<FrameVerdict> = read_jsonl(&verdicts)?;
            let id = video_id.unwrap_or_else(|| frame_id_of(&verdicts));
            let m = cmd_segment(&id, &v, &cfg.resolve()?)?;
            write_json(&out, &m)?;
            println!("{} segments, splits at {:?}", m.segments.len(), m.split_points);
        }
        Command::Synth { count, width, out, cfg } => {
            let m = cmd_synth(count, width, &out, &cfg.resolve()?)?;
            println!("{} panoramas written to {}", m.entries.len(), out.display());
        }
        Command::Eval {
            verdicts,
            labels,
            method,
            train_domain,
            out,
        } => {
            let v: Vec<FrameVerdict> = read_jsonl(&verdicts)?;
            let l: Vec<GroundTruthLabel> = read_jsonl(&labels)?;
            let report = cmd_eval(&v, &l, &method, &train_domain)?;
            print!("{}", render_eval_table(std::slice::from_ref(&report)));
            let c = report.overall;
            println!(
                "tp {} fp {} tn {} fn {}",
                c.true_positive, c.false_positive, c.true_negative, c.false_negative
            );
            if let Some(p) = out {
                write_json(&p, &report).with_context(|| format!("writing {}", p.display()))?;
            }
        }
    }
    Ok(())
}

fn main() -> anyhow::Result<()> {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new().filter_level(level).init();
    run(cli)
}
