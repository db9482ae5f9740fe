use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use beings_core::scene::config::SceneFile;
use beings_core::scene::render;
use beings_core::Pose;
use beings_harness::artifacts::{episode_svg, write_episode_log, write_summary_csv};
use beings_harness::metrics::{mean_min_ne, median_steps};
use beings_harness::tasks::make_task;
use beings_harness::{run_batch, run_episode, Difficulty, EpisodeConfig, Prepared, Strategy, TaskSpec};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "beings", version, about = "Image-goal navigation experiments over rendered rollouts")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a single episode.
    Run {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Trial index; selects the planner's random stream.
        #[arg(long, default_value_t = 0)]
        trial: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Episode log (JSON lines).
        #[arg(long)]
        log: Option<PathBuf>,
        /// Top-down SVG of the episode.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Run a batch of seeded trials and print SR, SPC, NE, NS_min, NS_mean.
    Batch {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        trials: Option<usize>,
        /// Episode log of every trial (JSON lines).
        #[arg(long)]
        log: Option<PathBuf>,
        /// Summary CSV; printed to stdout when absent.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Directory for one SVG per trial.
        #[arg(long)]
        svg_dir: Option<PathBuf>,
    },
    /// Render the view from a pose to PNG.
    Render {
        /// easy | medium | hard | scene file
        #[arg(long, default_value = "easy")]
        task: String,
        /// Task seed (distractor layout).
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// x y z yaw; defaults to the goal pose.
        #[arg(long, num_args = 4, value_names = ["X", "Y", "Z", "YAW"], allow_negative_numbers = true)]
        pose: Option<Vec<f64>>,
        #[arg(long, default_value_t = 256)]
        width: usize,
        #[arg(long, default_value_t = 192)]
        height: usize,
        #[arg(long, default_value_t = 90.0)]
        hfov_deg: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write the built-in task scenes as scene files.
    Tasks {
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
        /// Task seed (distractor layout).
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

/// Configuration file plus per-field overrides.
#[derive(Args)]
struct ConfigArgs {
    /// TOML experiment configuration; flags below override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// easy | medium | hard | scene file
    #[arg(long)]
    task: Option<String>,
    /// beings | directly | random | bayes-only | mcmpc-only
    #[arg(long)]
    strategy: Option<Strategy>,
    #[arg(long)]
    max_steps: Option<usize>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    cell_size: Option<f64>,
    #[arg(long)]
    rollouts: Option<usize>,
    #[arg(long)]
    horizon: Option<usize>,
    #[arg(long)]
    mutation_prob: Option<f64>,
    #[arg(long)]
    magnitude_sigma: Option<f64>,
    #[arg(long)]
    temperature: Option<f64>,
    #[arg(long)]
    refinements: Option<usize>,
    #[arg(long)]
    terminal_weight: Option<f64>,
    /// Evaluate rollouts sequentially.
    #[arg(long)]
    serial: bool,
    /// Include every rollout trajectory in the log and SVG.
    #[arg(long)]
    record_rollouts: bool,
}

impl ConfigArgs {
    fn resolve(&self) -> anyhow::Result<EpisodeConfig> {
        let mut cfg = match &self.config {
            Some(p) => EpisodeConfig::load(p).with_context(|| format!("loading {}", p.display()))?,
            None => EpisodeConfig::default(),
        };
        if let Some(t) = &self.task {
            cfg.task = TaskSpec::parse(t);
        }
        macro_rules! set {
            ($($src:ident => $($dst:ident).+),* $(,)?) => {
                $(if let Some(v) = self.$src { cfg.$($dst).+ = v; })*
            };
        }
        set!(
            strategy => strategy,
            max_steps => max_steps,
            epsilon => epsilon,
            cell_size => cell_size,
            rollouts => planner.rollouts,
            horizon => planner.horizon,
            mutation_prob => planner.mutation_prob,
            magnitude_sigma => planner.magnitude_sigma,
            refinements => planner.refinements,
            terminal_weight => cost.terminal_weight,
        );
        if let Some(t) = self.temperature {
            cfg.planner.temperature = Some(t);
        }
        if self.serial {
            cfg.planner.parallel = false;
        }
        cfg.record_rollouts |= self.record_rollouts;
        Ok(cfg)
    }
}

fn create(path: &Path) -> anyhow::Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    Ok(BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?))
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Run { cfg, trial, seed, log, svg } => {
            let mut cfg = cfg.resolve()?;
            cfg.seed = seed;
            cfg.record_rollouts |= svg.is_some();
            cfg.validate()?;
            let task = cfg.task.build(cfg.seed)?;
            let prep = Prepared::new(&task, &cfg)?;
            let r = run_episode(&prep, &cfg, trial)?;
            println!(
                "success={} steps={} cost={:.1} ne={:.3} min_ne={:.3} collisions={} dissimilarity={:.4}",
                r.success, r.steps, r.total_cost, r.ne, r.min_ne, r.collisions, r.final_dissimilarity
            );
            if let Some(d) = &r.diagnostic {
                eprintln!("diagnostic: {d}");
            }
            if let Some(p) = log {
                write_episode_log(create(&p)?, std::slice::from_ref(&r))?;
            }
            if let Some(p) = svg {
                std::fs::write(&p, episode_svg(&task, &prep.grid, &r)).with_context(|| format!("writing {}", p.display()))?;
            }
        }
        Command::Batch { cfg, seed, trials, log, csv, svg_dir } => {
            let mut cfg = cfg.resolve()?;
            cfg.seed = seed;
            if let Some(n) = trials {
                cfg.trials = n;
            }
            cfg.record_rollouts |= svg_dir.is_some();
            let out = run_batch(&cfg)?;
            match csv {
                Some(p) => write_summary_csv(create(&p)?, &out.summary)?,
                None => write_summary_csv(std::io::stdout().lock(), &out.summary)?,
            }
            eprintln!(
                "{} / {}: {} trials, C* = {:.1}, median NS = {}, mean min NE = {:.3}",
                cfg.task.label(),
                cfg.strategy,
                out.results.len(),
                out.reference_cost,
                median_steps(&out.results).map_or("n/a".to_owned(), |m| format!("{m}")),
                mean_min_ne(&out.results)
            );
            if let Some(p) = log {
                write_episode_log(create(&p)?, &out.results)?;
            }
            if let Some(dir) = svg_dir {
                std::fs::create_dir_all(&dir)?;
                let task = cfg.task.build(cfg.seed)?;
                let prep = Prepared::new(&task, &cfg)?;
                for (i, r) in out.results.iter().enumerate() {
                    std::fs::write(dir.join(format!("trial_{i:03}.svg")), episode_svg(&task, &prep.grid, r))?;
                }
            }
        }
        Command::Render { task, seed, pose, width, height, hfov_deg, out } => {
            let task = TaskSpec::parse(&task).build(seed)?;
            let pose = match pose.as_deref() {
                Some(&[x, y, z, yaw]) => Pose::try_new(x, y, z, yaw)?,
                Some(_) => bail!("--pose takes four values"),
                None => *task.scene.goal_pose(),
            };
            let cam = beings_core::Camera::with_hfov(width, height, hfov_deg.to_radians())?;
            let img = render(&task.scene, &cam, &pose);
            image::save_buffer(&out, &img.to_rgb8(), width as u32, height as u32, image::ExtendedColorType::Rgb8)
                .with_context(|| format!("writing {}", out.display()))?;
        }
        Command::Tasks { out_dir, seed } => {
            std::fs::create_dir_all(&out_dir)?;
            for d in Difficulty::ALL {
                let t = make_task(d, seed);
                let file = SceneFile::from_scene(&t.scene, Some(&t.start))?;
                let path = out_dir.join(format!("{}.toml", d.name()));
                std::fs::write(&path, file.to_toml()).with_context(|| format!("writing {}", path.display()))?;
                println!("{}", path.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
