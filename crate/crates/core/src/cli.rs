//! Command-line front end: `train`, `test`, `exp1`, `exp2` and `plot-data`.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::filter::{NoveltyFilter, StimulusScale};
use crate::harness::{self, run_trial, ExperimentConfig, TrialTrace};
use crate::persist::{self, ManifestEntry, RunManifest};
use crate::simworld::{resolve_world, World};

#[derive(Debug, Parser)]
#[command(
    name = "hsom",
    version,
    about = "Habituating SOM novelty filter experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run learning trials in one world and save the trained filter.
    Train(TrainArgs),
    /// Run one frozen trial with a saved filter.
    Test(TestArgs),
    /// Model acquisition in A, transfer to B, and the CONTROL run.
    Exp1(RunArgs),
    /// Forgetting experiment: interleaved A*/A and B/A trials.
    Exp2(Exp2Args),
    /// Convert a run directory into two-column position/novelty files.
    PlotData(PlotArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Switch {
    On,
    Off,
}

#[derive(Debug, Args)]
struct RunArgs {
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Output directory for traces, snapshots and the manifest.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long, value_enum)]
    forgetting: Option<Switch>,
    /// unit, clamp1, raw or fixed:<value>.
    #[arg(long)]
    stimulus_scale: Option<StimulusScale>,
    /// Moving-average window over successive sonar scans.
    #[arg(long)]
    smoothing: Option<usize>,
    /// Uniform range noise amplitude in metres.
    #[arg(long)]
    noise: Option<f64>,
}

#[derive(Debug, Args)]
struct TrainArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Builtin world name (A, B, A*, CONTROL) or a world file.
    #[arg(long, default_value = "A")]
    world: String,
    #[arg(long, default_value_t = 1)]
    trials: usize,
    /// Continue from a saved filter instead of a fresh one.
    #[arg(long)]
    weights: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct TestArgs {
    #[command(flatten)]
    run: RunArgs,
    #[arg(long, default_value = "A")]
    world: String,
    #[arg(long)]
    weights: PathBuf,
}

#[derive(Debug, Args)]
struct Exp2Args {
    #[command(flatten)]
    run: RunArgs,
    /// A-trained filter; trained from scratch when omitted.
    #[arg(long)]
    weights: Option<PathBuf>,
    /// Learning trials per variant.
    #[arg(long)]
    trials: Option<usize>,
}

#[derive(Debug, Args)]
struct PlotArgs {
    /// Directory written by a previous run.
    input: PathBuf,
    #[arg(long, default_value = "plot")]
    out: PathBuf,
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e:#}");
            1
        }
    }
}

fn run(command: Command) -> anyhow::Result<()> {
    match command {
        Command::Train(a) => train(a),
        Command::Test(a) => test(a),
        Command::Exp1(a) => exp1(a),
        Command::Exp2(a) => exp2(a),
        Command::PlotData(a) => plot_data(a),
    }
}

impl RunArgs {
    fn config(&self) -> anyhow::Result<ExperimentConfig> {
        let mut c = ExperimentConfig {
            seed: self.seed,
            ..ExperimentConfig::default()
        };
        if let Some(f) = self.forgetting {
            c.filter.forgetting_enabled = f == Switch::On;
        }
        if let Some(s) = self.stimulus_scale {
            c.filter.stimulus_scale = s;
        }
        if let Some(w) = self.smoothing {
            if w == 0 {
                bail!("--smoothing must be at least 1");
            }
            c.walk.smoothing_window = w;
        }
        if let Some(n) = self.noise {
            if !(n.is_finite() && n >= 0.0) {
                bail!("--noise must be a non-negative number");
            }
            c.walk.noise_amplitude = n;
        }
        c.walk.noise_seed = self.seed;
        c.filter.validate()?;
        Ok(c)
    }
}

/// Applies command-line overrides to a filter loaded from disk.
fn apply_overrides(filter: &mut NoveltyFilter, args: &RunArgs) -> anyhow::Result<()> {
    if let Some(f) = args.forgetting {
        filter.set_forgetting(f == Switch::On);
    }
    if let Some(s) = args.stimulus_scale {
        let mut cfg = *filter.config();
        cfg.stimulus_scale = s;
        let efficacies = filter.efficacies().to_vec();
        *filter = NoveltyFilter::from_parts(
            cfg,
            filter.grid().clone(),
            Some(efficacies),
            filter.learning_enabled(),
            filter.seed(),
        )?;
    }
    Ok(())
}

fn load_world(spec: &str) -> anyhow::Result<World> {
    resolve_world(spec).with_context(|| format!("cannot load world {spec:?}"))
}

struct Output<'a> {
    dir: &'a Path,
    command: &'a str,
    config: &'a ExperimentConfig,
    snapshots: Vec<String>,
}

impl<'a> Output<'a> {
    fn new(dir: &'a Path, command: &'a str, config: &'a ExperimentConfig) -> anyhow::Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
        Ok(Self {
            dir,
            command,
            config,
            snapshots: Vec::new(),
        })
    }

    fn snapshot(&mut self, filter: &NoveltyFilter, label: &str, file: &str) -> anyhow::Result<()> {
        persist::save_snapshot(filter, label, &self.dir.join(file))?;
        self.snapshots.push(file.to_string());
        Ok(())
    }

    fn finish(self, traces: &[TrialTrace]) -> anyhow::Result<()> {
        let trials = persist::write_traces(traces, self.dir, self.config.report_threshold)?;
        let manifest = RunManifest {
            command: self.command.to_string(),
            seed: self.config.seed,
            config_hash: persist::config_hash(self.config),
            config: serde_json::to_value(self.config)?,
            trials,
            snapshots: self.snapshots,
        };
        persist::write_manifest(&manifest, self.dir)?;
        print_summary(&manifest.trials);
        say(format_args!("wrote {}", self.dir.display()));
        Ok(())
    }
}

// Output goes through `say` so a closed pipe (`hsom exp1 | head`) is not fatal.
fn say(line: std::fmt::Arguments<'_>) {
    let _ = writeln!(std::io::stdout().lock(), "{line}");
}

fn print_summary(entries: &[ManifestEntry]) {
    for e in entries {
        say(format_args!(
            "{:<24} {:<8} {:<6} mean {:.4} max {:.4}",
            e.label,
            e.world,
            if e.learning { "learn" } else { "frozen" },
            e.mean_novelty,
            e.max_novelty
        ));
    }
}

fn train(args: TrainArgs) -> anyhow::Result<()> {
    if args.trials == 0 {
        bail!("--trials must be at least 1");
    }
    let config = args.run.config()?;
    let world = load_world(&args.world)?;
    let mut filter = match &args.weights {
        Some(path) => {
            let mut f = persist::load_snapshot(path)?;
            apply_overrides(&mut f, &args.run)?;
            f
        }
        None => NoveltyFilter::new(config.filter, config.seed)?,
    };
    let mut out = Output::new(&args.run.out, "train", &config)?;
    let mut traces = Vec::with_capacity(args.trials);
    for k in 1..=args.trials {
        let label = format!("{}-learn-{k}", world.name());
        traces.push(run_trial(
            &mut filter,
            &world,
            true,
            &config.walk_for(k - 1),
            &label,
        )?);
    }
    out.snapshot(
        &filter,
        &format!("trained in {}", world.name()),
        "filter.json",
    )?;
    out.finish(&traces)
}

fn test(args: TestArgs) -> anyhow::Result<()> {
    let config = args.run.config()?;
    let world = load_world(&args.world)?;
    let mut filter = persist::load_snapshot(&args.weights)?;
    apply_overrides(&mut filter, &args.run)?;
    let label = format!("{}-test", world.name());
    let trace = run_trial(&mut filter, &world, false, &config.walk_for(0), &label)?;
    Output::new(&args.run.out, "test", &config)?.finish(&[trace])
}

fn exp1(args: RunArgs) -> anyhow::Result<()> {
    let config = args.config()?;
    let result = harness::run_experiment_one(&config)?;
    let mut out = Output::new(&args.out, "exp1", &config)?;
    out.snapshot(&result.a_filter, "trained in A", "a_filter.json")?;
    if !result.quiesced(&config) {
        eprintln!(
            "warning: A training did not reach quiescence within {} trials",
            config.max_training_trials
        );
    }
    out.finish(&result.traces)
}

fn exp2(args: Exp2Args) -> anyhow::Result<()> {
    let mut config = args.run.config()?;
    if let Some(n) = args.trials {
        if n == 0 {
            bail!("--trials must be at least 1");
        }
        config.forgetting_trials = n;
    }
    let mut out = Output::new(&args.run.out, "exp2", &config)?;
    let a_filter = match &args.weights {
        Some(path) => {
            let mut f = persist::load_snapshot(path)?;
            apply_overrides(&mut f, &args.run)?;
            f
        }
        None => {
            let r = harness::run_experiment_one(&config)?;
            out.snapshot(&r.a_filter, "trained in A", "a_filter.json")?;
            r.a_filter
        }
    };
    let result = harness::run_experiment_two(&config, &a_filter)?;
    out.snapshot(
        &result.open_door.final_filter,
        "after A*/A forgetting run",
        "exp2a_filter.json",
    )?;
    out.snapshot(
        &result.corridor_b.final_filter,
        "after B/A forgetting run",
        "exp2b_filter.json",
    )?;
    let traces: Vec<TrialTrace> = result.traces().cloned().collect();
    out.finish(&traces)
}

#[derive(Serialize)]
struct PlotIndex {
    source: String,
    files: Vec<PlotFile>,
}

#[derive(Serialize)]
struct PlotFile {
    label: String,
    file: String,
    learning: bool,
}

fn plot_data(args: PlotArgs) -> anyhow::Result<()> {
    let manifest = persist::read_manifest(&args.input)?;
    fs::create_dir_all(&args.out)
        .with_context(|| format!("cannot create {}", args.out.display()))?;
    let mut files = Vec::with_capacity(manifest.trials.len());
    for entry in &manifest.trials {
        let trace = persist::read_trace(&args.input.join(&entry.file))?;
        let file = entry.file.replace(".csv", ".dat");
        let mut text = format!("# {}\n# arc_position novelty\n", entry.label);
        for r in &trace.records {
            text.push_str(&format!("{} {}\n", r.arc_position, r.novelty));
        }
        let path = args.out.join(&file);
        fs::write(&path, text).with_context(|| format!("cannot write {}", path.display()))?;
        files.push(PlotFile {
            label: entry.label.clone(),
            file,
            learning: entry.learning,
        });
    }
    let index = PlotIndex {
        source: args.input.display().to_string(),
        files,
    };
    let path = args.out.join("index.json");
    fs::write(&path, serde_json::to_string_pretty(&index)?)
        .with_context(|| format!("cannot write {}", path.display()))?;
    say(format_args!(
        "wrote {} plot files to {}",
        index.files.len(),
        args.out.display()
    ));
    Ok(())
}
