use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use digit_reward::classifier::{AblationMode, Classifier};
use digit_reward::config::LoadedConfig;
use digit_reward::eval::summary_table;
use digit_reward::imagery::load_pgm;
use digit_reward::model::Model;
use digit_reward::pipeline;

#[derive(Parser)]
#[command(name = "digits", version, about = "SSIM exemplar selection with fuzzy reward weighting for digit recognition")]
struct Cli {
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArgs {
    /// Run configuration (JSON). Relative paths inside it resolve against
    /// its directory.
    #[arg(long)]
    config: PathBuf,

    /// Overrides the seed in the config file.
    #[arg(long)]
    seed: Option<u64>,
}

impl ConfigArgs {
    fn load(&self) -> Result<LoadedConfig> {
        let mut cfg = LoadedConfig::load(&self.config)?;
        if let Some(seed) = self.seed {
            cfg.config.seed = seed;
        }
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Select exemplars and write <output_dir>/model.json.
    Train {
        #[command(flatten)]
        config: ConfigArgs,
        /// Model path (default: <output_dir>/model.json).
        #[arg(long)]
        model: Option<PathBuf>,
    },
    /// Classify one PGM image; exit code 2 flags an uncertain result.
    Classify {
        #[arg(long)]
        model: PathBuf,
        image: PathBuf,
        /// Ablation mode used for weighting.
        #[arg(long, default_value = "full")]
        mode: String,
        /// Overrides the model's margin threshold.
        #[arg(long)]
        margin_threshold: Option<f64>,
    },
    /// Run the ablation modes on the held-out split and write reports.
    Evaluate {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long)]
        model: Option<PathBuf>,
        /// Comma-separated modes, or `all`.
        #[arg(long, default_value = "all")]
        modes: String,
        /// Report directory (default: <output_dir>).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the accuracy table of a previous evaluation.
    Report {
        /// reports.json written by `evaluate`.
        #[arg(long)]
        reports: PathBuf,
        /// Also print each confusion matrix.
        #[arg(long)]
        confusion: bool,
    },
}

fn parse_modes(text: &str) -> Result<Vec<AblationMode>> {
    if text.trim().eq_ignore_ascii_case("all") {
        return Ok(AblationMode::ALL.to_vec());
    }
    let mut modes = Vec::new();
    for part in text.split(',').filter(|p| !p.trim().is_empty()) {
        match AblationMode::parse(part) {
            Some(m) if !modes.contains(&m) => modes.push(m),
            Some(_) => {}
            None => bail!("unknown mode {part:?} (expected ssim_only, fuzzy_only, rl_only, full or all)"),
        }
    }
    if modes.is_empty() {
        bail!("no modes given");
    }
    Ok(modes)
}

fn model_path(cfg: &LoadedConfig, explicit: &Option<PathBuf>) -> PathBuf {
    explicit
        .clone()
        .unwrap_or_else(|| cfg.output_dir().join("model.json"))
}

fn train(config: &ConfigArgs, model: &Option<PathBuf>) -> Result<()> {
    let cfg = config.load()?;
    let trained = pipeline::train(&cfg)?;
    let path = model_path(&cfg, model);
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    trained.model.save(&path)?;
    let rounds = cfg.config.selection.rounds;
    print!("digit");
    for r in 1..=rounds {
        print!("  round{r}");
    }
    println!("  total");
    for pool in &trained.model.pools {
        let counts = pool.round_counts(rounds);
        print!("{:>5}", pool.digit);
        for c in &counts {
            print!("  {c:>6}");
        }
        println!("  {:>5}", pool.selected.len());
    }
    println!("wrote {}", path.display());
    Ok(())
}

fn classify(model: &Path, image: &Path, mode: &str, margin: Option<f64>) -> Result<bool> {
    let model = Model::load(model)?;
    let image = load_pgm(image)?;
    let mode = AblationMode::parse(mode).with_context(|| format!("unknown mode {mode:?}"))?;
    let mut settings = model.config.classifier_settings();
    if let Some(m) = margin {
        settings.margin_threshold = m;
    }
    let result = Classifier::new(&model.pools, &model.tables, mode, settings)?.classify(&image)?;
    println!("{}", serde_json::to_string(&result)?);
    Ok(result.uncertain)
}

fn evaluate(config: &ConfigArgs, model: &Option<PathBuf>, modes: &str, out: &Option<PathBuf>) -> Result<()> {
    let cfg = config.load()?;
    let modes = parse_modes(modes)?;
    let model = Model::load(model_path(&cfg, model))?;
    let reports = pipeline::evaluate(&cfg, &model, &modes)?;
    let dir = out.clone().unwrap_or_else(|| cfg.output_dir());
    let written = pipeline::write_reports(&dir, &reports)?;
    print!("{}", summary_table(&reports));
    for r in &reports {
        eprintln!("{}: {:.2}s", r.mode, r.wall_time);
    }
    for path in written {
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn report(path: &Path, confusion: bool) -> Result<()> {
    let reports = pipeline::read_reports(path)?;
    print!("{}", summary_table(&reports));
    if confusion {
        for r in &reports {
            println!("\n{}", r.mode);
            print!("{}", r.confusion_csv());
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode> {
    if let Some(n) = cli.threads {
        if n == 0 {
            bail!("--threads must be at least 1");
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring worker threads")?;
    }
    match &cli.command {
        Command::Train { config, model } => train(config, model)?,
        Command::Classify {
            model,
            image,
            mode,
            margin_threshold,
        } => {
            if classify(model, image, mode, *margin_threshold)? {
                return Ok(ExitCode::from(2));
            }
        }
        Command::Evaluate {
            config,
            model,
            modes,
            out,
        } => evaluate(config, model, modes, out)?,
        Command::Report { reports, confusion } => report(reports, *confusion)?,
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    // exit code 2 is reserved for uncertain classifications
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
