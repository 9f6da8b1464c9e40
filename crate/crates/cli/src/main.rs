//! `stairclimb` command line: terrain generation, two-stage training,
//! evaluation sweeps, transfer matrices, and critic heatmaps.
//!
//! Exit codes: 0 success, 2 usage/config error, 3 runtime failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};

use stairclimb_core::config::RunConfig;
use stairclimb_core::env::EnvParams;
use stairclimb_core::eval::{
    cross_matrix, critic_heatmap, eval_levels, write_eval_csv, write_heatmap, write_transfer_csv,
    TransferModel, YawMode,
};
use stairclimb_core::net::checkpoint::load_checkpoint;
use stairclimb_core::ppo::trainer::train;
use stairclimb_core::rewards::Stage;
use stairclimb_core::terrain::{
    difficulty_to_spec, export_heightfield, generate, DifficultyLevel, StairKind, TerrainMode,
    TerrainParams,
};

#[derive(Parser)]
#[command(
    name = "stairclimb",
    version,
    about = "Deterministic stair-climbing RL pipeline: terrains, training, evaluation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a stair heightfield and write CSV + 16-bit PGM + JSON manifest
    GenTerrain(GenTerrainArgs),
    /// Train a policy from a JSON config (optionally warm-started)
    Train(TrainArgs),
    /// Success-rate sweep over difficulty levels
    Eval(EvalArgs),
    /// Cross-terrain transfer matrix over checkpointed models
    Transfer(TransferArgs),
    /// Critic-value heatmap over a terrain's x-y plane
    Heatmap(HeatmapArgs),
}

#[derive(Args)]
struct GenTerrainArgs {
    /// pyramid | straight | l_shaped | u_shaped | spiral
    #[arg(long)]
    kind: String,
    #[arg(long)]
    level: u32,
    /// train | test
    #[arg(long, default_value = "train")]
    mode: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct TrainArgs {
    /// JSON run config
    #[arg(long)]
    config: PathBuf,
    /// stage1 | stage2 (overrides the config)
    #[arg(long)]
    stage: Option<String>,
    /// Checkpoint stem or manifest to warm-start from
    #[arg(long)]
    warm_start: Option<PathBuf>,
    /// Seed override (also available via STAIRCLIMB_SEED)
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory override
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; results are identical for any value
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    checkpoint: PathBuf,
    #[arg(long)]
    terrain: String,
    /// Levels as `1..6` (inclusive) or `3,4`
    #[arg(long, default_value = "1..6")]
    levels: String,
    #[arg(long, default_value = "test")]
    mode: String,
    #[arg(long, default_value_t = 300)]
    episodes: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Also dump per-episode trajectory CSVs
    #[arg(long, default_value_t = false)]
    dump_trajectories: bool,
}

#[derive(Args)]
struct TransferArgs {
    /// Comma-separated checkpoint stems/manifests
    #[arg(long)]
    models: String,
    /// Comma-separated terrain kinds
    #[arg(long)]
    terrains: String,
    #[arg(long, default_value_t = 300)]
    episodes: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct HeatmapArgs {
    #[arg(long)]
    checkpoint: PathBuf,
    #[arg(long)]
    terrain: String,
    #[arg(long, default_value_t = 3)]
    level: u32,
    #[arg(long, default_value = "test")]
    mode: String,
    /// Lattice spacing in meters
    #[arg(long, default_value_t = 0.1)]
    spacing: f64,
    /// face_goal | fixed:<radians>
    #[arg(long, default_value = "face_goal")]
    yaw_mode: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

/// Separates config/usage problems (exit 2) from runtime failures (exit 3).
enum CliError {
    Usage(String),
    Runtime(anyhow::Error),
}

impl From<stairclimb_core::Error> for CliError {
    fn from(e: stairclimb_core::Error) -> Self {
        use stairclimb_core::Error as E;
        match &e {
            E::Config(_) | E::Terrain(_) => CliError::Usage(e.to_string()),
            _ => CliError::Runtime(e.into()),
        }
    }
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::Runtime(e)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Runtime(err)) => {
            eprintln!("error: {err:#}");
            ExitCode::from(3)
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::GenTerrain(a) => gen_terrain(a),
        Command::Train(a) => cmd_train(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Transfer(a) => cmd_transfer(a),
        Command::Heatmap(a) => cmd_heatmap(a),
    }
}

fn parse_kind(s: &str) -> Result<StairKind, CliError> {
    StairKind::parse(s).map_err(|e| CliError::Usage(e.to_string()))
}

fn parse_mode(s: &str) -> Result<TerrainMode, CliError> {
    match s {
        "train" => Ok(TerrainMode::Train),
        "test" => Ok(TerrainMode::Test),
        other => Err(CliError::Usage(format!("unknown mode `{other}` (train|test)"))),
    }
}

fn parse_levels(s: &str) -> Result<Vec<u32>, CliError> {
    let parse_one = |v: &str| {
        v.trim()
            .parse::<u32>()
            .map_err(|_| CliError::Usage(format!("bad level `{v}` in `{s}`")))
    };
    if let Some((lo, hi)) = s.split_once("..") {
        let lo = parse_one(lo)?;
        let hi = parse_one(hi)?;
        if lo > hi {
            return Err(CliError::Usage(format!("empty level range `{s}`")));
        }
        Ok((lo..=hi).collect())
    } else {
        s.split(',').map(parse_one).collect()
    }
}

fn gen_terrain(a: GenTerrainArgs) -> Result<(), CliError> {
    let kind = parse_kind(&a.kind)?;
    let mode = parse_mode(&a.mode)?;
    let params = TerrainParams::default();
    let level = DifficultyLevel::new(a.level, mode)?;
    let spec = difficulty_to_spec(kind, level, mode, &params)?;
    let hf = generate(&spec, a.seed, &params)?;
    let stem = format!("{}_{}_l{}", kind.as_str(), mode.as_str(), a.level);
    let files = export_heightfield(&hf, &a.out, &stem)?;
    for f in files {
        println!("{}", f.display());
    }
    Ok(())
}

fn cmd_train(a: TrainArgs) -> Result<(), CliError> {
    let mut cfg = RunConfig::load(&a.config)?;
    if let Some(stage) = &a.stage {
        cfg.stage = match stage.as_str() {
            "stage1" => Stage::Stage1,
            "stage2" => Stage::Stage2,
            other => return Err(CliError::Usage(format!("unknown stage `{other}`"))),
        };
        cfg.resolve();
    }
    if let Some(seed) = a.seed {
        // CLI seed takes precedence over both the config and the env var.
        cfg.seed = seed;
    } else {
        cfg.apply_seed_env()?;
    }
    if let Some(out) = &a.out {
        cfg.out_dir = out.to_string_lossy().into_owned();
    }
    cfg.validate()?;
    let outcome = train(&cfg, a.warm_start.as_deref(), a.workers)?;
    println!(
        "trained {} iterations; success-rate window {:.1}%; checkpoint {}",
        outcome.iterations_run,
        100.0 * outcome.success_window_rate,
        outcome.final_checkpoint_stem.display()
    );
    println!("metrics: {}", outcome.metrics_path.display());
    Ok(())
}

fn load_model(path: &Path) -> Result<TransferModel, CliError> {
    let (params, meta) = load_checkpoint(path)
        .map_err(|e| CliError::Runtime(anyhow::anyhow!("checkpoint {}: {e}", path.display())))?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string());
    Ok(TransferModel { name, params, trained_kind: meta.terrain_kind })
}

fn cmd_eval(a: EvalArgs) -> Result<(), CliError> {
    let kind = parse_kind(&a.terrain)?;
    let mode = parse_mode(&a.mode)?;
    let levels = parse_levels(&a.levels)?;
    for l in &levels {
        DifficultyLevel::new(*l, mode)?;
    }
    let model = load_model(&a.checkpoint)?;
    let dump = a.dump_trajectories.then(|| a.out.join("trajectories"));
    let reports = eval_levels(
        &model.params,
        kind,
        &levels,
        mode,
        a.episodes,
        a.seed,
        &EnvParams::default(),
        &TerrainParams::default(),
        dump.as_deref(),
    )?;
    let csv = a.out.join(format!("eval_{}_{}.csv", kind.as_str(), mode.as_str()));
    write_eval_csv(&reports, &csv)?;
    for r in &reports {
        println!("{} level {}: {:.2}% ({}/{})", r.terrain, r.level, r.success_rate, r.successes, r.episodes);
    }
    println!("wrote {}", csv.display());
    Ok(())
}

fn cmd_transfer(a: TransferArgs) -> Result<(), CliError> {
    let mut models = Vec::new();
    for p in a.models.split(',') {
        models.push(load_model(Path::new(p.trim()))?);
    }
    let mut terrains = Vec::new();
    for t in a.terrains.split(',') {
        terrains.push(parse_kind(t.trim())?);
    }
    if models.is_empty() || terrains.is_empty() {
        return Err(CliError::Usage("need at least one model and one terrain".into()));
    }
    let rows = cross_matrix(
        &models,
        &terrains,
        a.episodes,
        a.seed,
        &EnvParams::default(),
        &TerrainParams::default(),
    )?;
    let path = write_transfer_csv(&rows, &a.out.join("transfer_matrix.csv"))?;
    for r in &rows {
        let t = r.transferability.map(|v| format!("{v:.1}%")).unwrap_or_else(|| "N/A".into());
        println!(
            "{} on {}: L3 {:.1}% L4 {:.1}% total {:.1}% transfer {}",
            r.model, r.terrain, r.s_level3, r.s_level4, r.total, t
        );
    }
    println!("wrote {}", path.display());
    Ok(())
}

fn cmd_heatmap(a: HeatmapArgs) -> Result<(), CliError> {
    let kind = parse_kind(&a.terrain)?;
    let mode = parse_mode(&a.mode)?;
    let yaw_mode = if a.yaw_mode == "face_goal" {
        YawMode::FaceGoal
    } else if let Some(v) = a.yaw_mode.strip_prefix("fixed:") {
        let rad = v
            .parse::<f64>()
            .map_err(|_| CliError::Usage(format!("bad yaw_mode `{}`", a.yaw_mode)))?;
        YawMode::Fixed(rad)
    } else {
        return Err(CliError::Usage(format!(
            "unknown yaw_mode `{}` (face_goal | fixed:<radians>)",
            a.yaw_mode
        )));
    };
    if a.spacing <= 0.0 {
        return Err(CliError::Usage("spacing must be positive".into()));
    }
    let model = load_model(&a.checkpoint)?;
    let params = TerrainParams::default();
    let level = DifficultyLevel::new(a.level, mode)?;
    let spec = difficulty_to_spec(kind, level, mode, &params)?;
    let hf = generate(&spec, a.seed, &params)?;
    let grid = critic_heatmap(&model.params, &hf, a.spacing, yaw_mode, &EnvParams::default())?;
    let files = write_heatmap(&grid, &a.out, &format!("heatmap_{}", kind.as_str()))
        .context("writing heatmap")?;
    for f in files {
        println!("{}", f.display());
    }
    Ok(())
}
