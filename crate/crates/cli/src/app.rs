//! Argument parsing and dispatch. Every flag has a config-file twin; flags
//! override file values field by field.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::commands;
use crate::config::RunConfig;
use crate::error::AppError;

#[derive(Debug, Parser)]
#[command(
    name = "sispread",
    version,
    about = "SI spreading on temporal communication networks: generators, \
             sweeps, call-log ingestion and statistics"
)]
pub struct Cli {
    /// JSON config file; command-line flags override its fields
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// worker threads for parallel sweeps (default: available parallelism)
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a topology model as an edge-list file plus a JSON sidecar
    Generate(GenerateArgs),
    /// Dilution sweep: tau_w / tau versus p for one or more models
    Sweep(SweepArgs),
    /// Build the city networks from a call log and report on them
    City(CityArgs),
    /// Inter-event-time statistics of a call log
    Stats(StatsArgs),
    /// Generate a synthetic call log
    Synth(SynthArgs),
}

#[derive(Debug, Args, Default)]
pub struct GenerateArgs {
    /// lattice, er, ba or kumpula
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long)]
    pub n: Option<usize>,
    /// lattice side length (lattice only; overrides --n)
    #[arg(long)]
    pub side: Option<usize>,
    /// target average degree (er; also sets ba's m = avg-k/2)
    #[arg(long = "avg-k")]
    pub avg_k: Option<f64>,
    /// links per new node (ba only)
    #[arg(long)]
    pub m: Option<usize>,
    /// sweep budget (kumpula only)
    #[arg(long)]
    pub sweeps: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Default)]
pub struct SweepArgs {
    /// comma list of models, e.g. lattice,er,ba,kumpula
    #[arg(long)]
    pub models: Option<String>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long = "avg-k")]
    pub avg_k: Option<f64>,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub sweeps: Option<usize>,
    /// comma list: pow:t_min:alpha, exp:t_min:lambda or match-exp
    #[arg(long)]
    pub dist: Option<String>,
    /// dilution grid, start:stop:step or a comma list
    #[arg(long = "p-grid")]
    pub p_grid: Option<String>,
    /// spreading runs per cell
    #[arg(long = "M")]
    pub runs: Option<usize>,
    /// bridges per white node
    #[arg(long = "bridges-ratio")]
    pub bridges_ratio: Option<f64>,
    /// skip bridge construction; the tau column stays empty
    #[arg(long = "no-bridges")]
    pub no_bridges: bool,
    /// flag rows whose largest component falls below this fraction
    #[arg(long = "p-inf-cutoff")]
    pub p_inf_cutoff: Option<f64>,
    /// link-delay (first-passage) or renewal (needs --horizon)
    #[arg(long)]
    pub mode: Option<String>,
    #[arg(long)]
    pub horizon: Option<f64>,
    /// pin the full reference protocol (ignores dist/p-grid/M/ratio/cutoff)
    #[arg(long = "protocol-defaults")]
    pub protocol_defaults: bool,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Default)]
pub struct CityArgs {
    /// call-detail-record file
    #[arg(long, value_name = "FILE")]
    pub cdr: Option<PathBuf>,
    /// file with one city ZIP code per line
    #[arg(long, value_name = "FILE")]
    pub zips: Option<PathBuf>,
    /// iterate external pruning to a fixed point instead of one pass
    #[arg(long = "prune-fixpoint")]
    pub prune_fixpoint: bool,
    /// also replay spreading on G_w and G and emit curves and taus
    #[arg(long)]
    pub spread: bool,
    /// spreading runs (with --spread)
    #[arg(long = "M")]
    pub runs: Option<usize>,
    /// keep tail abscissae in raw units instead of dividing by the mean
    #[arg(long = "no-rescale")]
    pub no_rescale: bool,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long = "out-dir", value_name = "DIR")]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Args, Default)]
pub struct StatsArgs {
    #[arg(long, value_name = "FILE")]
    pub cdr: Option<PathBuf>,
    /// per-link (pooled per node pair) or global
    #[arg(long)]
    pub pooling: Option<String>,
    /// keep tail abscissae in raw units instead of dividing by the mean
    #[arg(long = "no-rescale")]
    pub no_rescale: bool,
    #[arg(long = "out-dir", value_name = "DIR")]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Args, Default)]
pub struct SynthArgs {
    #[arg(long = "n-white")]
    pub n_white: Option<usize>,
    #[arg(long = "n-external")]
    pub n_external: Option<usize>,
    /// inter-event-time law of the generated calls
    #[arg(long)]
    pub dist: Option<String>,
    /// log length in days
    #[arg(long)]
    pub horizon: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

fn set_true(flag: bool) -> Option<bool> {
    // absent flags leave the config-file value in force
    flag.then_some(true)
}

impl Cli {
    fn flag_config(&self) -> RunConfig {
        let mut cfg = RunConfig { workers: self.workers, ..Default::default() };
        match &self.command {
            Command::Generate(a) => {
                cfg.model = a.model.clone();
                cfg.n = a.n;
                cfg.side = a.side;
                cfg.avg_k = a.avg_k;
                cfg.m = a.m;
                cfg.sweeps = a.sweeps;
                cfg.seed = a.seed;
                cfg.out = a.out.clone();
            }
            Command::Sweep(a) => {
                cfg.models = a.models.clone();
                cfg.n = a.n;
                cfg.avg_k = a.avg_k;
                cfg.m = a.m;
                cfg.sweeps = a.sweeps;
                cfg.dist = a.dist.clone();
                cfg.p_grid = a.p_grid.clone();
                cfg.runs = a.runs;
                cfg.bridges_ratio = a.bridges_ratio;
                cfg.no_bridges = set_true(a.no_bridges);
                cfg.p_inf_cutoff = a.p_inf_cutoff;
                cfg.mode = a.mode.clone();
                cfg.horizon = a.horizon;
                cfg.protocol_defaults = set_true(a.protocol_defaults);
                cfg.seed = a.seed;
                cfg.out = a.out.clone();
            }
            Command::City(a) => {
                cfg.cdr = a.cdr.clone();
                cfg.zips = a.zips.clone();
                cfg.prune_fixpoint = set_true(a.prune_fixpoint);
                cfg.spread = set_true(a.spread);
                cfg.runs = a.runs;
                cfg.rescale = a.no_rescale.then_some(false);
                cfg.seed = a.seed;
                cfg.out_dir = a.out_dir.clone();
            }
            Command::Stats(a) => {
                cfg.cdr = a.cdr.clone();
                cfg.pooling = a.pooling.clone();
                cfg.rescale = a.no_rescale.then_some(false);
                cfg.out_dir = a.out_dir.clone();
            }
            Command::Synth(a) => {
                cfg.n_white = a.n_white;
                cfg.n_external = a.n_external;
                cfg.dist = a.dist.clone();
                cfg.horizon = a.horizon;
                cfg.seed = a.seed;
                cfg.out = a.out.clone();
            }
        }
        cfg
    }

    pub fn run(&self) -> Result<(), AppError> {
        let file_cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        let cfg = file_cfg.overlaid(self.flag_config());
        if let Some(workers) = cfg.workers {
            if workers == 0 {
                return Err(AppError::Usage("--workers must be at least 1".into()));
            }
            // ignore the error if a global pool already exists (tests)
            let _ = rayon::ThreadPoolBuilder::new().num_threads(workers).build_global();
        }
        match &self.command {
            Command::Generate(_) => commands::cmd_generate(&cfg),
            Command::Sweep(_) => commands::cmd_sweep(&cfg),
            Command::City(_) => commands::cmd_city(&cfg),
            Command::Stats(_) => commands::cmd_stats(&cfg),
            Command::Synth(_) => commands::cmd_synth(&cfg),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_defaults() {
        let cli = Cli::parse_from([
            "sispread", "generate", "--model", "er", "--n", "100", "--avg-k", "6", "--seed",
            "1", "--out", "/tmp/x",
        ]);
        let cfg = cli.flag_config();
        assert_eq!(cfg.model.as_deref(), Some("er"));
        assert_eq!(cfg.n, Some(100));
        assert_eq!(cfg.seed, Some(1));
    }

    #[test]
    fn absent_bool_flags_stay_unset() {
        let cli = Cli::parse_from(["sispread", "sweep", "--seed", "1", "--out", "/tmp/x"]);
        let cfg = cli.flag_config();
        assert_eq!(cfg.no_bridges, None);
        assert_eq!(cfg.protocol_defaults, None);
        let cli = Cli::parse_from([
            "sispread", "sweep", "--no-bridges", "--seed", "1", "--out", "/tmp/x",
        ]);
        assert_eq!(cli.flag_config().no_bridges, Some(true));
    }
}
