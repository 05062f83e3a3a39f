use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::info;

use rollcast::features::FeatureMode;
use rollcast::harness::sweep::{load_artists, unit_seed, write_json};
use rollcast::harness::{emit_figures, load_sweep, run_compare, run_sweep, ExperimentConfig, ModelKind, StepRange};
use rollcast::ingest::load_dataset;
use rollcast::neural::persist::save_model;
use rollcast::neural::{train, NetworkSpec, TrainConfig};
use rollcast::synth::{emit_dataset, EmitOptions};
use rollcast::{Error, Result};

#[derive(Parser)]
#[command(name = "rollcast", version, about = "Per-artist play-count forecasting experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset.
    Synth {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 50)]
        artists: usize,
        #[arg(long, default_value_t = 183)]
        days: usize,
        /// Artist indices that get no actions (comma separated).
        #[arg(long, value_delimiter = ',')]
        silent: Vec<usize>,
    },
    /// Validate the CSV files and cache daily aggregates.
    Ingest {
        #[command(flatten)]
        common: Common,
    },
    /// Train one model for one artist and save it.
    Train {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        artist: String,
        /// Time step; defaults to the low end of --p-range.
        #[arg(long)]
        p: Option<usize>,
    },
    /// Sweep time step and rolling step for one neural model.
    Sweep {
        #[command(flatten)]
        common: Common,
    },
    /// Compare the best rolling LSTM against the baselines.
    Compare {
        #[command(flatten)]
        common: Common,
    },
    /// Write figure tables for every sweep in the output directory.
    Figures {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Common {
    /// JSON experiment config; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    data_dir: Option<PathBuf>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    features: Option<FeatureMode>,
    #[arg(long)]
    model: Option<ModelKind>,
    #[arg(long)]
    p_range: Option<StepRange>,
    #[arg(long)]
    l_range: Option<StepRange>,
    #[arg(long)]
    q: Option<usize>,
    #[arg(long)]
    horizon: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Use echo units instead of trained networks.
    #[arg(long)]
    test_mode: bool,
}

impl Common {
    fn config(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::from_file(path)?,
            None => ExperimentConfig::default(),
        };
        let s = &mut cfg.settings;
        if let Some(v) = &self.data_dir {
            cfg.data_dir = v.clone();
        }
        if let Some(v) = &self.out_dir {
            cfg.out_dir = v.clone();
        }
        if let Some(v) = self.model {
            cfg.model = v;
        }
        if let Some(v) = self.features {
            s.features = v;
        }
        if let Some(v) = self.p_range {
            s.p_range = v;
        }
        if self.l_range.is_some() {
            s.l_range = self.l_range;
        }
        if self.q.is_some() {
            s.q = self.q;
        }
        if let Some(v) = self.horizon {
            s.horizon = v;
        }
        if let Some(v) = self.seed {
            s.seed = v;
        }
        s.test_mode |= self.test_mode;
        Ok(cfg)
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Synth {
            common,
            artists,
            days,
            silent,
        } => {
            let cfg = common.config()?;
            let opts = EmitOptions {
                start_date: cfg.settings.start_date,
                silent_artists: silent,
                ..EmitOptions::default()
            };
            emit_dataset(artists, days, cfg.settings.seed, &cfg.data_dir, &opts)?;
            println!("wrote {artists} artists x {days} days to {}", cfg.data_dir.display());
        }
        Command::Ingest { common } => {
            let cfg = common.config()?;
            let outcome = load_dataset(&cfg.data_dir, cfg.settings.date_range()?, cfg.settings.min_total_plays)?;
            for (id, total) in &outcome.dropped {
                println!("dropped {id} ({total} plays)");
            }
            let path = cfg.out_dir.join("aggregates.json");
            write_json(&path, &outcome)?;
            println!("{} artists kept, aggregates in {}", outcome.kept.len(), path.display());
        }
        Command::Train { common, artist, p } => {
            let cfg = common.config()?;
            cfg.validate()?;
            let s = &cfg.settings;
            let kind = cfg
                .model
                .recurrent()
                .ok_or_else(|| Error::InvalidArgument(format!("train expects a neural model, got {}", cfg.model)))?;
            let p = p.unwrap_or(s.p_range.min);
            let q = s.q_for(p);
            let (artists, _) = load_artists(&cfg)?;
            let data = artists
                .iter()
                .find(|a| a.artist_id == artist)
                .ok_or_else(|| Error::InvalidArgument(format!("unknown artist {artist}")))?;
            let (train_set, dev_set) = data.windows(s, p, q)?;
            let tc = TrainConfig {
                seed: unit_seed(s.seed, &artist, cfg.model, p, q),
                ..s.train.clone()
            };
            let model = train(NetworkSpec::for_mode(s.features, kind, p, q), &train_set, &dev_set, &tc)?;
            let name = format!("{artist}_{}_p{p}_q{q}", cfg.model);
            save_model(&model, &cfg.out_dir.join("models"), &name)?;
            let r = &model.report;
            println!(
                "{name}: best epoch {} of {}, train mse {:.6} -> {:.6}, dev mse {:.6}",
                r.best_epoch,
                r.epochs_run,
                r.train_mse[0],
                r.train_mse[r.best_epoch],
                r.dev_mse[r.best_epoch]
            );
        }
        Command::Sweep { common } => {
            let cfg = common.config()?;
            let result = run_sweep(&cfg)?;
            match (result.best, result.best_baseline) {
                (Some(b), Some(base)) => println!(
                    "best cell p={} l={} F={:.4}; best baseline p={} F={:.4}",
                    b.p, b.l, b.f_score, base.p, base.f_score
                ),
                _ => println!("sweep finished with failed cells; see sweep_{}.json", cfg.model),
            }
        }
        Command::Compare { common } => {
            let cfg = common.config()?;
            let report = run_compare(&cfg)?;
            print!("{}", report.to_csv());
        }
        Command::Figures { common } => {
            let cfg = common.config()?;
            let mut found = 0;
            for model in [ModelKind::Lstm, ModelKind::Bilstm, ModelKind::Gru, ModelKind::Rnn] {
                match load_sweep(&cfg.out_dir, model) {
                    Ok(result) => {
                        let path = emit_figures(&result, &cfg.out_dir.join("figures"))?;
                        info!("wrote {}", path.display());
                        println!("{}", path.display());
                        found += 1;
                    }
                    Err(Error::MissingArtifact(_)) => {}
                    Err(e) => return Err(e),
                }
            }
            if found == 0 {
                return Err(Error::MissingArtifact(cfg.out_dir.join("sweep_<model>.json")));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
