//! `rdesn` command line: simulate, train, predict, evaluate, report.
//!
//! Exit codes: 0 on success, 2 for configuration or usage errors, 3 when the
//! numerics fail (blow-up, singular solve, non-finite values).

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rdesn::pipeline::{self, RunConfig, RunLayout};
use rdesn::{Error, ModelVersion};

#[derive(Parser, Debug)]
#[command(
    name = "rdesn",
    about = "Reaction-diffusion simulator with an echo state network surrogate"
)]
#[command(disable_version_flag = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Integrate the model and write every step under OUT/truth.
    Simulate(Common),
    /// Fit the readout on the training slot of OUT/truth.
    Train(Common),
    /// Roll the trained surrogate out from the end of the training slot.
    Predict(Common),
    /// Score OUT/pred against OUT/truth and write OUT/eval.
    Evaluate(Common),
    /// simulate + train + predict + evaluate.
    Report(Common),
}

#[derive(Args, Debug)]
struct Common {
    /// Model preset (parameter set and ESN settings).
    #[arg(long = "version", value_parser = clap::value_parser!(u32).range(1..=3), default_value_t = 1)]
    version: u32,
    /// Flat TOML file overriding preset values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Run directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Seed for the initial condition.
    #[arg(long)]
    seed: Option<u64>,
    /// Seed for the reservoir matrices.
    #[arg(long)]
    esn_seed: Option<u64>,
    /// Simulated steps for `simulate`; rollout length for the other commands.
    #[arg(long)]
    steps: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Also write PNG renderings of the exported planes.
    #[arg(long)]
    render: bool,
}

fn build_config(c: &Common, simulate: bool) -> Result<RunConfig, Error> {
    let version = ModelVersion::from_number(c.version)
        .ok_or_else(|| Error::Config(format!("unknown model version {}", c.version)))?;
    let mut cfg = RunConfig::preset(version);
    if let Some(path) = &c.config {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        cfg.apply_overrides(&text, path.parent())?;
    }
    if let Some(s) = c.seed {
        cfg.seed = s;
    }
    if let Some(s) = c.esn_seed {
        cfg.esn.seed = s;
    }
    if let Some(n) = c.steps {
        if simulate {
            cfg.sim_steps = n;
        } else {
            cfg.rollout_steps = n;
            cfg.sim_steps = cfg.sim_steps.max(cfg.training_slot.1 + n);
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<(), Error> {
    let (common, simulate) = match &cli.command {
        Command::Simulate(c) => (c, true),
        Command::Train(c) | Command::Predict(c) | Command::Evaluate(c) | Command::Report(c) => {
            (c, false)
        }
    };
    if let Some(n) = common.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    }
    let cfg = build_config(common, simulate)?;
    let layout = RunLayout::new(&common.out);
    let t0 = Instant::now();
    match &cli.command {
        Command::Simulate(_) => {
            let m = pipeline::cmd_simulate(&cfg, &layout)?;
            println!(
                "simulated {} steps, {} snapshots per field in {}",
                cfg.sim_steps,
                m.recorded_steps.len(),
                layout.truth().display()
            );
        }
        Command::Train(_) => {
            let fit = pipeline::cmd_train(&cfg, &layout)?;
            println!(
                "trained on {} samples, fit NRMSE {:.3e}; model in {}",
                fit.samples,
                fit.nrmse,
                layout.model().display()
            );
        }
        Command::Predict(_) => {
            if cfg.rollout_steps == 0 {
                eprintln!("warning: rollout length is 0, writing an empty prediction");
            }
            let m = pipeline::cmd_predict(&cfg, &layout)?;
            println!(
                "predicted {} steps into {}",
                m.recorded_steps.len(),
                layout.pred().display()
            );
        }
        Command::Evaluate(_) => {
            let ev = pipeline::cmd_evaluate(&cfg, &layout, common.render)?;
            print!("{}", ev.report.to_table());
            for (block, lambda) in &ev.lyapunov {
                println!("lyapunov[{block:?}] = {lambda:.4e}");
            }
        }
        Command::Report(_) => {
            let s = pipeline::cmd_report(&cfg, &layout, common.render)?;
            println!(
                "fit NRMSE {:.3e} over {} samples",
                s.fit.nrmse, s.fit.samples
            );
            print!("{}", s.evaluation.report.to_table());
            for (block, lambda) in &s.evaluation.lyapunov {
                println!("lyapunov[{block:?}] = {lambda:.4e}");
            }
        }
    }
    eprintln!("done in {:.1}s", t0.elapsed().as_secs_f64());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_numeric() {
                ExitCode::from(3)
            } else {
                ExitCode::from(2)
            }
        }
    }
}
