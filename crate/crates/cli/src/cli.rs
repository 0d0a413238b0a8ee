// Copyright 2026 The divsample Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! Command-line front end.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use divsample_core::diversity::{for_each_closed_diverse, DiversityConfig};
use divsample_core::engine::Control;
use divsample_core::preference::{AggregationConfig, AggregationKind, FeatureSets};
use divsample_core::session::{
    draw_seed, for_each_frequent, mine_reference_set, Measure, SessionConfig, SessionError,
};
use divsample_core::xor::cdflexics_draw;
use divsample_core::{Itemset, Pattern, TransactionDatabase};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::experiment::{run_experiment, write_csv, Variant};
use crate::io::{load_database, resolve_dataset, Theta, DATA_DIR_ENV};

#[derive(Debug, Parser)]
#[command(
    name = "divsample",
    version,
    about = "Diverse pattern sampling and interactive pattern mining"
)]
pub struct Cli {
    /// Directory searched for dataset names that are not paths.
    #[arg(long, global = true, env = DATA_DIR_ENV)]
    pub dataset_dir: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// List frequent, closed, or closed diverse itemsets.
    Mine(MineArgs),
    /// Draw patterns from random XOR cells.
    Sample(SampleArgs),
    /// Run simulated-user sessions and write per-iteration regret as CSV.
    Simulate(SimulateArgs),
    /// Serve the interactive session API over HTTP.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
pub struct MineArgs {
    pub dataset: PathBuf,
    /// Absolute support (integer) or fraction of transactions in (0, 1).
    #[arg(long)]
    pub theta: Theta,
    /// Keep only patterns whose bound against earlier ones is at most this.
    #[arg(long)]
    pub jmax: Option<f64>,
    /// Closed itemsets only.
    #[arg(long)]
    pub closed: bool,
    #[arg(long)]
    pub limit: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    pub dataset: PathBuf,
    #[arg(long)]
    pub theta: Theta,
    #[arg(long, default_value_t = 1.0)]
    pub jmax: f64,
    #[arg(long, default_value_t = 10)]
    pub n: usize,
    #[arg(long, default_value_t = 0.9)]
    pub kappa: f64,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum AggArg {
    Linear,
    #[value(alias = "exp")]
    Exponential,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum MeasureArg {
    Freq,
    Surp,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    pub dataset: PathBuf,
    #[arg(long)]
    pub theta: Theta,
    #[arg(long, default_value_t = 0.05)]
    pub jmax: f64,
    #[arg(long, default_value_t = 10)]
    pub k: usize,
    #[arg(long, default_value_t = 1)]
    pub ell: usize,
    #[arg(long, default_value_t = 0.13)]
    pub eta: f64,
    #[arg(long, value_enum, default_value_t = AggArg::Exponential)]
    pub agg: AggArg,
    /// Feature sets as letters: I(tems), T(ransactions), L(ength), F(requency).
    #[arg(long, default_value = "ILFT")]
    pub features: String,
    #[arg(long, value_enum, default_value_t = MeasureArg::Freq)]
    pub measure: MeasureArg,
    #[arg(long, default_value_t = 20)]
    pub iterations: usize,
    #[arg(long, default_value_t = 10)]
    pub reps: usize,
    #[arg(long, default_value = "disc-cdf")]
    pub variant: Variant,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.9)]
    pub kappa: f64,
    #[arg(long, default_value_t = 0.001)]
    pub lambda: f64,
    /// Lower end of the logistic quality range.
    #[arg(long, default_value_t = 0.1)]
    pub range: f64,
    #[arg(long, default_value_t = 1)]
    pub top_m: usize,
    #[arg(long, default_value_t = divsample_core::session::DEFAULT_REFERENCE_CAP)]
    pub reference_cap: usize,
    /// Measure wall-clock seconds per iteration (otherwise the column is 0).
    #[arg(long)]
    pub timings: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: std::net::IpAddr,
}

/// Bad input detected after flag parsing; exits with status 2.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct UsageError(String);

fn usage(e: impl std::fmt::Display) -> anyhow::Error {
    UsageError(e.to_string()).into()
}

pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.is::<UsageError>() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

fn output(path: Option<&Path>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn open(cli_dir: Option<&Path>, dataset: &Path) -> anyhow::Result<TransactionDatabase> {
    let path = resolve_dataset(dataset, cli_dir);
    Ok(load_database(&path)?)
}

fn write_pattern(out: &mut dyn Write, items: &Itemset, support: usize) -> io::Result<()> {
    writeln!(out, "{items}\t{support}")
}

pub fn run(cli: Cli) -> anyhow::Result<()> {
    let dir = cli.dataset_dir.as_deref();
    match cli.command {
        Command::Mine(a) => cmd_mine(dir, a),
        Command::Sample(a) => cmd_sample(dir, a),
        Command::Simulate(a) => cmd_simulate(dir, a),
        Command::Serve(a) => {
            let dataset_dir = cli.dataset_dir.unwrap_or_else(|| PathBuf::from("data"));
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(crate::server::serve((a.host, a.port).into(), dataset_dir))?;
            Ok(())
        }
    }
}

fn diversity(db: &TransactionDatabase, theta: Theta, jmax: f64) -> anyhow::Result<DiversityConfig> {
    let theta = theta.resolve(db.n_transactions()).map_err(usage)?;
    DiversityConfig::new(theta, jmax, db).map_err(usage)
}

fn cmd_mine(dir: Option<&Path>, a: MineArgs) -> anyhow::Result<()> {
    let db = open(dir, &a.dataset)?;
    let mut out = output(a.out.as_deref())?;
    let mut result = Ok(());
    if a.closed || a.jmax.is_some() {
        let cfg = diversity(&db, a.theta, a.jmax.unwrap_or(1.0))?;
        for_each_closed_diverse(&db, &cfg, a.limit, |p| {
            match write_pattern(&mut out, &p.itemset, p.support) {
                Ok(()) => Control::Continue,
                Err(e) => {
                    result = Err(e);
                    Control::Stop
                }
            }
        });
    } else {
        let theta = a.theta.resolve(db.n_transactions()).map_err(usage)?;
        let mut left = a.limit;
        for_each_frequent(&db, theta, |items, tids| {
            if left == Some(0) {
                return false;
            }
            left = left.map(|l| l - 1);
            match write_pattern(&mut out, &Itemset::from(items), tids.count()) {
                Ok(()) => true,
                Err(e) => {
                    result = Err(e);
                    false
                }
            }
        });
    }
    result?;
    out.flush()?;
    Ok(())
}

fn cmd_sample(dir: Option<&Path>, a: SampleArgs) -> anyhow::Result<()> {
    let db = open(dir, &a.dataset)?;
    let cfg = diversity(&db, a.theta, a.jmax)?;
    if !(a.kappa > 0.0 && a.kappa.is_finite()) {
        return Err(usage("kappa must be positive"));
    }
    let mut out = output(a.out.as_deref())?;
    for i in 0..a.n {
        let mut rng = ChaCha8Rng::seed_from_u64(draw_seed(a.seed, 0, i));
        let draw = cdflexics_draw(&db, &cfg, |_: &Pattern| 1.0, a.kappa, &mut rng)
            .with_context(|| format!("draw {i}"))?;
        write_pattern(&mut out, &draw.pattern.itemset, draw.pattern.support)?;
    }
    out.flush()?;
    Ok(())
}

/// Session settings of a `simulate` invocation for a loaded database.
pub fn simulate_config(
    a: &SimulateArgs,
    db: &TransactionDatabase,
) -> anyhow::Result<SessionConfig> {
    let theta = a.theta.resolve(db.n_transactions()).map_err(usage)?;
    let mut cfg = SessionConfig::new(theta, a.jmax, a.k, a.ell, a.iterations, a.seed);
    cfg.kappa = a.kappa;
    cfg.lambda = a.lambda;
    cfg.range = a.range;
    cfg.top_m = a.top_m;
    let kind = match a.agg {
        AggArg::Linear => AggregationKind::Linear,
        AggArg::Exponential => AggregationKind::Exponential,
    };
    cfg.aggregation = AggregationConfig::new(kind, a.eta).map_err(usage)?;
    cfg.features = FeatureSets::parse(&a.features).map_err(usage)?;
    a.variant.apply(&mut cfg);
    cfg.validate(db).map_err(usage)?;
    Ok(cfg)
}

fn cmd_simulate(dir: Option<&Path>, a: SimulateArgs) -> anyhow::Result<()> {
    if a.reps == 0 {
        return Err(usage("at least one repetition"));
    }
    let db = Arc::new(open(dir, &a.dataset)?);
    let cfg = simulate_config(&a, &db)?;
    let measure = match a.measure {
        MeasureArg::Freq => Measure::Frequency,
        MeasureArg::Surp => Measure::Surprisingness,
    };
    let reference = mine_reference_set(&db, cfg.theta, measure, a.reference_cap)?;
    let rows = run_experiment(db, cfg, &reference, a.reps, a.timings).map_err(|e| match e {
        SessionError::Sample { .. } => anyhow::Error::from(e),
        other => usage(other),
    })?;
    let mut out = output(a.out.as_deref())?;
    write_csv(&rows, &mut out)?;
    out.flush()?;
    Ok(())
}
