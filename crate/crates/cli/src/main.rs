//! `gaussbv`: experiment runner writing deterministic CSV/JSON artifacts.
//!
//! Exit codes: 0 success, 1 operational error (bad config, I/O, engine
//! failure), 2 contract violation under `--assert`.

mod commands;
mod config;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use gaussbv::product::Damping;

use config::{Command, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "gaussbv", version, about = "Gaussian Sobolev/BV experiments on domains", propagate_version = true)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Weighted Sobolev norms of the hat functions and their log-log slope.
    Norms(NormsArgs),
    /// Coarea identity on the test-function library.
    Coarea(CoareaArgs),
    /// Extension-cost certificates.
    #[command(subcommand)]
    Extend(ExtendCmd),
    /// Half-plane reflection norms.
    Reflect(ReflectArgs),
    /// BV line-family checks.
    #[command(subcommand)]
    Bv(BvCmd),
    /// Product construction.
    #[command(subcommand)]
    Product(ProductCmd),
    /// Run the command named in a config file.
    Run(RunArgs),
    /// Every experiment, one subdirectory each.
    All(AllArgs),
}

#[derive(Debug, Subcommand)]
enum ExtendCmd {
    /// Cost ratios over m: variational certificates (p = 2) or coarea bounds (p = 1).
    Cost(CostArgs),
}

#[derive(Debug, Subcommand)]
enum BvCmd {
    /// Integration-by-parts residual of a line family on a domain.
    IbpCheck(IbpArgs),
    /// Variation and semivariation of an atomic vector measure.
    Semivar(SemivarArgs),
    /// Var(Λ I_U) of a convex domain against the boundary oracle.
    LambdaIndicator(IndicatorArgs),
    /// Extension by zero: added atoms and IBP residual.
    ExtendZero(ZeroArgs),
}

#[derive(Debug, Subcommand)]
enum ProductCmd {
    /// Coefficient schedule and divergence certificate table.
    Table(TableArgs),
}

#[derive(Debug, Args)]
struct Common {
    /// TOML config; flags override its keys.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Primary output file name (siblings are derived from it).
    #[arg(long)]
    out: Option<String>,
    /// Output directory [default: $GAUSSBV_OUT_DIR, else .]
    #[arg(long)]
    out_dir: Option<String>,
    /// Exit 2 when a contract check fails.
    #[arg(long)]
    assert: bool,
}

impl Common {
    fn overrides(&self) -> RunConfig {
        RunConfig {
            out: self.out.clone(),
            out_dir: self.out_dir.clone(),
            assert: self.assert.then_some(true),
            ..Default::default()
        }
    }
}

#[derive(Debug, Args)]
struct NormsArgs {
    /// Integrability exponent.
    #[arg(long)]
    p: Option<f64>,
    /// Rhomb indices, comma separated [default: 4,8,16,32]
    #[arg(long, value_delimiter = ',')]
    m: Option<Vec<u32>>,
    /// Quadrature tolerance.
    #[arg(long)]
    tol: Option<f64>,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct CoareaArgs {
    /// Grid nodes per side.
    #[arg(long)]
    res: Option<usize>,
    /// Hat functions to include [default: 4,8]
    #[arg(long, value_delimiter = ',')]
    m: Option<Vec<u32>>,
    /// Levels for the perimeter integral.
    #[arg(long)]
    t_samples: Option<usize>,
    /// Also write each grid (binary + JSON sidecar).
    #[arg(long)]
    save_grids: bool,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct CostArgs {
    /// Rhomb indices, 4..=32 [default: 4,8,16]
    #[arg(long, value_delimiter = ',')]
    m: Option<Vec<u32>>,
    /// 1 or 2.
    #[arg(long)]
    p: Option<f64>,
    /// Grid resolution of the p = 2 solve.
    #[arg(long)]
    res: Option<usize>,
    /// CG tolerance of the p = 2 solve.
    #[arg(long)]
    tol: Option<f64>,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct ReflectArgs {
    /// Exponents, comma separated [default: 1,2,4]
    #[arg(long, value_delimiter = ',')]
    p: Option<Vec<f64>>,
    /// Quadrature tolerance.
    #[arg(long)]
    tol: Option<f64>,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct IbpArgs {
    /// Domain JSON, inline or a file [default: unit disc]
    #[arg(long)]
    domain: Option<String>,
    /// Direction angle; default sweeps three angles.
    #[arg(long, allow_hyphen_values = true)]
    theta: Option<f64>,
    /// BV1D JSON carried by every line; default is a smooth function.
    #[arg(long)]
    line_function: Option<String>,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct SemivarArgs {
    /// FinVectorMeasure JSON, inline or a file.
    #[arg(long, conflicts_with = "eta")]
    measure: Option<String>,
    /// Use η_n = Σ n⁻¹ δ_n e_n [default: 3]
    #[arg(long)]
    eta: Option<usize>,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct IndicatorArgs {
    /// Domain JSON, inline or a file [default: unit disc]
    #[arg(long)]
    domain: Option<String>,
    /// Direction angle for the directional report.
    #[arg(long, allow_hyphen_values = true)]
    theta: Option<f64>,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct ZeroArgs {
    /// Domain JSON, inline or a file [default: unit disc]
    #[arg(long)]
    domain: Option<String>,
    /// Sup bound of the function on the domain.
    #[arg(long)]
    bound: Option<f64>,
    /// Direction angle; default sweeps three angles.
    #[arg(long, allow_hyphen_values = true)]
    theta: Option<f64>,
    /// BV1D JSON carried by every line; default is a smooth function.
    #[arg(long)]
    line_function: Option<String>,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct TableArgs {
    /// 1 or 2.
    #[arg(long)]
    p: Option<f64>,
    /// Last block index k (m = 2^k).
    #[arg(long)]
    kmax: Option<u32>,
    /// Seed of the Monte Carlo product-measure check.
    #[arg(long)]
    seed: Option<u64>,
    /// Monte Carlo samples.
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long, value_enum)]
    damping: Option<DampingArg>,
    /// Grid resolution of the p = 2 cost solves.
    #[arg(long)]
    res: Option<usize>,
    /// CG tolerance of the p = 2 cost solves.
    #[arg(long)]
    tol: Option<f64>,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
enum DampingArg {
    Geometric,
    InverseSquare,
}

impl From<DampingArg> for Damping {
    fn from(d: DampingArg) -> Self {
        match d {
            DampingArg::Geometric => Damping::Geometric,
            DampingArg::InverseSquare => Damping::InverseSquare,
        }
    }
}

#[derive(Debug, Args)]
struct RunArgs {
    /// TOML config naming the command.
    #[arg(long, value_name = "FILE")]
    config: PathBuf,
    #[arg(long)]
    out_dir: Option<String>,
    #[arg(long)]
    assert: bool,
}

#[derive(Debug, Args)]
struct AllArgs {
    /// Exponents for norms and reflection [default: 1,2,4]
    #[arg(long, value_delimiter = ',')]
    p: Option<Vec<f64>>,
    /// Grid resolution (coarea grids and p = 2 solves).
    #[arg(long)]
    res: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    common: Common,
}

/// The command, the flag-level config and the optional config file.
fn lower(cmd: Cmd) -> (Option<Command>, RunConfig, Option<PathBuf>) {
    let with = |c: &Common, r: RunConfig| c.overrides().overlay(r);
    match cmd {
        Cmd::Norms(a) => (
            Some(Command::Norms),
            with(&a.common, RunConfig { p: a.p, m: a.m, tol: a.tol, ..Default::default() }),
            a.common.config,
        ),
        Cmd::Coarea(a) => (
            Some(Command::Coarea),
            with(
                &a.common,
                RunConfig {
                    res: a.res,
                    m: a.m,
                    t_samples: a.t_samples,
                    save_grids: a.save_grids.then_some(true),
                    ..Default::default()
                },
            ),
            a.common.config,
        ),
        Cmd::Extend(ExtendCmd::Cost(a)) => (
            Some(Command::ExtendCost),
            with(&a.common, RunConfig { m: a.m, p: a.p, res: a.res, tol: a.tol, ..Default::default() }),
            a.common.config,
        ),
        Cmd::Reflect(a) => (
            Some(Command::Reflect),
            with(&a.common, RunConfig { p_values: a.p, tol: a.tol, ..Default::default() }),
            a.common.config,
        ),
        Cmd::Bv(BvCmd::IbpCheck(a)) => (
            Some(Command::BvIbpCheck),
            with(
                &a.common,
                RunConfig {
                    domain: a.domain,
                    theta: a.theta,
                    line_function: a.line_function,
                    ..Default::default()
                },
            ),
            a.common.config,
        ),
        Cmd::Bv(BvCmd::Semivar(a)) => (
            Some(Command::BvSemivar),
            with(&a.common, RunConfig { measure: a.measure, eta: a.eta, ..Default::default() }),
            a.common.config,
        ),
        Cmd::Bv(BvCmd::LambdaIndicator(a)) => (
            Some(Command::BvLambdaIndicator),
            with(&a.common, RunConfig { domain: a.domain, theta: a.theta, ..Default::default() }),
            a.common.config,
        ),
        Cmd::Bv(BvCmd::ExtendZero(a)) => (
            Some(Command::BvExtendZero),
            with(
                &a.common,
                RunConfig {
                    domain: a.domain,
                    bound: a.bound,
                    theta: a.theta,
                    line_function: a.line_function,
                    ..Default::default()
                },
            ),
            a.common.config,
        ),
        Cmd::Product(ProductCmd::Table(a)) => (
            Some(Command::ProductTable),
            with(
                &a.common,
                RunConfig {
                    p: a.p,
                    kmax: a.kmax,
                    seed: a.seed,
                    samples: a.samples,
                    damping: a.damping.map(Into::into),
                    res: a.res,
                    tol: a.tol,
                    ..Default::default()
                },
            ),
            a.common.config,
        ),
        Cmd::Run(a) => (
            None,
            RunConfig {
                out_dir: a.out_dir,
                assert: a.assert.then_some(true),
                ..Default::default()
            },
            Some(a.config),
        ),
        Cmd::All(a) => (
            Some(Command::All),
            with(&a.common, RunConfig { p_values: a.p, res: a.res, seed: a.seed, ..Default::default() }),
            a.common.config,
        ),
    }
}

fn load_config(path: &Path) -> anyhow::Result<RunConfig> {
    if !path.exists() {
        bail!("config file not found: {}", path.display());
    }
    RunConfig::from_file(path)
}

/// Splits `--out a/b.csv` into an extra directory and a file name.
fn split_out(dir: PathBuf, cfg: &mut RunConfig) -> PathBuf {
    let Some(out) = cfg.out.clone() else {
        return dir;
    };
    let p = Path::new(&out);
    match (p.parent(), p.file_name()) {
        (Some(parent), Some(name)) if !parent.as_os_str().is_empty() => {
            cfg.out = Some(name.to_string_lossy().into_owned());
            dir.join(parent)
        }
        _ => dir,
    }
}

fn execute(cli: Cli) -> anyhow::Result<bool> {
    let (cmd, flags, config_path) = lower(cli.cmd);
    let file = match &config_path {
        Some(p) => load_config(p)?,
        None => RunConfig::default(),
    };
    let cmd = match (cmd, file.command) {
        (Some(c), Some(f)) if c != f => bail!("command: config file names `{}` but the subcommand is `{}`", f.name(), c.name()),
        (Some(c), _) | (None, Some(c)) => c,
        (None, None) => bail!("command: the config file must name a command to run"),
    };
    let mut cfg = commands::resolve(cmd, file.overlay(flags))?;
    let dir = split_out(output::resolve_out_dir(cfg.out_dir.as_deref()), &mut cfg);
    let hash = RunConfig {
        out: None,
        out_dir: None,
        assert: None,
        ..cfg.clone()
    }
    .hash();
    let outcome = commands::run(cmd, &cfg)?;
    let manifest = output::write_all(&dir, &outcome.artifacts, cmd.name(), hash, outcome.seed)
        .with_context(|| format!("writing {} output", cmd.name()))?;
    for line in &outcome.summary {
        println!("{line}");
    }
    for f in &manifest.files {
        println!("wrote {}", dir.join(&f.path).display());
    }
    for v in &outcome.violations {
        eprintln!("contract violation: {v}");
    }
    Ok(outcome.violations.is_empty() || cfg.assert != Some(true))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match execute(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
