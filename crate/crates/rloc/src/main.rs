use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rloc::config::*;
use rloc::{run, CliError, Config};
use rloc_core::frac_calc::{Base, Side};
use rloc_core::ito_verify::ItoRegime;

/// Pathwise integration against the local time of symmetric stable processes.
#[derive(Parser, Debug)]
#[command(name = "rloc", version)]
struct Cli {
    /// Run the experiment described by a TOML or JSON file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Print the resolved configuration as TOML and exit.
    #[arg(long, global = true)]
    print_config: bool,
    #[command(subcommand)]
    cmd: Option<Cmd>,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Simulate one symmetric α-stable path.
    Simulate(SimulateArgs),
    /// Estimate the local-time field of one path.
    Localtime(LocalTimeArgs),
    /// Exact p-variation and dyadic bound of a CSV column.
    Pvar(PvarArgs),
    /// Tabulate a fractional operator on a grid.
    Fraccalc(FracArgs),
    /// Young integral of two sampled functions.
    Young(YoungArgs),
    /// Geometric rough path over (L, g) and the integrals it defines.
    Roughlift(RoughArgs),
    /// Monte-Carlo check of the extended Itô formula.
    Ito(ItoArgs),
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[arg(long)]
    alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    t: f64,
    #[arg(long, default_value_t = 1 << 16)]
    steps: usize,
    #[arg(long, default_value_t = 0.1)]
    threshold: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// CSV output (time, value).
    #[arg(long)]
    out: Option<String>,
    /// Also write the binary RLSP dump here.
    #[arg(long)]
    binary: Option<String>,
}

#[derive(Args, Debug)]
struct LocalTimeArgs {
    #[arg(long)]
    alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    t: f64,
    #[arg(long, default_value_t = 1 << 16)]
    steps: usize,
    #[arg(long)]
    bandwidth: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    grid_lo: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    grid_hi: Option<f64>,
    #[arg(long)]
    grid_n: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    barlow_delta: Option<f64>,
    #[arg(long)]
    out: Option<String>,
}

#[derive(Args, Debug)]
struct PvarArgs {
    /// CSV (x, value).
    #[arg(long)]
    input: String,
    #[arg(long)]
    p: f64,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    out: Option<String>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum OpArg {
    Rl,
    Derivative,
    Riesz,
    Laplacian,
    Gradient,
    Mollify,
    Constants,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SideArg {
    Left,
    Right,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum BaseArg {
    Zero,
    MinusInfinity,
}

#[derive(Args, Debug)]
struct FracArgs {
    #[arg(long, value_enum)]
    op: OpArg,
    /// Closed form, e.g. gaussian, cos:1, abs_power:0.8, poly:0:0:1.
    #[arg(long)]
    function: Option<String>,
    /// Sampled input, CSV (x, value) on a uniform grid.
    #[arg(long)]
    input: Option<String>,
    /// Operator order (α for riesz, laplacian and gradient).
    #[arg(long, default_value_t = 1.0)]
    order: f64,
    #[arg(long, value_enum, default_value_t = SideArg::Left)]
    side: SideArg,
    #[arg(long, value_enum, default_value_t = BaseArg::Zero)]
    base: BaseArg,
    #[arg(long, default_value_t = 1e-3)]
    epsilon: f64,
    /// Mollifier index.
    #[arg(long, default_value_t = 8)]
    n: u32,
    #[arg(long, allow_hyphen_values = true)]
    grid_lo: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    grid_hi: Option<f64>,
    #[arg(long)]
    grid_n: Option<usize>,
    #[arg(long)]
    out: Option<String>,
}

#[derive(Args, Debug)]
struct YoungArgs {
    /// Integrand CSV (x, value).
    #[arg(long)]
    f: String,
    /// Integrator CSV (x, value).
    #[arg(long)]
    g: String,
    #[arg(long)]
    p: f64,
    #[arg(long)]
    q: f64,
    #[arg(long)]
    out: Option<String>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ControlArg {
    Length,
    Variation,
}

#[derive(Args, Debug)]
struct RoughArgs {
    /// Local-time field CSV (x, L); simulated from --alpha otherwise.
    #[arg(long)]
    field: Option<String>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    t: f64,
    #[arg(long, default_value_t = 1 << 16)]
    steps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    bandwidth: Option<f64>,
    /// The integrand g (default gaussian).
    #[arg(long)]
    function: Option<String>,
    #[arg(long, default_value_t = 1.0)]
    q: f64,
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long)]
    levels: Option<usize>,
    #[arg(long, default_value_t = 10)]
    mmax: u32,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long, value_enum, default_value_t = ControlArg::Length)]
    control: ControlArg,
    #[arg(long)]
    out: Option<String>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum RegimeArg {
    Smooth,
    Young,
    Rough,
}

#[derive(Args, Debug)]
struct ItoArgs {
    #[arg(long, value_enum)]
    regime: RegimeArg,
    #[arg(long)]
    alpha: f64,
    /// Test function (default gaussian for smooth, abs otherwise).
    #[arg(long)]
    function: Option<String>,
    #[arg(long, default_value_t = 1.0)]
    q: f64,
    #[arg(long, default_value_t = 1.0)]
    t: f64,
    #[arg(long, default_value_t = 1 << 16)]
    steps: usize,
    /// Number of paths.
    #[arg(long, default_value_t = 256)]
    seeds: usize,
    #[arg(long, default_value_t = 0)]
    base_seed: u64,
    #[arg(long, default_value_t = 0.1)]
    threshold: f64,
    #[arg(long)]
    bandwidth: Option<f64>,
    #[arg(long)]
    spacing: Option<f64>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    delta: f64,
    /// Keep per-path reports in the output.
    #[arg(long)]
    per_path: bool,
    #[arg(long)]
    out: Option<String>,
}

fn function(s: &Option<String>) -> Result<Option<rloc_core::Analytic>, CliError> {
    s.as_deref().map(parse_function).transpose()
}

fn experiment(cmd: Cmd) -> Result<Experiment, CliError> {
    Ok(match cmd {
        Cmd::Simulate(a) => Experiment::Simulate(SimulateConfig {
            alpha: a.alpha,
            t: a.t,
            steps: a.steps,
            threshold: a.threshold,
            seed: a.seed,
            out: a.out,
            binary: a.binary,
        }),
        Cmd::Localtime(a) => Experiment::Localtime(LocalTimeConfig {
            alpha: a.alpha,
            t: a.t,
            steps: a.steps,
            seed: a.seed,
            bandwidth: a.bandwidth,
            grid_lo: a.grid_lo,
            grid_hi: a.grid_hi,
            grid_n: a.grid_n,
            barlow_delta: a.barlow_delta,
            out: a.out,
        }),
        Cmd::Pvar(a) => Experiment::Pvar(PvarConfig { input: a.input, p: a.p, gamma: a.gamma, out: a.out }),
        Cmd::Fraccalc(a) => Experiment::Fraccalc(FracCalcConfig {
            op: match a.op {
                OpArg::Rl => FracOp::Rl,
                OpArg::Derivative => FracOp::Derivative,
                OpArg::Riesz => FracOp::Riesz,
                OpArg::Laplacian => FracOp::Laplacian,
                OpArg::Gradient => FracOp::Gradient,
                OpArg::Mollify => FracOp::Mollify,
                OpArg::Constants => FracOp::Constants,
            },
            function: function(&a.function)?,
            input: a.input,
            order: a.order,
            side: match a.side {
                SideArg::Left => Side::Left,
                SideArg::Right => Side::Right,
            },
            base: match a.base {
                BaseArg::Zero => Base::Zero,
                BaseArg::MinusInfinity => Base::MinusInfinity,
            },
            epsilon: a.epsilon,
            n: a.n,
            grid_lo: a.grid_lo,
            grid_hi: a.grid_hi,
            grid_n: a.grid_n,
            out: a.out,
        }),
        Cmd::Young(a) => Experiment::Young(YoungConfig { f: a.f, g: a.g, p: a.p, q: a.q, out: a.out }),
        Cmd::Roughlift(a) => Experiment::Roughlift(RoughLiftConfig {
            field: a.field,
            alpha: a.alpha,
            t: a.t,
            steps: a.steps,
            seed: a.seed,
            bandwidth: a.bandwidth,
            function: function(&a.function)?,
            q: a.q,
            theta: a.theta,
            levels: a.levels,
            mmax: a.mmax,
            tol: a.tol,
            control: match a.control {
                ControlArg::Length => ControlKind::Length,
                ControlArg::Variation => ControlKind::Variation,
            },
            out: a.out,
        }),
        Cmd::Ito(a) => Experiment::Ito(ItoRunConfig {
            regime: match a.regime {
                RegimeArg::Smooth => ItoRegime::Smooth,
                RegimeArg::Young => ItoRegime::Young,
                RegimeArg::Rough => ItoRegime::Rough,
            },
            alpha: a.alpha,
            function: function(&a.function)?,
            q: a.q,
            t: a.t,
            steps: a.steps,
            seeds: a.seeds,
            base_seed: a.base_seed,
            threshold: a.threshold,
            bandwidth: a.bandwidth,
            spacing: a.spacing,
            p: a.p,
            delta: a.delta,
            per_path: a.per_path,
            out: a.out,
        }),
    })
}

fn main_inner() -> Result<(), CliError> {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if matches!(e.kind(), clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion) => {
            print!("{e}");
            return Ok(());
        }
        Err(e) => return Err(CliError::Schema(e.render().to_string().trim().to_string())),
    };
    let config = match (cli.config, cli.cmd) {
        (Some(_), Some(_)) => return Err(CliError::Schema("give either --config or a subcommand, not both".into())),
        (Some(p), None) => Config::load(&p)?,
        (None, Some(cmd)) => Config::new(experiment(cmd)?),
        (None, None) => return Err(CliError::Schema("no subcommand or --config given".into())),
    };
    if cli.print_config {
        print!("{}", rloc::run::resolve(&config)?.to_toml());
        return Ok(());
    }
    let outcome = run(&config, Path::new("."))?;
    println!("{}", outcome.summary);
    Ok(())
}

fn main() -> ExitCode {
    match main_inner() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
