//! `grushin-lab`: sweeps, reports and cross-checks for generalized Grushin
//! operators.

mod commands;
mod problem;
mod report;
mod settings;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use settings::{Invalid, Settings};

#[derive(Parser, Debug)]
#[command(name = "grushin-lab", version, about = "Spectral and controllability experiments for generalized Grushin operators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Lowest eigenvalues of the Fourier components at each frequency
    Spectrum(SpectrumArgs),
    /// Growth rate of the first eigenvalue in the frequency
    Asymptotics(SweepArgs),
    /// Agmon distances and the sublevel set of q²
    Agmon(AgmonArgs),
    /// Eigenfunction mass on a control zone and its decay rate
    Decay(ZoneSweepArgs),
    /// Observability ratios and the minimal-time estimate
    MinimalTime(MinimalTimeArgs),
    /// Crank-Nicolson run from a tensor eigenmode
    Simulate(SimulateArgs),
    /// Polynomial counterexample for controls outside a rectangle
    #[command(name = "koenig-demo")]
    Counterexample(CounterexampleArgs),
    /// Partition-of-unity cutoff pair
    BumpCheck(BumpArgs),
    /// Check the hypotheses on the profile and the potential
    Validate(ValidateArgs),
}

type Flags = BTreeMap<&'static str, Option<String>>;

macro_rules! flags {
    ($map:expr, $src:expr, { $($key:literal => $field:ident),* $(,)? }) => {
        $( $map.insert($key, $src.$field.clone()); )*
    };
}

#[derive(Args, Debug)]
struct Common {
    /// Flat `key = value` file; explicit flags take precedence
    #[arg(long, allow_hyphen_values = true)]
    config: Option<PathBuf>,
    /// Output directory [default: grushin-out]
    #[arg(long, allow_hyphen_values = true)]
    out: Option<String>,
    /// Worker threads (overrides GRUSHIN_LAB_WORKERS)
    #[arg(long, allow_hyphen_values = true)]
    workers: Option<String>,
}

impl Common {
    fn collect(&self, m: &mut Flags) {
        flags!(m, self, { "out" => out, "workers" => workers });
    }
}

#[derive(Args, Debug)]
struct ProfileArgs {
    /// monomial:P, poly:c0,c1,..., tan or table:PATH
    #[arg(long, allow_hyphen_values = true)]
    profile: Option<String>,
    /// Profile spec as flat key = value text
    #[arg(long = "profile-file", allow_hyphen_values = true)]
    profile_file: Option<String>,
    /// Declared degeneracy order
    #[arg(long, allow_hyphen_values = true)]
    gamma: Option<String>,
    /// Half-length of a symmetric domain
    #[arg(long = "L", allow_hyphen_values = true)]
    l: Option<String>,
    #[arg(long = "L-minus", allow_hyphen_values = true)]
    l_minus: Option<String>,
    #[arg(long = "L-plus", allow_hyphen_values = true)]
    l_plus: Option<String>,
    /// 0, const:C, poly:c0,c1,... or table:PATH
    #[arg(long, allow_hyphen_values = true)]
    potential: Option<String>,
    /// Density h of the measure, inducing V = (√h)''/√h: one, exp:A, cos or table:PATH
    #[arg(long, allow_hyphen_values = true)]
    measure: Option<String>,
    /// Interior grid nodes in x
    #[arg(long, allow_hyphen_values = true)]
    n: Option<String>,
    /// Skip the automatic check of the profile hypotheses
    #[arg(long = "skip-h2", num_args = 0..=1, default_missing_value = "true")]
    skip_h2: Option<String>,
}

impl ProfileArgs {
    fn collect(&self, m: &mut Flags) {
        flags!(m, self, {
            "profile" => profile, "profile-file" => profile_file, "gamma" => gamma, "L" => l,
            "L-minus" => l_minus, "L-plus" => l_plus, "potential" => potential, "measure" => measure,
            "n" => n, "skip-h2" => skip_h2,
        });
    }
}

#[derive(Args, Debug)]
struct SpectrumArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    profile: ProfileArgs,
    /// Frequencies, comma separated and increasing
    #[arg(long, allow_hyphen_values = true)]
    xi: Option<String>,
    /// Number of eigenvalues per frequency [default: 5]
    #[arg(long, allow_hyphen_values = true)]
    count: Option<String>,
    /// Also write the operator of the first frequency as CSV
    #[arg(long = "export-operator", num_args = 0..=1, default_missing_value = "true")]
    export_operator: Option<String>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    profile: ProfileArgs,
    /// Frequencies, comma separated and increasing
    #[arg(long, allow_hyphen_values = true)]
    xi: Option<String>,
}

#[derive(Args, Debug)]
struct AgmonArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    profile: ProfileArgs,
    /// Floor of the metric sqrt((q² - δ)₊) [default: 0]
    #[arg(long, allow_hyphen_values = true)]
    delta: Option<String>,
    /// Control zone lo:hi[,lo:hi...]
    #[arg(long, allow_hyphen_values = true)]
    zone: Option<String>,
    /// Number of tabulated points [default: 201]
    #[arg(long, allow_hyphen_values = true)]
    samples: Option<String>,
}

#[derive(Args, Debug)]
struct ZoneSweepArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    profile: ProfileArgs,
    #[arg(long, allow_hyphen_values = true)]
    xi: Option<String>,
    /// Control zone lo:hi[,lo:hi...]
    #[arg(long, allow_hyphen_values = true)]
    zone: Option<String>,
}

#[derive(Args, Debug)]
struct MinimalTimeArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    profile: ProfileArgs,
    #[arg(long, allow_hyphen_values = true)]
    xi: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    zone: Option<String>,
    /// Observation times [default: 0.1]
    #[arg(long = "T", allow_hyphen_values = true)]
    t: Option<String>,
    /// Sobolev index of the dual norm [default: 0.5]
    #[arg(long, allow_hyphen_values = true)]
    s: Option<String>,
    /// Half-width of the frequency packets; switches to the localized sweep
    #[arg(long = "localized-delta", allow_hyphen_values = true)]
    localized_delta: Option<String>,
    /// Quadrature nodes per packet [default: 16]
    #[arg(long, allow_hyphen_values = true)]
    nodes: Option<String>,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    profile: ProfileArgs,
    /// Interior grid nodes in y [default: 129]
    #[arg(long, allow_hyphen_values = true)]
    ny: Option<String>,
    /// Length of the y-interval [default: π]
    #[arg(long = "y-max", allow_hyphen_values = true)]
    y_max: Option<String>,
    /// Weight r(y): one, const:C or poly:c0,c1,...
    #[arg(long, allow_hyphen_values = true)]
    weight: Option<String>,
    /// Mode k,n [default: 1,8]
    #[arg(long, allow_hyphen_values = true)]
    mode: Option<String>,
    /// Final time [default: 0.1]
    #[arg(long = "T", allow_hyphen_values = true)]
    t: Option<String>,
    /// Time step [default: 1e-4]
    #[arg(long, allow_hyphen_values = true)]
    dt: Option<String>,
    /// Relative residual of the CG solves [default: 1e-10]
    #[arg(long = "cg-tol", allow_hyphen_values = true)]
    cg_tol: Option<String>,
    /// Write the final field as CSV
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    snapshot: Option<String>,
}

#[derive(Args, Debug)]
struct CounterexampleArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    profile: ProfileArgs,
    /// Rectangle half-widths [default: 0.5]
    #[arg(long, allow_hyphen_values = true)]
    a: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    b: Option<String>,
    /// [default: 0.1]
    #[arg(long, allow_hyphen_values = true)]
    epsilon: Option<String>,
    /// Control time [default: 0.05]
    #[arg(long = "T", allow_hyphen_values = true)]
    t: Option<String>,
    /// Order of the zero at the origin [default: 2]
    #[arg(long, allow_hyphen_values = true)]
    order: Option<String>,
    /// Removed arc lo:hi of arguments [default: π/4:3π/4]
    #[arg(long, allow_hyphen_values = true)]
    arc: Option<String>,
    /// Polynomial degrees of the stages
    #[arg(long, allow_hyphen_values = true)]
    stages: Option<String>,
    /// Boundary samples [default: 4096]
    #[arg(long, allow_hyphen_values = true)]
    samples: Option<String>,
}

#[derive(Args, Debug)]
struct BumpArgs {
    #[command(flatten)]
    common: Common,
    /// Support radius [default: 1]
    #[arg(long = "R", allow_hyphen_values = true)]
    r: Option<String>,
    /// Plateau fraction [default: 0.5]
    #[arg(long, allow_hyphen_values = true)]
    delta: Option<String>,
    /// Grid nodes [default: 10000]
    #[arg(long, allow_hyphen_values = true)]
    n: Option<String>,
}

#[derive(Args, Debug)]
struct ValidateArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    profile: ProfileArgs,
    /// Tolerance of the derivative checks [default: 1e-6]
    #[arg(long, allow_hyphen_values = true)]
    tol: Option<String>,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Spectrum(_) => "spectrum",
            Command::Asymptotics(_) => "asymptotics",
            Command::Agmon(_) => "agmon",
            Command::Decay(_) => "decay",
            Command::MinimalTime(_) => "minimal-time",
            Command::Simulate(_) => "simulate",
            Command::Counterexample(_) => "koenig-demo",
            Command::BumpCheck(_) => "bump-check",
            Command::Validate(_) => "validate",
        }
    }

    fn settings(&self) -> anyhow::Result<Settings> {
        let mut m = Flags::new();
        let common = match self {
            Command::Spectrum(a) => {
                a.profile.collect(&mut m);
                flags!(m, a, { "xi" => xi, "count" => count, "export-operator" => export_operator });
                &a.common
            }
            Command::Asymptotics(a) => {
                a.profile.collect(&mut m);
                flags!(m, a, { "xi" => xi });
                &a.common
            }
            Command::Agmon(a) => {
                a.profile.collect(&mut m);
                flags!(m, a, { "delta" => delta, "zone" => zone, "samples" => samples });
                &a.common
            }
            Command::Decay(a) => {
                a.profile.collect(&mut m);
                flags!(m, a, { "xi" => xi, "zone" => zone });
                &a.common
            }
            Command::MinimalTime(a) => {
                a.profile.collect(&mut m);
                flags!(m, a, {
                    "xi" => xi, "zone" => zone, "T" => t, "s" => s,
                    "localized-delta" => localized_delta, "nodes" => nodes,
                });
                &a.common
            }
            Command::Simulate(a) => {
                a.profile.collect(&mut m);
                flags!(m, a, {
                    "ny" => ny, "y-max" => y_max, "weight" => weight, "mode" => mode, "T" => t,
                    "dt" => dt, "cg-tol" => cg_tol, "snapshot" => snapshot,
                });
                &a.common
            }
            Command::Counterexample(a) => {
                a.profile.collect(&mut m);
                flags!(m, a, {
                    "a" => a, "b" => b, "epsilon" => epsilon, "T" => t, "order" => order,
                    "arc" => arc, "stages" => stages, "samples" => samples,
                });
                &a.common
            }
            Command::BumpCheck(a) => {
                flags!(m, a, { "R" => r, "delta" => delta, "n" => n });
                &a.common
            }
            Command::Validate(a) => {
                a.profile.collect(&mut m);
                flags!(m, a, { "tol" => tol });
                &a.common
            }
        };
        common.collect(&mut m);
        Settings::new(m, common.config.as_deref())
    }
}

fn workers(s: &Settings) -> anyhow::Result<Option<usize>> {
    let raw = match s.get("workers") {
        Some(v) => Some(v.to_string()),
        None => std::env::var("GRUSHIN_LAB_WORKERS").ok(),
    };
    match raw {
        None => Ok(None),
        Some(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => settings::invalid(format!("worker count must be a positive integer, got {v:?}")),
        },
    }
}

fn run(cli: Cli) -> anyhow::Result<String> {
    let settings = cli.command.settings()?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = workers(&settings)? {
        pool = pool.num_threads(n);
    }
    let pool = pool.build()?;
    let out = report::OutDir::create(&PathBuf::from(settings.get("out").unwrap_or("grushin-out")))?;
    log::info!("running {}", cli.command.name());
    pool.install(|| match &cli.command {
        Command::Spectrum(_) => commands::spectrum(&settings, &out),
        Command::Asymptotics(_) => commands::asymptotics(&settings, &out),
        Command::Agmon(_) => commands::agmon(&settings, &out),
        Command::Decay(_) => commands::decay(&settings, &out),
        Command::MinimalTime(_) => commands::minimal_time(&settings, &out),
        Command::Simulate(_) => commands::simulate(&settings, &out),
        Command::Counterexample(_) => commands::counterexample(&settings, &out),
        Command::BumpCheck(_) => commands::bump_check(&settings, &out),
        Command::Validate(_) => commands::validate(&settings, &out),
    })
}

/// 2 for bad input, 3 for numerical guards, 1 otherwise.
fn exit_code(e: &anyhow::Error) -> u8 {
    if e.downcast_ref::<Invalid>().is_some() {
        return 2;
    }
    if let Some(core) = e.downcast_ref::<grushin_core::Error>() {
        return if core.is_numerical_guard() { 3 } else { 2 };
    }
    1
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
