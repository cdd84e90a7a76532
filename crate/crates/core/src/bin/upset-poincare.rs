use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use upset_poincare::report::{self, Command, ExperimentSpec, Format, SolverMethodName};
use upset_poincare::{Error, Result};

const THREADS_VAR: &str = "UPSET_POINCARE_THREADS";

/// Numerical certification of Poincaré inequalities on monotone subsets of
/// the hypercube, and mixing of the censored random walk.
///
/// Exit status: 0 all checks pass, 2 a violation was witnessed, 1 usage or
/// configuration error.
#[derive(Debug, Parser)]
#[command(name = "upset-poincare", version)]
struct Cli {
    #[command(subcommand)]
    command: Option<Cmd>,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct Common {
    /// Seed for every random draw.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Tolerance override (eigen-residual or decomposition residual).
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Report format: json or csv.
    #[arg(long, global = true)]
    format: Option<Format>,
    /// Write a log-log plot (mix tables only).
    #[arg(long, global = true)]
    svg: Option<PathBuf>,
    /// JSON experiment spec; flags given on the command line override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Check C*(A) against both bounds for enumerated or described sets.
    Verify(SetArgs),
    /// Run the decomposition identities and the induction-step inequalities.
    Lemmas {
        #[arg(long)]
        draws: Option<usize>,
        /// Points per axis of the (a0, a1) grid.
        #[arg(long)]
        grid: Option<usize>,
        /// Constant of the induction.
        #[arg(long)]
        c: Option<f64>,
        /// Random (A, f) pairs for the decomposition identities.
        #[arg(long)]
        instances: Option<usize>,
        /// Random (A, f) pairs for the averaging reduction.
        #[arg(long)]
        jensen: Option<usize>,
        #[arg(long = "set")]
        sets: Vec<String>,
        /// Function descriptions applied to every --set.
        #[arg(long = "function")]
        functions: Vec<String>,
    },
    /// Exact mixing times and bounds, for one set or the majority table.
    Mix {
        #[arg(long)]
        family: Option<String>,
        #[arg(long, value_delimiter = ',')]
        n: Vec<usize>,
        #[arg(long)]
        theta: Option<f64>,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long = "set")]
        sets: Vec<String>,
    },
    /// Spectral table: lambda2, C* and both bounds per set.
    Spectral(SetArgs),
    /// Monte Carlo runs of the walk through a membership oracle.
    Simulate {
        #[arg(long = "set")]
        set: Option<String>,
        /// Start point as a binary string (default all-ones).
        #[arg(long)]
        start: Option<String>,
        /// Steps per chain (default 4 n^2).
        #[arg(long)]
        steps: Option<u64>,
        #[arg(long)]
        chains: Option<usize>,
        #[arg(long)]
        theta: Option<f64>,
    },
    /// Count (and optionally list) the nonempty monotone sets of dimension n.
    Enumerate {
        n: usize,
        #[arg(long)]
        list: bool,
    },
}

#[derive(Debug, Args)]
struct SetArgs {
    /// Use every nonempty monotone set of this dimension.
    #[arg(long)]
    enumerate: Option<usize>,
    #[arg(long = "set")]
    sets: Vec<String>,
    /// auto, dense or iterative.
    #[arg(long)]
    method: Option<String>,
}

fn set_if<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

fn set_vec<T>(slot: &mut Vec<T>, v: Vec<T>) {
    if !v.is_empty() {
        *slot = v;
    }
}

fn build_spec(cli: Cli) -> Result<ExperimentSpec> {
    let mut spec = match &cli.common.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Error::InvalidArgument(format!("{}: {e}", p.display())))?;
            ExperimentSpec::from_json(&text)?
        }
        None if cli.command.is_none() => return Err(Error::InvalidArgument("a subcommand or --config is required".into())),
        None => ExperimentSpec::default(),
    };
    let set_args = |spec: &mut ExperimentSpec, a: SetArgs| {
        if a.enumerate.is_some() {
            spec.enumerate = a.enumerate;
        }
        set_vec(&mut spec.sets, a.sets);
        set_if(&mut spec.method, a.method.map(SolverMethodName));
    };
    match cli.command {
        None => {}
        Some(Cmd::Verify(a)) => {
            spec.command = Command::Verify;
            set_args(&mut spec, a);
        }
        Some(Cmd::Spectral(a)) => {
            spec.command = Command::Spectral;
            set_args(&mut spec, a);
        }
        Some(Cmd::Lemmas { draws, grid, c, instances, jensen, sets, functions }) => {
            spec.command = Command::Lemmas;
            set_if(&mut spec.draws, draws);
            set_if(&mut spec.grid, grid);
            set_if(&mut spec.c, c);
            set_if(&mut spec.instances, instances);
            set_if(&mut spec.jensen, jensen);
            set_vec(&mut spec.sets, sets);
            set_vec(&mut spec.functions, functions);
        }
        Some(Cmd::Mix { family, n, theta, eps, sets }) => {
            spec.command = Command::Mix;
            if family.is_some() {
                spec.family = family;
            }
            set_vec(&mut spec.n, n);
            set_if(&mut spec.theta, theta);
            set_if(&mut spec.epsilon, eps);
            set_vec(&mut spec.sets, sets);
        }
        Some(Cmd::Simulate { set, start, steps, chains, theta }) => {
            spec.command = Command::Simulate;
            set_vec(&mut spec.sets, set.into_iter().collect());
            if start.is_some() {
                spec.start = start;
            }
            if steps.is_some() {
                spec.steps = steps;
            }
            set_if(&mut spec.chains, chains);
            set_if(&mut spec.theta, theta);
        }
        Some(Cmd::Enumerate { n, list }) => {
            spec.command = Command::Enumerate;
            spec.enumerate = Some(n);
            spec.list |= list;
        }
    }
    let c = cli.common;
    set_if(&mut spec.seed, c.seed);
    if c.tol.is_some() {
        spec.tol = c.tol;
    }
    set_if(&mut spec.format, c.format);
    if c.out.is_some() {
        spec.out = c.out;
    }
    if c.svg.is_some() {
        spec.svg = c.svg;
    }
    Ok(spec)
}

fn configure_threads() -> Result<()> {
    let Ok(v) = std::env::var(THREADS_VAR) else { return Ok(()) };
    let n: usize = v.parse().map_err(|_| Error::InvalidArgument(format!("{THREADS_VAR}={v:?} is not a thread count")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))
}

fn write(path: &Option<PathBuf>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::InvalidArgument(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = configure_threads().and_then(|_| build_spec(cli)).and_then(|spec| {
        let outcome = report::run(&spec)?;
        write(&spec.out, &outcome.body)?;
        if let (Some(p), Some(svg)) = (&spec.svg, &outcome.svg) {
            write(&Some(p.clone()), svg)?;
        }
        Ok(outcome)
    });
    match result {
        Ok(o) if o.passed() => ExitCode::SUCCESS,
        Ok(o) => {
            eprintln!("violation: {} check(s) failed in suite {}", o.certificate.failures, o.certificate.suite);
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_violation() { 2 } else { 1 })
        }
    }
}
