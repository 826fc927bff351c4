//! `iqpe`: Monte Carlo sweeps, single traced runs and the ideal-case theory
//! table for noisy two-qubit iterative phase estimation.

use std::collections::BTreeMap;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{CommandFactory, Parser, Subcommand};
use iqpe_core::gates::{calibrate_a, sample_disorder, CalibrationConvention};
use iqpe_core::iqpe::{estimate_phase, Engine, RunConfig};
use iqpe_core::sweep::{
    derive_substream, linear_grid, parse_key_values, run_sweep, run_sweep_with_threads,
    to_csv_string, write_csv, Coupling, Scenario, SweepSpec,
};
use iqpe_core::theory::{
    expected_ideal_success, p_total, success_sum, EIGHT_OVER_PI_SQ, FOUR_OVER_PI_SQ,
};
use iqpe_core::Error;

#[derive(Parser, Debug)]
#[command(
    name = "iqpe",
    version,
    about = "Noisy two-qubit iterative phase estimation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Success rate over a grid of error strengths, as CSV.
    Sweep(SweepArgs),
    /// One run with its per-step trace.
    Run(RunArgs),
    /// Ideal success probabilities from the closed form.
    Theory(TheoryArgs),
}

#[derive(clap::Args, Debug, Default)]
struct SweepArgs {
    /// ideal, rnd_h, rnd_rz, rnd_cu, rnd_all, static, static_plus_rnd, parec, parec_noisy
    #[arg(long)]
    scenario: Option<String>,
    #[arg(long)]
    eps_min: Option<f64>,
    #[arg(long)]
    eps_max: Option<f64>,
    #[arg(long)]
    eps_steps: Option<usize>,
    /// equal, fifth or static-only
    #[arg(long)]
    coupling: Option<String>,
    #[arg(long)]
    m: Option<u32>,
    #[arg(long)]
    samples: Option<u64>,
    /// PAREC pulse pairs per gap
    #[arg(long)]
    np: Option<u32>,
    #[arg(long)]
    seed: Option<u64>,
    /// published, strict or half-width
    #[arg(long)]
    a_convention: Option<String>,
    /// Worker threads (default: all cores). Output does not depend on it.
    #[arg(long)]
    threads: Option<usize>,
    /// Write CSV here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    /// File of `key = value` lines using the flag names; flags win
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(clap::Args, Debug)]
struct RunArgs {
    #[arg(long)]
    phi: f64,
    #[arg(long, default_value_t = 10)]
    m: u32,
    #[arg(long, default_value = "ideal")]
    scenario: String,
    /// Error strength, split into (ε₁, ε₂) by --coupling
    #[arg(long, default_value_t = 0.0)]
    eps: f64,
    #[arg(long, default_value = "equal")]
    coupling: String,
    #[arg(long, default_value_t = 1)]
    np: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "published")]
    a_convention: String,
}

#[derive(clap::Args, Debug)]
struct TheoryArgs {
    #[arg(long, default_value_t = 10)]
    m: u32,
    /// Points on the δ grid over [0, 1]; odd counts include δ = 1/2
    #[arg(long, default_value_t = 11)]
    delta_steps: usize,
}

fn sweep_spec(args: &SweepArgs) -> Result<(SweepSpec, Option<usize>, Option<PathBuf>), Error> {
    let file = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
                path: path.clone(),
                source,
            })?;
            parse_key_values(&text)?
        }
        None => BTreeMap::new(),
    };
    const KNOWN: [&str; 12] = [
        "scenario",
        "eps-min",
        "eps-max",
        "eps-steps",
        "coupling",
        "m",
        "samples",
        "np",
        "seed",
        "a-convention",
        "threads",
        "out",
    ];
    if let Some(key) = file.keys().find(|k| !KNOWN.contains(&k.as_str())) {
        return Err(Error::Config(format!("unknown config key '{key}'")));
    }

    fn pick<T: FromStr>(
        flag: Option<T>,
        file: &BTreeMap<String, String>,
        key: &str,
    ) -> Result<Option<T>, Error> {
        match (flag, file.get(key)) {
            (Some(v), _) => Ok(Some(v)),
            (None, Some(raw)) => raw
                .parse()
                .map(Some)
                .map_err(|_| Error::Config(format!("config key '{key}': cannot parse '{raw}'"))),
            (None, None) => Ok(None),
        }
    }

    let scenario: Scenario = pick(args.scenario.clone(), &file, "scenario")?
        .as_deref()
        .unwrap_or("ideal")
        .parse()?;
    let np = pick(args.np, &file, "np")?;
    let scenario = match (scenario, np) {
        (s @ Scenario::Parec { .. }, Some(n)) => s.with_n_p(n),
        (_, Some(_)) => {
            return Err(Error::Config(format!(
                "--np applies only to parec scenarios, not {scenario}"
            )))
        }
        (s, None) => s,
    };
    let eps_min = pick(args.eps_min, &file, "eps-min")?.unwrap_or(0.0);
    let eps_max = pick(args.eps_max, &file, "eps-max")?.unwrap_or(0.4);
    let eps_steps = pick(args.eps_steps, &file, "eps-steps")?.unwrap_or(9);

    let mut spec = SweepSpec::new(scenario, linear_grid(eps_min, eps_max, eps_steps)?);
    if let Some(c) = pick(args.coupling.clone(), &file, "coupling")? {
        spec.coupling = c.parse::<Coupling>()?;
    }
    if let Some(m) = pick(args.m, &file, "m")? {
        spec.m = m;
    }
    if let Some(n) = pick(args.samples, &file, "samples")? {
        spec.n_samples = n;
    }
    if let Some(seed) = pick(args.seed, &file, "seed")? {
        spec.seed = seed;
    }
    if let Some(a) = pick(args.a_convention.clone(), &file, "a-convention")? {
        spec.a_convention = a.parse::<CalibrationConvention>()?;
    }
    let threads = pick(args.threads, &file, "threads")?;
    if threads == Some(0) {
        return Err(Error::Config("threads must be at least 1".into()));
    }
    let out = pick(args.out.clone(), &file, "out")?;
    spec.validate()?;
    Ok((spec, threads, out))
}

fn sweep(args: &SweepArgs) -> Result<(), Error> {
    let (spec, threads, out) = sweep_spec(args)?;
    let records = match threads {
        Some(t) => run_sweep_with_threads(&spec, t)?,
        None => run_sweep(&spec)?,
    };
    match out {
        Some(path) => write_csv(&records, &path),
        None => io::stdout()
            .write_all(to_csv_string(&records).as_bytes())
            .map_err(|source| Error::Io {
                path: PathBuf::from("<stdout>"),
                source,
            }),
    }
}

fn run(args: &RunArgs) -> Result<(), Error> {
    let scenario = args.scenario.parse::<Scenario>()?.with_n_p(args.np);
    let coupling: Coupling = args.coupling.parse()?;
    let convention: CalibrationConvention = args.a_convention.parse()?;
    let (eps1, eps2) = coupling.split(args.eps);
    let (noise, epsilon2, gap_policy) = scenario.resolve(eps1, eps2);
    let cfg = RunConfig {
        noise,
        epsilon2,
        a: calibrate_a(convention),
        gap_policy,
        ..RunConfig::ideal(args.m, args.phi)
    };
    cfg.validate()?;

    let mut rng = derive_substream(args.seed, &[]);
    let disorder = sample_disorder(cfg.epsilon2, cfg.a, &mut rng);
    let (result, _) = Engine::new(&cfg, disorder).run(&mut rng)?;

    println!(
        "# scenario {scenario} eps1 {eps1} eps2 {epsilon2} m {} phi {}",
        cfg.m, cfg.phi
    );
    println!(
        "# disorder d1 {:.6} d2 {:.6} j {:.6}",
        result.disorder.d1, result.disorder.d2, result.disorder.j
    );
    println!("step,omega,bit");
    for r in &result.trace {
        println!("{},{:.12},{}", r.step, r.omega, r.bit);
    }
    println!(
        "# estimate {} phi_hat {:.12} success {}",
        result.estimate,
        estimate_phase(&result.bits, cfg.m)?,
        result.success
    );
    Ok(())
}

fn theory(args: &TheoryArgs) -> Result<(), Error> {
    if !(1..=52).contains(&args.m) {
        return Err(Error::Config(format!(
            "m must be in 1..=52, got {}",
            args.m
        )));
    }
    let grid = linear_grid(0.0, 1.0, args.delta_steps)?;
    println!("delta,p_total,success_sum");
    for d in grid {
        println!(
            "{d:.6},{:.12},{:.12}",
            p_total(d, args.m),
            success_sum(d, args.m)
        );
    }
    println!(
        "# expected_ideal_success {:.12}",
        expected_ideal_success(args.m)
    );
    println!("# four_over_pi_sq {FOUR_OVER_PI_SQ:.12}");
    println!("# eight_over_pi_sq {EIGHT_OVER_PI_SQ:.12}");
    Ok(())
}

fn is_usage_error(e: &Error) -> bool {
    matches!(e, Error::Config(_) | Error::PhaseOutOfRange(_))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, outcome) = match &cli.command {
        Command::Sweep(a) => ("sweep", sweep(a)),
        Command::Run(a) => ("run", run(a)),
        Command::Theory(a) => ("theory", theory(a)),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if is_usage_error(&e) => {
            eprintln!("error: {e}");
            let mut cmd = Cli::command();
            cmd.build();
            if let Some(sub) = cmd.find_subcommand_mut(name) {
                eprintln!("{}", sub.render_usage());
            }
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
