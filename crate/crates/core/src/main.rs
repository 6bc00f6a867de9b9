use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use ffrestrict::experiments::{
    config::{ExperimentConfig, MeasureChoice, Mode, OutputFormat},
    emit::{salem_csv, sweep_csv, ResultsDocument},
    run_boundedness, run_salem, run_sharpness,
};
use ffrestrict::measures::{
    bohr_set, combined_measure, cube_set, indicator_measure, paraboloid_set, random_set,
    spectral_report, support_decay_check, uniform_measure, Measure, DEFAULT_BOHR_RATIO,
};
use ffrestrict::restriction::{rstar_2_2_exact, rstar_lower_iterate_with, rstar_witness_cube};
use ffrestrict::selftest::fourier_identities;
use ffrestrict::stein_tomas::kernel_bounds;
use ffrestrict::{Error, Exponent, Field, Result};

/// Tolerance the selftest subcommand holds the Fourier identities to.
const SELFTEST_TOLERANCE: f64 = 1e-9;

#[derive(Parser, Debug)]
#[command(name = "ffrestrict", version, about = "Restriction estimates over prime fields")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check the Fourier identities on random inputs.
    Selftest {
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Build a set or measure at one prime and write it out.
    Construct(ConstructArgs),
    /// Regularity, decay and kernel diagnostics of a measure at one prime.
    Diagnose(SingleArgs),
    /// Operator-norm estimates for R*(2→q) at one prime.
    Rstar(RstarArgs),
    /// Growth of the cube-witness lower bound below the critical exponent.
    Sharpness(SweepArgs),
    /// Power-iteration lower bounds at or above the critical exponent.
    Boundedness(SweepArgs),
    /// Spectral flatness of random sets.
    Salem(SweepArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ConstructKind {
    Cube,
    Random,
    Combined,
    Bohr,
    Paraboloid,
    Uniform,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum DiagnoseKind {
    Combined,
    Uniform,
    Paraboloid,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Args, Debug)]
struct ConstructArgs {
    #[arg(long)]
    kind: ConstructKind,
    #[command(flatten)]
    single: SingleArgs,
}

#[derive(Args, Debug, Clone)]
struct SingleArgs {
    /// Field size (prime).
    #[arg(long)]
    p: u64,
    #[arg(long, default_value_t = 1)]
    n: usize,
    #[arg(long, default_value_t = 0.6)]
    alpha: f64,
    #[arg(long, default_value_t = 0.4)]
    beta: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = DiagnoseKind::Combined)]
    measure: DiagnoseKind,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct RstarArgs {
    #[command(flatten)]
    single: SingleArgs,
    /// Target exponents; comma separated, `inf` allowed.
    #[arg(long, value_delimiter = ',', default_values_t = vec![Exponent::Finite(3.0), Exponent::Infinite])]
    q: Vec<Exponent>,
    #[arg(long, default_value_t = 8)]
    restarts: usize,
    #[arg(long, default_value_t = 500)]
    max_iterations: usize,
    #[arg(long, default_value_t = 1e-10)]
    tolerance: f64,
    /// Dump the best witness for each q here, as `<path>.q<q>.txt`.
    #[arg(long)]
    witness_out: Option<PathBuf>,
}

#[derive(Args, Debug, Default)]
struct SweepArgs {
    /// JSON file with an experiment config; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    q: Option<Vec<Exponent>>,
    #[arg(long)]
    prime_min: Option<u64>,
    #[arg(long)]
    prime_max: Option<u64>,
    #[arg(long)]
    prime_count: Option<usize>,
    /// Seeds; comma separated or repeated.
    #[arg(long, value_delimiter = ',')]
    seed: Option<Vec<u64>>,
    #[arg(long)]
    restarts: Option<usize>,
    #[arg(long)]
    max_iterations: Option<usize>,
    #[arg(long)]
    tolerance: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long, value_enum)]
    measure: Option<SweepMeasure>,
    /// Also run the power iteration during sharpness sweeps.
    #[arg(long)]
    iterate: bool,
    /// Disable the weak-signal gates of sharpness sweeps.
    #[arg(long)]
    allow_weak_signal: bool,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SweepMeasure {
    Combined,
    Uniform,
}

impl SweepArgs {
    fn into_config(self, mode: Mode) -> Result<ExperimentConfig> {
        let mut c = match &self.config {
            Some(path) => ExperimentConfig::from_json_file(path)?,
            None => ExperimentConfig::default(),
        };
        c.mode = mode;
        if let Some(v) = self.n {
            c.n = v;
        }
        if let Some(v) = self.alpha {
            c.alpha = v;
        }
        if let Some(v) = self.beta {
            c.beta = v;
        }
        if let Some(v) = self.q {
            c.q_list = v;
        }
        if let Some(v) = self.prime_min {
            c.prime_min = v;
        }
        if let Some(v) = self.prime_max {
            c.prime_max = v;
        }
        if let Some(v) = self.prime_count {
            c.prime_count = v;
        }
        if let Some(v) = self.seed {
            c.seeds = v;
        }
        if let Some(v) = self.restarts {
            c.restarts = v;
        }
        if let Some(v) = self.max_iterations {
            c.max_iterations = v;
        }
        if let Some(v) = self.tolerance {
            c.tolerance = v;
        }
        if let Some(v) = self.epsilon {
            c.epsilon = v;
        }
        if let Some(v) = self.measure {
            c.measure = match v {
                SweepMeasure::Combined => MeasureChoice::Combined,
                SweepMeasure::Uniform => MeasureChoice::Uniform,
            };
        }
        c.iterate |= self.iterate;
        c.allow_weak_signal |= self.allow_weak_signal;
        if let Some(v) = self.output {
            c.output_path = Some(v);
        }
        if let Some(v) = self.format {
            c.format = match v {
                FormatArg::Csv => OutputFormat::Csv,
                FormatArg::Json => OutputFormat::Json,
            };
        }
        c.validate()?;
        Ok(c)
    }
}

fn write_output(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            w.write_all(text.as_bytes())?;
            w.flush()?;
        }
        None => io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn single_measure(args: &SingleArgs) -> Result<Measure> {
    let field = Field::new(args.p)?;
    match args.measure {
        DiagnoseKind::Uniform => uniform_measure(&field, args.n),
        DiagnoseKind::Paraboloid => indicator_measure(&paraboloid_set(&field, args.n)?),
        DiagnoseKind::Combined => {
            let a = cube_set(&field, args.n, args.alpha, args.beta)?;
            let e = random_set(&field, args.n, args.alpha, args.seed)?;
            combined_measure(&a, &e)
        }
    }
}

fn run_selftest(trials: usize, seed: u64, output: Option<&Path>) -> Result<bool> {
    let grids = [
        (3u64, 1usize),
        (3, 2),
        (5, 1),
        (5, 2),
        (7, 1),
        (7, 2),
        (101, 1),
        (101, 2),
        (13, 3),
    ];
    let mut ok = true;
    let mut reports = Vec::new();
    for (p, n) in grids {
        let rep = fourier_identities(p, n, trials, seed)?;
        let pass = rep.max_error() < SELFTEST_TOLERANCE;
        ok &= pass;
        eprintln!(
            "[{}] p={p} n={n}: plancherel={:.2e} inversion={:.2e} convolution={:.2e} symmetry={:.2e} methods={}",
            if pass { "PASS" } else { "FAIL" },
            rep.plancherel,
            rep.inversion,
            rep.convolution,
            rep.symmetry,
            rep.method_agreement.map_or("-".to_string(), |v| format!("{v:.2e}")),
        );
        reports.push(rep);
    }
    if let Some(path) = output {
        write_output(Some(path), &serde_json::to_string_pretty(&reports)?)?;
    }
    Ok(ok)
}

fn run_construct(args: &ConstructArgs) -> Result<()> {
    let s = &args.single;
    let field = Field::new(s.p)?;
    let mut buf = Vec::new();
    let meta = match args.kind {
        ConstructKind::Cube | ConstructKind::Bohr => {
            let a = cube_set(&field, s.n, s.alpha, s.beta)?;
            let set = if matches!(args.kind, ConstructKind::Bohr) {
                bohr_set(&a, DEFAULT_BOHR_RATIO)?
            } else {
                a
            };
            set.write_text(&mut buf)?;
            serde_json::to_value(set.meta())?
        }
        ConstructKind::Random => {
            let e = random_set(&field, s.n, s.alpha, s.seed)?;
            e.write_text(&mut buf)?;
            serde_json::to_value(e.meta())?
        }
        ConstructKind::Paraboloid => {
            let set = paraboloid_set(&field, s.n)?;
            set.write_text(&mut buf)?;
            serde_json::to_value(set.meta())?
        }
        ConstructKind::Combined | ConstructKind::Uniform => {
            let mu = if matches!(args.kind, ConstructKind::Uniform) {
                uniform_measure(&field, s.n)?
            } else {
                let a = cube_set(&field, s.n, s.alpha, s.beta)?;
                let e = random_set(&field, s.n, s.alpha, s.seed)?;
                combined_measure(&a, &e)?
            };
            mu.to_grid().write_text(&mut buf)?;
            serde_json::to_value(mu.meta())?
        }
    };
    write_output(s.output.as_deref(), std::str::from_utf8(&buf).expect("ascii output"))?;
    eprintln!("{}", serde_json::to_string(&meta)?);
    Ok(())
}

fn run_diagnose(args: &SingleArgs) -> Result<()> {
    let mu = single_measure(args)?;
    let report = spectral_report(&mu)?;
    let decay = support_decay_check(&report, &mu);
    let kernel = kernel_bounds(&mu, &report)?;
    let out = json!({
        "p": args.p,
        "n": args.n,
        "meta": mu.meta(),
        "spectral_report": report,
        "support_decay_check": decay,
        "kernel": kernel,
    });
    write_output(args.output.as_deref(), &(serde_json::to_string_pretty(&out)? + "\n"))
}

fn run_rstar(args: &RstarArgs) -> Result<()> {
    let s = &args.single;
    let mu = single_measure(s)?;
    let mut estimates = vec![rstar_2_2_exact(&mu)?];
    let opts = ffrestrict::restriction::IterOptions {
        max_iterations: args.max_iterations,
        tolerance: args.tolerance,
        restarts: args.restarts,
        seed: s.seed,
    };
    for &q in &args.q {
        if q.finite().is_some_and(|v| v <= 2.0) {
            continue;
        }
        estimates.push(rstar_lower_iterate_with(&mu, q, &opts)?);
        if mu.meta().cube_side.is_some() {
            estimates.push(rstar_witness_cube(&mu, q)?);
        }
    }
    if let Some(base) = &args.witness_out {
        for est in &estimates {
            let path = PathBuf::from(format!(
                "{}.{}.q{}.txt",
                base.display(),
                est.kind.as_str(),
                est.q
            ));
            write_output(Some(&path), &est.witness.to_text())?;
        }
    }
    let summaries: Vec<_> = estimates.iter().map(|e| e.summary()).collect();
    write_output(s.output.as_deref(), &(serde_json::to_string_pretty(&summaries)? + "\n"))
}

fn run_sweep(args: SweepArgs, mode: Mode) -> Result<()> {
    let config = args.into_config(mode)?;
    let start = Instant::now();
    if mode == Mode::Salem {
        let rows = run_salem(&config)?;
        let text = match config.format {
            OutputFormat::Csv => salem_csv(&rows),
            OutputFormat::Json => serde_json::to_string_pretty(&json!({
                "config": config,
                "generator": ffrestrict::measures::GENERATOR_NAME,
                "library_version": env!("CARGO_PKG_VERSION"),
                "wall_clock_seconds": start.elapsed().as_secs_f64(),
                "rows": rows,
            }))? + "\n",
        };
        let failures = rows.iter().filter(|r| !r.pass).count();
        eprintln!("salem: {failures} of {} draws exceed the bound", rows.len());
        return write_output(config.output_path.as_deref(), &text);
    }
    let report = match mode {
        Mode::Sharpness => run_sharpness(&config)?,
        Mode::Boundedness => run_boundedness(&config)?,
        _ => unreachable!("only sweep modes reach here"),
    };
    for r in &report.results {
        eprintln!(
            "q={} seed={}: slope={:.4} (predicted {:.4}), r^2={:.3}",
            r.q, r.seed, r.slope, r.slope_predicted, r.r_squared
        );
    }
    let text = match config.format {
        OutputFormat::Csv => sweep_csv(&report),
        OutputFormat::Json => {
            let doc = ResultsDocument::new(&config, report, start.elapsed().as_secs_f64());
            serde_json::to_string_pretty(&doc)? + "\n"
        }
    };
    write_output(config.output_path.as_deref(), &text)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result: Result<()> = match cli.command {
        Command::Selftest {
            trials,
            seed,
            output,
        } => match run_selftest(trials, seed, output.as_deref()) {
            Ok(true) => Ok(()),
            Ok(false) => Err(Error::Invariant("Fourier identity check failed".into())),
            Err(e) => Err(e),
        },
        Command::Construct(args) => run_construct(&args),
        Command::Diagnose(args) => run_diagnose(&args),
        Command::Rstar(args) => run_rstar(&args),
        Command::Sharpness(args) => run_sweep(args, Mode::Sharpness),
        Command::Boundedness(args) => run_sweep(args, Mode::Boundedness),
        Command::Salem(args) => run_sweep(args, Mode::Salem),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
