use std::io::Write;
use std::path::Path;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use hunter_profiles::exit::EXIT_CODE_HELP;
use hunter_profiles::{run, threads_from_env, CliError, Command, Context, Format, Rendered, RunConfig, THREADS_ENV};

#[derive(Parser)]
#[command(
    name = "hunter-profiles",
    version,
    about = "Self-similar collapse profiles of the polytropic Euler-Poisson system",
    after_help = EXIT_CODE_HELP
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Derived constants for one polytropic index, with identity checks.
    Params(Flags),
    /// Sonic-point data, normal form and series coefficients at --eps.
    Sonic(Flags),
    /// Scan eps for Hunter-type solutions. With --out DIR, writes the
    /// summary and one profile CSV per root into DIR.
    Shoot(Flags),
    /// Assemble the global profile at --eps.
    Profile(Flags),
    /// Lane-Emden interior solution and its tail fit.
    Laneemden(Flags),
    /// Homogeneous solution of the exterior linearization.
    Linear(Flags),
    /// Run the acceptance suite. Exits 1 if any criterion fails.
    Verify(Flags),
}

#[derive(Args)]
#[command(after_help = EXIT_CODE_HELP)]
struct Flags {
    /// Polytropic index, 1 < gamma < 6/5 (params also accepts 1) [default: 1.1]
    #[arg(long, allow_negative_numbers = true)]
    gamma: Option<f64>,
    /// Sonic-point parameter [default: 0 for sonic]
    #[arg(long, allow_negative_numbers = true)]
    eps: Option<f64>,
    /// Series truncation order, 2 to 40 [default: 10]
    #[arg(long)]
    order: Option<usize>,
    /// Integrator tolerance [default: 1e-11, laneemden 1e-12]
    #[arg(long)]
    tol: Option<f64>,
    /// Inner end of shooting, in units of y_f [default: 1e-10]
    #[arg(long)]
    ymin: Option<f64>,
    /// Outer end, in units of y_f [default: 1e3]; absolute for laneemden [default: 1e14]
    #[arg(long)]
    ymax: Option<f64>,
    /// Smallest |eps| scanned [default: 1e-6]
    #[arg(long)]
    scan_lo: Option<f64>,
    /// Largest |eps| scanned [default: 0.5]
    #[arg(long)]
    scan_hi: Option<f64>,
    /// Scan shots, or profile and table samples, per decade [default: 40]
    #[arg(long)]
    grid_per_decade: Option<usize>,
    /// Output file (a directory for shoot); stdout when absent
    #[arg(long)]
    out: Option<String>,
    /// csv or json [default depends on the command]
    #[arg(long)]
    format: Option<Format>,
    /// Flat key = value file with the same keys as the long flags
    #[arg(long)]
    config: Option<String>,
}

impl Flags {
    fn overrides(&self) -> RunConfig {
        RunConfig {
            gamma: self.gamma,
            eps: self.eps,
            order: self.order,
            tol: self.tol,
            ymin: self.ymin,
            ymax: self.ymax,
            scan_lo: self.scan_lo,
            scan_hi: self.scan_hi,
            grid_per_decade: self.grid_per_decade,
            out: self.out.clone(),
            format: self.format,
        }
    }
}

fn load(flags: &Flags) -> Result<RunConfig, CliError> {
    let base = match &flags.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|source| CliError::ConfigRead { path: path.clone(), source })?;
            RunConfig::parse_file(&text)?
        }
        None => RunConfig::default(),
    };
    Ok(base.merged(&flags.overrides()))
}

fn write(path: &Path, bytes: &str) -> Result<(), CliError> {
    std::fs::write(path, bytes).map_err(|source| CliError::Output { path: path.display().to_string(), source })
}

fn emit(cmd: Command, cfg: &RunConfig, r: &Rendered) -> Result<(), CliError> {
    let Some(out) = &cfg.out else {
        let mut stdout = std::io::stdout().lock();
        return match stdout.write_all(r.main.as_bytes()).and_then(|_| stdout.flush()) {
            // A reader that stops early, such as `head`, is not a failure.
            Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => {
                Err(CliError::Output { path: "stdout".into(), source: e })
            }
            _ => Ok(()),
        };
    };
    if cmd != Command::Shoot {
        return write(Path::new(out), &r.main);
    }
    let dir = Path::new(out);
    std::fs::create_dir_all(dir).map_err(|source| CliError::Output { path: out.clone(), source })?;
    let ext = cfg.format.unwrap_or(Format::Json).name();
    write(&dir.join(format!("summary.{ext}")), &r.main)?;
    for (name, body) in &r.files {
        write(&dir.join(name), body)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (cmd, flags) = match &cli.command {
        Cmd::Params(f) => (Command::Params, f),
        Cmd::Sonic(f) => (Command::Sonic, f),
        Cmd::Shoot(f) => (Command::Shoot, f),
        Cmd::Profile(f) => (Command::Profile, f),
        Cmd::Laneemden(f) => (Command::LaneEmden, f),
        Cmd::Linear(f) => (Command::Linear, f),
        Cmd::Verify(f) => (Command::Verify, f),
    };
    let result = (|| {
        let threads = threads_from_env(std::env::var(THREADS_ENV).ok().as_deref())?;
        let cfg = load(flags)?;
        let r = run(cmd, &cfg, &Context { threads })?;
        emit(cmd, &cfg, &r)?;
        if r.failed > 0 {
            return Err(CliError::VerifyFailed { failed: r.failed });
        }
        Ok(())
    })();
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("hunter-profiles: {e}");
            ExitCode::from(e.code())
        }
    }
}
