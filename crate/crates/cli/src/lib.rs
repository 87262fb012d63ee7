//! Command-line front end for the repeater simulator: single-point protocol runs,
//! parameter sweeps and figure data, all in dimensionless units (λ₁ = 1).

pub mod commands;
pub mod config;
pub mod error;
pub mod presets;
pub mod sweep;

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use repeater_core::ModelParams;

pub use config::{parse_config, parse_grid, GridSpec, Quantity, Settings};
pub use error::{CliError, Result};
pub use presets::Figure;
pub use sweep::{run_sweep, SweepConfig};

pub const EXIT_OK: u8 = 0;
pub const EXIT_USAGE: u8 = 1;
pub const EXIT_CHECK_FAILED: u8 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "repeater",
    version,
    about = "Three-stage atomic quantum repeater simulator"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evolve one optomechanical stage and print its readout table
    StageA(Flags),
    /// Run the whole protocol at one (t, tau) point and print the branch tree
    Protocol(Flags),
    /// Sweep one quantity over a parameter grid and write CSV
    Sweep(SweepFlags),
    /// E14 and P14_1 against lambda1 t for three mechanical frequencies
    Fig2(Flags),
    /// E14 and P14_1 against lambda1 t for three radiation-pressure couplings
    Fig3(Flags),
    /// P14_2 against lambda1 t, both parameter families
    Fig4(Flags),
    /// E18 and P18 for all cases against lambda1 tau, three mechanical frequencies
    Fig5(Flags),
    /// E18 and P18 for all cases against lambda1 tau, three radiation-pressure couplings
    Fig6(Flags),
}

#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// Mechanical frequency omega_m/lambda1 (grid spec: v | v1,v2 | a:b | a:b:n)
    #[arg(long, value_name = "GRID", value_parser = parse_grid)]
    pub omega_m: Option<GridSpec>,
    /// Radiation-pressure coupling G/lambda1 (grid spec)
    #[arg(long, value_name = "GRID", value_parser = parse_grid)]
    pub g: Option<GridSpec>,
    /// Stage-A interaction time lambda1 t (grid spec)
    #[arg(long = "lambda1-t", value_name = "GRID", value_parser = parse_grid)]
    pub lambda1_t: Option<GridSpec>,
    /// Stage-B readout time lambda1 tau, measured from zero (grid spec)
    #[arg(long = "lambda1-tau", value_name = "GRID", value_parser = parse_grid)]
    pub lambda1_tau: Option<GridSpec>,
    /// Stage-B case 1..4 (all four when omitted)
    #[arg(long = "case", value_name = "N", value_parser = config::parse_case)]
    pub case_id: Option<u8>,
    /// Points for ranges given without a count [default: 400]
    #[arg(long, value_name = "N", value_parser = clap::value_parser!(u64).range(1..))]
    pub points: Option<u64>,
    /// Output file (stdout when omitted)
    #[arg(long, short, value_name = "PATH")]
    pub output: Option<PathBuf>,
    /// key = value config file; flags take precedence
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Run and report the invariant checks
    #[arg(long)]
    pub check: bool,
    /// Worker threads for sweeps [default: all cores]
    #[arg(long, value_name = "N", value_parser = clap::value_parser!(u64).range(1..))]
    pub threads: Option<u64>,
}

#[derive(Debug, Clone, Args)]
pub struct SweepFlags {
    /// E14, P14_1, P14_2, E18, P18 or tree
    #[arg(long, value_name = "NAME")]
    pub quantity: Option<Quantity>,
    #[command(flatten)]
    pub flags: Flags,
}

impl Flags {
    fn settings(&self) -> Settings {
        Settings {
            quantity: None,
            case_id: self.case_id,
            omega_m: self.omega_m.clone(),
            g: self.g.clone(),
            lambda1_t: self.lambda1_t.clone(),
            lambda1_tau: self.lambda1_tau.clone(),
            points: self.points.map(|n| n as usize),
            output: self.output.clone(),
            threads: self.threads.map(|n| n as usize),
            check: self.check.then_some(true),
        }
    }

    /// Config file first, flags on top.
    pub fn effective(&self) -> Result<Settings> {
        let base = match &self.config {
            Some(path) => config::load_config(path)?,
            None => Settings::default(),
        };
        Ok(base.overridden_by(self.settings()))
    }
}

fn scalar(grid: &Option<GridSpec>, name: &str, default: f64) -> Result<f64> {
    match grid {
        None => Ok(default),
        Some(g) => g
            .scalar()
            .ok_or_else(|| CliError::usage(format!("{name} takes a single value here"))),
    }
}

/// Defaults for single-point runs.
pub const DEFAULT_OMEGA_M: f64 = 0.5;
pub const DEFAULT_G: f64 = 2.0;
pub const DEFAULT_T: f64 = 1.0;
pub const DEFAULT_TAU: f64 = 2.0;

fn single_point(s: &Settings) -> Result<(ModelParams, f64, f64)> {
    let params = ModelParams::dimensionless(
        scalar(&s.omega_m, "omega_m", DEFAULT_OMEGA_M)?,
        scalar(&s.g, "g", DEFAULT_G)?,
    )?;
    let t = scalar(&s.lambda1_t, "lambda1_t", DEFAULT_T)?;
    let tau = scalar(&s.lambda1_tau, "lambda1_tau", DEFAULT_TAU.max(t))?;
    Ok((params, t, tau))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|source| CliError::File {
            path: path.display().to_string(),
            source,
        })
}

fn run_sweeps(
    configs: &[SweepConfig],
    s: &Settings,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<u8> {
    let rows = sweep::compute_rows(configs, s.threads)?;
    match &s.output {
        Some(path) => {
            let mut file = create(path)?;
            sweep::write_csv(&mut file, configs, &rows)?;
            file.flush()?;
            writeln!(err, "wrote {} rows to {}", rows.len(), path.display())?;
        }
        None => sweep::write_csv(&mut *out, configs, &rows)?,
    }
    if s.check.unwrap_or(false) {
        let dev = sweep::check_rows(&rows, s.threads)?;
        let pass = dev <= sweep::CHECK_TOLERANCE;
        writeln!(
            err,
            "{} stage identities over {} points (max deviation {dev:.3e}, tolerance {:.0e})",
            if pass { "PASS" } else { "FAIL" },
            rows.len(),
            sweep::CHECK_TOLERANCE
        )?;
        if !pass {
            return Ok(EXIT_CHECK_FAILED);
        }
    }
    Ok(EXIT_OK)
}

fn dispatch(command: &Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<u8> {
    match command {
        Command::StageA(f) => {
            let s = f.effective()?;
            if s.lambda1_tau.is_some() || s.case_id.is_some() {
                return Err(CliError::usage("stage-a takes no lambda1_tau or case"));
            }
            let (params, t, _) = single_point(&s)?;
            let ok = commands::stage_a(out, &params, t, s.check.unwrap_or(false))?;
            Ok(if ok { EXIT_OK } else { EXIT_CHECK_FAILED })
        }
        Command::Protocol(f) => {
            let s = f.effective()?;
            if s.case_id.is_some() {
                return Err(CliError::usage("protocol runs all cases; drop --case"));
            }
            let (params, t, tau) = single_point(&s)?;
            let run = commands::protocol(&params, t, tau)?;
            if let Some(path) = &s.output {
                let mut file = create(path)?;
                commands::write_branch_table(&mut file, &run.tree)?;
                file.flush()?;
            }
            commands::print_protocol(out, &run, s.output.is_none(), s.check.unwrap_or(false))?;
            Ok(if run.passed() {
                EXIT_OK
            } else {
                EXIT_CHECK_FAILED
            })
        }
        Command::Sweep(sf) => {
            let file_and_flags = sf.flags.effective()?;
            let s = Settings {
                quantity: sf.quantity.or(file_and_flags.quantity),
                ..file_and_flags
            };
            let quantity = s.quantity.ok_or_else(|| {
                CliError::usage("sweep needs --quantity (or quantity = in the config)")
            })?;
            let missing = |name: &str| CliError::usage(format!("sweep needs a {name} grid"));
            let config = SweepConfig {
                quantity,
                case_id: s.case_id,
                lambda1_t: s.lambda1_t.clone().ok_or_else(|| missing("lambda1_t"))?,
                lambda1_tau: s.lambda1_tau.clone(),
                omega_m: s.omega_m.clone().ok_or_else(|| missing("omega_m"))?,
                g: s.g.clone().ok_or_else(|| missing("g"))?,
                points: s.points_or_default(),
            };
            run_sweeps(std::slice::from_ref(&config), &s, out, err)
        }
        Command::Fig2(f)
        | Command::Fig3(f)
        | Command::Fig4(f)
        | Command::Fig5(f)
        | Command::Fig6(f) => {
            let figure = match command {
                Command::Fig2(_) => Figure::Fig2,
                Command::Fig3(_) => Figure::Fig3,
                Command::Fig4(_) => Figure::Fig4,
                Command::Fig5(_) => Figure::Fig5,
                _ => Figure::Fig6,
            };
            let s = f.effective()?;
            let configs = presets::figure_sweeps(figure, &s)?;
            run_sweeps(&configs, &s, out, err)
        }
    }
}

/// Parses `args` (program name first) and runs the command. Returns the exit code:
/// 0 success, 1 usage or input error, 2 failed invariant check.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(err, "{}", e.render());
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match dispatch(&cli.command, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_USAGE
        }
    }
}
