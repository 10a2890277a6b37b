//! `mlab`: command-line front end for the multiplier laboratory.
//!
//! Exit status: 0 on success, 1 when a scientific prediction fails, 2 on
//! invalid input.

mod commands;
mod config;
mod error;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use commands::{
    BesselParams, Context, FieldKind, HormanderParams, InequalityParams, LemmaChoice, NormKind,
    NormParams, Output, SharpnessParams,
};
use config::{override_fields, parse_grid, ConfigFile, GridConfig, RunConfig, DEFAULT_GRID};
use error::CliError;

#[derive(Parser, Debug)]
#[command(name = "mlab", version, about = "Fourier multiplier laboratory on Hardy and Lorentz-Sobolev spaces")]
struct Cli {
    /// Grid as `dim,L,N`: dimension, half-width and samples per axis.
    #[arg(long, global = true, value_parser = parse_grid)]
    grid: Option<GridConfig>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// JSON envelope output (the default).
    #[arg(long, global = true, conflicts_with = "csv")]
    json: bool,
    /// CSV table output.
    #[arg(long, global = true)]
    csv: bool,
    /// JSON run configuration; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Record wall-clock time in the envelope (output is then not reproducible).
    #[arg(long, global = true)]
    timing: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Norm of a built-in field.
    Norm(NormArgs),
    /// Sharpness sweep for the counterexample family.
    Sharpness(SharpnessArgs),
    /// Positivity and decay constants of Bessel-type kernels.
    Bessel(BesselArgs),
    /// Randomized inequality checkers.
    Inequalities(InequalityArgs),
    /// Windowed Hormander norm of the counterexample symbol.
    Hormander(HormanderArgs),
}

fn parse_pair(text: &str) -> Result<[f64; 2], String> {
    let v: Vec<f64> = text
        .split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|e| e.to_string()))
        .collect::<Result<_, _>>()?;
    match v.as_slice() {
        [a] => Ok([*a, 0.0]),
        [a, b] => Ok([*a, *b]),
        _ => Err(format!("expected x or x,y, got '{text}'")),
    }
}

#[derive(Args, Debug)]
struct NormArgs {
    #[arg(long, value_enum)]
    field: Option<FieldKind>,
    #[arg(long, value_enum)]
    norm: Option<NormKind>,
    #[arg(long)]
    p: Option<f64>,
    /// Secondary Lorentz index; `inf` is accepted.
    #[arg(long)]
    q: Option<f64>,
    #[arg(long)]
    s: Option<f64>,
    #[arg(long)]
    t: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    frequency: Option<f64>,
    #[arg(long, value_parser = parse_pair)]
    cube_center: Option<[f64; 2]>,
    #[arg(long)]
    cube_side: Option<f64>,
    #[arg(long)]
    atom_p: Option<f64>,
}

#[derive(Args, Debug)]
struct SharpnessArgs {
    #[arg(long)]
    case: Option<u8>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    s: Option<f64>,
    #[arg(long)]
    r: Option<f64>,
    #[arg(long)]
    q: Option<f64>,
}

#[derive(Args, Debug)]
struct BesselArgs {
    #[arg(long)]
    s: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
}

#[derive(Args, Debug)]
struct InequalityArgs {
    #[arg(long, value_enum)]
    lemma: Option<LemmaChoice>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    q: Option<f64>,
    #[arg(long)]
    r: Option<f64>,
    #[arg(long)]
    t: Option<f64>,
    #[arg(long)]
    s: Option<f64>,
    #[arg(long)]
    q_conv: Option<f64>,
    #[arg(long)]
    q_inner: Option<f64>,
    #[arg(long)]
    family_size: Option<usize>,
    #[arg(long)]
    p0: Option<f64>,
    #[arg(long)]
    r0: Option<f64>,
    #[arg(long)]
    s0: Option<f64>,
    #[arg(long)]
    p1: Option<f64>,
    #[arg(long)]
    r1: Option<f64>,
    #[arg(long)]
    s1: Option<f64>,
    /// Bump profile for the Kato-Ponce weight (psi, theta, phi, ...).
    #[arg(long)]
    profile: Option<String>,
    /// Append reports to this JSON-lines file.
    #[arg(long)]
    ledger: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct HormanderArgs {
    #[arg(long)]
    t: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    s: Option<f64>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    q: Option<f64>,
    #[arg(long)]
    p_hardy: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    j_lo: Option<i32>,
    #[arg(long, allow_hyphen_values = true)]
    j_hi: Option<i32>,
    #[arg(long, value_parser = parse_grid)]
    piece_grid: Option<GridConfig>,
}

struct Resolved<P> {
    name: &'static str,
    config: RunConfig<P>,
}

fn resolve<P: Default + for<'de> serde::Deserialize<'de>>(
    cli: &Cli,
    file: &ConfigFile,
    name: &'static str,
    apply: impl FnOnce(&mut P) -> Result<(), CliError>,
) -> Result<Resolved<P>, CliError> {
    let mut params: P = file.params()?;
    apply(&mut params)?;
    Ok(Resolved {
        name,
        config: RunConfig {
            grid: cli.grid.or(file.grid).unwrap_or(DEFAULT_GRID),
            seed: cli.seed.or(file.seed).unwrap_or(0),
            output_path: cli.out.clone().or_else(|| file.output_path.clone()),
            params,
        },
    })
}

fn execute<P: Serialize>(
    cli: &Cli,
    resolved: Resolved<P>,
    run: impl FnOnce(Context, &P) -> Result<Output, CliError>,
) -> Result<bool, CliError> {
    let cfg = &resolved.config;
    cfg.grid.spec()?;
    let start = Instant::now();
    let output = run(
        Context {
            grid: cfg.grid,
            seed: cfg.seed,
        },
        &cfg.params,
    )?;
    let elapsed = start.elapsed().as_secs_f64();
    let mut bytes = Vec::new();
    if cli.csv {
        let mut w = csv::Writer::from_writer(&mut bytes);
        let mut header = output.table.header.clone();
        header.extend(["dim", "L", "N", "seed"].map(String::from));
        w.write_record(&header)?;
        for row in &output.table.rows {
            let mut row = row.clone();
            row.extend([
                cfg.grid.dim.to_string(),
                cfg.grid.half_width.to_string(),
                cfg.grid.samples.to_string(),
                cfg.seed.to_string(),
            ]);
            w.write_record(&row)?;
        }
        w.flush()?;
    } else {
        let timing = if cli.timing {
            json!({ "elapsed_seconds": elapsed })
        } else {
            serde_json::Value::Null
        };
        let envelope = json!({
            "command": resolved.name,
            "config": cfg,
            "result": output.result,
            "timing": timing,
        });
        serde_json::to_writer_pretty(&mut bytes, &envelope)?;
        bytes.push(b'\n');
    }
    match &cfg.output_path {
        Some(path) => std::fs::write(path, &bytes)?,
        None => std::io::stdout().lock().write_all(&bytes)?,
    }
    Ok(output.matched)
}

fn dispatch(cli: &Cli) -> Result<bool, CliError> {
    let file = match &cli.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    match &cli.command {
        Command::Norm(a) => {
            let r = resolve(cli, &file, "norm", |p: &mut NormParams| {
                override_fields!(p, a; field, norm, p, q, s, t, gamma, frequency, cube_center, cube_side, atom_p);
                Ok(())
            })?;
            execute(cli, r, commands::norm)
        }
        Command::Sharpness(a) => {
            let r = resolve(cli, &file, "sharpness", |p: &mut SharpnessParams| {
                override_fields!(p, a; case, p, s, r, q);
                if a.n.is_some() {
                    p.n = a.n;
                }
                Ok(())
            })?;
            execute(cli, r, commands::sharpness)
        }
        Command::Bessel(a) => {
            let r = resolve(cli, &file, "bessel", |p: &mut BesselParams| {
                override_fields!(p, a; s);
                if a.gamma.is_some() {
                    p.gamma = a.gamma;
                }
                Ok(())
            })?;
            execute(cli, r, commands::bessel)
        }
        Command::Inequalities(a) => {
            let r = resolve(cli, &file, "inequalities", |p: &mut InequalityParams| {
                override_fields!(p, a; lemma, trials);
                macro_rules! opt {
                    ($($f:ident),*) => { $( if a.$f.is_some() { p.$f = a.$f.clone(); } )* };
                }
                opt!(p, q, r, t, s, q_conv, q_inner, family_size, p0, r0, s0, p1, r1, s1, ledger);
                if let Some(name) = &a.profile {
                    p.profile = serde_json::from_value(serde_json::Value::String(name.clone()))
                        .map_err(|_| CliError::Validation(format!("unknown profile '{name}'")))?;
                }
                Ok(())
            })?;
            execute(cli, r, commands::inequalities)
        }
        Command::Hormander(a) => {
            let r = resolve(cli, &file, "hormander", |p: &mut HormanderParams| {
                override_fields!(p, a; t, gamma, s, q, p_hardy);
                macro_rules! opt {
                    ($($f:ident),*) => { $( if a.$f.is_some() { p.$f = a.$f; } )* };
                }
                opt!(p, j_lo, j_hi, piece_grid);
                Ok(())
            })?;
            execute(cli, r, commands::hormander)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("prediction not matched");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("mlab: {e}");
            ExitCode::from(2)
        }
    }
}
