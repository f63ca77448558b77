//! Command-line front end: steady states, linear response, spectra and
//! stability maps written as CSV or JSON lines.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use optomech::params::PhysicalParams;
use optomech::spectra::VarianceGrid;
use optomech::sweep::{
    metadata, quadratic_table, response_tables, spectra_tables, stability_table, steady_table,
    variance_table, write_tables, BranchChoice, Fix, Format, OperatingPoint, ProbeGrid,
    RunOptions, SweepPoint, SweepSpec, SweepValues, SweepVariable, Table,
};
use optomech::{Error, Result};

#[derive(Parser, Debug)]
#[command(name = "optomech", version, about)]
struct Cli {
    /// JSON config with SI-unit fields named as in PhysicalParams.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file (stdout when omitted).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
    /// Worker threads for sweep points.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Steady-state branch: `auto` (stable, smallest |q_s|) or an index.
    #[arg(long, global = true, default_value = "auto")]
    branch: String,
    /// Write a single long-format table instead of one file per combination.
    #[arg(long, global = true)]
    long: bool,
    /// Embed a timestamp in the metadata line.
    #[arg(long, global = true)]
    timestamp: bool,
    #[arg(long, short, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum FormatArg {
    Csv,
    Jsonl,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum FixArg {
    Power,
    #[value(name = "G")]
    Coupling,
}

/// Sweep values: `a,b,c`, `lin:start:stop:count` or `geom:start:stop:count`.
/// Frequencies are in units of omega_m; power in W.
#[derive(Args, Debug, Clone)]
struct DriveArgs {
    /// Effective coupling values, units of omega_m (overrides the steady-state G).
    #[arg(long = "G", conflicts_with = "power")]
    coupling: Option<String>,
    /// Laser power values, W.
    #[arg(long)]
    power: Option<String>,
    /// Quadratic coupling values, units of omega_m.
    #[arg(long)]
    g2: Option<String>,
}

#[derive(Args, Debug, Clone)]
struct GridArgs {
    /// Lowest probe frequency, units of omega_m.
    #[arg(long, default_value_t = 0.01)]
    omega_min: f64,
    /// Highest probe frequency, units of omega_m.
    #[arg(long, default_value_t = 3.0)]
    omega_max: f64,
    #[arg(long, default_value_t = 2001)]
    points: usize,
}

impl GridArgs {
    fn grid(&self) -> Result<ProbeGrid> {
        if self.points == 0 || !(self.omega_min.is_finite() && self.omega_max.is_finite()) {
            return Err(Error::Config("probe grid needs finite bounds and >= 1 point".into()));
        }
        Ok(ProbeGrid {
            min: self.omega_min,
            max: self.omega_max,
            points: self.points,
        })
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Every steady-state branch, one row per branch.
    Steady {
        #[arg(long)]
        power: Option<String>,
        /// Bare detuning, units of omega_m.
        #[arg(long)]
        detuning0: Option<String>,
        /// Quadratic coupling, units of omega_m.
        #[arg(long)]
        g2: Option<String>,
    },
    /// Effective frequency, damping and susceptibility versus probe frequency.
    Response {
        #[command(flatten)]
        drive: DriveArgs,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Displacement and intracavity noise spectra.
    Spectra {
        #[command(flatten)]
        drive: DriveArgs,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Integrated position variance, one row per sweep point.
    Variance {
        #[command(flatten)]
        drive: DriveArgs,
        #[command(flatten)]
        grid: GridArgs,
        /// Simpson grid points per narrowest linewidth.
        #[arg(long, default_value_t = 16.0)]
        points_per_linewidth: f64,
    },
    /// Stability of every branch over a (detuning0, power) grid.
    StabilityMap {
        /// Bare detuning, units of omega_m.
        #[arg(long, default_value = "lin:-2:2:41")]
        detuning0: String,
        /// Laser power, W.
        #[arg(long, default_value = "geom:1e-4:1e-2:9")]
        power: String,
    },
    /// Effective frequency and damping versus quadratic coupling.
    QuadraticSweep {
        /// Quadratic coupling, units of omega_m.
        #[arg(long, default_value = "geom:1e-6:1e-2:9")]
        g2: String,
        #[arg(long, value_enum, default_value_t = FixArg::Power)]
        fix: FixArg,
        /// Coupling held fixed with `--fix G`, units of omega_m. Defaults to
        /// the steady-state value at g2 = 0.
        #[arg(long = "G")]
        coupling: Option<f64>,
        #[command(flatten)]
        grid: GridArgs,
    },
}

fn values(text: &str, scale: f64) -> Result<SweepValues> {
    Ok(SweepValues::parse(text)?.scaled(scale))
}

fn drive_specs(base: &PhysicalParams, drive: &DriveArgs, out: &Option<PathBuf>) -> Result<Vec<SweepSpec>> {
    let wm = base.omega_m;
    let g2s = match &drive.g2 {
        Some(t) => values(t, wm)?.resolve()?,
        None => vec![base.g2],
    };
    let (variable, vals) = match (&drive.coupling, &drive.power) {
        (Some(g), _) => (SweepVariable::Coupling, values(g, wm)?),
        (None, Some(p)) => (SweepVariable::Power, values(p, 1.0)?),
        (None, None) => (SweepVariable::Power, SweepValues::List(vec![base.power])),
    };
    Ok(g2s
        .into_iter()
        .map(|g2| SweepSpec {
            variable,
            values: vals.clone(),
            fixed: PhysicalParams { g2, ..*base },
            output_path: out.clone(),
        })
        .collect())
}

fn run(cli: &Cli) -> Result<Vec<PathBuf>> {
    let base = match &cli.config {
        Some(path) => PhysicalParams::from_path(path)?,
        None => PhysicalParams::default(),
    };
    let opts = RunOptions {
        format: match cli.format {
            FormatArg::Csv => Format::Csv,
            FormatArg::Jsonl => Format::Jsonl,
        },
        workers: cli.workers,
        branch: BranchChoice::parse(&cli.branch)?,
        long: cli.long,
        timestamp: cli.timestamp,
        verbose: cli.verbose,
    };
    if cli.verbose {
        eprintln!("resolved parameters: {}", serde_json::to_string(&base)?);
    }
    let wm = base.omega_m;
    let (name, sweep, tables): (&str, serde_json::Value, Vec<Table>) = match &cli.command {
        Command::Steady {
            power,
            detuning0,
            g2,
        } => {
            let list = |t: &Option<String>, scale: f64, default: f64| -> Result<Vec<f64>> {
                match t {
                    Some(t) => values(t, scale)?.resolve(),
                    None => Ok(vec![default]),
                }
            };
            let powers = match power {
                Some(t) => values(t, 1.0)?,
                None => SweepValues::List(vec![base.power]),
            };
            let mut specs = Vec::new();
            for g2 in list(g2, wm, base.g2)? {
                for d0 in list(detuning0, wm, base.detuning0)? {
                    specs.push(SweepSpec {
                        variable: SweepVariable::Power,
                        values: powers.clone(),
                        fixed: PhysicalParams {
                            g2,
                            detuning0: d0,
                            ..base
                        },
                        output_path: cli.out.clone(),
                    });
                }
            }
            ("steady", json!(specs), vec![steady_table(&specs, &opts)?])
        }
        Command::Response { drive, grid } => {
            let specs = drive_specs(&base, drive, &cli.out)?;
            let g = grid.grid()?;
            ("response", json!({ "specs": specs, "grid": grid_json(&g) }), response_tables(&specs, &g, &opts)?)
        }
        Command::Spectra { drive, grid } => {
            let specs = drive_specs(&base, drive, &cli.out)?;
            let g = grid.grid()?;
            ("spectra", json!({ "specs": specs, "grid": grid_json(&g) }), spectra_tables(&specs, &g, &opts)?)
        }
        Command::Variance {
            drive,
            grid,
            points_per_linewidth,
        } => {
            let specs = drive_specs(&base, drive, &cli.out)?;
            let g = grid.grid()?;
            let vgrid = VarianceGrid {
                points_per_linewidth: *points_per_linewidth,
                ..VarianceGrid::default()
            };
            (
                "variance",
                json!({ "specs": specs, "grid": grid_json(&g), "points_per_linewidth": points_per_linewidth }),
                vec![variance_table(&specs, &g, &vgrid, &opts)?],
            )
        }
        Command::StabilityMap { detuning0, power } => {
            let ds = values(detuning0, wm)?.resolve()?;
            let ps = values(power, 1.0)?.resolve()?;
            (
                "stability-map",
                json!({ "detuning0": ds, "power": ps }),
                vec![stability_table(&base, &ds, &ps, &opts)?],
            )
        }
        Command::QuadraticSweep {
            g2,
            fix,
            coupling,
            grid,
        } => {
            let g2s = values(g2, wm)?.resolve()?;
            let g = grid.grid()?;
            let fix = match fix {
                FixArg::Power => Fix::Power,
                FixArg::Coupling => Fix::Coupling(match coupling {
                    Some(c) => c * wm,
                    None => {
                        let point = SweepPoint {
                            params: PhysicalParams { g2: 0.0, ..base },
                            coupling: None,
                        };
                        OperatingPoint::solve(point, opts.branch)?.model.coupling
                    }
                }),
            };
            let fix_json = match fix {
                Fix::Power => json!({ "power": base.power }),
                Fix::Coupling(c) => json!({ "G": c }),
            };
            (
                "quadratic-sweep",
                json!({ "g2": g2s, "fix": fix_json, "grid": grid_json(&g) }),
                vec![quadratic_table(&base, &g2s, fix, &g, &opts)?],
            )
        }
    };
    let header = metadata(name, &base, sweep, &opts);
    write_tables(tables, &header, cli.out.as_deref(), &opts)
}

fn grid_json(g: &ProbeGrid) -> serde_json::Value {
    json!({ "omega_min": g.min, "omega_max": g.max, "points": g.points })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(files) => {
            if cli.verbose {
                for f in files {
                    eprintln!("wrote {}", f.display());
                }
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
