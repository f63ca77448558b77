//! Parameter sweeps and their CSV / JSON-lines output.
//!
//! Every command first computes all of its tables, then writes them. A failure
//! while writing removes the files already created, so a nonzero exit never
//! leaves partial output behind.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::linearized::{effective_response, frequency_grid, LinearModel};
use crate::params::{PhysicalParams, ResolvedParams, OMEGA_C_CONVENTION};
use crate::spectra::{position_variance, spectrum, NoiseModel, VarianceGrid};
use crate::stability::routh_hurwitz;
use crate::steady_state::{solve_steady, SteadyBranches, SteadyState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SweepVariable {
    /// Effective coupling, overriding the value derived from the steady state.
    #[serde(rename = "G")]
    Coupling,
    #[serde(rename = "g2")]
    G2,
    #[serde(rename = "power")]
    Power,
    #[serde(rename = "detuning0")]
    Detuning0,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    Linear,
    Geometric,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepValues {
    List(Vec<f64>),
    Range {
        start: f64,
        stop: f64,
        count: usize,
        spacing: Spacing,
    },
}

impl SweepValues {
    /// Parses `a,b,c`, `lin:start:stop:count` or `geom:start:stop:count`.
    pub fn parse(text: &str) -> Result<Self> {
        let bad = || Error::Config(format!("cannot parse sweep values `{text}`"));
        let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad());
        if let Some((kind, rest)) = text.split_once(':') {
            let spacing = match kind {
                "lin" => Spacing::Linear,
                "geom" => Spacing::Geometric,
                _ => return Err(bad()),
            };
            let parts: Vec<&str> = rest.split(':').collect();
            if parts.len() != 3 {
                return Err(bad());
            }
            let count = parts[2].trim().parse::<usize>().map_err(|_| bad())?;
            return Ok(SweepValues::Range {
                start: num(parts[0])?,
                stop: num(parts[1])?,
                count,
                spacing,
            });
        }
        Ok(SweepValues::List(
            text.split(',').map(num).collect::<Result<Vec<_>>>()?,
        ))
    }

    pub fn resolve(&self) -> Result<Vec<f64>> {
        let values = match *self {
            SweepValues::List(ref v) => v.clone(),
            SweepValues::Range {
                start,
                stop,
                count,
                spacing,
            } => {
                if count == 0 {
                    return Err(Error::Config("sweep count must be >= 1".into()));
                }
                match spacing {
                    Spacing::Linear => frequency_grid(start, stop, count),
                    Spacing::Geometric => {
                        if !(start > 0.0 && stop > 0.0) {
                            return Err(Error::Config(
                                "geometric sweep bounds must be positive".into(),
                            ));
                        }
                        frequency_grid(start.ln(), stop.ln(), count)
                            .into_iter()
                            .enumerate()
                            .map(|(i, x)| match i {
                                0 => start,
                                _ if i == count - 1 => stop,
                                _ => x.exp(),
                            })
                            .collect()
                    }
                }
            }
        };
        if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("sweep values must be finite and non-empty".into()));
        }
        Ok(values)
    }

    /// Values multiplied by `factor` (used for inputs given in units of `omega_m`).
    pub fn scaled(&self, factor: f64) -> Self {
        match *self {
            SweepValues::List(ref v) => SweepValues::List(v.iter().map(|x| x * factor).collect()),
            SweepValues::Range {
                start,
                stop,
                count,
                spacing,
            } => SweepValues::Range {
                start: start * factor,
                stop: stop * factor,
                count,
                spacing,
            },
        }
    }
}

/// One swept variable over a fixed parameter set. Frequency-valued sweep
/// values are in rad/s.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    pub values: SweepValues,
    pub fixed: PhysicalParams,
    pub output_path: Option<PathBuf>,
}

/// A fully specified point of a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub params: PhysicalParams,
    /// Coupling override in rad/s.
    pub coupling: Option<f64>,
}

impl SweepSpec {
    pub fn points(&self) -> Result<Vec<SweepPoint>> {
        self.values
            .resolve()?
            .into_iter()
            .map(|v| {
                let mut params = self.fixed;
                let mut coupling = None;
                match self.variable {
                    SweepVariable::Coupling => coupling = Some(v),
                    SweepVariable::G2 => params.g2 = v,
                    SweepVariable::Power => params.power = v,
                    SweepVariable::Detuning0 => params.detuning0 = v,
                }
                params.validate()?;
                Ok(SweepPoint { params, coupling })
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BranchChoice {
    /// Stable branch with the smallest `|q_s|`.
    #[default]
    Auto,
    Index(usize),
}

impl BranchChoice {
    pub fn parse(text: &str) -> Result<Self> {
        if text == "auto" {
            return Ok(BranchChoice::Auto);
        }
        text.parse()
            .map(BranchChoice::Index)
            .map_err(|_| Error::Config(format!("--branch expects `auto` or an index, got `{text}`")))
    }

    pub fn select<'a>(&self, sol: &'a SteadyBranches) -> Result<&'a SteadyState> {
        match *self {
            BranchChoice::Auto => sol
                .default_branch()
                .map(|(_, b)| b)
                .ok_or(Error::AllBranchesUnstable),
            BranchChoice::Index(i) => sol.branches.get(i).ok_or_else(|| {
                Error::Config(format!(
                    "branch index {i} out of range ({} branches)",
                    sol.branches.len()
                ))
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
    Jsonl,
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub format: Format,
    /// Worker threads; `None` uses the rayon default.
    pub workers: Option<usize>,
    pub branch: BranchChoice,
    /// One long-format table instead of one file per combination.
    pub long: bool,
    /// Embed a Unix timestamp in the metadata line.
    pub timestamp: bool,
    pub verbose: bool,
}

impl RunOptions {
    /// Evaluates `f` on every item on a worker pool, preserving order.
    pub fn par_map<T, U, F>(&self, items: Vec<T>, f: F) -> Result<Vec<U>>
    where
        T: Send,
        U: Send,
        F: Fn(T) -> Result<U> + Sync + Send,
    {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.workers.unwrap_or(0))
            .build()
            .map_err(|e| Error::Config(e.to_string()))?;
        pool.install(|| items.into_par_iter().map(f).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    F(f64),
    U(usize),
    B(bool),
}

impl Cell {
    fn csv(&self) -> String {
        match *self {
            Cell::F(x) => format!("{x:e}"),
            Cell::U(n) => n.to_string(),
            Cell::B(b) => b.to_string(),
        }
    }

    fn json(&self) -> Value {
        match *self {
            Cell::F(x) if x.is_finite() => json!(x),
            Cell::F(x) => json!(format!("{x:e}")),
            Cell::U(n) => json!(n),
            Cell::B(b) => json!(b),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    /// Appended to the output stem when tables go to separate files.
    pub suffix: Option<String>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    /// Per-table metadata merged into the header line.
    pub meta: Value,
}

impl Table {
    fn new(columns: &[&str]) -> Self {
        Self {
            suffix: None,
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            meta: Value::Null,
        }
    }

    /// Concatenates tables that share a column layout.
    fn concat(tables: Vec<Table>) -> Table {
        let mut it = tables.into_iter();
        let mut out = it.next().expect("at least one table");
        out.suffix = None;
        out.meta = Value::Null;
        for t in it {
            out.rows.extend(t.rows);
        }
        out
    }

    pub fn render(&self, header: &Value, format: Format) -> String {
        let mut meta = header.clone();
        if !self.meta.is_null() {
            meta["table"] = self.meta.clone();
        }
        let mut s = String::new();
        match format {
            Format::Csv => {
                writeln!(s, "# {meta}").unwrap();
                writeln!(s, "{}", self.columns.join(",")).unwrap();
                for row in &self.rows {
                    let cells: Vec<String> = row.iter().map(Cell::csv).collect();
                    writeln!(s, "{}", cells.join(",")).unwrap();
                }
            }
            Format::Jsonl => {
                writeln!(s, "{}", json!({ "meta": meta })).unwrap();
                for row in &self.rows {
                    let obj: serde_json::Map<String, Value> = self
                        .columns
                        .iter()
                        .cloned()
                        .zip(row.iter().map(Cell::json))
                        .collect();
                    writeln!(s, "{}", Value::Object(obj)).unwrap();
                }
            }
        }
        s
    }
}

/// The metadata line written at the top of every output.
pub fn metadata(command: &str, params: &PhysicalParams, sweep: Value, opts: &RunOptions) -> Value {
    let mut meta = json!({
        "command": command,
        "version": env!("CARGO_PKG_VERSION"),
        "omega_c_convention": OMEGA_C_CONVENTION,
        "params": params,
        "sweep": sweep,
    });
    if opts.timestamp {
        let now = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        meta["timestamp"] = json!(now);
    }
    meta
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
    let name = match path.extension().and_then(|e| e.to_str()) {
        Some(ext) => format!("{stem}_{suffix}.{ext}"),
        None => format!("{stem}_{suffix}"),
    };
    path.with_file_name(name)
}

/// Writes the tables to `out` (or stdout) and returns the files created.
pub fn write_tables(
    tables: Vec<Table>,
    header: &Value,
    out: Option<&Path>,
    opts: &RunOptions,
) -> Result<Vec<PathBuf>> {
    let tables = if (opts.long || out.is_none()) && tables.len() > 1 {
        vec![Table::concat(tables)]
    } else {
        tables
    };
    let Some(out) = out else {
        let stdout = std::io::stdout();
        let mut lock = stdout.lock();
        for t in &tables {
            lock.write_all(t.render(header, opts.format).as_bytes())?;
        }
        return Ok(Vec::new());
    };
    let single = tables.len() == 1;
    let mut written = Vec::new();
    for t in &tables {
        let path = match (&t.suffix, single) {
            (Some(sfx), false) => with_suffix(out, sfx),
            _ => out.to_path_buf(),
        };
        let result = fs::write(&path, t.render(header, opts.format));
        written.push(path);
        if let Err(e) = result {
            for p in &written {
                let _ = fs::remove_file(p);
            }
            return Err(e.into());
        }
    }
    Ok(written)
}

/// Linear model for one sweep point: steady state, branch choice, optional
/// coupling override.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatingPoint {
    pub point: SweepPoint,
    pub state: SteadyState,
    pub model: LinearModel,
}

impl OperatingPoint {
    pub fn solve(point: SweepPoint, branch: BranchChoice) -> Result<Self> {
        let resolved = ResolvedParams::new(point.params)?;
        let sol = solve_steady(&resolved)?;
        let state = *branch.select(&sol)?;
        let mut model = LinearModel::from_steady(&state, &point.params);
        if let Some(g) = point.coupling {
            model = model.with_coupling(g);
        }
        Ok(Self {
            point,
            state,
            model,
        })
    }

    fn label_cells(&self) -> [Cell; 2] {
        let wm = self.point.params.omega_m;
        [Cell::F(self.model.coupling / wm), Cell::F(self.point.params.g2 / wm)]
    }

    fn meta(&self) -> Value {
        json!({
            "G": self.model.coupling,
            "g2": self.point.params.g2,
            "power": self.point.params.power,
            "delta_eff": self.model.delta,
        })
    }
}

/// Points of every spec, in order.
fn all_points(specs: &[SweepSpec]) -> Result<Vec<SweepPoint>> {
    let mut out = Vec::new();
    for s in specs {
        out.extend(s.points()?);
    }
    Ok(out)
}

fn labelled(columns: &[&str], long: bool) -> Vec<String> {
    let mut cols: Vec<String> = Vec::new();
    if long {
        cols.push("G_over_omegam".into());
        cols.push("g2_over_omegam".into());
    }
    cols.extend(columns.iter().map(|c| c.to_string()));
    cols
}

/// Probe frequencies in units of `omega_m`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeGrid {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl Default for ProbeGrid {
    fn default() -> Self {
        Self {
            min: 0.01,
            max: 3.0,
            points: 2001,
        }
    }
}

impl ProbeGrid {
    pub fn omegas(&self, omega_m: f64) -> Vec<f64> {
        frequency_grid(self.min, self.max, self.points)
            .into_iter()
            .map(|x| x * omega_m)
            .collect()
    }
}

/// `steady`: one row per branch per sweep point.
pub fn steady_table(specs: &[SweepSpec], opts: &RunOptions) -> Result<Table> {
    let points = all_points(specs)?;
    let solved = opts.par_map(points, |p| {
        let sol = solve_steady(&ResolvedParams::new(p.params)?)?;
        Ok((p, sol))
    })?;
    let mut table = Table::new(&[
        "power",
        "detuning0",
        "g2",
        "q_s",
        "photon_number",
        "delta_eff",
        "G",
        "stable",
    ]);
    for (p, sol) in solved {
        if opts.verbose && sol.discarded > 0 {
            eprintln!(
                "power={:e} detuning0={:e} g2={:e}: discarded {} root(s) with negative occupancy",
                p.params.power, p.params.detuning0, p.params.g2, sol.discarded
            );
        }
        for b in &sol.branches {
            table.rows.push(vec![
                Cell::F(p.params.power),
                Cell::F(p.params.detuning0),
                Cell::F(p.params.g2),
                Cell::F(b.q_s),
                Cell::F(b.photon_number),
                Cell::F(b.delta_eff),
                Cell::F(b.coupling),
                Cell::B(b.stable),
            ]);
        }
    }
    Ok(table)
}

/// `response`: effective frequency, damping and susceptibility on the probe grid.
pub fn response_tables(specs: &[SweepSpec], grid: &ProbeGrid, opts: &RunOptions) -> Result<Vec<Table>> {
    let points = all_points(specs)?;
    let ops = opts.par_map(points, |p| OperatingPoint::solve(p, opts.branch))?;
    Ok(ops
        .iter()
        .enumerate()
        .map(|(i, op)| {
            let cols = [
                "omega_over_omegam",
                "omega_eff_over_omegam",
                "gamma_eff_over_gammam",
                "chi_re",
                "chi_im",
                "softening_flag",
            ];
            let wm = op.model.omega_m;
            let columns = labelled(&cols, opts.long);
            let rows = grid
                .omegas(wm)
                .into_iter()
                .map(|w| {
                    let r = effective_response(w, &op.model);
                    let mut row = if opts.long { op.label_cells().to_vec() } else { Vec::new() };
                    row.extend([
                        Cell::F(w / wm),
                        Cell::F(r.omega_eff / wm),
                        Cell::F(r.gamma_eff / op.model.gamma_m),
                        Cell::F(r.chi.re),
                        Cell::F(r.chi.im),
                        Cell::B(r.softened),
                    ]);
                    row
                })
                .collect();
            Table {
                suffix: Some(format!("{i:03}")),
                columns,
                rows,
                meta: op.meta(),
            }
        })
        .collect())
}

/// `spectra`: displacement and intracavity spectra on the probe grid.
pub fn spectra_tables(specs: &[SweepSpec], grid: &ProbeGrid, opts: &RunOptions) -> Result<Vec<Table>> {
    let points = all_points(specs)?;
    let computed = opts.par_map(points, |p| {
        let op = OperatingPoint::solve(p, opts.branch)?;
        let noise = NoiseModel::from_params(&p.params);
        let pts = spectrum(&grid.omegas(p.params.omega_m), &op.model, &noise)?;
        Ok((op, pts))
    })?;
    Ok(computed
        .into_iter()
        .enumerate()
        .map(|(i, (op, pts))| {
            let wm = op.model.omega_m;
            let rows = pts
                .iter()
                .map(|s| {
                    let mut row = if opts.long { op.label_cells().to_vec() } else { Vec::new() };
                    row.extend([Cell::F(s.omega / wm), Cell::F(s.s_q), Cell::F(s.s_a)]);
                    row
                })
                .collect();
            Table {
                suffix: Some(format!("{i:03}")),
                columns: labelled(&["omega_over_omegam", "S_q", "S_a"], opts.long),
                rows,
                meta: op.meta(),
            }
        })
        .collect())
}

/// `variance`: one summary row per sweep point.
pub fn variance_table(
    specs: &[SweepSpec],
    grid: &ProbeGrid,
    vgrid: &VarianceGrid,
    opts: &RunOptions,
) -> Result<Table> {
    let points = all_points(specs)?;
    let rows = opts.par_map(points, |p| {
        let op = OperatingPoint::solve(p, opts.branch)?;
        let noise = NoiseModel::from_params(&p.params);
        let est = position_variance(&op.model, &noise, vgrid)?;
        let pts = spectrum(&grid.omegas(p.params.omega_m), &op.model, &noise)?;
        let peak_q = pts.iter().map(|s| s.s_q).fold(0.0, f64::max);
        let peak_a = pts.iter().map(|s| s.s_a).fold(0.0, f64::max);
        if est.truncation_suspect {
            eprintln!(
                "warning: S_q at the integration edge is {:.2e} of its peak (G={:e}); variance may be truncated",
                est.edge_ratio, op.model.coupling
            );
        }
        if est.resolution_limited {
            eprintln!(
                "warning: variance grid capped at {} intervals (G={:e})",
                est.intervals, op.model.coupling
            );
        }
        let mut row = op.label_cells().to_vec();
        row.extend([
            Cell::F(p.params.power),
            Cell::F(est.variance),
            Cell::F(peak_q),
            Cell::F(peak_a),
            Cell::U(est.intervals),
            Cell::F(est.edge_ratio),
            Cell::B(est.truncation_suspect),
        ]);
        Ok(row)
    })?;
    let mut table = Table::new(&[
        "G_over_omegam",
        "g2_over_omegam",
        "power",
        "position_variance",
        "peak_S_q",
        "peak_S_a",
        "intervals",
        "edge_ratio",
        "truncation_suspect",
    ]);
    table.rows = rows;
    Ok(table)
}

/// `stability-map`: every branch over a `(detuning0, power)` grid.
pub fn stability_table(
    fixed: &PhysicalParams,
    detunings: &[f64],
    powers: &[f64],
    opts: &RunOptions,
) -> Result<Table> {
    let grid: Vec<(f64, f64)> = detunings
        .iter()
        .flat_map(|&d| powers.iter().map(move |&p| (d, p)))
        .collect();
    let solved = opts.par_map(grid, |(d, p)| {
        let params = PhysicalParams {
            detuning0: d,
            power: p,
            ..*fixed
        };
        let sol = solve_steady(&ResolvedParams::new(params)?)?;
        let rows: Vec<Vec<Cell>> = sol
            .branches
            .iter()
            .enumerate()
            .map(|(i, b)| {
                let report = routh_hurwitz(&LinearModel::from_steady(b, &params));
                vec![
                    Cell::F(d),
                    Cell::F(p),
                    Cell::U(i),
                    Cell::B(report.stable),
                    Cell::F(report.max_real_eigenvalue),
                ]
            })
            .collect();
        Ok(rows)
    })?;
    let mut table = Table::new(&["detuning0", "power", "branch_index", "stable", "max_real_eigenvalue"]);
    table.rows = solved.into_iter().flatten().collect();
    Ok(table)
}

/// What is held fixed while `g2` varies in `quadratic-sweep`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Fix {
    /// Fixed laser power; `G` follows the steady state.
    Power,
    /// Fixed effective coupling, rad/s.
    Coupling(f64),
}

/// One row of `quadratic-sweep`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticPoint {
    pub g2: f64,
    pub q_s: f64,
    pub coupling: f64,
    pub omega_tilde: f64,
    pub omega_eff_at_omega_m: f64,
    pub gamma_eff_at_omega_m: f64,
    /// `max |omega_eff(omega) - omega_tilde|` over the probe grid.
    pub max_shift: f64,
    pub stable: bool,
}

pub fn quadratic_points(
    fixed: &PhysicalParams,
    g2_values: &[f64],
    fix: Fix,
    grid: &ProbeGrid,
    opts: &RunOptions,
) -> Result<Vec<QuadraticPoint>> {
    opts.par_map(g2_values.to_vec(), |g2| {
        let point = SweepPoint {
            params: PhysicalParams { g2, ..*fixed },
            coupling: match fix {
                Fix::Power => None,
                Fix::Coupling(g) => Some(g),
            },
        };
        let op = OperatingPoint::solve(point, opts.branch)?;
        let m = op.model;
        let omega_tilde = m.omega_tilde_sq().sqrt();
        let at = effective_response(m.omega_m, &m);
        let max_shift = grid
            .omegas(m.omega_m)
            .into_iter()
            .map(|w| effective_response(w, &m).frequency_shift.abs())
            .fold(0.0, f64::max);
        Ok(QuadraticPoint {
            g2,
            q_s: op.state.q_s,
            coupling: m.coupling,
            omega_tilde,
            omega_eff_at_omega_m: at.omega_eff,
            gamma_eff_at_omega_m: at.gamma_eff,
            max_shift,
            stable: routh_hurwitz(&m).stable,
        })
    })
}

pub fn quadratic_table(
    fixed: &PhysicalParams,
    g2_values: &[f64],
    fix: Fix,
    grid: &ProbeGrid,
    opts: &RunOptions,
) -> Result<Table> {
    let wm = fixed.omega_m;
    let mut table = Table::new(&[
        "g2_over_omegam",
        "q_s",
        "G_over_omegam",
        "omega_tilde_over_omegam",
        "omega_eff_at_omegam_over_omegam",
        "gamma_eff_at_omegam_over_gammam",
        "max_abs_shift_over_omegam",
        "stable",
    ]);
    for q in quadratic_points(fixed, g2_values, fix, grid, opts)? {
        table.rows.push(vec![
            Cell::F(q.g2 / wm),
            Cell::F(q.q_s),
            Cell::F(q.coupling / wm),
            Cell::F(q.omega_tilde / wm),
            Cell::F(q.omega_eff_at_omega_m / wm),
            Cell::F(q.gamma_eff_at_omega_m / fixed.gamma_m),
            Cell::F(q.max_shift / wm),
            Cell::B(q.stable),
        ]);
    }
    Ok(table)
}
