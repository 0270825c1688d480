use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use fano_cqed::figures::{self, FigureId, FigureOptions};
use fano_cqed::lindblad::OracleConfig;
use fano_cqed::sweep::{self, fmt_num, Axis, DetuningAxis, SweepSpec};
use fano_cqed::verify::{self, CloudRanges};
use fano_cqed::{DriveKind, Error, Observable, ObservableSet, SolverKind, SystemParams};

/// Drive amplitude used by `--drive` when the parameters carry none.
const DEFAULT_DRIVE: f64 = 1e-3;

#[derive(Parser, Debug)]
#[command(name = "fanoqed", version, about = "Photon statistics of a driven emitter-cavity system with shared-continuum loss")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct Common {
    /// Flat key = value parameter file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Built-in parameter set applied before --config and --set.
    #[arg(long, global = true, value_enum)]
    preset: Option<Preset>,
    /// Parameter override key=value, in units of gamma0. Repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Puts the drive on the atom or the cavity.
    #[arg(long, global = true, value_enum)]
    drive: Option<DriveArg>,
    #[arg(long, global = true, default_value = "wavefunction")]
    solver: SolverKind,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    format: Format,
    /// Photon-number cutoff of the master-equation solver.
    #[arg(long, global = true)]
    fock_cutoff: Option<usize>,
    /// Raise the cutoff until g2 and n_c stop changing.
    #[arg(long, global = true)]
    auto_converge: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Observables at a single parameter point.
    Point,
    /// One- or two-dimensional parameter sweep.
    Sweep {
        /// key=start:end:points
        #[arg(long)]
        axis: String,
        /// Second axis, key=start:end:points.
        #[arg(long)]
        axis2: Option<String>,
        /// Comma-separated subset of n_c, g2, eta, I0, I2.
        #[arg(long, value_delimiter = ',')]
        observables: Vec<Observable>,
    },
    /// Atom-cavity detuning where a single-excitation decay rate is smallest.
    Bic {
        /// Search window on delta_0c as start:end.
        #[arg(long)]
        range: Option<String>,
    },
    /// Local g2 minima along a detuning axis.
    Extrema {
        #[arg(long, default_value = "delta_cL")]
        axis: DetuningAxis,
        /// Scan window as start:end.
        #[arg(long)]
        range: Option<String>,
        /// Also evaluate the master-equation g2 at each dip.
        #[arg(long)]
        oracle_check: bool,
    },
    /// Compares the weak-drive solver to the master equation on a random cloud.
    Verify {
        #[arg(long, default_value_t = verify::DEFAULT_POINTS)]
        points: usize,
        #[arg(long, default_value_t = verify::DEFAULT_SEED)]
        seed: u64,
    },
    /// Regenerates the dataset of a figure preset.
    Figure {
        id: FigureId,
        /// Points along the scanned axis.
        #[arg(long)]
        points: Option<usize>,
        /// Also write a line plot to this path.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Csv,
    Json,
    Table,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum DriveArg {
    Atom,
    Cavity,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Preset {
    Fig1,
    Fig2a,
    Fig2b,
    Fig3,
}

impl Preset {
    fn params(self) -> SystemParams {
        match self {
            Preset::Fig1 => figures::fig1_params(),
            Preset::Fig2a => figures::fig2a_params(),
            Preset::Fig2b => figures::fig2b_params(),
            Preset::Fig3 => figures::fig3_params(0.1),
        }
    }
}

impl Common {
    fn params(&self) -> anyhow::Result<SystemParams> {
        let mut p = self.preset.map(Preset::params).unwrap_or_default();
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            p.merge_config_str(&text)?;
        }
        for s in &self.set {
            p.set_str(s)?;
        }
        if let Some(d) = self.drive {
            let amp = p.omega_0.max(p.omega_c);
            let amp = if amp > 0.0 { amp } else { DEFAULT_DRIVE };
            let kind = match d {
                DriveArg::Atom => DriveKind::Atom,
                DriveArg::Cavity => DriveKind::Cavity,
            };
            p = p.with_drive(kind, amp);
        }
        p.validate()?;
        Ok(p)
    }

    fn oracle(&self) -> anyhow::Result<OracleConfig> {
        let mut cfg = OracleConfig::default();
        if let Some(n) = self.fock_cutoff {
            cfg.n_max = n;
        }
        cfg.auto_converge = self.auto_converge;
        cfg.validate()?;
        Ok(cfg)
    }

    fn emit(&self, text: &str) -> anyhow::Result<()> {
        match &self.out {
            Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display())),
            None => match std::io::stdout().lock().write_all(text.as_bytes()) {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
                _ => Ok(()),
            },
        }
    }

    fn rejects_params(&self, what: &str) -> anyhow::Result<()> {
        if self.config.is_some() || self.preset.is_some() || !self.set.is_empty() || self.drive.is_some() {
            bail!(Error::InvalidParameter(format!("{what} takes no parameter overrides")));
        }
        Ok(())
    }
}

fn parse_range(text: &str) -> anyhow::Result<(f64, f64)> {
    let bad = || Error::InvalidParameter(format!("range `{text}` is not start:end"));
    let (a, b) = text.split_once(':').ok_or_else(bad)?;
    let a: f64 = a.trim().parse().map_err(|_| bad())?;
    let b: f64 = b.trim().parse().map_err(|_| bad())?;
    if !(a.is_finite() && b.is_finite() && a < b) {
        bail!(bad());
    }
    Ok((a, b))
}

fn opt_num(v: Option<f64>) -> String {
    v.map(fmt_num).unwrap_or_default()
}

/// Renders a header and rows as CSV or as a space-aligned table.
fn tabulate(format: Format, header: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = String::new();
    match format {
        Format::Table => {
            let mut width: Vec<usize> = header.iter().map(|h| h.len()).collect();
            for r in rows {
                for (w, c) in width.iter_mut().zip(r) {
                    *w = (*w).max(c.len());
                }
            }
            let line = |cells: Vec<&str>| {
                let padded: Vec<String> = cells.iter().zip(&width).map(|(c, w)| format!("{c:<w$}")).collect();
                padded.join("  ").trim_end().to_string()
            };
            writeln!(out, "{}", line(header.to_vec())).unwrap();
            for r in rows {
                writeln!(out, "{}", line(r.iter().map(String::as_str).collect())).unwrap();
            }
        }
        _ => {
            writeln!(out, "{}", header.join(",")).unwrap();
            for r in rows {
                writeln!(out, "{}", r.join(",")).unwrap();
            }
        }
    }
    out
}

fn json<T: serde::Serialize>(value: &T) -> anyhow::Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

fn point(c: &Common) -> anyhow::Result<String> {
    let p = c.params()?;
    let set: ObservableSet = sweep::evaluate_with_eta(&p, c.solver, &c.oracle()?)?;
    if let Format::Json = c.format {
        return json(&serde_json::json!({ "params": p, "observables": set }));
    }
    let header = ["solver", "n_c", "g2", "eta", "I0", "I2", "I2_direct"];
    let row = vec![
        set.solver.to_string(),
        fmt_num(set.n_c),
        fmt_num(set.g2),
        opt_num(set.eta),
        fmt_num(set.i0),
        fmt_num(set.i2),
        fmt_num(set.i2_direct),
    ];
    Ok(tabulate(c.format, &header, &[row]))
}

fn run_sweep(c: &Common, axis: &str, axis2: Option<&str>, observables: &[Observable]) -> anyhow::Result<String> {
    let p = c.params()?;
    let mut spec = SweepSpec::new(Axis::parse(axis)?, axis2.map(Axis::parse).transpose()?, c.solver);
    if !observables.is_empty() {
        spec = spec.with_observables(observables.to_vec());
    }
    spec.oracle = c.oracle()?;
    let grid = sweep::sweep(&spec, &p)?;
    Ok(match c.format {
        Format::Json => grid.to_json(None)? + "\n",
        Format::Csv => grid.to_csv()?,
        Format::Table => {
            let csv = grid.to_csv()?;
            let mut lines = csv.lines().map(|l| l.split(',').map(String::from).collect::<Vec<_>>());
            let header = lines.next().unwrap_or_default();
            let rows: Vec<Vec<String>> = lines.collect();
            let header: Vec<&str> = header.iter().map(String::as_str).collect();
            tabulate(Format::Table, &header, &rows)
        }
    })
}

fn bic(c: &Common, range: Option<&str>) -> anyhow::Result<String> {
    let p = c.params()?;
    let report = sweep::locate_bic(&p, range.map(parse_range).transpose()?)?;
    if let Format::Json = c.format {
        return json(&report);
    }
    let header = ["delta_0c", "min_decay", "boundary", "predicted_delta_0c", "predicted_delta_cL", "predicted_delta_0L"];
    let row = vec![
        fmt_num(report.delta_0c),
        fmt_num(report.min_decay),
        report.extremum.boundary.to_string(),
        fmt_num(report.predicted.delta_0c),
        fmt_num(report.predicted.delta_cl),
        fmt_num(report.predicted.delta_0l),
    ];
    Ok(tabulate(c.format, &header, &[row]))
}

fn extrema(c: &Common, axis: DetuningAxis, range: Option<&str>, oracle_check: bool) -> anyhow::Result<String> {
    let p = c.params()?;
    let cfg = c.oracle()?;
    let ext = sweep::locate_g2_extrema(&p, axis, range.map(parse_range).transpose()?, oracle_check.then_some(&cfg))?;
    if let Format::Json = c.format {
        return json(&ext);
    }
    let header = [axis.key(), "g2", "g2_fano_off", "eta", "conventional", "oracle_g2"];
    let rows: Vec<Vec<String>> = ext
        .dips
        .iter()
        .map(|d| {
            vec![
                fmt_num(d.location),
                fmt_num(d.g2),
                fmt_num(d.g2_fano_off),
                fmt_num(d.eta),
                d.conventional.to_string(),
                opt_num(d.oracle_g2),
            ]
        })
        .collect();
    Ok(tabulate(c.format, &header, &rows))
}

fn run_verify(c: &Common, points: usize, seed: u64) -> anyhow::Result<String> {
    c.rejects_params("verify")?;
    let report = verify::run(points, seed, &CloudRanges::default(), &c.oracle()?);
    Ok(match c.format {
        Format::Json => json(&report)?,
        Format::Csv => {
            let header = ["g", "kappa0", "kappa_n", "gamma_n", "delta_0c", "delta_0L", "omega_0", "omega_c", "g2_wavefunction", "g2_oracle", "rel_dev", "n_max"];
            let rows: Vec<Vec<String>> = report
                .points
                .iter()
                .map(|v| {
                    let q = &v.params;
                    let mut r: Vec<String> =
                        [q.g, q.kappa0, q.kappa_n, q.gamma_n, q.delta_0c, q.delta_0l, q.omega_0, q.omega_c, v.g2_wavefunction, v.g2_oracle, v.rel_dev]
                            .into_iter()
                            .map(fmt_num)
                            .collect();
                    r.push(v.n_max.to_string());
                    r
                })
                .collect();
            tabulate(Format::Csv, &header, &rows)
        }
        Format::Table => {
            let mut out = String::new();
            writeln!(out, "seed          {}", report.seed).unwrap();
            writeln!(out, "points        {}", report.points.len()).unwrap();
            writeln!(out, "failures      {}", report.failures.len()).unwrap();
            writeln!(out, "max_rel_dev   {:e}", report.max_rel_dev).unwrap();
            writeln!(out, "mean_rel_dev  {:e}", report.mean_rel_dev).unwrap();
            for (p, e) in &report.failures {
                writeln!(out, "failed g={} kappa0={} delta_0c={} delta_0L={}: {e}", p.g, p.kappa0, p.delta_0c, p.delta_0l).unwrap();
            }
            out
        }
    })
}

fn figure(c: &Common, id: FigureId, points: Option<usize>, svg: Option<&PathBuf>) -> anyhow::Result<String> {
    c.rejects_params("figure")?;
    let opts = FigureOptions { solver: c.solver, oracle: c.oracle()?, points };
    let data = figures::generate(id, &opts)?;
    if let Some(path) = svg {
        std::fs::write(path, data.to_svg()).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(match c.format {
        Format::Json => data.to_json()? + "\n",
        Format::Csv => data.to_csv()?,
        Format::Table => {
            let rows: Vec<Vec<String>> = data.rows.iter().map(|r| r.iter().map(|v| fmt_num(*v)).collect()).collect();
            let header: Vec<&str> = data.columns.iter().map(String::as_str).collect();
            tabulate(Format::Table, &header, &rows)
        }
    })
}

fn run(cli: &Cli) -> anyhow::Result<()> {
    let c = &cli.common;
    let text = match &cli.command {
        Command::Point => point(c)?,
        Command::Sweep { axis, axis2, observables } => run_sweep(c, axis, axis2.as_deref(), observables)?,
        Command::Bic { range } => bic(c, range.as_deref())?,
        Command::Extrema { axis, range, oracle_check } => extrema(c, *axis, range.as_deref(), *oracle_check)?,
        Command::Verify { points, seed } => run_verify(c, *points, *seed)?,
        Command::Figure { id, points, svg } => figure(c, *id, *points, svg.as_ref())?,
    };
    c.emit(&text)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let singular = e.downcast_ref::<Error>().is_some_and(Error::is_singularity);
            if singular && matches!(cli.command, Command::Point) {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
