use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use topotherm::analysis::{self, Table1, VERSION};
use topotherm::estimation::{crb_experiment, CrbConfig, MeasurementKind};
use topotherm::spectral::{self, analytic_spectrum, SpectrumExport, DEFAULT_GROUP_TOL};
use topotherm::thermo::{fisher_report, FisherReport, ThermalModel};
use topotherm::{parse_edge_list, Error, Family, Graph, Spectrum, SpectrumSource};

#[derive(Parser)]
#[command(name = "topotherm", version, about = "Thermometry with a quantum walker on graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Laplacian eigenvalues and degeneracy levels.
    Spectrum {
        #[command(flatten)]
        graph: GraphArgs,
        /// Require the closed-form spectrum; fail for families without one.
        #[arg(long)]
        analytic: bool,
        /// Include eigenvectors (JSON only).
        #[arg(long)]
        eigenvectors: bool,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Every figure of merit at one temperature.
    Report {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long = "T", allow_negative_numbers = true)]
        temperature: f64,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Figures of merit over a log-spaced temperature grid, with the QFI peak.
    Sweep {
        #[command(flatten)]
        graph: GraphArgs,
        /// Defaults to 1e-2 E_1.
        #[arg(long, allow_negative_numbers = true)]
        t_lo: Option<f64>,
        /// Defaults to 1e3 E_max.
        #[arg(long, allow_negative_numbers = true)]
        t_hi: Option<f64>,
        #[arg(long, default_value_t = analysis::DEFAULT_POINTS)]
        points: usize,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// High-temperature comparison table for the standard families at order N.
    Table1 {
        #[arg(long = "N", default_value_t = 16)]
        order: usize,
        /// Size of the smaller bipartite part; defaults to N/3.
        #[arg(long)]
        n1: Option<usize>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Monte Carlo maximum-likelihood estimation against the Cramér-Rao bound.
    Crb {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long = "T", allow_negative_numbers = true)]
        temperature: f64,
        /// Measurement shots per trial.
        #[arg(long = "M")]
        shots: u64,
        #[arg(long, default_value_t = 500)]
        trials: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Kind::Energy)]
        kind: Kind,
        /// Include every trial's estimate in the output.
        #[arg(long)]
        per_trial: bool,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// QFI and normalized coherence curves, with the peak and 1/e crossing.
    Coherence {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long, default_value_t = analysis::DEFAULT_POINTS)]
        points: usize,
        #[command(flatten)]
        out: OutputArgs,
    },
}

#[derive(Args)]
struct GraphArgs {
    /// Graph descriptor, e.g. `cycle:8`, `grid:4x4:obc`, `prod(path:3,cycle:4)`.
    #[arg(required_unless_present = "edges", conflicts_with = "edges")]
    graph: Option<String>,
    /// Read the graph from an edge-list file instead.
    #[arg(long, value_name = "PATH")]
    edges: Option<PathBuf>,
}

#[derive(Args)]
struct OutputArgs {
    /// Write here instead of stdout.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Relative tolerance for grouping eigenvalues into levels.
    #[arg(long, default_value_t = DEFAULT_GROUP_TOL)]
    tol: f64,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Energy,
    Position,
}

enum Failure {
    Io(String),
    Invalid(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Io(e) => Failure::Io(e.to_string()),
            other => Failure::Invalid(other.to_string()),
        }
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Invalid(e.to_string())
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Invalid(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> CliResult<()> {
    match command {
        Command::Spectrum { graph, analytic, eigenvectors, out } => {
            let g = load_graph(&graph)?;
            check_tol(out.tol)?;
            let s = if analytic {
                analytic_spectrum(&g, out.tol)?
            } else {
                spectral::spectrum(&g, out.tol)?
            };
            let text = match out.format.unwrap_or(Format::Json) {
                Format::Json => json(&SpectrumExport::new(&s, Some(g.descriptor()), eigenvectors))?,
                Format::Csv => {
                    if eigenvectors {
                        return Err(Failure::Invalid("--eigenvectors needs --format json".into()));
                    }
                    spectrum_csv(&g, &s)
                }
            };
            emit(&out, &text)
        }
        Command::Report { graph, temperature, out } => {
            let (g, s) = load(&graph, out.tol)?;
            let r = fisher_report(&g.degree_stats(), &s, temperature)?;
            let text = match out.format.unwrap_or(Format::Csv) {
                Format::Json => json(&r)?,
                Format::Csv => format!(
                    "{}{}\n{}\n",
                    header(&g),
                    FisherReport::CSV_HEADER,
                    r.csv_row()
                ),
            };
            emit(&out, &text)
        }
        Command::Sweep { graph, t_lo, t_hi, points, out } => {
            let (g, s) = load(&graph, out.tol)?;
            let (lo, hi) = analysis::default_range(&s)?;
            let r = analysis::sweep(&g, &s, t_lo.unwrap_or(lo), t_hi.unwrap_or(hi), points)?;
            let text = match out.format.unwrap_or(Format::Csv) {
                Format::Json => json(&r)?,
                Format::Csv => r.to_csv(),
            };
            emit(&out, &text)
        }
        Command::Table1 { order, n1, out } => {
            let table: Table1 = analysis::table1_report(order, n1.unwrap_or(order / 3))?;
            let text = match out.format.unwrap_or(Format::Csv) {
                Format::Json => json(&table)?,
                Format::Csv => table.to_csv(),
            };
            emit(&out, &text)
        }
        Command::Crb { graph, temperature, shots, trials, seed, kind, per_trial, out } => {
            let (g, s) = load(&graph, out.tol)?;
            let config = CrbConfig {
                temperature,
                kind: match kind {
                    Kind::Energy => MeasurementKind::Energy,
                    Kind::Position => MeasurementKind::Position,
                },
                shots,
                trials,
                seed,
                bracket: None,
                keep_estimates: per_trial,
            };
            let r = crb_experiment(&s, Some(g.descriptor()), &config)?;
            let text = match out.format.unwrap_or(Format::Json) {
                Format::Json => json(&r)?,
                Format::Csv => {
                    if per_trial {
                        return Err(Failure::Invalid("--per-trial needs --format json".into()));
                    }
                    let opt = |x: Option<f64>| x.map_or(String::new(), |v| v.to_string());
                    format!(
                        "{}# rng: {}\nT,M,trials,seed,converged,mean,variance,fisher,qfi,crb,quantum_crb,efficiency\n{},{},{},{},{},{},{},{},{},{},{},{}\n",
                        header(&g),
                        r.rng,
                        temperature,
                        shots,
                        trials,
                        seed,
                        r.converged_trials,
                        opt(r.mean_estimate),
                        opt(r.variance),
                        r.fisher,
                        r.qfi,
                        opt(r.crb),
                        opt(r.quantum_crb),
                        opt(r.efficiency)
                    )
                }
            };
            emit(&out, &text)
        }
        Command::Coherence { graph, points, out } => {
            let (g, s) = load(&graph, out.tol)?;
            let window = analysis::coherence_window(&s)?;
            let (lo, hi) = analysis::default_range(&s)?;
            let temperatures = analysis::log_grid(lo, hi, points)?;
            let mut rows = Vec::with_capacity(points);
            for &t in &temperatures {
                let m = ThermalModel::new(&s, t)?;
                rows.push((t, m.qfi(), m.coherence()?));
            }
            let text = match out.format.unwrap_or(Format::Json) {
                Format::Json => {
                    let curve: Vec<_> = rows
                        .iter()
                        .map(|&(t, q, c)| serde_json::json!({ "T": t, "qfi": q, "coherence": c }))
                        .collect();
                    json(&serde_json::json!({
                        "descriptor": g.descriptor(),
                        "window": window,
                        "peak_within_coherence_drop": window.peak_within_coherence_drop(),
                        "curve": curve,
                    }))?
                }
                Format::Csv => {
                    let mut text = format!("{}T,qfi,coherence\n", header(&g));
                    for (t, q, c) in rows {
                        text.push_str(&format!("{t},{q},{c}\n"));
                    }
                    text.push_str(&format!(
                        "# peak: T_max={},qfi_max={},coherence={}\n# T_1/e={}\n# half_max={},{}\n",
                        window.peak.temperature,
                        window.peak.qfi_max,
                        window.coherence_at_peak,
                        window.t_inv_e,
                        window.half_max.0,
                        window.half_max.1
                    ));
                    text
                }
            };
            emit(&out, &text)
        }
    }
}

fn check_tol(tol: f64) -> CliResult<()> {
    if tol.is_finite() && tol > 0.0 {
        Ok(())
    } else {
        Err(Failure::Invalid(format!("--tol must be positive and finite (got {tol})")))
    }
}

fn load_graph(args: &GraphArgs) -> CliResult<Graph> {
    match (&args.graph, &args.edges) {
        (Some(desc), None) => Ok(desc.parse::<Family>()?.build()?),
        (None, Some(path)) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
            Ok(parse_edge_list(&text)?)
        }
        _ => Err(Failure::Invalid("give either a descriptor or --edges".into())),
    }
}

fn load(args: &GraphArgs, tol: f64) -> CliResult<(Graph, Spectrum)> {
    check_tol(tol)?;
    let g = load_graph(args)?;
    let s = spectral::spectrum(&g, tol)?;
    Ok((g, s))
}

fn header(g: &Graph) -> String {
    format!(
        "# topotherm {VERSION}\n# graph: {}\n# N: {}, M: {}\n",
        g.descriptor(),
        g.order(),
        g.edge_count()
    )
}

fn spectrum_csv(g: &Graph, s: &Spectrum) -> String {
    let source = match s.source() {
        SpectrumSource::Analytic => "analytic",
        SpectrumSource::Numeric => "numeric",
    };
    let mut text = format!("{}# source: {source}\nlevel,energy,degeneracy\n", header(g));
    for (i, l) in s.levels().iter().enumerate() {
        text.push_str(&format!("{i},{},{}\n", l.energy, l.degeneracy));
    }
    text
}

fn json<T: serde::Serialize>(value: &T) -> CliResult<String> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    Ok(text)
}

fn emit(out: &OutputArgs, text: &str) -> CliResult<()> {
    match &out.out {
        Some(path) => {
            fs::write(path, text).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| Failure::Io(e.to_string()))
        }
    }
}
