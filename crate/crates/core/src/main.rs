use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use simtri::analysis::{self, GridSpec};
use simtri::bench::{self, BenchConfig};
use simtri::bounds::BoundKind;
use simtri::datagen::random_unit_vectors;
use simtri::index::{Hit, LaesaIndex, Query, QueryStats, SavedIndex, VpTree};
use simtri::io::{self as dataio, Format};
use simtri::oracle::{self, OracleConfig};
use simtri::{normalize, DataError, SimError, Similarity, UnitVector};

#[derive(Parser)]
#[command(
    name = "simtri",
    version,
    about = "Cosine-similarity triangle bounds, indexes and experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Emit a bound surface (or the difference of two) as s1,s2,value CSV.
    Surface {
        #[arg(long)]
        bound: BoundKind,
        /// Subtract this bound cell-wise.
        #[arg(long)]
        minus: Option<BoundKind>,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Average Euclidean vs Arccos bound, gaps, ordering and stability figures.
    Report {
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Maximum disagreement between Mult and Arccos (and MultVariant vs Mult).
    Stability {
        #[command(flatten)]
        grid: GridArgs,
        /// Only evaluate the diagonal s1 = s2.
        #[arg(long)]
        diagonal: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Time every bound on a pre-generated random array.
    Bench {
        #[arg(long, default_value_t = 2_000_000)]
        size: usize,
        #[arg(long, default_value_t = 5)]
        warmup: usize,
        #[arg(long, default_value_t = 10)]
        iters: usize,
        /// Minimum duration of each iteration in milliseconds.
        #[arg(long, default_value_t = 100)]
        target_ms: u64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Emit CSV instead of the aligned table.
        #[arg(long)]
        csv: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build an index over a dataset file and save it.
    Build {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value = "dense")]
        format: Format,
        #[arg(long, default_value = "vp")]
        index: IndexKind,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 8)]
        leaf_capacity: usize,
        #[arg(long, default_value_t = 16)]
        pivots: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run range or kNN queries against a saved index; prints JSON.
    Query {
        #[arg(long)]
        index: PathBuf,
        /// Inline query: `0.1,0.2,...` or `3:0.5 7:1.0`.
        #[arg(long, conflicts_with = "q_file", required_unless_present = "q_file")]
        q: Option<String>,
        /// One query per line, same syntax as --q.
        #[arg(long)]
        q_file: Option<PathBuf>,
        #[arg(long, group = "mode", allow_hyphen_values = true)]
        tau: Option<f64>,
        /// Threshold as an angle in degrees.
        #[arg(long, group = "mode")]
        tau_deg: Option<f64>,
        #[arg(long, group = "mode")]
        k: Option<usize>,
        #[arg(long)]
        stats: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare both indexes against a linear scan; exits 3 on any mismatch.
    OracleCheck {
        #[arg(long = "in", conflicts_with_all = ["n", "dim"])]
        input: Option<PathBuf>,
        #[arg(long, default_value = "dense")]
        format: Format,
        /// Size of a generated random dataset (when --in is absent).
        #[arg(long, default_value_t = 1000)]
        n: usize,
        #[arg(long, default_value_t = 10)]
        dim: usize,
        #[arg(long, default_value_t = 50)]
        queries: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 8)]
        leaf_capacity: usize,
        #[arg(long, default_value_t = 16)]
        pivots: usize,
        #[arg(long, default_value_t = 10)]
        k: usize,
        /// Fraction of points each range query should select.
        #[arg(long, default_value_t = 0.01)]
        fraction: f64,
    },
}

#[derive(Args, Clone, Copy)]
struct GridArgs {
    #[arg(long, default_value_t = -1.0, allow_hyphen_values = true)]
    lo: f64,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    hi: f64,
    #[arg(long, default_value_t = 2001)]
    steps: usize,
}

impl GridArgs {
    fn spec(self) -> Result<GridSpec, CliError> {
        GridSpec::new(self.lo, self.hi, self.steps).map_err(|e| CliError::Usage(e.to_string()))
    }
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum IndexKind {
    Vp,
    Laesa,
}

enum CliError {
    Usage(String),
    Data(String),
    Verify(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Verify(_) => 3,
        }
    }
}

impl From<DataError> for CliError {
    fn from(e: DataError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

fn data_err(e: SimError) -> CliError {
    CliError::Data(e.to_string())
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
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let (CliError::Usage(m) | CliError::Data(m) | CliError::Verify(m)) = &e;
            eprintln!("simtri: {m}");
            ExitCode::from(e.code())
        }
    }
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| CliError::Data(format!("{}: {e}", p.display())))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Surface {
            bound,
            minus,
            grid,
            out,
        } => {
            let spec = grid.spec()?;
            let surface = match minus {
                Some(other) => analysis::difference_surface(bound, other, spec),
                None => analysis::surface(bound, spec),
            };
            let mut w = output(out.as_deref())?;
            surface.write_csv(&mut w)?;
            w.flush()?;
        }
        Command::Report { grid, out } => {
            let report = analysis::average_report(grid.spec()?);
            let mut w = output(out.as_deref())?;
            report.write_csv(&mut w)?;
            w.flush()?;
        }
        Command::Stability {
            grid,
            diagonal,
            out,
        } => {
            let spec = grid.spec()?;
            let r = if diagonal {
                analysis::stability_report_diagonal(spec)
            } else {
                analysis::stability_report(spec)
            };
            let mut w = output(out.as_deref())?;
            writeln!(w, "key,value")?;
            writeln!(w, "max_abs_mult_minus_arccos,{:.16e}", r.max_mult_arccos)?;
            writeln!(w, "at_s1,{:.16e}", r.at.0)?;
            writeln!(w, "at_s2,{:.16e}", r.at.1)?;
            writeln!(w, "max_abs_variant_minus_mult,{:.16e}", r.max_variant_mult)?;
            writeln!(w, "cells,{}", r.cells)?;
            w.flush()?;
        }
        Command::Bench {
            size,
            warmup,
            iters,
            target_ms,
            seed,
            csv,
            out,
        } => {
            let config = BenchConfig {
                array_size: size,
                warmup_iters: warmup,
                measure_iters: iters,
                iter_duration_target: Duration::from_millis(target_ms),
                seed,
            };
            config
                .validate()
                .map_err(|e| CliError::Usage(e.to_string()))?;
            let report = bench::run_bench(&config).map_err(data_err)?;
            let mut w = output(out.as_deref())?;
            if csv {
                report.write_csv(&mut w)?;
            } else {
                write!(w, "{}", report.to_table())?;
            }
            w.flush()?;
        }
        Command::Build {
            input,
            format,
            index,
            seed,
            leaf_capacity,
            pivots,
            out,
        } => {
            if leaf_capacity == 0 {
                return Err(CliError::Usage("--leaf-capacity must be at least 1".into()));
            }
            let data = dataio::load_unit_vectors(&input, format)?;
            let n = data.len();
            let saved = match index {
                IndexKind::Vp => {
                    SavedIndex::Vp(VpTree::build(data, leaf_capacity, seed).map_err(data_err)?)
                }
                IndexKind::Laesa => {
                    if pivots == 0 || pivots > n {
                        return Err(CliError::Usage(format!(
                            "--pivots {pivots} out of range for {n} vectors"
                        )));
                    }
                    SavedIndex::Laesa(LaesaIndex::build(data, pivots, seed).map_err(data_err)?)
                }
            };
            saved.save(&out)?;
            eprintln!(
                "built {} index over {n} vectors -> {}",
                saved.kind_name(),
                out.display()
            );
        }
        Command::Query {
            index,
            q,
            q_file,
            tau,
            tau_deg,
            k,
            stats,
            out,
        } => {
            let query = match (tau, tau_deg, k) {
                (Some(t), None, None) => Query::Range(
                    Similarity::try_new(t)
                        .map_err(|_| CliError::Usage(format!("--tau {t} outside [-1, 1]")))?,
                ),
                (None, Some(d), None) => Query::Range(Similarity::from_degrees(d)),
                (None, None, Some(k)) => Query::Knn(k),
                _ => {
                    return Err(CliError::Usage(
                        "exactly one of --tau, --tau-deg, --k is required".into(),
                    ))
                }
            };
            let saved = SavedIndex::load(&index)?;
            let queries = match (&q, &q_file) {
                (Some(text), _) => vec![parse_query(text, "--q", 0)?],
                (None, Some(path)) => read_query_file(path)?,
                (None, None) => return Err(CliError::Usage("--q or --q-file is required".into())),
            };
            if let Query::Knn(k) = query {
                if k == 0 || k > saved.data().len() {
                    return Err(CliError::Usage(format!(
                        "--k {k} out of range for {} indexed vectors",
                        saved.data().len()
                    )));
                }
            }
            let mut answers = Vec::with_capacity(queries.len());
            for qv in &queries {
                let (results, qstats) = match &saved {
                    SavedIndex::Vp(t) => t.query(qv, query),
                    SavedIndex::Laesa(l) => l.query(qv, query),
                }
                .map_err(data_err)?;
                answers.push(Answer {
                    results,
                    stats: stats.then_some(qstats),
                });
            }
            let mut w = output(out.as_deref())?;
            let json = if q.is_some() {
                serde_json::to_string_pretty(&answers[0])
            } else {
                serde_json::to_string_pretty(&answers)
            }
            .expect("answers serialize");
            writeln!(w, "{json}")?;
            w.flush()?;
        }
        Command::OracleCheck {
            input,
            format,
            n,
            dim,
            queries,
            seed,
            leaf_capacity,
            pivots,
            k,
            fraction,
        } => {
            if leaf_capacity == 0 || pivots == 0 || k == 0 || queries == 0 {
                return Err(CliError::Usage(
                    "--leaf-capacity, --pivots, --k and --queries must be at least 1".into(),
                ));
            }
            if !(fraction > 0.0 && fraction <= 1.0) {
                return Err(CliError::Usage("--fraction must lie in (0, 1]".into()));
            }
            let data = match &input {
                Some(path) => dataio::load_unit_vectors(path, format)?,
                None => {
                    if n == 0 || dim == 0 {
                        return Err(CliError::Usage("--n and --dim must be at least 1".into()));
                    }
                    random_unit_vectors(n, dim, seed)
                }
            };
            if data.is_empty() {
                return Err(CliError::Data("dataset is empty".into()));
            }
            let qs = oracle::default_queries(&data, queries, seed);
            let config = OracleConfig {
                leaf_capacity,
                pivots,
                k,
                match_fraction: fraction,
                seed,
            };
            let report = oracle::oracle_check(&data, &qs, &config).map_err(data_err)?;
            let mut w = output(None)?;
            writeln!(
                w,
                "dataset: n={} queries={} mean_range_hits={:.2} audit_violations={}",
                report.n,
                qs.len(),
                report.mean_range_hits,
                report.audit_violations
            )?;
            for (name, m) in report.modes() {
                writeln!(
                    w,
                    "{name:<12} mismatches={} mean_sims_computed={:.1} mean_nodes_pruned={:.1} mean_candidates_filtered={:.1}",
                    m.mismatches, m.mean_sims_computed, m.mean_nodes_pruned, m.mean_candidates_filtered
                )?;
            }
            w.flush()?;
            if !report.passed() {
                return Err(CliError::Verify(format!(
                    "{} mismatches against linear scan",
                    report.total_mismatches()
                )));
            }
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct Answer {
    results: Vec<Hit>,
    #[serde(skip_serializing_if = "Option::is_none")]
    stats: Option<QueryStats>,
}

fn parse_query(text: &str, origin: &str, line: usize) -> Result<UnitVector, CliError> {
    let at = if line > 0 {
        format!("{origin}:{line}")
    } else {
        origin.to_string()
    };
    let v = dataio::parse_vector(text).map_err(|m| CliError::Data(format!("{at}: {m}")))?;
    normalize(v).map_err(|e| CliError::Data(format!("{at}: {e}")))
}

fn read_query_file(path: &Path) -> Result<Vec<UnitVector>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    let origin = path.display().to_string();
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
        .map(|(i, l)| parse_query(l.trim(), &origin, i + 1))
        .collect()
}
