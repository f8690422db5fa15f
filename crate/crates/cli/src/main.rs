//! Command-line interface for the spacetime-forge toolkit.
//!
//! One subcommand per pipeline stage: build complexes from code files,
//! reduce them, assemble spacetime complexes from circuits, compute
//! distances and decoding witnesses, compile circuits to measurement
//! patterns, foliate codes and measurement schedules, and compare
//! artifacts. Outputs are deterministic byte-for-byte for a given input
//! and flag set.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;
use spacetime_forge::chainmap::reduce_to_fixpoint;
use spacetime_forge::circuit::{classify_stabilizers, parse_circuit, spacetime_complex};
use spacetime_forge::compile::compile;
use spacetime_forge::complex::ChainComplex2;
use spacetime_forge::foliate::{
    foliate_css, foliate_dynamical, foliate_stabilizer, DynamicalSchedule, LayeredComplex,
};
use spacetime_forge::gf2::BitVector;
use spacetime_forge::mbqc::{cluster_state_complex, parse_pattern};
use spacetime_forge::pauli::{parse_code_file, CodeFile};

const DEFAULT_CAP: usize = 24;

/// Chain-complex toolkit for stabilizer codes, Clifford circuits, and
/// measurement-based protocols.
#[derive(Parser)]
#[command(name = "spacetime-forge", version, disable_help_subcommand = true)]
struct Cli {
    /// Worker threads for library parallelism (currently single-threaded;
    /// accepted for forward compatibility).
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Dot,
}

#[derive(Subcommand)]
enum Command {
    /// Build the chain complex of a code description file.
    Complex {
        /// Code file: `N <n>` header, then `G`/`S` Pauli rows or `SX`/`SZ`
        /// bit rows.
        file: PathBuf,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        /// Write output here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Reduce a complex to its rewrite fixpoint and report the trace.
    Reduce {
        /// Complex in the JSON schema.
        file: PathBuf,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build the spacetime complex of a circuit and classify its
    /// stabilizer generators as detectors.
    Spacetime {
        /// Circuit in the circuit text format.
        file: PathBuf,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Code distance of a complex by capped enumeration.
    Distance {
        /// Complex in the JSON schema.
        file: PathBuf,
        /// Enumeration cap on dim C1 (default 24; env SPACETIME_FORGE_CAP
        /// overrides the default).
        #[arg(long)]
        cap: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Minimum-weight decoding of a syndrome over a complex.
    Mwd {
        /// Complex in the JSON schema.
        file: PathBuf,
        /// Syndrome bit string over the detector nodes, e.g. `101`.
        syndrome: String,
        #[arg(long)]
        cap: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compile a circuit to a measurement pattern.
    Compile {
        /// Circuit in the circuit text format.
        file: PathBuf,
        /// Check the pattern's complex against the spacetime complex of
        /// its own realization.
        #[arg(long)]
        verify: bool,
        #[arg(long)]
        cap: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Foliate a code file or a measurement schedule into a layered
    /// cluster state.
    Foliate {
        /// Code file, or schedule file with `INPUT`/`M`/`ROUND` lines.
        file: PathBuf,
        /// Measurement rounds (code files only; schedules fix their own).
        #[arg(long, default_value_t = 1)]
        rounds: usize,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare two artifacts (complex JSON or pattern text) on homology
    /// dimension, distance, and detector count.
    Equiv {
        first: PathBuf,
        second: PathBuf,
        #[arg(long)]
        cap: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Failures are split by exit code: bad input text exits 2, everything
/// else (library errors, I/O) exits 1.
enum CliError {
    Parse(String),
    Domain(String),
}

impl CliError {
    fn parse(e: impl std::fmt::Display) -> Self {
        CliError::Parse(e.to_string())
    }

    fn domain(e: impl std::fmt::Display) -> Self {
        CliError::Domain(e.to_string())
    }
}

fn resolve_cap(flag: Option<usize>) -> usize {
    if let Some(cap) = flag {
        return cap;
    }
    std::env::var("SPACETIME_FORGE_CAP")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(DEFAULT_CAP)
}

fn read(path: &PathBuf) -> Result<String, CliError> {
    fs::read_to_string(path)
        .map_err(|e| CliError::Domain(format!("cannot read {}: {e}", path.display())))
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, text)
            .map_err(|e| CliError::Domain(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load_complex(path: &PathBuf) -> Result<ChainComplex2, CliError> {
    ChainComplex2::from_json(&read(path)?).map_err(CliError::parse)
}

fn render_complex(c: &ChainComplex2, format: Format) -> String {
    match format {
        Format::Json => {
            let mut s = c.to_json();
            s.push('\n');
            s
        }
        Format::Dot => c.to_dot(),
    }
}

fn layered_json(lc: &LayeredComplex) -> serde_json::Value {
    json!({
        "complex": serde_json::from_str::<serde_json::Value>(&lc.complex().complex().to_json())
            .expect("complex JSON is valid"),
        "nodes": lc.nodes(),
        "layer_count": lc.layer_count(),
        "detector_count": lc.detector_count(),
        "pattern": lc.pattern().to_text(),
    })
}

/// An artifact file for `equiv`: complex JSON (starts with `{`) or a
/// measurement pattern, whose cluster-state complex is compared.
fn load_artifact(path: &PathBuf) -> Result<ChainComplex2, CliError> {
    let text = read(path)?;
    if text.trim_start().starts_with('{') {
        ChainComplex2::from_json(&text).map_err(CliError::parse)
    } else {
        let pattern = parse_pattern(&text).map_err(CliError::parse)?;
        let csc = cluster_state_complex(&pattern).map_err(CliError::domain)?;
        Ok(csc.complex().clone())
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    if cli.jobs == 0 {
        return Err(CliError::Domain("--jobs must be at least 1".to_string()));
    }
    match cli.command {
        Command::Complex { file, format, out } => {
            let code = parse_code_file(&read(&file)?).map_err(CliError::parse)?;
            let complex = code.to_complex().map_err(CliError::domain)?;
            emit(&out, &render_complex(&complex, format))
        }
        Command::Reduce { file, format, out } => {
            let complex = load_complex(&file)?;
            let reduction = reduce_to_fixpoint(&complex).map_err(CliError::domain)?;
            let text = match format {
                Format::Json => {
                    let doc = json!({
                        "complex": serde_json::from_str::<serde_json::Value>(
                            &reduction.complex.to_json()
                        )
                        .expect("complex JSON is valid"),
                        "trace": reduction.trace_entries(),
                    });
                    format!("{:#}\n", doc)
                }
                Format::Dot => {
                    let mut s = String::new();
                    for entry in reduction.trace_entries() {
                        s.push_str(&format!(
                            "// {:?} at {} [{}]\n",
                            entry.rule,
                            entry.gauge_label,
                            entry.affected_labels.join(", ")
                        ));
                    }
                    s.push_str(&reduction.complex.to_dot());
                    s
                }
            };
            emit(&out, &text)
        }
        Command::Spacetime { file, format, out } => {
            let circuit = parse_circuit(&read(&file)?)
                .map_err(CliError::parse)?
                .normalize();
            let sc = spacetime_complex(&circuit).map_err(CliError::domain)?;
            let detectors = classify_stabilizers(&sc, &circuit).map_err(CliError::domain)?;
            let text = match format {
                Format::Json => {
                    let doc = json!({
                        "complex": serde_json::from_str::<serde_json::Value>(
                            &sc.complex().to_json()
                        )
                        .expect("complex JSON is valid"),
                        "detectors": detectors,
                    });
                    format!("{:#}\n", doc)
                }
                Format::Dot => sc.complex().to_dot(),
            };
            emit(&out, &text)
        }
        Command::Distance { file, cap, out } => {
            let complex = load_complex(&file)?;
            let d = complex.distance(resolve_cap(cap)).map_err(CliError::domain)?;
            emit(&out, &format!("{d}\n"))
        }
        Command::Mwd {
            file,
            syndrome,
            cap,
            out,
        } => {
            let complex = load_complex(&file)?;
            let s = BitVector::parse(&syndrome)
                .ok_or_else(|| CliError::Parse(format!("bad syndrome bit string '{syndrome}'")))?;
            let (weight, witness) = complex
                .mwd(&s, resolve_cap(cap))
                .map_err(CliError::domain)?;
            emit(&out, &format!("weight: {weight}\nwitness: {witness}\n"))
        }
        Command::Compile {
            file,
            verify,
            cap,
            out,
        } => {
            let circuit = parse_circuit(&read(&file)?).map_err(CliError::parse)?;
            let result = compile(&circuit, verify, resolve_cap(cap)).map_err(CliError::domain)?;
            emit(&out, &result.pattern.to_text())?;
            if let Some(report) = &result.report {
                if report.equivalent() {
                    let d = report
                        .distance
                        .map(|(d, _)| d.to_string())
                        .unwrap_or_else(|| "-".to_string());
                    println!("equivalent: dim H1={} d={}", report.dim_h1.0, d);
                } else {
                    for failure in &report.failures {
                        eprintln!("verification failed: {failure}");
                    }
                    return Err(CliError::Domain(
                        "pattern is not equivalent to its realization".to_string(),
                    ));
                }
            }
            Ok(())
        }
        Command::Foliate {
            file,
            rounds,
            format,
            out,
        } => {
            let text = read(&file)?;
            let is_schedule = text.lines().any(|raw| {
                let line = raw.split('#').next().unwrap_or("").trim();
                line.starts_with("M ") || line == "ROUND" || line.starts_with("INPUT ")
            });
            let lc = if is_schedule {
                let schedule = DynamicalSchedule::parse(&text).map_err(CliError::parse)?;
                foliate_dynamical(&schedule).map_err(CliError::domain)?
            } else {
                match parse_code_file(&text).map_err(CliError::parse)? {
                    CodeFile::Css { h_x, h_z } => {
                        foliate_css(&h_x, &h_z, rounds).map_err(CliError::domain)?
                    }
                    CodeFile::Stabilizer(code) => {
                        foliate_stabilizer(&code, rounds).map_err(CliError::domain)?
                    }
                    CodeFile::Subsystem(_) => {
                        return Err(CliError::Domain(
                            "subsystem codes need a measurement schedule".to_string(),
                        ))
                    }
                }
            };
            let rendered = match format {
                Format::Json => format!("{:#}\n", layered_json(&lc)),
                Format::Dot => lc.complex().complex().to_dot(),
            };
            emit(&out, &rendered)
        }
        Command::Equiv {
            first,
            second,
            cap,
            out,
        } => {
            let a = load_artifact(&first)?;
            let b = load_artifact(&second)?;
            let cap = resolve_cap(cap);
            let h1 = (a.homology_dimension(), b.homology_dimension());
            let detectors = (a.dim_c0(), b.dim_c0());
            let distance = if h1.0 > 0 && h1.1 > 0 {
                Some((
                    a.distance(cap).map_err(CliError::domain)?,
                    b.distance(cap).map_err(CliError::domain)?,
                ))
            } else {
                None
            };
            let equivalent =
                h1.0 == h1.1 && detectors.0 == detectors.1 && distance.map_or(true, |(x, y)| x == y);
            let mut text = format!("dim H1: {} vs {}\n", h1.0, h1.1);
            if let Some((x, y)) = distance {
                text.push_str(&format!("distance: {x} vs {y}\n"));
            }
            text.push_str(&format!("detectors: {} vs {}\n", detectors.0, detectors.1));
            text.push_str(&format!(
                "equivalent: {}\n",
                if equivalent { "yes" } else { "no" }
            ));
            emit(&out, &text)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Domain(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(1)
        }
        Err(CliError::Parse(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}
