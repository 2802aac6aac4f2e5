//! `octak`: exact checks and tables for modules over archimedean valuation
//! rings, emitted as versioned JSON reports.

mod commands;
mod report;

use std::io::Write;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use octak::field::{set_max_precision_bits, FieldDescriptor};
use serde_json::{json, Value};

use report::{from_error, CliError, CommandReport};

const GRAMMAR: &str = "\
Fields: Q, Q(i), Q(sqrt(D)), Q(-sqrt(D)).
Elements: rationals and i or sqrt(D) terms, e.g. 3/5+4/5*i, 1/2-1/3*sqrt(2).
Matrices: rows of elements, e.g. [[1/2],[1/2]] is a 2x1 column.
Sign patterns: comma-separated rows over + 0 -, e.g. +0,++.
Environment: OCTAK_MAX_BITS caps the precision of norm comparisons (default 4096).
Exit codes: 0 pass, 1 fail, 2 usage, 3 undecided.";

#[derive(Parser)]
#[command(name = "octak", version, about = "Exact module calculus and K-theory tables", after_help = GRAMMAR)]
struct Cli {
    /// Render the report as markdown instead of JSON.
    #[arg(long, global = true)]
    md: bool,
    #[command(subcommand)]
    command: Command,
}

fn field(s: &str) -> Result<FieldDescriptor, String> {
    s.parse().map_err(|e: octak::Error| e.to_string())
}

#[derive(Subcommand)]
enum Command {
    /// Decide whether a matrix is a cofibration of free modules.
    CheckCofib {
        #[arg(long, value_parser = field)]
        field: FieldDescriptor,
        #[arg(long, allow_hyphen_values = true)]
        matrix: String,
    },
    /// Splitting isomorphism of a cofibration.
    Split {
        #[arg(long, value_parser = field)]
        field: FieldDescriptor,
        #[arg(long, allow_hyphen_values = true)]
        matrix: String,
    },
    /// Cobase change of a cofibration along a module map.
    Pushout {
        #[arg(long, value_parser = field)]
        field: FieldDescriptor,
        #[arg(long, allow_hyphen_values = true)]
        cofib: String,
        #[arg(long, allow_hyphen_values = true)]
        map: String,
    },
    /// Abelianization of the hyperoctahedral group.
    GlAb {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        w: u32,
    },
    /// Whether the commutator subgroup is perfect.
    Perfect {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        w: u32,
    },
    /// Check the six commutator identities for [tau_i, f_j].
    CommutatorTable {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        w: u32,
    },
    /// K_0 of the residue field at infinity.
    K0Finf,
    /// Faces of the n-octahedron as sign vectors.
    Faces {
        #[arg(long)]
        n: usize,
    },
    /// Reduce an idempotent sign pattern to a multiple of [F_inf].
    K0Reduce {
        #[arg(long, allow_hyphen_values = true)]
        pattern: String,
    },
    /// K-group descriptors of the valuation ring.
    KGroups {
        #[arg(long, value_parser = field)]
        field: FieldDescriptor,
        #[arg(long, default_value_t = 2)]
        max_degree: usize,
    },
    /// Atiyah-Hirzebruch E^2 page for B(Z/w).
    AhTable {
        #[arg(long)]
        w: u64,
        #[arg(long, default_value_t = 2)]
        pmax: usize,
        #[arg(long, default_value_t = 2)]
        qmax: usize,
    },
    /// Factor a norm-one Gaussian rational.
    PythagFactor {
        #[arg(long, allow_hyphen_values = true)]
        x: String,
    },
    /// Count S_n objects over free modules and pointed E-sets.
    SconstrCount {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        rank: usize,
        #[arg(long, default_value_t = 2)]
        w: u32,
    },
}

impl Command {
    fn name_and_inputs(&self) -> (&'static str, Value) {
        match self {
            Command::CheckCofib { field, matrix } => ("check-cofib", json!({"field": field.to_string(), "matrix": matrix})),
            Command::Split { field, matrix } => ("split", json!({"field": field.to_string(), "matrix": matrix})),
            Command::Pushout { field, cofib, map } => {
                ("pushout", json!({"field": field.to_string(), "cofib": cofib, "map": map}))
            }
            Command::GlAb { n, w } => ("gl-ab", json!({"n": n, "w": w})),
            Command::Perfect { n, w } => ("perfect", json!({"n": n, "w": w})),
            Command::CommutatorTable { n, w } => ("commutator-table", json!({"n": n, "w": w})),
            Command::K0Finf => ("k0-finf", json!({})),
            Command::Faces { n } => ("faces", json!({"n": n})),
            Command::K0Reduce { pattern } => ("k0-reduce", json!({"pattern": pattern})),
            Command::KGroups { field, max_degree } => {
                ("k-groups", json!({"field": field.to_string(), "max_degree": max_degree}))
            }
            Command::AhTable { w, pmax, qmax } => ("ah-table", json!({"w": w, "pmax": pmax, "qmax": qmax})),
            Command::PythagFactor { x } => ("pythag-factor", json!({"x": x})),
            Command::SconstrCount { n, rank, w } => ("sconstr-count", json!({"n": n, "rank": rank, "w": w})),
        }
    }

    fn run(&self) -> Result<report::Outcome, CliError> {
        match self {
            Command::CheckCofib { field, matrix } => commands::check_cofib(*field, matrix),
            Command::Split { field, matrix } => commands::split(*field, matrix),
            Command::Pushout { field, cofib, map } => commands::pushout_cmd(*field, cofib, map),
            Command::GlAb { n, w } => commands::gl_ab(*n, *w),
            Command::Perfect { n, w } => commands::perfect(*n, *w),
            Command::CommutatorTable { n, w } => commands::commutator_table(*n, *w),
            Command::K0Finf => commands::k0_finf(),
            Command::Faces { n } => commands::faces(*n),
            Command::K0Reduce { pattern } => commands::k0_reduce_cmd(pattern),
            Command::KGroups { field, max_degree } => commands::k_groups(*field, *max_degree),
            Command::AhTable { w, pmax, qmax } => commands::ah_table(*w, *pmax, *qmax),
            Command::PythagFactor { x } => commands::pythag(x),
            Command::SconstrCount { n, rank, w } => commands::sconstr_count(*n, *rank, *w),
        }
    }
}

fn usage(msg: &str) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(2)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Ok(bits) = std::env::var("OCTAK_MAX_BITS") {
        match bits.trim().parse::<u64>() {
            Ok(b) if b > 0 => set_max_precision_bits(b),
            _ => return usage(&format!("OCTAK_MAX_BITS must be a positive integer, got {bits:?}")),
        }
    }
    let (name, inputs) = cli.command.name_and_inputs();
    let outcome = match cli.command.run() {
        Ok(o) => o,
        Err(CliError::Usage(msg)) => return usage(&msg),
        Err(CliError::Lib(e)) => from_error(&e),
    };
    let report = CommandReport { command: name.to_string(), inputs, outcome };
    let text = if cli.md {
        report.to_markdown()
    } else {
        serde_json::to_string_pretty(&report.to_json()).expect("serializable") + "\n"
    };
    // a closed pipe is not an error of the computation
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
    ExitCode::from(report.outcome.status.exit_code())
}
