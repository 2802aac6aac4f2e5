use octak::Error;
use serde_json::{json, Value};

pub const SCHEMA: &str = "octak/1";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    Undecided,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Undecided => "undecided",
        }
    }

    pub fn exit_code(self) -> u8 {
        match self {
            Status::Pass => 0,
            Status::Fail => 1,
            Status::Undecided => 3,
        }
    }
}

/// What a subcommand produces before the shared envelope is added.
pub struct Outcome {
    pub status: Status,
    pub payload: Value,
    pub summary: String,
    /// Optional markdown body replacing the generic payload table.
    pub markdown: Option<String>,
}

impl Outcome {
    pub fn new(status: Status, payload: Value, summary: impl Into<String>) -> Self {
        Outcome { status, payload, summary: summary.into(), markdown: None }
    }

    pub fn pass_if(ok: bool, payload: Value, summary: impl Into<String>) -> Self {
        Self::new(if ok { Status::Pass } else { Status::Fail }, payload, summary)
    }

    pub fn with_markdown(mut self, md: String) -> Self {
        self.markdown = Some(md);
        self
    }
}

pub enum CliError {
    Usage(String),
    Lib(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse(p) => CliError::Usage(p.to_string()),
            Error::InvalidField(_)
            | Error::NotInField(_)
            | Error::DimensionMismatch { .. }
            | Error::FieldMismatch
            | Error::UnsupportedUnitGroup(_)
            | Error::UnsupportedDegree(_)
            | Error::UnsupportedStem(_) => CliError::Usage(e.to_string()),
            other => CliError::Lib(other),
        }
    }
}

/// Library errors that are not usage errors become fail or undecided reports.
pub fn from_error(e: &Error) -> Outcome {
    let status = match e {
        Error::PrecisionExhausted { .. } | Error::BudgetExceeded { .. } => Status::Undecided,
        _ => Status::Fail,
    };
    let kind = format!("{e:?}");
    let kind = kind.split(['(', ' ', '{']).next().unwrap_or_default().to_string();
    Outcome::new(status, json!({ "reason": kind, "witness": e.to_string() }), e.to_string())
}

pub struct CommandReport {
    pub command: String,
    pub inputs: Value,
    pub outcome: Outcome,
}

impl CommandReport {
    pub fn to_json(&self) -> Value {
        json!({
            "schema": SCHEMA,
            "command": self.command,
            "inputs": self.inputs,
            "status": self.outcome.status.as_str(),
            "payload": self.outcome.payload,
            "summary": self.outcome.summary,
        })
    }

    pub fn to_markdown(&self) -> String {
        let mut out = format!("# octak {}\n\n", self.command);
        out.push_str(&format!("- schema: `{SCHEMA}`\n- status: **{}**\n", self.outcome.status.as_str()));
        if let Some(inputs) = self.inputs.as_object() {
            for (k, v) in inputs {
                out.push_str(&format!("- {k}: `{}`\n", cell(v)));
            }
        }
        out.push_str(&format!("\n{}\n\n", self.outcome.summary));
        match &self.outcome.markdown {
            Some(md) => out.push_str(md),
            None => out.push_str(&key_value_table(&self.outcome.payload)),
        }
        out
    }
}

fn cell(v: &Value) -> String {
    let s = match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    };
    s.replace('|', "\\|")
}

pub fn key_value_table(payload: &Value) -> String {
    let mut out = String::from("| key | value |\n|---|---|\n");
    match payload.as_object() {
        Some(map) => {
            for (k, v) in map {
                out.push_str(&format!("| {k} | {} |\n", cell(v)));
            }
        }
        None => out.push_str(&format!("| value | {} |\n", cell(payload))),
    }
    out
}

/// Markdown table from a header and rows of cells.
pub fn table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = format!("| {} |\n|{}\n", header.join(" | "), "---|".repeat(header.len()));
    for row in rows {
        let cells: Vec<String> = row.iter().map(|c| c.replace('|', "\\|")).collect();
        out.push_str(&format!("| {} |\n", cells.join(" | ")));
    }
    out
}
