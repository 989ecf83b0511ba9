//! Command-line driver: parses a [`RunConfig`], runs one toolkit operation and
//! writes its artifacts.
//!
//! Every run that gets past argument parsing writes `<command>.json` into the
//! output directory: the echoed configuration, a status, and either a result
//! or an error message. Wall-clock timings go to `<command>.timings.json` so
//! that the summary itself is byte-for-byte reproducible.

mod commands;
pub mod config;
pub mod svg;

use std::path::Path;
use std::time::Instant;

use clap::Parser;
use serde_json::{json, Value};

pub use config::{Command, RunConfig};

/// Exit code for success.
pub const EXIT_OK: i32 = 0;
/// Exit code for domain errors (no cycle, inconclusive box, divergence...).
pub const EXIT_DOMAIN: i32 = 1;
/// Exit code for usage errors.
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug)]
pub(crate) enum Failure {
    Usage(String),
    Domain(String),
}

impl<E: std::error::Error> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Domain(e.to_string())
    }
}

/// Outcome of a command: the JSON result and the files it wrote.
pub(crate) struct Output {
    pub result: Value,
    pub artifacts: Vec<String>,
}

/// Rounds every float in `v` to 16 significant digits.
pub fn sig16(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().expect("f64 number");
            let r: f64 = format!("{x:.15e}").parse().expect("formatted float parses");
            json!(r)
        }
        Value::Array(a) => Value::Array(a.into_iter().map(sig16).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, sig16(v))).collect()),
        other => other,
    }
}

fn write_json(path: &Path, v: &Value) -> std::io::Result<()> {
    let mut text = serde_json::to_string_pretty(v).expect("JSON values serialize");
    text.push('\n');
    std::fs::write(path, text)
}

/// Runs the tool on `argv` (program name first) and returns the exit code.
pub fn run<S: AsRef<str>>(argv: &[S]) -> i32 {
    let cfg = match RunConfig::try_parse_from(argv.iter().map(|s| s.as_ref())) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    if let Err(msg) = cfg.validate() {
        eprintln!("error: {msg}\n\nRun with --help for usage.");
        return EXIT_USAGE;
    }
    if let Err(e) = std::fs::create_dir_all(&cfg.out) {
        eprintln!("error: cannot create output directory {}: {e}", cfg.out.display());
        return EXIT_USAGE;
    }

    let name = cfg.command.name();
    let started = Instant::now();
    let outcome = commands::dispatch(&cfg);
    let elapsed = started.elapsed().as_secs_f64();

    let (code, status, result, error, artifacts) = match outcome {
        Ok(out) => (EXIT_OK, "ok", out.result, Value::Null, out.artifacts),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            return EXIT_USAGE;
        }
        Err(Failure::Domain(msg)) => {
            eprintln!("error: {msg}");
            (EXIT_DOMAIN, "domain_error", Value::Null, json!(msg), Vec::new())
        }
    };
    let summary = json!({
        "command": name,
        "status": status,
        "config": serde_json::to_value(&cfg).expect("config serializes"),
        "result": sig16(result),
        "error": error,
        "artifacts": artifacts,
    });
    let summary_path = cfg.out.join(format!("{name}.json"));
    let timings_path = cfg.out.join(format!("{name}.timings.json"));
    let written = write_json(&summary_path, &summary)
        .and_then(|_| write_json(&timings_path, &json!({ "command": name, "wall_seconds": elapsed })));
    if let Err(e) = written {
        eprintln!("error: cannot write summary: {e}");
        return EXIT_DOMAIN;
    }
    if code == EXIT_OK {
        println!("{}", summary_path.display());
    }
    code
}
