#![allow(dead_code)]

use std::path::{Path, PathBuf};

use serde_json::Value;

pub fn data(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("data")
        .join(name)
        .display()
        .to_string()
}

/// Runs the tool in-process with `--out dir` appended.
pub fn run_in(dir: &Path, args: &[&str]) -> i32 {
    let mut argv: Vec<String> = vec!["blowup".into()];
    argv.extend(args.iter().map(|s| s.to_string()));
    argv.push("--out".into());
    argv.push(dir.display().to_string());
    blowup_cli::run(&argv)
}

pub fn summary(dir: &Path, command: &str) -> Value {
    let text = std::fs::read_to_string(dir.join(format!("{command}.json"))).expect("summary written");
    serde_json::from_str(&text).expect("summary is JSON")
}

pub fn f(v: &Value) -> f64 {
    v.as_f64().unwrap_or_else(|| panic!("expected a number, got {v}"))
}

/// Bytes of every artifact in `dir` except timing sidecars, sorted by name.
pub fn snapshot(dir: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut files: Vec<(PathBuf, Vec<u8>)> = std::fs::read_dir(dir)
        .expect("readable dir")
        .map(|e| e.expect("dir entry").path())
        .filter(|p| !p.to_string_lossy().ends_with(".timings.json"))
        .map(|p| {
            let bytes = std::fs::read(&p).expect("readable file");
            (p, bytes)
        })
        .collect();
    files.sort();
    files
}
