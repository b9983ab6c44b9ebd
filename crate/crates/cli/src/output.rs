//! Report emission: JSON envelopes, append-safe CSV rows, config hashes and
//! number formatting.

use std::fs::OpenOptions;
use std::io::Write;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::SCHEMA_VERSION;
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// First 16 hex digits of the SHA-256 of the config's compact JSON.
pub fn config_hash<T: Serialize>(cfg: &T) -> Result<String, CliError> {
    let bytes = serde_json::to_vec(cfg).map_err(|e| CliError::Runtime(e.to_string()))?;
    let digest = Sha256::digest(&bytes);
    Ok(hex::encode(&digest[..8]))
}

/// Shortest decimal that round-trips the value rounded to 15 significant
/// digits, so `0.25000000000000006` prints as `0.25`.
pub fn fmt_num(v: f64) -> String {
    if !v.is_finite() {
        return v.to_string();
    }
    let rounded: f64 = format!("{v:.14e}").parse().unwrap_or(v);
    csv_num(rounded)
}

/// Plain decimal for moderate magnitudes, scientific notation otherwise.
pub fn csv_num(v: f64) -> String {
    if v != 0.0 && v.is_finite() && (v.abs() < 1e-4 || v.abs() >= 1e15) {
        format!("{v:e}")
    } else {
        v.to_string()
    }
}

#[derive(Serialize)]
struct Envelope<'a, R: Serialize> {
    schema: u64,
    command: &'a str,
    config_hash: &'a str,
    pass: bool,
    report: &'a R,
}

/// Write text to `out`, or stdout when absent.
pub fn write_text(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(p) => std::fs::write(p, text)
            .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", p.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            match stdout.write_all(text.as_bytes()).and_then(|_| stdout.flush()) {
                // a closed reader (e.g. `| head`) is not a failure of the run
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(CliError::Runtime(e.to_string())),
                _ => Ok(()),
            }
        }
    }
}

pub fn emit_json<R: Serialize>(
    out: Option<&Path>,
    command: &str,
    config_hash: &str,
    pass: bool,
    report: &R,
) -> Result<(), CliError> {
    let env = Envelope {
        schema: SCHEMA_VERSION,
        command,
        config_hash,
        pass,
        report,
    };
    let mut text = serde_json::to_string_pretty(&env).map_err(|e| CliError::Runtime(e.to_string()))?;
    text.push('\n');
    write_text(out, &text)
}

/// Write CSV rows. With a file target the rows are appended and the header is
/// written only when the file is new or empty.
pub fn emit_csv(out: Option<&Path>, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Runtime(e.to_string());
    let csv_err = |e: csv::Error| CliError::Runtime(e.to_string());
    match out {
        Some(p) => {
            let fresh = std::fs::metadata(p).map(|m| m.len() == 0).unwrap_or(true);
            let file = OpenOptions::new().create(true).append(true).open(p).map_err(io)?;
            let mut w = csv::Writer::from_writer(file);
            if fresh {
                w.write_record(header).map_err(csv_err)?;
            }
            for r in rows {
                w.write_record(r).map_err(csv_err)?;
            }
            w.flush().map_err(io)
        }
        None => {
            let mut w = csv::Writer::from_writer(std::io::stdout().lock());
            w.write_record(header).map_err(csv_err)?;
            for r in rows {
                w.write_record(r).map_err(csv_err)?;
            }
            w.flush().map_err(io)
        }
    }
}
