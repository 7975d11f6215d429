//! Text formats for opinion vectors and allocation plans.
//!
//! Opinion files hold one decimal per line; plan files are CSV with an
//! `agent,u` header. `#` comments and blank lines are ignored in both.

use std::path::Path;
use thiserror::Error;

/// Hard cap on entries accepted from external files.
pub const MAX_ENTRIES: usize = 1_000_000;

#[derive(Debug, Error)]
pub enum FileError {
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("file holds {got} entries, expected {expected}")]
    Length { expected: usize, got: usize },
    #[error("too many entries (limit {MAX_ENTRIES})")]
    TooMany,
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Parse a one-value-per-line vector file.
pub fn parse_vector(text: &str) -> Result<Vec<f64>, FileError> {
    let mut out = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let v: f64 = line.parse().map_err(|_| FileError::Parse {
            line: lineno + 1,
            msg: format!("invalid value `{line}`"),
        })?;
        if !v.is_finite() {
            return Err(FileError::Parse {
                line: lineno + 1,
                msg: format!("non-finite value `{line}`"),
            });
        }
        if out.len() >= MAX_ENTRIES {
            return Err(FileError::TooMany);
        }
        out.push(v);
    }
    Ok(out)
}

pub fn vector_to_string(v: &[f64]) -> String {
    let mut s = String::new();
    for x in v {
        s.push_str(&x.to_string());
        s.push('\n');
    }
    s
}

pub fn load_vector<P: AsRef<Path>>(path: P) -> Result<Vec<f64>, FileError> {
    parse_vector(&std::fs::read_to_string(path)?)
}

/// Parse a plan file into `(agent, u)` pairs. The `agent,u` header line
/// is optional; duplicate agents are rejected.
pub fn parse_plan(text: &str) -> Result<Vec<(usize, f64)>, FileError> {
    let mut out: Vec<(usize, f64)> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') || line == "agent,u" {
            continue;
        }
        let (a, u) = line.split_once(',').ok_or(FileError::Parse {
            line: lineno + 1,
            msg: format!("expected `agent,u`, got `{line}`"),
        })?;
        let agent: usize = a.trim().parse().map_err(|_| FileError::Parse {
            line: lineno + 1,
            msg: format!("invalid agent index `{a}`"),
        })?;
        let u: f64 = u.trim().parse().map_err(|_| FileError::Parse {
            line: lineno + 1,
            msg: format!("invalid input value `{u}`"),
        })?;
        if !u.is_finite() {
            return Err(FileError::Parse {
                line: lineno + 1,
                msg: format!("non-finite input value `{u}`"),
            });
        }
        if out.iter().any(|&(i, _)| i == agent) {
            return Err(FileError::Parse {
                line: lineno + 1,
                msg: format!("duplicate agent {agent}"),
            });
        }
        if out.len() >= MAX_ENTRIES {
            return Err(FileError::TooMany);
        }
        out.push((agent, u));
    }
    Ok(out)
}

/// Expand parsed pairs into a dense length-`n` input vector.
pub fn plan_to_dense(pairs: &[(usize, f64)], n: usize) -> Result<Vec<f64>, FileError> {
    let mut u = vec![0.0; n];
    for &(agent, v) in pairs {
        if agent >= n {
            return Err(FileError::Length {
                expected: n,
                got: agent + 1,
            });
        }
        u[agent] = v;
    }
    Ok(u)
}

pub fn plan_to_string(u: &[f64]) -> String {
    let mut s = String::from("agent,u\n");
    for (i, v) in u.iter().enumerate() {
        s.push_str(&format!("{i},{v}\n"));
    }
    s
}

pub fn load_plan<P: AsRef<Path>>(path: P, n: usize) -> Result<Vec<f64>, FileError> {
    let pairs = parse_plan(&std::fs::read_to_string(path)?)?;
    plan_to_dense(&pairs, n)
}
