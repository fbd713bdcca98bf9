//! Command implementations behind the `gridforge` binary, plus the serve
//! protocol. Every command writes to a caller-supplied sink so tests can
//! drive it without spawning a process.

use std::fmt::Display;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use gridforge::env::{Env, LevelSource, ResetOptions};
use gridforge::levelgen::{generate as gen_level, reachability_hint, GenParams};
use gridforge::rollout::{bench, rollout, Policy};
use gridforge::trajectory::{replay as replay_record, TrajectoryError, TrajectoryRecord};
use gridforge::{assets, parse_gdy, GdyDocument};
use serde_json::{json, Value};
use thiserror::Error;

pub mod http;
pub mod play;
pub mod report;
pub mod serve;

pub const EXIT_OK: i32 = 0;
pub const EXIT_DOMAIN: i32 = 1;
pub const EXIT_IO: i32 = 2;
pub const EXIT_VERIFY: i32 = 3;
pub const EXIT_HASH_MISMATCH: i32 = 4;

pub const DEFAULT_PORT: u16 = 8877;

#[derive(Debug, Error)]
#[error("{message}")]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn domain(message: impl Into<String>) -> Self {
        Self { code: EXIT_DOMAIN, message: message.into() }
    }

    pub fn io(what: impl Display, e: io::Error) -> Self {
        Self { code: EXIT_IO, message: format!("{what}: {e}") }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        Self { code: EXIT_IO, message: e.to_string() }
    }
}

/// Reads a GDY argument: `builtin:<name>` or a file path.
pub fn read_gdy_text(arg: &str) -> Result<String, CliError> {
    if let Some(name) = arg.strip_prefix("builtin:") {
        return match name {
            "sokoban" => Ok(assets::SOKOBAN_GDY.to_string()),
            "escape_room" | "escaperoom" => Ok(assets::ESCAPE_ROOM_GDY.to_string()),
            _ => Err(CliError::domain(format!("unknown builtin `{name}`"))),
        };
    }
    std::fs::read_to_string(arg).map_err(|e| CliError::io(arg, e))
}

pub fn load_gdy(arg: &str) -> Result<GdyDocument, CliError> {
    parse_gdy(&read_gdy_text(arg)?).map_err(|e| CliError::domain(e.to_string()))
}

fn print_json(out: &mut impl Write, value: &Value) -> Result<(), CliError> {
    writeln!(out, "{}", serde_json::to_string(value).unwrap_or_default())?;
    Ok(())
}

/// Prints the diagnostics array; exit 0 when it is empty.
pub fn validate(arg: &str, out: &mut impl Write) -> Result<i32, CliError> {
    let text = read_gdy_text(arg)?;
    match parse_gdy(&text) {
        Ok(_) => {
            print_json(out, &json!([]))?;
            Ok(EXIT_OK)
        }
        Err(e) => {
            print_json(out, &report::gdy_error_json(&e))?;
            Ok(EXIT_DOMAIN)
        }
    }
}

/// Replays a trajectory file and prints the report.
pub fn replay(gdy: &str, trajectory: &Path, verify: bool, out: &mut impl Write) -> Result<i32, CliError> {
    let doc = load_gdy(gdy)?;
    let text = std::fs::read_to_string(trajectory).map_err(|e| CliError::io(trajectory.display(), e))?;
    let record = TrajectoryRecord::load(&text).map_err(|e| CliError::domain(e.to_string()))?;
    let report = match replay_record(&doc, &record) {
        Ok(r) => r,
        Err(e @ TrajectoryError::HashMismatch { .. }) => {
            return Err(CliError { code: EXIT_HASH_MISMATCH, message: e.to_string() })
        }
        Err(e) => return Err(CliError::domain(e.to_string())),
    };
    print_json(out, &serde_json::to_value(&report).unwrap_or_default())?;
    Ok(if verify && !report.verified { EXIT_VERIFY } else { EXIT_OK })
}

/// Writes `count` generated levels into `dir` with a `manifest.json`.
pub fn generate(base: &GenParams, count: u64, dir: &Path, out: &mut impl Write) -> Result<i32, CliError> {
    let doc = assets::escape_room();
    let mut levels = Vec::new();
    let mut written = Vec::new();
    for i in 0..count {
        let params = GenParams { seed: base.seed.wrapping_add(i), ..*base };
        let text = gen_level(&params).map_err(|e| CliError::domain(e.to_string()))?;
        let hint = reachability_hint(&text, &doc).map_err(|e| CliError::domain(e.to_string()))?;
        let file = format!("level_{i:05}.txt");
        levels.push(json!({ "file": file, "seed": params.seed, "reachability": hint }));
        written.push((file, text));
    }
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir.display(), e))?;
    for (file, text) in &written {
        let path = dir.join(file);
        std::fs::write(&path, text).map_err(|e| CliError::io(path.display(), e))?;
    }
    let manifest = json!({ "params": base, "count": count, "levels": levels });
    let path = dir.join("manifest.json");
    let body = serde_json::to_string_pretty(&manifest).unwrap_or_default() + "\n";
    std::fs::write(&path, body).map_err(|e| CliError::io(path.display(), e))?;
    writeln!(out, "wrote {count} levels to {}", dir.display())?;
    Ok(EXIT_OK)
}

pub struct RolloutArgs {
    pub reset: ResetOptions,
    pub episodes: usize,
    pub policy: Policy,
    pub seed: u64,
    pub max_len: u64,
    /// Bench mode: time this many steps instead of collecting stats.
    pub bench_steps: Option<u64>,
}

pub fn run_rollout(gdy: &str, args: &RolloutArgs, out: &mut impl Write) -> Result<i32, CliError> {
    let doc = load_gdy(gdy)?;
    let mut env = Env::new(doc).map_err(|e| CliError::domain(e.to_string()))?.with_observations(false);
    let domain = |e: gridforge::EnvError| CliError::domain(e.to_string());
    let value = match args.bench_steps {
        Some(steps) => serde_json::to_value(bench(&mut env, &args.reset, steps, args.seed).map_err(domain)?),
        None => serde_json::to_value(
            rollout(&mut env, &args.reset, args.episodes, args.policy, args.seed, args.max_len).map_err(domain)?,
        ),
    }
    .map_err(|e| CliError::domain(e.to_string()))?;
    print_json(out, &value)?;
    Ok(EXIT_OK)
}

pub fn reset_options(
    level: Option<usize>,
    level_string: Option<String>,
    generator: Option<GenParams>,
    seed: u64,
) -> ResetOptions {
    let level = match (level_string, generator) {
        (Some(s), _) => LevelSource::String(s),
        (None, Some(p)) => LevelSource::Generator(p),
        (None, None) => LevelSource::Index(level.unwrap_or(0)),
    };
    ResetOptions { level, seed }
}

pub fn run_play(gdy: &str, reset: ResetOptions, record_path: PathBuf) -> Result<i32, CliError> {
    let doc = load_gdy(gdy)?;
    let stdin = io::stdin();
    let stdout = io::stdout();
    play::play(doc, &play::PlayOptions { reset, record_path }, stdin.lock(), stdout.lock())?;
    Ok(EXIT_OK)
}
