//! JSON session protocol, independent of the HTTP transport.
//!
//! [`Server::handle`] maps `(method, path, body)` to `(status, JSON)`; the
//! axum layer in [`crate::http`] only moves bytes.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use gridforge::env::{Env, EnvError, ResetOptions};
use gridforge::level::{parse_level, serialize_level, LevelLayout};
use gridforge::observers::render_map;
use gridforge::sim::{GameState, SimError, Status};
use gridforge::trajectory::{replay, LevelRef, TrajectoryError, TrajectoryRecord, TRAJECTORY_VERSION};
use gridforge::{parse_gdy, GdyDocument};
use serde::Deserialize;
use serde_json::{json, Value};

use crate::report::gdy_error_json;

pub const DEFAULT_TTL: Duration = Duration::from_secs(30 * 60);
pub const API_PREFIX: &str = "/api/v1";

#[derive(Debug, Clone, PartialEq)]
pub struct Reply {
    pub status: u16,
    pub body: Value,
}

impl Reply {
    fn ok(body: Value) -> Self {
        Self { status: 200, body }
    }

    fn error(status: u16, code: &str, message: impl Into<String>) -> Self {
        Self { status, body: json!({ "error": { "code": code, "message": message.into() } }) }
    }
}

struct Recording {
    level: LevelRef,
    seed: u64,
    actions: Vec<u32>,
    total_reward: i64,
}

struct Session {
    env: Env,
    recording: Option<Recording>,
    last_used: Instant,
}

pub struct Server {
    sessions: Mutex<HashMap<String, Arc<Mutex<Session>>>>,
    next_id: AtomicU64,
    ttl: Duration,
}

impl Default for Server {
    fn default() -> Self {
        Self::new(DEFAULT_TTL)
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GdyBody {
    gdy_text: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct StepBody {
    action_id: u32,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LevelStringBody {
    level_string: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LayoutBody {
    layout: LevelLayout,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ReplayBody {
    trajectory: Value,
}

fn parse_body<T: for<'de> Deserialize<'de>>(body: &[u8]) -> Result<T, Reply> {
    let bytes = if body.iter().all(u8::is_ascii_whitespace) { b"{}".as_slice() } else { body };
    serde_json::from_slice(bytes).map_err(|e| Reply::error(400, "SCHEMA_ERROR", e.to_string()))
}

fn env_error(e: &EnvError) -> Reply {
    match e {
        EnvError::Sim(SimError::EpisodeOver) => Reply::error(409, "EPISODE_OVER", e.to_string()),
        EnvError::NotReset => Reply::error(409, "NOT_RESET", e.to_string()),
        EnvError::Sim(SimError::BadAction { .. }) => Reply::error(400, "BAD_ACTION", e.to_string()),
        EnvError::NoLevels => Reply::error(400, "NO_LEVELS", e.to_string()),
        EnvError::LevelUnavailable { .. } => Reply::error(400, "LEVEL_UNAVAILABLE", e.to_string()),
        _ => Reply::error(400, "INVALID_LEVEL", e.to_string()),
    }
}

fn trajectory_error(e: &TrajectoryError) -> Reply {
    match e {
        TrajectoryError::Schema { code, message } => Reply::error(400, code, message.clone()),
        TrajectoryError::HashMismatch { .. } => Reply::error(400, "HASH_MISMATCH", e.to_string()),
        TrajectoryError::LevelUnavailable(_) => Reply::error(400, "LEVEL_UNAVAILABLE", e.to_string()),
        TrajectoryError::EpisodeOver => Reply::error(400, "EPISODE_OVER", e.to_string()),
        TrajectoryError::Env(inner) => env_error(inner),
    }
}

fn state_json(state: &GameState) -> (Value, Value, Value) {
    (
        serde_json::to_value(render_map(state)).unwrap_or(Value::Null),
        serde_json::to_value(state.player_variable_map()).unwrap_or(Value::Null),
        serde_json::to_value(state.valid_action_mask()).unwrap_or(Value::Null),
    )
}

fn record_json(env: &Env, rec: &Recording) -> Value {
    let record = TrajectoryRecord {
        version: TRAJECTORY_VERSION,
        gdy_hash: env.document().source_hash,
        level: rec.level.clone(),
        seed: rec.seed,
        actions: rec.actions.clone(),
        final_hash: env.state().map(GameState::state_hash),
        total_reward: Some(rec.total_reward),
    };
    serde_json::to_value(record).unwrap_or(Value::Null)
}

/// Session creation response for a parsed document.
pub fn session_summary(id: &str, doc: &GdyDocument, env: &Env) -> Value {
    let objects: Vec<Value> = doc
        .objects
        .iter()
        .map(|o| json!({ "name": o.name, "map_char": o.map_character.to_string(), "tile": o.tile.key, "z": o.z }))
        .collect();
    let actions: Vec<Value> = env
        .action_space()
        .entries()
        .iter()
        .map(|e| json!({ "id": e.id, "action": e.action, "input": e.input, "label": e.label, "key": e.key }))
        .collect();
    let levels: Vec<Value> =
        doc.environment.levels.iter().enumerate().map(|(i, l)| json!({ "index": i, "level_string": l })).collect();
    json!({
        "session_id": id,
        "env_name": doc.environment.name,
        "objects": objects,
        "action_space": actions,
        "levels": levels,
    })
}

impl Server {
    pub fn new(ttl: Duration) -> Self {
        Self { sessions: Mutex::new(HashMap::new()), next_id: AtomicU64::new(1), ttl }
    }

    pub fn session_count(&self) -> usize {
        self.sessions.lock().map(|s| s.len()).unwrap_or(0)
    }

    fn purge(&self, now: Instant) {
        let Ok(mut sessions) = self.sessions.lock() else { return };
        sessions.retain(|_, s| s.lock().map(|s| now.duration_since(s.last_used) < self.ttl).unwrap_or(false));
    }

    fn session(&self, id: &str) -> Option<Arc<Mutex<Session>>> {
        self.sessions.lock().ok()?.get(id).cloned()
    }

    pub fn handle(&self, method: &str, path: &str, body: &[u8]) -> Reply {
        self.handle_at(method, path, body, Instant::now())
    }

    /// [`Server::handle`] with an explicit clock, for expiry tests.
    pub fn handle_at(&self, method: &str, path: &str, body: &[u8], now: Instant) -> Reply {
        self.purge(now);
        let Some(rest) = path.strip_prefix(API_PREFIX) else {
            return Reply::error(404, "NOT_FOUND", format!("no route for {path}"));
        };
        let parts: Vec<&str> = rest.trim_matches('/').split('/').collect();
        match (method, parts.as_slice()) {
            ("POST", ["validate"]) => self.validate(body),
            ("POST", ["session"]) => self.create(body, now),
            ("DELETE", ["session", id]) => match self.sessions.lock().ok().and_then(|mut s| s.remove(*id)) {
                Some(_) => Reply::ok(json!({ "deleted": true })),
                None => Reply::error(404, "UNKNOWN_SESSION", format!("no session `{id}`")),
            },
            ("POST", ["session", id, tail @ ..]) => {
                let Some(session) = self.session(id) else {
                    return Reply::error(404, "UNKNOWN_SESSION", format!("no session `{id}`"));
                };
                let Ok(mut session) = session.lock() else {
                    return Reply::error(500, "INTERNAL", "session lock poisoned");
                };
                session.last_used = now;
                match tail {
                    ["reset"] => reset(&mut session, body),
                    ["step"] => step(&mut session, body),
                    ["parse_level"] => parse_level_route(&session, body),
                    ["serialize_level"] => serialize_level_route(&session, body),
                    ["record", "start"] => record_start(&mut session),
                    ["record", "stop"] => record_stop(&mut session),
                    ["replay"] => replay_route(&session, body),
                    _ => Reply::error(404, "NOT_FOUND", format!("no route for {path}")),
                }
            }
            _ => Reply::error(404, "NOT_FOUND", format!("no route for {method} {path}")),
        }
    }

    fn validate(&self, body: &[u8]) -> Reply {
        let req: GdyBody = match parse_body(body) {
            Ok(r) => r,
            Err(e) => return e,
        };
        match parse_gdy(&req.gdy_text) {
            Ok(_) => Reply::ok(json!({ "valid": true, "diagnostics": [] })),
            Err(e) => Reply::ok(json!({ "valid": false, "diagnostics": gdy_error_json(&e) })),
        }
    }

    fn create(&self, body: &[u8], now: Instant) -> Reply {
        let req: GdyBody = match parse_body(body) {
            Ok(r) => r,
            Err(e) => return e,
        };
        let doc = match parse_gdy(&req.gdy_text) {
            Ok(d) => d,
            Err(e) => {
                return Reply {
                    status: 400,
                    body: json!({ "error": { "code": "INVALID_GDY", "message": e.to_string() }, "diagnostics": gdy_error_json(&e) }),
                }
            }
        };
        let env = match Env::new(doc.clone()) {
            Ok(env) => env.with_observations(false),
            Err(e) => return env_error(&e),
        };
        let id = format!("s{}", self.next_id.fetch_add(1, Ordering::Relaxed));
        let summary = session_summary(&id, &doc, &env);
        let session = Session { env, recording: None, last_used: now };
        if let Ok(mut sessions) = self.sessions.lock() {
            sessions.insert(id, Arc::new(Mutex::new(session)));
        }
        Reply::ok(summary)
    }
}

fn reset(session: &mut Session, body: &[u8]) -> Reply {
    let options: ResetOptions = match parse_body(body) {
        Ok(o) => o,
        Err(e) => return e,
    };
    if let Err(e) = session.env.reset(&options) {
        return env_error(&e);
    }
    session.recording = None;
    let Some(state) = session.env.state() else { return env_error(&EnvError::NotReset) };
    let (render, variables, mask) = state_json(state);
    Reply::ok(json!({ "render": render, "variables": variables, "mask": mask, "step": 0 }))
}

fn step(session: &mut Session, body: &[u8]) -> Reply {
    let req: StepBody = match parse_body(body) {
        Ok(r) => r,
        Err(e) => return e,
    };
    let result = match session.env.step(req.action_id) {
        Ok(r) => r,
        Err(e) => return env_error(&e),
    };
    if let Some(rec) = session.recording.as_mut() {
        rec.actions.push(req.action_id);
        rec.total_reward += result.reward;
    }
    let Some(state) = session.env.state() else { return env_error(&EnvError::NotReset) };
    let (render, _, _) = state_json(state);
    Reply::ok(json!({
        "render": render,
        "reward": result.reward,
        "terminated": result.terminated,
        "truncated": result.truncated,
        "variables": result.info.variables,
        "mask": result.info.mask,
        "events": result.events,
    }))
}

fn parse_level_route(session: &Session, body: &[u8]) -> Reply {
    let req: LevelStringBody = match parse_body(body) {
        Ok(r) => r,
        Err(e) => return e,
    };
    match parse_level(session.env.document(), &req.level_string) {
        Ok(layout) => Reply::ok(json!({ "layout": layout })),
        Err(e) => Reply::error(400, "INVALID_LEVEL", e.to_string()),
    }
}

fn serialize_level_route(session: &Session, body: &[u8]) -> Reply {
    let req: LayoutBody = match parse_body(body) {
        Ok(r) => r,
        Err(e) => return e,
    };
    match serialize_level(&req.layout, session.env.document()) {
        Ok(text) => Reply::ok(json!({ "level_string": text })),
        Err(e) => Reply::error(400, "INVALID_LEVEL", e.to_string()),
    }
}

/// Restarts the current level and records from its first step.
fn record_start(session: &mut Session) -> Reply {
    let Some(options) = session.env.last_options().cloned() else {
        return Reply::error(409, "NOT_RESET", "reset the session before recording");
    };
    let level = match LevelRef::from_source(&options.level) {
        Ok(l) => l,
        Err(e) => return env_error(&e),
    };
    if let Err(e) = session.env.reset(&options) {
        return env_error(&e);
    }
    let rec = Recording { level, seed: options.seed, actions: Vec::new(), total_reward: 0 };
    let trajectory = record_json(&session.env, &rec);
    session.recording = Some(rec);
    let Some(state) = session.env.state() else { return env_error(&EnvError::NotReset) };
    let (render, variables, mask) = state_json(state);
    Reply::ok(json!({ "trajectory": trajectory, "render": render, "variables": variables, "mask": mask, "step": 0 }))
}

fn record_stop(session: &mut Session) -> Reply {
    match session.recording.take() {
        Some(rec) => Reply::ok(json!({ "trajectory": record_json(&session.env, &rec) })),
        None => Reply::error(409, "NOT_RECORDING", "no recording in progress"),
    }
}

fn replay_route(session: &Session, body: &[u8]) -> Reply {
    let req: ReplayBody = match parse_body(body) {
        Ok(r) => r,
        Err(e) => return e,
    };
    let record = match TrajectoryRecord::load(&req.trajectory.to_string()) {
        Ok(r) => r,
        Err(e) => return trajectory_error(&e),
    };
    match replay(session.env.document(), &record) {
        Ok(report) => Reply::ok(json!({
            "final_hash": gridforge::hash::to_hex(report.final_hash),
            "status": report.status,
            "total_reward": report.total_reward,
            "verified": report.verified,
            "rewards": report.rewards,
        })),
        Err(e) => trajectory_error(&e),
    }
}

/// True when the status ends the episode.
pub fn is_terminal(status: Status) -> bool {
    status != Status::Running
}
