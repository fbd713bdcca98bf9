//! Recorded action trajectories: JSON records bound to a document hash, and replay.

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::env::{Env, EnvError, LevelSource, ResetOptions};
use crate::hash::{from_hex, to_hex};
use crate::levelgen::{generate, GenParams};
use crate::model::GdyDocument;
use crate::sim::{SimError, Status};

pub const TRAJECTORY_VERSION: u32 = 1;

mod hex64 {
    use super::*;

    pub fn serialize<S: Serializer>(v: &u64, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&to_hex(*v))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<u64, D::Error> {
        let text = String::deserialize(d)?;
        from_hex(&text).ok_or_else(|| serde::de::Error::custom(format!("expected 16 hex digits, got `{text}`")))
    }

    pub mod option {
        use super::*;

        pub fn serialize<S: Serializer>(v: &Option<u64>, s: S) -> Result<S::Ok, S::Error> {
            match v {
                Some(v) => super::serialize(v, s),
                None => s.serialize_none(),
            }
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<u64>, D::Error> {
            super::deserialize(d).map(Some)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorRef {
    pub seed: u64,
    pub width: u32,
    pub height: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum LevelRef {
    Index(usize),
    String(String),
    Generator(GeneratorRef),
}

impl LevelRef {
    /// Generator params with non-default knobs are stored as the generated string.
    pub fn from_source(source: &LevelSource) -> Result<Self, EnvError> {
        Ok(match source {
            LevelSource::Index(i) => LevelRef::Index(*i),
            LevelSource::String(s) => LevelRef::String(s.clone()),
            LevelSource::Generator(p) if p.has_default_knobs() => {
                LevelRef::Generator(GeneratorRef { seed: p.seed, width: p.width, height: p.height })
            }
            LevelSource::Generator(p) => LevelRef::String(generate(p)?),
        })
    }

    pub fn to_source(&self) -> LevelSource {
        match self {
            LevelRef::Index(i) => LevelSource::Index(*i),
            LevelRef::String(s) => LevelSource::String(s.clone()),
            LevelRef::Generator(g) => LevelSource::Generator(GenParams::new(g.seed, g.width, g.height)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrajectoryRecord {
    pub version: u32,
    #[serde(with = "hex64")]
    pub gdy_hash: u64,
    pub level: LevelRef,
    pub seed: u64,
    pub actions: Vec<u32>,
    #[serde(default, with = "hex64::option", skip_serializing_if = "Option::is_none")]
    pub final_hash: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub total_reward: Option<i64>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TrajectoryError {
    #[error("{code}: {message}")]
    Schema { code: &'static str, message: String },
    #[error("document hash {found} does not match recorded {expected}")]
    HashMismatch { expected: String, found: String },
    #[error("level {0} unavailable")]
    LevelUnavailable(usize),
    #[error("episode is over")]
    EpisodeOver,
    #[error(transparent)]
    Env(EnvError),
}

impl TrajectoryError {
    fn schema(message: impl Into<String>) -> Self {
        TrajectoryError::Schema { code: "SCHEMA_ERROR", message: message.into() }
    }
}

impl From<EnvError> for TrajectoryError {
    fn from(e: EnvError) -> Self {
        match e {
            EnvError::LevelUnavailable { index, .. } => TrajectoryError::LevelUnavailable(index),
            EnvError::Sim(SimError::EpisodeOver) => TrajectoryError::EpisodeOver,
            other => TrajectoryError::Env(other),
        }
    }
}

impl TrajectoryRecord {
    /// Sorted-key JSON; byte-identical for equal records.
    pub fn save(&self) -> String {
        let value = serde_json::to_value(self).expect("record serializes");
        let mut text = serde_json::to_string_pretty(&value).expect("value serializes");
        text.push('\n');
        text
    }

    pub fn load(text: &str) -> Result<Self, TrajectoryError> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| TrajectoryError::schema(format!("invalid JSON: {e}")))?;
        match value.get("version") {
            Some(v) if v.as_u64() == Some(u64::from(TRAJECTORY_VERSION)) => {}
            Some(v) if v.is_u64() => {
                return Err(TrajectoryError::Schema {
                    code: "UNSUPPORTED_VERSION",
                    message: format!("version {v} is not supported (expected {TRAJECTORY_VERSION})"),
                })
            }
            _ => {}
        }
        serde_json::from_value(value).map_err(|e| TrajectoryError::schema(e.to_string()))
    }
}

/// Live session that records every action it applies.
#[derive(Debug)]
pub struct Recorder {
    env: Env,
    level: LevelRef,
    seed: u64,
    actions: Vec<u32>,
    total_reward: i64,
}

impl Recorder {
    pub fn start(doc: GdyDocument, options: &ResetOptions) -> Result<Self, TrajectoryError> {
        let mut env = Env::new(doc)?.with_observations(false);
        env.reset(options)?;
        let level = LevelRef::from_source(&options.level)?;
        Ok(Self { env, level, seed: options.seed, actions: Vec::new(), total_reward: 0 })
    }

    pub fn env(&self) -> &Env {
        &self.env
    }

    pub fn step(&mut self, action: u32) -> Result<crate::env::EnvStep, TrajectoryError> {
        let step = self.env.step(action)?;
        self.actions.push(action);
        self.total_reward += step.reward;
        Ok(step)
    }

    pub fn finish(&self) -> TrajectoryRecord {
        TrajectoryRecord {
            version: TRAJECTORY_VERSION,
            gdy_hash: self.env.document().source_hash,
            level: self.level.clone(),
            seed: self.seed,
            actions: self.actions.clone(),
            final_hash: self.env.state().map(|s| s.state_hash()),
            total_reward: Some(self.total_reward),
        }
    }
}

/// Plays `actions` from a fresh reset and returns the record.
pub fn record(doc: GdyDocument, options: &ResetOptions, actions: &[u32]) -> Result<TrajectoryRecord, TrajectoryError> {
    let mut rec = Recorder::start(doc, options)?;
    for a in actions {
        rec.step(*a)?;
    }
    Ok(rec.finish())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReplayReport {
    pub total_reward: i64,
    pub status: Status,
    #[serde(with = "hex64")]
    pub final_hash: u64,
    pub verified: bool,
    #[serde(skip)]
    pub rewards: Vec<i64>,
}

pub fn replay(doc: &GdyDocument, record: &TrajectoryRecord) -> Result<ReplayReport, TrajectoryError> {
    if record.gdy_hash != doc.source_hash {
        return Err(TrajectoryError::HashMismatch {
            expected: to_hex(record.gdy_hash),
            found: to_hex(doc.source_hash),
        });
    }
    let mut env = Env::new(doc.clone())?.with_observations(false);
    env.reset(&ResetOptions { level: record.level.to_source(), seed: record.seed })?;
    let mut rewards = Vec::with_capacity(record.actions.len());
    for a in &record.actions {
        rewards.push(env.step(*a)?.reward);
    }
    let state = env.state().ok_or(TrajectoryError::Env(EnvError::NotReset))?;
    let total_reward: i64 = rewards.iter().sum();
    let final_hash = state.state_hash();
    let verified =
        record.final_hash.is_none_or(|h| h == final_hash) && record.total_reward.is_none_or(|r| r == total_reward);
    Ok(ReplayReport { total_reward, status: state.status(), final_hash, verified, rewards })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assets;

    fn hba() -> TrajectoryRecord {
        record(assets::sokoban(), &ResetOptions::string("hbA", 0), &[1]).unwrap()
    }

    #[test]
    fn record_push_and_replay() {
        let rec = hba();
        assert_eq!(rec.total_reward, Some(1));
        let report = replay(&assets::sokoban(), &rec).unwrap();
        assert_eq!(report.total_reward, 1);
        assert_eq!(report.status, Status::Win);
        assert!(report.verified);
        assert_eq!(report.rewards, [1]);
    }

    #[test]
    fn zero_actions_hash_is_reset_hash() {
        let rec = record(assets::sokoban(), &ResetOptions::level(0, 0), &[]).unwrap();
        let mut env = Env::new(assets::sokoban()).unwrap();
        env.reset(&ResetOptions::level(0, 0)).unwrap();
        assert_eq!(rec.final_hash, Some(env.state().unwrap().state_hash()));
        assert_eq!(rec.total_reward, Some(0));
    }

    #[test]
    fn stepping_after_win_fails() {
        let mut r = Recorder::start(assets::sokoban(), &ResetOptions::string("hbA", 0)).unwrap();
        r.step(1).unwrap();
        assert_eq!(r.step(0).unwrap_err(), TrajectoryError::EpisodeOver);
        assert_eq!(r.finish().actions, [1]);
    }

    #[test]
    fn json_roundtrip_and_schema() {
        let rec = hba();
        let text = rec.save();
        assert_eq!(TrajectoryRecord::load(&text).unwrap(), rec);
        assert_eq!(text, TrajectoryRecord::load(&text).unwrap().save());
        let keys: Vec<String> = serde_json::from_str::<serde_json::Map<String, serde_json::Value>>(&text)
            .unwrap()
            .keys()
            .cloned()
            .collect();
        assert_eq!(keys, ["actions", "final_hash", "gdy_hash", "level", "seed", "total_reward", "version"]);
        assert!(text.contains("\"string\": \"hbA\""));
    }

    #[test]
    fn schema_errors() {
        let mut v: serde_json::Value = serde_json::from_str(&hba().save()).unwrap();
        v.as_object_mut().unwrap().remove("actions");
        let err = TrajectoryRecord::load(&v.to_string()).unwrap_err();
        assert!(matches!(err, TrajectoryError::Schema { code: "SCHEMA_ERROR", .. }));

        let mut v: serde_json::Value = serde_json::from_str(&hba().save()).unwrap();
        v["version"] = 2.into();
        let err = TrajectoryRecord::load(&v.to_string()).unwrap_err();
        assert!(matches!(err, TrajectoryError::Schema { code: "UNSUPPORTED_VERSION", .. }));

        let mut v: serde_json::Value = serde_json::from_str(&hba().save()).unwrap();
        v["extra"] = 1.into();
        assert!(TrajectoryRecord::load(&v.to_string()).is_err());

        let mut v: serde_json::Value = serde_json::from_str(&hba().save()).unwrap();
        v["level"] = serde_json::json!({"index": 0, "string": "A"});
        assert!(TrajectoryRecord::load(&v.to_string()).is_err());
    }

    #[test]
    fn replay_failures() {
        let mut doc = assets::sokoban();
        let rec = hba();
        doc.environment.max_steps = Some(10);
        doc.rehash();
        assert!(matches!(replay(&doc, &rec), Err(TrajectoryError::HashMismatch { .. })));

        let mut tampered = rec.clone();
        tampered.final_hash = Some(tampered.final_hash.unwrap() ^ 1);
        let report = replay(&assets::sokoban(), &tampered).unwrap();
        assert!(!report.verified);

        let mut far = rec;
        far.level = LevelRef::Index(9);
        assert_eq!(replay(&assets::sokoban(), &far).unwrap_err(), TrajectoryError::LevelUnavailable(9));
    }

    #[test]
    fn generator_refs() {
        let p = GenParams::new(3, 10, 10);
        assert!(matches!(LevelRef::from_source(&LevelSource::Generator(p)).unwrap(), LevelRef::Generator(_)));
        let tweaked = GenParams { tree_threshold: 0.5, ..p };
        assert!(matches!(LevelRef::from_source(&LevelSource::Generator(tweaked)).unwrap(), LevelRef::String(_)));
        let rec = record(assets::escape_room(), &ResetOptions::generator(p, 1), &[1, 2, 5]).unwrap();
        assert!(replay(&assets::escape_room(), &rec).unwrap().verified);
    }
}
