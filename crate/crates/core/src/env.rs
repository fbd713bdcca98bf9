//! Episodic environment facade: reset/step/observe over one [`GameState`].

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::action_space::ActionSpace;
use crate::game::Game;
use crate::level::{parse_level, LevelError};
use crate::levelgen::{generate, GenError, GenParams};
use crate::model::{GdyDocument, ObserverConfig};
use crate::observers::{vector_obs, vector_shape, VectorObservation};
use crate::sim::{GameState, SimError, Status, StepEvent};

/// Where a reset takes its level from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LevelSource {
    Index(usize),
    String(String),
    Generator(GenParams),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResetOptions {
    pub level: LevelSource,
    #[serde(default)]
    pub seed: u64,
}

impl ResetOptions {
    pub fn level(index: usize, seed: u64) -> Self {
        Self { level: LevelSource::Index(index), seed }
    }

    pub fn string(level: impl Into<String>, seed: u64) -> Self {
        Self { level: LevelSource::String(level.into()), seed }
    }

    pub fn generator(params: GenParams, seed: u64) -> Self {
        Self { level: LevelSource::Generator(params), seed }
    }

    /// Options for the following episode: the seed advances by one, and so
    /// does the generator seed when levels are generated.
    pub fn next_episode(&self) -> Self {
        let level = match &self.level {
            LevelSource::Generator(p) => LevelSource::Generator(GenParams { seed: p.seed.wrapping_add(1), ..*p }),
            other => other.clone(),
        };
        Self { level, seed: self.seed.wrapping_add(1) }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EnvError {
    #[error("document has no levels")]
    NoLevels,
    #[error("level {index} unavailable (document has {count})")]
    LevelUnavailable { index: usize, count: usize },
    #[error("level: {0}")]
    Level(#[from] LevelError),
    #[error("generator: {0}")]
    Generator(#[from] GenError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("environment has not been reset")]
    NotReset,
}

pub type Observation = VectorObservation<f32>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepInfo {
    pub variables: BTreeMap<String, i64>,
    pub mask: Vec<bool>,
    pub status: Status,
    pub step: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnvReset {
    pub observation: Option<Observation>,
    pub info: StepInfo,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnvStep {
    pub observation: Option<Observation>,
    pub reward: i64,
    pub terminated: bool,
    pub truncated: bool,
    pub info: StepInfo,
    pub events: Vec<StepEvent>,
}

impl EnvStep {
    pub fn done(&self) -> bool {
        self.terminated || self.truncated
    }
}

#[derive(Debug, Clone)]
pub struct Env {
    game: Arc<Game>,
    state: Option<GameState>,
    observer: ObserverConfig,
    observe: bool,
    episode: u64,
    options: Option<ResetOptions>,
}

impl Env {
    pub fn new(doc: GdyDocument) -> Result<Self, EnvError> {
        Ok(Self::from_game(Arc::new(Game::new(Arc::new(doc))?)))
    }

    /// Shares an already compiled game; cheap to call many times.
    pub fn from_game(game: Arc<Game>) -> Self {
        let observer = game.document().environment.observer_config.clone();
        Self { game, state: None, observer, observe: true, episode: 0, options: None }
    }

    /// Turns vector observations on or off; off leaves `observation` as `None`.
    pub fn with_observations(mut self, on: bool) -> Self {
        self.observe = on;
        self
    }

    pub fn with_observer(mut self, config: ObserverConfig) -> Self {
        self.observer = config;
        self
    }

    pub fn game(&self) -> &Arc<Game> {
        &self.game
    }

    pub fn document(&self) -> &GdyDocument {
        self.game.document()
    }

    pub fn action_space(&self) -> &ActionSpace {
        self.game.action_space()
    }

    pub fn observer(&self) -> &ObserverConfig {
        &self.observer
    }

    /// Episodes started so far.
    pub fn episode(&self) -> u64 {
        self.episode
    }

    pub fn state(&self) -> Option<&GameState> {
        self.state.as_ref()
    }

    pub fn last_options(&self) -> Option<&ResetOptions> {
        self.options.as_ref()
    }

    /// `(W, H, C)` before any reset: the declared window, else level 0's size.
    pub fn observation_shape(&self) -> Option<(usize, usize, usize)> {
        if let Some(state) = &self.state {
            return Some(vector_shape(state, &self.observer));
        }
        let doc = self.document();
        let (w, h) = match self.observer.window {
            Some(dims) => dims,
            None => {
                let level = parse_level(doc, doc.environment.levels.first()?).ok()?;
                (level.width(), level.height())
            }
        };
        let mut c = doc.objects.len();
        if self.observer.include_orientation_channels {
            c += 4;
        }
        if self.observer.include_player_variable_channels {
            c += doc.environment.player_variables.len();
        }
        Some((w as usize, h as usize, c))
    }

    /// Level text an options value resolves to.
    pub fn level_text(&self, source: &LevelSource) -> Result<String, EnvError> {
        let levels = &self.document().environment.levels;
        match source {
            LevelSource::Index(_) if levels.is_empty() => Err(EnvError::NoLevels),
            LevelSource::Index(i) => {
                levels.get(*i).cloned().ok_or(EnvError::LevelUnavailable { index: *i, count: levels.len() })
            }
            LevelSource::String(s) => Ok(s.clone()),
            LevelSource::Generator(p) => Ok(generate(p)?),
        }
    }

    pub fn reset(&mut self, options: &ResetOptions) -> Result<EnvReset, EnvError> {
        let text = self.level_text(&options.level)?;
        let layout = parse_level(self.document(), &text)?;
        let state = GameState::reset(Arc::clone(&self.game), &layout, options.seed)?;
        self.state = Some(state);
        self.options = Some(options.clone());
        self.episode += 1;
        let state = self.state.as_ref().ok_or(EnvError::NotReset)?;
        Ok(EnvReset { observation: self.observation(), info: info(state) })
    }

    pub fn step(&mut self, action_id: u32) -> Result<EnvStep, EnvError> {
        let state = self.state.as_mut().ok_or(EnvError::NotReset)?;
        let result = state.step(action_id)?;
        let info = StepInfo {
            variables: result.info,
            mask: state.valid_action_mask(),
            status: result.status,
            step: state.step_count(),
        };
        Ok(EnvStep {
            observation: self.observation(),
            reward: result.reward,
            terminated: result.terminated,
            truncated: result.truncated,
            info,
            events: result.events,
        })
    }

    /// Current vector observation, if observations are on and the env was reset.
    pub fn observation(&self) -> Option<Observation> {
        let state = self.state.as_ref()?;
        self.observe.then(|| vector_obs(state, &self.observer))
    }
}

fn info(state: &GameState) -> StepInfo {
    StepInfo {
        variables: state.player_variable_map(),
        mask: state.valid_action_mask(),
        status: state.status(),
        step: state.step_count(),
    }
}
