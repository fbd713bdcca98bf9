//! GDY grid-world environment engine.
//!
//! A game is described in GDY (a YAML dialect): objects placed on a grid by
//! map character, actions made of source/destination behaviours, and
//! termination conditions. [`parse_gdy`] turns text into a [`GdyDocument`],
//! [`Game`] compiles it, and [`GameState`] runs it.
//!
//! ```
//! use gridforge::{assets, Env, ResetOptions};
//!
//! let mut env = Env::new(assets::sokoban()).unwrap();
//! env.reset(&ResetOptions::string("hbA", 0)).unwrap();
//! // push the box left into the hole
//! let step = env.step(1).unwrap();
//! assert_eq!(step.reward, 1);
//! assert!(step.terminated);
//! ```

pub mod action_space;
pub mod assets;
pub mod emit;
pub mod env;
pub mod game;
pub mod hash;
pub mod level;
pub mod levelgen;
pub mod model;
pub mod noise;
pub mod observers;
pub mod parser;
pub mod rollout;
pub mod sim;
pub mod trajectory;
pub mod vec_env;
mod yaml;

pub use action_space::{ActionEntry, ActionSpace};
pub use emit::serialize_gdy;
pub use env::{Env, EnvError, EnvStep, LevelSource, ResetOptions};
pub use game::Game;
pub use level::{parse_level, serialize_level, LevelError, LevelLayout};
pub use levelgen::{generate, reachability_hint, GenError, GenParams, Reachability};
pub use model::{validate, Diagnostic, DiagnosticCode, GdyDocument, ObserverConfig};
pub use observers::{ascii_obs, entity_obs, render_map, vector_obs, EntityObservation, RenderMap, VectorObservation};
pub use parser::{parse_gdy, parse_gdy_bytes, GdyError};
pub use sim::{GameState, SimError, Status, StepResult};
pub use trajectory::{replay, ReplayReport, TrajectoryError, TrajectoryRecord};
pub use vec_env::VecEnv;

/// Float observation tensor, the usual input to a policy network.
pub type VectorObsF32 = VectorObservation<f32>;
/// Byte observation tensor; variable channels saturate to 0 when out of range.
pub type VectorObsU8 = VectorObservation<u8>;
/// Integer observation tensor that keeps variable values exact.
pub type VectorObsI64 = VectorObservation<i64>;
/// Gradient noise field used by the level generator.
pub type Noise = noise::GradientNoise<f64>;
