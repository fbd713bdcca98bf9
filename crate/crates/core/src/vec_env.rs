//! Batch of independent environments stepped in parallel.

use std::sync::Arc;

use rayon::prelude::*;
use thiserror::Error;

use crate::env::{Env, EnvError, EnvReset, EnvStep, ResetOptions};
use crate::game::Game;
use crate::model::GdyDocument;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("instance {index}: {error}")]
pub struct VecEnvError {
    pub index: usize,
    pub error: EnvError,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VecStep {
    /// With `autoreset` set this carries the fresh episode's first observation,
    /// zero reward and no done flags; the submitted action was not applied.
    pub result: EnvStep,
    pub autoreset: bool,
}

/// `n` environments over one shared [`Game`].
///
/// A finished instance is reset on the call after the one that returned its
/// terminal step, using [`ResetOptions::next_episode`] of its previous options.
#[derive(Debug)]
pub struct VecEnv {
    envs: Vec<Env>,
    pending_reset: Vec<bool>,
}

impl VecEnv {
    pub fn new(doc: GdyDocument, n: usize) -> Result<Self, EnvError> {
        let game = Arc::new(Game::new(Arc::new(doc))?);
        Ok(Self::from_game(game, n))
    }

    pub fn from_game(game: Arc<Game>, n: usize) -> Self {
        assert!(n >= 1, "a batch needs at least one environment");
        Self { envs: (0..n).map(|_| Env::from_game(Arc::clone(&game))).collect(), pending_reset: vec![false; n] }
    }

    pub fn with_observations(mut self, on: bool) -> Self {
        self.envs = self.envs.into_iter().map(|e| e.with_observations(on)).collect();
        self
    }

    pub fn len(&self) -> usize {
        self.envs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.envs.is_empty()
    }

    pub fn envs(&self) -> &[Env] {
        &self.envs
    }

    /// Resets instance `i` with `options[i]`.
    pub fn reset(&mut self, options: &[ResetOptions]) -> Result<Vec<EnvReset>, VecEnvError> {
        assert_eq!(options.len(), self.envs.len(), "one options value per instance");
        self.pending_reset.iter_mut().for_each(|p| *p = false);
        collect(self.envs.par_iter_mut().zip(options).map(|(env, o)| env.reset(o)).collect())
    }

    /// Resets instance `i` with `base` advanced by `i` episodes.
    pub fn reset_all(&mut self, base: &ResetOptions) -> Result<Vec<EnvReset>, VecEnvError> {
        let mut options = Vec::with_capacity(self.envs.len());
        let mut o = base.clone();
        for _ in 0..self.envs.len() {
            options.push(o.clone());
            o = o.next_episode();
        }
        self.reset(&options)
    }

    pub fn step(&mut self, actions: &[u32]) -> Result<Vec<VecStep>, VecEnvError> {
        assert_eq!(actions.len(), self.envs.len(), "one action per instance");
        let results: Vec<Result<VecStep, EnvError>> = self
            .envs
            .par_iter_mut()
            .zip(self.pending_reset.par_iter_mut())
            .zip(actions)
            .map(|((env, pending), action)| {
                if *pending {
                    let next = env.last_options().ok_or(EnvError::NotReset)?.next_episode();
                    let reset = env.reset(&next)?;
                    *pending = false;
                    return Ok(VecStep {
                        result: EnvStep {
                            observation: reset.observation,
                            reward: 0,
                            terminated: false,
                            truncated: false,
                            info: reset.info,
                            events: Vec::new(),
                        },
                        autoreset: true,
                    });
                }
                let result = env.step(*action)?;
                *pending = result.done();
                Ok(VecStep { result, autoreset: false })
            })
            .collect();
        collect(results)
    }
}

fn collect<T>(results: Vec<Result<T, EnvError>>) -> Result<Vec<T>, VecEnvError> {
    results.into_iter().enumerate().map(|(index, r)| r.map_err(|error| VecEnvError { index, error })).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assets;

    #[test]
    fn mixed_termination_resets_only_done_instances() {
        let mut v = VecEnv::new(assets::sokoban(), 2).unwrap();
        v.reset(&[ResetOptions::string("hbA", 0), ResetOptions::string("hb.A", 0)]).unwrap();
        let first = v.step(&[1, 1]).unwrap();
        assert!(first[0].result.terminated);
        assert!(!first[1].result.done());
        let second = v.step(&[0, 1]).unwrap();
        assert!(second[0].autoreset);
        assert_eq!(second[0].result.info.step, 0);
        assert!(!second[1].autoreset);
        assert!(second[1].result.terminated);
        assert_eq!(v.envs()[0].state().unwrap().count("box"), 1);
        assert_eq!(v.envs()[0].last_options().unwrap().seed, 1);
    }

    #[test]
    fn single_instance_matches_env() {
        let doc = assets::sokoban();
        let mut v = VecEnv::new(doc.clone(), 1).unwrap();
        let mut e = Env::new(doc).unwrap();
        let o = ResetOptions::level(1, 9);
        assert_eq!(v.reset(std::slice::from_ref(&o)).unwrap()[0], e.reset(&o).unwrap());
        for a in [1, 2, 3, 4, 4, 1, 0] {
            assert_eq!(v.step(&[a]).unwrap()[0].result, e.step(a).unwrap());
        }
    }

    #[test]
    fn errors_carry_instance_index() {
        let mut v = VecEnv::new(assets::sokoban(), 3).unwrap();
        let err =
            v.reset(&[ResetOptions::level(0, 0), ResetOptions::level(0, 0), ResetOptions::level(7, 0)]).unwrap_err();
        assert_eq!(err.index, 2);
        v.reset_all(&ResetOptions::level(0, 0)).unwrap();
        let err = v.step(&[0, 9, 0]).unwrap_err();
        assert_eq!(err.index, 1);
    }
}
