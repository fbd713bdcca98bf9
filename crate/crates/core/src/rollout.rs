//! Random-policy rollouts and the step-throughput benchmark.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::env::{Env, EnvError, ResetOptions};
use crate::sim::Status;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RolloutStats {
    pub episodes: usize,
    pub mean_reward: f64,
    pub mean_length: f64,
    /// Fraction of episodes ending in a win.
    pub solve_rate: f64,
    /// Reset seed of each episode.
    pub seeds: Vec<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Policy {
    /// Uniform over the actions the mask allows.
    Random,
    /// Always action 0.
    Noop,
}

/// Uniform choice among the actions the mask allows.
fn masked_choice(rng: &mut ChaCha8Rng, mask: &[bool]) -> u32 {
    let allowed = mask.iter().filter(|b| **b).count();
    let mut k = rng.random_range(0..allowed.max(1));
    for (i, ok) in mask.iter().enumerate() {
        if *ok {
            if k == 0 {
                return i as u32;
            }
            k -= 1;
        }
    }
    0
}

/// Runs `episodes` episodes of `policy`; the random policy draws from `policy_seed`.
/// Episode `k` resets with `base` advanced by `k` episodes. `max_len` caps
/// episodes of documents without a step limit.
pub fn rollout(
    env: &mut Env,
    base: &ResetOptions,
    episodes: usize,
    policy: Policy,
    policy_seed: u64,
    max_len: u64,
) -> Result<RolloutStats, EnvError> {
    let mut rng = ChaCha8Rng::seed_from_u64(policy_seed);
    let mut options = base.clone();
    let (mut reward, mut length, mut wins) = (0i64, 0u64, 0usize);
    let mut seeds = Vec::with_capacity(episodes);
    for _ in 0..episodes {
        seeds.push(options.seed);
        let mut mask = env.reset(&options)?.info.mask;
        for _ in 0..max_len {
            let action = match policy {
                Policy::Random => masked_choice(&mut rng, &mask),
                Policy::Noop => 0,
            };
            let step = env.step(action)?;
            reward += step.reward;
            length += 1;
            if step.done() {
                wins += usize::from(step.info.status == Status::Win);
                break;
            }
            mask = step.info.mask;
        }
        options = options.next_episode();
    }
    let n = episodes.max(1) as f64;
    Ok(RolloutStats {
        episodes,
        mean_reward: reward as f64 / n,
        mean_length: length as f64 / n,
        solve_rate: wins as f64 / n,
        seeds,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchReport {
    pub steps: u64,
    pub episodes: u64,
    pub seconds: f64,
    pub steps_per_sec: f64,
}

/// Times `steps` single-thread steps of a uniform random policy (mask not
/// consulted), resetting whenever an episode ends.
pub fn bench(env: &mut Env, options: &ResetOptions, steps: u64, policy_seed: u64) -> Result<BenchReport, EnvError> {
    let mut rng = ChaCha8Rng::seed_from_u64(policy_seed);
    let n_actions = env.action_space().len() as u32;
    let mut episodes = 1;
    env.reset(options)?;
    let start = Instant::now();
    for _ in 0..steps {
        if env.step(rng.random_range(0..n_actions))?.done() {
            env.reset(options)?;
            episodes += 1;
        }
    }
    let seconds = start.elapsed().as_secs_f64();
    Ok(BenchReport { steps, episodes, seconds, steps_per_sec: steps as f64 / seconds.max(1e-9) })
}
