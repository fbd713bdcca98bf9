//! Terminal play loop driven by single-character keys.

use std::io::{self, Read, Write};
use std::path::PathBuf;

use gridforge::env::{Env, ResetOptions};
use gridforge::observers::ascii_obs;
use gridforge::trajectory::{Recorder, TrajectoryError};
use gridforge::GdyDocument;

use crate::CliError;

/// Key for the no-op, which the derived mapping leaves unbound.
const NOOP_KEY: char = '.';

/// Candidates for the record toggle; the first one the action space leaves free wins.
const RECORD_KEYS: [char; 3] = ['R', '0', '!'];

pub struct PlayOptions {
    pub reset: ResetOptions,
    pub record_path: PathBuf,
}

pub fn record_key(env: &Env) -> Option<char> {
    RECORD_KEYS.into_iter().find(|k| env.action_space().by_key(&k.to_string()).is_none())
}

fn key_help(env: &Env, record: Option<char>, out: &mut impl Write) -> io::Result<()> {
    writeln!(out, "actions:")?;
    for e in env.action_space().entries() {
        let key = e.key.clone().unwrap_or_else(|| NOOP_KEY.to_string());
        writeln!(out, "  {key}  {}", e.label)?;
    }
    writeln!(out, "controls:\n  P  key help\n  I  variables")?;
    if let Some(r) = record {
        writeln!(out, "  {r}  toggle recording")?;
    }
    writeln!(out, "  q  quit")
}

fn board(env: &Env, out: &mut impl Write) -> io::Result<()> {
    if let Some(state) = env.state() {
        writeln!(out, "{}", ascii_obs(state))?;
    }
    Ok(())
}

fn save(rec: &Recorder, path: &PathBuf, out: &mut impl Write) -> Result<(), CliError> {
    std::fs::write(path, rec.finish().save()).map_err(|e| CliError::io(path.display(), e))?;
    writeln!(out, "recording saved to {}", path.display())?;
    Ok(())
}

fn traj(e: TrajectoryError) -> CliError {
    CliError::domain(e.to_string())
}

/// Runs until `q`, end of input or the end of the episode; returns the episode return.
pub fn play(doc: GdyDocument, options: &PlayOptions, input: impl Read, mut out: impl Write) -> Result<i64, CliError> {
    let mut env = Env::new(doc.clone()).map_err(|e| CliError::domain(e.to_string()))?.with_observations(false);
    env.reset(&options.reset).map_err(|e| CliError::domain(e.to_string()))?;
    let record = record_key(&env);
    let mut recorder: Option<Recorder> = None;
    let mut total = 0i64;
    writeln!(out, "{} (P for help)", doc.environment.name)?;
    board(&env, &mut out)?;
    for byte in io::BufReader::new(input).bytes() {
        let c = char::from(byte?);
        if c.is_whitespace() {
            continue;
        }
        if c == 'q' {
            break;
        }
        match c.to_ascii_uppercase() {
            'P' => {
                key_help(&env, record, &mut out)?;
                continue;
            }
            'I' => {
                if let Some(state) = recorder.as_ref().map(Recorder::env).unwrap_or(&env).state() {
                    for (k, v) in state.player_variable_map() {
                        writeln!(out, "  {k} = {v}")?;
                    }
                    for o in &doc.objects {
                        writeln!(out, "  {}:count = {}", o.name, state.count(&o.name))?;
                    }
                }
                continue;
            }
            _ => {}
        }
        if Some(c.to_ascii_uppercase()) == record {
            match recorder.take() {
                Some(rec) => save(&rec, &options.record_path, &mut out)?,
                None => {
                    let rec = Recorder::start(doc.clone(), &options.reset).map_err(traj)?;
                    total = 0;
                    writeln!(out, "recording (level restarted)")?;
                    board(rec.env(), &mut out)?;
                    recorder = Some(rec);
                }
            }
            continue;
        }
        let key = c.to_ascii_uppercase().to_string();
        let bound = if c == NOOP_KEY { Some(0) } else { env.action_space().by_key(&key).map(|e| e.id) };
        let Some(action) = bound else {
            writeln!(out, "unbound key `{c}`")?;
            continue;
        };
        let step = match recorder.as_mut() {
            Some(rec) => rec.step(action).map_err(traj)?,
            None => env.step(action).map_err(|e| CliError::domain(e.to_string()))?,
        };
        total += step.reward;
        board(recorder.as_ref().map(Recorder::env).unwrap_or(&env), &mut out)?;
        writeln!(out, "reward {} total {}", step.reward, total)?;
        if step.done() {
            writeln!(out, "episode over: {} total reward {}", step.info.status.as_str(), total)?;
            if let Some(rec) = recorder.take() {
                save(&rec, &options.record_path, &mut out)?;
            }
            return Ok(total);
        }
    }
    if let Some(rec) = recorder.take() {
        save(&rec, &options.record_path, &mut out)?;
    }
    Ok(total)
}
