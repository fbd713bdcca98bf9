//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so the lines are always printed. The
//! process fails when a criterion fails, except for entries in
//! `KNOWN_CONFLICTS`, which must keep failing for exactly the recorded reason.

use std::collections::{HashSet, VecDeque};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::time::{Duration, Instant};

use gridforge::assets;
use gridforge::env::{Env, ResetOptions};
use gridforge::hash::fnv1a64;
use gridforge::level::{level_rows, parse_level};
use gridforge::levelgen::{generate, GenParams};
use gridforge::model::{Direction, GdyDocument, ObserverConfig};
use gridforge::observers::{ascii_obs, vector_obs, Channel, VectorObservation};
use gridforge::parse_gdy_bytes;
use gridforge::sim::{GameState, Status};
use gridforge::trajectory::{record, replay};

/// Criteria whose stated target contradicts the source material; they stay red.
const KNOWN_CONFLICTS: &[(&str, &str)] = &[("sokoban_fidelity", "wall: expected 28, found 30")];

/// Hash of the Sokoban listing as transcribed from its two printed parts.
const SOKOBAN_TEXT_HASH: u64 = 0x8847_bc36_2772_58cd;

type Verdict = Result<String, String>;
type Criterion = (&'static str, fn() -> Verdict);

struct Rng(u64);

impl Rng {
    fn next(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    fn below(&mut self, n: u64) -> u64 {
        self.next() % n
    }
}

fn check(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within(start: Instant, limit: Duration) -> Result<(), String> {
    let t = start.elapsed();
    check(t < limit, format!("took {:.2}s, limit {}s", t.as_secs_f64(), limit.as_secs()))
}

fn sokoban_fidelity() -> Verdict {
    let start = Instant::now();
    check(
        fnv1a64(assets::SOKOBAN_GDY.as_bytes()) == SOKOBAN_TEXT_HASH,
        "bundled Sokoban text differs from the listing",
    )?;
    let doc = assets::sokoban();
    let shape = (doc.objects.len(), doc.actions.len(), doc.environment.levels.len());
    check(shape == (4, 1, 2), format!("objects/actions/levels = {shape:?}"))?;
    let layout = parse_level(&doc, &doc.environment.levels[0]).map_err(|e| e.to_string())?;
    let mut wrong = Vec::new();
    for (name, expected) in [("box", 3), ("hole", 3), ("avatar", 1), ("wall", 28)] {
        let found = layout.count(name);
        if found != expected {
            wrong.push(format!("{name}: expected {expected}, found {found}"));
        }
    }
    within(start, Duration::from_secs(1))?;
    if wrong.is_empty() {
        Ok("verbatim text, 4 objects / 1 action / 2 levels, counts match".into())
    } else {
        Err(wrong.join("; "))
    }
}

/// Shortest winning plan by breadth-first search over engine states.
fn bfs(doc: &GdyDocument, level: usize) -> Result<(Vec<u32>, usize), String> {
    let mut env = Env::new(doc.clone()).map_err(|e| e.to_string())?.with_observations(false);
    env.reset(&ResetOptions::level(level, 0)).map_err(|e| e.to_string())?;
    let mut seen = HashSet::from([env.state().unwrap().configuration_hash()]);
    let mut queue = VecDeque::from([(env, Vec::new())]);
    while let Some((env, plan)) = queue.pop_front() {
        for a in 1..env.action_space().len() as u32 {
            let mut next = env.clone();
            let step = next.step(a).map_err(|e| e.to_string())?;
            let mut p = plan.clone();
            p.push(a);
            if step.info.status == Status::Win {
                return Ok((p, seen.len()));
            }
            if !step.done() && seen.insert(next.state().unwrap().configuration_hash()) {
                queue.push_back((next, p));
            }
        }
    }
    Err(format!("level {} has no solution", level + 1))
}

fn oracle_solve() -> Verdict {
    let doc = assets::sokoban();
    let mut notes = Vec::new();
    for level in 0..2 {
        let start = Instant::now();
        let (plan, states) = bfs(&doc, level)?;
        let boxes = doc.environment.levels[level].matches('b').count() as i64;
        let rec = record(doc.clone(), &ResetOptions::level(level, 0), &plan).map_err(|e| e.to_string())?;
        let report = replay(&doc, &rec).map_err(|e| e.to_string())?;
        check(report.total_reward == boxes, format!("level {}: reward {} != {boxes}", level + 1, report.total_reward))?;
        check(report.status == Status::Win, format!("level {}: status {:?}", level + 1, report.status))?;
        within(start, Duration::from_secs(10))?;
        notes.push(format!(
            "level {}: {} moves, reward {boxes}, {states} states, {:.2}s",
            level + 1,
            plan.len(),
            start.elapsed().as_secs_f64()
        ));
    }
    Ok(notes.join("; "))
}

fn escape_room_semantics() -> Verdict {
    let doc = assets::escape_room();
    let env = Env::new(doc.clone()).map_err(|e| e.to_string())?;
    let labels: Vec<&str> = env.action_space().entries().iter().map(|e| e.label.as_str()).collect();
    let table = [
        "No-Op",
        "Move Left",
        "Move Right",
        "Move Down",
        "Move Up",
        "Interact With Object",
        "Place Stone",
        "Place Table",
        "Place Furnace",
        "Make Wood Pickaxe",
        "Make Stone Pickaxe",
        "Make Iron Pickaxe",
    ];
    check(labels == table, format!("action labels {labels:?}"))?;

    let space = env.action_space().clone();
    let left = space.find("move", "left").ok_or("no move left")?;
    let right = space.find("move", "right").ok_or("no move right")?;
    let interact = space.find("interact", "use").ok_or("no interact")?;

    let mut e = env.clone();
    e.reset(&ResetOptions::string("TgAgT", 0)).map_err(|e| e.to_string())?;
    e.step(left).map_err(|e| e.to_string())?;
    let first = e.step(interact).map_err(|e| e.to_string())?;
    check(first.reward == 1 && first.info.variables["inv_wood"] == 1, "first wood collection")?;
    e.step(right).map_err(|e| e.to_string())?;
    e.step(right).map_err(|e| e.to_string())?;
    let again = e.step(interact).map_err(|e| e.to_string())?;
    check(again.reward == 0 && again.info.variables["inv_wood"] == 2, "repeat wood collection")?;

    e.reset(&ResetOptions::string("CgA", 0)).map_err(|e| e.to_string())?;
    e.step(left).map_err(|e| e.to_string())?;
    let cherry = e.step(interact).map_err(|e| e.to_string())?;
    check(cherry.reward == 10 && cherry.terminated && cherry.info.status == Status::Win, "cherry interaction")?;

    e.reset(&ResetOptions::level(0, 0)).map_err(|e| e.to_string())?;
    for t in 1..=500 {
        let s = e.step(0).map_err(|e| e.to_string())?;
        if t < 500 {
            check(!s.done(), format!("episode ended early at step {t}"))?;
        } else {
            check(s.truncated && !s.terminated && s.reward == 0, "step 500 is not a zero-reward truncation")?;
        }
    }
    Ok("12 actions in table order; wood 1 then 0; cherry 10 + win; truncated at 500".into())
}

fn determinism() -> Verdict {
    let start = Instant::now();
    let mut rng = Rng(7);
    let mut episodes = 0;
    for doc in [assets::sokoban(), assets::escape_room()] {
        let n_actions = Env::new(doc.clone()).map_err(|e| e.to_string())?.action_space().len() as u64;
        let levels = doc.environment.levels.len();
        for k in 0..100 {
            let options = ResetOptions::level(k % levels, rng.next());
            let mut env = Env::new(doc.clone()).map_err(|e| e.to_string())?.with_observations(false);
            env.reset(&options).map_err(|e| e.to_string())?;
            let (mut actions, mut rewards) = (Vec::new(), Vec::new());
            for _ in 0..500 {
                let a = rng.below(n_actions) as u32;
                let s = env.step(a).map_err(|e| e.to_string())?;
                actions.push(a);
                rewards.push(s.reward);
                if s.done() {
                    break;
                }
            }
            let rec = record(doc.clone(), &options, &actions).map_err(|e| e.to_string())?;
            let report = replay(&doc, &rec).map_err(|e| e.to_string())?;
            let live_hash = env.state().unwrap().state_hash();
            check(
                report.verified && report.rewards == rewards && report.final_hash == live_hash,
                format!("{} episode {k} did not replay exactly", doc.environment.name),
            )?;
            episodes += 1;
        }
    }
    within(start, Duration::from_secs(30))?;
    Ok(format!("{episodes}/200 episodes verified, {:.2}s", start.elapsed().as_secs_f64()))
}

fn generator_properties() -> Verdict {
    let start = Instant::now();
    let doc = assets::escape_room();
    let mut env = Env::new(doc.clone()).map_err(|e| e.to_string())?.with_observations(false);
    for seed in 0..1000 {
        let params = GenParams::new(seed, 24, 24);
        let text = generate(&params).map_err(|e| format!("seed {seed}: {e}"))?;
        check(generate(&params).ok().as_ref() == Some(&text), format!("seed {seed}: output not repeatable"))?;
        let layout = parse_level(&doc, &text).map_err(|e| format!("seed {seed}: {e}"))?;
        check(layout.count("cherry") == 1 && layout.count("player") == 1, format!("seed {seed}: goal/avatar count"))?;
        env.reset(&ResetOptions::string(text, 0)).map_err(|e| format!("seed {seed}: {e}"))?;
    }
    within(start, Duration::from_secs(60))?;
    Ok(format!("1000 seeds valid and repeatable, {:.2}s", start.elapsed().as_secs_f64()))
}

fn random_state(doc: &GdyDocument, rng: &mut Rng, max_steps: u64) -> Result<GameState, String> {
    let mut env = Env::new(doc.clone()).map_err(|e| e.to_string())?.with_observations(false);
    let level = rng.below(doc.environment.levels.len() as u64) as usize;
    env.reset(&ResetOptions::level(level, rng.next())).map_err(|e| e.to_string())?;
    let n = env.action_space().len() as u64;
    for _ in 0..rng.below(max_steps + 1) {
        if env.step(rng.below(n) as u32).map_err(|e| e.to_string())?.done() {
            break;
        }
    }
    Ok(env.state().unwrap().clone())
}

fn observer_properties() -> Verdict {
    let doc = assets::sokoban();
    let mut env = Env::new(doc.clone()).map_err(|e| e.to_string())?;
    let obs = env.reset(&ResetOptions::level(0, 0)).map_err(|e| e.to_string())?.observation.ok_or("no observation")?;
    let source = level_rows(&doc.environment.levels[0]).join("\n");
    check(ascii_obs(env.state().unwrap()) == source, "ascii differs from the level string")?;
    check(obs.shape() == (7, 7, 4), format!("shape {:?}", obs.shape()))?;
    let order: Vec<char> = doc.objects.iter().map(|o| o.map_character).collect();
    for (y, row) in source.lines().enumerate() {
        for (x, ch) in row.chars().enumerate() {
            let expected: Vec<f32> = order.iter().map(|c| f32::from(u8::from(*c == ch))).collect();
            check(obs.cell(x as u32, y as u32) == expected.as_slice(), format!("cell ({x},{y})"))?;
        }
    }

    let er = assets::escape_room();
    let mut rng = Rng(99);
    for i in 0..100 {
        let mut state = random_state(&er, &mut rng, 300)?;
        let dir = Direction::from_quarter_turns(rng.below(4) as u8);
        state.set_avatar_orientation(dir);
        let mut turning = er.environment.observer_config.clone();
        turning.rotate_with_avatar = true;
        let view: VectorObservation<u8> = vector_obs(&state, &turning);
        let cycled = view.rotate_quarter().rotate_quarter().rotate_quarter().rotate_quarter();
        check(cycled == view, format!("state {i}: 4 quarter turns changed the window"))?;

        let square =
            ObserverConfig { window: Some((7, 7)), include_orientation_channels: true, ..ObserverConfig::default() };
        let fixed: VectorObservation<u8> = vector_obs(&state, &square);
        let mut ego: VectorObservation<u8> = vector_obs(&state, &ObserverConfig { rotate_with_avatar: true, ..square });
        let up = ego.channels.iter().position(|c| *c == Channel::Orientation(Direction::Up)).ok_or("no up channel")?;
        check(ego.get(3, 3, up) == 1, format!("state {i}: avatar does not face up in its own view"))?;
        for _ in 0..dir.quarter_turns() {
            ego = ego.rotate_quarter();
        }
        check(ego == fixed, format!("state {i}: egocentric view is not a rotation of the fixed view"))?;
    }
    Ok("ascii identity, 7x7x4 one-hot, rotation cycle on 100 EscapeRoom states".into())
}

fn without_step(text: &str) -> String {
    text.lines().filter(|l| !l.starts_with("step:")).collect::<Vec<_>>().join("\n")
}

fn mask_soundness() -> Verdict {
    let mut rng = Rng(2024);
    let docs = [assets::sokoban(), assets::escape_room()];
    let (mut states, mut probes) = (0, 0);
    while states < 10_000 {
        let doc = &docs[states % 2];
        let state = random_state(doc, &mut rng, 200)?;
        if state.status() != Status::Running {
            continue;
        }
        let mask = state.valid_action_mask();
        let before = without_step(&state.canonical_text());
        for (id, allowed) in mask.iter().enumerate() {
            if *allowed {
                continue;
            }
            let mut probe = state.clone();
            let r = probe.step(id as u32).map_err(|e| e.to_string())?;
            check(
                r.reward == 0
                    && probe.step_count() == state.step_count() + 1
                    && without_step(&probe.canonical_text()) == before,
                format!("masked-out action {id} changed the state"),
            )?;
            probes += 1;
        }
        states += 1;
    }
    Ok(format!("{states} states, {probes} masked-out actions stepped"))
}

fn throughput() -> Verdict {
    let profile = if cfg!(debug_assertions) { "debug" } else { "release" };
    let out = Command::new(env!("CARGO_BIN_EXE_gridforge"))
        .args(["rollout", "builtin:sokoban", "--level", "0", "--bench", "--steps", "1000000"])
        .output()
        .map_err(|e| e.to_string())?;
    check(out.status.success(), String::from_utf8_lossy(&out.stderr).into_owned())?;
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).map_err(|e| e.to_string())?;
    let rate = report["steps_per_sec"].as_f64().ok_or("no steps_per_sec")?;
    check(rate >= 50_000.0, format!("{rate:.0} steps/s ({profile} build), target 50000"))?;
    Ok(format!("{rate:.0} steps/s single thread, observations off ({profile} build)"))
}

fn fuzz() -> Verdict {
    let mut rng = Rng(31337);
    let seed = assets::SOKOBAN_GDY.as_bytes();
    let (mut errors, mut accepted) = (0, 0);
    let previous = std::panic::take_hook();
    std::panic::set_hook(Box::new(|_| {}));
    let mut crash = None;
    for i in 0..100_000 {
        // even inputs are pure noise, odd inputs are corrupted copies of a valid document
        let input: Vec<u8> = if i % 2 == 0 {
            (0..rng.below(512)).map(|_| rng.next() as u8).collect()
        } else {
            let mut v = seed.to_vec();
            for _ in 0..1 + rng.below(8) {
                if v.is_empty() {
                    break;
                }
                let at = rng.below(v.len() as u64) as usize;
                match rng.below(3) {
                    0 => v[at] = rng.next() as u8,
                    1 => drop(v.remove(at)),
                    _ => v.truncate(at),
                }
            }
            v
        };
        match catch_unwind(AssertUnwindSafe(|| parse_gdy_bytes(&input))) {
            Ok(Err(_)) => errors += 1,
            Ok(Ok(_)) if i % 2 == 1 => accepted += 1,
            Ok(Ok(_)) => {
                crash = Some(format!("noise input {i} parsed as a document"));
                break;
            }
            Err(_) => {
                crash = Some(format!("input {i} panicked"));
                break;
            }
        }
    }
    std::panic::set_hook(previous);
    match crash {
        Some(c) => Err(c),
        None => Ok(format!(
            "100000 inputs, {errors} rejected with errors, {accepted} corrupted copies still valid, no panics"
        )),
    }
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("sokoban_fidelity", sokoban_fidelity),
        ("oracle_solve", oracle_solve),
        ("escape_room_semantics", escape_room_semantics),
        ("determinism", determinism),
        ("generator_properties", generator_properties),
        ("observer_properties", observer_properties),
        ("mask_soundness", mask_soundness),
        ("throughput", throughput),
        ("fuzz", fuzz),
    ];
    let mut unexpected = Vec::new();
    for (name, run) in criteria {
        let start = Instant::now();
        let verdict = run();
        let secs = start.elapsed().as_secs_f64();
        let conflict = KNOWN_CONFLICTS.iter().find(|(n, _)| *n == name);
        match (&verdict, conflict) {
            (Ok(detail), None) => println!("PASS {name}: {detail} [{secs:.2}s]"),
            (Err(detail), Some((_, reason))) if detail.contains(reason) => {
                println!("FAIL {name}: {detail} [{secs:.2}s] (known conflict with the source level string, see README)")
            }
            (Ok(detail), Some(_)) => {
                println!("PASS {name}: {detail} [{secs:.2}s]");
                unexpected.push(format!("{name} passed but is listed as a known conflict"));
            }
            (Err(detail), _) => {
                println!("FAIL {name}: {detail} [{secs:.2}s]");
                unexpected.push(name.to_string());
            }
        }
    }
    if !unexpected.is_empty() {
        eprintln!("unexpected acceptance results: {}", unexpected.join(", "));
        std::process::exit(1);
    }
}
