use std::sync::Arc;

use gridforge::assets;
use gridforge::env::{Env, ResetOptions};
use gridforge::game::Game;
use gridforge::level::{parse_level, serialize_level};
use gridforge::levelgen::{generate, GenParams};
use gridforge::model::{Direction, GdyDocument, ObserverConfig};
use gridforge::observers::{ascii_obs, render_map, vector_obs, Channel, VectorObservation};
use gridforge::sim::GameState;
use gridforge::trajectory::{record, replay, TrajectoryRecord};
use gridforge::vec_env::VecEnv;
use proptest::prelude::*;

/// Rectangular Sokoban level with exactly one avatar.
fn sokoban_level() -> impl Strategy<Value = String> {
    (1usize..8, 1usize..6)
        .prop_flat_map(|(w, h)| {
            (Just(w), prop::collection::vec(prop::sample::select(vec!['.', '.', '.', 'w', 'h', 'b']), w * h), 0..w * h)
        })
        .prop_map(|(w, mut cells, avatar)| {
            cells[avatar] = 'A';
            cells.chunks(w).map(|r| r.iter().collect::<String>()).collect::<Vec<_>>().join("\n")
        })
}

fn start(doc: &GdyDocument, level: &str, seed: u64) -> GameState {
    let layout = parse_level(doc, level).unwrap();
    GameState::reset(Arc::new(Game::new(Arc::new(doc.clone())).unwrap()), &layout, seed).unwrap()
}

fn without_step(text: &str) -> String {
    text.lines().filter(|l| !l.starts_with("step:")).collect::<Vec<_>>().join("\n")
}

fn escape_actions() -> impl Strategy<Value = Vec<u32>> {
    prop::collection::vec(0u32..12, 0..200)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn level_string_roundtrip(level in sokoban_level()) {
        let doc = assets::sokoban();
        let layout = parse_level(&doc, &level).unwrap();
        prop_assert_eq!(serialize_level(&layout, &doc).unwrap(), level);
    }

    #[test]
    fn ascii_of_reset_is_identity(level in sokoban_level()) {
        let doc = assets::sokoban();
        prop_assert_eq!(ascii_obs(&start(&doc, &level, 0)), level);
    }

    #[test]
    fn counts_and_cells_stay_consistent(level in sokoban_level(), actions in prop::collection::vec(0u32..5, 0..60)) {
        let doc = assets::sokoban();
        let mut s = start(&doc, &level, 0);
        for a in actions {
            if s.step(a).is_err() {
                break;
            }
            for o in &doc.objects {
                let live = s.instances().filter(|i| s.object_name(i.object()) == o.name).count() as i64;
                prop_assert_eq!(s.count(&o.name), live);
            }
            let mut seen = std::collections::HashSet::new();
            for i in s.instances() {
                let z = doc.object(s.object_name(i.object())).unwrap().z;
                prop_assert!(seen.insert((i.position(), z)), "two instances share a cell and Z");
            }
        }
    }

    #[test]
    fn sokoban_reward_equals_boxes_removed(level in sokoban_level(), actions in prop::collection::vec(0u32..5, 0..60)) {
        let doc = assets::sokoban();
        let mut s = start(&doc, &level, 0);
        let boxes = s.count("box");
        let mut total = 0;
        for a in actions {
            match s.step(a) {
                Ok(r) => total += r.reward,
                Err(_) => break,
            }
        }
        prop_assert_eq!(total, s.accumulated_return());
        prop_assert_eq!(total, boxes - s.count("box"));
    }

    #[test]
    fn equal_seeds_and_actions_give_equal_hashes(seed in any::<u64>(), actions in escape_actions()) {
        let doc = assets::escape_room();
        let level = &doc.environment.levels[0];
        let mut a = start(&doc, level, seed);
        let mut b = start(&doc, level, seed);
        for act in actions {
            let (ra, rb) = (a.step(act), b.step(act));
            prop_assert_eq!(ra.is_ok(), rb.is_ok());
            if ra.is_err() {
                break;
            }
            prop_assert_eq!(a.state_hash(), b.state_hash());
        }
    }

    #[test]
    fn masked_out_actions_only_advance_the_clock(actions in escape_actions(), level in 0usize..2) {
        let doc = assets::escape_room();
        let mut s = start(&doc, &doc.environment.levels[level], 0);
        for act in actions {
            let mask = s.valid_action_mask();
            for (id, allowed) in mask.iter().enumerate() {
                if !allowed {
                    let mut probe = s.clone();
                    let r = probe.step(id as u32).unwrap();
                    prop_assert_eq!(r.reward, 0);
                    prop_assert_eq!(probe.step_count(), s.step_count() + 1);
                    prop_assert_eq!(without_step(&probe.canonical_text()), without_step(&s.canonical_text()));
                }
            }
            if s.step(act).map(|r| r.terminated || r.truncated).unwrap_or(true) {
                break;
            }
        }
    }

    #[test]
    fn achievements_pay_at_most_once(actions in prop::collection::vec(0u32..12, 0..400)) {
        let doc = assets::escape_room();
        let mut s = start(&doc, &doc.environment.levels[0], 0);
        let achievements: Vec<String> = doc.environment.player_variables.iter()
            .map(|v| v.name.clone()).filter(|n| n.starts_with("ach_")).collect();
        for act in actions {
            let before = s.player_variable_map();
            let Ok(r) = s.step(act) else { break };
            let after = s.player_variable_map();
            let newly: i64 = achievements.iter().filter(|a| before[*a] == 0 && after[*a] == 1).count() as i64;
            for a in &achievements {
                prop_assert!(after[a] >= before[a] && after[a] <= 1);
            }
            // rewards come only from first-time achievements; the cherry pays 10 instead of 1
            let cherry = if after["ach_eat_plant"] > before["ach_eat_plant"] { 9 } else { 0 };
            prop_assert_eq!(r.reward, newly + cherry);
            if r.terminated || r.truncated {
                break;
            }
        }
    }

    #[test]
    fn autotile_matches_neighbour_bitmask(cells in prop::collection::vec(any::<bool>(), 1..64), w in 1usize..8) {
        let h = cells.len().div_ceil(w);
        let wall = |x: i64, y: i64| x >= 0 && y >= 0 && (x as usize) < w && (y as usize) < h
            && cells.get(y as usize * w + x as usize).copied().unwrap_or(false);
        let mut rows = Vec::new();
        for y in 0..h {
            rows.push((0..w).map(|x| if wall(x as i64, y as i64) { 'w' } else { '.' }).collect::<String>());
        }
        let level = rows.join("\n");
        let doc = gridforge::parse_gdy("Environment:\n  Name: walls\nObjects:\n  - Name: wall\n    MapCharacter: w\n    Observers:\n      Sprite2D:\n        TilingMode: WALL_16\n").unwrap();
        let map = render_map(&start(&doc, &level, 0));
        for y in 0..h as i64 {
            for x in 0..w as i64 {
                let tiles = map.cell(x as u32, y as u32);
                if wall(x, y) {
                    let expected = u8::from(wall(x, y - 1)) | u8::from(wall(x + 1, y)) << 1
                        | u8::from(wall(x, y + 1)) << 2 | u8::from(wall(x - 1, y)) << 3;
                    prop_assert_eq!(tiles[0].autotile, Some(expected));
                } else {
                    prop_assert!(tiles.is_empty());
                }
            }
        }
    }

    #[test]
    fn quarter_rotation_is_a_four_cycle(w in 1u32..6, h in 1u32..6, c in 1usize..4, seed in any::<u64>()) {
        let mut channels: Vec<Channel> = (0..c).map(|k| Channel::Object(format!("o{k}"))).collect();
        channels.extend(Direction::INPUT_ORDER.map(Channel::Orientation));
        let mut x = seed | 1;
        let data = (0..(w * h) as usize * channels.len()).map(|_| { x ^= x << 13; x ^= x >> 7; x ^= x << 17; (x % 3) as u8 }).collect();
        let obs = VectorObservation { width: w, height: h, channels, data };
        let once = obs.rotate_quarter();
        prop_assert_eq!(once.shape(), (h as usize, w as usize, c + 4));
        prop_assert_eq!(once.rotate_quarter().rotate_quarter().rotate_quarter(), obs);
    }

    #[test]
    fn egocentric_window_is_a_rotation_of_the_fixed_window(actions in escape_actions(), facing in 0u8..4) {
        let doc = assets::escape_room();
        let mut s = start(&doc, &doc.environment.levels[0], 0);
        for act in actions {
            if s.step(act).map(|r| r.terminated || r.truncated).unwrap_or(true) {
                break;
            }
        }
        let dir = Direction::from_quarter_turns(facing);
        s.set_avatar_orientation(dir);
        let fixed = ObserverConfig { window: Some((7, 7)), include_orientation_channels: true, ..ObserverConfig::default() };
        let turning = ObserverConfig { rotate_with_avatar: true, ..fixed.clone() };
        let g: VectorObservation<u8> = vector_obs(&s, &fixed);
        let mut r: VectorObservation<u8> = vector_obs(&s, &turning);
        // the avatar always faces up in its own view
        let up = r.channels.iter().position(|c| *c == Channel::Orientation(Direction::Up)).unwrap();
        prop_assert_eq!(r.get(3, 3, up), 1);
        for _ in 0..dir.quarter_turns() {
            r = r.rotate_quarter();
        }
        prop_assert_eq!(r, g);
    }

    #[test]
    fn generated_levels_are_valid(seed in any::<u64>(), w in 8u32..40, h in 8u32..40) {
        let params = GenParams::new(seed, w, h);
        let text = generate(&params).unwrap();
        prop_assert_eq!(&text, &generate(&params).unwrap());
        prop_assert_eq!(text.matches('C').count(), 1);
        prop_assert_eq!(text.matches('A').count(), 1);
        let mut env = Env::new(assets::escape_room()).unwrap();
        prop_assert!(env.reset(&ResetOptions::string(text, 0)).is_ok());
    }

    #[test]
    fn record_then_replay_verifies(seed in any::<u64>(), actions in escape_actions()) {
        let doc = assets::escape_room();
        let options = ResetOptions::level(1, seed);
        let mut env = Env::new(doc.clone()).unwrap().with_observations(false);
        env.reset(&options).unwrap();
        let mut played = Vec::new();
        for a in actions {
            played.push(a);
            if env.step(a).unwrap().done() {
                break;
            }
        }
        let rec = record(doc.clone(), &options, &played).unwrap();
        let loaded = TrajectoryRecord::load(&rec.save()).unwrap();
        prop_assert_eq!(&loaded, &rec);
        let report = replay(&doc, &loaded).unwrap();
        prop_assert!(report.verified);
        prop_assert_eq!(Some(report.final_hash), rec.final_hash);
    }

    #[test]
    fn vec_env_matches_single_envs(seed in any::<u64>(), actions in prop::collection::vec(prop::collection::vec(0u32..5, 3), 0..80)) {
        let doc = assets::sokoban();
        let options: Vec<ResetOptions> = (0..3).map(|i| ResetOptions::level(i % 2, seed.wrapping_add(i as u64))).collect();
        let mut batch = VecEnv::new(doc.clone(), 3).unwrap();
        batch.reset(&options).unwrap();
        let mut singles: Vec<Env> = options.iter().map(|o| {
            let mut e = Env::new(doc.clone()).unwrap();
            e.reset(o).unwrap();
            e
        }).collect();
        let mut pending = [false; 3];
        for step in actions {
            let out = batch.step(&step).unwrap();
            for i in 0..3 {
                let expected = if pending[i] {
                    let next = singles[i].last_options().unwrap().next_episode();
                    let r = singles[i].reset(&next).unwrap();
                    pending[i] = false;
                    prop_assert!(out[i].autoreset);
                    prop_assert_eq!(&out[i].result.observation, &r.observation);
                    continue;
                } else {
                    singles[i].step(step[i]).unwrap()
                };
                pending[i] = expected.done();
                prop_assert_eq!(&out[i].result, &expected);
            }
        }
    }
}
