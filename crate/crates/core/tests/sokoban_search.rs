//! Breadth-first search over engine states, checked against a standalone
//! Sokoban model that knows nothing about GDY.

use std::collections::{BTreeSet, HashSet, VecDeque};

use gridforge::assets;
use gridforge::env::{Env, ResetOptions};
use gridforge::sim::Status;
use gridforge::trajectory::{record, replay};

type Pos = (i32, i32);

#[derive(Clone, PartialEq, Eq, Hash)]
struct Board {
    avatar: Pos,
    boxes: BTreeSet<Pos>,
}

struct Oracle {
    walls: HashSet<Pos>,
    holes: HashSet<Pos>,
    start: Board,
}

impl Oracle {
    fn new(level: &str) -> Self {
        let mut walls = HashSet::new();
        let mut holes = HashSet::new();
        let mut boxes = BTreeSet::new();
        let mut avatar = (0, 0);
        for (y, row) in level.lines().filter(|l| !l.trim().is_empty()).enumerate() {
            for (x, c) in row.trim().chars().enumerate() {
                let p = (x as i32, y as i32);
                match c {
                    'w' => drop(walls.insert(p)),
                    'h' => drop(holes.insert(p)),
                    'b' => drop(boxes.insert(p)),
                    'A' => avatar = p,
                    _ => {}
                }
            }
        }
        Self { walls, holes, start: Board { avatar, boxes } }
    }

    /// Pushing a box into a hole removes it; boxes only slide into free floor or holes.
    fn step(&self, b: &Board, (dx, dy): Pos) -> Option<(Board, i64)> {
        let next = (b.avatar.0 + dx, b.avatar.1 + dy);
        if self.walls.contains(&next) {
            return None;
        }
        let mut boxes = b.boxes.clone();
        let mut reward = 0;
        if boxes.contains(&next) {
            let beyond = (next.0 + dx, next.1 + dy);
            if self.walls.contains(&beyond) || boxes.contains(&beyond) {
                return None;
            }
            boxes.remove(&next);
            if self.holes.contains(&beyond) {
                reward = 1;
            } else {
                boxes.insert(beyond);
            }
        }
        Some((Board { avatar: next, boxes }, reward))
    }

    /// Length of the shortest winning move sequence.
    fn shortest(&self) -> Option<usize> {
        let mut seen = HashSet::from([self.start.clone()]);
        let mut queue = VecDeque::from([(self.start.clone(), 0)]);
        while let Some((b, d)) = queue.pop_front() {
            if b.boxes.is_empty() {
                return Some(d);
            }
            for delta in [(-1, 0), (1, 0), (0, 1), (0, -1)] {
                if let Some((n, _)) = self.step(&b, delta) {
                    if seen.insert(n.clone()) {
                        queue.push_back((n, d + 1));
                    }
                }
            }
        }
        None
    }
}

/// Engine BFS keyed by the step-blind configuration hash.
fn engine_bfs(level: usize) -> Vec<u32> {
    let mut env = Env::new(assets::sokoban()).unwrap().with_observations(false);
    env.reset(&ResetOptions::level(level, 0)).unwrap();
    let root = env.clone();
    let mut seen = HashSet::from([root.state().unwrap().configuration_hash()]);
    let mut queue = VecDeque::from([(root, Vec::new())]);
    while let Some((env, plan)) = queue.pop_front() {
        for a in 1..env.action_space().len() as u32 {
            let mut next = env.clone();
            let step = next.step(a).unwrap();
            let mut p: Vec<u32> = plan.clone();
            p.push(a);
            if step.info.status == Status::Win {
                return p;
            }
            if !step.done() && seen.insert(next.state().unwrap().configuration_hash()) {
                queue.push_back((next, p));
            }
        }
    }
    panic!("level {level} unsolved");
}

fn check_level(index: usize) {
    let doc = assets::sokoban();
    let text = &doc.environment.levels[index];
    let oracle = Oracle::new(text);
    let boxes = text.chars().filter(|c| *c == 'b').count() as i64;
    let plan = engine_bfs(index);
    assert_eq!(Some(plan.len()), oracle.shortest(), "engine and oracle disagree on level {index}");

    let mut board = oracle.start.clone();
    let mut oracle_reward = 0;
    let deltas = [(0, 0), (-1, 0), (1, 0), (0, 1), (0, -1)];
    for a in &plan {
        if let Some((b, r)) = oracle.step(&board, deltas[*a as usize]) {
            board = b;
            oracle_reward += r;
        }
    }
    assert!(board.boxes.is_empty());
    assert_eq!(oracle_reward, boxes);

    let rec = record(doc.clone(), &ResetOptions::level(index, 0), &plan).unwrap();
    let report = replay(&doc, &rec).unwrap();
    assert_eq!(report.total_reward, boxes);
    assert_eq!(report.status, Status::Win);
    assert!(report.verified);
}

#[test]
fn bfs_solves_level_one() {
    check_level(0);
}

#[test]
fn bfs_solves_level_two() {
    check_level(1);
}

#[test]
fn oracle_matches_engine_on_random_walks() {
    let doc = assets::sokoban();
    let deltas = [(0, 0), (-1, 0), (1, 0), (0, 1), (0, -1)];
    for (index, text) in doc.environment.levels.iter().enumerate() {
        let oracle = Oracle::new(text);
        let mut env = Env::new(doc.clone()).unwrap().with_observations(false);
        env.reset(&ResetOptions::level(index, 0)).unwrap();
        let mut board = oracle.start.clone();
        let mut x: u64 = 0x9e37_79b9_7f4a_7c15;
        for _ in 0..2000 {
            x ^= x << 13;
            x ^= x >> 7;
            x ^= x << 17;
            let a = (x % 5) as u32;
            let step = env.step(a).unwrap();
            let expected = if a == 0 { None } else { oracle.step(&board, deltas[a as usize]) };
            let r = expected.as_ref().map_or(0, |(_, r)| *r);
            if let Some((b, _)) = expected {
                board = b;
            }
            assert_eq!(step.reward, r);
            let state = env.state().unwrap();
            let pos = state.avatar().unwrap().position();
            assert_eq!((pos.0 as i32, pos.1 as i32), board.avatar);
            assert_eq!(state.count("box") as usize, board.boxes.len());
            if step.done() {
                break;
            }
        }
    }
}
