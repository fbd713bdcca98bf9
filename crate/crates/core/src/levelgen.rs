//! Seeded EscapeRoom level generator and a cheap reachability heuristic.

use std::collections::VecDeque;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::level::{parse_level, LevelError, LevelLayout};
use crate::model::GdyDocument;
use crate::noise::GradientNoise;

const MAX_ATTEMPTS: usize = 1000;
const ELEVATION_FREQUENCY: f64 = 0.12;
const DETAIL_FREQUENCY: f64 = 0.35;
const SAND_BAND: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OreCounts {
    pub coal: u32,
    pub iron: u32,
    pub diamond: u32,
}

impl Default for OreCounts {
    fn default() -> Self {
        Self { coal: 4, iron: 2, diamond: 1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenParams {
    pub width: u32,
    pub height: u32,
    pub seed: u64,
    /// Detail noise above this turns grass into a tree.
    pub tree_threshold: f64,
    /// Elevation above this is stone.
    pub stone_threshold: f64,
    /// Elevation below this is water.
    pub water_threshold: f64,
    /// Detail noise above this turns stone into lava.
    pub lava_threshold: f64,
    pub ore_counts: OreCounts,
}

impl Default for GenParams {
    fn default() -> Self {
        Self {
            width: 24,
            height: 24,
            seed: 0,
            tree_threshold: 0.62,
            stone_threshold: 0.68,
            water_threshold: 0.30,
            lava_threshold: 0.85,
            ore_counts: OreCounts::default(),
        }
    }
}

impl GenParams {
    pub fn new(seed: u64, width: u32, height: u32) -> Self {
        Self { seed, width, height, ..Self::default() }
    }

    /// True when only seed and size differ from the defaults.
    pub fn has_default_knobs(&self) -> bool {
        *self == Self::new(self.seed, self.width, self.height)
    }

    fn check(&self) -> Result<(), GenError> {
        if self.width < 8 || self.height < 8 {
            return Err(GenError::Unsatisfiable(format!(
                "width and height must be at least 8, got {}x{}",
                self.width, self.height
            )));
        }
        if self.width > 1024 || self.height > 1024 {
            return Err(GenError::InvalidParams("width and height must be at most 1024".into()));
        }
        let unit = [self.tree_threshold, self.stone_threshold, self.water_threshold, self.lava_threshold];
        if unit.iter().any(|t| !(0.0..=1.0).contains(t)) {
            return Err(GenError::InvalidParams("thresholds must lie in [0, 1]".into()));
        }
        if self.water_threshold + SAND_BAND > self.stone_threshold {
            return Err(GenError::InvalidParams("water_threshold must sit below stone_threshold".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GenError {
    #[error("invalid generator parameters: {0}")]
    InvalidParams(String),
    #[error("unsatisfiable: {0}")]
    Unsatisfiable(String),
}

struct Grid {
    width: usize,
    height: usize,
    cells: Vec<char>,
}

impl Grid {
    fn at(&self, x: usize, y: usize) -> char {
        self.cells[y * self.width + x]
    }

    fn set(&mut self, x: usize, y: usize, ch: char) {
        self.cells[y * self.width + x] = ch;
    }

    fn interior(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (1..self.height - 1).flat_map(move |y| (1..self.width - 1).map(move |x| (x, y)))
    }

    fn render(&self) -> String {
        self.cells.chunks(self.width).map(|row| row.iter().collect::<String>()).collect::<Vec<_>>().join("\n")
    }
}

fn land_distances(grid: &Grid, from: (usize, usize)) -> Vec<Option<u32>> {
    let mut dist = vec![None; grid.cells.len()];
    let mut queue = VecDeque::from([from]);
    dist[from.1 * grid.width + from.0] = Some(0);
    while let Some((x, y)) = queue.pop_front() {
        let d = dist[y * grid.width + x].unwrap_or(0);
        for (nx, ny) in neighbours(x, y, grid.width, grid.height) {
            let i = ny * grid.width + nx;
            if dist[i].is_none() && matches!(grid.at(nx, ny), 'g' | 's' | 'T') {
                dist[i] = Some(d + 1);
                queue.push_back((nx, ny));
            }
        }
    }
    dist
}

fn neighbours(x: usize, y: usize, w: usize, h: usize) -> impl Iterator<Item = (usize, usize)> {
    [(0i64, -1i64), (1, 0), (0, 1), (-1, 0)].into_iter().filter_map(move |(dx, dy)| {
        let (nx, ny) = (x as i64 + dx, y as i64 + dy);
        (nx >= 0 && ny >= 0 && nx < w as i64 && ny < h as i64).then_some((nx as usize, ny as usize))
    })
}

/// Builds an EscapeRoom level string. Equal params give byte-identical output.
///
/// Terrain comes from two noise fields: elevation picks water, sand, grass or
/// stone; a detail field scatters trees on grass and lava in stone. The border
/// is stone. Ores replace random interior stone cells, the avatar stands on a
/// random grass cell and the cherry tree goes on the grass cell farthest from
/// it over land.
pub fn generate(params: &GenParams) -> Result<String, GenError> {
    params.check()?;
    let (w, h) = (params.width as usize, params.height as usize);
    let elevation = GradientNoise::<f64>::new(params.seed);
    let detail = GradientNoise::<f64>::new(params.seed ^ 0x5bd1_e995_0000_0001);
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);

    let mut grid = Grid { width: w, height: h, cells: vec!['r'; w * h] };
    for y in 1..h - 1 {
        for x in 1..w - 1 {
            let (fx, fy) = (x as f64, y as f64);
            let e = elevation.fractal(fx, fy, ELEVATION_FREQUENCY);
            let d = detail.fractal(fx, fy, DETAIL_FREQUENCY);
            let ch = if e < params.water_threshold {
                'w'
            } else if e < params.water_threshold + SAND_BAND {
                's'
            } else if e > params.stone_threshold {
                if d > params.lava_threshold {
                    'l'
                } else {
                    'r'
                }
            } else if d > params.tree_threshold {
                'T'
            } else {
                'g'
            };
            grid.set(x, y, ch);
        }
    }

    // Avatar and cherry each need a grass cell.
    let mut attempts = 0;
    while grid.interior().filter(|(x, y)| grid.at(*x, *y) == 'g').count() < 2 {
        if attempts == MAX_ATTEMPTS {
            return Err(GenError::Unsatisfiable("not enough grass for avatar and goal".into()));
        }
        let (x, y) = (rng.random_range(1..w - 1), rng.random_range(1..h - 1));
        grid.set(x, y, 'g');
        attempts += 1;
    }

    let avatar = (0..MAX_ATTEMPTS)
        .map(|_| (rng.random_range(1..w - 1), rng.random_range(1..h - 1)))
        .find(|(x, y)| grid.at(*x, *y) == 'g')
        .or_else(|| grid.interior().find(|(x, y)| grid.at(*x, *y) == 'g'))
        .ok_or_else(|| GenError::Unsatisfiable("no grass cell for the avatar".into()))?;
    grid.set(avatar.0, avatar.1, 'A');

    let dist = land_distances(&grid, avatar);
    let grass: Vec<(usize, usize)> = grid.interior().filter(|(x, y)| grid.at(*x, *y) == 'g').collect();
    let manhattan = |(x, y): (usize, usize)| x.abs_diff(avatar.0) + y.abs_diff(avatar.1);
    let reachable = grass.iter().copied().filter(|(x, y)| dist[y * w + x].is_some());
    let cherry = reachable
        .max_by_key(|(x, y)| (dist[y * w + x], std::cmp::Reverse((*y, *x))))
        .filter(|c| manhattan(*c) > 1)
        .or_else(|| grass.iter().copied().max_by_key(|c| (manhattan(*c), std::cmp::Reverse((c.1, c.0)))))
        .ok_or_else(|| GenError::Unsatisfiable("no grass cell for the goal".into()))?;
    grid.set(cherry.0, cherry.1, 'C');

    let ores = params.ore_counts;
    let needed = (ores.coal + ores.iron + ores.diamond) as usize;
    let mut stone: Vec<(usize, usize)> = grid.interior().filter(|(x, y)| grid.at(*x, *y) == 'r').collect();
    let mut other: Vec<(usize, usize)> =
        grid.interior().filter(|(x, y)| !matches!(grid.at(*x, *y), 'r' | 'A' | 'C')).collect();
    if stone.len() + other.len() < needed {
        return Err(GenError::Unsatisfiable(format!(
            "{needed} ores do not fit in {} free interior cells",
            stone.len() + other.len()
        )));
    }
    stone.shuffle(&mut rng);
    other.shuffle(&mut rng);
    let kinds = std::iter::repeat_n('c', ores.coal as usize)
        .chain(std::iter::repeat_n('i', ores.iron as usize))
        .chain(std::iter::repeat_n('d', ores.diamond as usize));
    for (ch, (x, y)) in kinds.zip(stone.into_iter().chain(other)) {
        grid.set(x, y, ch);
    }
    Ok(grid.render())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reachability {
    LandReachable,
    ToolsRequired,
    Unknown,
}

const WALKABLE: [&str; 3] = ["grass", "sand", "path"];
const CHOPPABLE: [&str; 1] = ["tree"];
const MINEABLE: [&str; 4] = ["stone", "coal", "iron", "diamond"];
const BRIDGEABLE: [&str; 2] = ["water", "lava"];
const GOAL: &str = "cherry";
const AVATAR: &str = "player";

/// Heuristic label: whether the goal can be reached on foot, might need tools, or neither.
///
/// The goal counts as reached when a flood fill from the avatar touches a cell
/// next to it. The first fill crosses walkable ground only. The second also
/// crosses trees and minable rock, and water or lava when the level contains
/// stone to bridge them with.
pub fn reachability_hint(level: &str, doc: &GdyDocument) -> Result<Reachability, LevelError> {
    let layout = parse_level(doc, level)?;
    Ok(classify(&layout))
}

fn classify(layout: &LevelLayout) -> Reachability {
    let (w, h) = (layout.width() as usize, layout.height() as usize);
    let mut top: Vec<Option<&str>> = vec![None; w * h];
    for p in layout.placements() {
        top[p.y as usize * w + p.x as usize] = Some(p.object.as_str());
    }
    let find = |name: &str| top.iter().position(|c| *c == Some(name));
    let (Some(start), Some(_)) = (find(AVATAR), find(GOAL)) else {
        return Reachability::Unknown;
    };
    let has_stone = top.contains(&Some("stone"));
    let fill = |pass: &dyn Fn(Option<&str>) -> bool| {
        let mut seen = vec![false; w * h];
        seen[start] = true;
        let mut queue = VecDeque::from([start]);
        while let Some(i) = queue.pop_front() {
            for (nx, ny) in neighbours(i % w, i / w, w, h) {
                let j = ny * w + nx;
                if top[j] == Some(GOAL) {
                    return true;
                }
                if !seen[j] && pass(top[j]) {
                    seen[j] = true;
                    queue.push_back(j);
                }
            }
        }
        false
    };
    let walkable = |c: Option<&str>| c.is_none_or(|n| WALKABLE.contains(&n));
    if fill(&walkable) {
        return Reachability::LandReachable;
    }
    let with_tools = |c: Option<&str>| {
        walkable(c)
            || c.is_some_and(|n| {
                CHOPPABLE.contains(&n) || MINEABLE.contains(&n) || (has_stone && BRIDGEABLE.contains(&n))
            })
    };
    if fill(&with_tools) {
        Reachability::ToolsRequired
    } else {
        Reachability::Unknown
    }
}
