//! Observations of a [`GameState`]: vector tensor, ASCII, entity list and render map.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::level::EMPTY_CELL;
use crate::model::{Direction, ObserverConfig};
use crate::sim::GameState;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", content = "name", rename_all = "lowercase")]
pub enum Channel {
    Object(String),
    Orientation(Direction),
    Variable(String),
}

/// Dense `height × width × channels` tensor, row-major in (y, x, c).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VectorObservation<T> {
    pub width: u32,
    pub height: u32,
    pub channels: Vec<Channel>,
    pub data: Vec<T>,
}

impl<T: Copy> VectorObservation<T> {
    /// `(W, H, C)`.
    pub fn shape(&self) -> (usize, usize, usize) {
        (self.width as usize, self.height as usize, self.channels.len())
    }

    fn index(&self, x: u32, y: u32, c: usize) -> usize {
        (y as usize * self.width as usize + x as usize) * self.channels.len() + c
    }

    pub fn get(&self, x: u32, y: u32, c: usize) -> T {
        self.data[self.index(x, y, c)]
    }

    pub fn cell(&self, x: u32, y: u32) -> &[T] {
        let start = self.index(x, y, 0);
        &self.data[start..start + self.channels.len()]
    }

    /// Quarter turn clockwise: width and height swap and orientation channels turn with the grid.
    /// Four applications return the original tensor.
    pub fn rotate_quarter(&self) -> Self {
        let (w, h, c) = self.shape();
        let mut out = VectorObservation {
            width: h as u32,
            height: w as u32,
            channels: self.channels.clone(),
            data: self.data.clone(),
        };
        let turn: Vec<usize> = self
            .channels
            .iter()
            .map(|ch| match ch {
                Channel::Orientation(d) => {
                    let target = Channel::Orientation(Direction::from_quarter_turns(d.quarter_turns() + 1));
                    self.channels.iter().position(|x| *x == target).unwrap_or(0)
                }
                _ => usize::MAX,
            })
            .collect();
        for y in 0..h {
            for x in 0..w {
                // (x, y) lands at (h - 1 - y, x)
                let (nx, ny) = ((h - 1 - y) as u32, x as u32);
                for (k, t) in turn.iter().enumerate() {
                    let dst = if *t == usize::MAX { k } else { *t };
                    let i = out.index(nx, ny, dst);
                    out.data[i] = self.data[(y * w + x) * c + k];
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Entity {
    pub object: String,
    pub x: u32,
    pub y: u32,
    pub orientation: Direction,
    pub variables: BTreeMap<String, i64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntityObservation {
    pub entities: Vec<Entity>,
    /// Player variables.
    pub global_entity: BTreeMap<String, i64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RenderTile {
    pub object: String,
    pub tile: String,
    pub orientation: Direction,
    /// Same-object neighbours, N=1 E=2 S=4 W=8; only for autotiled objects.
    pub autotile: Option<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RenderMap {
    pub width: u32,
    pub height: u32,
    /// Row-major cells, each ascending in Z.
    pub cells: Vec<Vec<RenderTile>>,
}

impl RenderMap {
    pub fn cell(&self, x: u32, y: u32) -> &[RenderTile] {
        &self.cells[y as usize * self.width as usize + x as usize]
    }
}

/// `(dx, dy)` turned clockwise `turns` times (y grows downward).
pub fn rotate_offset((dx, dy): (i64, i64), turns: u8) -> (i64, i64) {
    match turns % 4 {
        0 => (dx, dy),
        1 => (-dy, dx),
        2 => (-dx, -dy),
        _ => (dy, -dx),
    }
}

/// Maps observation cells to world cells.
struct View {
    width: u32,
    height: u32,
    origin: (i64, i64),
    turns: u8,
    windowed: bool,
}

impl View {
    fn new(state: &GameState, config: &ObserverConfig) -> Self {
        let Some((w, h)) = config.window else {
            return View { width: state.width(), height: state.height(), origin: (0, 0), turns: 0, windowed: false };
        };
        let (cx, cy, facing) = match state.avatar() {
            Some(a) => (a.position().0 as i64, a.position().1 as i64, a.orientation()),
            None => (i64::from(state.width() / 2), i64::from(state.height() / 2), Direction::Up),
        };
        let turns = if config.rotate_with_avatar { facing.quarter_turns() } else { 0 };
        View { width: w, height: h, origin: (cx, cy), turns, windowed: true }
    }

    fn world(&self, x: u32, y: u32) -> (i64, i64) {
        if !self.windowed {
            return (i64::from(x), i64::from(y));
        }
        let rel = (i64::from(x) - i64::from(self.width / 2), i64::from(y) - i64::from(self.height / 2));
        let (dx, dy) = rotate_offset(rel, self.turns);
        (self.origin.0 + dx, self.origin.1 + dy)
    }

    fn contains(&self, (wx, wy): (u32, u32)) -> bool {
        if !self.windowed {
            return true;
        }
        let rel = (i64::from(wx) - self.origin.0, i64::from(wy) - self.origin.1);
        let (dx, dy) = rotate_offset(rel, (4 - self.turns) % 4);
        let (x, y) = (dx + i64::from(self.width / 2), dy + i64::from(self.height / 2));
        x >= 0 && y >= 0 && x < i64::from(self.width) && y < i64::from(self.height)
    }
}

fn in_grid(state: &GameState, (x, y): (i64, i64)) -> Option<(u32, u32)> {
    (x >= 0 && y >= 0 && x < i64::from(state.width()) && y < i64::from(state.height())).then_some((x as u32, y as u32))
}

/// Channel layout for a document under `config`.
pub fn channel_layout(state: &GameState, config: &ObserverConfig) -> Vec<Channel> {
    let game = state.game();
    let mut channels: Vec<Channel> = game.objects().iter().map(|o| Channel::Object(o.name.clone())).collect();
    if config.include_orientation_channels {
        channels.extend(Direction::INPUT_ORDER.map(Channel::Orientation));
    }
    if config.include_player_variable_channels {
        channels.extend(game.player_variable_names().iter().cloned().map(Channel::Variable));
    }
    channels
}

fn cast<T: num_traits::NumCast + Zero>(v: i64) -> T {
    <T as num_traits::NumCast>::from(v).unwrap_or_else(T::zero)
}

/// One-hot of the topmost object per cell, its orientation, then player variables on every cell.
pub fn vector_obs<T>(state: &GameState, config: &ObserverConfig) -> VectorObservation<T>
where
    T: num_traits::NumCast + Zero + One + Copy,
{
    let view = View::new(state, config);
    let channels = channel_layout(state, config);
    let n_objects = state.game().objects().len();
    let c = channels.len();
    let mut data = vec![T::zero(); view.width as usize * view.height as usize * c];
    let vars: Vec<T> = if config.include_player_variable_channels {
        state.player_variables().iter().map(|v| cast(*v)).collect()
    } else {
        Vec::new()
    };
    let orient_base = n_objects;
    let var_base = n_objects + if config.include_orientation_channels { 4 } else { 0 };
    for y in 0..view.height {
        for x in 0..view.width {
            let base = (y as usize * view.width as usize + x as usize) * c;
            data[base + var_base..base + var_base + vars.len()].copy_from_slice(&vars);
            let Some((wx, wy)) = in_grid(state, view.world(x, y)) else { continue };
            let Some(top) = state.top_at(wx, wy) else { continue };
            data[base + top.object() as usize] = T::one();
            if config.include_orientation_channels {
                let facing = Direction::from_quarter_turns(top.orientation().quarter_turns() + 4 - view.turns);
                let k = Direction::INPUT_ORDER.iter().position(|d| *d == facing).unwrap_or(0);
                data[base + orient_base + k] = T::one();
            }
        }
    }
    VectorObservation { width: view.width, height: view.height, channels, data }
}

/// Shape `(W, H, C)` that [`vector_obs`] produces for this state.
pub fn vector_shape(state: &GameState, config: &ObserverConfig) -> (usize, usize, usize) {
    let (w, h) = config.window.unwrap_or((state.width(), state.height()));
    (w as usize, h as usize, channel_layout(state, config).len())
}

/// One map character per cell (topmost Z), `.` when empty; rows joined by `\n`.
pub fn ascii_obs(state: &GameState) -> String {
    let objects = state.game().objects();
    let mut out = String::with_capacity((state.width() as usize + 1) * state.height() as usize);
    for y in 0..state.height() {
        if y > 0 {
            out.push('\n');
        }
        for x in 0..state.width() {
            out.push(state.top_at(x, y).map_or(EMPTY_CELL, |i| objects[i.object() as usize].map_character));
        }
    }
    out
}

/// Every instance inside the window (all instances without one), in row-major then Z order.
pub fn entity_obs(state: &GameState, config: &ObserverConfig) -> EntityObservation {
    let view = View::new(state, config);
    let objects = state.game().objects();
    let mut entities = Vec::new();
    for y in 0..state.height() {
        for x in 0..state.width() {
            if !view.contains((x, y)) {
                continue;
            }
            for inst in state.stack_at(x, y) {
                let info = &objects[inst.object() as usize];
                entities.push(Entity {
                    object: info.name.clone(),
                    x,
                    y,
                    orientation: inst.orientation(),
                    variables: info.variable_names.iter().cloned().zip(inst.variables().iter().copied()).collect(),
                });
            }
        }
    }
    EntityObservation { entities, global_entity: state.player_variable_map() }
}

/// N=1, E=2, S=4, W=8 over same-object neighbours.
pub fn autotile_index(same: impl Fn(i64, i64) -> bool, x: i64, y: i64) -> u8 {
    let mut mask = 0;
    for (bit, (dx, dy)) in [(1, (0, -1)), (2, (1, 0)), (4, (0, 1)), (8, (-1, 0))] {
        if same(x + dx, y + dy) {
            mask |= bit;
        }
    }
    mask
}

pub fn render_map(state: &GameState) -> RenderMap {
    let objects = state.game().objects();
    let mut cells = Vec::with_capacity(state.width() as usize * state.height() as usize);
    for y in 0..state.height() {
        for x in 0..state.width() {
            let tiles = state
                .stack_at(x, y)
                .map(|inst| {
                    let info = &objects[inst.object() as usize];
                    let autotile = info.tile.autotile.then(|| {
                        let same = |nx: i64, ny: i64| {
                            in_grid(state, (nx, ny))
                                .is_some_and(|(nx, ny)| state.stack_at(nx, ny).any(|o| o.object() == inst.object()))
                        };
                        autotile_index(same, i64::from(x), i64::from(y))
                    });
                    RenderTile {
                        object: info.name.clone(),
                        tile: info.tile.key.clone(),
                        orientation: inst.orientation(),
                        autotile,
                    }
                })
                .collect();
            cells.push(tiles);
        }
    }
    RenderMap { width: state.width(), height: state.height(), cells }
}
