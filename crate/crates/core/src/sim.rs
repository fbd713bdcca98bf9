//! Transition engine: behaviour matching, command execution, rewards and termination.
//!
//! One step resolves as follows. The acting avatar's destination cell is its
//! cell plus the input delta (unary inputs use the faced cell). The
//! destination object is the topmost-Z instance there, or `_empty`. The first
//! declared behaviour whose source matches the actor, whose destination list
//! contains the destination object and whose preconditions hold is executed:
//! destination commands first, then source commands. Commands that cannot
//! apply (blocked `mov`, conflicting `spawn`) fail silently without undoing
//! earlier commands. Win conditions, then lose conditions, then the step
//! limit are checked on the resulting state.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;
use thiserror::Error;

use crate::game::{Cmd, Cond, Game, ObjectId, Slot, Value};
use crate::hash::fnv1a64;
use crate::level::LevelLayout;
use crate::model::{ArithOp, Direction, StepOp};
use crate::noise::splitmix64;

/// Deepest chain of `cascade` re-dispatches within one step.
pub const MAX_CASCADE_DEPTH: usize = 32;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("level has no avatar instance")]
    MissingAvatar,
    #[error("level has {0} avatar instances, expected one")]
    MultipleAvatars(usize),
    #[error("level places unknown object `{0}`")]
    UnknownObject(String),
    #[error("episode is over")]
    EpisodeOver,
    #[error("action id {id} out of range (action space has {len} entries)")]
    BadAction { id: u32, len: usize },
    #[error("unresolved {0}")]
    Unresolved(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Running,
    Win,
    Lose,
    Truncated,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Running => "running",
            Status::Win => "win",
            Status::Lose => "lose",
            Status::Truncated => "truncated",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Mov,
    MovBlocked,
    Cascade,
    CascadeOverflow,
    Remove,
    Spawn,
    SpawnBlocked,
    Reward,
    Add,
    Sub,
    Set,
    Incr,
    Decr,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepEvent {
    pub kind: EventKind,
    pub object: String,
    pub x: u32,
    pub y: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepResult {
    pub reward: i64,
    pub terminated: bool,
    pub truncated: bool,
    pub status: Status,
    pub events: Vec<StepEvent>,
    /// Player variables after the step.
    pub info: BTreeMap<String, i64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    id: u64,
    object: ObjectId,
    x: u32,
    y: u32,
    orientation: Direction,
    variables: Vec<i64>,
}

impl Instance {
    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn object(&self) -> ObjectId {
        self.object
    }

    pub fn position(&self) -> (u32, u32) {
        (self.x, self.y)
    }

    pub fn orientation(&self) -> Direction {
        self.orientation
    }

    pub fn variables(&self) -> &[i64] {
        &self.variables
    }
}

type CellStack = SmallVec<[u32; 2]>;

/// Full mutable simulation state.
#[derive(Debug, Clone)]
pub struct GameState {
    game: Arc<Game>,
    width: u32,
    height: u32,
    /// Slot-indexed instances; `None` marks a free slot.
    slots: Vec<Option<Instance>>,
    free: Vec<u32>,
    /// Slots per cell, ascending Z.
    cells: Vec<CellStack>,
    counts: Vec<i64>,
    player_variables: Vec<i64>,
    step_count: u64,
    rng_state: u64,
    status: Status,
    accumulated_return: i64,
    next_id: u64,
    avatar: Option<u32>,
}

/// The side of a behaviour whose commands are running.
#[derive(Clone, Copy)]
struct Side {
    slot: Option<u32>,
    id: u64,
    cell: (u32, u32),
    object: Option<ObjectId>,
}

struct Dispatch {
    action: usize,
    delta: (i32, i32),
    turn_to: Option<Direction>,
}

#[derive(Default)]
struct StepAcc {
    reward: i64,
    events: Vec<StepEvent>,
}

impl GameState {
    /// Materialises a level. Requires exactly one avatar when the document declares one.
    pub fn reset(game: Arc<Game>, layout: &LevelLayout, seed: u64) -> Result<Self, SimError> {
        let (width, height) = (layout.width(), layout.height());
        let mut state = GameState {
            width,
            height,
            slots: Vec::with_capacity(layout.placements().len()),
            free: Vec::new(),
            cells: vec![CellStack::new(); width as usize * height as usize],
            counts: vec![0; game.objects.len()],
            player_variables: game.player_variable_init.clone(),
            step_count: 0,
            rng_state: seed,
            status: Status::Running,
            accumulated_return: 0,
            next_id: 0,
            avatar: None,
            game,
        };
        let mut avatars = 0;
        for p in layout.placements() {
            let object = state.game.object_id(&p.object).ok_or_else(|| SimError::UnknownObject(p.object.clone()))?;
            let slot = state.insert(object, p.x, p.y);
            if Some(object) == state.game.avatar {
                avatars += 1;
                state.avatar = Some(slot);
            }
        }
        match (state.game.avatar, avatars) {
            (Some(_), 0) => Err(SimError::MissingAvatar),
            (_, n) if n > 1 => Err(SimError::MultipleAvatars(n)),
            _ => Ok(state),
        }
    }

    pub fn game(&self) -> &Arc<Game> {
        &self.game
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn step_count(&self) -> u64 {
        self.step_count
    }

    pub fn status(&self) -> Status {
        self.status
    }

    pub fn accumulated_return(&self) -> i64 {
        self.accumulated_return
    }

    pub fn rng_state(&self) -> u64 {
        self.rng_state
    }

    /// Draws from the state's splitmix64 stream.
    pub fn next_random(&mut self) -> u64 {
        splitmix64(&mut self.rng_state)
    }

    pub fn player_variables(&self) -> &[i64] {
        &self.player_variables
    }

    pub fn player_variable(&self, name: &str) -> Option<i64> {
        let i = self.game.player_variable_names.iter().position(|n| n == name)?;
        Some(self.player_variables[i])
    }

    pub fn player_variable_map(&self) -> BTreeMap<String, i64> {
        self.game.player_variable_names.iter().cloned().zip(self.player_variables.iter().copied()).collect()
    }

    /// Live instances of `object`.
    pub fn count(&self, object: &str) -> i64 {
        self.game.object_id(object).map_or(0, |id| self.counts[id as usize])
    }

    pub fn instances(&self) -> impl Iterator<Item = &Instance> {
        self.slots.iter().flatten()
    }

    pub fn avatar(&self) -> Option<&Instance> {
        self.avatar.and_then(|s| self.slots[s as usize].as_ref())
    }

    /// Instances at a cell, ascending Z.
    pub fn stack_at(&self, x: u32, y: u32) -> impl Iterator<Item = &Instance> {
        let cell: &[u32] = if x < self.width && y < self.height { &self.cells[self.cell_index(x, y)] } else { &[] };
        cell.iter().filter_map(|s| self.slots[*s as usize].as_ref())
    }

    pub fn top_at(&self, x: u32, y: u32) -> Option<&Instance> {
        self.stack_at(x, y).last()
    }

    pub fn object_name(&self, id: ObjectId) -> &str {
        &self.game.objects[id as usize].name
    }

    /// Overrides the avatar's facing; used to set up scenarios.
    pub fn set_avatar_orientation(&mut self, dir: Direction) {
        if let Some(slot) = self.avatar {
            if let Some(inst) = self.slots[slot as usize].as_mut() {
                inst.orientation = dir;
            }
        }
    }

    fn cell_index(&self, x: u32, y: u32) -> usize {
        y as usize * self.width as usize + x as usize
    }

    fn offset(&self, (x, y): (u32, u32), (dx, dy): (i32, i32)) -> Option<(u32, u32)> {
        let nx = i64::from(x) + i64::from(dx);
        let ny = i64::from(y) + i64::from(dy);
        (nx >= 0 && ny >= 0 && nx < i64::from(self.width) && ny < i64::from(self.height))
            .then_some((nx as u32, ny as u32))
    }

    fn z_of(&self, slot: u32) -> i32 {
        let obj = self.slots[slot as usize].as_ref().map_or(0, |i| i.object);
        self.game.objects[obj as usize].z
    }

    fn z_occupied(&self, (x, y): (u32, u32), z: i32) -> bool {
        self.cells[self.cell_index(x, y)].iter().any(|s| self.z_of(*s) == z)
    }

    fn insert(&mut self, object: ObjectId, x: u32, y: u32) -> u32 {
        let info = &self.game.objects[object as usize];
        let inst = Instance {
            id: self.next_id,
            object,
            x,
            y,
            orientation: Direction::Down,
            variables: info.variable_init.clone(),
        };
        let z = info.z;
        self.next_id += 1;
        let slot = match self.free.pop() {
            Some(s) => {
                self.slots[s as usize] = Some(inst);
                s
            }
            None => {
                self.slots.push(Some(inst));
                (self.slots.len() - 1) as u32
            }
        };
        self.push_to_cell(slot, (x, y), z);
        self.counts[object as usize] += 1;
        slot
    }

    fn push_to_cell(&mut self, slot: u32, (x, y): (u32, u32), z: i32) {
        let idx = self.cell_index(x, y);
        let pos = self.cells[idx].iter().position(|s| self.z_of(*s) > z).unwrap_or(self.cells[idx].len());
        self.cells[idx].insert(pos, slot);
    }

    fn detach(&mut self, slot: u32, (x, y): (u32, u32)) {
        let idx = self.cell_index(x, y);
        self.cells[idx].retain(|s| *s != slot);
    }

    fn remove_slot(&mut self, slot: u32) {
        if let Some(inst) = self.slots[slot as usize].take() {
            self.detach(slot, (inst.x, inst.y));
            self.counts[inst.object as usize] -= 1;
            self.free.push(slot);
            if self.avatar == Some(slot) {
                self.avatar = None;
            }
        }
    }

    fn alive(&self, side: &Side) -> Option<u32> {
        let slot = side.slot?;
        match &self.slots[slot as usize] {
            Some(inst) if inst.id == side.id => Some(slot),
            _ => None,
        }
    }

    fn side_for(&self, slot: u32) -> Side {
        let inst = self.slots[slot as usize].as_ref().expect("live slot");
        Side { slot: Some(slot), id: inst.id, cell: (inst.x, inst.y), object: Some(inst.object) }
    }

    fn read(&self, slot: Slot, me: &Side) -> i64 {
        match slot {
            Slot::Own(i) => self
                .alive(me)
                .and_then(|s| self.slots[s as usize].as_ref())
                .and_then(|inst| inst.variables.get(i).copied())
                .unwrap_or(0),
            Slot::Player(i) => self.player_variables[i],
            Slot::Count(obj) => self.counts[obj as usize],
            Slot::Steps => self.step_count as i64,
        }
    }

    fn write(&mut self, slot: Slot, me: &Side, value: i64) {
        match slot {
            Slot::Own(i) => {
                if let Some(s) = self.alive(me) {
                    if let Some(v) = self.slots[s as usize].as_mut().and_then(|inst| inst.variables.get_mut(i)) {
                        *v = value;
                    }
                }
            }
            Slot::Player(i) => self.player_variables[i] = value,
            Slot::Count(_) | Slot::Steps => {}
        }
    }

    fn value(&self, v: Value, me: &Side) -> i64 {
        match v {
            Value::Lit(x) => x,
            Value::Slot(s) => self.read(s, me),
        }
    }

    fn holds(&self, cond: &Cond, me: &Side) -> bool {
        match cond {
            Cond::Cmp(op, a, b) => op.apply(self.value(*a, me), self.value(*b, me)),
            Cond::And(list) => list.iter().all(|c| self.holds(c, me)),
            Cond::Or(list) => list.iter().any(|c| self.holds(c, me)),
        }
    }

    fn all_hold(&self, conds: &[Cond], me: &Side) -> bool {
        conds.iter().all(|c| self.holds(c, me))
    }

    fn global_side() -> Side {
        Side { slot: None, id: 0, cell: (0, 0), object: None }
    }

    /// Resolves the destination of `actor` and returns the selected rule, if any.
    fn select(
        &self,
        game: &Game,
        action: usize,
        actor: u32,
        delta: (i32, i32),
    ) -> Option<(u32, (u32, u32), Option<u32>)> {
        let me = self.side_for(actor);
        let dest = self.offset(me.cell, delta)?;
        let top = self.cells[self.cell_index(dest.0, dest.1)].last().copied();
        let dst_key = match top {
            Some(s) => self.slots[s as usize].as_ref().map_or(game.objects.len(), |i| i.object as usize),
            None => game.objects.len(),
        };
        let compiled = &game.actions[action];
        let src = me.object? as usize;
        compiled.table[src][dst_key]
            .iter()
            .copied()
            .find(|r| self.all_hold(&compiled.rules[*r as usize].preconditions, &me))
            .map(|r| (r, dest, top))
    }

    fn dispatch(&mut self, game: &Game, d: &Dispatch, actor: u32, depth: usize, acc: &mut StepAcc) -> bool {
        let Some((rule, dest, top)) = self.select(game, d.action, actor, d.delta) else {
            return false;
        };
        if let Some(dir) = d.turn_to {
            if let Some(inst) = self.slots[actor as usize].as_mut() {
                inst.orientation = dir;
            }
        }
        let rule = &game.actions[d.action].rules[rule as usize];
        let mut dst_side = match top {
            Some(s) => self.side_for(s),
            None => Side { slot: None, id: 0, cell: dest, object: None },
        };
        let mut src_side = self.side_for(actor);
        let cascade = Dispatch { action: d.action, delta: d.delta, turn_to: None };
        let dst_before = dst_side;
        self.run(game, &rule.dst, &mut dst_side, dest, &dst_before, &cascade, depth, acc);
        self.run(game, &rule.src, &mut src_side, dest, &dst_before, &cascade, depth, acc);
        true
    }

    #[allow(clippy::too_many_arguments)]
    fn run(
        &mut self,
        game: &Game,
        cmds: &[Cmd],
        me: &mut Side,
        dest: (u32, u32),
        dst: &Side,
        cascade: &Dispatch,
        depth: usize,
        acc: &mut StepAcc,
    ) {
        for cmd in cmds {
            let name = |state: &Self, side: &Side| {
                side.object.map_or_else(|| crate::model::EMPTY_OBJECT.to_string(), |o| state.object_name(o).to_string())
            };
            match cmd {
                Cmd::Mov => {
                    let Some(slot) = self.alive(me) else { continue };
                    if me.cell == dest {
                        continue;
                    }
                    let z = self.z_of(slot);
                    if self.z_occupied(dest, z) {
                        acc.events.push(StepEvent {
                            kind: EventKind::MovBlocked,
                            object: name(self, me),
                            x: me.cell.0,
                            y: me.cell.1,
                        });
                        continue;
                    }
                    self.detach(slot, me.cell);
                    self.push_to_cell(slot, dest, z);
                    if let Some(inst) = self.slots[slot as usize].as_mut() {
                        inst.x = dest.0;
                        inst.y = dest.1;
                    }
                    me.cell = dest;
                    acc.events.push(StepEvent { kind: EventKind::Mov, object: name(self, me), x: dest.0, y: dest.1 });
                }
                Cmd::Cascade => {
                    let Some(target) = self.alive(dst) else { continue };
                    if depth + 1 > MAX_CASCADE_DEPTH {
                        acc.events.push(StepEvent {
                            kind: EventKind::CascadeOverflow,
                            object: name(self, dst),
                            x: dst.cell.0,
                            y: dst.cell.1,
                        });
                        continue;
                    }
                    acc.events.push(StepEvent {
                        kind: EventKind::Cascade,
                        object: name(self, dst),
                        x: dst.cell.0,
                        y: dst.cell.1,
                    });
                    self.dispatch(game, cascade, target, depth + 1, acc);
                }
                Cmd::Remove => {
                    let Some(slot) = self.alive(me) else { continue };
                    let label = name(self, me);
                    let (x, y) = me.cell;
                    self.remove_slot(slot);
                    acc.events.push(StepEvent { kind: EventKind::Remove, object: label, x, y });
                }
                Cmd::Spawn(obj) => {
                    let z = game.objects[*obj as usize].z;
                    let (x, y) = me.cell;
                    let label = game.objects[*obj as usize].name.clone();
                    if self.z_occupied(me.cell, z) {
                        acc.events.push(StepEvent { kind: EventKind::SpawnBlocked, object: label, x, y });
                        continue;
                    }
                    self.insert(*obj, x, y);
                    acc.events.push(StepEvent { kind: EventKind::Spawn, object: label, x, y });
                }
                Cmd::Arith(op, slot, v) => {
                    let rhs = self.value(*v, me);
                    let cur = self.read(*slot, me);
                    let (next, kind) = match op {
                        ArithOp::Add => (cur.wrapping_add(rhs), EventKind::Add),
                        ArithOp::Sub => (cur.wrapping_sub(rhs), EventKind::Sub),
                        ArithOp::Set => (rhs, EventKind::Set),
                    };
                    self.write(*slot, me, next);
                    acc.events.push(StepEvent { kind, object: name(self, me), x: me.cell.0, y: me.cell.1 });
                }
                Cmd::Step(op, slot) => {
                    let cur = self.read(*slot, me);
                    let (next, kind) = match op {
                        StepOp::Incr => (cur.wrapping_add(1), EventKind::Incr),
                        StepOp::Decr => (cur.wrapping_sub(1), EventKind::Decr),
                    };
                    self.write(*slot, me, next);
                    acc.events.push(StepEvent { kind, object: name(self, me), x: me.cell.0, y: me.cell.1 });
                }
                Cmd::Reward(k) => {
                    acc.reward += *k;
                    acc.events.push(StepEvent {
                        kind: EventKind::Reward,
                        object: name(self, me),
                        x: me.cell.0,
                        y: me.cell.1,
                    });
                }
                Cmd::If(conds, on_true, on_false) => {
                    let branch = if self.all_hold(conds, me) { on_true } else { on_false };
                    self.run(game, branch, me, dest, dst, cascade, depth, acc);
                }
            }
        }
    }

    fn entry_dispatch(&self, id: u32) -> Result<Option<Dispatch>, SimError> {
        let space = self.game.action_space();
        let entry = space.get(id).ok_or(SimError::BadAction { id, len: space.len() })?;
        let Some(action) = entry.action_index else { return Ok(None) };
        let Some(avatar) = self.avatar() else { return Ok(None) };
        Ok(Some(match entry.direction {
            Some(dir) => Dispatch { action, delta: dir.delta(), turn_to: Some(dir) },
            None => Dispatch { action, delta: avatar.orientation.delta(), turn_to: None },
        }))
    }

    /// Advances one step.
    pub fn step(&mut self, action_id: u32) -> Result<StepResult, SimError> {
        if self.status != Status::Running {
            return Err(SimError::EpisodeOver);
        }
        let dispatch = self.entry_dispatch(action_id)?;
        let game = Arc::clone(&self.game);
        let mut acc = StepAcc::default();
        if let (Some(d), Some(actor)) = (dispatch, self.avatar) {
            self.dispatch(&game, &d, actor, 0, &mut acc);
        }
        self.step_count += 1;

        let global = Self::global_side();
        let mut terminated = false;
        let mut truncated = false;
        if game.win.iter().any(|c| self.holds(c, &global)) {
            self.status = Status::Win;
            terminated = true;
        } else if game.lose.iter().any(|c| self.holds(c, &global)) {
            self.status = Status::Lose;
            terminated = true;
        } else if game.max_steps.is_some_and(|m| self.step_count >= m) {
            self.status = Status::Truncated;
            truncated = true;
        }
        self.accumulated_return += acc.reward;
        Ok(StepResult {
            reward: acc.reward,
            terminated,
            truncated,
            status: self.status,
            events: acc.events,
            info: self.player_variable_map(),
        })
    }

    /// Bit per action id: set iff stepping it would select a behaviour. The no-op is always set.
    pub fn valid_action_mask(&self) -> Vec<bool> {
        let space = self.game.action_space();
        let mut mask = vec![false; space.len()];
        mask[0] = true;
        let (Some(actor), true) = (self.avatar, self.status == Status::Running) else {
            return mask;
        };
        for id in 1..space.len() as u32 {
            if let Ok(Some(d)) = self.entry_dispatch(id) {
                mask[id as usize] = self.select(&self.game, d.action, actor, d.delta).is_some();
            }
        }
        mask
    }

    /// Canonical text behind [`GameState::state_hash`].
    ///
    /// One line per instance, sorted by (y, x, z, name):
    /// `name,x,y,z,orientation,{var=value,...}` with variables sorted by name;
    /// then `player:{var=value,...}` sorted by name, `step:N` and `status:S`.
    pub fn canonical_text(&self) -> String {
        self.canonical_text_with(true)
    }

    fn canonical_text_with(&self, with_step: bool) -> String {
        let objects = &self.game.objects;
        let mut rows: Vec<(u32, u32, i32, &str, &Instance)> = self
            .instances()
            .map(|i| {
                let info = &objects[i.object as usize];
                (i.y, i.x, info.z, info.name.as_str(), i)
            })
            .collect();
        rows.sort_by(|a, b| (a.0, a.1, a.2, a.3).cmp(&(b.0, b.1, b.2, b.3)));
        let mut out = String::new();
        for (y, x, z, name, inst) in rows {
            let names = &objects[inst.object as usize].variable_names;
            let mut vars: Vec<(&str, i64)> =
                names.iter().map(String::as_str).zip(inst.variables.iter().copied()).collect();
            vars.sort();
            let _ = write!(out, "{name},{x},{y},{z},{},{{", inst.orientation.as_str());
            write_vars(&mut out, &vars);
            out.push_str("}\n");
        }
        let mut vars: Vec<(&str, i64)> = self
            .game
            .player_variable_names
            .iter()
            .map(String::as_str)
            .zip(self.player_variables.iter().copied())
            .collect();
        vars.sort();
        out.push_str("player:{");
        write_vars(&mut out, &vars);
        out.push_str("}\n");
        if with_step {
            let _ = writeln!(out, "step:{}", self.step_count);
        }
        let _ = writeln!(out, "status:{}", self.status.as_str());
        out
    }

    /// FNV-1a 64 of [`GameState::canonical_text`].
    pub fn state_hash(&self) -> u64 {
        fnv1a64(self.canonical_text().as_bytes())
    }

    /// Like [`GameState::state_hash`] but blind to the step counter, so states
    /// reached along different paths compare equal. Used for search dedup.
    pub fn configuration_hash(&self) -> u64 {
        fnv1a64(self.canonical_text_with(false).as_bytes())
    }
}

fn write_vars(out: &mut String, vars: &[(&str, i64)]) {
    for (i, (k, v)) in vars.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        let _ = write!(out, "{k}={v}");
    }
}
