//! Rules compiled from a document: names resolved to indices once, up front.

use std::collections::HashMap;
use std::sync::Arc;

use crate::action_space::ActionSpace;
use crate::model::{
    ArithOp, Command, CompareOp, Condition, GdyDocument, Operand, StepOp, TileSpec, EMPTY_OBJECT, STEPS_VARIABLE,
};
use crate::sim::SimError;

pub type ObjectId = u16;

#[derive(Debug, Clone)]
pub struct ObjectInfo {
    pub name: String,
    pub map_character: char,
    pub z: i32,
    pub variable_names: Vec<String>,
    pub variable_init: Vec<i64>,
    pub tile: TileSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Slot {
    /// Variable of the executing instance.
    Own(usize),
    Player(usize),
    Count(ObjectId),
    Steps,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Value {
    Lit(i64),
    Slot(Slot),
}

#[derive(Debug, Clone)]
pub(crate) enum Cond {
    Cmp(CompareOp, Value, Value),
    And(Vec<Cond>),
    Or(Vec<Cond>),
}

#[derive(Debug, Clone)]
pub(crate) enum Cmd {
    Mov,
    Cascade,
    Remove,
    Spawn(ObjectId),
    Arith(ArithOp, Slot, Value),
    Step(StepOp, Slot),
    Reward(i64),
    If(Vec<Cond>, Vec<Cmd>, Vec<Cmd>),
}

/// One behaviour specialised to a concrete destination object.
#[derive(Debug, Clone)]
pub(crate) struct Rule {
    pub preconditions: Vec<Cond>,
    pub src: Vec<Cmd>,
    pub dst: Vec<Cmd>,
}

#[derive(Debug, Clone)]
pub(crate) struct CompiledAction {
    /// `table[src][dst]` lists rule indices in declaration order; `dst == objects.len()` is `_empty`.
    pub table: Vec<Vec<Vec<u32>>>,
    pub rules: Vec<Rule>,
}

/// Immutable, shareable rule set for one document.
#[derive(Debug)]
pub struct Game {
    document: Arc<GdyDocument>,
    pub(crate) objects: Vec<ObjectInfo>,
    pub(crate) by_name: HashMap<String, ObjectId>,
    pub(crate) avatar: Option<ObjectId>,
    pub(crate) player_variable_names: Vec<String>,
    pub(crate) player_variable_init: Vec<i64>,
    pub(crate) actions: Vec<CompiledAction>,
    pub(crate) win: Vec<Cond>,
    pub(crate) lose: Vec<Cond>,
    pub(crate) max_steps: Option<u64>,
    action_space: ActionSpace,
}

#[derive(Clone, Copy)]
enum Scope {
    Object(ObjectId),
    Global,
}

struct Compiler<'a> {
    doc: &'a GdyDocument,
    by_name: &'a HashMap<String, ObjectId>,
    objects: &'a [ObjectInfo],
}

impl Compiler<'_> {
    fn object(&self, name: &str) -> Result<ObjectId, SimError> {
        self.by_name.get(name).copied().ok_or_else(|| SimError::Unresolved(format!("object `{name}`")))
    }

    fn slot(&self, name: &str, scope: Scope) -> Result<Slot, SimError> {
        if name == STEPS_VARIABLE {
            return Ok(Slot::Steps);
        }
        if let Some(obj) = name.strip_suffix(":count") {
            return Ok(Slot::Count(self.object(obj)?));
        }
        if let Scope::Object(id) = scope {
            if let Some(i) = self.objects[id as usize].variable_names.iter().position(|v| v == name) {
                return Ok(Slot::Own(i));
            }
        }
        self.doc
            .environment
            .player_variable(name)
            .map(Slot::Player)
            .ok_or_else(|| SimError::Unresolved(format!("variable `{name}`")))
    }

    fn value(&self, op: &Operand, scope: Scope) -> Result<Value, SimError> {
        Ok(match op {
            Operand::Literal(v) => Value::Lit(*v),
            Operand::Variable(name) => Value::Slot(self.slot(name, scope)?),
            Operand::Count(obj) => Value::Slot(Slot::Count(self.object(obj)?)),
        })
    }

    fn cond(&self, c: &Condition, scope: Scope) -> Result<Cond, SimError> {
        Ok(match c {
            Condition::Compare { op, lhs, rhs } => Cond::Cmp(*op, self.value(lhs, scope)?, self.value(rhs, scope)?),
            Condition::And(list) => Cond::And(self.conds(list, scope)?),
            Condition::Or(list) => Cond::Or(self.conds(list, scope)?),
        })
    }

    fn conds(&self, list: &[Condition], scope: Scope) -> Result<Vec<Cond>, SimError> {
        list.iter().map(|c| self.cond(c, scope)).collect()
    }

    fn cmds(&self, list: &[Command], scope: Scope) -> Result<Vec<Cmd>, SimError> {
        list.iter()
            .map(|c| {
                Ok(match c {
                    Command::Mov => Cmd::Mov,
                    Command::Cascade => Cmd::Cascade,
                    Command::Remove => Cmd::Remove,
                    Command::Spawn(name) => Cmd::Spawn(self.object(name)?),
                    Command::Arith { op, target, value } => {
                        Cmd::Arith(*op, self.slot(target, scope)?, self.value(value, scope)?)
                    }
                    Command::Step { op, target } => Cmd::Step(*op, self.slot(target, scope)?),
                    Command::Reward(v) => Cmd::Reward(*v),
                    Command::If { conditions, on_true, on_false } => {
                        Cmd::If(self.conds(conditions, scope)?, self.cmds(on_true, scope)?, self.cmds(on_false, scope)?)
                    }
                })
            })
            .collect()
    }
}

impl Game {
    /// Compiles a validated document. Name-resolution failures only occur for
    /// documents that would not pass validation.
    pub fn new(document: Arc<GdyDocument>) -> Result<Self, SimError> {
        let doc = &*document;
        if doc.objects.len() >= ObjectId::MAX as usize {
            return Err(SimError::Unresolved("too many object types".into()));
        }
        let objects: Vec<ObjectInfo> = doc
            .objects
            .iter()
            .map(|o| ObjectInfo {
                name: o.name.clone(),
                map_character: o.map_character,
                z: o.z,
                variable_names: o.initial_variables.iter().map(|v| v.name.clone()).collect(),
                variable_init: o.initial_variables.iter().map(|v| v.initial).collect(),
                tile: o.tile.clone(),
            })
            .collect();
        let by_name: HashMap<String, ObjectId> =
            objects.iter().enumerate().map(|(i, o)| (o.name.clone(), i as ObjectId)).collect();
        let compiler = Compiler { doc, by_name: &by_name, objects: &objects };

        let n = objects.len();
        let mut actions = Vec::with_capacity(doc.actions.len());
        for action in &doc.actions {
            let mut table = vec![vec![Vec::new(); n + 1]; n];
            let mut rules = Vec::new();
            for b in &action.behaviours {
                let src = compiler.object(&b.src_object)?;
                let preconditions = compiler.conds(&b.preconditions, Scope::Object(src))?;
                let src_cmds = compiler.cmds(&b.src_commands, Scope::Object(src))?;
                for dst_name in &b.dst_objects {
                    let (dst_index, scope) = if dst_name == EMPTY_OBJECT {
                        (n, Scope::Global)
                    } else {
                        let id = compiler.object(dst_name)?;
                        (id as usize, Scope::Object(id))
                    };
                    table[src as usize][dst_index].push(rules.len() as u32);
                    rules.push(Rule {
                        preconditions: preconditions.clone(),
                        src: src_cmds.clone(),
                        dst: compiler.cmds(&b.dst_commands, scope)?,
                    });
                }
            }
            actions.push(CompiledAction { table, rules });
        }

        let avatar = match &doc.environment.avatar_object {
            Some(name) => Some(compiler.object(name)?),
            None => None,
        };
        let win = compiler.conds(&doc.environment.termination.win, Scope::Global)?;
        let lose = compiler.conds(&doc.environment.termination.lose, Scope::Global)?;
        let action_space = ActionSpace::build(doc);
        Ok(Self {
            player_variable_names: doc.environment.player_variables.iter().map(|v| v.name.clone()).collect(),
            player_variable_init: doc.environment.player_variables.iter().map(|v| v.initial).collect(),
            max_steps: doc.environment.max_steps,
            objects,
            by_name,
            avatar,
            actions,
            win,
            lose,
            action_space,
            document,
        })
    }

    pub fn document(&self) -> &Arc<GdyDocument> {
        &self.document
    }

    pub fn action_space(&self) -> &ActionSpace {
        &self.action_space
    }

    pub fn objects(&self) -> &[ObjectInfo] {
        &self.objects
    }

    pub fn object_id(&self, name: &str) -> Option<ObjectId> {
        self.by_name.get(name).copied()
    }

    pub fn avatar_object(&self) -> Option<ObjectId> {
        self.avatar
    }

    pub fn player_variable_names(&self) -> &[String] {
        &self.player_variable_names
    }
}
