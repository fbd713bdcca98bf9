//! In-memory object model of a GDY document and its consistency rules.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

/// Reserved object name matching a cell with no instances.
pub const EMPTY_OBJECT: &str = "_empty";

/// Reserved variable name for the episode step counter.
pub const STEPS_VARIABLE: &str = "_steps";

/// Maximum nesting depth of `if` commands.
pub const MAX_IF_DEPTH: usize = 8;

/// A validated GDY document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GdyDocument {
    pub environment: EnvironmentDef,
    pub actions: Vec<ActionDef>,
    pub objects: Vec<ObjectDef>,
    /// FNV-1a 64 of the canonical serialized text.
    pub source_hash: u64,
}

impl GdyDocument {
    pub fn object(&self, name: &str) -> Option<&ObjectDef> {
        self.objects.iter().find(|o| o.name == name)
    }

    pub fn object_index(&self, name: &str) -> Option<usize> {
        self.objects.iter().position(|o| o.name == name)
    }

    pub fn object_by_char(&self, c: char) -> Option<&ObjectDef> {
        self.objects.iter().find(|o| o.map_character == c)
    }

    pub fn action(&self, name: &str) -> Option<&ActionDef> {
        self.actions.iter().find(|a| a.name == name)
    }

    /// Recomputes `source_hash` from the canonical serialization.
    pub fn rehash(&mut self) {
        self.source_hash = crate::hash::fnv1a64(crate::emit::serialize_gdy(self).as_bytes());
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VariableDef {
    pub name: String,
    pub initial: i64,
}

impl VariableDef {
    pub fn new(name: impl Into<String>, initial: i64) -> Self {
        Self { name: name.into(), initial }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TileSpec {
    pub key: String,
    /// 16-way wall autotiling.
    pub autotile: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObjectDef {
    pub name: String,
    pub map_character: char,
    pub z: i32,
    pub initial_variables: Vec<VariableDef>,
    pub tile: TileSpec,
}

impl ObjectDef {
    pub fn new(name: impl Into<String>, map_character: char) -> Self {
        let name = name.into();
        Self {
            tile: TileSpec { key: name.clone(), autotile: false },
            name,
            map_character,
            z: 0,
            initial_variables: Vec::new(),
        }
    }

    pub fn with_z(mut self, z: i32) -> Self {
        self.z = z;
        self
    }

    pub fn variable(&self, name: &str) -> Option<usize> {
        self.initial_variables.iter().position(|v| v.name == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Left,
    Right,
    Down,
    Up,
}

impl Direction {
    /// Fixed input order of a directional action.
    pub const INPUT_ORDER: [Direction; 4] = [Direction::Left, Direction::Right, Direction::Down, Direction::Up];

    pub fn delta(self) -> (i32, i32) {
        match self {
            Direction::Left => (-1, 0),
            Direction::Right => (1, 0),
            Direction::Down => (0, 1),
            Direction::Up => (0, -1),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Left => "left",
            Direction::Right => "right",
            Direction::Down => "down",
            Direction::Up => "up",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Direction::Left => "Left",
            Direction::Right => "Right",
            Direction::Down => "Down",
            Direction::Up => "Up",
        }
    }

    /// Number of clockwise quarter turns from `Up` to `self`.
    pub fn quarter_turns(self) -> u8 {
        match self {
            Direction::Up => 0,
            Direction::Right => 1,
            Direction::Down => 2,
            Direction::Left => 3,
        }
    }

    pub fn from_quarter_turns(turns: u8) -> Self {
        match turns % 4 {
            0 => Direction::Up,
            1 => Direction::Right,
            2 => Direction::Down,
            _ => Direction::Left,
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InputMapping {
    /// Four inputs: left, right, down, up.
    Directional,
    /// One input aimed at the cell the actor faces.
    Unary { description: Option<String> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionDef {
    pub name: String,
    pub input_mapping: InputMapping,
    pub behaviours: Vec<Behaviour>,
}

impl ActionDef {
    pub fn input_count(&self) -> usize {
        match self.input_mapping {
            InputMapping::Directional => 4,
            InputMapping::Unary { .. } => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Behaviour {
    pub src_object: String,
    pub dst_objects: Vec<String>,
    pub preconditions: Vec<Condition>,
    pub src_commands: Vec<Command>,
    pub dst_commands: Vec<Command>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Operand {
    Literal(i64),
    /// Object variable, player variable or `_steps`.
    Variable(String),
    /// `<object>:count`
    Count(String),
}

impl Operand {
    /// Parses the textual operand forms `42`, `name` and `obj:count`.
    pub fn parse(text: &str) -> Operand {
        if let Ok(v) = text.trim().parse::<i64>() {
            return Operand::Literal(v);
        }
        match text.strip_suffix(":count") {
            Some(obj) => Operand::Count(obj.to_string()),
            None => Operand::Variable(text.to_string()),
        }
    }
}

impl fmt::Display for Operand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Operand::Literal(v) => write!(f, "{v}"),
            Operand::Variable(name) => f.write_str(name),
            Operand::Count(obj) => write!(f, "{obj}:count"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CompareOp {
    Eq,
    Neq,
    Lt,
    Lte,
    Gt,
    Gte,
}

impl CompareOp {
    pub const ALL: [CompareOp; 6] =
        [CompareOp::Eq, CompareOp::Neq, CompareOp::Lt, CompareOp::Lte, CompareOp::Gt, CompareOp::Gte];

    pub fn keyword(self) -> &'static str {
        match self {
            CompareOp::Eq => "eq",
            CompareOp::Neq => "neq",
            CompareOp::Lt => "lt",
            CompareOp::Lte => "lte",
            CompareOp::Gt => "gt",
            CompareOp::Gte => "gte",
        }
    }

    pub fn from_keyword(word: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|op| op.keyword() == word)
    }

    pub fn apply(self, lhs: i64, rhs: i64) -> bool {
        match self {
            CompareOp::Eq => lhs == rhs,
            CompareOp::Neq => lhs != rhs,
            CompareOp::Lt => lhs < rhs,
            CompareOp::Lte => lhs <= rhs,
            CompareOp::Gt => lhs > rhs,
            CompareOp::Gte => lhs >= rhs,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Condition {
    Compare { op: CompareOp, lhs: Operand, rhs: Operand },
    And(Vec<Condition>),
    Or(Vec<Condition>),
}

impl Condition {
    pub fn compare(op: CompareOp, lhs: Operand, rhs: Operand) -> Self {
        Condition::Compare { op, lhs, rhs }
    }

    fn operands<'a>(&'a self, out: &mut Vec<&'a Operand>) {
        match self {
            Condition::Compare { lhs, rhs, .. } => {
                out.push(lhs);
                out.push(rhs);
            }
            Condition::And(list) | Condition::Or(list) => {
                for c in list {
                    c.operands(out);
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ArithOp {
    Add,
    Sub,
    Set,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StepOp {
    Incr,
    Decr,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Command {
    /// `mov: _dest`
    Mov,
    /// `cascade: _dest`
    Cascade,
    Remove,
    Spawn(String),
    Arith {
        op: ArithOp,
        target: String,
        value: Operand,
    },
    Step {
        op: StepOp,
        target: String,
    },
    Reward(i64),
    If {
        conditions: Vec<Condition>,
        on_true: Vec<Command>,
        on_false: Vec<Command>,
    },
}

impl Command {
    pub fn keyword(&self) -> &'static str {
        match self {
            Command::Mov => "mov",
            Command::Cascade => "cascade",
            Command::Remove => "remove",
            Command::Spawn(_) => "spawn",
            Command::Arith { op: ArithOp::Add, .. } => "add",
            Command::Arith { op: ArithOp::Sub, .. } => "sub",
            Command::Arith { op: ArithOp::Set, .. } => "set",
            Command::Step { op: StepOp::Incr, .. } => "incr",
            Command::Step { op: StepOp::Decr, .. } => "decr",
            Command::Reward(_) => "reward",
            Command::If { .. } => "if",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Termination {
    /// Any satisfied entry ends the episode as a win.
    pub win: Vec<Condition>,
    /// Any satisfied entry ends the episode as a loss.
    pub lose: Vec<Condition>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObserverConfig {
    /// Partial-observation window (width, height) centred on the avatar.
    pub window: Option<(u32, u32)>,
    pub rotate_with_avatar: bool,
    pub include_orientation_channels: bool,
    pub include_player_variable_channels: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EnvironmentDef {
    pub name: String,
    /// Documents without an avatar can still be observed but not controlled.
    pub avatar_object: Option<String>,
    pub termination: Termination,
    pub max_steps: Option<u64>,
    pub player_variables: Vec<VariableDef>,
    pub observer_config: ObserverConfig,
    pub levels: Vec<String>,
}

impl EnvironmentDef {
    pub fn player_variable(&self, name: &str) -> Option<usize> {
        self.player_variables.iter().position(|v| v.name == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

/// Stable machine-readable diagnostic codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum DiagnosticCode {
    MissingField,
    InvalidValue,
    InvalidIdentifier,
    DuplicateObjectName,
    DuplicateMapCharacter,
    DuplicateActionName,
    DuplicateVariable,
    ReservedObjectName,
    InvalidMapCharacter,
    InvalidZ,
    UndeclaredObject,
    UndeclaredAvatar,
    UndeclaredVariable,
    ReadOnlyVariable,
    EmptySource,
    EmptyBehaviours,
    EmptyDestination,
    InvalidCondition,
    IfNestingTooDeep,
    InvalidMaxSteps,
    InvalidObserverWindow,
    UnknownLevelCharacter,
    EmptyLevel,
}

impl DiagnosticCode {
    pub fn as_str(self) -> String {
        serde_json::to_value(self).ok().and_then(|v| v.as_str().map(str::to_owned)).unwrap_or_default()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub code: DiagnosticCode,
    /// GDY path such as `Actions[0].Behaviours[2].Dst.Object`.
    pub path: String,
    pub message: String,
}

impl Diagnostic {
    pub fn error(code: DiagnosticCode, path: impl Into<String>, message: impl Into<String>) -> Self {
        Self { severity: Severity::Error, code, path: path.into(), message: message.into() }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {} ({})", self.path, self.message, self.code.as_str())
    }
}

/// Identifiers start with a letter or `_` and continue with letters, digits, `_` or `-`.
pub fn is_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
}

pub fn is_valid_map_character(c: char) -> bool {
    c != '.' && !c.is_control() && !c.is_whitespace()
}

/// Checks every document invariant and returns the violations in document order.
pub fn validate(doc: &GdyDocument) -> Vec<Diagnostic> {
    Validator::new(doc).run()
}

struct Validator<'a> {
    doc: &'a GdyDocument,
    objects: HashMap<&'a str, &'a ObjectDef>,
    out: Vec<Diagnostic>,
}

/// Which variables an `if`/command list may reference.
#[derive(Clone, Copy)]
enum Scope<'a> {
    Object(&'a ObjectDef),
    Empty,
    Global,
}

impl<'a> Validator<'a> {
    fn new(doc: &'a GdyDocument) -> Self {
        let mut objects = HashMap::new();
        for o in &doc.objects {
            objects.entry(o.name.as_str()).or_insert(o);
        }
        Self { doc, objects, out: Vec::new() }
    }

    fn push(&mut self, code: DiagnosticCode, path: String, message: String) {
        self.out.push(Diagnostic::error(code, path, message));
    }

    fn run(mut self) -> Vec<Diagnostic> {
        self.check_objects();
        self.check_environment();
        self.check_actions();
        self.check_levels();
        self.out
    }

    fn check_objects(&mut self) {
        let mut names = HashSet::new();
        let mut chars: HashMap<char, usize> = HashMap::new();
        for (i, o) in self.doc.objects.iter().enumerate() {
            let path = format!("Objects[{i}]");
            if o.name == EMPTY_OBJECT {
                self.push(
                    DiagnosticCode::ReservedObjectName,
                    format!("{path}.Name"),
                    format!("object name `{EMPTY_OBJECT}` is reserved"),
                );
            } else if !is_identifier(&o.name) {
                self.push(
                    DiagnosticCode::InvalidIdentifier,
                    format!("{path}.Name"),
                    format!("`{}` is not a valid object name", o.name),
                );
            }
            if !names.insert(o.name.as_str()) {
                self.push(
                    DiagnosticCode::DuplicateObjectName,
                    format!("{path}.Name"),
                    format!("object `{}` declared more than once", o.name),
                );
            }
            if !is_valid_map_character(o.map_character) {
                self.push(
                    DiagnosticCode::InvalidMapCharacter,
                    format!("{path}.MapCharacter"),
                    format!("map character {:?} is not allowed", o.map_character),
                );
            }
            if let Some(first) = chars.insert(o.map_character, i) {
                self.push(
                    DiagnosticCode::DuplicateMapCharacter,
                    format!("{path}.MapCharacter"),
                    format!("map character {:?} already used by `{}`", o.map_character, self.doc.objects[first].name),
                );
            }
            if o.z < 0 {
                self.push(DiagnosticCode::InvalidZ, format!("{path}.Z"), format!("Z must be >= 0, got {}", o.z));
            }
            self.check_variable_list(&o.initial_variables, &format!("{path}.Variables"));
        }
    }

    fn check_variable_list(&mut self, vars: &[VariableDef], path: &str) {
        let mut seen = HashSet::new();
        for (j, v) in vars.iter().enumerate() {
            if !is_identifier(&v.name) || v.name == STEPS_VARIABLE {
                self.push(
                    DiagnosticCode::InvalidIdentifier,
                    format!("{path}[{j}].Name"),
                    format!("`{}` is not a valid variable name", v.name),
                );
            }
            if !seen.insert(v.name.as_str()) {
                self.push(
                    DiagnosticCode::DuplicateVariable,
                    format!("{path}[{j}].Name"),
                    format!("variable `{}` declared more than once", v.name),
                );
            }
        }
    }

    fn check_environment(&mut self) {
        let env = &self.doc.environment;
        if let Some(avatar) = &env.avatar_object {
            if !self.objects.contains_key(avatar.as_str()) {
                self.push(
                    DiagnosticCode::UndeclaredAvatar,
                    "Environment.Player.AvatarObject".into(),
                    format!("avatar object `{avatar}` is not declared"),
                );
            }
        }
        if env.max_steps == Some(0) {
            self.push(
                DiagnosticCode::InvalidMaxSteps,
                "Environment.MaxSteps".into(),
                "MaxSteps must be at least 1".into(),
            );
        }
        if let Some((w, h)) = env.observer_config.window {
            if w == 0 || h == 0 {
                self.push(
                    DiagnosticCode::InvalidObserverWindow,
                    "Environment.Player.Observer".into(),
                    format!("observer window {w}x{h} must be at least 1x1"),
                );
            }
        }
        self.check_variable_list(&env.player_variables, "Environment.Variables");
        for (kind, list) in [("Win", &env.termination.win), ("Lose", &env.termination.lose)] {
            for (i, c) in list.iter().enumerate() {
                self.check_condition(c, Scope::Global, &format!("Environment.Termination.{kind}[{i}]"));
            }
        }
    }

    fn check_actions(&mut self) {
        let mut names = HashSet::new();
        for (ai, action) in self.doc.actions.iter().enumerate() {
            let path = format!("Actions[{ai}]");
            if !is_identifier(&action.name) {
                self.push(
                    DiagnosticCode::InvalidIdentifier,
                    format!("{path}.Name"),
                    format!("`{}` is not a valid action name", action.name),
                );
            }
            if !names.insert(action.name.as_str()) {
                self.push(
                    DiagnosticCode::DuplicateActionName,
                    format!("{path}.Name"),
                    format!("action `{}` declared more than once", action.name),
                );
            }
            if action.behaviours.is_empty() {
                self.push(
                    DiagnosticCode::EmptyBehaviours,
                    format!("{path}.Behaviours"),
                    "an action needs at least one behaviour".into(),
                );
            }
            for (bi, b) in action.behaviours.iter().enumerate() {
                self.check_behaviour(b, &format!("{path}.Behaviours[{bi}]"));
            }
        }
    }

    fn check_behaviour(&mut self, b: &'a Behaviour, path: &str) {
        let src = if b.src_object == EMPTY_OBJECT {
            self.push(
                DiagnosticCode::EmptySource,
                format!("{path}.Src.Object"),
                "a behaviour source must be a declared object".into(),
            );
            None
        } else {
            match self.objects.get(b.src_object.as_str()) {
                Some(o) => Some(*o),
                None => {
                    self.push(
                        DiagnosticCode::UndeclaredObject,
                        format!("{path}.Src.Object"),
                        format!("object `{}` is not declared", b.src_object),
                    );
                    None
                }
            }
        };
        let src_scope = src.map_or(Scope::Global, Scope::Object);

        if b.dst_objects.is_empty() {
            self.push(
                DiagnosticCode::EmptyDestination,
                format!("{path}.Dst.Object"),
                "a behaviour needs at least one destination object".into(),
            );
        }
        let mut dst_scopes = Vec::new();
        for (i, name) in b.dst_objects.iter().enumerate() {
            if name == EMPTY_OBJECT {
                dst_scopes.push(Scope::Empty);
                continue;
            }
            match self.objects.get(name.as_str()) {
                Some(o) => dst_scopes.push(Scope::Object(o)),
                None => {
                    let p = if b.dst_objects.len() == 1 {
                        format!("{path}.Dst.Object")
                    } else {
                        format!("{path}.Dst.Object[{i}]")
                    };
                    self.push(DiagnosticCode::UndeclaredObject, p, format!("object `{name}` is not declared"));
                }
            }
        }

        for (i, c) in b.preconditions.iter().enumerate() {
            self.check_condition(c, src_scope, &format!("{path}.Src.Preconditions[{i}]"));
        }
        self.check_commands(&b.src_commands, &[src_scope], &format!("{path}.Src.Commands"), 0);
        if !dst_scopes.is_empty() {
            self.check_commands(&b.dst_commands, &dst_scopes, &format!("{path}.Dst.Commands"), 0);
        }
    }

    fn check_commands(&mut self, cmds: &[Command], scopes: &[Scope<'a>], path: &str, depth: usize) {
        for (i, cmd) in cmds.iter().enumerate() {
            let p = format!("{path}[{i}].{}", cmd.keyword());
            match cmd {
                Command::Mov | Command::Cascade | Command::Remove | Command::Reward(_) => {}
                Command::Spawn(name) => {
                    if !self.objects.contains_key(name.as_str()) {
                        self.push(DiagnosticCode::UndeclaredObject, p, format!("object `{name}` is not declared"));
                    }
                }
                Command::Arith { target, value, .. } => {
                    for scope in scopes {
                        self.check_target(target, *scope, &p);
                        self.check_operand(value, *scope, &p);
                    }
                }
                Command::Step { target, .. } => {
                    for scope in scopes {
                        self.check_target(target, *scope, &p);
                    }
                }
                Command::If { conditions, on_true, on_false } => {
                    if depth + 1 > MAX_IF_DEPTH {
                        self.push(
                            DiagnosticCode::IfNestingTooDeep,
                            p.clone(),
                            format!("`if` nesting deeper than {MAX_IF_DEPTH}"),
                        );
                        continue;
                    }
                    for scope in scopes {
                        for (ci, c) in conditions.iter().enumerate() {
                            self.check_condition(c, *scope, &format!("{p}.Conditions[{ci}]"));
                        }
                    }
                    self.check_commands(on_true, scopes, &format!("{p}.OnTrue"), depth + 1);
                    self.check_commands(on_false, scopes, &format!("{p}.OnFalse"), depth + 1);
                }
            }
        }
    }

    fn check_condition(&mut self, cond: &Condition, scope: Scope<'a>, path: &str) {
        match cond {
            Condition::And(list) | Condition::Or(list) if list.is_empty() => {
                self.push(DiagnosticCode::InvalidCondition, path.into(), "empty and/or list".into());
            }
            _ => {}
        }
        let mut ops = Vec::new();
        cond.operands(&mut ops);
        // one report per distinct operand
        let mut seen = BTreeSet::new();
        for op in ops {
            if seen.insert(op.to_string()) {
                self.check_operand(op, scope, path);
            }
        }
    }

    fn resolves(&self, name: &str, scope: Scope<'a>) -> bool {
        if let Scope::Object(o) = scope {
            if o.variable(name).is_some() {
                return true;
            }
        }
        self.doc.environment.player_variable(name).is_some()
    }

    fn check_target(&mut self, name: &str, scope: Scope<'a>, path: &str) {
        if name == STEPS_VARIABLE || name.ends_with(":count") {
            self.push(DiagnosticCode::ReadOnlyVariable, path.into(), format!("`{name}` is read-only"));
        } else if !self.resolves(name, scope) {
            self.push(DiagnosticCode::UndeclaredVariable, path.into(), format!("variable `{name}` is not declared"));
        }
    }

    fn check_operand(&mut self, op: &Operand, scope: Scope<'a>, path: &str) {
        match op {
            Operand::Literal(_) => {}
            Operand::Count(obj) => {
                if !self.objects.contains_key(obj.as_str()) {
                    self.push(DiagnosticCode::UndeclaredObject, path.into(), format!("object `{obj}` is not declared"));
                }
            }
            Operand::Variable(name) => {
                if name != STEPS_VARIABLE && !self.resolves(name, scope) {
                    self.push(
                        DiagnosticCode::UndeclaredVariable,
                        path.into(),
                        format!("variable `{name}` is not declared"),
                    );
                }
            }
        }
    }

    fn check_levels(&mut self) {
        let chars: HashSet<char> = self.doc.objects.iter().map(|o| o.map_character).collect();
        for (li, level) in self.doc.environment.levels.iter().enumerate() {
            let path = format!("Environment.Levels[{li}]");
            if crate::level::level_rows(level).is_empty() {
                self.push(DiagnosticCode::EmptyLevel, path.clone(), "level has no rows".into());
                continue;
            }
            for (y, row) in crate::level::level_rows(level).iter().enumerate() {
                if let Some((x, c)) = row.chars().enumerate().find(|(_, c)| *c != '.' && !chars.contains(c)) {
                    self.push(
                        DiagnosticCode::UnknownLevelCharacter,
                        path.clone(),
                        format!("character {c:?} at ({x}, {y}) has no object"),
                    );
                    break;
                }
            }
        }
    }
}
