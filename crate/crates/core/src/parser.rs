//! GDY text to [`GdyDocument`].

use thiserror::Error;

use crate::model::{
    validate, ActionDef, ArithOp, Behaviour, Command, CompareOp, Condition, Diagnostic, DiagnosticCode, EnvironmentDef,
    GdyDocument, InputMapping, ObjectDef, ObserverConfig, Operand, StepOp, Termination, TileSpec, VariableDef,
    MAX_IF_DEPTH,
};
use crate::yaml::{self, Node};

/// Nesting cap for conditions; deeper input is reported instead of recursed into.
const MAX_CONDITION_DEPTH: usize = 32;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GdyError {
    #[error("syntax error at line {line}, column {col}: {message}")]
    Syntax { line: usize, col: usize, message: String },
    #[error("invalid GDY document ({} problem(s)): {}", .0.len(), .0.first().map(|d| d.to_string()).unwrap_or_default())]
    Schema(Vec<Diagnostic>),
}

impl GdyError {
    pub fn diagnostics(&self) -> &[Diagnostic] {
        match self {
            GdyError::Schema(d) => d,
            GdyError::Syntax { .. } => &[],
        }
    }
}

/// Parses arbitrary bytes; invalid UTF-8 is a syntax error.
pub fn parse_gdy_bytes(bytes: &[u8]) -> Result<GdyDocument, GdyError> {
    match std::str::from_utf8(bytes) {
        Ok(text) => parse_gdy(text),
        Err(e) => Err(GdyError::Syntax { line: 0, col: 0, message: format!("invalid UTF-8: {e}") }),
    }
}

/// Parses and validates a GDY document.
pub fn parse_gdy(text: &str) -> Result<GdyDocument, GdyError> {
    let root = yaml::parse(text).map_err(|e| GdyError::Syntax { line: e.line, col: e.col, message: e.message })?;
    let mut ctx = Ctx::default();
    let doc = match root {
        Some(node) => ctx.document(&node),
        None => {
            ctx.missing("", "Environment");
            None
        }
    };
    if !ctx.diags.is_empty() {
        return Err(GdyError::Schema(ctx.diags));
    }
    let mut doc = doc.ok_or_else(|| GdyError::Schema(Vec::new()))?;
    let diags = validate(&doc);
    if !diags.is_empty() {
        return Err(GdyError::Schema(diags));
    }
    doc.rehash();
    Ok(doc)
}

#[derive(Default)]
struct Ctx {
    diags: Vec<Diagnostic>,
}

fn join(path: &str, key: &str) -> String {
    if path.is_empty() {
        key.to_string()
    } else {
        format!("{path}.{key}")
    }
}

fn items(node: &Node) -> Option<&[Node]> {
    match node {
        Node::Seq { items, .. } => Some(items),
        _ => None,
    }
}

impl Ctx {
    fn err(&mut self, code: DiagnosticCode, path: impl Into<String>, message: impl Into<String>) {
        self.diags.push(Diagnostic::error(code, path, message));
    }

    fn missing(&mut self, path: &str, key: &str) {
        self.err(DiagnosticCode::MissingField, join(path, key), format!("missing required field `{key}`"));
    }

    fn expect_map<'n>(&mut self, node: &'n Node, path: &str) -> Option<&'n Node> {
        match node {
            Node::Map { .. } => Some(node),
            other => {
                self.err(DiagnosticCode::InvalidValue, path, format!("expected a mapping, found a {}", other.kind()));
                None
            }
        }
    }

    fn expect_seq<'n>(&mut self, node: &'n Node, path: &str) -> Option<&'n [Node]> {
        if node.is_null() {
            return Some(&[]);
        }
        match items(node) {
            Some(items) => Some(items),
            None => {
                self.err(DiagnosticCode::InvalidValue, path, format!("expected a sequence, found a {}", node.kind()));
                None
            }
        }
    }

    fn string(&mut self, node: &Node, path: &str) -> Option<String> {
        match node.as_str() {
            Some(s) => Some(s.to_string()),
            None => {
                self.err(DiagnosticCode::InvalidValue, path, format!("expected a scalar, found a {}", node.kind()));
                None
            }
        }
    }

    fn int(&mut self, node: &Node, path: &str) -> Option<i64> {
        let parsed = node.as_int().or_else(|| node.as_str().and_then(|s| s.trim().parse().ok()));
        if parsed.is_none() {
            self.err(DiagnosticCode::InvalidValue, path, "expected an integer");
        }
        parsed
    }

    fn bool(&mut self, node: &Node, path: &str) -> Option<bool> {
        let parsed = node.as_bool();
        if parsed.is_none() {
            self.err(DiagnosticCode::InvalidValue, path, "expected a boolean");
        }
        parsed
    }

    fn required<'n>(&mut self, map: &'n Node, path: &str, key: &str) -> Option<&'n Node> {
        let found = map.get(key).filter(|n| !n.is_null());
        if found.is_none() {
            self.missing(path, key);
        }
        found
    }

    fn document(&mut self, root: &Node) -> Option<GdyDocument> {
        let root = self.expect_map(root, "")?;
        let environment = match self.required(root, "", "Environment") {
            Some(env) => self.environment(env, "Environment"),
            None => None,
        };
        let objects = match self.required(root, "", "Objects") {
            Some(node) => self.list(node, "Objects", Self::object),
            None => None,
        };
        let actions = match root.get("Actions") {
            Some(node) => self.list(node, "Actions", Self::action),
            None => Some(Vec::new()),
        };
        Some(GdyDocument { environment: environment?, actions: actions?, objects: objects?, source_hash: 0 })
    }

    fn list<T>(
        &mut self,
        node: &Node,
        path: &str,
        mut f: impl FnMut(&mut Self, &Node, &str) -> Option<T>,
    ) -> Option<Vec<T>> {
        let seq = self.expect_seq(node, path)?;
        let mut out = Vec::with_capacity(seq.len());
        let mut ok = true;
        for (i, item) in seq.iter().enumerate() {
            match f(self, item, &format!("{path}[{i}]")) {
                Some(v) => out.push(v),
                None => ok = false,
            }
        }
        ok.then_some(out)
    }

    fn variables(&mut self, node: &Node, path: &str) -> Option<Vec<VariableDef>> {
        self.list(node, path, |ctx, item, p| {
            let item = ctx.expect_map(item, p)?;
            let name = ctx.required(item, p, "Name").and_then(|n| ctx.string(n, &join(p, "Name")));
            let initial = match item.get("InitialValue").filter(|n| !n.is_null()) {
                Some(v) => ctx.int(v, &join(p, "InitialValue")),
                None => Some(0),
            };
            Some(VariableDef { name: name?, initial: initial? })
        })
    }

    fn object(&mut self, node: &Node, path: &str) -> Option<ObjectDef> {
        let node = self.expect_map(node, path)?;
        let name = self.required(node, path, "Name").and_then(|n| self.string(n, &join(path, "Name")));
        let map_character = match self.required(node, path, "MapCharacter") {
            Some(n) => {
                let p = join(path, "MapCharacter");
                let text = self.string(n, &p);
                text.and_then(|t| {
                    let mut chars = t.chars();
                    match (chars.next(), chars.next()) {
                        (Some(c), None) => Some(c),
                        _ => {
                            self.err(
                                DiagnosticCode::InvalidMapCharacter,
                                p,
                                format!("`{t}` is not a single character"),
                            );
                            None
                        }
                    }
                })
            }
            None => None,
        };
        let z = match node.get("Z").filter(|n| !n.is_null()) {
            Some(n) => {
                let p = join(path, "Z");
                self.int(n, &p).and_then(|v| match i32::try_from(v) {
                    Ok(z) => Some(z),
                    Err(_) => {
                        self.err(DiagnosticCode::InvalidZ, p, format!("Z {v} is out of range"));
                        None
                    }
                })
            }
            None => Some(0),
        };
        let initial_variables = match node.get("Variables") {
            Some(n) => self.variables(n, &join(path, "Variables")),
            None => Some(Vec::new()),
        };
        let tile_key = match node.get("Tile").filter(|n| !n.is_null()) {
            Some(n) => self.string(n, &join(path, "Tile")),
            None => None,
        };
        // Sprite2D may sit under Observers or, as in some hand-indented files, beside it.
        let sprite = node.get("Observers").and_then(|o| o.get("Sprite2D")).or_else(|| node.get("Sprite2D"));
        let autotile =
            sprite.and_then(|s| s.get("TilingMode")).and_then(Node::as_str).is_some_and(|mode| mode == "WALL_16");
        let name = name?;
        Some(ObjectDef {
            tile: TileSpec { key: tile_key.unwrap_or_else(|| name.clone()), autotile },
            name,
            map_character: map_character?,
            z: z?,
            initial_variables: initial_variables?,
        })
    }

    fn action(&mut self, node: &Node, path: &str) -> Option<ActionDef> {
        let node = self.expect_map(node, path)?;
        let name = self.required(node, path, "Name").and_then(|n| self.string(n, &join(path, "Name")));
        let input_mapping = match node.get("InputMapping").filter(|n| !n.is_null()) {
            Some(n) => self.input_mapping(n, &join(path, "InputMapping")),
            None => Some(InputMapping::Directional),
        };
        let behaviours = match self.required(node, path, "Behaviours") {
            Some(n) => self.list(n, &join(path, "Behaviours"), Self::behaviour),
            None => None,
        };
        Some(ActionDef { name: name?, input_mapping: input_mapping?, behaviours: behaviours? })
    }

    fn input_mapping(&mut self, node: &Node, path: &str) -> Option<InputMapping> {
        let (kind, description) = match node {
            Node::Scalar { value, .. } => (value.clone(), None),
            Node::Map { .. } => {
                let kind = self.required(node, path, "Type").and_then(|n| self.string(n, &join(path, "Type")))?;
                let description = match node.get("Description").filter(|n| !n.is_null()) {
                    Some(n) => Some(self.string(n, &join(path, "Description"))?),
                    None => None,
                };
                (kind, description)
            }
            Node::Seq { .. } => {
                self.err(DiagnosticCode::InvalidValue, path, "expected `Directional`, `Unary` or a mapping");
                return None;
            }
        };
        match kind.as_str() {
            "Directional" if description.is_none() => Some(InputMapping::Directional),
            "Unary" => Some(InputMapping::Unary { description }),
            _ => {
                self.err(DiagnosticCode::InvalidValue, path, format!("unsupported input mapping `{kind}`"));
                None
            }
        }
    }

    fn behaviour(&mut self, node: &Node, path: &str) -> Option<Behaviour> {
        let node = self.expect_map(node, path)?;
        let src_path = join(path, "Src");
        let dst_path = join(path, "Dst");
        let src = self.required(node, path, "Src").and_then(|n| self.expect_map(n, &src_path));
        let dst = self.required(node, path, "Dst").and_then(|n| self.expect_map(n, &dst_path));
        let (src, dst) = (src?, dst?);

        let src_object = self.required(src, &src_path, "Object").and_then(|n| {
            let p = join(&src_path, "Object");
            if items(n).is_some() {
                self.err(DiagnosticCode::InvalidValue, p, "Src.Object must name a single object");
                return None;
            }
            self.string(n, &p)
        });
        let preconditions = match src.get("Preconditions") {
            Some(n) => self.list(n, &join(&src_path, "Preconditions"), |ctx, item, p| ctx.condition_entry(item, p)),
            None => Some(Vec::new()),
        };
        let src_commands = match src.get("Commands") {
            Some(n) => self.commands(n, &join(&src_path, "Commands"), 0),
            None => Some(Vec::new()),
        };

        let dst_objects = self.required(dst, &dst_path, "Object").and_then(|n| {
            let p = join(&dst_path, "Object");
            match items(n) {
                Some(list) => {
                    let mut out = Vec::new();
                    for (i, item) in list.iter().enumerate() {
                        out.push(self.string(item, &format!("{p}[{i}]"))?);
                    }
                    Some(out)
                }
                None => self.string(n, &p).map(|s| vec![s]),
            }
        });
        let dst_commands = match dst.get("Commands") {
            Some(n) => self.commands(n, &join(&dst_path, "Commands"), 0),
            None => Some(Vec::new()),
        };
        Some(Behaviour {
            src_object: src_object?,
            dst_objects: dst_objects?,
            preconditions: preconditions?,
            src_commands: src_commands?,
            dst_commands: dst_commands?,
        })
    }

    fn commands(&mut self, node: &Node, path: &str, depth: usize) -> Option<Vec<Command>> {
        self.list(node, path, |ctx, item, p| ctx.command(item, p, depth))
    }

    fn command(&mut self, node: &Node, path: &str, depth: usize) -> Option<Command> {
        let (key, value) = match node {
            Node::Map { entries, .. } if entries.len() == 1 => (entries[0].0.as_str(), &entries[0].1),
            _ => {
                self.err(DiagnosticCode::InvalidValue, path, "a command is a mapping with exactly one key");
                return None;
            }
        };
        let p = join(path, key);
        match key {
            "mov" | "cascade" => {
                if value.as_str() != Some("_dest") {
                    self.err(DiagnosticCode::InvalidValue, p, format!("`{key}` only supports `_dest`"));
                    return None;
                }
                Some(if key == "mov" { Command::Mov } else { Command::Cascade })
            }
            "remove" => match value.as_bool() {
                Some(true) => Some(Command::Remove),
                _ => {
                    self.err(DiagnosticCode::InvalidValue, p, "`remove` expects `true`");
                    None
                }
            },
            "spawn" => self.string(value, &p).map(Command::Spawn),
            "reward" => self.int(value, &p).map(Command::Reward),
            "add" | "sub" | "set" => {
                let op = match key {
                    "add" => ArithOp::Add,
                    "sub" => ArithOp::Sub,
                    _ => ArithOp::Set,
                };
                let pair = match items(value) {
                    Some([target, operand]) => Some((target, operand)),
                    _ => None,
                };
                let Some((target, operand)) = pair else {
                    self.err(DiagnosticCode::InvalidValue, p, format!("`{key}` expects [variable, value]"));
                    return None;
                };
                let target = self.string(target, &p)?;
                let value = self.operand(operand, &p)?;
                Some(Command::Arith { op, target, value })
            }
            "incr" | "decr" => {
                let op = if key == "incr" { StepOp::Incr } else { StepOp::Decr };
                let target = match items(value) {
                    Some([single]) => self.string(single, &p),
                    Some(_) => {
                        self.err(DiagnosticCode::InvalidValue, p.clone(), format!("`{key}` expects one variable"));
                        None
                    }
                    None => self.string(value, &p),
                }?;
                Some(Command::Step { op, target })
            }
            "if" => {
                if depth >= MAX_IF_DEPTH {
                    self.err(DiagnosticCode::IfNestingTooDeep, p, format!("`if` nesting deeper than {MAX_IF_DEPTH}"));
                    return None;
                }
                let body = self.expect_map(value, &p)?;
                let conditions = match self.required(body, &p, "Conditions") {
                    Some(n) => self.condition_block(n, &join(&p, "Conditions")),
                    None => None,
                };
                let on_true = match body.get("OnTrue") {
                    Some(n) => self.commands(n, &join(&p, "OnTrue"), depth + 1),
                    None => Some(Vec::new()),
                };
                let on_false = match body.get("OnFalse") {
                    Some(n) => self.commands(n, &join(&p, "OnFalse"), depth + 1),
                    None => Some(Vec::new()),
                };
                Some(Command::If { conditions: conditions?, on_true: on_true?, on_false: on_false? })
            }
            other => {
                self.err(DiagnosticCode::InvalidValue, path, format!("unknown command `{other}`"));
                None
            }
        }
    }

    fn operand(&mut self, node: &Node, path: &str) -> Option<Operand> {
        if let Some(v) = node.as_int() {
            return Some(Operand::Literal(v));
        }
        self.string(node, path).map(|s| Operand::parse(&s))
    }

    /// `Conditions:` of an `if`: a mapping of comparisons or a list of them; all must hold.
    fn condition_block(&mut self, node: &Node, path: &str) -> Option<Vec<Condition>> {
        match node {
            Node::Seq { items, .. } => {
                let mut out = Vec::new();
                let mut ok = true;
                for (i, item) in items.iter().enumerate() {
                    match self.condition_map(item, &format!("{path}[{i}]"), 0) {
                        Some(mut c) => out.append(&mut c),
                        None => ok = false,
                    }
                }
                ok.then_some(out)
            }
            _ => self.condition_map(node, path, 0),
        }
    }

    /// One list entry (termination or precondition); several keys combine with `and`.
    fn condition_entry(&mut self, node: &Node, path: &str) -> Option<Condition> {
        let mut conds = self.condition_map(node, path, 0)?;
        Some(if conds.len() == 1 { conds.remove(0) } else { Condition::And(conds) })
    }

    fn condition_map(&mut self, node: &Node, path: &str, depth: usize) -> Option<Vec<Condition>> {
        if depth > MAX_CONDITION_DEPTH {
            self.err(DiagnosticCode::InvalidCondition, path, "conditions are nested too deeply");
            return None;
        }
        let Node::Map { entries, .. } = node else {
            self.err(
                DiagnosticCode::InvalidCondition,
                path,
                format!("expected a condition mapping, found a {}", node.kind()),
            );
            return None;
        };
        if entries.is_empty() {
            self.err(DiagnosticCode::InvalidCondition, path, "empty condition");
            return None;
        }
        let mut out = Vec::new();
        for (key, value) in entries {
            let p = join(path, key);
            let cond = match key.as_str() {
                "and" | "or" => {
                    let list = match items(value) {
                        Some(list) => list,
                        None => {
                            self.err(
                                DiagnosticCode::InvalidCondition,
                                p,
                                format!("`{key}` expects a list of conditions"),
                            );
                            return None;
                        }
                    };
                    let mut subs = Vec::new();
                    for (i, item) in list.iter().enumerate() {
                        let mut c = self.condition_map(item, &format!("{p}[{i}]"), depth + 1)?;
                        if c.len() == 1 {
                            subs.push(c.remove(0));
                        } else {
                            subs.push(Condition::And(c));
                        }
                    }
                    if key == "and" {
                        Condition::And(subs)
                    } else {
                        Condition::Or(subs)
                    }
                }
                word => {
                    let Some(op) = CompareOp::from_keyword(word) else {
                        self.err(DiagnosticCode::InvalidCondition, p, format!("unknown condition `{word}`"));
                        return None;
                    };
                    let Some([lhs, rhs]) = items(value) else {
                        self.err(DiagnosticCode::InvalidCondition, p, format!("`{word}` takes exactly 2 operands"));
                        return None;
                    };
                    let lhs = self.operand(lhs, &p)?;
                    let rhs = self.operand(rhs, &p)?;
                    Condition::Compare { op, lhs, rhs }
                }
            };
            out.push(cond);
        }
        Some(out)
    }

    fn environment(&mut self, node: &Node, path: &str) -> Option<EnvironmentDef> {
        let node = self.expect_map(node, path)?;
        let name = match node.get("Name").filter(|n| !n.is_null()) {
            Some(n) => self.string(n, &join(path, "Name")),
            None => Some(String::new()),
        };
        let mut avatar_object = Some(None);
        let mut observer_config = Some(ObserverConfig::default());
        if let Some(player) = node.get("Player").filter(|n| !n.is_null()) {
            let pp = join(path, "Player");
            if let Some(player) = self.expect_map(player, &pp) {
                if let Some(a) = player.get("AvatarObject").filter(|n| !n.is_null()) {
                    avatar_object = self.string(a, &join(&pp, "AvatarObject")).map(Some);
                }
                if let Some(obs) = player.get("Observer").filter(|n| !n.is_null()) {
                    observer_config = self.observer(obs, &join(&pp, "Observer"));
                }
            } else {
                avatar_object = None;
            }
        }
        let termination = match node.get("Termination").filter(|n| !n.is_null()) {
            Some(t) => self.termination(t, &join(path, "Termination")),
            None => Some(Termination::default()),
        };
        let max_steps = match node.get("MaxSteps").filter(|n| !n.is_null()) {
            Some(n) => {
                let p = join(path, "MaxSteps");
                self.int(n, &p).and_then(|v| match u64::try_from(v) {
                    Ok(v) => Some(Some(v)),
                    Err(_) => {
                        self.err(DiagnosticCode::InvalidMaxSteps, p, "MaxSteps must be at least 1");
                        None
                    }
                })
            }
            None => Some(None),
        };
        let player_variables = match node.get("Variables") {
            Some(n) => self.variables(n, &join(path, "Variables")),
            None => Some(Vec::new()),
        };
        let levels = match node.get("Levels") {
            Some(n) => self.list(n, &join(path, "Levels"), |ctx, item, p| ctx.string(item, p)),
            None => Some(Vec::new()),
        };
        Some(EnvironmentDef {
            name: name?,
            avatar_object: avatar_object?,
            termination: termination?,
            max_steps: max_steps?,
            player_variables: player_variables?,
            observer_config: observer_config?,
            levels: levels?.into_iter().map(|l| crate::level::level_rows(&l).join("\n")).collect(),
        })
    }

    fn termination(&mut self, node: &Node, path: &str) -> Option<Termination> {
        let node = self.expect_map(node, path)?;
        let mut lists = [Some(Vec::new()), Some(Vec::new())];
        for (slot, key) in lists.iter_mut().zip(["Win", "Lose"]) {
            if let Some(n) = node.get(key) {
                *slot = self.list(n, &join(path, key), |ctx, item, p| ctx.condition_entry(item, p));
            }
        }
        let [win, lose] = lists;
        Some(Termination { win: win?, lose: lose? })
    }

    fn observer(&mut self, node: &Node, path: &str) -> Option<ObserverConfig> {
        let node = self.expect_map(node, path)?;
        let dim = |key: &str, ctx: &mut Self| -> Option<Option<u32>> {
            match node.get(key).filter(|n| !n.is_null()) {
                Some(n) => {
                    let p = join(path, key);
                    let v = ctx.int(n, &p)?;
                    match u32::try_from(v) {
                        Ok(v) => Some(Some(v)),
                        Err(_) => {
                            ctx.err(DiagnosticCode::InvalidObserverWindow, p, format!("{key} must be positive"));
                            None
                        }
                    }
                }
                None => Some(None),
            }
        };
        let width = dim("Width", self);
        let height = dim("Height", self);
        let window = match (width?, height?) {
            (Some(w), Some(h)) => Some((w, h)),
            (None, None) => None,
            _ => {
                self.err(DiagnosticCode::InvalidObserverWindow, path, "Width and Height must be given together");
                return None;
            }
        };
        let flag = |key: &str, ctx: &mut Self| -> Option<bool> {
            match node.get(key).filter(|n| !n.is_null()) {
                Some(n) => ctx.bool(n, &join(path, key)),
                None => Some(false),
            }
        };
        let rotate = flag("RotateWithAvatar", self);
        let orientation = flag("IncludeOrientation", self);
        let variables = flag("IncludeVariables", self);
        Some(ObserverConfig {
            window,
            rotate_with_avatar: rotate?,
            include_orientation_channels: orientation?,
            include_player_variable_channels: variables?,
        })
    }
}
