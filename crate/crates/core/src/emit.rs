//! Canonical GDY serialization: mapping keys sorted, declaration order kept for lists.

use crate::model::{
    ActionDef, ArithOp, Behaviour, Command, Condition, EnvironmentDef, GdyDocument, InputMapping, ObjectDef,
    ObserverConfig, Operand, StepOp, VariableDef,
};

enum Y {
    Str(String),
    Int(i64),
    Bool(bool),
    /// Literal block scalar (`|-`).
    Block(String),
    /// Flow sequence of scalars.
    Flow(Vec<Y>),
    Seq(Vec<Y>),
    Map(Vec<(&'static str, Y)>),
}

fn s(text: &str) -> Y {
    Y::Str(text.to_string())
}

fn plain_ok(text: &str) -> bool {
    const KEYWORDS: [&str; 9] = ["true", "false", "yes", "no", "on", "off", "null", "y", "n"];
    crate::model::is_identifier(text) && !KEYWORDS.contains(&text.to_ascii_lowercase().as_str())
}

fn scalar(out: &mut String, y: &Y) {
    match y {
        Y::Str(t) if plain_ok(t) => out.push_str(t),
        Y::Str(t) => out.push_str(&serde_json::to_string(t).unwrap_or_default()),
        Y::Int(v) => out.push_str(&v.to_string()),
        Y::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Y::Flow(items) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                scalar(out, item);
            }
            out.push(']');
        }
        Y::Block(_) | Y::Seq(_) | Y::Map(_) => unreachable!("not a scalar"),
    }
}

fn newline(out: &mut String, indent: usize) {
    out.push('\n');
    out.extend(std::iter::repeat_n(' ', indent));
}

fn write_map(out: &mut String, entries: &mut [(&'static str, Y)], indent: usize, first_inline: bool) {
    entries.sort_by_key(|(k, _)| *k);
    for (i, (key, value)) in entries.iter_mut().enumerate() {
        if i > 0 || !first_inline {
            newline(out, indent);
        }
        out.push_str(key);
        out.push(':');
        write_value(out, value, indent);
    }
}

fn write_value(out: &mut String, value: &mut Y, indent: usize) {
    match value {
        Y::Seq(items) if items.is_empty() => out.push_str(" []"),
        Y::Map(entries) if entries.is_empty() => out.push_str(" {}"),
        Y::Block(text) => {
            out.push_str(" |-");
            for row in text.split('\n') {
                if row.is_empty() {
                    out.push('\n');
                } else {
                    newline(out, indent + 2);
                    out.push_str(row);
                }
            }
        }
        Y::Seq(items) => {
            for item in items.iter_mut() {
                newline(out, indent + 2);
                out.push('-');
                match item {
                    Y::Map(entries) if !entries.is_empty() => {
                        out.push(' ');
                        write_map(out, entries, indent + 4, true);
                    }
                    other => write_value(out, other, indent + 2),
                }
            }
        }
        Y::Map(entries) => write_map(out, entries, indent + 2, false),
        other => {
            out.push(' ');
            scalar(out, other);
        }
    }
}

fn operand(op: &Operand) -> Y {
    match op {
        Operand::Literal(v) => Y::Int(*v),
        Operand::Variable(name) => s(name),
        Operand::Count(obj) => Y::Str(format!("{obj}:count")),
    }
}

fn condition(c: &Condition) -> Y {
    match c {
        Condition::Compare { op, lhs, rhs } => Y::Map(vec![(op.keyword(), Y::Flow(vec![operand(lhs), operand(rhs)]))]),
        Condition::And(list) => Y::Map(vec![("and", Y::Seq(list.iter().map(condition).collect()))]),
        Condition::Or(list) => Y::Map(vec![("or", Y::Seq(list.iter().map(condition).collect()))]),
    }
}

fn command(c: &Command) -> Y {
    let entry = match c {
        Command::Mov => ("mov", s("_dest")),
        Command::Cascade => ("cascade", s("_dest")),
        Command::Remove => ("remove", Y::Bool(true)),
        Command::Spawn(obj) => ("spawn", s(obj)),
        Command::Reward(v) => ("reward", Y::Int(*v)),
        Command::Arith { op, target, value } => {
            let key = match op {
                ArithOp::Add => "add",
                ArithOp::Sub => "sub",
                ArithOp::Set => "set",
            };
            (key, Y::Flow(vec![s(target), operand(value)]))
        }
        Command::Step { op, target } => (if *op == StepOp::Incr { "incr" } else { "decr" }, s(target)),
        Command::If { conditions, on_true, on_false } => (
            "if",
            Y::Map(vec![
                ("Conditions", Y::Seq(conditions.iter().map(condition).collect())),
                ("OnTrue", commands(on_true)),
                ("OnFalse", commands(on_false)),
            ]),
        ),
    };
    Y::Map(vec![entry])
}

fn commands(list: &[Command]) -> Y {
    Y::Seq(list.iter().map(command).collect())
}

fn variables(vars: &[VariableDef]) -> Y {
    Y::Seq(vars.iter().map(|v| Y::Map(vec![("Name", s(&v.name)), ("InitialValue", Y::Int(v.initial))])).collect())
}

fn behaviour(b: &Behaviour) -> Y {
    let mut src = vec![("Object", s(&b.src_object))];
    if !b.preconditions.is_empty() {
        src.push(("Preconditions", Y::Seq(b.preconditions.iter().map(condition).collect())));
    }
    if !b.src_commands.is_empty() {
        src.push(("Commands", commands(&b.src_commands)));
    }
    let object = match b.dst_objects.as_slice() {
        [single] => s(single),
        many => Y::Flow(many.iter().map(|o| s(o)).collect()),
    };
    let mut dst = vec![("Object", object)];
    if !b.dst_commands.is_empty() {
        dst.push(("Commands", commands(&b.dst_commands)));
    }
    Y::Map(vec![("Src", Y::Map(src)), ("Dst", Y::Map(dst))])
}

fn action(a: &ActionDef) -> Y {
    let mapping = match &a.input_mapping {
        InputMapping::Directional => s("Directional"),
        InputMapping::Unary { description: None } => s("Unary"),
        InputMapping::Unary { description: Some(d) } => Y::Map(vec![("Type", s("Unary")), ("Description", s(d))]),
    };
    Y::Map(vec![
        ("Name", s(&a.name)),
        ("InputMapping", mapping),
        ("Behaviours", Y::Seq(a.behaviours.iter().map(behaviour).collect())),
    ])
}

fn object(o: &ObjectDef) -> Y {
    let mut entries = vec![
        ("Name", s(&o.name)),
        ("MapCharacter", Y::Str(o.map_character.to_string())),
        ("Z", Y::Int(i64::from(o.z))),
    ];
    if !o.initial_variables.is_empty() {
        entries.push(("Variables", variables(&o.initial_variables)));
    }
    if o.tile.key != o.name {
        entries.push(("Tile", s(&o.tile.key)));
    }
    if o.tile.autotile {
        entries.push(("Observers", Y::Map(vec![("Sprite2D", Y::Map(vec![("TilingMode", s("WALL_16"))]))])));
    }
    Y::Map(entries)
}

fn observer(cfg: &ObserverConfig) -> Y {
    let mut entries = Vec::new();
    if let Some((w, h)) = cfg.window {
        entries.push(("Width", Y::Int(i64::from(w))));
        entries.push(("Height", Y::Int(i64::from(h))));
    }
    entries.push(("RotateWithAvatar", Y::Bool(cfg.rotate_with_avatar)));
    entries.push(("IncludeOrientation", Y::Bool(cfg.include_orientation_channels)));
    entries.push(("IncludeVariables", Y::Bool(cfg.include_player_variable_channels)));
    Y::Map(entries)
}

fn environment(env: &EnvironmentDef) -> Y {
    let mut entries = vec![("Name", s(&env.name))];
    let mut player = Vec::new();
    if let Some(avatar) = &env.avatar_object {
        player.push(("AvatarObject", s(avatar)));
    }
    if env.observer_config != ObserverConfig::default() {
        player.push(("Observer", observer(&env.observer_config)));
    }
    if !player.is_empty() {
        entries.push(("Player", Y::Map(player)));
    }
    if let Some(max) = env.max_steps {
        entries.push(("MaxSteps", Y::Int(max as i64)));
    }
    if !env.player_variables.is_empty() {
        entries.push(("Variables", variables(&env.player_variables)));
    }
    let mut termination = Vec::new();
    if !env.termination.win.is_empty() {
        termination.push(("Win", Y::Seq(env.termination.win.iter().map(condition).collect())));
    }
    if !env.termination.lose.is_empty() {
        termination.push(("Lose", Y::Seq(env.termination.lose.iter().map(condition).collect())));
    }
    if !termination.is_empty() {
        entries.push(("Termination", Y::Map(termination)));
    }
    entries.push(("Levels", Y::Seq(env.levels.iter().map(|l| Y::Block(l.clone())).collect())));
    Y::Map(entries)
}

/// Deterministic canonical text; re-parses to an equal document.
pub fn serialize_gdy(doc: &GdyDocument) -> String {
    let mut root = vec![
        ("Environment", environment(&doc.environment)),
        ("Actions", Y::Seq(doc.actions.iter().map(action).collect())),
        ("Objects", Y::Seq(doc.objects.iter().map(object).collect())),
    ];
    let mut out = String::new();
    write_map(&mut out, &mut root, 0, true);
    out.push('\n');
    out
}
