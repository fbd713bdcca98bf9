//! Flattened discrete action table.

use serde::{Deserialize, Serialize};

use crate::model::{Direction, GdyDocument, InputMapping};

/// Keys for the remaining entries once movement has W/A/S/D.
pub const KEY_POOL: [&str; 13] = ["E", "Q", "R", "T", "1", "2", "3", "4", "5", "6", "7", "8", "9"];

pub const NOOP_NAME: &str = "noop";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionEntry {
    pub id: u32,
    /// GDY action name, or `noop`.
    pub action: String,
    /// Index into the document's action list; `None` for the no-op.
    #[serde(skip)]
    pub action_index: Option<usize>,
    /// Input name: `left`/`right`/`down`/`up` or `use` for unary inputs, empty for no-op.
    pub input: String,
    /// Human label, e.g. `Move Left`.
    pub label: String,
    #[serde(skip)]
    pub direction: Option<Direction>,
    pub delta: (i32, i32),
    pub key: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ActionSpace {
    entries: Vec<ActionEntry>,
}

/// `make_wood_pickaxe` -> `Make Wood Pickaxe`.
pub fn title_case(name: &str) -> String {
    name.split(['_', '-'])
        .filter(|w| !w.is_empty())
        .map(|w| {
            let mut chars = w.chars();
            match chars.next() {
                Some(first) => first.to_uppercase().chain(chars).collect::<String>(),
                None => String::new(),
            }
        })
        .collect::<Vec<_>>()
        .join(" ")
}

fn movement_key(dir: Direction) -> &'static str {
    match dir {
        Direction::Left => "A",
        Direction::Right => "D",
        Direction::Down => "S",
        Direction::Up => "W",
    }
}

impl ActionSpace {
    /// Id 0 is the no-op, then every (action, input) pair in declaration order.
    pub fn build(doc: &GdyDocument) -> Self {
        let mut entries = vec![ActionEntry {
            id: 0,
            action: NOOP_NAME.into(),
            action_index: None,
            input: String::new(),
            label: "No-Op".into(),
            direction: None,
            delta: (0, 0),
            key: None,
        }];
        let mut pool = KEY_POOL.iter();
        let mut movement_bound = false;
        for (index, action) in doc.actions.iter().enumerate() {
            let title = title_case(&action.name);
            match &action.input_mapping {
                InputMapping::Directional => {
                    let is_movement = !movement_bound;
                    movement_bound = true;
                    for dir in Direction::INPUT_ORDER {
                        let key = if is_movement {
                            Some(movement_key(dir).to_string())
                        } else {
                            pool.next().map(|k| k.to_string())
                        };
                        entries.push(ActionEntry {
                            id: entries.len() as u32,
                            action: action.name.clone(),
                            action_index: Some(index),
                            input: dir.as_str().into(),
                            label: format!("{title} {}", dir.label()),
                            direction: Some(dir),
                            delta: dir.delta(),
                            key,
                        });
                    }
                }
                InputMapping::Unary { description } => entries.push(ActionEntry {
                    id: entries.len() as u32,
                    action: action.name.clone(),
                    action_index: Some(index),
                    input: "use".into(),
                    label: description.clone().unwrap_or(title),
                    direction: None,
                    delta: (0, 0),
                    key: pool.next().map(|k| k.to_string()),
                }),
            }
        }
        Self { entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, id: u32) -> Option<&ActionEntry> {
        self.entries.get(id as usize)
    }

    pub fn entries(&self) -> &[ActionEntry] {
        &self.entries
    }

    /// Case-insensitive key lookup.
    pub fn by_key(&self, key: &str) -> Option<&ActionEntry> {
        self.entries.iter().find(|e| e.key.as_deref().is_some_and(|k| k.eq_ignore_ascii_case(key)))
    }

    pub fn find(&self, action: &str, input: &str) -> Option<u32> {
        self.entries.iter().find(|e| e.action == action && e.input == input).map(|e| e.id)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assets;

    #[test]
    fn escape_room_matches_flattened_table() {
        let space = ActionSpace::build(&assets::escape_room());
        let labels: Vec<_> = space.entries().iter().map(|e| e.label.as_str()).collect();
        assert_eq!(
            labels,
            [
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
            ]
        );
        let ids: Vec<_> = space.entries().iter().map(|e| e.id).collect();
        assert_eq!(ids, (0..12).collect::<Vec<_>>());
        let keys: Vec<_> = space.entries().iter().map(|e| e.key.as_deref()).collect();
        assert_eq!(
            keys,
            [
                None,
                Some("A"),
                Some("D"),
                Some("S"),
                Some("W"),
                Some("E"),
                Some("Q"),
                Some("R"),
                Some("T"),
                Some("1"),
                Some("2"),
                Some("3")
            ]
        );
    }

    #[test]
    fn sokoban_has_five_entries() {
        let space = ActionSpace::build(&assets::sokoban());
        assert_eq!(space.len(), 5);
        assert_eq!(space.get(0).unwrap().delta, (0, 0));
        assert_eq!(space.get(1).unwrap().delta, (-1, 0));
        assert_eq!(space.by_key("a").unwrap().id, 1);
        assert_eq!(space.by_key("W").unwrap().id, 4);
        assert_eq!(space.find("move", "down"), Some(3));
    }

    #[test]
    fn no_actions_means_noop_only() {
        let doc =
            crate::parser::parse_gdy("Environment:\n  Levels: ['.']\nObjects:\n  - Name: r\n    MapCharacter: r\n")
                .unwrap();
        let space = ActionSpace::build(&doc);
        assert_eq!(space.len(), 1);
        assert_eq!(space.get(0).unwrap().action, NOOP_NAME);
    }

    #[test]
    fn title_case_words() {
        assert_eq!(title_case("make_wood_pickaxe"), "Make Wood Pickaxe");
        assert_eq!(title_case("move"), "Move");
    }
}
