//! Bundled GDY documents.

use crate::model::GdyDocument;
use crate::parser::parse_gdy;

pub const SOKOBAN_GDY: &str = include_str!("../assets/sokoban.gdy");
pub const ESCAPE_ROOM_GDY: &str = include_str!("../assets/escape_room.gdy");

pub fn sokoban() -> GdyDocument {
    parse_gdy(SOKOBAN_GDY).expect("bundled sokoban.gdy parses")
}

pub fn escape_room() -> GdyDocument {
    parse_gdy(ESCAPE_ROOM_GDY).expect("bundled escape_room.gdy parses")
}

/// Bundled document by short name (`sokoban`, `escape_room`).
pub fn by_name(name: &str) -> Option<GdyDocument> {
    match name {
        "sokoban" => Some(sokoban()),
        "escape_room" | "escaperoom" => Some(escape_room()),
        _ => None,
    }
}
