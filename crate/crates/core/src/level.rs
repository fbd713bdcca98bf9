//! Level strings and their grid layouts.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::GdyDocument;

/// Character marking an unoccupied cell.
pub const EMPTY_CELL: char = '.';

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Placement {
    pub x: u32,
    pub y: u32,
    pub object: String,
}

/// Object placements on a `width` x `height` grid; `(0, 0)` is the top-left cell.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawLayout")]
pub struct LevelLayout {
    width: u32,
    height: u32,
    placements: Vec<Placement>,
}

#[derive(Deserialize)]
struct RawLayout {
    width: u32,
    height: u32,
    placements: Vec<Placement>,
}

impl TryFrom<RawLayout> for LevelLayout {
    type Error = LevelError;

    fn try_from(raw: RawLayout) -> Result<Self, Self::Error> {
        LevelLayout::new(raw.width, raw.height, raw.placements)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LevelError {
    #[error("unknown level character {ch:?} at ({x}, {y})")]
    UnknownCharacter { ch: char, x: u32, y: u32 },
    #[error("level has no rows")]
    EmptyLevel,
    #[error("layout dimensions must be positive, got {width}x{height}")]
    BadDimensions { width: u32, height: u32 },
    #[error("placement of `{object}` at ({x}, {y}) lies outside the layout")]
    OutOfBounds { object: String, x: u32, y: u32 },
    #[error("more than one placement at ({x}, {y})")]
    Overlap { x: u32, y: u32 },
    #[error("object `{0}` has no map character")]
    UnknownObject(String),
}

impl LevelLayout {
    /// Builds a layout, checking bounds and one placement per cell.
    /// Placements are stored in row-major order.
    pub fn new(width: u32, height: u32, mut placements: Vec<Placement>) -> Result<Self, LevelError> {
        if width == 0 || height == 0 {
            return Err(LevelError::BadDimensions { width, height });
        }
        placements.sort_by_key(|p| (p.y, p.x));
        for (i, p) in placements.iter().enumerate() {
            if p.x >= width || p.y >= height {
                return Err(LevelError::OutOfBounds { object: p.object.clone(), x: p.x, y: p.y });
            }
            if i > 0 && placements[i - 1].x == p.x && placements[i - 1].y == p.y {
                return Err(LevelError::Overlap { x: p.x, y: p.y });
            }
        }
        Ok(Self { width, height, placements })
    }

    pub fn empty(width: u32, height: u32) -> Result<Self, LevelError> {
        Self::new(width, height, Vec::new())
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn placements(&self) -> &[Placement] {
        &self.placements
    }

    pub fn object_at(&self, x: u32, y: u32) -> Option<&str> {
        self.placements.binary_search_by_key(&(y, x), |p| (p.y, p.x)).ok().map(|i| self.placements[i].object.as_str())
    }

    pub fn count(&self, object: &str) -> usize {
        self.placements.iter().filter(|p| p.object == object).count()
    }
}

/// Splits a level string into rows, dropping trailing blank lines and trailing whitespace.
pub fn level_rows(text: &str) -> Vec<&str> {
    let mut rows: Vec<&str> = text.split('\n').map(|r| r.trim_end()).collect();
    while rows.last().is_some_and(|r| r.is_empty()) {
        rows.pop();
    }
    rows
}

/// Parses a level string against the document's map characters.
/// Ragged rows are right-padded with empty cells.
pub fn parse_level(doc: &GdyDocument, text: &str) -> Result<LevelLayout, LevelError> {
    let rows = level_rows(text);
    if rows.is_empty() {
        return Err(LevelError::EmptyLevel);
    }
    let width = rows.iter().map(|r| r.chars().count()).max().unwrap_or(0).max(1) as u32;
    let height = rows.len() as u32;
    let mut placements = Vec::new();
    for (y, row) in rows.iter().enumerate() {
        for (x, ch) in row.chars().enumerate() {
            if ch == EMPTY_CELL {
                continue;
            }
            let obj = doc.object_by_char(ch).ok_or(LevelError::UnknownCharacter { ch, x: x as u32, y: y as u32 })?;
            placements.push(Placement { x: x as u32, y: y as u32, object: obj.name.clone() });
        }
    }
    LevelLayout::new(width, height, placements)
}

/// Renders a layout back to its level string: LF-separated rows, no trailing newline.
pub fn serialize_level(layout: &LevelLayout, doc: &GdyDocument) -> Result<String, LevelError> {
    let w = layout.width as usize;
    let mut grid = vec![EMPTY_CELL; w * layout.height as usize];
    for p in &layout.placements {
        let obj = doc.object(&p.object).ok_or_else(|| LevelError::UnknownObject(p.object.clone()))?;
        grid[p.y as usize * w + p.x as usize] = obj.map_character;
    }
    let rows: Vec<String> = grid.chunks(w).map(|row| row.iter().collect()).collect();
    Ok(rows.join("\n"))
}
