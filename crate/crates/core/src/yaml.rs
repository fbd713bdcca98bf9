//! Minimal YAML document tree built from the `yaml-rust2` event stream.
//!
//! Only maps, sequences and scalars are accepted. Anchors, aliases, tags,
//! duplicate keys, non-scalar keys and multi-document streams are rejected
//! with a positioned syntax error. The tree is built with an explicit stack so
//! deeply nested input cannot exhaust the call stack.

use yaml_rust2::parser::{Event, Parser};
use yaml_rust2::scanner::{Marker, TScalarStyle};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Mark {
    /// 1-based line.
    pub line: usize,
    /// 1-based column.
    pub col: usize,
}

impl From<Marker> for Mark {
    fn from(m: Marker) -> Self {
        Mark { line: m.line(), col: m.col() + 1 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Scalar { value: String, plain: bool, mark: Mark },
    Seq { items: Vec<Node>, mark: Mark },
    Map { entries: Vec<(String, Node)>, mark: Mark },
}

impl Node {
    pub fn mark(&self) -> Mark {
        match self {
            Node::Scalar { mark, .. } | Node::Seq { mark, .. } | Node::Map { mark, .. } => *mark,
        }
    }

    pub fn get(&self, key: &str) -> Option<&Node> {
        match self {
            Node::Map { entries, .. } => entries.iter().find(|(k, _)| k == key).map(|(_, v)| v),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            Node::Scalar { value, .. } => Some(value),
            _ => None,
        }
    }

    /// A plain scalar that reads as YAML null (`~`, `null` or nothing).
    pub fn is_null(&self) -> bool {
        matches!(self, Node::Scalar { value, plain: true, .. } if matches!(value.as_str(), "" | "~" | "null" | "Null" | "NULL"))
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            Node::Scalar { value, plain: true, .. } => value.parse().ok(),
            _ => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Node::Scalar { value, plain: true, .. } => match value.as_str() {
                "true" | "True" | "TRUE" | "yes" | "Yes" | "on" | "On" => Some(true),
                "false" | "False" | "FALSE" | "no" | "No" | "off" | "Off" => Some(false),
                _ => None,
            },
            _ => None,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Node::Scalar { .. } => "scalar",
            Node::Seq { .. } => "sequence",
            Node::Map { .. } => "mapping",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct YamlError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl YamlError {
    fn at(mark: Mark, message: impl Into<String>) -> Self {
        Self { line: mark.line, col: mark.col, message: message.into() }
    }
}

enum Frame {
    Seq { items: Vec<Node>, mark: Mark },
    Map { entries: Vec<(String, Node)>, key: Option<(String, Mark)>, mark: Mark },
}

/// Parses a single YAML document. Returns `None` for an empty stream.
pub fn parse(text: &str) -> Result<Option<Node>, YamlError> {
    let mut parser = Parser::new_from_str(text);
    let mut stack: Vec<Frame> = Vec::new();
    let mut root: Option<Node> = None;
    let mut documents = 0usize;

    loop {
        let (event, marker) =
            parser.next_token().map_err(|e| YamlError::at((*e.marker()).into(), e.info().to_string()))?;
        let mark = Mark::from(marker);
        let node = match event {
            Event::StreamEnd => break,
            Event::StreamStart | Event::Nothing | Event::DocumentEnd => continue,
            Event::DocumentStart => {
                documents += 1;
                if documents > 1 {
                    return Err(YamlError::at(mark, "multiple YAML documents are not supported"));
                }
                continue;
            }
            Event::Alias(_) => return Err(YamlError::at(mark, "YAML aliases are not supported")),
            Event::Scalar(value, style, anchor, tag) => {
                reject_extras(anchor, tag.is_some(), mark)?;
                Node::Scalar { value, plain: style == TScalarStyle::Plain, mark }
            }
            Event::SequenceStart(anchor, tag) => {
                reject_extras(anchor, tag.is_some(), mark)?;
                stack.push(Frame::Seq { items: Vec::new(), mark });
                continue;
            }
            Event::MappingStart(anchor, tag) => {
                reject_extras(anchor, tag.is_some(), mark)?;
                stack.push(Frame::Map { entries: Vec::new(), key: None, mark });
                continue;
            }
            Event::SequenceEnd => match stack.pop() {
                Some(Frame::Seq { items, mark }) => Node::Seq { items, mark },
                _ => return Err(YamlError::at(mark, "unbalanced sequence end")),
            },
            Event::MappingEnd => match stack.pop() {
                Some(Frame::Map { entries, key: None, mark }) => Node::Map { entries, mark },
                _ => return Err(YamlError::at(mark, "unbalanced mapping end")),
            },
        };

        match stack.last_mut() {
            None => {
                if root.is_some() {
                    return Err(YamlError::at(mark, "unexpected content after document root"));
                }
                root = Some(node);
            }
            Some(Frame::Seq { items, .. }) => items.push(node),
            Some(Frame::Map { entries, key, .. }) => match key.take() {
                None => match node {
                    Node::Scalar { value, mark, .. } => {
                        if entries.iter().any(|(k, _)| *k == value) {
                            return Err(YamlError::at(mark, format!("duplicate key `{value}`")));
                        }
                        *key = Some((value, mark));
                    }
                    other => {
                        return Err(YamlError::at(other.mark(), "mapping keys must be scalars"));
                    }
                },
                Some((k, _)) => entries.push((k, node)),
            },
        }
    }

    if !stack.is_empty() {
        return Err(YamlError::at(Mark { line: 0, col: 0 }, "unterminated collection"));
    }
    Ok(root)
}

fn reject_extras(anchor: usize, tagged: bool, mark: Mark) -> Result<(), YamlError> {
    if anchor != 0 {
        return Err(YamlError::at(mark, "YAML anchors are not supported"));
    }
    if tagged {
        return Err(YamlError::at(mark, "YAML tags are not supported"));
    }
    Ok(())
}
