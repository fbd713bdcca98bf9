//! JSON shapes shared by the CLI and the serve protocol.

use gridforge::GdyError;
use serde_json::{json, Value};

/// Diagnostics array for a parse failure; syntax errors become one
/// `SYNTAX_ERROR` entry carrying the line and column.
pub fn gdy_error_json(err: &GdyError) -> Value {
    match err {
        GdyError::Syntax { line, col, message } => json!([{
            "severity": "error",
            "code": "SYNTAX_ERROR",
            "path": "",
            "message": message,
            "line": line,
            "col": col,
        }]),
        GdyError::Schema(diags) => serde_json::to_value(diags).unwrap_or_else(|_| json!([])),
    }
}
