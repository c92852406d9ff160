//! CSV emission: fixed schemas, 12 significant digits, deterministic bytes.

use crate::CliError;
use std::io::Write;
use std::path::Path;

/// Decimal-exponent notation with 12 significant digits.
pub fn fmt_sig(x: f64) -> String {
    format!("{x:.11e}")
}

/// Write a header row and data rows, comma-separated, newline-terminated.
/// Rows must match the schema width; order is preserved as given.
pub fn emit_csv(header: &[&str], rows: &[Vec<String>], path: &Path) -> Result<(), CliError> {
    for (i, row) in rows.iter().enumerate() {
        if row.len() != header.len() {
            return Err(CliError::Config(format!(
                "csv row {i} has {} fields, schema has {}",
                row.len(),
                header.len()
            )));
        }
    }
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    let mut file = std::fs::File::create(path)
        .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))?;
    file.write_all(out.as_bytes())
        .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))?;
    Ok(())
}
