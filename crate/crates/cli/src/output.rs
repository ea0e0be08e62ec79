//! Artifact writers. Every file starts with `#` comment lines describing
//! the exact inputs that produced it.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{CliError, CliResult};

/// Prefixes every line of `text` with `# `.
pub fn comment_block(text: &str) -> String {
    text.lines().map(|l| if l.is_empty() { "#\n".to_string() } else { format!("# {l}\n") }).collect()
}

/// Writes a commented header and a CSV table, going through a temporary
/// file so readers never see a partial artifact.
pub fn write_csv(path: &Path, header: &str, columns: &[&str], rows: &[Vec<String>]) -> CliResult<()> {
    let mut body = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| CliError::io(path, std::io::Error::other(e));
    body.write_record(columns).map_err(csv_err)?;
    for row in rows {
        body.write_record(row).map_err(csv_err)?;
    }
    let body = body.into_inner().map_err(|e| CliError::io(path, e.into_error()))?;
    let mut bytes = comment_block(header).into_bytes();
    bytes.extend_from_slice(&body);
    write_atomic(path, &bytes)
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> CliResult<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        }
    }
    let tmp = path.with_extension("partial");
    let mut file = fs::File::create(&tmp).map_err(|e| CliError::io(&tmp, e))?;
    file.write_all(bytes).map_err(|e| CliError::io(&tmp, e))?;
    file.sync_all().map_err(|e| CliError::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| CliError::io(path, e))
}

/// Shortest representation that parses back to the same value.
pub fn num(x: f64) -> String {
    format!("{x}")
}
