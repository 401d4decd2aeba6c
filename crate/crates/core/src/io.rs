use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{GovError, Result};

/// Writes `contents` to `path` through a sibling temp file and a rename.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir).map_err(|e| GovError::io(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| GovError::io(dir, e))?;
    tmp.write_all(contents).map_err(|e| GovError::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| GovError::io(path, e))?;
    tmp.persist(path).map_err(|e| GovError::io(path, e.error))?;
    Ok(())
}

pub(crate) fn open_csv(path: &Path) -> Result<csv::Reader<fs::File>> {
    let file = fs::File::open(path).map_err(|e| GovError::io(path, e))?;
    Ok(csv::ReaderBuilder::new()
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file))
}

/// Checks that the header starts with `required` and returns any extra columns.
pub(crate) fn check_header(
    path: &Path,
    reader: &mut csv::Reader<fs::File>,
    required: &[&str],
    optional: &[&str],
) -> Result<Vec<String>> {
    let header = reader
        .headers()
        .map_err(|e| GovError::schema(path, e.to_string()))?
        .clone();
    let cols: Vec<String> = header.iter().map(|h| h.trim_start_matches('\u{feff}').to_string()).collect();
    let ok_prefix = cols.len() >= required.len()
        && cols.iter().zip(required).all(|(c, r)| c == r);
    let extras: Vec<String> = cols.iter().skip(required.len()).cloned().collect();
    if !ok_prefix || extras.iter().any(|c| !optional.contains(&c.as_str())) {
        return Err(GovError::schema(
            path,
            format!("expected header `{}`, found `{}`", required.join(","), cols.join(",")),
        ));
    }
    Ok(extras)
}

pub(crate) fn csv_string(rows: impl FnOnce(&mut csv::Writer<Vec<u8>>) -> csv::Result<()>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    rows(&mut w).expect("in-memory csv write");
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is utf8")
}
