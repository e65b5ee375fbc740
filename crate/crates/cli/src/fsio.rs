//! File plumbing shared by the subcommands: guarded, atomic writes and
//! human-friendly duration flags.

use std::io::Write as _;
use std::path::Path;

use stalebayes_core::{Error, Result};

/// Writes via a temp file in the target directory plus an atomic rename, so
/// a crash can't leave a half-written artifact behind.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

/// Refuses to clobber an existing file unless the caller passed `--force`.
pub fn guard_overwrite(path: &Path, force: bool) -> Result<()> {
    if !force && path.exists() {
        return Err(Error::Io(std::io::Error::new(
            std::io::ErrorKind::AlreadyExists,
            format!("{} exists; pass --force to overwrite", path.display()),
        )));
    }
    Ok(())
}

pub fn read_to_string(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| {
        Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
    })
}

/// Parses a duration flag: plain numbers are hours, `h`/`m` suffixes pick
/// hours or minutes ("2.25h" == "135m" == "2.25").
pub fn parse_hours(raw: &str) -> std::result::Result<f64, String> {
    let trimmed = raw.trim();
    let (digits, scale) = if let Some(rest) = trimmed.strip_suffix(['h', 'H']) {
        (rest, 1.0)
    } else if let Some(rest) = trimmed.strip_suffix(['m', 'M']) {
        (rest, 1.0 / 60.0)
    } else {
        (trimmed, 1.0)
    };
    let value: f64 = digits
        .trim()
        .parse()
        .map_err(|_| format!("'{raw}' is not a duration (try 2.25, 2.25h, or 135m)"))?;
    if !value.is_finite() || value < 0.0 {
        return Err(format!("duration '{raw}' must be finite and non-negative"));
    }
    Ok(value * scale)
}
