use std::fs;
use std::io::Write;
use std::path::Path;

/// 17 significant digits in scientific notation; round-trips every f64.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

/// Write an artifact atomically: the full content is rendered first, staged
/// to `<path>.tmp` and renamed into place, so a failed run never leaves a
/// partial file at the target.
pub fn write_artifact(path: &str, content: &str) -> std::io::Result<()> {
    if path == "-" {
        let mut stdout = std::io::stdout().lock();
        stdout.write_all(content.as_bytes())?;
        return Ok(());
    }
    let staged = format!("{path}.tmp");
    fs::write(&staged, content)?;
    if let Err(e) = fs::rename(&staged, Path::new(path)) {
        let _ = fs::remove_file(&staged);
        return Err(e);
    }
    Ok(())
}
