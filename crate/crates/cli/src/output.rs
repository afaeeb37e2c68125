//! Diff-stable output helpers: 17-significant-digit floats and atomic
//! file writes (temp + rename in the target directory).

use std::path::Path;

use anyhow::Context;

/// One float, 17 significant digits, scientific notation.
pub fn g17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Optional float for CSV cells.
pub fn g17_opt(x: Option<f64>) -> String {
    x.map(g17).unwrap_or_default()
}

pub fn write_atomic(path: &Path, content: &str) -> anyhow::Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)
                .with_context(|| format!("cannot create {}", dir.display()))?;
        }
    }
    let tmp = path.with_extension(format!(
        "{}.tmp{}",
        path.extension().and_then(|e| e.to_str()).unwrap_or(""),
        std::process::id()
    ));
    std::fs::write(&tmp, content).with_context(|| format!("cannot write {}", tmp.display()))?;
    std::fs::rename(&tmp, path)
        .with_context(|| format!("cannot move output into place at {}", path.display()))?;
    Ok(())
}
