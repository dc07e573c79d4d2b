use std::io::Write;
use std::path::{Path, PathBuf};

use owt_core::{Error, Result};

pub fn init_logging(level: log::LevelFilter) {
    env_logger::Builder::new()
        .filter_level(level)
        .format(|buf, record| writeln!(buf, "{} {}", record.level().as_str().to_lowercase(), record.args()))
        .target(env_logger::Target::Stderr)
        .init();
}

fn parent_of(path: &Path) -> PathBuf {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    }
}

/// Writes via a temporary sibling file renamed into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = parent_of(path);
    let io = |e| Error::io(path, e);
    std::fs::create_dir_all(&dir).map_err(io)?;
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(io)?;
    tmp.write_all(bytes).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

/// Builds a directory in a temporary sibling and renames it to `path`,
/// which must not exist. Nothing is left behind when `fill` fails.
pub fn write_tree_atomic(path: &Path, fill: impl FnOnce(&Path) -> Result<()>) -> Result<()> {
    if path.exists() {
        return Err(Error::input(format!("{} already exists", path.display())));
    }
    let parent = parent_of(path);
    std::fs::create_dir_all(&parent).map_err(|e| Error::io(&parent, e))?;
    let tmp = tempfile::Builder::new().prefix(".owt-").tempdir_in(&parent).map_err(|e| Error::io(&parent, e))?;
    fill(tmp.path())?;
    let staged = tmp.keep();
    std::fs::rename(&staged, path).map_err(|e| {
        let _ = std::fs::remove_dir_all(&staged);
        Error::io(path, e)
    })
}

/// Writes several files into `dir`, each atomically, after all contents are ready.
pub fn write_dir_atomic(dir: &Path, files: &[(&str, String)]) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for (name, text) in files {
        write_atomic(&dir.join(name), text.as_bytes())?;
    }
    Ok(())
}
