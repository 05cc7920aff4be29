//! Outputs are staged next to their destination and renamed into place, so
//! a failed run leaves nothing behind.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};

fn parent_of(path: &Path) -> &Path {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    }
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = parent_of(path);
    let mut tmp = tempfile::NamedTempFile::new_in(dir).with_context(|| format!("staging {}", path.display()))?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path)
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

/// A directory being filled under a temporary name.
pub struct StagedDir {
    tmp: tempfile::TempDir,
    target: PathBuf,
    replace: bool,
}

impl StagedDir {
    pub fn new(target: &Path, replace: bool) -> Result<Self> {
        if target.exists() {
            let empty = fs::read_dir(target)
                .with_context(|| format!("reading {}", target.display()))?
                .next()
                .is_none();
            if !empty && !replace {
                bail!(
                    "{} exists and is not empty (use --force to replace it)",
                    target.display()
                );
            }
        }
        let parent = parent_of(target);
        fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
        let tmp = tempfile::Builder::new()
            .prefix(".sixsense-")
            .tempdir_in(parent)
            .with_context(|| format!("staging in {}", parent.display()))?;
        Ok(Self {
            tmp,
            target: target.to_owned(),
            replace,
        })
    }

    pub fn path(&self) -> &Path {
        self.tmp.path()
    }

    pub fn commit(self) -> Result<()> {
        if self.target.exists() {
            if self.replace {
                fs::remove_dir_all(&self.target)
            } else {
                fs::remove_dir(&self.target)
            }
            .with_context(|| format!("replacing {}", self.target.display()))?;
        }
        let staged = self.tmp.keep();
        fs::rename(&staged, &self.target).with_context(|| format!("moving output to {}", self.target.display()))?;
        Ok(())
    }
}
