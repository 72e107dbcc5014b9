use std::fmt;
use std::path::PathBuf;

use anyhow::Context;
use serde::Serialize;

/// An error the user can fix by changing the invocation; exits with 1.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub struct Output {
    pub dir: PathBuf,
    pub force: bool,
}

impl Output {
    /// Renders into memory first so a failed command leaves no partial file.
    pub fn write<F>(&self, name: &str, render: F) -> anyhow::Result<()>
    where
        F: FnOnce(&mut Vec<u8>) -> anyhow::Result<()>,
    {
        let path = self.dir.join(name);
        if path.exists() && !self.force {
            return Err(UsageError(format!(
                "{} exists; pass --force to overwrite",
                path.display()
            ))
            .into());
        }
        let mut buf = Vec::new();
        render(&mut buf)?;
        std::fs::create_dir_all(&self.dir)
            .with_context(|| format!("creating {}", self.dir.display()))?;
        std::fs::write(&path, buf).with_context(|| format!("writing {}", path.display()))?;
        log::info!("wrote {}", path.display());
        Ok(())
    }

    pub fn json<T: Serialize>(&self, name: &str, value: &T) -> anyhow::Result<()> {
        let text = gatekeeper_core::report::to_json_string(value)?;
        self.write(name, |w| {
            w.extend_from_slice(text.as_bytes());
            Ok(())
        })
    }
}
