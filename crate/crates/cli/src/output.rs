use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde_json::Value;

/// Writes files into the output directory via a temporary file and rename.
pub struct Output {
    dir: PathBuf,
    hash: String,
    pub written: Vec<PathBuf>,
}

impl Output {
    pub fn new(dir: &Path, hash: &str) -> Result<Self> {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(Self { dir: dir.to_path_buf(), hash: hash.to_string(), written: Vec::new() })
    }

    pub fn provenance(&self) -> Vec<String> {
        vec![format!("config_hash={}", self.hash)]
    }

    pub fn write(&mut self, name: &str, contents: &str) -> Result<()> {
        let path = self.dir.join(name);
        let mut tmp = tempfile::NamedTempFile::new_in(&self.dir).with_context(|| format!("creating temporary file in {}", self.dir.display()))?;
        tmp.write_all(contents.as_bytes())?;
        tmp.as_file().sync_all()?;
        tmp.persist(&path).with_context(|| format!("writing {}", path.display()))?;
        self.written.push(path);
        Ok(())
    }

    /// CSV with a leading provenance comment.
    pub fn csv(&mut self, name: &str, body: &str) -> Result<()> {
        let text = format!("# config_hash={}\n{body}", self.hash);
        self.write(name, &text)
    }

    /// Pretty JSON object with the config hash inserted.
    pub fn json(&mut self, name: &str, mut value: Value) -> Result<()> {
        if let Value::Object(m) = &mut value {
            m.insert("config_hash".into(), Value::String(self.hash.clone()));
        }
        let mut text = serde_json::to_string_pretty(&value)?;
        text.push('\n');
        self.write(name, &text)
    }
}

/// Full-precision float formatting shared by all tables.
pub fn f(v: f64) -> String {
    format!("{v:.16e}")
}
