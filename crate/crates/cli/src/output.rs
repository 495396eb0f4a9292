use std::fs;
use std::path::PathBuf;

use serde::Serialize;

use crate::config::RunConfig;
use crate::CliError;

/// Serializes artifact writing; every file starts with the config echo.
pub struct Output {
    dir: Option<PathBuf>,
    header: String,
}

impl Output {
    pub fn new(cfg: &RunConfig) -> Result<Self, CliError> {
        if let Some(dir) = &cfg.output_dir {
            fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
        }
        Ok(Self {
            dir: cfg.output_dir.clone(),
            header: cfg.header(),
        })
    }

    fn emit(&self, name: &str, body: &str) -> Result<(), CliError> {
        match &self.dir {
            Some(dir) => {
                let path = dir.join(name);
                fs::write(&path, body).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
                say!("wrote {}", path.display());
            }
            None => {
                say!("==> {name}");
                say_raw!("{body}");
            }
        }
        Ok(())
    }

    /// Text, markdown or CSV with a `# config:` first line.
    pub fn text(&self, name: &str, body: &str) -> Result<(), CliError> {
        self.emit(name, &format!("# config: {}\n{body}", self.header))
    }

    /// JSON wrapped as `{"config": ..., "result": ...}`; only written to
    /// files, stdout gets the text artifacts.
    pub fn json<T: Serialize>(&self, name: &str, result: &T) -> Result<(), CliError> {
        if self.dir.is_none() {
            return Ok(());
        }
        let config: serde_json::Value = serde_json::from_str(&self.header).expect("header is JSON");
        let doc = serde_json::json!({ "config": config, "result": result });
        let mut text = serde_json::to_string_pretty(&doc).map_err(|e| CliError::Io(e.to_string()))?;
        text.push('\n');
        self.emit(name, &text)
    }

    pub fn has_dir(&self) -> bool {
        self.dir.is_some()
    }
}
