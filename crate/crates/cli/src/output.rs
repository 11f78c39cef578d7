//! The single output stage: artifacts are staged in memory and written last.

use std::fs;
use std::path::{Path, PathBuf};

use crate::{exit, CliError};

/// Files produced by a command, not yet written.
#[derive(Debug, Default)]
pub struct Staged {
    /// (file name, contents), in a fixed order.
    pub files: Vec<(String, Vec<u8>)>,
    /// Text printed to stdout whether or not `--out` is given.
    pub message: String,
    pub code: i32,
}

impl Staged {
    pub fn file(name: impl Into<String>, contents: impl Into<Vec<u8>>) -> Self {
        Self {
            files: vec![(name.into(), contents.into())],
            message: String::new(),
            code: exit::OK,
        }
    }

    pub fn push(&mut self, name: impl Into<String>, contents: impl Into<Vec<u8>>) {
        self.files.push((name.into(), contents.into()));
    }

    /// Writes the files into `out`, or returns the single file as stdout text
    /// when no directory is given. Nothing is written for a nonzero code.
    ///
    /// Files are first written under temporary names and renamed once all of
    /// them are on disk; on any failure every file touched is removed.
    pub fn commit(self, out: Option<&Path>) -> Result<String, CliError> {
        if self.code != exit::OK {
            return Ok(self.message);
        }
        let Some(dir) = out else {
            return match self.files.as_slice() {
                [] => Ok(self.message),
                [(_, contents)] => {
                    let text = String::from_utf8(contents.clone())
                        .map_err(|_| CliError::Usage("output is not text".into()))?;
                    Ok(self.message + &text)
                }
                _ => Err(CliError::Usage(format!(
                    "this command writes {} files; pass --out DIR",
                    self.files.len()
                ))),
            };
        };
        fs::create_dir_all(dir)?;
        let mut temps: Vec<PathBuf> = Vec::new();
        let mut done: Vec<PathBuf> = Vec::new();
        let result = (|| -> std::io::Result<()> {
            for (name, contents) in &self.files {
                let tmp = dir.join(format!(".{name}.partial"));
                temps.push(tmp.clone());
                fs::write(&tmp, contents)?;
            }
            for ((name, _), tmp) in self.files.iter().zip(&temps) {
                let target = dir.join(name);
                fs::rename(tmp, &target)?;
                done.push(target);
            }
            Ok(())
        })();
        if let Err(e) = result {
            for p in temps.iter().chain(&done) {
                let _ = fs::remove_file(p);
            }
            return Err(e.into());
        }
        let mut message = self.message;
        for p in &done {
            message.push_str(&format!("wrote {}\n", p.display()));
        }
        Ok(message)
    }
}
