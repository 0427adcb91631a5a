//! `RunManifest`: a `key=value` record written next to every output.
//!
//! The `config.*` keys of a training manifest are accepted by
//! `train --config`, so a manifest replays its run.

use std::fmt::Display;
use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use sha2::{Digest, Sha256};

pub struct RunManifest {
    entries: Vec<(String, String)>,
    started: Instant,
}

impl RunManifest {
    pub fn new(command: &str) -> Self {
        let mut manifest = RunManifest {
            entries: Vec::new(),
            started: Instant::now(),
        };
        manifest.set("command", command);
        manifest.set("version", env!("CARGO_PKG_VERSION"));
        manifest
    }

    pub fn set(&mut self, key: impl Into<String>, value: impl Display) {
        self.entries.push((key.into(), value.to_string()));
    }

    pub fn set_path(&mut self, key: impl Into<String>, path: &Path) {
        self.set(key, path.display());
    }

    /// Stamp the wall time and write to `<output>.manifest`.
    pub fn write_next_to(mut self, output: &Path) -> io::Result<PathBuf> {
        let seconds = self.started.elapsed().as_secs_f64();
        self.set("wall_seconds", format!("{seconds:.3}"));
        let path = sibling(output, "manifest");
        let mut w = BufWriter::new(File::create(&path)?);
        for (k, v) in &self.entries {
            writeln!(w, "{k}={v}")?;
        }
        w.flush()?;
        Ok(path)
    }
}

/// `out.bin` -> `out.bin.<suffix>`.
pub fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let mut name = path.as_os_str().to_owned();
    name.push(".");
    name.push(suffix);
    PathBuf::from(name)
}

pub fn sha256_file(path: &Path) -> io::Result<String> {
    let mut file = File::open(path)?;
    let mut hasher = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    loop {
        let n = file.read(&mut buf)?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(hasher.finalize().iter().map(|b| format!("{b:02x}")).collect())
}
