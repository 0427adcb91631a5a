use std::fs::File;
use std::io::{BufReader, BufWriter, Read};
use std::path::Path;

use anyhow::{Context, Result};
use csg_core::model::{load_vectors, save_vectors, VectorFormat, WordVectors};

use crate::error::usage;

pub fn parse_format(name: Option<&str>) -> Result<Option<VectorFormat>> {
    name.map(|n| n.parse::<VectorFormat>().map_err(|e| usage(e.to_string()))).transpose()
}

/// `.txt` and `.vec` are text, everything else binary.
pub fn format_for_output(path: &Path) -> VectorFormat {
    match path.extension().and_then(|e| e.to_str()) {
        Some("txt" | "vec") => VectorFormat::Text,
        _ => VectorFormat::Binary,
    }
}

/// Text files are valid UTF-8 without control bytes after the header;
/// binary ones almost never are.
pub fn sniff_format(path: &Path) -> Result<VectorFormat> {
    let mut head = Vec::new();
    File::open(path)
        .with_context(|| format!("opening {}", path.display()))?
        .take(8192)
        .read_to_end(&mut head)?;
    let body = match head.iter().position(|&b| b == b'\n') {
        Some(end) => &head[end + 1..],
        None => &[][..],
    };
    let binary = body.iter().any(|&b| b < 0x20 && b != b'\n' && b != b'\t' && b != b'\r')
        || match std::str::from_utf8(body) {
            Ok(_) => false,
            // A multi-byte character cut at the 8 KiB boundary is fine.
            Err(e) => e.error_len().is_some(),
        };
    Ok(if binary { VectorFormat::Binary } else { VectorFormat::Text })
}

pub fn load(path: &Path, format: Option<VectorFormat>) -> Result<WordVectors> {
    let format = match format {
        Some(f) => f,
        None => sniff_format(path)?,
    };
    let reader = BufReader::new(File::open(path).with_context(|| format!("opening {}", path.display()))?);
    load_vectors(reader, format).with_context(|| format!("reading {}", path.display()))
}

pub fn save(path: &Path, vectors: &WordVectors, format: VectorFormat) -> Result<()> {
    let writer = BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
    save_vectors(writer, vectors.words(), vectors.dim(), vectors.data(), format)
        .with_context(|| format!("writing {}", path.display()))
}
