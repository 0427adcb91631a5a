//! word2vec text and binary vector formats.
//!
//! Both start with an ASCII header `"<rows> <dim>\n"`. Text rows are
//! `word x1 … xd\n`; binary rows are the word bytes, a single space and `dim`
//! little-endian `f32`s. The binary reader also accepts the newline that the
//! original C tool writes after each vector.

use std::io::{BufRead, ErrorKind, Write};
use std::str::FromStr;

use super::WordVectors;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VectorFormat {
    Text,
    Binary,
}

impl FromStr for VectorFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "text" | "txt" => Ok(VectorFormat::Text),
            "binary" | "bin" => Ok(VectorFormat::Binary),
            other => Err(Error::Config(format!("unknown vector format `{other}`"))),
        }
    }
}

pub fn save_vectors<W: Write>(
    mut writer: W,
    words: &[String],
    dim: usize,
    matrix: &[f32],
    format: VectorFormat,
) -> Result<()> {
    if dim == 0 || matrix.len() != words.len() * dim {
        return Err(Error::Config(format!(
            "cannot save {} words with a {}-value matrix at dimension {dim}",
            words.len(),
            matrix.len()
        )));
    }
    writeln!(writer, "{} {}", words.len(), dim)?;
    for (word, row) in words.iter().zip(matrix.chunks_exact(dim)) {
        match format {
            VectorFormat::Text => {
                writer.write_all(word.as_bytes())?;
                for x in row {
                    // Shortest representation that parses back to the same f32.
                    write!(writer, " {x}")?;
                }
                writer.write_all(b"\n")?;
            }
            VectorFormat::Binary => {
                writer.write_all(word.as_bytes())?;
                writer.write_all(b" ")?;
                for x in row {
                    writer.write_all(&x.to_le_bytes())?;
                }
            }
        }
    }
    writer.flush()?;
    Ok(())
}

fn parse_header(line: &str) -> Result<(usize, usize)> {
    let mut fields = line.split_whitespace();
    let mut next = || -> Result<usize> {
        fields
            .next()
            .and_then(|f| f.parse().ok())
            .ok_or_else(|| Error::MalformedHeader(line.trim_end().to_owned()))
    };
    let rows = next()?;
    let dim = next()?;
    if fields.next().is_some() || dim == 0 {
        return Err(Error::MalformedHeader(line.trim_end().to_owned()));
    }
    Ok((rows, dim))
}

pub fn load_vectors<R: BufRead>(mut reader: R, format: VectorFormat) -> Result<WordVectors> {
    let mut header = Vec::new();
    reader.read_until(b'\n', &mut header)?;
    if header.last() != Some(&b'\n') {
        return Err(Error::MalformedHeader(String::from_utf8_lossy(&header).into_owned()));
    }
    let header = std::str::from_utf8(&header)
        .map_err(|_| Error::MalformedHeader("header is not ASCII".into()))?;
    let (rows, dim) = parse_header(header)?;

    let (words, data) = match format {
        VectorFormat::Text => read_text_rows(reader, rows, dim)?,
        VectorFormat::Binary => read_binary_rows(reader, rows, dim)?,
    };
    WordVectors::new(words, dim, data)
}

fn read_text_rows<R: BufRead>(reader: R, rows: usize, dim: usize) -> Result<(Vec<String>, Vec<f32>)> {
    let mut words = Vec::with_capacity(rows);
    let mut data = Vec::with_capacity(rows * dim);
    let mut lines = reader.lines();
    for row in 0..rows {
        let line_no = row + 2;
        let line = lines
            .next()
            .transpose()?
            .ok_or_else(|| Error::Truncated(format!("expected {rows} rows, found {row}")))?;
        let mut fields = line.split_whitespace();
        let word = fields
            .next()
            .ok_or_else(|| Error::Truncated(format!("line {line_no} is empty")))?;
        words.push(word.to_owned());
        let before = data.len();
        for field in fields {
            let value = field.parse::<f32>().map_err(|_| Error::Parse {
                line: line_no,
                message: format!("`{field}` is not a number"),
            })?;
            data.push(value);
        }
        let found = data.len() - before;
        if found < dim {
            return Err(Error::Truncated(format!(
                "line {line_no} has {found} of {dim} components"
            )));
        }
        if found > dim {
            return Err(Error::DimensionMismatch {
                line: line_no,
                expected: dim,
                found,
            });
        }
    }
    Ok((words, data))
}

fn read_binary_rows<R: BufRead>(
    mut reader: R,
    rows: usize,
    dim: usize,
) -> Result<(Vec<String>, Vec<f32>)> {
    let mut words = Vec::with_capacity(rows);
    let mut data = Vec::with_capacity(rows * dim);
    let mut word = Vec::new();
    let mut raw = vec![0u8; dim * 4];
    for row in 0..rows {
        word.clear();
        reader.read_until(b' ', &mut word)?;
        if word.pop() != Some(b' ') {
            return Err(Error::Truncated(format!("expected {rows} rows, found {row}")));
        }
        let start = word.iter().position(|&b| b != b'\n').unwrap_or(word.len());
        words.push(String::from_utf8_lossy(&word[start..]).into_owned());

        reader.read_exact(&mut raw).map_err(|e| match e.kind() {
            ErrorKind::UnexpectedEof => {
                Error::Truncated(format!("row {} has fewer than {dim} components", row + 1))
            }
            _ => Error::Io(e),
        })?;
        data.extend(
            raw.chunks_exact(4)
                .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]])),
        );
    }
    Ok((words, data))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn words(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("w{i}")).collect()
    }

    #[test]
    fn text_layout() {
        let mut buf = Vec::new();
        save_vectors(&mut buf, &["w".into()], 2, &[0.0, 0.0], VectorFormat::Text).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "1 2\nw 0 0\n");
    }

    #[test]
    fn binary_layout() {
        let mut buf = Vec::new();
        save_vectors(&mut buf, &["ab".into()], 1, &[1.0], VectorFormat::Binary).unwrap();
        let mut expected = b"1 1\nab ".to_vec();
        expected.extend(1f32.to_le_bytes());
        assert_eq!(buf, expected);
    }

    #[test]
    fn binary_round_trip_is_exact() {
        let data: Vec<f32> = (0..50 * 20).map(|i| ((i * 7919) as f32).sin() * 1e3).collect();
        let mut buf = Vec::new();
        save_vectors(&mut buf, &words(50), 20, &data, VectorFormat::Binary).unwrap();
        let loaded = load_vectors(&buf[..], VectorFormat::Binary).unwrap();
        assert_eq!(loaded.words(), words(50));
        assert!(loaded.data().iter().zip(&data).all(|(a, b)| a.to_bits() == b.to_bits()));
    }

    #[test]
    fn binary_reader_accepts_c_tool_newlines() {
        let mut buf = b"2 1\na ".to_vec();
        buf.extend(1f32.to_le_bytes());
        buf.extend(b"\nb ");
        buf.extend(2f32.to_le_bytes());
        buf.push(b'\n');
        let loaded = load_vectors(&buf[..], VectorFormat::Binary).unwrap();
        assert_eq!(loaded.words(), ["a", "b"]);
        assert_eq!(loaded.data(), [1.0, 2.0]);
    }

    #[test]
    fn short_text_line_is_truncation() {
        let mut text = String::from("1 200\nw");
        for _ in 0..199 {
            text.push_str(" 0.5");
        }
        text.push('\n');
        assert!(matches!(
            load_vectors(text.as_bytes(), VectorFormat::Text),
            Err(Error::Truncated(_))
        ));
    }

    #[test]
    fn long_text_line_is_dimension_mismatch() {
        assert!(matches!(
            load_vectors(&b"1 2\nw 1 2 3\n"[..], VectorFormat::Text),
            Err(Error::DimensionMismatch { line: 2, expected: 2, found: 3 })
        ));
    }

    #[test]
    fn missing_rows_and_bad_headers() {
        assert!(matches!(
            load_vectors(&b"2 1\nw 1\n"[..], VectorFormat::Text),
            Err(Error::Truncated(_))
        ));
        for header in [&b"two 1\n"[..], b"1\n", b"1 2 3\n", b"1 0\n", b"1 2"] {
            assert!(matches!(
                load_vectors(header, VectorFormat::Text),
                Err(Error::MalformedHeader(_))
            ));
        }
        let mut buf = b"1 2\nw ".to_vec();
        buf.extend(1f32.to_le_bytes());
        assert!(matches!(
            load_vectors(&buf[..], VectorFormat::Binary),
            Err(Error::Truncated(_))
        ));
    }
}
