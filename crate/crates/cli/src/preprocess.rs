use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};

use anyhow::{Context, Result};
use csg_core::corpus::{chunk_unstructured, read_tokens, sample_sentences, Preprocessor, Sentence};

use crate::error::usage;
use crate::manifest::{sha256_file, RunManifest};
use crate::PreprocessArgs;

pub fn run(args: PreprocessArgs) -> Result<()> {
    let stdin = args.input.as_os_str() == "-";
    let reader: Box<dyn BufRead> = if stdin {
        Box::new(io::stdin().lock())
    } else {
        let file = File::open(&args.input)
            .map_err(|e| usage(format!("cannot open {}: {e}", args.input.display())))?;
        Box::new(BufReader::new(file))
    };
    let mut manifest = RunManifest::new("preprocess");
    manifest.set_path("input", &args.input);
    if !stdin {
        manifest.set("input.sha256", sha256_file(&args.input)?);
    }
    manifest.set("min-tokens", args.min_tokens);
    manifest.set("sample-rate", args.sample_rate);
    manifest.set("seed", args.seed);
    manifest.set("unstructured", args.unstructured);

    let mut out = BufWriter::new(
        File::create(&args.output).with_context(|| format!("creating {}", args.output.display()))?,
    );
    let mut kept = (0u64, 0u64);
    let mut write = |s: Sentence| -> io::Result<()> {
        kept.0 += 1;
        kept.1 += s.len() as u64;
        writeln!(out, "{s}")
    };

    if args.unstructured {
        manifest.set("chunk-len", args.chunk_len);
        let mut read_error = None;
        let tokens = read_tokens(reader).map_while(|t| t.map_err(|e| read_error = Some(e)).ok());
        let chunks = chunk_unstructured(tokens, args.chunk_len).map_err(|e| usage(e.to_string()))?;
        for s in sample_sentences(chunks, args.sample_rate, args.seed).map_err(|e| usage(e.to_string()))? {
            write(s)?;
        }
        if let Some(e) = read_error {
            return Err(e).context("reading input");
        }
    } else {
        let mut pre = Preprocessor::new(reader, args.min_tokens).map_err(|e| usage(e.to_string()))?;
        let mut read_error = None;
        let sentences = pre.by_ref().map_while(|s| s.map_err(|e| read_error = Some(e)).ok());
        for s in sample_sentences(sentences, args.sample_rate, args.seed).map_err(|e| usage(e.to_string()))? {
            write(s)?;
        }
        if let Some(e) = read_error {
            return Err(e).context("reading input");
        }
        let stats = pre.stats();
        manifest.set("stats.total_sentences", stats.total_sentences);
        manifest.set("stats.total_tokens", stats.total_tokens);
        manifest.set("stats.sentences_dropped", stats.sentences_dropped);
        manifest.set("stats.invalid_utf8", stats.invalid_utf8);
        if stats.invalid_utf8 > 0 {
            eprintln!("replaced {} invalid UTF-8 sequences", stats.invalid_utf8);
        }
    }
    out.flush()?;
    drop(out);

    manifest.set("output.sentences", kept.0);
    manifest.set("output.tokens", kept.1);
    manifest.set_path("output", &args.output);
    eprintln!("wrote {} sentences, {} tokens to {}", kept.0, kept.1, args.output.display());
    manifest.write_next_to(&args.output)?;
    Ok(())
}
