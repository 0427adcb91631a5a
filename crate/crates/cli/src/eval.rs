//! `eval-sim` and `eval-analogy`.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use csg_core::eval::{
    eval_analogy, eval_similarity, write_analogy_summary, write_similarity_summary, AnalogyDataset,
    SimilarityDataset, SimilarityFormat,
};

use crate::error::usage;
use crate::manifest::{sibling, RunManifest};
use crate::{vectors, EvalArgs};

pub const DATA_DIR_VAR: &str = "CSG_DATA_DIR";

/// Benchmark name, accepted file names under `$CSG_DATA_DIR`.
const KNOWN: &[(&str, &[&str])] = &[
    ("simlex", &["simlex999.txt", "SimLex-999.txt"]),
    ("ws353", &["ws353.txt", "wordsim353.tsv", "combined.tab", "combined.csv"]),
    ("men", &["men.txt", "MEN_dataset_natural_form_full"]),
    ("google", &["questions-words.txt"]),
    ("msr", &["msr.txt", "word_relationship.questions"]),
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Layout {
    Similarity(SimilarityFormat),
    Google,
    Msr,
}

fn layout_named(name: &str) -> Option<Layout> {
    Some(match name {
        "simlex" => Layout::Similarity(SimilarityFormat::SimLex),
        "ws353" | "wordsim" => Layout::Similarity(SimilarityFormat::WordSim),
        "men" => Layout::Similarity(SimilarityFormat::Men),
        "google" => Layout::Google,
        "msr" => Layout::Msr,
        _ => return None,
    })
}

struct Dataset {
    name: String,
    path: PathBuf,
    layout: Layout,
}

fn resolve(dataset: &str, format: Option<&str>) -> Result<Dataset> {
    let explicit = format
        .map(|f| layout_named(&f.to_ascii_lowercase()).ok_or_else(|| usage(format!("unknown dataset format `{f}`"))))
        .transpose()?;
    if let Some((name, files)) = KNOWN.iter().find(|(n, _)| *n == dataset) {
        let dir = std::env::var_os(DATA_DIR_VAR)
            .ok_or_else(|| usage(format!("dataset `{name}` needs ${DATA_DIR_VAR} or pass a file path")))?;
        let dir = PathBuf::from(dir);
        let path = files
            .iter()
            .map(|f| dir.join(f))
            .find(|p| p.is_file())
            .ok_or_else(|| usage(format!("none of {files:?} found in {}", dir.display())))?;
        return Ok(Dataset {
            name: name.to_string(),
            path,
            layout: explicit.or_else(|| layout_named(name)).unwrap(),
        });
    }
    let path = PathBuf::from(dataset);
    if !path.is_file() {
        return Err(usage(format!("dataset `{dataset}` is neither a known name nor a file")));
    }
    let name = path
        .file_stem()
        .map_or_else(|| "dataset".to_owned(), |s| s.to_string_lossy().into_owned());
    let layout = match explicit {
        Some(l) => l,
        None => guess_layout(&path, &name)?,
    };
    Ok(Dataset { name, path, layout })
}

fn guess_layout(path: &Path, name: &str) -> Result<Layout> {
    let lower = name.to_ascii_lowercase();
    let first = BufReader::new(File::open(path)?)
        .lines()
        .find(|l| l.as_ref().map_or(true, |l| !l.trim().is_empty()))
        .transpose()?
        .unwrap_or_default();
    Ok(if first.starts_with(':') {
        Layout::Google
    } else if lower.contains("simlex") {
        Layout::Similarity(SimilarityFormat::SimLex)
    } else if lower.contains("men") {
        Layout::Similarity(SimilarityFormat::Men)
    } else if first.split_whitespace().count() == 4 && first.split_whitespace().all(|w| w.parse::<f64>().is_err()) {
        Layout::Msr
    } else {
        Layout::Similarity(SimilarityFormat::WordSim)
    })
}

fn open(path: &Path) -> Result<BufReader<File>> {
    Ok(BufReader::new(File::open(path).with_context(|| format!("opening {}", path.display()))?))
}

fn write_summary(args: &EvalArgs, dataset: &Dataset, command: &str, body: &[u8]) -> Result<()> {
    let summary = args
        .summary
        .clone()
        .unwrap_or_else(|| sibling(&args.vectors, &format!("{}.summary", dataset.name)));
    let mut w = BufWriter::new(File::create(&summary).with_context(|| format!("creating {}", summary.display()))?);
    w.write_all(body)?;
    w.flush()?;
    std::io::stdout().write_all(body)?;

    let mut manifest = RunManifest::new(command);
    manifest.set_path("vectors", &args.vectors);
    manifest.set("dataset", &dataset.name);
    manifest.set_path("dataset.path", &dataset.path);
    manifest.set_path("output.summary", &summary);
    manifest.write_next_to(&summary)?;
    Ok(())
}

pub fn similarity(args: EvalArgs) -> Result<()> {
    let dataset = resolve(&args.dataset, args.dataset_format.as_deref())?;
    let Layout::Similarity(format) = dataset.layout else {
        return Err(usage(format!("`{}` is an analogy dataset; use eval-analogy", args.dataset)));
    };
    let pairs = SimilarityDataset::parse(&dataset.name, open(&dataset.path)?, format)
        .with_context(|| format!("parsing {}", dataset.path.display()))?;
    let vectors = vectors::load(&args.vectors, vectors::parse_format(args.vector_format.as_deref())?)?;
    let report = eval_similarity(&vectors, &pairs)?;
    eprintln!(
        "{}: rho x100 = {:.2} over {} pairs ({} skipped)",
        report.dataset,
        report.rho * 100.0,
        report.pairs_used,
        report.pairs_skipped
    );
    let mut body = Vec::new();
    write_similarity_summary(&mut body, &report)?;
    write_summary(&args, &dataset, "eval-sim", &body)
}

pub fn analogy(args: EvalArgs) -> Result<()> {
    let dataset = resolve(&args.dataset, args.dataset_format.as_deref())?;
    let questions = match dataset.layout {
        Layout::Google => AnalogyDataset::parse_google(&dataset.name, open(&dataset.path)?),
        Layout::Msr => AnalogyDataset::parse_msr(&dataset.name, open(&dataset.path)?),
        Layout::Similarity(_) => {
            return Err(usage(format!("`{}` is a similarity dataset; use eval-sim", args.dataset)))
        }
    }
    .with_context(|| format!("parsing {}", dataset.path.display()))?;
    let vectors = vectors::load(&args.vectors, vectors::parse_format(args.vector_format.as_deref())?)?;
    let report = eval_analogy(&vectors, &questions);
    for s in [&report.semantic, &report.syntactic, &report.overall] {
        eprintln!(
            "{}: {:.2}% ({}/{} answerable, {} unanswerable)",
            s.name,
            s.accuracy() * 100.0,
            s.correct,
            s.answerable,
            s.unanswerable
        );
    }
    let mut body = Vec::new();
    write_analogy_summary(&mut body, &report)?;
    write_summary(&args, &dataset, "eval-analogy", &body)
}
