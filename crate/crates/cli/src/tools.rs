//! `probe-report` and `convert`.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};

use anyhow::{Context, Result};
use csg_core::eval::probe::read_probe_csv;
use csg_core::eval::ProbeRecord;

use crate::error::usage;
use crate::manifest::{sha256_file, RunManifest};
use crate::{vectors, ConvertArgs, ProbeReportArgs};

fn cell(mean: Option<f64>) -> String {
    mean.map_or_else(|| "-".to_owned(), |m| format!("{m:.2}"))
}

/// One row per (run, word), one column per epoch.
pub fn render_table(runs: &[(String, Vec<ProbeRecord>)]) -> String {
    let epochs: BTreeSet<usize> = runs.iter().flat_map(|(_, r)| r.iter().map(|r| r.epoch)).collect();
    let run_width = runs.iter().map(|(l, _)| l.len()).max().unwrap_or(0).max(3);
    let word_width = runs
        .iter()
        .flat_map(|(_, r)| r.iter().map(|r| r.context_word.len()))
        .max()
        .unwrap_or(0)
        .max(4);
    let mut out = format!("{:run_width$}  {:word_width$}", "run", "word");
    for e in &epochs {
        out.push_str(&format!("  {:>7}", format!("epoch{e}")));
    }
    out.push('\n');
    for (label, records) in runs {
        let mut words: Vec<&str> = Vec::new();
        for r in records {
            if !words.contains(&r.context_word.as_str()) {
                words.push(&r.context_word);
            }
        }
        for word in words {
            out.push_str(&format!("{label:run_width$}  {word:word_width$}"));
            for e in &epochs {
                let mean = records
                    .iter()
                    .find(|r| r.epoch == *e && r.context_word == word)
                    .and_then(|r| r.mean_score_x100);
                out.push_str(&format!("  {:>7}", cell(mean)));
            }
            out.push('\n');
        }
    }
    out
}

pub fn probe_report(args: ProbeReportArgs) -> Result<()> {
    let mut runs = Vec::new();
    for path in &args.inputs {
        let file = File::open(path).map_err(|e| usage(format!("cannot open {}: {e}", path.display())))?;
        let records = read_probe_csv(BufReader::new(file)).with_context(|| format!("reading {}", path.display()))?;
        let name = path.file_name().map_or_else(String::new, |n| n.to_string_lossy().into_owned());
        // `run.bin.probe.csv` -> `run`
        let stem = name.strip_suffix(".probe.csv").unwrap_or(&name);
        let label = std::path::Path::new(stem)
            .file_stem()
            .map_or_else(|| stem.to_owned(), |s| s.to_string_lossy().into_owned());
        runs.push((label, records));
    }
    print!("{}", render_table(&runs));

    if let Some(summary) = &args.summary {
        let mut w = BufWriter::new(File::create(summary).with_context(|| format!("creating {}", summary.display()))?);
        for (label, records) in &runs {
            for r in records {
                let key = format!("probe.{label}.{}.epoch{}", r.context_word, r.epoch);
                writeln!(w, "{key}.mean_x100={}", r.mean_score_x100.map_or(String::new(), |m| format!("{m:.2}")))?;
                writeln!(w, "{key}.n={}", r.observations)?;
            }
        }
        w.flush()?;
        let mut manifest = RunManifest::new("probe-report");
        for (i, path) in args.inputs.iter().enumerate() {
            manifest.set_path(format!("input.{i}"), path);
        }
        manifest.set_path("output.summary", summary);
        manifest.write_next_to(summary)?;
    }
    Ok(())
}

pub fn convert(args: ConvertArgs) -> Result<()> {
    if !args.input.is_file() {
        return Err(usage(format!("no such file {}", args.input.display())));
    }
    let from = vectors::parse_format(args.from.as_deref())?;
    let to = vectors::parse_format(args.to.as_deref())?.unwrap_or_else(|| vectors::format_for_output(&args.output));
    let loaded = vectors::load(&args.input, from)?;
    vectors::save(&args.output, &loaded, to)?;
    eprintln!("converted {} vectors of dimension {}", loaded.len(), loaded.dim());

    let mut manifest = RunManifest::new("convert");
    manifest.set_path("input", &args.input);
    manifest.set("input.sha256", sha256_file(&args.input)?);
    manifest.set("output.format", format!("{to:?}").to_ascii_lowercase());
    manifest.set("rows", loaded.len());
    manifest.set("dim", loaded.dim());
    manifest.set_path("output", &args.output);
    manifest.write_next_to(&args.output)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(epoch: usize, word: &str, mean: Option<f64>) -> ProbeRecord {
        ProbeRecord {
            epoch,
            context_word: word.into(),
            mean_score_x100: mean,
            observations: mean.map_or(0, |_| 3),
        }
    }

    #[test]
    fn table_layout() {
        let runs = vec![
            ("sg".to_owned(), vec![rec(1, "an", Some(36.65)), rec(1, "cold", None), rec(2, "an", Some(35.0))]),
            ("csg".to_owned(), vec![rec(1, "an", Some(40.0))]),
        ];
        let table = render_table(&runs);
        let lines: Vec<&str> = table.lines().collect();
        assert_eq!(lines[0], "run  word   epoch1   epoch2");
        assert_eq!(lines[1], "sg   an      36.65    35.00");
        assert_eq!(lines[2], "sg   cold        -        -");
        assert_eq!(lines[3], "csg  an      40.00        -");
    }
}
