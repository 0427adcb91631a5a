//! Intrinsic evaluation: word similarity (Spearman ρ over cosine scores),
//! 3CosAdd word analogy and the prediction-probability probe.

pub mod datasets;
pub mod probe;

pub use self::datasets::{
    AnalogyDataset, AnalogySection, SectionKind, SimilarityDataset, SimilarityFormat,
    SimilarityPair,
};
pub use self::probe::{ProbeBuffer, ProbeRecord, ProbeSpec};

use std::cmp::Ordering;
use std::io::Write;

use crate::error::{Error, Result};
use crate::linalg::{dot, normalize};
use crate::model::WordVectors;

/// Average ranks (1-based) with ties sharing the mean of their positions.
pub fn fractional_ranks(xs: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&a, &b| xs[a].partial_cmp(&xs[b]).unwrap_or(Ordering::Equal));
    let mut ranks = vec![0.0; xs.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && xs[order[end]] == xs[order[start]] {
            end += 1;
        }
        // Positions start..end hold equal values; ranks start+1..=end.
        let rank = (start + 1 + end) as f64 / 2.0;
        for &idx in &order[start..end] {
            ranks[idx] = rank;
        }
        start = end;
    }
    ranks
}

fn pearson(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    (sxx > 0.0 && syy > 0.0).then(|| (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Spearman rank correlation: Pearson correlation of fractional ranks.
pub fn spearman(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::UndefinedCorrelation(format!(
            "length mismatch ({} vs {})",
            xs.len(),
            ys.len()
        )));
    }
    if xs.len() < 2 {
        return Err(Error::UndefinedCorrelation("fewer than two observations".into()));
    }
    if xs.iter().chain(ys).any(|v| v.is_nan()) {
        return Err(Error::UndefinedCorrelation("NaN input".into()));
    }
    pearson(&fractional_ranks(xs), &fractional_ranks(ys))
        .ok_or_else(|| Error::UndefinedCorrelation("zero rank variance".into()))
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimilarityReport {
    pub dataset: String,
    pub rho: f64,
    pub pairs_used: usize,
    pub pairs_skipped: usize,
}

/// Cosine of unit-normalized vectors for every pair with both words known,
/// correlated against the human scores.
pub fn eval_similarity(vectors: &WordVectors, dataset: &SimilarityDataset) -> Result<SimilarityReport> {
    let mut model_scores = Vec::with_capacity(dataset.pairs.len());
    let mut human_scores = Vec::with_capacity(dataset.pairs.len());
    let mut a = vec![0.0; vectors.dim()];
    let mut b = vec![0.0; vectors.dim()];
    for pair in &dataset.pairs {
        let (Some(va), Some(vb)) = (vectors.get(&pair.word_a), vectors.get(&pair.word_b)) else {
            continue;
        };
        a.copy_from_slice(va);
        b.copy_from_slice(vb);
        normalize(&mut a);
        normalize(&mut b);
        model_scores.push(dot(&a, &b) as f64);
        human_scores.push(pair.human_score);
    }
    let used = model_scores.len();
    let skipped = dataset.pairs.len() - used;
    if used == 0 {
        return Err(Error::NothingToEvaluate { skipped });
    }
    Ok(SimilarityReport {
        dataset: dataset.name.clone(),
        rho: spearman(&model_scores, &human_scores)?,
        pairs_used: used,
        pairs_skipped: skipped,
    })
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SectionResult {
    pub name: String,
    pub kind: Option<SectionKind>,
    pub correct: usize,
    pub answerable: usize,
    pub unanswerable: usize,
}

impl SectionResult {
    /// Correct over answerable questions; 0 when nothing was answerable.
    pub fn accuracy(&self) -> f64 {
        if self.answerable == 0 {
            0.0
        } else {
            self.correct as f64 / self.answerable as f64
        }
    }

    fn absorb(&mut self, other: &SectionResult) {
        self.correct += other.correct;
        self.answerable += other.answerable;
        self.unanswerable += other.unanswerable;
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AnalogyReport {
    pub dataset: String,
    pub sections: Vec<SectionResult>,
    pub semantic: SectionResult,
    pub syntactic: SectionResult,
    pub overall: SectionResult,
}

/// Index of the word whose unit vector has the highest cosine with
/// `unit(b) − unit(a) + unit(c)`, excluding the three query words. `unit`
/// must hold L2-normalized rows. Ties go to the lower index.
pub fn analogy_argmax(unit: &WordVectors, a: usize, b: usize, c: usize) -> Option<usize> {
    let mut query: Vec<f32> = unit
        .row(b)
        .iter()
        .zip(unit.row(a))
        .zip(unit.row(c))
        .map(|((vb, va), vc)| vb - va + vc)
        .collect();
    normalize(&mut query);
    let mut best: Option<(usize, f32)> = None;
    for idx in 0..unit.len() {
        if idx == a || idx == b || idx == c {
            continue;
        }
        let sim = dot(&query, unit.row(idx));
        if best.map_or(true, |(_, s)| sim > s) {
            best = Some((idx, sim));
        }
    }
    best.map(|(idx, _)| idx)
}

/// 3CosAdd top-1 accuracy per section. A question is answerable when all
/// four words are in the vocabulary.
pub fn eval_analogy(vectors: &WordVectors, dataset: &AnalogyDataset) -> AnalogyReport {
    let unit = vectors.normalized();
    let mut sections = Vec::with_capacity(dataset.sections.len());
    for section in &dataset.sections {
        let mut result = SectionResult {
            name: section.name.clone(),
            kind: Some(section.kind),
            ..SectionResult::default()
        };
        let answerable: Vec<[usize; 4]> = section
            .questions
            .iter()
            .filter_map(|q| {
                let ids = [unit.index(&q[0]), unit.index(&q[1]), unit.index(&q[2]), unit.index(&q[3])];
                ids.iter().all(Option::is_some).then(|| ids.map(Option::unwrap))
            })
            .collect();
        result.unanswerable = section.questions.len() - answerable.len();
        result.answerable = answerable.len();
        result.correct = count_correct(&unit, &answerable);
        sections.push(result);
    }

    let mut semantic = SectionResult {
        name: "semantic".into(),
        kind: Some(SectionKind::Semantic),
        ..SectionResult::default()
    };
    let mut syntactic = SectionResult {
        name: "syntactic".into(),
        kind: Some(SectionKind::Syntactic),
        ..SectionResult::default()
    };
    let mut overall = SectionResult {
        name: "overall".into(),
        ..SectionResult::default()
    };
    for s in &sections {
        match s.kind {
            Some(SectionKind::Semantic) => semantic.absorb(s),
            Some(SectionKind::Syntactic) => syntactic.absorb(s),
            None => {}
        }
        overall.absorb(s);
    }
    AnalogyReport {
        dataset: dataset.name.clone(),
        sections,
        semantic,
        syntactic,
        overall,
    }
}

fn count_correct(unit: &WordVectors, questions: &[[usize; 4]]) -> usize {
    let solve = |qs: &[[usize; 4]]| {
        qs.iter()
            .filter(|&&[a, b, c, d]| analogy_argmax(unit, a, b, c) == Some(d))
            .count()
    };
    #[cfg(not(target_arch = "wasm32"))]
    {
        let threads = std::thread::available_parallelism().map_or(1, |n| n.get());
        if threads > 1 && questions.len() >= 64 {
            let chunk = questions.len().div_ceil(threads);
            return std::thread::scope(|scope| {
                let handles: Vec<_> = questions
                    .chunks(chunk)
                    .map(|qs| scope.spawn(move || solve(qs)))
                    .collect();
                handles.into_iter().map(|h| h.join().unwrap()).sum()
            });
        }
    }
    solve(questions)
}

/// Append `key=value` lines for a similarity result.
pub fn write_similarity_summary<W: Write>(mut w: W, report: &SimilarityReport) -> Result<()> {
    let key = &report.dataset;
    writeln!(w, "sim.{key}.rho={:.6}", report.rho)?;
    writeln!(w, "sim.{key}.rho_x100={:.2}", report.rho * 100.0)?;
    writeln!(w, "sim.{key}.pairs_used={}", report.pairs_used)?;
    writeln!(w, "sim.{key}.pairs_skipped={}", report.pairs_skipped)?;
    Ok(())
}

/// Append `key=value` lines for an analogy result.
pub fn write_analogy_summary<W: Write>(mut w: W, report: &AnalogyReport) -> Result<()> {
    let key = &report.dataset;
    for s in report
        .sections
        .iter()
        .chain([&report.semantic, &report.syntactic, &report.overall])
    {
        writeln!(w, "analogy.{key}.{}.accuracy={:.6}", s.name, s.accuracy())?;
        writeln!(w, "analogy.{key}.{}.correct={}", s.name, s.correct)?;
        writeln!(w, "analogy.{key}.{}.answerable={}", s.name, s.answerable)?;
        writeln!(w, "analogy.{key}.{}.unanswerable={}", s.name, s.unanswerable)?;
    }
    Ok(())
}
