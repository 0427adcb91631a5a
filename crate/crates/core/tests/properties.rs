use csg_core::corpus::{preprocess, sample_sentences, write_sentences, Sentence};
use csg_core::eval::{
    eval_analogy, eval_similarity, spearman, AnalogyDataset, AnalogySection, SectionKind,
    SimilarityDataset, SimilarityPair,
};
use csg_core::model::{load_vectors, save_vectors, VectorFormat, WordVectors};
use csg_core::trainer::{gamma_for, lr_schedule, GammaSchedule, LR_FLOOR};
use csg_core::vocab::{build_vocab, NoiseTable, Vocabulary};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_pcg::Pcg64Mcg;

fn raw_text() -> impl Strategy<Value = String> {
    proptest::string::string_regex("([a-zA-Zé]{1,6}[.!?]{0,2}[ \n]{1,2}){0,40}").unwrap()
}

fn word_vectors(words: usize, dim: usize) -> impl Strategy<Value = WordVectors> {
    prop::collection::vec(-1.0f32..1.0, words * dim).prop_map(move |data| {
        let names = (0..words).map(|i| format!("w{i}")).collect();
        WordVectors::new(names, dim, data).unwrap()
    })
}

proptest! {
    #[test]
    fn preprocess_is_idempotent(text in raw_text(), min in 1usize..5) {
        let (once, _) = preprocess(text.as_bytes(), min).unwrap();
        let mut buf = Vec::new();
        write_sentences(&mut buf, &once).unwrap();
        let (twice, stats) = preprocess(&buf[..], min).unwrap();
        prop_assert_eq!(&twice, &once);
        prop_assert_eq!(stats.sentences_dropped, 0);
    }

    #[test]
    fn sampling_is_deterministic(n in 0usize..300, rate in 0.0f64..=1.0, seed: u64) {
        let sentences: Vec<Sentence> = (0..n).map(|i| Sentence::from_line(&format!("s{i}"))).collect();
        let a: Vec<_> = sample_sentences(sentences.iter(), rate, seed).unwrap().collect();
        let b: Vec<_> = sample_sentences(sentences.iter(), rate, seed).unwrap().collect();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn vocab_ignores_sentence_order(lines in prop::collection::vec("[a-e]( [a-e]){0,6}", 1..20), seed: u64) {
        let sentences: Vec<Sentence> = lines.iter().map(|l| Sentence::from_line(l)).collect();
        let mut shuffled = sentences.clone();
        rand::seq::SliceRandom::shuffle(&mut shuffled[..], &mut Pcg64Mcg::seed_from_u64(seed));
        let a = build_vocab(&sentences, 1).unwrap();
        let b = build_vocab(&shuffled, 1).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn noise_table_shares(counts in prop::collection::vec(1u64..5000, 1..40), extra in 0usize..500) {
        let vocab = Vocabulary::from_counts(counts.iter().enumerate().map(|(i, &c)| (format!("w{i}"), c))).unwrap();
        let size = vocab.len() * 10 + extra;
        let table = NoiseTable::new(&vocab, 0.75, size).unwrap();
        prop_assert_eq!(table.len(), size);
        let total: f64 = vocab.counts().iter().map(|&c| (c as f64).powf(0.75)).sum();
        let mut occupied = vec![0usize; vocab.len()];
        for &id in table.entries() {
            prop_assert!((id as usize) < vocab.len());
            occupied[id as usize] += 1;
        }
        for (id, &n) in occupied.iter().enumerate() {
            let share = size as f64 * (vocab.counts()[id] as f64).powf(0.75) / total;
            prop_assert!((n as f64 - share).abs() <= 1.0 + 1e-9, "word {id}: {n} vs {share}");
        }
    }

    #[test]
    fn spearman_ignores_monotone_transforms(
        pairs in prop::collection::vec((-50i32..50, -50i32..50), 3..40)
    ) {
        let xs: Vec<f64> = pairs.iter().map(|p| p.0 as f64).collect();
        let ys: Vec<f64> = pairs.iter().map(|p| p.1 as f64).collect();
        let Ok(rho) = spearman(&xs, &ys) else { return Ok(()) };
        let cubed: Vec<f64> = xs.iter().map(|x| x * x * x + 7.0).collect();
        let exp: Vec<f64> = ys.iter().map(|y| (y / 10.0).exp()).collect();
        prop_assert!((spearman(&cubed, &exp).unwrap() - rho).abs() < 1e-12);
        prop_assert!((-1.0..=1.0).contains(&rho));
    }

    #[test]
    fn analogy_ignores_global_scale(vectors in word_vectors(12, 6), scale in 0.01f32..100.0) {
        let questions = (0..12)
            .map(|i| [i, (i + 3) % 12, (i + 5) % 12, (i + 7) % 12].map(|j| format!("w{j}")))
            .collect();
        let dataset = AnalogyDataset {
            name: "toy".into(),
            sections: vec![AnalogySection { name: "s".into(), kind: SectionKind::Semantic, questions }],
        };
        let mut scaled = vectors.clone();
        scaled.scale(scale);
        prop_assert_eq!(eval_analogy(&vectors, &dataset), eval_analogy(&scaled, &dataset));
    }

    #[test]
    fn similarity_normalization_is_idempotent(vectors in word_vectors(10, 5), scores in prop::collection::vec(0.0f64..10.0, 15)) {
        let pairs = scores
            .iter()
            .enumerate()
            .map(|(i, &s)| SimilarityPair { word_a: format!("w{}", i % 10), word_b: format!("w{}", (i * 7 + 1) % 10), human_score: s })
            .collect();
        let dataset = SimilarityDataset::new("toy", pairs).unwrap();
        let once = vectors.normalized();
        let twice = once.normalized();
        match (eval_similarity(&once, &dataset), eval_similarity(&twice, &dataset)) {
            (Ok(a), Ok(b)) => prop_assert!((a.rho - b.rho).abs() < 1e-9),
            (a, b) => prop_assert_eq!(a.is_err(), b.is_err()),
        }
    }

    #[test]
    fn text_round_trip_within_tolerance(data in prop::collection::vec(-1e3f32..1e3, 4 * 7)) {
        let words: Vec<String> = (0..4).map(|i| format!("w{i}")).collect();
        let mut buf = Vec::new();
        save_vectors(&mut buf, &words, 7, &data, VectorFormat::Text).unwrap();
        let loaded = load_vectors(&buf[..], VectorFormat::Text).unwrap();
        prop_assert_eq!(loaded.words(), &words[..]);
        for (a, b) in loaded.data().iter().zip(&data) {
            prop_assert!((a - b).abs() <= 1e-4);
        }
    }

    #[test]
    fn schedules_stay_in_range(total in 1usize..30, seed: u64, fixed in 0.0f32..=1.0) {
        let mut rng = Pcg64Mcg::seed_from_u64(seed);
        for epoch in 1..=total {
            for schedule in [GammaSchedule::Fixed(fixed), GammaSchedule::LinearUp, GammaSchedule::RandomUniform] {
                let gamma = gamma_for(schedule, epoch, total, &mut rng);
                prop_assert!((0.0..=1.0).contains(&gamma));
            }
        }
    }

    #[test]
    fn learning_rate_stays_in_range(total in 1u64..1_000_000, frac in 0.0f64..=1.0) {
        let done = (total as f64 * frac) as u64;
        let lr = lr_schedule(0.025, done, total);
        prop_assert!(lr <= 0.025);
        prop_assert!(lr >= 0.025 * LR_FLOOR * (1.0 - 1e-6));
    }
}
