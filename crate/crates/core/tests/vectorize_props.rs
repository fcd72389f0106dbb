use finsent_core::corpus::{tokenize, TokenSequence};
use finsent_core::persist::SavedModel;
use finsent_core::vectorize::{
    fit_ngram, fit_tfidf, ngrams, smoothed_idf, transform_ngram, transform_tfidf, NgramConfig,
};
use proptest::prelude::*;

fn corpus() -> impl Strategy<Value = Vec<TokenSequence>> {
    let doc = prop::collection::vec(
        prop::sample::select(vec!["up", "down", "flat", "shares", "profit", "q3"]),
        0..7,
    )
    .prop_map(|words| tokenize(&words.join(" ")));
    prop::collection::vec(doc, 1..12)
}

fn config() -> impl Strategy<Value = NgramConfig> {
    (
        1usize..3,
        0usize..2,
        1usize..3,
        prop::option::of(1usize..10),
    )
        .prop_map(|(n_min, extra, min_df, max_features)| NgramConfig {
            n_min,
            n_max: n_min + extra,
            min_df,
            max_features,
        })
}

proptest! {
    #[test]
    fn ngram_counts_bounded_by_document(docs in corpus(), cfg in config()) {
        let Ok(vocab) = fit_ngram(&docs, &cfg) else { return Ok(()) };
        for d in &docs {
            let v = transform_ngram(&vocab, d);
            let total = ngrams(d, cfg.n_min, cfg.n_max).count() as f64;
            prop_assert!(v.entries().iter().all(|&(_, c)| c > 0.0 && c.fract() == 0.0));
            prop_assert!(v.entries().iter().map(|e| e.1).sum::<f64>() <= total);
            prop_assert_eq!(v.dimension(), vocab.len());
        }
    }

    #[test]
    fn vocabulary_ignores_corpus_order(docs in corpus(), cfg in config(), seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let mut shuffled = docs.clone();
        shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
        let a = fit_ngram(&docs, &cfg);
        let b = fit_ngram(&shuffled, &cfg);
        match (a, b) {
            (Ok(a), Ok(b)) => prop_assert_eq!(a, b),
            (Err(_), Err(_)) => {}
            (a, b) => prop_assert!(false, "{a:?} vs {b:?}"),
        }
    }

    #[test]
    fn vocabulary_indices_are_sorted_and_frequent(docs in corpus(), cfg in config()) {
        let Ok(vocab) = fit_ngram(&docs, &cfg) else { return Ok(()) };
        prop_assert!(vocab.terms().windows(2).all(|w| w[0] < w[1]));
        prop_assert!(vocab.doc_freq().iter().all(|&df| df >= cfg.min_df));
        for (i, t) in vocab.terms().iter().enumerate() {
            prop_assert_eq!(vocab.index_of(t), Some(i));
        }
    }

    #[test]
    fn tfidf_rows_have_unit_norm(docs in corpus(), cfg in config()) {
        let Ok(model) = fit_tfidf(&docs, &cfg) else { return Ok(()) };
        prop_assert!(model.idf.iter().all(|&w| w > 0.0));
        for d in &docs {
            let v = transform_tfidf(&model, d);
            if v.nnz() > 0 {
                prop_assert!((v.norm() - 1.0).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn idf_never_increases_with_document_frequency(n in 1usize..1000, a in 0usize..1000, b in 0usize..1000) {
        let (lo, hi) = (a.min(b).min(n), a.max(b).min(n));
        prop_assert!(smoothed_idf(n, lo) >= smoothed_idf(n, hi));
    }

    #[test]
    fn fitted_vectorizers_round_trip(docs in corpus(), cfg in config()) {
        if let Ok(vocab) = fit_ngram(&docs, &cfg) {
            let text = SavedModel::Ngram(vocab.clone()).to_json();
            prop_assert_eq!(SavedModel::from_json(&text).unwrap(), SavedModel::Ngram(vocab));
        }
        if let Ok(model) = fit_tfidf(&docs, &cfg) {
            let text = SavedModel::Tfidf(model.clone()).to_json();
            prop_assert_eq!(SavedModel::from_json(&text).unwrap(), SavedModel::Tfidf(model));
        }
    }
}
