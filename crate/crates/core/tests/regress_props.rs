use finsent_core::corpus::tokenize;
use finsent_core::regress::{
    fit_gbm, fit_ols, fit_svr, DesignMatrix, GbmConfig, Predictor, SvrConfig,
};
use finsent_core::synth::default_corpus;
use finsent_core::vectorize::{fit_ngram, transform_ngram, NgramConfig};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Plain full-batch gradient descent on the mean squared loss with a bias.
fn gradient_descent_ols(rows: &[Vec<f64>], y: &[f64]) -> (Vec<f64>, f64) {
    let (n, d) = (rows.len(), rows[0].len());
    // Lipschitz bound of the gradient: trace of the augmented Gram matrix / n.
    let trace: f64 = rows
        .iter()
        .map(|r| 1.0 + r.iter().map(|v| v * v).sum::<f64>())
        .sum::<f64>()
        / n as f64;
    let step = 1.0 / trace;
    let (mut w, mut b) = (vec![0.0; d], 0.0);
    for _ in 0..2_000_000 {
        let mut gw = vec![0.0; d];
        let mut gb = 0.0;
        for (r, &t) in rows.iter().zip(y) {
            let e = r.iter().zip(&w).map(|(a, c)| a * c).sum::<f64>() + b - t;
            gw.iter_mut().zip(r).for_each(|(g, a)| *g += e * a);
            gb += e;
        }
        let norm = (gw.iter().map(|g| g * g).sum::<f64>() + gb * gb).sqrt() / n as f64;
        if norm < 1e-12 {
            break;
        }
        w.iter_mut()
            .zip(&gw)
            .for_each(|(wi, g)| *wi -= step * g / n as f64);
        b -= step * gb / n as f64;
    }
    (w, b)
}

#[test]
fn ols_agrees_with_gradient_descent_oracle() {
    for instance in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(instance);
        let rows: Vec<Vec<f64>> = (0..30)
            .map(|_| (0..5).map(|_| StandardNormal.sample(&mut rng)).collect())
            .collect();
        let y: Vec<f64> = rows
            .iter()
            .map(|r| r.iter().sum::<f64>() * 0.3 + rng.random_range(-1.0..1.0))
            .collect();
        let x = DesignMatrix::from_rows(rows.clone())
            .unwrap()
            .with_targets(y.clone())
            .unwrap();
        let model = fit_ols(&x, 0.0).unwrap();
        let (w, b) = gradient_descent_ols(&rows, &y);
        for (a, c) in model.weights.iter().zip(&w) {
            assert!((a - c).abs() < 1e-4, "instance {instance}: {a} vs {c}");
        }
        assert!((model.bias - b).abs() < 1e-4, "instance {instance}");
    }
}

fn normal_equation_residual(rows: &[Vec<f64>], y: &[f64], w: &[f64], b: f64) -> f64 {
    let d = w.len();
    let mut g = vec![0.0; d + 1];
    for (r, &t) in rows.iter().zip(y) {
        let e = r.iter().zip(w).map(|(a, c)| a * c).sum::<f64>() + b - t;
        g.iter_mut()
            .zip(r.iter().chain(std::iter::once(&1.0)))
            .for_each(|(gi, a)| *gi += e * a);
    }
    g.iter().map(|v| v * v).sum::<f64>().sqrt()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ols_recovers_planted_relations(
        d in 1usize..5,
        extra in 2usize..20,
        seed in any::<u64>(),
        scale in 0.1f64..5.0,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = d + extra;
        let w_true: Vec<f64> = (0..d).map(|_| rng.random_range(-scale..scale)).collect();
        let b_true = rng.random_range(-2.0..2.0);
        let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
        let y: Vec<f64> = rows
            .iter()
            .map(|r| r.iter().zip(&w_true).map(|(a, c)| a * c).sum::<f64>() + b_true)
            .collect();
        let x = DesignMatrix::from_rows(rows.clone()).unwrap().with_targets(y.clone()).unwrap();
        let model = fit_ols(&x, 0.0).unwrap();
        for (a, c) in model.weights.iter().zip(&w_true) {
            prop_assert!((a - c).abs() < 1e-6);
        }
        prop_assert!((model.bias - b_true).abs() < 1e-6);
        prop_assert!(normal_equation_residual(&rows, &y, &model.weights, model.bias) <= 1e-6);
    }

    #[test]
    fn fits_are_deterministic_and_predict_is_pure(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows: Vec<Vec<f64>> = (0..15).map(|_| (0..3).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
        let y: Vec<f64> = (0..15).map(|_| rng.random_range(-1.0..1.0)).collect();
        let x = DesignMatrix::from_rows(rows).unwrap().with_targets(y).unwrap();
        let svr = SvrConfig { epochs: 20, seed, ..SvrConfig::default() };
        let gbm = GbmConfig { rounds: 10, ..GbmConfig::default() };
        let models: Vec<Box<dyn Predictor>> = vec![
            Box::new(fit_ols(&x, 1e-8).unwrap()),
            Box::new(fit_svr(&x, &svr).unwrap()),
            Box::new(fit_gbm(&x, &gbm).unwrap()),
        ];
        prop_assert_eq!(fit_svr(&x, &svr).unwrap(), fit_svr(&x, &svr).unwrap());
        prop_assert_eq!(fit_gbm(&x, &gbm).unwrap(), fit_gbm(&x, &gbm).unwrap());
        for m in &models {
            prop_assert_eq!(m.predict(&x).unwrap(), m.predict(&x).unwrap());
        }
    }
}

fn synthetic_design() -> DesignMatrix {
    let ds = default_corpus();
    let docs: Vec<_> = ds.iter().map(|r| tokenize(&r.title)).collect();
    let vocab = fit_ngram(&docs, &NgramConfig::default()).unwrap();
    let rows = docs.iter().map(|d| transform_ngram(&vocab, d)).collect();
    let y = ds.iter().map(|r| r.sentiment.unwrap()).collect();
    DesignMatrix::sparse(rows, vocab.len())
        .unwrap()
        .with_targets(y)
        .unwrap()
}

#[test]
fn gbm_training_rmse_never_increases() {
    let x = synthetic_design();
    let y = x.targets().unwrap().to_vec();
    let model = fit_gbm(&x, &GbmConfig::default()).unwrap();
    assert_eq!(model.trees.len(), 100);
    let rmse = |rounds: usize| {
        let se: f64 = x
            .iter()
            .zip(&y)
            .map(|(row, t)| (model.predict_row_truncated(row, rounds) - t).powi(2))
            .sum();
        (se / y.len() as f64).sqrt()
    };
    let curve: Vec<f64> = (0..=100).map(rmse).collect();
    for (r, w) in curve.windows(2).enumerate() {
        assert!(
            w[1] <= w[0] + 1e-12,
            "round {}: {} -> {}",
            r + 1,
            w[0],
            w[1]
        );
    }
    assert!(curve[100] < curve[0] / 2.0);
}

#[test]
fn gbm_huge_lambda_collapses_to_base_score() {
    let x = synthetic_design();
    let config = GbmConfig {
        lambda: 1e12,
        ..GbmConfig::default()
    };
    let model = fit_gbm(&x, &config).unwrap();
    let preds = model.predict(&x).unwrap();
    let worst = preds
        .iter()
        .map(|p| (p - model.base_score).abs())
        .fold(0.0, f64::max);
    assert!(worst <= 1e-6, "{worst}");
}
