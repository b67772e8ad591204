mod common;

use common::{lhs_dataset, random_dataset, DenseGp};
use ecibo::gp::{
    concentrated_log_likelihood, NormalizedData, DEFAULT_NUGGET, LENGTH_SCALE_MAX, LENGTH_SCALE_MIN,
};
use ecibo::{Bounds, Dataset, GpModel, RngStream};
use proptest::prelude::*;

fn fit(data: &Dataset) -> GpModel {
    GpModel::fit(data, DEFAULT_NUGGET, 1).unwrap()
}

#[test]
fn sine_samples_are_interpolated() {
    let two_pi = 2.0 * std::f64::consts::PI;
    let xs: Vec<Vec<f64>> = (0..7).map(|i| vec![two_pi * i as f64 / 6.0]).collect();
    let ys: Vec<f64> = xs.iter().map(|x| x[0].sin()).collect();
    let data = Dataset::from_samples(Bounds::new(vec![(0.0, two_pi)]).unwrap(), &xs, &ys).unwrap();
    let model = fit(&data);
    let scale = model.output_scale();
    for (x, y) in xs.iter().zip(&ys) {
        let p = model.predict(x).unwrap();
        assert!((p.mean - y).abs() <= 1e-6 * scale, "{} vs {y}", p.mean);
        assert!(p.std <= 1e-4 * scale);
    }
    // uncertainty rises between samples
    let mid = model.predict(&[two_pi / 12.0]).unwrap();
    assert!(mid.std > 1e-4 * scale);
}

#[test]
fn interpolates_random_training_points() {
    let mut rng = RngStream::new(21);
    for _ in 0..20 {
        let n = 2 + rng.index(19);
        let d = 1 + rng.index(10);
        let data = random_dataset(&mut rng, n, d);
        let model = fit(&data);
        let scale = model.output_scale();
        let train = model.training_data();
        for (x, y) in data.points().zip(data.values()) {
            let p = model.predict(x).unwrap();
            assert!(p.std <= 1e-4 * scale);
            // the nugget leaves a residual of exactly nugget·w_k at row k
            let z = data.bounds().normalize(x);
            let k = (0..train.len())
                .find(|&k| train.input(k) == &z[..])
                .unwrap();
            let slack = model.nugget() * model.weights()[k].abs() * scale;
            assert!(((p.mean - y).abs() - slack).abs() <= 1e-9 * scale);
            if slack <= 1e-7 * scale {
                assert!((p.mean - y).abs() <= 1e-6 * scale);
            }
        }
    }
}

#[test]
fn length_scale_stays_in_range() {
    let mut rng = RngStream::new(22);
    for _ in 0..30 {
        let n = 2 + rng.index(25);
        let d = 1 + rng.index(6);
        let model = fit(&random_dataset(&mut rng, n, d));
        let l = model.length_scale();
        assert!((LENGTH_SCALE_MIN..=LENGTH_SCALE_MAX).contains(&l), "{l}");
    }
}

#[test]
fn likelihood_matches_dense_oracle() {
    let mut rng = RngStream::new(23);
    for _ in 0..50 {
        let d = 1 + rng.index(4);
        let data = random_dataset(&mut rng, 3, d);
        let l = 10f64.powf(rng.uniform_in(-1.5, 0.5));
        let oracle = DenseGp::new(&data, l, DEFAULT_NUGGET);
        let d = data.dim();
        let norm: Vec<f64> = data
            .points()
            .flat_map(|x| data.bounds().normalize(x))
            .collect();
        let shift = data.values().iter().sum::<f64>() / 3.0;
        let scale = oracle.output_scale();
        let y = data.values().iter().map(|v| (v - shift) / scale).collect();
        let nd = NormalizedData::new(norm, y, d).unwrap();
        let lik = concentrated_log_likelihood(&nd, l, DEFAULT_NUGGET).unwrap();
        assert!(
            (lik.mean - oracle.mean).abs() < 1e-8 * oracle.mean.abs().max(1.0),
            "{} {}",
            lik.mean,
            oracle.mean
        );
        assert!((lik.variance - oracle.variance).abs() < 1e-8 * oracle.variance.max(1.0));
        assert!(
            (lik.log_likelihood - oracle.log_likelihood).abs()
                < 1e-8 * oracle.log_likelihood.abs().max(1.0),
            "{} {}",
            lik.log_likelihood,
            oracle.log_likelihood
        );
    }
}

#[test]
fn fitted_length_scale_is_a_likelihood_maximum() {
    let mut rng = RngStream::new(24);
    for _ in 0..10 {
        let data = random_dataset(&mut rng, 12, 2);
        let model = fit(&data);
        let l = model.length_scale();
        let here = DenseGp::new(&data, l, model.nugget()).log_likelihood;
        for factor in [0.9, 1.1] {
            let l2 = (l * factor).clamp(LENGTH_SCALE_MIN, LENGTH_SCALE_MAX);
            let there = DenseGp::new(&data, l2, model.nugget()).log_likelihood;
            assert!(
                here >= there - 1e-6 * here.abs().max(1.0),
                "l={l} {here} < {there}"
            );
        }
    }
}

#[test]
fn variance_is_never_meaningfully_negative() {
    let mut rng = RngStream::new(25);
    for _ in 0..20 {
        let data = random_dataset(&mut rng, 15, 3);
        let model = fit(&data);
        let s2 = model.params().variance;
        for x in data.points() {
            let (_, var) = model.posterior_standardized(x).unwrap();
            assert!(var >= -1e-8 * s2);
        }
        for _ in 0..50 {
            let x: Vec<f64> = data
                .bounds()
                .pairs()
                .iter()
                .map(|&(a, b)| rng.uniform_in(a, b))
                .collect();
            assert!(model.predict(&x).unwrap().std >= 0.0);
        }
    }
}

#[test]
fn predict_rejects_bad_queries() {
    let mut rng = RngStream::new(26);
    let model = fit(&random_dataset(&mut rng, 5, 2));
    assert!(model.predict(&[0.0]).is_err());
    assert!(model.predict(&[f64::NAN, 0.0]).is_err());
}

#[test]
fn five_point_predictions_match_dense_oracle() {
    let mut rng = RngStream::new(27);
    for _ in 0..20 {
        let d = 1 + rng.index(5);
        let data = lhs_dataset(&mut rng, 5, d);
        let model = fit(&data);
        let oracle = DenseGp::from_model(&data, &model);
        let scale = model.output_scale();
        for _ in 0..20 {
            let x: Vec<f64> = data
                .bounds()
                .pairs()
                .iter()
                .map(|&(a, b)| rng.uniform_in(a, b))
                .collect();
            let p = model.predict(&x).unwrap();
            let (mu, var) = oracle.predict(&x);
            let sd = var.max(0.0).sqrt();
            assert!(
                (p.mean - mu).abs() <= 1e-8 * mu.abs().max(scale),
                "{} {mu}",
                p.mean
            );
            assert!((p.std - sd).abs() <= 1e-8 * sd.max(scale), "{} {sd}", p.std);
        }
    }
}

#[test]
fn far_queries_revert_to_the_prior() {
    let xs: Vec<Vec<f64>> = (0..7).map(|i| vec![i as f64 / 5.0]).collect();
    let ys: Vec<f64> = xs.iter().map(|x| (3.0 * x[0]).sin() + x[0]).collect();
    // the box is much wider than the data, so its far end is many length-scales away
    let data = Dataset::from_samples(Bounds::new(vec![(0.0, 100.0)]).unwrap(), &xs, &ys).unwrap();
    let model = fit(&data);
    let far = 100.0 * (model.length_scale() * 10.0 + 0.012);
    assert!(far <= 100.0, "l = {}", model.length_scale());
    let p = model.predict(&[far]).unwrap();
    assert!((p.mean - model.prior_mean()).abs() <= 1e-3);
    assert!((p.std - model.prior_std()).abs() <= 1e-3);
}

fn permuted(data: &Dataset, perm: &[usize]) -> Dataset {
    let pts: Vec<Vec<f64>> = perm.iter().map(|&i| data.point(i).to_vec()).collect();
    let ys: Vec<f64> = perm.iter().map(|&i| data.values()[i]).collect();
    Dataset::from_samples(data.bounds().clone(), &pts, &ys).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn row_permutation_leaves_predictions_unchanged(seed in 0u64..10_000, n in 3usize..12, d in 1usize..5) {
        let mut rng = RngStream::new(seed);
        let data = random_dataset(&mut rng, n, d);
        let mut perm: Vec<usize> = (0..n).collect();
        rng.shuffle(&mut perm);
        let a = fit(&data);
        let b = fit(&permuted(&data, &perm));
        for _ in 0..10 {
            let x: Vec<f64> = data.bounds().pairs().iter().map(|&(lo, hi)| rng.uniform_in(lo, hi)).collect();
            let (pa, pb) = (a.predict(&x).unwrap(), b.predict(&x).unwrap());
            let tol = 1e-10 * a.output_scale().max(pa.mean.abs());
            prop_assert!((pa.mean - pb.mean).abs() <= tol, "{} {}", pa.mean, pb.mean);
            prop_assert!((pa.std - pb.std).abs() <= 1e-10 * a.output_scale());
        }
    }

    #[test]
    fn affine_output_equivariance(seed in 0u64..10_000, alpha in 0.01f64..100.0, beta in -1e3f64..1e3) {
        let mut rng = RngStream::new(seed);
        let data = random_dataset(&mut rng, 10, 3);
        let pts: Vec<Vec<f64>> = data.points().map(|x| x.to_vec()).collect();
        let ys: Vec<f64> = data.values().iter().map(|y| alpha * y + beta).collect();
        let scaled = Dataset::from_samples(data.bounds().clone(), &pts, &ys).unwrap();
        let a = fit(&data);
        let b = fit(&scaled);
        prop_assert!((a.length_scale() - b.length_scale()).abs() <= 1e-8 * a.length_scale());
        for _ in 0..10 {
            let x: Vec<f64> = data.bounds().pairs().iter().map(|&(lo, hi)| rng.uniform_in(lo, hi)).collect();
            let (pa, pb) = (a.predict(&x).unwrap(), b.predict(&x).unwrap());
            let unit = alpha * a.output_scale();
            prop_assert!((alpha * pa.mean + beta - pb.mean).abs() <= 1e-8 * unit.max((alpha * pa.mean + beta).abs()));
            prop_assert!((alpha * pa.std - pb.std).abs() <= 1e-8 * unit);
        }
    }
}
