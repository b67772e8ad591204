mod common;

use common::{ei_quadrature, random_dataset};
use ecibo::acquisition::{ei_at, expected_improvement, Incumbent};
use ecibo::gp::DEFAULT_NUGGET;
use ecibo::{eci, latin_hypercube, Dataset, GpModel, Problem, ProblemId, RngStream};

#[test]
fn closed_form_matches_quadrature() {
    for &(mu, sigma, f) in &[
        (0.0, 1.0, 1.0),
        (3.0, 0.5, 1.0),
        (-1.0, 2.0, -1.0),
        (10.0, 10.0, 0.0),
        (0.2, 1e-3, 0.2005),
    ] {
        let closed = expected_improvement(mu, sigma, f);
        let quad = ei_quadrature(mu, sigma, f);
        assert!(
            (closed - quad).abs() < 1e-6,
            "mu={mu} sigma={sigma}: {closed} vs {quad}"
        );
    }
    // frozen from the quadrature above
    assert!((ei_quadrature(0.0, 1.0, 1.0) - 1.083_315_5).abs() < 1e-6);
}

fn camel_model(seed: u64) -> (GpModel, Dataset) {
    let p = Problem::new(ProblemId::ThreeHumpCamel, 2).unwrap();
    let design = latin_hypercube(10, p.bounds(), &mut RngStream::new(seed)).unwrap();
    let ys: Vec<f64> = design
        .points
        .iter()
        .map(|x| p.evaluate(x).unwrap())
        .collect();
    let data = Dataset::from_samples(p.bounds().clone(), &design.points, &ys).unwrap();
    (GpModel::fit(&data, DEFAULT_NUGGET, 1).unwrap(), data)
}

#[test]
fn eci_is_the_ei_slice_on_three_hump_camel() {
    let (model, data) = camel_model(4);
    let inc = Incumbent::from_dataset(&data).unwrap();
    for coord in 0..2 {
        for k in 0..50 {
            let t = -2.0 + 4.0 * k as f64 / 49.0;
            let mut z = inc.x.clone();
            z[coord] = t;
            let slice = eci(&model, &inc, coord, t).unwrap();
            let full = ei_at(&model, &z, inc.f).unwrap();
            assert!((slice - full).abs() <= 1e-12);
        }
    }
}

#[test]
fn eci_vanishes_at_the_incumbent() {
    let mut rng = RngStream::new(31);
    for _ in 0..10 {
        let data = random_dataset(&mut rng, 8, 3);
        let model = GpModel::fit(&data, DEFAULT_NUGGET, 1).unwrap();
        let inc = Incumbent::from_dataset(&data).unwrap();
        for coord in 0..3 {
            // interpolation tolerance: |mu - f| <= 1e-6 scale, sigma <= 1e-4 scale
            let bound = (1e-6 + 1e-4 * ecibo::acquisition::normal_pdf(0.0)) * model.output_scale();
            let v = eci(&model, &inc, coord, inc.x[coord]).unwrap();
            assert!(v <= bound, "{v}");
        }
    }
}

#[test]
fn eci_rejects_bad_coordinate() {
    let (model, data) = camel_model(5);
    let inc = Incumbent::from_dataset(&data).unwrap();
    assert!(eci(&model, &inc, 2, 0.0).is_err());
}

#[test]
fn incumbent_is_first_argmin() {
    let b = ecibo::Bounds::uniform(0.0, 1.0, 1).unwrap();
    let data =
        Dataset::from_samples(b, &[vec![0.1], vec![0.5], vec![0.9]], &[3.0, -1.0, -1.0]).unwrap();
    let inc = Incumbent::from_dataset(&data).unwrap();
    assert_eq!(inc.x, vec![0.5]);
    assert_eq!(inc.f, -1.0);
}
