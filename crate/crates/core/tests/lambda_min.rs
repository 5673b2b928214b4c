use ogl_core::groups::generate_groups;
use ogl_core::lambda_min::*;
use ogl_core::outer::OuterConfig;
use ogl_core::synthetic::logistic_dataset;
use ogl_core::{GroupStructure, LogisticLoss, QuadraticLoss};

fn tight() -> OuterConfig {
    OuterConfig {
        eps_tol: 1e-12,
        ..Default::default()
    }
}

#[test]
fn single_group_quadratic_matches_closed_form() {
    // f(x) = 0.5 ||x - a||^2, so the solution is zero iff ||a|| <= Lambda sqrt(n).
    let a = vec![0.3, -1.2, 0.8, 2.0, -0.1];
    let n = a.len();
    let loss = QuadraticLoss::diagonal(vec![1.0; n], a.clone()).unwrap();
    let groups = vec![(0..n).collect::<Vec<_>>()];
    let res = find_lambda_min(&loss, n, &groups, &tight(), &LambdaSearch::default()).unwrap();
    let exact = a.iter().map(|v| v * v).sum::<f64>().sqrt() / (n as f64).sqrt();
    // The bracket after 20 bisections is 2^-20 of the starting interval.
    assert!((res.lambda_min - exact).abs() <= 1e-6 * exact, "{} vs {exact}", res.lambda_min);
    assert!(res.lambda_min >= exact * (1.0 - 1e-9));
    assert_eq!(res.initial_guess, exact);
}

#[test]
fn zero_gradient_returns_grid_minimum() {
    let loss = QuadraticLoss::diagonal(vec![1.0; 4], vec![0.0; 4]).unwrap();
    let search = LambdaSearch::default();
    let res = find_lambda_min(&loss, 4, &[vec![0, 1], vec![2, 3]], &tight(), &search).unwrap();
    assert_eq!(res.lambda_min, search.grid_min);
    assert_eq!(res.solves, 0);
}

#[test]
fn logistic_threshold_separates_zero_from_nonzero() {
    let loss = LogisticLoss::new(logistic_dataset(150, 40, 0.3, 4).unwrap());
    let groups = generate_groups(40, 0.2, 5).unwrap();
    let cfg = OuterConfig::default();
    let res = find_lambda_min(&loss, 40, &groups, &cfg, &LambdaSearch::default()).unwrap();
    let lower = res.lower.expect("bracketed");
    assert!(lower < res.lambda_min && res.lambda_min - lower <= 1e-5 * res.lambda_min);
    for (scale, zero) in [(res.lambda_min, true), (0.9 * res.lambda_min, false)] {
        let gs = GroupStructure::with_scaled_weights(40, groups.clone(), scale).unwrap();
        let out = ogl_core::solve(&loss, &gs, &cfg).unwrap();
        assert_eq!(out.x.iter().all(|&v| v == 0.0), zero, "scale {scale}");
    }
}

#[test]
#[ignore = "needs the a9a file from LIBSVM in OGL_DATA_DIR"]
fn a9a_lambda_min_matches_published_scale() {
    use ogl_core::data_io::load_dataset;
    let dir = std::env::var("OGL_DATA_DIR").expect("OGL_DATA_DIR is not set");
    let data = load_dataset(&std::path::Path::new(&dir).join("a9a"), Some(123)).unwrap();
    let loss = LogisticLoss::new(data);
    let groups = generate_groups(123, 0.1, 10).unwrap();
    let res = find_lambda_min(&loss, 123, &groups, &OuterConfig::default(), &LambdaSearch::default()).unwrap();
    assert!((0.1 * res.lambda_min - 0.013458).abs() <= 1e-5, "{}", res.lambda_min);
}
