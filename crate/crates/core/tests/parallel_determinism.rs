//! Training results must not depend on the rayon thread count: every
//! parallel unit derives its own seeded stream and results are collected in
//! index order.

use ordfreq::data::{generate_synthetic, SyntheticSpec};
use ordfreq::selection::{randomized_search, HyperparamDomain, ModelFamily};
use ordfreq::shap::shap_sampled;
use ordfreq::tree::{
    fit_gbm, fit_random_forest, model_to_text, ForestHyperparams, GbmHyperparams, TextModel,
};

fn with_threads<T: Send>(threads: usize, job: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .expect("pool")
        .install(job)
}

#[test]
fn forest_and_gbm_are_thread_count_invariant() {
    let spec = SyntheticSpec::household_default();
    let data = generate_synthetic(&spec, 300, 5).unwrap();
    let forest_hp = ForestHyperparams { n_trees: 16, ..Default::default() };
    let gbm_hp = GbmHyperparams { n_rounds: 8, ..Default::default() };

    let serial = with_threads(1, || {
        let f = fit_random_forest(&data, &forest_hp, 42).unwrap();
        let g = fit_gbm(&data, &gbm_hp, 42).unwrap();
        (model_to_text(&TextModel::Forest(f)), model_to_text(&TextModel::Gbm(g)))
    });
    let parallel = with_threads(4, || {
        let f = fit_random_forest(&data, &forest_hp, 42).unwrap();
        let g = fit_gbm(&data, &gbm_hp, 42).unwrap();
        (model_to_text(&TextModel::Forest(f)), model_to_text(&TextModel::Gbm(g)))
    });
    assert_eq!(serial.0, parallel.0, "forest differs across thread counts");
    assert_eq!(serial.1, parallel.1, "gbm differs across thread counts");
}

#[test]
fn randomized_search_log_is_thread_count_invariant() {
    let spec = SyntheticSpec::household_default();
    let data = generate_synthetic(&spec, 150, 6).unwrap();
    let domain = HyperparamDomain::new(vec![
        ("n_trees".into(), ordfreq::selection::ParamRange::Int(3, 8)),
        ("max_depth".into(), ordfreq::selection::ParamRange::Int(2, 4)),
    ])
    .unwrap();
    let serial = with_threads(1, || {
        randomized_search(ModelFamily::Forest, &domain, 5, &data, 3, 9).unwrap()
    });
    let parallel = with_threads(4, || {
        randomized_search(ModelFamily::Forest, &domain, 5, &data, 3, 9).unwrap()
    });
    assert_eq!(serial, parallel);
}

#[test]
fn sampled_shap_is_thread_count_invariant() {
    let predict = |x: &[f64]| vec![(x[0] + x[1] * x[2]).tanh(), (x[0] - x[2]).tanh()];
    let background: Vec<Vec<f64>> = vec![
        vec![0.0, 1.0, -1.0],
        vec![0.5, -0.5, 0.25],
        vec![-1.0, 0.0, 1.0],
    ];
    let x = [0.7, -0.3, 1.2];
    let serial = with_threads(1, || shap_sampled(predict, &x, &background, 64, 11).unwrap());
    let parallel = with_threads(4, || shap_sampled(predict, &x, &background, 64, 11).unwrap());
    assert_eq!(serial, parallel);
}
