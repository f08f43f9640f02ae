mod oracles;

use oracles::{ae_gradient_error, int_in, random_matrix, rng};
use wena_core::encoder::{train_autoencoder, AeConfig, AeModel};
use wena_core::rng::uniform;

fn random_net(
    r: &mut wena_core::rng::SeededRng,
    d: usize,
    h: usize,
    epsilon: f64,
    decay_decoder: bool,
) -> AeModel {
    let config = AeConfig {
        hidden: h,
        epsilon,
        decay_decoder,
        ..AeConfig::default()
    };
    AeModel::from_parameters(
        random_matrix(r, h, d, -1.0, 1.0),
        (0..h).map(|_| uniform(r, -0.5, 0.5)).collect(),
        random_matrix(r, d, h, -1.0, 1.0),
        (0..d).map(|_| uniform(r, -0.5, 0.5)).collect(),
        config,
    )
    .unwrap()
}

#[test]
fn backprop_matches_finite_differences() {
    let mut r = rng(8);
    for case in 0..20 {
        let d = int_in(&mut r, 1, 12);
        let h = int_in(&mut r, 1, 5);
        let eps = if case % 2 == 0 { 0.0 } else { 1e-2 };
        let model = random_net(&mut r, d, h, eps, case % 3 != 0);
        let x = random_matrix(&mut r, 7, d, 0.0, 1.0);
        let err = ae_gradient_error(&model, &x);
        assert!(err < 1e-4, "case {case} ({d}->{h}): relative error {err}");
    }
}

#[test]
fn training_is_bitwise_reproducible_and_reduces_loss() {
    let mut r = rng(21);
    let u = random_matrix(&mut r, 60, 2, -1.0, 1.0);
    let v = random_matrix(&mut r, 2, 30, -1.0, 1.0);
    let x = u.matmul(&v).unwrap();
    let config = AeConfig {
        hidden: 8,
        epochs: 200,
        seed: 4,
        ..AeConfig::default()
    };
    let a = train_autoencoder(&x, &config).unwrap();
    let b = train_autoencoder(&x, &config).unwrap();
    assert_eq!(a, b);
    assert!(a.final_loss < 0.5 * a.initial_loss);
    let c = train_autoencoder(&x, &AeConfig { seed: 5, ..config }).unwrap();
    assert_ne!(a.w, c.w);
}

#[test]
fn encoded_features_lie_in_unit_interval() {
    let mut r = rng(2);
    let x = random_matrix(&mut r, 30, 10, -5.0, 5.0);
    let model = train_autoencoder(
        &x,
        &AeConfig {
            hidden: 4,
            epochs: 20,
            ..AeConfig::default()
        },
    )
    .unwrap();
    let f = model.features(&x).unwrap();
    assert_eq!((f.rows(), f.cols()), (30, 4));
    assert!(f
        .values
        .as_slice()
        .iter()
        .all(|&v| (0.0..=1.0).contains(&v)));
}
