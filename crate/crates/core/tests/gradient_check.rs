//! Analytic gradients against central finite differences of an independent
//! binary64 loss evaluation.

mod common;

use common::{finite_difference_check, random_masked_net};
use evosynth::netcore::gradients;
use evosynth::Activation;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn two_three_two_matches_finite_differences() {
    for seed in 0..10 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let net = random_masked_net(&[2, 3, 2], Activation::Sigmoid, 0.0, &mut rng);
        let inputs: Vec<Vec<f32>> = (0..4).map(|_| vec![rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)]).collect();
        let labels: Vec<usize> = (0..4).map(|_| rng.random_range(0..2)).collect();
        let worst = finite_difference_check(&net, &inputs, &labels, 1e-3);
        assert!(worst < 1e-4, "seed {seed}: worst relative error {worst:e}");
    }
}

#[test]
fn relu_networks_away_from_kinks() {
    let mut checked = 0;
    for seed in 0..40 {
        let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
        let net = random_masked_net(&[3, 5, 3], Activation::Relu, 0.2, &mut rng);
        let inputs: Vec<Vec<f32>> = (0..4).map(|_| (0..3).map(|_| rng.random_range(-2.0..2.0)).collect()).collect();
        let labels: Vec<usize> = (0..4).map(|_| rng.random_range(0..3)).collect();
        // finite differences are meaningless across a ReLU kink
        if common::min_hidden_preactivation(&net, &inputs) < 1e-2 {
            continue;
        }
        let worst = finite_difference_check(&net, &inputs, &labels, 1e-3);
        assert!(worst < 1e-4, "seed {seed}: worst relative error {worst:e}");
        checked += 1;
    }
    assert!(checked >= 5, "only {checked} kink-free networks");
}

#[test]
fn near_saturated_outputs_have_small_consistent_gradients() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut net = random_masked_net(&[2, 3, 2], Activation::Sigmoid, 0.0, &mut rng);
    // push the output strongly towards class 0
    let last = net.layers.len() - 1;
    net.layers[last].bias = vec![12.0, -12.0];
    let inputs = vec![vec![0.5f32, -0.5], vec![1.0, 1.0]];
    let labels = vec![0, 0];
    let g = gradients(&net, &inputs.iter().map(Vec::as_slice).collect::<Vec<_>>(), &labels).unwrap();
    assert!(g.loss < 1e-8);
    let max_grad = g.layers.iter().flat_map(|l| l.weights.iter().chain(&l.bias)).fold(0.0f64, |m, v| m.max(v.abs()));
    // |dL/dz| ≤ 1 - p_label ≈ loss, scaled by at most a few unit activations
    assert!(max_grad < 1e-7, "max gradient {max_grad:e}");
    let worst = finite_difference_check(&net, &inputs, &labels, 1e-3);
    assert!(worst < 1e-4, "worst relative error {worst:e}");
}

#[test]
fn masked_positions_are_exactly_zero() {
    for seed in 0..10 {
        let mut rng = ChaCha8Rng::seed_from_u64(50 + seed);
        let net = random_masked_net(&[4, 6, 3], Activation::Relu, 0.4, &mut rng);
        let inputs: Vec<Vec<f32>> = (0..5).map(|_| (0..4).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
        let labels: Vec<usize> = (0..5).map(|_| rng.random_range(0..3)).collect();
        let g = gradients(&net, &inputs.iter().map(Vec::as_slice).collect::<Vec<_>>(), &labels).unwrap();
        for (layer, lg) in net.layers.iter().zip(&g.layers) {
            for (&m, &gw) in layer.mask.iter().zip(&lg.weights) {
                if !m {
                    assert_eq!(gw.to_bits(), 0);
                }
            }
        }
    }
}
