use dfljam_core::fnn::{
    self, federated_average, init, loss_and_gradient, param_count, FnnSpec, LabeledData, Mode, ModelParams,
};
use dfljam_core::seed::SimRng;
use proptest::prelude::*;
use rand::rngs::ThreadRng;
use rand::{Rng, SeedableRng};

#[test]
fn reference_architecture_has_14626_parameters() {
    let spec = FnnSpec::default();
    assert_eq!(param_count(&spec), 14_626);
    assert_eq!(init(&spec, &mut SimRng::seed_from_u64(0)).param_count(), 14_626);
}

/// Plain-loop forward pass and mean cross-entropy, written independently of
/// the library's matrix code.
fn reference_loss(params: &ModelParams, xs: &[Vec<f64>], labels: &[usize]) -> f64 {
    let layers = params.layers();
    let mut total = 0.0;
    for (x, &label) in xs.iter().zip(labels) {
        let mut act = x.clone();
        for (li, layer) in layers.iter().enumerate() {
            let (rows, cols) = layer.weights.dim();
            act = (0..rows)
                .map(|r| {
                    let z = layer.bias[r] + (0..cols).map(|c| layer.weights[[r, c]] * act[c]).sum::<f64>();
                    if li + 1 < layers.len() {
                        z.max(0.0)
                    } else {
                        z
                    }
                })
                .collect();
        }
        let max = act.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let log_sum = act.iter().map(|v| (v - max).exp()).sum::<f64>().ln() + max;
        total += log_sum - act[label];
    }
    total / xs.len() as f64
}

#[test]
fn backprop_matches_central_differences() {
    let spec = FnnSpec::default();
    let mut rng = SimRng::seed_from_u64(11);
    let params = init(&spec, &mut rng);
    let xs: Vec<Vec<f64>> = (0..4)
        .map(|_| (0..32).map(|_| rng.random_range(-2.0..2.0)).collect())
        .collect();
    let labels = vec![0, 1, 1, 0];
    let batch = LabeledData::from_rows(xs.iter().map(Vec::as_slice).zip(labels.iter().copied()), 32).unwrap();
    let (loss, grads) = loss_and_gradient::<ThreadRng>(&params, &batch, Mode::Eval).unwrap();
    assert!((loss - reference_loss(&params, &xs, &labels)).abs() < 1e-12);

    let h = 1e-5;
    let mut worst: f64 = 0.0;
    let mut probe = params.clone();
    for l in 0..params.layers().len() {
        let (rows, cols) = params.layers()[l].weights.dim();
        let mut check = |probe: &mut ModelParams, get: &dyn Fn(&mut ModelParams) -> &mut f64, analytic: f64| {
            let orig = *get(probe);
            *get(probe) = orig + h;
            let up = reference_loss(probe, &xs, &labels);
            *get(probe) = orig - h;
            let down = reference_loss(probe, &xs, &labels);
            *get(probe) = orig;
            let numeric = (up - down) / (2.0 * h);
            let scale = analytic.abs().max(numeric.abs()).max(1e-7);
            worst = worst.max((analytic - numeric).abs() / scale);
        };
        for r in 0..rows {
            for c in 0..cols {
                let g = grads.layers()[l].weights[[r, c]];
                check(
                    &mut probe,
                    &|p: &mut ModelParams| &mut p.layers_mut()[l].weights[[r, c]],
                    g,
                );
            }
            let g = grads.layers()[l].bias[r];
            check(&mut probe, &|p: &mut ModelParams| &mut p.layers_mut()[l].bias[r], g);
        }
    }
    assert!(worst < 1e-4, "max relative error {worst}");
}

#[test]
fn softmax_rows_sum_to_one() {
    let spec = FnnSpec::default();
    let mut rng = SimRng::seed_from_u64(5);
    let params = init(&spec, &mut rng);
    for _ in 0..1000 {
        let scale = 10f64.powi(rng.random_range(-2..4));
        let x: Vec<f64> = (0..32).map(|_| scale * rng.random_range(-1.0..1.0)).collect();
        let p = fnn::forward::<ThreadRng>(&params, &x, Mode::Eval).unwrap();
        assert!((p.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
        assert!(p.iter().all(|v| (0.0..=1.0).contains(v)));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn averaging_is_permutation_invariant(seed in any::<u64>(), n in 1usize..7, rot in 0usize..7) {
        let spec = FnnSpec { input_size: 6, hidden_sizes: vec![5, 4], output_size: 2, dropout_rate: 0.0 };
        let mut rng = SimRng::seed_from_u64(seed);
        let models: Vec<ModelParams> = (0..n).map(|_| init(&spec, &mut rng)).collect();
        let a = federated_average(&models).unwrap();
        prop_assert_eq!(&a, &federated_average(&models).unwrap());
        let mut shuffled = models.clone();
        shuffled.rotate_left(rot % n);
        shuffled.reverse();
        let b = federated_average(&shuffled).unwrap();
        for (x, y) in a.to_flat().iter().zip(b.to_flat()) {
            prop_assert!((x - y).abs() <= 1e-12);
        }
    }

    #[test]
    fn checkpoints_round_trip(seed in any::<u64>(), n in 0usize..4) {
        let spec = FnnSpec { input_size: 3, hidden_sizes: vec![4], output_size: 2, dropout_rate: 0.2 };
        let mut rng = SimRng::seed_from_u64(seed);
        let models: Vec<ModelParams> = (0..n).map(|_| init(&spec, &mut rng)).collect();
        let back = fnn::decode_checkpoint(&fnn::encode_checkpoint(&models)).unwrap();
        prop_assert_eq!(back, models);
    }
}
