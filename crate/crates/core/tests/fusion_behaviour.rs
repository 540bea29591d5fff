mod common;

use common::rng;
use hetedge::edgeops::{Combiner, FeatureSet};
use hetedge::eval::auc;
use hetedge::fusion::{train, train_mtn_with_arch, MtnArch, ModelKind, TrainConfig};
use hetedge::graph::NodeId;
use rand::Rng;

/// Two types of four features each. With `signal`, the label is planted in
/// the sign of the first feature of the second type.
fn planted(n: usize, signal: bool, seed: u64) -> FeatureSet {
    let mut r = rng(seed);
    let mut rows = Vec::with_capacity(n * 8);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let label = r.gen_bool(0.5);
        for j in 0..8 {
            let noise: f64 = r.gen_range(-1.0..1.0);
            let sign = if label { 1.0 } else { -1.0 };
            rows.push(if signal && j == 4 { sign + 0.3 * noise } else { noise });
        }
        labels.push(label);
    }
    FeatureSet::from_rows(
        vec!["contact".into(), "chat".into()],
        Combiner::Average,
        4,
        (0..n).map(|i| (NodeId(i as u32), NodeId((i + n) as u32))).collect(),
        labels,
        rows,
    )
    .unwrap()
}

fn test_auc(kind: ModelKind, signal: bool) -> f64 {
    let train_set = planted(800, signal, 61);
    let test_set = planted(400, signal, 62);
    let cfg = TrainConfig { learning_rate: 0.05, batch_size: 32, epochs: 15, ..Default::default() };
    let (model, _) = train(kind, &train_set, &cfg).unwrap();
    let scores: Vec<f64> = (0..test_set.len()).map(|i| model.predict_flat(test_set.row(i)).unwrap()).collect();
    auc(&scores, &test_set.labels).unwrap()
}

#[test]
fn planted_signal_is_learned_and_noise_is_not() {
    for kind in [ModelKind::LogReg, ModelKind::Mtn] {
        let with = test_auc(kind, true);
        let without = test_auc(kind, false);
        assert!(with > 0.95, "{kind}: {with}");
        assert!((without - 0.5).abs() < 0.1, "{kind}: {without}");
    }
}

#[test]
fn training_is_reproducible_for_a_seed() {
    let data = planted(200, true, 63);
    let cfg = TrainConfig { epochs: 3, batch_size: 16, ..Default::default() };
    for kind in [ModelKind::LogReg, ModelKind::Mtn] {
        let a = train(kind, &data, &cfg).unwrap();
        let b = train(kind, &data, &cfg).unwrap();
        assert_eq!(a, b);
    }
    let arch = MtnArch { input_lens: vec![4, 4], tower_width: 8, fusion_width: 8 };
    let a = train_mtn_with_arch(&data, arch.clone(), &cfg).unwrap();
    let c = train_mtn_with_arch(&data, arch, &TrainConfig { seed: 1, ..cfg }).unwrap();
    assert_ne!(a.0, c.0);
}

#[test]
fn best_validation_epoch_is_kept() {
    let data = planted(400, true, 64);
    let cfg = TrainConfig { learning_rate: 0.05, batch_size: 32, epochs: 8, ..Default::default() };
    let (_, report) = train(ModelKind::Mtn, &data, &cfg).unwrap();
    assert_eq!(report.val_auc.len(), 8);
    let best = report.val_auc.iter().cloned().fold(f64::MIN, f64::max);
    assert_eq!(report.val_auc[report.best_epoch], best);
}
