use hitpredict_core::dataset::{split, split_two_way, LabeledDataset, TWO_WAY_TEST_FRACTION};
use hitpredict_core::learners::{train, TrainConfig, Variant};
use hitpredict_core::metrics::{evaluate, weighted_f1};
use hitpredict_core::synth;

#[test]
fn every_model_beats_the_all_negative_baseline() {
    let tracks = synth::generate(synth::DEFAULT_ROWS, synth::DEFAULT_HITS, 7).unwrap();
    let data = LabeledDataset::from_tracks(&tracks, "synthetic").unwrap();
    let mut recall = Vec::new();
    for variant in [Variant::Lr, Variant::Dt, Variant::Rf, Variant::Xgb, Variant::Nn] {
        let parts = if variant == Variant::Nn {
            split_two_way(data.len(), 7, TWO_WAY_TEST_FRACTION).unwrap()
        } else {
            split(data.len(), 7).unwrap()
        };
        let held = if variant == Variant::Nn { &parts.test } else { &parts.validation };
        let x = data.select_features(&parts.train);
        let y = data.select_labels(&parts.train);
        let model = train(&TrainConfig::new(variant, 7), x.view(), &y).unwrap();
        let yv = data.select_labels(held);
        let report = evaluate(&model, data.select_features(held).view(), &yv, 0.5).unwrap();
        let baseline = weighted_f1(&yv, &vec![0; yv.len()]).unwrap();
        println!(
            "{variant}: f1 {:.4} baseline {baseline:.4} hit recall {:.4}",
            report.metrics.weighted.f1, report.metrics.class_1.recall
        );
        assert!(report.metrics.weighted.f1 > baseline, "{variant}");
        recall.push((variant, report.metrics.class_1.recall));
    }
    let r = |v: Variant| recall.iter().find(|(m, _)| *m == v).unwrap().1;
    assert!(r(Variant::Rf) > r(Variant::Lr));
    assert!(r(Variant::Xgb) > r(Variant::Lr));
}
