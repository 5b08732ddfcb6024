use dyn_chamfer::baselines::UniformEstimator;
use dyn_chamfer::nn::OracleKind;
use dyn_chamfer::{DynamicChamfer, EstimatorParams, InstanceConfig, Point, Side, UpdateEvent};

/// 999 points at distance 1 from `B = {0}` and one at distance 98_901, which
/// carries 99% of the Chamfer sum.
fn heavy_instance() -> (Vec<Point>, Vec<Point>, f64) {
    let mut a = vec![Point::from([1]); 999];
    a.push(Point::from([98_901]));
    (a, vec![Point::from([0])], 999.0 + 98_901.0)
}

#[test]
fn importance_sampling_beats_uniform_on_heavy_point() {
    let (a, b, exact) = heavy_instance();
    let trials = 100;
    let m = 100;
    let (mut uniform_bad, mut ours_good) = (0, 0);
    for t in 0..trials {
        let mut u = UniformEstimator::new(1, OracleKind::Scan, t);
        let cfg = InstanceConfig::new(1, 1 << 17, t).unwrap();
        let mut ours = DynamicChamfer::new(cfg, EstimatorParams::with_samples(0.2, m), OracleKind::Scan).unwrap();
        for (side, set) in [(Side::A, &a), (Side::B, &b)] {
            for p in set {
                u.apply(&UpdateEvent::insert(side, p.clone())).unwrap();
                ours.insert(side, p.clone()).unwrap();
            }
        }
        if (u.query(m).unwrap() - exact).abs() >= 0.5 * exact {
            uniform_bad += 1;
        }
        if (ours.estimate().unwrap().value - exact).abs() < 0.2 * exact {
            ours_good += 1;
        }
    }
    assert!(uniform_bad >= 80, "uniform off by 50% in only {uniform_bad}/{trials} runs");
    assert!(ours_good >= 70, "ours within 20% in only {ours_good}/{trials} runs");
}
