use piag_web::{box_trajectory_json, convergence_curves_json, stepsize_thresholds_json};
use serde_json::Value;

#[test]
fn curves_decay_for_every_tau() {
    let v: Value = serde_json::from_str(&convergence_curves_json(6, 8, 1, 0.3, &[0, 2, 5], "cyclic", 20_000).unwrap()).unwrap();
    let curves = v["curves"].as_array().unwrap();
    assert_eq!(curves.len(), 3);
    for c in curves {
        assert_eq!(c["termination"], "converged");
        let gap = c["gap"].as_array().unwrap();
        assert!(gap.len() <= 1501);
        assert!(gap.last().unwrap().as_f64().unwrap() < 1e-8 * gap[0].as_f64().unwrap());
        assert!(c["rate"].as_f64().unwrap() < 1.0);
    }
    assert!(curves[0]["alpha"].as_f64().unwrap() > curves[2]["alpha"].as_f64().unwrap());
}

#[test]
fn thresholds_shrink_with_tau() {
    let v: Value = serde_json::from_str(&stepsize_thresholds_json(2.0, 0.5, 1.0, 10).unwrap()).unwrap();
    let a: Vec<f64> = v["alpha_lemma2"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    let c8: Vec<f64> = v["c8"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    assert_eq!(a.len(), 11);
    assert!((a[0] - 1.0).abs() < 1e-15);
    assert!(a.windows(2).all(|w| w[1] < w[0]));
    assert!(c8.iter().zip(&a).all(|(c, a)| c <= a));
    assert!(stepsize_thresholds_json(1.0, 2.0, 1.0, 3).is_err());
}

#[test]
fn trajectory_ends_near_a_stationary_point() {
    let v: Value = serde_json::from_str(&box_trajectory_json(3, 2, 1.0, 3, "adversarial_max", 0.01, -0.02, 100_000).unwrap()).unwrap();
    assert_eq!(v["termination"], "converged");
    assert!(v["final_distance"].as_f64().unwrap() < 1e-6);
    let hw = v["half_width"].as_f64().unwrap();
    for pt in v["path"].as_array().unwrap() {
        for c in pt.as_array().unwrap() {
            assert!(c.as_f64().unwrap().abs() <= hw);
        }
    }
    assert!(box_trajectory_json(3, 2, 1.0, 3, "sideways", 0.0, 0.0, 10).is_err());
}
