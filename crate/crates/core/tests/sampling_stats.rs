use std::f64::consts::PI;

use coxcell_core::sampling::{
    sample_cox_on_lines, sample_line_process, sample_planar_ppp, sample_realization, trial_rng, AngularMeasure,
    SimulationWindow,
};
use coxcell_core::{LineParams, NetworkConfig, PalmScenario};

fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let v = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
    (m, (v / n).sqrt())
}

/// Two-sample Kolmogorov–Smirnov statistic.
fn ks_two_sample(mut a: Vec<f64>, mut b: Vec<f64>) -> f64 {
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
    }
    d
}

#[test]
fn planar_count_mean() {
    let w = SimulationWindow::fixed(1.0).unwrap();
    let counts: Vec<f64> =
        (0..100_000).map(|t| sample_planar_ppp(10.0, &w, &mut trial_rng(11, t)).len() as f64).collect();
    let (m, se) = mean_and_se(&counts);
    assert!((m - 10.0 * PI).abs() < 3.0 * se, "{m} ± {se}");
}

#[test]
fn planar_points_lie_in_window() {
    let w = SimulationWindow::fixed(0.7).unwrap();
    let pts = sample_planar_ppp(500.0, &w, &mut trial_rng(1, 1));
    assert!(pts.iter().all(|p| w.contains(*p)));
}

#[test]
fn line_count_mean() {
    let w = SimulationWindow::fixed(1.0).unwrap();
    let counts: Vec<f64> = (0..20_000)
        .map(|t| sample_line_process(10.0, AngularMeasure::Isotropic, &w, &mut trial_rng(12, t)).len() as f64)
        .collect();
    let (m, se) = mean_and_se(&counts);
    assert!((m - 20.0).abs() < 3.0 * se, "{m} ± {se}");
}

#[test]
fn points_on_a_diameter() {
    let w = SimulationWindow::fixed(2.0).unwrap();
    let line = [LineParams::new(0.0, 0.0)];
    let counts: Vec<f64> =
        (0..20_000).map(|t| sample_cox_on_lines(&line, 5.0, &w, &mut trial_rng(13, t)).len() as f64).collect();
    let (m, se) = mean_and_se(&counts);
    assert!((m - 20.0).abs() < 3.0 * se, "{m} ± {se}");
}

#[test]
fn cox_intensity_equals_product() {
    let w = SimulationWindow::fixed(1.0).unwrap();
    let per_area: Vec<f64> = (0..10_000)
        .map(|t| {
            let mut rng = trial_rng(14, t);
            let lines = sample_line_process(10.0, AngularMeasure::Isotropic, &w, &mut rng);
            sample_cox_on_lines(&lines, 10.0, &w, &mut rng).len() as f64 / w.area()
        })
        .collect();
    let (m, se) = mean_and_se(&per_area);
    assert!((m - 100.0).abs() < 3.0 * se, "{m} ± {se}");
}

#[test]
fn manhattan_cox_intensity_equals_product() {
    let w = SimulationWindow::fixed(1.0).unwrap();
    let per_area: Vec<f64> = (0..10_000)
        .map(|t| {
            let mut rng = trial_rng(15, t);
            let lines = sample_line_process(5.0, AngularMeasure::Manhattan, &w, &mut rng);
            assert!(lines.iter().all(|l| l.theta == 0.0 || l.theta == PI / 2.0));
            sample_cox_on_lines(&lines, 5.0, &w, &mut rng).len() as f64 / w.area()
        })
        .collect();
    let (m, se) = mean_and_se(&per_area);
    assert!((m - 25.0).abs() < 3.0 * se, "{m} ± {se}");
}

#[test]
fn nearest_distance_law_is_rotation_invariant() {
    // Distance from a fixed off-origin probe to the nearest vehicular base
    // station, against the same probe rotated by a quarter turn, from
    // independent re-runs.
    let cfg = NetworkConfig { lambda_b: 0.0, lambda_l: 5.0, mu_b: 5.0, ..NetworkConfig::default() };
    let w = SimulationWindow::fixed(2.0).unwrap();
    let nearest = |seed: u64, probe: [f64; 2]| -> Vec<f64> {
        (0..4000)
            .filter_map(|t| {
                let real =
                    sample_realization(&cfg, PalmScenario::TypicalPlanarUser, AngularMeasure::Isotropic, &w, seed, t);
                real.vehicular_bs.iter().map(|p| (p.xy[0] - probe[0]).hypot(p.xy[1] - probe[1])).min_by(f64::total_cmp)
            })
            .collect()
    };
    let a = nearest(16, [0.5, 0.0]);
    let b = nearest(17, [0.0, 0.5]);
    let (n, m) = (a.len() as f64, b.len() as f64);
    // 0.1% critical value.
    let crit = 1.95 * ((n + m) / (n * m)).sqrt();
    let d = ks_two_sample(a, b);
    assert!(d < crit, "KS {d} ≥ {crit}");
}

#[test]
fn palm_laws_differ_only_by_the_origin_road() {
    let cfg = NetworkConfig::default();
    let w = SimulationWindow::fixed(1.5).unwrap();
    let p = sample_realization(&cfg, PalmScenario::TypicalPlanarUser, AngularMeasure::Isotropic, &w, 3, 9);
    let v = sample_realization(&cfg, PalmScenario::TypicalVehicularUser, AngularMeasure::Isotropic, &w, 3, 9);
    assert!(p.origin_line.is_none());
    let l0 = v.origin_line.expect("vehicular user has a road");
    assert_eq!(l0.r, 0.0);
    assert_eq!(p.lines, v.lines);
    let same_prefix = p.vehicular_bs.len();
    assert_eq!(p.vehicular_bs[..], v.vehicular_bs[..same_prefix]);
    assert!(v.vehicular_bs[same_prefix..].iter().all(|q| q.line == l0));
}

#[test]
fn vehicular_user_without_road_stations() {
    let cfg = NetworkConfig { mu_b: 0.0, ..NetworkConfig::default() };
    let w = SimulationWindow::fixed(1.0).unwrap();
    let r = sample_realization(&cfg, PalmScenario::TypicalVehicularUser, AngularMeasure::Isotropic, &w, 5, 0);
    assert!(r.vehicular_bs.is_empty());
    assert!(!r.planar_bs.is_empty());
}

#[test]
fn tail_bounded_window_meets_its_bound() {
    for cfg in [
        NetworkConfig::default(),
        NetworkConfig { lambda_b: 1.0, lambda_l: 1.0, mu_b: 1.0, ..NetworkConfig::default() },
        NetworkConfig { alpha: 3.0, ..NetworkConfig::default() },
    ] {
        let w = SimulationWindow::tail_bounded(&cfg, 1e-3).unwrap();
        let lambda = cfg.lambda_b + cfg.cox_bs_intensity();
        let r0 = 0.5 / lambda.sqrt();
        let tail = |rho: f64| 2.0 * PI * lambda * rho.powf(2.0 - cfg.alpha) / (cfg.alpha - 2.0);
        assert!(tail(w.radius) < 1e-3 * tail(r0));
    }
}

#[test]
fn realization_csv_dump() {
    let cfg = NetworkConfig::default();
    let w = SimulationWindow::fixed(0.5).unwrap();
    let r = sample_realization(&cfg, PalmScenario::TypicalVehicularUser, AngularMeasure::Isotropic, &w, 1, 2);
    let mut buf = Vec::new();
    r.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("kind,r,theta,t,x,y"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), r.lines.len() + 1 + r.vehicular_bs.len() + r.planar_bs.len());
}
