use std::f64::consts::LN_2;

use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;

use hypermet_core::four_point::{max_strong_epsilon, DEFAULT_EPS_TOL};
use hypermet_core::sampling::{distance_matrix, random_domain_sample, random_path_metric, random_point};
use hypermet_core::sharpness::{fit_bound_constants, geometric_grid, residual_orders};
use hypermet_core::{
    gromov_delta_with, max_strong_epsilon_auto, ptolemaic_defect_with, rho_matrix, rho_matrix_subset,
    strong_defect_with, sweep, verify_bounds, DistanceMatrix, EpsilonMax, Exec, ModelSpace, SharpnessConfig,
};

fn path_metric(seed: u64, n: usize) -> DistanceMatrix<f64> {
    random_path_metric(n, 0.5, 3.0, &mut StdRng::seed_from_u64(seed)).unwrap()
}

fn hyperbolic_metric(seed: u64, n: usize) -> DistanceMatrix<f64> {
    let space = ModelSpace::hyperbolic(1.0).unwrap();
    let mut rng = StdRng::seed_from_u64(seed);
    let pts: Vec<_> = (0..n).map(|_| random_point(&space, 3.0, &mut rng)).collect();
    distance_matrix(&space, &pts, 1e-9).unwrap()
}

fn close(a: f64, b: f64, scale: f64) -> bool {
    (a - b).abs() <= 1e-12 * scale.max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn restrict_composes(seed in any::<u64>(), picks in proptest::sample::subsequence((0..9).collect::<Vec<usize>>(), 2..9)) {
        let m = path_metric(seed, 9);
        let inner: Vec<usize> = (0..picks.len()).rev().collect();
        let twice = m.restrict(&picks).unwrap().restrict(&inner).unwrap();
        let composed: Vec<usize> = inner.iter().map(|&k| picks[k]).collect();
        prop_assert_eq!(twice, m.restrict(&composed).unwrap());
    }

    #[test]
    fn invariant_under_relabeling(seed in any::<u64>(), perm in Just((0..8).collect::<Vec<usize>>()).prop_shuffle()) {
        let m = hyperbolic_metric(seed, 8);
        let p = m.restrict(&perm).unwrap();
        let scale = m.scale();
        let (a, b) = (gromov_delta_with(&m, Exec::Serial), gromov_delta_with(&p, Exec::Serial));
        prop_assert!(close(a.delta_min, b.delta_min, scale));
        prop_assert!(close(ptolemaic_defect_with(&m, Exec::Serial).0, ptolemaic_defect_with(&p, Exec::Serial).0, scale * scale));
        let (sa, sb) = (strong_defect_with(&m, 1.0, Exec::Serial).unwrap(), strong_defect_with(&p, 1.0, Exec::Serial).unwrap());
        prop_assert!(close(sa.max_defect, sb.max_defect, 1.0));
    }

    #[test]
    fn scaling_covariance(seed in any::<u64>(), s in 0.1f64..10.0) {
        let m = path_metric(seed, 7);
        let ms = m.scaled(s);
        let scale = ms.scale();
        prop_assert!(close(gromov_delta_with(&ms, Exec::Serial).delta_min, s * gromov_delta_with(&m, Exec::Serial).delta_min, scale));
        prop_assert!(close(ptolemaic_defect_with(&ms, Exec::Serial).0, s * s * ptolemaic_defect_with(&m, Exec::Serial).0, scale * scale));
        // strong defect at ε on sM equals the one at sε on M
        let (a, b) = (strong_defect_with(&ms, 0.7, Exec::Serial).unwrap(), strong_defect_with(&m, 0.7 * s, Exec::Serial).unwrap());
        prop_assert!((a.max_defect - b.max_defect).abs() <= 1e-9);
    }

    #[test]
    fn strong_feasibility_is_monotone(seed in any::<u64>()) {
        let m = hyperbolic_metric(seed, 7);
        let grid: Vec<f64> = (0..24).map(|k| 0.05 * 1.3f64.powi(k)).collect();
        let feasible: Vec<bool> = grid.iter().map(|&e| strong_defect_with(&m, e, Exec::Serial).unwrap().feasible).collect();
        // once infeasible, infeasible for every larger ε
        prop_assert!(feasible.windows(2).all(|w| w[0] || !w[1]));
        if let EpsilonMax::Finite(star) = max_strong_epsilon_auto(&m).unwrap() {
            for (&e, &f) in grid.iter().zip(&feasible) {
                if e < star * (1.0 - 1e-6) { prop_assert!(f); }
                if e > star * (1.0 + 1e-6) { prop_assert!(!f); }
            }
        }
    }

    #[test]
    fn parallel_scans_match_serial(seed in any::<u64>(), n in 4usize..14) {
        let m = path_metric(seed, n);
        prop_assert_eq!(gromov_delta_with(&m, Exec::Serial), gromov_delta_with(&m, Exec::Parallel));
        prop_assert_eq!(ptolemaic_defect_with(&m, Exec::Serial), ptolemaic_defect_with(&m, Exec::Parallel));
        prop_assert_eq!(strong_defect_with(&m, 1.3, Exec::Serial).unwrap(), strong_defect_with(&m, 1.3, Exec::Parallel).unwrap());
    }

    #[test]
    fn rho_distances_shrink_as_boundary_grows(seed in any::<u64>()) {
        let space = ModelSpace::euclidean(2).unwrap();
        let sample = random_domain_sample(&space, 6, 4, 2.0, 1e-2, &mut StdRng::seed_from_u64(seed)).unwrap();
        let small = rho_matrix_subset(&sample, &[0, 1]).unwrap().matrix;
        let full = rho_matrix(&sample).unwrap().matrix;
        for i in 0..6 {
            for j in 0..6 {
                prop_assert!(small.get(i, j) <= full.get(i, j) * (1.0 + 1e-12));
            }
        }
    }
}

#[test]
fn explicit_bracket_agrees_with_auto() {
    let m = hyperbolic_metric(3, 7);
    let auto = max_strong_epsilon_auto(&m).unwrap().value();
    let explicit = max_strong_epsilon(&m, 1e-3, 50.0, DEFAULT_EPS_TOL).unwrap().value();
    assert!((auto - explicit).abs() <= 1e-8 * auto);
}

#[test]
fn sphere_is_not_ptolemaic() {
    let space = ModelSpace::Sphere2;
    let mut rng = StdRng::seed_from_u64(11);
    let worst = (0..2000)
        .map(|_| {
            let pts: Vec<_> = (0..4).map(|_| random_point(&space, 1.0, &mut rng)).collect();
            distance_matrix(&space, &pts, 1e-9).map_or(f64::NEG_INFINITY, |m| ptolemaic_defect_with(&m, Exec::Serial).0)
        })
        .fold(f64::NEG_INFINITY, f64::max);
    assert!(worst > 0.1, "{worst}");
}

fn hyperbolic_sweep(kappa: f64) -> Vec<hypermet_core::SweepRow<f64>> {
    let cfg = SharpnessConfig::bare(ModelSpace::hyperbolic(kappa).unwrap(), 1.0, geometric_grid(0.5, 20)).unwrap();
    sweep(&cfg).unwrap()
}

#[test]
fn hyperbolic_sweeps_reach_the_same_limits() {
    for kappa in [0.5, 1.0, 2.0] {
        let rows = hyperbolic_sweep(kappa);
        for r in &rows {
            assert!(r.defect_delta <= LN_2 + 1e-9, "κ={kappa} θ={}: {}", r.theta, r.defect_delta);
            assert!(r.epsilon_max.value() >= 1.0 - 1e-9, "κ={kappa} θ={}", r.theta);
        }
        let last = rows.last().unwrap();
        assert!((last.defect_delta - LN_2).abs() < 1e-2);
        assert!(last.epsilon_max.value() - 1.0 < 1e-2);
        let fc = rows.iter().map(|r| r.residuals.fc).fold(0.0, f64::max);
        assert!(fc < 1e-12, "κ={kappa}: fc residual {fc:e}");
    }
}

#[test]
fn defect_gap_is_first_order() {
    let cfg = SharpnessConfig::bare(ModelSpace::euclidean(2).unwrap(), 1.0, geometric_grid(0.5, 21)).unwrap();
    let rows: Vec<hypermet_core::SweepRow<f64>> = sweep(&cfg).unwrap();
    let fit = residual_orders(&rows).defect.unwrap();
    assert!((fit.slope - 1.0).abs() <= 0.2, "{}", fit.slope);
    assert!(rows.windows(2).all(|w| LN_2 - w[1].defect_delta < LN_2 - w[0].defect_delta));
}

#[test]
fn gromov_witness_is_the_diagonal_pairing() {
    for space in [ModelSpace::euclidean(2).unwrap(), ModelSpace::hyperbolic(1.0).unwrap()] {
        let cfg = SharpnessConfig::bare(space, 1.0, geometric_grid(0.05, 6)).unwrap();
        for row in sweep(&cfg).unwrap() {
            let w = gromov_delta_with(&row.rho, Exec::Serial).witness.unwrap();
            assert_eq!((w.indices, w.pairing), ([0, 1, 2, 3], 0), "{space} θ={}", row.theta);
        }
    }
}

#[test]
fn fitted_bound_constants_predict_the_tail() {
    for space in [ModelSpace::euclidean(2).unwrap(), ModelSpace::hyperbolic(1.0).unwrap()] {
        let cfg = SharpnessConfig::bare(space, 1.0, geometric_grid(0.1, 16)).unwrap();
        let rows = sweep(&cfg).unwrap();
        let (head, tail) = rows.split_at(5);
        let (sigma, tau) = fit_bound_constants(&head.iter().collect::<Vec<_>>());
        assert!(sigma > 0.0 && tau > 0.0);
        for r in tail {
            let check = verify_bounds(r, sigma * 1.05, tau * 1.05);
            assert!(check.all_ok(), "{space} θ={}: {check:?}", r.theta);
        }
    }
}

#[test]
fn single_precision_sweep_tracks_double() {
    let grid64 = geometric_grid(0.5, 8);
    let grid32: Vec<f32> = grid64.iter().map(|&t| t as f32).collect();
    let r64 = sweep(&SharpnessConfig::bare(ModelSpace::euclidean(2).unwrap(), 1.0, grid64).unwrap()).unwrap();
    let r32 = sweep(&SharpnessConfig::bare(ModelSpace::<f32>::euclidean(2).unwrap(), 1.0, grid32).unwrap()).unwrap();
    for (a, b) in r64.iter().zip(&r32) {
        assert!((a.defect_delta - b.defect_delta as f64).abs() < 1e-4, "θ={}", a.theta);
    }
}

#[test]
fn matrix_csv_round_trip_is_exact() {
    let m = hyperbolic_metric(21, 6);
    let mut buf = Vec::new();
    m.write_csv(&mut buf).unwrap();
    let back = hypermet_core::RawMatrix::<f64>::read_csv(buf.as_slice()).unwrap().into_matrix(1e-9).unwrap();
    assert_eq!(back, m);
}
