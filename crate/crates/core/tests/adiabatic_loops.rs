use std::f64::consts::PI;

use triphonon::dynamics::{propagate, default_dt, SinglePhononState, Site};
use triphonon::experiment::{default_fringe_delays, run_berry};
use triphonon::model::{eigensystem, Band};
use triphonon::paths::{build_path_pair, dynamical_phase, special_points, PathFamily};
use triphonon::CurvatureModel;

#[test]
fn slow_loop_returns_band_occupations() {
    let m = CurvatureModel::fitted();
    let pair = build_path_pair(&m, PathFamily::Canonical, 4.0, 80).unwrap();
    let modes = eigensystem(&m, pair.enclosing.start());
    let psi0 = SinglePhononState::at_site(Site::C);
    let before = psi0.band_populations(&modes);
    for path in [&pair.enclosing, &pair.non_enclosing] {
        let sched = path.default_schedule().unwrap();
        let run = propagate(&psi0, &m, &sched, default_dt(&m, &sched)).unwrap();
        let after = run.state.band_populations(&modes);
        for k in 0..3 {
            assert!((after[k] - before[k]).abs() < 0.02, "{:?} vs {:?}", after, before);
        }
    }
}

#[test]
fn slow_canonical_pair_shows_pi() {
    let m = CurvatureModel::fitted();
    let pair = build_path_pair(&m, PathFamily::Canonical, 4.0, 80).unwrap();
    let run = run_berry(&m, &pair, &default_fringe_delays(&m, pair.enclosing.start()), 1.0).unwrap();
    assert!((run.delta_phi / PI - 1.0).abs() < 0.02, "{}", run.delta_phi / PI);
}

#[test]
fn fast_pair_shows_no_phase() {
    let m = CurvatureModel::fitted();
    let pair = build_path_pair(&m, PathFamily::Canonical, 0.1, 80).unwrap();
    let run = run_berry(&m, &pair, &default_fringe_delays(&m, pair.enclosing.start()), 1.0).unwrap();
    assert!(run.delta_phi / PI < 0.05, "{}", run.delta_phi / PI);
}

#[test]
fn pair_members_share_dynamical_phase() {
    let m = CurvatureModel::fitted();
    for family in PathFamily::GENERATED {
        let pair = build_path_pair(&m, family, 1.0, 80).unwrap();
        for band in [Band::Two, Band::Three] {
            let a = dynamical_phase(&m, &pair.enclosing, band).unwrap();
            let b = dynamical_phase(&m, &pair.non_enclosing, band).unwrap();
            assert!((a - b).abs() < 1e-3 * a.abs().max(1.0), "{family:?} {band}: {a} vs {b}");
        }
    }
}

#[test]
fn paths_start_at_the_special_point() {
    let m = CurvatureModel::fitted();
    let (start, _) = special_points(m.alpha).unwrap();
    for family in PathFamily::GENERATED {
        let pair = build_path_pair(&m, family, 1.0, 40).unwrap();
        assert_eq!(pair.enclosing.start(), start);
        assert_eq!(pair.non_enclosing.start(), start);
    }
}
