use approx::assert_relative_eq;

use cclab_core::convexity::{
    build_fowler_instance, build_fowler_instance_with, descending_t0, flat_instance, scan_balls,
    verify_hypotheses, InstanceOptions, SampleSpec,
};
use cclab_core::fowler::{equilibrium_v0, period};
use cclab_core::geometry::{dist, norm};
use cclab_core::{Dimension, Error};

fn dim(n: usize) -> Dimension {
    Dimension::new(n).unwrap()
}

#[test]
fn flat_metric_spheres_have_curvature_one_over_radius() {
    // u = c scales lengths by c^{2/(n-2)}
    for (n, c) in [(3, 1.0), (4, 2.5), (5, 0.4)] {
        let inst = flat_instance(dim(n), c).unwrap();
        let report = scan_balls(&inst, 16, 24, 9).unwrap();
        let scale = f64::powf(c, -2.0 / (n as f64 - 2.0));
        for b in &report.balls {
            assert_relative_eq!(b.min_h, scale / b.radius, max_relative = 1e-12);
            assert!((dist(&b.argmin, &b.center) - b.radius).abs() < 1e-12);
        }
    }
}

#[test]
fn boundary_curvature_follows_the_energy_relation() {
    // on |x| = 1, h = (2/(n-2)) v^{-n/(n-2)} |v'| with v'² = H + c v² - c v^{2n/(n-2)}
    for n in [3, 4, 6] {
        let nd = dim(n);
        let eps = 0.35 * equilibrium_v0(nd);
        let inst = build_fowler_instance(nd, eps, descending_t0(nd, eps, 0.3).unwrap()).unwrap();
        let nf = n as f64;
        let (c, p) = (((nf - 2.0) / 2.0).powi(2), 2.0 * nf / (nf - 2.0));
        let h_level = c * eps.powf(p) - c * eps * eps;
        let mut x = vec![0.0; n];
        x[0] = 1.0;
        let v = inst.factor().value(&x).unwrap();
        let slope = (h_level + c * v * v - c * v.powf(p)).sqrt();
        let want = 2.0 / (nf - 2.0) * v.powf(-nf / (nf - 2.0)) * slope;
        assert_relative_eq!(inst.boundary_h_min, want, max_relative = 1e-6);
    }
}

#[test]
fn descending_instances_are_convex_on_every_sampled_sphere() {
    for n in [3, 4, 5] {
        let nd = dim(n);
        for frac in [0.2, 0.6, 0.95] {
            let eps = frac * equilibrium_v0(nd);
            for descent in [0.1, 0.9] {
                let inst = build_fowler_instance(nd, eps, descending_t0(nd, eps, descent).unwrap())
                    .unwrap();
                let hyp = verify_hypotheses(&inst, &SampleSpec::default()).unwrap();
                assert!(hyp.passed, "n={n} frac={frac} descent={descent}: {hyp:?}");
                let report = scan_balls(&inst, 40, 40, 3).unwrap();
                assert!(report.global_min_h > 0.0, "n={n} frac={frac}");
            }
        }
    }
}

#[test]
fn scanned_balls_stay_inside_and_clear_of_the_origin() {
    let nd = dim(4);
    let eps = 0.5 * equilibrium_v0(nd);
    let inst = build_fowler_instance(nd, eps, descending_t0(nd, eps, 0.5).unwrap()).unwrap();
    let report = scan_balls(&inst, 120, 10, 5).unwrap();
    assert_eq!(report.balls.len(), 120);
    let delta = report.tolerances.exclusion_radius;
    for b in &report.balls {
        assert!(norm(&b.center) + b.radius < 1.0);
        assert!(norm(&b.center) - b.radius > delta);
    }
    let lowest = report
        .balls
        .iter()
        .map(|b| b.min_h)
        .fold(f64::INFINITY, f64::min);
    assert_eq!(lowest, report.global_min_h);
}

#[test]
fn scan_depends_only_on_the_seed() {
    let nd = dim(3);
    let eps = 0.4 * equilibrium_v0(nd);
    let inst = build_fowler_instance(nd, eps, descending_t0(nd, eps, 0.5).unwrap()).unwrap();
    let a = scan_balls(&inst, 30, 20, 11).unwrap();
    let b = scan_balls(&inst, 30, 20, 11).unwrap();
    let c = scan_balls(&inst, 30, 20, 12).unwrap();
    assert_eq!(
        serde_json::to_string(&a).unwrap(),
        serde_json::to_string(&b).unwrap()
    );
    assert_ne!(a.balls, c.balls);
    // a longer scan extends a shorter one
    let longer = scan_balls(&inst, 45, 20, 11).unwrap();
    assert_eq!(&longer.balls[..30], &a.balls[..]);
}

#[test]
fn ascending_phase_is_rejected_unless_overridden() {
    let nd = dim(3);
    let eps = 0.5 * equilibrium_v0(nd);
    let t0 = 0.25 * period(eps, nd).unwrap();
    let err = build_fowler_instance(nd, eps, t0).unwrap_err();
    assert!(matches!(err, Error::HypothesisViolation(_)));

    let opts = InstanceOptions {
        allow_violations: true,
        ..InstanceOptions::default()
    };
    let inst = build_fowler_instance_with(nd, eps, t0, &opts).unwrap();
    assert!(inst.boundary_h_min < 0.0);
    let hyp = verify_hypotheses(&inst, &SampleSpec::default()).unwrap();
    assert!(!hyp.boundary_ok && !hyp.passed);
    assert!(hyp.residual_ok);
}

#[test]
fn cylinder_instance_has_a_flat_boundary() {
    let nd = dim(4);
    let v0 = equilibrium_v0(nd);
    let inst = build_fowler_instance(nd, v0, 0.0).unwrap();
    assert!(inst.boundary_h_min.abs() < 1e-10);
    assert!(
        verify_hypotheses(&inst, &SampleSpec::default())
            .unwrap()
            .passed
    );
}
