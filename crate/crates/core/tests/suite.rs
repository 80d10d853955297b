use approx::assert_abs_diff_eq;

use warpsym::measure::profile_perimeter;
use warpsym::symmetrize::schwarz_profile;
use warpsym::verify::{run_suite, tilted_strip, Level, Suite, Tolerances};

#[test]
fn tilted_strip_straightens_to_the_flat_strip() {
    let (space, spec) = tilted_strip();
    let profile = spec.to_profile(1001).unwrap().unwrap();
    let before = profile_perimeter(&space, &profile).unwrap();
    let after = profile_perimeter(&space, &schwarz_profile(&space, &profile).unwrap().region).unwrap();
    assert_abs_diff_eq!(before.perimeter, 2.0 * 1.25f64.sqrt(), epsilon = 1e-9);
    assert_abs_diff_eq!(after.perimeter, 2.0, epsilon = 1e-9);
}

#[test]
fn quick_suite_passes_and_is_reproducible() {
    let tol = Tolerances::default();
    let a = run_suite(Suite::All, Level::Quick, 3, &tol);
    assert!(a.passed(), "{:#?}", a.failures());
    let b = run_suite(Suite::All, Level::Quick, 3, &tol);
    assert_eq!(a.to_junit(), b.to_junit());
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
}
