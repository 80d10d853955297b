use proptest::prelude::*;

use warpsym::bundles::{from_hopf, BundleSpace};
use warpsym::measure::profile_perimeter;
use warpsym::regions::GridRegion;
use warpsym::spaces::GridScheme;
use warpsym::symmetrize::{halfspace_profile, schwarz_grid, schwarz_profile, Variant};
use warpsym::verify::fuzz::{fuzz_spaces, random_grid_region, random_profile, rng};

fn config() -> ProptestConfig {
    ProptestConfig { cases: 24, ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn profile_symmetral_keeps_volume_and_shrinks_perimeter(seed in any::<u64>(), which in 0usize..5) {
        let fs = &fuzz_spaces()[which];
        let space = &fs.space;
        let profile = random_profile(space, &mut rng(seed, 0)).unwrap();
        let sym = match fs.variant {
            Variant::Halfspace => halfspace_profile(space, &profile),
            _ => schwarz_profile(space, &profile),
        }
        .unwrap();
        prop_assert!(sym.audit.relative_change <= 1e-9, "{:?}", sym.audit);
        prop_assert_eq!(sym.audit.slices_over_allowance, 0);
        let before = profile_perimeter(space, &profile).unwrap().total;
        let after = profile_perimeter(space, &sym.region).unwrap().total;
        prop_assert!(after <= before + 1e-9, "{after} > {before}");
        if fs.variant == Variant::Schwarz {
            prop_assert!(sym.region.is_centered());
        }
    }

    #[test]
    fn profile_symmetrization_is_idempotent(seed in any::<u64>(), which in 0usize..4) {
        let space = &fuzz_spaces()[which].space;
        let once = schwarz_profile(space, &random_profile(space, &mut rng(seed, 0)).unwrap()).unwrap().region;
        let twice = schwarz_profile(space, &once).unwrap().region;
        for (a, b) in once.radius.iter().zip(&twice.radius) {
            prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
        }
    }

    #[test]
    fn grid_symmetral_matches_slice_masses(seed in any::<u64>(), which in 0usize..4, h in 0.01f64..0.04) {
        let space = &fuzz_spaces()[which].space;
        let scheme = GridScheme::with_spacing(space, h, h).unwrap();
        let region = random_grid_region(&scheme, &mut rng(seed, 1));
        let sym = schwarz_grid(space, &region).unwrap();
        prop_assert_eq!(sym.audit.slices_over_allowance, 0);
        let measure = scheme.measure(space);
        let slack: f64 = (0..scheme.base_cells)
            .map(|i| (0..scheme.fiber_cells).map(|j| measure.cell(i, j)).fold(0.0, f64::max))
            .sum();
        for i in 0..scheme.base_cells {
            prop_assert_eq!(region.row(i).iter().filter(|c| **c).count() > 0, sym.region.row(i).iter().filter(|c| **c).count() > 0);
        }
        prop_assert!((region.weighted_volume(&measure) - sym.region.weighted_volume(&measure)).abs() <= 1e-9 * region.weighted_volume(&measure).max(1.0) + slack);
        prop_assert_eq!(&schwarz_grid(space, &sym.region).unwrap().region, &sym.region);
    }

    #[test]
    fn grid_text_round_trips(seed in any::<u64>(), which in 0usize..5) {
        let space = &fuzz_spaces()[which].space;
        let scheme = GridScheme::with_spacing(space, 0.05, 0.05).unwrap();
        let region = random_grid_region(&scheme, &mut rng(seed, 2));
        let (back, id) = GridRegion::from_text(&region.to_text(&space.id)).unwrap();
        prop_assert_eq!(id, space.id.clone());
        prop_assert_eq!(back, region);
    }

    #[test]
    fn lens_distance_is_a_metric(
        q in 1u32..4,
        a in prop::array::uniform3(0.0f64..1.0),
        b in prop::array::uniform3(0.0f64..1.0),
        c in prop::array::uniform3(0.0f64..1.0),
        theta in 0.0f64..std::f64::consts::TAU,
    ) {
        let bundle = BundleSpace::new(1, 1, q).unwrap();
        let pt = |u: [f64; 3]| from_hopf(u[0] * std::f64::consts::FRAC_PI_2, u[1] * std::f64::consts::TAU, u[2] * std::f64::consts::TAU);
        let (x, y, z) = (pt(a), pt(b), pt(c));
        let d = |u, v| bundle.geodesic_distance(u, v).unwrap();
        prop_assert!((d(&x, &y) - d(&y, &x)).abs() <= 1e-12);
        prop_assert!(d(&x, &z) <= d(&x, &y) + d(&y, &z) + 1e-9);
        prop_assert!(d(&x, &x) <= 1e-7);
        let (gx, gy) = (bundle.act(theta, &x), bundle.act(theta, &y));
        prop_assert!((d(&gx, &gy) - d(&x, &y)).abs() <= 1e-9);
        prop_assert!(d(&x, &bundle.deck(1, &x)) <= 1e-7);
    }
}
