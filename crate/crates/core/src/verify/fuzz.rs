//! Seeded random inputs for the property checks.

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::regions::{GridRegion, ProfileRegion, RegionSpec};
use crate::spaces::{FiberChart, FiberGeometry, GridScheme, ScalarFn, WarpedSpace};
use crate::symmetrize::Variant;

/// Base samples of every random profile.
pub const FUZZ_SAMPLES: usize = 401;

/// A space together with the variant whose fiber hypothesis it meets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FuzzSpace {
    pub space: WarpedSpace,
    pub variant: Variant,
    /// Centered balls are the only fiber minimizers.
    pub unique: bool,
}

/// Spaces of the warped presets in which balls about `p` (or lower rays,
/// for the half-space variant) are isoperimetric in every fiber.
pub fn fuzz_spaces() -> Vec<FuzzSpace> {
    let circle = || FiberGeometry::circle(TAU, ScalarFn::ONE);
    let entry = |space: WarpedSpace, variant: Variant, unique: bool| FuzzSpace { space, variant, unique };
    vec![
        entry(
            WarpedSpace::product("flat-line", [0.0, 1.0], FiberGeometry::line(ScalarFn::ONE, 2.0)),
            Variant::Schwarz,
            false,
        ),
        entry(
            WarpedSpace::product("rosales-line", [0.0, 1.0], FiberGeometry::line(ScalarFn::ExpQuad { rate: 1.0 }, 2.0)),
            Variant::Schwarz,
            true,
        ),
        entry(
            WarpedSpace::new("spherical-annulus", [0.5, 1.5], ScalarFn::identity(), ScalarFn::ONE, circle()),
            Variant::Schwarz,
            false,
        ),
        entry(
            WarpedSpace::new("cone-over-circle", [0.0, 1.0], ScalarFn::Power { coef: 0.5, exponent: 1.0 }, ScalarFn::ONE, circle())
                .with_singular(vec![0.0]),
            Variant::Schwarz,
            false,
        ),
        entry(
            WarpedSpace::product("exp-line", [0.0, 1.0], FiberGeometry::line(ScalarFn::Exp { rate: 1.0 }, 10.0)),
            Variant::Halfspace,
            false,
        ),
    ]
}

pub fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

/// Smooth random function `a0 + a1 sin(ω b + φ)` with `|a1| ∈ [lo1, hi1]`.
fn wave(rng: &mut ChaCha8Rng, a0: f64, lo1: f64, hi1: f64) -> impl Fn(f64) -> f64 {
    let a1 = rng.random_range(lo1..=hi1) * if rng.random::<bool>() { 1.0 } else { -1.0 };
    let omega = rng.random_range(1.0..6.0);
    let phase = rng.random_range(0.0..TAU);
    move |b| a0 + a1 * (omega * b + phase).sin()
}

/// Base sub-interval at least half as long as the base, away from
/// singular points.
fn sub_interval(rng: &mut ChaCha8Rng, space: &WarpedSpace) -> (f64, f64) {
    let [lo, hi] = space.base;
    let len = hi - lo;
    let guard = |b: f64| space.singular_base.iter().any(|&s| (s - b).abs() < 0.05 * len);
    let mut a = lo + rng.random_range(0.0..0.2) * len;
    let mut b = hi - rng.random_range(0.0..0.2) * len;
    if guard(a) {
        a += 0.05 * len;
    }
    if guard(b) {
        b -= 0.05 * len;
    }
    (a, b)
}

/// Random smooth ball profile in `space`. Centers vary along the base on
/// line and circle fibers and sit at `p` on radial fibers.
pub fn random_profile(space: &WarpedSpace, rng: &mut ChaCha8Rng) -> Result<ProfileRegion> {
    let (lo, hi) = sub_interval(rng, space);
    let fiber = &space.fiber;
    let rmax = fiber.max_radius();
    match fiber.chart() {
        FiberChart::Signed { period: Some(_), .. } => {
            let r0 = rng.random_range(0.15..0.6) * rmax;
            let radius = wave(rng, r0, 0.0, 0.3 * r0);
            let c0 = rng.random_range(-PI..PI);
            let center = wave(rng, c0, 0.1, 1.0);
            ProfileRegion::from_fn(lo, hi, FUZZ_SAMPLES, |b| (radius(b), center(b)))
        }
        FiberChart::Signed { period: None, .. } => {
            let r0 = rng.random_range(0.1..0.3) * rmax;
            let radius = wave(rng, r0, 0.0, 0.3 * r0);
            let room = rmax - 1.3 * r0;
            let c0 = rng.random_range(-0.4..0.4) * room;
            let center = wave(rng, c0, 0.05 * room, 0.5 * room);
            ProfileRegion::from_fn(lo, hi, FUZZ_SAMPLES, |b| (radius(b), center(b)))
        }
        FiberChart::Radial { .. } => {
            let r0 = rng.random_range(0.2..0.6) * rmax;
            let radius = wave(rng, r0, 0.0, 0.3 * r0);
            ProfileRegion::from_fn(lo, hi, FUZZ_SAMPLES, |b| (radius(b), 0.0))
        }
    }
}

/// The same profile moved onto `p` slice by slice.
pub fn centered(profile: &ProfileRegion) -> ProfileRegion {
    let mut p = profile.clone();
    if p.form == crate::regions::SliceForm::Ball {
        p.center.iter_mut().for_each(|c| *c = 0.0);
    }
    p
}

/// Union of one to three random ellipses in chart coordinates, inside the
/// grid's box.
pub fn random_region_spec(scheme: &GridScheme, rng: &mut ChaCha8Rng) -> RegionSpec {
    let (bl, bh) = (scheme.base_lo, scheme.base_hi);
    let (tl, th) = (scheme.fiber_lo, scheme.fiber_hi);
    let parts = (0..rng.random_range(1..=3))
        .map(|_| {
            let semi = [rng.random_range(0.1..0.35) * (bh - bl), rng.random_range(0.1..0.35) * (th - tl)];
            let center = [
                rng.random_range(bl + semi[0]..bh - semi[0]),
                rng.random_range(tl + semi[1]..th - semi[1]),
            ];
            RegionSpec::Ellipse { center, semi }
        })
        .collect();
    RegionSpec::Union { parts }
}

pub fn random_grid_region(scheme: &GridScheme, rng: &mut ChaCha8Rng) -> GridRegion {
    random_region_spec(scheme, rng).to_grid(scheme.clone())
}

/// Sampled pair `(x, f, h)` on a random increasing grid. When `satisfying`
/// every forward slope of `f` is at most that of `h`; otherwise exactly one
/// slope exceeds it, at the returned index. Samples are dyadic, so tied
/// slopes stay exactly tied.
pub fn random_comparison_pair(rng: &mut ChaCha8Rng, satisfying: bool) -> (Vec<f64>, Vec<f64>, Vec<f64>, Option<usize>) {
    let n = rng.random_range(8..200);
    let dyadic = |k: i64, bits: i32| k as f64 * 2f64.powi(-bits);
    let mut xs = vec![dyadic(rng.random_range(-5120..5120), 10)];
    for _ in 1..n {
        let last = *xs.last().unwrap();
        xs.push(last + dyadic(rng.random_range(1..1024), 10));
    }
    let witness = (!satisfying).then(|| rng.random_range(0..n - 1));
    let (mut f, mut h) = (vec![dyadic(rng.random_range(-48..48), 4)], vec![dyadic(rng.random_range(-48..48), 4)]);
    for k in 0..n - 1 {
        let dx = xs[k + 1] - xs[k];
        let dh = dyadic(rng.random_range(-160..=160), 4);
        let gap = if rng.random_range(0..4) == 0 { 0.0 } else { dyadic(rng.random_range(1..=80), 4) };
        let df = if witness == Some(k) { dh + dyadic(rng.random_range(1..=16), 4) } else { dh - gap };
        h.push(h[k] + dh * dx);
        f.push(f[k] + df * dx);
    }
    (xs, f, h, witness)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profiles_are_valid_in_their_spaces() {
        let mut r = rng(1, 0);
        for fs in fuzz_spaces() {
            fs.space.validate().unwrap();
            for _ in 0..20 {
                let p = random_profile(&fs.space, &mut r).unwrap();
                p.validate(&fs.space).unwrap();
                assert!(p.weighted_volume(&fs.space) > 0.0);
            }
        }
    }

    #[test]
    fn same_seed_same_inputs() {
        let s = &fuzz_spaces()[0];
        let a = random_profile(&s.space, &mut rng(5, 2)).unwrap();
        let b = random_profile(&s.space, &mut rng(5, 2)).unwrap();
        assert_eq!(a, b);
        let (x1, ..) = random_comparison_pair(&mut rng(5, 3), true);
        let (x2, ..) = random_comparison_pair(&mut rng(5, 3), true);
        assert_eq!(x1, x2);
    }

    #[test]
    fn comparison_pairs_have_the_stated_slopes() {
        let mut r = rng(9, 0);
        for satisfying in [true, false] {
            for _ in 0..50 {
                let (x, f, h, w) = random_comparison_pair(&mut r, satisfying);
                let bad: Vec<usize> = (0..x.len() - 1)
                    .filter(|&k| (f[k + 1] - f[k]) / (x[k + 1] - x[k]) > (h[k + 1] - h[k]) / (x[k + 1] - x[k]))
                    .collect();
                assert_eq!(bad, w.into_iter().collect::<Vec<_>>());
            }
        }
    }

    #[test]
    fn grid_regions_are_nonempty() {
        let s = &fuzz_spaces()[0].space;
        let sch = GridScheme::new(s, 40, 80).unwrap();
        let mut r = rng(3, 0);
        for _ in 0..10 {
            assert!(!random_grid_region(&sch, &mut r).is_empty());
        }
    }
}
