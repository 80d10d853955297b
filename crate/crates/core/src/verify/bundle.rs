//! Sampled bundle regions run through bundle symmetrization and the Monte
//! Carlo Minkowski estimator.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bundles::{mc_minkowski_perimeter, BundleSpace, McPerimeter, S3Point, SampledRegion, Shape};
use crate::error::{Error, Result};
use crate::measure::profile_perimeter;
use crate::symmetrize::{bundle_symmetrize, hopf_reduced_space};

/// Orbit every bundle scenario is centered on.
pub const REFERENCE: S3Point = [1.0, 0.0, 0.0, 0.0];

/// Base cells of the symmetrized profile.
pub const BUNDLE_BASE_CELLS: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BundleScenario {
    /// Points within 0.5 of the reference orbit.
    Tube,
    /// Geodesic ball of radius 0.8 about the reference point.
    Cap,
    /// Whole orbits at distance 0.3 to 0.9 from the reference orbit.
    FiberUnion,
}

impl BundleScenario {
    pub fn shape(self) -> Shape {
        match self {
            BundleScenario::Tube => Shape::Tube { center: REFERENCE, radius: 0.5 },
            BundleScenario::Cap => Shape::Ball { center: REFERENCE, radius: 0.8 },
            BundleScenario::FiberUnion => Shape::FiberBand { center: REFERENCE, inner: 0.3, outer: 0.9 },
        }
    }
}

impl fmt::Display for BundleScenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BundleScenario::Tube => "tube",
            BundleScenario::Cap => "cap",
            BundleScenario::FiberUnion => "fiber-union",
        })
    }
}

impl FromStr for BundleScenario {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tube" => Ok(BundleScenario::Tube),
            "cap" => Ok(BundleScenario::Cap),
            "fiber-union" => Ok(BundleScenario::FiberUnion),
            o => Err(Error::Unsupported(format!("unknown bundle scenario `{o}`"))),
        }
    }
}

/// Radii of the Monte Carlo enlargement fit.
pub fn mc_radii() -> Vec<f64> {
    (1..=8).map(|k| 0.01 * k as f64).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymmetralPerimeter {
    /// Perimeter of the symmetral in the reduced warped product.
    pub perimeter: f64,
    pub volume: f64,
    pub volume_std_error: f64,
    pub undersampled_cells: usize,
    /// `perimeter ≤ mc.perimeter + sigmas·mc.std_error`.
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BundleScenarioReport {
    pub bundle: BundleSpace,
    pub scenario: BundleScenario,
    pub shape: Shape,
    pub seed: u64,
    pub exact_perimeter: Option<f64>,
    pub exact_volume: Option<f64>,
    pub mc: McPerimeter,
    /// Absent when the action weights differ.
    pub symmetral: Option<SymmetralPerimeter>,
    pub sigmas: f64,
}

/// Samples the scenario's region with `probes` quasi-random points,
/// estimates its perimeter by Monte Carlo and, for equal action weights,
/// compares the perimeter of its bundle symmetral.
pub fn run_bundle_scenario(
    bundle: &BundleSpace,
    scenario: BundleScenario,
    probes: usize,
    seed: u64,
    sigmas: f64,
) -> Result<BundleScenarioReport> {
    let shape = scenario.shape();
    let mc = mc_minkowski_perimeter(bundle, &shape, &mc_radii(), probes, seed)?;
    let symmetral = if bundle.is_hopf_like() {
        let region = SampledRegion::sample(bundle, shape.clone(), probes, seed);
        let target = hopf_reduced_space(bundle);
        let sym = bundle_symmetrize(bundle, &target, &region, &REFERENCE, BUNDLE_BASE_CELLS)?;
        let perimeter = profile_perimeter(&target, &sym.profile)?.total;
        Some(SymmetralPerimeter {
            perimeter,
            volume: sym.target_volume,
            volume_std_error: sym.target_std_error,
            undersampled_cells: sym.undersampled.len(),
            holds: perimeter <= mc.perimeter + sigmas * mc.std_error,
        })
    } else {
        None
    };
    Ok(BundleScenarioReport {
        bundle: *bundle,
        scenario,
        exact_perimeter: shape.exact_perimeter(bundle),
        exact_volume: shape.exact_volume(bundle),
        shape,
        seed,
        mc,
        symmetral,
        sigmas,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hopf_tube_symmetral_is_no_longer() {
        let rep = run_bundle_scenario(&BundleSpace::hopf(), BundleScenario::Tube, 20_000, 3, 3.0).unwrap();
        let sym = rep.symmetral.clone().unwrap();
        assert!(sym.holds, "{rep:?}");
        let exact = rep.exact_perimeter.unwrap();
        assert!((sym.perimeter - exact).abs() / exact < 0.01);
        assert!((rep.mc.perimeter - exact).abs() < 4.0 * rep.mc.std_error + 0.01 * exact);
    }

    #[test]
    fn weighted_actions_skip_the_symmetral() {
        let b = BundleSpace::new(1, 2, 1).unwrap();
        let rep = run_bundle_scenario(&b, BundleScenario::Cap, 4000, 1, 3.0).unwrap();
        assert!(rep.symmetral.is_none());
        assert!(rep.mc.perimeter > 0.0);
        assert_eq!("fiber-union".parse::<BundleScenario>().unwrap(), BundleScenario::FiberUnion);
        assert!("disk".parse::<BundleScenario>().is_err());
    }
}
