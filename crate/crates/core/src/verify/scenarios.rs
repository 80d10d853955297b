//! Grid scenarios run through both perimeter routes, and refinement
//! studies over them.

use serde::{Deserialize, Serialize};

use super::oracle::{fiber_isoperimetry_oracle, OracleOptions, OracleReport};
use crate::error::{Error, Result};
use crate::measure::{minkowski_perimeter, profile_perimeter, MinkowskiOptions};
use crate::par;
use crate::regions::{rasterize, ProfileRegion, RegionSpec, SliceForm};
use crate::spaces::{FiberChart, FiberGeometry, GridScheme, ScalarFn, WarpedSpace};
use crate::symmetrize::{halfspace_grid, ray_cut_for_mass, schwarz_grid, spherical_grid, Variant, VolumeAudit};

/// Base samples of the profile built for the symmetral.
const PROFILE_SAMPLES: usize = 4001;

/// Slack allowed when checking that a column does not grow.
const COLUMN_SLACK: f64 = 1e-9;

/// Relative gap below which the two perimeter routes count as agreeing.
pub const GAP_FLOOR: f64 = 1e-3;

/// A region in a space together with the symmetrization to apply.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridScenario {
    pub id: String,
    pub space: WarpedSpace,
    pub region: RegionSpec,
    pub variant: Variant,
    /// Centered balls are the only fiber minimizers, so equal perimeters
    /// force a centered region.
    #[serde(default)]
    pub unique: bool,
}

/// One scenario at one grid spacing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioRun {
    pub id: String,
    pub h: f64,
    pub base_cells: usize,
    pub fiber_cells: usize,
    pub audit: VolumeAudit,
    pub perimeter_in: f64,
    pub perimeter_in_std_error: f64,
    pub perimeter_out: f64,
    pub perimeter_out_std_error: f64,
    /// `max(0, P(sym R) − P(R))` on the grid.
    pub violation: f64,
    /// Profile-route perimeter of the exact symmetral.
    pub profile_perimeter_out: f64,
    /// Grid-route perimeter of the exact symmetral rasterized at `h`.
    pub rasterized_perimeter_out: f64,
    pub rasterized_std_error: f64,
    /// `|grid route − profile route| / profile route` on the exact
    /// symmetral.
    pub gap: f64,
    /// Discretization allowance `ε(h)` on the grid perimeter inequality:
    /// the absolute gap plus two standard errors of the grid route.
    pub epsilon: f64,
}

impl ScenarioRun {
    /// `P(sym R) ≤ P(R) + ε(h)` on the grid.
    pub fn inequality_holds(&self) -> bool {
        self.perimeter_out <= self.perimeter_in + self.epsilon
    }
}

fn line(density: ScalarFn, extent: f64) -> FiberGeometry {
    FiberGeometry::line(density, extent)
}

fn sine(amp: f64, freq: f64) -> ScalarFn {
    ScalarFn::Sine { amp, freq }
}

fn scenario(id: &str, space: WarpedSpace, region: RegionSpec, unique: bool) -> GridScenario {
    GridScenario { id: id.into(), space, region, variant: Variant::Schwarz, unique }
}

/// The ten built-in grid scenarios. None of them is already symmetric.
pub fn grid_scenarios() -> Vec<GridScenario> {
    let tau = std::f64::consts::TAU;
    let flat = |extent: f64| WarpedSpace::product("flat", [-1.5, 1.5], line(ScalarFn::ONE, extent));
    let rosales = WarpedSpace::product("rosales", [-1.0, 1.0], line(ScalarFn::ExpQuad { rate: 1.0 }, 2.0));
    let cosh = WarpedSpace::product("cosh", [-1.0, 1.0], line(ScalarFn::Cosh { rate: 1.0 }, 2.0));
    vec![
        scenario(
            "flat-tilted-strip",
            WarpedSpace::product("flat", [-1.0, 2.0], line(ScalarFn::ONE, 2.0)),
            RegionSpec::TiltedStrip { base: [0.0, 1.0], slope: 0.5, offset: 0.5, half_width: 0.5 },
            false,
        ),
        scenario(
            "flat-two-disks",
            flat(1.5),
            RegionSpec::Union {
                parts: vec![
                    RegionSpec::Disk { center: [-0.2, 0.4], radius: 0.35 },
                    RegionSpec::Disk { center: [0.25, -0.35], radius: 0.35 },
                ],
            },
            false,
        ),
        scenario(
            "flat-offset-annulus",
            flat(1.5),
            RegionSpec::Annulus { center: [0.0, 0.3], inner: 0.25, outer: 0.6 },
            false,
        ),
        scenario(
            "flat-wavy-band",
            flat(1.5),
            RegionSpec::Band { base: [-0.8, 0.8], radius: ScalarFn::constant(0.3), center: sine(0.3, 3.0), center_shift: 0.0 },
            false,
        ),
        scenario(
            "rosales-offset-disk",
            rosales.clone(),
            RegionSpec::Disk { center: [0.0, 0.3], radius: 0.5 },
            true,
        ),
        scenario(
            "rosales-tilted-strip",
            rosales,
            RegionSpec::TiltedStrip { base: [-0.5, 0.5], slope: 0.3, offset: 0.2, half_width: 0.4 },
            true,
        ),
        scenario(
            "cosh-offset-ellipse",
            cosh,
            RegionSpec::Ellipse { center: [0.2, -0.3], semi: [0.6, 0.35] },
            true,
        ),
        scenario(
            "cylinder-wavy-band",
            WarpedSpace::product("cylinder", [-0.5, 2.5], FiberGeometry::circle(tau, ScalarFn::ONE)),
            RegionSpec::Band { base: [0.0, 2.0], radius: ScalarFn::constant(0.6), center: sine(0.5, 1.5), center_shift: 0.8 },
            false,
        ),
        scenario(
            "spherical-annulus-wavy-band",
            WarpedSpace::new("spherical-annulus", [0.3, 1.7], ScalarFn::identity(), ScalarFn::ONE, FiberGeometry::circle(tau, ScalarFn::ONE)),
            RegionSpec::Band { base: [0.6, 1.4], radius: ScalarFn::constant(0.5), center: sine(0.4, 3.0), center_shift: 1.0 },
            false,
        ),
        scenario(
            "cone-wavy-band",
            WarpedSpace::new(
                "cone",
                [0.0, 1.5],
                ScalarFn::Power { coef: 0.5, exponent: 1.0 },
                ScalarFn::ONE,
                FiberGeometry::circle(tau, ScalarFn::ONE),
            )
            .with_singular(vec![0.0]),
            RegionSpec::Band { base: [0.4, 1.2], radius: ScalarFn::constant(1.0), center: sine(0.6, 4.0), center_shift: 0.0 },
            false,
        ),
    ]
}

/// Built-in scenario by id.
pub fn grid_scenario(id: &str) -> Result<GridScenario> {
    grid_scenarios()
        .into_iter()
        .find(|s| s.id == id)
        .ok_or_else(|| Error::Unsupported(format!("unknown scenario `{id}`")))
}

impl GridScenario {
    /// Grid with cells of side `h` in both chart directions.
    pub fn scheme(&self, h: f64) -> Result<GridScheme> {
        if !(h > 0.0) {
            return Err(Error::Precondition(format!("grid spacing must be positive, got {h}")));
        }
        GridScheme::with_spacing(&self.space, h, h)
    }

    /// Exact symmetral as a profile, from the slice masses of the region.
    pub fn symmetral_profile(&self, samples: usize) -> Result<ProfileRegion> {
        let [lo, hi] = match self.region.base_support() {
            Some([a, b]) => [a.max(self.space.base[0]), b.min(self.space.base[1])],
            None => return Err(Error::InvalidRegion("the empty region has no profile".into())),
        };
        if !(hi > lo) || samples < 2 {
            return Err(Error::InvalidRegion("region support is degenerate".into()));
        }
        let base: Vec<f64> = (0..samples).map(|k| lo + (hi - lo) * k as f64 / (samples - 1) as f64).collect();
        let form = if self.variant == Variant::Halfspace { SliceForm::LowerRay } else { SliceForm::Ball };
        let slices: Vec<Result<(f64, f64)>> = par::map_indexed(samples, |k| {
            let mass = self.region.slice_mass(&self.space, base[k]);
            match form {
                SliceForm::LowerRay => Ok((0.0, ray_cut_for_mass(&self.space, mass)?)),
                SliceForm::Ball => Ok((self.space.radius_for_mass(mass)?, 0.0)),
            }
        });
        let (radius, center): (Vec<f64>, Vec<f64>) = slices.into_iter().collect::<Result<Vec<_>>>()?.into_iter().unzip();
        ProfileRegion::new(form, base, radius, center)
    }

    pub fn run(&self, h: f64) -> Result<ScenarioRun> {
        let scheme = self.scheme(h)?;
        let (base_cells, fiber_cells) = (scheme.base_cells, scheme.fiber_cells);
        let region = self.region.to_grid(scheme);
        let sym = match self.variant {
            Variant::Schwarz => schwarz_grid(&self.space, &region)?,
            Variant::Halfspace => halfspace_grid(&self.space, &region)?,
            Variant::Spherical => spherical_grid(&self.space, &region)?,
        };
        let opts = MinkowskiOptions::default();
        let p_in = minkowski_perimeter(&self.space, &region, &opts)?;
        let p_out = minkowski_perimeter(&self.space, &sym.region, &opts)?;
        let profile = self.symmetral_profile(PROFILE_SAMPLES)?;
        let exact = profile_perimeter(&self.space, &profile)?.total;
        let raster = rasterize(&self.space, &profile, &region.scheme)?.region;
        let est = minkowski_perimeter(&self.space, &raster, &opts)?;
        let p_raster = est.perimeter;
        let gap = if exact > 0.0 {
            (p_raster - exact).abs() / exact
        } else {
            p_raster.abs()
        };
        Ok(ScenarioRun {
            id: self.id.clone(),
            h,
            base_cells,
            fiber_cells,
            audit: sym.audit,
            perimeter_in: p_in.perimeter,
            perimeter_in_std_error: p_in.std_error,
            perimeter_out: p_out.perimeter,
            perimeter_out_std_error: p_out.std_error,
            violation: (p_out.perimeter - p_in.perimeter).max(0.0),
            profile_perimeter_out: exact,
            rasterized_perimeter_out: p_raster,
            rasterized_std_error: est.std_error,
            gap,
            epsilon: (p_raster - exact).abs() + 2.0 * est.std_error,
        })
    }

    /// Runs the fiber isoperimetry oracle at the middle of the region's
    /// base support, at that slice's volume. `None` when the fiber is not
    /// a line or circle, the variant is not Schwarz, or the slice is empty.
    pub fn hypothesis_check(&self) -> Result<Option<OracleReport>> {
        let one_dim_signed = self.space.n() == 1 && matches!(self.space.fiber.chart(), FiberChart::Signed { lo, .. } if lo < 0.0);
        let Some([lo, hi]) = self.region.base_support() else {
            return Ok(None);
        };
        if !one_dim_signed || self.variant != Variant::Schwarz {
            return Ok(None);
        }
        let b = 0.5 * (lo.max(self.space.base[0]) + hi.min(self.space.base[1]));
        let mass = self.region.slice_mass(&self.space, b);
        if mass <= 0.0 || self.space.is_singular(b) {
            return Ok(None);
        }
        let volume = self.space.fiber_scale(b) * mass;
        fiber_isoperimetry_oracle(&self.space, b, volume, &OracleOptions::default()).map(Some)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTable {
    pub id: String,
    pub runs: Vec<ScenarioRun>,
}

impl ConvergenceTable {
    pub const COLUMNS: [&'static str; 3] = ["volume_error", "violation", "gap"];

    fn column(&self, name: &str) -> Vec<f64> {
        self.runs
            .iter()
            .map(|r| match name {
                "volume_error" => r.audit.relative_change,
                "violation" => r.violation,
                _ => r.gap,
            })
            .collect()
    }

    /// Stated standard error of each entry of a column.
    fn noise(&self, name: &str) -> Vec<f64> {
        self.runs
            .iter()
            .map(|r| match name {
                "volume_error" => 0.0,
                "violation" => r.perimeter_in_std_error + r.perimeter_out_std_error,
                _ => r.rasterized_std_error / r.profile_perimeter_out.max(f64::MIN_POSITIVE),
            })
            .collect()
    }

    fn grows(&self, name: &str) -> bool {
        let v = self.column(name);
        let e = self.noise(name);
        let floor = if name == "gap" { GAP_FLOOR } else { 0.0 };
        let slack = |a: f64| COLUMN_SLACK * a.abs().max(1.0);
        let step = (0..v.len() - 1).any(|k| v[k + 1] > floor.max(v[k] + 2.0 * (e[k] + e[k + 1])) + slack(v[k]));
        let (first, last) = (v[0], v[v.len() - 1]);
        step || last > floor.max(first) + slack(first)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "id,h,base_cells,fiber_cells,volume_error,perimeter_in,perimeter_in_std_error,perimeter_out,perimeter_out_std_error,violation,profile_perimeter_out,rasterized_perimeter_out,rasterized_std_error,gap,epsilon\n",
        );
        for r in &self.runs {
            out.push_str(&format!(
                "{},{},{},{},{:e},{},{:e},{},{:e},{:e},{},{},{:e},{:e},{:e}\n",
                r.id,
                r.h,
                r.base_cells,
                r.fiber_cells,
                r.audit.relative_change,
                r.perimeter_in,
                r.perimeter_in_std_error,
                r.perimeter_out,
                r.perimeter_out_std_error,
                r.violation,
                r.profile_perimeter_out,
                r.rasterized_perimeter_out,
                r.rasterized_std_error,
                r.gap,
                r.epsilon
            ));
        }
        out
    }

    /// First column that grows from one level to the next by more than
    /// twice the stated standard errors, or ends above where it started.
    /// Gaps under [`GAP_FLOOR`] never count as growth.
    pub fn growing_column(&self) -> Option<&'static str> {
        Self::COLUMNS.into_iter().find(|c| self.grows(c))
    }

    pub fn verdict(&self) -> Result<()> {
        match self.growing_column() {
            Some(column) => Err(Error::NotConverging { column: column.into(), table: self.to_csv() }),
            None => Ok(()),
        }
    }
}

fn check_levels(levels: &[f64]) -> Result<()> {
    if levels.len() < 2 || levels.iter().any(|&h| !(h > 0.0)) || levels.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::Precondition("refinement levels must be at least two positive, strictly decreasing spacings".into()));
    }
    Ok(())
}

/// Runs `scenario` at each spacing and tabulates the columns without
/// judging them.
pub fn convergence_table(scenario: &GridScenario, levels: &[f64]) -> Result<ConvergenceTable> {
    check_levels(levels)?;
    let runs = levels.iter().map(|&h| scenario.run(h)).collect::<Result<Vec<_>>>()?;
    Ok(ConvergenceTable { id: scenario.id.clone(), runs })
}

/// As [`convergence_table`], failing with the table attached when volume
/// error, violation or gap grows under refinement.
pub fn convergence_study(scenario: &GridScenario, levels: &[f64]) -> Result<ConvergenceTable> {
    let table = convergence_table(scenario, levels)?;
    table.verdict()?;
    Ok(table)
}
