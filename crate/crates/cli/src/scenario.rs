//! The scenario pipeline: build the space, load or generate the region,
//! symmetrize, measure and verify.

use std::path::Path;

use serde::{Deserialize, Serialize};
use warpsym::bundles::{product_distance_comparison, BundleSpace, ComparisonReport};
use warpsym::measure::{jensen_chain, minkowski_perimeter, profile_perimeter, JensenChainReport, MinkowskiEstimate, MinkowskiOptions, ProfilePerimeter};
use warpsym::regions::{rasterize, slice_volume_curve, GridRegion, ProfileRegion, Region, RegionSpec};
use warpsym::spaces::{GridScheme, WarpedSpace};
use warpsym::symmetrize::{symmetrize, Variant, VolumeAudit};
use warpsym::verify::{run_bundle_scenario, BundleScenarioReport, GridScenario, Tolerances};

use crate::config::{load_config, region_text, BundleSettings, Expectations, LoadedRegion, Pipeline, ScenarioConfig};
use crate::error::CliResult;
use crate::output::{Artifact, Artifacts};

/// Base samples of the exact symmetral used to size `ε(h)`.
const SYMMETRAL_SAMPLES: usize = 4001;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    /// Counted in the verdict.
    pub asserted: bool,
    pub passed: bool,
    pub value: f64,
    pub bound: f64,
    pub detail: String,
}

impl Check {
    fn new(name: &str, asserted: bool, value: f64, bound: f64, passed: bool, detail: impl Into<String>) -> Self {
        Self { name: name.into(), asserted, passed, value, bound, detail: detail.into() }
    }

    /// `value ≤ bound`.
    fn at_most(name: &str, asserted: bool, value: f64, bound: f64, detail: impl Into<String>) -> Self {
        Self::new(name, asserted, value, bound, value <= bound, detail)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileRun {
    pub samples: usize,
    pub audit: VolumeAudit,
    pub perimeter_in: ProfilePerimeter,
    pub perimeter_out: ProfilePerimeter,
    pub decrease: f64,
    pub jensen_holds: bool,
    pub jensen_violations: [usize; 4],
    pub equality: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridRun {
    pub h_base: f64,
    pub h_fiber: f64,
    pub base_cells: usize,
    pub fiber_cells: usize,
    pub audit: VolumeAudit,
    pub perimeter_in: f64,
    pub perimeter_in_std_error: f64,
    pub perimeter_out: f64,
    pub perimeter_out_std_error: f64,
    pub decrease: f64,
    /// Allowed excess of the symmetral's perimeter over the input's.
    pub epsilon: f64,
    /// `rasterized-symmetral` when sized against the exact symmetral,
    /// `standard-errors` otherwise.
    pub epsilon_source: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisRun {
    pub b: f64,
    pub volume: f64,
    pub centered_minimizes: bool,
    pub strict: bool,
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BundleRun {
    pub bundle: BundleSpace,
    pub scenario: Option<BundleScenarioReport>,
    pub distance: Option<ComparisonReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub id: String,
    pub description: String,
    pub seed: u64,
    pub tolerances: String,
    pub space: Option<WarpedSpace>,
    pub variant: Option<Variant>,
    pub volume: Option<f64>,
    pub profile: Option<ProfileRun>,
    pub grid: Option<GridRun>,
    pub hypothesis: Option<HypothesisRun>,
    pub bundle: Option<BundleRun>,
    pub checks: Vec<Check>,
    pub passed: bool,
}

impl ScenarioReport {
    pub fn evidence_csv(&self) -> String {
        let mut out = String::from("check,asserted,passed,value,bound,detail\n");
        for c in &self.checks {
            out.push_str(&format!(
                "{},{},{},{:e},{:e},\"{}\"\n",
                c.name,
                c.asserted,
                c.passed,
                c.value,
                c.bound,
                c.detail.replace('"', "\"\"")
            ));
        }
        out
    }
}

/// Loads `target` (a path or preset id) and runs it.
pub fn run_scenario(target: &str, seed: u64, tol: &Tolerances) -> CliResult<(ScenarioReport, Artifacts)> {
    let (cfg, dir) = load_config(target)?;
    run_config(&cfg, &dir, target, seed, tol)
}

pub fn run_config(cfg: &ScenarioConfig, dir: &Path, origin: &str, seed: u64, tol: &Tolerances) -> CliResult<(ScenarioReport, Artifacts)> {
    let pipeline = cfg.pipeline(dir, origin)?;
    let mut report = ScenarioReport {
        id: cfg.id.clone(),
        description: cfg.description.clone(),
        seed,
        tolerances: tol.name.clone(),
        space: None,
        variant: None,
        volume: None,
        profile: None,
        grid: None,
        hypothesis: None,
        bundle: None,
        checks: Vec::new(),
        passed: false,
    };
    let mut artifacts = Artifacts::default();
    match pipeline {
        Pipeline::Bundle(b) => run_bundle(&b, seed, tol, &mut report, &mut artifacts)?,
        Pipeline::Warped { space, variant, region } => {
            run_warped(&space, variant, &region, &cfg.expect, tol, &mut report, &mut artifacts)?;
            report.space = Some(space);
            report.variant = Some(variant);
        }
    }
    report.passed = report.checks.iter().all(|c| !c.asserted || c.passed);
    artifacts.push(Artifact::new("evidence.csv", report.evidence_csv()));
    Ok((report, artifacts))
}

fn run_bundle(b: &BundleSettings, seed: u64, tol: &Tolerances, report: &mut ScenarioReport, artifacts: &mut Artifacts) -> CliResult<()> {
    let bundle = BundleSpace::new(b.k, b.l, b.q)?;
    let mut run = BundleRun { bundle, scenario: None, distance: None };
    if let Some(sc) = b.scenario {
        let rep = run_bundle_scenario(&bundle, sc, b.probes, seed, tol.mc_sigmas)?;
        let mc = &rep.mc;
        let mut curve = String::from("r,volume\n");
        curve.push_str(&format!("0,{}\n", mc.volume));
        for (r, v) in mc.radii.iter().zip(&mc.volumes) {
            curve.push_str(&format!("{r},{v}\n"));
        }
        artifacts.push(Artifact::new("curves/mc_enlargement.csv", curve));
        if let Some(exact) = rep.exact_perimeter {
            let dev = (mc.perimeter - exact).abs();
            let bound = tol.mc_sigmas * mc.std_error + tol.golden * exact;
            report.checks.push(Check::at_most(
                "mc-perimeter-vs-closed-form",
                false,
                dev,
                bound,
                format!("Monte Carlo {} ± {:.3e} against {}", mc.perimeter, mc.std_error, exact),
            ));
        }
        if let Some(sym) = &rep.symmetral {
            report.checks.push(Check::at_most(
                "symmetral-perimeter",
                true,
                sym.perimeter,
                mc.perimeter + tol.mc_sigmas * mc.std_error,
                format!("symmetral {} against Monte Carlo {} + {}σ (σ = {})", sym.perimeter, mc.perimeter, tol.mc_sigmas, mc.std_error),
            ));
        }
        run.scenario = Some(rep);
    }
    if let Some(pairs) = b.distance_pairs {
        let rep = product_distance_comparison(&bundle, pairs, seed)?;
        report.checks.push(Check::new(
            "product-distance",
            true,
            rep.violations as f64,
            0.0,
            rep.violations == 0,
            format!("{} pairs, largest excess {}", rep.pairs, rep.max_excess),
        ));
        run.distance = Some(rep);
    }
    report.bundle = Some(run);
    Ok(())
}

fn run_warped(
    space: &WarpedSpace,
    variant: Variant,
    region: &LoadedRegion,
    expect: &Expectations,
    tol: &Tolerances,
    report: &mut ScenarioReport,
    artifacts: &mut Artifacts,
) -> CliResult<()> {
    let (profile_in, grid_in, spec, h) = match region {
        LoadedRegion::File(Region::Profile(p)) => (Some(p.clone()), None, None, None),
        LoadedRegion::File(Region::Grid(g)) => (None, Some(g.clone()), None, None),
        LoadedRegion::Spec { spec, profile, grid } => {
            let p = match (profile, spec) {
                (_, RegionSpec::Empty) | (None, _) => None,
                (Some(ps), _) => Some(spec.to_profile(ps.samples).ok_or_else(|| {
                    crate::error::CliError::Usage(format!("region kind of `{}` has no profile description; use `grid`", report.id))
                })??),
            };
            let empty_profile = profile.is_some() && *spec == RegionSpec::Empty;
            let g = match grid {
                Some(gs) => Some(spec.to_grid(GridScheme::with_spacing(space, gs.h, gs.h)?)),
                None if empty_profile => Some(spec.to_grid(GridScheme::new(space, 1, 1)?)),
                None => None,
            };
            (p, g, Some(spec.clone()), grid.as_ref().map(|g| g.h))
        }
    };

    let hypothesis_expected = expect.hypothesis.unwrap_or(true);
    if let Some(spec) = spec.as_ref().filter(|s| **s != RegionSpec::Empty) {
        let scenario = GridScenario { id: report.id.clone(), space: space.clone(), region: spec.clone(), variant, unique: false };
        match scenario.hypothesis_check()? {
            Some(o) => {
                report.checks.push(Check::new(
                    "fiber-hypothesis",
                    true,
                    o.margin,
                    0.0,
                    o.centered_minimizes == hypothesis_expected,
                    format!(
                        "centered ball {} at b = {}, volume {} (expected: {})",
                        if o.centered_minimizes { "minimizes" } else { "does not minimize" },
                        o.b,
                        o.target_volume,
                        if hypothesis_expected { "minimizes" } else { "does not minimize" }
                    ),
                ));
                report.hypothesis = Some(HypothesisRun {
                    b: o.b,
                    volume: o.target_volume,
                    centered_minimizes: o.centered_minimizes,
                    strict: o.strict,
                    margin: o.margin,
                });
            }
            None if !hypothesis_expected => report.checks.push(Check::new(
                "fiber-hypothesis",
                true,
                f64::NAN,
                0.0,
                false,
                "a failing hypothesis was expected but the oracle does not apply to this space",
            )),
            None => {}
        }
    }
    let assert_perimeter = hypothesis_expected;

    if let Some(p) = profile_in {
        let run = profile_route(space, variant, &p, expect, tol, assert_perimeter, report, artifacts)?;
        report.volume = Some(run.audit.input_volume);
        report.profile = Some(run);
    } else if spec.as_ref() == Some(&RegionSpec::Empty) && grid_in.is_none() {
        report.volume = Some(0.0);
    }
    if let Some(g) = grid_in {
        let run = grid_route(space, variant, &g, spec.as_ref(), h, assert_perimeter, report, artifacts)?;
        report.volume.get_or_insert(run.audit.input_volume);
        report.grid = Some(run);
    }
    Ok(())
}

fn audit_checks(prefix: &str, audit: &VolumeAudit, relative_bound: Option<f64>, report: &mut ScenarioReport) {
    if let Some(bound) = relative_bound {
        report.checks.push(Check::at_most(
            &format!("{prefix}-volume"),
            true,
            audit.relative_change,
            bound,
            format!("volume {} -> {}", audit.input_volume, audit.output_volume),
        ));
    }
    report.checks.push(Check::at_most(
        &format!("{prefix}-slice-volumes"),
        true,
        audit.slices_over_allowance as f64,
        0.0,
        format!("largest slice error {} over {} slices", audit.max_slice_error, audit.slices),
    ));
}

#[allow(clippy::too_many_arguments)]
fn profile_route(
    space: &WarpedSpace,
    variant: Variant,
    p: &ProfileRegion,
    expect: &Expectations,
    tol: &Tolerances,
    assert_perimeter: bool,
    report: &mut ScenarioReport,
    artifacts: &mut Artifacts,
) -> CliResult<ProfileRun> {
    p.validate(space)?;
    let sym = symmetrize(space, &Region::Profile(p.clone()), variant)?;
    let Region::Profile(out) = &sym.region else { unreachable!("profiles symmetrize to profiles") };
    let p_in = profile_perimeter(space, p)?;
    let p_out = profile_perimeter(space, out)?;
    let jensen = jensen_chain(space, p, out)?;
    audit_checks("profile", &sym.audit, Some(tol.analytic), report);
    report.checks.push(Check::at_most(
        "profile-perimeter",
        assert_perimeter,
        p_out.total,
        p_in.total + tol.analytic,
        format!("perimeter {} -> {}", p_in.total, p_out.total),
    ));
    report.checks.push(Check::new(
        "jensen-chain",
        assert_perimeter,
        jensen.violations.iter().sum::<usize>() as f64,
        0.0,
        jensen.holds,
        format!("{} samples, failing steps {:?}", jensen.samples.len(), jensen.violations),
    ));
    let golden_tol = expect.tolerance.unwrap_or(tol.analytic);
    for (name, want, got) in [
        ("graph-perimeter-in", expect.graph_perimeter_in, p_in.perimeter),
        ("graph-perimeter-out", expect.graph_perimeter_out, p_out.perimeter),
    ] {
        if let Some(want) = want {
            report.checks.push(Check::at_most(name, true, (got - want).abs(), golden_tol, format!("{got} against {want}")));
        }
    }
    artifacts.push(Artifact::new("curves/slice_volume_in.csv", p.slice_volume_curve(space).to_csv()));
    artifacts.push(Artifact::new("curves/slice_volume_out.csv", out.slice_volume_curve(space).to_csv()));
    artifacts.push(Artifact::new("curves/jensen.csv", jensen_csv(&jensen)));
    artifacts.push(Artifact::new("symmetral.profile.csv", region_text(&sym.region, &space.id)));
    Ok(ProfileRun {
        samples: p.len(),
        audit: sym.audit,
        decrease: p_in.total - p_out.total,
        perimeter_in: p_in,
        perimeter_out: p_out,
        jensen_holds: jensen.holds,
        jensen_violations: jensen.violations,
        equality: jensen.equality,
    })
}

pub fn jensen_csv(j: &JensenChainReport) -> String {
    let mut out = String::from("b,degenerate,area_element,jensen_bound,scaled_bound,area_element_sym,boundary_ratio,center,holds\n");
    for s in &j.samples {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            s.b, s.degenerate, s.area_element, s.jensen_bound, s.scaled_bound, s.area_element_sym, s.boundary_ratio, s.center, s.holds
        ));
    }
    out
}

#[allow(clippy::too_many_arguments)]
fn grid_route(
    space: &WarpedSpace,
    variant: Variant,
    g: &GridRegion,
    spec: Option<&RegionSpec>,
    h: Option<f64>,
    assert_perimeter: bool,
    report: &mut ScenarioReport,
    artifacts: &mut Artifacts,
) -> CliResult<GridRun> {
    let sym = symmetrize(space, &Region::Grid(g.clone()), variant)?;
    let Region::Grid(out) = &sym.region else { unreachable!("grids symmetrize to grids") };
    let opts = MinkowskiOptions::default();
    let measure = |r: &GridRegion| -> CliResult<(f64, f64, Option<MinkowskiEstimate>)> {
        if r.is_empty() {
            return Ok((0.0, 0.0, None));
        }
        let e = minkowski_perimeter(space, r, &opts)?;
        Ok((e.perimeter, e.std_error, Some(e)))
    };
    let (pin, sin, ein) = measure(g)?;
    let (pout, sout, eout) = measure(out)?;
    let (epsilon, source) = match spec.filter(|_| !g.is_empty()) {
        Some(spec) => {
            let scenario = GridScenario { id: report.id.clone(), space: space.clone(), region: spec.clone(), variant, unique: false };
            let exact_profile = scenario.symmetral_profile(SYMMETRAL_SAMPLES)?;
            let exact = profile_perimeter(space, &exact_profile)?.total;
            let raster = rasterize(space, &exact_profile, &g.scheme)?.region;
            let est = minkowski_perimeter(space, &raster, &opts)?;
            ((est.perimeter - exact).abs() + 2.0 * est.std_error, "rasterized-symmetral")
        }
        None => (2.0 * (sin + sout), "standard-errors"),
    };
    let label = h.map_or(String::new(), |h| format!(" at h = {h}"));
    audit_checks("grid", &sym.audit, None, report);
    report.checks.push(Check::at_most(
        "minkowski-perimeter",
        assert_perimeter,
        pout,
        pin + epsilon,
        format!("perimeter {pin} ± {sin:.3e} -> {pout} ± {sout:.3e}{label}, ε = {epsilon:.3e} ({source})"),
    ));
    for (name, e) in [("curves/enlargement_in.csv", &ein), ("curves/enlargement_out.csv", &eout)] {
        if let Some(e) = e {
            artifacts.push(Artifact::new(name, e.curve.to_csv()));
        }
    }
    artifacts.push(Artifact::new("curves/grid_slice_volume_in.csv", slice_volume_curve(space, &Region::Grid(g.clone())).to_csv()));
    artifacts.push(Artifact::new("curves/grid_slice_volume_out.csv", slice_volume_curve(space, &sym.region).to_csv()));
    artifacts.push(Artifact::new("symmetral.grid", region_text(&sym.region, &space.id)));
    Ok(GridRun {
        h_base: g.scheme.h_base(),
        h_fiber: g.scheme.h_fiber(),
        base_cells: g.scheme.base_cells,
        fiber_cells: g.scheme.fiber_cells,
        audit: sym.audit,
        perimeter_in: pin,
        perimeter_in_std_error: sin,
        perimeter_out: pout,
        perimeter_out_std_error: sout,
        decrease: pin - pout,
        epsilon,
        epsilon_source: source.into(),
    })
}
