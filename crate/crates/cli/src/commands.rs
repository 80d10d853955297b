//! Subcommand bodies. Each returns what it wrote and its verdict.

use std::path::{Path, PathBuf};

use serde::Serialize;
use warpsym::bundles::BundleSpace;
use warpsym::measure::{default_radii, enlarge_with, enlargement_curve, jensen_chain, minkowski_perimeter, profile_perimeter, DistanceMethod, MinkowskiOptions};
use warpsym::regions::{rasterize, slice_volume_curve, weighted_volume, GridRegion, ProfileRegion, Region, SliceForm};
use warpsym::spaces::{GridScheme, WarpedSpace};
use warpsym::symmetrize::{symmetrize, Variant};
use warpsym::verify::{run_bundle_scenario, run_suite, BundleScenario, Level, Suite, Tolerances};

use crate::config::{read_region, region_text, resolve_space};
use crate::error::{CliError, CliResult};
use crate::output::{resolve, to_json, write_file, Artifact, Artifacts};

/// Shared flags.
#[derive(Debug, Clone)]
pub struct Globals {
    pub seed: u64,
    pub tol: Tolerances,
    pub out_dir: PathBuf,
}

/// What a subcommand did.
#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub written: Vec<PathBuf>,
    /// Printed to stdout.
    pub summary: String,
    pub passed: bool,
}

impl Outcome {
    fn new(summary: String, passed: bool, written: Vec<PathBuf>) -> Self {
        Self { written, summary, passed }
    }
}

fn load(space: Option<&str>, path: &Path) -> CliResult<(WarpedSpace, Region)> {
    let (region, id) = read_region(path)?;
    let space = resolve_space(space, &id)?;
    match &region {
        Region::Profile(p) => p.validate(&space)?,
        Region::Grid(g) => {
            let expected = GridScheme::new(&space, g.scheme.base_cells, g.scheme.fiber_cells)?;
            if expected != g.scheme {
                return Err(CliError::Usage(format!("grid scheme of {} does not match space `{}`", path.display(), space.id)));
            }
        }
    }
    Ok((space, region))
}

pub fn symmetrize_cmd(g: &Globals, space: Option<&str>, region: &Path, variant: Variant, out: &Path) -> CliResult<Outcome> {
    let (space, r) = load(space, region)?;
    let sym = symmetrize(&space, &r, variant)?;
    let out = resolve(&g.out_dir, out);
    let audit_path = PathBuf::from(format!("{}.audit.json", out.display()));
    let written = vec![write_file(&out, &region_text(&sym.region, &space.id))?, write_file(&audit_path, &to_json(&sym.audit))?];
    let a = &sym.audit;
    let passed = a.slices_over_allowance == 0;
    let summary = format!(
        "{} symmetrization ({}): volume {} -> {} (relative change {:e}, {} slices over allowance)",
        variant, a.representation, a.input_volume, a.output_volume, a.relative_change, a.slices_over_allowance
    );
    Ok(Outcome::new(summary, passed, written))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PerimeterMethod {
    Minkowski,
    Profile,
}

#[derive(Serialize)]
struct PerimeterReport {
    method: &'static str,
    space: String,
    perimeter: f64,
    std_error: Option<f64>,
    volume: f64,
    detail: serde_json::Value,
}

pub fn perimeter_cmd(
    g: &Globals,
    space: Option<&str>,
    region: &Path,
    method: PerimeterMethod,
    h: Option<f64>,
    out: Option<&Path>,
) -> CliResult<Outcome> {
    let (space, r) = load(space, region)?;
    let volume = weighted_volume(&space, &r);
    let mut artifacts = Artifacts::default();
    let report = match (method, &r) {
        (PerimeterMethod::Profile, Region::Profile(p)) => {
            let pp = profile_perimeter(&space, p)?;
            PerimeterReport {
                method: "profile",
                space: space.id.clone(),
                perimeter: pp.total,
                std_error: None,
                volume,
                detail: serde_json::to_value(&pp).expect("serializable"),
            }
        }
        (PerimeterMethod::Profile, Region::Grid(_)) => {
            return Err(CliError::Usage("the profile method needs a profile region".into()));
        }
        (PerimeterMethod::Minkowski, _) => {
            let grid = match &r {
                Region::Grid(grid) => grid.clone(),
                Region::Profile(p) => {
                    let h = h.ok_or_else(|| CliError::Usage("a profile region needs --h to be rasterized".into()))?;
                    rasterize(&space, p, &GridScheme::with_spacing(&space, h, h)?)?.region
                }
            };
            let (perimeter, std_error, detail) = if grid.is_empty() {
                (0.0, 0.0, serde_json::Value::Null)
            } else {
                let e = minkowski_perimeter(&space, &grid, &MinkowskiOptions::default())?;
                artifacts.push(Artifact::new("enlargement.csv", e.curve.to_csv()));
                (e.perimeter, e.std_error, serde_json::to_value(&e).expect("serializable"))
            };
            PerimeterReport { method: "minkowski", space: space.id.clone(), perimeter, std_error: Some(std_error), volume, detail }
        }
    };
    let mut written = Vec::new();
    if let Some(out) = out {
        let out = resolve(&g.out_dir, out);
        written.push(write_file(&out, &to_json(&report))?);
        for a in &artifacts.0 {
            let stem = out.with_extension("");
            written.push(write_file(&PathBuf::from(format!("{}.{}", stem.display(), a.path)), &a.content)?);
        }
    }
    let se = report.std_error.map_or(String::new(), |s| format!(" ± {s:.3e}"));
    Ok(Outcome::new(format!("{} perimeter {}{se} (volume {})", report.method, report.perimeter, report.volume), true, written))
}

pub fn enlarge_cmd(g: &Globals, space: Option<&str>, region: &Path, radius: f64, out: &Path, curve: Option<&Path>) -> CliResult<Outcome> {
    let (space, r) = load(space, region)?;
    let Region::Grid(grid) = r else {
        return Err(CliError::Usage("enlarge needs a grid region".into()));
    };
    if !(radius >= 0.0) {
        return Err(CliError::Usage(format!("radius must be non-negative, got {radius}")));
    }
    let grown = enlarge_with(&space, &grid, radius, DistanceMethod::Exact)?;
    let m = grid.scheme.measure(&space);
    let (v0, v1) = (grid.weighted_volume(&m), grown.weighted_volume(&m));
    let mut written = vec![write_file(&resolve(&g.out_dir, out), &grown.to_text(&space.id))?];
    if let Some(curve) = curve {
        let radii = default_radii(&space, &grid);
        let c = enlargement_curve(&space, &grid, &radii, DistanceMethod::Exact)?;
        written.push(write_file(&resolve(&g.out_dir, curve), &c.to_csv())?);
    }
    Ok(Outcome::new(format!("enlarged by r = {radius}: volume {v0} -> {v1}"), true, written))
}

pub fn jensen_cmd(g: &Globals, space: Option<&str>, region: &Path, variant: Variant, out: &Path) -> CliResult<Outcome> {
    let (space, r) = load(space, region)?;
    let Region::Profile(p) = &r else {
        return Err(CliError::Usage("jensen needs a profile region".into()));
    };
    let sym = symmetrize(&space, &r, variant)?;
    let Region::Profile(s) = &sym.region else { unreachable!("profiles symmetrize to profiles") };
    let rep = jensen_chain(&space, p, s)?;
    let out = resolve(&g.out_dir, out);
    let csv = PathBuf::from(format!("{}.csv", out.with_extension("").display()));
    let written = vec![write_file(&out, &to_json(&rep))?, write_file(&csv, &crate::scenario::jensen_csv(&rep))?];
    let summary = format!(
        "perimeter {} -> {}; failing samples per step {:?}; equality {}; chain {}",
        rep.perimeter,
        rep.perimeter_sym,
        rep.violations,
        rep.equality,
        if rep.holds { "holds" } else { "fails" }
    );
    Ok(Outcome::new(summary, rep.holds, written))
}

pub fn bundle_cmd(g: &Globals, bundle: BundleSpace, scenario: BundleScenario, probes: usize, out: Option<&Path>) -> CliResult<Outcome> {
    let rep = run_bundle_scenario(&bundle, scenario, probes, g.seed, g.tol.mc_sigmas)?;
    let out = resolve(&g.out_dir, out.unwrap_or(Path::new("bundle-report.json")));
    let written = vec![write_file(&out, &to_json(&rep))?];
    let mc = &rep.mc;
    let mut summary = format!("{} in L({}; {}, {}): Monte Carlo perimeter {} ± {:.3e}", scenario, bundle.q, bundle.k, bundle.l, mc.perimeter, mc.std_error);
    if let Some(s) = &rep.symmetral {
        summary.push_str(&format!("; symmetral {} ({})", s.perimeter, if s.holds { "no longer" } else { "LONGER" }));
    }
    let passed = rep.symmetral.as_ref().is_none_or(|s| s.holds);
    Ok(Outcome::new(summary, passed, written))
}

pub fn verify_cmd(g: &Globals, suite: Suite, level: Level) -> CliResult<Outcome> {
    let rep = run_suite(suite, level, g.seed, &g.tol);
    let mut written = vec![
        write_file(&g.out_dir.join("verify-report.xml"), &rep.to_junit())?,
        write_file(&g.out_dir.join("verify-report.json"), &to_json(&rep))?,
    ];
    for e in rep.evidence() {
        written.push(write_file(&g.out_dir.join("evidence").join(&e.file), &e.csv)?);
    }
    let mut summary = String::new();
    for c in &rep.cases {
        summary.push_str(&format!("{} {}/{}: {}\n", if c.passed { "PASS" } else { "FAIL" }, c.suite, c.name, c.message));
    }
    summary.push_str(&format!("{} cases, {} failed", rep.cases.len(), rep.failures()));
    Ok(Outcome::new(summary, rep.passed(), written))
}

#[derive(Serialize)]
pub struct RegionStats {
    pub space: String,
    pub representation: &'static str,
    pub volume: f64,
    /// `[b_lo, b_hi, t_lo, t_hi]`; absent for the empty region.
    pub bounding_box: Option<[f64; 4]>,
    pub slices: usize,
}

pub fn region_stats(space: &WarpedSpace, r: &Region) -> RegionStats {
    let (representation, bounding_box, slices) = match r {
        Region::Grid(g) => ("grid", g.bounding_box().map(|(a, b, c, d)| [a, b, c, d]), g.scheme.base_cells),
        Region::Profile(p) => ("profile", profile_box(p), p.len()),
    };
    RegionStats { space: space.id.clone(), representation, volume: weighted_volume(space, r), bounding_box, slices }
}

fn profile_box(p: &ProfileRegion) -> Option<[f64; 4]> {
    let live: Vec<usize> = (0..p.len()).filter(|&k| p.form == SliceForm::LowerRay || p.radius[k] > 0.0).collect();
    let (&first, &last) = (live.first()?, live.last()?);
    let (lo, hi) = match p.form {
        SliceForm::Ball => (
            live.iter().map(|&k| p.center[k] - p.radius[k]).fold(f64::INFINITY, f64::min),
            live.iter().map(|&k| p.center[k] + p.radius[k]).fold(f64::NEG_INFINITY, f64::max),
        ),
        SliceForm::LowerRay => (f64::NEG_INFINITY, live.iter().map(|&k| p.center[k]).fold(f64::NEG_INFINITY, f64::max)),
    };
    Some([p.base[first], p.base[last], lo, hi])
}

pub fn region_cmd(g: &Globals, space: Option<&str>, region: &Path, curve: Option<&Path>) -> CliResult<Outcome> {
    let (space, r) = load(space, region)?;
    let stats = region_stats(&space, &r);
    let csv = slice_volume_curve(&space, &r).to_csv();
    let mut summary = format!(
        "space: {}\nrepresentation: {}\nslices: {}\nvolume: {}\n",
        stats.space, stats.representation, stats.slices, stats.volume
    );
    summary.push_str(&match stats.bounding_box {
        Some([a, b, c, d]) => format!("bounding box: b in [{a}, {b}], t in [{c}, {d}]"),
        None => "bounding box: none (empty region)".into(),
    });
    let written = match curve {
        Some(path) => vec![write_file(&resolve(&g.out_dir, path), &csv)?],
        None => {
            summary.push_str("\nslice-volume curve:\n");
            summary.push_str(csv.trim_end());
            Vec::new()
        }
    };
    Ok(Outcome::new(summary, true, written))
}

/// Rasterizes a profile region file to a grid file with cells of side `h`.
pub fn rasterize_cmd(g: &Globals, space: Option<&str>, region: &Path, h: f64, out: &Path) -> CliResult<Outcome> {
    let (space, r) = load(space, region)?;
    let Region::Profile(p) = r else {
        return Err(CliError::Usage("rasterize needs a profile region".into()));
    };
    let ras = rasterize(&space, &p, &GridScheme::with_spacing(&space, h, h)?)?;
    let grid: GridRegion = ras.region;
    let written = vec![write_file(&resolve(&g.out_dir, out), &grid.to_text(&space.id))?];
    Ok(Outcome::new(format!("{} cells set of {}", grid.count(), grid.scheme.len()), true, written))
}
