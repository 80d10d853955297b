//! The verification suite: named cases with pass/fail verdicts, metrics and
//! CSV evidence, rendered as JSON and JUnit XML.

use std::f64::consts::{E, PI};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::bundle::{run_bundle_scenario, BundleScenario};
use super::fuzz::{fuzz_spaces, random_comparison_pair, random_grid_region, random_profile, rng, FuzzSpace};
use super::{
    check_derivative_comparison, containment_check, convergence_table, fiber_isoperimetry_oracle, grid_scenarios,
    OracleOptions,
};
use crate::bundles::{product_distance_comparison, transport_scaling_check, BasePoint, BundleSpace};
use crate::error::{Error, Result};
use crate::measure::{jensen_chain, minkowski_perimeter, profile_perimeter, MinkowskiOptions};
use crate::par;
use crate::regions::{GridRegion, ProfileRegion, Region, RegionSpec};
use crate::spaces::{FiberGeometry, GridScheme, ScalarFn, WarpedSpace};
use crate::symmetrize::{symmetrize, Variant};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Warped,
    Bundle,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Level {
    Quick,
    Full,
}

macro_rules! keyword_enum {
    ($ty:ty, $what:literal, $($name:literal => $variant:expr),+) => {
        impl FromStr for $ty {
            type Err = Error;
            fn from_str(s: &str) -> Result<Self> {
                match s {
                    $($name => Ok($variant),)+
                    o => Err(Error::Unsupported(format!(concat!("unknown ", $what, " `{}`"), o))),
                }
            }
        }

        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                $(if *self == $variant { return f.write_str($name); })+
                unreachable!()
            }
        }
    };
}

keyword_enum!(Suite, "suite", "warped" => Suite::Warped, "bundle" => Suite::Bundle, "all" => Suite::All);
keyword_enum!(Level, "level", "quick" => Level::Quick, "full" => Level::Full);

/// Numerical slack of every check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub name: String,
    /// Absolute slack of analytic and quadrature comparisons.
    pub analytic: f64,
    /// Relative slack of grid golden values.
    pub golden: f64,
    /// Standard errors allowed on Monte Carlo comparisons.
    pub mc_sigmas: f64,
    /// Relative slack on transport factors.
    pub transport: f64,
    /// Bound on `|center|` and `|ρ − 1|` at equality.
    pub equality: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { name: "default".into(), analytic: 1e-9, golden: 0.02, mc_sigmas: 3.0, transport: 0.01, equality: 1e-6 }
    }
}

impl Tolerances {
    pub fn named(name: &str) -> Result<Self> {
        let d = Self::default();
        match name {
            "default" => Ok(d),
            "strict" => Ok(Self { name: name.into(), analytic: 1e-11, golden: 0.015, mc_sigmas: 2.5, transport: 0.005, equality: 1e-8 }),
            "loose" => Ok(Self { name: name.into(), analytic: 1e-7, golden: 0.05, mc_sigmas: 4.0, transport: 0.02, equality: 1e-4 }),
            o => Err(Error::Unsupported(format!("unknown tolerance profile `{o}` (default, strict, loose)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evidence {
    pub file: String,
    pub csv: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseResult {
    pub suite: String,
    pub name: String,
    pub passed: bool,
    pub message: String,
    pub metrics: Vec<(String, f64)>,
    #[serde(skip)]
    pub evidence: Vec<Evidence>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub level: Level,
    pub seed: u64,
    pub tolerances: Tolerances,
    pub cases: Vec<CaseResult>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.cases.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> usize {
        self.cases.iter().filter(|c| !c.passed).count()
    }

    pub fn evidence(&self) -> impl Iterator<Item = &Evidence> {
        self.cases.iter().flat_map(|c| &c.evidence)
    }

    /// JUnit XML with one `testsuite` per suite name. No timings, so equal
    /// runs render identically.
    pub fn to_junit(&self) -> String {
        let mut out = String::from("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
        out.push_str(&format!(
            "<testsuites name=\"warpsym verify\" tests=\"{}\" failures=\"{}\">\n",
            self.cases.len(),
            self.failures()
        ));
        let mut names: Vec<&str> = self.cases.iter().map(|c| c.suite.as_str()).collect();
        names.dedup();
        for name in names {
            let cases: Vec<&CaseResult> = self.cases.iter().filter(|c| c.suite == name).collect();
            let failed = cases.iter().filter(|c| !c.passed).count();
            out.push_str(&format!(
                "  <testsuite name=\"{}\" tests=\"{}\" failures=\"{}\">\n",
                xml_escape(name),
                cases.len(),
                failed
            ));
            out.push_str(&format!(
                "    <properties>\n      <property name=\"seed\" value=\"{}\"/>\n      <property name=\"level\" value=\"{}\"/>\n      <property name=\"tolerances\" value=\"{}\"/>\n    </properties>\n",
                self.seed, self.level, xml_escape(&self.tolerances.name)
            ));
            for c in cases {
                out.push_str(&format!("    <testcase classname=\"{}\" name=\"{}\">\n", xml_escape(name), xml_escape(&c.name)));
                if !c.passed {
                    out.push_str(&format!("      <failure message=\"{}\"/>\n", xml_escape(&c.message)));
                }
                let metrics: Vec<String> = c.metrics.iter().map(|(k, v)| format!("{k} = {v:e}")).collect();
                out.push_str(&format!(
                    "      <system-out>{}</system-out>\n",
                    xml_escape(&format!("{}\n{}", c.message, metrics.join("\n")))
                ));
                out.push_str("    </testcase>\n");
            }
            out.push_str("  </testsuite>\n");
        }
        out.push_str("</testsuites>\n");
        out
    }
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// What a case function hands back.
struct Outcome {
    passed: bool,
    message: String,
    metrics: Vec<(String, f64)>,
    evidence: Vec<Evidence>,
}

impl Outcome {
    fn new(passed: bool, message: impl Into<String>) -> Self {
        Self { passed, message: message.into(), metrics: Vec::new(), evidence: Vec::new() }
    }

    fn metric(mut self, name: &str, value: f64) -> Self {
        self.metrics.push((name.into(), value));
        self
    }

    fn evidence(mut self, file: &str, csv: String) -> Self {
        self.evidence.push(Evidence { file: file.into(), csv });
        self
    }
}

struct Ctx<'a> {
    level: Level,
    seed: u64,
    tol: &'a Tolerances,
}

impl Ctx<'_> {
    fn pick<T>(&self, quick: T, full: T) -> T {
        match self.level {
            Level::Quick => quick,
            Level::Full => full,
        }
    }
}

type CaseFn = fn(&Ctx) -> Result<Outcome>;

const WARPED: [(&str, CaseFn); 9] = [
    ("volume-profiles", volume_profiles),
    ("volume-grids", volume_grids),
    ("perimeter-profiles", perimeter_profiles),
    ("equality-profiles", equality_profiles),
    ("golden-values", golden_values),
    ("minkowski-route", minkowski_route),
    ("containment", containment),
    ("fiber-oracle", fiber_oracle),
    ("derivative-comparison", derivative_comparison),
];

const BUNDLE: [(&str, CaseFn); 4] = [
    ("hopf-transport", hopf_transport),
    ("product-distance", product_distance),
    ("hopf-tube-perimeter", hopf_tube_perimeter),
    ("lens-fiber-lengths", lens_fiber_lengths),
];

/// Runs every case of `suite`. Cases run in parallel and are reported in
/// catalog order.
pub fn run_suite(suite: Suite, level: Level, seed: u64, tol: &Tolerances) -> SuiteReport {
    let mut cases: Vec<(&str, &str, CaseFn)> = Vec::new();
    if suite != Suite::Bundle {
        cases.extend(WARPED.iter().map(|&(n, f)| ("warped", n, f)));
    }
    if suite != Suite::Warped {
        cases.extend(BUNDLE.iter().map(|&(n, f)| ("bundle", n, f)));
    }
    let ctx = Ctx { level, seed, tol };
    let cases = par::map_slice(&cases, |&(group, name, f)| {
        let outcome = f(&ctx).unwrap_or_else(|e| Outcome::new(false, format!("error: {e}")));
        CaseResult {
            suite: group.into(),
            name: name.into(),
            passed: outcome.passed,
            message: outcome.message,
            metrics: outcome.metrics,
            evidence: outcome.evidence,
        }
    });
    SuiteReport { suite, level, seed, tolerances: tol.clone(), cases }
}

/// Runs a single case by name.
pub fn run_case(name: &str, level: Level, seed: u64, tol: &Tolerances) -> Result<CaseResult> {
    let ctx = Ctx { level, seed, tol };
    let (group, f) = WARPED
        .iter()
        .map(|&(n, f)| ("warped", n, f))
        .chain(BUNDLE.iter().map(|&(n, f)| ("bundle", n, f)))
        .find(|&(_, n, _)| n == name)
        .map(|(g, _, f)| (g, f))
        .ok_or_else(|| Error::Unsupported(format!("unknown case `{name}`")))?;
    let o = f(&ctx)?;
    Ok(CaseResult { suite: group.into(), name: name.into(), passed: o.passed, message: o.message, metrics: o.metrics, evidence: o.evidence })
}

/// Names of the cases in `suite`.
pub fn case_names(suite: Suite) -> Vec<&'static str> {
    let w = WARPED.iter().map(|c| c.0).filter(|_| suite != Suite::Bundle);
    let b = BUNDLE.iter().map(|c| c.0).filter(|_| suite != Suite::Warped);
    w.chain(b).collect()
}

/// One fuzzed profile with its symmetral.
struct ProfileCase {
    space: FuzzSpace,
    input: ProfileRegion,
    output: ProfileRegion,
    relative_change: f64,
    over_allowance: usize,
}

/// Random profiles cycling through the fuzz spaces; the same for every
/// case at a given seed and count.
fn profile_cases(seed: u64, count: usize) -> Result<Vec<ProfileCase>> {
    let spaces = fuzz_spaces();
    let mut r = rng(seed, 1);
    let inputs: Vec<(FuzzSpace, ProfileRegion)> = (0..count)
        .map(|k| {
            let fs = spaces[k % spaces.len()].clone();
            let p = random_profile(&fs.space, &mut r)?;
            Ok((fs, p))
        })
        .collect::<Result<_>>()?;
    inputs
        .into_iter()
        .map(|(space, input)| {
            let s = symmetrize(&space.space, &Region::Profile(input.clone()), space.variant)?;
            let Region::Profile(output) = s.region else { unreachable!() };
            Ok(ProfileCase { space, input, output, relative_change: s.audit.relative_change, over_allowance: s.audit.slices_over_allowance })
        })
        .collect()
}

fn volume_profiles(ctx: &Ctx) -> Result<Outcome> {
    let cases = profile_cases(ctx.seed, ctx.pick(10, 50))?;
    let mut csv = String::from("index,space,variant,relative_change,slices_over_allowance\n");
    let mut worst = 0.0f64;
    let mut failed = 0;
    for (k, c) in cases.iter().enumerate() {
        csv.push_str(&format!("{k},{},{},{:e},{}\n", c.space.space.id, c.space.variant, c.relative_change, c.over_allowance));
        worst = worst.max(c.relative_change);
        if c.relative_change > ctx.tol.analytic || c.over_allowance > 0 {
            failed += 1;
        }
    }
    Ok(Outcome::new(failed == 0, format!("{} profiles, {failed} over {:e}", cases.len(), ctx.tol.analytic))
        .metric("max_relative_change", worst)
        .evidence("volume_profiles.csv", csv))
}

fn volume_grids(ctx: &Ctx) -> Result<Outcome> {
    let spaces = fuzz_spaces();
    let count = ctx.pick(5, 20);
    let mut r = rng(ctx.seed, 2);
    let inputs: Vec<(FuzzSpace, GridRegion)> = (0..count)
        .map(|k| {
            let fs = spaces[k % spaces.len()].clone();
            let scheme = GridScheme::new(&fs.space, 100, 200)?;
            let g = random_grid_region(&scheme, &mut r);
            Ok((fs, g))
        })
        .collect::<Result<_>>()?;
    let audits = par::map_slice(&inputs, |(fs, g)| symmetrize(&fs.space, &Region::Grid(g.clone()), fs.variant).map(|s| s.audit));
    let mut csv = String::from("index,space,variant,input_volume,output_volume,max_slice_error,slices_over_allowance\n");
    let mut failed = 0;
    for (k, ((fs, _), a)) in inputs.iter().zip(audits).enumerate() {
        let a = a?;
        csv.push_str(&format!(
            "{k},{},{},{},{},{:e},{}\n",
            fs.space.id, fs.variant, a.input_volume, a.output_volume, a.max_slice_error, a.slices_over_allowance
        ));
        if a.slices_over_allowance > 0 {
            failed += 1;
        }
    }
    Ok(Outcome::new(failed == 0, format!("{count} grid regions, {failed} with a slice error above one cell mass"))
        .evidence("volume_grids.csv", csv))
}

fn perimeter_profiles(ctx: &Ctx) -> Result<Outcome> {
    let cases = profile_cases(ctx.seed, ctx.pick(10, 50))?;
    let rows = par::map_slice(&cases, |c| -> Result<(f64, f64, usize, usize)> {
        let p_in = profile_perimeter(&c.space.space, &c.input)?.total;
        let p_out = profile_perimeter(&c.space.space, &c.output)?.total;
        let j = jensen_chain(&c.space.space, &c.input, &c.output)?;
        Ok((p_in, p_out, j.violations.iter().sum(), j.samples.len()))
    });
    let mut csv = String::from("index,space,perimeter_in,perimeter_out,decrease,jensen_violations,samples\n");
    let (mut increases, mut jensen_bad) = (0, 0);
    for (k, (c, row)) in cases.iter().zip(rows).enumerate() {
        let (p_in, p_out, viol, samples) = row?;
        csv.push_str(&format!("{k},{},{p_in},{p_out},{:e},{viol},{samples}\n", c.space.space.id, p_in - p_out));
        if p_out > p_in + ctx.tol.analytic {
            increases += 1;
        }
        jensen_bad += viol;
    }
    Ok(Outcome::new(
        increases == 0 && jensen_bad == 0,
        format!("{} profiles: {increases} perimeter increases, {jensen_bad} failing Jensen samples", cases.len()),
    )
    .evidence("perimeter_profiles.csv", csv))
}

fn equality_profiles(ctx: &Ctx) -> Result<Outcome> {
    let cases = profile_cases(ctx.seed, ctx.pick(10, 50))?;
    let rows = par::map_slice(&cases, |c| -> Result<[(bool, f64, f64); 2]> {
        let s = &c.space.space;
        let j = jensen_chain(s, &c.input, &c.output)?;
        let again = symmetrize(s, &Region::Profile(c.output.clone()), c.space.variant)?;
        let Region::Profile(out2) = again.region else { unreachable!() };
        let fixed = jensen_chain(s, &c.output, &out2)?;
        Ok([j, fixed].map(|r| (r.equality, r.equality_center_gap, r.equality_ratio_gap)))
    });
    let mut csv = String::from("index,space,input,equality,center_gap,ratio_gap\n");
    let (mut equalities, mut bad, mut unflagged) = (0, 0, 0);
    for (k, (c, row)) in cases.iter().zip(rows).enumerate() {
        for (label, (eq, cg, rg)) in ["random", "symmetric"].into_iter().zip(row?) {
            csv.push_str(&format!("{k},{},{label},{eq},{cg:e},{rg:e}\n", c.space.space.id));
            if eq {
                equalities += 1;
                if cg > ctx.tol.equality || rg > ctx.tol.equality {
                    bad += 1;
                }
            } else if label == "symmetric" {
                unflagged += 1;
            }
        }
    }
    Ok(Outcome::new(
        bad == 0 && unflagged == 0,
        format!(
            "{} profiles and their symmetrals: {equalities} equality cases, {bad} off-center at equality, {unflagged} symmetric inputs without equality",
            cases.len()
        ),
    )
    .evidence("equality_profiles.csv", csv))
}

/// Tilted strip `0 ≤ t − b/2 ≤ 1` over `b ∈ [0, 1]`.
pub fn tilted_strip() -> (WarpedSpace, RegionSpec) {
    (
        WarpedSpace::product("steiner-tilted-strip", [0.0, 1.0], FiberGeometry::line(ScalarFn::ONE, 2.0)),
        RegionSpec::TiltedStrip { base: [0.0, 1.0], slope: 0.5, offset: 0.5, half_width: 0.5 },
    )
}

fn golden_values(ctx: &Ctx) -> Result<Outcome> {
    let (strip_space, strip) = tilted_strip();
    let profile = strip.to_profile(1001).expect("strips have profiles")?;
    let sym = symmetrize(&strip_space, &Region::Profile(profile.clone()), Variant::Schwarz)?;
    let Region::Profile(sym) = sym.region else { unreachable!() };
    let graph_in = profile_perimeter(&strip_space, &profile)?.perimeter;
    let graph_out = profile_perimeter(&strip_space, &sym)?.perimeter;
    let strip_ok = (graph_in - 2.0 * 1.25f64.sqrt()).abs() <= 1e-6 && (graph_out - 2.0).abs() <= 1e-6;

    let plane = WarpedSpace::product("plane", [-1.5, 1.5], FiberGeometry::line(ScalarFn::ONE, 1.5));
    let disk = GridRegion::from_predicate(GridScheme::new(&plane, 600, 600)?, |b, t| b * b + t * t < 1.0);
    let p_disk = minkowski_perimeter(&plane, &disk, &MinkowskiOptions::default())?.perimeter;
    let disk_err = (p_disk - 2.0 * PI).abs() / (2.0 * PI);

    let gauss = WarpedSpace::product("gauss-line", [0.0, 1.0], FiberGeometry::line(ScalarFn::ExpQuad { rate: -1.0 }, 2.0));
    let interval = GridRegion::from_predicate(GridScheme::new(&gauss, 1, 800)?, |_, t| t.abs() < 1.0);
    let p_gauss = minkowski_perimeter(&gauss, &interval, &MinkowskiOptions::default())?.perimeter;
    let gauss_err = (p_gauss - 2.0 / E).abs() / (2.0 / E);

    let csv = format!(
        "quantity,value,expected,tolerance\nstrip_graph_perimeter_in,{graph_in},{},1e-6\nstrip_graph_perimeter_out,{graph_out},2,1e-6\nunit_disk_minkowski,{p_disk},{},{}\ngauss_interval_minkowski,{p_gauss},{},{}\n",
        2.0 * 1.25f64.sqrt(),
        2.0 * PI,
        ctx.tol.golden,
        2.0 / E,
        ctx.tol.golden
    );
    let passed = strip_ok && disk_err <= ctx.tol.golden && gauss_err <= ctx.tol.golden;
    Ok(Outcome::new(passed, format!("strip {graph_in:.9} -> {graph_out:.9}, disk error {disk_err:.2e}, gaussian error {gauss_err:.2e}"))
        .metric("strip_in", graph_in)
        .metric("strip_out", graph_out)
        .metric("disk_relative_error", disk_err)
        .metric("gauss_relative_error", gauss_err)
        .evidence("golden_values.csv", csv))
}

/// Refinement levels of the grid scenarios.
pub fn minkowski_levels(level: Level) -> Vec<f64> {
    match level {
        Level::Quick => vec![0.005, 0.0025],
        Level::Full => vec![0.005, 0.0025, 0.00125],
    }
}

fn minkowski_route(ctx: &Ctx) -> Result<Outcome> {
    let levels = minkowski_levels(ctx.level);
    let scenarios = grid_scenarios();
    let tables = par::map_slice(&scenarios, |s| convergence_table(s, &levels));
    let mut csv = String::new();
    let mut problems = Vec::new();
    let mut worst_violation = 0.0f64;
    for table in tables {
        let t = table?;
        let body = t.to_csv();
        if csv.is_empty() {
            csv.push_str(&body);
        } else {
            csv.push_str(body.split_once('\n').map_or("", |x| x.1));
        }
        let first = &t.runs[0];
        let last = t.runs.last().unwrap();
        worst_violation = worst_violation.max(first.violation);
        if !first.inequality_holds() {
            problems.push(format!("{}: P(sym) exceeds P + ε", t.id));
        }
        if let Some(col) = t.growing_column() {
            problems.push(format!("{}: {col} grows", t.id));
        }
        if !(last.epsilon < first.epsilon) {
            problems.push(format!("{}: ε does not decrease", t.id));
        }
    }
    let message = if problems.is_empty() {
        format!("{} scenarios at h = {:?}: inequality within ε(h), columns converge", scenarios.len(), levels)
    } else {
        problems.join("; ")
    };
    Ok(Outcome::new(problems.is_empty(), message).metric("max_violation", worst_violation).evidence("minkowski_route.csv", csv))
}

fn containment(ctx: &Ctx) -> Result<Outcome> {
    let h = ctx.pick(0.01, 0.005);
    let scenarios = grid_scenarios();
    let jobs: Vec<(usize, f64)> = (0..scenarios.len()).flat_map(|i| [5.0, 10.0, 20.0].map(|k| (i, k * h))).collect();
    let reports = par::map_slice(&jobs, |&(i, r)| {
        let s = &scenarios[i];
        let region = s.region.to_grid(s.scheme(h)?);
        containment_check(&s.space, &region, r, s.variant)
    });
    let mut csv = String::from("scenario,h,r,violation_volume,violation_cells\n");
    let mut bad = 0;
    for (&(i, r), rep) in jobs.iter().zip(reports) {
        let rep = rep?;
        csv.push_str(&format!("{},{h},{r},{:e},{}\n", scenarios[i].id, rep.violation_volume, rep.violation_cells));
        if rep.violation_volume > 0.0 {
            bad += 1;
        }
    }
    Ok(Outcome::new(bad == 0, format!("{} checks at h = {h}, {bad} with volume outside the one-cell dilation", jobs.len()))
        .evidence("containment.csv", csv))
}

/// Line fiber with `Ψ = e^{t²}` truncated to `|t| ≤ 2`.
pub fn rosales_line() -> WarpedSpace {
    WarpedSpace::product("rosales-density", [0.0, 1.0], FiberGeometry::line(ScalarFn::ExpQuad { rate: 1.0 }, 2.0))
}

fn fiber_oracle(ctx: &Ctx) -> Result<Outcome> {
    let space = rosales_line();
    let capacity = space.fiber_capacity(0.5)?;
    let n = ctx.pick(3, 10);
    let fractions: Vec<f64> = (1..=n).map(|k| 0.05 + 0.85 * k as f64 / (n + 1) as f64).collect();
    let opts = OracleOptions { cells: 200, ..OracleOptions::default() };
    let reports = par::map_slice(&fractions, |&f| fiber_isoperimetry_oracle(&space, 0.5, f * capacity, &opts));
    let mut csv = String::from("volume_fraction,target_volume,evaluated,margin,strict\n");
    let mut weak = 0;
    for (f, rep) in fractions.iter().zip(reports) {
        let rep = rep?;
        csv.push_str(&format!("{f},{},{},{:e},{}\n", rep.target_volume, rep.evaluated, rep.margin, rep.strict));
        if !rep.strict {
            weak += 1;
        }
    }
    Ok(Outcome::new(weak == 0, format!("{n} volume levels, {weak} without a strict centered minimizer"))
        .evidence("fiber_oracle.csv", csv))
}

fn derivative_comparison(ctx: &Ctx) -> Result<Outcome> {
    let n = ctx.pick(20, 100);
    let mut r = rng(ctx.seed, 3);
    let mut csv = String::from("index,kind,samples,verdict,witness,expected_witness\n");
    let (mut false_reject, mut false_accept) = (0, 0);
    for k in 0..2 * n {
        let satisfying = k < n;
        let (x, f, h, expect) = random_comparison_pair(&mut r, satisfying);
        let verdict = check_derivative_comparison(&x, &f, &h);
        let (label, witness) = match &verdict {
            Ok(_) => ("pass", None),
            Err(Error::HypothesisFails { index, .. }) => ("reject", Some(*index)),
            Err(_) => ("error", None),
        };
        let kind = if satisfying { "satisfying" } else { "violating" };
        let show = |w: Option<usize>| w.map_or(String::new(), |w| w.to_string());
        csv.push_str(&format!("{k},{kind},{},{label},{},{}\n", x.len(), show(witness), show(expect)));
        if satisfying && verdict.is_err() {
            false_reject += 1;
        }
        if !satisfying && (witness.is_none() || witness != expect) {
            false_accept += 1;
        }
    }
    Ok(Outcome::new(
        false_reject == 0 && false_accept == 0,
        format!("{n} satisfying and {n} violating pairs: {false_reject} wrongly rejected, {false_accept} missed or wrong witness"),
    )
    .evidence("derivative_comparison.csv", csv))
}

fn hopf_transport(ctx: &Ctx) -> Result<Outcome> {
    let s3 = BundleSpace::hopf();
    let pairs = [
        (BasePoint { eta: 0.4, psi: 0.3 }, BasePoint { eta: 1.0, psi: 1.7 }),
        (BasePoint { eta: 0.2, psi: -1.0 }, BasePoint { eta: 1.3, psi: 2.5 }),
        (BasePoint { eta: 0.7, psi: 0.0 }, BasePoint { eta: 0.75, psi: 0.1 }),
    ];
    let samples = ctx.pick(16, 64);
    let mut csv = String::from("eta1,psi1,eta2,psi2,factor,std_error,predicted\n");
    let mut worst = 0.0f64;
    for (b1, b2) in pairs {
        let rep = transport_scaling_check(&s3, b1, b2, samples)?;
        csv.push_str(&format!("{},{},{},{},{},{:e},{}\n", b1.eta, b1.psi, b2.eta, b2.psi, rep.factor, rep.std_error, rep.predicted));
        worst = worst.max((rep.factor - 1.0).abs());
    }
    Ok(Outcome::new(worst <= ctx.tol.transport, format!("largest |factor − 1| = {worst:.2e}"))
        .metric("max_factor_deviation", worst)
        .evidence("hopf_transport.csv", csv))
}

fn product_distance(ctx: &Ctx) -> Result<Outcome> {
    let pairs = ctx.pick(1000, 10_000);
    let mut csv = String::from("k,l,q,pairs,violations,max_excess,same_fiber_max_gap\n");
    let mut violations = 0;
    for q in [1, 2] {
        let b = BundleSpace::new(1, 1, q)?;
        let rep = product_distance_comparison(&b, pairs, ctx.seed ^ q as u64)?;
        csv.push_str(&format!("1,1,{q},{},{},{:e},{:e}\n", rep.pairs, rep.violations, rep.max_excess, rep.same_fiber_max_gap));
        violations += rep.violations;
    }
    Ok(Outcome::new(violations == 0, format!("{pairs} pairs on S³ and L(2;1,1): {violations} violations"))
        .evidence("product_distance.csv", csv))
}

fn hopf_tube_perimeter(ctx: &Ctx) -> Result<Outcome> {
    let probes = ctx.pick(10_000, 100_000);
    let rep = run_bundle_scenario(&BundleSpace::hopf(), BundleScenario::Tube, probes, ctx.seed, ctx.tol.mc_sigmas)?;
    let sym = rep.symmetral.clone().ok_or_else(|| Error::Unsupported("no symmetral for the Hopf action".into()))?;
    let csv = format!(
        "probes,seed,mc_perimeter,sigma,symmetral_perimeter,exact_perimeter,sigmas,holds\n{},{},{},{:e},{},{},{},{}\n",
        rep.mc.probes,
        rep.seed,
        rep.mc.perimeter,
        rep.mc.std_error,
        sym.perimeter,
        rep.exact_perimeter.unwrap_or(f64::NAN),
        rep.sigmas,
        sym.holds
    );
    Ok(Outcome::new(
        sym.holds,
        format!(
            "symmetral {:.6} vs Monte Carlo {:.6} ± {:.2e} ({} probes)",
            sym.perimeter, rep.mc.perimeter, rep.mc.std_error, rep.mc.probes
        ),
    )
    .metric("sigma", rep.mc.std_error)
    .evidence("hopf_tube_perimeter.csv", csv))
}

fn lens_fiber_lengths(ctx: &Ctx) -> Result<Outcome> {
    let segments = ctx.pick(256, 1024);
    let mut csv = String::from("k,l,q,eta,closed_form,measured,relative_gap\n");
    let mut worst = 0.0f64;
    for (k, l, q) in [(1, 1, 2), (1, 2, 1), (2, 3, 1)] {
        let b = BundleSpace::new(k, l, q)?;
        for i in 1..8 {
            let eta = i as f64 * PI / 16.0;
            let x = b.section(BasePoint { eta, psi: 0.0 });
            let exact = b.fiber_length(&x);
            let measured = b.measured_fiber_length(&x, segments);
            let gap = (measured - exact).abs() / exact;
            worst = worst.max(gap);
            csv.push_str(&format!("{k},{l},{q},{eta},{exact},{measured},{gap:e}\n"));
        }
    }
    let bound = 1e-3;
    Ok(Outcome::new(worst <= bound, format!("measured orbit lengths within {worst:.2e} of the closed form (bound {bound:e})"))
        .metric("max_relative_gap", worst)
        .evidence("lens_fiber_lengths.csv", csv))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keywords_round_trip() {
        for s in [Suite::Warped, Suite::Bundle, Suite::All] {
            assert_eq!(s.to_string().parse::<Suite>().unwrap(), s);
        }
        assert_eq!("full".parse::<Level>().unwrap(), Level::Full);
        assert!("medium".parse::<Level>().is_err());
        assert!(Tolerances::named("strict").unwrap().analytic < Tolerances::default().analytic);
        assert!(Tolerances::named("sloppy").is_err());
        assert_eq!(case_names(Suite::All).len(), 13);
        assert_eq!(case_names(Suite::Bundle).len(), 4);
    }

    #[test]
    fn quick_bundle_suite_passes_and_renders() {
        let rep = run_suite(Suite::Bundle, Level::Quick, 7, &Tolerances::default());
        assert!(rep.passed(), "{:#?}", rep.cases);
        let xml = rep.to_junit();
        assert!(xml.contains("<testsuite name=\"bundle\" tests=\"4\" failures=\"0\">"));
        assert_eq!(rep.evidence().count(), 4);
        let again = run_suite(Suite::Bundle, Level::Quick, 7, &Tolerances::default());
        assert_eq!(again.to_junit(), xml);
    }

    #[test]
    fn single_case_and_failure_rendering() {
        let c = run_case("derivative-comparison", Level::Quick, 3, &Tolerances::default()).unwrap();
        assert!(c.passed, "{}", c.message);
        assert!(run_case("nope", Level::Quick, 3, &Tolerances::default()).is_err());
        let mut rep = SuiteReport { suite: Suite::Warped, level: Level::Quick, seed: 1, tolerances: Tolerances::default(), cases: vec![c] };
        rep.cases[0].passed = false;
        rep.cases[0].message = "a < b & \"c\"".into();
        let xml = rep.to_junit();
        assert!(xml.contains("<failure message=\"a &lt; b &amp; &quot;c&quot;\"/>"));
    }
}
