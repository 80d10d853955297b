//! Scenario configuration files and the built-in presets.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use warpsym::regions::{GridRegion, ProfileRegion, Region, RegionSpec};
use warpsym::spaces::WarpedSpace;
use warpsym::symmetrize::Variant;
use warpsym::verify::BundleScenario;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub id: String,
    #[serde(default)]
    pub description: String,
    pub variant: Option<Variant>,
    pub space: Option<WarpedSpace>,
    pub region: Option<RegionSource>,
    pub profile: Option<ProfileSettings>,
    pub grid: Option<GridSettings>,
    pub bundle: Option<BundleSettings>,
    #[serde(default)]
    pub expect: Expectations,
}

/// Exactly one of `spec` and `file`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionSource {
    pub spec: Option<RegionSpec>,
    /// Grid or profile region file, relative to the config file.
    pub file: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileSettings {
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSettings {
    /// Cell side in both chart directions.
    pub h: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BundleSettings {
    pub k: u32,
    pub l: u32,
    pub q: u32,
    pub scenario: Option<BundleScenario>,
    #[serde(default = "default_probes")]
    pub probes: usize,
    pub distance_pairs: Option<usize>,
}

fn default_probes() -> usize {
    100_000
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expectations {
    /// Sheet perimeter of the input profile.
    pub graph_perimeter_in: Option<f64>,
    /// Sheet perimeter of the symmetral profile.
    pub graph_perimeter_out: Option<f64>,
    pub tolerance: Option<f64>,
    /// Whether the centered ball should minimize in the fiber. Defaults
    /// to true; with `false` the perimeter comparisons are reported but not
    /// asserted.
    pub hypothesis: Option<bool>,
}

/// What the pipeline runs on after validation.
#[derive(Debug, Clone)]
pub enum Pipeline {
    Warped {
        space: WarpedSpace,
        variant: Variant,
        region: LoadedRegion,
    },
    Bundle(BundleSettings),
}

#[derive(Debug, Clone)]
pub enum LoadedRegion {
    Spec {
        spec: RegionSpec,
        profile: Option<ProfileSettings>,
        grid: Option<GridSettings>,
    },
    File(Region),
}

pub const PRESETS: [(&str, &str); 8] = [
    ("steiner-tilted-strip", include_str!("../presets/steiner-tilted-strip.toml")),
    ("gauss-line-schwarz", include_str!("../presets/gauss-line-schwarz.toml")),
    ("rosales-density", include_str!("../presets/rosales-density.toml")),
    ("spherical-annulus", include_str!("../presets/spherical-annulus.toml")),
    ("cone-over-circle", include_str!("../presets/cone-over-circle.toml")),
    ("halfspace-exp", include_str!("../presets/halfspace-exp.toml")),
    ("hopf-tube", include_str!("../presets/hopf-tube.toml")),
    ("lens-q2-distance", include_str!("../presets/lens-q2-distance.toml")),
];

pub fn preset_text(id: &str) -> Option<&'static str> {
    PRESETS.iter().find(|p| p.0 == id).map(|p| p.1)
}

pub fn preset(id: &str) -> Option<ScenarioConfig> {
    preset_text(id).map(|text| parse_config(text, &format!("preset:{id}")).expect("presets parse"))
}

pub fn parse_config(text: &str, origin: &str) -> CliResult<ScenarioConfig> {
    toml::from_str(text).map_err(|e| CliError::schema(origin, e.to_string()))
}

pub fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|source| match source.kind() {
        std::io::ErrorKind::NotFound => CliError::MissingFile(path.to_path_buf()),
        _ => CliError::Read { path: path.to_path_buf(), source },
    })
}

/// A config loaded from a path, or a preset when `target` names one and
/// no such file exists. Returns the directory region files resolve against.
pub fn load_config(target: &str) -> CliResult<(ScenarioConfig, PathBuf)> {
    let path = Path::new(target);
    if !path.exists() {
        if let Some(cfg) = preset(target) {
            return Ok((cfg, PathBuf::from(".")));
        }
    }
    let text = read_text(path)?;
    let cfg = parse_config(&text, target)?;
    let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok((cfg, dir))
}

/// Preset space with the given id, matched against the preset ids and the
/// ids of their spaces.
pub fn preset_space(id: &str) -> Option<WarpedSpace> {
    PRESETS.iter().find_map(|(name, _)| {
        let cfg = preset(name)?;
        let space = cfg.space?;
        (*name == id || space.id == id).then_some(space)
    })
}

/// Space from `--space`: a preset id, a config file with a `[space]`
/// table, or a file holding the space table alone. Without `--space`,
/// the preset named by the region file.
pub fn resolve_space(arg: Option<&str>, region_space_id: &str) -> CliResult<WarpedSpace> {
    let Some(arg) = arg else {
        return preset_space(region_space_id).ok_or_else(|| {
            CliError::Usage(format!("region names space `{region_space_id}`, which is not a preset; pass --space"))
        });
    };
    let path = Path::new(arg);
    if !path.exists() {
        if let Some(s) = preset_space(arg) {
            return Ok(s);
        }
    }
    let text = read_text(path)?;
    let value: toml::Table = toml::from_str(&text).map_err(|e| CliError::schema(arg, e.to_string()))?;
    let table = match value.get("space") {
        Some(toml::Value::Table(t)) => t.clone(),
        _ => value,
    };
    let space: WarpedSpace = table.try_into().map_err(|e: toml::de::Error| CliError::schema(arg, e.to_string()))?;
    space.validate()?;
    Ok(space)
}

/// Reads a grid or profile region file, telling them apart by the header.
pub fn read_region(path: &Path) -> CliResult<(Region, String)> {
    let text = read_text(path)?;
    let first = text.lines().next().unwrap_or("").trim();
    if first.starts_with("# warpsym grid region") {
        let (g, id) = GridRegion::from_text(&text)?;
        Ok((Region::Grid(g), id))
    } else if first.starts_with("# warpsym profile region") {
        let (p, id) = ProfileRegion::from_csv(&text)?;
        Ok((Region::Profile(p), id))
    } else {
        Err(CliError::schema(path.display().to_string(), "not a warpsym region file (unknown header line)"))
    }
}

pub fn region_text(region: &Region, space_id: &str) -> String {
    match region {
        Region::Grid(g) => g.to_text(space_id),
        Region::Profile(p) => p.to_csv(space_id),
    }
}

impl ScenarioConfig {
    /// Checks the config against the schema rules serde cannot express and
    /// loads any referenced region file.
    pub fn pipeline(&self, dir: &Path, origin: &str) -> CliResult<Pipeline> {
        let bad = |m: &str| Err(CliError::schema(origin, m));
        match (&self.space, &self.bundle) {
            (Some(_), Some(_)) => bad("`space` and `bundle` are mutually exclusive"),
            (None, None) => bad("one of `space` or `bundle` is required"),
            (None, Some(b)) => {
                if self.region.is_some() || self.profile.is_some() || self.grid.is_some() || self.variant.is_some() {
                    return bad("bundle scenarios take no `region`, `profile`, `grid` or `variant`");
                }
                if b.scenario.is_none() && b.distance_pairs.is_none() {
                    return bad("`bundle` needs a `scenario` or `distance_pairs`");
                }
                if b.probes == 0 {
                    return bad("`bundle.probes` must be positive");
                }
                Ok(Pipeline::Bundle(b.clone()))
            }
            (Some(space), None) => {
                space.validate()?;
                let Some(src) = &self.region else {
                    return bad("warped scenarios need a `region`");
                };
                let region = match (&src.spec, &src.file) {
                    (Some(spec), None) => {
                        if self.profile.is_none() && self.grid.is_none() {
                            return bad("a region `spec` needs a `profile` or `grid` section");
                        }
                        if self.profile.as_ref().is_some_and(|p| p.samples < 3) {
                            return bad("`profile.samples` must be at least 3");
                        }
                        if self.grid.as_ref().is_some_and(|g| !(g.h > 0.0)) {
                            return bad("`grid.h` must be positive");
                        }
                        LoadedRegion::Spec { spec: spec.clone(), profile: self.profile.clone(), grid: self.grid.clone() }
                    }
                    (None, Some(file)) => {
                        let (region, _) = read_region(&dir.join(file))?;
                        LoadedRegion::File(region)
                    }
                    _ => return bad("`region` needs exactly one of `spec` or `file`"),
                };
                Ok(Pipeline::Warped { space: space.clone(), variant: self.variant.unwrap_or(Variant::Schwarz), region })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_parse_and_validate() {
        for (id, _) in PRESETS {
            let cfg = preset(id).unwrap();
            assert_eq!(cfg.id, id);
            cfg.pipeline(Path::new("."), id).unwrap();
        }
        assert!(preset_space("gauss-line").is_some());
        assert!(preset_space("hopf-tube").is_none());
    }

    #[test]
    fn schema_violations_are_reported() {
        let err = parse_config("id = 'x'\nbogus = 1\n", "x.toml").unwrap_err();
        assert!(matches!(err, CliError::Schema { .. }));
        let cfg = parse_config("id = 'x'\n[bundle]\nk = 1\nl = 1\nq = 1\n", "x.toml").unwrap();
        assert!(matches!(cfg.pipeline(Path::new("."), "x.toml"), Err(CliError::Schema { .. })));
        let mut two = preset("steiner-tilted-strip").unwrap();
        two.region.as_mut().unwrap().file = Some("r.csv".into());
        assert!(matches!(two.pipeline(Path::new("."), "y"), Err(CliError::Schema { .. })));
    }

    #[test]
    fn missing_region_file_is_distinct() {
        let mut cfg = preset("steiner-tilted-strip").unwrap();
        cfg.region = Some(RegionSource { spec: None, file: Some("does-not-exist.grid".into()) });
        let err = cfg.pipeline(Path::new("/nonexistent"), "z").unwrap_err();
        assert!(matches!(err, CliError::MissingFile(_)));
        assert_ne!(err.exit_code(), CliError::schema("a", "b").exit_code());
    }
}
