use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use warpsym_cli::exit;

fn warpsym(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_warpsym"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit status")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

const STRIP_PROFILE: &str = "# warpsym profile region v1
# space: steiner-tilted-strip
# form: ball
b,radius,center
0,0.5,0.5
0.25,0.5,0.625
0.5,0.5,0.75
0.75,0.5,0.875
1,0.5,1
";

#[test]
fn steiner_preset_reports_the_straightened_strip() {
    let dir = tempfile::tempdir().unwrap();
    let o = warpsym(dir.path(), &["scenario", "steiner-tilted-strip", "--out-dir", "out"]);
    assert_eq!(code(&o), exit::OK, "{}", String::from_utf8_lossy(&o.stderr));
    let s = json(&dir.path().join("out/steiner-tilted-strip/summary.json"));
    let p = &s["profile"];
    assert!((p["perimeter_in"]["perimeter"].as_f64().unwrap() - 2.0 * 1.25f64.sqrt()).abs() < 1e-6);
    assert!((p["perimeter_out"]["perimeter"].as_f64().unwrap() - 2.0).abs() < 1e-6);
    assert_eq!(s["passed"], Value::Bool(true));
    for f in ["evidence.csv", "curves/jensen.csv", "curves/slice_volume_out.csv", "curves/enlargement_in.csv", "symmetral.grid"] {
        assert!(dir.path().join("out/steiner-tilted-strip").join(f).exists(), "{f}");
    }
}

#[test]
fn empty_region_measures_zero_and_passes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = "id = \"empty\"\n[space]\nbase = [0.0, 1.0]\nwarp = { kind = \"constant\", value = 1.0 }\nbase_density = { kind = \"constant\", value = 1.0 }\nfiber = { kind = \"line\", density = { kind = \"constant\", value = 1.0 }, extent = 1.0 }\n[region]\nspec = { kind = \"empty\" }\n[grid]\nh = 0.05\n[profile]\nsamples = 11\n";
    fs::write(dir.path().join("empty.toml"), cfg).unwrap();
    let o = warpsym(dir.path(), &["scenario", "empty.toml"]);
    assert_eq!(code(&o), exit::OK, "{}", String::from_utf8_lossy(&o.stderr));
    let s = json(&dir.path().join("empty/summary.json"));
    assert_eq!(s["volume"].as_f64(), Some(0.0));
    let g = &s["grid"];
    for k in ["perimeter_in", "perimeter_out", "epsilon"] {
        assert_eq!(g[k].as_f64(), Some(0.0), "{k}");
    }
    assert_eq!(g["audit"]["output_volume"].as_f64(), Some(0.0));
}

#[test]
fn exit_codes_are_distinct() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.toml"), "id = \"x\"\nunknown = 3\n").unwrap();
    assert_eq!(code(&warpsym(dir.path(), &["scenario", "bad.toml"])), exit::SCHEMA);
    assert_eq!(code(&warpsym(dir.path(), &["scenario", "nowhere.toml"])), exit::MISSING_FILE);
    let gauss = warpsym_cli::config::preset_text("gauss-line-schwarz").unwrap().replace("hypothesis = false", "hypothesis = true");
    fs::write(dir.path().join("gauss.toml"), gauss).unwrap();
    let o = warpsym(dir.path(), &["scenario", "gauss.toml"]);
    assert_eq!(code(&o), exit::VERIFICATION_FAILED, "{}", String::from_utf8_lossy(&o.stderr));
    let missing_region = "id = \"m\"\n[space]\nbase = [0.0, 1.0]\nwarp = { kind = \"constant\", value = 1.0 }\nbase_density = { kind = \"constant\", value = 1.0 }\nfiber = { kind = \"line\", density = { kind = \"constant\", value = 1.0 }, extent = 1.0 }\n[region]\nfile = \"absent.grid\"\n";
    fs::write(dir.path().join("m.toml"), missing_region).unwrap();
    assert_eq!(code(&warpsym(dir.path(), &["scenario", "m.toml"])), exit::MISSING_FILE);
}

#[test]
fn region_file_commands_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("strip.csv"), STRIP_PROFILE).unwrap();

    let o = warpsym(d, &["region", "strip.csv"]);
    assert_eq!(code(&o), exit::OK);
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("volume: 1"), "{text}");
    assert!(text.contains("b,slice_volume\n0,1\n"), "{text}");

    let o = warpsym(d, &["symmetrize", "--region", "strip.csv", "--variant", "schwarz", "--out", "sym.csv"]);
    assert_eq!(code(&o), exit::OK, "{}", String::from_utf8_lossy(&o.stderr));
    let audit = json(&d.join("sym.csv.audit.json"));
    assert!(audit["relative_change"].as_f64().unwrap() <= 1e-12);
    let sym = fs::read_to_string(d.join("sym.csv")).unwrap();
    let last: Vec<f64> = sym.lines().last().unwrap().split(',').map(|x| x.parse().unwrap()).collect();
    assert_eq!(last[0], 1.0);
    assert!((last[1] - 0.5).abs() < 1e-12 && last[2] == 0.0, "{sym}");

    let o = warpsym(d, &["perimeter", "--region", "strip.csv", "--method", "profile", "--out", "p.json"]);
    assert_eq!(code(&o), exit::OK);
    assert!((json(&d.join("p.json"))["detail"]["perimeter"].as_f64().unwrap() - 2.0 * 1.25f64.sqrt()).abs() < 1e-12);

    let o = warpsym(d, &["jensen", "--region", "strip.csv", "--out", "j.json"]);
    assert_eq!(code(&o), exit::OK);
    assert_eq!(json(&d.join("j.json"))["holds"], Value::Bool(true));
    assert!(d.join("j.csv").exists());

    let o = warpsym(d, &["rasterize", "--region", "strip.csv", "--h", "0.02", "--out", "strip.grid"]);
    assert_eq!(code(&o), exit::OK, "{}", String::from_utf8_lossy(&o.stderr));
    let o = warpsym(d, &["enlarge", "--region", "strip.grid", "--radius", "0.1", "--out", "big.grid", "--curve", "curve.csv"]);
    assert_eq!(code(&o), exit::OK, "{}", String::from_utf8_lossy(&o.stderr));
    let o = warpsym(d, &["region", "big.grid", "--curve", "big.csv"]);
    assert_eq!(code(&o), exit::OK);
    assert!(fs::read_to_string(d.join("curve.csv")).unwrap().starts_with("r,volume\n0,"));
    let o = warpsym(d, &["perimeter", "--region", "strip.grid", "--method", "minkowski"]);
    assert_eq!(code(&o), exit::OK, "{}", String::from_utf8_lossy(&o.stderr));

    fs::write(d.join("junk.csv"), "hello\n").unwrap();
    assert_eq!(code(&warpsym(d, &["region", "junk.csv"])), exit::SCHEMA);
}

#[test]
fn bundle_and_scenarios_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    for out in ["a", "b"] {
        let o = warpsym(d, &["--seed", "11", "--out-dir", out, "bundle", "--scenario", "cap", "--probes", "20000"]);
        assert_eq!(code(&o), exit::OK, "{}", String::from_utf8_lossy(&o.stderr));
        let o = warpsym(d, &["--seed", "11", "--out-dir", out, "--jobs", "2", "scenario", "hopf-tube", "rosales-density"]);
        assert_eq!(code(&o), exit::OK, "{}", String::from_utf8_lossy(&o.stderr));
    }
    let r = json(&d.join("a/bundle-report.json"));
    assert_eq!(r["seed"].as_u64(), Some(11));
    assert!(r["mc"]["std_error"].as_f64().unwrap() > 0.0);
    for f in ["bundle-report.json", "hopf-tube/summary.json", "rosales-density/summary.json", "rosales-density/evidence.csv"] {
        assert_eq!(fs::read(d.join("a").join(f)).unwrap(), fs::read(d.join("b").join(f)).unwrap(), "{f}");
    }
}

#[test]
fn presets_are_listed_and_printed() {
    let dir = tempfile::tempdir().unwrap();
    let o = warpsym(dir.path(), &["presets"]);
    let list = String::from_utf8(o.stdout).unwrap();
    assert_eq!(list.lines().count(), 8);
    let o = warpsym(dir.path(), &["presets", "hopf-tube"]);
    assert!(String::from_utf8(o.stdout).unwrap().contains("[bundle]"));
    assert_eq!(code(&warpsym(dir.path(), &["--tol-profile", "nope", "presets"])), exit::SCHEMA);
}
