use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use warpsym::bundles::BundleSpace;
use warpsym::symmetrize::Variant;
use warpsym::verify::{BundleScenario, Level, Suite, Tolerances};
use warpsym_cli::commands::{self, Globals, Outcome, PerimeterMethod};
use warpsym_cli::output::Artifact;
use warpsym_cli::{exit, run_scenario, CliError, CliResult, PRESETS};

#[derive(Parser)]
#[command(name = "warpsym", version, about = "Symmetrization in warped products and circle bundles")]
struct Cli {
    /// Seed of every random stream.
    #[arg(long, global = true, default_value_t = 7)]
    seed: u64,
    /// Tolerance profile: default, strict or loose.
    #[arg(long, global = true, default_value = "default")]
    tol_profile: String,
    /// Directory for reports; relative output paths resolve against it.
    #[arg(long, global = true, default_value = ".")]
    out_dir: PathBuf,
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Schwarz,
    Halfspace,
    Spherical,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Schwarz => Variant::Schwarz,
            VariantArg::Halfspace => Variant::Halfspace,
            VariantArg::Spherical => Variant::Spherical,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Minkowski,
    Profile,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScenarioArg {
    Tube,
    Cap,
    FiberUnion,
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    Warped,
    Bundle,
    All,
}

#[derive(Clone, Copy, ValueEnum)]
enum LevelArg {
    Quick,
    Full,
}

#[derive(Subcommand)]
enum Command {
    /// Symmetrize a region file and write the result with a volume audit.
    Symmetrize {
        /// Preset id, config file or space file; defaults to the region's space.
        #[arg(long)]
        space: Option<String>,
        #[arg(long)]
        region: PathBuf,
        #[arg(long, value_enum, default_value = "schwarz")]
        variant: VariantArg,
        #[arg(long)]
        out: PathBuf,
    },
    /// Perimeter of a region file.
    Perimeter {
        #[arg(long)]
        space: Option<String>,
        #[arg(long)]
        region: PathBuf,
        #[arg(long, value_enum)]
        method: MethodArg,
        /// Cell side for rasterizing a profile region.
        #[arg(long)]
        h: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Enlarge a grid region by a radius.
    Enlarge {
        #[arg(long)]
        space: Option<String>,
        #[arg(long)]
        region: PathBuf,
        #[arg(long)]
        radius: f64,
        #[arg(long)]
        out: PathBuf,
        /// Also write the enlargement curve at the default radii.
        #[arg(long)]
        curve: Option<PathBuf>,
    },
    /// Slice-by-slice Jensen chain for a profile region and its symmetral.
    Jensen {
        #[arg(long)]
        space: Option<String>,
        #[arg(long)]
        region: PathBuf,
        #[arg(long, value_enum, default_value = "schwarz")]
        variant: VariantArg,
        #[arg(long)]
        out: PathBuf,
    },
    /// Monte Carlo perimeter and bundle symmetral of a region in L(q; k, l).
    Bundle {
        #[arg(long, default_value_t = 1)]
        k: u32,
        #[arg(long, default_value_t = 1)]
        l: u32,
        #[arg(long, default_value_t = 1)]
        q: u32,
        #[arg(long, value_enum)]
        scenario: ScenarioArg,
        #[arg(long, default_value_t = 100_000)]
        probes: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the verification suite; writes JUnit XML, JSON and CSV evidence.
    Verify {
        #[arg(long, value_enum, default_value = "all")]
        suite: SuiteArg,
        #[arg(long, value_enum, default_value = "full")]
        level: LevelArg,
    },
    /// Run scenario configs (paths or preset ids).
    Scenario {
        #[arg(required = true)]
        configs: Vec<String>,
    },
    /// Validate a region file and print its stats.
    Region {
        file: PathBuf,
        #[arg(long)]
        space: Option<String>,
        /// Write the slice-volume curve here instead of printing it.
        #[arg(long)]
        curve: Option<PathBuf>,
    },
    /// Rasterize a profile region file onto a grid.
    Rasterize {
        #[arg(long)]
        space: Option<String>,
        #[arg(long)]
        region: PathBuf,
        #[arg(long)]
        h: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// List the presets, or print one.
    Presets { id: Option<String> },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}

fn report(outcome: &Outcome) -> i32 {
    println!("{}", outcome.summary);
    for p in &outcome.written {
        eprintln!("wrote {}", p.display());
    }
    if outcome.passed {
        exit::OK
    } else {
        exit::VERIFICATION_FAILED
    }
}

fn run(cli: Cli) -> CliResult<i32> {
    if let Some(n) = cli.jobs {
        if n == 0 {
            return Err(CliError::Usage("--jobs must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    let g = Globals { seed: cli.seed, tol: Tolerances::named(&cli.tol_profile).map_err(|e| CliError::Usage(e.to_string()))?, out_dir: cli.out_dir };
    let outcome = match &cli.command {
        Command::Symmetrize { space: s, region, variant, out } => {
            commands::symmetrize_cmd(&g, s.as_deref(), region, (*variant).into(), out)?
        }
        Command::Perimeter { space: s, region, method, h, out } => {
            let method = match method {
                MethodArg::Minkowski => PerimeterMethod::Minkowski,
                MethodArg::Profile => PerimeterMethod::Profile,
            };
            commands::perimeter_cmd(&g, s.as_deref(), region, method, *h, out.as_deref())?
        }
        Command::Enlarge { space: s, region, radius, out, curve } => {
            commands::enlarge_cmd(&g, s.as_deref(), region, *radius, out, curve.as_deref())?
        }
        Command::Jensen { space: s, region, variant, out } => {
            commands::jensen_cmd(&g, s.as_deref(), region, (*variant).into(), out)?
        }
        Command::Bundle { k, l, q, scenario, probes, out } => {
            let scenario = match scenario {
                ScenarioArg::Tube => BundleScenario::Tube,
                ScenarioArg::Cap => BundleScenario::Cap,
                ScenarioArg::FiberUnion => BundleScenario::FiberUnion,
            };
            commands::bundle_cmd(&g, BundleSpace::new(*k, *l, *q)?, scenario, *probes, out.as_deref())?
        }
        Command::Verify { suite, level } => {
            let suite = match suite {
                SuiteArg::Warped => Suite::Warped,
                SuiteArg::Bundle => Suite::Bundle,
                SuiteArg::All => Suite::All,
            };
            let level = match level {
                LevelArg::Quick => Level::Quick,
                LevelArg::Full => Level::Full,
            };
            commands::verify_cmd(&g, suite, level)?
        }
        Command::Scenario { configs } => return scenarios(&g, configs),
        Command::Region { file, space: s, curve } => commands::region_cmd(&g, s.as_deref(), file, curve.as_deref())?,
        Command::Rasterize { space: s, region, h, out } => commands::rasterize_cmd(&g, s.as_deref(), region, *h, out)?,
        Command::Presets { id } => return presets(id.as_deref()),
    };
    Ok(report(&outcome))
}

/// Runs each config, in parallel when several are given, and writes each
/// report bundle under `<out-dir>/<id>/`. Errors take precedence over
/// failed verdicts in the exit status, in argument order.
fn scenarios(g: &Globals, configs: &[String]) -> CliResult<i32> {
    let results: Vec<CliResult<(String, bool, Vec<PathBuf>)>> = configs
        .par_iter()
        .map(|target| {
            let (rep, mut artifacts) = run_scenario(target, g.seed, &g.tol)?;
            artifacts.0.insert(0, Artifact::json("summary.json", &rep));
            let written = artifacts.write_all(&g.out_dir.join(&rep.id))?;
            Ok((rep.id, rep.passed, written))
        })
        .collect();
    let mut code = exit::OK;
    let mut error = None;
    for (target, r) in configs.iter().zip(results) {
        match r {
            Ok((id, passed, written)) => {
                println!("{} {id}", if passed { "PASS" } else { "FAIL" });
                for p in written {
                    eprintln!("wrote {}", p.display());
                }
                if !passed && code == exit::OK {
                    code = exit::VERIFICATION_FAILED;
                }
            }
            Err(e) => {
                eprintln!("error: {target}: {e}");
                error.get_or_insert(e.exit_code());
            }
        }
    }
    Ok(error.unwrap_or(code))
}

fn presets(id: Option<&str>) -> CliResult<i32> {
    match id {
        None => {
            for (name, text) in PRESETS {
                let description = warpsym_cli::config::parse_config(text, name)?.description;
                println!("{name:22} {description}");
            }
        }
        Some(id) => {
            let text = warpsym_cli::config::preset_text(id)
                .ok_or_else(|| CliError::MissingFile(Path::new(id).to_path_buf()))?;
            print!("{text}");
        }
    }
    Ok(exit::OK)
}
