use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand, ValueEnum};

use e2e_energy::config::{apply_env_overrides, load_config_with_env, LoadedConfig};
use e2e_energy::report::{
    analyze_rows, csv_rows, golden_snapshot, golden_text, plot_from_rows, read_results_csv, rows_to_csv, sha256_hex,
    RunManifest,
};
use e2e_energy::scenario::{parse_grid, run_sweep, SweepSpec, SweepVariable, Variant};
use e2e_energy::{ConfigBundle, Error};

const EXIT_CONFIG: u8 = 1;
const EXIT_EMPTY: u8 = 2;

#[derive(Parser)]
#[command(name = "e2e-energy", version, about = "End-to-end power and energy efficiency of a B5G cell")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Variable {
    Rate,
    Se,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Toggle {
    On,
    Off,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep offered rate or SE and write results.csv, manifest.txt and plots.
    Sweep {
        /// Config file; defaults are used when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "rate")]
        variable: Variable,
        /// min:max:steps
        #[arg(long, default_value = "0:6e9:25")]
        grid: String,
        /// Comma-separated variants such as `sep-mmwave@128`; the antenna
        /// count defaults to the configured M_T.
        #[arg(long, default_value = "sep-mmwave,sep-lifi,nonsep")]
        variants: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "on")]
        plot: Toggle,
    },
    /// Summarize crossings, EE peaks and LiFi/mmWave ratios of a sweep.
    Analyze {
        /// Sweep output directory or a results.csv path.
        #[arg(long)]
        results: PathBuf,
        /// Config to compare against the manifest hash.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Summary file; defaults to summary.txt next to the results.
        #[arg(long)]
        summary: Option<PathBuf>,
    },
    /// Write device-power snapshots at the reference operating points.
    Golden {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write or check a config file.
    Config {
        /// Emit every key with its default value.
        #[arg(long, conflicts_with = "check")]
        write_defaults: Option<PathBuf>,
        /// Parse and validate a file.
        #[arg(long)]
        check: Option<PathBuf>,
    },
}

fn fail(code: u8, msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(code)
}

fn load(path: Option<&Path>) -> Result<(LoadedConfig, String), Error> {
    match path {
        Some(p) => Ok((load_config_with_env(p, std::env::vars())?, p.display().to_string())),
        None => {
            let mut bundle = ConfigBundle::default();
            let env_overrides = apply_env_overrides(&mut bundle, std::env::vars())?;
            bundle.validate()?;
            Ok((
                LoadedConfig {
                    bundle,
                    bytes: Vec::new(),
                    env_overrides,
                },
                "<defaults>".to_string(),
            ))
        }
    }
}

fn write(path: &Path, text: &str) -> Result<(), Error> {
    std::fs::write(path, text).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

#[allow(clippy::too_many_arguments)]
fn sweep(
    config: Option<&Path>,
    variable: Variable,
    grid: &str,
    variants: &str,
    seed: u64,
    out: &Path,
    plot: Toggle,
) -> ExitCode {
    let (loaded, config_path) = match load(config) {
        Ok(l) => l,
        Err(e) => return fail(EXIT_CONFIG, e),
    };
    let bundle = &loaded.bundle;
    let spec = parse_grid(grid)
        .and_then(|g| {
            let vs = variants
                .split(',')
                .filter(|s| !s.trim().is_empty())
                .map(|v| Variant::parse_with_default(v.trim(), bundle.scenario.m_t))
                .collect::<Result<Vec<_>, _>>()?;
            let var = match variable {
                Variable::Rate => SweepVariable::TotalRate,
                Variable::Se => SweepVariable::Se,
            };
            SweepSpec::new(var, g, vs)
        });
    let spec = match spec {
        Ok(s) => s,
        Err(e) => return fail(EXIT_CONFIG, e),
    };
    let result = match run_sweep(bundle, &spec, seed) {
        Ok(r) => r,
        Err(e) => return fail(EXIT_CONFIG, e),
    };
    let rows = csv_rows(&result);
    let run = || -> Result<(), Error> {
        std::fs::create_dir_all(out).map_err(|e| Error::Io {
            path: out.to_path_buf(),
            source: e,
        })?;
        write(&out.join("results.csv"), &rows_to_csv(&rows)?)?;
        let manifest = RunManifest {
            config_sha256: sha256_hex(&loaded.bytes),
            config_path: config_path.clone(),
            env_overrides: loaded.env_overrides.clone(),
            seed,
            variable: match variable {
                Variable::Rate => "rate".into(),
                Variable::Se => "se".into(),
            },
            grid: grid.to_string(),
            variants: spec.variants.iter().map(Variant::to_string).collect(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp_unix: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
        };
        write(&out.join("manifest.txt"), &manifest.to_text())?;
        if plot == Toggle::On {
            if let Some((name, svg)) = plot_from_rows(&rows) {
                write(&out.join(name), &svg)?;
            }
        }
        Ok(())
    };
    if let Err(e) = run() {
        return fail(EXIT_CONFIG, e);
    }
    let feasible = rows.iter().filter(|r| r.feasible).count();
    println!(
        "{} rows ({} feasible) for {} variants written to {}",
        rows.len(),
        feasible,
        spec.variants.len(),
        out.display()
    );
    if feasible == 0 {
        return fail(EXIT_EMPTY, "no feasible point in the sweep");
    }
    ExitCode::SUCCESS
}

fn analyze(results: &Path, config: Option<&Path>, summary: Option<&Path>) -> ExitCode {
    let (dir, csv) = if results.is_dir() {
        (results.to_path_buf(), results.join("results.csv"))
    } else {
        (
            results.parent().map(Path::to_path_buf).unwrap_or_default(),
            results.to_path_buf(),
        )
    };
    let rows = match read_results_csv(&csv) {
        Ok(r) => r,
        Err(e) => return fail(EXIT_CONFIG, format!("{}: {e}", csv.display())),
    };
    if let Some(cfg) = config {
        let manifest_path = dir.join("manifest.txt");
        let manifest = match std::fs::read_to_string(&manifest_path)
            .map_err(|e| Error::Io {
                path: manifest_path.clone(),
                source: e,
            })
            .and_then(|t| RunManifest::parse(&t))
        {
            Ok(m) => m,
            Err(e) => return fail(EXIT_CONFIG, e),
        };
        let bytes = match std::fs::read(cfg) {
            Ok(b) => b,
            Err(e) => return fail(EXIT_CONFIG, format!("{}: {e}", cfg.display())),
        };
        let hash = sha256_hex(&bytes);
        if hash != manifest.config_sha256 {
            return fail(
                EXIT_CONFIG,
                format!(
                    "config drift: {} hashes to {hash}, results were produced with {}",
                    cfg.display(),
                    manifest.config_sha256
                ),
            );
        }
    }
    let analysis = match analyze_rows(&rows) {
        Ok(a) => a,
        Err(e) => return fail(EXIT_CONFIG, e),
    };
    print!("{analysis}");
    let summary_path = summary.map(Path::to_path_buf).unwrap_or_else(|| dir.join("summary.txt"));
    if let Err(e) = write(&summary_path, &analysis.to_summary()) {
        return fail(EXIT_CONFIG, e);
    }
    ExitCode::SUCCESS
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match cli.command {
        Command::Sweep {
            config,
            variable,
            grid,
            variants,
            seed,
            out,
            plot,
        } => sweep(config.as_deref(), variable, &grid, &variants, seed, &out, plot),
        Command::Analyze {
            results,
            config,
            summary,
        } => analyze(&results, config.as_deref(), summary.as_deref()),
        Command::Golden { config, out } => {
            let snapshot = load(config.as_deref()).and_then(|(l, _)| golden_snapshot(&l.bundle));
            match snapshot.and_then(|s| write(&out, &golden_text(&s))) {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => fail(EXIT_CONFIG, e),
            }
        }
        Command::Config { write_defaults, check } => {
            if let Some(path) = write_defaults {
                if let Err(e) = write(&path, &ConfigBundle::default().to_config_string()) {
                    return fail(EXIT_CONFIG, e);
                }
            }
            if let Some(path) = check {
                match load(Some(&path)) {
                    Ok((l, _)) => {
                        for o in &l.env_overrides {
                            println!("env override: {o}");
                        }
                        println!("{}: ok", path.display());
                    }
                    Err(e) => return fail(EXIT_CONFIG, e),
                }
            }
            ExitCode::SUCCESS
        }
    }
}
