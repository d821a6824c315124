// `!(x > 0.0)` guards also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use rotirs::harness::config::{load_scenario, LoadedScenario, ScenarioFile};
use rotirs::harness::emit_field;
use rotirs::harness::schemes::{run, run_scheme, Mode, RunReport, SchemeKind};
use rotirs::harness::sweep::{run_sweep, sweep_metadata, write_sweep_csv, SweepSpec};
use rotirs::objective::AreaGrid;
use rotirs::{Error, Result};

#[derive(Parser)]
#[command(
    name = "rotirs",
    version,
    about = "Rotatable IRS link simulator and rotation optimizer"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Scenario file (JSON). Missing fields use the reference deployment.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Swarm RNG seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, env = "ROTIRS_OUT_DIR", default_value = ".")]
    out: PathBuf,
    /// Exhaustive search step, degrees.
    #[arg(long)]
    es_step: Option<f64>,
    /// Area grid step, meters.
    #[arg(long)]
    grid_step: Option<f64>,
    /// Worker threads (defaults to all cores).
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Optimise for one user at the area centre.
    Single {
        #[command(flatten)]
        common: Common,
        /// Comma-separated schemes, or `all`.
        #[arg(long, default_value = "proposed")]
        scheme: String,
    },
    /// Optimise the worst-case link over the area.
    Area {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "proposed")]
        scheme: String,
    },
    /// Sweep one parameter across schemes.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// p_t (dBm), m_antennas, n_elements, area_y or irs_altitude.
        #[arg(long)]
        variable: String,
        /// Strictly increasing comma-separated values.
        #[arg(long)]
        values: String,
        #[arg(long, default_value = "all")]
        scheme: String,
        /// point or area.
        #[arg(long, default_value = "area")]
        mode: String,
    },
    /// Dump per-point quantities over the area grid for one scheme's rotation.
    Field {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "proposed")]
        scheme: String,
        #[arg(long, default_value = "area")]
        mode: String,
    },
    /// Run every scheme in both modes.
    Benchmark {
        #[command(flatten)]
        common: Common,
    },
}

fn load(common: &Common) -> Result<LoadedScenario> {
    let mut loaded = match &common.config {
        Some(path) => load_scenario(path)?,
        None => ScenarioFile::default().resolve()?,
    };
    let s = &mut loaded.settings;
    if let Some(seed) = common.seed {
        s.pso.seed = seed;
    }
    if let Some(step) = common.es_step {
        if !(step > 0.0) {
            return Err(Error::Validation {
                field: "es_step".into(),
                message: "must be positive".into(),
            });
        }
        s.es_step = step.to_radians();
    }
    if let Some(step) = common.grid_step {
        if !(step > 0.0) {
            return Err(Error::Validation {
                field: "grid_step".into(),
                message: "must be positive".into(),
            });
        }
        s.grid_step = step;
    }
    Ok(loaded)
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Domain(e.to_string()))?;
    std::fs::write(path, text)?;
    Ok(())
}

fn print_report(report: &RunReport) {
    println!(
        "{:<16}{:>10}{:>10}{:>12}{:>10}",
        "scheme", "theta", "phi", "snr_db", "feasible"
    );
    for r in &report.results {
        println!(
            "{:<16}{:>10.3}{:>10.3}{:>12.3}{:>10}",
            r.scheme.name(),
            r.theta_deg,
            r.phi_deg,
            r.snr_db,
            r.feasible
        );
    }
}

fn run_mode(common: &Common, scheme: &str, mode: Mode, name: &str) -> Result<()> {
    let loaded = load(common)?;
    let schemes = SchemeKind::parse_list(scheme)?;
    let report = run(&loaded.scenario, &loaded.settings, &schemes, mode, loaded.defaulted)?;
    std::fs::create_dir_all(&common.out)?;
    write_json(&common.out.join(format!("{name}.json")), &report)?;
    print_report(&report);
    Ok(())
}

fn execute(cli: Cli) -> Result<()> {
    let common = match &cli.command {
        Command::Single { common, .. }
        | Command::Area { common, .. }
        | Command::Sweep { common, .. }
        | Command::Field { common, .. }
        | Command::Benchmark { common } => common.clone(),
    };
    if let Some(n) = common.workers {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Usage(e.to_string()))?;
    }
    match cli.command {
        Command::Single { common, scheme } => run_mode(&common, &scheme, Mode::Point, "single"),
        Command::Area { common, scheme } => run_mode(&common, &scheme, Mode::Area, "area"),
        Command::Sweep {
            common,
            variable,
            values,
            scheme,
            mode,
        } => {
            let loaded = load(&common)?;
            let spec = SweepSpec::parse(&variable, &values)?;
            let schemes = SchemeKind::parse_list(&scheme)?;
            let mode: Mode = mode.parse()?;
            let rows = run_sweep(&loaded.scenario, &loaded.settings, &spec, &schemes, mode)?;
            std::fs::create_dir_all(&common.out)?;
            let path = common.out.join(format!("sweep_{}.csv", spec.variable));
            write_sweep_csv(&rows, std::io::BufWriter::new(std::fs::File::create(&path)?))?;
            write_json(
                &path.with_extension("json"),
                &sweep_metadata(&loaded.scenario, &spec, &schemes, mode),
            )?;
            for r in &rows {
                println!(
                    "{:<14}{:>10}{:<2}{:<16}{:>12.3}",
                    r.variable.name(),
                    r.value,
                    "",
                    r.scheme.name(),
                    r.snr_db
                );
            }
            Ok(())
        }
        Command::Field { common, scheme, mode } => {
            let loaded = load(&common)?;
            let kind: SchemeKind = scheme.parse()?;
            let r = run_scheme(&loaded.scenario, &loaded.settings, kind, mode.parse()?)?;
            let mut scn = loaded.scenario.clone();
            scn.irs_center = rotirs::Vec3::new(r.irs_center[0], r.irs_center[1], r.irs_center[2]);
            let grid = AreaGrid::for_scenario(&scn, loaded.settings.grid_step)?;
            std::fs::create_dir_all(&common.out)?;
            let s = emit_field(&scn, r.rotation(), &grid, &common.out.join("field.csv"))?;
            println!(
                "rotation ({:.3}, {:.3}) deg, min snr {:.3} dB at ({}, {})",
                s.theta_deg, s.phi_deg, s.min_snr_db, s.argmin[0], s.argmin[1]
            );
            Ok(())
        }
        Command::Benchmark { common } => {
            let loaded = load(&common)?;
            let point_schemes: Vec<SchemeKind> = SchemeKind::ALL.to_vec();
            let area_schemes: Vec<SchemeKind> = SchemeKind::ALL
                .into_iter()
                .filter(|k| *k != SchemeKind::ClosedForm)
                .collect();
            std::fs::create_dir_all(&common.out)?;
            for (mode, schemes, name) in [
                (Mode::Point, point_schemes, "benchmark_single"),
                (Mode::Area, area_schemes, "benchmark_area"),
            ] {
                let report = run(
                    &loaded.scenario,
                    &loaded.settings,
                    &schemes,
                    mode,
                    loaded.defaulted.clone(),
                )?;
                write_json(&common.out.join(format!("{name}.json")), &report)?;
                println!("== {name}");
                print_report(&report);
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
