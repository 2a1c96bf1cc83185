//! Batch front end: one run per invocation, artifacts to a directory,
//! machine-readable exit codes (0 success, 2 positivity abort, 3 mesh
//! tangling, 4 bad configuration).
//!
//! Every successful run is also cached under `<output>/references/<run-id>`
//! keyed by the content hash of its resolved configuration, so later runs
//! can name it in `[reference] run-id` and receive an `errors.csv` against
//! it.

use std::fs;
use std::path::PathBuf;
use std::process;

use clap::error::ErrorKind;
use clap::Parser;

use swe::config::{
    apply_overrides, parse_config, parse_mesh_mode, parse_order, parse_resolution, parse_scheme,
    scheme_name, Overrides, RunConfig,
};
use swe::driver::{self, RunOutcome};
use swe::error::SolverError;
use swe::output;
use swe::problems;

#[derive(Parser)]
#[command(
    name = "swe",
    about = "Finite-difference shallow water solver on static and adaptive moving meshes"
)]
struct Cli {
    /// Run configuration file (TOML).
    #[arg(long, value_name = "PATH", required_unless_present = "list_problems")]
    config: Option<PathBuf>,

    /// Directory the artifacts are written into.
    #[arg(long, value_name = "DIR", default_value = "out")]
    output: PathBuf,

    /// Override the interface flux: `ec` (conservative) or `es` (stabilised).
    #[arg(long, value_name = "FLUX")]
    scheme: Option<String>,

    /// Override the mesh mode: `static` or `moving`.
    #[arg(long, value_name = "MODE")]
    mesh: Option<String>,

    /// Override the resolution: `N` for 1D, `N` or `N1xN2` for 2D.
    #[arg(long, value_name = "RES")]
    resolution: Option<String>,

    /// Override the scheme order parameter: 1, 2 or 3 (orders 2, 4, 6).
    #[arg(long, value_name = "P")]
    order: Option<u32>,

    /// List the registered problems and exit.
    #[arg(long)]
    list_problems: bool,
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 4,
            };
            let _ = e.print();
            process::exit(code);
        }
    };

    if cli.list_problems {
        for name in problems::PROBLEM_NAMES {
            println!("{name:<22}{}", problems::describe(name));
        }
        return;
    }

    if let Err(err) = run(&cli) {
        eprintln!("{err}");
        process::exit(err.exit_code());
    }
}

fn load_config(cli: &Cli) -> Result<RunConfig, SolverError> {
    let path = cli.config.as_ref().expect("clap requires --config without --list-problems");
    let text = fs::read_to_string(path)
        .map_err(|e| SolverError::Config(format!("cannot read config `{}`: {e}", path.display())))?;
    let mut cfg = parse_config(&text)?;
    let overrides = Overrides {
        scheme: cli.scheme.as_deref().map(parse_scheme).transpose()?,
        moving_mesh: cli.mesh.as_deref().map(parse_mesh_mode).transpose()?,
        resolution: cli.resolution.as_deref().map(parse_resolution).transpose()?,
        order: cli.order.map(parse_order).transpose()?,
    };
    apply_overrides(&mut cfg, &overrides)?;
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<(), SolverError> {
    let cfg = load_config(cli)?;
    let run_id = cfg.content_hash();
    let outcome = driver::execute(&cfg)?;

    driver::write_run_artifacts(&outcome, &cli.output)?;
    let ref_dir = cli.output.join("references").join(&run_id);
    if !ref_dir.join("config.txt").exists() {
        driver::write_run_artifacts(&outcome, &ref_dir)?;
        fs::write(ref_dir.join("config.txt"), cfg.canonical_string())?;
    }

    let resolution = match &outcome {
        RunOutcome::One(d) => format!("{}", d.grid.n),
        RunOutcome::Two(d) => format!("{}x{}", d.grid.n1, d.grid.n2),
    };
    let report_lines = if cfg.reference.is_some() {
        Some(driver::compare_to_reference(&cfg, &outcome, &cli.output)?)
    } else {
        match &outcome {
            RunOutcome::One(d) => driver::exact_error_norms_1d(d, d.snapshots.len() - 1),
            RunOutcome::Two(d) => driver::exact_error_norms_2d(d, d.snapshots.len() - 1),
        }
    };
    let wrote_errors = report_lines.is_some();
    if let Some(lines) = report_lines {
        let table =
            output::render_error_table(&[output::ErrorRow { resolution: resolution.clone(), lines }]);
        output::write_artifact(&cli.output, "errors.csv", &table)?;
    }

    println!(
        "run {run_id}: {} | {} flux, order {}, {} mesh, {resolution} nodes",
        cfg.problem,
        scheme_name(cfg.scheme),
        2 * cfg.order.p(),
        if cfg.moving_mesh { "moving" } else { "static" },
    );
    let (steps, wall, energy, gates, dropped) = match &outcome {
        RunOutcome::One(d) => (d.steps, d.wall, &d.energy, d.gates.len(), d.gates_dropped),
        RunOutcome::Two(d) => (d.steps, d.wall, &d.energy, d.gates.len(), d.gates_dropped),
    };
    let (e0, e1) = (energy.first().expect("populated").1, energy.last().expect("populated").1);
    println!(
        "  t = {:.6} after {steps} steps in {:.3}s; energy {:.12e} -> {:.12e}",
        outcome.final_time(),
        wall.as_secs_f64(),
        e0,
        e1,
    );
    if gates > 0 || dropped > 0 {
        println!("  bottom-dissipation gates fired {} times ({dropped} not logged)", gates + dropped);
    }
    if let RunOutcome::Two(d) = &outcome {
        if let Some(asym) = d.quarter_turn_asymmetry {
            println!("  quarter-turn depth asymmetry: {asym:.3e}");
        }
    }
    if wrote_errors {
        println!("  error report: {}", cli.output.join("errors.csv").display());
    }
    println!("  artifacts in {}", cli.output.display());
    Ok(())
}
