use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use coxcell_core::mc::DEFAULT_TRIALS;
use coxcell_core::sampling::AngularMeasure;
use coxcell_core::NetworkConfig;

use crate::config::Settings;
use crate::error::CliError;
use crate::output;
use crate::presets::{self, RunSettings};
use crate::runner::{self, RunOutput};
use crate::spec::{parse_angular, parse_link, parse_scenario, CoverageTarget, Engine, ExperimentSpec, Quantity, Sweep};

pub const DEFAULT_SEED: u64 = 1;

#[derive(Debug, Parser)]
#[command(name = "coxcell", version, about = "Association and SIR coverage with base stations on Poisson roads")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Association probability of the typical user.
    Assoc {
        /// Base-station type the probability refers to: planar or vehicular.
        #[arg(long, default_value = "vehicular")]
        event: String,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// CDF of the distance to the serving base station.
    Distance {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Joint SIR coverage.
    Coverage {
        /// total, planar, vehicular, same-line, other-line, or mixture (both
        /// user types weighted by their intensities).
        #[arg(long, default_value = "total")]
        event: String,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Coverage of each link type (V2V, I2V, V2I, I2I).
    Links {
        /// One link type; all four when omitted (then --out is a directory).
        #[arg(long)]
        link: Option<String>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Regenerates the data of a published figure; --out is a directory.
    Figure {
        /// fig3 (assoc-planar), fig5 (coverage-planar), fig6
        /// (coverage-vehicular), fig7-v2v, fig7-i2v, fig7-v2i, fig7-i2i.
        name: String,
        /// Restrict fig5/fig6 to one parameter set: 3gpp, equal or dense.
        #[arg(long)]
        preset: Option<String>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Runs both engines and reports PASS when every |z| ≤ 4.
    Compare {
        /// assoc, distance, coverage or links.
        what: String,
        #[arg(long)]
        event: Option<String>,
        #[arg(long)]
        link: Option<String>,
        #[command(flatten)]
        common: CommonArgs,
    },
}

#[derive(Debug, Args, Default, Clone)]
pub struct CommonArgs {
    /// Flat key = value file; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub trials: Option<usize>,
    /// analytic, mc or both.
    #[arg(long)]
    pub engine: Option<String>,
    /// CSV path (a JSON sidecar is written next to it), or a directory for
    /// multi-curve runs. CSV goes to stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// planar or vehicular typical user.
    #[arg(long)]
    pub scenario: Option<String>,
    /// isotropic or manhattan road directions (manhattan needs --engine mc).
    #[arg(long)]
    pub angular: Option<String>,
    /// VAR=a,b,c or VAR=start:stop:step with VAR one of t-db, mu-b,
    /// lambda-b, lambda-l, r.
    #[arg(long)]
    pub sweep: Option<String>,
    #[arg(long)]
    pub lambda_b: Option<f64>,
    #[arg(long)]
    pub lambda_u: Option<f64>,
    #[arg(long)]
    pub lambda_l: Option<f64>,
    #[arg(long)]
    pub mu_b: Option<f64>,
    #[arg(long)]
    pub mu_u: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub tx_power: Option<f64>,
    /// Fixed SIR threshold in dB when the sweep is not over t-db.
    #[arg(long, allow_hyphen_values = true)]
    pub threshold_db: Option<f64>,
}

impl CommonArgs {
    /// File settings overlaid with flags.
    fn settings(&self) -> Result<Settings, CliError> {
        let file = match &self.config {
            Some(p) => Settings::from_file(p)?,
            None => Settings::default(),
        };
        let flags = Settings {
            lambda_b: self.lambda_b,
            lambda_u: self.lambda_u,
            lambda_l: self.lambda_l,
            mu_b: self.mu_b,
            mu_u: self.mu_u,
            alpha: self.alpha,
            tx_power: self.tx_power,
            threshold_db: self.threshold_db,
            seed: self.seed,
            trials: self.trials,
            engine: self.engine.clone(),
            scenario: self.scenario.clone(),
            angular: self.angular.clone(),
            sweep: self.sweep.clone(),
        };
        Ok(file.overlay(flags))
    }
}

/// Settings resolved to typed values.
struct Resolved {
    settings: Settings,
    engine: Engine,
    scenario: coxcell_core::PalmScenario,
    angular: AngularMeasure,
    n_trials: usize,
    seed: u64,
}

fn resolve(common: &CommonArgs, default_engine: Engine) -> Result<Resolved, CliError> {
    let settings = common.settings()?;
    let engine = match &settings.engine {
        Some(e) => e.parse()?,
        None => default_engine,
    };
    let scenario = parse_scenario(settings.scenario.as_deref().unwrap_or("planar"))?;
    let angular = parse_angular(settings.angular.as_deref().unwrap_or("isotropic"))?;
    Ok(Resolved {
        engine,
        scenario,
        angular,
        n_trials: settings.trials.unwrap_or(DEFAULT_TRIALS),
        seed: settings.seed.unwrap_or(DEFAULT_SEED),
        settings,
    })
}

fn sweep_or(settings: &Settings, default: &str) -> Result<Sweep, CliError> {
    settings.sweep.as_deref().unwrap_or(default).parse()
}

const DEFAULT_T_SWEEP: &str = "t-db=-10:20:2.5";
const DEFAULT_MU_SWEEP: &str = "mu-b=0.1,0.2,0.5,1,2,5,10";
const DEFAULT_R_SWEEP: &str = "r=0.02:0.4:0.02";

fn build(r: &Resolved, name: &str, quantity: Quantity, default_sweep: &str) -> Result<ExperimentSpec, CliError> {
    let scenario = match quantity {
        Quantity::Link { link } => link.scenario(),
        _ => r.scenario,
    };
    ExperimentSpec {
        name: name.to_string(),
        engine: r.engine,
        scenario,
        quantity,
        sweep: sweep_or(&r.settings, default_sweep)?,
        config: r.settings.network(NetworkConfig::default()),
        angular: r.angular,
        n_trials: r.n_trials,
        seed: r.seed,
    }
    .validate()
}

fn coverage_quantity(event: &str) -> Result<Quantity, CliError> {
    if event == "mixture" {
        Ok(Quantity::Mixture)
    } else {
        Ok(Quantity::Coverage { target: event.parse::<CoverageTarget>()? })
    }
}

fn assoc_quantity(event: &str) -> Result<Quantity, CliError> {
    match event {
        "planar" => Ok(Quantity::Association { vehicular: false }),
        "vehicular" => Ok(Quantity::Association { vehicular: true }),
        _ => Err(CliError::config(format!("assoc event must be planar or vehicular, got {event}"))),
    }
}

fn link_specs(r: &Resolved, link: Option<&str>) -> Result<Vec<ExperimentSpec>, CliError> {
    let links = match link {
        Some(l) => vec![parse_link(l)?],
        None => coxcell_core::LinkType::ALL.to_vec(),
    };
    links
        .into_iter()
        .map(|l| build(r, &l.name().to_ascii_lowercase(), Quantity::Link { link: l }, DEFAULT_T_SWEEP))
        .collect()
}

/// What to do with the results.
struct Plan {
    specs: Vec<ExperimentSpec>,
    out: Option<PathBuf>,
    /// `--out` names a directory holding one CSV per spec.
    out_is_dir: bool,
    compare: bool,
}

fn plan(cli: &Cli) -> Result<Plan, CliError> {
    let (specs, common, compare, force_dir) = match &cli.command {
        Command::Assoc { event, common } => {
            let r = resolve(common, Engine::Analytic)?;
            (vec![build(&r, "assoc", assoc_quantity(event)?, DEFAULT_MU_SWEEP)?], common, false, false)
        }
        Command::Distance { common } => {
            let r = resolve(common, Engine::Analytic)?;
            (vec![build(&r, "distance", Quantity::ServingDistanceCdf, DEFAULT_R_SWEEP)?], common, false, false)
        }
        Command::Coverage { event, common } => {
            let r = resolve(common, Engine::Analytic)?;
            (vec![build(&r, "coverage", coverage_quantity(event)?, DEFAULT_T_SWEEP)?], common, false, false)
        }
        Command::Links { link, common } => {
            let r = resolve(common, Engine::Analytic)?;
            (link_specs(&r, link.as_deref())?, common, false, link.is_none())
        }
        Command::Figure { name, preset, common } => {
            let r = resolve(common, Engine::Analytic)?;
            if r.settings.sweep.is_some() {
                return Err(CliError::config("figure presets fix their own sweep; drop --sweep"));
            }
            let settings = RunSettings {
                engine: r.engine,
                angular: r.angular,
                n_trials: r.n_trials,
                seed: r.seed,
                lambda_l: r.settings.lambda_l,
                network: preset.clone(),
            };
            let specs = presets::figure(name, &settings)?
                .into_iter()
                .map(ExperimentSpec::validate)
                .collect::<Result<Vec<_>, _>>()?;
            (specs, common, false, true)
        }
        Command::Compare { what, event, link, common } => {
            let r = resolve(common, Engine::Both)?;
            if r.engine != Engine::Both {
                return Err(CliError::config("compare always runs both engines; drop --engine or pass both"));
            }
            let specs = match what.as_str() {
                "assoc" => vec![build(
                    &r,
                    "assoc",
                    assoc_quantity(event.as_deref().unwrap_or("vehicular"))?,
                    DEFAULT_MU_SWEEP,
                )?],
                "distance" => vec![build(&r, "distance", Quantity::ServingDistanceCdf, DEFAULT_R_SWEEP)?],
                "coverage" => {
                    vec![build(
                        &r,
                        "coverage",
                        coverage_quantity(event.as_deref().unwrap_or("total"))?,
                        DEFAULT_T_SWEEP,
                    )?]
                }
                "links" => link_specs(&r, link.as_deref())?,
                other => {
                    return Err(CliError::config(format!(
                        "compare needs assoc, distance, coverage or links, got {other}"
                    )))
                }
            };
            let dir = specs.len() > 1;
            (specs, common, true, dir)
        }
    };
    Ok(Plan { specs, out: common.out.clone(), out_is_dir: force_dir, compare })
}

fn csv_path(plan: &Plan, spec: &ExperimentSpec) -> Option<PathBuf> {
    let out = plan.out.as_ref()?;
    Some(if plan.out_is_dir { out.join(format!("{}.csv", spec.name)) } else { out.clone() })
}

fn emit(plan: &Plan, spec: &ExperimentSpec, out: &RunOutput, wall: f64) -> Result<(), CliError> {
    match csv_path(plan, spec) {
        Some(p) => output::write_files(&p, spec, out, wall),
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            if plan.specs.len() > 1 {
                writeln!(lock, "# {}", spec.name)?;
            }
            output::write_csv(&out.rows, &mut lock)
        }
    }
}

fn report(plan: &Plan, spec: &ExperimentSpec, out: &RunOutput) -> bool {
    let z = out.max_abs_z().unwrap_or(0.0);
    let pass = z <= 4.0;
    let line = format!(
        "{}: max |z| = {z:.3} over {} points: {}",
        spec.name,
        out.rows.len(),
        if pass { "PASS" } else { "FAIL" }
    );
    if plan.out.is_some() {
        println!("{line}");
    } else {
        eprintln!("{line}");
    }
    pass
}

/// Runs the command line and returns the process exit code.
pub fn run(cli: &Cli) -> u8 {
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn execute(cli: &Cli) -> Result<u8, CliError> {
    let plan = plan(cli)?;
    let mut all_pass = true;
    for spec in &plan.specs {
        let start = Instant::now();
        let mut out = runner::run(spec);
        let wall = start.elapsed().as_secs_f64();
        emit(&plan, spec, &out, wall)?;
        if let Some(e) = out.error.take() {
            return Err(e);
        }
        if plan.compare {
            all_pass &= report(&plan, spec, &out);
        }
    }
    Ok(if all_pass { 0 } else { 1 })
}

/// Applies `COXCELL_THREADS` to the global thread pool.
pub fn configure_threads(value: Option<&str>) -> Result<(), CliError> {
    let Some(v) = value else { return Ok(()) };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| CliError::config(format!("COXCELL_THREADS must be a positive integer, got {v}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::config(format!("cannot configure thread pool: {e}")))
}
