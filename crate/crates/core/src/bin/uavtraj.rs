//! Command-line front end.
//!
//! Exit status: 0 success, 1 invalid configuration or failed run, 2 bad
//! command line, 3 configuration file unreadable.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use uavtraj::antenna::{
    backhaul_combined_gain, crossed_dipole_directivity, tx_gain, AntennaMode, LinkGeometry,
};
use uavtraj::config::{preset, read_config_text, ConfigError, LinkKind, RunConfig, PRESET_NAMES};
use uavtraj::geometry::Point3;
use uavtraj::pipeline;

#[derive(Parser)]
#[command(name = "uavtraj", version, about = "UAV relay trajectory planning over Poisson cellular networks")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Source {
    /// TOML configuration, or a manifest.json from an earlier run.
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Bundled preset (fig2 ... fig7).
    #[arg(long)]
    preset: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the configured sweep and write every output file.
    Run {
        #[command(flatten)]
        source: Source,
        /// Override the master seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Check a configuration and list every violated constraint.
    Validate {
        #[command(flatten)]
        source: Source,
    },
    /// Path loss versus ground distance for every model.
    PathlossTable {
        #[command(flatten)]
        source: Source,
        /// Output CSV (default: stdout).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 10.0)]
        d_min: f64,
        #[arg(long, default_value_t = 2000.0)]
        d_max: f64,
        #[arg(long, default_value_t = 10.0)]
        step: f64,
    },
    /// Crossed-dipole gains over a (theta, phi) grid.
    AntennaPattern {
        /// Output CSV (default: stdout).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 5.0)]
        step_deg: f64,
    },
    /// Reward and SIR heat maps for the first realization.
    Heatmap {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

enum Failure {
    Config(ConfigError),
    Other(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Other(e)
    }
}

impl From<uavtraj::Error> for Failure {
    fn from(e: uavtraj::Error) -> Self {
        Failure::Other(e.into())
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e)
    }
}

fn load_text(source: &Source) -> Result<String, ConfigError> {
    match (&source.config, &source.preset) {
        (Some(path), _) => read_config_text(path),
        (None, Some(name)) => preset(name).map(str::to_owned).ok_or_else(|| {
            ConfigError::Parse(format!("unknown preset {name:?}; available: {}", PRESET_NAMES.join(", ")))
        }),
        (None, None) => Err(ConfigError::Parse("one of --config or --preset is required".into())),
    }
}

/// Parsed and validated configuration plus the exact text it came from.
fn load(source: &Source, seed: Option<u64>) -> Result<(RunConfig, String), ConfigError> {
    let mut text = load_text(source)?;
    let mut config = RunConfig::from_toml(&text)?;
    if let Some(seed) = seed {
        config.experiment.master_seed = seed;
        // Keep the echoed text replayable with the overridden seed.
        text = toml::to_string(&config).map_err(|e| ConfigError::Parse(e.to_string()))?;
    }
    config.validate()?;
    Ok((config, text))
}

fn sink(out: &Option<PathBuf>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(std::fs::File::create(p).with_context(|| format!("creating {}", p.display()))?),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn pathloss_table(source: &Source, out: &Option<PathBuf>, d_min: f64, d_max: f64, step: f64) -> Result<(), Failure> {
    let config = if source.config.is_none() && source.preset.is_none() {
        RunConfig::from_toml("version = 1\n[experiment]\nmaster_seed = 0\n")?
    } else {
        RunConfig::from_toml(&load_text(source)?)?
    };
    if !(d_min > 0.0 && d_max >= d_min && step > 0.0) {
        return Err(anyhow::anyhow!("need 0 < d_min <= d_max and step > 0").into());
    }
    let p = &config.physical;
    let m = &config.mplm;
    #[derive(Serialize)]
    struct Row {
        distance_m: f64,
        ohplm_mbs_ue: f64,
        ohplm_uav_ue: f64,
        mplm_uav_ue: f64,
        fspl_uav_ue: f64,
        uma_av_los_mbs_uav: f64,
    }
    let mut w = csv::Writer::from_writer(sink(out)?);
    let n = ((d_max - d_min) / step + 1e-9).floor() as usize;
    for i in 0..=n {
        let d = d_min + i as f64 * step;
        let ue = Point3::new(d, 0.0, p.h_ue);
        let mbs = Point3::new(0.0, 0.0, p.h_bs);
        let uav = Point3::new(0.0, 0.0, p.h_uav);
        let loss = |k: LinkKind, tx: Point3, rx: Point3| k.model(m).loss_db(tx, rx, p.f_c_mhz, p.alpha_los, p.alpha_nlos);
        w.serialize(Row {
            distance_m: d,
            ohplm_mbs_ue: loss(LinkKind::Ohplm, mbs, ue)?,
            ohplm_uav_ue: loss(LinkKind::Ohplm, uav, ue)?,
            mplm_uav_ue: loss(LinkKind::Mplm, uav, ue)?,
            fspl_uav_ue: loss(LinkKind::Fspl, uav, ue)?,
            uma_av_los_mbs_uav: loss(LinkKind::UmaAvLos, mbs, Point3::new(d, 0.0, p.h_uav))?,
        })
        .context("writing pathloss table")?;
    }
    w.flush().context("writing pathloss table")?;
    Ok(())
}

fn antenna_pattern(out: &Option<PathBuf>, step_deg: f64) -> Result<(), Failure> {
    if !(step_deg > 0.0 && step_deg <= 90.0) {
        return Err(anyhow::anyhow!("step_deg must be in (0, 90]").into());
    }
    #[derive(Serialize)]
    struct Row {
        theta_deg: f64,
        phi_deg: f64,
        directivity: f64,
        tx_gain: f64,
        backhaul_gain: f64,
    }
    let mut w = csv::Writer::from_writer(sink(out)?);
    let nt = (180.0 / step_deg).round() as usize;
    let np = (360.0 / step_deg).round() as usize;
    let origin = Point3::new(0.0, 0.0, 0.0);
    for it in 0..=nt {
        let theta = it as f64 * step_deg;
        for ip in 0..np {
            let phi = ip as f64 * step_deg;
            let (t, f) = (theta.to_radians(), phi.to_radians());
            let r = [t.sin() * f.cos(), t.sin() * f.sin(), t.cos()];
            let geom = LinkGeometry {
                tx_position: origin,
                rx_position: Point3::new(r[0], r[1], r[2]),
                tx_mode: AntennaMode::CrossedDipole,
                rx_mode: AntennaMode::CrossedDipole,
            };
            w.serialize(Row {
                theta_deg: theta,
                phi_deg: phi,
                directivity: crossed_dipole_directivity(r),
                tx_gain: tx_gain(&geom)?,
                backhaul_gain: backhaul_combined_gain(&geom)?,
            })
            .context("writing antenna pattern")?;
        }
    }
    w.flush().context("writing antenna pattern")?;
    Ok(())
}

fn heatmap(source: &Source, seed: Option<u64>, out: &Path) -> Result<(), Failure> {
    let (config, _) = load(source, seed)?;
    let files = pipeline::heatmap_artifacts(&config)?;
    for p in pipeline::write_all(out, &files)? {
        println!("{}", p.display());
    }
    Ok(())
}

fn dispatch(cli: &Cli) -> Result<(), Failure> {
    match &cli.command {
        Command::Run { source, seed, out } => {
            let (config, text) = load(source, *seed)?;
            let sweep = pipeline::run(&config, &text, out)?;
            log::info!("{} sweep points written to {}", sweep.points.len(), out.display());
            println!("{}", out.join(pipeline::MANIFEST).display());
            Ok(())
        }
        Command::Validate { source } => {
            let config = RunConfig::from_toml(&load_text(source)?)?;
            let d = config.diagnostics();
            if d.is_empty() {
                println!("ok");
                Ok(())
            } else {
                Err(ConfigError::Invalid(d).into())
            }
        }
        Command::PathlossTable { source, out, d_min, d_max, step } => {
            pathloss_table(source, out, *d_min, *d_max, *step)
        }
        Command::AntennaPattern { out, step_deg } => antenna_pattern(out, *step_deg),
        Command::Heatmap { source, seed, out } => heatmap(source, *seed, out),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(e @ ConfigError::Unreadable { .. })) => {
            eprintln!("error: {e}");
            ExitCode::from(3)
        }
        Err(Failure::Config(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(Failure::Other(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
