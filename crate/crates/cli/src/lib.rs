//! Command-line front end: scenario ingestion, the `simulate`, `tune`,
//! `sweep` and `spectrum` experiments, and result files.

pub mod output;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use rofsim_core::link::{ru_y_modulated, LinkScenario, LinkSession, PreparedUplink};
use rofsim_core::optics::optical_psd;
use rofsim_core::scenario::{bundled_file, read_scenario_file, ScenarioFile};
use rofsim_core::signal::{analysis_rbw, welch_psd, SpectrumEstimate};
use rofsim_core::tuner::{auto_tune, seed_settings, SicSettings, TuneReport};
use rofsim_core::Error;

use output::{num, prefix, sci, spectrum_rows, Table};

/// Prefix selecting a scenario shipped with the simulator instead of a file.
pub const BUILTIN_PREFIX: &str = "builtin:";

pub const TAPS: [&str; 4] = ["dp_bpsk_out", "polarizer_out", "ru_y_mod", "bpd_out"];

#[derive(Debug, Parser)]
#[command(name = "rofsim", version, about = "Photonic SIC simulator for full-duplex radio over fiber")]
pub struct Cli {
    /// Directory for result files.
    #[arg(long, global = true, env = "ROFSIM_OUT", default_value = ".")]
    pub out: PathBuf,
    /// Worker threads for sweeps.
    #[arg(long, global = true, default_value_t = 1)]
    pub jobs: usize,
    /// Override the scenario's random seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the link once and write a metrics row plus the detector spectra.
    Simulate {
        scenario: String,
        #[command(flatten)]
        sic: SicArgs,
        /// Exit with status 4 when the depth falls below this many dB.
        #[arg(long)]
        assert_depth: Option<f64>,
    },
    /// Seed and refine the canceller, writing the tune report.
    Tune {
        scenario: String,
        /// Wideband mode: RF phase shift applied ahead of the uplink modulator.
        #[arg(long, allow_hyphen_values = true)]
        phase_comp_rad: Option<f64>,
    },
    /// Vary one numeric scenario key and write one metrics row per value.
    Sweep {
        scenario: String,
        /// Dotted scenario key, e.g. `downlink_fiber.length_km`.
        #[arg(long)]
        axis: String,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        values: Vec<f64>,
        /// Tune once on the unmodified scenario and keep those settings.
        #[arg(long)]
        hold_sic: bool,
        #[arg(long, allow_hyphen_values = true)]
        phase_comp_rad: Option<f64>,
    },
    /// Write the PSD at one observation point.
    Spectrum {
        scenario: String,
        /// One of dp_bpsk_out, polarizer_out, ru_y_mod, bpd_out.
        #[arg(long)]
        tap: String,
        /// Resolution bandwidth; defaults to four record bins.
        #[arg(long)]
        rbw_mhz: Option<f64>,
        #[command(flatten)]
        sic: SicArgs,
    },
}

/// Canceller settings. Without `--auto-tune` or an explicit alpha the
/// closed-form seed is used.
#[derive(Debug, Clone, Args)]
pub struct SicArgs {
    #[arg(long, conflicts_with_all = ["alpha", "tau2_ns"])]
    pub auto_tune: bool,
    #[arg(long, requires = "tau2_ns")]
    pub alpha: Option<f64>,
    #[arg(long, requires = "alpha")]
    pub tau2_ns: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub phase_comp_rad: Option<f64>,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] Error),
    #[error("cancellation depth {depth:.2} dB is below the required {threshold:.2} dB")]
    AssertDepth { depth: f64, threshold: f64 },
}

impl CliError {
    /// 2 for bad input, 3 for failures inside the simulation, 4 for a
    /// missed `--assert-depth` threshold.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::AssertDepth { .. } => 4,
            CliError::Core(e) => match e {
                Error::Simulation(_)
                | Error::Lock(_)
                | Error::DegenerateScan { .. }
                | Error::AttenuatorInfeasible(_)
                | Error::DivisionByZero(_)
                | Error::RailConflict(_) => 3,
                _ => 2,
            },
        }
    }
}

/// What a command produced: the files written and a short summary.
#[derive(Debug, Default)]
pub struct Report {
    pub files: Vec<PathBuf>,
    pub summary: String,
}

pub fn load(source: &str, seed: Option<u64>) -> Result<ScenarioFile, Error> {
    let mut file = match source.strip_prefix(BUILTIN_PREFIX) {
        Some(name) => bundled_file(name)?,
        None => read_scenario_file(Path::new(source))?,
    };
    if let Some(seed) = seed {
        file.seed = seed;
    }
    Ok(file)
}

pub fn run(cli: &Cli) -> Result<Report, CliError> {
    match &cli.command {
        Command::Simulate {
            scenario,
            sic,
            assert_depth,
        } => simulate(cli, scenario, sic, *assert_depth),
        Command::Tune {
            scenario,
            phase_comp_rad,
        } => tune(cli, scenario, *phase_comp_rad),
        Command::Sweep {
            scenario,
            axis,
            values,
            hold_sic,
            phase_comp_rad,
        } => sweep(cli, scenario, axis, values, *hold_sic, *phase_comp_rad),
        Command::Spectrum {
            scenario,
            tap,
            rbw_mhz,
            sic,
        } => spectrum(cli, scenario, tap, *rbw_mhz, sic),
    }
}

/// Settings per `SicArgs`, with the mode label written to the metrics row.
fn choose_settings(
    session: &LinkSession,
    prepared: &PreparedUplink,
    args: &SicArgs,
) -> Result<(SicSettings, &'static str), Error> {
    if args.auto_tune {
        return Ok((auto_tune(session, prepared)?.refined, "auto"));
    }
    if let (Some(alpha), Some(tau2_ns)) = (args.alpha, args.tau2_ns) {
        let mut sic = SicSettings::new(alpha, tau2_ns * 1e-9);
        sic.rf_phase_comp = args.phase_comp_rad;
        return Ok((sic, "manual"));
    }
    Ok((seed_settings(session, args.phase_comp_rad)?, "seed"))
}

fn metrics_row(
    s: &LinkScenario,
    mode: &str,
    sic: &SicSettings,
    session: &LinkSession,
    prepared: &PreparedUplink,
) -> Result<(String, f64), Error> {
    let m = session.evaluate(prepared, sic)?.metrics;
    let soi = m.soi.as_ref();
    let row = [
        mode.to_string(),
        sci(sic.alpha),
        num(Some(sic.tau2 * 1e9)),
        num(sic.rf_phase_comp),
        num(Some(m.depth_db)),
        num(Some(m.si_without_dbm)),
        num(Some(m.residual_si_dbm)),
        num(soi.map(|x| x.soi_power_dbm)),
        num(soi.map(|x| x.si_in_soi_band_without_dbm)),
        num(soi.map(|x| x.si_in_soi_band_with_dbm)),
        num(soi.map(|x| x.soi_band_with_sic_dbm)),
        num(soi.and_then(|x| x.evm_percent)),
    ]
    .join(",");
    Ok((format!("{},{row}", prefix(&s.name, s.seed)), m.depth_db))
}

const METRICS_UNITS: &str = "alpha power ratio, tau2 ns, phase rad, powers dBm, depth dB, EVM %";

fn simulate(
    cli: &Cli,
    source: &str,
    args: &SicArgs,
    assert_depth: Option<f64>,
) -> Result<Report, CliError> {
    let s = load(source, cli.seed)?.to_link()?;
    let session = LinkSession::new(&s)?;
    let prepared = session.prepare(args.phase_comp_rad)?;
    let (sic, mode) = choose_settings(&session, &prepared, args)?;
    let result = session.evaluate(&prepared, &sic)?;
    let (row, depth) = metrics_row(&s, mode, &sic, &session, &prepared)?;

    let mut metrics = Table::new("metrics", METRICS_UNITS, output::METRICS_COLUMNS);
    metrics.push(&row);
    let mut files = vec![metrics.write(&cli.out, &format!("{}_metrics.csv", s.name))?];
    for (tap, w) in [
        ("bpd_out_with_sic", &result.bpd_out_with_sic),
        ("bpd_out_without_sic", &result.bpd_out_without_sic),
    ] {
        let mut t = Table::new("spectrum", "frequency Hz, PSD dBm/Hz into 50 ohm", output::SPECTRUM_COLUMNS);
        spectrum_rows(&mut t, &prefix(&s.name, s.seed), tap, &welch_psd(w, session.rbw)?);
        files.push(t.write(&cli.out, &format!("{}_{tap}.csv", s.name))?);
    }

    if let Some(threshold) = assert_depth {
        if !(depth >= threshold) {
            return Err(CliError::AssertDepth { depth, threshold });
        }
    }
    Ok(Report {
        files,
        summary: row,
    })
}

fn tune_row(s: &LinkScenario, r: &TuneReport) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{}",
        prefix(&s.name, s.seed),
        sci(r.seed.alpha),
        num(Some(r.seed.tau2 * 1e9)),
        sci(r.refined.alpha),
        num(Some(r.refined.tau2 * 1e9)),
        num(r.refined.rf_phase_comp),
        num(Some(r.depth_seed)),
        num(Some(r.depth_refined)),
        r.iterations
    )
}

fn tune(cli: &Cli, source: &str, phase: Option<f64>) -> Result<Report, CliError> {
    let s = load(source, cli.seed)?.to_link()?;
    let session = LinkSession::new(&s)?;
    let prepared = session.prepare(phase)?;
    let report = auto_tune(&session, &prepared)?;
    let row = tune_row(&s, &report);
    let mut t = Table::new(
        "tune",
        "alpha power ratio, tau2 ns, phase rad, depth dB",
        output::TUNE_COLUMNS,
    );
    t.push(&row);
    Ok(Report {
        files: vec![t.write(&cli.out, &format!("{}_tune.csv", s.name))?],
        summary: row,
    })
}

fn sweep(
    cli: &Cli,
    source: &str,
    axis: &str,
    values: &[f64],
    hold_sic: bool,
    phase: Option<f64>,
) -> Result<Report, CliError> {
    if values.is_empty() {
        return Err(Error::Validation {
            key: "values".into(),
            reason: "at least one sweep value is required".into(),
        }
        .into());
    }
    let base = load(source, cli.seed)?;
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);

    // Build every point first so bad axes and values fail before any work.
    let points = sorted
        .iter()
        .map(|&v| {
            let mut f = base.clone();
            f.set_numeric(axis, v)?;
            Ok((v, f.to_link()?))
        })
        .collect::<Result<Vec<_>, Error>>()?;

    let held = if hold_sic {
        let s = base.to_link()?;
        let session = LinkSession::new(&s)?;
        let prepared = session.prepare(phase)?;
        Some(auto_tune(&session, &prepared)?.refined)
    } else {
        None
    };

    let evaluate = |(v, s): &(f64, LinkScenario)| -> Result<String, Error> {
        let session = LinkSession::new(s)?;
        let prepared = session.prepare(phase)?;
        let (sic, mode) = match held {
            Some(sic) => (sic, "hold"),
            None => (auto_tune(&session, &prepared)?.refined, "auto"),
        };
        let (row, _) = metrics_row(s, mode, &sic, &session, &prepared)?;
        let (head, rest) = row.split_at(prefix(&s.name, s.seed).len());
        Ok(format!("{head},{axis},{}{rest}", num(Some(*v))))
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.jobs.max(1))
        .build()
        .map_err(|e| Error::Simulation(e.to_string()))?;
    // `collect` on an indexed parallel iterator keeps input order.
    let rows = pool.install(|| points.par_iter().map(evaluate).collect::<Result<Vec<_>, _>>())?;

    let mut t = Table::new(
        "sweep",
        &format!("axis value in the key's unit; {METRICS_UNITS}"),
        &format!("axis,value,{}", output::METRICS_COLUMNS),
    );
    rows.iter().for_each(|r| t.push(r));
    let name = format!("{}_sweep_{}.csv", base.name, axis.replace('.', "_"));
    Ok(Report {
        files: vec![t.write(&cli.out, &name)?],
        summary: rows.join("\n"),
    })
}

fn spectrum(
    cli: &Cli,
    source: &str,
    tap: &str,
    rbw_mhz: Option<f64>,
    args: &SicArgs,
) -> Result<Report, CliError> {
    if !TAPS.contains(&tap) {
        return Err(Error::Tap(tap.to_string()).into());
    }
    let s = load(source, cli.seed)?.to_link()?;
    let session = LinkSession::new(&s)?;
    let rbw = rbw_mhz.map_or(analysis_rbw(&s.grid), |r| r * 1e6);
    let (est, units): (SpectrumEstimate, &str) = match tap {
        "dp_bpsk_out" => (
            optical_psd(&session.downlink.dp_bpsk_out, rbw)?,
            "offset from optical carrier Hz, PSD dBm/Hz (both rails)",
        ),
        "polarizer_out" => (
            optical_psd(&session.downlink.polarizer_out, rbw)?,
            "offset from optical carrier Hz, PSD dBm/Hz (both rails)",
        ),
        "ru_y_mod" => {
            let y = ru_y_modulated(&session.downlink.ru_field, &session.received, &s, args.phase_comp_rad)?;
            (
                optical_psd(&y, rbw)?,
                "offset from optical carrier Hz, PSD dBm/Hz (both rails)",
            )
        }
        _ => {
            let prepared = session.prepare(args.phase_comp_rad)?;
            let (sic, _) = choose_settings(&session, &prepared, args)?;
            let out = session.evaluate(&prepared, &sic)?.bpd_out_with_sic;
            (welch_psd(&out, rbw)?, "frequency Hz, PSD dBm/Hz into 50 ohm")
        }
    };
    let mut t = Table::new("spectrum", units, output::SPECTRUM_COLUMNS);
    spectrum_rows(&mut t, &prefix(&s.name, s.seed), tap, &est);
    let peak = est.peak_in(f64::MIN, f64::MAX).map(|k| est.freqs[k]).unwrap_or(0.0);
    Ok(Report {
        files: vec![t.write(&cli.out, &format!("{}_spectrum_{tap}.csv", s.name))?],
        summary: format!("{tap}: {} bins, peak at {peak:.1} Hz", est.freqs.len()),
    })
}
