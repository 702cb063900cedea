use std::f64::consts::{PI, TAU};

use super::analytic::seed_settings;
use super::settings::SicSettings;
use crate::error::{Error, Result};
use crate::link::{LinkScenario, LinkSession, PreparedUplink, ResidualProbe};

/// Delay tolerance of the golden-section search, s.
pub const TAU2_TOLERANCE: f64 = 1e-14;
pub const ALPHA_TOLERANCE: f64 = 1e-5;
/// A sweep improving the objective by less than this ends the search, dB.
pub const SWEEP_IMPROVEMENT_DB: f64 = 0.05;
pub const MAX_SWEEPS: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TuneReport {
    pub seed: SicSettings,
    pub refined: SicSettings,
    pub depth_seed: f64,
    pub depth_refined: f64,
    /// Completed search sweeps.
    pub iterations: usize,
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Minimizes a unimodal `f` on `[lo, hi]`; returns the abscissa and value.
pub fn golden_section(mut f: impl FnMut(f64) -> f64, lo: f64, hi: f64, tol: f64) -> (f64, f64) {
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

fn checked(v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Simulation("tuning objective is not finite".into()))
    }
}

/// Alternating golden-section search on the probe objective. Returns the
/// settings and the number of sweeps.
pub fn refine_on_probe(
    probe: &ResidualProbe,
    seed: &SicSettings,
    if_period: f64,
    max_delay: f64,
) -> Result<(SicSettings, usize)> {
    let obj = |a: f64, t: f64| probe.residual_db(a, t);
    let mut cur = *seed;
    let mut cur_obj = checked(obj(cur.alpha, cur.tau2))?;
    let mut sweeps = 0;
    while sweeps < MAX_SWEEPS {
        sweeps += 1;
        let start = cur_obj;

        let (lo, hi) = if cur.alpha > 0.0 {
            (0.5 * cur.alpha, (2.0 * cur.alpha).min(1.0))
        } else {
            (0.0, 1.0)
        };
        let (a, v) = golden_section(|a| obj(a, cur.tau2), lo, hi, ALPHA_TOLERANCE);
        if checked(v)? < cur_obj {
            cur.alpha = a;
            cur_obj = v;
        }

        // The delay response repeats every IF period; search the basins
        // centred one period either side as well and keep the deepest.
        for k in [-1.0, 0.0, 1.0] {
            let centre = cur.tau2 + k * if_period;
            let lo = (centre - 0.5 * if_period).max(0.0);
            let hi = (centre + 0.5 * if_period).min(max_delay * (1.0 - 1e-12));
            if hi - lo < TAU2_TOLERANCE {
                continue;
            }
            let alpha = cur.alpha;
            let (t, v) = golden_section(|t| obj(alpha, t), lo, hi, TAU2_TOLERANCE);
            if checked(v)? < cur_obj {
                cur.tau2 = t;
                cur_obj = v;
            }
        }

        if start - cur_obj < SWEEP_IMPROVEMENT_DB {
            break;
        }
    }
    Ok((cur, sweeps))
}

/// Refines `seed` for an already prepared uplink. Depths are measured on
/// the full chain; a refinement that measures worse than the seed is
/// discarded.
pub fn refine_prepared(
    session: &LinkSession,
    prepared: &PreparedUplink,
    seed: &SicSettings,
) -> Result<TuneReport> {
    let s = &session.scenario;
    seed.validate(&s.grid)?;
    let probe = session.probe(prepared)?;
    let (candidate, iterations) = refine_on_probe(&probe, seed, 1.0 / s.f_if(), s.max_delay())?;
    let depth_seed = checked(session.depth(prepared, seed)?)?;
    let depth_candidate = checked(session.depth(prepared, &candidate)?)?;
    let (refined, depth_refined) = if depth_candidate >= depth_seed {
        (candidate, depth_candidate)
    } else {
        (*seed, depth_seed)
    };
    Ok(TuneReport {
        seed: *seed,
        refined,
        depth_seed,
        depth_refined,
        iterations,
    })
}

pub fn refine(s: &LinkScenario, seed: &SicSettings) -> Result<TuneReport> {
    let session = LinkSession::new(s)?;
    let prepared = session.prepare(seed.rf_phase_comp)?;
    refine_prepared(&session, &prepared, seed)
}

/// Analytic seed followed by refinement.
pub fn auto_tune(session: &LinkSession, prepared: &PreparedUplink) -> Result<TuneReport> {
    let seed = seed_settings(session, prepared.rf_phase_comp)?;
    refine_prepared(session, prepared, &seed)
}

/// Number of delay samples across one IF period in the phase scan.
const PHASE_SCAN_POINTS: usize = 1440;
const MIN_SCAN_SPREAD_DB: f64 = 3.0;

fn wrap_phase(p: f64) -> f64 {
    let w = p - TAU * (p / TAU).round();
    if w <= -PI {
        w + TAU
    } else {
        w
    }
}

/// Scans the delay over one IF period at the analytic alpha, locates the
/// deepest cancellation and returns `wrap(omega_if tau2* - omega_s tau1)`.
pub fn verify_phase_constant(s: &LinkScenario) -> Result<f64> {
    if !s.if_signal.is_tone() {
        return Err(Error::validation("if_signal.kind", "phase verification needs a single tone"));
    }
    let session = LinkSession::new(s)?;
    let prepared = session.prepare(None)?;
    let alpha = seed_settings(&session, None)?.alpha;
    let probe = session.probe(&prepared)?;
    let w_if = TAU * s.f_if();
    let w_s = TAU * s.f_s();
    let period = 1.0 / s.f_if();
    let tau1 = s.si_path.delay;
    let start = w_s * tau1 / w_if;
    let step = period / PHASE_SCAN_POINTS as f64;

    let scan: Vec<f64> = (0..PHASE_SCAN_POINTS)
        .map(|i| probe.residual_db(alpha, start + i as f64 * step))
        .collect();
    let (best, lowest) = scan
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, v)| (i, *v))
        .ok_or(Error::DegenerateScan { spread_db: 0.0 })?;
    let highest = scan.iter().cloned().fold(f64::MIN, f64::max);
    let spread = highest - lowest;
    if !(spread >= MIN_SCAN_SPREAD_DB) {
        return Err(Error::DegenerateScan { spread_db: spread });
    }
    let centre = start + best as f64 * step;
    let (tau2, _) = golden_section(
        |t| probe.residual_db(alpha, t),
        centre - step,
        centre + step,
        TAU2_TOLERANCE,
    );
    Ok(wrap_phase(w_if * tau2 - w_s * tau1))
}
