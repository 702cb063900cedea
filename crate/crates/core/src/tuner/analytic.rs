use std::f64::consts::{PI, SQRT_2, TAU};

use super::settings::SicSettings;
use crate::error::{Error, Result};
use crate::link::LinkSession;
use crate::optics::bessel_j;

/// Phase constant of the down-converted SI relative to the reference.
pub const PHASE_CONSTANT: f64 = -5.0 * PI / 4.0;

/// Reference-arm power ratio that equalizes the reference and SI beat
/// amplitudes: `sqrt(2) J0(m2) J0(m3) J1(m2) J1(m3) / (2 J0(m1) J1(m1))`.
pub fn analytic_alpha(m1: f64, m2: f64, m3: f64) -> Result<f64> {
    for (key, m) in [("m1", m1), ("m2", m2), ("m3", m3)] {
        if !(m >= 0.0 && m.is_finite()) {
            return Err(Error::validation(key, "modulation index must be non-negative"));
        }
    }
    let den = 2.0 * bessel_j(0, m1) * bessel_j(1, m1);
    if den == 0.0 {
        return Err(Error::DivisionByZero("J0(m1) J1(m1)"));
    }
    let alpha =
        SQRT_2 * bessel_j(0, m2) * bessel_j(0, m3) * bessel_j(1, m2) * bessel_j(1, m3) / den;
    if alpha > 1.0 {
        return Err(Error::AttenuatorInfeasible(alpha));
    }
    if alpha < 0.0 {
        return Err(Error::AttenuatorInfeasible(alpha));
    }
    Ok(alpha)
}

/// Wraps a delay into `[0, max_delay)` by whole IF periods.
fn wrap_delay(tau: f64, period: f64, max_delay: f64) -> f64 {
    let mut t = tau;
    if t < 0.0 {
        t += (-t / period).ceil() * period;
    }
    if t >= max_delay {
        t -= ((t - max_delay) / period).floor() * period + period;
    }
    t.max(0.0)
}

/// Delay line setting `omega_s tau1 / omega_if - 5 pi / (4 omega_if)`,
/// shifted by whole IF periods into `[0, max_delay)`. The constant phase is
/// absorbed by the delay, which is exact only at the IF carrier.
pub fn analytic_tau2(omega_if: f64, omega_s: f64, tau1: f64, max_delay: f64) -> Result<f64> {
    analytic_tau2_with_phase(omega_if, omega_s, tau1, None, max_delay)
}

/// As [`analytic_tau2`], with an RF phase shift `rf_phase_comp` applied to
/// the received signal. A shift of exactly `-5 pi / 4` leaves
/// `tau2 = omega_s tau1 / omega_if`, matched at every frequency in phase.
pub fn analytic_tau2_with_phase(
    omega_if: f64,
    omega_s: f64,
    tau1: f64,
    rf_phase_comp: Option<f64>,
    max_delay: f64,
) -> Result<f64> {
    if !(omega_if > 0.0 && omega_if.is_finite()) {
        return Err(Error::validation("omega_if", "must be positive"));
    }
    if !(tau1 >= 0.0) {
        return Err(Error::validation("tau1", "must be non-negative"));
    }
    let residual_phase = -PHASE_CONSTANT + rf_phase_comp.unwrap_or(0.0);
    let tau = omega_s * tau1 / omega_if - residual_phase / omega_if;
    if residual_phase == 0.0 && tau < max_delay {
        return Ok(tau);
    }
    Ok(wrap_delay(tau, TAU / omega_if, max_delay))
}

/// Closed-form settings for a prepared scenario. The SI modulation index is
/// read from the simulated received signal; modulator insertion losses that
/// differ between the two detector arms are folded into alpha.
pub fn seed_settings(session: &LinkSession, rf_phase_comp: Option<f64>) -> Result<SicSettings> {
    let s = &session.scenario;
    let m = &s.modulators;
    let base = analytic_alpha(s.m_if(), s.m_lo(), session.m_uplink())?;
    let loss = (m.lo_modulator.field_transmission() * m.uplink_modulator.field_transmission()
        / m.if_modulator.field_transmission())
    .powi(2);
    let alpha = base * loss;
    if alpha > 1.0 {
        return Err(Error::AttenuatorInfeasible(alpha));
    }
    let tau2 = analytic_tau2_with_phase(
        TAU * s.f_if(),
        TAU * s.f_s(),
        s.si_path.delay,
        rf_phase_comp,
        s.max_delay(),
    )?;
    Ok(SicSettings {
        alpha,
        tau2,
        rf_phase_comp,
    })
}
