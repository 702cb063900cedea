use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4};

use super::scenario::{EdfaPosition, LinkScenario};
use crate::error::{Error, Result};
use crate::optics::{
    attenuate, balanced_detect, dd_mzm_ssb, delay_line, dp_bpsk_modulate, fiber_propagate,
    laser_cw, pbc, pbs, photodetect, polarizer, OpticalField, Rail,
};
use crate::signal::{
    delay_waveform, filter_band, phase_shift_waveform, FilterKind, SampledWaveform,
    REFERENCE_OHMS,
};
use crate::tuner::SicSettings;

use super::scenario::SelfInterferencePath;

/// Downlink waveforms and the observation taps along the way.
#[derive(Debug, Clone)]
pub struct DownlinkOutput {
    /// Modulator output before amplification.
    pub dp_bpsk_out: OpticalField,
    /// Field leaving the 45-degree polarizer at the remote unit.
    pub polarizer_out: OpticalField,
    /// Up-converted RF after the band-pass filter, V across 50 ohm.
    pub rf: SampledWaveform,
    /// Splitter branch handed to the uplink.
    pub ru_field: OpticalField,
}

pub fn run_downlink(s: &LinkScenario) -> Result<DownlinkOutput> {
    s.validate()?;
    let laser = laser_cw(s.laser.power_dbm, s.laser.carrier_frequency(), Rail::X, &s.grid)?;
    let dp = dp_bpsk_modulate(
        &laser,
        &s.if_drive()?,
        &s.lo_drive()?,
        &s.modulators.if_modulator,
        &s.modulators.lo_modulator,
    )?;
    let mut field = dp.clone();
    if s.edfa.position == EdfaPosition::CentralOffice {
        field = field.amplified(s.edfa.gain_db);
    }
    field = fiber_propagate(&field, &s.downlink_fiber)?;
    if s.edfa.position == EdfaPosition::RemoteUnit {
        field = field.amplified(s.edfa.gain_db);
    }
    let branch = field.scaled(FRAC_1_SQRT_2);
    let polarized = polarizer(&branch, FRAC_PI_4);
    let current = photodetect(&polarized, s.responsivity);
    let rf = filter_band(
        &current.scaled(REFERENCE_OHMS),
        FilterKind::Bandpass {
            low: s.filters.bpf_low,
            high: s.filters.bpf_high,
        },
    )?;
    Ok(DownlinkOutput {
        dp_bpsk_out: dp,
        polarizer_out: polarized,
        rf,
        ru_field: branch,
    })
}

/// Signal at the receive antenna: the transmitted RF scaled and delayed by
/// the SI path, plus the signal of interest.
pub fn make_received_signal(
    rf: &SampledWaveform,
    si: &SelfInterferencePath,
    soi: Option<&SampledWaveform>,
) -> Result<SampledWaveform> {
    let max = rf.grid.duration() / 4.0;
    if !(si.delay >= 0.0 && si.delay < max) {
        return Err(Error::DelayRange {
            delay: si.delay,
            max,
        });
    }
    let mut out = if si.gain_db == f64::NEG_INFINITY {
        SampledWaveform::zeros(rf.grid)
    } else {
        let mut d = delay_waveform(rf, si.delay).scaled(10f64.powf(si.gain_db / 20.0));
        d.samples.iter_mut().for_each(|v| v.im = 0.0);
        d
    };
    if let Some(soi) = soi {
        out = out.add(soi)?;
    }
    Ok(out)
}

/// Uplink optics up to the central-office PBS: the unmodulated X rail and
/// the Y rail re-modulated by `received`, each after the uplink fiber.
pub fn uplink_fields(
    ru_field: &OpticalField,
    received: &SampledWaveform,
    s: &LinkScenario,
    rf_phase_comp: Option<f64>,
) -> Result<(OpticalField, OpticalField)> {
    let (x, y) = pbs(ru_field);
    let drive = match rf_phase_comp {
        Some(p) => phase_shift_waveform(received, p),
        None => received.clone(),
    };
    let y_mod = dd_mzm_ssb(&y, &drive, &s.modulators.uplink_modulator)?;
    let combined = pbc(&x, &y_mod)?;
    let back = fiber_propagate(&combined, &s.uplink_fiber)?;
    Ok(pbs(&back))
}

/// The Y-rail field after the uplink modulator, before the fiber.
pub fn ru_y_modulated(
    ru_field: &OpticalField,
    received: &SampledWaveform,
    s: &LinkScenario,
    rf_phase_comp: Option<f64>,
) -> Result<OpticalField> {
    let (_, y) = pbs(ru_field);
    let drive = match rf_phase_comp {
        Some(p) => phase_shift_waveform(received, p),
        None => received.clone(),
    };
    dd_mzm_ssb(&y, &drive, &s.modulators.uplink_modulator)
}

pub(crate) fn lowpass(s: &LinkScenario, current: &SampledWaveform) -> Result<SampledWaveform> {
    filter_band(
        &current.scaled(REFERENCE_OHMS),
        FilterKind::Lowpass {
            edge: s.filters.lpf,
        },
    )
}

/// Reference arm after the attenuator and delay line.
pub(crate) fn reference_arm(x_co: &OpticalField, sic: &SicSettings) -> Result<OpticalField> {
    delay_line(&attenuate(x_co, sic.alpha)?, sic.tau2)
}

/// Balanced detection at the central office, returning `(with_sic,
/// without_sic)` in volts after the low-pass filter. Without SIC the
/// reference arm is dark.
pub fn run_uplink(
    ru_field: &OpticalField,
    received: &SampledWaveform,
    s: &LinkScenario,
    sic: &SicSettings,
) -> Result<(SampledWaveform, SampledWaveform)> {
    sic.validate(&s.grid)?;
    let (x_co, y_co) = uplink_fields(ru_field, received, s, sic.rf_phase_comp)?;
    let reference = reference_arm(&x_co, sic)?;
    let with_sic = lowpass(s, &balanced_detect(&reference, &y_co, s.responsivity)?)?;
    let dark = OpticalField::dark(s.grid, y_co.carrier_frequency);
    let without_sic = lowpass(s, &balanced_detect(&dark, &y_co, s.responsivity)?)?;
    Ok((with_sic, without_sic))
}
