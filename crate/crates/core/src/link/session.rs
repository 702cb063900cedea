//! End-to-end execution with the expensive parts cached: the downlink and
//! the received signals are computed once per scenario, the uplink optics
//! once per RF phase setting, and each canceller setting then costs one
//! reference-arm pass plus spectral estimation.

use std::f64::consts::TAU;

use num_complex::Complex64;

use super::chain::{lowpass, make_received_signal, reference_arm, run_downlink, uplink_fields, DownlinkOutput};
use super::scenario::{IfSignal, LinkScenario, SoiSignal};
use crate::error::{Error, Result};
use crate::optics::{photodetect, OpticalField};
use crate::signal::{
    analysis_rbw, band_power, demodulate_evm, fft, occupied_band, welch_psd, SampledWaveform,
    SpectrumEstimate,
};
use crate::tuner::SicSettings;

/// Scalar outcome of one link run. Powers are dBm into 50 ohm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkMetrics {
    /// SI band power without SIC minus with SIC, SI-only runs.
    pub depth_db: f64,
    pub si_band: (f64, f64),
    pub si_without_dbm: f64,
    pub residual_si_dbm: f64,
    pub soi: Option<SoiMetrics>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SoiMetrics {
    pub soi_band: (f64, f64),
    /// SOI alone through the uplink (SI off, reference arm dark).
    pub soi_power_dbm: f64,
    /// SI power falling in the SOI band, without and with SIC.
    pub si_in_soi_band_without_dbm: f64,
    pub si_in_soi_band_with_dbm: f64,
    /// SOI band power of the complete with-SIC output (SI and SOI present).
    pub soi_band_with_sic_dbm: f64,
    pub evm_percent: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct LinkResult {
    pub downlink_rf: SampledWaveform,
    /// SI plus SOI, after the low-pass filter.
    pub bpd_out_with_sic: SampledWaveform,
    pub bpd_out_without_sic: SampledWaveform,
    pub metrics: LinkMetrics,
}

pub struct LinkSession {
    pub scenario: LinkScenario,
    pub downlink: DownlinkOutput,
    /// SI only.
    pub received_si: SampledWaveform,
    pub soi: Option<SampledWaveform>,
    /// SI plus SOI.
    pub received: SampledWaveform,
    pub rbw: f64,
}

/// Uplink state for one RF phase setting.
pub struct PreparedUplink {
    pub rf_phase_comp: Option<f64>,
    pub x_co: OpticalField,
    /// Low-passed Y-rail photovoltages for the SI-only and full received
    /// signals.
    y_si: SampledWaveform,
    y_full: SampledWaveform,
    pub si_band: (f64, f64),
    pub si_without_dbm: f64,
    soi_fixed: Option<(f64, f64, f64, f64)>,
}

fn band_of(s: &SpectrumEstimate, center: f64, qam_half: Option<f64>, rbw: f64) -> Result<(f64, f64)> {
    match qam_half {
        None => Ok((center - 3.0 * rbw, center + 3.0 * rbw)),
        Some(half) => {
            let (lo, hi) = occupied_band(s, center, half, 0.99)?;
            Ok((lo.max(center - half), hi.min(center + half)))
        }
    }
}

impl LinkSession {
    pub fn new(s: &LinkScenario) -> Result<Self> {
        let downlink = run_downlink(s)?;
        let received_si = make_received_signal(&downlink.rf, &s.si_path, None)?;
        let soi = s.soi_waveform()?;
        let received = match &soi {
            Some(w) => received_si.add(w)?,
            None => received_si.clone(),
        };
        Ok(Self {
            scenario: s.clone(),
            rbw: analysis_rbw(&s.grid),
            downlink,
            received_si,
            soi,
            received,
        })
    }

    /// Peak-equivalent amplitude of the SI at the uplink modulator, V.
    pub fn si_amplitude(&self) -> f64 {
        self.received_si.equivalent_amplitude()
    }

    /// Uplink modulation index produced by the SI.
    pub fn m_uplink(&self) -> f64 {
        self.scenario
            .modulators
            .uplink_modulator
            .modulation_index(self.si_amplitude())
    }

    fn y_voltage(&self, y_co: &OpticalField) -> Result<SampledWaveform> {
        lowpass(&self.scenario, &photodetect(y_co, self.scenario.responsivity))
    }

    pub fn prepare(&self, rf_phase_comp: Option<f64>) -> Result<PreparedUplink> {
        let s = &self.scenario;
        let ru = &self.downlink.ru_field;
        let (x_co, y_co_si) = uplink_fields(ru, &self.received_si, s, rf_phase_comp)?;
        let y_si = self.y_voltage(&y_co_si)?;
        drop(y_co_si);
        let (y_soi, y_full) = match &self.soi {
            Some(soi) => {
                let (_, y_soi) = uplink_fields(ru, soi, s, rf_phase_comp)?;
                let (_, y_full) = uplink_fields(ru, &self.received, s, rf_phase_comp)?;
                (Some(self.y_voltage(&y_soi)?), self.y_voltage(&y_full)?)
            }
            None => (None, y_si.clone()),
        };

        let without = welch_psd(&y_si, self.rbw)?;
        let qam_half = match s.if_signal {
            IfSignal::Tone(_) => None,
            IfSignal::Qam { .. } => Some(s.if_half_bandwidth()),
        };
        let si_band = band_of(&without, s.f_if(), qam_half, self.rbw)?;
        let si_without_dbm = band_power(&without, si_band.0, si_band.1)?;

        let soi_fixed = match (&y_soi, s.soi) {
            (Some(y), Some(spec)) => {
                let soi_spec = welch_psd(y, self.rbw)?;
                let half = match spec.signal {
                    SoiSignal::Tone { .. } => None,
                    SoiSignal::Qam {
                        symbol_rate,
                        rolloff,
                        ..
                    } => Some((1.0 + rolloff) * symbol_rate / 2.0),
                };
                let band = band_of(&soi_spec, s.f_if(), half, self.rbw)?;
                Some((
                    band.0,
                    band.1,
                    band_power(&soi_spec, band.0, band.1)?,
                    band_power(&without, band.0, band.1)?,
                ))
            }
            _ => None,
        };

        Ok(PreparedUplink {
            rf_phase_comp,
            x_co,
            y_si,
            y_full,
            si_band,
            si_without_dbm,
            soi_fixed,
        })
    }

    fn reference_voltage(&self, p: &PreparedUplink, sic: &SicSettings) -> Result<SampledWaveform> {
        if sic.rf_phase_comp != p.rf_phase_comp {
            return Err(Error::Simulation(
                "settings carry a different RF phase than the prepared uplink".into(),
            ));
        }
        sic.validate(&self.scenario.grid)?;
        let reference = reference_arm(&p.x_co, sic)?;
        lowpass(&self.scenario, &photodetect(&reference, self.scenario.responsivity))
    }

    /// With-SIC output of the SI-only run.
    pub fn si_only_with_sic(&self, p: &PreparedUplink, sic: &SicSettings) -> Result<SampledWaveform> {
        self.reference_voltage(p, sic)?.sub(&p.y_si)
    }

    /// SI band suppression for one setting, without the SOI bookkeeping.
    pub fn depth(&self, p: &PreparedUplink, sic: &SicSettings) -> Result<f64> {
        let with = self.si_only_with_sic(p, sic)?;
        let residual = band_power(&welch_psd(&with, self.rbw)?, p.si_band.0, p.si_band.1)?;
        let depth = p.si_without_dbm - residual;
        if !depth.is_finite() {
            return Err(Error::Simulation("cancellation depth is not finite".into()));
        }
        Ok(depth)
    }

    pub fn evaluate(&self, p: &PreparedUplink, sic: &SicSettings) -> Result<LinkResult> {
        let s = &self.scenario;
        let reference = self.reference_voltage(p, sic)?;
        let with_si = reference.sub(&p.y_si)?;
        let with_spec = welch_psd(&with_si, self.rbw)?;
        let residual_si_dbm = band_power(&with_spec, p.si_band.0, p.si_band.1)?;
        let depth_db = p.si_without_dbm - residual_si_dbm;
        if !depth_db.is_finite() {
            return Err(Error::Simulation("cancellation depth is not finite".into()));
        }

        let with_full = reference.sub(&p.y_full)?;
        let without_full = p.y_full.scaled(-1.0);

        let soi = match p.soi_fixed {
            Some((lo, hi, soi_power_dbm, si_without)) => {
                let full_spec = welch_psd(&with_full, self.rbw)?;
                let evm_percent = match s.soi_qam_spec() {
                    Some(mut q) => {
                        q.center_frequency = s.f_if();
                        Some(demodulate_evm(&with_full, &q)?)
                    }
                    None => None,
                };
                Some(SoiMetrics {
                    soi_band: (lo, hi),
                    soi_power_dbm,
                    si_in_soi_band_without_dbm: si_without,
                    si_in_soi_band_with_dbm: band_power(&with_spec, lo, hi)?,
                    soi_band_with_sic_dbm: band_power(&full_spec, lo, hi)?,
                    evm_percent,
                })
            }
            None => None,
        };

        Ok(LinkResult {
            downlink_rf: self.downlink.rf.clone(),
            bpd_out_with_sic: with_full,
            bpd_out_without_sic: without_full,
            metrics: LinkMetrics {
                depth_db,
                si_band: p.si_band,
                si_without_dbm: p.si_without_dbm,
                residual_si_dbm,
                soi,
            },
        })
    }

    /// Frequency-domain surrogate of the SI-band residual for fast searches.
    pub fn probe(&self, p: &PreparedUplink) -> Result<ResidualProbe> {
        let ix = self.reference_voltage(
            p,
            &SicSettings {
                alpha: 1.0,
                tau2: 0.0,
                rf_phase_comp: p.rf_phase_comp,
            },
        )?;
        let sx = fft::forward(&ix.samples);
        let sy = fft::forward(&p.y_si.samples);
        let df = self.scenario.grid.bin_spacing();
        let k_lo = ((p.si_band.0 / df).ceil() as usize).max(2) - 1;
        let k_hi = (p.si_band.1 / df).floor() as usize + 1;
        let bins = (k_lo..=k_hi)
            .map(|k| (k as f64 * df, sx[k], sy[k]))
            .collect();
        Ok(ResidualProbe::new(bins))
    }
}

/// SI-band residual `alpha * I_X(f) exp(-j 2 pi f tau2) - I_Y(f)` of the
/// cached uplink photocurrents, Hann-windowed in the frequency domain. Its
/// power tracks the band power seen by the spectrum estimate.
#[derive(Debug, Clone)]
pub struct ResidualProbe {
    /// (frequency, reference bin, uplink bin), one guard bin at each end.
    bins: Vec<(f64, Complex64, Complex64)>,
    reference_power: f64,
}

impl ResidualProbe {
    fn new(bins: Vec<(f64, Complex64, Complex64)>) -> Self {
        let mut p = Self {
            bins,
            reference_power: 1.0,
        };
        p.reference_power = p.windowed_power(|b| -b.2);
        p
    }

    fn windowed_power(&self, r: impl Fn(&(f64, Complex64, Complex64)) -> Complex64) -> f64 {
        let v: Vec<Complex64> = self.bins.iter().map(r).collect();
        v.windows(3)
            .map(|w| (w[1] * 0.5 - (w[0] + w[2]) * 0.25).norm_sqr())
            .sum()
    }

    /// Residual power in dB relative to the SIC-off level.
    pub fn residual_db(&self, alpha: f64, tau2: f64) -> f64 {
        let p = self.windowed_power(|&(f, x, y)| {
            x * Complex64::from_polar(alpha, -TAU * (f * tau2).fract()) - y
        });
        10.0 * (p / self.reference_power).log10()
    }

    /// Predicted cancellation depth.
    pub fn depth_db(&self, alpha: f64, tau2: f64) -> f64 {
        -self.residual_db(alpha, tau2)
    }
}

pub fn run_full(s: &LinkScenario, sic: &SicSettings) -> Result<LinkResult> {
    let session = LinkSession::new(s)?;
    let prepared = session.prepare(sic.rf_phase_comp)?;
    session.evaluate(&prepared, sic)
}
