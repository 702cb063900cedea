
use crate::error::{Error, Result};
use crate::optics::{wavelength_to_frequency, FiberParams, ModulatorParams, Sideband};
use crate::signal::{
    dbm_to_peak_volts, delay_waveform, make_qam, make_tone, QamSignalSpec, SampledWaveform,
    TimeGrid, ToneSpec,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaserParams {
    pub power_dbm: f64,
    /// nm.
    pub wavelength: f64,
}

impl LaserParams {
    pub fn carrier_frequency(&self) -> f64 {
        wavelength_to_frequency(self.wavelength)
    }
}

/// A sinusoidal drive given by frequency (Hz) and power (dBm into 50 ohm).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToneDrive {
    pub frequency: f64,
    pub power_dbm: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IfSignal {
    Tone(ToneDrive),
    Qam {
        frequency: f64,
        power_dbm: f64,
        symbol_rate: f64,
        rolloff: f64,
    },
}

impl IfSignal {
    pub fn frequency(&self) -> f64 {
        match *self {
            IfSignal::Tone(t) => t.frequency,
            IfSignal::Qam { frequency, .. } => frequency,
        }
    }

    pub fn power_dbm(&self) -> f64 {
        match *self {
            IfSignal::Tone(t) => t.power_dbm,
            IfSignal::Qam { power_dbm, .. } => power_dbm,
        }
    }

    pub fn is_tone(&self) -> bool {
        matches!(self, IfSignal::Tone(_))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModulatorSet {
    pub if_modulator: ModulatorParams,
    pub lo_modulator: ModulatorParams,
    pub uplink_modulator: ModulatorParams,
}

impl ModulatorSet {
    /// Sidebands fixed by the architecture: IF lower, LO upper, uplink lower.
    pub fn new(if_vpi: f64, lo_vpi: f64, uplink_vpi: f64, insertion_loss: f64) -> Self {
        Self {
            if_modulator: ModulatorParams::new(if_vpi, insertion_loss, Sideband::Lower),
            lo_modulator: ModulatorParams::new(lo_vpi, insertion_loss, Sideband::Upper),
            uplink_modulator: ModulatorParams::new(uplink_vpi, insertion_loss, Sideband::Lower),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdfaPosition {
    /// After the modulator, before the downlink fiber.
    CentralOffice,
    /// After the downlink fiber, before the remote-unit splitter.
    RemoteUnit,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdfaParams {
    pub gain_db: f64,
    pub position: EdfaPosition,
}

/// Over-the-air leakage from the transmit to the receive antenna.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelfInterferencePath {
    /// dB; `-inf` switches the path off.
    pub gain_db: f64,
    /// Seconds.
    pub delay: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SoiSignal {
    Tone { power_dbm: f64, phase: f64 },
    Qam {
        power_dbm: f64,
        symbol_rate: f64,
        rolloff: f64,
    },
}

/// Uplink signal of interest, always at the air-interface frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SoiSpec {
    pub signal: SoiSignal,
    /// Seconds.
    pub arrival_delay: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterPlan {
    /// Downlink RF band-pass edges, Hz.
    pub bpf_low: f64,
    pub bpf_high: f64,
    /// Uplink IF low-pass edge, Hz.
    pub lpf: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinkScenario {
    pub name: String,
    pub seed: u64,
    pub grid: TimeGrid,
    pub laser: LaserParams,
    pub if_signal: IfSignal,
    pub lo_signal: ToneDrive,
    pub modulators: ModulatorSet,
    pub downlink_fiber: FiberParams,
    pub uplink_fiber: FiberParams,
    pub edfa: EdfaParams,
    pub si_path: SelfInterferencePath,
    pub soi: Option<SoiSpec>,
    pub filters: FilterPlan,
    /// A/W.
    pub responsivity: f64,
}

fn invalid(key: &str, reason: impl Into<String>) -> Error {
    Error::validation(key, reason)
}

fn check_positive(key: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(key, format!("must be positive, got {v}")))
    }
}

fn check_finite(key: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(invalid(key, format!("must be finite, got {v}")))
    }
}

impl LinkScenario {
    /// IF carrier as realized on the record (nearest DFT bin).
    pub fn f_if(&self) -> f64 {
        self.grid.snap_frequency(self.if_signal.frequency())
    }

    pub fn f_lo(&self) -> f64 {
        self.grid.snap_frequency(self.lo_signal.frequency)
    }

    /// Air-interface frequency of the SI and the SOI.
    pub fn f_s(&self) -> f64 {
        self.f_if() + self.f_lo()
    }

    /// Half of the IF signal's nominal bandwidth (zero for a tone).
    pub fn if_half_bandwidth(&self) -> f64 {
        match self.if_signal {
            IfSignal::Tone(_) => 0.0,
            IfSignal::Qam {
                symbol_rate,
                rolloff,
                ..
            } => (1.0 + rolloff) * symbol_rate / 2.0,
        }
    }

    pub fn if_qam_spec(&self) -> Option<QamSignalSpec> {
        match self.if_signal {
            IfSignal::Tone(_) => None,
            IfSignal::Qam {
                power_dbm,
                symbol_rate,
                rolloff,
                ..
            } => Some(QamSignalSpec {
                order: 16,
                symbol_rate,
                center_frequency: self.f_if(),
                power_dbm,
                rolloff,
                seed: self.seed,
            }),
        }
    }

    /// The SOI's QAM parameters at the air interface, if it is a QAM signal.
    pub fn soi_qam_spec(&self) -> Option<QamSignalSpec> {
        match self.soi?.signal {
            SoiSignal::Tone { .. } => None,
            SoiSignal::Qam {
                power_dbm,
                symbol_rate,
                rolloff,
            } => Some(QamSignalSpec {
                order: 16,
                symbol_rate,
                center_frequency: self.f_s(),
                power_dbm,
                rolloff,
                seed: self.seed.wrapping_add(1),
            }),
        }
    }

    pub fn if_drive(&self) -> Result<SampledWaveform> {
        match self.if_signal {
            IfSignal::Tone(t) => make_tone(
                &ToneSpec::new(dbm_to_peak_volts(t.power_dbm), self.f_if(), 0.0),
                &self.grid,
            ),
            IfSignal::Qam { .. } => make_qam(&self.if_qam_spec().expect("qam"), &self.grid),
        }
    }

    pub fn lo_drive(&self) -> Result<SampledWaveform> {
        make_tone(
            &ToneSpec::new(dbm_to_peak_volts(self.lo_signal.power_dbm), self.f_lo(), 0.0),
            &self.grid,
        )
    }

    /// The SOI as it reaches the receive antenna.
    pub fn soi_waveform(&self) -> Result<Option<SampledWaveform>> {
        let Some(soi) = self.soi else {
            return Ok(None);
        };
        let w = match soi.signal {
            SoiSignal::Tone { power_dbm, phase } => make_tone(
                &ToneSpec::new(dbm_to_peak_volts(power_dbm), self.f_s(), phase),
                &self.grid,
            )?,
            SoiSignal::Qam { .. } => make_qam(&self.soi_qam_spec().expect("qam"), &self.grid)?,
        };
        Ok(Some(delay_waveform(&w, soi.arrival_delay)))
    }

    /// Modulation index of the IF modulator (peak-equivalent amplitude for QAM).
    pub fn m_if(&self) -> f64 {
        self.modulators
            .if_modulator
            .modulation_index(dbm_to_peak_volts(self.if_signal.power_dbm()))
    }

    pub fn m_lo(&self) -> f64 {
        self.modulators
            .lo_modulator
            .modulation_index(dbm_to_peak_volts(self.lo_signal.power_dbm))
    }

    pub fn max_delay(&self) -> f64 {
        self.grid.duration() / 4.0
    }

    pub fn validate(&self) -> Result<()> {
        let nyq = self.grid.nyquist();
        check_finite("laser.power_dbm", self.laser.power_dbm)?;
        check_positive("laser.wavelength_nm", self.laser.wavelength)?;

        let f_if = self.if_signal.frequency();
        check_positive("if_signal.frequency_ghz", f_if)?;
        check_finite("if_signal.power_dbm", self.if_signal.power_dbm())?;
        if let IfSignal::Qam {
            symbol_rate,
            rolloff,
            ..
        } = self.if_signal
        {
            check_positive("if_signal.symbol_rate_mbaud", symbol_rate)?;
            if !(rolloff > 0.0 && rolloff <= 1.0) {
                return Err(invalid("if_signal.rolloff", "must lie in (0, 1]"));
            }
            if self.if_half_bandwidth() >= f_if {
                return Err(invalid(
                    "if_signal.symbol_rate_mbaud",
                    "signal band reaches DC",
                ));
            }
        }
        check_positive("lo_signal.frequency_ghz", self.lo_signal.frequency)?;
        check_finite("lo_signal.power_dbm", self.lo_signal.power_dbm)?;

        if self.f_s() + self.if_half_bandwidth() >= nyq {
            return Err(invalid(
                "lo_signal.frequency_ghz",
                format!("RF frequency {} Hz is not below Nyquist {nyq} Hz", self.f_s()),
            ));
        }

        for (key, m) in [
            ("modulators.if", &self.modulators.if_modulator),
            ("modulators.lo", &self.modulators.lo_modulator),
            ("modulators.uplink", &self.modulators.uplink_modulator),
        ] {
            m.validate().map_err(|e| match e {
                Error::Validation { key: k, reason } => {
                    let field = if k == "v_pi" { "vpi_v" } else { "insertion_loss_db" };
                    invalid(&format!("{key}_{field}"), reason)
                }
                other => other,
            })?;
        }
        if self.modulators.if_modulator.sideband != Sideband::Lower
            || self.modulators.lo_modulator.sideband != Sideband::Upper
            || self.modulators.uplink_modulator.sideband != Sideband::Lower
        {
            return Err(invalid("modulators", "sidebands must be IF lower, LO upper, uplink lower"));
        }

        for (key, f) in [
            ("downlink_fiber", &self.downlink_fiber),
            ("uplink_fiber", &self.uplink_fiber),
        ] {
            f.validate().map_err(|e| match e {
                Error::Validation { key: k, reason } => {
                    let field = match k.as_str() {
                        "length" => "length_km",
                        "dispersion" => "dispersion_ps_nm_km",
                        "attenuation" => "attenuation_db_km",
                        _ => "reference_wavelength_nm",
                    };
                    invalid(&format!("{key}.{field}"), reason)
                }
                other => other,
            })?;
        }

        check_finite("edfa.gain_db", self.edfa.gain_db)?;
        if self.si_path.gain_db.is_nan() || self.si_path.gain_db == f64::INFINITY {
            return Err(invalid("self_interference.gain_db", "must be finite or -inf"));
        }
        if !(self.si_path.delay >= 0.0 && self.si_path.delay < self.max_delay()) {
            return Err(Error::DelayRange {
                delay: self.si_path.delay,
                max: self.max_delay(),
            });
        }
        if let Some(soi) = self.soi {
            let p = match soi.signal {
                SoiSignal::Tone { power_dbm, phase } => {
                    check_finite("soi.phase_rad", phase)?;
                    power_dbm
                }
                SoiSignal::Qam {
                    power_dbm,
                    symbol_rate,
                    rolloff,
                } => {
                    check_positive("soi.symbol_rate_mbaud", symbol_rate)?;
                    if !(rolloff > 0.0 && rolloff <= 1.0) {
                        return Err(invalid("soi.rolloff", "must lie in (0, 1]"));
                    }
                    power_dbm
                }
            };
            check_finite("soi.power_dbm", p)?;
            if !(soi.arrival_delay >= 0.0 && soi.arrival_delay < self.max_delay()) {
                return Err(Error::DelayRange {
                    delay: soi.arrival_delay,
                    max: self.max_delay(),
                });
            }
        }

        let fl = &self.filters;
        check_positive("filters.bpf_low_ghz", fl.bpf_low)?;
        check_positive("filters.lpf_ghz", fl.lpf)?;
        if !(fl.bpf_high > fl.bpf_low && fl.bpf_high < nyq) {
            return Err(invalid("filters.bpf_high_ghz", "must exceed the low edge and stay below Nyquist"));
        }
        if fl.lpf >= nyq {
            return Err(invalid("filters.lpf_ghz", "must stay below Nyquist"));
        }
        let half = self.if_half_bandwidth();
        if self.f_s() - half < fl.bpf_low || self.f_s() + half > fl.bpf_high {
            return Err(invalid(
                "filters.bpf_low_ghz",
                format!("RF band around {} Hz falls outside the band-pass filter", self.f_s()),
            ));
        }
        if self.f_if() + half > fl.lpf {
            return Err(invalid("filters.lpf_ghz", "IF band exceeds the low-pass edge"));
        }
        check_positive("detector.responsivity_a_per_w", self.responsivity)?;
        if let Some(q) = self.if_qam_spec() {
            make_qam_check(&q, &self.grid, "if_signal.symbol_rate_mbaud")?;
        }
        if let Some(q) = self.soi_qam_spec() {
            make_qam_check(&q, &self.grid, "soi.symbol_rate_mbaud")?;
        }
        Ok(())
    }
}

fn make_qam_check(q: &QamSignalSpec, grid: &TimeGrid, key: &str) -> Result<()> {
    let count = q.symbol_count(grid);
    if count < crate::signal::MIN_SYMBOLS {
        return Err(invalid(
            key,
            format!("record holds {count} symbols, need at least {}", crate::signal::MIN_SYMBOLS),
        ));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::bundled;

    fn key_of(s: &LinkScenario) -> String {
        match s.validate() {
            Err(Error::Validation { key, .. }) => key,
            other => panic!("expected a validation error, got {other:?}"),
        }
    }

    #[test]
    fn rf_frequency_is_sum_of_snapped_carriers() {
        let s = bundled("fig6b").unwrap();
        let df = s.grid.bin_spacing();
        assert!((s.f_if() - 2.1e9).abs() <= df / 2.0);
        assert!((s.f_lo() - 5e9).abs() <= df / 2.0);
        assert_eq!(s.f_s(), s.f_if() + s.f_lo());
        assert!((s.f_if() / df).fract() == 0.0);
    }

    #[test]
    fn qam_half_bandwidth() {
        let s = bundled("fig7c").unwrap();
        assert!((s.if_half_bandwidth() - 13.5e6).abs() < 1.0);
        assert_eq!(bundled("fig6a").unwrap().if_half_bandwidth(), 0.0);
        let q = s.if_qam_spec().unwrap();
        assert_eq!(q.center_frequency, s.f_if());
        assert_eq!(q.seed, s.seed);
    }

    #[test]
    fn validation_names_offending_keys() {
        let base = bundled("fig6a").unwrap();
        let mut s = base.clone();
        s.lo_signal.frequency = -1e9;
        assert_eq!(key_of(&s), "lo_signal.frequency_ghz");
        let mut s = base.clone();
        s.modulators.uplink_modulator.v_pi = 0.0;
        assert_eq!(key_of(&s), "modulators.uplink_vpi_v");
        let mut s = base.clone();
        s.downlink_fiber.length = -1.0;
        assert_eq!(key_of(&s), "downlink_fiber.length_km");
        let mut s = base.clone();
        s.filters.lpf = 1e9;
        assert_eq!(key_of(&s), "filters.lpf_ghz");
        let mut s = base.clone();
        s.filters.bpf_low = 7.5e9;
        assert_eq!(key_of(&s), "filters.bpf_low_ghz");
        let mut s = base.clone();
        s.responsivity = 0.0;
        assert_eq!(key_of(&s), "detector.responsivity_a_per_w");
        let mut s = base;
        s.modulators.lo_modulator.sideband = Sideband::Lower;
        assert_eq!(key_of(&s), "modulators");
    }

    #[test]
    fn delays_must_fit_the_record() {
        let mut s = bundled("fig6a").unwrap();
        s.si_path.delay = s.max_delay();
        assert!(matches!(s.validate(), Err(Error::DelayRange { .. })));
        s.si_path.delay = -1e-9;
        assert!(matches!(s.validate(), Err(Error::DelayRange { .. })));
    }

    #[test]
    fn too_few_symbols_rejected() {
        let mut s = bundled("fig7a").unwrap();
        s.grid = TimeGrid::new(64e9, 1 << 14).unwrap();
        assert_eq!(key_of(&s), "if_signal.symbol_rate_mbaud");
    }

    #[test]
    fn soi_tone_sits_at_rf() {
        let mut s = bundled("fig7a").unwrap();
        s.grid = TimeGrid::new(64e9, 1 << 12).unwrap();
        s.if_signal = IfSignal::Tone(ToneDrive {
            frequency: 2e9,
            power_dbm: 6.0,
        });
        let w = s.soi_waveform().unwrap().unwrap();
        assert!((w.power_dbm() + 22.0).abs() < 0.01);
        let spec = crate::signal::fft::forward(&w.samples);
        let k = (s.f_s() / s.grid.bin_spacing()).round() as usize;
        let peak = (0..spec.len() / 2).max_by(|a, b| spec[*a].norm().total_cmp(&spec[*b].norm()));
        assert_eq!(peak, Some(k));
    }
}
