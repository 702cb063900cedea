//! Scenario files: TOML documents whose keys carry their units
//! (`frequency_ghz`, `delay_ns`, ...). Only `[grid]` and `[detector]` may
//! be omitted; everything else is explicit.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::link::{
    EdfaParams, EdfaPosition, FilterPlan, IfSignal, LaserParams, LinkScenario, ModulatorSet,
    SelfInterferencePath, SoiSignal, SoiSpec, ToneDrive,
};
use crate::optics::{FiberParams, ModulatorParams, Sideband, DEFAULT_RESPONSIVITY};
use crate::signal::{QamSignalSpec, TimeGrid};

const GHZ: f64 = 1e9;
const MBAUD: f64 = 1e6;
const NS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSection>,
    pub laser: LaserSection,
    pub if_signal: IfSection,
    pub lo_signal: LoSection,
    pub modulators: ModulatorSection,
    pub downlink_fiber: FiberSection,
    pub uplink_fiber: FiberSection,
    pub edfa: EdfaSection,
    pub self_interference: SiSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub soi: Option<SoiSection>,
    pub filters: FilterSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detector: Option<DetectorSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub sample_rate_gsps: f64,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LaserSection {
    pub power_dbm: f64,
    pub wavelength_nm: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SignalKind {
    Tone,
    Qam,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IfSection {
    pub kind: SignalKind,
    pub frequency_ghz: f64,
    pub power_dbm: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub symbol_rate_mbaud: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rolloff: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoSection {
    pub frequency_ghz: f64,
    pub power_dbm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModulatorSection {
    pub if_vpi_v: f64,
    pub if_insertion_loss_db: f64,
    pub lo_vpi_v: f64,
    pub lo_insertion_loss_db: f64,
    pub uplink_vpi_v: f64,
    pub uplink_insertion_loss_db: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiberSection {
    pub length_km: f64,
    pub dispersion_ps_nm_km: f64,
    pub attenuation_db_km: f64,
    pub reference_wavelength_nm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdfaSection {
    pub gain_db: f64,
    pub position: EdfaPosition,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SiSection {
    /// `-inf` disables the path.
    pub gain_db: f64,
    pub delay_ns: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SoiSection {
    pub kind: SignalKind,
    pub power_dbm: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phase_rad: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub symbol_rate_mbaud: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rolloff: Option<f64>,
    pub arrival_delay_ns: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FilterSection {
    pub bpf_low_ghz: f64,
    pub bpf_high_ghz: f64,
    pub lpf_ghz: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectorSection {
    pub responsivity_a_per_w: f64,
}

fn fiber(f: &FiberSection) -> FiberParams {
    FiberParams {
        length: f.length_km,
        dispersion: f.dispersion_ps_nm_km,
        attenuation: f.attenuation_db_km,
        reference_wavelength: f.reference_wavelength_nm,
    }
}

fn fiber_section(f: &FiberParams) -> FiberSection {
    FiberSection {
        length_km: f.length,
        dispersion_ps_nm_km: f.dispersion,
        attenuation_db_km: f.attenuation,
        reference_wavelength_nm: f.reference_wavelength,
    }
}

fn require(v: Option<f64>, key: &str) -> Result<f64> {
    v.ok_or_else(|| Error::validation(key, "required for kind = \"qam\""))
}

fn forbid(v: Option<f64>, key: &str) -> Result<()> {
    match v {
        Some(_) => Err(Error::validation(key, "only allowed for kind = \"qam\"")),
        None => Ok(()),
    }
}

impl ScenarioFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| {
            let (line, column) = match e.span() {
                Some(span) => line_column(text, span.start),
                None => (0, 0),
            };
            Error::Parse {
                line,
                column,
                message: e.message().to_string(),
            }
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario files always serialize")
    }

    pub fn to_link(&self) -> Result<LinkScenario> {
        let grid = match &self.grid {
            Some(g) => TimeGrid::new(g.sample_rate_gsps * GHZ, g.samples).map_err(|e| match e {
                Error::Grid(reason) => Error::validation("grid", reason),
                other => other,
            })?,
            None => TimeGrid::new(TimeGrid::DEFAULT_SAMPLE_RATE, TimeGrid::DEFAULT_SAMPLES)?,
        };
        let i = &self.if_signal;
        let if_signal = match i.kind {
            SignalKind::Tone => {
                forbid(i.symbol_rate_mbaud, "if_signal.symbol_rate_mbaud")?;
                forbid(i.rolloff, "if_signal.rolloff")?;
                IfSignal::Tone(ToneDrive {
                    frequency: i.frequency_ghz * GHZ,
                    power_dbm: i.power_dbm,
                })
            }
            SignalKind::Qam => IfSignal::Qam {
                frequency: i.frequency_ghz * GHZ,
                power_dbm: i.power_dbm,
                symbol_rate: require(i.symbol_rate_mbaud, "if_signal.symbol_rate_mbaud")? * MBAUD,
                rolloff: i.rolloff.unwrap_or(QamSignalSpec::DEFAULT_ROLLOFF),
            },
        };
        let soi = match &self.soi {
            None => None,
            Some(o) => {
                let signal = match o.kind {
                    SignalKind::Tone => {
                        forbid(o.symbol_rate_mbaud, "soi.symbol_rate_mbaud")?;
                        forbid(o.rolloff, "soi.rolloff")?;
                        SoiSignal::Tone {
                            power_dbm: o.power_dbm,
                            phase: o.phase_rad.unwrap_or(0.0),
                        }
                    }
                    SignalKind::Qam => {
                        if o.phase_rad.is_some() {
                            return Err(Error::validation("soi.phase_rad", "only allowed for kind = \"tone\""));
                        }
                        SoiSignal::Qam {
                            power_dbm: o.power_dbm,
                            symbol_rate: require(o.symbol_rate_mbaud, "soi.symbol_rate_mbaud")?
                                * MBAUD,
                            rolloff: o.rolloff.unwrap_or(QamSignalSpec::DEFAULT_ROLLOFF),
                        }
                    }
                };
                Some(SoiSpec {
                    signal,
                    arrival_delay: o.arrival_delay_ns * NS,
                })
            }
        };
        let m = &self.modulators;
        let s = LinkScenario {
            name: self.name.clone(),
            seed: self.seed,
            grid,
            laser: LaserParams {
                power_dbm: self.laser.power_dbm,
                wavelength: self.laser.wavelength_nm,
            },
            if_signal,
            lo_signal: ToneDrive {
                frequency: self.lo_signal.frequency_ghz * GHZ,
                power_dbm: self.lo_signal.power_dbm,
            },
            modulators: ModulatorSet {
                if_modulator: ModulatorParams::new(m.if_vpi_v, m.if_insertion_loss_db, Sideband::Lower),
                lo_modulator: ModulatorParams::new(m.lo_vpi_v, m.lo_insertion_loss_db, Sideband::Upper),
                uplink_modulator: ModulatorParams::new(
                    m.uplink_vpi_v,
                    m.uplink_insertion_loss_db,
                    Sideband::Lower,
                ),
            },
            downlink_fiber: fiber(&self.downlink_fiber),
            uplink_fiber: fiber(&self.uplink_fiber),
            edfa: EdfaParams {
                gain_db: self.edfa.gain_db,
                position: self.edfa.position,
            },
            si_path: SelfInterferencePath {
                gain_db: self.self_interference.gain_db,
                delay: self.self_interference.delay_ns * NS,
            },
            soi,
            filters: FilterPlan {
                bpf_low: self.filters.bpf_low_ghz * GHZ,
                bpf_high: self.filters.bpf_high_ghz * GHZ,
                lpf: self.filters.lpf_ghz * GHZ,
            },
            responsivity: self
                .detector
                .as_ref()
                .map_or(DEFAULT_RESPONSIVITY, |d| d.responsivity_a_per_w),
        };
        s.validate()?;
        Ok(s)
    }

    /// Overwrites a numeric key given as a dotted path, e.g.
    /// `downlink_fiber.length_km`.
    pub fn set_numeric(&mut self, key: &str, value: f64) -> Result<()> {
        let mut doc = toml::Value::try_from(&*self).map_err(|e| Error::Simulation(e.to_string()))?;
        let mut node = &mut doc;
        for part in key.split('.') {
            node = node
                .get_mut(part)
                .ok_or_else(|| Error::Axis(key.to_string()))?;
        }
        *node = match node {
            toml::Value::Float(_) => toml::Value::Float(value),
            toml::Value::Integer(_) => {
                if value.fract() != 0.0 || value < 0.0 {
                    return Err(Error::validation(key, format!("expects a non-negative integer, got {value}")));
                }
                toml::Value::Integer(value as i64)
            }
            _ => return Err(Error::Axis(key.to_string())),
        };
        *self = doc
            .try_into()
            .map_err(|e: toml::de::Error| Error::validation(key, e.message().to_string()))?;
        Ok(())
    }
}

fn line_column(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
    (line, column)
}

pub fn parse_scenario(text: &str) -> Result<LinkScenario> {
    ScenarioFile::parse(text)?.to_link()
}

pub fn read_scenario_file(path: &Path) -> Result<ScenarioFile> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    ScenarioFile::parse(&text)
}

pub fn load_scenario(path: &Path) -> Result<LinkScenario> {
    read_scenario_file(path)?.to_link()
}

pub fn save_scenario(path: &Path, file: &ScenarioFile) -> Result<()> {
    std::fs::write(path, file.to_toml()).map_err(|e| Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

impl From<&LinkScenario> for ScenarioFile {
    fn from(s: &LinkScenario) -> Self {
        let (if_kind, symbol_rate, rolloff) = match s.if_signal {
            IfSignal::Tone(_) => (SignalKind::Tone, None, None),
            IfSignal::Qam {
                symbol_rate,
                rolloff,
                ..
            } => (SignalKind::Qam, Some(symbol_rate / MBAUD), Some(rolloff)),
        };
        let soi = s.soi.map(|o| match o.signal {
            SoiSignal::Tone { power_dbm, phase } => SoiSection {
                kind: SignalKind::Tone,
                power_dbm,
                phase_rad: Some(phase),
                symbol_rate_mbaud: None,
                rolloff: None,
                arrival_delay_ns: o.arrival_delay / NS,
            },
            SoiSignal::Qam {
                power_dbm,
                symbol_rate,
                rolloff,
            } => SoiSection {
                kind: SignalKind::Qam,
                power_dbm,
                phase_rad: None,
                symbol_rate_mbaud: Some(symbol_rate / MBAUD),
                rolloff: Some(rolloff),
                arrival_delay_ns: o.arrival_delay / NS,
            },
        });
        let m = &s.modulators;
        ScenarioFile {
            name: s.name.clone(),
            description: String::new(),
            seed: s.seed,
            grid: Some(GridSection {
                sample_rate_gsps: s.grid.sample_rate / GHZ,
                samples: s.grid.n_samples,
            }),
            laser: LaserSection {
                power_dbm: s.laser.power_dbm,
                wavelength_nm: s.laser.wavelength,
            },
            if_signal: IfSection {
                kind: if_kind,
                frequency_ghz: s.if_signal.frequency() / GHZ,
                power_dbm: s.if_signal.power_dbm(),
                symbol_rate_mbaud: symbol_rate,
                rolloff,
            },
            lo_signal: LoSection {
                frequency_ghz: s.lo_signal.frequency / GHZ,
                power_dbm: s.lo_signal.power_dbm,
            },
            modulators: ModulatorSection {
                if_vpi_v: m.if_modulator.v_pi,
                if_insertion_loss_db: m.if_modulator.insertion_loss,
                lo_vpi_v: m.lo_modulator.v_pi,
                lo_insertion_loss_db: m.lo_modulator.insertion_loss,
                uplink_vpi_v: m.uplink_modulator.v_pi,
                uplink_insertion_loss_db: m.uplink_modulator.insertion_loss,
            },
            downlink_fiber: fiber_section(&s.downlink_fiber),
            uplink_fiber: fiber_section(&s.uplink_fiber),
            edfa: EdfaSection {
                gain_db: s.edfa.gain_db,
                position: s.edfa.position,
            },
            self_interference: SiSection {
                gain_db: s.si_path.gain_db,
                delay_ns: s.si_path.delay / NS,
            },
            soi,
            filters: FilterSection {
                bpf_low_ghz: s.filters.bpf_low / GHZ,
                bpf_high_ghz: s.filters.bpf_high / GHZ,
                lpf_ghz: s.filters.lpf / GHZ,
            },
            detector: Some(DetectorSection {
                responsivity_a_per_w: s.responsivity,
            }),
        }
    }
}

macro_rules! bundled {
    ($($name:literal),* $(,)?) => {
        /// Scenario files shipped with the crate, as (name, TOML text).
        pub const BUNDLED: &[(&str, &str)] = &[
            $(($name, include_str!(concat!("../scenarios/", $name, ".scenario")))),*
        ];
    };
}

bundled!(
    "fig5a", "fig5b", "fig6a", "fig6b", "fig6c", "fig6d", "fig7a", "fig7b", "fig7c", "fig7d",
    "fig8a", "fig8b", "fig8c", "fig8d",
);

pub fn bundled_file(name: &str) -> Result<ScenarioFile> {
    let (_, text) = BUNDLED
        .iter()
        .find(|(n, _)| *n == name)
        .ok_or_else(|| Error::validation("scenario", format!("no bundled scenario named `{name}`")))?;
    ScenarioFile::parse(text)
}

pub fn bundled(name: &str) -> Result<LinkScenario> {
    bundled_file(name)?.to_link()
}
