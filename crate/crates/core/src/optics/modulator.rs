//! Dual-drive Mach-Zehnder modulators biased for single-sideband operation,
//! and the polarization-multiplexed pair built from two of them.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4, PI, SQRT_2};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::field::{OpticalField, Rail};
use crate::error::{Error, Result};
use crate::signal::{fft, SampledWaveform};

/// Which first-order optical sideband a modulator keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sideband {
    Upper,
    Lower,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModulatorParams {
    /// Half-wave voltage referred to the hybrid coupler input, V.
    pub v_pi: f64,
    /// dB.
    pub insertion_loss: f64,
    pub sideband: Sideband,
}

impl ModulatorParams {
    pub fn new(v_pi: f64, insertion_loss: f64, sideband: Sideband) -> Self {
        Self {
            v_pi,
            insertion_loss,
            sideband,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.v_pi > 0.0 && self.v_pi.is_finite()) {
            return Err(Error::validation("v_pi", "must be positive"));
        }
        if !(self.insertion_loss >= 0.0 && self.insertion_loss.is_finite()) {
            return Err(Error::validation("insertion_loss", "must be non-negative"));
        }
        Ok(())
    }

    /// Modulation index `pi * amplitude / v_pi` for a drive of peak `amplitude` volts.
    pub fn modulation_index(&self, amplitude: f64) -> f64 {
        PI * amplitude / self.v_pi
    }

    pub fn field_transmission(&self) -> f64 {
        10f64.powf(-self.insertion_loss / 20.0)
    }
}

/// Bessel function of the first kind of integer order.
pub fn bessel_j(order: i32, x: f64) -> f64 {
    match order {
        0 => libm::j0(x),
        1 => libm::j1(x),
        n => libm::jn(n, x),
    }
}

/// Ideal 90-degree hybrid: both outputs carry half the input power, the
/// second with every positive-frequency component advanced by 90 degrees.
pub fn hybrid_coupler_90(drive: &SampledWaveform) -> Result<(SampledWaveform, SampledWaveform)> {
    if !drive.is_real() {
        return Err(Error::validation("drive", "must be real-valued"));
    }
    let in_phase = drive.scaled(FRAC_1_SQRT_2);
    let mut quad = fft::apply_response(&drive.samples, drive.grid.sample_rate, |f| {
        if f > 0.0 {
            Complex64::new(0.0, FRAC_1_SQRT_2)
        } else if f < 0.0 {
            Complex64::new(0.0, -FRAC_1_SQRT_2)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    quad.iter_mut().for_each(|s| s.im = 0.0);
    Ok((in_phase, SampledWaveform::new(drive.grid, quad)?))
}

/// DD-MZM in SSB configuration. The arms are driven by the hybrid outputs
/// with phases `pi * sqrt(2) * d_i / v_pi`, so a drive of peak `V` gives a
/// peak arm phase `m = pi * V / v_pi`. The sign of the 90-degree bias
/// between the arms selects the sideband.
pub fn dd_mzm_ssb(
    carrier: &OpticalField,
    drive: &SampledWaveform,
    params: &ModulatorParams,
) -> Result<OpticalField> {
    params.validate()?;
    carrier.grid.ensure_same(&drive.grid)?;
    let rail = carrier
        .occupied_rail()
        .ok_or_else(|| Error::validation("carrier", "must occupy a single polarization rail"))?;
    let (d1, d2) = hybrid_coupler_90(drive)?;
    let k = SQRT_2 * PI / params.v_pi;
    let bias = match params.sideband {
        Sideband::Lower => FRAC_PI_2,
        Sideband::Upper => -FRAC_PI_2,
    };
    let t = 0.5 * params.field_transmission();
    let env: Vec<Complex64> = carrier
        .rail(rail)
        .iter()
        .zip(d1.samples.iter().zip(&d2.samples))
        .map(|(c, (a, b))| {
            let arms = Complex64::from_polar(1.0, k * a.re)
                + Complex64::from_polar(1.0, k * b.re + bias);
            c * arms * t
        })
        .collect();
    OpticalField::single_rail(carrier.grid, carrier.carrier_frequency, rail, env)
}

/// Push-pull MZM at quadrature: intensity modulation with both first-order
/// sidebands, field `cos(pi * d / (2 v_pi) + pi / 4)`.
pub fn mzm_push_pull(
    carrier: &OpticalField,
    drive: &SampledWaveform,
    params: &ModulatorParams,
) -> Result<OpticalField> {
    params.validate()?;
    carrier.grid.ensure_same(&drive.grid)?;
    if !drive.is_real() {
        return Err(Error::validation("drive", "must be real-valued"));
    }
    let k = PI / (2.0 * params.v_pi);
    let t = params.field_transmission();
    Ok(carrier.map_rails(|env| {
        env.iter()
            .zip(&drive.samples)
            .map(|(c, d)| c * (k * d.re + FRAC_PI_4).cos() * t)
            .collect()
    }))
}

/// Line amplitudes of a single-tone SSB modulator relative to its input field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SsbCoefficients {
    pub carrier: Complex64,
    pub sideband: Complex64,
}

/// Carrier `(sqrt(2)/2) J0(m) e^{j pi/4}` and retained sideband `J1(m) e^{j pi}`.
pub fn ssb_smallsignal_coefficients(m: f64) -> Result<SsbCoefficients> {
    if !(m >= 0.0 && m.is_finite()) {
        return Err(Error::validation("m", "must be non-negative"));
    }
    Ok(SsbCoefficients {
        carrier: Complex64::from_polar(FRAC_1_SQRT_2 * bessel_j(0, m), FRAC_PI_4),
        sideband: Complex64::from_polar(bessel_j(1, m), PI),
    })
}

/// DP-BPSK modulator: 3 dB split, IF lower-sideband SSB on X, LO
/// upper-sideband SSB on Y, polarization-combined.
pub fn dp_bpsk_modulate(
    carrier: &OpticalField,
    if_drive: &SampledWaveform,
    lo_drive: &SampledWaveform,
    p_if: &ModulatorParams,
    p_lo: &ModulatorParams,
) -> Result<OpticalField> {
    if p_if.sideband != Sideband::Lower {
        return Err(Error::validation("p_if.sideband", "IF modulator must keep the lower sideband"));
    }
    if p_lo.sideband != Sideband::Upper {
        return Err(Error::validation("p_lo.sideband", "LO modulator must keep the upper sideband"));
    }
    let rail = carrier
        .occupied_rail()
        .ok_or_else(|| Error::validation("carrier", "must occupy a single polarization rail"))?;
    let half = OpticalField::single_rail(
        carrier.grid,
        carrier.carrier_frequency,
        Rail::X,
        carrier.rail(rail).iter().map(|c| c * FRAC_1_SQRT_2).collect(),
    )?;
    let x = dd_mzm_ssb(&half, if_drive, p_if)?;
    let y = dd_mzm_ssb(&half, lo_drive, p_lo)?;
    OpticalField::new(carrier.grid, carrier.carrier_frequency, x.env_x, y.env_x)
}
