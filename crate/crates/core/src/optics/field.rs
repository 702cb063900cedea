use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::{dbm_to_watts, watts_to_dbm, TimeGrid};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Optical carrier frequency in Hz for a vacuum wavelength in nm.
pub fn wavelength_to_frequency(wavelength_nm: f64) -> f64 {
    SPEED_OF_LIGHT / (wavelength_nm * 1e-9)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Rail {
    X,
    Y,
}

impl Rail {
    pub fn name(self) -> &'static str {
        match self {
            Rail::X => "x",
            Rail::Y => "y",
        }
    }
}

/// Dual-polarization complex envelope in sqrt(W), referenced to
/// `carrier_frequency`.
#[derive(Debug, Clone, PartialEq)]
pub struct OpticalField {
    pub grid: TimeGrid,
    /// Hz.
    pub carrier_frequency: f64,
    pub env_x: Vec<Complex64>,
    pub env_y: Vec<Complex64>,
}

impl OpticalField {
    pub fn new(
        grid: TimeGrid,
        carrier_frequency: f64,
        env_x: Vec<Complex64>,
        env_y: Vec<Complex64>,
    ) -> Result<Self> {
        if env_x.len() != grid.n_samples || env_y.len() != grid.n_samples {
            return Err(Error::Grid(format!(
                "envelopes hold {} and {} samples, grid expects {}",
                env_x.len(),
                env_y.len(),
                grid.n_samples
            )));
        }
        if !(carrier_frequency > 0.0 && carrier_frequency.is_finite()) {
            return Err(Error::validation("carrier_frequency", "must be positive"));
        }
        if env_x.iter().chain(&env_y).any(|v| !v.is_finite()) {
            return Err(Error::Simulation("optical envelope is not finite".into()));
        }
        Ok(Self {
            grid,
            carrier_frequency,
            env_x,
            env_y,
        })
    }

    pub fn dark(grid: TimeGrid, carrier_frequency: f64) -> Self {
        let zeros = vec![Complex64::new(0.0, 0.0); grid.n_samples];
        Self {
            grid,
            carrier_frequency,
            env_x: zeros.clone(),
            env_y: zeros,
        }
    }

    /// The same envelope placed on one rail, the other rail dark.
    pub fn single_rail(
        grid: TimeGrid,
        carrier_frequency: f64,
        rail: Rail,
        env: Vec<Complex64>,
    ) -> Result<Self> {
        let zeros = vec![Complex64::new(0.0, 0.0); env.len()];
        match rail {
            Rail::X => Self::new(grid, carrier_frequency, env, zeros),
            Rail::Y => Self::new(grid, carrier_frequency, zeros, env),
        }
    }

    pub fn rail(&self, rail: Rail) -> &[Complex64] {
        match rail {
            Rail::X => &self.env_x,
            Rail::Y => &self.env_y,
        }
    }

    pub fn rail_is_dark(&self, rail: Rail) -> bool {
        self.rail(rail).iter().all(|v| v.re == 0.0 && v.im == 0.0)
    }

    /// The rail a single-polarization field occupies. Dark fields report X.
    pub fn occupied_rail(&self) -> Option<Rail> {
        match (self.rail_is_dark(Rail::X), self.rail_is_dark(Rail::Y)) {
            (_, true) => Some(Rail::X),
            (true, false) => Some(Rail::Y),
            (false, false) => None,
        }
    }

    /// Mean optical power of one rail in W.
    pub fn rail_power(&self, rail: Rail) -> f64 {
        let env = self.rail(rail);
        env.iter().map(|v| v.norm_sqr()).sum::<f64>() / env.len() as f64
    }

    /// Mean total optical power in W.
    pub fn power(&self) -> f64 {
        self.rail_power(Rail::X) + self.rail_power(Rail::Y)
    }

    pub fn power_dbm(&self) -> f64 {
        watts_to_dbm(self.power())
    }

    /// Both rails multiplied by a real amplitude factor.
    pub fn scaled(&self, amplitude: f64) -> Self {
        Self {
            grid: self.grid,
            carrier_frequency: self.carrier_frequency,
            env_x: self.env_x.iter().map(|v| v * amplitude).collect(),
            env_y: self.env_y.iter().map(|v| v * amplitude).collect(),
        }
    }

    /// Noiseless optical amplifier.
    pub fn amplified(&self, gain_db: f64) -> Self {
        self.scaled(10f64.powf(gain_db / 20.0))
    }

    /// Applies a linear per-rail operation; dark rails stay dark untouched.
    pub(crate) fn map_rails(
        &self,
        mut f: impl FnMut(&[Complex64]) -> Vec<Complex64>,
    ) -> Self {
        let mut apply = |rail: Rail| {
            if self.rail_is_dark(rail) {
                self.rail(rail).to_vec()
            } else {
                f(self.rail(rail))
            }
        };
        Self {
            grid: self.grid,
            carrier_frequency: self.carrier_frequency,
            env_x: apply(Rail::X),
            env_y: apply(Rail::Y),
        }
    }
}

/// Continuous-wave laser. `power_dbm = -inf` yields a dark field.
pub fn laser_cw(
    power_dbm: f64,
    carrier_frequency: f64,
    polarization: Rail,
    grid: &TimeGrid,
) -> Result<OpticalField> {
    if power_dbm.is_nan() || power_dbm == f64::INFINITY {
        return Err(Error::validation("power_dbm", "must be finite or -inf"));
    }
    let amplitude = dbm_to_watts(power_dbm).sqrt();
    OpticalField::single_rail(
        *grid,
        carrier_frequency,
        polarization,
        vec![Complex64::new(amplitude, 0.0); grid.n_samples],
    )
}
