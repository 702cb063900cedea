use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::field::{OpticalField, Rail};
use crate::error::{Error, Result};

/// Rotation by `angle` followed by a retardance of `differential_phase`
/// between the rails: `diag(e^{-j d/2}, e^{j d/2}) * R(angle)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct JonesRotation {
    pub angle: f64,
    pub differential_phase: f64,
}

impl JonesRotation {
    pub fn new(angle: f64, differential_phase: f64) -> Self {
        Self {
            angle,
            differential_phase,
        }
    }

    pub fn matrix(&self) -> [[Complex64; 2]; 2] {
        let (s, c) = self.angle.sin_cos();
        let a = Complex64::from_polar(1.0, -self.differential_phase / 2.0);
        let b = Complex64::from_polar(1.0, self.differential_phase / 2.0);
        [[a * c, -a * s], [b * s, b * c]]
    }
}

pub fn apply_jones(field: &OpticalField, r: &JonesRotation) -> OpticalField {
    let m = r.matrix();
    let (env_x, env_y) = field
        .env_x
        .iter()
        .zip(&field.env_y)
        .map(|(x, y)| (m[0][0] * x + m[0][1] * y, m[1][0] * x + m[1][1] * y))
        .unzip();
    OpticalField {
        grid: field.grid,
        carrier_frequency: field.carrier_frequency,
        env_x,
        env_y,
    }
}

/// Linear polarizer; the projection onto its axis leaves on the X rail.
pub fn polarizer(field: &OpticalField, angle: f64) -> OpticalField {
    let (s, c) = angle.sin_cos();
    let env_x = field
        .env_x
        .iter()
        .zip(&field.env_y)
        .map(|(x, y)| x * c + y * s)
        .collect();
    OpticalField {
        grid: field.grid,
        carrier_frequency: field.carrier_frequency,
        env_x,
        env_y: vec![Complex64::new(0.0, 0.0); field.grid.n_samples],
    }
}

/// Polarization beam splitter: (X-only, Y-only).
pub fn pbs(field: &OpticalField) -> (OpticalField, OpticalField) {
    let zeros = vec![Complex64::new(0.0, 0.0); field.grid.n_samples];
    let x = OpticalField {
        grid: field.grid,
        carrier_frequency: field.carrier_frequency,
        env_x: field.env_x.clone(),
        env_y: zeros.clone(),
    };
    let y = OpticalField {
        grid: field.grid,
        carrier_frequency: field.carrier_frequency,
        env_x: zeros,
        env_y: field.env_y.clone(),
    };
    (x, y)
}

/// Polarization beam combiner; `x` must be dark on Y and `y` dark on X.
pub fn pbc(x: &OpticalField, y: &OpticalField) -> Result<OpticalField> {
    x.grid.ensure_same(&y.grid)?;
    if !x.rail_is_dark(Rail::Y) {
        return Err(Error::RailConflict("y"));
    }
    if !y.rail_is_dark(Rail::X) {
        return Err(Error::RailConflict("x"));
    }
    if x.carrier_frequency != y.carrier_frequency {
        return Err(Error::validation("carrier_frequency", "combined fields must share a carrier"));
    }
    Ok(OpticalField {
        grid: x.grid,
        carrier_frequency: x.carrier_frequency,
        env_x: x.env_x.clone(),
        env_y: y.env_y.clone(),
    })
}
