//! Exact SI defining constants.

use std::f64::consts::PI;

use serde::Serialize;

/// Planck constant, J·s.
pub const PLANCK: f64 = 6.626_070_15e-34;
/// Boltzmann constant, J/K.
pub const BOLTZMANN: f64 = 1.380_649e-23;
/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 2.997_924_58e8;
/// Reduced Planck constant, h / 2π.
pub const REDUCED_PLANCK: f64 = PLANCK / (2.0 * PI);

/// Coefficient of the Airy first-null radius, 1.22 λ f/#.
pub const AIRY_COEFFICIENT: f64 = 1.22;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhysicalConstants {
    pub h: f64,
    pub hbar: f64,
    pub c: f64,
    pub k_b: f64,
}

impl PhysicalConstants {
    pub const SI: PhysicalConstants = PhysicalConstants {
        h: PLANCK,
        hbar: REDUCED_PLANCK,
        c: SPEED_OF_LIGHT,
        k_b: BOLTZMANN,
    };

    /// (name, value, unit) triples in a fixed order.
    pub fn entries(&self) -> [(&'static str, f64, &'static str); 4] {
        [
            ("h", self.h, "J s"),
            ("hbar", self.hbar, "J s"),
            ("c", self.c, "m/s"),
            ("k_B", self.k_b, "J/K"),
        ]
    }

    /// Second radiation constant hc/k, in m·K.
    pub fn hc_over_k(&self) -> f64 {
        self.h * self.c / self.k_b
    }
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::SI
    }
}
