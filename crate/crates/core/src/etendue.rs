//! Closed-form optogeometric factors and the pixel flux.
//!
//! Two conventions coexist. The reduced factor is the bare geometric
//! product, `D²φ²/4` or `(a/f#)²/4`; the full factor is π times that and is
//! what the mode count and SNR consume. Every [`EtendueResult`] carries both.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{ensure_non_negative, ensure_positive, Result};
use crate::quantities::{Angle, Area, Etendue, Length, Power, Radiance, SolidAngle};

/// Half-angles (rad) above which the closed forms are flagged as non-paraxial.
pub const PARAXIAL_HALF_ANGLE_LIMIT: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Convention {
    /// The producing formula yields the reduced (π-free) factor.
    ReducedTilde,
    /// The producing formula yields a genuine étendue directly.
    FullPi,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EtendueSource {
    ClosedFormScene,
    ClosedFormSensor,
    Paraxial,
    Quadrature,
}

impl EtendueSource {
    pub fn as_str(&self) -> &'static str {
        match self {
            EtendueSource::ClosedFormScene => "scene",
            EtendueSource::ClosedFormSensor => "sensor",
            EtendueSource::Paraxial => "paraxial",
            EtendueSource::Quadrature => "quadrature",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Warning {
    /// An angle entering a small-angle formula exceeds the paraxial limit.
    NonParaxial { what: &'static str, half_angle: f64 },
    /// A degenerate zero input produced a zero result.
    Degenerate { what: &'static str },
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Warning::NonParaxial { what, half_angle } => write!(
                f,
                "{what} = {half_angle:.4} rad exceeds the paraxial limit of {PARAXIAL_HALF_ANGLE_LIMIT} rad"
            ),
            Warning::Degenerate { what } => write!(f, "{what} is zero; result is degenerate"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EtendueResult {
    pub reduced: Etendue,
    pub full: Etendue,
    pub convention: Convention,
    pub source: EtendueSource,
    /// Difference between the last two quadrature refinements, when numeric.
    pub error_estimate: Option<Etendue>,
    pub warnings: Vec<Warning>,
}

impl EtendueResult {
    fn from_reduced(reduced: Etendue, source: EtendueSource) -> Self {
        Self {
            reduced,
            full: full_etendue_unchecked(reduced),
            convention: Convention::ReducedTilde,
            source,
            error_estimate: None,
            warnings: Vec::new(),
        }
    }

    pub(crate) fn from_full(full: Etendue, source: EtendueSource) -> Self {
        Self {
            reduced: full / PI,
            full,
            convention: Convention::FullPi,
            source,
            error_estimate: None,
            warnings: Vec::new(),
        }
    }

    pub(crate) fn warn(&mut self, warning: Warning) {
        log::warn!("{warning}");
        self.warnings.push(warning);
    }
}

fn full_etendue_unchecked(reduced: Etendue) -> Etendue {
    reduced * PI
}

/// π × reduced.
pub fn full_etendue(reduced: Etendue) -> Result<Etendue> {
    ensure_non_negative("reduced", reduced.value())?;
    Ok(full_etendue_unchecked(reduced))
}

/// Scene-side reduced factor `D² φ_iFOV² / 4`.
pub fn reduced_scene_factor(pupil_diameter: Length, ifov: Angle) -> Result<EtendueResult> {
    ensure_positive("pupil_diameter", pupil_diameter.value())?;
    ensure_positive("ifov", ifov.value())?;
    let side = pupil_diameter.value() * ifov.value();
    let mut result =
        EtendueResult::from_reduced(Etendue::new(side * side / 4.0), EtendueSource::ClosedFormScene);
    if ifov.value() > PARAXIAL_HALF_ANGLE_LIMIT {
        result.warn(Warning::NonParaxial {
            what: "ifov",
            half_angle: ifov.value(),
        });
    }
    Ok(result)
}

/// Sensor-side reduced factor `(a / f#)² / 4`.
pub fn reduced_sensor_factor(pixel_pitch: Length, f_number: f64) -> Result<EtendueResult> {
    ensure_positive("pixel_pitch", pixel_pitch.value())?;
    ensure_positive("f_number", f_number)?;
    let side = pixel_pitch.value() / f_number;
    Ok(EtendueResult::from_reduced(
        Etendue::new(side * side / 4.0),
        EtendueSource::ClosedFormSensor,
    ))
}

/// `A*_fp · Ω_pix`, stored as the full étendue.
pub fn paraxial_etendue(
    projected_footprint_area: Area,
    pixel_solid_angle: SolidAngle,
) -> Result<EtendueResult> {
    ensure_positive("projected_footprint_area", projected_footprint_area.value())?;
    ensure_positive("pixel_solid_angle", pixel_solid_angle.value())?;
    let mut result =
        EtendueResult::from_full(projected_footprint_area * pixel_solid_angle, EtendueSource::Paraxial);
    // cone half-angle whose small-angle solid angle is Ω
    let half_angle = (pixel_solid_angle.value() / PI).sqrt();
    if half_angle > PARAXIAL_HALF_ANGLE_LIMIT {
        result.warn(Warning::NonParaxial {
            what: "solid-angle half-angle",
            half_angle,
        });
    }
    Ok(result)
}

/// Φ_pix = L · F, using the full étendue.
pub fn pixel_flux(radiance: Radiance, etendue: &EtendueResult) -> Result<Power> {
    ensure_non_negative("radiance", radiance.value())?;
    Ok(radiance * etendue.full)
}

/// Exact on-axis projected solid angle of a disc, `π sin²(atan(r/R))`.
pub fn projected_solid_angle_of_disc(disc_radius: Length, distance: Length) -> Result<SolidAngle> {
    ensure_positive("disc_radius", disc_radius.value())?;
    ensure_positive("distance", distance.value())?;
    let (r, d) = (disc_radius.value(), distance.value());
    // sin²(atan t) = t² / (1 + t²), written without forming t for tiny ratios
    Ok(SolidAngle::new(PI * r * r / (r * r + d * d)))
}

/// Small-angle pupil solid angle `π D² / (4 R²)`.
pub fn paraxial_pupil_solid_angle(pupil_diameter: Length, distance: Length) -> Result<SolidAngle> {
    ensure_positive("pupil_diameter", pupil_diameter.value())?;
    ensure_positive("distance", distance.value())?;
    let ratio = pupil_diameter.value() / distance.value();
    Ok(SolidAngle::new(PI * ratio * ratio / 4.0))
}
