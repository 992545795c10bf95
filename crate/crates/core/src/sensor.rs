//! Sensor-side geometry, the radiometric scenario, and the effective
//! coherence scale that sets the phase-space cell at the detector.

use serde::{Deserialize, Serialize};

use crate::constants::AIRY_COEFFICIENT;
use crate::error::{ensure_non_negative, ensure_positive, Error, Result};
use crate::quantities::{Angle, Length, Radiance, Temperature};

const F_NUMBER_REL_TOL: f64 = 1e-9;
const IFOV_REL_TOL: f64 = 1e-6;

/// Pixel pitch and f-number, plus optional redundant optics fields.
///
/// Redundant fields are checked against the primary ones rather than
/// recomputed: `f_number == focal_length / pupil_diameter` and
/// `ifov == pixel_pitch / focal_length`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensorGeometry {
    pixel_pitch: Length,
    f_number: f64,
    focal_length: Option<Length>,
    pupil_diameter: Option<Length>,
    ifov: Option<Angle>,
}

impl SensorGeometry {
    pub fn new(pixel_pitch: Length, f_number: f64) -> Result<Self> {
        ensure_positive("pixel_pitch", pixel_pitch.value())?;
        if !(f_number > 0.0) || f_number.is_nan() {
            return Err(Error::validation(
                "f_number",
                format!("must be > 0, got {f_number}"),
            ));
        }
        Ok(Self {
            pixel_pitch,
            f_number,
            focal_length: None,
            pupil_diameter: None,
            ifov: None,
        })
    }

    pub fn with_focal_length(mut self, focal_length: Length) -> Result<Self> {
        ensure_positive("focal_length", focal_length.value())?;
        self.focal_length = Some(focal_length);
        self.check_consistency()?;
        Ok(self)
    }

    pub fn with_pupil_diameter(mut self, pupil_diameter: Length) -> Result<Self> {
        ensure_positive("pupil_diameter", pupil_diameter.value())?;
        self.pupil_diameter = Some(pupil_diameter);
        self.check_consistency()?;
        Ok(self)
    }

    pub fn with_ifov(mut self, ifov: Angle) -> Result<Self> {
        ensure_positive("ifov", ifov.value())?;
        self.ifov = Some(ifov);
        self.check_consistency()?;
        Ok(self)
    }

    fn check_consistency(&self) -> Result<()> {
        if let (Some(f), Some(d)) = (self.focal_length, self.pupil_diameter) {
            let implied = f / d;
            if (implied - self.f_number).abs() > F_NUMBER_REL_TOL * self.f_number {
                return Err(Error::validation(
                    "f_number",
                    format!(
                        "{} disagrees with focal_length / pupil_diameter = {implied}",
                        self.f_number
                    ),
                ));
            }
        }
        if let (Some(phi), Some(f)) = (self.ifov, self.focal_length) {
            let implied = self.pixel_pitch / f;
            if (implied - phi.value()).abs() > IFOV_REL_TOL * implied {
                return Err(Error::validation(
                    "ifov",
                    format!(
                        "{} disagrees with pixel_pitch / focal_length = {implied}",
                        phi.value()
                    ),
                ));
            }
        }
        Ok(())
    }

    pub fn pixel_pitch(&self) -> Length {
        self.pixel_pitch
    }

    pub fn f_number(&self) -> f64 {
        self.f_number
    }

    pub fn focal_length(&self) -> Option<Length> {
        self.focal_length
    }

    pub fn pupil_diameter(&self) -> Option<Length> {
        self.pupil_diameter
    }

    pub fn ifov(&self) -> Option<Angle> {
        self.ifov
    }
}

/// Everything the photon-number chain needs besides geometry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadiometricScenario {
    lambda_meas: Length,
    temperature: Temperature,
    /// Detection bandwidth Δν, Hz.
    bandwidth: f64,
    /// Integration time τ, s.
    integration_time: f64,
    eta_sys: f64,
    n_pol: u8,
    radiance: Option<Radiance>,
}

impl RadiometricScenario {
    /// A scenario with the normalized system factors: η = 1, one
    /// polarization, Δν·τ = 1.
    pub fn new(lambda_meas: Length, temperature: Temperature) -> Result<Self> {
        ensure_positive("lambda_meas", lambda_meas.value())?;
        ensure_positive("temperature", temperature.kelvin())?;
        Ok(Self {
            lambda_meas,
            temperature,
            bandwidth: 1.0,
            integration_time: 1.0,
            eta_sys: 1.0,
            n_pol: 1,
            radiance: None,
        })
    }

    pub fn with_bandwidth(mut self, hz: f64) -> Result<Self> {
        ensure_non_negative("bandwidth", hz)?;
        self.bandwidth = hz;
        Ok(self)
    }

    pub fn with_integration_time(mut self, seconds: f64) -> Result<Self> {
        ensure_non_negative("integration_time", seconds)?;
        self.integration_time = seconds;
        Ok(self)
    }

    pub fn with_efficiency(mut self, eta_sys: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&eta_sys) {
            return Err(Error::validation(
                "eta_sys",
                format!("must lie in [0, 1], got {eta_sys}"),
            ));
        }
        self.eta_sys = eta_sys;
        Ok(self)
    }

    pub fn with_polarizations(mut self, n_pol: u8) -> Result<Self> {
        if !(1..=2).contains(&n_pol) {
            return Err(Error::validation(
                "n_pol",
                format!("must be 1 or 2, got {n_pol}"),
            ));
        }
        self.n_pol = n_pol;
        Ok(self)
    }

    pub fn with_radiance(mut self, radiance: Radiance) -> Result<Self> {
        ensure_non_negative("radiance", radiance.value())?;
        self.radiance = Some(radiance);
        Ok(self)
    }

    pub fn lambda_meas(&self) -> Length {
        self.lambda_meas
    }

    pub fn temperature(&self) -> Temperature {
        self.temperature
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    pub fn integration_time(&self) -> f64 {
        self.integration_time
    }

    /// The dimensionless product Δν·τ.
    pub fn dnu_tau(&self) -> f64 {
        self.bandwidth * self.integration_time
    }

    pub fn eta_sys(&self) -> f64 {
        self.eta_sys
    }

    pub fn n_pol(&self) -> u8 {
        self.n_pol
    }

    pub fn radiance(&self) -> Option<Radiance> {
        self.radiance
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Regime {
    /// Airy spot larger than the pixel.
    DiffractionLimited,
    /// Pixel larger than the Airy spot.
    GeometryLimited,
    /// The two scales are exactly equal.
    Boundary,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::DiffractionLimited => "diffraction-limited",
            Regime::GeometryLimited => "geometry-limited",
            Regime::Boundary => "boundary",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoherenceScaleResult {
    pub lambda_pix: Length,
    pub regime: Regime,
    /// 1.22 λ f/#.
    pub diffraction_scale: Length,
}

/// λ_pix = max(1.22 λ f/#, a_pix), with the regime that produced it.
pub fn effective_coherence_scale(
    lambda_meas: Length,
    geometry: &SensorGeometry,
) -> Result<CoherenceScaleResult> {
    ensure_positive("lambda_meas", lambda_meas.value())?;
    let diffraction_scale = lambda_meas * (AIRY_COEFFICIENT * geometry.f_number());
    let pitch = geometry.pixel_pitch();
    let (lambda_pix, regime) = if diffraction_scale > pitch {
        (diffraction_scale, Regime::DiffractionLimited)
    } else if pitch > diffraction_scale {
        (pitch, Regime::GeometryLimited)
    } else {
        (pitch, Regime::Boundary)
    };
    Ok(CoherenceScaleResult {
        lambda_pix,
        regime,
        diffraction_scale,
    })
}

pub fn classify_regime(lambda_meas: Length, geometry: &SensorGeometry) -> Result<Regime> {
    effective_coherence_scale(lambda_meas, geometry).map(|r| r.regime)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn um(x: f64) -> Length {
        Length::from_micrometers(x)
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn lwir_f1_is_geometry_limited() {
        let g = SensorGeometry::new(um(17.0), 1.0).unwrap();
        let r = effective_coherence_scale(um(10.0), &g).unwrap();
        assert_eq!(r.regime, Regime::GeometryLimited);
        assert_eq!(r.lambda_pix, um(17.0));
        assert!(rel(r.diffraction_scale.value(), 12.2e-6) < 1e-12);
    }

    #[test]
    fn lwir_f2_is_diffraction_limited() {
        let g = SensorGeometry::new(um(17.0), 2.0).unwrap();
        let r = effective_coherence_scale(um(10.0), &g).unwrap();
        assert_eq!(r.regime, Regime::DiffractionLimited);
        assert!(rel(r.lambda_pix.value(), 24.4e-6) < 1e-12);
    }

    #[test]
    fn vanishing_pitch_leaves_airy_scale() {
        let g = SensorGeometry::new(Length::new(1e-15), 1.0).unwrap();
        let r = effective_coherence_scale(um(10.0), &g).unwrap();
        assert!(rel(r.lambda_pix.value(), 12.2e-6) < 1e-12);
    }

    #[test]
    fn regime_extremes() {
        let small = SensorGeometry::new(um(1.0), 1.0).unwrap();
        assert_eq!(
            classify_regime(um(10.0), &small).unwrap(),
            Regime::DiffractionLimited
        );
        let large = SensorGeometry::new(um(100.0), 1.0).unwrap();
        assert_eq!(
            classify_regime(um(10.0), &large).unwrap(),
            Regime::GeometryLimited
        );
    }

    #[test]
    fn exact_tie_is_boundary() {
        // 1.22 * 1e-5 * 1.0 evaluated the same way as the implementation
        let lambda = Length::new(1e-5);
        let pitch = lambda * (AIRY_COEFFICIENT * 1.0);
        let g = SensorGeometry::new(pitch, 1.0).unwrap();
        let r = effective_coherence_scale(lambda, &g).unwrap();
        assert_eq!(r.regime, Regime::Boundary);
        assert_eq!(r.lambda_pix, pitch);
    }

    #[test]
    fn rejects_bad_inputs_by_name() {
        let err = SensorGeometry::new(um(17.0), -1.0).unwrap_err();
        assert!(matches!(err, Error::Validation { ref field, .. } if field == "f_number"));
        let err = SensorGeometry::new(Length::new(0.0), 1.0).unwrap_err();
        assert!(matches!(err, Error::Validation { ref field, .. } if field == "pixel_pitch"));
        let g = SensorGeometry::new(um(17.0), 1.0).unwrap();
        let err = effective_coherence_scale(Length::new(-1e-6), &g).unwrap_err();
        assert!(matches!(err, Error::Validation { ref field, .. } if field == "lambda_meas"));
    }

    #[test]
    fn redundant_fields_are_checked() {
        let g = SensorGeometry::new(um(17.0), 1.0).unwrap();
        let g = g.with_focal_length(Length::from_millimeters(17.0)).unwrap();
        assert!(g.with_pupil_diameter(Length::from_millimeters(17.0)).is_ok());
        let err = g
            .with_pupil_diameter(Length::from_millimeters(10.0))
            .unwrap_err();
        assert!(matches!(err, Error::Validation { ref field, .. } if field == "f_number"));
        assert!(g.with_ifov(Angle::new(1e-3)).is_ok());
        let err = g.with_ifov(Angle::new(1.1e-3)).unwrap_err();
        assert!(matches!(err, Error::Validation { ref field, .. } if field == "ifov"));
    }

    #[test]
    fn scenario_ranges() {
        let s = RadiometricScenario::new(um(10.0), Temperature::new(300.0)).unwrap();
        assert_eq!(s.dnu_tau(), 1.0);
        assert!(s.with_efficiency(1.5).is_err());
        assert!(s.with_polarizations(3).is_err());
        assert!(s.with_bandwidth(-1.0).is_err());
        assert!(s.with_radiance(Radiance::new(-1.0)).is_err());
        assert!(RadiometricScenario::new(um(10.0), Temperature::new(0.0)).is_err());
    }

    proptest! {
        #[test]
        fn monotone_in_each_input(
            lambda in 0.5f64..30.0,
            f in 0.5f64..8.0,
            a in 1.0f64..50.0,
            bump in 1.0f64..2.0,
        ) {
            let base = effective_coherence_scale(
                um(lambda), &SensorGeometry::new(um(a), f).unwrap()).unwrap().lambda_pix;
            let more_lambda = effective_coherence_scale(
                um(lambda * bump), &SensorGeometry::new(um(a), f).unwrap()).unwrap().lambda_pix;
            let more_f = effective_coherence_scale(
                um(lambda), &SensorGeometry::new(um(a), f * bump).unwrap()).unwrap().lambda_pix;
            let more_a = effective_coherence_scale(
                um(lambda), &SensorGeometry::new(um(a * bump), f).unwrap()).unwrap().lambda_pix;
            prop_assert!(more_lambda >= base);
            prop_assert!(more_f >= base);
            prop_assert!(more_a >= base);
        }

        #[test]
        fn homogeneous_of_degree_one(lambda in 0.5f64..30.0, f in 0.5f64..8.0, a in 1.0f64..50.0) {
            let one = effective_coherence_scale(
                um(lambda), &SensorGeometry::new(um(a), f).unwrap()).unwrap();
            let two = effective_coherence_scale(
                um(lambda) * 2.0, &SensorGeometry::new(um(a) * 2.0, f).unwrap()).unwrap();
            // scaling by two is exact in binary floating point
            prop_assert_eq!(two.lambda_pix.value(), 2.0 * one.lambda_pix.value());
        }
    }
}
