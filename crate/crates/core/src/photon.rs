//! Mode counting, Bose–Einstein occupancy and the shot-noise-limited SNR.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::constants::PhysicalConstants;
use crate::error::{ensure_non_negative, ensure_positive, Error, Result};
use crate::etendue::EtendueResult;
use crate::quantities::{Angle, Energy, Etendue, Length, Temperature};
use crate::sensor::{effective_coherence_scale, RadiometricScenario, SensorGeometry};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OscillatorLevel {
    pub n: u64,
    pub lambda_osc: Length,
    pub energy: Energy,
}

/// E_n = ħ (2πc / λ) (n + ½).
pub fn oscillator_energy(n: u64, lambda_osc: Length) -> Result<OscillatorLevel> {
    ensure_positive("lambda_osc", lambda_osc.value())?;
    let k = PhysicalConstants::SI;
    let omega = 2.0 * PI * k.c / lambda_osc.value();
    Ok(OscillatorLevel {
        n,
        lambda_osc,
        energy: Energy::new(k.hbar * omega * (n as f64 + 0.5)),
    })
}

/// Which length squared divides the étendue in the mode count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum CoherencePolicy {
    /// λ_pix = max(1.22 λ f/#, a_pix).
    #[default]
    MaxRule,
    /// The measurement wavelength itself.
    RawMeasurementWavelength,
}

impl CoherencePolicy {
    pub fn as_str(&self) -> &'static str {
        match self {
            CoherencePolicy::MaxRule => "max-rule",
            CoherencePolicy::RawMeasurementWavelength => "raw-lambda",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "max-rule" => Some(CoherencePolicy::MaxRule),
            "raw-lambda" => Some(CoherencePolicy::RawMeasurementWavelength),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeBudget {
    /// Geometric mode count F / λ_used².
    pub n_osc: f64,
    pub coherence_policy: CoherencePolicy,
    pub lambda_used: Length,
    pub etendue_full: Etendue,
    /// η N_pol n_osc Δν τ, once [`effective_modes`] has run.
    pub n_modes_eff: Option<f64>,
    pub dnu_tau: Option<f64>,
}

impl ModeBudget {
    /// True when the pixel admits less than one full phase-space cell.
    pub fn is_fractional(&self) -> bool {
        self.n_osc < 1.0
    }
}

/// N_osc = F_full / λ_used², with λ_used chosen by `policy`.
pub fn mode_count(
    etendue: &EtendueResult,
    lambda_meas: Length,
    geometry: &SensorGeometry,
    policy: CoherencePolicy,
) -> Result<ModeBudget> {
    ensure_non_negative("etendue", etendue.full.value())?;
    let lambda_used = match policy {
        CoherencePolicy::MaxRule => effective_coherence_scale(lambda_meas, geometry)?.lambda_pix,
        CoherencePolicy::RawMeasurementWavelength => {
            ensure_positive("lambda_meas", lambda_meas.value())?;
            lambda_meas
        }
    };
    Ok(mode_count_with_scale(etendue.full, lambda_used, policy))
}

/// Mode count against an explicit cell size (system-level N = G / λ²).
pub fn mode_count_with_scale(
    etendue_full: Etendue,
    lambda_used: Length,
    policy: CoherencePolicy,
) -> ModeBudget {
    ModeBudget {
        n_osc: etendue_full.cells_of(lambda_used),
        coherence_policy: policy,
        lambda_used,
        etendue_full,
        n_modes_eff: None,
        dnu_tau: None,
    }
}

pub fn effective_modes(budget: &ModeBudget, scenario: &RadiometricScenario) -> ModeBudget {
    let dnu_tau = scenario.dnu_tau();
    ModeBudget {
        n_modes_eff: Some(
            scenario.eta_sys() * f64::from(scenario.n_pol()) * budget.n_osc * dnu_tau,
        ),
        dnu_tau: Some(dnu_tau),
        ..*budget
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OccupancyResult {
    pub n_bar: f64,
    /// hc / (λ k T).
    pub x: f64,
    /// Set when n̄ is below the smallest representable double.
    pub underflow: bool,
}

/// n̄ = 1 / (exp(hc/λkT) − 1).
pub fn bose_einstein_occupancy(lambda_meas: Length, temperature: Temperature) -> Result<OccupancyResult> {
    ensure_positive("lambda_meas", lambda_meas.value())?;
    if !(temperature.kelvin() > 0.0) {
        return Err(Error::validation(
            "temperature",
            format!("must be > 0, got {}", temperature.kelvin()),
        ));
    }
    let x = PhysicalConstants::SI.hc_over_k() / (lambda_meas.value() * temperature.kelvin());
    Ok(occupancy_from_x(x))
}

/// Occupancy as a function of the reduced photon energy x alone.
pub fn occupancy_from_x(x: f64) -> OccupancyResult {
    let n_bar = if x <= 1.0 {
        1.0 / x.exp_m1()
    } else {
        // e^{-x} / (1 − e^{-x}) keeps precision and reaches subnormals
        let e = (-x).exp();
        e / -(-x).exp_m1()
    };
    OccupancyResult {
        n_bar,
        x,
        underflow: n_bar == 0.0,
    }
}

/// N_ph = N_eff · n̄.
pub fn photon_number(budget: &ModeBudget, occ: &OccupancyResult) -> Result<f64> {
    let n_eff = budget.n_modes_eff.ok_or_else(|| {
        Error::Usage("effective mode count not computed; call effective_modes first".into())
    })?;
    Ok(n_eff * occ.n_bar)
}

/// σ_N = √N_ph.
pub fn shot_noise_sigma(n_ph: f64) -> Result<f64> {
    ensure_non_negative("n_ph", n_ph)?;
    Ok(n_ph.sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhotonStatisticsSummary {
    pub n_osc: f64,
    pub n_ph: f64,
    pub sigma_n: f64,
    pub snr_fund: f64,
    pub fractional_mode_flag: bool,
    /// True when η = N_pol = Δν·τ = 1 were assumed rather than supplied.
    pub compact_normalization: bool,
}

impl PhotonStatisticsSummary {
    /// Shot-noise summary for a photon number produced by the full pipeline.
    pub fn from_pipeline(budget: &ModeBudget, n_ph: f64) -> Result<Self> {
        let sigma_n = shot_noise_sigma(n_ph)?;
        Ok(Self {
            n_osc: budget.n_osc,
            n_ph,
            sigma_n,
            snr_fund: sigma_n,
            fractional_mode_flag: budget.is_fractional(),
            compact_normalization: false,
        })
    }

    fn compact(n_osc: f64, snr: f64) -> Self {
        Self {
            n_osc,
            n_ph: snr * snr,
            sigma_n: snr,
            snr_fund: snr,
            fractional_mode_flag: n_osc < 1.0,
            compact_normalization: true,
        }
    }
}

/// SNR = √(F / λ_pix² · n̄) with unit system factors.
pub fn snr_compact(
    etendue: &EtendueResult,
    lambda_pix: Length,
    occ: &OccupancyResult,
) -> Result<PhotonStatisticsSummary> {
    ensure_non_negative("etendue", etendue.full.value())?;
    ensure_positive("lambda_pix", lambda_pix.value())?;
    ensure_non_negative("n_bar", occ.n_bar)?;
    let n_osc = etendue.full.cells_of(lambda_pix);
    Ok(PhotonStatisticsSummary::compact(n_osc, (n_osc * occ.n_bar).sqrt()))
}

/// Scene-side form, (D φ / 2) √(π n̄ / λ_pix²).
pub fn snr_scene(
    pupil_diameter: Length,
    ifov: Angle,
    lambda_pix: Length,
    occ: &OccupancyResult,
) -> Result<PhotonStatisticsSummary> {
    ensure_positive("pupil_diameter", pupil_diameter.value())?;
    ensure_non_negative("ifov", ifov.value())?;
    ensure_positive("lambda_pix", lambda_pix.value())?;
    ensure_non_negative("n_bar", occ.n_bar)?;
    if ifov.value() == 0.0 {
        log::warn!("ifov is zero; scene-based SNR is degenerate");
    }
    let aperture = pupil_diameter.value() * ifov.value();
    let lp = lambda_pix.value();
    let snr = 0.5 * aperture * (PI / (lp * lp) * occ.n_bar).sqrt();
    let n_osc = PI * aperture * aperture / 4.0 / (lp * lp);
    Ok(PhotonStatisticsSummary::compact(n_osc, snr))
}

/// Sensor-side form, (a / 2f#) √(π n̄ / λ_pix²).
pub fn snr_sensor(
    pixel_pitch: Length,
    f_number: f64,
    lambda_pix: Length,
    occ: &OccupancyResult,
) -> Result<PhotonStatisticsSummary> {
    ensure_positive("pixel_pitch", pixel_pitch.value())?;
    if !(f_number > 0.0) {
        return Err(Error::validation("f_number", format!("must be > 0, got {f_number}")));
    }
    ensure_positive("lambda_pix", lambda_pix.value())?;
    ensure_non_negative("n_bar", occ.n_bar)?;
    let ratio = pixel_pitch.value() / f_number;
    let lp = lambda_pix.value();
    let snr = ratio / 2.0 * (PI / (lp * lp) * occ.n_bar).sqrt();
    let n_osc = PI * ratio * ratio / 4.0 / (lp * lp);
    Ok(PhotonStatisticsSummary::compact(n_osc, snr))
}
