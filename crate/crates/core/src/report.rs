//! The end-to-end chain for one configuration, sweeps over it, and the
//! CSV / JSON / Markdown renderers.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{EtendueSourceConfig, ScenarioConfig};
use crate::constants::PhysicalConstants;
use crate::error::{Error, Result};
use crate::etendue::{
    paraxial_etendue, pixel_flux, reduced_scene_factor, reduced_sensor_factor, EtendueResult,
};
use crate::mc::{shot_limit_gap, simulate_pixel, SamplingSpec};
use crate::photon::{
    bose_einstein_occupancy, effective_modes, mode_count, photon_number, CoherencePolicy,
    PhotonStatisticsSummary,
};
use crate::quadrature::quadrature_etendue;
use crate::quantities::{Angle, Area, Length, SolidAngle};
use crate::sensor::{effective_coherence_scale, SensorGeometry};

/// Étendue used by the table reproduction, m²·sr.
pub const TABLE1_ETENDUE: f64 = 2.27e-10;
/// Wavelengths of the table reproduction, µm.
pub const TABLE1_WAVELENGTHS_UM: [f64; 5] = [1.0, 3.0, 5.0, 10.0, 14.0];

/// One line of a report: inputs echoed, then the analytic chain, then the
/// optional Monte Carlo columns. Field order is the column order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub a_pix: f64,
    pub f_number: f64,
    pub lambda_meas: f64,
    pub temperature: f64,
    pub eta_sys: f64,
    pub n_pol: u8,
    pub dnu_tau: f64,
    pub radiance: Option<f64>,
    pub coherence_policy: String,
    pub etendue_source: String,
    pub f_reduced: f64,
    pub f_full: f64,
    pub f_error_estimate: Option<f64>,
    pub lambda_pix: f64,
    pub regime: String,
    pub lambda_used: f64,
    pub n_osc: f64,
    pub fractional_mode: bool,
    pub n_modes_eff: f64,
    pub n_bar: f64,
    pub n_ph: f64,
    pub sigma_n: f64,
    pub snr_fund: f64,
    pub pixel_flux: Option<f64>,
    #[serde(flatten)]
    pub mc: Option<McColumns>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McColumns {
    pub mc_distribution: String,
    pub mc_modes: u64,
    pub mc_trials: u64,
    pub mc_seed: u64,
    pub mc_mean: f64,
    pub mc_variance: f64,
    pub mc_snr: Option<f64>,
    pub mc_theory_mean: f64,
    pub mc_theory_variance: f64,
    pub mc_shot_gap: Option<f64>,
}

const BASE_COLUMNS: [&str; 24] = [
    "a_pix",
    "f_number",
    "lambda_meas",
    "temperature",
    "eta_sys",
    "n_pol",
    "dnu_tau",
    "radiance",
    "coherence_policy",
    "etendue_source",
    "f_reduced",
    "f_full",
    "f_error_estimate",
    "lambda_pix",
    "regime",
    "lambda_used",
    "n_osc",
    "fractional_mode",
    "n_modes_eff",
    "n_bar",
    "n_ph",
    "sigma_n",
    "snr_fund",
    "pixel_flux",
];

const MC_COLUMNS: [&str; 10] = [
    "mc_distribution",
    "mc_modes",
    "mc_trials",
    "mc_seed",
    "mc_mean",
    "mc_variance",
    "mc_snr",
    "mc_theory_mean",
    "mc_theory_variance",
    "mc_shot_gap",
];

/// Column names in output order.
pub fn report_columns(with_mc: bool) -> Vec<&'static str> {
    let mut cols = BASE_COLUMNS.to_vec();
    if with_mc {
        cols.extend(MC_COLUMNS);
    }
    cols
}

fn num(x: f64) -> String {
    format_significant(x, 6)
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

impl ReportRow {
    fn cells(&self, with_mc: bool) -> Vec<String> {
        let mut cells = vec![
            num(self.a_pix),
            num(self.f_number),
            num(self.lambda_meas),
            num(self.temperature),
            num(self.eta_sys),
            self.n_pol.to_string(),
            num(self.dnu_tau),
            opt(self.radiance),
            self.coherence_policy.clone(),
            self.etendue_source.clone(),
            num(self.f_reduced),
            num(self.f_full),
            opt(self.f_error_estimate),
            num(self.lambda_pix),
            self.regime.clone(),
            num(self.lambda_used),
            num(self.n_osc),
            self.fractional_mode.to_string(),
            num(self.n_modes_eff),
            num(self.n_bar),
            num(self.n_ph),
            num(self.sigma_n),
            num(self.snr_fund),
            opt(self.pixel_flux),
        ];
        if with_mc {
            match &self.mc {
                Some(m) => cells.extend([
                    m.mc_distribution.clone(),
                    m.mc_modes.to_string(),
                    m.mc_trials.to_string(),
                    m.mc_seed.to_string(),
                    num(m.mc_mean),
                    num(m.mc_variance),
                    opt(m.mc_snr),
                    num(m.mc_theory_mean),
                    num(m.mc_theory_variance),
                    opt(m.mc_shot_gap),
                ]),
                None => cells.extend(std::iter::repeat_n(String::new(), MC_COLUMNS.len())),
            }
        }
        cells
    }
}

/// Formats `x` with `digits` significant digits, fixed-point for moderate
/// magnitudes and scientific otherwise. Independent of locale.
pub fn format_significant(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{:.*e}", digits - 1, x);
    let exp: i32 = sci[sci.find('e').unwrap() + 1..].parse().unwrap();
    if (-3..digits as i32).contains(&exp) {
        format!("{:.*}", (digits as i32 - 1 - exp) as usize, x)
    } else {
        sci
    }
}

fn etendue_for(config: &ScenarioConfig, geometry: &SensorGeometry) -> Result<EtendueResult> {
    match &config.etendue {
        EtendueSourceConfig::SensorForm => {
            reduced_sensor_factor(geometry.pixel_pitch(), geometry.f_number())
        }
        EtendueSourceConfig::SceneForm {
            pupil_diameter,
            ifov,
        } => reduced_scene_factor(Length::new(*pupil_diameter), Angle::new(*ifov)),
        EtendueSourceConfig::Paraxial {
            projected_area,
            solid_angle,
        } => paraxial_etendue(Area::new(*projected_area), SolidAngle::new(*solid_angle)),
        EtendueSourceConfig::Quadrature { patch, pupil, spec } => {
            quadrature_etendue(patch, pupil, spec)
        }
    }
}

/// Mode count used for sampling: N_osc rounded to the nearest integer, at least 1.
pub fn simulation_modes(n_osc: f64) -> u64 {
    (n_osc.round() as u64).max(1)
}

/// Runs the full analytic chain (and Monte Carlo, if configured) for one point.
pub fn run_scenario(config: &ScenarioConfig) -> Result<ReportRow> {
    let geometry = config.sensor.geometry()?;
    let scenario = config.scenario.scenario()?;
    let etendue = etendue_for(config, &geometry)?;
    let coherence = effective_coherence_scale(scenario.lambda_meas(), &geometry)?;
    let budget = mode_count(
        &etendue,
        scenario.lambda_meas(),
        &geometry,
        config.coherence_policy,
    )?;
    let budget = effective_modes(&budget, &scenario);
    let occ = bose_einstein_occupancy(scenario.lambda_meas(), scenario.temperature())?;
    let n_ph = photon_number(&budget, &occ)?;
    let stats = PhotonStatisticsSummary::from_pipeline(&budget, n_ph)?;
    let flux = scenario
        .radiance()
        .map(|l| pixel_flux(l, &etendue))
        .transpose()?;

    let mc = match &config.mc {
        None => None,
        Some(mc) => {
            let modes = mc.modes.unwrap_or_else(|| simulation_modes(budget.n_osc));
            let distribution = mc.distribution.with_occupancy(occ.n_bar);
            let spec = SamplingSpec::new(distribution, modes, mc.trials, mc.seed)?;
            let summary = simulate_pixel(&spec)?;
            Some(McColumns {
                mc_distribution: distribution.name().to_string(),
                mc_modes: modes,
                mc_trials: mc.trials,
                mc_seed: mc.seed,
                mc_mean: summary.empirical_mean,
                mc_variance: summary.empirical_variance,
                mc_snr: summary.empirical_snr,
                mc_theory_mean: summary.theory_mean,
                mc_theory_variance: summary.theory_variance,
                mc_shot_gap: shot_limit_gap(&summary).ok(),
            })
        }
    };

    Ok(ReportRow {
        a_pix: config.sensor.a_pix,
        f_number: config.sensor.f_number,
        lambda_meas: config.scenario.lambda_meas,
        temperature: config.scenario.temperature,
        eta_sys: scenario.eta_sys(),
        n_pol: scenario.n_pol(),
        dnu_tau: scenario.dnu_tau(),
        radiance: scenario.radiance().map(|l| l.value()),
        coherence_policy: config.coherence_policy.as_str().to_string(),
        etendue_source: etendue.source.as_str().to_string(),
        f_reduced: etendue.reduced.value(),
        f_full: etendue.full.value(),
        f_error_estimate: etendue.error_estimate.map(|e| e.value()),
        lambda_pix: coherence.lambda_pix.value(),
        regime: coherence.regime.as_str().to_string(),
        lambda_used: budget.lambda_used.value(),
        n_osc: budget.n_osc,
        fractional_mode: stats.fractional_mode_flag,
        n_modes_eff: budget.n_modes_eff.unwrap_or(0.0),
        n_bar: occ.n_bar,
        n_ph: stats.n_ph,
        sigma_n: stats.sigma_n,
        snr_fund: stats.snr_fund,
        pixel_flux: flux.map(|p| p.value()),
        mc,
    })
}

/// One row per sweep point, in axis order. Without a sweep axis this is a
/// single-row run.
pub fn run_sweep(config: &ScenarioConfig) -> Result<Vec<ReportRow>> {
    let Some(axis) = &config.sweep else {
        return Ok(vec![run_scenario(config)?]);
    };
    axis.values
        .par_iter()
        .map(|&v| {
            let mut point = config.clone();
            axis.variable.apply(&mut point, v);
            point.sweep = None;
            run_scenario(&point)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Table1Row {
    /// Wavelength, m.
    pub lambda: f64,
    /// λ², m².
    pub lambda_sq: f64,
    pub n_osc: f64,
}

/// Mode counts for the fixed 2.27e-10 m²·sr étendue at five wavelengths,
/// dividing by λ² of the wavelength itself.
pub fn reproduce_table1() -> Vec<Table1Row> {
    let etendue = paraxial_etendue(Area::new(TABLE1_ETENDUE), SolidAngle::new(1.0))
        .expect("fixed étendue is valid");
    // the raw-wavelength policy never consults the geometry
    let geometry = SensorGeometry::new(Length::from_micrometers(17.0), 1.0)
        .expect("fixed geometry is valid");
    TABLE1_WAVELENGTHS_UM
        .iter()
        .map(|&um| {
            let lambda = Length::from_micrometers(um);
            let budget = mode_count(
                &etendue,
                lambda,
                &geometry,
                CoherencePolicy::RawMeasurementWavelength,
            )
            .expect("fixed inputs are valid");
            Table1Row {
                lambda: lambda.value(),
                lambda_sq: lambda.squared().value(),
                n_osc: budget.n_osc,
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
    Markdown,
}

impl Format {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "csv" => Some(Format::Csv),
            "json" => Some(Format::Json),
            "md" | "markdown" => Some(Format::Markdown),
            _ => None,
        }
    }
}

fn render_table<T: Serialize>(
    header: &[&str],
    records: &[Vec<String>],
    json: &[T],
    format: Format,
) -> Result<Vec<u8>> {
    if records.is_empty() {
        return Err(Error::Usage("nothing to render: no rows".into()));
    }
    match format {
        Format::Csv => {
            let mut w = csv::WriterBuilder::new()
                .terminator(csv::Terminator::Any(b'\n'))
                .from_writer(Vec::new());
            let io = |e: csv::Error| Error::Usage(format!("csv encoding failed: {e}"));
            w.write_record(header).map_err(io)?;
            for r in records {
                w.write_record(r).map_err(io)?;
            }
            w.into_inner()
                .map_err(|e| Error::Usage(format!("csv encoding failed: {e}")))
        }
        Format::Json => {
            let mut out = serde_json::to_vec_pretty(json)
                .map_err(|e| Error::Usage(format!("json encoding failed: {e}")))?;
            out.push(b'\n');
            Ok(out)
        }
        Format::Markdown => {
            let mut s = String::new();
            s.push_str(&format!("| {} |\n", header.join(" | ")));
            s.push_str(&format!("|{}\n", "---|".repeat(header.len())));
            for r in records {
                let escaped: Vec<String> = r.iter().map(|c| c.replace('|', "\\|")).collect();
                s.push_str(&format!("| {} |\n", escaped.join(" | ")));
            }
            Ok(s.into_bytes())
        }
    }
}

/// Renders report rows. Monte Carlo columns are appended when any row has them.
pub fn render(rows: &[ReportRow], format: Format) -> Result<Vec<u8>> {
    let with_mc = rows.iter().any(|r| r.mc.is_some());
    let records: Vec<Vec<String>> = rows.iter().map(|r| r.cells(with_mc)).collect();
    render_table(&report_columns(with_mc), &records, rows, format)
}

pub fn render_table1(rows: &[Table1Row], format: Format) -> Result<Vec<u8>> {
    let records: Vec<Vec<String>> = rows
        .iter()
        .map(|r| vec![num(r.lambda), num(r.lambda_sq), num(r.n_osc)])
        .collect();
    render_table(&["lambda", "lambda_sq", "n_osc"], &records, rows, format)
}

#[derive(Debug, Clone, Serialize)]
struct ConstantRow {
    name: &'static str,
    value: f64,
    unit: &'static str,
}

pub fn render_constants(format: Format) -> Result<Vec<u8>> {
    let rows: Vec<ConstantRow> = PhysicalConstants::SI
        .entries()
        .iter()
        .map(|&(name, value, unit)| ConstantRow { name, value, unit })
        .collect();
    // constants are printed at full precision
    let records: Vec<Vec<String>> = rows
        .iter()
        .map(|r| vec![r.name.to_string(), format!("{:e}", r.value), r.unit.to_string()])
        .collect();
    render_table(&["name", "value", "unit"], &records, &rows, format)
}
