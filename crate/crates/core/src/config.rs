//! Scenario configuration files.
//!
//! TOML, fixed SI units, no unit suffixes. Every error names the dotted key
//! path it concerns and, where the key appears in the text, its line and
//! column. See `configs/` in this crate for annotated examples.

use std::collections::HashMap;
use std::fmt;
use std::ops::Range;

use serde::Serialize;
use thiserror::Error;
use toml::de::{DeTable, DeValue};
use toml::{Table, Value};

use crate::error::Error as CrateError;
use crate::mc::PhotonDistribution;
use crate::photon::CoherencePolicy;
use crate::quadrature::{FootprintPatch, FootprintShape, PupilDisc, QuadratureRule, QuadratureSpec};
use crate::quantities::{Angle, Length, Radiance, Temperature};
use crate::sensor::{RadiometricScenario, SensorGeometry};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ConfigErrorKind {
    Syntax,
    UnknownKey,
    MissingKey,
    OutOfRange,
    WrongType,
    Conflict,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub struct ConfigError {
    pub kind: ConfigErrorKind,
    /// Dotted key path, e.g. `sensor.f_number`.
    pub key: String,
    pub line: Option<usize>,
    pub column: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error at `{}`", self.key)?;
        match (self.line, self.column) {
            (Some(l), Some(c)) => write!(f, " (line {l}, column {c})")?,
            (Some(l), None) => write!(f, " (line {l})")?,
            _ => {}
        }
        write!(f, ": {}", self.message)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SensorFields {
    pub a_pix: f64,
    pub f_number: f64,
    pub focal_length: Option<f64>,
    pub pupil_diameter: Option<f64>,
    pub ifov: Option<f64>,
}

impl SensorFields {
    pub fn geometry(&self) -> crate::Result<SensorGeometry> {
        let mut g = SensorGeometry::new(Length::new(self.a_pix), self.f_number)?;
        if let Some(f) = self.focal_length {
            g = g.with_focal_length(Length::new(f))?;
        }
        if let Some(d) = self.pupil_diameter {
            g = g.with_pupil_diameter(Length::new(d))?;
        }
        if let Some(phi) = self.ifov {
            g = g.with_ifov(Angle::new(phi))?;
        }
        Ok(g)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScenarioFields {
    pub lambda_meas: f64,
    pub temperature: f64,
    pub bandwidth: f64,
    pub integration_time: f64,
    pub eta_sys: f64,
    pub n_pol: u8,
    pub radiance: Option<f64>,
}

impl ScenarioFields {
    pub fn scenario(&self) -> crate::Result<RadiometricScenario> {
        let mut s = RadiometricScenario::new(
            Length::new(self.lambda_meas),
            Temperature::new(self.temperature),
        )?
        .with_bandwidth(self.bandwidth)?
        .with_integration_time(self.integration_time)?
        .with_efficiency(self.eta_sys)?
        .with_polarizations(self.n_pol)?;
        if let Some(l) = self.radiance {
            s = s.with_radiance(Radiance::new(l))?;
        }
        Ok(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum EtendueSourceConfig {
    SensorForm,
    SceneForm {
        pupil_diameter: f64,
        ifov: f64,
    },
    Paraxial {
        projected_area: f64,
        solid_angle: f64,
    },
    Quadrature {
        patch: FootprintPatch,
        pupil: PupilDisc,
        spec: QuadratureSpec,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum McDistribution {
    /// Bose–Einstein with the scenario's occupancy.
    Thermal,
    /// Poisson with the same mean per mode as the thermal case.
    Coherent,
    Fock { n: u64 },
}

impl McDistribution {
    pub fn with_occupancy(self, n_bar: f64) -> PhotonDistribution {
        match self {
            McDistribution::Thermal => PhotonDistribution::Thermal { n_bar },
            McDistribution::Coherent => PhotonDistribution::Coherent { mean: n_bar },
            McDistribution::Fock { n } => PhotonDistribution::Fock { n },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McConfig {
    pub distribution: McDistribution,
    /// Explicit mode count; otherwise N_osc rounded to the nearest integer ≥ 1.
    pub modes: Option<u64>,
    pub trials: u64,
    pub seed: u64,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            distribution: McDistribution::Thermal,
            modes: None,
            trials: 100_000,
            seed: 0,
        }
    }
}

/// Scalar inputs a sweep may vary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVariable {
    PixelPitch,
    FNumber,
    LambdaMeas,
    Temperature,
    EtaSys,
    Bandwidth,
    IntegrationTime,
    Radiance,
}

impl SweepVariable {
    pub const ALL: [(&'static str, SweepVariable); 8] = [
        ("sensor.a_pix", SweepVariable::PixelPitch),
        ("sensor.f_number", SweepVariable::FNumber),
        ("scenario.lambda_meas", SweepVariable::LambdaMeas),
        ("scenario.temperature", SweepVariable::Temperature),
        ("scenario.eta_sys", SweepVariable::EtaSys),
        ("scenario.bandwidth", SweepVariable::Bandwidth),
        ("scenario.integration_time", SweepVariable::IntegrationTime),
        ("scenario.radiance", SweepVariable::Radiance),
    ];

    pub fn parse(name: &str) -> Option<Self> {
        Self::ALL.iter().find(|(n, _)| *n == name).map(|&(_, v)| v)
    }

    pub fn key(&self) -> &'static str {
        Self::ALL.iter().find(|(_, v)| v == self).map(|(n, _)| *n).unwrap()
    }

    /// Writes `value` into the matching field of `config`.
    pub fn apply(&self, config: &mut ScenarioConfig, value: f64) {
        match self {
            SweepVariable::PixelPitch => config.sensor.a_pix = value,
            SweepVariable::FNumber => config.sensor.f_number = value,
            SweepVariable::LambdaMeas => config.scenario.lambda_meas = value,
            SweepVariable::Temperature => config.scenario.temperature = value,
            SweepVariable::EtaSys => config.scenario.eta_sys = value,
            SweepVariable::Bandwidth => config.scenario.bandwidth = value,
            SweepVariable::IntegrationTime => config.scenario.integration_time = value,
            SweepVariable::Radiance => config.scenario.radiance = Some(value),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spacing {
    Linear,
    Log,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepAxis {
    pub variable: SweepVariable,
    /// Points in axis order.
    pub values: Vec<f64>,
}

impl SweepAxis {
    pub fn generate(start: f64, stop: f64, count: usize, spacing: Spacing) -> Vec<f64> {
        if count == 1 {
            return vec![start];
        }
        let last = (count - 1) as f64;
        (0..count)
            .map(|i| {
                if i == 0 {
                    return start;
                }
                if i == count - 1 {
                    return stop;
                }
                let t = i as f64 / last;
                match spacing {
                    Spacing::Linear => start + (stop - start) * t,
                    Spacing::Log => (start.ln() + (stop.ln() - start.ln()) * t).exp(),
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub sensor: SensorFields,
    pub scenario: ScenarioFields,
    pub etendue: EtendueSourceConfig,
    pub coherence_policy: CoherencePolicy,
    pub mc: Option<McConfig>,
    pub sweep: Option<SweepAxis>,
}

impl ScenarioConfig {
    /// A sensor-form configuration with all defaults applied.
    pub fn minimal(a_pix: f64, f_number: f64, lambda_meas: f64, temperature: f64) -> Self {
        Self {
            sensor: SensorFields {
                a_pix,
                f_number,
                focal_length: None,
                pupil_diameter: None,
                ifov: None,
            },
            scenario: ScenarioFields {
                lambda_meas,
                temperature,
                bandwidth: 1.0,
                integration_time: 1.0,
                eta_sys: 1.0,
                n_pol: 1,
                radiance: None,
            },
            etendue: EtendueSourceConfig::SensorForm,
            coherence_policy: CoherencePolicy::MaxRule,
            mc: None,
            sweep: None,
        }
    }
}

/// Byte spans of every key and value in the document, by dotted path.
struct SpanIndex<'a> {
    text: &'a str,
    spans: HashMap<String, Range<usize>>,
}

impl<'a> SpanIndex<'a> {
    fn build(text: &'a str) -> Self {
        let mut spans = HashMap::new();
        if let Ok(doc) = DeTable::parse(text) {
            collect_spans("", doc.get_ref(), &mut spans);
        }
        Self { text, spans }
    }

    fn position(&self, path: &str) -> (Option<usize>, Option<usize>) {
        // fall back to the nearest enclosing table
        let mut p = path;
        loop {
            if let Some(span) = self.spans.get(p) {
                let (l, c) = line_col(self.text, span.start);
                return (Some(l), Some(c));
            }
            match p.rfind('.') {
                Some(i) => p = &p[..i],
                None => return (None, None),
            }
        }
    }

    fn error(&self, kind: ConfigErrorKind, key: &str, message: impl Into<String>) -> ConfigError {
        let (line, column) = self.position(key);
        ConfigError {
            kind,
            key: key.to_string(),
            line,
            column,
            message: message.into(),
        }
    }
}

fn collect_spans(prefix: &str, table: &DeTable<'_>, out: &mut HashMap<String, Range<usize>>) {
    for (key, value) in table.iter() {
        let path = if prefix.is_empty() {
            key.get_ref().to_string()
        } else {
            format!("{prefix}.{}", key.get_ref())
        };
        if let DeValue::Table(inner) = value.get_ref() {
            collect_spans(&path, inner, out);
        }
        out.entry(path).or_insert_with(|| key.span());
    }
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.rfind('\n').map_or(before.len(), |i| before.len() - i - 1) + 1;
    (line, col)
}

/// One table of the document with path-aware typed accessors.
struct Section<'t, 'i> {
    path: String,
    table: Option<&'t Table>,
    index: &'t SpanIndex<'i>,
}

impl<'t, 'i> Section<'t, 'i> {
    fn key(&self, name: &str) -> String {
        if self.path.is_empty() {
            name.to_string()
        } else {
            format!("{}.{name}", self.path)
        }
    }

    fn err(&self, kind: ConfigErrorKind, name: &str, msg: impl Into<String>) -> ConfigError {
        self.index.error(kind, &self.key(name), msg)
    }

    fn present(&self) -> bool {
        self.table.is_some()
    }

    fn has(&self, name: &str) -> bool {
        self.table.is_some_and(|t| t.contains_key(name))
    }

    fn only(&self, allowed: &[&str]) -> Result<(), ConfigError> {
        if let Some(t) = self.table {
            for k in t.keys() {
                if !allowed.contains(&k.as_str()) {
                    return Err(self.err(
                        ConfigErrorKind::UnknownKey,
                        k,
                        format!("unknown key; expected one of: {}", allowed.join(", ")),
                    ));
                }
            }
        }
        Ok(())
    }

    fn sub(&self, name: &str) -> Result<Section<'t, 'i>, ConfigError> {
        let table = match self.table.and_then(|t| t.get(name)) {
            None => None,
            Some(Value::Table(t)) => Some(t),
            Some(other) => {
                return Err(self.err(
                    ConfigErrorKind::WrongType,
                    name,
                    format!("expected a table, found {}", other.type_str()),
                ))
            }
        };
        Ok(Section {
            path: self.key(name),
            table,
            index: self.index,
        })
    }

    fn f64_opt(&self, name: &str) -> Result<Option<f64>, ConfigError> {
        match self.table.and_then(|t| t.get(name)) {
            None => Ok(None),
            Some(Value::Float(f)) => Ok(Some(*f)),
            Some(Value::Integer(i)) => Ok(Some(*i as f64)),
            Some(other) => Err(self.err(
                ConfigErrorKind::WrongType,
                name,
                format!("expected a number, found {}", other.type_str()),
            )),
        }
    }

    fn f64_req(&self, name: &str) -> Result<f64, ConfigError> {
        self.f64_opt(name)?
            .ok_or_else(|| self.err(ConfigErrorKind::MissingKey, name, "required key is missing"))
    }

    fn u64_opt(&self, name: &str) -> Result<Option<u64>, ConfigError> {
        match self.table.and_then(|t| t.get(name)) {
            None => Ok(None),
            Some(Value::Integer(i)) if *i >= 0 => Ok(Some(*i as u64)),
            Some(Value::Integer(i)) => Err(self.err(
                ConfigErrorKind::OutOfRange,
                name,
                format!("must be a non-negative integer, got {i}"),
            )),
            Some(other) => Err(self.err(
                ConfigErrorKind::WrongType,
                name,
                format!("expected an integer, found {}", other.type_str()),
            )),
        }
    }

    fn str_opt(&self, name: &str) -> Result<Option<&'t str>, ConfigError> {
        match self.table.and_then(|t| t.get(name)) {
            None => Ok(None),
            Some(Value::String(s)) => Ok(Some(s.as_str())),
            Some(other) => Err(self.err(
                ConfigErrorKind::WrongType,
                name,
                format!("expected a string, found {}", other.type_str()),
            )),
        }
    }

    fn array_f64(&self, name: &str) -> Result<Option<Vec<f64>>, ConfigError> {
        match self.table.and_then(|t| t.get(name)) {
            None => Ok(None),
            Some(Value::Array(items)) => items
                .iter()
                .map(|v| match v {
                    Value::Float(f) => Ok(*f),
                    Value::Integer(i) => Ok(*i as f64),
                    other => Err(self.err(
                        ConfigErrorKind::WrongType,
                        name,
                        format!("expected numbers, found {}", other.type_str()),
                    )),
                })
                .collect::<Result<Vec<_>, _>>()
                .map(Some),
            Some(other) => Err(self.err(
                ConfigErrorKind::WrongType,
                name,
                format!("expected an array, found {}", other.type_str()),
            )),
        }
    }

    fn positive(&self, name: &str, v: f64) -> Result<f64, ConfigError> {
        if v.is_finite() && v > 0.0 {
            Ok(v)
        } else {
            Err(self.err(ConfigErrorKind::OutOfRange, name, format!("must be > 0, got {v}")))
        }
    }

    fn non_negative(&self, name: &str, v: f64) -> Result<f64, ConfigError> {
        if v.is_finite() && v >= 0.0 {
            Ok(v)
        } else {
            Err(self.err(ConfigErrorKind::OutOfRange, name, format!("must be >= 0, got {v}")))
        }
    }

    fn positive_req(&self, name: &str) -> Result<f64, ConfigError> {
        let v = self.f64_req(name)?;
        self.positive(name, v)
    }

    fn positive_opt(&self, name: &str) -> Result<Option<f64>, ConfigError> {
        self.f64_opt(name)?.map(|v| self.positive(name, v)).transpose()
    }
}

fn domain_error(index: &SpanIndex<'_>, section: &str, err: CrateError) -> ConfigError {
    match err {
        CrateError::Validation { field, reason } => {
            let key = match field.as_str() {
                "pixel_pitch" => "a_pix",
                other => other,
            };
            index.error(
                ConfigErrorKind::OutOfRange,
                &format!("{section}.{key}"),
                reason,
            )
        }
        CrateError::Config(c) => c,
        other => index.error(ConfigErrorKind::OutOfRange, section, other.to_string()),
    }
}

/// Parses and fully validates a scenario configuration.
pub fn parse_config(text: &str) -> Result<ScenarioConfig, ConfigError> {
    let root: Table = text.parse().map_err(|e: toml::de::Error| {
        let (line, column) = e
            .span()
            .map(|s| line_col(text, s.start))
            .map_or((None, None), |(l, c)| (Some(l), Some(c)));
        ConfigError {
            kind: ConfigErrorKind::Syntax,
            key: String::new(),
            line,
            column,
            message: e.message().to_string(),
        }
    })?;
    let index = SpanIndex::build(text);
    let top = Section {
        path: String::new(),
        table: Some(&root),
        index: &index,
    };
    top.only(&["sensor", "scenario", "etendue", "coherence_policy", "mc", "sweep"])?;

    let sensor = parse_sensor(&top.sub("sensor")?, &top)?;
    sensor
        .geometry()
        .map_err(|e| domain_error(&index, "sensor", e))?;
    let scenario = parse_scenario(&top.sub("scenario")?, &top)?;
    scenario
        .scenario()
        .map_err(|e| domain_error(&index, "scenario", e))?;

    let coherence_policy = match top.str_opt("coherence_policy")? {
        None => CoherencePolicy::MaxRule,
        Some(s) => CoherencePolicy::parse(s).ok_or_else(|| {
            top.err(
                ConfigErrorKind::OutOfRange,
                "coherence_policy",
                format!("expected \"max-rule\" or \"raw-lambda\", got {s:?}"),
            )
        })?,
    };

    let etendue = parse_etendue(&top.sub("etendue")?, &sensor)?;
    let mc = parse_mc(&top.sub("mc")?)?;
    let sweep = parse_sweep(&top.sub("sweep")?)?;

    Ok(ScenarioConfig {
        sensor,
        scenario,
        etendue,
        coherence_policy,
        mc,
        sweep,
    })
}

fn parse_sensor(s: &Section<'_, '_>, top: &Section<'_, '_>) -> Result<SensorFields, ConfigError> {
    if !s.present() {
        return Err(top.err(ConfigErrorKind::MissingKey, "sensor", "required table is missing"));
    }
    s.only(&["a_pix", "f_number", "focal_length", "pupil_diameter", "ifov"])?;
    Ok(SensorFields {
        a_pix: s.positive_req("a_pix")?,
        f_number: s.positive_req("f_number")?,
        focal_length: s.positive_opt("focal_length")?,
        pupil_diameter: s.positive_opt("pupil_diameter")?,
        ifov: s.positive_opt("ifov")?,
    })
}

fn parse_scenario(
    s: &Section<'_, '_>,
    top: &Section<'_, '_>,
) -> Result<ScenarioFields, ConfigError> {
    if !s.present() {
        return Err(top.err(ConfigErrorKind::MissingKey, "scenario", "required table is missing"));
    }
    s.only(&[
        "lambda_meas",
        "temperature",
        "bandwidth",
        "integration_time",
        "eta_sys",
        "n_pol",
        "radiance",
    ])?;
    let eta_sys = s.f64_opt("eta_sys")?.unwrap_or(1.0);
    if !(0.0..=1.0).contains(&eta_sys) {
        return Err(s.err(
            ConfigErrorKind::OutOfRange,
            "eta_sys",
            format!("must lie in [0, 1], got {eta_sys}"),
        ));
    }
    let n_pol = match s.u64_opt("n_pol")? {
        None => 1,
        Some(n @ 1..=2) => n as u8,
        Some(n) => {
            return Err(s.err(
                ConfigErrorKind::OutOfRange,
                "n_pol",
                format!("must be 1 or 2, got {n}"),
            ))
        }
    };
    let bandwidth = s.f64_opt("bandwidth")?.unwrap_or(1.0);
    let integration_time = s.f64_opt("integration_time")?.unwrap_or(1.0);
    let radiance = s.f64_opt("radiance")?;
    Ok(ScenarioFields {
        lambda_meas: s.positive_req("lambda_meas")?,
        temperature: s.positive_req("temperature")?,
        bandwidth: s.non_negative("bandwidth", bandwidth)?,
        integration_time: s.non_negative("integration_time", integration_time)?,
        eta_sys,
        n_pol,
        radiance: radiance.map(|l| s.non_negative("radiance", l)).transpose()?,
    })
}

fn parse_etendue(
    e: &Section<'_, '_>,
    sensor: &SensorFields,
) -> Result<EtendueSourceConfig, ConfigError> {
    const SOURCES: [&str; 4] = ["sensor", "scene", "paraxial", "quadrature"];
    e.only(&SOURCES)?;
    let present: Vec<&str> = SOURCES.iter().copied().filter(|k| e.has(k)).collect();
    if present.len() > 1 {
        return Err(e.err(
            ConfigErrorKind::Conflict,
            present[1],
            format!(
                "exactly one étendue source is allowed, found: {}",
                present.join(", ")
            ),
        ));
    }
    match present.first().copied() {
        None | Some("sensor") => {
            e.sub("sensor")?.only(&[])?;
            Ok(EtendueSourceConfig::SensorForm)
        }
        Some("scene") => {
            let s = e.sub("scene")?;
            s.only(&["pupil_diameter", "ifov"])?;
            let pupil_diameter = s
                .positive_opt("pupil_diameter")?
                .or(sensor.pupil_diameter)
                .ok_or_else(|| {
                    s.err(
                        ConfigErrorKind::MissingKey,
                        "pupil_diameter",
                        "needed here or as sensor.pupil_diameter",
                    )
                })?;
            let ifov = s.positive_opt("ifov")?.or(sensor.ifov).ok_or_else(|| {
                s.err(ConfigErrorKind::MissingKey, "ifov", "needed here or as sensor.ifov")
            })?;
            Ok(EtendueSourceConfig::SceneForm {
                pupil_diameter,
                ifov,
            })
        }
        Some("paraxial") => {
            let s = e.sub("paraxial")?;
            s.only(&["projected_area", "solid_angle"])?;
            Ok(EtendueSourceConfig::Paraxial {
                projected_area: s.positive_req("projected_area")?,
                solid_angle: s.positive_req("solid_angle")?,
            })
        }
        Some(_) => parse_quadrature(&e.sub("quadrature")?),
    }
}

fn parse_quadrature(q: &Section<'_, '_>) -> Result<EtendueSourceConfig, ConfigError> {
    q.only(&[
        "shape",
        "width",
        "height",
        "radius",
        "distance",
        "tilt",
        "pupil_diameter",
        "pupil_offset_x",
        "pupil_offset_y",
        "rule",
        "order",
        "n_area",
        "n_angle",
        "rel_tol",
    ])?;
    let shape = match q.str_opt("shape")?.unwrap_or("rectangle") {
        "rectangle" => FootprintShape::Rectangle {
            width: Length::new(q.positive_req("width")?),
            height: Length::new(q.positive_req("height")?),
        },
        "disc" => FootprintShape::Disc {
            radius: Length::new(q.positive_req("radius")?),
        },
        other => {
            return Err(q.err(
                ConfigErrorKind::OutOfRange,
                "shape",
                format!("expected \"rectangle\" or \"disc\", got {other:?}"),
            ))
        }
    };
    let distance = q.positive_req("distance")?;
    let tilt = q.f64_opt("tilt")?.unwrap_or(0.0);
    let patch = FootprintPatch::new(shape, Length::new(distance), Angle::new(tilt))
        .map_err(|e| domain_error(q.index, &q.path, e))?;
    let offset = (
        Length::new(q.f64_opt("pupil_offset_x")?.unwrap_or(0.0)),
        Length::new(q.f64_opt("pupil_offset_y")?.unwrap_or(0.0)),
    );
    let pupil = PupilDisc::new(Length::new(q.positive_req("pupil_diameter")?), offset)
        .map_err(|e| domain_error(q.index, &q.path, e))?;
    let rule = match q.str_opt("rule")?.unwrap_or("gauss-legendre") {
        "gauss-legendre" => QuadratureRule::GaussLegendreTensor {
            order: q.u64_opt("order")?.unwrap_or(16) as usize,
        },
        "midpoint" => QuadratureRule::MidpointGrid {
            n_area: q.u64_opt("n_area")?.unwrap_or(32) as usize,
            n_angle: q.u64_opt("n_angle")?.unwrap_or(32) as usize,
        },
        other => {
            return Err(q.err(
                ConfigErrorKind::OutOfRange,
                "rule",
                format!("expected \"gauss-legendre\" or \"midpoint\", got {other:?}"),
            ))
        }
    };
    let rel_tol = q.f64_opt("rel_tol")?.unwrap_or(1e-6);
    let spec =
        QuadratureSpec::new(rule, rel_tol).map_err(|e| domain_error(q.index, &q.path, e))?;
    Ok(EtendueSourceConfig::Quadrature { patch, pupil, spec })
}

fn parse_mc(m: &Section<'_, '_>) -> Result<Option<McConfig>, ConfigError> {
    if !m.present() {
        return Ok(None);
    }
    m.only(&["distribution", "modes", "trials", "seed", "fock_n"])?;
    let distribution = match m.str_opt("distribution")?.unwrap_or("thermal") {
        "thermal" => McDistribution::Thermal,
        "coherent" => McDistribution::Coherent,
        "fock" => McDistribution::Fock {
            n: m.u64_opt("fock_n")?.ok_or_else(|| {
                m.err(ConfigErrorKind::MissingKey, "fock_n", "required for a Fock distribution")
            })?,
        },
        other => {
            return Err(m.err(
                ConfigErrorKind::OutOfRange,
                "distribution",
                format!("expected \"thermal\", \"coherent\" or \"fock\", got {other:?}"),
            ))
        }
    };
    let defaults = McConfig::default();
    let modes = m.u64_opt("modes")?;
    if modes == Some(0) {
        return Err(m.err(ConfigErrorKind::OutOfRange, "modes", "must be >= 1"));
    }
    let trials = m.u64_opt("trials")?.unwrap_or(defaults.trials);
    if trials == 0 {
        return Err(m.err(ConfigErrorKind::OutOfRange, "trials", "must be >= 1"));
    }
    Ok(Some(McConfig {
        distribution,
        modes,
        trials,
        seed: m.u64_opt("seed")?.unwrap_or(defaults.seed),
    }))
}

fn parse_sweep(s: &Section<'_, '_>) -> Result<Option<SweepAxis>, ConfigError> {
    if !s.present() {
        return Ok(None);
    }
    s.only(&["variable", "start", "stop", "count", "spacing", "values"])?;
    let name = s
        .str_opt("variable")?
        .ok_or_else(|| s.err(ConfigErrorKind::MissingKey, "variable", "required key is missing"))?;
    let variable = SweepVariable::parse(name).ok_or_else(|| {
        let names: Vec<&str> = SweepVariable::ALL.iter().map(|(n, _)| *n).collect();
        s.err(
            ConfigErrorKind::OutOfRange,
            "variable",
            format!("{name:?} is not a sweepable scalar; expected one of: {}", names.join(", ")),
        )
    })?;
    let explicit = s.array_f64("values")?;
    let ranged = s.has("start") || s.has("stop") || s.has("count") || s.has("spacing");
    let values = match (explicit, ranged) {
        (Some(_), true) => {
            return Err(s.err(
                ConfigErrorKind::Conflict,
                "values",
                "give either `values` or `start`/`stop`/`count`, not both",
            ))
        }
        (Some(v), false) => v,
        (None, _) => {
            let start = s.f64_req("start")?;
            let stop = s.f64_opt("stop")?.unwrap_or(start);
            let count = s.u64_opt("count")?.unwrap_or(1) as usize;
            if count == 0 {
                return Err(s.err(ConfigErrorKind::OutOfRange, "count", "must be >= 1"));
            }
            let spacing = match s.str_opt("spacing")?.unwrap_or("linear") {
                "linear" => Spacing::Linear,
                "log" => {
                    s.positive("start", start)?;
                    s.positive("stop", stop)?;
                    Spacing::Log
                }
                other => {
                    return Err(s.err(
                        ConfigErrorKind::OutOfRange,
                        "spacing",
                        format!("expected \"linear\" or \"log\", got {other:?}"),
                    ))
                }
            };
            SweepAxis::generate(start, stop, count, spacing)
        }
    };
    if values.is_empty() {
        return Err(s.err(ConfigErrorKind::OutOfRange, "values", "sweep has no points"));
    }
    Ok(Some(SweepAxis { variable, values }))
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "\
[sensor]
a_pix = 17e-6
f_number = 1.0

[scenario]
lambda_meas = 10e-6
temperature = 300
";

    #[test]
    fn minimal_config_gets_defaults() {
        let c = parse_config(MINIMAL).unwrap();
        assert_eq!(c, ScenarioConfig::minimal(17e-6, 1.0, 10e-6, 300.0));
        assert_eq!(c.scenario.eta_sys, 1.0);
        assert_eq!(c.scenario.n_pol, 1);
        assert_eq!(c.scenario.bandwidth * c.scenario.integration_time, 1.0);
        assert_eq!(c.coherence_policy, CoherencePolicy::MaxRule);
    }

    #[test]
    fn negative_f_number_names_key_and_line() {
        let text = MINIMAL.replace("f_number = 1.0", "f_number = -1");
        let e = parse_config(&text).unwrap_err();
        assert_eq!(e.kind, ConfigErrorKind::OutOfRange);
        assert_eq!(e.key, "sensor.f_number");
        assert_eq!(e.line, Some(3));
        assert_eq!(e.column, Some(1));
        assert!(e.to_string().contains("sensor.f_number"));
    }

    #[test]
    fn unknown_and_missing_keys() {
        let e = parse_config(&format!("{MINIMAL}bogus = 1\n")).unwrap_err();
        assert_eq!(e.kind, ConfigErrorKind::UnknownKey);
        // a trailing bare key belongs to the last table
        assert_eq!(e.key, "scenario.bogus");
        assert_eq!(e.line, Some(8));

        let e = parse_config(&MINIMAL.replace("temperature = 300\n", "")).unwrap_err();
        assert_eq!(e.kind, ConfigErrorKind::MissingKey);
        assert_eq!(e.key, "scenario.temperature");
        assert_eq!(e.line, Some(5));

        let e = parse_config("[scenario]\nlambda_meas = 1e-5\ntemperature = 3\n").unwrap_err();
        assert_eq!(e.key, "sensor");
    }

    #[test]
    fn scene_and_sensor_blocks_conflict() {
        let text = format!("{MINIMAL}\n[etendue.sensor]\n\n[etendue.scene]\npupil_diameter = 0.017\nifov = 1e-3\n");
        let e = parse_config(&text).unwrap_err();
        assert_eq!(e.kind, ConfigErrorKind::Conflict);
        assert!(e.message.contains("scene"));
        assert!(e.message.contains("sensor"));
    }

    #[test]
    fn scene_block_falls_back_to_sensor_fields() {
        let text = MINIMAL.replace(
            "f_number = 1.0",
            "f_number = 1.0\nfocal_length = 0.017\npupil_diameter = 0.017\nifov = 1e-3",
        ) + "\n[etendue.scene]\n";
        let c = parse_config(&text).unwrap();
        assert_eq!(
            c.etendue,
            EtendueSourceConfig::SceneForm {
                pupil_diameter: 0.017,
                ifov: 1e-3
            }
        );
    }

    #[test]
    fn inconsistent_redundant_fields() {
        let text = MINIMAL.replace("f_number = 1.0", "f_number = 1.0\nfocal_length = 0.02\npupil_diameter = 0.01");
        let e = parse_config(&text).unwrap_err();
        assert_eq!(e.key, "sensor.f_number");
    }

    #[test]
    fn syntax_error_has_position() {
        let e = parse_config("[sensor\na_pix = 1").unwrap_err();
        assert_eq!(e.kind, ConfigErrorKind::Syntax);
        assert_eq!(e.line, Some(1));
    }

    #[test]
    fn wrong_type_is_reported() {
        let e = parse_config(&MINIMAL.replace("temperature = 300", "temperature = \"hot\"")).unwrap_err();
        assert_eq!(e.kind, ConfigErrorKind::WrongType);
        assert_eq!(e.key, "scenario.temperature");
    }

    #[test]
    fn sweep_axis_forms() {
        let c = parse_config(&format!(
            "{MINIMAL}\n[sweep]\nvariable = \"scenario.temperature\"\nstart = 100\nstop = 1000\ncount = 3\nspacing = \"log\"\n"
        ))
        .unwrap();
        let axis = c.sweep.unwrap();
        assert_eq!(axis.variable, SweepVariable::Temperature);
        assert_eq!(axis.values.len(), 3);
        assert!((axis.values[1] - 316.227_766_016_837_9).abs() < 1e-9);
        assert_eq!(axis.values[2], 1000.0);

        let e = parse_config(&format!("{MINIMAL}\n[sweep]\nvariable = \"sensor\"\nvalues = [1.0]\n"))
            .unwrap_err();
        assert_eq!(e.key, "sweep.variable");

        let e = parse_config(&format!(
            "{MINIMAL}\n[sweep]\nvariable = \"scenario.temperature\"\nvalues = [1.0]\nstart = 2\n"
        ))
        .unwrap_err();
        assert_eq!(e.kind, ConfigErrorKind::Conflict);
    }

    #[test]
    fn mc_block_defaults() {
        let c = parse_config(&format!("{MINIMAL}\n[mc]\nseed = 9\n")).unwrap();
        assert_eq!(
            c.mc,
            Some(McConfig {
                distribution: McDistribution::Thermal,
                modes: None,
                trials: 100_000,
                seed: 9
            })
        );
        let e = parse_config(&format!("{MINIMAL}\n[mc]\ndistribution = \"fock\"\n")).unwrap_err();
        assert_eq!(e.key, "mc.fock_n");
    }

    #[test]
    fn quadrature_block() {
        let c = parse_config(&format!(
            "{MINIMAL}\n[etendue.quadrature]\nwidth = 1e-3\nheight = 1e-3\ndistance = 1.0\npupil_diameter = 0.01\norder = 8\n"
        ))
        .unwrap();
        assert!(matches!(c.etendue, EtendueSourceConfig::Quadrature { .. }));
        let e = parse_config(&format!(
            "{MINIMAL}\n[etendue.quadrature]\nwidth = 1e-3\nheight = 1e-3\ndistance = 1.0\npupil_diameter = 0.01\ntilt = 2.0\n"
        ))
        .unwrap_err();
        assert_eq!(e.key, "etendue.quadrature.tilt");
    }
}
