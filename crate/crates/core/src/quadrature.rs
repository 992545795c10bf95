//! Direct numerical evaluation of the pixel étendue integral
//!
//! ```text
//! F = ∬_A ∬_Ω(r) cos θ dΩ dA
//! ```
//!
//! over a planar scene footprint and the circular entrance pupil that bounds
//! the acceptance cone seen from each footprint point.
//!
//! Coordinates: the footprint is centred at the origin, the line of sight is
//! +z, and the pupil disc lies in the plane z = R with its normal along +z.
//! A tilted footprint is rotated about the y axis. For a footprint point r
//! and pupil point p, with d = p − r,
//!
//! ```text
//! cos θ dΩ = (d·n / |d|) · (d_z / |d|³) dA_pupil
//! ```
//!
//! where d_z/|d|³ dA_pupil is the exact solid-angle element of the pupil
//! patch and d·n/|d| is the incidence cosine at the footprint.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_positive, Error, Result};
use crate::etendue::{EtendueResult, EtendueSource, Warning, PARAXIAL_HALF_ANGLE_LIMIT};
use crate::quantities::{Angle, Area, Etendue, Length};

/// Refinement doublings allowed after the first evaluation.
pub const MAX_REFINEMENTS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum FootprintShape {
    Rectangle { width: Length, height: Length },
    Disc { radius: Length },
}

impl FootprintShape {
    pub fn area(&self) -> Area {
        match *self {
            FootprintShape::Rectangle { width, height } => width * height,
            FootprintShape::Disc { radius } => radius.squared() * PI,
        }
    }

    /// Largest distance from the centre to the footprint edge.
    fn extent(&self) -> f64 {
        match *self {
            FootprintShape::Rectangle { width, height } => {
                0.5 * width.value().hypot(height.value())
            }
            FootprintShape::Disc { radius } => radius.value(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FootprintPatch {
    shape: FootprintShape,
    distance: Length,
    tilt: Angle,
}

impl FootprintPatch {
    pub fn new(shape: FootprintShape, distance: Length, tilt: Angle) -> Result<Self> {
        match shape {
            FootprintShape::Rectangle { width, height } => {
                ensure_positive("width", width.value())?;
                ensure_positive("height", height.value())?;
            }
            FootprintShape::Disc { radius } => ensure_positive("radius", radius.value())?,
        }
        ensure_positive("distance", distance.value())?;
        let t = tilt.value();
        if !(0.0..PI / 2.0).contains(&t) {
            return Err(Error::validation(
                "tilt",
                format!("must lie in [0, π/2), got {t}"),
            ));
        }
        Ok(Self {
            shape,
            distance,
            tilt,
        })
    }

    pub fn shape(&self) -> FootprintShape {
        self.shape
    }

    pub fn distance(&self) -> Length {
        self.distance
    }

    pub fn tilt(&self) -> Angle {
        self.tilt
    }

    pub fn area(&self) -> Area {
        self.shape.area()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PupilDisc {
    diameter: Length,
    offset: (Length, Length),
}

impl PupilDisc {
    pub fn new(diameter: Length, offset: (Length, Length)) -> Result<Self> {
        ensure_positive("pupil_diameter", diameter.value())?;
        if !(offset.0.value().is_finite() && offset.1.value().is_finite()) {
            return Err(Error::validation("pupil_offset", "must be finite"));
        }
        Ok(Self { diameter, offset })
    }

    pub fn on_axis(diameter: Length) -> Result<Self> {
        Self::new(diameter, (Length::new(0.0), Length::new(0.0)))
    }

    pub fn diameter(&self) -> Length {
        self.diameter
    }

    pub fn offset(&self) -> (Length, Length) {
        self.offset
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum QuadratureRule {
    /// Tensor-product Gauss–Legendre with `order` nodes per dimension.
    GaussLegendreTensor { order: usize },
    /// Midpoint rule with `n_area` nodes per footprint dimension and
    /// `n_angle` per pupil dimension.
    MidpointGrid { n_area: usize, n_angle: usize },
}

impl QuadratureRule {
    /// The same rule with every node count doubled.
    pub fn refined(self) -> Self {
        match self {
            QuadratureRule::GaussLegendreTensor { order } => {
                QuadratureRule::GaussLegendreTensor { order: order * 2 }
            }
            QuadratureRule::MidpointGrid { n_area, n_angle } => QuadratureRule::MidpointGrid {
                n_area: n_area * 2,
                n_angle: n_angle * 2,
            },
        }
    }

    fn area_nodes(self) -> (Rule1d, usize) {
        match self {
            QuadratureRule::GaussLegendreTensor { order } => (Rule1d::GaussLegendre, order),
            QuadratureRule::MidpointGrid { n_area, .. } => (Rule1d::Midpoint, n_area),
        }
    }

    fn angle_nodes(self) -> (Rule1d, usize) {
        match self {
            QuadratureRule::GaussLegendreTensor { order } => (Rule1d::GaussLegendre, order),
            QuadratureRule::MidpointGrid { n_angle, .. } => (Rule1d::Midpoint, n_angle),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    rule: QuadratureRule,
    target_rel_tol: f64,
}

impl QuadratureSpec {
    pub fn new(rule: QuadratureRule, target_rel_tol: f64) -> Result<Self> {
        match rule {
            QuadratureRule::GaussLegendreTensor { order } if order < 2 => {
                return Err(Error::validation("order", format!("must be >= 2, got {order}")));
            }
            QuadratureRule::MidpointGrid { n_area, n_angle } if n_area < 1 || n_angle < 1 => {
                return Err(Error::validation(
                    "n_area",
                    "midpoint node counts must be >= 1",
                ));
            }
            _ => {}
        }
        ensure_positive("target_rel_tol", target_rel_tol)?;
        Ok(Self {
            rule,
            target_rel_tol,
        })
    }

    pub fn gauss_legendre(order: usize, target_rel_tol: f64) -> Result<Self> {
        Self::new(QuadratureRule::GaussLegendreTensor { order }, target_rel_tol)
    }

    pub fn rule(&self) -> QuadratureRule {
        self.rule
    }

    pub fn target_rel_tol(&self) -> f64 {
        self.target_rel_tol
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Rule1d {
    GaussLegendre,
    Midpoint,
}

/// Gauss–Legendre nodes and weights on [-1, 1], ascending.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    assert!(n >= 1, "Gauss–Legendre order must be positive");
    let mut out = vec![(0.0, 0.0); n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi initial guess, then Newton on P_n
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= 1e-16 * x.abs().max(1.0) {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out[n - 1 - i] = (x, w);
        out[i] = (-x, w);
    }
    if n % 2 == 1 {
        out[n / 2].0 = 0.0;
    }
    out
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let n = n as f64;
    let d = n * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

fn nodes_on(rule: Rule1d, n: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    match rule {
        Rule1d::GaussLegendre => gauss_legendre(n)
            .into_iter()
            .map(|(x, w)| (mid + half * x, half * w))
            .collect(),
        Rule1d::Midpoint => {
            let h = (b - a) / n as f64;
            (0..n).map(|i| (a + (i as f64 + 0.5) * h, h)).collect()
        }
    }
}

/// Neumaier-compensated sum in iteration order.
pub(crate) fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut c = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            c += (sum - t) + v;
        } else {
            c += (v - t) + sum;
        }
        sum = t;
    }
    sum + c
}

/// Weighted footprint nodes as (x, y, z, weight) in world coordinates.
fn footprint_nodes(patch: &FootprintPatch, rule: QuadratureRule) -> Vec<[f64; 4]> {
    let (kind, n) = rule.area_nodes();
    let local: Vec<(f64, f64, f64)> = match patch.shape {
        FootprintShape::Rectangle { width, height } => {
            let (hw, hh) = (0.5 * width.value(), 0.5 * height.value());
            let us = nodes_on(kind, n, -hw, hw);
            let vs = nodes_on(kind, n, -hh, hh);
            us.iter()
                .flat_map(|&(u, wu)| vs.iter().map(move |&(v, wv)| (u, v, wu * wv)))
                .collect()
        }
        FootprintShape::Disc { radius } => polar_nodes(kind, n, radius.value()),
    };
    let (sin_t, cos_t) = patch.tilt.value().sin_cos();
    local
        .into_iter()
        .map(|(u, v, w)| [u * cos_t, v, u * sin_t, w])
        .collect()
}

/// Polar nodes (x, y, weight) over a disc, Jacobian included.
fn polar_nodes(kind: Rule1d, n: usize, radius: f64) -> Vec<(f64, f64, f64)> {
    let rs = nodes_on(kind, n, 0.0, radius);
    let phis = nodes_on(kind, n, 0.0, 2.0 * PI);
    rs.iter()
        .flat_map(|&(r, wr)| {
            phis.iter().map(move |&(phi, wphi)| {
                let (s, c) = phi.sin_cos();
                (r * c, r * s, r * wr * wphi)
            })
        })
        .collect()
}

fn check_geometry(patch: &FootprintPatch, pupil: &PupilDisc) -> Result<()> {
    let (sin_t, cos_t) = patch.tilt.value().sin_cos();
    let r = patch.distance.value();
    let rho = 0.5 * pupil.diameter.value();
    // the pupil must sit entirely in front of the footprint plane
    let worst_x = pupil.offset.0.value().abs() + rho;
    if worst_x * sin_t >= r * cos_t {
        return Err(Error::validation(
            "pupil",
            "pupil disc intersects or lies behind the footprint plane",
        ));
    }
    if patch.shape.extent() * sin_t >= r {
        return Err(Error::validation(
            "footprint",
            "tilted footprint reaches the pupil plane",
        ));
    }
    Ok(())
}

/// One evaluation of the étendue integral with a fixed rule.
pub fn evaluate_rule(
    patch: &FootprintPatch,
    pupil: &PupilDisc,
    rule: QuadratureRule,
) -> Result<Etendue> {
    check_geometry(patch, pupil)?;
    let outer = footprint_nodes(patch, rule);
    let (kind, n) = rule.angle_nodes();
    let (ox, oy) = (pupil.offset.0.value(), pupil.offset.1.value());
    let inner: Vec<(f64, f64, f64)> = polar_nodes(kind, n, 0.5 * pupil.diameter.value())
        .into_iter()
        .map(|(x, y, w)| (x + ox, y + oy, w))
        .collect();
    let (sin_t, cos_t) = patch.tilt.value().sin_cos();
    let normal = [-sin_t, 0.0, cos_t];
    let pupil_z = patch.distance.value();

    // collect preserves node order, so the final sum is reproducible
    let per_node: Vec<f64> = outer
        .par_iter()
        .map(|&[x, y, z, w]| {
            let dz = pupil_z - z;
            let values = inner.iter().map(|&(px, py, wp)| {
                let (dx, dy) = (px - x, py - y);
                let d2 = dx * dx + dy * dy + dz * dz;
                let along_normal = dx * normal[0] + dy * normal[1] + dz * normal[2];
                wp * along_normal * dz / (d2 * d2)
            });
            w * compensated_sum(values)
        })
        .collect();
    Ok(Etendue::new(compensated_sum(per_node)))
}

/// |I(2p) − I(p)| for the given starting rule.
pub fn refinement_error_estimate(
    patch: &FootprintPatch,
    pupil: &PupilDisc,
    rule: QuadratureRule,
) -> Result<Etendue> {
    let coarse = evaluate_rule(patch, pupil, rule)?;
    let fine = evaluate_rule(patch, pupil, rule.refined())?;
    Ok((fine - coarse).abs())
}

/// Integrates the étendue of `patch` through `pupil`, doubling the node
/// count until two successive estimates agree to `spec.target_rel_tol`.
pub fn quadrature_etendue(
    patch: &FootprintPatch,
    pupil: &PupilDisc,
    spec: &QuadratureSpec,
) -> Result<EtendueResult> {
    let mut rule = spec.rule;
    let mut previous = evaluate_rule(patch, pupil, rule)?;
    let mut achieved = f64::INFINITY;
    let mut best = previous;
    for _ in 0..MAX_REFINEMENTS {
        rule = rule.refined();
        let current = evaluate_rule(patch, pupil, rule)?;
        let diff = (current - previous).abs();
        achieved = diff.value() / current.value().abs();
        best = current;
        if achieved <= spec.target_rel_tol {
            let mut result = EtendueResult::from_full(current, EtendueSource::Quadrature);
            result.error_estimate = Some(diff);
            let half_angle = pupil_half_angle(patch, pupil);
            if half_angle > PARAXIAL_HALF_ANGLE_LIMIT {
                result.warn(Warning::NonParaxial {
                    what: "pupil half-angle",
                    half_angle,
                });
            }
            return Ok(result);
        }
        previous = current;
    }
    Err(Error::Convergence {
        best: best.value(),
        achieved,
        target: spec.target_rel_tol,
    })
}

/// Pupil half-angle as seen from the footprint centre.
fn pupil_half_angle(patch: &FootprintPatch, pupil: &PupilDisc) -> f64 {
    let (ox, oy) = (pupil.offset.0.value(), pupil.offset.1.value());
    let lateral = ox.hypot(oy) + 0.5 * pupil.diameter.value();
    lateral.atan2(patch.distance.value())
}
