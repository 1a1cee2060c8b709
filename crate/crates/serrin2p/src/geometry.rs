//! Star-shaped perturbed-disk geometry. Boundaries are radial graphs
//! r = 1 + g(theta) with g a trigonometric polynomial without constant term,
//! so the enclosed area, perimeter, outward normal and tangential Jacobian
//! all come from exact formulas evaluated with spectral accuracy:
//!
//!   J(theta)  = sqrt((1+g)^2 + g'^2),
//!   n(theta)  = [(1+g) e_r - g' e_theta] / J,
//!   area      = 1/2 int (1+g)^2,   perimeter = int J.
//!
//! Uniform-node trapezoid sums are used throughout; on periodic integrands
//! they converge faster than any power of the node count, so the collocation
//! grid of the configuration is already enough for quadrature at rounding
//! accuracy.

use serde::{Deserialize, Serialize};

use crate::config::TwoPhaseConfig;
use crate::error::{Error, Result};
use crate::fourier;

/// Symmetry class of a boundary perturbation. Even means g is a pure cosine
/// series, i.e. the shape is mirror symmetric about the horizontal axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    General,
    Even,
}

/// Boundary perturbation g(theta) = sum_{k=1}^{K} a_k cos k theta
/// + b_k sin k theta. Constructors keep the invariants (equal coefficient
/// lengths, finite entries, even parity implies vanishing sine part), and the
/// JSON form mirrors the internal one field for field.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BoundaryRepr", into = "BoundaryRepr")]
pub struct FourierBoundary {
    cos: Vec<f64>,
    sin: Vec<f64>,
    parity: Parity,
}

/// Wire format: {"K": .., "cos": [..], "sin": [..], "parity": "even"|"general"}.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BoundaryRepr {
    #[serde(rename = "K")]
    order: usize,
    cos: Vec<f64>,
    sin: Vec<f64>,
    parity: Parity,
}

impl TryFrom<BoundaryRepr> for FourierBoundary {
    type Error = String;

    fn try_from(repr: BoundaryRepr) -> std::result::Result<Self, String> {
        if repr.cos.len() != repr.order || repr.sin.len() != repr.order {
            return Err(format!(
                "coefficient lengths ({}, {}) disagree with K = {}",
                repr.cos.len(),
                repr.sin.len(),
                repr.order
            ));
        }
        if repr.cos.iter().chain(&repr.sin).any(|c| !c.is_finite()) {
            return Err("boundary coefficients must be finite".into());
        }
        if repr.parity == Parity::Even && repr.sin.iter().any(|&b| b != 0.0) {
            return Err("parity \"even\" requires an identically zero sine part".into());
        }
        Ok(FourierBoundary { cos: repr.cos, sin: repr.sin, parity: repr.parity })
    }
}

impl From<FourierBoundary> for BoundaryRepr {
    fn from(g: FourierBoundary) -> Self {
        BoundaryRepr { order: g.cos.len(), cos: g.cos, sin: g.sin, parity: g.parity }
    }
}

impl FourierBoundary {
    /// The unperturbed disk, carried at the given truncation order.
    pub fn zero(order: usize) -> Self {
        FourierBoundary { cos: vec![0.0; order], sin: vec![0.0; order], parity: Parity::Even }
    }

    /// Pure cosine perturbation (mirror-symmetric shape).
    pub fn even(cos: Vec<f64>) -> Self {
        let order = cos.len();
        FourierBoundary { cos, sin: vec![0.0; order], parity: Parity::Even }
    }

    pub fn general(cos: Vec<f64>, sin: Vec<f64>) -> Result<Self> {
        if cos.len() != sin.len() {
            return Err(Error::Geometry(format!(
                "cosine and sine coefficient lists must have equal length (got {} and {})",
                cos.len(),
                sin.len()
            )));
        }
        Ok(FourierBoundary { cos, sin, parity: Parity::General })
    }

    /// Single-mode perturbation amp * cos(k theta), padded to the requested
    /// order.
    pub fn mode(order: usize, k: usize, amp: f64) -> Result<Self> {
        if k < 1 || k > order {
            return Err(Error::Geometry(format!(
                "mode {k} does not fit in truncation order {order}"
            )));
        }
        let mut cos = vec![0.0; order];
        cos[k - 1] = amp;
        Ok(FourierBoundary::even(cos))
    }

    pub fn order(&self) -> usize {
        self.cos.len()
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn cos_coeffs(&self) -> &[f64] {
        &self.cos
    }

    pub fn sin_coeffs(&self) -> &[f64] {
        &self.sin
    }

    /// Coefficient of cos(k theta); zero outside the stored range (k is
    /// 1-based).
    pub fn cos_coeff(&self, k: usize) -> f64 {
        if k >= 1 && k <= self.cos.len() {
            self.cos[k - 1]
        } else {
            0.0
        }
    }

    pub fn sin_coeff(&self, k: usize) -> f64 {
        if k >= 1 && k <= self.sin.len() {
            self.sin[k - 1]
        } else {
            0.0
        }
    }

    pub fn value(&self, theta: f64) -> f64 {
        let mut acc = 0.0;
        for (i, (&a, &b)) in self.cos.iter().zip(&self.sin).enumerate() {
            let k = (i + 1) as f64;
            acc += a * (k * theta).cos() + b * (k * theta).sin();
        }
        acc
    }

    /// g'(theta), differentiated term by term.
    pub fn derivative(&self, theta: f64) -> f64 {
        let mut acc = 0.0;
        for (i, (&a, &b)) in self.cos.iter().zip(&self.sin).enumerate() {
            let k = (i + 1) as f64;
            acc += k * (b * (k * theta).cos() - a * (k * theta).sin());
        }
        acc
    }

    /// Sup norm of g, estimated on a sampling grid dense enough for the
    /// stored bandwidth.
    pub fn sup_norm(&self) -> f64 {
        let samples = 1024.max(8 * self.order());
        (0..samples)
            .map(|j| self.value(2.0 * std::f64::consts::PI * j as f64 / samples as f64).abs())
            .fold(0.0, f64::max)
    }

    /// Coefficients of the rotated shape theta -> g(theta - phi). Rotation
    /// mixes cosines into sines, so the result is general-parity.
    pub fn rotated(&self, phi: f64) -> Self {
        let mut cos = vec![0.0; self.cos.len()];
        let mut sin = vec![0.0; self.sin.len()];
        for i in 0..self.cos.len() {
            let k = (i + 1) as f64;
            let (s, c) = (k * phi).sin_cos();
            cos[i] = self.cos[i] * c - self.sin[i] * s;
            sin[i] = self.cos[i] * s + self.sin[i] * c;
        }
        FourierBoundary { cos, sin, parity: Parity::General }
    }

    /// g + scale * h, padded to the larger truncation order.
    pub fn add_scaled(&self, other: &FourierBoundary, scale: f64) -> Self {
        let order = self.order().max(other.order());
        let mut cos = vec![0.0; order];
        let mut sin = vec![0.0; order];
        for k in 1..=order {
            cos[k - 1] = self.cos_coeff(k) + scale * other.cos_coeff(k);
            sin[k - 1] = self.sin_coeff(k) + scale * other.sin_coeff(k);
        }
        let parity = if self.parity == Parity::Even && other.parity == Parity::Even {
            Parity::Even
        } else {
            Parity::General
        };
        FourierBoundary { cos, sin, parity }
    }

    pub fn scaled(&self, scale: f64) -> Self {
        FourierBoundary {
            cos: self.cos.iter().map(|a| a * scale).collect(),
            sin: self.sin.iter().map(|b| b * scale).collect(),
            parity: self.parity,
        }
    }
}

/// Values of some boundary quantity on the uniform collocation angles.
#[derive(Clone, Debug)]
pub struct BoundaryTrace {
    pub nodes: Vec<f64>,
    pub values: Vec<f64>,
}

/// Enclosed area, perimeter, and the constant c = -area/perimeter that any
/// solution of the overdetermined problem must take as its Neumann datum.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Measures {
    pub area: f64,
    pub perimeter: f64,
    pub c: f64,
}

/// Outward unit normals and tangential Jacobian on the collocation angles.
#[derive(Clone, Debug)]
pub struct NormalJacobian {
    pub nodes: Vec<f64>,
    pub normals: Vec<[f64; 2]>,
    pub jacobian: Vec<f64>,
}

/// Smallest clearance of the boundary over the guarded core, min(1+g) - (R +
/// margin), sampled densely.
fn min_clearance(cfg: &TwoPhaseConfig, g: &FourierBoundary) -> f64 {
    let samples = 4096.max(32 * g.order());
    let guard = cfg.core_radius + cfg.margin;
    (0..samples)
        .map(|j| 1.0 + g.value(2.0 * std::f64::consts::PI * j as f64 / samples as f64) - guard)
        .fold(f64::INFINITY, f64::min)
}

/// Check that the boundary stays outside the guarded core everywhere.
pub fn admissibility(cfg: &TwoPhaseConfig, g: &FourierBoundary) -> Result<()> {
    if g.cos.iter().chain(&g.sin).any(|c| !c.is_finite()) {
        return Err(Error::Geometry("boundary coefficients must be finite".into()));
    }
    let gap = min_clearance(cfg, g);
    if gap <= 0.0 {
        return Err(Error::Geometry(format!(
            "boundary comes within {:.3e} of the guarded core radius {} + margin {}",
            -gap, cfg.core_radius, cfg.margin
        )));
    }
    Ok(())
}

/// Cartesian point (1+g(theta)) (cos theta, sin theta), guarded pointwise
/// against collapsing onto the core.
pub fn boundary_point(cfg: &TwoPhaseConfig, g: &FourierBoundary, theta: f64) -> Result<[f64; 2]> {
    let r = 1.0 + g.value(theta);
    if r <= cfg.core_radius + cfg.margin {
        return Err(Error::Geometry(format!(
            "boundary radius {r} at theta = {theta} is inside the guarded core \
             (R + margin = {})",
            cfg.core_radius + cfg.margin
        )));
    }
    Ok([r * theta.cos(), r * theta.sin()])
}

/// Area, perimeter, and c = -area/perimeter via trapezoid sums on the
/// collocation angles.
pub fn measures(cfg: &TwoPhaseConfig, g: &FourierBoundary) -> Result<Measures> {
    admissibility(cfg, g)?;
    let nodes = fourier::nodes(cfg.collocation);
    let dtheta = 2.0 * std::f64::consts::PI / cfg.collocation as f64;
    let mut area = 0.0;
    let mut perimeter = 0.0;
    for &theta in &nodes {
        let r = 1.0 + g.value(theta);
        let dr = g.derivative(theta);
        area += 0.5 * r * r * dtheta;
        perimeter += (r * r + dr * dr).sqrt() * dtheta;
    }
    Ok(Measures { area, perimeter, c: -area / perimeter })
}

/// Outward unit normal and Jacobian J = sqrt((1+g)^2 + g'^2) at each
/// collocation angle.
pub fn normal_and_jacobian(cfg: &TwoPhaseConfig, g: &FourierBoundary) -> Result<NormalJacobian> {
    admissibility(cfg, g)?;
    let nodes = fourier::nodes(cfg.collocation);
    let mut normals = Vec::with_capacity(nodes.len());
    let mut jacobian = Vec::with_capacity(nodes.len());
    for &theta in &nodes {
        let r = 1.0 + g.value(theta);
        let dr = g.derivative(theta);
        let j = (r * r + dr * dr).sqrt();
        let (sin_t, cos_t) = theta.sin_cos();
        // n = [r e_r - g' e_theta] / J with e_r = (cos, sin), e_theta = (-sin, cos).
        normals.push([(r * cos_t + dr * sin_t) / j, (r * sin_t - dr * cos_t) / j]);
        jacobian.push(j);
    }
    Ok(NormalJacobian { nodes, normals, jacobian })
}
