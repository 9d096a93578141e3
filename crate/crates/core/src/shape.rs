//! Parameterized source domains `D` and their Gaussian priors.
//!
//! Three families are offset shapes described by a center in polar
//! coordinates `(xi[0], xi[1])` and a size `xi[2]`; the fourth is a
//! star-shaped domain about the origin whose radius is a truncated Fourier
//! series.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Number of uniform angles on which a Fourier radius is checked to lie in (0, 1).
pub const FOURIER_VALIDATION_POINTS: usize = 720;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ShapeError {
    #[error("{kind} expects {expected} parameters, got {got}")]
    Length {
        kind: ShapeKind,
        expected: usize,
        got: usize,
    },
    #[error("parameter xi_{index} = {value} is outside {range}")]
    OutOfRange {
        index: usize,
        value: f64,
        range: &'static str,
    },
    #[error("radius function leaves (0, 1) at theta = {theta:.6} (q = {value:.6})")]
    RadiusOutOfBounds { theta: f64, value: f64 },
    #[error("non-finite parameter at index {0}")]
    NonFinite(usize),
    #[error("unknown shape kind `{0}`")]
    UnknownKind(String),
    #[error("fourier_star needs fourier_order >= 1")]
    ZeroOrder,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShapeKind {
    Circle,
    Kite,
    FourLeaf,
    FourierStar,
}

impl ShapeKind {
    /// Parameter count for this family; `order` is only used by `FourierStar`.
    pub fn param_len(self, order: usize) -> usize {
        match self {
            ShapeKind::FourierStar => 2 * order + 1,
            _ => 3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ShapeKind::Circle => "circle",
            ShapeKind::Kite => "kite",
            ShapeKind::FourLeaf => "four_leaf",
            ShapeKind::FourierStar => "fourier_star",
        }
    }

    /// Indices of parameters that are angles (compared modulo 2π).
    pub fn angle_indices(self) -> &'static [usize] {
        match self {
            ShapeKind::FourierStar => &[],
            _ => &[1],
        }
    }
}

impl fmt::Display for ShapeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ShapeKind {
    type Err = ShapeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "circle" => Ok(ShapeKind::Circle),
            "kite" => Ok(ShapeKind::Kite),
            "four_leaf" | "fourleaf" | "leaf" => Ok(ShapeKind::FourLeaf),
            "fourier_star" | "fourier" | "peanut" => Ok(ShapeKind::FourierStar),
            other => Err(ShapeError::UnknownKind(other.to_string())),
        }
    }
}

/// A validated source domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawShape", into = "RawShape")]
pub struct ShapeParams {
    kind: ShapeKind,
    xi: Vec<f64>,
    fourier_order: usize,
}

#[derive(Serialize, Deserialize)]
struct RawShape {
    kind: ShapeKind,
    xi: Vec<f64>,
    #[serde(default)]
    fourier_order: usize,
}

impl TryFrom<RawShape> for ShapeParams {
    type Error = ShapeError;

    fn try_from(raw: RawShape) -> Result<Self, Self::Error> {
        ShapeParams::new(raw.kind, raw.xi, raw.fourier_order)
    }
}

impl From<ShapeParams> for RawShape {
    fn from(s: ShapeParams) -> Self {
        RawShape {
            kind: s.kind,
            xi: s.xi,
            fourier_order: s.fourier_order,
        }
    }
}

/// Unconstrained sampling coordinates `z`.
#[derive(Debug, Clone, PartialEq)]
pub struct UnconstrainedParams(Vec<f64>);

impl UnconstrainedParams {
    pub fn new(z: Vec<f64>) -> Result<Self, ShapeError> {
        if let Some(i) = z.iter().position(|v| !v.is_finite()) {
            return Err(ShapeError::NonFinite(i));
        }
        Ok(Self(z))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

/// Diagonal zero-mean Gaussian prior `N(0, B)` on `z`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriorSpec {
    diag: Vec<f64>,
}

impl PriorSpec {
    pub fn from_diagonal(diag: Vec<f64>) -> Self {
        assert!(
            diag.iter().all(|&b| b > 0.0 && b.is_finite()),
            "prior variances must be positive"
        );
        Self { diag }
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diag
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn mean(&self) -> Vec<f64> {
        vec![0.0; self.diag.len()]
    }
}

fn reduce_angle(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if r >= TAU {
        0.0
    } else {
        r
    }
}

impl ShapeParams {
    pub fn new(kind: ShapeKind, mut xi: Vec<f64>, fourier_order: usize) -> Result<Self, ShapeError> {
        let order = if kind == ShapeKind::FourierStar {
            if fourier_order == 0 {
                return Err(ShapeError::ZeroOrder);
            }
            fourier_order
        } else {
            0
        };
        let expected = kind.param_len(order);
        if xi.len() != expected {
            return Err(ShapeError::Length {
                kind,
                expected,
                got: xi.len(),
            });
        }
        if let Some(i) = xi.iter().position(|v| !v.is_finite()) {
            return Err(ShapeError::NonFinite(i));
        }
        match kind {
            ShapeKind::FourierStar => {
                let shape = Self {
                    kind,
                    xi,
                    fourier_order: order,
                };
                shape.check_radius()?;
                Ok(shape)
            }
            _ => {
                xi[1] = reduce_angle(xi[1]);
                for (index, range) in [(0, "(0, 1)"), (2, "(0, 1)")] {
                    let v = xi[index];
                    if !(v > 0.0 && v < 1.0) {
                        return Err(ShapeError::OutOfRange {
                            index: index + 1,
                            value: v,
                            range,
                        });
                    }
                }
                Ok(Self {
                    kind,
                    xi,
                    fourier_order: 0,
                })
            }
        }
    }

    pub fn circle(center_radius: f64, center_angle: f64, radius: f64) -> Result<Self, ShapeError> {
        Self::new(ShapeKind::Circle, vec![center_radius, center_angle, radius], 0)
    }

    pub fn kind(&self) -> ShapeKind {
        self.kind
    }

    pub fn xi(&self) -> &[f64] {
        &self.xi
    }

    pub fn fourier_order(&self) -> usize {
        self.fourier_order
    }

    fn check_radius(&self) -> Result<(), ShapeError> {
        for i in 0..FOURIER_VALIDATION_POINTS {
            let theta = TAU * i as f64 / FOURIER_VALIDATION_POINTS as f64;
            let q = fourier_radius(&self.xi, theta);
            if !(q > 0.0 && q < 1.0) {
                return Err(ShapeError::RadiusOutOfBounds { theta, value: q });
            }
        }
        Ok(())
    }

    /// Cartesian center of the offset families; the origin for `FourierStar`.
    pub fn center(&self) -> [f64; 2] {
        match self.kind {
            ShapeKind::FourierStar => [0.0, 0.0],
            _ => {
                let (s, c) = self.xi[1].sin_cos();
                [self.xi[0] * c, self.xi[0] * s]
            }
        }
    }

    /// `q(θ)` of the Fourier family.
    ///
    /// # Panics
    /// If the shape is not `FourierStar`.
    pub fn radial_function(&self, theta: f64) -> f64 {
        assert_eq!(self.kind, ShapeKind::FourierStar, "radial_function on {}", self.kind);
        fourier_radius(&self.xi, theta)
    }

    pub fn boundary_point(&self, theta: f64) -> [f64; 2] {
        let [cx, cy] = self.center();
        let (s, c) = theta.sin_cos();
        match self.kind {
            ShapeKind::Circle => {
                let r = self.xi[2];
                [cx + r * c, cy + r * s]
            }
            ShapeKind::Kite => {
                let a = self.xi[2];
                [cx + a * (c + 0.65 * (2.0 * theta).cos() - 0.65), cy + 1.5 * a * s]
            }
            ShapeKind::FourLeaf => {
                let r = four_leaf_radius(self.xi[2], theta);
                [cx + r * c, cy + r * s]
            }
            ShapeKind::FourierStar => {
                let q = fourier_radius(&self.xi, theta);
                [q * c, q * s]
            }
        }
    }

    /// Closed polyline of `n` boundary samples (first point not repeated).
    pub fn polygon(&self, n: usize) -> Vec<[f64; 2]> {
        (0..n).map(|i| self.boundary_point(TAU * i as f64 / n as f64)).collect()
    }

    /// Membership test for `p ∈ D`.
    pub fn contains(&self, p: [f64; 2]) -> bool {
        let [cx, cy] = self.center();
        let dx = p[0] - cx;
        let dy = p[1] - cy;
        match self.kind {
            ShapeKind::Circle => dx * dx + dy * dy < self.xi[2] * self.xi[2],
            ShapeKind::FourLeaf => {
                let rho = dx.hypot(dy);
                rho < four_leaf_radius(self.xi[2], dy.atan2(dx))
            }
            ShapeKind::FourierStar => {
                let rho = dx.hypot(dy);
                rho < fourier_radius(&self.xi, dy.atan2(dx))
            }
            ShapeKind::Kite => {
                // each horizontal line meets the kite curve at θ and π-θ, where
                // sin θ = v; the interior is the segment between them
                let a = self.xi[2];
                let v = dy / (1.5 * a);
                if v.abs() >= 1.0 {
                    return false;
                }
                let half_width = (1.0 - v * v).sqrt();
                (dx / a + 1.3 * v * v).abs() < half_width
            }
        }
    }

    /// Cheap upper bound on `|p − center|` over `p ∈ D`.
    pub fn enclosing_radius(&self) -> f64 {
        let a = self.xi.get(2).copied().unwrap_or(0.0);
        match self.kind {
            ShapeKind::Circle => a,
            ShapeKind::FourLeaf => 1.2 * a,
            // |x offset| ≤ 2.3 a, |y offset| ≤ 1.5 a
            ShapeKind::Kite => 2.75 * a,
            ShapeKind::FourierStar => 0.5 * self.xi[0].abs() + self.xi[1..].iter().map(|v| v.abs()).sum::<f64>(),
        }
    }

    /// Largest distance of a boundary point from the origin, from 720 samples.
    pub fn max_radius(&self) -> f64 {
        self.polygon(FOURIER_VALIDATION_POINTS)
            .into_iter()
            .map(|[x, y]| x.hypot(y))
            .fold(0.0, f64::max)
    }

    /// Whether the sampled boundary stays strictly inside the unit disc.
    pub fn fits_in_disc(&self) -> bool {
        self.max_radius() < 1.0
    }

    /// Axis-aligned bounding box `[xmin, xmax, ymin, ymax]` from boundary samples.
    pub fn bounding_box(&self) -> [f64; 4] {
        let pts = self.polygon(FOURIER_VALIDATION_POINTS);
        let mut b = [f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY];
        for [x, y] in pts {
            b[0] = b[0].min(x);
            b[1] = b[1].max(x);
            b[2] = b[2].min(y);
            b[3] = b[3].max(y);
        }
        b
    }

    /// Analytic area where one exists (circle, four-leaf, Fourier star).
    pub fn analytic_area(&self) -> Option<f64> {
        match self.kind {
            ShapeKind::Circle => Some(PI * self.xi[2] * self.xi[2]),
            // ½∫ r² dθ with r = a(1 + 0.2 cos 4θ)
            ShapeKind::FourLeaf => Some(PI * self.xi[2] * self.xi[2] * 1.02),
            ShapeKind::FourierStar => {
                // ½∫ q² dθ by Parseval
                let mut s = 2.0 * PI * (0.5 * self.xi[0]).powi(2);
                for i in 1..=self.fourier_order {
                    s += PI * (self.xi[2 * i - 1].powi(2) + self.xi[2 * i].powi(2));
                }
                Some(0.5 * s)
            }
            // ∮ x dy over the parametric curve
            ShapeKind::Kite => Some(1.5 * PI * self.xi[2] * self.xi[2]),
        }
    }
}

fn four_leaf_radius(scale: f64, theta: f64) -> f64 {
    scale * (1.0 + 0.2 * (4.0 * theta).cos())
}

fn fourier_radius(xi: &[f64], theta: f64) -> f64 {
    let order = (xi.len() - 1) / 2;
    let mut q = 0.5 * xi[0];
    for i in 1..=order {
        let (s, c) = (i as f64 * theta).sin_cos();
        q += xi[2 * i - 1] * c + xi[2 * i] * s;
    }
    q
}

/// Maps sampler coordinates `z` to physical parameters.
///
/// The offset families use bounded arctan maps onto `(0,1) × (0,2π) × (0,1)`;
/// the Fourier family is sampled directly. The result is not validated
/// against the Fourier radius bounds; use [`ShapeParams::new`] for that.
pub fn to_physical(z: &[f64], kind: ShapeKind, order: usize) -> Result<Vec<f64>, ShapeError> {
    let expected = kind.param_len(order);
    if z.len() != expected {
        return Err(ShapeError::Length {
            kind,
            expected,
            got: z.len(),
        });
    }
    Ok(match kind {
        ShapeKind::FourierStar => z.to_vec(),
        _ => vec![z[0].atan() / PI + 0.5, 2.0 * z[1].atan() + PI, z[2].atan() / PI + 0.5],
    })
}

/// Inverse of [`to_physical`] on the open parameter boxes.
pub fn to_unconstrained(xi: &[f64], kind: ShapeKind) -> Vec<f64> {
    match kind {
        ShapeKind::FourierStar => xi.to_vec(),
        _ => {
            // ξ₂ is stored in [0, 2π); the arctan image is the open interval
            let angle = reduce_angle(xi[1]);
            vec![
                (PI * (xi[0] - 0.5)).tan(),
                (0.5 * (angle - PI)).tan(),
                (PI * (xi[2] - 0.5)).tan(),
            ]
        }
    }
}

/// `to_physical` followed by validation; `None` marks an inadmissible proposal.
pub fn shape_from_unconstrained(z: &[f64], kind: ShapeKind, order: usize) -> Option<ShapeParams> {
    let xi = to_physical(z, kind, order).ok()?;
    ShapeParams::new(kind, xi, order).ok()
}

/// Identity prior for the three-parameter families; `diag(1, 1/i², 1/i², …)`
/// for the Fourier family.
pub fn prior_covariance(kind: ShapeKind, order: usize) -> PriorSpec {
    match kind {
        ShapeKind::FourierStar => {
            let mut d = Vec::with_capacity(2 * order + 1);
            d.push(1.0);
            for i in 1..=order {
                let v = 1.0 / (i * i) as f64;
                d.push(v);
                d.push(v);
            }
            PriorSpec::from_diagonal(d)
        }
        _ => PriorSpec::from_diagonal(vec![1.0; 3]),
    }
}

/// Euclidean parameter distance with angle components wrapped to (-π, π].
pub fn parameter_distance(a: &[f64], b: &[f64], kind: ShapeKind) -> f64 {
    let angles = kind.angle_indices();
    a.iter()
        .zip(b)
        .enumerate()
        .map(|(i, (x, y))| {
            let mut d = x - y;
            if angles.contains(&i) {
                d = wrap_angle_diff(d);
            }
            d * d
        })
        .sum::<f64>()
        .sqrt()
}

/// Wraps an angle difference into (-π, π].
pub fn wrap_angle_diff(d: f64) -> f64 {
    let mut r = d.rem_euclid(TAU);
    if r > PI {
        r -= TAU;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    fn circle_true() -> ShapeParams {
        ShapeParams::circle(0.7, PI / 2.0, 0.2).unwrap()
    }

    fn kite_true() -> ShapeParams {
        ShapeParams::new(ShapeKind::Kite, vec![0.4, PI / 3.0, 0.2], 0).unwrap()
    }

    fn peanut() -> ShapeParams {
        ShapeParams::new(ShapeKind::FourierStar, vec![1.0, 0.0, 0.0, 0.0, 0.3], 2).unwrap()
    }

    #[test]
    fn enclosing_radius_covers_the_boundary() {
        let leaf = ShapeParams::new(ShapeKind::FourLeaf, vec![0.4, PI / 2.0, 0.7], 0).unwrap();
        for s in [circle_true(), kite_true(), peanut(), leaf] {
            let [cx, cy] = s.center();
            let r = s.enclosing_radius();
            for [x, y] in s.polygon(2048) {
                assert!((x - cx).hypot(y - cy) <= r * (1.0 + 1e-12), "{:?}", s.kind());
            }
        }
    }

    #[test]
    fn to_physical_origin_maps_to_box_centers() {
        let xi = to_physical(&[0.0, 0.0, 0.0], ShapeKind::Circle, 0).unwrap();
        assert_eq!(xi, vec![0.5, PI, 0.5]);
    }

    #[test]
    fn to_physical_inverts_tangent_values() {
        let z = [(0.2 * PI).tan(), (-PI / 4.0).tan(), (-0.3 * PI).tan()];
        let xi = to_physical(&z, ShapeKind::Kite, 0).unwrap();
        let expected = [0.7, PI / 2.0, 0.2];
        for (a, b) in xi.iter().zip(expected) {
            assert!((a - b).abs() < 1e-14, "{a} vs {b}");
        }
        let back = to_unconstrained(&xi, ShapeKind::Kite);
        for (a, b) in back.iter().zip(z) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn to_physical_fourier_is_identity() {
        let z = [0.0, 0.0, 0.0, 0.0, 0.3];
        assert_eq!(to_physical(&z, ShapeKind::FourierStar, 2).unwrap(), z.to_vec());
    }

    #[test]
    fn to_physical_rejects_wrong_length() {
        assert!(matches!(
            to_physical(&[0.0; 4], ShapeKind::Circle, 0),
            Err(ShapeError::Length {
                expected: 3,
                got: 4,
                ..
            })
        ));
        assert!(to_physical(&[0.0; 3], ShapeKind::FourierStar, 2).is_err());
    }

    #[test]
    fn radial_function_examples() {
        let s = peanut();
        assert!((s.radial_function(0.0) - 0.5).abs() < 1e-15);
        assert!((s.radial_function(PI / 4.0) - 0.8).abs() < 1e-15);
    }

    #[test]
    fn radial_function_matches_its_discrete_fourier_transform() {
        // trapezoid rule on 1024 points recovers the coefficients exactly
        let s = peanut();
        let n = 1024;
        let samples: Vec<f64> = (0..n).map(|j| s.radial_function(TAU * j as f64 / n as f64)).collect();
        let mut rebuilt = vec![0.0; 5];
        for (j, q) in samples.iter().enumerate() {
            let t = TAU * j as f64 / n as f64;
            rebuilt[0] += 2.0 * q * 2.0 / n as f64 * 0.5;
            for i in 1..=2 {
                rebuilt[2 * i - 1] += 2.0 * q * (i as f64 * t).cos() / n as f64;
                rebuilt[2 * i] += 2.0 * q * (i as f64 * t).sin() / n as f64;
            }
        }
        for (a, b) in rebuilt.iter().zip(s.xi()) {
            assert!((a - b).abs() < 1e-13, "{rebuilt:?}");
        }
    }

    #[test]
    fn boundary_point_examples() {
        let p = circle_true().boundary_point(0.0);
        assert!((p[0] - 0.2).abs() < 1e-15 && (p[1] - 0.7).abs() < 1e-15);

        let p = kite_true().boundary_point(PI / 2.0);
        // substituting θ = π/2: cos θ = 0, cos 2θ = -1, sin θ = 1
        let ex = [0.4 * (PI / 3.0).cos() - 0.26, 0.4 * (PI / 3.0).sin() + 0.3];
        assert!((p[0] - ex[0]).abs() < 1e-15 && (p[1] - ex[1]).abs() < 1e-15);

        let p = peanut().boundary_point(PI / 4.0);
        let v = 0.8 / 2f64.sqrt();
        assert!((p[0] - v).abs() < 1e-15 && (p[1] - v).abs() < 1e-15);
    }

    #[test]
    fn contains_examples() {
        let c = circle_true();
        assert!(c.contains([0.0, 0.7]));
        assert!(!c.contains([0.0, 0.4]));
    }

    fn winding_number(poly: &[[f64; 2]], p: [f64; 2]) -> i32 {
        let mut wn = 0;
        for i in 0..poly.len() {
            let a = poly[i];
            let b = poly[(i + 1) % poly.len()];
            let cross = (b[0] - a[0]) * (p[1] - a[1]) - (p[0] - a[0]) * (b[1] - a[1]);
            if a[1] <= p[1] {
                if b[1] > p[1] && cross > 0.0 {
                    wn += 1;
                }
            } else if b[1] <= p[1] && cross < 0.0 {
                wn -= 1;
            }
        }
        wn
    }

    #[test]
    fn kite_contains_agrees_with_polygon_winding() {
        let k = kite_true();
        let poly = k.polygon(512);
        let c = poly.iter().fold([0.0, 0.0], |acc, p| [acc[0] + p[0], acc[1] + p[1]]);
        let centroid = [c[0] / 512.0, c[1] / 512.0];
        assert!(k.contains(centroid));
        assert_ne!(winding_number(&poly, centroid), 0);

        let [x0, x1, y0, y1] = k.bounding_box();
        let n = 300;
        let mut disagreements = 0;
        for i in 0..n {
            for j in 0..n {
                let p = [
                    x0 - 0.01 + (x1 - x0 + 0.02) * (i as f64 + 0.5) / n as f64,
                    y0 - 0.01 + (y1 - y0 + 0.02) * (j as f64 + 0.5) / n as f64,
                ];
                if k.contains(p) != (winding_number(&poly, p) != 0) {
                    disagreements += 1;
                }
            }
        }
        // only cells straddling the 512-gon chords may differ
        assert!(disagreements < 20, "{disagreements}");
    }

    #[test]
    fn kite_area_matches_polygon_area() {
        let k = kite_true();
        let poly = k.polygon(4096);
        let mut a = 0.0;
        for i in 0..poly.len() {
            let p = poly[i];
            let q = poly[(i + 1) % poly.len()];
            a += p[0] * q[1] - q[0] * p[1];
        }
        assert!((0.5 * a - k.analytic_area().unwrap()).abs() < 1e-6);
    }

    #[test]
    fn prior_covariance_examples() {
        assert_eq!(prior_covariance(ShapeKind::Circle, 0).diagonal(), &[1.0; 3]);
        assert_eq!(
            prior_covariance(ShapeKind::FourierStar, 2).diagonal(),
            &[1.0, 1.0, 1.0, 0.25, 0.25]
        );
        assert_eq!(prior_covariance(ShapeKind::FourierStar, 1).diagonal(), &[1.0; 3]);
    }

    #[test]
    fn validation_errors() {
        assert!(ShapeParams::circle(1.2, 0.0, 0.1).is_err());
        assert!(ShapeParams::circle(0.5, 0.0, 0.0).is_err());
        assert!(ShapeParams::new(ShapeKind::FourierStar, vec![2.2, 0.0, 0.0], 1).is_err());
        assert!(ShapeParams::new(ShapeKind::FourierStar, vec![1.0], 0).is_err());
        let wrapped = ShapeParams::circle(0.5, -PI / 2.0, 0.1).unwrap();
        assert!((wrapped.xi()[1] - 1.5 * PI).abs() < 1e-15);
    }

    #[test]
    fn json_round_trip() {
        let s = peanut();
        let text = serde_json::to_string(&s).unwrap();
        assert!(text.contains("\"kind\":\"fourier_star\""));
        let back: ShapeParams = serde_json::from_str(&text).unwrap();
        assert_eq!(back, s);
        let bad = r#"{"kind":"circle","xi":[1.5,0.0,0.1],"fourier_order":0}"#;
        assert!(serde_json::from_str::<ShapeParams>(bad).is_err());
    }

    #[test]
    fn four_leaf_truth_exits_the_disc() {
        let s = ShapeParams::new(ShapeKind::FourLeaf, vec![0.4, PI / 2.0, 0.7], 0).unwrap();
        assert!(!s.fits_in_disc());
        assert!(circle_true().fits_in_disc());
    }
}
