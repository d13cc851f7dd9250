//! Closed polygonal curves and the discrete quantities attached to them.
//!
//! A curve with `N` vertices `x_0 .. x_{N-1}` (counterclockwise) carries one
//! edge per vertex: edge `i` joins vertex `i-1` (cyclically) to vertex `i`, so
//! an edge and the vertex it ends at share an index. Per-edge data are the
//! length `r_i`, the curvature `k_i`, and the tangent angle `nu_i`; the angles
//! are kept as one continuous (unwrapped) branch that gains `2*pi` per
//! counterclockwise loop.
//!
//! Vertex- and edge-based quantities exchange places through midpoint
//! averages over the staggered ("dual") grid:
//! edge -> vertex: `F*_i = (F_i + F_{i+1}) / 2` (a vertex sits between its two
//! incident edges), vertex -> edge: `a*_i = (a_i + a_{i-1}) / 2`. For the
//! tangent angle the cyclic wrap adds the `2*pi` winding. Dual edge lengths
//! use the same midpoint average; the Euclidean distance between consecutive
//! edge midpoints would be a geometrically exact alternative, but the
//! averaged form is what every difference operator here is built on.

use crate::vec2::Vec2;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

/// Relative threshold below which an edge counts as collapsed.
pub const ZERO_EDGE_REL_TOL: f64 = 1e-14;

#[derive(Debug, thiserror::Error)]
pub enum GeometryError {
    #[error("curve needs at least 4 vertices, got {0}")]
    DegenerateCurve(usize),
    #[error("edge {index} has length {length:.3e}, below {ZERO_EDGE_REL_TOL:.0e} of the curve scale")]
    ZeroEdge { index: usize, length: f64 },
    #[error("curve is not counterclockwise (signed area {0:.3e} <= 0)")]
    OrientationError(f64),
    #[error("invalid initial curve: {0}")]
    InvalidSpec(String),
}

/// A closed polygon together with its discrete edge lengths, curvatures and
/// unwrapped tangent angles. Construct via [`recompute_discrete_quantities`]
/// or [`sample_initial_curve`]; the fields always describe the stored
/// vertices.
#[derive(Clone, Debug)]
pub struct PolygonalCurve {
    vertices: Vec<Vec2>,
    edge_lengths: Vec<f64>,
    edge_curvatures: Vec<f64>,
    edge_angles: Vec<f64>,
}

impl PolygonalCurve {
    pub fn n(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertices(&self) -> &[Vec2] {
        &self.vertices
    }

    pub fn edge_lengths(&self) -> &[f64] {
        &self.edge_lengths
    }

    pub fn edge_curvatures(&self) -> &[f64] {
        &self.edge_curvatures
    }

    pub fn edge_angles(&self) -> &[f64] {
        &self.edge_angles
    }

    pub fn total_length(&self) -> f64 {
        self.edge_lengths.iter().sum()
    }

    /// Shoelace area, positive for counterclockwise curves.
    pub fn signed_area(&self) -> f64 {
        let n = self.n();
        let mut twice = 0.0;
        for i in 0..n {
            let p = self.vertices[(i + n - 1) % n];
            let q = self.vertices[i];
            twice += p.cross(q);
        }
        0.5 * twice
    }

    pub fn enclosed_area(&self) -> f64 {
        self.signed_area().abs()
    }

    pub fn check_counterclockwise(&self) -> Result<(), GeometryError> {
        let a = self.signed_area();
        if a > 0.0 {
            Ok(())
        } else {
            Err(GeometryError::OrientationError(a))
        }
    }

    /// Area centroid of the enclosed region.
    pub fn centroid(&self) -> Vec2 {
        let n = self.n();
        let mut twice = 0.0;
        let mut cx = 0.0;
        let mut cy = 0.0;
        for i in 0..n {
            let p = self.vertices[(i + n - 1) % n];
            let q = self.vertices[i];
            let w = p.cross(q);
            twice += w;
            cx += (p.x + q.x) * w;
            cy += (p.y + q.y) * w;
        }
        let a = 0.5 * twice;
        Vec2::new(cx / (6.0 * a), cy / (6.0 * a))
    }

    /// Midpoints of the edges; these are the positions that edge quantities
    /// are naturally attached to.
    pub fn edge_midpoints(&self) -> Vec<Vec2> {
        let n = self.n();
        (0..n)
            .map(|i| (self.vertices[i] + self.vertices[(i + n - 1) % n]) * 0.5)
            .collect()
    }

    /// Length-weighted average of a per-edge quantity over the curve.
    pub fn arc_average(&self, values: &[f64]) -> f64 {
        arc_average(values, &self.edge_lengths)
    }

    /// Uniform rescaling about a fixed point; all discrete quantities are
    /// recomputed from the scaled vertices.
    pub fn scaled_about(&self, center: Vec2, factor: f64) -> Result<PolygonalCurve, GeometryError> {
        let scaled: Vec<Vec2> = self
            .vertices
            .iter()
            .map(|&v| center + (v - center) * factor)
            .collect();
        recompute_discrete_quantities(scaled, Some(&self.edge_angles))
    }

    /// Second central moments of the enclosed region as `(ixx, ixy, iyy)`,
    /// i.e. integrals of `(x-cx)^2`, `(x-cx)(y-cy)`, `(y-cy)^2` over the
    /// region (counterclockwise curves).
    pub fn second_central_moments(&self) -> (f64, f64, f64) {
        let n = self.n();
        let c = self.centroid();
        let mut ixx = 0.0;
        let mut ixy = 0.0;
        let mut iyy = 0.0;
        for i in 0..n {
            let p = self.vertices[(i + n - 1) % n] - c;
            let q = self.vertices[i] - c;
            let w = p.cross(q);
            ixx += (p.x * p.x + p.x * q.x + q.x * q.x) * w;
            iyy += (p.y * p.y + p.y * q.y + q.y * q.y) * w;
            ixy += (p.x * q.y + 2.0 * p.x * p.y + 2.0 * q.x * q.y + q.x * p.y) * w;
        }
        (ixx / 12.0, ixy / 24.0, iyy / 12.0)
    }

    /// Ratio (>= 1) of the principal semi-axes of the enclosed region,
    /// computed from the eigenvalues of the second-moment matrix. For an
    /// elliptical region with semi-axes `a >= b` this is `a / b`.
    pub fn principal_axis_ratio(&self) -> f64 {
        let (ixx, ixy, iyy) = self.second_central_moments();
        let mean = 0.5 * (ixx + iyy);
        let disc = (0.5 * (ixx - iyy)).hypot(ixy);
        let hi = mean + disc;
        let lo = mean - disc;
        (hi / lo).sqrt()
    }

    /// Test-only constructor that bypasses the geometric recomputation so
    /// edge data can be chosen exactly.
    #[cfg(test)]
    pub(crate) fn from_parts(
        vertices: Vec<Vec2>,
        edge_lengths: Vec<f64>,
        edge_curvatures: Vec<f64>,
        edge_angles: Vec<f64>,
    ) -> PolygonalCurve {
        assert_eq!(vertices.len(), edge_lengths.len());
        assert_eq!(vertices.len(), edge_curvatures.len());
        assert_eq!(vertices.len(), edge_angles.len());
        PolygonalCurve {
            vertices,
            edge_lengths,
            edge_curvatures,
            edge_angles,
        }
    }
}

/// Length-weighted mean `sum(F_i r_i) / sum(r_i)`.
pub fn arc_average(values: &[f64], lengths: &[f64]) -> f64 {
    assert_eq!(values.len(), lengths.len());
    let mut num = 0.0;
    let mut den = 0.0;
    for (&f, &r) in values.iter().zip(lengths) {
        num += f * r;
        den += r;
    }
    num / den
}

/// Edge -> vertex midpoint average: `F*_i = (F_i + F_{i+1}) / 2` with cyclic
/// wraparound. Use [`dual_edge_angles`] for tangent angles.
pub fn dual_edge_quantity(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    (0..n).map(|i| 0.5 * (values[i] + values[(i + 1) % n])).collect()
}

/// Edge -> vertex average for unwrapped tangent angles; the wrap adds the
/// `2*pi` winding so the last dual value stays on the continuous branch.
pub fn dual_edge_angles(angles: &[f64]) -> Vec<f64> {
    let n = angles.len();
    (0..n)
        .map(|i| {
            let next = if i + 1 == n { angles[0] + TAU } else { angles[i + 1] };
            0.5 * (angles[i] + next)
        })
        .collect()
}

/// Vertex -> edge midpoint average: `a*_i = (a_i + a_{i-1}) / 2` with cyclic
/// wraparound.
pub fn dual_vertex_quantity(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    (0..n).map(|i| 0.5 * (values[i] + values[(i + n - 1) % n])).collect()
}

fn sgn(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Nearest representative of `raw + 2*pi*Z` to `reference`.
fn unwrap_toward(raw: f64, reference: f64) -> f64 {
    raw + TAU * ((reference - raw) / TAU).round()
}

/// Rebuild edge lengths, curvatures and tangent angles from a vertex list.
///
/// The discrete curvature on edge `i` spans the two turning angles at the
/// edge's endpoints: `k_i = sgn(det(p_{i-1}, p_{i+1})) * arccos(p_{i-1}.p_{i+1}
/// / (r_{i-1} r_{i+1})) / (2 r_i)` with the cosine clamped to `[-1, 1]`.
/// Tangent angles are `atan2` of the edge vectors lifted to a continuous
/// branch: toward `previous_angles` when given (each angle moves by the
/// multiple of `2*pi` that brings it closest to its reference), otherwise by
/// running continuation from the first edge, which yields a `+2*pi` winding
/// for counterclockwise input.
pub fn recompute_discrete_quantities(
    vertices: Vec<Vec2>,
    previous_angles: Option<&[f64]>,
) -> Result<PolygonalCurve, GeometryError> {
    let n = vertices.len();
    if n < 4 {
        return Err(GeometryError::DegenerateCurve(n));
    }
    if let Some(prev) = previous_angles {
        assert_eq!(prev.len(), n, "previous_angles length must match vertex count");
    }

    let edges: Vec<Vec2> = (0..n)
        .map(|i| vertices[i] - vertices[(i + n - 1) % n])
        .collect();
    let lengths: Vec<f64> = edges.iter().map(|p| p.norm()).collect();

    let scale = lengths.iter().cloned().fold(0.0, f64::max);
    for (i, &r) in lengths.iter().enumerate() {
        if !(r >= ZERO_EDGE_REL_TOL * scale) || scale == 0.0 {
            return Err(GeometryError::ZeroEdge { index: i, length: r });
        }
    }

    let mut curvatures = Vec::with_capacity(n);
    for i in 0..n {
        let prev = (i + n - 1) % n;
        let next = (i + 1) % n;
        let cos = (edges[prev].dot(edges[next]) / (lengths[prev] * lengths[next])).clamp(-1.0, 1.0);
        let sign = sgn(edges[prev].cross(edges[next]));
        curvatures.push(sign * cos.acos() / (2.0 * lengths[i]));
    }

    let mut angles = Vec::with_capacity(n);
    for i in 0..n {
        let raw = edges[i].y.atan2(edges[i].x);
        let reference = match previous_angles {
            Some(prev) => prev[i],
            None => {
                if i == 0 {
                    raw
                } else {
                    angles[i - 1]
                }
            }
        };
        angles.push(unwrap_toward(raw, reference));
    }

    Ok(PolygonalCurve {
        vertices,
        edge_lengths: lengths,
        edge_curvatures: curvatures,
        edge_angles: angles,
    })
}

/// Closed starting curves that can be sampled into a [`PolygonalCurve`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialCurveSpec {
    Circle {
        radius: f64,
    },
    Ellipse {
        a: f64,
        b: f64,
    },
    /// Radial perturbation of a circle: `rho(theta) = base_radius +
    /// sum_l amplitudes[l] * cos(modes[l] * theta)`.
    FourierStar {
        base_radius: f64,
        amplitudes: Vec<f64>,
        modes: Vec<u32>,
    },
}

impl InitialCurveSpec {
    fn validate(&self) -> Result<(), GeometryError> {
        let invalid = |msg: String| Err(GeometryError::InvalidSpec(msg));
        match self {
            InitialCurveSpec::Circle { radius } => {
                if !(*radius > 0.0) {
                    return invalid(format!("circle radius must be positive, got {radius}"));
                }
            }
            InitialCurveSpec::Ellipse { a, b } => {
                if !(*a > 0.0 && *b > 0.0) {
                    return invalid(format!("ellipse half-axes must be positive, got a={a}, b={b}"));
                }
            }
            InitialCurveSpec::FourierStar {
                base_radius,
                amplitudes,
                modes,
            } => {
                if !(*base_radius > 0.0) {
                    return invalid(format!("star base radius must be positive, got {base_radius}"));
                }
                if amplitudes.len() != modes.len() {
                    return invalid(format!(
                        "star needs one mode per amplitude, got {} amplitudes and {} modes",
                        amplitudes.len(),
                        modes.len()
                    ));
                }
                let total: f64 = amplitudes.iter().map(|a| a.abs()).sum();
                if !(total < *base_radius) {
                    return invalid(format!(
                        "star amplitudes sum to {total}, which would let the radius reach zero (base {base_radius})"
                    ));
                }
            }
        }
        Ok(())
    }

    fn point_at(&self, u: f64) -> Vec2 {
        let theta = TAU * u;
        match self {
            InitialCurveSpec::Circle { radius } => {
                Vec2::new(radius * theta.cos(), radius * theta.sin())
            }
            InitialCurveSpec::Ellipse { a, b } => Vec2::new(a * theta.cos(), b * theta.sin()),
            InitialCurveSpec::FourierStar {
                base_radius,
                amplitudes,
                modes,
            } => {
                let mut rho = *base_radius;
                for (amp, &m) in amplitudes.iter().zip(modes) {
                    rho += amp * (f64::from(m) * theta).cos();
                }
                Vec2::new(rho * theta.cos(), rho * theta.sin())
            }
        }
    }
}

/// Sample a starting curve at `n` uniformly spaced parameter values
/// `u_i = i / n` and build the discrete quantities. The vertex order is
/// normalized to counterclockwise.
pub fn sample_initial_curve(
    spec: &InitialCurveSpec,
    n: usize,
) -> Result<PolygonalCurve, GeometryError> {
    spec.validate()?;
    if n < 4 {
        return Err(GeometryError::InvalidSpec(format!(
            "need at least 4 sample points, got {n}"
        )));
    }
    let mut vertices: Vec<Vec2> = (0..n).map(|i| spec.point_at(i as f64 / n as f64)).collect();

    // Shoelace on the raw vertex list; reverse if the sampler ever produces a
    // clockwise loop.
    let mut twice = 0.0;
    for i in 0..n {
        twice += vertices[(i + n - 1) % n].cross(vertices[i]);
    }
    if twice < 0.0 {
        vertices.reverse();
    }

    recompute_discrete_quantities(vertices, None)
}
