//! The example design families and their parameterizations.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::geometry::{ContourShape, Curve, Point};
use super::naca;
use super::spline::NaturalSpline;
use crate::error::{Error, Result};
use crate::optim::Bounds;

/// End-ring radius of the catenoid curves (both ends).
pub const CATENOID_END_RADIUS: f64 = 4.2;
/// Half-width of the band the catenoid perturbation must stay in.
pub const CATENOID_ENVELOPE: f64 = 0.5;
const CATENOID_NODES: usize = 29;
const RECT_NODES_PER_SIDE: usize = 9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    /// Centered circle, radius only.
    Circle1,
    /// Circle with horizontal center and radius.
    Circle2,
    /// Circle with free center and radius.
    Circle3,
    /// Circle whose center and radius are sums of 13 parameters each.
    OverCircle,
    ThreeCircles,
    Rectangle,
    Catenoid,
    Naca3,
    Naca22,
}

impl Family {
    pub const ALL: [Family; 9] = [
        Family::Circle1,
        Family::Circle2,
        Family::Circle3,
        Family::OverCircle,
        Family::ThreeCircles,
        Family::Rectangle,
        Family::Catenoid,
        Family::Naca3,
        Family::Naca22,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Circle1 => "circle1d",
            Family::Circle2 => "circle2d",
            Family::Circle3 => "circle3d",
            Family::OverCircle => "circle39",
            Family::ThreeCircles => "three-circles",
            Family::Rectangle => "rectangle",
            Family::Catenoid => "catenoid",
            Family::Naca3 => "naca3",
            Family::Naca22 => "naca22",
        }
    }

    pub fn dim(self) -> usize {
        match self {
            Family::Circle1 => 1,
            Family::Circle2 => 2,
            Family::Circle3 => 3,
            Family::OverCircle => 39,
            Family::ThreeCircles => 9,
            Family::Rectangle => 4 + 4 * RECT_NODES_PER_SIDE,
            Family::Catenoid => CATENOID_NODES,
            Family::Naca3 => 3,
            Family::Naca22 => 22,
        }
    }

    /// Closed families support the grid mappings.
    pub fn is_closed(self) -> bool {
        self != Family::Catenoid
    }

    /// Default number of contour points.
    pub fn default_points(self) -> usize {
        match self {
            Family::ThreeCircles => 201,
            Family::Catenoid => 100,
            _ => 200,
        }
    }

    pub fn bounds(self) -> Bounds {
        let (lo, hi): (Vec<f64>, Vec<f64>) = match self {
            Family::Circle1 => (vec![0.5], vec![1.5]),
            Family::Circle2 => (vec![-1.0, 0.5], vec![1.0, 1.5]),
            Family::Circle3 => (vec![-1.0, -1.0, 0.5], vec![1.0, 1.0, 1.5]),
            Family::OverCircle => {
                let mut lo = vec![-0.05; 39];
                let mut hi = vec![0.05; 39];
                (lo[0], hi[0]) = (0.0, 5.0);
                (lo[13], hi[13]) = (0.0, 5.0);
                (lo[26], hi[26]) = (1.0, 2.0);
                (lo, hi)
            }
            Family::ThreeCircles => {
                let mut lo = Vec::new();
                let mut hi = Vec::new();
                for base in [-3.0, 0.0, 3.0] {
                    lo.extend([base - 0.5, -0.5, 0.3]);
                    hi.extend([base + 0.5, 0.5, 0.9]);
                }
                (lo, hi)
            }
            Family::Rectangle => {
                let mut lo = vec![0.0, 0.0, 3.0, 2.5];
                let mut hi = vec![5.0, 5.0, 5.0, 4.5];
                lo.extend([-0.2; 4 * RECT_NODES_PER_SIDE]);
                hi.extend([0.2; 4 * RECT_NODES_PER_SIDE]);
                (lo, hi)
            }
            Family::Catenoid => (
                vec![-CATENOID_ENVELOPE; CATENOID_NODES],
                vec![CATENOID_ENVELOPE; CATENOID_NODES],
            ),
            Family::Naca3 => (vec![0.0, 0.2, 0.06], vec![0.08, 0.6, 0.2]),
            Family::Naca22 => {
                let mut lo = vec![0.0, 0.2, 0.06];
                let mut hi = vec![0.08, 0.6, 0.2];
                lo.extend([-0.01; 19]);
                hi.extend([0.01; 19]);
                (lo, hi)
            }
        };
        Bounds { lower: lo, upper: hi }
    }

    /// A box enclosing every feasible shape (no margin).
    pub fn bounding_box(self) -> (Point, Point) {
        match self {
            Family::Circle1 => ([-1.5, -1.5], [1.5, 1.5]),
            Family::Circle2 => ([-2.5, -1.5], [2.5, 1.5]),
            Family::Circle3 => ([-2.5, -2.5], [2.5, 2.5]),
            Family::OverCircle => ([-3.2, -3.2], [8.2, 8.2]),
            Family::ThreeCircles => ([-4.4, -1.4], [4.4, 1.4]),
            Family::Rectangle => ([-0.2, -0.2], [10.2, 9.7]),
            Family::Catenoid => (
                [0.0, CATENOID_END_RADIUS - 2.0 * CATENOID_ENVELOPE],
                [1.0, CATENOID_END_RADIUS + 2.0 * CATENOID_ENVELOPE],
            ),
            Family::Naca3 | Family::Naca22 => ([-0.05, -0.15], [1.05, 0.25]),
        }
    }

    pub fn check_dim(self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidDesign("non-finite design coordinate".into()));
        }
        Ok(())
    }

    /// Builds the contour of design `x`.
    pub fn generate_shape(self, x: &[f64]) -> Result<ContourShape> {
        self.check_dim(x)?;
        Ok(match self {
            Family::Circle1 | Family::Circle2 | Family::Circle3 | Family::OverCircle => {
                let (c, r) = circle_params(self, x);
                ContourShape::single(Curve::circle(c, r)?)
            }
            Family::ThreeCircles => ContourShape {
                parts: x
                    .chunks(3)
                    .map(|p| Curve::circle([p[0], p[1]], p[2]))
                    .collect::<Result<_>>()?,
            },
            Family::Rectangle => {
                ContourShape::single(Curve::polyline(rectangle_nodes(x)?, true)?)
            }
            Family::Catenoid => {
                let profile = catenoid_profile(x);
                let pts = (0..=300)
                    .map(|k| {
                        let t = k as f64 / 300.0;
                        [t, profile.eval(t)]
                    })
                    .collect();
                ContourShape::single(Curve::polyline(pts, false)?)
            }
            Family::Naca3 | Family::Naca22 => {
                check_naca(x)?;
                ContourShape::single(Curve::polyline(
                    naca::contour(x[0], x[1], x[2], &x[3..], 400),
                    true,
                )?)
            }
        })
    }

    /// Family-consistent discretization into `points` contour points,
    /// flattened as (x_1, y_1, x_2, y_2, ...).
    ///
    /// Circles are sampled at fixed angles from the rightmost point, the
    /// rectangle at fixed fractions of each side starting from corner A, the
    /// catenoid at fixed abscissae and airfoils at fixed cosine-spaced chord
    /// stations from the leading edge. With these, the representation of the
    /// circle, rectangle and catenoid families is affine in the design.
    pub fn discretize(self, x: &[f64], points: usize) -> Result<Vec<f64>> {
        self.check_dim(x)?;
        let pts: Vec<Point> = match self {
            Family::Circle1 | Family::Circle2 | Family::Circle3 | Family::OverCircle => {
                let (c, r) = circle_params(self, x);
                Curve::circle(c, r)?.resample(points)?
            }
            Family::ThreeCircles => {
                if points % 3 != 0 {
                    return Err(Error::InvalidArgument(format!(
                        "three circles need a point count divisible by 3, got {points}"
                    )));
                }
                let mut out = Vec::with_capacity(points);
                for p in x.chunks(3) {
                    out.extend(Curve::circle([p[0], p[1]], p[2])?.resample(points / 3)?);
                }
                out
            }
            Family::Rectangle => {
                if points % 4 != 0 {
                    return Err(Error::InvalidArgument(format!(
                        "rectangle needs a point count divisible by 4, got {points}"
                    )));
                }
                let nodes = rectangle_nodes(x)?;
                let per_side = points / 4;
                let stride = RECT_NODES_PER_SIDE + 1;
                let mut out = Vec::with_capacity(points);
                for side in 0..4 {
                    for k in 0..per_side {
                        let u = k as f64 / per_side as f64 * stride as f64;
                        let j = (u.floor() as usize).min(stride - 1);
                        let w = u - j as f64;
                        let a = nodes[side * stride + j];
                        let b = nodes[(side * stride + j + 1) % nodes.len()];
                        out.push([a[0] + w * (b[0] - a[0]), a[1] + w * (b[1] - a[1])]);
                    }
                }
                out
            }
            Family::Catenoid => {
                if points < 2 {
                    return Err(Error::InvalidArgument("catenoid needs at least 2 points".into()));
                }
                let profile = catenoid_profile(x);
                (0..points)
                    .map(|k| {
                        let t = k as f64 / (points - 1) as f64;
                        [t, profile.eval(t)]
                    })
                    .collect()
            }
            Family::Naca3 | Family::Naca22 => {
                check_naca(x)?;
                if points % 2 != 0 || points < 4 {
                    return Err(Error::InvalidArgument(format!(
                        "airfoil needs an even point count of at least 4, got {points}"
                    )));
                }
                naca::contour(x[0], x[1], x[2], &x[3..], points)
            }
        };
        Ok(pts.into_iter().flatten().collect())
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown shape family '{s}'")))
    }
}

fn circle_params(family: Family, x: &[f64]) -> (Point, f64) {
    match family {
        Family::Circle1 => ([0.0, 0.0], x[0]),
        Family::Circle2 => ([x[0], 0.0], x[1]),
        Family::Circle3 => ([x[0], x[1]], x[2]),
        Family::OverCircle => {
            let s = x[0..13].iter().sum();
            let t = x[13..26].iter().sum();
            let r = x[26..39].iter().sum();
            ([s, t], r)
        }
        _ => unreachable!("not a single-circle family"),
    }
}

/// Collapsed (center, radius) of an over-parameterized circle design.
pub fn over_circle_params(x: &[f64]) -> (Point, f64) {
    circle_params(Family::OverCircle, x)
}

/// The 40 nodal points of the rectangle family: corners A, B, C, D and nine
/// evenly spaced perturbed nodes on each side, counter-clockwise from A.
/// Perturbations are along the outward normal.
pub fn rectangle_nodes(x: &[f64]) -> Result<Vec<Point>> {
    let (ax, ay, w, h) = (x[0], x[1], x[2], x[3]);
    if !(w > 0.0 && h > 0.0) {
        return Err(Error::InvalidDesign(format!(
            "rectangle width and height must be positive, got {w} and {h}"
        )));
    }
    let corners = [[ax, ay], [ax + w, ay], [ax + w, ay + h], [ax, ay + h]];
    let normals = [[0.0, -1.0], [1.0, 0.0], [0.0, 1.0], [-1.0, 0.0]];
    let stride = RECT_NODES_PER_SIDE + 1;
    let mut nodes = Vec::with_capacity(4 * stride);
    for side in 0..4 {
        let a = corners[side];
        let b = corners[(side + 1) % 4];
        let nrm = normals[side];
        nodes.push(a);
        for j in 1..stride {
            let t = j as f64 / stride as f64;
            let p = x[4 + side * RECT_NODES_PER_SIDE + j - 1];
            nodes.push([
                a[0] + t * (b[0] - a[0]) + p * nrm[0],
                a[1] + t * (b[1] - a[1]) + p * nrm[1],
            ]);
        }
    }
    Ok(nodes)
}

/// Radius of the catenoid curve as a function of the axial coordinate in
/// [0, 1]: the straight line between the end rings plus a natural cubic
/// spline through the perturbations at nodes j/30.
pub fn catenoid_profile(x: &[f64]) -> NaturalSpline {
    let n = x.len() + 1;
    let knots: Vec<f64> = (0..=n).map(|j| j as f64 / n as f64).collect();
    let mut values = Vec::with_capacity(n + 1);
    values.push(CATENOID_END_RADIUS);
    values.extend(x.iter().map(|r| CATENOID_END_RADIUS + r));
    values.push(CATENOID_END_RADIUS);
    NaturalSpline::new(&knots, &values)
}

/// True when the perturbation stays within the envelope band everywhere
/// (checked on a fine grid).
pub fn catenoid_in_envelope(x: &[f64]) -> bool {
    let profile = catenoid_profile(x);
    (0..=600).all(|k| {
        let t = k as f64 / 600.0;
        (profile.eval(t) - CATENOID_END_RADIUS).abs() <= CATENOID_ENVELOPE
    })
}

fn check_naca(x: &[f64]) -> Result<()> {
    let (m, p, t) = (x[0], x[1], x[2]);
    if !(t > 0.0) {
        return Err(Error::InvalidDesign(format!("airfoil thickness must be positive, got {t}")));
    }
    if m < 0.0 || !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidDesign(format!(
            "airfoil camber {m} / position {p} out of range"
        )));
    }
    Ok(())
}
