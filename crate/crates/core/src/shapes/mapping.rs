//! Shape mappings: characteristic function and signed distance on a grid,
//! and contour discretization.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::family::Family;
use super::geometry::{ContourShape, Point};
use crate::error::{Error, Result};

/// Default grid resolution per axis.
pub const DEFAULT_GRID: usize = 64;

/// A uniform grid of cell-centered points, row-major (x fastest).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub nx: usize,
    pub ny: usize,
    pub lower: Point,
    pub upper: Point,
}

impl GridSpec {
    pub fn new(nx: usize, ny: usize, lower: Point, upper: Point) -> Result<Self> {
        if nx == 0 || ny == 0 || !(upper[0] > lower[0] && upper[1] > lower[1]) {
            return Err(Error::InvalidArgument("empty grid".into()));
        }
        Ok(Self { nx, ny, lower, upper })
    }

    /// `n`×`n` grid over the family's bounding box widened by 10% on each side.
    pub fn for_family(family: Family, n: usize) -> Self {
        let (lo, hi) = family.bounding_box();
        let mx = 0.1 * (hi[0] - lo[0]);
        let my = 0.1 * (hi[1] - lo[1]);
        Self {
            nx: n,
            ny: n,
            lower: [lo[0] - mx, lo[1] - my],
            upper: [hi[0] + mx, hi[1] + my],
        }
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn point(&self, j: usize) -> Point {
        let (ix, iy) = (j % self.nx, j / self.nx);
        let hx = (self.upper[0] - self.lower[0]) / self.nx as f64;
        let hy = (self.upper[1] - self.lower[1]) / self.ny as f64;
        [
            self.lower[0] + (ix as f64 + 0.5) * hx,
            self.lower[1] + (iy as f64 + 0.5) * hy,
        ]
    }

    pub fn points(&self) -> impl Iterator<Item = Point> + '_ {
        (0..self.len()).map(|j| self.point(j))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MappingKind {
    Characteristic,
    SignedDistance,
    Contour,
}

impl MappingKind {
    pub fn name(self) -> &'static str {
        match self {
            MappingKind::Characteristic => "characteristic",
            MappingKind::SignedDistance => "signed-distance",
            MappingKind::Contour => "contour",
        }
    }
}

impl fmt::Display for MappingKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MappingKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "characteristic" | "chi" => Ok(MappingKind::Characteristic),
            "signed-distance" | "sdf" => Ok(MappingKind::SignedDistance),
            "contour" | "pdm" => Ok(MappingKind::Contour),
            _ => Err(Error::Parse(format!("unknown mapping '{s}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum MappingSpec {
    Characteristic { grid: GridSpec },
    SignedDistance { grid: GridSpec },
    Contour { points: usize },
}

impl MappingSpec {
    /// The default spec of a mapping kind for a family.
    pub fn for_family(kind: MappingKind, family: Family) -> Self {
        match kind {
            MappingKind::Characteristic => MappingSpec::Characteristic {
                grid: GridSpec::for_family(family, DEFAULT_GRID),
            },
            MappingKind::SignedDistance => MappingSpec::SignedDistance {
                grid: GridSpec::for_family(family, DEFAULT_GRID),
            },
            MappingKind::Contour => MappingSpec::Contour {
                points: family.default_points(),
            },
        }
    }

    pub fn kind(&self) -> MappingKind {
        match self {
            MappingSpec::Characteristic { .. } => MappingKind::Characteristic,
            MappingSpec::SignedDistance { .. } => MappingKind::SignedDistance,
            MappingSpec::Contour { .. } => MappingKind::Contour,
        }
    }

    /// Length D of the representation.
    pub fn output_dim(&self) -> usize {
        match self {
            MappingSpec::Characteristic { grid } | MappingSpec::SignedDistance { grid } => grid.len(),
            MappingSpec::Contour { points } => 2 * points,
        }
    }

    /// φ(x) for a design of `family`. Contours use the family-consistent
    /// discretization.
    pub fn apply(&self, family: Family, x: &[f64]) -> Result<Vec<f64>> {
        match self {
            MappingSpec::Contour { points } => family.discretize(x, *points),
            MappingSpec::Characteristic { grid } => {
                Ok(map_characteristic(&family.generate_shape(x)?, grid)?.phi)
            }
            MappingSpec::SignedDistance { grid } => {
                Ok(map_signed_distance(&family.generate_shape(x)?, grid)?.phi)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShapeRepresentation {
    pub phi: Vec<f64>,
    pub mapping: MappingSpec,
}

fn require_closed(shape: &ContourShape) -> Result<()> {
    if shape.is_closed() {
        Ok(())
    } else {
        Err(Error::Unsupported(
            "grid mappings need a closed contour".into(),
        ))
    }
}

/// 1 at grid points inside the shape, 0 elsewhere.
pub fn map_characteristic(shape: &ContourShape, grid: &GridSpec) -> Result<ShapeRepresentation> {
    require_closed(shape)?;
    Ok(ShapeRepresentation {
        phi: grid
            .points()
            .map(|p| if shape.contains(p) { 1.0 } else { 0.0 })
            .collect(),
        mapping: MappingSpec::Characteristic { grid: grid.clone() },
    })
}

/// Distance to the contour, positive inside.
pub fn map_signed_distance(shape: &ContourShape, grid: &GridSpec) -> Result<ShapeRepresentation> {
    require_closed(shape)?;
    Ok(ShapeRepresentation {
        phi: grid.points().map(|p| shape.signed_distance(p)).collect(),
        mapping: MappingSpec::SignedDistance { grid: grid.clone() },
    })
}

/// Arclength-equispaced points, flattened. Multi-part shapes split the count
/// evenly between parts, in part order.
pub fn map_contour(shape: &ContourShape, num_points: usize) -> Result<ShapeRepresentation> {
    if num_points < 3 {
        return Err(Error::InvalidArgument(format!(
            "contour discretization needs at least 3 points, got {num_points}"
        )));
    }
    let parts = shape.parts.len();
    if parts == 0 || num_points % parts != 0 {
        return Err(Error::InvalidArgument(format!(
            "{num_points} points cannot be split over {parts} parts"
        )));
    }
    let mut phi = Vec::with_capacity(2 * num_points);
    for part in &shape.parts {
        for p in part.resample(num_points / parts)? {
            phi.extend(p);
        }
    }
    Ok(ShapeRepresentation {
        phi,
        mapping: MappingSpec::Contour { points: num_points },
    })
}
