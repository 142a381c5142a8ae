//! Problem identifiers and the spaces built for them.

use std::fmt;
use std::str::FromStr;

use super::objective::{Objective, GRIEWANK_BOUND, GRIEWANK_DIM};
use crate::eigenbasis::{IdentitySpace, ShapeSpace, TruncationPolicy};
use crate::error::{Error, Result};
use crate::optim::Bounds;
use crate::shapes::{build_database, Family, MappingKind, MappingSpec, Sampler, ShapeDatabase};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Problem {
    Shape(Family),
    Griewank40,
}

impl Problem {
    pub fn name(self) -> &'static str {
        match self {
            Problem::Shape(f) => f.name(),
            Problem::Griewank40 => "griewank40",
        }
    }

    pub fn family(self) -> Option<Family> {
        match self {
            Problem::Shape(f) => Some(f),
            Problem::Griewank40 => None,
        }
    }

    pub fn objective(self) -> Option<Objective> {
        match self {
            Problem::Shape(f) => Objective::for_family(f),
            Problem::Griewank40 => Some(Objective::Fmg),
        }
    }

    pub fn design_bounds(self) -> Bounds {
        match self {
            Problem::Shape(f) => f.bounds(),
            Problem::Griewank40 => Bounds::uniform(GRIEWANK_DIM, -GRIEWANK_BOUND, GRIEWANK_BOUND),
        }
    }

    /// The design parameters as coordinates.
    pub fn identity_space(self) -> IdentitySpace {
        IdentitySpace {
            bounds: self.design_bounds(),
        }
    }
}

impl fmt::Display for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Problem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "griewank40" || s == "fmg" {
            return Ok(Problem::Griewank40);
        }
        s.parse::<Family>()
            .map(Problem::Shape)
            .map_err(|_| Error::Parse(format!("unknown problem '{s}'")))
    }
}

/// Database of `n` designs drawn with the family's default sampler.
pub fn shape_database(family: Family, mapping: MappingKind, n: usize, seed: u64) -> Result<ShapeDatabase> {
    let spec = MappingSpec::for_family(mapping, family);
    build_database(family, n, &Sampler::default_for(family), spec, seed)
}

/// Database, eigenbasis truncated to d′ and manifold statistics.
pub fn shape_space(family: Family, mapping: MappingKind, n: usize, seed: u64) -> Result<ShapeSpace> {
    let db = shape_database(family, mapping, n, seed)?;
    ShapeSpace::build(&db, TruncationPolicy::default())
}
