//! Analytical objectives attached to the example families.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::shapes::{catenoid_profile, over_circle_params, rectangle_nodes, Family};

/// Dimension of the modified Griewank problem.
pub const GRIEWANK_DIM: usize = 40;
/// Center of the sphere term over x₃..x₁₀.
pub const GRIEWANK_CENTER: [f64; 8] = [-140.0, -100.0, -60.0, -20.0, 20.0, 60.0, 100.0, 140.0];
pub const GRIEWANK_BOUND: f64 = 600.0;
/// Trapezoid panels for the surface integral.
pub const AREA_PANELS: usize = 2000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Objective {
    /// Over-parameterized circle: r − πr² − ‖c − (3, 2)‖.
    F2,
    /// Rectangle: squared nodal distance to the heart target, both anchored at (2.5, 2.5).
    F4,
    /// Catenoid curve: area of the surface of revolution.
    F5,
    /// Griewank in (x₁, x₂) plus a small sphere in x₃..x₁₀, on [−600, 600]⁴⁰.
    Fmg,
}

impl Objective {
    pub fn name(self) -> &'static str {
        match self {
            Objective::F2 => "f2",
            Objective::F4 => "f4",
            Objective::F5 => "f5",
            Objective::Fmg => "fmg",
        }
    }

    pub fn dim(self) -> usize {
        match self {
            Objective::F2 => Family::OverCircle.dim(),
            Objective::F4 => Family::Rectangle.dim(),
            Objective::F5 => Family::Catenoid.dim(),
            Objective::Fmg => GRIEWANK_DIM,
        }
    }

    /// The family the objective is defined on.
    pub fn family(self) -> Option<Family> {
        match self {
            Objective::F2 => Some(Family::OverCircle),
            Objective::F4 => Some(Family::Rectangle),
            Objective::F5 => Some(Family::Catenoid),
            Objective::Fmg => None,
        }
    }

    pub fn for_family(family: Family) -> Option<Self> {
        match family {
            Family::OverCircle => Some(Objective::F2),
            Family::Rectangle => Some(Objective::F4),
            Family::Catenoid => Some(Objective::F5),
            _ => None,
        }
    }

    pub fn eval(self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidDesign("non-finite design coordinate".into()));
        }
        match self {
            Objective::F2 => Ok(f2(x)),
            Objective::F4 => f4(x),
            Objective::F5 => Ok(f5(x)),
            Objective::Fmg => fmg(x),
        }
    }
}

impl fmt::Display for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Objective {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "f2" => Ok(Objective::F2),
            "f4" => Ok(Objective::F4),
            "f5" => Ok(Objective::F5),
            "fmg" | "f_mg" => Ok(Objective::Fmg),
            _ => Err(Error::Parse(format!("unknown objective '{s}'"))),
        }
    }
}

fn f2(x: &[f64]) -> f64 {
    let (c, r) = over_circle_params(x);
    r - std::f64::consts::PI * r * r - ((c[0] - 3.0).powi(2) + (c[1] - 2.0).powi(2)).sqrt()
}

/// Rectangle design of the notched "heart": A at (2.5, 2.5), 4 × 3.5, a
/// pointed bottom, slightly bulging sides and two lobes around a notch on top.
pub fn heart_target() -> Vec<f64> {
    let mut t = vec![2.5, 2.5, 4.0, 3.5];
    let side = |f: &dyn Fn(f64) -> f64| (1..=9).map(|j| f(j as f64 / 10.0)).collect::<Vec<_>>();
    // A→B, normal pointing down
    t.extend(side(&|s| 0.2 * (1.0 - (s - 0.5).abs() / 0.5)));
    // B→C
    t.extend(side(&|s| 0.1 * (std::f64::consts::PI * s).sin()));
    // C→D
    t.extend(side(&|s| {
        0.15 * (2.0 * std::f64::consts::PI * s).sin().abs() - 0.2 * (1.0 - (s - 0.5).abs() / 0.15).max(0.0)
    }));
    // D→A
    t.extend(side(&|s| 0.1 * (std::f64::consts::PI * s).sin()));
    t
}

fn anchored_nodes(x: &[f64]) -> Result<Vec<[f64; 2]>> {
    let (dx, dy) = (2.5 - x[0], 2.5 - x[1]);
    Ok(rectangle_nodes(x)?.into_iter().map(|p| [p[0] + dx, p[1] + dy]).collect())
}

fn f4(x: &[f64]) -> Result<f64> {
    let target = anchored_nodes(&heart_target())?;
    let nodes = anchored_nodes(x)?;
    Ok(target
        .iter()
        .zip(&nodes)
        .map(|(a, b)| (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2))
        .sum())
}

/// 2π ∫₀¹ r(y) √(1 + r′(y)²) dy with r′ from finite differences on the
/// sampled curve and the composite trapezoid rule.
pub fn surface_of_revolution<F: Fn(f64) -> f64>(r: F, panels: usize) -> f64 {
    let panels = panels.max(2);
    let h = 1.0 / panels as f64;
    let vals: Vec<f64> = (0..=panels).map(|k| r(k as f64 * h)).collect();
    let deriv = |k: usize| -> f64 {
        if k == 0 {
            (-3.0 * vals[0] + 4.0 * vals[1] - vals[2]) / (2.0 * h)
        } else if k == panels {
            (3.0 * vals[k] - 4.0 * vals[k - 1] + vals[k - 2]) / (2.0 * h)
        } else {
            (vals[k + 1] - vals[k - 1]) / (2.0 * h)
        }
    };
    let g = |k: usize| vals[k] * (1.0 + deriv(k).powi(2)).sqrt();
    let inner: f64 = (1..panels).map(g).sum();
    2.0 * std::f64::consts::PI * h * (0.5 * (g(0) + g(panels)) + inner)
}

fn f5(x: &[f64]) -> f64 {
    let profile = catenoid_profile(x);
    surface_of_revolution(|y| profile.eval(y), AREA_PANELS)
}

fn fmg(x: &[f64]) -> Result<f64> {
    if x.iter().any(|v| v.abs() > GRIEWANK_BOUND) {
        return Err(Error::InvalidDesign(format!(
            "design outside [-{GRIEWANK_BOUND}, {GRIEWANK_BOUND}]^{GRIEWANK_DIM}"
        )));
    }
    let griewank = (x[0] * x[0] + x[1] * x[1]) / 4000.0 - x[0].cos() * (x[1] / 2f64.sqrt()).cos() + 1.0;
    let sphere: f64 = x[2..10]
        .iter()
        .zip(GRIEWANK_CENTER)
        .map(|(v, c)| (v - c).powi(2))
        .sum::<f64>()
        / 400_000.0;
    Ok(griewank + sphere)
}
