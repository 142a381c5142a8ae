//! Planar contours: circles and polylines, inside tests and distances.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Point = [f64; 2];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Curve {
    Circle { center: Point, radius: f64 },
    Polyline { points: Vec<Point>, closed: bool },
}

impl Curve {
    pub fn circle(center: Point, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) || !center.iter().all(|c| c.is_finite()) {
            return Err(Error::InvalidDesign(format!("circle radius must be positive, got {radius}")));
        }
        Ok(Curve::Circle { center, radius })
    }

    pub fn polyline(points: Vec<Point>, closed: bool) -> Result<Self> {
        let min = if closed { 3 } else { 2 };
        if points.len() < min {
            return Err(Error::InvalidDesign(format!(
                "{} polyline needs at least {min} points, got {}",
                if closed { "closed" } else { "open" },
                points.len()
            )));
        }
        if points.iter().flatten().any(|c| !c.is_finite()) {
            return Err(Error::InvalidDesign("non-finite contour coordinate".into()));
        }
        Ok(Curve::Polyline { points, closed })
    }

    pub fn is_closed(&self) -> bool {
        match self {
            Curve::Circle { .. } => true,
            Curve::Polyline { closed, .. } => *closed,
        }
    }

    pub fn length(&self) -> f64 {
        match self {
            Curve::Circle { radius, .. } => 2.0 * std::f64::consts::PI * radius,
            Curve::Polyline { points, closed } => segments(points, *closed)
                .map(|(a, b)| dist(a, b))
                .sum(),
        }
    }

    pub fn distance(&self, p: Point) -> f64 {
        match self {
            Curve::Circle { center, radius } => (dist(p, *center) - radius).abs(),
            Curve::Polyline { points, closed } => segments(points, *closed)
                .map(|(a, b)| segment_distance(p, a, b))
                .fold(f64::INFINITY, f64::min),
        }
    }

    /// Even-odd inside test; always false for open curves.
    pub fn contains(&self, p: Point) -> bool {
        match self {
            Curve::Circle { center, radius } => dist(p, *center) < *radius,
            Curve::Polyline { points, closed } => {
                if !closed {
                    return false;
                }
                let mut inside = false;
                for (a, b) in segments(points, true) {
                    if (a[1] > p[1]) != (b[1] > p[1]) {
                        let x = a[0] + (p[1] - a[1]) * (b[0] - a[0]) / (b[1] - a[1]);
                        if p[0] < x {
                            inside = !inside;
                        }
                    }
                }
                inside
            }
        }
    }

    /// `n` points equispaced in arclength. Circles start at the rightmost
    /// point and run counter-clockwise; polylines start at their first vertex.
    /// Open curves include both end points.
    pub fn resample(&self, n: usize) -> Result<Vec<Point>> {
        match self {
            Curve::Circle { center, radius } => Ok((0..n)
                .map(|k| {
                    let t = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
                    [center[0] + radius * t.cos(), center[1] + radius * t.sin()]
                })
                .collect()),
            Curve::Polyline { points, closed } => {
                let total = self.length();
                if !(total > 0.0) {
                    return Err(Error::InvalidDesign("zero-length contour".into()));
                }
                let step = if *closed {
                    total / n as f64
                } else {
                    total / (n.max(2) - 1) as f64
                };
                let segs: Vec<(Point, Point)> = segments(points, *closed).collect();
                let mut out = Vec::with_capacity(n);
                let mut seg = 0;
                let mut start = 0.0;
                for k in 0..n {
                    let s = (k as f64 * step).min(total);
                    loop {
                        let len = dist(segs[seg].0, segs[seg].1);
                        if s <= start + len || seg + 1 == segs.len() {
                            let (a, b) = segs[seg];
                            let u = if len > 0.0 { ((s - start) / len).clamp(0.0, 1.0) } else { 0.0 };
                            out.push([a[0] + u * (b[0] - a[0]), a[1] + u * (b[1] - a[1])]);
                            break;
                        }
                        start += len;
                        seg += 1;
                    }
                }
                Ok(out)
            }
        }
    }
}

/// A shape made of one or more disjoint curves.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContourShape {
    pub parts: Vec<Curve>,
}

impl ContourShape {
    pub fn single(curve: Curve) -> Self {
        Self { parts: vec![curve] }
    }

    pub fn is_closed(&self) -> bool {
        self.parts.iter().all(Curve::is_closed)
    }

    /// Even-odd over all parts.
    pub fn contains(&self, p: Point) -> bool {
        self.parts.iter().filter(|c| c.contains(p)).count() % 2 == 1
    }

    pub fn distance(&self, p: Point) -> f64 {
        self.parts
            .iter()
            .map(|c| c.distance(p))
            .fold(f64::INFINITY, f64::min)
    }

    /// Positive inside, negative outside.
    pub fn signed_distance(&self, p: Point) -> f64 {
        let d = self.distance(p);
        if self.contains(p) {
            d
        } else {
            -d
        }
    }
}

fn segments(points: &[Point], closed: bool) -> impl Iterator<Item = (Point, Point)> + '_ {
    let n = points.len();
    let count = if closed { n } else { n.saturating_sub(1) };
    (0..count).map(move |i| (points[i], points[(i + 1) % n]))
}

pub fn dist(a: Point, b: Point) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

fn segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let ab = [b[0] - a[0], b[1] - a[1]];
    let len2 = ab[0] * ab[0] + ab[1] * ab[1];
    if len2 == 0.0 {
        return dist(p, a);
    }
    let t = (((p[0] - a[0]) * ab[0] + (p[1] - a[1]) * ab[1]) / len2).clamp(0.0, 1.0);
    dist(p, [a[0] + t * ab[0], a[1] + t * ab[1]])
}
