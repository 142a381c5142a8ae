//! NACA 4-digit airfoils with optional Hicks–Henne bumps.

use super::geometry::Point;

/// Closed trailing edge variant of the last thickness coefficient.
const A4_CLOSED: f64 = -0.1036;

pub fn thickness(t: f64, x: f64) -> f64 {
    5.0 * t
        * (0.2969 * x.max(0.0).sqrt() - 0.1260 * x - 0.3516 * x * x + 0.2843 * x.powi(3)
            + A4_CLOSED * x.powi(4))
}

/// Camber line height and slope.
pub fn camber(m: f64, p: f64, x: f64) -> (f64, f64) {
    if m == 0.0 {
        return (0.0, 0.0);
    }
    if x < p {
        (m / (p * p) * (2.0 * p * x - x * x), 2.0 * m / (p * p) * (p - x))
    } else {
        let q = (1.0 - p) * (1.0 - p);
        (m / q * ((1.0 - 2.0 * p) + 2.0 * p * x - x * x), 2.0 * m / q * (p - x))
    }
}

/// Hicks–Henne bump peaking at chord station `h`.
pub fn bump(h: f64, x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        return 0.0;
    }
    let e = 0.5f64.ln() / h.ln();
    (std::f64::consts::PI * x.powf(e)).sin().powi(4)
}

/// Bump stations: 10 on the upper surface, then 9 on the lower one.
pub fn bump_stations() -> (Vec<f64>, Vec<f64>) {
    (
        (1..=10).map(|i| i as f64 / 11.0).collect(),
        (1..=9).map(|j| j as f64 / 10.0).collect(),
    )
}

/// Upper and lower surface points at chord station `x`. `bumps` holds the
/// 19 amplitudes (upper first) or is empty.
pub fn surface(m: f64, p: f64, t: f64, bumps: &[f64], x: f64) -> (Point, Point) {
    let yt = thickness(t, x);
    let (yc, slope) = camber(m, p, x);
    let th = slope.atan();
    let (s, c) = th.sin_cos();
    let (mut du, mut dl) = (0.0, 0.0);
    if !bumps.is_empty() {
        let (up, low) = bump_stations();
        du = up.iter().zip(&bumps[..10]).map(|(h, l)| l * bump(*h, x)).sum();
        dl = low.iter().zip(&bumps[10..]).map(|(h, l)| l * bump(*h, x)).sum();
    }
    (
        [x - (yt + du) * s, yc + (yt + du) * c],
        [x + (yt + dl) * s, yc - (yt + dl) * c],
    )
}

/// `n` contour points (n even): upper surface from the leading edge to the
/// trailing edge, then the lower surface back, on cosine-spaced stations.
pub fn contour(m: f64, p: f64, t: f64, bumps: &[f64], n: usize) -> Vec<Point> {
    let stations = n / 2 + 1;
    let xs: Vec<f64> = (0..stations)
        .map(|i| 0.5 * (1.0 - (std::f64::consts::PI * i as f64 / (stations - 1) as f64).cos()))
        .collect();
    let sides: Vec<(Point, Point)> = xs.iter().map(|&x| surface(m, p, t, bumps, x)).collect();
    let mut out: Vec<Point> = sides.iter().map(|s| s.0).collect();
    out.extend(sides[1..stations - 1].iter().rev().map(|s| s.1));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn naca0012_reference_thickness() {
        // NACA 0012 half thickness at 30% chord is 0.06002 in the open-TE tables
        let yt = thickness(0.12, 0.3);
        assert!((yt - 0.06002).abs() < 1e-4, "{yt}");
        assert!(thickness(0.12, 1.0).abs() < 1e-12);
    }

    #[test]
    fn camber_is_continuous_at_max_position() {
        let (a, sa) = camber(0.04, 0.4, 0.4 - 1e-12);
        let (b, sb) = camber(0.04, 0.4, 0.4);
        assert!((a - b).abs() < 1e-10 && (a - 0.04).abs() < 1e-10);
        assert!(sa.abs() < 1e-9 && sb.abs() < 1e-12);
    }

    #[test]
    fn bump_peaks_at_station() {
        for h in [0.1, 0.5, 0.9] {
            assert!((bump(h, h) - 1.0).abs() < 1e-12);
        }
        assert_eq!(bump(0.3, 0.0), 0.0);
    }

    #[test]
    fn contour_shape() {
        let c = contour(0.02, 0.4, 0.12, &[], 200);
        assert_eq!(c.len(), 200);
        assert_eq!(c[0], [0.0, 0.0]);
        assert!((c[100][0] - 1.0).abs() < 1e-12);
    }
}
