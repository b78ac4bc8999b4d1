//! Equilateral polygonal knots built from smooth parametric curves.

use crate::error::{Error, Result};
use crate::geometry::{Ring, Vec3};

/// Steps of the forward scan used to bracket each chord before bisection.
const SCAN_STEPS_PER_EDGE: usize = 400;

/// Smallest `t' > t` with `|c(t') - c(t)| >= chord`, or `None` past `t_max`.
fn next_vertex(curve: &dyn Fn(f64) -> Vec3, t: f64, chord: f64, dt: f64, t_max: f64) -> Option<f64> {
    let origin = curve(t);
    let mut lo = t;
    let mut hi = t + dt;
    while (curve(hi) - origin).norm() < chord {
        lo = hi;
        hi += dt;
        if hi > t_max {
            return None;
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (curve(mid) - origin).norm() < chord {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * hi.abs().max(1.0) {
            break;
        }
    }
    Some(hi)
}

/// Parameter reached after `n` chords of length `chord`, starting at 0.
fn walk(curve: &dyn Fn(f64) -> Vec3, n: usize, chord: f64, period: f64) -> (f64, Vec<f64>) {
    let dt = period / (n * SCAN_STEPS_PER_EDGE) as f64;
    let mut ts = Vec::with_capacity(n);
    let mut t = 0.0;
    for _ in 0..n {
        ts.push(t);
        match next_vertex(curve, t, chord, dt, 3.0 * period) {
            Some(next) => t = next,
            None => return (f64::INFINITY, ts),
        }
    }
    (t, ts)
}

/// Inscribes an equilateral `n`-gon in the closed curve `curve` of period
/// `period` and rescales it to unit edges. The chord length is found by
/// bisection so that `n` chords exactly return to the start.
pub fn equilateral_polygon(curve: &dyn Fn(f64) -> Vec3, period: f64, n: usize) -> Result<Ring> {
    if n < 3 {
        return Err(Error::TooFewEdges(n));
    }
    let perimeter: f64 = (0..n * SCAN_STEPS_PER_EDGE)
        .map(|i| {
            let h = period / (n * SCAN_STEPS_PER_EDGE) as f64;
            (curve((i + 1) as f64 * h) - curve(i as f64 * h)).norm()
        })
        .sum();
    let mut lo = 0.25 * perimeter / n as f64;
    let mut hi = 1.01 * perimeter / n as f64;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if walk(curve, n, mid, period).0 < period {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * hi {
            break;
        }
    }
    let chord = 0.5 * (lo + hi);
    let (_, ts) = walk(curve, n, chord, period);
    if ts.len() != n {
        return Err(Error::Domain("failed to inscribe an equilateral polygon".into()));
    }
    let points: Vec<Vec3> = ts.iter().map(|&t| curve(t) / chord).collect();
    let edges: Vec<Vec3> = (0..n).map(|i| (points[(i + 1) % n] - points[i]).normalized()).collect();
    // remove the residual closure gap, spread over all edges, then re-validate
    let gap = edges.iter().copied().sum::<Vec3>() / n as f64;
    let edges = edges.into_iter().map(|e| (e - gap).normalized()).collect();
    Ring::new(edges)
}

/// Torus knot `(p, q)` on a torus of radii 2 and 1.
pub fn torus_knot_curve(p: f64, q: f64) -> impl Fn(f64) -> Vec3 {
    move |t: f64| {
        let r = 2.0 + (q * t).cos();
        Vec3::new(r * (p * t).cos(), r * (p * t).sin(), (q * t).sin())
    }
}

/// Equilateral `n`-edge trefoil, inscribed in the (2, 3) torus knot.
pub fn trefoil_ring(n: usize) -> Result<Ring> {
    equilateral_polygon(&torus_knot_curve(2.0, 3.0), std::f64::consts::TAU, n)
}

/// Equilateral `n`-edge figure-eight knot, inscribed in
/// `((2 + cos 2t) cos 3t, (2 + cos 2t) sin 3t, sin 4t)`.
pub fn figure_eight_ring(n: usize) -> Result<Ring> {
    let curve = |t: f64| {
        let r = 2.0 + (2.0 * t).cos();
        Vec3::new(r * (3.0 * t).cos(), r * (3.0 * t).sin(), (4.0 * t).sin())
    };
    equilateral_polygon(&curve, std::f64::consts::TAU, n)
}
