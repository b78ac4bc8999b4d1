//! Planar projection of polygonal curves into Gauss-code diagrams.

use super::diagram::{Diagram, GaussEntry};
use crate::error::{Error, Result};
use crate::geometry::Vec3;

/// Parametric and height margin below which a projection counts as non-generic.
pub const GENERIC_TOLERANCE: f64 = 1e-9;

/// Orthonormal `(u, v)` spanning the plane perpendicular to unit `d`.
fn plane_basis(d: Vec3) -> (Vec3, Vec3) {
    let helper = if d.x.abs() < 0.6 { Vec3::new(1.0, 0.0, 0.0) } else { Vec3::new(0.0, 1.0, 0.0) };
    let u = d.cross(helper).normalized();
    let v = d.cross(u);
    (u, v)
}

#[derive(Clone, Copy)]
struct Projected {
    x: f64,
    y: f64,
    h: f64,
}

#[inline]
fn cross2(ax: f64, ay: f64, bx: f64, by: f64) -> f64 {
    ax * by - ay * bx
}

struct Hit {
    segment: usize,
    param: f64,
    crossing: usize,
    over: bool,
}

/// Projects a polygonal curve along `direction` and records its crossings.
///
/// With `closed` set, the last point joins back to the first. Over/under is
/// decided by height along `direction` (larger height is over). Any crossing
/// within [`GENERIC_TOLERANCE`] of a vertex, two crossings at one place on a
/// segment, a vanishing segment or overlapping collinear segments make the
/// projection non-generic and yield [`Error::DegenerateProjection`].
pub fn project(points: &[Vec3], direction: Vec3, closed: bool) -> Result<Diagram> {
    let norm = direction.norm();
    if !(norm > 0.0) || !direction.is_finite() {
        return Err(Error::Domain("projection direction must be a nonzero finite vector".into()));
    }
    let d = direction / norm;
    let (u, v) = plane_basis(d);
    let proj: Vec<Projected> = points.iter().map(|&p| Projected { x: p.dot(u), y: p.dot(v), h: p.dot(d) }).collect();
    let m = points.len();
    let segments = if closed { m } else { m.saturating_sub(1) };
    if segments < 2 {
        return Ok(Diagram::unknot());
    }
    let scale = points.iter().map(|p| p.norm()).fold(1.0, f64::max);
    let seg = |i: usize| (proj[i], proj[(i + 1) % m]);

    for i in 0..segments {
        let (a, b) = seg(i);
        let len = (b.x - a.x).hypot(b.y - a.y);
        if len <= GENERIC_TOLERANCE * scale {
            return Err(Error::DegenerateProjection("segment projects to a point"));
        }
    }

    let mut hits: Vec<Hit> = Vec::new();
    let mut signs: Vec<i8> = Vec::new();
    for i in 0..segments {
        let (p0, p1) = seg(i);
        let (rx, ry) = (p1.x - p0.x, p1.y - p0.y);
        for j in i + 1..segments {
            let adjacent = j == i + 1 || (closed && i == 0 && j == segments - 1);
            let (q0, q1) = seg(j);
            let (sx, sy) = (q1.x - q0.x, q1.y - q0.y);
            let denom = cross2(rx, ry, sx, sy);
            let rs = rx.hypot(ry) * sx.hypot(sy);
            if denom.abs() <= GENERIC_TOLERANCE * rs {
                // parallel: reject only if the two lie on one line and overlap
                let (wx, wy) = (q0.x - p0.x, q0.y - p0.y);
                let offset = cross2(rx, ry, wx, wy).abs() / rx.hypot(ry);
                if offset <= GENERIC_TOLERANCE * scale {
                    let r2 = rx * rx + ry * ry;
                    let t0 = (wx * rx + wy * ry) / r2;
                    let t1 = ((q1.x - p0.x) * rx + (q1.y - p0.y) * ry) / r2;
                    let (lo, hi) = if t0 < t1 { (t0, t1) } else { (t1, t0) };
                    let overlap = hi.min(1.0) - lo.max(0.0);
                    if overlap > GENERIC_TOLERANCE || (!adjacent && overlap >= -GENERIC_TOLERANCE) {
                        return Err(Error::DegenerateProjection("collinear overlapping segments"));
                    }
                }
                continue;
            }
            if adjacent {
                continue;
            }
            let (wx, wy) = (q0.x - p0.x, q0.y - p0.y);
            let t = cross2(wx, wy, sx, sy) / denom;
            let s = cross2(wx, wy, rx, ry) / denom;
            let eps = GENERIC_TOLERANCE;
            if t < -eps || t > 1.0 + eps || s < -eps || s > 1.0 + eps {
                continue;
            }
            if t <= eps || t >= 1.0 - eps || s <= eps || s >= 1.0 - eps {
                return Err(Error::DegenerateProjection("crossing at a vertex"));
            }
            let hi = p0.h + t * (p1.h - p0.h);
            let hj = q0.h + s * (q1.h - q0.h);
            if (hi - hj).abs() <= GENERIC_TOLERANCE * scale {
                return Err(Error::DegenerateProjection("curve intersects itself"));
            }
            let crossing = signs.len();
            let i_over = hi > hj;
            // right-handed: the under strand turns counterclockwise onto the over strand
            let (ox, oy, ux, uy) = if i_over { (rx, ry, sx, sy) } else { (sx, sy, rx, ry) };
            signs.push(if cross2(ux, uy, ox, oy) > 0.0 { 1 } else { -1 });
            hits.push(Hit { segment: i, param: t, crossing, over: i_over });
            hits.push(Hit { segment: j, param: s, crossing, over: !i_over });
        }
    }

    hits.sort_by(|a, b| a.segment.cmp(&b.segment).then(a.param.total_cmp(&b.param)));
    for w in hits.windows(2) {
        if w[0].segment == w[1].segment && (w[1].param - w[0].param) <= GENERIC_TOLERANCE {
            return Err(Error::DegenerateProjection("two crossings coincide"));
        }
    }
    let code = hits.into_iter().map(|h| GaussEntry { crossing: h.crossing, over: h.over }).collect();
    Diagram::from_gauss(code, signs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> Vec<Vec3> {
        vec![Vec3::new(0.0, 0.0, 0.0), Vec3::new(1.0, 0.0, 0.0), Vec3::new(1.0, 1.0, 0.0), Vec3::new(0.0, 1.0, 0.0)]
    }

    #[test]
    fn planar_square_has_no_crossings() {
        let d = project(&square(), Vec3::new(0.0, 0.0, 1.0), true).unwrap();
        assert_eq!(d.crossing_count(), 0);
        let d = project(&square(), Vec3::new(0.3, -0.2, 1.0), true).unwrap();
        assert_eq!(d.crossing_count(), 0);
    }

    #[test]
    fn edge_parallel_direction_is_degenerate() {
        let err = project(&square(), Vec3::new(1.0, 0.0, 0.0), true).unwrap_err();
        assert!(matches!(err, Error::DegenerateProjection(_)));
        assert!(project(&square(), Vec3::ZERO, true).is_err());
    }

    #[test]
    fn single_crossing_heights() {
        // two skew segments seen from above: one crossing, the higher one over
        let pts = vec![
            Vec3::new(-1.0, 0.0, 1.0),
            Vec3::new(1.0, 0.0, 1.0),
            Vec3::new(0.0, -1.0, 0.0),
            Vec3::new(0.0, 1.0, 0.0),
        ];
        let d = project(&pts, Vec3::new(0.0, 0.0, 1.0), false).unwrap();
        assert_eq!(d.crossing_count(), 1);
        let code = &d.components()[0];
        assert!(code[0].over && !code[1].over);
        let flipped = project(&pts, Vec3::new(0.0, 0.0, -1.0), false).unwrap();
        assert!(!flipped.components()[0][0].over);
    }

    #[test]
    fn self_intersection_is_degenerate() {
        let pts = vec![
            Vec3::new(-1.0, 0.0, 0.0),
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(0.0, -1.0, 0.0),
            Vec3::new(0.0, 1.0, 0.0),
        ];
        assert!(matches!(project(&pts, Vec3::new(0.0, 0.0, 1.0), false), Err(Error::DegenerateProjection(_))));
    }
}
