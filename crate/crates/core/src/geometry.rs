//! Vectors, closed equilateral polygons (rings), open chains and the
//! per-configuration shape observables measured on them.
//!
//! A ring of `n` edges is stored as its unit edge vectors `e_1..e_n`. Vertex
//! `v_j` is the prefix sum `e_1 + .. + e_j`, so `v_0` is the origin and, by
//! closure, `v_n` returns to it. Edge and start indices in the public API are
//! 1-based and wrap cyclically, matching how the observables are averaged
//! over every start position of a ring.

use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-edge tolerance on `|e| = 1`.
pub const UNIT_TOLERANCE: f64 = 1e-9;
/// Closure tolerance per edge; a ring of `n` edges may miss closure by `n` times this.
pub const CLOSURE_TOLERANCE_PER_EDGE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3 { x: 0.0, y: 0.0, z: 0.0 };

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    #[inline]
    pub fn dot(self, other: Vec3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    #[inline]
    pub fn cross(self, other: Vec3) -> Vec3 {
        Vec3 {
            x: self.y * other.z - self.z * other.y,
            y: self.z * other.x - self.x * other.z,
            z: self.x * other.y - self.y * other.x,
        }
    }

    #[inline]
    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// Unit vector in the same direction. The zero vector maps to NaNs.
    #[inline]
    pub fn normalized(self) -> Vec3 {
        self / self.norm()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }
}

impl From<[f64; 3]> for Vec3 {
    fn from(a: [f64; 3]) -> Self {
        Vec3::new(a[0], a[1], a[2])
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    #[inline]
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl AddAssign for Vec3 {
    #[inline]
    fn add_assign(&mut self, o: Vec3) {
        self.x += o.x;
        self.y += o.y;
        self.z += o.z;
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    #[inline]
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl SubAssign for Vec3 {
    #[inline]
    fn sub_assign(&mut self, o: Vec3) {
        self.x -= o.x;
        self.y -= o.y;
        self.z -= o.z;
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    #[inline]
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    #[inline]
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Mul<Vec3> for f64 {
    type Output = Vec3;
    #[inline]
    fn mul(self, v: Vec3) -> Vec3 {
        v * self
    }
}

impl Div<f64> for Vec3 {
    type Output = Vec3;
    #[inline]
    fn div(self, s: f64) -> Vec3 {
        Vec3::new(self.x / s, self.y / s, self.z / s)
    }
}

impl std::iter::Sum for Vec3 {
    fn sum<I: Iterator<Item = Vec3>>(iter: I) -> Vec3 {
        iter.fold(Vec3::ZERO, |a, b| a + b)
    }
}

fn check_unit_edges(edges: &[Vec3]) -> Result<()> {
    for (index, e) in edges.iter().enumerate() {
        if !e.is_finite() {
            return Err(Error::NonFinite(index));
        }
        let norm = e.norm();
        if (norm - 1.0).abs() > UNIT_TOLERANCE {
            return Err(Error::NotUnitEdge { index, norm });
        }
    }
    Ok(())
}

/// Mean squared distance of `points` from their centroid, computed in two passes.
pub fn radius_of_gyration_sq_of(points: &[Vec3]) -> f64 {
    if points.is_empty() {
        return 0.0;
    }
    let m = points.len() as f64;
    let center = points.iter().copied().sum::<Vec3>() / m;
    points.iter().map(|&p| (p - center).norm_sq()).sum::<f64>() / m
}

/// A closed equilateral polygon: `n >= 3` unit edge vectors summing to zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec3>", into = "Vec<Vec3>")]
pub struct Ring {
    edges: Vec<Vec3>,
}

impl TryFrom<Vec<Vec3>> for Ring {
    type Error = Error;
    fn try_from(edges: Vec<Vec3>) -> Result<Self> {
        Ring::new(edges)
    }
}

impl From<Ring> for Vec<Vec3> {
    fn from(r: Ring) -> Self {
        r.edges
    }
}

impl Ring {
    /// Validates unit edge lengths and closure.
    pub fn new(edges: Vec<Vec3>) -> Result<Self> {
        let n = edges.len();
        if n < 3 {
            return Err(Error::TooFewEdges(n));
        }
        check_unit_edges(&edges)?;
        let defect = edges.iter().copied().sum::<Vec3>().norm();
        let tolerance = CLOSURE_TOLERANCE_PER_EDGE * n as f64;
        if defect > tolerance {
            return Err(Error::NotClosed { defect, tolerance });
        }
        Ok(Ring { edges })
    }

    /// Builds a ring from vertex positions `v_0, v_1, .., v_{n-1}` (the
    /// closing edge `v_{n-1} -> v_0` is implied).
    pub fn from_vertices(points: &[Vec3]) -> Result<Self> {
        let n = points.len();
        let edges = (0..n).map(|i| points[(i + 1) % n] - points[i]).collect();
        Ring::new(edges)
    }

    /// Skips validation; callers guarantee the invariants.
    pub(crate) fn from_edges_unchecked(edges: Vec<Vec3>) -> Self {
        Ring { edges }
    }

    /// The regular planar `n`-gon in the xy-plane.
    pub fn regular(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::TooFewEdges(n));
        }
        let edges = (0..n)
            .map(|i| {
                let a = std::f64::consts::TAU * i as f64 / n as f64;
                Vec3::new(a.cos(), a.sin(), 0.0)
            })
            .collect();
        Ring::new(edges)
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn edges(&self) -> &[Vec3] {
        &self.edges
    }

    pub fn into_edges(self) -> Vec<Vec3> {
        self.edges
    }

    /// Edge `e_i` for a 1-based, cyclically wrapped index.
    pub fn edge(&self, i: usize) -> Vec3 {
        let n = self.edges.len();
        self.edges[(i + n - 1) % n]
    }

    /// `v_0 .. v_n`; `v_0` is the origin and `v_n` equals it up to closure drift.
    pub fn vertices(&self) -> Vec<Vec3> {
        let mut out = Vec::with_capacity(self.edges.len() + 1);
        let mut v = Vec3::ZERO;
        out.push(v);
        for &e in &self.edges {
            v += e;
            out.push(v);
        }
        out
    }

    /// `|e_1 + .. + e_n|`.
    pub fn closure_defect(&self) -> f64 {
        self.edges.iter().copied().sum::<Vec3>().norm()
    }

    /// Squared distance between the endpoints of the `k` consecutive edges
    /// starting at edge `j` (1-based, cyclic).
    pub fn squared_end_to_end(&self, k: usize, j: usize) -> Result<f64> {
        let n = self.len();
        if k == 0 || k > n {
            return Err(Error::LengthOutOfRange { k, n });
        }
        let chord: Vec3 = (0..k).map(|m| self.edge(j + m)).sum();
        Ok(chord.norm_sq())
    }

    /// Average of `v_1 .. v_n`. `v_n` is the base point, counted once.
    pub fn center_of_mass(&self) -> Vec3 {
        let v = self.vertices();
        v[1..].iter().copied().sum::<Vec3>() / self.len() as f64
    }

    /// `(1/n) sum |v_k - c|^2` over `v_1 .. v_n`.
    pub fn radius_of_gyration_sq(&self) -> f64 {
        radius_of_gyration_sq_of(&self.vertices()[1..])
    }

    /// The same quantity through `(1/n) sum |v_k|^2 - |c|^2`.
    pub fn radius_of_gyration_sq_by_moments(&self) -> f64 {
        let v = self.vertices();
        let n = self.len() as f64;
        let mean_sq = v[1..].iter().map(|p| p.norm_sq()).sum::<f64>() / n;
        mean_sq - self.center_of_mass().norm_sq()
    }

    /// The subsegment of `k` edges beginning at edge `start` (1-based, cyclic).
    pub fn subsegment(&self, start: usize, k: usize) -> Result<Subsegment<'_>> {
        let n = self.len();
        if k == 0 || k > n {
            return Err(Error::LengthOutOfRange { k, n });
        }
        Ok(Subsegment { ring: self, start, len: k })
    }

    /// Mean of [`Subsegment::radius_of_gyration_sq`] over all `n` start positions.
    pub fn mean_subsegment_rg_sq(&self, k: usize) -> Result<f64> {
        let n = self.len();
        let mut total = 0.0;
        for i in 1..=n {
            total += self.subsegment(i, k)?.radius_of_gyration_sq();
        }
        Ok(total / n as f64)
    }

    /// Vertices `v_{i-1} .. v_{i-1+k}` of the open arc made of edges
    /// `e_i .. e_{i+k-1}`, translated so the arc starts at the origin.
    pub fn arc_points(&self, start: usize, k: usize) -> Vec<Vec3> {
        let mut out = Vec::with_capacity(k + 1);
        let mut v = Vec3::ZERO;
        out.push(v);
        for m in 0..k {
            v += self.edge(start + m);
            out.push(v);
        }
        out
    }
}

/// Edges `e_i, .., e_{i+k-1}` of a ring (indices mod n), viewed as a chain
/// in its own right with vertices `v'_j = e_i + .. + e_{i+j-1}`, `j = 1..k`.
#[derive(Debug, Clone, Copy)]
pub struct Subsegment<'a> {
    ring: &'a Ring,
    start: usize,
    len: usize,
}

impl Subsegment<'_> {
    pub fn start(&self) -> usize {
        self.start
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// `v'_1 .. v'_k`.
    pub fn points(&self) -> Vec<Vec3> {
        let mut v = Vec3::ZERO;
        (0..self.len)
            .map(|m| {
                v += self.ring.edge(self.start + m);
                v
            })
            .collect()
    }

    pub fn center_of_mass(&self) -> Vec3 {
        self.points().into_iter().sum::<Vec3>() / self.len as f64
    }

    pub fn radius_of_gyration_sq(&self) -> f64 {
        radius_of_gyration_sq_of(&self.points())
    }
}

/// An open random walk of `n >= 1` unit steps starting at the origin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OpenChain {
    edges: Vec<Vec3>,
}

impl OpenChain {
    pub fn new(edges: Vec<Vec3>) -> Result<Self> {
        if edges.is_empty() {
            return Err(Error::EmptyChain);
        }
        check_unit_edges(&edges)?;
        Ok(OpenChain { edges })
    }

    pub(crate) fn from_edges_unchecked(edges: Vec<Vec3>) -> Self {
        OpenChain { edges }
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn edges(&self) -> &[Vec3] {
        &self.edges
    }

    /// `v_0 .. v_n` with `v_0` at the origin.
    pub fn vertices(&self) -> Vec<Vec3> {
        let mut out = Vec::with_capacity(self.edges.len() + 1);
        let mut v = Vec3::ZERO;
        out.push(v);
        for &e in &self.edges {
            v += e;
            out.push(v);
        }
        out
    }

    pub fn squared_end_to_end(&self) -> f64 {
        self.edges.iter().copied().sum::<Vec3>().norm_sq()
    }

    /// Radius of gyration over `v_1 .. v_n`, the same vertex convention used
    /// for rings and subsegments. Its ensemble mean is `(n^2 - 1) / (6n)`.
    pub fn radius_of_gyration_sq(&self) -> f64 {
        radius_of_gyration_sq_of(&self.vertices()[1..])
    }
}
