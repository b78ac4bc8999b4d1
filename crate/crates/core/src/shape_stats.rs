//! Closed-form ensemble averages for ideal rings and open chains, and the
//! streaming estimators that are checked against them.
//!
//! Oracles are evaluated in exact rational arithmetic and converted to `f64`
//! at the boundary, so reductions such as `subseg_rg(n, n) == rg(n)` hold
//! exactly.

use std::fmt::Write as _;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Ring, Vec3};

pub type Rational = Ratio<i128>;

fn to_f64(r: Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

fn check_k(k: usize, lo: usize, hi: usize, n: usize) -> Result<()> {
    if k < lo || k > hi {
        return Err(Error::LengthOutOfRange { k, n });
    }
    Ok(())
}

fn check_n(n: usize, min: usize) -> Result<()> {
    if n < min {
        return Err(Error::Domain(format!("ring length {n} below {min}")));
    }
    Ok(())
}

/// Exact `-1/(n-1)`.
pub fn edge_product_exact(n: usize) -> Result<Rational> {
    check_n(n, 2)?;
    Ok(Rational::new(-1, n as i128 - 1))
}

/// Mean of `e_i . e_j` over distinct edges of an `n`-ring.
pub fn analytic_edge_product(n: usize) -> Result<f64> {
    edge_product_exact(n).map(to_f64)
}

/// Exact `k(n-k)/(n-1)` for `1 <= k <= n`; the value at `k = n` is the
/// trivial closure chord, 0.
pub fn e2e_exact(k: usize, n: usize) -> Result<Rational> {
    check_n(n, 2)?;
    check_k(k, 1, n, n)?;
    let (k, n) = (k as i128, n as i128);
    Ok(Rational::new(k * (n - k), n - 1))
}

/// Mean squared distance between ring vertices `k` edges apart, `1 <= k <= n-1`.
pub fn analytic_e2e(k: usize, n: usize) -> Result<f64> {
    check_k(k, 1, n.saturating_sub(1), n)?;
    e2e_exact(k, n).map(to_f64)
}

/// Exact `(n+1)/12`.
pub fn com_sq_exact(n: usize) -> Result<Rational> {
    check_n(n, 2)?;
    Ok(Rational::new(n as i128 + 1, 12))
}

/// Mean of `|c_P|^2`, the squared distance from the base vertex to the centroid.
pub fn analytic_com_sq(n: usize) -> Result<f64> {
    com_sq_exact(n).map(to_f64)
}

/// Exact `(n+1)/12`.
pub fn rg_exact(n: usize) -> Result<Rational> {
    com_sq_exact(n)
}

/// Mean squared radius of gyration of an `n`-ring.
pub fn analytic_rg(n: usize) -> Result<f64> {
    rg_exact(n).map(to_f64)
}

/// Exact `((2k^2 + 3k + 1) 2n - 3k(k+1)^2) / (12k(n-1))`.
pub fn subseg_com_sq_exact(k: usize, n: usize) -> Result<Rational> {
    check_n(n, 2)?;
    check_k(k, 1, n, n)?;
    let (k, n) = (k as i128, n as i128);
    Ok(Rational::new((2 * k * k + 3 * k + 1) * 2 * n - 3 * k * (k + 1) * (k + 1), 12 * k * (n - 1)))
}

/// Mean `|c|^2` of a translated length-`k` subsegment.
pub fn analytic_subseg_com_sq(k: usize, n: usize) -> Result<f64> {
    subseg_com_sq_exact(k, n).map(to_f64)
}

/// Exact `(k^2 - 1)(2n - k) / (12k(n-1))`.
pub fn subseg_rg_exact(k: usize, n: usize) -> Result<Rational> {
    check_n(n, 2)?;
    check_k(k, 1, n, n)?;
    let (k, n) = (k as i128, n as i128);
    Ok(Rational::new((k * k - 1) * (2 * n - k), 12 * k * (n - 1)))
}

/// Mean squared radius of gyration of length-`k` subsegments of an `n`-ring.
pub fn analytic_subseg_rg(k: usize, n: usize) -> Result<f64> {
    subseg_rg_exact(k, n).map(to_f64)
}

/// Open chain of `k` steps: mean squared end-to-end distance, `k`.
pub fn analytic_open_e2e(k: usize) -> Result<f64> {
    check_k(k, 1, usize::MAX, k)?;
    Ok(k as f64)
}

/// Open chain of `k` steps: mean squared radius of gyration, `(k^2-1)/(6k)`.
pub fn analytic_open_rg(k: usize) -> Result<f64> {
    check_k(k, 1, usize::MAX, k)?;
    let k = k as i128;
    Ok(to_f64(Rational::new(k * k - 1, 6 * k)))
}

/// Inverts `(n+1)/12`.
pub fn effective_length_from_rg(rg_sq: f64) -> f64 {
    12.0 * rg_sq - 1.0
}

/// Larger root of `n^2 / (4(n-1)) = m`, the ring length whose peak mean
/// squared internal distance (at `k = n/2`) equals `m`.
pub fn effective_length_from_max_e2e(max_e2e: f64) -> Result<f64> {
    if !(max_e2e >= 1.0) {
        return Err(Error::Domain(format!("maximum squared end-to-end distance {max_e2e} is below 1")));
    }
    let m = max_e2e;
    Ok(2.0 * m + 2.0 * (m * m - m).sqrt())
}

/// Count, mean and sum of squared deviations with an associative merge.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct StreamingMoments {
    pub count: u64,
    pub mean: f64,
    pub m2: f64,
}

impl StreamingMoments {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn merge(&mut self, other: &StreamingMoments) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let na = self.count as f64;
        let nb = other.count as f64;
        let total = na + nb;
        let delta = other.mean - self.mean;
        self.mean += delta * nb / total;
        self.m2 += other.m2 + delta * delta * na * nb / total;
        self.count += other.count;
    }

    /// Unbiased sample variance; 0 for fewer than two observations.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            self.m2 / (self.count - 1) as f64
        }
    }

    pub fn std_error(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            (self.variance() / self.count as f64).sqrt()
        }
    }
}

impl FromIterator<f64> for StreamingMoments {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut m = StreamingMoments::new();
        for x in iter {
            m.push(x);
        }
        m
    }
}

/// Per-ring averages: index `k-1` holds the mean over all start positions
/// of the squared chord over `k` edges (`k = 1..n-1`) and of the subsegment
/// radius of gyration (`k = 1..n`).
#[derive(Debug, Clone, PartialEq)]
pub struct RingObservables {
    pub e2e: Vec<f64>,
    pub rg: Vec<f64>,
}

/// All chord and subsegment averages of one ring in `O(n^2)`.
pub fn ring_observables(ring: &Ring) -> RingObservables {
    let n = ring.len();
    let mut vertices = ring.vertices();
    vertices.pop();
    let center = vertices.iter().copied().sum::<Vec3>() / n as f64;
    for v in &mut vertices {
        *v -= center;
    }
    let mut e2e = vec![0.0; n - 1];
    let mut rg = vec![0.0; n];
    for start in 0..n {
        let base = vertices[start];
        let mut sum = Vec3::ZERO;
        let mut sum_sq = 0.0;
        for k in 1..=n {
            // subsegment from edge start+1 has points v_{start+1} .. v_{start+k}
            let p = vertices[(start + k) % n];
            if k < n {
                e2e[k - 1] += (p - base).norm_sq();
            }
            sum += p;
            sum_sq += p.norm_sq();
            let kf = k as f64;
            let c = sum / kf;
            rg[k - 1] += (sum_sq / kf - c.norm_sq()).max(0.0);
        }
    }
    let nf = n as f64;
    e2e.iter_mut().for_each(|x| *x /= nf);
    rg.iter_mut().for_each(|x| *x /= nf);
    RingObservables { e2e, rg }
}

/// Streaming accumulator behind [`ShapeProfile`].
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileAccumulator {
    n: usize,
    e2e: Vec<StreamingMoments>,
    rg: Vec<StreamingMoments>,
    ring_rg: StreamingMoments,
}

impl ProfileAccumulator {
    pub fn new(n: usize) -> Self {
        ProfileAccumulator {
            n,
            e2e: vec![StreamingMoments::new(); n.saturating_sub(1)],
            rg: vec![StreamingMoments::new(); n],
            ring_rg: StreamingMoments::new(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn count(&self) -> u64 {
        self.ring_rg.count
    }

    pub fn push(&mut self, ring: &Ring) -> Result<()> {
        if ring.len() != self.n {
            return Err(Error::MixedLengths(self.n, ring.len()));
        }
        self.push_observables(&ring_observables(ring), ring.radius_of_gyration_sq());
        Ok(())
    }

    pub fn push_observables(&mut self, obs: &RingObservables, ring_rg: f64) {
        for (m, &x) in self.e2e.iter_mut().zip(&obs.e2e) {
            m.push(x);
        }
        for (m, &x) in self.rg.iter_mut().zip(&obs.rg) {
            m.push(x);
        }
        self.ring_rg.push(ring_rg);
    }

    pub fn merge(&mut self, other: &ProfileAccumulator) -> Result<()> {
        if other.n != self.n {
            return Err(Error::MixedLengths(self.n, other.n));
        }
        for (a, b) in self.e2e.iter_mut().zip(&other.e2e) {
            a.merge(b);
        }
        for (a, b) in self.rg.iter_mut().zip(&other.rg) {
            a.merge(b);
        }
        self.ring_rg.merge(&other.ring_rg);
        Ok(())
    }

    pub fn finish(&self) -> Result<ShapeProfile> {
        if self.count() == 0 {
            return Err(Error::EmptyEnsemble);
        }
        Ok(ShapeProfile {
            n: self.n,
            count: self.count(),
            e2e_mean: self.e2e.iter().map(|m| m.mean).collect(),
            e2e_se: self.e2e.iter().map(|m| m.std_error()).collect(),
            rg_mean: self.rg.iter().map(|m| m.mean).collect(),
            rg_se: self.rg.iter().map(|m| m.std_error()).collect(),
            ring_rg_mean: self.ring_rg.mean,
            ring_rg_se: self.ring_rg.std_error(),
        })
    }
}

/// Ensemble means and standard errors per subsegment length. Standard
/// errors treat each ring's position-averaged value as one observation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapeProfile {
    pub n: usize,
    pub count: u64,
    /// `k = 1..n-1`.
    pub e2e_mean: Vec<f64>,
    pub e2e_se: Vec<f64>,
    /// `k = 1..n`.
    pub rg_mean: Vec<f64>,
    pub rg_se: Vec<f64>,
    /// Whole-ring radius of gyration.
    pub ring_rg_mean: f64,
    pub ring_rg_se: f64,
}

pub const PROFILE_CSV_HEADER: &str = "k,e2e_mean,e2e_se,rg_mean,rg_se,analytic_e2e,analytic_rg,open_e2e,open_rg";

impl ShapeProfile {
    /// Largest mean squared internal distance and the `k` where it occurs.
    pub fn max_e2e(&self) -> (usize, f64) {
        self.e2e_mean
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (i, &x)| if x > best.1 { (i + 1, x) } else { best })
    }

    /// One row per `k = 1..n`. The chord columns are empty at `k = n`.
    pub fn to_csv(&self) -> String {
        let n = self.n;
        let mut out = String::new();
        out.push_str(PROFILE_CSV_HEADER);
        out.push('\n');
        for k in 1..=n {
            let (e2e, e2e_se, a_e2e) = if k < n {
                (
                    self.e2e_mean[k - 1].to_string(),
                    self.e2e_se[k - 1].to_string(),
                    analytic_e2e(k, n).map(|x| x.to_string()).unwrap_or_default(),
                )
            } else {
                Default::default()
            };
            let _ = writeln!(
                out,
                "{k},{e2e},{e2e_se},{},{},{a_e2e},{},{},{}",
                self.rg_mean[k - 1],
                self.rg_se[k - 1],
                analytic_subseg_rg(k, n).unwrap_or(f64::NAN),
                analytic_open_e2e(k).unwrap_or(f64::NAN),
                analytic_open_rg(k).unwrap_or(f64::NAN),
            );
        }
        out
    }

    /// Reads back the measured columns of [`ShapeProfile::to_csv`]. Leading
    /// `#` comment lines are skipped. The sample count and whole-ring fields
    /// are not part of the table and come back as 0.
    pub fn from_csv(text: &str) -> Result<ShapeProfile> {
        let mut lines = text.lines().enumerate().skip_while(|(_, l)| l.starts_with('#'));
        match lines.next() {
            Some((_, h)) if h.trim() == PROFILE_CSV_HEADER => {}
            _ => return Err(Error::Parse { line: 1, message: "missing profile header".into() }),
        }
        let mut rows: Vec<Vec<Option<f64>>> = Vec::new();
        for (i, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 9 {
                return Err(Error::Parse { line: i + 1, message: format!("expected 9 fields, got {}", fields.len()) });
            }
            let parsed = fields
                .iter()
                .map(|f| {
                    if f.is_empty() {
                        Ok(None)
                    } else {
                        f.parse::<f64>().map(Some).map_err(|e| Error::Parse { line: i + 1, message: e.to_string() })
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            if parsed[0] != Some(rows.len() as f64 + 1.0) {
                return Err(Error::Parse { line: i + 1, message: "k column out of sequence".into() });
            }
            rows.push(parsed);
        }
        let n = rows.len();
        if n < 2 {
            return Err(Error::Parse { line: 1, message: "profile needs at least 2 rows".into() });
        }
        let col = |r: &Vec<Option<f64>>, c: usize, line: usize| {
            r[c].ok_or(Error::Parse { line, message: format!("missing value in column {c}") })
        };
        let mut p = ShapeProfile {
            n,
            count: 0,
            e2e_mean: Vec::with_capacity(n - 1),
            e2e_se: Vec::with_capacity(n - 1),
            rg_mean: Vec::with_capacity(n),
            rg_se: Vec::with_capacity(n),
            ring_rg_mean: 0.0,
            ring_rg_se: 0.0,
        };
        for (i, r) in rows.iter().enumerate() {
            if i + 1 < n {
                p.e2e_mean.push(col(r, 1, i + 2)?);
                p.e2e_se.push(col(r, 2, i + 2)?);
            }
            p.rg_mean.push(col(r, 3, i + 2)?);
            p.rg_se.push(col(r, 4, i + 2)?);
        }
        Ok(p)
    }
}

fn common_length(rings: &[Ring]) -> Result<usize> {
    let first = rings.first().ok_or(Error::EmptyEnsemble)?.len();
    if let Some(r) = rings.iter().find(|r| r.len() != first) {
        return Err(Error::MixedLengths(first, r.len()));
    }
    Ok(first)
}

/// Profile of an in-memory ensemble of equal-length rings.
pub fn estimate_profile(rings: &[Ring]) -> Result<ShapeProfile> {
    let n = common_length(rings)?;
    let mut acc = ProfileAccumulator::new(n);
    for r in rings {
        acc.push(r)?;
    }
    acc.finish()
}

/// Mean of `e_i . e_j` over all unordered pairs of one ring.
pub fn ring_edge_product(ring: &Ring) -> f64 {
    let e = ring.edges();
    let n = e.len();
    let mut total = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            total += e[i].dot(e[j]);
        }
    }
    total / (n * (n - 1) / 2) as f64
}

/// Ensemble mean of [`ring_edge_product`] with its standard error.
///
/// Closure forces every ring's pair average to `-1/(n-1)` exactly, so the
/// spread here is rounding only. [`estimate_pair_product`] is the version
/// with genuine sampling noise.
pub fn estimate_edge_product(rings: &[Ring]) -> Result<(f64, f64)> {
    common_length(rings)?;
    let m: StreamingMoments = rings.iter().map(ring_edge_product).collect();
    Ok((m.mean, m.std_error()))
}

/// Ensemble mean of `e_i . e_j` for one fixed pair of 1-based edge indices.
pub fn estimate_pair_product(rings: &[Ring], i: usize, j: usize) -> Result<(f64, f64)> {
    let n = common_length(rings)?;
    if i == j || i == 0 || j == 0 || i > n || j > n {
        return Err(Error::Domain(format!("invalid edge pair ({i}, {j}) for n = {n}")));
    }
    let m: StreamingMoments = rings.iter().map(|r| r.edge(i).dot(r.edge(j))).collect();
    Ok((m.mean, m.std_error()))
}
