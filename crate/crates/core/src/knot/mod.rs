//! Knot classification of rings and open arcs by the knot determinant, and
//! knot length from random-closure spectra.
//!
//! An open arc has no knot type of its own. It is closed by joining both
//! ends to a random point on a large sphere around it; repeating this gives
//! a spectrum of knot classes. An arc counts as a trefoil when more than a
//! tolerance fraction of its closures are trefoils, and the knot length of
//! a knotted ring is the shortest such arc whose complementary arc closes
//! mostly to unknots.

pub mod determinant;
pub mod diagram;
pub mod fixtures;
pub mod projection;

use std::collections::BTreeMap;
use std::fmt;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use diagram::{Crossing, Diagram, GaussEntry};
pub use projection::project;

use crate::error::{Error, Result};
use crate::geometry::{Ring, Vec3};
use crate::sampler::{sample_unit_sphere, RngStream};

/// Random directions tried before a non-generic projection becomes a hard error.
pub const MAX_PROJECTION_ATTEMPTS: usize = 50;
/// Independent projections whose determinants must agree in [`classify_ring`].
pub const RING_PROJECTIONS: usize = 3;
pub const DEFAULT_CLOSURES: usize = 100;
pub const DEFAULT_TOLERANCE: f64 = 0.5;
pub const DEFAULT_RADIUS_FACTOR: f64 = 10.0;

/// Knot class as resolved by the determinant `|Delta(-1)|`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum KnotClass {
    Unknot,
    Trefoil,
    Det5,
    Det7,
    Other(u64),
}

impl KnotClass {
    pub fn from_determinant(det: u64) -> Self {
        match det {
            1 => KnotClass::Unknot,
            3 => KnotClass::Trefoil,
            5 => KnotClass::Det5,
            7 => KnotClass::Det7,
            d => KnotClass::Other(d),
        }
    }

    pub fn determinant(self) -> u64 {
        match self {
            KnotClass::Unknot => 1,
            KnotClass::Trefoil => 3,
            KnotClass::Det5 => 5,
            KnotClass::Det7 => 7,
            KnotClass::Other(d) => d,
        }
    }

    pub fn label(self) -> String {
        match self {
            KnotClass::Unknot => "unknot".into(),
            KnotClass::Trefoil => "trefoil".into(),
            other => format!("det{}", other.determinant()),
        }
    }
}

impl fmt::Display for KnotClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl From<KnotClass> for String {
    fn from(k: KnotClass) -> String {
        k.label()
    }
}

impl TryFrom<String> for KnotClass {
    type Error = String;
    fn try_from(s: String) -> std::result::Result<Self, String> {
        match s.as_str() {
            "unknot" => Ok(KnotClass::Unknot),
            "trefoil" => Ok(KnotClass::Trefoil),
            _ => s
                .strip_prefix("det")
                .and_then(|d| d.parse::<u64>().ok())
                .filter(|d| d % 2 == 1)
                .map(KnotClass::from_determinant)
                .ok_or_else(|| format!("unknown knot class {s:?}")),
        }
    }
}

/// `|Delta(-1)|` of a one-component diagram.
pub fn alexander_determinant(diagram: &Diagram) -> Result<u64> {
    diagram.determinant()
}

/// Determinant of the closed polygon through `points` from a random generic
/// direction, retrying non-generic directions.
pub fn loop_determinant<R: Rng + ?Sized>(points: &[Vec3], rng: &mut R) -> Result<u64> {
    for _ in 0..MAX_PROJECTION_ATTEMPTS {
        let direction = sample_unit_sphere(rng);
        match project(points, direction, true) {
            Ok(d) => return d.determinant(),
            Err(Error::DegenerateProjection(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::ProjectionFailed(MAX_PROJECTION_ATTEMPTS))
}

/// Classifies a closed polygon from `projections` random directions, which
/// must all give the same determinant.
pub fn classify_points<R: Rng + ?Sized>(points: &[Vec3], projections: usize, rng: &mut R) -> Result<KnotClass> {
    let dets = (0..projections.max(1)).map(|_| loop_determinant(points, rng)).collect::<Result<Vec<u64>>>()?;
    if dets.iter().any(|&d| d != dets[0]) {
        return Err(Error::InconsistentClassification(dets));
    }
    Ok(KnotClass::from_determinant(dets[0]))
}

fn ring_loop(ring: &Ring) -> Vec<Vec3> {
    let mut v = ring.vertices();
    v.pop();
    v
}

pub fn classify_ring<R: Rng + ?Sized>(ring: &Ring, rng: &mut R) -> Result<KnotClass> {
    classify_points(&ring_loop(ring), RING_PROJECTIONS, rng)
}

/// Counts of knot classes over a number of random closures.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ClosureSpectrum {
    pub counts: BTreeMap<KnotClass, u64>,
    pub total: u64,
}

impl ClosureSpectrum {
    pub fn add(&mut self, class: KnotClass) {
        *self.counts.entry(class).or_insert(0) += 1;
        self.total += 1;
    }

    pub fn merge(&mut self, other: &ClosureSpectrum) {
        for (&k, &c) in &other.counts {
            *self.counts.entry(k).or_insert(0) += c;
        }
        self.total += other.total;
    }

    pub fn count(&self, class: KnotClass) -> u64 {
        self.counts.get(&class).copied().unwrap_or(0)
    }

    pub fn fraction(&self, class: KnotClass) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.count(class) as f64 / self.total as f64
        }
    }
}

/// Whether more than `tolerance` of the closures are trefoils (strict).
pub fn is_trefoil_segment(spectrum: &ClosureSpectrum, tolerance: f64) -> bool {
    spectrum.fraction(KnotClass::Trefoil) > tolerance
}

/// Sphere around an open arc on which closure points are drawn.
#[derive(Debug, Clone, Copy)]
struct ClosureSphere {
    center: Vec3,
    radius: f64,
}

impl ClosureSphere {
    fn around(points: &[Vec3], radius_factor: f64) -> Result<Self> {
        if !(radius_factor >= 3.0) {
            return Err(Error::Domain(format!("closure radius factor {radius_factor} is below 3")));
        }
        if points.len() < 2 {
            return Err(Error::Domain("closure needs an arc of at least 2 points".into()));
        }
        let mut diameter: f64 = 0.0;
        for (i, &p) in points.iter().enumerate() {
            for &q in &points[i + 1..] {
                diameter = diameter.max((p - q).norm());
            }
        }
        if diameter < 1e-12 {
            return Err(Error::Domain("degenerate arc: all points coincide".into()));
        }
        let center = points.iter().copied().sum::<Vec3>() / points.len() as f64;
        Ok(ClosureSphere { center, radius: radius_factor * diameter })
    }

    /// Class of closure number `index`.
    fn classify(&self, points: &[Vec3], rng: &RngStream, index: u64) -> Result<KnotClass> {
        let mut sub = rng.substream(index);
        let apex = self.center + sample_unit_sphere(&mut sub) * self.radius;
        let mut loop_points = Vec::with_capacity(points.len() + 1);
        loop_points.extend_from_slice(points);
        loop_points.push(apex);
        loop_determinant(&loop_points, &mut sub).map(KnotClass::from_determinant)
    }
}

/// Closes the open arc `points` through `closures` random points on the
/// sphere of radius `radius_factor` times its diameter about its centroid,
/// and tallies the resulting knot classes. Closure `c` draws from
/// `rng.substream(c)`.
pub fn closure_spectrum(
    points: &[Vec3],
    closures: usize,
    radius_factor: f64,
    rng: &RngStream,
) -> Result<ClosureSpectrum> {
    if closures == 0 {
        return Err(Error::Domain("closure count must be at least 1".into()));
    }
    let sphere = ClosureSphere::around(points, radius_factor)?;
    let mut spectrum = ClosureSpectrum::default();
    for c in 0..closures {
        spectrum.add(sphere.classify(points, rng, c as u64)?);
    }
    Ok(spectrum)
}

/// Whether `class` makes up more than `threshold` of `closures` closures.
/// Gives the same answer as the full spectrum, stopping once it is decided.
fn closure_majority(
    points: &[Vec3],
    closures: usize,
    radius_factor: f64,
    rng: &RngStream,
    class: KnotClass,
    threshold: f64,
) -> Result<bool> {
    let sphere = ClosureSphere::around(points, radius_factor)?;
    let total = closures as f64;
    let mut hits = 0usize;
    for c in 0..closures {
        if sphere.classify(points, rng, c as u64)? == class {
            hits += 1;
        }
        if hits as f64 / total > threshold {
            return Ok(true);
        }
        let remaining = closures - c - 1;
        if ((hits + remaining) as f64 / total) <= threshold {
            return Ok(false);
        }
    }
    Ok(hits as f64 / total > threshold)
}

/// Parameters of a knot-length search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KnotLengthParams {
    pub closures: usize,
    pub tolerance: f64,
    pub radius_factor: f64,
}

impl Default for KnotLengthParams {
    fn default() -> Self {
        KnotLengthParams {
            closures: DEFAULT_CLOSURES,
            tolerance: DEFAULT_TOLERANCE,
            radius_factor: DEFAULT_RADIUS_FACTOR,
        }
    }
}

/// Shortest knotted arc of a trefoil ring.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnotLengthResult {
    /// 1-based index of the arc's first edge.
    pub start: usize,
    /// Edge count of the arc.
    pub length: usize,
    pub spectrum: BTreeMap<KnotClass, u64>,
    /// Closure spectrum of the complementary arc; empty when the whole ring is reported.
    pub complement: BTreeMap<KnotClass, u64>,
    pub n_closures: usize,
    pub tolerance: f64,
}

const SEGMENT_DOMAIN: u64 = 1;
const COMPLEMENT_DOMAIN: u64 = 2;
const CLASSIFY_DOMAIN: u64 = 3;

/// Searches arcs of `k = 3, 4, ..` edges at every start `i = 1..n` (in that
/// order) for the first whose closures are more than `tolerance` trefoil
/// and whose complement's closures are majority unknot. Falls back to the
/// whole ring when no proper arc qualifies.
pub fn knot_length(ring: &Ring, params: KnotLengthParams, rng: &RngStream) -> Result<KnotLengthResult> {
    if params.closures == 0 {
        return Err(Error::Domain("closure count must be at least 1".into()));
    }
    let class = classify_ring(ring, &mut rng.substream(CLASSIFY_DOMAIN))?;
    if class != KnotClass::Trefoil {
        return Err(Error::NotTrefoil(class.label()));
    }
    let n = ring.len();
    let seg_rng = rng.substream(SEGMENT_DOMAIN);
    let comp_rng = rng.substream(COMPLEMENT_DOMAIN);
    for k in 3..n {
        let seg_k = seg_rng.substream(k as u64);
        let comp_k = comp_rng.substream(k as u64);
        let verdicts = (1..=n)
            .into_par_iter()
            .map(|i| {
                let arc = ring.arc_points(i, k);
                closure_majority(
                    &arc,
                    params.closures,
                    params.radius_factor,
                    &seg_k.substream(i as u64),
                    KnotClass::Trefoil,
                    params.tolerance,
                )
            })
            .collect::<Result<Vec<bool>>>()?;
        for (idx, &knotted) in verdicts.iter().enumerate() {
            if !knotted {
                continue;
            }
            let i = idx + 1;
            let comp = ring.arc_points(i + k, n - k);
            let comp_stream = comp_k.substream(i as u64);
            if closure_majority(&comp, params.closures, params.radius_factor, &comp_stream, KnotClass::Unknot, 0.5)? {
                let arc = ring.arc_points(i, k);
                let spectrum =
                    closure_spectrum(&arc, params.closures, params.radius_factor, &seg_k.substream(i as u64))?;
                let complement = closure_spectrum(&comp, params.closures, params.radius_factor, &comp_stream)?;
                return Ok(KnotLengthResult {
                    start: i,
                    length: k,
                    spectrum: spectrum.counts,
                    complement: complement.counts,
                    n_closures: params.closures,
                    tolerance: params.tolerance,
                });
            }
        }
    }
    let whole = ring.arc_points(1, n);
    let spectrum = closure_spectrum(&whole, params.closures, params.radius_factor, &seg_rng.substream(n as u64))?;
    Ok(KnotLengthResult {
        start: 1,
        length: n,
        spectrum: spectrum.counts,
        complement: BTreeMap::new(),
        n_closures: params.closures,
        tolerance: params.tolerance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampler::{ensemble_ring, MixPolicy};

    #[test]
    fn class_labels_round_trip() {
        for det in [1u64, 3, 5, 7, 9, 45] {
            let c = KnotClass::from_determinant(det);
            assert_eq!(c.determinant(), det);
            assert_eq!(KnotClass::try_from(c.label()).unwrap(), c);
        }
        assert!(KnotClass::try_from("det4".to_string()).is_err());
        let json = serde_json::to_string(&BTreeMap::from([(KnotClass::Trefoil, 3u64)])).unwrap();
        assert_eq!(json, r#"{"trefoil":3}"#);
    }

    #[test]
    fn regular_polygon_is_unknot() {
        let mut rng = RngStream::new(1);
        assert_eq!(classify_ring(&Ring::regular(50).unwrap(), &mut rng).unwrap(), KnotClass::Unknot);
    }

    #[test]
    fn torus_trefoil_fixture() {
        let ring = fixtures::trefoil_ring(30).unwrap();
        let mut rng = RngStream::new(2);
        assert_eq!(classify_ring(&ring, &mut rng).unwrap(), KnotClass::Trefoil);
        let diagram = project(&ring_loop(&ring), Vec3::new(0.01, 0.02, 1.0), true).unwrap();
        assert!(diagram.crossing_count() >= 3);
        assert_eq!(diagram.writhe().abs(), 3);
    }

    #[test]
    fn mirror_image_has_same_determinant_and_opposite_writhe() {
        let ring = fixtures::trefoil_ring(30).unwrap();
        let mirrored = Ring::new(ring.edges().iter().map(|e| Vec3::new(e.x, e.y, -e.z)).collect()).unwrap();
        let dir = Vec3::new(0.01, 0.02, 1.0);
        let a = project(&ring_loop(&ring), dir, true).unwrap();
        let b = project(&ring_loop(&mirrored), dir, true).unwrap();
        assert_eq!(a.determinant().unwrap(), b.determinant().unwrap());
        assert_eq!(a.writhe(), -b.writhe());
    }

    #[test]
    fn figure_eight_fixture() {
        let ring = fixtures::figure_eight_ring(40).unwrap();
        let mut rng = RngStream::new(3);
        assert_eq!(classify_ring(&ring, &mut rng).unwrap(), KnotClass::Det5);
    }

    #[test]
    fn trefoil_spectrum_boundaries() {
        let mut s = ClosureSpectrum::default();
        for _ in 0..50 {
            s.add(KnotClass::Trefoil);
        }
        for _ in 0..50 {
            s.add(KnotClass::Unknot);
        }
        assert!(!is_trefoil_segment(&s, 0.5));
        let mut more = s.clone();
        more.counts.insert(KnotClass::Trefoil, 51);
        more.counts.insert(KnotClass::Unknot, 49);
        assert!(is_trefoil_segment(&more, 0.5));
        let none = ClosureSpectrum { counts: BTreeMap::from([(KnotClass::Unknot, 100)]), total: 100 };
        assert!(!is_trefoil_segment(&none, 0.5));
    }

    #[test]
    fn straight_arc_closes_to_unknots() {
        let pts: Vec<Vec3> = (0..10).map(|i| Vec3::new(i as f64, 0.0, 0.0)).collect();
        let s = closure_spectrum(&pts, 40, 10.0, &RngStream::new(4)).unwrap();
        assert_eq!(s.total, 40);
        assert_eq!(s.count(KnotClass::Unknot), 40);
    }

    #[test]
    fn opened_trefoil_closes_mostly_to_trefoils() {
        let ring = fixtures::trefoil_ring(30).unwrap();
        let arc = ring.arc_points(1, 29);
        let s = closure_spectrum(&arc, 100, 10.0, &RngStream::new(5)).unwrap();
        assert!(is_trefoil_segment(&s, 0.5), "{s:?}");
    }

    #[test]
    fn closure_argument_checks() {
        let pts = vec![Vec3::ZERO; 5];
        let rng = RngStream::new(6);
        assert!(closure_spectrum(&pts, 10, 10.0, &rng).is_err());
        let line: Vec<Vec3> = (0..3).map(|i| Vec3::new(i as f64, 0.0, 0.0)).collect();
        assert!(closure_spectrum(&line, 10, 2.0, &rng).is_err());
        assert!(closure_spectrum(&line, 0, 10.0, &rng).is_err());
    }

    #[test]
    fn early_stopping_agrees_with_full_spectrum() {
        let ring = fixtures::trefoil_ring(30).unwrap();
        let rng = RngStream::new(7);
        for (start, k) in [(1, 10), (4, 18), (9, 24), (1, 29)] {
            let arc = ring.arc_points(start, k);
            let full = closure_spectrum(&arc, 60, 10.0, &rng).unwrap();
            let fast = closure_majority(&arc, 60, 10.0, &rng, KnotClass::Trefoil, 0.5).unwrap();
            assert_eq!(fast, is_trefoil_segment(&full, 0.5));
        }
    }

    #[test]
    fn knot_length_of_trefoil_fixture() {
        let ring = fixtures::trefoil_ring(30).unwrap();
        let result = knot_length(&ring, KnotLengthParams::default(), &RngStream::new(8)).unwrap();
        assert!(result.length >= 3 && result.length <= 30);
        let total: u64 = result.spectrum.values().sum();
        assert_eq!(total, 100);
        let trefoils = result.spectrum.get(&KnotClass::Trefoil).copied().unwrap_or(0);
        assert!(trefoils > 50);
        if result.length < 30 {
            let unknots = result.complement.get(&KnotClass::Unknot).copied().unwrap_or(0);
            assert!(unknots > 50);
        }
        let again = knot_length(&ring, KnotLengthParams::default(), &RngStream::new(8)).unwrap();
        assert_eq!(result, again);
        let json = serde_json::to_value(&result).unwrap();
        for key in ["start", "length", "spectrum", "complement", "n_closures", "tolerance"] {
            assert!(json.get(key).is_some(), "missing {key}");
        }
    }

    #[test]
    fn knot_length_rejects_unknots() {
        let ring = Ring::regular(20).unwrap();
        assert!(matches!(
            knot_length(&ring, KnotLengthParams::default(), &RngStream::new(9)),
            Err(Error::NotTrefoil(_))
        ));
    }

    #[test]
    fn classification_is_projection_invariant_on_random_rings() {
        for index in 0..40 {
            let ring = ensemble_ring(10, 50, MixPolicy::standard(50), index).unwrap();
            let mut rng = RngStream::new(index);
            classify_points(&ring_loop(&ring), 10, &mut rng).unwrap();
        }
    }
}
