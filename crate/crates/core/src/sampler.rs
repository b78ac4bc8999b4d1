//! Hedgehog + crankshaft sampling of ideal rings and uniform sampling of
//! open chains.
//!
//! A ring starts as `n/2` uniform directions together with their negatives
//! in random order, which closes exactly. Crankshaft moves then rotate a
//! random pair of edges about the axis of their sum; the sum is unchanged,
//! so every move keeps the polygon closed.

use rand::seq::SliceRandom;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::geometry::{OpenChain, Ring, Vec3};

/// Edge pairs with `|e_j + e_k|` or `|e_j - e_k|` at or below this are rejected.
pub const PARALLEL_TOLERANCE: f64 = 1e-9;

/// Rejected pair draws allowed per requested move.
const RETRIES_PER_MOVE: usize = 100;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seeded ChaCha8 stream. Substreams are keyed by index only, never by how
/// much of the parent has been consumed, so any work split across threads
/// sees the same numbers.
#[derive(Debug, Clone)]
pub struct RngStream {
    key: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        Self::from_key(seed)
    }

    fn from_key(key: u64) -> Self {
        let mut bytes = [0u8; 32];
        let mut state = key;
        for chunk in bytes.chunks_mut(8) {
            state = splitmix64(state);
            chunk.copy_from_slice(&state.to_le_bytes());
        }
        RngStream { key, rng: ChaCha8Rng::from_seed(bytes) }
    }

    /// Independent child stream number `index`.
    pub fn substream(&self, index: u64) -> RngStream {
        Self::from_key(splitmix64(self.key ^ splitmix64(index.wrapping_add(0x5851_f42d_4c95_7f2d))))
    }

    pub fn key(&self) -> u64 {
        self.key
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

/// Number of crankshaft moves applied after the hedgehog start.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct MixPolicy {
    pub moves: usize,
}

impl MixPolicy {
    /// The production schedule, `6n` moves.
    pub fn standard(n: usize) -> Self {
        MixPolicy { moves: 6 * n }
    }

    pub fn with_moves(moves: usize) -> Self {
        MixPolicy { moves }
    }
}

/// Uniform point on the unit sphere from a normalized Gaussian triple.
pub fn sample_unit_sphere<R: Rng + ?Sized>(rng: &mut R) -> Vec3 {
    loop {
        let v = Vec3::new(rng.sample(StandardNormal), rng.sample(StandardNormal), rng.sample(StandardNormal));
        let norm = v.norm();
        if norm > 1e-8 {
            return v / norm;
        }
    }
}

/// `n/2` uniform directions plus their negatives, uniformly permuted.
pub fn hedgehog_start<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Ring> {
    if n < 4 || n % 2 != 0 {
        return Err(Error::OddLength(n));
    }
    let mut edges = Vec::with_capacity(n);
    for _ in 0..n / 2 {
        let u = sample_unit_sphere(rng);
        edges.push(u);
        edges.push(-u);
    }
    edges.shuffle(rng);
    Ok(Ring::from_edges_unchecked(edges))
}

/// Rotates edges `j` and `k` (0-based) in place by `theta` about `e_j + e_k`.
///
/// The two images are rebuilt as `s/2 +- q` with `q` orthogonal to the sum
/// `s` and of length `sqrt(1 - |s|^2/4)`, so both stay unit length and their
/// sum stays `s` to rounding.
pub(crate) fn crankshaft_in_place(edges: &mut [Vec3], j: usize, k: usize, theta: f64) -> Result<()> {
    let n = edges.len();
    for index in [j, k] {
        if index >= n {
            return Err(Error::IndexOutOfRange { index, n });
        }
    }
    if j == k {
        return Err(Error::SameEdge(j));
    }
    let (ej, ek) = (edges[j], edges[k]);
    let sum = ej + ek;
    let diff = ej - ek;
    let sum_norm = sum.norm();
    if sum_norm <= PARALLEL_TOLERANCE || diff.norm() <= PARALLEL_TOLERANCE {
        return Err(Error::ParallelEdges { j, k });
    }
    let (sin, cos) = theta.sin_cos();
    let axis = sum / sum_norm;
    let mut q = diff * (0.5 * cos) + ej.cross(ek) * (sin / sum_norm);
    q -= axis * q.dot(axis);
    let half = sum * 0.5;
    let q_len = (1.0 - half.norm_sq()).max(0.0).sqrt();
    let q_norm = q.norm();
    if q_norm > 0.0 {
        q = q * (q_len / q_norm);
    }
    edges[j] = (half + q).normalized();
    edges[k] = (half - q).normalized();
    Ok(())
}

/// One crankshaft move on edges `j`, `k` (1-based) by angle `theta`.
pub fn crankshaft(ring: &Ring, j: usize, k: usize, theta: f64) -> Result<Ring> {
    let n = ring.len();
    for index in [j, k] {
        if index == 0 || index > n {
            return Err(Error::IndexOutOfRange { index, n });
        }
    }
    let mut edges = ring.edges().to_vec();
    crankshaft_in_place(&mut edges, j - 1, k - 1, theta).map_err(|e| match e {
        Error::ParallelEdges { .. } => Error::ParallelEdges { j, k },
        Error::SameEdge(_) => Error::SameEdge(j),
        other => other,
    })?;
    Ok(Ring::from_edges_unchecked(edges))
}

pub(crate) fn mix_in_place<R: Rng + ?Sized>(edges: &mut [Vec3], moves: usize, rng: &mut R) -> Result<()> {
    let n = edges.len();
    let budget = RETRIES_PER_MOVE * moves;
    let mut rejected = 0;
    let mut done = 0;
    while done < moves {
        let j = rng.random_range(0..n);
        let mut k = rng.random_range(0..n - 1);
        if k >= j {
            k += 1;
        }
        let theta = rng.random_range(0.0..std::f64::consts::TAU);
        match crankshaft_in_place(edges, j, k, theta) {
            Ok(()) => done += 1,
            Err(Error::ParallelEdges { .. }) => {
                rejected += 1;
                if rejected > budget {
                    return Err(Error::MixingStalled(budget));
                }
            }
            Err(e) => return Err(e),
        }
    }
    Ok(())
}

/// Applies `policy.moves` crankshaft moves with uniformly chosen edge pairs
/// and angles uniform on `[0, 2pi)`.
pub fn mix<R: Rng + ?Sized>(ring: &Ring, policy: MixPolicy, rng: &mut R) -> Result<Ring> {
    let mut edges = ring.edges().to_vec();
    mix_in_place(&mut edges, policy.moves, rng)?;
    Ok(Ring::from_edges_unchecked(edges))
}

/// Hedgehog start followed by mixing.
pub fn sample_ring<R: Rng + ?Sized>(n: usize, policy: MixPolicy, rng: &mut R) -> Result<Ring> {
    let start = hedgehog_start(n, rng)?;
    let mut edges = start.into_edges();
    mix_in_place(&mut edges, policy.moves, rng)?;
    Ok(Ring::from_edges_unchecked(edges))
}

/// `n` independent uniform unit steps.
pub fn sample_open_chain<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<OpenChain> {
    if n == 0 {
        return Err(Error::EmptyChain);
    }
    Ok(OpenChain::from_edges_unchecked((0..n).map(|_| sample_unit_sphere(rng)).collect()))
}

const RING_DOMAIN: u64 = 0x7269_6e67;
const CHAIN_DOMAIN: u64 = 0x6368_6169;

/// Ring number `index` of the ensemble generated from `seed`.
pub fn ensemble_ring(seed: u64, n: usize, policy: MixPolicy, index: u64) -> Result<Ring> {
    let mut rng = RngStream::new(seed).substream(RING_DOMAIN).substream(index);
    sample_ring(n, policy, &mut rng)
}

/// Open chain number `index` of the ensemble generated from `seed`.
pub fn ensemble_chain(seed: u64, n: usize, index: u64) -> Result<OpenChain> {
    let mut rng = RngStream::new(seed).substream(CHAIN_DOMAIN).substream(index);
    sample_open_chain(n, &mut rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::CLOSURE_TOLERANCE_PER_EDGE;
    use proptest::prelude::*;
    use rand::RngCore;
    use std::f64::consts::{PI, TAU};

    fn max_component_diff(a: &Ring, b: &Ring) -> f64 {
        a.edges()
            .iter()
            .zip(b.edges())
            .map(|(x, y)| {
                let d = *x - *y;
                d.x.abs().max(d.y.abs()).max(d.z.abs())
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let mut a = RngStream::new(7);
        let mut b = RngStream::new(7);
        let xs: Vec<u64> = (0..8).map(|_| a.next_u64()).collect();
        let ys: Vec<u64> = (0..8).map(|_| b.next_u64()).collect();
        assert_eq!(xs, ys);
        let mut c = RngStream::new(7).substream(1);
        let mut d = RngStream::new(7).substream(2);
        assert_ne!(c.next_u64(), d.next_u64());
        // substreams do not depend on the parent's position
        let mut used = RngStream::new(7);
        used.next_u64();
        assert_eq!(used.substream(1).next_u64(), RngStream::new(7).substream(1).next_u64());
    }

    #[test]
    fn sphere_samples_are_unit() {
        let mut rng = RngStream::new(1);
        for _ in 0..10_000 {
            assert!((sample_unit_sphere(&mut rng).norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn sphere_moments() {
        let mut rng = RngStream::new(2);
        let count = 1_000_000;
        let mut sum = Vec3::ZERO;
        let mut z2 = 0.0;
        for _ in 0..count {
            let u = sample_unit_sphere(&mut rng);
            sum += u;
            z2 += u.z * u.z;
        }
        let mean = sum / count as f64;
        let bound = 3.0 * (1.0 / 3.0f64.sqrt()) / 1000.0;
        assert!(mean.x.abs() < bound && mean.y.abs() < bound && mean.z.abs() < bound, "{mean:?}");
        assert!((z2 / count as f64 - 1.0 / 3.0).abs() < 0.002);
    }

    #[test]
    fn hedgehog_pairs_cancel() {
        let mut rng = RngStream::new(3);
        let r = hedgehog_start(4, &mut rng).unwrap();
        assert!(r.closure_defect() <= 1e-12 * 4.0);
        let r = hedgehog_start(50, &mut rng).unwrap();
        assert!(r.closure_defect() <= 1e-12 * 50.0);
        // the edge multiset is closed under negation
        for &e in r.edges() {
            assert!(r.edges().iter().any(|&f| f == -e));
        }
        assert!(Ring::new(r.edges().to_vec()).is_ok());
        assert_eq!(hedgehog_start(7, &mut rng), Err(Error::OddLength(7)));
        assert_eq!(hedgehog_start(2, &mut rng), Err(Error::OddLength(2)));
    }

    #[test]
    fn half_turn_swaps_orthogonal_edges() {
        let ring = Ring::new(vec![
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(0.0, 1.0, 0.0),
            Vec3::new(-1.0, 0.0, 0.0),
            Vec3::new(0.0, -1.0, 0.0),
        ])
        .unwrap();
        let turned = crankshaft(&ring, 1, 2, PI).unwrap();
        assert!((turned.edge(1) - Vec3::new(0.0, 1.0, 0.0)).norm() < 1e-12);
        assert!((turned.edge(2) - Vec3::new(1.0, 0.0, 0.0)).norm() < 1e-12);
        assert_eq!(turned.edge(3), ring.edge(3));
        assert_eq!(turned.edge(4), ring.edge(4));
    }

    #[test]
    fn identity_and_full_turn() {
        let mut rng = RngStream::new(4);
        let ring = sample_ring(20, MixPolicy::standard(20), &mut rng).unwrap();
        let zero = crankshaft(&ring, 3, 11, 0.0).unwrap();
        assert!(max_component_diff(&ring, &zero) < 1e-12);
        let full = crankshaft(&ring, 3, 11, TAU).unwrap();
        assert!(max_component_diff(&ring, &full) < 1e-9);
    }

    #[test]
    fn crankshaft_rejects_bad_pairs() {
        let ring = Ring::new(vec![
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(-1.0, 0.0, 0.0),
            Vec3::new(-1.0, 0.0, 0.0),
        ])
        .unwrap();
        assert_eq!(crankshaft(&ring, 1, 2, 1.0), Err(Error::ParallelEdges { j: 1, k: 2 }));
        assert_eq!(crankshaft(&ring, 1, 3, 1.0), Err(Error::ParallelEdges { j: 1, k: 3 }));
        assert_eq!(crankshaft(&ring, 2, 2, 1.0), Err(Error::SameEdge(2)));
        assert!(matches!(crankshaft(&ring, 0, 2, 1.0), Err(Error::IndexOutOfRange { .. })));
        assert!(matches!(crankshaft(&ring, 1, 5, 1.0), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn zero_moves_is_identity() {
        let mut rng = RngStream::new(5);
        let ring = hedgehog_start(10, &mut rng).unwrap();
        assert_eq!(mix(&ring, MixPolicy::with_moves(0), &mut rng).unwrap(), ring);
    }

    #[test]
    fn mixed_rings_are_valid_and_reproducible() {
        for n in [4, 10, 50] {
            let a = ensemble_ring(9, n, MixPolicy::standard(n), 3).unwrap();
            let b = ensemble_ring(9, n, MixPolicy::standard(n), 3).unwrap();
            assert_eq!(a, b);
            assert!(a.closure_defect() <= CLOSURE_TOLERANCE_PER_EDGE * n as f64);
            assert!(Ring::new(a.edges().to_vec()).is_ok());
        }
        let short = ensemble_ring(9, 50, MixPolicy::with_moves(150), 3).unwrap();
        assert!(Ring::new(short.edges().to_vec()).is_ok());
    }

    #[test]
    fn mixing_breaks_hedgehog_pairing() {
        let n = 50;
        let mut rng = RngStream::new(6);
        let ring = sample_ring(n, MixPolicy::standard(n), &mut rng).unwrap();
        let edges = ring.edges();
        let antipodal =
            edges.iter().enumerate().filter(|&(i, &e)| edges[i + 1..].iter().any(|&f| (e + f).norm() < 1e-9)).count();
        assert!(antipodal <= 1, "{antipodal} exact antipodal pairs remain");
    }

    #[test]
    fn open_chain_of_one_edge() {
        let mut rng = RngStream::new(8);
        let c = sample_open_chain(1, &mut rng).unwrap();
        assert!((c.squared_end_to_end() - 1.0).abs() < 1e-12);
        assert_eq!(sample_open_chain(0, &mut rng), Err(Error::EmptyChain));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn crankshaft_conserves_and_reverses(seed in any::<u64>(), j in 1usize..=20, k in 1usize..=20, theta in -10.0f64..10.0) {
            prop_assume!(j != k);
            let mut rng = RngStream::new(seed);
            let ring = sample_ring(20, MixPolicy::with_moves(40), &mut rng).unwrap();
            let moved = crankshaft(&ring, j, k, theta).unwrap();
            let before = ring.edge(j) + ring.edge(k);
            let after = moved.edge(j) + moved.edge(k);
            prop_assert!((before - after).norm() <= 1e-12);
            for i in 1..=20 {
                if i != j && i != k {
                    prop_assert_eq!(moved.edge(i), ring.edge(i));
                }
                prop_assert!((moved.edge(i).norm() - 1.0).abs() <= 1e-12);
            }
            let back = crankshaft(&moved, j, k, -theta).unwrap();
            prop_assert!(max_component_diff(&ring, &back) <= 1e-9);
        }
    }
}
