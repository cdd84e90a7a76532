//! Points of `{0,1}^n`, monotone (upward-closed) subsets, membership
//! oracles, enumeration and the split along the last coordinate.
//!
//! Coordinate `i` (0-based) of a point is bit `i` of its index. The "last"
//! coordinate used by [`split`] is the highest-order bit `dim - 1`.

mod bits;
mod describe;
mod enumerate;
mod oracle;

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use bits::RankBits;

pub use describe::SetDescription;
pub use enumerate::{enumerate_monotone, upset_masks, MAX_ENUM_DIM};
pub use oracle::{Family, MembershipOracle};

/// Largest dimension for which a set is stored as a dense bit array.
pub const MAX_DENSE_DIM: usize = 25;

/// Largest dimension a [`CubePoint`] can address.
pub const MAX_POINT_DIM: usize = 63;

/// A vertex of the hypercube `{0,1}^dim`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct CubePoint {
    index: u64,
    dim: usize,
}

impl CubePoint {
    pub fn new(dim: usize, index: u64) -> Result<Self> {
        if dim == 0 || dim > MAX_POINT_DIM {
            return Err(Error::DimensionOutOfRange { dim, min: 1, max: MAX_POINT_DIM });
        }
        if index >> dim != 0 {
            return Err(Error::PointOutOfRange { index, dim });
        }
        Ok(Self { index, dim })
    }

    /// Parses a binary string written most significant coordinate first, so
    /// `"100"` is the point whose last coordinate (bit 2) is set.
    pub fn from_binary(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() || !s.bytes().all(|b| b == b'0' || b == b'1') {
            return Err(Error::Parse(format!("invalid binary point {s:?}")));
        }
        let dim = s.len();
        if dim > MAX_POINT_DIM {
            return Err(Error::DimensionOutOfRange { dim, min: 1, max: MAX_POINT_DIM });
        }
        let index = u64::from_str_radix(s, 2).map_err(|e| Error::Parse(e.to_string()))?;
        Self::new(dim, index)
    }

    pub fn all_ones(dim: usize) -> Result<Self> {
        Self::new(dim, 0).map(|p| Self { index: low_mask(p.dim), ..p })
    }

    pub fn index(&self) -> u64 {
        self.index
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coord(&self, i: usize) -> bool {
        self.index >> i & 1 == 1
    }

    /// The neighbour obtained by flipping coordinate `i`.
    pub fn flip(&self, i: usize) -> Self {
        debug_assert!(i < self.dim);
        Self { index: self.index ^ (1 << i), dim: self.dim }
    }

    /// Hamming weight `|x|`.
    pub fn weight(&self) -> u32 {
        self.index.count_ones()
    }

    /// Coordinatewise order `x <= y`.
    pub fn le(&self, other: &Self) -> bool {
        self.dim == other.dim && self.index & !other.index == 0
    }
}

impl fmt::Display for CubePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:0width$b}", self.index, width = self.dim)
    }
}

#[inline]
pub(crate) fn low_mask(dim: usize) -> u64 {
    if dim >= 64 {
        u64::MAX
    } else {
        (1u64 << dim) - 1
    }
}

/// Anything that can answer "is this point in the set?".
pub trait Membership: Sync {
    fn dim(&self) -> usize;
    fn contains_index(&self, index: u64) -> bool;
}

/// A non-empty upward-closed subset of `{0,1}^dim`, stored densely.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonotoneSet {
    dim: usize,
    bits: RankBits,
    members: Vec<u32>,
}

fn check_dense_dim(dim: usize) -> Result<()> {
    if dim == 0 || dim > MAX_DENSE_DIM {
        return Err(Error::DimensionOutOfRange { dim, min: 1, max: MAX_DENSE_DIM });
    }
    Ok(())
}

fn word_count(dim: usize) -> usize {
    (1usize << dim).div_ceil(64)
}

// Bits p of a 64-bit word whose coordinate i (i < 6) is 0.
const LOW_HALF: [u64; 6] = [
    0x5555_5555_5555_5555,
    0x3333_3333_3333_3333,
    0x0F0F_0F0F_0F0F_0F0F,
    0x00FF_00FF_00FF_00FF,
    0x0000_FFFF_0000_FFFF,
    0x0000_0000_FFFF_FFFF,
];

/// In-place superset closure over a packed membership array.
fn close_upward(dim: usize, words: &mut [u64]) {
    for i in 0..dim {
        if i < 6 {
            let shift = 1u32 << i;
            for w in words.iter_mut() {
                *w |= (*w & LOW_HALF[i]) << shift;
            }
        } else {
            let stride = 1usize << (i - 6);
            for j in 0..words.len() {
                if j & stride == 0 {
                    words[j | stride] |= words[j];
                }
            }
        }
    }
}

/// First `(x, i)` with `x` in the packed set, coordinate `i` of `x` zero and
/// `x` with coordinate `i` raised outside the set.
fn first_violation_words(dim: usize, words: &[u64]) -> Option<(u64, usize)> {
    for i in 0..dim {
        if i < 6 {
            let shift = 1u32 << i;
            for (j, &w) in words.iter().enumerate() {
                let bad = w & LOW_HALF[i] & !(w >> shift);
                if bad != 0 {
                    return Some(((j as u64) * 64 + bad.trailing_zeros() as u64, i));
                }
            }
        } else {
            let stride = 1usize << (i - 6);
            for j in (0..words.len()).filter(|j| j & stride == 0) {
                let bad = words[j] & !words[j | stride];
                if bad != 0 {
                    return Some(((j as u64) * 64 + bad.trailing_zeros() as u64, i));
                }
            }
        }
    }
    None
}

fn pack(dim: usize, contains: impl Fn(u32) -> bool) -> Vec<u64> {
    let mut words = vec![0u64; word_count(dim)];
    for x in 0..(1u32 << dim) {
        if contains(x) {
            words[(x >> 6) as usize] |= 1 << (x & 63);
        }
    }
    words
}

/// Returns the first violation `(x, i)` of upward closure for the subset of
/// `{0,1}^dim` described by `contains`, or `None` if the subset is monotone.
pub fn monotonicity_violation(dim: usize, contains: impl Fn(u32) -> bool) -> Option<(u32, usize)> {
    if dim == 0 || dim > MAX_DENSE_DIM {
        return None;
    }
    first_violation_words(dim, &pack(dim, contains)).map(|(x, i)| (x as u32, i))
}

/// True iff for every member `x` and every coordinate `i` with `x_i = 0`, the
/// point with coordinate `i` raised is also a member.
pub fn is_monotone(dim: usize, contains: impl Fn(u32) -> bool) -> bool {
    monotonicity_violation(dim, contains).is_none()
}

impl MonotoneSet {
    fn from_words_unchecked(dim: usize, words: Vec<u64>) -> Self {
        let bits = RankBits::from_words(words);
        let members = bits.ones().collect();
        debug_assert!(first_violation_words(dim, bits.words()).is_none());
        Self { dim, bits, members }
    }

    fn from_words(dim: usize, words: Vec<u64>) -> Result<Self> {
        if words.iter().all(|&w| w == 0) {
            return Err(Error::EmptySet);
        }
        if let Some((point, coord)) = first_violation_words(dim, &words) {
            return Err(Error::NotMonotone { point, coord, dim });
        }
        Ok(Self::from_words_unchecked(dim, words))
    }

    /// Upward closure of the given generators.
    pub fn upward_closure(dim: usize, generators: &[CubePoint]) -> Result<Self> {
        check_dense_dim(dim)?;
        if generators.is_empty() {
            return Err(Error::EmptySet);
        }
        let mut words = vec![0u64; word_count(dim)];
        for g in generators {
            if g.dim != dim {
                return Err(Error::PointOutOfRange { index: g.index, dim });
            }
            words[(g.index >> 6) as usize] |= 1 << (g.index & 63);
        }
        close_upward(dim, &mut words);
        Ok(Self::from_words_unchecked(dim, words))
    }

    /// `{x : |x| >= k}`.
    pub fn threshold(dim: usize, k: usize) -> Result<Self> {
        check_dense_dim(dim)?;
        if k > dim {
            return Err(Error::InvalidArgument(format!("threshold k = {k} exceeds n = {dim}")));
        }
        let words = pack(dim, |x| x.count_ones() as usize >= k);
        Ok(Self::from_words_unchecked(dim, words))
    }

    /// `{x : x_coord = 1}`.
    pub fn dictator(dim: usize, coord: usize) -> Result<Self> {
        check_dense_dim(dim)?;
        if coord >= dim {
            return Err(Error::InvalidArgument(format!("coordinate {coord} out of range for n = {dim}")));
        }
        let words = pack(dim, |x| x >> coord & 1 == 1);
        Ok(Self::from_words_unchecked(dim, words))
    }

    /// The whole cube `{0,1}^dim`.
    pub fn full(dim: usize) -> Result<Self> {
        Self::threshold(dim, 0)
    }

    /// Builds a set from an explicit member list, rejecting non-monotone
    /// input with a witness.
    pub fn from_members(dim: usize, members: &[u32]) -> Result<Self> {
        check_dense_dim(dim)?;
        let mut words = vec![0u64; word_count(dim)];
        for &m in members {
            if (m as u64) >> dim != 0 {
                return Err(Error::PointOutOfRange { index: m as u64, dim });
            }
            words[(m >> 6) as usize] |= 1 << (m & 63);
        }
        Self::from_words(dim, words)
    }

    pub fn from_predicate(dim: usize, contains: impl Fn(u32) -> bool) -> Result<Self> {
        check_dense_dim(dim)?;
        Self::from_words(dim, pack(dim, contains))
    }

    /// Upward closure of `points` independent uniform random points. This is
    /// a reproducible way to get sets of varied density; it is not uniform
    /// over monotone sets.
    pub fn random(dim: usize, points: usize, seed: u64) -> Result<Self> {
        check_dense_dim(dim)?;
        if points == 0 {
            return Err(Error::EmptySet);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let gens: Vec<CubePoint> = (0..points)
            .map(|_| CubePoint { index: rng.gen_range(0..1u64 << dim), dim })
            .collect();
        Self::upward_closure(dim, &gens)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `|A|`.
    pub fn size(&self) -> usize {
        self.members.len()
    }

    /// `mu(A) = |A| / 2^n`.
    pub fn density(&self) -> f64 {
        self.size() as f64 / (1u64 << self.dim) as f64
    }

    pub fn contains(&self, index: u32) -> bool {
        (index as u64) >> self.dim == 0 && self.bits.get(index as usize)
    }

    /// Position of `index` in ascending member order.
    pub fn rank(&self, index: u32) -> Option<usize> {
        self.contains(index).then(|| self.bits.rank(index as usize))
    }

    /// Member indices in ascending order.
    pub fn members(&self) -> &[u32] {
        &self.members
    }

    pub fn point(&self, rank: usize) -> CubePoint {
        CubePoint { index: self.members[rank] as u64, dim: self.dim }
    }

    /// Members none of whose lower neighbours are members.
    pub fn minimal_elements(&self) -> Vec<u32> {
        self.members
            .iter()
            .copied()
            .filter(|&x| (0..self.dim).all(|i| x >> i & 1 == 0 || !self.contains(x ^ (1 << i))))
            .collect()
    }

    /// Rechecks upward closure on the stored bits.
    pub fn is_monotone(&self) -> bool {
        first_violation_words(self.dim, self.bits.words()).is_none()
    }

    pub fn is_full(&self) -> bool {
        self.size() == 1usize << self.dim
    }

    pub fn to_oracle(&self) -> MembershipOracle {
        let set = Arc::new(self.clone());
        MembershipOracle::custom(self.dim, move |x| set.contains(x as u32))
    }
}

impl Membership for MonotoneSet {
    fn dim(&self) -> usize {
        self.dim
    }

    fn contains_index(&self, index: u64) -> bool {
        index >> self.dim == 0 && self.bits.get(index as usize)
    }
}

/// `make_upset`: upward closure of the generators.
pub fn make_upset(dim: usize, generators: &[CubePoint]) -> Result<MonotoneSet> {
    MonotoneSet::upward_closure(dim, generators)
}

/// `{x in {0,1}^dim : |x| >= k}`.
pub fn threshold_set(dim: usize, k: usize) -> Result<MonotoneSet> {
    MonotoneSet::threshold(dim, k)
}

/// The slices of a set along its last coordinate:
/// `A0 = {x' : (x',0) in A}` and `A1 = {x' : (x',1) in A}`.
#[derive(Debug, Clone)]
pub struct SplitPair {
    /// `A0`; `None` when empty.
    pub lower: Option<Arc<MonotoneSet>>,
    /// `A1`; never empty because the all-ones point belongs to `A`.
    pub upper: Arc<MonotoneSet>,
}

impl SplitPair {
    pub fn a0(&self) -> f64 {
        self.lower.as_ref().map_or(0.0, |s| s.density())
    }

    pub fn a1(&self) -> f64 {
        self.upper.density()
    }

    pub fn lower_size(&self) -> usize {
        self.lower.as_ref().map_or(0, |s| s.size())
    }

    /// `(A0 x {0}) u (A1 x {1})`.
    pub fn reassemble(&self) -> Result<MonotoneSet> {
        let d = self.upper.dim;
        let half = 1u32 << d;
        let mut members: Vec<u32> = self.lower.as_ref().map(|s| s.members.clone()).unwrap_or_default();
        members.extend(self.upper.members.iter().map(|&x| x | half));
        MonotoneSet::from_members(d + 1, &members)
    }
}

/// Splits `A` along its last coordinate (bit `dim - 1`).
pub fn split(set: &MonotoneSet) -> Result<SplitPair> {
    if set.dim < 2 {
        return Err(Error::SplitDimensionOne);
    }
    let d = set.dim - 1;
    let half = 1u32 << d;
    let cut = set.members.partition_point(|&x| x < half);
    let build = |ms: &mut dyn Iterator<Item = u32>| {
        let mut words = vec![0u64; word_count(d)];
        for m in ms {
            words[(m >> 6) as usize] |= 1 << (m & 63);
        }
        MonotoneSet::from_words_unchecked(d, words)
    };
    let lower = (cut > 0).then(|| Arc::new(build(&mut set.members[..cut].iter().copied())));
    let upper = Arc::new(build(&mut set.members[cut..].iter().map(|&x| x - half)));
    Ok(SplitPair { lower, upper })
}
