use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{low_mask, CubePoint, Membership, MonotoneSet, MAX_POINT_DIM};
use crate::error::{Error, Result};

/// Membership rule behind an oracle.
#[derive(Clone)]
pub enum Family {
    /// `|x| >= k`
    Threshold { k: usize },
    /// `x_coord = 1`
    Dictator { coord: usize },
    /// Some block of `width` consecutive coordinates is all ones. A trailing
    /// partial block counts as a tribe of its own.
    Tribes { width: usize },
    /// Caller-supplied predicate, asserted monotone.
    Custom(Arc<dyn Fn(u64) -> bool + Send + Sync>),
}

impl fmt::Debug for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Threshold { k } => write!(f, "Threshold {{ k: {k} }}"),
            Family::Dictator { coord } => write!(f, "Dictator {{ coord: {coord} }}"),
            Family::Tribes { width } => write!(f, "Tribes {{ width: {width} }}"),
            Family::Custom(_) => f.write_str("Custom"),
        }
    }
}

/// A membership predicate on `{0,1}^dim` that needs no dense storage, so
/// walks can be simulated beyond [`super::MAX_DENSE_DIM`].
#[derive(Debug, Clone)]
pub struct MembershipOracle {
    dim: usize,
    family: Family,
}

impl MembershipOracle {
    fn check(dim: usize) -> Result<()> {
        if dim == 0 || dim > MAX_POINT_DIM {
            return Err(Error::DimensionOutOfRange { dim, min: 1, max: MAX_POINT_DIM });
        }
        Ok(())
    }

    pub fn threshold(dim: usize, k: usize) -> Result<Self> {
        Self::check(dim)?;
        if k > dim {
            return Err(Error::InvalidArgument(format!("threshold k = {k} exceeds n = {dim}")));
        }
        Ok(Self { dim, family: Family::Threshold { k } })
    }

    pub fn dictator(dim: usize, coord: usize) -> Result<Self> {
        Self::check(dim)?;
        if coord >= dim {
            return Err(Error::InvalidArgument(format!("coordinate {coord} out of range for n = {dim}")));
        }
        Ok(Self { dim, family: Family::Dictator { coord } })
    }

    pub fn tribes(dim: usize, width: usize) -> Result<Self> {
        Self::check(dim)?;
        if width == 0 || width > dim {
            return Err(Error::InvalidArgument(format!("tribe width {width} invalid for n = {dim}")));
        }
        Ok(Self { dim, family: Family::Tribes { width } })
    }

    /// Wraps an arbitrary predicate. Monotonicity is the caller's contract;
    /// use [`MembershipOracle::spot_check`] to test it.
    pub fn custom(dim: usize, predicate: impl Fn(u64) -> bool + Send + Sync + 'static) -> Self {
        Self { dim, family: Family::Custom(Arc::new(predicate)) }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn evaluate(&self, x: &CubePoint) -> bool {
        self.contains_index(x.index())
    }

    /// Samples random comparable pairs `x <= y` and checks `x in A => y in A`.
    pub fn spot_check(&self, samples: usize, seed: u64) -> Result<()> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mask = low_mask(self.dim);
        for _ in 0..samples {
            let x = rng.gen::<u64>() & mask;
            let y = x | (rng.gen::<u64>() & mask);
            if self.contains_index(x) && !self.contains_index(y) {
                // report a single covering step on the chain from x to y
                let mut z = x;
                for i in 0..self.dim {
                    if y >> i & 1 == 1 && z >> i & 1 == 0 {
                        let raised = z | 1 << i;
                        if !self.contains_index(raised) {
                            return Err(Error::NotMonotone { point: z, coord: i, dim: self.dim });
                        }
                        z = raised;
                    }
                }
            }
        }
        Ok(())
    }

    /// Materializes the oracle as a dense set (validating monotonicity).
    pub fn to_dense(&self) -> Result<MonotoneSet> {
        match self.family {
            Family::Threshold { k } => MonotoneSet::threshold(self.dim, k),
            Family::Dictator { coord } => MonotoneSet::dictator(self.dim, coord),
            _ => MonotoneSet::from_predicate(self.dim, |x| self.contains_index(x as u64)),
        }
    }

    /// Stationary mean of coordinate `x_i` for the uniform law on
    /// `{x : |x| >= k}`: `sum_{j>=k} C(n-1, j-1) / sum_{j>=k} C(n, j)`.
    /// By symmetry the value does not depend on the coordinate.
    pub fn stationary_coordinate_mean(&self, coord: usize) -> Result<f64> {
        let Family::Threshold { k } = self.family else {
            return Err(Error::NotThreshold);
        };
        if coord >= self.dim {
            return Err(Error::InvalidArgument(format!("coordinate {coord} out of range")));
        }
        let n = self.dim as u64;
        let num: u128 = (k.max(1) as u64..=n).map(|j| binomial(n - 1, j - 1)).sum();
        let den: u128 = (k as u64..=n).map(|j| binomial(n, j)).sum();
        Ok(num as f64 / den as f64)
    }
}

impl Membership for MembershipOracle {
    fn dim(&self) -> usize {
        self.dim
    }

    fn contains_index(&self, x: u64) -> bool {
        debug_assert!(x & !low_mask(self.dim) == 0);
        match &self.family {
            Family::Threshold { k } => x.count_ones() as usize >= *k,
            Family::Dictator { coord } => x >> coord & 1 == 1,
            Family::Tribes { width } => (0..self.dim).step_by(*width).any(|lo| {
                let block = low_mask((*width).min(self.dim - lo)) << lo;
                x & block == block
            }),
            Family::Custom(pred) => pred(x),
        }
    }
}

/// Exact binomial coefficient (fits comfortably for n <= 63).
pub(crate) fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}
