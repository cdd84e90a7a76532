use super::{MonotoneSet, RankBits};
use crate::error::{Error, Result};

/// Enumeration is limited to dimension 5 (7581 monotone Boolean functions).
pub const MAX_ENUM_DIM: usize = 5;

/// Every upward-closed subset of `{0,1}^dim` (including the empty set) as a
/// bit mask over the `2^dim` points, in ascending mask order.
///
/// Uses the bijection between upsets `A` of dimension `d` and pairs
/// `A0 <= A1` of upsets of dimension `d - 1`.
pub fn upset_masks(dim: usize) -> Result<Vec<u64>> {
    if dim > MAX_ENUM_DIM {
        return Err(Error::EnumerationCap(dim));
    }
    // dimension 0: the single point is either absent or present
    let mut masks = vec![0u64, 1];
    for d in 1..=dim {
        let half = 1u32 << (d - 1);
        let mut next = Vec::new();
        for &upper in &masks {
            for &lower in masks.iter().filter(|&&m| m & !upper == 0) {
                next.push(lower | upper << half);
            }
        }
        next.sort_unstable();
        masks = next;
    }
    Ok(masks)
}

/// Every non-empty monotone subset of `{0,1}^dim`, each exactly once.
pub fn enumerate_monotone(dim: usize) -> Result<impl Iterator<Item = MonotoneSet>> {
    if dim == 0 {
        return Err(Error::DimensionOutOfRange { dim, min: 1, max: MAX_ENUM_DIM });
    }
    let masks = upset_masks(dim)?;
    Ok(masks.into_iter().filter(|&m| m != 0).map(move |m| {
        let bits = RankBits::from_words(vec![m]);
        let members = bits.ones().collect();
        MonotoneSet { dim, bits, members }
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cube::is_monotone;

    #[test]
    fn counts_match_brute_force_filter() {
        for dim in 1..=3usize {
            let points = 1u32 << dim;
            let brute: Vec<u64> = (1u64..(1 << points))
                .filter(|&m| is_monotone(dim, |x| m >> x & 1 == 1))
                .collect();
            let enumerated: Vec<u64> = upset_masks(dim).unwrap().into_iter().filter(|&m| m != 0).collect();
            assert_eq!(enumerated, brute, "dim {dim}");
        }
        let counts: Vec<usize> = (1..=5).map(|d| enumerate_monotone(d).unwrap().count()).collect();
        // Dedekind numbers 3, 6, 20, 168, 7581 minus the empty set
        assert_eq!(counts, vec![2, 5, 19, 167, 7580]);
    }

    #[test]
    fn dimension_one_sets() {
        let sets: Vec<Vec<u32>> = enumerate_monotone(1).unwrap().map(|s| s.members().to_vec()).collect();
        assert_eq!(sets, vec![vec![1], vec![0, 1]]);
    }

    #[test]
    fn every_enumerated_set_is_monotone_and_contains_top() {
        for dim in 1..=4 {
            for s in enumerate_monotone(dim).unwrap() {
                assert!(s.is_monotone());
                assert!(s.contains((1 << dim) - 1));
            }
        }
    }

    #[test]
    fn cap_enforced() {
        assert!(matches!(enumerate_monotone(6), Err(Error::EnumerationCap(6))));
    }
}
