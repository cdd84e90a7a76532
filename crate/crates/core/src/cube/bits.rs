/// Dense bit array over `[0, 2^dim)` with constant-time rank queries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct RankBits {
    words: Vec<u64>,
    // number of set bits in words[..i]
    prefix: Vec<u32>,
}

impl RankBits {
    #[cfg(test)]
    pub(crate) fn from_bools(bits: &[bool]) -> Self {
        let mut words = vec![0u64; bits.len().div_ceil(64)];
        for (i, _) in bits.iter().enumerate().filter(|(_, &b)| b) {
            words[i >> 6] |= 1u64 << (i & 63);
        }
        Self::from_words(words)
    }

    pub(crate) fn from_words(words: Vec<u64>) -> Self {
        let mut prefix = Vec::with_capacity(words.len() + 1);
        let mut acc = 0u32;
        prefix.push(0);
        for w in &words {
            acc += w.count_ones();
            prefix.push(acc);
        }
        Self { words, prefix }
    }

    #[inline]
    pub(crate) fn get(&self, i: usize) -> bool {
        self.words[i >> 6] >> (i & 63) & 1 == 1
    }

    /// Number of set bits strictly below `i`.
    #[inline]
    pub(crate) fn rank(&self, i: usize) -> usize {
        let w = i >> 6;
        let below = self.words[w] & ((1u64 << (i & 63)) - 1);
        self.prefix[w] as usize + below.count_ones() as usize
    }

    pub(crate) fn words(&self) -> &[u64] {
        &self.words
    }

    #[cfg(test)]
    pub(crate) fn count(&self) -> usize {
        *self.prefix.last().unwrap() as usize
    }

    pub(crate) fn ones(&self) -> impl Iterator<Item = u32> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let b = w.trailing_zeros();
                w &= w - 1;
                Some((wi as u32) * 64 + b)
            })
        })
    }
}
