/// Plaintext selector vectors used by slot updates. Slot `n-1` holds the local sum.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SlotMask {
    slots: Vec<u64>,
}

impl SlotMask {
    /// Selects slots `j < i` plus the sum slot.
    pub fn keep_prefix(n: usize, i: usize) -> Self {
        let mut slots = vec![0u64; n];
        slots[..i.min(n - 1)].fill(1);
        slots[n - 1] = 1;
        SlotMask { slots }
    }

    /// Selects payload slots `lo..hi` (clamped to the payload range).
    pub fn range(n: usize, lo: usize, hi: usize) -> Self {
        let mut slots = vec![0u64; n];
        let hi = hi.min(n - 1);
        if lo < hi {
            slots[lo..hi].fill(1);
        }
        SlotMask { slots }
    }

    /// `v` at slot `i` and at the sum slot.
    pub fn value_with_sum(n: usize, i: usize, v: u64) -> Self {
        let mut slots = vec![0u64; n];
        slots[i] = v;
        slots[n - 1] = v;
        SlotMask { slots }
    }

    /// `v` at the sum slot only.
    pub fn sum_only(n: usize, v: u64) -> Self {
        let mut slots = vec![0u64; n];
        slots[n - 1] = v;
        SlotMask { slots }
    }

    pub fn slots(&self) -> &[u64] {
        &self.slots
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keep_and_suffix_are_disjoint() {
        let n = 8;
        for l in 0..n - 1 {
            for i in 0..=l {
                let keep = SlotMask::keep_prefix(n, i);
                let suffix = SlotMask::range(n, i, l);
                assert_eq!(keep.slots()[n - 1], 1);
                assert_eq!(suffix.slots()[n - 1], 0);
                assert!(keep.slots().iter().zip(suffix.slots()).all(|(a, b)| a * b == 0));
            }
        }
        assert_eq!(SlotMask::keep_prefix(4, 2).slots(), &[1, 1, 0, 1]);
        assert_eq!(SlotMask::range(6, 1, 3).slots(), &[0, 1, 1, 0, 0, 0]);
        assert_eq!(SlotMask::value_with_sum(4, 1, 9).slots(), &[0, 9, 0, 9]);
    }
}
