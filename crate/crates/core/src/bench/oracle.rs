use std::collections::BTreeMap;

/// Cleartext mirror of a packed table: one array per group, sums mod `t`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlaintextOracle {
    t: u64,
    slots: usize,
    groups: BTreeMap<u64, Vec<u64>>,
}

impl PlaintextOracle {
    /// `slots` is the slot count `n`; payload capacity is `n - 1`.
    pub fn new(t: u64, slots: usize) -> Self {
        PlaintextOracle { t, slots, groups: BTreeMap::new() }
    }

    pub fn capacity(&self) -> usize {
        self.slots - 1
    }

    pub fn pack(&mut self, group: u64, values: &[u64]) {
        self.groups.insert(group, values.to_vec());
    }

    pub fn insert(&mut self, group: u64, i: usize, v: u64) {
        self.groups.entry(group).or_default().insert(i, v);
    }

    pub fn append(&mut self, group: u64, v: u64) {
        self.groups.entry(group).or_default().push(v);
    }

    /// Removes and returns slot `i`; an empty group yields `None` (no-op).
    pub fn delete(&mut self, group: u64, i: usize) -> Option<u64> {
        let g = self.groups.entry(group).or_default();
        (i < g.len()).then(|| g.remove(i))
    }

    pub fn values(&self, group: u64) -> &[u64] {
        self.groups.get(&group).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn len(&self, group: u64) -> usize {
        self.values(group).len()
    }

    pub fn groups(&self) -> impl Iterator<Item = u64> + '_ {
        self.groups.keys().copied()
    }

    pub fn sum(&self, group: u64) -> u64 {
        self.values(group).iter().fold(0, |acc, &v| (acc + v) % self.t)
    }

    pub fn total(&self) -> u64 {
        self.groups.keys().fold(0, |acc, &g| (acc + self.sum(g)) % self.t)
    }

    /// Full slot vector the group's ciphertext must decrypt to.
    pub fn expected_slots(&self, group: u64) -> Vec<u64> {
        let mut s = self.values(group).to_vec();
        s.resize(self.slots, 0);
        s[self.slots - 1] = self.sum(group);
        s
    }
}
