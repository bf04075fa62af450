//! The state-change cost model.
//!
//! An update `t` costs one state change (`X_t = 1`) when the persistent
//! memory after the update differs from the memory before it, no matter how
//! many individual cells were written. Components call
//! [`StateMeter::mark_dirty`] on every persistent mutation and the driver
//! closes each update with [`StateMeter::end_update`].

/// Accumulates per-update state-change indicators and peak space in words.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StateMeter {
    total_state_changes: u64,
    updates: u64,
    peak_words: u64,
    dirty: bool,
}

impl StateMeter {
    pub fn new() -> Self {
        Self::default()
    }

    /// Record that persistent state was mutated during the current update.
    #[inline]
    pub fn mark_dirty(&mut self) {
        self.dirty = true;
    }

    pub fn is_dirty(&self) -> bool {
        self.dirty
    }

    /// Close the current update. `words` is the memory footprint after it.
    pub fn end_update(&mut self, words: usize) {
        self.updates += 1;
        if self.dirty {
            self.total_state_changes += 1;
            self.dirty = false;
        }
        self.peak_words = self.peak_words.max(words as u64);
    }

    pub fn total_state_changes(&self) -> u64 {
        self.total_state_changes
    }

    pub fn updates(&self) -> u64 {
        self.updates
    }

    pub fn peak_words(&self) -> u64 {
        self.peak_words
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn several_mutations_in_one_update_count_once() {
        let mut m = StateMeter::new();
        m.mark_dirty();
        m.mark_dirty();
        m.mark_dirty();
        m.end_update(3);
        assert_eq!(m.total_state_changes(), 1);
        assert!(!m.is_dirty());
    }

    #[test]
    fn clean_update_costs_nothing() {
        let mut m = StateMeter::new();
        m.end_update(0);
        assert_eq!(m.total_state_changes(), 0);
        assert_eq!(m.updates(), 1);
    }

    #[test]
    fn all_dirty_updates_give_m() {
        let mut m = StateMeter::new();
        for w in 0..50 {
            m.mark_dirty();
            m.end_update(w);
        }
        assert_eq!(m.total_state_changes(), 50);
        assert_eq!(m.peak_words(), 49);
    }
}
