//! Dense id set with O(1) insert, remove and uniform sampling by index.

/// Set of ids drawn from `0..capacity`, backed by a member vector and a
/// position table so removal by value is O(1) (swap-remove).
#[derive(Debug, Clone)]
pub(crate) struct IndexedSet {
    members: Vec<u32>,
    pos: Vec<u32>,
}

const ABSENT: u32 = u32::MAX;

impl IndexedSet {
    pub fn with_capacity(capacity: u32) -> Self {
        IndexedSet {
            members: Vec::new(),
            pos: vec![ABSENT; capacity as usize],
        }
    }

    pub fn insert(&mut self, id: u32) {
        debug_assert_eq!(self.pos[id as usize], ABSENT);
        self.pos[id as usize] = self.members.len() as u32;
        self.members.push(id);
    }

    pub fn remove(&mut self, id: u32) {
        let idx = self.pos[id as usize];
        debug_assert_ne!(idx, ABSENT);
        let last = self.members.pop().expect("remove from empty set");
        if last != id {
            self.members[idx as usize] = last;
            self.pos[last as usize] = idx;
        }
        self.pos[id as usize] = ABSENT;
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    /// Member at position `idx` (for uniform sampling via a random index).
    pub fn get(&self, idx: usize) -> u32 {
        self.members[idx]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn insert_remove_sample() {
        let mut s = IndexedSet::with_capacity(10);
        for id in [3u32, 7, 1] {
            s.insert(id);
        }
        assert_eq!(s.len(), 3);
        s.remove(7);
        assert_eq!(s.len(), 2);
        let left: Vec<u32> = (0..s.len()).map(|i| s.get(i)).collect();
        assert!(left.contains(&3) && left.contains(&1));
        s.remove(3);
        s.remove(1);
        assert_eq!(s.len(), 0);
    }
}
