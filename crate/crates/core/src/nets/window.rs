use std::collections::VecDeque;

/// Rolling buffer of the most recent observations, oldest first.
#[derive(Clone, Debug, PartialEq)]
pub struct ObservationWindow {
    capacity: usize,
    items: VecDeque<Vec<f64>>,
}

impl ObservationWindow {
    pub fn new(capacity: usize) -> Self {
        let capacity = capacity.max(1);
        Self {
            capacity,
            items: VecDeque::with_capacity(capacity),
        }
    }

    pub fn push(&mut self, obs: Vec<f64>) {
        if self.items.len() == self.capacity {
            self.items.pop_front();
        }
        self.items.push_back(obs);
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn latest(&self) -> Option<&[f64]> {
        self.items.back().map(Vec::as_slice)
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.items.iter().map(Vec::as_slice)
    }

    /// The window without its newest entry.
    pub fn without_latest(&self) -> Self {
        let mut w = self.clone();
        w.items.pop_back();
        w
    }
}
