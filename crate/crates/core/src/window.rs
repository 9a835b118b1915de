//! Index lookups on sorted grids and sliding-window extrema.

use std::collections::VecDeque;

/// Smallest index with `xs[i] >= t`, or `xs.len()`.
pub fn first_at_or_after(xs: &[f64], t: f64) -> usize {
    xs.partition_point(|&x| x < t)
}

/// Largest index with `xs[i] <= t`.
pub fn last_at_or_before(xs: &[f64], t: f64) -> Option<usize> {
    xs.partition_point(|&x| x <= t).checked_sub(1)
}

/// Largest index with `xs[i] < t`.
pub fn last_before(xs: &[f64], t: f64) -> Option<usize> {
    xs.partition_point(|&x| x < t).checked_sub(1)
}

/// Maximum of `vals[lo..=hi]` for a sequence of queries whose `lo` and `hi`
/// are both nondecreasing. Amortized O(1) per query.
pub struct SlidingMax<'a> {
    vals: &'a [f64],
    deque: VecDeque<usize>,
    next: usize,
}

impl<'a> SlidingMax<'a> {
    pub fn new(vals: &'a [f64]) -> Self {
        Self {
            vals,
            deque: VecDeque::new(),
            next: 0,
        }
    }

    pub fn query(&mut self, lo: usize, hi: usize) -> f64 {
        debug_assert!(lo <= hi && hi < self.vals.len());
        while self.next <= hi {
            let v = self.vals[self.next];
            while self.deque.back().is_some_and(|&b| self.vals[b] <= v) {
                self.deque.pop_back();
            }
            self.deque.push_back(self.next);
            self.next += 1;
        }
        while self.deque.front().is_some_and(|&f| f < lo) {
            self.deque.pop_front();
        }
        self.vals[*self.deque.front().expect("monotone queries")]
    }
}
