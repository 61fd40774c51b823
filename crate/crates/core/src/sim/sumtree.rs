/// Complete binary tree of partial sums over non-negative weights.
///
/// Internal nodes are recomputed from their children on every update rather
/// than adjusted by deltas, so the stored sums never drift from the leaves.
#[derive(Debug, Clone, PartialEq)]
pub struct SumTree {
    size: usize,
    nodes: Vec<f64>,
}

impl SumTree {
    pub fn new(weights: &[f64]) -> Self {
        let size = weights.len().max(1).next_power_of_two();
        let mut nodes = vec![0.0; 2 * size];
        nodes[size..size + weights.len()].copy_from_slice(weights);
        for i in (1..size).rev() {
            nodes[i] = nodes[2 * i] + nodes[2 * i + 1];
        }
        Self { size, nodes }
    }

    pub fn total(&self) -> f64 {
        self.nodes[1]
    }

    pub fn get(&self, idx: usize) -> f64 {
        self.nodes[self.size + idx]
    }

    pub fn set(&mut self, idx: usize, weight: f64) {
        let mut i = self.size + idx;
        if self.nodes[i] == weight {
            return;
        }
        self.nodes[i] = weight;
        i /= 2;
        while i >= 1 {
            self.nodes[i] = self.nodes[2 * i] + self.nodes[2 * i + 1];
            i /= 2;
        }
    }

    /// Sets the contiguous leaves starting at `first`, then refreshes their
    /// common ancestors once.
    pub fn set_range(&mut self, first: usize, weights: &[f64]) {
        if weights.is_empty() {
            return;
        }
        let mut lo = self.size + first;
        let mut hi = lo + weights.len() - 1;
        self.nodes[lo..=hi].copy_from_slice(weights);
        while lo > 1 {
            lo /= 2;
            hi /= 2;
            for i in lo..=hi {
                self.nodes[i] = self.nodes[2 * i] + self.nodes[2 * i + 1];
            }
        }
    }

    /// Leaf whose cumulative range contains `target`, for `target` in
    /// `[0, total)`. Rounding can push the descent onto an empty leaf; the
    /// caller must check the returned weight.
    pub fn find(&self, mut target: f64) -> usize {
        let mut i = 1;
        while i < self.size {
            let left = self.nodes[2 * i];
            let right = !(target < left);
            target -= if right { left } else { 0.0 };
            i = 2 * i + usize::from(right);
        }
        i - self.size
    }
}
