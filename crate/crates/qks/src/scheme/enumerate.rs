//! Streaming enumeration of ordered k-tuples of disjoint tau-subsets.
//!
//! Elements are instance indices `0..m` into a multiset, so duplicated
//! values are distinct instances and "disjoint" means instance-disjoint.
//! Tuples are yielded in a fixed lexicographic order, which keeps
//! provenance descriptors stable across runs and thread counts.

/// Number of ordered k-tuples of disjoint tau-subsets of an m-element
/// multiset: `prod_{i=0}^{k-1} C(m - i*tau, tau)`. Saturates at
/// `u128::MAX` on overflow (any cap check fails long before that).
pub fn disjoint_tuple_count(m: usize, k: usize, tau: usize) -> u128 {
    let mut total: u128 = 1;
    for i in 0..k {
        let remaining = match m.checked_sub(i * tau) {
            Some(r) if r >= tau => r,
            _ => return 0,
        };
        match total.checked_mul(binomial(remaining, tau)) {
            Some(t) => total = t,
            None => return u128::MAX,
        }
    }
    total
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// One enumeration level: a tau-combination (as positions) over the
/// indices still available at this depth.
#[derive(Debug, Clone)]
struct Level {
    available: Vec<usize>,
    positions: Vec<usize>,
}

impl Level {
    fn first(available: Vec<usize>, tau: usize) -> Option<Self> {
        if available.len() < tau {
            return None;
        }
        Some(Self {
            available,
            positions: (0..tau).collect(),
        })
    }

    /// Advances to the next combination in lexicographic order.
    fn advance(&mut self) -> bool {
        let tau = self.positions.len();
        let n = self.available.len();
        let mut i = tau;
        while i > 0 {
            i -= 1;
            if self.positions[i] < n - (tau - i) {
                self.positions[i] += 1;
                for j in i + 1..tau {
                    self.positions[j] = self.positions[j - 1] + 1;
                }
                return true;
            }
        }
        false
    }

    fn selected(&self) -> Vec<usize> {
        self.positions.iter().map(|&p| self.available[p]).collect()
    }

    fn unselected(&self) -> Vec<usize> {
        let mut next_pos = 0;
        let mut rest = Vec::with_capacity(self.available.len() - self.positions.len());
        for (i, &v) in self.available.iter().enumerate() {
            if next_pos < self.positions.len() && self.positions[next_pos] == i {
                next_pos += 1;
            } else {
                rest.push(v);
            }
        }
        rest
    }
}

/// Iterator over every ordered k-tuple of disjoint tau-subsets of
/// `0..m`. Empty when `k * tau > m`.
#[derive(Debug)]
pub struct DisjointTuples {
    k: usize,
    tau: usize,
    levels: Vec<Level>,
    exhausted: bool,
}

impl DisjointTuples {
    pub fn new(m: usize, k: usize, tau: usize) -> Self {
        assert!(k >= 1 && tau >= 1, "k and tau must be positive");
        let mut levels = Vec::with_capacity(k);
        let mut available: Vec<usize> = (0..m).collect();
        let mut exhausted = false;
        for _ in 0..k {
            match Level::first(available.clone(), tau) {
                Some(level) => {
                    available = level.unselected();
                    levels.push(level);
                }
                None => {
                    exhausted = true;
                    break;
                }
            }
        }
        Self {
            k,
            tau,
            levels,
            exhausted,
        }
    }

    fn current(&self) -> Vec<Vec<usize>> {
        self.levels.iter().map(Level::selected).collect()
    }

    /// Advances the deepest level that still has a next combination and
    /// rebuilds everything below it.
    fn step(&mut self) -> bool {
        let mut depth = self.k;
        loop {
            if depth == 0 {
                return false;
            }
            depth -= 1;
            if self.levels[depth].advance() {
                break;
            }
        }
        for d in depth + 1..self.k {
            let available = self.levels[d - 1].unselected();
            match Level::first(available, self.tau) {
                Some(level) => self.levels[d] = level,
                None => return false,
            }
        }
        true
    }
}

impl Iterator for DisjointTuples {
    type Item = Vec<Vec<usize>>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.exhausted {
            return None;
        }
        let item = self.current();
        self.exhausted = !self.step();
        Some(item)
    }
}
