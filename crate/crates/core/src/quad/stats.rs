//! Streaming mean/variance with an order-fixed merge.

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub(crate) struct Running {
    pub count: u64,
    pub mean: f64,
    m2: f64,
}

impl Running {
    #[inline]
    pub fn push(&mut self, v: f64) {
        self.count += 1;
        let d = v - self.mean;
        self.mean += d / self.count as f64;
        self.m2 += d * (v - self.mean);
    }

    /// Chan's pairwise combination; the result depends on argument order.
    pub fn merge(&mut self, other: &Running) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let n = (self.count + other.count) as f64;
        let d = other.mean - self.mean;
        self.mean += d * other.count as f64 / n;
        self.m2 += other.m2 + d * d * self.count as f64 * other.count as f64 / n;
        self.count += other.count;
    }

    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            (self.m2 / (self.count - 1) as f64).max(0.0)
        }
    }

    pub fn std_dev(&self) -> f64 {
        self.variance().sqrt()
    }

    /// Standard error of the mean.
    pub fn std_error(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            (self.variance() / self.count as f64).sqrt()
        }
    }
}

/// Sample counts per shard; the first `total % shards` shards take one extra.
pub(crate) fn shard_sizes(total: u64, shards: usize) -> Vec<u64> {
    let s = shards as u64;
    (0..s).map(|k| total / s + u64::from(k < total % s)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn merge_matches_single_pass() {
        let data: Vec<f64> = (0..1000).map(|i| ((i * 37) % 101) as f64 * 0.1).collect();
        let mut whole = Running::default();
        data.iter().for_each(|v| whole.push(*v));
        let mut merged = Running::default();
        for chunk in data.chunks(77) {
            let mut part = Running::default();
            chunk.iter().for_each(|v| part.push(*v));
            merged.merge(&part);
        }
        assert_eq!(merged.count, 1000);
        assert_relative_eq!(merged.mean, whole.mean, max_relative = 1e-13);
        assert_relative_eq!(merged.variance(), whole.variance(), max_relative = 1e-11);
    }

    #[test]
    fn shard_sizes_sum() {
        assert_eq!(shard_sizes(10, 3), vec![4, 3, 3]);
        assert_eq!(shard_sizes(7, 1), vec![7]);
    }
}
