//! Mergeable Monte Carlo accumulators.

/// Exact moments of an integer-valued error.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct IntErrorStats {
    pub n: u64,
    pub sum: i128,
    pub sum_abs: u128,
    pub sum_sq: u128,
    pub sum_quad: u128,
}

impl IntErrorStats {
    pub fn push(&mut self, e: i64) {
        let a = e.unsigned_abs() as u128;
        self.n += 1;
        self.sum += e as i128;
        self.sum_abs += a;
        self.sum_sq += a * a;
        self.sum_quad += (a * a) * (a * a);
    }

    pub fn merge(&mut self, other: &IntErrorStats) {
        self.n += other.n;
        self.sum += other.sum;
        self.sum_abs += other.sum_abs;
        self.sum_sq += other.sum_sq;
        self.sum_quad += other.sum_quad;
    }

    pub fn mse(&self) -> f64 {
        self.sum_sq as f64 / self.n as f64
    }

    pub fn mae(&self) -> f64 {
        self.sum_abs as f64 / self.n as f64
    }

    /// Standard error of [`Self::mse`]: sample std of `e^2` over `sqrt(n)`.
    pub fn mse_stderr(&self) -> f64 {
        stderr_exact(self.n, self.sum_sq, self.sum_quad)
    }

    /// Standard error of [`Self::mae`].
    pub fn mae_stderr(&self) -> f64 {
        stderr_exact(self.n, self.sum_abs, self.sum_sq)
    }
}

/// `sqrt((n S2 - S1^2) / (n^2 (n - 1)))`, with the numerator formed exactly
/// when it fits.
fn stderr_exact(n: u64, s1: u128, s2: u128) -> f64 {
    if n < 2 {
        return f64::NAN;
    }
    let nn = n as u128;
    let num = match (nn.checked_mul(s2), s1.checked_mul(s1)) {
        (Some(a), Some(b)) => a.saturating_sub(b) as f64,
        _ => {
            let (s1, s2) = (s1 as f64, s2 as f64);
            (n as f64 * s2 - s1 * s1).max(0.0)
        }
    };
    let n = n as f64;
    (num / (n * n * (n - 1.0))).sqrt()
}

/// Mean and standard error of a real-valued quantity.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RealStats {
    pub n: u64,
    pub sum: f64,
    pub sum_sq: f64,
}

impl RealStats {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        self.sum += x;
        self.sum_sq += x * x;
    }

    pub fn merge(&mut self, other: &RealStats) {
        self.n += other.n;
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
    }

    pub fn mean(&self) -> f64 {
        self.sum / self.n as f64
    }

    pub fn stderr(&self) -> f64 {
        if self.n < 2 {
            return f64::NAN;
        }
        let n = self.n as f64;
        let var = ((self.sum_sq - self.sum * self.sum / n) / (n - 1.0)).max(0.0);
        (var / n).sqrt()
    }
}

/// Per-trial error accumulators for one method at one SNR point.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TrialStats {
    /// Error of the decoded integer sum.
    pub sum_err: IntErrorStats,
    pub abs_err: RealStats,
    pub sq_err: RealStats,
    /// Per-trial NMSE terms `|f - f_hat|^2 / |f|`.
    pub nmse: RealStats,
}

impl TrialStats {
    pub fn push_sum_error(&mut self, e: i64) {
        self.sum_err.push(e);
    }

    /// Absolute and squared error of a function estimate.
    pub fn push_error(&mut self, f: f64, f_hat: f64) {
        let d = f - f_hat;
        self.abs_err.push(d.abs());
        self.sq_err.push(d * d);
    }

    /// Like [`push_error`](Self::push_error), plus the NMSE term. `f` must be
    /// nonzero.
    pub fn push_estimate(&mut self, f: f64, f_hat: f64) {
        self.push_error(f, f_hat);
        let d = f - f_hat;
        self.nmse.push(d * d / f.abs());
    }

    pub fn merge(&mut self, other: &TrialStats) {
        self.sum_err.merge(&other.sum_err);
        self.abs_err.merge(&other.abs_err);
        self.sq_err.merge(&other.sq_err);
        self.nmse.merge(&other.nmse);
    }
}

/// Merges in a fixed balanced tree so the floating-point result depends only
/// on the order of `parts`.
pub fn merge_pairwise<T: Clone>(mut parts: Vec<T>, merge: impl Fn(&mut T, &T)) -> Option<T> {
    while parts.len() > 1 {
        let mut next = Vec::with_capacity(parts.len().div_ceil(2));
        let mut it = parts.into_iter();
        while let Some(mut a) = it.next() {
            if let Some(b) = it.next() {
                merge(&mut a, &b);
            }
            next.push(a);
        }
        parts = next;
    }
    parts.pop()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn int_stats_basic() {
        let mut s = IntErrorStats::default();
        for e in [1, -1, 3, 0] {
            s.push(e);
        }
        assert_eq!(s.n, 4);
        assert_eq!(s.sum, 3);
        assert_eq!(s.mse(), 11.0 / 4.0);
        assert_eq!(s.mae(), 5.0 / 4.0);
        // e^2 = 1, 1, 9, 0: mean 2.75, sample var = (sum (x-m)^2)/3
        let var = [1.0f64, 1.0, 9.0, 0.0].iter().map(|x| (x - 2.75f64).powi(2)).sum::<f64>() / 3.0;
        assert!((s.mse_stderr() - (var / 4.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn zero_errors_give_zero_stats() {
        let mut s = IntErrorStats::default();
        for _ in 0..10 {
            s.push(0);
        }
        assert_eq!((s.mse(), s.mse_stderr(), s.mae()), (0.0, 0.0, 0.0));
    }

    #[test]
    fn real_stats_basic() {
        let mut r = RealStats::default();
        for x in [2.0, 4.0, 6.0] {
            r.push(x);
        }
        assert_eq!(r.mean(), 4.0);
        assert!((r.stderr() - (4.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert!(RealStats::default().stderr().is_nan());
    }

    #[test]
    fn pairwise_merge_order() {
        let merged = merge_pairwise((1..=7).collect::<Vec<i32>>(), |a, b| *a += b).unwrap();
        assert_eq!(merged, 28);
        assert_eq!(merge_pairwise(Vec::<i32>::new(), |a, b| *a += b), None);
    }

    proptest! {
        #[test]
        fn partitioned_merge_matches_sequential(
            errs in prop::collection::vec(-100_000i64..100_000, 1..500),
            cuts in prop::collection::vec(0usize..500, 0..8),
        ) {
            let mut seq = TrialStats::default();
            for &e in &errs {
                seq.push_sum_error(e);
                seq.push_estimate(1.0 + (e as f64).abs(), e as f64 * 0.37);
            }
            let mut bounds: Vec<usize> = cuts.into_iter().map(|c| c % (errs.len() + 1)).collect();
            bounds.push(0);
            bounds.push(errs.len());
            bounds.sort();
            let parts: Vec<TrialStats> = bounds.windows(2).map(|w| {
                let mut t = TrialStats::default();
                for &e in &errs[w[0]..w[1]] {
                    t.push_sum_error(e);
                    t.push_estimate(1.0 + (e as f64).abs(), e as f64 * 0.37);
                }
                t
            }).collect();
            let merged = merge_pairwise(parts, |a, b| a.merge(b)).unwrap();
            prop_assert_eq!(merged.sum_err, seq.sum_err);
            let close = |a: f64, b: f64| (a - b).abs() <= 1e-10 * a.abs().max(b.abs()).max(1e-300);
            prop_assert!(close(merged.sq_err.sum, seq.sq_err.sum));
            prop_assert!(close(merged.abs_err.sum, seq.abs_err.sum));
            prop_assert!(close(merged.nmse.sum, seq.nmse.sum));
            prop_assert!(close(merged.nmse.sum_sq, seq.nmse.sum_sq));
        }
    }
}
