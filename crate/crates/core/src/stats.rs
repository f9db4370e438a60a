//! Order-stable reductions. Sums are pairwise over the input order, so a
//! parallel producer that preserves order reproduces sequential results
//! bit for bit.

const LEAF: usize = 16;

pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= LEAF {
        return xs.iter().fold(0.0, |acc, &x| acc + x);
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Sample mean and unbiased variance (two-pass).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub count: usize,
    pub mean: f64,
    pub variance: f64,
}

impl Moments {
    pub fn of(xs: &[f64]) -> Self {
        let count = xs.len();
        if count == 0 {
            return Self {
                count,
                mean: f64::NAN,
                variance: f64::NAN,
            };
        }
        let mean = pairwise_sum(xs) / count as f64;
        let variance = if count > 1 {
            let dev: alloc::vec::Vec<f64> = xs.iter().map(|x| (x - mean) * (x - mean)).collect();
            pairwise_sum(&dev) / (count - 1) as f64
        } else {
            f64::NAN
        };
        Self {
            count,
            mean,
            variance,
        }
    }

    pub fn std_dev(&self) -> f64 {
        libm::sqrt(self.variance)
    }

    /// Standard error of the mean.
    pub fn std_err(&self) -> f64 {
        libm::sqrt(self.variance / self.count as f64)
    }
}
