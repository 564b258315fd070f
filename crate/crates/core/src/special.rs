//! Log-space helpers for Poisson-type weights and compensated sums.

use std::f64::consts::PI;

/// `ln Γ(x)` for `x > 0`.
#[inline]
pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

// stirlerr(k) = ln k! - (k + 1/2) ln k + k - ln sqrt(2π), k = 1..=15
const STIRLERR_SMALL: [f64; 15] = [
    0.081061466795327258,
    0.041340695955409294,
    0.027677925684998339,
    0.020790672103765093,
    0.016644691189821192,
    0.013876128823070748,
    0.01189670994589177,
    0.010411265261972096,
    0.0092554621827127329,
    0.0083305634333628713,
    0.0075736754879518408,
    0.0069428401072095299,
    0.0064089941880042071,
    0.0059513701127588477,
    0.0055547335519628014,
];

/// Error of Stirling's formula for `ln k!`, `k >= 1`.
pub fn stirlerr(k: u64) -> f64 {
    const S0: f64 = 1.0 / 12.0;
    const S1: f64 = 1.0 / 360.0;
    const S2: f64 = 1.0 / 1260.0;
    const S3: f64 = 1.0 / 1680.0;
    const S4: f64 = 1.0 / 1188.0;
    debug_assert!(k >= 1);
    if k <= 15 {
        return STIRLERR_SMALL[(k - 1) as usize];
    }
    let n = k as f64;
    let nn = n * n;
    if k > 500 {
        (S0 - S1 / nn) / n
    } else if k > 80 {
        (S0 - (S1 - S2 / nn) / nn) / n
    } else if k > 35 {
        (S0 - (S1 - (S2 - S3 / nn) / nn) / nn) / n
    } else {
        (S0 - (S1 - (S2 - (S3 - S4 / nn) / nn) / nn) / nn) / n
    }
}

/// Deviance term `k ln(k/m) + m - k`, evaluated without cancellation when `k ≈ m`.
pub fn bd0(k: f64, m: f64) -> f64 {
    if (k - m).abs() < 0.1 * (k + m) {
        let v = (k - m) / (k + m);
        let mut s = (k - m) * v;
        let mut ej = 2.0 * k * v;
        let v2 = v * v;
        let mut j = 1.0;
        loop {
            ej *= v2;
            let s1 = s + ej / (2.0 * j + 1.0);
            if s1 == s {
                return s1;
            }
            s = s1;
            j += 1.0;
        }
    } else {
        k * (k / m).ln() + m - k
    }
}

/// `ln(e^{-m} m^k / k!)`, accurate to a few ulps of the weight even for large `k`.
pub fn ln_poisson(k: u64, m: f64) -> f64 {
    if m == 0.0 {
        return if k == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    if k == 0 {
        return -m;
    }
    let kf = k as f64;
    -stirlerr(k) - bd0(kf, m) - 0.5 * (2.0 * PI * kf).ln()
}

/// Neumaier-compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl std::iter::FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = Self::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// Compensated sum of an iterator.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().collect::<CompensatedSum>().value()
}
