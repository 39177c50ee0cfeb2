//! Second-order truncated moment generating functions.
//!
//! All the closed-form age expressions need at most the first two moments of
//! the quantities involved, so instead of full MGFs we carry the truncation
//! `G(x) ≈ g0 + g1·x + g2·x²` around zero, where for a random variable `Y`
//! with unit mass `g0 = 1`, `g1 = E[Y]` and `g2 = E[Y²]/2`. Products of
//! independent contributions then reduce to a three-coefficient convolution,
//! and geometric sums of such products stay exact to second order.

use std::ops::{Add, Mul, Sub};

/// Truncated MGF `g0 + g1·x + g2·x²`; the Taylor tail is dropped, which is
/// exact for every first- and second-moment computation in this crate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncatedMgf {
    pub g0: f64,
    pub g1: f64,
    pub g2: f64,
}

impl TruncatedMgf {
    pub const ZERO: TruncatedMgf = TruncatedMgf { g0: 0.0, g1: 0.0, g2: 0.0 };
    pub const ONE: TruncatedMgf = TruncatedMgf { g0: 1.0, g1: 0.0, g2: 0.0 };

    /// MGF of a random variable with the given mean and second moment.
    pub fn from_moments(mean: f64, second_moment: f64) -> Self {
        TruncatedMgf { g0: 1.0, g1: mean, g2: 0.5 * second_moment }
    }

    /// Mean encoded by this truncation (`G'(0)`).
    pub fn mean(&self) -> f64 {
        self.g1
    }

    /// Second moment encoded by this truncation (`G''(0)`).
    pub fn second_moment(&self) -> f64 {
        2.0 * self.g2
    }

    pub fn scale(&self, factor: f64) -> Self {
        TruncatedMgf { g0: self.g0 * factor, g1: self.g1 * factor, g2: self.g2 * factor }
    }

    /// `self^k` by repeated truncated multiplication.
    pub fn powi(&self, k: usize) -> Self {
        let mut acc = TruncatedMgf::ONE;
        for _ in 0..k {
            acc = acc * *self;
        }
        acc
    }
}

impl Mul for TruncatedMgf {
    type Output = TruncatedMgf;

    /// Product truncated at second order: exactly the moment composition rule
    /// for sums of independent random variables.
    fn mul(self, rhs: TruncatedMgf) -> TruncatedMgf {
        TruncatedMgf {
            g0: self.g0 * rhs.g0,
            g1: self.g0 * rhs.g1 + self.g1 * rhs.g0,
            g2: self.g0 * rhs.g2 + self.g1 * rhs.g1 + self.g2 * rhs.g0,
        }
    }
}

impl Add for TruncatedMgf {
    type Output = TruncatedMgf;

    fn add(self, rhs: TruncatedMgf) -> TruncatedMgf {
        TruncatedMgf { g0: self.g0 + rhs.g0, g1: self.g1 + rhs.g1, g2: self.g2 + rhs.g2 }
    }
}

impl Sub for TruncatedMgf {
    type Output = TruncatedMgf;

    fn sub(self, rhs: TruncatedMgf) -> TruncatedMgf {
        TruncatedMgf { g0: self.g0 - rhs.g0, g1: self.g1 - rhs.g1, g2: self.g2 - rhs.g2 }
    }
}
