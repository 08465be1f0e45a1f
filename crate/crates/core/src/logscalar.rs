//! Signed real numbers stored as `sign · exp(ln_magnitude)`.
//!
//! Tunneling splittings and periods in the Fock regime routinely leave the
//! f64 range (a 200-atom period is ~10^635 ms), so every such quantity is
//! carried in log space and only converted at the edges.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Div, Mul, Neg};

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

/// Largest |ln x| for which [`LogScalar::to_f64`] succeeds.
pub const LN_CONVERSION_LIMIT: f64 = 700.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sign {
    Negative,
    Zero,
    Positive,
}

impl Sign {
    fn of(x: f64) -> Self {
        if x > 0.0 {
            Sign::Positive
        } else if x < 0.0 {
            Sign::Negative
        } else {
            Sign::Zero
        }
    }

    fn as_i8(self) -> i8 {
        match self {
            Sign::Negative => -1,
            Sign::Zero => 0,
            Sign::Positive => 1,
        }
    }

    fn from_i8(s: i8) -> Self {
        match s.signum() {
            -1 => Sign::Negative,
            0 => Sign::Zero,
            _ => Sign::Positive,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogScalar {
    sign: Sign,
    ln_magnitude: f64,
}

impl LogScalar {
    pub const ZERO: LogScalar = LogScalar { sign: Sign::Zero, ln_magnitude: f64::NEG_INFINITY };
    pub const ONE: LogScalar = LogScalar { sign: Sign::Positive, ln_magnitude: 0.0 };

    /// Builds a positive value directly from its natural log.
    pub fn from_ln(ln_magnitude: f64) -> Self {
        Self::from_sign_ln(Sign::Positive, ln_magnitude)
    }

    pub fn from_sign_ln(sign: Sign, ln_magnitude: f64) -> Self {
        if sign == Sign::Zero || ln_magnitude == f64::NEG_INFINITY {
            Self::ZERO
        } else {
            LogScalar { sign, ln_magnitude }
        }
    }

    pub fn from_f64(x: f64) -> Self {
        Self::from_sign_ln(Sign::of(x), x.abs().ln())
    }

    pub fn from_log10(log10_magnitude: f64) -> Self {
        Self::from_ln(log10_magnitude * std::f64::consts::LN_10)
    }

    pub fn sign(&self) -> Sign {
        self.sign
    }

    pub fn is_zero(&self) -> bool {
        self.sign == Sign::Zero
    }

    /// Natural log of |x|; `-inf` for zero.
    pub fn ln_abs(&self) -> f64 {
        if self.is_zero() {
            f64::NEG_INFINITY
        } else {
            self.ln_magnitude
        }
    }

    pub fn log10_abs(&self) -> f64 {
        self.ln_abs() / std::f64::consts::LN_10
    }

    /// Converts to f64, refusing values whose magnitude is outside `e^{±700}`.
    pub fn to_f64(&self) -> Result<f64> {
        if self.is_zero() {
            return Ok(0.0);
        }
        if self.ln_magnitude.abs() >= LN_CONVERSION_LIMIT || !self.ln_magnitude.is_finite() {
            return Err(Error::NotRepresentable { ln_magnitude: self.ln_magnitude });
        }
        Ok(self.sign.as_i8() as f64 * self.ln_magnitude.exp())
    }

    /// Converts to f64, flushing to zero / infinity instead of failing.
    pub fn to_f64_saturating(&self) -> f64 {
        if self.is_zero() {
            0.0
        } else {
            self.sign.as_i8() as f64 * self.ln_magnitude.exp()
        }
    }

    pub fn abs(&self) -> Self {
        if self.is_zero() {
            *self
        } else {
            LogScalar { sign: Sign::Positive, ln_magnitude: self.ln_magnitude }
        }
    }

    pub fn recip(&self) -> Self {
        assert!(!self.is_zero(), "reciprocal of zero LogScalar");
        LogScalar { sign: self.sign, ln_magnitude: -self.ln_magnitude }
    }

    pub fn powi(&self, n: i32) -> Self {
        if n == 0 {
            return Self::ONE;
        }
        if self.is_zero() {
            return Self::ZERO;
        }
        let sign = if n % 2 == 0 { Sign::Positive } else { self.sign };
        LogScalar { sign, ln_magnitude: self.ln_magnitude * n as f64 }
    }

    pub fn powf(&self, exponent: f64) -> Self {
        assert!(self.sign != Sign::Negative, "fractional power of a negative LogScalar");
        if self.is_zero() {
            return Self::ZERO;
        }
        Self::from_ln(self.ln_magnitude * exponent)
    }

    pub fn sqrt(&self) -> Self {
        self.powf(0.5)
    }

    /// Sum in log space (stable log-sum-exp; mixed signs handled by cancellation).
    pub fn add(&self, other: &Self) -> Self {
        if self.is_zero() {
            return *other;
        }
        if other.is_zero() {
            return *self;
        }
        let (big, small) = if self.ln_magnitude >= other.ln_magnitude { (self, other) } else { (other, self) };
        let ratio = (small.ln_magnitude - big.ln_magnitude).exp();
        if big.sign == small.sign {
            LogScalar { sign: big.sign, ln_magnitude: big.ln_magnitude + ratio.ln_1p() }
        } else if ratio == 1.0 {
            Self::ZERO
        } else {
            LogScalar { sign: big.sign, ln_magnitude: big.ln_magnitude + (-ratio).ln_1p() }
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&-*other)
    }

    /// Relative distance |a/b − 1| computed without leaving log space when the
    /// signs agree.
    pub fn relative_error(&self, reference: &Self) -> f64 {
        if self.sign != reference.sign {
            return f64::INFINITY;
        }
        if self.is_zero() {
            return 0.0;
        }
        (self.ln_magnitude - reference.ln_magnitude).exp_m1().abs()
    }
}

impl Mul for LogScalar {
    type Output = LogScalar;
    fn mul(self, rhs: LogScalar) -> LogScalar {
        if self.is_zero() || rhs.is_zero() {
            return LogScalar::ZERO;
        }
        LogScalar {
            sign: Sign::from_i8(self.sign.as_i8() * rhs.sign.as_i8()),
            ln_magnitude: self.ln_magnitude + rhs.ln_magnitude,
        }
    }
}

impl Mul<f64> for LogScalar {
    type Output = LogScalar;
    fn mul(self, rhs: f64) -> LogScalar {
        self * LogScalar::from_f64(rhs)
    }
}

impl Div for LogScalar {
    type Output = LogScalar;
    fn div(self, rhs: LogScalar) -> LogScalar {
        self * rhs.recip()
    }
}

impl Div<f64> for LogScalar {
    type Output = LogScalar;
    fn div(self, rhs: f64) -> LogScalar {
        self / LogScalar::from_f64(rhs)
    }
}

impl Neg for LogScalar {
    type Output = LogScalar;
    fn neg(self) -> LogScalar {
        LogScalar { sign: Sign::from_i8(-self.sign.as_i8()), ln_magnitude: self.ln_magnitude }
    }
}

impl PartialOrd for LogScalar {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        let (a, b) = (self.sign.as_i8(), other.sign.as_i8());
        if a != b {
            return a.partial_cmp(&b);
        }
        match self.sign {
            Sign::Zero => Some(Ordering::Equal),
            Sign::Positive => self.ln_magnitude.partial_cmp(&other.ln_magnitude),
            Sign::Negative => other.ln_magnitude.partial_cmp(&self.ln_magnitude),
        }
    }
}

impl fmt::Display for LogScalar {
    /// Scientific notation that survives exponents far beyond f64.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let log10 = self.log10_abs();
        let exponent = log10.floor();
        let mantissa = 10f64.powf(log10 - exponent);
        let sign = if self.sign == Sign::Negative { "-" } else { "" };
        let precision = f.precision().unwrap_or(4);
        write!(f, "{sign}{mantissa:.precision$}e{exponent:.0}")
    }
}

/// ln(n!) via lnΓ(n+1).
pub fn ln_factorial(n: u64) -> f64 {
    if n < 2 {
        0.0
    } else {
        ln_gamma(n as f64 + 1.0)
    }
}

/// ln C(n, k); `-inf` when k > n.
pub fn ln_binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}
