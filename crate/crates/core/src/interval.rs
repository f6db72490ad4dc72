//! Outward-rounded interval arithmetic on `f64`.
//!
//! Basic operations are correctly rounded by IEEE 754, so one `next_up` /
//! `next_down` step per endpoint suffices. Library transcendental functions
//! are only faithful to within a few ulps; those results are widened by
//! [`TRANSCENDENTAL_ULPS`] steps on each side.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

pub const TRANSCENDENTAL_ULPS: u32 = 4;

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

fn down(x: f64, steps: u32) -> f64 {
    (0..steps).fold(x, |v, _| v.next_down())
}

fn up(x: f64, steps: u32) -> f64 {
    (0..steps).fold(x, |v, _| v.next_up())
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        assert!(lo <= hi, "empty interval [{lo}, {hi}]");
        Interval { lo, hi }
    }

    pub fn point(x: f64) -> Self {
        Interval { lo: x, hi: x }
    }

    pub fn from_i64(n: i64) -> Self {
        let x = n as f64;
        if x as i64 == n {
            Self::point(x)
        } else {
            Self::new(x.next_down(), x.next_up())
        }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn is_positive(&self) -> bool {
        self.lo > 0.0
    }

    pub fn pi() -> Self {
        Self::new(
            std::f64::consts::PI.next_down(),
            std::f64::consts::PI.next_up(),
        )
    }

    pub fn sqrt2() -> Self {
        Self::new(
            std::f64::consts::SQRT_2.next_down(),
            std::f64::consts::SQRT_2.next_up(),
        )
    }

    /// Natural log; requires a positive argument.
    pub fn ln(self) -> Self {
        assert!(self.lo > 0.0, "ln of non-positive interval");
        Self::new(
            down(self.lo.ln(), TRANSCENDENTAL_ULPS),
            up(self.hi.ln(), TRANSCENDENTAL_ULPS),
        )
    }

    pub fn sqr(self) -> Self {
        if self.lo >= 0.0 {
            Self::new(
                (self.lo * self.lo).next_down(),
                (self.hi * self.hi).next_up(),
            )
        } else if self.hi <= 0.0 {
            Self::new(
                (self.hi * self.hi).next_down(),
                (self.lo * self.lo).next_up(),
            )
        } else {
            let m = self.lo.abs().max(self.hi.abs());
            Self::new(0.0, (m * m).next_up())
        }
    }

    pub fn recip(self) -> Self {
        assert!(
            self.lo > 0.0 || self.hi < 0.0,
            "reciprocal of interval containing 0"
        );
        Self::new((1.0 / self.hi).next_down(), (1.0 / self.lo).next_up())
    }

    /// Sine on an interval inside `[0, pi/2]`, where it is increasing.
    pub fn sin_first_quadrant(self) -> Self {
        debug_assert!(self.lo >= 0.0 && self.hi <= std::f64::consts::FRAC_PI_2 + 1e-6);
        Self::new(
            down(self.lo.sin(), TRANSCENDENTAL_ULPS).max(0.0),
            up(self.hi.sin(), TRANSCENDENTAL_ULPS).min(1.0),
        )
    }

    /// Cosine on an interval inside `[0, pi/2]`, where it is decreasing.
    pub fn cos_first_quadrant(self) -> Self {
        debug_assert!(self.lo >= 0.0 && self.hi <= std::f64::consts::FRAC_PI_2 + 1e-6);
        Self::new(
            down(self.hi.cos(), TRANSCENDENTAL_ULPS).max(0.0),
            up(self.lo.cos(), TRANSCENDENTAL_ULPS).min(1.0),
        )
    }

    /// Integer ceiling when it is certain, `None` when the interval straddles an integer.
    pub fn certain_ceil(&self) -> Option<i64> {
        let a = self.lo.ceil();
        let b = self.hi.ceil();
        (a == b).then_some(a as i64)
    }

    pub fn hull(self, other: Self) -> Self {
        Self::new(self.lo.min(other.lo), self.hi.max(other.hi))
    }

    pub fn intersect(self, other: Self) -> Option<Self> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        (lo <= hi).then_some(Self { lo, hi })
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

impl Add for Interval {
    type Output = Interval;
    fn add(self, o: Interval) -> Interval {
        Interval::new((self.lo + o.lo).next_down(), (self.hi + o.hi).next_up())
    }
}

impl Sub for Interval {
    type Output = Interval;
    fn sub(self, o: Interval) -> Interval {
        Interval::new((self.lo - o.hi).next_down(), (self.hi - o.lo).next_up())
    }
}

impl Neg for Interval {
    type Output = Interval;
    fn neg(self) -> Interval {
        Interval::new(-self.hi, -self.lo)
    }
}

impl Mul for Interval {
    type Output = Interval;
    fn mul(self, o: Interval) -> Interval {
        let c = [
            self.lo * o.lo,
            self.lo * o.hi,
            self.hi * o.lo,
            self.hi * o.hi,
        ];
        let lo = c.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = c.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Interval::new(lo.next_down(), hi.next_up())
    }
}

impl Div for Interval {
    type Output = Interval;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, o: Interval) -> Interval {
        self * o.recip()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_encloses_exact_results() {
        let third = Interval::point(1.0) / Interval::point(3.0);
        assert!(third.lo < 1.0 / 3.0 + 1e-17 && third.hi > 1.0 / 3.0 - 1e-17);
        let sum = third + third + third;
        assert!(sum.contains(1.0));
        let d = Interval::point(0.1) - Interval::point(0.1);
        assert!(d.contains(0.0));
    }

    #[test]
    fn ceil_of_ln_squared() {
        let l3 = Interval::from_i64(3).ln().sqr();
        assert_eq!(l3.certain_ceil(), Some(2));
        let l2 = Interval::from_i64(2).ln().sqr();
        assert_eq!(l2.certain_ceil(), Some(1));
    }

    #[test]
    fn trig_encloses() {
        let x = Interval::pi() / Interval::point(4.0);
        let s = x.sin_first_quadrant();
        assert!(s.contains(std::f64::consts::FRAC_1_SQRT_2));
        let c = x.cos_first_quadrant();
        assert!(c.contains(std::f64::consts::FRAC_1_SQRT_2));
    }
}
