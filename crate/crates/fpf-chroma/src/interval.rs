//! Closed floating-point intervals with outward rounding.
//!
//! Every arithmetic operation widens its result endpoints outward so that the
//! returned interval encloses the exact real-arithmetic result. Endpoint
//! computations go through f64; one ulp of widening covers the rounding of
//! the basic operations, two ulps cover the libm transcendentals, whose
//! results are not guaranteed correctly rounded on every platform.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::EvalError;

/// A closed interval `[lo, hi]` with `lo <= hi`, both finite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

fn down(x: f64) -> f64 {
    x.next_down()
}

fn up(x: f64) -> f64 {
    x.next_up()
}

/// Two ulps outward for transcendental endpoints.
fn down2(x: f64) -> f64 {
    x.next_down().next_down()
}

fn up2(x: f64) -> f64 {
    x.next_up().next_up()
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        debug_assert!(lo <= hi, "interval endpoints out of order: [{lo}, {hi}]");
        Interval { lo, hi }
    }

    pub fn point(x: f64) -> Self {
        Interval { lo: x, hi: x }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn midpoint(&self) -> f64 {
        let m = self.lo * 0.5 + self.hi * 0.5;
        m.clamp(self.lo, self.hi)
    }

    pub fn radius(&self) -> f64 {
        let m = self.midpoint();
        up((self.hi - m).max(m - self.lo))
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn contains_interval(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn intersects(&self, other: &Interval) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    pub fn hull(&self, other: &Interval) -> Interval {
        Interval::new(self.lo.min(other.lo), self.hi.max(other.hi))
    }

    /// Magnitude of the largest absolute value in the interval.
    pub fn abs_max(&self) -> f64 {
        self.lo.abs().max(self.hi.abs())
    }

    /// Distance from the interval to a point (0 if contained).
    pub fn distance_to(&self, x: f64) -> f64 {
        (self.lo - x).max(x - self.hi).max(0.0)
    }

    pub fn neg(&self) -> Interval {
        // Negation is exact in IEEE arithmetic.
        Interval::new(-self.hi, -self.lo)
    }

    pub fn add(&self, other: &Interval) -> Interval {
        Interval::new(down(self.lo + other.lo), up(self.hi + other.hi))
    }

    pub fn sub(&self, other: &Interval) -> Interval {
        Interval::new(down(self.lo - other.hi), up(self.hi - other.lo))
    }

    pub fn mul(&self, other: &Interval) -> Interval {
        let p = [
            self.lo * other.lo,
            self.lo * other.hi,
            self.hi * other.lo,
            self.hi * other.hi,
        ];
        let lo = p.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = p.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Interval::new(down(lo), up(hi))
    }

    /// Square of the interval; tighter than `mul(self)` when the interval
    /// straddles zero, where the naive product rule loses the correlation
    /// between the two factors.
    pub fn square(&self) -> Interval {
        if self.lo >= 0.0 {
            Interval::new(down(self.lo * self.lo).max(0.0), up(self.hi * self.hi))
        } else if self.hi <= 0.0 {
            Interval::new(down(self.hi * self.hi).max(0.0), up(self.lo * self.lo))
        } else {
            let m = (self.lo * self.lo).max(self.hi * self.hi);
            Interval::new(0.0, up(m))
        }
    }

    pub fn div(&self, other: &Interval) -> Result<Interval, EvalError> {
        if other.contains(0.0) {
            return Err(EvalError::DivisorContainsZero);
        }
        let p = [
            self.lo / other.lo,
            self.lo / other.hi,
            self.hi / other.lo,
            self.hi / other.hi,
        ];
        let lo = p.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = p.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Ok(Interval::new(down(lo), up(hi)))
    }

    pub fn min_with(&self, other: &Interval) -> Interval {
        // min/max of floats are exact; no widening needed.
        Interval::new(self.lo.min(other.lo), self.hi.min(other.hi))
    }

    pub fn max_with(&self, other: &Interval) -> Interval {
        Interval::new(self.lo.max(other.lo), self.hi.max(other.hi))
    }

    pub fn abs(&self) -> Interval {
        if self.lo >= 0.0 {
            *self
        } else if self.hi <= 0.0 {
            self.neg()
        } else {
            Interval::new(0.0, self.hi.max(-self.lo))
        }
    }

    pub fn sqrt(&self) -> Result<Interval, EvalError> {
        if self.lo < 0.0 {
            return Err(EvalError::SqrtOfNegative);
        }
        // sqrt is correctly rounded; one ulp outward.
        Ok(Interval::new(
            down(self.lo.sqrt()).max(0.0),
            up(self.hi.sqrt()),
        ))
    }

    pub fn exp(&self) -> Interval {
        Interval::new(down2(self.lo.exp()).max(0.0), up2(self.hi.exp()))
    }

    /// Sine with critical-point scanning: when a maximum (pi/2 + 2k*pi) or a
    /// minimum (-pi/2 + 2k*pi) lies in the interval, the corresponding
    /// endpoint is pinned to +-1 exactly. A naive [-1, 1] answer would wipe
    /// out every stratum-certification gap downstream.
    pub fn sin(&self) -> Interval {
        range_of_periodic(self, f64::sin, PI / 2.0, -PI / 2.0)
    }

    pub fn cos(&self) -> Interval {
        range_of_periodic(self, f64::cos, 0.0, PI)
    }
}

/// Enclosure of a 2*pi-periodic function with one max at `max_at + 2k*pi`
/// and one min at `min_at + 2k*pi`, values +1 and -1 respectively.
fn range_of_periodic(iv: &Interval, f: fn(f64) -> f64, max_at: f64, min_at: f64) -> Interval {
    let two_pi = 2.0 * PI;
    if iv.width() >= two_pi {
        return Interval::new(-1.0, 1.0);
    }
    let fa = f(iv.lo);
    let fb = f(iv.hi);
    let mut lo = down2(fa.min(fb));
    let mut hi = up2(fa.max(fb));
    // Slack absorbs the inexactness of the pi constant in the phase test, so
    // a critical point just outside the computed phase window still counts.
    let slack = 1e-9 * iv.lo.abs().max(iv.hi.abs()).max(1.0);
    if contains_phase(iv.lo - slack, iv.hi + slack, max_at) {
        hi = 1.0;
    }
    if contains_phase(iv.lo - slack, iv.hi + slack, min_at) {
        lo = -1.0;
    }
    Interval::new(lo.max(-1.0), hi.min(1.0))
}

/// Does `[a, b]` contain `phase + 2k*pi` for some integer k?
fn contains_phase(a: f64, b: f64, phase: f64) -> bool {
    let two_pi = 2.0 * PI;
    let k_min = ((a - phase) / two_pi).ceil();
    let k_max = ((b - phase) / two_pi).floor();
    k_min <= k_max
}

/// Axis-aligned box in R^k: one interval per coordinate.
pub type IntervalBox = Vec<Interval>;

/// Euclidean distance between two axis-aligned boxes (0 when they meet).
pub fn box_distance(a: &[Interval], b: &[Interval]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut sum = 0.0;
    for (ia, ib) in a.iter().zip(b) {
        let gap = (ia.lo - ib.hi).max(ib.lo - ia.hi).max(0.0);
        sum += gap * gap;
    }
    sum.sqrt()
}

/// Euclidean distance from a point to a box (0 when inside).
pub fn point_box_distance(p: &[f64], b: &[Interval]) -> f64 {
    debug_assert_eq!(p.len(), b.len());
    let mut sum = 0.0;
    for (x, iv) in p.iter().zip(b) {
        let gap = iv.distance_to(*x);
        sum += gap * gap;
    }
    sum.sqrt()
}

/// Distance from the origin to a box (0 when the box contains the origin).
pub fn box_origin_distance(b: &[Interval]) -> f64 {
    let mut sum = 0.0;
    for iv in b {
        let gap = iv.distance_to(0.0);
        sum += gap * gap;
    }
    sum.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn add_encloses() {
        let a = Interval::new(0.0, 1.0);
        let r = a.add(&Interval::point(1.0));
        assert!(r.lo <= 1.0 && r.hi >= 2.0);
        assert!(r.width() < 1.0 + 1e-12);
    }

    #[test]
    fn square_rule_is_correlation_aware() {
        let a = Interval::new(-1.0, 2.0);
        let sq = a.square();
        assert_eq!(sq.lo, 0.0);
        assert!(sq.hi >= 4.0 && sq.hi < 4.0 + 1e-12);
        // The naive product rule would give [-2, 4].
        let naive = a.mul(&a);
        assert!(naive.lo <= -2.0 + 1e-12);
    }

    #[test]
    fn sin_pins_interior_extremum() {
        let r = Interval::new(0.0, 3.2).sin();
        assert_eq!(r.hi, 1.0);
        assert!(r.lo <= 0.0 && r.lo > -0.1);
    }

    #[test]
    fn sin_wide_interval_is_unit_range() {
        let r = Interval::new(0.0, 10.0).sin();
        assert_eq!(r.lo, -1.0);
        assert_eq!(r.hi, 1.0);
    }

    #[test]
    fn cos_pins_minimum() {
        let r = Interval::new(3.0, 3.3).cos();
        assert_eq!(r.lo, -1.0);
    }

    #[test]
    fn div_straddle_rejected() {
        let a = Interval::new(1.0, 2.0);
        assert!(a.div(&Interval::new(-1.0, 1.0)).is_err());
        let ok = a.div(&Interval::new(2.0, 4.0)).unwrap();
        assert!(ok.lo <= 0.25 && ok.hi >= 1.0);
    }

    #[test]
    fn sqrt_negative_rejected() {
        assert!(Interval::new(-1.0, 1.0).sqrt().is_err());
        let r = Interval::new(4.0, 9.0).sqrt().unwrap();
        assert!(r.lo <= 2.0 && r.hi >= 3.0);
    }

    #[test]
    fn box_distances() {
        let a = vec![Interval::new(0.0, 1.0)];
        let b = vec![Interval::new(2.0, 3.0)];
        assert_eq!(box_distance(&a, &b), 1.0);
        let c = vec![Interval::new(0.0, 1.0), Interval::new(0.0, 1.0)];
        let d = vec![Interval::new(2.0, 3.0), Interval::new(0.0, 1.0)];
        assert_eq!(box_distance(&c, &d), 1.0);
        let e = vec![Interval::new(0.0, 2.0)];
        let f = vec![Interval::new(1.0, 3.0)];
        assert_eq!(box_distance(&e, &f), 0.0);
    }
}
