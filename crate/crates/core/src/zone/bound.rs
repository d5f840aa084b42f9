use std::cmp::Ordering;
use std::fmt;
use std::ops::Add;

/// Upper bound `(value, <)` or `(value, <=)` on a clock difference, or `+inf`.
///
/// Packed as `2 * value + 1` for non-strict and `2 * value` for strict
/// bounds, so the derived integer order is the bound order. `+inf` is the
/// sentinel `i64::MAX` and is never produced by arithmetic.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Bound(i64);

/// Largest magnitude a finite bound value may take.
pub const MAX_VALUE: i64 = 1 << 60;

impl Bound {
    pub const INFINITY: Bound = Bound(i64::MAX);
    pub const LE_ZERO: Bound = Bound(1);
    pub const LT_ZERO: Bound = Bound(0);

    pub fn new(value: i64, strict: bool) -> Bound {
        assert!(value.abs() <= MAX_VALUE, "bound value {value} out of range");
        Bound(value * 2 + i64::from(!strict))
    }

    pub fn le(value: i64) -> Bound {
        Bound::new(value, false)
    }

    pub fn lt(value: i64) -> Bound {
        Bound::new(value, true)
    }

    pub fn is_infinite(self) -> bool {
        self == Bound::INFINITY
    }

    /// `None` for `+inf`.
    pub fn value(self) -> Option<i64> {
        (!self.is_infinite()).then_some(self.0 >> 1)
    }

    pub fn is_strict(self) -> bool {
        !self.is_infinite() && self.0 & 1 == 0
    }
}

impl Add for Bound {
    type Output = Bound;

    /// `(a, ~a) + (b, ~b) = (a + b, strict iff either is strict)`.
    fn add(self, other: Bound) -> Bound {
        if self.is_infinite() || other.is_infinite() {
            return Bound::INFINITY;
        }
        let sum = (self.0 & !1)
            .checked_add(other.0 & !1)
            .filter(|s| (s >> 1).abs() <= MAX_VALUE)
            .expect("bound arithmetic overflow");
        Bound(sum | (self.0 & other.0 & 1))
    }
}

impl PartialOrd for Bound {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Bound {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.cmp(&other.0)
    }
}

impl fmt::Debug for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.value() {
            None => write!(f, "<inf"),
            Some(v) if self.is_strict() => write!(f, "<{v}"),
            Some(v) => write!(f, "<={v}"),
        }
    }
}
