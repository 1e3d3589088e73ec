use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::DslError;

/// Exact rational of the form `numerator / 2^exponent`.
///
/// Always stored canonically: the numerator is odd, or the exponent is zero.
/// Integers (including powers of two above one) are therefore stored with
/// exponent zero.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct DyadicRational {
    num: i128,
    exp: u32,
}

impl DyadicRational {
    pub const ZERO: DyadicRational = DyadicRational { num: 0, exp: 0 };
    pub const ONE: DyadicRational = DyadicRational { num: 1, exp: 0 };

    pub fn new(num: i128, exp: u32) -> Self {
        if num == 0 {
            return Self::ZERO;
        }
        let tz = num.trailing_zeros().min(exp);
        DyadicRational {
            num: num >> tz,
            exp: exp - tz,
        }
    }

    pub fn from_int(n: i64) -> Self {
        Self::new(n as i128, 0)
    }

    /// `2^e` for any integer `e`.
    pub fn pow2(e: i32) -> Self {
        if e >= 0 {
            DyadicRational {
                num: 1i128 << e,
                exp: 0,
            }
        } else {
            DyadicRational {
                num: 1,
                exp: (-e) as u32,
            }
        }
    }

    pub fn numerator(&self) -> i128 {
        self.num
    }

    pub fn exponent(&self) -> u32 {
        self.exp
    }

    pub fn is_zero(&self) -> bool {
        self.num == 0
    }

    pub fn is_negative(&self) -> bool {
        self.num < 0
    }

    /// `log2` of the value when it is an exact power of two.
    pub fn log2_exact(&self) -> Option<i32> {
        if self.num <= 0 || self.num.count_ones() != 1 {
            return None;
        }
        Some(self.num.trailing_zeros() as i32 - self.exp as i32)
    }

    /// `floor(self * 2^level)`, the index of the level-`level` dyadic
    /// interval containing this value.
    pub fn floor_at(&self, level: i32) -> i64 {
        let shift = level as i64 - self.exp as i64;
        let v = if shift >= 0 {
            self.num << shift
        } else if -shift >= 127 {
            if self.num < 0 {
                -1
            } else {
                0
            }
        } else {
            self.num >> (-shift)
        };
        v as i64
    }

    pub fn to_f64(&self) -> f64 {
        self.num as f64 / 2f64.powi(self.exp as i32)
    }

    pub fn abs(&self) -> Self {
        DyadicRational {
            num: self.num.abs(),
            exp: self.exp,
        }
    }

    pub fn max(self, other: Self) -> Self {
        if self >= other {
            self
        } else {
            other
        }
    }

    pub fn min(self, other: Self) -> Self {
        if self <= other {
            self
        } else {
            other
        }
    }

    fn aligned(a: Self, b: Self) -> (i128, i128, u32) {
        let e = a.exp.max(b.exp);
        (a.num << (e - a.exp), b.num << (e - b.exp), e)
    }
}

impl Default for DyadicRational {
    fn default() -> Self {
        Self::ZERO
    }
}

impl Ord for DyadicRational {
    fn cmp(&self, other: &Self) -> Ordering {
        let (a, b, _) = Self::aligned(*self, *other);
        a.cmp(&b)
    }
}

impl PartialOrd for DyadicRational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Add for DyadicRational {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let (a, b, e) = Self::aligned(self, rhs);
        Self::new(a + b, e)
    }
}

impl Sub for DyadicRational {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        let (a, b, e) = Self::aligned(self, rhs);
        Self::new(a - b, e)
    }
}

impl Mul for DyadicRational {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        Self::new(self.num * rhs.num, self.exp + rhs.exp)
    }
}

impl Neg for DyadicRational {
    type Output = Self;
    fn neg(self) -> Self {
        DyadicRational {
            num: -self.num,
            exp: self.exp,
        }
    }
}

impl std::iter::Sum for DyadicRational {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::ZERO, |a, b| a + b)
    }
}

impl fmt::Display for DyadicRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/2^{}", self.num, self.exp)
    }
}

impl fmt::Debug for DyadicRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for DyadicRational {
    type Err = DslError;

    /// Accepts `num/2^exp` or a bare integer.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || DslError::Parse(format!("bad dyadic rational `{s}`"));
        let s = s.trim();
        match s.split_once("/2^") {
            Some((n, e)) => {
                let num: i128 = n.parse().map_err(|_| bad())?;
                let exp: u32 = e.parse().map_err(|_| bad())?;
                Ok(Self::new(num, exp))
            }
            None => Ok(Self::new(s.parse().map_err(|_| bad())?, 0)),
        }
    }
}

impl TryFrom<String> for DyadicRational {
    type Error = DslError;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<DyadicRational> for String {
    fn from(d: DyadicRational) -> String {
        d.to_string()
    }
}
