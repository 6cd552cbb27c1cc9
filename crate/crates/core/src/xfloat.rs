//! Minimal binary floating point with a big-integer mantissa.
//!
//! Used where f64 (and double-double) cancellation is too severe, namely the
//! monomial-basis reconstruction of the polynomial linking the Heun operator to
//! the correlation matrix. Only the handful of operations needed there exist.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{Signed, ToPrimitive, Zero};

/// Mantissa precision in bits.
pub const PRECISION: u64 = 320;

/// The value `mant * 2^exp`, with `|mant| < 2^PRECISION` after every operation.
#[derive(Clone, PartialEq, Eq)]
pub struct XFloat {
    mant: BigInt,
    exp: i64,
}

impl fmt::Debug for XFloat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "XFloat({:e})", self.to_f64())
    }
}

impl XFloat {
    pub fn zero() -> Self {
        Self {
            mant: BigInt::zero(),
            exp: 0,
        }
    }

    fn normalized(mant: BigInt, exp: i64) -> Self {
        let bits = mant.bits();
        if bits <= PRECISION {
            return Self { mant, exp };
        }
        let shift = bits - PRECISION;
        let neg = mant.is_negative();
        let mut mag = mant.magnitude() >> (shift - 1);
        mag += 1u32;
        mag >>= 1;
        let mant = BigInt::from_biguint(if neg { Sign::Minus } else { Sign::Plus }, mag);
        Self {
            mant,
            exp: exp + shift as i64,
        }
    }

    pub fn from_int<T: Into<BigInt>>(v: T) -> Self {
        Self::normalized(v.into(), 0)
    }

    pub fn from_f64(v: f64) -> Self {
        if v == 0.0 || !v.is_finite() {
            return Self::zero();
        }
        let bits = v.to_bits();
        let sign = if bits >> 63 == 0 { 1i64 } else { -1 };
        let exponent = ((bits >> 52) & 0x7ff) as i64;
        let fraction = bits & 0x000f_ffff_ffff_ffff;
        let (m, e) = if exponent == 0 {
            (fraction, -1074)
        } else {
            (fraction | 0x0010_0000_0000_0000, exponent - 1075)
        };
        Self::normalized(BigInt::from(sign) * BigInt::from(m), e)
    }

    /// `num / den`, correctly rounded to the working precision.
    pub fn from_ratio(num: &BigInt, den: &BigUint) -> Self {
        assert!(!den.is_zero(), "zero denominator");
        if num.is_zero() {
            return Self::zero();
        }
        let shift = (PRECISION + 2 + den.bits()).saturating_sub(num.bits());
        let scaled: BigInt = num << shift;
        let q = scaled / BigInt::from(den.clone());
        Self::normalized(q, -(shift as i64))
    }

    pub fn is_zero(&self) -> bool {
        self.mant.is_zero()
    }

    pub fn signum(&self) -> i32 {
        match self.mant.sign() {
            Sign::Minus => -1,
            Sign::NoSign => 0,
            Sign::Plus => 1,
        }
    }

    pub fn abs(&self) -> Self {
        Self {
            mant: self.mant.abs(),
            exp: self.exp,
        }
    }

    /// Multiply by `2^k` exactly.
    pub fn ldexp(&self, k: i64) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        Self {
            mant: self.mant.clone(),
            exp: self.exp + k,
        }
    }

    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let bits = self.mant.bits();
        let shift = bits.saturating_sub(60);
        let top = (&self.mant >> shift).to_i64().unwrap() as f64;
        let e = self.exp + shift as i64;
        // split the scaling so that intermediate powers stay finite
        let half = e / 2;
        top * 2f64.powi(half as i32) * 2f64.powi((e - half) as i32)
    }

    pub fn div(&self, other: &Self) -> Self {
        assert!(!other.is_zero(), "division by zero");
        if self.is_zero() {
            return Self::zero();
        }
        let shift = PRECISION + 2 + other.mant.bits();
        let num: BigInt = &self.mant << shift;
        let q = num / &other.mant;
        Self::normalized(q, self.exp - other.exp - shift as i64)
    }

    pub fn sqrt(&self) -> Self {
        assert!(self.signum() >= 0, "square root of a negative value");
        if self.is_zero() {
            return Self::zero();
        }
        let mut shift = (2 * PRECISION + 2).saturating_sub(self.mant.bits()) as i64;
        if (self.exp - shift) % 2 != 0 {
            shift += 1;
        }
        let m = self.mant.magnitude() << (shift as u64);
        let r = m.sqrt();
        Self::normalized(BigInt::from(r), (self.exp - shift) / 2)
    }

    pub fn max_abs<'a, I: IntoIterator<Item = &'a XFloat>>(values: I) -> XFloat {
        let mut best = XFloat::zero();
        for v in values {
            if v.abs().cmp(&best) == Ordering::Greater {
                best = v.abs();
            }
        }
        best
    }
}

impl PartialOrd for XFloat {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for XFloat {
    fn cmp(&self, other: &Self) -> Ordering {
        (self - other).signum().cmp(&0)
    }
}

fn add_impl(a: &XFloat, b: &XFloat) -> XFloat {
    if a.is_zero() {
        return b.clone();
    }
    if b.is_zero() {
        return a.clone();
    }
    let (hi, lo) = if a.exp >= b.exp { (a, b) } else { (b, a) };
    let gap = (hi.exp - lo.exp) as u64;
    let hi_top = hi.exp + hi.mant.bits() as i64;
    let lo_top = lo.exp + lo.mant.bits() as i64;
    if hi_top - lo_top > (PRECISION + 8) as i64 {
        return hi.clone();
    }
    let mant: BigInt = (&hi.mant << gap) + &lo.mant;
    XFloat::normalized(mant, lo.exp)
}

impl<'a> Add<&'a XFloat> for &'a XFloat {
    type Output = XFloat;
    fn add(self, rhs: &'a XFloat) -> XFloat {
        add_impl(self, rhs)
    }
}

impl Add for XFloat {
    type Output = XFloat;
    fn add(self, rhs: XFloat) -> XFloat {
        add_impl(&self, &rhs)
    }
}

impl<'a> Sub<&'a XFloat> for &'a XFloat {
    type Output = XFloat;
    fn sub(self, rhs: &'a XFloat) -> XFloat {
        add_impl(self, &-rhs)
    }
}

impl Sub for XFloat {
    type Output = XFloat;
    fn sub(self, rhs: XFloat) -> XFloat {
        add_impl(&self, &-rhs)
    }
}

impl<'a> Mul<&'a XFloat> for &'a XFloat {
    type Output = XFloat;
    fn mul(self, rhs: &'a XFloat) -> XFloat {
        XFloat::normalized(&self.mant * &rhs.mant, self.exp + rhs.exp)
    }
}

impl Mul for XFloat {
    type Output = XFloat;
    fn mul(self, rhs: XFloat) -> XFloat {
        &self * &rhs
    }
}

impl Neg for &XFloat {
    type Output = XFloat;
    fn neg(self) -> XFloat {
        XFloat {
            mant: -&self.mant,
            exp: self.exp,
        }
    }
}

impl Neg for XFloat {
    type Output = XFloat;
    fn neg(self) -> XFloat {
        -&self
    }
}
