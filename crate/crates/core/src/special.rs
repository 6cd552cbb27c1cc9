//! Krawtchouk polynomials, binomials and binomial probabilities.
//!
//! Large counts are kept as exact big integers; anything weighted by a
//! probability goes through [`LogWeight`] so that terms like `C(120, 60)`
//! never overflow.

use std::cmp::Ordering;
use std::f64::consts::LN_2;

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::xfloat::XFloat;

/// Natural log of a nonnegative big integer (`-inf` for zero).
pub fn big_ln(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits == 0 {
        return f64::NEG_INFINITY;
    }
    if bits <= 64 {
        return (x.to_u64().unwrap() as f64).ln();
    }
    let shift = bits - 64;
    let top: BigUint = x >> shift;
    (top.to_u64().unwrap() as f64).ln() + shift as f64 * LN_2
}

/// Exact binomial coefficient with the total convention `C(n, k) = 0` outside `0..=n`.
pub fn binomial_exact(n: i64, k: i64) -> BigUint {
    if n < 0 || k < 0 || k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k) as u64;
    let n = n as u64;
    let mut acc = BigUint::one();
    for t in 0..k {
        acc *= n - t;
        acc /= t + 1;
    }
    acc
}

/// `log C(n, k)` for valid arguments, `-inf` otherwise.
pub fn ln_binomial(n: i64, k: i64) -> f64 {
    big_ln(&binomial_exact(n, k))
}

/// Table of `ln(n!)` for repeated log-binomial lookups.
#[derive(Debug, Clone)]
pub struct LnFactorials {
    table: Vec<f64>,
}

impl LnFactorials {
    pub fn new(nmax: usize) -> Self {
        let mut table = Vec::with_capacity(nmax + 1);
        let mut fact = BigUint::one();
        table.push(0.0);
        for k in 1..=nmax {
            fact *= k as u64;
            table.push(big_ln(&fact));
        }
        Self { table }
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    pub fn ln_factorial(&self, n: usize) -> f64 {
        self.table[n]
    }

    pub fn ln_binomial(&self, n: i64, k: i64) -> f64 {
        if n < 0 || k < 0 || k > n {
            return f64::NEG_INFINITY;
        }
        self.table[n as usize] - self.table[k as usize] - self.table[(n - k) as usize]
    }
}

/// A signed real stored as `sign * exp(ln_abs)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogWeight {
    pub ln_abs: f64,
    pub sign: i8,
}

impl LogWeight {
    pub const ZERO: LogWeight = LogWeight {
        ln_abs: f64::NEG_INFINITY,
        sign: 0,
    };
    pub const ONE: LogWeight = LogWeight {
        ln_abs: 0.0,
        sign: 1,
    };

    pub fn from_ln(ln_abs: f64) -> Self {
        Self { ln_abs, sign: 1 }
    }

    pub fn from_f64(x: f64) -> Self {
        match x.partial_cmp(&0.0) {
            Some(Ordering::Greater) => Self {
                ln_abs: x.ln(),
                sign: 1,
            },
            Some(Ordering::Less) => Self {
                ln_abs: (-x).ln(),
                sign: -1,
            },
            _ => Self::ZERO,
        }
    }

    pub fn from_biguint(x: &BigUint) -> Self {
        if x.is_zero() {
            Self::ZERO
        } else {
            Self::from_ln(big_ln(x))
        }
    }

    pub fn from_bigint(x: &BigInt) -> Self {
        match x.sign() {
            Sign::NoSign => Self::ZERO,
            Sign::Plus => Self::from_ln(big_ln(x.magnitude())),
            Sign::Minus => Self {
                ln_abs: big_ln(x.magnitude()),
                sign: -1,
            },
        }
    }

    pub fn is_zero(&self) -> bool {
        self.sign == 0
    }

    pub fn to_f64(self) -> f64 {
        if self.sign == 0 {
            0.0
        } else {
            f64::from(self.sign) * self.ln_abs.exp()
        }
    }

    pub fn scale_ln(self, ln_factor: f64) -> Self {
        if self.sign == 0 {
            return self;
        }
        Self {
            ln_abs: self.ln_abs + ln_factor,
            sign: self.sign,
        }
    }

    /// Signed log-sum-exp of many terms with compensated summation.
    pub fn sum<I: IntoIterator<Item = LogWeight>>(terms: I) -> Self {
        let terms: Vec<LogWeight> = terms.into_iter().filter(|t| t.sign != 0).collect();
        let Some(max) = terms
            .iter()
            .map(|t| t.ln_abs)
            .max_by(|a, b| a.total_cmp(b))
        else {
            return Self::ZERO;
        };
        let total = neumaier_sum(
            terms
                .iter()
                .map(|t| f64::from(t.sign) * (t.ln_abs - max).exp()),
        );
        Self::from_f64(total).scale_ln(max)
    }
}

impl std::ops::Neg for LogWeight {
    type Output = Self;

    fn neg(self) -> Self {
        Self {
            ln_abs: self.ln_abs,
            sign: -self.sign,
        }
    }
}

impl std::ops::Mul for LogWeight {
    type Output = Self;

    fn mul(self, other: Self) -> Self {
        if self.sign == 0 || other.sign == 0 {
            return Self::ZERO;
        }
        Self {
            ln_abs: self.ln_abs + other.ln_abs,
            sign: self.sign * other.sign,
        }
    }
}

/// Compensated (Neumaier) summation.
pub fn neumaier_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

fn check_prob(p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("probability p = {p} must lie in (0, 1)")))
    }
}

/// Krawtchouk polynomial `K_i(x; p, N)` by the three-term recurrence in the degree,
/// `p(N-k) K_{k+1} = [p(N-k) + k(1-p) - x] K_k - k(1-p) K_{k-1}`.
///
/// The recurrence is carried in extended precision: in f64 it loses several
/// digits where the polynomial is small compared to its neighbours.
pub fn krawtchouk(i: u32, x: f64, p: f64, n: u32) -> Result<f64> {
    check_prob(p)?;
    if i > n {
        return Err(Error::Domain(format!("degree {i} exceeds N = {n}")));
    }
    if i == 0 {
        return Ok(1.0);
    }
    let (xx, pp) = (XFloat::from_f64(x), XFloat::from_f64(p));
    let qq = &XFloat::from_int(1) - &pp;
    let mut prev = XFloat::from_int(1);
    let pn = &pp * &XFloat::from_int(n);
    let mut cur = (&pn - &xx).div(&pn);
    for k in 1..i {
        let kk = XFloat::from_int(k);
        let a = &pp * &XFloat::from_int(n - k);
        let kq = &kk * &qq;
        let lead = &(&a + &kq) - &xx;
        let next = (&(&lead * &cur) - &(&kq * &prev)).div(&a);
        prev = cur;
        cur = next;
    }
    Ok(cur.to_f64())
}

/// Terminating hypergeometric series for `K_i(x; p, N)`, valid for any real `p != 0`
/// and real `N` as long as `(-N)_j` does not vanish before the series ends.
///
/// The alternating sum is accumulated in extended precision, so the result is
/// accurate even where the terms cancel heavily.
pub fn krawtchouk_series(i: u32, x: f64, p: f64, n: f64) -> Result<f64> {
    if p == 0.0 {
        return Err(Error::Domain("p = 0 in Krawtchouk series".into()));
    }
    let (xx, pp, nn) = (XFloat::from_f64(x), XFloat::from_f64(p), XFloat::from_f64(n));
    let mut term = XFloat::from_int(1);
    let mut total = term.clone();
    for j in 0..i {
        let jj = XFloat::from_int(j);
        let denom = &(&(&jj - &nn) * &XFloat::from_int(j + 1)) * &pp;
        if denom.is_zero() {
            return Err(Error::Domain(format!(
                "Krawtchouk series with N = {n} divides by zero at term {}",
                j + 1
            )));
        }
        let numer = &XFloat::from_int(i64::from(j) - i64::from(i)) * &(&jj - &xx);
        term = (&term * &numer).div(&denom);
        total = &total + &term;
    }
    Ok(total.to_f64())
}

/// Integer Krawtchouk values `K̂_a(x) = C(N,a) (q-1)^a K_a(x; (q-1)/q, N)` for
/// `a = 0..=amax`, computed exactly by
/// `(a+1) K̂_{a+1} = [a + (q-1)(N-a) - q x] K̂_a - (q-1)(N-a+1) K̂_{a-1}`.
pub fn krawtchouk_integer_column(n: u32, x: u32, q: u32, amax: u32) -> Vec<BigInt> {
    let (n, x, q) = (i64::from(n), i64::from(x), i64::from(q));
    let mut out = Vec::with_capacity(amax as usize + 1);
    out.push(BigInt::one());
    if amax == 0 {
        return out;
    }
    out.push(BigInt::from((q - 1) * n - q * x));
    for a in 1..i64::from(amax) {
        let lead = a + (q - 1) * (n - a) - q * x;
        let back = (q - 1) * (n - a + 1);
        let next = (&out[a as usize] * lead - &out[a as usize - 1] * back) / (a + 1);
        out.push(next);
    }
    out
}

/// Direct alternating sum for `K̂_a(x)`; used as a cross-check of the recurrence.
pub fn krawtchouk_integer(a: u32, x: u32, n: u32, q: u32) -> BigInt {
    let mut acc = BigInt::zero();
    let qm1 = BigInt::from(q - 1);
    for h in 0..=a {
        let t = BigInt::from(binomial_exact(i64::from(x), i64::from(h)))
            * BigInt::from(binomial_exact(i64::from(n) - i64::from(x), i64::from(a - h)))
            * num_traits::pow(qm1.clone(), (a - h) as usize);
        if h % 2 == 0 {
            acc += t;
        } else {
            acc -= t;
        }
    }
    acc
}

/// Binomial probability mass `C(n,k) p^k (1-p)^(n-k)`.
pub fn binomial_pmf(k: i64, n: u64, p: f64) -> f64 {
    if k < 0 || k as u64 > n {
        return 0.0;
    }
    let nk = n as i64 - k;
    let mut ln = ln_binomial(n as i64, k);
    if k > 0 {
        ln += k as f64 * p.ln();
    }
    if nk > 0 {
        ln += nk as f64 * (-p).ln_1p();
    }
    ln.exp()
}

/// Cumulative binomial distribution `F(i; n, p)`, clamped to exactly 0 and 1 at the ends.
pub fn cumulative_binomial(i: i64, n: u64, p: f64) -> Result<f64> {
    check_prob(p)?;
    if i < 0 {
        return Ok(0.0);
    }
    if i as u64 >= n {
        return Ok(1.0);
    }
    let s = neumaier_sum((0..=i).map(|k| binomial_pmf(k, n, p)));
    Ok(s.clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn krawtchouk_small_cases() {
        assert_eq!(krawtchouk(0, 7.0, 0.3, 10).unwrap(), 1.0);
        assert!((krawtchouk(1, 3.0, 0.5, 3).unwrap() + 1.0).abs() < 1e-15);
        assert!((krawtchouk(3, 3.0, 0.5, 3).unwrap() + 1.0).abs() < 1e-14);
        assert!(krawtchouk(4, 1.0, 0.5, 3).is_err());
        assert!(krawtchouk(1, 1.0, 1.0, 3).is_err());
    }

    #[test]
    fn series_matches_recurrence() {
        for n in 1..=40u32 {
            for i in 0..=n {
                for &x in &[0.0, 0.7, f64::from(n) / 3.0, f64::from(n)] {
                    for &p in &[0.5, 0.3, 0.75] {
                        let a = krawtchouk(i, x, p, n).unwrap();
                        let b = krawtchouk_series(i, x, p, f64::from(n)).unwrap();
                        assert!((a - b).abs() <= 1e-10 * b.abs().max(1.0), "{i} {x} {p} {n}: {a} {b}");
                    }
                }
            }
        }
    }

    #[test]
    fn recurrence_matches_integer_values() {
        for q in 2..=4u32 {
            let p = f64::from(q - 1) / f64::from(q);
            for n in 1..=40u32 {
                for x in 0..=n {
                    let col = krawtchouk_integer_column(n, x, q, n);
                    for i in 0..=n {
                        let scale = BigInt::from(binomial_exact(i64::from(n), i64::from(i)))
                            * num_traits::pow(BigInt::from(q - 1), i as usize);
                        let exact = XFloat::from_ratio(&col[i as usize], scale.magnitude()).to_f64();
                        let a = krawtchouk(i, f64::from(x), p, n).unwrap();
                        assert!((a - exact).abs() <= 1e-12 * exact.abs().max(1.0), "{q} {n} {x} {i}: {a} {exact}");
                    }
                }
            }
        }
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial_exact(5, 2), BigUint::from(10u32));
        assert_eq!(binomial_exact(3, 5), BigUint::zero());
        assert_eq!(binomial_exact(3, -1), BigUint::zero());
        let c = binomial_exact(120, 60);
        assert_eq!(c.bits(), 117);
        assert!((big_ln(&c) - 80.556041133935).abs() < 1e-9);
        let t = LnFactorials::new(200);
        assert!((t.ln_binomial(120, 60) - big_ln(&c)).abs() < 1e-11);
    }

    #[test]
    fn cumulative_binomial_cases() {
        assert_eq!(cumulative_binomial(4, 4, 0.37).unwrap(), 1.0);
        assert!((cumulative_binomial(1, 2, 0.5).unwrap() - 0.75).abs() < 1e-15);
        assert!((cumulative_binomial(0, 1, 0.5).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(cumulative_binomial(-1, 3, 0.5).unwrap(), 0.0);
    }

    #[test]
    fn integer_krawtchouk_recurrence_matches_sum() {
        for q in 2..=5u32 {
            for n in 0..=12u32 {
                for x in 0..=n {
                    let col = krawtchouk_integer_column(n, x, q, n);
                    for a in 0..=n {
                        assert_eq!(col[a as usize], krawtchouk_integer(a, x, n, q));
                    }
                }
            }
        }
    }

    #[test]
    fn log_weight_sums() {
        let s = LogWeight::sum([
            LogWeight::from_f64(3.0),
            LogWeight::from_f64(-1.0),
            LogWeight::from_f64(0.5),
        ]);
        assert!((s.to_f64() - 2.5).abs() < 1e-15);
        assert!(LogWeight::sum([LogWeight::from_f64(2.0), LogWeight::from_f64(-2.0)]).is_zero());
        let big = LogWeight::from_biguint(&binomial_exact(400, 200));
        assert!(big.ln_abs > 270.0 && big.sign == 1);
    }
}
