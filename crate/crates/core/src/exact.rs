//! Exact arithmetic in ℚ[√2].

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// The number `u + v·√2` with rational `u`, `v`.
///
/// Every outcome probability of a state with algebraic amplitudes lies in
/// this field, so probabilities and normalization factors are carried here
/// exactly.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ExactProb {
    u: BigRational,
    v: BigRational,
}

impl ExactProb {
    pub fn new(u: BigRational, v: BigRational) -> Self {
        Self { u, v }
    }

    pub fn zero() -> Self {
        Self::new(BigRational::zero(), BigRational::zero())
    }

    pub fn one() -> Self {
        Self::from_integer(BigInt::one())
    }

    pub fn from_integer(u: BigInt) -> Self {
        Self::new(BigRational::from_integer(u), BigRational::zero())
    }

    /// `(u + v·√2) / 2^shift` for integers `u`, `v`.
    pub fn from_scaled(u: BigInt, v: BigInt, shift: i64) -> Self {
        Self::new(BigRational::from_integer(u), BigRational::from_integer(v)).scale_pow2(-shift)
    }

    pub fn ratio(num: i64, den: i64) -> Self {
        Self::new(
            BigRational::new(num.into(), den.into()),
            BigRational::zero(),
        )
    }

    pub fn rational_part(&self) -> &BigRational {
        &self.u
    }

    pub fn sqrt2_part(&self) -> &BigRational {
        &self.v
    }

    pub fn is_zero(&self) -> bool {
        self.u.is_zero() && self.v.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.u.is_one() && self.v.is_zero()
    }

    /// Multiplies by `2^e`.
    pub fn scale_pow2(&self, e: i64) -> Self {
        if e == 0 {
            return self.clone();
        }
        let factor = if e > 0 {
            BigRational::from_integer(BigInt::one() << e as usize)
        } else {
            BigRational::new(BigInt::one(), BigInt::one() << (-e) as usize)
        };
        Self::new(&self.u * &factor, &self.v * &factor)
    }

    /// Sign of `u + v·√2`.
    pub fn signum(&self) -> Ordering {
        let su = self.u.cmp(&BigRational::zero());
        let sv = self.v.cmp(&BigRational::zero());
        match (su, sv) {
            (a, Ordering::Equal) => a,
            (Ordering::Equal, b) => b,
            (a, b) if a == b => a,
            (a, _) => {
                // opposite signs: compare u² against 2v²
                let u2 = &self.u * &self.u;
                let v2 = &self.v * &self.v * BigRational::from_integer(2.into());
                match a {
                    Ordering::Greater => u2.cmp(&v2),
                    _ => v2.cmp(&u2),
                }
            }
        }
    }

    /// Multiplicative inverse via the conjugate `u − v·√2`; `None` for zero.
    pub fn recip(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let norm = &self.u * &self.u - &self.v * &self.v * BigRational::from_integer(2.into());
        Some(Self::new(&self.u / &norm, -&self.v / &norm))
    }

    /// `⌊self · 2^bits⌋`, computed exactly.
    pub fn floor_scaled(&self, bits: u32) -> BigInt {
        let scale = BigInt::one() << bits as usize;
        let den = self.u.denom().lcm(self.v.denom());
        let p = self.u.numer() * (&den / self.u.denom()) * &scale;
        let q = self.v.numer() * (&den / self.v.denom()) * &scale;
        // ⌊q√2⌋ from the integer square root of 2q²
        let r = (&q * &q * 2u32).sqrt();
        let floor_q_sqrt2 = match q.sign() {
            Sign::Minus => -r - 1,
            _ => r,
        };
        (p + floor_q_sqrt2).div_floor(&den)
    }

    /// `⌈self · 2^bits⌉`, computed exactly.
    pub fn ceil_scaled(&self, bits: u32) -> BigInt {
        let f = self.floor_scaled(bits);
        let back = ExactProb::from_integer(f.clone()).scale_pow2(-(bits as i64));
        if back == *self {
            f
        } else {
            f + 1
        }
    }

    /// Nearest binary64 value (up to rounding of the final operations).
    pub fn to_f64(&self) -> f64 {
        let u = self.u.to_f64().unwrap_or(f64::NAN);
        let v = self.v.to_f64().unwrap_or(f64::NAN);
        let same_sign = (u >= 0.0) == (v >= 0.0) || u == 0.0 || v == 0.0;
        if same_sign {
            u + v * std::f64::consts::SQRT_2
        } else {
            // avoid cancellation: u + v√2 = (u² − 2v²) / (u − v√2)
            let norm = &self.u * &self.u - &self.v * &self.v * BigRational::from_integer(2.into());
            norm.to_f64().unwrap_or(f64::NAN) / (u - v * std::f64::consts::SQRT_2)
        }
    }

    /// `"u/den + v/den*sqrt2"` over a common positive denominator.
    pub fn to_exact_string(&self) -> String {
        let den = self.u.denom().lcm(self.v.denom());
        let un = self.u.numer() * (&den / self.u.denom());
        let vn = self.v.numer() * (&den / self.v.denom());
        format!("{un}/{den} + {vn}/{den}*sqrt2")
    }
}

impl fmt::Display for ExactProb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.v.is_zero() {
            write!(f, "{}", self.u)
        } else if self.u.is_zero() {
            write!(f, "{}*sqrt2", self.v)
        } else if self.v.is_negative() {
            write!(f, "{} - {}*sqrt2", self.u, -&self.v)
        } else {
            write!(f, "{} + {}*sqrt2", self.u, self.v)
        }
    }
}

impl PartialOrd for ExactProb {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExactProb {
    fn cmp(&self, other: &Self) -> Ordering {
        (self - other).signum()
    }
}

impl Add for &ExactProb {
    type Output = ExactProb;
    fn add(self, rhs: &ExactProb) -> ExactProb {
        ExactProb::new(&self.u + &rhs.u, &self.v + &rhs.v)
    }
}

impl Sub for &ExactProb {
    type Output = ExactProb;
    fn sub(self, rhs: &ExactProb) -> ExactProb {
        ExactProb::new(&self.u - &rhs.u, &self.v - &rhs.v)
    }
}

impl Mul for &ExactProb {
    type Output = ExactProb;
    fn mul(self, rhs: &ExactProb) -> ExactProb {
        let two = BigRational::from_integer(2.into());
        ExactProb::new(
            &self.u * &rhs.u + &self.v * &rhs.v * two,
            &self.u * &rhs.v + &self.v * &rhs.u,
        )
    }
}

impl Div for &ExactProb {
    type Output = ExactProb;
    /// Panics on division by zero.
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: &ExactProb) -> ExactProb {
        self * &rhs.recip().expect("division by zero in ℚ[√2]")
    }
}

impl Neg for &ExactProb {
    type Output = ExactProb;
    fn neg(self) -> ExactProb {
        ExactProb::new(-&self.u, -&self.v)
    }
}

macro_rules! forward_owned {
    ($($tr:ident $m:ident),*) => {$(
        impl $tr for ExactProb {
            type Output = ExactProb;
            fn $m(self, rhs: ExactProb) -> ExactProb {
                (&self).$m(&rhs)
            }
        }
    )*};
}
forward_owned!(Add add, Sub sub, Mul mul, Div div);

impl std::iter::Sum for ExactProb {
    fn sum<I: Iterator<Item = ExactProb>>(iter: I) -> Self {
        iter.fold(ExactProb::zero(), |acc, x| &acc + &x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(u: (i64, i64), v: (i64, i64)) -> ExactProb {
        ExactProb::new(
            BigRational::new(u.0.into(), u.1.into()),
            BigRational::new(v.0.into(), v.1.into()),
        )
    }

    #[test]
    fn field_operations() {
        let x = p((3, 2), (-1, 3));
        let y = p((1, 5), (2, 1));
        assert_eq!(&(&x * &y) / &y, x);
        assert_eq!(&(&x + &y) - &y, x);
        assert_eq!(&x * &x.recip().unwrap(), ExactProb::one());
        assert!(ExactProb::zero().recip().is_none());
    }

    #[test]
    fn sign_of_mixed_terms() {
        // 3 − 2√2 ≈ 0.17 > 0, 1 − √2 < 0, −3 + 2√2 < 0
        assert_eq!(p((3, 1), (-2, 1)).signum(), Ordering::Greater);
        assert_eq!(p((1, 1), (-1, 1)).signum(), Ordering::Less);
        assert_eq!(p((-3, 1), (2, 1)).signum(), Ordering::Less);
        assert_eq!(p((-1, 1), (1, 1)).signum(), Ordering::Greater);
        assert_eq!(ExactProb::zero().signum(), Ordering::Equal);
        assert!(p((1, 2), (0, 1)) < p((0, 1), (1, 2)));
    }

    #[test]
    fn float_view_handles_cancellation() {
        // 99 − 70√2 ≈ 0.00505 suffers catastrophic cancellation naively
        let x = p((99, 1), (-70, 1));
        let exact = 1.0 / (99.0 + 70.0 * std::f64::consts::SQRT_2);
        assert!((x.to_f64() - exact).abs() < 1e-15 * exact.abs());
        assert_eq!(p((1, 2), (0, 1)).to_f64(), 0.5);
    }

    #[test]
    fn floor_and_ceil_scaled() {
        let sqrt2_half = p((0, 1), (1, 2)); // ≈ 0.7071
        assert_eq!(sqrt2_half.floor_scaled(4), BigInt::from(11)); // 11.31
        assert_eq!(sqrt2_half.ceil_scaled(4), BigInt::from(12));
        let neg = p((0, 1), (-1, 2));
        assert_eq!(neg.floor_scaled(4), BigInt::from(-12));
        let half = p((1, 2), (0, 1));
        assert_eq!(half.floor_scaled(1), BigInt::from(1));
        assert_eq!(half.ceil_scaled(1), BigInt::from(1));
        assert_eq!(half.ceil_scaled(0), BigInt::from(1));
        assert_eq!(half.floor_scaled(0), BigInt::from(0));
    }

    #[test]
    fn exact_string_uses_common_denominator() {
        assert_eq!(p((1, 2), (0, 1)).to_exact_string(), "1/2 + 0/2*sqrt2");
        assert_eq!(p((1, 4), (-1, 6)).to_exact_string(), "3/12 + -2/12*sqrt2");
    }
}
