//! Exact amplitudes `(a·ω³ + b·ω² + c·ω + d) / √2^k`, `ω = e^{iπ/4}`.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};

use crate::exact::ExactProb;

/// Coefficients of an element of ℤ[ω] in the basis (ω³, ω², ω, 1).
pub type Coeffs = [BigInt; 4];

pub fn zero_coeffs() -> Coeffs {
    [
        BigInt::zero(),
        BigInt::zero(),
        BigInt::zero(),
        BigInt::zero(),
    ]
}

pub fn add_coeffs(x: &Coeffs, y: &Coeffs) -> Coeffs {
    [&x[0] + &y[0], &x[1] + &y[1], &x[2] + &y[2], &x[3] + &y[3]]
}

pub fn sub_coeffs(x: &Coeffs, y: &Coeffs) -> Coeffs {
    [&x[0] - &y[0], &x[1] - &y[1], &x[2] - &y[2], &x[3] - &y[3]]
}

pub fn neg_coeffs(x: &Coeffs) -> Coeffs {
    [-&x[0], -&x[1], -&x[2], -&x[3]]
}

/// Multiplication by ω: `(a, b, c, d) → (b, c, d, −a)` since ω⁴ = −1.
pub fn mul_omega(x: &Coeffs) -> Coeffs {
    [x[1].clone(), x[2].clone(), x[3].clone(), -&x[0]]
}

/// Multiplication by `i = ω²`.
pub fn mul_i(x: &Coeffs) -> Coeffs {
    [x[2].clone(), x[3].clone(), -&x[0], -&x[1]]
}

/// Multiplication by `√2 = ω − ω³`:
/// `(a, b, c, d) → (b − d, a + c, b + d, c − a)`.
pub fn mul_sqrt2(x: &Coeffs) -> Coeffs {
    let [a, b, c, d] = x;
    [b - d, a + c, b + d, c - a]
}

/// An exact complex amplitude.
///
/// Structural equality (`==`) compares the tuple including `k`; use
/// [`AlgebraicAmplitude::value_eq`] to compare the complex values.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AlgebraicAmplitude {
    pub a: BigInt,
    pub b: BigInt,
    pub c: BigInt,
    pub d: BigInt,
    pub k: i64,
}

impl AlgebraicAmplitude {
    pub fn new(a: BigInt, b: BigInt, c: BigInt, d: BigInt, k: i64) -> Self {
        Self { a, b, c, d, k }
    }

    pub fn from_ints(a: i64, b: i64, c: i64, d: i64, k: i64) -> Self {
        Self::new(a.into(), b.into(), c.into(), d.into(), k)
    }

    pub fn from_coeffs(coeffs: Coeffs, k: i64) -> Self {
        let [a, b, c, d] = coeffs;
        Self { a, b, c, d, k }
    }

    pub fn zero(k: i64) -> Self {
        Self::from_coeffs(zero_coeffs(), k)
    }

    pub fn coeffs(&self) -> Coeffs {
        [
            self.a.clone(),
            self.b.clone(),
            self.c.clone(),
            self.d.clone(),
        ]
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero() && self.c.is_zero() && self.d.is_zero()
    }

    /// Same value expressed with exponent `k` (which must not be below `self.k`).
    ///
    /// Each unit of `k` multiplies the tuple by √2.
    pub fn with_k(&self, k: i64) -> Self {
        assert!(k >= self.k, "cannot lower k from {} to {k}", self.k);
        let mut coeffs = self.coeffs();
        let mut diff = k - self.k;
        while diff >= 2 {
            for x in coeffs.iter_mut() {
                *x <<= 1;
            }
            diff -= 2;
        }
        if diff == 1 {
            coeffs = mul_sqrt2(&coeffs);
        }
        Self::from_coeffs(coeffs, k)
    }

    /// Exact equality of the denoted complex numbers.
    pub fn value_eq(&self, other: &Self) -> bool {
        let k = self.k.max(other.k);
        self.with_k(k).coeffs() == other.with_k(k).coeffs()
    }

    /// Binary64 view `(re, im)`; output only.
    pub fn to_complex(&self) -> (f64, f64) {
        let bits = [&self.a, &self.b, &self.c, &self.d]
            .iter()
            .map(|x| x.bits())
            .max()
            .unwrap_or(0);
        let shift = bits.saturating_sub(60) as i64;
        let f = |x: &BigInt| (x >> shift as usize).to_f64().unwrap_or(0.0);
        let (a, b, c, d) = (f(&self.a), f(&self.b), f(&self.c), f(&self.d));
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let re = d + (c - a) * h;
        let im = b + (c + a) * h;
        // remaining scale 2^shift / √2^k
        let scale = 2f64.powf(shift as f64 - self.k as f64 / 2.0);
        (re * scale, im * scale)
    }

    /// `|α|²` as `[(a²+b²+c²+d²) + √2·(ab+bc+cd−ad)] / 2^k`.
    pub fn abs2_exact(&self) -> ExactProb {
        let (u, v) = self.abs2_numerators();
        ExactProb::from_scaled(u, v, self.k)
    }

    /// The integer pair `(u, v)` with `|α|² = (u + v√2) / 2^k`.
    pub fn abs2_numerators(&self) -> (BigInt, BigInt) {
        let (a, b, c, d) = (&self.a, &self.b, &self.c, &self.d);
        let u = a * a + b * b + c * c + d * d;
        let v = a * b + b * c + c * d - a * d;
        (u, v)
    }
}

impl fmt::Display for AlgebraicAmplitude {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {} {} {}", self.a, self.b, self.c, self.d, self.k)
    }
}

/// Helper for two's-complement reassembly of bit-sliced integers.
pub(crate) fn from_twos_complement(bits: impl Iterator<Item = bool>, width: usize) -> BigInt {
    let mut value = BigInt::zero();
    let mut sign = false;
    for (i, bit) in bits.enumerate() {
        if bit {
            value.set_bit(i as u64, true);
        }
        if i + 1 == width {
            sign = bit;
        }
    }
    if sign {
        value - (BigInt::from(1) << width)
    } else {
        value
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// ω-arithmetic through binary64 complex numbers.
    fn complex_of(c: &Coeffs) -> (f64, f64) {
        AlgebraicAmplitude::from_coeffs(c.clone(), 0).to_complex()
    }

    fn close(x: (f64, f64), y: (f64, f64)) -> bool {
        let tol = 1e-12 * (1.0 + x.0.abs() + x.1.abs());
        (x.0 - y.0).abs() < tol && (x.1 - y.1).abs() < tol
    }

    #[test]
    fn complex_view_examples() {
        assert_eq!(
            AlgebraicAmplitude::from_ints(0, 0, 0, 1, 0).to_complex(),
            (1.0, 0.0)
        );
        assert_eq!(
            AlgebraicAmplitude::from_ints(0, 1, 0, 0, 0).to_complex(),
            (0.0, 1.0)
        );
        let (re, im) = AlgebraicAmplitude::from_ints(0, 0, 1, 0, 0).to_complex();
        assert!((re - 0.5f64.sqrt()).abs() < 1e-15 && (im - 0.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn abs2_examples() {
        assert_eq!(
            AlgebraicAmplitude::from_ints(0, 0, 1, 0, 0).abs2_exact(),
            ExactProb::one()
        );
        // |1 + ω|² = 2 + 2cos(π/4) = 2 + √2
        let one_plus_omega = AlgebraicAmplitude::from_ints(0, 0, 1, 1, 0).abs2_exact();
        assert_eq!(
            one_plus_omega,
            ExactProb::from_scaled(2.into(), 1.into(), 0)
        );
        assert_eq!(
            AlgebraicAmplitude::from_ints(0, 0, 0, 1, 1).abs2_exact(),
            ExactProb::ratio(1, 2)
        );
    }

    #[test]
    fn k_shift_examples() {
        // H;H on |0⟩ leaves (0,0,0,2) with k = 2, which is 1
        let two = AlgebraicAmplitude::from_ints(0, 0, 0, 2, 2);
        assert!(two.value_eq(&AlgebraicAmplitude::from_ints(0, 0, 0, 1, 0)));
        // 1/√2 expressed with k = 2 is (√2)/2 = (−1, 0, 1, 0)/2
        let h = AlgebraicAmplitude::from_ints(0, 0, 0, 1, 1).with_k(2);
        assert_eq!(h, AlgebraicAmplitude::from_ints(-1, 0, 1, 0, 2));
        assert!(!two.value_eq(&h));
    }

    #[test]
    fn twos_complement_helpers() {
        let bits = |v: i64, w: usize| (0..w).map(move |i| v >> i & 1 == 1);
        for v in -8..8i64 {
            assert_eq!(from_twos_complement(bits(v, 4), 4), BigInt::from(v));
        }
    }

    proptest! {
        #[test]
        fn ring_ops_match_complex_arithmetic(c in proptest::array::uniform4(-1000i64..1000)) {
            let x: Coeffs = c.map(BigInt::from);
            let (re, im) = complex_of(&x);
            let h = std::f64::consts::FRAC_1_SQRT_2;
            prop_assert!(close(complex_of(&mul_omega(&x)), (h * (re - im), h * (re + im))));
            prop_assert!(close(complex_of(&mul_i(&x)), (-im, re)));
            let s = std::f64::consts::SQRT_2;
            prop_assert!(close(complex_of(&mul_sqrt2(&x)), (s * re, s * im)));
        }

        #[test]
        fn abs2_matches_float_modulus(c in proptest::array::uniform4(-(1i64 << 20)..(1i64 << 20)), k in 0i64..6) {
            let amp = AlgebraicAmplitude::from_coeffs(c.map(BigInt::from), k);
            let (re, im) = amp.to_complex();
            let float = re * re + im * im;
            let exact = amp.abs2_exact().to_f64();
            prop_assert!((exact - float).abs() <= 1e-12 * float.max(1e-300), "{exact} vs {float}");
        }

        #[test]
        fn raising_k_preserves_value(c in proptest::array::uniform4(-1000i64..1000), k in 0i64..4, extra in 0i64..5) {
            let amp = AlgebraicAmplitude::from_coeffs(c.map(BigInt::from), k);
            let raised = amp.with_k(k + extra);
            prop_assert!(amp.value_eq(&raised));
            prop_assert_eq!(amp.abs2_exact(), raised.abs2_exact());
            prop_assert!(close(amp.to_complex(), raised.to_complex()));
        }
    }
}
