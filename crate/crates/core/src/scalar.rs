//! Numeric scalar abstraction shared by the LP solver, flow solutions and
//! certificate arithmetic.
//!
//! Floating-point scalars carry a pivot tolerance; the exact rational scalar
//! has tolerance zero, so every comparison it makes is exact.

use std::fmt::{Debug, Display};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, One, Signed, ToPrimitive, Zero};

/// Ordered field element usable by the simplex solver.
pub trait Scalar:
    Clone + Debug + Display + PartialOrd + Num + Signed + Send + Sync + 'static
{
    /// Values with magnitude at or below this are treated as zero.
    fn tolerance() -> Self;

    /// Whether arithmetic is exact (no rounding).
    fn is_exact() -> bool;

    fn from_rational(r: &BigRational) -> Self;

    /// Exact value for rationals; the exact dyadic value of the float otherwise.
    fn to_rational(&self) -> BigRational;

    fn to_f64(&self) -> f64;

    fn from_usize(v: usize) -> Self {
        Self::from_rational(&BigRational::from_integer(BigInt::from(v)))
    }

    fn is_negligible(&self) -> bool {
        self.abs() <= Self::tolerance()
    }

    fn is_positive_tol(&self) -> bool {
        *self > Self::tolerance()
    }

    fn is_negative_tol(&self) -> bool {
        *self < -Self::tolerance()
    }

    /// Clamp negligible magnitudes to an exact zero.
    fn cleaned(self) -> Self {
        if self.is_negligible() {
            Self::zero()
        } else {
            self
        }
    }
}

impl Scalar for f64 {
    fn tolerance() -> Self {
        1e-9
    }

    fn is_exact() -> bool {
        false
    }

    fn from_rational(r: &BigRational) -> Self {
        ratio_to_f64(r)
    }

    fn to_rational(&self) -> BigRational {
        BigRational::from_f64(*self).unwrap_or_else(BigRational::zero)
    }

    fn to_f64(&self) -> f64 {
        *self
    }
}

impl Scalar for f32 {
    fn tolerance() -> Self {
        1e-5
    }

    fn is_exact() -> bool {
        false
    }

    fn from_rational(r: &BigRational) -> Self {
        ratio_to_f64(r) as f32
    }

    fn to_rational(&self) -> BigRational {
        BigRational::from_f32(*self).unwrap_or_else(BigRational::zero)
    }

    fn to_f64(&self) -> f64 {
        f64::from(*self)
    }
}

impl Scalar for BigRational {
    fn tolerance() -> Self {
        BigRational::zero()
    }

    fn is_exact() -> bool {
        true
    }

    fn from_rational(r: &BigRational) -> Self {
        r.clone()
    }

    fn to_rational(&self) -> BigRational {
        self.clone()
    }

    fn to_f64(&self) -> f64 {
        ratio_to_f64(self)
    }
}

/// Float approximation of a big rational that survives huge numerators and
/// denominators.
pub fn ratio_to_f64(r: &BigRational) -> f64 {
    if let (Some(n), Some(d)) = (r.numer().to_f64(), r.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && d != 0.0 {
            return n / d;
        }
    }
    // Shift both parts down to keep ~60 significant bits.
    let nb = r.numer().bits() as i64;
    let db = r.denom().bits() as i64;
    let shift_n = (nb - 60).max(0);
    let shift_d = (db - 60).max(0);
    let n = (r.numer() >> shift_n as usize).to_f64().unwrap_or(0.0);
    let d = (r.denom() >> shift_d as usize).to_f64().unwrap_or(1.0);
    n / d * 2f64.powi((shift_n - shift_d) as i32)
}

/// `p / q` as an exact rational.
pub fn ratio(p: i64, q: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

pub fn rational_from_usize(v: usize) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

/// Render a rational as `p/q`, or `p` when integral.
pub fn format_rational(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parse `p`, `p/q` or a plain decimal such as `2.5` into an exact rational.
pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().ok()?;
        let q: BigInt = q.trim().parse().ok()?;
        if q.is_zero() {
            return None;
        }
        return Some(BigRational::new(p, q));
    }
    if let Some((int, frac)) = s.split_once('.') {
        let negative = int.starts_with('-');
        let digits = format!("{}{}", int.trim_start_matches(['-', '+']), frac);
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let numer = BigInt::from_str_radix(&digits, 10).ok()?;
        let denom = num_traits::pow(BigInt::from(10u32), frac.len());
        let r = BigRational::new(numer, denom);
        return Some(if negative { -r } else { r });
    }
    s.parse::<BigInt>().ok().map(BigRational::from_integer)
}
