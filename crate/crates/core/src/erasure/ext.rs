//! Exact extended reals: rationals plus the two infinities.

use std::cmp::Ordering;
use std::fmt;
use std::ops::Neg;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

pub type Rational = BigRational;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Ext {
    Finite(Rational),
    PosInf,
    NegInf,
}

impl Ext {
    pub fn zero() -> Ext {
        Ext::Finite(Rational::zero())
    }

    pub fn int(v: i64) -> Ext {
        Ext::Finite(Rational::from_integer(BigInt::from(v)))
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, Ext::Finite(_))
    }

    pub fn is_infinite(&self) -> bool {
        !self.is_finite()
    }

    pub fn finite(&self) -> Option<&Rational> {
        match self {
            Ext::Finite(r) => Some(r),
            _ => None,
        }
    }

    /// `None` for `inf + -inf`.
    pub fn checked_add(&self, other: &Ext) -> Option<Ext> {
        match (self, other) {
            (Ext::Finite(a), Ext::Finite(b)) => Some(Ext::Finite(a + b)),
            (Ext::PosInf, Ext::NegInf) | (Ext::NegInf, Ext::PosInf) => None,
            (Ext::PosInf, _) | (_, Ext::PosInf) => Some(Ext::PosInf),
            (Ext::NegInf, _) | (_, Ext::NegInf) => Some(Ext::NegInf),
        }
    }

    /// `None` for `inf - inf`.
    pub fn checked_sub(&self, other: &Ext) -> Option<Ext> {
        self.checked_add(&other.clone().neg())
    }

    /// Product with a strictly positive rational.
    pub fn scale(&self, p: &Rational) -> Ext {
        debug_assert!(p.is_positive());
        match self {
            Ext::Finite(a) => Ext::Finite(a * p),
            inf => inf.clone(),
        }
    }

    pub fn abs(&self) -> Ext {
        match self {
            Ext::Finite(a) => Ext::Finite(a.abs()),
            _ => Ext::PosInf,
        }
    }

    /// Approximate value for display.
    pub fn to_f64(&self) -> f64 {
        match self {
            Ext::Finite(r) => rational_to_f64(r),
            Ext::PosInf => f64::INFINITY,
            Ext::NegInf => f64::NEG_INFINITY,
        }
    }
}

impl Neg for Ext {
    type Output = Ext;

    fn neg(self) -> Ext {
        match self {
            Ext::Finite(a) => Ext::Finite(-a),
            Ext::PosInf => Ext::NegInf,
            Ext::NegInf => Ext::PosInf,
        }
    }
}

impl PartialOrd for Ext {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Ext {
    fn cmp(&self, other: &Self) -> Ordering {
        fn rank(e: &Ext) -> u8 {
            match e {
                Ext::NegInf => 0,
                Ext::Finite(_) => 1,
                Ext::PosInf => 2,
            }
        }
        match (self, other) {
            (Ext::Finite(a), Ext::Finite(b)) => a.cmp(b),
            _ => rank(self).cmp(&rank(other)),
        }
    }
}

impl From<Rational> for Ext {
    fn from(r: Rational) -> Ext {
        Ext::Finite(r)
    }
}

impl fmt::Display for Ext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ext::Finite(r) => f.write_str(&format_rational(r)),
            Ext::PosInf => f.write_str("inf"),
            Ext::NegInf => f.write_str("-inf"),
        }
    }
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}

/// `"3"`, `"-1/2"`.
pub fn format_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parses `"inf"`, `"-inf"`, `"p/q"`, integers and plain decimals
/// (`"0.1"` is exactly one tenth; exponents allowed).
pub fn parse_ext(s: &str) -> Option<Ext> {
    let s = s.trim();
    match s {
        "inf" | "+inf" | "infinity" | "Infinity" => return Some(Ext::PosInf),
        "-inf" | "-infinity" | "-Infinity" => return Some(Ext::NegInf),
        _ => {}
    }
    parse_rational(s).map(Ext::Finite)
}

pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(Rational::new(n, d));
    }
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (neg, mantissa) = match mantissa.strip_prefix('-') {
        Some(m) => (true, m),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part
        .chars()
        .chain(frac_part.chars())
        .all(|c| c.is_ascii_digit())
    {
        return None;
    }
    let digits: BigInt = format!("{int_part}{frac_part}0").parse().ok()?;
    let scale = exp - frac_part.len() as i32 - 1;
    let ten = BigInt::from(10);
    let mut r = Rational::from_integer(digits);
    if scale >= 0 {
        r *= Rational::from_integer(num_traits::pow(ten, scale as usize));
    } else {
        r /= Rational::from_integer(num_traits::pow(ten, (-scale) as usize));
    }
    Some(if neg { -r } else { r })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn parsing() {
        assert_eq!(parse_rational("1/3"), Some(q(1, 3)));
        assert_eq!(parse_rational("0.1"), Some(q(1, 10)));
        assert_eq!(parse_rational("-2.50"), Some(q(-5, 2)));
        assert_eq!(parse_rational("1e2"), Some(q(100, 1)));
        assert_eq!(parse_rational("1.5E-1"), Some(q(3, 20)));
        assert_eq!(parse_rational("7"), Some(q(7, 1)));
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(parse_rational("abc"), None);
        assert_eq!(parse_rational("."), None);
        assert_eq!(parse_ext("inf"), Some(Ext::PosInf));
    }

    #[test]
    fn arithmetic() {
        let one = Ext::int(1);
        assert_eq!(one.checked_add(&Ext::PosInf), Some(Ext::PosInf));
        assert_eq!(Ext::PosInf.checked_sub(&Ext::PosInf), None);
        assert_eq!(Ext::PosInf.checked_sub(&one), Some(Ext::PosInf));
        assert_eq!(one.checked_sub(&Ext::PosInf), Some(Ext::NegInf));
        assert!(Ext::NegInf < Ext::int(-100));
        assert!(Ext::int(100) < Ext::PosInf);
        assert_eq!(Ext::Finite(q(1, 2)).scale(&q(2, 3)), Ext::Finite(q(1, 3)));
        assert_eq!(format!("{}", Ext::Finite(q(-1, 2))), "-1/2");
        assert_eq!(format!("{}", Ext::int(3)), "3");
    }
}
