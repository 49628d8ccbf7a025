//! Exact rational scalars.
//!
//! All coordinates, measures, masses, and parameters in this crate are
//! arbitrary-precision rationals, kept reduced with positive denominator by
//! [`num_rational::BigRational`]. Text form is `p/q`, a bare integer, or a
//! decimal (converted exactly in base 10).

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub type Rat = num_rational::BigRational;

pub fn rat_int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn rat(num: i64, den: i64) -> Rat {
    assert!(den != 0, "zero denominator");
    Rat::new(BigInt::from(num), BigInt::from(den))
}

/// 2^k for any sign of k.
pub fn pow2(k: i32) -> Rat {
    let one = BigInt::one();
    if k >= 0 {
        Rat::from_integer(one << k as usize)
    } else {
        Rat::new(one.clone(), one << (-k) as usize)
    }
}

/// Integer power with rational base, negative exponents allowed.
pub fn rat_powi(x: &Rat, e: i32) -> Rat {
    if e >= 0 {
        x.pow(e)
    } else {
        assert!(!x.is_zero(), "zero base with negative exponent");
        x.pow(e)
    }
}

/// Parses `p/q`, an integer, or a finite decimal such as `-0.375`.
pub fn parse_rat(s: &str) -> Result<Rat> {
    let s = s.trim();
    if s.is_empty() {
        return Err(Error::InvalidParams("empty rational".into()));
    }
    if let Some((num, den)) = s.split_once('/') {
        let n: BigInt = num
            .trim()
            .parse()
            .map_err(|_| Error::InvalidParams(format!("bad numerator in `{s}`")))?;
        let d: BigInt = den
            .trim()
            .parse()
            .map_err(|_| Error::InvalidParams(format!("bad denominator in `{s}`")))?;
        if d.is_zero() {
            return Err(Error::InvalidParams(format!("zero denominator in `{s}`")));
        }
        return Ok(Rat::new(n, d));
    }
    if let Some((int_part, frac_part)) = s.split_once('.') {
        let negative = int_part.trim_start().starts_with('-');
        let ip: BigInt = if int_part.is_empty() || int_part == "-" {
            BigInt::zero()
        } else {
            int_part
                .parse()
                .map_err(|_| Error::InvalidParams(format!("bad decimal `{s}`")))?
        };
        if frac_part.is_empty() || !frac_part.bytes().all(|b| b.is_ascii_digit()) {
            return Err(Error::InvalidParams(format!("bad decimal `{s}`")));
        }
        let digits: BigUint = frac_part
            .parse()
            .map_err(|_| Error::InvalidParams(format!("bad decimal `{s}`")))?;
        let scale = BigUint::from(10u32).pow(frac_part.len() as u32);
        let frac = Rat::new(BigInt::from(digits), BigInt::from(scale));
        let whole = Rat::from_integer(ip);
        return Ok(if negative { whole - frac } else { whole + frac });
    }
    let n: BigInt = s
        .parse()
        .map_err(|_| Error::InvalidParams(format!("bad rational `{s}`")))?;
    Ok(Rat::from_integer(n))
}

/// Canonical text form: `p/q`, or just `p` when the denominator is 1.
pub fn fmt_rat(x: &Rat) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn rat_to_f64(x: &Rat) -> f64 {
    // Scale into f64 range via bit-length difference; exact enough for reports.
    let n = x.numer();
    let d = x.denom();
    if n.is_zero() {
        return 0.0;
    }
    let shift = (n.bits() as i64 - d.bits() as i64).clamp(-900, 900);
    let scaled = if shift > 0 {
        Rat::new(n.clone(), d.clone() << shift as usize)
    } else {
        Rat::new(n.clone() << (-shift) as usize, d.clone())
    };
    let approx = scaled.numer().to_string().parse::<f64>().unwrap_or(f64::NAN)
        / scaled.denom().to_string().parse::<f64>().unwrap_or(f64::NAN);
    approx * 2f64.powi(shift as i32)
}

/// Serde adapter: rationals as `p/q` strings.
pub mod serde_rat {
    use super::*;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &Rat, ser: S) -> std::result::Result<S::Ok, S::Error> {
        ser.serialize_str(&fmt_rat(x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> std::result::Result<Rat, D::Error> {
        let s = String::deserialize(de)?;
        parse_rat(&s).map_err(serde::de::Error::custom)
    }
}

/// Serde adapter for `Vec<Rat>`.
pub mod serde_rat_vec {
    use super::*;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(
        xs: &[Rat],
        ser: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        ser.collect_seq(xs.iter().map(fmt_rat))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        de: D,
    ) -> std::result::Result<Vec<Rat>, D::Error> {
        let strings = Vec::<String>::deserialize(de)?;
        strings
            .iter()
            .map(|s| parse_rat(s).map_err(serde::de::Error::custom))
            .collect()
    }
}

pub fn abs(x: &Rat) -> Rat {
    if x.is_negative() {
        -x.clone()
    } else {
        x.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_forms() {
        assert_eq!(parse_rat("3/4").unwrap(), rat(3, 4));
        assert_eq!(parse_rat("-7").unwrap(), rat_int(-7));
        assert_eq!(parse_rat("0.3").unwrap(), rat(3, 10));
        assert_eq!(parse_rat("-0.375").unwrap(), rat(-3, 8));
        assert_eq!(parse_rat("2.25").unwrap(), rat(9, 4));
        assert!(parse_rat("1/0").is_err());
        assert!(parse_rat("x").is_err());
    }

    #[test]
    fn format_round_trip() {
        for s in ["3/4", "-5", "0", "22/7"] {
            let x = parse_rat(s).unwrap();
            assert_eq!(parse_rat(&fmt_rat(&x)).unwrap(), x);
        }
    }

    #[test]
    fn pow2_signs() {
        assert_eq!(pow2(3), rat_int(8));
        assert_eq!(pow2(-2), rat(1, 4));
        assert_eq!(pow2(0), rat_int(1));
    }

    #[test]
    fn f64_conversion() {
        assert!((rat_to_f64(&rat(1, 3)) - 1.0 / 3.0).abs() < 1e-15);
        assert!((rat_to_f64(&rat(-22, 7)) + 22.0 / 7.0).abs() < 1e-14);
        assert_eq!(rat_to_f64(&Rat::zero()), 0.0);
    }
}
