//! Exact rational scalars and their text forms.
//!
//! All geometry runs on [`Rat`]. Text input accepts `p/q` fractions, integers and
//! finite decimals (optionally with an exponent); decimals are converted exactly,
//! so `"0.1"` is `1/10` and never the nearest binary float.

use std::str::FromStr;

use malachite_base::num::arithmetic::traits::Pow;
use malachite_base::num::logic::traits::SignificantBits;
use malachite_base::num::conversion::traits::RoundingFrom;
use malachite_base::rounding_modes::RoundingMode;
use malachite_nz::integer::Integer;
use malachite_nz::natural::Natural;
pub use malachite_q::Rational as Rat;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseRatError {
    #[error("empty rational literal")]
    Empty,
    #[error("malformed rational literal `{0}`")]
    Malformed(String),
    #[error("zero denominator in `{0}`")]
    ZeroDenominator(String),
    #[error("exponent out of range in `{0}`")]
    ExponentRange(String),
}

/// Largest decimal exponent accepted by [`parse_rat`]; keeps hostile input from
/// allocating enormous powers of ten.
const MAX_EXPONENT: i64 = 4096;

pub fn int(n: i64) -> Rat {
    Rat::from(n)
}

pub fn frac(n: i64, d: i64) -> Rat {
    assert!(d != 0, "zero denominator");
    Rat::from_signeds(n, d)
}

pub fn zero() -> Rat {
    Rat::from(0u32)
}

pub fn one() -> Rat {
    Rat::from(1u32)
}

pub fn is_zero(r: &Rat) -> bool {
    *r == 0u32
}

pub fn is_positive(r: &Rat) -> bool {
    *r > 0u32
}

pub fn is_negative(r: &Rat) -> bool {
    *r < 0u32
}

pub fn abs(r: &Rat) -> Rat {
    if is_negative(r) {
        -r.clone()
    } else {
        r.clone()
    }
}

/// Sign as -1, 0 or +1.
pub fn signum(r: &Rat) -> i8 {
    if is_positive(r) {
        1
    } else if is_negative(r) {
        -1
    } else {
        0
    }
}

pub fn max_of<'a>(a: &'a Rat, b: &'a Rat) -> &'a Rat {
    if a >= b {
        a
    } else {
        b
    }
}

pub fn min_of<'a>(a: &'a Rat, b: &'a Rat) -> &'a Rat {
    if a <= b {
        a
    } else {
        b
    }
}

pub fn to_f64(r: &Rat) -> f64 {
    f64::rounding_from(r, RoundingMode::Nearest).0
}

/// Exact conversion of a finite float (every finite `f64` is a dyadic rational).
pub fn from_f64(x: f64) -> Option<Rat> {
    Rat::try_from(x).ok()
}

/// Parses `p/q`, an integer, or a decimal such as `-0.75` or `1e-3`.
pub fn parse_rat(input: &str) -> Result<Rat, ParseRatError> {
    let s = input.trim();
    if s.is_empty() {
        return Err(ParseRatError::Empty);
    }
    let malformed = || ParseRatError::Malformed(s.to_string());
    if let Some((num, den)) = s.split_once('/') {
        let num = parse_integer(num.trim()).ok_or_else(malformed)?;
        let den = parse_integer(den.trim()).ok_or_else(malformed)?;
        if den == 0u32 {
            return Err(ParseRatError::ZeroDenominator(s.to_string()));
        }
        return Ok(Rat::from_integers(num, den));
    }
    parse_decimal(s)
}

fn parse_integer(s: &str) -> Option<Integer> {
    let digits = s.strip_prefix(['-', '+']).unwrap_or(s);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let unsigned = s.strip_prefix('+').unwrap_or(s);
    Integer::from_str(unsigned).ok()
}

fn parse_decimal(s: &str) -> Result<Rat, ParseRatError> {
    let malformed = || ParseRatError::Malformed(s.to_string());
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => {
            let exp_str = &s[pos + 1..];
            let exp_digits = exp_str.strip_prefix(['-', '+']).unwrap_or(exp_str);
            if exp_digits.is_empty()
                || exp_digits.len() > 6
                || !exp_digits.bytes().all(|b| b.is_ascii_digit())
            {
                return Err(malformed());
            }
            let exp: i64 = exp_str.parse().map_err(|_| malformed())?;
            (&s[..pos], exp)
        }
        None => (s, 0),
    };
    let (negative, body) = match mantissa.as_bytes().first() {
        Some(b'-') => (true, &mantissa[1..]),
        Some(b'+') => (false, &mantissa[1..]),
        _ => (false, mantissa),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(malformed());
    }
    if !int_part.bytes().all(|b| b.is_ascii_digit()) || !frac_part.bytes().all(|b| b.is_ascii_digit())
    {
        return Err(malformed());
    }
    let scale = exponent - frac_part.len() as i64;
    if scale.abs() > MAX_EXPONENT {
        return Err(ParseRatError::ExponentRange(s.to_string()));
    }
    let digits = format!("{int_part}{frac_part}");
    let magnitude = Natural::from_str(if digits.is_empty() { "0" } else { &digits })
        .map_err(|_| malformed())?;
    let ten_pow = Natural::from(10u32).pow(scale.unsigned_abs());
    let value = if scale >= 0 {
        Rat::from(magnitude * ten_pow)
    } else {
        Rat::from_naturals(magnitude, ten_pow)
    };
    Ok(if negative { -value } else { value })
}

/// Canonical `p/q` (or `p` for integers).
pub fn format_rat(r: &Rat) -> String {
    r.to_string()
}

/// Decimal rendering with `sig` significant digits, for human-facing output only.
pub fn format_decimal(r: &Rat, sig: usize) -> String {
    let v = to_f64(r);
    if v == 0.0 {
        return "0".to_string();
    }
    let magnitude = v.abs().log10().floor() as i64;
    let decimals = sig as i64 - 1 - magnitude;
    if (0..=24).contains(&decimals) {
        format!("{:.*}", decimals as usize, v)
    } else {
        format!("{:.*e}", sig.saturating_sub(1), v)
    }
}

/// `floor(log2(r))` for positive `r`, used to size binary searches.
pub fn floor_log2(r: &Rat) -> i64 {
    assert!(is_positive(r));
    let (n, d) = r.numerator_and_denominator_ref();
    let mut e = n.significant_bits() as i64 - d.significant_bits() as i64;
    let pow = Rat::from(2u32).pow(e);
    if &pow > r {
        e -= 1;
    }
    e
}

/// Natural logarithm of a positive rational, accurate far outside the `f64` range.
pub fn ln(r: &Rat) -> f64 {
    let e = floor_log2(r);
    let scaled = r / Rat::from(2u32).pow(e);
    to_f64(&scaled).ln() + e as f64 * std::f64::consts::LN_2
}

/// Serde adapters that write rationals as `"p/q"` strings.
pub mod serde_rat {
    use super::{format_rat, parse_rat, Rat};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rat, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rat(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rat, D::Error> {
        let text = RatText::deserialize(d)?;
        text.into_rat().map_err(serde::de::Error::custom)
    }

    /// JSON accepts rationals as strings or as plain integers.
    #[derive(Deserialize)]
    #[serde(untagged)]
    pub(crate) enum RatText {
        Str(String),
        Int(i64),
    }

    impl RatText {
        pub(crate) fn into_rat(self) -> Result<Rat, super::ParseRatError> {
            match self {
                RatText::Str(s) => parse_rat(&s),
                RatText::Int(i) => Ok(Rat::from(i)),
            }
        }
    }
}

pub mod serde_rat_vec {
    use super::serde_rat::RatText;
    use super::{format_rat, Rat};
    use serde::ser::SerializeSeq;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[Rat], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for r in v {
            seq.serialize_element(&format_rat(r))?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rat>, D::Error> {
        let items = Vec::<RatText>::deserialize(d)?;
        items
            .into_iter()
            .map(|t| t.into_rat().map_err(serde::de::Error::custom))
            .collect()
    }
}

pub mod serde_rat_mat {
    use super::serde_rat::RatText;
    use super::{format_rat, Rat};
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(m: &[Vec<Rat>], s: S) -> Result<S::Ok, S::Error> {
        let text: Vec<Vec<String>> = m.iter().map(|row| row.iter().map(format_rat).collect()).collect();
        text.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<Rat>>, D::Error> {
        Vec::<Vec<RatText>>::deserialize(d)?
            .into_iter()
            .map(|row| row.into_iter().map(|t| t.into_rat().map_err(serde::de::Error::custom)).collect())
            .collect()
    }
}

pub mod serde_rat_opt {
    use super::serde_rat::RatText;
    use super::{format_rat, Rat};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Option<Rat>, s: S) -> Result<S::Ok, S::Error> {
        match r {
            Some(r) => s.serialize_some(&format_rat(r)),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Rat>, D::Error> {
        Option::<RatText>::deserialize(d)?
            .map(|t| t.into_rat().map_err(serde::de::Error::custom))
            .transpose()
    }
}
