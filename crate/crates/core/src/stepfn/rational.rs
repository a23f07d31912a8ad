use num::bigint::BigInt;
use num::{BigRational, Integer, One, Signed, ToPrimitive, Zero};
use std::str::FromStr;
use thiserror::Error;

/// Arbitrary-precision rational number kept in lowest terms.
pub type Q = BigRational;

/// Integer as rational.
pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

/// `n/d` as rational. Panics on `d == 0`.
pub fn ratio(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// Exact rational value of a finite `f64` (dyadic).
pub fn qf(x: f64) -> Q {
    Q::from_float(x).expect("finite float")
}

pub fn to_f64(x: &Q) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Largest rational `g` with `a/g` and `b/g` both integers (both positive).
pub fn rational_gcd(a: &Q, b: &Q) -> Q {
    let num = (a.numer() * b.denom()).gcd(&(b.numer() * a.denom()));
    Q::new(num, a.denom() * b.denom())
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("invalid rational literal {literal:?}")]
pub struct ParseRationalError {
    pub literal: String,
}

/// Parses `"p/q"`, `"p"` or a finite decimal such as `"-0.25"`.
pub fn parse_q(s: &str) -> Result<Q, ParseRationalError> {
    let err = || ParseRationalError {
        literal: s.to_string(),
    };
    let t = s.trim();
    if let Some((n, d)) = t.split_once('/') {
        let n = BigInt::from_str(n.trim()).map_err(|_| err())?;
        let d = BigInt::from_str(d.trim()).map_err(|_| err())?;
        if d.is_zero() {
            return Err(err());
        }
        return Ok(Q::new(n, d));
    }
    if let Some((ip, fp)) = t.split_once('.') {
        if fp.is_empty() || !fp.chars().all(|c| c.is_ascii_digit()) {
            return Err(err());
        }
        let neg = ip.starts_with('-');
        let ip_abs = ip.trim_start_matches(['-', '+']);
        let whole = if ip_abs.is_empty() {
            BigInt::zero()
        } else {
            BigInt::from_str(ip_abs).map_err(|_| err())?
        };
        let frac = BigInt::from_str(fp).map_err(|_| err())?;
        let scale = num::pow(BigInt::from(10), fp.len());
        let v = Q::new(whole * &scale + frac, scale);
        return Ok(if neg { -v } else { v });
    }
    BigInt::from_str(t).map(Q::from_integer).map_err(|_| err())
}

/// `"p/q"`, or `"p"` for integers.
pub fn format_q(x: &Q) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Decimal rendering rounded half-away-from-zero to `digits` fractional digits,
/// trailing zeros trimmed.
pub fn decimal_string(x: &Q, digits: usize) -> String {
    let scale = num::pow(BigInt::from(10), digits);
    let scaled = x.abs() * Q::from_integer(scale.clone());
    let rounded = (scaled + Q::new(BigInt::one(), BigInt::from(2))).floor().to_integer();
    let (ip, fp) = rounded.div_rem(&scale);
    let mut out = String::new();
    if x.is_negative() && !rounded.is_zero() {
        out.push('-');
    }
    out.push_str(&ip.to_string());
    if digits > 0 && !fp.is_zero() {
        let s = format!("{:0>width$}", fp.to_string(), width = digits);
        out.push('.');
        out.push_str(s.trim_end_matches('0'));
    }
    out
}

pub mod serde_impl {
    use super::{format_q, parse_q, Q};
    use num::bigint::BigInt;
    use serde::de::{self, Visitor};
    use serde::{Deserializer, Serializer};
    use std::fmt;

    pub fn serialize<S: Serializer>(x: &Q, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_q(x))
    }

    struct QVisitor;

    impl Visitor<'_> for QVisitor {
        type Value = Q;
        fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
            f.write_str("a rational as \"p/q\" string or an integer")
        }
        fn visit_str<E: de::Error>(self, v: &str) -> Result<Q, E> {
            parse_q(v).map_err(E::custom)
        }
        fn visit_i64<E: de::Error>(self, v: i64) -> Result<Q, E> {
            Ok(Q::from_integer(BigInt::from(v)))
        }
        fn visit_u64<E: de::Error>(self, v: u64) -> Result<Q, E> {
            Ok(Q::from_integer(BigInt::from(v)))
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Q, D::Error> {
        d.deserialize_any(QVisitor)
    }

    #[derive(serde::Serialize, serde::Deserialize)]
    #[serde(transparent)]
    struct Wrap(#[serde(with = "self")] Q);

    pub mod vec {
        use super::{Wrap, Q};
        use serde::{Deserialize, Deserializer, Serialize, Serializer};

        pub fn serialize<S: Serializer>(xs: &[Q], s: S) -> Result<S::Ok, S::Error> {
            let w: Vec<Wrap> = xs.iter().cloned().map(Wrap).collect();
            w.serialize(s)
        }
        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Q>, D::Error> {
            Ok(Vec::<Wrap>::deserialize(d)?.into_iter().map(|w| w.0).collect())
        }
    }

    pub mod opt {
        use super::{Wrap, Q};
        use serde::{Deserialize, Deserializer, Serialize, Serializer};

        pub fn serialize<S: Serializer>(x: &Option<Q>, s: S) -> Result<S::Ok, S::Error> {
            x.clone().map(Wrap).serialize(s)
        }
        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Q>, D::Error> {
            Ok(Option::<Wrap>::deserialize(d)?.map(|w| w.0))
        }
    }
}
