//! JSON helpers. Every integer is written as a decimal string so no width
//! limit applies; reading also accepts plain JSON integers.

use std::fmt;

use num_bigint::BigInt;
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Arbitrary-precision integer carried as a decimal string.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Dec(pub BigInt);

impl From<BigInt> for Dec {
    fn from(v: BigInt) -> Self {
        Dec(v)
    }
}

impl From<&BigInt> for Dec {
    fn from(v: &BigInt) -> Self {
        Dec(v.clone())
    }
}

pub fn decs(v: &[BigInt]) -> Vec<Dec> {
    v.iter().map(Dec::from).collect()
}

pub fn undecs(v: Vec<Dec>) -> Vec<BigInt> {
    v.into_iter().map(|d| d.0).collect()
}

impl Serialize for Dec {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(&self.0)
    }
}

struct DecVisitor;

impl Visitor<'_> for DecVisitor {
    type Value = Dec;

    fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("an integer or a decimal integer string")
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> Result<Dec, E> {
        Ok(Dec(v.into()))
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> Result<Dec, E> {
        Ok(Dec(v.into()))
    }

    fn visit_str<E: de::Error>(self, v: &str) -> Result<Dec, E> {
        v.trim()
            .parse()
            .map(Dec)
            .map_err(|_| E::custom(format!("invalid decimal integer '{v}'")))
    }
}

impl<'de> Deserialize<'de> for Dec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Dec, D::Error> {
        d.deserialize_any(DecVisitor)
    }
}
