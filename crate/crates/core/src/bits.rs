use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A computational-basis bitstring. Qubit 0 is the leftmost character and
/// the most significant bit of [`Bitstring::to_index`].
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Bitstring(Vec<u8>);

impl Bitstring {
    pub fn new(bits: Vec<u8>) -> Result<Self> {
        if bits.iter().any(|&b| b > 1) {
            return Err(Error::schema("bitstring", "bits must be 0 or 1"));
        }
        Ok(Self(bits))
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![0; n])
    }

    pub fn ones(n: usize) -> Self {
        Self(vec![1; n])
    }

    pub fn from_index(index: usize, n: usize) -> Self {
        Self((0..n).map(|k| ((index >> (n - 1 - k)) & 1) as u8).collect())
    }

    pub fn to_index(&self) -> usize {
        self.0.iter().fold(0usize, |acc, &b| (acc << 1) | b as usize)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bits(&self) -> &[u8] {
        &self.0
    }

    pub fn get(&self, k: usize) -> u8 {
        self.0[k]
    }

    /// Ising spin of qubit `k`: bit 1 is spin +1, bit 0 is spin -1.
    pub fn spin(&self, k: usize) -> f64 {
        2.0 * self.0[k] as f64 - 1.0
    }

    pub fn flipped(&self) -> Self {
        Self(self.0.iter().map(|&b| 1 - b).collect())
    }

    pub fn count_ones(&self) -> usize {
        self.0.iter().filter(|&&b| b == 1).count()
    }
}

impl fmt::Display for Bitstring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b == 1 { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for Bitstring {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                other => Err(Error::schema("bitstring", format!("unexpected character {other:?}"))),
            })
            .collect::<Result<Vec<u8>>>()
            .map(Self)
    }
}

impl Serialize for Bitstring {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Bitstring {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn big_endian_index() {
        let b: Bitstring = "01".parse().unwrap();
        assert_eq!(b.to_index(), 1);
        assert_eq!(Bitstring::from_index(4, 3).to_string(), "100");
        for i in 0..32 {
            assert_eq!(Bitstring::from_index(i, 5).to_index(), i);
        }
    }

    #[test]
    fn rejects_garbage() {
        assert!("0120".parse::<Bitstring>().is_err());
    }
}
