//! Fixed-length bit strings, witnesses and the two sides of a pair.
//!
//! Bit `0` is the least significant bit. The textual form is written
//! most-significant first, so `"001"` has bit 0 set.

use std::fmt;

use serde::{Serialize, Serializer};
use thiserror::Error;

/// Widest string the crate ever materialises (witness enumeration cap).
pub const MAX_BITS: u8 = 24;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BitsError {
    #[error("bit length {0} exceeds the supported maximum of {MAX_BITS}")]
    TooLong(usize),
    #[error("value {value:#x} does not fit in {len} bits")]
    Overflow { value: u32, len: u8 },
    #[error("invalid binary literal {0:?}")]
    BadBinary(String),
    #[error("invalid hex literal {0:?}")]
    BadHex(String),
}

/// A string in `{0,1}^len`, compared and hashed by value.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitString {
    // `len` first so that the derived ordering groups by length, then by
    // value, which is the lexicographic order on equal-length strings.
    len: u8,
    value: u32,
}

impl BitString {
    pub fn new(value: u32, len: u8) -> Result<Self, BitsError> {
        if len > MAX_BITS {
            return Err(BitsError::TooLong(len as usize));
        }
        if len < 32 && value >> len != 0 {
            return Err(BitsError::Overflow { value, len });
        }
        Ok(Self { len, value })
    }

    /// Panicking constructor for values already known to fit.
    pub(crate) fn from_raw(value: u32, len: u8) -> Self {
        debug_assert!(len <= MAX_BITS && value >> len == 0);
        Self { len, value }
    }

    pub fn zeros(len: u8) -> Self {
        Self::from_raw(0, len)
    }

    /// Parses a most-significant-first binary literal such as `"101"`.
    pub fn from_bin(s: &str) -> Result<Self, BitsError> {
        if s.is_empty() || s.len() > MAX_BITS as usize {
            return Err(BitsError::BadBinary(s.to_owned()));
        }
        let value = u32::from_str_radix(s, 2).map_err(|_| BitsError::BadBinary(s.to_owned()))?;
        Self::new(value, s.len() as u8)
    }

    pub fn from_hex(s: &str, len: u8) -> Result<Self, BitsError> {
        let value = u32::from_str_radix(s, 16).map_err(|_| BitsError::BadHex(s.to_owned()))?;
        Self::new(value, len)
    }

    pub fn value(&self) -> u32 {
        self.value
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn bit(&self, i: usize) -> bool {
        debug_assert!(i < self.len());
        (self.value >> i) & 1 == 1
    }

    pub fn msb(&self) -> bool {
        self.bit(self.len() - 1)
    }

    pub fn parity(&self) -> bool {
        self.value.count_ones() % 2 == 1
    }

    pub fn bits(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len()).map(move |i| self.bit(i))
    }

    /// Zero-padded lowercase hex, `ceil(len/4)` digits.
    pub fn to_hex(&self) -> String {
        let digits = self.len().div_ceil(4).max(1);
        format!("{:0width$x}", self.value, width = digits)
    }

    /// All strings of the given length in increasing (lexicographic) order.
    pub fn all(len: u8) -> impl Iterator<Item = BitString> {
        (0..(1u32 << len)).map(move |v| BitString::from_raw(v, len))
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in (0..self.len()).rev() {
            f.write_str(if self.bit(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitString({self})")
    }
}

impl Serialize for BitString {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_hex())
    }
}

/// A certificate that some string lies on one side of a pair.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Serialize)]
#[serde(transparent)]
pub struct Witness(pub BitString);

impl Witness {
    pub fn bits(&self) -> BitString {
        self.0
    }
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Serialize)]
pub enum Side {
    U,
    V,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::U => Side::V,
            Side::V => Side::U,
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::U => "U",
            Side::V => "V",
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_literal_is_msb_first() {
        let x = BitString::from_bin("001").unwrap();
        assert!(x.bit(0));
        assert!(!x.msb());
        assert_eq!(x.to_string(), "001");
        assert_eq!(BitString::from_bin("100").unwrap().value(), 4);
    }

    #[test]
    fn hex_pads_to_length() {
        let x = BitString::new(5, 10).unwrap();
        assert_eq!(x.to_hex(), "005");
        assert_eq!(BitString::from_hex("005", 10).unwrap(), x);
    }

    #[test]
    fn rejects_overflow() {
        assert_eq!(BitString::new(8, 3), Err(BitsError::Overflow { value: 8, len: 3 }));
        assert!(BitString::new(0, 25).is_err());
    }

    #[test]
    fn ordering_is_lexicographic() {
        let all: Vec<_> = BitString::all(3).collect();
        assert_eq!(all.len(), 8);
        assert!(all.windows(2).all(|w| w[0] < w[1]));
        assert!(all.windows(2).all(|w| w[0].to_string() < w[1].to_string()));
    }
}
