//! Packed binary words.

use std::fmt;

use rand::Rng;

use crate::error::{invalid, Result};

/// A fixed-length binary sequence packed into 64-bit words.
///
/// Bit `i` lives in word `i / 64` at position `i % 64` (LSB first). Bits past
/// `len` are always zero.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct BitWord {
    words: Vec<u64>,
    len: usize,
}

impl BitWord {
    pub fn zeros(len: usize) -> Self {
        BitWord {
            words: vec![0; len.div_ceil(64)],
            len,
        }
    }

    /// Builds a word from a slice of `0`/`1` values.
    pub fn from_bits(bits: &[u8]) -> Result<Self> {
        let mut w = BitWord::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            match b {
                0 => {}
                1 => w.words[i / 64] |= 1 << (i % 64),
                other => return Err(invalid!("bit {i} has value {other}, expected 0 or 1")),
            }
        }
        Ok(w)
    }

    /// Parses a string of `0` and `1` characters, ignoring whitespace.
    pub fn parse(s: &str) -> Result<Self> {
        let bits: Vec<u8> = s
            .chars()
            .filter(|c| !c.is_whitespace())
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                other => Err(invalid!("unexpected character {other:?} in bit string")),
            })
            .collect::<Result<_>>()?;
        BitWord::from_bits(&bits)
    }

    pub fn random<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Self {
        let mut w = BitWord::zeros(len);
        for word in w.words.iter_mut() {
            *word = rng.random();
        }
        w.clear_tail();
        w
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> u8 {
        assert!(i < self.len, "bit index {i} out of range for length {}", self.len);
        ((self.words[i / 64] >> (i % 64)) & 1) as u8
    }

    #[inline]
    pub fn set(&mut self, i: usize, bit: u8) {
        assert!(i < self.len, "bit index {i} out of range for length {}", self.len);
        let mask = 1u64 << (i % 64);
        if bit & 1 == 1 {
            self.words[i / 64] |= mask;
        } else {
            self.words[i / 64] &= !mask;
        }
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = u8> + '_ {
        (0..self.len).map(move |i| ((self.words[i / 64] >> (i % 64)) & 1) as u8)
    }

    pub fn to_vec(&self) -> Vec<u8> {
        self.iter().collect()
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// XORs `other` into `self`. Lengths must match.
    pub fn xor_assign(&mut self, other: &BitWord) {
        assert_eq!(self.len, other.len, "length mismatch in xor");
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub(crate) fn words_mut(&mut self) -> &mut [u64] {
        &mut self.words
    }

    fn clear_tail(&mut self) {
        let rem = self.len % 64;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }
}

impl fmt::Debug for BitWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitWord({self})")
    }
}

impl fmt::Display for BitWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter() {
            f.write_str(if b == 1 { "1" } else { "0" })?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn parse_and_display() {
        let w = BitWord::parse("0110 1").unwrap();
        assert_eq!(w.len(), 5);
        assert_eq!(w.to_string(), "01101");
        assert_eq!(w.count_ones(), 3);
    }

    #[test]
    fn rejects_non_binary() {
        assert!(BitWord::from_bits(&[0, 2]).is_err());
        assert!(BitWord::parse("01x").is_err());
    }

    #[test]
    fn random_word_has_clean_tail() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let w = BitWord::random(70, &mut rng);
        assert_eq!(w.words()[1] >> 6, 0);
        assert_eq!(w.count_ones(), w.iter().filter(|&b| b == 1).count());
    }

    #[test]
    fn set_get_across_word_boundary() {
        let mut w = BitWord::zeros(130);
        w.set(63, 1);
        w.set(64, 1);
        w.set(129, 1);
        assert_eq!(w.get(63), 1);
        assert_eq!(w.get(64), 1);
        assert_eq!(w.get(65), 0);
        w.set(64, 0);
        assert_eq!(w.count_ones(), 2);
    }
}
