//! Append-only bit strings and a cursor-based reader.
//!
//! Multi-bit fields are written most-significant bit first.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

/// Attempted to read past the end of a [`BitString`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("out of bits: wanted {wanted} at position {position}, only {len} available")]
pub struct OutOfBits {
    pub position: usize,
    pub wanted: usize,
    pub len: usize,
}

#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct BitString {
    words: Vec<u64>,
    len: usize,
}

impl BitString {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(bits: usize) -> Self {
        Self {
            words: Vec::with_capacity(bits.div_ceil(64)),
            len: 0,
        }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Empties the string, keeping its allocation.
    pub fn clear(&mut self) {
        self.words.clear();
        self.len = 0;
    }

    pub fn push(&mut self, bit: bool) {
        let word = self.len / 64;
        if word == self.words.len() {
            self.words.push(0);
        }
        if bit {
            self.words[word] |= 1u64 << (63 - self.len % 64);
        }
        self.len += 1;
    }

    /// Appends the low `width` bits of `value`, MSB first.
    ///
    /// Panics if `width > 64` or `value` does not fit in `width` bits.
    pub fn push_bits(&mut self, value: u64, width: u32) {
        assert!(width <= 64, "field width {width} exceeds 64");
        assert!(
            width == 64 || value >> width == 0,
            "value {value} does not fit in {width} bits"
        );
        for i in (0..width).rev() {
            self.push((value >> i) & 1 == 1);
        }
    }

    /// Appends every bit of `other`.
    pub fn extend_from(&mut self, other: &BitString) {
        for bit in other.iter() {
            self.push(bit);
        }
    }

    #[inline]
    pub fn get(&self, index: usize) -> Option<bool> {
        (index < self.len).then(|| (self.words[index / 64] >> (63 - index % 64)) & 1 == 1)
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| (self.words[i / 64] >> (63 - i % 64)) & 1 == 1)
    }

    /// Reads `count` bits at `cursor` as a big-endian integer and returns it
    /// with the advanced cursor.
    pub fn read(&self, cursor: usize, count: usize) -> Result<(u64, usize), OutOfBits> {
        let mut reader = BitReader::at(self, cursor);
        let value = reader.read(count)?;
        Ok((value, reader.position()))
    }

    pub fn reader(&self) -> BitReader<'_> {
        BitReader::at(self, 0)
    }

    /// Hex rendering, MSB first, zero-padded on the right to a whole nibble.
    /// The empty string renders as `""`.
    pub fn to_hex(&self) -> String {
        const DIGITS: &[u8; 16] = b"0123456789abcdef";
        let mut out = String::with_capacity(self.len.div_ceil(4));
        let mut i = 0;
        while i < self.len {
            let mut nibble = 0u8;
            for j in 0..4 {
                nibble <<= 1;
                if self.get(i + j).unwrap_or(false) {
                    nibble |= 1;
                }
            }
            out.push(DIGITS[nibble as usize] as char);
            i += 4;
        }
        out
    }

    /// Inverse of [`to_hex`](Self::to_hex) given the exact bit length.
    pub fn from_hex(hex: &str, len: usize) -> Option<Self> {
        if hex.len() != len.div_ceil(4) {
            return None;
        }
        let mut out = BitString::with_capacity(len);
        for (k, c) in hex.chars().enumerate() {
            let nibble = c.to_digit(16)? as u64;
            for j in 0..4 {
                let idx = k * 4 + j;
                let bit = (nibble >> (3 - j)) & 1 == 1;
                if idx < len {
                    out.push(bit);
                } else if bit {
                    return None;
                }
            }
        }
        Some(out)
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitString(\"{self}\")")
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for bit in self.iter() {
            f.write_str(if bit { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// Parses a string of `0`/`1` characters.
impl FromStr for BitString {
    type Err = char;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut out = BitString::with_capacity(s.len());
        for c in s.chars() {
            match c {
                '0' => out.push(false),
                '1' => out.push(true),
                other => return Err(other),
            }
        }
        Ok(out)
    }
}

/// Cursor over a [`BitString`]. Never advances past the end.
#[derive(Clone, Debug)]
pub struct BitReader<'a> {
    bits: &'a BitString,
    pos: usize,
}

impl<'a> BitReader<'a> {
    pub fn at(bits: &'a BitString, pos: usize) -> Self {
        Self { bits, pos }
    }

    #[inline]
    pub fn position(&self) -> usize {
        self.pos
    }

    #[inline]
    pub fn remaining(&self) -> usize {
        self.bits.len().saturating_sub(self.pos)
    }

    pub fn read_bit(&mut self) -> Result<bool, OutOfBits> {
        match self.bits.get(self.pos) {
            Some(bit) => {
                self.pos += 1;
                Ok(bit)
            }
            None => Err(self.out_of_bits(1)),
        }
    }

    /// Reads a `count`-bit big-endian integer (`count <= 64`). On error the
    /// cursor is left unchanged.
    pub fn read(&mut self, count: usize) -> Result<u64, OutOfBits> {
        assert!(count <= 64, "cannot read {count} bits into a u64");
        if count > self.remaining() {
            return Err(self.out_of_bits(count));
        }
        let mut value = 0u64;
        for _ in 0..count {
            value = (value << 1) | u64::from(self.read_bit()?);
        }
        Ok(value)
    }

    fn out_of_bits(&self, wanted: usize) -> OutOfBits {
        OutOfBits {
            position: self.pos,
            wanted,
            len: self.bits.len(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use proptest::prelude::*;

    #[test]
    fn append_examples() {
        let mut bs = BitString::new();
        bs.push(true);
        assert_eq!(bs.to_string(), "1");
        assert_eq!(bs.len(), 1);

        let mut bs: BitString = "10".parse().unwrap();
        bs.push(false);
        assert_eq!(bs.to_string(), "100");
        assert_eq!(bs.len(), 3);

        let mut bs = BitString::new();
        for i in 0..11 {
            bs.push(i % 3 == 0);
        }
        assert_eq!(bs.len(), 11);
    }

    #[test]
    fn append_keeps_prefix() {
        let mut bs: BitString = "1100101".parse().unwrap();
        let before = bs.clone();
        bs.push(true);
        for i in 0..before.len() {
            assert_eq!(bs.get(i), before.get(i));
        }
    }

    #[test]
    fn read_examples() {
        let bs: BitString = "101".parse().unwrap();
        assert_eq!(bs.read(0, 3), Ok((5, 3)));
        assert_eq!(bs.read(1, 2), Ok((1, 3)));
        let one: BitString = "1".parse().unwrap();
        assert_eq!(
            one.read(0, 2),
            Err(OutOfBits {
                position: 0,
                wanted: 2,
                len: 1
            })
        );
    }

    #[test]
    fn failed_read_does_not_move_cursor() {
        let bs: BitString = "10".parse().unwrap();
        let mut r = bs.reader();
        assert!(r.read(3).is_err());
        assert_eq!(r.position(), 0);
        assert_eq!(r.read(2), Ok(2));
        assert!(r.read_bit().is_err());
        assert_eq!(r.position(), 2);
    }

    #[test]
    fn crosses_word_boundary() {
        let mut bs = BitString::new();
        bs.push_bits(0, 60);
        bs.push_bits(0b1011_0111, 8);
        assert_eq!(bs.read(60, 8).unwrap().0, 0b1011_0111);
    }

    #[test]
    fn hex_rendering() {
        let bs: BitString = "11110001010".parse().unwrap();
        assert_eq!(bs.to_hex(), "f14");
        assert_eq!(BitString::from_hex("f14", 11), Some(bs));
        assert_eq!(BitString::from_hex("f15", 11), None);
    }

    proptest! {
        #[test]
        fn fixed_width_round_trip(width in 1u32..=64, raw in any::<u64>(), lead in 0usize..70) {
            let value = if width == 64 { raw } else { raw & ((1u64 << width) - 1) };
            let mut bs = BitString::new();
            bs.push_bits(0, lead as u32 % 65);
            let start = bs.len();
            bs.push_bits(value, width);
            prop_assert_eq!(bs.len(), start + width as usize);
            prop_assert_eq!(bs.read(start, width as usize).unwrap(), (value, start + width as usize));
        }
    }
}
