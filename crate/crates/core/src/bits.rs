//! Packed bit sequences and their on-disk formats.
//!
//! Bit `i` of a stream lives in byte `i / 8` at bit position `i % 8`: the
//! first generated bit is the least significant bit of the first byte.

use std::fs;
use std::io;
use std::path::Path;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum BitsError {
    #[error("invalid character {0:?} in bit text (expected '0' or '1')")]
    BadChar(char),
    #[error("{len} bits do not fit in {bytes} bytes")]
    Length { len: usize, bytes: usize },
    #[error("unknown bitstream format {0:?} (expected bin or txt)")]
    Format(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// On-disk representation of a bitstream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BitFormat {
    /// Packed bytes, LSB-first.
    Bin,
    /// One ASCII '0'/'1' per bit, no separators.
    Txt,
}

impl BitFormat {
    /// Picks the format from a file extension, defaulting to `Bin`.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("txt") => BitFormat::Txt,
            _ => BitFormat::Bin,
        }
    }
}

impl FromStr for BitFormat {
    type Err = BitsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "bin" => Ok(BitFormat::Bin),
            "txt" => Ok(BitFormat::Txt),
            other => Err(BitsError::Format(other.to_string())),
        }
    }
}

/// Growable packed bit array.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct BitStream {
    words: Vec<u64>,
    len: usize,
}

impl std::fmt::Debug for BitStream {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "BitStream({} bits)", self.len)
    }
}

impl BitStream {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(bits: usize) -> Self {
        Self {
            words: Vec::with_capacity(bits.div_ceil(64)),
            len: 0,
        }
    }

    /// `len` zero bits.
    pub fn zeros(len: usize) -> Self {
        Self {
            words: vec![0; len.div_ceil(64)],
            len,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn push(&mut self, bit: bool) {
        let (w, b) = (self.len / 64, self.len % 64);
        if b == 0 {
            self.words.push(0);
        }
        if bit {
            self.words[w] |= 1 << b;
        }
        self.len += 1;
    }

    pub fn extend_from(&mut self, other: &BitStream) {
        for bit in other.iter() {
            self.push(bit);
        }
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    pub fn set(&mut self, i: usize, bit: bool) {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        let mask = 1u64 << (i % 64);
        if bit {
            self.words[i / 64] |= mask;
        } else {
            self.words[i / 64] &= !mask;
        }
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = bool> + '_ {
        (0..self.len).map(move |i| (self.words[i / 64] >> (i % 64)) & 1 == 1)
    }

    /// Packed words; bits past `len` in the last word are zero.
    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Number of ones in bits `[start, start + len)`.
    pub fn count_ones_range(&self, start: usize, len: usize) -> usize {
        assert!(start + len <= self.len);
        let mut ones = 0;
        let mut pos = start;
        let end = start + len;
        while pos < end {
            let take = (end - pos).min(64);
            let w = self.window(pos) & low_mask(take);
            ones += w.count_ones() as usize;
            pos += take;
        }
        ones
    }

    /// Up to 64 bits starting at `start` (bit `start` in position 0). Bits
    /// past the end of the stream read as zero.
    #[inline]
    pub fn window(&self, start: usize) -> u64 {
        let (w, off) = (start / 64, start % 64);
        let lo = self.words.get(w).copied().unwrap_or(0) >> off;
        if off == 0 {
            lo
        } else {
            lo | (self.words.get(w + 1).copied().unwrap_or(0) << (64 - off))
        }
    }

    /// Number of positions `i` in `[start, start + len)` where bit `i`
    /// differs from bit `i + shift`.
    pub fn xor_shift_count(&self, start: usize, len: usize, shift: usize) -> usize {
        assert!(start + len + shift <= self.len);
        let mut count = 0;
        let mut pos = start;
        let end = start + len;
        while pos < end {
            let take = (end - pos).min(64);
            let d = (self.window(pos) ^ self.window(pos + shift)) & low_mask(take);
            count += d.count_ones() as usize;
            pos += take;
        }
        count
    }

    /// `len` bits starting at `start` as a new stream.
    pub fn slice(&self, start: usize, len: usize) -> BitStream {
        assert!(start + len <= self.len);
        let mut words = Vec::with_capacity(len.div_ceil(64));
        let mut pos = 0;
        while pos < len {
            let take = (len - pos).min(64);
            words.push(self.window(start + pos) & low_mask(take));
            pos += take;
        }
        BitStream { words, len }
    }

    /// The first `n` bits (at most 64) read as an integer, first bit most
    /// significant.
    pub fn prefix_msb_first(&self, n: usize) -> u64 {
        assert!(n <= 64 && n <= self.len);
        (0..n).fold(0u64, |acc, i| (acc << 1) | self.get(i) as u64)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let n = self.len.div_ceil(8);
        let mut out = Vec::with_capacity(n);
        for w in &self.words {
            out.extend_from_slice(&w.to_le_bytes());
        }
        out.truncate(n);
        out
    }

    /// Unpacks `len` bits from LSB-first bytes.
    pub fn from_bytes(bytes: &[u8], len: usize) -> Result<Self, BitsError> {
        if len > bytes.len() * 8 || bytes.len() * 8 >= len + 8 {
            return Err(BitsError::Length {
                len,
                bytes: bytes.len(),
            });
        }
        let mut words: Vec<u64> = bytes
            .chunks(8)
            .map(|c| {
                let mut buf = [0u8; 8];
                buf[..c.len()].copy_from_slice(c);
                u64::from_le_bytes(buf)
            })
            .collect();
        if !len.is_multiple_of(64) {
            if let Some(last) = words.last_mut() {
                *last &= low_mask(len % 64);
            }
        }
        Ok(Self { words, len })
    }

    pub fn from_ascii(text: &str) -> Result<Self, BitsError> {
        let mut s = BitStream::with_capacity(text.len());
        for c in text.chars() {
            match c {
                '0' => s.push(false),
                '1' => s.push(true),
                c if c.is_whitespace() => {}
                c => return Err(BitsError::BadChar(c)),
            }
        }
        Ok(s)
    }

    pub fn to_ascii(&self) -> String {
        self.iter().map(|b| if b { '1' } else { '0' }).collect()
    }

    pub fn write_file(&self, path: &Path, format: BitFormat) -> Result<(), BitsError> {
        match format {
            BitFormat::Bin => fs::write(path, self.to_bytes())?,
            BitFormat::Txt => fs::write(path, self.to_ascii())?,
        }
        Ok(())
    }

    /// Reads a `.txt` file as ASCII bits and anything else as packed bytes
    /// (every byte contributes eight bits).
    pub fn read_file(path: &Path) -> Result<Self, BitsError> {
        match BitFormat::from_path(path) {
            BitFormat::Txt => Self::from_ascii(&fs::read_to_string(path)?),
            BitFormat::Bin => {
                let bytes = fs::read(path)?;
                Self::from_bytes(&bytes, bytes.len() * 8)
            }
        }
    }
}

impl FromIterator<bool> for BitStream {
    fn from_iter<I: IntoIterator<Item = bool>>(iter: I) -> Self {
        let mut s = BitStream::new();
        for b in iter {
            s.push(b);
        }
        s
    }
}

#[inline]
fn low_mask(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn lsb_first_packing() {
        let s = BitStream::from_ascii("1000000001").unwrap();
        assert_eq!(s.to_bytes(), vec![0x01, 0x02]);
        assert_eq!(s.len(), 10);
    }

    #[test]
    fn byte_length_invariant() {
        assert!(BitStream::from_bytes(&[0, 0], 17).is_err());
        assert!(BitStream::from_bytes(&[0, 0], 8).is_err());
        assert!(BitStream::from_bytes(&[0, 0], 9).is_ok());
    }

    #[test]
    fn rejects_garbage_text() {
        assert!(matches!(BitStream::from_ascii("0102"), Err(BitsError::BadChar('2'))));
    }

    #[test]
    fn prefix_is_msb_first() {
        let s = BitStream::from_ascii("10000000").unwrap();
        assert_eq!(s.prefix_msb_first(8), 0x80);
    }

    #[test]
    fn xor_shift_matches_naive() {
        let s: BitStream = (0..1000u32).map(|i| (i * 7919 % 13) < 6).collect();
        for shift in [1, 5, 63, 64, 65, 200] {
            let naive = (0..500).filter(|&i| s.get(i) != s.get(i + shift)).count();
            assert_eq!(s.xor_shift_count(0, 500, shift), naive);
        }
    }

    proptest! {
        #[test]
        fn bytes_roundtrip(bits in proptest::collection::vec(any::<bool>(), 0..300)) {
            let s: BitStream = bits.iter().copied().collect();
            let back = BitStream::from_bytes(&s.to_bytes(), s.len()).unwrap();
            prop_assert_eq!(&back, &s);
            prop_assert_eq!(BitStream::from_ascii(&s.to_ascii()).unwrap(), s);
        }

        #[test]
        fn slice_and_count(bits in proptest::collection::vec(any::<bool>(), 1..400), a in 0usize..400, b in 0usize..400) {
            let s: BitStream = bits.iter().copied().collect();
            let start = a % bits.len();
            let len = b % (bits.len() - start + 1);
            let sl = s.slice(start, len);
            prop_assert_eq!(sl.iter().collect::<Vec<_>>(), bits[start..start + len].to_vec());
            prop_assert_eq!(s.count_ones_range(start, len), bits[start..start + len].iter().filter(|&&x| x).count());
        }
    }
}
