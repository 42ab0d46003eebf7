use std::fmt;
use std::ops::Range;

use crate::error::{Error, Result};

/// A packed, fixed-length sequence of bits.
///
/// Bit `i` lives in word `i / 64` at position `i % 64`. Bits past `len` in the
/// last word are always zero, which keeps `weight` and equality cheap.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct BitVector {
    words: Vec<u64>,
    len: usize,
}

#[inline]
fn words_for(len: usize) -> usize {
    len.div_ceil(64)
}

impl BitVector {
    pub fn zeros(len: usize) -> Self {
        BitVector {
            words: vec![0; words_for(len)],
            len,
        }
    }

    pub fn ones(len: usize) -> Self {
        let mut v = BitVector {
            words: vec![!0; words_for(len)],
            len,
        };
        v.clear_tail();
        v
    }

    /// Builds a vector from raw words; bits beyond `len` are discarded.
    pub fn from_words(mut words: Vec<u64>, len: usize) -> Self {
        words.resize(words_for(len), 0);
        let mut v = BitVector { words, len };
        v.clear_tail();
        v
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut v = BitVector::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b {
                v.set(i, true);
            }
        }
        v
    }

    /// Parses a string of `0`/`1` characters, position 0 first.
    pub fn parse_binary(s: &str) -> Result<Self> {
        let mut v = BitVector::zeros(s.len());
        for (i, c) in s.chars().enumerate() {
            match c {
                '0' => {}
                '1' => v.set(i, true),
                _ => {
                    return Err(Error::Format(format!(
                        "unexpected character {c:?} in bit string"
                    )))
                }
            }
        }
        Ok(v)
    }

    /// Big-endian binary representation of `value` in exactly `width` bits.
    ///
    /// This is the `Bin(d, b)` map: most significant bit first.
    pub fn from_uint(value: u128, width: usize) -> Self {
        let mut v = BitVector::zeros(width);
        for i in 0..width.min(128) {
            if (value >> i) & 1 == 1 {
                v.set(width - 1 - i, true);
            }
        }
        v
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
    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(
            i < self.len,
            "bit index {i} out of range for length {}",
            self.len
        );
        (self.words[i >> 6] >> (i & 63)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, bit: bool) {
        assert!(
            i < self.len,
            "bit index {i} out of range for length {}",
            self.len
        );
        let mask = 1u64 << (i & 63);
        if bit {
            self.words[i >> 6] |= mask;
        } else {
            self.words[i >> 6] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        assert!(
            i < self.len,
            "bit index {i} out of range for length {}",
            self.len
        );
        self.words[i >> 6] ^= 1u64 << (i & 63);
    }

    pub fn push(&mut self, bit: bool) {
        if self.len.is_multiple_of(64) {
            self.words.push(0);
        }
        self.len += 1;
        self.set(self.len - 1, bit);
    }

    /// Appends the low `width` bits of `value` (bit 0 first).
    pub fn push_bits(&mut self, value: u64, width: usize) {
        assert!(width <= 64);
        if width == 0 {
            return;
        }
        let value = if width == 64 {
            value
        } else {
            value & ((1u64 << width) - 1)
        };
        let shift = self.len % 64;
        if shift == 0 {
            self.words.push(value);
        } else {
            let last = self.words.len() - 1;
            self.words[last] |= value << shift;
            if shift + width > 64 {
                self.words.push(value >> (64 - shift));
            }
        }
        self.len += width;
    }

    /// Appends `other` in place (`self ∘ other`).
    pub fn extend(&mut self, other: &BitVector) {
        let shift = self.len % 64;
        if shift == 0 {
            self.words.extend_from_slice(&other.words);
        } else {
            for &w in &other.words {
                let last = self.words.len() - 1;
                self.words[last] |= w << shift;
                self.words.push(w >> (64 - shift));
            }
        }
        self.len += other.len;
        self.words.truncate(words_for(self.len));
    }

    pub fn concat(&self, other: &BitVector) -> BitVector {
        let mut out = self.clone();
        out.extend(other);
        out
    }

    /// Number of one bits.
    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Number of one bits inside `range`.
    pub fn weight_in(&self, range: Range<usize>) -> usize {
        assert!(range.end <= self.len && range.start <= range.end);
        let (start, end) = (range.start, range.end);
        if start == end {
            return 0;
        }
        let (ws, we) = (start >> 6, (end - 1) >> 6);
        let lo_mask = !0u64 << (start & 63);
        let hi_mask = !0u64 >> (63 - ((end - 1) & 63));
        if ws == we {
            return (self.words[ws] & lo_mask & hi_mask).count_ones() as usize;
        }
        let mut total = (self.words[ws] & lo_mask).count_ones() as usize;
        for w in &self.words[ws + 1..we] {
            total += w.count_ones() as usize;
        }
        total + (self.words[we] & hi_mask).count_ones() as usize
    }

    /// Reads up to 64 bits starting at `start` as a little-endian word
    /// (bit `start` lands in bit 0 of the result).
    #[inline]
    pub fn word_at(&self, start: usize, width: usize) -> u64 {
        debug_assert!(width <= 64 && start + width <= self.len);
        if width == 0 {
            return 0;
        }
        let (w, off) = (start >> 6, start & 63);
        let mut x = self.words[w] >> off;
        if off != 0 && off + width > 64 {
            x |= self.words[w + 1] << (64 - off);
        }
        if width < 64 {
            x &= (1u64 << width) - 1;
        }
        x
    }

    /// Writes the low `width` bits of `value` starting at `start`.
    pub fn set_word_at(&mut self, start: usize, width: usize, value: u64) {
        assert!(width <= 64 && start + width <= self.len);
        for i in 0..width {
            self.set(start + i, (value >> i) & 1 == 1);
        }
    }

    pub fn slice(&self, range: Range<usize>) -> BitVector {
        assert!(range.start <= range.end && range.end <= self.len);
        let len = range.end - range.start;
        let mut words = Vec::with_capacity(words_for(len));
        let mut pos = range.start;
        while pos < range.end {
            let width = (range.end - pos).min(64);
            words.push(self.word_at(pos, width));
            pos += width;
        }
        BitVector { words, len }
    }

    /// Overwrites `self[start..start + src.len()]` with `src`.
    pub fn write_slice(&mut self, start: usize, src: &BitVector) {
        assert!(start + src.len <= self.len);
        let mut pos = 0;
        while pos < src.len {
            let width = (src.len - pos).min(64);
            let value = src.word_at(pos, width);
            let (w, off) = ((start + pos) >> 6, (start + pos) & 63);
            let mask = if width == 64 { !0 } else { (1u64 << width) - 1 };
            self.words[w] = (self.words[w] & !(mask << off)) | (value << off);
            if off != 0 && off + width > 64 {
                let spill = off + width - 64;
                let hi_mask = (1u64 << spill) - 1;
                self.words[w + 1] = (self.words[w + 1] & !hi_mask) | (value >> (64 - off));
            }
            pos += width;
        }
    }

    /// Keeps only the listed positions, in the order given.
    pub fn restrict(&self, indices: &[usize]) -> BitVector {
        let mut out = BitVector::zeros(indices.len());
        for (k, &i) in indices.iter().enumerate() {
            if self.get(i) {
                out.set(k, true);
            }
        }
        out
    }

    /// Interprets the vector as a big-endian unsigned integer (inverse of `from_uint`).
    pub fn to_uint(&self) -> Result<u128> {
        if self.len > 128 {
            return Err(Error::InvalidParams(format!(
                "{} bits do not fit in u128",
                self.len
            )));
        }
        let mut v = 0u128;
        for i in 0..self.len {
            v = (v << 1) | self.get(i) as u128;
        }
        Ok(v)
    }

    /// Parity of the bitwise AND, i.e. the GF(2) inner product.
    pub fn dot(&self, other: &BitVector) -> bool {
        assert_eq!(self.len, other.len);
        let mut acc = 0u64;
        for (a, b) in self.words.iter().zip(&other.words) {
            acc ^= a & b;
        }
        acc.count_ones() & 1 == 1
    }

    pub fn xor_assign(&mut self, other: &BitVector) {
        assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn hamming_distance(&self, other: &BitVector) -> usize {
        assert_eq!(self.len, other.len);
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a ^ b).count_ones() as usize)
            .sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    /// Positions of the one bits, ascending.
    pub fn ones_positions(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.weight());
        for (wi, &w) in self.words.iter().enumerate() {
            let mut x = w;
            while x != 0 {
                out.push(wi * 64 + x.trailing_zeros() as usize);
                x &= x - 1;
            }
        }
        out
    }

    /// Hex of the bit string read MSB-first in nibbles; the final nibble is
    /// zero-padded on the right.
    pub fn to_hex(&self) -> String {
        let mut s = String::with_capacity(self.len.div_ceil(4));
        for chunk in 0..self.len.div_ceil(4) {
            let mut nib = 0u8;
            for k in 0..4 {
                let i = chunk * 4 + k;
                nib <<= 1;
                if i < self.len && self.get(i) {
                    nib |= 1;
                }
            }
            s.push(char::from_digit(nib as u32, 16).unwrap());
        }
        s
    }

    pub fn from_hex(hex: &str, len: usize) -> Result<Self> {
        let hex = hex.trim();
        if hex.len() != len.div_ceil(4) {
            return Err(Error::Format(format!(
                "hex string has {} digits, expected {} for {len} bits",
                hex.len(),
                len.div_ceil(4)
            )));
        }
        let mut v = BitVector::zeros(len);
        for (chunk, c) in hex.chars().enumerate() {
            let nib = c
                .to_digit(16)
                .ok_or_else(|| Error::Format(format!("bad hex digit {c:?}")))?;
            for k in 0..4 {
                let i = chunk * 4 + k;
                let bit = (nib >> (3 - k)) & 1 == 1;
                if i < len {
                    v.set(i, bit);
                } else if bit {
                    return Err(Error::Format("nonzero padding in hex string".into()));
                }
            }
        }
        Ok(v)
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

impl fmt::Display for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.len <= 128 {
            write!(f, "BitVector({self})")
        } else {
            write!(f, "BitVector(len={}, weight={})", self.len, self.weight())
        }
    }
}

impl FromIterator<bool> for BitVector {
    fn from_iter<I: IntoIterator<Item = bool>>(iter: I) -> Self {
        let mut v = BitVector::zeros(0);
        for b in iter {
            v.push(b);
        }
        v
    }
}

/// Hamming weight, the `wt(·)` of the weight-residue encodings.
pub fn weight(v: &BitVector) -> usize {
    v.weight()
}
