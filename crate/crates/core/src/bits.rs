//! Fixed-width bit vectors.
//!
//! A [`WideWord`] backs everything that is "a row of bits" in the tile:
//! scratchpad rows, very-wide-register contents, and datapath words.
//! Widths are arbitrary (not limited to machine words) and bit 0 is the
//! least-significant bit. All stored bits above `width` are kept at zero.

use std::fmt;

/// Error raised when parsing hex text into a [`WideWord`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HexError {
    /// The string does not have exactly `ceil(width / 4)` hex digits.
    BadLength { expected: usize, got: usize },
    /// A character is not a hex digit.
    BadDigit { position: usize, ch: char },
    /// The most-significant nibble encodes bits beyond the declared width.
    ExcessBits,
}

impl fmt::Display for HexError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HexError::BadLength { expected, got } => {
                write!(f, "expected {expected} hex digits, got {got}")
            }
            HexError::BadDigit { position, ch } => {
                write!(f, "invalid hex digit {ch:?} at position {position}")
            }
            HexError::ExcessBits => write!(f, "top nibble has bits beyond the declared width"),
        }
    }
}

impl std::error::Error for HexError {}

/// An unsigned bit vector of fixed width.
///
/// Stored as little-endian 64-bit limbs; bit `i` lives in limb `i / 64`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct WideWord {
    width: usize,
    limbs: Vec<u64>,
}

impl WideWord {
    /// All-zero word of the given width.
    pub fn zero(width: usize) -> Self {
        WideWord {
            width,
            limbs: vec![0; width.div_ceil(64)],
        }
    }

    /// Word holding `value` in its low bits. Bits of `value` beyond `width`
    /// are discarded.
    pub fn from_u128(value: u128, width: usize) -> Self {
        let mut w = WideWord::zero(width);
        let lo = width.min(128);
        w.set_u128(0, lo, value);
        w
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn is_zero(&self) -> bool {
        self.limbs.iter().all(|&l| l == 0)
    }

    pub fn bit(&self, index: usize) -> bool {
        assert!(index < self.width, "bit index {index} out of range");
        (self.limbs[index / 64] >> (index % 64)) & 1 == 1
    }

    pub fn set_bit(&mut self, index: usize, value: bool) {
        assert!(index < self.width, "bit index {index} out of range");
        let mask = 1u64 << (index % 64);
        if value {
            self.limbs[index / 64] |= mask;
        } else {
            self.limbs[index / 64] &= !mask;
        }
    }

    /// Reads up to 64 bits starting at `offset` (little-endian).
    fn window_u64(&self, offset: usize) -> u64 {
        let limb = offset / 64;
        let shift = offset % 64;
        if limb >= self.limbs.len() {
            return 0;
        }
        let mut out = self.limbs[limb] >> shift;
        if shift != 0 && limb + 1 < self.limbs.len() {
            out |= self.limbs[limb + 1] << (64 - shift);
        }
        out
    }

    /// Writes the low `count` bits of `value` at `offset`. `count <= 64`.
    fn set_window_u64(&mut self, offset: usize, count: usize, value: u64) {
        debug_assert!(count <= 64 && offset + count <= self.width);
        let value = if count == 64 {
            value
        } else {
            value & ((1u64 << count) - 1)
        };
        let limb = offset / 64;
        let shift = offset % 64;
        let in_first = (64 - shift).min(count);
        let mask_first = if in_first == 64 {
            u64::MAX
        } else {
            ((1u64 << in_first) - 1) << shift
        };
        self.limbs[limb] = (self.limbs[limb] & !mask_first) | ((value << shift) & mask_first);
        if in_first < count {
            let rest = count - in_first;
            let mask_rest = if rest == 64 {
                u64::MAX
            } else {
                (1u64 << rest) - 1
            };
            self.limbs[limb + 1] =
                (self.limbs[limb + 1] & !mask_rest) | ((value >> in_first) & mask_rest);
        }
    }

    /// Extracts `count <= 128` bits starting at `offset` as an integer.
    pub fn get_u128(&self, offset: usize, count: usize) -> u128 {
        assert!(count <= 128, "get_u128 supports at most 128 bits");
        assert!(offset + count <= self.width, "bit range out of word");
        let lo = self.window_u64(offset) as u128;
        let value = if count > 64 {
            lo | ((self.window_u64(offset + 64) as u128) << 64)
        } else {
            lo
        };
        if count == 128 {
            value
        } else {
            value & ((1u128 << count) - 1)
        }
    }

    /// Stores the low `count <= 128` bits of `value` at `offset`.
    pub fn set_u128(&mut self, offset: usize, count: usize, value: u128) {
        assert!(count <= 128, "set_u128 supports at most 128 bits");
        assert!(offset + count <= self.width, "bit range out of word");
        let first = count.min(64);
        self.set_window_u64(offset, first, value as u64);
        if count > 64 {
            self.set_window_u64(offset + 64, count - 64, (value >> 64) as u64);
        }
    }

    /// Copies out the bit range `[offset, offset + count)` as a new word.
    pub fn extract(&self, offset: usize, count: usize) -> WideWord {
        assert!(offset + count <= self.width, "bit range out of word");
        let mut out = WideWord::zero(count);
        let mut done = 0;
        while done < count {
            let step = (count - done).min(64);
            out.set_window_u64(done, step, self.window_u64(offset + done));
            done += step;
        }
        out
    }

    /// Overwrites the bit range starting at `offset` with `other`'s bits.
    pub fn deposit(&mut self, offset: usize, other: &WideWord) {
        assert!(offset + other.width <= self.width, "bit range out of word");
        let mut done = 0;
        while done < other.width {
            let step = (other.width - done).min(64);
            self.set_window_u64(offset + done, step, other.window_u64(done));
            done += step;
        }
    }

    /// Hex rendering, most-significant nibble first, zero-padded to
    /// `ceil(width / 4)` digits.
    pub fn to_hex(&self) -> String {
        let nibbles = self.width.div_ceil(4);
        let mut s = String::with_capacity(nibbles);
        for i in (0..nibbles).rev() {
            let offset = i * 4;
            let count = (self.width - offset).min(4);
            let v = self.get_u128(offset, count) as u32;
            s.push(char::from_digit(v, 16).unwrap());
        }
        s
    }

    /// Parses the fixed-length hex form produced by [`WideWord::to_hex`].
    pub fn from_hex(text: &str, width: usize) -> Result<WideWord, HexError> {
        let nibbles = width.div_ceil(4);
        let digits: Vec<char> = text.chars().collect();
        if digits.len() != nibbles {
            return Err(HexError::BadLength {
                expected: nibbles,
                got: digits.len(),
            });
        }
        let mut out = WideWord::zero(width);
        for (i, ch) in digits.iter().enumerate() {
            let v = ch.to_digit(16).ok_or(HexError::BadDigit {
                position: i,
                ch: *ch,
            })? as u128;
            let offset = (nibbles - 1 - i) * 4;
            let count = (width - offset).min(4);
            if count < 4 && v >> count != 0 {
                return Err(HexError::ExcessBits);
            }
            out.set_u128(offset, count, v);
        }
        Ok(out)
    }
}

impl fmt::Debug for WideWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "WideWord<{}>({})", self.width, self.to_hex())
    }
}

impl fmt::Display for WideWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

/// Sign-extends the low `bits` of `raw` into an `i128`.
pub fn sign_extend(raw: u128, bits: u32) -> i128 {
    debug_assert!((1..=128).contains(&bits));
    if bits == 128 {
        return raw as i128;
    }
    let sign = 1u128 << (bits - 1);
    if raw & sign != 0 {
        (raw | (!0u128 << bits)) as i128
    } else {
        raw as i128
    }
}
