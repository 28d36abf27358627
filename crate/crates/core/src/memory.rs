//! Bit-exact state of the tile memory hierarchy.
//!
//! Three levels: a banked scratchpad ([`SpmState`]) whose banks answer one
//! broadcast address with a single wide row, very wide registers
//! ([`VwrState`]) with a wide memory-side interface and a narrow,
//! slice-restricted datapath-side interface, and (in [`crate::softsimd`])
//! the one-word local registers of each functional unit.
//!
//! Conventions, fixed so tests are unambiguous: bank 0 sits at the
//! least-significant end of a row; word 0 sits at the least-significant end
//! of a register; "left" in the one-word shifter means toward lower word
//! index, with circular wrap-around.
//!
//! Every operation bumps exactly its own counters in [`AccessCounters`];
//! the counters are the model's proxy for data-movement cost.

use std::fmt;

use serde::Serialize;

use crate::bits::{HexError, WideWord};
use crate::config::{SpmConfig, TileConfig};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MemoryError {
    RowOutOfRange {
        row: usize,
        depth: usize,
    },
    WidthMismatch {
        expected: usize,
        got: usize,
    },
    VfuOutOfRange {
        vfu: usize,
        slices: usize,
    },
    WordIndexOutOfRange {
        word: usize,
        limit: usize,
    },
    SliceViolation {
        vfu: usize,
        word: usize,
        slice_start: usize,
        slice_end: usize,
    },
    ShufflerAbsent,
    BadPermutation {
        reason: String,
    },
    ImageTooDeep {
        rows: usize,
        depth: usize,
    },
    ImageParse {
        line: usize,
        error: HexError,
    },
}

impl fmt::Display for MemoryError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MemoryError::RowOutOfRange { row, depth } => {
                write!(f, "row {row} out of range (depth {depth})")
            }
            MemoryError::WidthMismatch { expected, got } => {
                write!(f, "width mismatch: expected {expected} bits, got {got}")
            }
            MemoryError::VfuOutOfRange { vfu, slices } => {
                write!(f, "vfu {vfu} out of range ({slices} slices)")
            }
            MemoryError::WordIndexOutOfRange { word, limit } => {
                write!(f, "word index {word} out of range (limit {limit})")
            }
            MemoryError::SliceViolation { vfu, word, slice_start, slice_end } => write!(
                f,
                "vfu {vfu} may not access word {word}: its slice covers words {slice_start}..{slice_end}"
            ),
            MemoryError::ShufflerAbsent => write!(f, "configuration has no tile shuffler"),
            MemoryError::BadPermutation { reason } => write!(f, "bad permutation: {reason}"),
            MemoryError::ImageTooDeep { rows, depth } => {
                write!(f, "image has {rows} rows but the scratchpad depth is {depth}")
            }
            MemoryError::ImageParse { line, error } => {
                write!(f, "image line {line}: {error}")
            }
        }
    }
}

impl std::error::Error for MemoryError {}

/// Monotonically non-decreasing access counts for one simulation session.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct AccessCounters {
    pub spm_row_reads: u64,
    pub spm_row_writes: u64,
    pub vwr_wide_loads: u64,
    pub vwr_wide_stores: u64,
    pub vwr_word_reads: u64,
    pub vwr_word_writes: u64,
    pub shuffle_steps: u64,
    pub dma_ops: u64,
}

/// Banked scratchpad: `bank_depth_words` rows, each spanning every bank.
/// Bank `b` owns the bit range `[b*bank_row_bits, (b+1)*bank_row_bits)`.
#[derive(Debug, Clone)]
pub struct SpmState {
    config: SpmConfig,
    rows: Vec<WideWord>,
}

impl SpmState {
    pub fn new(config: &SpmConfig) -> Self {
        let width = config.bitwidth_bits as usize;
        SpmState {
            config: config.clone(),
            rows: vec![WideWord::zero(width); config.bank_depth_words as usize],
        }
    }

    pub fn config(&self) -> &SpmConfig {
        &self.config
    }

    pub fn depth(&self) -> usize {
        self.rows.len()
    }

    pub fn row_width(&self) -> usize {
        self.config.bitwidth_bits as usize
    }

    fn check_row(&self, row: usize) -> Result<(), MemoryError> {
        if row >= self.rows.len() {
            return Err(MemoryError::RowOutOfRange {
                row,
                depth: self.rows.len(),
            });
        }
        Ok(())
    }

    /// One broadcast read: all banks answer, yielding the whole row.
    pub fn read_row(
        &self,
        row: usize,
        counters: &mut AccessCounters,
    ) -> Result<WideWord, MemoryError> {
        self.check_row(row)?;
        counters.spm_row_reads += 1;
        Ok(self.rows[row].clone())
    }

    /// One broadcast write of a full row.
    pub fn write_row(
        &mut self,
        row: usize,
        value: &WideWord,
        counters: &mut AccessCounters,
    ) -> Result<(), MemoryError> {
        self.check_row(row)?;
        if value.width() != self.row_width() {
            return Err(MemoryError::WidthMismatch {
                expected: self.row_width(),
                got: value.width(),
            });
        }
        self.rows[row] = value.clone();
        counters.spm_row_writes += 1;
        Ok(())
    }

    /// External-port bulk load (no access counting): rows beyond the image
    /// are left as they were.
    pub fn load_image(&mut self, image: &[WideWord]) -> Result<(), MemoryError> {
        if image.len() > self.rows.len() {
            return Err(MemoryError::ImageTooDeep {
                rows: image.len(),
                depth: self.rows.len(),
            });
        }
        for (i, row) in image.iter().enumerate() {
            if row.width() != self.row_width() {
                return Err(MemoryError::WidthMismatch {
                    expected: self.row_width(),
                    got: row.width(),
                });
            }
            self.rows[i] = row.clone();
        }
        Ok(())
    }

    pub fn image(&self) -> &[WideWord] {
        &self.rows
    }
}

/// Parses a hex-text memory image: one wide word per line, most-significant
/// nibble first. Blank lines are ignored.
pub fn parse_image(text: &str, width_bits: usize) -> Result<Vec<WideWord>, MemoryError> {
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let row = WideWord::from_hex(line, width_bits)
            .map_err(|error| MemoryError::ImageParse { line: i + 1, error })?;
        rows.push(row);
    }
    Ok(rows)
}

/// Formats rows in the hex layout accepted by [`parse_image`].
pub fn format_image(rows: &[WideWord]) -> String {
    let mut out = String::new();
    for row in rows {
        out.push_str(&row.to_hex());
        out.push('\n');
    }
    out
}

/// One very wide register: a row-wide bit vector with word/slice structure.
///
/// Word `w` occupies bits `[w*word_width, (w+1)*word_width)`; slice `s` owns
/// words `[s*words_per_slice, (s+1)*words_per_slice)`.
#[derive(Debug, Clone)]
pub struct VwrState {
    bitwidth_bits: usize,
    word_width_bits: usize,
    words_per_vwr: usize,
    words_per_slice: usize,
    slices_per_vwr: usize,
    has_shuffler: bool,
    bits: WideWord,
}

impl VwrState {
    pub fn new(
        bitwidth_bits: usize,
        word_width_bits: usize,
        words_per_slice: usize,
        slices_per_vwr: usize,
        has_shuffler: bool,
    ) -> Self {
        assert!(word_width_bits > 0 && bitwidth_bits.is_multiple_of(word_width_bits));
        VwrState {
            bitwidth_bits,
            word_width_bits,
            words_per_vwr: bitwidth_bits / word_width_bits,
            words_per_slice,
            slices_per_vwr,
            has_shuffler,
            bits: WideWord::zero(bitwidth_bits),
        }
    }

    pub fn for_config(config: &TileConfig) -> Self {
        VwrState::new(
            config.vwr.bitwidth_bits as usize,
            config.word_width_bits as usize,
            config.vwr.words_per_slice as usize,
            config.vwr.slices_per_vwr as usize,
            config.has_shuffler,
        )
    }

    pub fn bits(&self) -> &WideWord {
        &self.bits
    }

    pub fn words_per_vwr(&self) -> usize {
        self.words_per_vwr
    }

    pub fn word_width_bits(&self) -> usize {
        self.word_width_bits
    }

    /// Direct (uncounted) view of word `w`; used by tests and diagnostics.
    pub fn word(&self, w: usize) -> Result<WideWord, MemoryError> {
        if w >= self.words_per_vwr {
            return Err(MemoryError::WordIndexOutOfRange {
                word: w,
                limit: self.words_per_vwr,
            });
        }
        Ok(self
            .bits
            .extract(w * self.word_width_bits, self.word_width_bits))
    }

    fn set_word(&mut self, w: usize, value: &WideWord) -> Result<(), MemoryError> {
        if w >= self.words_per_vwr {
            return Err(MemoryError::WordIndexOutOfRange {
                word: w,
                limit: self.words_per_vwr,
            });
        }
        if value.width() != self.word_width_bits {
            return Err(MemoryError::WidthMismatch {
                expected: self.word_width_bits,
                got: value.width(),
            });
        }
        self.bits.deposit(w * self.word_width_bits, value);
        Ok(())
    }

    /// Wide-interface fill from a scratchpad row.
    pub fn load_wide(
        &mut self,
        spm: &SpmState,
        row: usize,
        counters: &mut AccessCounters,
    ) -> Result<(), MemoryError> {
        let value = spm.read_row(row, counters)?;
        if value.width() != self.bitwidth_bits {
            return Err(MemoryError::WidthMismatch {
                expected: self.bitwidth_bits,
                got: value.width(),
            });
        }
        self.bits = value;
        counters.vwr_wide_loads += 1;
        Ok(())
    }

    /// Wide-interface spill to a scratchpad row.
    pub fn store_wide(
        &self,
        spm: &mut SpmState,
        row: usize,
        counters: &mut AccessCounters,
    ) -> Result<(), MemoryError> {
        spm.write_row(row, &self.bits, counters)?;
        counters.vwr_wide_stores += 1;
        Ok(())
    }

    fn slice_bounds(&self, vfu: usize) -> Result<(usize, usize), MemoryError> {
        if vfu >= self.slices_per_vwr {
            return Err(MemoryError::VfuOutOfRange {
                vfu,
                slices: self.slices_per_vwr,
            });
        }
        Ok((vfu * self.words_per_slice, (vfu + 1) * self.words_per_slice))
    }

    /// Narrow-interface read of a global word index on behalf of `vfu`.
    /// The requesting unit may only touch words of its own slice.
    pub fn read_word_global(
        &self,
        vfu: usize,
        word: usize,
        counters: &mut AccessCounters,
    ) -> Result<WideWord, MemoryError> {
        let (start, end) = self.slice_bounds(vfu)?;
        if word < start || word >= end {
            return Err(MemoryError::SliceViolation {
                vfu,
                word,
                slice_start: start,
                slice_end: end,
            });
        }
        let value = self.word(word)?;
        counters.vwr_word_reads += 1;
        Ok(value)
    }

    /// Narrow-interface write of a global word index on behalf of `vfu`.
    pub fn write_word_global(
        &mut self,
        vfu: usize,
        word: usize,
        value: &WideWord,
        counters: &mut AccessCounters,
    ) -> Result<(), MemoryError> {
        let (start, end) = self.slice_bounds(vfu)?;
        if word < start || word >= end {
            return Err(MemoryError::SliceViolation {
                vfu,
                word,
                slice_start: start,
                slice_end: end,
            });
        }
        self.set_word(word, value)?;
        counters.vwr_word_writes += 1;
        Ok(())
    }

    /// Slice-relative read: word `word_in_slice` of `vfu`'s own slice.
    pub fn read_word(
        &self,
        vfu: usize,
        word_in_slice: usize,
        counters: &mut AccessCounters,
    ) -> Result<WideWord, MemoryError> {
        let (start, _) = self.slice_bounds(vfu)?;
        if word_in_slice >= self.words_per_slice {
            return Err(MemoryError::WordIndexOutOfRange {
                word: word_in_slice,
                limit: self.words_per_slice,
            });
        }
        self.read_word_global(vfu, start + word_in_slice, counters)
    }

    /// Slice-relative write.
    pub fn write_word(
        &mut self,
        vfu: usize,
        word_in_slice: usize,
        value: &WideWord,
        counters: &mut AccessCounters,
    ) -> Result<(), MemoryError> {
        let (start, _) = self.slice_bounds(vfu)?;
        if word_in_slice >= self.words_per_slice {
            return Err(MemoryError::WordIndexOutOfRange {
                word: word_in_slice,
                limit: self.words_per_slice,
            });
        }
        self.write_word_global(vfu, start + word_in_slice, value, counters)
    }

    /// One step of the one-word shifter: every word moves one position toward
    /// lower word index, with word 0 wrapping to the top.
    pub fn shuffle_step(&mut self, counters: &mut AccessCounters) -> Result<(), MemoryError> {
        if !self.has_shuffler {
            return Err(MemoryError::ShufflerAbsent);
        }
        let w = self.word_width_bits;
        let low = self.bits.extract(0, w);
        let rest = self.bits.extract(w, self.bitwidth_bits - w);
        self.bits.deposit(0, &rest);
        self.bits.deposit(self.bitwidth_bits - w, &low);
        counters.shuffle_steps += 1;
        Ok(())
    }

    /// System-path rearrangement: new word `w` takes the old word
    /// `permutation[w]`. Costs one DMA op per word moved.
    pub fn dma_rearrange(
        &mut self,
        permutation: &[usize],
        counters: &mut AccessCounters,
    ) -> Result<(), MemoryError> {
        let n = self.words_per_vwr;
        if permutation.len() != n {
            return Err(MemoryError::BadPermutation {
                reason: format!("length {} != words_per_vwr {n}", permutation.len()),
            });
        }
        let mut seen = vec![false; n];
        for &p in permutation {
            if p >= n {
                return Err(MemoryError::BadPermutation {
                    reason: format!("source index {p} out of range {n}"),
                });
            }
            if seen[p] {
                return Err(MemoryError::BadPermutation {
                    reason: format!("source index {p} repeated"),
                });
            }
            seen[p] = true;
        }
        let old = self.bits.clone();
        for (w, &p) in permutation.iter().enumerate() {
            let word = old.extract(p * self.word_width_bits, self.word_width_bits);
            self.bits.deposit(w * self.word_width_bits, &word);
        }
        counters.dma_ops += n as u64;
        Ok(())
    }

    /// Test/diagnostic backdoor to set the raw contents.
    pub fn set_bits(&mut self, bits: WideWord) -> Result<(), MemoryError> {
        if bits.width() != self.bitwidth_bits {
            return Err(MemoryError::WidthMismatch {
                expected: self.bitwidth_bits,
                got: bits.width(),
            });
        }
        self.bits = bits;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::preset;
    use proptest::prelude::*;

    fn random_row(width: usize, seed: u64) -> WideWord {
        let mut w = WideWord::zero(width);
        let mut s = seed | 1;
        for i in 0..width {
            s ^= s << 13;
            s ^= s >> 7;
            s ^= s << 17;
            w.set_bit(i, s & 1 == 1);
        }
        w
    }

    #[test]
    fn fresh_spm_reads_zero() {
        let a = preset("A").unwrap();
        let spm = SpmState::new(&a.spm);
        let mut ctr = AccessCounters::default();
        let row = spm.read_row(0, &mut ctr).unwrap();
        assert!(row.is_zero());
        assert_eq!(row.width(), 1536);
        assert_eq!(ctr.spm_row_reads, 1);
    }

    #[test]
    fn read_after_write_and_last_write_wins() {
        let a = preset("A").unwrap();
        let mut spm = SpmState::new(&a.spm);
        let mut ctr = AccessCounters::default();
        let p1 = random_row(1536, 11);
        let p2 = random_row(1536, 22);
        spm.write_row(5, &p1, &mut ctr).unwrap();
        assert_eq!(spm.read_row(5, &mut ctr).unwrap(), p1);
        spm.write_row(5, &p2, &mut ctr).unwrap();
        assert_eq!(spm.read_row(5, &mut ctr).unwrap(), p2);
        assert_eq!(ctr.spm_row_writes, 2);
        assert_eq!(ctr.spm_row_reads, 2);
    }

    #[test]
    fn row_64_is_out_of_range_on_depth_64() {
        let a = preset("A").unwrap();
        let spm = SpmState::new(&a.spm);
        let mut ctr = AccessCounters::default();
        assert!(matches!(
            spm.read_row(64, &mut ctr),
            Err(MemoryError::RowOutOfRange { row: 64, depth: 64 })
        ));
        assert_eq!(ctr.spm_row_reads, 0, "failed access must not count");
    }

    #[test]
    fn wrong_width_write_is_rejected() {
        let a = preset("A").unwrap();
        let mut spm = SpmState::new(&a.spm);
        let mut ctr = AccessCounters::default();
        let narrow = WideWord::zero(1535);
        assert!(matches!(
            spm.write_row(0, &narrow, &mut ctr),
            Err(MemoryError::WidthMismatch {
                expected: 1536,
                got: 1535
            })
        ));
    }

    #[test]
    fn wide_load_store_copies_rows() {
        let a = preset("A").unwrap();
        let mut spm = SpmState::new(&a.spm);
        let mut vwr = VwrState::for_config(&a);
        let mut ctr = AccessCounters::default();
        let p = random_row(1536, 33);
        spm.write_row(3, &p, &mut ctr).unwrap();
        vwr.load_wide(&spm, 3, &mut ctr).unwrap();
        vwr.store_wide(&mut spm, 7, &mut ctr).unwrap();
        assert_eq!(spm.read_row(7, &mut ctr).unwrap(), p);
        assert_eq!(ctr.vwr_wide_loads, 1);
        assert_eq!(ctr.vwr_wide_stores, 1);
    }

    #[test]
    fn double_load_is_idempotent_but_counts_twice() {
        let b = preset("B").unwrap();
        let mut spm = SpmState::new(&b.spm);
        let mut vwr = VwrState::for_config(&b);
        let mut ctr = AccessCounters::default();
        let p = random_row(3072, 44);
        spm.write_row(9, &p, &mut ctr).unwrap();
        vwr.load_wide(&spm, 9, &mut ctr).unwrap();
        let first = vwr.bits().clone();
        vwr.load_wide(&spm, 9, &mut ctr).unwrap();
        assert_eq!(vwr.bits(), &first);
        assert_eq!(first.width(), 3072, "one wide load moves the full row");
        assert_eq!(ctr.vwr_wide_loads, 2);
        assert_eq!(ctr.spm_row_reads, 2);
    }

    #[test]
    fn slice_relative_read_hits_the_expected_global_word() {
        // 2 words per slice: unit 3 reading word-in-slice 1 sees global word 7
        let a = preset("A").unwrap();
        let mut vwr = VwrState::for_config(&a);
        let mut ctr = AccessCounters::default();
        vwr.set_bits(random_row(1536, 55)).unwrap();
        let via_slice = vwr.read_word(3, 1, &mut ctr).unwrap();
        assert_eq!(via_slice, vwr.word(7).unwrap());
        assert_eq!(ctr.vwr_word_reads, 1);

        // 1 word per slice: unit k always reads global word k
        let d = preset("D").unwrap();
        let mut vwr_d = VwrState::for_config(&d);
        vwr_d.set_bits(random_row(1536, 66)).unwrap();
        for k in 0..8 {
            let got = vwr_d.read_word(k, 0, &mut ctr).unwrap();
            assert_eq!(got, vwr_d.word(k).unwrap());
        }
    }

    #[test]
    fn word_in_slice_range_is_enforced() {
        let a = preset("A").unwrap();
        let vwr = VwrState::for_config(&a);
        let mut ctr = AccessCounters::default();
        assert!(matches!(
            vwr.read_word(0, 2, &mut ctr),
            Err(MemoryError::WordIndexOutOfRange { word: 2, limit: 2 })
        ));
    }

    #[test]
    fn global_access_outside_own_slice_is_a_violation() {
        let a = preset("A").unwrap();
        let vwr = VwrState::for_config(&a);
        let mut ctr = AccessCounters::default();
        let err = vwr.read_word_global(0, 5, &mut ctr).unwrap_err();
        assert!(matches!(
            err,
            MemoryError::SliceViolation {
                vfu: 0,
                word: 5,
                ..
            }
        ));
        assert_eq!(ctr.vwr_word_reads, 0);
    }

    #[test]
    fn shuffle_rotates_toward_lower_words() {
        let d = preset("D").unwrap(); // 8 words of 192 bits, shuffler present
        let mut vwr = VwrState::for_config(&d);
        let mut ctr = AccessCounters::default();
        let mut bits = WideWord::zero(1536);
        for w in 0..8u128 {
            bits.set_u128(w as usize * 192, 64, w + 1);
        }
        vwr.set_bits(bits).unwrap();
        vwr.shuffle_step(&mut ctr).unwrap();
        let words: Vec<u128> = (0..8)
            .map(|w| vwr.word(w).unwrap().get_u128(0, 64))
            .collect();
        assert_eq!(words, vec![2, 3, 4, 5, 6, 7, 8, 1]);
        assert_eq!(ctr.shuffle_steps, 1);
    }

    #[test]
    fn full_rotation_is_identity() {
        let d = preset("D").unwrap();
        let mut vwr = VwrState::for_config(&d);
        let mut ctr = AccessCounters::default();
        let original = random_row(1536, 77);
        vwr.set_bits(original.clone()).unwrap();
        for _ in 0..vwr.words_per_vwr() {
            vwr.shuffle_step(&mut ctr).unwrap();
        }
        assert_eq!(vwr.bits(), &original);
    }

    #[test]
    fn shuffler_absent_is_an_error() {
        let a = preset("A").unwrap();
        let mut vwr = VwrState::for_config(&a);
        let mut ctr = AccessCounters::default();
        assert!(matches!(
            vwr.shuffle_step(&mut ctr),
            Err(MemoryError::ShufflerAbsent)
        ));
    }

    #[test]
    fn dma_identity_keeps_content_but_counts() {
        let a = preset("A").unwrap();
        let mut vwr = VwrState::for_config(&a);
        let mut ctr = AccessCounters::default();
        let original = random_row(1536, 88);
        vwr.set_bits(original.clone()).unwrap();
        let identity: Vec<usize> = (0..16).collect();
        vwr.dma_rearrange(&identity, &mut ctr).unwrap();
        assert_eq!(vwr.bits(), &original);
        assert_eq!(ctr.dma_ops, 16);
    }

    #[test]
    fn dma_rotation_equals_shuffle_step() {
        let d = preset("D").unwrap();
        let mut via_shuffle = VwrState::for_config(&d);
        let mut via_dma = VwrState::for_config(&d);
        let mut ctr = AccessCounters::default();
        let original = random_row(1536, 99);
        via_shuffle.set_bits(original.clone()).unwrap();
        via_dma.set_bits(original).unwrap();
        via_shuffle.shuffle_step(&mut ctr).unwrap();
        let rotate: Vec<usize> = (0..8).map(|w| (w + 1) % 8).collect();
        via_dma.dma_rearrange(&rotate, &mut ctr).unwrap();
        assert_eq!(via_shuffle.bits(), via_dma.bits());
    }

    #[test]
    fn dma_rejects_non_bijections() {
        let a = preset("A").unwrap();
        let mut vwr = VwrState::for_config(&a);
        let mut ctr = AccessCounters::default();
        let mut repeated: Vec<usize> = (0..16).collect();
        repeated[3] = 5;
        repeated[5] = 5;
        assert!(matches!(
            vwr.dma_rearrange(&repeated, &mut ctr),
            Err(MemoryError::BadPermutation { .. })
        ));
        assert!(matches!(
            vwr.dma_rearrange(&[0, 1], &mut ctr),
            Err(MemoryError::BadPermutation { .. })
        ));
        assert_eq!(ctr.dma_ops, 0);
    }

    #[test]
    fn image_roundtrip_and_msb_first_layout() {
        let a = preset("A").unwrap();
        let mut spm = SpmState::new(&a.spm);
        let rows: Vec<WideWord> = (0..4).map(|i| random_row(1536, 1000 + i)).collect();
        spm.load_image(&rows).unwrap();
        let text = format_image(spm.image());
        let parsed = parse_image(&text, 1536).unwrap();
        assert_eq!(parsed.len(), 64);
        assert_eq!(&parsed[..4], &rows[..]);

        // spot-check orientation on a small word
        let one = WideWord::from_u128(1, 8);
        assert_eq!(format_image(&[one]), "01\n");
    }

    #[test]
    fn image_parse_reports_line() {
        let err = parse_image("00\nzz\n", 8).unwrap_err();
        assert!(matches!(err, MemoryError::ImageParse { line: 2, .. }));
    }

    proptest! {
        /// Storing a register back to the row it was loaded from leaves the
        /// scratchpad unchanged.
        #[test]
        fn wide_roundtrip_preserves_spm(seed in any::<u64>(), row in 0usize..64) {
            let d = preset("D").unwrap();
            let mut spm = SpmState::new(&d.spm);
            let mut vwr = VwrState::for_config(&d);
            let mut ctr = AccessCounters::default();
            let p = random_row(1536, seed);
            spm.write_row(row, &p, &mut ctr).unwrap();
            let before: Vec<WideWord> = spm.image().to_vec();
            vwr.load_wide(&spm, row, &mut ctr).unwrap();
            vwr.store_wide(&mut spm, row, &mut ctr).unwrap();
            prop_assert_eq!(spm.image(), &before[..]);
        }

        /// A permutation followed by its inverse restores the register.
        #[test]
        fn permutation_inverse_is_identity(seed in any::<u64>(), perm_seed in any::<u64>()) {
            let a = preset("A").unwrap();
            let mut vwr = VwrState::for_config(&a);
            let mut ctr = AccessCounters::default();
            let original = random_row(1536, seed);
            vwr.set_bits(original.clone()).unwrap();

            // Fisher-Yates from a simple xorshift stream
            let n = 16usize;
            let mut perm: Vec<usize> = (0..n).collect();
            let mut s = perm_seed | 1;
            for i in (1..n).rev() {
                s ^= s << 13; s ^= s >> 7; s ^= s << 17;
                perm.swap(i, (s as usize) % (i + 1));
            }
            let mut inverse = vec![0usize; n];
            for (w, &p) in perm.iter().enumerate() {
                inverse[p] = w;
            }
            vwr.dma_rearrange(&perm, &mut ctr).unwrap();
            vwr.dma_rearrange(&inverse, &mut ctr).unwrap();
            prop_assert_eq!(vwr.bits(), &original);
            prop_assert_eq!(ctr.dma_ops, 32);
        }

        /// Slice-relative reads only ever observe bits of the addressed word.
        #[test]
        fn slice_confinement_against_shadow(seed in any::<u64>(), vfu in 0usize..8, w in 0usize..2) {
            let a = preset("A").unwrap();
            let mut vwr = VwrState::for_config(&a);
            let mut ctr = AccessCounters::default();
            let bits = random_row(1536, seed);
            vwr.set_bits(bits.clone()).unwrap();
            let got = vwr.read_word(vfu, w, &mut ctr).unwrap();
            let global = vfu * 2 + w;
            let shadow = bits.extract(global * 96, 96);
            prop_assert_eq!(got, shadow);
        }
    }
}
