//! Software-defined SIMD on plain wide integers.
//!
//! Nothing here needs SIMD hardware: a word is an ordinary [`WideWord`] and
//! the active [`SubwordConfig`] decides how its bits are read. Lane isolation
//! is enforced by masking, so no carry, shift or rounding effect ever crosses
//! a lane boundary. ALU semantics are modular (wrap within the subword);
//! saturation exists only in [`dpu_requantize`].
//!
//! Constant multiplication never uses a hardware multiplier: the constant is
//! canonical-signed-digit encoded and applied as a sequence of lane-isolated
//! shifts and adds/subtracts, one per nonzero digit.

use std::fmt;

use crate::bits::{sign_extend, WideWord};

/// Subword widths the datapath can be configured for. Words wider than
/// 96 bits additionally support 64- and 96-bit subwords.
pub const BASE_SUBWORD_BITS: [u32; 10] = [2, 3, 4, 6, 8, 12, 16, 24, 32, 48];
pub const WIDE_EXTRA_SUBWORD_BITS: [u32; 2] = [64, 96];

/// Default bound on constants accepted by the signed-digit encoder.
pub const DEFAULT_CSD_MAX: i64 = 1 << 31;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SimdError {
    UnsupportedSubword {
        word_width_bits: u32,
        subword_bits: u32,
    },
    WidthMismatch {
        expected: usize,
        got: usize,
    },
    LaneCountMismatch {
        expected: u32,
        got: usize,
    },
    ValueOutOfRange {
        lane: usize,
        value: i128,
        subword_bits: u32,
        signed: bool,
    },
    ShiftOutOfRange {
        amount: u32,
        subword_bits: u32,
    },
    ConstantOutOfRange {
        value: i64,
        max: i64,
    },
    IdenticalWidths {
        subword_bits: u32,
    },
    IncompatibleLanes {
        from: u32,
        to: u32,
    },
    NoActiveConfig,
    RegisterOutOfRange {
        index: usize,
        count: usize,
    },
}

impl fmt::Display for SimdError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SimdError::UnsupportedSubword {
                word_width_bits,
                subword_bits,
            } => write!(
                f,
                "subword width {subword_bits} is not supported for {word_width_bits}-bit words"
            ),
            SimdError::WidthMismatch { expected, got } => {
                write!(
                    f,
                    "word width mismatch: expected {expected} bits, got {got}"
                )
            }
            SimdError::LaneCountMismatch { expected, got } => {
                write!(f, "expected {expected} lane values, got {got}")
            }
            SimdError::ValueOutOfRange {
                lane,
                value,
                subword_bits,
                signed,
            } => write!(
                f,
                "value {value} in lane {lane} not representable in {subword_bits} {} bits",
                if *signed { "signed" } else { "unsigned" }
            ),
            SimdError::ShiftOutOfRange {
                amount,
                subword_bits,
            } => {
                write!(f, "shift by {amount} exceeds subword width {subword_bits}")
            }
            SimdError::ConstantOutOfRange { value, max } => {
                write!(f, "constant {value} exceeds encoder bound {max}")
            }
            SimdError::IdenticalWidths { subword_bits } => {
                write!(
                    f,
                    "requantize requires distinct widths (both are {subword_bits})"
                )
            }
            SimdError::IncompatibleLanes { from, to } => {
                write!(
                    f,
                    "incompatible lane geometries: {from} source vs {to} target lanes"
                )
            }
            SimdError::NoActiveConfig => write!(f, "no active subword configuration"),
            SimdError::RegisterOutOfRange { index, count } => {
                write!(f, "register r{index} out of range (unit has {count})")
            }
        }
    }
}

impl std::error::Error for SimdError {}

/// Runtime lane geometry: how a word of `word_width_bits` is read.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SubwordConfig {
    pub word_width_bits: u32,
    pub subword_bits: u32,
    pub lanes: u32,
    pub signed: bool,
}

/// Subword widths available on a word of the given width.
pub fn supported_subword_bits(word_width_bits: u32) -> Vec<u32> {
    let mut set: Vec<u32> = BASE_SUBWORD_BITS.to_vec();
    if word_width_bits > 96 {
        set.extend_from_slice(&WIDE_EXTRA_SUBWORD_BITS);
    }
    set.retain(|&b| b <= word_width_bits && word_width_bits.is_multiple_of(b));
    set
}

impl SubwordConfig {
    /// Validates the `(word, subword)` pair and derives the lane count.
    pub fn new(word_width_bits: u32, subword_bits: u32, signed: bool) -> Result<Self, SimdError> {
        if !supported_subword_bits(word_width_bits).contains(&subword_bits) {
            return Err(SimdError::UnsupportedSubword {
                word_width_bits,
                subword_bits,
            });
        }
        Ok(SubwordConfig {
            word_width_bits,
            subword_bits,
            lanes: word_width_bits / subword_bits,
            signed,
        })
    }

    fn lane_mask(&self) -> u128 {
        if self.subword_bits == 128 {
            u128::MAX
        } else {
            (1u128 << self.subword_bits) - 1
        }
    }

    /// Raw (unsigned) bits of lane `i`.
    pub fn lane_raw(&self, word: &WideWord, lane: usize) -> u128 {
        word.get_u128(
            lane * self.subword_bits as usize,
            self.subword_bits as usize,
        )
    }

    /// Lane value under this config's signedness.
    pub fn lane_value(&self, word: &WideWord, lane: usize) -> i128 {
        let raw = self.lane_raw(word, lane);
        if self.signed {
            sign_extend(raw, self.subword_bits)
        } else {
            raw as i128
        }
    }

    fn set_lane_raw(&self, word: &mut WideWord, lane: usize, raw: u128) {
        word.set_u128(
            lane * self.subword_bits as usize,
            self.subword_bits as usize,
            raw & self.lane_mask(),
        );
    }

    fn check_width(&self, word: &WideWord) -> Result<(), SimdError> {
        if word.width() != self.word_width_bits as usize {
            return Err(SimdError::WidthMismatch {
                expected: self.word_width_bits as usize,
                got: word.width(),
            });
        }
        Ok(())
    }

    fn representable(&self, value: i128) -> bool {
        if self.signed {
            let hi = 1i128 << (self.subword_bits - 1);
            value >= -hi && value < hi
        } else {
            value >= 0 && value < (1i128 << self.subword_bits)
        }
    }
}

/// Packs one value per lane into a word. Values must be representable in the
/// configured subword width (two's complement when signed).
pub fn pack(values: &[i128], cfg: &SubwordConfig) -> Result<WideWord, SimdError> {
    if values.len() != cfg.lanes as usize {
        return Err(SimdError::LaneCountMismatch {
            expected: cfg.lanes,
            got: values.len(),
        });
    }
    let mut word = WideWord::zero(cfg.word_width_bits as usize);
    for (lane, &value) in values.iter().enumerate() {
        if !cfg.representable(value) {
            return Err(SimdError::ValueOutOfRange {
                lane,
                value,
                subword_bits: cfg.subword_bits,
                signed: cfg.signed,
            });
        }
        cfg.set_lane_raw(&mut word, lane, value as u128);
    }
    Ok(word)
}

/// Inverse of [`pack`]: reads every lane back under the config's signedness.
pub fn unpack(word: &WideWord, cfg: &SubwordConfig) -> Result<Vec<i128>, SimdError> {
    cfg.check_width(word)?;
    Ok((0..cfg.lanes as usize)
        .map(|l| cfg.lane_value(word, l))
        .collect())
}

fn lanewise_binop(
    a: &WideWord,
    b: &WideWord,
    cfg: &SubwordConfig,
    op: impl Fn(u128, u128) -> u128,
) -> Result<WideWord, SimdError> {
    cfg.check_width(a)?;
    cfg.check_width(b)?;
    let mut out = WideWord::zero(cfg.word_width_bits as usize);
    for lane in 0..cfg.lanes as usize {
        let r = op(cfg.lane_raw(a, lane), cfg.lane_raw(b, lane));
        cfg.set_lane_raw(&mut out, lane, r);
    }
    Ok(out)
}

/// Per-lane modular addition; no carry crosses a lane boundary.
pub fn simd_add(a: &WideWord, b: &WideWord, cfg: &SubwordConfig) -> Result<WideWord, SimdError> {
    lanewise_binop(a, b, cfg, |x, y| x.wrapping_add(y))
}

/// Per-lane modular subtraction.
pub fn simd_sub(a: &WideWord, b: &WideWord, cfg: &SubwordConfig) -> Result<WideWord, SimdError> {
    lanewise_binop(a, b, cfg, |x, y| x.wrapping_sub(y))
}

fn check_shift(amount: u32, cfg: &SubwordConfig) -> Result<(), SimdError> {
    if amount >= cfg.subword_bits {
        return Err(SimdError::ShiftOutOfRange {
            amount,
            subword_bits: cfg.subword_bits,
        });
    }
    Ok(())
}

/// Per-lane left shift; bits leaving a lane are discarded, vacated bits are
/// zero-filled.
pub fn simd_shift_left(
    a: &WideWord,
    amount: u32,
    cfg: &SubwordConfig,
) -> Result<WideWord, SimdError> {
    check_shift(amount, cfg)?;
    cfg.check_width(a)?;
    let mut out = WideWord::zero(cfg.word_width_bits as usize);
    for lane in 0..cfg.lanes as usize {
        cfg.set_lane_raw(&mut out, lane, cfg.lane_raw(a, lane) << amount);
    }
    Ok(out)
}

/// Per-lane logical right shift (zero fill).
pub fn simd_shift_right_logical(
    a: &WideWord,
    amount: u32,
    cfg: &SubwordConfig,
) -> Result<WideWord, SimdError> {
    check_shift(amount, cfg)?;
    cfg.check_width(a)?;
    let mut out = WideWord::zero(cfg.word_width_bits as usize);
    for lane in 0..cfg.lanes as usize {
        cfg.set_lane_raw(&mut out, lane, cfg.lane_raw(a, lane) >> amount);
    }
    Ok(out)
}

/// Per-lane arithmetic right shift (sign fill).
pub fn simd_shift_right_arithmetic(
    a: &WideWord,
    amount: u32,
    cfg: &SubwordConfig,
) -> Result<WideWord, SimdError> {
    check_shift(amount, cfg)?;
    cfg.check_width(a)?;
    let mut out = WideWord::zero(cfg.word_width_bits as usize);
    for lane in 0..cfg.lanes as usize {
        let v = sign_extend(cfg.lane_raw(a, lane), cfg.subword_bits) >> amount;
        cfg.set_lane_raw(&mut out, lane, v as u128);
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Canonical signed digit encoding
// ---------------------------------------------------------------------------

/// Radix-2 signed-digit form of an integer: digits over {-1, 0, +1},
/// least-significant first, with no two adjacent nonzero digits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsdDigits {
    digits: Vec<i8>,
    value: i64,
}

impl CsdDigits {
    pub fn digits(&self) -> &[i8] {
        &self.digits
    }

    pub fn value(&self) -> i64 {
        self.value
    }

    pub fn nonzero_count(&self) -> usize {
        self.digits.iter().filter(|&&d| d != 0).count()
    }

    /// Recomputes the encoded integer from the digits.
    pub fn decode(&self) -> i64 {
        self.digits
            .iter()
            .enumerate()
            .map(|(i, &d)| d as i64 * (1i64 << i))
            .sum()
    }
}

impl fmt::Display for CsdDigits {
    /// Digit string over {P, 0, N}, least-significant digit last (7 → "P00N").
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.digits.is_empty() {
            return f.write_str("0");
        }
        for &d in self.digits.iter().rev() {
            f.write_str(match d {
                1 => "P",
                -1 => "N",
                _ => "0",
            })?;
        }
        Ok(())
    }
}

/// Canonical signed-digit encoding with the given magnitude bound.
///
/// The canonical form has no adjacent nonzero digits and the minimum number
/// of nonzero digits over all signed-digit representations.
pub fn csd_encode_bounded(value: i64, max_magnitude: i64) -> Result<CsdDigits, SimdError> {
    if value.unsigned_abs() > max_magnitude.unsigned_abs() {
        return Err(SimdError::ConstantOutOfRange {
            value,
            max: max_magnitude,
        });
    }
    let mut digits = Vec::new();
    let mut n = value;
    while n != 0 {
        if n & 1 != 0 {
            // +1 when n ≡ 1 (mod 4), -1 when n ≡ 3 (mod 4)
            let d = 2 - (n & 3) as i8;
            digits.push(d);
            n -= d as i64;
        } else {
            digits.push(0);
        }
        n >>= 1;
    }
    Ok(CsdDigits { digits, value })
}

/// [`csd_encode_bounded`] with the default bound.
pub fn csd_encode(value: i64) -> Result<CsdDigits, SimdError> {
    csd_encode_bounded(value, DEFAULT_CSD_MAX)
}

// ---------------------------------------------------------------------------
// Constant multiplication
// ---------------------------------------------------------------------------

/// One shift-add step of a constant multiplication.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MulStep {
    pub shift: u32,
    pub subtract: bool,
}

/// Shift-add schedule of one constant multiplication. The number of add/sub
/// steps equals the nonzero-digit count of the constant's canonical form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MulTrace {
    pub steps: Vec<MulStep>,
}

impl MulTrace {
    pub fn add_sub_steps(&self) -> usize {
        self.steps.len()
    }

    /// A multiplication by 1 degenerates to a register pass.
    pub fn is_pass(&self) -> bool {
        self.steps.len() == 1
            && self.steps[0]
                == MulStep {
                    shift: 0,
                    subtract: false,
                }
    }
}

/// Per-lane multiplication by a compile-time constant, computed as
/// lane-isolated shifts and adds/subs over the constant's signed-digit form.
/// Each lane accumulates in double width and is reduced mod 2^subword at the
/// end, so intermediate overflow cannot leak between lanes.
pub fn simd_mul_const(
    a: &WideWord,
    constant: i64,
    cfg: &SubwordConfig,
) -> Result<(WideWord, MulTrace), SimdError> {
    cfg.check_width(a)?;
    let csd = csd_encode(constant)?;
    let steps: Vec<MulStep> = csd
        .digits()
        .iter()
        .enumerate()
        .filter(|(_, &d)| d != 0)
        .map(|(i, &d)| MulStep {
            shift: i as u32,
            subtract: d < 0,
        })
        .collect();
    let mut out = WideWord::zero(cfg.word_width_bits as usize);
    for lane in 0..cfg.lanes as usize {
        let x = cfg.lane_raw(a, lane);
        let mut acc = 0u128;
        for step in &steps {
            // shifts of 128+ contribute nothing mod 2^subword
            let term = if step.shift >= 128 {
                0
            } else {
                x << step.shift
            };
            acc = if step.subtract {
                acc.wrapping_sub(term)
            } else {
                acc.wrapping_add(term)
            };
        }
        cfg.set_lane_raw(&mut out, lane, acc);
    }
    Ok((out, MulTrace { steps }))
}

// ---------------------------------------------------------------------------
// Data pack unit: width conversion between subword configurations
// ---------------------------------------------------------------------------

/// Rounding applied when the non-saturating requantizer discards low bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RoundingMode {
    Truncate,
    RoundNearestEven,
}

fn round_shift(x: i128, shift: u32, mode: RoundingMode) -> i128 {
    if shift == 0 {
        return x;
    }
    match mode {
        // arithmetic shift: floor division by 2^shift
        RoundingMode::Truncate => x >> shift,
        RoundingMode::RoundNearestEven => {
            let floor = x >> shift;
            let rem = x - (floor << shift);
            let half = 1i128 << (shift - 1);
            if rem > half || (rem == half && floor & 1 == 1) {
                floor + 1
            } else {
                floor
            }
        }
    }
}

/// Converts every selected lane of `a` from the source subword width to the
/// target one.
///
/// Two conversion strategies, selected by `saturate`:
///
/// * `saturate == true` — value-preserving pack: the lane value is clamped
///   into the target's representable range.
/// * `saturate == false` — bit-preserving requantize: narrowing keeps the
///   top target-width bits via a rounded rescale by 2^(from-to) (`mode`
///   picks truncation or round-to-nearest-even); the result wraps mod 2^to.
///
/// Lane geometries must either match or the target lane count must divide
/// the source one, in which case the lowest target-count lanes are selected.
pub fn dpu_requantize(
    a: &WideWord,
    from: &SubwordConfig,
    to: &SubwordConfig,
    mode: RoundingMode,
    saturate: bool,
) -> Result<WideWord, SimdError> {
    from.check_width(a)?;
    if from.subword_bits == to.subword_bits {
        return Err(SimdError::IdenticalWidths {
            subword_bits: from.subword_bits,
        });
    }
    if !(to.lanes == from.lanes || (to.lanes < from.lanes && from.lanes.is_multiple_of(to.lanes))) {
        return Err(SimdError::IncompatibleLanes {
            from: from.lanes,
            to: to.lanes,
        });
    }
    let mut out = WideWord::zero(to.word_width_bits as usize);
    for lane in 0..to.lanes as usize {
        let x = from.lane_value(a, lane);
        let converted = if saturate {
            let (lo, hi) = if to.signed {
                (
                    -(1i128 << (to.subword_bits - 1)),
                    (1i128 << (to.subword_bits - 1)) - 1,
                )
            } else {
                (0, (1i128 << to.subword_bits) - 1)
            };
            x.clamp(lo, hi)
        } else if to.subword_bits < from.subword_bits {
            round_shift(x, from.subword_bits - to.subword_bits, mode)
        } else {
            x
        };
        to.set_lane_raw(&mut out, lane, converted as u128);
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Vector functional unit state
// ---------------------------------------------------------------------------

/// Datapath operation counters of one functional unit.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, serde::Serialize)]
pub struct OpCounters {
    pub add_subs: u64,
    pub shifts: u64,
    pub passes: u64,
}

/// One vector functional unit: a few one-word registers whose content is
/// interpreted through the currently active subword configuration.
#[derive(Debug, Clone)]
pub struct VfuState {
    registers: Vec<WideWord>,
    active_cfg: Option<SubwordConfig>,
    pub counters: OpCounters,
}

impl VfuState {
    pub fn new(word_width_bits: u32, local_registers: u32) -> Self {
        VfuState {
            registers: vec![WideWord::zero(word_width_bits as usize); local_registers as usize],
            active_cfg: None,
            counters: OpCounters::default(),
        }
    }

    pub fn register_count(&self) -> usize {
        self.registers.len()
    }

    pub fn register(&self, index: usize) -> Result<&WideWord, SimdError> {
        self.registers
            .get(index)
            .ok_or(SimdError::RegisterOutOfRange {
                index,
                count: self.registers.len(),
            })
    }

    pub fn set_register(&mut self, index: usize, value: WideWord) -> Result<(), SimdError> {
        let count = self.registers.len();
        let slot = self
            .registers
            .get_mut(index)
            .ok_or(SimdError::RegisterOutOfRange { index, count })?;
        *slot = value;
        Ok(())
    }

    pub fn set_cfg(&mut self, cfg: SubwordConfig) {
        self.active_cfg = Some(cfg);
    }

    pub fn cfg(&self) -> Result<&SubwordConfig, SimdError> {
        self.active_cfg.as_ref().ok_or(SimdError::NoActiveConfig)
    }
}
