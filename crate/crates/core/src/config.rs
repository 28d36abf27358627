//! Tile parameter sets: definition, validation, derivation and the catalog
//! of reference configurations.
//!
//! A [`TileConfig`] carries both the free parameters of a tile (bank count,
//! word width, register count, ...) and the derived ones (bus bitwidths, word
//! counts, functional-unit counts). Derived fields are never read from config
//! files; [`load_config`] recomputes them so a file can only describe
//! consistent designs or fail validation.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Scratchpad organisation: `banks` SRAM banks, each `bank_row_bits` wide and
/// `bank_depth_words` rows deep, addressed in lock-step so a single row spans
/// all banks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpmConfig {
    pub banks: u32,
    pub bank_row_bits: u32,
    pub bank_depth_words: u32,
    /// Derived: `banks * bank_row_bits`.
    pub bitwidth_bits: u32,
}

/// Very-wide-register pool: `number` registers, each as wide as a scratchpad
/// row, partitioned into `slices_per_vwr` slices of `words_per_slice`
/// datapath words.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VwrConfig {
    pub number: u32,
    /// Derived: equals the scratchpad bitwidth.
    pub bitwidth_bits: u32,
    pub slices_per_vwr: u32,
    pub words_per_slice: u32,
    /// Derived: `bitwidth_bits / word_width_bits`.
    pub words_per_vwr: u32,
}

/// Vector functional units: one per slice, each with a handful of one-word
/// local registers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VfuConfig {
    /// Derived: equals `slices_per_vwr`.
    pub count: u32,
    /// Derived: equals the tile word width.
    pub datapath_bits: u32,
    pub local_registers: u32,
}

/// Full parameter set of one tile.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TileConfig {
    pub name: String,
    pub columns: u32,
    pub word_width_bits: u32,
    pub has_shuffler: bool,
    pub spm: SpmConfig,
    pub vwr: VwrConfig,
    pub vfu: VfuConfig,
}

pub const DEFAULT_BANK_ROW_BITS: u32 = 512;
pub const DEFAULT_BANK_DEPTH_WORDS: u32 = 64;
pub const DEFAULT_LOCAL_REGISTERS: u32 = 2;

/// Names of the built-in reference configurations.
pub const PRESET_NAMES: [&str; 6] = ["A", "B", "C", "D", "E", "VWR2A"];

/// One violated invariant, with the two mismatched values spelled out.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

/// Outcome of [`validate`]: violations are data, not failures.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub ok: bool,
    pub violations: Vec<Violation>,
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.ok {
            write!(f, "ok")
        } else {
            writeln!(f, "{} violation(s):", self.violations.len())?;
            for v in &self.violations {
                writeln!(f, "  - {v}")?;
            }
            Ok(())
        }
    }
}

#[derive(Debug)]
pub enum ConfigError {
    /// Text does not conform to the schema (syntax, missing or unknown
    /// fields). The message carries serde's line/column diagnostics.
    Parse(String),
    /// Operation requires a validating config.
    Invalid(ValidationReport),
    UnknownPreset(String),
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Parse(msg) => write!(f, "config parse error: {msg}"),
            ConfigError::Invalid(report) => write!(f, "config does not validate: {report}"),
            ConfigError::UnknownPreset(name) => {
                write!(
                    f,
                    "unknown preset {name:?} (expected one of {PRESET_NAMES:?})"
                )
            }
        }
    }
}

impl std::error::Error for ConfigError {}

/// Aggregate storage capacities of one tile, in bytes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct AggregateSizes {
    pub spm_bytes: u64,
    pub vwr_bytes: u64,
    pub vfu_bytes: u64,
}

fn check(violations: &mut Vec<Violation>, ok: bool, message: String) {
    if !ok {
        violations.push(Violation { message });
    }
}

/// Checks every structural invariant of a tile configuration.
///
/// Returns `ok == true` iff all hold; each violation names the two mismatched
/// quantities.
pub fn validate(config: &TileConfig) -> ValidationReport {
    let mut violations = Vec::new();
    for (name, value) in [
        ("columns", config.columns),
        ("word_width_bits", config.word_width_bits),
        ("spm.banks", config.spm.banks),
        ("spm.bank_row_bits", config.spm.bank_row_bits),
        ("spm.bank_depth_words", config.spm.bank_depth_words),
        ("vwr.number", config.vwr.number),
        ("vwr.slices_per_vwr", config.vwr.slices_per_vwr),
        ("vwr.words_per_slice", config.vwr.words_per_slice),
        ("vwr.words_per_vwr", config.vwr.words_per_vwr),
        ("vfu.count", config.vfu.count),
        ("vfu.datapath_bits", config.vfu.datapath_bits),
        ("vfu.local_registers", config.vfu.local_registers),
    ] {
        check(
            &mut violations,
            value > 0,
            format!("{name} ({value}) must be positive"),
        );
    }
    // Bail out early on zero fields so the arithmetic below stays meaningful.
    if !violations.is_empty() {
        return ValidationReport {
            ok: false,
            violations,
        };
    }

    let spm_bits = config.spm.banks * config.spm.bank_row_bits;
    check(
        &mut violations,
        config.spm.bitwidth_bits == spm_bits,
        format!(
            "spm.bitwidth_bits ({}) != banks*bank_row_bits ({})",
            config.spm.bitwidth_bits, spm_bits
        ),
    );
    check(
        &mut violations,
        config.vwr.bitwidth_bits == config.spm.bitwidth_bits,
        format!(
            "vwr.bitwidth_bits ({}) != spm.bitwidth_bits ({})",
            config.vwr.bitwidth_bits, config.spm.bitwidth_bits
        ),
    );
    let exact = config
        .vwr
        .bitwidth_bits
        .is_multiple_of(config.word_width_bits);
    check(
        &mut violations,
        exact,
        format!(
            "vwr.bitwidth_bits ({}) not divisible by word_width_bits ({})",
            config.vwr.bitwidth_bits, config.word_width_bits
        ),
    );
    if exact {
        let wpv = config.vwr.bitwidth_bits / config.word_width_bits;
        check(
            &mut violations,
            config.vwr.words_per_vwr == wpv,
            format!(
                "vwr.words_per_vwr ({}) != bitwidth/word_width ({})",
                config.vwr.words_per_vwr, wpv
            ),
        );
    }
    let slice_words = config.vwr.slices_per_vwr * config.vwr.words_per_slice;
    let pooled_words = config.vwr.words_per_vwr * config.columns;
    check(
        &mut violations,
        slice_words == pooled_words,
        format!(
            "slices_per_vwr*words_per_slice ({slice_words}) != words_per_vwr*columns ({pooled_words})"
        ),
    );
    check(
        &mut violations,
        config.vfu.count == config.vwr.slices_per_vwr,
        format!(
            "vfu.count ({}) != vwr.slices_per_vwr ({})",
            config.vfu.count, config.vwr.slices_per_vwr
        ),
    );
    check(
        &mut violations,
        config.vfu.datapath_bits == config.word_width_bits,
        format!(
            "vfu.datapath_bits ({}) != word_width_bits ({})",
            config.vfu.datapath_bits, config.word_width_bits
        ),
    );
    ValidationReport {
        ok: violations.is_empty(),
        violations,
    }
}

/// Computes the aggregate capacities (scratchpad, register pool, local
/// registers) of a validating config.
pub fn derive_aggregates(config: &TileConfig) -> Result<AggregateSizes, ConfigError> {
    let report = validate(config);
    if !report.ok {
        return Err(ConfigError::Invalid(report));
    }
    let spm_bits = config.spm.banks as u64
        * config.spm.bank_row_bits as u64
        * config.spm.bank_depth_words as u64;
    let vwr_bits = config.vwr.number as u64 * config.vwr.bitwidth_bits as u64;
    let vfu_bits = config.vfu.count as u64 * config.vfu.datapath_bits as u64;
    Ok(AggregateSizes {
        spm_bytes: spm_bits / 8,
        vwr_bytes: vwr_bits / 8,
        vfu_bytes: vfu_bits / 8,
    })
}

impl TileConfig {
    /// Builds a config from its free parameters, deriving the rest.
    #[allow(clippy::too_many_arguments)]
    pub fn from_parameters(
        name: &str,
        columns: u32,
        word_width_bits: u32,
        has_shuffler: bool,
        banks: u32,
        bank_row_bits: u32,
        bank_depth_words: u32,
        vwr_number: u32,
        slices_per_vwr: u32,
        words_per_slice: u32,
        local_registers: u32,
    ) -> TileConfig {
        let bitwidth_bits = banks * bank_row_bits;
        let words_per_vwr = bitwidth_bits.checked_div(word_width_bits).unwrap_or(0);
        TileConfig {
            name: name.to_string(),
            columns,
            word_width_bits,
            has_shuffler,
            spm: SpmConfig {
                banks,
                bank_row_bits,
                bank_depth_words,
                bitwidth_bits,
            },
            vwr: VwrConfig {
                number: vwr_number,
                bitwidth_bits,
                slices_per_vwr,
                words_per_slice,
                words_per_vwr,
            },
            vfu: VfuConfig {
                count: slices_per_vwr,
                datapath_bits: word_width_bits,
                local_registers,
            },
        }
    }

    pub fn validate(&self) -> ValidationReport {
        validate(self)
    }

    pub fn aggregates(&self) -> Result<AggregateSizes, ConfigError> {
        derive_aggregates(self)
    }
}

/// Returns one of the six built-in reference configurations.
///
/// Names are matched case-insensitively; anything else is an error.
pub fn preset(name: &str) -> Result<TileConfig, ConfigError> {
    let canonical = name.to_ascii_uppercase();
    // (name, columns, word, shuffler, banks, vwrs, slices, words_per_slice)
    let row = match canonical.as_str() {
        "A" => ("A", 1, 96, false, 3, 1, 8, 2),
        "B" => ("B", 1, 192, false, 6, 4, 1, 16),
        "C" => ("C", 1, 96, false, 6, 2, 8, 4),
        "D" => ("D", 1, 192, true, 3, 2, 8, 1),
        "E" => ("E", 1, 192, true, 6, 6, 16, 1),
        "VWR2A" => ("VWR2A", 2, 32, true, 8, 6, 8, 32),
        _ => return Err(ConfigError::UnknownPreset(name.to_string())),
    };
    let (name, columns, word, shuf, banks, vwrs, slices, wps) = row;
    Ok(TileConfig::from_parameters(
        name,
        columns,
        word,
        shuf,
        banks,
        DEFAULT_BANK_ROW_BITS,
        DEFAULT_BANK_DEPTH_WORDS,
        vwrs,
        slices,
        wps,
        DEFAULT_LOCAL_REGISTERS,
    ))
}

// ---------------------------------------------------------------------------
// Serialized form. Only the free parameters appear in files; everything else
// is recomputed on load.
// ---------------------------------------------------------------------------

fn default_bank_row_bits() -> u32 {
    DEFAULT_BANK_ROW_BITS
}
fn default_bank_depth_words() -> u32 {
    DEFAULT_BANK_DEPTH_WORDS
}
fn default_local_registers() -> u32 {
    DEFAULT_LOCAL_REGISTERS
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpmDoc {
    banks: u32,
    #[serde(default = "default_bank_row_bits")]
    bank_row_bits: u32,
    #[serde(default = "default_bank_depth_words")]
    bank_depth_words: u32,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct VwrDoc {
    number: u32,
    slices_per_vwr: u32,
    words_per_slice: u32,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct VfuDoc {
    #[serde(default = "default_local_registers")]
    local_registers: u32,
}

impl Default for VfuDoc {
    fn default() -> Self {
        VfuDoc {
            local_registers: DEFAULT_LOCAL_REGISTERS,
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigDoc {
    name: String,
    columns: u32,
    word_width_bits: u32,
    has_shuffler: bool,
    spm: SpmDoc,
    vwr: VwrDoc,
    #[serde(default)]
    vfu: VfuDoc,
}

/// Parses a JSON config document and derives all dependent fields.
pub fn load_config(text: &str) -> Result<TileConfig, ConfigError> {
    let doc: ConfigDoc =
        serde_json::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
    Ok(TileConfig::from_parameters(
        &doc.name,
        doc.columns,
        doc.word_width_bits,
        doc.has_shuffler,
        doc.spm.banks,
        doc.spm.bank_row_bits,
        doc.spm.bank_depth_words,
        doc.vwr.number,
        doc.vwr.slices_per_vwr,
        doc.vwr.words_per_slice,
        doc.vfu.local_registers,
    ))
}

/// Serializes the free parameters of `config` in the normalized form
/// accepted by [`load_config`].
pub fn save_config(config: &TileConfig) -> String {
    let doc = ConfigDoc {
        name: config.name.clone(),
        columns: config.columns,
        word_width_bits: config.word_width_bits,
        has_shuffler: config.has_shuffler,
        spm: SpmDoc {
            banks: config.spm.banks,
            bank_row_bits: config.spm.bank_row_bits,
            bank_depth_words: config.spm.bank_depth_words,
        },
        vwr: VwrDoc {
            number: config.vwr.number,
            slices_per_vwr: config.vwr.slices_per_vwr,
            words_per_slice: config.vwr.words_per_slice,
        },
        vfu: VfuDoc {
            local_registers: config.vfu.local_registers,
        },
    };
    let mut text = serde_json::to_string_pretty(&doc).expect("config serialization");
    text.push('\n');
    text
}
