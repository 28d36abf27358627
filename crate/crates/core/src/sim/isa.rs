//! Program listing grammar and the instruction set of the tile interpreter.
//!
//! One instruction per line, `;` starts a comment. Mnemonics and keywords
//! are case-insensitive; the disassembler emits the canonical form (upper
//! case mnemonics, `, `-separated operands, explicit `row`/`word` markers),
//! so `disassemble(assemble(text))` only normalizes whitespace and case.
//!
//! Operand syntax:
//!
//! ```text
//! NOP | HALT
//! LOADW  vwr0, row 3          ; wide load of a scratchpad row
//! STOREW vwr0, row 7
//! RDW  r0, vwr0, word 1       ; every unit reads word 1 of its own slice
//! WRW  vwr0, word 1, r0
//! SETCFG 8, unsigned          ; subword width [, signed|unsigned]
//! SADD r0, r1, r2             ; broadcast over all units
//! SSUB r0, r1, r2
//! SSHL r0, r1, 3
//! SSHR r0, r1, 1              ; arithmetic when the active config is signed
//! SMULC r0, r1, 7             ; shift-add constant multiply
//! REQUANT r0, r1, 8, truncate, wrap   ; [, truncate|rne] [, wrap|saturate]
//! SHUF vwr0                   ; one-word rotation toward lower indices
//! DMAPERM vwr0, 1, 2, 3, 0    ; new word w takes old word p[w]
//! ```
//!
//! Register operands are written `r<k>`; the alias `v<k>` is accepted.

use std::fmt;

use crate::config::TileConfig;
use crate::softsimd::{supported_subword_bits, RoundingMode, DEFAULT_CSD_MAX};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Instruction {
    Nop,
    Halt,
    LoadWide {
        vwr: usize,
        row: usize,
    },
    StoreWide {
        vwr: usize,
        row: usize,
    },
    ReadWord {
        rd: usize,
        vwr: usize,
        word: usize,
    },
    WriteWord {
        vwr: usize,
        word: usize,
        rs: usize,
    },
    SetCfg {
        subword_bits: u32,
        signed: bool,
    },
    SimdAdd {
        rd: usize,
        ra: usize,
        rb: usize,
    },
    SimdSub {
        rd: usize,
        ra: usize,
        rb: usize,
    },
    SimdShl {
        rd: usize,
        ra: usize,
        amount: u32,
    },
    SimdShr {
        rd: usize,
        ra: usize,
        amount: u32,
    },
    SimdMulConst {
        rd: usize,
        ra: usize,
        constant: i64,
    },
    Requant {
        rd: usize,
        ra: usize,
        to_bits: u32,
        mode: RoundingMode,
        saturate: bool,
    },
    Shuffle {
        vwr: usize,
    },
    DmaPermute {
        vwr: usize,
        permutation: Vec<usize>,
    },
}

/// Assembly problem, pinned to a 1-based source line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AsmError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for AsmError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

impl std::error::Error for AsmError {}

fn err(line: usize, message: impl Into<String>) -> AsmError {
    AsmError {
        line,
        message: message.into(),
    }
}

fn parse_prefixed(token: &str, prefix: &str) -> Option<usize> {
    let lower = token.to_ascii_lowercase();
    lower.strip_prefix(prefix)?.parse().ok()
}

fn parse_register(token: &str, line: usize) -> Result<usize, AsmError> {
    parse_prefixed(token, "r")
        .or_else(|| parse_prefixed(token, "v"))
        .ok_or_else(|| err(line, format!("expected register (r<k>), got {token:?}")))
}

fn parse_vwr(token: &str, line: usize) -> Result<usize, AsmError> {
    parse_prefixed(token, "vwr").ok_or_else(|| {
        err(
            line,
            format!("expected register file id (vwr<k>), got {token:?}"),
        )
    })
}

/// Accepts `row 3` / `word 3` / bare `3`.
fn parse_indexed(token: &str, keyword: &str, line: usize) -> Result<usize, AsmError> {
    let lower = token.to_ascii_lowercase();
    let body = lower
        .strip_prefix(keyword)
        .map(str::trim)
        .unwrap_or(lower.as_str());
    body.parse().map_err(|_| {
        err(
            line,
            format!("expected `{keyword} <n>` or a number, got {token:?}"),
        )
    })
}

fn parse_int<T: std::str::FromStr>(token: &str, line: usize) -> Result<T, AsmError> {
    token
        .parse()
        .map_err(|_| err(line, format!("expected integer, got {token:?}")))
}

fn operands(rest: &str, expected: usize, line: usize) -> Result<Vec<&str>, AsmError> {
    let ops: Vec<&str> = if rest.trim().is_empty() {
        Vec::new()
    } else {
        rest.split(',').map(str::trim).collect()
    };
    if ops.len() != expected {
        return Err(err(
            line,
            format!("expected {expected} operand(s), got {}", ops.len()),
        ));
    }
    Ok(ops)
}

fn parse_line(line_text: &str, line: usize) -> Result<Option<Instruction>, AsmError> {
    let code = line_text.split(';').next().unwrap_or("").trim();
    if code.is_empty() {
        return Ok(None);
    }
    let (mnemonic, rest) = match code.split_once(char::is_whitespace) {
        Some((m, r)) => (m, r),
        None => (code, ""),
    };
    let insn = match mnemonic.to_ascii_uppercase().as_str() {
        "NOP" => {
            operands(rest, 0, line)?;
            Instruction::Nop
        }
        "HALT" => {
            operands(rest, 0, line)?;
            Instruction::Halt
        }
        "LOADW" | "STOREW" => {
            let ops = operands(rest, 2, line)?;
            let vwr = parse_vwr(ops[0], line)?;
            let row = parse_indexed(ops[1], "row", line)?;
            if mnemonic.eq_ignore_ascii_case("LOADW") {
                Instruction::LoadWide { vwr, row }
            } else {
                Instruction::StoreWide { vwr, row }
            }
        }
        "RDW" => {
            let ops = operands(rest, 3, line)?;
            Instruction::ReadWord {
                rd: parse_register(ops[0], line)?,
                vwr: parse_vwr(ops[1], line)?,
                word: parse_indexed(ops[2], "word", line)?,
            }
        }
        "WRW" => {
            let ops = operands(rest, 3, line)?;
            Instruction::WriteWord {
                vwr: parse_vwr(ops[0], line)?,
                word: parse_indexed(ops[1], "word", line)?,
                rs: parse_register(ops[2], line)?,
            }
        }
        "SETCFG" => {
            let ops: Vec<&str> = rest
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .collect();
            if ops.is_empty() || ops.len() > 2 {
                return Err(err(line, "SETCFG takes a width and an optional signedness"));
            }
            let subword_bits = parse_int(ops[0], line)?;
            let signed = match ops.get(1).map(|s| s.to_ascii_lowercase()) {
                None => false,
                Some(s) if s == "signed" => true,
                Some(s) if s == "unsigned" => false,
                Some(s) => return Err(err(line, format!("expected signed|unsigned, got {s:?}"))),
            };
            Instruction::SetCfg {
                subword_bits,
                signed,
            }
        }
        "SADD" | "SSUB" => {
            let ops = operands(rest, 3, line)?;
            let rd = parse_register(ops[0], line)?;
            let ra = parse_register(ops[1], line)?;
            let rb = parse_register(ops[2], line)?;
            if mnemonic.eq_ignore_ascii_case("SADD") {
                Instruction::SimdAdd { rd, ra, rb }
            } else {
                Instruction::SimdSub { rd, ra, rb }
            }
        }
        "SSHL" | "SSHR" => {
            let ops = operands(rest, 3, line)?;
            let rd = parse_register(ops[0], line)?;
            let ra = parse_register(ops[1], line)?;
            let amount = parse_int(ops[2], line)?;
            if mnemonic.eq_ignore_ascii_case("SSHL") {
                Instruction::SimdShl { rd, ra, amount }
            } else {
                Instruction::SimdShr { rd, ra, amount }
            }
        }
        "SMULC" => {
            let ops = operands(rest, 3, line)?;
            Instruction::SimdMulConst {
                rd: parse_register(ops[0], line)?,
                ra: parse_register(ops[1], line)?,
                constant: parse_int(ops[2], line)?,
            }
        }
        "REQUANT" => {
            let ops: Vec<&str> = rest
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .collect();
            if ops.len() < 3 || ops.len() > 5 {
                return Err(err(
                    line,
                    "REQUANT rd, rs, bits [, truncate|rne] [, wrap|saturate]",
                ));
            }
            let rd = parse_register(ops[0], line)?;
            let ra = parse_register(ops[1], line)?;
            let to_bits = parse_int(ops[2], line)?;
            let mut mode = RoundingMode::Truncate;
            let mut saturate = false;
            for extra in &ops[3..] {
                match extra.to_ascii_lowercase().as_str() {
                    "truncate" => mode = RoundingMode::Truncate,
                    "rne" => mode = RoundingMode::RoundNearestEven,
                    "saturate" => saturate = true,
                    "wrap" => saturate = false,
                    other => {
                        return Err(err(
                            line,
                            format!("expected truncate|rne|wrap|saturate, got {other:?}"),
                        ))
                    }
                }
            }
            Instruction::Requant {
                rd,
                ra,
                to_bits,
                mode,
                saturate,
            }
        }
        "SHUF" => {
            let ops = operands(rest, 1, line)?;
            Instruction::Shuffle {
                vwr: parse_vwr(ops[0], line)?,
            }
        }
        "DMAPERM" => {
            let ops: Vec<&str> = rest
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .collect();
            if ops.len() < 2 {
                return Err(err(line, "DMAPERM vwr<k>, p0, p1, ..."));
            }
            let vwr = parse_vwr(ops[0], line)?;
            let permutation = ops[1..]
                .iter()
                .map(|t| parse_int(t, line))
                .collect::<Result<Vec<usize>, _>>()?;
            Instruction::DmaPermute { vwr, permutation }
        }
        other => return Err(err(line, format!("unknown mnemonic {other:?}"))),
    };
    Ok(Some(insn))
}

/// Parses a program listing. Syntax only; see [`assemble_with_config`] for
/// operand range checking against a concrete tile.
pub fn assemble(text: &str) -> Result<Vec<Instruction>, AsmError> {
    let mut program = Vec::new();
    for (i, line_text) in text.lines().enumerate() {
        if let Some(insn) = parse_line(line_text, i + 1)? {
            program.push(insn);
        }
    }
    Ok(program)
}

/// Range-checks one instruction against a tile configuration.
pub fn check_instruction(insn: &Instruction, config: &TileConfig) -> Result<(), String> {
    let vwr_count = config.vwr.number as usize;
    let depth = config.spm.bank_depth_words as usize;
    let wps = config.vwr.words_per_slice as usize;
    let regs = config.vfu.local_registers as usize;
    let check_vwr = |v: usize| {
        if v >= vwr_count {
            Err(format!("vwr{v} out of range ({vwr_count} registers)"))
        } else {
            Ok(())
        }
    };
    let check_row = |r: usize| {
        if r >= depth {
            Err(format!("row {r} out of range (depth {depth})"))
        } else {
            Ok(())
        }
    };
    let check_reg = |r: usize| {
        if r >= regs {
            Err(format!("r{r} out of range ({regs} local registers)"))
        } else {
            Ok(())
        }
    };
    match insn {
        Instruction::Nop | Instruction::Halt => Ok(()),
        Instruction::LoadWide { vwr, row } | Instruction::StoreWide { vwr, row } => {
            check_vwr(*vwr)?;
            check_row(*row)
        }
        Instruction::ReadWord { rd, vwr, word } => {
            check_reg(*rd)?;
            check_vwr(*vwr)?;
            if *word >= wps {
                return Err(format!("word {word} out of range ({wps} words per slice)"));
            }
            Ok(())
        }
        Instruction::WriteWord { vwr, word, rs } => {
            check_vwr(*vwr)?;
            check_reg(*rs)?;
            if *word >= wps {
                return Err(format!("word {word} out of range ({wps} words per slice)"));
            }
            Ok(())
        }
        Instruction::SetCfg { subword_bits, .. } => {
            if !supported_subword_bits(config.word_width_bits).contains(subword_bits) {
                return Err(format!(
                    "subword width {subword_bits} unsupported for {}-bit words",
                    config.word_width_bits
                ));
            }
            Ok(())
        }
        Instruction::SimdAdd { rd, ra, rb } | Instruction::SimdSub { rd, ra, rb } => {
            check_reg(*rd)?;
            check_reg(*ra)?;
            check_reg(*rb)
        }
        Instruction::SimdShl { rd, ra, amount } | Instruction::SimdShr { rd, ra, amount } => {
            check_reg(*rd)?;
            check_reg(*ra)?;
            if *amount >= config.word_width_bits {
                return Err(format!("shift amount {amount} exceeds the word width"));
            }
            Ok(())
        }
        Instruction::SimdMulConst { rd, ra, constant } => {
            check_reg(*rd)?;
            check_reg(*ra)?;
            if constant.unsigned_abs() > DEFAULT_CSD_MAX.unsigned_abs() {
                return Err(format!("constant {constant} exceeds the encoder bound"));
            }
            Ok(())
        }
        Instruction::Requant {
            rd, ra, to_bits, ..
        } => {
            check_reg(*rd)?;
            check_reg(*ra)?;
            if *to_bits == 0 || *to_bits > config.word_width_bits {
                return Err(format!("target width {to_bits} out of range"));
            }
            Ok(())
        }
        Instruction::Shuffle { vwr } => {
            check_vwr(*vwr)?;
            if !config.has_shuffler {
                return Err("configuration has no tile shuffler".to_string());
            }
            Ok(())
        }
        Instruction::DmaPermute { vwr, permutation } => {
            check_vwr(*vwr)?;
            let n = config.vwr.words_per_vwr as usize;
            if permutation.len() != n {
                return Err(format!(
                    "permutation length {} != words_per_vwr {n}",
                    permutation.len()
                ));
            }
            let mut seen = vec![false; n];
            for &p in permutation {
                if p >= n || seen[p] {
                    return Err("permutation is not a bijection".to_string());
                }
                seen[p] = true;
            }
            Ok(())
        }
    }
}

/// Assembles and range-checks every operand against `config`.
pub fn assemble_with_config(text: &str, config: &TileConfig) -> Result<Vec<Instruction>, AsmError> {
    let mut program = Vec::new();
    for (i, line_text) in text.lines().enumerate() {
        let line = i + 1;
        if let Some(insn) = parse_line(line_text, line)? {
            check_instruction(&insn, config).map_err(|message| err(line, message))?;
            program.push(insn);
        }
    }
    Ok(program)
}

impl fmt::Display for Instruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Instruction::Nop => write!(f, "NOP"),
            Instruction::Halt => write!(f, "HALT"),
            Instruction::LoadWide { vwr, row } => write!(f, "LOADW vwr{vwr}, row {row}"),
            Instruction::StoreWide { vwr, row } => write!(f, "STOREW vwr{vwr}, row {row}"),
            Instruction::ReadWord { rd, vwr, word } => {
                write!(f, "RDW r{rd}, vwr{vwr}, word {word}")
            }
            Instruction::WriteWord { vwr, word, rs } => {
                write!(f, "WRW vwr{vwr}, word {word}, r{rs}")
            }
            Instruction::SetCfg {
                subword_bits,
                signed,
            } => write!(
                f,
                "SETCFG {subword_bits}, {}",
                if *signed { "signed" } else { "unsigned" }
            ),
            Instruction::SimdAdd { rd, ra, rb } => write!(f, "SADD r{rd}, r{ra}, r{rb}"),
            Instruction::SimdSub { rd, ra, rb } => write!(f, "SSUB r{rd}, r{ra}, r{rb}"),
            Instruction::SimdShl { rd, ra, amount } => write!(f, "SSHL r{rd}, r{ra}, {amount}"),
            Instruction::SimdShr { rd, ra, amount } => write!(f, "SSHR r{rd}, r{ra}, {amount}"),
            Instruction::SimdMulConst { rd, ra, constant } => {
                write!(f, "SMULC r{rd}, r{ra}, {constant}")
            }
            Instruction::Requant {
                rd,
                ra,
                to_bits,
                mode,
                saturate,
            } => write!(
                f,
                "REQUANT r{rd}, r{ra}, {to_bits}, {}, {}",
                match mode {
                    RoundingMode::Truncate => "truncate",
                    RoundingMode::RoundNearestEven => "rne",
                },
                if *saturate { "saturate" } else { "wrap" }
            ),
            Instruction::Shuffle { vwr } => write!(f, "SHUF vwr{vwr}"),
            Instruction::DmaPermute { vwr, permutation } => {
                write!(f, "DMAPERM vwr{vwr}")?;
                for p in permutation {
                    write!(f, ", {p}")?;
                }
                Ok(())
            }
        }
    }
}

/// Canonical listing of a program, one instruction per line.
pub fn disassemble(program: &[Instruction]) -> String {
    let mut out = String::new();
    for insn in program {
        out.push_str(&insn.to_string());
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::preset;

    #[test]
    fn broadcast_add_accepts_register_alias() {
        let program = assemble("SADD v0, r0, r1").unwrap();
        assert_eq!(
            program,
            vec![Instruction::SimdAdd {
                rd: 0,
                ra: 0,
                rb: 1
            }]
        );
    }

    #[test]
    fn wide_load_with_row_keyword() {
        let program = assemble("LOADW vwr0, row 3").unwrap();
        assert_eq!(program, vec![Instruction::LoadWide { vwr: 0, row: 3 }]);
        // bare index is accepted too
        assert_eq!(assemble("LOADW vwr0, 3").unwrap(), program);
    }

    #[test]
    fn comments_and_blank_lines_are_skipped() {
        let text = "; header\n\nNOP ; trailing\n  \nHALT\n";
        let program = assemble(text).unwrap();
        assert_eq!(program, vec![Instruction::Nop, Instruction::Halt]);
    }

    #[test]
    fn syntax_errors_carry_line_numbers() {
        let err = assemble("NOP\nFROB r0\n").unwrap_err();
        assert_eq!(err.line, 2);
        assert!(err.message.contains("FROB"), "{}", err.message);

        let err = assemble("SADD r0, r1").unwrap_err();
        assert!(err.message.contains("3 operand"), "{}", err.message);
    }

    #[test]
    fn shuffle_requires_a_shuffler_at_config_time() {
        let a = preset("A").unwrap();
        let err = assemble_with_config("SHUF vwr0", &a).unwrap_err();
        assert_eq!(err.line, 1);
        assert!(err.message.contains("shuffler"), "{}", err.message);

        let d = preset("D").unwrap();
        assert!(assemble_with_config("SHUF vwr0", &d).is_ok());
        assert!(assemble_with_config("SHUF vwr5", &d).is_err());
    }

    #[test]
    fn config_time_range_checks() {
        let a = preset("A").unwrap(); // 1 vwr, depth 64, wps 2, 2 regs
        assert!(assemble_with_config("LOADW vwr1, row 0", &a).is_err());
        assert!(assemble_with_config("LOADW vwr0, row 64", &a).is_err());
        assert!(assemble_with_config("RDW r0, vwr0, word 2", &a).is_err());
        assert!(assemble_with_config("SADD r2, r0, r1", &a).is_err());
        assert!(assemble_with_config("SETCFG 10", &a).is_err());
        assert!(assemble_with_config("SETCFG 8", &a).is_ok());
        assert!(assemble_with_config("DMAPERM vwr0, 0, 1", &a).is_err());
    }

    #[test]
    fn disassembly_roundtrips_and_normalizes_whitespace() {
        let text = "SETCFG   8 ,  signed\n  LOADW vwr0 ,row 3\nRDW r0,vwr0,word 1\nSADD r0 , r0 , r1\nREQUANT r1, r0, 4, rne, saturate\nDMAPERM vwr0, 1, 0\nHALT\n";
        let program = assemble(text).unwrap();
        let canonical = disassemble(&program);
        assert_eq!(
            canonical,
            "SETCFG 8, signed\nLOADW vwr0, row 3\nRDW r0, vwr0, word 1\nSADD r0, r0, r1\nREQUANT r1, r0, 4, rne, saturate\nDMAPERM vwr0, 1, 0\nHALT\n"
        );
        // canonical text is a fixpoint
        assert_eq!(disassemble(&assemble(&canonical).unwrap()), canonical);
    }
}
