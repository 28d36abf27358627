//! Instruction-level interpreter for one tile.
//!
//! A [`TileState`] owns the scratchpad, the register pool and one
//! [`VfuState`] per slice. Datapath instructions broadcast to every unit in
//! lock step; unit `k` is hard-wired to slice `k`, so broadcast accesses can
//! never violate slice confinement. Every architectural effect of [`step`]
//! is one memory or subword operation from the sibling modules, which keeps
//! the interpreter auditable against them.

pub mod isa;
pub mod kernels;

use std::fmt;

use serde::Serialize;

use crate::bits::WideWord;
use crate::config::{ConfigError, TileConfig};
use crate::memory::{AccessCounters, MemoryError, SpmState, VwrState};
use crate::softsimd::{
    dpu_requantize, simd_add, simd_mul_const, simd_shift_left, simd_shift_right_arithmetic,
    simd_shift_right_logical, simd_sub, OpCounters, SimdError, SubwordConfig, VfuState,
};

pub use isa::{assemble, assemble_with_config, disassemble, AsmError, Instruction};

#[derive(Debug)]
pub enum SimError {
    Memory(MemoryError),
    Simd(SimdError),
    Config(ConfigError),
    Asm(AsmError),
    Halted,
    VwrOutOfRange {
        vwr: usize,
        count: usize,
    },
    RequantTooWide {
        lanes: u32,
        to_bits: u32,
        word_width_bits: u32,
    },
}

impl fmt::Display for SimError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SimError::Memory(e) => write!(f, "memory: {e}"),
            SimError::Simd(e) => write!(f, "datapath: {e}"),
            SimError::Config(e) => write!(f, "config: {e}"),
            SimError::Asm(e) => write!(f, "assembly: {e}"),
            SimError::Halted => write!(f, "machine is halted"),
            SimError::VwrOutOfRange { vwr, count } => {
                write!(f, "vwr{vwr} out of range ({count} registers)")
            }
            SimError::RequantTooWide { lanes, to_bits, word_width_bits } => write!(
                f,
                "requantized word ({lanes} lanes of {to_bits} bits) exceeds the {word_width_bits}-bit register"
            ),
        }
    }
}

impl std::error::Error for SimError {}

impl From<MemoryError> for SimError {
    fn from(e: MemoryError) -> Self {
        SimError::Memory(e)
    }
}
impl From<SimdError> for SimError {
    fn from(e: SimdError) -> Self {
        SimError::Simd(e)
    }
}
impl From<ConfigError> for SimError {
    fn from(e: ConfigError) -> Self {
        SimError::Config(e)
    }
}
impl From<AsmError> for SimError {
    fn from(e: AsmError) -> Self {
        SimError::Asm(e)
    }
}

/// Cycles charged per instruction class. Scratchpad rows are behind the
/// slower wide port, everything else runs at datapath speed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CostModel {
    pub spm_access_cycles: u64,
    pub datapath_cycles: u64,
}

impl Default for CostModel {
    fn default() -> Self {
        CostModel {
            spm_access_cycles: 2,
            datapath_cycles: 1,
        }
    }
}

impl CostModel {
    fn cycles_for(&self, insn: &Instruction) -> u64 {
        match insn {
            Instruction::LoadWide { .. } | Instruction::StoreWide { .. } => self.spm_access_cycles,
            _ => self.datapath_cycles,
        }
    }
}

/// Execution metrics of one run: total cycles, memory access counts and the
/// per-unit datapath step counters.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MetricsReport {
    pub cycles: u64,
    pub counters: AccessCounters,
    pub vfu_steps: Vec<OpCounters>,
}

/// Complete architectural state of one executing tile.
#[derive(Debug, Clone)]
pub struct TileState {
    config: TileConfig,
    pub spm: SpmState,
    pub vwrs: Vec<VwrState>,
    pub vfus: Vec<VfuState>,
    pub pc: usize,
    pub cycle_count: u64,
    pub halted: bool,
    pub counters: AccessCounters,
    cost: CostModel,
}

impl TileState {
    pub fn new(config: &TileConfig) -> Result<Self, SimError> {
        Self::with_cost_model(config, CostModel::default())
    }

    pub fn with_cost_model(config: &TileConfig, cost: CostModel) -> Result<Self, SimError> {
        let report = config.validate();
        if !report.ok {
            return Err(SimError::Config(ConfigError::Invalid(report)));
        }
        let vwrs = (0..config.vwr.number)
            .map(|_| VwrState::for_config(config))
            .collect();
        let vfus = (0..config.vfu.count)
            .map(|_| VfuState::new(config.vfu.datapath_bits, config.vfu.local_registers))
            .collect();
        Ok(TileState {
            config: config.clone(),
            spm: SpmState::new(&config.spm),
            vwrs,
            vfus,
            pc: 0,
            cycle_count: 0,
            halted: false,
            counters: AccessCounters::default(),
            cost,
        })
    }

    pub fn config(&self) -> &TileConfig {
        &self.config
    }

    /// Executes `program[pc]`. Datapath instructions run on every unit.
    /// Falling off the end of the program halts like an explicit `HALT`.
    pub fn step(&mut self, program: &[Instruction]) -> Result<(), SimError> {
        if self.halted {
            return Err(SimError::Halted);
        }
        let Some(insn) = program.get(self.pc) else {
            self.halted = true;
            return Ok(());
        };
        match insn {
            Instruction::Nop => {}
            Instruction::Halt => self.halted = true,
            Instruction::LoadWide { vwr, row } => {
                let count = self.vwrs.len();
                let reg = self
                    .vwrs
                    .get_mut(*vwr)
                    .ok_or(SimError::VwrOutOfRange { vwr: *vwr, count })?;
                reg.load_wide(&self.spm, *row, &mut self.counters)?;
            }
            Instruction::StoreWide { vwr, row } => {
                let count = self.vwrs.len();
                let reg = self
                    .vwrs
                    .get(*vwr)
                    .ok_or(SimError::VwrOutOfRange { vwr: *vwr, count })?;
                reg.store_wide(&mut self.spm, *row, &mut self.counters)?;
            }
            Instruction::ReadWord { rd, vwr, word } => {
                let count = self.vwrs.len();
                let reg = self
                    .vwrs
                    .get(*vwr)
                    .ok_or(SimError::VwrOutOfRange { vwr: *vwr, count })?;
                for (k, vfu) in self.vfus.iter_mut().enumerate() {
                    let value = reg.read_word(k, *word, &mut self.counters)?;
                    vfu.set_register(*rd, value)?;
                }
            }
            Instruction::WriteWord { vwr, word, rs } => {
                let count = self.vwrs.len();
                let vfus = &self.vfus;
                let reg = self
                    .vwrs
                    .get_mut(*vwr)
                    .ok_or(SimError::VwrOutOfRange { vwr: *vwr, count })?;
                for (k, vfu) in vfus.iter().enumerate() {
                    let value = vfu.register(*rs)?.clone();
                    reg.write_word(k, *word, &value, &mut self.counters)?;
                }
            }
            Instruction::SetCfg {
                subword_bits,
                signed,
            } => {
                let cfg = SubwordConfig::new(self.config.word_width_bits, *subword_bits, *signed)?;
                for vfu in &mut self.vfus {
                    vfu.set_cfg(cfg);
                }
            }
            Instruction::SimdAdd { rd, ra, rb } | Instruction::SimdSub { rd, ra, rb } => {
                let subtract = matches!(insn, Instruction::SimdSub { .. });
                for vfu in &mut self.vfus {
                    let cfg = *vfu.cfg()?;
                    let a = vfu.register(*ra)?;
                    let b = vfu.register(*rb)?;
                    let out = if subtract {
                        simd_sub(a, b, &cfg)?
                    } else {
                        simd_add(a, b, &cfg)?
                    };
                    vfu.set_register(*rd, out)?;
                    vfu.counters.add_subs += 1;
                }
            }
            Instruction::SimdShl { rd, ra, amount } | Instruction::SimdShr { rd, ra, amount } => {
                let left = matches!(insn, Instruction::SimdShl { .. });
                for vfu in &mut self.vfus {
                    let cfg = *vfu.cfg()?;
                    let a = vfu.register(*ra)?;
                    let out = if left {
                        simd_shift_left(a, *amount, &cfg)?
                    } else if cfg.signed {
                        simd_shift_right_arithmetic(a, *amount, &cfg)?
                    } else {
                        simd_shift_right_logical(a, *amount, &cfg)?
                    };
                    vfu.set_register(*rd, out)?;
                    vfu.counters.shifts += 1;
                }
            }
            Instruction::SimdMulConst { rd, ra, constant } => {
                for vfu in &mut self.vfus {
                    let cfg = *vfu.cfg()?;
                    let a = vfu.register(*ra)?;
                    let (out, trace) = simd_mul_const(a, *constant, &cfg)?;
                    vfu.set_register(*rd, out)?;
                    if trace.is_pass() {
                        vfu.counters.passes += 1;
                    } else {
                        vfu.counters.add_subs += trace.add_sub_steps() as u64;
                        vfu.counters.shifts +=
                            trace.steps.iter().filter(|s| s.shift > 0).count() as u64;
                    }
                }
            }
            Instruction::Requant {
                rd,
                ra,
                to_bits,
                mode,
                saturate,
            } => {
                let word_width = self.config.word_width_bits;
                for vfu in &mut self.vfus {
                    let from = *vfu.cfg()?;
                    if from.lanes * to_bits > word_width {
                        return Err(SimError::RequantTooWide {
                            lanes: from.lanes,
                            to_bits: *to_bits,
                            word_width_bits: word_width,
                        });
                    }
                    let to = SubwordConfig::new(from.lanes * to_bits, *to_bits, from.signed)?;
                    let a = vfu.register(*ra)?;
                    let narrow = dpu_requantize(a, &from, &to, *mode, *saturate)?;
                    // packed result sits in the low bits of the full-width register
                    let mut out = WideWord::zero(word_width as usize);
                    out.deposit(0, &narrow);
                    vfu.set_register(*rd, out)?;
                    vfu.counters.passes += 1;
                }
            }
            Instruction::Shuffle { vwr } => {
                let count = self.vwrs.len();
                let reg = self
                    .vwrs
                    .get_mut(*vwr)
                    .ok_or(SimError::VwrOutOfRange { vwr: *vwr, count })?;
                reg.shuffle_step(&mut self.counters)?;
            }
            Instruction::DmaPermute { vwr, permutation } => {
                let count = self.vwrs.len();
                let reg = self
                    .vwrs
                    .get_mut(*vwr)
                    .ok_or(SimError::VwrOutOfRange { vwr: *vwr, count })?;
                reg.dma_rearrange(permutation, &mut self.counters)?;
            }
        }
        self.cycle_count += self.cost.cycles_for(insn);
        self.pc += 1;
        Ok(())
    }

    /// Runs to the first `HALT` (or the end of the program).
    pub fn run(&mut self, program: &[Instruction]) -> Result<(), SimError> {
        while !self.halted {
            self.step(program)?;
        }
        Ok(())
    }

    pub fn report(&self) -> MetricsReport {
        MetricsReport {
            cycles: self.cycle_count,
            counters: self.counters,
            vfu_steps: self.vfus.iter().map(|v| v.counters).collect(),
        }
    }
}

/// Assembles `program`, loads `inputs` into the scratchpad, runs to halt and
/// returns the final memory image plus the execution metrics.
pub fn run_kernel(
    config: &TileConfig,
    program_text: &str,
    inputs: &[WideWord],
) -> Result<(Vec<WideWord>, MetricsReport), SimError> {
    let program = assemble_with_config(program_text, config)?;
    let mut state = TileState::new(config)?;
    state.spm.load_image(inputs)?;
    state.run(&program)?;
    Ok((state.spm.image().to_vec(), state.report()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::preset;
    use crate::softsimd::{pack, unpack};

    #[test]
    fn nop_advances_pc_and_time() {
        let a = preset("A").unwrap();
        let mut state = TileState::new(&a).unwrap();
        let program = assemble("NOP\nHALT").unwrap();
        state.step(&program).unwrap();
        assert_eq!(state.pc, 1);
        assert_eq!(state.cycle_count, 1);
        assert!(!state.halted);
    }

    #[test]
    fn halt_then_step_is_an_error() {
        let a = preset("A").unwrap();
        let mut state = TileState::new(&a).unwrap();
        let program = assemble("HALT").unwrap();
        state.step(&program).unwrap();
        assert!(state.halted);
        assert!(matches!(state.step(&program), Err(SimError::Halted)));
    }

    #[test]
    fn empty_program_costs_one_cycle_and_keeps_inputs() {
        let a = preset("A").unwrap();
        let inputs = vec![WideWord::from_u128(0xDEAD, 1536)];
        let (outputs, report) = run_kernel(&a, "HALT\n", &inputs).unwrap();
        assert_eq!(outputs[0], inputs[0]);
        assert!(outputs[1..].iter().all(|r| r.is_zero()));
        assert_eq!(report.cycles, 1);
    }

    #[test]
    fn spm_ops_cost_more() {
        let a = preset("A").unwrap();
        let mut state = TileState::new(&a).unwrap();
        let program = assemble("LOADW vwr0, row 0\nNOP\nHALT").unwrap();
        state.run(&program).unwrap();
        assert_eq!(state.cycle_count, 2 + 1 + 1);
    }

    #[test]
    fn broadcast_pipeline_composes_memory_and_datapath() {
        // On a one-word-per-slice preset, LOADW + RDW leaves unit k holding
        // word k of the loaded row; SADD then doubles it.
        let d = preset("D").unwrap();
        let mut state = TileState::new(&d).unwrap();
        let mut row = WideWord::zero(1536);
        for w in 0..8u128 {
            row.set_u128(w as usize * 192, 32, 10 + w);
        }
        state.spm.load_image(&[row.clone()]).unwrap();
        let program = assemble_with_config(
            "SETCFG 8, unsigned\nLOADW vwr0, row 0\nRDW r0, vwr0, word 0\nSADD r1, r0, r0\nHALT",
            &d,
        )
        .unwrap();
        state.run(&program).unwrap();
        for (k, vfu) in state.vfus.iter().enumerate() {
            let expect = row.extract(k * 192, 192);
            assert_eq!(vfu.register(0).unwrap(), &expect, "unit {k} slice word");
            assert_eq!(
                vfu.register(1).unwrap().get_u128(0, 32),
                2 * (10 + k as u128),
                "unit {k} sum"
            );
            assert_eq!(vfu.counters.add_subs, 1);
        }
        assert_eq!(state.counters.vwr_word_reads, 8);
    }

    #[test]
    fn simd_ops_require_setcfg() {
        let d = preset("D").unwrap();
        let mut state = TileState::new(&d).unwrap();
        let program = assemble("SADD r0, r0, r1\nHALT").unwrap();
        assert!(matches!(
            state.step(&program),
            Err(SimError::Simd(SimdError::NoActiveConfig))
        ));
    }

    #[test]
    fn requant_packs_into_low_register_bits() {
        let d = preset("D").unwrap(); // 192-bit word
        let mut state = TileState::new(&d).unwrap();
        let from = SubwordConfig::new(192, 16, false).unwrap();
        let values: Vec<i128> = (0..12).map(|i| 256 * (i + 1)).collect();
        let word = pack(&values, &from).unwrap();
        let mut row = WideWord::zero(1536);
        for w in 0..8 {
            row.deposit(w * 192, &word);
        }
        state.spm.load_image(&[row]).unwrap();
        let program = assemble_with_config(
            "SETCFG 16, unsigned\nLOADW vwr0, row 0\nRDW r0, vwr0, word 0\nREQUANT r1, r0, 8, truncate, wrap\nHALT",
            &d,
        )
        .unwrap();
        state.run(&program).unwrap();
        let out = state.vfus[0].register(1).unwrap();
        let low = out.extract(0, 96);
        let to = SubwordConfig::new(96, 8, false).unwrap();
        assert_eq!(unpack(&low, &to).unwrap(), (1..=12).collect::<Vec<i128>>());
        assert!(out.extract(96, 96).is_zero());
        assert_eq!(state.vfus[0].counters.passes, 1);
    }

    #[test]
    fn falling_off_the_end_halts() {
        let a = preset("A").unwrap();
        let mut state = TileState::new(&a).unwrap();
        let program = assemble("NOP").unwrap();
        state.step(&program).unwrap();
        state.step(&program).unwrap(); // implicit halt
        assert!(state.halted);
        assert!(matches!(state.step(&program), Err(SimError::Halted)));
    }

    #[test]
    fn determinism_of_runs() {
        let e = preset("E").unwrap();
        let text = kernels::vector_add(&e, 8).program;
        let mut rows = Vec::new();
        for r in 0..3 {
            let mut row = WideWord::zero(3072);
            for b in (0..3072).step_by(5) {
                row.set_bit(b, (b / 5 + r) % 3 == 0);
            }
            rows.push(row);
        }
        let (out1, rep1) = run_kernel(&e, &text, &rows).unwrap();
        let (out2, rep2) = run_kernel(&e, &text, &rows).unwrap();
        assert_eq!(out1, out2);
        assert_eq!(rep1, rep2);
    }
}
