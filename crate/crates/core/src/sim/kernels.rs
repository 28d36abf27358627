//! Bundled reference kernels, emitted as straight-line programs.
//!
//! Every generator unrolls over the words of a slice so the same builder
//! works for any slice depth, and stays within two local registers so it
//! runs on every catalog configuration. Data layout: a kernel operand is one
//! scratchpad row; all lanes of the row are independent elements processed
//! in parallel (unit `k` handles the words of slice `k`).
//!
//! The single-register-file access pattern (reload the row before each word
//! read) is intentionally conservative: it is correct even when the tile has
//! only one wide register, at the price of extra wide loads.

use std::fmt::Write;

use crate::config::TileConfig;

/// A generated program plus the rows it consumes and produces.
#[derive(Debug, Clone)]
pub struct Kernel {
    pub name: &'static str,
    pub program: String,
    pub input_rows: Vec<usize>,
    pub output_rows: Vec<usize>,
}

/// Elementwise sum of rows 0 and 1 into row 2 (modular, per lane).
pub fn vector_add(config: &TileConfig, subword_bits: u32) -> Kernel {
    let wps = config.vwr.words_per_slice as usize;
    let mut p = String::new();
    writeln!(p, "; vector add: row2 = row0 + row1").unwrap();
    writeln!(p, "SETCFG {subword_bits}, unsigned").unwrap();
    for w in 0..wps {
        writeln!(p, "LOADW vwr0, row 0").unwrap();
        writeln!(p, "RDW r0, vwr0, word {w}").unwrap();
        writeln!(p, "LOADW vwr0, row 1").unwrap();
        writeln!(p, "RDW r1, vwr0, word {w}").unwrap();
        writeln!(p, "SADD r0, r0, r1").unwrap();
        writeln!(p, "LOADW vwr0, row 2").unwrap();
        writeln!(p, "WRW vwr0, word {w}, r0").unwrap();
        writeln!(p, "STOREW vwr0, row 2").unwrap();
    }
    writeln!(p, "HALT").unwrap();
    Kernel {
        name: "vector_add",
        program: p,
        input_rows: vec![0, 1],
        output_rows: vec![2],
    }
}

/// Scales row 0 by a constant into row 1 (shift-add multiply, per lane).
pub fn constant_scale(config: &TileConfig, subword_bits: u32, constant: i64) -> Kernel {
    let wps = config.vwr.words_per_slice as usize;
    let mut p = String::new();
    writeln!(p, "; constant scale: row1 = {constant} * row0").unwrap();
    writeln!(p, "SETCFG {subword_bits}, unsigned").unwrap();
    for w in 0..wps {
        writeln!(p, "LOADW vwr0, row 0").unwrap();
        writeln!(p, "RDW r0, vwr0, word {w}").unwrap();
        writeln!(p, "SMULC r0, r0, {constant}").unwrap();
        writeln!(p, "LOADW vwr0, row 1").unwrap();
        writeln!(p, "WRW vwr0, word {w}, r0").unwrap();
        writeln!(p, "STOREW vwr0, row 1").unwrap();
    }
    writeln!(p, "HALT").unwrap();
    Kernel {
        name: "constant_scale",
        program: p,
        input_rows: vec![0],
        output_rows: vec![1],
    }
}

/// Per-lane dot product along the row axis: with `coeffs = [c0..cN-1]`,
/// row N gets `sum_r c_r * row_r`, accumulated lane by lane via shift-add
/// multiplies.
pub fn dot_product(config: &TileConfig, subword_bits: u32, coeffs: &[i64]) -> Kernel {
    let wps = config.vwr.words_per_slice as usize;
    let out_row = coeffs.len();
    let mut p = String::new();
    writeln!(p, "; dot product: row{out_row} = sum_r coeffs[r] * row_r").unwrap();
    writeln!(p, "SETCFG {subword_bits}, unsigned").unwrap();
    for w in 0..wps {
        writeln!(p, "SSUB r0, r0, r0").unwrap();
        for (r, c) in coeffs.iter().enumerate() {
            writeln!(p, "LOADW vwr0, row {r}").unwrap();
            writeln!(p, "RDW r1, vwr0, word {w}").unwrap();
            writeln!(p, "SMULC r1, r1, {c}").unwrap();
            writeln!(p, "SADD r0, r0, r1").unwrap();
        }
        writeln!(p, "LOADW vwr0, row {out_row}").unwrap();
        writeln!(p, "WRW vwr0, word {w}, r0").unwrap();
        writeln!(p, "STOREW vwr0, row {out_row}").unwrap();
    }
    writeln!(p, "HALT").unwrap();
    Kernel {
        name: "dot_product",
        program: p,
        input_rows: (0..coeffs.len()).collect(),
        output_rows: vec![out_row],
    }
}

/// 4x4 matrix multiply against a constant weight matrix, one independent
/// problem instance per lane.
///
/// Element `a[i][k]` of every instance lives in row `4*i + k`; the product
/// `c[i][j] = sum_k a[i][k] * w[k][j]` lands in row `16 + 4*i + j`.
pub fn matmul4(config: &TileConfig, subword_bits: u32, weights: &[[i64; 4]; 4]) -> Kernel {
    let wps = config.vwr.words_per_slice as usize;
    let mut p = String::new();
    writeln!(p, "; 4x4 matmul with constant weights, lanewise instances").unwrap();
    writeln!(p, "SETCFG {subword_bits}, unsigned").unwrap();
    for i in 0..4 {
        for j in 0..4 {
            let out_row = 16 + 4 * i + j;
            for w in 0..wps {
                writeln!(p, "SSUB r0, r0, r0").unwrap();
                for (k, row_weights) in weights.iter().enumerate() {
                    writeln!(p, "LOADW vwr0, row {}", 4 * i + k).unwrap();
                    writeln!(p, "RDW r1, vwr0, word {w}").unwrap();
                    writeln!(p, "SMULC r1, r1, {}", row_weights[j]).unwrap();
                    writeln!(p, "SADD r0, r0, r1").unwrap();
                }
                writeln!(p, "LOADW vwr0, row {out_row}").unwrap();
                writeln!(p, "WRW vwr0, word {w}, r0").unwrap();
                writeln!(p, "STOREW vwr0, row {out_row}").unwrap();
            }
        }
    }
    writeln!(p, "HALT").unwrap();
    Kernel {
        name: "matmul4",
        program: p,
        input_rows: (0..16).collect(),
        output_rows: (16..32).collect(),
    }
}

/// Weight matrix used by the bundled matmul demo; entries are cheap in
/// signed-digit form and include negatives.
pub const DEMO_WEIGHTS: [[i64; 4]; 4] = [
    [7, -3, 12, 1],
    [2, 5, -6, 9],
    [-1, 8, 3, -12],
    [4, -7, 10, 6],
];
