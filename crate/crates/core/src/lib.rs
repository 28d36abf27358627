//! Functional model of a wide-register compute tile.
//!
//! The crate is organised around the lifecycle of a tile design point:
//!
//! * [`config`] — tile parameter sets, their invariants and the catalog of
//!   reference configurations.
//! * [`bits`] / [`memory`] — bit-exact state of the banked scratchpad, the
//!   very wide registers and the data-rearrangement paths.
//! * [`softsimd`] — subword arithmetic on plain words: packing, lane-isolated
//!   ALU ops, signed-digit encoding and shift-add constant multiplication.
//! * [`sim`] — a small instruction interpreter tying memory and datapath
//!   together, with cycle and access accounting and bundled kernels.
//! * [`phys`] — analytical floorplan, bit-level netlists and the
//!   wirelength / density metrics used to rank design points.
//! * [`report`] — sweep records, summary statistics and CSV/JSON/SVG output.

pub mod bits;
pub mod config;
pub mod memory;
pub mod phys;
pub mod report;
pub mod sim;
pub mod softsimd;

pub use bits::WideWord;
pub use config::TileConfig;
