//! Analytical floorplan and interconnect model.
//!
//! The tile layout is column-based and bit-aligned: scratchpad macros sit at
//! the left edge, then (when present) the shuffling block, then one latch
//! column per wide register, then the functional units, each vertically
//! centered on its slice's bit range. Bit `b` of the wide bus lives at
//! height `b * bit_pitch`, so a direct-connect design wires each bit straight
//! across with short point-to-point nets.
//!
//! Two interconnect styles are modeled:
//!
//! * [`Style::Direct`] — every scratchpad output bit feeds the aligned latch
//!   bit, and every slice word bit feeds its unit's port bit; two-pin nets
//!   throughout (with pass-through pins when a one-word rotator is present).
//! * [`Style::MuxBaseline`] — the flexible baseline: a crossbar-style
//!   shuffling block replaces the rotator, and every unit input bit selects
//!   among all candidate slice words of all registers through a mux column.
//!   Mux inputs are pin-pitch limited, so the mux column grows with the
//!   candidate count, dragging core area and net spans with it.
//!
//! Wirelength is the half-perimeter of each net's pin bounding box, the
//! standard pre-route estimate. Core area is `block area / utilization`
//! plus whatever whitespace the column geometry forces on top; whitespace
//! is spread uniformly into the routing channels so relative placement is
//! preserved when the core grows.

pub mod svg;

use std::fmt;

use serde::Serialize;

use crate::config::TileConfig;

/// Calibration knobs of the layout model. Areas are in square length units;
/// the absolute scale is arbitrary, only ratios matter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UnitAreaParams {
    pub area_per_latch_bit: f64,
    pub area_per_vfu_bit: f64,
    pub area_per_mux2_bit: f64,
    pub area_per_shuffler_bit: f64,
    pub spm_macro_width_per_bank: f64,
    pub spm_macro_height: f64,
    pub bit_pitch: f64,
    pub channel_gap: f64,
    pub target_utilization: f64,
}

impl Default for UnitAreaParams {
    /// Shipped defaults, fitted once so the catalog configurations' relative
    /// logical areas track the bundled reference data (see the regression
    /// tests) and the headline density/wirelength ratios hold.
    fn default() -> Self {
        UnitAreaParams {
            area_per_latch_bit: 0.0616,
            area_per_vfu_bit: 1.4007,
            area_per_mux2_bit: 0.0154,
            area_per_shuffler_bit: 0.1078,
            spm_macro_width_per_bank: 32.663,
            spm_macro_height: 25.6,
            bit_pitch: 0.05,
            channel_gap: 3.0,
            target_utilization: 0.8,
        }
    }
}

#[derive(Debug)]
pub enum PhysError {
    InvalidParams(String),
    NonValidatingConfig(String),
    GeometryInfeasible(String),
    StyleMismatch {
        floorplan: Style,
        requested: Style,
    },
    UnresolvedPin {
        net: usize,
        block: usize,
        pin: usize,
    },
    ZeroLogicalArea,
}

impl fmt::Display for PhysError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PhysError::InvalidParams(msg) => write!(f, "invalid layout parameters: {msg}"),
            PhysError::NonValidatingConfig(msg) => write!(f, "config does not validate: {msg}"),
            PhysError::GeometryInfeasible(msg) => write!(f, "geometry infeasible: {msg}"),
            PhysError::StyleMismatch {
                floorplan,
                requested,
            } => {
                write!(
                    f,
                    "floorplan was built {floorplan}, netlist requested {requested}"
                )
            }
            PhysError::UnresolvedPin { net, block, pin } => {
                write!(f, "net {net} references unknown pin {pin} of block {block}")
            }
            PhysError::ZeroLogicalArea => write!(f, "logical area is zero"),
        }
    }
}

impl std::error::Error for PhysError {}

impl UnitAreaParams {
    pub fn validate(&self) -> Result<(), PhysError> {
        let fields = [
            ("area_per_latch_bit", self.area_per_latch_bit),
            ("area_per_vfu_bit", self.area_per_vfu_bit),
            ("area_per_mux2_bit", self.area_per_mux2_bit),
            ("area_per_shuffler_bit", self.area_per_shuffler_bit),
            ("spm_macro_width_per_bank", self.spm_macro_width_per_bank),
            ("spm_macro_height", self.spm_macro_height),
            ("bit_pitch", self.bit_pitch),
        ];
        for (name, v) in fields {
            if !v.is_finite() || v <= 0.0 {
                return Err(PhysError::InvalidParams(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        if !self.channel_gap.is_finite() || self.channel_gap < 0.0 {
            return Err(PhysError::InvalidParams(format!(
                "channel_gap must be non-negative, got {}",
                self.channel_gap
            )));
        }
        if !(self.target_utilization > 0.0 && self.target_utilization <= 1.0) {
            return Err(PhysError::InvalidParams(format!(
                "target_utilization must be in (0, 1], got {}",
                self.target_utilization
            )));
        }
        Ok(())
    }

    /// Flat `key = value` rendering, one parameter per line.
    pub fn to_key_value(&self) -> String {
        format!(
            "area_per_latch_bit = {}\narea_per_vfu_bit = {}\narea_per_mux2_bit = {}\narea_per_shuffler_bit = {}\nspm_macro_width_per_bank = {}\nspm_macro_height = {}\nbit_pitch = {}\nchannel_gap = {}\ntarget_utilization = {}\n",
            self.area_per_latch_bit,
            self.area_per_vfu_bit,
            self.area_per_mux2_bit,
            self.area_per_shuffler_bit,
            self.spm_macro_width_per_bank,
            self.spm_macro_height,
            self.bit_pitch,
            self.channel_gap,
            self.target_utilization,
        )
    }

    /// Parses the `key = value` format; unset keys keep their defaults.
    pub fn from_key_value(text: &str) -> Result<Self, PhysError> {
        let mut params = UnitAreaParams::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                PhysError::InvalidParams(format!("line {}: expected `key = value`", i + 1))
            })?;
            let value: f64 = value.trim().parse().map_err(|_| {
                PhysError::InvalidParams(format!("line {}: bad number {:?}", i + 1, value.trim()))
            })?;
            match key.trim() {
                "area_per_latch_bit" => params.area_per_latch_bit = value,
                "area_per_vfu_bit" => params.area_per_vfu_bit = value,
                "area_per_mux2_bit" => params.area_per_mux2_bit = value,
                "area_per_shuffler_bit" => params.area_per_shuffler_bit = value,
                "spm_macro_width_per_bank" => params.spm_macro_width_per_bank = value,
                "spm_macro_height" => params.spm_macro_height = value,
                "bit_pitch" => params.bit_pitch = value,
                "channel_gap" => params.channel_gap = value,
                "target_utilization" => params.target_utilization = value,
                other => {
                    return Err(PhysError::InvalidParams(format!(
                        "line {}: unknown key {other:?}",
                        i + 1
                    )))
                }
            }
        }
        params.validate()?;
        Ok(params)
    }
}

/// Interconnect style being evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Style {
    Direct,
    MuxBaseline,
}

impl fmt::Display for Style {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Style::Direct => "direct",
            Style::MuxBaseline => "mux_baseline",
        })
    }
}

impl std::str::FromStr for Style {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "direct" => Ok(Style::Direct),
            "mux_baseline" | "mux" => Ok(Style::MuxBaseline),
            other => Err(format!(
                "unknown style {other:?} (expected direct|mux_baseline)"
            )),
        }
    }
}

/// Extra modeling switches.
#[derive(Debug, Clone, Copy, Default)]
pub struct PhysOptions {
    /// Baseline muxes select among every word of the register, not just the
    /// slice's words (full-crossbar flexibility).
    pub full_flex: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Rect {
    pub llx: f64,
    pub lly: f64,
    pub urx: f64,
    pub ury: f64,
}

impl Rect {
    pub fn width(&self) -> f64 {
        self.urx - self.llx
    }

    pub fn height(&self) -> f64 {
        self.ury - self.lly
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn contains(&self, other: &Rect, tol: f64) -> bool {
        other.llx >= self.llx - tol
            && other.lly >= self.lly - tol
            && other.urx <= self.urx + tol
            && other.ury <= self.ury + tol
    }

    fn overlaps(&self, other: &Rect, tol: f64) -> bool {
        self.llx + tol < other.urx
            && other.llx + tol < self.urx
            && self.lly + tol < other.ury
            && other.lly + tol < self.ury
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BlockKind {
    Spm,
    Vwr,
    Vfu,
    Shuffler,
    Mux,
}

impl fmt::Display for BlockKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BlockKind::Spm => "SPM",
            BlockKind::Vwr => "VWR",
            BlockKind::Vfu => "VFU",
            BlockKind::Shuffler => "SHUFFLER",
            BlockKind::Mux => "MUX",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Pin {
    pub x: f64,
    pub y: f64,
}

/// A placed block: footprint rectangle, the logic area it accounts for, and
/// its connection pins. For packed blocks footprint equals logic area; mux
/// blocks are pin-pitch limited so their footprint can exceed it.
#[derive(Debug, Clone, Serialize)]
pub struct Block {
    pub name: String,
    pub kind: BlockKind,
    pub rect: Rect,
    pub logic_area: f64,
    pub pins: Vec<Pin>,
}

/// Placed design: core rectangle plus all blocks, grouped in deterministic
/// order (scratchpad banks, shuffler, registers, muxes, units).
#[derive(Debug, Clone)]
pub struct Floorplan {
    pub config_name: String,
    pub style: Style,
    pub core: Rect,
    pub blocks: Vec<Block>,
    spm_start: usize,
    shuffler: Option<usize>,
    vwr_start: usize,
    mux_start: Option<usize>,
    vfu_start: usize,
}

impl Floorplan {
    pub fn spm_block(&self, bank: usize) -> usize {
        self.spm_start + bank
    }

    pub fn shuffler_block(&self) -> Option<usize> {
        self.shuffler
    }

    pub fn vwr_block(&self, v: usize) -> usize {
        self.vwr_start + v
    }

    pub fn mux_block(&self, k: usize) -> Option<usize> {
        self.mux_start.map(|s| s + k)
    }

    pub fn vfu_block(&self, k: usize) -> usize {
        self.vfu_start + k
    }

    pub fn total_logic_area(&self) -> f64 {
        self.blocks.iter().map(|b| b.logic_area).sum()
    }

    /// DEF-like plain-text export: core line, then one line per block.
    pub fn export_def(&self) -> String {
        let mut out = format!(
            "core {:.4} {:.4} {:.4} {:.4}\n",
            self.core.llx, self.core.lly, self.core.urx, self.core.ury
        );
        for b in &self.blocks {
            out.push_str(&format!(
                "block {} {} {:.4} {:.4} {:.4} {:.4}\n",
                b.name, b.kind, b.rect.llx, b.rect.lly, b.rect.urx, b.rect.ury
            ));
        }
        out
    }
}

/// Reference to one pin of one placed block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PinRef {
    pub block: usize,
    pub pin: usize,
}

/// A multi-pin net; wirelength is estimated per net.
#[derive(Debug, Clone)]
pub struct Net {
    pub pins: Vec<PinRef>,
}

#[derive(Debug, Clone)]
pub struct Netlist {
    pub style: Style,
    pub nets: Vec<Net>,
}

/// Physical quality metrics of one evaluated design point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricsRecord {
    pub total_wirelength: f64,
    pub logical_area: f64,
    pub core_area: f64,
    pub core_density: f64,
    pub wl_to_area_ratio: f64,
}

struct Geometry {
    word_width: usize,
    bitwidth: usize,
    wpv: usize,
    wps: usize,
    nvfu: usize,
    columns: usize,
    vfus_per_column: usize,
    candidates: usize,
}

fn geometry(config: &TileConfig, options: &PhysOptions) -> Geometry {
    let columns = config.columns as usize;
    let nvfu = config.vfu.count as usize;
    let wps = config.vwr.words_per_slice as usize;
    let wpv = config.vwr.words_per_vwr as usize;
    let vwrs = config.vwr.number as usize;
    Geometry {
        word_width: config.word_width_bits as usize,
        bitwidth: config.vwr.bitwidth_bits as usize,
        wpv,
        wps,
        nvfu,
        columns,
        vfus_per_column: nvfu.div_ceil(columns),
        candidates: vwrs * if options.full_flex { wpv } else { wps },
    }
}

/// Places every block of `config` under `style` and sizes the core.
pub fn build_floorplan(
    config: &TileConfig,
    params: &UnitAreaParams,
    style: Style,
) -> Result<Floorplan, PhysError> {
    build_floorplan_with(config, params, style, &PhysOptions::default())
}

pub fn build_floorplan_with(
    config: &TileConfig,
    params: &UnitAreaParams,
    style: Style,
    options: &PhysOptions,
) -> Result<Floorplan, PhysError> {
    params.validate()?;
    let report = config.validate();
    if !report.ok {
        return Err(PhysError::NonValidatingConfig(report.to_string()));
    }
    let g = geometry(config, options);
    let p = params.bit_pitch;
    let data_height = g.bitwidth as f64 * p;
    let banks = config.spm.banks as usize;
    let vwrs = config.vwr.number as usize;
    let has_shuffler_block = config.has_shuffler || style == Style::MuxBaseline;

    // column widths
    let spm_width = params.spm_macro_width_per_bank;
    let vwr_width = params.area_per_latch_bit / p;
    let vfu_width = params.area_per_vfu_bit / p;
    let shuffler_area = match style {
        Style::Direct => g.bitwidth as f64 * params.area_per_shuffler_bit,
        // crossbar-style shuffling: one 2:1 mux per bit per selectable word
        Style::MuxBaseline => g.bitwidth as f64 * (g.wpv - 1) as f64 * params.area_per_mux2_bit,
    };
    let shuffler_width = shuffler_area / data_height;
    // one mux tree per unit input bit over all candidate words
    let mux_logic_per_vfu =
        g.word_width as f64 * (g.candidates - 1) as f64 * params.area_per_mux2_bit;
    let mux_block_height = (g.word_width * g.candidates) as f64 * p; // pin-pitch limited
    let mux_width = mux_logic_per_vfu / mux_block_height;

    let mut column_widths: Vec<f64> = vec![spm_width];
    if has_shuffler_block {
        column_widths.push(shuffler_width);
    }
    column_widths.extend(std::iter::repeat_n(vwr_width, vwrs));
    if style == Style::MuxBaseline {
        column_widths.extend(std::iter::repeat_n(mux_width, g.columns));
    }
    column_widths.extend(std::iter::repeat_n(vfu_width, g.columns));

    // core height: bit rows, the macro stack, and (baseline) the mux pins
    let mut core_height = data_height.max(banks as f64 * params.spm_macro_height);
    if style == Style::MuxBaseline {
        core_height = core_height.max(g.vfus_per_column as f64 * mux_block_height);
    }

    // logic area drives the utilization term of the core area
    let mut logic_area = banks as f64 * spm_width * params.spm_macro_height
        + vwrs as f64 * g.bitwidth as f64 * params.area_per_latch_bit
        + g.nvfu as f64 * g.word_width as f64 * params.area_per_vfu_bit;
    if has_shuffler_block {
        logic_area += shuffler_area;
    }
    if style == Style::MuxBaseline {
        logic_area += g.nvfu as f64 * mux_logic_per_vfu;
    }

    let gaps = column_widths.len() - 1;
    let min_width: f64 = column_widths.iter().sum::<f64>() + gaps as f64 * params.channel_gap;
    // core area: logic / utilization, widened if the columns do not fit
    let core_area = (min_width * core_height)
        .max(logic_area / params.target_utilization + (min_width * core_height - logic_area));
    let core_width = core_area / core_height;
    let extra = core_width - min_width;
    if extra < -1e-9 {
        return Err(PhysError::GeometryInfeasible(format!(
            "columns need {min_width:.3} length units, core provides {core_width:.3}"
        )));
    }
    let gap = params.channel_gap + extra.max(0.0) / gaps as f64;

    let mut blocks = Vec::new();
    let mut cursor = 0.0;
    let mut column = column_widths.iter();

    // scratchpad banks, stacked bottom-up at the left edge
    let spm_start = blocks.len();
    let w = *column.next().unwrap();
    for b in 0..banks {
        let y0 = b as f64 * params.spm_macro_height;
        let rect = Rect {
            llx: cursor,
            lly: y0,
            urx: cursor + w,
            ury: y0 + params.spm_macro_height,
        };
        let row_bits = config.spm.bank_row_bits as usize;
        let pin_pitch = params.spm_macro_height / row_bits as f64;
        let pins = (0..row_bits)
            .map(|i| Pin {
                x: rect.urx,
                y: y0 + (i as f64 + 0.5) * pin_pitch,
            })
            .collect();
        blocks.push(Block {
            name: format!("spm{b}"),
            kind: BlockKind::Spm,
            rect,
            logic_area: w * params.spm_macro_height,
            pins,
        });
    }
    cursor += w + gap;

    // shuffling block: full-height pass-through on the wide bus
    let shuffler = if has_shuffler_block {
        let w = *column.next().unwrap();
        let rect = Rect {
            llx: cursor,
            lly: 0.0,
            urx: cursor + w,
            ury: data_height,
        };
        let mut pins = Vec::with_capacity(2 * g.bitwidth);
        for gb in 0..g.bitwidth {
            let y = (gb as f64 + 0.5) * p;
            pins.push(Pin { x: rect.llx, y });
            pins.push(Pin { x: rect.urx, y });
        }
        blocks.push(Block {
            name: "shuffler".to_string(),
            kind: BlockKind::Shuffler,
            rect,
            logic_area: shuffler_area,
            pins,
        });
        cursor += w + gap;
        Some(spm_start + banks)
    } else {
        None
    };

    // one latch column per wide register
    let vwr_start = blocks.len();
    for v in 0..vwrs {
        let w = *column.next().unwrap();
        let rect = Rect {
            llx: cursor,
            lly: 0.0,
            urx: cursor + w,
            ury: data_height,
        };
        let mut pins = Vec::with_capacity(2 * g.bitwidth);
        for gb in 0..g.bitwidth {
            let y = (gb as f64 + 0.5) * p;
            pins.push(Pin { x: rect.llx, y });
            pins.push(Pin { x: rect.urx, y });
        }
        blocks.push(Block {
            name: format!("vwr{v}"),
            kind: BlockKind::Vwr,
            rect,
            logic_area: g.bitwidth as f64 * params.area_per_latch_bit,
            pins,
        });
        cursor += w + gap;
    }

    // baseline word-select muxes, stacked per tile column
    let mux_start = if style == Style::MuxBaseline {
        let start = blocks.len();
        for c in 0..g.columns {
            let w = *column.next().unwrap();
            for slot in 0..g.vfus_per_column {
                let k = c * g.vfus_per_column + slot;
                if k >= g.nvfu {
                    break;
                }
                let y0 = slot as f64 * mux_block_height;
                let rect = Rect {
                    llx: cursor,
                    lly: y0,
                    urx: cursor + w,
                    ury: y0 + mux_block_height,
                };
                let mut pins = Vec::with_capacity(g.word_width * g.candidates + g.word_width);
                for j in 0..g.word_width {
                    for cand in 0..g.candidates {
                        let y = y0 + ((j * g.candidates + cand) as f64 + 0.5) * p;
                        pins.push(Pin { x: rect.llx, y });
                    }
                }
                for j in 0..g.word_width {
                    let y = y0 + ((j * g.candidates) as f64 + g.candidates as f64 / 2.0) * p;
                    pins.push(Pin { x: rect.urx, y });
                }
                blocks.push(Block {
                    name: format!("mux{k}"),
                    kind: BlockKind::Mux,
                    rect,
                    logic_area: mux_logic_per_vfu,
                    pins,
                });
            }
            cursor += w + gap;
        }
        Some(start)
    } else {
        None
    };

    // functional units, centered on their slice's bit range
    let vfu_start = blocks.len();
    for c in 0..g.columns {
        let w = *column.next().unwrap();
        for slot in 0..g.vfus_per_column {
            let k = c * g.vfus_per_column + slot;
            if k >= g.nvfu {
                break;
            }
            let slice_height = (g.wps * g.word_width) as f64 * p;
            let block_height = g.word_width as f64 * p;
            let y0 = slot as f64 * slice_height + (slice_height - block_height) / 2.0;
            let rect = Rect {
                llx: cursor,
                lly: y0,
                urx: cursor + w,
                ury: y0 + block_height,
            };
            let pins = (0..g.word_width)
                .map(|j| Pin {
                    x: rect.llx,
                    y: y0 + (j as f64 + 0.5) * p,
                })
                .collect();
            blocks.push(Block {
                name: format!("vfu{k}"),
                kind: BlockKind::Vfu,
                rect,
                logic_area: g.word_width as f64 * params.area_per_vfu_bit,
                pins,
            });
        }
        if c + 1 < g.columns {
            cursor += w + gap;
        } else {
            cursor += w;
        }
    }

    let core = Rect {
        llx: 0.0,
        lly: 0.0,
        urx: cursor.max(core_width),
        ury: core_height,
    };
    let plan = Floorplan {
        config_name: config.name.clone(),
        style,
        core,
        blocks,
        spm_start,
        shuffler,
        vwr_start,
        mux_start,
        vfu_start,
    };
    debug_assert!(plan
        .blocks
        .iter()
        .all(|b| plan.core.contains(&b.rect, 1e-6)));
    debug_assert!(!plan.blocks.iter().enumerate().any(|(i, a)| {
        plan.blocks[i + 1..]
            .iter()
            .any(|b| a.rect.overlaps(&b.rect, 1e-9))
    }));
    Ok(plan)
}

/// Pin index of scratchpad output bit `gb` (bank-local pin numbering).
fn spm_pin(config: &TileConfig, plan: &Floorplan, gb: usize) -> PinRef {
    let row_bits = config.spm.bank_row_bits as usize;
    PinRef {
        block: plan.spm_block(gb / row_bits),
        pin: gb % row_bits,
    }
}

/// Builds the bit-level netlist matching `style`.
///
/// Direct style: one net per register per bus bit (scratchpad output to the
/// aligned latch bit, passing through the shuffler when present), and one
/// two-pin net per slice word bit to its unit port. Baseline style: the
/// unit-side nets become one multi-pin net per unit input bit, connecting
/// all candidate word bits through the mux block; the crossbar shuffling
/// block additionally spans each bus net across the full word range.
pub fn build_netlist(
    config: &TileConfig,
    plan: &Floorplan,
    style: Style,
) -> Result<Netlist, PhysError> {
    build_netlist_with(config, plan, style, &PhysOptions::default())
}

pub fn build_netlist_with(
    config: &TileConfig,
    plan: &Floorplan,
    style: Style,
    options: &PhysOptions,
) -> Result<Netlist, PhysError> {
    if plan.style != style {
        return Err(PhysError::StyleMismatch {
            floorplan: plan.style,
            requested: style,
        });
    }
    let g = geometry(config, options);
    let vwrs = config.vwr.number as usize;
    let mut nets = Vec::new();

    // memory-side: scratchpad row bit to each register's latch bit
    for v in 0..vwrs {
        for gb in 0..g.bitwidth {
            let mut pins = vec![spm_pin(config, plan, gb)];
            if let Some(shuf) = plan.shuffler_block() {
                pins.push(PinRef {
                    block: shuf,
                    pin: 2 * gb,
                }); // west
                if style == Style::MuxBaseline {
                    // crossbar delivery: this bit can land in any word slot
                    let j = gb % g.word_width;
                    pins.push(PinRef {
                        block: shuf,
                        pin: 2 * j + 1,
                    });
                    pins.push(PinRef {
                        block: shuf,
                        pin: 2 * ((g.wpv - 1) * g.word_width + j) + 1,
                    });
                }
                pins.push(PinRef {
                    block: shuf,
                    pin: 2 * gb + 1,
                }); // east
            }
            pins.push(PinRef {
                block: plan.vwr_block(v),
                pin: 2 * gb,
            }); // latch west
            nets.push(Net { pins });
        }
    }

    // datapath-side
    match style {
        Style::Direct => {
            for v in 0..vwrs {
                for k in 0..g.nvfu {
                    for m in 0..g.wps {
                        let word = (k * g.wps + m) % g.wpv;
                        for j in 0..g.word_width {
                            let gb = word * g.word_width + j;
                            nets.push(Net {
                                pins: vec![
                                    PinRef {
                                        block: plan.vwr_block(v),
                                        pin: 2 * gb + 1,
                                    },
                                    PinRef {
                                        block: plan.vfu_block(k),
                                        pin: j,
                                    },
                                ],
                            });
                        }
                    }
                }
            }
        }
        Style::MuxBaseline => {
            let words_per_source = if options.full_flex { g.wpv } else { g.wps };
            for k in 0..g.nvfu {
                let mux = plan
                    .mux_block(k)
                    .expect("baseline floorplan has mux blocks");
                for j in 0..g.word_width {
                    let mut pins = Vec::with_capacity(g.candidates * 2 + 2);
                    let mut cand = 0;
                    for v in 0..vwrs {
                        for m in 0..words_per_source {
                            let word = if options.full_flex {
                                m
                            } else {
                                (k * g.wps + m) % g.wpv
                            };
                            let gb = word * g.word_width + j;
                            pins.push(PinRef {
                                block: plan.vwr_block(v),
                                pin: 2 * gb + 1,
                            });
                            pins.push(PinRef {
                                block: mux,
                                pin: j * g.candidates + cand,
                            });
                            cand += 1;
                        }
                    }
                    pins.push(PinRef {
                        block: mux,
                        pin: g.word_width * g.candidates + j,
                    });
                    pins.push(PinRef {
                        block: plan.vfu_block(k),
                        pin: j,
                    });
                    nets.push(Net { pins });
                }
            }
        }
    }
    Ok(Netlist { style, nets })
}

/// Half-perimeter wirelength: for each net, half the perimeter of its pin
/// bounding box; for a two-pin net this is the Manhattan distance.
pub fn estimate_wirelength(plan: &Floorplan, netlist: &Netlist) -> Result<f64, PhysError> {
    let mut total = 0.0;
    for (i, net) in netlist.nets.iter().enumerate() {
        let mut min_x = f64::INFINITY;
        let mut max_x = f64::NEG_INFINITY;
        let mut min_y = f64::INFINITY;
        let mut max_y = f64::NEG_INFINITY;
        for pref in &net.pins {
            let pin = plan
                .blocks
                .get(pref.block)
                .and_then(|b| b.pins.get(pref.pin))
                .ok_or(PhysError::UnresolvedPin {
                    net: i,
                    block: pref.block,
                    pin: pref.pin,
                })?;
            min_x = min_x.min(pin.x);
            max_x = max_x.max(pin.x);
            min_y = min_y.min(pin.y);
            max_y = max_y.max(pin.y);
        }
        total += (max_x - min_x) + (max_y - min_y);
    }
    Ok(total)
}

/// Derives the summary metrics from a placed design and its wirelength.
pub fn compute_metrics(plan: &Floorplan, wirelength: f64) -> Result<MetricsRecord, PhysError> {
    let logical_area = plan.total_logic_area();
    if logical_area <= 0.0 {
        return Err(PhysError::ZeroLogicalArea);
    }
    let core_area = plan.core.area();
    Ok(MetricsRecord {
        total_wirelength: wirelength,
        logical_area,
        core_area,
        core_density: logical_area / core_area,
        wl_to_area_ratio: wirelength / logical_area,
    })
}

/// Convenience: floorplan, netlist, wirelength and metrics in one call.
pub fn evaluate(
    config: &TileConfig,
    params: &UnitAreaParams,
    style: Style,
) -> Result<(Floorplan, MetricsRecord), PhysError> {
    let plan = build_floorplan(config, params, style)?;
    let netlist = build_netlist(config, &plan, style)?;
    let wl = estimate_wirelength(&plan, &netlist)?;
    let metrics = compute_metrics(&plan, wl)?;
    Ok((plan, metrics))
}
