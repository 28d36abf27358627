//! Command-line driver for the tile model: validation, simulation,
//! floorplanning, design-space sweeps, comparisons and plots.
//!
//! Exit codes: 0 on success, 1 on validation or runtime failure, 2 on usage
//! errors (the argument parser's default).

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use tilesim_core::config::{self, TileConfig};
use tilesim_core::memory::{format_image, parse_image};
use tilesim_core::phys::{
    self, build_floorplan_with, build_netlist_with, compute_metrics, estimate_wirelength,
    svg::floorplan_svg, PhysOptions, Style, UnitAreaParams,
};
use tilesim_core::report::{self, SweepRecord};
use tilesim_core::sim;

/// Environment variable naming the default layout-parameter file.
const PARAMS_ENV: &str = "TILESIM_PARAMS";

#[derive(Parser)]
#[command(
    name = "tilesim",
    version,
    about = "Wide-register tile simulator and layout explorer"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ParamsArg {
    /// Layout parameter file (key = value); falls back to $TILESIM_PARAMS,
    /// then to built-in defaults.
    #[arg(long)]
    params: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Check a configuration against all structural invariants.
    Validate {
        /// Preset name (A|B|C|D|E|VWR2A) or config file path.
        #[arg(long)]
        config: String,
    },
    /// Assemble and run a program, then write the resulting memory image.
    Simulate {
        #[arg(long)]
        config: String,
        /// Program listing file.
        #[arg(long)]
        program: PathBuf,
        /// Initial memory image (hex, one row per line); zeros if omitted.
        #[arg(long)]
        image: Option<PathBuf>,
        /// Output directory.
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Place one configuration and export the floorplan (text + SVG).
    Floorplan {
        #[arg(long)]
        config: String,
        #[command(flatten)]
        params: ParamsArg,
        #[arg(long, default_value = "direct")]
        style: Style,
        /// Baseline muxes select among every register word (full crossbar).
        #[arg(long)]
        full_flex: bool,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Evaluate many configurations and emit CSV/JSON reports.
    Sweep {
        /// Preset names and/or config file paths.
        #[arg(required = true)]
        configs: Vec<String>,
        #[command(flatten)]
        params: ParamsArg,
        /// Styles to evaluate (repeatable).
        #[arg(long = "style")]
        styles: Vec<Style>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Also print the records to stdout in this format.
        #[arg(long, value_parser = ["csv", "json"])]
        format: Option<String>,
    },
    /// Ratio report between two design points (`NAME[:STYLE]`).
    Compare {
        config_a: String,
        config_b: String,
        #[command(flatten)]
        params: ParamsArg,
        /// Fail unless b/a normalized wirelength reaches this ratio.
        #[arg(long)]
        threshold_wl: Option<f64>,
        /// Fail unless a/b density reaches this ratio.
        #[arg(long)]
        threshold_density: Option<f64>,
    },
    /// Render the trend chart (and per-preset floorplans) from a sweep CSV.
    Plot {
        csv: PathBuf,
        #[command(flatten)]
        params: ParamsArg,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
}

fn resolve_config(source: &str) -> Result<TileConfig> {
    if config::PRESET_NAMES
        .iter()
        .any(|n| n.eq_ignore_ascii_case(source))
    {
        return Ok(config::preset(source)?);
    }
    let text = fs::read_to_string(source)
        .with_context(|| format!("reading config {source:?} (not a preset name)"))?;
    Ok(config::load_config(&text)?)
}

fn resolve_params(arg: &ParamsArg) -> Result<UnitAreaParams> {
    let path = arg
        .params
        .clone()
        .or_else(|| std::env::var_os(PARAMS_ENV).map(PathBuf::from));
    match path {
        Some(p) => {
            let text = fs::read_to_string(&p).with_context(|| format!("reading params {p:?}"))?;
            Ok(UnitAreaParams::from_key_value(&text)?)
        }
        None => Ok(UnitAreaParams::default()),
    }
}

/// `NAME[:STYLE]`, style defaulting to direct.
fn parse_design_point(spec: &str) -> Result<(TileConfig, Style)> {
    let (name, style) = match spec.rsplit_once(':') {
        Some((name, style)) => (name, style.parse::<Style>().map_err(|e| anyhow!(e))?),
        None => (spec, Style::Direct),
    };
    Ok((resolve_config(name)?, style))
}

fn ensure_out_dir(out: &Path) -> Result<()> {
    fs::create_dir_all(out).with_context(|| format!("creating output directory {out:?}"))
}

fn require_valid(config: &TileConfig) -> Result<()> {
    let report = config.validate();
    if !report.ok {
        bail!(
            "configuration {:?} does not validate: {report}",
            config.name
        );
    }
    Ok(())
}

fn cmd_validate(source: &str) -> Result<()> {
    let config = resolve_config(source)?;
    let report = config.validate();
    if report.ok {
        let agg = config.aggregates()?;
        println!(
            "{}: ok (spm {} B, vwr {} B, vfu {} B)",
            config.name, agg.spm_bytes, agg.vwr_bytes, agg.vfu_bytes
        );
        Ok(())
    } else {
        bail!("{}: {report}", config.name)
    }
}

fn cmd_simulate(source: &str, program: &Path, image: Option<&Path>, out: &Path) -> Result<()> {
    let config = resolve_config(source)?;
    require_valid(&config)?;
    let program_text =
        fs::read_to_string(program).with_context(|| format!("reading program {program:?}"))?;
    let inputs = match image {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading image {p:?}"))?;
            parse_image(&text, config.spm.bitwidth_bits as usize)?
        }
        None => Vec::new(),
    };
    let (outputs, report) = sim::run_kernel(&config, &program_text, &inputs)?;
    ensure_out_dir(out)?;
    let image_path = out.join("output_image.hex");
    fs::write(&image_path, format_image(&outputs))
        .with_context(|| format!("writing {image_path:?}"))?;
    let metrics_path = out.join("metrics.json");
    let mut metrics = serde_json::to_string_pretty(&report)?;
    metrics.push('\n');
    fs::write(&metrics_path, metrics).with_context(|| format!("writing {metrics_path:?}"))?;
    println!("cycles: {}", report.cycles);
    println!("spm row reads: {}", report.counters.spm_row_reads);
    println!("spm row writes: {}", report.counters.spm_row_writes);
    println!("output image: {}", image_path.display());
    Ok(())
}

fn cmd_floorplan(
    source: &str,
    params: &ParamsArg,
    style: Style,
    full_flex: bool,
    out: &Path,
) -> Result<()> {
    let config = resolve_config(source)?;
    require_valid(&config)?;
    let params = resolve_params(params)?;
    let options = PhysOptions { full_flex };
    let plan = build_floorplan_with(&config, &params, style, &options)?;
    let netlist = build_netlist_with(&config, &plan, style, &options)?;
    let wl = estimate_wirelength(&plan, &netlist)?;
    let metrics = compute_metrics(&plan, wl)?;
    ensure_out_dir(out)?;
    let stem = format!("{}_{}", config.name, style);
    fs::write(out.join(format!("{stem}.fp")), plan.export_def())?;
    fs::write(out.join(format!("{stem}.svg")), floorplan_svg(&plan))?;
    println!(
        "{}: wirelength {:.1}, logical area {:.1}, core area {:.1}, wl/area {:.2}, density {:.2}%",
        stem,
        metrics.total_wirelength,
        metrics.logical_area,
        metrics.core_area,
        metrics.wl_to_area_ratio,
        100.0 * metrics.core_density
    );
    Ok(())
}

fn cmd_sweep(
    sources: &[String],
    params: &ParamsArg,
    styles: &[Style],
    out: &Path,
    format: Option<&str>,
) -> Result<()> {
    let params = resolve_params(params)?;
    let styles = if styles.is_empty() {
        vec![Style::Direct]
    } else {
        styles.to_vec()
    };
    // a source that fails to load still occupies its rows
    let mut records: Vec<SweepRecord> = Vec::new();
    for source in sources {
        match resolve_config(source) {
            Ok(config) => records.extend(report::sweep(&[config], &styles, &params)),
            Err(e) => {
                for &style in &styles {
                    records.push(SweepRecord {
                        name: source.clone(),
                        style: style.to_string(),
                        cells_proxy: 0.0,
                        logical_area: 0.0,
                        core_area: 0.0,
                        wirelength: 0.0,
                        wl_to_area: 0.0,
                        density: 0.0,
                        error: Some(e.to_string()),
                    });
                }
            }
        }
    }
    ensure_out_dir(out)?;
    let csv = report::to_csv(&records);
    fs::write(out.join("sweep.csv"), &csv)?;
    fs::write(out.join("sweep.json"), report::to_json(&records))?;
    match format {
        Some("csv") => print!("{csv}"),
        Some("json") => print!("{}", report::to_json(&records)),
        _ => {
            for r in &records {
                match &r.error {
                    None => println!(
                        "{:>8} {:>12}  wl/area {:>8.2}  density {:>6.2}%",
                        r.name,
                        r.style,
                        r.wl_to_area,
                        100.0 * r.density
                    ),
                    Some(e) => eprintln!("{:>8} {:>12}  ERROR: {e}", r.name, r.style),
                }
            }
            if let Ok(stats) = report::summary_stats(&records) {
                let wl = &stats.metrics["wl_to_area"];
                let d = &stats.metrics["density"];
                println!(
                    "summary over {} rows: wl/area mean {:.2} std {:.2}; density mean {:.2}% std {:.2}%",
                    stats.count,
                    wl.mean,
                    wl.pop_std,
                    100.0 * d.mean,
                    100.0 * d.pop_std
                );
            }
        }
    }
    if records.iter().all(|r| r.error.is_some()) {
        bail!("every sweep row failed");
    }
    Ok(())
}

fn cmd_compare(
    spec_a: &str,
    spec_b: &str,
    params: &ParamsArg,
    threshold_wl: Option<f64>,
    threshold_density: Option<f64>,
) -> Result<()> {
    let params = resolve_params(params)?;
    let (config_a, style_a) = parse_design_point(spec_a)?;
    let (config_b, style_b) = parse_design_point(spec_b)?;
    require_valid(&config_a)?;
    require_valid(&config_b)?;
    let a = report::evaluate_record(&config_a, &params, style_a)?;
    let b = report::evaluate_record(&config_b, &params, style_b)?;
    let cmp = report::compare(&a, &b);
    println!(
        "a: {} ({}) wl/area {:.2} density {:.2}%",
        a.name,
        a.style,
        a.wl_to_area,
        100.0 * a.density
    );
    println!(
        "b: {} ({}) wl/area {:.2} density {:.2}%",
        b.name,
        b.style,
        b.wl_to_area,
        100.0 * b.density
    );
    println!("normalized_wl_ratio_b_over_a: {:.3}", cmp.wl_ratio_b_over_a);
    println!("density_ratio_a_over_b: {:.3}", cmp.density_ratio_a_over_b);
    let mut failed = false;
    if let Some(t) = threshold_wl {
        let ok = cmp.wl_ratio_b_over_a >= t;
        println!("threshold wl >= {t}: {}", if ok { "PASS" } else { "FAIL" });
        failed |= !ok;
    }
    if let Some(t) = threshold_density {
        let ok = cmp.density_ratio_a_over_b >= t;
        println!(
            "threshold density >= {t}: {}",
            if ok { "PASS" } else { "FAIL" }
        );
        failed |= !ok;
    }
    if failed {
        bail!("threshold check failed");
    }
    Ok(())
}

fn cmd_plot(csv_path: &Path, params: &ParamsArg, out: &Path) -> Result<()> {
    let text = fs::read_to_string(csv_path).with_context(|| format!("reading CSV {csv_path:?}"))?;
    let records = report::parse_csv(&text)?;
    let trend = report::trend_svg(&records)?;
    ensure_out_dir(out)?;
    let trend_path = out.join("trend.svg");
    fs::write(&trend_path, trend)?;
    println!("trend chart: {}", trend_path.display());
    // floorplan renderings for rows that name a preset
    let params = resolve_params(params)?;
    for r in records.iter().filter(|r| r.error.is_none()) {
        if config::PRESET_NAMES
            .iter()
            .any(|n| n.eq_ignore_ascii_case(&r.name))
        {
            let config = config::preset(&r.name)?;
            let style: Style = r.style.parse().map_err(|e: String| anyhow!(e))?;
            let plan = phys::build_floorplan(&config, &params, style)?;
            let path = out.join(format!("floorplan_{}_{}.svg", r.name, r.style));
            fs::write(&path, floorplan_svg(&plan))?;
            println!("floorplan: {}", path.display());
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Validate { config } => cmd_validate(&config),
        Command::Simulate {
            config,
            program,
            image,
            out,
        } => cmd_simulate(&config, &program, image.as_deref(), &out),
        Command::Floorplan {
            config,
            params,
            style,
            full_flex,
            out,
        } => cmd_floorplan(&config, &params, style, full_flex, &out),
        Command::Sweep {
            configs,
            params,
            styles,
            out,
            format,
        } => cmd_sweep(&configs, &params, &styles, &out, format.as_deref()),
        Command::Compare {
            config_a,
            config_b,
            params,
            threshold_wl,
            threshold_density,
        } => cmd_compare(
            &config_a,
            &config_b,
            &params,
            threshold_wl,
            threshold_density,
        ),
        Command::Plot { csv, params, out } => cmd_plot(&csv, &params, &out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
