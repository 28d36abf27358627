//! End-to-end tests driving the `tilesim` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tilesim_core::bits::WideWord;
use tilesim_core::config::{preset, save_config};
use tilesim_core::memory::{format_image, parse_image};
use tilesim_core::sim::kernels;

fn tilesim(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tilesim"))
        .args(args)
        .current_dir(cwd)
        .env_remove("TILESIM_PARAMS")
        .output()
        .expect("spawn tilesim")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn validate_preset_file_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("e.json");
    fs::write(&path, save_config(&preset("E").unwrap())).unwrap();
    let out = tilesim(
        &["validate", "--config", path.to_str().unwrap()],
        dir.path(),
    );
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).contains("E: ok"));
}

#[test]
fn validate_broken_config_exits_one_with_violation() {
    let dir = tempfile::tempdir().unwrap();
    let mut doc = save_config(&preset("E").unwrap());
    // corrupt the slice balance
    doc = doc.replace("\"words_per_slice\": 1", "\"words_per_slice\": 3");
    let path = dir.path().join("broken.json");
    fs::write(&path, doc).unwrap();
    let out = tilesim(
        &["validate", "--config", path.to_str().unwrap()],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(
        stderr(&out).contains("slices_per_vwr*words_per_slice"),
        "{}",
        stderr(&out)
    );
}

#[test]
fn usage_error_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = tilesim(&["frobnicate"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn simulate_vector_add_writes_oracle_matching_image() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = preset("A").unwrap();
    let kernel = kernels::vector_add(&cfg, 8);
    let program_path = dir.path().join("vadd.asm");
    fs::write(&program_path, &kernel.program).unwrap();

    // fixture: lane i of row0 is i, of row1 is 2i (mod 256)
    let width = 1536;
    let mut x = WideWord::zero(width);
    let mut y = WideWord::zero(width);
    for lane in 0..width / 8 {
        x.set_u128(lane * 8, 8, (lane as u128) % 256);
        y.set_u128(lane * 8, 8, (2 * lane as u128) % 256);
    }
    let image_path = dir.path().join("in.hex");
    fs::write(&image_path, format_image(&[x, y])).unwrap();

    let out = tilesim(
        &[
            "simulate",
            "--config",
            "A",
            "--program",
            program_path.to_str().unwrap(),
            "--image",
            image_path.to_str().unwrap(),
            "--out",
            "run",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).contains("cycles: "), "{}", stdout(&out));

    let written = fs::read_to_string(dir.path().join("run/output_image.hex")).unwrap();
    let rows = parse_image(&written, width).unwrap();
    for lane in 0..width / 8 {
        let want = (lane as u128 + 2 * lane as u128) % 256;
        assert_eq!(rows[2].get_u128(lane * 8, 8), want, "lane {lane}");
    }
    assert!(dir.path().join("run/metrics.json").exists());
}

#[test]
fn sweep_writes_reports_and_plot_renders_them() {
    let dir = tempfile::tempdir().unwrap();
    let out = tilesim(
        &[
            "sweep",
            "A",
            "B",
            "C",
            "D",
            "E",
            "VWR2A",
            "--style",
            "direct",
            "--style",
            "mux_baseline",
            "--out",
            "sw",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let csv = fs::read_to_string(dir.path().join("sw/sweep.csv")).unwrap();
    assert!(csv.starts_with(
        "name,style,cells_proxy,logical_area,core_area,wirelength,wl_to_area,density"
    ));
    assert_eq!(csv.lines().count(), 1 + 12);
    assert!(dir.path().join("sw/sweep.json").exists());

    let out = tilesim(&["plot", "sw/sweep.csv", "--out", "plots"], dir.path());
    assert!(out.status.success(), "{}", stderr(&out));
    let trend1 = fs::read(dir.path().join("plots/trend.svg")).unwrap();
    assert!(dir.path().join("plots/floorplan_E_direct.svg").exists());
    assert!(dir
        .path()
        .join("plots/floorplan_VWR2A_mux_baseline.svg")
        .exists());

    // byte-identical on rerun
    let out = tilesim(&["plot", "sw/sweep.csv", "--out", "plots2"], dir.path());
    assert!(out.status.success());
    let trend2 = fs::read(dir.path().join("plots2/trend.svg")).unwrap();
    assert_eq!(trend1, trend2);
}

#[test]
fn plot_rejects_empty_csv_and_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("empty.csv");
    fs::write(
        &csv,
        "name,style,cells_proxy,logical_area,core_area,wirelength,wl_to_area,density,error\n",
    )
    .unwrap();
    let out = tilesim(
        &["plot", csv.to_str().unwrap(), "--out", "plots"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(!dir.path().join("plots/trend.svg").exists());
}

#[test]
fn compare_same_design_point_is_unity() {
    let dir = tempfile::tempdir().unwrap();
    let out = tilesim(&["compare", "D", "D"], dir.path());
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(
        text.contains("normalized_wl_ratio_b_over_a: 1.000"),
        "{text}"
    );
    assert!(text.contains("density_ratio_a_over_b: 1.000"), "{text}");
}

#[test]
fn compare_headline_design_points_pass_thresholds() {
    let dir = tempfile::tempdir().unwrap();
    let out = tilesim(
        &[
            "compare",
            "E:direct",
            "VWR2A:mux_baseline",
            "--threshold-wl",
            "2.0",
            "--threshold-density",
            "3.0",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(stdout(&out).matches("PASS").count(), 2);
}

#[test]
fn compare_with_invalid_config_fails_with_violations() {
    let dir = tempfile::tempdir().unwrap();
    let mut doc = save_config(&preset("A").unwrap());
    doc = doc.replace("\"banks\": 3", "\"banks\": 4");
    let path = dir.path().join("bad.json");
    fs::write(&path, doc).unwrap();
    let out = tilesim(&["compare", path.to_str().unwrap(), "E"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(
        stderr(&out).contains("does not validate"),
        "{}",
        stderr(&out)
    );
}

#[test]
fn floorplan_exports_text_and_svg() {
    let dir = tempfile::tempdir().unwrap();
    let out = tilesim(
        &[
            "floorplan",
            "--config",
            "D",
            "--style",
            "mux_baseline",
            "--out",
            "fp",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let def = fs::read_to_string(dir.path().join("fp/D_mux_baseline.fp")).unwrap();
    assert!(def.starts_with("core "));
    assert!(def.contains("block mux0 MUX"));
    assert!(dir.path().join("fp/D_mux_baseline.svg").exists());
}

#[test]
fn shipped_params_file_matches_builtin_defaults() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../..");
    let text = fs::read_to_string(root.join("params/default.params")).unwrap();
    let parsed = tilesim_core::phys::UnitAreaParams::from_key_value(&text).unwrap();
    assert_eq!(parsed, tilesim_core::phys::UnitAreaParams::default());
}

#[test]
fn shipped_example_config_validates() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../..");
    let dir = tempfile::tempdir().unwrap();
    let path = root.join("configs/wide_tile.json");
    let out = tilesim(
        &["validate", "--config", path.to_str().unwrap()],
        dir.path(),
    );
    assert!(out.status.success(), "{}", stderr(&out));
}

#[test]
fn params_file_overrides_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let params = dir.path().join("p.params");
    fs::write(&params, "target_utilization = 0.4\n").unwrap();
    let base = tilesim(&["floorplan", "--config", "E", "--out", "a"], dir.path());
    let loose = tilesim(
        &[
            "floorplan",
            "--config",
            "E",
            "--params",
            params.to_str().unwrap(),
            "--out",
            "b",
        ],
        dir.path(),
    );
    assert!(base.status.success() && loose.status.success());
    // lower utilization must report a larger core
    let parse_core = |s: &str| -> f64 {
        let text = s.split("core area ").nth(1).unwrap();
        text.split(',').next().unwrap().parse().unwrap()
    };
    assert!(parse_core(&stdout(&loose)) > parse_core(&stdout(&base)));
}
