use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use omsense::io::{read_spike_frame, write_rgb_png};
use omsense::metrics::read_csv;
use omsense::{RgbFrame, SensorConfig};

fn omsense(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_omsense")).args(args).output().unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_static_frames(dir: &Path, n: usize) {
    fs::create_dir_all(dir).unwrap();
    let frame = RgbFrame::filled(16, 20, [90, 120, 200]).unwrap();
    for t in 0..n {
        write_rgb_png(&frame, &dir.join(format!("f{t:02}.png"))).unwrap();
    }
}

fn write_shifting_frames(dir: &Path, n: usize) {
    fs::create_dir_all(dir).unwrap();
    for t in 0..n {
        let data = (0..16 * 20)
            .flat_map(|i| {
                let x = i % 20;
                let v = if (x + t) % 6 < 3 { 40 } else { 220 };
                [v, v, v]
            })
            .collect();
        write_rgb_png(
            &RgbFrame::new(16, 20, 3, data).unwrap(),
            &dir.join(format!("f{t:02}.png")),
        )
        .unwrap();
    }
}

#[test]
fn help_lists_every_flag_with_defaults() {
    for sub in ["convert", "metrics", "synth"] {
        let help = stdout(&omsense(&[sub, "--help"]));
        for flag in [
            "--contrast-threshold",
            "--oms-threshold",
            "--center-radius",
            "--surround-radius",
            "--surround-weight",
            "--boundary",
            "--use-log",
            "--log-epsilon",
            "--config",
        ] {
            assert!(help.contains(flag), "{sub} --help lacks {flag}");
        }
        let d = SensorConfig::default();
        for default in [
            format!("[default: {}]", d.contrast_threshold),
            format!("[default: {}]", d.center_radius),
            format!("[default: {}]", d.surround_radius),
            format!("[default: {}]", d.surround_weight),
            format!("[default: {}]", d.log_epsilon),
            format!("[default: {}]", d.boundary_mode),
            format!("[default: {}]", d.use_log),
        ] {
            assert!(help.contains(&default), "{sub} --help lacks {default}");
        }
        assert!(help.contains("6  no signal"));
    }
    let help = stdout(&omsense(&["convert", "--help"]));
    for flag in [
        "--format",
        "--mode",
        "--input",
        "--output",
        "--pattern",
        "--frame-rate",
        "--f1",
    ] {
        assert!(help.contains(flag), "convert --help lacks {flag}");
    }
}

#[test]
fn static_input_gives_silent_spike_frames() {
    let tmp = tempfile::tempdir().unwrap();
    let input = tmp.path().join("in");
    let out = tmp.path().join("out");
    write_static_frames(&input, 3);
    let o = omsense(&[
        "convert",
        "-i",
        path(&input),
        "-o",
        path(&out),
        "--mode",
        "oms",
        "--format",
        "pgm,csv",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o).trim(), "in\toms\tframes=3\tavg_bits_per_frame=0");
    for t in 0..3u32 {
        let f = read_spike_frame(&out.join(format!("oms/oms_{t:06}.pbm")), t).unwrap();
        assert!(f.data().iter().all(|s| !s));
    }
    assert!(!out.join("dvs").exists());

    let manifest = fs::read_to_string(out.join("manifest.toml")).unwrap();
    for line in [
        "contrast_threshold = 0.1",
        "oms_threshold = 0.1",
        "center_radius = 1",
        "surround_radius = 5",
        "mode = \"oms\"",
    ] {
        assert!(manifest.contains(line), "manifest lacks {line}:\n{manifest}");
    }
    let rows = read_csv(fs::File::open(out.join("metrics.csv")).unwrap()).unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[1].avg_sparse_bits_per_frame, 0.0);
}

#[test]
fn rerunning_the_manifest_reproduces_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let input = tmp.path().join("in");
    let out = tmp.path().join("out");
    write_shifting_frames(&input, 4);
    let o = omsense(&[
        "convert",
        "-i",
        path(&input),
        "-o",
        path(&out),
        "--format",
        "aer,png,csv",
        "--oms-threshold",
        "0.05",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let files = [
        "dvs.aer",
        "oms.aer",
        "metrics.csv",
        "dvs/dvs_000003.png",
        "oms/oms_000003.png",
        "manifest.toml",
    ];
    let before: Vec<Vec<u8>> = files.iter().map(|f| fs::read(out.join(f)).unwrap()).collect();
    for f in files {
        fs::remove_file(out.join(f)).unwrap();
    }
    let manifest = tmp.path().join("saved.toml");
    fs::write(&manifest, &before[5]).unwrap();
    let o = omsense(&["convert", "--config", path(&manifest)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let after: Vec<Vec<u8>> = files.iter().map(|f| fs::read(out.join(f)).unwrap()).collect();
    assert_eq!(before[..5], after[..5]);
    assert!(String::from_utf8_lossy(&after[5]).contains("oms_threshold = 0.05"));
}

#[test]
fn subdirectories_are_separate_sequences() {
    let tmp = tempfile::tempdir().unwrap();
    let input = tmp.path().join("in");
    let out = tmp.path().join("out");
    write_shifting_frames(&input.join("b"), 3);
    write_static_frames(&input.join("a"), 2);
    let o = omsense(&["convert", "-i", path(&input), "-o", path(&out), "--mode", "dvs"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let lines: Vec<String> = stdout(&o).lines().map(String::from).collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].starts_with("a\tdvs\tframes=2\t"));
    assert!(lines[1].starts_with("b\tdvs\tframes=3\t"));
    assert!(out.join("a/dvs.aer").exists() && out.join("b/metrics.csv").exists());
}

#[test]
fn errors_are_one_line_with_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let missing = tmp.path().join("nowhere");
    let o = omsense(&["convert", "-i", path(&missing), "-o", path(tmp.path())]);
    assert_eq!(o.status.code(), Some(3));
    let err = stderr(&o);
    assert!(err.lines().last().unwrap().starts_with("error[not-found]: "), "{err}");

    let input = tmp.path().join("in");
    write_static_frames(&input, 2);
    let o = omsense(&[
        "convert",
        "-i",
        path(&input),
        "-o",
        path(tmp.path()),
        "--contrast-threshold",
        "-1",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).starts_with("error[config]: "), "{}", stderr(&o));

    let o = omsense(&[
        "convert",
        "-i",
        path(&input),
        "-o",
        path(tmp.path()),
        "--mode",
        "sideways",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).starts_with("error[usage]: "), "{}", stderr(&o));

    let bad = tmp.path().join("bad.aer");
    fs::write(&bad, b"AER1\x01\x00\x04\x00\x04\x00\x01\x00\x03\x00").unwrap();
    let o = omsense(&["metrics", "--aer", path(&bad)]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("error[corruption]"), "{}", stderr(&o));
}

#[test]
fn metrics_reproduces_the_table_arithmetic() {
    let o = omsense(&[
        "metrics",
        "--declare",
        "rgb=720x1280",
        "--declare",
        "dvs=720x1280@1.96e5",
        "--declare",
        "oms=720x1280@3.77e4",
        "--f1",
        "rgb=0.4177",
        "--f1",
        "dvs=0.15501847",
        "--f1",
        "oms=0.12602009",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = stdout(&o);
    let header = csv.lines().next().unwrap();
    assert!(
        header.ends_with("perf_per_bit,ratio_vs_rgb,ratio_vs_dvs,ratio_vs_oms"),
        "{header}"
    );
    let rows = read_csv(csv.as_bytes()).unwrap();
    assert_eq!(rows[0].dense_bits_per_frame, 22_118_400);
    let perf: Vec<f64> = rows.iter().map(|r| r.perf_per_bit.unwrap()).collect();
    let dvs_vs_rgb = perf[1] / (rows[0].f1_input.unwrap() / 2.21e7);
    // declared RGB rate is the exact dense rate, slightly above the rounded 2.21e7
    assert!((dvs_vs_rgb - 41.84).abs() / 41.84 < 0.03, "{dvs_vs_rgb}");
    assert!(((perf[2] / perf[1] - 1.0) - 3.26).abs() / 3.26 < 0.03);
    assert!(stderr(&o).contains("oms vs dvs"));
}

#[test]
fn metrics_edge_cases() {
    let o = omsense(&["metrics"]);
    assert!(o.status.success());
    assert_eq!(
        stdout(&o),
        "representation,frames,height,width,bit_depth,dense_bits_per_frame,avg_sparse_bits_per_frame,f1_input,perf_per_bit\n"
    );

    let o = omsense(&[
        "metrics",
        "--declare",
        "rgb=720x1280",
        "--declare",
        "dvs=720x1280@1.96e5",
        "--f1",
        "rgb=0.4",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("missing F1 input for dvs"));
}

#[test]
fn metrics_reads_converted_streams() {
    let tmp = tempfile::tempdir().unwrap();
    let input = tmp.path().join("in");
    let out = tmp.path().join("out");
    write_shifting_frames(&input, 4);
    assert!(omsense(&["convert", "-i", path(&input), "-o", path(&out)])
        .status
        .success());
    let direct = read_csv(fs::File::open(out.join("metrics.csv")).unwrap()).unwrap();

    let report = tmp.path().join("report.csv");
    let o = omsense(&[
        "metrics",
        "-i",
        path(&input),
        "--aer",
        path(&out.join("dvs.aer")),
        "-o",
        path(&report),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = read_csv(fs::File::open(&report).unwrap()).unwrap();
    assert_eq!(rows[..3], direct[..]);
    // every frame after the first one changes, so the stream keeps all four frames
    assert_eq!(rows[3], direct[1]);
    assert!(tmp.path().join("report.csv.manifest.toml").exists());
}

#[test]
fn synth_statuses() {
    let tmp = tempfile::tempdir().unwrap();
    let scenes = Path::new(env!("CARGO_MANIFEST_DIR")).join("scenes");

    let out = tmp.path().join("mixed");
    let o = omsense(&[
        "synth",
        "--spec",
        path(&scenes.join("mixed.toml")),
        "-o",
        path(&out),
        "--format",
        "aer",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    for key in [
        "suppression_ratio 0.",
        "dvs_object_fraction 0.",
        "oms_object_fraction 0.",
    ] {
        assert!(text.contains(key), "{text}");
    }
    let baselines = fs::read_to_string(out.join("baselines.csv")).unwrap();
    assert!(baselines.starts_with("metric,value\n"));
    assert!(out.join("oms.aer").exists() && out.join("manifest.toml").exists());

    let o = omsense(&[
        "synth",
        "--spec",
        path(&scenes.join("static.toml")),
        "-o",
        path(&tmp.path().join("s")),
    ]);
    assert_eq!(o.status.code(), Some(6));
    assert!(stdout(&o).contains("no DVS events"));

    let strict = tmp.path().join("strict.toml");
    let spec = fs::read_to_string(scenes.join("pure_ego.toml")).unwrap();
    fs::write(
        &strict,
        spec.replace("max_suppression_ratio = 1.0", "max_suppression_ratio = 0.1"),
    )
    .unwrap();
    let o = omsense(&["synth", "--spec", path(&strict), "-o", path(&tmp.path().join("t"))]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o)
        .lines()
        .last()
        .unwrap()
        .starts_with("error[assertion]: suppression_ratio"));

    let broken = tmp.path().join("broken.toml");
    fs::write(
        &broken,
        "height = 0\nwidth = 8\nbackground_seed = 1\ntexture_scale = 2.0\nego_velocity = [1.0, 0.0]\nframe_count = 2\n",
    )
    .unwrap();
    let o = omsense(&["synth", "--spec", path(&broken), "-o", path(&tmp.path().join("b"))]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn slow_coarse_ego_motion_is_not_suppressed() {
    // kept as a visible counterexample to the fast-motion scenes
    let tmp = tempfile::tempdir().unwrap();
    let spec = Path::new(env!("CARGO_MANIFEST_DIR")).join("scenes/slow_coarse_ego.toml");
    let o = omsense(&["synth", "--spec", path(&spec), "-o", path(tmp.path())]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let ratio: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("suppression_ratio "))
        .unwrap()
        .parse()
        .unwrap();
    assert!(ratio > 1.0 && ratio < 1.1, "{ratio}");
}
