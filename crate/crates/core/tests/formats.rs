//! File formats: netpbm, arm and config TOML, shot-log CSV. The corpus seeds
//! under `fuzz/corpus` are replayed through the same checks as the fuzz
//! targets, and random inputs must never panic.

use std::path::PathBuf;

use proptest::prelude::*;
use recurve::harness::{parse_csv, rows_to_csv, Config};
use recurve::kinematics::{ArmModel, JointVector};
use recurve::vision::netpbm::{decode, encode_gray, encode_rgb, Pnm};
use recurve::vision::{GrayImage, RgbImage};

fn corpus(target: &str) -> Vec<(PathBuf, Vec<u8>)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fuzz/corpus")
        .join(target);
    let mut files: Vec<_> = std::fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| e.unwrap().path())
        .collect();
    files.sort();
    assert!(!files.is_empty(), "no seeds in {}", dir.display());
    files
        .into_iter()
        .map(|p| {
            let b = std::fs::read(&p).unwrap();
            (p, b)
        })
        .collect()
}

fn netpbm_round_trip(data: &[u8]) -> bool {
    match decode(data) {
        Ok(img) => {
            let bytes = match &img {
                Pnm::Gray(g) => encode_gray(g),
                Pnm::Rgb(c) => encode_rgb(c),
            };
            assert_eq!(decode(&bytes).unwrap(), img);
            true
        }
        Err(_) => false,
    }
}

fn csv_round_trip(text: &str) -> bool {
    match parse_csv(text) {
        Ok(rows) => {
            let out = rows_to_csv(&rows).unwrap();
            assert_eq!(parse_csv(&out).unwrap(), rows);
            true
        }
        Err(_) => false,
    }
}

#[test]
fn netpbm_corpus() {
    let decoded: Vec<bool> = corpus("netpbm_decode")
        .iter()
        .map(|(_, b)| netpbm_round_trip(b))
        .collect();
    assert!(decoded.iter().filter(|d| **d).count() >= 2);
}

#[test]
fn netpbm_is_bit_exact() {
    let data: Vec<u8> = (0..=255u8).cycle().take(17 * 5).collect();
    let g = GrayImage::new(17, 5, data.clone()).unwrap();
    let bytes = encode_gray(&g);
    let mut expect = b"P5\n17 5\n255\n".to_vec();
    expect.extend(&data);
    assert_eq!(bytes, expect);

    let rgb: Vec<u8> = (0..4 * 3 * 3).map(|i| (i * 7 % 256) as u8).collect();
    let c = RgbImage::new(4, 3, rgb.clone()).unwrap();
    let mut expect = b"P6\n4 3\n255\n".to_vec();
    expect.extend(&rgb);
    assert_eq!(encode_rgb(&c), expect);
    assert_eq!(decode(&expect).unwrap(), Pnm::Rgb(c));
}

#[test]
fn arm_corpus() {
    for (path, bytes) in corpus("arm_toml") {
        let arm = ArmModel::from_toml_str(std::str::from_utf8(&bytes).unwrap())
            .unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        arm.forward_kinematics(&JointVector::zeros(arm.n_joints()))
            .unwrap();
        assert_eq!(ArmModel::from_toml_str(&arm.to_toml_string()).unwrap(), arm);
    }
}

#[test]
fn config_corpus() {
    for (path, bytes) in corpus("config_toml") {
        let cfg = Config::from_toml_str(std::str::from_utf8(&bytes).unwrap())
            .unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert_eq!(Config::from_toml_str(&cfg.to_toml_string()).unwrap(), cfg);
    }
}

#[test]
fn csv_corpus() {
    for (path, bytes) in corpus("csv_parse") {
        assert!(
            csv_round_trip(std::str::from_utf8(&bytes).unwrap()),
            "{} did not parse",
            path.display()
        );
    }
}

#[test]
fn crlf_csv_is_read_but_written_with_lf() {
    let (_, bytes) = &corpus("csv_parse")[0];
    let text = std::str::from_utf8(bytes).unwrap();
    let crlf = text.replace('\n', "\r\n");
    let rows = parse_csv(&crlf).unwrap();
    assert_eq!(rows_to_csv(&rows).unwrap(), text);
}

proptest! {
    #[test]
    fn netpbm_never_panics(data in proptest::collection::vec(any::<u8>(), 0..64)) {
        netpbm_round_trip(&data);
    }

    #[test]
    fn netpbm_header_mutations_never_panic(
        w in 0usize..6, h in 0usize..6, maxval in 0u32..70000, extra in 0usize..40
    ) {
        let mut data = format!("P5\n{w} {h}\n{maxval}\n").into_bytes();
        data.extend(std::iter::repeat_n(7u8, extra));
        netpbm_round_trip(&data);
    }

    #[test]
    fn text_parsers_never_panic(s in "\\PC{0,200}") {
        csv_round_trip(&s);
        let _ = Config::from_toml_str(&s);
        let _ = ArmModel::from_toml_str(&s);
    }

    #[test]
    fn csv_field_mutations_never_panic(col in 0usize..11, value in "[-0-9.eNaIinf,\"]{0,12}") {
        let base = "shot_index,theta_cmd,phi_cmd,theta_real,phi_real,d_l,speed,impact_x_cm,impact_y_cm,distance_m,state\n\
                    0,0.0,0.0,0.1,0.0,65.0,31.7,1.0,80.0,15.3,RELEASED\n";
        let mut lines: Vec<String> = base.lines().map(String::from).collect();
        let mut fields: Vec<String> = lines[1].split(',').map(String::from).collect();
        fields[col] = value;
        lines[1] = fields.join(",");
        csv_round_trip(&(lines.join("\n") + "\n"));
    }
}
