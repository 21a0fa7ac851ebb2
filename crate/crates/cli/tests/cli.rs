use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_escape-atlas")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn json_of(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("stdout is JSON")
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(code(&bin(&["--help"])), 0);
    assert_eq!(code(&bin(&["--version"])), 0);
    assert_eq!(code(&bin(&["figure1", "--help"])), 0);
}

#[test]
fn usage_errors_exit_64() {
    assert_eq!(code(&bin(&[])), 64);
    assert_eq!(code(&bin(&["no-such-command"])), 64);
    assert_eq!(code(&bin(&["dtau", "--tau", "2", "--bogus"])), 64);
    assert_eq!(code(&bin(&["classify-point", "--z", "1"])), 64);
    assert_eq!(code(&bin(&["maxmod", "--r", "5:1:1"])), 64);
    assert_eq!(code(&bin(&["classify-grid", "--res", "0x4", "--out", "x.pgm"])), 64);
}

#[test]
fn domain_errors_exit_one() {
    assert_eq!(code(&bin(&["hardy-fixed-points", "--alpha", "0"])), 1);
    assert_eq!(code(&bin(&["maxmod", "--function", "exp-family", "--alpha", "0.5", "--r", "1"])), 1);
    assert_eq!(code(&bin(&["dtau", "--tau", "0.5"])), 1);
    assert_eq!(code(&bin(&["gsize-check", "--x", "0.1"])), 1);
}

#[test]
fn verification_failures_exit_two() {
    // g(B(0, 2)) reaches far outside the unit disc for alpha = 0.01
    let o = bin(&["sector-check", "--samples", "100", "--inclusion-k", "1"]);
    assert_eq!(code(&o), 2);
    assert_eq!(json_of(&o)["result"]["inclusion"]["holds"], false);
}

#[test]
fn lemma_check_example_holds_eventually() {
    let o = bin(&["lemma-check", "--function", "exp", "--lemma", "Mrc", "--c", "2", "--r", "1:10:1"]);
    assert_eq!(code(&o), 0);
    let j = json_of(&o);
    // e^{r^2} >= e^{2r} from r = 2 on
    assert_eq!(j["result"]["thresholds"][0]["holds_from"], 2.0);
    assert_eq!(j["result"]["violations"], 1);
}

#[test]
fn output_embeds_resolved_config() {
    let o = bin(&["classify-point", "--function", "hardy-g", "--z", "-1.5,0.25", "--depth", "8"]);
    assert_eq!(code(&o), 0);
    let cfg = &json_of(&o)["config"];
    assert_eq!(cfg["command"], "classify-point");
    assert_eq!(cfg["f"]["alpha"], 0.01);
    assert_eq!(cfg["z"]["re"], -1.5);
    assert_eq!(cfg["classifier"]["depth"], 8);
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let p = dir.path().join(name);
        let o = bin(&[
            "classify-grid",
            "--function",
            "exp",
            "--window",
            "-4,-4,4,4",
            "--res",
            "48x32",
            "--depth",
            "12",
            "--out",
            p.to_str().unwrap(),
        ]);
        assert_eq!(code(&o), 0);
        let legend = std::fs::read_to_string(p.with_extension("json")).unwrap();
        (std::fs::read(&p).unwrap(), legend.replace(p.to_str().unwrap(), "OUT"))
    };
    let (a_pgm, a_json) = run("a.pgm");
    let (b_pgm, b_json) = run("b.pgm");
    assert_eq!(a_pgm, b_pgm);
    assert_eq!(a_json, b_json);
    assert!(a_pgm.starts_with(b"P5\n48 32\n255\n"));
    assert_eq!(a_pgm.len(), "P5\n48 32\n255\n".len() + 48 * 32);

    let s1 = bin(&["fast-orbit", "--r1", "10", "--k-max", "2"]);
    let s2 = bin(&["--workers", "1", "fast-orbit", "--r1", "10", "--k-max", "2"]);
    assert_eq!(s1.stdout, s2.stdout);
}

#[test]
fn figure1_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("fig1.csv");
    let o = bin(&["figure1", "--alpha", "0.01", "--x-max", "4", "--out", p.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let mut r = csv::Reader::from_path(&p).unwrap();
    assert_eq!(r.headers().unwrap(), vec!["curve", "theta", "x", "y", "log_abs_y", "residual"]);
    let rows: Vec<csv::StringRecord> = r.records().map(Result::unwrap).collect();
    assert!(rows.len() > 100);
    for row in &rows {
        assert!(row[5].parse::<f64>().unwrap() < 1e-9);
    }
    // curves come in mirror pairs
    let ys = |c: &str| rows.iter().filter(|r| &r[0] == c).map(|r| r[3].parse::<f64>().unwrap()).collect::<Vec<_>>();
    let (c0, c1) = (ys("0"), ys("1"));
    assert_eq!(c0.len(), c1.len());
    assert!(c0.iter().zip(&c1).all(|(a, b)| *a == -*b));
    assert!(Path::new(&p.with_extension("json")).exists());
}

#[test]
fn cover_check_csv_lists_uncovered_targets() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("uncovered.csv");
    // exp omits 0, so tiny targets are never covered from A(1, 8)
    let o = bin(&[
        "cover-check", "--r", "1", "--w-min", "1e-6", "--w-max", "1e-5", "--targets", "20", "--csv",
        p.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let j = json_of(&o);
    assert_eq!(j["result"]["covered"], 0);
    let n = csv::Reader::from_path(&p).unwrap().records().count();
    assert_eq!(n, 20);
}
