use std::path::{Path, PathBuf};

use localwave::first_stage::designs;
use localwave::io;
use localwave::lambda::{LambdaIndex, Numra, NumraParams};
use localwave::transform::Sequence;
use localwave_cli::{run, Outcome};
use num_complex::Complex64;

struct Fixture {
    dir: tempfile::TempDir,
}

impl Fixture {
    fn new() -> Self {
        let f = Fixture { dir: tempfile::tempdir().unwrap() };
        f.write("haar.json", r#"{"p":2,"c":1,"N":1,"r":1,"window":4,"resolution":3}"#);
        let numra = Numra::new(NumraParams::simple(2, 1, 1, 1, None).unwrap()).unwrap();
        let haar = designs::haar(&numra).unwrap();
        f.write("bank.json", &io::write_bank(&haar));
        let bad = designs::perturb(&haar, 1, LambdaIndex::z(1), Complex64::new(0.05, 0.0));
        f.write("bad.json", &io::write_bank(&bad));
        f
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn write(&self, name: &str, text: &str) -> PathBuf {
        let p = self.path(name);
        std::fs::write(&p, text).unwrap();
        p
    }

    fn run(&self, args: &[&str]) -> Outcome {
        let owned: Vec<String> = args
            .iter()
            .map(|a| if a.ends_with(".json") && !a.contains('/') { s(&self.path(a)) } else { a.to_string() })
            .collect();
        run(std::iter::once("lw".to_string()).chain(owned))
    }
}

fn s(p: &Path) -> String {
    p.to_str().unwrap().to_string()
}

fn json(o: &Outcome) -> serde_json::Value {
    serde_json::from_str(&o.stdout).unwrap()
}

#[test]
fn verify_haar_exits_zero() {
    let f = Fixture::new();
    let o = f.run(&["verify", "--config", "haar.json", "--bank", "bank.json", "--stage", "3"]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    let v = json(&o);
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["params"]["tolerance"], 1e-10);
    assert!(v["failing"].as_array().unwrap().is_empty());
}

#[test]
fn verify_perturbed_haar_exits_one_and_names_failures() {
    let f = Fixture::new();
    let o = f.run(&["verify", "--config", "haar.json", "--bank", "bad.json"]);
    assert_eq!(o.code, 1);
    let failing: Vec<String> = json(&o)["failing"].as_array().unwrap().iter().map(|x| x.as_str().unwrap().to_string()).collect();
    assert!(failing.contains(&"gram_oracle".to_string()));
    assert!(failing.contains(&"unitarity".to_string()));
    assert!(o.stderr.contains("gram_oracle"));
}

#[test]
fn malformed_and_invalid_inputs_exit_two() {
    let f = Fixture::new();
    f.write("broken.json", "{");
    assert_eq!(f.run(&["verify", "--config", "broken.json", "--bank", "bank.json"]).code, 2);
    assert_eq!(f.run(&["verify", "--config", "haar.json", "--bank", "broken.json"]).code, 2);
    f.write("p3.json", r#"{"p":3,"c":1,"N":3,"r":1,"nu_policy":"scalar"}"#);
    let o = f.run(&["field-info", "--config", "p3.json"]);
    assert_eq!(o.code, 2);
    assert!(o.stderr.contains("divides"));
    assert_eq!(f.run(&["field-info"]).code, 2);
    assert_eq!(f.run(&["field-info", "--config", "haar.json", "--tolerance", "0"]).code, 2);
    assert_eq!(f.run(&["frobnicate"]).code, 2);
    assert_eq!(f.run(&["verify", "--config", "missing.json", "--bank", "bank.json"]).code, 2);
}

#[test]
fn field_info_reports_degeneracy() {
    let f = Fixture::new();
    let v = json(&f.run(&["field-info", "--config", "haar.json"]));
    assert_eq!(v["data"]["q"], 2);
    assert_eq!(v["data"]["degenerate"], true);
    assert_eq!(v["data"]["delta"], "[(-1,[1])]");
    f.write("n3.json", r#"{"p":2,"c":1,"N":3,"r":1,"window":2}"#);
    let o = f.run(&["field-info", "--config", "n3.json", "--nu", "scalar"]);
    assert_eq!(o.code, 0);
    assert_eq!(json(&o)["data"]["degenerate"], true);
}

#[test]
fn transform_round_trip_through_files() {
    let f = Fixture::new();
    let numra = Numra::new(NumraParams::simple(2, 1, 1, 1, None).unwrap()).unwrap();
    let mut g = designs::rng(5);
    let z = Sequence::from_pairs(numra.index_set(4).into_iter().map(|l| (l, designs::gaussian(&mut g))));
    f.write("z.json", &io::write_signal(&z));
    let fwd = f.run(&["transform", "--config", "haar.json", "--bank", "bank.json", "--signal", "z.json", "--stage", "3", "--out", "dec.json"]);
    assert_eq!(fwd.code, 0, "{}", fwd.stderr);
    // The energy table goes to stdout when the decomposition is written to a file.
    let total: f64 = fwd.stdout.lines().find(|l| l.starts_with("total")).unwrap().split('\t').nth(1).unwrap().parse().unwrap();
    assert!((total - z.norm_sq()).abs() < 1e-10);
    let inv = f.run(&["transform", "--config", "haar.json", "--bank", "bank.json", "--signal", "dec.json", "--stage", "3", "--inverse"]);
    assert_eq!(inv.code, 0, "{}", inv.stderr);
    let back = io::read_signal(&inv.stdout).unwrap();
    assert!(back.sub(&z).max_abs() < 1e-10);
}

#[test]
fn transform_zero_signal_gives_zero_output() {
    let f = Fixture::new();
    f.write("zero.json", "[]");
    let o = f.run(&["transform", "--config", "haar.json", "--bank", "bank.json", "--signal", "zero.json", "--stage", "2"]);
    assert_eq!(o.code, 0);
    let dec: io::DecompositionFile = io::parse(&o.stdout).unwrap();
    assert!(dec.approx.iter().all(|t| t.re == 0.0 && t.im == 0.0));
    assert!(dec.details.iter().all(|d| d.taps.iter().all(|t| t.re == 0.0 && t.im == 0.0)));
}

#[test]
fn transform_gates_and_window_overflow() {
    let f = Fixture::new();
    f.write("z.json", r#"[{"eps":0,"n":3,"re":1.0,"im":0.0}]"#);
    let refused = f.run(&["transform", "--config", "haar.json", "--bank", "bad.json", "--signal", "z.json"]);
    assert_eq!(refused.code, 1);
    assert!(refused.stderr.contains("--force"));
    let forced = f.run(&["transform", "--config", "haar.json", "--bank", "bad.json", "--signal", "z.json", "--force"]);
    assert_eq!(forced.code, 0);
    f.write("far.json", r#"[{"eps":0,"n":4096,"re":1.0,"im":0.0}]"#);
    let o = f.run(&["transform", "--config", "haar.json", "--bank", "bank.json", "--signal", "far.json"]);
    assert_eq!(o.code, 1);
    assert!(o.stderr.contains("window"));
}

#[test]
fn bridge_haar() {
    let f = Fixture::new();
    let o = f.run(&["bridge", "--config", "haar.json", "--bank", "bank.json", "--stage", "8"]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    let v = json(&o);
    assert_eq!(v["data"]["cascade_nonzero_cells"], 16);
    let names: Vec<&str> = v["checks"].as_array().unwrap().iter().map(|c| c["check"].as_str().unwrap()).collect();
    assert!(names.contains(&"bridge_reconstruction") && names.contains(&"symbol_corrected_a"));
}

#[test]
fn reports_are_byte_identical_and_written_to_out() {
    let f = Fixture::new();
    let args = ["verify", "--config", "haar.json", "--bank", "bank.json", "--stage", "2", "--seed", "9"];
    let a = f.run(&args);
    let b = f.run(&args);
    assert_eq!(a, b);
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    assert_eq!(pool.install(|| f.run(&args)), a);
    let out = f.path("report.json");
    let mut with_out = args.to_vec();
    with_out.extend(["--out", out.to_str().unwrap()]);
    let c = f.run(&with_out);
    assert_eq!(c.code, 0);
    assert_eq!(std::fs::read_to_string(&out).unwrap(), a.stdout);
    assert_eq!(json(&a)["params"]["seed"], 9);
}

#[test]
fn mode_and_nu_overrides_are_echoed() {
    let f = Fixture::new();
    let v = json(&f.run(&["verify", "--config", "haar.json", "--bank", "bank.json", "--stage", "2", "--mode", "paperliteral"]));
    assert_eq!(v["params"]["cascade_mode"], "paperliteral");
    f.write("n3.json", r#"{"p":2,"c":1,"N":3,"r":1,"window":2}"#);
    let v = json(&f.run(&["field-info", "--config", "n3.json", "--nu", "coset"]));
    assert_eq!(v["params"]["nu_policy"], "coset_rep");
    assert_eq!(v["data"]["degenerate"], false);
}
