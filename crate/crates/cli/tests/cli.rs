use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use symcone_cli::format::{self, CertificateFile, ProblemFile};

fn symcone(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_symcone")).args(args).output().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

const PAIR: &str = r#"{"cone":[{"type":"nonneg","count":2}],"A":{"rows":1,"cols":2,"data":[1,-1]}}"#;

#[test]
fn solve_pair_writes_primal() {
    let dir = tempfile::tempdir().unwrap();
    let (prob, cert) = (dir.path().join("p.json"), dir.path().join("c.json"));
    fs::write(&prob, PAIR).unwrap();
    let o = symcone(&["solve", s(&prob), "--out", s(&cert)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let file: CertificateFile = format::read_json(&cert).unwrap();
    let CertificateFile::Primal { x, .. } = file else { panic!("{file:?}") };
    assert!((x[0] - x[1]).abs() < 1e-12 && x[0] > 0.0);
    assert_eq!(symcone(&["verify", s(&prob), s(&cert)]).status.code(), Some(0));
}

#[test]
fn dual_and_tampering() {
    let dir = tempfile::tempdir().unwrap();
    let (prob, cert) = (dir.path().join("p.json"), dir.path().join("c.json"));
    fs::write(&prob, r#"{"cone":[{"type":"nonneg","count":2}],"A":{"rows":1,"cols":2,"data":[1,1]}}"#).unwrap();
    assert_eq!(symcone(&["solve", s(&prob), "--out", s(&cert)]).status.code(), Some(1));
    assert_eq!(symcone(&["verify", s(&prob), s(&cert)]).status.code(), Some(0));

    let mut file: CertificateFile = format::read_json(&cert).unwrap();
    if let CertificateFile::Dual { y, .. } = &mut file {
        y[0] = -1.0;
    }
    format::write_json(&cert, &file).unwrap();
    let o = symcone(&["verify", s(&prob), s(&cert)]);
    assert_eq!(o.status.code(), Some(65));
    assert!(String::from_utf8_lossy(&o.stdout).contains("FAIL"));
}

#[test]
fn tampered_primal_exits_65() {
    let dir = tempfile::tempdir().unwrap();
    let (prob, cert) = (dir.path().join("p.json"), dir.path().join("c.json"));
    fs::write(&prob, PAIR).unwrap();
    symcone(&["solve", s(&prob), "--out", s(&cert)]);
    let text = fs::read_to_string(&cert).unwrap();
    let mut file: CertificateFile = format::parse_json("c", &text).unwrap();
    if let CertificateFile::Primal { x, .. } = &mut file {
        x[1] *= 2.0;
    }
    format::write_json(&cert, &file).unwrap();
    assert_eq!(symcone(&["verify", s(&prob), s(&cert)]).status.code(), Some(65));
}

#[test]
fn malformed_input_exits_64_with_field_path() {
    let dir = tempfile::tempdir().unwrap();
    let prob = dir.path().join("p.json");
    fs::write(&prob, r#"{"cone":[{"type":"soc","dim":3}],"A":{"rows":1,"cols":3,"data":[1,"x",0]}}"#).unwrap();
    let o = symcone(&["solve", s(&prob)]);
    assert_eq!(o.status.code(), Some(64));
    assert!(String::from_utf8_lossy(&o.stderr).contains("A.data[1]"));
    assert_eq!(symcone(&["solve", s(&prob), "--bp-stop", "sideways"]).status.code(), Some(64));
}

#[test]
fn phi_curve_rows() {
    let o = symcone(&["phi-curve", "--min", "1", "--max", "10", "--steps", "100"]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("rho,exp_neg_phi"));
    assert_eq!(lines.count(), 100);
}

#[test]
fn generate_then_solve_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let p = |n: &str| dir.path().join(n);
    let gen = |out: &Path, wit: &Path| {
        symcone(&[
            "generate", "--cone", "nonneg:2,soc:3,psd:2", "--kind", "feasible", "--m", "3", "--seed", "7", "--spread", "3",
            "--out", s(out), "--witness", s(wit),
        ])
    };
    assert_eq!(gen(&p("a.json"), &p("wa.json")).status.code(), Some(0));
    assert_eq!(gen(&p("b.json"), &p("wb.json")).status.code(), Some(0));
    assert_eq!(fs::read(p("a.json")).unwrap(), fs::read(p("b.json")).unwrap());
    assert_eq!(symcone(&["verify", s(&p("a.json")), s(&p("wa.json"))]).status.code(), Some(0));

    for c in ["c1.json", "c2.json"] {
        assert_eq!(symcone(&["solve", s(&p("a.json")), "--out", s(&p(c))]).status.code(), Some(0));
    }
    assert_eq!(fs::read(p("c1.json")).unwrap(), fs::read(p("c2.json")).unwrap());
    assert_eq!(symcone(&["verify", s(&p("a.json")), s(&p("c1.json"))]).status.code(), Some(0));
}

#[test]
fn generate_from_specfile_and_save_load_identity() {
    let dir = tempfile::tempdir().unwrap();
    let (spec, out) = (dir.path().join("spec.json"), dir.path().join("p.json"));
    fs::write(&spec, r#"{"cone":[{"type":"psd","order":3},{"type":"soc","dim":4}]}"#).unwrap();
    let o = symcone(&["generate", s(&spec), "--kind", "infeasible", "--m", "4", "--seed", "1", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(symcone(&["solve", s(&out)]).status.code(), Some(1));

    let first: ProblemFile = format::read_json(&out).unwrap();
    let inst = first.to_instance().unwrap();
    let again = ProblemFile::from_instance(&inst);
    assert_eq!(again.cone, first.cone);
    for (a, b) in again.a.data.iter().zip(&first.a.data) {
        assert!((a - b).abs() <= f64::EPSILON * b.abs(), "{a} vs {b}");
    }
    let inst2 = again.to_instance().unwrap();
    assert!(inst2.a().max_abs_diff(inst.a()) <= f64::EPSILON);
}

#[test]
fn psd_row_example() {
    let pf: ProblemFile =
        format::parse_json("p", r#"{"cone":[{"type":"psd","order":2}],"A":{"rows":1,"cols":3,"data":[1,0,0]}}"#).unwrap();
    assert_eq!(pf.to_instance().unwrap().a().as_slice(), &[1.0, 0.0, 0.0]);
}

#[test]
fn budget_and_eps_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let prob = dir.path().join("p.json");
    // kernel is the boundary ray (1, 1, 0) of the 3-dim Lorentz cone
    fs::write(&prob, r#"{"cone":[{"type":"soc","dim":3}],"A":{"rows":2,"cols":3,"data":[1,-1,0, 0,0,1]}}"#).unwrap();
    let o = symcone(&["solve", s(&prob), "--eps", "0.6"]);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
    let o = symcone(&["solve", s(&prob), "--eps", "1e-3", "--max-rescale-iters", "0"]);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(symcone(&["solve", s(&prob), "--eps", "2"]).status.code(), Some(64));
}
