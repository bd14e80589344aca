use std::path::{Path, PathBuf};

use proptest::prelude::*;

use ramsey_cli::certificate::Certificate;
use ramsey_cli::format::{
    load_class, load_sequence, parse_class, parse_sequence, parse_structure, serialize_class, serialize_sequence,
    serialize_structure,
};
use ramsey_core::families::labelled_graph;
use ramsey_core::Structure;

fn fixture(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
        .display()
        .to_string()
}

fn run(args: &[&str]) -> (i32, String, String) {
    let mut argv = vec!["ramsey".to_string()];
    argv.extend(args.iter().map(|s| s.to_string()));
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = ramsey_cli::run(&argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn cert_of(args: &[&str]) -> (i32, Certificate) {
    let (code, out, err) = run(args);
    let cert = Certificate::parse(&out).unwrap_or_else(|e| panic!("{e}\nstdout: {out}\nstderr: {err}"));
    (code, cert)
}

#[test]
fn lo6_arrow_holds() {
    let (code, cert) = cert_of(&["arrow", &fixture("LO6.st"), &fixture("LO3.st"), &fixture("LO2.st"), "--colors", "2", "--mode", "decide"]);
    assert_eq!(code, 0);
    assert_eq!(cert.verdict, "HOLDS");
    ramsey_cli::verify(&cert).unwrap();
}

#[test]
fn lo5_arrow_fails_with_colouring() {
    let (code, cert) = cert_of(&["arrow", &fixture("LO5.st"), &fixture("LO3.st"), &fixture("LO2.st"), "--colors", "2"]);
    assert_eq!(code, 1);
    assert_eq!(cert.get("result.evidence").unwrap(), "counterexample");
    assert_eq!(cert.find("coloring", "result.0").unwrap().lines.len(), 10);
    ramsey_cli::verify(&cert).unwrap();
}

#[test]
fn pure_sets_are_not_orderable() {
    let (code, cert) = cert_of(&["orderable", &fixture("puresets.cls")]);
    assert_eq!(code, 1);
    assert_eq!(cert.verdict, "NOT-ORDERABLE");
    assert!(cert.find("order-proof", "exhaustion").is_ok());
    ramsey_cli::verify(&cert).unwrap();
}

#[test]
fn tight_budget_is_inconclusive() {
    let (code, cert) = cert_of(&["arrow", &fixture("LO6.st"), &fixture("LO3.st"), &fixture("LO2.st"), "--budget", "3"]);
    assert_eq!(code, 2);
    assert_eq!(cert.verdict, "INCONCLUSIVE");
    ramsey_cli::verify(&cert).unwrap();
}

#[test]
fn config_is_echoed() {
    let (_, cert) = cert_of(&["elf", &fixture("digraph.st"), "--tuple", "0", "--seed", "17", "--budget", "99"]);
    assert!(cert.config.contains("seed=17"), "{}", cert.config);
    assert!(cert.config.contains("budget=99"), "{}", cert.config);
    assert!(cert.command.starts_with("elf "));
}

#[test]
fn input_errors_exit_3() {
    let (code, _, err) = run(&["arrow", "/nonexistent.st", &fixture("LO3.st"), &fixture("LO2.st")]);
    assert_eq!(code, 3);
    assert!(err.contains("nonexistent"), "{err}");
    let (code, _, _) = run(&["frobnicate"]);
    assert_eq!(code, 3);
    let (code, _, err) = run(&["indiscernible", &fixture("seq.seq")]);
    assert_eq!(code, 3, "{err}");
    let (code, _, err) = run(&["indiscernible", &fixture("seq.seq"), "--delta", "E(x"]);
    assert_eq!(code, 3, "{err}");
}

#[test]
fn bad_structure_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.st");
    std::fs::write(&p, "# order\nstructure X : order\ndomain 3\nlt : (0,1) (1,5)\n").unwrap();
    let (code, _, err) = run(&["elf", p.to_str().unwrap(), "--tuple", "0"]);
    assert_eq!(code, 3);
    assert!(err.contains(":4:"), "{err}");
}

#[test]
fn tampered_certificate_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cert = dir.path().join("lo5.cert");
    let (code, out, _) = run(&[
        "arrow",
        &fixture("LO5.st"),
        &fixture("LO3.st"),
        &fixture("LO2.st"),
        "--out",
        cert.to_str().unwrap(),
    ]);
    assert_eq!(code, 1);
    assert!(out.contains("FAILS"), "{out}");
    let (code, out, _) = run(&["verify", cert.to_str().unwrap()]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("search-nodes=0"));

    let text = std::fs::read_to_string(&cert).unwrap();
    std::fs::write(&cert, text.replacen("verdict: FAILS", "verdict: HOLDS", 1)).unwrap();
    let (code, out, _) = run(&["verify", cert.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(out.contains("digest"), "{out}");
}

#[test]
fn forged_colouring_is_rejected() {
    // Recolour one copy and re-seal the digest: the replay must still
    // notice that the colouring now has a monochromatic copy.
    let (_, mut cert) = cert_of(&["arrow", &fixture("LO5.st"), &fixture("LO3.st"), &fixture("LO2.st")]);
    let sec = cert.sections.iter_mut().find(|s| s.kind == "coloring").unwrap();
    for line in sec.lines.iter_mut() {
        let (copy, _) = line.split_once(" : ").unwrap();
        *line = format!("{copy} : 0");
    }
    let resealed = Certificate::parse(&cert.render()).unwrap();
    assert!(ramsey_cli::verify(&resealed).is_err());
}

#[test]
fn forged_exhaustion_is_rejected() {
    let (_, mut cert) = cert_of(&["arrow", &fixture("LO6.st"), &fixture("LO3.st"), &fixture("LO2.st")]);
    let sec = cert.sections.iter_mut().find(|s| s.kind == "proof").unwrap();
    sec.lines.truncate(sec.lines.len() / 2);
    assert!(ramsey_cli::verify(&Certificate::parse(&cert.render()).unwrap()).is_err());
}

#[test]
fn budget_from_environment() {
    let bin = env!("CARGO_BIN_EXE_ramsey");
    let out = std::process::Command::new(bin)
        .args(["elf", &fixture("digraph.st"), "--tuple", "0"])
        .env("RAMSEY_BUDGET", "5")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let cert = Certificate::parse(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert!(cert.config.contains("budget=5"), "{}", cert.config);

    let out = std::process::Command::new(bin)
        .args(["elf", &fixture("digraph.st"), "--tuple", "0"])
        .env("RAMSEY_BUDGET", "nonsense")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("RAMSEY_BUDGET"));
}

#[test]
fn cnf_export() {
    let (code, out, _) = run(&["arrow", &fixture("LO5.st"), &fixture("LO3.st"), &fixture("LO2.st"), "--format", "cnf"]);
    assert_eq!(code, 0);
    let header = out.lines().find(|l| l.starts_with("p cnf")).expect("DIMACS header");
    let fields: Vec<usize> = header.split_whitespace().skip(2).map(|x| x.parse().unwrap()).collect();
    let clauses = out.lines().filter(|l| l.ends_with(" 0")).count();
    assert_eq!(fields[1], clauses);
}

#[test]
fn generate_emits_a_loadable_class() {
    let (code, out, _) = run(&["generate", "ordered-graphs", "--upto", "2", "--name", "og"]);
    assert_eq!(code, 0);
    let (name, class) = parse_class(&out, "generated", Path::new(".")).unwrap();
    assert_eq!(name, "og");
    assert_eq!(class.len(), 1 + 1 + 2);
}

#[test]
fn class_check_runs_every_property() {
    let (code, cert) = cert_of(&["class-check", &fixture("graphs.cls")]);
    assert_eq!(code, 1);
    for p in ["HP", "JEP", "AP", "ERP", "f-ERP"] {
        assert!(cert.get(p).is_ok(), "{p} missing");
    }
    assert!(cert.get("HP").unwrap().starts_with("PASS"));
    ramsey_cli::verify(&cert).unwrap();
}

#[test]
fn degree_certificates_replay() {
    let (code, cert) = cert_of(&["degree", &fixture("P2.st"), &fixture("P3.st"), "--candidates", &fixture("puresets.cls"), "-d", "1"]);
    assert_eq!(code, 1);
    assert_eq!(cert.get("lower").unwrap(), "2");
    ramsey_cli::verify(&cert).unwrap();
}

#[test]
fn extraction_on_a_path() {
    let (code, cert) = cert_of(&["extract", &fixture("seq.seq"), &fixture("LO3.st"), "--delta", "x=y"]);
    assert_eq!(code, 0);
    assert!(cert.get("embedding").is_ok());
    ramsey_cli::verify(&cert).unwrap();
}

#[test]
fn out_file_is_written_whole() {
    let dir = tempfile::tempdir().unwrap();
    let path: PathBuf = dir.path().join("x.cert");
    let (code, out, _) = run(&["expand", &fixture("path4.st"), "--out", path.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(out.starts_with("expand"));
    let text = std::fs::read_to_string(&path).unwrap();
    let cert = Certificate::parse(&text).unwrap();
    assert!(!cert.command.contains("--out"), "{}", cert.command);
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
}

#[test]
fn fixtures_round_trip() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures");
    for entry in std::fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        let text = std::fs::read_to_string(&path).unwrap();
        let origin = path.display().to_string();
        match path.extension().and_then(|e| e.to_str()) {
            Some("st") => {
                let m = parse_structure(&text, &origin).unwrap();
                let again = parse_structure(&serialize_structure(&m.name, &m.structure), "again").unwrap();
                assert_eq!(again.structure, m.structure, "{origin}");
                assert_eq!(again.name, m.name);
            }
            Some("cls") => {
                let (name, class) = load_class(&path).unwrap();
                let (name2, class2) = parse_class(&serialize_class(&name, &class), "again", &dir).unwrap();
                assert_eq!(name, name2);
                assert_eq!(class.members(), class2.members(), "{origin}");
            }
            Some("seq") => {
                let (name, seq) = load_sequence(&path).unwrap();
                let (name2, seq2) = parse_sequence(&serialize_sequence(&name, &seq), "again", &dir).unwrap();
                assert_eq!(name, name2);
                assert_eq!(seq.tuples(), seq2.tuples());
                assert_eq!(seq.index(), seq2.index());
                assert_eq!(seq.target(), seq2.target());
            }
            _ => {}
        }
    }
}

#[test]
fn chain_partial_function_round_trips() {
    let m = parse_structure(&std::fs::read_to_string(fixture("chain10.st")).unwrap(), "chain").unwrap();
    assert_eq!(m.structure.function_len(0), 9);
    assert_eq!(m.structure.apply(0, &[9]), None);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn random_graphs_round_trip(n in 0usize..6, mask in any::<u64>(), ordered in any::<bool>()) {
        let g: Structure = labelled_graph(n, mask, ordered);
        let text = serialize_structure("G", &g);
        let back = parse_structure(&text, "prop").unwrap();
        prop_assert_eq!(back.structure, g);
    }
}
