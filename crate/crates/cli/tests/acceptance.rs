//! Acceptance suite: one PASS/FAIL line per criterion, with timings.
//!
//! Runs without the libtest harness so that every criterion reports even
//! when an earlier one fails; the process exits non-zero on any failure.

use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ramsey_cli::certificate::Certificate;
use ramsey_cli::format::serialize_structure;
use ramsey_core::arrows::{
    arrow_check, build_joint_witness, find_good_copy, joint_arrow_check, term_coloring_violations,
    term_iteration_coloring, verify_result, Coloring, CopySystem, Mode, SearchConfig, Verdict,
};
use ramsey_core::classes::{
    ap_check, erp_check, f_erp_check, orderability_search, rigidity_scan, verify_orderability, ClassVerdict,
    FiniteClass, Generator, OrderVerdict, PairBound,
};
use ramsey_core::expansions::{isolator, qf_type_morleyisation, same_qftp_partition};
use ramsey_core::families::{linear_order, pure_set, random_graph, successor_chain};
use ramsey_core::indiscernibles::{
    check_locally_based, extract_indiscernible_pattern, is_indiscernible, Delta, IndexedSequence,
};
use ramsey_core::structure::for_each_injective_tuple;
use ramsey_core::term::Term;
use ramsey_core::{enumerate_qf_copies, qftp, Signature, Structure};

struct Outcome {
    ok: bool,
    detail: String,
}

fn pass(detail: impl Into<String>) -> Outcome {
    Outcome {
        ok: true,
        detail: detail.into(),
    }
}

fn fail(detail: impl Into<String>) -> Outcome {
    Outcome {
        ok: false,
        detail: detail.into(),
    }
}

fn cfg() -> SearchConfig {
    SearchConfig::default()
}

fn within(elapsed: Duration, limit: Duration, out: Outcome) -> Outcome {
    if out.ok && elapsed > limit {
        fail(format!("{} but took {:.2?} (limit {:?})", out.detail, elapsed, limit))
    } else {
        out
    }
}

fn decided(c: &Structure, b: &Structure, a: &Structure, r: usize) -> Result<Verdict, String> {
    let res = arrow_check(c, b, a, r, Mode::Decide, &cfg()).map_err(|e| e.to_string())?;
    let system = CopySystem::embeddings(c, b, &[a]);
    verify_result(c, &system, &res).map_err(|e| format!("certificate rejected: {e}"))?;
    Ok(res.verdict)
}

fn criterion_1() -> Outcome {
    let mut times = Vec::new();
    for (n, want) in [(6, Verdict::Holds), (5, Verdict::Fails)] {
        let t = Instant::now();
        match decided(&linear_order(n), &linear_order(3), &linear_order(2), 2) {
            Ok(v) if v == want => {}
            Ok(v) => return fail(format!("LO_{n}: expected {want}, got {v}")),
            Err(e) => return fail(format!("LO_{n}: {e}")),
        }
        let dt = t.elapsed();
        if dt > Duration::from_secs(1) {
            return fail(format!("LO_{n} took {dt:.2?}"));
        }
        times.push(format!("LO_{n} {want} in {dt:.2?}"));
    }
    pass(times.join(", "))
}

fn criterion_2() -> Outcome {
    let t = Instant::now();
    for n in 0..=8 {
        match decided(&pure_set(n), &pure_set(3), &pure_set(2), 2) {
            Ok(Verdict::Fails) => {}
            Ok(v) => return fail(format!("|C| = {n}: {v}")),
            Err(e) => return fail(format!("|C| = {n}: {e}")),
        }
    }
    within(t.elapsed(), Duration::from_secs(10), pass("FAILS for every pure set of size 0..=8"))
}

fn random_structure(rng: &mut ChaCha8Rng) -> Structure {
    let rels = rng.gen_range(0..=2);
    let names = [("R", 2), ("S", 2)];
    let sig = Arc::new(Signature::relational("random", &names[..rels]));
    let n = rng.gen_range(1..=5);
    let p: f64 = rng.gen_range(0.1..0.7);
    let mut b = Structure::builder(sig, n);
    for r in 0..rels {
        for x in 0..n {
            for y in 0..n {
                if rng.gen_bool(p) {
                    b.add_tuple_at(r, vec![x, y]).unwrap();
                }
            }
        }
    }
    b.build().unwrap()
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let k = 3;
    let mut tuples = 0usize;
    for i in 0..200 {
        let m = random_structure(&mut rng);
        let mor = qf_type_morleyisation(&m, k);
        let iso = isolator(&m, k);
        for (label, e) in [("Morleyisation", &mor), ("isolator", &iso)] {
            match same_qftp_partition(&m, e, k) {
                Ok(true) => {}
                Ok(false) => return fail(format!("structure {i}: {label} changes the type partition")),
                Err(err) => return fail(format!("structure {i}: {err}")),
            }
        }
        for len in 1..=k {
            let mut bad = None;
            for_each_injective_tuple(m.size(), len, |t| {
                tuples += 1;
                if bad.is_none() && enumerate_qf_copies(&m, t).unwrap() != enumerate_qf_copies(&iso, t).unwrap() {
                    bad = Some(t.to_vec());
                }
            });
            if let Some(t) = bad {
                return fail(format!("structure {i}: qf-copies of {t:?} differ in the isolator"));
            }
        }
    }
    pass(format!("200 structures, {tuples} tuples compared"))
}

fn criterion_4() -> Outcome {
    let lo = FiniteClass::generate(Generator::LinearOrders, 5);
    let res = orderability_search(&lo);
    if res.verdict != OrderVerdict::Orderable {
        return fail(format!("linear orders: {}", res.verdict));
    }
    let want = vec![qftp(&linear_order(2), &[0, 1])];
    if res.phi().as_ref() != Some(&want) {
        return fail(format!("linear orders: Φ = {:?}", res.phi()));
    }
    if let Err(e) = verify_orderability(&lo, &res) {
        return fail(format!("linear orders: {e}"));
    }
    for (name, class) in [
        ("pure sets ≤ 4", FiniteClass::generate(Generator::PureSets, 4)),
        ("graphs ≤ 3", FiniteClass::generate(Generator::Graphs, 3)),
    ] {
        let res = orderability_search(&class);
        if res.verdict != OrderVerdict::NotOrderable {
            return fail(format!("{name}: {}", res.verdict));
        }
        if let Err(e) = verify_orderability(&class, &res) {
            return fail(format!("{name}: exhaustion rejected: {e}"));
        }
    }
    pass("LO orderable by the increasing pair; pure sets and graphs refuted by replayed exhaustion")
}

fn graph_delta(sig: &Signature) -> Delta {
    Delta::parse(sig, &["E(x,y)", "x=y"]).expect("Δ parses")
}

/// Width-1 sequences indexed by `LO_20` over random graphs of at most 8
/// vertices; the first component of each result is the extracted copy.
fn criterion_5_run(seed: u64, count: usize) -> Result<Vec<Vec<usize>>, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let target = linear_order(3);
    let mut copies = Vec::new();
    for i in 0..count {
        let n = rng.gen_range(1..=8);
        let p: f64 = rng.gen_range(0.0..1.0);
        let g = Arc::new(random_graph(n, p, &mut rng));
        let tuples = (0..20).map(|_| vec![rng.gen_range(0..n)]).collect();
        let seq = IndexedSequence::new(linear_order(20), g.clone(), 1, tuples).map_err(|e| e.to_string())?;
        let delta = graph_delta(g.signature());
        let ex = extract_indiscernible_pattern(&seq, &target, &delta, None).map_err(|e| e.to_string())?;
        let Some(emb) = ex.embedding else {
            return Err(format!("instance {i}: no indiscernible copy among {}", ex.candidates));
        };
        let j = seq.reindex(target.clone(), emb.map()).map_err(|e| e.to_string())?;
        if !is_indiscernible(&j, &delta, 3).holds {
            return Err(format!("instance {i}: extracted copy is not indiscernible"));
        }
        if !check_locally_based(&j, &seq, &delta, 3).map_err(|e| e.to_string())?.holds {
            return Err(format!("instance {i}: extracted copy is not locally based"));
        }
        copies.push(emb.map().to_vec());
    }
    Ok(copies)
}

fn criterion_5() -> Outcome {
    let t = Instant::now();
    let out = match criterion_5_run(5, 100) {
        Ok(c) => pass(format!("{} of 100 extractions indiscernible and locally based", c.len())),
        Err(e) => fail(e),
    };
    within(t.elapsed(), Duration::from_secs(60), out)
}

/// Corpora with the largest |A|, |B| of the ERP pairs checked on them.
fn corpora() -> Vec<(&'static str, FiniteClass, usize)> {
    let mut out = Vec::new();
    for pairs in [2, 3] {
        out.push(("linear orders ≤ 5", FiniteClass::generate(Generator::LinearOrders, 5), pairs));
        out.push(("pure sets ≤ 4", FiniteClass::generate(Generator::PureSets, 4), pairs));
        out.push(("graphs ≤ 3", FiniteClass::generate(Generator::Graphs, 3), pairs));
        out.push(("ordered graphs ≤ 3", FiniteClass::generate(Generator::OrderedGraphs, 3), pairs));
    }
    out.push(("linear orders ≤ 6", FiniteClass::generate(Generator::LinearOrders, 6), 3));
    out
}

fn random_joint_instance(rng: &mut ChaCha8Rng) -> (Structure, Structure, Vec<Structure>, Vec<usize>) {
    let family: fn(usize) -> Structure = if rng.gen_bool(0.7) { linear_order } else { pure_set };
    let k = rng.gen_range(1..=3);
    let m = rng.gen_range(k..=7);
    let mut patterns = Vec::new();
    let mut colors = Vec::new();
    for size in 1..=k.min(2) {
        if patterns.is_empty() || rng.gen_bool(0.6) {
            patterns.push(family(size));
            colors.push(if size == 1 { rng.gen_range(1..=3) } else { rng.gen_range(1..=2) });
        }
    }
    (family(m), family(k), patterns, colors)
}

fn criterion_6() -> Outcome {
    let c = cfg();
    let mut notes = Vec::new();
    let mut passing = 0;
    for (name, class, pairs) in corpora() {
        let bound = PairBound::both(pairs);
        let wb = class.bound();
        let erp = match erp_check(&class, bound, wb, 2, &c) {
            Ok(r) => r.verdict,
            Err(e) => return fail(format!("{name}: {e}")),
        };
        let f_erp = match f_erp_check(&class, bound, wb, 2, &c) {
            Ok(r) => r.verdict,
            Err(e) => return fail(format!("{name}: {e}")),
        };
        if erp != f_erp {
            return fail(format!("(e) {name}: ERP {erp} but f-ERP {f_erp}"));
        }
        if erp == ClassVerdict::Pass {
            passing += 1;
            let ap = ap_check(&class).verdict;
            if ap != ClassVerdict::Pass {
                return fail(format!("(a) {name}: ERP passes, AP {ap}"));
            }
            let loose = rigidity_scan(&class);
            if !loose.is_empty() {
                return fail(format!("(b) {name}: ERP passes, non-rigid members {loose:?}"));
            }
            let ord = orderability_search(&class).verdict;
            if ord == OrderVerdict::NotOrderable {
                return fail(format!("(c) {name}: ERP passes but not orderable"));
            }
        }
        notes.push(format!("{name} pairs ≤ {pairs}: ERP {erp}"));
    }
    if passing == 0 {
        return fail("no corpus passes ERP, so (a) to (c) were never exercised");
    }

    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (mut holds, mut other) = (0, 0);
    for i in 0..500 {
        let (cs, bs, pats, colors) = random_joint_instance(&mut rng);
        let caps = vec![1; pats.len()];
        let joint = match joint_arrow_check(&cs, &bs, &pats, &colors, &caps, Mode::Decide, &c) {
            Ok(r) => r,
            Err(e) => return fail(format!("(d) instance {i}: {e}")),
        };
        let refs: Vec<&Structure> = pats.iter().collect();
        if let Err(e) = verify_result(&cs, &CopySystem::embeddings(&cs, &bs, &refs), &joint) {
            return fail(format!("(d) instance {i}: joint certificate rejected: {e}"));
        }
        if joint.verdict != Verdict::Holds {
            other += 1;
            continue;
        }
        holds += 1;
        for (a, &r) in pats.iter().zip(&colors) {
            match decided(&cs, &bs, a, r) {
                Ok(Verdict::Holds) => {}
                Ok(v) => {
                    return fail(format!(
                        "(d) instance {i}: joint witness |C|={} |B|={} but single arrow for |A|={} is {v}",
                        cs.size(),
                        bs.size(),
                        a.size()
                    ))
                }
                Err(e) => return fail(format!("(d) instance {i}: {e}")),
            }
        }
    }
    notes.push(format!("(d) 500 instances, {holds} joint witnesses, {other} without"));
    pass(notes.join("; "))
}

fn criterion_7() -> Outcome {
    let t = Instant::now();
    let candidates: Vec<Structure> = (0..=12).map(linear_order).collect();
    let b = linear_order(3);
    let patterns = [linear_order(1), linear_order(2)];
    let w = match build_joint_witness(&candidates, &b, &patterns, &[2, 2], &cfg()) {
        Ok(w) => w,
        Err(e) => return fail(e.to_string()),
    };
    let Some(c) = w.structure else {
        return fail("no joint witness among LO_0..LO_12");
    };
    if c.size() > 11 {
        return fail(format!("witness LO_{} is larger than LO_11", c.size()));
    }
    let system = CopySystem::embeddings(&c, &b, &[&patterns[0], &patterns[1]]);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for trial in 0..1000 {
        let cols: Vec<Coloring> = system
            .groups
            .iter()
            .map(|g| {
                let colors = g.a_copies.iter().map(|_| rng.gen_range(0..2)).collect();
                Coloring::new(g.a_copies.clone(), colors, 2).unwrap()
            })
            .collect();
        match find_good_copy(&system, &cols, &[1, 1]) {
            Ok(Some(_)) => {}
            Ok(None) => return fail(format!("colouring pair {trial} has no jointly monochromatic LO_3")),
            Err(e) => return fail(e.to_string()),
        }
    }
    within(
        t.elapsed(),
        Duration::from_secs(30),
        pass(format!("witness LO_{}; 1000 random colouring pairs all have a good copy", c.size())),
    )
}

fn criterion_8() -> Outcome {
    let chain = successor_chain(10);
    let s = vec![Term::Apply(0, vec![Term::Var(0)])];
    let tc = match term_iteration_coloring(&chain, &[0], &s) {
        Ok(tc) => tc,
        Err(e) => return fail(e.to_string()),
    };
    let chi = &tc.coloring;
    let mut pairs = 0;
    for x in chain.domain() {
        let Some(y) = chain.apply(0, &[x]) else { continue };
        if let (Some(a), Some(b)) = (chi.color_of(&[x]), chi.color_of(&[y])) {
            pairs += 1;
            if a == b {
                return fail(format!("({x}, s({x})) both coloured {a}"));
            }
        }
    }
    if !term_coloring_violations(&chain, &s, chi).is_empty() {
        return fail("violation list is not empty");
    }
    if pairs == 0 {
        return fail("no (x, s(x)) pair among the coloured copies");
    }
    pass(format!("{} copies coloured, {pairs} (x, s(x)) pairs all split", chi.copies().len()))
}

fn run_cli(args: &[&str]) -> (i32, String) {
    let mut argv = vec!["ramsey".to_string()];
    argv.extend(args.iter().map(|s| s.to_string()));
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = ramsey_cli::run(&argv, &mut out, &mut err);
    let mut text = String::from_utf8(out).unwrap();
    text.push_str(&String::from_utf8(err).unwrap());
    (code, text)
}

fn criterion_9() -> Outcome {
    let fx = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures");
    let dir = tempfile::tempdir().unwrap();
    let put = |name: &str, m: &Structure| -> String {
        let p: PathBuf = dir.path().join(name);
        std::fs::write(&p, serialize_structure(name.trim_end_matches(".st"), m)).unwrap();
        p.display().to_string()
    };
    let f = |name: &str| fx.join(name).display().to_string();
    let p2 = put("P2.st", &pure_set(2));
    let p3 = put("P3.st", &pure_set(3));
    let mut commands: Vec<Vec<String>> = vec![
        vec!["arrow".into(), f("LO6.st"), f("LO3.st"), f("LO2.st")],
        vec!["arrow".into(), f("LO5.st"), f("LO3.st"), f("LO2.st")],
        vec!["arrow".into(), f("LO5.st"), f("LO3.st"), f("LO2.st"), "--mode".into(), "refute".into()],
        vec!["arrow".into(), f("LO6.st"), f("LO3.st"), f("LO2.st"), "--mode".into(), "sample".into(), "--seed".into(), "9".into()],
        vec!["orderable".into(), f("orders.cls")],
        vec!["orderable".into(), f("puresets.cls")],
        vec!["orderable".into(), f("graphs.cls")],
        vec!["class-check".into(), f("orders.cls")],
        vec!["class-check".into(), f("puresets.cls")],
        vec!["expand".into(), f("path4.st"), "--k".into(), "3".into()],
        vec!["isolate".into(), f("digraph.st")],
        vec!["elf".into(), f("digraph.st"), "--tuple".into(), "1".into()],
        vec!["degree".into(), f("LO2.st"), f("LO3.st"), "--candidates".into(), f("candidates.cls"), "-d".into(), "1".into()],
        vec!["joint-arrow".into(), f("LO6.st"), f("LO3.st"), "--pattern".into(), f("LO1.st"), "--pattern".into(), f("LO2.st")],
        vec!["indiscernible".into(), f("seq.seq"), "--delta".into(), "E(x,y)".into(), "--delta".into(), "x=y".into()],
        vec!["extract".into(), f("seq.seq"), f("LO3.st"), "--all-types".into()],
    ];
    for n in 0..=8 {
        commands.push(vec!["arrow".into(), put(&format!("P{n}.st"), &pure_set(n)), p3.clone(), p2.clone()]);
    }
    for cmd in &commands {
        let args: Vec<&str> = cmd.iter().map(String::as_str).collect();
        let (c1, first) = run_cli(&args);
        let (c2, second) = run_cli(&args);
        if c1 != c2 || first != second {
            return fail(format!("`{}` is not deterministic", args.join(" ")));
        }
        if c1 > 2 {
            return fail(format!("`{}` exited {c1}: {first}", args.join(" ")));
        }
        let cert = match Certificate::parse(&first) {
            Ok(c) => c,
            Err(e) => return fail(format!("`{}`: {e}", args.join(" "))),
        };
        if let Err(e) = ramsey_cli::verify(&cert) {
            return fail(format!("`{}`: replay rejected: {e}", args.join(" ")));
        }
    }
    let core_1 = criterion_5_run(99, 10);
    let core_2 = criterion_5_run(99, 10);
    if core_1 != core_2 {
        return fail("seeded extraction differs between runs");
    }
    pass(format!("{} certificates byte-identical on rerun and replayed", commands.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("classical Ramsey regression", criterion_1),
        ("rigidity obstruction", criterion_2),
        ("expansion invariants", criterion_3),
        ("orderability", criterion_4),
        ("extraction guarantee", criterion_5),
        ("coherence suite", criterion_6),
        ("joint arrow composition", criterion_7),
        ("term-iteration colouring", criterion_8),
        ("determinism and replay", criterion_9),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let label = format!("criterion {}", i + 1);
        if !filter.is_empty() && !filter.iter().any(|f| label.contains(f.as_str()) || name.contains(f.as_str())) {
            continue;
        }
        let t = Instant::now();
        let out = run();
        let status = if out.ok { "PASS" } else { "FAIL" };
        println!("{label} [{status}] {name} ({:.2?}): {}", t.elapsed(), out.detail);
        if !out.ok {
            failed += 1;
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
