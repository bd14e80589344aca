//! Property tests for the invariants of expansions, arrows, classes and
//! indiscernibles.

use std::sync::Arc;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ramsey_core::arrows::{
    arrow_check, find_monochromatic_copy, joint_arrow_check, verify_result, Coloring, CopySystem, Mode,
    SearchConfig, Verdict,
};
use ramsey_core::classes::{orderability_search, FiniteClass, Generator, OrderVerdict};
use ramsey_core::expansions::{define_by_type_union, isolator, qf_type_morleyisation, same_qftp_partition};
use ramsey_core::families::{
    graph_signature, labelled_graph, linear_order, order_signature, pure_set, random_graph,
};
use ramsey_core::indiscernibles::{
    check_locally_based, extract_indiscernible_pattern, finite_satisfiability_check, ind_constraints,
    induced_type_union_relation, is_indiscernible, parse_formula, Delta, IndexedSequence,
};
use ramsey_core::structure::{for_each_injective_tuple, for_each_tuple};
use ramsey_core::{automorphism_group, enumerate_embeddings, enumerate_qf_copies, qftp, Signature, Structure};

fn relational(seed: u64) -> Structure {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rels = rng.gen_range(0..=2);
    let sig = Arc::new(Signature::relational("r", &[("R", 2), ("S", 2)][..rels]));
    let n = rng.gen_range(1..=5);
    let mut b = Structure::builder(sig, n);
    for r in 0..rels {
        for x in 0..n {
            for y in 0..n {
                if rng.gen_bool(0.35) {
                    b.add_tuple_at(r, vec![x, y]).unwrap();
                }
            }
        }
    }
    b.build().unwrap()
}

fn small_cfg() -> SearchConfig {
    SearchConfig {
        samples: 100,
        refute_steps: 20_000,
        ..SearchConfig::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn expansions_keep_the_type_partition(seed in any::<u64>()) {
        let m = relational(seed);
        prop_assert!(same_qftp_partition(&m, &isolator(&m, 3), 3).unwrap());
        prop_assert!(same_qftp_partition(&m, &qf_type_morleyisation(&m, 3), 3).unwrap());
    }

    #[test]
    fn copies_agree_in_the_isolator(seed in any::<u64>()) {
        let m = relational(seed);
        let iso = isolator(&m, m.size());
        for len in 1..=m.size().min(3) {
            for_each_injective_tuple(m.size(), len, |t| {
                assert_eq!(enumerate_qf_copies(&m, t).unwrap(), enumerate_qf_copies(&iso, t).unwrap());
            });
        }
    }

    #[test]
    fn type_unions_are_automorphism_invariant(seed in any::<u64>(), pick in any::<u64>()) {
        let m = relational(seed);
        let mut types = Vec::new();
        for_each_injective_tuple(m.size(), 2, |t| {
            let ty = qftp(&m, t);
            if !types.contains(&ty) {
                types.push(ty);
            }
        });
        let phi: Vec<_> = types.iter().enumerate().filter(|(i, _)| pick >> (i % 64) & 1 == 1).map(|(_, t)| t.clone()).collect();
        let rel = define_by_type_union(&m, &phi).unwrap();
        for g in automorphism_group(&m).elements() {
            for &(a, b) in rel.pairs() {
                prop_assert!(rel.contains(g.apply(a), g.apply(b)));
            }
        }
    }

    #[test]
    fn counterexamples_reverify(n in 0usize..=5, mask in any::<u64>(), r in 1usize..=3) {
        let c = labelled_graph(n, mask, false);
        let b = labelled_graph(3, mask >> 20, false);
        let a = labelled_graph(2, mask >> 30, false);
        let res = arrow_check(&c, &b, &a, r, Mode::Decide, &small_cfg()).unwrap();
        verify_result(&c, &CopySystem::embeddings(&c, &b, &[&a]), &res).unwrap();
        let b_copies = enumerate_embeddings(&c, &b).len();
        if r == 1 && b_copies > 0 {
            prop_assert_eq!(res.verdict, Verdict::Holds);
        }
        if b_copies == 0 {
            prop_assert_eq!(res.verdict, Verdict::Fails);
        }
    }

    #[test]
    fn fewer_colours_keep_an_arrow(n in 0usize..=6, mask in any::<u64>(), r in 2usize..=3) {
        let c = labelled_graph(n, mask, true);
        let b = labelled_graph(2, mask >> 20, true);
        let a = labelled_graph(1, 0, true);
        let res = arrow_check(&c, &b, &a, r, Mode::Decide, &small_cfg()).unwrap();
        if res.verdict == Verdict::Holds {
            let fewer = arrow_check(&c, &b, &a, r - 1, Mode::Decide, &small_cfg()).unwrap();
            prop_assert_eq!(fewer.verdict, Verdict::Holds);
        }
    }

    #[test]
    fn mono_copies_are_monochromatic(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (c, b, a) = (linear_order(6), linear_order(3), linear_order(2));
        let copies: Vec<Vec<usize>> = enumerate_embeddings(&c, &a).iter().map(|e| e.map().to_vec()).collect();
        let colors = copies.iter().map(|_| rng.gen_range(0..2)).collect();
        let chi = Coloring::new(copies, colors, 2).unwrap();
        let e = find_monochromatic_copy(&c, &b, &a, &chi).unwrap().expect("LO_6 arrows LO_3 for pairs");
        let inner: Vec<usize> = enumerate_embeddings(&b, &a)
            .iter()
            .map(|f| chi.color_of(&e.apply_tuple(f.map())).unwrap())
            .collect();
        prop_assert!(inner.windows(2).all(|w| w[0] == w[1]));
    }
}

#[test]
fn holding_arrows_survive_larger_hosts() {
    let cfg = small_cfg();
    for (b, a, r) in [(2, 1, 2), (3, 1, 2), (3, 2, 2), (2, 1, 3)] {
        let (b, a) = (linear_order(b), linear_order(a));
        let first = (0..=7).find(|&n| arrow_check(&linear_order(n), &b, &a, r, Mode::Decide, &cfg).unwrap().verdict == Verdict::Holds);
        let Some(n) = first else { continue };
        for m in n..=7 {
            let res = arrow_check(&linear_order(m), &b, &a, r, Mode::Refute, &cfg).unwrap();
            assert_ne!(res.verdict, Verdict::Fails, "refute found a colouring of LO_{m}");
        }
    }
}

#[test]
fn joint_witnesses_pass_single_arrows_in_sample_mode() {
    let cfg = small_cfg();
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let mut joint = 0;
    for _ in 0..500 {
        let k = rng.gen_range(1..=3);
        let m = rng.gen_range(k..=7);
        let mut pats = vec![linear_order(1)];
        let mut rs = vec![rng.gen_range(1..=3)];
        if k >= 2 && rng.gen_bool(0.5) {
            pats.push(linear_order(2));
            rs.push(rng.gen_range(1..=2));
        }
        let (c, b) = (linear_order(m), linear_order(k));
        let caps = vec![1; pats.len()];
        let res = joint_arrow_check(&c, &b, &pats, &rs, &caps, Mode::Decide, &cfg).unwrap();
        if res.verdict != Verdict::Holds {
            continue;
        }
        joint += 1;
        for (a, &r) in pats.iter().zip(&rs) {
            let single = arrow_check(&c, &b, a, r, Mode::Sample, &cfg).unwrap();
            assert_ne!(single.verdict, Verdict::Fails);
        }
    }
    assert!(joint > 50);
}

#[test]
fn pure_pairs_never_arrow() {
    for n in 0..=8 {
        let res = arrow_check(&pure_set(n), &pure_set(3), &pure_set(2), 2, Mode::Decide, &SearchConfig::default()).unwrap();
        assert_eq!(res.verdict, Verdict::Fails, "|C| = {n}");
    }
}

#[test]
fn orderings_are_strict_total_orders_on_every_member() {
    for class in [
        FiniteClass::generate(Generator::LinearOrders, 6),
        FiniteClass::generate(Generator::OrderedGraphs, 3),
    ] {
        let res = orderability_search(&class);
        assert_eq!(res.verdict, OrderVerdict::Orderable);
        let phi = res.phi().unwrap();
        for m in class.members() {
            let rel = define_by_type_union(m, &phi).unwrap();
            let f = rel.flags();
            assert!(f.irreflexive && f.antisymmetric && f.transitive && f.total, "{m:?}");
        }
    }
}

fn vertex_sequence(n_index: usize, g: Structure, rng: &mut ChaCha8Rng) -> IndexedSequence {
    let size = g.size();
    let tuples = (0..n_index).map(|_| vec![rng.gen_range(0..size)]).collect();
    IndexedSequence::new(linear_order(n_index), Arc::new(g), 1, tuples).unwrap()
}

#[test]
fn extraction_with_two_pair_types_always_succeeds() {
    let sig = graph_signature();
    let delta = Delta::parse(&sig, &["E(x,y)"]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for i in 0..100 {
        let n = rng.gen_range(6..=9);
        let g = random_graph(rng.gen_range(1..=7), rng.gen_range(0.0..1.0), &mut rng);
        let seq = vertex_sequence(n, g, &mut rng);
        let ex = extract_indiscernible_pattern(&seq, &linear_order(3), &delta, None).unwrap();
        let emb = ex.embedding.unwrap_or_else(|| panic!("instance {i}: no copy"));
        let j = seq.reindex(linear_order(3), emb.map()).unwrap();
        assert!(is_indiscernible(&j, &delta, 3).holds);
        assert!(check_locally_based(&j, &seq, &delta, 3).unwrap().holds);
    }
}

#[test]
fn fragments_of_ind_are_finitely_satisfiable() {
    let sig = graph_signature();
    let delta = Delta::parse(&sig, &["E(x,y)"]).unwrap();
    let Delta::Formulas(formulas) = &delta else { unreachable!() };
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let index = linear_order(8);
    let all = ind_constraints(&index, formulas, 1, 2).unwrap();
    for _ in 0..30 {
        let g = random_graph(rng.gen_range(2..=6), 0.5, &mut rng);
        let seq = vertex_sequence(8, g, &mut rng);
        // By construction an LO_3-indiscernible sequence locally based on
        // `seq` exists whenever extraction succeeds.
        if extract_indiscernible_pattern(&seq, &linear_order(3), &delta, None)
            .unwrap()
            .embedding
            .is_none()
        {
            continue;
        }
        for _ in 0..10 {
            let mut a: Vec<usize> = (0..8).filter(|_| rng.gen_bool(0.4)).take(3).collect();
            a.sort_unstable();
            let gamma: Vec<_> = all.iter().filter(|_| rng.gen_bool(0.3)).cloned().collect();
            let sat = finite_satisfiability_check(&gamma, formulas, &a, &seq).unwrap();
            assert!(sat.image.is_some(), "A = {a:?}");
        }
    }
}

#[test]
fn psi_examples_and_equivalence() {
    let order = order_signature();
    let n = 6;
    let seq = IndexedSequence::new(
        linear_order(n),
        Arc::new(linear_order(n)),
        1,
        (0..n).map(|i| vec![i]).collect(),
    )
    .unwrap();
    let lt = parse_formula(&order, "lt(x,y)").unwrap();
    let psi = induced_type_union_relation(&seq, &lt).unwrap();
    assert_eq!(psi, vec![qftp(&linear_order(2), &[0, 1])]);
    // Tuple by tuple: φ holds exactly on index tuples whose type is in Ψ.
    for_each_tuple(n, 2, |t| {
        assert_eq!(lt.eval(seq.target(), &seq.concat(t)), psi.contains(&qftp(seq.index(), t)));
    });

    let top = parse_formula(&order, "x = x").unwrap();
    assert_eq!(induced_type_union_relation(&seq, &top).unwrap(), vec![qftp(&linear_order(1), &[0])]);
    let never = parse_formula(&order, "lt(x,x)").unwrap();
    assert!(induced_type_union_relation(&seq, &never).unwrap().is_empty());

    let bumpy = IndexedSequence::new(
        linear_order(4),
        Arc::new(linear_order(4)),
        1,
        vec![vec![0], vec![2], vec![1], vec![3]],
    )
    .unwrap();
    assert!(induced_type_union_relation(&bumpy, &lt).is_err());
}
