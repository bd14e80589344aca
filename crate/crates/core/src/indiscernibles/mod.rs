//! Generalized indiscernible sequences at finite scale.
//!
//! A sequence assigns a `w`-tuple of a target structure `M` to each element
//! of an index structure `N`. Types of index tuples are quantifier-free
//! types in `N`; types of the indexed tuples are read through a finite set
//! of formulas Δ, or as full types (orbits of `Aut(M)`).

mod formula;

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use thiserror::Error;

use crate::canon::canonical_form;
use crate::embedding::{enumerate_embeddings, Embedding};
use crate::qftype::{qftp, realizations, QfType};
use crate::structure::{for_each_injective_tuple, for_each_tuple, Signature, Structure, StructureError};

pub use formula::{parse_formula, DeltaFormula, Formula, FormulaError};

/// Default cap on the length of index tuples outside extraction.
pub const DEFAULT_ARITY_CAP: usize = 4;

#[derive(Debug, Error)]
pub enum IndError {
    #[error("index {index} carries a tuple of width {found}, expected {expected}")]
    Width { index: usize, expected: usize, found: usize },
    #[error("sequence has {found} tuples for an index structure of size {expected}")]
    Length { expected: usize, found: usize },
    #[error("index structures have different signatures")]
    IndexSignature,
    #[error("sequences differ in target structure or width")]
    Incompatible,
    #[error("formula `{formula}` has arity {arity}, not a multiple of the width {width}")]
    FormulaArity { formula: String, arity: usize, width: usize },
    #[error("the target index structure does not embed into the index structure")]
    NotEmbeddable,
    #[error("index {0} is outside the index structure")]
    IndexOutOfRange(usize),
    #[error("index tuples {left:?} and {right:?} have the same type but differ on the formula")]
    NotIndiscernible { left: Vec<usize>, right: Vec<usize> },
    #[error(transparent)]
    Structure(#[from] StructureError),
}

/// `I = (ā_i : i ∈ N)` with every `ā_i` a `w`-tuple of `M`.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexedSequence {
    index: Structure,
    target: Arc<Structure>,
    width: usize,
    tuples: Vec<Vec<usize>>,
}

impl IndexedSequence {
    pub fn new(index: Structure, target: Arc<Structure>, width: usize, tuples: Vec<Vec<usize>>) -> Result<Self, IndError> {
        if tuples.len() != index.size() {
            return Err(IndError::Length {
                expected: index.size(),
                found: tuples.len(),
            });
        }
        for (i, t) in tuples.iter().enumerate() {
            if t.len() != width {
                return Err(IndError::Width {
                    index: i,
                    expected: width,
                    found: t.len(),
                });
            }
            if let Some(&x) = t.iter().find(|&&x| x >= target.size()) {
                return Err(StructureError::ElementOutOfRange {
                    element: x,
                    size: target.size(),
                }
                .into());
            }
        }
        Ok(IndexedSequence {
            index,
            target,
            width,
            tuples,
        })
    }

    pub fn index(&self) -> &Structure {
        &self.index
    }

    pub fn target(&self) -> &Arc<Structure> {
        &self.target
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn tuples(&self) -> &[Vec<usize>] {
        &self.tuples
    }

    /// `ā_{i_1} ⌢ … ⌢ ā_{i_n}`.
    pub fn concat(&self, indices: &[usize]) -> Vec<usize> {
        indices.iter().flat_map(|&i| self.tuples[i].iter().copied()).collect()
    }

    /// `(ā_{g(i)} : i ∈ N′)` for an embedding `g : N′ → N`.
    pub fn reindex(&self, sub_index: Structure, g: &[usize]) -> Result<Self, IndError> {
        if let Some(&x) = g.iter().find(|&&x| x >= self.index.size()) {
            return Err(IndError::IndexOutOfRange(x));
        }
        let tuples = g.iter().map(|&i| self.tuples[i].clone()).collect();
        IndexedSequence::new(sub_index, self.target.clone(), self.width, tuples)
    }
}

/// The formulas through which indexed tuples are compared.
#[derive(Debug, Clone, PartialEq)]
pub enum Delta {
    Formulas(Vec<DeltaFormula>),
    /// Full types: orbits of `Aut(M)`.
    AllTypes,
}

impl Delta {
    pub fn parse(sig: &Signature, formulas: &[&str]) -> Result<Self, FormulaError> {
        formulas
            .iter()
            .map(|f| parse_formula(sig, f))
            .collect::<Result<_, _>>()
            .map(Delta::Formulas)
    }
}

impl fmt::Display for Delta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Delta::AllTypes => f.write_str("ALL"),
            Delta::Formulas(fs) => {
                let texts: Vec<&str> = fs.iter().map(|d| d.text.as_str()).collect();
                write!(f, "{{{}}}", texts.join("; "))
            }
        }
    }
}

/// The Δ-type of a tuple of `M`: for formulas, the truth value of every
/// formula on every choice of entries; for full types, the canonical form
/// of `M` with the tuple named.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum DeltaType {
    Bits(Vec<bool>),
    Orbit(String),
}

fn name_tuple(m: &Structure, tuple: &[usize]) -> Structure {
    let sig = m.signature();
    let mut constants = sig.constants().to_vec();
    let mut k = 0;
    let fresh: Vec<String> = (0..tuple.len())
        .map(|_| loop {
            let name = format!("_p{k}");
            k += 1;
            if !constants.contains(&name) && sig.relation_index(&name).is_none() && sig.function_index(&name).is_none() {
                constants.push(name.clone());
                break name;
            }
        })
        .collect();
    let named = Signature::new(
        format!("{}+pointed", sig.name()),
        sig.relations().iter().map(|s| (s.name.clone(), s.arity)).collect(),
        sig.functions().iter().map(|s| (s.name.clone(), s.arity)).collect(),
        constants,
    )
    .expect("fresh names do not clash");
    let mut b = Structure::builder(Arc::new(named), m.size());
    for r in 0..sig.relations().len() {
        for t in m.relation_tuples(r) {
            b.add_tuple_at(r, t.clone()).expect("copied tuple is valid");
        }
    }
    for f in 0..sig.functions().len() {
        for (args, v) in m.function_entries(f) {
            b.set_value_at(f, args.clone(), v).expect("copied entry is valid");
        }
    }
    for (name, &v) in sig.constants().iter().zip(m.constants()) {
        b.set_constant(name, v).expect("copied constant is valid");
    }
    for (name, &v) in fresh.iter().zip(tuple) {
        b.set_constant(name, v).expect("tuple entries are in range");
    }
    b.build().expect("named copy of a valid structure")
}

pub fn delta_type(m: &Structure, delta: &Delta, tuple: &[usize]) -> DeltaType {
    match delta {
        Delta::AllTypes => DeltaType::Orbit(canonical_form(&name_tuple(m, tuple)).to_string()),
        Delta::Formulas(fs) => {
            let mut bits = Vec::new();
            for f in fs {
                for_each_tuple(tuple.len(), f.arity, |pos| {
                    let args: Vec<usize> = pos.iter().map(|&p| tuple[p]).collect();
                    bits.push(f.eval(m, &args));
                });
            }
            DeltaType::Bits(bits)
        }
    }
}

/// The first formula on which two tuples of equal length disagree.
fn distinguishing_formula(m: &Structure, delta: &Delta, u: &[usize], v: &[usize]) -> Option<usize> {
    let Delta::Formulas(fs) = delta else { return None };
    fs.iter().position(|f| {
        let mut differs = false;
        for_each_tuple(u.len(), f.arity, |pos| {
            if !differs {
                let a: Vec<usize> = pos.iter().map(|&p| u[p]).collect();
                let b: Vec<usize> = pos.iter().map(|&p| v[p]).collect();
                differs = f.eval(m, &a) != f.eval(m, &b);
            }
        });
        differs
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    /// First index tuple of its type, in lexicographic order.
    pub left: Vec<usize>,
    pub right: Vec<usize>,
    /// Index into Δ of a formula telling them apart; `None` for full types.
    pub formula: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndiscernibilityReport {
    pub holds: bool,
    pub arity_cap: usize,
    pub violations: Vec<Violation>,
}

/// Compares, for every length up to `arity_cap`, each injective index
/// tuple against the first tuple of its type. Tuples with repeats add
/// nothing: their types are read off an injective subtuple.
pub fn is_indiscernible(seq: &IndexedSequence, delta: &Delta, arity_cap: usize) -> IndiscernibilityReport {
    let m = seq.target.as_ref();
    let mut violations = Vec::new();
    for n in 1..=arity_cap.min(seq.index.size()) {
        let mut first: HashMap<QfType, (Vec<usize>, DeltaType)> = HashMap::new();
        for_each_injective_tuple(seq.index.size(), n, |idx| {
            let tuple = seq.concat(idx);
            let dt = delta_type(m, delta, &tuple);
            match first.get(&qftp(&seq.index, idx)) {
                Some((left, ldt)) => {
                    if *ldt != dt {
                        violations.push(Violation {
                            left: left.clone(),
                            right: idx.to_vec(),
                            formula: distinguishing_formula(m, delta, &seq.concat(left), &tuple),
                        });
                    }
                }
                None => {
                    first.insert(qftp(&seq.index, idx), (idx.to_vec(), dt));
                }
            }
        });
    }
    IndiscernibilityReport {
        holds: violations.is_empty(),
        arity_cap,
        violations,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalBasis {
    pub holds: bool,
    /// For each injective index tuple `ī` of `J`, some `j̄` of `I` with the
    /// same index type and the same Δ-type, if one exists.
    pub witnesses: Vec<(Vec<usize>, Option<Vec<usize>>)>,
}

/// `J` is locally based on `I` when every index tuple of `J` is matched, in
/// both its index type and its Δ-type, by an index tuple of `I`.
pub fn check_locally_based(
    j: &IndexedSequence,
    i: &IndexedSequence,
    delta: &Delta,
    arity_cap: usize,
) -> Result<LocalBasis, IndError> {
    if !j.index.signature().same_symbols(i.index.signature()) {
        return Err(IndError::IndexSignature);
    }
    if j.width != i.width || j.target != i.target {
        return Err(IndError::Incompatible);
    }
    let m = i.target.as_ref();
    let mut witnesses = Vec::new();
    let mut holds = true;
    for n in 1..=arity_cap.min(j.index.size()) {
        let mut available: HashMap<(QfType, DeltaType), Vec<usize>> = HashMap::new();
        for_each_injective_tuple(i.index.size(), n, |idx| {
            available
                .entry((qftp(&i.index, idx), delta_type(m, delta, &i.concat(idx))))
                .or_insert_with(|| idx.to_vec());
        });
        for_each_injective_tuple(j.index.size(), n, |idx| {
            let key = (qftp(&j.index, idx), delta_type(m, delta, &j.concat(idx)));
            let w = available.get(&key).cloned();
            holds &= w.is_some();
            witnesses.push((idx.to_vec(), w));
        });
    }
    Ok(LocalBasis { holds, witnesses })
}

/// `φ(x_ī) → φ(x_j̄)` for index tuples of equal type; `x_i` stands for the
/// `w` variables of `ā_i`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IndConstraint {
    pub left: Vec<usize>,
    pub right: Vec<usize>,
    pub formula: usize,
}

/// Every constraint of `ind(N)` for formulas whose index arity
/// (`arity / width`) is at most `arity_cap`. Index tuples may repeat.
pub fn ind_constraints(
    n: &Structure,
    formulas: &[DeltaFormula],
    width: usize,
    arity_cap: usize,
) -> Result<Vec<IndConstraint>, IndError> {
    let mut out = Vec::new();
    for (fi, f) in formulas.iter().enumerate() {
        if width == 0 || f.arity % width != 0 {
            return Err(IndError::FormulaArity {
                formula: f.text.clone(),
                arity: f.arity,
                width,
            });
        }
        let k = f.arity / width;
        if k > arity_cap {
            continue;
        }
        let mut classes: Vec<(QfType, Vec<Vec<usize>>)> = Vec::new();
        let mut pos: HashMap<QfType, usize> = HashMap::new();
        for_each_tuple(n.size(), k, |t| {
            let ty = qftp(n, t);
            let slot = *pos.entry(ty.clone()).or_insert_with(|| {
                classes.push((ty, Vec::new()));
                classes.len() - 1
            });
            classes[slot].1.push(t.to_vec());
        });
        for (_, tuples) in &classes {
            for l in tuples {
                for r in tuples {
                    out.push(IndConstraint {
                        left: l.clone(),
                        right: r.clone(),
                        formula: fi,
                    });
                }
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Satisfaction {
    /// `f(A[k]) = image[k]`; `None` when no relocation works.
    pub image: Option<Vec<usize>>,
    /// Relocations examined.
    pub tried: usize,
}

/// Looks for `f : A → B ⊆ N` preserving the index type of `A` (as listed)
/// such that the tuples `ā_{f(i)}` satisfy every constraint of `gamma`
/// that only mentions indices in `A`. The identity is tried first.
pub fn finite_satisfiability_check(
    gamma: &[IndConstraint],
    formulas: &[DeltaFormula],
    a: &[usize],
    seq: &IndexedSequence,
) -> Result<Satisfaction, IndError> {
    if let Some(&x) = a.iter().find(|&&x| x >= seq.index.size()) {
        return Err(IndError::IndexOutOfRange(x));
    }
    let pos: HashMap<usize, usize> = a.iter().enumerate().map(|(k, &x)| (x, k)).collect();
    let relevant: Vec<&IndConstraint> = gamma
        .iter()
        .filter(|c| c.left.iter().chain(&c.right).all(|x| pos.contains_key(x)))
        .collect();
    let mut copies = realizations(&seq.index, &qftp(&seq.index, a), None)?;
    if let Some(k) = copies.iter().position(|c| c == a) {
        let id = copies.remove(k);
        copies.insert(0, id);
    }
    let m = seq.target.as_ref();
    let mut tried = 0;
    for image in copies {
        tried += 1;
        let moved = |t: &[usize]| -> Vec<usize> { t.iter().map(|x| image[pos[x]]).collect() };
        let ok = relevant.iter().all(|c| {
            let f = &formulas[c.formula];
            !f.eval(m, &seq.concat(&moved(&c.left))) || f.eval(m, &seq.concat(&moved(&c.right)))
        });
        if ok {
            return Ok(Satisfaction {
                image: Some(image),
                tried,
            });
        }
    }
    Ok(Satisfaction { image: None, tried })
}

#[derive(Debug, Clone)]
pub struct Extraction {
    /// `g : N_target → N` such that the re-indexed sequence is
    /// indiscernible and locally based on the source.
    pub embedding: Option<Embedding>,
    pub extracted: Option<IndexedSequence>,
    pub candidates: usize,
    /// Candidates rejected before the answer (all of them on failure).
    pub rejected: usize,
    pub arity_cap: usize,
}

/// Searches the copies of `n_target` in the index structure, in
/// lexicographic order, for one on which every index type realized inside
/// `n_target` is monochromatic under the Δ-type colouring. The answer is
/// re-checked for indiscernibility and local basedness.
pub fn extract_indiscernible_pattern(
    seq: &IndexedSequence,
    n_target: &Structure,
    delta: &Delta,
    arity_cap: Option<usize>,
) -> Result<Extraction, IndError> {
    if !n_target.signature().same_symbols(seq.index.signature()) {
        return Err(IndError::IndexSignature);
    }
    let cap = arity_cap.unwrap_or(n_target.size());
    let copies = enumerate_embeddings(&seq.index, n_target);
    if copies.is_empty() {
        return Err(IndError::NotEmbeddable);
    }
    let m = seq.target.as_ref();
    let mut tuples: Vec<Vec<Vec<usize>>> = Vec::new();
    for n in 1..=cap.min(n_target.size()) {
        let mut all = Vec::new();
        for_each_injective_tuple(n_target.size(), n, |t| all.push(t.to_vec()));
        tuples.push(all);
    }
    let types: Vec<Vec<QfType>> = tuples
        .iter()
        .map(|ts| ts.iter().map(|t| qftp(n_target, t)).collect())
        .collect();
    let monochromatic = |g: &Embedding| -> bool {
        for (ts, tys) in tuples.iter().zip(&types) {
            let mut color: HashMap<&QfType, DeltaType> = HashMap::new();
            for (t, ty) in ts.iter().zip(tys) {
                let image: Vec<usize> = t.iter().map(|&x| g.apply(x)).collect();
                let dt = delta_type(m, delta, &seq.concat(&image));
                match color.get(ty) {
                    Some(c) if *c != dt => return false,
                    Some(_) => {}
                    None => {
                        color.insert(ty, dt);
                    }
                }
            }
        }
        true
    };
    let found = copies.par_iter().position_first(monochromatic);
    let candidates = copies.len();
    let Some(k) = found else {
        return Ok(Extraction {
            embedding: None,
            extracted: None,
            candidates,
            rejected: candidates,
            arity_cap: cap,
        });
    };
    let g = copies[k].clone();
    let extracted = seq.reindex(n_target.clone(), g.map())?;
    let ind = is_indiscernible(&extracted, delta, cap);
    assert!(ind.holds, "extracted sequence must be indiscernible: {:?}", ind.violations);
    let based = check_locally_based(&extracted, seq, delta, cap)?;
    assert!(based.holds, "extracted sequence must be locally based on its source");
    Ok(Extraction {
        embedding: Some(g),
        extracted: Some(extracted),
        candidates,
        rejected: k,
        arity_cap: cap,
    })
}

/// `Ψ = { qftp_N(ī) : M ⊨ φ(ā_ī) }`, checked so that `φ(ā_ī)` holds
/// exactly when the type of `ī` is in Ψ, over every index tuple.
pub fn induced_type_union_relation(seq: &IndexedSequence, phi: &DeltaFormula) -> Result<Vec<QfType>, IndError> {
    if seq.width == 0 || phi.arity % seq.width != 0 {
        return Err(IndError::FormulaArity {
            formula: phi.text.clone(),
            arity: phi.arity,
            width: seq.width,
        });
    }
    let k = phi.arity / seq.width;
    let m = seq.target.as_ref();
    let mut truth: HashMap<QfType, (Vec<usize>, bool)> = HashMap::new();
    let mut psi = Vec::new();
    let mut clash = None;
    for_each_tuple(seq.index.size(), k, |t| {
        if clash.is_some() {
            return;
        }
        let ty = qftp(&seq.index, t);
        let value = phi.eval(m, &seq.concat(t));
        match truth.get(&ty) {
            Some((left, v)) if *v != value => clash = Some((left.clone(), t.to_vec())),
            Some(_) => {}
            None => {
                if value {
                    psi.push(ty.clone());
                }
                truth.insert(ty, (t.to_vec(), value));
            }
        }
    });
    match clash {
        Some((left, right)) => Err(IndError::NotIndiscernible { left, right }),
        None => Ok(psi),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{self, complete_graph, linear_order, path_graph, pure_set};

    fn graph_delta() -> Delta {
        Delta::parse(&families::graph_signature(), &["E(x,y)", "x = y"]).unwrap()
    }

    fn vertices(index: Structure, g: Structure, seq: &[usize]) -> IndexedSequence {
        IndexedSequence::new(index, Arc::new(g), 1, seq.iter().map(|&v| vec![v]).collect()).unwrap()
    }

    #[test]
    fn constant_sequences_are_indiscernible() {
        let s = vertices(linear_order(5), path_graph(3), &[1; 5]);
        assert!(is_indiscernible(&s, &graph_delta(), 4).holds);
        assert!(is_indiscernible(&s, &Delta::AllTypes, 3).holds);
    }

    #[test]
    fn path_in_order_is_not_indiscernible() {
        let s = vertices(linear_order(4), path_graph(4), &[0, 1, 2, 3]);
        let delta = Delta::parse(&families::graph_signature(), &["E(x,y)"]).unwrap();
        let r = is_indiscernible(&s, &delta, 4);
        assert!(!r.holds);
        assert_eq!(
            r.violations[0],
            Violation {
                left: vec![0, 1],
                right: vec![0, 2],
                formula: Some(0)
            }
        );
    }

    #[test]
    fn clique_over_a_set_is_indiscernible() {
        let s = vertices(pure_set(4), complete_graph(4), &[0, 1, 2, 3]);
        assert!(is_indiscernible(&s, &graph_delta(), 4).holds);
        assert!(is_indiscernible(&s, &Delta::AllTypes, 4).holds);
    }

    #[test]
    fn full_types_see_more_than_atoms() {
        // Endpoints and inner vertices of a path are separated by full
        // types but not by Δ = {x = x}.
        let s = vertices(pure_set(2), path_graph(3), &[0, 1]);
        let trivial = Delta::parse(&families::graph_signature(), &["x = x"]).unwrap();
        assert!(is_indiscernible(&s, &trivial, 2).holds);
        assert!(!is_indiscernible(&s, &Delta::AllTypes, 2).holds);
    }

    #[test]
    fn local_basis() {
        let i = vertices(linear_order(4), path_graph(4), &[0, 1, 2, 3]);
        let delta = graph_delta();
        assert!(check_locally_based(&i, &i, &delta, 3).unwrap().holds);
        let c = vertices(linear_order(4), path_graph(4), &[0; 4]);
        let one = Delta::parse(&families::graph_signature(), &["exists y. exists z. E(x,y) & E(x,z) & y != z"]).unwrap();
        // c sees only the endpoint type; i realizes both.
        assert!(!check_locally_based(&i, &c, &one, 1).unwrap().holds);
        assert!(check_locally_based(&c, &i, &one, 1).unwrap().holds);
    }

    #[test]
    fn constraint_counts() {
        let sig = families::graph_signature();
        let phi = vec![parse_formula(&sig, "E(x,y)").unwrap()];
        let lo2 = ind_constraints(&linear_order(2), &phi, 1, 4).unwrap();
        // Classes: {(0,0),(1,1)}, {(0,1)}, {(1,0)}.
        assert_eq!(lo2.len(), 4 + 1 + 1);
        assert!(lo2.contains(&IndConstraint {
            left: vec![0, 1],
            right: vec![0, 1],
            formula: 0
        }));
        let set3 = ind_constraints(&pure_set(3), &phi, 1, 4).unwrap();
        assert_eq!(set3.len(), 36 + 9);
        // In a successor chain every element has its own type.
        let loop_phi = vec![parse_formula(&sig, "E(x,x)").unwrap()];
        let rigid = ind_constraints(&families::successor_chain(3), &loop_phi, 1, 4).unwrap();
        assert_eq!(rigid.len(), 3);
        assert!(rigid.iter().all(|c| c.left == c.right));
    }

    #[test]
    fn finite_satisfiability() {
        let sig = families::graph_signature();
        let phi = vec![parse_formula(&sig, "E(x,y)").unwrap()];
        let s = vertices(linear_order(4), complete_graph(4), &[0, 1, 2, 3]);
        let gamma = ind_constraints(s.index(), &phi, 1, 2).unwrap();
        let r = finite_satisfiability_check(&gamma, &phi, &[0, 1, 2], &s).unwrap();
        assert_eq!(r.image, Some(vec![0, 1, 2]));
        assert_eq!(r.tried, 1);
        let empty = finite_satisfiability_check(&[], &phi, &[1, 3], &s).unwrap();
        assert_eq!(empty.image, Some(vec![1, 3]));
        // A path indexed by LO_4 has no increasing triple whose pairs all
        // agree on adjacency.
        let p = vertices(linear_order(4), path_graph(4), &[0, 1, 2, 3]);
        let gamma = ind_constraints(p.index(), &phi, 1, 2).unwrap();
        let r = finite_satisfiability_check(&gamma, &phi, &[0, 1, 2], &p).unwrap();
        assert_eq!(r.image, None);
        assert_eq!(r.tried, 4);
    }

    #[test]
    fn extraction_from_a_path() {
        let delta = graph_delta();
        let s = vertices(linear_order(6), path_graph(6), &[0, 1, 2, 3, 4, 5]);
        let e = extract_indiscernible_pattern(&s, &linear_order(3), &delta, None).unwrap();
        let g = e.embedding.unwrap();
        assert_eq!(g.map(), &[0, 2, 4]);
        let lo5 = vertices(linear_order(5), path_graph(5), &[0, 1, 2, 3, 4]);
        assert!(extract_indiscernible_pattern(&lo5, &linear_order(3), &delta, None)
            .unwrap()
            .embedding
            .is_some());
    }

    #[test]
    fn extraction_fails_on_the_bad_colouring() {
        // The pentagon: LO_5 pairs coloured by adjacency in C_5 have no
        // monochromatic triangle.
        let delta = graph_delta();
        let s = vertices(linear_order(5), families::cycle_graph(5), &[0, 1, 2, 3, 4]);
        let e = extract_indiscernible_pattern(&s, &linear_order(3), &delta, None).unwrap();
        assert!(e.embedding.is_none());
        assert_eq!(e.rejected, 10);
        assert!(matches!(
            extract_indiscernible_pattern(&s, &linear_order(6), &delta, None),
            Err(IndError::NotEmbeddable)
        ));
    }

    #[test]
    fn psi_construction() {
        let sig = families::order_signature();
        let lo = linear_order(5);
        let s = IndexedSequence::new(lo.clone(), Arc::new(lo.clone()), 1, (0..5).map(|i| vec![i]).collect()).unwrap();
        let lt = parse_formula(&sig, "lt(x,y)").unwrap();
        assert_eq!(induced_type_union_relation(&s, &lt).unwrap(), vec![qftp(&lo, &[0, 1])]);
        let top = parse_formula(&sig, "x = x").unwrap();
        assert_eq!(induced_type_union_relation(&s, &top).unwrap().len(), 1);
        let bottom = parse_formula(&sig, "!(x = x)").unwrap();
        assert!(induced_type_union_relation(&s, &bottom).unwrap().is_empty());
        let least = parse_formula(&sig, "forall y. !lt(y, x)").unwrap();
        assert!(matches!(
            induced_type_union_relation(&s, &least),
            Err(IndError::NotIndiscernible { .. })
        ));
    }
}
