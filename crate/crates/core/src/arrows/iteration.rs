//! The parity colouring along a term orbit, and promotion of arrow
//! witnesses from a generating subset to the structure it generates.

use std::collections::HashMap;

use thiserror::Error;

use crate::embedding::{closure, generated_substructure};
use crate::qftype::{atomic_type, enumerate_atomic_copies, qftp, realizations};
use crate::structure::{is_injective, Structure};
use crate::term::{eval_tuple, Term};

use super::system::CopySystem;
use super::{solve, ArrowError, ArrowResult, Coloring, Mode, SearchConfig, Verdict};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TermError {
    #[error("expected {expected} terms, got {found}")]
    Arity { expected: usize, found: usize },
    #[error("tuple {0:?} repeats an element")]
    NonInjective(Vec<usize>),
    #[error("t(b) is undefined")]
    Undefined,
    #[error("t(b) = b")]
    Fixed,
    #[error("b and t(b) have different atomic types")]
    TypeMismatch,
    #[error("the orbit of b returns to itself after {0} steps")]
    PeriodicOrbit(usize),
}

#[derive(Debug, Clone)]
pub struct TermColoring {
    pub coloring: Coloring,
    /// `b, t(b), t(t(b)), ...` while defined and of the same atomic type.
    pub orbit: Vec<Vec<usize>>,
}

/// Two-colours the copies of `b` (tuples with its atomic type) so that no
/// copy `x` with `t(x)` also a copy shares a colour with `t(x)`. Copies
/// are coloured by the parity of their distance to the end of their
/// `t`-path, shifted so that `tⁿ(b)` gets `n mod 2`. Copies whose path runs
/// into a cycle get 0.
pub fn term_iteration_coloring(m: &Structure, b: &[usize], t: &[Term]) -> Result<TermColoring, TermError> {
    if t.len() != b.len() {
        return Err(TermError::Arity {
            expected: b.len(),
            found: t.len(),
        });
    }
    if !is_injective(b) {
        return Err(TermError::NonInjective(b.to_vec()));
    }
    let tb = eval_tuple(t, m, b).ok_or(TermError::Undefined)?;
    if tb == b {
        return Err(TermError::Fixed);
    }
    if !is_injective(&tb) {
        return Err(TermError::NonInjective(tb));
    }
    let ty = atomic_type(m, b);
    if atomic_type(m, &tb) != ty {
        return Err(TermError::TypeMismatch);
    }
    let mut orbit = vec![b.to_vec()];
    loop {
        let last = orbit.last().expect("nonempty");
        let Some(next) = eval_tuple(t, m, last) else { break };
        if let Some(p) = orbit.iter().position(|x| *x == next) {
            return Err(TermError::PeriodicOrbit(orbit.len() - p));
        }
        if !is_injective(&next) || atomic_type(m, &next) != ty {
            break;
        }
        orbit.push(next);
    }

    let copies = enumerate_atomic_copies(m, b).expect("b is injective");
    let index: HashMap<&[usize], usize> = copies.iter().enumerate().map(|(i, c)| (c.as_slice(), i)).collect();
    let succ: Vec<Option<usize>> = copies
        .iter()
        .map(|c| eval_tuple(t, m, c).and_then(|v| index.get(v.as_slice()).copied()))
        .collect();
    // depth[i] = steps until the path leaves the copies; None on cycles.
    let mut depth: Vec<Option<i64>> = vec![None; copies.len()];
    let mut state = vec![0u8; copies.len()];
    for start in 0..copies.len() {
        if state[start] != 0 {
            continue;
        }
        let mut path = Vec::new();
        let mut cur = Some(start);
        let mut after = loop {
            match cur {
                None => break Some(-1),
                Some(i) if state[i] == 2 => break depth[i],
                Some(i) if state[i] == 1 => break None,
                Some(i) => {
                    state[i] = 1;
                    path.push(i);
                    cur = succ[i];
                }
            }
        };
        while let Some(i) = path.pop() {
            after = after.map(|d| d + 1);
            depth[i] = after;
            state[i] = 2;
        }
    }
    let base = depth[index[b]].expect("the orbit of b is acyclic");
    let colors = depth
        .iter()
        .map(|d| match d {
            Some(d) => (base + d).rem_euclid(2) as usize,
            None => 0,
        })
        .collect();
    let coloring = Coloring::new(copies, colors, 2).expect("two colours");
    Ok(TermColoring { coloring, orbit })
}

/// Pairs `(x, t(x))` of copies with the same colour.
pub fn term_coloring_violations(m: &Structure, t: &[Term], chi: &Coloring) -> Vec<(Vec<usize>, Vec<usize>)> {
    let index: HashMap<&[usize], usize> = chi
        .copies()
        .iter()
        .zip(chi.colors())
        .map(|(c, &k)| (c.as_slice(), k))
        .collect();
    let mut out = Vec::new();
    for (c, &k) in chi.copies().iter().zip(chi.colors()) {
        if let Some(next) = eval_tuple(t, m, c) {
            if index.get(next.as_slice()) == Some(&k) {
                out.push((c.clone(), next));
            }
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct Promotion {
    pub c_prime: Structure,
    /// Decide-mode result for `C → (B′)^A_2`.
    pub premise: ArrowResult,
    /// Refute-mode result for `C′ → (B)^A_2`.
    pub promoted: ArrowResult,
}

/// Given `C → (B′)^A_2` for a subset `B′` generating `B` that carries all
/// copies of `A` found in `B`, returns the closure `C′` of `C` and checks
/// `C′ → (B)^A_2` in refute mode. Copies are read with types taken in `B`.
pub fn promote_arrow_witness(
    c: &Structure,
    b: &Structure,
    b_prime: &[usize],
    a: &[usize],
    cfg: &SearchConfig,
) -> Result<Promotion, ArrowError> {
    if let Some(&x) = a.iter().find(|x| !b_prime.contains(x)) {
        return Err(ArrowError::Precondition(format!("A contains {x}, which is outside B′")));
    }
    let a_type = qftp(b, a);
    let inside = realizations(b, &a_type, Some(b_prime))?;
    let everywhere = realizations(b, &a_type, None)?;
    if inside != everywhere {
        return Err(ArrowError::Precondition(format!(
            "B′ carries {} copies of A but B carries {}",
            inside.len(),
            everywhere.len()
        )));
    }
    if closure(b, b_prime).len() != b.size() {
        return Err(ArrowError::Precondition("B′ does not generate B".into()));
    }
    let premise_system = CopySystem::qf_copies(c, b, b_prime, &[a])?;
    let premise = solve(c, &premise_system, &[2], &[1], Mode::Decide, cfg)?;
    if premise.verdict != Verdict::Holds {
        return Err(ArrowError::Precondition(format!("C → (B′)^A_2 is {}", premise.verdict)));
    }
    let all: Vec<usize> = c.domain().collect();
    let (c_prime, _) = generated_substructure(c, &all);
    let full: Vec<usize> = b.domain().collect();
    let system = CopySystem::qf_copies(&c_prime, b, &full, &[a])?;
    let promoted = solve(&c_prime, &system, &[2], &[1], Mode::Refute, cfg)?;
    Ok(Promotion {
        c_prime,
        premise,
        promoted,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{linear_order, successor_chain};

    fn s() -> Vec<Term> {
        vec![Term::Apply(0, vec![Term::Var(0)])]
    }

    #[test]
    fn chain_parity() {
        let chain = successor_chain(10);
        let tc = term_iteration_coloring(&chain, &[0], &s()).unwrap();
        assert_eq!(tc.orbit.len(), 10);
        assert_eq!(tc.coloring.colors(), &[0, 1, 0, 1, 0, 1, 0, 1, 0, 1]);
        assert!(term_coloring_violations(&chain, &s(), &tc.coloring).is_empty());
        let mid = term_iteration_coloring(&chain, &[3], &s()).unwrap();
        assert_eq!(mid.coloring.color_of(&[3]), Some(0));
        assert_eq!(mid.coloring.color_of(&[2]), Some(1));
        assert!(term_coloring_violations(&chain, &s(), &mid.coloring).is_empty());
    }

    #[test]
    fn precondition_errors() {
        let chain = successor_chain(10);
        assert_eq!(term_iteration_coloring(&chain, &[9], &s()).unwrap_err(), TermError::Undefined);
        assert_eq!(
            term_iteration_coloring(&chain, &[0], &[Term::Var(0)]).unwrap_err(),
            TermError::Fixed
        );
        // (x, s(x)) is an edge of the successor relation; (s(x), s(s(x))) too,
        // but swapping the coordinates breaks it.
        let swap = vec![Term::Apply(0, vec![Term::Var(1)]), Term::Var(0)];
        assert_eq!(term_iteration_coloring(&chain, &[0, 1], &swap).unwrap_err(), TermError::TypeMismatch);
        let mut b = crate::Structure::builder(chain.signature().clone(), 3);
        b.set_value_at(0, vec![0], 1).unwrap();
        b.set_value_at(0, vec![1], 2).unwrap();
        b.set_value_at(0, vec![2], 0).unwrap();
        let cycle = b.build().unwrap();
        assert_eq!(term_iteration_coloring(&cycle, &[0], &s()).unwrap_err(), TermError::PeriodicOrbit(3));
    }

    #[test]
    fn relational_promotion_keeps_c() {
        let c = linear_order(6);
        let b = linear_order(3);
        let p = promote_arrow_witness(&c, &b, &[0, 1, 2], &[0, 1], &SearchConfig::default()).unwrap();
        assert_eq!(p.c_prime, c);
        assert_eq!(p.premise.verdict, Verdict::Holds);
        assert_ne!(p.promoted.verdict, Verdict::Fails);
    }

    #[test]
    fn chain_promotion() {
        let c = successor_chain(8);
        let b = successor_chain(3);
        let p = promote_arrow_witness(&c, &b, &[0, 1, 2], &[0], &SearchConfig::default()).unwrap();
        assert_eq!(p.c_prime, c);
        assert_ne!(p.promoted.verdict, Verdict::Fails);
    }

    #[test]
    fn missing_copies_rejected() {
        let b = linear_order(3);
        let err = promote_arrow_witness(&linear_order(6), &b, &[0, 2], &[0], &SearchConfig::default()).unwrap_err();
        assert!(matches!(err, ArrowError::Precondition(_)));
    }
}
