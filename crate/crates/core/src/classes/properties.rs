//! HP, JEP, AP, ERP and f-ERP over a finite corpus.

use std::collections::HashSet;
use std::fmt;
use std::ops::ControlFlow;

use rayon::prelude::*;

use crate::arrows::system::CopySystem;
use crate::arrows::{solve, ArrowResult, Mode, SearchConfig, Verdict};
use crate::embedding::{closure, embeds, enumerate_embeddings, first_embeddings, is_rigid, search_embeddings};
use crate::qftype::{qftp, QfType};
use crate::structure::Structure;

use super::{ClassError, FiniteClass};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Property {
    Hp,
    Jep,
    Ap,
    Erp,
    FErp,
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Property::Hp => "HP",
            Property::Jep => "JEP",
            Property::Ap => "AP",
            Property::Erp => "ERP",
            Property::FErp => "f-ERP",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ClassVerdict {
    Pass,
    Fail,
    Inconclusive,
}

impl fmt::Display for ClassVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ClassVerdict::Pass => "PASS",
            ClassVerdict::Fail => "FAIL",
            ClassVerdict::Inconclusive => "INCONCLUSIVE",
        })
    }
}

/// Size limits on the pattern `A` and the target `B` of an arrow.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairBound {
    pub a: usize,
    pub b: usize,
}

impl PairBound {
    pub fn both(n: usize) -> Self {
        PairBound { a: n, b: n }
    }
}

/// A witness of joint embedding or amalgamation: member index and the two
/// embeddings into it.
pub type Witness = (usize, Vec<usize>, Vec<usize>);

#[derive(Debug, Clone, PartialEq)]
pub enum ReportEntry {
    /// The substructure generated by `subset` of member `member` is not in
    /// the class.
    Substructure { member: usize, subset: Vec<usize> },
    Joint {
        left: usize,
        right: usize,
        witness: Option<Witness>,
    },
    Amalgam {
        a: usize,
        b: usize,
        c: usize,
        e: Vec<usize>,
        f: Vec<usize>,
        witness: Option<Witness>,
    },
    /// Arrow results for candidates tried, in order; `witness` indexes the
    /// first that holds.
    Arrow {
        a: usize,
        b: usize,
        witness: Option<usize>,
        results: Vec<(usize, ArrowResult)>,
    },
    /// Like `Arrow`, with `A ⊆ B` given as tuples of member `member`.
    SubsetArrow {
        member: usize,
        a: Vec<usize>,
        b: Vec<usize>,
        witness: Option<usize>,
        results: Vec<(usize, ArrowResult)>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropertyReport {
    pub property: Property,
    pub verdict: ClassVerdict,
    pub bounds: Vec<(String, usize)>,
    pub checked: usize,
    /// Configurations beyond the class bound, not examined.
    pub skipped: usize,
    pub entries: Vec<ReportEntry>,
}

fn for_each_combination(n: usize, k: usize, mut visit: impl FnMut(&[usize])) {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, visit: &mut dyn FnMut(&[usize])) {
        if cur.len() == k {
            visit(cur);
            return;
        }
        for x in start..n {
            if n - x < k - cur.len() {
                break;
            }
            cur.push(x);
            rec(x + 1, n, k, cur, visit);
            cur.pop();
        }
    }
    rec(0, n, k, &mut Vec::with_capacity(k), &mut visit);
}

/// First substructure (generated, nonempty seed) of some member that is
/// not in the class. Larger seeds are examined first.
fn hp_counterexample(class: &FiniteClass) -> (Option<ReportEntry>, usize) {
    let mut checked = 0;
    for (mi, m) in class.members().iter().enumerate() {
        let mut seen: HashSet<Vec<usize>> = HashSet::new();
        for k in (1..=m.size()).rev() {
            let mut found = None;
            for_each_combination(m.size(), k, |seed| {
                if found.is_some() {
                    return;
                }
                let sub = closure(m, seed);
                if !seen.insert(sub.clone()) {
                    return;
                }
                checked += 1;
                if class.find(&m.induced(&sub)).is_none() {
                    found = Some(sub);
                }
            });
            if let Some(subset) = found {
                return (Some(ReportEntry::Substructure { member: mi, subset }), checked);
            }
        }
    }
    (None, checked)
}

pub fn hp_check(class: &FiniteClass) -> PropertyReport {
    let (counter, checked) = hp_counterexample(class);
    PropertyReport {
        property: Property::Hp,
        verdict: if counter.is_some() {
            ClassVerdict::Fail
        } else {
            ClassVerdict::Pass
        },
        bounds: vec![("bound".into(), class.bound())],
        checked,
        skipped: 0,
        entries: counter.into_iter().collect(),
    }
}

/// A missing witness within the bound is a genuine failure only when the
/// union of the two images would itself be a member: relational classes
/// closed under substructures.
fn absence_is_failure(class: &FiniteClass, union_size: usize) -> bool {
    class.signature().is_relational() && union_size <= class.bound() && hp_counterexample(class).0.is_none()
}

fn joint_witness(class: &FiniteClass, x: &Structure, y: &Structure) -> Option<Witness> {
    class.members().iter().enumerate().find_map(|(k, w)| {
        if w.size() < x.size().max(y.size()) {
            return None;
        }
        let ex = first_embeddings(w, x, 1).pop()?;
        let ey = first_embeddings(w, y, 1).pop()?;
        Some((k, ex.into_map(), ey.into_map()))
    })
}

pub fn jep_check(class: &FiniteClass) -> PropertyReport {
    let n = class.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect();
    let entries: Vec<ReportEntry> = pairs
        .par_iter()
        .map(|&(i, j)| ReportEntry::Joint {
            left: i,
            right: j,
            witness: joint_witness(class, &class.members()[i], &class.members()[j]),
        })
        .collect();
    let mut verdict = ClassVerdict::Pass;
    for e in &entries {
        if let ReportEntry::Joint {
            left,
            right,
            witness: None,
        } = e
        {
            let union = class.members()[*left].size() + class.members()[*right].size();
            if absence_is_failure(class, union) {
                verdict = ClassVerdict::Fail;
                break;
            }
            verdict = ClassVerdict::Inconclusive;
        }
    }
    PropertyReport {
        property: Property::Jep,
        verdict,
        bounds: vec![("bound".into(), class.bound())],
        checked: entries.len(),
        skipped: 0,
        entries,
    }
}

/// `D`, `g : B → D`, `h : C → D` with `g ∘ e = h ∘ f`.
fn amalgam(class: &FiniteClass, b: &Structure, c: &Structure, e: &[usize], f: &[usize]) -> Option<Witness> {
    for (k, d) in class.members().iter().enumerate() {
        if d.size() < b.size().max(c.size()) {
            continue;
        }
        for g in enumerate_embeddings(d, b) {
            let mut fixed = vec![None; c.size()];
            for (&ex, &fx) in e.iter().zip(f) {
                fixed[fx] = Some(g.apply(ex));
            }
            let mut h = None;
            let _ = search_embeddings(d, c, &fixed, |_| true, |m| {
                h = Some(m.to_vec());
                ControlFlow::Break(())
            });
            if let Some(h) = h {
                return Some((k, g.into_map(), h));
            }
        }
    }
    None
}

pub fn ap_check(class: &FiniteClass) -> PropertyReport {
    let members = class.members();
    let mut configs = Vec::new();
    let mut skipped = 0;
    for (ai, a) in members.iter().enumerate() {
        for (bi, b) in members.iter().enumerate() {
            let eb = enumerate_embeddings(b, a);
            if eb.is_empty() {
                continue;
            }
            for (ci, c) in members.iter().enumerate().skip(bi) {
                let fc = enumerate_embeddings(c, a);
                if fc.is_empty() {
                    continue;
                }
                if b.size() + c.size() - a.size() > class.bound() {
                    skipped += eb.len() * fc.len();
                    continue;
                }
                for e in &eb {
                    for f in &fc {
                        if bi == ci && f < e {
                            continue;
                        }
                        configs.push((ai, bi, ci, e.map().to_vec(), f.map().to_vec()));
                    }
                }
            }
        }
    }
    let entries: Vec<ReportEntry> = configs
        .into_par_iter()
        .map(|(a, b, c, e, f)| {
            let witness = amalgam(class, &members[b], &members[c], &e, &f);
            ReportEntry::Amalgam { a, b, c, e, f, witness }
        })
        .collect();
    let mut verdict = ClassVerdict::Pass;
    for entry in &entries {
        if let ReportEntry::Amalgam { a, b, c, witness: None, .. } = entry {
            let union = members[*b].size() + members[*c].size() - members[*a].size();
            if absence_is_failure(class, union) {
                verdict = ClassVerdict::Fail;
                break;
            }
            verdict = ClassVerdict::Inconclusive;
        }
    }
    PropertyReport {
        property: Property::Ap,
        verdict,
        bounds: vec![("bound".into(), class.bound())],
        checked: entries.len(),
        skipped,
        entries,
    }
}

fn pair_status(witness: Option<usize>, results: &[(usize, ArrowResult)]) -> ClassVerdict {
    if witness.is_some() {
        ClassVerdict::Pass
    } else if !results.is_empty() && results.iter().all(|(_, r)| r.verdict == Verdict::Fails) {
        ClassVerdict::Fail
    } else {
        ClassVerdict::Inconclusive
    }
}

fn combine(statuses: impl Iterator<Item = ClassVerdict>) -> ClassVerdict {
    let mut out = ClassVerdict::Pass;
    for s in statuses {
        match s {
            ClassVerdict::Fail => return ClassVerdict::Fail,
            ClassVerdict::Inconclusive => out = ClassVerdict::Inconclusive,
            ClassVerdict::Pass => {}
        }
    }
    out
}

/// Tries candidates in order until one arrow holds.
fn first_arrow<'a>(
    candidates: impl Iterator<Item = (usize, &'a Structure)>,
    mut system_for: impl FnMut(&Structure) -> Result<CopySystem, ClassError>,
    colors: usize,
    cfg: &SearchConfig,
) -> Result<(Option<usize>, Vec<(usize, ArrowResult)>), ClassError> {
    let mut results = Vec::new();
    for (k, c) in candidates {
        let system = system_for(c)?;
        let res = solve(c, &system, &[colors], &[1], Mode::Decide, cfg)?;
        let holds = res.verdict == Verdict::Holds;
        results.push((k, res));
        if holds {
            return Ok((Some(k), results));
        }
    }
    Ok((None, results))
}

/// For every `A ⊆ B` within `pairs`, looks for a member `C` of size at
/// most `witness_bound` with `C → (B)^A_colors` in decide mode.
pub fn erp_check(
    class: &FiniteClass,
    pairs: PairBound,
    witness_bound: usize,
    colors: usize,
    cfg: &SearchConfig,
) -> Result<PropertyReport, ClassError> {
    let members = class.members();
    let mut todo = Vec::new();
    for (ai, a) in members.iter().enumerate() {
        for (bi, b) in members.iter().enumerate() {
            if a.size() <= pairs.a && b.size() <= pairs.b && a.size() <= b.size() && embeds(b, a) {
                todo.push((ai, bi));
            }
        }
    }
    let entries: Vec<ReportEntry> = todo
        .into_par_iter()
        .map(|(ai, bi)| {
            let (a, b) = (&members[ai], &members[bi]);
            let candidates = members
                .iter()
                .enumerate()
                .filter(|(_, c)| c.size() >= b.size() && c.size() <= witness_bound && embeds(c, b));
            let (witness, results) =
                first_arrow(candidates, |c| Ok(CopySystem::embeddings(c, b, &[a])), colors, cfg)?;
            Ok(ReportEntry::Arrow {
                a: ai,
                b: bi,
                witness,
                results,
            })
        })
        .collect::<Result<_, ClassError>>()?;
    let verdict = combine(entries.iter().map(|e| match e {
        ReportEntry::Arrow { witness, results, .. } => pair_status(*witness, results),
        _ => unreachable!("erp entries are arrows"),
    }));
    Ok(PropertyReport {
        property: Property::Erp,
        verdict,
        bounds: vec![
            ("pair_a".into(), pairs.a),
            ("pair_b".into(), pairs.b),
            ("witness".into(), witness_bound),
            ("colors".into(), colors),
        ],
        checked: entries.len(),
        skipped: 0,
        entries,
    })
}

/// The finitary variant: `A ⊆ B` range over subsets of members (as
/// increasing tuples, deduplicated by their types) and copies are read
/// through quantifier-free types.
pub fn f_erp_check(
    class: &FiniteClass,
    pairs: PairBound,
    witness_bound: usize,
    colors: usize,
    cfg: &SearchConfig,
) -> Result<PropertyReport, ClassError> {
    let members = class.members();
    let mut seen: HashSet<(QfType, QfType)> = HashSet::new();
    let mut todo = Vec::new();
    for (mi, m) in members.iter().enumerate() {
        for kb in 0..=pairs.b.min(m.size()) {
            for_each_combination(m.size(), kb, |b| {
                let b_type = qftp(m, b);
                for ka in 0..=pairs.a.min(kb) {
                    for_each_combination(kb, ka, |idx| {
                        let a: Vec<usize> = idx.iter().map(|&i| b[i]).collect();
                        if seen.insert((b_type.clone(), qftp(m, &a))) {
                            todo.push((mi, a, b.to_vec()));
                        }
                    });
                }
            });
        }
    }
    let entries: Vec<ReportEntry> = todo
        .into_par_iter()
        .map(|(mi, a, b)| {
            let host = &members[mi];
            let candidates = members.iter().enumerate().filter(|(_, c)| c.size() <= witness_bound);
            let (witness, results) = first_arrow(
                candidates,
                |c| Ok(CopySystem::qf_copies(c, host, &b, &[&a])?),
                colors,
                cfg,
            )?;
            Ok(ReportEntry::SubsetArrow {
                member: mi,
                a,
                b,
                witness,
                results,
            })
        })
        .collect::<Result<_, ClassError>>()?;
    let verdict = combine(entries.iter().map(|e| match e {
        ReportEntry::SubsetArrow { witness, results, .. } => pair_status(*witness, results),
        _ => unreachable!("f-erp entries are subset arrows"),
    }));
    Ok(PropertyReport {
        property: Property::FErp,
        verdict,
        bounds: vec![
            ("pair_a".into(), pairs.a),
            ("pair_b".into(), pairs.b),
            ("witness".into(), witness_bound),
            ("colors".into(), colors),
        ],
        checked: entries.len(),
        skipped: 0,
        entries,
    })
}

/// Members with a non-trivial automorphism, with their group sizes.
pub fn rigidity_scan(class: &FiniteClass) -> Vec<(usize, usize)> {
    class
        .members()
        .iter()
        .enumerate()
        .filter(|(_, m)| !is_rigid(m))
        .map(|(i, m)| (i, crate::embedding::automorphism_group(m).size()))
        .collect()
}
