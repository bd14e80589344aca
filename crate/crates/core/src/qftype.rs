//! Canonical quantifier-free types of tuples.
//!
//! The type of `ā` in `M` is the substructure generated by `ā` with the
//! tuple's positions marked. Every element of that substructure is the
//! value of a term in `ā` and the constants, so labelling the elements in
//! the order those terms are first reached is already isomorphism
//! invariant: two tuples get equal [`QfType`] values exactly when a
//! pointed isomorphism exists between their generated substructures.

use std::fmt;

use crate::structure::{for_each_tuple, is_injective, Signature, Structure, StructureError};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QfType {
    positions: Vec<usize>,
    size: usize,
    constants: Vec<Option<usize>>,
    relations: Vec<Vec<Vec<usize>>>,
    functions: Vec<Vec<(Vec<usize>, usize)>>,
}

impl QfType {
    pub fn arity(&self) -> usize {
        self.positions.len()
    }

    /// Number of elements in the generated substructure.
    pub fn support_size(&self) -> usize {
        self.size
    }

    /// Canonical label of each tuple position.
    pub fn positions(&self) -> &[usize] {
        &self.positions
    }

    pub fn is_injective(&self) -> bool {
        is_injective(&self.positions)
    }

    /// The marked substructure as a structure over `signature`; the tuple
    /// sits at [`QfType::positions`].
    pub fn to_structure(&self, signature: &std::sync::Arc<Signature>) -> Structure {
        let mut b = Structure::builder(signature.clone(), self.size);
        for (r, tuples) in self.relations.iter().enumerate() {
            for t in tuples {
                b.add_tuple_at(r, t.clone()).expect("type tables are in range");
            }
        }
        for (f, entries) in self.functions.iter().enumerate() {
            for (args, v) in entries {
                b.set_value_at(f, args.clone(), *v).expect("type tables are in range");
            }
        }
        for (c, name) in signature.constants().iter().enumerate() {
            let v = self.constants[c].expect("closed types interpret every constant");
            b.set_constant(name, v).expect("type tables are in range");
        }
        b.build().expect("type tables form a structure")
    }

    /// The type of the subtuple at `idx` (positions of this tuple).
    pub fn restrict(&self, signature: &std::sync::Arc<Signature>, idx: &[usize]) -> QfType {
        let pointed = self.to_structure(signature);
        let sub: Vec<usize> = idx.iter().map(|&i| self.positions[i]).collect();
        qftp(&pointed, &sub)
    }

    /// Swaps the two entries of a binary type.
    pub fn transpose(&self, signature: &std::sync::Arc<Signature>) -> QfType {
        assert_eq!(self.arity(), 2, "transpose is defined on binary types");
        self.restrict(signature, &[1, 0])
    }
}

impl fmt::Display for QfType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[usize]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        write!(f, "[{}]/{}", join(&self.positions), self.size)?;
        for (i, c) in self.constants.iter().enumerate() {
            match c {
                Some(v) => write!(f, " c{i}={v}")?,
                None => write!(f, " c{i}=_")?,
            }
        }
        for (r, tuples) in self.relations.iter().enumerate() {
            write!(f, " r{r}:")?;
            for t in tuples {
                write!(f, "({})", join(t))?;
            }
        }
        for (i, entries) in self.functions.iter().enumerate() {
            write!(f, " f{i}:")?;
            for (args, v) in entries {
                write!(f, "({})>{}", join(args), v)?;
            }
        }
        Ok(())
    }
}

/// Reads the induced tables over the labelled elements.
fn tabulate(m: &Structure, labels: &[usize], label_of: &[usize]) -> (Vec<Vec<Vec<usize>>>, Vec<Vec<(Vec<usize>, usize)>>) {
    let sig = m.signature();
    let g = labels.len();
    let to_labels = |t: &[usize]| -> Option<Vec<usize>> {
        t.iter()
            .map(|&x| (label_of[x] != usize::MAX).then_some(label_of[x]))
            .collect()
    };
    let cells = |arity: usize| g.checked_pow(arity as u32).unwrap_or(usize::MAX);
    let mut relations = Vec::with_capacity(sig.relations().len());
    for (r, sym) in sig.relations().iter().enumerate() {
        let mut tuples = Vec::new();
        if m.relation_len(r) < cells(sym.arity) {
            for t in m.relation_tuples(r) {
                if let Some(l) = to_labels(t) {
                    tuples.push(l);
                }
            }
        } else {
            for_each_tuple(g, sym.arity, |lt| {
                let orig: Vec<usize> = lt.iter().map(|&i| labels[i]).collect();
                if m.holds(r, &orig) {
                    tuples.push(lt.to_vec());
                }
            });
        }
        tuples.sort_unstable();
        relations.push(tuples);
    }
    let mut functions = Vec::with_capacity(sig.functions().len());
    for (f, sym) in sig.functions().iter().enumerate() {
        let mut entries = Vec::new();
        if m.function_len(f) < cells(sym.arity) {
            for (args, v) in m.function_entries(f) {
                if let (Some(l), true) = (to_labels(args), label_of[v] != usize::MAX) {
                    entries.push((l, label_of[v]));
                }
            }
        } else {
            for_each_tuple(g, sym.arity, |lt| {
                let orig: Vec<usize> = lt.iter().map(|&i| labels[i]).collect();
                if let Some(v) = m.apply(f, &orig) {
                    if label_of[v] != usize::MAX {
                        entries.push((lt.to_vec(), label_of[v]));
                    }
                }
            });
        }
        entries.sort_unstable();
        functions.push(entries);
    }
    (relations, functions)
}

/// The quantifier-free type of `tuple` in `m`.
pub fn qftp(m: &Structure, tuple: &[usize]) -> QfType {
    let mut label_of = vec![usize::MAX; m.size()];
    let mut labels = Vec::new();
    let push = |x: usize, labels: &mut Vec<usize>, label_of: &mut Vec<usize>| {
        if label_of[x] == usize::MAX {
            label_of[x] = labels.len();
            labels.push(x);
        }
    };
    for &x in tuple {
        push(x, &mut labels, &mut label_of);
    }
    for &c in m.constants() {
        push(c, &mut labels, &mut label_of);
    }
    let sig = m.signature().clone();
    if !sig.functions().is_empty() {
        let mut idx = 0;
        while idx < labels.len() {
            for (f, sym) in sig.functions().iter().enumerate() {
                let mut found = Vec::new();
                for_each_tuple(idx + 1, sym.arity, |lt| {
                    if lt.contains(&idx) {
                        let orig: Vec<usize> = lt.iter().map(|&i| labels[i]).collect();
                        if let Some(v) = m.apply(f, &orig) {
                            found.push(v);
                        }
                    }
                });
                for v in found {
                    push(v, &mut labels, &mut label_of);
                }
            }
            idx += 1;
        }
    }
    let (relations, functions) = tabulate(m, &labels, &label_of);
    QfType {
        positions: tuple.iter().map(|&x| label_of[x]).collect(),
        size: labels.len(),
        constants: m.constants().iter().map(|&c| Some(label_of[c])).collect(),
        relations,
        functions,
    }
}

/// The atomic diagram of `tuple` on its own entries: relations among the
/// entries, function values that stay inside them, and which constants
/// they name. Nothing is closed under functions.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AtomicType(QfType);

impl AtomicType {
    pub fn arity(&self) -> usize {
        self.0.arity()
    }
}

pub fn atomic_type(m: &Structure, tuple: &[usize]) -> AtomicType {
    let mut label_of = vec![usize::MAX; m.size()];
    let mut labels = Vec::new();
    for &x in tuple {
        if label_of[x] == usize::MAX {
            label_of[x] = labels.len();
            labels.push(x);
        }
    }
    let (relations, functions) = tabulate(m, &labels, &label_of);
    AtomicType(QfType {
        positions: tuple.iter().map(|&x| label_of[x]).collect(),
        size: labels.len(),
        constants: m
            .constants()
            .iter()
            .map(|&c| (label_of[c] != usize::MAX).then_some(label_of[c]))
            .collect(),
        relations,
        functions,
    })
}

/// All injective tuples over `m` (optionally with entries restricted to
/// `within`) whose type is `ty`, lexicographically ordered.
pub fn realizations(
    m: &Structure,
    ty: &QfType,
    within: Option<&[usize]>,
) -> Result<Vec<Vec<usize>>, StructureError> {
    if !ty.is_injective() {
        return Err(StructureError::NonInjectiveTuple(ty.positions.clone()));
    }
    let len = ty.arity();
    let sig = m.signature();
    let prefix_types: Vec<QfType> = (1..=len)
        .map(|k| ty.restrict(sig, &(0..k).collect::<Vec<_>>()))
        .collect();
    let mut allowed = vec![within.is_none(); m.size()];
    if let Some(w) = within {
        for &x in w {
            allowed[x] = true;
        }
    }
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(len);
    let mut used = vec![false; m.size()];

    fn rec(
        m: &Structure,
        prefix_types: &[QfType],
        allowed: &[bool],
        cur: &mut Vec<usize>,
        used: &mut [bool],
        out: &mut Vec<Vec<usize>>,
    ) {
        let k = cur.len();
        if k == prefix_types.len() {
            out.push(cur.clone());
            return;
        }
        for x in 0..m.size() {
            if used[x] || !allowed[x] {
                continue;
            }
            cur.push(x);
            if qftp(m, cur) == prefix_types[k] {
                used[x] = true;
                rec(m, prefix_types, allowed, cur, used, out);
                used[x] = false;
            }
            cur.pop();
        }
    }

    rec(m, &prefix_types, &allowed, &mut cur, &mut used, &mut out);
    Ok(out)
}

/// Every injective tuple of `m` with the same type as `tuple` (including
/// `tuple` itself).
pub fn enumerate_qf_copies(m: &Structure, tuple: &[usize]) -> Result<Vec<Vec<usize>>, StructureError> {
    if !is_injective(tuple) {
        return Err(StructureError::NonInjectiveTuple(tuple.to_vec()));
    }
    realizations(m, &qftp(m, tuple), None)
}

/// Every injective tuple with the same atomic diagram as `tuple`.
pub fn enumerate_atomic_copies(m: &Structure, tuple: &[usize]) -> Result<Vec<Vec<usize>>, StructureError> {
    if !is_injective(tuple) {
        return Err(StructureError::NonInjectiveTuple(tuple.to_vec()));
    }
    let target = atomic_type(m, tuple);
    let mut out = Vec::new();
    crate::structure::for_each_injective_tuple(m.size(), tuple.len(), |t| {
        if atomic_type(m, t) == target {
            out.push(t.to_vec());
        }
    });
    Ok(out)
}
