//! Finite first-order structures over the domain `{0..n-1}`.
//!
//! Relations are stored as sorted tuple sets; function symbols carry
//! *partial* tables so that finite fragments of finitely generated
//! infinite structures (successor chains and the like) can be written down.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// Dense lookup tables are built when `n^arity` stays below this many cells.
const DENSE_LIMIT: usize = 1 << 18;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StructureError {
    #[error("symbol `{0}` is declared more than once")]
    DuplicateSymbol(String),
    #[error("symbol `{0}` must have arity at least 1")]
    ZeroArity(String),
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("symbol `{symbol}` has arity {expected}, got a tuple of length {found}")]
    ArityMismatch {
        symbol: String,
        expected: usize,
        found: usize,
    },
    #[error("element {element} is outside the domain of size {size}")]
    ElementOutOfRange { element: usize, size: usize },
    #[error("function `{symbol}` is given two values at {args:?}")]
    ConflictingFunctionValue { symbol: String, args: Vec<usize> },
    #[error("constant `{0}` has no interpretation")]
    MissingConstant(String),
    #[error("signatures differ: `{0}` vs `{1}`")]
    SignatureMismatch(String, String),
    #[error("domains differ in size: {0} vs {1}")]
    DomainMismatch(usize, usize),
    #[error("tuple {0:?} repeats an element")]
    NonInjectiveTuple(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Symbol {
    pub name: String,
    pub arity: usize,
}

/// A finite first-order language.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Signature {
    name: String,
    relations: Vec<Symbol>,
    functions: Vec<Symbol>,
    constants: Vec<String>,
}

impl Signature {
    pub fn new(
        name: impl Into<String>,
        relations: Vec<(String, usize)>,
        functions: Vec<(String, usize)>,
        constants: Vec<String>,
    ) -> Result<Self, StructureError> {
        let mut seen = BTreeSet::new();
        let mut check = |n: &str| {
            if seen.insert(n.to_string()) {
                Ok(())
            } else {
                Err(StructureError::DuplicateSymbol(n.to_string()))
            }
        };
        for (n, a) in relations.iter().chain(functions.iter()) {
            check(n)?;
            if *a == 0 {
                return Err(StructureError::ZeroArity(n.clone()));
            }
        }
        for c in &constants {
            check(c)?;
        }
        Ok(Signature {
            name: name.into(),
            relations: relations
                .into_iter()
                .map(|(name, arity)| Symbol { name, arity })
                .collect(),
            functions: functions
                .into_iter()
                .map(|(name, arity)| Symbol { name, arity })
                .collect(),
            constants,
        })
    }

    /// A purely relational signature.
    pub fn relational(name: impl Into<String>, relations: &[(&str, usize)]) -> Self {
        Signature::new(
            name,
            relations.iter().map(|(n, a)| (n.to_string(), *a)).collect(),
            Vec::new(),
            Vec::new(),
        )
        .expect("relational signature literal is well formed")
    }

    pub fn empty(name: impl Into<String>) -> Self {
        Signature::relational(name, &[])
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn relations(&self) -> &[Symbol] {
        &self.relations
    }

    pub fn functions(&self) -> &[Symbol] {
        &self.functions
    }

    pub fn constants(&self) -> &[String] {
        &self.constants
    }

    pub fn is_relational(&self) -> bool {
        self.functions.is_empty() && self.constants.is_empty()
    }

    pub fn relation_index(&self, name: &str) -> Option<usize> {
        self.relations.iter().position(|s| s.name == name)
    }

    pub fn function_index(&self, name: &str) -> Option<usize> {
        self.functions.iter().position(|s| s.name == name)
    }

    pub fn constant_index(&self, name: &str) -> Option<usize> {
        self.constants.iter().position(|s| s == name)
    }

    /// Same symbols with the same arities, ignoring the signature's own name.
    pub fn same_symbols(&self, other: &Signature) -> bool {
        self.relations == other.relations
            && self.functions == other.functions
            && self.constants == other.constants
    }
}

/// Mixed-radix index of a tuple over a domain of size `n`.
fn tuple_index(n: usize, t: &[usize]) -> usize {
    t.iter().fold(0, |acc, &x| acc * n + x)
}

fn dense_cells(n: usize, arity: usize) -> Option<usize> {
    let mut cells = 1usize;
    for _ in 0..arity {
        cells = cells.checked_mul(n.max(1))?;
        if cells > DENSE_LIMIT {
            return None;
        }
    }
    Some(cells)
}

#[derive(Debug, Clone)]
struct RelationTable {
    tuples: BTreeSet<Vec<usize>>,
    dense: Option<Vec<bool>>,
}

impl RelationTable {
    fn new(n: usize, arity: usize, tuples: BTreeSet<Vec<usize>>) -> Self {
        let dense = dense_cells(n, arity).map(|cells| {
            let mut bits = vec![false; cells];
            for t in &tuples {
                bits[tuple_index(n, t)] = true;
            }
            bits
        });
        RelationTable { tuples, dense }
    }
}

#[derive(Debug, Clone)]
struct FunctionTable {
    entries: BTreeMap<Vec<usize>, usize>,
    dense: Option<Vec<u32>>,
}

const UNDEFINED: u32 = u32::MAX;

impl FunctionTable {
    fn new(n: usize, arity: usize, entries: BTreeMap<Vec<usize>, usize>) -> Self {
        let dense = dense_cells(n, arity).map(|cells| {
            let mut vals = vec![UNDEFINED; cells];
            for (args, &v) in &entries {
                vals[tuple_index(n, args)] = v as u32;
            }
            vals
        });
        FunctionTable { entries, dense }
    }
}

/// An immutable finite structure.
#[derive(Debug, Clone)]
pub struct Structure {
    signature: Arc<Signature>,
    size: usize,
    relations: Vec<RelationTable>,
    functions: Vec<FunctionTable>,
    constants: Vec<usize>,
}

impl PartialEq for Structure {
    fn eq(&self, other: &Self) -> bool {
        self.size == other.size
            && self.signature.same_symbols(&other.signature)
            && self.constants == other.constants
            && self
                .relations
                .iter()
                .zip(&other.relations)
                .all(|(a, b)| a.tuples == b.tuples)
            && self
                .functions
                .iter()
                .zip(&other.functions)
                .all(|(a, b)| a.entries == b.entries)
    }
}

impl Eq for Structure {}

impl Structure {
    pub fn builder(signature: Arc<Signature>, size: usize) -> StructureBuilder {
        StructureBuilder {
            relations: vec![BTreeSet::new(); signature.relations.len()],
            functions: vec![BTreeMap::new(); signature.functions.len()],
            constants: vec![None; signature.constants.len()],
            signature,
            size,
        }
    }

    pub fn signature(&self) -> &Arc<Signature> {
        &self.signature
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn domain(&self) -> std::ops::Range<usize> {
        0..self.size
    }

    pub fn holds(&self, rel: usize, tuple: &[usize]) -> bool {
        let table = &self.relations[rel];
        match &table.dense {
            Some(bits) => bits[tuple_index(self.size, tuple)],
            None => table.tuples.contains(tuple),
        }
    }

    pub fn apply(&self, fun: usize, args: &[usize]) -> Option<usize> {
        let table = &self.functions[fun];
        match &table.dense {
            Some(vals) => {
                let v = vals[tuple_index(self.size, args)];
                (v != UNDEFINED).then_some(v as usize)
            }
            None => table.entries.get(args).copied(),
        }
    }

    pub fn constant(&self, c: usize) -> usize {
        self.constants[c]
    }

    pub fn constants(&self) -> &[usize] {
        &self.constants
    }

    pub fn relation_tuples(&self, rel: usize) -> impl Iterator<Item = &Vec<usize>> {
        self.relations[rel].tuples.iter()
    }

    pub fn relation_len(&self, rel: usize) -> usize {
        self.relations[rel].tuples.len()
    }

    pub fn function_entries(&self, fun: usize) -> impl Iterator<Item = (&Vec<usize>, usize)> {
        self.functions[fun].entries.iter().map(|(k, v)| (k, *v))
    }

    pub fn function_len(&self, fun: usize) -> usize {
        self.functions[fun].entries.len()
    }

    /// Substructure induced on `elements` (listed in the order that becomes
    /// the new numbering). The set must contain every constant; function
    /// entries whose value leaves the set are dropped.
    pub fn induced(&self, elements: &[usize]) -> Structure {
        let mut relabel = vec![usize::MAX; self.size];
        for (i, &e) in elements.iter().enumerate() {
            relabel[e] = i;
        }
        let map_tuple = |t: &[usize]| -> Option<Vec<usize>> {
            t.iter()
                .map(|&x| (relabel[x] != usize::MAX).then_some(relabel[x]))
                .collect()
        };
        let mut b = Structure::builder(self.signature.clone(), elements.len());
        for (r, table) in self.relations.iter().enumerate() {
            for t in &table.tuples {
                if let Some(m) = map_tuple(t) {
                    b.relations[r].insert(m);
                }
            }
        }
        for (f, table) in self.functions.iter().enumerate() {
            for (args, &v) in &table.entries {
                if let (Some(m), true) = (map_tuple(args), relabel[v] != usize::MAX) {
                    b.functions[f].insert(m, relabel[v]);
                }
            }
        }
        for (c, &v) in self.constants.iter().enumerate() {
            assert!(relabel[v] != usize::MAX, "induced set must contain constants");
            b.constants[c] = Some(relabel[v]);
        }
        b.build().expect("induced substructure is well formed")
    }

    /// The structure with element `i` renamed to `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Structure {
        let mut b = Structure::builder(self.signature.clone(), self.size);
        for (r, table) in self.relations.iter().enumerate() {
            for t in &table.tuples {
                b.relations[r].insert(t.iter().map(|&x| perm[x]).collect());
            }
        }
        for (f, table) in self.functions.iter().enumerate() {
            for (args, &v) in &table.entries {
                b.functions[f].insert(args.iter().map(|&x| perm[x]).collect(), perm[v]);
            }
        }
        for (c, &v) in self.constants.iter().enumerate() {
            b.constants[c] = Some(perm[v]);
        }
        b.build().expect("permutation of a valid structure is valid")
    }

    /// Same tables over a different (but symbol-compatible) signature.
    pub fn with_signature(&self, signature: Arc<Signature>) -> Result<Structure, StructureError> {
        if !signature.same_symbols(&self.signature) {
            return Err(StructureError::SignatureMismatch(
                self.signature.name.clone(),
                signature.name.clone(),
            ));
        }
        let mut s = self.clone();
        s.signature = signature;
        Ok(s)
    }
}

impl fmt::Display for Structure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[{}]", self.signature.name, self.size)?;
        for (r, sym) in self.signature.relations.iter().enumerate() {
            write!(f, " {}={:?}", sym.name, self.relations[r].tuples)?;
        }
        for (i, sym) in self.signature.functions.iter().enumerate() {
            write!(f, " {}={:?}", sym.name, self.functions[i].entries)?;
        }
        for (i, c) in self.signature.constants.iter().enumerate() {
            write!(f, " {}={}", c, self.constants[i])?;
        }
        Ok(())
    }
}

pub struct StructureBuilder {
    signature: Arc<Signature>,
    size: usize,
    relations: Vec<BTreeSet<Vec<usize>>>,
    functions: Vec<BTreeMap<Vec<usize>, usize>>,
    constants: Vec<Option<usize>>,
}

impl StructureBuilder {
    fn check_elements(&self, t: &[usize]) -> Result<(), StructureError> {
        match t.iter().find(|&&x| x >= self.size) {
            Some(&x) => Err(StructureError::ElementOutOfRange {
                element: x,
                size: self.size,
            }),
            None => Ok(()),
        }
    }

    pub fn add_tuple(&mut self, rel: &str, tuple: Vec<usize>) -> Result<&mut Self, StructureError> {
        let r = self
            .signature
            .relation_index(rel)
            .ok_or_else(|| StructureError::UnknownSymbol(rel.to_string()))?;
        self.add_tuple_at(r, tuple)
    }

    pub fn add_tuple_at(&mut self, r: usize, tuple: Vec<usize>) -> Result<&mut Self, StructureError> {
        let sym = &self.signature.relations[r];
        if tuple.len() != sym.arity {
            return Err(StructureError::ArityMismatch {
                symbol: sym.name.clone(),
                expected: sym.arity,
                found: tuple.len(),
            });
        }
        self.check_elements(&tuple)?;
        self.relations[r].insert(tuple);
        Ok(self)
    }

    pub fn set_value(
        &mut self,
        fun: &str,
        args: Vec<usize>,
        value: usize,
    ) -> Result<&mut Self, StructureError> {
        let f = self
            .signature
            .function_index(fun)
            .ok_or_else(|| StructureError::UnknownSymbol(fun.to_string()))?;
        self.set_value_at(f, args, value)
    }

    pub fn set_value_at(
        &mut self,
        f: usize,
        args: Vec<usize>,
        value: usize,
    ) -> Result<&mut Self, StructureError> {
        let sym = &self.signature.functions[f];
        if args.len() != sym.arity {
            return Err(StructureError::ArityMismatch {
                symbol: sym.name.clone(),
                expected: sym.arity,
                found: args.len(),
            });
        }
        self.check_elements(&args)?;
        self.check_elements(&[value])?;
        match self.functions[f].get(&args) {
            Some(&old) if old != value => Err(StructureError::ConflictingFunctionValue {
                symbol: sym.name.clone(),
                args,
            }),
            _ => {
                self.functions[f].insert(args, value);
                Ok(self)
            }
        }
    }

    pub fn set_constant(&mut self, name: &str, value: usize) -> Result<&mut Self, StructureError> {
        let c = self
            .signature
            .constant_index(name)
            .ok_or_else(|| StructureError::UnknownSymbol(name.to_string()))?;
        self.check_elements(&[value])?;
        self.constants[c] = Some(value);
        Ok(self)
    }

    pub fn build(self) -> Result<Structure, StructureError> {
        let n = self.size;
        let constants = self
            .constants
            .iter()
            .enumerate()
            .map(|(i, c)| c.ok_or_else(|| StructureError::MissingConstant(self.signature.constants[i].clone())))
            .collect::<Result<Vec<_>, _>>()?;
        let relations = self
            .relations
            .into_iter()
            .zip(&self.signature.relations)
            .map(|(t, sym)| RelationTable::new(n, sym.arity, t))
            .collect();
        let functions = self
            .functions
            .into_iter()
            .zip(&self.signature.functions)
            .map(|(e, sym)| FunctionTable::new(n, sym.arity, e))
            .collect();
        Ok(Structure {
            signature: self.signature,
            size: n,
            relations,
            functions,
            constants,
        })
    }
}

/// Calls `visit` on every tuple in `{0..n-1}^arity`, lexicographically.
pub fn for_each_tuple(n: usize, arity: usize, mut visit: impl FnMut(&[usize])) {
    if arity == 0 {
        visit(&[]);
        return;
    }
    if n == 0 {
        return;
    }
    let mut t = vec![0usize; arity];
    loop {
        visit(&t);
        let mut i = arity;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            t[i] += 1;
            if t[i] < n {
                break;
            }
            t[i] = 0;
        }
    }
}

/// Calls `visit` on every injective tuple of length `len` over `{0..n-1}`,
/// lexicographically.
pub fn for_each_injective_tuple(n: usize, len: usize, mut visit: impl FnMut(&[usize])) {
    fn rec(n: usize, len: usize, cur: &mut Vec<usize>, used: &mut [bool], visit: &mut dyn FnMut(&[usize])) {
        if cur.len() == len {
            visit(cur);
            return;
        }
        for x in 0..n {
            if !used[x] {
                used[x] = true;
                cur.push(x);
                rec(n, len, cur, used, visit);
                cur.pop();
                used[x] = false;
            }
        }
    }
    let mut used = vec![false; n];
    rec(n, len, &mut Vec::with_capacity(len), &mut used, &mut visit);
}

pub(crate) fn is_injective(t: &[usize]) -> bool {
    let mut seen = BTreeSet::new();
    t.iter().all(|x| seen.insert(*x))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain_sig() -> Arc<Signature> {
        Arc::new(Signature::new("chain", vec![], vec![("s".into(), 1)], vec![]).unwrap())
    }

    #[test]
    fn rejects_out_of_range_tuple() {
        let sig = Arc::new(Signature::relational("lo", &[("lt", 2)]));
        let mut b = Structure::builder(sig, 3);
        let err = b.add_tuple("lt", vec![0, 5]).err().unwrap();
        assert_eq!(err, StructureError::ElementOutOfRange { element: 5, size: 3 });
    }

    #[test]
    fn rejects_doubled_function_value() {
        let mut b = Structure::builder(chain_sig(), 3);
        b.set_value("s", vec![0], 1).unwrap();
        b.set_value("s", vec![0], 1).unwrap();
        assert!(matches!(
            b.set_value("s", vec![0], 2),
            Err(StructureError::ConflictingFunctionValue { .. })
        ));
    }

    #[test]
    fn duplicate_symbols_are_rejected() {
        let err = Signature::new("x", vec![("f".into(), 1)], vec![("f".into(), 1)], vec![]).unwrap_err();
        assert_eq!(err, StructureError::DuplicateSymbol("f".into()));
        assert!(matches!(
            Signature::new("x", vec![("r".into(), 0)], vec![], vec![]),
            Err(StructureError::ZeroArity(_))
        ));
    }

    #[test]
    fn missing_constant_is_an_error() {
        let sig = Arc::new(Signature::new("c", vec![], vec![], vec!["zero".into()]).unwrap());
        assert!(matches!(
            Structure::builder(sig, 2).build(),
            Err(StructureError::MissingConstant(_))
        ));
    }

    #[test]
    fn partial_function_lookup() {
        let mut b = Structure::builder(chain_sig(), 4);
        b.set_value("s", vec![0], 1).unwrap();
        b.set_value("s", vec![1], 2).unwrap();
        let m = b.build().unwrap();
        assert_eq!(m.apply(0, &[0]), Some(1));
        assert_eq!(m.apply(0, &[3]), None);
    }

    #[test]
    fn tuple_enumerators_count() {
        let mut c = 0;
        for_each_tuple(3, 2, |_| c += 1);
        assert_eq!(c, 9);
        let mut c = 0;
        for_each_injective_tuple(4, 2, |_| c += 1);
        assert_eq!(c, 12);
        let mut c = 0;
        for_each_tuple(0, 0, |_| c += 1);
        assert_eq!(c, 1);
    }
}
