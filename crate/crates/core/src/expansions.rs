//! Expansions by quantifier-free type predicates, and binary relations
//! defined as unions of binary types.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::sync::Arc;

use sha2::{Digest, Sha256};

use crate::qftype::{qftp, QfType};
use crate::structure::{for_each_tuple, Signature, Structure, StructureError};

/// One predicate per realized type of arity `1..=k`.
#[derive(Debug, Clone)]
pub struct TypePredicateTable {
    k: usize,
    /// `by_arity[m - 1]` lists `(type, symbol, realizers)` in order of the
    /// first realizing tuple.
    by_arity: Vec<Vec<TypePredicate>>,
}

#[derive(Debug, Clone)]
pub struct TypePredicate {
    pub ty: QfType,
    pub symbol: String,
    pub tuples: Vec<Vec<usize>>,
}

/// Deterministic symbol for a type: arity plus a digest of its canonical
/// rendering.
pub fn type_symbol(ty: &QfType) -> String {
    let digest = Sha256::digest(ty.to_string().as_bytes());
    format!("q{}_{}", ty.arity(), &hex::encode(digest)[..12])
}

impl TypePredicateTable {
    /// Realized types of `m` for every arity up to `k`. Symbol names avoid
    /// `reserved` and each other.
    pub fn build(m: &Structure, k: usize, reserved: &HashSet<String>) -> Self {
        let mut taken = reserved.clone();
        let mut by_arity = Vec::with_capacity(k);
        for arity in 1..=k {
            let mut index: HashMap<QfType, usize> = HashMap::new();
            let mut preds: Vec<TypePredicate> = Vec::new();
            for_each_tuple(m.size(), arity, |t| {
                let ty = qftp(m, t);
                let i = *index.entry(ty.clone()).or_insert_with(|| {
                    let mut symbol = type_symbol(&ty);
                    while taken.contains(&symbol) {
                        symbol.push('_');
                    }
                    taken.insert(symbol.clone());
                    preds.push(TypePredicate {
                        ty,
                        symbol,
                        tuples: Vec::new(),
                    });
                    preds.len() - 1
                });
                preds[i].tuples.push(t.to_vec());
            });
            by_arity.push(preds);
        }
        TypePredicateTable { k, by_arity }
    }

    pub fn arity_bound(&self) -> usize {
        self.k
    }

    pub fn predicates(&self, arity: usize) -> &[TypePredicate] {
        &self.by_arity[arity - 1]
    }

    pub fn iter(&self) -> impl Iterator<Item = &TypePredicate> {
        self.by_arity.iter().flatten()
    }

    pub fn len(&self) -> usize {
        self.by_arity.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn reserved_names(sig: &Signature) -> HashSet<String> {
    sig.relations()
        .iter()
        .chain(sig.functions())
        .map(|s| s.name.clone())
        .chain(sig.constants().iter().cloned())
        .collect()
}

fn expand(m: &Structure, k: usize, keep_original: bool) -> Structure {
    assert!(k >= 1, "arity bound must be at least 1");
    let sig = m.signature();
    let reserved = if keep_original { reserved_names(sig) } else { HashSet::new() };
    let table = TypePredicateTable::build(m, k, &reserved);
    let mut relations: Vec<(String, usize)> = Vec::new();
    let (mut functions, mut constants) = (Vec::new(), Vec::new());
    if keep_original {
        relations.extend(sig.relations().iter().map(|s| (s.name.clone(), s.arity)));
        functions.extend(sig.functions().iter().map(|s| (s.name.clone(), s.arity)));
        constants.extend(sig.constants().iter().cloned());
    }
    let offset = relations.len();
    relations.extend(table.iter().map(|p| (p.symbol.clone(), p.ty.arity())));
    let name = if keep_original {
        format!("{}+qf{k}", sig.name())
    } else {
        format!("{}-iso{k}", sig.name())
    };
    let new_sig = Arc::new(Signature::new(name, relations, functions, constants).expect("generated names are unique"));
    let mut b = Structure::builder(new_sig, m.size());
    if keep_original {
        for r in 0..sig.relations().len() {
            for t in m.relation_tuples(r) {
                b.add_tuple_at(r, t.clone()).expect("in range");
            }
        }
        for f in 0..sig.functions().len() {
            for (args, v) in m.function_entries(f) {
                b.set_value_at(f, args.clone(), v).expect("single valued");
            }
        }
        for (c, name) in sig.constants().iter().enumerate() {
            b.set_constant(name, m.constant(c)).expect("in range");
        }
    }
    for (i, p) in table.iter().enumerate() {
        for t in &p.tuples {
            b.add_tuple_at(offset + i, t.clone()).expect("in range");
        }
    }
    b.build().expect("expansion is well formed")
}

/// `m` expanded by one predicate per realized type of arity at most `k`.
pub fn qf_type_morleyisation(m: &Structure, k: usize) -> Structure {
    expand(m, k, true)
}

/// The purely relational structure carrying only the type predicates of
/// arity at most `k`. Constants and functions are dropped.
pub fn isolator(m: &Structure, k: usize) -> Structure {
    expand(m, k, false)
}

/// Whether `m1` and `m2` split the `m`-tuples (`m <= k`) into the same
/// type classes.
pub fn same_qftp_partition(m1: &Structure, m2: &Structure, k: usize) -> Result<bool, StructureError> {
    if m1.size() != m2.size() {
        return Err(StructureError::DomainMismatch(m1.size(), m2.size()));
    }
    for arity in 1..=k {
        let mut fwd: HashMap<QfType, QfType> = HashMap::new();
        let mut bwd: HashMap<QfType, QfType> = HashMap::new();
        let mut ok = true;
        for_each_tuple(m1.size(), arity, |t| {
            if !ok {
                return;
            }
            let (a, b) = (qftp(m1, t), qftp(m2, t));
            ok = *fwd.entry(a.clone()).or_insert_with(|| b.clone()) == b && *bwd.entry(b).or_insert(a.clone()) == a;
        });
        if !ok {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Order-theoretic flags of a binary relation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RelationFlags {
    pub irreflexive: bool,
    pub antisymmetric: bool,
    pub transitive: bool,
    pub total: bool,
}

impl RelationFlags {
    pub fn is_strict_linear_order(&self) -> bool {
        self.irreflexive && self.antisymmetric && self.transitive && self.total
    }
}

/// `{(a, b) : qftp(a, b) ∈ Φ}` on a structure.
#[derive(Debug, Clone)]
pub struct TypeUnionRelation {
    phi: Vec<QfType>,
    size: usize,
    pairs: BTreeSet<(usize, usize)>,
    flags: RelationFlags,
}

impl TypeUnionRelation {
    pub fn phi(&self) -> &[QfType] {
        &self.phi
    }

    pub fn contains(&self, a: usize, b: usize) -> bool {
        self.pairs.contains(&(a, b))
    }

    pub fn pairs(&self) -> &BTreeSet<(usize, usize)> {
        &self.pairs
    }

    pub fn flags(&self) -> RelationFlags {
        self.flags
    }

    pub fn size(&self) -> usize {
        self.size
    }
}

/// Flags of an arbitrary relation given as a membership test.
pub fn relation_flags(n: usize, rel: impl Fn(usize, usize) -> bool) -> RelationFlags {
    let mut f = RelationFlags {
        irreflexive: true,
        antisymmetric: true,
        transitive: true,
        total: true,
    };
    for a in 0..n {
        if rel(a, a) {
            f.irreflexive = false;
        }
        for b in 0..n {
            if a == b {
                continue;
            }
            let (ab, ba) = (rel(a, b), rel(b, a));
            if ab && ba {
                f.antisymmetric = false;
            }
            if !ab && !ba {
                f.total = false;
            }
            if ab {
                for c in 0..n {
                    if rel(b, c) && !rel(a, c) {
                        f.transitive = false;
                    }
                }
            }
        }
    }
    f
}

pub fn define_by_type_union(m: &Structure, phi: &[QfType]) -> Result<TypeUnionRelation, StructureError> {
    if let Some(bad) = phi.iter().find(|p| p.arity() != 2) {
        return Err(StructureError::ArityMismatch {
            symbol: "Φ".to_string(),
            expected: 2,
            found: bad.arity(),
        });
    }
    let wanted: HashSet<&QfType> = phi.iter().collect();
    let n = m.size();
    let mut pairs = BTreeSet::new();
    for a in 0..n {
        for b in 0..n {
            if wanted.contains(&qftp(m, &[a, b])) {
                pairs.insert((a, b));
            }
        }
    }
    let flags = relation_flags(n, |a, b| pairs.contains(&(a, b)));
    Ok(TypeUnionRelation {
        phi: phi.to_vec(),
        size: n,
        pairs,
        flags,
    })
}
