//! Finite classes of structures and their Fraïssé and Ramsey properties.
//!
//! Classes here are explicit corpora. Every verdict is a claim about the
//! corpus and the bounds recorded in its report.

mod order;
mod properties;

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::canon::canonical_form;
use crate::families;
use crate::qftype::{qftp, realizations};
use crate::structure::{is_injective, Signature, Structure, StructureError};

pub use order::{
    orderability_encoding, orderability_search, orderability_search_with, verify_orderability, Clause, ClauseKind,
    Encoding, OrderCertificate, OrderStep, OrderVerdict, OrderabilityResult, DEFAULT_ORDER_BUDGET,
};
pub use properties::{
    ap_check, erp_check, f_erp_check, hp_check, jep_check, rigidity_scan, ClassVerdict, PairBound, Property,
    PropertyReport, ReportEntry, Witness,
};

#[derive(Debug, Error)]
pub enum ClassError {
    #[error("member {index} has signature `{found}`, class has `{expected}`")]
    SignatureMismatch {
        index: usize,
        expected: String,
        found: String,
    },
    #[error("member {index} has {size} elements, above the class bound {bound}")]
    MemberTooLarge { index: usize, size: usize, bound: usize },
    #[error(transparent)]
    Structure(#[from] StructureError),
    #[error(transparent)]
    Arrow(#[from] crate::arrows::ArrowError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Generator {
    LinearOrders,
    PureSets,
    Graphs,
    OrderedGraphs,
    FromFile,
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Generator::LinearOrders => "linear-orders",
            Generator::PureSets => "pure-sets",
            Generator::Graphs => "graphs",
            Generator::OrderedGraphs => "ordered-graphs",
            Generator::FromFile => "from-file",
        })
    }
}

impl std::str::FromStr for Generator {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "linear-orders" => Ok(Generator::LinearOrders),
            "pure-sets" => Ok(Generator::PureSets),
            "graphs" => Ok(Generator::Graphs),
            "ordered-graphs" => Ok(Generator::OrderedGraphs),
            "from-file" => Ok(Generator::FromFile),
            other => Err(format!("unknown generator `{other}`")),
        }
    }
}

/// Members up to isomorphism, stored as canonical forms and ordered by
/// size, then by first appearance.
#[derive(Debug, Clone)]
pub struct FiniteClass {
    signature: Arc<Signature>,
    members: Vec<Structure>,
    bound: usize,
    generator: Generator,
    keys: HashMap<String, usize>,
}

fn key(s: &Structure) -> String {
    s.to_string()
}

impl FiniteClass {
    /// Deduplicates `structures` up to isomorphism. Without an explicit
    /// bound the largest member size is used.
    pub fn new(signature: Arc<Signature>, structures: Vec<Structure>, bound: Option<usize>) -> Result<Self, ClassError> {
        let bound_value = bound.unwrap_or_else(|| structures.iter().map(Structure::size).max().unwrap_or(0));
        for (index, s) in structures.iter().enumerate() {
            if !s.signature().same_symbols(&signature) {
                return Err(ClassError::SignatureMismatch {
                    index,
                    expected: signature.name().to_string(),
                    found: s.signature().name().to_string(),
                });
            }
            if s.size() > bound_value {
                return Err(ClassError::MemberTooLarge {
                    index,
                    size: s.size(),
                    bound: bound_value,
                });
            }
        }
        let mut canon: Vec<Structure> = Vec::new();
        let mut seen = std::collections::HashSet::new();
        for s in &structures {
            let c = canonical_form(&s.with_signature(signature.clone())?);
            if seen.insert(key(&c)) {
                canon.push(c);
            }
        }
        canon.sort_by_key(Structure::size);
        let keys = canon.iter().enumerate().map(|(i, c)| (key(c), i)).collect();
        Ok(FiniteClass {
            signature,
            members: canon,
            bound: bound_value,
            generator: Generator::FromFile,
            keys,
        })
    }

    /// A built-in family with every member of size `0..=upto`.
    pub fn generate(generator: Generator, upto: usize) -> Self {
        let (sig, structures): (Arc<Signature>, Vec<Structure>) = match generator {
            Generator::LinearOrders => (families::order_signature(), (0..=upto).map(families::linear_order).collect()),
            Generator::PureSets => (families::set_signature(), (0..=upto).map(families::pure_set).collect()),
            Generator::Graphs | Generator::OrderedGraphs => {
                let ordered = generator == Generator::OrderedGraphs;
                let sig = if ordered {
                    families::ordered_graph_signature()
                } else {
                    families::graph_signature()
                };
                let mut all = Vec::new();
                for n in 0..=upto {
                    let pairs = n * n.saturating_sub(1) / 2;
                    for mask in 0..(1u64 << pairs) {
                        all.push(families::labelled_graph(n, mask, ordered));
                    }
                }
                (sig, all)
            }
            Generator::FromFile => (Arc::new(Signature::empty("empty")), Vec::new()),
        };
        let mut class = FiniteClass::new(sig, structures, Some(upto)).expect("generated members are well formed");
        class.generator = generator;
        class
    }

    pub fn signature(&self) -> &Arc<Signature> {
        &self.signature
    }

    pub fn members(&self) -> &[Structure] {
        &self.members
    }

    pub fn bound(&self) -> usize {
        self.bound
    }

    pub fn generator(&self) -> Generator {
        self.generator
    }

    /// Records where the members came from.
    pub fn set_generator(&mut self, generator: Generator) {
        self.generator = generator;
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Index of the member isomorphic to `s`.
    pub fn find(&self, s: &Structure) -> Option<usize> {
        if !s.signature().same_symbols(&self.signature) {
            return None;
        }
        let c = canonical_form(&s.with_signature(self.signature.clone()).ok()?);
        self.keys.get(&key(&c)).copied()
    }
}

/// Least `B′ ⊆ B` such that the copies of `ā` inside `B′` (types read in
/// `B`) are all copies of `ā` in `B`: the union of their supports.
pub fn elf_minimize(b: &Structure, a: &[usize]) -> Result<Vec<usize>, StructureError> {
    if let Some(&x) = a.iter().find(|&&x| x >= b.size()) {
        return Err(StructureError::ElementOutOfRange { element: x, size: b.size() });
    }
    if !is_injective(a) {
        return Err(StructureError::NonInjectiveTuple(a.to_vec()));
    }
    let copies = realizations(b, &qftp(b, a), None)?;
    let mut support: Vec<usize> = copies.into_iter().flatten().collect();
    support.sort_unstable();
    support.dedup();
    Ok(support)
}
