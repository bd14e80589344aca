//! Search for a union of binary quantifier-free types that linearly orders
//! every member of a class.
//!
//! One boolean per realized injective binary type says whether the type
//! is in Φ. Every distinct pair `(x, y)` of a member contributes a
//! totality clause `tp(x,y) ∨ tp(y,x)` and an antisymmetry clause
//! `¬tp(x,y) ∨ ¬tp(y,x)`; every triple contributes a transitivity clause.
//! A symmetric type therefore yields the two unit clauses `τ` and `¬τ`.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use crate::expansions::define_by_type_union;
use crate::qftype::{qftp, QfType};

use super::FiniteClass;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OrderVerdict {
    Orderable,
    NotOrderable,
    Inconclusive,
}

impl fmt::Display for OrderVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OrderVerdict::Orderable => "ORDERABLE",
            OrderVerdict::NotOrderable => "NOT-ORDERABLE",
            OrderVerdict::Inconclusive => "INCONCLUSIVE",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ClauseKind {
    Totality,
    Antisymmetry,
    Transitivity,
}

impl fmt::Display for ClauseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ClauseKind::Totality => "totality",
            ClauseKind::Antisymmetry => "antisymmetry",
            ClauseKind::Transitivity => "transitivity",
        })
    }
}

/// A disjunction of literals `(type index, polarity)`, with the member and
/// tuple that produced it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Clause {
    pub kind: ClauseKind,
    pub literals: Vec<(usize, bool)>,
    pub member: usize,
    pub tuple: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrderStep {
    /// Try `type ∈ Φ`, then `type ∉ Φ`.
    Branch { var: usize },
    /// The clause is falsified by the current assignment.
    Conflict { clause: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub enum OrderCertificate {
    /// Φ as indices into the realized types.
    Phi(Vec<usize>),
    /// A closed search tree over every membership assignment.
    Exhaustion { clauses: Vec<Clause>, steps: Vec<OrderStep> },
    None,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrderabilityResult {
    pub verdict: OrderVerdict,
    /// Realized injective binary types, in order of first realization.
    pub types: Vec<QfType>,
    pub certificate: OrderCertificate,
    pub nodes: u64,
}

impl OrderabilityResult {
    /// The types in Φ when the class is orderable.
    pub fn phi(&self) -> Option<Vec<QfType>> {
        match &self.certificate {
            OrderCertificate::Phi(idx) => Some(idx.iter().map(|&i| self.types[i].clone()).collect()),
            _ => None,
        }
    }
}

/// Realized injective binary types, in order of first realization, and the
/// clauses they must satisfy.
#[derive(Debug, Clone, PartialEq)]
pub struct Encoding {
    pub types: Vec<QfType>,
    pub clauses: Vec<Clause>,
}

pub fn orderability_encoding(class: &FiniteClass) -> Encoding {
    let mut types: Vec<QfType> = Vec::new();
    let mut index: HashMap<QfType, usize> = HashMap::new();
    let mut clauses = Vec::new();
    let mut seen: BTreeSet<Vec<(usize, bool)>> = BTreeSet::new();
    let mut push = |kind, mut literals: Vec<(usize, bool)>, member, tuple: Vec<usize>, clauses: &mut Vec<Clause>| {
        literals.sort_unstable();
        literals.dedup();
        // x ∨ ¬x is always satisfied.
        if literals.windows(2).any(|w| w[0].0 == w[1].0) {
            return;
        }
        if seen.insert(literals.clone()) {
            clauses.push(Clause {
                kind,
                literals,
                member,
                tuple,
            });
        }
    };
    for (mi, m) in class.members().iter().enumerate() {
        let n = m.size();
        let mut tp = vec![vec![usize::MAX; n]; n];
        for x in 0..n {
            for y in x + 1..n {
                for (u, v) in [(x, y), (y, x)] {
                    let ty = qftp(m, &[u, v]);
                    let next = types.len();
                    let id = *index.entry(ty.clone()).or_insert(next);
                    if id == next {
                        types.push(ty);
                    }
                    tp[u][v] = id;
                }
            }
        }
        for x in 0..n {
            for y in x + 1..n {
                let (a, b) = (tp[x][y], tp[y][x]);
                push(ClauseKind::Totality, vec![(a, true), (b, true)], mi, vec![x, y], &mut clauses);
                push(ClauseKind::Antisymmetry, vec![(a, false), (b, false)], mi, vec![x, y], &mut clauses);
            }
        }
        for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    if x == y || y == z || x == z {
                        continue;
                    }
                    push(
                        ClauseKind::Transitivity,
                        vec![(tp[x][y], false), (tp[y][z], false), (tp[x][z], true)],
                        mi,
                        vec![x, y, z],
                        &mut clauses,
                    );
                }
            }
        }
    }
    Encoding { types, clauses }
}

fn falsified(clause: &Clause, assignment: &[Option<bool>]) -> bool {
    clause.literals.iter().all(|&(v, pol)| assignment[v] == Some(!pol))
}

enum Search {
    Found,
    Closed,
    Budget,
}

struct Solver<'a> {
    clauses: &'a [Clause],
    watch: Vec<Vec<usize>>,
    assignment: Vec<Option<bool>>,
    steps: Vec<OrderStep>,
    nodes: u64,
    budget: u64,
}

impl Solver<'_> {
    fn conflict(&self, var: usize) -> Option<usize> {
        self.watch[var]
            .iter()
            .copied()
            .find(|&c| falsified(&self.clauses[c], &self.assignment))
    }

    fn run(&mut self, var: usize) -> Search {
        if var == self.assignment.len() {
            return Search::Found;
        }
        if self.nodes >= self.budget {
            return Search::Budget;
        }
        self.nodes += 1;
        self.steps.push(OrderStep::Branch { var });
        for value in [true, false] {
            self.assignment[var] = Some(value);
            if let Some(clause) = self.conflict(var) {
                self.steps.push(OrderStep::Conflict { clause });
                continue;
            }
            match self.run(var + 1) {
                Search::Closed => {}
                other => return other,
            }
        }
        self.assignment[var] = None;
        Search::Closed
    }
}

pub const DEFAULT_ORDER_BUDGET: u64 = 1_000_000;

/// Backtracking over type membership, `∈ Φ` first.
pub fn orderability_search(class: &FiniteClass) -> OrderabilityResult {
    orderability_search_with(class, DEFAULT_ORDER_BUDGET)
}

pub fn orderability_search_with(class: &FiniteClass, budget: u64) -> OrderabilityResult {
    let Encoding { types, clauses } = orderability_encoding(class);
    let mut watch = vec![Vec::new(); types.len()];
    for (i, c) in clauses.iter().enumerate() {
        // A clause can only become falsified when its last variable is set.
        let last = c.literals.iter().map(|&(v, _)| v).max().expect("clauses are nonempty");
        watch[last].push(i);
    }
    let mut solver = Solver {
        clauses: &clauses,
        watch,
        assignment: vec![None; types.len()],
        steps: Vec::new(),
        nodes: 0,
        budget,
    };
    let outcome = solver.run(0);
    let nodes = solver.nodes;
    let (verdict, certificate) = match outcome {
        Search::Found => {
            let phi = (0..types.len()).filter(|&v| solver.assignment[v] == Some(true)).collect();
            (OrderVerdict::Orderable, OrderCertificate::Phi(phi))
        }
        Search::Closed => {
            let steps = std::mem::take(&mut solver.steps);
            (OrderVerdict::NotOrderable, OrderCertificate::Exhaustion { clauses, steps })
        }
        Search::Budget => (OrderVerdict::Inconclusive, OrderCertificate::None),
    };
    OrderabilityResult {
        verdict,
        types,
        certificate,
        nodes,
    }
}

/// Checks a result against the class from scratch: Φ must define a strict
/// linear order on every member, and an exhaustion tree must close using
/// only clauses that the class really produces.
pub fn verify_orderability(class: &FiniteClass, result: &OrderabilityResult) -> Result<(), String> {
    let encoding = orderability_encoding(class);
    if encoding.types != result.types {
        return Err("realized types differ from the class".into());
    }
    match (&result.verdict, &result.certificate) {
        (OrderVerdict::Orderable, OrderCertificate::Phi(_)) => {
            let phi = result.phi().expect("phi certificate");
            for (i, m) in class.members().iter().enumerate() {
                let rel = define_by_type_union(m, &phi).map_err(|e| e.to_string())?;
                let flags = rel.flags();
                if !flags.is_strict_linear_order() {
                    return Err(format!("Φ does not order member {i}: {flags:?}"));
                }
            }
            Ok(())
        }
        (OrderVerdict::NotOrderable, OrderCertificate::Exhaustion { clauses, steps }) => {
            if *clauses != encoding.clauses {
                return Err("certificate clauses differ from the class".into());
            }
            let mut assignment = vec![None; result.types.len()];
            let mut pos = 0;
            replay_tree(clauses, steps, &mut pos, &mut assignment)?;
            if pos != steps.len() {
                return Err(format!("{} trailing steps", steps.len() - pos));
            }
            Ok(())
        }
        (OrderVerdict::Inconclusive, _) => Ok(()),
        (v, _) => Err(format!("verdict {v} does not match its certificate")),
    }
}

/// One closed subtree: a branch on an unassigned variable whose two
/// children each end in a conflict or a closed subtree.
fn replay_tree(
    clauses: &[Clause],
    steps: &[OrderStep],
    pos: &mut usize,
    assignment: &mut [Option<bool>],
) -> Result<(), String> {
    let Some(&OrderStep::Branch { var }) = steps.get(*pos) else {
        return Err(format!("expected a branch at step {}", *pos));
    };
    if var >= assignment.len() || assignment[var].is_some() {
        return Err(format!("step {}: variable {var} is not free", *pos));
    }
    *pos += 1;
    for value in [true, false] {
        assignment[var] = Some(value);
        match steps.get(*pos) {
            Some(&OrderStep::Conflict { clause }) => {
                let c = clauses.get(clause).ok_or_else(|| format!("unknown clause {clause}"))?;
                if !falsified(c, assignment) {
                    return Err(format!("step {}: clause {clause} is not falsified", *pos));
                }
                *pos += 1;
            }
            Some(OrderStep::Branch { .. }) => replay_tree(clauses, steps, pos, assignment)?,
            None => return Err("proof ends early".into()),
        }
    }
    assignment[var] = None;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classes::Generator;
    use crate::families;

    #[test]
    fn linear_orders_are_ordered_by_the_increasing_type() {
        let class = FiniteClass::generate(Generator::LinearOrders, 5);
        let r = orderability_search(&class);
        assert_eq!(r.verdict, OrderVerdict::Orderable);
        let phi = r.phi().unwrap();
        assert_eq!(phi.len(), 1);
        let lo2 = families::linear_order(2);
        assert_eq!(phi[0], qftp(&lo2, &[0, 1]));
        verify_orderability(&class, &r).unwrap();
    }

    #[test]
    fn sets_and_graphs_are_not_orderable() {
        for class in [
            FiniteClass::generate(Generator::PureSets, 4),
            FiniteClass::generate(Generator::Graphs, 3),
        ] {
            let r = orderability_search(&class);
            assert_eq!(r.verdict, OrderVerdict::NotOrderable);
            verify_orderability(&class, &r).unwrap();
        }
    }

    #[test]
    fn ordered_graphs_are_orderable() {
        let class = FiniteClass::generate(Generator::OrderedGraphs, 3);
        let r = orderability_search(&class);
        assert_eq!(r.verdict, OrderVerdict::Orderable);
        verify_orderability(&class, &r).unwrap();
    }

    #[test]
    fn tampered_certificates_fail() {
        let class = FiniteClass::generate(Generator::PureSets, 3);
        let mut r = orderability_search(&class);
        if let OrderCertificate::Exhaustion { steps, .. } = &mut r.certificate {
            steps.pop();
        }
        assert!(verify_orderability(&class, &r).is_err());
        let lo = FiniteClass::generate(Generator::LinearOrders, 3);
        let mut r = orderability_search(&lo);
        r.certificate = OrderCertificate::Phi(vec![]);
        assert!(verify_orderability(&lo, &r).is_err());
    }

    #[test]
    fn budget_exhaustion_is_inconclusive() {
        let class = FiniteClass::generate(Generator::Graphs, 3);
        assert_eq!(orderability_search_with(&class, 0).verdict, OrderVerdict::Inconclusive);
    }
}
