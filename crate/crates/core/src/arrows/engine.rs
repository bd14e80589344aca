//! Colouring search over hypergraph-like copy systems.
//!
//! Variables are A-copies, split into groups (one group per coloured
//! pattern). Each edge is a B-copy listing, per group, the A-copies it
//! contains. A colouring is *bad* when every edge has more than `cap`
//! distinct colours in some group; the arrow holds exactly when no bad
//! colouring exists.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const UNSET: u8 = u8::MAX;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Group {
    pub copies: usize,
    pub colors: usize,
    pub cap: usize,
}

#[derive(Debug, Clone)]
pub struct Instance {
    pub groups: Vec<Group>,
    /// `edges[e][g]` lists the group-`g` copies inside edge `e`.
    pub edges: Vec<Vec<Vec<u32>>>,
    /// Copy permutations induced by automorphisms; used only with a
    /// single group.
    pub symmetries: Vec<Vec<u32>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProofStep {
    /// Branch on `var` over colours `0..options`; one subproof per colour.
    Branch { var: u32, options: u8 },
    /// The current assignment leaves `edge` unable to become bad.
    Conflict { edge: u32 },
    /// The current assignment is not lexicographically least under
    /// symmetry `index`.
    Symmetry { index: u32 },
    /// Every colour of the unassigned `var` kills the listed edge.
    Wipeout { var: u32, edges: Vec<u32> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Bad,
    Exhausted,
    Budget,
}

#[derive(Debug, Clone)]
pub struct SearchReport {
    pub outcome: Outcome,
    /// Per-group colours when `outcome == Bad`.
    pub coloring: Vec<Vec<usize>>,
    pub nodes: u64,
    /// Proof of exhaustion; `None` if not requested or over the cap.
    pub proof: Option<Vec<ProofStep>>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ReplayError {
    #[error("proof step {0} is malformed or does not apply")]
    BadStep(usize),
    #[error("proof ended early")]
    Truncated,
    #[error("proof has {0} unused trailing steps")]
    Trailing(usize),
    #[error("the instance admits a bad colouring along the proof")]
    Unrefuted,
}

/// Incremental colour counts per (edge, group).
struct State<'a> {
    inst: &'a Instance,
    ng: usize,
    rmax: usize,
    offsets: Vec<usize>,
    var_group: Vec<usize>,
    incidence: Vec<Vec<u32>>,
    color: Vec<u8>,
    counts: Vec<u32>,
    distinct: Vec<u32>,
    unassigned: Vec<u32>,
    over: Vec<u32>,
    refuted: usize,
    max_used: Vec<i32>,
}

impl<'a> State<'a> {
    fn new(inst: &'a Instance) -> Self {
        let ng = inst.groups.len();
        let rmax = inst.groups.iter().map(|g| g.colors).max().unwrap_or(1);
        assert!(rmax < UNSET as usize, "too many colours");
        let mut offsets = Vec::with_capacity(ng + 1);
        let mut total = 0;
        let mut var_group = Vec::new();
        for (g, grp) in inst.groups.iter().enumerate() {
            offsets.push(total);
            total += grp.copies;
            var_group.extend(std::iter::repeat(g).take(grp.copies));
        }
        offsets.push(total);
        let mut incidence = vec![Vec::new(); total];
        let ne = inst.edges.len();
        let mut unassigned = vec![0u32; ne * ng];
        for (e, edge) in inst.edges.iter().enumerate() {
            for (g, members) in edge.iter().enumerate() {
                unassigned[e * ng + g] = members.len() as u32;
                for &c in members {
                    incidence[offsets[g] + c as usize].push(e as u32);
                }
            }
        }
        State {
            inst,
            ng,
            rmax,
            offsets,
            var_group,
            incidence,
            color: vec![UNSET; total],
            counts: vec![0; ne * ng * rmax],
            distinct: vec![0; ne * ng],
            unassigned,
            over: vec![0; ne],
            refuted: 0,
            max_used: vec![-1; ng],
        }
    }

    fn vars(&self) -> usize {
        self.color.len()
    }

    fn assign(&mut self, v: usize, c: u8) {
        let g = self.var_group[v];
        let cap = self.inst.groups[g].cap as u32;
        self.color[v] = c;
        for &e in &self.incidence[v] {
            let e = e as usize;
            let slot = e * self.ng + g;
            let cell = slot * self.rmax + c as usize;
            self.counts[cell] += 1;
            if self.counts[cell] == 1 {
                self.distinct[slot] += 1;
                if self.distinct[slot] == cap + 1 {
                    self.over[e] += 1;
                    if self.over[e] == 1 {
                        self.refuted += 1;
                    }
                }
            }
            self.unassigned[slot] -= 1;
        }
    }

    fn unassign(&mut self, v: usize) {
        let g = self.var_group[v];
        let cap = self.inst.groups[g].cap as u32;
        let c = std::mem::replace(&mut self.color[v], UNSET);
        for &e in &self.incidence[v] {
            let e = e as usize;
            let slot = e * self.ng + g;
            let cell = slot * self.rmax + c as usize;
            self.counts[cell] -= 1;
            if self.counts[cell] == 0 {
                if self.distinct[slot] == cap + 1 {
                    self.over[e] -= 1;
                    if self.over[e] == 0 {
                        self.refuted -= 1;
                    }
                }
                self.distinct[slot] -= 1;
            }
            self.unassigned[slot] += 1;
        }
    }

    /// No completion of the current assignment can make `e` bad.
    fn doomed(&self, e: usize) -> bool {
        if self.over[e] > 0 {
            return false;
        }
        self.inst.groups.iter().enumerate().all(|(g, grp)| {
            let slot = e * self.ng + g;
            let reach = (self.distinct[slot] + self.unassigned[slot]).min(grp.colors as u32);
            reach as usize <= grp.cap
        })
    }

    fn doomed_near(&self, v: usize) -> Option<u32> {
        self.incidence[v].iter().copied().find(|&e| self.doomed(e as usize))
    }

    /// Colours `0..options` worth trying at `v`: unused colours of a group
    /// are interchangeable, so only the first fresh one is tried.
    fn options(&self, v: usize) -> u8 {
        let g = self.var_group[v];
        (self.max_used[g] + 2).min(self.inst.groups[g].colors as i32) as u8
    }

    fn push_color(&mut self, v: usize, c: u8) -> i32 {
        let g = self.var_group[v];
        let prev = self.max_used[g];
        self.max_used[g] = prev.max(c as i32);
        self.assign(v, c);
        prev
    }

    fn pop_color(&mut self, v: usize, prev: i32) {
        let g = self.var_group[v];
        self.unassign(v);
        self.max_used[g] = prev;
    }

    /// The single monochromatic colour of a group-0 edge slot with exactly
    /// one unassigned member, if that is the situation.
    fn pending_mono(&self, e: usize) -> Option<u8> {
        if self.over[e] > 0 || self.unassigned[e] != 1 || self.distinct[e] != 1 {
            return None;
        }
        (0..self.rmax).find(|&c| self.counts[e * self.rmax + c] > 0).map(|c| c as u8)
    }

    fn unassigned_member(&self, e: usize) -> usize {
        self.inst.edges[e][0]
            .iter()
            .map(|&c| c as usize)
            .find(|&c| self.color[c] == UNSET)
            .expect("slot has an unassigned member")
    }

    /// Single group, cap 1: some unassigned variable next to `v` has every
    /// colour blocked by an almost-monochromatic edge.
    fn wipeout_near(&self, v: usize) -> Option<(u32, Vec<u32>)> {
        let r = self.inst.groups[0].colors;
        let mut seen: Vec<usize> = Vec::new();
        for &e in &self.incidence[v] {
            if self.pending_mono(e as usize).is_none() {
                continue;
            }
            let y = self.unassigned_member(e as usize);
            if seen.contains(&y) {
                continue;
            }
            seen.push(y);
            let mut blockers = vec![u32::MAX; r];
            for &f in &self.incidence[y] {
                if let Some(c) = self.pending_mono(f as usize) {
                    if blockers[c as usize] == u32::MAX {
                        blockers[c as usize] = f;
                    }
                }
            }
            if blockers.iter().all(|&b| b != u32::MAX) {
                return Some((y as u32, blockers));
            }
        }
        None
    }

    /// True when the assigned prefix already exceeds its image under
    /// `perm` followed by colour renormalisation.
    fn lex_worse(&self, perm: &[u32]) -> bool {
        let mut relabel = [UNSET; 256];
        let mut next = 0u8;
        for (i, &p) in perm.iter().enumerate() {
            let ci = self.color[i];
            let pi = self.color[p as usize];
            if ci == UNSET || pi == UNSET {
                return false;
            }
            if relabel[pi as usize] == UNSET {
                relabel[pi as usize] = next;
                next += 1;
            }
            let w = relabel[pi as usize];
            if ci != w {
                return ci > w;
            }
        }
        false
    }

    fn symmetry_cut(&self) -> Option<u32> {
        if self.ng != 1 {
            return None;
        }
        self.inst
            .symmetries
            .iter()
            .position(|p| self.lex_worse(p))
            .map(|i| i as u32)
    }

    fn forward_checking(&self) -> bool {
        self.ng == 1 && self.inst.groups[0].cap == 1
    }

    fn split(&self, flat: &[u8]) -> Vec<Vec<usize>> {
        (0..self.ng)
            .map(|g| {
                flat[self.offsets[g]..self.offsets[g + 1]]
                    .iter()
                    .map(|&c| if c == UNSET { 0 } else { c as usize })
                    .collect()
            })
            .collect()
    }
}

const PROOF_CAP: usize = 2_000_000;

struct Searcher<'a> {
    st: State<'a>,
    budget: u64,
    nodes: u64,
    proof: Option<Vec<ProofStep>>,
}

enum Flow {
    Found,
    Exhausted,
    Budget,
}

impl Searcher<'_> {
    fn record(&mut self, step: ProofStep) {
        if let Some(p) = &mut self.proof {
            if p.len() >= PROOF_CAP {
                self.proof = None;
            } else {
                p.push(step);
            }
        }
    }

    fn node(&mut self, k: usize) -> Flow {
        if self.st.refuted == self.st.inst.edges.len() {
            return Flow::Found;
        }
        if k == self.st.vars() {
            // Every variable is set but some edge is not bad; that edge is
            // fully assigned, hence doomed.
            let e = (0..self.st.inst.edges.len())
                .find(|&e| self.st.doomed(e))
                .expect("an unrefuted complete edge is doomed");
            self.record(ProofStep::Conflict { edge: e as u32 });
            return Flow::Exhausted;
        }
        self.nodes += 1;
        if self.nodes > self.budget {
            return Flow::Budget;
        }
        let options = self.st.options(k);
        self.record(ProofStep::Branch {
            var: k as u32,
            options,
        });
        for c in 0..options {
            let prev = self.st.push_color(k, c);
            let flow = if let Some(e) = self.st.doomed_near(k) {
                self.record(ProofStep::Conflict { edge: e });
                Flow::Exhausted
            } else if let Some(i) = self.st.symmetry_cut() {
                self.record(ProofStep::Symmetry { index: i });
                Flow::Exhausted
            } else if let Some((var, edges)) = self.st.forward_checking().then(|| self.st.wipeout_near(k)).flatten() {
                self.record(ProofStep::Wipeout { var, edges });
                Flow::Exhausted
            } else {
                self.node(k + 1)
            };
            match flow {
                Flow::Exhausted => self.st.pop_color(k, prev),
                other => return other,
            }
        }
        Flow::Exhausted
    }
}

/// Complete backtracking search for a bad colouring.
pub fn decide(inst: &Instance, budget: u64, record_proof: bool) -> SearchReport {
    let mut s = Searcher {
        st: State::new(inst),
        budget,
        nodes: 0,
        proof: record_proof.then(Vec::new),
    };
    let root_conflict = (0..inst.edges.len()).find(|&e| s.st.doomed(e));
    let flow = match root_conflict {
        Some(e) => {
            s.record(ProofStep::Conflict { edge: e as u32 });
            Flow::Exhausted
        }
        None => s.node(0),
    };
    match flow {
        Flow::Found => SearchReport {
            outcome: Outcome::Bad,
            coloring: s.st.split(&s.st.color),
            nodes: s.nodes,
            proof: None,
        },
        Flow::Exhausted => SearchReport {
            outcome: Outcome::Exhausted,
            coloring: Vec::new(),
            nodes: s.nodes,
            proof: s.proof,
        },
        Flow::Budget => SearchReport {
            outcome: Outcome::Budget,
            coloring: Vec::new(),
            nodes: s.nodes,
            proof: None,
        },
    }
}

/// Walks an exhaustion proof without searching. Every leaf must be
/// justified and every branch must cover all non-redundant colours.
pub fn replay(inst: &Instance, proof: &[ProofStep]) -> Result<(), ReplayError> {
    let mut st = State::new(inst);
    let mut pos = 0;
    replay_node(&mut st, proof, &mut pos, 0)?;
    if pos != proof.len() {
        return Err(ReplayError::Trailing(proof.len() - pos));
    }
    Ok(())
}

fn replay_node(st: &mut State<'_>, proof: &[ProofStep], pos: &mut usize, k: usize) -> Result<(), ReplayError> {
    let at = *pos;
    let step = proof.get(at).ok_or(ReplayError::Truncated)?;
    *pos += 1;
    let bad = || ReplayError::BadStep(at);
    match step {
        ProofStep::Conflict { edge } => {
            let e = *edge as usize;
            if e < st.inst.edges.len() && st.doomed(e) {
                Ok(())
            } else {
                Err(bad())
            }
        }
        ProofStep::Symmetry { index } => {
            let perm = st.inst.symmetries.get(*index as usize).ok_or_else(bad)?;
            if st.ng == 1 && st.lex_worse(perm) {
                Ok(())
            } else {
                Err(bad())
            }
        }
        ProofStep::Wipeout { var, edges } => {
            let y = *var as usize;
            if !st.forward_checking() || y >= st.vars() || st.color[y] != UNSET || edges.len() != st.inst.groups[0].colors {
                return Err(bad());
            }
            for (c, &e) in edges.iter().enumerate() {
                let e = e as usize;
                if e >= st.inst.edges.len() || !st.inst.edges[e][0].contains(&(y as u32)) {
                    return Err(bad());
                }
                st.assign(y, c as u8);
                let ok = st.doomed(e);
                st.unassign(y);
                if !ok {
                    return Err(bad());
                }
            }
            Ok(())
        }
        ProofStep::Branch { var, options } => {
            if *var as usize != k || k >= st.vars() || *options != st.options(k) {
                return Err(bad());
            }
            if st.refuted == st.inst.edges.len() {
                return Err(ReplayError::Unrefuted);
            }
            for c in 0..*options {
                let prev = st.push_color(k, c);
                if st.refuted == st.inst.edges.len() {
                    return Err(ReplayError::Unrefuted);
                }
                let r = replay_node(st, proof, pos, k + 1);
                st.pop_color(k, prev);
                r?;
            }
            Ok(())
        }
    }
}

/// Index of the first edge that is not bad under `coloring`, if any.
pub fn first_good_edge(inst: &Instance, coloring: &[Vec<usize>]) -> Option<usize> {
    let mut seen: Vec<bool> = Vec::new();
    inst.edges.iter().position(|edge| {
        edge.iter().enumerate().all(|(g, members)| {
            let grp = &inst.groups[g];
            seen.clear();
            seen.resize(grp.colors.max(1), false);
            let mut distinct = 0;
            for &m in members {
                let c = coloring[g][m as usize];
                if !seen[c] {
                    seen[c] = true;
                    distinct += 1;
                }
            }
            distinct <= grp.cap
        })
    })
}

/// Seeded min-conflicts local search for a bad colouring.
pub fn local_search(inst: &Instance, steps: u64, seed: u64) -> (Option<Vec<Vec<usize>>>, u64) {
    let mut st = State::new(inst);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = st.vars();
    if inst.edges.is_empty() {
        return (Some(st.split(&st.color)), 0);
    }
    if n == 0 {
        return (None, 0);
    }
    for v in 0..n {
        let r = inst.groups[st.var_group[v]].colors;
        st.assign(v, rng.gen_range(0..r) as u8);
    }
    let ne = inst.edges.len();
    let mut good: Vec<u32> = (0..ne as u32).filter(|&e| st.over[e as usize] == 0).collect();
    let mut slot: Vec<usize> = vec![usize::MAX; ne];
    for (i, &e) in good.iter().enumerate() {
        slot[e as usize] = i;
    }
    let mut taken = 0;
    while taken < steps {
        if good.is_empty() {
            return (Some(st.split(&st.color)), taken);
        }
        taken += 1;
        let e = good[rng.gen_range(0..good.len())] as usize;
        let candidates: Vec<usize> = inst.edges[e]
            .iter()
            .enumerate()
            .flat_map(|(g, m)| m.iter().map(move |&c| (g, c as usize)))
            .map(|(g, c)| st.offsets[g] + c)
            .collect();
        if candidates.is_empty() {
            return (None, taken);
        }
        let v = candidates[rng.gen_range(0..candidates.len())];
        let r = inst.groups[st.var_group[v]].colors;
        let old = st.color[v];
        let new = if rng.gen_bool(0.2) {
            rng.gen_range(0..r) as u8
        } else {
            let mut best = (usize::MAX, old);
            for c in 0..r as u8 {
                st.unassign(v);
                st.assign(v, c);
                let score = st.incidence[v].iter().filter(|&&f| st.over[f as usize] == 0).count();
                if score < best.0 {
                    best = (score, c);
                }
            }
            st.unassign(v);
            st.assign(v, old);
            best.1
        };
        if new == old {
            continue;
        }
        st.unassign(v);
        st.assign(v, new);
        for &f in &st.incidence[v] {
            let f = f as usize;
            let is_good = st.over[f] == 0;
            let listed = slot[f] != usize::MAX;
            if is_good && !listed {
                slot[f] = good.len();
                good.push(f as u32);
            } else if !is_good && listed {
                let i = slot[f];
                let last = *good.last().expect("listed");
                good.swap_remove(i);
                if i < good.len() {
                    slot[last as usize] = i;
                }
                slot[f] = usize::MAX;
            }
        }
    }
    if good.is_empty() {
        return (Some(st.split(&st.color)), taken);
    }
    (None, taken)
}

/// Uniformly random colouring drawn from stream `stream` of `seed`.
pub fn random_coloring(inst: &Instance, seed: u64, stream: u64) -> Vec<Vec<usize>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    inst.groups
        .iter()
        .map(|g| (0..g.copies).map(|_| rng.gen_range(0..g.colors)).collect())
        .collect()
}

/// DIMACS CNF for a single-group, cap-1 instance: satisfiable exactly when
/// a bad colouring exists. Variable `copy * r + c + 1` means "copy gets c".
pub fn to_cnf(inst: &Instance) -> String {
    use std::fmt::Write;
    assert_eq!(inst.groups.len(), 1, "CNF export covers single colourings");
    let grp = &inst.groups[0];
    assert_eq!(grp.cap, 1, "CNF export covers monochromatic arrows");
    let r = grp.colors;
    let var = |copy: usize, c: usize| copy * r + c + 1;
    let mut clauses: Vec<Vec<i64>> = Vec::new();
    for copy in 0..grp.copies {
        clauses.push((0..r).map(|c| var(copy, c) as i64).collect());
        for c in 0..r {
            for d in c + 1..r {
                clauses.push(vec![-(var(copy, c) as i64), -(var(copy, d) as i64)]);
            }
        }
    }
    for edge in &inst.edges {
        for c in 0..r {
            clauses.push(edge[0].iter().map(|&m| -(var(m as usize, c) as i64)).collect());
        }
    }
    let mut out = String::new();
    writeln!(out, "p cnf {} {}", grp.copies * r, clauses.len()).expect("string write");
    for cl in clauses {
        for lit in cl {
            write!(out, "{lit} ").expect("string write");
        }
        out.push_str("0\n");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Triangle hypergraph on 3 vertices: each pair is an edge.
    fn triangle(r: usize) -> Instance {
        Instance {
            groups: vec![Group {
                copies: 3,
                colors: r,
                cap: 1,
            }],
            edges: vec![vec![vec![0, 1]], vec![vec![0, 2]], vec![vec![1, 2]]],
            symmetries: Vec::new(),
        }
    }

    #[test]
    fn odd_cycle_needs_three_colours() {
        let two = decide(&triangle(2), 1000, true);
        assert_eq!(two.outcome, Outcome::Exhausted);
        replay(&triangle(2), two.proof.as_ref().unwrap()).unwrap();
        let three = decide(&triangle(3), 1000, true);
        assert_eq!(three.outcome, Outcome::Bad);
        assert_eq!(first_good_edge(&triangle(3), &three.coloring), None);
    }

    #[test]
    fn tampered_proof_is_rejected() {
        let inst = triangle(2);
        let mut proof = decide(&inst, 1000, true).proof.unwrap();
        proof.pop();
        assert!(replay(&inst, &proof).is_err());
        assert!(replay(&triangle(3), &decide(&inst, 1000, true).proof.unwrap()).is_err());
    }

    #[test]
    fn local_search_finds_proper_colouring() {
        let (found, _) = local_search(&triangle(3), 1000, 7);
        assert_eq!(first_good_edge(&triangle(3), &found.unwrap()), None);
        assert!(local_search(&triangle(2), 500, 7).0.is_none());
    }

    #[test]
    fn cnf_shape() {
        let cnf = to_cnf(&triangle(2));
        assert!(cnf.starts_with("p cnf 6 "));
        assert_eq!(cnf.lines().count(), 1 + 3 * 2 + 3 * 2);
    }
}
