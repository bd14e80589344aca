//! Canonical labelling of whole structures by individualisation and
//! refinement, pruned with the automorphisms discovered along the way.

use crate::structure::{Structure, StructureError};

type Incidence = (u8, usize, usize, Vec<usize>);

/// Ranks `keys` and writes the dense ranks into `colors`. Returns the
/// number of distinct keys.
fn rank_into<K: Ord + Clone>(keys: &[K], colors: &mut [usize]) -> usize {
    let mut sorted: Vec<K> = keys.to_vec();
    sorted.sort();
    sorted.dedup();
    for (c, k) in colors.iter_mut().zip(keys) {
        *c = sorted.binary_search(k).expect("key present");
    }
    sorted.len()
}

/// Equitable-style colour refinement driven by atom incidences.
fn refine(m: &Structure, colors: &mut Vec<usize>) {
    let n = m.size();
    let sig = m.signature().clone();
    let mut classes = {
        let mut c = colors.clone();
        c.sort_unstable();
        c.dedup();
        c.len()
    };
    loop {
        let mut inc: Vec<Vec<Incidence>> = vec![Vec::new(); n];
        for r in 0..sig.relations().len() {
            for t in m.relation_tuples(r) {
                let tc: Vec<usize> = t.iter().map(|&x| colors[x]).collect();
                for (p, &x) in t.iter().enumerate() {
                    inc[x].push((0, r, p, tc.clone()));
                }
            }
        }
        for (f, sym) in sig.functions().iter().enumerate() {
            for (args, v) in m.function_entries(f) {
                let mut tc: Vec<usize> = args.iter().map(|&x| colors[x]).collect();
                tc.push(colors[v]);
                for (p, &x) in args.iter().enumerate() {
                    inc[x].push((1, f, p, tc.clone()));
                }
                inc[v].push((1, f, sym.arity, tc));
            }
        }
        for (c, &v) in m.constants().iter().enumerate() {
            inc[v].push((2, c, 0, Vec::new()));
        }
        let keys: Vec<(usize, Vec<Incidence>)> = inc
            .into_iter()
            .enumerate()
            .map(|(v, mut l)| {
                l.sort_unstable();
                (colors[v], l)
            })
            .collect();
        let next = rank_into(&keys, colors);
        if next == classes {
            return;
        }
        classes = next;
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
struct Certificate {
    constants: Vec<usize>,
    relations: Vec<Vec<Vec<usize>>>,
    functions: Vec<Vec<(Vec<usize>, usize)>>,
}

fn certificate(m: &Structure, perm: &[usize]) -> Certificate {
    let sig = m.signature();
    let relations = (0..sig.relations().len())
        .map(|r| {
            let mut ts: Vec<Vec<usize>> = m
                .relation_tuples(r)
                .map(|t| t.iter().map(|&x| perm[x]).collect())
                .collect();
            ts.sort_unstable();
            ts
        })
        .collect();
    let functions = (0..sig.functions().len())
        .map(|f| {
            let mut es: Vec<(Vec<usize>, usize)> = m
                .function_entries(f)
                .map(|(a, v)| (a.iter().map(|&x| perm[x]).collect(), perm[v]))
                .collect();
            es.sort_unstable();
            es
        })
        .collect();
    Certificate {
        constants: m.constants().iter().map(|&c| perm[c]).collect(),
        relations,
        functions,
    }
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }
    fn find(&mut self, x: usize) -> usize {
        let p = self.0[x];
        if p == x {
            return x;
        }
        let r = self.find(p);
        self.0[x] = r;
        r
    }
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

struct Search<'a> {
    m: &'a Structure,
    best: Option<(Certificate, Vec<usize>)>,
    automorphisms: Vec<Vec<usize>>,
}

impl Search<'_> {
    fn leaf(&mut self, perm: Vec<usize>) {
        let cert = certificate(self.m, &perm);
        match &self.best {
            None => self.best = Some((cert, perm)),
            Some((best, best_perm)) => match cert.cmp(best) {
                std::cmp::Ordering::Less => self.best = Some((cert, perm)),
                std::cmp::Ordering::Equal => {
                    let mut inv = vec![0; perm.len()];
                    for (v, &l) in best_perm.iter().enumerate() {
                        inv[l] = v;
                    }
                    let aut: Vec<usize> = perm.iter().map(|&l| inv[l]).collect();
                    if aut.iter().enumerate().any(|(i, &x)| i != x) {
                        self.automorphisms.push(aut);
                    }
                }
                std::cmp::Ordering::Greater => {}
            },
        }
    }

    fn run(&mut self, mut colors: Vec<usize>, prefix: &mut Vec<usize>) {
        refine(self.m, &mut colors);
        let n = colors.len();
        let mut counts = vec![0usize; n];
        for &c in &colors {
            counts[c] += 1;
        }
        let Some(target) = (0..n).find(|&c| counts[c] > 1) else {
            self.leaf(colors);
            return;
        };
        let cell: Vec<usize> = (0..n).filter(|&v| colors[v] == target).collect();
        let mut explored: Vec<usize> = Vec::new();
        for &v in &cell {
            if !explored.is_empty() {
                let mut uf = UnionFind::new(n);
                for aut in &self.automorphisms {
                    if prefix.iter().all(|&p| aut[p] == p) {
                        for (x, &y) in aut.iter().enumerate() {
                            uf.union(x, y);
                        }
                    }
                }
                let rv = uf.find(v);
                if explored.iter().any(|&u| uf.find(u) == rv) {
                    continue;
                }
            }
            let keys: Vec<usize> = (0..n).map(|u| 2 * colors[u] + usize::from(u != v)).collect();
            let mut next = vec![0; n];
            rank_into(&keys, &mut next);
            prefix.push(v);
            self.run(next, prefix);
            prefix.pop();
            explored.push(v);
        }
    }
}

/// Relabelling `perm` (old element -> new element) that produces the
/// canonical form of `m`.
pub fn canonical_labeling(m: &Structure) -> Vec<usize> {
    let mut s = Search {
        m,
        best: None,
        automorphisms: Vec::new(),
    };
    s.run(vec![0; m.size()], &mut Vec::new());
    s.best.map(|(_, p)| p).unwrap_or_default()
}

/// Isomorphism-invariant, idempotent representative of `m`.
pub fn canonical_form(m: &Structure) -> Structure {
    m.permuted(&canonical_labeling(m))
}

pub fn is_isomorphic(a: &Structure, b: &Structure) -> Result<bool, StructureError> {
    if !a.signature().same_symbols(b.signature()) {
        return Err(StructureError::SignatureMismatch(
            a.signature().name().to_string(),
            b.signature().name().to_string(),
        ));
    }
    if a.size() != b.size() {
        return Ok(false);
    }
    Ok(canonical_form(a) == canonical_form(b))
}
