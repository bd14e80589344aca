//! Embeddings, automorphisms and generated substructures.

use std::ops::ControlFlow;

use crate::structure::{for_each_tuple, Structure};

/// An injective domain map `pattern -> host`, stored as the image list.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Embedding(Vec<usize>);

impl Embedding {
    /// Wraps `map` after checking it against the embedding conditions.
    pub fn new(source: &Structure, target: &Structure, map: Vec<usize>) -> Option<Self> {
        is_embedding(source, target, &map).then_some(Embedding(map))
    }

    pub(crate) fn from_map_unchecked(map: Vec<usize>) -> Self {
        Embedding(map)
    }

    pub fn map(&self) -> &[usize] {
        &self.0
    }

    pub fn into_map(self) -> Vec<usize> {
        self.0
    }

    pub fn apply(&self, x: usize) -> usize {
        self.0[x]
    }

    /// `self ∘ inner`: first `inner`, then `self`.
    pub fn compose(&self, inner: &Embedding) -> Embedding {
        Embedding(inner.0.iter().map(|&x| self.0[x]).collect())
    }

    pub fn apply_tuple(&self, t: &[usize]) -> Vec<usize> {
        t.iter().map(|&x| self.0[x]).collect()
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(i, &x)| i == x)
    }
}

/// Atom-by-atom check of the embedding conditions. Independent of the
/// backtracking search: it walks every tuple of the source.
pub fn is_embedding(source: &Structure, target: &Structure, map: &[usize]) -> bool {
    if !source.signature().same_symbols(target.signature()) || map.len() != source.size() {
        return false;
    }
    if map.iter().any(|&x| x >= target.size()) {
        return false;
    }
    let mut seen = vec![false; target.size()];
    for &x in map {
        if std::mem::replace(&mut seen[x], true) {
            return false;
        }
    }
    let sig = source.signature().clone();
    for (r, sym) in sig.relations().iter().enumerate() {
        let mut ok = true;
        for_each_tuple(source.size(), sym.arity, |t| {
            if ok {
                let image: Vec<usize> = t.iter().map(|&x| map[x]).collect();
                ok = source.holds(r, t) == target.holds(r, &image);
            }
        });
        if !ok {
            return false;
        }
    }
    for f in 0..sig.functions().len() {
        for (args, v) in source.function_entries(f) {
            let image: Vec<usize> = args.iter().map(|&x| map[x]).collect();
            if target.apply(f, &image) != Some(map[v]) {
                return false;
            }
        }
    }
    (0..sig.constants().len()).all(|c| map[source.constant(c)] == target.constant(c))
}

/// Precomputed consistency data for the backtracking embedding search.
struct PatternPlan {
    /// For pattern element k: function entries `(f, args)` whose value is k.
    value_at: Vec<Vec<(usize, Vec<usize>)>>,
    fixed: Vec<Option<usize>>,
    feasible: bool,
}

impl PatternPlan {
    fn new(host: &Structure, pattern: &Structure) -> Self {
        let n = pattern.size();
        let mut value_at = vec![Vec::new(); n];
        for f in 0..pattern.signature().functions().len() {
            for (args, v) in pattern.function_entries(f) {
                value_at[v].push((f, args.clone()));
            }
        }
        let mut fixed = vec![None; n];
        let mut feasible = true;
        for c in 0..pattern.signature().constants().len() {
            let p = pattern.constant(c);
            let h = host.constant(c);
            match fixed[p] {
                Some(old) if old != h => feasible = false,
                _ => fixed[p] = Some(h),
            }
        }
        PatternPlan {
            value_at,
            fixed,
            feasible,
        }
    }
}

/// Calls `visit` on every tuple in `{0..=k}^arity` that mentions `k`.
fn for_each_tuple_with(k: usize, arity: usize, mut visit: impl FnMut(&[usize]) -> bool) -> bool {
    let mut ok = true;
    for_each_tuple(k + 1, arity, |t| {
        if ok && t.contains(&k) {
            ok = visit(t);
        }
    });
    ok
}

fn consistent_step(host: &Structure, pattern: &Structure, plan: &PatternPlan, map: &[usize]) -> bool {
    let k = map.len() - 1;
    let sig = pattern.signature();
    for (r, sym) in sig.relations().iter().enumerate() {
        let ok = for_each_tuple_with(k, sym.arity, |t| {
            let image: Vec<usize> = t.iter().map(|&x| map[x]).collect();
            pattern.holds(r, t) == host.holds(r, &image)
        });
        if !ok {
            return false;
        }
    }
    for (f, sym) in sig.functions().iter().enumerate() {
        let ok = for_each_tuple_with(k, sym.arity, |t| match pattern.apply(f, t) {
            None => true,
            Some(v) => {
                let image: Vec<usize> = t.iter().map(|&x| map[x]).collect();
                match host.apply(f, &image) {
                    None => false,
                    Some(hv) => v > k || hv == map[v],
                }
            }
        });
        if !ok {
            return false;
        }
    }
    plan.value_at[k].iter().all(|(f, args)| {
        if args.iter().any(|&a| a > k) {
            return true;
        }
        let image: Vec<usize> = args.iter().map(|&x| map[x]).collect();
        host.apply(*f, &image) == Some(map[k])
    })
}

/// Backtracking search over embeddings of `pattern` into `host`, in
/// lexicographic order of the image list.
///
/// `fixed[i] = Some(h)` pins pattern element `i` to `h`. `accept_partial`
/// sees each consistent partial map and may cut the branch by returning
/// `false`. `visit` receives complete maps and may stop the search.
pub fn search_embeddings(
    host: &Structure,
    pattern: &Structure,
    fixed: &[Option<usize>],
    mut accept_partial: impl FnMut(&[usize]) -> bool,
    mut visit: impl FnMut(&[usize]) -> ControlFlow<()>,
) -> ControlFlow<()> {
    if !host.signature().same_symbols(pattern.signature()) || pattern.size() > host.size() {
        return ControlFlow::Continue(());
    }
    let mut plan = PatternPlan::new(host, pattern);
    if !plan.feasible {
        return ControlFlow::Continue(());
    }
    for (i, f) in fixed.iter().enumerate() {
        if let Some(h) = f {
            match plan.fixed[i] {
                Some(old) if old != *h => return ControlFlow::Continue(()),
                _ => plan.fixed[i] = Some(*h),
            }
        }
    }
    let mut map = Vec::with_capacity(pattern.size());
    let mut used = vec![false; host.size()];

    #[allow(clippy::too_many_arguments)]
    fn rec(
        host: &Structure,
        pattern: &Structure,
        plan: &PatternPlan,
        map: &mut Vec<usize>,
        used: &mut [bool],
        accept: &mut dyn FnMut(&[usize]) -> bool,
        visit: &mut dyn FnMut(&[usize]) -> ControlFlow<()>,
    ) -> ControlFlow<()> {
        let k = map.len();
        if k == pattern.size() {
            return visit(map);
        }
        let candidates: Box<dyn Iterator<Item = usize>> = match plan.fixed[k] {
            Some(h) => Box::new(std::iter::once(h)),
            None => Box::new(0..host.size()),
        };
        for h in candidates {
            if used[h] {
                continue;
            }
            map.push(h);
            if consistent_step(host, pattern, plan, map) && accept(map) {
                used[h] = true;
                let flow = rec(host, pattern, plan, map, used, accept, visit);
                used[h] = false;
                if flow.is_break() {
                    map.pop();
                    return flow;
                }
            }
            map.pop();
        }
        ControlFlow::Continue(())
    }

    rec(host, pattern, &plan, &mut map, &mut used, &mut accept_partial, &mut visit)
}

/// All embeddings of `pattern` into `host`, lexicographically ordered.
pub fn enumerate_embeddings(host: &Structure, pattern: &Structure) -> Vec<Embedding> {
    let mut out = Vec::new();
    let _ = search_embeddings(host, pattern, &[], |_| true, |m| {
        out.push(Embedding(m.to_vec()));
        ControlFlow::Continue(())
    });
    out
}

/// At most `limit` embeddings, lexicographically first.
pub fn first_embeddings(host: &Structure, pattern: &Structure, limit: usize) -> Vec<Embedding> {
    let mut out = Vec::new();
    if limit == 0 {
        return out;
    }
    let _ = search_embeddings(host, pattern, &[], |_| true, |m| {
        out.push(Embedding(m.to_vec()));
        if out.len() >= limit {
            ControlFlow::Break(())
        } else {
            ControlFlow::Continue(())
        }
    });
    out
}

pub fn embeds(host: &Structure, pattern: &Structure) -> bool {
    !first_embeddings(host, pattern, 1).is_empty()
}

/// All automorphisms of a structure, identity first.
#[derive(Debug, Clone)]
pub struct AutomorphismGroup {
    elements: Vec<Embedding>,
}

impl AutomorphismGroup {
    pub fn elements(&self) -> &[Embedding] {
        &self.elements
    }

    pub fn size(&self) -> usize {
        self.elements.len()
    }

    pub fn is_trivial(&self) -> bool {
        self.elements.len() == 1
    }
}

pub fn automorphism_group(a: &Structure) -> AutomorphismGroup {
    AutomorphismGroup {
        elements: enumerate_embeddings(a, a),
    }
}

pub fn is_rigid(a: &Structure) -> bool {
    first_embeddings(a, a, 2).len() == 1
}

/// Closure of `seed ∪ constants` under the defined function values,
/// returned as a sorted element list.
pub fn closure(m: &Structure, seed: &[usize]) -> Vec<usize> {
    let mut inside = vec![false; m.size()];
    let mut order = Vec::new();
    for &x in seed.iter().chain(m.constants()) {
        if !std::mem::replace(&mut inside[x], true) {
            order.push(x);
        }
    }
    let nf = m.signature().functions().len();
    if nf > 0 {
        loop {
            let mut grew = false;
            for f in 0..nf {
                for (args, v) in m.function_entries(f) {
                    if !inside[v] && args.iter().all(|&a| inside[a]) {
                        inside[v] = true;
                        order.push(v);
                        grew = true;
                    }
                }
            }
            if !grew {
                break;
            }
        }
    }
    order.sort_unstable();
    order
}

/// The substructure generated by `seed`, renumbered increasingly, with its
/// inclusion map.
pub fn generated_substructure(m: &Structure, seed: &[usize]) -> (Structure, Embedding) {
    let elements = closure(m, seed);
    (m.induced(&elements), Embedding(elements))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families;

    #[test]
    fn lo5_contains_ten_lo3() {
        let e = enumerate_embeddings(&families::linear_order(5), &families::linear_order(3));
        assert_eq!(e.len(), 10);
        assert!(e.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn linear_orders_are_rigid() {
        for n in 0..6 {
            let lo = families::linear_order(n);
            let e = enumerate_embeddings(&lo, &lo);
            assert_eq!(e.len(), 1);
            assert!(e[0].is_identity());
            assert!(is_rigid(&lo));
        }
    }

    #[test]
    fn triangle_has_six_edge_embeddings() {
        assert_eq!(
            enumerate_embeddings(&families::complete_graph(3), &families::complete_graph(2)).len(),
            6
        );
    }

    #[test]
    fn automorphism_counts() {
        assert_eq!(automorphism_group(&families::linear_order(4)).size(), 1);
        assert_eq!(automorphism_group(&families::pure_set(3)).size(), 6);
        assert_eq!(automorphism_group(&families::path_graph(3)).size(), 2);
        assert!(!is_rigid(&families::path_graph(3)));
    }

    #[test]
    fn chain_closure_from_seven() {
        let chain = families::successor_chain(10);
        let (sub, inc) = generated_substructure(&chain, &[7]);
        assert_eq!(inc.map(), &[7, 8, 9]);
        assert_eq!(sub.size(), 3);
        assert!(is_embedding(&sub, &chain, inc.map()));
    }

    #[test]
    fn relational_closure_is_identity() {
        let g = families::path_graph(5);
        let (sub, inc) = generated_substructure(&g, &[3, 1]);
        assert_eq!(inc.map(), &[1, 3]);
        assert_eq!(sub.size(), 2);
        let (empty, inc) = generated_substructure(&g, &[]);
        assert_eq!(empty.size(), 0);
        assert!(inc.map().is_empty());
    }

    #[test]
    fn chain_embeddings_need_forward_definedness() {
        let chain = families::successor_chain(6);
        let short = families::successor_chain(3);
        // 0->1->2 with s(2) undefined can sit anywhere s is defined twice in a row.
        let e = enumerate_embeddings(&chain, &short);
        let maps: Vec<_> = e.iter().map(|e| e.map().to_vec()).collect();
        assert_eq!(maps, vec![vec![0, 1, 2], vec![1, 2, 3], vec![2, 3, 4], vec![3, 4, 5]]);
    }

    #[test]
    fn fixed_points_restrict_search() {
        let lo = families::linear_order(5);
        let mut n = 0;
        let _ = search_embeddings(
            &lo,
            &families::linear_order(2),
            &[Some(1), None],
            |_| true,
            |_| {
                n += 1;
                ControlFlow::Continue(())
            },
        );
        assert_eq!(n, 3);
    }
}
