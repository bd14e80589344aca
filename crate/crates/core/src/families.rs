//! Standard small structures: linear orders, pure sets, graphs, chains.

use std::sync::Arc;

use rand::Rng;

use crate::structure::{Signature, Structure};

pub fn order_signature() -> Arc<Signature> {
    Arc::new(Signature::relational("order", &[("lt", 2)]))
}

pub fn set_signature() -> Arc<Signature> {
    Arc::new(Signature::empty("set"))
}

pub fn graph_signature() -> Arc<Signature> {
    Arc::new(Signature::relational("graph", &[("E", 2)]))
}

pub fn ordered_graph_signature() -> Arc<Signature> {
    Arc::new(Signature::relational("ordered-graph", &[("lt", 2), ("E", 2)]))
}

pub fn chain_signature() -> Arc<Signature> {
    Arc::new(
        Signature::new("chain", Vec::new(), vec![("s".to_string(), 1)], Vec::new())
            .expect("chain signature is well formed"),
    )
}

/// `LO_n`: `lt(i, j)` iff `i < j`.
pub fn linear_order(n: usize) -> Structure {
    let mut b = Structure::builder(order_signature(), n);
    for i in 0..n {
        for j in i + 1..n {
            b.add_tuple_at(0, vec![i, j]).expect("in range");
        }
    }
    b.build().expect("linear order is well formed")
}

pub fn pure_set(n: usize) -> Structure {
    Structure::builder(set_signature(), n)
        .build()
        .expect("pure set is well formed")
}

/// Undirected loopless graph; each edge is stored in both directions.
pub fn graph(n: usize, edges: &[(usize, usize)]) -> Structure {
    let mut b = Structure::builder(graph_signature(), n);
    for &(u, v) in edges {
        assert!(u != v, "graphs are loopless");
        b.add_tuple_at(0, vec![u, v]).expect("edge in range");
        b.add_tuple_at(0, vec![v, u]).expect("edge in range");
    }
    b.build().expect("graph is well formed")
}

pub fn complete_graph(n: usize) -> Structure {
    let edges: Vec<_> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    graph(n, &edges)
}

pub fn empty_graph(n: usize) -> Structure {
    graph(n, &[])
}

pub fn path_graph(n: usize) -> Structure {
    let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
    graph(n, &edges)
}

pub fn cycle_graph(n: usize) -> Structure {
    let mut edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
    if n > 2 {
        edges.push((n - 1, 0));
    }
    graph(n, &edges)
}

/// Linear order `lt` plus an undirected edge relation `E`.
pub fn ordered_graph(n: usize, edges: &[(usize, usize)]) -> Structure {
    let mut b = Structure::builder(ordered_graph_signature(), n);
    for i in 0..n {
        for j in i + 1..n {
            b.add_tuple_at(0, vec![i, j]).expect("in range");
        }
    }
    for &(u, v) in edges {
        assert!(u != v, "graphs are loopless");
        b.add_tuple_at(1, vec![u, v]).expect("edge in range");
        b.add_tuple_at(1, vec![v, u]).expect("edge in range");
    }
    b.build().expect("ordered graph is well formed")
}

/// `0 -> 1 -> ... -> n-1` with the successor undefined at the top.
pub fn successor_chain(n: usize) -> Structure {
    let mut b = Structure::builder(chain_signature(), n);
    for i in 1..n {
        b.set_value_at(0, vec![i - 1], i).expect("in range");
    }
    b.build().expect("chain is well formed")
}

/// Erdős–Rényi graph with edge probability `p`.
pub fn random_graph(n: usize, p: f64, rng: &mut impl Rng) -> Structure {
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(p) {
                edges.push((i, j));
            }
        }
    }
    graph(n, &edges)
}

/// Every labelled graph on `n` vertices, indexed by the bitmask over the
/// pairs `(i, j)`, `i < j`, in lexicographic order.
pub fn labelled_graph(n: usize, mask: u64, ordered: bool) -> Structure {
    let mut edges = Vec::new();
    let mut bit = 0;
    for i in 0..n {
        for j in i + 1..n {
            if mask >> bit & 1 == 1 {
                edges.push((i, j));
            }
            bit += 1;
        }
    }
    if ordered {
        ordered_graph(n, &edges)
    } else {
        graph(n, &edges)
    }
}
