//! Copy systems: the A-copies to colour and, for every B-copy, the
//! A-copies it contains.

use std::collections::HashMap;

use crate::embedding::{enumerate_embeddings, first_embeddings};
use crate::qftype::{qftp, realizations, QfType};
use crate::structure::{for_each_injective_tuple, Structure, StructureError};

use super::engine::{Group, Instance};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupCopies {
    /// A-copies as image tuples in `C`.
    pub a_copies: Vec<Vec<usize>>,
    /// `members[b]` indexes the A-copies inside B-copy `b`.
    pub members: Vec<Vec<u32>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CopySystem {
    pub b_copies: Vec<Vec<usize>>,
    pub groups: Vec<GroupCopies>,
}

fn index_of(copies: &[Vec<usize>]) -> HashMap<&[usize], u32> {
    copies.iter().enumerate().map(|(i, c)| (c.as_slice(), i as u32)).collect()
}

/// Composes each B-copy with each inner copy (positions into `B`).
fn group_from(b_copies: &[Vec<usize>], a_copies: Vec<Vec<usize>>, inner: &[Vec<usize>]) -> GroupCopies {
    let index = index_of(&a_copies);
    let members = b_copies
        .iter()
        .map(|b| {
            inner
                .iter()
                .map(|f| {
                    let image: Vec<usize> = f.iter().map(|&x| b[x]).collect();
                    *index.get(image.as_slice()).expect("composed copy is a copy")
                })
                .collect()
        })
        .collect();
    GroupCopies { a_copies, members }
}

impl CopySystem {
    /// Embedding semantics: A-copies are `binom(C, A_i)`, B-copies are
    /// `binom(C, B)`, and B-copy `e` contains `e ∘ f` for `f ∈ binom(B, A_i)`.
    pub fn embeddings(c: &Structure, b: &Structure, patterns: &[&Structure]) -> Self {
        let b_copies: Vec<Vec<usize>> = enumerate_embeddings(c, b).into_iter().map(|e| e.into_map()).collect();
        let groups = patterns
            .iter()
            .map(|a| {
                let a_copies = enumerate_embeddings(c, a).into_iter().map(|e| e.into_map()).collect();
                let inner: Vec<Vec<usize>> = enumerate_embeddings(b, a).into_iter().map(|e| e.into_map()).collect();
                group_from(&b_copies, a_copies, &inner)
            })
            .collect();
        CopySystem { b_copies, groups }
    }

    /// Copy semantics for tuples of `host`: A-copies in `C` are the
    /// realizations of `qftp(host, ā_i)`, B-copies those of `qftp(host, b̄)`,
    /// and inside `b̄` the A-copies are the position tuples realizing the
    /// same type as `ā_i`.
    pub fn qf_copies(c: &Structure, host: &Structure, b: &[usize], patterns: &[&[usize]]) -> Result<Self, StructureError> {
        let b_type = qftp(host, b);
        let b_copies = realizations(c, &b_type, None)?;
        let mut groups = Vec::with_capacity(patterns.len());
        for a in patterns {
            let a_type = qftp(host, a);
            let a_copies = realizations(c, &a_type, None)?;
            let inner = inner_positions(host, b, &a_type);
            groups.push(group_from(&b_copies, a_copies, &inner));
        }
        Ok(CopySystem { b_copies, groups })
    }

    pub fn instance(&self, colors: &[usize], caps: &[usize]) -> Instance {
        let groups = self
            .groups
            .iter()
            .zip(colors.iter().zip(caps))
            .map(|(g, (&r, &d))| Group {
                copies: g.a_copies.len(),
                colors: r,
                cap: d,
            })
            .collect();
        let edges = (0..self.b_copies.len())
            .map(|b| self.groups.iter().map(|g| g.members[b].clone()).collect())
            .collect();
        Instance {
            groups,
            edges,
            symmetries: Vec::new(),
        }
    }

    /// Permutation of the group-`g` copies induced by an automorphism of
    /// the host `C`.
    pub fn copy_permutation(&self, g: usize, automorphism: &[usize]) -> Option<Vec<u32>> {
        let copies = &self.groups[g].a_copies;
        let index = index_of(copies);
        copies
            .iter()
            .map(|c| {
                let image: Vec<usize> = c.iter().map(|&x| automorphism[x]).collect();
                index.get(image.as_slice()).copied()
            })
            .collect()
    }
}

/// Injective position tuples `ι` into `b` with `qftp(host, b∘ι) = a_type`.
pub fn inner_positions(host: &Structure, b: &[usize], a_type: &QfType) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for_each_injective_tuple(b.len(), a_type.arity(), |idx| {
        let t: Vec<usize> = idx.iter().map(|&i| b[i]).collect();
        if qftp(host, &t) == *a_type {
            out.push(idx.to_vec());
        }
    });
    out
}

/// Up to `limit` non-identity automorphisms of `c`, lexicographically first.
pub fn leading_automorphisms(c: &Structure, limit: usize) -> Vec<Vec<usize>> {
    first_embeddings(c, c, limit + 1)
        .into_iter()
        .filter(|e| !e.is_identity())
        .take(limit)
        .map(|e| e.into_map())
        .collect()
}
