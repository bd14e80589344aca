//! Finite-scale structural Ramsey theory and generalized indiscernibles.
//!
//! The crate is organised bottom-up:
//!
//! - [`structure`], [`embedding`], [`qftype`], [`canon`]: finite structures
//!   with partial function tables, embeddings, automorphisms, generated
//!   substructures and canonical quantifier-free types.
//! - [`expansions`]: type-predicate expansions (Morleyisation, isolator)
//!   and relations defined by unions of binary types.
//! - [`arrows`]: partition arrows with replayable certificates, joint
//!   arrows, Ramsey-degree probes.
//! - [`classes`]: finite classes and their HP/JEP/AP/ERP/f-ERP checks,
//!   orderability search and elf minimisation.
//! - [`indiscernibles`]: indexed sequences, Δ-indiscernibility, local
//!   basedness and Ramsey extraction.

pub mod arrows;
pub mod canon;
pub mod classes;
pub mod embedding;
pub mod expansions;
pub mod families;
pub mod indiscernibles;
pub mod qftype;
pub mod structure;
pub mod term;

pub use canon::{canonical_form, is_isomorphic};
pub use embedding::{
    automorphism_group, enumerate_embeddings, generated_substructure, is_embedding, is_rigid,
    AutomorphismGroup, Embedding,
};
pub use qftype::{enumerate_qf_copies, qftp, QfType};
pub use structure::{Signature, Structure, StructureError};
