//! Partition arrows `C → (B)^A_r`, their joint form, Ramsey-degree probes
//! and explicit colourings along term orbits.
//!
//! Every decision reduces to a [`CopySystem`]: the A-copies in `C` are the
//! objects to colour, and each B-copy lists the A-copies it contains. The
//! [`engine`] searches colourings of that system.

pub mod engine;
mod iteration;
mod joint;
pub mod system;

use std::collections::HashMap;
use std::fmt;

use rayon::prelude::*;
use thiserror::Error;

use crate::embedding::{is_embedding, Embedding};
use crate::structure::{Structure, StructureError};

pub use engine::ProofStep;
pub use iteration::{
    promote_arrow_witness, term_coloring_violations, term_iteration_coloring, Promotion, TermColoring, TermError,
};
pub use joint::{
    aut_orbit_coloring, build_joint_witness, ramsey_degree_lower, ramsey_degree_upper_probe, CandidateCheck,
    DegreeProbe, DegreeStatus, JointWitness, Stage,
};
pub use system::CopySystem;

#[derive(Debug, Error)]
pub enum ArrowError {
    #[error("at least one colour is required")]
    ZeroColors,
    #[error("degree caps must be at least 1")]
    ZeroCap,
    #[error("patterns, colour counts and caps differ in number")]
    LengthMismatch,
    #[error("too many colours (at most 250)")]
    TooManyColors,
    #[error(transparent)]
    Structure(#[from] StructureError),
    #[error("coloring does not cover copy {0:?}")]
    Uncolored(Vec<usize>),
    #[error("colour {color} is out of range for {r} colours")]
    ColorOutOfRange { color: usize, r: usize },
    #[error("pattern {0} does not embed into B")]
    NotEmbeddable(usize),
    #[error("certificate rejected: {0}")]
    Rejected(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error(transparent)]
    Term(#[from] TermError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    Holds,
    Fails,
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Holds => "HOLDS",
            Verdict::Fails => "FAILS",
            Verdict::Inconclusive => "INCONCLUSIVE",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    Decide,
    Refute,
    Sample,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Decide => "decide",
            Mode::Refute => "refute",
            Mode::Sample => "sample",
        })
    }
}

impl std::str::FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "decide" => Ok(Mode::Decide),
            "refute" => Ok(Mode::Refute),
            "sample" => Ok(Mode::Sample),
            other => Err(format!("unknown mode `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchConfig {
    /// Decide-mode node budget.
    pub budget: u64,
    /// Refute-mode local-search steps.
    pub refute_steps: u64,
    pub seed: u64,
    /// Number of colourings drawn in sample mode.
    pub samples: usize,
    /// How many automorphisms of `C` drive symmetry breaking.
    pub symmetry_limit: usize,
    pub record_proof: bool,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            budget: 10_000_000,
            refute_steps: 200_000,
            seed: 0,
            samples: 1000,
            symmetry_limit: 16,
            record_proof: true,
        }
    }
}

/// An assignment of colours `0..r` to a list of copies.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Coloring {
    copies: Vec<Vec<usize>>,
    colors: Vec<usize>,
    r: usize,
}

impl Coloring {
    pub fn new(copies: Vec<Vec<usize>>, colors: Vec<usize>, r: usize) -> Result<Self, ArrowError> {
        if r == 0 {
            return Err(ArrowError::ZeroColors);
        }
        assert_eq!(copies.len(), colors.len(), "one colour per copy");
        if let Some(&color) = colors.iter().find(|&&c| c >= r) {
            return Err(ArrowError::ColorOutOfRange { color, r });
        }
        Ok(Coloring { copies, colors, r })
    }

    /// Every copy coloured by `f`.
    pub fn from_fn(copies: Vec<Vec<usize>>, r: usize, f: impl Fn(&[usize]) -> usize) -> Result<Self, ArrowError> {
        let colors = copies.iter().map(|c| f(c)).collect();
        Coloring::new(copies, colors, r)
    }

    pub fn copies(&self) -> &[Vec<usize>] {
        &self.copies
    }

    pub fn colors(&self) -> &[usize] {
        &self.colors
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn color_of(&self, copy: &[usize]) -> Option<usize> {
        self.copies.iter().position(|c| c == copy).map(|i| self.colors[i])
    }

    /// Colours aligned with `copies`, which must all be covered.
    fn aligned(&self, copies: &[Vec<usize>]) -> Result<Vec<usize>, ArrowError> {
        let index: HashMap<&[usize], usize> =
            self.copies.iter().zip(&self.colors).map(|(c, &k)| (c.as_slice(), k)).collect();
        copies
            .iter()
            .map(|c| index.get(c.as_slice()).copied().ok_or_else(|| ArrowError::Uncolored(c.clone())))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Evidence {
    /// One colouring per pattern with no good B-copy.
    Counterexample(Vec<Coloring>),
    /// Exhaustion proof; `automorphisms` drive its symmetry steps. `proof`
    /// is absent when recording was off or the proof grew too large.
    Exhaustion {
        automorphisms: Vec<Vec<usize>>,
        proof: Option<Vec<ProofStep>>,
    },
    /// Sample mode: for each drawn colouring, the index of a good B-copy.
    Samples { witnesses: Vec<usize> },
    None,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArrowResult {
    pub verdict: Verdict,
    pub mode: Mode,
    pub colors: Vec<usize>,
    pub caps: Vec<usize>,
    pub config: SearchConfig,
    pub a_copies: Vec<usize>,
    pub b_copies: usize,
    pub nodes: u64,
    pub local_steps: u64,
    pub evidence: Evidence,
}

fn check_params(groups: usize, rs: &[usize], ds: &[usize]) -> Result<(), ArrowError> {
    if rs.len() != groups || ds.len() != groups {
        return Err(ArrowError::LengthMismatch);
    }
    if rs.contains(&0) {
        return Err(ArrowError::ZeroColors);
    }
    if rs.iter().any(|&r| r > 250) {
        return Err(ArrowError::TooManyColors);
    }
    if ds.contains(&0) {
        return Err(ArrowError::ZeroCap);
    }
    Ok(())
}

fn colorings_from(system: &CopySystem, rs: &[usize], raw: Vec<Vec<usize>>) -> Vec<Coloring> {
    system
        .groups
        .iter()
        .zip(raw)
        .zip(rs)
        .map(|((g, colors), &r)| Coloring {
            copies: g.a_copies.clone(),
            colors,
            r,
        })
        .collect()
}

/// Copy permutations of the automorphisms, for the single-pattern case.
fn symmetry_perms(system: &CopySystem, automorphisms: &[Vec<usize>]) -> Vec<Vec<u32>> {
    automorphisms
        .iter()
        .filter_map(|a| system.copy_permutation(0, a))
        .collect()
}

/// Decides, refutes or samples the arrow described by `system` on host `c`.
pub fn solve(
    c: &Structure,
    system: &CopySystem,
    rs: &[usize],
    ds: &[usize],
    mode: Mode,
    cfg: &SearchConfig,
) -> Result<ArrowResult, ArrowError> {
    check_params(system.groups.len(), rs, ds)?;
    let mut inst = system.instance(rs, ds);
    let mut result = ArrowResult {
        verdict: Verdict::Inconclusive,
        mode,
        colors: rs.to_vec(),
        caps: ds.to_vec(),
        config: cfg.clone(),
        a_copies: system.groups.iter().map(|g| g.a_copies.len()).collect(),
        b_copies: system.b_copies.len(),
        nodes: 0,
        local_steps: 0,
        evidence: Evidence::None,
    };
    match mode {
        Mode::Decide => {
            let automorphisms = if system.groups.len() == 1 && cfg.symmetry_limit > 0 {
                system::leading_automorphisms(c, cfg.symmetry_limit)
            } else {
                Vec::new()
            };
            inst.symmetries = symmetry_perms(system, &automorphisms);
            let report = engine::decide(&inst, cfg.budget, cfg.record_proof);
            result.nodes = report.nodes;
            match report.outcome {
                engine::Outcome::Bad => {
                    result.verdict = Verdict::Fails;
                    result.evidence = Evidence::Counterexample(colorings_from(system, rs, report.coloring));
                }
                engine::Outcome::Exhausted => {
                    result.verdict = Verdict::Holds;
                    result.evidence = Evidence::Exhaustion {
                        automorphisms,
                        proof: report.proof,
                    };
                }
                engine::Outcome::Budget => {}
            }
        }
        Mode::Refute => {
            let (found, steps) = engine::local_search(&inst, cfg.refute_steps, cfg.seed);
            result.local_steps = steps;
            if let Some(raw) = found {
                result.verdict = Verdict::Fails;
                result.evidence = Evidence::Counterexample(colorings_from(system, rs, raw));
            }
        }
        Mode::Sample => {
            let outcomes: Vec<Option<usize>> = (0..cfg.samples as u64)
                .into_par_iter()
                .map(|i| {
                    let col = engine::random_coloring(&inst, cfg.seed, i);
                    engine::first_good_edge(&inst, &col)
                })
                .collect();
            match outcomes.iter().position(Option::is_none) {
                Some(i) => {
                    let raw = engine::random_coloring(&inst, cfg.seed, i as u64);
                    result.verdict = Verdict::Fails;
                    result.evidence = Evidence::Counterexample(colorings_from(system, rs, raw));
                }
                None => {
                    result.evidence = Evidence::Samples {
                        witnesses: outcomes.into_iter().map(|o| o.expect("checked")).collect(),
                    };
                }
            }
        }
    }
    Ok(result)
}

/// `C → (B)^A_r` under embedding semantics.
pub fn arrow_check(
    c: &Structure,
    b: &Structure,
    a: &Structure,
    r: usize,
    mode: Mode,
    cfg: &SearchConfig,
) -> Result<ArrowResult, ArrowError> {
    let system = CopySystem::embeddings(c, b, &[a]);
    solve(c, &system, &[r], &[1], mode, cfg)
}

/// Joint arrow: one colouring per `A_i` with `r_i` colours; a good B-copy
/// shows at most `d_i` colours of every colouring at once.
pub fn joint_arrow_check(
    c: &Structure,
    b: &Structure,
    patterns: &[Structure],
    rs: &[usize],
    ds: &[usize],
    mode: Mode,
    cfg: &SearchConfig,
) -> Result<ArrowResult, ArrowError> {
    check_params(patterns.len(), rs, ds)?;
    for (i, a) in patterns.iter().enumerate() {
        if !crate::embedding::embeds(b, a) {
            return Err(ArrowError::NotEmbeddable(i));
        }
    }
    let refs: Vec<&Structure> = patterns.iter().collect();
    let system = CopySystem::embeddings(c, b, &refs);
    solve(c, &system, rs, ds, mode, cfg)
}

/// First B-copy on which every colouring shows at most `caps[i]` colours.
pub fn find_good_copy(system: &CopySystem, colorings: &[Coloring], caps: &[usize]) -> Result<Option<usize>, ArrowError> {
    if colorings.len() != system.groups.len() || caps.len() != system.groups.len() {
        return Err(ArrowError::LengthMismatch);
    }
    let raw: Vec<Vec<usize>> = colorings
        .iter()
        .zip(&system.groups)
        .map(|(col, g)| col.aligned(&g.a_copies))
        .collect::<Result<_, _>>()?;
    let rs: Vec<usize> = colorings.iter().map(|c| c.r).collect();
    let inst = system.instance(&rs, caps);
    Ok(engine::first_good_edge(&inst, &raw))
}

/// A B-copy in `C` on whose A-copies `chi` is constant.
pub fn find_monochromatic_copy(
    c: &Structure,
    b: &Structure,
    a: &Structure,
    chi: &Coloring,
) -> Result<Option<Embedding>, ArrowError> {
    let system = CopySystem::embeddings(c, b, &[a]);
    Ok(find_good_copy(&system, std::slice::from_ref(chi), &[1])?
        .map(|i| Embedding::from_map_unchecked(system.b_copies[i].clone())))
}

/// Re-checks a counterexample: no B-copy is good.
pub fn verify_counterexample(system: &CopySystem, colorings: &[Coloring], caps: &[usize]) -> Result<(), ArrowError> {
    for (col, g) in colorings.iter().zip(&system.groups) {
        if col.copies.len() != g.a_copies.len() {
            return Err(ArrowError::Rejected("colouring covers extra copies".into()));
        }
    }
    match find_good_copy(system, colorings, caps)? {
        None => Ok(()),
        Some(i) => Err(ArrowError::Rejected(format!(
            "B-copy {:?} is good under the colouring",
            system.b_copies[i]
        ))),
    }
}

/// Replays the evidence of `result` against `system` without searching.
pub fn verify_result(c: &Structure, system: &CopySystem, result: &ArrowResult) -> Result<(), ArrowError> {
    check_params(system.groups.len(), &result.colors, &result.caps)?;
    match (&result.verdict, &result.evidence) {
        (Verdict::Fails, Evidence::Counterexample(cols)) => {
            if cols.iter().zip(&result.colors).any(|(c, &r)| c.r != r) {
                return Err(ArrowError::Rejected("colour count differs from the claim".into()));
            }
            verify_counterexample(system, cols, &result.caps)
        }
        (Verdict::Holds, Evidence::Exhaustion { automorphisms, proof }) => {
            let proof = proof
                .as_ref()
                .ok_or_else(|| ArrowError::Rejected("no exhaustion proof recorded".into()))?;
            for a in automorphisms {
                if !is_embedding(c, c, a) {
                    return Err(ArrowError::Rejected(format!("{a:?} is not an automorphism")));
                }
            }
            let perms = symmetry_perms(system, automorphisms);
            if perms.len() != automorphisms.len() {
                return Err(ArrowError::Rejected("automorphism does not act on copies".into()));
            }
            let mut inst = system.instance(&result.colors, &result.caps);
            inst.symmetries = perms;
            engine::replay(&inst, proof).map_err(|e| ArrowError::Rejected(e.to_string()))
        }
        (Verdict::Inconclusive, Evidence::Samples { witnesses }) => {
            if witnesses.len() != result.config.samples {
                return Err(ArrowError::Rejected("sample count differs".into()));
            }
            let inst = system.instance(&result.colors, &result.caps);
            for (i, &w) in witnesses.iter().enumerate() {
                let col = engine::random_coloring(&inst, result.config.seed, i as u64);
                let single = engine::Instance {
                    groups: inst.groups.clone(),
                    edges: vec![inst.edges.get(w).cloned().ok_or_else(|| ArrowError::Rejected("witness index".into()))?],
                    symmetries: Vec::new(),
                };
                if engine::first_good_edge(&single, &col).is_none() {
                    return Err(ArrowError::Rejected(format!("sample {i}: B-copy {w} is not good")));
                }
            }
            Ok(())
        }
        (Verdict::Inconclusive, Evidence::None) => Ok(()),
        _ => Err(ArrowError::Rejected("evidence does not match the verdict".into())),
    }
}

/// DIMACS export of a single-pattern decide instance.
pub fn export_cnf(system: &CopySystem, r: usize) -> Result<String, ArrowError> {
    check_params(system.groups.len(), &[r], &[1])?;
    Ok(engine::to_cnf(&system.instance(&[r], &[1])))
}
