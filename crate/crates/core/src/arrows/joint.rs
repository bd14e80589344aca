//! Joint-witness composition and Ramsey-degree bounds.

use crate::embedding::{automorphism_group, embeds, enumerate_embeddings};
use crate::structure::Structure;

use super::system::CopySystem;
use super::{arrow_check, solve, verify_counterexample, ArrowError, Coloring, Mode, SearchConfig, Verdict};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stage {
    /// Index into the caller's pattern list.
    pub pattern: usize,
    pub colors: usize,
    /// Size of the structure this stage had to arrow.
    pub target_size: usize,
    /// Candidate indices tried, with their decide verdicts.
    pub tried: Vec<(usize, Verdict)>,
    pub witness: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct JointWitness {
    /// The composed structure, or `None` when some stage ran out of
    /// candidates or budget.
    pub structure: Option<Structure>,
    pub stages: Vec<Stage>,
}

impl JointWitness {
    pub fn verdict(&self) -> Verdict {
        if self.structure.is_some() {
            Verdict::Holds
        } else {
            Verdict::Inconclusive
        }
    }
}

/// Composes single-pattern witnesses: starting from `B`, each stage finds
/// the first candidate `C` with `C → (current)^{A_i}_{r_i}` and makes it
/// current. Larger patterns are handled first.
pub fn build_joint_witness(
    candidates: &[Structure],
    b: &Structure,
    patterns: &[Structure],
    rs: &[usize],
    cfg: &SearchConfig,
) -> Result<JointWitness, ArrowError> {
    if rs.len() != patterns.len() {
        return Err(ArrowError::LengthMismatch);
    }
    let mut order: Vec<usize> = (0..patterns.len()).collect();
    order.sort_by_key(|&i| std::cmp::Reverse(patterns[i].size()));
    let mut current = b.clone();
    let mut stages = Vec::new();
    for i in order {
        let mut stage = Stage {
            pattern: i,
            colors: rs[i],
            target_size: current.size(),
            tried: Vec::new(),
            witness: None,
        };
        for (k, c) in candidates.iter().enumerate() {
            if c.size() < current.size() || !embeds(c, &current) {
                continue;
            }
            let res = arrow_check(c, &current, &patterns[i], rs[i], Mode::Decide, cfg)?;
            stage.tried.push((k, res.verdict));
            if res.verdict == Verdict::Holds {
                stage.witness = Some(k);
                break;
            }
        }
        let found = stage.witness;
        stages.push(stage);
        match found {
            Some(k) => current = candidates[k].clone(),
            None => {
                return Ok(JointWitness {
                    structure: None,
                    stages,
                })
            }
        }
    }
    Ok(JointWitness {
        structure: Some(current),
        stages,
    })
}

/// `|Aut(A)|`, a lower bound for the Ramsey degree of `A`.
pub fn ramsey_degree_lower(a: &Structure) -> usize {
    automorphism_group(a).size()
}

/// Colours each A-copy `e` by the automorphism `α` with `e = m ∘ α`, where
/// `m` is the least copy of its `Aut(A)`-orbit. Every B-copy that contains
/// an A-copy then sees all `|Aut(A)|` colours.
pub fn aut_orbit_coloring(c: &Structure, a: &Structure) -> Coloring {
    let group = automorphism_group(a);
    let copies: Vec<Vec<usize>> = enumerate_embeddings(c, a).into_iter().map(|e| e.into_map()).collect();
    let colors = copies
        .iter()
        .map(|e| {
            let orbit: Vec<Vec<usize>> = group
                .elements()
                .iter()
                .map(|alpha| alpha.map().iter().map(|&x| e[x]).collect())
                .collect();
            let least = orbit.iter().min().expect("identity is in the group");
            group
                .elements()
                .iter()
                .position(|alpha| alpha.map().iter().map(|&x| least[x]).eq(e.iter().copied()))
                .expect("e lies in the orbit of its least element")
        })
        .collect();
    Coloring::new(copies, colors, group.size().max(1)).expect("colours index the group")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DegreeStatus {
    /// Some candidate satisfies the `≤ d` property for every checked `r`.
    Witnessed,
    /// `d` is below `|Aut(A)|`; every candidate is refuted by the orbit
    /// colouring.
    BelowLowerBound,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidateCheck {
    pub candidate: usize,
    /// `(r, verdict)` for each colour count examined.
    pub per_color: Vec<(usize, Verdict)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DegreeProbe {
    pub lower: usize,
    pub d: usize,
    pub color_cap: usize,
    pub status: DegreeStatus,
    pub witness: Option<usize>,
    pub checked: Vec<CandidateCheck>,
}

/// Looks for a candidate `C` such that for every `r ≤ color_cap`, each
/// `r`-colouring of `binom(C, A)` shows at most `d` colours on some
/// B-copy. Results are per `r`; no uniformity in `r` is claimed.
pub fn ramsey_degree_upper_probe(
    a: &Structure,
    b: &Structure,
    candidates: &[Structure],
    d: usize,
    color_cap: usize,
    cfg: &SearchConfig,
) -> Result<DegreeProbe, ArrowError> {
    if d == 0 {
        return Err(ArrowError::ZeroCap);
    }
    if color_cap == 0 {
        return Err(ArrowError::ZeroColors);
    }
    if !embeds(b, a) {
        return Err(ArrowError::NotEmbeddable(0));
    }
    let lower = ramsey_degree_lower(a);
    let mut probe = DegreeProbe {
        lower,
        d,
        color_cap,
        status: DegreeStatus::Inconclusive,
        witness: None,
        checked: Vec::new(),
    };
    let shortcut = d < lower && color_cap >= lower;
    for (k, c) in candidates.iter().enumerate() {
        if !embeds(c, b) {
            continue;
        }
        let system = CopySystem::embeddings(c, b, &[a]);
        if shortcut {
            let chi = aut_orbit_coloring(c, a);
            verify_counterexample(&system, std::slice::from_ref(&chi), &[d])?;
            probe.checked.push(CandidateCheck {
                candidate: k,
                per_color: vec![(lower, Verdict::Fails)],
            });
            continue;
        }
        let mut per_color = Vec::new();
        let mut all = true;
        for r in 1..=color_cap {
            let res = solve(c, &system, &[r], &[d], Mode::Decide, cfg)?;
            per_color.push((r, res.verdict));
            if res.verdict != Verdict::Holds {
                all = false;
                break;
            }
        }
        probe.checked.push(CandidateCheck { candidate: k, per_color });
        if all {
            probe.status = DegreeStatus::Witnessed;
            probe.witness = Some(k);
            return Ok(probe);
        }
    }
    if shortcut {
        probe.status = DegreeStatus::BelowLowerBound;
    }
    Ok(probe)
}
