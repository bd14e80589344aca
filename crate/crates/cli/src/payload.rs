//! Arrow results in certificate form and back.

use std::fmt::Write as _;

use ramsey_core::arrows::{ArrowResult, Coloring, Evidence, Mode, ProofStep, SearchConfig, Verdict};

use crate::certificate::{CertError, Certificate};

fn join(t: &[usize]) -> String {
    t.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

pub(crate) fn parse_list(s: &str) -> Result<Vec<usize>, CertError> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|x| x.trim().parse().map_err(|_| CertError::Malformed(format!("bad number `{x}`"))))
        .collect()
}

fn num<T: std::str::FromStr>(s: &str) -> Result<T, CertError> {
    s.trim().parse().map_err(|_| CertError::Malformed(format!("bad number `{s}`")))
}

pub fn parse_verdict(s: &str) -> Result<Verdict, CertError> {
    match s {
        "HOLDS" => Ok(Verdict::Holds),
        "FAILS" => Ok(Verdict::Fails),
        "INCONCLUSIVE" => Ok(Verdict::Inconclusive),
        other => Err(CertError::Malformed(format!("unknown verdict `{other}`"))),
    }
}

fn proof_text(proof: &[ProofStep]) -> String {
    let mut out = String::new();
    for step in proof {
        match step {
            ProofStep::Branch { var, options } => writeln!(out, "B {var} {options}"),
            ProofStep::Conflict { edge } => writeln!(out, "C {edge}"),
            ProofStep::Symmetry { index } => writeln!(out, "S {index}"),
            ProofStep::Wipeout { var, edges } => {
                let e: Vec<String> = edges.iter().map(|x| x.to_string()).collect();
                writeln!(out, "W {var} {}", e.join(","))
            }
        }
        .unwrap();
    }
    out
}

fn parse_proof(lines: &[String]) -> Result<Vec<ProofStep>, CertError> {
    lines
        .iter()
        .map(|l| {
            let w: Vec<&str> = l.split_whitespace().collect();
            Ok(match w.as_slice() {
                ["B", v, o] => ProofStep::Branch {
                    var: num(v)?,
                    options: num(o)?,
                },
                ["C", e] => ProofStep::Conflict { edge: num(e)? },
                ["S", i] => ProofStep::Symmetry { index: num(i)? },
                ["W", v, es] => ProofStep::Wipeout {
                    var: num(v)?,
                    edges: parse_list(es)?.into_iter().map(|x| x as u32).collect(),
                },
                _ => return Err(CertError::Malformed(format!("bad proof step `{l}`"))),
            })
        })
        .collect()
}

/// Writes `result` under `tag`: fields `tag.key` and sections named `tag`
/// or `tag.i`.
pub fn write_arrow(cert: &mut Certificate, tag: &str, result: &ArrowResult) {
    let key = |k: &str| format!("{tag}.{k}");
    cert.field(&key("verdict"), result.verdict)
        .field(&key("mode"), result.mode)
        .field(&key("colors"), join(&result.colors))
        .field(&key("caps"), join(&result.caps))
        .field(&key("a-copies"), join(&result.a_copies))
        .field(&key("b-copies"), result.b_copies)
        .field(&key("nodes"), result.nodes)
        .field(&key("local-steps"), result.local_steps);
    match &result.evidence {
        Evidence::Counterexample(cols) => {
            cert.field(&key("evidence"), "counterexample");
            for (i, col) in cols.iter().enumerate() {
                let mut text = String::new();
                for (copy, c) in col.copies().iter().zip(col.colors()) {
                    writeln!(text, "{} : {c}", join(copy)).unwrap();
                }
                cert.section("coloring", &format!("{tag}.{i}"), &text);
            }
        }
        Evidence::Exhaustion { automorphisms, proof } => {
            cert.field(&key("evidence"), "exhaustion");
            let autos: Vec<String> = automorphisms.iter().map(|a| join(a)).collect();
            cert.section("automorphisms", tag, &autos.join("\n"));
            if let Some(p) = proof {
                cert.section("proof", tag, &proof_text(p));
            }
        }
        Evidence::Samples { witnesses } => {
            cert.field(&key("evidence"), "samples");
            cert.field(&key("samples"), witnesses.len());
            cert.field(&key("witnesses"), join(witnesses));
        }
        Evidence::None => {
            cert.field(&key("evidence"), "none");
        }
    }
}

/// Reads back what [`write_arrow`] wrote; `config` supplies the seed for
/// sample replay.
pub fn read_arrow(cert: &Certificate, tag: &str, config: &SearchConfig) -> Result<ArrowResult, CertError> {
    let key = |k: &str| format!("{tag}.{k}");
    let colors = parse_list(cert.get(&key("colors"))?)?;
    let mut config = config.clone();
    let evidence = match cert.get(&key("evidence"))? {
        "counterexample" => {
            let mut cols = Vec::new();
            for (i, &r) in colors.iter().enumerate() {
                let sec = cert.find("coloring", &format!("{tag}.{i}"))?;
                let mut copies = Vec::new();
                let mut cs = Vec::new();
                for l in &sec.lines {
                    let (copy, c) = l
                        .split_once(" : ")
                        .ok_or_else(|| CertError::Malformed(format!("bad colouring line `{l}`")))?;
                    copies.push(parse_list(copy)?);
                    cs.push(num(c)?);
                }
                cols.push(Coloring::new(copies, cs, r).map_err(|e| CertError::Malformed(e.to_string()))?);
            }
            Evidence::Counterexample(cols)
        }
        "exhaustion" => {
            let automorphisms = cert
                .find("automorphisms", tag)?
                .lines
                .iter()
                .filter(|l| !l.is_empty())
                .map(|l| parse_list(l))
                .collect::<Result<_, _>>()?;
            let proof = match cert.find("proof", tag) {
                Ok(sec) => Some(parse_proof(&sec.lines)?),
                Err(_) => None,
            };
            Evidence::Exhaustion { automorphisms, proof }
        }
        "samples" => {
            config.samples = num(cert.get(&key("samples"))?)?;
            Evidence::Samples {
                witnesses: parse_list(cert.get(&key("witnesses"))?)?,
            }
        }
        "none" => Evidence::None,
        other => return Err(CertError::Malformed(format!("unknown evidence `{other}`"))),
    };
    Ok(ArrowResult {
        verdict: parse_verdict(cert.get(&key("verdict"))?)?,
        mode: cert
            .get(&key("mode"))?
            .parse::<Mode>()
            .map_err(CertError::Malformed)?,
        colors,
        caps: parse_list(cert.get(&key("caps"))?)?,
        config,
        a_copies: parse_list(cert.get(&key("a-copies"))?)?,
        b_copies: num(cert.get(&key("b-copies"))?)?,
        nodes: num(cert.get(&key("nodes"))?)?,
        local_steps: num(cert.get(&key("local-steps"))?)?,
        evidence,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ramsey_core::arrows::arrow_check;
    use ramsey_core::families::linear_order;

    #[test]
    fn arrow_results_round_trip() {
        let cfg = SearchConfig::default();
        for (c, mode) in [(6, Mode::Decide), (5, Mode::Decide), (6, Mode::Sample), (5, Mode::Refute)] {
            let res = arrow_check(&linear_order(c), &linear_order(3), &linear_order(2), 2, mode, &cfg).unwrap();
            let mut cert = Certificate::new("arrow", "x".into(), "y".into(), res.verdict);
            write_arrow(&mut cert, "r", &res);
            let parsed = Certificate::parse(&cert.render()).unwrap();
            let back = read_arrow(&parsed, "r", &cfg).unwrap();
            assert_eq!(back, res);
        }
    }
}
