//! Line-oriented text formats for structures, classes and sequences.
//!
//! ```text
//! # comments run to the end of the line
//! signature digraph
//! relation E 2
//! function s 1
//! constant c
//! structure G : digraph
//! domain 3
//! E : (0,1) (1,2)
//! s : 0->1 1->2
//! c = 0
//! ```
//!
//! The signatures `order`, `set`, `graph`, `ordered-graph` and `chain` are
//! built in and need no `signature` block.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use ramsey_core::classes::{FiniteClass, Generator};
use ramsey_core::families;
use ramsey_core::indiscernibles::IndexedSequence;
use ramsey_core::{Signature, Structure, StructureError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("{origin}:{line}: {message}")]
    At { origin: String, line: usize, message: String },
    #[error("{origin}: {message}")]
    File { origin: String, message: String },
}

impl ParseError {
    fn at(origin: &str, line: usize, message: impl Into<String>) -> Self {
        ParseError::At {
            origin: origin.to_string(),
            line,
            message: message.into(),
        }
    }
}

pub fn builtin_signature(name: &str) -> Option<Arc<Signature>> {
    match name {
        "order" => Some(families::order_signature()),
        "set" => Some(families::set_signature()),
        "graph" => Some(families::graph_signature()),
        "ordered-graph" => Some(families::ordered_graph_signature()),
        "chain" => Some(families::chain_signature()),
        _ => None,
    }
}

/// Numbered, comment-free, non-empty lines.
pub(crate) fn lines(text: &str) -> Vec<(usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty())
        .collect()
}

fn number(origin: &str, line: usize, s: &str) -> Result<usize, ParseError> {
    s.trim()
        .parse()
        .map_err(|_| ParseError::at(origin, line, format!("expected a number, found `{}`", s.trim())))
}

fn numbers(origin: &str, line: usize, s: &str) -> Result<Vec<usize>, ParseError> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',').map(|x| number(origin, line, x)).collect()
}

/// Parses `signature` blocks until the first line that is not part of one.
fn signature_block<'a>(
    origin: &str,
    lines: &[(usize, &'a str)],
    pos: &mut usize,
    known: &mut HashMap<String, Arc<Signature>>,
) -> Result<(), ParseError> {
    while let Some(&(ln, line)) = lines.get(*pos) {
        let mut words = line.split_whitespace();
        if words.next() != Some("signature") {
            return Ok(());
        }
        let name = words
            .next()
            .ok_or_else(|| ParseError::at(origin, ln, "signature needs a name"))?
            .to_string();
        *pos += 1;
        let (mut rels, mut funs, mut consts) = (Vec::new(), Vec::new(), Vec::new());
        while let Some(&(ln, line)) = lines.get(*pos) {
            let w: Vec<&str> = line.split_whitespace().collect();
            match w.as_slice() {
                ["relation", sym, arity] => rels.push((sym.to_string(), number(origin, ln, arity)?)),
                ["function", sym, arity] => funs.push((sym.to_string(), number(origin, ln, arity)?)),
                ["constant", sym] => consts.push(sym.to_string()),
                [kw, ..] if ["relation", "function", "constant"].contains(kw) => {
                    return Err(ParseError::at(origin, ln, format!("malformed `{kw}` declaration")))
                }
                _ => break,
            }
            *pos += 1;
        }
        let sig = Signature::new(name.clone(), rels, funs, consts).map_err(|e| ParseError::at(origin, ln, e.to_string()))?;
        known.insert(name, Arc::new(sig));
    }
    Ok(())
}

fn resolve_signature(
    origin: &str,
    line: usize,
    name: &str,
    known: &HashMap<String, Arc<Signature>>,
) -> Result<Arc<Signature>, ParseError> {
    known
        .get(name)
        .cloned()
        .or_else(|| builtin_signature(name))
        .ok_or_else(|| ParseError::at(origin, line, format!("unknown signature `{name}`")))
}

/// Body lines of a structure: `domain`, relation and function tables and
/// constants. Stops at `end` (consumed) or end of input.
fn structure_body(
    origin: &str,
    lines: &[(usize, &str)],
    pos: &mut usize,
    sig: &Arc<Signature>,
    header_line: usize,
) -> Result<Structure, ParseError> {
    let mut size = None;
    let mut rel_rows: Vec<(usize, usize, Vec<usize>)> = Vec::new();
    let mut fun_rows: Vec<(usize, usize, Vec<usize>, usize)> = Vec::new();
    let mut const_rows: Vec<(usize, String, usize)> = Vec::new();
    while let Some(&(ln, line)) = lines.get(*pos) {
        *pos += 1;
        if line == "end" {
            break;
        }
        if let Some(rest) = line.strip_prefix("domain ") {
            if size.is_some() {
                return Err(ParseError::at(origin, ln, "domain given twice"));
            }
            size = Some(number(origin, ln, rest)?);
            continue;
        }
        if let Some((lhs, rhs)) = line.split_once(':') {
            let sym = lhs.trim();
            if let Some(r) = sig.relation_index(sym) {
                let mut rest = rhs.trim();
                while !rest.is_empty() {
                    let open = rest
                        .strip_prefix('(')
                        .ok_or_else(|| ParseError::at(origin, ln, format!("expected `(` in `{rest}`")))?;
                    let close = open
                        .find(')')
                        .ok_or_else(|| ParseError::at(origin, ln, "unclosed tuple"))?;
                    rel_rows.push((ln, r, numbers(origin, ln, &open[..close])?));
                    rest = open[close + 1..].trim_start();
                }
            } else if let Some(f) = sig.function_index(sym) {
                for entry in rhs.split_whitespace() {
                    let (args, value) = entry
                        .split_once("->")
                        .ok_or_else(|| ParseError::at(origin, ln, format!("expected `args->value`, found `{entry}`")))?;
                    fun_rows.push((ln, f, numbers(origin, ln, args)?, number(origin, ln, value)?));
                }
            } else {
                return Err(ParseError::at(origin, ln, format!("unknown symbol `{sym}`")));
            }
            continue;
        }
        if let Some((lhs, rhs)) = line.split_once('=') {
            const_rows.push((ln, lhs.trim().to_string(), number(origin, ln, rhs)?));
            continue;
        }
        return Err(ParseError::at(origin, ln, format!("cannot read `{line}`")));
    }
    let size = size.ok_or_else(|| ParseError::at(origin, header_line, "missing `domain`"))?;
    let mut b = Structure::builder(sig.clone(), size);
    let wrap = |ln: usize, e: StructureError| ParseError::at(origin, ln, e.to_string());
    for (ln, r, t) in rel_rows {
        b.add_tuple_at(r, t).map_err(|e| wrap(ln, e))?;
    }
    for (ln, f, args, v) in fun_rows {
        b.set_value_at(f, args, v).map_err(|e| wrap(ln, e))?;
    }
    for (ln, c, v) in const_rows {
        b.set_constant(&c, v).map_err(|e| wrap(ln, e))?;
    }
    b.build().map_err(|e| wrap(header_line, e))
}

#[derive(Debug, Clone, PartialEq)]
pub struct NamedStructure {
    pub name: String,
    pub structure: Structure,
}

pub fn parse_structure(text: &str, origin: &str) -> Result<NamedStructure, ParseError> {
    let lines = lines(text);
    let mut pos = 0;
    let mut known = HashMap::new();
    signature_block(origin, &lines, &mut pos, &mut known)?;
    let &(ln, header) = lines
        .get(pos)
        .ok_or_else(|| ParseError::at(origin, 1, "no `structure` line"))?;
    let (name, sig_name) = header
        .strip_prefix("structure")
        .and_then(|r| r.split_once(':'))
        .ok_or_else(|| ParseError::at(origin, ln, "expected `structure <name> : <signature>`"))?;
    let sig = resolve_signature(origin, ln, sig_name.trim(), &known)?;
    pos += 1;
    let structure = structure_body(origin, &lines, &mut pos, &sig, ln)?;
    if let Some(&(ln, _)) = lines.get(pos) {
        return Err(ParseError::at(origin, ln, "trailing input after the structure"));
    }
    Ok(NamedStructure {
        name: name.trim().to_string(),
        structure,
    })
}

/// The structure in the file format shown above; `parse_structure`
/// inverts it exactly.
pub fn serialize_structure(name: &str, m: &Structure) -> String {
    let mut out = signature_lines(m.signature());
    out.push_str(&structure_lines(name, m));
    out
}

fn signature_lines(sig: &Signature) -> String {
    let mut out = String::new();
    writeln!(out, "signature {}", sig.name()).unwrap();
    for s in sig.relations() {
        writeln!(out, "relation {} {}", s.name, s.arity).unwrap();
    }
    for s in sig.functions() {
        writeln!(out, "function {} {}", s.name, s.arity).unwrap();
    }
    for c in sig.constants() {
        writeln!(out, "constant {c}").unwrap();
    }
    out
}

/// Declarations for the signatures that are not built in.
fn custom_signature_lines<'a>(sigs: impl IntoIterator<Item = &'a Signature>) -> String {
    let mut out = String::new();
    let mut seen = Vec::new();
    for sig in sigs {
        if builtin_signature(sig.name()).as_deref() != Some(sig) && !seen.contains(&sig.name()) {
            seen.push(sig.name());
            out.push_str(&signature_lines(sig));
        }
    }
    out
}

fn join(t: &[usize]) -> String {
    t.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

fn structure_lines(name: &str, m: &Structure) -> String {
    let sig = m.signature();
    let mut out = String::new();
    writeln!(out, "structure {name} : {}", sig.name()).unwrap();
    out.push_str(&body_lines(m));
    out
}

fn body_lines(m: &Structure) -> String {
    let sig = m.signature();
    let mut out = String::new();
    writeln!(out, "domain {}", m.size()).unwrap();
    for (r, s) in sig.relations().iter().enumerate() {
        if m.relation_len(r) > 0 {
            let tuples: Vec<String> = m.relation_tuples(r).map(|t| format!("({})", join(t))).collect();
            writeln!(out, "{} : {}", s.name, tuples.join(" ")).unwrap();
        }
    }
    for (f, s) in sig.functions().iter().enumerate() {
        if m.function_len(f) > 0 {
            let entries: Vec<String> = m.function_entries(f).map(|(a, v)| format!("{}->{v}", join(a))).collect();
            writeln!(out, "{} : {}", s.name, entries.join(" ")).unwrap();
        }
    }
    for (c, name) in sig.constants().iter().enumerate() {
        writeln!(out, "{name} = {}", m.constant(c)).unwrap();
    }
    out
}

fn read(path: &Path) -> Result<String, ParseError> {
    std::fs::read_to_string(path).map_err(|e| ParseError::File {
        origin: path.display().to_string(),
        message: e.to_string(),
    })
}

pub fn load_structure(path: &Path) -> Result<NamedStructure, ParseError> {
    parse_structure(&read(path)?, &path.display().to_string())
}

fn relative(base: &Path, p: &str) -> PathBuf {
    let p = Path::new(p);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.parent().unwrap_or(Path::new("")).join(p)
    }
}

/// Class files:
///
/// ```text
/// class small-graphs : graph
/// bound 3
/// generate graphs upto 3
/// member k2.st
/// member inline
/// domain 2
/// E : (0,1) (1,0)
/// end
/// ```
pub fn parse_class(text: &str, origin: &str, base: &Path) -> Result<(String, FiniteClass), ParseError> {
    let lines = lines(text);
    let mut pos = 0;
    let mut known = HashMap::new();
    signature_block(origin, &lines, &mut pos, &mut known)?;
    let &(ln, header) = lines
        .get(pos)
        .ok_or_else(|| ParseError::at(origin, 1, "no `class` line"))?;
    let (name, sig_name) = header
        .strip_prefix("class")
        .and_then(|r| r.split_once(':'))
        .ok_or_else(|| ParseError::at(origin, ln, "expected `class <name> : <signature>`"))?;
    let sig = resolve_signature(origin, ln, sig_name.trim(), &known)?;
    pos += 1;
    let mut members = Vec::new();
    let mut bound = None;
    let mut generator = None;
    while let Some(&(ln, line)) = lines.get(pos) {
        pos += 1;
        let w: Vec<&str> = line.split_whitespace().collect();
        match w.as_slice() {
            ["bound", n] => bound = Some(number(origin, ln, n)?),
            ["generate", gen, "upto", n] => {
                let g: Generator = gen.parse().map_err(|e: String| ParseError::at(origin, ln, e))?;
                if g == Generator::FromFile {
                    return Err(ParseError::at(origin, ln, "`from-file` is not a generator"));
                }
                let n = number(origin, ln, n)?;
                let class = FiniteClass::generate(g, n);
                if !class.signature().same_symbols(&sig) {
                    return Err(ParseError::at(origin, ln, format!("{gen} do not have signature `{}`", sig.name())));
                }
                for m in class.members() {
                    members.push(m.with_signature(sig.clone()).map_err(|e| ParseError::at(origin, ln, e.to_string()))?);
                }
                bound = Some(bound.unwrap_or(0).max(n));
                generator = Some(g);
            }
            ["member", "inline"] => members.push(structure_body(origin, &lines, &mut pos, &sig, ln)?),
            ["member", file] => {
                let path = relative(base, file);
                let m = load_structure(&path)?.structure;
                members.push(m.with_signature(sig.clone()).map_err(|e| ParseError::at(origin, ln, e.to_string()))?);
            }
            _ => return Err(ParseError::at(origin, ln, format!("cannot read `{line}`"))),
        }
    }
    let mut class = FiniteClass::new(sig, members, bound).map_err(|e| ParseError::at(origin, ln, e.to_string()))?;
    if let Some(g) = generator {
        class.set_generator(g);
    }
    Ok((name.trim().to_string(), class))
}

pub fn load_class(path: &Path) -> Result<(String, FiniteClass), ParseError> {
    parse_class(&read(path)?, &path.display().to_string(), path)
}

/// A class with every member inline.
pub fn serialize_class(name: &str, class: &FiniteClass) -> String {
    let sig = class.signature();
    let mut out = custom_signature_lines([sig.as_ref()]);
    writeln!(out, "class {name} : {}", sig.name()).unwrap();
    writeln!(out, "bound {}", class.bound()).unwrap();
    for m in class.members() {
        writeln!(out, "member inline").unwrap();
        out.push_str(&body_lines(m));
        writeln!(out, "end").unwrap();
    }
    out
}

/// Sequence files:
///
/// ```text
/// sequence walk
/// index linear-order 20      # or: index <structure file>
/// target g.st
/// width 1
/// tuple 0 : 3
/// tuple 1 : 5
/// ```
pub fn parse_sequence(text: &str, origin: &str, base: &Path) -> Result<(String, IndexedSequence), ParseError> {
    let lines = lines(text);
    let mut name = None;
    let mut index = None;
    let mut target = None;
    let mut width = None;
    let mut rows: Vec<(usize, usize, Vec<usize>)> = Vec::new();
    let mut pos = 0;
    let mut known = HashMap::new();
    signature_block(origin, &lines, &mut pos, &mut known)?;
    while let Some(&(ln, line)) = lines.get(pos) {
        pos += 1;
        let w: Vec<&str> = line.split_whitespace().collect();
        match w.as_slice() {
            ["sequence", n] => name = Some(n.to_string()),
            ["index", "linear-order", n] => index = Some(families::linear_order(number(origin, ln, n)?)),
            ["index", "pure-set", n] => index = Some(families::pure_set(number(origin, ln, n)?)),
            ["index", "inline", sig] => {
                let sig = resolve_signature(origin, ln, sig, &known)?;
                index = Some(structure_body(origin, &lines, &mut pos, &sig, ln)?);
            }
            ["index", file] => index = Some(load_structure(&relative(base, file))?.structure),
            ["target", "inline", sig] => {
                let sig = resolve_signature(origin, ln, sig, &known)?;
                target = Some(structure_body(origin, &lines, &mut pos, &sig, ln)?);
            }
            ["target", file] => target = Some(load_structure(&relative(base, file))?.structure),
            ["width", n] => width = Some(number(origin, ln, n)?),
            ["tuple", ..] => {
                let rest = line["tuple".len()..].trim();
                let (i, t) = rest
                    .split_once(':')
                    .ok_or_else(|| ParseError::at(origin, ln, "expected `tuple <i> : <elements>`"))?;
                let elems = t
                    .split_whitespace()
                    .map(|x| number(origin, ln, x))
                    .collect::<Result<Vec<_>, _>>()?;
                rows.push((ln, number(origin, ln, i)?, elems));
            }
            _ => return Err(ParseError::at(origin, ln, format!("cannot read `{line}`"))),
        }
    }
    let missing = |what: &str| ParseError::File {
        origin: origin.to_string(),
        message: format!("missing `{what}`"),
    };
    let index = index.ok_or_else(|| missing("index"))?;
    let target = target.ok_or_else(|| missing("target"))?;
    let width = width.unwrap_or(1);
    let mut tuples: Vec<Option<Vec<usize>>> = vec![None; index.size()];
    for (ln, i, t) in rows {
        let slot = tuples
            .get_mut(i)
            .ok_or_else(|| ParseError::at(origin, ln, format!("index {i} is outside the index structure")))?;
        if slot.replace(t).is_some() {
            return Err(ParseError::at(origin, ln, format!("index {i} given twice")));
        }
    }
    let tuples = tuples
        .into_iter()
        .enumerate()
        .map(|(i, t)| t.ok_or_else(|| missing(&format!("tuple {i}"))))
        .collect::<Result<Vec<_>, _>>()?;
    let seq = IndexedSequence::new(index, Arc::new(target), width, tuples).map_err(|e| ParseError::File {
        origin: origin.to_string(),
        message: e.to_string(),
    })?;
    Ok((name.unwrap_or_else(|| "sequence".into()), seq))
}

pub fn load_sequence(path: &Path) -> Result<(String, IndexedSequence), ParseError> {
    parse_sequence(&read(path)?, &path.display().to_string(), path)
}

/// A self-contained sequence file with both structures inline.
pub fn serialize_sequence(name: &str, seq: &IndexedSequence) -> String {
    let mut out = custom_signature_lines([seq.index().signature().as_ref(), seq.target().signature().as_ref()]);
    writeln!(out, "sequence {name}").unwrap();
    writeln!(out, "index inline {}", seq.index().signature().name()).unwrap();
    out.push_str(&body_lines(seq.index()));
    writeln!(out, "end").unwrap();
    writeln!(out, "target inline {}", seq.target().signature().name()).unwrap();
    out.push_str(&body_lines(seq.target()));
    writeln!(out, "end").unwrap();
    writeln!(out, "width {}", seq.width()).unwrap();
    for (i, t) in seq.tuples().iter().enumerate() {
        let elems: Vec<String> = t.iter().map(|x| x.to_string()).collect();
        writeln!(out, "tuple {i} : {}", elems.join(" ")).unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use ramsey_core::families::{linear_order, successor_chain};

    const LO3: &str = "structure LO3 : order\ndomain 3\nlt : (0,1) (0,2) (1,2)\n";

    #[test]
    fn reads_builtin_signature() {
        let s = parse_structure(LO3, "lo3").unwrap();
        assert_eq!(s.name, "LO3");
        assert_eq!(s.structure, linear_order(3));
    }

    #[test]
    fn out_of_range_reports_line() {
        let err = parse_structure("# LO\nstructure X : order\ndomain 3\nlt : (0,5)\n", "bad").unwrap_err();
        assert_eq!(err.to_string(), "bad:4: element 5 is outside the domain of size 3");
    }

    #[test]
    fn partial_functions_round_trip() {
        let chain = successor_chain(10);
        let text = serialize_structure("chain10", &chain);
        let back = parse_structure(&text, "chain").unwrap();
        assert_eq!(back.structure, chain);
        assert_eq!(back.name, "chain10");
        assert_eq!(back.structure.function_len(0), 9);
    }

    #[test]
    fn custom_signature_with_constants() {
        let text = "signature pointed\nrelation R 3\nfunction f 2\nconstant c\nstructure P : pointed\ndomain 2\nR : (0,1,0)\nf : 0,1->1 1,1->0\nc = 1\n";
        let p = parse_structure(text, "p").unwrap();
        assert_eq!(p.structure.constant(0), 1);
        assert_eq!(p.structure.apply(0, &[0, 1]), Some(1));
        assert_eq!(parse_structure(&serialize_structure("P", &p.structure), "p2").unwrap().structure, p.structure);
        let doubled = "signature s\nfunction f 1\nstructure X : s\ndomain 2\nf : 0->1 0->0\n";
        assert!(parse_structure(doubled, "d").unwrap_err().to_string().contains(":5:"));
    }
}
