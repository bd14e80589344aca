//! First-order formulas over a finite structure, with a small text syntax.
//!
//! ```text
//! formula := [x, y, ...] body | body
//! body    := imp
//! imp     := or ( ("->" | "→") imp )?
//! or      := and ( ("|" | "∨") and )*
//! and     := unary ( ("&" | "∧") unary )*
//! unary   := ("!" | "¬") unary
//!          | ("exists" | "forall" | "∃" | "∀") var "." imp
//!          | "(" body ")" | "true" | "false"
//!          | Rel "(" term, ... ")" | term ("=" | "!=" | "≠") term
//! term    := var | const | fun "(" term, ... ")"
//! ```
//!
//! A quantifier scopes as far right as possible. Free variables are the
//! bracketed list, or else every unbound variable in order of first
//! appearance.

use std::fmt;

use thiserror::Error;

use crate::structure::{Signature, Structure};
use crate::term::Term;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    True,
    False,
    Rel(usize, Vec<Term>),
    Eq(Term, Term),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Exists(usize, Box<Formula>),
    Forall(usize, Box<Formula>),
}

impl Formula {
    /// Truth in `m` under `env`, which must cover every variable index.
    /// Atoms with an undefined term are false.
    pub fn holds(&self, m: &Structure, env: &mut [usize]) -> bool {
        match self {
            Formula::True => true,
            Formula::False => false,
            Formula::Rel(r, args) => {
                let vals: Option<Vec<usize>> = args.iter().map(|t| t.eval(m, env)).collect();
                vals.is_some_and(|v| m.holds(*r, &v))
            }
            Formula::Eq(s, t) => match (s.eval(m, env), t.eval(m, env)) {
                (Some(a), Some(b)) => a == b,
                _ => false,
            },
            Formula::Not(f) => !f.holds(m, env),
            Formula::And(fs) => fs.iter().all(|f| f.holds(m, env)),
            Formula::Or(fs) => fs.iter().any(|f| f.holds(m, env)),
            Formula::Implies(a, b) => !a.holds(m, env) || b.holds(m, env),
            Formula::Exists(v, f) => {
                let saved = env[*v];
                let found = m.domain().any(|x| {
                    env[*v] = x;
                    f.holds(m, env)
                });
                env[*v] = saved;
                found
            }
            Formula::Forall(v, f) => {
                let saved = env[*v];
                let all = m.domain().all(|x| {
                    env[*v] = x;
                    f.holds(m, env)
                });
                env[*v] = saved;
                all
            }
        }
    }
}

/// A formula with its free variables `0..arity`; bound variables use the
/// indices from `arity` up to `vars`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DeltaFormula {
    pub formula: Formula,
    pub arity: usize,
    pub vars: usize,
    pub text: String,
}

impl DeltaFormula {
    /// `M ⊨ φ(args)`; `args` must have length `arity`.
    pub fn eval(&self, m: &Structure, args: &[usize]) -> bool {
        debug_assert_eq!(args.len(), self.arity);
        let mut env = vec![0; self.vars.max(1)];
        env[..args.len()].copy_from_slice(args);
        self.formula.holds(m, &mut env)
    }
}

impl fmt::Display for DeltaFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("formula `{text}`, column {column}: {message}")]
pub struct FormulaError {
    pub text: String,
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Dot,
    Not,
    And,
    Or,
    Implies,
    Eq,
    Neq,
}

fn tokenize(text: &str) -> Result<Vec<(usize, Tok)>, (usize, String)> {
    let mut out = Vec::new();
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut i = 0;
    while i < chars.len() {
        let (col, c) = chars[i];
        let next = chars.get(i + 1).map(|&(_, c)| c);
        let tok = match c {
            c if c.is_whitespace() => {
                i += 1;
                continue;
            }
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '[' => Tok::LBracket,
            ']' => Tok::RBracket,
            ',' => Tok::Comma,
            '.' => Tok::Dot,
            '&' | '∧' => Tok::And,
            '|' | '∨' => Tok::Or,
            '→' => Tok::Implies,
            '=' => Tok::Eq,
            '≠' => Tok::Neq,
            '¬' => Tok::Not,
            '∃' => Tok::Ident("exists".into()),
            '∀' => Tok::Ident("forall".into()),
            '!' if next == Some('=') => {
                i += 1;
                Tok::Neq
            }
            '!' => Tok::Not,
            '-' if next == Some('>') => {
                i += 1;
                Tok::Implies
            }
            c if c.is_alphanumeric() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].1.is_alphanumeric() || chars[i].1 == '_' || chars[i].1 == '\'') {
                    i += 1;
                }
                let word: String = chars[start..i].iter().map(|&(_, c)| c).collect();
                out.push((col, Tok::Ident(word)));
                continue;
            }
            other => return Err((col, format!("unexpected character `{other}`"))),
        };
        out.push((col, tok));
        i += 1;
    }
    Ok(out)
}

struct Parser<'a> {
    sig: &'a Signature,
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
    /// Variable names in scope, innermost last, with their indices.
    scope: Vec<(String, usize)>,
    free: Vec<String>,
    declared: bool,
    bound_count: usize,
}

type PResult<T> = Result<T, (usize, String)>;

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn col(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(c, _)| *c)
    }

    fn err<T>(&self, msg: impl Into<String>) -> PResult<T> {
        Err((self.col(), msg.into()))
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == Some(t) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: Tok, what: &str) -> PResult<()> {
        if self.eat(&t) {
            Ok(())
        } else {
            self.err(format!("expected {what}"))
        }
    }

    fn ident(&mut self) -> PResult<String> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => self.err("expected a name"),
        }
    }

    fn implication(&mut self) -> PResult<Formula> {
        let lhs = self.disjunction()?;
        if self.eat(&Tok::Implies) {
            let rhs = self.implication()?;
            return Ok(Formula::Implies(Box::new(lhs), Box::new(rhs)));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> PResult<Formula> {
        let mut parts = vec![self.conjunction()?];
        while self.eat(&Tok::Or) {
            parts.push(self.conjunction()?);
        }
        Ok(if parts.len() == 1 { parts.pop().unwrap() } else { Formula::Or(parts) })
    }

    fn conjunction(&mut self) -> PResult<Formula> {
        let mut parts = vec![self.unary()?];
        while self.eat(&Tok::And) {
            parts.push(self.unary()?);
        }
        Ok(if parts.len() == 1 { parts.pop().unwrap() } else { Formula::And(parts) })
    }

    fn unary(&mut self) -> PResult<Formula> {
        if self.eat(&Tok::Not) {
            return Ok(Formula::Not(Box::new(self.unary()?)));
        }
        if self.eat(&Tok::LParen) {
            let f = self.implication()?;
            self.expect(Tok::RParen, "`)`")?;
            return Ok(f);
        }
        let Some(Tok::Ident(word)) = self.peek().cloned() else {
            return self.err("expected a formula");
        };
        match word.as_str() {
            "true" => {
                self.pos += 1;
                Ok(Formula::True)
            }
            "false" => {
                self.pos += 1;
                Ok(Formula::False)
            }
            "exists" | "forall" => {
                self.pos += 1;
                let name = self.ident()?;
                self.expect(Tok::Dot, "`.` after the quantified variable")?;
                let slot = self.bound_count;
                self.bound_count += 1;
                self.scope.push((name, usize::MAX - slot));
                let body = self.implication()?;
                self.scope.pop();
                let v = usize::MAX - slot;
                Ok(if word == "exists" {
                    Formula::Exists(v, Box::new(body))
                } else {
                    Formula::Forall(v, Box::new(body))
                })
            }
            _ => {
                if let Some(r) = self.sig.relation_index(&word) {
                    if self.toks.get(self.pos + 1).map(|(_, t)| t) == Some(&Tok::LParen) {
                        self.pos += 1;
                        let args = self.arguments()?;
                        let arity = self.sig.relations()[r].arity;
                        if args.len() != arity {
                            return self.err(format!("`{word}` takes {arity} arguments, got {}", args.len()));
                        }
                        return Ok(Formula::Rel(r, args));
                    }
                }
                let lhs = self.term()?;
                let negate = if self.eat(&Tok::Eq) {
                    false
                } else if self.eat(&Tok::Neq) {
                    true
                } else {
                    return self.err("expected `=` or `!=`");
                };
                let rhs = self.term()?;
                let atom = Formula::Eq(lhs, rhs);
                Ok(if negate { Formula::Not(Box::new(atom)) } else { atom })
            }
        }
    }

    fn arguments(&mut self) -> PResult<Vec<Term>> {
        self.expect(Tok::LParen, "`(`")?;
        let mut args = Vec::new();
        if self.eat(&Tok::RParen) {
            return Ok(args);
        }
        loop {
            args.push(self.term()?);
            if self.eat(&Tok::RParen) {
                return Ok(args);
            }
            self.expect(Tok::Comma, "`,` or `)`")?;
        }
    }

    fn term(&mut self) -> PResult<Term> {
        let name = self.ident()?;
        if let Some(f) = self.sig.function_index(&name) {
            let args = self.arguments()?;
            let arity = self.sig.functions()[f].arity;
            if args.len() != arity {
                return self.err(format!("`{name}` takes {arity} arguments, got {}", args.len()));
            }
            return Ok(Term::Apply(f, args));
        }
        if let Some((_, v)) = self.scope.iter().rev().find(|(n, _)| *n == name) {
            return Ok(Term::Var(*v));
        }
        if let Some(c) = self.sig.constant_index(&name) {
            return Ok(Term::Const(c));
        }
        if self.sig.relation_index(&name).is_some() {
            return self.err(format!("relation `{name}` used as a term"));
        }
        if let Some(i) = self.free.iter().position(|n| *n == name) {
            return Ok(Term::Var(i));
        }
        if self.declared {
            return self.err(format!("undeclared variable `{name}`"));
        }
        self.free.push(name);
        Ok(Term::Var(self.free.len() - 1))
    }
}

/// Bound variables are parsed with placeholder indices counting down from
/// `usize::MAX`; this moves them after the free variables.
fn renumber(f: &mut Formula, arity: usize) {
    fn term(t: &mut Term, arity: usize) {
        match t {
            Term::Var(v) if *v > usize::MAX / 2 => *v = arity + (usize::MAX - *v),
            Term::Apply(_, args) => args.iter_mut().for_each(|a| term(a, arity)),
            _ => {}
        }
    }
    fn var(v: &mut usize, arity: usize) {
        *v = arity + (usize::MAX - *v);
    }
    match f {
        Formula::True | Formula::False => {}
        Formula::Rel(_, args) => args.iter_mut().for_each(|a| term(a, arity)),
        Formula::Eq(a, b) => {
            term(a, arity);
            term(b, arity);
        }
        Formula::Not(g) => renumber(g, arity),
        Formula::And(gs) | Formula::Or(gs) => gs.iter_mut().for_each(|g| renumber(g, arity)),
        Formula::Implies(a, b) => {
            renumber(a, arity);
            renumber(b, arity);
        }
        Formula::Exists(v, g) | Formula::Forall(v, g) => {
            var(v, arity);
            renumber(g, arity);
        }
    }
}

pub fn parse_formula(sig: &Signature, text: &str) -> Result<DeltaFormula, FormulaError> {
    let fail = |(column, message): (usize, String)| FormulaError {
        text: text.to_string(),
        column,
        message,
    };
    let toks = tokenize(text).map_err(fail)?;
    let mut p = Parser {
        sig,
        toks,
        pos: 0,
        end: text.len(),
        scope: Vec::new(),
        free: Vec::new(),
        declared: false,
        bound_count: 0,
    };
    let mut run = || -> PResult<Formula> {
        if p.eat(&Tok::LBracket) {
            p.declared = true;
            if !p.eat(&Tok::RBracket) {
                loop {
                    let name = p.ident()?;
                    if p.free.contains(&name) {
                        return p.err(format!("variable `{name}` declared twice"));
                    }
                    p.free.push(name);
                    if p.eat(&Tok::RBracket) {
                        break;
                    }
                    p.expect(Tok::Comma, "`,` or `]`")?;
                }
            }
        }
        let f = p.implication()?;
        if p.pos != p.toks.len() {
            return p.err("unexpected trailing input");
        }
        Ok(f)
    };
    let mut formula = run().map_err(fail)?;
    let arity = p.free.len();
    renumber(&mut formula, arity);
    Ok(DeltaFormula {
        formula,
        arity,
        vars: arity + p.bound_count,
        text: text.trim().to_string(),
    })
}
