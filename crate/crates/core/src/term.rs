//! Terms over a signature, evaluated in structures with partial functions.

use std::fmt;

use crate::structure::{Signature, Structure};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Var(usize),
    Const(usize),
    Apply(usize, Vec<Term>),
}

impl Term {
    /// Value under the assignment `env`; `None` if some function along the
    /// way is undefined or a variable is unbound.
    pub fn eval(&self, m: &Structure, env: &[usize]) -> Option<usize> {
        match self {
            Term::Var(i) => env.get(*i).copied(),
            Term::Const(c) => Some(m.constant(*c)),
            Term::Apply(f, args) => {
                let vals: Option<Vec<usize>> = args.iter().map(|a| a.eval(m, env)).collect();
                m.apply(*f, &vals?)
            }
        }
    }

    /// One more than the largest variable index, or 0 for closed terms.
    pub fn var_bound(&self) -> usize {
        match self {
            Term::Var(i) => i + 1,
            Term::Const(_) => 0,
            Term::Apply(_, args) => args.iter().map(Term::var_bound).max().unwrap_or(0),
        }
    }

    pub fn display<'a>(&'a self, sig: &'a Signature, vars: &'a [String]) -> TermDisplay<'a> {
        TermDisplay { term: self, sig, vars }
    }
}

/// Evaluates a tuple of terms; `None` if any component is undefined.
pub fn eval_tuple(terms: &[Term], m: &Structure, env: &[usize]) -> Option<Vec<usize>> {
    terms.iter().map(|t| t.eval(m, env)).collect()
}

pub struct TermDisplay<'a> {
    term: &'a Term,
    sig: &'a Signature,
    vars: &'a [String],
}

impl fmt::Display for TermDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.term {
            Term::Var(i) => match self.vars.get(*i) {
                Some(name) => write!(f, "{name}"),
                None => write!(f, "x{i}"),
            },
            Term::Const(c) => write!(f, "{}", self.sig.constants()[*c]),
            Term::Apply(g, args) => {
                write!(f, "{}(", self.sig.functions()[*g].name)?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{}", a.display(self.sig, self.vars))?;
                }
                write!(f, ")")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families;

    #[test]
    fn partial_evaluation() {
        let chain = families::successor_chain(4);
        let ss = Term::Apply(0, vec![Term::Apply(0, vec![Term::Var(0)])]);
        assert_eq!(ss.eval(&chain, &[1]), Some(3));
        assert_eq!(ss.eval(&chain, &[2]), None);
        assert_eq!(ss.var_bound(), 1);
        assert_eq!(ss.display(chain.signature(), &["x".into()]).to_string(), "s(s(x))");
    }
}
