use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::ast::{Connective, Formula, Term};

/// Surface notation for rendering.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dialect {
    /// NLTK-style ASCII. Has no exclusive-or operator, so `⊕` is written out
    /// as its either/or expansion.
    #[default]
    Ascii,
    Unicode,
}

impl std::str::FromStr for Dialect {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "ascii" => Ok(Dialect::Ascii),
            "unicode" => Ok(Dialect::Unicode),
            other => Err(format!("unknown dialect `{other}` (expected ascii or unicode)")),
        }
    }
}

struct Symbols {
    not: &'static str,
    and: &'static str,
    or: &'static str,
    xor: &'static str,
    implies: &'static str,
    iff: &'static str,
    all: &'static str,
    exists: &'static str,
}

const ASCII: Symbols = Symbols {
    not: "-",
    and: "&",
    or: "|",
    xor: "",
    implies: "->",
    iff: "<->",
    all: "all ",
    exists: "exists ",
};

const UNICODE: Symbols = Symbols {
    not: "¬",
    and: "∧",
    or: "∨",
    xor: "⊕",
    implies: "→",
    iff: "↔",
    all: "∀",
    exists: "∃",
};

/// Renders a formula. Every binary connective is parenthesized, so the output
/// never depends on precedence rules; quantifier bodies are wrapped as in
/// `all x. (P(x))`.
pub fn render(f: &Formula, dialect: Dialect) -> String {
    let mut out = String::new();
    let syms = match dialect {
        Dialect::Ascii => &ASCII,
        Dialect::Unicode => &UNICODE,
    };
    write_formula(&mut out, f, syms, dialect);
    out
}

fn write_term(out: &mut String, t: &Term) {
    write!(out, "{t}").expect("string write");
}

fn write_formula(out: &mut String, f: &Formula, s: &Symbols, d: Dialect) {
    match f {
        Formula::Pred(name, args) => {
            out.push_str(name);
            if !args.is_empty() {
                out.push('(');
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    write_term(out, a);
                }
                out.push(')');
            }
        }
        Formula::Eq(l, r) => {
            write_term(out, l);
            out.push_str(" = ");
            write_term(out, r);
        }
        Formula::Not(g) => {
            out.push_str(s.not);
            write_operand(out, g, s, d);
        }
        Formula::Xor(l, r) if d == Dialect::Ascii => {
            let expanded = Formula::or(
                Formula::and((**l).clone(), Formula::not((**r).clone())),
                Formula::and(Formula::not((**l).clone()), (**r).clone()),
            );
            write_formula(out, &expanded, s, d);
        }
        Formula::ForAll(v, body) | Formula::Exists(v, body) => {
            out.push_str(if matches!(f, Formula::ForAll(..)) { s.all } else { s.exists });
            out.push_str(v);
            out.push_str(". ");
            if body.is_quantifier() || body.as_binary().is_some() {
                write_formula(out, body, s, d);
            } else {
                out.push('(');
                write_formula(out, body, s, d);
                out.push(')');
            }
        }
        _ => {
            let (op, l, r) = f.as_binary().expect("binary");
            let sym = match op {
                Connective::And => s.and,
                Connective::Or => s.or,
                Connective::Xor => s.xor,
                Connective::Implies => s.implies,
                Connective::Iff => s.iff,
            };
            out.push('(');
            write_operand(out, l, s, d);
            out.push(' ');
            out.push_str(sym);
            out.push(' ');
            write_operand(out, r, s, d);
            out.push(')');
        }
    }
}

fn write_operand(out: &mut String, f: &Formula, s: &Symbols, d: Dialect) {
    if f.is_quantifier() {
        out.push('(');
        write_formula(out, f, s, d);
        out.push(')');
    } else {
        write_formula(out, f, s, d);
    }
}
