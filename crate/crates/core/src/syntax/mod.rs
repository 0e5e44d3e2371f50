//! First-order formulas: abstract syntax, a parser accepting both the ASCII
//! and the Unicode notation, a deterministic renderer, and alpha-equivalence.

mod ast;
mod diagnostic;
mod lexer;
mod parser;
mod render;

pub use ast::{alpha_equal, Connective, Formula, Term};
pub use diagnostic::{ParseDiagnostic, Severity};
pub use parser::{is_free_variable_name, parse_formula};
pub use render::{render, Dialect};

/// Replaces every exclusive-or node by its either/or expansion. Rendering in
/// the ASCII dialect produces exactly this shape.
pub fn expand_xor(f: &Formula) -> Formula {
    match f {
        Formula::Pred(..) | Formula::Eq(..) => f.clone(),
        Formula::Not(g) => Formula::not(expand_xor(g)),
        Formula::ForAll(v, g) => Formula::forall(v.clone(), expand_xor(g)),
        Formula::Exists(v, g) => Formula::exists(v.clone(), expand_xor(g)),
        Formula::Xor(l, r) => {
            let (l, r) = (expand_xor(l), expand_xor(r));
            Formula::or(
                Formula::and(l.clone(), Formula::not(r.clone())),
                Formula::and(Formula::not(l), r),
            )
        }
        _ => {
            let (op, l, r) = f.as_binary().expect("binary");
            Formula::binary(op, expand_xor(l), expand_xor(r))
        }
    }
}
