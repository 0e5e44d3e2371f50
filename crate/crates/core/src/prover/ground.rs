use std::collections::BTreeSet;

use crate::clausify::{Clause, Literal};
use crate::syntax::Term;

/// Every instance of a function-free clause set over its constants (one
/// placeholder constant if there are none). `None` when a function symbol
/// occurs, when there are more than `cap` instances, or when `cap` is zero.
pub fn herbrand_instances(clauses: &[Clause], cap: usize) -> Option<Vec<Clause>> {
    if cap == 0 {
        return None;
    }
    let mut constants = BTreeSet::new();
    for l in clauses.iter().flat_map(|c| &c.literals) {
        for t in &l.atom.args {
            match t {
                Term::Const(c) => {
                    constants.insert(c.clone());
                }
                Term::Var(_) => {}
                Term::App(..) => return None,
            }
        }
    }
    if constants.is_empty() {
        constants.insert("c0".to_string());
    }
    let constants: Vec<String> = constants.into_iter().collect();
    let mut out = Vec::new();
    for c in clauses {
        let vars: BTreeSet<&str> = c
            .literals
            .iter()
            .flat_map(|l| &l.atom.args)
            .filter_map(|t| match t {
                Term::Var(v) => Some(v.as_str()),
                _ => None,
            })
            .collect();
        let vars: Vec<&str> = vars.into_iter().collect();
        let count = u32::try_from(vars.len()).ok().and_then(|n| constants.len().checked_pow(n))?;
        if out.len() + count > cap {
            return None;
        }
        let mut choice = vec![0usize; vars.len()];
        loop {
            let bind = |t: &Term| match t {
                Term::Var(v) => Term::Const(constants[choice[vars.iter().position(|w| w == v).expect("collected")]].clone()),
                other => other.clone(),
            };
            let literals = c
                .literals
                .iter()
                .map(|l| {
                    let mut l: Literal = l.clone();
                    l.atom.args = l.atom.args.iter().map(bind).collect();
                    l
                })
                .collect();
            out.push(Clause::new(literals, c.origin));
            // Odometer over constant choices.
            let mut k = 0;
            while k < choice.len() {
                choice[k] += 1;
                if choice[k] < constants.len() {
                    break;
                }
                choice[k] = 0;
                k += 1;
            }
            if k == choice.len() {
                break;
            }
        }
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clausify::Origin;

    fn lit(p: &str, args: &[&str]) -> Literal {
        let t = |a: &&str| if a.chars().next().is_some_and(char::is_uppercase) { Term::var(*a) } else { Term::cnst(*a) };
        Literal::pos(p, args.iter().map(t).collect())
    }

    #[test]
    fn instances_over_constants() {
        let cs = vec![
            Clause::new(vec![lit("P", &["X", "Y"])], Origin::Premise(0)),
            Clause::new(vec![lit("Q", &["a"]), lit("Q", &["b"])], Origin::Premise(1)),
        ];
        let g = herbrand_instances(&cs, 100).unwrap();
        assert_eq!(g.len(), 5);
        assert!(g.iter().all(|c| c.literals.iter().all(|l| l.atom.args.iter().all(|t| matches!(t, Term::Const(_))))));
        assert!(herbrand_instances(&cs, 4).is_none());
        assert!(herbrand_instances(&cs, 0).is_none());
    }

    #[test]
    fn functions_are_not_grounded() {
        let f = Literal::pos("P", vec![Term::app("f", vec![Term::var("X")])]);
        assert!(herbrand_instances(&[Clause::new(vec![f], Origin::Conclusion)], 100).is_none());
    }

    #[test]
    fn placeholder_constant() {
        let g = herbrand_instances(&[Clause::new(vec![lit("P", &["X"])], Origin::Conclusion)], 10).unwrap();
        assert_eq!(g[0].literals[0].atom.args, vec![Term::cnst("c0")]);
    }
}
