use super::ast::{Formula, Term};
use super::diagnostic::ParseDiagnostic;
use super::lexer::{tokenize, Tok, Token};

/// Unbound identifiers of this shape (`x`, `y1`, `u`, ...) are read as free
/// variables; every other unbound identifier is a constant.
pub fn is_free_variable_name(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some('u'..='z')) && chars.all(|c| c.is_ascii_digit())
}

/// Parses one formula written in the ASCII (`all x.`, `-`, `&`, `|`, `->`,
/// `<->`) or Unicode (`∀`, `∃`, `¬`, `∧`, `∨`, `⊕`, `→`, `↔`) notation, or a
/// mixture of both.
///
/// Precedence from tightest: negation, conjunction, disjunction and
/// exclusive-or, implication (right associative), biconditional. A quantifier
/// body extends as far right as possible.
pub fn parse_formula(input: &str) -> Result<Formula, Vec<ParseDiagnostic>> {
    let tokens = tokenize(input).map_err(|d| vec![d])?;
    let unbalanced = check_parens(input, &tokens);
    if !unbalanced.is_empty() {
        return Err(unbalanced);
    }
    let mut p = Parser { tokens, pos: 0, bound: Vec::new(), input_len: input.len() };
    let f = p.iff().map_err(|d| vec![d])?;
    let tok = p.peek();
    if tok.tok != Tok::Eof {
        return Err(vec![ParseDiagnostic::error(
            tok.start,
            input.len(),
            format!("unexpected {} after complete formula", tok.tok.describe()),
        )]);
    }
    Ok(f)
}

fn check_parens(input: &str, tokens: &[Token]) -> Vec<ParseDiagnostic> {
    let mut open: Vec<usize> = Vec::new();
    let mut diags = Vec::new();
    for (i, t) in tokens.iter().enumerate() {
        match t.tok {
            Tok::LParen => open.push(i),
            Tok::RParen => {
                if open.pop().is_none() {
                    diags.push(ParseDiagnostic::error(t.start, t.end, "unmatched `)`"));
                }
            }
            _ => {}
        }
    }
    for i in open {
        let t = &tokens[i];
        match i.checked_sub(1).map(|j| &tokens[j]) {
            Some(Token { tok: Tok::Ident(name), start, .. }) => diags.push(ParseDiagnostic::error(
                *start,
                input.len(),
                format!("unclosed argument list of `{name}`"),
            )),
            _ => diags.push(ParseDiagnostic::error(t.start, input.len(), "unclosed `(`")),
        }
    }
    diags.sort_by_key(|d| (d.start, d.end));
    diags
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    bound: Vec<String>,
    input_len: usize,
}

type PResult<T> = Result<T, ParseDiagnostic>;

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn peek_at(&self, offset: usize) -> &Tok {
        let i = (self.pos + offset).min(self.tokens.len() - 1);
        &self.tokens[i].tok
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos < self.tokens.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if &self.peek().tok == tok {
            self.bump();
            true
        } else {
            false
        }
    }

    fn unexpected(&self, expected: &str) -> ParseDiagnostic {
        let t = self.peek();
        let end = if t.tok == Tok::Eof { self.input_len } else { t.end };
        ParseDiagnostic::error(t.start, end, format!("expected {expected}, found {}", t.tok.describe()))
    }

    fn operand(&mut self, after: &Token, next: fn(&mut Self) -> PResult<Formula>) -> PResult<Formula> {
        if matches!(self.peek().tok, Tok::Eof | Tok::RParen) {
            return Err(ParseDiagnostic::error(
                after.start,
                after.end,
                format!("dangling {}: missing right operand", after.tok.describe()),
            ));
        }
        next(self)
    }

    fn iff(&mut self) -> PResult<Formula> {
        let mut lhs = self.implies()?;
        while self.peek().tok == Tok::Iff {
            let op = self.bump();
            let rhs = self.operand(&op, Self::implies)?;
            lhs = Formula::iff(lhs, rhs);
        }
        Ok(lhs)
    }

    fn implies(&mut self) -> PResult<Formula> {
        let lhs = self.or()?;
        if self.peek().tok == Tok::Implies {
            let op = self.bump();
            let rhs = self.operand(&op, Self::implies)?;
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> PResult<Formula> {
        let mut lhs = self.and()?;
        loop {
            match self.peek().tok {
                Tok::Or => {
                    let op = self.bump();
                    let rhs = self.operand(&op, Self::and)?;
                    lhs = Formula::or(lhs, rhs);
                }
                Tok::Xor => {
                    let op = self.bump();
                    let rhs = self.operand(&op, Self::and)?;
                    lhs = Formula::xor(lhs, rhs);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn and(&mut self) -> PResult<Formula> {
        let mut lhs = self.unary()?;
        while self.peek().tok == Tok::And {
            let op = self.bump();
            let rhs = self.operand(&op, Self::unary)?;
            lhs = Formula::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult<Formula> {
        match self.peek().tok {
            Tok::Not => {
                let op = self.bump();
                let inner = self.operand(&op, Self::unary)?;
                Ok(Formula::not(inner))
            }
            Tok::All | Tok::Exists => self.quantifier(),
            _ => self.primary(),
        }
    }

    fn quantifier(&mut self) -> PResult<Formula> {
        let q = self.bump();
        // `all x y z. body` binds several variables when a dot follows the
        // run of identifiers; otherwise only the first identifier is bound.
        let mut run = 0;
        while matches!(self.peek_at(run), Tok::Ident(_)) {
            run += 1;
        }
        if run == 0 {
            return Err(self.unexpected("a variable after the quantifier"));
        }
        let count = if *self.peek_at(run) == Tok::Dot { run } else { 1 };
        let mut vars = Vec::with_capacity(count);
        for _ in 0..count {
            match self.bump().tok {
                Tok::Ident(v) => vars.push(v),
                _ => unreachable!("counted identifiers"),
            }
        }
        self.eat(&Tok::Dot);
        if matches!(self.peek().tok, Tok::Eof | Tok::RParen) {
            return Err(ParseDiagnostic::error(q.start, self.peek().start, "quantifier without a body"));
        }
        let depth = self.bound.len();
        self.bound.extend(vars.iter().cloned());
        let body = self.iff();
        self.bound.truncate(depth);
        let mut f = body?;
        for v in vars.into_iter().rev() {
            f = if q.tok == Tok::All { Formula::forall(v, f) } else { Formula::exists(v, f) };
        }
        Ok(f)
    }

    fn primary(&mut self) -> PResult<Formula> {
        match self.peek().tok.clone() {
            Tok::LParen => {
                self.bump();
                let f = self.iff()?;
                if !self.eat(&Tok::RParen) {
                    return Err(self.unexpected("`)`"));
                }
                Ok(f)
            }
            Tok::Ident(name) => {
                let start = self.bump();
                let args = if self.peek().tok == Tok::LParen { Some(self.arguments(&name, start.start)?) } else { None };
                match self.peek().tok {
                    Tok::Eq | Tok::Neq => {
                        let neq = self.bump().tok == Tok::Neq;
                        let lhs = self.make_term(name, args);
                        let rhs = self.term()?;
                        let eq = Formula::eq(lhs, rhs);
                        Ok(if neq { Formula::not(eq) } else { eq })
                    }
                    _ => Ok(Formula::Pred(name, args.unwrap_or_default())),
                }
            }
            _ => Err(self.unexpected("a formula")),
        }
    }

    fn arguments(&mut self, name: &str, start: usize) -> PResult<Vec<Term>> {
        let open = self.bump();
        if self.peek().tok == Tok::RParen {
            let close = self.bump();
            return Err(ParseDiagnostic::error(
                open.start,
                close.end,
                format!("empty argument list of `{name}`"),
            ));
        }
        let mut args = vec![self.term()?];
        loop {
            match self.peek().tok {
                Tok::Comma => {
                    self.bump();
                    args.push(self.term()?);
                }
                Tok::RParen => {
                    self.bump();
                    return Ok(args);
                }
                Tok::Eof => {
                    return Err(ParseDiagnostic::error(
                        start,
                        self.input_len,
                        format!("unclosed argument list of `{name}`"),
                    ))
                }
                _ => return Err(self.unexpected("`,` or `)` in argument list")),
            }
        }
    }

    fn term(&mut self) -> PResult<Term> {
        match self.peek().tok.clone() {
            Tok::Ident(name) => {
                let start = self.bump();
                let args = if self.peek().tok == Tok::LParen { Some(self.arguments(&name, start.start)?) } else { None };
                Ok(self.make_term(name, args))
            }
            _ => Err(self.unexpected("a term")),
        }
    }

    fn make_term(&self, name: String, args: Option<Vec<Term>>) -> Term {
        match args {
            Some(args) => Term::App(name, args),
            None if self.bound.iter().any(|b| *b == name) => Term::Var(name),
            None if is_free_variable_name(&name) => Term::Var(name),
            None => Term::Const(name),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::alpha_equal;

    fn p(s: &str) -> Formula {
        parse_formula(s).unwrap_or_else(|e| panic!("{s}: {e:?}"))
    }

    fn atom(n: &str, args: &[&str]) -> Formula {
        Formula::pred(
            n,
            args.iter()
                .map(|a| if is_free_variable_name(a) { Term::var(*a) } else { Term::cnst(*a) })
                .collect(),
        )
    }

    #[test]
    fn ascii_universal_implication() {
        let f = p("all x. (Dispensable(x) -> EnvironmentFriendly(x))");
        let expected = Formula::forall(
            "x",
            Formula::implies(atom("Dispensable", &["x"]), atom("EnvironmentFriendly", &["x"])),
        );
        assert_eq!(f, expected);
    }

    #[test]
    fn unicode_without_dot_and_precedence() {
        let f = p("∀x (Year(x) ∧ Before2016(x) ⇒ ¬AlignHighSchool(x))");
        let expected = Formula::forall(
            "x",
            Formula::implies(
                Formula::and(atom("Year", &["x"]), atom("Before2016", &["x"])),
                Formula::not(atom("AlignHighSchool", &["x"])),
            ),
        );
        assert_eq!(f, expected);
    }

    #[test]
    fn unclosed_application() {
        let err = parse_formula("P(a").unwrap_err();
        assert_eq!(err.len(), 1);
        assert!(err[0].is_error());
        assert_eq!((err[0].start, err[0].end), (0, 3));
    }

    #[test]
    fn dangling_connective() {
        let err = parse_formula("P(a) &").unwrap_err();
        assert_eq!((err[0].start, err[0].end), (5, 6));
        assert!(err[0].message.contains("dangling"));
    }

    #[test]
    fn empty_argument_list() {
        let err = parse_formula("P()").unwrap_err();
        assert_eq!((err[0].start, err[0].end), (1, 3));
    }

    #[test]
    fn unmatched_close() {
        let err = parse_formula("P(a))").unwrap_err();
        assert_eq!((err[0].start, err[0].end), (4, 5));
    }

    #[test]
    fn implication_is_right_associative() {
        assert_eq!(p("A -> B -> C"), Formula::implies(Formula::prop("A"), Formula::implies(Formula::prop("B"), Formula::prop("C"))));
    }

    #[test]
    fn precedence_ladder() {
        // ¬ > ∧ > ∨ > → > ↔
        let f = p("-A & B | C -> D <-> E");
        let expected = Formula::iff(
            Formula::implies(
                Formula::or(Formula::and(Formula::not(Formula::prop("A")), Formula::prop("B")), Formula::prop("C")),
                Formula::prop("D"),
            ),
            Formula::prop("E"),
        );
        assert_eq!(f, expected);
    }

    #[test]
    fn quantifier_body_is_maximal() {
        let f = p("all x. P(x) & Q(x)");
        assert_eq!(f, Formula::forall("x", Formula::and(atom("P", &["x"]), atom("Q", &["x"]))));
    }

    #[test]
    fn multi_variable_quantifier() {
        assert!(alpha_equal(&p("all x y. R(x, y)"), &p("all x. all y. R(x, y)")));
        assert!(alpha_equal(&p("∀x ∀y R(x, y)"), &p("all x. all y. R(x, y)")));
    }

    #[test]
    fn identifier_classification() {
        // bound -> variable; unbound multi-letter -> constant; unbound x -> free variable
        let f = p("all foo. R(foo, sat, y)");
        assert_eq!(
            f,
            Formula::forall(
                "foo",
                Formula::pred("R", vec![Term::var("foo"), Term::cnst("sat"), Term::var("y")])
            )
        );
        assert_eq!(f.free_vars(), vec!["y".to_string()]);
    }

    #[test]
    fn function_terms_and_equality() {
        let f = p("f(a) = b & c != g(d, e)");
        let expected = Formula::and(
            Formula::eq(Term::app("f", vec![Term::cnst("a")]), Term::cnst("b")),
            Formula::not(Formula::eq(Term::cnst("c"), Term::app("g", vec![Term::cnst("d"), Term::cnst("e")]))),
        );
        assert_eq!(f, expected);
    }

    #[test]
    fn negation_spellings_agree() {
        let a = p("-P(a)");
        assert_eq!(a, p("¬P(a)"));
        assert_eq!(a, p("~P(a)"));
        assert_eq!(a, p("!P(a)"));
    }

    #[test]
    fn xor_is_first_class() {
        assert_eq!(p("A(c) ⊕ B(c)"), Formula::xor(atom("A", &["c"]), atom("B", &["c"])));
    }

    #[test]
    fn propositions_have_arity_zero() {
        assert_eq!(p("Rain -> Wet"), Formula::implies(Formula::prop("Rain"), Formula::prop("Wet")));
    }
}
