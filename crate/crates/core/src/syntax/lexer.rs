use super::diagnostic::ParseDiagnostic;

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Tok {
    Ident(String),
    LParen,
    RParen,
    Comma,
    Dot,
    Not,
    And,
    Or,
    Xor,
    Implies,
    Iff,
    All,
    Exists,
    Eq,
    Neq,
    Eof,
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Dot => "`.`".into(),
            Tok::Not => "negation".into(),
            Tok::And => "conjunction".into(),
            Tok::Or => "disjunction".into(),
            Tok::Xor => "exclusive-or".into(),
            Tok::Implies => "implication".into(),
            Tok::Iff => "biconditional".into(),
            Tok::All => "universal quantifier".into(),
            Tok::Exists => "existential quantifier".into(),
            Tok::Eq => "`=`".into(),
            Tok::Neq => "`!=`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Clone, Debug)]
pub(crate) struct Token {
    pub tok: Tok,
    pub start: usize,
    pub end: usize,
}

fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

pub(crate) fn tokenize(input: &str) -> Result<Vec<Token>, ParseDiagnostic> {
    let mut out = Vec::new();
    let mut iter = input.char_indices().peekable();
    while let Some(&(start, c)) = iter.peek() {
        if c.is_whitespace() {
            iter.next();
            continue;
        }
        if is_ident_char(c) {
            let mut end = start;
            while let Some(&(i, c)) = iter.peek() {
                if !is_ident_char(c) {
                    break;
                }
                end = i + c.len_utf8();
                iter.next();
            }
            let word = &input[start..end];
            let tok = match word {
                "all" | "forall" => Tok::All,
                "exists" => Tok::Exists,
                _ => Tok::Ident(word.to_string()),
            };
            out.push(Token { tok, start, end });
            continue;
        }
        iter.next();
        let rest = &input[start..];
        let (tok, len) = match c {
            '(' => (Tok::LParen, 1),
            ')' => (Tok::RParen, 1),
            ',' => (Tok::Comma, 1),
            '.' => (Tok::Dot, 1),
            '&' if rest.starts_with("&&") => (Tok::And, 2),
            '&' => (Tok::And, 1),
            '|' if rest.starts_with("||") => (Tok::Or, 2),
            '|' => (Tok::Or, 1),
            '-' if rest.starts_with("->") => (Tok::Implies, 2),
            '-' | '~' | '¬' => (Tok::Not, c.len_utf8()),
            '!' if rest.starts_with("!=") => (Tok::Neq, 2),
            '!' => (Tok::Not, 1),
            '=' if rest.starts_with("=>") => (Tok::Implies, 2),
            '=' => (Tok::Eq, 1),
            '<' if rest.starts_with("<->") => (Tok::Iff, 3),
            '<' if rest.starts_with("<=>") => (Tok::Iff, 3),
            '∧' => (Tok::And, c.len_utf8()),
            '∨' => (Tok::Or, c.len_utf8()),
            '⊕' => (Tok::Xor, c.len_utf8()),
            '→' | '⇒' => (Tok::Implies, c.len_utf8()),
            '↔' | '⇔' => (Tok::Iff, c.len_utf8()),
            '∀' => (Tok::All, c.len_utf8()),
            '∃' => (Tok::Exists, c.len_utf8()),
            '≠' => (Tok::Neq, c.len_utf8()),
            _ => {
                return Err(ParseDiagnostic::error(
                    start,
                    start + c.len_utf8(),
                    format!("unexpected character `{c}`"),
                ))
            }
        };
        // consume the remaining bytes of multi-character operators
        let end = start + len;
        while let Some(&(i, _)) = iter.peek() {
            if i >= end {
                break;
            }
            iter.next();
        }
        out.push(Token { tok, start, end });
    }
    out.push(Token { tok: Tok::Eof, start: input.len(), end: input.len() });
    Ok(out)
}
