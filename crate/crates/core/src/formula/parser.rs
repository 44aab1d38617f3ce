//! Recursive-descent parser for the ASCII formula syntax.
//!
//! ```text
//! phi ::= ident | '~' ident | IDENT | phi '&' phi | phi '|' phi
//!       | '<' nat '>' phi | '[' nat ']' phi | '<>' phi | '[]' phi
//!       | 'mu' IDENT '.' phi | 'nu' IDENT '.' phi | '(' phi ')'
//! ```
//!
//! Propositions start lowercase, variables uppercase. `&` binds tighter than
//! `|`, both associate to the left, and a fixpoint body extends as far right
//! as possible.

use thiserror::Error;

use super::{well_name, Formula};

/// Largest grade accepted in `<k>` / `[k]`.
pub const MAX_GRADE: u32 = i32::MAX as u32;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("syntax error at byte {pos}: {message}")]
pub struct ParseError {
    pub pos: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Lower(String),
    Upper(String),
    Nat(u64),
    Mu,
    Nu,
    Tilde,
    Amp,
    Bar,
    Dot,
    LParen,
    RParen,
    LAngle,
    RAngle,
    LBrack,
    RBrack,
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let simple = match c {
            '~' => Some(Tok::Tilde),
            '&' => Some(Tok::Amp),
            '|' => Some(Tok::Bar),
            '.' => Some(Tok::Dot),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            '<' => Some(Tok::LAngle),
            '>' => Some(Tok::RAngle),
            '[' => Some(Tok::LBrack),
            ']' => Some(Tok::RBrack),
            _ => None,
        };
        if let Some(t) = simple {
            out.push((start, t));
            i += 1;
            continue;
        }
        if c.is_ascii_digit() {
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let n = text[start..i]
                .parse::<u64>()
                .map_err(|_| ParseError { pos: start, message: "grade out of range".into() })?;
            out.push((start, Tok::Nat(n)));
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            let word = &text[start..i];
            let tok = match word {
                "mu" => Tok::Mu,
                "nu" => Tok::Nu,
                w if w.starts_with(|c: char| c.is_ascii_uppercase()) => Tok::Upper(w.to_owned()),
                w if w.starts_with(|c: char| c.is_ascii_lowercase()) => Tok::Lower(w.to_owned()),
                _ => {
                    return Err(ParseError {
                        pos: start,
                        message: format!("identifier `{word}` must start with a letter"),
                    })
                }
            };
            out.push((start, tok));
            continue;
        }
        return Err(ParseError { pos: start, message: format!("unexpected character `{c}`") });
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map(|(p, _)| *p).unwrap_or(self.end)
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError { pos: self.offset(), message: message.into() })
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(_, t)| t.clone());
        self.pos += 1;
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), ParseError> {
        if self.peek() == Some(&want) {
            self.pos += 1;
            Ok(())
        } else {
            self.err(format!("expected {what}"))
        }
    }

    fn disjunction(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.conjunction()?;
        while self.peek() == Some(&Tok::Bar) {
            self.pos += 1;
            let rhs = self.conjunction()?;
            lhs = Formula::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn conjunction(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.unary()?;
        while self.peek() == Some(&Tok::Amp) {
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = Formula::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn grade(&mut self, close: Tok, what: &str) -> Result<u32, ParseError> {
        if self.peek() == Some(&close) {
            self.pos += 1;
            return Ok(1);
        }
        let at = self.offset();
        let n = match self.bump() {
            Some(Tok::Nat(n)) => n,
            _ => return Err(ParseError { pos: at, message: format!("expected grade or `{what}`") }),
        };
        if n == 0 {
            return Err(ParseError { pos: at, message: "grade must be at least 1".into() });
        }
        if n > u64::from(MAX_GRADE) {
            return Err(ParseError { pos: at, message: format!("grade exceeds {MAX_GRADE}") });
        }
        self.expect(close, &format!("`{what}`"))?;
        Ok(n as u32)
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        match self.peek().cloned() {
            Some(Tok::Lower(p)) => {
                self.pos += 1;
                Ok(Formula::Prop(p))
            }
            Some(Tok::Upper(x)) => {
                self.pos += 1;
                Ok(Formula::Var(x))
            }
            Some(Tok::Tilde) => {
                self.pos += 1;
                match self.peek().cloned() {
                    Some(Tok::Lower(p)) => {
                        self.pos += 1;
                        Ok(Formula::NegProp(p))
                    }
                    _ => self.err("negation may only be applied to a proposition symbol"),
                }
            }
            Some(Tok::LAngle) => {
                self.pos += 1;
                let k = self.grade(Tok::RAngle, ">")?;
                Ok(Formula::at_least(k, self.unary()?))
            }
            Some(Tok::LBrack) => {
                self.pos += 1;
                let k = self.grade(Tok::RBrack, "]")?;
                Ok(Formula::all_but(k, self.unary()?))
            }
            Some(t @ (Tok::Mu | Tok::Nu)) => {
                self.pos += 1;
                let x = match self.bump() {
                    Some(Tok::Upper(x)) => x,
                    _ => {
                        self.pos -= 1;
                        return self.err("expected an uppercase variable after the fixpoint binder");
                    }
                };
                self.expect(Tok::Dot, "`.`")?;
                let body = self.disjunction()?;
                Ok(if t == Tok::Mu { Formula::Mu(x, Box::new(body)) } else { Formula::Nu(x, Box::new(body)) })
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let inner = self.disjunction()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(inner)
            }
            Some(_) => self.err("expected a formula"),
            None => self.err("unexpected end of input"),
        }
    }
}

/// Parse concrete syntax into a formula exactly as written (no renaming).
pub(crate) fn parse_raw(text: &str) -> Result<Formula, ParseError> {
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0, end: text.len() };
    let f = p.disjunction()?;
    if p.pos < p.toks.len() {
        return p.err("trailing input");
    }
    Ok(f)
}

/// Parse concrete syntax. Bound variables are renamed if needed so that the
/// result is well-named.
pub fn parse(text: &str) -> Result<Formula, ParseError> {
    parse_raw(text).map(|f| well_name(&f))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reachability() {
        let f = parse("mu X.(p | <>X)").unwrap();
        assert_eq!(f, Formula::mu("X", Formula::or(Formula::prop("p"), Formula::diamond(Formula::var("X")))));
    }

    #[test]
    fn nested_alternation_example() {
        let f = parse("mu Y.((p | <>Y) | mu X.(q & <>(Y | <>X)))").unwrap();
        let expected = Formula::mu(
            "Y",
            Formula::or(
                Formula::or(Formula::prop("p"), Formula::diamond(Formula::var("Y"))),
                Formula::mu(
                    "X",
                    Formula::and(
                        Formula::prop("q"),
                        Formula::diamond(Formula::or(Formula::var("Y"), Formula::diamond(Formula::var("X")))),
                    ),
                ),
            ),
        );
        assert_eq!(f, expected);
    }

    #[test]
    fn negated_compound_is_rejected() {
        let e = parse("~(p & q)").unwrap_err();
        assert_eq!(e.pos, 1);
        assert!(parse("~X").is_err());
        assert_eq!(parse("~p").unwrap(), Formula::neg_prop("p"));
    }

    #[test]
    fn grades() {
        assert_eq!(parse("<3>p").unwrap(), Formula::at_least(3, Formula::prop("p")));
        assert_eq!(parse("[2]~p").unwrap(), Formula::all_but(2, Formula::neg_prop("p")));
        assert_eq!(parse("[]p").unwrap(), Formula::boxed(Formula::prop("p")));
        assert!(parse("<0>p").is_err());
        assert!(parse("[0]p").is_err());
        assert!(parse("<2147483647>p").is_ok());
        assert!(parse("<2147483648>p").is_err());
        assert!(parse("<99999999999999999999999>p").is_err());
    }

    #[test]
    fn precedence_and_scope() {
        assert_eq!(
            parse("p | q & r").unwrap(),
            Formula::or(Formula::prop("p"), Formula::and(Formula::prop("q"), Formula::prop("r")))
        );
        // fixpoint body extends maximally right
        assert_eq!(parse("mu X.p | X").unwrap(), Formula::mu("X", Formula::or(Formula::prop("p"), Formula::var("X"))));
        // modalities bind to the next unary operand
        assert_eq!(parse("<>p & q").unwrap(), Formula::and(Formula::diamond(Formula::prop("p")), Formula::prop("q")));
    }

    #[test]
    fn errors() {
        assert!(parse("p |").is_err());
        assert!(parse("").is_err());
        assert!(parse("(p").is_err());
        assert!(parse("p q").is_err());
        assert!(parse("mu x.p").is_err());
        assert!(parse("mu X p").is_err());
        assert!(parse("p # q").is_err());
    }

    #[test]
    fn parse_well_names() {
        assert_eq!(parse("(mu X.<>X) | (mu X.p)").unwrap(), parse_raw("(mu X.<>X) | (mu X1.p)").unwrap());
    }
}
