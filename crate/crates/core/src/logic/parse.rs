//! Recursive-descent parser for the Slugs-style formula syntax.
//!
//! Precedence, loosest first: `<->`, `->` (right associative), `|`, `&`, `!`.
//! A trailing `'` marks a next-state atom.

use super::{Formula, LogicError};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Prime,
    Not,
    And,
    Or,
    Implies,
    Iff,
    LParen,
    RParen,
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, LogicError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        let start = i;
        match c {
            ' ' | '\t' | '\n' | '\r' => {
                i += 1;
                continue;
            }
            '\'' => out.push((start, Tok::Prime)),
            '!' => out.push((start, Tok::Not)),
            '&' => out.push((start, Tok::And)),
            '|' => out.push((start, Tok::Or)),
            '(' => out.push((start, Tok::LParen)),
            ')' => out.push((start, Tok::RParen)),
            '-' if text[i..].starts_with("->") => {
                out.push((start, Tok::Implies));
                i += 2;
                continue;
            }
            '<' if text[i..].starts_with("<->") => {
                out.push((start, Tok::Iff));
                i += 3;
                continue;
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((start, Tok::Ident(text[start..i].to_string())));
                continue;
            }
            other => {
                return Err(LogicError::Syntax {
                    position: start,
                    message: format!("unexpected character '{other}'"),
                })
            }
        }
        i += 1;
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
    known: &'a dyn Fn(&str) -> bool,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map(|(o, _)| *o).unwrap_or(self.end)
    }

    fn syntax<T>(&self, message: impl Into<String>) -> Result<T, LogicError> {
        Err(LogicError::Syntax {
            position: self.offset(),
            message: message.into(),
        })
    }

    fn iff(&mut self) -> Result<Formula, LogicError> {
        let mut lhs = self.implies()?;
        while self.peek() == Some(&Tok::Iff) {
            self.pos += 1;
            let rhs = self.implies()?;
            lhs = Formula::iff(lhs, rhs);
        }
        Ok(lhs)
    }

    fn implies(&mut self) -> Result<Formula, LogicError> {
        let lhs = self.or()?;
        if self.peek() == Some(&Tok::Implies) {
            self.pos += 1;
            let rhs = self.implies()?;
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> Result<Formula, LogicError> {
        let mut lhs = self.and()?;
        while self.peek() == Some(&Tok::Or) {
            self.pos += 1;
            let rhs = self.and()?;
            lhs = Formula::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Formula, LogicError> {
        let mut lhs = self.unary()?;
        while self.peek() == Some(&Tok::And) {
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = Formula::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula, LogicError> {
        match self.peek().cloned() {
            Some(Tok::Not) => {
                self.pos += 1;
                Ok(Formula::not(self.unary()?))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let inner = self.iff()?;
                if self.peek() != Some(&Tok::RParen) {
                    return self.syntax("expected ')'");
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(Tok::Ident(name)) => {
                let at = self.offset();
                self.pos += 1;
                match name.as_str() {
                    "TRUE" | "true" => return Ok(Formula::True),
                    "FALSE" | "false" => return Ok(Formula::False),
                    _ => {}
                }
                if !(self.known)(&name) {
                    return Err(LogicError::UnknownProposition { name, position: at });
                }
                if self.peek() == Some(&Tok::Prime) {
                    self.pos += 1;
                    Ok(Formula::Next(name))
                } else {
                    Ok(Formula::Atom(name))
                }
            }
            Some(tok) => self.syntax(format!("unexpected token {tok:?}")),
            None => self.syntax("unexpected end of formula"),
        }
    }
}

/// Parses `text`, accepting only names for which `known` returns true.
pub fn parse_with(text: &str, known: &dyn Fn(&str) -> bool) -> Result<Formula, LogicError> {
    let toks = lex(text)?;
    let mut parser = Parser {
        toks,
        pos: 0,
        end: text.len(),
        known,
    };
    let formula = parser.iff()?;
    match parser.peek() {
        None => Ok(formula),
        Some(Tok::Ident(word)) if word == "U" => Err(LogicError::UntilNotAllowed {
            position: parser.offset(),
        }),
        Some(_) => parser.syntax("trailing input after formula"),
    }
}

/// Parses without checking proposition names.
pub fn parse_unchecked(text: &str) -> Result<Formula, LogicError> {
    parse_with(text, &|_| true)
}
