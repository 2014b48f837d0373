//! Recursive-descent parser for the alpha grammar.

use super::{AlphaExpr, DslError};
use crate::signals::AliasTable;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Bracket(String),
    Plus,
    Minus,
    Star,
    Slash,
    LParen,
    RParen,
}

#[derive(Debug)]
struct Spanned {
    tok: Tok,
    pos: usize,
}

fn lex(text: &str) -> Result<Vec<Spanned>, DslError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' | '\r' | '\n' => i += 1,
            '+' => {
                out.push(Spanned { tok: Tok::Plus, pos: i });
                i += 1;
            }
            '-' => {
                out.push(Spanned { tok: Tok::Minus, pos: i });
                i += 1;
            }
            '*' => {
                out.push(Spanned { tok: Tok::Star, pos: i });
                i += 1;
            }
            '/' => {
                out.push(Spanned { tok: Tok::Slash, pos: i });
                i += 1;
            }
            '(' => {
                out.push(Spanned { tok: Tok::LParen, pos: i });
                i += 1;
            }
            ')' => {
                out.push(Spanned { tok: Tok::RParen, pos: i });
                i += 1;
            }
            '[' => {
                let start = i;
                let close = text[i + 1..].find(']').ok_or_else(|| DslError::Syntax {
                    position: text.len(),
                    message: "unterminated '[' bracket".to_string(),
                })?;
                let name = text[i + 1..i + 1 + close].trim().to_string();
                if name.is_empty() {
                    return Err(DslError::Syntax {
                        position: start,
                        message: "empty bracketed name".to_string(),
                    });
                }
                out.push(Spanned { tok: Tok::Bracket(name), pos: start });
                i += close + 2;
            }
            '0'..='9' | '.' => {
                let start = i;
                while i < bytes.len() && (bytes[i] as char).is_ascii_digit() {
                    i += 1;
                }
                if i < bytes.len() && bytes[i] == b'.' {
                    i += 1;
                    while i < bytes.len() && (bytes[i] as char).is_ascii_digit() {
                        i += 1;
                    }
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && (bytes[j] as char).is_ascii_digit() {
                        i = j;
                        while i < bytes.len() && (bytes[i] as char).is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let lit = &text[start..i];
                let value: f64 = lit.parse().map_err(|_| DslError::Syntax {
                    position: start,
                    message: format!("invalid number literal {lit:?}"),
                })?;
                if !value.is_finite() {
                    return Err(DslError::Syntax {
                        position: start,
                        message: format!("number literal {lit:?} is not finite"),
                    });
                }
                out.push(Spanned { tok: Tok::Num(value), pos: start });
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < bytes.len()
                    && ((bytes[i] as char).is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                }
                out.push(Spanned { tok: Tok::Ident(text[start..i].to_string()), pos: start });
            }
            other => {
                return Err(DslError::Syntax {
                    position: i,
                    message: format!("unexpected character {other:?}"),
                })
            }
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<Spanned>,
    next: usize,
    aliases: &'a AliasTable,
    end: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.next).map(|s| &s.tok)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.next).map(|s| s.pos).unwrap_or(self.end)
    }

    fn bump(&mut self) -> Option<&Spanned> {
        let s = self.toks.get(self.next);
        if s.is_some() {
            self.next += 1;
        }
        s
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), DslError> {
        match self.peek() {
            Some(t) if *t == tok => {
                self.next += 1;
                Ok(())
            }
            _ => Err(DslError::Syntax {
                position: self.pos(),
                message: format!("expected {what}"),
            }),
        }
    }

    fn expr(&mut self) -> Result<AlphaExpr, DslError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.next += 1;
                    let rhs = self.term()?;
                    lhs = AlphaExpr::Add(Box::new(lhs), Box::new(rhs));
                }
                Some(Tok::Minus) => {
                    self.next += 1;
                    let rhs = self.term()?;
                    lhs = AlphaExpr::Sub(Box::new(lhs), Box::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<AlphaExpr, DslError> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.next += 1;
                    let rhs = self.unary()?;
                    lhs = AlphaExpr::Mul(Box::new(lhs), Box::new(rhs));
                }
                Some(Tok::Slash) => {
                    self.next += 1;
                    let rhs = self.unary()?;
                    lhs = AlphaExpr::Div(Box::new(lhs), Box::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<AlphaExpr, DslError> {
        if matches!(self.peek(), Some(Tok::Minus)) {
            self.next += 1;
            let inner = self.unary()?;
            return Ok(AlphaExpr::Neg(Box::new(inner)));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<AlphaExpr, DslError> {
        let pos = self.pos();
        let spanned = self.bump().ok_or_else(|| DslError::Syntax {
            position: pos,
            message: "unexpected end of input".to_string(),
        })?;
        match spanned.tok.clone() {
            Tok::Num(v) => Ok(AlphaExpr::Const(v)),
            Tok::Ident(name) => {
                if name == "log" {
                    self.expect(Tok::LParen, "'(' after log")?;
                    let inner = self.expr()?;
                    self.expect(Tok::RParen, "')'")?;
                    return Ok(AlphaExpr::Log(Box::new(inner)));
                }
                match self.aliases.resolve(&name) {
                    Some(canonical) => Ok(AlphaExpr::Signal(canonical.to_string())),
                    None => Err(DslError::UnknownIdentifier { name, position: pos }),
                }
            }
            Tok::Bracket(name) => match self.aliases.resolve(&name) {
                Some(canonical) => Ok(AlphaExpr::Signal(canonical.to_string())),
                None => Err(DslError::UnknownIdentifier { name, position: pos }),
            },
            Tok::LParen => {
                let inner = self.expr()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(inner)
            }
            other => Err(DslError::Syntax {
                position: pos,
                message: format!("unexpected token {other:?}"),
            }),
        }
    }
}

/// Parses a formula using the default alias table and canonical ids.
pub fn parse_alpha(text: &str) -> Result<AlphaExpr, DslError> {
    parse_alpha_with(text, &super::default_aliases())
}

/// Parses a formula resolving identifiers through a caller-supplied table.
pub fn parse_alpha_with(text: &str, aliases: &AliasTable) -> Result<AlphaExpr, DslError> {
    let toks = lex(text)?;
    let mut parser = Parser { toks, next: 0, aliases, end: text.len() };
    let expr = parser.expr()?;
    if parser.next != parser.toks.len() {
        return Err(DslError::Syntax {
            position: parser.pos(),
            message: "trailing input after expression".to_string(),
        });
    }
    Ok(expr)
}
