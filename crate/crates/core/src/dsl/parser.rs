//! Recursive-descent parser.
//!
//! ```text
//! relation   := annotation* expr ('=' | '~') expr
//! annotation := '@' ident '(' balanced-text ')'
//! expr       := term (('+' | '-') term)*
//! term       := unary (('*' | '/') unary)*
//! unary      := '-' unary | power
//! power      := primary ('^' exponent)?
//! exponent   := ratlit ('^' exponent)?
//! ratlit     := '-'? INT | '(' '-'? INT ('/' INT)? ')'
//! primary    := NUMBER | IDENT | '(' expr ')'
//! ```

use num_traits::{ToPrimitive, Zero};

use super::ast::{Expr, RelOp, Relation};
use super::lexer::{tokenize, Token, TokenKind};
use super::ParseError;
use crate::dimension::Exponent;

pub fn parse_expression(text: &str) -> Result<Expr, ParseError> {
    parse_expression_at(text, 0)
}

pub(crate) fn parse_expression_at(text: &str, base: usize) -> Result<Expr, ParseError> {
    let tokens = tokenize(text, base)?;
    let mut p = Parser { tokens, pos: 0 };
    let e = p.expr()?;
    p.expect_eof()?;
    Ok(e)
}

pub fn parse_relation(text: &str) -> Result<Relation, ParseError> {
    let mut ann = Annotations::default();
    let body_start = read_annotations(text, &mut ann)?;
    let tokens = tokenize(&text[body_start..], body_start)?;
    let ops: Vec<&Token> = tokens
        .iter()
        .filter(|t| matches!(t.kind, TokenKind::Eq | TokenKind::Tilde))
        .collect();
    match ops.as_slice() {
        [] => {
            return Err(ParseError::Syntax {
                offset: text.len(),
                message: "expected a relation operator `=` or `~`".into(),
            })
        }
        [_] => {}
        [_, second, ..] => {
            return Err(ParseError::Syntax {
                offset: second.offset,
                message: "more than one relation operator".into(),
            })
        }
    }
    let mut p = Parser { tokens, pos: 0 };
    let lhs = p.expr()?;
    let operator = match p.peek().kind {
        TokenKind::Eq => RelOp::ExactEq,
        TokenKind::Tilde => RelOp::OrderOfMagnitude,
        _ => return Err(p.unexpected("`=` or `~`")),
    };
    p.pos += 1;
    let rhs = p.expr()?;
    p.expect_eof()?;
    Ok(Relation {
        lhs,
        rhs,
        operator,
        tol: ann.tol,
        name: ann.name.unwrap_or_default(),
        paper_tag: ann.paper.unwrap_or_default(),
        bindings: ann.bindings,
        defines: ann.defines,
    })
}

#[derive(Default)]
struct Annotations {
    name: Option<String>,
    paper: Option<String>,
    tol: Option<f64>,
    bindings: Vec<(String, Expr)>,
    defines: Option<String>,
}

/// Consumes leading `@key(...)` annotations; returns the byte offset where
/// the relation body starts.
fn read_annotations(text: &str, ann: &mut Annotations) -> Result<usize, ParseError> {
    let bytes = text.as_bytes();
    let mut i = 0;
    loop {
        while i < bytes.len() && bytes[i].is_ascii_whitespace() {
            i += 1;
        }
        if i >= bytes.len() || bytes[i] != b'@' {
            return Ok(i);
        }
        let at = i;
        i += 1;
        let key_start = i;
        while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
            i += 1;
        }
        let key = &text[key_start..i];
        if bytes.get(i) != Some(&b'(') {
            return Err(ParseError::Syntax { offset: i, message: format!("expected `(` after @{key}") });
        }
        let open = i;
        let mut depth = 0usize;
        let mut close = None;
        for (j, &b) in bytes.iter().enumerate().skip(open) {
            match b {
                b'(' => depth += 1,
                b')' => {
                    depth -= 1;
                    if depth == 0 {
                        close = Some(j);
                        break;
                    }
                }
                _ => {}
            }
        }
        let close = close.ok_or(ParseError::Syntax {
            offset: open,
            message: format!("unclosed @{key} annotation"),
        })?;
        let inner = &text[open + 1..close];
        let inner_at = open + 1;
        let dup = |what: &str| ParseError::Syntax { offset: at, message: format!("duplicate @{what} annotation") };
        match key {
            "name" => {
                if ann.name.replace(inner.trim().to_string()).is_some() {
                    return Err(dup(key));
                }
            }
            "paper" => {
                if ann.paper.replace(inner.trim().to_string()).is_some() {
                    return Err(dup(key));
                }
            }
            "tol" => {
                let bad = || ParseError::Syntax {
                    offset: inner_at,
                    message: "expected @tol(decades=<non-negative number>)".into(),
                };
                let (k, v) = inner.split_once('=').ok_or_else(bad)?;
                if k.trim() != "decades" {
                    return Err(bad());
                }
                let v: f64 = v.trim().parse().map_err(|_| bad())?;
                if !(v >= 0.0) || !v.is_finite() {
                    return Err(bad());
                }
                if ann.tol.replace(v).is_some() {
                    return Err(dup(key));
                }
            }
            "let" => {
                let mut seg_start = 0;
                let mut depth = 0i32;
                let mut segments = Vec::new();
                for (j, c) in inner.char_indices() {
                    match c {
                        '(' => depth += 1,
                        ')' => depth -= 1,
                        ',' if depth == 0 => {
                            segments.push((seg_start, &inner[seg_start..j]));
                            seg_start = j + 1;
                        }
                        _ => {}
                    }
                }
                segments.push((seg_start, &inner[seg_start..]));
                for (off, seg) in segments {
                    let (sym, expr) = seg.split_once('=').ok_or(ParseError::Syntax {
                        offset: inner_at + off,
                        message: "expected `symbol=expression` in @let".into(),
                    })?;
                    let sym = sym.trim();
                    if !is_identifier(sym) {
                        return Err(ParseError::Syntax {
                            offset: inner_at + off,
                            message: format!("invalid binding name {sym:?}"),
                        });
                    }
                    let expr_at = inner_at + off + seg.find('=').expect("split on `=`") + 1;
                    let expr = parse_expression_at(expr, expr_at)?;
                    ann.bindings.push((sym.to_string(), expr));
                }
            }
            "defines" => {
                let sym = inner.trim();
                if !is_identifier(sym) {
                    return Err(ParseError::Syntax { offset: inner_at, message: "expected a symbol in @defines".into() });
                }
                if ann.defines.replace(sym.to_string()).is_some() {
                    return Err(dup(key));
                }
            }
            _ => {
                return Err(ParseError::Syntax { offset: at, message: format!("unknown annotation @{key}") });
            }
        }
        i = close + 1;
    }
}

pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, kind: &TokenKind) -> bool {
        if &self.peek().kind == kind {
            self.bump();
            true
        } else {
            false
        }
    }

    fn unexpected(&self, expected: &str) -> ParseError {
        let t = self.peek();
        let found = match &t.kind {
            TokenKind::Eof => "end of input".to_string(),
            k => format!("{k:?}"),
        };
        ParseError::Syntax { offset: t.offset, message: format!("expected {expected}, found {found}") }
    }

    fn expect_eof(&self) -> Result<(), ParseError> {
        if self.peek().kind == TokenKind::Eof {
            Ok(())
        } else {
            Err(self.unexpected("end of expression"))
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat(&TokenKind::Plus) {
                lhs = Expr::sum(lhs, self.term()?);
            } else if self.eat(&TokenKind::Minus) {
                lhs = Expr::difference(lhs, self.term()?);
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat(&TokenKind::Star) {
                lhs = Expr::product(lhs, self.unary()?);
            } else if self.eat(&TokenKind::Slash) {
                lhs = Expr::quotient(lhs, self.unary()?);
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.eat(&TokenKind::Minus) {
            Ok(Expr::negate(self.unary()?))
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.primary()?;
        if self.eat(&TokenKind::Caret) {
            Ok(Expr::power(base, self.exponent()?))
        } else {
            Ok(base)
        }
    }

    fn exponent(&mut self) -> Result<Exponent, ParseError> {
        let at = self.peek().offset;
        let r = self.ratlit()?;
        if self.eat(&TokenKind::Caret) {
            let inner_at = self.peek().offset;
            let inner = self.exponent()?;
            let n = inner
                .is_integer()
                .then(|| inner.numer().to_i32())
                .flatten()
                .ok_or(ParseError::Syntax {
                    offset: inner_at,
                    message: "chained exponent must reduce to an integer power of a rational".into(),
                })?;
            if r.is_zero() && n < 0 {
                return Err(ParseError::Syntax { offset: at, message: "zero raised to a negative power".into() });
            }
            return Ok(r.pow(n));
        }
        Ok(r)
    }

    fn int(&mut self) -> Result<i64, ParseError> {
        let t = self.peek().clone();
        match t.kind {
            TokenKind::Number { integer_text: Some(n), .. } => {
                self.bump();
                i64::try_from(n).map_err(|_| ParseError::Syntax {
                    offset: t.offset,
                    message: "exponent integer out of range".into(),
                })
            }
            _ => Err(self.unexpected("an integer exponent")),
        }
    }

    fn ratlit(&mut self) -> Result<Exponent, ParseError> {
        if self.eat(&TokenKind::LParen) {
            let neg = self.eat(&TokenKind::Minus);
            let num = self.int()?;
            let mut den_at = self.peek().offset;
            let den = if self.eat(&TokenKind::Slash) {
                den_at = self.peek().offset;
                self.int()?
            } else {
                1
            };
            if den == 0 {
                return Err(ParseError::Syntax { offset: den_at, message: "zero denominator in exponent".into() });
            }
            if !self.eat(&TokenKind::RParen) {
                return Err(self.unexpected("`)` closing the exponent"));
            }
            Ok(Exponent::new(if neg { -num } else { num }, den))
        } else {
            let neg = self.eat(&TokenKind::Minus);
            let n = self.int()?;
            Ok(Exponent::from_integer(if neg { -n } else { n }))
        }
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let t = self.peek().clone();
        match t.kind {
            TokenKind::Number { value, .. } => {
                self.bump();
                Ok(Expr::Literal(value))
            }
            TokenKind::Ident(name) => {
                self.bump();
                Ok(Expr::Symbol(name))
            }
            TokenKind::LParen => {
                self.bump();
                let e = self.expr()?;
                if !self.eat(&TokenKind::RParen) {
                    return Err(self.unexpected("`)`"));
                }
                Ok(e)
            }
            _ => Err(self.unexpected("a number, symbol, or `(`")),
        }
    }
}
