use super::ast::Decimal;
use super::ParseError;

#[derive(Debug, Clone, PartialEq)]
pub enum TokenKind {
    Ident(String),
    /// Numeric literal plus whether it was written as a bare digit run
    /// (only those are accepted as exponent integers).
    Number { value: Decimal, integer_text: Option<u64> },
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Eq,
    Tilde,
    Eof,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub kind: TokenKind,
    /// Byte offset of the first character.
    pub offset: usize,
}

pub fn tokenize(src: &str, base_offset: usize) -> Result<Vec<Token>, ParseError> {
    let bytes = src.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let offset = base_offset + i;
        let single = match c {
            b' ' | b'\t' | b'\r' | b'\n' => {
                i += 1;
                continue;
            }
            b'+' => Some(TokenKind::Plus),
            b'-' => Some(TokenKind::Minus),
            b'*' => Some(TokenKind::Star),
            b'/' => Some(TokenKind::Slash),
            b'^' => Some(TokenKind::Caret),
            b'(' => Some(TokenKind::LParen),
            b')' => Some(TokenKind::RParen),
            b'=' => Some(TokenKind::Eq),
            b'~' => Some(TokenKind::Tilde),
            _ => None,
        };
        if let Some(kind) = single {
            tokens.push(Token { kind, offset });
            i += 1;
        } else if c.is_ascii_alphabetic() || c == b'_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            tokens.push(Token { kind: TokenKind::Ident(src[start..i].to_string()), offset });
        } else if c.is_ascii_digit() || c == b'.' {
            let (kind, len) = lex_number(&src[i..], offset)?;
            tokens.push(Token { kind, offset });
            i += len;
        } else {
            let ch = src[i..].chars().next().unwrap_or('?');
            return Err(ParseError::Lex { offset, message: format!("unexpected character {ch:?}") });
        }
    }
    tokens.push(Token { kind: TokenKind::Eof, offset: base_offset + bytes.len() });
    Ok(tokens)
}

fn lex_number(s: &str, offset: usize) -> Result<(TokenKind, usize), ParseError> {
    let bytes = s.as_bytes();
    let mut i = 0;
    let mut digits = String::new();
    let mut frac_len = 0i64;
    while i < bytes.len() && bytes[i].is_ascii_digit() {
        digits.push(bytes[i] as char);
        i += 1;
    }
    let int_len = i;
    let mut plain_integer = true;
    if i < bytes.len() && bytes[i] == b'.' {
        plain_integer = false;
        i += 1;
        while i < bytes.len() && bytes[i].is_ascii_digit() {
            digits.push(bytes[i] as char);
            frac_len += 1;
            i += 1;
        }
    }
    if digits.is_empty() {
        return Err(ParseError::Lex { offset, message: "malformed number".into() });
    }
    let mut exp10 = 0i64;
    if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
        let mut j = i + 1;
        let negative = match bytes.get(j) {
            Some(b'+') => {
                j += 1;
                false
            }
            Some(b'-') => {
                j += 1;
                true
            }
            _ => false,
        };
        let start = j;
        while j < bytes.len() && bytes[j].is_ascii_digit() {
            j += 1;
        }
        if j == start {
            return Err(ParseError::Lex { offset: offset + i, message: "exponent has no digits".into() });
        }
        let e: i64 = s[start..j]
            .parse()
            .map_err(|_| ParseError::Lex { offset: offset + start, message: "exponent out of range".into() })?;
        exp10 = if negative { -e } else { e };
        plain_integer = false;
        i = j;
    }
    if i < bytes.len() && (bytes[i].is_ascii_alphabetic() || bytes[i] == b'_' || bytes[i] == b'.') {
        return Err(ParseError::Lex {
            offset: offset + i,
            message: "number runs into identifier; multiplication must be explicit".into(),
        });
    }
    let significant = digits.trim_start_matches('0');
    let mantissa: u64 = if significant.is_empty() {
        0
    } else {
        significant
            .parse()
            .map_err(|_| ParseError::Lex { offset, message: "too many significant digits".into() })?
    };
    let exponent = i32::try_from(exp10 - frac_len)
        .map_err(|_| ParseError::Lex { offset, message: "exponent out of range".into() })?;
    let integer_text = if plain_integer && int_len == i { Some(mantissa) } else { None };
    Ok((TokenKind::Number { value: Decimal::new(mantissa, exponent), integer_text }, i))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(s: &str) -> Vec<TokenKind> {
        tokenize(s, 0).unwrap().into_iter().map(|t| t.kind).collect()
    }

    #[test]
    fn scientific_literal_is_one_token() {
        let k = kinds("1e-40");
        assert_eq!(k.len(), 2);
        assert!(matches!(&k[0], TokenKind::Number { value, integer_text: None } if *value == Decimal::new(1, -40)));
    }

    #[test]
    fn integer_literal_flagged() {
        let k = kinds("12");
        assert!(matches!(&k[0], TokenKind::Number { integer_text: Some(12), .. }));
    }

    #[test]
    fn bad_character_reports_offset() {
        let err = tokenize("G * $", 0).unwrap_err();
        assert_eq!(err.offset(), 4);
    }

    #[test]
    fn implicit_multiplication_rejected() {
        assert!(tokenize("2G", 0).is_err());
    }

    #[test]
    fn offsets_respect_base() {
        let t = tokenize("a+b", 10).unwrap();
        assert_eq!(t[2].offset, 12);
    }
}
