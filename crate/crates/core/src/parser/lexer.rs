use num_rational::Rational64;

use super::{Diagnostic, Pos};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Number(Rational64),
    LParen,
    RParen,
    Dot,
    Comma,
    Colon,
    Caret,
    Slash,
    Minus,
    Lt,
    Le,
    Eq,
    Ge,
    Gt,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Number(n) => format!("number {n}"),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Dot => "`.`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Colon => "`:`".into(),
            Tok::Caret => "`^`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Lt => "`<`".into(),
            Tok::Le => "`<=`".into(),
            Tok::Eq => "`=`".into(),
            Tok::Ge => "`>=`".into(),
            Tok::Gt => "`>`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Token {
    pub tok: Tok,
    pub pos: Pos,
}

fn is_word(c: u8) -> bool {
    c.is_ascii_alphanumeric() || c == b'_'
}

/// Splits `text` into tokens. Identifiers may contain `-` between word
/// characters (`D-Turn-L`); `//` starts a comment running to end of line.
pub fn tokenize(text: &str) -> Result<Vec<Token>, Diagnostic> {
    let bytes = text.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    let mut line = 1;
    let mut line_start = 0;
    while i < bytes.len() {
        let pos = Pos {
            offset: i,
            line,
            col: i - line_start + 1,
        };
        let c = bytes[i];
        if c == b'\n' {
            i += 1;
            line += 1;
            line_start = i;
            continue;
        }
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if c == b'/' && bytes.get(i + 1) == Some(&b'/') {
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        let (tok, len) = match c {
            b'(' => (Tok::LParen, 1),
            b')' => (Tok::RParen, 1),
            b'.' => (Tok::Dot, 1),
            b',' => (Tok::Comma, 1),
            b':' => (Tok::Colon, 1),
            b'^' => (Tok::Caret, 1),
            b'/' => (Tok::Slash, 1),
            b'-' => (Tok::Minus, 1),
            b'=' => (Tok::Eq, 1),
            b'<' if bytes.get(i + 1) == Some(&b'=') => (Tok::Le, 2),
            b'<' => (Tok::Lt, 1),
            b'>' if bytes.get(i + 1) == Some(&b'=') => (Tok::Ge, 2),
            b'>' => (Tok::Gt, 1),
            b'0'..=b'9' => number(text, i, pos)?,
            c if c.is_ascii_alphabetic() || c == b'_' => {
                let mut j = i;
                loop {
                    while j < bytes.len() && is_word(bytes[j]) {
                        j += 1;
                    }
                    if j + 1 < bytes.len() && bytes[j] == b'-' && is_word(bytes[j + 1]) {
                        j += 1;
                    } else {
                        break;
                    }
                }
                (Tok::Ident(text[i..j].to_owned()), j - i)
            }
            _ => {
                let ch = text[i..].chars().next().unwrap_or('?');
                return Err(Diagnostic::new(pos, format!("unexpected character `{ch}`")));
            }
        };
        tokens.push(Token { tok, pos });
        i += len;
    }
    let pos = Pos {
        offset: bytes.len(),
        line,
        col: bytes.len() - line_start + 1,
    };
    tokens.push(Token { tok: Tok::Eof, pos });
    Ok(tokens)
}

/// Integer or terminating decimal starting at `start`.
fn number(text: &str, start: usize, pos: Pos) -> Result<(Tok, usize), Diagnostic> {
    let bytes = text.as_bytes();
    let mut j = start;
    while j < bytes.len() && bytes[j].is_ascii_digit() {
        j += 1;
    }
    let int_end = j;
    let mut frac = "";
    if j + 1 < bytes.len() && bytes[j] == b'.' && bytes[j + 1].is_ascii_digit() {
        j += 1;
        while j < bytes.len() && bytes[j].is_ascii_digit() {
            j += 1;
        }
        frac = &text[int_end + 1..j];
    }
    if j < bytes.len() && is_word(bytes[j]) {
        return Err(Diagnostic::new(pos, "malformed number"));
    }
    let too_large = || Diagnostic::new(pos, "constant too large");
    let digits = format!("{}{}", &text[start..int_end], frac);
    if digits.len() > 15 {
        return Err(too_large());
    }
    let numer: i64 = digits.parse().map_err(|_| too_large())?;
    let denom = 10i64.pow(frac.len() as u32);
    Ok((Tok::Number(Rational64::new(numer, denom)), j - start))
}
