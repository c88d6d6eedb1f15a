use std::fmt;

use super::DslError;

/// The closed set of symbols an equation of state may mention.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sym {
    P,
    T,
    U,
    S,
    V,
    N,
    KB,
}

impl Sym {
    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "p" => Sym::P,
            "T" => Sym::T,
            "U" => Sym::U,
            "S" => Sym::S,
            "V" => Sym::V,
            "N" => Sym::N,
            "kB" => Sym::KB,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Sym::P => "p",
            Sym::T => "T",
            Sym::U => "U",
            Sym::S => "S",
            Sym::V => "V",
            Sym::N => "N",
            Sym::KB => "kB",
        }
    }

    /// `p` and `T`, the symbols replaced by derivatives.
    pub fn is_conjugate(self) -> bool {
        matches!(self, Sym::P | Sym::T)
    }
}

impl fmt::Display for Sym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Exp,
    Ln,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Ln => "ln",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TokenKind {
    Number(f64),
    Symbol(Sym),
    /// One of `+ - * / ^`.
    Operator(char),
    LParen,
    RParen,
    Function(Func),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub kind: TokenKind,
    pub text: String,
    /// Byte offset into the source.
    pub pos: usize,
}

pub fn tokenize(text: &str) -> Result<Vec<Token>, DslError> {
    let bytes = text.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'+' | b'-' | b'*' | b'/' | b'^' => {
                i += 1;
                tokens.push(Token {
                    kind: TokenKind::Operator(c as char),
                    text: (c as char).to_string(),
                    pos: start,
                });
            }
            b'(' | b')' => {
                i += 1;
                let kind = if c == b'(' {
                    TokenKind::LParen
                } else {
                    TokenKind::RParen
                };
                tokens.push(Token {
                    kind,
                    text: (c as char).to_string(),
                    pos: start,
                });
            }
            b'0'..=b'9' | b'.' => {
                i = scan_number(bytes, i);
                let lexeme = &text[start..i];
                let value: f64 = lexeme.parse().map_err(|_| DslError::BadNumber {
                    pos: start,
                    text: lexeme.to_string(),
                })?;
                if !value.is_finite() {
                    return Err(DslError::BadNumber {
                        pos: start,
                        text: lexeme.to_string(),
                    });
                }
                tokens.push(Token {
                    kind: TokenKind::Number(value),
                    text: lexeme.to_string(),
                    pos: start,
                });
            }
            c if c.is_ascii_alphabetic() => {
                while i < bytes.len() && bytes[i].is_ascii_alphanumeric() {
                    i += 1;
                }
                let name = &text[start..i];
                let kind = match name {
                    "exp" => TokenKind::Function(Func::Exp),
                    "ln" => TokenKind::Function(Func::Ln),
                    _ => match Sym::from_name(name) {
                        Some(sym) => TokenKind::Symbol(sym),
                        None => {
                            return Err(DslError::UnknownIdentifier {
                                pos: start,
                                name: name.to_string(),
                            })
                        }
                    },
                };
                tokens.push(Token {
                    kind,
                    text: name.to_string(),
                    pos: start,
                });
            }
            _ => {
                let ch = text[start..].chars().next().expect("in bounds");
                return Err(DslError::Lex { pos: start, ch });
            }
        }
    }
    Ok(tokens)
}

/// `digits [. digits] [(e|E) [+|-] digits]`, also accepting a leading `.`.
fn scan_number(bytes: &[u8], mut i: usize) -> usize {
    let digits = |mut i: usize| {
        while i < bytes.len() && bytes[i].is_ascii_digit() {
            i += 1;
        }
        i
    };
    i = digits(i);
    if i < bytes.len() && bytes[i] == b'.' {
        i = digits(i + 1);
    }
    if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
        let mut j = i + 1;
        if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
            j += 1;
        }
        if j < bytes.len() && bytes[j].is_ascii_digit() {
            i = digits(j);
        }
    }
    i
}
