//! Recursive-descent parser for
//!
//! ```text
//! expr    := term (("+"|"-") term)*
//! term    := factor (("*"|"/") factor)*
//! factor  := unary ("^" factor)?
//! unary   := "-" unary | primary
//! primary := number | symbol | func "(" expr ")" | "(" expr ")"
//! ```

use std::fmt;

use super::lexer::{Func, Sym, Token, TokenKind};
use super::DslError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
            BinOp::Pow => '^',
        }
    }
}

#[derive(Debug, Clone)]
pub enum ExprKind {
    Const(f64),
    Sym(Sym),
    Neg(Box<Expr>),
    Func(Func, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
}

/// Expression tree. `pos` is the byte offset where the subtree starts.
///
/// Equality is structural and ignores positions.
#[derive(Debug, Clone)]
pub struct Expr {
    pub kind: ExprKind,
    pub pos: usize,
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        match (&self.kind, &other.kind) {
            (ExprKind::Const(a), ExprKind::Const(b)) => a == b,
            (ExprKind::Sym(a), ExprKind::Sym(b)) => a == b,
            (ExprKind::Neg(a), ExprKind::Neg(b)) => a == b,
            (ExprKind::Func(f, a), ExprKind::Func(g, b)) => f == g && a == b,
            (ExprKind::Binary(o, a, b), ExprKind::Binary(p, c, d)) => o == p && a == c && b == d,
            _ => false,
        }
    }
}

impl Expr {
    pub fn constant(value: f64, pos: usize) -> Self {
        Self {
            kind: ExprKind::Const(value),
            pos,
        }
    }

    pub fn sym(sym: Sym, pos: usize) -> Self {
        Self {
            kind: ExprKind::Sym(sym),
            pos,
        }
    }

    pub fn neg(inner: Expr, pos: usize) -> Self {
        Self {
            kind: ExprKind::Neg(Box::new(inner)),
            pos,
        }
    }

    pub fn func(func: Func, arg: Expr, pos: usize) -> Self {
        Self {
            kind: ExprKind::Func(func, Box::new(arg)),
            pos,
        }
    }

    pub fn binary(op: BinOp, lhs: Expr, rhs: Expr) -> Self {
        let pos = lhs.pos;
        Self {
            kind: ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)),
            pos,
        }
    }

    pub fn mentions(&self, pred: &impl Fn(Sym) -> bool) -> bool {
        match &self.kind {
            ExprKind::Const(_) => false,
            ExprKind::Sym(s) => pred(*s),
            ExprKind::Neg(a) | ExprKind::Func(_, a) => a.mentions(pred),
            ExprKind::Binary(_, a, b) => a.mentions(pred) || b.mentions(pred),
        }
    }

    /// Grammar level of the node: 0 sum, 1 product, 2 power, 3 unary,
    /// 4 primary. A child printed at a lower level than its slot requires
    /// is parenthesized.
    fn level(&self) -> u8 {
        match &self.kind {
            ExprKind::Const(_) | ExprKind::Sym(_) | ExprKind::Func(..) => 4,
            ExprKind::Neg(_) => 3,
            ExprKind::Binary(BinOp::Pow, ..) => 2,
            ExprKind::Binary(BinOp::Mul | BinOp::Div, ..) => 1,
            ExprKind::Binary(BinOp::Add | BinOp::Sub, ..) => 0,
        }
    }

    fn fmt_at(&self, f: &mut fmt::Formatter<'_>, min_level: u8) -> fmt::Result {
        if self.level() < min_level {
            f.write_str("(")?;
            self.fmt_at(f, 0)?;
            return f.write_str(")");
        }
        match &self.kind {
            ExprKind::Const(x) => write!(f, "{x}"),
            ExprKind::Sym(s) => write!(f, "{s}"),
            ExprKind::Neg(a) => {
                f.write_str("-")?;
                a.fmt_at(f, 3)
            }
            ExprKind::Func(func, a) => {
                write!(f, "{}(", func.name())?;
                a.fmt_at(f, 0)?;
                f.write_str(")")
            }
            ExprKind::Binary(op, a, b) => {
                let (left, right) = match op {
                    BinOp::Add | BinOp::Sub => (0, 1),
                    BinOp::Mul | BinOp::Div => (1, 2),
                    BinOp::Pow => (3, 2),
                };
                a.fmt_at(f, left)?;
                if *op == BinOp::Pow {
                    f.write_str("^")?;
                } else {
                    write!(f, " {} ", op.symbol())?;
                }
                b.fmt_at(f, right)
            }
        }
    }
}

/// Prints with the fewest parentheses that reparse to the same tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_at(f, 0)
    }
}

struct Parser<'a> {
    tokens: &'a [Token],
    at: usize,
    end: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&'a Token> {
        self.tokens.get(self.at)
    }

    fn pos(&self) -> usize {
        self.peek().map_or(self.end, |t| t.pos)
    }

    fn found(&self) -> String {
        self.peek()
            .map_or_else(|| "end of input".to_string(), |t| format!("'{}'", t.text))
    }

    fn error(&self, expected: &str) -> DslError {
        DslError::Syntax {
            pos: self.pos(),
            expected: expected.to_string(),
            found: self.found(),
        }
    }

    fn eat_operator(&mut self, ops: &[char]) -> Option<char> {
        match self.peek() {
            Some(Token {
                kind: TokenKind::Operator(c),
                ..
            }) if ops.contains(c) => {
                self.at += 1;
                Some(*c)
            }
            _ => None,
        }
    }

    fn expr(&mut self) -> Result<Expr, DslError> {
        let mut lhs = self.term()?;
        while let Some(c) = self.eat_operator(&['+', '-']) {
            let rhs = self.term()?;
            let op = if c == '+' { BinOp::Add } else { BinOp::Sub };
            lhs = Expr::binary(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, DslError> {
        let mut lhs = self.factor()?;
        while let Some(c) = self.eat_operator(&['*', '/']) {
            let rhs = self.factor()?;
            let op = if c == '*' { BinOp::Mul } else { BinOp::Div };
            lhs = Expr::binary(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> Result<Expr, DslError> {
        let base = self.unary()?;
        if self.eat_operator(&['^']).is_some() {
            let exponent = self.factor()?;
            return Ok(Expr::binary(BinOp::Pow, base, exponent));
        }
        Ok(base)
    }

    fn unary(&mut self) -> Result<Expr, DslError> {
        let pos = self.pos();
        if self.eat_operator(&['-']).is_some() {
            return Ok(Expr::neg(self.unary()?, pos));
        }
        self.primary()
    }

    fn closing_paren(&mut self, open: usize) -> Result<(), DslError> {
        match self.peek() {
            Some(Token {
                kind: TokenKind::RParen,
                ..
            }) => {
                self.at += 1;
                Ok(())
            }
            _ => Err(DslError::Syntax {
                pos: self.pos(),
                expected: format!("')' to close the parenthesis opened at offset {open}"),
                found: self.found(),
            }),
        }
    }

    fn primary(&mut self) -> Result<Expr, DslError> {
        let Some(tok) = self.peek() else {
            return Err(self.error("a number, symbol, function or '('"));
        };
        let pos = tok.pos;
        match &tok.kind {
            TokenKind::Number(x) => {
                self.at += 1;
                Ok(Expr::constant(*x, pos))
            }
            TokenKind::Symbol(s) => {
                self.at += 1;
                Ok(Expr::sym(*s, pos))
            }
            TokenKind::Function(func) => {
                self.at += 1;
                let open = self.pos();
                match self.peek() {
                    Some(Token {
                        kind: TokenKind::LParen,
                        ..
                    }) => self.at += 1,
                    _ => return Err(self.error(&format!("'(' after {}", func.name()))),
                }
                let arg = self.expr()?;
                self.closing_paren(open)?;
                Ok(Expr::func(*func, arg, pos))
            }
            TokenKind::LParen => {
                self.at += 1;
                let mut inner = self.expr()?;
                self.closing_paren(pos)?;
                inner.pos = pos;
                Ok(inner)
            }
            _ => Err(self.error("a number, symbol, function or '('")),
        }
    }
}

/// Parse a full token stream. `source_len` positions end-of-input errors.
pub fn parse_tokens(tokens: &[Token], source_len: usize) -> Result<Expr, DslError> {
    if tokens.is_empty() {
        return Err(DslError::Syntax {
            pos: 0,
            expected: "an expression".to_string(),
            found: "end of input".to_string(),
        });
    }
    let mut parser = Parser {
        tokens,
        at: 0,
        end: source_len,
    };
    let expr = parser.expr()?;
    if parser.peek().is_some() {
        return Err(parser.error("an operator or end of input"));
    }
    Ok(expr)
}
