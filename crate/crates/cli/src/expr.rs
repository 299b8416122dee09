//! Arithmetic expressions for boundary signals and coefficients.
//!
//! Grammar: numbers, the variables allowed by the caller (`t`, `x`), the
//! constant `pi`, `+ - * / ^`, unary minus, parentheses and the functions
//! `sin cos exp sqrt abs`. `^` binds tighter than unary minus and is right
//! associative.

use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Number(f64),
    Var(Var),
    Neg(Box<Expr>),
    Binary(Op, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    T,
    X,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Op {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Sqrt,
    Abs,
}

impl Func {
    fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            _ => return None,
        })
    }

    fn apply(self, v: f64) -> f64 {
        match self {
            Func::Sin => v.sin(),
            Func::Cos => v.cos(),
            Func::Exp => v.exp(),
            Func::Sqrt => v.sqrt(),
            Func::Abs => v.abs(),
        }
    }
}

/// Syntax error at a 0-based character offset into the expression.
#[derive(Debug, Clone, PartialEq)]
pub struct ExprError {
    pub offset: usize,
    pub message: String,
}

impl fmt::Display for ExprError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (at character {})", self.message, self.offset + 1)
    }
}

impl std::error::Error for ExprError {}

impl Expr {
    /// Parses `src`; only the variables in `vars` are accepted.
    pub fn parse(src: &str, vars: &[Var]) -> Result<Self, ExprError> {
        let tokens = lex(src)?;
        let mut p = Parser {
            tokens,
            pos: 0,
            vars,
            end: src.chars().count(),
        };
        let e = p.expr()?;
        match p.peek() {
            None => Ok(e),
            Some(tok) => Err(ExprError {
                offset: tok.offset,
                message: format!("unexpected `{}`", tok.kind),
            }),
        }
    }

    pub fn eval(&self, t: f64, x: f64) -> f64 {
        match self {
            Expr::Number(v) => *v,
            Expr::Var(Var::T) => t,
            Expr::Var(Var::X) => x,
            Expr::Neg(e) => -e.eval(t, x),
            Expr::Call(f, e) => f.apply(e.eval(t, x)),
            Expr::Binary(op, a, b) => {
                let (a, b) = (a.eval(t, x), b.eval(t, x));
                match op {
                    Op::Add => a + b,
                    Op::Sub => a - b,
                    Op::Mul => a * b,
                    Op::Div => a / b,
                    Op::Pow => a.powf(b),
                }
            }
        }
    }

    /// The value if the expression does not depend on any variable.
    pub fn constant(&self) -> Option<f64> {
        match self {
            Expr::Number(v) => Some(*v),
            Expr::Var(_) => None,
            Expr::Neg(e) => e.constant().map(|v| -v),
            Expr::Call(f, e) => e.constant().map(|v| f.apply(v)),
            Expr::Binary(_, a, b) => {
                a.constant()?;
                b.constant()?;
                Some(self.eval(0.0, 0.0))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum TokenKind {
    Number(f64),
    Ident(String),
    Sym(char),
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TokenKind::Number(v) => write!(f, "{v}"),
            TokenKind::Ident(s) => write!(f, "{s}"),
            TokenKind::Sym(c) => write!(f, "{c}"),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    kind: TokenKind,
    offset: usize,
}

fn lex(src: &str) -> Result<Vec<Token>, ExprError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let start = i;
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && matches!(chars[i], 'e' | 'E') {
                let mut j = i + 1;
                if j < chars.len() && matches!(chars[j], '+' | '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text: String = chars[start..i].iter().collect();
            let v = text.parse().map_err(|_| ExprError {
                offset: start,
                message: format!("invalid number `{text}`"),
            })?;
            out.push(Token { kind: TokenKind::Number(v), offset: start });
        } else if c.is_ascii_alphabetic() || c == '_' {
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let name = chars[start..i].iter().collect();
            out.push(Token { kind: TokenKind::Ident(name), offset: start });
        } else if "+-*/^()".contains(c) {
            out.push(Token { kind: TokenKind::Sym(c), offset: start });
            i += 1;
        } else {
            return Err(ExprError {
                offset: start,
                message: format!("unexpected character `{c}`"),
            });
        }
    }
    Ok(out)
}

struct Parser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    vars: &'a [Var],
    end: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn eat(&mut self, sym: char) -> bool {
        if matches!(self.peek(), Some(Token { kind: TokenKind::Sym(c), .. }) if *c == sym) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.term()?;
        loop {
            let op = if self.eat('+') {
                Op::Add
            } else if self.eat('-') {
                Op::Sub
            } else {
                return Ok(lhs);
            };
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(self.term()?));
        }
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.unary()?;
        loop {
            let op = if self.eat('*') {
                Op::Mul
            } else if self.eat('/') {
                Op::Div
            } else {
                return Ok(lhs);
            };
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(self.unary()?));
        }
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        if self.eat('-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        if self.eat('+') {
            return self.unary();
        }
        let base = self.primary()?;
        if self.eat('^') {
            return Ok(Expr::Binary(Op::Pow, Box::new(base), Box::new(self.unary()?)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr, ExprError> {
        let Some(tok) = self.peek().cloned() else {
            return Err(ExprError {
                offset: self.end,
                message: "unexpected end of expression".into(),
            });
        };
        self.pos += 1;
        match tok.kind {
            TokenKind::Number(v) => Ok(Expr::Number(v)),
            TokenKind::Sym('(') => {
                let e = self.inner(tok.offset)?;
                self.close(tok.offset)?;
                Ok(e)
            }
            TokenKind::Ident(name) => {
                if let Some(f) = Func::from_name(&name) {
                    let open = self.peek().map(|t| t.offset);
                    if !self.eat('(') {
                        return Err(ExprError {
                            offset: open.unwrap_or(self.end),
                            message: format!("expected `(` after `{name}`"),
                        });
                    }
                    let open = open.unwrap();
                    let arg = self.inner(open)?;
                    self.close(open)?;
                    return Ok(Expr::Call(f, Box::new(arg)));
                }
                match name.as_str() {
                    "pi" => Ok(Expr::Number(std::f64::consts::PI)),
                    "t" if self.vars.contains(&Var::T) => Ok(Expr::Var(Var::T)),
                    "x" if self.vars.contains(&Var::X) => Ok(Expr::Var(Var::X)),
                    _ => Err(ExprError {
                        offset: tok.offset,
                        message: format!("unknown name `{name}`"),
                    }),
                }
            }
            TokenKind::Sym(c) => Err(ExprError {
                offset: tok.offset,
                message: format!("unexpected `{c}`"),
            }),
        }
    }

    /// Expression after the `(` at `open`; running out of input is
    /// reported at that parenthesis.
    fn inner(&mut self, open: usize) -> Result<Expr, ExprError> {
        let end = self.end;
        self.expr().map_err(|e| {
            if e.offset == end {
                ExprError {
                    offset: open,
                    message: "unclosed parenthesis".into(),
                }
            } else {
                e
            }
        })
    }

    /// Consumes `)`; an error points at the matching `(`.
    fn close(&mut self, open: usize) -> Result<(), ExprError> {
        if self.eat(')') {
            Ok(())
        } else {
            Err(ExprError {
                offset: open,
                message: "unclosed parenthesis".into(),
            })
        }
    }
}
