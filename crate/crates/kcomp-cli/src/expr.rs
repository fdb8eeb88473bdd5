//! Arithmetic expressions over the time variable `t` for matrix entries.
//!
//! The grammar is deliberately tiny: numbers, `t`, unary minus, `+`, `-`,
//! `*`, and the functions `sin`, `cos`, `exp`. Matrix expressions are
//! bracketed rows of scalar expressions, `[[a,b],[c,d]]`.

use kcomp::matrix::DenseMatrix;
use std::fmt;

/// Scalar expression over the single variable `t`.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    /// Literal constant.
    Num(f64),
    /// The time variable.
    T,
    /// Sum of two expressions.
    Add(Box<Expr>, Box<Expr>),
    /// Difference of two expressions.
    Sub(Box<Expr>, Box<Expr>),
    /// Product of two expressions.
    Mul(Box<Expr>, Box<Expr>),
    /// Negation.
    Neg(Box<Expr>),
    /// Sine of an expression.
    Sin(Box<Expr>),
    /// Cosine of an expression.
    Cos(Box<Expr>),
    /// Exponential of an expression.
    Exp(Box<Expr>),
}

impl Expr {
    /// Evaluates the expression at the given time.
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Expr::Num(v) => *v,
            Expr::T => t,
            Expr::Add(a, b) => a.eval(t) + b.eval(t),
            Expr::Sub(a, b) => a.eval(t) - b.eval(t),
            Expr::Mul(a, b) => a.eval(t) * b.eval(t),
            Expr::Neg(a) => -a.eval(t),
            Expr::Sin(a) => a.eval(t).sin(),
            Expr::Cos(a) => a.eval(t).cos(),
            Expr::Exp(a) => a.eval(t).exp(),
        }
    }

    /// True when the expression mentions the time variable.
    pub fn depends_on_t(&self) -> bool {
        match self {
            Expr::Num(_) => false,
            Expr::T => true,
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) => {
                a.depends_on_t() || b.depends_on_t()
            }
            Expr::Neg(a) | Expr::Sin(a) | Expr::Cos(a) | Expr::Exp(a) => a.depends_on_t(),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) => 2,
            Expr::Neg(..) => 3,
            _ => 4,
        }
    }

    fn fmt_child(&self, f: &mut fmt::Formatter<'_>, parent: u8, right: bool) -> fmt::Result {
        let needs_parens = self.precedence() < parent || (right && self.precedence() == parent);
        if needs_parens {
            write!(f, "({self})")
        } else {
            write!(f, "{self}")
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v}"),
            Expr::T => write!(f, "t"),
            Expr::Add(a, b) => {
                a.fmt_child(f, 1, false)?;
                write!(f, " + ")?;
                b.fmt_child(f, 1, true)
            }
            Expr::Sub(a, b) => {
                a.fmt_child(f, 1, false)?;
                write!(f, " - ")?;
                b.fmt_child(f, 1, true)
            }
            Expr::Mul(a, b) => {
                a.fmt_child(f, 2, false)?;
                write!(f, "*")?;
                b.fmt_child(f, 2, true)
            }
            Expr::Neg(a) => {
                write!(f, "-")?;
                a.fmt_child(f, 3, true)
            }
            Expr::Sin(a) => write!(f, "sin({a})"),
            Expr::Cos(a) => write!(f, "cos({a})"),
            Expr::Exp(a) => write!(f, "exp({a})"),
        }
    }
}

/// Parse failure with the byte offset at which it was detected.
#[derive(Debug, Clone, PartialEq)]
pub struct ParseError {
    /// Byte offset into the input text.
    pub position: usize,
    /// Human-readable description of the problem.
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "parse error at byte {}: {}", self.position, self.message)
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
}

fn tokenize(text: &str) -> Result<Vec<(usize, Token)>, ParseError> {
    let bytes = text.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' | '\n' | '\r' => i += 1,
            '+' => {
                tokens.push((i, Token::Plus));
                i += 1;
            }
            '-' => {
                tokens.push((i, Token::Minus));
                i += 1;
            }
            '*' => {
                tokens.push((i, Token::Star));
                i += 1;
            }
            '(' => {
                tokens.push((i, Token::LParen));
                i += 1;
            }
            ')' => {
                tokens.push((i, Token::RParen));
                i += 1;
            }
            '[' => {
                tokens.push((i, Token::LBracket));
                i += 1;
            }
            ']' => {
                tokens.push((i, Token::RBracket));
                i += 1;
            }
            ',' => {
                tokens.push((i, Token::Comma));
                i += 1;
            }
            '0'..='9' | '.' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        i = j;
                        while i < bytes.len() && bytes[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let literal = &text[start..i];
                let value = literal.parse::<f64>().map_err(|_| ParseError {
                    position: start,
                    message: format!("invalid number literal '{literal}'"),
                })?;
                tokens.push((start, Token::Num(value)));
            }
            'a'..='z' | 'A'..='Z' | '_' => {
                let start = i;
                while i < bytes.len()
                    && ((bytes[i] as char).is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                }
                tokens.push((start, Token::Ident(text[start..i].to_string())));
            }
            _ => {
                return Err(ParseError {
                    position: i,
                    message: format!("unexpected character '{c}'"),
                })
            }
        }
    }
    Ok(tokens)
}

struct Parser<'a> {
    tokens: &'a [(usize, Token)],
    pos: usize,
    input_len: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|(_, t)| t)
    }

    fn position(&self) -> usize {
        self.tokens.get(self.pos).map_or(self.input_len, |(p, _)| *p)
    }

    fn bump(&mut self) -> Option<&Token> {
        let out = self.tokens.get(self.pos).map(|(_, t)| t);
        self.pos += 1;
        out
    }

    fn expect(&mut self, want: Token, what: &str) -> Result<(), ParseError> {
        if self.peek() == Some(&want) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(format!("expected {what}")))
        }
    }

    fn error(&self, message: String) -> ParseError {
        ParseError { position: self.position(), message }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(Token::Plus) => {
                    self.pos += 1;
                    acc = Expr::Add(Box::new(acc), Box::new(self.term()?));
                }
                Some(Token::Minus) => {
                    self.pos += 1;
                    acc = Expr::Sub(Box::new(acc), Box::new(self.term()?));
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.unary()?;
        while self.peek() == Some(&Token::Star) {
            self.pos += 1;
            acc = Expr::Mul(Box::new(acc), Box::new(self.unary()?));
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.peek() == Some(&Token::Minus) {
            self.pos += 1;
            Ok(Expr::Neg(Box::new(self.unary()?)))
        } else {
            self.atom()
        }
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let position = self.position();
        match self.bump().cloned() {
            Some(Token::Num(v)) => Ok(Expr::Num(v)),
            Some(Token::Ident(name)) => match name.as_str() {
                "t" => Ok(Expr::T),
                "sin" | "cos" | "exp" => {
                    self.expect(Token::LParen, "'(' after function name")?;
                    let arg = Box::new(self.expr()?);
                    self.expect(Token::RParen, "')' closing the function argument")?;
                    Ok(match name.as_str() {
                        "sin" => Expr::Sin(arg),
                        "cos" => Expr::Cos(arg),
                        _ => Expr::Exp(arg),
                    })
                }
                other => Err(ParseError {
                    position,
                    message: format!(
                        "unknown identifier '{other}' (allowed: t, sin, cos, exp)"
                    ),
                }),
            },
            Some(Token::LParen) => {
                let inner = self.expr()?;
                self.expect(Token::RParen, "')'")?;
                Ok(inner)
            }
            Some(tok) => Err(ParseError {
                position,
                message: format!("unexpected token {tok:?}"),
            }),
            None => Err(ParseError {
                position,
                message: "unexpected end of input".to_string(),
            }),
        }
    }
}

/// Parses a scalar expression, requiring the whole input to be consumed.
pub fn parse_scalar_expression(text: &str) -> Result<Expr, ParseError> {
    let tokens = tokenize(text)?;
    let mut parser = Parser { tokens: &tokens, pos: 0, input_len: text.len() };
    let expr = parser.expr()?;
    if parser.pos != tokens.len() {
        return Err(parser.error("trailing input after the expression".to_string()));
    }
    Ok(expr)
}

/// Parses `[[e,e],[e,e]]` into a rectangular grid of scalar expressions.
pub fn parse_matrix_expression(text: &str) -> Result<Vec<Vec<Expr>>, ParseError> {
    let tokens = tokenize(text)?;
    let mut parser = Parser { tokens: &tokens, pos: 0, input_len: text.len() };
    parser.expect(Token::LBracket, "'[' opening the matrix")?;
    let mut rows: Vec<Vec<Expr>> = Vec::new();
    loop {
        parser.expect(Token::LBracket, "'[' opening a row")?;
        let mut row = vec![parser.expr()?];
        while parser.peek() == Some(&Token::Comma) {
            parser.pos += 1;
            row.push(parser.expr()?);
        }
        parser.expect(Token::RBracket, "']' closing the row")?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(parser.error(format!(
                    "ragged matrix: row has {} entries, expected {}",
                    row.len(),
                    first.len()
                )));
            }
        }
        rows.push(row);
        match parser.bump() {
            Some(Token::Comma) => continue,
            Some(Token::RBracket) => break,
            _ => {
                parser.pos = parser.pos.saturating_sub(1);
                return Err(parser.error("expected ',' or ']' after a row".to_string()));
            }
        }
    }
    if parser.pos != tokens.len() {
        return Err(parser.error("trailing input after the matrix".to_string()));
    }
    Ok(rows)
}

/// Evaluates a grid of expressions at time `t` into a dense matrix.
pub fn evaluate_matrix(rows: &[Vec<Expr>], t: f64) -> kcomp::Result<DenseMatrix> {
    let data: Vec<Vec<f64>> = rows.iter().map(|r| r.iter().map(|e| e.eval(t)).collect()).collect();
    DenseMatrix::from_rows(&data)
}
