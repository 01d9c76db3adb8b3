//! Plain-text frame definitions.
//!
//! ```text
//! dim 3
//! domain -1 1 -1 1 -1 1
//! 1 0  0
//! 0 1  0
//! 0 x1 1
//! ```
//!
//! Each row holds `n` whitespace-separated expressions. Expressions use
//! `+ - * / ^`, `sin cos exp sqrt`, numeric literals and the coordinates
//! `x1 … xn`. Blank lines and lines starting with `#` are ignored.

use std::sync::Arc;

use nalgebra::DMatrix;

use super::{evaluate_frame, FrameProvider};
use crate::domain::Domain;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Sqrt,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    /// Zero-based coordinate index.
    Var(usize),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i32),
    Call(Func, Box<Expr>),
}

impl Expr {
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Expr::Num(v) => *v,
            Expr::Var(i) => x[*i],
            Expr::Neg(e) => -e.eval(x),
            Expr::Bin(op, l, r) => {
                let (a, b) = (l.eval(x), r.eval(x));
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => a / b,
                }
            }
            Expr::Pow(b, k) => b.eval(x).powi(*k),
            Expr::Call(f, a) => {
                let v = a.eval(x);
                match f {
                    Func::Sin => v.sin(),
                    Func::Cos => v.cos(),
                    Func::Exp => v.exp(),
                    Func::Sqrt => v.sqrt(),
                }
            }
        }
    }

    /// Parses one expression; `line`/`column` locate it in the source for errors.
    pub fn parse(src: &str, dim: usize, line: usize, column: usize) -> Result<Expr> {
        let mut p = Parser { chars: src.chars().collect(), pos: 0, dim, line, column };
        let e = p.expr()?;
        p.skip_ws();
        if p.pos < p.chars.len() {
            return Err(p.error(format!("unexpected '{}'", p.chars[p.pos])));
        }
        Ok(e)
    }
}

struct Parser {
    chars: Vec<char>,
    pos: usize,
    dim: usize,
    line: usize,
    column: usize,
}

impl Parser {
    fn error(&self, message: impl Into<String>) -> Error {
        Error::Syntax { line: self.line, column: self.column + self.pos, message: message.into() }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(char::is_whitespace) {
            self.pos += 1;
        }
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            let op = if self.eat('+') {
                BinOp::Add
            } else if self.eat('-') {
                BinOp::Sub
            } else {
                return Ok(lhs);
            };
            let rhs = self.term()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.factor()?;
        loop {
            let op = if self.eat('*') {
                BinOp::Mul
            } else if self.eat('/') {
                BinOp::Div
            } else {
                return Ok(lhs);
            };
            let rhs = self.factor()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn factor(&mut self) -> Result<Expr> {
        if self.eat('-') {
            return Ok(Expr::Neg(Box::new(self.factor()?)));
        }
        let base = self.base()?;
        if self.eat('^') {
            self.skip_ws();
            let start = self.pos;
            if self.peek() == Some('-') {
                self.pos += 1;
            }
            while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                self.pos += 1;
            }
            let text: String = self.chars[start..self.pos].iter().collect();
            let k = text.parse::<i32>().map_err(|_| {
                self.pos = start;
                self.error("expected an integer exponent")
            })?;
            return Ok(Expr::Pow(Box::new(base), k));
        }
        Ok(base)
    }

    fn base(&mut self) -> Result<Expr> {
        self.skip_ws();
        let Some(c) = self.peek() else {
            return Err(self.error("unexpected end of expression"));
        };
        if c == '(' {
            self.pos += 1;
            let e = self.expr()?;
            if !self.eat(')') {
                return Err(self.error("expected ')'"));
            }
            return Ok(e);
        }
        if c.is_ascii_digit() || c == '.' {
            return self.number();
        }
        if c.is_ascii_alphabetic() {
            return self.identifier();
        }
        Err(self.error(format!("unexpected '{c}'")))
    }

    fn number(&mut self) -> Result<Expr> {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit() || c == '.') {
            self.pos += 1;
        }
        if matches!(self.peek(), Some('e' | 'E')) {
            let save = self.pos;
            self.pos += 1;
            if matches!(self.peek(), Some('+' | '-')) {
                self.pos += 1;
            }
            if self.peek().is_some_and(|c| c.is_ascii_digit()) {
                while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                    self.pos += 1;
                }
            } else {
                self.pos = save;
            }
        }
        let text: String = self.chars[start..self.pos].iter().collect();
        text.parse::<f64>().map(Expr::Num).map_err(|_| {
            self.pos = start;
            self.error(format!("malformed number '{text}'"))
        })
    }

    fn identifier(&mut self) -> Result<Expr> {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_alphanumeric() || c == '_') {
            self.pos += 1;
        }
        let name: String = self.chars[start..self.pos].iter().collect();
        let func = match name.as_str() {
            "sin" => Some(Func::Sin),
            "cos" => Some(Func::Cos),
            "exp" => Some(Func::Exp),
            "sqrt" => Some(Func::Sqrt),
            _ => None,
        };
        if let Some(f) = func {
            if !self.eat('(') {
                return Err(self.error(format!("expected '(' after {name}")));
            }
            let arg = self.expr()?;
            if !self.eat(')') {
                return Err(self.error("expected ')'"));
            }
            return Ok(Expr::Call(f, Box::new(arg)));
        }
        if let Some(digits) = name.strip_prefix('x') {
            if let Ok(k) = digits.parse::<usize>() {
                if (1..=self.dim).contains(&k) && digits.chars().all(|c| c.is_ascii_digit()) {
                    return Ok(Expr::Var(k - 1));
                }
            }
        }
        Err(Error::UnknownIdentifier { name, line: self.line, column: self.column + start })
    }
}

fn header<'a>(lines: &mut impl Iterator<Item = (usize, &'a str)>, keyword: &str) -> Result<(usize, Vec<&'a str>)> {
    let Some((lineno, text)) = lines.next() else {
        return Err(Error::Syntax { line: 0, column: 1, message: format!("missing '{keyword}' line") });
    };
    let mut words = text.split_whitespace();
    if words.next() != Some(keyword) {
        return Err(Error::Syntax { line: lineno, column: 1, message: format!("expected '{keyword}'") });
    }
    Ok((lineno, words.collect()))
}

fn parse_number(word: &str, line: usize, text: &str) -> Result<f64> {
    let column = word.as_ptr() as usize - text.as_ptr() as usize + 1;
    word.parse::<f64>()
        .map_err(|_| Error::Syntax { line, column, message: format!("expected a number, found '{word}'") })
}

/// Builds a provider from the text format described in the module docs.
pub fn parse_frame_expr(src: &str) -> Result<FrameProvider> {
    let mut lines = src
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| {
            let t = l.trim();
            !t.is_empty() && !t.starts_with('#')
        });

    let (dim_line, dim_words) = header(&mut lines, "dim")?;
    let dim_text = src.lines().nth(dim_line - 1).unwrap_or("");
    let dim = match dim_words.as_slice() {
        [w] => w.parse::<usize>().ok().filter(|n| *n >= 1).ok_or_else(|| Error::Syntax {
            line: dim_line,
            column: w.as_ptr() as usize - dim_text.as_ptr() as usize + 1,
            message: format!("dimension must be a positive integer, found '{w}'"),
        })?,
        _ => {
            return Err(Error::Syntax { line: dim_line, column: 1, message: "expected 'dim n'".into() });
        }
    };

    let (dom_line, dom_words) = header(&mut lines, "domain")?;
    let dom_text = src.lines().nth(dom_line - 1).unwrap_or("");
    if dom_words.len() != 2 * dim {
        return Err(Error::Shape(format!(
            "line {dom_line}: domain needs {} bounds for dim {dim}, found {}",
            2 * dim,
            dom_words.len()
        )));
    }
    let bounds = dom_words
        .iter()
        .map(|w| parse_number(w, dom_line, dom_text))
        .collect::<Result<Vec<_>>>()?;
    let lo = bounds.iter().step_by(2).copied().collect();
    let hi = bounds.iter().skip(1).step_by(2).copied().collect();
    let domain = Domain::new(lo, hi)?;

    let mut grid = Vec::with_capacity(dim * dim);
    for row in 0..dim {
        let Some((lineno, text)) = lines.next() else {
            return Err(Error::Shape(format!("expected {dim} rows of expressions, found {row}")));
        };
        let words: Vec<&str> = text.split_whitespace().collect();
        if words.len() != dim {
            return Err(Error::Shape(format!("line {lineno}: expected {dim} expressions, found {}", words.len())));
        }
        for w in words {
            let column = w.as_ptr() as usize - text.as_ptr() as usize + 1;
            grid.push(Expr::parse(w, dim, lineno, column)?);
        }
    }
    if let Some((lineno, _)) = lines.next() {
        return Err(Error::Shape(format!("line {lineno}: more than {dim} rows of expressions")));
    }

    let grid = Arc::new(grid);
    let provider = FrameProvider::new("expression", domain, move |x| {
        DMatrix::from_row_iterator(dim, dim, grid.iter().map(|e| e.eval(x)))
    });
    evaluate_frame(&provider, &provider.domain().center())?;
    Ok(provider)
}
