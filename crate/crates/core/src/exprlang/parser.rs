use super::{Expr, Func, Node};
use crate::error::{Error, Result};

/// Parse an expression in at most one free variable.
///
/// Grammar (whitespace-insensitive):
/// ```text
/// sum     := product (('+' | '-') product)*
/// product := unary (('*' | '/') unary)*
/// unary   := '-' unary | power
/// power   := primary ('^' integer)*
/// integer := '-'? digits | '(' '-'? digits ')'
/// primary := number | 'pi' | name '(' sum ')' | variable | '(' sum ')'
/// ```
pub fn parse(text: &str) -> Result<Expr> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
        var: None,
    };
    let root = p.sum()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.error("unexpected trailing input"));
    }
    let var = p.var.map(|(name, _)| name).unwrap_or_else(|| "z".into());
    Ok(Expr::new(root, var))
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    var: Option<(String, usize)>,
}

impl Parser<'_> {
    fn error(&self, message: &str) -> Error {
        Error::Syntax {
            offset: self.pos,
            message: message.into(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn sum(&mut self) -> Result<Node> {
        let mut acc = self.product()?;
        loop {
            if self.eat(b'+') {
                acc = Node::add(acc, self.product()?);
            } else if self.eat(b'-') {
                acc = Node::sub(acc, self.product()?);
            } else {
                return Ok(acc);
            }
        }
    }

    fn product(&mut self) -> Result<Node> {
        let mut acc = self.unary()?;
        loop {
            if self.eat(b'*') {
                acc = Node::mul(acc, self.unary()?);
            } else if self.eat(b'/') {
                acc = Node::div(acc, self.unary()?);
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<Node> {
        if self.eat(b'-') {
            Ok(Node::neg(self.unary()?))
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<Node> {
        let mut base = self.primary()?;
        while self.eat(b'^') {
            let n = self.integer()?;
            base = Node::pow(base, n);
        }
        Ok(base)
    }

    fn integer(&mut self) -> Result<i32> {
        let paren = self.eat(b'(');
        let negative = self.eat(b'-');
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.error("expected an integer exponent"));
        }
        if self.pos < self.src.len() && matches!(self.src[self.pos], b'.' | b'e' | b'E') {
            return Err(self.error("exponents must be integers"));
        }
        let digits = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii digits");
        let mut n: i32 = digits.parse().map_err(|_| Error::Syntax {
            offset: start,
            message: "exponent out of range".into(),
        })?;
        if negative {
            n = -n;
        }
        if paren && !self.eat(b')') {
            return Err(self.error("expected `)`"));
        }
        Ok(n)
    }

    fn primary(&mut self) -> Result<Node> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let inner = self.sum()?;
                if !self.eat(b')') {
                    return Err(self.error("expected `)`"));
                }
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => self.name(),
            Some(_) => Err(self.error("expected a number, name or `(`")),
            None => Err(self.error("unexpected end of input")),
        }
    }

    fn number(&mut self) -> Result<Node> {
        let start = self.pos;
        let digits = |p: &mut Self| {
            while p.pos < p.src.len() && p.src[p.pos].is_ascii_digit() {
                p.pos += 1;
            }
        };
        digits(self);
        if self.pos < self.src.len() && self.src[self.pos] == b'.' {
            self.pos += 1;
            digits(self);
        }
        if self.pos < self.src.len() && matches!(self.src[self.pos], b'e' | b'E') {
            let save = self.pos;
            self.pos += 1;
            if self.pos < self.src.len() && matches!(self.src[self.pos], b'+' | b'-') {
                self.pos += 1;
            }
            let exp_start = self.pos;
            digits(self);
            if exp_start == self.pos {
                self.pos = save;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii number");
        text.parse::<f64>()
            .map(Node::Num)
            .map_err(|_| Error::Syntax {
                offset: start,
                message: format!("malformed number `{text}`"),
            })
    }

    fn name(&mut self) -> Result<Node> {
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
        {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos])
            .expect("ascii name")
            .to_string();
        if self.peek() == Some(b'(') {
            let Some(func) = Func::from_name(&name) else {
                return Err(Error::UnknownIdentifier {
                    name,
                    offset: start,
                });
            };
            self.pos += 1;
            let arg = self.sum()?;
            if !self.eat(b')') {
                return Err(self.error("expected `)`"));
            }
            return Ok(Node::call(func, arg));
        }
        if name == "pi" {
            return Ok(Node::Num(std::f64::consts::PI));
        }
        if Func::from_name(&name).is_some() {
            return Err(Error::Syntax {
                offset: self.pos,
                message: format!("function `{name}` needs an argument"),
            });
        }
        match &self.var {
            None => {
                self.var = Some((name, start));
                Ok(Node::Var)
            }
            Some((v, _)) if *v == name => Ok(Node::Var),
            Some(_) => Err(Error::UnknownIdentifier {
                name,
                offset: start,
            }),
        }
    }
}
