//! Scalar expressions in one free variable: parsing, evaluation, printing and exact derivatives.

mod diff;
mod parser;

use std::fmt;

use crate::error::{Error, Result};

pub use parser::parse;

/// Built-in unary functions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Sinh,
    Cosh,
    Tanh,
    Exp,
    Log,
    Sqrt,
    Atan,
}

impl Func {
    pub const ALL: [Func; 10] = [
        Func::Sin,
        Func::Cos,
        Func::Tan,
        Func::Sinh,
        Func::Cosh,
        Func::Tanh,
        Func::Exp,
        Func::Log,
        Func::Sqrt,
        Func::Atan,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Tanh => "tanh",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Atan => "atan",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == name)
    }

    fn apply(self, x: f64) -> Result<f64> {
        match self {
            Func::Log if x <= 0.0 => Err(Error::Eval(format!("log of non-positive value {x}"))),
            Func::Sqrt if x < 0.0 => Err(Error::Eval(format!("sqrt of negative value {x}"))),
            _ => Ok(self.apply_raw(x)),
        }
    }

    fn apply_raw(self, x: f64) -> f64 {
        match self {
            Func::Sin => x.sin(),
            Func::Cos => x.cos(),
            Func::Tan => x.tan(),
            Func::Sinh => x.sinh(),
            Func::Cosh => x.cosh(),
            Func::Tanh => x.tanh(),
            Func::Exp => x.exp(),
            Func::Log => x.ln(),
            Func::Sqrt => x.sqrt(),
            Func::Atan => x.atan(),
        }
    }
}

/// Expression tree. Build through the smart constructors, which fold constants and drop
/// neutral elements.
#[derive(Clone, Debug, PartialEq)]
pub enum Node {
    Num(f64),
    Var,
    Neg(Box<Node>),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    Pow(Box<Node>, i32),
    Call(Func, Box<Node>),
}

impl Node {
    pub fn num(x: f64) -> Node {
        Node::Num(x)
    }

    pub fn as_num(&self) -> Option<f64> {
        match self {
            Node::Num(x) => Some(*x),
            _ => None,
        }
    }

    pub fn neg(a: Node) -> Node {
        match a {
            Node::Num(x) => Node::Num(-x),
            Node::Neg(inner) => *inner,
            other => Node::Neg(Box::new(other)),
        }
    }

    pub fn add(a: Node, b: Node) -> Node {
        match (a.as_num(), b.as_num()) {
            (Some(x), Some(y)) => Node::Num(x + y),
            (Some(x), _) if x == 0.0 => b,
            (_, Some(y)) if y == 0.0 => a,
            _ => Node::Add(Box::new(a), Box::new(b)),
        }
    }

    pub fn sub(a: Node, b: Node) -> Node {
        match (a.as_num(), b.as_num()) {
            (Some(x), Some(y)) => Node::Num(x - y),
            (Some(x), _) if x == 0.0 => Node::neg(b),
            (_, Some(y)) if y == 0.0 => a,
            _ => Node::Sub(Box::new(a), Box::new(b)),
        }
    }

    pub fn mul(a: Node, b: Node) -> Node {
        match (a.as_num(), b.as_num()) {
            (Some(x), Some(y)) => Node::Num(x * y),
            (Some(x), _) | (_, Some(x)) if x == 0.0 => Node::Num(0.0),
            (Some(x), _) if x == 1.0 => b,
            (_, Some(y)) if y == 1.0 => a,
            (Some(x), _) if x == -1.0 => Node::neg(b),
            (_, Some(y)) if y == -1.0 => Node::neg(a),
            _ => Node::Mul(Box::new(a), Box::new(b)),
        }
    }

    pub fn div(a: Node, b: Node) -> Node {
        match (a.as_num(), b.as_num()) {
            (Some(x), Some(y)) if y != 0.0 => Node::Num(x / y),
            (Some(x), _) if x == 0.0 => Node::Num(0.0),
            (_, Some(y)) if y == 1.0 => a,
            _ => Node::Div(Box::new(a), Box::new(b)),
        }
    }

    pub fn pow(a: Node, n: i32) -> Node {
        match (a.as_num(), n) {
            (_, 0) => Node::Num(1.0),
            (_, 1) => a,
            (Some(x), n) if x != 0.0 || n > 0 => Node::Num(x.powi(n)),
            _ => Node::Pow(Box::new(a), n),
        }
    }

    pub fn call(f: Func, a: Node) -> Node {
        match a.as_num() {
            Some(x) => match f.apply(x) {
                Ok(y) if y.is_finite() => Node::Num(y),
                _ => Node::Call(f, Box::new(a)),
            },
            None => Node::Call(f, Box::new(a)),
        }
    }

    /// Rebuild the tree through the smart constructors.
    pub fn folded(&self) -> Node {
        match self {
            Node::Num(x) => Node::Num(*x),
            Node::Var => Node::Var,
            Node::Neg(a) => Node::neg(a.folded()),
            Node::Add(a, b) => Node::add(a.folded(), b.folded()),
            Node::Sub(a, b) => Node::sub(a.folded(), b.folded()),
            Node::Mul(a, b) => Node::mul(a.folded(), b.folded()),
            Node::Div(a, b) => Node::div(a.folded(), b.folded()),
            Node::Pow(a, n) => Node::pow(a.folded(), *n),
            Node::Call(f, a) => Node::call(*f, a.folded()),
        }
    }

    fn eval(&self, x: f64) -> Result<f64> {
        let r = match self {
            Node::Num(c) => *c,
            Node::Var => x,
            Node::Neg(a) => -a.eval(x)?,
            Node::Add(a, b) => a.eval(x)? + b.eval(x)?,
            Node::Sub(a, b) => a.eval(x)? - b.eval(x)?,
            Node::Mul(a, b) => a.eval(x)? * b.eval(x)?,
            Node::Div(a, b) => {
                let d = b.eval(x)?;
                if d == 0.0 {
                    return Err(Error::Eval("division by zero".into()));
                }
                a.eval(x)? / d
            }
            Node::Pow(a, n) => {
                let base = a.eval(x)?;
                if base == 0.0 && *n < 0 {
                    return Err(Error::Eval("zero raised to a negative power".into()));
                }
                base.powi(*n)
            }
            Node::Call(f, a) => f.apply(a.eval(x)?)?,
        };
        if r.is_finite() {
            Ok(r)
        } else {
            Err(Error::Eval(format!("non-finite value at {x}")))
        }
    }

    fn eval_raw(&self, x: f64) -> f64 {
        match self {
            Node::Num(c) => *c,
            Node::Var => x,
            Node::Neg(a) => -a.eval_raw(x),
            Node::Add(a, b) => a.eval_raw(x) + b.eval_raw(x),
            Node::Sub(a, b) => a.eval_raw(x) - b.eval_raw(x),
            Node::Mul(a, b) => a.eval_raw(x) * b.eval_raw(x),
            Node::Div(a, b) => a.eval_raw(x) / b.eval_raw(x),
            Node::Pow(a, n) => a.eval_raw(x).powi(*n),
            Node::Call(f, a) => f.apply_raw(a.eval_raw(x)),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Node::Add(..) | Node::Sub(..) => 1,
            Node::Mul(..) | Node::Div(..) => 2,
            Node::Neg(..) => 3,
            Node::Num(x) if x.is_sign_negative() => 3,
            Node::Pow(..) => 4,
            _ => 5,
        }
    }

    fn write(&self, f: &mut fmt::Formatter<'_>, var: &str) -> fmt::Result {
        let child = |f: &mut fmt::Formatter<'_>, n: &Node, min: u8| -> fmt::Result {
            if n.precedence() < min {
                write!(f, "(")?;
                n.write(f, var)?;
                write!(f, ")")
            } else {
                n.write(f, var)
            }
        };
        match self {
            Node::Num(x) => write!(f, "{x}"),
            Node::Var => write!(f, "{var}"),
            Node::Neg(a) => {
                write!(f, "-")?;
                child(f, a, 3)
            }
            Node::Add(a, b) => {
                child(f, a, 1)?;
                write!(f, " + ")?;
                child(f, b, 2)
            }
            Node::Sub(a, b) => {
                child(f, a, 1)?;
                write!(f, " - ")?;
                child(f, b, 2)
            }
            Node::Mul(a, b) => {
                child(f, a, 2)?;
                write!(f, "*")?;
                child(f, b, 3)
            }
            Node::Div(a, b) => {
                child(f, a, 2)?;
                write!(f, "/")?;
                child(f, b, 3)
            }
            Node::Pow(a, n) => {
                child(f, a, 5)?;
                write!(f, "^{n}")
            }
            Node::Call(func, a) => {
                write!(f, "{}(", func.name())?;
                a.write(f, var)?;
                write!(f, ")")
            }
        }
    }
}

/// A parsed expression together with the name of its free variable.
#[derive(Clone, Debug, PartialEq)]
pub struct Expr {
    root: Node,
    var: String,
}

impl Expr {
    pub fn new(root: Node, var: impl Into<String>) -> Self {
        Self {
            root,
            var: var.into(),
        }
    }

    pub fn constant(x: f64) -> Self {
        Self::new(Node::Num(x), "z")
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn var(&self) -> &str {
        &self.var
    }

    pub fn as_constant(&self) -> Option<f64> {
        self.root.as_num()
    }

    /// Evaluate with domain checks (log/sqrt arguments, division by zero, overflow).
    pub fn eval(&self, x: f64) -> Result<f64> {
        self.root.eval(x)
    }

    /// Evaluate without checks; domain violations surface as NaN or infinities.
    pub fn eval_raw(&self, x: f64) -> f64 {
        self.root.eval_raw(x)
    }

    /// Exact derivative with respect to the free variable.
    pub fn differentiate(&self) -> Expr {
        Expr::new(diff::derivative(&self.root), self.var.clone())
    }

    /// The same expression with constants folded.
    pub fn folded(&self) -> Expr {
        Expr::new(self.root.folded(), self.var.clone())
    }

    /// Substitute `inner` for the free variable.
    pub fn compose(&self, inner: &Expr) -> Expr {
        fn go(n: &Node, inner: &Node) -> Node {
            match n {
                Node::Num(x) => Node::Num(*x),
                Node::Var => inner.clone(),
                Node::Neg(a) => Node::neg(go(a, inner)),
                Node::Add(a, b) => Node::add(go(a, inner), go(b, inner)),
                Node::Sub(a, b) => Node::sub(go(a, inner), go(b, inner)),
                Node::Mul(a, b) => Node::mul(go(a, inner), go(b, inner)),
                Node::Div(a, b) => Node::div(go(a, inner), go(b, inner)),
                Node::Pow(a, k) => Node::pow(go(a, inner), *k),
                Node::Call(f, a) => Node::call(*f, go(a, inner)),
            }
        }
        Expr::new(go(&self.root, &inner.root), inner.var.clone())
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.root.write(f, &self.var)
    }
}

impl std::str::FromStr for Expr {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        parse(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn evaluation_examples() {
        assert_eq!(parse("sinh(z)").unwrap().eval(0.0).unwrap(), 0.0);
        assert!(matches!(
            parse("1/z").unwrap().eval(0.0),
            Err(Error::Eval(_))
        ));
        assert_eq!(parse("z^3 - 3*z").unwrap().eval(2.0).unwrap(), 2.0);
        assert!(parse("log(z)").unwrap().eval(-1.0).is_err());
        assert!(parse("sqrt(z)").unwrap().eval(-1.0).is_err());
        assert!(parse("z^-1").unwrap().eval(0.0).is_err());
    }

    #[test]
    fn printing_is_minimal() {
        for (src, want) in [
            ("(z+1)*(z-1)", "(z + 1)*(z - 1)"),
            ("-(z^2)", "-z^2"),
            ("(-z)^2", "(-z)^2"),
            ("z - (1 - z)", "z - (1 - z)"),
            ("z/(2*z)", "z/(2*z)"),
            ("exp(-z^2)", "exp(-z^2)"),
        ] {
            assert_eq!(parse(src).unwrap().to_string(), want);
        }
    }

    #[test]
    fn compose_substitutes() {
        let outer = parse("z^2 + 1").unwrap();
        let inner = parse("sin(u)").unwrap();
        let c = outer.compose(&inner);
        assert_eq!(c.var(), "u");
        assert!((c.eval(0.3).unwrap() - (0.3f64.sin().powi(2) + 1.0)).abs() < 1e-15);
    }
}
