use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// Elementary unary functions understood by the expression language.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Ln,
    Sqrt,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sqrt => "sqrt",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "exp" => Func::Exp,
            "ln" => Func::Ln,
            "sqrt" => Func::Sqrt,
            _ => return None,
        })
    }
}

/// A node of the expression tree.
#[derive(Clone, Debug, PartialEq)]
pub enum Node {
    Const(f64),
    /// Chart coordinate x^i, i in 0..4.
    Coord(usize),
    Param(Arc<str>),
    Neg(Expr),
    Add(Expr, Expr),
    Sub(Expr, Expr),
    Mul(Expr, Expr),
    Div(Expr, Expr),
    Pow(Expr, i32),
    Call(Func, Expr),
}

/// Immutable, cheaply clonable expression over the four chart coordinates.
#[derive(Clone, PartialEq)]
pub struct Expr(Arc<Node>);

/// Named parameter values (e.g. `M = 1`).
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ParamEnv {
    values: BTreeMap<String, f64>,
}

impl ParamEnv {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, name: &str, value: f64) -> Self {
        self.set(name, value);
        self
    }

    pub fn set(&mut self, name: &str, value: f64) {
        self.values.insert(name.to_string(), value);
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.values.get(name).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.values.iter().map(|(k, v)| (k.as_str(), *v))
    }

    /// Entries of `other` override entries of `self`.
    pub fn merged(&self, other: &ParamEnv) -> ParamEnv {
        let mut out = self.clone();
        for (k, v) in other.iter() {
            out.set(k, v);
        }
        out
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// A point of the coordinate chart.
pub type Point4 = [f64; 4];

#[derive(Clone, Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("domain error in `{expr}`: {reason}")]
    Domain { expr: String, reason: &'static str },
    #[error("unbound parameter `{0}`")]
    UnboundParam(String),
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expr({self})")
    }
}

impl Expr {
    pub fn node(&self) -> &Node {
        &self.0
    }

    fn wrap(node: Node) -> Expr {
        Expr(Arc::new(node))
    }

    pub fn constant(c: f64) -> Expr {
        Expr::wrap(Node::Const(c))
    }

    pub fn zero() -> Expr {
        Expr::constant(0.0)
    }

    pub fn one() -> Expr {
        Expr::constant(1.0)
    }

    pub fn coord(i: usize) -> Expr {
        assert!(i < 4, "coordinate index {i} out of range");
        Expr::wrap(Node::Coord(i))
    }

    pub fn param(name: &str) -> Expr {
        Expr::wrap(Node::Param(Arc::from(name)))
    }

    pub fn as_const(&self) -> Option<f64> {
        match self.node() {
            Node::Const(c) => Some(*c),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_const() == Some(0.0)
    }

    pub fn is_one(&self) -> bool {
        self.as_const() == Some(1.0)
    }

    // Raw constructors: no folding, used by the parser so that trees keep their
    // written shape.
    pub fn raw_neg(a: Expr) -> Expr {
        Expr::wrap(Node::Neg(a))
    }
    pub fn raw_add(a: Expr, b: Expr) -> Expr {
        Expr::wrap(Node::Add(a, b))
    }
    pub fn raw_sub(a: Expr, b: Expr) -> Expr {
        Expr::wrap(Node::Sub(a, b))
    }
    pub fn raw_mul(a: Expr, b: Expr) -> Expr {
        Expr::wrap(Node::Mul(a, b))
    }
    pub fn raw_div(a: Expr, b: Expr) -> Expr {
        Expr::wrap(Node::Div(a, b))
    }
    pub fn raw_pow(a: Expr, n: i32) -> Expr {
        Expr::wrap(Node::Pow(a, n))
    }
    pub fn raw_call(f: Func, a: Expr) -> Expr {
        Expr::wrap(Node::Call(f, a))
    }

    // Folding constructors.
    pub fn neg(a: Expr) -> Expr {
        match a.node() {
            Node::Const(c) => Expr::constant(-c),
            Node::Neg(inner) => inner.clone(),
            _ => Expr::raw_neg(a),
        }
    }

    pub fn add(a: Expr, b: Expr) -> Expr {
        match (a.as_const(), b.as_const()) {
            (Some(x), Some(y)) => Expr::constant(x + y),
            (Some(x), _) if x == 0.0 => b,
            (_, Some(y)) if y == 0.0 => a,
            _ => Expr::raw_add(a, b),
        }
    }

    pub fn sub(a: Expr, b: Expr) -> Expr {
        match (a.as_const(), b.as_const()) {
            (Some(x), Some(y)) => Expr::constant(x - y),
            (Some(x), _) if x == 0.0 => Expr::neg(b),
            (_, Some(y)) if y == 0.0 => a,
            _ => Expr::raw_sub(a, b),
        }
    }

    pub fn mul(a: Expr, b: Expr) -> Expr {
        match (a.as_const(), b.as_const()) {
            (Some(x), Some(y)) => Expr::constant(x * y),
            (Some(x), _) if x == 0.0 => Expr::zero(),
            (_, Some(y)) if y == 0.0 => Expr::zero(),
            (Some(x), _) if x == 1.0 => b,
            (_, Some(y)) if y == 1.0 => a,
            (Some(x), _) if x == -1.0 => Expr::neg(b),
            (_, Some(y)) if y == -1.0 => Expr::neg(a),
            _ => Expr::raw_mul(a, b),
        }
    }

    pub fn div(a: Expr, b: Expr) -> Expr {
        match (a.as_const(), b.as_const()) {
            (Some(x), _) if x == 0.0 => Expr::zero(),
            (Some(x), Some(y)) if y != 0.0 => Expr::constant(x / y),
            (_, Some(y)) if y == 1.0 => a,
            _ => Expr::raw_div(a, b),
        }
    }

    pub fn pow(a: Expr, n: i32) -> Expr {
        match (n, a.as_const()) {
            (0, _) => Expr::one(),
            (1, _) => a,
            (_, Some(c)) if n > 0 => Expr::constant(c.powi(n)),
            _ => Expr::raw_pow(a, n),
        }
    }

    pub fn call(f: Func, a: Expr) -> Expr {
        Expr::raw_call(f, a)
    }

    pub fn sin(a: Expr) -> Expr {
        Expr::call(Func::Sin, a)
    }
    pub fn cos(a: Expr) -> Expr {
        Expr::call(Func::Cos, a)
    }
    pub fn exp(a: Expr) -> Expr {
        Expr::call(Func::Exp, a)
    }
    pub fn sqrt(a: Expr) -> Expr {
        Expr::call(Func::Sqrt, a)
    }

    /// Sum of terms, skipping literal zeros.
    pub fn sum<I: IntoIterator<Item = Expr>>(terms: I) -> Expr {
        terms
            .into_iter()
            .fold(Expr::zero(), |acc, t| if t.is_zero() { acc } else { Expr::add(acc, t) })
    }

    pub fn scale(c: f64, a: Expr) -> Expr {
        Expr::mul(Expr::constant(c), a)
    }

    pub fn eval(&self, x: &Point4, p: &ParamEnv) -> Result<f64, EvalError> {
        let domain = |reason| EvalError::Domain {
            expr: self.to_string(),
            reason,
        };
        Ok(match self.node() {
            Node::Const(c) => *c,
            Node::Coord(i) => x[*i],
            Node::Param(name) => p
                .get(name)
                .ok_or_else(|| EvalError::UnboundParam(name.to_string()))?,
            Node::Neg(a) => -a.eval(x, p)?,
            Node::Add(a, b) => a.eval(x, p)? + b.eval(x, p)?,
            Node::Sub(a, b) => a.eval(x, p)? - b.eval(x, p)?,
            Node::Mul(a, b) => a.eval(x, p)? * b.eval(x, p)?,
            Node::Div(a, b) => {
                let num = a.eval(x, p)?;
                let den = b.eval(x, p)?;
                if den == 0.0 {
                    return Err(domain("division by zero"));
                }
                num / den
            }
            Node::Pow(a, n) => {
                let base = a.eval(x, p)?;
                if *n < 0 && base == 0.0 {
                    return Err(domain("negative power of zero"));
                }
                base.powi(*n)
            }
            Node::Call(f, a) => {
                let v = a.eval(x, p)?;
                match f {
                    Func::Sin => v.sin(),
                    Func::Cos => v.cos(),
                    Func::Tan => {
                        if v.cos() == 0.0 {
                            return Err(domain("tan at a pole"));
                        }
                        v.tan()
                    }
                    Func::Exp => v.exp(),
                    Func::Ln => {
                        if v <= 0.0 {
                            return Err(domain("logarithm of a non-positive number"));
                        }
                        v.ln()
                    }
                    Func::Sqrt => {
                        if v < 0.0 {
                            return Err(domain("square root of a negative number"));
                        }
                        v.sqrt()
                    }
                }
            }
        })
    }

    /// Exact partial derivative with respect to coordinate `i`.
    pub fn differentiate(&self, i: usize) -> Expr {
        assert!(i < 4, "coordinate index {i} out of range");
        match self.node() {
            Node::Const(_) | Node::Param(_) => Expr::zero(),
            Node::Coord(j) => {
                if *j == i {
                    Expr::one()
                } else {
                    Expr::zero()
                }
            }
            Node::Neg(a) => Expr::neg(a.differentiate(i)),
            Node::Add(a, b) => Expr::add(a.differentiate(i), b.differentiate(i)),
            Node::Sub(a, b) => Expr::sub(a.differentiate(i), b.differentiate(i)),
            Node::Mul(a, b) => Expr::add(
                Expr::mul(a.differentiate(i), b.clone()),
                Expr::mul(a.clone(), b.differentiate(i)),
            ),
            Node::Div(a, b) => {
                let da = a.differentiate(i);
                let db = b.differentiate(i);
                if db.is_zero() {
                    Expr::div(da, b.clone())
                } else {
                    Expr::div(
                        Expr::sub(Expr::mul(da, b.clone()), Expr::mul(a.clone(), db)),
                        Expr::pow(b.clone(), 2),
                    )
                }
            }
            Node::Pow(a, n) => {
                let da = a.differentiate(i);
                if *n == 0 || da.is_zero() {
                    return Expr::zero();
                }
                Expr::mul(
                    Expr::mul(Expr::constant(*n as f64), Expr::pow(a.clone(), n - 1)),
                    da,
                )
            }
            Node::Call(f, a) => {
                let da = a.differentiate(i);
                if da.is_zero() {
                    return Expr::zero();
                }
                let outer = match f {
                    Func::Sin => Expr::cos(a.clone()),
                    Func::Cos => Expr::neg(Expr::sin(a.clone())),
                    Func::Tan => Expr::div(Expr::one(), Expr::pow(Expr::cos(a.clone()), 2)),
                    Func::Exp => self.clone(),
                    Func::Ln => return Expr::div(da, a.clone()),
                    Func::Sqrt => {
                        return Expr::div(da, Expr::mul(Expr::constant(2.0), self.clone()))
                    }
                };
                Expr::mul(outer, da)
            }
        }
    }

    /// Replaces every coordinate x^i by `subs[i]`.
    pub fn substitute(&self, subs: &[Expr; 4]) -> Expr {
        match self.node() {
            Node::Const(_) | Node::Param(_) => self.clone(),
            Node::Coord(i) => subs[*i].clone(),
            Node::Neg(a) => Expr::neg(a.substitute(subs)),
            Node::Add(a, b) => Expr::add(a.substitute(subs), b.substitute(subs)),
            Node::Sub(a, b) => Expr::sub(a.substitute(subs), b.substitute(subs)),
            Node::Mul(a, b) => Expr::mul(a.substitute(subs), b.substitute(subs)),
            Node::Div(a, b) => Expr::div(a.substitute(subs), b.substitute(subs)),
            Node::Pow(a, n) => Expr::pow(a.substitute(subs), *n),
            Node::Call(f, a) => Expr::call(*f, a.substitute(subs)),
        }
    }

    /// Replaces named parameters by constants.
    pub fn bind_params(&self, p: &ParamEnv) -> Expr {
        match self.node() {
            Node::Const(_) | Node::Coord(_) => self.clone(),
            Node::Param(name) => match p.get(name) {
                Some(v) => Expr::constant(v),
                None => self.clone(),
            },
            Node::Neg(a) => Expr::neg(a.bind_params(p)),
            Node::Add(a, b) => Expr::add(a.bind_params(p), b.bind_params(p)),
            Node::Sub(a, b) => Expr::sub(a.bind_params(p), b.bind_params(p)),
            Node::Mul(a, b) => Expr::mul(a.bind_params(p), b.bind_params(p)),
            Node::Div(a, b) => Expr::div(a.bind_params(p), b.bind_params(p)),
            Node::Pow(a, n) => Expr::pow(a.bind_params(p), *n),
            Node::Call(f, a) => Expr::call(*f, a.bind_params(p)),
        }
    }

    /// Names of all parameters referenced by the tree.
    pub fn params(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_params(&mut out);
        out.sort();
        out.dedup();
        out
    }

    fn collect_params(&self, out: &mut Vec<String>) {
        match self.node() {
            Node::Const(_) | Node::Coord(_) => {}
            Node::Param(n) => out.push(n.to_string()),
            Node::Neg(a) | Node::Pow(a, _) | Node::Call(_, a) => a.collect_params(out),
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                a.collect_params(out);
                b.collect_params(out);
            }
        }
    }

    /// Number of nodes (shared subtrees counted every time they occur).
    pub fn size(&self) -> usize {
        match self.node() {
            Node::Const(_) | Node::Coord(_) | Node::Param(_) => 1,
            Node::Neg(a) | Node::Pow(a, _) | Node::Call(_, a) => 1 + a.size(),
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                1 + a.size() + b.size()
            }
        }
    }

    /// Printer using the given coordinate names.
    pub fn display_with<'a>(&'a self, coords: &'a [String; 4]) -> Printer<'a> {
        Printer {
            expr: self,
            coords: Some(coords),
        }
    }
}

impl From<f64> for Expr {
    fn from(c: f64) -> Self {
        Expr::constant(c)
    }
}

impl std::ops::Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        Expr::add(self, rhs)
    }
}

impl std::ops::Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        Expr::sub(self, rhs)
    }
}

impl std::ops::Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        Expr::mul(self, rhs)
    }
}

impl std::ops::Div for Expr {
    type Output = Expr;
    fn div(self, rhs: Expr) -> Expr {
        Expr::div(self, rhs)
    }
}

impl std::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(self)
    }
}

pub struct Printer<'a> {
    expr: &'a Expr,
    coords: Option<&'a [String; 4]>,
}

// Precedence levels, matching the grammar: sum < term < factor < power < atom.
const SUM: u8 = 0;
const TERM: u8 = 1;
const FACTOR: u8 = 2;
const ATOM: u8 = 4;

fn level(e: &Expr) -> u8 {
    match e.node() {
        Node::Add(..) | Node::Sub(..) => SUM,
        Node::Mul(..) | Node::Div(..) => TERM,
        Node::Neg(_) => FACTOR,
        Node::Pow(..) => 3,
        Node::Const(c) if *c < 0.0 || !c.is_finite() => SUM,
        _ => ATOM,
    }
}

impl Printer<'_> {
    fn write(&self, e: &Expr, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match e.node() {
            Node::Const(c) => write!(f, "{c}"),
            Node::Coord(i) => match self.coords {
                Some(names) => write!(f, "{}", names[*i]),
                None => write!(f, "x{i}"),
            },
            Node::Param(n) => write!(f, "{n}"),
            Node::Neg(a) => {
                write!(f, "-")?;
                self.child(a, 3, f)
            }
            Node::Add(a, b) => {
                self.child(a, SUM, f)?;
                write!(f, " + ")?;
                self.child(b, TERM, f)
            }
            Node::Sub(a, b) => {
                self.child(a, SUM, f)?;
                write!(f, " - ")?;
                self.child(b, TERM, f)
            }
            Node::Mul(a, b) => {
                self.child(a, TERM, f)?;
                write!(f, "*")?;
                self.child(b, FACTOR, f)
            }
            Node::Div(a, b) => {
                self.child(a, TERM, f)?;
                write!(f, "/")?;
                self.child(b, FACTOR, f)
            }
            Node::Pow(a, n) => {
                self.child(a, ATOM, f)?;
                write!(f, "^{n}")
            }
            Node::Call(func, a) => {
                write!(f, "{}(", func.name())?;
                self.write(a, f)?;
                write!(f, ")")
            }
        }
    }

    fn child(&self, e: &Expr, min_level: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if level(e) >= min_level {
            self.write(e, f)
        } else {
            write!(f, "(")?;
            self.write(e, f)?;
            write!(f, ")")
        }
    }
}

impl fmt::Display for Printer<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write(self.expr, f)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        Printer {
            expr: self,
            coords: None,
        }
        .fmt(f)
    }
}
