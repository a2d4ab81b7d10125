//! Scalar expression engine.
//!
//! Expressions are trees over chart coordinates with exact symbolic
//! differentiation, so second derivatives (curvature, wave operators) stay
//! exact instead of stacking finite differences. Only constant folding and
//! trivial-term elimination are performed; field equality is always tested
//! numerically at sample points, never structurally.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::geometry::Chart;

/// Expression tree node. Children are shared (`Arc`) so differentiation of
/// composite expressions does not copy subtrees.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    /// Coordinate variable by index into the owning chart.
    Var(usize),
    Add(Node, Node),
    Sub(Node, Node),
    Mul(Node, Node),
    Div(Node, Node),
    /// Constant real exponent. Integer exponents keep negative bases legal;
    /// non-integer exponents require a positive base at evaluation time.
    Pow(Node, f64),
    Neg(Node),
    Sin(Node),
    Cos(Node),
    Tan(Node),
    Cot(Node),
    Exp(Node),
    Ln(Node),
    Sqrt(Node),
}

pub type Node = Arc<Expr>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParseError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { offset: usize, name: String },
}

#[derive(Debug, Error, Clone, PartialEq)]
#[error("domain error: {reason} in `{subexpr}`")]
pub struct EvalError {
    pub reason: String,
    /// Offending subexpression, printed in the expression grammar.
    pub subexpr: String,
}

/// A scalar function of chart coordinates: immutable, shareable, pure.
#[derive(Clone)]
pub struct ScalarField {
    node: Node,
    names: Arc<Vec<String>>,
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ScalarField({})", self)
    }
}

fn is_const(node: &Expr, v: f64) -> bool {
    matches!(node, Expr::Const(c) if *c == v)
}

impl ScalarField {
    pub fn from_node(node: Node, names: Arc<Vec<String>>) -> Self {
        ScalarField { node, names }
    }

    pub fn constant_for(chart: &Chart, v: f64) -> Self {
        ScalarField {
            node: Arc::new(Expr::Const(v)),
            names: chart.coord_names_arc(),
        }
    }

    pub fn var_for(chart: &Chart, idx: usize) -> Self {
        assert!(idx < chart.dim, "variable index out of chart range");
        ScalarField {
            node: Arc::new(Expr::Var(idx)),
            names: chart.coord_names_arc(),
        }
    }

    pub fn node(&self) -> &Node {
        &self.node
    }

    pub fn names(&self) -> &Arc<Vec<String>> {
        &self.names
    }

    pub fn is_zero(&self) -> bool {
        is_const(&self.node, 0.0)
    }

    pub fn is_one(&self) -> bool {
        is_const(&self.node, 1.0)
    }

    fn wrap(&self, node: Node) -> Self {
        ScalarField {
            node,
            names: self.names.clone(),
        }
    }

    pub fn add(&self, rhs: &Self) -> Self {
        self.wrap(mk_add(self.node.clone(), rhs.node.clone()))
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        self.wrap(mk_sub(self.node.clone(), rhs.node.clone()))
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        self.wrap(mk_mul(self.node.clone(), rhs.node.clone()))
    }

    pub fn div(&self, rhs: &Self) -> Self {
        self.wrap(mk_div(self.node.clone(), rhs.node.clone()))
    }

    pub fn neg(&self) -> Self {
        self.wrap(mk_neg(self.node.clone()))
    }

    pub fn powi(&self, e: i32) -> Self {
        self.wrap(mk_pow(self.node.clone(), e as f64))
    }

    pub fn powf(&self, e: f64) -> Self {
        self.wrap(mk_pow(self.node.clone(), e))
    }

    pub fn sin(&self) -> Self {
        self.wrap(mk_fun(Fun::Sin, self.node.clone()))
    }

    pub fn cos(&self) -> Self {
        self.wrap(mk_fun(Fun::Cos, self.node.clone()))
    }

    pub fn tan(&self) -> Self {
        self.wrap(mk_fun(Fun::Tan, self.node.clone()))
    }

    pub fn cot(&self) -> Self {
        self.wrap(mk_fun(Fun::Cot, self.node.clone()))
    }

    pub fn exp(&self) -> Self {
        self.wrap(mk_fun(Fun::Exp, self.node.clone()))
    }

    pub fn ln(&self) -> Self {
        self.wrap(mk_fun(Fun::Ln, self.node.clone()))
    }

    pub fn sqrt(&self) -> Self {
        self.wrap(mk_fun(Fun::Sqrt, self.node.clone()))
    }

    pub fn scale(&self, c: f64) -> Self {
        self.wrap(mk_mul(Arc::new(Expr::Const(c)), self.node.clone()))
    }

    /// Exact symbolic partial derivative with respect to coordinate `var`.
    pub fn diff(&self, var: usize) -> Self {
        self.wrap(diff_node(&self.node, var))
    }

    /// IEEE double evaluation at a point; deterministic. Domain failures
    /// (division by zero, `ln` of a nonpositive value, `cot`/`tan` poles,
    /// fractional powers of negative values) are reported with the offending
    /// subexpression.
    pub fn eval(&self, point: &[f64]) -> Result<f64, EvalError> {
        let mut memo: HashMap<*const Expr, f64> = HashMap::new();
        let v = eval_node(&self.node, point, &self.names, &mut memo)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(EvalError {
                reason: "non-finite result".into(),
                subexpr: self.to_string(),
            })
        }
    }
}

impl fmt::Display for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_node(f, &self.node, &self.names, 0)
    }
}

// ---------------------------------------------------------------------------
// smart constructors (constant folding + trivial-term elimination only)
// ---------------------------------------------------------------------------

fn cval(n: &Expr) -> Option<f64> {
    match n {
        Expr::Const(c) => Some(*c),
        _ => None,
    }
}

pub(crate) fn mk_add(a: Node, b: Node) -> Node {
    if let (Some(x), Some(y)) = (cval(&a), cval(&b)) {
        return Arc::new(Expr::Const(x + y));
    }
    if is_const(&a, 0.0) {
        return b;
    }
    if is_const(&b, 0.0) {
        return a;
    }
    Arc::new(Expr::Add(a, b))
}

pub(crate) fn mk_sub(a: Node, b: Node) -> Node {
    if let (Some(x), Some(y)) = (cval(&a), cval(&b)) {
        return Arc::new(Expr::Const(x - y));
    }
    if is_const(&b, 0.0) {
        return a;
    }
    if is_const(&a, 0.0) {
        return mk_neg(b);
    }
    Arc::new(Expr::Sub(a, b))
}

pub(crate) fn mk_mul(a: Node, b: Node) -> Node {
    if let (Some(x), Some(y)) = (cval(&a), cval(&b)) {
        return Arc::new(Expr::Const(x * y));
    }
    if is_const(&a, 0.0) || is_const(&b, 0.0) {
        return Arc::new(Expr::Const(0.0));
    }
    if is_const(&a, 1.0) {
        return b;
    }
    if is_const(&b, 1.0) {
        return a;
    }
    if is_const(&a, -1.0) {
        return mk_neg(b);
    }
    if is_const(&b, -1.0) {
        return mk_neg(a);
    }
    Arc::new(Expr::Mul(a, b))
}

pub(crate) fn mk_div(a: Node, b: Node) -> Node {
    if let (Some(x), Some(y)) = (cval(&a), cval(&b)) {
        if y != 0.0 {
            return Arc::new(Expr::Const(x / y));
        }
    }
    if is_const(&a, 0.0) && !is_const(&b, 0.0) {
        return Arc::new(Expr::Const(0.0));
    }
    if is_const(&b, 1.0) {
        return a;
    }
    Arc::new(Expr::Div(a, b))
}

pub(crate) fn mk_neg(a: Node) -> Node {
    if let Some(x) = cval(&a) {
        return Arc::new(Expr::Const(-x));
    }
    if let Expr::Neg(inner) = &*a {
        return inner.clone();
    }
    Arc::new(Expr::Neg(a))
}

pub(crate) fn mk_pow(base: Node, e: f64) -> Node {
    if e == 0.0 {
        return Arc::new(Expr::Const(1.0));
    }
    if e == 1.0 {
        return base;
    }
    if let Some(x) = cval(&base) {
        let v = pow_value(x, e);
        if let Ok(v) = v {
            return Arc::new(Expr::Const(v));
        }
    }
    Arc::new(Expr::Pow(base, e))
}

#[derive(Clone, Copy)]
enum Fun {
    Sin,
    Cos,
    Tan,
    Cot,
    Exp,
    Ln,
    Sqrt,
}

fn mk_fun(f: Fun, a: Node) -> Node {
    if let Some(x) = cval(&a) {
        let v = match f {
            Fun::Sin => Some(x.sin()),
            Fun::Cos => Some(x.cos()),
            Fun::Tan => {
                if x.cos() != 0.0 {
                    Some(x.tan())
                } else {
                    None
                }
            }
            Fun::Cot => {
                if x.sin() != 0.0 {
                    Some(x.cos() / x.sin())
                } else {
                    None
                }
            }
            Fun::Exp => Some(x.exp()),
            Fun::Ln => {
                if x > 0.0 {
                    Some(x.ln())
                } else {
                    None
                }
            }
            Fun::Sqrt => {
                if x >= 0.0 {
                    Some(x.sqrt())
                } else {
                    None
                }
            }
        };
        if let Some(v) = v {
            if v.is_finite() {
                return Arc::new(Expr::Const(v));
            }
        }
    }
    Arc::new(match f {
        Fun::Sin => Expr::Sin(a),
        Fun::Cos => Expr::Cos(a),
        Fun::Tan => Expr::Tan(a),
        Fun::Cot => Expr::Cot(a),
        Fun::Exp => Expr::Exp(a),
        Fun::Ln => Expr::Ln(a),
        Fun::Sqrt => Expr::Sqrt(a),
    })
}

fn pow_value(x: f64, e: f64) -> Result<f64, ()> {
    if e.fract() == 0.0 {
        if x == 0.0 && e < 0.0 {
            return Err(());
        }
        Ok(x.powi(e as i32))
    } else {
        if x <= 0.0 {
            return Err(());
        }
        Ok(x.powf(e))
    }
}

// ---------------------------------------------------------------------------
// differentiation
// ---------------------------------------------------------------------------

fn diff_node(n: &Node, var: usize) -> Node {
    let zero = || Arc::new(Expr::Const(0.0));
    let one = || Arc::new(Expr::Const(1.0));
    match &**n {
        Expr::Const(_) => zero(),
        Expr::Var(i) => {
            if *i == var {
                one()
            } else {
                zero()
            }
        }
        Expr::Add(a, b) => mk_add(diff_node(a, var), diff_node(b, var)),
        Expr::Sub(a, b) => mk_sub(diff_node(a, var), diff_node(b, var)),
        Expr::Mul(a, b) => mk_add(
            mk_mul(diff_node(a, var), b.clone()),
            mk_mul(a.clone(), diff_node(b, var)),
        ),
        Expr::Div(a, b) => {
            // (a'b - ab') / b^2
            let num = mk_sub(
                mk_mul(diff_node(a, var), b.clone()),
                mk_mul(a.clone(), diff_node(b, var)),
            );
            mk_div(num, mk_pow(b.clone(), 2.0))
        }
        Expr::Pow(a, e) => {
            // e * a^(e-1) * a'
            let da = diff_node(a, var);
            mk_mul(
                mk_mul(Arc::new(Expr::Const(*e)), mk_pow(a.clone(), e - 1.0)),
                da,
            )
        }
        Expr::Neg(a) => mk_neg(diff_node(a, var)),
        Expr::Sin(a) => mk_mul(mk_fun(Fun::Cos, a.clone()), diff_node(a, var)),
        Expr::Cos(a) => mk_neg(mk_mul(mk_fun(Fun::Sin, a.clone()), diff_node(a, var))),
        Expr::Tan(a) => {
            // (1 + tan^2) a'
            let t = mk_fun(Fun::Tan, a.clone());
            mk_mul(mk_add(one(), mk_pow(t, 2.0)), diff_node(a, var))
        }
        Expr::Cot(a) => {
            // -(1 + cot^2) a'
            let t = mk_fun(Fun::Cot, a.clone());
            mk_neg(mk_mul(mk_add(one(), mk_pow(t, 2.0)), diff_node(a, var)))
        }
        Expr::Exp(a) => mk_mul(mk_fun(Fun::Exp, a.clone()), diff_node(a, var)),
        Expr::Ln(a) => mk_div(diff_node(a, var), a.clone()),
        Expr::Sqrt(a) => mk_div(
            diff_node(a, var),
            mk_mul(Arc::new(Expr::Const(2.0)), mk_fun(Fun::Sqrt, a.clone())),
        ),
    }
}

// ---------------------------------------------------------------------------
// evaluation
// ---------------------------------------------------------------------------

fn eval_node(
    n: &Node,
    point: &[f64],
    names: &Arc<Vec<String>>,
    memo: &mut HashMap<*const Expr, f64>,
) -> Result<f64, EvalError> {
    let key = Arc::as_ptr(n);
    if let Some(v) = memo.get(&key) {
        return Ok(*v);
    }
    let err = |reason: &str, at: &Node| -> EvalError {
        EvalError {
            reason: reason.to_string(),
            subexpr: render(at, names),
        }
    };
    let v = match &**n {
        Expr::Const(c) => *c,
        Expr::Var(i) => {
            if *i >= point.len() {
                return Err(err("point has too few coordinates", n));
            }
            point[*i]
        }
        Expr::Add(a, b) => eval_node(a, point, names, memo)? + eval_node(b, point, names, memo)?,
        Expr::Sub(a, b) => eval_node(a, point, names, memo)? - eval_node(b, point, names, memo)?,
        Expr::Mul(a, b) => eval_node(a, point, names, memo)? * eval_node(b, point, names, memo)?,
        Expr::Div(a, b) => {
            let den = eval_node(b, point, names, memo)?;
            if den == 0.0 {
                return Err(err("division by zero", n));
            }
            eval_node(a, point, names, memo)? / den
        }
        Expr::Pow(a, e) => {
            let base = eval_node(a, point, names, memo)?;
            pow_value(base, *e).map_err(|_| {
                if e.fract() == 0.0 {
                    err("zero base with negative integer exponent", n)
                } else {
                    err("fractional power of a nonpositive value", n)
                }
            })?
        }
        Expr::Neg(a) => -eval_node(a, point, names, memo)?,
        Expr::Sin(a) => eval_node(a, point, names, memo)?.sin(),
        Expr::Cos(a) => eval_node(a, point, names, memo)?.cos(),
        Expr::Tan(a) => {
            let x = eval_node(a, point, names, memo)?;
            if x.cos() == 0.0 {
                return Err(err("tan at a pole", n));
            }
            x.tan()
        }
        Expr::Cot(a) => {
            let x = eval_node(a, point, names, memo)?;
            let s = x.sin();
            if s == 0.0 {
                return Err(err("cot at a multiple of pi", n));
            }
            x.cos() / s
        }
        Expr::Exp(a) => eval_node(a, point, names, memo)?.exp(),
        Expr::Ln(a) => {
            let x = eval_node(a, point, names, memo)?;
            if x <= 0.0 {
                return Err(err("ln of a nonpositive value", n));
            }
            x.ln()
        }
        Expr::Sqrt(a) => {
            let x = eval_node(a, point, names, memo)?;
            if x < 0.0 {
                return Err(err("sqrt of a negative value", n));
            }
            x.sqrt()
        }
    };
    memo.insert(key, v);
    Ok(v)
}

// ---------------------------------------------------------------------------
// printing (parseable under the same chart)
// ---------------------------------------------------------------------------

fn render(n: &Node, names: &Arc<Vec<String>>) -> String {
    struct D<'a>(&'a Node, &'a Arc<Vec<String>>);
    impl fmt::Display for D<'_> {
        fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            write_node(f, self.0, self.1, 0)
        }
    }
    format!("{}", D(n, names))
}

fn prec(n: &Expr) -> u8 {
    match n {
        Expr::Add(..) | Expr::Sub(..) => 1,
        Expr::Mul(..) | Expr::Div(..) => 2,
        Expr::Neg(..) => 3,
        Expr::Pow(..) => 4,
        _ => 5,
    }
}

fn write_node(
    f: &mut fmt::Formatter<'_>,
    n: &Node,
    names: &Arc<Vec<String>>,
    parent_prec: u8,
) -> fmt::Result {
    let p = prec(n);
    let need_paren = p < parent_prec;
    if need_paren {
        write!(f, "(")?;
    }
    match &**n {
        Expr::Const(c) => {
            if *c < 0.0 {
                write!(f, "({})", fmt_f64(*c))?;
            } else {
                write!(f, "{}", fmt_f64(*c))?;
            }
        }
        Expr::Var(i) => {
            if let Some(name) = names.get(*i) {
                write!(f, "{}", name)?;
            } else {
                write!(f, "x{}", i)?;
            }
        }
        Expr::Add(a, b) => {
            write_node(f, a, names, 1)?;
            write!(f, " + ")?;
            write_node(f, b, names, 1)?;
        }
        Expr::Sub(a, b) => {
            write_node(f, a, names, 1)?;
            write!(f, " - ")?;
            // right operand of '-' must bind at least like a product
            write_node(f, b, names, 2)?;
        }
        Expr::Mul(a, b) => {
            write_node(f, a, names, 2)?;
            write!(f, "*")?;
            write_node(f, b, names, 3)?;
        }
        Expr::Div(a, b) => {
            write_node(f, a, names, 2)?;
            write!(f, "/")?;
            write_node(f, b, names, 3)?;
        }
        Expr::Pow(a, e) => {
            write_node(f, a, names, 5)?;
            if *e < 0.0 || e.fract() != 0.0 {
                write!(f, "^({})", fmt_f64(*e))?;
            } else {
                write!(f, "^{}", fmt_f64(*e))?;
            }
        }
        Expr::Neg(a) => {
            write!(f, "-")?;
            write_node(f, a, names, 3)?;
        }
        Expr::Sin(a) => write_fun(f, "sin", a, names)?,
        Expr::Cos(a) => write_fun(f, "cos", a, names)?,
        Expr::Tan(a) => write_fun(f, "tan", a, names)?,
        Expr::Cot(a) => write_fun(f, "cot", a, names)?,
        Expr::Exp(a) => write_fun(f, "exp", a, names)?,
        Expr::Ln(a) => write_fun(f, "ln", a, names)?,
        Expr::Sqrt(a) => write_fun(f, "sqrt", a, names)?,
    }
    if need_paren {
        write!(f, ")")?;
    }
    Ok(())
}

fn write_fun(
    f: &mut fmt::Formatter<'_>,
    name: &str,
    a: &Node,
    names: &Arc<Vec<String>>,
) -> fmt::Result {
    write!(f, "{}(", name)?;
    write_node(f, a, names, 0)?;
    write!(f, ")")
}

fn fmt_f64(v: f64) -> String {
    // shortest representation that round-trips
    let mut s = format!("{}", v);
    if !s.contains('.') && !s.contains('e') && !s.contains("inf") && !s.contains("NaN") {
        s.push_str(".0");
    }
    s
}

// ---------------------------------------------------------------------------
// parser
// ---------------------------------------------------------------------------

struct Parser<'a> {
    bytes: &'a [u8],
    pos: usize,
    chart: &'a Chart,
}

/// Parse an expression over the chart's coordinates.
///
/// Grammar (ASCII): numbers (decimal, scientific), identifiers
/// `[a-zA-Z][a-zA-Z0-9_]*`, operators `+ - * / ^`, unary `-`, parentheses,
/// function call `name(expr)`. Whitespace is insignificant. `pi` is a
/// reserved constant. `^` takes a constant exponent.
pub fn parse(text: &str, chart: &Chart) -> Result<ScalarField, ParseError> {
    let mut p = Parser {
        bytes: text.as_bytes(),
        pos: 0,
        chart,
    };
    let node = p.expr()?;
    p.skip_ws();
    if p.pos != p.bytes.len() {
        return Err(ParseError::Syntax {
            offset: p.pos,
            message: "unexpected trailing input".into(),
        });
    }
    Ok(ScalarField::from_node(node, chart.coord_names_arc()))
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.bytes.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    let rhs = self.term()?;
                    lhs = mk_add(lhs, rhs);
                }
                Some(b'-') => {
                    self.pos += 1;
                    let rhs = self.term()?;
                    lhs = mk_sub(lhs, rhs);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    let rhs = self.factor()?;
                    lhs = mk_mul(lhs, rhs);
                }
                Some(b'/') => {
                    self.pos += 1;
                    let rhs = self.factor()?;
                    lhs = mk_div(lhs, rhs);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn factor(&mut self) -> Result<Node, ParseError> {
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                let inner = self.factor()?;
                Ok(mk_neg(inner))
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Node, ParseError> {
        let base = self.primary()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let at = self.pos;
            let exponent = self.factor()?;
            match &*exponent {
                Expr::Const(c) => Ok(mk_pow(base, *c)),
                _ => Err(ParseError::Syntax {
                    offset: at,
                    message: "exponent must be a constant".into(),
                }),
            }
        } else {
            Ok(base)
        }
    }

    fn primary(&mut self) -> Result<Node, ParseError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if self.peek() == Some(b')') {
                    self.pos += 1;
                    Ok(inner)
                } else {
                    Err(ParseError::Syntax {
                        offset: self.pos,
                        message: "expected `)`".into(),
                    })
                }
            }
            Some(c) if c.is_ascii_digit() => self.number(),
            Some(c) if c.is_ascii_alphabetic() => self.identifier(),
            Some(c) => Err(ParseError::Syntax {
                offset: self.pos,
                message: format!("unexpected character `{}`", c as char),
            }),
            None => Err(ParseError::Syntax {
                offset: self.pos,
                message: "unexpected end of input".into(),
            }),
        }
    }

    fn number(&mut self) -> Result<Node, ParseError> {
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos < self.bytes.len() && self.bytes[self.pos] == b'.' {
            self.pos += 1;
            while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
        }
        if self.pos < self.bytes.len() && (self.bytes[self.pos] | 0x20) == b'e' {
            let mark = self.pos;
            self.pos += 1;
            if self.pos < self.bytes.len()
                && (self.bytes[self.pos] == b'+' || self.bytes[self.pos] == b'-')
            {
                self.pos += 1;
            }
            if self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
                while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
            } else {
                // not an exponent after all (e.g. `2*exp(x)`none) — back off
                self.pos = mark;
            }
        }
        let text = std::str::from_utf8(&self.bytes[start..self.pos]).unwrap();
        text.parse::<f64>()
            .map(|v| Arc::new(Expr::Const(v)))
            .map_err(|_| ParseError::Syntax {
                offset: start,
                message: format!("invalid number `{}`", text),
            })
    }

    fn identifier(&mut self) -> Result<Node, ParseError> {
        let start = self.pos;
        while self.pos < self.bytes.len()
            && (self.bytes[self.pos].is_ascii_alphanumeric() || self.bytes[self.pos] == b'_')
        {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.bytes[start..self.pos])
            .unwrap()
            .to_string();
        if self.peek() == Some(b'(') {
            self.pos += 1;
            let arg = self.expr()?;
            if self.peek() != Some(b')') {
                return Err(ParseError::Syntax {
                    offset: self.pos,
                    message: "expected `)` after function argument".into(),
                });
            }
            self.pos += 1;
            let fun = match name.as_str() {
                "sin" => Fun::Sin,
                "cos" => Fun::Cos,
                "tan" => Fun::Tan,
                "cot" => Fun::Cot,
                "exp" => Fun::Exp,
                "ln" => Fun::Ln,
                "sqrt" => Fun::Sqrt,
                _ => {
                    return Err(ParseError::Syntax {
                        offset: start,
                        message: format!("unknown function `{}`", name),
                    })
                }
            };
            return Ok(mk_fun(fun, arg));
        }
        if name == "pi" {
            return Ok(Arc::new(Expr::Const(std::f64::consts::PI)));
        }
        match self.chart.coord_index(&name) {
            Some(i) => Ok(Arc::new(Expr::Var(i))),
            None => Err(ParseError::UnknownIdentifier {
                offset: start,
                name,
            }),
        }
    }
}

// ---------------------------------------------------------------------------
