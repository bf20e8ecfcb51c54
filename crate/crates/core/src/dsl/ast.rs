//! Syntax tree of scenario documents. `Display` is the pretty-printer; its
//! output re-parses to an equal tree.

use std::fmt;

use super::Span;
use crate::scenarios::QueryKind;

#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioDoc {
    pub declarations: Vec<Decl>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Decl {
    pub kind: DeclKind,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Ident {
    pub name: String,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq)]
pub enum DeclKind {
    /// `dim a` or `dim a x b`.
    Dim {
        a: usize,
        b: Option<usize>,
    },
    State {
        name: Ident,
        value: StateValue,
    },
    Op {
        name: Ident,
        expr: Expr,
    },
    Pvm {
        name: Ident,
        members: Vec<Ident>,
    },
    Probe {
        name: Ident,
        expr: Expr,
    },
    Query {
        name: Ident,
        kind: QueryKind,
        outcome: Ident,
        probe: Ident,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub enum StateValue {
    Expr(Expr),
    /// `Σ_k |k,k⟩/√d`.
    MaxEnt(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Func {
    Sqrt,
    Exp,
    Conj,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sqrt => "sqrt",
            Func::Exp => "exp",
            Func::Conj => "conj",
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Kron,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Kron => "⊗",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ExprKind {
    Real(f64),
    Imag(f64),
    /// The constant `i`.
    ImagUnit,
    Pi,
    /// `I n`: identity of dimension `n`.
    Identity(usize),
    /// `X`, `Y` or `Z`.
    Pauli(char),
    /// `GM(d, k)`: the `k`-th generalized Gell-Mann matrix (1-based).
    GellMann(usize, usize),
    Ket(Vec<Expr>),
    Outer(Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
    Name(String),
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
}

fn list<T: fmt::Display>(f: &mut fmt::Formatter<'_>, items: &[T]) -> fmt::Result {
    for (k, item) in items.iter().enumerate() {
        if k > 0 {
            f.write_str(", ")?;
        }
        write!(f, "{item}")?;
    }
    Ok(())
}

impl fmt::Display for Ident {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ExprKind::Real(v) => write!(f, "{v:?}"),
            ExprKind::Imag(v) => write!(f, "{v:?}i"),
            ExprKind::ImagUnit => f.write_str("i"),
            ExprKind::Pi => f.write_str("pi"),
            ExprKind::Identity(n) => write!(f, "I{n}"),
            ExprKind::Pauli(c) => write!(f, "{c}"),
            ExprKind::GellMann(d, k) => write!(f, "GM({d}, {k})"),
            ExprKind::Ket(amps) => {
                f.write_str("ket[")?;
                list(f, amps)?;
                f.write_str("]")
            }
            ExprKind::Outer(u, v) => write!(f, "outer({u}, {v})"),
            ExprKind::Call(func, arg) => write!(f, "{}({arg})", func.name()),
            ExprKind::Name(n) => f.write_str(n),
            ExprKind::Neg(e) => write!(f, "(-{e})"),
            ExprKind::Binary(op, l, r) => write!(f, "({l} {} {r})", op.symbol()),
        }
    }
}

impl fmt::Display for Decl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            DeclKind::Dim { a, b: None } => write!(f, "dim {a}"),
            DeclKind::Dim { a, b: Some(b) } => write!(f, "dim {a} x {b}"),
            DeclKind::State { name, value: StateValue::Expr(e) } => write!(f, "state {name} = {e}"),
            DeclKind::State { name, value: StateValue::MaxEnt(d) } => write!(f, "state {name} = maxent {d}"),
            DeclKind::Op { name, expr } => write!(f, "op {name} = {expr}"),
            DeclKind::Pvm { name, members } => {
                write!(f, "pvm {name} = {{")?;
                list(f, members)?;
                f.write_str("}")
            }
            DeclKind::Probe { name, expr } => write!(f, "probe {name} = {expr}"),
            DeclKind::Query { name, kind, outcome, probe } => {
                let func = match kind {
                    QueryKind::Joint => "joint",
                    QueryKind::Conditional => "cond",
                };
                write!(f, "query {name} = {func}({outcome}, {probe})")
            }
        }
    }
}

impl fmt::Display for ScenarioDoc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for decl in &self.declarations {
            writeln!(f, "{decl}")?;
        }
        Ok(())
    }
}
