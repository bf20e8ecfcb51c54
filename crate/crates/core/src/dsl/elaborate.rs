use std::collections::HashMap;

use num_complex::Complex64 as C64;

use super::ast::{BinOp, DeclKind, Expr, ExprKind, Func, Ident, ScenarioDoc, StateValue};
use super::{Diagnostic, Pos, MAX_DIM};
use crate::operator::{ComplexMatrix, DensityMatrix, HermitianOperator, KetVector, Projector};
use crate::scenarios::{maximally_entangled, Query, Scenario};
use crate::tomography::{gell_mann_matrix, Pvm};

/// Kets whose norm differs from one by more than this are reported when
/// normalized.
const NORM_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct Elaborated {
    pub scenario: Scenario,
    pub warnings: Vec<Diagnostic>,
}

#[derive(Clone, Debug)]
enum Value {
    Scalar(C64),
    Ket(Vec<C64>),
    Op(ComplexMatrix),
}

impl Value {
    fn kind(&self) -> &'static str {
        match self {
            Value::Scalar(_) => "a scalar",
            Value::Ket(_) => "a ket",
            Value::Op(_) => "an operator",
        }
    }

    fn scale(self, z: C64) -> Value {
        match self {
            Value::Scalar(s) => Value::Scalar(s * z),
            Value::Ket(v) => Value::Ket(v.into_iter().map(|a| a * z).collect()),
            Value::Op(m) => Value::Op(m.scale(z)),
        }
    }

    fn conj(self) -> Value {
        match self {
            Value::Scalar(s) => Value::Scalar(s.conj()),
            Value::Ket(v) => Value::Ket(v.into_iter().map(|a| a.conj()).collect()),
            Value::Op(m) => Value::Op(m.conj()),
        }
    }
}

enum Binding {
    Op(ComplexMatrix),
    State(Value),
    Probe(HermitianOperator),
    Pvm,
    Query,
}

struct Env {
    bindings: HashMap<String, (Binding, Pos)>,
    diags: Vec<Diagnostic>,
}

impl Env {
    /// Registers `name`, reporting a duplicate. Returns whether it was new.
    fn declare(&mut self, name: &Ident, binding: Binding) -> bool {
        if let Some((_, prev)) = self.bindings.get(&name.name) {
            self.diags.push(Diagnostic::error(
                format!("'{}' is already declared at line {}", name.name, prev.line),
                name.span.start,
            ));
            return false;
        }
        self.bindings.insert(name.name.clone(), (binding, name.span.start));
        true
    }

    fn eval(&self, expr: &Expr) -> Result<Value, Diagnostic> {
        let at = expr.span.start;
        let err = |msg: String| Diagnostic::error(msg, at);
        Ok(match &expr.kind {
            ExprKind::Real(v) => Value::Scalar(C64::new(*v, 0.0)),
            ExprKind::Imag(v) => Value::Scalar(C64::new(0.0, *v)),
            ExprKind::ImagUnit => Value::Scalar(C64::i()),
            ExprKind::Pi => Value::Scalar(C64::new(std::f64::consts::PI, 0.0)),
            ExprKind::Identity(n) => Value::Op(ComplexMatrix::identity(*n)),
            ExprKind::Pauli('X') => Value::Op(ComplexMatrix::pauli_x()),
            ExprKind::Pauli('Y') => Value::Op(ComplexMatrix::pauli_y()),
            ExprKind::Pauli(_) => Value::Op(ComplexMatrix::pauli_z()),
            ExprKind::GellMann(d, k) => {
                Value::Op(gell_mann_matrix(*d, k - 1).map_err(|e| err(e.to_string()))?.into_matrix())
            }
            ExprKind::Ket(amps) => {
                let mut out = Vec::with_capacity(amps.len());
                for a in amps {
                    match self.eval(a)? {
                        Value::Scalar(z) => out.push(z),
                        other => {
                            return Err(Diagnostic::error(
                                format!("ket amplitude must be a scalar, found {}", other.kind()),
                                a.span.start,
                            ))
                        }
                    }
                }
                Value::Ket(out)
            }
            ExprKind::Outer(u, v) => match (self.eval(u)?, self.eval(v)?) {
                (Value::Ket(u), Value::Ket(v)) => {
                    let data = u.iter().flat_map(|a| v.iter().map(move |b| a * b.conj())).collect();
                    Value::Op(ComplexMatrix::from_vec(u.len(), v.len(), data).map_err(|e| err(e.to_string()))?)
                }
                (a, b) => return Err(err(format!("outer needs two kets, found {} and {}", a.kind(), b.kind()))),
            },
            ExprKind::Call(func, arg) => match (func, self.eval(arg)?) {
                (Func::Conj, v) => v.conj(),
                (Func::Sqrt, Value::Scalar(z)) => Value::Scalar(z.sqrt()),
                (Func::Exp, Value::Scalar(z)) => Value::Scalar(z.exp()),
                (f, v) => return Err(err(format!("{} needs a scalar, found {}", f.name(), v.kind()))),
            },
            ExprKind::Name(name) => match self.bindings.get(name) {
                Some((Binding::Op(m), _)) => Value::Op(m.clone()),
                Some((Binding::Probe(op), _)) => Value::Op(op.matrix().clone()),
                Some((Binding::State(v), _)) => v.clone(),
                Some(_) => return Err(err(format!("'{name}' cannot be used in an expression"))),
                None => return Err(err(format!("undefined name '{name}'"))),
            },
            ExprKind::Neg(inner) => self.eval(inner)?.scale(C64::new(-1.0, 0.0)),
            ExprKind::Binary(op, l, r) => binary(*op, self.eval(l)?, self.eval(r)?).map_err(err)?,
        })
    }
}

fn check_size(n: usize) -> Result<(), String> {
    if n > MAX_DIM {
        return Err(format!("dimension {n} exceeds {MAX_DIM}"));
    }
    Ok(())
}

fn scalar_plus_op(z: C64, m: &ComplexMatrix, sign: f64) -> Result<ComplexMatrix, String> {
    let d = m.square_dim().map_err(|e| e.to_string())?;
    ComplexMatrix::identity(d).scale(z).add(&m.scale_real(sign)).map_err(|e| e.to_string())
}

fn binary(op: BinOp, lhs: Value, rhs: Value) -> Result<Value, String> {
    use Value::*;
    let mismatch = |what: &str, a: &Value, b: &Value| format!("cannot {what} {} and {}", a.kind(), b.kind());
    match op {
        BinOp::Add | BinOp::Sub => {
            let sign = if op == BinOp::Add { 1.0 } else { -1.0 };
            match (lhs, rhs) {
                (Scalar(a), Scalar(b)) => Ok(Scalar(a + b * sign)),
                (Scalar(z), Op(m)) => Ok(Op(scalar_plus_op(z, &m, sign)?)),
                (Op(m), Scalar(z)) => Ok(Op(scalar_plus_op(z * sign, &m, 1.0)?)),
                (Op(a), Op(b)) => Ok(Op(a.add(&b.scale_real(sign)).map_err(|e| e.to_string())?)),
                (Ket(a), Ket(b)) if a.len() == b.len() => {
                    Ok(Ket(a.iter().zip(&b).map(|(x, y)| x + y * sign).collect()))
                }
                (Ket(a), Ket(b)) => Err(format!("ket lengths {} and {} differ", a.len(), b.len())),
                (a, b) => Err(mismatch("add", &a, &b)),
            }
        }
        BinOp::Mul => match (lhs, rhs) {
            (Scalar(z), v) | (v, Scalar(z)) => Ok(v.scale(z)),
            (Op(a), Op(b)) => Ok(Op(a.matmul(&b).map_err(|e| e.to_string())?)),
            (Op(a), Ket(v)) => Ok(Ket(a.apply(&v).map_err(|e| e.to_string())?)),
            (a, b) => Err(mismatch("multiply", &a, &b)),
        },
        BinOp::Div => match rhs {
            Scalar(z) if z.norm() > 0.0 => Ok(lhs.scale(z.inv())),
            Scalar(_) => Err("division by zero".into()),
            other => Err(format!("can only divide by a scalar, found {}", other.kind())),
        },
        BinOp::Kron => match (lhs, rhs) {
            (Op(a), Op(b)) => {
                check_size(a.rows() * b.rows())?;
                check_size(a.cols() * b.cols())?;
                Ok(Op(a.kron(&b)))
            }
            (Ket(a), Ket(b)) => {
                check_size(a.len() * b.len())?;
                Ok(Ket(a.iter().flat_map(|x| b.iter().map(move |y| x * y)).collect()))
            }
            (a, b) => Err(mismatch("take the tensor product of", &a, &b)),
        },
    }
}

/// Resolves a parsed document into a validated scenario named `name`.
pub fn elaborate(doc: &ScenarioDoc, name: &str) -> Result<Elaborated, Vec<Diagnostic>> {
    let mut env = Env { bindings: HashMap::new(), diags: Vec::new() };
    let mut warnings = Vec::new();
    let origin = doc.declarations.first().map_or(Pos::START, |d| d.span.start);

    let mut dims = None;
    for decl in &doc.declarations {
        if let DeclKind::Dim { a, b } = decl.kind {
            if dims.is_some() {
                env.diags.push(Diagnostic::error("dim is declared more than once", decl.span.start));
            } else {
                dims = Some((a, b.unwrap_or(1)));
            }
        }
    }
    let Some((dim_a, dim_b)) = dims else {
        return Err(vec![Diagnostic::error("missing dim declaration", origin)]);
    };
    let total = dim_a * dim_b;

    let mut initial: Option<DensityMatrix> = None;
    // The first state is the initial one; later states are auxiliary kets.
    let mut seen_state = false;
    let mut pvms: Vec<Pvm> = Vec::new();
    let mut probes: Vec<(String, HermitianOperator)> = Vec::new();
    let mut queries = Vec::new();

    for decl in &doc.declarations {
        let at = decl.span.start;
        match &decl.kind {
            DeclKind::Dim { .. } => {}
            DeclKind::State { name, value } => {
                let state = match value {
                    StateValue::MaxEnt(d) if dim_a == *d && dim_b == *d => {
                        maximally_entangled(*d).map(|k| Value::Ket(k.amplitudes().to_vec())).map_err(|e| e.to_string())
                    }
                    StateValue::MaxEnt(d) => Err(format!("maxent {d} needs dim {d} x {d}")),
                    StateValue::Expr(e) => match env.eval(e) {
                        Ok(Value::Ket(amps)) => match KetVector::normalize(amps) {
                            Ok((ket, norm)) => {
                                if (norm - 1.0).abs() > NORM_TOLERANCE {
                                    warnings.push(Diagnostic::warning(
                                        format!("ket for '{}' has norm {norm:.10}; normalized", name.name),
                                        e.span.start,
                                    ));
                                }
                                Ok(Value::Ket(ket.amplitudes().to_vec()))
                            }
                            Err(e) => Err(e.to_string()),
                        },
                        Ok(Value::Op(m)) => {
                            DensityMatrix::from_matrix(m.clone()).map(|_| Value::Op(m)).map_err(|e| e.to_string())
                        }
                        Ok(Value::Scalar(_)) => Err("a state must be a ket or a density matrix".into()),
                        Err(d) => {
                            env.diags.push(d);
                            seen_state = true;
                            continue;
                        }
                    },
                };
                let state = match state {
                    Ok(v) => v,
                    Err(msg) => {
                        env.diags.push(Diagnostic::error(format!("state '{}': {msg}", name.name), at));
                        seen_state = true;
                        continue;
                    }
                };
                let d = match &state {
                    Value::Ket(v) => v.len(),
                    Value::Op(m) => m.rows(),
                    Value::Scalar(_) => 0,
                };
                if !seen_state && d != total {
                    env.diags.push(Diagnostic::error(
                        format!("state '{}' has dimension {d}, expected {total}", name.name),
                        at,
                    ));
                } else if !seen_state {
                    initial = Some(match &state {
                        Value::Ket(v) => DensityMatrix::pure(&KetVector::new(v.clone()).expect("normalized")),
                        Value::Op(m) => DensityMatrix::from_matrix(m.clone()).expect("validated"),
                        Value::Scalar(_) => unreachable!(),
                    });
                }
                seen_state = true;
                env.declare(name, Binding::State(state));
            }
            DeclKind::Op { name, expr } => match env.eval(expr) {
                Ok(Value::Op(m)) => {
                    env.declare(name, Binding::Op(m));
                }
                Ok(other) => env.diags.push(Diagnostic::error(
                    format!("op '{}' is {}, not an operator", name.name, other.kind()),
                    expr.span.start,
                )),
                Err(d) => env.diags.push(d),
            },
            DeclKind::Probe { name, expr } => {
                let m = match env.eval(expr) {
                    Ok(Value::Op(m)) => m,
                    Ok(other) => {
                        env.diags.push(Diagnostic::error(
                            format!("probe '{}' is {}, not an operator", name.name, other.kind()),
                            expr.span.start,
                        ));
                        continue;
                    }
                    Err(d) => {
                        env.diags.push(d);
                        continue;
                    }
                };
                if m.rows() != total || m.cols() != total {
                    env.diags.push(Diagnostic::error(
                        format!("probe '{}' is {}x{}, expected {total}x{total}", name.name, m.rows(), m.cols()),
                        at,
                    ));
                    continue;
                }
                match HermitianOperator::new(m) {
                    Ok(op) => {
                        if env.declare(name, Binding::Probe(op.clone())) {
                            probes.push((name.name.clone(), op));
                        }
                    }
                    Err(e) => {
                        env.diags.push(Diagnostic::error(format!("probe '{}' is not Hermitian: {e}", name.name), at))
                    }
                }
            }
            DeclKind::Pvm { name, members } => {
                let mut outcomes = Vec::with_capacity(members.len());
                let mut ok = true;
                for member in members {
                    let result = match env.bindings.get(&member.name) {
                        Some((Binding::Op(m), _)) if m.rows() == total && m.cols() == total => {
                            Projector::from_matrix(m.clone())
                                .map_err(|e| format!("'{}' is not a projector: {e}", member.name))
                        }
                        Some((Binding::Op(m), _)) => {
                            Err(format!("'{}' is {}x{}, expected {total}x{total}", member.name, m.rows(), m.cols()))
                        }
                        Some(_) => Err(format!("'{}' is not an op", member.name)),
                        None => Err(format!("undefined name '{}'", member.name)),
                    };
                    let taken = pvms.iter().find(|p| p.position(&member.name).is_some());
                    let result = match (result, taken) {
                        (Ok(_), Some(p)) => {
                            Err(format!("'{}' is already an outcome of PVM '{}'", member.name, p.name()))
                        }
                        (r, _) => r,
                    };
                    match result {
                        Ok(p) => outcomes.push((member.name.clone(), p)),
                        Err(msg) => {
                            env.diags.push(Diagnostic::error(msg, member.span.start));
                            ok = false;
                        }
                    }
                }
                if !ok {
                    continue;
                }
                match Pvm::new(name.name.clone(), outcomes) {
                    Ok(pvm) => {
                        if env.declare(name, Binding::Pvm) {
                            pvms.push(pvm);
                        }
                    }
                    Err(e) => env.diags.push(Diagnostic::error(format!("PVM incomplete: {e}"), at)),
                }
            }
            DeclKind::Query { name, kind, outcome, probe } => {
                let mut ok = true;
                if !pvms.iter().any(|p| p.position(&outcome.name).is_some()) {
                    env.diags.push(Diagnostic::error(
                        format!("'{}' is not an outcome of any PVM", outcome.name),
                        outcome.span.start,
                    ));
                    ok = false;
                }
                if !matches!(env.bindings.get(&probe.name), Some((Binding::Probe(_), _))) {
                    env.diags.push(Diagnostic::error(format!("'{}' is not a probe", probe.name), probe.span.start));
                    ok = false;
                }
                if ok && env.declare(name, Binding::Query) {
                    queries.push(Query {
                        label: name.name.clone(),
                        kind: *kind,
                        outcome: outcome.name.clone(),
                        effect: probe.name.clone(),
                    });
                }
            }
        }
    }

    if !seen_state {
        env.diags.push(Diagnostic::error("missing state declaration", origin));
    }
    if !env.diags.is_empty() {
        env.diags.sort_by_key(|d| (d.line, d.col));
        return Err(env.diags);
    }
    let Some(initial) = initial else {
        return Err(vec![Diagnostic::error("no valid state declaration", origin)]);
    };
    Scenario::new(name, (dim_a, dim_b), initial, pvms, probes, queries)
        .map(|scenario| Elaborated { scenario, warnings })
        .map_err(|e| vec![Diagnostic::error(e.to_string(), origin)])
}
