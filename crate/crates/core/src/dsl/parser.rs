use super::ast::{BinOp, Decl, DeclKind, Expr, ExprKind, Func, Ident, ScenarioDoc, StateValue};
use super::lexer::{lex, Tok, Token};
use super::{Diagnostic, Span, MAX_DIM};
use crate::scenarios::QueryKind;

const KEYWORDS: [&str; 18] = [
    "dim", "state", "op", "pvm", "probe", "query", "maxent", "joint", "cond", "ket", "outer", "sqrt", "exp", "conj",
    "kron", "pi", "i", "GM",
];

fn is_reserved(name: &str) -> bool {
    KEYWORDS.contains(&name) || matches!(name, "X" | "Y" | "Z" | "I") || identity_dim(name).is_some()
}

/// `I3` → 3.
fn identity_dim(name: &str) -> Option<&str> {
    name.strip_prefix('I').filter(|d| !d.is_empty() && d.bytes().all(|b| b.is_ascii_digit()))
}

type PResult<T> = Result<T, Diagnostic>;

struct Parser {
    tokens: Vec<Token>,
    index: usize,
}

/// Parses a whole document. All syntax errors are reported, one per
/// malformed declaration.
pub fn parse(text: &str) -> Result<ScenarioDoc, Vec<Diagnostic>> {
    let (tokens, mut diags) = lex(text);
    let mut p = Parser { tokens, index: 0 };
    let mut declarations = Vec::new();
    p.skip_newlines();
    while !p.at(&Tok::Eof) {
        match p.decl() {
            Ok(decl) => {
                if p.at(&Tok::Newline) || p.at(&Tok::Eof) {
                    declarations.push(decl);
                } else {
                    let tok = p.peek();
                    diags.push(Diagnostic::error(
                        format!("unexpected {} after declaration", tok.tok.describe()),
                        tok.span.start,
                    ));
                    p.recover();
                }
            }
            Err(d) => {
                diags.push(d);
                p.recover();
            }
        }
        p.skip_newlines();
    }
    if declarations.is_empty() && diags.is_empty() {
        diags.push(Diagnostic::error("expected at least one declaration", super::Pos::START));
    }
    if diags.is_empty() {
        Ok(ScenarioDoc { declarations })
    } else {
        diags.sort_by_key(|d| (d.line, d.col));
        Err(diags)
    }
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.index]
    }

    fn at(&self, tok: &Tok) -> bool {
        &self.peek().tok == tok
    }

    fn at_ident(&self, name: &str) -> bool {
        matches!(&self.peek().tok, Tok::Ident(s) if s == name)
    }

    fn bump(&mut self) -> Token {
        let tok = self.tokens[self.index].clone();
        if self.index + 1 < self.tokens.len() {
            self.index += 1;
        }
        tok
    }

    fn prev_end(&self) -> super::Pos {
        self.tokens[self.index.saturating_sub(1)].span.end
    }

    fn skip_newlines(&mut self) {
        while self.at(&Tok::Newline) {
            self.bump();
        }
    }

    fn recover(&mut self) {
        while !self.at(&Tok::Newline) && !self.at(&Tok::Eof) {
            self.bump();
        }
    }

    fn unexpected(&self, expected: &str) -> Diagnostic {
        let tok = self.peek();
        Diagnostic::error(format!("expected {expected}, found {}", tok.tok.describe()), tok.span.start)
    }

    fn expect(&mut self, tok: Tok) -> PResult<Token> {
        if self.at(&tok) {
            Ok(self.bump())
        } else {
            Err(self.unexpected(&tok.describe()))
        }
    }

    fn name(&mut self) -> PResult<Ident> {
        match &self.peek().tok {
            Tok::Ident(s) if !is_reserved(s) => {
                let name = s.clone();
                let span = self.bump().span;
                Ok(Ident { name, span })
            }
            Tok::Ident(s) => Err(Diagnostic::error(
                format!("'{s}' is reserved and cannot be used as a name"),
                self.peek().span.start,
            )),
            _ => Err(self.unexpected("a name")),
        }
    }

    fn int(&mut self) -> PResult<usize> {
        match self.peek().tok {
            Tok::Number(v) if v.fract() == 0.0 && (1.0..=MAX_DIM as f64).contains(&v) => {
                self.bump();
                Ok(v as usize)
            }
            Tok::Number(v) => Err(Diagnostic::error(
                format!("expected an integer between 1 and {MAX_DIM}, found {v}"),
                self.peek().span.start,
            )),
            _ => Err(self.unexpected("an integer")),
        }
    }

    fn decl(&mut self) -> PResult<Decl> {
        let start = self.peek().span.start;
        let keyword = match &self.peek().tok {
            Tok::Ident(s) => s.clone(),
            _ => return Err(self.unexpected("a declaration (dim, state, op, pvm, probe or query)")),
        };
        let kind = match keyword.as_str() {
            "dim" => {
                self.bump();
                self.dim()?
            }
            "state" => {
                self.bump();
                let name = self.name()?;
                self.expect(Tok::Eq)?;
                let value = if self.at_ident("maxent") {
                    self.bump();
                    StateValue::MaxEnt(self.int()?)
                } else {
                    StateValue::Expr(self.expr()?)
                };
                DeclKind::State { name, value }
            }
            "op" | "probe" => {
                self.bump();
                let name = self.name()?;
                self.expect(Tok::Eq)?;
                let expr = self.expr()?;
                if keyword == "op" {
                    DeclKind::Op { name, expr }
                } else {
                    DeclKind::Probe { name, expr }
                }
            }
            "pvm" => {
                self.bump();
                let name = self.name()?;
                self.expect(Tok::Eq)?;
                self.expect(Tok::LBrace)?;
                let mut members = vec![self.name()?];
                while self.at(&Tok::Comma) {
                    self.bump();
                    members.push(self.name()?);
                }
                self.expect(Tok::RBrace)?;
                DeclKind::Pvm { name, members }
            }
            "query" => {
                self.bump();
                let name = self.name()?;
                self.expect(Tok::Eq)?;
                let kind = if self.at_ident("joint") {
                    QueryKind::Joint
                } else if self.at_ident("cond") {
                    QueryKind::Conditional
                } else {
                    return Err(self.unexpected("'joint' or 'cond'"));
                };
                self.bump();
                self.expect(Tok::LParen)?;
                let outcome = self.name()?;
                self.expect(Tok::Comma)?;
                let probe = self.name()?;
                self.expect(Tok::RParen)?;
                DeclKind::Query { name, kind, outcome, probe }
            }
            _ => return Err(self.unexpected("a declaration (dim, state, op, pvm, probe or query)")),
        };
        Ok(Decl { kind, span: Span { start, end: self.prev_end() } })
    }

    fn dim(&mut self) -> PResult<DeclKind> {
        let a = self.int()?;
        let b = match &self.peek().tok {
            Tok::Ident(s) if s == "x" => {
                self.bump();
                Some(self.int()?)
            }
            Tok::Ident(s) if s.starts_with('x') => {
                let digits = &s[1..];
                let span = self.peek().span;
                match digits.parse::<usize>() {
                    Ok(b) if digits.bytes().all(|c| c.is_ascii_digit()) && (1..=MAX_DIM).contains(&b) => {
                        self.bump();
                        Some(b)
                    }
                    _ => return Err(Diagnostic::error(format!("malformed dimension '{s}'"), span.start)),
                }
            }
            _ => None,
        };
        if a * b.unwrap_or(1) > MAX_DIM {
            return Err(Diagnostic::error(format!("total dimension exceeds {MAX_DIM}"), self.prev_end()));
        }
        Ok(DeclKind::Dim { a, b })
    }

    /// Reports a missing right operand at the operator itself.
    fn operand(&mut self, op: &Token) -> PResult<Expr> {
        if matches!(self.peek().tok, Tok::Newline | Tok::Eof | Tok::RParen | Tok::RBracket | Tok::RBrace | Tok::Comma) {
            return Err(Diagnostic::error(format!("expected an operand after {}", op.tok.describe()), op.span.start));
        }
        self.unary()
    }

    fn expr(&mut self) -> PResult<Expr> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek().tok {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            let op_tok = self.bump();
            if matches!(
                self.peek().tok,
                Tok::Newline | Tok::Eof | Tok::RParen | Tok::RBracket | Tok::RBrace | Tok::Comma
            ) {
                return Err(Diagnostic::error(
                    format!("expected an operand after {}", op_tok.tok.describe()),
                    op_tok.span.start,
                ));
            }
            let rhs = self.term()?;
            lhs = binary(op, lhs, rhs);
        }
    }

    fn term(&mut self) -> PResult<Expr> {
        let mut lhs = self.unary()?;
        loop {
            let op = match &self.peek().tok {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                Tok::Kron => BinOp::Kron,
                Tok::Ident(s) if s == "kron" => BinOp::Kron,
                _ => return Ok(lhs),
            };
            let op_tok = self.bump();
            let rhs = self.operand(&op_tok)?;
            lhs = binary(op, lhs, rhs);
        }
    }

    fn unary(&mut self) -> PResult<Expr> {
        if self.at(&Tok::Minus) {
            let op = self.bump();
            let inner = self.operand(&op)?;
            let span = Span { start: op.span.start, end: inner.span.end };
            return Ok(Expr { kind: ExprKind::Neg(Box::new(inner)), span });
        }
        self.atom()
    }

    fn finish(&self, start: super::Pos, kind: ExprKind) -> Expr {
        Expr { kind, span: Span { start, end: self.prev_end() } }
    }

    fn atom(&mut self) -> PResult<Expr> {
        let start = self.peek().span.start;
        match self.peek().tok.clone() {
            Tok::Number(v) | Tok::Imag(v) if !v.is_finite() => Err(Diagnostic::error("number is out of range", start)),
            Tok::Number(v) => {
                self.bump();
                Ok(self.finish(start, ExprKind::Real(v)))
            }
            Tok::Imag(v) => {
                self.bump();
                Ok(self.finish(start, ExprKind::Imag(v)))
            }
            Tok::LParen => {
                self.bump();
                let inner = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(Expr { kind: inner.kind, span: Span { start, end: self.prev_end() } })
            }
            Tok::Ident(name) => {
                self.bump();
                let kind = match name.as_str() {
                    "i" => ExprKind::ImagUnit,
                    "pi" => ExprKind::Pi,
                    "X" | "Y" | "Z" => ExprKind::Pauli(name.chars().next().expect("nonempty")),
                    "I" => ExprKind::Identity(self.int()?),
                    "ket" => {
                        self.expect(Tok::LBracket)?;
                        let mut amps = vec![self.expr()?];
                        while self.at(&Tok::Comma) {
                            self.bump();
                            amps.push(self.expr()?);
                        }
                        self.expect(Tok::RBracket)?;
                        if amps.len() > MAX_DIM {
                            return Err(Diagnostic::error(format!("ket has more than {MAX_DIM} amplitudes"), start));
                        }
                        ExprKind::Ket(amps)
                    }
                    "outer" => {
                        self.expect(Tok::LParen)?;
                        let u = self.expr()?;
                        self.expect(Tok::Comma)?;
                        let v = self.expr()?;
                        self.expect(Tok::RParen)?;
                        ExprKind::Outer(Box::new(u), Box::new(v))
                    }
                    "sqrt" | "exp" | "conj" => {
                        let func = match name.as_str() {
                            "sqrt" => Func::Sqrt,
                            "exp" => Func::Exp,
                            _ => Func::Conj,
                        };
                        self.expect(Tok::LParen)?;
                        let arg = self.expr()?;
                        self.expect(Tok::RParen)?;
                        ExprKind::Call(func, Box::new(arg))
                    }
                    "GM" => {
                        self.expect(Tok::LParen)?;
                        let d = self.int()?;
                        self.expect(Tok::Comma)?;
                        let k_start = self.peek().span.start;
                        let k = self.int()?;
                        self.expect(Tok::RParen)?;
                        if d < 2 || k >= d * d {
                            return Err(Diagnostic::error(
                                format!("GM({d}, k) needs d >= 2 and 1 <= k <= {}", d * d - 1),
                                k_start,
                            ));
                        }
                        ExprKind::GellMann(d, k)
                    }
                    other => match identity_dim(other) {
                        Some(digits) => match digits.parse::<usize>() {
                            Ok(n) if (1..=MAX_DIM).contains(&n) => ExprKind::Identity(n),
                            _ => {
                                return Err(Diagnostic::error(
                                    format!("identity dimension must be between 1 and {MAX_DIM}"),
                                    start,
                                ))
                            }
                        },
                        None if is_reserved(other) => {
                            return Err(Diagnostic::error(format!("'{other}' cannot start an expression"), start))
                        }
                        None => ExprKind::Name(other.to_string()),
                    },
                };
                Ok(self.finish(start, kind))
            }
            _ => Err(self.unexpected("an expression")),
        }
    }
}

fn binary(op: BinOp, lhs: Expr, rhs: Expr) -> Expr {
    let span = Span { start: lhs.span.start, end: rhs.span.end };
    Expr { kind: ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)), span }
}
