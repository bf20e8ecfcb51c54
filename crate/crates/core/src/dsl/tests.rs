use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::operator::{ComplexMatrix, Observable};
use crate::scenarios::{bell_chsh_scenario, builtin, double_slit_scenario, QueryKind, Scenario};

const BELL: &str = include_str!(concat!(env!("CARGO_MANIFEST_DIR"), "/../../scenarios/bell.ws"));
const DOUBLE_SLIT: &str = include_str!(concat!(env!("CARGO_MANIFEST_DIR"), "/../../scenarios/double-slit.ws"));
const ENTANGLED: &str = include_str!(concat!(env!("CARGO_MANIFEST_DIR"), "/../../scenarios/entangled-d2.ws"));

fn errors(text: &str) -> Vec<Diagnostic> {
    match load(text, "test") {
        Ok(_) => panic!("expected diagnostics for {text:?}"),
        Err(d) => d,
    }
}

fn first_error(text: &str) -> Diagnostic {
    errors(text).into_iter().find(Diagnostic::is_error).expect("an error")
}

fn close(a: &ComplexMatrix, b: &ComplexMatrix) -> bool {
    a.rows() == b.rows() && a.cols() == b.cols() && a.max_abs_diff(b) <= 1e-12
}

/// Operator-wise equality of two scenarios.
fn assert_equivalent(dsl: &Scenario, reference: &Scenario) {
    assert_eq!((dsl.dim_a, dsl.dim_b), (reference.dim_a, reference.dim_b));
    assert!(close(dsl.initial.matrix(), reference.initial.matrix()), "initial state");
    assert_eq!(dsl.pvms.len(), reference.pvms.len());
    for (a, b) in dsl.pvms.iter().zip(&reference.pvms) {
        assert_eq!(a.name(), b.name());
        for ((la, pa), (lb, pb)) in a.outcomes().iter().zip(b.outcomes()) {
            assert_eq!(la, lb);
            assert!(close(pa.matrix(), pb.matrix()), "outcome {la}");
        }
    }
    assert_eq!(dsl.probes.len(), reference.probes.len());
    for ((la, a), (lb, b)) in dsl.probes.iter().zip(&reference.probes) {
        assert_eq!(la, lb);
        assert!(close(a.matrix(), b.matrix()), "probe {la}");
    }
    assert_eq!(dsl.queries, reference.queries);
}

#[test]
fn empty_source() {
    for text in ["", "\n\n", "# only a comment\n"] {
        let d = errors(text);
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].message, "expected at least one declaration");
        assert_eq!((d[0].line, d[0].col), (1, 1));
    }
}

#[test]
fn trailing_operator() {
    let d = errors("state psi = ket[1, 1]/");
    assert_eq!(d.len(), 1);
    assert!(d[0].message.contains("'/'"), "{}", d[0]);
    assert_eq!((d[0].line, d[0].col), (1, 22));
}

#[test]
fn ket_is_normalized_with_warning() {
    let loaded = load("dim 2\nstate psi = ket[1, 1]", "t").unwrap();
    assert_eq!(loaded.warnings.len(), 1);
    assert_eq!(loaded.warnings[0].severity, Severity::Warning);
    assert_eq!((loaded.warnings[0].line, loaded.warnings[0].col), (2, 13));
    let rho = loaded.scenario.initial.matrix();
    for r in 0..2 {
        for c in 0..2 {
            assert!((rho[(r, c)].re - 0.5).abs() < 1e-15);
        }
    }
    let quiet = load("dim 2\nstate psi = ket[1, 1] / sqrt(2)", "t").unwrap();
    assert!(quiet.warnings.is_empty());
}

#[test]
fn incomplete_pvm() {
    let d = first_error("dim 2\nstate s = ket[1, 0]\nop p = outer(ket[1, 0], ket[1, 0])\npvm m = {p}");
    assert!(d.message.starts_with("PVM incomplete"), "{d}");
    assert_eq!((d.line, d.col), (4, 1));
}

#[test]
fn semantic_errors_cite_positions() {
    let cases: [(&str, &str, (usize, usize)); 9] = [
        ("dim 2\nstate s = ket[1, 0, 0]", "dimension 3, expected 2", (2, 1)),
        ("dim 2\nstate s = ket[1, 0]\nprobe p = X + i*Z", "not Hermitian", (3, 1)),
        ("dim 2\nstate s = ket[1, 0]\nprobe p = X ⊗ X", "expected 2x2", (3, 1)),
        ("dim 2\nstate s = ket[1, 0]\nop a = X + nope", "undefined name 'nope'", (3, 12)),
        ("dim 2\nstate s = ket[1, 0]\nop a = X\nop a = Y", "already declared at line 3", (4, 4)),
        ("state s = ket[1, 0]", "missing dim declaration", (1, 1)),
        ("dim 2\nop a = X", "missing state declaration", (1, 1)),
        ("dim 2\nstate s = ket[1, 0]\nop a = X + ket[1, 0]", "cannot add an operator and a ket", (3, 8)),
        ("dim 2\nstate s = ket[1, 0]\nop a = X\npvm m = {a}", "'a' is not a projector", (4, 10)),
    ];
    for (text, needle, pos) in cases {
        let d = first_error(text);
        assert!(d.message.contains(needle), "{text:?}: {d}");
        assert_eq!((d.line, d.col), pos, "{text:?}: {d}");
    }
}

#[test]
fn syntax_errors_cite_positions() {
    let cases: [(&str, (usize, usize)); 6] = [
        ("dim", (1, 4)),
        ("dim 2\nop X = Y", (2, 4)),
        ("dim 2\nop a = (X + Y", (2, 14)),
        ("dim 2\nfoo a = X", (2, 1)),
        ("dim 2\nquery q = maybe(a, b)", (2, 11)),
        ("dim 2\nop a = X Y", (2, 10)),
    ];
    for (text, pos) in cases {
        let d = first_error(text);
        assert_eq!((d.line, d.col), pos, "{text:?}: {d}");
    }
}

#[test]
fn every_malformed_line_is_reported() {
    let d = errors("dim 2\nop a = X +\nop b = * Y\nstate s = ket[1, 0]");
    assert_eq!(d.iter().map(|d| d.line).collect::<Vec<_>>(), [2, 3]);
}

#[test]
fn dimension_forms() {
    for text in ["dim 2 x 3", "dim 2x3", "dim 2 × 3"] {
        let doc = parse(text).unwrap();
        assert_eq!(doc.declarations[0].kind, DeclKind::Dim { a: 2, b: Some(3) }, "{text}");
    }
    assert!(parse("dim 2xy").is_err());
    assert!(parse("dim 65").is_err());
    assert!(parse("dim 16 x 16").is_err());
}

#[test]
fn expressions() {
    let text = "dim 2\nstate s = ket[1, 0]\n\
                op a = 1 + (X\n  + Y) / sqrt(2)\n\
                op b = GM(2, 1) - X\n\
                op c = exp(i * pi) * I 2\n\
                op d = conj(Y) + Y\n\
                state e = Z * ket[0, 1] ⊗ ket[1, 0]\n";
    let doc = parse(text).unwrap();
    assert_eq!(doc.declarations.len(), 7);
    let elaborated = load(&format!("{text}probe p = outer(e, e) ⊗ X kron I1 * 0 + Z"), "t");
    // e is a 4-dimensional ket, so the probe is 8x8 plus a 2x2: dimension error
    assert!(elaborated.is_err());
    let loaded = load(&format!("{text}probe p = a - 1 + b + c + d"), "t").unwrap();
    let probe = loaded.scenario.probe("p").unwrap().matrix();
    // (X+Y)/√2 + 0 − I + 0
    let s = 0.5f64.sqrt();
    assert!((probe[(0, 1)].re - s).abs() < 1e-15 && (probe[(0, 1)].im + s).abs() < 1e-15);
    assert!((probe[(0, 0)].re + 1.0).abs() < 1e-15);
}

#[test]
fn shipped_bell_matches_builtin() {
    let loaded = load(BELL, "bell").unwrap();
    assert!(loaded.warnings.is_empty());
    assert_equivalent(&loaded.scenario, &bell_chsh_scenario().unwrap());
}

#[test]
fn shipped_double_slit_matches_builtin() {
    let loaded = load(DOUBLE_SLIT, "double-slit").unwrap();
    assert_eq!(loaded.warnings.len(), 1);
    assert_equivalent(&loaded.scenario, &double_slit_scenario().unwrap());
}

#[test]
fn shipped_entangled_matches_builtin() {
    let loaded = load(ENTANGLED, "entangled").unwrap();
    assert!(loaded.warnings.is_empty());
    assert_equivalent(&loaded.scenario, &builtin("entangled:d=2").unwrap());
}

#[test]
fn shipped_files_round_trip() {
    for text in [BELL, DOUBLE_SLIT, ENTANGLED] {
        let doc = parse(text).unwrap();
        let printed = doc.to_string();
        assert_eq!(parse(&printed).unwrap(), doc, "{printed}");
        assert_eq!(parse(&printed).unwrap().to_string(), printed);
    }
}

#[test]
fn query_kinds() {
    let doc = parse(DOUBLE_SLIT).unwrap();
    let kinds: Vec<QueryKind> = doc
        .declarations
        .iter()
        .filter_map(|d| match &d.kind {
            DeclKind::Query { kind, .. } => Some(*kind),
            _ => None,
        })
        .collect();
    assert_eq!(kinds.iter().filter(|k| **k == QueryKind::Joint).count(), 2);
    assert_eq!(kinds.len(), 6);
}

/// Removes one randomly chosen token from `text`.
fn delete_token(text: &str, rng: &mut ChaCha8Rng) -> String {
    let spans = token_spans(text);
    let span = spans[rng.random_range(0..spans.len())];
    format!("{}{}", &text[..span.start.offset], &text[span.end.offset..])
}

fn position_is_valid(text: &str, d: &Diagnostic) -> bool {
    let lines: Vec<&str> = text.split('\n').collect();
    d.line >= 1 && d.line <= lines.len() && d.col >= 1 && d.col <= lines[d.line - 1].chars().count() + 1
}

#[test]
fn token_deletions_never_panic() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut rejected = 0;
    for _ in 0..300 {
        let mut text = BELL.to_string();
        for _ in 0..rng.random_range(1..4) {
            text = delete_token(&text, &mut rng);
        }
        let result = std::panic::catch_unwind(|| load(&text, "fuzz"));
        let result = result.unwrap_or_else(|_| panic!("panicked on {text:?}"));
        let diags = match result {
            Ok(e) => e.warnings,
            Err(d) => {
                rejected += 1;
                assert!(d.iter().any(Diagnostic::is_error));
                d
            }
        };
        for d in &diags {
            assert!(position_is_valid(&text, d), "{d} in {text:?}");
        }
    }
    assert!(rejected > 100, "{rejected}");
}

fn leaf() -> impl Strategy<Value = ExprKind> {
    prop_oneof![
        prop::num::f64::NORMAL.prop_map(|v| ExprKind::Real(v.abs())),
        (0u32..1000).prop_map(|v| ExprKind::Real(v as f64 / 8.0)),
        prop::num::f64::NORMAL.prop_map(|v| ExprKind::Imag(v.abs())),
        Just(ExprKind::ImagUnit),
        Just(ExprKind::Pi),
        (1usize..5).prop_map(ExprKind::Identity),
        prop::sample::select(vec!['X', 'Y', 'Z']).prop_map(ExprKind::Pauli),
        (2usize..4).prop_flat_map(|d| (Just(d), 1..d * d)).prop_map(|(d, k)| ExprKind::GellMann(d, k)),
        prop::sample::select(vec!["a", "psi", "x1", "kett", "I_2"]).prop_map(|n| ExprKind::Name(n.into())),
    ]
}

fn expr() -> impl Strategy<Value = Expr> {
    let wrap = |kind| Expr { kind, span: Span::default() };
    leaf().prop_map(wrap).prop_recursive(4, 32, 3, move |inner| {
        let ops = prop::sample::select(vec![BinOp::Add, BinOp::Sub, BinOp::Mul, BinOp::Div, BinOp::Kron]);
        let funcs = prop::sample::select(vec![Func::Sqrt, Func::Exp, Func::Conj]);
        prop_oneof![
            inner.clone().prop_map(move |e| wrap(ExprKind::Neg(Box::new(e)))),
            (ops, inner.clone(), inner.clone()).prop_map(move |(op, l, r)| wrap(ExprKind::Binary(
                op,
                Box::new(l),
                Box::new(r)
            ))),
            (funcs, inner.clone()).prop_map(move |(f, e)| wrap(ExprKind::Call(f, Box::new(e)))),
            (inner.clone(), inner.clone()).prop_map(move |(u, v)| wrap(ExprKind::Outer(Box::new(u), Box::new(v)))),
            prop::collection::vec(inner, 1..4).prop_map(move |v| wrap(ExprKind::Ket(v))),
        ]
    })
}

fn ident(name: &str) -> Ident {
    Ident { name: name.into(), span: Span::default() }
}

fn decl() -> impl Strategy<Value = Decl> {
    let names = || prop::sample::select(vec!["a", "psi", "x1", "kett", "I_2", "path_1"]);
    prop_oneof![
        (1usize..8, prop::option::of(1usize..8)).prop_map(|(a, b)| DeclKind::Dim { a, b }),
        (names(), expr()).prop_map(|(n, e)| DeclKind::State { name: ident(n), value: StateValue::Expr(e) }),
        (names(), 1usize..8).prop_map(|(n, d)| DeclKind::State { name: ident(n), value: StateValue::MaxEnt(d) }),
        (names(), expr()).prop_map(|(n, expr)| DeclKind::Op { name: ident(n), expr }),
        (names(), expr()).prop_map(|(n, expr)| DeclKind::Probe { name: ident(n), expr }),
        (names(), prop::collection::vec(names(), 1..4))
            .prop_map(|(n, m)| DeclKind::Pvm { name: ident(n), members: m.into_iter().map(ident).collect() }),
        (names(), prop::bool::ANY, names(), names()).prop_map(|(n, joint, f, g)| DeclKind::Query {
            name: ident(n),
            kind: if joint { QueryKind::Joint } else { QueryKind::Conditional },
            outcome: ident(f),
            probe: ident(g),
        }),
    ]
    .prop_map(|kind| Decl { kind, span: Span::default() })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn pretty_print_round_trips(decls in prop::collection::vec(decl(), 1..6)) {
        let doc = ScenarioDoc { declarations: decls };
        let printed = doc.to_string();
        let reparsed = parse(&printed);
        prop_assert!(reparsed.is_ok(), "{:?}\n{}", reparsed, printed);
        prop_assert_eq!(reparsed.unwrap(), doc);
    }

    #[test]
    fn arbitrary_text_never_panics(text in "[a-zA-Z0-9 =,\\[\\]{}()+*/⊗#\n.-]{0,80}") {
        if let Err(diags) = load(&text, "t") {
            prop_assert!(diags.iter().all(|d| position_is_valid(&text, d)));
        }
    }
}
