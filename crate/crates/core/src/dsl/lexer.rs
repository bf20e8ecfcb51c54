use super::{Diagnostic, Pos, Span};

#[derive(Clone, Debug, PartialEq)]
pub(crate) enum Tok {
    Number(f64),
    /// `2.5i`
    Imag(f64),
    Ident(String),
    Eq,
    Comma,
    LParen,
    RParen,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    Plus,
    Minus,
    Star,
    Slash,
    Kron,
    Newline,
    Eof,
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Number(v) => format!("number {v}"),
            Tok::Imag(v) => format!("imaginary number {v}i"),
            Tok::Ident(s) => format!("'{s}'"),
            Tok::Eq => "'='".into(),
            Tok::Comma => "','".into(),
            Tok::LParen => "'('".into(),
            Tok::RParen => "')'".into(),
            Tok::LBracket => "'['".into(),
            Tok::RBracket => "']'".into(),
            Tok::LBrace => "'{'".into(),
            Tok::RBrace => "'}'".into(),
            Tok::Plus => "'+'".into(),
            Tok::Minus => "'-'".into(),
            Tok::Star => "'*'".into(),
            Tok::Slash => "'/'".into(),
            Tok::Kron => "'⊗'".into(),
            Tok::Newline => "end of line".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Clone, Debug)]
pub(crate) struct Token {
    pub tok: Tok,
    pub span: Span,
}

struct Cursor<'a> {
    text: &'a str,
    offset: usize,
    line: usize,
    col: usize,
}

impl Cursor<'_> {
    fn peek(&self) -> Option<char> {
        self.text[self.offset..].chars().next()
    }

    fn peek_second(&self) -> Option<char> {
        let mut it = self.text[self.offset..].chars();
        it.next();
        it.next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.offset += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn pos(&self) -> Pos {
        Pos { line: self.line, col: self.col, offset: self.offset }
    }

    fn eat_while(&mut self, f: impl Fn(char) -> bool) {
        while self.peek().is_some_and(&f) {
            self.bump();
        }
    }
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_continue(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

/// Newlines inside brackets are insignificant, so long expressions may span
/// several lines.
pub(crate) fn lex(text: &str) -> (Vec<Token>, Vec<Diagnostic>) {
    let mut cur = Cursor { text, offset: 0, line: 1, col: 1 };
    let mut tokens = Vec::new();
    let mut diags = Vec::new();
    let mut depth = 0usize;

    while let Some(c) = cur.peek() {
        let start = cur.pos();
        let tok = match c {
            '#' => {
                cur.eat_while(|c| c != '\n');
                continue;
            }
            '\n' => {
                cur.bump();
                if depth > 0 {
                    continue;
                }
                Tok::Newline
            }
            c if c.is_whitespace() => {
                cur.bump();
                continue;
            }
            c if c.is_ascii_digit() || (c == '.' && cur.peek_second().is_some_and(|d| d.is_ascii_digit())) => {
                lex_number(&mut cur)
            }
            c if is_ident_start(c) => {
                cur.eat_while(is_ident_continue);
                Tok::Ident(text[start.offset..cur.offset].to_string())
            }
            _ => {
                cur.bump();
                match c {
                    '=' => Tok::Eq,
                    ',' => Tok::Comma,
                    '(' | '[' | '{' => {
                        depth += 1;
                        match c {
                            '(' => Tok::LParen,
                            '[' => Tok::LBracket,
                            _ => Tok::LBrace,
                        }
                    }
                    ')' | ']' | '}' => {
                        depth = depth.saturating_sub(1);
                        match c {
                            ')' => Tok::RParen,
                            ']' => Tok::RBracket,
                            _ => Tok::RBrace,
                        }
                    }
                    '+' => Tok::Plus,
                    '-' | '−' => Tok::Minus,
                    '*' | '·' => Tok::Star,
                    '/' => Tok::Slash,
                    '⊗' => Tok::Kron,
                    '×' => Tok::Ident("x".into()),
                    other => {
                        diags.push(Diagnostic::error(format!("unexpected character {other:?}"), start));
                        continue;
                    }
                }
            }
        };
        tokens.push(Token { tok, span: Span { start, end: cur.pos() } });
    }
    let end = cur.pos();
    tokens.push(Token { tok: Tok::Eof, span: Span { start: end, end } });
    (tokens, diags)
}

fn lex_number(cur: &mut Cursor) -> Tok {
    let start = cur.offset;
    cur.eat_while(|c| c.is_ascii_digit());
    if cur.peek() == Some('.') {
        cur.bump();
        cur.eat_while(|c| c.is_ascii_digit());
    }
    if matches!(cur.peek(), Some('e' | 'E')) {
        let rest = &cur.text[cur.offset + 1..];
        let mut chars = rest.chars();
        let digits_follow = match chars.next() {
            Some('+' | '-') => chars.next().is_some_and(|c| c.is_ascii_digit()),
            Some(c) => c.is_ascii_digit(),
            None => false,
        };
        if digits_follow {
            cur.bump();
            if matches!(cur.peek(), Some('+' | '-')) {
                cur.bump();
            }
            cur.eat_while(|c| c.is_ascii_digit());
        }
    }
    let value: f64 = cur.text[start..cur.offset].parse().unwrap_or(f64::NAN);
    if cur.peek() == Some('i') && !cur.peek_second().is_some_and(is_ident_continue) {
        cur.bump();
        return Tok::Imag(value);
    }
    Tok::Number(value)
}
