//! Canonical text form: parenthesized prefix notation.
//!
//! A term that fits in [`LINE_WIDTH`] columns at its indentation is printed
//! on one line; otherwise its head goes on the first line and each argument
//! on its own line, indented two spaces further.

use super::{is_identifier, DslError, Literal, Prim, Term};

const LINE_WIDTH: usize = 80;

pub fn render_source(term: &Term) -> String {
    let mut out = String::new();
    render(term, 0, &mut out);
    out.push('\n');
    out
}

fn flat(term: &Term) -> String {
    match term {
        Term::Input => "(input)".into(),
        Term::Var(name) => format!("${name}"),
        Term::Lit(l) => l.to_string(),
        _ => {
            let (head, parts) = head_and_parts(term);
            let mut s = format!("({head}");
            for p in parts {
                s.push(' ');
                s.push_str(&flat(p));
            }
            s.push(')');
            s
        }
    }
}

fn head_and_parts(term: &Term) -> (String, Vec<&Term>) {
    match term {
        Term::Prim(p, args) => (p.name().to_string(), args.iter().collect()),
        Term::Let { name, bound, body } => (format!("let {name}"), vec![bound, body]),
        Term::Map { binder, source, body } => (format!("map {binder}"), vec![source, body]),
        Term::Filter { binder, source, predicate } => (format!("filter {binder}"), vec![source, predicate]),
        Term::FoldOverlay { objects, canvas } => ("fold_overlay".into(), vec![objects, canvas]),
        Term::Input | Term::Var(_) | Term::Lit(_) => unreachable!("atoms have no head"),
    }
}

fn render(term: &Term, indent: usize, out: &mut String) {
    let one_line = flat(term);
    if indent + one_line.len() <= LINE_WIDTH || term.children().is_empty() {
        out.push_str(&one_line);
        return;
    }
    let (head, parts) = head_and_parts(term);
    out.push('(');
    out.push_str(&head);
    for p in parts {
        out.push('\n');
        out.push_str(&" ".repeat(indent + 2));
        render(p, indent + 2, out);
    }
    out.push(')');
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Open,
    Close,
    Atom(String),
}

struct Lexed {
    token: Token,
    line: usize,
    col: usize,
}

fn lex(text: &str) -> Vec<Lexed> {
    let mut out = Vec::new();
    let (mut line, mut col) = (1, 1);
    let mut chars = text.chars().peekable();
    while let Some(&ch) = chars.peek() {
        let (start_line, start_col) = (line, col);
        match ch {
            '(' | ')' => {
                chars.next();
                col += 1;
                out.push(Lexed {
                    token: if ch == '(' { Token::Open } else { Token::Close },
                    line: start_line,
                    col: start_col,
                });
            }
            c if c.is_whitespace() => {
                chars.next();
                if c == '\n' {
                    line += 1;
                    col = 1;
                } else {
                    col += 1;
                }
            }
            _ => {
                let mut atom = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_whitespace() || c == '(' || c == ')' {
                        break;
                    }
                    atom.push(c);
                    chars.next();
                    col += 1;
                }
                out.push(Lexed { token: Token::Atom(atom), line: start_line, col: start_col });
            }
        }
    }
    out
}

struct Parser {
    tokens: Vec<Lexed>,
    pos: usize,
    end: (usize, usize),
}

/// Parses the canonical text form (any whitespace layout is accepted).
pub fn parse_source(text: &str) -> Result<Term, DslError> {
    let tokens = lex(text);
    let end = text.lines().enumerate().last().map(|(i, l)| (i + 1, l.chars().count() + 1)).unwrap_or((1, 1));
    let mut parser = Parser { tokens, pos: 0, end };
    let term = parser.term()?;
    if let Some(extra) = parser.tokens.get(parser.pos) {
        return Err(DslError::Parse { line: extra.line, col: extra.col, message: "unexpected trailing input".into() });
    }
    Ok(term)
}

impl Parser {
    fn error<T>(&self, message: impl Into<String>) -> Result<T, DslError> {
        let (line, col) = self.tokens.get(self.pos).map(|t| (t.line, t.col)).unwrap_or(self.end);
        Err(DslError::Parse { line, col, message: message.into() })
    }

    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|t| &t.token)
    }

    fn close(&mut self) -> Result<(), DslError> {
        match self.peek() {
            Some(Token::Close) => {
                self.pos += 1;
                Ok(())
            }
            None => self.error("unbalanced parenthesis: expected `)`"),
            Some(_) => self.error("expected `)`"),
        }
    }

    fn binder(&mut self) -> Result<String, DslError> {
        match self.peek() {
            Some(Token::Atom(a)) if is_identifier(a) => {
                let name = a.clone();
                self.pos += 1;
                Ok(name)
            }
            _ => self.error("expected a binder name"),
        }
    }

    fn term(&mut self) -> Result<Term, DslError> {
        match self.peek() {
            None => self.error("unexpected end of input"),
            Some(Token::Close) => self.error("unexpected `)`"),
            Some(Token::Atom(a)) => {
                let a = a.clone();
                if let Some(name) = a.strip_prefix('$') {
                    if !is_identifier(name) {
                        return self.error(format!("invalid variable name `{a}`"));
                    }
                    self.pos += 1;
                    return Ok(Term::Var(name.to_string()));
                }
                match Literal::parse(&a) {
                    Some(l) => {
                        self.pos += 1;
                        Ok(Term::Lit(l))
                    }
                    None => self.error(format!("unknown literal `{a}`")),
                }
            }
            Some(Token::Open) => {
                self.pos += 1;
                let head = match self.peek() {
                    Some(Token::Atom(h)) => h.clone(),
                    _ => return self.error("expected a form name after `(`"),
                };
                let head_pos = self.pos;
                self.pos += 1;
                let term = match head.as_str() {
                    "input" => Term::Input,
                    "let" => {
                        let name = self.binder()?;
                        let bound = self.term()?;
                        let body = self.term()?;
                        Term::Let { name, bound: Box::new(bound), body: Box::new(body) }
                    }
                    "map" => {
                        let binder = self.binder()?;
                        let source = self.term()?;
                        let body = self.term()?;
                        Term::Map { binder, source: Box::new(source), body: Box::new(body) }
                    }
                    "filter" => {
                        let binder = self.binder()?;
                        let source = self.term()?;
                        let predicate = self.term()?;
                        Term::Filter { binder, source: Box::new(source), predicate: Box::new(predicate) }
                    }
                    "fold_overlay" => {
                        let objects = self.term()?;
                        let canvas = self.term()?;
                        Term::FoldOverlay { objects: Box::new(objects), canvas: Box::new(canvas) }
                    }
                    name => {
                        let Some(p) = Prim::from_name(name) else {
                            self.pos = head_pos;
                            return Err(DslError::UnknownPrimitive(name.to_string()));
                        };
                        let mut args = Vec::new();
                        while !matches!(self.peek(), Some(Token::Close) | None) {
                            args.push(self.term()?);
                        }
                        Term::Prim(p, args)
                    }
                };
                self.close()?;
                Ok(term)
            }
        }
    }
}
