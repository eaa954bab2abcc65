//! Lexer and recursive-descent parser for program text.
//!
//! Grammar (informally):
//!
//! ```text
//! program   ::= clause*
//! clause    ::= head '.' | head ':-' goals '.' | (':-' | 'false' ':-') goals '.'
//!             | '?-' goals '.' | directive
//! directive ::= '#abducible' ['-'] name ['/' int | '(' terms ')'] '.'
//!             | '#pred' literal '::' quoted '.'
//! goals     ::= goal (',' goal)*
//! goal      ::= 'not' literal | literal | expr relop expr
//! relop     ::= '=' | '\=' | '≠' | '<' | '=<' | '>' | '>='
//! expr      ::= term (('+' | '-') term)*
//! term      ::= factor (('*' | '/') factor)*
//! factor    ::= '-' factor | var | number | name ['(' expr (',' expr)* ')'] | '(' expr ')'
//! ```

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use num::{BigInt, BigRational, One, Zero};

use crate::term::{
    Goal, Head, Literal, Origin, PredKey, Program, Query, RelOp, Rule, SourceSpan, Template, Term, Var, VarGen,
};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseError {
    pub span: SourceSpan,
    pub message: String,
    pub expected: BTreeSet<String>,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.span, self.message)?;
        if !self.expected.is_empty() {
            let list: Vec<&str> = self.expected.iter().map(String::as_str).collect();
            write!(f, " (expected {})", list.join(", "))?;
        }
        Ok(())
    }
}

impl std::error::Error for ParseError {}

#[derive(Clone, Debug)]
pub struct ParseOptions {
    pub file: String,
    /// Accept `forall/2` goals, which only generated programs may contain.
    pub allow_internal: bool,
}

impl Default for ParseOptions {
    fn default() -> Self {
        ParseOptions { file: "<input>".to_string(), allow_internal: false }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Var(String),
    Quoted(String),
    Int(BigInt),
    Dec(BigRational),
    LParen,
    RParen,
    Comma,
    End,
    Neck,
    QueryNeck,
    DoubleColon,
    Directive(String),
    Op(&'static str),
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{}`", s),
            Tok::Var(s) => format!("variable `{}`", s),
            Tok::Quoted(s) => format!("'{}'", s),
            Tok::Int(i) => i.to_string(),
            Tok::Dec(r) => r.to_string(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::End => "`.`".into(),
            Tok::Neck => "`:-`".into(),
            Tok::QueryNeck => "`?-`".into(),
            Tok::DoubleColon => "`::`".into(),
            Tok::Directive(d) => format!("`#{}`", d),
            Tok::Op(o) => format!("`{}`", o),
            Tok::Eof => "end of input".into(),
        }
    }
}

struct Lexer<'a> {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    col: usize,
    file: &'a str,
    errors: Vec<ParseError>,
}

impl<'a> Lexer<'a> {
    fn new(text: &str, file: &'a str) -> Self {
        Lexer { chars: text.chars().collect(), pos: 0, line: 1, col: 1, file, errors: Vec::new() }
    }

    fn span(&self) -> SourceSpan {
        SourceSpan { file: self.file.to_string(), line: self.line, column: self.col }
    }

    fn peek(&self, k: usize) -> Option<char> {
        self.chars.get(self.pos + k).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.get(self.pos).copied()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn error(&mut self, span: SourceSpan, message: impl Into<String>) {
        self.errors.push(ParseError { span, message: message.into(), expected: BTreeSet::new() });
    }

    fn skip_trivia(&mut self) {
        loop {
            match self.peek(0) {
                Some(c) if c.is_whitespace() => {
                    self.bump();
                }
                Some('%') => {
                    while let Some(c) = self.peek(0) {
                        if c == '\n' {
                            break;
                        }
                        self.bump();
                    }
                }
                Some('/') if self.peek(1) == Some('*') => {
                    let span = self.span();
                    self.bump();
                    self.bump();
                    loop {
                        match self.peek(0) {
                            None => {
                                self.error(span, "unterminated block comment");
                                return;
                            }
                            Some('*') if self.peek(1) == Some('/') => {
                                self.bump();
                                self.bump();
                                break;
                            }
                            _ => {
                                self.bump();
                            }
                        }
                    }
                }
                _ => return,
            }
        }
    }

    fn word(&mut self) -> String {
        let mut s = String::new();
        while let Some(c) = self.peek(0) {
            if c.is_alphanumeric() || c == '_' {
                s.push(c);
                self.bump();
            } else {
                break;
            }
        }
        s
    }

    fn number(&mut self) -> Tok {
        let mut digits = String::new();
        while let Some(c) = self.peek(0).filter(char::is_ascii_digit) {
            digits.push(c);
            self.bump();
        }
        let int: BigInt = digits.parse().expect("digits");
        if self.peek(0) == Some('.') && self.peek(1).is_some_and(|c| c.is_ascii_digit()) {
            self.bump();
            let mut frac = String::new();
            while let Some(c) = self.peek(0).filter(char::is_ascii_digit) {
                frac.push(c);
                self.bump();
            }
            let scale = num::pow(BigInt::from(10), frac.len());
            let numer = int * &scale + frac.parse::<BigInt>().expect("digits");
            return Tok::Dec(BigRational::new(numer, scale));
        }
        Tok::Int(int)
    }

    fn quoted(&mut self, span: SourceSpan) -> Tok {
        self.bump();
        let mut s = String::new();
        loop {
            match self.bump() {
                None => {
                    self.error(span, "unterminated quoted atom");
                    break;
                }
                Some('\'') if self.peek(0) == Some('\'') => {
                    self.bump();
                    s.push('\'');
                }
                Some('\'') => break,
                Some('\\') => match self.bump() {
                    Some('n') => s.push('\n'),
                    Some('t') => s.push('\t'),
                    Some(c) => s.push(c),
                    None => {}
                },
                Some(c) => s.push(c),
            }
        }
        Tok::Quoted(s)
    }

    fn tokens(mut self) -> (Vec<(Tok, SourceSpan)>, Vec<ParseError>) {
        let mut out = Vec::new();
        loop {
            self.skip_trivia();
            let span = self.span();
            let Some(c) = self.peek(0) else {
                out.push((Tok::Eof, span));
                break;
            };
            let tok = match c {
                c if c.is_ascii_lowercase() => Tok::Ident(self.word()),
                c if c.is_ascii_uppercase() || c == '_' => Tok::Var(self.word()),
                c if c.is_ascii_digit() => self.number(),
                '\'' => self.quoted(span.clone()),
                '(' => {
                    self.bump();
                    Tok::LParen
                }
                ')' => {
                    self.bump();
                    Tok::RParen
                }
                ',' => {
                    self.bump();
                    Tok::Comma
                }
                '.' => {
                    self.bump();
                    match self.peek(0) {
                        None | Some('%') => Tok::End,
                        Some(c) if c.is_whitespace() => Tok::End,
                        _ => {
                            self.error(span, "a clause-ending `.` must be followed by whitespace");
                            continue;
                        }
                    }
                }
                ':' if self.peek(1) == Some('-') => {
                    self.bump();
                    self.bump();
                    Tok::Neck
                }
                ':' if self.peek(1) == Some(':') => {
                    self.bump();
                    self.bump();
                    Tok::DoubleColon
                }
                '?' if self.peek(1) == Some('-') => {
                    self.bump();
                    self.bump();
                    Tok::QueryNeck
                }
                '#' => {
                    self.bump();
                    Tok::Directive(self.word())
                }
                '=' if self.peek(1) == Some('<') => {
                    self.bump();
                    self.bump();
                    Tok::Op("=<")
                }
                '\\' if self.peek(1) == Some('=') => {
                    self.bump();
                    self.bump();
                    Tok::Op("\\=")
                }
                '>' if self.peek(1) == Some('=') => {
                    self.bump();
                    self.bump();
                    Tok::Op(">=")
                }
                '≠' => {
                    self.bump();
                    Tok::Op("\\=")
                }
                '=' | '<' | '>' | '+' | '-' | '*' | '/' => {
                    self.bump();
                    Tok::Op(match c {
                        '=' => "=",
                        '<' => "<",
                        '>' => ">",
                        '+' => "+",
                        '-' => "-",
                        '*' => "*",
                        _ => "/",
                    })
                }
                other => {
                    self.bump();
                    self.error(span, format!("unexpected character `{}`", other));
                    continue;
                }
            };
            out.push((tok, span));
        }
        (out, self.errors)
    }
}

fn relop(tok: &Tok) -> Option<RelOp> {
    match tok {
        Tok::Op("=") => Some(RelOp::Eq),
        Tok::Op("\\=") => Some(RelOp::Ne),
        Tok::Op("<") => Some(RelOp::Lt),
        Tok::Op("=<") => Some(RelOp::Le),
        Tok::Op(">") => Some(RelOp::Gt),
        Tok::Op(">=") => Some(RelOp::Ge),
        _ => None,
    }
}

struct Parser<'g> {
    toks: Vec<(Tok, SourceSpan)>,
    pos: usize,
    errors: Vec<ParseError>,
    allow_internal: bool,
    vars: HashMap<String, Var>,
    gen: &'g VarGen,
}

type PResult<T> = Result<T, ParseError>;

impl<'g> Parser<'g> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.toks.len() - 1);
        &self.toks[i].0
    }

    fn span(&self) -> SourceSpan {
        self.toks[self.pos].1.clone()
    }

    fn bump(&mut self) -> Tok {
        let tok = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        tok
    }

    fn fail<T>(&self, message: impl Into<String>, expected: &[&str]) -> PResult<T> {
        Err(ParseError {
            span: self.span(),
            message: message.into(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
        })
    }

    fn unexpected<T>(&self, expected: &[&str]) -> PResult<T> {
        self.fail(format!("unexpected {}", self.peek().describe()), expected)
    }

    fn expect(&mut self, tok: Tok, desc: &str) -> PResult<()> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            self.unexpected(&[desc])
        }
    }

    fn recover(&mut self) {
        loop {
            match self.peek() {
                Tok::Eof => return,
                Tok::End => {
                    self.bump();
                    return;
                }
                _ => {
                    self.bump();
                }
            }
        }
    }

    fn program(&mut self, program: &mut Program) {
        while *self.peek() != Tok::Eof {
            self.vars.clear();
            if let Err(e) = self.clause(program) {
                self.errors.push(e);
                self.recover();
            }
        }
    }

    fn clause(&mut self, program: &mut Program) -> PResult<()> {
        let span = self.span();
        match self.peek().clone() {
            Tok::QueryNeck => {
                self.bump();
                let goals = self.goal_list()?;
                self.expect(Tok::End, "`.`")?;
                program.queries.push(Query { goals, span: Some(span) });
            }
            Tok::Neck => {
                self.bump();
                let body = self.goal_list()?;
                self.expect(Tok::End, "`.`")?;
                self.push_rule(program, Head::False, body, span);
            }
            Tok::Ident(ref f) if f == "false" && *self.peek_at(1) == Tok::Neck => {
                self.bump();
                self.bump();
                let body = self.goal_list()?;
                self.expect(Tok::End, "`.`")?;
                self.push_rule(program, Head::False, body, span);
            }
            Tok::Directive(name) => {
                self.bump();
                self.directive(&name, program)?;
            }
            _ => {
                let head = self.literal()?;
                let body = match self.peek() {
                    Tok::End => Vec::new(),
                    Tok::Neck => {
                        self.bump();
                        self.goal_list()?
                    }
                    _ => return self.unexpected(&["`.`", "`:-`"]),
                };
                self.expect(Tok::End, "`.`")?;
                self.push_rule(program, Head::Lit(head), body, span);
            }
        }
        Ok(())
    }

    fn push_rule(&mut self, program: &mut Program, head: Head, body: Vec<Goal>, span: SourceSpan) {
        let id = program.rules.len();
        program.rules.push(Rule { head, body, id, origin: Origin::User, span: Some(span) });
    }

    fn directive(&mut self, name: &str, program: &mut Program) -> PResult<()> {
        match name {
            "abducible" => {
                let strong_neg = if *self.peek() == Tok::Op("-") {
                    self.bump();
                    true
                } else {
                    false
                };
                let name = match self.bump() {
                    Tok::Ident(s) | Tok::Quoted(s) => s,
                    _ => {
                        self.pos -= 1;
                        return self.unexpected(&["predicate name"]);
                    }
                };
                let arity = match self.peek() {
                    Tok::Op("/") => {
                        self.bump();
                        match self.bump() {
                            Tok::Int(n) => n.try_into().map_err(|_| ParseError {
                                span: self.span(),
                                message: "arity out of range".into(),
                                expected: BTreeSet::new(),
                            })?,
                            _ => {
                                self.pos -= 1;
                                return self.unexpected(&["arity"]);
                            }
                        }
                    }
                    Tok::LParen => {
                        self.bump();
                        self.args()?.len()
                    }
                    _ => 0,
                };
                self.expect(Tok::End, "`.`")?;
                program.abducibles.insert(PredKey { strong_neg, name, arity });
                Ok(())
            }
            "pred" => {
                let head = self.literal()?;
                self.expect(Tok::DoubleColon, "`::`")?;
                let span = self.span();
                let pattern = match self.bump() {
                    Tok::Quoted(s) => s,
                    _ => {
                        self.pos -= 1;
                        return self.unexpected(&["quoted template"]);
                    }
                };
                self.expect(Tok::End, "`.`")?;
                let params: Vec<Option<String>> = head
                    .args
                    .iter()
                    .map(|a| match a {
                        Term::Var(v) if !v.name.starts_with('_') => Some(v.name.clone()),
                        _ => None,
                    })
                    .collect();
                for slot in template_slots(&pattern) {
                    if !params.iter().any(|p| p.as_deref() == Some(slot.as_str())) {
                        return Err(ParseError {
                            span,
                            message: format!("template slot `@({})` names no argument of {}", slot, head.key()),
                            expected: BTreeSet::new(),
                        });
                    }
                }
                let key = head.key();
                program.templates.insert(key.clone(), Template { key, params, pattern });
                Ok(())
            }
            other => Err(ParseError {
                span: self.toks[self.pos.saturating_sub(1)].1.clone(),
                message: format!("unknown directive `#{}`", other),
                expected: ["#abducible", "#pred"].iter().map(|s| s.to_string()).collect(),
            }),
        }
    }

    fn goal_list(&mut self) -> PResult<Vec<Goal>> {
        let mut goals = vec![self.goal()?];
        while *self.peek() == Tok::Comma {
            self.bump();
            goals.push(self.goal()?);
        }
        Ok(goals)
    }

    fn goal(&mut self) -> PResult<Goal> {
        match self.peek() {
            Tok::Ident(s) if s == "not" => {
                self.bump();
                return Ok(Goal::Not(self.literal()?));
            }
            Tok::Ident(s) if s == "forall" && *self.peek_at(1) == Tok::LParen => {
                if !self.allow_internal {
                    return self.fail("`forall` is reserved for generated programs", &[]);
                }
                self.bump();
                self.bump();
                let var = match self.bump() {
                    Tok::Var(name) => self.var(&name),
                    _ => {
                        self.pos -= 1;
                        return self.unexpected(&["variable"]);
                    }
                };
                self.expect(Tok::Comma, "`,`")?;
                let body = self.goal()?;
                self.expect(Tok::RParen, "`)`")?;
                return Ok(Goal::Forall(var, Box::new(body)));
            }
            Tok::End | Tok::Eof | Tok::Comma => return self.unexpected(&["goal"]),
            _ => {}
        }
        let start = self.span();
        let lhs = self.expr()?;
        if let Some(op) = relop(self.peek()) {
            self.bump();
            let rhs = self.expr()?;
            return Ok(Goal::Rel(op, lhs, rhs));
        }
        term_to_literal(lhs).map(Goal::Pos).ok_or_else(|| ParseError {
            span: start,
            message: "expected a literal or a relation".into(),
            expected: BTreeSet::new(),
        })
    }

    fn literal(&mut self) -> PResult<Literal> {
        let start = self.span();
        let t = self.expr()?;
        term_to_literal(t).ok_or_else(|| ParseError {
            span: start,
            message: "expected a literal".into(),
            expected: BTreeSet::new(),
        })
    }

    fn var(&mut self, name: &str) -> Var {
        if name == "_" {
            return self.gen.fresh("_");
        }
        if let Some(v) = self.vars.get(name) {
            return v.clone();
        }
        let v = self.gen.fresh(name);
        self.vars.insert(name.to_string(), v.clone());
        v
    }

    fn expr(&mut self) -> PResult<Term> {
        let mut lhs = self.product()?;
        while let Tok::Op(op @ ("+" | "-")) = self.peek() {
            let op = *op;
            self.bump();
            let rhs = self.product()?;
            lhs = Term::Compound(op.to_string(), vec![lhs, rhs]);
        }
        Ok(lhs)
    }

    fn product(&mut self) -> PResult<Term> {
        let mut lhs = self.factor()?;
        while let Tok::Op(op @ ("*" | "/")) = self.peek() {
            let op = *op;
            let span = self.span();
            self.bump();
            let rhs = self.factor()?;
            lhs = match (op, &lhs, &rhs) {
                ("/", Term::Num(a), Term::Num(b)) if a.denom().is_one() && b.denom().is_one() => {
                    if b.is_zero() {
                        return Err(ParseError {
                            span,
                            message: "division by zero in a numeric literal".into(),
                            expected: BTreeSet::new(),
                        });
                    }
                    Term::Num(a / b)
                }
                _ => Term::Compound(op.to_string(), vec![lhs, rhs]),
            };
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> PResult<Term> {
        if *self.peek() == Tok::Op("-") {
            self.bump();
            return match self.peek().clone() {
                Tok::Int(i) => {
                    self.bump();
                    Ok(Term::Num(BigRational::from_integer(-i)))
                }
                Tok::Dec(r) => {
                    self.bump();
                    Ok(Term::Num(-r))
                }
                _ => Ok(Term::Compound("-".into(), vec![self.factor()?])),
            };
        }
        match self.bump() {
            Tok::Var(name) => Ok(Term::Var(self.var(&name))),
            Tok::Int(i) => Ok(Term::Num(BigRational::from_integer(i))),
            Tok::Dec(r) => Ok(Term::Num(r)),
            Tok::Ident(name) | Tok::Quoted(name) => {
                if *self.peek() == Tok::LParen {
                    self.bump();
                    let args = self.args()?;
                    Ok(Term::compound(name, args))
                } else {
                    Ok(Term::Const(name))
                }
            }
            Tok::LParen => {
                let inner = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(inner)
            }
            _ => {
                self.pos -= 1;
                self.unexpected(&["term"])
            }
        }
    }

    // Parses `expr, ..., expr )` after an opening parenthesis.
    fn args(&mut self) -> PResult<Vec<Term>> {
        let mut args = vec![self.expr()?];
        loop {
            match self.peek() {
                Tok::Comma => {
                    self.bump();
                    args.push(self.expr()?);
                }
                Tok::RParen => {
                    self.bump();
                    return Ok(args);
                }
                _ => return self.unexpected(&["`,`", "`)`"]),
            }
        }
    }
}

fn term_to_literal(t: Term) -> Option<Literal> {
    match t {
        Term::Const(name) => Some(Literal::new(name, vec![])),
        Term::Compound(ref f, _) if t.is_arith() && f == "-" && matches!(&t, Term::Compound(_, a) if a.len() == 1) => {
            let Term::Compound(_, mut args) = t else { unreachable!() };
            match args.pop()? {
                Term::Const(name) => Some(Literal::negated(name, vec![])),
                inner @ Term::Compound(..) if !inner.is_arith() => {
                    let Term::Compound(name, args) = inner else { unreachable!() };
                    Some(Literal::negated(name, args))
                }
                _ => None,
            }
        }
        Term::Compound(..) if t.is_arith() => None,
        Term::Compound(name, args) => Some(Literal::new(name, args)),
        Term::Var(_) | Term::Num(_) => None,
    }
}

/// Names referenced by `@(Name)` slots, in order of appearance.
pub fn template_slots(pattern: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut rest = pattern;
    while let Some(i) = rest.find("@(") {
        let after = &rest[i + 2..];
        match after.find(')') {
            Some(j) => {
                out.push(after[..j].trim().to_string());
                rest = &after[j + 1..];
            }
            None => break,
        }
    }
    out
}

fn run_parser(text: &str, opts: &ParseOptions, gen: &VarGen) -> (Program, Vec<ParseError>) {
    let (toks, mut errors) = Lexer::new(text, &opts.file).tokens();
    let mut parser = Parser {
        toks,
        pos: 0,
        errors: Vec::new(),
        allow_internal: opts.allow_internal,
        vars: HashMap::new(),
        gen,
    };
    let mut program = Program::default();
    parser.program(&mut program);
    errors.extend(parser.errors);
    errors.sort_by(|a, b| (a.span.line, a.span.column).cmp(&(b.span.line, b.span.column)));
    (program, errors)
}

pub fn parse_program_with(text: &str, opts: &ParseOptions, gen: &VarGen) -> Result<Program, Vec<ParseError>> {
    let (program, errors) = run_parser(text, opts, gen);
    if errors.is_empty() {
        Ok(program)
    } else {
        Err(errors)
    }
}

pub fn parse_program(text: &str) -> Result<Program, Vec<ParseError>> {
    parse_program_with(text, &ParseOptions::default(), &VarGen::default())
}

/// Parses a single `?- goals.` query.
pub fn parse_query(text: &str) -> Result<Vec<Goal>, ParseError> {
    parse_query_with(text, &VarGen::default())
}

pub fn parse_query_with(text: &str, gen: &VarGen) -> Result<Vec<Goal>, ParseError> {
    let opts = ParseOptions { file: "<query>".into(), allow_internal: false };
    let (program, mut errors) = run_parser(text, &opts, gen);
    if !errors.is_empty() {
        return Err(errors.remove(0));
    }
    let end = SourceSpan { file: opts.file.clone(), line: 1, column: 1 };
    if !program.rules.is_empty() || !program.abducibles.is_empty() || !program.templates.is_empty() {
        return Err(ParseError {
            span: program.rules.first().and_then(|r| r.span.clone()).unwrap_or(end),
            message: "expected a query starting with `?-`".into(),
            expected: ["`?-`".to_string()].into(),
        });
    }
    match program.queries.len() {
        1 => Ok(program.queries.into_iter().next().unwrap().goals),
        0 => Err(ParseError { span: end, message: "no query found".into(), expected: ["`?-`".to_string()].into() }),
        _ => Err(ParseError {
            span: program.queries[1].span.clone().unwrap_or(end),
            message: "more than one query".into(),
            expected: BTreeSet::new(),
        }),
    }
}
