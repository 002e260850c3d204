// SPDX-License-Identifier: Apache-2.0

//! S-expression syntax for formulas and number terms.
//!
//! ```text
//! formula := true | false
//!          | (= h h) | (= t t) | (< t t)
//!          | (<lex (h..) (h..)) | (<=lex (h..) (h..)) | (half<= (h..) (h..))
//!          | (not φ) | (and φ..) | (or φ..) | (-> φ φ) | (<-> φ φ)
//!          | (forall x φ) | (forall (x..) φ) | (exists ..)
//!          | (gfr f (x..) (y1..) .. (yi..) (r..) t ψ) | (bgfr ..)
//!          | (R h..)
//! term    := integer | "domain constant" | (+ t t) | (* t t) | (sign t) | (chi φ)
//!          | (sum (x..) t) | (sum (x..) φ t) | prod | max | bsum | bprod | bmax
//!          | (F h..)
//! h       := x | (@ s h..)
//! ```
//!
//! Inside a `gfr` block the recursion name applied to index terms is a
//! recursion call. `;` starts a comment that runs to the end of the line.

use num_bigint::BigInt;

use crate::logic::{
    AggKind, Aggregation, CmpKind, Formula, IndexTerm, Literal, NumberTerm, QuantKind,
    RecursionDef,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{line}:{col}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

type Result<T> = std::result::Result<T, ParseError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Pos {
    line: usize,
    col: usize,
}

#[derive(Debug, Clone)]
enum Sexp {
    Atom(String, Pos),
    Str(String, Pos),
    List(Vec<Sexp>, Pos),
}

impl Sexp {
    fn pos(&self) -> Pos {
        match self {
            Sexp::Atom(_, p) | Sexp::Str(_, p) | Sexp::List(_, p) => *p,
        }
    }
}

fn fail<T>(p: Pos, message: impl Into<String>) -> Result<T> {
    Err(ParseError {
        line: p.line,
        col: p.col,
        message: message.into(),
    })
}

const KEYWORDS: &[&str] = &[
    "true", "false", "=", "<", "<lex", "<=lex", "half<=", "not", "and", "or", "->", "<->",
    "forall", "exists", "gfr", "bgfr", "+", "*", "sign", "chi", "sum", "prod", "max", "bsum",
    "bprod", "bmax", "@",
];

fn is_keyword(s: &str) -> bool {
    KEYWORDS.contains(&s)
}

fn is_integer(s: &str) -> bool {
    let digits = s.strip_prefix('-').unwrap_or(s);
    !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit())
}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    pos: Pos,
}

impl Lexer<'_> {
    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.pos.line += 1;
            self.pos.col = 1;
        } else {
            self.pos.col += 1;
        }
        Some(c)
    }

    fn skip_blank(&mut self) {
        while let Some(&c) = self.chars.peek() {
            if c == ';' {
                while self.chars.peek().is_some_and(|&c| c != '\n') {
                    self.bump();
                }
            } else if c.is_whitespace() {
                self.bump();
            } else {
                break;
            }
        }
    }

    fn expr(&mut self) -> Result<Sexp> {
        self.skip_blank();
        let start = self.pos;
        match self.chars.peek().copied() {
            None => fail(start, "unexpected end of input"),
            Some(')') => fail(start, "unexpected ')'"),
            Some('(') => {
                self.bump();
                let mut items = Vec::new();
                loop {
                    self.skip_blank();
                    match self.chars.peek() {
                        None => return fail(start, "unclosed '('"),
                        Some(')') => {
                            self.bump();
                            return Ok(Sexp::List(items, start));
                        }
                        Some(_) => items.push(self.expr()?),
                    }
                }
            }
            Some('"') => {
                self.bump();
                let mut text = String::new();
                loop {
                    match self.bump() {
                        None => return fail(start, "unterminated string"),
                        Some('"') => return Ok(Sexp::Str(text, start)),
                        Some(c) => text.push(c),
                    }
                }
            }
            Some(_) => {
                let mut text = String::new();
                while let Some(&c) = self.chars.peek() {
                    if c.is_whitespace() || matches!(c, '(' | ')' | '"' | ';') {
                        break;
                    }
                    text.push(c);
                    self.bump();
                }
                Ok(Sexp::Atom(text, start))
            }
        }
    }
}

fn read_one(text: &str) -> Result<Sexp> {
    let mut lx = Lexer {
        chars: text.chars().peekable(),
        pos: Pos { line: 1, col: 1 },
    };
    let e = lx.expr()?;
    lx.skip_blank();
    if lx.chars.peek().is_some() {
        return fail(lx.pos, "trailing input after expression");
    }
    Ok(e)
}

pub fn parse_formula(text: &str) -> Result<Formula> {
    Parser { rec: Vec::new() }.formula(&read_one(text)?)
}

pub fn parse_term(text: &str) -> Result<NumberTerm> {
    Parser { rec: Vec::new() }.term(&read_one(text)?)
}

struct Parser {
    /// Recursion names in scope, innermost last.
    rec: Vec<String>,
}

fn ident(e: &Sexp, what: &str) -> Result<String> {
    match e {
        Sexp::Atom(s, p) => {
            if is_keyword(s) || is_integer(s) {
                fail(*p, format!("'{s}' cannot be used as {what}"))
            } else {
                Ok(s.clone())
            }
        }
        other => fail(other.pos(), format!("expected {what}")),
    }
}

fn var_list(e: &Sexp) -> Result<Vec<String>> {
    match e {
        Sexp::List(items, _) => items.iter().map(|v| ident(v, "a variable")).collect(),
        other => fail(other.pos(), "expected a parenthesized variable list"),
    }
}

/// A single variable or a variable list.
fn binder(e: &Sexp) -> Result<Vec<String>> {
    match e {
        Sexp::Atom(..) => Ok(vec![ident(e, "a variable")?]),
        _ => var_list(e),
    }
}

fn index(e: &Sexp) -> Result<IndexTerm> {
    match e {
        Sexp::Atom(..) => Ok(IndexTerm::Var(ident(e, "a variable")?)),
        Sexp::List(items, p) => match items.first() {
            Some(Sexp::Atom(h, _)) if h == "@" => {
                let name = items
                    .get(1)
                    .map(|n| ident(n, "a skeleton function name"))
                    .unwrap_or_else(|| fail(*p, "(@ s ..) needs a function name"))?;
                Ok(IndexTerm::App(name, items[2..].iter().map(index).collect::<Result<_>>()?))
            }
            _ => fail(*p, "expected an index term: a variable or (@ s ..)"),
        },
        Sexp::Str(_, p) => fail(*p, "expected an index term, found a domain constant"),
    }
}

fn index_list(e: &Sexp) -> Result<Vec<IndexTerm>> {
    match e {
        Sexp::List(items, _) => items.iter().map(index).collect(),
        other => fail(other.pos(), "expected a parenthesized tuple of index terms"),
    }
}

fn looks_like_index(e: &Sexp) -> bool {
    match e {
        Sexp::Atom(s, _) => !is_integer(s),
        Sexp::List(items, _) => matches!(items.first(), Some(Sexp::Atom(h, _)) if h == "@"),
        Sexp::Str(..) => false,
    }
}

fn arity(p: Pos, head: &str, args: &[Sexp], n: usize) -> Result<()> {
    if args.len() != n {
        return fail(p, format!("'{head}' takes {n} arguments, got {}", args.len()));
    }
    Ok(())
}

fn agg_kind(head: &str) -> Option<(AggKind, bool)> {
    Some(match head {
        "sum" => (AggKind::Sum, false),
        "prod" => (AggKind::Prod, false),
        "max" => (AggKind::Max, false),
        "bsum" => (AggKind::Sum, true),
        "bprod" => (AggKind::Prod, true),
        "bmax" => (AggKind::Max, true),
        _ => return None,
    })
}

impl Parser {
    fn formula(&mut self, e: &Sexp) -> Result<Formula> {
        let (items, p) = match e {
            Sexp::Atom(s, _) if s == "true" => return Ok(Formula::True),
            Sexp::Atom(s, _) if s == "false" => return Ok(Formula::False),
            Sexp::List(items, p) => (items, *p),
            other => return fail(other.pos(), "expected a formula"),
        };
        let Some((head, args)) = items.split_first() else {
            return fail(p, "empty list is not a formula");
        };
        let head = match head {
            Sexp::Atom(h, _) => h.as_str(),
            other => return fail(other.pos(), "expected an operator or relation name"),
        };
        let binary = |this: &mut Parser| -> Result<(Formula, Formula)> {
            arity(p, head, args, 2)?;
            Ok((this.formula(&args[0])?, this.formula(&args[1])?))
        };
        match head {
            "=" => {
                arity(p, head, args, 2)?;
                if looks_like_index(&args[0]) && looks_like_index(&args[1]) {
                    Ok(Formula::IndexEq(index(&args[0])?, index(&args[1])?))
                } else {
                    Ok(Formula::NumEq(self.term(&args[0])?, self.term(&args[1])?))
                }
            }
            "<" => {
                arity(p, head, args, 2)?;
                Ok(Formula::NumLt(self.term(&args[0])?, self.term(&args[1])?))
            }
            "<lex" | "<=lex" | "half<=" => {
                arity(p, head, args, 2)?;
                let (a, b) = (index_list(&args[0])?, index_list(&args[1])?);
                if a.len() != b.len() {
                    return fail(p, format!("'{head}' compares tuples of lengths {} and {}", a.len(), b.len()));
                }
                Ok(match head {
                    "<lex" => Formula::TupleCmp(CmpKind::Lt, a, b),
                    "<=lex" => Formula::TupleCmp(CmpKind::Le, a, b),
                    _ => Formula::HalfLe(a, b),
                })
            }
            "not" => {
                arity(p, head, args, 1)?;
                Ok(Formula::not(self.formula(&args[0])?))
            }
            "and" | "or" => {
                let fs = args.iter().map(|a| self.formula(a)).collect::<Result<Vec<_>>>()?;
                Ok(if head == "and" { Formula::And(fs) } else { Formula::Or(fs) })
            }
            "->" => binary(self).map(|(a, b)| Formula::implies(a, b)),
            "<->" => binary(self).map(|(a, b)| Formula::iff(a, b)),
            "forall" | "exists" => {
                arity(p, head, args, 2)?;
                let q = if head == "forall" { QuantKind::Forall } else { QuantKind::Exists };
                Ok(Formula::Quant(q, binder(&args[0])?, Box::new(self.formula(&args[1])?)))
            }
            "gfr" | "bgfr" => self.gfr(p, head == "bgfr", args),
            h if is_keyword(h) => fail(p, format!("'{h}' is a number term, not a formula")),
            h if is_integer(h) => fail(p, "expected a formula, found a number"),
            h => Ok(Formula::Rel(h.to_string(), args.iter().map(index).collect::<Result<_>>()?)),
        }
    }

    fn gfr(&mut self, p: Pos, bounded: bool, args: &[Sexp]) -> Result<Formula> {
        if args.len() < 6 {
            return fail(p, "gfr needs a name, (x..), at least one (y..) block, (r..), a body and a sentence");
        }
        let name = ident(&args[0], "a recursion name")?;
        let lists = &args[1..args.len() - 2];
        let x = var_list(&lists[0])?;
        let ys = lists[1..lists.len() - 1].iter().map(var_list).collect::<Result<Vec<_>>>()?;
        let rest = var_list(&lists[lists.len() - 1])?;
        if let Some(w) = ys.first().map(Vec::len) {
            if let Some(bad) = lists[1..lists.len() - 1].iter().zip(&ys).find(|(_, y)| y.len() != w) {
                return fail(bad.0.pos(), format!("every y block must have {w} variables"));
            }
        }
        self.rec.push(name.clone());
        let body = self.term(&args[args.len() - 2]);
        let psi = self.formula(&args[args.len() - 1]);
        self.rec.pop();
        Ok(Formula::Gfr(
            Box::new(RecursionDef {
                name,
                x,
                ys,
                rest,
                body: body?,
                bounded,
            }),
            Box::new(psi?),
        ))
    }

    fn term(&mut self, e: &Sexp) -> Result<NumberTerm> {
        let (items, p) = match e {
            Sexp::Atom(s, p) => {
                return if is_integer(s) {
                    let v: BigInt = s.parse().expect("checked integer");
                    Ok(NumberTerm::Const(Literal::Int(v)))
                } else {
                    fail(*p, format!("'{s}' is not a number term; quote domain constants"))
                };
            }
            Sexp::Str(s, _) => return Ok(NumberTerm::Const(Literal::Text(s.clone()))),
            Sexp::List(items, p) => (items, *p),
        };
        let Some((head, args)) = items.split_first() else {
            return fail(p, "empty list is not a number term");
        };
        let head = match head {
            Sexp::Atom(h, _) => h.as_str(),
            other => return fail(other.pos(), "expected an operator or function name"),
        };
        match head {
            "+" | "*" => {
                arity(p, head, args, 2)?;
                let (a, b) = (self.term(&args[0])?, self.term(&args[1])?);
                Ok(if head == "+" { NumberTerm::add(a, b) } else { NumberTerm::mul(a, b) })
            }
            "sign" => {
                arity(p, head, args, 1)?;
                Ok(NumberTerm::Sign(Box::new(self.term(&args[0])?)))
            }
            "chi" => {
                arity(p, head, args, 1)?;
                Ok(NumberTerm::chi(self.formula(&args[0])?))
            }
            h if agg_kind(h).is_some() => {
                let (kind, bounded) = agg_kind(h).expect("checked");
                let (rel, body) = match args {
                    [_, body] => (None, body),
                    [_, rel, body] => (Some(Box::new(self.formula(rel)?)), body),
                    _ => return fail(p, format!("'{h}' takes (vars) [relativizer] body")),
                };
                Ok(NumberTerm::Agg(Aggregation {
                    kind,
                    bounded,
                    vars: binder(&args[0])?,
                    relativizer: rel,
                    body: Box::new(self.term(body)?),
                }))
            }
            h if is_keyword(h) => fail(p, format!("'{h}' is a formula, not a number term")),
            h if is_integer(h) => fail(p, "a number cannot be applied"),
            h => {
                let args = args.iter().map(index).collect::<Result<Vec<_>>>()?;
                if self.rec.iter().any(|r| r == h) {
                    Ok(NumberTerm::RecVar(h.to_string(), args))
                } else {
                    Ok(NumberTerm::Apply(h.to_string(), args))
                }
            }
        }
    }
}

fn print_index(h: &IndexTerm, out: &mut String) {
    match h {
        IndexTerm::Var(v) => out.push_str(v),
        IndexTerm::App(f, args) => {
            out.push_str("(@ ");
            out.push_str(f);
            for a in args {
                out.push(' ');
                print_index(a, out);
            }
            out.push(')');
        }
    }
}

fn print_tuple(hs: &[IndexTerm], out: &mut String) {
    out.push('(');
    for (k, h) in hs.iter().enumerate() {
        if k > 0 {
            out.push(' ');
        }
        print_index(h, out);
    }
    out.push(')');
}

fn print_vars(vs: &[String], out: &mut String) {
    out.push('(');
    out.push_str(&vs.join(" "));
    out.push(')');
}

fn print_app(head: &str, args: &[IndexTerm], out: &mut String) {
    out.push('(');
    out.push_str(head);
    for a in args {
        out.push(' ');
        print_index(a, out);
    }
    out.push(')');
}

fn write_term(t: &NumberTerm, out: &mut String) {
    match t {
        NumberTerm::Const(Literal::Int(v)) => out.push_str(&v.to_string()),
        NumberTerm::Const(Literal::Text(s)) => {
            out.push('"');
            out.push_str(s);
            out.push('"');
        }
        NumberTerm::Const(Literal::Value(v)) => {
            out.push('"');
            out.push_str(&v.plain());
            out.push('"');
        }
        NumberTerm::Apply(f, args) | NumberTerm::RecVar(f, args) => print_app(f, args, out),
        NumberTerm::Add(a, b) | NumberTerm::Mul(a, b) => {
            out.push_str(if matches!(t, NumberTerm::Add(..)) { "(+ " } else { "(* " });
            write_term(a, out);
            out.push(' ');
            write_term(b, out);
            out.push(')');
        }
        NumberTerm::Sign(a) => {
            out.push_str("(sign ");
            write_term(a, out);
            out.push(')');
        }
        NumberTerm::Chi(f) => {
            out.push_str("(chi ");
            write_formula(f, out);
            out.push(')');
        }
        NumberTerm::Agg(a) => {
            out.push('(');
            if a.bounded {
                out.push('b');
            }
            out.push_str(a.kind.name());
            out.push(' ');
            print_vars(&a.vars, out);
            if let Some(r) = &a.relativizer {
                out.push(' ');
                write_formula(r, out);
            }
            out.push(' ');
            write_term(&a.body, out);
            out.push(')');
        }
    }
}

fn write_formula(f: &Formula, out: &mut String) {
    let mut pair = |op: &str, a: &dyn Fn(&mut String), b: &dyn Fn(&mut String)| {
        out.push('(');
        out.push_str(op);
        out.push(' ');
        a(out);
        out.push(' ');
        b(out);
        out.push(')');
    };
    match f {
        Formula::True => out.push_str("true"),
        Formula::False => out.push_str("false"),
        Formula::IndexEq(a, b) => pair("=", &|o| print_index(a, o), &|o| print_index(b, o)),
        Formula::NumEq(a, b) => pair("=", &|o| write_term(a, o), &|o| write_term(b, o)),
        Formula::NumLt(a, b) => pair("<", &|o| write_term(a, o), &|o| write_term(b, o)),
        Formula::TupleCmp(k, a, b) => pair(
            if *k == CmpKind::Lt { "<lex" } else { "<=lex" },
            &|o| print_tuple(a, o),
            &|o| print_tuple(b, o),
        ),
        Formula::HalfLe(a, b) => pair("half<=", &|o| print_tuple(a, o), &|o| print_tuple(b, o)),
        Formula::Implies(a, b) => pair("->", &|o| write_formula(a, o), &|o| write_formula(b, o)),
        Formula::Iff(a, b) => pair("<->", &|o| write_formula(a, o), &|o| write_formula(b, o)),
        Formula::Rel(r, args) => print_app(r, args, out),
        Formula::Not(a) => {
            out.push_str("(not ");
            write_formula(a, out);
            out.push(')');
        }
        Formula::And(fs) | Formula::Or(fs) => {
            out.push_str(if matches!(f, Formula::And(_)) { "(and" } else { "(or" });
            for g in fs {
                out.push(' ');
                write_formula(g, out);
            }
            out.push(')');
        }
        Formula::Quant(q, vs, body) => {
            out.push_str(if *q == QuantKind::Forall { "(forall " } else { "(exists " });
            match vs.as_slice() {
                [v] => out.push_str(v),
                _ => print_vars(vs, out),
            }
            out.push(' ');
            write_formula(body, out);
            out.push(')');
        }
        Formula::Gfr(def, psi) => {
            out.push_str(if def.bounded { "(bgfr " } else { "(gfr " });
            out.push_str(&def.name);
            out.push(' ');
            print_vars(&def.x, out);
            for y in &def.ys {
                out.push(' ');
                print_vars(y, out);
            }
            out.push(' ');
            print_vars(&def.rest, out);
            out.push(' ');
            write_term(&def.body, out);
            out.push(' ');
            write_formula(psi, out);
            out.push(')');
        }
    }
}

pub fn print_formula(f: &Formula) -> String {
    let mut out = String::new();
    write_formula(f, &mut out);
    out
}

pub fn print_term(t: &NumberTerm) -> String {
    let mut out = String::new();
    write_term(t, &mut out);
    out
}
