//! Circuit text formats and DOT rendering.
//!
//! Series-parallel circuits are s-expressions:
//!
//! ```text
//! expr     := fraction | "(" "s" expr expr+ ")" | "(" "p" expr expr+ ")"
//! fraction := int "/" int
//! ```
//!
//! General circuits are line oriented: a `terminals A B` line followed by
//! one `u v a/b` line per pswitch. In both formats `#` starts a comment
//! that runs to the end of the line.

use std::fmt::Write;

use crate::circuit::{SpCircuit, View};
use crate::general::GeneralCircuit;
use crate::rational::parse_fraction;
use crate::{Error, Result};

/// Either kind of circuit file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Circuit {
    Sp(SpCircuit),
    General(GeneralCircuit),
}

impl Circuit {
    pub fn size(&self) -> usize {
        match self {
            Circuit::Sp(c) => c.size(),
            Circuit::General(g) => g.edge_count(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok<'a> {
    Open,
    Close,
    Atom(&'a str),
}

#[derive(Clone, Debug)]
struct Spanned<'a> {
    tok: Tok<'a>,
    line: usize,
    column: usize,
}

fn syntax(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Syntax {
        line,
        column,
        message: message.into(),
    }
}

fn tokenize(text: &str) -> Vec<Spanned<'_>> {
    let mut out = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("");
        let mut chars = line.char_indices().peekable();
        while let Some((start, c)) = chars.next() {
            let column = line[..start].chars().count() + 1;
            let tok = match c {
                '(' => Tok::Open,
                ')' => Tok::Close,
                c if c.is_whitespace() => continue,
                _ => {
                    let mut end = line.len();
                    while let Some(&(i, c)) = chars.peek() {
                        if c.is_whitespace() || c == '(' || c == ')' {
                            end = i;
                            break;
                        }
                        chars.next();
                    }
                    Tok::Atom(&line[start..end])
                }
            };
            out.push(Spanned {
                tok,
                line: lineno + 1,
                column,
            });
        }
    }
    out
}

struct Parser<'a> {
    toks: Vec<Spanned<'a>>,
    pos: usize,
    end: (usize, usize),
}

impl<'a> Parser<'a> {
    fn next(&mut self) -> Result<Spanned<'a>> {
        let t = self
            .toks
            .get(self.pos)
            .cloned()
            .ok_or_else(|| syntax(self.end.0, self.end.1, "unexpected end of input"))?;
        self.pos += 1;
        Ok(t)
    }

    fn peek(&self) -> Option<&Spanned<'a>> {
        self.toks.get(self.pos)
    }

    fn expr(&mut self) -> Result<SpCircuit> {
        let t = self.next()?;
        match t.tok {
            Tok::Atom(text) => {
                let p =
                    parse_fraction(text).map_err(|e| syntax(t.line, t.column, e.to_string()))?;
                SpCircuit::leaf(p).map_err(|e| syntax(t.line, t.column, e.to_string()))
            }
            Tok::Close => Err(syntax(t.line, t.column, "unexpected ')'")),
            Tok::Open => {
                let head = self.next()?;
                let orientation = match head.tok {
                    Tok::Atom("s") => crate::Orientation::Series,
                    Tok::Atom("p") => crate::Orientation::Parallel,
                    _ => {
                        return Err(syntax(head.line, head.column, "expected 's' or 'p'"));
                    }
                };
                let mut children = Vec::new();
                loop {
                    match self.peek() {
                        Some(Spanned {
                            tok: Tok::Close, ..
                        }) => {
                            self.pos += 1;
                            break;
                        }
                        Some(_) => children.push(self.expr()?),
                        None => {
                            return Err(syntax(self.end.0, self.end.1, "missing ')'"));
                        }
                    }
                }
                SpCircuit::compose(orientation, children)
                    .map_err(|e| syntax(t.line, t.column, e.to_string()))
            }
        }
    }
}

fn end_position(text: &str) -> (usize, usize) {
    let lines = text.lines().count().max(1);
    let last = text.lines().last().unwrap_or("");
    (lines, last.chars().count() + 1)
}

/// Parses a series-parallel expression.
pub fn parse_sp(text: &str) -> Result<SpCircuit> {
    let mut parser = Parser {
        toks: tokenize(text),
        pos: 0,
        end: end_position(text),
    };
    let circuit = parser.expr()?;
    if let Some(extra) = parser.peek() {
        return Err(syntax(
            extra.line,
            extra.column,
            "trailing input after circuit",
        ));
    }
    Ok(circuit)
}

/// Parses the line-oriented general circuit format.
pub fn parse_general(text: &str) -> Result<GeneralCircuit> {
    let mut circuit: Option<GeneralCircuit> = None;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("");
        let fields: Vec<(usize, &str)> = line
            .split_whitespace()
            .map(|f| (column_of(line, f), f))
            .collect();
        if fields.is_empty() {
            continue;
        }
        let at = |i: usize| syntax(lineno + 1, fields[i.min(fields.len() - 1)].0, "");
        let err = |i: usize, msg: &str| match at(i) {
            Error::Syntax { line, column, .. } => syntax(line, column, msg),
            e => e,
        };
        match &mut circuit {
            None => {
                if fields.len() != 3 || fields[0].1 != "terminals" {
                    return Err(err(0, "expected 'terminals A B'"));
                }
                circuit = Some(
                    GeneralCircuit::new(fields[1].1, fields[2].1)
                        .map_err(|e| err(1, &e.to_string()))?,
                );
            }
            Some(g) => {
                if fields.len() != 3 {
                    return Err(err(0, "expected 'u v a/b'"));
                }
                let p = parse_fraction(fields[2].1).map_err(|e| err(2, &e.to_string()))?;
                g.add_edge(fields[0].1, fields[1].1, p)
                    .map_err(|e| err(2, &e.to_string()))?;
            }
        }
    }
    circuit.ok_or_else(|| {
        let (line, column) = end_position(text);
        syntax(line, column, "missing 'terminals' line")
    })
}

fn column_of(line: &str, field: &str) -> usize {
    let offset = field.as_ptr() as usize - line.as_ptr() as usize;
    line[..offset].chars().count() + 1
}

/// Parses either format; a file whose first token is `terminals` is a
/// general circuit.
pub fn parse_circuit(text: &str) -> Result<Circuit> {
    let first = tokenize(text).into_iter().next();
    match first {
        Some(Spanned {
            tok: Tok::Atom("terminals"),
            ..
        }) => parse_general(text).map(Circuit::General),
        _ => parse_sp(text).map(Circuit::Sp),
    }
}

/// Canonical single-line expression followed by a newline.
pub fn emit_sp(c: &SpCircuit) -> String {
    format!("{c}\n")
}

pub fn emit_general(g: &GeneralCircuit) -> String {
    let (s, t) = g.terminals();
    let mut out = format!("terminals {s} {t}\n");
    for e in g.edges() {
        let _ = writeln!(
            out,
            "{} {} {}/{}",
            g.node_name(e.u),
            g.node_name(e.v),
            e.prob.numer(),
            e.prob.denom()
        );
    }
    out
}

pub fn emit(c: &Circuit) -> String {
    match c {
        Circuit::Sp(c) => emit_sp(c),
        Circuit::General(g) => emit_general(g),
    }
}

/// DOT digraph of the expression tree; leaves carry their exact fraction.
pub fn sp_to_dot(c: &SpCircuit) -> String {
    let mut out = String::from("digraph circuit {\n  node [shape=box];\n");
    let mut next = 0usize;
    dot_node(c, &mut out, &mut next);
    out.push_str("}\n");
    out
}

fn dot_node(c: &SpCircuit, out: &mut String, next: &mut usize) -> usize {
    let id = *next;
    *next += 1;
    let (label, children) = match c.view() {
        View::Leaf(p) => {
            let _ = writeln!(out, "  n{id} [label=\"{p}\", shape=ellipse];");
            return id;
        }
        View::Series(ch) => ("series", ch),
        View::Parallel(ch) => ("parallel", ch),
    };
    let _ = writeln!(out, "  n{id} [label=\"{label}\"];");
    for child in children {
        let cid = dot_node(child, out, next);
        let _ = writeln!(out, "  n{id} -> n{cid};");
    }
    id
}

/// DOT graph of a general circuit; edges are labelled with their
/// probabilities and terminals drawn as double circles.
pub fn general_to_dot(g: &GeneralCircuit) -> String {
    let (s, t) = g.terminals();
    let mut out = String::from("graph circuit {\n");
    let _ = writeln!(out, "  \"{s}\" [shape=doublecircle];");
    if s != t {
        let _ = writeln!(out, "  \"{t}\" [shape=doublecircle];");
    }
    for e in g.edges() {
        let _ = writeln!(
            out,
            "  \"{}\" -- \"{}\" [label=\"{}\"];",
            g.node_name(e.u),
            g.node_name(e.v),
            e.prob
        );
    }
    out.push_str("}\n");
    out
}
