//! The line-oriented `.quadnet` text format.
//!
//! ```text
//! quadnet 1
//! vertex <id> [<x> <y>]
//! triangle <id> <id> <id>
//! arc P1 <id> <id> ...          # all four arcs required, in boundary order
//! corners <id> <id> <id> <id>   # optional, junctions P1|P2, P2|P3, P3|P4, P4|P1
//! conductance default <value>
//! conductance <id> <id> <value>
//! g <value>
//! ```
//!
//! Values are `p/q` rationals or decimals, both read exactly.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use num_traits::Zero;
use thiserror::Error;

use super::{default_corners, edge_key, validate, ArcId, Triangulation, ValidationReport, Vertex};
use crate::numeric::{format_rational, int, parse_rational, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("unsupported format version `{0}`")]
    Version(String),
    #[error("duplicate vertex `{0}`")]
    DuplicateVertex(String),
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("duplicate triangle")]
    DuplicateTriangle,
    #[error("conductance must be positive, got {0}")]
    NonPositiveConductance(String),
    #[error("g must be positive, got {0}")]
    NonPositiveG(String),
    #[error("conductance declared on `{0}`-`{1}`, which is not an edge")]
    UnknownEdge(String, String),
    #[error("arc {0} declared twice")]
    DuplicateArc(&'static str),
    #[error("missing arc declaration {0}")]
    MissingArc(&'static str),
    #[error("invalid triangulation: {}", summarize(.0))]
    Invalid(ValidationReport),
}

fn summarize(report: &ValidationReport) -> String {
    report.violations.iter().map(|v| format!("{} ({})", v.message, v.invariant)).collect::<Vec<_>>().join("; ")
}

/// Parse failure; `line` and `column` are 1-based, zero when not tied to a
/// location.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{column}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
}

impl ParseError {
    fn at(token: &Token<'_>, kind: ParseErrorKind) -> Self {
        ParseError { line: token.line, column: token.column, kind }
    }

    fn global(kind: ParseErrorKind) -> Self {
        ParseError { line: 0, column: 0, kind }
    }
}

#[derive(Debug, Clone, Copy)]
struct Token<'a> {
    text: &'a str,
    line: usize,
    column: usize,
}

fn tokenize(line: &str, line_no: usize) -> Vec<Token<'_>> {
    let content = line.split('#').next().unwrap_or("");
    let mut tokens = Vec::new();
    let mut start = None;
    for (i, ch) in content.char_indices().chain(std::iter::once((content.len(), ' '))) {
        match (ch.is_whitespace(), start) {
            (true, Some(s)) => {
                tokens.push(Token { text: &content[s..i], line: line_no, column: content[..s].chars().count() + 1 });
                start = None;
            }
            (false, None) => start = Some(i),
            _ => {}
        }
    }
    tokens
}

fn number(token: &Token<'_>) -> Result<Rational, ParseError> {
    parse_rational(token.text).map_err(|e| ParseError::at(token, ParseErrorKind::Syntax(e.to_string())))
}

fn coordinate(token: &Token<'_>) -> Result<f64, ParseError> {
    token
        .text
        .parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| ParseError::at(token, ParseErrorKind::Syntax(format!("bad coordinate `{}`", token.text))))
}

fn arity(tokens: &[Token<'_>], allowed: &[usize], usage: &str) -> Result<(), ParseError> {
    if allowed.contains(&tokens.len()) {
        Ok(())
    } else {
        Err(ParseError::at(&tokens[0], ParseErrorKind::Syntax(format!("expected `{usage}`"))))
    }
}

/// Parses a `.quadnet` document and validates the result; any structural
/// violation is returned as [`ParseErrorKind::Invalid`].
pub fn parse_quadnet(text: &str) -> Result<Triangulation, ParseError> {
    let t = parse_quadnet_unchecked(text)?;
    let report = validate(&t);
    if report.ok {
        Ok(t)
    } else {
        Err(ParseError::global(ParseErrorKind::Invalid(report)))
    }
}

/// Parses a `.quadnet` document without the structural checks of
/// [`validate`]; lexical and referential errors are still reported.
pub fn parse_quadnet_unchecked(text: &str) -> Result<Triangulation, ParseError> {
    let lines: Vec<Vec<Token<'_>>> =
        text.lines().enumerate().map(|(i, l)| tokenize(l, i + 1)).filter(|t| !t.is_empty()).collect();

    let header = lines.first().ok_or_else(|| ParseError::global(ParseErrorKind::Syntax("empty document".into())))?;
    if header[0].text != "quadnet" || header.len() != 2 {
        return Err(ParseError::at(&header[0], ParseErrorKind::Syntax("document must start with `quadnet 1`".into())));
    }
    if header[1].text != "1" {
        return Err(ParseError::at(&header[1], ParseErrorKind::Version(header[1].text.into())));
    }

    // Vertices first so that references may appear in any order.
    let mut vertices = Vec::new();
    let mut index: HashMap<&str, usize> = HashMap::new();
    for tokens in &lines[1..] {
        if tokens[0].text != "vertex" {
            continue;
        }
        arity(tokens, &[2, 4], "vertex <id> [<x> <y>]")?;
        let id = tokens[1].text;
        if index.insert(id, vertices.len()).is_some() {
            return Err(ParseError::at(&tokens[1], ParseErrorKind::DuplicateVertex(id.into())));
        }
        let position = if tokens.len() == 4 { Some([coordinate(&tokens[2])?, coordinate(&tokens[3])?]) } else { None };
        vertices.push(Vertex { id: id.to_string(), position });
    }
    let resolve = |token: &Token<'_>| {
        index
            .get(token.text)
            .copied()
            .ok_or_else(|| ParseError::at(token, ParseErrorKind::UnknownVertex(token.text.into())))
    };

    let mut triangles = Vec::new();
    let mut seen_triangles = BTreeSet::new();
    let mut arcs: [Option<Vec<usize>>; 4] = Default::default();
    let mut corners = None;
    let mut default_conductance = int(1);
    let mut overrides: Vec<(Token<'_>, Token<'_>, usize, usize, Rational)> = Vec::new();
    let mut g = int(1);

    for tokens in &lines[1..] {
        let head = &tokens[0];
        match head.text {
            "vertex" => {}
            "triangle" => {
                arity(tokens, &[4], "triangle <id> <id> <id>")?;
                let tri = [resolve(&tokens[1])?, resolve(&tokens[2])?, resolve(&tokens[3])?];
                let mut key = tri;
                key.sort_unstable();
                if !seen_triangles.insert(key) {
                    return Err(ParseError::at(head, ParseErrorKind::DuplicateTriangle));
                }
                triangles.push(tri);
            }
            "arc" => {
                if tokens.len() < 2 {
                    return Err(ParseError::at(head, ParseErrorKind::Syntax("expected `arc P<i> <id>...`".into())));
                }
                let arc = ArcId::from_name(tokens[1].text).ok_or_else(|| {
                    ParseError::at(
                        &tokens[1],
                        ParseErrorKind::Syntax(format!("unknown arc `{}` (expected P1..P4)", tokens[1].text)),
                    )
                })?;
                let members = tokens[2..].iter().map(resolve).collect::<Result<Vec<_>, _>>()?;
                if arcs[arc.index()].replace(members).is_some() {
                    return Err(ParseError::at(&tokens[1], ParseErrorKind::DuplicateArc(arc.name())));
                }
            }
            "corners" => {
                arity(tokens, &[5], "corners <id> <id> <id> <id>")?;
                corners =
                    Some([resolve(&tokens[1])?, resolve(&tokens[2])?, resolve(&tokens[3])?, resolve(&tokens[4])?]);
            }
            "conductance" => {
                if tokens.len() == 3 && tokens[1].text == "default" {
                    let value = number(&tokens[2])?;
                    if value <= Rational::zero() {
                        return Err(ParseError::at(
                            &tokens[2],
                            ParseErrorKind::NonPositiveConductance(tokens[2].text.into()),
                        ));
                    }
                    default_conductance = value;
                } else {
                    arity(tokens, &[4], "conductance <id> <id> <value> | conductance default <value>")?;
                    let (a, b) = (resolve(&tokens[1])?, resolve(&tokens[2])?);
                    let value = number(&tokens[3])?;
                    if value <= Rational::zero() {
                        return Err(ParseError::at(
                            &tokens[3],
                            ParseErrorKind::NonPositiveConductance(tokens[3].text.into()),
                        ));
                    }
                    overrides.push((tokens[1], tokens[2], a, b, value));
                }
            }
            "g" => {
                arity(tokens, &[2], "g <value>")?;
                let value = number(&tokens[1])?;
                if value <= Rational::zero() {
                    return Err(ParseError::at(&tokens[1], ParseErrorKind::NonPositiveG(tokens[1].text.into())));
                }
                g = value;
            }
            "quadnet" => {
                return Err(ParseError::at(head, ParseErrorKind::Syntax("repeated header".into())));
            }
            other => {
                return Err(ParseError::at(head, ParseErrorKind::Syntax(format!("unknown directive `{other}`"))));
            }
        }
    }

    let mut arc_lists: [Vec<usize>; 4] = Default::default();
    for arc in ArcId::ALL {
        arc_lists[arc.index()] =
            arcs[arc.index()].take().ok_or_else(|| ParseError::global(ParseErrorKind::MissingArc(arc.name())))?;
    }

    let mut t = Triangulation::new(vertices, triangles, arc_lists)
        .map_err(|e| ParseError::global(ParseErrorKind::Syntax(e.to_string())))?;
    t.corners = corners.unwrap_or_else(|| default_corners(&t.arcs));
    t.default_conductance = default_conductance;
    t.g = g;
    let edges = t.edges();
    let mut declared = BTreeMap::new();
    for (ta, tb, a, b, value) in overrides {
        if !edges.contains(&edge_key(a, b)) {
            return Err(ParseError::at(&ta, ParseErrorKind::UnknownEdge(ta.text.into(), tb.text.into())));
        }
        declared.insert(edge_key(a, b), value);
    }
    t.conductance_overrides = declared;
    Ok(t)
}

/// Serializes a triangulation; `parse_quadnet(&to_quadnet(t))` reproduces `t`.
pub fn to_quadnet(t: &Triangulation) -> String {
    let mut out = String::from("quadnet 1\n");
    for v in t.vertices() {
        match v.position {
            Some([x, y]) => writeln!(out, "vertex {} {x:?} {y:?}", v.id),
            None => writeln!(out, "vertex {}", v.id),
        }
        .unwrap();
    }
    for tri in &t.triangles {
        writeln!(out, "triangle {} {} {}", t.id(tri[0]), t.id(tri[1]), t.id(tri[2])).unwrap();
    }
    for arc in ArcId::ALL {
        let ids: Vec<&str> = t.arc(arc).iter().map(|&v| t.id(v)).collect();
        writeln!(out, "arc {arc} {}", ids.join(" ")).unwrap();
    }
    let corner_ids: Vec<&str> = t.corners.iter().map(|&v| t.id(v)).collect();
    writeln!(out, "corners {}", corner_ids.join(" ")).unwrap();
    writeln!(out, "conductance default {}", format_rational(&t.default_conductance)).unwrap();
    for (&(a, b), value) in &t.conductance_overrides {
        writeln!(out, "conductance {} {} {}", t.id(a), t.id(b), format_rational(value)).unwrap();
    }
    writeln!(out, "g {}", format_rational(&t.g)).unwrap();
    out
}
