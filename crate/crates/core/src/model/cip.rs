//! Line-based `cip` text format.
//!
//! ```text
//! MAXIMIZE
//!   obj: y + z
//! SUBJECT TO
//!   c1: -2 w + 2 x + 3 y + 3 z <= 4
//!   r2: 1 <= x + y <= 5
//!   IND z -> x <= 0
//!   ACT x >= 4
//!   SIG t = x^1.5 * y^-0.5
//! BOUNDS
//!   w free
//!   -1 <= x <= 1
//! GENERAL
//!   n
//! BINARY
//!   y z
//! END
//! ```
//!
//! Section headers start in column 0 and consist of upper-case words only.
//! Variables are numbered in order of first appearance. `#` starts a comment.

use std::collections::HashMap;
use std::fmt::Write as _;

use super::{IndicatorCons, LinRow, ParseError, Problem, Sense};
use crate::signomial::{SignomialRelation, SignomialTerm};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Caret,
    Colon,
    Le,
    Ge,
    Eq,
    Arrow,
}

fn tokenize(line: &str, lineno: usize) -> Result<Vec<Tok>, ParseError> {
    let b = line.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < b.len() {
        let c = b[i] as char;
        match c {
            ' ' | '\t' | '\r' => i += 1,
            '+' => {
                out.push(Tok::Plus);
                i += 1
            }
            '-' if b.get(i + 1) == Some(&b'>') => {
                out.push(Tok::Arrow);
                i += 2
            }
            '-' => {
                out.push(Tok::Minus);
                i += 1
            }
            '*' => {
                out.push(Tok::Star);
                i += 1
            }
            '^' => {
                out.push(Tok::Caret);
                i += 1
            }
            ':' => {
                out.push(Tok::Colon);
                i += 1
            }
            '<' | '>' | '=' => {
                let two = b.get(i + 1) == Some(&b'=');
                out.push(match c {
                    '<' => Tok::Le,
                    '>' => Tok::Ge,
                    _ => Tok::Eq,
                });
                i += if two { 2 } else { 1 };
            }
            '0'..='9' | '.' => {
                let start = i;
                while i < b.len() && (b[i].is_ascii_digit() || b[i] == b'.') {
                    i += 1;
                }
                // exponent only if followed by digits
                if i < b.len() && (b[i] == b'e' || b[i] == b'E') {
                    let mut k = i + 1;
                    if k < b.len() && (b[k] == b'+' || b[k] == b'-') {
                        k += 1;
                    }
                    if k < b.len() && b[k].is_ascii_digit() {
                        while k < b.len() && b[k].is_ascii_digit() {
                            k += 1;
                        }
                        i = k;
                    }
                }
                let text = &line[start..i];
                let v: f64 = text
                    .parse()
                    .map_err(|_| ParseError::syntax(lineno, format!("bad number `{text}`")))?;
                out.push(Tok::Num(v));
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < b.len()
                    && (b[i].is_ascii_alphanumeric() || matches!(b[i], b'_' | b'.' | b'[' | b']' | b'#'))
                {
                    i += 1;
                }
                let word = &line[start..i];
                match word.to_ascii_lowercase().as_str() {
                    "inf" | "infinity" => out.push(Tok::Num(f64::INFINITY)),
                    _ => out.push(Tok::Ident(word.to_string())),
                }
            }
            _ => {
                return Err(ParseError::syntax(
                    lineno,
                    format!("unexpected character `{c}`"),
                ))
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Section {
    Preamble,
    Objective,
    Constraints,
    Bounds,
    General,
    Binary,
    End,
}

fn section_header(line: &str) -> Option<Result<Section, String>> {
    if line.starts_with(char::is_whitespace) {
        return None;
    }
    let t = line.trim();
    if t.is_empty() || !t.chars().all(|c| c.is_ascii_uppercase() || c == ' ' || c == '.') {
        return None;
    }
    let normalized = t.split_whitespace().collect::<Vec<_>>().join(" ");
    Some(match normalized.as_str() {
        "MINIMIZE" | "MINIMISE" | "MIN" => Ok(Section::Objective),
        "MAXIMIZE" | "MAXIMISE" | "MAX" => Ok(Section::Objective),
        "SUBJECT TO" | "ST" | "S.T." | "SUCH THAT" => Ok(Section::Constraints),
        "BOUNDS" => Ok(Section::Bounds),
        "GENERAL" | "GENERALS" | "INTEGER" | "INTEGERS" => Ok(Section::General),
        "BINARY" | "BINARIES" => Ok(Section::Binary),
        "END" => Ok(Section::End),
        _ => Err(normalized),
    })
}

struct Builder {
    names: Vec<String>,
    index: HashMap<String, usize>,
    objective: HashMap<usize, f64>,
    obj_offset: f64,
    maximize: bool,
    rows: Vec<(String, Vec<(usize, f64)>, f64, f64)>,
    lower: HashMap<usize, f64>,
    upper: HashMap<usize, f64>,
    integer: Vec<usize>,
    binary: Vec<usize>,
    indicators: Vec<(usize, usize, usize)>,
    activations: HashMap<usize, (f64, usize)>,
    signomials: Vec<(usize, Vec<(usize, f64)>, SignomialRelation)>,
}

impl Builder {
    fn var(&mut self, name: &str) -> usize {
        if let Some(&j) = self.index.get(name) {
            return j;
        }
        let j = self.names.len();
        self.names.push(name.to_string());
        self.index.insert(name.to_string(), j);
        j
    }
}

/// Parses a linear expression; returns terms and the constant part.
fn parse_expr(
    toks: &[Tok],
    b: &mut Builder,
    lineno: usize,
) -> Result<(Vec<(usize, f64)>, f64), ParseError> {
    let mut terms = Vec::new();
    let mut constant = 0.0;
    let mut i = 0;
    let mut first = true;
    while i < toks.len() {
        let mut sign = 1.0;
        let mut saw_sign = false;
        while let Some(t @ (Tok::Plus | Tok::Minus)) = toks.get(i) {
            if *t == Tok::Minus {
                sign = -sign;
            }
            saw_sign = true;
            i += 1;
        }
        if !first && !saw_sign {
            return Err(ParseError::syntax(lineno, "expected `+` or `-` between terms"));
        }
        first = false;
        let mut coef = sign;
        let mut has_num = false;
        if let Some(Tok::Num(v)) = toks.get(i) {
            coef *= v;
            has_num = true;
            i += 1;
            if toks.get(i) == Some(&Tok::Star) {
                i += 1;
            }
        }
        match toks.get(i) {
            Some(Tok::Ident(name)) => {
                let j = b.var(name);
                terms.push((j, coef));
                i += 1;
            }
            _ if has_num => constant += coef,
            _ => return Err(ParseError::syntax(lineno, "expected a term")),
        }
    }
    Ok((terms, constant))
}

fn split_name(toks: &[Tok]) -> (Option<String>, &[Tok]) {
    match toks {
        [Tok::Ident(n), Tok::Colon, rest @ ..] => (Some(n.clone()), rest),
        _ => (None, toks),
    }
}

fn find_rel(toks: &[Tok]) -> Vec<usize> {
    toks.iter()
        .enumerate()
        .filter(|(_, t)| matches!(t, Tok::Le | Tok::Ge | Tok::Eq))
        .map(|(i, _)| i)
        .collect()
}

fn single_number(toks: &[Tok], lineno: usize) -> Result<f64, ParseError> {
    match toks {
        [Tok::Num(v)] => Ok(*v),
        [Tok::Minus, Tok::Num(v)] => Ok(-*v),
        [Tok::Plus, Tok::Num(v)] => Ok(*v),
        _ => Err(ParseError::syntax(lineno, "expected a number")),
    }
}

fn single_ident(toks: &[Tok], lineno: usize) -> Result<String, ParseError> {
    match toks {
        [Tok::Ident(n)] => Ok(n.clone()),
        _ => Err(ParseError::syntax(lineno, "expected a variable name")),
    }
}

fn parse_constraint(toks: &[Tok], b: &mut Builder, lineno: usize) -> Result<(), ParseError> {
    if let Some(Tok::Ident(kw)) = toks.first() {
        match kw.as_str() {
            "IND" => return parse_indicator(&toks[1..], b, lineno),
            "ACT" => return parse_activation(&toks[1..], b, lineno),
            "SIG" => return parse_signomial(&toks[1..], b, lineno),
            _ => {}
        }
    }
    let (name, body) = split_name(toks);
    let name = name.unwrap_or_else(|| format!("r{}", b.rows.len()));
    let rels = find_rel(body);
    let (terms, lhs, rhs) = match rels.as_slice() {
        [k] => {
            let (terms, constant) = parse_expr(&body[..*k], b, lineno)?;
            let v = single_number(&body[k + 1..], lineno)? - constant;
            match body[*k] {
                Tok::Le => (terms, f64::NEG_INFINITY, v),
                Tok::Ge => (terms, v, f64::INFINITY),
                _ => (terms, v, v),
            }
        }
        [k1, k2] if body[*k1] == Tok::Le && body[*k2] == Tok::Le => {
            let lo = single_number(&body[..*k1], lineno)?;
            let hi = single_number(&body[k2 + 1..], lineno)?;
            let (terms, constant) = parse_expr(&body[k1 + 1..*k2], b, lineno)?;
            (terms, lo - constant, hi - constant)
        }
        _ => return Err(ParseError::syntax(lineno, "expected one relation or `L <= expr <= U`")),
    };
    b.rows.push((name, terms, lhs, rhs));
    Ok(())
}

fn parse_indicator(toks: &[Tok], b: &mut Builder, lineno: usize) -> Result<(), ParseError> {
    match toks {
        [Tok::Ident(z), Tok::Arrow, Tok::Ident(x), Tok::Le, Tok::Num(v)] if *v == 0.0 => {
            let (z, x) = (b.var(z), b.var(x));
            b.indicators.push((z, x, lineno));
            Ok(())
        }
        _ => Err(ParseError::syntax(lineno, "expected `IND z -> x <= 0`")),
    }
}

fn parse_activation(toks: &[Tok], b: &mut Builder, lineno: usize) -> Result<(), ParseError> {
    match toks {
        [Tok::Ident(x), Tok::Ge, Tok::Num(v)] => {
            let x = b.var(x);
            b.activations.insert(x, (*v, lineno));
            Ok(())
        }
        _ => Err(ParseError::syntax(lineno, "expected `ACT x >= L`")),
    }
}

fn parse_signomial(toks: &[Tok], b: &mut Builder, lineno: usize) -> Result<(), ParseError> {
    let (t, rel, rest) = match toks {
        [Tok::Ident(t), rel @ (Tok::Eq | Tok::Le | Tok::Ge), rest @ ..] => (t.clone(), rel, rest),
        _ => return Err(ParseError::syntax(lineno, "expected `SIG t = x^a * ...`")),
    };
    // `t >= x^α` means the term is at most t.
    let relation = match rel {
        Tok::Eq => SignomialRelation::Equal,
        Tok::Ge => SignomialRelation::TermAtMost,
        _ => SignomialRelation::TermAtLeast,
    };
    let aux = b.var(&t);
    let mut factors = Vec::new();
    for factor in rest.split(|t| *t == Tok::Star) {
        let (name, exp) = match factor {
            [Tok::Ident(n)] => (n, 1.0),
            [Tok::Ident(n), Tok::Caret, exp @ ..] => (n, single_number(exp, lineno)?),
            _ => return Err(ParseError::syntax(lineno, "expected `var^exponent`")),
        };
        factors.push((b.var(name), exp));
    }
    if factors.is_empty() {
        return Err(ParseError::syntax(lineno, "empty signomial"));
    }
    b.signomials.push((aux, factors, relation));
    Ok(())
}

fn parse_bound(toks: &[Tok], b: &mut Builder, lineno: usize) -> Result<(), ParseError> {
    if let [Tok::Ident(v), Tok::Ident(kw)] = toks {
        if kw.eq_ignore_ascii_case("free") {
            let j = b.var(v);
            b.lower.insert(j, f64::NEG_INFINITY);
            b.upper.insert(j, f64::INFINITY);
            return Ok(());
        }
    }
    let rels = find_rel(toks);
    match rels.as_slice() {
        [k1, k2] if toks[*k1] == Tok::Le && toks[*k2] == Tok::Le => {
            let lo = single_number(&toks[..*k1], lineno)?;
            let name = single_ident(&toks[k1 + 1..*k2], lineno)?;
            let hi = single_number(&toks[k2 + 1..], lineno)?;
            let j = b.var(&name);
            b.lower.insert(j, lo);
            b.upper.insert(j, hi);
        }
        [k] => {
            let name = single_ident(&toks[..*k], lineno)?;
            let v = single_number(&toks[k + 1..], lineno)?;
            let j = b.var(&name);
            match toks[*k] {
                Tok::Le => {
                    b.upper.insert(j, v);
                }
                Tok::Ge => {
                    b.lower.insert(j, v);
                }
                _ => {
                    b.lower.insert(j, v);
                    b.upper.insert(j, v);
                }
            }
        }
        _ => return Err(ParseError::syntax(lineno, "malformed bound")),
    }
    Ok(())
}

/// Parses a problem in `cip` text format.
pub fn parse_cip(text: &str) -> Result<Problem, ParseError> {
    let mut b = Builder {
        names: Vec::new(),
        index: HashMap::new(),
        objective: HashMap::new(),
        obj_offset: 0.0,
        maximize: false,
        rows: Vec::new(),
        lower: HashMap::new(),
        upper: HashMap::new(),
        integer: Vec::new(),
        binary: Vec::new(),
        indicators: Vec::new(),
        activations: HashMap::new(),
        signomials: Vec::new(),
    };
    let mut section = Section::Preamble;
    let mut saw_objective = false;

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.split('#').next().unwrap_or("");
        if line.trim().is_empty() {
            continue;
        }
        if let Some(header) = section_header(line) {
            section = header.map_err(|name| ParseError::UnknownSection { line: lineno, name })?;
            if section == Section::Objective {
                if saw_objective {
                    return Err(ParseError::syntax(lineno, "duplicate objective section"));
                }
                saw_objective = true;
                b.maximize = line.trim().starts_with("MAX");
            }
            continue;
        }
        let toks = tokenize(line, lineno)?;
        match section {
            Section::Preamble => {
                return Err(ParseError::syntax(lineno, "expected MINIMIZE or MAXIMIZE"))
            }
            Section::Objective => {
                let (_, body) = split_name(&toks);
                let (terms, constant) = parse_expr(body, &mut b, lineno)?;
                for (j, c) in terms {
                    *b.objective.entry(j).or_insert(0.0) += c;
                }
                b.obj_offset += constant;
            }
            Section::Constraints => parse_constraint(&toks, &mut b, lineno)?,
            Section::Bounds => parse_bound(&toks, &mut b, lineno)?,
            Section::General | Section::Binary => {
                for t in &toks {
                    let Tok::Ident(name) = t else {
                        return Err(ParseError::syntax(lineno, "expected variable names"));
                    };
                    let j = b.var(name);
                    if section == Section::General {
                        b.integer.push(j);
                    } else {
                        b.binary.push(j);
                    }
                }
            }
            Section::End => return Err(ParseError::syntax(lineno, "content after END")),
        }
    }
    if !saw_objective {
        return Err(ParseError::syntax(1, "missing objective section"));
    }
    finish(b)
}

fn finish(b: Builder) -> Result<Problem, ParseError> {
    let n = b.names.len();
    let mut p = Problem::new(n);
    p.var_names = b.names;
    for (&j, &c) in &b.objective {
        p.objective[j] = c;
    }
    p.obj_offset = b.obj_offset;
    if b.maximize {
        let ext = std::mem::take(&mut p.objective);
        p.set_maximize(ext);
        p.obj_offset = -p.obj_offset;
    }
    for (&j, &v) in &b.lower {
        p.lower[j] = super::normalize_infinity(v);
    }
    for (&j, &v) in &b.upper {
        p.upper[j] = super::normalize_infinity(v);
    }
    for &j in &b.integer {
        p.integer[j] = true;
    }
    for &j in &b.binary {
        p.integer[j] = true;
        p.lower[j] = p.lower[j].max(0.0);
        p.upper[j] = p.upper[j].min(1.0);
    }
    for (name, terms, lhs, rhs) in b.rows {
        p.row_names.push(name);
        p.rows.push(LinRow::new(terms, lhs, rhs));
    }
    for (z, x, lineno) in b.indicators {
        let is_binary = p.integer[z] && p.lower[z] >= 0.0 && p.upper[z] <= 1.0;
        if !is_binary {
            return Err(ParseError::NonBinaryIndicator {
                binvar: p.var_names[z].clone(),
                var: p.var_names[x].clone(),
            });
        }
        let Some(&(activation, _)) = b.activations.get(&x) else {
            return Err(ParseError::syntax(
                lineno,
                format!("indicator on `{}` lacks an ACT line", p.var_names[x]),
            ));
        };
        p.indicators.push(IndicatorCons {
            binvar: z,
            var: x,
            activation,
        });
    }
    for (aux, factors, relation) in b.signomials {
        let (vars, exponents): (Vec<_>, Vec<_>) = factors.into_iter().unzip();
        let term = SignomialTerm::from_problem_bounds(&p, vars, exponents, aux, relation);
        p.signomials.push(term);
    }
    p.validate()?;
    Ok(p)
}

fn fmt_num(v: f64) -> String {
    if v == f64::INFINITY {
        "inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{v:?}")
    }
}

fn fmt_terms(p: &Problem, terms: &[(usize, f64)]) -> String {
    let mut s = String::new();
    for (k, &(j, c)) in terms.iter().enumerate() {
        let sign = if c < 0.0 || (c == 0.0 && c.is_sign_negative()) { "-" } else { "+" };
        if k == 0 {
            if sign == "-" {
                s.push_str("- ");
            }
        } else {
            let _ = write!(s, " {sign} ");
        }
        let _ = write!(s, "{} {}", fmt_num(c.abs()), p.var_names[j]);
    }
    if s.is_empty() {
        s.push('0');
    }
    s
}

/// Prints a problem in `cip` format. The objective lists every variable (zero
/// coefficients included) so that variable order survives a round trip.
pub fn write_cip(p: &Problem) -> String {
    let mut out = String::new();
    let external: Vec<(usize, f64)> = p
        .objective
        .iter()
        .enumerate()
        .map(|(j, &c)| (j, if p.sense == Sense::Maximize { -c } else { c }))
        .collect();
    let offset = if p.sense == Sense::Maximize { -p.obj_offset } else { p.obj_offset };
    out.push_str(match p.sense {
        Sense::Minimize => "MINIMIZE\n",
        Sense::Maximize => "MAXIMIZE\n",
    });
    let _ = write!(out, "  obj: {}", fmt_terms(p, &external));
    if offset != 0.0 {
        let _ = write!(out, " {} {}", if offset < 0.0 { "-" } else { "+" }, fmt_num(offset.abs()));
    }
    out.push_str("\nSUBJECT TO\n");
    for (i, row) in p.rows.iter().enumerate() {
        let name = p.row_names.get(i).cloned().unwrap_or_else(|| format!("r{i}"));
        let expr = fmt_terms(p, &row.coeffs);
        let _ = if row.lhs == row.rhs {
            writeln!(out, "  {name}: {expr} = {}", fmt_num(row.rhs))
        } else if row.lhs == f64::NEG_INFINITY {
            writeln!(out, "  {name}: {expr} <= {}", fmt_num(row.rhs))
        } else if row.rhs == f64::INFINITY {
            writeln!(out, "  {name}: {expr} >= {}", fmt_num(row.lhs))
        } else {
            writeln!(
                out,
                "  {name}: {} <= {expr} <= {}",
                fmt_num(row.lhs),
                fmt_num(row.rhs)
            )
        };
    }
    for ind in &p.indicators {
        let _ = writeln!(
            out,
            "  IND {} -> {} <= 0\n  ACT {} >= {}",
            p.var_names[ind.binvar],
            p.var_names[ind.var],
            p.var_names[ind.var],
            fmt_num(ind.activation)
        );
    }
    for term in &p.signomials {
        let rel = match term.relation {
            SignomialRelation::Equal => "=",
            SignomialRelation::TermAtMost => ">=",
            SignomialRelation::TermAtLeast => "<=",
        };
        let factors: Vec<String> = term
            .vars
            .iter()
            .zip(&term.exponents)
            .map(|(&j, &a)| format!("{}^{}", p.var_names[j], fmt_num(a)))
            .collect();
        let _ = writeln!(out, "  SIG {} {rel} {}", p.var_names[term.aux], factors.join(" * "));
    }
    out.push_str("BOUNDS\n");
    for j in 0..p.num_vars() {
        let (lo, hi) = (p.lower[j], p.upper[j]);
        let _ = if lo == f64::NEG_INFINITY && hi == f64::INFINITY {
            writeln!(out, "  {} free", p.var_names[j])
        } else {
            writeln!(out, "  {} <= {} <= {}", fmt_num(lo), p.var_names[j], fmt_num(hi))
        };
    }
    let ints: Vec<&str> = (0..p.num_vars())
        .filter(|&j| p.integer[j])
        .map(|j| p.var_names[j].as_str())
        .collect();
    if !ints.is_empty() {
        let _ = writeln!(out, "GENERAL\n  {}", ints.join(" "));
    }
    out.push_str("END\n");
    out
}
