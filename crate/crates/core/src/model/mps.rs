//! Fixed/free MPS subset: NAME, OBJSENSE, ROWS, COLUMNS (with integer
//! markers), RHS, RANGES, BOUNDS, ENDATA.

use std::collections::HashMap;

use super::{normalize_infinity, LinRow, ParseError, Problem};

#[derive(Clone, Copy, PartialEq)]
enum Section {
    None,
    ObjSense,
    Rows,
    Columns,
    Rhs,
    Ranges,
    Bounds,
    Done,
}

#[derive(Clone, Copy, PartialEq)]
enum RowKind {
    N,
    L,
    G,
    E,
}

fn num(tok: &str, line: usize) -> Result<f64, ParseError> {
    tok.parse::<f64>()
        .map(normalize_infinity)
        .map_err(|_| ParseError::syntax(line, format!("bad number `{tok}`")))
}

/// Parses an MPS document.
pub fn parse_mps(text: &str) -> Result<Problem, ParseError> {
    let mut name = String::new();
    let mut section = Section::None;
    let mut maximize = false;

    let mut obj_row: Option<String> = None;
    let mut row_index: HashMap<String, usize> = HashMap::new();
    let mut row_names = Vec::new();
    let mut row_kinds = Vec::new();
    let mut row_terms: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut rhs_vals: Vec<f64> = Vec::new();
    let mut ranges: Vec<Option<f64>> = Vec::new();

    let mut col_index: HashMap<String, usize> = HashMap::new();
    let mut col_names: Vec<String> = Vec::new();
    let mut objective: Vec<f64> = Vec::new();
    let mut integer: Vec<bool> = Vec::new();
    let mut lower: Vec<Option<f64>> = Vec::new();
    let mut upper: Vec<Option<f64>> = Vec::new();
    let mut obj_offset = 0.0;
    let mut in_int_block = false;

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        if raw.trim().is_empty() || raw.starts_with('*') {
            continue;
        }
        let toks: Vec<&str> = raw.split_whitespace().collect();
        if !raw.starts_with(char::is_whitespace) {
            let key = toks[0].to_ascii_uppercase();
            section = match key.as_str() {
                "NAME" => {
                    name = toks.get(1).map(|s| s.to_string()).unwrap_or_default();
                    Section::None
                }
                "OBJSENSE" => {
                    if let Some(s) = toks.get(1) {
                        maximize = s.eq_ignore_ascii_case("MAX") || s.eq_ignore_ascii_case("MAXIMIZE");
                    }
                    Section::ObjSense
                }
                "ROWS" => Section::Rows,
                "COLUMNS" => Section::Columns,
                "RHS" => Section::Rhs,
                "RANGES" => Section::Ranges,
                "BOUNDS" => Section::Bounds,
                "ENDATA" => Section::Done,
                _ => {
                    return Err(ParseError::UnknownSection {
                        line: lineno,
                        name: toks[0].to_string(),
                    })
                }
            };
            continue;
        }
        match section {
            Section::None => return Err(ParseError::syntax(lineno, "data outside a section")),
            Section::Done => return Err(ParseError::syntax(lineno, "content after ENDATA")),
            Section::ObjSense => {
                maximize = toks[0].eq_ignore_ascii_case("MAX") || toks[0].eq_ignore_ascii_case("MAXIMIZE");
            }
            Section::Rows => {
                if toks.len() != 2 {
                    return Err(ParseError::syntax(lineno, "expected `type name`"));
                }
                let kind = match toks[0].to_ascii_uppercase().as_str() {
                    "N" => RowKind::N,
                    "L" => RowKind::L,
                    "G" => RowKind::G,
                    "E" => RowKind::E,
                    other => return Err(ParseError::syntax(lineno, format!("bad row type `{other}`"))),
                };
                if kind == RowKind::N {
                    if obj_row.is_none() {
                        obj_row = Some(toks[1].to_string());
                    }
                    continue;
                }
                if row_index.insert(toks[1].to_string(), row_names.len()).is_some() {
                    return Err(ParseError::syntax(lineno, format!("duplicate row `{}`", toks[1])));
                }
                row_names.push(toks[1].to_string());
                row_kinds.push(kind);
                row_terms.push(Vec::new());
                rhs_vals.push(0.0);
                ranges.push(None);
            }
            Section::Columns => {
                if toks.len() >= 3 && toks[1].trim_matches('\'').eq_ignore_ascii_case("MARKER") {
                    let marker = toks[2].trim_matches('\'').to_ascii_uppercase();
                    match marker.as_str() {
                        "INTORG" => in_int_block = true,
                        "INTEND" => in_int_block = false,
                        _ => return Err(ParseError::syntax(lineno, format!("bad marker `{marker}`"))),
                    }
                    continue;
                }
                if toks.len() != 3 && toks.len() != 5 {
                    return Err(ParseError::syntax(lineno, "expected `col row value [row value]`"));
                }
                let j = *col_index.entry(toks[0].to_string()).or_insert_with(|| {
                    col_names.push(toks[0].to_string());
                    objective.push(0.0);
                    integer.push(in_int_block);
                    lower.push(None);
                    upper.push(None);
                    col_names.len() - 1
                });
                for pair in toks[1..].chunks(2) {
                    let v = num(pair[1], lineno)?;
                    if Some(pair[0]) == obj_row.as_deref() {
                        objective[j] += v;
                    } else if let Some(&i) = row_index.get(pair[0]) {
                        row_terms[i].push((j, v));
                    } else {
                        return Err(ParseError::syntax(lineno, format!("unknown row `{}`", pair[0])));
                    }
                }
            }
            Section::Rhs | Section::Ranges => {
                // the set name is optional
                let body = if toks.len() % 2 == 1 { &toks[1..] } else { &toks[..] };
                if body.is_empty() {
                    return Err(ParseError::syntax(lineno, "expected `row value`"));
                }
                for pair in body.chunks(2) {
                    if pair.len() != 2 {
                        return Err(ParseError::syntax(lineno, "expected `row value`"));
                    }
                    let v = num(pair[1], lineno)?;
                    if Some(pair[0]) == obj_row.as_deref() {
                        if section == Section::Rhs {
                            obj_offset = -v;
                        }
                        continue;
                    }
                    let Some(&i) = row_index.get(pair[0]) else {
                        return Err(ParseError::syntax(lineno, format!("unknown row `{}`", pair[0])));
                    };
                    if section == Section::Rhs {
                        rhs_vals[i] = v;
                    } else {
                        ranges[i] = Some(v);
                    }
                }
            }
            Section::Bounds => {
                let kind = toks[0].to_ascii_uppercase();
                let needs_value = !matches!(kind.as_str(), "FR" | "MI" | "PL" | "BV");
                let (col, value) = match (toks.len(), needs_value) {
                    (4, true) => (toks[2], Some(num(toks[3], lineno)?)),
                    (3, true) => (toks[1], Some(num(toks[2], lineno)?)),
                    (3, false) | (4, false) => (toks[2], None),
                    (2, false) => (toks[1], None),
                    _ => return Err(ParseError::syntax(lineno, "malformed bound")),
                };
                let Some(&j) = col_index.get(col) else {
                    return Err(ParseError::syntax(lineno, format!("unknown column `{col}`")));
                };
                let v = value.unwrap_or(0.0);
                match kind.as_str() {
                    "UP" => {
                        upper[j] = Some(v);
                        if v < 0.0 && lower[j].is_none() {
                            lower[j] = Some(f64::NEG_INFINITY);
                        }
                    }
                    "LO" => lower[j] = Some(v),
                    "FX" => {
                        lower[j] = Some(v);
                        upper[j] = Some(v);
                    }
                    "FR" => {
                        lower[j] = Some(f64::NEG_INFINITY);
                        upper[j] = Some(f64::INFINITY);
                    }
                    "MI" => lower[j] = Some(f64::NEG_INFINITY),
                    "PL" => upper[j] = Some(f64::INFINITY),
                    "BV" => {
                        integer[j] = true;
                        lower[j] = Some(0.0);
                        upper[j] = Some(1.0);
                    }
                    "LI" => {
                        integer[j] = true;
                        lower[j] = Some(v);
                    }
                    "UI" => {
                        integer[j] = true;
                        upper[j] = Some(v);
                    }
                    other => {
                        return Err(ParseError::syntax(lineno, format!("bad bound type `{other}`")))
                    }
                }
            }
        }
    }

    let n = col_names.len();
    let mut p = Problem::new(n);
    p.name = name;
    p.var_names = col_names;
    p.obj_offset = obj_offset;
    if maximize {
        p.set_maximize(objective);
        p.obj_offset = -p.obj_offset;
    } else {
        p.objective = objective;
    }
    for j in 0..n {
        p.integer[j] = integer[j];
        if let Some(l) = lower[j] {
            p.lower[j] = l;
        }
        if let Some(u) = upper[j] {
            p.upper[j] = u;
        }
    }
    for i in 0..row_names.len() {
        let b = rhs_vals[i];
        let (lhs, rhs) = match (row_kinds[i], ranges[i]) {
            (RowKind::L, None) => (f64::NEG_INFINITY, b),
            (RowKind::G, None) => (b, f64::INFINITY),
            (RowKind::E, None) => (b, b),
            (RowKind::L, Some(r)) => (b - r.abs(), b),
            (RowKind::G, Some(r)) => (b, b + r.abs()),
            (RowKind::E, Some(r)) if r >= 0.0 => (b, b + r),
            (RowKind::E, Some(r)) => (b + r, b),
            (RowKind::N, _) => unreachable!(),
        };
        p.rows.push(LinRow::new(std::mem::take(&mut row_terms[i]), lhs, rhs));
        p.row_names.push(row_names[i].clone());
    }
    p.validate()?;
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "\
NAME          toy
ROWS
 N  obj
 L  c1
 G  c2
 E  c3
COLUMNS
    x         obj       1.0        c1        2.0
    MARKER    'MARKER'  'INTORG'
    y         obj       -1.0       c1        2.0
    y         c2        1.0
    MARKER    'MARKER'  'INTEND'
    w         c3        1.0
RHS
    rhs       c1        3.0        c2        0.5
    rhs       c3        2.0
RANGES
    rng       c1        1.0
BOUNDS
 UP bnd       x         4.0
 FR bnd       w
ENDATA
";

    #[test]
    fn parses_sample() {
        let p = parse_mps(SAMPLE).unwrap();
        assert_eq!(p.name, "toy");
        assert_eq!(p.var_names, vec!["x", "y", "w"]);
        assert_eq!(p.integer, vec![false, true, false]);
        assert_eq!(p.objective, vec![1.0, -1.0, 0.0]);
        assert_eq!((p.rows[0].lhs, p.rows[0].rhs), (2.0, 3.0));
        assert_eq!((p.rows[1].lhs, p.rows[1].rhs), (0.5, f64::INFINITY));
        assert_eq!((p.rows[2].lhs, p.rows[2].rhs), (2.0, 2.0));
        assert_eq!(p.upper[0], 4.0);
        assert_eq!(p.lower[2], f64::NEG_INFINITY);
    }

    #[test]
    fn empty_bounds_default_to_nonnegative() {
        let text = "NAME t\nROWS\n N obj\n L c\nCOLUMNS\n x obj 1 c 1\nRHS\n r c 1\nBOUNDS\nENDATA\n";
        let p = parse_mps(text).unwrap();
        assert_eq!((p.lower[0], p.upper[0]), (0.0, f64::INFINITY));
    }

    #[test]
    fn sos_section_is_unknown() {
        let text = "NAME t\nROWS\n N obj\nSOS\nENDATA\n";
        assert!(matches!(
            parse_mps(text),
            Err(ParseError::UnknownSection { line: 4, .. })
        ));
    }

    #[test]
    fn bad_number_reports_line() {
        let text = "NAME t\nROWS\n N obj\n L c\nCOLUMNS\n x obj abc\nENDATA\n";
        assert!(matches!(parse_mps(text), Err(ParseError::Syntax { line: 6, .. })));
    }

    #[test]
    fn large_values_are_infinite() {
        let text = "NAME t\nROWS\n N obj\n L c\nCOLUMNS\n x obj 1 c 1\nRHS\n r c 1e30\nENDATA\n";
        let p = parse_mps(text).unwrap();
        assert_eq!(p.rows[0].rhs, f64::INFINITY);
    }
}
