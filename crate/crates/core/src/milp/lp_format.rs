//! CPLEX-style LP text: writer and a reader for the subset it emits.

use std::collections::HashMap;
use std::fmt::Write;

use super::{Constraint, Family, MilpModel, Sense, VarKind, Variable};

const LINE: usize = 200;

fn push_term(out: &mut String, line_len: &mut usize, first: bool, coef: f64, name: &str) {
    let mut t = String::new();
    let mag = coef.abs();
    if first {
        if coef < 0.0 {
            t.push_str("- ");
        }
    } else if coef < 0.0 {
        t.push_str(" - ");
    } else {
        t.push_str(" + ");
    }
    if mag != 1.0 {
        let _ = write!(t, "{mag} ");
    }
    t.push_str(name);
    if *line_len + t.len() > LINE {
        out.push_str("\n  ");
        *line_len = 2;
        t = t.trim_start().to_string();
    }
    *line_len += t.len();
    out.push_str(&t);
}

fn push_expr(out: &mut String, head: &str, terms: &[(usize, f64)], vars: &[Variable]) -> usize {
    out.push_str(head);
    let mut len = head.len();
    if terms.is_empty() {
        // An empty row still needs a variable.
        push_term(out, &mut len, true, 0.0, &vars[0].name);
        return len;
    }
    for (i, &(v, c)) in terms.iter().enumerate() {
        push_term(out, &mut len, i == 0, c, &vars[v].name);
    }
    len
}

/// Writes the model; constraints are grouped by family under a comment
/// naming it.
pub fn export_model(model: &MilpModel) -> String {
    let mut s = String::new();
    s.push_str("\\ recovery model\n");
    s.push_str("Minimize\n");
    if model.variables.is_empty() {
        s.push_str(" obj:\n");
    } else {
        let terms: Vec<(usize, f64)> = model.objective.iter().copied().enumerate().collect();
        push_expr(&mut s, " obj: ", &terms, &model.variables);
        s.push('\n');
    }
    s.push_str("Subject To\n");
    for fam in Family::ALL {
        let rows: Vec<&Constraint> = model.constraints.iter().filter(|c| c.family == fam).collect();
        if rows.is_empty() {
            continue;
        }
        let _ = writeln!(s, "\\ {}", fam.tag());
        for c in rows {
            let len = push_expr(&mut s, &format!(" {}: ", c.name), &c.terms, &model.variables);
            let tail = format!(" {} {}", c.sense.as_str(), c.rhs);
            if len + tail.len() > LINE {
                s.push_str("\n  ");
            }
            s.push_str(&tail);
            s.push('\n');
        }
    }
    let continuous: Vec<&Variable> = model
        .variables
        .iter()
        .filter(|v| v.kind == VarKind::Continuous)
        .collect();
    if !continuous.is_empty() {
        s.push_str("Bounds\n");
        for v in continuous {
            if v.upper.is_finite() {
                let _ = writeln!(s, " 0 <= {} <= {}", v.name, v.upper);
            } else {
                let _ = writeln!(s, " {} >= 0", v.name);
            }
        }
    }
    let binaries: Vec<&str> = model
        .variables
        .iter()
        .filter(|v| v.kind == VarKind::Binary)
        .map(|v| v.name.as_str())
        .collect();
    if !binaries.is_empty() {
        s.push_str("Binaries\n");
        let mut len = 0;
        for b in binaries {
            if len > 0 && len + b.len() + 1 > LINE {
                s.push('\n');
                len = 0;
            }
            s.push(' ');
            s.push_str(b);
            len += b.len() + 1;
        }
        s.push('\n');
    }
    s.push_str("End\n");
    s
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LpParseError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("constraint {0} has no family prefix")]
    UnknownFamily(String),
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Name(String),
    Plus,
    Minus,
    Colon,
    Cmp(Sense),
}

fn tokenize(text: &str, line: usize) -> Result<Vec<(Tok, usize)>, LpParseError> {
    let mut out = Vec::new();
    let b: Vec<char> = text.chars().collect();
    let mut i = 0;
    let mut ln = line;
    while i < b.len() {
        let c = b[i];
        match c {
            '\n' => {
                ln += 1;
                i += 1;
            }
            c if c.is_whitespace() => i += 1,
            '+' => {
                out.push((Tok::Plus, ln));
                i += 1;
            }
            '-' => {
                out.push((Tok::Minus, ln));
                i += 1;
            }
            ':' => {
                out.push((Tok::Colon, ln));
                i += 1;
            }
            '<' | '>' | '=' => {
                let mut j = i + 1;
                while j < b.len() && matches!(b[j], '<' | '>' | '=') {
                    j += 1;
                }
                let op: String = b[i..j].iter().collect();
                let sense = match op.as_str() {
                    "<=" | "=<" | "<" => Sense::Le,
                    ">=" | "=>" | ">" => Sense::Ge,
                    "=" => Sense::Eq,
                    _ => {
                        return Err(LpParseError::Syntax {
                            line: ln,
                            message: format!("bad operator {op}"),
                        })
                    }
                };
                out.push((Tok::Cmp(sense), ln));
                i = j;
            }
            c if c.is_ascii_digit() || c == '.' => {
                let mut j = i;
                while j < b.len()
                    && (b[j].is_ascii_digit()
                        || b[j] == '.'
                        || ((b[j] == 'e' || b[j] == 'E') && j + 1 < b.len())
                        || ((b[j] == '+' || b[j] == '-') && j > i && matches!(b[j - 1], 'e' | 'E')))
                {
                    j += 1;
                }
                let s: String = b[i..j].iter().collect();
                let v = s.parse::<f64>().map_err(|_| LpParseError::Syntax {
                    line: ln,
                    message: format!("bad number {s}"),
                })?;
                out.push((Tok::Num(v), ln));
                i = j;
            }
            _ => {
                let mut j = i;
                while j < b.len() && !b[j].is_whitespace() && !matches!(b[j], '+' | '-' | ':' | '<' | '>' | '=') {
                    j += 1;
                }
                let s: String = b[i..j].iter().collect();
                if s.eq_ignore_ascii_case("inf") || s.eq_ignore_ascii_case("infinity") {
                    out.push((Tok::Num(f64::INFINITY), ln));
                } else {
                    out.push((Tok::Name(s), ln));
                }
                i = j;
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, PartialEq)]
enum Section {
    None,
    Objective,
    Constraints,
    Bounds,
    Binaries,
    Generals,
}

fn header(line: &str) -> Option<Section> {
    let l = line.trim().to_ascii_lowercase();
    Some(match l.as_str() {
        "minimize" | "minimum" | "min" => Section::Objective,
        "subject to" | "such that" | "st" | "s.t." => Section::Constraints,
        "bounds" | "bound" => Section::Bounds,
        "binaries" | "binary" | "bin" => Section::Binaries,
        "generals" | "general" | "gen" => Section::Generals,
        "end" => Section::None,
        _ => return None,
    })
}

struct Reader {
    names: HashMap<String, usize>,
    variables: Vec<Variable>,
}

impl Reader {
    fn var(&mut self, name: &str) -> usize {
        if let Some(&v) = self.names.get(name) {
            return v;
        }
        let v = self.variables.len();
        self.names.insert(name.to_string(), v);
        self.variables.push(Variable {
            name: name.to_string(),
            kind: VarKind::Continuous,
            upper: f64::INFINITY,
        });
        v
    }
}

fn err(line: usize, message: &str) -> LpParseError {
    LpParseError::Syntax {
        line,
        message: message.to_string(),
    }
}

/// Parses `[name:] terms` up to a comparison or the end; returns the terms
/// and the index after them.
fn parse_terms(
    r: &mut Reader,
    toks: &[(Tok, usize)],
    mut i: usize,
) -> Result<(Option<String>, Vec<(usize, f64)>, usize), LpParseError> {
    let mut name = None;
    if let (Some((Tok::Name(n), _)), Some((Tok::Colon, _))) = (toks.get(i), toks.get(i + 1)) {
        name = Some(n.clone());
        i += 2;
    }
    let mut terms: Vec<(usize, f64)> = Vec::new();
    let mut sign = 1.0;
    let mut coef: Option<f64> = None;
    while i < toks.len() {
        match &toks[i].0 {
            Tok::Plus => {}
            Tok::Minus => sign = -sign,
            Tok::Num(v) => coef = Some(coef.unwrap_or(1.0) * v),
            Tok::Name(n) => {
                if let Some((Tok::Colon, _)) = toks.get(i + 1) {
                    break;
                }
                let v = r.var(n);
                terms.push((v, sign * coef.unwrap_or(1.0)));
                sign = 1.0;
                coef = None;
            }
            Tok::Cmp(_) => break,
            Tok::Colon => return Err(err(toks[i].1, "unexpected ':'")),
        }
        i += 1;
    }
    Ok((name, terms, i))
}

fn merge(terms: Vec<(usize, f64)>) -> Vec<(usize, f64)> {
    let mut m: std::collections::BTreeMap<usize, f64> = std::collections::BTreeMap::new();
    for (v, c) in terms {
        *m.entry(v).or_default() += c;
    }
    m.into_iter().filter(|&(_, c)| c != 0.0).collect()
}

/// Reads text produced by [`export_model`] (or hand-written in the same
/// subset) back into a model; families come from constraint-name prefixes.
pub fn read_model(text: &str) -> Result<MilpModel, LpParseError> {
    let mut sections: Vec<(Section, String, usize)> = Vec::new();
    let mut cur = Section::None;
    let mut buf = String::new();
    let mut start = 1;
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('\\').next().unwrap_or("");
        if let Some(s) = header(line) {
            sections.push((cur, std::mem::take(&mut buf), start));
            cur = s;
            start = n + 2;
            continue;
        }
        buf.push_str(line);
        buf.push('\n');
    }
    sections.push((cur, buf, start));

    let mut r = Reader {
        names: HashMap::new(),
        variables: Vec::new(),
    };
    let mut objective_terms = Vec::new();
    let mut constraints = Vec::new();
    let mut binaries = Vec::new();
    let mut bounds: Vec<(usize, Option<f64>, Option<f64>)> = Vec::new();

    for (sec, body, line) in sections {
        let toks = tokenize(&body, line)?;
        match sec {
            Section::None => {
                if let Some((_, l)) = toks.first() {
                    return Err(err(*l, "content outside a section"));
                }
            }
            Section::Objective => {
                let (_, terms, i) = parse_terms(&mut r, &toks, 0)?;
                if i < toks.len() {
                    return Err(err(toks[i].1, "unexpected token in objective"));
                }
                objective_terms = terms;
            }
            Section::Constraints => {
                let mut i = 0;
                while i < toks.len() {
                    let l = toks[i].1;
                    let (name, terms, j) = parse_terms(&mut r, &toks, i)?;
                    let Some((Tok::Cmp(sense), _)) = toks.get(j) else {
                        return Err(err(l, "constraint without comparison"));
                    };
                    let mut k = j + 1;
                    let mut sign = 1.0;
                    while let Some((Tok::Plus | Tok::Minus, _)) = toks.get(k) {
                        if toks[k].0 == Tok::Minus {
                            sign = -sign;
                        }
                        k += 1;
                    }
                    let Some((Tok::Num(rhs), _)) = toks.get(k) else {
                        return Err(err(l, "constraint without right-hand side"));
                    };
                    let name = name.unwrap_or_else(|| format!("R{}", constraints.len()));
                    let family = Family::from_name(&name).ok_or_else(|| LpParseError::UnknownFamily(name.clone()))?;
                    constraints.push(Constraint {
                        name,
                        family,
                        terms: merge(terms),
                        sense: *sense,
                        rhs: sign * rhs,
                    });
                    i = k + 1;
                }
            }
            Section::Bounds => {
                for (k, raw) in body.lines().enumerate() {
                    let toks = tokenize(raw, line + k)?;
                    if toks.is_empty() {
                        continue;
                    }
                    let signed = |toks: &[(Tok, usize)], i: usize| -> Option<(f64, usize)> {
                        match toks.get(i) {
                            Some((Tok::Minus, _)) => match toks.get(i + 1) {
                                Some((Tok::Num(v), _)) => Some((-v, i + 2)),
                                _ => None,
                            },
                            Some((Tok::Num(v), _)) => Some((*v, i + 1)),
                            _ => None,
                        }
                    };
                    let bad = || err(line + k, "bad bound");
                    match (signed(&toks, 0), &toks[..]) {
                        (Some((lo, i)), _) => {
                            // lo <= x [<= hi]
                            let Some((Tok::Name(n), _)) = toks.get(i + 1) else { return Err(bad()) };
                            let v = r.var(n);
                            let hi = if toks.len() > i + 2 { signed(&toks, i + 3).map(|x| x.0) } else { None };
                            bounds.push((v, Some(lo), hi));
                        }
                        (None, [(Tok::Name(n), _), (Tok::Name(f), _)]) if f.eq_ignore_ascii_case("free") => {
                            let v = r.var(n);
                            bounds.push((v, Some(f64::NEG_INFINITY), None));
                        }
                        (None, [(Tok::Name(n), _), (Tok::Cmp(s), _), ..]) => {
                            let v = r.var(n);
                            let val = signed(&toks, 2).ok_or_else(bad)?.0;
                            match s {
                                Sense::Le => bounds.push((v, None, Some(val))),
                                Sense::Ge => bounds.push((v, Some(val), None)),
                                Sense::Eq => bounds.push((v, Some(val), Some(val))),
                            }
                        }
                        _ => return Err(bad()),
                    }
                }
            }
            Section::Binaries | Section::Generals => {
                for (t, l) in toks {
                    match t {
                        Tok::Name(n) => binaries.push(r.var(&n)),
                        _ => return Err(err(l, "expected a variable name")),
                    }
                }
            }
        }
    }

    for v in binaries {
        r.variables[v].kind = VarKind::Binary;
        r.variables[v].upper = 1.0;
    }
    for (v, _, hi) in bounds {
        if let Some(hi) = hi {
            r.variables[v].upper = hi;
        }
    }
    let mut objective = vec![0.0; r.variables.len()];
    for (v, c) in objective_terms {
        objective[v] += c;
    }
    Ok(MilpModel::new(r.variables, objective, constraints))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> MilpModel {
        let variables = vec![Variable {
            name: "x_F_0".into(),
            kind: VarKind::Binary,
            upper: 1.0,
        }];
        let constraints = vec![Constraint {
            name: "one_F".into(),
            family: Family::UniqueDecision,
            terms: vec![(0, 1.0)],
            sense: Sense::Eq,
            rhs: 1.0,
        }];
        MilpModel::new(variables, vec![3.0], constraints)
    }

    #[test]
    fn one_variable_document() {
        let text = export_model(&tiny());
        assert_eq!(
            text,
            "\\ recovery model\nMinimize\n obj: 3 x_F_0\nSubject To\n\\ unique-decision\n one_F: x_F_0 = 1\nBinaries\n x_F_0\nEnd\n"
        );
        let back = read_model(&text).unwrap();
        assert_eq!(back, tiny());
    }

    #[test]
    fn reads_hand_written_variants() {
        let text = "Minimize\n obj: 2 a + 3.5 b - c\nSubject To\n one_g: a + b = 1\n duty_c: 60 a\n + 40 b <= -0\n slot_s: b + u >= 1\nBounds\n u <= 4\n 0 <= c <= 2\nBinaries\n a b\nEnd\n";
        let m = read_model(text).unwrap();
        assert_eq!(m.variables.len(), 4);
        assert_eq!(m.objective, vec![2.0, 3.5, -1.0, 0.0]);
        assert_eq!(m.constraints[1].terms, vec![(0, 60.0), (1, 40.0)]);
        assert_eq!(m.variables[3].upper, 4.0);
        assert_eq!(m.variables[2].upper, 2.0);
        assert_eq!(m.groups, vec![vec![0, 1]]);
    }

    #[test]
    fn unknown_family_is_rejected() {
        let text = "Minimize\n obj: a\nSubject To\n c1: a <= 1\nEnd\n";
        assert_eq!(read_model(text), Err(LpParseError::UnknownFamily("c1".into())));
    }
}
