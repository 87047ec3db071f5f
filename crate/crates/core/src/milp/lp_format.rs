//! CPLEX-style LP text format.
//!
//! The writer emits `Minimize`, `Subject To`, `Bounds`, `Generals`,
//! `Binaries` and `End` sections. Variable and row names are rewritten to
//! `[A-Za-z0-9_]` identifiers (see [`lp_names`]) so that any conforming reader
//! accepts them. [`parse_lp`] reads the same dialect back.

use std::collections::HashMap;
use std::fmt::Write;

use super::{MilpModel, Relation, VarId};

const WRAP: usize = 100;

fn sanitize(raw: &str, fallback: &str) -> String {
    let mut s: String = raw.chars().map(|c| if c.is_ascii_alphanumeric() || c == '_' { c } else { '_' }).collect();
    while s.ends_with('_') && s.len() > 1 {
        s.pop();
    }
    if s.is_empty() || s == "_" {
        s = fallback.to_string();
    }
    if !s.starts_with(|c: char| c.is_ascii_alphabetic()) {
        s.insert(0, 'v');
    }
    // `e`/`E` followed by digits can be mistaken for exponents by some readers.
    if s.starts_with(['e', 'E']) && s[1..].chars().all(|c| c.is_ascii_digit()) {
        s.insert(0, 'v');
    }
    s
}

fn unique_names<'a>(raw: impl Iterator<Item = &'a str>, prefix: &str) -> Vec<String> {
    let mut used: HashMap<String, usize> = HashMap::new();
    let mut out = Vec::new();
    for (i, name) in raw.enumerate() {
        let base = sanitize(name, &format!("{prefix}{i}"));
        let mut candidate = base.clone();
        while used.contains_key(&candidate) {
            let k = used.get_mut(&base).map(|k| {
                *k += 1;
                *k
            });
            candidate = format!("{base}_{}", k.unwrap_or(1));
        }
        used.insert(candidate.clone(), 0);
        out.push(candidate);
    }
    out
}

/// The identifier each variable receives in exported LP text.
pub fn lp_names(model: &MilpModel) -> Vec<String> {
    unique_names(model.variables.iter().map(|v| v.name.as_str()), "x")
}

fn fmt_num(v: f64) -> String {
    if v == f64::INFINITY {
        "+inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{v}")
    }
}

fn write_terms(out: &mut String, head: &str, terms: &[(VarId, f64)], names: &[String]) -> usize {
    let mut line = head.len();
    out.push_str(head);
    let mut first = true;
    for &(v, c) in terms {
        let sign = if c < 0.0 {
            "-"
        } else if first {
            ""
        } else {
            "+"
        };
        let mag = c.abs();
        let coef = if mag == 1.0 { String::new() } else { format!("{} ", fmt_num(mag)) };
        let token =
            if sign.is_empty() { format!(" {coef}{}", names[v.0]) } else { format!(" {sign} {coef}{}", names[v.0]) };
        if line + token.len() > WRAP {
            out.push_str("\n  ");
            line = 2;
        }
        out.push_str(&token);
        line += token.len();
        first = false;
    }
    line
}

/// Renders `model` as LP text.
pub fn export_lp(model: &MilpModel) -> String {
    let names = lp_names(model);
    let row_names = unique_names(model.constraints.iter().map(|c| c.name.as_str()), "c");
    let mut out = String::new();
    let _ = writeln!(out, "\\ Problem: {}", model.name.replace('\n', " "));
    out.push_str("Minimize\n");
    let objective: Vec<(VarId, f64)> = model.objective.iter().copied().filter(|t| t.1 != 0.0).collect();
    if objective.is_empty() {
        if names.is_empty() {
            out.push_str(" obj:\n");
        } else {
            let _ = writeln!(out, " obj: 0 {}", names[0]);
        }
    } else {
        write_terms(&mut out, " obj:", &objective, &names);
        out.push('\n');
    }

    out.push_str("Subject To\n");
    for (c, rname) in model.constraints.iter().zip(&row_names) {
        let terms: Vec<(VarId, f64)> = c.terms.iter().copied().filter(|t| t.1 != 0.0).collect();
        let head = format!(" {rname}:");
        if terms.is_empty() {
            if names.is_empty() {
                // Nothing to reference; record the constant row as a comment.
                let _ = writeln!(out, "\\{head} 0 {} {}", c.relation, fmt_num(c.rhs));
                continue;
            }
            let _ = write!(out, "{head} 0 {}", names[0]);
        } else {
            write_terms(&mut out, &head, &terms, &names);
        }
        let _ = writeln!(out, " {} {}", c.relation, fmt_num(c.rhs));
    }

    out.push_str("Bounds\n");
    for (v, name) in model.variables.iter().zip(&names) {
        if v.is_binary() {
            continue;
        }
        let (l, u) = (v.lower, v.upper);
        if l == f64::NEG_INFINITY && u == f64::INFINITY {
            let _ = writeln!(out, " {name} free");
        } else if l == u {
            let _ = writeln!(out, " {name} = {}", fmt_num(l));
        } else {
            let _ = writeln!(out, " {} <= {name} <= {}", fmt_num(l), fmt_num(u));
        }
    }

    let generals: Vec<&String> =
        model.variables.iter().zip(&names).filter(|(v, _)| v.integer && !v.is_binary()).map(|(_, n)| n).collect();
    let binaries: Vec<&String> =
        model.variables.iter().zip(&names).filter(|(v, _)| v.is_binary()).map(|(_, n)| n).collect();
    for (title, list) in [("Generals", generals), ("Binaries", binaries)] {
        let _ = writeln!(out, "{title}");
        let mut line = 0;
        for n in list {
            if line + n.len() + 1 > WRAP {
                out.push('\n');
                line = 0;
            }
            out.push(' ');
            out.push_str(n);
            line += n.len() + 1;
        }
        if line > 0 {
            out.push('\n');
        }
    }
    out.push_str("End\n");
    out
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum LpParseError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("missing objective section")]
    NoObjective,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Section {
    Preamble,
    Objective,
    Constraints,
    Bounds,
    Generals,
    Binaries,
    End,
}

fn section_keyword(line: &str) -> Option<(Section, bool)> {
    let l = line.trim().to_ascii_lowercase();
    let sec = match l.as_str() {
        "minimize" | "minimise" | "min" | "minimum" => (Section::Objective, false),
        "maximize" | "maximise" | "max" | "maximum" => (Section::Objective, true),
        "subject to" | "such that" | "st" | "s.t." | "st." => (Section::Constraints, false),
        "bounds" | "bound" => (Section::Bounds, false),
        "generals" | "general" | "gen" | "integers" | "integer" => (Section::Generals, false),
        "binaries" | "binary" | "bin" => (Section::Binaries, false),
        "end" => (Section::End, false),
        _ => return None,
    };
    Some(sec)
}

fn parse_number(tok: &str) -> Option<f64> {
    match tok.to_ascii_lowercase().as_str() {
        "inf" | "+inf" | "infinity" | "+infinity" => Some(f64::INFINITY),
        "-inf" | "-infinity" => Some(f64::NEG_INFINITY),
        t => t
            .parse::<f64>()
            .ok()
            .filter(|_| t.starts_with(|c: char| c.is_ascii_digit() || c == '.' || c == '-' || c == '+')),
    }
}

/// Whether a sign starts a signed constant: right after a relation or at the
/// start of a statement, and directly followed by a digit, `.` or `inf`.
fn signs_number(prev: Option<&String>, next: Option<char>) -> bool {
    let after_relation = prev.map_or(true, |p| relation(p).is_some());
    match next {
        Some(c) if c.is_ascii_digit() || c == '.' => after_relation || prev.is_some_and(|p| p.ends_with(':')),
        Some('i' | 'I') => after_relation,
        _ => false,
    }
}

fn tokenize(s: &str) -> Vec<String> {
    let mut toks = Vec::new();
    let mut cur = String::new();
    let chars: Vec<char> = s.chars().collect();
    let mut i = 0;
    let flush = |cur: &mut String, toks: &mut Vec<String>| {
        if !cur.is_empty() {
            toks.push(std::mem::take(cur));
        }
    };
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            flush(&mut cur, &mut toks);
        } else if c == '<' || c == '>' || c == '=' {
            flush(&mut cur, &mut toks);
            let mut op = c.to_string();
            if i + 1 < chars.len() && chars[i + 1] == '=' {
                op.push('=');
                i += 1;
            }
            toks.push(op);
        } else if (c == '+' || c == '-') && cur.is_empty() && signs_number(toks.last(), chars.get(i + 1).copied()) {
            cur.push(c);
        } else if (c == '+' || c == '-')
            && !(cur.ends_with(['e', 'E']) && cur.chars().next().is_some_and(|f| f.is_ascii_digit() || f == '.'))
        {
            flush(&mut cur, &mut toks);
            toks.push(c.to_string());
        } else if c == ':' {
            cur.push(c);
            flush(&mut cur, &mut toks);
        } else {
            cur.push(c);
        }
        i += 1;
    }
    flush(&mut cur, &mut toks);
    toks
}

struct Builder {
    model: MilpModel,
    index: HashMap<String, VarId>,
    explicit_lower: HashMap<usize, bool>,
}

impl Builder {
    fn var(&mut self, name: &str) -> VarId {
        if let Some(&v) = self.index.get(name) {
            return v;
        }
        let v = self.model.add_continuous(name, 0.0, f64::INFINITY);
        self.index.insert(name.to_string(), v);
        v
    }

    /// Parses `[sign] [coef] var ...` into terms; returns remaining tokens.
    fn linear<'t>(
        &mut self,
        toks: &'t [String],
        line: usize,
    ) -> Result<(Vec<(VarId, f64)>, &'t [String]), LpParseError> {
        let mut terms: Vec<(VarId, f64)> = Vec::new();
        let mut i = 0;
        let mut sign = 1.0;
        let mut coef: Option<f64> = None;
        while i < toks.len() {
            let t = toks[i].as_str();
            if matches!(t, "<" | "<=" | "=<" | ">" | ">=" | "=>" | "=") {
                break;
            }
            if t == "+" {
                sign = 1.0;
            } else if t == "-" {
                sign = -sign;
            } else if let Some(v) = parse_number(t) {
                // A number directly followed by a relation is a constant; not supported on the lhs.
                coef = Some(coef.unwrap_or(1.0) * v);
            } else {
                let v = self.var(t);
                let c = sign * coef.unwrap_or(1.0);
                if let Some(term) = terms.iter_mut().find(|x| x.0 == v) {
                    term.1 += c;
                } else {
                    terms.push((v, c));
                }
                sign = 1.0;
                coef = None;
            }
            i += 1;
        }
        if coef.is_some() {
            return Err(LpParseError::Syntax { line, msg: "dangling coefficient".into() });
        }
        Ok((terms, &toks[i..]))
    }
}

fn relation(tok: &str) -> Option<Relation> {
    match tok {
        "<" | "<=" | "=<" => Some(Relation::Le),
        ">" | ">=" | "=>" => Some(Relation::Ge),
        "=" => Some(Relation::Eq),
        _ => None,
    }
}

/// Reads LP text in the dialect produced by [`export_lp`].
pub fn parse_lp(text: &str) -> Result<MilpModel, LpParseError> {
    let mut b = Builder { model: MilpModel::new("lp"), index: HashMap::new(), explicit_lower: HashMap::new() };
    let mut section = Section::Preamble;
    let mut maximize = false;
    let mut saw_objective = false;
    // Statements may span several lines; they end where the next one starts.
    let mut pending: Vec<(usize, String)> = Vec::new();

    let mut statements: Vec<(Section, usize, String)> = Vec::new();
    let flush =
        |section: Section, pending: &mut Vec<(usize, String)>, statements: &mut Vec<(Section, usize, String)>| {
            if let Some(&(line, _)) = pending.first() {
                let text: Vec<String> = pending.drain(..).map(|(_, s)| s).collect();
                statements.push((section, line, text.join(" ")));
            }
        };

    for (ln, raw) in text.lines().enumerate() {
        let line_no = ln + 1;
        if let Some(p) = raw.strip_prefix("\\ Problem:") {
            b.model.name = p.trim().to_string();
            continue;
        }
        let content = raw.split('\\').next().unwrap_or("");
        if content.trim().is_empty() {
            continue;
        }
        if let Some((sec, max)) = section_keyword(content) {
            flush(section, &mut pending, &mut statements);
            section = sec;
            if sec == Section::Objective {
                maximize = max;
                saw_objective = true;
            }
            continue;
        }
        let continuation = raw.starts_with("  ") && !raw.trim_start().contains(':');
        match section {
            Section::Objective => pending.push((line_no, content.to_string())),
            Section::Constraints => {
                if !continuation {
                    flush(section, &mut pending, &mut statements);
                }
                pending.push((line_no, content.to_string()));
            }
            Section::Bounds | Section::Generals | Section::Binaries => {
                flush(section, &mut pending, &mut statements);
                statements.push((section, line_no, content.to_string()));
            }
            Section::Preamble => {
                return Err(LpParseError::Syntax { line: line_no, msg: "content before objective".into() })
            }
            Section::End => {}
        }
    }
    flush(section, &mut pending, &mut statements);
    if !saw_objective {
        return Err(LpParseError::NoObjective);
    }

    for (sec, line, stmt) in statements {
        let mut toks = tokenize(&stmt);
        match sec {
            Section::Objective => {
                if toks.first().is_some_and(|t| t.ends_with(':')) {
                    toks.remove(0);
                }
                let (terms, rest) = b.linear(&toks, line)?;
                if !rest.is_empty() {
                    return Err(LpParseError::Syntax { line, msg: "relation in objective".into() });
                }
                for (v, c) in terms {
                    let c = if maximize { -c } else { c };
                    if c != 0.0 {
                        b.model.set_objective_coeff(v, c);
                    }
                }
            }
            Section::Constraints => {
                let name = if toks.first().is_some_and(|t| t.ends_with(':')) {
                    let n = toks.remove(0);
                    n.trim_end_matches(':').to_string()
                } else {
                    format!("c{}", b.model.constraints.len())
                };
                let (terms, rest) = b.linear(&toks, line)?;
                let [op, rhs] = rest else {
                    return Err(LpParseError::Syntax { line, msg: format!("expected `rel rhs` in `{stmt}`") });
                };
                let rel =
                    relation(op).ok_or_else(|| LpParseError::Syntax { line, msg: format!("bad relation `{op}`") })?;
                let rhs =
                    parse_number(rhs).ok_or_else(|| LpParseError::Syntax { line, msg: format!("bad rhs `{rhs}`") })?;
                let terms = terms.into_iter().filter(|t| t.1 != 0.0).collect();
                b.model.add_constraint(name, terms, rel, rhs);
            }
            Section::Bounds => parse_bound(&mut b, &toks, line)?,
            Section::Generals | Section::Binaries => {
                for t in toks {
                    let v = b.var(&t);
                    let var = &mut b.model.variables[v.0];
                    var.integer = true;
                    if sec == Section::Binaries {
                        var.lower = 0.0;
                        var.upper = 1.0;
                    }
                }
            }
            Section::Preamble | Section::End => {}
        }
    }
    Ok(b.model)
}

fn parse_bound(b: &mut Builder, toks: &[String], line: usize) -> Result<(), LpParseError> {
    let err = |msg: &str| LpParseError::Syntax { line, msg: msg.to_string() };
    let toks = merge_signs(toks);
    let toks: Vec<&str> = toks.iter().map(String::as_str).collect();
    match toks.as_slice() {
        [name, free] if free.eq_ignore_ascii_case("free") => {
            let v = b.var(name);
            b.model.variables[v.0].lower = f64::NEG_INFINITY;
            b.model.variables[v.0].upper = f64::INFINITY;
        }
        [l, op1, name, op2, u] => {
            let (l, u) =
                (parse_number(l).ok_or_else(|| err("bad bound"))?, parse_number(u).ok_or_else(|| err("bad bound"))?);
            if relation(op1) != Some(Relation::Le) || relation(op2) != Some(Relation::Le) {
                return Err(err("expected `l <= x <= u`"));
            }
            let v = b.var(name);
            b.model.variables[v.0].lower = l;
            b.model.variables[v.0].upper = u;
            b.explicit_lower.insert(v.0, true);
        }
        [a, op, c] => {
            let rel = relation(op).ok_or_else(|| err("bad relation"))?;
            let (name, value, rel) = match (parse_number(a), parse_number(c)) {
                (None, Some(v)) => (*a, v, rel),
                (Some(v), None) => {
                    let flipped = match rel {
                        Relation::Le => Relation::Ge,
                        Relation::Ge => Relation::Le,
                        Relation::Eq => Relation::Eq,
                    };
                    (*c, v, flipped)
                }
                _ => return Err(err("bound needs one variable and one number")),
            };
            let v = b.var(name);
            let var = &mut b.model.variables[v.0];
            match rel {
                Relation::Le => {
                    var.upper = value;
                    if value < 0.0 && !b.explicit_lower.contains_key(&v.0) {
                        var.lower = f64::NEG_INFINITY;
                    }
                }
                Relation::Ge => var.lower = value,
                Relation::Eq => {
                    var.lower = value;
                    var.upper = value;
                }
            }
        }
        _ => return Err(err("unrecognised bound")),
    }
    Ok(())
}

/// Joins a lone `-`/`+` with the number that follows it.
fn merge_signs(toks: &[String]) -> Vec<String> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < toks.len() {
        if (toks[i] == "-" || toks[i] == "+") && i + 1 < toks.len() && parse_number(&toks[i + 1]).is_some() {
            out.push(format!("{}{}", toks[i], toks[i + 1]));
            i += 2;
        } else {
            out.push(toks[i].clone());
            i += 1;
        }
    }
    out
}
