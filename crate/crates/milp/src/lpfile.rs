//! LP text format writer and internal reader.
//!
//! The emitted grammar is the common CPLEX-style subset understood by CBC,
//! GLPK, HiGHS, and Gurobi:
//!
//! ```text
//! Minimize            (or Maximize)
//!  obj: 2 x + 3 y + 1.5
//! Subject To
//!  r0: 1 x - 2 y <= 4
//! Bounds
//!  0 <= x <= 10
//!  y free
//! Binary
//!  b0
//! General
//!  n0
//! End
//! ```
//!
//! Coefficients are printed with 17 significant digits so that a write/parse
//! round trip reproduces every coefficient bit-for-bit in practice (the
//! round-trip invariant is tested to 1e-12). A bare numeric term in the
//! objective is the objective constant. Cone rows cannot be expressed in this
//! format; callers must outer-approximate them first (see [`crate::cone`]).

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::ir::{LinExpr, ModelIR, ObjSense, Sense, VarId, VarKind};
use crate::MilpError;

/// Format a coefficient with 17 significant digits.
fn fmt_coef(v: f64) -> String {
    format!("{:.16e}", v)
}

/// Render the model as LP text. Cone rows are rejected.
pub fn write_lp(ir: &ModelIR) -> Result<String, MilpError> {
    if !ir.cones().is_empty() {
        return Err(MilpError::LpFormat(format!(
            "{} cone row(s) present; outer-approximate before writing LP text",
            ir.cones().len()
        )));
    }
    if !ir.quad_obj().is_empty() {
        return Err(MilpError::LpFormat(
            "quadratic objective terms present; linearize before writing LP text".into(),
        ));
    }
    let mut out = String::new();
    match ir.obj_sense() {
        ObjSense::Maximize => out.push_str("Maximize\n"),
        ObjSense::Minimize => out.push_str("Minimize\n"),
    }
    let (obj, offset) = ir.objective();
    out.push_str(" obj:");
    let mut wrote_term = false;
    for (idx, c) in obj.iter().enumerate() {
        if *c != 0.0 {
            push_term(&mut out, *c, &ir.vars()[idx].name, wrote_term);
            wrote_term = true;
        }
    }
    if offset != 0.0 || !wrote_term {
        if offset >= 0.0 {
            let _ = write!(out, " {} {}", if wrote_term { "+" } else { "" }, fmt_coef(offset));
        } else {
            let _ = write!(out, " - {}", fmt_coef(-offset));
        }
    }
    out.push('\n');

    out.push_str("Subject To\n");
    for row in ir.rows() {
        let _ = write!(out, " {}:", row.name);
        let mut first = true;
        for (v, c) in &row.terms {
            push_term(&mut out, *c, &ir.vars()[v.0].name, !first);
            first = false;
        }
        if first {
            // Empty row: keep it representable.
            out.push_str(" 0 ");
            out.push_str(&ir.vars()[0].name);
        }
        let _ = writeln!(out, " {} {}", row.sense, fmt_coef(row.rhs));
    }

    out.push_str("Bounds\n");
    for v in ir.vars() {
        let lo_f = v.lo.is_finite();
        let hi_f = v.hi.is_finite();
        if v.kind == VarKind::Binary && v.lo == 0.0 && v.hi == 1.0 {
            continue; // default binary bounds
        }
        match (lo_f, hi_f) {
            (true, true) if v.lo == v.hi => {
                let _ = writeln!(out, " {} = {}", v.name, fmt_coef(v.lo));
            }
            (true, true) => {
                let _ = writeln!(out, " {} <= {} <= {}", fmt_coef(v.lo), v.name, fmt_coef(v.hi));
            }
            (true, false) => {
                let _ = writeln!(out, " {} >= {}", v.name, fmt_coef(v.lo));
            }
            (false, true) => {
                let _ = writeln!(out, " {} <= {}", v.name, fmt_coef(v.hi));
            }
            (false, false) => {
                let _ = writeln!(out, " {} free", v.name);
            }
        }
    }

    let binaries: Vec<&str> = ir
        .vars()
        .iter()
        .filter(|v| v.kind == VarKind::Binary)
        .map(|v| v.name.as_str())
        .collect();
    if !binaries.is_empty() {
        out.push_str("Binary\n");
        for name in binaries {
            let _ = writeln!(out, " {name}");
        }
    }
    let generals: Vec<&str> = ir
        .vars()
        .iter()
        .filter(|v| v.kind == VarKind::Integer)
        .map(|v| v.name.as_str())
        .collect();
    if !generals.is_empty() {
        out.push_str("General\n");
        for name in generals {
            let _ = writeln!(out, " {name}");
        }
    }
    out.push_str("End\n");
    Ok(out)
}

fn push_term(out: &mut String, coef: f64, name: &str, with_sign: bool) {
    if coef < 0.0 {
        let _ = write!(out, " - {} {}", fmt_coef(-coef), name);
    } else if with_sign {
        let _ = write!(out, " + {} {}", fmt_coef(coef), name);
    } else {
        let _ = write!(out, " {} {}", fmt_coef(coef), name);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Section {
    Objective,
    Rows,
    Bounds,
    Binary,
    General,
    Done,
}

/// Parse LP text back into a [`ModelIR`]. This is the internal reader used
/// for round-trip verification; it accepts exactly the grammar `write_lp`
/// emits plus whitespace/comment variations (`\` comments).
pub fn parse_lp(text: &str) -> Result<ModelIR, MilpError> {
    let mut sense = None;
    let mut section = None;
    // (name, terms(name, coef), sense, rhs)
    struct RawRow {
        name: String,
        terms: Vec<(String, f64)>,
        sense: Sense,
        rhs: f64,
    }
    let mut obj_terms: Vec<(String, f64)> = Vec::new();
    let mut obj_offset = 0.0;
    let mut rows: Vec<RawRow> = Vec::new();
    let mut bounds: Vec<(String, Option<f64>, Option<f64>, bool)> = Vec::new(); // (name, lo, hi, fixed-by-eq)
    let mut binaries: Vec<String> = Vec::new();
    let mut generals: Vec<String> = Vec::new();

    // Rows may wrap across lines; accumulate until a sense token appears.
    let mut pending = String::new();

    for raw_line in text.lines() {
        let line = match raw_line.find('\\') {
            Some(i) => &raw_line[..i],
            None => raw_line,
        };
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let lower = trimmed.to_ascii_lowercase();
        let new_section = match lower.as_str() {
            "maximize" | "maximise" | "max" => {
                sense = Some(ObjSense::Maximize);
                Some(Section::Objective)
            }
            "minimize" | "minimise" | "min" => {
                sense = Some(ObjSense::Minimize);
                Some(Section::Objective)
            }
            "subject to" | "st" | "s.t." | "such that" => Some(Section::Rows),
            "bounds" => Some(Section::Bounds),
            "binary" | "binaries" | "bin" => Some(Section::Binary),
            "general" | "generals" | "gen" | "integer" | "integers" => Some(Section::General),
            "end" => Some(Section::Done),
            _ => None,
        };
        if let Some(s) = new_section {
            if !pending.is_empty() {
                return Err(MilpError::LpFormat(format!(
                    "dangling row fragment before section {lower:?}: {pending:?}"
                )));
            }
            section = Some(s);
            continue;
        }

        match section {
            Some(Section::Objective) => {
                let body = match trimmed.find(':') {
                    Some(i) => &trimmed[i + 1..],
                    None => trimmed,
                };
                let (terms, constant) = parse_terms(body)?;
                obj_terms.extend(terms);
                obj_offset += constant;
            }
            Some(Section::Rows) => {
                pending.push(' ');
                pending.push_str(trimmed);
                if let Some((sen, pos, len)) = find_sense(&pending) {
                    let (lhs, rest) = (pending[..pos].to_string(), pending[pos + len..].to_string());
                    let (name, body) = match lhs.find(':') {
                        Some(i) => (lhs[..i].trim().to_string(), lhs[i + 1..].to_string()),
                        None => (format!("row{}", rows.len()), lhs),
                    };
                    let (terms, constant) = parse_terms(&body)?;
                    let rhs: f64 = rest.trim().parse().map_err(|_| {
                        MilpError::LpFormat(format!("bad rhs in row {name}: {rest:?}"))
                    })?;
                    rows.push(RawRow { name, terms, sense: sen, rhs: rhs - constant });
                    pending.clear();
                }
            }
            Some(Section::Bounds) => {
                let toks: Vec<&str> = trimmed.split_whitespace().collect();
                match toks.as_slice() {
                    [name, kw] if kw.eq_ignore_ascii_case("free") => {
                        bounds.push((name.to_string(), None, None, false));
                    }
                    [lo, le1, name, le2, hi]
                        if (*le1 == "<=" || *le1 == "<") && (*le2 == "<=" || *le2 == "<") =>
                    {
                        bounds.push((
                            name.to_string(),
                            Some(parse_num(lo)?),
                            Some(parse_num(hi)?),
                            false,
                        ));
                    }
                    [name, ge, lo] if *ge == ">=" || *ge == ">" => {
                        bounds.push((name.to_string(), Some(parse_num(lo)?), None, false));
                    }
                    [name, le, hi] if *le == "<=" || *le == "<" => {
                        bounds.push((name.to_string(), None, Some(parse_num(hi)?), false));
                    }
                    [name, eq, v] if *eq == "=" => {
                        let x = parse_num(v)?;
                        bounds.push((name.to_string(), Some(x), Some(x), true));
                    }
                    _ => {
                        return Err(MilpError::LpFormat(format!(
                            "unrecognized bounds line: {trimmed:?}"
                        )))
                    }
                }
            }
            Some(Section::Binary) => {
                binaries.extend(trimmed.split_whitespace().map(str::to_string));
            }
            Some(Section::General) => {
                generals.extend(trimmed.split_whitespace().map(str::to_string));
            }
            Some(Section::Done) | None => {
                return Err(MilpError::LpFormat(format!(
                    "content outside any section: {trimmed:?}"
                )));
            }
        }
    }
    if !pending.is_empty() {
        return Err(MilpError::LpFormat(format!("unterminated row: {pending:?}")));
    }

    let sense = sense.ok_or_else(|| MilpError::LpFormat("missing objective sense".into()))?;
    let mut ir = ModelIR::new(sense);

    // Collect variables in first-appearance order.
    let mut var_ids: HashMap<String, VarId> = HashMap::new();
    let mut order: Vec<String> = Vec::new();
    let note = |name: &str, order: &mut Vec<String>, seen: &mut HashMap<String, VarId>| {
        if !seen.contains_key(name) {
            seen.insert(name.to_string(), VarId(order.len()));
            order.push(name.to_string());
        }
    };
    for (n, _) in &obj_terms {
        note(n, &mut order, &mut var_ids);
    }
    for r in &rows {
        for (n, _) in &r.terms {
            note(n, &mut order, &mut var_ids);
        }
    }
    for (n, ..) in &bounds {
        note(n, &mut order, &mut var_ids);
    }
    for n in binaries.iter().chain(generals.iter()) {
        note(n, &mut order, &mut var_ids);
    }

    let bin_set: std::collections::HashSet<&String> = binaries.iter().collect();
    let gen_set: std::collections::HashSet<&String> = generals.iter().collect();
    let mut bound_map: HashMap<&String, (Option<f64>, Option<f64>)> = HashMap::new();
    for (n, lo, hi, _) in &bounds {
        bound_map.insert(n, (*lo, *hi));
    }
    for name in &order {
        let kind = if bin_set.contains(name) {
            VarKind::Binary
        } else if gen_set.contains(name) {
            VarKind::Integer
        } else {
            VarKind::Continuous
        };
        // LP-format defaults: continuous/general default to [0, +inf);
        // binary defaults to [0, 1]. An explicit bounds line overrides.
        let (dlo, dhi) = match kind {
            VarKind::Binary => (0.0, 1.0),
            _ => (0.0, f64::INFINITY),
        };
        let (lo, hi) = match bound_map.get(name) {
            Some((lo, hi)) => (lo.unwrap_or(f64::NEG_INFINITY), hi.unwrap_or(f64::INFINITY)),
            None => (dlo, dhi),
        };
        ir.add_var(name.clone(), lo, hi, kind)?;
    }

    for (n, c) in &obj_terms {
        ir.obj_add_coef(var_ids[n], *c);
    }
    ir.obj_add_offset(obj_offset);
    for r in rows {
        let mut expr = LinExpr::new();
        for (n, c) in r.terms {
            expr = expr.add(var_ids[&n], c);
        }
        ir.add_row(r.name, expr, r.sense, r.rhs)?;
    }
    Ok(ir)
}

fn parse_num(tok: &str) -> Result<f64, MilpError> {
    let t = tok.trim();
    let lower = t.to_ascii_lowercase();
    if lower == "inf" || lower == "+inf" || lower == "infinity" || lower == "1e30" {
        return Ok(f64::INFINITY);
    }
    if lower == "-inf" || lower == "-infinity" || lower == "-1e30" {
        return Ok(f64::NEG_INFINITY);
    }
    t.parse().map_err(|_| MilpError::LpFormat(format!("bad number: {tok:?}")))
}

fn find_sense(s: &str) -> Option<(Sense, usize, usize)> {
    // Longest-match first so "<=" is not mistaken for "<".
    for (pat, sen) in [("<=", Sense::Le), (">=", Sense::Ge), ("=<", Sense::Le), ("=>", Sense::Ge)]
    {
        if let Some(i) = s.find(pat) {
            return Some((sen, i, pat.len()));
        }
    }
    // Bare '=' (not part of e/E exponent notation).
    if let Some(i) = s.find('=') {
        return Some((Sense::Eq, i, 1));
    }
    None
}

/// Parse a sum of terms like `2 x - 3.5e-1 y + z + 4`; returns (terms, constant).
fn parse_terms(body: &str) -> Result<(Vec<(String, f64)>, f64), MilpError> {
    let mut terms: Vec<(String, f64)> = Vec::new();
    let mut constant = 0.0;
    let toks: Vec<&str> = body.split_whitespace().collect();
    let mut i = 0;
    let mut sign = 1.0;
    while i < toks.len() {
        let tok = toks[i];
        if tok == "+" {
            sign = 1.0;
            i += 1;
            continue;
        }
        if tok == "-" {
            sign = -1.0;
            i += 1;
            continue;
        }
        // A token may carry its own sign: "-2.5" or "+x".
        let (tok_sign, tok) = match tok.strip_prefix('-') {
            Some(rest) => (-1.0, rest),
            None => (1.0, tok.strip_prefix('+').unwrap_or(tok)),
        };
        let total_sign = sign * tok_sign;
        if let Ok(num) = tok.parse::<f64>() {
            // Either "coef var" or a bare constant.
            if i + 1 < toks.len() && is_name(toks[i + 1]) {
                terms.push((toks[i + 1].to_string(), total_sign * num));
                i += 2;
            } else {
                constant += total_sign * num;
                i += 1;
            }
        } else if is_name(tok) {
            terms.push((tok.to_string(), total_sign));
            i += 1;
        } else {
            return Err(MilpError::LpFormat(format!("unrecognized token {tok:?} in {body:?}")));
        }
        sign = 1.0;
    }
    Ok((terms, constant))
}

fn is_name(tok: &str) -> bool {
    let mut chars = tok.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::{LinExpr, ModelIR, ObjSense, Sense, VarKind};

    fn toy_ir() -> ModelIR {
        let mut ir = ModelIR::new(ObjSense::Maximize);
        let x = ir.add_var("x", 0.0, 3.0, VarKind::Continuous).unwrap();
        let y = ir.add_var("y", -1.5, f64::INFINITY, VarKind::Continuous).unwrap();
        let b = ir.add_binary("b").unwrap();
        let n = ir.add_var("n", 0.0, 7.0, VarKind::Integer).unwrap();
        ir.obj_add_coef(x, 1.25);
        ir.obj_add_coef(y, -0.5);
        ir.obj_add_coef(n, 1e-3);
        ir.obj_add_offset(4.75);
        ir.add_row(
            "cap",
            LinExpr::term(x, 2.0).add(y, 1.0).add(b, -3.0),
            Sense::Le,
            6.5,
        )
        .unwrap();
        ir.add_row("link", LinExpr::term(n, 1.0).add(b, -7.0), Sense::Le, 0.0).unwrap();
        ir.add_row("eq", LinExpr::term(x, 1.0).add(y, 1.0), Sense::Eq, 0.25).unwrap();
        ir
    }

    #[test]
    fn roundtrip_reproduces_coefficients() {
        let ir = toy_ir();
        let text = write_lp(&ir).unwrap();
        let back = parse_lp(&text).unwrap();
        assert_eq!(back.n_vars(), ir.n_vars());
        assert_eq!(back.rows().len(), ir.rows().len());
        assert_eq!(back.obj_sense(), ir.obj_sense());
        // Variable registration order need not survive the round trip;
        // compare everything keyed by name.
        for a in ir.vars() {
            let b = &back.vars()[back.lookup(&a.name).unwrap().0];
            assert_eq!(a.kind, b.kind);
            assert!((a.lo - b.lo).abs() <= 1e-12 || (a.lo.is_infinite() && b.lo.is_infinite()));
            assert!((a.hi - b.hi).abs() <= 1e-12 || (a.hi.is_infinite() && b.hi.is_infinite()));
        }
        for (ra, rb) in ir.rows().iter().zip(back.rows()) {
            assert_eq!(ra.name, rb.name);
            assert_eq!(ra.sense, rb.sense);
            assert!((ra.rhs - rb.rhs).abs() <= 1e-12);
            assert_eq!(ra.terms.len(), rb.terms.len());
            let by_name: std::collections::HashMap<&str, f64> = rb
                .terms
                .iter()
                .map(|(vb, cb)| (back.vars()[vb.0].name.as_str(), *cb))
                .collect();
            for (va, ca) in &ra.terms {
                let cb = by_name[ir.vars()[va.0].name.as_str()];
                assert!((ca - cb).abs() <= 1e-12 * ca.abs().max(1.0));
            }
        }
        let (oa, ka) = ir.objective();
        let (ob, kb) = back.objective();
        assert!((ka - kb).abs() <= 1e-12);
        for (name, ca) in ir.vars().iter().map(|v| v.name.as_str()).zip(oa) {
            let vb = back.lookup(name).unwrap();
            assert!((ca - ob[vb.0]).abs() <= 1e-12 * ca.abs().max(1.0));
        }
    }

    #[test]
    fn rejects_cones() {
        let mut ir = ModelIR::new(ObjSense::Minimize);
        let x = ir.add_var("x", 0.0, 1.0, VarKind::Continuous).unwrap();
        let t = ir.add_var("t", 0.0, 1.0, VarKind::Continuous).unwrap();
        ir.add_cone("c", vec![LinExpr::var(x)], LinExpr::var(t)).unwrap();
        assert!(write_lp(&ir).is_err());
    }

    #[test]
    fn parses_signed_and_wrapped_rows() {
        let text = "Minimize\n obj: x + 2 y\nSubject To\n r0: x +\n 3 y\n >= -2\nBounds\n x free\nEnd\n";
        let ir = parse_lp(text).unwrap();
        assert_eq!(ir.rows().len(), 1);
        assert_eq!(ir.rows()[0].sense, Sense::Ge);
        assert_eq!(ir.rows()[0].rhs, -2.0);
    }
}
