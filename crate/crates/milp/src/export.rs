use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::Path;

use crate::model::{MilpModel, Sense, VarKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelFormat {
    Lp,
    Mps,
}

impl ModelFormat {
    pub fn from_path(path: &Path) -> Option<ModelFormat> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "lp" => Some(ModelFormat::Lp),
            "mps" => Some(ModelFormat::Mps),
            _ => None,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ExportError {
    #[error("name collision: {0:?}")]
    NameCollision(String),
    #[error("name {0:?} is not a valid LP identifier")]
    BadName(String),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

const OBJ_ROW: &str = "obj";

fn valid_lp_name(name: &str) -> bool {
    let mut chars = name.chars();
    let Some(first) = chars.next() else { return false };
    let allowed = |c: char| c.is_ascii_alphanumeric() || "!\"#$%&()/,.;?@_`'{}|~".contains(c);
    !first.is_ascii_digit()
        && first != '.'
        && allowed(first)
        && chars.all(allowed)
        && name.len() <= 255
}

/// Every variable and row name must be unique (rows and variables share
/// no namespace in either format, but row names may not shadow the
/// objective row).
fn check_names(model: &MilpModel) -> Result<(), ExportError> {
    let mut vars = HashSet::new();
    for v in model.vars() {
        if !valid_lp_name(&v.name) {
            return Err(ExportError::BadName(v.name.clone()));
        }
        if !vars.insert(v.name.as_str()) {
            return Err(ExportError::NameCollision(v.name.clone()));
        }
    }
    let mut rows = HashSet::from([OBJ_ROW]);
    for r in model.all_rows() {
        if !valid_lp_name(&r.name) {
            return Err(ExportError::BadName(r.name.clone()));
        }
        if !rows.insert(r.name.as_str()) {
            return Err(ExportError::NameCollision(r.name.clone()));
        }
    }
    Ok(())
}

fn lp_num(v: f64) -> String {
    if v == f64::INFINITY {
        "+inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{v}")
    }
}

fn write_expr(out: &mut String, terms: impl Iterator<Item = (String, f64)>) {
    let mut any = false;
    for (n, (name, coef)) in terms.enumerate() {
        if n > 0 && n % 6 == 0 {
            out.push_str("\n  ");
        }
        let sign = if coef < 0.0 { '-' } else { '+' };
        if n == 0 && coef >= 0.0 {
            let _ = write!(out, " {} {name}", lp_num(coef));
        } else {
            let _ = write!(out, " {sign} {} {name}", lp_num(coef.abs()));
        }
        any = true;
    }
    if !any {
        out.push_str(" 0");
    }
}

/// CPLEX LP text.
pub fn model_to_lp(model: &MilpModel) -> Result<String, ExportError> {
    check_names(model)?;
    let vars = model.vars();
    let name = |i: usize| vars[i].name.clone();
    let mut out = String::new();
    let _ = writeln!(out, "\\ {}", model.name);
    out.push_str("Minimize\n obj:");
    write_expr(&mut out, model.objective().iter().map(|&(v, a)| (name(v.0), a)));
    out.push_str("\nSubject To\n");
    for r in model.all_rows() {
        let _ = write!(out, " {}:", r.name);
        write_expr(&mut out, r.terms.iter().map(|&(v, a)| (name(v.0), a)));
        let _ = writeln!(out, " {} {}", r.sense, lp_num(r.rhs));
    }
    out.push_str("Bounds\n");
    for v in vars.iter().filter(|v| v.kind == VarKind::Continuous) {
        let _ = writeln!(out, " {} <= {} <= {}", lp_num(v.lower), v.name, lp_num(v.upper));
    }
    for v in vars.iter().filter(|v| v.kind == VarKind::Binary && (v.lower > 0.0 || v.upper < 1.0)) {
        let _ = writeln!(out, " {} <= {} <= {}", lp_num(v.lower), v.name, lp_num(v.upper));
    }
    let binaries: Vec<&str> =
        vars.iter().filter(|v| v.kind == VarKind::Binary).map(|v| v.name.as_str()).collect();
    if !binaries.is_empty() {
        out.push_str("Binaries\n");
        for chunk in binaries.chunks(8) {
            let _ = writeln!(out, " {}", chunk.join(" "));
        }
    }
    out.push_str("End\n");
    Ok(out)
}

/// Right-aligned 12-character numeric field.
fn mps_num(v: f64) -> String {
    let plain = format!("{v}");
    if plain.len() <= 12 {
        return plain;
    }
    for digits in (1..=8).rev() {
        let s = format!("{v:.digits$e}");
        if s.len() <= 12 {
            return s;
        }
    }
    format!("{v:.0e}")
}

/// Fixed-form MPS. Names longer than eight characters do not fit the
/// fixed columns, so in that case columns and rows are renamed `C<n>` and
/// `R<n>` and the original names are listed in leading comment lines.
pub fn model_to_mps(model: &MilpModel) -> Result<String, ExportError> {
    check_names(model)?;
    let vars = model.vars();
    let rows: Vec<_> = model.all_rows().collect();
    let short = vars.iter().all(|v| v.name.len() <= 8) && rows.iter().all(|r| r.name.len() <= 8);
    let col_name = |i: usize| if short { vars[i].name.clone() } else { format!("C{}", i + 1) };
    let row_name = |i: usize| if short { rows[i].name.clone() } else { format!("R{}", i + 1) };

    let mut out = String::new();
    if !short {
        for (i, v) in vars.iter().enumerate() {
            let _ = writeln!(out, "* {} {}", col_name(i), v.name);
        }
        for (i, r) in rows.iter().enumerate() {
            let _ = writeln!(out, "* {} {}", row_name(i), r.name);
        }
    }
    let head: String = model.name.chars().filter(|c| !c.is_whitespace()).take(8).collect();
    let _ = writeln!(out, "NAME          {head}");
    out.push_str("ROWS\n");
    let _ = writeln!(out, " N  {OBJ_ROW}");
    for (i, r) in rows.iter().enumerate() {
        let t = match r.sense {
            Sense::Le => 'L',
            Sense::Ge => 'G',
            Sense::Eq => 'E',
        };
        let _ = writeln!(out, " {t}  {}", row_name(i));
    }

    let mut by_col: Vec<Vec<(String, f64)>> = vec![Vec::new(); vars.len()];
    for &(v, a) in model.objective() {
        by_col[v.0].push((OBJ_ROW.to_string(), a));
    }
    for (i, r) in rows.iter().enumerate() {
        for &(v, a) in &r.terms {
            by_col[v.0].push((row_name(i), a));
        }
    }
    out.push_str("COLUMNS\n");
    let mut in_int = false;
    let mut marker = 0;
    for (i, v) in vars.iter().enumerate() {
        let is_int = v.kind == VarKind::Binary;
        if is_int != in_int {
            let kind = if is_int { "'INTORG'" } else { "'INTEND'" };
            let _ = writeln!(out, "    {:<8}  {:<8}{:17}{kind}", format!("M{marker}"), "'MARKER'", "");
            marker += 1;
            in_int = is_int;
        }
        let entries = &by_col[i];
        if entries.is_empty() {
            // keep the column declared
            let _ = writeln!(out, "    {:<8}  {:<8}  {:>12}", col_name(i), OBJ_ROW, "0");
        }
        for (row, a) in entries {
            let _ = writeln!(out, "    {:<8}  {:<8}  {:>12}", col_name(i), row, mps_num(*a));
        }
    }
    if in_int {
        let _ = writeln!(out, "    {:<8}  {:<8}{:17}'INTEND'", format!("M{marker}"), "'MARKER'", "");
    }
    out.push_str("RHS\n");
    for (i, r) in rows.iter().enumerate() {
        if r.rhs != 0.0 {
            let _ = writeln!(out, "    {:<8}  {:<8}  {:>12}", "RHS", row_name(i), mps_num(r.rhs));
        }
    }
    out.push_str("BOUNDS\n");
    for (i, v) in vars.iter().enumerate() {
        let c = col_name(i);
        if v.kind == VarKind::Binary && v.lower == 0.0 && v.upper == 1.0 {
            let _ = writeln!(out, " BV {:<8}  {c:<8}", "BND");
            continue;
        }
        if v.lower == f64::NEG_INFINITY && v.upper == f64::INFINITY {
            let _ = writeln!(out, " FR {:<8}  {c:<8}", "BND");
            continue;
        }
        if v.lower == v.upper {
            let _ = writeln!(out, " FX {:<8}  {c:<8}  {:>12}", "BND", mps_num(v.lower));
            continue;
        }
        if v.lower == f64::NEG_INFINITY {
            let _ = writeln!(out, " MI {:<8}  {c:<8}", "BND");
        } else if v.lower != 0.0 {
            let _ = writeln!(out, " LO {:<8}  {c:<8}  {:>12}", "BND", mps_num(v.lower));
        }
        if v.upper != f64::INFINITY {
            let _ = writeln!(out, " UP {:<8}  {c:<8}  {:>12}", "BND", mps_num(v.upper));
        }
    }
    out.push_str("ENDATA\n");
    Ok(out)
}

pub fn export_model(model: &MilpModel, format: ModelFormat, path: impl AsRef<Path>) -> Result<(), ExportError> {
    let text = match format {
        ModelFormat::Lp => model_to_lp(model)?,
        ModelFormat::Mps => model_to_mps(model)?,
    };
    std::fs::write(path, text)?;
    Ok(())
}
