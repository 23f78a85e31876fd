//! Fixed-format MPS.
//!
//! Field layout of every data line (1-based columns):
//!
//! | field | columns | content                    |
//! |-------|---------|----------------------------|
//! | 1     | 2-3     | row type or bound type     |
//! | 2     | 5-12    | name                       |
//! | 3     | 15-22   | name                       |
//! | 4     | 25-36   | number                     |
//!
//! The writer emits one coefficient per `COLUMNS` line, binaries between
//! `INTORG`/`INTEND` markers with an explicit `UP 1` bound, a zero
//! objective entry for columns without any coefficient, and a leading
//! `* formulation` comment carrying the model tag. Names longer than
//! eight characters are rejected. The reader splits on whitespace, so it
//! also accepts free-format files whose names contain no spaces.

use std::collections::HashMap;
use std::fmt::Write as _;

use super::{ColumnKind, MilpError, MilpModel, Row, Sense};

const OBJ: &str = "OBJ";

fn number(v: f64) -> String {
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

fn check_name(name: &str) -> Result<(), MilpError> {
    if name.is_empty() || name.len() > 8 || name.contains(char::is_whitespace) {
        return Err(MilpError::Unsupported(format!(
            "name `{name}` does not fit the 8-character MPS field"
        )));
    }
    Ok(())
}

fn line(out: &mut String, kind: &str, a: &str, b: &str, value: Option<f64>) {
    let mut s = format!(" {kind:<2} {a:<8}");
    if !b.is_empty() || value.is_some() {
        let _ = write!(s, "  {b:<8}");
    }
    if let Some(v) = value {
        let _ = write!(s, "  {:>12}", number(v));
    }
    out.push_str(s.trim_end());
    out.push('\n');
}

/// Serializes `model` as fixed-format MPS.
pub fn write_mps(model: &MilpModel) -> Result<String, MilpError> {
    for c in model.columns() {
        check_name(&c.name)?;
    }
    for r in model.rows() {
        check_name(&r.name)?;
    }
    let name = if model.name.is_empty() {
        "MODEL"
    } else {
        &model.name
    };
    let mut out = String::new();
    if !model.formulation.is_empty() {
        let _ = writeln!(out, "* formulation {}", model.formulation);
    }
    let _ = writeln!(out, "NAME          {name}");
    out.push_str("ROWS\n");
    line(&mut out, "N", OBJ, "", None);
    for r in model.rows() {
        let kind = match r.sense {
            Sense::Le => "L",
            Sense::Ge => "G",
            Sense::Eq => "E",
        };
        line(&mut out, kind, &r.name, "", None);
    }

    let mut by_column: Vec<Vec<(usize, f64)>> = vec![Vec::new(); model.columns().len()];
    for (i, r) in model.rows().iter().enumerate() {
        let mut merged: HashMap<usize, f64> = HashMap::new();
        for &(j, a) in &r.terms {
            *merged.entry(j).or_insert(0.0) += a;
        }
        for (j, a) in merged {
            if a != 0.0 {
                by_column[j].push((i, a));
            }
        }
    }
    out.push_str("COLUMNS\n");
    let mut in_int = false;
    let mut marker = 0;
    for (j, c) in model.columns().iter().enumerate() {
        let binary = c.kind == ColumnKind::Binary;
        if binary != in_int {
            let tag = if binary { "'INTORG'" } else { "'INTEND'" };
            let _ = writeln!(out, "    M{marker:<7}  'MARKER'                 {tag}");
            marker += 1;
            in_int = binary;
        }
        let entries = &mut by_column[j];
        entries.sort_unstable_by_key(|&(i, _)| i);
        if c.cost != 0.0 || entries.is_empty() {
            line(&mut out, "", &c.name, OBJ, Some(c.cost));
        }
        for &(i, a) in entries.iter() {
            line(&mut out, "", &c.name, &model.rows()[i].name, Some(a));
        }
    }
    if in_int {
        let _ = writeln!(out, "    M{marker:<7}  'MARKER'                 'INTEND'");
    }
    out.push_str("RHS\n");
    for r in model.rows() {
        if r.rhs != 0.0 {
            line(&mut out, "", "RHS", &r.name, Some(r.rhs));
        }
    }
    out.push_str("BOUNDS\n");
    for c in model.columns() {
        if c.lower == c.upper {
            line(&mut out, "FX", "BND", &c.name, Some(c.lower));
            continue;
        }
        if c.lower != 0.0 {
            line(&mut out, "LO", "BND", &c.name, Some(c.lower));
        }
        line(&mut out, "UP", "BND", &c.name, Some(c.upper));
    }
    out.push_str("ENDATA\n");
    Ok(out)
}

struct PendingColumn {
    name: String,
    integer: bool,
    cost: f64,
    lower: f64,
    upper: Option<f64>,
}

/// Parses an MPS document into a model. Integer columns must be bounded
/// within `[0, 1]` and continuous columns must have finite bounds.
pub fn read_mps(text: &str) -> Result<MilpModel, MilpError> {
    let err = |line: usize, message: String| MilpError::Mps { line, message };
    let mut name = String::new();
    let mut formulation = String::new();
    let mut section = "";
    let mut objective_row: Option<String> = None;
    let mut rows: Vec<Row> = Vec::new();
    let mut row_index: HashMap<String, usize> = HashMap::new();
    let mut columns: Vec<PendingColumn> = Vec::new();
    let mut column_index: HashMap<String, usize> = HashMap::new();
    let mut in_int = false;

    for (k, raw) in text.lines().enumerate() {
        let lineno = k + 1;
        if let Some(rest) = raw.strip_prefix('*') {
            if let Some(tag) = rest.trim().strip_prefix("formulation ") {
                formulation = tag.trim().to_string();
            }
            continue;
        }
        if raw.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = raw.split_whitespace().collect();
        if !raw.starts_with(' ') && !raw.starts_with('\t') {
            section = match fields[0] {
                "NAME" => {
                    name = fields.get(1).copied().unwrap_or("").to_string();
                    "NAME"
                }
                "ROWS" => "ROWS",
                "COLUMNS" => "COLUMNS",
                "RHS" => "RHS",
                "BOUNDS" => "BOUNDS",
                "RANGES" => return Err(err(lineno, "RANGES are not supported".into())),
                "ENDATA" => break,
                other => return Err(err(lineno, format!("unknown section `{other}`"))),
            };
            continue;
        }
        let number = |s: &str| -> Result<f64, MilpError> {
            s.parse::<f64>()
                .map_err(|_| err(lineno, format!("bad number `{s}`")))
        };
        match section {
            "ROWS" => {
                let [kind, row] = fields[..] else {
                    return Err(err(lineno, "expected `type name`".into()));
                };
                let sense = match kind {
                    "N" => {
                        if objective_row.is_none() {
                            objective_row = Some(row.to_string());
                        }
                        continue;
                    }
                    "L" => Sense::Le,
                    "G" => Sense::Ge,
                    "E" => Sense::Eq,
                    other => return Err(err(lineno, format!("unknown row type `{other}`"))),
                };
                if row_index.insert(row.to_string(), rows.len()).is_some() {
                    return Err(err(lineno, format!("duplicate row `{row}`")));
                }
                rows.push(Row::new(row, sense, 0.0, Vec::new()));
            }
            "COLUMNS" => {
                if fields.len() >= 3 && fields[1] == "'MARKER'" {
                    match fields[2] {
                        "'INTORG'" => in_int = true,
                        "'INTEND'" => in_int = false,
                        other => return Err(err(lineno, format!("unknown marker {other}"))),
                    }
                    continue;
                }
                if fields.len() != 3 && fields.len() != 5 {
                    return Err(err(
                        lineno,
                        "expected `column row value [row value]`".into(),
                    ));
                }
                let col = fields[0];
                let j = match column_index.get(col) {
                    Some(&j) => j,
                    None => {
                        column_index.insert(col.to_string(), columns.len());
                        columns.push(PendingColumn {
                            name: col.to_string(),
                            integer: in_int,
                            cost: 0.0,
                            lower: 0.0,
                            upper: None,
                        });
                        columns.len() - 1
                    }
                };
                for pair in fields[1..].chunks(2) {
                    let value = number(pair[1])?;
                    if Some(pair[0]) == objective_row.as_deref() {
                        columns[j].cost += value;
                    } else {
                        let &i = row_index
                            .get(pair[0])
                            .ok_or_else(|| err(lineno, format!("unknown row `{}`", pair[0])))?;
                        rows[i].terms.push((j, value));
                    }
                }
            }
            "RHS" => {
                if fields.len() != 3 && fields.len() != 5 {
                    return Err(err(lineno, "expected `set row value [row value]`".into()));
                }
                for pair in fields[1..].chunks(2) {
                    if Some(pair[0]) == objective_row.as_deref() {
                        continue;
                    }
                    let &i = row_index
                        .get(pair[0])
                        .ok_or_else(|| err(lineno, format!("unknown row `{}`", pair[0])))?;
                    rows[i].rhs = number(pair[1])?;
                }
            }
            "BOUNDS" => {
                if fields.len() < 3 {
                    return Err(err(lineno, "expected `type set column [value]`".into()));
                }
                let &j = column_index
                    .get(fields[2])
                    .ok_or_else(|| err(lineno, format!("unknown column `{}`", fields[2])))?;
                let value = || -> Result<f64, MilpError> {
                    number(
                        fields
                            .get(3)
                            .ok_or_else(|| err(lineno, "missing bound value".into()))?,
                    )
                };
                let c = &mut columns[j];
                match fields[0] {
                    "UP" => c.upper = Some(value()?),
                    "LO" => c.lower = value()?,
                    "FX" => {
                        let v = value()?;
                        c.lower = v;
                        c.upper = Some(v);
                    }
                    "BV" => {
                        c.integer = true;
                        c.lower = 0.0;
                        c.upper = Some(1.0);
                    }
                    other => return Err(err(lineno, format!("unsupported bound type `{other}`"))),
                }
            }
            _ => return Err(err(lineno, "data line outside a section".into())),
        }
    }

    let mut model = MilpModel::new(name, formulation);
    for c in columns {
        let (kind, upper) = if c.integer {
            let upper = c.upper.unwrap_or(1.0);
            if c.lower < 0.0 || upper > 1.0 {
                return Err(MilpError::Unsupported(format!(
                    "integer column `{}` is not binary",
                    c.name
                )));
            }
            (ColumnKind::Binary, upper)
        } else {
            let upper = c.upper.ok_or_else(|| {
                MilpError::Unsupported(format!("column `{}` has no upper bound", c.name))
            })?;
            (ColumnKind::Continuous, upper)
        };
        model.add_column(c.name, kind, c.lower, upper, c.cost)?;
    }
    for r in rows {
        model.add_row(r)?;
    }
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> MilpModel {
        let mut m = MilpModel::new("sample", "demo");
        let a = m.add_binary("a", -5.0).unwrap();
        let b = m.add_binary("b", 0.0).unwrap();
        let y = m
            .add_column("y", ColumnKind::Continuous, -2.5, 10.0, 1.0)
            .unwrap();
        let w = m
            .add_column("w", ColumnKind::Continuous, 3.0, 3.0, 0.0)
            .unwrap();
        m.add_row(Row::new("r1", Sense::Le, 4.0, vec![(a, 2.0), (b, 3.0)]))
            .unwrap();
        m.add_row(Row::new("r2", Sense::Ge, -1.0, vec![(y, 1.0), (a, -0.125)]))
            .unwrap();
        m.add_row(Row::new("r3", Sense::Eq, 0.0, vec![(y, 1.0), (w, -1.0)]))
            .unwrap();
        m
    }

    #[test]
    fn round_trip() {
        let m = sample();
        let text = write_mps(&m).unwrap();
        let back = read_mps(&text).unwrap();
        let mut canonical = m.clone();
        canonical.canonicalize();
        assert_eq!(back, canonical);
        assert_eq!(write_mps(&back).unwrap(), text);
    }

    #[test]
    fn field_layout() {
        let text = write_mps(&sample()).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines.contains(&" L  r1"));
        assert!(lines.contains(&"    a         OBJ                 -5"));
        assert!(lines.contains(&"    a         r1                   2"));
        assert!(lines.contains(&" UP BND       a                    1"));
        assert!(lines.contains(&" FX BND       w                    3"));
        let coefficient = lines
            .iter()
            .find(|l| l.starts_with("    y         r2"))
            .unwrap();
        assert_eq!(&coefficient[24..36], "           1");
    }

    #[test]
    fn long_names_are_rejected() {
        let mut m = MilpModel::new("m", "");
        m.add_binary("waytoolong", 1.0).unwrap();
        assert!(matches!(write_mps(&m), Err(MilpError::Unsupported(_))));
    }

    #[test]
    fn numbers_fit_the_field() {
        for v in [1.0 / 3.0, -1234567.891011, 1e-20, 42.0] {
            let s = number(v);
            assert!(s.len() <= 12, "{s}");
            let back: f64 = s.parse().unwrap();
            assert!((back - v).abs() <= 1e-7 * v.abs().max(1.0));
        }
    }

    #[test]
    fn reader_errors_have_lines() {
        let bad = "NAME x\nROWS\n N OBJ\n L r1\nCOLUMNS\n    a  r9  1\nENDATA\n";
        assert!(matches!(read_mps(bad), Err(MilpError::Mps { line: 6, .. })));
    }
}
