//! File ingestion and writing for the two supported dialects.
//!
//! Both parsers are hand-rolled line scanners: the dialects carry no
//! quoting or escaping, and owning the scanner keeps every error message
//! anchored to an exact 1-based line number.

use std::collections::HashMap;
use std::path::Path;

use super::{Dataset, FeatureDescriptor, FeatureKind, Instance, Value};
use crate::{Error, Result};

/// Loads a dataset, dispatching on content: files whose first
/// non-comment, non-blank line starts with `@` parse as ARFF, everything
/// else as headered CSV. The dataset name is the file stem.
pub fn load_dataset(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".to_string());
    let display = path.display().to_string();

    let first_line = text
        .lines()
        .map(str::trim)
        .find(|l| !l.is_empty() && !l.starts_with('%'));
    match first_line {
        Some(l) if l.starts_with('@') => parse_arff(&display, &name, &text),
        Some(_) => parse_csv(&display, &name, &text),
        None => Err(Error::Ingest {
            path: display,
            line: 1,
            message: "file has no content".into(),
        }),
    }
}

fn ingest_err(path: &str, line: usize, message: impl Into<String>) -> Error {
    Error::Ingest {
        path: path.to_string(),
        line,
        message: message.into(),
    }
}

/// Headered CSV. Header tokens are `name:num` or `name:cat`; the last
/// column must be categorical and is taken as the class. Category sets
/// (and the class list) are the distinct values in file order.
fn parse_csv(path: &str, name: &str, text: &str) -> Result<Dataset> {
    let mut lines = text.lines().enumerate();

    let (header_ln, header) = lines
        .next()
        .ok_or_else(|| ingest_err(path, 1, "missing header"))?;
    let mut kinds = Vec::new();
    let mut names = Vec::new();
    for tok in header.split(',') {
        let tok = tok.trim();
        let (col_name, kind) = tok
            .rsplit_once(':')
            .ok_or_else(|| ingest_err(path, header_ln + 1, format!("header token {tok:?} lacks a :kind suffix")))?;
        let is_num = match kind.trim() {
            "num" => true,
            "cat" => false,
            other => {
                return Err(ingest_err(
                    path,
                    header_ln + 1,
                    format!("unknown column kind {other:?} (expected num or cat)"),
                ))
            }
        };
        names.push(col_name.trim().to_string());
        kinds.push(is_num);
    }
    if kinds.len() < 2 {
        return Err(ingest_err(path, header_ln + 1, "need at least one feature and a class column"));
    }
    if *kinds.last().unwrap() {
        return Err(ingest_err(path, header_ln + 1, "last column must be categorical (the class)"));
    }

    let n_cols = kinds.len();
    let n_features = n_cols - 1;

    // Interning tables, one per categorical column, built in file order.
    let mut cat_values: Vec<Vec<String>> = vec![Vec::new(); n_cols];
    let mut cat_lookup: Vec<HashMap<String, usize>> = vec![HashMap::new(); n_cols];
    let mut rows: Vec<(Vec<Value>, usize)> = Vec::new();

    for (idx, raw) in lines {
        let line_no = idx + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = raw.split(',').map(str::trim).collect();
        if fields.len() != n_cols {
            return Err(ingest_err(
                path,
                line_no,
                format!("row has {} fields, header declares {}", fields.len(), n_cols),
            ));
        }
        let mut values = Vec::with_capacity(n_features);
        for (col, field) in fields.iter().enumerate().take(n_features) {
            values.push(parse_csv_field(path, line_no, &names[col], field, kinds[col], &mut cat_values[col], &mut cat_lookup[col])?);
        }
        let class_field = fields[n_cols - 1];
        if class_field == "?" {
            return Err(ingest_err(path, line_no, "class value may not be missing"));
        }
        let class_id = intern(class_field, &mut cat_values[n_cols - 1], &mut cat_lookup[n_cols - 1]);
        rows.push((values, class_id));
    }

    let features: Vec<FeatureDescriptor> = (0..n_features)
        .map(|i| FeatureDescriptor {
            name: names[i].clone(),
            kind: if kinds[i] {
                FeatureKind::Numeric
            } else {
                FeatureKind::Categorical {
                    categories: cat_values[i].clone(),
                }
            },
        })
        .collect();
    let classes = cat_values[n_cols - 1].clone();
    if classes.is_empty() {
        return Err(ingest_err(path, header_ln + 2, "no data rows"));
    }

    let instances = rows
        .into_iter()
        .map(|(values, label)| Instance { values, label })
        .collect();
    Dataset::new(name, features, classes, instances)
}

fn parse_csv_field(
    path: &str,
    line_no: usize,
    col_name: &str,
    field: &str,
    is_num: bool,
    values: &mut Vec<String>,
    lookup: &mut HashMap<String, usize>,
) -> Result<Value> {
    if field == "?" {
        return Ok(Value::Missing);
    }
    if is_num {
        field
            .parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .map(Value::Num)
            .ok_or_else(|| ingest_err(path, line_no, format!("column {col_name}: {field:?} is not a number")))
    } else {
        Ok(Value::Cat(intern(field, values, lookup)))
    }
}

fn intern(field: &str, values: &mut Vec<String>, lookup: &mut HashMap<String, usize>) -> usize {
    if let Some(&i) = lookup.get(field) {
        return i;
    }
    let i = values.len();
    values.push(field.to_string());
    lookup.insert(field.to_string(), i);
    i
}

/// Minimal ARFF subset: `@relation`, `@attribute name numeric` or
/// `@attribute name {a,b,...}`, `@data`. Keywords are case-insensitive,
/// `%` starts a comment line, the last attribute is the class and must be
/// nominal. Values outside a declared domain are ingest errors.
fn parse_arff(path: &str, fallback_name: &str, text: &str) -> Result<Dataset> {
    let mut name = fallback_name.to_string();
    let mut columns: Vec<(String, Option<Vec<String>>)> = Vec::new(); // None = numeric
    let mut in_data = false;
    let mut rows: Vec<(Vec<Value>, usize)> = Vec::new();
    let mut class_domain: Vec<String> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }

        if !in_data {
            let lower = line.to_ascii_lowercase();
            if lower.starts_with("@relation") {
                if let Some(rest) = line.get("@relation".len()..) {
                    let rest = rest.trim();
                    if !rest.is_empty() {
                        name = rest.trim_matches(|c| c == '\'' || c == '"').to_string();
                    }
                }
            } else if lower.starts_with("@attribute") {
                let rest = line["@attribute".len()..].trim();
                columns.push(parse_arff_attribute(path, line_no, rest)?);
            } else if lower.starts_with("@data") {
                if columns.len() < 2 {
                    return Err(ingest_err(path, line_no, "need at least one feature and a class attribute"));
                }
                let (_, class_dom) = columns.last().unwrap();
                class_domain = class_dom
                    .clone()
                    .ok_or_else(|| ingest_err(path, line_no, "class attribute must be nominal"))?;
                in_data = true;
            } else {
                return Err(ingest_err(path, line_no, format!("unrecognized declaration {line:?}")));
            }
            continue;
        }

        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != columns.len() {
            return Err(ingest_err(
                path,
                line_no,
                format!("row has {} fields, schema declares {}", fields.len(), columns.len()),
            ));
        }
        let mut values = Vec::with_capacity(columns.len() - 1);
        for (col, field) in fields.iter().enumerate().take(columns.len() - 1) {
            let (col_name, domain) = &columns[col];
            values.push(parse_arff_field(path, line_no, col_name, field, domain.as_deref())?);
        }
        let class_field = *fields.last().unwrap();
        if class_field == "?" {
            return Err(ingest_err(path, line_no, "class value may not be missing"));
        }
        let class_field = class_field.trim_matches('\'');
        let label = class_domain
            .iter()
            .position(|c| c == class_field)
            .ok_or_else(|| ingest_err(path, line_no, format!("unknown class value {class_field:?}")))?;
        rows.push((values, label));
    }

    if !in_data {
        return Err(ingest_err(path, text.lines().count().max(1), "missing @data section"));
    }

    let features: Vec<FeatureDescriptor> = columns[..columns.len() - 1]
        .iter()
        .map(|(n, domain)| FeatureDescriptor {
            name: n.clone(),
            kind: match domain {
                None => FeatureKind::Numeric,
                Some(d) => FeatureKind::Categorical { categories: d.clone() },
            },
        })
        .collect();
    let instances = rows
        .into_iter()
        .map(|(values, label)| Instance { values, label })
        .collect();
    Dataset::new(name, features, class_domain, instances)
}

fn parse_arff_attribute(path: &str, line_no: usize, rest: &str) -> Result<(String, Option<Vec<String>>)> {
    // Either `name numeric` (also accepts real/integer) or `name {a,b,c}`.
    if let Some(brace) = rest.find('{') {
        let name = rest[..brace].trim().trim_matches('\'').to_string();
        let close = rest
            .rfind('}')
            .ok_or_else(|| ingest_err(path, line_no, "unterminated category set"))?;
        if close < brace {
            return Err(ingest_err(path, line_no, "malformed category set"));
        }
        let cats: Vec<String> = rest[brace + 1..close]
            .split(',')
            .map(|s| s.trim().trim_matches('\'').to_string())
            .filter(|s| !s.is_empty())
            .collect();
        if name.is_empty() || cats.is_empty() {
            return Err(ingest_err(path, line_no, "attribute needs a name and at least one category"));
        }
        Ok((name, Some(cats)))
    } else {
        let mut parts = rest.split_whitespace();
        let name = parts
            .next()
            .ok_or_else(|| ingest_err(path, line_no, "attribute needs a name"))?
            .trim_matches('\'')
            .to_string();
        let kind = parts
            .next()
            .ok_or_else(|| ingest_err(path, line_no, "attribute needs a type"))?
            .to_ascii_lowercase();
        match kind.as_str() {
            "numeric" | "real" | "integer" => Ok((name, None)),
            other => Err(ingest_err(path, line_no, format!("unsupported attribute type {other:?}"))),
        }
    }
}

fn parse_arff_field(
    path: &str,
    line_no: usize,
    col_name: &str,
    field: &str,
    domain: Option<&[String]>,
) -> Result<Value> {
    if field == "?" {
        return Ok(Value::Missing);
    }
    match domain {
        None => field
            .parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .map(Value::Num)
            .ok_or_else(|| ingest_err(path, line_no, format!("attribute {col_name}: {field:?} is not a number"))),
        Some(cats) => {
            let field = field.trim_matches('\'');
            cats.iter()
                .position(|c| c == field)
                .map(Value::Cat)
                .ok_or_else(|| {
                    ingest_err(path, line_no, format!("attribute {col_name}: value {field:?} not in declared set"))
                })
        }
    }
}

/// Writes the headered-CSV dialect `load_dataset` reads back.
pub fn save_csv(ds: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let mut out = String::new();
    for f in ds.features() {
        let kind = if f.is_numeric() { "num" } else { "cat" };
        out.push_str(&format!("{}:{},", f.name, kind));
    }
    out.push_str("class:cat\n");
    for inst in ds.instances() {
        for (f, v) in ds.features().iter().zip(&inst.values) {
            out.push_str(&render_value(f, v));
            out.push(',');
        }
        out.push_str(&ds.classes()[inst.label]);
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Writes the ARFF subset `load_dataset` reads back.
pub fn save_arff(ds: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let mut out = format!("@relation {}\n\n", ds.name());
    for f in ds.features() {
        match &f.kind {
            FeatureKind::Numeric => out.push_str(&format!("@attribute {} numeric\n", f.name)),
            FeatureKind::Categorical { categories } => {
                out.push_str(&format!("@attribute {} {{{}}}\n", f.name, categories.join(",")))
            }
        }
    }
    out.push_str(&format!("@attribute class {{{}}}\n\n@data\n", ds.classes().join(",")));
    for inst in ds.instances() {
        for (f, v) in ds.features().iter().zip(&inst.values) {
            out.push_str(&render_value(f, v));
            out.push(',');
        }
        out.push_str(&ds.classes()[inst.label]);
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

fn render_value(f: &FeatureDescriptor, v: &Value) -> String {
    match (v, &f.kind) {
        (Value::Missing, _) => "?".to_string(),
        (Value::Num(x), _) => format!("{x}"),
        (Value::Cat(c), FeatureKind::Categorical { categories }) => categories[*c].clone(),
        (Value::Cat(_), FeatureKind::Numeric) => unreachable!("validated at construction"),
    }
}
