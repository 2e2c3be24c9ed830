//! File ingestion and machine-readable serialization: model specs (JSON),
//! contingency tables (CSV), coordinate vectors keyed by canonical labels,
//! and JSON renderings of every report type.
//!
//! Exactness rule: rationals are serialized as `p/q` strings wherever a
//! value is exact (facet coefficients, face reports, exact characteristic
//! values); floating-point numbers appear only for genuinely approximate
//! quantities. All maps serialize with sorted keys, so equal inputs always
//! produce byte-identical output.

use std::collections::BTreeMap;
use std::path::Path;

use num::BigRational;
use serde::Deserialize;
use serde_json::{json, Value};

use crate::bayes::{BayesReport, EdfReport, RankEntry};
use crate::charfun::{CharFunValue, ProbeReport};
use crate::error::{Error, Result};
use crate::model::{Cell, ContingencyTable, GeneratingClass, Model, VarSet, Variable};
use crate::normalizers::{DecomposableStructure, LogNormalizer};
use crate::polytope::{AffineForm, FaceReport, FacetList, FacetProvenance};
use crate::rational::{format_q, parse_q, q_from_f64};

#[derive(Deserialize)]
struct VariableSpec {
    name: String,
    card: u32,
}

#[derive(Deserialize)]
struct ModelSpec {
    variables: Vec<VariableSpec>,
    generators: Vec<Vec<String>>,
}

/// A parsed model plus any normalization warnings (duplicate or dominated
/// generators that were dropped).
pub struct ParsedModel {
    pub model: Model,
    pub warnings: Vec<String>,
}

/// Parse a model spec from JSON text.
pub fn parse_model_str(text: &str) -> Result<ParsedModel> {
    let spec: ModelSpec =
        serde_json::from_str(text).map_err(|e| Error::Io(format!("model spec: {e}")))?;
    let variables: Vec<Variable> = spec
        .variables
        .iter()
        .map(|v| Variable {
            name: v.name.clone(),
            card: v.card,
        })
        .collect();
    let name_index: BTreeMap<&str, usize> = spec
        .variables
        .iter()
        .enumerate()
        .map(|(i, v)| (v.name.as_str(), i))
        .collect();
    let mut raw_sets: Vec<VarSet> = Vec::new();
    for gen in &spec.generators {
        let mut s = VarSet::EMPTY;
        if gen.is_empty() {
            return Err(Error::InvalidModel("empty generator".into()));
        }
        for name in gen {
            let &i = name_index
                .get(name.as_str())
                .ok_or_else(|| Error::InvalidModel(format!("unknown variable {name:?}")))?;
            s.insert(i);
        }
        raw_sets.push(s);
    }

    let gc = GeneratingClass::new(variables, raw_sets.clone())?;
    let mut warnings = Vec::new();
    let mut seen: Vec<VarSet> = Vec::new();
    for (i, &s) in raw_sets.iter().enumerate() {
        if seen.contains(&s) {
            warnings.push(format!(
                "generator #{}: duplicate generator {} ignored",
                i + 1,
                gc.set_name(s)
            ));
        } else if !gc.generators().contains(&s) {
            warnings.push(format!(
                "generator #{}: {} is contained in another generator and was dropped",
                i + 1,
                gc.set_name(s)
            ));
        }
        seen.push(s);
    }
    Ok(ParsedModel {
        model: Model::new(gc),
        warnings,
    })
}

pub fn parse_model_path(path: &Path) -> Result<ParsedModel> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_model_str(&text)
}

/// Model spec JSON (re-parseable) with derived structure attached.
pub fn model_to_json(model: &Model) -> Value {
    let gc = model.gc();
    let variables: Vec<Value> = gc
        .variables()
        .iter()
        .map(|v| json!({"name": v.name, "card": v.card}))
        .collect();
    let set_names = |s: &VarSet| -> Vec<String> {
        s.indices()
            .iter()
            .map(|&i| gc.variables()[i].name.clone())
            .collect()
    };
    let generators: Vec<Value> = gc.generators().iter().map(|g| json!(set_names(g))).collect();
    let closure: Vec<Value> = gc.closure().iter().map(|g| json!(set_names(g))).collect();
    let mut out = json!({
        "variables": variables,
        "generators": generators,
        "closure": closure,
        "j_labels": model.labels(),
        "j_count": model.dim(),
        "cell_count": gc.cell_count(),
    });
    match crate::normalizers::junction_structure(model) {
        Ok(ds) => {
            out["decomposable"] = json!(true);
            out["cliques"] = json!(ds
                .cliques
                .iter()
                .map(&set_names)
                .collect::<Vec<_>>());
            out["separators"] = json!(ds
                .separators
                .iter()
                .map(|(s, nu)| json!({"set": set_names(s), "multiplicity": nu}))
                .collect::<Vec<_>>());
        }
        Err(_) => {
            out["decomposable"] = json!(false);
        }
    }
    out
}

/// Parse a contingency table from CSV text: one column per variable plus a
/// `count` column, in any column order; duplicate rows accumulate; missing
/// cells are zero.
pub fn parse_table_str(text: &str, model: &Model) -> Result<ContingencyTable> {
    let gc = model.gc();
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| Error::Io(format!("table csv: {e}")))?
        .clone();
    let mut var_columns: Vec<Option<usize>> = vec![None; gc.var_count()];
    let mut count_column: Option<usize> = None;
    for (col, header) in headers.iter().enumerate() {
        if header == "count" {
            count_column = Some(col);
        } else if let Some(v) = gc.var_index(header) {
            var_columns[v] = Some(col);
        } else {
            return Err(Error::InvalidTable(format!("unknown column {header:?}")));
        }
    }
    let count_column =
        count_column.ok_or_else(|| Error::InvalidTable("missing `count` column".into()))?;
    for (v, col) in var_columns.iter().enumerate() {
        if col.is_none() {
            return Err(Error::InvalidTable(format!(
                "missing column for variable {:?}",
                gc.variables()[v].name
            )));
        }
    }

    let mut entries: Vec<(Cell, u64)> = Vec::new();
    for (rownum, record) in reader.records().enumerate() {
        let row = rownum + 2; // 1-based, after the header line
        let record = record.map_err(|e| Error::Io(format!("table csv row {row}: {e}")))?;
        let mut levels = vec![0u32; gc.var_count()];
        for (v, col) in var_columns.iter().enumerate() {
            let field = record.get(col.unwrap()).unwrap_or("");
            levels[v] = field.parse::<u32>().map_err(|_| {
                Error::InvalidTable(format!(
                    "row {row}: bad level {field:?} for variable {:?}",
                    gc.variables()[v].name
                ))
            })?;
        }
        let count_field = record.get(count_column).unwrap_or("");
        let count: i64 = count_field
            .parse()
            .map_err(|_| Error::InvalidTable(format!("row {row}: bad count {count_field:?}")))?;
        if count < 0 {
            return Err(Error::InvalidTable(format!(
                "row {row}: negative count {count}"
            )));
        }
        let cell = model
            .cell(levels)
            .map_err(|e| Error::InvalidTable(format!("row {row}: {e}")))?;
        entries.push((cell, count as u64));
    }
    ContingencyTable::new(gc, entries)
}

pub fn parse_table_path(path: &Path, model: &Model) -> Result<ContingencyTable> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_table_str(&text, model)
}

/// Render a table as CSV in canonical cell order (nonzero cells only).
pub fn table_to_csv(model: &Model, table: &ContingencyTable) -> String {
    let gc = model.gc();
    let mut out = String::new();
    let names: Vec<&str> = gc.variables().iter().map(|v| v.name.as_str()).collect();
    out.push_str(&names.join(","));
    out.push_str(",count\n");
    for (cell, n) in table.entries() {
        let levels: Vec<String> = cell.0.iter().map(|l| l.to_string()).collect();
        out.push_str(&levels.join(","));
        out.push_str(&format!(",{n}\n"));
    }
    out
}

/// Parse a coordinate label of this model into a cell.
pub fn parse_label(model: &Model, label: &str) -> Result<Cell> {
    let levels: Vec<u32> = if label.contains('.') {
        label
            .split('.')
            .map(|d| {
                d.parse()
                    .map_err(|_| Error::Io(format!("bad label {label:?}")))
            })
            .collect::<Result<_>>()?
    } else {
        label
            .chars()
            .map(|c| {
                c.to_digit(10)
                    .ok_or_else(|| Error::Io(format!("bad label {label:?}")))
            })
            .collect::<Result<_>>()?
    };
    model.cell(levels)
}

/// Parse a vector over `J` from a JSON object keyed by canonical labels.
/// Every coordinate must be present exactly once; values are `p/q` strings
/// or JSON numbers.
pub fn parse_coordinate_vector(text: &str, model: &Model) -> Result<Vec<BigRational>> {
    let raw: BTreeMap<String, Value> =
        serde_json::from_str(text).map_err(|e| Error::Io(format!("coordinate vector: {e}")))?;
    let mut out = vec![None; model.dim()];
    for (label, value) in &raw {
        let cell = parse_label(model, label)?;
        let k = model
            .index_set()
            .position(&cell)
            .ok_or_else(|| Error::Io(format!("label {label:?} is not a coordinate of J")))?;
        let q = match value {
            Value::String(s) => parse_q(s)?,
            Value::Number(n) => {
                if let Some(i) = n.as_i64() {
                    BigRational::from_integer(i.into())
                } else {
                    q_from_f64(n.as_f64().unwrap_or(f64::NAN))?
                }
            }
            other => {
                return Err(Error::Io(format!(
                    "coordinate {label:?} must be a string or number, got {other}"
                )))
            }
        };
        if out[k].replace(q).is_some() {
            return Err(Error::Io(format!("duplicate coordinate {label:?}")));
        }
    }
    out.into_iter()
        .enumerate()
        .map(|(k, v)| v.ok_or_else(|| Error::Io(format!("missing coordinate {}", model.label(k)))))
        .collect()
}

/// Render a rational vector over `J` as a JSON object keyed by labels.
pub fn coordinate_vector_to_json(model: &Model, m: &[BigRational]) -> Value {
    let map: BTreeMap<String, String> = m
        .iter()
        .enumerate()
        .map(|(k, v)| (model.label(k), format_q(v)))
        .collect();
    json!(map)
}

fn form_to_json(model: &Model, form: &AffineForm) -> Value {
    let coeffs: BTreeMap<String, String> = form
        .coeffs
        .iter()
        .enumerate()
        .filter(|(_, c)| !num::Zero::is_zero(*c))
        .map(|(k, c)| (model.label(k), format_q(c)))
        .collect();
    json!({
        "label": form.label,
        "constant": format_q(&form.constant),
        "coeffs": coeffs,
    })
}

/// Facet catalogue as JSON, including family counts for cycle catalogues.
pub fn facets_to_json(model: &Model, list: &FacetList) -> Value {
    let facets: Vec<Value> = list.forms.iter().map(|f| form_to_json(model, f)).collect();
    let mut out = json!({
        "provenance": list.provenance.as_str(),
        "complete": list.complete,
        "count": list.forms.len(),
        "facets": facets,
    });
    if list.provenance == FacetProvenance::Cycle {
        let odd = list
            .forms
            .iter()
            .filter(|f| f.label.starts_with("odd"))
            .count();
        out["edge_facet_count"] = json!(list.forms.len() - odd);
        out["odd_facet_count"] = json!(odd);
    }
    out
}

/// Facet catalogue as fixed-width text for terminal viewing.
pub fn facets_to_table(model: &Model, list: &FacetList) -> String {
    let mut out = format!(
        "# {} facets ({}, {})\n",
        list.forms.len(),
        list.provenance.as_str(),
        if list.complete { "complete" } else { "partial" }
    );
    for f in &list.forms {
        let mut terms = vec![format_q(&f.constant)];
        for (k, c) in f.coeffs.iter().enumerate() {
            if !num::Zero::is_zero(c) {
                terms.push(format!("{} m[{}]", format_q(c), model.label(k)));
            }
        }
        out.push_str(&format!("{}: {} >= 0\n", f.label, terms.join(" + ")));
    }
    out
}

pub fn face_report_to_json(model: &Model, report: &FaceReport) -> Value {
    let point: BTreeMap<String, String> = report
        .point
        .iter()
        .enumerate()
        .map(|(k, v)| (model.label(k), format_q(v)))
        .collect();
    json!({
        "point": point,
        "active_facets": report.active_facets,
        "face_cells": report.face_cells.iter().map(|c| format!("{c:?}")).collect::<Vec<_>>(),
        "dimension": report.dimension,
    })
}

pub fn charfun_to_json(value: &CharFunValue) -> Value {
    let factors = |fs: &[crate::charfun::JcFactor]| -> Vec<Value> {
        fs.iter()
            .map(|f| json!({"label": f.form.label, "exponent": f.exponent}))
            .collect()
    };
    json!({
        "value": value.value,
        "exact": value.exact.as_ref().map(format_q),
        "method": value.method.as_str(),
        "numerator": factors(&value.numerator),
        "denominator": factors(&value.denominator),
    })
}

pub fn log_normalizer_to_json(norm: &LogNormalizer) -> Value {
    let factors: Vec<Value> = norm
        .gamma_factors
        .iter()
        .map(|f| json!({"label": f.label, "arg": f.arg, "weight": f.weight}))
        .collect();
    json!({
        "log_value": norm.log_value,
        "alpha": norm.alpha,
        "method": norm.method.as_str(),
        "gamma_factors": factors,
    })
}

pub fn decomposable_structure_to_json(model: &Model, ds: &DecomposableStructure) -> Value {
    let gc = model.gc();
    let set_names = |s: &VarSet| -> Vec<String> {
        s.indices()
            .iter()
            .map(|&i| gc.variables()[i].name.clone())
            .collect()
    };
    json!({
        "cliques": ds.cliques.iter().map(&set_names).collect::<Vec<_>>(),
        "separators": ds
            .separators
            .iter()
            .map(|(s, nu)| json!({"set": set_names(s), "multiplicity": nu}))
            .collect::<Vec<_>>(),
        "elimination_order": ds
            .elimination_order
            .iter()
            .map(|&v| gc.variables()[v].name.clone())
            .collect::<Vec<_>>(),
    })
}

pub fn bayes_report_to_json(report: &BayesReport) -> Value {
    json!({
        "log_b": report.log_b,
        "alpha": report.alpha,
        "k1": report.k1,
        "k2": report.k2,
        "exponent": report.exponent,
        "d_edf": report.d_edf,
        "verdict": report.verdict.map(|v| v.as_str()),
    })
}

pub fn edf_report_to_json(report: &EdfReport) -> Value {
    json!({
        "edf_index1": report.edf_index1,
        "edf_index2": report.edf_index2,
        "d_edf": report.d_edf,
    })
}

pub fn rank_to_json(entries: &[RankEntry]) -> Value {
    let rows: Vec<Value> = entries
        .iter()
        .map(|e| {
            json!({
                "name": e.name,
                "dim": e.dim,
                "k": e.k,
                "score": e.score,
                "edf_index": e.edf_index,
                "error": e.error,
            })
        })
        .collect();
    json!(rows)
}

pub fn probe_report_to_json(report: &ProbeReport, face_dimension: usize, ambient: usize) -> Value {
    json!({
        "face_dimension": face_dimension,
        "expected_slope": -((ambient - face_dimension) as f64),
        "fitted_slope": report.fitted_slope,
        "plateau_estimate": report.plateau_estimate,
        "lambdas": report.lambdas,
        "log_jc": report.log_jc,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    const A3_SPEC: &str = r#"{
        "variables": [
            {"name": "a", "card": 2},
            {"name": "b", "card": 2},
            {"name": "c", "card": 2}
        ],
        "generators": [["a", "b"], ["b", "c"]]
    }"#;

    #[test]
    fn model_round_trip() {
        let parsed = parse_model_str(A3_SPEC).unwrap();
        assert!(parsed.warnings.is_empty());
        assert_eq!(parsed.model.dim(), 5);
        let rendered = serde_json::to_string(&model_to_json(&parsed.model)).unwrap();
        let reparsed = parse_model_str(&rendered).unwrap();
        assert_eq!(reparsed.model.dim(), 5);
        assert_eq!(
            reparsed.model.gc().generators(),
            parsed.model.gc().generators()
        );
    }

    #[test]
    fn duplicate_and_dominated_generators_warn() {
        let spec = r#"{
            "variables": [{"name":"a","card":2},{"name":"b","card":2}],
            "generators": [["a","b"], ["a"], ["a","b"]]
        }"#;
        let parsed = parse_model_str(spec).unwrap();
        assert_eq!(parsed.model.gc().generators().len(), 1);
        assert_eq!(parsed.warnings.len(), 2);
        assert!(parsed.warnings[0].contains("dropped"));
        assert!(parsed.warnings[1].contains("duplicate"));
    }

    #[test]
    fn table_round_trip_and_errors() {
        let model = parse_model_str(A3_SPEC).unwrap().model;
        let csv = "a,b,c,count\n0,0,0,3\n1,1,0,2\n1,1,0,1\n";
        let table = parse_table_str(csv, &model).unwrap();
        assert_eq!(table.total(), 6);
        assert_eq!(table.count(&Cell(vec![1, 1, 0])), 3);

        let rendered = table_to_csv(&model, &table);
        let reparsed = parse_table_str(&rendered, &model).unwrap();
        assert_eq!(reparsed.total(), table.total());
        assert_eq!(
            reparsed.count(&Cell(vec![0, 0, 0])),
            table.count(&Cell(vec![0, 0, 0]))
        );

        let bad = parse_table_str("a,b,c,count\n0,0,0,-1\n", &model).unwrap_err();
        assert!(bad.to_string().contains("row 2"), "{bad}");
        assert!(parse_table_str("a,b,count\n0,0,1\n", &model).is_err());
        assert!(parse_table_str("a,b,c,count\n0,0,2,1\n", &model).is_err());
    }

    #[test]
    fn coordinate_vector_round_trip() {
        let model = parse_model_str(A3_SPEC).unwrap().model;
        let m = vec![q(1, 2), q(1, 2), q(1, 2), q(1, 4), q(1, 4)];
        let rendered = serde_json::to_string(&coordinate_vector_to_json(&model, &m)).unwrap();
        let parsed = parse_coordinate_vector(&rendered, &model).unwrap();
        assert_eq!(parsed, m);

        let missing = r#"{"100": "1/2"}"#;
        assert!(parse_coordinate_vector(missing, &model).is_err());
        let unknown = r#"{"111": "1/2"}"#;
        assert!(parse_coordinate_vector(unknown, &model).is_err());
    }
}
