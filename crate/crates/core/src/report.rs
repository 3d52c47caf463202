//! Deterministic machine-readable output: a small JSON value type with
//! insertion-ordered keys and fixed float formatting, plus the solution CSV
//! writer/reader. Identical inputs produce byte-identical output.

use crate::error::GeomError;
use crate::geometry::{self, RadialGraph};
use crate::grid::{ScalarField, SphereGrid};
use crate::psi::{ConditionReport, PsiSpec};
use crate::solver::SolveReport;
use crate::spaceform::SpaceForm;
use crate::verify::{IdentitySuite, ScalingFit};
use std::fmt::Write as _;

#[derive(Debug, Clone, PartialEq)]
pub enum Json {
    Null,
    Bool(bool),
    Int(i64),
    Float(f64),
    Str(String),
    Array(Vec<Json>),
    /// Keys keep insertion order; no reordering, no deduplication.
    Object(Vec<(String, Json)>),
}

/// Fixed float rendering: 17 significant digits, scientific notation.
/// Non-finite values become strings (plain JSON has no NaN literal).
pub fn format_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "\"NaN\"".to_string()
    } else if x > 0.0 {
        "\"Inf\"".to_string()
    } else {
        "\"-Inf\"".to_string()
    }
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\r' => out.push_str("\\r"),
            c if (c as u32) < 0x20 => {
                let _ = write!(out, "\\u{:04x}", c as u32);
            }
            c => out.push(c),
        }
    }
    out
}

impl Json {
    pub fn object(fields: Vec<(&str, Json)>) -> Json {
        Json::Object(fields.into_iter().map(|(k, v)| (k.to_string(), v)).collect())
    }

    pub fn floats(values: impl IntoIterator<Item = f64>) -> Json {
        Json::Array(values.into_iter().map(Json::Float).collect())
    }

    pub fn ints(values: impl IntoIterator<Item = i64>) -> Json {
        Json::Array(values.into_iter().map(Json::Int).collect())
    }

    /// Renders with two-space indentation and a trailing newline.
    pub fn render(&self) -> String {
        let mut out = String::new();
        self.render_into(&mut out, 0);
        out.push('\n');
        out
    }

    fn render_into(&self, out: &mut String, indent: usize) {
        match self {
            Json::Null => out.push_str("null"),
            Json::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
            Json::Int(i) => {
                let _ = write!(out, "{i}");
            }
            Json::Float(x) => out.push_str(&format_float(*x)),
            Json::Str(s) => {
                let _ = write!(out, "\"{}\"", escape(s));
            }
            Json::Array(items) => {
                if items.is_empty() {
                    out.push_str("[]");
                    return;
                }
                out.push('[');
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    out.push('\n');
                    out.push_str(&"  ".repeat(indent + 1));
                    item.render_into(out, indent + 1);
                }
                out.push('\n');
                out.push_str(&"  ".repeat(indent));
                out.push(']');
            }
            Json::Object(fields) => {
                if fields.is_empty() {
                    out.push_str("{}");
                    return;
                }
                out.push('{');
                for (i, (k, v)) in fields.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    out.push('\n');
                    out.push_str(&"  ".repeat(indent + 1));
                    let _ = write!(out, "\"{}\": ", escape(k));
                    v.render_into(out, indent + 1);
                }
                out.push('\n');
                out.push_str(&"  ".repeat(indent));
                out.push('}');
            }
        }
    }
}

/// Canonical solve report JSON. Wall time is deliberately excluded so that
/// identical runs are byte-identical.
pub fn solve_report_json(report: &SolveReport) -> Json {
    Json::object(vec![
        ("converged", Json::Bool(report.converged)),
        (
            "iterations",
            Json::ints(report.iterations.iter().map(|&i| i as i64)),
        ),
        ("residual_sup", Json::Float(report.residual_sup)),
        ("residual_l2", Json::Float(report.residual_l2)),
        ("admissible", Json::Bool(report.admissible)),
        (
            "admissibility_warnings",
            Json::Int(report.admissibility_warnings as i64),
        ),
        ("annulus_ok", Json::Bool(report.annulus_ok)),
        ("annulus_low_margin", Json::Float(report.annulus_low_margin)),
        (
            "annulus_high_margin",
            Json::Float(report.annulus_high_margin),
        ),
        ("ellipticity_max", Json::Float(report.ellipticity_max)),
        (
            "ellipticity_min_abs",
            Json::Float(report.ellipticity_max.abs()),
        ),
    ])
}

pub fn condition_report_json(report: &ConditionReport) -> Json {
    Json::object(vec![
        ("barrier_low_ok", Json::Bool(report.barrier_low_ok)),
        ("barrier_high_ok", Json::Bool(report.barrier_high_ok)),
        ("monotone_ok", Json::Bool(report.monotone_ok)),
        ("strict_monotone", Json::Bool(report.strict_monotone)),
        ("all_ok", Json::Bool(report.all_ok())),
        ("barrier_low_margin", Json::Float(report.barrier_low_margin)),
        (
            "barrier_high_margin",
            Json::Float(report.barrier_high_margin),
        ),
        ("monotone_margin", Json::Float(report.monotone_margin)),
        (
            "violating_nodes",
            Json::ints(report.violating_nodes.iter().map(|&i| i as i64)),
        ),
    ])
}

pub fn identity_suite_json(suite: &IdentitySuite) -> Json {
    Json::object(vec![
        ("all_pass", Json::Bool(suite.all_pass)),
        (
            "checks",
            Json::Array(
                suite
                    .checks
                    .iter()
                    .map(|c| {
                        Json::object(vec![
                            ("name", Json::Str(c.name.to_string())),
                            ("max_error", Json::Float(c.max_error)),
                            ("tolerance", Json::Float(c.tolerance)),
                            ("pass", Json::Bool(c.pass)),
                        ])
                    })
                    .collect(),
            ),
        ),
    ])
}

pub fn scaling_fit_json(fit: &ScalingFit<f64>) -> Json {
    Json::object(vec![
        ("c", Json::Float(fit.c)),
        ("residual", Json::Float(fit.residual)),
        ("ratio_min", Json::Float(fit.ratio_min)),
        ("ratio_max", Json::Float(fit.ratio_max)),
        ("tolerance", Json::Float(fit.tolerance)),
        ("related", Json::Bool(fit.related)),
        ("identical", Json::Bool(fit.identical)),
    ])
}

/// Writes the solution CSV: node index, angular coordinates, z, v,
/// principal curvatures, elementary symmetric functions and the pointwise
/// residual F_m − ψ̄.
pub fn solution_csv(
    graph: &RadialGraph<'_, f64>,
    psi: &PsiSpec<f64>,
    m: usize,
) -> Result<String, GeomError> {
    let grid = graph.grid;
    let n = grid.dim();
    let shape = geometry::compute_shape(graph)?;
    let mut out = String::new();
    match n {
        1 => out.push_str("node_index,theta,z,v,lambda_1,S_1,residual\n"),
        _ => out.push_str("node_index,theta,phi,z,v,lambda_1,lambda_2,S_1,S_2,residual\n"),
    }
    for i in 0..grid.node_count() {
        let z = graph.z[i];
        let v = graph.form.t(z / 2.0);
        let residual = shape.sym[i][m] - psi.bar_value(i, grid.nodes[i], z);
        let _ = write!(out, "{i}");
        for k in 0..n {
            let _ = write!(out, ",{:.16e}", grid.nodes[i][k]);
        }
        let _ = write!(out, ",{z:.16e},{v:.16e}");
        for k in 0..n {
            let _ = write!(out, ",{:.16e}", shape.lambda[i][k]);
        }
        for k in 1..=n {
            let _ = write!(out, ",{:.16e}", shape.sym[i][k]);
        }
        let _ = writeln!(out, ",{residual:.16e}");
    }
    Ok(out)
}

/// A solution read back from CSV: the dimension and the radius field in node
/// order.
#[derive(Debug, Clone)]
pub struct CsvSolution {
    pub n: usize,
    pub z: Vec<f64>,
}

impl CsvSolution {
    /// Grid resolution implied by the node count (n=1: all nodes on one
    /// ring; n=2: rings × 2·rings longitudes).
    pub fn resolution(&self) -> usize {
        match self.n {
            1 => self.z.len(),
            _ => ((self.z.len() / 2) as f64).sqrt().round() as usize,
        }
    }

    pub fn into_graph<'g>(
        self,
        grid: &'g SphereGrid<f64>,
        form: SpaceForm,
    ) -> Result<RadialGraph<'g, f64>, GeomError> {
        RadialGraph::new(grid, form, ScalarField(self.z))
    }
}

/// Parses a CSV produced by `solution_csv`. Rows must be in node order.
pub fn read_solution_csv(text: &str) -> Result<CsvSolution, String> {
    let mut lines = text.lines();
    let header = lines.next().ok_or("empty CSV")?;
    let cols: Vec<&str> = header.split(',').collect();
    let n = if cols.contains(&"phi") { 2 } else { 1 };
    let z_col = cols
        .iter()
        .position(|&c| c == "z")
        .ok_or("missing z column")?;
    let mut z = Vec::new();
    for (row_no, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != cols.len() {
            return Err(format!(
                "row {}: expected {} fields, found {}",
                row_no + 2,
                cols.len(),
                fields.len()
            ));
        }
        let idx: usize = fields[0]
            .parse()
            .map_err(|e| format!("row {}: bad node index: {e}", row_no + 2))?;
        if idx != z.len() {
            return Err(format!("row {}: node index out of order", row_no + 2));
        }
        let value: f64 = fields[z_col]
            .parse()
            .map_err(|e| format!("row {}: bad z value: {e}", row_no + 2))?;
        z.push(value);
    }
    if z.is_empty() {
        return Err("CSV has no data rows".to_string());
    }
    Ok(CsvSolution { n, z })
}
