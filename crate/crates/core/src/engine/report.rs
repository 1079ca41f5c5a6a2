use std::fmt::Write;

use serde::Serialize;
use serde_json::value::RawValue;

use super::catalog::CatalogEntry;
use super::EngineError;
use crate::dsl::{evaluate, Env, RelOp};
use crate::quantity::{format_sig9, CoincidenceVerdict, Quantity};
use crate::registry::ConstantRegistry;
use crate::scalar::Real;

/// One evaluated catalog row.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow<T> {
    pub name: String,
    pub paper_tag: String,
    pub lhs: Quantity<T>,
    pub rhs: Quantity<T>,
    pub verdict: CoincidenceVerdict<T>,
    /// The registry derives one of this row's symbols from the row itself.
    pub definitional: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoincidenceReport<T> {
    pub rows: Vec<ReportRow<T>>,
    pub registry_fingerprint: String,
    pub overall_pass: bool,
}

impl<T: Real> CoincidenceReport<T> {
    pub fn row(&self, name: &str) -> Option<&ReportRow<T>> {
        self.rows.iter().find(|r| r.name == name)
    }

    /// Rows that fail and are not definitional; these decide the exit code.
    pub fn live_failures(&self) -> impl Iterator<Item = &ReportRow<T>> {
        self.rows.iter().filter(|r| !r.verdict.pass && !r.definitional)
    }

    pub fn to_json(&self) -> String {
        let rows = self
            .rows
            .iter()
            .map(|r| JsonRow {
                name: &r.name,
                paper_tag: &r.paper_tag,
                lhs: JsonQuantity::from(&r.lhs),
                rhs: JsonQuantity::from(&r.rhs),
                log10_ratio: r.verdict.log10_ratio.as_f64(),
                tol_decades: r.verdict.tol_decades.as_f64(),
                dimensions_match: r.verdict.dimensions_match,
                pass: r.verdict.pass,
                definitional: r.definitional,
            })
            .collect();
        let doc = JsonReport {
            registry_fingerprint: &self.registry_fingerprint,
            overall_pass: self.overall_pass,
            rows,
        };
        serde_json::to_string_pretty(&doc).expect("report serializes")
    }

    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<9} {:<34} {:>16} {:>16} {:>10} {:>6}  {}",
            "name", "tag", "lhs", "rhs", "log10", "tol", "verdict"
        );
        for r in &self.rows {
            let verdict = match (r.verdict.pass, r.verdict.dimensions_match) {
                (_, false) => "FAIL (dimension)",
                (true, _) => "pass",
                (false, _) => "FAIL",
            };
            let tag: String = r.paper_tag.chars().take(34).collect();
            let _ = writeln!(
                out,
                "{:<9} {:<34} {:>16.6e} {:>16.6e} {:>+10.4} {:>6.2}  {}{}",
                r.name,
                tag,
                r.lhs.magnitude().as_f64(),
                r.rhs.magnitude().as_f64(),
                r.verdict.log10_ratio.as_f64(),
                r.verdict.tol_decades.as_f64(),
                verdict,
                if r.definitional { " [definitional]" } else { "" }
            );
        }
        let _ = writeln!(out, "registry {}", self.registry_fingerprint);
        let _ = writeln!(out, "overall: {}", if self.overall_pass { "PASS" } else { "FAIL" });
        out
    }
}

#[derive(Serialize)]
struct JsonReport<'a> {
    registry_fingerprint: &'a str,
    overall_pass: bool,
    rows: Vec<JsonRow<'a>>,
}

#[derive(Serialize)]
struct JsonRow<'a> {
    name: &'a str,
    paper_tag: &'a str,
    lhs: JsonQuantity,
    rhs: JsonQuantity,
    log10_ratio: f64,
    tol_decades: f64,
    dimensions_match: bool,
    pass: bool,
    definitional: bool,
}

/// `{value, dimension}` with the value as a 9-significant-digit JSON number.
#[derive(Serialize)]
pub struct JsonQuantity {
    value: Box<RawValue>,
    dimension: String,
}

impl<T: Real> From<&Quantity<T>> for JsonQuantity {
    fn from(q: &Quantity<T>) -> Self {
        let text = format_sig9(q.magnitude().as_f64());
        Self {
            value: RawValue::from_string(text).expect("scientific notation is a JSON number"),
            dimension: q.dimension().to_string(),
        }
    }
}

/// Evaluates both sides of every entry. Row order follows `entries`; the
/// result depends only on `(entries, registry)`.
pub fn run_catalog<T: Real>(
    entries: &[CatalogEntry],
    registry: &ConstantRegistry<T>,
    tol_override: Option<f64>,
) -> Result<CoincidenceReport<T>, EngineError> {
    let base = Env::new(registry);
    let mut rows = Vec::with_capacity(entries.len());
    for entry in entries {
        let rel = &entry.relation;
        let fail = |source| EngineError::Entry { name: entry.name().to_string(), source };
        let env = base.with_bindings(rel).map_err(fail)?;
        let lhs = evaluate(&rel.lhs, &env).map_err(fail)?;
        let rhs = evaluate(&rel.rhs, &env).map_err(fail)?;
        let tol = match (rel.operator, tol_override) {
            (RelOp::OrderOfMagnitude, Some(t)) => t,
            _ => rel.tol_decades(),
        };
        let verdict = lhs
            .coincide(&rhs, T::of(tol))
            .map_err(|e| fail(crate::dsl::EvalError::Quantity(e)))?;
        let definitional = rel.defines.as_deref().is_some_and(|s| registry.is_derived(s));
        rows.push(ReportRow {
            name: entry.name().to_string(),
            paper_tag: entry.paper_tag().to_string(),
            lhs,
            rhs,
            verdict,
            definitional,
        });
    }
    let overall_pass = rows.iter().all(|r| r.verdict.pass);
    Ok(CoincidenceReport { rows, registry_fingerprint: registry.fingerprint(), overall_pass })
}
