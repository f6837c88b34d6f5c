//! Report envelope emitted by the command-line tool, and CSV formatting.

use serde::Serialize;

use crate::correlations::DiscordResult;
use crate::error::{Error, Result};
use crate::io::MatrixJson;
use crate::measures::PurityReport;
use crate::merging::MergeLedger;
use crate::states::StateSpec;

pub const SCHEMA_VERSION: &str = "1";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

pub const CAVEAT_REGULARIZATION: &str =
    "regularization: kappa uses single-copy discord in place of its many-copy limit";
pub const CAVEAT_NOT_CONVERGED: &str = "optimizer did not converge; results are partial";
pub const CAVEAT_POVM_BOUND: &str = "povm_classical_corr is a lower bound from a rank-one POVM search";

/// Where the state came from: a named family or a raw matrix.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum InputSpec {
    Family(StateSpec),
    Matrix(MatrixJson),
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Results {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub discord: Option<DiscordResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ledger: Option<MergeLedger>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub purity: Option<PurityReport>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReportEnvelope {
    pub schema: &'static str,
    pub tool_version: &'static str,
    pub input_spec: InputSpec,
    pub results: Results,
    pub caveats: Vec<String>,
    /// Wall-clock time, present only on request so that reports stay
    /// byte-identical across runs by default.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<f64>,
}

impl ReportEnvelope {
    /// Builds the envelope and derives the caveat list from the results.
    pub fn new(input_spec: InputSpec, results: Results) -> Self {
        let mut caveats = Vec::new();
        if let Some(d) = &results.discord {
            if !d.converged {
                caveats.push(CAVEAT_NOT_CONVERGED.to_string());
            }
            if d.povm_classical_corr.is_some() {
                caveats.push(CAVEAT_POVM_BOUND.to_string());
            }
        }
        if results.purity.as_ref().is_some_and(|p| p.regularization_caveat) {
            caveats.push(CAVEAT_REGULARIZATION.to_string());
        }
        Self { schema: SCHEMA_VERSION, tool_version: TOOL_VERSION, input_spec, results, caveats, timing_ms: None }
    }

    pub fn converged(&self) -> bool {
        self.results.discord.as_ref().is_none_or(|d| d.converged)
    }

    /// Pretty JSON, refusing non-finite numbers.
    pub fn to_json(&self) -> Result<String> {
        let value = serde_json::to_value(self)?;
        if let Some(path) = first_non_finite(&value, String::new()) {
            return Err(Error::InvalidParams(format!("report field {path} is not finite")));
        }
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// serde_json turns NaN and infinities into `null`; any `null` in a
/// numeric report therefore marks a non-finite value.
fn first_non_finite(v: &serde_json::Value, path: String) -> Option<String> {
    match v {
        serde_json::Value::Null => Some(if path.is_empty() { "<root>".into() } else { path }),
        serde_json::Value::Array(items) => {
            items.iter().enumerate().find_map(|(i, x)| first_non_finite(x, format!("{path}[{i}]")))
        }
        serde_json::Value::Object(map) => map.iter().find_map(|(k, x)| first_non_finite(x, format!("{path}.{k}"))),
        _ => None,
    }
}

/// Twelve significant digits in scientific notation with a '.' separator.
pub fn sig12(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.11e}")
}

pub const SWEEP_HEADER: &str = "param,I,J,D,S(A|B),markup,kappa,status";

/// One row of a parameter sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub param: f64,
    pub values: Option<[f64; 6]>,
    pub status: String,
}

impl SweepRow {
    pub fn to_csv(&self) -> String {
        let cells: Vec<String> = match &self.values {
            Some(v) => v.iter().map(|&x| sig12(x)).collect(),
            None => vec!["nan".into(); 6],
        };
        format!("{},{},{}", sig12(self.param), cells.join(","), self.status)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sig12_format() {
        assert_eq!(sig12(0.5), "5.00000000000e-1");
        assert_eq!(sig12(-0.0), "0.00000000000e0");
        assert_eq!(sig12(1.0 / 3.0), "3.33333333333e-1");
        assert_eq!(sig12(f64::NAN), "nan");
    }

    #[test]
    fn nulls_are_located() {
        let v = serde_json::json!({"a": [1.0, null]});
        assert_eq!(first_non_finite(&v, String::new()).as_deref(), Some(".a[1]"));
        assert_eq!(first_non_finite(&serde_json::json!({"a": 1}), String::new()), None);
    }

    #[test]
    fn failed_row_is_flagged() {
        let row = SweepRow { param: 0.25, values: None, status: "error:TraceNotOne".into() };
        assert_eq!(row.to_csv(), "2.50000000000e-1,nan,nan,nan,nan,nan,nan,error:TraceNotOne");
    }
}
