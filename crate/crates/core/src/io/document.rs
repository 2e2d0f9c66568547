use std::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::theta::PeriodMatrix;
use crate::C64;

/// Documents whose `Omega` is asymmetric beyond this (relative to `max |Omega_ij|`)
/// are rejected; smaller asymmetry is averaged away.
pub const ASYMMETRY_TOL: f64 = 1e-9;

/// On-disk form of a period matrix: entries as `[re, im]` pairs, row by row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PeriodMatrixDocument {
    pub g: usize,
    pub omega: Vec<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<String>,
}

impl PeriodMatrixDocument {
    pub fn from_period(p: &PeriodMatrix) -> Self {
        let g = p.g();
        Self {
            g,
            omega: (0..g)
                .map(|i| (0..g).map(|j| [p.entry(i, j).re, p.entry(i, j).im]).collect())
                .collect(),
            label: None,
            provenance: None,
        }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn with_provenance(mut self, note: impl Into<String>) -> Self {
        self.provenance = Some(note.into());
        self
    }

    /// Validates shape, symmetry and positivity; symmetrizes small asymmetry.
    pub fn to_period(&self) -> Result<PeriodMatrix> {
        let g = self.g;
        if g == 0 {
            return Err(Error::invalid("g must be at least 1"));
        }
        if self.omega.len() != g {
            return Err(Error::invalid(format!("omega has {} rows, expected {g}", self.omega.len())));
        }
        if let Some((i, row)) = self.omega.iter().enumerate().find(|(_, r)| r.len() != g) {
            return Err(Error::invalid(format!("omega row {i} has {} entries, expected {g}", row.len())));
        }
        let mut omega: Vec<C64> = self.omega.iter().flatten().map(|[re, im]| C64::new(*re, *im)).collect();
        let max_abs = omega.iter().map(|z| z.norm()).fold(0.0, f64::max);
        for i in 0..g {
            for j in (i + 1)..g {
                let gap = (omega[i * g + j] - omega[j * g + i]).norm();
                if gap > ASYMMETRY_TOL * max_abs {
                    return Err(Error::invalid(format!(
                        "omega is not symmetric: |omega[{i}][{j}] - omega[{j}][{i}]| = {gap:e}"
                    )));
                }
                let avg = 0.5 * (omega[i * g + j] + omega[j * g + i]);
                omega[i * g + j] = avg;
                omega[j * g + i] = avg;
            }
        }
        PeriodMatrix::new(g, omega)
    }

    /// JSON with every number written to 17 significant digits.
    pub fn to_json(&self) -> String {
        let mut out = String::from("{\n");
        let _ = writeln!(out, "  \"g\": {},", self.g);
        if let Some(label) = &self.label {
            let _ = writeln!(out, "  \"label\": {},", serde_json::Value::from(label.as_str()));
        }
        if let Some(note) = &self.provenance {
            let _ = writeln!(out, "  \"provenance\": {},", serde_json::Value::from(note.as_str()));
        }
        out.push_str("  \"omega\": [\n");
        for (i, row) in self.omega.iter().enumerate() {
            let cells: Vec<String> = row
                .iter()
                .map(|[re, im]| format!("[{}, {}]", decimal(*re), decimal(*im)))
                .collect();
            let sep = if i + 1 < self.omega.len() { "," } else { "" };
            let _ = writeln!(out, "    [{}]{sep}", cells.join(", "));
        }
        out.push_str("  ]\n}\n");
        out
    }
}

fn decimal(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn parse_document(text: &str) -> Result<PeriodMatrixDocument> {
    serde_json::from_str(text)
        .map_err(|e| Error::Parse(format!("{e} (line {}, column {})", e.line(), e.column())))
}

pub fn parse_period_matrix(text: &str) -> Result<PeriodMatrix> {
    parse_document(text)?.to_period()
}

pub fn serialize_period_matrix(p: &PeriodMatrix) -> String {
    PeriodMatrixDocument::from_period(p).to_json()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn elliptic_document() {
        let p = parse_period_matrix(r#"{"g":1, "omega":[[[0,1]]]}"#).unwrap();
        assert_eq!(p.entry(0, 0), C64::new(0.0, 1.0));
    }

    #[test]
    fn asymmetry_rejected_beyond_tolerance() {
        let text = r#"{"g":2, "omega":[[[0,1],[0.1,0.2]],[[0.2,0.2],[0,1]]]}"#;
        let err = parse_period_matrix(text).unwrap_err();
        assert!(err.to_string().contains("not symmetric"), "{err}");
    }

    #[test]
    fn small_asymmetry_symmetrized() {
        let text = r#"{"g":2, "omega":[[[0,1],[0.1,0.2]],[[0.1000000000001,0.2],[0,1]]]}"#;
        let p = parse_period_matrix(text).unwrap();
        assert_eq!(p.entry(0, 1), p.entry(1, 0));
    }

    #[test]
    fn indefinite_rejected_with_lambda_min() {
        let text = r#"{"g":2, "omega":[[[0,1],[0,0]],[[0,0],[0,-1]]]}"#;
        let err = parse_period_matrix(text).unwrap_err().to_string();
        assert!(err.contains("lambda_min = -1"), "{err}");
    }

    #[test]
    fn malformed_text_reports_location() {
        let err = parse_period_matrix("{\"g\": 1,\n \"omega\": [[[0, 1]]\n").unwrap_err();
        assert!(matches!(err, Error::Parse(_)));
        assert!(err.to_string().contains("line"), "{err}");
        let err = parse_period_matrix(r#"{"g":1, "omega":[[[0,1]]], "extra": 1}"#).unwrap_err();
        assert!(matches!(err, Error::Parse(_)));
    }

    #[test]
    fn shape_errors() {
        assert!(parse_period_matrix(r#"{"g":2, "omega":[[[0,1]]]}"#).is_err());
        assert!(parse_period_matrix(r#"{"g":0, "omega":[]}"#).is_err());
    }

    #[test]
    fn round_trip_keeps_label() {
        let p = PeriodMatrix::elliptic(C64::new(0.1, 1.0 / 3.0)).unwrap();
        let doc = PeriodMatrixDocument::from_period(&p)
            .with_label("a \"quoted\" label")
            .with_provenance("test");
        let back = parse_document(&doc.to_json()).unwrap();
        assert_eq!(back, doc);
        assert_eq!(back.to_period().unwrap(), p);
    }
}
