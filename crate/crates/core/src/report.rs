//! Report serialization. JSON output is canonical: values are converted to
//! a sorted-key tree before rendering, so parsing and re-rendering any
//! report reproduces it byte for byte.

use crate::counting::CountReport;
use crate::error::{Error, Result};
use crate::experiments::{DistributionTable, ExperimentResult, RunMode};
use serde::Serialize;

/// Canonical pretty JSON: object keys sorted, two-space indent.
pub fn to_canonical_json<T: Serialize>(value: &T) -> Result<String> {
    let v = serde_json::to_value(value).map_err(|e| Error::Parse(e.to_string()))?;
    serde_json::to_string_pretty(&v).map_err(|e| Error::Parse(e.to_string()))
}

/// Parses a rendered report and re-renders it; byte-identity with the input
/// is the round-trip contract.
pub fn rerender_json(text: &str) -> Result<String> {
    let v: serde_json::Value =
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    serde_json::to_string_pretty(&v).map_err(|e| Error::Parse(e.to_string()))
}

pub fn experiment_to_markdown(result: &ExperimentResult) -> String {
    let mut out = String::new();
    let verdict = match (result.mode, result.overall_pass) {
        (RunMode::Evidence, true) => "EVIDENCE (agrees)",
        (RunMode::Evidence, false) => "EVIDENCE (disagrees)",
        (RunMode::Verify, true) => "PASS",
        (RunMode::Verify, false) => "FAIL",
    };
    out.push_str(&format!("## {} — {}\n\n", result.name, verdict));
    out.push_str(&format!(
        "config: `{}`\n\n",
        serde_json::to_string(&result.config).unwrap_or_default()
    ));
    out.push_str("| assertion | expected | actual | pass |\n");
    out.push_str("|---|---|---|---|\n");
    for a in &result.assertions {
        out.push_str(&format!(
            "| {} | {} | {} | {} |\n",
            a.description.replace('|', "\\|"),
            a.expected.replace('|', "\\|"),
            a.actual.replace('|', "\\|"),
            if a.pass { "yes" } else { "NO" }
        ));
    }
    out.push_str(&format!("\nelapsed: {} ms\n", result.elapsed_ms));
    out
}

pub fn experiment_to_csv(result: &ExperimentResult) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["experiment", "assertion", "expected", "actual", "pass"])
        .map_err(|e| Error::Parse(e.to_string()))?;
    for a in &result.assertions {
        w.write_record([
            result.name.as_str(),
            a.description.as_str(),
            a.expected.as_str(),
            a.actual.as_str(),
            if a.pass { "true" } else { "false" },
        ])
        .map_err(|e| Error::Parse(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Parse(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Parse(e.to_string()))
}

pub fn count_report_to_markdown(report: &CountReport) -> String {
    let mut out = String::new();
    out.push_str("## fiber count\n\n");
    out.push_str(&format!(
        "config: `{}`\n\n",
        serde_json::to_string(&report.config).unwrap_or_default()
    ));
    out.push_str("| count | formula | matched | enumerated |\n|---|---|---|---|\n");
    let formula = report
        .formula_value
        .as_ref()
        .map(|f| format!("{}/{} ({})", f.num, f.den, f.decimal))
        .unwrap_or_else(|| "-".into());
    out.push_str(&format!(
        "| {} | {} | {:?} | {} |\n",
        report.count, formula, report.matched, report.enumerated_total
    ));
    out
}

pub fn count_report_to_csv(report: &CountReport) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "count",
        "formula_num",
        "formula_den",
        "formula_decimal",
        "matched",
        "enumerated_total",
    ])
    .map_err(|e| Error::Parse(e.to_string()))?;
    let (num, den, dec) = report
        .formula_value
        .as_ref()
        .map(|f| (f.num.clone(), f.den.clone(), f.decimal.clone()))
        .unwrap_or_else(|| ("".into(), "".into(), "".into()));
    w.write_record([
        report.count.to_string(),
        num,
        den,
        dec,
        format!("{:?}", report.matched).to_lowercase(),
        report.enumerated_total.to_string(),
    ])
    .map_err(|e| Error::Parse(e.to_string()))?;
    let bytes = w.into_inner().map_err(|e| Error::Parse(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Parse(e.to_string()))
}

pub fn distribution_to_markdown(table: &DistributionTable) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "## distribution, n = {} (space size {})\n\n",
        table.n, table.space_size
    ));
    out.push_str("| type | count | empirical | closed form | limit mass |\n");
    out.push_str("|---|---|---|---|---|\n");
    for row in &table.rows {
        out.push_str(&format!(
            "| [{}] | {} | {} | {} | {} |\n",
            row.module_type,
            row.count,
            row.empirical.decimal,
            row.closed_form
                .as_ref()
                .map(|f| f.decimal.clone())
                .unwrap_or_else(|| "-".into()),
            row.limit_mass.decimal,
        ));
    }
    out.push_str("\n| residue type | count |\n|---|---|\n");
    for (t, c) in &table.residue_histogram {
        out.push_str(&format!("| [{t}] | {c} |\n"));
    }
    out
}

pub fn distribution_to_csv(table: &DistributionTable) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "n",
        "type",
        "count",
        "empirical_num",
        "empirical_den",
        "closed_form_num",
        "closed_form_den",
        "limit_mass_num",
        "limit_mass_den",
    ])
    .map_err(|e| Error::Parse(e.to_string()))?;
    for row in &table.rows {
        let (cf_num, cf_den) = row
            .closed_form
            .as_ref()
            .map(|f| (f.num.clone(), f.den.clone()))
            .unwrap_or_else(|| ("".into(), "".into()));
        w.write_record([
            table.n.to_string(),
            row.module_type.to_string(),
            row.count.to_string(),
            row.empirical.num.clone(),
            row.empirical.den.clone(),
            cf_num,
            cf_den,
            row.limit_mass.num.clone(),
            row.limit_mass.den.clone(),
        ])
        .map_err(|e| Error::Parse(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Parse(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Parse(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::counting::{count_poly_cokernel_fiber, FiberSpec, ScanOptions};
    use crate::matrix::Matrix;
    use crate::params::RingParams;

    #[test]
    fn json_round_trip_is_byte_identical() {
        let params = RingParams::new(2, 1, &[1, 1, 1]).unwrap();
        let fiber =
            FiberSpec::mod_p(Matrix::new(2, 2, vec![0, 1, 1, 1]).unwrap(), &params).unwrap();
        let report = count_poly_cokernel_fiber(
            &fiber,
            &"1".parse().unwrap(),
            &params,
            &ScanOptions::serial(),
        )
        .unwrap();
        let rendered = to_canonical_json(&report).unwrap();
        assert_eq!(rerender_json(&rendered).unwrap(), rendered);
    }

    #[test]
    fn csv_has_quoting_for_commas() {
        // partition strings contain commas and must round-trip through CSV
        let params = RingParams::new(2, 1, &[0, 1]).unwrap();
        let table =
            crate::experiments::distribution_table(&params, 2, &ScanOptions::serial()).unwrap();
        let csv_text = distribution_to_csv(&table).unwrap();
        let mut rdr = csv::Reader::from_reader(csv_text.as_bytes());
        let types: Vec<String> = rdr
            .records()
            .map(|r| r.unwrap().get(1).unwrap().to_string())
            .collect();
        assert!(types.iter().any(|t| t.contains(',')));
    }
}
