//! JSON and CSV serialization of sensitivity reports.

use std::fs;
use std::path::{Path, PathBuf};

use super::{fmt_num, AnalysisError, SensitivityReport};

/// Pretty-printed JSON with a trailing newline.
pub fn report_json(report: &SensitivityReport) -> Result<String, AnalysisError> {
    if report.parameters.is_empty() {
        return Err(AnalysisError::EmptyReport);
    }
    let mut s = serde_json::to_string_pretty(report).expect("report serializes");
    s.push('\n');
    Ok(s)
}

pub fn write_json(report: &SensitivityReport, path: &Path) -> Result<(), AnalysisError> {
    let s = report_json(report)?;
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, s)?;
    Ok(())
}

/// CSV text for one parameter: one row per observed value.
pub fn param_csv(report: &SensitivityReport, index: usize) -> Result<String, AnalysisError> {
    let p = report
        .parameters
        .get(index)
        .ok_or(AnalysisError::EmptyReport)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["param", "value", "n", "min", "q1", "median", "q3", "max"])?;
    for g in &p.groups {
        w.write_record([
            p.name.clone(),
            fmt_num(g.value),
            g.n.to_string(),
            fmt_num(g.min),
            fmt_num(g.q1),
            fmt_num(g.median),
            fmt_num(g.q3),
            fmt_num(g.max),
        ])?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| AnalysisError::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("utf-8 csv"))
}

/// Writes `<param>.csv` for every parameter into `dir`, returning the paths in space order.
pub fn write_csvs(report: &SensitivityReport, dir: &Path) -> Result<Vec<PathBuf>, AnalysisError> {
    if report.parameters.is_empty() {
        return Err(AnalysisError::EmptyReport);
    }
    fs::create_dir_all(dir)?;
    let mut out = Vec::with_capacity(report.parameters.len());
    for (i, p) in report.parameters.iter().enumerate() {
        let path = dir.join(format!("{}.csv", p.name));
        fs::write(&path, param_csv(report, i)?)?;
        out.push(path);
    }
    Ok(out)
}

/// Writes `<param>.svg` box plots into `dir`.
pub fn write_svgs(report: &SensitivityReport, dir: &Path) -> Result<Vec<PathBuf>, AnalysisError> {
    if report.parameters.is_empty() {
        return Err(AnalysisError::EmptyReport);
    }
    fs::create_dir_all(dir)?;
    let mut out = Vec::with_capacity(report.parameters.len());
    for p in &report.parameters {
        let title = format!(
            "{} (default {}, {})",
            p.name,
            fmt_num(p.default_value),
            p.bucket
        );
        let svg = super::svg::render_boxplot_svg(&p.groups, &title, &p.name, "test perplexity")?;
        let path = dir.join(format!("{}.svg", p.name));
        fs::write(&path, svg)?;
        out.push(path);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::stats::BoxStats;
    use crate::analysis::{Bucket, ParamReport, ReportMetadata};

    fn report(params: Vec<ParamReport>) -> SensitivityReport {
        SensitivityReport {
            metadata: ReportMetadata {
                test: "mann-whitney-u, two-sided".into(),
                alpha: 0.05,
                near_threshold: 0.01,
                grouping: "default value vs all other values".into(),
                ok_records: 3,
                run_id: None,
                generated_at: None,
            },
            parameters: params,
            comparison: None,
        }
    }

    #[test]
    fn csv_layout() {
        let r = report(vec![ParamReport {
            name: "dropout".into(),
            bucket: Bucket::Worse,
            p_value: Some(0.01),
            u: Some(9.0),
            exact: Some(true),
            default_value: 0.4,
            best_value: 0.3,
            groups: vec![
                BoxStats::from_sample(0.3, &[1.0, 2.0]),
                BoxStats::from_sample(0.4, &[5.0]),
            ],
        }]);
        let csv = param_csv(&r, 0).unwrap();
        assert_eq!(
            csv,
            "param,value,n,min,q1,median,q3,max\ndropout,0.3,2,1,1.25,1.5,1.75,2\ndropout,0.4,1,5,5,5,5,5\n"
        );
        let json = report_json(&r).unwrap();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v["parameters"][0]["bucket"], "worse");
        assert_eq!(v["metadata"]["alpha"], 0.05);
        assert!(v["metadata"].get("generated_at").is_none());
    }

    #[test]
    fn empty_report_is_an_error() {
        let r = report(vec![]);
        assert!(matches!(report_json(&r), Err(AnalysisError::EmptyReport)));
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(
            write_csvs(&r, dir.path()),
            Err(AnalysisError::EmptyReport)
        ));
    }
}
