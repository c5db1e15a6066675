use std::path::Path;

use ltsta::series::Label;

use crate::CliError;

/// A parsed input column: values plus the label column when one exists.
pub struct SeriesFile {
    pub values: Vec<f64>,
    pub labels: Vec<Option<String>>,
}

impl SeriesFile {
    /// First label that parses, for seeding the calendar.
    pub fn start_label(&self) -> Option<Label> {
        let text = self.labels.first()?.as_deref()?;
        text.parse().ok()
    }
}

/// Reads `label,value` or single `value` CSV with a header row. The value
/// column may also be named `point`, so forecast artifacts feed straight
/// back into `evaluate`.
pub fn read_series_csv(path: &Path) -> Result<SeriesFile, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_path(path)
        .map_err(|e| CliError::csv(path, e))?;
    let headers = reader
        .headers()
        .map_err(|e| CliError::csv(path, e))?
        .clone();
    let names: Vec<String> = headers.iter().map(|h| h.trim().to_lowercase()).collect();
    let value_col = names
        .iter()
        .position(|h| h == "value" || h == "point")
        .or(if names.len() == 1 { Some(0) } else { None })
        .ok_or_else(|| CliError::Parse {
            path: path.display().to_string(),
            line: 1,
            reason: format!("no `value` column in header {names:?}"),
        })?;
    let label_col = names.iter().position(|h| h == "label");

    let mut values = Vec::new();
    let mut labels = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let line = idx + 2;
        let record = record.map_err(|e| CliError::Parse {
            path: path.display().to_string(),
            line,
            reason: e.to_string(),
        })?;
        let raw = record.get(value_col).ok_or_else(|| CliError::Parse {
            path: path.display().to_string(),
            line,
            reason: "missing value field".into(),
        })?;
        let value: f64 = raw.trim().parse().map_err(|_| CliError::Parse {
            path: path.display().to_string(),
            line,
            reason: format!("bad number `{raw}`"),
        })?;
        values.push(value);
        labels.push(label_col.and_then(|c| record.get(c)).map(str::to_string));
    }
    Ok(SeriesFile { values, labels })
}

pub fn write_series_csv(path: &Path, values: &[f64], labels: Option<&[String]>) -> Result<(), CliError> {
    let mut out = String::new();
    match labels {
        Some(labels) => {
            out.push_str("label,value\n");
            for (label, value) in labels.iter().zip(values) {
                out.push_str(&format!("{label},{value}\n"));
            }
        }
        None => {
            out.push_str("value\n");
            for value in values {
                out.push_str(&format!("{value}\n"));
            }
        }
    }
    std::fs::write(path, out).map_err(|e| CliError::io(path, e))
}

/// One record of a CIF-layout dataset: `id;horizon;frequency;v1;...;vn`,
/// semicolon separated, one series per line. A line whose third token is
/// already numeric is treated as having no frequency token, assumed
/// monthly.
#[derive(Debug, Clone)]
pub struct CifSeries {
    pub id: String,
    pub horizon: usize,
    pub period: usize,
    pub values: Vec<f64>,
}

pub fn read_cif(path: &Path) -> Result<Vec<Result<CifSeries, String>>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut out = Vec::new();
    for raw in text.lines() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        out.push(parse_cif_line(line));
    }
    Ok(out)
}

fn parse_cif_line(line: &str) -> Result<CifSeries, String> {
    let mut tokens = line.split(';').map(str::trim);
    let id = tokens
        .next()
        .filter(|t| !t.is_empty())
        .ok_or("missing series id")?
        .to_string();
    let horizon: usize = tokens
        .next()
        .ok_or("missing horizon")?
        .parse()
        .map_err(|_| "bad horizon".to_string())?;
    let rest: Vec<&str> = tokens.collect();
    if rest.is_empty() {
        return Err("no observations".into());
    }
    let (period, value_tokens) = match rest[0].parse::<f64>() {
        Ok(_) => (12, &rest[..]),
        Err(_) => (
            match rest[0].to_lowercase().as_str() {
                "monthly" => 12,
                "quarterly" => 4,
                "weekly" => 52,
                "daily" => 7,
                "yearly" | "annual" => 1,
                other => return Err(format!("unknown frequency `{other}`")),
            },
            &rest[1..],
        ),
    };
    let mut values = Vec::with_capacity(value_tokens.len());
    for token in value_tokens {
        if token.is_empty() {
            continue;
        }
        values.push(
            token
                .parse::<f64>()
                .map_err(|_| format!("bad observation `{token}`"))?,
        );
    }
    if values.len() <= horizon {
        return Err(format!(
            "{} observations cannot cover a horizon of {horizon}",
            values.len()
        ));
    }
    Ok(CifSeries {
        id,
        horizon,
        period,
        values,
    })
}

pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Internal {
        reason: format!("serialization failed: {e}"),
    })?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Parse {
        path: path.display().to_string(),
        line: e.line(),
        reason: e.to_string(),
    })
}
