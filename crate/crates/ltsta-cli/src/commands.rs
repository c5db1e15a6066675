use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use ltsta::metrics::{self, MetricSet};
use ltsta::model::ModelSummary;
use ltsta::selection::{self, SelectionReport};
use ltsta::series::Label;
use ltsta::simulate::{simulate_series, SimulationSpec};
use ltsta::{trend, LtstaModel, TimeSeries};

use crate::config::RunConfig;
use crate::io::{self, CifSeries, SeriesFile};
use crate::CliError;

const VERSION: &str = env!("CARGO_PKG_VERSION");

/// On-disk form of a fitted model: enough to both read the coefficient
/// table and reload the model for forecasting.
#[derive(Debug, Serialize, Deserialize)]
pub struct ModelArtifact {
    pub version: String,
    pub n: usize,
    pub period: usize,
    pub start: Option<Label>,
    pub summary: ModelSummary,
    pub model: LtstaModel,
}

#[derive(Debug, Serialize, Deserialize)]
struct SelectionArtifact {
    version: String,
    report: SelectionReport,
    /// Break placements per candidate count, parallel to the SSR curve.
    /// Only the `breaks` command fills this; `fit` keeps only the curve.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    breaks_by_k: Vec<Vec<usize>>,
}

#[derive(Debug, Serialize, Deserialize)]
struct MetricsArtifact {
    version: String,
    metrics: MetricSet,
}

#[derive(Debug, Serialize, Deserialize)]
struct ForecastRow {
    step: usize,
    label: Option<String>,
    point: f64,
    lower: f64,
    upper: f64,
    trend: f64,
    seasonal: f64,
    arma: f64,
}

fn build_series(file: &SeriesFile, config: &RunConfig) -> Result<TimeSeries, CliError> {
    let start = file.start_label();
    let period = config
        .period
        .or_else(|| start.and_then(|l| l.cycle()))
        .ok_or_else(|| CliError::Usage {
            reason: "period is required (flag, config key, or calendar labels)".into(),
        })?;
    TimeSeries::new(file.values.clone(), period, start).map_err(CliError::Lib)
}

pub fn cmd_fit(input: &Path, out_dir: &Path, config: &RunConfig) -> Result<(), CliError> {
    let file = io::read_series_csv(input)?;
    let series = build_series(&file, config)?;
    let model = LtstaModel::fit(&series, &config.to_model_config()).map_err(CliError::Lib)?;
    let summary = model.summarize().map_err(CliError::Lib)?;

    std::fs::create_dir_all(out_dir).map_err(|e| CliError::io(out_dir, e))?;

    let n = series.len();
    let trend_values = model.trend.values(1, n);
    let seasonal_values = model.seasonal.values(1, n);
    let arma_fitted = model.arma_fitted();
    let mut decomposition = String::from("t,label,y,transformed,trend,seasonal,arma_fitted,residual\n");
    for t in 1..=n {
        let i = t - 1;
        decomposition.push_str(&format!(
            "{t},{},{},{},{},{},{},{}\n",
            series.label_at(t),
            series.values()[i],
            model.transformed[i],
            trend_values[i],
            seasonal_values[i],
            arma_fitted[i],
            model.residuals[i],
        ));
    }
    let decomposition_path = out_dir.join("decomposition.csv");
    std::fs::write(&decomposition_path, decomposition)
        .map_err(|e| CliError::io(&decomposition_path, e))?;

    io::write_json(
        &out_dir.join("selection.json"),
        &SelectionArtifact {
            version: VERSION.into(),
            report: model.selection.clone(),
            breaks_by_k: vec![],
        },
    )?;

    let artifact = ModelArtifact {
        version: VERSION.into(),
        n,
        period: series.period(),
        start: series.start(),
        summary,
        model,
    };
    io::write_json(&out_dir.join("model.json"), &artifact)?;

    let model = &artifact.model;
    println!(
        "fit: n={n} m={} breaks={:?} harmonics={} arma=({},{})",
        model.trend.segmentation.m(),
        model.trend.segmentation.breaks(),
        model.seasonal.n_harmonics(),
        model.arma.p,
        model.arma.q,
    );
    Ok(())
}

pub fn cmd_forecast(
    model_path: &Path,
    output: &Path,
    config: &RunConfig,
) -> Result<(), CliError> {
    if !model_path.exists() {
        return Err(CliError::MissingModel {
            path: model_path.display().to_string(),
        });
    }
    let artifact: ModelArtifact = io::read_json(model_path)?;
    let horizon = config.horizon.ok_or_else(|| CliError::Usage {
        reason: "horizon is required (flag or config key)".into(),
    })?;
    let forecast = artifact
        .model
        .forecast(horizon, config.level)
        .map_err(CliError::Lib)?;

    let rows: Vec<ForecastRow> = (1..=horizon)
        .map(|k| ForecastRow {
            step: k,
            label: artifact
                .start
                .map(|s| s.advance(artifact.n + k - 1).to_string()),
            point: forecast.point[k - 1],
            lower: forecast.lower[k - 1],
            upper: forecast.upper[k - 1],
            trend: forecast.components[k - 1].trend,
            seasonal: forecast.components[k - 1].seasonal,
            arma: forecast.components[k - 1].arma,
        })
        .collect();

    if output.extension().is_some_and(|e| e == "json") {
        #[derive(Serialize)]
        struct ForecastArtifact {
            version: String,
            horizon: usize,
            level: f64,
            rows: Vec<ForecastRow>,
        }
        io::write_json(
            output,
            &ForecastArtifact {
                version: VERSION.into(),
                horizon,
                level: config.level,
                rows,
            },
        )?;
    } else {
        let mut text = String::from("step,label,point,lower,upper,trend,seasonal,arma\n");
        for row in &rows {
            text.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                row.step,
                row.label.as_deref().unwrap_or(""),
                row.point,
                row.lower,
                row.upper,
                row.trend,
                row.seasonal,
                row.arma,
            ));
        }
        std::fs::write(output, text).map_err(|e| CliError::io(output, e))?;
    }
    println!("forecast: {horizon} steps at level {}", config.level);
    Ok(())
}

pub fn cmd_evaluate(
    forecast: &Path,
    actual: &Path,
    train: &Path,
    output: &Path,
    config: &RunConfig,
) -> Result<(), CliError> {
    let forecast = io::read_series_csv(forecast)?;
    let actual = io::read_series_csv(actual)?;
    let train_file = io::read_series_csv(train)?;
    let period = config.period.ok_or_else(|| CliError::Usage {
        reason: "period is required (flag or config key)".into(),
    })?;
    let metrics = metrics::compute_metrics(
        &forecast.values,
        &actual.values,
        &train_file.values,
        period,
    )
    .map_err(CliError::Lib)?;
    io::write_json(
        output,
        &MetricsArtifact {
            version: VERSION.into(),
            metrics,
        },
    )?;
    println!(
        "evaluate: mae={} rmse={} smape={} mase={}",
        metrics.mae, metrics.rmse, metrics.smape_percent, metrics.mase
    );
    Ok(())
}

struct BenchRow {
    id: String,
    horizon: Option<usize>,
    period: Option<usize>,
    metrics: Option<MetricSet>,
    error: Option<String>,
}

fn benchmark_one(series: &CifSeries, config: &RunConfig) -> Result<MetricSet, String> {
    let split = series.values.len() - series.horizon;
    let (train, actual) = series.values.split_at(split);
    let ts = TimeSeries::new(train.to_vec(), series.period, None).map_err(|e| e.to_string())?;
    let model = LtstaModel::fit(&ts, &config.to_model_config()).map_err(|e| e.to_string())?;
    let forecast = model
        .forecast(series.horizon, config.level)
        .map_err(|e| e.to_string())?;
    metrics::compute_metrics(&forecast.point, actual, train, series.period)
        .map_err(|e| e.to_string())
}

pub fn cmd_benchmark(input: &Path, output: &Path, config: &RunConfig) -> Result<(), CliError> {
    let parsed = io::read_cif(input)?;
    if parsed.is_empty() {
        return Err(CliError::Usage {
            reason: format!("{} holds no series", input.display()),
        });
    }

    let rows: Vec<BenchRow> = parsed
        .par_iter()
        .enumerate()
        .map(|(idx, entry)| match entry {
            Ok(series) => match benchmark_one(series, config) {
                Ok(metrics) => BenchRow {
                    id: series.id.clone(),
                    horizon: Some(series.horizon),
                    period: Some(series.period),
                    metrics: Some(metrics),
                    error: None,
                },
                Err(error) => BenchRow {
                    id: series.id.clone(),
                    horizon: Some(series.horizon),
                    period: Some(series.period),
                    metrics: None,
                    error: Some(error),
                },
            },
            Err(error) => BenchRow {
                id: format!("line_{}", idx + 1),
                horizon: None,
                period: None,
                metrics: None,
                error: Some(error.clone()),
            },
        })
        .collect();

    let succeeded: Vec<MetricSet> = rows.iter().filter_map(|r| r.metrics).collect();
    let failures = rows.len() - succeeded.len();

    let mut text = String::from("series_id,horizon,period,mae,rmse,smape,mase,error\n");
    for row in &rows {
        let horizon = row.horizon.map(|h| h.to_string()).unwrap_or_default();
        let period = row.period.map(|p| p.to_string()).unwrap_or_default();
        match (&row.metrics, &row.error) {
            (Some(m), _) => text.push_str(&format!(
                "{},{horizon},{period},{},{},{},{},\n",
                row.id, m.mae, m.rmse, m.smape_percent, m.mase
            )),
            (None, Some(e)) => text.push_str(&format!(
                "{},{horizon},{period},,,,,{}\n",
                row.id,
                e.replace(',', ";")
            )),
            (None, None) => unreachable!("row without metrics carries an error"),
        }
    }
    if !succeeded.is_empty() {
        let agg = metrics::aggregate(&succeeded).map_err(CliError::Lib)?;
        for (name, m) in [("aggregate_mean", agg.mean), ("aggregate_median", agg.median)] {
            text.push_str(&format!(
                "{name},,,{},{},{},{},\n",
                m.mae, m.rmse, m.smape_percent, m.mase
            ));
        }
    }
    std::fs::write(output, text).map_err(|e| CliError::io(output, e))?;

    if failures > 0 {
        eprintln!(
            "warning: {failures} of {} series failed; see the error column",
            rows.len()
        );
    }
    println!(
        "benchmark: {} series, {} succeeded, {failures} failed",
        rows.len(),
        succeeded.len()
    );
    Ok(())
}

pub fn cmd_breaks(input: &Path, output: &Path, config: &RunConfig) -> Result<(), CliError> {
    let file = io::read_series_csv(input)?;
    let series = build_series(&file, config)?;
    let transformed = config
        .transform
        .apply(series.values())
        .map_err(CliError::Lib)?;
    let budget = config
        .m_max
        .unwrap_or_else(|| selection::default_m_max(series.len(), config.h))
        .max(config.manual_m.unwrap_or(0));
    let table = trend::dp_segment(&transformed, budget, config.h).map_err(CliError::Lib)?;
    let curve = table.ssr_curve();
    let report = match config.manual_m {
        Some(m) => selection::manual_report(&curve, m).map_err(CliError::Lib)?,
        None => selection::select_num_breaks(&curve, config.policy).map_err(CliError::Lib)?,
    };
    let breaks_by_k = (0..curve.len())
        .map(|k| table.best(k).0.breaks().to_vec())
        .collect();
    io::write_json(
        output,
        &SelectionArtifact {
            version: VERSION.into(),
            report: report.clone(),
            breaks_by_k,
        },
    )?;
    println!(
        "breaks: m={} (method {:?}) of budget {budget}",
        report.m_selected, report.method
    );
    Ok(())
}

pub fn cmd_simulate(
    spec_path: &Path,
    output: &Path,
    config: &RunConfig,
) -> Result<(), CliError> {
    let spec: SimulationSpec = io::read_json(spec_path)?;
    let values = simulate_series(&spec, config.seed).map_err(CliError::Lib)?;
    io::write_series_csv(output, &values, None)?;
    println!("simulate: n={} seed={}", values.len(), config.seed);
    Ok(())
}
