use std::path::Path;

use ltsta::selection::SelectionPolicy;
use ltsta::{LtstaConfig, Transform};

use crate::CliError;

/// Everything the commands can be told, from the config file and flags.
/// `period` and `horizon` stay separate from [`LtstaConfig`] because they
/// belong to the data and the forecast request, not to the estimator.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub transform: Transform,
    pub period: Option<usize>,
    pub h: usize,
    pub m_max: Option<usize>,
    pub policy: SelectionPolicy,
    pub manual_m: Option<usize>,
    pub n_max: Option<usize>,
    pub p_max: usize,
    pub q_max: usize,
    pub extra_passes: usize,
    pub horizon: Option<usize>,
    pub level: f64,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        let base = LtstaConfig::default();
        RunConfig {
            transform: base.transform,
            period: None,
            h: base.h,
            m_max: base.m_max,
            policy: base.policy,
            manual_m: base.manual_m,
            n_max: base.n_max,
            p_max: base.p_max,
            q_max: base.q_max,
            extra_passes: base.extra_passes,
            horizon: None,
            level: 0.95,
            seed: 0,
        }
    }
}

impl RunConfig {
    pub fn to_model_config(&self) -> LtstaConfig {
        LtstaConfig {
            transform: self.transform,
            h: self.h,
            m_max: self.m_max,
            policy: self.policy,
            manual_m: self.manual_m,
            n_max: self.n_max,
            p_max: self.p_max,
            q_max: self.q_max,
            extra_passes: self.extra_passes,
        }
    }

    /// Apply one `key = value` assignment. Shared by the file parser and
    /// the flag overrides so both speak the same vocabulary.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        let value = value.trim();
        match key {
            "transform" => {
                self.transform = match value {
                    "identity" => Transform::identity(),
                    "log" => Transform::log(),
                    "box_cox" => Transform::box_cox(self.transform.lambda),
                    other => return Err(format!("unknown transform `{other}`")),
                }
            }
            "lambda" => {
                let lambda: f64 = parse(value, key)?;
                self.transform = match self.transform.kind {
                    ltsta::TransformKind::BoxCox => Transform::box_cox(lambda),
                    _ => {
                        let mut t = self.transform;
                        t.lambda = lambda;
                        t
                    }
                };
            }
            "period" => self.period = Some(parse(value, key)?),
            "h" => self.h = parse(value, key)?,
            "m_max" => self.m_max = parse_auto(value, key)?,
            "policy" => {
                self.policy = match value {
                    "absolute" => SelectionPolicy::Absolute,
                    "ratio" => SelectionPolicy::Ratio,
                    "l_method" => SelectionPolicy::LMethod,
                    other => return Err(format!("unknown policy `{other}`")),
                }
            }
            "manual_m" => self.manual_m = parse_auto(value, key)?,
            "n_max" => self.n_max = parse_auto(value, key)?,
            "p_max" => self.p_max = parse(value, key)?,
            "q_max" => self.q_max = parse(value, key)?,
            "extra_passes" => self.extra_passes = parse(value, key)?,
            "horizon" => self.horizon = Some(parse(value, key)?),
            "level" => self.level = parse(value, key)?,
            "seed" => self.seed = parse(value, key)?,
            other => return Err(format!("unknown config key `{other}`")),
        }
        Ok(())
    }
}

fn parse<T: std::str::FromStr>(value: &str, key: &str) -> Result<T, String> {
    value
        .parse()
        .map_err(|_| format!("bad value `{value}` for `{key}`"))
}

fn parse_auto(value: &str, key: &str) -> Result<Option<usize>, String> {
    if value == "auto" {
        return Ok(None);
    }
    parse(value, key).map(Some)
}

/// Flat `key = value` file, one assignment per line, `#` starts a comment.
pub fn load_config_file(path: &Path, config: &mut RunConfig) -> Result<(), CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(CliError::Config {
                path: path.display().to_string(),
                line: idx + 1,
                reason: format!("expected `key = value`, got `{line}`"),
            });
        };
        config
            .set(key.trim(), value)
            .map_err(|reason| CliError::Config {
                path: path.display().to_string(),
                line: idx + 1,
                reason,
            })?;
    }
    Ok(())
}
