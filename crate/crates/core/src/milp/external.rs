//! Solving models with an external MILP solver through files.
//!
//! The model is written as MPS into a scratch directory, the configured
//! command is run, and its solution file is parsed. The command is a
//! template split on whitespace, with these placeholders:
//!
//! - `{model}`: path of the MPS file,
//! - `{solution}`: path the solver must write its solution to,
//! - `{time_limit}`: replaced by the words of `time_limit_args` (with
//!   `{seconds}` substituted) when a limit is set, and dropped otherwise.
//!
//! Configuration comes from a TOML file and can be overridden by the
//! `WILDFIRE_MIP_COMMAND`, `WILDFIRE_MIP_FORMAT`, `WILDFIRE_MIP_TIME_ARGS`
//! and `WILDFIRE_TIME_LIMIT` environment variables.
//!
//! Supported solution formats:
//!
//! - `cbc`: a status line such as `Optimal - objective value 3.0` or
//!   `Stopped on time - objective value 7.0`, then one line per column:
//!   `index name value reduced-cost`, optionally prefixed by `**`.
//!   Columns that are not listed are zero.
//! - `highs`: the `Model status` block followed by `# Primal solution
//!   values`, `Objective <v>` and `# Columns <n>` with `name value` lines.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::str::FromStr;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::reference::INTEGRALITY_TOLERANCE;
use super::{write_mps, BackendResult, ColumnKind, MilpError, MilpModel, Status};

pub const ENV_COMMAND: &str = "WILDFIRE_MIP_COMMAND";
pub const ENV_FORMAT: &str = "WILDFIRE_MIP_FORMAT";
pub const ENV_TIME_ARGS: &str = "WILDFIRE_MIP_TIME_ARGS";
pub const ENV_TIME_LIMIT: &str = "WILDFIRE_TIME_LIMIT";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolutionFormat {
    Cbc,
    Highs,
}

impl FromStr for SolutionFormat {
    type Err = MilpError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "cbc" => Ok(Self::Cbc),
            "highs" => Ok(Self::Highs),
            other => Err(MilpError::External(format!(
                "unknown solution format `{other}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExternalConfig {
    pub command: String,
    pub format: SolutionFormat,
    #[serde(default = "default_time_args")]
    pub time_limit_args: String,
    #[serde(default)]
    pub workdir: Option<PathBuf>,
    /// Seconds.
    #[serde(default)]
    pub time_limit: Option<f64>,
}

fn default_time_args() -> String {
    "sec {seconds}".to_string()
}

impl ExternalConfig {
    /// CBC invoked as `cbc`, writing every column.
    pub fn cbc(binary: impl Into<String>) -> Self {
        Self {
            command: format!(
                "{} {{model}} {{time_limit}} solve printingOptions all solu {{solution}}",
                binary.into()
            ),
            format: SolutionFormat::Cbc,
            time_limit_args: default_time_args(),
            workdir: None,
            time_limit: None,
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, MilpError> {
        let text = std::fs::read_to_string(path)?;
        toml::from_str(&text).map_err(|e| MilpError::External(format!("bad config: {e}")))
    }

    /// Applies the environment overrides on top of `self`.
    pub fn with_env(mut self) -> Result<Self, MilpError> {
        if let Ok(cmd) = std::env::var(ENV_COMMAND) {
            self.command = cmd;
        }
        if let Ok(f) = std::env::var(ENV_FORMAT) {
            self.format = f.parse()?;
        }
        if let Ok(a) = std::env::var(ENV_TIME_ARGS) {
            self.time_limit_args = a;
        }
        if let Ok(t) = std::env::var(ENV_TIME_LIMIT) {
            let t: f64 = t
                .parse()
                .map_err(|_| MilpError::External(format!("{ENV_TIME_LIMIT}: bad number `{t}`")))?;
            self.time_limit = Some(t);
        }
        Ok(self)
    }

    /// Configuration from the environment alone; `None` when no command is
    /// set.
    pub fn from_env() -> Result<Option<Self>, MilpError> {
        let Ok(command) = std::env::var(ENV_COMMAND) else {
            return Ok(None);
        };
        let base = Self {
            command,
            format: SolutionFormat::Cbc,
            time_limit_args: default_time_args(),
            workdir: None,
            time_limit: None,
        };
        base.with_env().map(Some)
    }

    fn argv(&self, model: &Path, solution: &Path, limit: Option<f64>) -> Vec<String> {
        let mut argv = Vec::new();
        for word in self.command.split_whitespace() {
            if word == "{time_limit}" {
                if let Some(secs) = limit {
                    let secs = format!("{}", secs.max(1.0).ceil());
                    argv.extend(
                        self.time_limit_args
                            .split_whitespace()
                            .map(|w| w.replace("{seconds}", &secs)),
                    );
                }
                continue;
            }
            argv.push(
                word.replace("{model}", &model.to_string_lossy())
                    .replace("{solution}", &solution.to_string_lossy()),
            );
        }
        argv
    }
}

/// What a solution file says.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedSolution {
    pub status: Status,
    pub objective: Option<f64>,
    pub values: Vec<(String, f64)>,
}

fn parse_err(line: usize, message: impl Into<String>) -> MilpError {
    MilpError::SolutionParse {
        line,
        message: message.into(),
    }
}

fn parse_cbc(text: &str) -> Result<ParsedSolution, MilpError> {
    let mut lines = text.lines().enumerate();
    let (_, head) = lines
        .next()
        .ok_or_else(|| parse_err(1, "empty solution file"))?;
    let lower = head.to_ascii_lowercase();
    let objective = lower
        .split("objective value")
        .nth(1)
        .and_then(|v| v.trim().parse::<f64>().ok());
    let has_values = text.lines().count() > 1;
    let status = if lower.starts_with("optimal") {
        Status::Optimal
    } else if lower.contains("infeasible") {
        Status::Infeasible
    } else if lower.starts_with("stopped") {
        // On a limit without an incumbent CBC may still write the last
        // relaxation, flagged `no integer solution`.
        if has_values
            && !lower.contains("no integer solution")
            && objective.is_some_and(|v| v.abs() < 1e49)
        {
            Status::Feasible
        } else {
            Status::Limit
        }
    } else {
        return Err(parse_err(1, format!("unrecognised status `{head}`")));
    };
    let mut values = Vec::new();
    if matches!(status, Status::Optimal | Status::Feasible) {
        for (k, line) in lines {
            let fields: Vec<&str> = line.split_whitespace().filter(|f| *f != "**").collect();
            if fields.is_empty() {
                continue;
            }
            if fields.len() < 3 {
                return Err(parse_err(k + 1, "expected `index name value`"));
            }
            let v: f64 = fields[2]
                .parse()
                .map_err(|_| parse_err(k + 1, format!("bad value `{}`", fields[2])))?;
            values.push((fields[1].to_string(), v));
        }
    }
    Ok(ParsedSolution {
        status,
        objective: if status == Status::Optimal || status == Status::Feasible {
            objective
        } else {
            None
        },
        values,
    })
}

fn parse_highs(text: &str) -> Result<ParsedSolution, MilpError> {
    let lines: Vec<&str> = text.lines().collect();
    let find = |label: &str| lines.iter().position(|l| l.trim() == label);
    let status_at = find("Model status").ok_or_else(|| parse_err(1, "missing `Model status`"))?;
    let status_text = lines
        .iter()
        .skip(status_at + 1)
        .find(|l| !l.trim().is_empty())
        .map(|l| l.trim().to_ascii_lowercase())
        .ok_or_else(|| parse_err(status_at + 2, "missing status value"))?;
    let mut objective = None;
    let mut values = Vec::new();
    let mut feasible = false;
    if let Some(p) = find("# Primal solution values") {
        feasible = lines.get(p + 1).is_some_and(|l| l.trim() == "Feasible");
        let mut k = p + 1;
        while k < lines.len() {
            let l = lines[k].trim();
            if let Some(v) = l.strip_prefix("Objective ") {
                objective = Some(
                    v.trim()
                        .parse::<f64>()
                        .map_err(|_| parse_err(k + 1, "bad objective"))?,
                );
            } else if let Some(n) = l.strip_prefix("# Columns ") {
                let n: usize = n
                    .trim()
                    .parse()
                    .map_err(|_| parse_err(k + 1, "bad count"))?;
                for i in 0..n {
                    let at = k + 1 + i;
                    let fields: Vec<&str> = lines
                        .get(at)
                        .ok_or_else(|| parse_err(at + 1, "truncated column list"))?
                        .split_whitespace()
                        .collect();
                    let [name, value, ..] = fields[..] else {
                        return Err(parse_err(at + 1, "expected `name value`"));
                    };
                    let value = value
                        .parse::<f64>()
                        .map_err(|_| parse_err(at + 1, format!("bad value `{value}`")))?;
                    values.push((name.to_string(), value));
                }
                break;
            }
            k += 1;
        }
    }
    let status = if status_text == "optimal" {
        Status::Optimal
    } else if status_text.contains("infeasible") {
        Status::Infeasible
    } else if feasible && !values.is_empty() {
        Status::Feasible
    } else {
        Status::Limit
    };
    Ok(ParsedSolution {
        status,
        objective: if matches!(status, Status::Optimal | Status::Feasible) {
            objective
        } else {
            None
        },
        values,
    })
}

pub fn parse_solution(text: &str, format: SolutionFormat) -> Result<ParsedSolution, MilpError> {
    match format {
        SolutionFormat::Cbc => parse_cbc(text),
        SolutionFormat::Highs => parse_highs(text),
    }
}

/// CBC prints `Lower bound:` in its run summary when it stops early.
fn bound_from_log(log: &str) -> Option<f64> {
    log.lines()
        .filter_map(|l| l.trim().strip_prefix("Lower bound:"))
        .rev()
        .find_map(|v| v.trim().parse::<f64>().ok())
}

/// Solves `model` with the configured external solver.
pub fn solve_external(
    model: &MilpModel,
    config: &ExternalConfig,
    time_limit: Option<Duration>,
) -> Result<BackendResult, MilpError> {
    let started = Instant::now();
    let limit = time_limit.map(|d| d.as_secs_f64()).or(config.time_limit);
    let dir = match &config.workdir {
        Some(d) => tempfile::Builder::new().prefix("mip").tempdir_in(d)?,
        None => tempfile::Builder::new().prefix("mip").tempdir()?,
    };
    let model_path = dir.path().join("model.mps");
    let solution_path = dir.path().join("model.sol");
    std::fs::write(&model_path, write_mps(model)?)?;
    let argv = config.argv(&model_path, &solution_path, limit);
    let (program, args) = argv
        .split_first()
        .ok_or_else(|| MilpError::External("empty command".into()))?;
    let output = Command::new(program)
        .args(args)
        .current_dir(dir.path())
        .output()
        .map_err(|e| MilpError::External(format!("cannot run `{program}`: {e}")))?;
    let log = String::from_utf8_lossy(&output.stdout);
    if !solution_path.exists() {
        return Err(MilpError::External(format!(
            "`{program}` exited with {} and wrote no solution; stderr: {}",
            output.status,
            String::from_utf8_lossy(&output.stderr).trim()
        )));
    }
    let parsed = parse_solution(&std::fs::read_to_string(&solution_path)?, config.format)?;

    let mut values = Vec::new();
    if matches!(parsed.status, Status::Optimal | Status::Feasible) {
        values = vec![0.0; model.columns().len()];
        for (name, v) in &parsed.values {
            if let Some(j) = model.column(name) {
                values[j] = *v;
            }
        }
        for (c, v) in model.columns().iter().zip(values.iter_mut()) {
            if c.kind == ColumnKind::Binary {
                let r = v.round();
                if (r - *v).abs() > INTEGRALITY_TOLERANCE {
                    return Err(MilpError::External(format!(
                        "binary column `{}` has value {v}",
                        c.name
                    )));
                }
                *v = r;
            }
        }
    }
    let objective = if values.is_empty() {
        None
    } else {
        Some(model.objective(&values))
    };
    let bound = match parsed.status {
        Status::Optimal => objective.unwrap_or(f64::NEG_INFINITY),
        Status::Infeasible => f64::INFINITY,
        _ => bound_from_log(&log).unwrap_or(f64::NEG_INFINITY),
    };
    Ok(BackendResult {
        status: parsed.status,
        values,
        objective,
        bound,
        nodes: 0,
        wall_time: started.elapsed(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cbc_optimal() {
        let text = "Optimal - objective value 3.00000000\n      0 x1         1       0\n**    1 y          0.5     0\n";
        let p = parse_solution(text, SolutionFormat::Cbc).unwrap();
        assert_eq!(p.status, Status::Optimal);
        assert_eq!(p.objective, Some(3.0));
        assert_eq!(p.values, vec![("x1".into(), 1.0), ("y".into(), 0.5)]);
    }

    #[test]
    fn cbc_other_statuses() {
        let p = parse_solution(
            "Infeasible - objective value 0.00000000\n",
            SolutionFormat::Cbc,
        )
        .unwrap();
        assert_eq!(p.status, Status::Infeasible);
        let p = parse_solution(
            "Stopped on time - objective value 7.00000000\n 0 a 1 0\n",
            SolutionFormat::Cbc,
        )
        .unwrap();
        assert_eq!(p.status, Status::Feasible);
        let p = parse_solution(
            "Stopped on time - objective value 1e+50\n",
            SolutionFormat::Cbc,
        )
        .unwrap();
        assert_eq!(p.status, Status::Limit);
        let p = parse_solution(
            "Stopped on time (no integer solution - continuous used) - objective value 4.17857143\n      1 s0   5   0\n",
            SolutionFormat::Cbc,
        )
        .unwrap();
        assert_eq!(p.status, Status::Limit);
        assert!(parse_solution("garbage", SolutionFormat::Cbc).is_err());
    }

    #[test]
    fn highs_optimal() {
        let text = "Model status\nOptimal\n\n# Primal solution values\nFeasible\nObjective 2\n# Columns 2\nx 1\ny 0\n# Rows 0\n";
        let p = parse_solution(text, SolutionFormat::Highs).unwrap();
        assert_eq!(p.status, Status::Optimal);
        assert_eq!(p.objective, Some(2.0));
        assert_eq!(p.values, vec![("x".into(), 1.0), ("y".into(), 0.0)]);
        let truncated = "Model status\nOptimal\n\n# Primal solution values\nFeasible\nObjective 2\n# Columns 2\nx 1\n";
        assert!(parse_solution(truncated, SolutionFormat::Highs).is_err());
    }

    #[test]
    fn argv_substitution() {
        let cfg = ExternalConfig::cbc("cbc");
        let argv = cfg.argv(Path::new("/m.mps"), Path::new("/s.txt"), Some(2.5));
        assert_eq!(
            argv,
            [
                "cbc",
                "/m.mps",
                "sec",
                "3",
                "solve",
                "printingOptions",
                "all",
                "solu",
                "/s.txt"
            ]
        );
        let argv = cfg.argv(Path::new("/m.mps"), Path::new("/s.txt"), None);
        assert_eq!(argv[1..3], ["/m.mps", "solve"]);
    }

    #[test]
    fn missing_executable() {
        let mut m = MilpModel::new("m", "");
        m.add_binary("a", 1.0).unwrap();
        let cfg = ExternalConfig::cbc("/nonexistent/solver");
        assert!(matches!(
            solve_external(&m, &cfg, None),
            Err(MilpError::External(_))
        ));
    }

    #[test]
    fn config_from_toml() {
        let cfg: ExternalConfig =
            toml::from_str("command = \"highs --model_file {model}\"\nformat = \"highs\"\n")
                .unwrap();
        assert_eq!(cfg.format, SolutionFormat::Highs);
        assert_eq!(cfg.time_limit_args, "sec {seconds}");
    }
}
