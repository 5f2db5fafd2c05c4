use std::path::PathBuf;

use eigpath::problems::{jordan, problem_from_config, spring_chain, torus_kernel, ConfigProblem};
use eigpath::ParametricProblem;
use serde_json::{json, Value};

use crate::output::sha256_hex;
use crate::Failure;

/// Which problem a run used, in a form that can be stored in series files
/// and rebuilt later.
#[derive(Clone, Debug, PartialEq)]
pub enum ProblemSpec {
    Builtin { name: String, n: usize },
    Config { path: PathBuf, sha256: String },
}

impl ProblemSpec {
    /// Parses `example1|example2|example3|config:<path>`.
    pub fn resolve(text: &str, n: Option<usize>) -> Result<ProblemSpec, Failure> {
        if let Some(path) = text.strip_prefix("config:") {
            if path.is_empty() {
                return Err(Failure::usage("config: needs a path"));
            }
            let path = std::fs::canonicalize(path).map_err(|e| Failure::usage(format!("config file '{path}': {e}")))?;
            let bytes = std::fs::read(&path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
            return Ok(ProblemSpec::Config { path, sha256: sha256_hex(&bytes) });
        }
        match text {
            "example1" | "example2" | "example3" => {
                let n = n.ok_or_else(|| Failure::usage(format!("--n is required for {text}")))?;
                Ok(ProblemSpec::Builtin { name: text.to_string(), n })
            }
            _ => Err(Failure::usage(format!("unknown problem '{text}' (expected example1, example2, example3 or config:<path>)"))),
        }
    }

    pub fn build(&self) -> Result<Box<dyn ParametricProblem>, Failure> {
        match self {
            ProblemSpec::Builtin { name, n } => {
                let p: Box<dyn ParametricProblem> = match name.as_str() {
                    "example1" => Box::new(torus_kernel(*n)?),
                    "example2" => Box::new(spring_chain(*n)?),
                    "example3" => Box::new(jordan(*n)?),
                    other => return Err(Failure::usage(format!("unknown built-in problem '{other}'"))),
                };
                Ok(p)
            }
            ProblemSpec::Config { path, sha256 } => {
                let bytes = std::fs::read(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
                if &sha256_hex(&bytes) != sha256 {
                    return Err(Failure::usage(format!("{} changed since the series were computed", path.display())));
                }
                let problem: ConfigProblem = problem_from_config(path)?;
                Ok(Box::new(problem))
            }
        }
    }

    pub fn config_hash(&self) -> Option<String> {
        match self {
            ProblemSpec::Config { sha256, .. } => Some(sha256.clone()),
            ProblemSpec::Builtin { .. } => None,
        }
    }

    pub fn describe(&self) -> String {
        match self {
            ProblemSpec::Builtin { name, n } => format!("{name} (n = {n})"),
            ProblemSpec::Config { path, .. } => format!("config:{}", path.display()),
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            ProblemSpec::Builtin { name, n } => json!({ "name": name, "n": n }),
            ProblemSpec::Config { path, sha256 } => json!({ "name": "config", "path": path, "sha256": sha256 }),
        }
    }

    pub fn from_json(v: &Value) -> Result<ProblemSpec, Failure> {
        let bad = || Failure::usage(format!("unrecognized problem record {v}"));
        match v.get("name").and_then(Value::as_str).ok_or_else(bad)? {
            "config" => Ok(ProblemSpec::Config {
                path: PathBuf::from(v.get("path").and_then(Value::as_str).ok_or_else(bad)?),
                sha256: v.get("sha256").and_then(Value::as_str).ok_or_else(bad)?.to_string(),
            }),
            name => Ok(ProblemSpec::Builtin {
                name: name.to_string(),
                n: v.get("n").and_then(Value::as_u64).ok_or_else(bad)? as usize,
            }),
        }
    }
}
