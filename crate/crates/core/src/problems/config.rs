use std::path::Path;

use serde::Deserialize;

use super::expr::{parse_expression, Expr};
use super::jet::taylor_arith_eval;
use super::{Domain, ParametricProblem};
use crate::error::{Error, Result};
use crate::series::{CMatrix, C64};

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigDoc {
    name: String,
    n: usize,
    #[serde(default)]
    hermitian: bool,
    domain: Option<DomainDoc>,
    entries: Option<DenseDoc>,
    sparse: Option<Vec<SparseEntry>>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum DomainDoc {
    Named(String),
    Interval([f64; 2]),
}

#[derive(Deserialize)]
#[serde(untagged)]
enum DenseDoc {
    Flat(Vec<String>),
    Rows(Vec<Vec<String>>),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SparseEntry {
    row: usize,
    col: usize,
    expr: String,
}

/// A problem whose entries are expressions in `mu`; unlisted sparse entries
/// are zero.
#[derive(Clone, Debug)]
pub struct ConfigProblem {
    name: String,
    n: usize,
    hermitian: bool,
    domain: Domain,
    /// Zero-based `(row, col, expr)`.
    entries: Vec<(usize, usize, Expr)>,
}

pub fn problem_from_config(path: &Path) -> Result<ConfigProblem> {
    let text = std::fs::read_to_string(path)?;
    ConfigProblem::from_toml_str(&text)
}

impl ConfigProblem {
    pub fn from_toml_str(text: &str) -> Result<ConfigProblem> {
        let doc: ConfigDoc = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let n = doc.n;
        if n == 0 {
            return Err(Error::Config("n must be positive".into()));
        }
        let domain = match doc.domain {
            None => Domain::AllReals,
            Some(DomainDoc::Named(s)) if s == "all" => Domain::AllReals,
            Some(DomainDoc::Named(s)) if s == "nonzero" => Domain::NonZero,
            Some(DomainDoc::Named(s)) => {
                return Err(Error::Config(format!("domain must be \"all\", \"nonzero\" or [lo, hi], got \"{s}\"")))
            }
            Some(DomainDoc::Interval([lo, hi])) if lo < hi => Domain::Interval { lo, hi },
            Some(DomainDoc::Interval([lo, hi])) => {
                return Err(Error::Config(format!("domain interval [{lo}, {hi}] is empty")))
            }
        };
        let raw: Vec<(usize, usize, String)> = match (doc.entries, doc.sparse) {
            (Some(_), Some(_)) => return Err(Error::Config("give either entries or sparse, not both".into())),
            (None, None) => return Err(Error::Config("missing entries or sparse".into())),
            (Some(DenseDoc::Flat(list)), None) => {
                if list.len() != n * n {
                    return Err(Error::Config(format!("entries has {} expressions, expected n*n = {}", list.len(), n * n)));
                }
                list.into_iter().enumerate().map(|(k, e)| (k / n, k % n, e)).collect()
            }
            (Some(DenseDoc::Rows(rows)), None) => {
                if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                    return Err(Error::Config(format!("entries must be {n} rows of {n} expressions")));
                }
                rows.into_iter()
                    .enumerate()
                    .flat_map(|(i, r)| r.into_iter().enumerate().map(move |(j, e)| (i, j, e)))
                    .collect()
            }
            (None, Some(list)) => {
                let mut seen = std::collections::HashSet::new();
                let mut out = Vec::with_capacity(list.len());
                for e in list {
                    if !(1..=n).contains(&e.row) || !(1..=n).contains(&e.col) {
                        return Err(Error::Config(format!("sparse entry ({}, {}) outside 1..={n}", e.row, e.col)));
                    }
                    if !seen.insert((e.row, e.col)) {
                        return Err(Error::Config(format!("sparse entry ({}, {}) listed twice", e.row, e.col)));
                    }
                    out.push((e.row - 1, e.col - 1, e.expr));
                }
                out
            }
        };
        let mut entries = Vec::with_capacity(raw.len());
        for (i, j, text) in raw {
            let expr = parse_expression(&text).map_err(|e| Error::Config(format!("entry ({}, {}): {e}", i + 1, j + 1)))?;
            entries.push((i, j, expr));
        }
        if doc.hermitian {
            let lookup = |i: usize, j: usize| entries.iter().find(|(a, b, _)| *a == i && *b == j).map(|t| &t.2);
            for (i, j, e) in &entries {
                if lookup(*j, *i) != Some(e) {
                    return Err(Error::Config(format!(
                        "hermitian problem needs entry ({}, {}) to repeat the expression of ({}, {})",
                        j + 1,
                        i + 1,
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        Ok(ConfigProblem { name: doc.name, n, hermitian: doc.hermitian, domain, entries })
    }
}

impl ParametricProblem for ConfigProblem {
    fn name(&self) -> &str {
        &self.name
    }
    fn dim(&self) -> usize {
        self.n
    }
    fn hermitian(&self) -> bool {
        self.hermitian
    }
    fn domain(&self) -> Domain {
        self.domain
    }
    fn eval(&self, mu: f64) -> Result<CMatrix> {
        self.domain.check(&self.name, mu)?;
        let mut a = CMatrix::zeros(self.n, self.n);
        for (i, j, e) in &self.entries {
            let x = e.eval(mu);
            if !x.is_finite() {
                return Err(Error::Domain(format!("entry ({}, {}) = {e} is not finite at mu = {mu}", i + 1, j + 1)));
            }
            a[(*i, *j)] = C64::new(x, 0.0);
        }
        Ok(a)
    }
    fn derivatives(&self, mu0: f64, order: usize) -> Result<Vec<CMatrix>> {
        self.domain.check(&self.name, mu0)?;
        let mut out = vec![CMatrix::zeros(self.n, self.n); order + 1];
        for (i, j, e) in &self.entries {
            let d = taylor_arith_eval(e, mu0, order)
                .map_err(|err| Error::Domain(format!("entry ({}, {}): {err}", i + 1, j + 1)))?;
            for (m, v) in out.iter_mut().zip(d) {
                m[(*i, *j)] = C64::new(v, 0.0);
            }
        }
        Ok(out)
    }
}
