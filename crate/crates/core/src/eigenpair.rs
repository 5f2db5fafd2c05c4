use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::series::{Basis, ScalarSeries, VectorSeries};

/// Per-run diagnostics attached to an [`EigenPairSeries`].
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Position of the seed eigenpair in the sorted spectrum it came from.
    pub index: Option<usize>,
    /// Residual `||E x_k - rhs_k||_inf` of each bordered solve, orders 1..p.
    #[serde(default)]
    pub order_residuals: Vec<f64>,
    pub condition_estimate: Option<f64>,
    pub newton_iterations: Option<usize>,
    /// `||R||_inf` before the first step and after every Newton step.
    #[serde(default)]
    pub newton_residuals: Vec<f64>,
    /// Final residual (Newton) or largest order residual (Taylor).
    pub residual_norm: f64,
    /// Indices of other series that evaluate to the same eigenvalue path.
    #[serde(default)]
    pub collisions: Vec<usize>,
}

/// Truncated series for one eigenvalue path and its eigenvector path.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenPairSeries {
    pub eigenvalue: ScalarSeries,
    pub eigenvector: VectorSeries,
    pub diagnostics: Diagnostics,
}

impl EigenPairSeries {
    pub fn new(eigenvalue: ScalarSeries, eigenvector: VectorSeries, diagnostics: Diagnostics) -> Result<Self> {
        if eigenvalue.basis() != eigenvector.basis() || eigenvalue.order() != eigenvector.order() {
            return Err(Error::InvalidArgument("eigenvalue and eigenvector series disagree in basis or order".into()));
        }
        Ok(EigenPairSeries { eigenvalue, eigenvector, diagnostics })
    }

    pub fn basis(&self) -> Basis {
        self.eigenvalue.basis()
    }

    pub fn order(&self) -> usize {
        self.eigenvalue.order()
    }

    pub fn dim(&self) -> usize {
        self.eigenvector.dim()
    }

    pub fn to_json(&self) -> Value {
        serde_json::json!({
            "basis": self.eigenvalue.to_json()["basis"].clone(),
            "n": self.dim(),
            "p": self.order(),
            "eigenvalue": self.eigenvalue.to_json(),
            "eigenvector": self.eigenvector.to_json(),
            "diagnostics": serde_json::to_value(&self.diagnostics).expect("diagnostics serialize"),
        })
    }

    pub fn from_json(value: &Value) -> Result<Self> {
        let field = |k: &str| value.get(k).ok_or_else(|| Error::InvalidArgument(format!("eigenpair document lacks '{k}'")));
        let eigenvalue = ScalarSeries::from_json(field("eigenvalue")?)?;
        let eigenvector = VectorSeries::from_json(field("eigenvector")?)?;
        let diagnostics = match value.get("diagnostics") {
            Some(d) => serde_json::from_value(d.clone())?,
            None => Diagnostics::default(),
        };
        EigenPairSeries::new(eigenvalue, eigenvector, diagnostics)
    }
}
