//! Taylor coefficients of eigenpair paths.
//!
//! Matching powers of `(mu - mu0)` in `A(mu) v(mu) = lambda(mu) v(mu)` together
//! with the normalization `b(v, v) = 1` gives, for every order `k >= 1`,
//!
//! ```text
//!     [ 0  | b(v0, .)       ] [lambda_k]   [ -1/2 sum_{l=1}^{k-1} C(k,l) b(v_{k-l}, v_l)                        ]
//!     [ v0 | lambda0 I - A0 ] [  v_k   ] = [ sum_{l=0}^{k-1} C(k,l) A_{k-l} v_l - sum_{l=1}^{k-1} C(k,l) v_{k-l} lambda_l ]
//! ```
//!
//! where `b` is the bilinear (`x^T y`) or sesquilinear (`x^H y`) pairing. The
//! coefficient matrix is the same for every order, so it is factorized once;
//! when all eigenpairs are wanted one shared Schur form serves every pair.
//! Orders depend on all earlier ones, so rounding errors accumulate with `p`.

use crate::eigenpair::{Diagnostics, EigenPairSeries};
use crate::error::{Error, Result};
use crate::linalg::{eigen_all, BorderedSolve, BorderedSystem, Conjugation, EigenDecomposition, Precision, ReducedBordered};
use crate::problems::ParametricProblem;
use crate::series::{Basis, CMatrix, CVector, ScalarSeries, VectorSeries, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Selector {
    /// Position in the sorted spectrum of `A(mu0)` (descending real part).
    /// Positions are not stable across different expansion points.
    Index(usize),
    All,
}

#[derive(Clone, Copy, Debug)]
pub struct TaylorRequest {
    pub mu0: f64,
    pub order: usize,
    pub selector: Selector,
    /// Round the bordered matrix to `f32` before factorizing it.
    pub single_precision_e: bool,
}

impl TaylorRequest {
    pub fn new(mu0: f64, order: usize, selector: Selector) -> Self {
        TaylorRequest { mu0, order, selector, single_precision_e: false }
    }

    fn precision(&self) -> Precision {
        if self.single_precision_e {
            Precision::Single
        } else {
            Precision::Double
        }
    }
}

/// Weights of the triangular recurrence: binomial for Taylor, unit for the
/// Chebyshev warm start (which keeps only the leading term of each product).
#[derive(Clone, Debug)]
pub enum Weights {
    Binomial(Vec<Vec<f64>>),
    Unit,
}

impl Weights {
    pub fn binomial(max_order: usize) -> Self {
        Weights::Binomial(binomial_table(max_order))
    }

    fn get(&self, k: usize, l: usize) -> f64 {
        match self {
            Weights::Binomial(t) => t[k][l],
            Weights::Unit => 1.0,
        }
    }
}

/// Pascal's triangle in floating point; exact through row 56.
pub fn binomial_table(max_order: usize) -> Vec<Vec<f64>> {
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(max_order + 1);
    for k in 0..=max_order {
        let mut row = vec![1.0; k + 1];
        for l in 1..k {
            row[l] = rows[k - 1][l - 1] + rows[k - 1][l];
        }
        rows.push(row);
    }
    rows
}

fn recurrence_rhs(
    k: usize,
    a: &[CMatrix],
    vectors: &[CVector],
    lambdas: &[C64],
    conj: Conjugation,
    weights: &Weights,
) -> Result<(C64, CVector)> {
    if k == 0 || vectors.len() < k || lambdas.len() < k {
        return Err(Error::InvalidArgument(format!("order {k} needs {k} prior coefficients")));
    }
    if a.len() <= k {
        return Err(Error::MissingDerivative { order: k, reason: format!("only {} matrices supplied", a.len()) });
    }
    let n = vectors[0].len();
    let mut y = CVector::zeros(n);
    let mut z = C64::new(0.0, 0.0);
    for l in 0..k {
        let c = C64::new(weights.get(k, l), 0.0);
        y.gemv(c, &a[k - l], &vectors[l], C64::new(1.0, 0.0));
        if l >= 1 {
            y.axpy(-c * lambdas[l], &vectors[k - l], C64::new(1.0, 0.0));
            z += c * conj.dot(&vectors[k - l], &vectors[l]);
        }
    }
    Ok((-0.5 * z, y))
}

/// Right-hand side `(z, y)` of the order-`k` bordered system.
pub fn taylor_rhs(
    k: usize,
    derivs: &[CMatrix],
    vectors: &[CVector],
    lambdas: &[C64],
    conj: Conjugation,
) -> Result<(C64, CVector)> {
    recurrence_rhs(k, derivs, vectors, lambdas, conj, &Weights::binomial(k))
}

/// Coefficients and per-order residuals from the triangular recurrence.
#[derive(Clone, Debug)]
pub struct Recurrence {
    pub lambdas: Vec<C64>,
    pub vectors: Vec<CVector>,
    pub residuals: Vec<f64>,
}

/// Runs the order-by-order forward substitution from a seed pair
/// `(lambda0, v0)` for orders `1..=order`.
pub fn forward_substitution(
    coeffs: &[CMatrix],
    lambda0: C64,
    v0: &CVector,
    order: usize,
    solver: &dyn BorderedSolve,
    conj: Conjugation,
    weights: &Weights,
) -> Result<Recurrence> {
    let mut lambdas = Vec::with_capacity(order + 1);
    let mut vectors = Vec::with_capacity(order + 1);
    let mut residuals = Vec::with_capacity(order);
    lambdas.push(lambda0);
    vectors.push(v0.clone());
    for k in 1..=order {
        let (z, y) = recurrence_rhs(k, coeffs, &vectors, &lambdas, conj, weights)?;
        let (lk, vk) = solver.solve(z, &y)?;
        let res = solver.residual(lk, &vk, z, &y);
        if !res.is_finite() {
            return Err(Error::NonSimpleEigenvalue { detail: format!("non-finite solution at order {k}") });
        }
        residuals.push(res);
        lambdas.push(lk);
        vectors.push(vk);
    }
    Ok(Recurrence { lambdas, vectors, residuals })
}

fn assemble(basis: Basis, rec: Recurrence, mut diagnostics: Diagnostics) -> Result<EigenPairSeries> {
    diagnostics.residual_norm = rec.residuals.iter().copied().fold(0.0, f64::max);
    diagnostics.order_residuals = rec.residuals;
    EigenPairSeries::new(ScalarSeries::new(basis, rec.lambdas)?, VectorSeries::new(basis, rec.vectors)?, diagnostics)
}

/// Taylor coefficients for a caller-supplied seed pair, with a freshly
/// factorized bordered matrix.
pub fn taylor_coefficients(
    derivs: &[CMatrix],
    mu0: f64,
    lambda0: C64,
    v0: &CVector,
    conj: Conjugation,
    precision: Precision,
) -> Result<EigenPairSeries> {
    let order = derivs.len().saturating_sub(1);
    let basis = Basis::taylor(mu0)?;
    let mut diag = Diagnostics::default();
    if order == 0 {
        return assemble(basis, Recurrence { lambdas: vec![lambda0], vectors: vec![v0.clone()], residuals: vec![] }, diag);
    }
    let sys = BorderedSystem::build(&derivs[0], v0, lambda0, conj, precision)?;
    diag.condition_estimate = Some(sys.condition_estimate());
    let rec = forward_substitution(derivs, lambda0, v0, order, &sys, conj, &Weights::binomial(order))?;
    assemble(basis, rec, diag)
}

fn derivatives(problem: &dyn ParametricProblem, req: &TaylorRequest) -> Result<Vec<CMatrix>> {
    let derivs = problem.derivatives(req.mu0, req.order)?;
    if derivs.len() != req.order + 1 {
        return Err(Error::MissingDerivative {
            order: derivs.len(),
            reason: format!("problem '{}' returned {} matrices", problem.name(), derivs.len()),
        });
    }
    Ok(derivs)
}

/// Expands the single eigenpair selected by `req.selector`.
pub fn taylor_expand_eigenpair(problem: &dyn ParametricProblem, req: &TaylorRequest) -> Result<EigenPairSeries> {
    let Selector::Index(k) = req.selector else {
        return Err(Error::InvalidArgument("taylor_expand_eigenpair needs an index selector".into()));
    };
    let derivs = derivatives(problem, req)?;
    let decomp = eigen_all(&derivs[0], problem.hermitian())?;
    if k >= decomp.dim() {
        return Err(Error::InvalidArgument(format!("eigenpair index {k} out of range for n = {}", decomp.dim())));
    }
    let conj = Conjugation::for_hermitian(problem.hermitian());
    let mut series = taylor_coefficients(&derivs, req.mu0, decomp.values[k], &decomp.vectors[k], conj, req.precision())?;
    series.diagnostics.index = Some(k);
    Ok(series)
}

/// Expands the pairs of `A(mu0)` chosen by `req.selector`, one result per
/// pair in spectrum order. The Schur form is computed once and each pair
/// then costs `O(p^2 n^2)`. Failures are reported per pair.
pub fn taylor_expand_all(problem: &dyn ParametricProblem, req: &TaylorRequest) -> Result<Vec<Result<EigenPairSeries>>> {
    let derivs = derivatives(problem, req)?;
    let decomp = eigen_all(&derivs[0], problem.hermitian())?;
    let indices: Vec<usize> = match req.selector {
        Selector::All => (0..decomp.dim()).collect(),
        Selector::Index(k) if k < decomp.dim() => vec![k],
        Selector::Index(k) => {
            return Err(Error::InvalidArgument(format!("eigenpair index {k} out of range for n = {}", decomp.dim())))
        }
    };
    let conj = Conjugation::for_hermitian(problem.hermitian());
    Ok(expand_all_with(&derivs, req.mu0, &decomp, &indices, conj, req.precision()))
}

pub(crate) fn expand_all_with(
    derivs: &[CMatrix],
    mu0: f64,
    decomp: &EigenDecomposition,
    indices: &[usize],
    conj: Conjugation,
    precision: Precision,
) -> Vec<Result<EigenPairSeries>> {
    let order = derivs.len() - 1;
    let weights = Weights::binomial(order);
    let basis = match Basis::taylor(mu0) {
        Ok(b) => b,
        Err(e) => return vec![Err(e)],
    };
    indices
        .iter()
        .map(|&k| {
            let (lambda0, v0) = (decomp.values[k], &decomp.vectors[k]);
            let diag = Diagnostics { index: Some(k), ..Diagnostics::default() };
            if order == 0 {
                return assemble(basis, Recurrence { lambdas: vec![lambda0], vectors: vec![v0.clone()], residuals: vec![] }, diag);
            }
            let rec = match precision {
                Precision::Single => {
                    let sys = BorderedSystem::build(&derivs[0], v0, lambda0, conj, precision)?;
                    forward_substitution(derivs, lambda0, v0, order, &sys, conj, &weights)?
                }
                Precision::Double => {
                    let solver = ReducedBordered::new(&derivs[0], &decomp.schur_q, &decomp.schur_t, v0, lambda0, conj)?;
                    forward_substitution(derivs, lambda0, v0, order, &solver, conj, &weights)?
                }
            };
            assemble(basis, rec, diag)
        })
        .collect()
}
