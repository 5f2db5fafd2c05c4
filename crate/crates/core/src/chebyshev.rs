//! Second-kind Chebyshev expansions of eigenpair paths on an interval.
//!
//! With `A(mu) = sum_i A_i U_i(s)`, `v(mu) = sum_j v_j U_j(s)` and
//! `lambda(mu) = sum_i lambda_i U_i(s)`, every product `U_i U_j` spreads over
//! the degrees `|i-j|, |i-j|+2, ..., i+j`. Keeping degrees `0..=p` gives the
//! coupled system solved here by Newton's method:
//!
//! ```text
//!     R_k^vec = sum_{k in D(i,j)} (lambda_i v_j - A_i v_j)          = 0
//!     R_k^nrm = sum_{k in D(i,j)} v_i^T v_j - [k == 0]              = 0
//! ```
//!
//! The normalization pairs vectors without conjugation in every case, so
//! the residual is holomorphic in the unknowns.
//!
//! Newton starts from the triangular system that keeps only the leading term
//! of each product. That seed is the Taylor recurrence with unit weights.

use std::f64::consts::PI;

use nalgebra::LU;

use crate::eigenpair::{Diagnostics, EigenPairSeries};
use crate::error::{Error, Result};
use crate::linalg::{eigen_all, Conjugation, EigenDecomposition, ReducedBordered};
use crate::problems::ParametricProblem;
use crate::series::{chebyshev_u_values, u_product_degrees, Basis, CMatrix, MaxAbs, CVector, MatrixSeries, ScalarSeries, VectorSeries, C64};
use crate::taylor::{forward_substitution, Selector, Weights};

pub const DEFAULT_NEWTON_TOL: f64 = 1e-12;
pub const DEFAULT_NEWTON_MAX_ITER: usize = 30;
/// Collision test: two paths closer than this at every probe point.
pub const COLLISION_TOL: f64 = 1e-8;
const COLLISION_PROBES: usize = 5;
/// Smallest acceptable `|u_ii| / max |u_jj|` in the Jacobian factorization.
pub const JACOBIAN_PIVOT_FLOOR: f64 = 1e-14;

pub fn default_quadrature_size(order: usize) -> usize {
    64.max(4 * (order + 1))
}

#[derive(Clone, Copy, Debug)]
pub struct ChebRequest {
    pub lo: f64,
    pub hi: f64,
    pub order: usize,
    /// Number of quadrature nodes; `None` picks [`default_quadrature_size`].
    pub quad_m: Option<usize>,
    pub selector: Selector,
    pub newton_tol: f64,
    pub newton_max_iter: usize,
}

impl ChebRequest {
    pub fn new(lo: f64, hi: f64, order: usize, selector: Selector) -> Self {
        ChebRequest {
            lo,
            hi,
            order,
            quad_m: None,
            selector,
            newton_tol: DEFAULT_NEWTON_TOL,
            newton_max_iter: DEFAULT_NEWTON_MAX_ITER,
        }
    }

    pub fn quadrature_size(&self) -> usize {
        self.quad_m.unwrap_or_else(|| default_quadrature_size(self.order))
    }

    fn validate(&self) -> Result<Basis> {
        let basis = Basis::chebyshev(self.lo, self.hi)?;
        let m = self.quadrature_size();
        if m <= 2 * self.order {
            return Err(Error::InvalidArgument(format!("quadrature size {m} must exceed 2p = {}", 2 * self.order)));
        }
        if !(self.newton_tol > 0.0) {
            return Err(Error::InvalidArgument(format!("Newton tolerance must be positive, got {}", self.newton_tol)));
        }
        Ok(basis)
    }
}

/// `A_i = (2/pi) sum_j w_j A(mu(s_j)) U_i(s_j)` with the second-kind
/// Gauss-Chebyshev rule of `m` nodes.
pub fn project_matrix_coeffs(problem: &dyn ParametricProblem, lo: f64, hi: f64, order: usize, m: usize) -> Result<MatrixSeries> {
    let basis = Basis::chebyshev(lo, hi)?;
    if m <= 2 * order {
        return Err(Error::InvalidArgument(format!("quadrature size {m} must exceed 2p = {}", 2 * order)));
    }
    let n = problem.dim();
    let mut coeffs = vec![CMatrix::zeros(n, n); order + 1];
    for j in 1..=m {
        let theta = j as f64 * PI / (m + 1) as f64;
        let s = theta.cos();
        let weight = PI / (m + 1) as f64 * theta.sin().powi(2);
        let mu = basis.physical(s);
        let a = problem.eval(mu)?;
        if a.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFiniteSample { node: j, mu });
        }
        for (c, u) in coeffs.iter_mut().zip(chebyshev_u_values(s, order)) {
            *c += &a * C64::new(2.0 / PI * weight * u, 0.0);
        }
    }
    MatrixSeries::new(basis, coeffs)
}

fn dims(coeffs: &[CMatrix]) -> Result<(usize, usize)> {
    let first = coeffs.first().ok_or_else(|| Error::InvalidArgument("no matrix coefficients".into()))?;
    Ok((first.nrows(), coeffs.len() - 1))
}

/// Packs `(lambda_0, v_0, lambda_1, v_1, ...)` into one vector.
pub fn pack(lambdas: &[C64], vectors: &[CVector]) -> CVector {
    let n = vectors.first().map_or(0, |v| v.len());
    let mut x = CVector::zeros(lambdas.len() * (n + 1));
    for (k, (l, v)) in lambdas.iter().zip(vectors).enumerate() {
        x[k * (n + 1)] = *l;
        x.rows_mut(k * (n + 1) + 1, n).copy_from(v);
    }
    x
}

pub fn unpack(x: &CVector, n: usize) -> (Vec<C64>, Vec<CVector>) {
    x.as_slice()
        .chunks(n + 1)
        .map(|b| (b[0], CVector::from_column_slice(&b[1..])))
        .unzip()
}

fn check_packed(x: &CVector, n: usize, p: usize) -> Result<()> {
    if x.len() != (p + 1) * (n + 1) {
        return Err(Error::InvalidArgument(format!(
            "packed vector has length {}, expected (p+1)(n+1) = {}",
            x.len(),
            (p + 1) * (n + 1)
        )));
    }
    Ok(())
}

/// Degree lists `D(i, j)` clipped to `0..=p`.
fn degree_table(p: usize) -> Vec<Vec<Vec<usize>>> {
    (0..=p)
        .map(|i| (0..=p).map(|j| u_product_degrees(i, j).into_iter().filter(|&k| k <= p).collect()).collect())
        .collect()
}

fn tdot(x: &CVector, y: &CVector) -> C64 {
    Conjugation::Transpose.dot(x, y)
}

/// Seed for Newton: the eigenpair `index` of `A_0` (in the sorted order of
/// [`eigen_all`]) extended by the unit-weight triangular recurrence. The
/// seed vector is scaled so that `v0^T v0 = 1`.
pub fn warm_start(coeffs: &[CMatrix], hermitian: bool, index: usize) -> Result<CVector> {
    let decomp = eigen_all(&coeffs[0], hermitian)?;
    warm_start_with(coeffs, &decomp, index)
}

fn warm_start_with(coeffs: &[CMatrix], decomp: &EigenDecomposition, index: usize) -> Result<CVector> {
    let (_, p) = dims(coeffs)?;
    if index >= decomp.dim() {
        return Err(Error::InvalidArgument(format!("eigenpair index {index} out of range for n = {}", decomp.dim())));
    }
    let lambda0 = decomp.values[index];
    let mut v0 = decomp.vectors[index].clone();
    let vv = tdot(&v0, &v0);
    if vv.norm() < 1e-10 * v0.norm_squared() {
        return Err(Error::NonSimpleEigenvalue {
            detail: format!("eigenvector {index} of A_0 is isotropic (v^T v = {vv})"),
        });
    }
    v0 /= vv.sqrt();
    if p == 0 {
        return Ok(pack(&[lambda0], &[v0]));
    }
    let solver = ReducedBordered::new(&coeffs[0], &decomp.schur_q, &decomp.schur_t, &v0, lambda0, Conjugation::Transpose)?;
    let rec = forward_substitution(coeffs, lambda0, &v0, p, &solver, Conjugation::Transpose, &Weights::Unit)?;
    Ok(pack(&rec.lambdas, &rec.vectors))
}

/// Residual of the truncated coupled system at the packed unknowns `x`.
pub fn cheb_residual(x: &CVector, coeffs: &[CMatrix]) -> Result<CVector> {
    let (n, p) = dims(coeffs)?;
    check_packed(x, n, p)?;
    let (lambdas, vectors) = unpack(x, n);
    let table = degree_table(p);
    let mut r = CVector::zeros(x.len());
    r[0] = C64::new(-1.0, 0.0);
    for i in 0..=p {
        for j in 0..=p {
            let ks = &table[i][j];
            if ks.is_empty() {
                continue;
            }
            let term = &vectors[j] * lambdas[i] - &coeffs[i] * &vectors[j];
            let dot = tdot(&vectors[i], &vectors[j]);
            for &k in ks {
                let base = k * (n + 1);
                r[base] += dot;
                let mut rows = r.rows_mut(base + 1, n);
                rows += &term;
            }
        }
    }
    Ok(r)
}

/// Analytic Jacobian of [`cheb_residual`]; rows and columns follow the
/// packing of [`pack`].
pub fn cheb_jacobian(x: &CVector, coeffs: &[CMatrix]) -> Result<CMatrix> {
    let (n, p) = dims(coeffs)?;
    check_packed(x, n, p)?;
    let (lambdas, vectors) = unpack(x, n);
    let table = degree_table(p);
    let size = x.len();
    let mut jac = CMatrix::zeros(size, size);
    for i in 0..=p {
        for j in 0..=p {
            let ks = &table[i][j];
            if ks.is_empty() {
                continue;
            }
            let mut core = -&coeffs[i];
            for d in 0..n {
                core[(d, d)] += lambdas[i];
            }
            for &k in ks {
                let row = k * (n + 1);
                // d/d lambda_i and d/d v_j of lambda_i v_j - A_i v_j
                for d in 0..n {
                    jac[(row + 1 + d, i * (n + 1))] += vectors[j][d];
                }
                let mut block = jac.view_mut((row + 1, j * (n + 1) + 1), (n, n));
                block += &core;
                // d/dv of v_i^T v_j, summed over ordered pairs
                for d in 0..n {
                    jac[(row, i * (n + 1) + 1 + d)] += vectors[j][d];
                    jac[(row, j * (n + 1) + 1 + d)] += vectors[i][d];
                }
            }
        }
    }
    Ok(jac)
}

fn coefficient_scale(coeffs: &[CMatrix]) -> f64 {
    1.0 + coeffs.iter().map(|a| a.norm()).fold(0.0, f64::max)
}

/// Outcome of [`newton_refine`] before it is wrapped into a series.
#[derive(Clone, Debug)]
pub struct NewtonResult {
    pub x: CVector,
    pub iterations: usize,
    /// `||R||_inf` at the start and after every step.
    pub residuals: Vec<f64>,
}

fn into_series(basis: Basis, n: usize, x: &CVector, diagnostics: Diagnostics) -> Result<EigenPairSeries> {
    let (lambdas, vectors) = unpack(x, n);
    EigenPairSeries::new(ScalarSeries::new(basis, lambdas)?, VectorSeries::new(basis, vectors)?, diagnostics)
}

/// Full-step Newton on the coupled system until
/// `||R||_inf <= tol (1 + max_i ||A_i||_F)`.
pub fn newton_solve(x0: &CVector, coeffs: &[CMatrix], tol: f64, max_iter: usize) -> Result<NewtonResult> {
    let (n, _) = dims(coeffs)?;
    let threshold = tol * coefficient_scale(coeffs);
    let mut x = x0.clone();
    let mut residuals = Vec::new();
    let mut best = (f64::INFINITY, x.clone());
    for iteration in 0..=max_iter {
        let r = cheb_residual(&x, coeffs)?;
        let norm = r.max_abs();
        residuals.push(norm);
        if norm < best.0 {
            best = (norm, x.clone());
        }
        if norm <= threshold {
            return Ok(NewtonResult { x, iterations: iteration, residuals });
        }
        if iteration == max_iter || !norm.is_finite() {
            break;
        }
        let lu = LU::new(cheb_jacobian(&x, coeffs)?);
        let diag = lu.u().diagonal().map(|z| z.norm());
        let (lo, hi) = (diag.min(), diag.max());
        if !(lo > JACOBIAN_PIVOT_FLOOR * hi) {
            return Err(Error::SingularJacobian { pivot: if hi > 0.0 { lo / hi } else { 0.0 } });
        }
        let dx = lu.solve(&r).ok_or(Error::SingularJacobian { pivot: 0.0 })?;
        x -= dx;
    }
    let iterations = residuals.len() - 1;
    let basis = Basis::chebyshev(-1.0, 1.0)?;
    let diagnostics = Diagnostics {
        newton_iterations: Some(iterations),
        newton_residuals: residuals.clone(),
        residual_norm: best.0,
        ..Diagnostics::default()
    };
    Err(Error::NewtonNoConvergence {
        iterations,
        residual: *residuals.last().unwrap_or(&f64::NAN),
        best: Box::new(into_series(basis, n, &best.1, diagnostics)?),
    })
}

/// Newton refinement returning the series on `basis`. A non-convergence
/// error carries the best iterate on the same basis.
pub fn newton_refine(x0: &CVector, coeffs: &MatrixSeries, tol: f64, max_iter: usize) -> Result<EigenPairSeries> {
    let basis = coeffs.basis();
    let n = coeffs.dim();
    match newton_solve(x0, coeffs.coeffs(), tol, max_iter) {
        Ok(res) => {
            let diagnostics = Diagnostics {
                newton_iterations: Some(res.iterations),
                residual_norm: *res.residuals.last().expect("at least one residual"),
                newton_residuals: res.residuals,
                ..Diagnostics::default()
            };
            into_series(basis, n, &res.x, diagnostics)
        }
        Err(Error::NewtonNoConvergence { iterations, residual, best }) => {
            let best = EigenPairSeries::new(
                ScalarSeries::new(basis, best.eigenvalue.into_coeffs())?,
                VectorSeries::new(basis, best.eigenvector.into_coeffs())?,
                best.diagnostics,
            )?;
            Err(Error::NewtonNoConvergence { iterations, residual, best: Box::new(best) })
        }
        Err(e) => Err(e),
    }
}

fn refine_pair(coeffs: &MatrixSeries, decomp: &EigenDecomposition, index: usize, req: &ChebRequest) -> Result<EigenPairSeries> {
    let x0 = warm_start_with(coeffs.coeffs(), decomp, index)?;
    let tag = |mut s: EigenPairSeries| {
        s.diagnostics.index = Some(index);
        s
    };
    match newton_refine(&x0, coeffs, req.newton_tol, req.newton_max_iter) {
        Ok(s) => Ok(tag(s)),
        Err(Error::NewtonNoConvergence { iterations, residual, best }) => {
            Err(Error::NewtonNoConvergence { iterations, residual, best: Box::new(tag(*best)) })
        }
        Err(e) => Err(e),
    }
}

/// Marks pairs whose eigenvalue paths coincide at every probe point.
pub fn flag_collisions(results: &mut [Result<EigenPairSeries>]) {
    let probes: Vec<Option<Vec<C64>>> = results
        .iter()
        .map(|r| {
            let s = r.as_ref().ok()?;
            let basis = s.basis();
            let (lo, hi) = match basis {
                Basis::ChebyshevU { lo, hi } => (lo, hi),
                Basis::Taylor { mu0 } => (mu0 - 0.5, mu0 + 0.5),
            };
            (1..=COLLISION_PROBES)
                .map(|j| s.eigenvalue.eval(lo + (hi - lo) * j as f64 / (COLLISION_PROBES + 1) as f64).ok())
                .collect()
        })
        .collect();
    for a in 0..results.len() {
        for b in a + 1..results.len() {
            let (Some(pa), Some(pb)) = (&probes[a], &probes[b]) else { continue };
            if pa.iter().zip(pb).all(|(x, y)| (x - y).norm() <= COLLISION_TOL) {
                if let Ok(s) = &mut results[a] {
                    s.diagnostics.collisions.push(b);
                }
                if let Ok(s) = &mut results[b] {
                    s.diagnostics.collisions.push(a);
                }
            }
        }
    }
}

/// Projects `A(mu)` once, then warm-starts and refines the selected pairs.
/// Per-pair failures are reported individually and collisions are flagged
/// in the diagnostics.
pub fn cheb_expand_all(problem: &dyn ParametricProblem, req: &ChebRequest) -> Result<Vec<Result<EigenPairSeries>>> {
    req.validate()?;
    let coeffs = project_matrix_coeffs(problem, req.lo, req.hi, req.order, req.quadrature_size())?;
    let decomp = eigen_all(&coeffs.coeffs()[0], problem.hermitian())?;
    let indices: Vec<usize> = match req.selector {
        Selector::All => (0..decomp.dim()).collect(),
        Selector::Index(k) if k < decomp.dim() => vec![k],
        Selector::Index(k) => {
            return Err(Error::InvalidArgument(format!("eigenpair index {k} out of range for n = {}", decomp.dim())))
        }
    };
    let mut results: Vec<_> = indices.into_iter().map(|k| refine_pair(&coeffs, &decomp, k, req)).collect();
    flag_collisions(&mut results);
    Ok(results)
}

/// Expands the single pair selected by `req.selector`.
pub fn cheb_expand_eigenpair(problem: &dyn ParametricProblem, req: &ChebRequest) -> Result<EigenPairSeries> {
    if req.selector == Selector::All {
        return Err(Error::InvalidArgument("cheb_expand_eigenpair needs an index selector".into()));
    }
    cheb_expand_all(problem, req)?.pop().expect("one result")
}
