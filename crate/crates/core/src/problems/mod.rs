//! Parametric matrices `A(mu)` with exact derivatives.

mod builtin;
mod config;
pub mod expr;
pub mod jet;

pub use builtin::{jordan, spring_chain, torus_kernel, Jordan, SpringChain, TorusKernel};
pub use config::{problem_from_config, ConfigProblem};

use crate::error::{Error, Result};
use crate::series::{CMatrix, MaxAbs, C64};

/// Where `mu` may be evaluated.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Domain {
    AllReals,
    /// Everything except zero.
    NonZero,
    Interval { lo: f64, hi: f64 },
}

impl Domain {
    pub fn contains(&self, mu: f64) -> bool {
        match *self {
            Domain::AllReals => mu.is_finite(),
            Domain::NonZero => mu.is_finite() && mu != 0.0,
            Domain::Interval { lo, hi } => (lo..=hi).contains(&mu),
        }
    }

    pub(crate) fn check(&self, name: &str, mu: f64) -> Result<()> {
        if self.contains(mu) {
            Ok(())
        } else {
            Err(Error::Domain(format!("mu = {mu} outside the domain {self:?} of problem '{name}'")))
        }
    }
}

pub trait ParametricProblem: Send + Sync {
    fn name(&self) -> &str;
    fn dim(&self) -> usize;
    fn hermitian(&self) -> bool;
    fn domain(&self) -> Domain {
        Domain::AllReals
    }
    fn eval(&self, mu: f64) -> Result<CMatrix>;
    /// Derivative values `A(mu0), A'(mu0), ..., A^(order)(mu0)`.
    fn derivatives(&self, mu0: f64, order: usize) -> Result<Vec<CMatrix>>;
}

impl<P: ParametricProblem + ?Sized> ParametricProblem for Box<P> {
    fn name(&self) -> &str {
        (**self).name()
    }
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn hermitian(&self) -> bool {
        (**self).hermitian()
    }
    fn domain(&self) -> Domain {
        (**self).domain()
    }
    fn eval(&self, mu: f64) -> Result<CMatrix> {
        (**self).eval(mu)
    }
    fn derivatives(&self, mu0: f64, order: usize) -> Result<Vec<CMatrix>> {
        (**self).derivatives(mu0, order)
    }
}

/// `A(mu) = sum_j M_j (mu - center)^j`.
#[derive(Clone, Debug)]
pub struct MatrixPolynomial {
    center: f64,
    coeffs: Vec<CMatrix>,
    hermitian: bool,
}

impl MatrixPolynomial {
    pub fn new(center: f64, coeffs: Vec<CMatrix>, hermitian: bool) -> Result<Self> {
        let n = coeffs.first().map(|m| m.nrows()).unwrap_or(0);
        if n == 0 || coeffs.iter().any(|m| m.nrows() != n || m.ncols() != n) {
            return Err(Error::InvalidArgument("matrix polynomial needs square coefficients of one size".into()));
        }
        Ok(MatrixPolynomial { center, coeffs, hermitian })
    }

    pub fn constant(a: CMatrix, hermitian: bool) -> Self {
        MatrixPolynomial::new(0.0, vec![a], hermitian).expect("square matrix")
    }

    /// `A(mu) = a0 + (mu - center) a1`.
    pub fn linear(a0: CMatrix, a1: CMatrix, center: f64, hermitian: bool) -> Result<Self> {
        MatrixPolynomial::new(center, vec![a0, a1], hermitian)
    }
}

impl ParametricProblem for MatrixPolynomial {
    fn name(&self) -> &str {
        "matrix-polynomial"
    }
    fn dim(&self) -> usize {
        self.coeffs[0].nrows()
    }
    fn hermitian(&self) -> bool {
        self.hermitian
    }
    fn eval(&self, mu: f64) -> Result<CMatrix> {
        let h = C64::new(mu - self.center, 0.0);
        let mut acc = self.coeffs.last().expect("nonempty").clone();
        for m in self.coeffs.iter().rev().skip(1) {
            acc = acc * h + m;
        }
        Ok(acc)
    }
    fn derivatives(&self, mu0: f64, order: usize) -> Result<Vec<CMatrix>> {
        let n = self.dim();
        let h = mu0 - self.center;
        Ok((0..=order)
            .map(|k| {
                let mut d = CMatrix::zeros(n, n);
                for (j, m) in self.coeffs.iter().enumerate().skip(k) {
                    // j! / (j - k)! h^(j - k)
                    let falling: f64 = ((j - k + 1)..=j).map(|x| x as f64).product();
                    d += m * C64::new(falling * h.powi((j - k) as i32), 0.0);
                }
                d
            })
            .collect())
    }
}

/// Largest relative discrepancy between `derivatives(mu, 3)` and five- or
/// seven-point central differences of `eval` for orders 1 through 3. Also
/// checks that the zeroth derivative reproduces `eval(mu)`.
pub fn derivative_self_test(problem: &dyn ParametricProblem, mu: f64, h: f64) -> Result<f64> {
    let derivs = problem.derivatives(mu, 3)?;
    let at = |k: i32| problem.eval(mu + k as f64 * h);
    let f: Vec<CMatrix> = (-3..=3).map(at).collect::<Result<_>>()?;
    let f = |k: i32| &f[(k + 3) as usize];
    let c = |x: f64| C64::new(x, 0.0);
    let d1 = (f(-2) - f(2) + (f(1) - f(-1)) * c(8.0)) * c(1.0 / (12.0 * h));
    let d2 = ((f(1) + f(-1)) * c(16.0) - f(2) - f(-2) - f(0) * c(30.0)) * c(1.0 / (12.0 * h * h));
    let d3 = (f(-3) - f(3) + (f(2) - f(-2)) * c(8.0) + (f(-1) - f(1)) * c(13.0)) * c(1.0 / (8.0 * h * h * h));
    let mut worst = (&derivs[0] - f(0)).max_abs() / f(0).max_abs().max(1.0);
    for (k, fd) in [(1, d1), (2, d2), (3, d3)] {
        let exact = &derivs[k];
        worst = worst.max((fd - exact).max_abs() / exact.max_abs().max(1.0));
    }
    Ok(worst)
}
