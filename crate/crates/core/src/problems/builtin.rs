use std::f64::consts::PI;

use nalgebra::DMatrix;

use super::{Domain, ParametricProblem};
use crate::error::{Error, Result};
use crate::series::{CMatrix, C64};

/// Kernel `exp(-mu |p_i - p_j|)` on points coiled twice around a torus.
#[derive(Clone, Debug)]
pub struct TorusKernel {
    dist: DMatrix<f64>,
}

pub fn torus_kernel(n: usize) -> Result<TorusKernel> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("torus kernel needs n >= 2, got {n}")));
    }
    let points: Vec<[f64; 3]> = (1..=n)
        .map(|i| {
            let t = i as f64 / n as f64;
            let r = 5.0 + (4.0 * PI * t).cos();
            [(2.0 * PI * t).cos() * r, (2.0 * PI * t).sin() * r, (4.0 * PI * t).sin()]
        })
        .collect();
    let dist = DMatrix::from_fn(n, n, |i, j| {
        let (a, b) = (points[i], points[j]);
        ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
    });
    Ok(TorusKernel { dist })
}

impl TorusKernel {
    /// Pairwise distances between the sample points.
    pub fn distances(&self) -> &DMatrix<f64> {
        &self.dist
    }
}

impl ParametricProblem for TorusKernel {
    fn name(&self) -> &str {
        "example1"
    }
    fn dim(&self) -> usize {
        self.dist.nrows()
    }
    fn hermitian(&self) -> bool {
        true
    }
    fn eval(&self, mu: f64) -> Result<CMatrix> {
        Ok(self.dist.map(|u| C64::new((-mu * u).exp(), 0.0)))
    }
    fn derivatives(&self, mu0: f64, order: usize) -> Result<Vec<CMatrix>> {
        Domain::AllReals.check(self.name(), mu0)?;
        Ok((0..=order)
            .map(|k| self.dist.map(|u| C64::new((-u).powi(k as i32) * (-mu0 * u).exp(), 0.0)))
            .collect())
    }
}

/// Stiffness matrix of a spring chain, with the two middle masses equal to
/// `mu` and all others one.
#[derive(Clone, Debug)]
pub struct SpringChain {
    stiffness: CMatrix,
}

pub fn spring_chain(n: usize) -> Result<SpringChain> {
    if n < 4 || !n.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!("spring chain needs an even n >= 4, got {n}")));
    }
    let stiffness = CMatrix::from_fn(n, n, |i, j| match i.abs_diff(j) {
        0 => C64::new(2.0, 0.0),
        1 => C64::new(-1.0, 0.0),
        _ => C64::new(0.0, 0.0),
    });
    Ok(SpringChain { stiffness })
}

impl SpringChain {
    /// Zero-based indices of the rows carrying the parameter.
    pub fn heavy_rows(&self) -> [usize; 2] {
        let n = self.stiffness.nrows();
        [n / 2 - 1, n / 2]
    }

    pub fn stiffness(&self) -> &CMatrix {
        &self.stiffness
    }
}

impl ParametricProblem for SpringChain {
    fn name(&self) -> &str {
        "example2"
    }
    fn dim(&self) -> usize {
        self.stiffness.nrows()
    }
    fn hermitian(&self) -> bool {
        false
    }
    fn domain(&self) -> Domain {
        Domain::NonZero
    }
    fn eval(&self, mu: f64) -> Result<CMatrix> {
        self.domain().check(self.name(), mu)?;
        let mut a = self.stiffness.clone();
        for r in self.heavy_rows() {
            a.row_mut(r).scale_mut(1.0 / mu);
        }
        Ok(a)
    }
    fn derivatives(&self, mu0: f64, order: usize) -> Result<Vec<CMatrix>> {
        let mut out = vec![self.eval(mu0)?];
        let n = self.dim();
        // d^k/dmu^k mu^-1 = (-1)^k k! mu^-(k+1)
        let mut factor = 1.0 / mu0;
        for k in 1..=order {
            factor *= -(k as f64) / mu0;
            let mut a = CMatrix::zeros(n, n);
            for r in self.heavy_rows() {
                a.set_row(r, &(self.stiffness.row(r) * C64::new(factor, 0.0)));
            }
            out.push(a);
        }
        Ok(out)
    }
}

/// Jordan block of ones with `mu` in the lower left corner.
#[derive(Clone, Copy, Debug)]
pub struct Jordan {
    n: usize,
}

pub fn jordan(n: usize) -> Result<Jordan> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("jordan problem needs n >= 2, got {n}")));
    }
    Ok(Jordan { n })
}

impl Jordan {
    /// The `n` roots of `(lambda - 1)^n = mu`. For `mu > 0` the first root is
    /// `1 + mu^(1/n)` and the rest follow counterclockwise by `2 pi / n`; for
    /// `mu < 0` the angles are shifted by `pi / n`.
    pub fn analytic_eigenvalues(&self, mu: f64) -> Vec<C64> {
        let n = self.n as f64;
        let radius = mu.abs().powf(1.0 / n);
        let offset = if mu < 0.0 { PI / n } else { 0.0 };
        (0..self.n)
            .map(|k| {
                let angle = offset + 2.0 * PI * k as f64 / n;
                C64::new(1.0, 0.0) + C64::from_polar(radius, angle)
            })
            .collect()
    }
}

impl ParametricProblem for Jordan {
    fn name(&self) -> &str {
        "example3"
    }
    fn dim(&self) -> usize {
        self.n
    }
    fn hermitian(&self) -> bool {
        false
    }
    fn eval(&self, mu: f64) -> Result<CMatrix> {
        let n = self.n;
        let mut a = CMatrix::from_fn(n, n, |i, j| if j == i || j == i + 1 { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) });
        a[(n - 1, 0)] = C64::new(mu, 0.0);
        Ok(a)
    }
    fn derivatives(&self, mu0: f64, order: usize) -> Result<Vec<CMatrix>> {
        Domain::AllReals.check(self.name(), mu0)?;
        let n = self.n;
        let mut out = vec![self.eval(mu0)?];
        for k in 1..=order {
            let mut a = CMatrix::zeros(n, n);
            if k == 1 {
                a[(n - 1, 0)] = C64::new(1.0, 0.0);
            }
            out.push(a);
        }
        Ok(out)
    }
}
