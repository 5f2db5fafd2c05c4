//! Series bases and coefficient containers.
//!
//! Two bases are supported. A Taylor series about `mu0` stores derivative
//! values, so the represented function is `sum_k c_k (mu - mu0)^k / k!`. A
//! Chebyshev series on `[lo, hi]` stores coefficients of the unnormalized
//! second-kind polynomials `U_k` composed with the affine map onto `[-1, 1]`,
//! which keeps the product rule `U_i U_j = U_{i+j} + U_{i+j-2} + ... + U_{|i-j|}`
//! free of scale factors.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CVector = DVector<C64>;
pub type CMatrix = DMatrix<C64>;

/// Largest entry modulus of a complex matrix or vector.
pub trait MaxAbs {
    fn max_abs(&self) -> f64;
}

impl<R: nalgebra::Dim, C: nalgebra::Dim, S: nalgebra::RawStorage<C64, R, C>> MaxAbs for nalgebra::Matrix<C64, R, C, S> {
    fn max_abs(&self) -> f64 {
        self.iter().fold(0.0, |m, z| m.max(z.norm()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Basis {
    Taylor { mu0: f64 },
    ChebyshevU { lo: f64, hi: f64 },
}

impl Basis {
    pub fn taylor(mu0: f64) -> Result<Self> {
        if !mu0.is_finite() {
            return Err(Error::InvalidArgument(format!("expansion point {mu0} is not finite")));
        }
        Ok(Basis::Taylor { mu0 })
    }

    pub fn chebyshev(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) || hi - lo <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "Chebyshev interval [{lo}, {hi}] must be finite with lo < hi"
            )));
        }
        Ok(Basis::ChebyshevU { lo, hi })
    }

    pub fn is_taylor(&self) -> bool {
        matches!(self, Basis::Taylor { .. })
    }

    /// Affine map of `mu` onto the reference variable `s` (`[lo, hi]` onto `[-1, 1]`).
    /// For a Taylor basis this is the offset `mu - mu0`.
    pub fn reference(&self, mu: f64) -> f64 {
        match *self {
            Basis::Taylor { mu0 } => mu - mu0,
            Basis::ChebyshevU { lo, hi } => (2.0 * mu - hi - lo) / (hi - lo),
        }
    }

    /// Inverse of [`Basis::reference`].
    pub fn physical(&self, s: f64) -> f64 {
        match *self {
            Basis::Taylor { mu0 } => mu0 + s,
            Basis::ChebyshevU { lo, hi } => 0.5 * (hi + lo) + 0.5 * (hi - lo) * s,
        }
    }

    /// Whether `mu` lies inside the approximation interval. Taylor bases have
    /// no interval and always return true.
    pub fn contains(&self, mu: f64) -> bool {
        match *self {
            Basis::Taylor { .. } => true,
            Basis::ChebyshevU { lo, hi } => (lo..=hi).contains(&mu),
        }
    }

    /// A point where the series is "centered": `mu0` or the interval midpoint.
    pub fn center(&self) -> f64 {
        match *self {
            Basis::Taylor { mu0 } => mu0,
            Basis::ChebyshevU { lo, hi } => 0.5 * (lo + hi),
        }
    }
}

/// Values `U_0(s), ..., U_p(s)` of the unnormalized second-kind Chebyshev
/// polynomials.
pub fn chebyshev_u_values(s: f64, p: usize) -> Vec<f64> {
    let mut u = Vec::with_capacity(p + 1);
    u.push(1.0);
    if p >= 1 {
        u.push(2.0 * s);
    }
    for k in 2..=p {
        let next = 2.0 * s * u[k - 1] - u[k - 2];
        u.push(next);
    }
    u
}

/// Degrees appearing in the expansion of `U_i U_j`, highest first:
/// `i+j, i+j-2, ..., |i-j|`, each with coefficient one.
pub fn u_product_degrees(i: usize, j: usize) -> Vec<usize> {
    let lo = i.abs_diff(j);
    (lo..=i + j).rev().step_by(2).collect()
}

/// Something that can serve as a series coefficient.
pub trait Coefficient: Clone {
    fn zero_like(&self) -> Self;
    /// `self += alpha * other`.
    fn add_scaled(&mut self, alpha: f64, other: &Self);
    fn scale(&mut self, alpha: f64);
    /// Vector / matrix dimension; 1 for scalars.
    fn dim(&self) -> usize;
    fn is_finite(&self) -> bool;
    fn to_json(&self) -> Value;
    fn from_json(value: &Value, n: usize) -> Result<Self>;
}

fn complex_to_json(z: C64) -> Value {
    Value::from(vec![z.re, z.im])
}

fn complex_from_json(v: &Value) -> Result<C64> {
    let bad = || Error::InvalidArgument(format!("expected [re, im] pair, got {v}"));
    let arr = v.as_array().ok_or_else(bad)?;
    if arr.len() != 2 {
        return Err(bad());
    }
    let re = arr[0].as_f64().ok_or_else(bad)?;
    let im = arr[1].as_f64().ok_or_else(bad)?;
    Ok(C64::new(re, im))
}

fn json_array(v: &Value, len: usize) -> Result<&Vec<Value>> {
    match v.as_array() {
        Some(a) if a.len() == len => Ok(a),
        _ => Err(Error::InvalidArgument(format!("expected array of length {len}"))),
    }
}

impl Coefficient for C64 {
    fn zero_like(&self) -> Self {
        C64::new(0.0, 0.0)
    }
    fn add_scaled(&mut self, alpha: f64, other: &Self) {
        *self += other * alpha;
    }
    fn scale(&mut self, alpha: f64) {
        *self *= alpha;
    }
    fn dim(&self) -> usize {
        1
    }
    fn is_finite(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
    fn to_json(&self) -> Value {
        complex_to_json(*self)
    }
    fn from_json(value: &Value, _n: usize) -> Result<Self> {
        complex_from_json(value)
    }
}

impl Coefficient for CVector {
    fn zero_like(&self) -> Self {
        CVector::zeros(self.len())
    }
    fn add_scaled(&mut self, alpha: f64, other: &Self) {
        self.axpy(C64::new(alpha, 0.0), other, C64::new(1.0, 0.0));
    }
    fn scale(&mut self, alpha: f64) {
        *self *= C64::new(alpha, 0.0);
    }
    fn dim(&self) -> usize {
        self.len()
    }
    fn is_finite(&self) -> bool {
        self.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
    fn to_json(&self) -> Value {
        Value::from(self.iter().map(|z| complex_to_json(*z)).collect::<Vec<_>>())
    }
    fn from_json(value: &Value, n: usize) -> Result<Self> {
        let arr = json_array(value, n)?;
        let entries = arr.iter().map(complex_from_json).collect::<Result<Vec<_>>>()?;
        Ok(CVector::from_vec(entries))
    }
}

impl Coefficient for CMatrix {
    fn zero_like(&self) -> Self {
        CMatrix::zeros(self.nrows(), self.ncols())
    }
    fn add_scaled(&mut self, alpha: f64, other: &Self) {
        *self += other * C64::new(alpha, 0.0);
    }
    fn scale(&mut self, alpha: f64) {
        *self *= C64::new(alpha, 0.0);
    }
    fn dim(&self) -> usize {
        self.nrows()
    }
    fn is_finite(&self) -> bool {
        self.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
    fn to_json(&self) -> Value {
        let rows = (0..self.nrows())
            .map(|i| {
                Value::from(
                    (0..self.ncols())
                        .map(|j| complex_to_json(self[(i, j)]))
                        .collect::<Vec<_>>(),
                )
            })
            .collect::<Vec<_>>();
        Value::from(rows)
    }
    fn from_json(value: &Value, n: usize) -> Result<Self> {
        let rows = json_array(value, n)?;
        let mut m = CMatrix::zeros(n, n);
        for (i, row) in rows.iter().enumerate() {
            for (j, z) in json_array(row, n)?.iter().enumerate() {
                m[(i, j)] = complex_from_json(z)?;
            }
        }
        Ok(m)
    }
}

/// Value of a Chebyshev series together with whether `mu` was outside the
/// approximation interval.
#[derive(Clone, Debug, PartialEq)]
pub struct ChebEval<T> {
    pub value: T,
    pub out_of_domain: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Series<T> {
    basis: Basis,
    coeffs: Vec<T>,
}

pub type ScalarSeries = Series<C64>;
pub type VectorSeries = Series<CVector>;
pub type MatrixSeries = Series<CMatrix>;

impl<T: Coefficient> Series<T> {
    pub fn new(basis: Basis, coeffs: Vec<T>) -> Result<Self> {
        let Some(first) = coeffs.first() else {
            return Err(Error::InvalidArgument("series needs at least one coefficient".into()));
        };
        let n = first.dim();
        if coeffs.iter().any(|c| c.dim() != n) {
            return Err(Error::InvalidArgument("series coefficients differ in dimension".into()));
        }
        Ok(Series { basis, coeffs })
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<T> {
        self.coeffs
    }

    /// Truncation order `p` (number of coefficients minus one).
    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn dim(&self) -> usize {
        self.coeffs[0].dim()
    }

    /// Evaluates a Taylor series by nested multiplication on the
    /// factorial-rescaled coefficients.
    pub fn eval_taylor(&self, mu: f64) -> Result<T> {
        let Basis::Taylor { mu0 } = self.basis else {
            return Err(Error::InvalidArgument("eval_taylor on a non-Taylor series".into()));
        };
        check_finite(mu)?;
        let h = mu - mu0;
        let p = self.order();
        let mut acc = self.coeffs[p].clone();
        for k in (0..p).rev() {
            acc.scale(h / (k + 1) as f64);
            acc.add_scaled(1.0, &self.coeffs[k]);
        }
        Ok(acc)
    }

    /// Evaluates a Chebyshev-U series with the backward recurrence
    /// `b_k = c_k + 2 s b_{k+1} - b_{k+2}`.
    pub fn eval_chebu(&self, mu: f64) -> Result<ChebEval<T>> {
        if self.basis.is_taylor() {
            return Err(Error::InvalidArgument("eval_chebu on a Taylor series".into()));
        }
        check_finite(mu)?;
        let s = self.basis.reference(mu);
        let mut b1 = self.coeffs[0].zero_like();
        let mut b2 = b1.clone();
        for c in self.coeffs.iter().rev() {
            let mut b0 = c.clone();
            b0.add_scaled(2.0 * s, &b1);
            b0.add_scaled(-1.0, &b2);
            b2 = std::mem::replace(&mut b1, b0);
        }
        Ok(ChebEval { value: b1, out_of_domain: !self.basis.contains(mu) })
    }

    /// Evaluates in whichever basis the series carries.
    pub fn eval(&self, mu: f64) -> Result<T> {
        match self.basis {
            Basis::Taylor { .. } => self.eval_taylor(mu),
            Basis::ChebyshevU { .. } => self.eval_chebu(mu).map(|e| e.value),
        }
    }

    pub fn to_json(&self) -> Value {
        let doc = SeriesDoc {
            basis: BasisDoc::from(self.basis),
            n: self.dim(),
            p: self.order(),
            coeffs: self.coeffs.iter().map(Coefficient::to_json).collect(),
        };
        serde_json::to_value(doc).expect("series document serializes")
    }

    pub fn from_json(value: &Value) -> Result<Self> {
        let doc: SeriesDoc = serde_json::from_value(value.clone())?;
        if doc.coeffs.len() != doc.p + 1 {
            return Err(Error::InvalidArgument(format!(
                "series declares p = {} but has {} coefficients",
                doc.p,
                doc.coeffs.len()
            )));
        }
        let coeffs = doc
            .coeffs
            .iter()
            .map(|c| T::from_json(c, doc.n))
            .collect::<Result<Vec<_>>>()?;
        Series::new(doc.basis.try_into()?, coeffs)
    }
}

fn check_finite(mu: f64) -> Result<()> {
    if mu.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("evaluation point {mu} is not finite")))
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub(crate) enum BasisDoc {
    Taylor { mu0: f64 },
    ChebyshevU { interval: [f64; 2] },
}

impl From<Basis> for BasisDoc {
    fn from(b: Basis) -> Self {
        match b {
            Basis::Taylor { mu0 } => BasisDoc::Taylor { mu0 },
            Basis::ChebyshevU { lo, hi } => BasisDoc::ChebyshevU { interval: [lo, hi] },
        }
    }
}

impl TryFrom<BasisDoc> for Basis {
    type Error = Error;
    fn try_from(d: BasisDoc) -> Result<Self> {
        match d {
            BasisDoc::Taylor { mu0 } => Basis::taylor(mu0),
            BasisDoc::ChebyshevU { interval: [lo, hi] } => Basis::chebyshev(lo, hi),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct SeriesDoc {
    basis: BasisDoc,
    n: usize,
    p: usize,
    coeffs: Vec<Value>,
}
