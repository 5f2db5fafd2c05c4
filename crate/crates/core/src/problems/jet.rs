//! Truncated Taylor series arithmetic.
//!
//! Internally a [`Jet`] stores normalized coefficients `f^(k)(mu0) / k!`,
//! where the convolution recurrences are plain sums. The public boundary
//! ([`taylor_arith_eval`], [`Jet::derivatives`]) speaks derivative values.

use super::expr::{Expr, Func};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct Jet {
    c: Vec<f64>,
}

impl Jet {
    pub fn constant(x: f64, order: usize) -> Jet {
        let mut c = vec![0.0; order + 1];
        c[0] = x;
        Jet { c }
    }

    /// The identity function expanded at `mu0`.
    pub fn variable(mu0: f64, order: usize) -> Jet {
        let mut j = Jet::constant(mu0, order);
        if order > 0 {
            j.c[1] = 1.0;
        }
        j
    }

    pub fn from_derivatives(d: &[f64]) -> Jet {
        let mut fact = 1.0;
        let c = d
            .iter()
            .enumerate()
            .map(|(k, x)| {
                if k > 0 {
                    fact *= k as f64;
                }
                x / fact
            })
            .collect();
        Jet { c }
    }

    pub fn derivatives(&self) -> Vec<f64> {
        let mut fact = 1.0;
        self.c
            .iter()
            .enumerate()
            .map(|(k, x)| {
                if k > 0 {
                    fact *= k as f64;
                }
                x * fact
            })
            .collect()
    }

    pub fn order(&self) -> usize {
        self.c.len() - 1
    }

    pub fn neg(&self) -> Jet {
        Jet { c: self.c.iter().map(|x| -x).collect() }
    }

    pub fn add(&self, o: &Jet) -> Jet {
        Jet { c: self.c.iter().zip(&o.c).map(|(a, b)| a + b).collect() }
    }

    pub fn sub(&self, o: &Jet) -> Jet {
        Jet { c: self.c.iter().zip(&o.c).map(|(a, b)| a - b).collect() }
    }

    pub fn mul(&self, o: &Jet) -> Jet {
        let c = (0..self.c.len()).map(|k| (0..=k).map(|j| self.c[j] * o.c[k - j]).sum()).collect();
        Jet { c }
    }

    pub fn div(&self, o: &Jet) -> Result<Jet> {
        let b0 = o.c[0];
        if b0 == 0.0 {
            return Err(Error::Domain("division by a series with zero constant term".into()));
        }
        let mut q = Vec::with_capacity(self.c.len());
        for k in 0..self.c.len() {
            let s: f64 = (1..=k).map(|j| o.c[j] * q[k - j]).sum();
            q.push((self.c[k] - s) / b0);
        }
        Ok(Jet { c: q })
    }

    pub fn powi(&self, mut k: u32) -> Jet {
        let mut base = self.clone();
        let mut acc = Jet::constant(1.0, self.order());
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base);
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    pub fn exp(&self) -> Jet {
        let mut e = vec![self.c[0].exp()];
        for k in 1..self.c.len() {
            let s: f64 = (1..=k).map(|j| j as f64 * self.c[j] * e[k - j]).sum();
            e.push(s / k as f64);
        }
        Jet { c: e }
    }

    /// `(sin, cos)` of the series, built together since each feeds the other.
    pub fn sin_cos(&self) -> (Jet, Jet) {
        let (s0, c0) = self.c[0].sin_cos();
        let (mut s, mut c) = (vec![s0], vec![c0]);
        for k in 1..self.c.len() {
            let ds: f64 = (1..=k).map(|j| j as f64 * self.c[j] * c[k - j]).sum();
            let dc: f64 = (1..=k).map(|j| j as f64 * self.c[j] * s[k - j]).sum();
            s.push(ds / k as f64);
            c.push(-dc / k as f64);
        }
        (Jet { c: s }, Jet { c })
    }

    pub fn sqrt(&self) -> Result<Jet> {
        let a0 = self.c[0];
        if a0 < 0.0 || (a0 == 0.0 && self.order() > 0) {
            return Err(Error::Domain(format!("sqrt of a series with constant term {a0}")));
        }
        let r0 = a0.sqrt();
        let mut r = vec![r0];
        for k in 1..self.c.len() {
            let s: f64 = (1..k).map(|j| r[j] * r[k - j]).sum();
            r.push((self.c[k] - s) / (2.0 * r0));
        }
        Ok(Jet { c: r })
    }

    pub fn ln(&self) -> Result<Jet> {
        let a0 = self.c[0];
        if a0 <= 0.0 {
            return Err(Error::Domain(format!("log of a series with constant term {a0}")));
        }
        let mut l = vec![a0.ln()];
        for k in 1..self.c.len() {
            let s: f64 = (1..k).map(|j| j as f64 * l[j] * self.c[k - j]).sum();
            l.push((self.c[k] - s / k as f64) / a0);
        }
        Ok(Jet { c: l })
    }
}

fn jet_of(node: &Expr, mu0: f64, order: usize) -> Result<Jet> {
    let go = |e: &Expr| jet_of(e, mu0, order);
    Ok(match node {
        Expr::Num(x) => Jet::constant(*x, order),
        Expr::Mu => Jet::variable(mu0, order),
        Expr::Neg(a) => go(a)?.neg(),
        Expr::Add(a, b) => go(a)?.add(&go(b)?),
        Expr::Sub(a, b) => go(a)?.sub(&go(b)?),
        Expr::Mul(a, b) => go(a)?.mul(&go(b)?),
        Expr::Div(a, b) => go(a)?.div(&go(b)?)?,
        Expr::Pow(a, k) => go(a)?.powi(*k),
        Expr::Call(f, a) => {
            let x = go(a)?;
            match f {
                Func::Exp => x.exp(),
                Func::Sin => x.sin_cos().0,
                Func::Cos => x.sin_cos().1,
                Func::Sqrt => x.sqrt()?,
                Func::Log => x.ln()?,
            }
        }
    })
}

/// Derivative values `d^k/dmu^k node` at `mu0` for `k = 0..=order`.
pub fn taylor_arith_eval(node: &Expr, mu0: f64, order: usize) -> Result<Vec<f64>> {
    let d = jet_of(node, mu0, order)?.derivatives();
    if d.iter().any(|x| !x.is_finite()) {
        return Err(Error::Domain(format!("non-finite derivative of '{node}' at mu = {mu0}")));
    }
    Ok(d)
}
