//! Dense eigendecomposition and bordered linear systems.
//!
//! Every Taylor order (and every Chebyshev warm-start block) solves a system
//! with the same bordered matrix
//!
//! ```text
//!     E = [ 0   | b^T          ]
//!         [ v0  | lambda0 I - A0 ]
//! ```
//!
//! where the border row `b^T` is `v0^T` for general problems and `v0^H` for
//! Hermitian ones. [`BorderedSystem`] factorizes `E` once with partial-pivot
//! LU. [`ReducedBordered`] instead reuses a Schur form `A0 = Q T Q^H` shared by
//! all eigenpairs and solves in `O(n^2)` by block elimination on the
//! triangular core.

use nalgebra::{Schur, SymmetricEigen, LU};

use crate::error::{Error, Result};
use crate::series::{CMatrix, MaxAbs, CVector, C64};

/// Reciprocal-condition / pivot threshold below which a bordered system is
/// treated as singular.
pub const SINGULAR_THRESHOLD: f64 = 1e-12;

const MAX_EIGEN_ITERATIONS: usize = 100_000;

/// How the border row pairs vectors: `x^T y` or `x^H y`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Conjugation {
    Transpose,
    Adjoint,
}

impl Conjugation {
    pub fn for_hermitian(hermitian: bool) -> Self {
        if hermitian {
            Conjugation::Adjoint
        } else {
            Conjugation::Transpose
        }
    }

    /// `x^T y` or `x^H y`.
    pub fn dot(self, x: &CVector, y: &CVector) -> C64 {
        match self {
            Conjugation::Transpose => x.iter().zip(y.iter()).map(|(a, b)| a * b).sum(),
            Conjugation::Adjoint => x.dotc(y),
        }
    }

    fn apply(self, z: C64) -> C64 {
        match self {
            Conjugation::Transpose => z,
            Conjugation::Adjoint => z.conj(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct EigenDecomposition {
    /// Sorted by descending real part, ties by descending imaginary part.
    pub values: Vec<C64>,
    /// Unit 2-norm, largest-magnitude component real and positive.
    pub vectors: Vec<CVector>,
    pub schur_q: CMatrix,
    /// Upper triangular; diagonal when the input was flagged Hermitian.
    pub schur_t: CMatrix,
    /// `schur_index[k]` is the diagonal position of `values[k]` in `schur_t`.
    pub schur_index: Vec<usize>,
    pub hermitian: bool,
}

impl EigenDecomposition {
    pub fn dim(&self) -> usize {
        self.values.len()
    }
}

/// Rotates `v` so that its largest-magnitude entry is real and positive.
/// Near-ties (within a relative 1e-10) resolve to the lowest index.
pub fn phase_fix(v: &mut CVector) {
    let max = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if max == 0.0 {
        return;
    }
    let pivot = v
        .iter()
        .position(|z| z.norm() >= max * (1.0 - 1e-10))
        .expect("maximum exists");
    let phase = v[pivot].conj() / v[pivot].norm();
    *v *= phase;
    v[pivot] = C64::new(v[pivot].re, 0.0);
}

/// Order eigenvalue indices by descending real part, breaking near-ties on
/// the real part by descending imaginary part.
fn sorted_order(values: &[C64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[b].re.total_cmp(&values[a].re));
    let scale = values.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let tol = 1e-10 * scale;
    // Reorder runs of (numerically) equal real parts by imaginary part.
    let mut start = 0;
    while start < idx.len() {
        let mut end = start + 1;
        while end < idx.len() && (values[idx[end - 1]].re - values[idx[end]].re).abs() <= tol {
            end += 1;
        }
        idx[start..end].sort_by(|&a, &b| values[b].im.total_cmp(&values[a].im));
        start = end;
    }
    idx
}

/// Eigenvector of an upper-triangular `t` for its `i`-th diagonal entry, by
/// back substitution. Entries beyond `i` are exactly zero.
fn triangular_eigenvector(t: &CMatrix, i: usize) -> CVector {
    let n = t.nrows();
    let tnorm = t.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let smin = (f64::EPSILON * tnorm).max(f64::MIN_POSITIVE);
    let lambda = t[(i, i)];
    let mut y = CVector::zeros(n);
    y[i] = C64::new(1.0, 0.0);
    for j in (0..i).rev() {
        let mut s = C64::new(0.0, 0.0);
        for k in j + 1..=i {
            s += t[(j, k)] * y[k];
        }
        let mut d = t[(j, j)] - lambda;
        if d.norm() < smin {
            d = C64::new(smin, 0.0);
        }
        y[j] = -s / d;
    }
    y
}

/// Full eigendecomposition of a dense complex matrix. Hermitian input goes
/// through the symmetric solver (diagonal `T`); everything else through the
/// complex Schur form.
pub fn eigen_all(a: &CMatrix, hermitian: bool) -> Result<EigenDecomposition> {
    let n = a.nrows();
    if n == 0 || a.ncols() != n {
        return Err(Error::InvalidArgument(format!("expected a nonempty square matrix, got {}x{}", n, a.ncols())));
    }
    if a.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(Error::InvalidArgument("matrix has non-finite entries".into()));
    }

    if hermitian {
        let eig = SymmetricEigen::try_new(a.clone(), f64::EPSILON, MAX_EIGEN_ITERATIONS)
            .ok_or(Error::EigenNoConvergence { n, iterations: MAX_EIGEN_ITERATIONS })?;
        let values: Vec<C64> = eig.eigenvalues.iter().map(|&x| C64::new(x, 0.0)).collect();
        let order = sorted_order(&values);
        let mut q = CMatrix::zeros(n, n);
        let mut vectors = Vec::with_capacity(n);
        for (col, &k) in order.iter().enumerate() {
            let mut v: CVector = eig.eigenvectors.column(k).into_owned();
            phase_fix(&mut v);
            q.set_column(col, &v);
            vectors.push(v);
        }
        let sorted: Vec<C64> = order.iter().map(|&k| values[k]).collect();
        let t = CMatrix::from_diagonal(&CVector::from_vec(sorted.clone()));
        return Ok(EigenDecomposition {
            values: sorted,
            vectors,
            schur_q: q,
            schur_t: t,
            schur_index: (0..n).collect(),
            hermitian: true,
        });
    }

    let schur = Schur::try_new(a.clone(), f64::EPSILON, MAX_EIGEN_ITERATIONS)
        .ok_or(Error::EigenNoConvergence { n, iterations: MAX_EIGEN_ITERATIONS })?;
    let (q, t) = schur.unpack();
    let diag: Vec<C64> = (0..n).map(|i| t[(i, i)]).collect();
    let order = sorted_order(&diag);
    let vectors = order
        .iter()
        .map(|&i| {
            let mut v = &q * triangular_eigenvector(&t, i);
            let norm = v.norm();
            v /= C64::new(norm, 0.0);
            phase_fix(&mut v);
            v
        })
        .collect();
    Ok(EigenDecomposition {
        values: order.iter().map(|&i| diag[i]).collect(),
        vectors,
        schur_q: q,
        schur_t: t,
        schur_index: order,
        hermitian: false,
    })
}

/// Eigenvalues only, in the order of [`eigen_all`]. Skips accumulating the
/// Schur and eigenvector bases.
pub fn eigenvalues(a: &CMatrix, hermitian: bool) -> Result<Vec<C64>> {
    let n = a.nrows();
    if n == 0 || a.ncols() != n {
        return Err(Error::InvalidArgument(format!("expected a nonempty square matrix, got {}x{}", n, a.ncols())));
    }
    if a.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(Error::InvalidArgument("matrix has non-finite entries".into()));
    }
    let values: Vec<C64> = if hermitian {
        a.symmetric_eigenvalues().iter().map(|&x| C64::new(x, 0.0)).collect()
    } else {
        a.eigenvalues().ok_or(Error::EigenNoConvergence { n, iterations: 0 })?.iter().copied().collect()
    };
    Ok(sorted_order(&values).into_iter().map(|k| values[k]).collect())
}

/// Common interface of the two bordered solvers. Right-hand sides and
/// solutions are stacked as `[scalar; n-vector]`.
pub trait BorderedSolve {
    fn dim(&self) -> usize;
    fn solve(&self, z: C64, y: &CVector) -> Result<(C64, CVector)>;
    /// `||E [lambda; v] - [z; y]||_inf` for the matrix this solver represents.
    fn residual(&self, lambda: C64, v: &CVector, z: C64, y: &CVector) -> f64;
}

/// Element precision used when assembling `E`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Precision {
    #[default]
    Double,
    /// Entries rounded to `f32` before factorization.
    Single,
}

#[derive(Clone, Debug)]
pub struct BorderedSystem {
    matrix: CMatrix,
    lu: LU<C64, nalgebra::Dyn, nalgebra::Dyn>,
    condition_estimate: f64,
}

fn round_single(z: C64) -> C64 {
    C64::new(z.re as f32 as f64, z.im as f32 as f64)
}

fn norm_one(m: &CMatrix) -> f64 {
    m.column_iter().map(|c| c.iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max)
}

impl BorderedSystem {
    pub fn build(a0: &CMatrix, v0: &CVector, lambda0: C64, conj: Conjugation, precision: Precision) -> Result<Self> {
        let n = a0.nrows();
        if a0.ncols() != n || v0.len() != n {
            return Err(Error::InvalidArgument(format!(
                "bordered system dimensions disagree: A0 is {}x{}, v0 has {}",
                n,
                a0.ncols(),
                v0.len()
            )));
        }
        let mut e = CMatrix::zeros(n + 1, n + 1);
        for j in 0..n {
            e[(0, j + 1)] = conj.apply(v0[j]);
            e[(j + 1, 0)] = v0[j];
            for i in 0..n {
                e[(i + 1, j + 1)] = -a0[(i, j)];
            }
            e[(j + 1, j + 1)] += lambda0;
        }
        if precision == Precision::Single {
            e.apply(|z| *z = round_single(*z));
        }
        let lu = LU::new(e.clone());
        let condition_estimate = match lu.try_inverse() {
            Some(inv) => {
                let rc = 1.0 / (norm_one(&e) * norm_one(&inv));
                if rc.is_finite() { rc } else { 0.0 }
            }
            None => 0.0,
        };
        if condition_estimate < SINGULAR_THRESHOLD {
            return Err(Error::NonSimpleEigenvalue {
                detail: format!("bordered matrix reciprocal condition {condition_estimate:e} < {SINGULAR_THRESHOLD:e}"),
            });
        }
        Ok(BorderedSystem { matrix: e, lu, condition_estimate })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// Reciprocal 1-norm condition number of the assembled matrix.
    pub fn condition_estimate(&self) -> f64 {
        self.condition_estimate
    }
}

/// Assembles and factorizes the bordered matrix in double precision.
pub fn build_bordered(a0: &CMatrix, v0: &CVector, lambda0: C64, conj: Conjugation) -> Result<BorderedSystem> {
    BorderedSystem::build(a0, v0, lambda0, conj, Precision::Double)
}

fn stack(z: C64, y: &CVector) -> CVector {
    let mut rhs = CVector::zeros(y.len() + 1);
    rhs[0] = z;
    rhs.rows_mut(1, y.len()).copy_from(y);
    rhs
}

impl BorderedSolve for BorderedSystem {
    fn dim(&self) -> usize {
        self.matrix.nrows() - 1
    }

    fn solve(&self, z: C64, y: &CVector) -> Result<(C64, CVector)> {
        let x = self.lu.solve(&stack(z, y)).ok_or_else(|| Error::NonSimpleEigenvalue {
            detail: "LU solve hit a zero pivot".into(),
        })?;
        Ok((x[0], x.rows(1, y.len()).into_owned()))
    }

    fn residual(&self, lambda: C64, v: &CVector, z: C64, y: &CVector) -> f64 {
        (&self.matrix * stack(lambda, v) - stack(z, y)).max_abs()
    }
}

/// Solves the bordered system for a stacked right-hand side.
pub fn solve_bordered(sys: &BorderedSystem, rhs: &CVector) -> Result<(C64, CVector)> {
    let n = sys.dim();
    if rhs.len() != n + 1 {
        return Err(Error::InvalidArgument(format!("rhs has length {}, expected {}", rhs.len(), n + 1)));
    }
    sys.solve(rhs[0], &rhs.rows(1, n).into_owned())
}

/// Bordered solve through a precomputed Schur form `A0 = Q T Q^H`.
///
/// In Schur coordinates the core `lambda0 I - T` is upper triangular with a
/// zero at the diagonal position `i` of `lambda0`, and `Q^H v0` vanishes below
/// position `i`. The trailing block is then a plain back substitution, row `i`
/// yields the scalar unknown, and the leading block is determined up to a
/// multiple of the triangular eigenvector, which the border row fixes.
#[derive(Clone, Debug)]
pub struct ReducedBordered<'a> {
    a0: &'a CMatrix,
    q: &'a CMatrix,
    t: &'a CMatrix,
    index: usize,
    lambda0: C64,
    v0: CVector,
    conj: Conjugation,
    /// `Q^H v0`, zeroed beyond `index`.
    u: CVector,
    /// Border row in Schur coordinates.
    w: CVector,
    /// Leading part of the triangular eigenvector, normalized to 1 at `index`.
    h: CVector,
    denom: C64,
    pivot_floor: f64,
}

impl<'a> ReducedBordered<'a> {
    pub fn new(a0: &'a CMatrix, q: &'a CMatrix, t: &'a CMatrix, v0: &CVector, lambda0: C64, conj: Conjugation) -> Result<Self> {
        let n = t.nrows();
        if q.nrows() != n || a0.nrows() != n || v0.len() != n {
            return Err(Error::InvalidArgument("Schur factors and v0 disagree in dimension".into()));
        }
        let scale = t.iter().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        let index = (0..n)
            .min_by(|&a, &b| (t[(a, a)] - lambda0).norm().total_cmp(&(t[(b, b)] - lambda0).norm()))
            .expect("n >= 1");
        if (t[(index, index)] - lambda0).norm() > 1e-8 * scale.max(1.0) {
            return Err(Error::InvalidArgument(format!("lambda0 = {lambda0} is not a diagonal entry of T")));
        }
        let lambda0 = t[(index, index)];
        let pivot_floor = SINGULAR_THRESHOLD * scale.max(1.0);

        let mut u = q.ad_mul(v0);
        for k in index + 1..n {
            u[k] = C64::new(0.0, 0.0);
        }
        let vb = match conj {
            Conjugation::Transpose => v0.clone(),
            Conjugation::Adjoint => v0.map(|z| z.conj()),
        };
        let w = q.tr_mul(&vb);

        for j in index + 1..n {
            let pivot = lambda0 - t[(j, j)];
            if pivot.norm() < pivot_floor {
                return Err(Error::NonSimpleEigenvalue {
                    detail: format!("eliminated pivot |{pivot}| at Schur position {j} below threshold"),
                });
            }
        }
        if u[index].norm() < SINGULAR_THRESHOLD {
            return Err(Error::NonSimpleEigenvalue {
                detail: format!("border pivot |{}| below threshold", u[index]),
            });
        }

        // Homogeneous solution of the leading block: (lambda0 - T) h = 0, h_i = 1.
        let mut h = CVector::zeros(index);
        for j in (0..index).rev() {
            let mut s = t[(j, index)];
            for k in j + 1..index {
                s += t[(j, k)] * h[k];
            }
            let pivot = lambda0 - t[(j, j)];
            if pivot.norm() < pivot_floor {
                return Err(Error::NonSimpleEigenvalue {
                    detail: format!("eliminated pivot |{pivot}| at Schur position {j} below threshold"),
                });
            }
            h[j] = s / pivot;
        }
        let denom = w[index] + (0..index).map(|k| w[k] * h[k]).sum::<C64>();
        if denom.norm() < SINGULAR_THRESHOLD * (1.0 + h.norm()) {
            return Err(Error::NonSimpleEigenvalue {
                detail: format!("normalization pivot |{denom}| below threshold"),
            });
        }

        Ok(ReducedBordered { a0, q, t, index, lambda0, v0: v0.clone(), conj, u, w, h, denom, pivot_floor })
    }

    /// Position of `lambda0` on the diagonal of `T`.
    pub fn schur_position(&self) -> usize {
        self.index
    }

    pub fn lambda0(&self) -> C64 {
        self.lambda0
    }
}

impl BorderedSolve for ReducedBordered<'_> {
    fn dim(&self) -> usize {
        self.t.nrows()
    }

    fn solve(&self, z: C64, y: &CVector) -> Result<(C64, CVector)> {
        let n = self.dim();
        let i = self.index;
        let t = self.t;
        let b = self.q.ad_mul(y);
        let mut x = CVector::zeros(n);

        for j in (i + 1..n).rev() {
            let mut s = b[j];
            for k in j + 1..n {
                s += t[(j, k)] * x[k];
            }
            // (lambda0 - T)_jj x_j - sum_{k>j} T_jk x_k = b_j
            x[j] = s / (self.lambda0 - t[(j, j)]);
        }

        let mut s = b[i];
        for k in i + 1..n {
            s += t[(i, k)] * x[k];
        }
        let lambda = s / self.u[i];

        // Particular solution of the leading block with x_i = 0.
        for j in (0..i).rev() {
            let mut s = b[j] - self.u[j] * lambda;
            for k in j + 1..n {
                if k != i {
                    s += t[(j, k)] * x[k];
                }
            }
            let pivot = self.lambda0 - t[(j, j)];
            debug_assert!(pivot.norm() >= self.pivot_floor);
            x[j] = s / pivot;
        }

        let mut border = z;
        for k in 0..n {
            if k != i {
                border -= self.w[k] * x[k];
            }
        }
        let xi = border / self.denom;
        x[i] = xi;
        for j in 0..i {
            x[j] += xi * self.h[j];
        }
        Ok((lambda, self.q * x))
    }

    fn residual(&self, lambda: C64, v: &CVector, z: C64, y: &CVector) -> f64 {
        let head = (self.conj.dot(&self.v0, v) - z).norm();
        let body = &self.v0 * lambda + v * self.lambda0 - self.a0 * v - y;
        head.max(body.max_abs())
    }
}

/// One-shot reduced solve. Prefer [`ReducedBordered`] when solving several
/// right-hand sides against the same eigenpair.
pub fn solve_bordered_reduced(
    a0: &CMatrix,
    q: &CMatrix,
    t: &CMatrix,
    v0: &CVector,
    lambda0: C64,
    conj: Conjugation,
    rhs: &CVector,
) -> Result<(C64, CVector)> {
    let n = t.nrows();
    if rhs.len() != n + 1 {
        return Err(Error::InvalidArgument(format!("rhs has length {}, expected {}", rhs.len(), n + 1)));
    }
    ReducedBordered::new(a0, q, t, v0, lambda0, conj)?.solve(rhs[0], &rhs.rows(1, n).into_owned())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn re(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn real_matrix(rows: &[&[f64]]) -> CMatrix {
        CMatrix::from_fn(rows.len(), rows[0].len(), |i, j| re(rows[i][j]))
    }

    fn random_hermitian(n: usize, rng: &mut ChaCha8Rng) -> CMatrix {
        let g = CMatrix::from_fn(n, n, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        (&g + g.adjoint()) * re(0.5)
    }

    fn random_general(n: usize, rng: &mut ChaCha8Rng) -> CMatrix {
        CMatrix::from_fn(n, n, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
    }

    fn random_vector(n: usize, rng: &mut ChaCha8Rng) -> CVector {
        CVector::from_fn(n, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
    }

    fn check_decomposition(a: &CMatrix, d: &EigenDecomposition) {
        let n = a.nrows();
        let tol = 1e-12 * n as f64;
        for (lambda, v) in d.values.iter().zip(&d.vectors) {
            assert!((a * v - v * *lambda).norm() <= tol * a.norm().max(1.0));
            assert!((v.norm() - 1.0).abs() < 1e-13);
            let max = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
            let pivot = v.iter().find(|z| z.norm() >= max * (1.0 - 1e-10)).unwrap();
            assert!(pivot.im == 0.0 && pivot.re > 0.0);
        }
        let q = &d.schur_q;
        assert!((q.ad_mul(q) - CMatrix::identity(n, n)).norm() <= tol);
        assert!((q * &d.schur_t * q.adjoint() - a).norm() <= tol * a.norm().max(1.0));
        for i in 0..n {
            for j in 0..i {
                assert_eq!(d.schur_t[(i, j)], re(0.0));
            }
            assert_eq!(d.schur_t[(d.schur_index[i], d.schur_index[i])], d.values[i]);
        }
        for w in d.values.windows(2) {
            assert!(w[0].re >= w[1].re - 1e-10 * w[0].norm().max(1.0));
        }
    }

    #[test]
    fn ones_matrix_spectrum() {
        let a = CMatrix::from_element(8, 8, re(1.0));
        let d = eigen_all(&a, true).unwrap();
        assert!((d.values[0] - re(8.0)).norm() < 1e-12);
        for z in &d.values[1..] {
            assert!(z.norm() < 1e-12);
        }
        check_decomposition(&a, &d);
    }

    #[test]
    fn identity_gives_standard_basis() {
        for hermitian in [true, false] {
            let a = CMatrix::identity(5, 5);
            let d = eigen_all(&a, hermitian).unwrap();
            for (z, v) in d.values.iter().zip(&d.vectors) {
                assert!((z - re(1.0)).norm() < 1e-14);
                assert_eq!(v.iter().filter(|z| z.norm() > 1e-14).count(), 1);
            }
        }
    }

    #[test]
    fn two_by_two_nonsymmetric() {
        // (lambda - 1)^2 = 0.25; brute-force root scan of the characteristic polynomial.
        let a = real_matrix(&[&[1.0, 1.0], &[0.25, 1.0]]);
        let d = eigen_all(&a, false).unwrap();
        let charpoly = |l: f64| (l - 1.0).powi(2) - 0.25;
        let mut roots = vec![];
        let steps = 400_000;
        for k in 0..steps {
            // The grid is offset so that no root lands exactly on a node.
            let (x0, x1) = (-1.00000377 + 4.0 * k as f64 / steps as f64, -1.00000377 + 4.0 * (k + 1) as f64 / steps as f64);
            if charpoly(x0) * charpoly(x1) < 0.0 {
                roots.push(0.5 * (x0 + x1));
            }
        }
        roots.sort_by(|a, b| b.total_cmp(a));
        assert_eq!(roots.len(), 2);
        for (z, r) in d.values.iter().zip(&roots) {
            assert!((z.re - r).abs() < 1e-5);
        }
        assert!((d.values[0] - re(1.5)).norm() < 1e-14);
        assert!((d.values[1] - re(0.5)).norm() < 1e-14);
        check_decomposition(&a, &d);
    }

    #[test]
    fn random_decompositions_satisfy_invariants() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in [1, 3, 8, 20] {
            let h = random_hermitian(n, &mut rng);
            check_decomposition(&h, &eigen_all(&h, true).unwrap());
            let g = random_general(n, &mut rng);
            check_decomposition(&g, &eigen_all(&g, false).unwrap());
        }
    }

    #[test]
    fn conjugate_pairs_sorted_by_imaginary_part() {
        // Rotation-like block: eigenvalues 2 +- i.
        let a = real_matrix(&[&[2.0, -1.0], &[1.0, 2.0]]);
        let d = eigen_all(&a, false).unwrap();
        assert!(d.values[0].im > 0.0 && d.values[1].im < 0.0);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(eigen_all(&CMatrix::zeros(0, 0), false).is_err());
        let mut a = CMatrix::identity(2, 2);
        a[(0, 1)] = re(f64::NAN);
        assert!(eigen_all(&a, false).is_err());
    }

    #[test]
    fn bordered_layout() {
        let a0 = real_matrix(&[&[1.0, 0.0], &[0.0, 2.0]]);
        let v0 = CVector::from_vec(vec![re(1.0), re(0.0)]);
        let sys = build_bordered(&a0, &v0, re(1.0), Conjugation::Adjoint).unwrap();
        let expect = real_matrix(&[&[0.0, 1.0, 0.0], &[1.0, 0.0, 0.0], &[0.0, 0.0, -1.0]]);
        assert_eq!(sys.matrix(), &expect);
    }

    #[test]
    fn bordered_conjugation_convention() {
        let a0 = CMatrix::identity(2, 2);
        let v0 = CVector::from_vec(vec![C64::new(0.6, 0.0), C64::new(0.0, 0.8)]);
        let t = BorderedSystem::build(&a0, &v0, re(1.0), Conjugation::Transpose, Precision::Double);
        // Double eigenvalue: singular either way, but check the row we would build.
        assert!(t.is_err());
        let a0 = real_matrix(&[&[1.0, 0.0], &[0.0, 3.0]]);
        let v0 = CVector::from_vec(vec![C64::new(0.0, 1.0), re(0.0)]);
        let t = BorderedSystem::build(&a0, &v0, re(1.0), Conjugation::Transpose, Precision::Double).unwrap();
        let h = BorderedSystem::build(&a0, &v0, re(1.0), Conjugation::Adjoint, Precision::Double).unwrap();
        assert_eq!(t.matrix()[(0, 1)], C64::new(0.0, 1.0));
        assert_eq!(h.matrix()[(0, 1)], C64::new(0.0, -1.0));
        assert_eq!(h.matrix()[(1, 0)], C64::new(0.0, 1.0));
    }

    #[test]
    fn singular_when_eigenvalue_repeated() {
        let a0 = CMatrix::identity(3, 3);
        let v0 = CVector::from_vec(vec![re(1.0), re(0.0), re(0.0)]);
        let err = build_bordered(&a0, &v0, re(1.0), Conjugation::Adjoint).unwrap_err();
        assert!(matches!(err, Error::NonSimpleEigenvalue { .. }));
    }

    #[test]
    fn uniform_shift_rhs() {
        let a0 = real_matrix(&[&[1.0, 0.0], &[0.0, 2.0]]);
        let v0 = CVector::from_vec(vec![re(1.0), re(0.0)]);
        let sys = build_bordered(&a0, &v0, re(1.0), Conjugation::Adjoint).unwrap();
        let rhs = CVector::from_vec(vec![re(0.0), re(1.0), re(0.0)]);
        let (l1, v1) = solve_bordered(&sys, &rhs).unwrap();
        assert!((l1 - re(1.0)).norm() < 1e-15);
        assert!(v1.norm() < 1e-15);
        let (l0, v) = solve_bordered(&sys, &CVector::zeros(3)).unwrap();
        assert_eq!(l0, re(0.0));
        assert!(v.norm() == 0.0);
    }

    #[test]
    fn single_precision_rounds_entries() {
        let a0 = real_matrix(&[&[0.1, 0.0], &[0.0, 2.0]]);
        let v0 = CVector::from_vec(vec![re(1.0), re(0.0)]);
        let sys = BorderedSystem::build(&a0, &v0, re(0.1), Conjugation::Adjoint, Precision::Single).unwrap();
        assert_eq!(sys.matrix()[(2, 2)], re((0.1 - 2.0f64) as f32 as f64));
    }

    fn hermitian_case(n: usize, rng: &mut ChaCha8Rng) -> (CMatrix, EigenDecomposition) {
        let a = random_hermitian(n, rng);
        let d = eigen_all(&a, true).unwrap();
        (a, d)
    }

    #[test]
    fn reduced_agrees_with_lu_hermitian() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        for _ in 0..20 {
            let (a, d) = hermitian_case(8, &mut rng);
            let k = rng.random_range(0..8);
            let (v0, l0) = (&d.vectors[k], d.values[k]);
            let rhs = random_vector(9, &mut rng);
            let full = solve_bordered(&build_bordered(&a, v0, l0, Conjugation::Adjoint).unwrap(), &rhs).unwrap();
            let red = solve_bordered_reduced(&a, &d.schur_q, &d.schur_t, v0, l0, Conjugation::Adjoint, &rhs).unwrap();
            let scale = full.1.norm() + full.0.norm();
            assert!((full.0 - red.0).norm() <= 1e-10 * scale);
            assert!((&full.1 - &red.1).norm() <= 1e-10 * scale);
        }
    }

    #[test]
    fn reduced_agrees_with_lu_general() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for n in [2, 5, 16, 32] {
            for _ in 0..5 {
                let a = random_general(n, &mut rng);
                let d = eigen_all(&a, false).unwrap();
                let k = rng.random_range(0..n);
                let (v0, l0) = (&d.vectors[k], d.values[k]);
                let rhs = random_vector(n + 1, &mut rng);
                let sys = build_bordered(&a, v0, l0, Conjugation::Transpose).unwrap();
                let full = solve_bordered(&sys, &rhs).unwrap();
                let red = solve_bordered_reduced(&a, &d.schur_q, &d.schur_t, v0, l0, Conjugation::Transpose, &rhs).unwrap();
                let scale = full.1.norm() + full.0.norm();
                assert!((full.0 - red.0).norm() <= 1e-10 * scale, "n={n}");
                assert!((&full.1 - &red.1).norm() <= 1e-10 * scale, "n={n}");
                let res = sys.residual(red.0, &red.1, rhs[0], &rhs.rows(1, n).into_owned());
                assert!(res <= 1e-11 * (1.0 + rhs.max_abs()));
            }
        }
    }

    #[test]
    fn reduced_arrowhead_closed_form() {
        // Diagonal T, eigenvalue T_11: lambda_1 is the first component of Q^H A1 v0.
        let t = CMatrix::from_diagonal(&CVector::from_vec(vec![re(3.0), re(1.0), re(-2.0)]));
        let q = CMatrix::identity(3, 3);
        let v0 = CVector::from_vec(vec![re(1.0), re(0.0), re(0.0)]);
        let a1 = real_matrix(&[&[0.5, 0.2, -0.1], &[0.2, 0.3, 0.7], &[-0.1, 0.7, 0.9]]);
        let y = q.ad_mul(&(&a1 * &v0));
        let mut rhs = CVector::zeros(4);
        rhs.rows_mut(1, 3).copy_from(&y);
        let (l1, _) = solve_bordered_reduced(&t, &q, &t, &v0, re(3.0), Conjugation::Adjoint, &rhs).unwrap();
        assert!((l1 - y[0]).norm() < 1e-15);
        let (l, v) = solve_bordered_reduced(&t, &q, &t, &v0, re(3.0), Conjugation::Adjoint, &CVector::zeros(4)).unwrap();
        assert_eq!(l, re(0.0));
        assert_eq!(v.norm(), 0.0);
    }

    #[test]
    fn gamma_equivariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let (a, d) = hermitian_case(8, &mut rng);
        let gamma = C64::from_polar(1.0, 0.7);
        let (v0, l0) = (&d.vectors[3], d.values[3]);
        let gv0 = v0 * gamma;
        let y = random_vector(8, &mut rng);
        let z = C64::new(0.3, -0.2);
        let base = build_bordered(&a, v0, l0, Conjugation::Adjoint).unwrap().solve(z, &y).unwrap();
        let scaled = build_bordered(&a, &gv0, l0, Conjugation::Adjoint).unwrap().solve(z, &(&y * gamma)).unwrap();
        assert!((base.0 - scaled.0).norm() <= 1e-12);
        assert!((&base.1 * gamma - &scaled.1).norm() <= 1e-12);
    }

    #[test]
    fn values_only_agree_with_the_full_decomposition() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for n in [2, 3, 9] {
            let a = CMatrix::from_fn(n, n, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
            let h = &a + a.adjoint();
            for (m, herm) in [(a, false), (h, true)] {
                let full = eigen_all(&m, herm).unwrap().values;
                let only = eigenvalues(&m, herm).unwrap();
                for (x, y) in full.iter().zip(&only) {
                    assert!((x - y).norm() < 1e-12, "n={n} hermitian={herm}");
                }
            }
        }
    }

    #[test]
    fn reduced_rejects_repeated_eigenvalue() {
        let a = CMatrix::identity(4, 4);
        let d = eigen_all(&a, true).unwrap();
        let rhs = CVector::zeros(5);
        let err = solve_bordered_reduced(&a, &d.schur_q, &d.schur_t, &d.vectors[0], d.values[0], Conjugation::Adjoint, &rhs)
            .unwrap_err();
        assert!(matches!(err, Error::NonSimpleEigenvalue { .. }));
    }
}
