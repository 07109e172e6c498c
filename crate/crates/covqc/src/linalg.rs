//! Dense complex matrices sized for few-level systems, plus the Hermitian
//! eigensolver and entropy helpers everything else is built on.
//!
//! Dimensions here never exceed a few dozen (the largest object in the crate
//! is the 36x36 environment of a two-copy channel), so the matrix type is a
//! plain row-major buffer and the eigensolver is a cyclic Jacobi iteration.

use crate::tol;
use crate::{Error, Result};

pub type Complex64 = num_complex::Complex<f64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Row-major dense complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Complex64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix { rows, cols, data: vec![ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, ONE);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        DenseMatrix { rows, cols, data }
    }

    /// Matrix unit `|a><b|` in dimension `dim`.
    pub fn matrix_unit(dim: usize, a: usize, b: usize) -> Self {
        let mut m = Self::zeros(dim, dim);
        m.set(a, b, ONE);
        m
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: Complex64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn add(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "shape mismatch in add");
        let data = self.data.iter().zip(&other.data).map(|(x, y)| x + y).collect();
        DenseMatrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn sub(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "shape mismatch in sub");
        let data = self.data.iter().zip(&other.data).map(|(x, y)| x - y).collect();
        DenseMatrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn scale(&self, s: Complex64) -> DenseMatrix {
        let data = self.data.iter().map(|x| x * s).collect();
        DenseMatrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn scale_re(&self, s: f64) -> DenseMatrix {
        self.scale(Complex64::new(s, 0.0))
    }

    pub fn matmul(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.cols, other.rows, "shape mismatch in matmul");
        let mut out = DenseMatrix::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k);
                if a == ZERO {
                    continue;
                }
                for c in 0..other.cols {
                    let v = out.get(r, c) + a * other.get(k, c);
                    out.set(r, c, v);
                }
            }
        }
        out
    }

    pub fn transpose(&self) -> DenseMatrix {
        DenseMatrix::from_fn(self.cols, self.rows, |r, c| self.get(c, r))
    }

    pub fn conj(&self) -> DenseMatrix {
        let data = self.data.iter().map(|x| x.conj()).collect();
        DenseMatrix { rows: self.rows, cols: self.cols, data }
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> DenseMatrix {
        DenseMatrix::from_fn(self.cols, self.rows, |r, c| self.get(c, r).conj())
    }

    pub fn trace(&self) -> Complex64 {
        assert!(self.is_square(), "trace of non-square matrix");
        (0..self.rows).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.data.iter().map(|x| x.norm()).fold(0.0, f64::max)
    }

    /// Max absolute entry of `A - A^dagger`.
    pub fn hermiticity_defect(&self) -> f64 {
        assert!(self.is_square(), "hermiticity of non-square matrix");
        let mut defect: f64 = 0.0;
        for r in 0..self.rows {
            for c in 0..self.cols {
                defect = defect.max((self.get(r, c) - self.get(c, r).conj()).norm());
            }
        }
        defect
    }

    /// Kronecker product, first factor major: `(A kron B)[(a,b),(a',b')] = A[a,a'] B[b,b']`.
    pub fn kron(&self, other: &DenseMatrix) -> DenseMatrix {
        let rows = self.rows * other.rows;
        let cols = self.cols * other.cols;
        let mut out = DenseMatrix::zeros(rows, cols);
        for ra in 0..self.rows {
            for ca in 0..self.cols {
                let a = self.get(ra, ca);
                if a == ZERO {
                    continue;
                }
                for rb in 0..other.rows {
                    for cb in 0..other.cols {
                        out.set(ra * other.rows + rb, ca * other.cols + cb, a * other.get(rb, cb));
                    }
                }
            }
        }
        out
    }

    /// Transpose of the chosen tensor leg of a matrix on `C^da (x) C^db`.
    ///
    /// This is an exact index rearrangement, so applying it twice returns the
    /// original matrix bit for bit.
    pub fn partial_transpose(&self, da: usize, db: usize, first_leg: bool) -> DenseMatrix {
        assert_eq!(self.rows, da * db, "tensor dimensions do not factor the matrix");
        assert!(self.is_square(), "partial transpose of non-square matrix");
        DenseMatrix::from_fn(self.rows, self.cols, |rc, cc| {
            let (a, b) = (rc / db, rc % db);
            let (a2, b2) = (cc / db, cc % db);
            if first_leg {
                self.get(a2 * db + b, a * db + b2)
            } else {
                self.get(a * db + b2, a2 * db + b)
            }
        })
    }

    /// Trace out the second tensor leg of a matrix on `C^da (x) C^db`.
    pub fn trace_out_second(&self, da: usize, db: usize) -> DenseMatrix {
        assert_eq!(self.rows, da * db, "tensor dimensions do not factor the matrix");
        DenseMatrix::from_fn(da, da, |a, a2| {
            (0..db).map(|b| self.get(a * db + b, a2 * db + b)).sum()
        })
    }

    /// Trace out the first tensor leg of a matrix on `C^da (x) C^db`.
    pub fn trace_out_first(&self, da: usize, db: usize) -> DenseMatrix {
        assert_eq!(self.rows, da * db, "tensor dimensions do not factor the matrix");
        DenseMatrix::from_fn(db, db, |b, b2| {
            (0..da).map(|a| self.get(a * db + b, a * db + b2)).sum()
        })
    }
}

/// Standard basis vector `|i>` in dimension `dim`.
pub fn ket(dim: usize, i: usize) -> Vec<Complex64> {
    let mut v = vec![ZERO; dim];
    v[i] = ONE;
    v
}

pub fn inner(u: &[Complex64], v: &[Complex64]) -> Complex64 {
    assert_eq!(u.len(), v.len(), "length mismatch in inner product");
    u.iter().zip(v).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Outer product `|u><v|`.
pub fn outer(u: &[Complex64], v: &[Complex64]) -> DenseMatrix {
    DenseMatrix::from_fn(u.len(), v.len(), |r, c| u[r] * v[c].conj())
}

pub fn matvec(m: &DenseMatrix, v: &[Complex64]) -> Vec<Complex64> {
    assert_eq!(m.cols, v.len(), "length mismatch in matvec");
    (0..m.rows)
        .map(|r| (0..m.cols).map(|c| m.get(r, c) * v[c]).sum())
        .collect()
}

pub fn kron_vec(u: &[Complex64], v: &[Complex64]) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(u.len() * v.len());
    for a in u {
        for b in v {
            out.push(a * b);
        }
    }
    out
}

/// Eigenvalues sorted in descending order.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub values: Vec<f64>,
}

impl Spectrum {
    pub fn min(&self) -> f64 {
        *self.values.last().expect("empty spectrum")
    }

    pub fn max(&self) -> f64 {
        *self.values.first().expect("empty spectrum")
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    /// Group eigenvalues whose gaps stay below `tol` into `(value, multiplicity)`
    /// pairs, averaging within each group.
    pub fn grouped(&self, tol: f64) -> Vec<(f64, usize)> {
        let mut out: Vec<(f64, usize)> = Vec::new();
        for &v in &self.values {
            match out.last_mut() {
                Some((rep, count)) if (*rep - v).abs() <= tol => {
                    *rep = (*rep * *count as f64 + v) / (*count as f64 + 1.0);
                    *count += 1;
                }
                _ => out.push((v, 1)),
            }
        }
        out
    }
}

const MAX_JACOBI_SWEEPS: usize = 100;

fn off_diagonal_norm(m: &DenseMatrix) -> f64 {
    let mut s = 0.0;
    for r in 0..m.rows {
        for c in 0..m.cols {
            if r != c {
                s += m.get(r, c).norm_sqr();
            }
        }
    }
    s.sqrt()
}

fn jacobi(a: &DenseMatrix, want_vectors: bool) -> Result<(Spectrum, Option<DenseMatrix>)> {
    if !a.is_square() {
        return Err(Error::NotSquare { rows: a.rows, cols: a.cols });
    }
    let defect = a.hermiticity_defect();
    if defect > tol::DEFAULT.hermiticity {
        return Err(Error::NotHermitian { defect });
    }
    let n = a.rows;
    // Symmetrize so rounding noise in the input cannot bias the iteration.
    let mut m = a.add(&a.dagger()).scale_re(0.5);
    let mut v = want_vectors.then(|| DenseMatrix::identity(n));

    let norm_f = m.frobenius_norm();
    let threshold = (tol::DEFAULT.jacobi_rel * norm_f).max(f64::MIN_POSITIVE);
    let skip = threshold / (10.0 * n.max(2) as f64);

    let mut converged = norm_f == 0.0 || n < 2;
    for _ in 0..MAX_JACOBI_SWEEPS {
        if converged || off_diagonal_norm(&m) <= threshold {
            converged = true;
            break;
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = m.get(p, q);
                let r = apq.norm();
                if r <= skip {
                    continue;
                }
                let app = m.get(p, p).re;
                let aqq = m.get(q, q).re;
                let u = apq / r;
                let tau = (aqq - app) / (2.0 * r);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;

                // Unitary J: J[p][p] = u c, J[p][q] = u s, J[q][p] = -s, J[q][q] = c.
                let (jpp, jpq) = (u * c, u * s);
                let (jqp, jqq) = (Complex64::new(-s, 0.0), Complex64::new(c, 0.0));

                // Columns: M <- M J.
                for k in 0..n {
                    let mkp = m.get(k, p);
                    let mkq = m.get(k, q);
                    m.set(k, p, mkp * jpp + mkq * jqp);
                    m.set(k, q, mkp * jpq + mkq * jqq);
                }
                // Rows: M <- J^dagger M.
                for k in 0..n {
                    let mpk = m.get(p, k);
                    let mqk = m.get(q, k);
                    m.set(p, k, jpp.conj() * mpk + jqp.conj() * mqk);
                    m.set(q, k, jpq.conj() * mpk + jqq.conj() * mqk);
                }
                m.set(p, q, ZERO);
                m.set(q, p, ZERO);
                let dp = m.get(p, p);
                let dq = m.get(q, q);
                m.set(p, p, Complex64::new(dp.re, 0.0));
                m.set(q, q, Complex64::new(dq.re, 0.0));

                if let Some(v) = v.as_mut() {
                    for k in 0..n {
                        let vkp = v.get(k, p);
                        let vkq = v.get(k, q);
                        v.set(k, p, vkp * jpp + vkq * jqp);
                        v.set(k, q, vkp * jpq + vkq * jqq);
                    }
                }
            }
        }
    }
    if !converged && off_diagonal_norm(&m) > threshold {
        return Err(Error::NoConvergence { sweeps: MAX_JACOBI_SWEEPS });
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| m.get(i, i).re).collect();
    order.sort_by(|&i, &j| diag[j].partial_cmp(&diag[i]).expect("NaN eigenvalue"));
    let values = order.iter().map(|&i| diag[i]).collect();
    let vectors = v.map(|v| DenseMatrix::from_fn(n, n, |r, c| v.get(r, order[c])));
    Ok((Spectrum { values }, vectors))
}

/// Eigenvalues of a Hermitian matrix, sorted in descending order.
pub fn hermitian_eigenvalues(a: &DenseMatrix) -> Result<Spectrum> {
    jacobi(a, false).map(|(s, _)| s)
}

/// Eigendecomposition of a Hermitian matrix; eigenvector `i` is column `i`.
pub fn hermitian_eigen(a: &DenseMatrix) -> Result<(Spectrum, DenseMatrix)> {
    jacobi(a, true).map(|(s, v)| (s, v.expect("vectors requested")))
}

/// Trace norm of a Hermitian matrix (sum of absolute eigenvalues).
pub fn hermitian_trace_norm(a: &DenseMatrix) -> Result<f64> {
    Ok(hermitian_eigenvalues(a)?.values.iter().map(|x| x.abs()).sum())
}

/// Entropy `-sum x ln x` of a probability-like vector, clamping roundoff
/// negatives in `[-psd_floor, 0)` to zero. Values below the floor are a
/// genuine positivity violation.
pub fn entropy_of_spectrum(values: &[f64]) -> Result<f64> {
    let floor = tol::DEFAULT.psd_floor;
    let mut h = 0.0;
    for &x in values {
        if x < -floor {
            return Err(Error::NotPsd { min_eig: x });
        }
        if x > 0.0 {
            h -= x * x.ln();
        }
    }
    Ok(h)
}

/// Binary entropy `h(x) = -x ln x - (1-x) ln(1-x)` in nats.
pub fn binary_entropy(x: f64) -> f64 {
    assert!((0.0..=1.0).contains(&x), "binary entropy argument out of range");
    let mut h = 0.0;
    if x > 0.0 {
        h -= x * x.ln();
    }
    if x < 1.0 {
        h -= (1.0 - x) * (1.0 - x).ln();
    }
    h
}

/// A validated density matrix: Hermitian, unit trace, positive semidefinite
/// up to the configured floor.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    mat: DenseMatrix,
}

impl DensityMatrix {
    pub fn new(mat: DenseMatrix) -> Result<Self> {
        if !mat.is_square() {
            return Err(Error::NotSquare { rows: mat.rows, cols: mat.cols });
        }
        let defect = mat.hermiticity_defect();
        if defect > tol::DEFAULT.hermiticity {
            return Err(Error::NotHermitian { defect });
        }
        let trace = mat.trace().re;
        if (trace - 1.0).abs() > tol::DEFAULT.unit_trace {
            return Err(Error::InvalidTrace { trace });
        }
        let spectrum = hermitian_eigenvalues(&mat)?;
        if spectrum.min() < -tol::DEFAULT.psd_floor {
            return Err(Error::NotPsd { min_eig: spectrum.min() });
        }
        Ok(DensityMatrix { mat })
    }

    pub fn from_pure(state: &[Complex64]) -> Result<Self> {
        let n = norm(state);
        if (n - 1.0).abs() > tol::DEFAULT.unit_trace {
            return Err(Error::InvalidTrace { trace: n * n });
        }
        Self::new(outer(state, state))
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        DensityMatrix { mat: DenseMatrix::identity(dim).scale_re(1.0 / dim as f64) }
    }

    pub fn dim(&self) -> usize {
        self.mat.rows
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.mat
    }

    /// Von Neumann entropy in nats.
    pub fn von_neumann_entropy(&self) -> Result<f64> {
        let spectrum = hermitian_eigenvalues(&self.mat)?;
        entropy_of_spectrum(&spectrum.values)
    }
}
