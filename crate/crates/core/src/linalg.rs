//! Dense complex linear algebra for single- and two-qubit operators.
//!
//! Matrices are at most 4×4, so storage is a fixed inline array and every
//! value is `Copy`. Two-qubit indices follow the convention `|ij⟩ ↦ 2i + j`
//! with subsystem A as the first tensor factor.

use std::fmt;
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Absolute tolerance on `max |M − M†|` for Hermiticity checks.
pub const TOL_HERMITIAN: f64 = 1e-12;

const MAX_DIM: usize = 4;
const JACOBI_MAX_SWEEPS: usize = 64;
const JACOBI_OFF_TOL: f64 = 1e-14;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Square complex matrix of dimension 1..=4 stored row-major.
#[derive(Clone, Copy, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: [Complex64; MAX_DIM * MAX_DIM],
}

/// Which factor of a two-qubit operator an operation acts on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Subsystem {
    A,
    B,
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        assert!((1..=MAX_DIM).contains(&dim), "dimension {dim} unsupported");
        Self {
            dim,
            data: [ZERO; MAX_DIM * MAX_DIM],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = ONE;
        }
        m
    }

    /// Builds a matrix from `dim²` row-major entries.
    pub fn from_row_major(dim: usize, entries: &[Complex64]) -> Result<Self> {
        if !(1..=MAX_DIM).contains(&dim) {
            return Err(Error::Argument(format!("dimension {dim} unsupported")));
        }
        if entries.len() != dim * dim {
            return Err(Error::Argument(format!(
                "expected {} entries for a {dim}x{dim} matrix, got {}",
                dim * dim,
                entries.len()
            )));
        }
        let mut m = Self::zeros(dim);
        m.data[..dim * dim].copy_from_slice(entries);
        Ok(m)
    }

    /// Builds a matrix from real row-major entries.
    pub fn from_real(dim: usize, entries: &[f64]) -> Result<Self> {
        let v: Vec<Complex64> = entries.iter().map(|&x| c(x, 0.0)).collect();
        Self::from_row_major(dim, &v)
    }

    pub fn diag(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = c(v, 0.0);
        }
        m
    }

    /// `|ψ⟩⟨ψ|` for an (unnormalized) column vector.
    pub fn outer(psi: &[Complex64]) -> Self {
        let n = psi.len();
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = psi[i] * psi[j].conj();
            }
        }
        m
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn entries(&self) -> &[Complex64] {
        &self.data[..self.dim * self.dim]
    }

    pub fn rows(&self) -> Vec<Vec<Complex64>> {
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self[(i, j)]).collect())
            .collect()
    }

    pub fn dagger(&self) -> Self {
        let mut m = Self::zeros(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                m[(i, j)] = self[(j, i)].conj();
            }
        }
        m
    }

    pub fn transpose(&self) -> Self {
        let mut m = Self::zeros(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                m[(i, j)] = self[(j, i)];
            }
        }
        m
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut m = *self;
        m.data[..self.dim * self.dim]
            .iter_mut()
            .for_each(|z| *z *= s);
        m
    }

    pub fn scale_c(&self, s: Complex64) -> Self {
        let mut m = *self;
        m.data[..self.dim * self.dim]
            .iter_mut()
            .for_each(|z| *z *= s);
        m
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.entries().iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Max-entry distance to `other`; panics on dimension mismatch.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        self.entries()
            .iter()
            .zip(other.entries())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries().iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `max |M − M†|`.
    pub fn hermiticity_residual(&self) -> f64 {
        let mut r: f64 = 0.0;
        for i in 0..self.dim {
            for j in i..self.dim {
                r = r.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        r
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_residual() <= tol
    }

    /// `(M + M†)/2`.
    pub fn hermitian_part(&self) -> Self {
        (*self + self.dagger()).scale(0.5)
    }

    /// Matrix–vector product.
    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.dim);
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self[(i, j)] * v[j]).sum())
            .collect()
    }

    /// Inverse of a 2×2 matrix.
    pub fn inverse_2x2(&self) -> Result<Self> {
        if self.dim != 2 {
            return Err(Error::Argument("inverse_2x2 needs a 2x2 matrix".into()));
        }
        let (a, b, cc, d) = (self[(0, 0)], self[(0, 1)], self[(1, 0)], self[(1, 1)]);
        let det = a * d - b * cc;
        if det.norm() < 1e-300 {
            return Err(Error::Argument("singular matrix".into()));
        }
        let inv = ComplexMatrix::from_row_major(2, &[d, -b, -cc, a])?;
        Ok(inv.scale_c(ONE / det))
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        debug_assert!(i < self.dim && j < self.dim);
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        debug_assert!(i < self.dim && j < self.dim);
        &mut self.data[i * self.dim + j]
    }
}

impl Add for ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(mut self, rhs: Self) -> Self {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        for k in 0..self.dim * self.dim {
            self.data[k] += rhs.data[k];
        }
        self
    }
}

impl AddAssign for ComplexMatrix {
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl Sub for ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(mut self, rhs: Self) -> Self {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        for k in 0..self.dim * self.dim {
            self.data[k] -= rhs.data[k];
        }
        self
    }
}

impl Neg for ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> Self {
        self.scale(-1.0)
    }
}

impl Mul for ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: Self) -> Self {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        let n = self.dim;
        let mut m = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                for j in 0..n {
                    m.data[i * n + j] += a * rhs[(k, j)];
                }
            }
        }
        m
    }
}

impl Mul<f64> for ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, s: f64) -> Self {
        self.scale(s)
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{}) [", self.dim, self.dim)?;
        for i in 0..self.dim {
            write!(f, "  ")?;
            for j in 0..self.dim {
                let z = self[(i, j)];
                write!(f, "{:+.6}{:+.6}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Pauli operator `σ_index`: I, X, Y, Z for 0..=3.
pub fn pauli(index: usize) -> Result<ComplexMatrix> {
    let e = match index {
        0 => [ONE, ZERO, ZERO, ONE],
        1 => [ZERO, ONE, ONE, ZERO],
        2 => [ZERO, -I, I, ZERO],
        3 => [ONE, ZERO, ZERO, -ONE],
        _ => return Err(Error::Argument(format!("Pauli index {index} not in 0..=3"))),
    };
    ComplexMatrix::from_row_major(2, &e)
}

/// All four Pauli operators, `[I, X, Y, Z]`.
pub fn paulis() -> [ComplexMatrix; 4] {
    [0, 1, 2, 3].map(|k| pauli(k).expect("valid index"))
}

/// Kronecker product `A ⊗ B`.
pub fn tensor(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (n, m) = (a.dim(), b.dim());
    assert!(n * m <= MAX_DIM, "tensor product exceeds supported dimension");
    let mut out = ComplexMatrix::zeros(n * m);
    for i in 0..n {
        for j in 0..n {
            let aij = a[(i, j)];
            for k in 0..m {
                for l in 0..m {
                    out[(i * m + k, j * m + l)] = aij * b[(k, l)];
                }
            }
        }
    }
    out
}

fn require_two_qubit(m: &ComplexMatrix, op: &str) -> Result<()> {
    if m.dim() != 4 {
        return Err(Error::Argument(format!(
            "{op} needs a 4x4 operator, got {}x{}",
            m.dim(),
            m.dim()
        )));
    }
    Ok(())
}

/// Traces out `subsystem`, returning the 2×2 operator on the other qubit.
pub fn partial_trace(m: &ComplexMatrix, subsystem: Subsystem) -> Result<ComplexMatrix> {
    require_two_qubit(m, "partial_trace")?;
    let mut out = ComplexMatrix::zeros(2);
    for i in 0..2 {
        for j in 0..2 {
            out[(i, j)] = match subsystem {
                Subsystem::B => m[(2 * i, 2 * j)] + m[(2 * i + 1, 2 * j + 1)],
                Subsystem::A => m[(i, j)] + m[(2 + i, 2 + j)],
            };
        }
    }
    Ok(out)
}

/// Transposes the named factor only.
pub fn partial_transpose(m: &ComplexMatrix, subsystem: Subsystem) -> Result<ComplexMatrix> {
    require_two_qubit(m, "partial_transpose")?;
    let mut out = ComplexMatrix::zeros(4);
    for i in 0..2 {
        for k in 0..2 {
            for j in 0..2 {
                for l in 0..2 {
                    out[(2 * i + k, 2 * j + l)] = match subsystem {
                        Subsystem::A => m[(2 * j + k, 2 * i + l)],
                        Subsystem::B => m[(2 * i + l, 2 * j + k)],
                    };
                }
            }
        }
    }
    Ok(out)
}

/// `AB + BA`.
pub fn anticommutator(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    if a.dim() != b.dim() {
        return Err(Error::Argument(format!(
            "anticommutator dimension mismatch: {} vs {}",
            a.dim(),
            b.dim()
        )));
    }
    Ok(*a * *b + *b * *a)
}

/// Swap operator `Σ_ij |i⟩⟨j| ⊗ |j⟩⟨i|`.
pub fn swap_operator() -> ComplexMatrix {
    let mut s = ComplexMatrix::zeros(4);
    for i in 0..2 {
        for j in 0..2 {
            s[(2 * i + j, 2 * j + i)] = ONE;
        }
    }
    s
}

/// Eigenvalues of a Hermitian matrix, sorted ascending.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumResult {
    pub eigenvalues: Vec<f64>,
}

impl SpectrumResult {
    pub fn min(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn max(&self) -> f64 {
        *self.eigenvalues.last().expect("non-empty spectrum")
    }

    pub fn sum(&self) -> f64 {
        self.eigenvalues.iter().sum()
    }
}

fn check_hermitian(m: &ComplexMatrix) -> Result<()> {
    let r = m.hermiticity_residual();
    if r > TOL_HERMITIAN {
        return Err(Error::Contract(format!(
            "matrix is not Hermitian (max |M - M†| = {r:e})"
        )));
    }
    Ok(())
}

/// Cyclic complex Jacobi on the Hermitian part of `m`. Returns the
/// (unsorted) diagonal and, when requested, the accumulated eigenvectors
/// as columns.
fn jacobi(m: &ComplexMatrix, want_vectors: bool) -> ([f64; MAX_DIM], ComplexMatrix) {
    let n = m.dim();
    let mut a = m.hermitian_part();
    let mut v = ComplexMatrix::identity(n);
    let scale = a.frobenius_norm().max(1.0);

    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[(p, q)].norm_sqr();
            }
        }
        if (2.0 * off).sqrt() < JACOBI_OFF_TOL * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let r = apq.norm();
                if r == 0.0 {
                    continue;
                }
                // Phase-rotate the pair so the off-diagonal entry is real,
                // then apply a real symmetric Jacobi rotation.
                let phase = apq / r;
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let theta = (aqq - app) / (2.0 * r);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let cs = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * cs;
                let pc = phase.conj();
                // G = [[c, s], [-s·e^{-iφ}, c·e^{-iφ}]] on rows/cols (p, q).
                let g_pp = c(cs, 0.0);
                let g_pq = c(sn, 0.0);
                let g_qp = pc * (-sn);
                let g_qq = pc * cs;

                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * g_pp + akq * g_qp;
                    a[(k, q)] = akp * g_pq + akq * g_qq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = g_pp.conj() * apk + g_qp.conj() * aqk;
                    a[(q, k)] = g_pq.conj() * apk + g_qq.conj() * aqk;
                }
                a[(p, q)] = ZERO;
                a[(q, p)] = ZERO;
                if want_vectors {
                    for k in 0..n {
                        let vkp = v[(k, p)];
                        let vkq = v[(k, q)];
                        v[(k, p)] = vkp * g_pp + vkq * g_qp;
                        v[(k, q)] = vkp * g_pq + vkq * g_qq;
                    }
                }
            }
        }
    }
    let mut d = [0.0; MAX_DIM];
    for (i, di) in d.iter_mut().enumerate().take(n) {
        *di = a[(i, i)].re;
    }
    (d, v)
}

/// Eigenvalues of `m` without the Hermiticity precondition check. The
/// Hermitian part of `m` is diagonalized.
pub(crate) fn eigenvalues_unchecked(m: &ComplexMatrix) -> [f64; MAX_DIM] {
    jacobi(m, false).0
}

/// Sum of |negative eigenvalues| without the Hermiticity check.
pub fn negativity_unchecked(m: &ComplexMatrix) -> f64 {
    let d = eigenvalues_unchecked(m);
    d[..m.dim()].iter().fold(0.0, |acc, &x| if x < 0.0 { acc - x } else { acc })
}

pub fn hermitian_eigenvalues(m: &ComplexMatrix) -> Result<SpectrumResult> {
    check_hermitian(m)?;
    let d = eigenvalues_unchecked(m);
    let mut eigenvalues = d[..m.dim()].to_vec();
    eigenvalues.sort_by(f64::total_cmp);
    Ok(SpectrumResult { eigenvalues })
}

/// Eigen-decomposition of a Hermitian matrix: ascending eigenvalues and the
/// matching orthonormal eigenvectors as columns.
pub fn hermitian_eigen(m: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    check_hermitian(m)?;
    let n = m.dim();
    let (d, v) = jacobi(m, true);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].total_cmp(&d[j]));
    let mut vecs = ComplexMatrix::zeros(n);
    for (col, &src) in order.iter().enumerate() {
        for k in 0..n {
            vecs[(k, col)] = v[(k, src)];
        }
    }
    Ok((order.iter().map(|&i| d[i]).collect(), vecs))
}

pub fn trace_norm(m: &ComplexMatrix) -> Result<f64> {
    Ok(hermitian_eigenvalues(m)?
        .eigenvalues
        .iter()
        .map(|x| x.abs())
        .sum())
}

/// Absolute sum of the negative eigenvalues.
pub fn negativity(m: &ComplexMatrix) -> Result<f64> {
    Ok(hermitian_eigenvalues(m)?
        .eigenvalues
        .iter()
        .fold(0.0, |acc, &x| if x < 0.0 { acc - x } else { acc }))
}

/// Applies `f` to the eigenvalues of a Hermitian matrix.
pub fn hermitian_function(m: &ComplexMatrix, f: impl Fn(f64) -> f64) -> Result<ComplexMatrix> {
    let (vals, vecs) = hermitian_eigen(m)?;
    let n = m.dim();
    let mut out = ComplexMatrix::zeros(n);
    for (k, &lam) in vals.iter().enumerate() {
        let w = f(lam);
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] += vecs[(i, k)] * vecs[(j, k)].conj() * w;
            }
        }
    }
    Ok(out)
}
