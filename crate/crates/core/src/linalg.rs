//! Fixed-size complex linear algebra for single- and two-qubit operators.
//!
//! Every matrix here is either 2×2 or 4×4, so the routines favour simple,
//! exact-size loops over general machinery. Hermitian eigenproblems use the
//! closed form for 2×2 and cyclic complex Jacobi rotations for 4×4.
//!
//! Two-qubit indices follow the usual tensor ordering: row `2i + k` of a 4×4
//! operator belongs to Alice's basis state `i` and Bob's basis state `k`.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Hermiticity tolerance accepted by [`hermitian_eigen`].
pub const HERMITIAN_TOL: f64 = 1e-9;
/// Eigenvalues in `[-PSD_CLAMP, 0)` are treated as floating-point noise.
pub const PSD_CLAMP: f64 = 1e-10;
/// Eigenvalues below `-PSD_ERROR` mean the input is genuinely not PSD.
pub const PSD_ERROR: f64 = 1e-8;

const JACOBI_OFF_TOL: f64 = 1e-12;
const JACOBI_MAX_SWEEPS: usize = 200;

/// One tensor factor of a two-qubit operator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Subsystem {
    A,
    B,
}

/// A dense, row-major complex matrix of dimension 2 or 4.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn new(dim: usize, entries: Vec<C64>) -> Result<Self> {
        check_dim(dim)?;
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: entries.len(),
            });
        }
        Ok(Self { dim, data: entries })
    }

    pub fn from_real(dim: usize, entries: &[f64]) -> Result<Self> {
        Self::new(dim, entries.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn zeros(dim: usize) -> Self {
        check_dim(dim).expect("dimension must be 2 or 4");
        Self {
            dim,
            data: vec![ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        check_dim(diag.len())?;
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = C64::new(d, 0.0);
        }
        Ok(m)
    }

    /// `|v><v|` for a state vector of length 2 or 4.
    pub fn outer(v: &[C64]) -> Result<Self> {
        check_dim(v.len())?;
        let n = v.len();
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = v[i] * v[j].conj();
            }
        }
        Ok(m)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[C64] {
        &self.data
    }

    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn conj(&self) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn transpose(&self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out[(j, i)] = self[(i, j)];
            }
        }
        out
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|z| z * factor).collect(),
        }
    }

    pub fn scale_real(&self, factor: f64) -> Self {
        self.scale(C64::new(factor, 0.0))
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.dim == other.dim && self.max_abs_diff(other) <= tol
    }

    /// `max |m - m^dagger|` over entries.
    pub fn hermiticity_deviation(&self) -> f64 {
        let n = self.dim;
        let mut dev: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                dev = dev.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        dev
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_deviation() <= tol
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `tr(self * other)` without forming the product.
    pub fn trace_product(&self, other: &Self) -> C64 {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        let n = self.dim;
        let mut acc = ZERO;
        for i in 0..n {
            for k in 0..n {
                acc += self[(i, k)] * other[(k, i)];
            }
        }
        acc
    }

    /// Averages `m` and `m^dagger`, removing rounding asymmetry.
    pub fn hermitian_part(&self) -> Self {
        let adj = self.adjoint();
        let mut out = self.clone();
        for (o, a) in out.data.iter_mut().zip(&adj.data) {
            *o = (*o + a) * 0.5;
        }
        out
    }
}

fn check_dim(dim: usize) -> Result<()> {
    match dim {
        2 | 4 => Ok(()),
        other => Err(Error::UnsupportedDimension(other)),
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.dim + j]
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        let n = self.dim;
        let mut out = ComplexMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                for j in 0..n {
                    out[(i, j)] += a * rhs[(k, j)];
                }
            }
        }
        out
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        ComplexMatrix {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        ComplexMatrix {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{}) [", self.dim, self.dim)?;
        for i in 0..self.dim {
            write!(f, "  ")?;
            for j in 0..self.dim {
                let z = self[(i, j)];
                write!(f, "{:>10.6}{:+.6}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

pub fn pauli_x() -> ComplexMatrix {
    ComplexMatrix::new(2, vec![ZERO, ONE, ONE, ZERO]).unwrap()
}

pub fn pauli_y() -> ComplexMatrix {
    ComplexMatrix::new(2, vec![ZERO, -I, I, ZERO]).unwrap()
}

pub fn pauli_z() -> ComplexMatrix {
    ComplexMatrix::new(2, vec![ONE, ZERO, ZERO, -ONE]).unwrap()
}

/// `[sigma_x, sigma_y, sigma_z]`.
pub fn paulis() -> [ComplexMatrix; 3] {
    [pauli_x(), pauli_y(), pauli_z()]
}

/// Kronecker product of two 2×2 matrices.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    for m in [a, b] {
        if m.dim != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                found: m.dim,
            });
        }
    }
    let mut out = ComplexMatrix::zeros(4);
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    out[(2 * i + k, 2 * j + l)] = a[(i, j)] * b[(k, l)];
                }
            }
        }
    }
    Ok(out)
}

fn require_two_qubit(m: &ComplexMatrix) -> Result<()> {
    if m.dim != 4 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            found: m.dim,
        });
    }
    Ok(())
}

/// Traces out `subsystem`, returning the 2×2 operator on the other qubit.
pub fn partial_trace(m: &ComplexMatrix, subsystem: Subsystem) -> Result<ComplexMatrix> {
    require_two_qubit(m)?;
    let mut out = ComplexMatrix::zeros(2);
    for x in 0..2 {
        for y in 0..2 {
            out[(x, y)] = match subsystem {
                Subsystem::B => m[(2 * x, 2 * y)] + m[(2 * x + 1, 2 * y + 1)],
                Subsystem::A => m[(x, y)] + m[(2 + x, 2 + y)],
            };
        }
    }
    Ok(out)
}

/// Transposes the indices belonging to `subsystem` only.
pub fn partial_transpose(m: &ComplexMatrix, subsystem: Subsystem) -> Result<ComplexMatrix> {
    require_two_qubit(m)?;
    let mut out = ComplexMatrix::zeros(4);
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
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

/// Spectrum of a Hermitian matrix.
///
/// Eigenvalues are sorted in descending order and `eigenvectors` holds the
/// matching orthonormal eigenvectors as columns.
#[derive(Clone, Debug)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
}

impl EigenDecomposition {
    /// Column `k` of the eigenvector matrix.
    pub fn eigenvector(&self, k: usize) -> Vec<C64> {
        let n = self.eigenvectors.dim();
        (0..n).map(|i| self.eigenvectors[(i, k)]).collect()
    }

    /// `V f(Λ) V^dagger`.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let v = &self.eigenvectors;
        let n = v.dim();
        let mut out = ComplexMatrix::zeros(n);
        for (k, &lambda) in self.eigenvalues.iter().enumerate() {
            let w = f(lambda);
            if w == 0.0 {
                continue;
            }
            for i in 0..n {
                let vik = v[(i, k)] * w;
                for j in 0..n {
                    out[(i, j)] += vik * v[(j, k)].conj();
                }
            }
        }
        out
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.reconstruct_with(|x| x)
    }
}

/// Eigendecomposition of a Hermitian 2×2 or 4×4 matrix.
pub fn hermitian_eigen(m: &ComplexMatrix) -> Result<EigenDecomposition> {
    let deviation = m.hermiticity_deviation();
    if deviation > HERMITIAN_TOL {
        return Err(Error::NotHermitian { deviation });
    }
    let h = m.hermitian_part();
    let (values, vectors) = if h.dim == 2 {
        eigen_2x2(&h)
    } else {
        eigen_jacobi(h)
    };
    Ok(sort_descending(values, vectors))
}

/// Eigenvalues only, descending.
pub fn hermitian_eigenvalues(m: &ComplexMatrix) -> Result<Vec<f64>> {
    hermitian_eigen(m).map(|e| e.eigenvalues)
}

fn eigen_2x2(h: &ComplexMatrix) -> (Vec<f64>, ComplexMatrix) {
    let a = h[(0, 0)].re;
    let d = h[(1, 1)].re;
    let b = h[(0, 1)];
    let mean = 0.5 * (a + d);
    let half_gap = (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
    let values = vec![mean + half_gap, mean - half_gap];

    if b.norm() <= f64::MIN_POSITIVE {
        let vectors = if a >= d {
            ComplexMatrix::identity(2)
        } else {
            ComplexMatrix::new(2, vec![ZERO, ONE, ONE, ZERO]).unwrap()
        };
        return (values, vectors);
    }

    let mut vectors = ComplexMatrix::zeros(2);
    for (k, &lambda) in values.iter().enumerate() {
        // Two equivalent null vectors of (h - lambda); keep the better conditioned one.
        let u = [b, C64::new(lambda - a, 0.0)];
        let w = [C64::new(lambda - d, 0.0), b.conj()];
        let nu = (u[0].norm_sqr() + u[1].norm_sqr()).sqrt();
        let nw = (w[0].norm_sqr() + w[1].norm_sqr()).sqrt();
        let (v, norm) = if nu >= nw { (u, nu) } else { (w, nw) };
        vectors[(0, k)] = v[0] / norm;
        vectors[(1, k)] = v[1] / norm;
    }
    (values, vectors)
}

fn off_diagonal_norm(a: &ComplexMatrix) -> f64 {
    let n = a.dim;
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                acc += a[(i, j)].norm_sqr();
            }
        }
    }
    acc.sqrt()
}

fn eigen_jacobi(mut a: ComplexMatrix) -> (Vec<f64>, ComplexMatrix) {
    let n = a.dim;
    let mut v = ComplexMatrix::identity(n);

    for _ in 0..JACOBI_MAX_SWEEPS {
        if off_diagonal_norm(&a) < JACOBI_OFF_TOL {
            break;
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                let g = a[(p, q)];
                let abs_g = g.norm();
                if abs_g < 1e-300 {
                    continue;
                }
                // Phase the (p, q) element real, then apply a real Jacobi rotation.
                let phase = g.conj() / abs_g;
                let tau = (a[(q, q)].re - a[(p, p)].re) / (2.0 * abs_g);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let j_pp = C64::new(c, 0.0);
                let j_pq = C64::new(s, 0.0);
                let j_qp = phase * (-s);
                let j_qq = phase * c;

                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * j_pp + akq * j_qp;
                    a[(k, q)] = akp * j_pq + akq * j_qq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = j_pp.conj() * apk + j_qp.conj() * aqk;
                    a[(q, k)] = j_pq.conj() * apk + j_qq.conj() * aqk;
                }
                a[(p, q)] = ZERO;
                a[(q, p)] = ZERO;
                a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
                a[(q, q)] = C64::new(a[(q, q)].re, 0.0);

                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * j_pp + vkq * j_qp;
                    v[(k, q)] = vkp * j_pq + vkq * j_qq;
                }
            }
        }
    }

    let values = (0..n).map(|i| a[(i, i)].re).collect();
    (values, v)
}

fn sort_descending(values: Vec<f64>, vectors: ComplexMatrix) -> EigenDecomposition {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| values[j].total_cmp(&values[i]));
    let mut sorted = ComplexMatrix::zeros(n);
    for (new_col, &old_col) in order.iter().enumerate() {
        for row in 0..n {
            sorted[(row, new_col)] = vectors[(row, old_col)];
        }
    }
    EigenDecomposition {
        eigenvalues: order.iter().map(|&i| values[i]).collect(),
        eigenvectors: sorted,
    }
}

/// Eigendecomposition of a PSD matrix with small negative eigenvalues clamped to zero.
pub fn psd_eigen(m: &ComplexMatrix) -> Result<EigenDecomposition> {
    let mut eig = hermitian_eigen(m)?;
    let min = eig
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    if min < -PSD_ERROR {
        return Err(Error::NotPsd {
            min_eigenvalue: min,
        });
    }
    for lambda in &mut eig.eigenvalues {
        if *lambda < 0.0 {
            *lambda = 0.0;
        }
    }
    Ok(eig)
}

/// Principal square root of a positive semidefinite Hermitian matrix.
pub fn matrix_sqrt_psd(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let eig = psd_eigen(m)?;
    Ok(eig.reconstruct_with(f64::sqrt).hermitian_part())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn singlet() -> ComplexMatrix {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        ComplexMatrix::outer(&[ZERO, c(s, 0.0), c(-s, 0.0), ZERO]).unwrap()
    }

    fn check_decomposition(m: &ComplexMatrix, eig: &EigenDecomposition) {
        let v = &eig.eigenvectors;
        let n = m.dim();
        assert!((&v.adjoint() * v).approx_eq(&ComplexMatrix::identity(n), 1e-10));
        for k in 0..n {
            let vk = eig.eigenvector(k);
            for i in 0..n {
                let av: C64 = (0..n).map(|j| m[(i, j)] * vk[j]).sum();
                assert!((av - vk[i] * eig.eigenvalues[k]).norm() < 1e-10);
            }
        }
        assert!(eig.reconstruct().approx_eq(m, 1e-9));
        assert!(eig.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn identity_spectrum() {
        let eig = hermitian_eigen(&ComplexMatrix::identity(2)).unwrap();
        assert_eq!(eig.eigenvalues, vec![1.0, 1.0]);
        let eig = hermitian_eigen(&ComplexMatrix::identity(4)).unwrap();
        assert_eq!(eig.eigenvalues, vec![1.0; 4]);
    }

    #[test]
    fn pauli_spectra() {
        for p in paulis() {
            let eig = hermitian_eigen(&p).unwrap();
            assert!((eig.eigenvalues[0] - 1.0).abs() < 1e-15);
            assert!((eig.eigenvalues[1] + 1.0).abs() < 1e-15);
            check_decomposition(&p, &eig);
        }
        let eig = hermitian_eigen(&pauli_x()).unwrap();
        let plus = eig.eigenvector(0);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        // up to a global phase
        let overlap = plus[0].conj() * s + plus[1].conj() * s;
        assert!((overlap.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = ComplexMatrix::from_real(2, &[1.0, 2.0, 0.0, 1.0]).unwrap();
        assert!(matches!(
            hermitian_eigen(&m),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn kron_examples() {
        let id4 = kron(&ComplexMatrix::identity(2), &ComplexMatrix::identity(2)).unwrap();
        assert_eq!(id4, ComplexMatrix::identity(4));
        let zz = kron(&pauli_z(), &pauli_z()).unwrap();
        assert_eq!(
            zz,
            ComplexMatrix::from_diagonal(&[1.0, -1.0, -1.0, 1.0]).unwrap()
        );
        let x1 = kron(&pauli_x(), &ComplexMatrix::identity(2)).unwrap();
        let expected = ComplexMatrix::from_real(
            4,
            &[
                0.0, 0.0, 1.0, 0.0, //
                0.0, 0.0, 0.0, 1.0, //
                1.0, 0.0, 0.0, 0.0, //
                0.0, 1.0, 0.0, 0.0,
            ],
        )
        .unwrap();
        assert_eq!(x1, expected);
        assert!(matches!(
            kron(&x1, &pauli_x()),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn partial_trace_examples() {
        let r1 = ComplexMatrix::new(2, vec![c(0.7, 0.0), c(0.1, 0.2), c(0.1, -0.2), c(0.3, 0.0)])
            .unwrap();
        let r2 = ComplexMatrix::from_real(2, &[0.4, 0.0, 0.0, 0.6]).unwrap();
        let prod = kron(&r1, &r2).unwrap();
        assert!(partial_trace(&prod, Subsystem::B)
            .unwrap()
            .approx_eq(&r1, 1e-15));
        assert!(partial_trace(&prod, Subsystem::A)
            .unwrap()
            .approx_eq(&r2, 1e-15));

        let half = ComplexMatrix::identity(2).scale_real(0.5);
        assert!(partial_trace(&singlet(), Subsystem::A)
            .unwrap()
            .approx_eq(&half, 1e-15));
        let mixed = ComplexMatrix::identity(4).scale_real(0.25);
        assert!(partial_trace(&mixed, Subsystem::A)
            .unwrap()
            .approx_eq(&half, 1e-15));
        assert!(partial_trace(&half, Subsystem::A).is_err());
    }

    #[test]
    fn partial_transpose_examples() {
        let mixed = ComplexMatrix::identity(4).scale_real(0.25);
        assert_eq!(partial_transpose(&mixed, Subsystem::A).unwrap(), mixed);

        let pt = partial_transpose(&singlet(), Subsystem::A).unwrap();
        let eig = hermitian_eigen(&pt).unwrap();
        assert!((eig.eigenvalues[3] + 0.5).abs() < 1e-12);

        let r1 = ComplexMatrix::new(2, vec![c(0.5, 0.0), c(0.2, 0.3), c(0.2, -0.3), c(0.5, 0.0)])
            .unwrap();
        let prod = kron(&r1, &r1).unwrap();
        let eig = hermitian_eigen(&partial_transpose(&prod, Subsystem::A).unwrap()).unwrap();
        assert!(eig.eigenvalues[3] > -1e-12);
    }

    #[test]
    fn sqrt_examples() {
        let id = ComplexMatrix::identity(4);
        assert!(matrix_sqrt_psd(&id).unwrap().approx_eq(&id, 1e-14));
        let d = ComplexMatrix::from_diagonal(&[4.0, 1.0, 0.0, 0.0]).unwrap();
        let expected = ComplexMatrix::from_diagonal(&[2.0, 1.0, 0.0, 0.0]).unwrap();
        assert!(matrix_sqrt_psd(&d).unwrap().approx_eq(&expected, 1e-14));
        let neg = ComplexMatrix::from_diagonal(&[1.0, -1e-3, 0.0, 0.0]).unwrap();
        assert!(matches!(matrix_sqrt_psd(&neg), Err(Error::NotPsd { .. })));
        let noisy = ComplexMatrix::from_diagonal(&[1.0, -1e-11, 0.0, 0.0]).unwrap();
        assert!(matrix_sqrt_psd(&noisy).is_ok());
    }

    #[test]
    fn jacobi_handles_degenerate_complex_input() {
        // sigma_y (x) sigma_y has a doubly degenerate spectrum {1, 1, -1, -1}.
        let yy = kron(&pauli_y(), &pauli_y()).unwrap();
        let eig = hermitian_eigen(&yy).unwrap();
        check_decomposition(&yy, &eig);
        let xy = kron(&pauli_x(), &pauli_y()).unwrap();
        let m = &(&xy + &singlet()) + &ComplexMatrix::identity(4);
        check_decomposition(&m, &hermitian_eigen(&m).unwrap());
    }

    fn arb_matrix(dim: usize) -> impl Strategy<Value = ComplexMatrix> {
        prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), dim * dim).prop_map(move |v| {
            ComplexMatrix::new(dim, v.into_iter().map(|(re, im)| c(re, im)).collect()).unwrap()
        })
    }

    fn gram(g: &ComplexMatrix) -> ComplexMatrix {
        (g * &g.adjoint()).hermitian_part()
    }

    proptest! {
        #[test]
        fn eigen_reconstructs_hermitian(g in arb_matrix(4)) {
            let h = (&g + &g.adjoint()).scale_real(0.5);
            let eig = hermitian_eigen(&h).unwrap();
            check_decomposition(&h, &eig);
            let sum: f64 = eig.eigenvalues.iter().sum();
            prop_assert!((sum - h.trace().re).abs() < 1e-9);
        }

        #[test]
        fn eigen_2x2_reconstructs(g in arb_matrix(2)) {
            let h = (&g + &g.adjoint()).scale_real(0.5);
            check_decomposition(&h, &hermitian_eigen(&h).unwrap());
        }

        #[test]
        fn sqrt_squares_back(g in arb_matrix(4)) {
            let p = gram(&g);
            let s = matrix_sqrt_psd(&p).unwrap();
            prop_assert!((&s * &s).approx_eq(&p, 1e-8));
            prop_assert!(hermitian_eigen(&s).unwrap().eigenvalues[3] > -1e-10);
        }

        #[test]
        fn rank_deficient_sqrt(v in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 4)) {
            let v: Vec<C64> = v.into_iter().map(|(a, b)| c(a, b)).collect();
            let p = ComplexMatrix::outer(&v).unwrap();
            let s = matrix_sqrt_psd(&p).unwrap();
            prop_assert!((&s * &s).approx_eq(&p, 1e-8));
        }

        #[test]
        fn kron_trace_factorizes(a in arb_matrix(2), b in arb_matrix(2)) {
            let k = kron(&a, &b).unwrap();
            prop_assert!((k.trace() - a.trace() * b.trace()).norm() < 1e-12);
        }

        #[test]
        fn partial_maps_preserve_trace_and_involute(g in arb_matrix(4)) {
            for sub in [Subsystem::A, Subsystem::B] {
                let pt = partial_trace(&g, sub).unwrap();
                prop_assert!((pt.trace() - g.trace()).norm() < 1e-12);
                let t = partial_transpose(&g, sub).unwrap();
                prop_assert_eq!(&partial_transpose(&t, sub).unwrap(), &g);
            }
            let h = gram(&g);
            prop_assert!(partial_transpose(&h, Subsystem::A).unwrap().is_hermitian(1e-15));
        }
    }
}
