//! Dense complex linear algebra: Hermitian eigensolvers, PSD factors and
//! the spectral norm.
//!
//! Two eigensolvers are provided. [`hermitian_eigendecomposition`] is a
//! cyclic complex Jacobi method and returns eigenvectors; it is used for the
//! seed operator and wherever eigenvectors are needed. [`EigenWorkspace`]
//! computes eigenvalues only (Householder tridiagonalization followed by
//! implicit QL) without allocating, and backs the numerical-range grids.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Complex64 = nalgebra::Complex<f64>;
pub type ComplexMatrix = DMatrix<Complex64>;
pub type ComplexVector = DVector<Complex64>;

const MAX_JACOBI_SWEEPS: usize = 100;
const MAX_QL_ITERATIONS: usize = 60;

/// Numerical thresholds shared by the kernel and the semi-Hilbert space.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Eigenvalues `<= cutoff * lambda_max` are treated as exactly zero.
    pub cutoff: f64,
    /// Relative asymmetry accepted (and averaged away) for Hermitian input.
    pub hermitian_tol: f64,
    /// Relative negative eigenvalue accepted for PSD input.
    pub psd_tol: f64,
    /// Relative threshold for membership facts (range inclusions).
    pub fact_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            cutoff: 1e-10,
            hermitian_tol: 1e-8,
            psd_tol: 1e-8,
            fact_tol: 1e-8,
        }
    }
}

/// Eigenvalues in ascending order with a unitary matrix of eigenvectors
/// (column `i` belongs to `values[i]`).
#[derive(Clone, Debug)]
pub struct EigenData {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Builds a complex matrix from row-major real parts.
pub fn real_matrix<const C: usize>(rows: &[[f64; C]]) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows.len(), C, |i, j| c64(rows[i][j], 0.0))
}

pub fn max_abs(m: &ComplexMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// `max |m_ij - conj(m_ji)|`.
pub fn asymmetry(m: &ComplexMatrix) -> f64 {
    let n = m.nrows();
    let mut worst: f64 = 0.0;
    for j in 0..n {
        for i in 0..=j {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// `(M + M*) / 2`.
pub fn hermitian_part(m: &ComplexMatrix) -> ComplexMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// `(M - M*) / (2i)`.
pub fn skew_hermitian_part(m: &ComplexMatrix) -> ComplexMatrix {
    (m - m.adjoint()) * c64(0.0, -0.5)
}

pub(crate) fn ensure_square(m: &ComplexMatrix) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::NonSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    Ok(m.nrows())
}

/// Checks the Hermitian tolerance and returns the averaged matrix `(M+M*)/2`.
pub fn symmetrized(m: &ComplexMatrix, hermitian_tol: f64) -> Result<ComplexMatrix> {
    ensure_square(m)?;
    let asym = asymmetry(m);
    let allowed = hermitian_tol * (1.0 + max_abs(m));
    if asym > allowed {
        return Err(Error::NotHermitian {
            asymmetry: asym,
            allowed,
        });
    }
    Ok(hermitian_part(m))
}

/// Full eigendecomposition of a Hermitian matrix.
pub fn hermitian_eigendecomposition(m: &ComplexMatrix, hermitian_tol: f64) -> Result<EigenData> {
    let h = symmetrized(m, hermitian_tol)?;
    eigh_unchecked(&h)
}

/// Eigendecomposition of a matrix already known to be Hermitian.
pub(crate) fn eigh_unchecked(h: &ComplexMatrix) -> Result<EigenData> {
    let n = h.nrows();
    let mut a: Vec<Complex64> = h.as_slice().to_vec();
    let mut v = vec![Complex64::default(); n * n];
    for i in 0..n {
        v[i + i * n] = c64(1.0, 0.0);
    }
    jacobi(n, &mut a, &mut v)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i + i * n].re.total_cmp(&a[j + j * n].re));
    let values = order.iter().map(|&i| a[i + i * n].re).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |r, c| v[r + order[c] * n]);
    Ok(EigenData { values, vectors })
}

/// Eigenvalues (ascending) of a Hermitian matrix.
pub fn hermitian_eigenvalues(m: &ComplexMatrix, hermitian_tol: f64) -> Result<Vec<f64>> {
    let h = symmetrized(m, hermitian_tol)?;
    let mut ws = EigenWorkspace::default();
    Ok(ws.eigenvalues_of(&h)?.to_vec())
}

/// Cyclic Jacobi on a column-major Hermitian buffer; accumulates rotations
/// into `v` (column-major, initialized by the caller).
fn jacobi(n: usize, a: &mut [Complex64], v: &mut [Complex64]) -> Result<()> {
    let at = |i: usize, j: usize| i + j * n;
    for _ in 0..MAX_JACOBI_SWEEPS {
        let mut off = 0.0;
        let mut total = 0.0;
        for j in 0..n {
            for i in 0..n {
                let s = a[at(i, j)].norm_sqr();
                total += s;
                if i != j {
                    off += s;
                }
            }
        }
        if off == 0.0 || off.sqrt() <= f64::EPSILON * total.sqrt() {
            return Ok(());
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[at(p, q)];
                let b = apq.norm();
                if b == 0.0 {
                    continue;
                }
                let app = a[at(p, p)].re;
                let aqq = a[at(q, q)].re;
                let tau = (aqq - app) / (2.0 * b);
                let t = if tau == 0.0 {
                    1.0
                } else {
                    tau.signum() / (tau.abs() + tau.hypot(1.0))
                };
                let c = 1.0 / t.hypot(1.0);
                let s = t * c;
                let e = apq / b;
                let ec = e.conj();

                for k in 0..n {
                    let akp = a[at(k, p)];
                    let akq = a[at(k, q)];
                    a[at(k, p)] = akp * c - ec * akq * s;
                    a[at(k, q)] = akp * s + ec * akq * c;
                }
                for k in 0..n {
                    let apk = a[at(p, k)];
                    let aqk = a[at(q, k)];
                    a[at(p, k)] = apk * c - e * aqk * s;
                    a[at(q, k)] = apk * s + e * aqk * c;
                }
                a[at(p, p)] = c64(app - t * b, 0.0);
                a[at(q, q)] = c64(aqq + t * b, 0.0);
                a[at(p, q)] = Complex64::default();
                a[at(q, p)] = Complex64::default();

                for k in 0..n {
                    let vkp = v[at(k, p)];
                    let vkq = v[at(k, q)];
                    v[at(k, p)] = vkp * c - ec * vkq * s;
                    v[at(k, q)] = vkp * s + ec * vkq * c;
                }
            }
        }
    }
    Err(Error::NoConvergence {
        iterations: MAX_JACOBI_SWEEPS,
    })
}

/// Reusable buffers for eigenvalue-only solves of small Hermitian matrices.
#[derive(Default, Debug, Clone)]
pub struct EigenWorkspace {
    a: Vec<Complex64>,
    v: Vec<Complex64>,
    p: Vec<Complex64>,
    d: Vec<f64>,
    e: Vec<f64>,
}

impl EigenWorkspace {
    /// Row-major `n x n` scratch buffer to be filled with a Hermitian matrix
    /// before calling [`EigenWorkspace::solve`].
    pub fn buffer(&mut self, n: usize) -> &mut [Complex64] {
        self.a.clear();
        self.a.resize(n * n, Complex64::default());
        &mut self.a
    }

    /// Eigenvalues (ascending) of a Hermitian matrix, no symmetry check.
    pub fn eigenvalues_of(&mut self, h: &ComplexMatrix) -> Result<&[f64]> {
        let n = h.nrows();
        // Column-major storage is the row-major storage of the conjugate,
        // which has the same spectrum.
        self.buffer(n).copy_from_slice(h.as_slice());
        self.solve(n)
    }

    /// Eigenvalues (ascending) of the matrix currently in the buffer.
    pub fn solve(&mut self, n: usize) -> Result<&[f64]> {
        self.d.clear();
        match n {
            0 => {}
            1 => self.d.push(self.a[0].re),
            2 => {
                let a = self.a[0].re;
                let d = self.a[3].re;
                let b = self.a[2].norm();
                let mean = 0.5 * (a + d);
                let r = (0.5 * (a - d)).hypot(b);
                self.d.push(mean - r);
                self.d.push(mean + r);
            }
            _ => {
                self.tridiagonalize(n);
                tql_eigenvalues(&mut self.d, &mut self.e)?;
                self.d.sort_by(f64::total_cmp);
            }
        }
        Ok(&self.d)
    }

    fn tridiagonalize(&mut self, n: usize) {
        let a = &mut self.a;
        self.v.resize(n, Complex64::default());
        self.p.resize(n, Complex64::default());
        self.d.resize(n, 0.0);
        self.e.clear();
        self.e.resize(n, 0.0);
        let at = |i: usize, j: usize| i * n + j;

        for k in 0..n - 2 {
            let m = n - k - 1;
            let norm = (k + 1..n).map(|i| a[at(i, k)].norm_sqr()).sum::<f64>().sqrt();
            if norm == 0.0 {
                continue;
            }
            let x0 = a[at(k + 1, k)];
            let phase = if x0.norm() > 0.0 { x0 / x0.norm() } else { c64(1.0, 0.0) };
            let alpha = -phase * norm;

            let v = &mut self.v[..m];
            v[0] = x0 - alpha;
            for i in 1..m {
                v[i] = a[at(k + 1 + i, k)];
            }
            let vn = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            for z in v.iter_mut() {
                *z /= vn;
            }

            let p = &mut self.p[..m];
            for i in 0..m {
                let row = k + 1 + i;
                let mut acc = Complex64::default();
                for j in 0..m {
                    acc += a[at(row, k + 1 + j)] * v[j];
                }
                p[i] = acc;
            }
            let kk: f64 = v.iter().zip(p.iter()).map(|(vi, pi)| (vi.conj() * pi).re).sum();
            for i in 0..m {
                p[i] -= v[i] * kk;
            }
            for i in 0..m {
                for j in 0..m {
                    let upd = v[i] * p[j].conj() + p[i] * v[j].conj();
                    a[at(k + 1 + i, k + 1 + j)] -= upd * 2.0;
                }
            }
            self.e[k] = norm;
        }
        for i in 0..n {
            self.d[i] = a[at(i, i)].re;
        }
        self.e[n - 2] = a[at(n - 1, n - 2)].norm();
        self.e[n - 1] = 0.0;
    }
}

/// Implicit QL on a real symmetric tridiagonal matrix (`e[i]` couples
/// `i` and `i+1`); eigenvalues are left in `d`.
fn tql_eigenvalues(d: &mut [f64], e: &mut [f64]) -> Result<()> {
    let n = d.len();
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > MAX_QL_ITERATIONS {
                return Err(Error::NoConvergence {
                    iterations: MAX_QL_ITERATIONS,
                });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = (g * g + 1.0).sqrt();
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut deflated = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = (f * f + g * g).sqrt();
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

/// Largest singular value, `sqrt(lambda_max(M* M))`.
pub fn spectral_norm(m: &ComplexMatrix) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    let gram = if m.nrows() >= m.ncols() {
        m.ad_mul(m)
    } else {
        m * m.adjoint()
    };
    let mut ws = EigenWorkspace::default();
    match ws.eigenvalues_of(&gram) {
        Ok(vals) => vals.last().copied().unwrap_or(0.0).max(0.0).sqrt(),
        // The Gram matrix is tiny and Hermitian; fall back to Jacobi.
        Err(_) => eigh_unchecked(&gram)
            .map(|e| e.values.last().copied().unwrap_or(0.0).max(0.0).sqrt())
            .unwrap_or(f64::NAN),
    }
}

/// Eigen-data of a PSD matrix together with its numerical rank. All PSD
/// factors are derived from this single decomposition.
#[derive(Clone, Debug)]
pub struct PsdFactors {
    pub eigen: EigenData,
    pub lambda_max: f64,
    pub rank: usize,
}

impl PsdFactors {
    pub fn new(a: &ComplexMatrix, tol: &Tolerances) -> Result<Self> {
        let eigen = hermitian_eigendecomposition(a, tol.hermitian_tol)?;
        Self::from_eigen(eigen, tol)
    }

    pub fn from_eigen(eigen: EigenData, tol: &Tolerances) -> Result<Self> {
        let lambda_max = eigen.values.last().copied().unwrap_or(0.0).max(0.0);
        if let Some(&lambda_min) = eigen.values.first() {
            let allowed = -tol.psd_tol * lambda_max;
            if lambda_min < allowed {
                return Err(Error::NotPsd {
                    min_eigenvalue: lambda_min,
                    allowed,
                });
            }
        }
        let threshold = tol.cutoff * lambda_max;
        let rank = eigen.values.iter().filter(|&&l| l > threshold && l > 0.0).count();
        Ok(Self {
            eigen,
            lambda_max,
            rank,
        })
    }

    pub fn dim(&self) -> usize {
        self.eigen.values.len()
    }

    /// Positive eigenvalues kept by the cutoff (ascending).
    pub fn range_values(&self) -> &[f64] {
        &self.eigen.values[self.dim() - self.rank..]
    }

    /// `n x r` orthonormal basis of the numerical range.
    pub fn range_basis(&self) -> ComplexMatrix {
        let n = self.dim();
        self.eigen.vectors.columns(n - self.rank, self.rank).into_owned()
    }

    /// `n x (n-r)` orthonormal basis of the numerical null space.
    pub fn null_basis(&self) -> ComplexMatrix {
        self.eigen.vectors.columns(0, self.dim() - self.rank).into_owned()
    }

    /// `U_r f(Sigma_r) U_r*`.
    pub fn spectral_function(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let u = self.range_basis();
        let scaled = ComplexMatrix::from_fn(u.nrows(), u.ncols(), |i, j| {
            u[(i, j)] * f(self.range_values()[j])
        });
        scaled * u.adjoint()
    }

    pub fn pseudo_inverse(&self) -> ComplexMatrix {
        self.spectral_function(|l| 1.0 / l)
    }

    pub fn square_root(&self) -> ComplexMatrix {
        self.spectral_function(f64::sqrt)
    }

    pub fn pseudo_inverse_sqrt(&self) -> ComplexMatrix {
        self.spectral_function(|l| 1.0 / l.sqrt())
    }

    pub fn range_projection(&self) -> ComplexMatrix {
        self.spectral_function(|_| 1.0)
    }
}

/// Moore-Penrose inverse of a Hermitian PSD matrix.
pub fn psd_pseudo_inverse(a: &ComplexMatrix, cutoff: f64) -> Result<ComplexMatrix> {
    let tol = Tolerances {
        cutoff,
        ..Tolerances::default()
    };
    Ok(PsdFactors::new(a, &tol)?.pseudo_inverse())
}

/// Hermitian PSD square root of a Hermitian PSD matrix.
pub fn psd_square_root(a: &ComplexMatrix, cutoff: f64) -> Result<ComplexMatrix> {
    let tol = Tolerances {
        cutoff,
        ..Tolerances::default()
    };
    Ok(PsdFactors::new(a, &tol)?.square_root())
}
