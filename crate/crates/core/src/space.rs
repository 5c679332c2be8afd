//! The semi-Hilbert space `(C^n, <A., .>)` induced by a positive
//! semidefinite seed matrix `A`, and operators registered against it.
//!
//! The range of `A^{1/2}` is represented by coordinates in `C^r` through the
//! map `C = Sigma_r^{1/2} U_r*`, so that `||C x||^2 = <Ax, x>`. An A-bounded
//! operator `T` then acts on coordinates as `tilde(T) = C T U_r Sigma_r^{-1/2}`,
//! which carries the A-seminorm, the A-numerical radius and the A-Crawford
//! number of `T` to the ordinary ones.

use crate::error::{Error, Result};
use crate::linalg::{
    c64, ensure_square, spectral_norm, Complex64, ComplexMatrix, ComplexVector, EigenData,
    PsdFactors, Tolerances,
};

/// Block layout for operators on the doubled space.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Layout {
    /// `[[T, 0], [0, S]]`
    Diagonal,
    /// `[[0, T], [S, 0]]`
    Antidiagonal,
}

/// An `n x n` matrix together with membership facts computed once against
/// the space it was registered with.
#[derive(Clone, Debug)]
pub struct SemiOperator {
    matrix: ComplexMatrix,
    admits_adjoint: bool,
    a_bounded: bool,
    space_id: u64,
}

impl SemiOperator {
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    /// `T` is in `B_A(H)`, i.e. `R(T*A) ⊆ R(A)`.
    pub fn admits_adjoint(&self) -> bool {
        self.admits_adjoint
    }

    /// `T` is A-bounded, i.e. `T(N(A)) ⊆ N(A)`.
    pub fn is_a_bounded(&self) -> bool {
        self.a_bounded
    }

    pub fn space_id(&self) -> u64 {
        self.space_id
    }
}

#[derive(Clone, Debug)]
pub struct SemiHilbertSpace {
    id: u64,
    base: Option<u64>,
    tol: Tolerances,
    a: ComplexMatrix,
    factors: PsdFactors,
    sqrt_a: ComplexMatrix,
    pinv_a: ComplexMatrix,
    pinv_sqrt_a: ComplexMatrix,
    projection: ComplexMatrix,
    coord_map: ComplexMatrix,
    coord_inverse: ComplexMatrix,
}

/// Builds the space induced by `a` with default tolerances and the given
/// rank cutoff.
pub fn build_space(a: &ComplexMatrix, cutoff: f64) -> Result<SemiHilbertSpace> {
    SemiHilbertSpace::new(
        a,
        Tolerances {
            cutoff,
            ..Tolerances::default()
        },
    )
}

impl SemiHilbertSpace {
    pub fn new(a: &ComplexMatrix, tol: Tolerances) -> Result<Self> {
        ensure_square(a)?;
        if !(tol.cutoff >= 0.0 && tol.cutoff < 1.0) {
            return Err(Error::BadConfig(format!("cutoff {} outside [0, 1)", tol.cutoff)));
        }
        let factors = PsdFactors::new(a, &tol)?;
        let a = crate::linalg::hermitian_part(a);
        Ok(Self::from_factors(a, factors, tol, None))
    }

    fn from_factors(a: ComplexMatrix, factors: PsdFactors, tol: Tolerances, base: Option<u64>) -> Self {
        let u_r = factors.range_basis();
        let values = factors.range_values();
        let n = factors.dim();
        let r = factors.rank;
        let coord_map = ComplexMatrix::from_fn(r, n, |i, j| u_r[(j, i)].conj() * values[i].sqrt());
        let coord_inverse = ComplexMatrix::from_fn(n, r, |i, j| u_r[(i, j)] / values[j].sqrt());
        let id = space_id(&a, tol.cutoff, base);
        Self {
            id,
            base,
            sqrt_a: factors.square_root(),
            pinv_a: factors.pseudo_inverse(),
            pinv_sqrt_a: factors.pseudo_inverse_sqrt(),
            projection: factors.range_projection(),
            coord_map,
            coord_inverse,
            a,
            factors,
            tol,
        }
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn dim(&self) -> usize {
        self.factors.dim()
    }

    pub fn rank(&self) -> usize {
        self.factors.rank
    }

    pub fn cutoff(&self) -> f64 {
        self.tol.cutoff
    }

    pub fn tolerances(&self) -> &Tolerances {
        &self.tol
    }

    /// The (symmetrized) seed matrix.
    pub fn a(&self) -> &ComplexMatrix {
        &self.a
    }

    pub fn eigen(&self) -> &EigenData {
        &self.factors.eigen
    }

    /// `||A||_2`, the largest eigenvalue of `A`.
    pub fn a_norm(&self) -> f64 {
        self.factors.lambda_max
    }

    /// Ratio of the largest to the smallest kept eigenvalue (1 when `r = 0`).
    pub fn range_condition(&self) -> f64 {
        match self.factors.range_values().first() {
            Some(&smallest) => self.factors.lambda_max / smallest,
            None => 1.0,
        }
    }

    pub fn sqrt_a(&self) -> &ComplexMatrix {
        &self.sqrt_a
    }

    pub fn pinv_a(&self) -> &ComplexMatrix {
        &self.pinv_a
    }

    pub fn pinv_sqrt_a(&self) -> &ComplexMatrix {
        &self.pinv_sqrt_a
    }

    /// Orthogonal projection onto `R(A)`.
    pub fn range_projection(&self) -> &ComplexMatrix {
        &self.projection
    }

    /// `r x n` coordinate map `Sigma_r^{1/2} U_r*` onto `R(A^{1/2})`.
    pub fn coord_map(&self) -> &ComplexMatrix {
        &self.coord_map
    }

    /// `n x r` right inverse `U_r Sigma_r^{-1/2}` of the coordinate map.
    pub fn coord_inverse(&self) -> &ComplexMatrix {
        &self.coord_inverse
    }

    /// `n x r` orthonormal basis of `R(A)`.
    pub fn range_basis(&self) -> ComplexMatrix {
        self.factors.range_basis()
    }

    /// `n x (n-r)` orthonormal basis of `N(A)`.
    pub fn null_basis(&self) -> ComplexMatrix {
        self.factors.null_basis()
    }

    /// Positive eigenvalues of `A` kept by the cutoff (ascending).
    pub fn range_values(&self) -> &[f64] {
        self.factors.range_values()
    }

    fn check_vector(&self, x: &ComplexVector) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: format!("vector of length {}", self.dim()),
                found: format!("length {}", x.len()),
            });
        }
        Ok(())
    }

    fn check_square(&self, t: &ComplexMatrix) -> Result<()> {
        let n = self.dim();
        if t.nrows() != n || t.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: format!("{n}x{n}"),
                found: format!("{}x{}", t.nrows(), t.ncols()),
            });
        }
        Ok(())
    }

    fn check_owned(&self, op: &SemiOperator) -> Result<()> {
        if op.space_id != self.id {
            return Err(Error::SpaceMismatch);
        }
        Ok(())
    }

    /// `<x, y>_A = <Ax, y> = y* A x`.
    pub fn a_inner(&self, x: &ComplexVector, y: &ComplexVector) -> Result<Complex64> {
        self.check_vector(x)?;
        self.check_vector(y)?;
        Ok(y.dotc(&(&self.a * x)))
    }

    /// `||x||_A`, computed in coordinates so it is exactly zero on `N(A)`.
    pub fn a_vec_norm(&self, x: &ComplexVector) -> Result<f64> {
        self.check_vector(x)?;
        Ok((&self.coord_map * x).norm())
    }

    /// Coordinates `C x` of a vector in `R(A^{1/2})`.
    pub fn coordinates(&self, x: &ComplexVector) -> Result<ComplexVector> {
        self.check_vector(x)?;
        Ok(&self.coord_map * x)
    }

    fn complement_projection(&self) -> ComplexMatrix {
        ComplexMatrix::identity(self.dim(), self.dim()) - &self.projection
    }

    /// Residual `||(I-P) T* A||_2` of the range inclusion `R(T*A) ⊆ R(A)`.
    pub fn adjoint_residual(&self, t: &ComplexMatrix) -> Result<f64> {
        self.check_square(t)?;
        Ok(spectral_norm(&(self.complement_projection() * t.adjoint() * &self.a)))
    }

    /// Residual `||C T (I-P)||_2` of the inclusion `T(N(A)) ⊆ N(A)`.
    pub fn boundedness_residual(&self, t: &ComplexMatrix) -> Result<f64> {
        self.check_square(t)?;
        Ok(spectral_norm(&(&self.coord_map * t * self.complement_projection())))
    }

    pub fn admits_a_adjoint(&self, t: &ComplexMatrix) -> Result<bool> {
        let scale = 1.0 + self.a_norm() * spectral_norm(t);
        Ok(self.adjoint_residual(t)? <= self.tol.fact_tol * scale)
    }

    pub fn is_a_bounded(&self, t: &ComplexMatrix) -> Result<bool> {
        let scale = 1.0 + self.a_norm().sqrt() * spectral_norm(t);
        Ok(self.boundedness_residual(t)? <= self.tol.fact_tol * scale)
    }

    /// Validates `t` against this space and caches its membership facts.
    pub fn register(&self, t: ComplexMatrix) -> Result<SemiOperator> {
        let admits_adjoint = self.admits_a_adjoint(&t)?;
        let a_bounded = self.is_a_bounded(&t)?;
        Ok(SemiOperator {
            matrix: t,
            admits_adjoint,
            a_bounded,
            space_id: self.id,
        })
    }

    /// Registers an operator known to be admissible (for instance a product
    /// of admissible operators) without re-testing membership.
    pub(crate) fn register_admissible(&self, t: ComplexMatrix) -> SemiOperator {
        SemiOperator {
            matrix: t,
            admits_adjoint: true,
            a_bounded: true,
            space_id: self.id,
        }
    }

    /// The A-adjoint `A† T* A`, the reduced solution of `AX = T*A`.
    pub fn sharp(&self, op: &SemiOperator) -> Result<ComplexMatrix> {
        self.check_owned(op)?;
        if !op.admits_adjoint {
            return Err(Error::NotInBA);
        }
        Ok(&self.pinv_a * op.matrix.adjoint() * &self.a)
    }

    /// The operator induced on `R(A^{1/2})`, in coordinates (`r x r`).
    pub fn tilde(&self, op: &SemiOperator) -> Result<ComplexMatrix> {
        self.check_owned(op)?;
        if !op.a_bounded {
            return Err(Error::NotABounded);
        }
        Ok(&self.coord_map * &op.matrix * &self.coord_inverse)
    }

    /// `Re_A(T) = (T + T^#)/2`.
    pub fn re_part(&self, op: &SemiOperator) -> Result<ComplexMatrix> {
        let s = self.sharp(op)?;
        Ok((&op.matrix + s).scale(0.5))
    }

    /// `Im_A(T) = (T - T^#)/(2i)`.
    pub fn im_part(&self, op: &SemiOperator) -> Result<ComplexMatrix> {
        let s = self.sharp(op)?;
        Ok((&op.matrix - s) * c64(0.0, -0.5))
    }

    fn selfadjoint_scale(&self, t: &ComplexMatrix) -> f64 {
        1.0 + self.a_norm() * spectral_norm(t)
    }

    /// `AT` is Hermitian (within `fact_tol`).
    pub fn is_a_selfadjoint(&self, t: &ComplexMatrix) -> bool {
        if self.check_square(t).is_err() {
            return false;
        }
        let at = &self.a * t;
        spectral_norm(&(&at - at.adjoint())) <= self.tol.fact_tol * self.selfadjoint_scale(t)
    }

    /// `AT` is Hermitian positive semidefinite (within tolerances).
    pub fn is_a_positive(&self, t: &ComplexMatrix) -> bool {
        if !self.is_a_selfadjoint(t) {
            return false;
        }
        let at = crate::linalg::hermitian_part(&(&self.a * t));
        let mut ws = crate::linalg::EigenWorkspace::default();
        match ws.eigenvalues_of(&at) {
            Ok(vals) => {
                let min = vals.first().copied().unwrap_or(0.0);
                min >= -self.tol.psd_tol * self.selfadjoint_scale(t)
            }
            Err(_) => false,
        }
    }

    /// The doubled space induced by `diag(A, A)` on `C^{2n}`.
    ///
    /// Its eigen-data is assembled from this space's decomposition, so its
    /// rank is exactly `2r`.
    pub fn double(&self) -> SemiHilbertSpace {
        let n = self.dim();
        let eig = self.eigen();
        let mut values = Vec::with_capacity(2 * n);
        let mut vectors = ComplexMatrix::zeros(2 * n, 2 * n);
        for i in 0..n {
            for copy in 0..2 {
                let col = 2 * i + copy;
                values.push(eig.values[i]);
                for row in 0..n {
                    vectors[(copy * n + row, col)] = eig.vectors[(row, i)];
                }
            }
        }
        let mut a2 = ComplexMatrix::zeros(2 * n, 2 * n);
        a2.view_mut((0, 0), (n, n)).copy_from(&self.a);
        a2.view_mut((n, n), (n, n)).copy_from(&self.a);
        let factors = PsdFactors::from_eigen(EigenData { values, vectors }, &self.tol)
            .expect("doubling preserves positivity");
        SemiHilbertSpace::from_factors(a2, factors, self.tol, Some(self.id))
    }

    /// Whether this space was produced by [`SemiHilbertSpace::double`] on `base`.
    pub fn is_double_of(&self, base: &SemiHilbertSpace) -> bool {
        self.base == Some(base.id)
    }

    /// Builds the 2x2 block operator of `t` and `s` (registered on the base
    /// space) on this doubled space.
    pub fn block2(&self, t: &SemiOperator, s: &SemiOperator, layout: Layout) -> Result<SemiOperator> {
        let base = self.base.ok_or_else(|| Error::DimensionMismatch {
            expected: "a doubled space".into(),
            found: "a base space".into(),
        })?;
        if t.space_id != base || s.space_id != base {
            return Err(Error::SpaceMismatch);
        }
        let n = t.matrix.nrows();
        if 2 * n != self.dim() || s.matrix.nrows() != n {
            return Err(Error::DimensionMismatch {
                expected: format!("{}x{} blocks", self.dim() / 2, self.dim() / 2),
                found: format!("{n}x{n}"),
            });
        }
        let mut m = ComplexMatrix::zeros(2 * n, 2 * n);
        match layout {
            Layout::Diagonal => {
                m.view_mut((0, 0), (n, n)).copy_from(&t.matrix);
                m.view_mut((n, n), (n, n)).copy_from(&s.matrix);
            }
            Layout::Antidiagonal => {
                m.view_mut((0, n), (n, n)).copy_from(&t.matrix);
                m.view_mut((n, 0), (n, n)).copy_from(&s.matrix);
            }
        }
        self.register(m)
    }
}

fn space_id(a: &ComplexMatrix, cutoff: f64, base: Option<u64>) -> u64 {
    // FNV-1a over the raw bits.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    let mut feed = |bits: u64| {
        for byte in bits.to_le_bytes() {
            h ^= byte as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    };
    feed(a.nrows() as u64);
    for z in a.iter() {
        feed(z.re.to_bits());
        feed(z.im.to_bits());
    }
    feed(cutoff.to_bits());
    feed(base.map_or(0, |b| b ^ 0x9e37_79b9_7f4a_7c15));
    h
}
