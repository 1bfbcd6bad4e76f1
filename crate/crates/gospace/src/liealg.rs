//! Compact matrix Lie algebras realized as real skew-symmetric matrices.
//!
//! Families: `so(n)` on R^n, `su(n)`/`u(n)` on R^{2n} through the block
//! embedding `P + iQ -> [[P, -Q], [Q, P]]`, and `sp(n)` on R^{4n} through
//! quaternion left-multiplication blocks. Every family comes with an
//! orthonormal basis for the invariant product `<X, Y> = -tr(XY)` of the
//! realized matrices, which is positive definite and Ad-invariant.

use nalgebra::{DMatrix, DVector};

use crate::kernels::{self, RankDecision};
use crate::{Error, Result};

/// The supported classical families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
pub enum Family {
    So,
    Su,
    U,
    Sp,
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Family::So => write!(f, "so"),
            Family::Su => write!(f, "su"),
            Family::U => write!(f, "u"),
            Family::Sp => write!(f, "sp"),
        }
    }
}

/// Identity of a built algebra; used for element ownership checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
pub struct AlgebraId {
    pub family: Family,
    pub n: usize,
}

impl std::fmt::Display for AlgebraId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}({})", self.family, self.n)
    }
}

/// An element expressed in the orthonormal basis of its owner algebra.
#[derive(Debug, Clone)]
pub struct AlgebraElement {
    pub coeffs: DVector<f64>,
    pub owner: AlgebraId,
}

impl AlgebraElement {
    pub fn norm(&self) -> f64 {
        self.coeffs.norm()
    }
}

/// A compact Lie algebra with a fixed orthonormal basis of real
/// skew-symmetric matrices.
#[derive(Debug, Clone)]
pub struct LieAlgebraRep {
    id: AlgebraId,
    ambient_dim: usize,
    basis: Vec<DMatrix<f64>>,
}

/// `-tr(AB)` for realized matrices.
pub fn trace_form(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    debug_assert_eq!(a.ncols(), b.nrows());
    let mut sum = 0.0;
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            sum += a[(i, j)] * b[(j, i)];
        }
    }
    -sum
}

impl LieAlgebraRep {
    /// Build the algebra `family(n)`.
    pub fn new(family: Family, n: usize) -> Result<Self> {
        let ok = match family {
            Family::So | Family::U | Family::Sp => n >= 1,
            Family::Su => n >= 2,
        };
        if !ok {
            return Err(Error::UnsupportedAlgebra(format!(
                "{family}({n}): parameter out of range"
            )));
        }
        let (ambient_dim, basis) = match family {
            Family::So => (n, so_basis(n)),
            Family::Su => (2 * n, su_basis(n, false)),
            Family::U => (2 * n, su_basis(n, true)),
            Family::Sp => (4 * n, sp_basis(n)),
        };
        Ok(LieAlgebraRep {
            id: AlgebraId { family, n },
            ambient_dim,
            basis,
        })
    }

    pub fn id(&self) -> AlgebraId {
        self.id
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn basis(&self) -> &[DMatrix<f64>] {
        &self.basis
    }

    /// Rank of the algebra (dimension of a maximal torus).
    pub fn rank(&self) -> usize {
        match self.id.family {
            Family::So => self.id.n / 2,
            Family::Su => self.id.n - 1,
            Family::U | Family::Sp => self.id.n,
        }
    }

    /// Wrap a coefficient vector as an owned element.
    pub fn element(&self, coeffs: DVector<f64>) -> Result<AlgebraElement> {
        if coeffs.len() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "element has {} coefficients, {} has dimension {}",
                coeffs.len(),
                self.id,
                self.dim()
            )));
        }
        Ok(AlgebraElement {
            coeffs,
            owner: self.id,
        })
    }

    fn check_owner(&self, x: &AlgebraElement) -> Result<()> {
        if x.owner != self.id || x.coeffs.len() != self.dim() {
            return Err(Error::OwnerMismatch {
                expected: self.id.to_string(),
                got: x.owner.to_string(),
            });
        }
        Ok(())
    }

    /// Realize a coefficient vector as an ambient skew-symmetric matrix.
    pub fn matrix_of(&self, coeffs: &DVector<f64>) -> DMatrix<f64> {
        let mut m = DMatrix::<f64>::zeros(self.ambient_dim, self.ambient_dim);
        for (c, b) in coeffs.iter().zip(&self.basis) {
            if *c != 0.0 {
                m += b * *c;
            }
        }
        m
    }

    /// Expand an ambient matrix over the basis. Exact (up to rounding) for
    /// matrices in the span; otherwise this is the orthogonal projection.
    pub fn coeffs_of(&self, m: &DMatrix<f64>) -> DVector<f64> {
        DVector::from_fn(self.dim(), |i, _| trace_form(&self.basis[i], m))
    }

    /// Commutator `[X, Y]` re-expanded in the basis.
    pub fn bracket(&self, x: &AlgebraElement, y: &AlgebraElement) -> Result<AlgebraElement> {
        self.check_owner(x)?;
        self.check_owner(y)?;
        Ok(AlgebraElement {
            coeffs: self.bracket_coeffs(&x.coeffs, &y.coeffs),
            owner: self.id,
        })
    }

    /// Coefficient-level commutator (internal fast path).
    pub fn bracket_coeffs(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        let xm = self.matrix_of(x);
        let ym = self.matrix_of(y);
        let comm = &xm * &ym - &ym * &xm;
        self.coeffs_of(&comm)
    }

    /// Invariant scalar product. Because the basis is orthonormal for the
    /// trace form, this is the plain coefficient dot product.
    pub fn inner(&self, x: &AlgebraElement, y: &AlgebraElement) -> Result<f64> {
        self.check_owner(x)?;
        self.check_owner(y)?;
        Ok(x.coeffs.dot(&y.coeffs))
    }

    /// Orthonormal basis of `{xi in span(S) : [xi, x] = 0}`.
    ///
    /// `subspace` holds the spanning vectors as columns (coefficients in
    /// this algebra's basis); it must be linearly independent.
    pub fn nullspace_in_subspace(
        &self,
        x: &DVector<f64>,
        subspace: &DMatrix<f64>,
        rel_tol: f64,
    ) -> Result<(DMatrix<f64>, RankDecision)> {
        if subspace.nrows() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "subspace rows {} != algebra dim {}",
                subspace.nrows(),
                self.dim()
            )));
        }
        let ortho = kernels::orthonormalize_exact(subspace, rel_tol)?;
        let k = ortho.ncols();
        let mut ad = DMatrix::<f64>::zeros(self.dim(), k);
        for j in 0..k {
            let col = ortho.column(j).into_owned();
            ad.set_column(j, &self.bracket_coeffs(&col, x));
        }
        let (kernel, decision) = kernels::kernel_basis(&ad, rel_tol);
        Ok((&ortho * kernel, decision))
    }

    /// `exp(tX)` in the ambient representation; orthogonal for skew input.
    pub fn mat_exp(&self, x: &AlgebraElement, t: f64) -> Result<DMatrix<f64>> {
        self.check_owner(x)?;
        kernels::expm(&(self.matrix_of(&x.coeffs) * t))
    }
}

fn so_basis(n: usize) -> Vec<DMatrix<f64>> {
    let mut basis = Vec::with_capacity(n * (n - 1) / 2);
    let c = 1.0 / 2.0_f64.sqrt();
    for i in 0..n {
        for j in (i + 1)..n {
            let mut m = DMatrix::<f64>::zeros(n, n);
            m[(i, j)] = c;
            m[(j, i)] = -c;
            basis.push(m);
        }
    }
    basis
}

/// Real 2n x 2n block form of the complex matrix `P + iQ`.
pub fn embed_complex(p: &DMatrix<f64>, q: &DMatrix<f64>) -> DMatrix<f64> {
    let n = p.nrows();
    let mut m = DMatrix::<f64>::zeros(2 * n, 2 * n);
    m.view_mut((0, 0), (n, n)).copy_from(p);
    m.view_mut((0, n), (n, n)).copy_from(&(-q));
    m.view_mut((n, 0), (n, n)).copy_from(q);
    m.view_mut((n, n), (n, n)).copy_from(p);
    m
}

/// Anti-Hermitian complex basis of `su(n)` (or `u(n)` with the trace part),
/// realized as real matrices. Orthonormal for `-tr` on the real form.
fn su_basis(n: usize, with_center: bool) -> Vec<DMatrix<f64>> {
    let mut basis = Vec::new();
    let zero = DMatrix::<f64>::zeros(n, n);
    // off-diagonal: (E_rs - E_sr)/2 and i(E_rs + E_sr)/2
    for r in 0..n {
        for s in (r + 1)..n {
            let mut p = DMatrix::<f64>::zeros(n, n);
            p[(r, s)] = 0.5;
            p[(s, r)] = -0.5;
            basis.push(embed_complex(&p, &zero));
            let mut q = DMatrix::<f64>::zeros(n, n);
            q[(r, s)] = 0.5;
            q[(s, r)] = 0.5;
            basis.push(embed_complex(&zero, &q));
        }
    }
    // traceless diagonals: i * diag(1,..,1,-j,0,..)/sqrt(2 j (j+1))
    for j in 1..n {
        let norm = (2.0 * j as f64 * (j as f64 + 1.0)).sqrt();
        let mut q = DMatrix::<f64>::zeros(n, n);
        for d in 0..j {
            q[(d, d)] = 1.0 / norm;
        }
        q[(j, j)] = -(j as f64) / norm;
        basis.push(embed_complex(&zero, &q));
    }
    if with_center {
        // i * I / sqrt(2n)
        let q = DMatrix::<f64>::identity(n, n) / (2.0 * n as f64).sqrt();
        basis.push(embed_complex(&zero, &q));
    }
    basis
}

/// Quaternion units as left-multiplication matrices on H = R^4
/// in the basis (1, i, j, k).
pub fn quat_left(unit_idx: usize) -> DMatrix<f64> {
    let rows: [[f64; 4]; 4] = match unit_idx {
        0 => [
            [1.0, 0.0, 0.0, 0.0],
            [0.0, 1.0, 0.0, 0.0],
            [0.0, 0.0, 1.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
        ],
        1 => [
            [0.0, -1.0, 0.0, 0.0],
            [1.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, -1.0],
            [0.0, 0.0, 1.0, 0.0],
        ],
        2 => [
            [0.0, 0.0, -1.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
            [1.0, 0.0, 0.0, 0.0],
            [0.0, -1.0, 0.0, 0.0],
        ],
        3 => [
            [0.0, 0.0, 0.0, -1.0],
            [0.0, 0.0, -1.0, 0.0],
            [0.0, 1.0, 0.0, 0.0],
            [1.0, 0.0, 0.0, 0.0],
        ],
        _ => panic!("quaternion unit index out of range"),
    };
    DMatrix::from_fn(4, 4, |i, j| rows[i][j])
}

/// Place the 4x4 block `b` at quaternion slot (r, s) of an n x n
/// quaternion matrix realized on R^{4n}.
pub fn quat_block(n: usize, r: usize, s: usize, b: &DMatrix<f64>) -> DMatrix<f64> {
    let mut m = DMatrix::<f64>::zeros(4 * n, 4 * n);
    m.view_mut((4 * r, 4 * s), (4, 4)).copy_from(b);
    m
}

fn sp_basis(n: usize) -> Vec<DMatrix<f64>> {
    let mut basis = Vec::with_capacity(n * (2 * n + 1));
    // diagonal slots carry pure-imaginary quaternions
    for r in 0..n {
        for u in 1..4 {
            basis.push(quat_block(n, r, r, &(quat_left(u) * 0.5)));
        }
    }
    // off-diagonal slots carry a full quaternion, pinned by skew-symmetry
    let c = 1.0 / (2.0 * 2.0_f64.sqrt());
    for r in 0..n {
        for s in (r + 1)..n {
            for u in 0..4 {
                let blk = quat_left(u) * c;
                let mut m = quat_block(n, r, s, &blk);
                m += quat_block(n, s, r, &(-blk.transpose()));
                basis.push(m);
            }
        }
    }
    basis
}
