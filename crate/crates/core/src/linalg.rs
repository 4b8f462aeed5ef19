//! Dense linear-algebra helpers shared by the analysis modules.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, Schur};
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Eigenvalues below `PSD_CLAMP * max(1, lambda_max)` in magnitude are
/// treated as zero.
pub const PSD_CLAMP: f64 = 1e-12;

/// Relative tolerance used when checking symmetry of covariance inputs.
pub const SYMMETRY_TOL: f64 = 1e-10;

/// Symmetric eigendecomposition with eigenvalues sorted in descending order.
#[derive(Debug, Clone)]
pub struct SortedEigen<T: Scalar> {
    pub values: DVector<T>,
    pub vectors: DMatrix<T>,
}

pub fn symmetrize<T: Scalar>(m: &DMatrix<T>) -> DMatrix<T> {
    (m + m.transpose()) * T::lit(0.5)
}

pub fn sym_eigen_desc<T: Scalar>(m: &DMatrix<T>) -> SortedEigen<T> {
    let n = m.nrows();
    if n == 0 {
        return SortedEigen {
            values: DVector::zeros(0),
            vectors: DMatrix::zeros(0, 0),
        };
    }
    let eig = symmetrize(m).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let values = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    SortedEigen { values, vectors }
}

pub fn max_abs<T: Scalar>(m: &DMatrix<T>) -> T {
    m.iter().fold(T::zero(), |acc, &x| acc.max(x.mag()))
}

pub fn is_symmetric<T: Scalar>(m: &DMatrix<T>, rel_tol: f64) -> bool {
    if !m.is_square() {
        return false;
    }
    let scale = max_abs(m).max(T::one());
    let tol = T::tol(rel_tol) * scale;
    let n = m.nrows();
    (0..n).all(|i| (0..i).all(|j| (m[(i, j)] - m[(j, i)]).mag() <= tol))
}

fn clamp_threshold<T: Scalar>(values: &DVector<T>) -> T {
    let top = values.iter().fold(T::zero(), |acc, &x| acc.max(x.mag()));
    T::tol(PSD_CLAMP) * top.max(T::one())
}

/// Verifies a covariance is symmetric PSD (eigenvalues >= -clamp).
pub fn check_psd<T: Scalar>(m: &DMatrix<T>, what: &str) -> Result<()> {
    if !is_symmetric(m, SYMMETRY_TOL) {
        return Err(Error::NotPsd(format!("{what} is not symmetric")));
    }
    let eig = sym_eigen_desc(m);
    let thr = clamp_threshold(&eig.values);
    if let Some(&min) = eig.values.as_slice().last() {
        if min < -thr {
            return Err(Error::NotPsd(format!(
                "{what} has eigenvalue {:.3e}",
                min.as_f64()
            )));
        }
    }
    Ok(())
}

/// Numerical rank of a symmetric PSD matrix.
pub fn psd_rank<T: Scalar>(m: &DMatrix<T>) -> usize {
    let eig = sym_eigen_desc(m);
    let thr = clamp_threshold(&eig.values);
    eig.values.iter().filter(|&&v| v > thr).count()
}

/// Positive square root of a symmetric PSD matrix; tiny negative
/// eigenvalues are clamped to zero.
pub fn psd_sqrt<T: Scalar>(m: &DMatrix<T>) -> Result<DMatrix<T>> {
    let eig = sym_eigen_desc(m);
    let thr = clamp_threshold(&eig.values);
    let mut roots = DVector::zeros(eig.values.len());
    for (i, &v) in eig.values.iter().enumerate() {
        if v < -thr {
            return Err(Error::NotPsd(format!("eigenvalue {:.3e}", v.as_f64())));
        }
        roots[i] = if v > thr { v.sqrt() } else { T::zero() };
    }
    let scaled = &eig.vectors * DMatrix::from_diagonal(&roots);
    Ok(&scaled * eig.vectors.transpose())
}

/// Inverse of the positive square root; fails on singular input.
pub fn psd_inv_sqrt<T: Scalar>(m: &DMatrix<T>) -> Result<DMatrix<T>> {
    let eig = sym_eigen_desc(m);
    let thr = clamp_threshold(&eig.values);
    let n = eig.values.len();
    let rank = eig.values.iter().filter(|&&v| v > thr).count();
    if rank < n {
        return Err(Error::SingularCovariance { rank, dim: n });
    }
    let inv_roots = eig.values.map(|v| T::one() / v.sqrt());
    let scaled = &eig.vectors * DMatrix::from_diagonal(&inv_roots);
    Ok(&scaled * eig.vectors.transpose())
}

/// Cholesky factorization, reporting the numerical rank on failure.
pub fn cholesky<T: Scalar>(m: &DMatrix<T>) -> Result<Cholesky<T, Dyn>> {
    match Cholesky::new(symmetrize(m)) {
        Some(c) => Ok(c),
        None => Err(Error::SingularCovariance {
            rank: psd_rank(m),
            dim: m.nrows(),
        }),
    }
}

/// Largest eigenvalue modulus of a general real matrix.
///
/// Triangular inputs are read off the diagonal: their eigenvalues are often
/// defective, where an iterative solver loses about `eps^(1/n)`.
pub fn spectral_radius<T: Scalar>(g: &DMatrix<T>) -> T {
    if g.nrows() == 0 {
        return T::zero();
    }
    let n = g.nrows();
    let upper = (0..n).all(|i| (0..i).all(|j| g[(i, j)] == T::zero()));
    let lower = (0..n).all(|i| (i + 1..n).all(|j| g[(i, j)] == T::zero()));
    if upper || lower {
        return (0..n).fold(T::zero(), |acc, i| acc.max(g[(i, i)].mag()));
    }
    eigenvalues(g)
        .iter()
        .fold(T::zero(), |acc, z| acc.max(nalgebra::ComplexField::modulus(*z)))
}

/// Deterministic orthogonal matrix, the Q factor of a fixed dense matrix.
fn scramble<T: Scalar>(n: usize, k: usize) -> DMatrix<T> {
    let m = DMatrix::from_fn(n, n, |i, j| {
        T::lit(((i * 7919 + j * 104_729 + k * 1_299_709) as f64 * 0.618_033_988_749_895).sin())
    });
    m.qr().q()
}

/// Eigenvalues of a general real matrix.
///
/// The Schur iteration can stall on structured inputs; it is capped and
/// retried on fixed orthogonal similarities, which preserve the spectrum.
pub fn eigenvalues<T: Scalar>(g: &DMatrix<T>) -> Vec<Complex<T>> {
    let n = g.nrows();
    if n == 0 {
        return Vec::new();
    }
    let max_iter = 200 * n.max(10);
    if let Some(s) = Schur::try_new(g.clone(), T::eps(), max_iter) {
        return s.complex_eigenvalues().iter().copied().collect();
    }
    for k in 1..=8 {
        let q = scramble::<T>(n, k);
        let similar = q.transpose() * g * &q;
        if let Some(s) = Schur::try_new(similar, T::eps(), max_iter) {
            return s.complex_eigenvalues().iter().copied().collect();
        }
    }
    // last resort: let the solver run without a cap
    g.complex_eigenvalues().iter().copied().collect()
}

/// Induced infinity norm (maximum absolute row sum).
pub fn inf_norm<T: Scalar>(m: &DMatrix<T>) -> T {
    m.row_iter()
        .map(|row| row.iter().fold(T::zero(), |acc, &x| acc + x.mag()))
        .fold(T::zero(), |acc, s| acc.max(s))
}

/// Singular values of a complex matrix, descending.
pub fn complex_singular_values<T: Scalar>(m: &DMatrix<Complex<T>>) -> Vec<T> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut sv: Vec<T> = m.singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    sv
}

/// Largest singular value of a real matrix.
pub fn sigma_max<T: Scalar>(m: &DMatrix<T>) -> T {
    if m.nrows() == 0 || m.ncols() == 0 {
        return T::zero();
    }
    m.singular_values()
        .iter()
        .fold(T::zero(), |acc, &s| acc.max(s))
}

pub fn to_complex<T: Scalar>(m: &DMatrix<T>) -> DMatrix<Complex<T>> {
    m.map(|x| Complex::new(x, T::zero()))
}

/// Generalized Rayleigh-quotient maximizer of the pencil `(a, b)` with `b`
/// positive definite.
///
/// Returns `(lambda_max, v)` where `v` maximizes `v'av / v'bv`. The vector is
/// canonicalized: within a degenerate top eigenspace the direction closest to
/// the lowest-index basis vector is chosen; then unit length and first
/// non-zero entry positive.
pub fn top_generalized_eigen<T: Scalar>(
    a: &DMatrix<T>,
    b: &DMatrix<T>,
) -> Result<(T, DVector<T>)> {
    let n = a.nrows();
    if !a.is_square() || b.shape() != a.shape() {
        return Err(Error::Dimension(format!(
            "pencil shapes {:?} and {:?}",
            a.shape(),
            b.shape()
        )));
    }
    let chol = Cholesky::new(symmetrize(b)).ok_or_else(|| {
        Error::NotPositiveDefinite(format!("rank {} of {}", psd_rank(b), n))
    })?;
    let l = chol.l();
    // whitened = L^{-1} A L^{-T}
    let left = l
        .solve_lower_triangular(a)
        .ok_or_else(|| Error::NotPositiveDefinite("triangular solve failed".into()))?;
    let whitened = l
        .solve_lower_triangular(&left.transpose())
        .ok_or_else(|| Error::NotPositiveDefinite("triangular solve failed".into()))?;
    let eig = sym_eigen_desc(&whitened);
    let top = eig.values[0];
    let tie_tol = T::tol(1e-10) * top.mag().max(T::one());
    let width = eig
        .values
        .iter()
        .take_while(|&&v| top - v <= tie_tol)
        .count();

    // map the whitened top eigenspace back: x = L^{-T} y
    let lt = l.transpose();
    let mut basis = DMatrix::zeros(n, width);
    for k in 0..width {
        let y = eig.vectors.column(k).into_owned();
        let x = lt
            .solve_upper_triangular(&y)
            .ok_or_else(|| Error::NotPositiveDefinite("triangular solve failed".into()))?;
        basis.set_column(k, &x);
    }
    let mut v = if width == 1 {
        basis.column(0).into_owned()
    } else {
        canonical_in_span(&basis)
    };
    canonicalize_direction(&mut v);
    Ok((top, v))
}

/// Projection of the lowest-index basis vector with a non-negligible
/// component onto `span(basis)`.
fn canonical_in_span<T: Scalar>(basis: &DMatrix<T>) -> DVector<T> {
    let q = basis.clone().qr().q();
    let n = basis.nrows();
    for k in 0..n {
        let coeffs = q.row(k).transpose();
        let p = &q * coeffs;
        if p.norm() > T::tol(1e-8) {
            return p;
        }
    }
    basis.column(0).into_owned()
}

/// Unit length, first non-negligible entry positive.
pub fn canonicalize_direction<T: Scalar>(v: &mut DVector<T>) {
    let norm = v.norm();
    if norm > T::zero() {
        *v /= norm;
    }
    let thr = T::tol(1e-12);
    if let Some(first) = v.iter().find(|x| x.mag() > thr).copied() {
        if first < T::zero() {
            v.neg_mut();
        }
    }
}

/// Kronecker product `I_k (x) m`.
pub fn block_diag_repeat<T: Scalar>(m: &DMatrix<T>, k: usize) -> DMatrix<T> {
    let (r, c) = m.shape();
    let mut out = DMatrix::zeros(r * k, c * k);
    for i in 0..k {
        out.view_mut((i * r, i * c), (r, c)).copy_from(m);
    }
    out
}
