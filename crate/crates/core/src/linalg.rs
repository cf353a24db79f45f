//! Thin wrappers over `faer` dense kernels.
//!
//! `faer` is built without its `rayon` feature, so every call here is
//! single-threaded and bitwise reproducible; parallelism in this crate lives
//! one level up, over independent items.

use faer::{diag::Diag, linalg::evd, Accum, Mat, MatRef, Par};
use faer::dyn_stack::{MemBuffer, MemStack};

use crate::{Error, Result, C64};

pub(crate) fn matmul(lhs: MatRef<'_, C64>, rhs: MatRef<'_, C64>) -> Mat<C64> {
    let mut out = Mat::zeros(lhs.nrows(), rhs.ncols());
    faer::linalg::matmul::matmul(out.as_mut(), Accum::Replace, lhs, rhs, C64::new(1.0, 0.0), Par::Seq);
    out
}

/// `lhs * rhs^dagger`.
pub(crate) fn matmul_adjoint_rhs(lhs: MatRef<'_, C64>, rhs: MatRef<'_, C64>) -> Mat<C64> {
    let mut out = Mat::zeros(lhs.nrows(), rhs.nrows());
    faer::linalg::matmul::matmul(
        out.as_mut(),
        Accum::Replace,
        lhs,
        rhs.adjoint(),
        C64::new(1.0, 0.0),
        Par::Seq,
    );
    out
}

/// Eigendecomposition of a Hermitian matrix read from its lower triangle.
/// Eigenvalues are ascending.
pub(crate) fn hermitian_eigen(a: MatRef<'_, C64>) -> Result<(Vec<f64>, Mat<C64>)> {
    let n = a.nrows();
    let mut s = Diag::<C64>::zeros(n);
    let mut u = Mat::<C64>::zeros(n, n);
    let mut buf = MemBuffer::new(evd::self_adjoint_evd_scratch::<C64>(
        n,
        evd::ComputeEigenvectors::Yes,
        Par::Seq,
        Default::default(),
    ));
    evd::self_adjoint_evd(
        a,
        s.as_mut(),
        Some(u.as_mut()),
        Par::Seq,
        MemStack::new(&mut buf),
        Default::default(),
    )
    .map_err(|e| Error::Numerical(format!("Hermitian eigensolver failed: {e:?}")))?;
    let values = s.column_vector().iter().map(|z| z.re).collect();
    Ok((values, u))
}

pub(crate) fn hermitian_eigenvalues(a: MatRef<'_, C64>) -> Result<Vec<f64>> {
    let n = a.nrows();
    let mut s = Diag::<C64>::zeros(n);
    let mut buf = MemBuffer::new(evd::self_adjoint_evd_scratch::<C64>(
        n,
        evd::ComputeEigenvectors::No,
        Par::Seq,
        Default::default(),
    ));
    evd::self_adjoint_evd(a, s.as_mut(), None, Par::Seq, MemStack::new(&mut buf), Default::default())
        .map_err(|e| Error::Numerical(format!("Hermitian eigensolver failed: {e:?}")))?;
    Ok(s.column_vector().iter().map(|z| z.re).collect())
}

/// Eigendecomposition of a small real symmetric matrix.
pub(crate) fn symmetric_eigen(a: MatRef<'_, f64>) -> Result<(Vec<f64>, Mat<f64>)> {
    let n = a.nrows();
    let mut s = Diag::<f64>::zeros(n);
    let mut u = Mat::<f64>::zeros(n, n);
    let mut buf = MemBuffer::new(evd::self_adjoint_evd_scratch::<f64>(
        n,
        evd::ComputeEigenvectors::Yes,
        Par::Seq,
        Default::default(),
    ));
    evd::self_adjoint_evd(
        a,
        s.as_mut(),
        Some(u.as_mut()),
        Par::Seq,
        MemStack::new(&mut buf),
        Default::default(),
    )
    .map_err(|e| Error::Numerical(format!("symmetric eigensolver failed: {e:?}")))?;
    Ok((s.column_vector().iter().copied().collect(), u))
}

pub(crate) fn singular_values(a: MatRef<'_, f64>) -> Result<Vec<f64>> {
    a.singular_values()
        .map_err(|e| Error::Numerical(format!("SVD failed: {e:?}")))
}

/// Largest entry modulus of `a - a^dagger`.
pub(crate) fn hermiticity_defect(a: MatRef<'_, C64>) -> f64 {
    let n = a.nrows();
    let mut worst = 0.0f64;
    for j in 0..n {
        for i in j..n {
            let d = (a[(i, j)] - a[(j, i)].conj()).norm();
            worst = worst.max(d);
        }
    }
    worst
}

pub(crate) fn max_abs(a: MatRef<'_, C64>) -> f64 {
    let mut worst = 0.0f64;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            worst = worst.max(a[(i, j)].norm());
        }
    }
    worst
}

/// Largest entry modulus of `a b - b a`.
pub(crate) fn commutator_max_abs(a: MatRef<'_, C64>, b: MatRef<'_, C64>) -> f64 {
    let ab = matmul(a, b);
    let ba = matmul(b, a);
    let mut worst = 0.0f64;
    for j in 0..ab.ncols() {
        for i in 0..ab.nrows() {
            worst = worst.max((ab[(i, j)] - ba[(i, j)]).norm());
        }
    }
    worst
}

/// Largest entry modulus of `[a, diag(d)]`, computed in O(n²).
pub(crate) fn commutator_with_diagonal_max_abs(a: MatRef<'_, C64>, d: &[f64]) -> f64 {
    let mut worst = 0.0f64;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            let v = a[(i, j)];
            if v != C64::new(0.0, 0.0) {
                worst = worst.max(v.norm() * (d[j] - d[i]).abs());
            }
        }
    }
    worst
}

pub(crate) fn matvec(a: MatRef<'_, C64>, x: &[C64]) -> Vec<C64> {
    assert_eq!(a.ncols(), x.len());
    let mut out = vec![C64::new(0.0, 0.0); a.nrows()];
    for (j, &xj) in x.iter().enumerate() {
        if xj == C64::new(0.0, 0.0) {
            continue;
        }
        let col = a.col(j);
        for (o, v) in out.iter_mut().zip(col.iter()) {
            *o += v * xj;
        }
    }
    out
}

/// `a^dagger x`.
pub(crate) fn adjoint_matvec(a: MatRef<'_, C64>, x: &[C64]) -> Vec<C64> {
    assert_eq!(a.nrows(), x.len());
    (0..a.ncols())
        .map(|j| a.col(j).iter().zip(x).map(|(v, xi)| v.conj() * xi).sum())
        .collect()
}
