//! Small dense linear-algebra kernels over generic scalars.
//!
//! The matrices here are at most a few hundred rows (one subcarrier grid)
//! or a dozen rows (Fisher information), so plain O(n^3) loops suffice.

use ndarray::{Array1, Array2};
use num_complex::Complex;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::scalar::{Cplx, Real};

/// Lower Cholesky factor `L` with `L L^H = A` for Hermitian positive definite `A`.
pub fn cholesky<T: Real>(a: &Array2<Cplx<T>>) -> Result<Array2<Cplx<T>>> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::Dimension(format!("cholesky of {}x{}", n, a.ncols())));
    }
    let mut l = Array2::<Cplx<T>>::zeros((n, n));
    for j in 0..n {
        let mut d = a[[j, j]].re;
        for k in 0..j {
            d -= l[[j, k]].norm_sqr();
        }
        if !(d > T::zero()) || !d.is_finite() {
            return Err(Error::Factorization { pivot: j });
        }
        let djj = d.sqrt();
        l[[j, j]] = Complex::new(djj, T::zero());
        for i in (j + 1)..n {
            let mut s = a[[i, j]];
            for k in 0..j {
                s -= l[[i, k]] * l[[j, k]].conj();
            }
            l[[i, j]] = s / djj;
        }
    }
    Ok(l)
}

/// Factor `F` with `F F^H = A` for Hermitian positive semidefinite `A`.
///
/// Pivots below `eps * max_diag` are treated as zero, which zeroes the
/// column; an all-zero matrix yields an all-zero factor.
pub fn psd_factor<T: Real>(a: &Array2<Cplx<T>>) -> Array2<Cplx<T>> {
    let n = a.nrows();
    let max_diag = (0..n).map(|i| a[[i, i]].re).fold(T::zero(), T::max);
    let tol = max_diag * T::epsilon() * T::lit(64.0);
    let mut l = Array2::<Cplx<T>>::zeros((n, n));
    for j in 0..n {
        let mut d = a[[j, j]].re;
        for k in 0..j {
            d -= l[[j, k]].norm_sqr();
        }
        if d <= tol {
            continue;
        }
        let djj = d.sqrt();
        l[[j, j]] = Complex::new(djj, T::zero());
        for i in (j + 1)..n {
            let mut s = a[[i, j]];
            for k in 0..j {
                s -= l[[i, k]] * l[[j, k]].conj();
            }
            l[[i, j]] = s / djj;
        }
    }
    l
}

/// Solves `L x = b` for lower-triangular `L`.
pub fn forward_solve<T: Real>(l: &Array2<Cplx<T>>, b: &[Cplx<T>]) -> Vec<Cplx<T>> {
    let n = l.nrows();
    debug_assert_eq!(b.len(), n);
    let mut x = Vec::with_capacity(n);
    for i in 0..n {
        let row = l.row(i);
        let mut s = b[i];
        for (k, xk) in x.iter().enumerate() {
            s -= row[k] * *xk;
        }
        x.push(s / row[i]);
    }
    x
}

/// Explicit inverse of a lower-triangular matrix.
pub fn lower_inverse<T: Real>(l: &Array2<Cplx<T>>) -> Array2<Cplx<T>> {
    let n = l.nrows();
    let mut inv = Array2::<Cplx<T>>::zeros((n, n));
    let mut e = vec![Cplx::<T>::zero(); n];
    for j in 0..n {
        e.iter_mut().for_each(|v| *v = Cplx::zero());
        e[j] = Cplx::one();
        let col = forward_solve(l, &e);
        for i in 0..n {
            inv[[i, j]] = col[i];
        }
    }
    inv
}

/// Hermitian inner product `x^H y`.
#[inline]
pub fn cdot<T: Real>(x: &[Cplx<T>], y: &[Cplx<T>]) -> Cplx<T> {
    x.iter()
        .zip(y)
        .fold(Cplx::zero(), |acc, (a, b)| acc + a.conj() * *b)
}

#[inline]
pub fn norm_sqr<T: Real>(x: &[Cplx<T>]) -> T {
    x.iter().fold(T::zero(), |acc, v| acc + v.norm_sqr())
}

/// Complex matrix product.
pub fn cmatmul<T: Real>(a: &Array2<Cplx<T>>, b: &Array2<Cplx<T>>) -> Array2<Cplx<T>> {
    let (n, m) = a.dim();
    let p = b.ncols();
    assert_eq!(m, b.nrows());
    let mut out = Array2::<Cplx<T>>::zeros((n, p));
    for i in 0..n {
        for k in 0..m {
            let aik = a[[i, k]];
            if aik.is_zero() {
                continue;
            }
            for j in 0..p {
                out[[i, j]] += aik * b[[k, j]];
            }
        }
    }
    out
}

/// Conjugate transpose.
pub fn adjoint<T: Real>(a: &Array2<Cplx<T>>) -> Array2<Cplx<T>> {
    a.t().mapv(|v| v.conj())
}

/// Kronecker product `a ⊗ b`.
pub fn kron<T: Real>(a: &Array2<Cplx<T>>, b: &Array2<Cplx<T>>) -> Array2<Cplx<T>> {
    let (ar, ac) = a.dim();
    let (br, bc) = b.dim();
    let mut out = Array2::<Cplx<T>>::zeros((ar * br, ac * bc));
    for i in 0..ar {
        for j in 0..ac {
            let s = a[[i, j]];
            for k in 0..br {
                for l in 0..bc {
                    out[[i * br + k, j * bc + l]] = s * b[[k, l]];
                }
            }
        }
    }
    out
}

/// Real matrix product.
pub fn matmul<T: Real>(a: &Array2<T>, b: &Array2<T>) -> Array2<T> {
    let (n, m) = a.dim();
    let p = b.ncols();
    assert_eq!(m, b.nrows());
    let mut out = Array2::<T>::zeros((n, p));
    for i in 0..n {
        for k in 0..m {
            let aik = a[[i, k]];
            for j in 0..p {
                out[[i, j]] += aik * b[[k, j]];
            }
        }
    }
    out
}

/// Relative pivot threshold used to declare a scaled matrix singular.
pub fn singular_tolerance<T: Real>() -> T {
    T::epsilon().sqrt() * T::lit(1e-2)
}

/// Inverse of a symmetric positive semidefinite matrix.
///
/// The matrix is first equilibrated by its diagonal (`D^-1/2 A D^-1/2`) so
/// that parameters with very different units (meters, seconds) do not
/// dominate pivoting; a pivot below [`singular_tolerance`] in the
/// equilibrated matrix is reported as [`Error::SingularFim`] tagged with
/// `block`.
pub fn invert_psd<T: Real>(a: &Array2<T>, block: &'static str) -> Result<Array2<T>> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::Dimension(format!("inverse of {}x{}", n, a.ncols())));
    }
    let mut scale = Array1::<T>::zeros(n);
    for i in 0..n {
        let d = a[[i, i]];
        if !(d > T::zero()) || !d.is_finite() {
            return Err(Error::SingularFim { block });
        }
        scale[i] = T::one() / d.sqrt();
    }
    let mut m = Array2::<T>::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            m[[i, j]] = a[[i, j]] * scale[i] * scale[j];
        }
    }
    let inv = gauss_jordan(m, block)?;
    let mut out = inv;
    for i in 0..n {
        for j in 0..n {
            out[[i, j]] = out[[i, j]] * scale[i] * scale[j];
        }
    }
    Ok(out)
}

fn gauss_jordan<T: Real>(mut m: Array2<T>, block: &'static str) -> Result<Array2<T>> {
    let n = m.nrows();
    let tol = singular_tolerance::<T>();
    let mut inv = Array2::<T>::eye(n);
    for col in 0..n {
        let (piv, pval) = (col..n)
            .map(|r| (r, m[[r, col]].abs()))
            .fold((col, T::zero()), |best, cur| if cur.1 > best.1 { cur } else { best });
        if !(pval > tol) {
            return Err(Error::SingularFim { block });
        }
        if piv != col {
            for j in 0..n {
                m.swap([piv, j], [col, j]);
                inv.swap([piv, j], [col, j]);
            }
        }
        let p = m[[col, col]];
        for j in 0..n {
            m[[col, j]] /= p;
            inv[[col, j]] /= p;
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let f = m[[r, col]];
            if f == T::zero() {
                continue;
            }
            for j in 0..n {
                let mv = m[[col, j]];
                let iv = inv[[col, j]];
                m[[r, j]] -= f * mv;
                inv[[r, j]] -= f * iv;
            }
        }
    }
    Ok(inv)
}

/// Solves the 3x3 (or any small) linear system `A x = b` with partial pivoting.
pub fn solve_small<T: Real>(a: &Array2<T>, b: &[T]) -> Option<Vec<T>> {
    let n = a.nrows();
    let mut m = a.clone();
    let mut x = b.to_vec();
    for col in 0..n {
        let (piv, pval) = (col..n)
            .map(|r| (r, m[[r, col]].abs()))
            .fold((col, T::zero()), |best, cur| if cur.1 > best.1 { cur } else { best });
        if !(pval > T::zero()) {
            return None;
        }
        if piv != col {
            for j in 0..n {
                m.swap([piv, j], [col, j]);
            }
            x.swap(piv, col);
        }
        for r in (col + 1)..n {
            let f = m[[r, col]] / m[[col, col]];
            for j in col..n {
                let v = m[[col, j]];
                m[[r, j]] -= f * v;
            }
            let xv = x[col];
            x[r] -= f * xv;
        }
    }
    for i in (0..n).rev() {
        let mut s = x[i];
        for j in (i + 1)..n {
            s -= m[[i, j]] * x[j];
        }
        x[i] = s / m[[i, i]];
    }
    Some(x)
}
