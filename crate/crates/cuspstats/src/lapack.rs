//! Thin FFI wrappers around the LAPACK routines bundled with OpenBLAS.
//!
//! Matrices are column-major `&mut [f64]` / `&mut [Complex64]` slices. Only
//! the handful of routines the crate needs are wrapped; the wrapper crates on
//! crates.io drag in a source build of OpenBLAS that does not work offline.

use crate::C64;
use std::os::raw::c_char;

#[allow(non_camel_case_types)]
type lapack_int = i32;

extern "C" {
    fn dsyev_(
        jobz: *const c_char,
        uplo: *const c_char,
        n: *const lapack_int,
        a: *mut f64,
        lda: *const lapack_int,
        w: *mut f64,
        work: *mut f64,
        lwork: *const lapack_int,
        info: *mut lapack_int,
    );
    fn zheev_(
        jobz: *const c_char,
        uplo: *const c_char,
        n: *const lapack_int,
        a: *mut C64,
        lda: *const lapack_int,
        w: *mut f64,
        work: *mut C64,
        lwork: *const lapack_int,
        rwork: *mut f64,
        info: *mut lapack_int,
    );
    fn zgeev_(
        jobvl: *const c_char,
        jobvr: *const c_char,
        n: *const lapack_int,
        a: *mut C64,
        lda: *const lapack_int,
        w: *mut C64,
        vl: *mut C64,
        ldvl: *const lapack_int,
        vr: *mut C64,
        ldvr: *const lapack_int,
        work: *mut C64,
        lwork: *const lapack_int,
        rwork: *mut f64,
        info: *mut lapack_int,
    );
}

/// Eigenvalues (ascending) of a real symmetric matrix; `a` is destroyed.
pub fn eigvals_symmetric(a: &mut [f64], n: usize) -> Result<Vec<f64>, String> {
    assert_eq!(a.len(), n * n);
    let nn = n as lapack_int;
    let mut w = vec![0.0f64; n];
    let lwork = (34 * n.max(1)) as lapack_int;
    let mut work = vec![0.0f64; lwork as usize];
    let mut info: lapack_int = 0;
    unsafe {
        dsyev_(
            &(b'N' as c_char),
            &(b'L' as c_char),
            &nn,
            a.as_mut_ptr(),
            &nn,
            w.as_mut_ptr(),
            work.as_mut_ptr(),
            &lwork,
            &mut info,
        );
    }
    if info != 0 {
        return Err(format!("dsyev failed with info = {info}"));
    }
    Ok(w)
}

/// Eigenvalues and eigenvectors (columns) of a real symmetric matrix.
pub fn eigh_symmetric(a: &mut [f64], n: usize) -> Result<Vec<f64>, String> {
    assert_eq!(a.len(), n * n);
    let nn = n as lapack_int;
    let mut w = vec![0.0f64; n];
    let lwork = (34 * n.max(1)) as lapack_int;
    let mut work = vec![0.0f64; lwork as usize];
    let mut info: lapack_int = 0;
    unsafe {
        dsyev_(
            &(b'V' as c_char),
            &(b'L' as c_char),
            &nn,
            a.as_mut_ptr(),
            &nn,
            w.as_mut_ptr(),
            work.as_mut_ptr(),
            &lwork,
            &mut info,
        );
    }
    if info != 0 {
        return Err(format!("dsyev failed with info = {info}"));
    }
    Ok(w)
}

/// Eigenvalues (ascending) of a complex Hermitian matrix; `a` is destroyed.
pub fn eigvals_hermitian(a: &mut [C64], n: usize) -> Result<Vec<f64>, String> {
    assert_eq!(a.len(), n * n);
    let nn = n as lapack_int;
    let mut w = vec![0.0f64; n];
    let lwork = (33 * n.max(1)) as lapack_int;
    let mut work = vec![C64::new(0.0, 0.0); lwork as usize];
    let mut rwork = vec![0.0f64; 3 * n.max(1)];
    let mut info: lapack_int = 0;
    unsafe {
        zheev_(
            &(b'N' as c_char),
            &(b'L' as c_char),
            &nn,
            a.as_mut_ptr(),
            &nn,
            w.as_mut_ptr(),
            work.as_mut_ptr(),
            &lwork,
            rwork.as_mut_ptr(),
            &mut info,
        );
    }
    if info != 0 {
        return Err(format!("zheev failed with info = {info}"));
    }
    Ok(w)
}

/// Full eigendecomposition of a general complex matrix.
///
/// Returns `(values, right, left)`; eigenvectors are the columns of the
/// returned column-major matrices. The left eigenvectors satisfy
/// `u^H A = lambda u^H`.
pub struct ComplexEig {
    pub values: Vec<C64>,
    pub right: Vec<C64>,
    pub left: Vec<C64>,
    pub n: usize,
}

pub fn eig_complex(a: &mut [C64], n: usize) -> Result<ComplexEig, String> {
    assert_eq!(a.len(), n * n);
    let nn = n as lapack_int;
    let mut w = vec![C64::new(0.0, 0.0); n];
    let mut vl = vec![C64::new(0.0, 0.0); n * n];
    let mut vr = vec![C64::new(0.0, 0.0); n * n];
    let lwork = (33 * n.max(1)) as lapack_int;
    let mut work = vec![C64::new(0.0, 0.0); lwork as usize];
    let mut rwork = vec![0.0f64; 2 * n.max(1)];
    let mut info: lapack_int = 0;
    unsafe {
        zgeev_(
            &(b'V' as c_char),
            &(b'V' as c_char),
            &nn,
            a.as_mut_ptr(),
            &nn,
            w.as_mut_ptr(),
            vl.as_mut_ptr(),
            &nn,
            vr.as_mut_ptr(),
            &nn,
            work.as_mut_ptr(),
            &lwork,
            rwork.as_mut_ptr(),
            &mut info,
        );
    }
    if info != 0 {
        return Err(format!("zgeev failed with info = {info}"));
    }
    Ok(ComplexEig {
        values: w,
        right: vr,
        left: vl,
        n,
    })
}

impl ComplexEig {
    pub fn right_vector(&self, k: usize) -> &[C64] {
        &self.right[k * self.n..(k + 1) * self.n]
    }
    pub fn left_vector(&self, k: usize) -> &[C64] {
        &self.left[k * self.n..(k + 1) * self.n]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dsyev_small() {
        let mut a = vec![2.0, 1.0, 1.0, 3.0];
        let w = eigvals_symmetric(&mut a, 2).unwrap();
        let s5 = 5f64.sqrt();
        assert!((w[0] - (5.0 - s5) / 2.0).abs() < 1e-12);
        assert!((w[1] - (5.0 + s5) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn zgeev_eigenpairs() {
        // [[1, 2], [0, 3]] has eigenvalues 1, 3.
        let mut a = vec![
            C64::new(1.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(2.0, 0.0),
            C64::new(3.0, 0.0),
        ];
        let eig = eig_complex(&mut a, 2).unwrap();
        let mut vals: Vec<f64> = eig.values.iter().map(|v| v.re).collect();
        vals.sort_by(f64::total_cmp);
        assert!((vals[0] - 1.0).abs() < 1e-12 && (vals[1] - 3.0).abs() < 1e-12);
        // residual check A v = lambda v for each pair
        let a0 = [
            C64::new(1.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(2.0, 0.0),
            C64::new(3.0, 0.0),
        ];
        for k in 0..2 {
            let v = eig.right_vector(k);
            let lam = eig.values[k];
            for i in 0..2 {
                let av = a0[i] * v[0] + a0[i + 2] * v[1];
                assert!((av - lam * v[i]).norm() < 1e-12);
            }
        }
    }
}
