//! Dense complex linear algebra helpers on top of nalgebra.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::CLIP;
use crate::error::{Error, Result};

pub type CMat = DMatrix<Complex64>;

pub fn hermitize(m: &CMat) -> CMat {
    (m + m.adjoint()) * Complex64::new(0.5, 0.0)
}

/// Eigendecomposition of a (nearly) Hermitian matrix, after Hermitizing.
/// Returns (eigenvalues, eigenvector columns).
pub fn eigh(m: &CMat) -> (Vec<f64>, CMat) {
    let se = hermitize(m).symmetric_eigen();
    (se.eigenvalues.iter().copied().collect(), se.eigenvectors)
}

pub fn clip(x: f64) -> f64 {
    if x.abs() <= CLIP {
        0.0
    } else {
        x
    }
}

/// √M for PSD M (negative eigenvalues clipped to 0).
pub fn sqrt_psd(m: &CMat) -> CMat {
    let (vals, vecs) = eigh(m);
    let d = CMat::from_diagonal(
        &nalgebra::DVector::from_iterator(
            vals.len(),
            vals.iter().map(|&v| Complex64::new(clip(v).max(0.0).sqrt(), 0.0)),
        ),
    );
    &vecs * d * vecs.adjoint()
}

pub fn trace(m: &CMat) -> Complex64 {
    m.diagonal().iter().sum()
}

/// Sum of singular values (trace norm).
pub fn trace_norm(m: &CMat) -> f64 {
    m.clone().svd(false, false).singular_values.iter().sum()
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

/// −Σ λᵢ log₂ λᵢ over the clipped spectrum of a (nearly) Hermitian PSD matrix.
pub fn spectrum_entropy(m: &CMat) -> f64 {
    let (vals, _) = eigh(m);
    vals.iter()
        .map(|&v| {
            let p = clip(v);
            if p > 0.0 {
                -p * p.log2()
            } else {
                0.0
            }
        })
        .sum()
}

/// Is M†M = I within `tol`?
pub fn is_isometry(m: &CMat, tol: f64) -> bool {
    let g = m.adjoint() * m;
    let n = g.ncols();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let want = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((g[(i, j)] - Complex64::new(want, 0.0)).norm());
        }
    }
    worst <= tol
}

/// Extend a d×r matrix with orthonormal columns to a d×k isometry (r ≤ k ≤ d)
/// by Gram–Schmidt against the standard basis.
pub fn complete_columns(a: &CMat, k: usize) -> Result<CMat> {
    let d = a.nrows();
    let r = a.ncols();
    if k < r || k > d {
        return Err(Error::Domain(format!(
            "cannot complete {d}x{r} to {d}x{k} isometry"
        )));
    }
    let mut cols: Vec<nalgebra::DVector<Complex64>> =
        (0..r).map(|j| a.column(j).into_owned()).collect();
    let mut basis = 0usize;
    while cols.len() < k {
        if basis >= d {
            return Err(Error::Invariant("orthonormal completion failed".into()));
        }
        let mut v = nalgebra::DVector::from_element(d, Complex64::new(0.0, 0.0));
        v[basis] = Complex64::new(1.0, 0.0);
        basis += 1;
        for c in &cols {
            let ip: Complex64 = c.dotc(&v);
            v -= c * ip;
        }
        let n = v.norm();
        if n > 1e-8 {
            cols.push(v / Complex64::new(n, 0.0));
        }
    }
    Ok(CMat::from_columns(&cols))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn eigh_of_pauli_x() {
        let x = CMat::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)]);
        let (mut vals, _) = eigh(&x);
        vals.sort_by(f64::total_cmp);
        assert!((vals[0] + 1.0).abs() < 1e-12);
        assert!((vals[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sqrt_of_diagonal() {
        let m = CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![c(4., 0.), c(9., 0.)]));
        let s = sqrt_psd(&m);
        assert!((s[(0, 0)].re - 2.0).abs() < 1e-12);
        assert!((s[(1, 1)].re - 3.0).abs() < 1e-12);
    }

    #[test]
    fn trace_norm_of_hermitian_is_abs_eig_sum() {
        // diag(0.5, −0.5) has trace norm 1.
        let m = CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![c(0.5, 0.), c(-0.5, 0.)]));
        assert!((trace_norm(&m) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn completes_to_unitary() {
        let a = CMat::from_column_slice(3, 1, &[
            c(1.0 / 2f64.sqrt(), 0.),
            c(0., 1.0 / 2f64.sqrt()),
            c(0., 0.),
        ]);
        let u = complete_columns(&a, 3).unwrap();
        assert!(is_isometry(&u, 1e-10));
    }

    #[test]
    fn spectrum_entropy_binary() {
        let m = CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![c(0.75, 0.), c(0.25, 0.)]));
        assert!((spectrum_entropy(&m) - 0.8112781244591328).abs() < 1e-12);
    }
}
