use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::matrix::Mat;

/// Choose `H = T⁻¹` from the eigendecomposition `A_cl = T Λ T⁻¹`.
///
/// Only real, non-defective spectra are supported. Eigenvalues are ordered
/// from largest to smallest and each eigenvector is scaled so that its first
/// nonzero entry is 1, which fixes `T` up to the ordering of repeated
/// eigenvalues.
pub fn lifting_from_linearization(a_cl: &Mat<f64>) -> Result<Mat<f64>> {
    let n = a_cl.rows();
    if a_cl.cols() != n {
        return Err(Error::shape("lifting_from_linearization", n, a_cl.cols()));
    }
    let a = a_cl.to_nalgebra();
    let scale = 1.0 + a.amax();
    let eig = a.clone().schur().complex_eigenvalues();
    let mut values = Vec::with_capacity(n);
    for z in eig.iter() {
        if z.im.abs() > 1e-9 * scale {
            return Err(Error::UnsupportedSpectrum(format!(
                "complex eigenvalue {} + {}i",
                z.re, z.im
            )));
        }
        values.push(z.re);
    }
    values.sort_by(|x, y| y.total_cmp(x));

    // group numerically equal eigenvalues
    let tol = 1e-8 * scale;
    let mut groups: Vec<(f64, usize)> = Vec::new();
    for &v in &values {
        match groups.last_mut() {
            Some((c, k)) if (*c - v).abs() <= tol => {
                *c = (*c * *k as f64 + v) / (*k as f64 + 1.0);
                *k += 1;
            }
            _ => groups.push((v, 1)),
        }
    }

    let mut t = DMatrix::zeros(n, n);
    let mut col = 0;
    for (lambda, mult) in groups {
        let shifted = &a - DMatrix::identity(n, n) * lambda;
        let svd = shifted.svd(false, true);
        let v_t = svd.v_t.ok_or(Error::UnsupportedSpectrum("SVD failed".into()))?;
        let sv = &svd.singular_values;
        // singular values are not sorted by nalgebra; take the smallest ones
        let mut order: Vec<usize> = (0..sv.len()).collect();
        order.sort_by(|&i, &j| sv[i].total_cmp(&sv[j]));
        let null_tol = 1e-7 * scale;
        let null_dim = order.iter().filter(|&&i| sv[i] <= null_tol).count();
        if null_dim < mult {
            return Err(Error::UnsupportedSpectrum(format!(
                "defective eigenvalue {lambda} (multiplicity {mult}, eigenvectors {null_dim})"
            )));
        }
        for &i in order.iter().take(mult) {
            let mut v: Vec<f64> = v_t.row(i).iter().copied().collect();
            let amax = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            let lead = v
                .iter()
                .copied()
                .find(|x| x.abs() > 1e-9 * amax)
                .unwrap_or(1.0);
            for x in v.iter_mut() {
                *x /= lead;
            }
            for (r, x) in v.into_iter().enumerate() {
                t[(r, col)] = x;
            }
            col += 1;
        }
    }
    let h = t
        .try_inverse()
        .ok_or(Error::UnsupportedSpectrum("eigenvector matrix is singular".into()))?;
    Ok(Mat::from_nalgebra(&h))
}

/// `H` with extra rows appended below.
pub fn stack_rows(h: &Mat<f64>, extra: &Mat<f64>) -> Result<Mat<f64>> {
    if extra.rows() > 0 && extra.cols() != h.cols() {
        return Err(Error::shape("stack_rows", h.cols(), extra.cols()));
    }
    let mut rows = h.to_rows();
    rows.extend(extra.to_rows());
    Mat::from_rows(&rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn double_integrator_transformation() {
        let a = Mat::from_rows(&[vec![0.0, 1.0], vec![-2.0, -3.0]]).unwrap();
        let h = lifting_from_linearization(&a).unwrap();
        let expect = [[2.0, 1.0], [-1.0, -1.0]];
        for i in 0..2 {
            for j in 0..2 {
                assert!((h[(i, j)] - expect[i][j]).abs() < 1e-9, "{h:?}");
            }
        }
    }

    #[test]
    fn diagonal_gives_identity() {
        let a = Mat::from_rows(&[vec![-1.0, 0.0], vec![0.0, -2.0]]).unwrap();
        let h = lifting_from_linearization(&a).unwrap();
        assert!((h[(0, 0)] - 1.0).abs() < 1e-12 && (h[(1, 1)] - 1.0).abs() < 1e-12);
        assert!(h[(0, 1)].abs() < 1e-12 && h[(1, 0)].abs() < 1e-12);
    }

    #[test]
    fn complex_and_defective_spectra_are_rejected() {
        let rot = Mat::from_rows(&[vec![0.0, 1.0], vec![-1.0, 0.0]]).unwrap();
        assert!(matches!(
            lifting_from_linearization(&rot),
            Err(Error::UnsupportedSpectrum(_))
        ));
        let jordan = Mat::from_rows(&[vec![-1.0, 1.0], vec![0.0, -1.0]]).unwrap();
        assert!(matches!(
            lifting_from_linearization(&jordan),
            Err(Error::UnsupportedSpectrum(_))
        ));
    }
}
