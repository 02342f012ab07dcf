use crate::error::{Error, Result};
use crate::interval::{IntervalMatrix, IntervalVector};
use crate::matrix::Mat;
use crate::scalar::Scalar;

use super::{JacobianBounds, System};

/// `ẋ = A x + B u + E w`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearSystem {
    pub a: Mat<f64>,
    pub b: Mat<f64>,
    pub e: Mat<f64>,
}

impl LinearSystem {
    pub fn new(a: Mat<f64>, b: Mat<f64>, e: Mat<f64>) -> Result<Self> {
        let n = a.rows();
        if a.cols() != n {
            return Err(Error::shape("LinearSystem A", n, a.cols()));
        }
        if b.rows() != n {
            return Err(Error::shape("LinearSystem B", n, b.rows()));
        }
        if e.rows() != n {
            return Err(Error::shape("LinearSystem E", n, e.rows()));
        }
        Ok(LinearSystem { a, b, e })
    }

    /// `ẋ₁ = x₂, ẋ₂ = u + w` with a scalar additive disturbance.
    pub fn double_integrator() -> Self {
        LinearSystem {
            a: Mat::from_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap(),
            b: Mat::from_rows(&[vec![0.0], vec![1.0]]).unwrap(),
            e: Mat::from_rows(&[vec![0.0], vec![1.0]]).unwrap(),
        }
    }

    /// Closed-loop matrix `A + B K`.
    pub fn closed_loop(&self, k: &Mat<f64>) -> Result<Mat<f64>> {
        self.a.add(&self.b.matmul(k)?)
    }
}

impl System for LinearSystem {
    fn state_dim(&self) -> usize {
        self.a.rows()
    }

    fn input_dim(&self) -> usize {
        self.b.cols()
    }

    fn disturbance_dim(&self) -> usize {
        self.e.cols()
    }

    fn eval<S: Scalar>(&self, x: &[S], u: &[S], w: &[S]) -> Vec<S> {
        (0..self.a.rows())
            .map(|i| {
                let mut acc = S::zero();
                for (c, &v) in self.a.row(i).iter().zip(x) {
                    if *c != 0.0 {
                        acc += v.scale(*c);
                    }
                }
                for (c, &v) in self.b.row(i).iter().zip(u) {
                    if *c != 0.0 {
                        acc += v.scale(*c);
                    }
                }
                for (c, &v) in self.e.row(i).iter().zip(w) {
                    if *c != 0.0 {
                        acc += v.scale(*c);
                    }
                }
                acc
            })
            .collect()
    }

    fn jacobian<S: Scalar>(
        &self,
        _: &IntervalVector<S>,
        _: &IntervalVector<S>,
        _: &IntervalVector<S>,
    ) -> Result<JacobianBounds<S>> {
        Ok(JacobianBounds {
            x: IntervalMatrix::from_point(&self.a.lift()),
            u: IntervalMatrix::from_point(&self.b.lift()),
            w: IntervalMatrix::from_point(&self.e.lift()),
        })
    }

    fn input_support(&self, row: usize) -> Vec<usize> {
        (0..self.b.cols()).filter(|&k| self.b[(row, k)] != 0.0).collect()
    }
}
