use crate::error::{Error, Result};
use crate::interval::{Interval, IntervalMatrix, IntervalVector};
use crate::scalar::Scalar;

use super::{JacobianBounds, System};

/// Numerator coefficients of the segway model in reading order. Disturbance
/// `w_k` scales coefficient `k` by `(1 + w_k)`.
pub const SEGWAY_COEFFS: [f64; 11] = [
    1.8, 11.5, 9.8, 10.9, 68.4, 1.2, // velocity row
    9.3, 58.8, 38.6, 234.5, 208.3, // pitch-rate row
];

const DEN: f64 = 24.7;

/// Segway with state `(φ, v, φ̇)`, scalar input and 11 multiplicative
/// parameter disturbances.
///
/// ```text
/// φ̇ = φ̇
/// v̇ = [cos φ (-a₁u + a₂v + a₃ sin φ) - a₄u + a₅v - a₆ φ̇² sin φ] / (cos φ - 24.7)
/// φ̈ = [(b₁u - b₂v) cos φ + b₃u - b₄v - sin φ (b₅ + φ̇² cos φ)] / (cos² φ - 24.7)
/// ```
#[derive(Clone, Debug, PartialEq)]
pub struct Segway {
    pub coeffs: [f64; 11],
}

impl Default for Segway {
    fn default() -> Self {
        Segway {
            coeffs: SEGWAY_COEFFS,
        }
    }
}

impl Segway {
    fn params<S: Scalar>(&self, w: &[S]) -> [S; 11] {
        std::array::from_fn(|k| {
            let c = self.coeffs[k];
            S::from_f64(c) + w[k].scale(c)
        })
    }

    fn params_iv<S: Scalar>(&self, w: &IntervalVector<S>) -> [Interval<S>; 11] {
        std::array::from_fn(|k| {
            let c = S::from_f64(self.coeffs[k]);
            w.get(k).scale(c).add_scalar(c)
        })
    }
}

impl System for Segway {
    fn state_dim(&self) -> usize {
        3
    }

    fn input_dim(&self) -> usize {
        1
    }

    fn disturbance_dim(&self) -> usize {
        11
    }

    fn eval<S: Scalar>(&self, x: &[S], u: &[S], w: &[S]) -> Vec<S> {
        let [a1, a2, a3, a4, a5, a6, b1, b2, b3, b4, b5] = self.params(w);
        let (phi, v, q) = (x[0], x[1], x[2]);
        let u = u[0];
        let (s, c) = (phi.sin(), phi.cos());
        let q2 = q * q;
        let n2 = c * (-(a1 * u) + a2 * v + a3 * s) - a4 * u + a5 * v - a6 * q2 * s;
        let d2 = c - S::from_f64(DEN);
        let n3 = (b1 * u - b2 * v) * c + b3 * u - b4 * v - s * (b5 + q2 * c);
        let d3 = c * c - S::from_f64(DEN);
        vec![q, n2 / d2, n3 / d3]
    }

    fn jacobian<S: Scalar>(
        &self,
        x: &IntervalVector<S>,
        u: &IntervalVector<S>,
        w: &IntervalVector<S>,
    ) -> Result<JacobianBounds<S>> {
        if x.len() != 3 || u.len() != 1 || w.len() != 11 {
            return Err(Error::shape(
                "Segway::jacobian",
                "(3, 1, 11)",
                format!("({}, {}, {})", x.len(), u.len(), w.len()),
            ));
        }
        let p = self.params_iv(w);
        let [a1, a2, a3, a4, a5, a6, b1, b2, b3, b4, b5] = p;
        let (phi, v, q, u) = (x.get(0), x.get(1), x.get(2), u.get(0));
        let (s, c) = (phi.sin(), phi.cos());
        let q2 = q.sqr();
        let k = |v: f64| Interval::point(S::from_f64(v));
        let two = k(2.0);

        let n2 = c * (-(a1 * u) + a2 * v + a3 * s) - a4 * u + a5 * v - a6 * q2 * s;
        let d2 = c - k(DEN);
        let r2 = d2.recip()?;
        // d/dφ of n2 / d2 = n2'/d2 + n2 sin φ / d2²
        let n2_phi = -(s * (-(a1 * u) + a2 * v)) + a3 * (c.sqr() - s.sqr()) - a6 * q2 * c;
        let f2_phi = n2_phi * r2 + n2 * s * r2.sqr();
        let f2_v = (a2 * c + a5) * r2;
        let f2_q = -(two * a6 * q * s) * r2;
        let f2_u = -(a1 * c + a4) * r2;

        let n3 = (b1 * u - b2 * v) * c + b3 * u - b4 * v - s * (b5 + q2 * c);
        let d3 = c.sqr() - k(DEN);
        let r3 = d3.recip()?;
        // d/dφ of n3 / d3 = n3'/d3 + 2 cos φ sin φ n3 / d3²
        let n3_phi = -((b1 * u - b2 * v) * s) - b5 * c + q2 * (s.sqr() - c.sqr());
        let f3_phi = n3_phi * r3 + two * c * s * n3 * r3.sqr();
        let f3_v = -(b2 * c + b4) * r3;
        let f3_q = -(two * q * s * c) * r3;
        let f3_u = (b1 * c + b3) * r3;

        let mut jx = IntervalMatrix::zeros(3, 3);
        jx.set(0, 2, k(1.0));
        jx.set(1, 0, f2_phi);
        jx.set(1, 1, f2_v);
        jx.set(1, 2, f2_q);
        jx.set(2, 0, f3_phi);
        jx.set(2, 1, f3_v);
        jx.set(2, 2, f3_q);

        let mut ju = IntervalMatrix::zeros(3, 1);
        ju.set(1, 0, f2_u);
        ju.set(2, 0, f3_u);

        // ∂/∂w_k = c_k ∂/∂(coefficient k)
        let cw = |idx: usize, d: Interval<S>| d.scale(S::from_f64(self.coeffs[idx]));
        let mut jw = IntervalMatrix::zeros(3, 11);
        jw.set(1, 0, cw(0, -(c * u) * r2));
        jw.set(1, 1, cw(1, c * v * r2));
        jw.set(1, 2, cw(2, c * s * r2));
        jw.set(1, 3, cw(3, -u * r2));
        jw.set(1, 4, cw(4, v * r2));
        jw.set(1, 5, cw(5, -(q2 * s) * r2));
        jw.set(2, 6, cw(6, u * c * r3));
        jw.set(2, 7, cw(7, -(v * c) * r3));
        jw.set(2, 8, cw(8, u * r3));
        jw.set(2, 9, cw(9, -v * r3));
        jw.set(2, 10, cw(10, -s * r3));

        Ok(JacobianBounds {
            x: jx,
            u: ju,
            w: jw,
        })
    }

    fn input_support(&self, row: usize) -> Vec<usize> {
        if row == 0 {
            vec![]
        } else {
            vec![0]
        }
    }
}
