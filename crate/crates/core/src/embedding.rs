//! Closed-loop inclusion functions and the hyperrectangle embedding system.
//!
//! The closed loop `f(x, π(x), w)` is bounded on a box by two affine maps
//! `J_lo x + c_lo <= f(x, π(x), w) <= J_hi x + c_hi`, built from the
//! controller relaxation and the mixed-Jacobian bounds of the plant. With the
//! anchor at the lower corner,
//!
//! ```text
//! J_lo = M̲x + M̲u⁺ C̲ + M̲u⁻ C̄
//! c_lo = f(ẑ) - M̲x x̲ - M̲u u̲ + M̲u⁺ d̲ + M̲u⁻ d̄ + M̲w⁻ (w̄ - w̲)
//! ```
//!
//! and symmetrically for the upper map. Concretizing over the box gives the
//! closed-loop inclusion function; keeping the maps affine lets the lifted
//! system compose them with `H` and `H⁺` before concretizing.

use serde::{Deserialize, Serialize};

use crate::dynamics::{
    mixed_jacobian_bound, partition_minmax_field, Anchor, Corner, DisturbanceSpec, System,
};
use crate::error::{Error, Result};
use crate::interval::{affine_row_bounds, se_geq_zero, Interval, IntervalVector};
use crate::matrix::Mat;
use crate::neural::Controller;
use crate::scalar::Scalar;

/// A plant and controller wired together.
pub struct ClosedLoop<'a, Sys: ?Sized, C: ?Sized> {
    pub system: &'a Sys,
    pub controller: &'a C,
    pub anchor: Anchor,
}

impl<'a, Sys: ?Sized, C: ?Sized> Clone for ClosedLoop<'a, Sys, C> {
    fn clone(&self) -> Self {
        *self
    }
}

impl<'a, Sys: ?Sized, C: ?Sized> Copy for ClosedLoop<'a, Sys, C> {}

/// Affine bounds on selected rows of the closed-loop field over one box.
#[derive(Clone, Debug)]
pub struct RowAffine<S> {
    pub rows: Vec<usize>,
    pub j_lo: Mat<S>,
    pub c_lo: Vec<S>,
    pub j_hi: Mat<S>,
    pub c_hi: Vec<S>,
}

impl<S: Scalar> RowAffine<S> {
    /// Position of state row `r` within `rows`.
    pub fn index_of(&self, r: usize) -> Option<usize> {
        self.rows.iter().position(|&x| x == r)
    }

    /// Concretize over a box: the closed-loop inclusion restricted to `rows`.
    pub fn concretize(&self, x: &IntervalVector<S>) -> Vec<Interval<S>> {
        let lo = x.lo();
        let hi = x.hi();
        (0..self.rows.len())
            .map(|k| {
                let (l, _) = affine_row_bounds(self.j_lo.row(k), &lo, &hi);
                let (_, h) = affine_row_bounds(self.j_hi.row(k), &lo, &hi);
                Interval::spanning(l + self.c_lo[k], h + self.c_hi[k])
            })
            .collect()
    }
}

impl<'a, Sys, C> ClosedLoop<'a, Sys, C>
where
    Sys: System + ?Sized,
    C: ?Sized,
{
    pub fn new(system: &'a Sys, controller: &'a C) -> Self {
        ClosedLoop {
            system,
            controller,
            anchor: Anchor::default(),
        }
    }

    pub fn with_anchor(mut self, anchor: Anchor) -> Self {
        self.anchor = anchor;
        self
    }

    /// Closed-loop vector field `f(x, π(x), w)`.
    pub fn field<S: Scalar>(&self, x: &[S], w: &[S]) -> Result<Vec<S>>
    where
        C: Controller<S>,
    {
        let u = self.controller.forward(x)?;
        Ok(self.system.eval(x, &u, w))
    }

    /// Affine bounds of `rows` of the closed loop on `x`, one result per
    /// disturbance box. The controller is relaxed once and shared.
    pub fn row_affine<S: Scalar>(
        &self,
        x: &IntervalVector<S>,
        w_boxes: &[IntervalVector<S>],
        rows: &[usize],
    ) -> Result<Vec<RowAffine<S>>>
    where
        C: Controller<S>,
    {
        let sys = self.system;
        let (n, p) = (sys.state_dim(), sys.input_dim());
        if x.len() != n {
            return Err(Error::shape("row_affine", n, x.len()));
        }
        if let Some(&bad) = rows.iter().find(|&&r| r >= n) {
            return Err(Error::IndexOutOfRange { index: bad, len: n });
        }
        let mut needed: Vec<usize> = rows.iter().flat_map(|&r| sys.input_support(r)).collect();
        needed.sort_unstable();
        needed.dedup();

        let rel = self.controller.relax(x, &needed)?;
        let lo = x.lo();
        let hi = x.hi();
        // full-width relaxation; unused inputs stay at structural zero
        let mut cl = Mat::zeros(p, n);
        let mut ch = Mat::zeros(p, n);
        let mut dl = vec![S::zero(); p];
        let mut dh = vec![S::zero(); p];
        let mut u_box = IntervalVector::new(vec![Interval::point(S::zero()); p]);
        for (r, &k) in needed.iter().enumerate() {
            for c in 0..n {
                cl[(k, c)] = rel.c_lo[(r, c)];
                ch[(k, c)] = rel.c_hi[(r, c)];
            }
            dl[k] = rel.d_lo[r];
            dh[k] = rel.d_hi[r];
            let (l, _) = affine_row_bounds(rel.c_lo.row(r), &lo, &hi);
            let (_, h) = affine_row_bounds(rel.c_hi.row(r), &lo, &hi);
            u_box.set(k, Interval::spanning(l + dl[k], h + dh[k]));
        }

        w_boxes
            .iter()
            .map(|w| {
                if w.len() != sys.disturbance_dim() {
                    return Err(Error::shape("row_affine", sys.disturbance_dim(), w.len()));
                }
                let mj = mixed_jacobian_bound(sys, x, &u_box, w, self.anchor)?;
                let f_hat = sys.eval(&mj.x_anchor, &mj.u_anchor, &mj.w_anchor);
                let (w_lo, w_hi) = (w.lo(), w.hi());
                let mut out = RowAffine {
                    rows: rows.to_vec(),
                    j_lo: Mat::zeros(rows.len(), n),
                    c_lo: Vec::with_capacity(rows.len()),
                    j_hi: Mat::zeros(rows.len(), n),
                    c_hi: Vec::with_capacity(rows.len()),
                };
                for (k, &r) in rows.iter().enumerate() {
                    for upper in [false, true] {
                        // the slope bound that is valid for this side and corner
                        let side = |c: Corner, iv: Interval<S>| {
                            if (c == Corner::Lower) != upper {
                                iv.lo()
                            } else {
                                iv.hi()
                            }
                        };
                        let gx: Vec<S> = (0..n).map(|j| side(self.anchor.x, mj.m.x.get(r, j))).collect();
                        let gu: Vec<S> = (0..p).map(|j| side(self.anchor.u, mj.m.u.get(r, j))).collect();
                        let gw: Vec<S> = (0..w.len())
                            .map(|j| side(self.anchor.w, mj.m.w.get(r, j)))
                            .collect();

                        // f(ẑ) - G ẑ, accumulated in the same order as the
                        // plant evaluation so linear plants cancel exactly
                        let mut lin = S::zero();
                        for (g, &a) in gx.iter().zip(&mj.x_anchor) {
                            if !g.is_structural_zero() {
                                lin += *g * a;
                            }
                        }
                        for (g, &a) in gu.iter().zip(&mj.u_anchor) {
                            if !g.is_structural_zero() {
                                lin += *g * a;
                            }
                        }
                        for (g, &a) in gw.iter().zip(&mj.w_anchor) {
                            if !g.is_structural_zero() {
                                lin += *g * a;
                            }
                        }
                        let mut c = f_hat[r] - lin;

                        let mut jrow = gx;
                        for (kk, &g) in gu.iter().enumerate() {
                            if g.is_structural_zero() {
                                continue;
                            }
                            // u enters through its lower map when the
                            // coefficient pushes the bound the same way
                            let (cm, dm) = if (g.value() >= 0.0) != upper {
                                (&cl, dl[kk])
                            } else {
                                (&ch, dh[kk])
                            };
                            for (j, v) in jrow.iter_mut().enumerate() {
                                let coef = cm[(kk, j)];
                                if !coef.is_structural_zero() {
                                    *v += g * coef;
                                }
                            }
                            c += g * dm;
                        }
                        for (j, &g) in gw.iter().enumerate() {
                            if g.is_structural_zero() {
                                continue;
                            }
                            // extreme of g·w over the disturbance box
                            let pick_lo = (g.value() >= 0.0) != upper;
                            c += g * if pick_lo { w_lo[j] } else { w_hi[j] };
                        }
                        if upper {
                            for j in 0..n {
                                out.j_hi[(k, j)] = jrow[j];
                            }
                            out.c_hi.push(c);
                        } else {
                            for j in 0..n {
                                out.j_lo[(k, j)] = jrow[j];
                            }
                            out.c_lo.push(c);
                        }
                    }
                }
                Ok(out)
            })
            .collect()
    }

    /// Closed-loop inclusion function `F^π` on `x × w`.
    pub fn inclusion<S: Scalar>(
        &self,
        x: &IntervalVector<S>,
        w: &IntervalVector<S>,
    ) -> Result<IntervalVector<S>>
    where
        C: Controller<S>,
    {
        let rows: Vec<usize> = (0..self.system.state_dim()).collect();
        let aff = self.row_affine(x, std::slice::from_ref(w), &rows)?;
        Ok(IntervalVector::new(aff[0].concretize(x)))
    }

    /// Embedding field on the box `x`: lower entry `i` bounds `f_i` on the
    /// lower face `i`, upper entry `i` bounds it on the upper face. Partitions
    /// of the disturbance are combined by worst case.
    pub fn embedding_field<S: Scalar>(
        &self,
        x: &IntervalVector<S>,
        dist: &DisturbanceSpec,
    ) -> Result<(Vec<S>, Vec<S>)>
    where
        C: Controller<S>,
    {
        let n = self.system.state_dim();
        let parts: Vec<IntervalVector<S>> = dist.partitions().iter().map(|p| p.lift()).collect();
        let mut lower = Vec::with_capacity(n);
        let mut upper = Vec::with_capacity(n);
        for i in 0..n {
            for up in [false, true] {
                let face = if up { x.upper_face(i)? } else { x.lower_face(i)? };
                let affs = self.row_affine(&face, &parts, &[i])?;
                let vals: Vec<(Vec<S>, Vec<S>)> = affs
                    .iter()
                    .map(|a| {
                        let iv = a.concretize(&face)[0];
                        (vec![iv.lo()], vec![iv.hi()])
                    })
                    .collect();
                let (l, h) = partition_minmax_field(&vals)?;
                if up {
                    upper.push(h[0]);
                } else {
                    lower.push(l[0]);
                }
            }
        }
        Ok((lower, upper))
    }

    /// Box invariance check: the embedding field is southeast of zero.
    pub fn check_box_invariant(
        &self,
        x: &IntervalVector<f64>,
        dist: &DisturbanceSpec,
    ) -> Result<Certificate>
    where
        C: Controller<f64>,
    {
        let (lo, hi) = self.embedding_field(x, dist)?;
        Ok(Certificate::from_field(lo, hi))
    }
}

/// Outcome of an invariance check together with the field that decided it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Certificate {
    pub certified: bool,
    pub lower_field: Vec<f64>,
    pub upper_field: Vec<f64>,
    /// `min(min lower, min -upper)`; nonnegative iff certified.
    pub margin: f64,
}

impl Certificate {
    pub fn from_field(lower: Vec<f64>, upper: Vec<f64>) -> Self {
        let margin = lower
            .iter()
            .copied()
            .chain(upper.iter().map(|v| 0.0 - v))
            .fold(f64::INFINITY, f64::min);
        Certificate {
            certified: se_geq_zero(&lower, &upper),
            lower_field: lower,
            upper_field: upper,
            margin,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::LinearSystem;
    use crate::neural::LinearController;

    fn scalar(a: f64, e: f64) -> LinearSystem {
        LinearSystem::new(
            Mat::from_rows(&[vec![a]]).unwrap(),
            Mat::zeros(1, 0),
            Mat::from_rows(&[vec![e]]).unwrap(),
        )
        .unwrap()
    }

    fn no_control(n: usize) -> LinearController {
        LinearController::new(Mat::zeros(0, n))
    }

    #[test]
    fn diagonal_system_field() {
        let sys = LinearSystem::new(
            Mat::from_rows(&[vec![-1.0, 0.0], vec![0.0, -2.0]]).unwrap(),
            Mat::zeros(2, 0),
            Mat::zeros(2, 1),
        )
        .unwrap();
        let k = no_control(2);
        let cl = ClosedLoop::new(&sys, &k);
        let x = IntervalVector::from_bounds(&[-0.5, -0.5], &[0.5, 0.5]).unwrap();
        let dist = DisturbanceSpec::symmetric(&[0.0]).unwrap();
        let (lo, hi) = cl.embedding_field(&x, &dist).unwrap();
        assert_eq!(lo, vec![0.5, 1.0]);
        assert_eq!(hi, vec![-0.5, -1.0]);
        assert!(cl.check_box_invariant(&x, &dist).unwrap().certified);
    }

    #[test]
    fn unstable_scalar_is_not_certified() {
        let sys = scalar(1.0, 0.0);
        let k = no_control(1);
        let cl = ClosedLoop::new(&sys, &k);
        let x = IntervalVector::from_bounds(&[-1.0], &[1.0]).unwrap();
        let cert = cl
            .check_box_invariant(&x, &DisturbanceSpec::symmetric(&[0.0]).unwrap())
            .unwrap();
        assert_eq!(cert.lower_field, vec![-1.0]);
        assert_eq!(cert.upper_field, vec![1.0]);
        assert!(!cert.certified);
        assert_eq!(cert.margin, -1.0);
    }

    #[test]
    fn disturbance_can_break_stability() {
        let sys = scalar(-1.0, 1.0);
        let k = no_control(1);
        let cl = ClosedLoop::new(&sys, &k);
        let x = IntervalVector::from_bounds(&[-1.0], &[1.0]).unwrap();
        let cert = cl
            .check_box_invariant(&x, &DisturbanceSpec::symmetric(&[2.0]).unwrap())
            .unwrap();
        assert_eq!(cert.lower_field, vec![-1.0]);
        assert_eq!(cert.upper_field, vec![1.0]);
        assert!(!cert.certified);
    }

    #[test]
    fn equilibrium_point_box() {
        let sys = LinearSystem::double_integrator();
        let k = LinearController::new(Mat::from_rows(&[vec![-2.0, -3.0]]).unwrap());
        let cl = ClosedLoop::new(&sys, &k);
        let x = IntervalVector::point(&[0.0, 0.0]);
        let (lo, hi) = cl
            .embedding_field(&x, &DisturbanceSpec::symmetric(&[0.0]).unwrap())
            .unwrap();
        assert_eq!(lo, vec![0.0, 0.0]);
        assert_eq!(hi, vec![0.0, 0.0]);
    }

    #[test]
    fn linear_closed_loop_inclusion_is_exact_hull() {
        let sys = LinearSystem::double_integrator();
        let k = LinearController::new(Mat::from_rows(&[vec![-2.0, -3.0]]).unwrap());
        let cl = ClosedLoop::new(&sys, &k);
        let x = IntervalVector::from_bounds(&[-1.0, 0.5], &[2.0, 1.0]).unwrap();
        let w = IntervalVector::point(&[0.0]);
        let f = cl.inclusion(&x, &w).unwrap();
        // rows: x2 and -2 x1 - 3 x2
        assert_eq!(f.get(0), Interval::new(0.5, 1.0).unwrap());
        assert_eq!(f.get(1), Interval::new(-4.0 - 3.0, 2.0 - 1.5).unwrap());
    }

    #[test]
    fn axis_aligned_double_integrator_never_certifies() {
        let sys = LinearSystem::double_integrator();
        let dist = DisturbanceSpec::symmetric(&[0.0]).unwrap();
        for gain in [[-2.0, -3.0], [-10.0, -1.0], [0.0, 0.0], [5.0, 5.0]] {
            let k = LinearController::new(Mat::from_rows(&[gain.to_vec()]).unwrap());
            let cl = ClosedLoop::new(&sys, &k);
            let x = IntervalVector::from_bounds(&[-1.0, -1.0], &[1.0, 1.0]).unwrap();
            let cert = cl.check_box_invariant(&x, &dist).unwrap();
            assert!(!cert.certified);
            // on the upper x₁ face, ẋ₁ = x₂ reaches 1 > 0
            assert_eq!(cert.upper_field[0], 1.0);
        }
    }

    #[test]
    fn certificate_json_fields() {
        let c = Certificate::from_field(vec![0.0, 1.0], vec![-0.5, 0.0]);
        let v = serde_json::to_value(&c).unwrap();
        assert_eq!(v["certified"], true);
        assert_eq!(v["margin"], 0.0);
        assert_eq!(v["lower_field"], serde_json::json!([0.0, 1.0]));
    }
}
