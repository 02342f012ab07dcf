//! Lifted systems: polytopes `{x : y_lo <= Hx <= y_hi}` certified through the
//! dynamics of `y = Hx` in `ℝᵐ`.
//!
//! `x` is recovered from `y` with a left inverse `H⁺_η = H† + η Nᵀ`, where the
//! columns of `N` span the left null space of `H`. Each face of the lifted box
//! is first shrunk with the subspace constraints `Nᵀ y = 0`, then the
//! closed-loop affine bounds are composed with `H` and `H⁺_η` and minimized (or
//! maximized) over the refined face.

mod design;
mod geometry;
mod refine;

pub use design::{lifting_from_linearization, stack_rows};
pub use geometry::{polytope_edges, polytope_vertices};
pub use refine::refine_with_constraints;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{partition_minmax_field, simulate, DisturbanceSpec, System};
use crate::embedding::{Certificate, ClosedLoop};
use crate::error::{Error, Result};
use crate::interval::{affine_row_bounds, matvec_box, IntervalVector};
use crate::matrix::Mat;
use crate::neural::Controller;
use crate::scalar::Scalar;

/// Relative singular-value threshold for rank decisions.
const RANK_TOL: f64 = 1e-10;

fn numerical_rank(m: &DMatrix<f64>) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let sv = m.clone().singular_values();
    let max = sv.iter().fold(0.0f64, |a, &b| a.max(b));
    sv.iter().filter(|&&s| s > RANK_TOL * max.max(1e-300)).count()
}

/// Orthonormal basis of `{v : vᵀH = 0}`, one vector per column.
///
/// Householder QR of `[H | I]`: the first `n` columns of `Q` span the columns
/// of `H` and the remaining `m - n` span its orthogonal complement. That
/// basis is then reduced to row echelon form and re-orthonormalized, which
/// keeps it sparse when `H` is block structured (the refinement operator is
/// much tighter on sparse constraints). Each column's first clearly nonzero
/// entry is made positive.
pub fn nullspace_basis(h: &Mat<f64>) -> Result<Mat<f64>> {
    let (m, n) = (h.rows(), h.cols());
    let hn = h.to_nalgebra();
    let rank = numerical_rank(&hn);
    if rank < n || m < n {
        return Err(Error::RankDeficient { rank, expected: n });
    }
    if m == n {
        return Ok(Mat::zeros(m, 0));
    }
    let mut aug = DMatrix::zeros(m, n + m);
    aug.view_mut((0, 0), (m, n)).copy_from(&hn);
    aug.view_mut((0, n), (m, m)).fill_with_identity();
    let q = aug.qr().q();
    let k = m - n;
    let mut rows: Vec<Vec<f64>> = (0..k).map(|j| (0..m).map(|i| q[(i, n + j)]).collect()).collect();
    echelon(&mut rows);
    orthonormalize(&mut rows);
    let mut basis = Mat::from_fn(m, k, |i, j| rows[j][i]);
    for j in 0..k {
        let first = (0..m).map(|i| basis[(i, j)]).find(|v| v.abs() > 1e-9);
        if first.is_some_and(|v| v < 0.0) {
            for i in 0..m {
                basis[(i, j)] = -basis[(i, j)];
            }
        }
    }
    Ok(basis)
}

/// Entries this small relative to the largest are cleared to exact zeros.
const SPARSE_TOL: f64 = 1e-12;

/// Reduced row echelon form with partial pivoting, in place.
fn echelon(rows: &mut [Vec<f64>]) {
    let k = rows.len();
    let m = rows.first().map_or(0, |r| r.len());
    let mut pivot_row = 0;
    for col in 0..m {
        if pivot_row == k {
            break;
        }
        let (best, val) = (pivot_row..k)
            .map(|r| (r, rows[r][col].abs()))
            .fold((pivot_row, 0.0), |a, b| if b.1 > a.1 { b } else { a });
        if val <= 1e-9 {
            continue;
        }
        rows.swap(pivot_row, best);
        let p = rows[pivot_row][col];
        for v in rows[pivot_row].iter_mut() {
            *v /= p;
        }
        for r in 0..k {
            if r == pivot_row {
                continue;
            }
            let f = rows[r][col];
            if f != 0.0 {
                for c in 0..m {
                    rows[r][c] -= f * rows[pivot_row][c];
                }
            }
        }
        pivot_row += 1;
    }
    for row in rows.iter_mut() {
        let scale = row.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        for v in row.iter_mut() {
            if v.abs() <= SPARSE_TOL * scale {
                *v = 0.0;
            }
        }
    }
}

/// Modified Gram-Schmidt, in place. Rows with disjoint supports are only
/// normalized.
fn orthonormalize(rows: &mut [Vec<f64>]) {
    for i in 0..rows.len() {
        for j in 0..i {
            let d: f64 = rows[i].iter().zip(&rows[j]).map(|(a, b)| a * b).sum();
            if d != 0.0 {
                let prev = rows[j].clone();
                for (a, b) in rows[i].iter_mut().zip(&prev) {
                    *a -= d * b;
                }
            }
        }
        let norm = rows[i].iter().map(|v| v * v).sum::<f64>().sqrt();
        let scale = rows[i].iter().fold(0.0f64, |a, v| a.max(v.abs()));
        for v in rows[i].iter_mut() {
            *v /= norm;
            if v.abs() <= SPARSE_TOL * scale / norm {
                *v = 0.0;
            }
        }
    }
}

/// `H† = (HᵀH)⁻¹Hᵀ`.
pub fn pseudo_inverse(h: &Mat<f64>) -> Result<Mat<f64>> {
    let hn = h.to_nalgebra();
    let gram = hn.transpose() * &hn;
    let inv = gram.try_inverse().ok_or(Error::RankDeficient {
        rank: numerical_rank(&hn),
        expected: h.cols(),
    })?;
    Ok(Mat::from_nalgebra(&(inv * hn.transpose())))
}

/// The fixed part of a lifting: `H`, `H†` and the null-space basis `N`.
#[derive(Clone, Debug, PartialEq)]
pub struct Lifting {
    h: Mat<f64>,
    h_dagger: Mat<f64>,
    null: Mat<f64>,
}

impl Lifting {
    pub fn new(h: Mat<f64>) -> Result<Self> {
        let null = nullspace_basis(&h)?;
        let h_dagger = pseudo_inverse(&h)?;
        Ok(Lifting { h, h_dagger, null })
    }

    pub fn h(&self) -> &Mat<f64> {
        &self.h
    }

    pub fn h_dagger(&self) -> &Mat<f64> {
        &self.h_dagger
    }

    pub fn null(&self) -> &Mat<f64> {
        &self.null
    }

    pub fn lifted_dim(&self) -> usize {
        self.h.rows()
    }

    pub fn state_dim(&self) -> usize {
        self.h.cols()
    }

    /// Shape `n × (m - n)` of the free parameter `η`.
    pub fn eta_shape(&self) -> (usize, usize) {
        (self.h.cols(), self.null.cols())
    }

    pub fn zero_eta(&self) -> Mat<f64> {
        let (r, c) = self.eta_shape();
        Mat::zeros(r, c)
    }

    /// `H⁺_η = H† + η Nᵀ`.
    pub fn left_inverse<S: Scalar>(&self, eta: &Mat<S>) -> Result<Mat<S>> {
        if (eta.rows(), eta.cols()) != self.eta_shape() {
            return Err(Error::shape(
                "left_inverse",
                format!("{:?}", self.eta_shape()),
                format!("({}, {})", eta.rows(), eta.cols()),
            ));
        }
        let base: Mat<S> = self.h_dagger.lift();
        if self.null.cols() == 0 {
            return Ok(base);
        }
        base.add(&eta.matmul(&self.null.transpose().lift())?)
    }

    /// Refinement operator for the subspace `col(H)`.
    pub fn refine(&self, y: &IntervalVector<f64>) -> Result<IntervalVector<f64>> {
        if y.len() != self.lifted_dim() {
            return Err(Error::shape("refine", self.lifted_dim(), y.len()));
        }
        refine_with_constraints(&self.null.transpose(), y)
    }
}

/// `{x : y_lo <= Hx <= y_hi}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Polytope {
    #[serde(rename = "H")]
    pub h: Mat<f64>,
    pub y_lo: Vec<f64>,
    pub y_hi: Vec<f64>,
}

impl Polytope {
    /// Checked constructor: full column rank, ordered bounds, nonempty.
    pub fn new(h: Mat<f64>, y_lo: Vec<f64>, y_hi: Vec<f64>) -> Result<Self> {
        let p = Polytope { h, y_lo, y_hi };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.h.rows();
        if self.y_lo.len() != m || self.y_hi.len() != m {
            return Err(Error::shape("Polytope bounds", m, self.y_lo.len().min(self.y_hi.len())));
        }
        let lifting = Lifting::new(self.h.clone())?;
        let b = self.y_box()?;
        lifting.refine(&b)?;
        Ok(())
    }

    pub fn y_box(&self) -> Result<IntervalVector<f64>> {
        IntervalVector::from_bounds(&self.y_lo, &self.y_hi)
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        self.h
            .matvec(x)
            .map(|y| {
                y.iter()
                    .zip(self.y_lo.iter().zip(&self.y_hi))
                    .all(|(v, (l, h))| *v >= l - tol && *v <= h + tol)
            })
            .unwrap_or(false)
    }

    /// Largest violation of the constraints (`<= 0` inside).
    pub fn exit_margin(&self, x: &[f64]) -> f64 {
        let y = self.h.matvec(x).expect("dimension checked by caller");
        y.iter()
            .zip(self.y_lo.iter().zip(&self.y_hi))
            .map(|(v, (l, h))| (l - v).max(v - h))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Point where the ray from `center` along `dir` leaves the polytope.
    /// `center` must be interior.
    pub fn boundary_point(&self, center: &[f64], dir: &[f64]) -> Result<Vec<f64>> {
        let yc = self.h.matvec(center)?;
        let yd = self.h.matvec(dir)?;
        let mut t = f64::INFINITY;
        for i in 0..yc.len() {
            if yd[i] > 0.0 {
                t = t.min((self.y_hi[i] - yc[i]) / yd[i]);
            } else if yd[i] < 0.0 {
                t = t.min((self.y_lo[i] - yc[i]) / yd[i]);
            }
        }
        if !t.is_finite() || t < 0.0 {
            return Err(Error::Config("ray does not leave the polytope".into()));
        }
        Ok(center.iter().zip(dir).map(|(c, d)| c + t * d).collect())
    }

    /// `H†` applied to the midpoint of the bounds.
    pub fn center(&self) -> Result<Vec<f64>> {
        let mid: Vec<f64> = self
            .y_lo
            .iter()
            .zip(&self.y_hi)
            .map(|(l, h)| 0.5 * (l + h))
            .collect();
        pseudo_inverse(&self.h)?.matvec(&mid)
    }
}

/// One refined face of the lifted box.
#[derive(Clone, Debug, PartialEq)]
pub struct Face {
    pub index: usize,
    pub upper: bool,
    pub y_box: IntervalVector<f64>,
}

/// The `2m` refined faces, lower faces first. Refinement does not depend on
/// the controller or on `η`, so this can be computed once.
pub fn refined_faces(lifting: &Lifting, y: &IntervalVector<f64>) -> Result<Vec<Face>> {
    let m = lifting.lifted_dim();
    if y.len() != m {
        return Err(Error::shape("refined_faces", m, y.len()));
    }
    let mut faces = Vec::with_capacity(2 * m);
    for upper in [false, true] {
        for i in 0..m {
            let raw = if upper { y.upper_face(i)? } else { y.lower_face(i)? };
            faces.push(Face {
                index: i,
                upper,
                y_box: lifting.refine(&raw)?,
            });
        }
    }
    Ok(faces)
}

/// Field entry for one face: a lower bound of `(H f)_i` over the refined
/// lower face, or an upper bound over the refined upper face, worst case over
/// the disturbance partitions.
pub fn face_value<S, Sys, C>(
    cl: &ClosedLoop<'_, Sys, C>,
    h: &Mat<f64>,
    h_plus: &Mat<S>,
    face: &Face,
    partitions: &[IntervalVector<S>],
) -> Result<S>
where
    S: Scalar,
    Sys: System + ?Sized,
    C: Controller<S> + ?Sized,
{
    let i = face.index;
    let y_lo: Vec<S> = face.y_box.lo().into_iter().map(S::from_f64).collect();
    let y_hi: Vec<S> = face.y_box.hi().into_iter().map(S::from_f64).collect();
    let x_box = matvec_box(h_plus, &face.y_box.lift())?;
    let rows: Vec<usize> = (0..h.cols()).filter(|&r| h[(i, r)] != 0.0).collect();
    let affs = cl.row_affine(&x_box, partitions, &rows)?;
    let n = h.cols();
    let m = h.rows();

    let values: Vec<(Vec<S>, Vec<S>)> = affs
        .iter()
        .map(|aff| {
            // coefficients of the face row over x, then over y through H⁺
            let mut lx = vec![S::zero(); n];
            let mut l0 = S::zero();
            for (k, &r) in aff.rows.iter().enumerate() {
                let hr = h[(i, r)];
                let use_lo = (hr >= 0.0) != face.upper;
                let (jrow, c) = if use_lo {
                    (aff.j_lo.row(k), aff.c_lo[k])
                } else {
                    (aff.j_hi.row(k), aff.c_hi[k])
                };
                for (dst, &v) in lx.iter_mut().zip(jrow) {
                    if !v.is_structural_zero() {
                        *dst += v.scale(hr);
                    }
                }
                l0 += c.scale(hr);
            }
            let mut ly = vec![S::zero(); m];
            for (j, &coef) in lx.iter().enumerate() {
                if coef.is_structural_zero() {
                    continue;
                }
                for (dst, &hp) in ly.iter_mut().zip(h_plus.row(j)) {
                    if !hp.is_structural_zero() {
                        *dst += coef * hp;
                    }
                }
            }
            let (mn, mx) = affine_row_bounds(&ly, &y_lo, &y_hi);
            (vec![mn + l0], vec![mx + l0])
        })
        .collect();
    let (lo, hi) = partition_minmax_field(&values)?;
    Ok(if face.upper { hi[0] } else { lo[0] })
}

/// Lifted embedding field `(lower, upper)` on the box `y`.
pub fn lifted_embedding_field<S, Sys, C>(
    cl: &ClosedLoop<'_, Sys, C>,
    lifting: &Lifting,
    eta: &Mat<S>,
    y: &IntervalVector<f64>,
    dist: &DisturbanceSpec,
) -> Result<(Vec<S>, Vec<S>)>
where
    S: Scalar,
    Sys: System + ?Sized,
    C: Controller<S> + ?Sized,
{
    check_dims(cl.system, lifting, dist)?;
    let h_plus = lifting.left_inverse(eta)?;
    let faces = refined_faces(lifting, y)?;
    let parts: Vec<IntervalVector<S>> = dist.partitions().iter().map(|p| p.lift()).collect();
    let m = lifting.lifted_dim();
    let mut lower = Vec::with_capacity(m);
    let mut upper = Vec::with_capacity(m);
    for face in &faces {
        let v = face_value(cl, lifting.h(), &h_plus, face, &parts)?;
        if face.upper {
            upper.push(v);
        } else {
            lower.push(v);
        }
    }
    Ok((lower, upper))
}

pub(crate) fn check_dims<Sys: System + ?Sized>(
    sys: &Sys,
    lifting: &Lifting,
    dist: &DisturbanceSpec,
) -> Result<()> {
    if lifting.state_dim() != sys.state_dim() {
        return Err(Error::shape("lifting", sys.state_dim(), lifting.state_dim()));
    }
    if dist.dim() != sys.disturbance_dim() {
        return Err(Error::shape("disturbance", sys.disturbance_dim(), dist.dim()));
    }
    Ok(())
}

/// Polytope certificate with plain floating point; faces run in parallel.
pub fn certify_polytope<Sys, C>(
    cl: &ClosedLoop<'_, Sys, C>,
    lifting: &Lifting,
    eta: &Mat<f64>,
    y: &IntervalVector<f64>,
    dist: &DisturbanceSpec,
) -> Result<Certificate>
where
    Sys: System + ?Sized,
    C: Controller<f64> + Sync + ?Sized,
{
    check_dims(cl.system, lifting, dist)?;
    let h_plus = lifting.left_inverse(eta)?;
    let faces = refined_faces(lifting, y)?;
    let parts: Vec<IntervalVector<f64>> = dist.partitions().to_vec();
    let values: Vec<f64> = faces
        .par_iter()
        .map(|f| face_value(cl, lifting.h(), &h_plus, f, &parts))
        .collect::<Result<_>>()?;
    let m = lifting.lifted_dim();
    Ok(Certificate::from_field(
        values[..m].to_vec(),
        values[m..].to_vec(),
    ))
}

/// Integrate `x` and the lifted state `y = Hx` side by side and report
/// `max_t ‖H x(t) - y(t)‖∞`.
pub fn lifted_simulate_check<Sys, C>(
    cl: &ClosedLoop<'_, Sys, C>,
    lifting: &Lifting,
    eta: &Mat<f64>,
    x0: &[f64],
    disturbance: impl Fn(usize, f64) -> Vec<f64>,
    dt: f64,
    horizon: f64,
) -> Result<f64>
where
    Sys: System + ?Sized,
    C: Controller<f64> + ?Sized,
{
    let h = lifting.h();
    let h_plus = lifting.left_inverse(eta)?;
    let xs = simulate(|x, w| cl.field(x, w), x0, &disturbance, dt, horizon)?;
    let y0 = h.matvec(x0)?;
    let ys = simulate(
        |y, w| {
            let x = h_plus.matvec(y)?;
            h.matvec(&cl.field(&x, w)?)
        },
        &y0,
        &disturbance,
        dt,
        horizon,
    )?;
    let mut worst = 0.0f64;
    for (x, y) in xs.states.iter().zip(&ys.states) {
        let hx = h.matvec(x)?;
        for (a, b) in hx.iter().zip(y) {
            worst = worst.max((a - b).abs());
        }
    }
    Ok(worst)
}
