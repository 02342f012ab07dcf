//! Interval scalars, vectors and matrices over a generic [`Scalar`].
//!
//! No directed rounding is used: bounds are computed in ordinary floating
//! point, identically for `f64` and tracked scalars. Certificates carry a
//! margin that dominates last-ulp effects.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Mat;
use crate::scalar::Scalar;

/// Closed bounded interval `[lo, hi]` with `lo <= hi`.
#[derive(Clone, Copy, PartialEq)]
pub struct Interval<S> {
    lo: S,
    hi: S,
}

impl<S: Scalar> fmt::Debug for Interval<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo.value(), self.hi.value())
    }
}

impl<S: Scalar> Interval<S> {
    pub fn new(lo: S, hi: S) -> Result<Self> {
        // NaN fails this comparison too
        if lo.value() <= hi.value() {
            Ok(Interval { lo, hi })
        } else {
            Err(Error::InvalidInterval {
                lo: lo.value(),
                hi: hi.value(),
            })
        }
    }

    /// Smallest interval containing both values.
    #[inline]
    pub fn spanning(a: S, b: S) -> Self {
        if a.value() <= b.value() {
            Interval { lo: a, hi: b }
        } else {
            Interval { lo: b, hi: a }
        }
    }

    #[inline]
    pub fn point(x: S) -> Self {
        Interval { lo: x, hi: x }
    }

    #[inline]
    pub fn lo(&self) -> S {
        self.lo
    }

    #[inline]
    pub fn hi(&self) -> S {
        self.hi
    }

    pub fn width(&self) -> S {
        self.hi - self.lo
    }

    pub fn midpoint(&self) -> S {
        (self.lo + self.hi).scale(0.5)
    }

    pub fn is_degenerate(&self) -> bool {
        self.lo.value() == self.hi.value()
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo.value() <= x && x <= self.hi.value()
    }

    pub fn contains_zero(&self) -> bool {
        self.contains(0.0)
    }

    pub fn is_subset_of(&self, other: &Interval<S>) -> bool {
        other.lo.value() <= self.lo.value() && self.hi.value() <= other.hi.value()
    }

    pub fn to_f64(&self) -> Interval<f64> {
        Interval {
            lo: self.lo.value(),
            hi: self.hi.value(),
        }
    }

    pub fn add(self, rhs: Self) -> Self {
        Interval {
            lo: self.lo + rhs.lo,
            hi: self.hi + rhs.hi,
        }
    }

    pub fn sub(self, rhs: Self) -> Self {
        Interval {
            lo: self.lo - rhs.hi,
            hi: self.hi - rhs.lo,
        }
    }

    pub fn neg(self) -> Self {
        Interval {
            lo: -self.hi,
            hi: -self.lo,
        }
    }

    /// Product via the four corner products.
    pub fn mul(self, rhs: Self) -> Self {
        let a = self.lo * rhs.lo;
        let b = self.lo * rhs.hi;
        let c = self.hi * rhs.lo;
        let d = self.hi * rhs.hi;
        Interval {
            lo: a.min(b).min(c.min(d)),
            hi: a.max(b).max(c.max(d)),
        }
    }

    pub fn scale(self, k: S) -> Self {
        if k.value() >= 0.0 {
            Interval {
                lo: self.lo * k,
                hi: self.hi * k,
            }
        } else {
            Interval {
                lo: self.hi * k,
                hi: self.lo * k,
            }
        }
    }

    pub fn add_scalar(self, k: S) -> Self {
        Interval {
            lo: self.lo + k,
            hi: self.hi + k,
        }
    }

    pub fn recip(self) -> Result<Self> {
        if self.contains_zero() {
            return Err(Error::DivisionByZero {
                lo: self.lo.value(),
                hi: self.hi.value(),
            });
        }
        Ok(Interval {
            lo: S::one() / self.hi,
            hi: S::one() / self.lo,
        })
    }

    /// Division; a divisor containing zero is an error.
    pub fn div(self, rhs: Self) -> Result<Self> {
        Ok(self.mul(rhs.recip()?))
    }

    pub fn sqr(self) -> Self {
        if self.lo.value() >= 0.0 {
            Interval {
                lo: self.lo * self.lo,
                hi: self.hi * self.hi,
            }
        } else if self.hi.value() <= 0.0 {
            Interval {
                lo: self.hi * self.hi,
                hi: self.lo * self.lo,
            }
        } else {
            Interval {
                lo: S::zero(),
                hi: (self.lo * self.lo).max(self.hi * self.hi),
            }
        }
    }

    pub fn tanh(self) -> Self {
        Interval {
            lo: self.lo.tanh(),
            hi: self.hi.tanh(),
        }
    }

    pub fn relu(self) -> Self {
        Interval {
            lo: self.lo.relu(),
            hi: self.hi.relu(),
        }
    }

    pub fn sin(self) -> Self {
        let (a, b) = (self.lo.value(), self.hi.value());
        if b - a >= TAU {
            return Interval {
                lo: S::from_f64(-1.0),
                hi: S::one(),
            };
        }
        let (sa, sb) = (self.lo.sin(), self.hi.sin());
        let mut out = Interval::spanning(sa, sb);
        if contains_phase(a, b, FRAC_PI_2) {
            out.hi = S::one();
        }
        if contains_phase(a, b, -FRAC_PI_2) {
            out.lo = S::from_f64(-1.0);
        }
        out
    }

    pub fn cos(self) -> Self {
        let (a, b) = (self.lo.value(), self.hi.value());
        if b - a >= TAU {
            return Interval {
                lo: S::from_f64(-1.0),
                hi: S::one(),
            };
        }
        let (ca, cb) = (self.lo.cos(), self.hi.cos());
        let mut out = Interval::spanning(ca, cb);
        if contains_phase(a, b, 0.0) {
            out.hi = S::one();
        }
        if contains_phase(a, b, PI) {
            out.lo = S::from_f64(-1.0);
        }
        out
    }

    pub fn intersect(self, rhs: Self) -> Option<Self> {
        let lo = self.lo.max(rhs.lo);
        let hi = self.hi.min(rhs.hi);
        (lo.value() <= hi.value()).then_some(Interval { lo, hi })
    }

    pub fn hull(self, rhs: Self) -> Self {
        Interval {
            lo: self.lo.min(rhs.lo),
            hi: self.hi.max(rhs.hi),
        }
    }
}

impl Interval<f64> {
    pub fn lift<S: Scalar>(&self) -> Interval<S> {
        Interval {
            lo: S::from_f64(self.lo),
            hi: S::from_f64(self.hi),
        }
    }
}

impl<S: Scalar> std::ops::Add for Interval<S> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Interval::add(self, rhs)
    }
}

impl<S: Scalar> std::ops::Sub for Interval<S> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Interval::sub(self, rhs)
    }
}

impl<S: Scalar> std::ops::Mul for Interval<S> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        Interval::mul(self, rhs)
    }
}

impl<S: Scalar> std::ops::Neg for Interval<S> {
    type Output = Self;
    fn neg(self) -> Self {
        Interval::neg(self)
    }
}

/// Whether `[a, b]` contains a point `phase + 2kπ` for some integer `k`.
fn contains_phase(a: f64, b: f64, phase: f64) -> bool {
    let k = ((a - phase) / TAU).ceil();
    phase + k * TAU <= b
}

/// Box in `ℝⁿ` stored as one interval per coordinate.
#[derive(Clone, PartialEq)]
pub struct IntervalVector<S> {
    entries: Vec<Interval<S>>,
}

impl<S: Scalar> fmt::Debug for IntervalVector<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.entries.iter()).finish()
    }
}

impl<S: Scalar> IntervalVector<S> {
    pub fn new(entries: Vec<Interval<S>>) -> Self {
        IntervalVector { entries }
    }

    pub fn from_bounds(lo: &[S], hi: &[S]) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(Error::shape("IntervalVector::from_bounds", lo.len(), hi.len()));
        }
        let entries = lo
            .iter()
            .zip(hi)
            .map(|(&l, &h)| Interval::new(l, h))
            .collect::<Result<Vec<_>>>()?;
        Ok(IntervalVector { entries })
    }

    pub fn point(x: &[S]) -> Self {
        IntervalVector {
            entries: x.iter().map(|&v| Interval::point(v)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[Interval<S>] {
        &self.entries
    }

    pub fn get(&self, i: usize) -> Interval<S> {
        self.entries[i]
    }

    pub fn set(&mut self, i: usize, v: Interval<S>) {
        self.entries[i] = v;
    }

    pub fn lo(&self) -> Vec<S> {
        self.entries.iter().map(Interval::lo).collect()
    }

    pub fn hi(&self) -> Vec<S> {
        self.entries.iter().map(Interval::hi).collect()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.len() && self.entries.iter().zip(x).all(|(iv, &v)| iv.contains(v))
    }

    pub fn is_subset_of(&self, other: &IntervalVector<S>) -> bool {
        self.len() == other.len()
            && self
                .entries
                .iter()
                .zip(&other.entries)
                .all(|(a, b)| a.is_subset_of(b))
    }

    pub fn to_f64(&self) -> IntervalVector<f64> {
        IntervalVector {
            entries: self.entries.iter().map(Interval::to_f64).collect(),
        }
    }

    pub fn add(&self, rhs: &Self) -> Result<Self> {
        if self.len() != rhs.len() {
            return Err(Error::shape("IntervalVector::add", self.len(), rhs.len()));
        }
        Ok(IntervalVector {
            entries: self
                .entries
                .iter()
                .zip(&rhs.entries)
                .map(|(&a, &b)| a.add(b))
                .collect(),
        })
    }

    /// The lower face `[lo, hi_{i:lo}]`.
    pub fn lower_face(&self, i: usize) -> Result<Self> {
        let mut face = self.clone();
        let e = *self
            .entries
            .get(i)
            .ok_or(Error::IndexOutOfRange { index: i, len: self.len() })?;
        face.entries[i] = Interval::point(e.lo);
        Ok(face)
    }

    /// The upper face `[lo_{i:hi}, hi]`.
    pub fn upper_face(&self, i: usize) -> Result<Self> {
        let mut face = self.clone();
        let e = *self
            .entries
            .get(i)
            .ok_or(Error::IndexOutOfRange { index: i, len: self.len() })?;
        face.entries[i] = Interval::point(e.hi);
        Ok(face)
    }

    /// Concatenate boxes.
    pub fn concat(&self, rhs: &Self) -> Self {
        let mut entries = self.entries.clone();
        entries.extend_from_slice(&rhs.entries);
        IntervalVector { entries }
    }
}

impl IntervalVector<f64> {
    pub fn lift<S: Scalar>(&self) -> IntervalVector<S> {
        IntervalVector {
            entries: self.entries.iter().map(Interval::lift).collect(),
        }
    }

    pub fn widths(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.hi - e.lo).collect()
    }
}

/// JSON form `{"lo": [...], "hi": [...]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxBounds {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl From<&IntervalVector<f64>> for BoxBounds {
    fn from(b: &IntervalVector<f64>) -> Self {
        BoxBounds { lo: b.lo(), hi: b.hi() }
    }
}

impl TryFrom<&BoxBounds> for IntervalVector<f64> {
    type Error = Error;
    fn try_from(b: &BoxBounds) -> Result<Self> {
        IntervalVector::from_bounds(&b.lo, &b.hi)
    }
}

/// Interval matrix, row-major.
#[derive(Clone, PartialEq)]
pub struct IntervalMatrix<S> {
    rows: usize,
    cols: usize,
    data: Vec<Interval<S>>,
}

impl<S: Scalar> fmt::Debug for IntervalMatrix<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut l = f.debug_list();
        for i in 0..self.rows {
            l.entry(&&self.data[i * self.cols..(i + 1) * self.cols]);
        }
        l.finish()
    }
}

impl<S: Scalar> IntervalMatrix<S> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntervalMatrix {
            rows,
            cols,
            data: vec![Interval::point(S::zero()); rows * cols],
        }
    }

    pub fn from_point(m: &Mat<S>) -> Self {
        IntervalMatrix {
            rows: m.rows(),
            cols: m.cols(),
            data: m.as_slice().iter().map(|&x| Interval::point(x)).collect(),
        }
    }

    pub fn from_bounds(lo: &Mat<S>, hi: &Mat<S>) -> Result<Self> {
        if lo.rows() != hi.rows() || lo.cols() != hi.cols() {
            return Err(Error::shape(
                "IntervalMatrix::from_bounds",
                format!("{}x{}", lo.rows(), lo.cols()),
                format!("{}x{}", hi.rows(), hi.cols()),
            ));
        }
        let data = lo
            .as_slice()
            .iter()
            .zip(hi.as_slice())
            .map(|(&l, &h)| Interval::new(l, h))
            .collect::<Result<Vec<_>>>()?;
        Ok(IntervalMatrix {
            rows: lo.rows(),
            cols: lo.cols(),
            data,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Interval<S> {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Interval<S>) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[Interval<S>] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn lo(&self) -> Mat<S> {
        Mat::from_fn(self.rows, self.cols, |i, j| self.get(i, j).lo)
    }

    pub fn hi(&self) -> Mat<S> {
        Mat::from_fn(self.rows, self.cols, |i, j| self.get(i, j).hi)
    }

    pub fn matmul(&self, rhs: &IntervalMatrix<S>) -> Result<IntervalMatrix<S>> {
        if self.cols != rhs.rows {
            return Err(Error::shape(
                "IntervalMatrix::matmul",
                format!("inner dimension {}", self.cols),
                rhs.rows,
            ));
        }
        let mut out = IntervalMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for j in 0..rhs.cols {
                let mut acc = Interval::point(S::zero());
                for k in 0..self.cols {
                    acc = acc.add(self.get(i, k).mul(rhs.get(k, j)));
                }
                out.set(i, j, acc);
            }
        }
        Ok(out)
    }

    pub fn matvec(&self, x: &IntervalVector<S>) -> Result<IntervalVector<S>> {
        if self.cols != x.len() {
            return Err(Error::shape("IntervalMatrix::matvec", self.cols, x.len()));
        }
        Ok(IntervalVector::new(
            (0..self.rows)
                .map(|i| {
                    let mut acc = Interval::point(S::zero());
                    for (k, xk) in x.entries().iter().enumerate() {
                        acc = acc.add(self.get(i, k).mul(*xk));
                    }
                    acc
                })
                .collect(),
        ))
    }
}

/// Image of a box under a real matrix: `[A⁺lo + A⁻hi, A⁺hi + A⁻lo]`.
pub fn matvec_box<S: Scalar>(a: &Mat<S>, x: &IntervalVector<S>) -> Result<IntervalVector<S>> {
    if a.cols() != x.len() {
        return Err(Error::shape("matvec_box", a.cols(), x.len()));
    }
    let lo = x.lo();
    let hi = x.hi();
    let entries = (0..a.rows())
        .map(|i| {
            let (l, h) = affine_row_bounds(a.row(i), &lo, &hi);
            Interval::spanning(l, h)
        })
        .collect();
    Ok(IntervalVector::new(entries))
}

/// Minimum and maximum of `c·x` over the box `[lo, hi]`.
#[inline]
pub fn affine_row_bounds<S: Scalar>(c: &[S], lo: &[S], hi: &[S]) -> (S, S) {
    let mut min = S::zero();
    let mut max = S::zero();
    for ((&cj, &l), &h) in c.iter().zip(lo).zip(hi) {
        if cj.is_structural_zero() {
            continue;
        }
        if cj.value() >= 0.0 {
            min += cj * l;
            max += cj * h;
        } else {
            min += cj * h;
            max += cj * l;
        }
    }
    (min, max)
}

/// Southeast order against zero: true iff every lower-part entry is `>= 0`
/// and every upper-part entry is `<= 0`.
pub fn se_geq_zero(lower: &[f64], upper: &[f64]) -> bool {
    lower.iter().all(|&v| v >= 0.0) && upper.iter().all(|&v| v <= 0.0)
}

/// The `x_{i:y}` operator: `x` with entry `i` replaced by `y_i`.
pub fn replace_entry<S: Copy>(x: &[S], i: usize, y: &[S]) -> Result<Vec<S>> {
    if x.len() != y.len() {
        return Err(Error::shape("replace_entry", x.len(), y.len()));
    }
    if i >= x.len() {
        return Err(Error::IndexOutOfRange {
            index: i,
            len: x.len(),
        });
    }
    let mut out = x.to_vec();
    out[i] = y[i];
    Ok(out)
}
