//! Open-loop dynamics `ẋ = f(x, u, w)`, mixed-Jacobian bounds, disturbance
//! partitions and a fixed-step RK4 integrator.

mod linear;
mod platoon;
mod segway;

pub use linear::LinearSystem;
pub use platoon::{Platoon, PlatoonPolicy};
pub use segway::{Segway, SEGWAY_COEFFS};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::{Interval, IntervalMatrix, IntervalVector};
use crate::scalar::Scalar;

/// Interval Jacobian blocks `(∂f/∂x, ∂f/∂u, ∂f/∂w)`.
#[derive(Clone, Debug)]
pub struct JacobianBounds<S: Scalar> {
    pub x: IntervalMatrix<S>,
    pub u: IntervalMatrix<S>,
    pub w: IntervalMatrix<S>,
}

/// An open-loop system with hand-coded interval Jacobians.
pub trait System: Sync {
    fn state_dim(&self) -> usize;
    fn input_dim(&self) -> usize;
    fn disturbance_dim(&self) -> usize;

    fn eval<S: Scalar>(&self, x: &[S], u: &[S], w: &[S]) -> Vec<S>;

    /// Interval enclosure of the Jacobians over the given boxes.
    fn jacobian<S: Scalar>(
        &self,
        x: &IntervalVector<S>,
        u: &IntervalVector<S>,
        w: &IntervalVector<S>,
    ) -> Result<JacobianBounds<S>>;

    /// Inputs that row `row` of `f` depends on. Callers only bound these
    /// controller outputs, so over-reporting is safe and under-reporting is not.
    fn input_support(&self, row: usize) -> Vec<usize> {
        let _ = row;
        (0..self.input_dim()).collect()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Corner {
    #[default]
    Lower,
    Upper,
}

impl Corner {
    fn pick<S: Scalar>(self, b: &IntervalVector<S>) -> Vec<S> {
        match self {
            Corner::Lower => b.lo(),
            Corner::Upper => b.hi(),
        }
    }
}

/// Which coordinates sit at the anchor while column `j` of the mixed
/// Jacobian is evaluated. Both orders give a valid enclosure.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pinning {
    /// Coordinates before `j` are pinned, `j` and later span the box.
    #[default]
    Before,
    /// Coordinates after `j` are pinned.
    After,
}

/// Corner of the `(x, u, w)` box used as the mean-value anchor, plus the
/// pinning order of the componentwise expansion.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Anchor {
    pub x: Corner,
    pub u: Corner,
    pub w: Corner,
    pub pinning: Pinning,
}

/// Mixed-Jacobian bounds with their anchor point.
#[derive(Clone, Debug)]
pub struct MixedJacobian<S: Scalar> {
    pub m: JacobianBounds<S>,
    pub x_anchor: Vec<S>,
    pub u_anchor: Vec<S>,
    pub w_anchor: Vec<S>,
}

/// Mixed-Jacobian enclosure
/// `f(z) ∈ f(ẑ) + M_x (x - x̂) + M_u (u - û) + M_w (w - ŵ)` for all `z` in the
/// box, with `ẑ` the chosen corner.
///
/// Coordinates are ordered `(x, u, w)`. Column `j` of `M` is the interval
/// Jacobian evaluated on the box whose coordinates before (or after, see
/// [`Pinning`]) `j` are pinned to the anchor, which is what the componentwise
/// mean value theorem needs.
pub fn mixed_jacobian_bound<S: Scalar, Sys: System + ?Sized>(
    sys: &Sys,
    x: &IntervalVector<S>,
    u: &IntervalVector<S>,
    w: &IntervalVector<S>,
    anchor: Anchor,
) -> Result<MixedJacobian<S>> {
    let (n, p, q) = (sys.state_dim(), sys.input_dim(), sys.disturbance_dim());
    if x.len() != n || u.len() != p || w.len() != q {
        return Err(Error::shape(
            "mixed_jacobian_bound",
            format!("({n}, {p}, {q})"),
            format!("({}, {}, {})", x.len(), u.len(), w.len()),
        ));
    }
    let xa = anchor.x.pick(x);
    let ua = anchor.u.pick(u);
    let wa = anchor.w.pick(w);

    let mut mx = IntervalMatrix::zeros(n, n);
    let mut mu = IntervalMatrix::zeros(n, p);
    let mut mw = IntervalMatrix::zeros(n, q);

    let pin = |b: &IntervalVector<S>, a: &[S], from: usize| {
        let mut out = b.clone();
        for k in from..b.len() {
            out.set(k, Interval::point(a[k]));
        }
        out
    };

    // Pin coordinates `..to` of `b`.
    let pin_head = |b: &IntervalVector<S>, a: &[S], to: usize| {
        let mut out = b.clone();
        for k in 0..to.min(b.len()) {
            out.set(k, Interval::point(a[k]));
        }
        out
    };

    for j in 0..n + p + q {
        let (bx, bu, bw) = match anchor.pinning {
            Pinning::After if j < n => (pin(x, &xa, j + 1), pin(u, &ua, 0), pin(w, &wa, 0)),
            Pinning::After if j < n + p => (x.clone(), pin(u, &ua, j - n + 1), pin(w, &wa, 0)),
            Pinning::After => (x.clone(), u.clone(), pin(w, &wa, j - n - p + 1)),
            Pinning::Before if j < n => (pin_head(x, &xa, j), u.clone(), w.clone()),
            Pinning::Before if j < n + p => (pin(x, &xa, 0), pin_head(u, &ua, j - n), w.clone()),
            Pinning::Before => (pin(x, &xa, 0), pin(u, &ua, 0), pin_head(w, &wa, j - n - p)),
        };
        let jac = sys.jacobian(&bx, &bu, &bw)?;
        for i in 0..n {
            if j < n {
                mx.set(i, j, jac.x.get(i, j));
            } else if j < n + p {
                mu.set(i, j - n, jac.u.get(i, j - n));
            } else {
                mw.set(i, j - n - p, jac.w.get(i, j - n - p));
            }
        }
    }
    Ok(MixedJacobian {
        m: JacobianBounds {
            x: mx,
            u: mu,
            w: mw,
        },
        x_anchor: xa,
        u_anchor: ua,
        w_anchor: wa,
    })
}

/// Disturbance box together with a covering partition.
#[derive(Clone, Debug, PartialEq)]
pub struct DisturbanceSpec {
    bounds: IntervalVector<f64>,
    partitions: Vec<IntervalVector<f64>>,
}

impl DisturbanceSpec {
    pub fn whole(bounds: IntervalVector<f64>) -> Self {
        DisturbanceSpec {
            partitions: vec![bounds.clone()],
            bounds,
        }
    }

    /// Box `[-r, r]` per coordinate.
    pub fn symmetric(radius: &[f64]) -> Result<Self> {
        let lo: Vec<f64> = radius.iter().map(|r| -r).collect();
        Ok(Self::whole(IntervalVector::from_bounds(&lo, radius)?))
    }

    /// Bisect every coordinate of positive width at its midpoint, giving
    /// `2^k` sub-boxes for `k` such coordinates.
    pub fn bisected(bounds: IntervalVector<f64>) -> Self {
        let mut parts = vec![bounds.clone()];
        for k in 0..bounds.len() {
            let iv = bounds.get(k);
            if iv.width() <= 0.0 {
                continue;
            }
            let mid = iv.midpoint();
            let halves = [
                Interval::spanning(iv.lo(), mid),
                Interval::spanning(mid, iv.hi()),
            ];
            parts = parts
                .into_iter()
                .flat_map(|p| {
                    halves.iter().map(move |&h| {
                        let mut q = p.clone();
                        q.set(k, h);
                        q
                    })
                })
                .collect();
        }
        DisturbanceSpec {
            bounds,
            partitions: parts,
        }
    }

    /// Build from a custom partition; every piece must lie in `bounds`.
    pub fn from_partitions(
        bounds: IntervalVector<f64>,
        partitions: Vec<IntervalVector<f64>>,
    ) -> Result<Self> {
        if partitions.is_empty() {
            return Err(Error::EmptyPartition);
        }
        if partitions.iter().any(|p| !p.is_subset_of(&bounds)) {
            return Err(Error::Config("partition piece outside disturbance box".into()));
        }
        Ok(DisturbanceSpec { bounds, partitions })
    }

    pub fn bounds(&self) -> &IntervalVector<f64> {
        &self.bounds
    }

    pub fn partitions(&self) -> &[IntervalVector<f64>] {
        &self.partitions
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }
}

/// Worst case over partitions: componentwise min of the lower parts and max
/// of the upper parts.
pub fn partition_minmax_field<S: Scalar>(fields: &[(Vec<S>, Vec<S>)]) -> Result<(Vec<S>, Vec<S>)> {
    let (first, rest) = fields.split_first().ok_or(Error::EmptyPartition)?;
    let mut lo = first.0.clone();
    let mut hi = first.1.clone();
    for (l, h) in rest {
        if l.len() != lo.len() || h.len() != hi.len() {
            return Err(Error::shape("partition_minmax_field", lo.len(), l.len()));
        }
        for (a, &b) in lo.iter_mut().zip(l) {
            *a = a.min(b);
        }
        for (a, &b) in hi.iter_mut().zip(h) {
            *a = a.max(b);
        }
    }
    Ok((lo, hi))
}

/// Time grid and states of an integrated trajectory.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
}

/// Classical fixed-step RK4 for `ẋ = field(x, w)`, with `w` held constant over
/// each step as returned by `disturbance(step, t)`.
pub fn simulate(
    mut field: impl FnMut(&[f64], &[f64]) -> Result<Vec<f64>>,
    x0: &[f64],
    mut disturbance: impl FnMut(usize, f64) -> Vec<f64>,
    dt: f64,
    horizon: f64,
) -> Result<Trajectory> {
    if !(dt > 0.0) || !(horizon >= 0.0) {
        return Err(Error::Config(format!(
            "invalid time grid: dt = {dt}, horizon = {horizon}"
        )));
    }
    let steps = (horizon / dt).round() as usize;
    let mut traj = Trajectory {
        times: Vec::with_capacity(steps + 1),
        states: Vec::with_capacity(steps + 1),
    };
    let mut x = x0.to_vec();
    traj.times.push(0.0);
    traj.states.push(x.clone());
    let axpy = |x: &[f64], k: &[f64], h: f64| -> Vec<f64> {
        x.iter().zip(k).map(|(a, b)| a + h * b).collect()
    };
    for s in 0..steps {
        let t = s as f64 * dt;
        let w = disturbance(s, t);
        let k1 = field(&x, &w)?;
        let k2 = field(&axpy(&x, &k1, dt / 2.0), &w)?;
        let k3 = field(&axpy(&x, &k2, dt / 2.0), &w)?;
        let k4 = field(&axpy(&x, &k3, dt), &w)?;
        for i in 0..x.len() {
            x[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("simulate"));
        }
        traj.times.push((s + 1) as f64 * dt);
        traj.states.push(x.clone());
    }
    Ok(traj)
}

/// Piecewise-constant disturbance signal, one value per hold interval.
#[derive(Clone, Debug)]
pub struct PiecewiseConstant {
    pub hold: f64,
    pub values: Vec<Vec<f64>>,
}

impl PiecewiseConstant {
    /// Uniform samples from `bounds`, enough to cover `horizon`.
    pub fn sample(
        bounds: &IntervalVector<f64>,
        hold: f64,
        horizon: f64,
        rng: &mut impl rand::Rng,
    ) -> Self {
        let count = (horizon / hold).ceil() as usize + 1;
        let values = (0..count)
            .map(|_| {
                bounds
                    .entries()
                    .iter()
                    .map(|iv| {
                        if iv.width() > 0.0 {
                            rng.gen_range(iv.lo()..=iv.hi())
                        } else {
                            iv.lo()
                        }
                    })
                    .collect()
            })
            .collect();
        PiecewiseConstant { hold, values }
    }

    pub fn at(&self, t: f64) -> Vec<f64> {
        let k = ((t / self.hold).floor() as usize).min(self.values.len() - 1);
        self.values[k].clone()
    }
}

/// Built-in models behind one type, for configuration-driven use.
#[derive(Clone, Debug)]
pub enum Model {
    Linear(LinearSystem),
    Segway(Segway),
    Platoon(Platoon),
}

macro_rules! dispatch {
    ($self:ident, $m:ident => $e:expr) => {
        match $self {
            Model::Linear($m) => $e,
            Model::Segway($m) => $e,
            Model::Platoon($m) => $e,
        }
    };
}

impl System for Model {
    fn state_dim(&self) -> usize {
        dispatch!(self, m => m.state_dim())
    }

    fn input_dim(&self) -> usize {
        dispatch!(self, m => m.input_dim())
    }

    fn disturbance_dim(&self) -> usize {
        dispatch!(self, m => m.disturbance_dim())
    }

    fn eval<S: Scalar>(&self, x: &[S], u: &[S], w: &[S]) -> Vec<S> {
        dispatch!(self, m => m.eval(x, u, w))
    }

    fn jacobian<S: Scalar>(
        &self,
        x: &IntervalVector<S>,
        u: &IntervalVector<S>,
        w: &IntervalVector<S>,
    ) -> Result<JacobianBounds<S>> {
        dispatch!(self, m => m.jacobian(x, u, w))
    }

    fn input_support(&self, row: usize) -> Vec<usize> {
        dispatch!(self, m => m.input_support(row))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// ẋ = x², used to check the mean-value enclosure by hand.
    struct Square;

    impl System for Square {
        fn state_dim(&self) -> usize {
            1
        }
        fn input_dim(&self) -> usize {
            0
        }
        fn disturbance_dim(&self) -> usize {
            0
        }
        fn eval<S: Scalar>(&self, x: &[S], _: &[S], _: &[S]) -> Vec<S> {
            vec![x[0] * x[0]]
        }
        fn jacobian<S: Scalar>(
            &self,
            x: &IntervalVector<S>,
            _: &IntervalVector<S>,
            _: &IntervalVector<S>,
        ) -> Result<JacobianBounds<S>> {
            let mut jx = IntervalMatrix::zeros(1, 1);
            jx.set(0, 0, x.get(0).scale(S::from_f64(2.0)));
            Ok(JacobianBounds {
                x: jx,
                u: IntervalMatrix::zeros(1, 0),
                w: IntervalMatrix::zeros(1, 0),
            })
        }
    }

    #[test]
    fn square_mixed_jacobian() {
        let x = IntervalVector::from_bounds(&[1.0], &[2.0]).unwrap();
        let e = IntervalVector::new(vec![]);
        let mj = mixed_jacobian_bound(&Square, &x, &e, &e, Anchor::default()).unwrap();
        assert_eq!(mj.m.x.get(0, 0), Interval::new(2.0, 4.0).unwrap());
        assert_eq!(mj.x_anchor, vec![1.0]);
        for k in 0..=100 {
            let xv = 1.0 + k as f64 / 100.0;
            let lo = 1.0 + 2.0 * (xv - 1.0);
            let hi = 1.0 + 4.0 * (xv - 1.0);
            assert!(lo <= xv * xv && xv * xv <= hi);
        }
    }

    #[test]
    fn minmax_over_partitions() {
        let single = vec![(vec![1.0], vec![-1.0])];
        assert_eq!(partition_minmax_field(&single).unwrap(), (vec![1.0], vec![-1.0]));
        let two = vec![(vec![1.0], vec![-1.0]), (vec![0.5], vec![-2.0])];
        assert_eq!(partition_minmax_field(&two).unwrap(), (vec![0.5], vec![-1.0]));
        assert!(matches!(
            partition_minmax_field::<f64>(&[]),
            Err(Error::EmptyPartition)
        ));
    }

    #[test]
    fn bisection_covers_active_coordinates_only() {
        let b = IntervalVector::from_bounds(&[-1.0, 0.0, -0.5], &[1.0, 0.0, 0.5]).unwrap();
        let d = DisturbanceSpec::bisected(b.clone());
        assert_eq!(d.partitions().len(), 4);
        for p in d.partitions() {
            assert!(p.is_subset_of(&b));
            assert_eq!(p.get(1), Interval::point(0.0));
        }
        let total: f64 = d
            .partitions()
            .iter()
            .map(|p| p.get(0).width() * p.get(2).width())
            .sum();
        assert!((total - 2.0).abs() < 1e-15);
    }

    #[test]
    fn rk4_exponential_decay() {
        let traj = simulate(|x, _| Ok(vec![-x[0]]), &[1.0], |_, _| vec![], 1e-3, 1.0).unwrap();
        let last = traj.states.last().unwrap()[0];
        assert!((last - (-1.0f64).exp()).abs() < 1e-9);
        assert_eq!(traj.times.len(), 1001);
    }

    #[test]
    fn rk4_zero_field_is_constant() {
        let traj = simulate(|_, _| Ok(vec![0.0, 0.0]), &[0.3, -2.0], |_, _| vec![], 0.1, 2.0).unwrap();
        assert!(traj.states.iter().all(|s| s == &vec![0.3, -2.0]));
    }

    #[test]
    fn rk4_horizon_zero_and_bad_step() {
        let traj = simulate(|x, _| Ok(vec![-x[0]]), &[1.0], |_, _| vec![], 0.1, 0.0).unwrap();
        assert_eq!(traj.states.len(), 1);
        assert!(simulate(|x, _| Ok(vec![-x[0]]), &[1.0], |_, _| vec![], 0.0, 1.0).is_err());
    }
}
