use crate::error::{Error, Result};
use crate::interval::{Interval, IntervalMatrix, IntervalVector};
use crate::matrix::Mat;
use crate::neural::{crown_rows, AffineRelaxation, Controller, Mlp};
use crate::scalar::Scalar;

use super::{JacobianBounds, System};

/// `N` vehicles with `ṗⱼ = vⱼ`, `v̇ⱼ = σ(uⱼ)(1 + wⱼ)` and the saturation
/// `σ(u) = u_lim tanh(u / u_lim)`. State is `(p₁, v₁, …, p_N, v_N)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Platoon {
    vehicles: usize,
    pub u_lim: f64,
}

impl Platoon {
    pub fn new(vehicles: usize) -> Result<Self> {
        if vehicles < 1 {
            return Err(Error::Config("platoon needs at least one vehicle".into()));
        }
        Ok(Platoon {
            vehicles,
            u_lim: 10.0,
        })
    }

    pub fn vehicles(&self) -> usize {
        self.vehicles
    }

    pub fn saturate<S: Scalar>(&self, u: S) -> S {
        (u.scale(1.0 / self.u_lim)).tanh().scale(self.u_lim)
    }

    /// Lifting matrix `I_N ⊗ [[1,0],[0,1],[1,1]]`.
    pub fn lifting_matrix(&self) -> Mat<f64> {
        let block = Mat::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]]).unwrap();
        Mat::<f64>::identity(self.vehicles).kron(&block)
    }

    /// Upper bounds `(1,3,9,1,3,9,…) ⊗ (0.1, 0.1, 0.08)`; lower bounds are the
    /// negation.
    pub fn lifted_upper_bounds(&self) -> Vec<f64> {
        const SCALE: [f64; 3] = [1.0, 3.0, 9.0];
        (0..self.vehicles)
            .flat_map(|j| [0.1, 0.1, 0.08].map(|b| b * SCALE[j % 3]))
            .collect()
    }
}

impl System for Platoon {
    fn state_dim(&self) -> usize {
        2 * self.vehicles
    }

    fn input_dim(&self) -> usize {
        self.vehicles
    }

    fn disturbance_dim(&self) -> usize {
        self.vehicles
    }

    fn eval<S: Scalar>(&self, x: &[S], u: &[S], w: &[S]) -> Vec<S> {
        let mut f = Vec::with_capacity(2 * self.vehicles);
        for j in 0..self.vehicles {
            f.push(x[2 * j + 1]);
            f.push(self.saturate(u[j]) * (S::one() + w[j]));
        }
        f
    }

    fn jacobian<S: Scalar>(
        &self,
        x: &IntervalVector<S>,
        u: &IntervalVector<S>,
        w: &IntervalVector<S>,
    ) -> Result<JacobianBounds<S>> {
        let n = self.vehicles;
        if x.len() != 2 * n || u.len() != n || w.len() != n {
            return Err(Error::shape(
                "Platoon::jacobian",
                format!("({}, {n}, {n})", 2 * n),
                format!("({}, {}, {})", x.len(), u.len(), w.len()),
            ));
        }
        let one = Interval::point(S::one());
        let lim = S::from_f64(self.u_lim);
        let inv = S::from_f64(1.0 / self.u_lim);
        let mut jx = IntervalMatrix::zeros(2 * n, 2 * n);
        let mut ju = IntervalMatrix::zeros(2 * n, n);
        let mut jw = IntervalMatrix::zeros(2 * n, n);
        for j in 0..n {
            jx.set(2 * j, 2 * j + 1, one);
            let t = u.get(j).scale(inv).tanh();
            // σ'(u) = 1 - tanh²(u / u_lim)
            let dsig = one - t.sqr();
            ju.set(2 * j + 1, j, dsig * (one + w.get(j)));
            jw.set(2 * j + 1, j, t.scale(lim));
        }
        Ok(JacobianBounds {
            x: jx,
            u: ju,
            w: jw,
        })
    }

    fn input_support(&self, row: usize) -> Vec<usize> {
        if row % 2 == 1 {
            vec![row / 2]
        } else {
            vec![]
        }
    }
}

/// Shared policy `uⱼ = π(Oⱼ x)` for every vehicle.
///
/// Vehicles at 0-based positions 0, 3, 6, … are leaders and observe
/// `(xⱼ, xⱼ₋₃ - xⱼ, xⱼ - xⱼ₊₃)`; the others observe `(0, xⱼ₋₁ - xⱼ, xⱼ - xⱼ₊₁)`.
/// Neighbours outside the platoon are the zero state. Each follower tracks a
/// predecessor whose lifted box is a third of its own.
#[derive(Clone, Debug)]
pub struct PlatoonPolicy<S: Scalar> {
    pub net: Mlp<S>,
    observations: Vec<Mat<f64>>,
}

impl<S: Scalar> PlatoonPolicy<S> {
    pub fn new(net: Mlp<S>, vehicles: usize) -> Result<Self> {
        if net.input_dim() != 6 || net.output_dim() != 1 {
            return Err(Error::Config(format!(
                "platoon policy must map 6 inputs to 1 output, got {} -> {}",
                net.input_dim(),
                net.output_dim()
            )));
        }
        Ok(PlatoonPolicy {
            net,
            observations: (0..vehicles).map(|j| observation_map(j, vehicles)).collect(),
        })
    }

    pub fn vehicles(&self) -> usize {
        self.observations.len()
    }

    pub fn observation(&self, j: usize) -> &Mat<f64> {
        &self.observations[j]
    }
}

/// 6 × 2N matrix `Oⱼ` with `Oⱼ x` the observation of vehicle `j` (0-based).
pub fn observation_map(j: usize, vehicles: usize) -> Mat<f64> {
    let mut o = Mat::zeros(6, 2 * vehicles);
    let mut put = |slot: usize, vehicle: isize, sign: f64| {
        if vehicle >= 0 && (vehicle as usize) < vehicles {
            let v = vehicle as usize;
            o[(2 * slot, 2 * v)] += sign;
            o[(2 * slot + 1, 2 * v + 1)] += sign;
        }
    };
    let j = j as isize;
    let step = if j % 3 == 0 { 3 } else { 1 };
    if step == 3 {
        put(0, j, 1.0);
    }
    put(1, j - step, 1.0);
    put(1, j, -1.0);
    put(2, j, 1.0);
    put(2, j + step, -1.0);
    o
}

impl<S: Scalar> Controller<S> for PlatoonPolicy<S> {
    fn input_dim(&self) -> usize {
        2 * self.vehicles()
    }

    fn output_dim(&self) -> usize {
        self.vehicles()
    }

    fn forward(&self, x: &[S]) -> Result<Vec<S>> {
        self.observations
            .iter()
            .map(|o| {
                let obs = o.lift::<S>().matvec(x)?;
                Ok(self.net.forward(&obs)?[0])
            })
            .collect()
    }

    fn relax(&self, domain: &IntervalVector<S>, outputs: &[usize]) -> Result<AffineRelaxation<S>> {
        let n = self.input_dim();
        let mut c_lo = Mat::zeros(outputs.len(), n);
        let mut c_hi = Mat::zeros(outputs.len(), n);
        let mut d_lo = Vec::with_capacity(outputs.len());
        let mut d_hi = Vec::with_capacity(outputs.len());
        for (r, &j) in outputs.iter().enumerate() {
            if j >= self.vehicles() {
                return Err(Error::IndexOutOfRange {
                    index: j,
                    len: self.vehicles(),
                });
            }
            let composed = self.net.compose_input(&self.observations[j])?;
            let rel = crown_rows(&composed, domain, &[0])?;
            for c in 0..n {
                c_lo[(r, c)] = rel.c_lo[(0, c)];
                c_hi[(r, c)] = rel.c_hi[(0, c)];
            }
            d_lo.push(rel.d_lo[0]);
            d_hi.push(rel.d_hi[0]);
        }
        Ok(AffineRelaxation {
            c_lo,
            c_hi,
            d_lo,
            d_hi,
            domain: domain.clone(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn saturation_limits() {
        let p = Platoon::new(1).unwrap();
        assert_eq!(p.saturate(0.0), 0.0);
        assert!((p.saturate(1e6) - 10.0).abs() < 1e-12);
        assert!((p.saturate(-1e6) + 10.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_empty_platoon() {
        assert!(Platoon::new(0).is_err());
    }

    #[test]
    fn observation_maps() {
        // vehicle states x0 = (1,2), x1 = (3,4), x2 = (5,6), x3 = (7,8)
        let x: Vec<f64> = (0..8).map(|k| k as f64 + 1.0).collect();
        // leader 0 observes (x0, 0 - x0, x0 - x3)
        let o = observation_map(0, 4).matvec(&x).unwrap();
        assert_eq!(o, vec![1.0, 2.0, -1.0, -2.0, -6.0, -6.0]);
        // follower 1 observes (0, x0 - x1, x1 - x2)
        let o = observation_map(1, 4).matvec(&x).unwrap();
        assert_eq!(o, vec![0.0, 0.0, -2.0, -2.0, -2.0, -2.0]);
        // leader 3 observes (x3, x0 - x3, x3 - 0)
        let o = observation_map(3, 4).matvec(&x).unwrap();
        assert_eq!(o, vec![7.0, 8.0, -6.0, -6.0, 7.0, 8.0]);
        // last follower of 3 observes (0, x1 - x2, x2 - 0)
        let o = observation_map(2, 3).matvec(&x[..6]).unwrap();
        assert_eq!(o, vec![0.0, 0.0, -2.0, -2.0, 5.0, 6.0]);
    }

    #[test]
    fn follower_inputs_translation_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let net = Mlp::random(&[6, 8, 1], &mut rng).unwrap();
        let pol = PlatoonPolicy::new(net, 5).unwrap();
        let x: Vec<f64> = (0..10).map(|k| (k as f64 * 0.37).sin()).collect();
        let shifted: Vec<f64> = x.iter().enumerate().map(|(k, v)| if k % 2 == 0 { v + 0.5 } else { *v }).collect();
        let a = pol.forward(&x).unwrap();
        let b = pol.forward(&shifted).unwrap();
        // vehicles 1 and 2 are followers with both neighbours inside
        for j in [1, 2] {
            assert!((a[j] - b[j]).abs() < 1e-12);
        }
    }

    #[test]
    fn lifted_bounds_pattern() {
        let p = Platoon::new(4).unwrap();
        let y = p.lifted_upper_bounds();
        let expect = [0.1, 0.1, 0.08, 0.3, 0.3, 0.24, 0.9, 0.9, 0.72, 0.1, 0.1, 0.08];
        for (a, b) in y.iter().zip(expect) {
            assert!((a - b).abs() < 1e-15);
        }
        let h = p.lifting_matrix();
        assert_eq!((h.rows(), h.cols()), (12, 8));
    }
}
