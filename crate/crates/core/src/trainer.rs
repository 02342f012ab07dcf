//! Certified training of a controller together with the lifting parameter `η`.
//!
//! Each step evaluates the lifted embedding field in plain floating point,
//! stops if it is already southeast of zero, and otherwise takes an ADAM step
//! on `L = L_data + λ Σ_i [relu(ū_i + ε) + relu(ε - l_i)]`. Faces whose hinge is
//! inactive contribute no gradient and are not taped.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::autodiff::{record, Adam, AdamConfig, Tracked};
use crate::dynamics::{Anchor, DisturbanceSpec, Model};
use crate::embedding::{Certificate, ClosedLoop};
use crate::error::{Error, Result};
use crate::interval::IntervalVector;
use crate::lifted::{check_dims, face_value, refined_faces, Face, Lifting};
use crate::matrix::Mat;
use crate::neural::Mlp;
use crate::policy::PolicyKind;
use crate::scalar::Scalar;

/// Everything that stays fixed during training.
#[derive(Clone, Debug)]
pub struct Problem {
    pub model: Model,
    pub policy: PolicyKind,
    pub lifting: Lifting,
    pub y_box: IntervalVector<f64>,
    pub disturbance: DisturbanceSpec,
    pub anchor: Anchor,
}

impl Problem {
    pub fn validate(&self) -> Result<()> {
        check_dims(&self.model, &self.lifting, &self.disturbance)?;
        refined_faces(&self.lifting, &self.y_box)?;
        Ok(())
    }

    /// Field value of one refined face for the given parameters.
    pub fn face<S: Scalar>(
        &self,
        net: &Mlp<S>,
        h_plus: &Mat<S>,
        face: &Face,
        partitions: &[IntervalVector<S>],
    ) -> Result<S> {
        let policy = self.policy.build(net.clone())?;
        let cl = ClosedLoop::new(&self.model, &policy).with_anchor(self.anchor);
        face_value(&cl, self.lifting.h(), h_plus, face, partitions)
    }

    /// Full lifted field `(lower, upper)`.
    pub fn field<S: Scalar>(&self, net: &Mlp<S>, eta: &Mat<S>) -> Result<(Vec<S>, Vec<S>)> {
        check_dims(&self.model, &self.lifting, &self.disturbance)?;
        let faces = refined_faces(&self.lifting, &self.y_box)?;
        let h_plus = self.lifting.left_inverse(eta)?;
        let parts: Vec<IntervalVector<S>> =
            self.disturbance.partitions().iter().map(|p| p.lift()).collect();
        let m = self.lifting.lifted_dim();
        let vals = faces
            .iter()
            .map(|f| self.face(net, &h_plus, f, &parts))
            .collect::<Result<Vec<S>>>()?;
        Ok((vals[..m].to_vec(), vals[m..].to_vec()))
    }

    /// Plain floating-point certificate; faces are evaluated in parallel.
    pub fn certify(&self, net: &Mlp<f64>, eta: &Mat<f64>) -> Result<Certificate> {
        check_dims(&self.model, &self.lifting, &self.disturbance)?;
        let faces = refined_faces(&self.lifting, &self.y_box)?;
        let vals = self.face_values(net, eta, &faces)?;
        let m = self.lifting.lifted_dim();
        Ok(Certificate::from_field(vals[..m].to_vec(), vals[m..].to_vec()))
    }

    fn face_values(&self, net: &Mlp<f64>, eta: &Mat<f64>, faces: &[Face]) -> Result<Vec<f64>> {
        let h_plus = self.lifting.left_inverse(eta)?;
        let parts = self.disturbance.partitions();
        faces
            .par_iter()
            .map(|f| self.face(net, &h_plus, f, parts))
            .collect()
    }
}

/// Optional supervised term.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", deny_unknown_fields)]
pub enum DataLoss {
    #[default]
    None,
    /// Mean of `‖π(x) - K x‖²` over a fresh uniform batch from a box.
    Imitation {
        gain: Mat<f64>,
        sample_lo: Vec<f64>,
        sample_hi: Vec<f64>,
        batch: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    pub lambda: f64,
    pub epsilon: f64,
    pub max_iters: usize,
    pub adam: AdamConfig,
    pub data: DataLoss,
    pub seed: u64,
    /// Train `η` alongside the network.
    pub train_eta: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            lambda: 1.0,
            epsilon: 0.02,
            max_iters: 20_000,
            adam: AdamConfig::default(),
            data: DataLoss::None,
            seed: 0,
            train_eta: true,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0) {
            return Err(Error::Config(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        if !(self.lambda >= 0.0) {
            return Err(Error::Config(format!("lambda must be nonnegative, got {}", self.lambda)));
        }
        if let DataLoss::Imitation {
            sample_lo,
            sample_hi,
            batch,
            ..
        } = &self.data
        {
            IntervalVector::from_bounds(sample_lo, sample_hi)?;
            if *batch == 0 {
                return Err(Error::Config("imitation batch must be nonempty".into()));
            }
        }
        Ok(())
    }
}

/// `Σ relu(upper_i + ε) + Σ relu(ε - lower_i)`.
pub fn invariance_loss<S: Scalar>(lower: &[S], upper: &[S], epsilon: f64) -> S {
    let mut acc = S::zero();
    for &u in upper {
        acc += (u + S::from_f64(epsilon)).relu();
    }
    for &l in lower {
        acc += (S::from_f64(epsilon) - l).relu();
    }
    acc
}

fn face_hinge<S: Scalar>(v: S, upper: bool, epsilon: f64) -> S {
    if upper {
        (v + S::from_f64(epsilon)).relu()
    } else {
        (S::from_f64(epsilon) - v).relu()
    }
}

/// Mean squared imitation error `(1/N) Σ ‖π(x_k) - K x_k‖²`.
pub fn imitation_loss<S: Scalar>(net: &Mlp<S>, gain: &Mat<f64>, samples: &[Vec<f64>]) -> Result<S> {
    if samples.is_empty() {
        return Ok(S::zero());
    }
    let mut acc = S::zero();
    for x in samples {
        let xs: Vec<S> = x.iter().map(|&v| S::from_f64(v)).collect();
        let out = net.forward(&xs)?;
        let target = gain.matvec(x)?;
        if out.len() != target.len() {
            return Err(Error::shape("imitation_loss", target.len(), out.len()));
        }
        for (o, t) in out.into_iter().zip(target) {
            acc += (o - S::from_f64(t)).powi2();
        }
    }
    Ok(acc.scale(1.0 / samples.len() as f64))
}

/// Imitation loss and its gradient with respect to the flattened network
/// parameters, by explicit backpropagation.
pub fn imitation_loss_grad(
    net: &Mlp<f64>,
    gain: &Mat<f64>,
    samples: &[Vec<f64>],
) -> Result<(f64, Vec<f64>)> {
    let layers = net.layers();
    let mut grad = vec![0.0; net.param_count()];
    if samples.is_empty() {
        return Ok((0.0, grad));
    }
    let offsets: Vec<usize> = layers
        .iter()
        .scan(0, |at, l| {
            let o = *at;
            *at += l.weight.rows() * (l.weight.cols() + 1);
            Some(o)
        })
        .collect();
    let scale = 1.0 / samples.len() as f64;
    let mut loss = 0.0;
    for x in samples {
        // forward, keeping every layer input and pre-activation
        let mut inputs = vec![x.clone()];
        let mut pre = Vec::with_capacity(layers.len());
        for (i, l) in layers.iter().enumerate() {
            let mut z = l.weight.matvec(inputs.last().unwrap())?;
            for (zj, b) in z.iter_mut().zip(&l.bias) {
                *zj += b;
            }
            pre.push(z.clone());
            if i + 1 < layers.len() {
                inputs.push(z.iter().map(|v| v.relu()).collect());
            }
        }
        let out = pre.last().unwrap();
        let target = gain.matvec(x)?;
        let mut delta: Vec<f64> = out.iter().zip(&target).map(|(o, t)| o - t).collect();
        loss += delta.iter().map(|d| d * d).sum::<f64>() * scale;
        for d in delta.iter_mut() {
            *d *= 2.0 * scale;
        }
        for li in (0..layers.len()).rev() {
            let l = &layers[li];
            let a = &inputs[li];
            let off = offsets[li];
            let (rows, cols) = (l.weight.rows(), l.weight.cols());
            for r in 0..rows {
                if delta[r] == 0.0 {
                    continue;
                }
                for c in 0..cols {
                    grad[off + r * cols + c] += delta[r] * a[c];
                }
                grad[off + rows * cols + r] += delta[r];
            }
            if li > 0 {
                let zprev = &pre[li - 1];
                delta = (0..cols)
                    .map(|c| {
                        if zprev[c] > 0.0 {
                            (0..rows).map(|r| l.weight[(r, c)] * delta[r]).sum()
                        } else {
                            0.0
                        }
                    })
                    .collect();
            }
        }
    }
    Ok((loss, grad))
}

fn sample_batch(lo: &[f64], hi: &[f64], batch: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    (0..batch)
        .map(|_| {
            lo.iter()
                .zip(hi)
                .map(|(&l, &h)| if h > l { rng.gen_range(l..h) } else { l })
                .collect()
        })
        .collect()
}

/// Full training loss at `(net, η)` for a given data batch, on any scalar.
pub fn total_loss<S: Scalar>(
    problem: &Problem,
    net: &Mlp<S>,
    eta: &Mat<S>,
    cfg: &TrainConfig,
    samples: &[Vec<f64>],
) -> Result<S> {
    let (lo, hi) = problem.field(net, eta)?;
    let inv = invariance_loss(&lo, &hi, cfg.epsilon).scale(cfg.lambda);
    let data = match &cfg.data {
        DataLoss::None => S::zero(),
        DataLoss::Imitation { gain, .. } => imitation_loss(net, gain, samples)?,
    };
    Ok(data + inv)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrainStatus {
    Certified,
    NotCertified,
}

/// One row of the loss trace, recorded before the step it describes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iteration: usize,
    pub loss: f64,
    pub data_loss: f64,
    pub invariance_loss: f64,
    pub margin: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TrainReport {
    pub status: TrainStatus,
    /// Certificate evaluations performed, including the final one.
    pub iterations: usize,
    /// ADAM steps taken.
    pub steps: usize,
    pub certificate: Certificate,
    pub best_margin: f64,
    /// Kept out of the JSON so reports are reproducible byte for byte.
    #[serde(skip)]
    pub wall_time_s: f64,
    pub eta: Mat<f64>,
    #[serde(skip)]
    pub network: Option<Mlp<f64>>,
    #[serde(skip)]
    pub trace: Vec<TraceRow>,
}

impl TrainReport {
    pub fn trace_csv(&self) -> String {
        let mut s = String::from("iteration,loss,data_loss,invariance_loss,margin\n");
        for r in &self.trace {
            s.push_str(&format!(
                "{},{},{},{},{}\n",
                r.iteration, r.loss, r.data_loss, r.invariance_loss, r.margin
            ));
        }
        s
    }
}

/// Train from `init` (with `η = 0`) until the polytope is certified or the
/// step budget runs out.
pub fn train(problem: &Problem, init: &Mlp<f64>, cfg: &TrainConfig) -> Result<TrainReport> {
    train_from(problem, init, &problem.lifting.zero_eta(), cfg)
}

pub fn train_from(
    problem: &Problem,
    init: &Mlp<f64>,
    eta0: &Mat<f64>,
    cfg: &TrainConfig,
) -> Result<TrainReport> {
    cfg.validate()?;
    problem.validate()?;
    let start = Instant::now();
    let dims = init.dims();
    let np = init.param_count();
    let (er, ec) = problem.lifting.eta_shape();
    if (eta0.rows(), eta0.cols()) != (er, ec) {
        return Err(Error::shape("train eta", format!("({er}, {ec})"), format!("({}, {})", eta0.rows(), eta0.cols())));
    }
    let mut theta = init.params();
    theta.extend_from_slice(eta0.as_slice());
    let faces = refined_faces(&problem.lifting, &problem.y_box)?;
    let m = problem.lifting.lifted_dim();
    let mut adam = Adam::new(cfg.adam, theta.len());
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut trace = Vec::new();
    let mut best_margin = f64::NEG_INFINITY;
    let mut steps = 0;

    let split = |theta: &[f64]| -> Result<(Mlp<f64>, Mat<f64>)> {
        Ok((
            Mlp::<f64>::from_params(&dims, &theta[..np])?,
            Mat::from_vec(er, ec, theta[np..].to_vec())?,
        ))
    };

    loop {
        let (net, eta) = split(&theta)?;
        let values = problem.face_values(&net, &eta, &faces)?;
        let cert = Certificate::from_field(values[..m].to_vec(), values[m..].to_vec());
        best_margin = best_margin.max(cert.margin);
        let hinges: Vec<f64> = faces
            .iter()
            .zip(&values)
            .map(|(f, &v)| face_hinge(v, f.upper, cfg.epsilon))
            .collect();
        let inv_loss: f64 = hinges.iter().sum();

        let (data_loss, data_grad) = match &cfg.data {
            DataLoss::None => (0.0, None),
            DataLoss::Imitation {
                gain,
                sample_lo,
                sample_hi,
                batch,
            } => {
                let samples = sample_batch(sample_lo, sample_hi, *batch, &mut rng);
                let (l, g) = imitation_loss_grad(&net, gain, &samples)?;
                (l, Some(g))
            }
        };
        trace.push(TraceRow {
            iteration: steps,
            loss: data_loss + cfg.lambda * inv_loss,
            data_loss,
            invariance_loss: inv_loss,
            margin: cert.margin,
        });

        if cert.certified || steps >= cfg.max_iters {
            let status = if cert.certified {
                TrainStatus::Certified
            } else {
                TrainStatus::NotCertified
            };
            return Ok(TrainReport {
                status,
                iterations: steps + 1,
                steps,
                certificate: cert,
                best_margin,
                wall_time_s: start.elapsed().as_secs_f64(),
                eta,
                network: Some(net),
                trace,
            });
        }

        let mut grad = vec![0.0; theta.len()];
        if let Some(g) = data_grad {
            grad[..np].copy_from_slice(&g);
        }
        add_invariance_gradient(problem, &dims, (er, ec), &theta, &faces, &hinges, cfg, &mut grad)?;
        if !cfg.train_eta {
            for g in grad[np..].iter_mut() {
                *g = 0.0;
            }
        }
        if grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::NonFinite("training gradient"));
        }
        adam.step(&mut theta, &grad);
        steps += 1;
    }
}

/// Adds `λ ∇L^S` to `grad`. Only faces with a positive hinge contribute, each
/// differentiated on its own tape.
#[allow(clippy::too_many_arguments)]
fn add_invariance_gradient(
    problem: &Problem,
    dims: &[usize],
    eta_shape: (usize, usize),
    theta: &[f64],
    faces: &[Face],
    hinges: &[f64],
    cfg: &TrainConfig,
    grad: &mut [f64],
) -> Result<()> {
    if cfg.lambda == 0.0 {
        return Ok(());
    }
    let np = theta.len() - eta_shape.0 * eta_shape.1;
    let active: Vec<usize> = (0..faces.len()).filter(|&k| hinges[k] > 0.0).collect();
    let face_grads: Vec<Vec<f64>> = active
        .par_iter()
        .map(|&k| face_gradient(problem, dims, np, eta_shape, theta, &faces[k], cfg.epsilon))
        .collect::<Result<_>>()?;
    for g in face_grads {
        for (acc, v) in grad.iter_mut().zip(g) {
            *acc += cfg.lambda * v;
        }
    }
    Ok(())
}

/// Total loss and its gradient with respect to `(network parameters, η)`,
/// computed exactly as in a training step. `samples` feeds the data term.
pub fn loss_gradient(
    problem: &Problem,
    net: &Mlp<f64>,
    eta: &Mat<f64>,
    cfg: &TrainConfig,
    samples: &[Vec<f64>],
) -> Result<(f64, Vec<f64>)> {
    let faces = refined_faces(&problem.lifting, &problem.y_box)?;
    let values = problem.face_values(net, eta, &faces)?;
    let hinges: Vec<f64> = faces
        .iter()
        .zip(&values)
        .map(|(f, &v)| face_hinge(v, f.upper, cfg.epsilon))
        .collect();
    let mut theta = net.params();
    let np = theta.len();
    theta.extend_from_slice(eta.as_slice());
    let mut grad = vec![0.0; theta.len()];
    let data = match &cfg.data {
        DataLoss::None => 0.0,
        DataLoss::Imitation { gain, .. } => {
            let (l, g) = imitation_loss_grad(net, gain, samples)?;
            grad[..np].copy_from_slice(&g);
            l
        }
    };
    let shape = (eta.rows(), eta.cols());
    add_invariance_gradient(problem, &net.dims(), shape, &theta, &faces, &hinges, cfg, &mut grad)?;
    Ok((data + cfg.lambda * hinges.iter().sum::<f64>(), grad))
}

/// Gradient of one face hinge with respect to all parameters, on its own tape.
fn face_gradient(
    problem: &Problem,
    dims: &[usize],
    np: usize,
    eta_shape: (usize, usize),
    theta: &[f64],
    face: &Face,
    epsilon: f64,
) -> Result<Vec<f64>> {
    let (tape, out) = record(theta, |p: &[Tracked]| -> Result<Tracked> {
        let net = Mlp::<Tracked>::from_params(dims, &p[..np])?;
        let eta = Mat::from_vec(eta_shape.0, eta_shape.1, p[np..].to_vec())?;
        let h_plus = problem.lifting.left_inverse(&eta)?;
        let parts: Vec<IntervalVector<Tracked>> =
            problem.disturbance.partitions().iter().map(|w| w.lift()).collect();
        let v = problem.face(&net, &h_plus, face, &parts)?;
        Ok(face_hinge(v, face.upper, epsilon))
    })?;
    let out = out?;
    Ok(tape.gradient(out))
}

/// Uniform random `n × k` matrix in `[-scale, scale]`, for tests and examples.
pub fn random_eta(shape: (usize, usize), scale: f64, seed: u64) -> Mat<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Mat::from_fn(shape.0, shape.1, |_, _| rng.gen_range(-scale..=scale))
}
