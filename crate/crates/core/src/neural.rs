//! Feedforward ReLU controllers and CROWN linear bound propagation.
//!
//! [`crown`] produces a local affine relaxation
//! `C_lo·x + d_lo <= π(x) <= C_hi·x + d_hi` valid on an input box. Hidden
//! pre-activation bounds are themselves obtained by backward propagation
//! through all earlier layers (full CROWN), not by interval propagation.
//!
//! Unstable neurons (`l < 0 < u`) use the chord `u/(u-l)·(z - l)` as upper
//! bound and `α·z` as lower bound with `α = 1` if `u >= -l`, else `α = 0`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::{affine_row_bounds, matvec_box, Interval, IntervalVector};
use crate::matrix::Mat;
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub struct Layer<S> {
    pub weight: Mat<S>,
    pub bias: Vec<S>,
}

/// Multilayer perceptron: ReLU on every hidden layer, identity on the output.
#[derive(Clone, Debug, PartialEq)]
pub struct Mlp<S> {
    layers: Vec<Layer<S>>,
}

impl<S: Scalar> Mlp<S> {
    pub fn new(layers: Vec<Layer<S>>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::Config("network has no layers".into()));
        }
        for (i, l) in layers.iter().enumerate() {
            if l.weight.rows() != l.bias.len() {
                return Err(Error::shape("Mlp layer bias", l.weight.rows(), l.bias.len()));
            }
            if i > 0 && layers[i - 1].weight.rows() != l.weight.cols() {
                return Err(Error::shape(
                    "Mlp layer chain",
                    layers[i - 1].weight.rows(),
                    l.weight.cols(),
                ));
            }
        }
        Ok(Mlp { layers })
    }

    pub fn layers(&self) -> &[Layer<S>] {
        &self.layers
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].weight.cols()
    }

    pub fn output_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].weight.rows()
    }

    /// Layer widths, input first.
    pub fn dims(&self) -> Vec<usize> {
        let mut d = vec![self.input_dim()];
        d.extend(self.layers.iter().map(|l| l.weight.rows()));
        d
    }

    pub fn forward(&self, x: &[S]) -> Result<Vec<S>> {
        if x.len() != self.input_dim() {
            return Err(Error::shape("Mlp::forward", self.input_dim(), x.len()));
        }
        let last = self.layers.len() - 1;
        let mut a = x.to_vec();
        for (i, layer) in self.layers.iter().enumerate() {
            let mut z = layer.weight.matvec(&a)?;
            for (zj, &bj) in z.iter_mut().zip(&layer.bias) {
                *zj += bj;
            }
            if i < last {
                for zj in z.iter_mut() {
                    *zj = zj.relu();
                }
            }
            a = z;
        }
        Ok(a)
    }

    /// Same network with the first layer precomposed with a linear input map,
    /// i.e. `x ↦ π(map·x)`.
    pub fn compose_input(&self, map: &Mat<f64>) -> Result<Mlp<S>> {
        let mut layers = self.layers.clone();
        let w0 = layers[0].weight.matmul(&map.lift())?;
        layers[0].weight = w0;
        Mlp::new(layers)
    }

    /// Flattened parameters: per layer, weights row-major then bias.
    pub fn params(&self) -> Vec<S> {
        let mut p = Vec::new();
        for l in &self.layers {
            p.extend_from_slice(l.weight.as_slice());
            p.extend_from_slice(&l.bias);
        }
        p
    }

    pub fn param_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weight.rows() * (l.weight.cols() + 1))
            .sum()
    }

    /// Rebuild a network of the given widths from flattened parameters.
    pub fn from_params(dims: &[usize], params: &[S]) -> Result<Mlp<S>> {
        let mut layers = Vec::with_capacity(dims.len().saturating_sub(1));
        let mut at = 0;
        for w in dims.windows(2) {
            let (cols, rows) = (w[0], w[1]);
            let nw = rows * cols;
            if at + nw + rows > params.len() {
                return Err(Error::shape("Mlp::from_params", at + nw + rows, params.len()));
            }
            let weight = Mat::from_vec(rows, cols, params[at..at + nw].to_vec())?;
            at += nw;
            let bias = params[at..at + rows].to_vec();
            at += rows;
            layers.push(Layer { weight, bias });
        }
        if at != params.len() {
            return Err(Error::shape("Mlp::from_params", at, params.len()));
        }
        Mlp::new(layers)
    }

    pub fn to_f64(&self) -> Mlp<f64> {
        Mlp {
            layers: self
                .layers
                .iter()
                .map(|l| Layer {
                    weight: l.weight.map(|x| x.value()),
                    bias: l.bias.iter().map(|x| x.value()).collect(),
                })
                .collect(),
        }
    }
}

impl Mlp<f64> {
    /// Uniform He-style weights `U(-√(6/fan_in), √(6/fan_in))` and biases
    /// `U(-1/√fan_in, 1/√fan_in)`. Nonzero biases keep most neurons stable
    /// on small boxes around the origin.
    pub fn random(dims: &[usize], rng: &mut impl Rng) -> Result<Self> {
        if dims.len() < 2 {
            return Err(Error::Config("network needs at least input and output widths".into()));
        }
        let layers = dims
            .windows(2)
            .map(|w| {
                let bound = (6.0 / w[0] as f64).sqrt();
                let bias_bound = 1.0 / (w[0] as f64).sqrt();
                Layer {
                    weight: Mat::from_fn(w[1], w[0], |_, _| rng.gen_range(-bound..bound)),
                    bias: (0..w[1]).map(|_| rng.gen_range(-bias_bound..bias_bound)).collect(),
                }
            })
            .collect();
        Mlp::new(layers)
    }

    pub fn lift<S: Scalar>(&self) -> Mlp<S> {
        Mlp {
            layers: self
                .layers
                .iter()
                .map(|l| Layer {
                    weight: l.weight.lift(),
                    bias: l.bias.iter().map(|&b| S::from_f64(b)).collect(),
                })
                .collect(),
        }
    }

    pub fn scale_weights(&self, k: f64) -> Mlp<f64> {
        Mlp {
            layers: self
                .layers
                .iter()
                .map(|l| Layer {
                    weight: l.weight.map(|x| x * k),
                    bias: l.bias.clone(),
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LayerJson {
    #[serde(rename = "W")]
    w: Mat<f64>,
    b: Vec<f64>,
}

impl Serialize for Mlp<f64> {
    fn serialize<Z: serde::Serializer>(&self, s: Z) -> std::result::Result<Z::Ok, Z::Error> {
        let layers: Vec<LayerJson> = self
            .layers
            .iter()
            .map(|l| LayerJson {
                w: l.weight.clone(),
                b: l.bias.clone(),
            })
            .collect();
        layers.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Mlp<f64> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let layers: Vec<LayerJson> = Vec::deserialize(d)?;
        Mlp::new(
            layers
                .into_iter()
                .map(|l| Layer {
                    weight: l.w,
                    bias: l.b,
                })
                .collect(),
        )
        .map_err(serde::de::Error::custom)
    }
}

/// Local affine bounds of a controller on `domain`.
#[derive(Clone, Debug)]
pub struct AffineRelaxation<S: Scalar> {
    pub c_lo: Mat<S>,
    pub c_hi: Mat<S>,
    pub d_lo: Vec<S>,
    pub d_hi: Vec<S>,
    pub domain: IntervalVector<S>,
}

impl<S: Scalar> AffineRelaxation<S> {
    pub fn exact(c: Mat<S>, d: Vec<S>, domain: IntervalVector<S>) -> Self {
        AffineRelaxation {
            c_lo: c.clone(),
            c_hi: c,
            d_lo: d.clone(),
            d_hi: d,
            domain,
        }
    }

    pub fn outputs(&self) -> usize {
        self.c_lo.rows()
    }

    /// Evaluate the lower and upper affine functions at a point.
    pub fn bounds_at(&self, x: &[S]) -> Result<(Vec<S>, Vec<S>)> {
        let mut lo = self.c_lo.matvec(x)?;
        let mut hi = self.c_hi.matvec(x)?;
        for k in 0..lo.len() {
            lo[k] += self.d_lo[k];
            hi[k] += self.d_hi[k];
        }
        Ok((lo, hi))
    }
}

/// Interval enclosure of the controller output on `domain`:
/// `[C_lo⁺ lo + C_lo⁻ hi + d_lo, C_hi⁻ lo + C_hi⁺ hi + d_hi]`.
pub fn interval_output<S: Scalar>(
    rel: &AffineRelaxation<S>,
    domain: &IntervalVector<S>,
) -> Result<IntervalVector<S>> {
    if domain.len() != rel.domain.len() {
        return Err(Error::shape("interval_output", rel.domain.len(), domain.len()));
    }
    if !domain.is_subset_of(&rel.domain) {
        return Err(Error::Config(
            "box is not contained in the relaxation domain".into(),
        ));
    }
    let lo = domain.lo();
    let hi = domain.hi();
    let entries = (0..rel.outputs())
        .map(|k| {
            let (l, _) = affine_row_bounds(rel.c_lo.row(k), &lo, &hi);
            let (_, h) = affine_row_bounds(rel.c_hi.row(k), &lo, &hi);
            Interval::spanning(l + rel.d_lo[k], h + rel.d_hi[k])
        })
        .collect();
    Ok(IntervalVector::new(entries))
}

/// Per-neuron ReLU relaxation: `alpha·z <= relu(z) <= slope·z + intercept`.
#[derive(Clone, Copy, Debug)]
struct NeuronRelax<S> {
    alpha: S,
    slope: S,
    intercept: S,
}

fn relax_neuron<S: Scalar>(l: S, u: S) -> NeuronRelax<S> {
    if l.value() >= 0.0 {
        NeuronRelax {
            alpha: S::one(),
            slope: S::one(),
            intercept: S::zero(),
        }
    } else if u.value() <= 0.0 {
        NeuronRelax {
            alpha: S::zero(),
            slope: S::zero(),
            intercept: S::zero(),
        }
    } else {
        let slope = u / (u - l);
        let alpha = if u.value() >= -l.value() {
            S::one()
        } else {
            S::zero()
        };
        NeuronRelax {
            alpha,
            slope,
            intercept: -(l * slope),
        }
    }
}

/// Backward substitution of `lam·z_k + bias` (rows of `lam` indexed over the
/// output of layer `k`) down to an affine function of the network input.
fn backward<S: Scalar>(
    net: &Mlp<S>,
    k: usize,
    mut lam: Mat<S>,
    mut bias: Vec<S>,
    relax: &[Vec<NeuronRelax<S>>],
    upper: bool,
) -> Result<(Mat<S>, Vec<S>)> {
    // lam currently multiplies the pre-activation output of layer k
    for j in (0..k).rev() {
        // through the ReLU after layer j
        let rl = &relax[j];
        for r in 0..lam.rows() {
            for (i, nr) in rl.iter().enumerate() {
                let c = lam[(r, i)];
                if c.is_structural_zero() {
                    continue;
                }
                let use_upper = (c.value() >= 0.0) == upper;
                if use_upper {
                    if !nr.intercept.is_structural_zero() {
                        bias[r] += c * nr.intercept;
                    }
                    lam[(r, i)] = c * nr.slope;
                } else {
                    lam[(r, i)] = c * nr.alpha;
                }
            }
        }
        // through the affine map of layer j
        let layer = &net.layers[j];
        for r in 0..lam.rows() {
            bias[r] += S::dot(lam.row(r), &layer.bias);
        }
        lam = lam.matmul(&layer.weight)?;
    }
    Ok((lam, bias))
}

fn concretize<S: Scalar>(
    lam: &Mat<S>,
    bias: &[S],
    lo: &[S],
    hi: &[S],
    upper: bool,
) -> Vec<S> {
    (0..lam.rows())
        .map(|r| {
            let (mn, mx) = affine_row_bounds(lam.row(r), lo, hi);
            if upper {
                mx + bias[r]
            } else {
                mn + bias[r]
            }
        })
        .collect()
}

/// CROWN relaxation of all outputs of `net` on `domain`.
pub fn crown<S: Scalar>(net: &Mlp<S>, domain: &IntervalVector<S>) -> Result<AffineRelaxation<S>> {
    let all: Vec<usize> = (0..net.output_dim()).collect();
    crown_rows(net, domain, &all)
}

/// CROWN relaxation of the selected outputs; row `r` of the result bounds
/// output `outputs[r]`.
pub fn crown_rows<S: Scalar>(
    net: &Mlp<S>,
    domain: &IntervalVector<S>,
    outputs: &[usize],
) -> Result<AffineRelaxation<S>> {
    if domain.len() != net.input_dim() {
        return Err(Error::shape("crown", net.input_dim(), domain.len()));
    }
    if let Some(&bad) = outputs.iter().find(|&&o| o >= net.output_dim()) {
        return Err(Error::IndexOutOfRange {
            index: bad,
            len: net.output_dim(),
        });
    }
    if outputs.is_empty() {
        let n = net.input_dim();
        return Ok(AffineRelaxation {
            c_lo: Mat::zeros(0, n),
            c_hi: Mat::zeros(0, n),
            d_lo: Vec::new(),
            d_hi: Vec::new(),
            domain: domain.clone(),
        });
    }
    let lo = domain.lo();
    let hi = domain.hi();
    let depth = net.layers.len();
    let mut relax: Vec<Vec<NeuronRelax<S>>> = Vec::with_capacity(depth - 1);

    for k in 0..depth - 1 {
        let layer = &net.layers[k];
        let (pre_lo, pre_hi) = if k == 0 {
            let b = matvec_box(&layer.weight, domain)?;
            let l: Vec<S> = b.lo().iter().zip(&layer.bias).map(|(&x, &c)| x + c).collect();
            let h: Vec<S> = b.hi().iter().zip(&layer.bias).map(|(&x, &c)| x + c).collect();
            (l, h)
        } else {
            let (lam_u, bias_u) = backward(
                net,
                k,
                layer.weight.clone(),
                layer.bias.clone(),
                &relax,
                true,
            )?;
            let (lam_l, bias_l) = backward(
                net,
                k,
                layer.weight.clone(),
                layer.bias.clone(),
                &relax,
                false,
            )?;
            (
                concretize(&lam_l, &bias_l, &lo, &hi, false),
                concretize(&lam_u, &bias_u, &lo, &hi, true),
            )
        };
        relax.push(
            pre_lo
                .iter()
                .zip(&pre_hi)
                .map(|(&l, &u)| relax_neuron(l, u))
                .collect(),
        );
    }

    let out = &net.layers[depth - 1];
    let rows: Vec<Vec<S>> = outputs.iter().map(|&o| out.weight.row(o).to_vec()).collect();
    let lam0 = Mat::from_rows(&rows)?;
    let bias0: Vec<S> = outputs.iter().map(|&o| out.bias[o]).collect();
    let (c_hi, d_hi) = backward(net, depth - 1, lam0.clone(), bias0.clone(), &relax, true)?;
    let (c_lo, d_lo) = backward(net, depth - 1, lam0, bias0, &relax, false)?;
    Ok(AffineRelaxation {
        c_lo,
        c_hi,
        d_lo,
        d_hi,
        domain: domain.clone(),
    })
}

/// A state-feedback controller that can be bounded on boxes.
pub trait Controller<S: Scalar> {
    fn input_dim(&self) -> usize;
    fn output_dim(&self) -> usize;
    fn forward(&self, x: &[S]) -> Result<Vec<S>>;
    /// Affine relaxation of the listed outputs on `domain`; row `r` bounds
    /// output `outputs[r]`.
    fn relax(&self, domain: &IntervalVector<S>, outputs: &[usize]) -> Result<AffineRelaxation<S>>;
}

impl<S: Scalar> Controller<S> for Mlp<S> {
    fn input_dim(&self) -> usize {
        Mlp::input_dim(self)
    }

    fn output_dim(&self) -> usize {
        Mlp::output_dim(self)
    }

    fn forward(&self, x: &[S]) -> Result<Vec<S>> {
        Mlp::forward(self, x)
    }

    fn relax(&self, domain: &IntervalVector<S>, outputs: &[usize]) -> Result<AffineRelaxation<S>> {
        crown_rows(self, domain, outputs)
    }
}

/// `u = K x + k0`; its relaxation is exact.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearController {
    pub gain: Mat<f64>,
    pub offset: Vec<f64>,
}

impl LinearController {
    pub fn new(gain: Mat<f64>) -> Self {
        let offset = vec![0.0; gain.rows()];
        LinearController { gain, offset }
    }
}

impl<S: Scalar> Controller<S> for LinearController {
    fn input_dim(&self) -> usize {
        self.gain.cols()
    }

    fn output_dim(&self) -> usize {
        self.gain.rows()
    }

    fn forward(&self, x: &[S]) -> Result<Vec<S>> {
        let mut u = self.gain.lift::<S>().matvec(x)?;
        for (ui, &o) in u.iter_mut().zip(&self.offset) {
            *ui += S::from_f64(o);
        }
        Ok(u)
    }

    fn relax(&self, domain: &IntervalVector<S>, outputs: &[usize]) -> Result<AffineRelaxation<S>> {
        let rows: Vec<Vec<S>> = outputs
            .iter()
            .map(|&o| self.gain.row(o).iter().map(|&v| S::from_f64(v)).collect())
            .collect();
        let c = if rows.is_empty() {
            Mat::zeros(0, self.gain.cols())
        } else {
            Mat::from_rows(&rows)?
        };
        let d = outputs.iter().map(|&o| S::from_f64(self.offset[o])).collect();
        Ok(AffineRelaxation::exact(c, d, domain.clone()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn single_neuron() -> Mlp<f64> {
        Mlp::new(vec![
            Layer {
                weight: Mat::from_rows(&[vec![1.0]]).unwrap(),
                bias: vec![0.0],
            },
            Layer {
                weight: Mat::from_rows(&[vec![1.0]]).unwrap(),
                bias: vec![0.0],
            },
        ])
        .unwrap()
    }

    #[test]
    fn zero_net_outputs_zero() {
        let net = Mlp::<f64>::from_params(&[3, 4, 2], &vec![0.0; 3 * 4 + 4 + 4 * 2 + 2]).unwrap();
        assert_eq!(net.forward(&[1.0, -2.0, 3.0]).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn linear_net_forward_and_crown_are_exact() {
        let w = Mat::from_rows(&[vec![1.0, -2.0], vec![0.5, 3.0]]).unwrap();
        let net = Mlp::new(vec![Layer {
            weight: w.clone(),
            bias: vec![0.1, -0.2],
        }])
        .unwrap();
        assert_eq!(net.forward(&[1.0, 1.0]).unwrap(), vec![1.0 - 2.0 + 0.1, 0.5 + 3.0 - 0.2]);
        let domain = IntervalVector::from_bounds(&[-1.0, 0.0], &[1.0, 2.0]).unwrap();
        let rel = crown(&net, &domain).unwrap();
        assert_eq!(rel.c_lo, w);
        assert_eq!(rel.c_hi, w);
        assert_eq!(rel.d_lo, vec![0.1, -0.2]);
        assert_eq!(rel.d_hi, vec![0.1, -0.2]);
        let out = interval_output(&rel, &domain).unwrap();
        // row 0: x0 - 2 x1 + 0.1 over [-1,1]x[0,2] => [-5+0.1, 1+0.1]
        assert!((out.get(0).lo() - (-4.9)).abs() < 1e-15);
        assert!((out.get(0).hi() - 1.1).abs() < 1e-15);
        assert!((out.get(1).lo() - (-0.7)).abs() < 1e-15);
        assert!((out.get(1).hi() - 6.3).abs() < 1e-15);
    }

    #[test]
    fn stably_active_neuron_is_exact() {
        let net = single_neuron();
        let domain = IntervalVector::from_bounds(&[1.0], &[2.0]).unwrap();
        let rel = crown(&net, &domain).unwrap();
        assert_eq!(rel.c_lo[(0, 0)], 1.0);
        assert_eq!(rel.c_hi[(0, 0)], 1.0);
        assert_eq!(rel.d_lo[0], 0.0);
        assert_eq!(rel.d_hi[0], 0.0);
    }

    #[test]
    fn unstable_neuron_uses_chord_and_adaptive_slope() {
        let net = single_neuron();
        let domain = IntervalVector::from_bounds(&[-1.0], &[1.0]).unwrap();
        let rel = crown(&net, &domain).unwrap();
        assert_eq!(rel.c_hi[(0, 0)], 0.5);
        assert_eq!(rel.d_hi[0], 0.5);
        // u >= |l| => alpha = 1
        assert_eq!(rel.c_lo[(0, 0)], 1.0);
        assert_eq!(rel.d_lo[0], 0.0);

        let domain = IntervalVector::from_bounds(&[-2.0], &[1.0]).unwrap();
        let rel = crown(&net, &domain).unwrap();
        assert_eq!(rel.c_lo[(0, 0)], 0.0);
        assert!((rel.c_hi[(0, 0)] - 1.0 / 3.0).abs() < 1e-15);
        assert!((rel.d_hi[0] - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn forward_matches_layer_by_layer_evaluation() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let net = Mlp::random(&[3, 5, 4, 2], &mut rng).unwrap();
        let x = [0.3, -0.7, 1.1];
        // naive re-evaluation
        let mut a = x.to_vec();
        for (i, l) in net.layers().iter().enumerate() {
            let mut z = vec![0.0; l.weight.rows()];
            for r in 0..l.weight.rows() {
                z[r] = l.bias[r];
                for c in 0..l.weight.cols() {
                    z[r] += l.weight[(r, c)] * a[c];
                }
                if i + 1 < net.layers().len() && z[r] < 0.0 {
                    z[r] = 0.0;
                }
            }
            a = z;
        }
        let y = net.forward(&x).unwrap();
        for (p, q) in y.iter().zip(&a) {
            assert!((p - q).abs() < 1e-12);
        }
    }

    #[test]
    fn point_box_relaxation_is_tight() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let net = Mlp::random(&[2, 8, 8, 1], &mut rng).unwrap();
        let x = [0.4, -0.9];
        let rel = crown(&net, &IntervalVector::point(&x)).unwrap();
        let (lo, hi) = rel.bounds_at(&x).unwrap();
        let y = net.forward(&x).unwrap();
        assert!((lo[0] - y[0]).abs() < 1e-12);
        assert!((hi[0] - y[0]).abs() < 1e-12);
    }

    #[test]
    fn params_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let net = Mlp::random(&[2, 3, 1], &mut rng).unwrap();
        let p = net.params();
        assert_eq!(p.len(), net.param_count());
        let back = Mlp::<f64>::from_params(&net.dims(), &p).unwrap();
        assert_eq!(back, net);
        assert!(Mlp::<f64>::from_params(&[2, 3, 1], &p[1..]).is_err());
    }

    #[test]
    fn json_layout() {
        let net = single_neuron();
        let js = serde_json::to_value(&net).unwrap();
        assert_eq!(js, serde_json::json!([{"W": [[1.0]], "b": [0.0]}, {"W": [[1.0]], "b": [0.0]}]));
        let back: Mlp<f64> = serde_json::from_value(js).unwrap();
        assert_eq!(back, net);
        let bad = serde_json::json!([{"W": [[1.0, 2.0]], "b": [0.0]}, {"W": [[1.0, 1.0]], "b": [0.0]}]);
        assert!(serde_json::from_value::<Mlp<f64>>(bad).is_err());
    }

    #[test]
    fn shape_errors() {
        let net = single_neuron();
        assert!(net.forward(&[1.0, 2.0]).is_err());
        assert!(crown(&net, &IntervalVector::point(&[1.0, 2.0])).is_err());
    }
}
