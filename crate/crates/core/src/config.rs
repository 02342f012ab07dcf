//! JSON run configuration shared by the command-line tools.
//!
//! ```json
//! {
//!   "model": {"model": "double_integrator", "disturbance": {"radius": [0.0]}},
//!   "network": {"init": {"dims": [2, 16, 16, 1], "seed": 0}},
//!   "polytope": {"H": [[1, 0], [0, 1], [1, 1]], "y_lo": [-1, -1, -1], "y_hi": [1, 1, 1], "eta": "zero"},
//!   "training": {"lambda": 1.0, "epsilon": 0.02, "max_iters": 5000}
//! }
//! ```
//!
//! Relative paths inside a config resolve against the config file's directory.

use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::{Anchor, DisturbanceSpec, LinearSystem, Model, Platoon, Segway, System};
use crate::error::{Error, Result};
use crate::interval::IntervalVector;
use crate::lifted::{Lifting, Polytope};
use crate::matrix::Mat;
use crate::neural::{Layer, Mlp};
use crate::policy::PolicyKind;
use crate::trainer::{Problem, TrainConfig};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelConfig,
    pub network: NetworkConfig,
    pub polytope: PolytopeConfig,
    #[serde(default, skip_serializing_if = "is_default_anchor")]
    pub anchor: Anchor,
    #[serde(default)]
    pub training: TrainConfig,
    #[serde(default)]
    pub simulate: SimulateConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputConfig>,
}

fn is_default_anchor(a: &Anchor) -> bool {
    *a == Anchor::default()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    DoubleIntegrator,
    Segway,
    Platoon,
    Linear,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub model: ModelKind,
    /// Vehicle count for the platoon.
    #[serde(rename = "N", default, skip_serializing_if = "Option::is_none")]
    pub vehicles: Option<usize>,
    /// `ẋ = A x + B u + E w` for the generic linear model.
    #[serde(rename = "A", default, skip_serializing_if = "Option::is_none")]
    pub a: Option<Mat<f64>>,
    #[serde(rename = "B", default, skip_serializing_if = "Option::is_none")]
    pub b: Option<Mat<f64>>,
    #[serde(rename = "E", default, skip_serializing_if = "Option::is_none")]
    pub e: Option<Mat<f64>>,
    #[serde(default)]
    pub disturbance: DisturbanceConfig,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DisturbanceConfig {
    /// Per-dimension radius of the symmetric box `[-r, r]`; a single number
    /// applies to every dimension. Missing means no disturbance.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<Radius>,
    /// 1 keeps the box whole, 2 bisects every dimension of positive radius.
    #[serde(default = "one")]
    pub partitions_per_dim: usize,
}

fn one() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Radius {
    Uniform(f64),
    PerDim(Vec<f64>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum NetworkConfig {
    Inline(Vec<LayerConfig>),
    Path(PathBuf),
    Init(InitConfig),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayerConfig {
    #[serde(rename = "W")]
    pub w: Mat<f64>,
    pub b: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitConfig {
    pub dims: Vec<usize>,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolytopeConfig {
    #[serde(rename = "H")]
    pub h: Mat<f64>,
    pub y_lo: Vec<f64>,
    pub y_hi: Vec<f64>,
    #[serde(default)]
    pub eta: EtaConfig,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EtaConfig {
    #[default]
    #[serde(with = "zero_tag")]
    Zero,
    Matrix(Mat<f64>),
}

mod zero_tag {
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str("zero")
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<(), D::Error> {
        let s = String::deserialize(d)?;
        if s == "zero" {
            Ok(())
        } else {
            Err(D::Error::custom(format!("expected \"zero\", got {s:?}")))
        }
    }
}

/// Initial states for `simulate`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialStates {
    /// Explicit list of states.
    Points(Vec<Vec<f64>>),
    /// Every vertex of the polytope (state dimension at most 3).
    Vertices,
    /// Random boundary points, shot from the center in uniform directions.
    Boundary(usize),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulateConfig {
    pub x0: InitialStates,
    #[serde(rename = "T")]
    pub horizon: f64,
    pub dt: f64,
    /// Hold time of the piecewise-constant disturbance.
    pub hold: f64,
    pub seed: u64,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        SimulateConfig {
            x0: InitialStates::Boundary(10),
            horizon: 10.0,
            dt: 1e-2,
            hold: 0.1,
            seed: 0,
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<(Self, PathBuf)> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok((Self::from_json(&text)?, base))
    }

    pub fn build_model(&self) -> Result<Model> {
        let m = &self.model;
        let model = match m.model {
            ModelKind::DoubleIntegrator => Model::Linear(LinearSystem::double_integrator()),
            ModelKind::Segway => Model::Segway(Segway::default()),
            ModelKind::Platoon => {
                let n = m
                    .vehicles
                    .ok_or_else(|| Error::Config("platoon model needs \"N\"".into()))?;
                Model::Platoon(Platoon::new(n)?)
            }
            ModelKind::Linear => {
                let (Some(a), Some(b)) = (&m.a, &m.b) else {
                    return Err(Error::Config("linear model needs \"A\" and \"B\"".into()));
                };
                let e = m.e.clone().unwrap_or_else(|| Mat::zeros(a.rows(), 0));
                Model::Linear(LinearSystem::new(a.clone(), b.clone(), e)?)
            }
        };
        let extra = match m.model {
            ModelKind::Platoon => None,
            _ if m.vehicles.is_some() => Some("N"),
            ModelKind::Linear => None,
            _ if m.a.is_some() || m.b.is_some() || m.e.is_some() => Some("A/B/E"),
            _ => None,
        };
        if let Some(key) = extra {
            return Err(Error::Config(format!("{key} is not used by this model")));
        }
        Ok(model)
    }

    pub fn policy_kind(&self) -> Result<PolicyKind> {
        Ok(match self.model.model {
            ModelKind::Platoon => PolicyKind::Platoon {
                vehicles: self.model.vehicles.unwrap_or(0),
            },
            _ => PolicyKind::Direct,
        })
    }

    pub fn disturbance(&self, model: &Model) -> Result<DisturbanceSpec> {
        let q = model.disturbance_dim();
        let d = &self.model.disturbance;
        let radius = match &d.radius {
            None => vec![0.0; q],
            Some(Radius::Uniform(r)) => vec![*r; q],
            Some(Radius::PerDim(r)) => r.clone(),
        };
        if radius.len() != q {
            return Err(Error::Config(format!(
                "disturbance radius has {} entries, model has {q} disturbance inputs",
                radius.len()
            )));
        }
        if radius.iter().any(|r| !(*r >= 0.0) || !r.is_finite()) {
            return Err(Error::Config("disturbance radius must be finite and nonnegative".into()));
        }
        let lo: Vec<f64> = radius.iter().map(|r| -r).collect();
        let bounds = IntervalVector::from_bounds(&lo, &radius)?;
        match d.partitions_per_dim {
            1 => Ok(DisturbanceSpec::whole(bounds)),
            2 => Ok(DisturbanceSpec::bisected(bounds)),
            k => Err(Error::Config(format!("partitions_per_dim must be 1 or 2, got {k}"))),
        }
    }

    pub fn build_network(&self, base: &Path) -> Result<Mlp<f64>> {
        match &self.network {
            NetworkConfig::Inline(layers) => Mlp::new(
                layers
                    .iter()
                    .map(|l| Layer {
                        weight: l.w.clone(),
                        bias: l.b.clone(),
                    })
                    .collect(),
            ),
            NetworkConfig::Path(p) => {
                let path = base.join(p);
                let text = std::fs::read_to_string(&path)
                    .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
                Mlp::from_json(&text).map_err(|e| Error::Config(e.to_string()))
            }
            NetworkConfig::Init(init) => {
                let mut rng = ChaCha8Rng::seed_from_u64(init.seed);
                Mlp::random(&init.dims, &mut rng)
            }
        }
    }

    pub fn build_polytope(&self) -> Result<Polytope> {
        let p = &self.polytope;
        Polytope::new(p.h.clone(), p.y_lo.clone(), p.y_hi.clone())
    }

    pub fn build_eta(&self, lifting: &Lifting) -> Result<Mat<f64>> {
        match &self.polytope.eta {
            EtaConfig::Zero => Ok(lifting.zero_eta()),
            EtaConfig::Matrix(m) => {
                let (r, c) = lifting.eta_shape();
                if (m.rows(), m.cols()) != (r, c) {
                    return Err(Error::Config(format!(
                        "eta must be {r}x{c}, got {}x{}",
                        m.rows(),
                        m.cols()
                    )));
                }
                Ok(m.clone())
            }
        }
    }

    /// Everything needed to certify or train, validated for consistency.
    pub fn build(&self, base: &Path) -> Result<Built> {
        let model = self.build_model()?;
        let disturbance = self.disturbance(&model)?;
        let policy = self.policy_kind()?;
        let net = self.build_network(base)?;
        let polytope = self.build_polytope()?;
        let lifting = Lifting::new(polytope.h.clone())?;
        let eta = self.build_eta(&lifting)?;
        if polytope.h.cols() != model.state_dim() {
            return Err(Error::Config(format!(
                "H has {} columns, model state dimension is {}",
                polytope.h.cols(),
                model.state_dim()
            )));
        }
        let (want_in, want_out) = match policy {
            PolicyKind::Direct => (model.state_dim(), model.input_dim()),
            PolicyKind::Platoon { .. } => (6, 1),
        };
        if net.input_dim() != want_in || net.output_dim() != want_out {
            return Err(Error::Config(format!(
                "network maps {} -> {}, model needs {want_in} -> {want_out}",
                net.input_dim(),
                net.output_dim()
            )));
        }
        self.training.validate()?;
        let problem = Problem {
            model,
            policy,
            lifting,
            y_box: polytope.y_box()?,
            disturbance,
            anchor: self.anchor,
        };
        Ok(Built {
            problem,
            polytope,
            net,
            eta,
        })
    }
}

/// A validated configuration.
#[derive(Clone, Debug)]
pub struct Built {
    pub problem: Problem,
    pub polytope: Polytope,
    pub net: Mlp<f64>,
    pub eta: Mat<f64>,
}
