//! Network-backed policies for the built-in models.

use serde::{Deserialize, Serialize};

use crate::dynamics::PlatoonPolicy;
use crate::error::Result;
use crate::interval::IntervalVector;
use crate::neural::{crown_rows, AffineRelaxation, Controller, Mlp};
use crate::scalar::Scalar;

/// How a trained network is turned into a state-feedback controller.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", deny_unknown_fields)]
pub enum PolicyKind {
    /// `u = π(x)`.
    #[default]
    Direct,
    /// One shared network evaluated on each vehicle's observation.
    Platoon { vehicles: usize },
}

impl PolicyKind {
    pub fn build<S: Scalar>(&self, net: Mlp<S>) -> Result<Policy<S>> {
        Ok(match *self {
            PolicyKind::Direct => Policy::Direct(net),
            PolicyKind::Platoon { vehicles } => Policy::Platoon(PlatoonPolicy::new(net, vehicles)?),
        })
    }
}

#[derive(Clone, Debug)]
pub enum Policy<S: Scalar> {
    Direct(Mlp<S>),
    Platoon(PlatoonPolicy<S>),
}

impl<S: Scalar> Policy<S> {
    pub fn net(&self) -> &Mlp<S> {
        match self {
            Policy::Direct(n) => n,
            Policy::Platoon(p) => &p.net,
        }
    }
}

impl<S: Scalar> Controller<S> for Policy<S> {
    fn input_dim(&self) -> usize {
        match self {
            Policy::Direct(n) => n.input_dim(),
            Policy::Platoon(p) => Controller::<S>::input_dim(p),
        }
    }

    fn output_dim(&self) -> usize {
        match self {
            Policy::Direct(n) => n.output_dim(),
            Policy::Platoon(p) => Controller::<S>::output_dim(p),
        }
    }

    fn forward(&self, x: &[S]) -> Result<Vec<S>> {
        match self {
            Policy::Direct(n) => n.forward(x),
            Policy::Platoon(p) => p.forward(x),
        }
    }

    fn relax(&self, domain: &IntervalVector<S>, outputs: &[usize]) -> Result<AffineRelaxation<S>> {
        match self {
            Policy::Direct(n) => crown_rows(n, domain, outputs),
            Policy::Platoon(p) => p.relax(domain, outputs),
        }
    }
}
