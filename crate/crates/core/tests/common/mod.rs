#![allow(dead_code)]

use polycert::dynamics::{DisturbanceSpec, LinearSystem, Model, Platoon, Segway};
use polycert::interval::IntervalVector;
use polycert::matrix::Mat;
use polycert::neural::Mlp;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn hexagon_h() -> Mat<f64> {
    Mat::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]]).unwrap()
}

pub fn cube(n: usize, r: f64) -> IntervalVector<f64> {
    IntervalVector::from_bounds(&vec![-r; n], &vec![r; n]).unwrap()
}

pub fn sample_in(b: &IntervalVector<f64>, rng: &mut impl Rng) -> Vec<f64> {
    b.entries()
        .iter()
        .map(|iv| if iv.width() > 0.0 { rng.gen_range(iv.lo()..=iv.hi()) } else { iv.lo() })
        .collect()
}

pub fn random_box(n: usize, center: f64, radius: f64, rng: &mut impl Rng) -> IntervalVector<f64> {
    let mut lo = Vec::with_capacity(n);
    let mut hi = Vec::with_capacity(n);
    for _ in 0..n {
        let c = rng.gen_range(-center..=center);
        let r = rng.gen_range(0.0..=radius);
        lo.push(c - r);
        hi.push(c + r);
    }
    IntervalVector::from_bounds(&lo, &hi).unwrap()
}

/// The three built-in models with a matching policy shape and a small
/// state box and disturbance to test on.
pub struct Case {
    pub name: &'static str,
    pub model: Model,
    pub dims: Vec<usize>,
    pub platoon: Option<usize>,
    pub state_box: IntervalVector<f64>,
    pub disturbance: DisturbanceSpec,
}

pub fn cases() -> Vec<Case> {
    let segway_state =
        IntervalVector::from_bounds(&[-0.3, -1.0, -1.0], &[0.3, 1.0, 1.0]).unwrap();
    vec![
        Case {
            name: "double_integrator",
            model: Model::Linear(LinearSystem::double_integrator()),
            dims: vec![2, 16, 16, 1],
            platoon: None,
            state_box: cube(2, 1.0),
            disturbance: DisturbanceSpec::symmetric(&[0.2]).unwrap(),
        },
        Case {
            name: "segway",
            model: Model::Segway(Segway::default()),
            dims: vec![3, 32, 32, 1],
            platoon: None,
            state_box: segway_state,
            disturbance: DisturbanceSpec::symmetric(&[0.02; 11]).unwrap(),
        },
        Case {
            name: "platoon",
            model: Model::Platoon(Platoon::new(4).unwrap()),
            dims: vec![6, 32, 32, 32, 1],
            platoon: Some(4),
            state_box: cube(8, 0.3),
            disturbance: DisturbanceSpec::symmetric(&[0.1; 4]).unwrap(),
        },
    ]
}

pub fn random_net(dims: &[usize], seed: u64) -> Mlp<f64> {
    Mlp::random(dims, &mut rng(seed)).unwrap()
}
