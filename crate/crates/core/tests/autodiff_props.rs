use polycert::autodiff::{grad, record, Tape, Tracked};
use polycert::scalar::Scalar;
use proptest::prelude::*;

/// Smooth test function mixing every recorded operation.
fn smooth<S: Scalar>(p: &[S]) -> S {
    let mut acc = S::zero();
    for w in p.windows(2) {
        acc += (w[0] * w[1]).tanh() + w[0].sin() * w[1].cos();
    }
    let denom = p[0] * p[0] + S::from_f64(1.5);
    acc / denom - p[1].scale(0.3) + S::from_f64(2.0) / (p[2] * p[2] + S::one())
}

/// Same shape with kinks.
fn kinked<S: Scalar>(p: &[S]) -> S {
    let a = (p[0] - p[1]).relu() + p[2].max(p[3]) - p[1].min(p[2].scale(2.0));
    a * p[0].tanh() + p[3].abs()
}

fn central_difference(f: impl Fn(&[f64]) -> f64, p: &[f64], i: usize, h: f64) -> f64 {
    let mut a = p.to_vec();
    let mut b = p.to_vec();
    a[i] += h;
    b[i] -= h;
    (f(&a) - f(&b)) / (2.0 * h)
}

fn params() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-2.0..2.0f64, 4..8)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gradient_matches_finite_differences(p in params()) {
        let (v, g) = grad(&p, |q: &[Tracked]| smooth(q)).unwrap();
        prop_assert_eq!(v, smooth(&p));
        for i in 0..p.len() {
            let fd = central_difference(smooth::<f64>, &p, i, 1e-6);
            prop_assert!((g[i] - fd).abs() / (1.0 + fd.abs()) <= 1e-5, "param {}: {} vs {}", i, g[i], fd);
        }
    }

    #[test]
    fn kinked_gradient_away_from_ties(p in params()) {
        let ties = [p[0] - p[1], p[2] - p[3], p[1] - 2.0 * p[2], p[3]];
        prop_assume!(ties.iter().all(|t| t.abs() > 1e-3));
        let (_, g) = grad(&p, |q: &[Tracked]| kinked(q)).unwrap();
        for i in 0..p.len() {
            let fd = central_difference(kinked::<f64>, &p, i, 1e-7);
            prop_assert!((g[i] - fd).abs() / (1.0 + fd.abs()) <= 1e-5);
        }
    }

    #[test]
    fn gradient_is_linear(p in params(), a in -3.0..3.0f64, b in -3.0..3.0f64) {
        let (_, gf) = grad(&p, |q: &[Tracked]| smooth(q)).unwrap();
        let (_, gg) = grad(&p, |q: &[Tracked]| kinked(q)).unwrap();
        let (_, gs) = grad(&p, |q: &[Tracked]| smooth(q).scale(a) + kinked(q).scale(b)).unwrap();
        for i in 0..p.len() {
            let expect = a * gf[i] + b * gg[i];
            prop_assert!((gs[i] - expect).abs() <= 1e-12 * (1.0 + expect.abs()));
        }
    }

    #[test]
    fn replay_is_bit_exact(p in params()) {
        let (tape, out) = record(&p, |q: &[Tracked]| smooth(q)).unwrap();
        let vals = tape.replay(&p).unwrap();
        prop_assert_eq!(Tape::lookup(&vals, out).to_bits(), out.value().to_bits());
        prop_assert_eq!(vals, tape.values());
    }
}
