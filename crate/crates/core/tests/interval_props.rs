use polycert::interval::{se_geq_zero, Interval, IntervalMatrix, IntervalVector};
use polycert::matrix::Mat;
use proptest::prelude::*;
use rand::Rng;

mod common;

fn interval() -> impl Strategy<Value = Interval<f64>> {
    (-10.0..10.0f64, 0.0..5.0f64).prop_map(|(c, r)| Interval::new(c - r, c + r).unwrap())
}

/// An interval together with one containing it.
fn nested() -> impl Strategy<Value = (Interval<f64>, Interval<f64>)> {
    (interval(), 0.0..3.0f64, 0.0..3.0f64)
        .prop_map(|(a, l, r)| (a, Interval::new(a.lo() - l, a.hi() + r).unwrap()))
}

fn point_in(iv: Interval<f64>, t: f64) -> f64 {
    (iv.lo() + t * (iv.hi() - iv.lo())).clamp(iv.lo(), iv.hi())
}

proptest! {
    #[test]
    fn inclusion_monotone_add_mul((a, a2) in nested(), (b, b2) in nested()) {
        prop_assert!((a + b).is_subset_of(&(a2 + b2)));
        prop_assert!((a - b).is_subset_of(&(a2 - b2)));
        prop_assert!((a * b).is_subset_of(&(a2 * b2)));
    }

    #[test]
    fn ops_contain_point_results(a in interval(), b in interval(), s in 0.0..=1.0f64, t in 0.0..=1.0f64) {
        let (x, y) = (point_in(a, s), point_in(b, t));
        prop_assert!((a + b).contains(x + y));
        prop_assert!((a - b).contains(x - y));
        prop_assert!((a * b).contains(x * y));
        prop_assert!(a.sqr().contains(x * x));
        prop_assert!(a.tanh().contains(x.tanh()));
        prop_assert!(a.sin().contains(x.sin()));
        prop_assert!(a.cos().contains(x.cos()));
        prop_assert!(a.relu().contains(x.max(0.0)));
    }

    #[test]
    fn se_order_matches_definition(lo in prop::collection::vec(-1.0..1.0f64, 1..6), hi in prop::collection::vec(-1.0..1.0f64, 1..6)) {
        let expect = lo.iter().cloned().fold(f64::INFINITY, f64::min) >= 0.0
            && hi.iter().cloned().fold(f64::NEG_INFINITY, f64::max) <= 0.0;
        prop_assert_eq!(se_geq_zero(&lo, &hi), expect);
    }

    #[test]
    fn pos_neg_split_reassembles(data in prop::collection::vec(-5.0..5.0f64, 12)) {
        let a = Mat::from_vec(3, 4, data).unwrap();
        let (p, n) = a.pos_neg_split();
        prop_assert_eq!(p.add(&n).unwrap(), a);
        prop_assert!(p.as_slice().iter().all(|v| *v >= 0.0));
        prop_assert!(n.as_slice().iter().all(|v| *v <= 0.0));
    }
}

fn random_matrix(rows: usize, cols: usize, rng: &mut impl Rng) -> (IntervalMatrix<f64>, IntervalMatrix<f64>) {
    let c = Mat::from_fn(rows, cols, |_, _| rng.gen_range(-2.0..2.0));
    let r = Mat::from_fn(rows, cols, |_, _| rng.gen_range(0.0..1.0));
    let grow = Mat::from_fn(rows, cols, |_, _| rng.gen_range(0.0..1.0));
    let inner = IntervalMatrix::from_bounds(
        &Mat::from_fn(rows, cols, |i, j| c[(i, j)] - r[(i, j)]),
        &Mat::from_fn(rows, cols, |i, j| c[(i, j)] + r[(i, j)]),
    )
    .unwrap();
    let outer = IntervalMatrix::from_bounds(
        &Mat::from_fn(rows, cols, |i, j| c[(i, j)] - r[(i, j)] - grow[(i, j)]),
        &Mat::from_fn(rows, cols, |i, j| c[(i, j)] + r[(i, j)] + grow[(i, j)]),
    )
    .unwrap();
    (inner, outer)
}

fn subset(a: &IntervalMatrix<f64>, b: &IntervalMatrix<f64>) -> bool {
    (0..a.rows()).all(|i| (0..a.cols()).all(|j| a.get(i, j).is_subset_of(&b.get(i, j))))
}

#[test]
fn matmul_is_inclusion_monotone() {
    let mut rng = common::rng(11);
    for _ in 0..200 {
        let (a, a2) = random_matrix(3, 4, &mut rng);
        let (b, b2) = random_matrix(4, 2, &mut rng);
        assert!(subset(&a.matmul(&b).unwrap(), &a2.matmul(&b2).unwrap()));
    }
}

#[test]
fn matmul_and_matvec_contain_point_products() {
    let mut rng = common::rng(12);
    let (a, _) = random_matrix(3, 4, &mut rng);
    let (b, _) = random_matrix(4, 2, &mut rng);
    let xb = common::random_box(4, 2.0, 1.0, &mut rng);
    let ab = a.matmul(&b).unwrap();
    let ax = a.matvec(&xb).unwrap();
    let pick = |m: &IntervalMatrix<f64>, rng: &mut rand_chacha::ChaCha8Rng| {
        Mat::from_fn(m.rows(), m.cols(), |i, j| {
            let iv = m.get(i, j);
            rng.gen_range(iv.lo()..=iv.hi())
        })
    };
    for _ in 0..10_000 {
        let pa = pick(&a, &mut rng);
        let pb = pick(&b, &mut rng);
        let x = common::sample_in(&xb, &mut rng);
        let prod = pa.matmul(&pb).unwrap();
        for i in 0..3 {
            for j in 0..2 {
                assert!(ab.get(i, j).contains(prod[(i, j)]));
            }
        }
        let v = pa.matvec(&x).unwrap();
        assert!(ax.contains(&v));
    }
}

#[test]
fn vector_add_contains_samples() {
    let mut rng = common::rng(13);
    let a = common::random_box(5, 3.0, 1.0, &mut rng);
    let b = common::random_box(5, 3.0, 1.0, &mut rng);
    let s: IntervalVector<f64> = a.add(&b).unwrap();
    for _ in 0..10_000 {
        let x = common::sample_in(&a, &mut rng);
        let y = common::sample_in(&b, &mut rng);
        let z: Vec<f64> = x.iter().zip(&y).map(|(p, q)| p + q).collect();
        assert!(s.contains(&z));
    }
}
