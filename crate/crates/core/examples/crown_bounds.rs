//! Linear relaxation of a ReLU network over a box, compared with sampled
//! outputs and with plain interval propagation.

use polycert::interval::{Interval, IntervalVector};
use polycert::neural::{crown, interval_output, Mlp};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> polycert::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let net = Mlp::random(&[2, 16, 16, 1], &mut rng)?;
    let domain = IntervalVector::from_bounds(&[-0.5, -0.5], &[0.5, 0.5])?;

    let rel = crown(&net, &domain)?;
    let bound = interval_output(&rel, &domain)?.get(0);
    println!("affine relaxation: lower {:?} x + {:.4}", rel.c_lo.row(0), rel.d_lo[0]);
    println!("                   upper {:?} x + {:.4}", rel.c_hi.row(0), rel.d_hi[0]);
    println!("relaxation bound over the box: {bound:?}");

    // Naive interval propagation for comparison.
    let mut v: Vec<Interval<f64>> = domain.entries().to_vec();
    for (k, layer) in net.layers().iter().enumerate() {
        v = (0..layer.weight.rows())
            .map(|i| {
                let mut acc = Interval::point(layer.bias[i]);
                for (j, x) in v.iter().enumerate() {
                    acc = acc + x.scale(layer.weight[(i, j)]);
                }
                if k + 1 < net.layers().len() { acc.relu() } else { acc }
            })
            .collect();
    }
    println!("interval propagation bound:    {:?}", v[0]);

    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for _ in 0..10_000 {
        let x = [rng.gen_range(-0.5..=0.5), rng.gen_range(-0.5..=0.5)];
        let y = net.forward(&x)?[0];
        lo = lo.min(y);
        hi = hi.max(y);
    }
    println!("sampled range:                 [{lo:.4}, {hi:.4}]");
    Ok(())
}
