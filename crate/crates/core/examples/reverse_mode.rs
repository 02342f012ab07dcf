//! Reverse-mode gradients on the tape, checked against central differences,
//! then a few ADAM steps on a small quadratic.

use polycert::autodiff::{grad, record, Adam, AdamConfig, Tape, Tracked};
use polycert::scalar::Scalar;

fn f<S: Scalar>(p: &[S]) -> S {
    (p[0] * p[1]).tanh() + p[0].sin() + (p[1] - S::from_f64(0.5)).relu()
}

fn main() -> polycert::Result<()> {
    let p = [0.3, 1.2];
    let (value, g) = grad(&p, |t| f(t))?;
    println!("f = {value:.6}, grad = {g:?}");
    for i in 0..2 {
        let h = 1e-6;
        let (mut a, mut b) = (p, p);
        a[i] += h;
        b[i] -= h;
        println!("  d/dp{i}: tape {:.9}, central {:.9}", g[i], (f(&a) - f(&b)) / (2.0 * h));
    }

    // A recorded tape can be replayed at new parameters without re-tracing.
    let (tape, out) = record(&p, |t| f(t))?;
    let replayed = tape.replay(&[0.1, 0.9])?;
    println!("replay at (0.1, 0.9): {:.6} (direct {:.6})", Tape::lookup(&replayed, out), f(&[0.1, 0.9]));

    let mut theta = vec![3.0, -2.0];
    let mut adam = Adam::new(AdamConfig { learning_rate: 0.1, ..AdamConfig::default() }, 2);
    for _ in 0..200 {
        let one = Tracked::from_f64(1.0);
        let (_, g) = grad(&theta, |t| (t[0] - one).powi2() + (t[1] + one).powi2())?;
        adam.step(&mut theta, &g);
    }
    println!("ADAM minimiser of (a-1)^2 + (b+1)^2 after 200 steps: {theta:?}");
    Ok(())
}
