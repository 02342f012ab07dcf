//! Inclusion functions: every point result lands inside the interval result.

use polycert::interval::{Interval, IntervalMatrix, IntervalVector};
use polycert::matrix::Mat;

fn main() -> polycert::Result<()> {
    let x = Interval::new(-1.0, 2.0)?;
    let y = Interval::new(0.5, 1.5)?;
    println!("x + y      = {:?}", x + y);
    println!("x * y      = {:?}", x * y);
    println!("x^2        = {:?}", x.sqr());
    println!("tanh(x)    = {:?}", x.tanh());
    println!("relu(x)    = {:?}", x.relu());
    println!("sin(x)     = {:?}", x.sin());
    println!("y / y      = {:?}", y.div(y)?);

    let m = IntervalMatrix::from_bounds(
        &Mat::from_rows(&[vec![1.0, -1.0], vec![0.0, 2.0]])?,
        &Mat::from_rows(&[vec![2.0, 0.0], vec![0.5, 3.0]])?,
    )?;
    let v = IntervalVector::from_bounds(&[-1.0, 0.0], &[1.0, 1.0])?;
    let mv = m.matvec(&v)?;
    println!("[M][v]     = {:?} x {:?}", mv.lo(), mv.hi());

    // Spot check containment at a few sample points.
    for t in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let p = x.lo() + t * x.width();
        assert!(x.tanh().contains(p.tanh()) && x.sqr().contains(p * p));
    }
    Ok(())
}
