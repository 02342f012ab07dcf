//! Embedding-system check of a box (the axis-aligned special case of a
//! polytope) for a linear feedback on a damped oscillator.

use polycert::dynamics::{Anchor, Corner, DisturbanceSpec, LinearSystem, Pinning};
use polycert::embedding::ClosedLoop;
use polycert::interval::IntervalVector;
use polycert::matrix::Mat;
use polycert::neural::LinearController;

fn main() -> polycert::Result<()> {
    let sys = LinearSystem::new(
        Mat::from_rows(&[vec![-1.0, 0.5], vec![-0.5, -1.0]])?,
        Mat::from_rows(&[vec![0.0], vec![1.0]])?,
        Mat::from_rows(&[vec![1.0], vec![0.0]])?,
    )?;
    let controller = LinearController::new(Mat::from_rows(&[vec![-0.2, -0.5]])?);
    let dist = DisturbanceSpec::symmetric(&[0.1])?;
    let bx = IntervalVector::from_bounds(&[-1.0, -1.0], &[1.0, 1.0])?;

    for pinning in [Pinning::Before, Pinning::After] {
        for x in [Corner::Lower, Corner::Upper] {
            let anchor = Anchor { x, pinning, ..Anchor::default() };
            let cl = ClosedLoop::new(&sys, &controller).with_anchor(anchor);
            let cert = cl.check_box_invariant(&bx, &dist)?;
            println!(
                "{pinning:?}/{x:?}: invariant {} (margin {:.4}) lower {:?} upper {:?}",
                cert.certified, cert.margin, cert.lower_field, cert.upper_field
            );
        }
    }

    // Too large a disturbance breaks the box.
    let cl = ClosedLoop::new(&sys, &controller);
    let cert = cl.check_box_invariant(&bx, &DisturbanceSpec::symmetric(&[1.0])?)?;
    println!("with |w| <= 1: invariant {} (margin {:.4})", cert.certified, cert.margin);
    Ok(())
}
