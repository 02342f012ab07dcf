//! Pick a lifting matrix from the eigenvectors of a linearized closed loop,
//! so that the lifted coordinates decouple near the equilibrium.

use polycert::lifted::{lifting_from_linearization, stack_rows, Lifting};
use polycert::matrix::Mat;

fn main() -> polycert::Result<()> {
    // A + BK for the double integrator with K = [-2, -3]: eigenvalues -1, -2.
    let a_cl = Mat::from_rows(&[vec![0.0, 1.0], vec![-2.0, -3.0]])?;
    let h = lifting_from_linearization(&a_cl)?;
    println!("H = {:?}", h.to_rows());

    // H A H⁻¹ is diagonal.
    let t = Mat::from_nalgebra(&h.to_nalgebra().try_inverse().unwrap());
    println!("H A T = {:?}", h.matmul(&a_cl)?.matmul(&t)?.to_rows());

    // Extra rows give redundant coordinates and a nontrivial left-inverse freedom.
    let lifted = stack_rows(&h, &Mat::from_rows(&[vec![1.0, 1.0]])?)?;
    let lifting = Lifting::new(lifted)?;
    println!("lifted dim {}, eta shape {:?}", lifting.lifted_dim(), lifting.eta_shape());

    match lifting_from_linearization(&Mat::from_rows(&[vec![0.0, 1.0], vec![-1.0, 0.0]])?) {
        Err(e) => println!("rotation: {e}"),
        Ok(_) => println!("rotation unexpectedly accepted"),
    }
    Ok(())
}
