//! Refinement of lifted boxes: tighten each coordinate using the linear
//! relations the lifted coordinates must satisfy, then do the same per face.

use polycert::interval::IntervalVector;
use polycert::lifted::{polytope_edges, polytope_vertices, refined_faces, Lifting, Polytope};
use polycert::matrix::Mat;
use polycert::Error;

fn main() -> polycert::Result<()> {
    let h = Mat::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]])?;
    let lifting = Lifting::new(h.clone())?;
    println!("null basis N = {:?}", lifting.null().to_rows());

    let face = IntervalVector::from_bounds(&[-1.0, -1.0, -1.0], &[1.0, 1.0, -1.0])?;
    let r = lifting.refine(&face)?;
    println!("face {:?} x {:?} refines to {:?} x {:?}", face.lo(), face.hi(), r.lo(), r.hi());

    let y = IntervalVector::from_bounds(&[-1.0; 3], &[1.0; 3])?;
    for f in refined_faces(&lifting, &y)? {
        let side = if f.upper { "upper" } else { "lower" };
        println!("{side} face {}: {:?} x {:?}", f.index, f.y_box.lo(), f.y_box.hi());
    }

    let poly = Polytope::new(h, vec![-1.0; 3], vec![1.0; 3])?;
    let verts = polytope_vertices(&poly)?;
    println!("{} vertices, {} edges", verts.len(), polytope_edges(&poly, &verts)?.len());

    // Inconsistent bounds are reported, not silently widened.
    let empty = IntervalVector::from_bounds(&[0.9, 0.9, -1.0], &[1.0, 1.0, -0.9])?;
    match lifting.refine(&empty) {
        Err(e @ Error::EmptyIntersection { .. }) => println!("empty: {e}"),
        other => println!("unexpected: {other:?}"),
    }
    Ok(())
}
