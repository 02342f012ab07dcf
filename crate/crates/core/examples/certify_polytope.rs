//! Lifted embedding certificate for a hexagon around the double integrator
//! with `u = -2x₁ - 3x₂`, and how the free left inverse changes the field.

use polycert::dynamics::{Anchor, DisturbanceSpec, LinearSystem, Model};
use polycert::interval::IntervalVector;
use polycert::lifted::Lifting;
use polycert::matrix::Mat;
use polycert::neural::Mlp;
use polycert::policy::PolicyKind;
use polycert::trainer::Problem;

fn main() -> polycert::Result<()> {
    let problem = Problem {
        model: Model::Linear(LinearSystem::double_integrator()),
        policy: PolicyKind::Direct,
        lifting: Lifting::new(Mat::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]])?)?,
        y_box: IntervalVector::from_bounds(&[-1.0; 3], &[1.0; 3])?,
        disturbance: DisturbanceSpec::symmetric(&[0.0])?,
        anchor: Anchor::default(),
    };
    let net = Mlp::from_params(&[2, 1], &[-2.0, -3.0, 0.0])?;

    for e in [0.0, 0.2, -0.2, 0.5] {
        let eta = Mat::from_rows(&[vec![e], vec![0.0]])?;
        let cert = problem.certify(&net, &eta)?;
        println!(
            "eta = [{e}, 0]: certified {} margin {:+.4} lower {:?} upper {:?}",
            cert.certified, cert.margin, cert.lower_field, cert.upper_field
        );
    }
    Ok(())
}
