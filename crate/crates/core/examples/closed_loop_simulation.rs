//! Segway under a state-feedback law with piecewise-constant parameter
//! disturbances, integrated with RK4.

use polycert::dynamics::{simulate, DisturbanceSpec, PiecewiseConstant, Segway};
use polycert::embedding::ClosedLoop;
use polycert::matrix::Mat;
use polycert::neural::LinearController;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> polycert::Result<()> {
    let segway = Segway::default();
    // u = K x with K from an LQR design around the upright equilibrium
    let k = Mat::from_rows(&[vec![16.91745493756555, 11.938594946122594, 5.9948620374059525]])?;
    let controller = LinearController::new(k);
    let cl = ClosedLoop::new(&segway, &controller);

    let dist = DisturbanceSpec::symmetric(&[0.02; 11])?;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for x0 in [[0.2, 0.0, 0.0], [-0.3, 1.0, 0.5], [0.0, -2.0, 1.0]] {
        let signal = PiecewiseConstant::sample(dist.bounds(), 0.1, 5.0, &mut rng);
        let traj = simulate(|x, w| cl.field(x, w), &x0, |_, t| signal.at(t), 1e-3, 5.0)?;
        let end = traj.states.last().unwrap();
        let peak = traj.states.iter().map(|x| x[0].abs()).fold(0.0, f64::max);
        println!("x0 = {x0:?}: max |phi| = {peak:.4}, x(5) = [{:.2e}, {:.2e}, {:.2e}]", end[0], end[1], end[2]);
    }
    Ok(())
}
