//! Train a ReLU controller and the left-inverse freedom jointly until the
//! hexagon is certified, then confirm by simulation.

use polycert::dynamics::{simulate, Anchor, DisturbanceSpec, LinearSystem, Model};
use polycert::embedding::ClosedLoop;
use polycert::interval::IntervalVector;
use polycert::lifted::{Lifting, Polytope};
use polycert::matrix::Mat;
use polycert::neural::Mlp;
use polycert::policy::PolicyKind;
use polycert::trainer::{train, Problem, TrainConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> polycert::Result<()> {
    let h = Mat::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]])?;
    let problem = Problem {
        model: Model::Linear(LinearSystem::double_integrator()),
        policy: PolicyKind::Direct,
        lifting: Lifting::new(h.clone())?,
        y_box: IntervalVector::from_bounds(&[-1.0; 3], &[1.0; 3])?,
        disturbance: DisturbanceSpec::symmetric(&[0.0])?,
        anchor: Anchor::default(),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let init = Mlp::random(&[2, 16, 16, 1], &mut rng)?;
    let cfg = TrainConfig { epsilon: 0.02, lambda: 1.0, max_iters: 5000, ..TrainConfig::default() };

    let report = train(&problem, &init, &cfg)?;
    println!(
        "{:?} after {} steps, margin {:.4}, eta {:?}",
        report.status, report.steps, report.certificate.margin, report.eta.to_rows()
    );
    for row in report.trace.iter().step_by(50) {
        println!("  step {:>4}: loss {:.4} margin {:+.4}", row.iteration, row.loss, row.margin);
    }

    let net = report.network.expect("training returns the final network");
    let policy = PolicyKind::Direct.build(net)?;
    let cl = ClosedLoop::new(&problem.model, &policy);
    let poly = Polytope::new(h, vec![-1.0; 3], vec![1.0; 3])?;
    let center = poly.center()?;
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..20 {
        let dir = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
        let x0 = poly.boundary_point(&center, &dir)?;
        let traj = simulate(|x, w| cl.field(x, w), &x0, |_, _| vec![0.0], 1e-2, 10.0)?;
        worst = traj.states.iter().map(|x| poly.exit_margin(x)).fold(worst, f64::max);
    }
    println!("largest constraint value along 20 boundary trajectories: {worst:.2e}");
    Ok(())
}
