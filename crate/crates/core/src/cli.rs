//! Command-line entry points: `certify`, `train`, `simulate` and `refine`.
//!
//! Every command reads a [`RunConfig`] and writes its artifacts into the
//! output directory (`--out`, else the config's `output.dir`, else `.`).

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::{Built, EtaConfig, InitialStates, LayerConfig, NetworkConfig, RunConfig};
use crate::dynamics::{simulate, PiecewiseConstant, System};
use crate::embedding::{Certificate, ClosedLoop};
use crate::error::{Error, Result};
use crate::lifted::{polytope_edges, polytope_vertices, refined_faces, Polytope};
use crate::trainer::{train_from, TrainStatus};

#[derive(Debug, Parser)]
#[command(name = "polycert", version, about = "Certify and train forward-invariant polytopes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the polytope certificate for the configured network and η.
    Certify(CommonArgs),
    /// Train network and η until the certificate holds.
    Train(CommonArgs),
    /// Integrate closed-loop trajectories under random disturbances.
    Simulate(CommonArgs),
    /// Refine the configured lifted box and each of its faces.
    Refine(CommonArgs),
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Overrides the training, simulation and network-init seeds.
    #[arg(long)]
    pub seed: Option<u64>,
}

/// What a successful command found.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Ok,
    NotCertified,
}

/// Exit-code contract: 0 success, 1 not certified, 2 configuration or I/O
/// error, 3 empty intersection during refinement.
pub fn exit_code(result: &Result<Outcome>) -> i32 {
    match result {
        Ok(Outcome::Ok) => 0,
        Ok(Outcome::NotCertified) => 1,
        Err(Error::EmptyIntersection { .. }) => 3,
        Err(_) => 2,
    }
}

pub fn run(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        Command::Certify(a) => certify(a),
        Command::Train(a) => train(a),
        Command::Simulate(a) => simulate_cmd(a),
        Command::Refine(a) => refine(a),
    }
}

struct Loaded {
    cfg: RunConfig,
    base: PathBuf,
    out: PathBuf,
}

fn load(args: &CommonArgs) -> Result<Loaded> {
    let (mut cfg, base) = RunConfig::load(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.training.seed = seed;
        cfg.simulate.seed = seed;
        if let NetworkConfig::Init(init) = &mut cfg.network {
            init.seed = seed;
        }
    }
    let out = args
        .out
        .clone()
        .or_else(|| cfg.output.as_ref().map(|o| o.dir.clone()))
        .unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&out)?;
    Ok(Loaded { cfg, base, out })
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

fn certify(args: &CommonArgs) -> Result<Outcome> {
    let l = load(args)?;
    let built = l.cfg.build(&l.base)?;
    let cert = built.problem.certify(&built.net, &built.eta)?;
    write_json(&l.out.join("certificate.json"), &cert)?;
    eprintln!("certified: {} (margin {:.6})", cert.certified, cert.margin);
    Ok(status(&cert))
}

fn status(cert: &Certificate) -> Outcome {
    if cert.certified {
        Outcome::Ok
    } else {
        Outcome::NotCertified
    }
}

fn train(args: &CommonArgs) -> Result<Outcome> {
    let l = load(args)?;
    let Built {
        problem, net, eta, ..
    } = l.cfg.build(&l.base)?;
    let report = train_from(&problem, &net, &eta, &l.cfg.training)?;
    let trained = report
        .network
        .clone()
        .ok_or(Error::Config("training produced no network".into()))?;
    write_json(&l.out.join("train_report.json"), &report)?;
    std::fs::write(l.out.join("loss_trace.csv"), report.trace_csv())?;
    std::fs::write(l.out.join("network.json"), trained.to_json()? + "\n")?;

    // Same problem with the trained parameters, ready for `certify`.
    let mut cfg = l.cfg.clone();
    cfg.network = NetworkConfig::Inline(
        trained
            .layers()
            .iter()
            .map(|layer| LayerConfig {
                w: layer.weight.clone(),
                b: layer.bias.clone(),
            })
            .collect(),
    );
    cfg.polytope.eta = EtaConfig::Matrix(report.eta.clone());
    cfg.output = None;
    write_json(&l.out.join("trained_config.json"), &cfg)?;

    eprintln!(
        "{:?} after {} steps (margin {:.6}, {:.1} s)",
        report.status, report.steps, report.certificate.margin, report.wall_time_s
    );
    Ok(match report.status {
        TrainStatus::Certified => Outcome::Ok,
        TrainStatus::NotCertified => Outcome::NotCertified,
    })
}

fn initial_states(built: &Built, x0: &InitialStates, rng: &mut ChaCha8Rng) -> Result<Vec<Vec<f64>>> {
    let n = built.problem.model.state_dim();
    match x0 {
        InitialStates::Points(pts) => {
            if let Some(p) = pts.iter().find(|p| p.len() != n) {
                return Err(Error::Config(format!(
                    "initial state has {} entries, model state dimension is {n}",
                    p.len()
                )));
            }
            Ok(pts.clone())
        }
        InitialStates::Vertices => polytope_vertices(&built.polytope),
        InitialStates::Boundary(count) => {
            let center = built.polytope.center()?;
            (0..*count)
                .map(|_| {
                    let dir: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect();
                    built.polytope.boundary_point(&center, &dir)
                })
                .collect()
        }
    }
}

fn simulate_cmd(args: &CommonArgs) -> Result<Outcome> {
    let l = load(args)?;
    let built = l.cfg.build(&l.base)?;
    let sim = &l.cfg.simulate;
    if !(sim.hold > 0.0) {
        return Err(Error::Config(format!("hold must be positive, got {}", sim.hold)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(sim.seed);
    let starts = initial_states(&built, &sim.x0, &mut rng)?;
    let policy = built.problem.policy.build(built.net.clone())?;
    let cl = ClosedLoop::new(&built.problem.model, &policy);
    let h = &built.polytope.h;
    let (n, m) = (h.cols(), h.rows());

    let mut csv = String::from("trajectory,t");
    for i in 0..n {
        write!(csv, ",x{i}").unwrap();
    }
    for i in 0..m {
        write!(csv, ",y{i}").unwrap();
    }
    csv.push_str(",contained\n");

    let mut exits = 0usize;
    for (k, x0) in starts.iter().enumerate() {
        let signal =
            PiecewiseConstant::sample(built.problem.disturbance.bounds(), sim.hold, sim.horizon, &mut rng);
        let traj = simulate(|x, w| cl.field(x, w), x0, |_, t| signal.at(t), sim.dt, sim.horizon)?;
        let mut left = false;
        for (t, x) in traj.times.iter().zip(&traj.states) {
            let y = h.matvec(x)?;
            let inside = contained(&built.polytope, &y);
            left |= !inside;
            write!(csv, "{k},{t}").unwrap();
            for v in x.iter().chain(&y) {
                write!(csv, ",{v}").unwrap();
            }
            writeln!(csv, ",{inside}").unwrap();
        }
        exits += left as usize;
    }
    std::fs::write(l.out.join("trajectories.csv"), csv)?;
    eprintln!("{} trajectories, {exits} left the polytope", starts.len());
    Ok(Outcome::Ok)
}

// Small relative slack so states on the boundary still count as inside.
fn contained(p: &Polytope, y: &[f64]) -> bool {
    y.iter().zip(p.y_lo.iter().zip(&p.y_hi)).all(|(v, (lo, hi))| {
        let tol = 1e-9 * (1.0 + lo.abs().max(hi.abs()));
        *v >= lo - tol && *v <= hi + tol
    })
}

#[derive(Serialize)]
struct BoxJson {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

#[derive(Serialize)]
struct FaceJson {
    index: usize,
    upper: bool,
    lo: Vec<f64>,
    hi: Vec<f64>,
}

#[derive(Serialize)]
struct RefineJson {
    input: BoxJson,
    refined: BoxJson,
    faces: Vec<FaceJson>,
}

fn refine(args: &CommonArgs) -> Result<Outcome> {
    let l = load(args)?;
    let p = &l.cfg.polytope;
    let lifting = crate::lifted::Lifting::new(p.h.clone())?;
    let y = crate::interval::IntervalVector::from_bounds(&p.y_lo, &p.y_hi)?;
    let refined = lifting.refine(&y)?;
    let faces = refined_faces(&lifting, &y)?
        .into_iter()
        .map(|f| FaceJson {
            index: f.index,
            upper: f.upper,
            lo: f.y_box.lo(),
            hi: f.y_box.hi(),
        })
        .collect();
    let json = RefineJson {
        input: BoxJson {
            lo: y.lo(),
            hi: y.hi(),
        },
        refined: BoxJson {
            lo: refined.lo(),
            hi: refined.hi(),
        },
        faces,
    };
    write_json(&l.out.join("refine.json"), &json)?;

    let n = p.h.cols();
    if n <= 3 {
        let poly = Polytope::new(p.h.clone(), p.y_lo.clone(), p.y_hi.clone())?;
        let verts = polytope_vertices(&poly)?;
        let edges = polytope_edges(&poly, &verts)?;
        let mut csv = String::from("edge");
        for end in ["a", "b"] {
            for i in 0..n {
                write!(csv, ",{end}{i}").unwrap();
            }
        }
        csv.push('\n');
        for (k, (a, b)) in edges.iter().enumerate() {
            write!(csv, "{k}").unwrap();
            for v in verts[*a].iter().chain(&verts[*b]) {
                write!(csv, ",{v}").unwrap();
            }
            csv.push('\n');
        }
        std::fs::write(l.out.join("edges.csv"), csv)?;
    }
    Ok(Outcome::Ok)
}

/// Size the global thread pool from `POLYCERT_THREADS` when it is set.
pub fn configure_threads() -> Result<()> {
    let Ok(v) = std::env::var("POLYCERT_THREADS") else {
        return Ok(());
    };
    let threads: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|t| *t > 0)
        .ok_or_else(|| Error::Config(format!("POLYCERT_THREADS must be a positive integer, got {v:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Error::Config(e.to_string()))
}
