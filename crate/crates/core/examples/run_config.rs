//! Drive everything from a JSON configuration, the same way the CLI does.
//!
//! `cargo run --example run_config -- configs/segway.json`

use std::path::PathBuf;

use polycert::config::RunConfig;

fn main() -> polycert::Result<()> {
    let path = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs/hexagon.json"));
    let (cfg, base) = RunConfig::load(&path)?;
    let built = cfg.build(&base)?;
    println!("model {:?}, network {:?}", cfg.model.model, built.net.dims());
    println!("lifting {}x{}, eta {:?}", built.polytope.h.rows(), built.polytope.h.cols(), built.eta.to_rows());
    println!("{} disturbance partitions", built.problem.disturbance.partitions().len());
    let cert = built.problem.certify(&built.net, &built.eta)?;
    println!("certified {} with margin {:.6}", cert.certified, cert.margin);
    Ok(())
}
