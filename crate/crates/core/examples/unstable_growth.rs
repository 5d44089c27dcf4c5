//! Heavy water over light mud without surface tension: the interface grows
//! until the guard stops the run. Writes CSV and SVG output to a directory.

use std::path::PathBuf;

use mudflow::evolution::{dispersion_fit, growth_rate, Termination};
use mudflow::io::config::{InitialData, InitialShape, RunConfig};
use mudflow::io::write_outputs;

fn main() -> mudflow::Result<()> {
    let mut cfg = RunConfig::default();
    cfg.params.rho_w = 2.0;
    cfg.params.rho_m = 1.0;
    cfg.params.gamma = 0.0;
    cfg.initial = InitialData::Shape(InitialShape::Cosine { k: 2, amplitude: 1e-3 });
    cfg.run.t_end = 8.0;
    cfg.run.dt = 0.02;
    cfg.run.adaptive = true;
    cfg.run.guard_f = 0.3;
    cfg.output.dir = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("mudflow-unstable"));

    let mut stepper = cfg.stepper()?;
    let traj = mudflow::evolution::simulate(&mut stepper, cfg.initial_profile()?)?;
    match &traj.termination {
        Termination::Completed => println!("completed at t = {}", traj.final_state.t),
        Termination::Guard { t, reason } => println!("stopped at t = {t:.3}: {reason}"),
    }
    // the early, linear part of the run
    let early = mudflow::Trajectory {
        records: traj.records.iter().filter(|r| r.t <= 1.0).cloned().collect(),
        termination: Termination::Completed,
        final_state: traj.final_state.clone(),
    };
    let lambda = growth_rate(2, &cfg.params.model_params());
    println!("early growth rate {:.5} vs lambda_2 {lambda:.5}", dispersion_fit(&early, 2)?);
    for p in write_outputs(&traj, &cfg, &cfg.output.dir)? {
        println!("wrote {}", p.display());
    }
    Ok(())
}
