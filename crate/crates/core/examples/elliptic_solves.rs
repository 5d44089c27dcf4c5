//! Water and mud potentials under a curved interface.

use mudflow::discretization::{Domain, Edge};
use mudflow::mud::MudSolver;
use mudflow::water::WaterSolver;
use mudflow::{EffectiveViscosity, Grid, PeriodicProfile, ViscosityModel};

fn main() -> mudflow::Result<()> {
    let (nx, ny) = (32, 17);
    let f = PeriodicProfile::from_fn(nx, |x| 0.2 * x.cos() + 0.05 * (3.0 * x).sin())?;

    let mut water = WaterSolver::new(Grid::new(nx, ny, Domain::Water)?, 1.0)?;
    let flux = PeriodicProfile::from_fn(nx, |x| 0.1 * (2.0 * x).cos())?;
    let lid = PeriodicProfile::constant(nx, 1.0)?;
    let w = water.solve(&f, &flux, &lid)?;
    println!(
        "water: interior residual {:.2e}, boundary residual {:.2e}, interface trace sup {:.4}",
        w.residual_inf,
        w.bc_residual_inf,
        w.v.trace(Edge::Interface)?.sup_norm()
    );

    let ev = EffectiveViscosity::new(ViscosityModel::Hectorite { mu_inf: 1.0, tau0: 1.0, beta: 1.0 });
    let mut mud = MudSolver::new(Grid::new(nx, ny, Domain::Mud)?, ev)?;
    let p = PeriodicProfile::from_fn(nx, |x| 1.0 + 0.3 * x.sin())?;
    let m = mud.solve(&f, &p, None)?;
    println!(
        "mud: {} Picard iterations, residual {:.2e}, max principle violation {:.1e}, min eigenvalue {:.4}",
        m.iterations, m.residual_inf, m.max_principle.violation, m.min_eigenvalue
    );
    println!("mud residual history: {:?}", m.history.iter().map(|r| format!("{r:.1e}")).collect::<Vec<_>>());
    Ok(())
}
