//! Solving for the interface velocity from several starting guesses.

use mudflow::evolution::{NonlocalOperator, PhiOptions};
use mudflow::{EffectiveViscosity, ModelParams, PeriodicProfile, ViscosityModel};

fn main() -> mudflow::Result<()> {
    let nx = 16;
    let params = ModelParams {
        gamma: 0.1,
        rho_m: 1.2,
        ev: EffectiveViscosity::new(ViscosityModel::Thickening { mu0: 1.0, mu_inf: 1.5, beta: 1.0 }),
        ..ModelParams::unit_newtonian()
    };
    let mut op = NonlocalOperator::new(params, nx, 17, 17)?;
    let f = PeriodicProfile::from_fn(nx, |x| 0.1 * x.cos() - 0.04 * (2.0 * x).sin())?;
    let h = PeriodicProfile::from_fn(nx, |x| 1.0 + 0.2 * x.sin())?;
    let guess = PeriodicProfile::zeros(nx)?;
    let sol = op.solve_phi_probed(&h, &f, &guess, &PhiOptions::default(), 4, 0.1, 7)?;
    println!(
        "F found in {} Newton / {} GMRES steps, residual {:.2e}, raw mean {:.1e}",
        sol.newton_iterations, sol.gmres_iterations, sol.residual_inf, sol.raw_mean
    );
    println!("newton history: {:?}", sol.history.iter().map(|r| format!("{r:.1e}")).collect::<Vec<_>>());
    if let Some(p) = sol.probe {
        println!("{} solves, max distance between roots {:.2e}, unique: {}", p.solves, p.max_distance, p.unique);
    }
    Ok(())
}
