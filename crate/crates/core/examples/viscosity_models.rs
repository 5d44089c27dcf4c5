//! Viscosity laws, the effective viscosity `μ_m` and the admissibility checks.

use mudflow::rheology::{check_conditions, check_effective_conditions, eval_mu};
use mudflow::{EffectiveViscosity, ViscosityModel};

fn main() -> mudflow::Result<()> {
    let models = [
        ViscosityModel::Newtonian { mu0: 1.0 },
        ViscosityModel::Hectorite { mu_inf: 1.0, tau0: 1.0, beta: 1.0 },
        ViscosityModel::Hectorite { mu_inf: 1.0, tau0: 4.5, beta: 1.0 },
        ViscosityModel::Thickening { mu0: 1.0, mu_inf: 1.5, beta: 1.0 },
    ];
    for model in models {
        println!("{model:?}");
        let ev = EffectiveViscosity::new(model);
        println!("  {:>8} {:>12} {:>12} {:>14}", "r", "mu(r)", "mu_m(r)", "mu_m'(r)");
        for r in [0.0, 0.25, 1.0, 4.0, 16.0] {
            let (mu, _) = eval_mu(&model, r)?;
            let (mm, dmm) = ev.eval(r)?;
            println!("  {r:>8.2} {mu:>12.6} {mm:>12.6} {dmm:>14.6e}");
        }
        let base = check_conditions(&model, 100.0, 1001)?;
        let eff = check_effective_conditions(&ev, 100.0, 1001)?;
        println!(
            "  closed-form rule: {:?}, base bounds ok: {}, effective bounds [{:.4}, {:.4}] ok: {}",
            base.closed_form, base.ok, eff.m_hat, eff.big_m_hat, eff.ok
        );
    }
    Ok(())
}
