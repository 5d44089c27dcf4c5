//! Decay of a single mode against the flat-state rate, Newtonian and shear thickening.

use mudflow::evolution::{dispersion_fit, growth_rate, simulate, BoundaryData, SimOptions, Stepper};
use mudflow::{EffectiveViscosity, ModelParams, PeriodicProfile, ViscosityModel};

fn main() -> mudflow::Result<()> {
    let nx = 16;
    let opts = SimOptions { t_end: 1.0, dt: 0.01, ..SimOptions::default() };
    for model in [
        ViscosityModel::Newtonian { mu0: 1.0 },
        ViscosityModel::Thickening { mu0: 1.0, mu_inf: 1.5, beta: 1.0 },
    ] {
        let params = ModelParams {
            gamma: 0.1,
            rho_m: 1.2,
            ev: EffectiveViscosity::new(model),
            ..ModelParams::unit_newtonian()
        };
        for k in 1..=3 {
            let mut stepper =
                Stepper::new(params.clone(), nx, 17, 17, BoundaryData::Constant { value: 1.0 }, opts.clone())?;
            let f0 = PeriodicProfile::from_fn(nx, |x| 1e-4 * (k as f64 * x).cos())?;
            let traj = simulate(&mut stepper, f0)?;
            let fitted = dispersion_fit(&traj, k)?;
            let predicted = growth_rate(k, &params);
            println!(
                "{:<10} k={k}: fitted {fitted:+.6} predicted {predicted:+.6} rel {:.1e}",
                if model.is_newtonian() { "newtonian" } else { "thickening" },
                (fitted - predicted).abs() / predicted.abs()
            );
        }
    }
    Ok(())
}
