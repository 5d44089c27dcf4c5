//! Pressure and velocity fields in both phases, printed as JSON.

use mudflow::evolution::{darcy_postprocess, NonlocalOperator};
use mudflow::{ModelParams, PeriodicProfile, SimState};

fn main() -> mudflow::Result<()> {
    let nx = 16;
    let params = ModelParams { gamma: 0.1, rho_m: 1.2, ..ModelParams::unit_newtonian() };
    let mut op = NonlocalOperator::new(params, nx, 9, 9)?;
    let f = PeriodicProfile::from_fn(nx, |x| 0.1 * x.cos())?;
    let state = SimState::initial(f, 0.01)?;
    let h = PeriodicProfile::constant(nx, 1.0)?;
    let fields = darcy_postprocess(&mut op, &state, &h)?;
    eprintln!(
        "max |div v|: water {:.1e}, mud {:.1e}; interface velocity sup {:.4}",
        fields.water.divergence_inf,
        fields.mud.divergence_inf,
        fields.interface_velocity.sup_norm()
    );
    println!("{}", serde_json::to_string(&fields).expect("serializable fields"));
    Ok(())
}
