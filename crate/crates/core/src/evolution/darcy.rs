//! Physical velocities and pressures recovered from a state.

use serde::Serialize;

use crate::discretization::Field2D;
use crate::error::Result;
use crate::geometry::{transformed_gradient, PeriodicProfile};
use crate::mud::apply_am;
use crate::water::apply_aw;

use super::operator::NonlocalOperator;
use super::velocity::PhiOptions;
use super::SimState;

/// Fields of one phase on its reference grid, with physical node positions.
#[derive(Debug, Clone, Serialize)]
pub struct PhaseFields {
    pub x: Vec<f64>,
    /// Physical height `y + (1 - y²) f(x)` of each node.
    pub y: Vec<f64>,
    pub potential: Vec<f64>,
    pub pressure: Vec<f64>,
    pub velocity_x: Vec<f64>,
    pub velocity_y: Vec<f64>,
    /// `max |div v|` over interior nodes.
    pub divergence_inf: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DarcyFields {
    pub t: f64,
    pub water: PhaseFields,
    pub mud: PhaseFields,
    pub interface_velocity: PeriodicProfile,
}

fn phase(
    f: &PeriodicProfile,
    v: &Field2D,
    rho_g: f64,
    divergence: &Field2D,
    mut velocity: impl FnMut(f64, f64) -> Result<(f64, f64)>,
) -> Result<PhaseFields> {
    let grid = &v.grid;
    let (gx, gy) = transformed_gradient(f, v)?;
    let mut out = PhaseFields {
        x: Vec::with_capacity(grid.len()),
        y: Vec::with_capacity(grid.len()),
        potential: v.values.clone(),
        pressure: Vec::with_capacity(grid.len()),
        velocity_x: Vec::with_capacity(grid.len()),
        velocity_y: Vec::with_capacity(grid.len()),
        divergence_inf: 0.0,
    };
    for i in 0..grid.nx {
        for (j, &y) in grid.y.iter().enumerate() {
            let k = grid.index(i, j);
            let yp = y + (1.0 - y * y) * f.nodal()[i];
            out.x.push(grid.x[i]);
            out.y.push(yp);
            out.pressure.push(v.values[k] - rho_g * yp);
            let (vx, vy) = velocity(gx.values[k], gy.values[k])?;
            out.velocity_x.push(vx);
            out.velocity_y.push(vy);
            if !grid.is_boundary_row(j) {
                out.divergence_inf = out.divergence_inf.max(divergence.values[k].abs());
            }
        }
    }
    Ok(out)
}

/// Solves for the velocity at `state` and returns both phases' Darcy fields:
/// `v_w = -∇u_w/μ_w`, `v_m = -∇u_m/μ_m(|∇u_m|²)`, `p = u - gρy`.
pub fn darcy_postprocess(op: &mut NonlocalOperator, state: &SimState, h: &PeriodicProfile) -> Result<DarcyFields> {
    let f = &state.f;
    let sol = op.solve_phi(h, f, &state.velocity, &PhiOptions::default())?;
    let eval = op.evaluate_detail(h, f, &sol.velocity)?;
    let params = op.params.clone();
    let mu_w = params.mu_w;

    // physical divergences: Δu_w / μ_w and div(∇u_m/μ_m) pulled back
    let div_w = apply_aw(f, &eval.water.v)?;
    let div_w = Field2D::from_values(&div_w.grid, div_w.values.iter().map(|d| -d / mu_w).collect())?;
    let div_m = apply_am(f, &eval.mud.v, &params.ev)?;

    let water = phase(f, &eval.water.v, params.g * params.rho_w, &div_w, |a, b| Ok((-a / mu_w, -b / mu_w)))?;
    let ev = &params.ev;
    let mud = phase(f, &eval.mud.v, params.g * params.rho_m, &div_m, |a, b| {
        let (mu, _) = ev.eval(a * a + b * b)?;
        Ok((-a / mu, -b / mu))
    })?;
    Ok(DarcyFields {
        t: state.t,
        water,
        mud,
        interface_velocity: sol.velocity,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::ModelParams;
    use crate::rheology::{EffectiveViscosity, ViscosityModel};

    #[test]
    fn flat_state_is_hydrostatic() {
        let params = ModelParams {
            rho_w: 1.0,
            rho_m: 1.6,
            g: 9.81,
            ..ModelParams::unit_newtonian()
        };
        let mut op = NonlocalOperator::new(params, 16, 9, 9).unwrap();
        let state = SimState::initial(PeriodicProfile::zeros(16).unwrap(), 0.1).unwrap();
        let h = PeriodicProfile::constant(16, 3.0).unwrap();
        let d = darcy_postprocess(&mut op, &state, &h).unwrap();
        for (p, y) in d.water.pressure.iter().zip(&d.water.y) {
            assert!((p - (3.0 - 9.81 * y)).abs() < 1e-10);
        }
        for (p, y) in d.mud.pressure.iter().zip(&d.mud.y) {
            assert!((p - (3.0 - 9.81 * 1.6 * y)).abs() < 1e-10);
        }
        let vmax = d.water.velocity_x.iter().chain(&d.mud.velocity_y).fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(vmax < 1e-9);
    }

    #[test]
    fn curved_state_is_nearly_divergence_free() {
        let params = ModelParams {
            gamma: 0.1,
            ev: EffectiveViscosity::new(ViscosityModel::Hectorite {
                mu_inf: 1.0,
                tau0: 1.0,
                beta: 1.0,
            }),
            ..ModelParams::unit_newtonian()
        };
        let mut op = NonlocalOperator::new(params, 16, 13, 13).unwrap();
        let f = PeriodicProfile::from_fn(16, |x| 0.05 * x.cos()).unwrap();
        let state = SimState::initial(f, 0.1).unwrap();
        let d = darcy_postprocess(&mut op, &state, &PeriodicProfile::zeros(16).unwrap()).unwrap();
        assert!(d.water.divergence_inf < 1e-8, "{}", d.water.divergence_inf);
        assert!(d.mud.divergence_inf < 1e-8, "{}", d.mud.divergence_inf);
        assert!(d.interface_velocity.sup_norm() > 1e-4);
    }
}
