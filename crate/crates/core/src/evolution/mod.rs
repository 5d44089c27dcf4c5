//! Interface dynamics: the nonlocal operator `𝓕`, the implicit velocity
//! `F = Φ(h, f)`, flat-state symbols and time integration.

mod darcy;
mod operator;
mod stepping;
mod velocity;

pub use darcy::{darcy_postprocess, DarcyFields, PhaseFields};
pub use operator::{evaluate_cf, CfEvaluation, NonlocalOperator, SolveStats};
pub use stepping::{
    dispersion_fit, simulate, simulate_from, BoundaryData, Scheme, SimOptions, SimState, SinusoidTerm, StepRecord,
    Stepper, Termination, Trajectory,
};
pub use velocity::{gmres, GmresOutcome, PhiOptions, PhiSolve, UniquenessProbe, UNIQUENESS_TOL};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rheology::{EffectiveViscosity, ViscosityModel};

/// Physical parameters of the two-phase system.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub mu_w: f64,
    pub rho_w: f64,
    pub rho_m: f64,
    pub g: f64,
    /// Surface tension, `>= 0`.
    pub gamma: f64,
    pub ev: EffectiveViscosity,
}

impl ModelParams {
    pub fn new(mu_w: f64, rho_w: f64, rho_m: f64, g: f64, gamma: f64, ev: EffectiveViscosity) -> Result<Self> {
        let p = Self {
            mu_w,
            rho_w,
            rho_m,
            g,
            gamma,
            ev,
        };
        p.validate()?;
        Ok(p)
    }

    /// Unit Newtonian setup: `μ_w = μ_m(0) = 1`, `g = 1`, equal densities, no surface tension.
    pub fn unit_newtonian() -> Self {
        Self {
            mu_w: 1.0,
            rho_w: 1.0,
            rho_m: 1.0,
            g: 1.0,
            gamma: 0.0,
            ev: EffectiveViscosity::new(ViscosityModel::Newtonian { mu0: 1.0 }),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        if !(self.mu_w > 0.0 && self.mu_w.is_finite()) {
            errs.push(format!("mu_w must be positive, got {}", self.mu_w));
        }
        if !(self.rho_w > 0.0 && self.rho_w.is_finite()) {
            errs.push(format!("rho_w must be positive, got {}", self.rho_w));
        }
        if !(self.rho_m > 0.0 && self.rho_m.is_finite()) {
            errs.push(format!("rho_m must be positive, got {}", self.rho_m));
        }
        if !(self.g >= 0.0 && self.g.is_finite()) {
            errs.push(format!("g must be nonnegative, got {}", self.g));
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            errs.push(format!("gamma must be nonnegative, got {}", self.gamma));
        }
        if !(self.ev.c > 0.0) {
            errs.push(format!("gap constant must be positive, got {}", self.ev.c));
        }
        if let Err(e) = self.ev.base.validate() {
            errs.push(e.to_string());
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(errs))
        }
    }

    /// `γ > 0` or `ρ_m > ρ_w`.
    pub fn stability_ok(&self) -> bool {
        self.gamma > 0.0 || self.rho_m > self.rho_w
    }

    pub fn mu_m0(&self) -> f64 {
        self.ev.mu_m_at_zero()
    }
}

/// Flat-state symbols of mode `k`: the multiplier `m(k)` of `∂_F 𝓕` and the
/// growth rate `λ_k` of `∂_f Φ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Symbols {
    pub k: i64,
    pub m: f64,
    pub lambda: f64,
}

pub fn linearized_symbols(k: i64, params: &ModelParams) -> Result<Symbols> {
    if k == 0 {
        return Err(Error::Domain("mode k = 0 is excluded (mean-zero spaces)".into()));
    }
    Ok(Symbols {
        k,
        m: multiplier_m(k, params),
        lambda: growth_rate(k, params),
    })
}

/// `m(k) = 1 + (μ_w/μ_m(0)) tanh²k`; equals 1 at `k = 0`.
pub fn multiplier_m(k: i64, params: &ModelParams) -> f64 {
    let t = (k.unsigned_abs() as f64).tanh();
    1.0 + params.mu_w / params.mu_m0() * t * t
}

/// `λ_k = k tanh k / (μ_m(0) + μ_w tanh²k) · [g(ρ_w - ρ_m) - k²γ]`; zero at `k = 0`.
pub fn growth_rate(k: i64, params: &ModelParams) -> f64 {
    let kk = k.unsigned_abs() as f64;
    let t = kk.tanh();
    kk * t / (params.mu_m0() + params.mu_w * t * t) * (params.g * (params.rho_w - params.rho_m) - kk * kk * params.gamma)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn symbol_values() {
        let p = ModelParams::unit_newtonian();
        let s = linearized_symbols(1, &p).unwrap();
        assert_abs_diff_eq!(s.m, 1.580026, epsilon = 1e-6);
        assert_eq!(s.lambda, 0.0);
        let p = ModelParams {
            rho_m: 2.0,
            ..ModelParams::unit_newtonian()
        };
        let t1 = 1.0f64.tanh();
        assert_abs_diff_eq!(growth_rate(1, &p), -t1 / (1.0 + t1 * t1), epsilon = 1e-15);
        assert_abs_diff_eq!(growth_rate(1, &p), -0.482014, epsilon = 1e-6);
        assert_eq!(growth_rate(-3, &p), growth_rate(3, &p));
        assert!(linearized_symbols(0, &p).is_err());
    }

    #[test]
    fn stable_parameters_damp_all_modes() {
        let p = ModelParams {
            gamma: 0.1,
            rho_m: 1.2,
            ..ModelParams::unit_newtonian()
        };
        assert!(p.stability_ok());
        assert!((1..40).all(|k| growth_rate(k, &p) < 0.0));

        let p = ModelParams {
            gamma: 0.1,
            rho_m: 0.5,
            ..ModelParams::unit_newtonian()
        };
        assert!(p.stability_ok());
        assert!(growth_rate(1, &p) > 0.0);
        assert!((3..40).all(|k| growth_rate(k, &p) < 0.0));

        let p = ModelParams {
            rho_m: 0.5,
            ..ModelParams::unit_newtonian()
        };
        assert!(!p.stability_ok());
        assert!((1..40).all(|k| growth_rate(k, &p) > 0.0));
    }

    #[test]
    fn validation_lists_every_problem() {
        let p = ModelParams {
            mu_w: -1.0,
            gamma: -0.5,
            ..ModelParams::unit_newtonian()
        };
        match p.validate() {
            Err(Error::Config(v)) => assert_eq!(v.len(), 2),
            other => panic!("{other:?}"),
        }
    }
}
