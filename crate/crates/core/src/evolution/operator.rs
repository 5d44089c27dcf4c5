use std::sync::Arc;

use crate::discretization::{Domain, Edge, Grid};
use crate::error::{Error, Result};
use crate::geometry::{curvature, PeriodicProfile};
use crate::mud::{boundary_bm, MudScheme, MudSolve, MudSolver};
use crate::water::{WaterSolve, WaterSolver};

use super::ModelParams;

/// Everything produced by one evaluation of `𝓕(h, f, F)`.
#[derive(Debug, Clone)]
pub struct CfEvaluation {
    pub residual: PeriodicProfile,
    /// Dirichlet data handed to the mud problem.
    pub mud_data: PeriodicProfile,
    pub water: WaterSolve,
    pub mud: MudSolve,
}

/// Running statistics over the elliptic solves done by a [`NonlocalOperator`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveStats {
    pub evaluations: usize,
    pub max_mud_iterations: usize,
    pub worst_max_principle_violation: f64,
    pub min_ellipticity: f64,
}

impl Default for SolveStats {
    fn default() -> Self {
        Self {
            evaluations: 0,
            max_mud_iterations: 0,
            worst_max_principle_violation: 0.0,
            min_ellipticity: f64::INFINITY,
        }
    }
}

/// `𝓕(h, f, F) = F + B_m(f, R(f, tr T(f)[-F, h] - γκ(f) + g(ρ_m - ρ_w) f))`,
/// with the water and mud solvers (and their factorization caches) attached.
#[derive(Debug, Clone)]
pub struct NonlocalOperator {
    pub params: ModelParams,
    water: WaterSolver,
    mud: MudSolver,
    stats: SolveStats,
}

impl NonlocalOperator {
    pub fn new(params: ModelParams, nx: usize, ny_w: usize, ny_m: usize) -> Result<Self> {
        params.validate()?;
        let water = WaterSolver::new(Grid::new(nx, ny_w, Domain::Water)?, params.mu_w)?;
        let mut mud = MudSolver::new(Grid::new(nx, ny_m, Domain::Mud)?, params.ev.clone())?;
        // tight enough that finite-difference Jacobian products stay clean
        mud.tol = 1e-11;
        Ok(Self {
            params,
            water,
            mud,
            stats: SolveStats::default(),
        })
    }

    pub fn nx(&self) -> usize {
        self.water.grid.nx
    }

    pub fn water_grid(&self) -> &Arc<Grid> {
        &self.water.grid
    }

    pub fn mud_grid(&self) -> &Arc<Grid> {
        &self.mud.grid
    }

    pub fn set_mud_scheme(&mut self, scheme: MudScheme) {
        self.mud.scheme = scheme;
    }

    pub fn set_mud_tolerance(&mut self, tol: f64) {
        self.mud.tol = tol;
    }

    pub fn stats(&self) -> SolveStats {
        self.stats
    }

    /// Returns the statistics gathered since the last call and resets them.
    pub fn take_stats(&mut self) -> SolveStats {
        std::mem::take(&mut self.stats)
    }

    /// `-γκ(f) + g(ρ_m - ρ_w) f`, the jump part of the mud data.
    pub fn interface_jump(&self, f: &PeriodicProfile) -> Result<PeriodicProfile> {
        let p = &self.params;
        let grav = p.g * (p.rho_m - p.rho_w);
        if p.gamma == 0.0 {
            return Ok(f * grav);
        }
        let kappa = curvature(f)?;
        Ok(f.zip_map(&kappa, |fv, kv| grav * fv - p.gamma * kv))
    }

    pub fn evaluate_detail(
        &mut self,
        h: &PeriodicProfile,
        f: &PeriodicProfile,
        velocity: &PeriodicProfile,
    ) -> Result<CfEvaluation> {
        let n = self.nx();
        if h.n() != n || f.n() != n || velocity.n() != n {
            return Err(Error::Shape(format!("profiles must have {n} nodes")));
        }
        let water = self.water.solve(f, &(velocity * -1.0), h)?;
        let trace = water.v.trace(Edge::Interface)?;
        let mud_data = &trace + &self.interface_jump(f)?;
        let mud = self.mud.solve(f, &mud_data, None)?;
        let flux = boundary_bm(f, &mud.v, &self.params.ev)?;
        let residual = velocity + &flux;

        let s = &mut self.stats;
        s.evaluations += 1;
        s.max_mud_iterations = s.max_mud_iterations.max(mud.iterations);
        s.worst_max_principle_violation = s.worst_max_principle_violation.max(mud.max_principle.violation);
        s.min_ellipticity = s.min_ellipticity.min(mud.min_eigenvalue);
        Ok(CfEvaluation {
            residual,
            mud_data,
            water,
            mud,
        })
    }

    pub fn evaluate(
        &mut self,
        h: &PeriodicProfile,
        f: &PeriodicProfile,
        velocity: &PeriodicProfile,
    ) -> Result<PeriodicProfile> {
        Ok(self.evaluate_detail(h, f, velocity)?.residual)
    }
}

/// One-shot evaluation of `𝓕(h, f, F)` on fresh solvers.
pub fn evaluate_cf(
    h: &PeriodicProfile,
    f: &PeriodicProfile,
    velocity: &PeriodicProfile,
    params: &ModelParams,
    ny: usize,
) -> Result<PeriodicProfile> {
    NonlocalOperator::new(params.clone(), f.n(), ny, ny)?.evaluate(h, f, velocity)
}
