//! Time integration of `∂_t f = Φ(h(t), f)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{PeriodicProfile, ProfileInput};

use super::operator::NonlocalOperator;
use super::velocity::{PhiOptions, UniquenessProbe};
use super::{growth_rate, ModelParams};

/// One term `(a cos kx + b sin kx) cos(ωt + phase)` of sinusoidal lid data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SinusoidTerm {
    pub k: u32,
    #[serde(default)]
    pub a: f64,
    #[serde(default)]
    pub b: f64,
    #[serde(default)]
    pub omega: f64,
    #[serde(default)]
    pub phase: f64,
}

/// The lid potential `h(t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BoundaryData {
    Constant {
        value: f64,
    },
    Sinusoids {
        #[serde(default)]
        mean: f64,
        terms: Vec<SinusoidTerm>,
    },
    /// Profiles at increasing times, linearly interpolated in between.
    Table {
        times: Vec<f64>,
        values: Vec<ProfileInput>,
    },
}

impl Default for BoundaryData {
    fn default() -> Self {
        BoundaryData::Constant { value: 0.0 }
    }
}

impl BoundaryData {
    pub fn is_constant(&self) -> bool {
        matches!(self, BoundaryData::Constant { .. })
    }

    /// Problems with the data, empty when usable on `n` nodes.
    pub fn problems(&self, n: usize) -> Vec<String> {
        let mut out = Vec::new();
        match self {
            BoundaryData::Constant { value } if !value.is_finite() => out.push("h value is not finite".into()),
            BoundaryData::Constant { .. } => {}
            BoundaryData::Sinusoids { terms, .. } => {
                for t in terms {
                    if t.k == 0 || t.k as usize >= n / 2 {
                        out.push(format!("h term wavenumber {} outside 1..{}", t.k, n / 2));
                    }
                }
            }
            BoundaryData::Table { times, values } => {
                if times.is_empty() || times.len() != values.len() {
                    out.push("h table needs equally many (>= 1) times and values".into());
                }
                if times.windows(2).any(|w| w[1] <= w[0]) {
                    out.push("h table times must increase strictly".into());
                }
                for v in values {
                    if let Err(e) = v.to_profile(n) {
                        out.push(format!("h table entry: {e}"));
                    }
                }
            }
        }
        out
    }

    pub fn at(&self, t: f64, n: usize) -> Result<PeriodicProfile> {
        match self {
            BoundaryData::Constant { value } => PeriodicProfile::constant(n, *value),
            BoundaryData::Sinusoids { mean, terms } => PeriodicProfile::from_fn(n, |x| {
                terms.iter().fold(*mean, |acc, s| {
                    let k = s.k as f64;
                    acc + (s.a * (k * x).cos() + s.b * (k * x).sin()) * (s.omega * t + s.phase).cos()
                })
            }),
            BoundaryData::Table { times, values } => {
                let last = times.len() - 1;
                if t <= times[0] {
                    return values[0].to_profile(n);
                }
                if t >= times[last] {
                    return values[last].to_profile(n);
                }
                let i = times.partition_point(|&s| s <= t) - 1;
                let w = (t - times[i]) / (times[i + 1] - times[i]);
                let a = values[i].to_profile(n)?;
                let b = values[i + 1].to_profile(n)?;
                Ok(a.zip_map(&b, |p, q| (1.0 - w) * p + w * q))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Exponential integrator: the flat-state rates `λ_k` exactly, the rest explicitly (ETDRK2).
    #[default]
    #[serde(alias = "semi_implicit")]
    Etdrk2,
    /// Classical explicit Runge–Kutta on `Φ`.
    Rk4,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimOptions {
    pub t_end: f64,
    pub dt: f64,
    pub dt_max: f64,
    pub scheme: Scheme,
    /// Halve `dt` after hard velocity solves, double it after easy runs.
    pub adaptive: bool,
    pub guard_f: f64,
    pub guard_velocity: f64,
    /// Keep every n-th step in the trajectory (the last one is always kept).
    pub record_every: usize,
    pub probe_uniqueness: bool,
    pub probe_count: usize,
    pub probe_radius: f64,
    pub seed: u64,
    pub phi: PhiOptions,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self {
            t_end: 1.0,
            dt: 0.01,
            dt_max: 0.1,
            scheme: Scheme::Etdrk2,
            adaptive: false,
            guard_f: 0.45,
            guard_velocity: 10.0,
            record_every: 1,
            probe_uniqueness: false,
            probe_count: 1,
            probe_radius: 0.1,
            seed: 0,
            phi: PhiOptions::default(),
        }
    }
}

/// Newton iterations above which `dt` is halved.
pub const HARD_SOLVE: usize = 15;
/// Newton iterations up to which a step counts as easy.
pub const EASY_SOLVE: usize = 4;
pub const EASY_STEPS_TO_GROW: usize = 5;

/// Complete restartable state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimState {
    pub t: f64,
    pub f: PeriodicProfile,
    /// Most recently solved velocity, reused as the next initial guess.
    pub velocity: PeriodicProfile,
    pub dt: f64,
    pub step: usize,
    pub easy_steps: usize,
}

impl SimState {
    pub fn initial(f0: PeriodicProfile, dt: f64) -> Result<Self> {
        let n = f0.n();
        Ok(Self {
            t: 0.0,
            f: f0,
            velocity: PeriodicProfile::zeros(n)?,
            dt,
            step: 0,
            easy_steps: 0,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepRecord {
    pub step: usize,
    pub t: f64,
    pub dt: f64,
    pub f: PeriodicProfile,
    pub velocity: PeriodicProfile,
    pub mean_f: f64,
    pub sup_f: f64,
    pub sup_velocity: f64,
    /// Largest `|mean F|` of the unprojected velocity roots in the step.
    pub velocity_mean: f64,
    pub newton_iterations: usize,
    pub gmres_iterations: usize,
    pub phi_residual: f64,
    pub evaluations: usize,
    pub max_mud_iterations: usize,
    pub max_principle_violation: f64,
    pub min_ellipticity: f64,
    pub probe: Option<UniquenessProbe>,
}

impl StepRecord {
    fn initial(state: &SimState) -> Self {
        Self {
            step: state.step,
            t: state.t,
            dt: 0.0,
            f: state.f.clone(),
            velocity: state.velocity.clone(),
            mean_f: state.f.mean(),
            sup_f: state.f.sup_norm(),
            sup_velocity: state.velocity.sup_norm(),
            velocity_mean: 0.0,
            newton_iterations: 0,
            gmres_iterations: 0,
            phi_residual: 0.0,
            evaluations: 0,
            max_mud_iterations: 0,
            max_principle_violation: 0.0,
            min_ellipticity: f64::INFINITY,
            probe: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Termination {
    Completed,
    Guard { t: f64, reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub records: Vec<StepRecord>,
    pub termination: Termination,
    pub final_state: SimState,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.t).collect()
    }

    /// `|a_k(t)|` over the records.
    pub fn mode_amplitudes(&self, k: i64) -> Vec<f64> {
        self.records.iter().map(|r| r.f.mode(k).norm()).collect()
    }

    pub fn worst_max_principle_violation(&self) -> f64 {
        self.records.iter().map(|r| r.max_principle_violation).fold(0.0, f64::max)
    }
}

/// Accumulates diagnostics across the stages of a step.
struct StageLog {
    velocity_mean: f64,
    newton: usize,
    gmres: usize,
    residual: f64,
    probe: Option<UniquenessProbe>,
}

fn phi_series(z: f64) -> (f64, f64) {
    if z.abs() < 1e-2 {
        let (z2, z3, z4, z5) = (z * z, z * z * z, z * z * z * z, z * z * z * z * z);
        (
            1.0 + z / 2.0 + z2 / 6.0 + z3 / 24.0 + z4 / 120.0 + z5 / 720.0,
            0.5 + z / 6.0 + z2 / 24.0 + z3 / 120.0 + z4 / 720.0 + z5 / 5040.0,
        )
    } else {
        let e = z.exp_m1();
        (e / z, (e - z) / (z * z))
    }
}

/// Advances states of one configured run.
#[derive(Debug, Clone)]
pub struct Stepper {
    pub op: NonlocalOperator,
    pub boundary: BoundaryData,
    pub opts: SimOptions,
}

impl Stepper {
    pub fn new(
        params: ModelParams,
        nx: usize,
        ny_w: usize,
        ny_m: usize,
        boundary: BoundaryData,
        opts: SimOptions,
    ) -> Result<Self> {
        let problems = boundary.problems(nx);
        if !problems.is_empty() {
            return Err(Error::Config(problems));
        }
        if !(opts.dt > 0.0) || !(opts.t_end > 0.0) {
            return Err(Error::Config(vec!["dt and t_end must be positive".into()]));
        }
        Ok(Self {
            op: NonlocalOperator::new(params, nx, ny_w, ny_m)?,
            boundary,
            opts,
        })
    }

    fn phi(&mut self, t: f64, f: &PeriodicProfile, guess: &PeriodicProfile, log: &mut StageLog) -> Result<PeriodicProfile> {
        if f.sup_norm() >= self.opts.guard_f {
            return Err(Error::Guard {
                t,
                reason: format!("sup|f| = {:.4} reached the guard {}", f.sup_norm(), self.opts.guard_f),
            });
        }
        let h = self.boundary.at(t, f.n())?;
        let opts = self.opts.phi;
        let s = if self.opts.probe_uniqueness && log.probe.is_none() {
            let seed = self.opts.seed ^ (t.to_bits().rotate_left(17));
            self.op
                .solve_phi_probed(&h, f, guess, &opts, self.opts.probe_count, self.opts.probe_radius, seed)?
        } else {
            self.op.solve_phi(&h, f, guess, &opts)?
        };
        log.velocity_mean = log.velocity_mean.max(s.raw_mean.abs());
        log.newton = log.newton.max(s.newton_iterations);
        log.gmres += s.gmres_iterations;
        log.residual = log.residual.max(s.residual_inf);
        if s.probe.is_some() {
            log.probe = s.probe;
        }
        if s.velocity.sup_norm() >= self.opts.guard_velocity {
            return Err(Error::Guard {
                t,
                reason: format!("sup|F| = {:.4e} reached the guard {}", s.velocity.sup_norm(), self.opts.guard_velocity),
            });
        }
        Ok(s.velocity)
    }

    /// One step of size `dt` from `state`; the returned state keeps `state.dt`.
    pub fn step(&mut self, state: &SimState, dt: f64) -> Result<(SimState, StepRecord)> {
        if !(dt > 0.0) {
            return Err(Error::Domain(format!("time step must be positive, got {dt}")));
        }
        let mut log = StageLog {
            velocity_mean: 0.0,
            newton: 0,
            gmres: 0,
            residual: 0.0,
            probe: None,
        };
        self.op.take_stats();
        let (t, f) = (state.t, &state.f);
        let (f_new, last_velocity) = match self.opts.scheme {
            Scheme::Etdrk2 => {
                let params = self.op.params.clone();
                let lin = |p: &PeriodicProfile| p.apply_multiplier(|k| growth_rate(k, &params));
                let f1 = self.phi(t, f, &state.velocity, &mut log)?;
                let n1 = &f1 - &lin(f);
                let a = &f.apply_multiplier(|k| (growth_rate(k, &params) * dt).exp())
                    + &n1.apply_multiplier(|k| dt * phi_series(growth_rate(k, &params) * dt).0);
                let f2 = self.phi(t + dt, &a, &f1, &mut log)?;
                let n2 = &f2 - &lin(&a);
                let corr = (&n2 - &n1).apply_multiplier(|k| dt * phi_series(growth_rate(k, &params) * dt).1);
                (&a + &corr, f2)
            }
            Scheme::Rk4 => {
                let k1 = self.phi(t, f, &state.velocity, &mut log)?;
                let k2 = self.phi(t + dt / 2.0, &(f + &(&k1 * (dt / 2.0))), &k1, &mut log)?;
                let k3 = self.phi(t + dt / 2.0, &(f + &(&k2 * (dt / 2.0))), &k2, &mut log)?;
                let k4 = self.phi(t + dt, &(f + &(&k3 * dt)), &k3, &mut log)?;
                let incr = PeriodicProfile::from_nodal(
                    (0..f.n())
                        .map(|j| dt / 6.0 * (k1.nodal()[j] + 2.0 * k2.nodal()[j] + 2.0 * k3.nodal()[j] + k4.nodal()[j]))
                        .collect(),
                )?;
                (f + &incr, k4)
            }
        };
        let t_new = t + dt;
        if !f_new.nodal().iter().all(|v| v.is_finite()) || f_new.sup_norm() >= self.opts.guard_f {
            return Err(Error::Guard {
                t: t_new,
                reason: format!("sup|f| = {:.4} reached the guard {}", f_new.sup_norm(), self.opts.guard_f),
            });
        }
        let stats = self.op.take_stats();
        let next = SimState {
            t: t_new,
            f: f_new,
            velocity: last_velocity,
            dt: state.dt,
            step: state.step + 1,
            easy_steps: state.easy_steps,
        };
        let record = StepRecord {
            step: next.step,
            t: next.t,
            dt,
            mean_f: next.f.mean(),
            sup_f: next.f.sup_norm(),
            sup_velocity: next.velocity.sup_norm(),
            f: next.f.clone(),
            velocity: next.velocity.clone(),
            velocity_mean: log.velocity_mean,
            newton_iterations: log.newton,
            gmres_iterations: log.gmres,
            phi_residual: log.residual,
            evaluations: stats.evaluations,
            max_mud_iterations: stats.max_mud_iterations,
            max_principle_violation: stats.worst_max_principle_violation,
            min_ellipticity: stats.min_ellipticity,
            probe: log.probe,
        };
        Ok((next, record))
    }

    /// Runs from `state` to `opts.t_end`, stopping early at a guard.
    pub fn run(&mut self, state: SimState) -> Result<Trajectory> {
        let t_end = self.opts.t_end;
        let every = self.opts.record_every.max(1);
        let mut records = vec![StepRecord::initial(&state)];
        let mut state = state;
        let mut termination = Termination::Completed;
        while t_end - state.t > 1e-12 * t_end.max(1.0) {
            let dt = state.dt.min(t_end - state.t);
            match self.step(&state, dt) {
                Ok((mut next, record)) => {
                    if self.opts.adaptive {
                        if record.newton_iterations > HARD_SOLVE {
                            next.dt = state.dt / 2.0;
                            next.easy_steps = 0;
                        } else if record.newton_iterations <= EASY_SOLVE {
                            next.easy_steps += 1;
                            if next.easy_steps >= EASY_STEPS_TO_GROW {
                                next.dt = (state.dt * 2.0).min(self.opts.dt_max);
                                next.easy_steps = 0;
                            }
                        } else {
                            next.easy_steps = 0;
                        }
                    }
                    let done = t_end - next.t <= 1e-12 * t_end.max(1.0);
                    if next.step % every == 0 || done {
                        records.push(record);
                    }
                    state = next;
                }
                Err(Error::Guard { t, reason }) => {
                    log::warn!("run stopped at t = {t}: {reason}");
                    termination = Termination::Guard { t, reason };
                    break;
                }
                Err(e) => return Err(e),
            }
        }
        if records.last().map(|r| r.step) != Some(state.step) {
            records.push(StepRecord::initial(&state));
        }
        Ok(Trajectory {
            records,
            termination,
            final_state: state,
        })
    }
}

/// Runs a fresh simulation from `f0` at `t = 0`.
pub fn simulate(stepper: &mut Stepper, f0: PeriodicProfile) -> Result<Trajectory> {
    let state = SimState::initial(f0, stepper.opts.dt)?;
    stepper.run(state)
}

pub fn simulate_from(stepper: &mut Stepper, state: SimState) -> Result<Trajectory> {
    stepper.run(state)
}

/// Amplitudes below this are treated as noise by [`dispersion_fit`].
pub const NOISE_FLOOR: f64 = 1e-13;

/// Least-squares slope of `ln |a_k(t)|` over the trajectory.
pub fn dispersion_fit(traj: &Trajectory, k: i64) -> Result<f64> {
    let t = traj.times();
    let amp = traj.mode_amplitudes(k);
    if t.len() < 3 {
        return Err(Error::Domain("need at least three records to fit a rate".into()));
    }
    if let Some(a) = amp.iter().find(|&&a| !(a > NOISE_FLOOR)) {
        return Err(Error::Domain(format!("mode {k} amplitude {a:.2e} is below the noise floor")));
    }
    let y: Vec<f64> = amp.iter().map(|a| a.ln()).collect();
    let n = t.len() as f64;
    let (tm, ym) = (t.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = t.iter().zip(&y).map(|(a, b)| (a - tm) * (b - ym)).sum();
    let sxx: f64 = t.iter().map(|a| (a - tm) * (a - tm)).sum();
    Ok(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stable_params() -> ModelParams {
        ModelParams {
            gamma: 0.1,
            rho_m: 1.2,
            ..ModelParams::unit_newtonian()
        }
    }

    fn stepper(params: ModelParams, opts: SimOptions) -> Stepper {
        Stepper::new(params, 16, 11, 11, BoundaryData::Constant { value: 0.5 }, opts).unwrap()
    }

    #[test]
    fn phi_series_matches_closed_form() {
        for z in [-3.0, -0.5, -1e-2, -1e-3, 0.0, 1e-4, 0.02, 1.5] {
            let (a, b) = phi_series(z);
            if z != 0.0 {
                assert!((a - z.exp_m1() / z).abs() < 1e-12);
                assert!((b - (z.exp_m1() - z) / (z * z)).abs() < 1e-9);
            } else {
                assert_eq!((a, b), (1.0, 0.5));
            }
        }
    }

    #[test]
    fn boundary_data_forms() {
        let c = BoundaryData::Constant { value: 2.0 };
        assert_eq!(c.at(3.0, 8).unwrap().nodal(), &[2.0; 8]);
        let s = BoundaryData::Sinusoids {
            mean: 1.0,
            terms: vec![SinusoidTerm { k: 1, a: 0.5, b: 0.0, omega: 1.0, phase: 0.0 }],
        };
        let p = s.at(std::f64::consts::PI, 8).unwrap();
        assert!((p.nodal()[0] - 0.5).abs() < 1e-14);
        let tab = BoundaryData::Table {
            times: vec![0.0, 2.0],
            values: vec![ProfileInput::Nodal(vec![0.0; 8]), ProfileInput::Nodal(vec![4.0; 8])],
        };
        assert!(tab.problems(8).is_empty());
        assert_eq!(tab.at(0.5, 8).unwrap().nodal()[3], 1.0);
        assert_eq!(tab.at(9.0, 8).unwrap().nodal()[3], 4.0);
        let bad = BoundaryData::Table {
            times: vec![1.0, 1.0],
            values: vec![ProfileInput::Nodal(vec![0.0; 6])],
        };
        assert_eq!(bad.problems(8).len(), 3);
    }

    #[test]
    fn flat_state_stays_flat() {
        let opts = SimOptions {
            t_end: 0.5,
            dt: 0.05,
            ..SimOptions::default()
        };
        let mut s = stepper(stable_params(), opts);
        let traj = simulate(&mut s, PeriodicProfile::zeros(16).unwrap()).unwrap();
        assert_eq!(traj.records.len(), 11);
        assert!(traj.records.iter().all(|r| r.sup_f == 0.0));
        assert_eq!(traj.termination, Termination::Completed);
        assert!((traj.final_state.t - 0.5).abs() < 1e-14);
    }

    #[test]
    fn schemes_agree_and_follow_linear_rate() {
        let params = stable_params();
        let lam = growth_rate(2, &params);
        let f0 = PeriodicProfile::from_fn(16, |x| 1e-4 * (2.0 * x).cos()).unwrap();
        let mut finals = Vec::new();
        for scheme in [Scheme::Etdrk2, Scheme::Rk4] {
            let opts = SimOptions {
                t_end: 0.4,
                dt: 0.05,
                scheme,
                ..SimOptions::default()
            };
            let mut s = stepper(params.clone(), opts);
            let traj = simulate(&mut s, f0.clone()).unwrap();
            let rate = dispersion_fit(&traj, 2).unwrap();
            assert!((rate - lam).abs() < 1e-3 * lam.abs(), "{scheme:?}: {rate} vs {lam}");
            assert!(traj.records.iter().all(|r| r.mean_f.abs() < 1e-15));
            finals.push(traj.final_state.f);
        }
        assert!((&finals[0] - &finals[1]).sup_norm() < 1e-9);
    }

    #[test]
    fn restart_continues_identically() {
        let f0 = PeriodicProfile::from_fn(16, |x| 1e-3 * x.cos() + 5e-4 * (3.0 * x).sin()).unwrap();
        let opts = SimOptions {
            t_end: 0.3,
            dt: 0.05,
            ..SimOptions::default()
        };
        let full = simulate(&mut stepper(stable_params(), opts.clone()), f0.clone()).unwrap();
        let half = simulate(
            &mut stepper(stable_params(), SimOptions { t_end: 0.15, ..opts.clone() }),
            f0,
        )
        .unwrap();
        let json = serde_json::to_string(&half.final_state).unwrap();
        let state: SimState = serde_json::from_str(&json).unwrap();
        let rest = simulate_from(&mut stepper(stable_params(), opts), state).unwrap();
        assert!((&rest.final_state.f - &full.final_state.f).sup_norm() < 1e-15);
        assert_eq!(rest.final_state.step, full.final_state.step);
    }

    #[test]
    fn guard_stops_unstable_growth() {
        let params = ModelParams {
            rho_m: 0.5,
            ..ModelParams::unit_newtonian()
        };
        let opts = SimOptions {
            t_end: 50.0,
            dt: 0.2,
            guard_f: 0.02,
            ..SimOptions::default()
        };
        let mut s = stepper(params, opts);
        let traj = simulate(&mut s, PeriodicProfile::from_fn(16, |x| 1e-2 * x.cos()).unwrap()).unwrap();
        assert!(matches!(traj.termination, Termination::Guard { .. }));
        assert!(traj.final_state.t < 50.0);
    }

    #[test]
    fn fit_rejects_flat_and_recovers_exponential() {
        let mut s = stepper(stable_params(), SimOptions { t_end: 0.1, dt: 0.05, ..SimOptions::default() });
        let flat = simulate(&mut s, PeriodicProfile::zeros(16).unwrap()).unwrap();
        assert!(dispersion_fit(&flat, 1).is_err());

        let mut synthetic = flat.clone();
        for r in synthetic.records.iter_mut() {
            r.f = PeriodicProfile::from_fn(16, |x| 0.01 * (-0.7 * r.t).exp() * x.cos()).unwrap();
        }
        assert!((dispersion_fit(&synthetic, 1).unwrap() + 0.7).abs() < 1e-10);
    }
}
