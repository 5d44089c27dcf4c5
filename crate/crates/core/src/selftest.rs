//! Numerical acceptance checks, shared by the `selftest` subcommand and the
//! `acceptance` test target.
//!
//! Every check compares against an independent oracle: closed-form flat-state
//! solutions, manufactured solutions, finite differences in physical
//! coordinates, or the analytic symbols.

use std::fmt;
use std::thread;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex64;
use serde::Serialize;

use crate::discretization::{Domain, Field2D, Grid};
use crate::error::Result;
use crate::evolution::{
    dispersion_fit, growth_rate, multiplier_m, simulate, BoundaryData, ModelParams, NonlocalOperator, PhiOptions,
    SimOptions, Stepper, Trajectory,
};
use crate::geometry::{inverse_height, PeriodicProfile};
use crate::mud::{apply_am, coefficients_a, MudSolver};
use crate::rheology::{
    check_conditions, check_effective_conditions, EffectiveViscosity, ViscosityModel,
};
use crate::water::{apply_aw, boundary_bw, solve_t};

/// Tolerances pinned by the acceptance criteria.
pub mod tol {
    pub const MULTIPLIER_OFF_DIAGONAL: f64 = 1e-8;
    pub const MULTIPLIER_DIAGONAL_REL: f64 = 1e-4;
    pub const DISPERSION_REL: f64 = 0.02;
    pub const MEAN_DRIFT: f64 = 1e-12;
    pub const VELOCITY_MEAN: f64 = 1e-8;
    pub const ELLIPTIC_ABS: f64 = 1e-8;
    pub const COMPOSITION_REL: f64 = 1e-5;
    pub const EQUILIBRIUM: f64 = 1e-12;
    pub const GROWTH_REL: f64 = 0.05;
    pub const NEWTONIAN_MU_M: f64 = 1e-10;
    pub const DERIVATIVE_REL: f64 = 1e-6;
    pub const UNIQUENESS: f64 = 1e-8;
    pub const MAX_PRINCIPLE: f64 = 1e-8;
}

#[derive(Debug, Clone, Serialize)]
pub struct CriterionResult {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for CriterionResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{tag} [{}] {}: {}", self.id, self.name, self.detail)
    }
}

fn finish(id: u8, name: &'static str, outcome: Result<(bool, String)>) -> CriterionResult {
    match outcome {
        Ok((passed, detail)) => CriterionResult { id, name, passed, detail },
        Err(e) => CriterionResult {
            id,
            name,
            passed: false,
            detail: format!("error: {e}"),
        },
    }
}

/// Stable configuration of the dispersion runs.
pub fn dispersion_params(ev: EffectiveViscosity) -> ModelParams {
    ModelParams {
        mu_w: 1.0,
        rho_w: 1.0,
        rho_m: 1.2,
        g: 1.0,
        gamma: 0.1,
        ev,
    }
}

/// A shear-thickening law with `μ_m(0) = 1` for the default gap constant.
pub fn thickening_model() -> ViscosityModel {
    ViscosityModel::Thickening {
        mu0: 1.0,
        mu_inf: 1.5,
        beta: 1.0,
    }
}

pub fn hectorite_model() -> ViscosityModel {
    ViscosityModel::Hectorite {
        mu_inf: 1.0,
        tau0: 1.0,
        beta: 1.0,
    }
}

const NX: usize = 16;
const NY: usize = 17;

fn run(params: ModelParams, f0: PeriodicProfile, h: f64, t_end: f64, dt: f64) -> Result<Trajectory> {
    let opts = SimOptions {
        t_end,
        dt,
        ..SimOptions::default()
    };
    let mut stepper = Stepper::new(params, NX, NY, NY, BoundaryData::Constant { value: h }, opts)?;
    simulate(&mut stepper, f0)
}

// ---------------------------------------------------------------- criterion 1

/// Finite-difference Jacobian of `𝓕` in `F` at the flat state, in the real
/// Fourier basis `cos kx, sin kx`.
pub fn criterion1() -> CriterionResult {
    finish(1, "flat-state multiplier", (|| {
        let (nx, ny, kmax) = (64, 17, 8);
        let params = ModelParams {
            gamma: 0.1,
            rho_m: 1.2,
            ..ModelParams::unit_newtonian()
        };
        let mut op = NonlocalOperator::new(params.clone(), nx, ny, ny)?;
        let h = PeriodicProfile::constant(nx, 1.0)?;
        let zero = PeriodicProfile::zeros(nx)?;
        // central differences; the step only has to beat roundoff in 𝓕
        let eps = 1e-2;
        let (mut off, mut diag_err) = (0.0f64, 0.0f64);
        for k in 1..=kmax as i64 {
            for sine in [false, true] {
                let a = if sine { Complex64::new(0.0, -0.5) } else { Complex64::new(0.5, 0.0) };
                let input = &PeriodicProfile::from_modes(nx, &[(k, a)])? * eps;
                let minus = &input * -1.0;
                let column = &(&op.evaluate(&h, &zero, &input)? - &op.evaluate(&h, &zero, &minus)?) * (0.5 / eps);
                // real coefficients: cos part 2 Re a_j, sin part -2 Im a_j
                for j in 0..=(nx / 2) as i64 {
                    let c = column.mode(j);
                    let scale = if j == 0 || j == (nx / 2) as i64 { 1.0 } else { 2.0 };
                    let (cc, sc) = (scale * c.re, -scale * c.im);
                    if j != k {
                        off = off.max(cc.abs()).max(sc.abs());
                        continue;
                    }
                    let (on, cross) = if sine { (sc, cc) } else { (cc, sc) };
                    off = off.max(cross.abs());
                    let m = multiplier_m(k, &params);
                    diag_err = diag_err.max((on - m).abs() / m);
                }
            }
        }
        let ok = off <= tol::MULTIPLIER_OFF_DIAGONAL && diag_err <= tol::MULTIPLIER_DIAGONAL_REL;
        Ok((
            ok,
            format!(
                "Nx={nx}, Ny={ny}, |k|<={kmax}: max off-diagonal {off:.2e} (<= {:.0e}), max diagonal rel err {diag_err:.2e} (<= {:.0e})",
                tol::MULTIPLIER_OFF_DIAGONAL,
                tol::MULTIPLIER_DIAGONAL_REL
            ),
        ))
    })())
}

// ------------------------------------------------------------ dynamic runs

/// The time-dependent runs shared by criteria 2, 3, 5 and 8.
pub struct DynamicRuns {
    pub newtonian: Result<Trajectory>,
    pub thickening: Result<Trajectory>,
    pub equilibrium: Result<Trajectory>,
    pub stable: Result<Trajectory>,
    pub unstable: Result<Trajectory>,
}

pub const DISPERSION_MODE: i64 = 2;

pub fn dispersion_f0() -> Result<PeriodicProfile> {
    PeriodicProfile::from_fn(NX, |x| 1e-4 * (2.0 * x).cos())
}

pub fn unstable_params() -> ModelParams {
    ModelParams {
        rho_w: 2.0,
        rho_m: 1.0,
        gamma: 0.0,
        ..ModelParams::unit_newtonian()
    }
}

impl DynamicRuns {
    pub fn compute() -> Self {
        thread::scope(|s| {
            let newtonian = s.spawn(|| {
                let p = dispersion_params(EffectiveViscosity::new(ViscosityModel::Newtonian { mu0: 1.0 }));
                run(p, dispersion_f0()?, 0.0, 2.0, 0.01)
            });
            let thickening = s.spawn(|| {
                let p = dispersion_params(EffectiveViscosity::new(thickening_model()));
                run(p, dispersion_f0()?, 0.0, 2.0, 0.01)
            });
            let equilibrium = s.spawn(|| {
                let p = dispersion_params(EffectiveViscosity::new(hectorite_model()));
                run(p, PeriodicProfile::zeros(NX)?, 1.0, 1.0, 0.01)
            });
            let stable = s.spawn(|| {
                let p = dispersion_params(EffectiveViscosity::new(hectorite_model()));
                let f0 = PeriodicProfile::from_fn(NX, |x| 1e-3 * (x.cos() + 0.5 * (2.0 * x).cos() + 0.25 * (3.0 * x).cos()))?;
                run(p, f0, 0.5, 2.0, 0.02)
            });
            let unstable = s.spawn(|| {
                let f0 = PeriodicProfile::from_fn(NX, |x| 1e-4 * (2.0 * x).cos() + 1e-5 * x.sin())?;
                run(unstable_params(), f0, 0.0, 3.0, 0.02)
            });
            let join = |h: thread::ScopedJoinHandle<'_, Result<Trajectory>>| h.join().expect("run thread panicked");
            DynamicRuns {
                newtonian: join(newtonian),
                thickening: join(thickening),
                equilibrium: join(equilibrium),
                stable: join(stable),
                unstable: join(unstable),
            }
        })
    }
}

fn traj<'a>(r: &'a Result<Trajectory>, what: &str) -> Result<&'a Trajectory> {
    r.as_ref()
        .map_err(|e| crate::error::Error::Domain(format!("{what} run failed: {e}")))
}

// ---------------------------------------------------------------- criterion 2

pub fn criterion2(runs: &DynamicRuns) -> CriterionResult {
    finish(2, "dispersion relation", (|| {
        let mut ok = true;
        let mut parts = Vec::new();
        for (label, r, model) in [
            ("newtonian", &runs.newtonian, ViscosityModel::Newtonian { mu0: 1.0 }),
            ("thickening", &runs.thickening, thickening_model()),
        ] {
            let t = traj(r, label)?;
            let params = dispersion_params(EffectiveViscosity::new(model));
            let lam = growth_rate(DISPERSION_MODE, &params);
            let fit = dispersion_fit(t, DISPERSION_MODE)?;
            let rel = (fit - lam).abs() / lam.abs();
            ok &= rel <= tol::DISPERSION_REL && t.final_state.t >= 2.0 - 1e-9;
            parts.push(format!("{label}: fitted {fit:.6} vs lambda_2 {lam:.6} (rel {rel:.1e})"));
        }
        // the thickening law must really be thickening and admissible
        let ev = EffectiveViscosity::new(thickening_model());
        let report = check_effective_conditions(&ev, 50.0, 200)?;
        let thick = (0..50).all(|i| ev.eval(i as f64).map(|(_, d)| d >= 0.0).unwrap_or(false));
        ok &= report.ok && thick && (ev.mu_m_at_zero() - 1.0).abs() < 1e-14;
        parts.push(format!("thickening mu_m' >= 0: {thick}, conditions ok: {}", report.ok));
        Ok((ok, parts.join("; ")))
    })())
}

// ---------------------------------------------------------------- criterion 3

pub fn criterion3(runs: &DynamicRuns) -> CriterionResult {
    finish(3, "volume conservation", (|| {
        let mut ok = true;
        let mut parts = Vec::new();
        for (label, r) in [("newtonian", &runs.newtonian), ("thickening", &runs.thickening)] {
            let t = traj(r, label)?;
            let m0 = t.records[0].mean_f;
            let drift = t.records.iter().map(|r| (r.mean_f - m0).abs()).fold(0.0, f64::max);
            let vmean = t.records.iter().map(|r| r.velocity_mean).fold(0.0, f64::max);
            let steps = t.final_state.step;
            ok &= steps >= 200 && drift <= tol::MEAN_DRIFT && vmean <= tol::VELOCITY_MEAN;
            parts.push(format!("{label}: {steps} steps, mean drift {drift:.1e}, max |mean F| {vmean:.1e}"));
        }
        Ok((ok, parts.join("; ")))
    })())
}

// ---------------------------------------------------------------- criterion 4

/// Fourth-order central differences of `u` at `(x, y)`: `(u_x, u_y, u_xx, u_xy, u_yy)`.
fn fd_derivatives(u: &dyn Fn(f64, f64) -> Result<f64>, x: f64, y: f64, h: f64) -> Result<[f64; 5]> {
    let w1 = [(-2.0, 1.0 / 12.0), (-1.0, -8.0 / 12.0), (1.0, 8.0 / 12.0), (2.0, -1.0 / 12.0)];
    let w2 = [(-2.0, -1.0 / 12.0), (-1.0, 16.0 / 12.0), (0.0, -30.0 / 12.0), (1.0, 16.0 / 12.0), (2.0, -1.0 / 12.0)];
    let (mut ux, mut uy, mut uxx, mut uyy, mut uxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (s, w) in w1 {
        ux += w * u(x + s * h, y)?;
        uy += w * u(x, y + s * h)?;
        for (t, v) in w1 {
            uxy += w * v * u(x + s * h, y + t * h)?;
        }
    }
    for (s, w) in w2 {
        uxx += w * u(x + s * h, y)?;
        uyy += w * u(x, y + s * h)?;
    }
    Ok([ux / h, uy / h, uxx / (h * h), uxy / (h * h), uyy / (h * h)])
}

/// Smooth test potential on the reference strips, band-limited in `x` and
/// cubic in `y` so that the collocation derivatives are exact.
fn test_potential(x: f64, y: f64) -> f64 {
    (x + 0.3).sin() * (1.0 + 0.5 * y + 0.3 * y * y - 0.2 * y * y * y) + 0.4 * (2.0 * x).cos() * y * y
}

fn random_interface(rng: &mut ChaCha8Rng, n: usize, sup: f64) -> Result<PeriodicProfile> {
    let modes: Vec<_> = (1..=3)
        .map(|k| (k, Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))))
        .collect();
    let f = PeriodicProfile::from_modes(n, &modes)?;
    Ok(&f * (sup / f.sup_norm()))
}

/// Relative sup-norm mismatch between a transformed operator and the physical
/// operator applied to `u = v ∘ φ_f⁻¹`, evaluated by finite differences.
fn composition_mismatch(
    f: &PeriodicProfile,
    grid: &std::sync::Arc<Grid>,
    transformed: &Field2D,
    physical: impl Fn([f64; 5]) -> Result<f64>,
) -> Result<f64> {
    let u = |x: f64, y: f64| -> Result<f64> { Ok(test_potential(x, inverse_height(f.eval_at(x), y)?)) };
    let (mut diff, mut scale) = (0.0f64, 0.0f64);
    for i in 0..grid.nx {
        for (j, &y) in grid.y.iter().enumerate() {
            let x = grid.x[i];
            let yp = y + (1.0 - y * y) * f.nodal()[i];
            let oracle = physical(fd_derivatives(&u, x, yp, 2e-3)?)?;
            diff = diff.max((transformed.at(i, j) - oracle).abs());
            scale = scale.max(oracle.abs());
        }
    }
    Ok(diff / scale)
}

/// Outcome of the elliptic oracles, with the max-principle data of the mud solves.
pub struct EllipticOutcome {
    pub result: CriterionResult,
    pub mud_violation: f64,
    pub mud_solves: usize,
}

pub fn criterion4() -> EllipticOutcome {
    let mut mud_violation = 0.0f64;
    let mut mud_solves = 0;
    let result = finish(4, "elliptic oracles", (|| {
        let mut parts = Vec::new();
        let mut ok = true;

        // manufactured harmonic water solution
        let wg = Grid::new(16, NY, Domain::Water)?;
        let zero = PeriodicProfile::zeros(16)?;
        let exact = Field2D::from_fn(&wg, |x, y| x.sin() * (y - 1.0).sinh());
        let flux = boundary_bw(&zero, &exact, 1.3)?;
        let s = solve_t(&wg, 1.3, &zero, &flux, &zero)?;
        let err_t = s.v.values.iter().zip(&exact.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        ok &= err_t <= tol::ELLIPTIC_ABS;
        parts.push(format!("T manufactured err {err_t:.1e}"));

        // flat Newtonian mud modes against the cosh closed form
        let mg = Grid::new(16, NY, Domain::Mud)?;
        let mut solver = MudSolver::new(mg.clone(), EffectiveViscosity::new(ViscosityModel::Newtonian { mu0: 1.0 }))?;
        let mut err_r = 0.0f64;
        for k in 1..=5 {
            let kk = k as f64;
            let p = PeriodicProfile::from_fn(16, |x| (kk * x).cos())?;
            let r = solver.solve(&zero, &p, Some(&Field2D::zeros(&mg)))?;
            mud_violation = mud_violation.max(r.max_principle.violation);
            mud_solves += 1;
            for i in 0..16 {
                for j in 0..NY {
                    let e = (kk * mg.x[i]).cos() * (kk * (mg.y[j] + 1.0)).cosh() / kk.cosh();
                    err_r = err_r.max((r.v.at(i, j) - e).abs());
                }
            }
        }
        ok &= err_r <= tol::ELLIPTIC_ABS;
        parts.push(format!("R closed-form err {err_r:.1e}"));

        // composition oracle on three random interfaces
        let mut rng = ChaCha8Rng::seed_from_u64(20);
        let ev = EffectiveViscosity::new(hectorite_model());
        let (mut worst_w, mut worst_m) = (0.0f64, 0.0f64);
        for _ in 0..3 {
            let f = random_interface(&mut rng, 32, 0.3)?;
            let wg = Grid::new(32, NY, Domain::Water)?;
            let mg = Grid::new(32, NY, Domain::Mud)?;
            let aw = apply_aw(&f, &Field2D::from_fn(&wg, test_potential))?;
            worst_w = worst_w.max(composition_mismatch(&f, &wg, &aw, |d| Ok(d[2] + d[4]))?);
            let am = apply_am(&f, &Field2D::from_fn(&mg, test_potential), &ev)?;
            worst_m = worst_m.max(composition_mismatch(&f, &mg, &am, |d| {
                let a = coefficients_a(&ev, [d[0], d[1]])?;
                Ok(a.a11 * d[2] + 2.0 * a.a12 * d[3] + a.a22 * d[4])
            })?);
        }
        ok &= worst_w <= tol::COMPOSITION_REL && worst_m <= tol::COMPOSITION_REL;
        parts.push(format!("A_w composition rel {worst_w:.1e}, A_m composition rel {worst_m:.1e}"));
        Ok((ok, parts.join("; ")))
    })());
    EllipticOutcome {
        result,
        mud_violation,
        mud_solves,
    }
}

// ---------------------------------------------------------------- criterion 5

pub fn criterion5(runs: &DynamicRuns) -> CriterionResult {
    finish(5, "equilibrium and stability", (|| {
        let mut ok = true;
        let mut parts = Vec::new();

        let eq = traj(&runs.equilibrium, "equilibrium")?;
        let drift = eq.records.iter().map(|r| r.sup_f).fold(0.0, f64::max);
        ok &= eq.final_state.step >= 100 && drift <= tol::EQUILIBRIUM;
        parts.push(format!("flat: {} steps, max |f| {drift:.1e}", eq.final_state.step));

        let st = traj(&runs.stable, "stable")?;
        let sups: Vec<f64> = st.records.iter().map(|r| r.sup_f).collect();
        let monotone = sups.windows(2).all(|w| w[1] <= w[0]);
        let ratio = sups.last().copied().unwrap_or(f64::NAN) / sups[0];
        ok &= monotone && ratio < 1.0;
        parts.push(format!("stable: sup|f| monotone {monotone}, final/initial {ratio:.3}"));

        let un = traj(&runs.unstable, "unstable")?;
        let p = unstable_params();
        let last = &un.records.last().expect("nonempty").f;
        let dominant = (1..(NX / 2) as i64)
            .max_by(|a, b| last.mode(*a).norm().total_cmp(&last.mode(*b).norm()))
            .expect("modes");
        let lam = growth_rate(dominant, &p);
        let fit = dispersion_fit(un, dominant)?;
        let rel = (fit - lam).abs() / lam;
        ok &= !p.stability_ok() && lam > 0.0 && rel <= tol::GROWTH_REL;
        parts.push(format!("unstable: dominant k={dominant}, fitted {fit:.5} vs lambda {lam:.5} (rel {rel:.1e})"));
        Ok((ok, parts.join("; ")))
    })())
}

// ---------------------------------------------------------------- criterion 6

pub fn criterion6() -> CriterionResult {
    finish(6, "rheology", (|| {
        let mut ok = true;
        let mut parts = Vec::new();

        // Newtonian through the generic quadrature path
        let mut err_n = 0.0f64;
        for (mu0, c) in [(1.0, 2.0 / 3.0), (2.5, 0.4), (0.3, 1.0)] {
            let ev = EffectiveViscosity::with_options(ViscosityModel::Newtonian { mu0 }, c, 64, 1e-12);
            for r in [0.0, 0.5, 3.0, 40.0] {
                let (m, d) = ev.quadrature(r)?;
                err_n = err_n.max((m - 1.5 * c * mu0).abs()).max(d.abs());
            }
        }
        ok &= err_n <= tol::NEWTONIAN_MU_M;
        parts.push(format!("Newtonian mu_m err {err_n:.1e}"));

        // admissibility decided by beta tau0 against 4 mu_inf
        let mut exact = true;
        for mu_inf in [0.5, 1.0, 3.0] {
            for ratio in [0.5, 0.999, 1.0, 1.001, 1.5, 1.99, 2.5] {
                let (beta, tau0) = (1.3, ratio * 4.0 * mu_inf / 1.3);
                let m = ViscosityModel::Hectorite { mu_inf, tau0, beta };
                let rep = check_conditions(&m, 100.0, 400)?;
                exact &= rep.ok == (beta * tau0 < 4.0 * mu_inf);
            }
        }
        ok &= exact;
        parts.push(format!("Hectorite admissibility exact: {exact}"));

        // analytic derivative against central differences
        let mut err_d = 0.0f64;
        for model in [hectorite_model(), thickening_model()] {
            let ev = EffectiveViscosity::new(model);
            for i in 0..20 {
                let r = 0.05 + i as f64 * 0.75;
                let (_, d) = ev.eval(r)?;
                let h = 1e-4 * (1.0 + r);
                let fd = (ev.eval(r + h)?.0 - ev.eval(r - h)?.0) / (2.0 * h);
                err_d = err_d.max((d - fd).abs() / d.abs());
            }
        }
        ok &= err_d <= tol::DERIVATIVE_REL;
        parts.push(format!("mu_m' vs FD rel {err_d:.1e}"));

        // effective conditions on admissible models
        let mut lows = Vec::new();
        for model in [ViscosityModel::Newtonian { mu0: 2.0 }, hectorite_model(), thickening_model()] {
            let rep = check_effective_conditions(&EffectiveViscosity::new(model), 50.0, 200)?;
            ok &= rep.ok && rep.m_hat > 0.0;
            lows.push(format!("{:.3}", rep.m_hat));
        }
        parts.push(format!("effective lower bounds [{}]", lows.join(", ")));
        Ok((ok, parts.join("; ")))
    })())
}

// ---------------------------------------------------------------- criterion 7

pub fn criterion7() -> CriterionResult {
    finish(7, "velocity uniqueness", (|| {
        let params = dispersion_params(EffectiveViscosity::new(thickening_model()));
        let mut op = NonlocalOperator::new(params, NX, 13, 13)?;
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let h = PeriodicProfile::zeros(NX)?;
        let opts = PhiOptions::default();
        let bump = PeriodicProfile::from_fn(NX, |x| 0.1 * x.cos())?;
        let mut worst = 0.0f64;
        for _ in 0..10 {
            let amp = rng.gen_range(0.01..0.08);
            let f = random_interface(&mut rng, NX, amp)?;
            let guess = PeriodicProfile::from_fn(NX, |x| 0.02 * (2.0 * x).sin())?;
            let a = op.solve_phi(&h, &f, &guess, &opts)?;
            let b = op.solve_phi(&h, &f, &(&guess + &bump), &opts)?;
            worst = worst.max((&a.velocity - &b.velocity).sup_norm());
        }
        Ok((
            worst <= tol::UNIQUENESS,
            format!("10 random interfaces, guesses 0.1 apart: max root distance {worst:.1e}"),
        ))
    })())
}

// ---------------------------------------------------------------- criterion 8

pub fn criterion8(runs: &DynamicRuns, elliptic: &EllipticOutcome) -> CriterionResult {
    finish(8, "maximum principle", (|| {
        let mut worst = elliptic.mud_violation;
        let mut solves = elliptic.mud_solves;
        let mut min_ell = f64::INFINITY;
        for (label, r) in [
            ("newtonian", &runs.newtonian),
            ("thickening", &runs.thickening),
            ("equilibrium", &runs.equilibrium),
            ("stable", &runs.stable),
            ("unstable", &runs.unstable),
        ] {
            let t = traj(r, label)?;
            for rec in &t.records {
                worst = worst.max(rec.max_principle_violation);
                solves += rec.evaluations;
                min_ell = min_ell.min(rec.min_ellipticity);
            }
        }
        Ok((
            worst <= tol::MAX_PRINCIPLE && min_ell > 0.0,
            format!("{solves} mud solves, worst violation {worst:.1e}, min eigenvalue of a_ij {min_ell:.3}"),
        ))
    })())
}

/// Runs every criterion, independent parts in parallel.
pub fn run_all() -> Vec<CriterionResult> {
    thread::scope(|s| {
        let c1 = s.spawn(criterion1);
        let c4 = s.spawn(criterion4);
        let c6 = s.spawn(criterion6);
        let c7 = s.spawn(criterion7);
        let runs = DynamicRuns::compute();
        let c4 = c4.join().expect("criterion 4 panicked");
        vec![
            c1.join().expect("criterion 1 panicked"),
            criterion2(&runs),
            criterion3(&runs),
            c4.result.clone(),
            criterion5(&runs),
            c6.join().expect("criterion 6 panicked"),
            c7.join().expect("criterion 7 panicked"),
            criterion8(&runs, &c4),
        ]
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finite_differences_are_fourth_order() {
        let u = |x: f64, y: f64| -> Result<f64> { Ok((x + 2.0 * y).sin() * y.exp()) };
        let d = fd_derivatives(&u, 0.4, 0.2, 2e-3).unwrap();
        let (x, y) = (0.4f64, 0.2f64);
        let (s, c, e) = ((x + 2.0 * y).sin(), (x + 2.0 * y).cos(), y.exp());
        let exact = [c * e, (2.0 * c + s) * e, -s * e, (-2.0 * s + c) * e, (-4.0 * s + 4.0 * c + s) * e];
        for (a, b) in d.iter().zip(exact) {
            assert!((a - b).abs() < 1e-8, "{a} vs {b}");
        }
    }

    #[test]
    fn display_format() {
        let r = CriterionResult {
            id: 3,
            name: "x",
            passed: false,
            detail: "y".into(),
        };
        assert_eq!(r.to_string(), "FAIL [3] x: y");
    }
}
