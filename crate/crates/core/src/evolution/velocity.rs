//! The implicit velocity `F = Φ(h, f)`: Newton–Krylov on `𝓕(h, f, ·) = 0`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::PeriodicProfile;

use super::operator::NonlocalOperator;
use super::multiplier_m;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhiOptions {
    /// Target for `sup |𝓕(h, f, F)|`.
    pub tol: f64,
    pub max_newton: usize,
    /// Relative residual target of each inner GMRES solve.
    pub gmres_rtol: f64,
    pub gmres_max: usize,
    /// Relative step of the finite-difference Jacobian products.
    pub fd_eps: f64,
}

impl Default for PhiOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_newton: 30,
            gmres_rtol: 1e-6,
            gmres_max: 60,
            fd_eps: 1e-7,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UniquenessProbe {
    pub solves: usize,
    /// Largest sup-norm distance between the roots found.
    pub max_distance: f64,
    pub unique: bool,
}

/// Distance below which probed roots count as the same.
pub const UNIQUENESS_TOL: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct PhiSolve {
    /// Mean-zero velocity.
    pub velocity: PeriodicProfile,
    /// Mean of the root before projection; the solve itself never projects.
    pub raw_mean: f64,
    pub residual_inf: f64,
    pub newton_iterations: usize,
    pub gmres_iterations: usize,
    pub history: Vec<f64>,
    pub probe: Option<UniquenessProbe>,
}

#[derive(Debug, Clone)]
pub struct GmresOutcome {
    pub x: Vec<f64>,
    pub iterations: usize,
    /// Final residual relative to `|b|`.
    pub relative_residual: f64,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, a| m.max(a.abs()))
}

/// Unrestarted GMRES from a zero initial guess.
pub fn gmres(
    mut matvec: impl FnMut(&[f64]) -> Result<Vec<f64>>,
    b: &[f64],
    rtol: f64,
    max_iter: usize,
) -> Result<GmresOutcome> {
    let n = b.len();
    let beta = norm(b);
    if beta == 0.0 {
        return Ok(GmresOutcome {
            x: vec![0.0; n],
            iterations: 0,
            relative_residual: 0.0,
        });
    }
    let m = max_iter.min(n).max(1);
    let mut basis: Vec<Vec<f64>> = vec![b.iter().map(|v| v / beta).collect()];
    let mut hess: Vec<Vec<f64>> = Vec::new(); // column j holds h_{0..=j+1, j}
    let (mut cs, mut sn): (Vec<f64>, Vec<f64>) = (Vec::new(), Vec::new());
    let mut g = vec![beta];
    let mut rel = 1.0;
    let mut k = 0;
    while k < m {
        let mut w = matvec(&basis[k])?;
        let mut col = vec![0.0; k + 2];
        // modified Gram-Schmidt, applied twice for safety at small sizes
        for _ in 0..2 {
            for (i, q) in basis.iter().enumerate() {
                let d: f64 = w.iter().zip(q).map(|(a, b)| a * b).sum();
                col[i] += d;
                w.iter_mut().zip(q).for_each(|(a, b)| *a -= d * b);
            }
        }
        let wn = norm(&w);
        col[k + 1] = wn;
        for i in 0..k {
            let t = cs[i] * col[i] + sn[i] * col[i + 1];
            col[i + 1] = -sn[i] * col[i] + cs[i] * col[i + 1];
            col[i] = t;
        }
        let r = col[k].hypot(col[k + 1]);
        let (c, s) = if r == 0.0 { (1.0, 0.0) } else { (col[k] / r, col[k + 1] / r) };
        cs.push(c);
        sn.push(s);
        col[k] = r;
        col[k + 1] = 0.0;
        g.push(-s * g[k]);
        g[k] *= c;
        hess.push(col);
        k += 1;
        rel = g[k].abs() / beta;
        if rel <= rtol || wn <= 1e-14 * beta {
            break;
        }
        basis.push(w.iter().map(|v| v / wn).collect());
    }
    // back substitution on the triangular k x k system
    let mut y = vec![0.0; k];
    for i in (0..k).rev() {
        let mut s = g[i];
        for (j, yj) in y.iter().enumerate().skip(i + 1) {
            s -= hess[j][i] * yj;
        }
        y[i] = s / hess[i][i];
    }
    let mut x = vec![0.0; n];
    for (q, yi) in basis.iter().zip(&y) {
        x.iter_mut().zip(q).for_each(|(a, b)| *a += yi * b);
    }
    Ok(GmresOutcome {
        x,
        iterations: k,
        relative_residual: rel,
    })
}

impl NonlocalOperator {
    /// Inverse of the flat-state multiplier `m(k)`.
    fn precondition(&self, v: &[f64]) -> Vec<f64> {
        let p = PeriodicProfile::from_nodal(v.to_vec()).expect("grid-sized");
        let params = &self.params;
        p.apply_multiplier(|k| 1.0 / multiplier_m(k, params)).into_nodal()
    }

    /// Solves `𝓕(h, f, F) = 0` for `F` starting from `guess`.
    pub fn solve_phi(
        &mut self,
        h: &PeriodicProfile,
        f: &PeriodicProfile,
        guess: &PeriodicProfile,
        opts: &PhiOptions,
    ) -> Result<PhiSolve> {
        let mut vel = guess.nodal().to_vec();
        let mut res = self.evaluate(h, f, guess)?.into_nodal();
        let mut rn = sup(&res);
        let mut history = vec![rn];
        let (mut newton, mut inner) = (0, 0);
        while rn > opts.tol {
            if newton == opts.max_newton || !rn.is_finite() {
                return Err(Error::NonConvergence {
                    what: "velocity solve",
                    iterations: newton,
                    residual: rn,
                    history,
                });
            }
            newton += 1;
            let base = vel.clone();
            let base_res = res.clone();
            let scale = 1.0 + norm(&base);
            let rhs: Vec<f64> = base_res.iter().map(|r| -r).collect();
            let out = gmres(
                |w| {
                    let pw = self.precondition(w);
                    let wn = norm(&pw);
                    if wn == 0.0 {
                        return Ok(vec![0.0; w.len()]);
                    }
                    let eps = opts.fd_eps * scale / wn;
                    let shifted: Vec<f64> = base.iter().zip(&pw).map(|(a, b)| a + eps * b).collect();
                    let r = self.evaluate(h, f, &PeriodicProfile::from_nodal(shifted)?)?;
                    Ok(r.nodal().iter().zip(&base_res).map(|(a, b)| (a - b) / eps).collect())
                },
                &rhs,
                opts.gmres_rtol,
                opts.gmres_max,
            )?;
            inner += out.iterations;
            let step = self.precondition(&out.x);
            let mut lambda = 1.0;
            loop {
                let trial: Vec<f64> = base.iter().zip(&step).map(|(a, d)| a + lambda * d).collect();
                let r = self.evaluate(h, f, &PeriodicProfile::from_nodal(trial.clone())?)?.into_nodal();
                let n = sup(&r);
                if n < rn || lambda < 1.0 / 16.0 {
                    vel = trial;
                    res = r;
                    rn = n;
                    break;
                }
                lambda *= 0.5;
            }
            history.push(rn);
            log::trace!("velocity Newton {newton}: residual {rn:.3e}, {} GMRES steps", out.iterations);
        }
        let raw = PeriodicProfile::from_nodal(vel)?;
        let raw_mean = raw.mean();
        Ok(PhiSolve {
            velocity: raw.project_mean_zero(),
            raw_mean,
            residual_inf: rn,
            newton_iterations: newton,
            gmres_iterations: inner,
            history,
            probe: None,
        })
    }

    /// [`Self::solve_phi`] followed by `extra` re-solves from the guess plus
    /// random mean-zero perturbations of sup-norm `radius`.
    pub fn solve_phi_probed(
        &mut self,
        h: &PeriodicProfile,
        f: &PeriodicProfile,
        guess: &PeriodicProfile,
        opts: &PhiOptions,
        extra: usize,
        radius: f64,
        seed: u64,
    ) -> Result<PhiSolve> {
        let mut main = self.solve_phi(h, f, guess, opts)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = f.n();
        let mut roots = vec![main.velocity.clone()];
        for _ in 0..extra {
            let modes: Vec<_> = (1..=4.min(n as i64 / 2 - 1))
                .map(|k| {
                    (k, rustfft::num_complex::Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                })
                .collect();
            let pert = PeriodicProfile::from_modes(n, &modes)?;
            let pert = &pert * (radius / pert.sup_norm().max(f64::MIN_POSITIVE));
            let s = self.solve_phi(h, f, &(guess + &pert), opts)?;
            roots.push(s.velocity);
        }
        let mut max_distance: f64 = 0.0;
        for (i, a) in roots.iter().enumerate() {
            for b in &roots[i + 1..] {
                max_distance = max_distance.max((a - b).sup_norm());
            }
        }
        main.probe = Some(UniquenessProbe {
            solves: roots.len(),
            max_distance,
            unique: max_distance <= UNIQUENESS_TOL,
        });
        Ok(main)
    }
}
