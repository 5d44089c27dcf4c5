//! Shear-dependent viscosity laws and the width-averaged effective viscosity.
//!
//! A viscosity law is a function `μ(r)` of the squared shear rate `r >= 0`.
//! Gap averaging across the canal width replaces it by
//!
//! ```text
//! μ_m(r) = ( ∫_{-1}^{1} s² / μ̃(r s²) ds )^{-1},   μ̃ = c · μ ∘ [r ↦ r μ²(r)]^{-1}
//! ```
//!
//! which is the viscosity entering the nonlinear Darcy law of the mud.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A viscosity law with an analytic derivative.
///
/// Implementors return `(μ(r), μ'(r))`; no automatic differentiation is done
/// anywhere in the crate.
pub trait ShearViscosity {
    fn eval(&self, r: f64) -> (f64, f64);
}

/// Built-in viscosity laws. All parameters are strictly positive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case", deny_unknown_fields)]
pub enum ViscosityModel {
    /// Constant viscosity `μ0`.
    Newtonian { mu0: f64 },
    /// Bingham-type hectorite law `μ(r) = μ∞ + τ0 β / (1 + β r)` (shear thinning).
    Hectorite { mu_inf: f64, tau0: f64, beta: f64 },
    /// Saturating shear-thickening law `μ(r) = μ∞ - (μ∞ - μ0) / (1 + β r)`,
    /// rising from `μ0` at rest to `μ∞` at high shear. Requires `μ0 <= μ∞`.
    Thickening { mu0: f64, mu_inf: f64, beta: f64 },
}

impl ShearViscosity for ViscosityModel {
    fn eval(&self, r: f64) -> (f64, f64) {
        match *self {
            ViscosityModel::Newtonian { mu0 } => (mu0, 0.0),
            ViscosityModel::Hectorite { mu_inf, tau0, beta } => {
                let q = 1.0 + beta * r;
                (mu_inf + tau0 * beta / q, -tau0 * beta * beta / (q * q))
            }
            ViscosityModel::Thickening { mu0, mu_inf, beta } => {
                let q = 1.0 + beta * r;
                let jump = mu_inf - mu0;
                (mu_inf - jump / q, jump * beta / (q * q))
            }
        }
    }
}

impl ViscosityModel {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::Domain(format!("viscosity model {self:?}: {what}")));
        let positive = |v: f64| v.is_finite() && v > 0.0;
        match *self {
            ViscosityModel::Newtonian { mu0 } if !positive(mu0) => bad("mu0 must be positive"),
            ViscosityModel::Hectorite { mu_inf, tau0, beta }
                if !(positive(mu_inf) && positive(tau0) && positive(beta)) =>
            {
                bad("mu_inf, tau0 and beta must be positive")
            }
            ViscosityModel::Thickening { mu0, mu_inf, beta }
                if !(positive(mu0) && positive(mu_inf) && positive(beta)) =>
            {
                bad("mu0, mu_inf and beta must be positive")
            }
            ViscosityModel::Thickening { mu0, mu_inf, .. } if mu0 > mu_inf => {
                bad("thickening law needs mu0 <= mu_inf")
            }
            _ => Ok(()),
        }
    }

    pub fn is_newtonian(&self) -> bool {
        matches!(self, ViscosityModel::Newtonian { .. })
    }

    /// Closed-form admissibility rule where one is known: for the hectorite
    /// law the strict inequality `β τ0 < 4 μ∞`.
    pub fn closed_form_admissible(&self) -> Option<bool> {
        match *self {
            ViscosityModel::Hectorite { mu_inf, tau0, beta } => Some(beta * tau0 < 4.0 * mu_inf),
            _ => None,
        }
    }
}

/// Evaluates `(μ(r), μ'(r))`, rejecting negative or non-finite `r`.
pub fn eval_mu(model: &impl ShearViscosity, r: f64) -> Result<(f64, f64)> {
    if !(r >= 0.0) || !r.is_finite() {
        return Err(Error::Domain(format!("shear rate squared must be >= 0, got {r}")));
    }
    Ok(model.eval(r))
}

/// Sampled bounds of a structural viscosity condition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConditionReport {
    /// Smallest sampled value of the bounded quantities.
    pub m_hat: f64,
    /// Largest sampled value.
    pub big_m_hat: f64,
    pub ok: bool,
    /// Sample point of the tightest lower margin.
    pub worst_r: f64,
    /// Outcome of a closed-form rule when the model has one. `ok` requires it.
    pub closed_form: Option<bool>,
}

fn sample_points(r_max: f64, n: usize) -> Result<Vec<f64>> {
    if !(r_max > 0.0) || !r_max.is_finite() {
        return Err(Error::Domain(format!("sample range must be positive, got r_max = {r_max}")));
    }
    if n < 2 {
        return Err(Error::Domain(format!("need at least two samples, got {n}")));
    }
    Ok((0..n).map(|i| r_max * i as f64 / (n - 1) as f64).collect())
}

fn report_from_samples(
    samples: impl Iterator<Item = (f64, f64, f64)>,
    closed_form: Option<bool>,
) -> ConditionReport {
    let mut m_hat = f64::INFINITY;
    let mut big_m_hat = f64::NEG_INFINITY;
    let mut worst_r = 0.0;
    for (r, a, b) in samples {
        let lo = a.min(b);
        if lo < m_hat || lo.is_nan() {
            m_hat = lo;
            worst_r = r;
        }
        big_m_hat = big_m_hat.max(a.max(b));
    }
    let sampled_ok = m_hat > 0.0 && big_m_hat.is_finite();
    ConditionReport {
        m_hat,
        big_m_hat,
        ok: sampled_ok && closed_form.unwrap_or(true),
        worst_r,
        closed_form,
    }
}

/// Samples `m <= μ <= M` and `m <= μ + 2 r μ' <= M` on `[0, r_max]`.
pub fn check_conditions(model: &ViscosityModel, r_max: f64, n: usize) -> Result<ConditionReport> {
    model.validate()?;
    let rs = sample_points(r_max, n)?;
    let samples = rs.into_iter().map(|r| {
        let (mu, dmu) = model.eval(r);
        (r, mu, mu + 2.0 * r * dmu)
    });
    Ok(report_from_samples(samples, model.closed_form_admissible()))
}

/// Solves `r μ²(r) = s` for `r`.
///
/// The map is strictly increasing whenever `μ + 2 r μ' > 0`, so a bracket is
/// grown from `[0, s / μ(0)²]` and refined with Newton steps, falling back to
/// bisection whenever a step leaves the bracket.
pub fn invert_shear(model: &impl ShearViscosity, s: f64, tol: f64) -> Result<f64> {
    if !(s >= 0.0) || !s.is_finite() {
        return Err(Error::Domain(format!("invert_shear needs s >= 0, got {s}")));
    }
    if s == 0.0 {
        return Ok(0.0);
    }
    let map = |r: f64| {
        let (mu, dmu) = model.eval(r);
        (r * mu * mu - s, mu * (mu + 2.0 * r * dmu))
    };

    let mu0 = model.eval(0.0).0;
    let mut lo = 0.0;
    let mut hi = 2.0 * s / (mu0 * mu0);
    let mut grow = 0;
    while map(hi).0 < 0.0 {
        lo = hi;
        hi *= 2.0;
        grow += 1;
        if grow > 200 || !hi.is_finite() {
            return Err(Error::NonConvergence {
                what: "shear inversion bracket",
                iterations: grow,
                residual: map(hi).0,
                history: Vec::new(),
            });
        }
    }

    let mut r = s / (mu0 * mu0);
    if !(r > lo && r < hi) {
        r = 0.5 * (lo + hi);
    }
    let mut history = Vec::new();
    for _ in 0..200 {
        let (res, slope) = map(r);
        history.push(res);
        if res.abs() <= tol * s || (hi - lo) <= 4.0 * f64::EPSILON * hi {
            return Ok(r);
        }
        if res < 0.0 {
            lo = r;
        } else {
            hi = r;
        }
        let newton = r - res / slope;
        r = if slope > 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
    }
    let residual = map(r).0;
    if residual.abs() <= tol * (1.0 + s) {
        return Ok(r);
    }
    Err(Error::NonConvergence {
        what: "shear inversion",
        iterations: history.len(),
        residual,
        history,
    })
}

/// Gauss–Legendre nodes and weights on `[0, 1]`.
fn gauss_legendre_unit(order: usize) -> (Vec<f64>, Vec<f64>) {
    let n = order;
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for i in 1..=n {
        let mut x = (std::f64::consts::PI * (i as f64 - 0.25) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            // three-term recurrence for P_n and P_{n-1}
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes.push(0.5 * (x + 1.0));
        weights.push(0.5 * w);
    }
    (nodes, weights)
}

/// Width-averaged viscosity `μ_m` built on a base viscosity law.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveViscosity {
    pub base: ViscosityModel,
    /// Gap-width constant. With `c = 2/3` a Newtonian fluid keeps its viscosity.
    pub c: f64,
    /// Relative tolerance of the shear inversion.
    pub inversion_tol: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

pub const DEFAULT_GAP_CONSTANT: f64 = 2.0 / 3.0;
pub const DEFAULT_QUADRATURE_ORDER: usize = 64;

impl EffectiveViscosity {
    pub fn new(base: ViscosityModel) -> Self {
        Self::with_options(base, DEFAULT_GAP_CONSTANT, DEFAULT_QUADRATURE_ORDER, 1e-12)
    }

    pub fn with_options(base: ViscosityModel, c: f64, order: usize, inversion_tol: f64) -> Self {
        let (nodes, weights) = gauss_legendre_unit(order.max(1));
        Self {
            base,
            c,
            inversion_tol,
            nodes,
            weights,
        }
    }

    pub fn quadrature_order(&self) -> usize {
        self.nodes.len()
    }

    /// `(μ̃(q), μ̃'(q))` with the derivative taken through the inverse map.
    pub fn mu_tilde(&self, q: f64) -> Result<(f64, f64)> {
        let r = invert_shear(&self.base, q, self.inversion_tol)?;
        let (mu, dmu) = self.base.eval(r);
        let slope = mu * (mu + 2.0 * r * dmu);
        Ok((self.c * mu, self.c * dmu / slope))
    }

    /// `(μ_m(r), μ_m'(r))`, the derivative obtained by differentiating under
    /// the integral: `μ_m' = μ_m² ∫ s⁴ μ̃'(r s²) / μ̃²(r s²) ds`.
    pub fn eval(&self, r: f64) -> Result<(f64, f64)> {
        if !(r >= 0.0) || !r.is_finite() {
            return Err(Error::Domain(format!("effective viscosity needs r >= 0, got {r}")));
        }
        if let ViscosityModel::Newtonian { mu0 } = self.base {
            return Ok((1.5 * self.c * mu0, 0.0));
        }
        self.quadrature(r)
    }

    /// [`Self::eval`] without the closed-form Newtonian shortcut.
    pub fn quadrature(&self, r: f64) -> Result<(f64, f64)> {
        if !(r >= 0.0) || !r.is_finite() {
            return Err(Error::Domain(format!("effective viscosity needs r >= 0, got {r}")));
        }
        let mut inv = 0.0;
        let mut deriv = 0.0;
        for (&s, &w) in self.nodes.iter().zip(&self.weights) {
            let s2 = s * s;
            let (mt, dmt) = self.mu_tilde(r * s2)?;
            inv += w * s2 / mt;
            deriv += w * s2 * s2 * dmt / (mt * mt);
        }
        // even integrand: double the half-interval sums
        inv *= 2.0;
        deriv *= 2.0;
        if !(inv > 0.0) || !inv.is_finite() {
            return Err(Error::NonConvergence {
                what: "effective viscosity quadrature",
                iterations: self.nodes.len(),
                residual: inv,
                history: Vec::new(),
            });
        }
        let mu_m = 1.0 / inv;
        Ok((mu_m, mu_m * mu_m * deriv))
    }

    pub fn mu_m_at_zero(&self) -> f64 {
        1.5 * self.c * self.base.eval(0.0).0
    }
}

/// Samples `m <= μ_m <= M` and `m <= μ_m - 2 r μ_m' <= M` on `[0, r_max]`.
pub fn check_effective_conditions(
    ev: &EffectiveViscosity,
    r_max: f64,
    n: usize,
) -> Result<ConditionReport> {
    ev.base.validate()?;
    let rs = sample_points(r_max, n)?;
    let mut samples = Vec::with_capacity(rs.len());
    for r in rs {
        let (mu, dmu) = ev.eval(r)?;
        samples.push((r, mu, mu - 2.0 * r * dmu));
    }
    Ok(report_from_samples(samples.into_iter(), None))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const HECTORITE: ViscosityModel = ViscosityModel::Hectorite {
        mu_inf: 1.0,
        tau0: 1.0,
        beta: 1.0,
    };

    #[test]
    fn newtonian_is_constant() {
        let m = ViscosityModel::Newtonian { mu0: 1.0 };
        assert_eq!(eval_mu(&m, 7.0).unwrap(), (1.0, 0.0));
    }

    #[test]
    fn hectorite_at_rest_and_infinity() {
        assert_eq!(eval_mu(&HECTORITE, 0.0).unwrap(), (2.0, -1.0));
        let (mu, _) = eval_mu(&HECTORITE, 1e12).unwrap();
        assert_relative_eq!(mu, 1.0, epsilon = 1e-11);
    }

    #[test]
    fn negative_shear_is_rejected() {
        assert!(matches!(eval_mu(&HECTORITE, -1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn hectorite_rule_is_strict() {
        let edge = ViscosityModel::Hectorite {
            mu_inf: 1.0,
            tau0: 4.0,
            beta: 1.0,
        };
        let rep = check_conditions(&edge, 50.0, 501).unwrap();
        assert_eq!(rep.closed_form, Some(false));
        assert!(!rep.ok);
        // the sampled bound alone would still be positive here
        assert!(rep.m_hat > 0.0);

        let rep = check_conditions(&HECTORITE, 50.0, 501).unwrap();
        assert!(rep.ok);
        assert!(rep.m_hat > 0.0);
    }

    #[test]
    fn newtonian_condition_bounds() {
        let rep = check_conditions(&ViscosityModel::Newtonian { mu0: 2.0 }, 10.0, 11).unwrap();
        assert!(rep.ok);
        assert_eq!((rep.m_hat, rep.big_m_hat), (2.0, 2.0));
    }

    #[test]
    fn inversion_cases() {
        let m = ViscosityModel::Newtonian { mu0: 3.0 };
        assert_relative_eq!(invert_shear(&m, 18.0, 1e-12).unwrap(), 2.0, epsilon = 1e-14);
        assert_eq!(invert_shear(&HECTORITE, 0.0, 1e-12).unwrap(), 0.0);
        // forward value at r = 1 is 1 * 1.5^2
        assert_relative_eq!(invert_shear(&HECTORITE, 2.25, 1e-12).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn quadrature_integrates_polynomials() {
        let (x, w) = gauss_legendre_unit(8);
        let sum: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(15)).sum();
        assert_relative_eq!(sum, 1.0 / 16.0, epsilon = 1e-15);
        let total: f64 = w.iter().sum();
        assert_relative_eq!(total, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn newtonian_effective_viscosity() {
        let ev = EffectiveViscosity::with_options(ViscosityModel::Newtonian { mu0: 2.0 }, 0.5, 64, 1e-12);
        let (mu, dmu) = ev.eval(3.0).unwrap();
        assert_relative_eq!(mu, 1.5, epsilon = 1e-14);
        assert_eq!(dmu, 0.0);
        let ev = EffectiveViscosity::new(ViscosityModel::Newtonian { mu0: 2.0 });
        assert_relative_eq!(ev.eval(1.0).unwrap().0, 2.0, epsilon = 1e-14);
    }

    #[test]
    fn hectorite_effective_viscosity_at_rest() {
        let ev = EffectiveViscosity::new(HECTORITE);
        let (mu, _) = ev.eval(0.0).unwrap();
        assert_relative_eq!(mu, 1.5 * ev.c * 2.0, epsilon = 1e-13);
        assert_relative_eq!(mu, ev.mu_m_at_zero(), epsilon = 1e-13);
    }

    #[test]
    fn effective_conditions() {
        let ev = EffectiveViscosity::new(HECTORITE);
        assert!(check_effective_conditions(&ev, 20.0, 41).unwrap().ok);
        assert!(check_effective_conditions(&ev, 0.0, 41).is_err());
        let newt = EffectiveViscosity::new(ViscosityModel::Newtonian { mu0: 1.0 });
        let rep = check_effective_conditions(&newt, 5.0, 6).unwrap();
        assert!(rep.ok);
        assert_relative_eq!(rep.m_hat, rep.big_m_hat);
    }

    #[test]
    fn thickening_has_nonnegative_derivative() {
        let ev = EffectiveViscosity::new(ViscosityModel::Thickening {
            mu0: 1.0,
            mu_inf: 1.5,
            beta: 1.0,
        });
        for i in 0..20 {
            let (_, dmu) = ev.eval(0.25 * i as f64).unwrap();
            assert!(dmu >= 0.0);
        }
        assert!(check_effective_conditions(&ev, 20.0, 41).unwrap().ok);
    }

    #[test]
    fn invalid_parameters() {
        assert!(ViscosityModel::Newtonian { mu0: 0.0 }.validate().is_err());
        assert!(ViscosityModel::Thickening { mu0: 2.0, mu_inf: 1.0, beta: 1.0 }
            .validate()
            .is_err());
    }
}
