//! The transformed quasilinear mud problem.
//!
//! In the physical strip the mud potential solves `Q u = div(∇u / μ_m(|∇u|²)) = 0`,
//! i.e. `a_ij(∇u) u_ij = 0` with
//!
//! ```text
//! a_ij(z) = δ_ij / μ_m(|z|²) - 2 z_i z_j μ_m'(|z|²) / μ_m²(|z|²).
//! ```
//!
//! Pulled back through `φ_f` this becomes `A_m(f, v) = b_ij v_ij + b v_y`, with
//! coefficients depending on `y`, `f` and the transformed gradient `∇_f v`.
//! [`MudSolver`] solves `A_m(f, v) = 0`, `v = p` on `y = 0`, `v_y = 0` on `y = -1`.

use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::discretization::{analyze, wavenumber, Domain, Edge, Field2D, Grid};
use crate::error::{Error, Result};
use crate::geometry::{MapMetrics, PeriodicProfile};
use crate::linalg::DenseLu;
use crate::rheology::EffectiveViscosity;
use crate::water::{check_inputs, combine, operator_row};

/// The matrix `a_ij(z)` and its eigenvalues.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ACoeffs {
    pub a11: f64,
    pub a12: f64,
    pub a22: f64,
    /// `1/μ_m(|z|²)`, eigenvalue for directions orthogonal to `z`.
    pub lambda1: f64,
    /// `1/μ_m - 2|z|² μ_m'/μ_m²`, eigenvalue along `z`.
    pub lambda2: f64,
}

pub fn coefficients_a(ev: &EffectiveViscosity, z: [f64; 2]) -> Result<ACoeffs> {
    let r = z[0] * z[0] + z[1] * z[1];
    let (mu, dmu) = ev.eval(r)?;
    let q = 2.0 * dmu / (mu * mu);
    Ok(ACoeffs {
        a11: 1.0 / mu - q * z[0] * z[0],
        a12: -q * z[0] * z[1],
        a22: 1.0 / mu - q * z[1] * z[1],
        lambda1: 1.0 / mu,
        lambda2: 1.0 / mu - q * r,
    })
}

/// `(b11, b12, b22, b)` at a node from `a_ij` and the map terms.
///
/// The `a22` weight in `b22` is `1/(1-2yf)²`: this is what the chain rule
/// gives and what reduces `A_m` to `A_w` for constant viscosity.
#[inline]
fn b_coefficients(m: &MapMetrics, i: usize, y: f64, a: &ACoeffs) -> [f64; 4] {
    let (f, df, ddf) = (m.f[i], m.df[i], m.ddf[i]);
    let d = m.denom(i, y);
    let w = y * y - 1.0;
    let s = df * w / d;
    let t = 1.0 / d;
    let d3 = d * d * d;
    let b11 = a.a11;
    let b12 = s * a.a11 + t * a.a12;
    let b22 = s * s * a.a11 + 2.0 * df * w / (d * d) * a.a12 + t * t * a.a22;
    let b = (ddf * w / d + 4.0 * df * df * y * w / (d * d) + 2.0 * f * df * df * w * w / d3) * a.a11
        + (4.0 * df * y - 4.0 * f * df * (1.0 + y * y)) / d3 * a.a12
        + 2.0 * f / d3 * a.a22;
    [b11, b12, b22, b]
}

/// Nodal coefficient fields of `A_m(f, ·)` frozen at a given `v`.
#[derive(Debug, Clone)]
pub struct QuasilinearCoeffs {
    pub a11: Field2D,
    pub a12: Field2D,
    pub a22: Field2D,
    pub b11: Field2D,
    pub b12: Field2D,
    pub b22: Field2D,
    pub b: Field2D,
    pub lambda1: Field2D,
    pub lambda2: Field2D,
}

impl QuasilinearCoeffs {
    pub fn min_eigenvalue(&self) -> f64 {
        self.lambda1
            .values
            .iter()
            .chain(&self.lambda2.values)
            .fold(f64::INFINITY, |m, &v| m.min(v))
    }
}

/// Transformed gradient from precomputed `v_x`, `v_y`.
#[inline]
fn grad_f(m: &MapMetrics, i: usize, y: f64, vx: f64, vy: f64) -> [f64; 2] {
    let d = m.denom(i, y);
    [vx + m.df[i] * (y * y - 1.0) / d * vy, vy / d]
}

pub fn quasilinear_coefficients(
    f: &PeriodicProfile,
    v: &Field2D,
    ev: &EffectiveViscosity,
) -> Result<QuasilinearCoeffs> {
    check_inputs(f, &v.grid, Domain::Mud)?;
    let grid = &v.grid;
    let m = MapMetrics::new(f)?;
    let (vx, vy) = (v.dx(), v.dy());
    let mut fields: Vec<Field2D> = (0..9).map(|_| Field2D::zeros(grid)).collect();
    for i in 0..grid.nx {
        for (j, &y) in grid.y.iter().enumerate() {
            let k = grid.index(i, j);
            let a = coefficients_a(ev, grad_f(&m, i, y, vx.values[k], vy.values[k]))?;
            let b = b_coefficients(&m, i, y, &a);
            let vals = [a.a11, a.a12, a.a22, b[0], b[1], b[2], b[3], a.lambda1, a.lambda2];
            for (fld, val) in fields.iter_mut().zip(vals) {
                fld.values[k] = val;
            }
        }
    }
    let mut it = fields.into_iter();
    let mut next = || it.next().expect("nine fields");
    Ok(QuasilinearCoeffs {
        a11: next(),
        a12: next(),
        a22: next(),
        b11: next(),
        b12: next(),
        b22: next(),
        b: next(),
        lambda1: next(),
        lambda2: next(),
    })
}

/// Per-node `[c_xx, c_xy, c_yy, c_y]` of `A_m(f, ·)` frozen at `v`.
fn frozen_coefficients(
    m: &MapMetrics,
    v: &Field2D,
    ev: &EffectiveViscosity,
) -> Result<Vec<[f64; 4]>> {
    let grid = &v.grid;
    let (vx, vy) = (v.dx(), v.dy());
    let mut out = Vec::with_capacity(grid.len());
    for i in 0..grid.nx {
        for (j, &y) in grid.y.iter().enumerate() {
            let k = grid.index(i, j);
            let a = coefficients_a(ev, grad_f(m, i, y, vx.values[k], vy.values[k]))?;
            let [b11, b12, b22, b] = b_coefficients(m, i, y, &a);
            out.push([b11, 2.0 * b12, b22, b]);
        }
    }
    Ok(out)
}

/// `A_m(f, v)`.
pub fn apply_am(f: &PeriodicProfile, v: &Field2D, ev: &EffectiveViscosity) -> Result<Field2D> {
    check_inputs(f, &v.grid, Domain::Mud)?;
    let m = MapMetrics::new(f)?;
    let coeffs = frozen_coefficients(&m, v, ev)?;
    let grid = v.grid.clone();
    Ok(combine(&grid, v, |i, j| coeffs[grid.index(i, j)]))
}

/// `B_m(f, v) = ((1 + f'²) v_y - f' v_x) / μ_m(|∇_f v|²)` on `y = 0`, all
/// factors traced.
pub fn boundary_bm(f: &PeriodicProfile, v: &Field2D, ev: &EffectiveViscosity) -> Result<PeriodicProfile> {
    check_inputs(f, &v.grid, Domain::Mud)?;
    let m = MapMetrics::new(f)?;
    let vx = v.dx().trace(Edge::Interface)?;
    let vy = v.dy().trace(Edge::Interface)?;
    let mut out = Vec::with_capacity(f.n());
    for i in 0..f.n() {
        let (df, px, py) = (m.df[i], vx.nodal()[i], vy.nodal()[i]);
        let g1 = px - df * py;
        let (mu, _) = ev.eval(g1 * g1 + py * py)?;
        out.push(((1.0 + df * df) * py - df * px) / mu);
    }
    PeriodicProfile::from_nodal(out)
}

/// Outcome of the discrete weak maximum principle check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MaxPrincipleReport {
    pub ok: bool,
    /// Amount by which interior values exceed the Dirichlet boundary range.
    pub violation: f64,
}

pub const MAX_PRINCIPLE_TOL: f64 = 1e-8;

/// Compares the range of a field with its range on the Dirichlet rows: the
/// interface for mud, interface and lid for water.
pub fn max_principle_check(v: &Field2D) -> MaxPrincipleReport {
    let g = &v.grid;
    let rows: Vec<usize> = match g.domain {
        Domain::Mud => vec![g.interface_row()],
        Domain::Water => vec![0, g.ny - 1],
    };
    let (mut blo, mut bhi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &j in &rows {
        for i in 0..g.nx {
            blo = blo.min(v.at(i, j));
            bhi = bhi.max(v.at(i, j));
        }
    }
    let (lo, hi) = v
        .values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &q| (a.min(q), b.max(q)));
    let violation = (hi - bhi).max(blo - lo).max(0.0);
    MaxPrincipleReport {
        ok: violation <= MAX_PRINCIPLE_TOL,
        violation,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MudScheme {
    /// Freeze the coefficients at the current iterate and solve the linear problem.
    #[default]
    Picard,
    /// Newton on the discrete residual, coefficient derivatives by central differences.
    Newton,
}

#[derive(Debug, Clone)]
pub struct MudSolve {
    pub v: Field2D,
    pub residual_inf: f64,
    pub iterations: usize,
    pub converged: bool,
    pub history: Vec<f64>,
    pub max_principle: MaxPrincipleReport,
    /// Smallest eigenvalue of `a_ij` over the nodes at the solution.
    pub min_eigenvalue: f64,
}

/// Flat-interface modal solution with constant viscosity:
/// `v = Σ p_k cosh(k(y+1))/cosh(k) e^{ikx}`.
pub fn flat_modal_guess(grid: &Arc<Grid>, p: &PeriodicProfile) -> Result<Field2D> {
    let coeffs = analyze(p.nodal());
    let rows: Vec<_> = grid
        .y
        .iter()
        .map(|&y| {
            coeffs
                .iter()
                .enumerate()
                .map(|(idx, c)| {
                    let k = wavenumber(idx, grid.nx).unsigned_abs() as f64;
                    // cosh(k(y+1))/cosh(k) without overflow
                    let ratio = ((k * y).exp() + (-k * (y + 2.0)).exp()) / (1.0 + (-2.0 * k).exp());
                    c * ratio
                })
                .collect::<Vec<_>>()
        })
        .collect();
    Field2D::from_modal_rows(grid, &rows)
}

/// Quasilinear solver for the mud problem.
#[derive(Debug, Clone)]
pub struct MudSolver {
    pub grid: Arc<Grid>,
    pub ev: EffectiveViscosity,
    pub scheme: MudScheme,
    /// Residual tolerance relative to `max(1, sup|p|)`, raised to the roundoff
    /// level of the collocation rows when that is larger.
    pub tol: f64,
    pub max_iter: usize,
    /// Constant viscosity makes the operator independent of `v`; its
    /// factorization is then cached per interface.
    linear_cache: Option<(Vec<f64>, DenseLu)>,
    worst_violation: f64,
    solves: usize,
    /// Row-sum norms `(|D_xx| + 2|D_x||D_y| + |D_yy| + |D_y|)` of the grid.
    derivative_scale: f64,
}

/// Multiple of `ε · |A| · |v|` below which a residual is roundoff.
const ROUNDOFF_FACTOR: f64 = 16.0;

fn row_sum_norm(m: &DMatrix<f64>) -> f64 {
    m.row_iter().map(|r| r.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max)
}

impl MudSolver {
    pub fn new(grid: Arc<Grid>, ev: EffectiveViscosity) -> Result<Self> {
        if grid.domain != Domain::Mud {
            return Err(Error::Shape("mud solver needs a mud grid".into()));
        }
        let (dx, dy) = (row_sum_norm(&grid.dx), row_sum_norm(&grid.dy));
        let derivative_scale = row_sum_norm(&grid.dxx) + 2.0 * dx * dy + row_sum_norm(&grid.dyy) + dy;
        Ok(Self {
            grid,
            ev,
            scheme: MudScheme::Picard,
            tol: 1e-9,
            max_iter: 50,
            linear_cache: None,
            worst_violation: 0.0,
            solves: 0,
            derivative_scale,
        })
    }

    /// Largest maximum-principle violation over all solves so far, and resets it.
    pub fn take_worst_violation(&mut self) -> f64 {
        std::mem::take(&mut self.worst_violation)
    }

    pub fn solve_count(&self) -> usize {
        self.solves
    }

    /// Row-major system for frozen per-node coefficients, optionally adding
    /// the Newton terms `∂R/∂g · ∂g/∂v`.
    fn assemble(&self, m: &MapMetrics, coeffs: &[[f64; 4]], extra: Option<&[[f64; 2]]>) -> DMatrix<f64> {
        let g = &self.grid;
        let n = g.len();
        let mut rows = vec![0.0; n * n];
        let bottom = g.edge_row(Edge::Bottom).expect("mud grid");
        let iface = g.interface_row();
        for i in 0..g.nx {
            for (j, &y) in g.y.iter().enumerate() {
                let r = g.index(i, j);
                let row = &mut rows[r * n..(r + 1) * n];
                if j == iface {
                    row[r] = 1.0;
                } else if j == bottom {
                    for jp in 0..g.ny {
                        row[g.index(i, jp)] = g.dy[(j, jp)];
                    }
                } else {
                    operator_row(g, i, j, coeffs[r], row);
                    if let Some(extra) = extra {
                        let [c1, c2] = extra[r];
                        let d = m.denom(i, y);
                        let s = m.df[i] * (y * y - 1.0) / d;
                        for ip in 0..g.nx {
                            row[g.index(ip, j)] += c1 * g.dx[(i, ip)];
                        }
                        for jp in 0..g.ny {
                            row[g.index(i, jp)] += (c1 * s + c2 / d) * g.dy[(j, jp)];
                        }
                    }
                }
            }
        }
        DMatrix::from_row_slice(n, n, &rows)
    }

    fn rhs(&self, p: &PeriodicProfile) -> Vec<f64> {
        let g = &self.grid;
        let mut rhs = vec![0.0; g.len()];
        let iface = g.interface_row();
        for i in 0..g.nx {
            rhs[g.index(i, iface)] = p.nodal()[i];
        }
        rhs
    }

    /// Full discrete residual: operator rows, Dirichlet rows, Neumann rows.
    fn residual(&self, m: &MapMetrics, v: &Field2D, p: &PeriodicProfile) -> Result<(Vec<f64>, Vec<[f64; 4]>)> {
        let g = &self.grid;
        let coeffs = frozen_coefficients(m, v, &self.ev)?;
        let op = combine(g, v, |i, j| coeffs[g.index(i, j)]);
        let vy = v.dy();
        let bottom = g.edge_row(Edge::Bottom)?;
        let iface = g.interface_row();
        let mut r = op.values;
        for i in 0..g.nx {
            r[g.index(i, iface)] = v.at(i, iface) - p.nodal()[i];
            r[g.index(i, bottom)] = vy.at(i, bottom);
        }
        Ok((r, coeffs))
    }

    /// `∂R/∂g_k` at interior nodes by central differences in `g`.
    fn gradient_sensitivity(&self, m: &MapMetrics, v: &Field2D) -> Result<Vec<[f64; 2]>> {
        let g = &self.grid;
        let (vx, vy, vxx, vxy, vyy) = (v.dx(), v.dy(), v.dxx(), v.dxy(), v.dyy());
        let mut out = vec![[0.0; 2]; g.len()];
        for i in 0..g.nx {
            for (j, &y) in g.y.iter().enumerate() {
                if g.is_boundary_row(j) {
                    continue;
                }
                let k = g.index(i, j);
                let z = grad_f(m, i, y, vx.values[k], vy.values[k]);
                let eval = |z: [f64; 2]| -> Result<f64> {
                    let a = coefficients_a(&self.ev, z)?;
                    let [b11, b12, b22, b] = b_coefficients(m, i, y, &a);
                    Ok(b11 * vxx.values[k] + 2.0 * b12 * vxy.values[k] + b22 * vyy.values[k] + b * vy.values[k])
                };
                for c in 0..2 {
                    let h = 1e-6 * (1.0 + z[c].abs());
                    let (mut zp, mut zm) = (z, z);
                    zp[c] += h;
                    zm[c] -= h;
                    out[k][c] = (eval(zp)? - eval(zm)?) / (2.0 * h);
                }
            }
        }
        Ok(out)
    }

    fn linear_step(&mut self, f: &PeriodicProfile, m: &MapMetrics, coeffs: &[[f64; 4]], rhs: &[f64]) -> Result<Vec<f64>> {
        if self.ev.base.is_newtonian() {
            let fresh = !matches!(&self.linear_cache, Some((key, _)) if key.as_slice() == f.nodal());
            if fresh {
                let lu = DenseLu::factor(self.assemble(m, coeffs, None), "mud solve")?;
                self.linear_cache = Some((f.nodal().to_vec(), lu));
            }
            return Ok(self.linear_cache.as_ref().expect("filled").1.solve(rhs));
        }
        Ok(DenseLu::factor(self.assemble(m, coeffs, None), "mud solve")?.solve(rhs))
    }

    /// Solves the mud problem with Dirichlet data `p` on the interface.
    pub fn solve(&mut self, f: &PeriodicProfile, p: &PeriodicProfile, guess: Option<&Field2D>) -> Result<MudSolve> {
        check_inputs(f, &self.grid, Domain::Mud)?;
        if p.n() != self.grid.nx {
            return Err(Error::Shape("Dirichlet data length differs from Nx".into()));
        }
        let g = self.grid.clone();
        let m = MapMetrics::new(f)?;
        let mut v = match guess {
            Some(v0) if v0.grid.nx == g.nx && v0.grid.ny == g.ny && v0.grid.domain == Domain::Mud => v0.clone(),
            _ => flat_modal_guess(&g, p)?,
        };
        let requested = self.tol * p.sup_norm().max(1.0);
        let rhs = self.rhs(p);
        let inf = |r: &[f64]| r.iter().fold(0.0f64, |a, &b| a.max(b.abs()));

        let (mut res, mut coeffs) = self.residual(&m, &v, p)?;
        let mut res_norm = inf(&res);
        let mut history = vec![res_norm];
        // the target never drops below what roundoff in the collocation rows allows
        let scale = self.derivative_scale;
        let floor = |coeffs: &[[f64; 4]], v: &Field2D| {
            let c = coeffs.iter().flatten().fold(1.0f64, |a, b| a.max(b.abs()));
            ROUNDOFF_FACTOR * f64::EPSILON * c * scale * v.max_abs().max(1.0)
        };
        let mut tol = requested.max(floor(&coeffs, &v));
        let mut iterations = 0;
        while iterations < self.max_iter && (iterations == 0 || res_norm > tol) {
            iterations += 1;
            let update: Vec<f64> = match self.scheme {
                MudScheme::Picard => {
                    let target = self.linear_step(f, &m, &coeffs, &rhs)?;
                    target.iter().zip(&v.values).map(|(t, c)| t - c).collect()
                }
                MudScheme::Newton => {
                    let extra = self.gradient_sensitivity(&m, &v)?;
                    let jac = self.assemble(&m, &coeffs, Some(&extra));
                    let neg: Vec<f64> = res.iter().map(|r| -r).collect();
                    DenseLu::factor(jac, "mud Newton step")?.solve(&neg)
                }
            };
            // damped update, halving the step while the residual grows
            let mut omega = 1.0;
            loop {
                let trial = Field2D::from_values(&g, v.values.iter().zip(&update).map(|(a, d)| a + omega * d).collect())?;
                let (r_new, c_new) = self.residual(&m, &trial, p)?;
                let n_new = inf(&r_new);
                if n_new <= res_norm || omega < 1.0 / 64.0 || iterations == 1 && n_new.is_finite() && omega == 1.0 && res_norm <= tol {
                    v = trial;
                    res = r_new;
                    coeffs = c_new;
                    res_norm = n_new;
                    break;
                }
                omega *= 0.5;
            }
            history.push(res_norm);
            tol = requested.max(floor(&coeffs, &v));
        }
        self.solves += 1;
        let converged = res_norm <= tol && v.is_finite();
        if !converged {
            return Err(Error::NonConvergence {
                what: "mud solve",
                iterations,
                residual: res_norm,
                history,
            });
        }
        let max_principle = max_principle_check(&v);
        self.worst_violation = self.worst_violation.max(max_principle.violation);
        let min_eigenvalue = quasilinear_coefficients(f, &v, &self.ev)?.min_eigenvalue();
        let _ = res;
        Ok(MudSolve {
            v,
            residual_inf: res_norm,
            iterations,
            converged,
            history,
            max_principle,
            min_eigenvalue,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rheology::ViscosityModel;
    use approx::assert_abs_diff_eq;

    fn newtonian() -> EffectiveViscosity {
        EffectiveViscosity::new(ViscosityModel::Newtonian { mu0: 1.0 })
    }

    fn hectorite() -> EffectiveViscosity {
        EffectiveViscosity::new(ViscosityModel::Hectorite {
            mu_inf: 1.0,
            tau0: 1.0,
            beta: 1.0,
        })
    }

    fn grid(nx: usize, ny: usize) -> Arc<Grid> {
        Grid::new(nx, ny, Domain::Mud).unwrap()
    }

    #[test]
    fn a_coefficients() {
        let ev = newtonian();
        let a = coefficients_a(&ev, [0.3, -2.0]).unwrap();
        assert_eq!((a.a11, a.a12, a.a22), (1.0, 0.0, 1.0));
        assert_eq!((a.lambda1, a.lambda2), (1.0, 1.0));

        let ev = hectorite();
        let (mu0, _) = ev.eval(0.0).unwrap();
        let a = coefficients_a(&ev, [0.0, 0.0]).unwrap();
        assert_abs_diff_eq!(a.a11, 1.0 / mu0, epsilon = 1e-15);
        assert_eq!(a.a12, 0.0);

        let (mu, dmu) = ev.eval(1.0).unwrap();
        let a = coefficients_a(&ev, [1.0, 0.0]).unwrap();
        assert_abs_diff_eq!(a.lambda2, 1.0 / mu - 2.0 * dmu / (mu * mu), epsilon = 1e-15);
        // eigenvalues of the symmetric 2x2 matrix
        let tr = a.a11 + a.a22;
        let det = a.a11 * a.a22 - a.a12 * a.a12;
        assert_abs_diff_eq!(tr, a.lambda1 + a.lambda2, epsilon = 1e-14);
        assert_abs_diff_eq!(det, a.lambda1 * a.lambda2, epsilon = 1e-14);
    }

    #[test]
    fn flat_newtonian_operator_is_scaled_laplacian() {
        let g = grid(16, 13);
        let ev = EffectiveViscosity::new(ViscosityModel::Newtonian { mu0: 2.0 });
        let f = PeriodicProfile::zeros(16).unwrap();
        let v = Field2D::from_fn(&g, |x, y| x.cos() * y * y);
        let a = apply_am(&f, &v, &ev).unwrap();
        for i in 0..16 {
            for j in 0..13 {
                let (x, y) = (g.x[i], g.y[j]);
                assert_abs_diff_eq!(a.at(i, j), (-x.cos() * y * y + 2.0 * x.cos()) / 2.0, epsilon = 1e-11);
            }
        }
        let f = PeriodicProfile::from_fn(16, |x| 0.3 * x.sin()).unwrap();
        assert!(apply_am(&f, &Field2D::constant(&g, 2.0), &hectorite()).unwrap().max_abs() < 1e-11);
    }

    #[test]
    fn newtonian_mud_matches_water_operator() {
        let g = grid(16, 11);
        let w = Grid::new(16, 11, Domain::Water).unwrap();
        let f = PeriodicProfile::from_fn(16, |x| 0.2 * x.cos() + 0.05 * (2.0 * x).sin()).unwrap();
        let shape = |x: f64, y: f64| (x + 0.3).sin() * (1.0 + 1.3 * y + 0.8 * y * y - 0.4 * y * y * y);
        let am = apply_am(&f, &Field2D::from_fn(&g, shape), &newtonian()).unwrap();
        // water strip is the mirror image: compare on the shared row y = 0
        let aw = crate::water::apply_aw(&f, &Field2D::from_fn(&w, shape)).unwrap();
        for i in 0..16 {
            assert_abs_diff_eq!(am.at(i, g.ny - 1), aw.at(i, 0), epsilon = 1e-9);
        }
    }

    #[test]
    fn boundary_operator_cases() {
        let g = grid(16, 9);
        let f = PeriodicProfile::zeros(16).unwrap();
        let ev = hectorite();
        assert!(boundary_bm(&f, &Field2D::constant(&g, 1.0), &ev).unwrap().sup_norm() < 1e-12);
        let b = boundary_bm(&f, &Field2D::from_fn(&g, |_, y| y), &ev).unwrap();
        let (mu1, _) = ev.eval(1.0).unwrap();
        assert!(b.nodal().iter().all(|&q| (q - 1.0 / mu1).abs() < 1e-12));

        let nf = PeriodicProfile::from_fn(16, |x| 0.1 * x.sin()).unwrap();
        let shape = |x: f64, y: f64| x.sin() * (1.0 + y) + x.cos() * y * y;
        let v = Field2D::from_fn(&g, shape);
        let bm = boundary_bm(&nf, &v, &EffectiveViscosity::new(ViscosityModel::Newtonian { mu0: 1.5 })).unwrap();
        let wg = Grid::new(16, 9, Domain::Water).unwrap();
        let bw = crate::water::boundary_bw(&nf, &Field2D::from_fn(&wg, shape), 1.5).unwrap();
        for (a, b) in bm.nodal().iter().zip(bw.nodal()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn constant_data_is_reproduced() {
        let g = grid(16, 9);
        let f = PeriodicProfile::from_fn(16, |x| 0.2 * x.cos()).unwrap();
        let p = PeriodicProfile::constant(16, 0.8).unwrap();
        let mut solver = MudSolver::new(g, hectorite()).unwrap();
        let s = solver.solve(&f, &p, None).unwrap();
        assert_eq!(s.iterations, 1);
        assert!(s.v.values.iter().all(|&q| (q - 0.8).abs() < 1e-12));
    }

    #[test]
    fn flat_newtonian_modes_match_closed_form() {
        let g = grid(32, 17);
        let f = PeriodicProfile::zeros(32).unwrap();
        let mut solver = MudSolver::new(g.clone(), newtonian()).unwrap();
        for k in 1..=5 {
            let kk = k as f64;
            let p = PeriodicProfile::from_fn(32, |x| (kk * x).cos()).unwrap();
            // start away from the answer so the solve does real work
            let s = solver.solve(&f, &p, Some(&Field2D::zeros(&g))).unwrap();
            assert!(s.max_principle.ok);
            for i in 0..32 {
                for j in 0..17 {
                    let exact = (kk * g.x[i]).cos() * (kk * (g.y[j] + 1.0)).cosh() / kk.cosh();
                    assert_abs_diff_eq!(s.v.at(i, j), exact, epsilon = 1e-10);
                }
            }
        }
    }

    #[test]
    fn small_data_linearizes() {
        let g = grid(16, 13);
        let f = PeriodicProfile::zeros(16).unwrap();
        let ev = hectorite();
        let mu0 = ev.mu_m_at_zero();
        let eps = 1e-6;
        let p = PeriodicProfile::from_fn(16, |x| eps * x.cos()).unwrap();
        let s = MudSolver::new(g.clone(), ev).unwrap().solve(&f, &p, None).unwrap();
        let lin = MudSolver::new(g, EffectiveViscosity::new(ViscosityModel::Newtonian { mu0 }))
            .unwrap()
            .solve(&f, &p, None)
            .unwrap();
        let diff = s.v.values.iter().zip(&lin.v.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(diff < 10.0 * eps * eps, "diff {diff}");
    }

    #[test]
    fn picard_and_newton_agree_on_curved_interface() {
        let g = grid(16, 11);
        let f = PeriodicProfile::from_fn(16, |x| 0.15 * x.cos() - 0.05 * (2.0 * x).sin()).unwrap();
        let p = PeriodicProfile::from_fn(16, |x| 0.6 * x.sin() + 0.3 * (2.0 * x).cos()).unwrap();
        let mut picard = MudSolver::new(g.clone(), hectorite()).unwrap();
        let a = picard.solve(&f, &p, None).unwrap();
        let mut newton = MudSolver::new(g, hectorite()).unwrap();
        newton.scheme = MudScheme::Newton;
        let b = newton.solve(&f, &p, None).unwrap();
        assert!(b.iterations <= a.iterations);
        assert!(a.min_eigenvalue > 0.0);
        for (x, y) in a.v.values.iter().zip(&b.v.values) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-9);
        }
        // residual decreases after the first iteration
        assert!(a.history.windows(2).skip(1).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn even_data_gives_even_solution() {
        let g = grid(16, 11);
        let f = PeriodicProfile::zeros(16).unwrap();
        let p = PeriodicProfile::from_fn(16, |x| 0.5 * x.cos() + 0.2 * (3.0 * x).cos()).unwrap();
        let s = MudSolver::new(g.clone(), hectorite()).unwrap().solve(&f, &p, None).unwrap();
        for i in 1..16 {
            for j in 0..11 {
                assert_abs_diff_eq!(s.v.at(i, j), s.v.at(16 - i, j), epsilon = 1e-11);
            }
        }
    }

    #[test]
    fn max_principle_detects_spike() {
        let g = grid(16, 9);
        assert!(max_principle_check(&Field2D::constant(&g, 1.0)).ok);
        let mut v = Field2D::from_fn(&g, |x, y| x.cos() * (y + 1.0).cosh() / 1.0f64.cosh());
        assert!(max_principle_check(&v).ok);
        let k = g.index(3, 4);
        v.values[k] = 5.0;
        let r = max_principle_check(&v);
        assert!(!r.ok && r.violation > 3.0);
    }
}
