//! The transformed water problem.
//!
//! With `v = u ∘ φ_f` the Laplacian becomes the variable coefficient operator
//! `A_w(f)`, the normal flux on the interface becomes `B_w(f)`, and the solver
//! below returns the solution of
//!
//! ```text
//! A_w(f) v = 0 in S¹ x (0, 1),   B_w(f) v = F on y = 0,   v = h on y = 1.
//! ```

use std::sync::Arc;

use nalgebra::DMatrix;

use crate::discretization::{Domain, Edge, Field2D, Grid};
use crate::error::{Error, Result};
use crate::geometry::{MapMetrics, PeriodicProfile, ADMISSIBLE_RADIUS};
use crate::linalg::DenseLu;

/// Coefficients of `v_xx`, `v_xy`, `v_yy`, `v_y` in `A_w(f)` at one node.
#[inline]
pub(crate) fn water_coefficients(m: &MapMetrics, i: usize, y: f64) -> [f64; 4] {
    let (f, df, ddf) = (m.f[i], m.df[i], m.ddf[i]);
    let d = m.denom(i, y);
    let w = y * y - 1.0;
    let cxy = 2.0 * df * w / d;
    let cyy = (df * df * w * w + 1.0) / (d * d);
    let cy = ddf * w / d
        + 4.0 * df * df * y * w / (d * d)
        + (2.0 * f * df * df * w * w + 2.0 * f) / (d * d * d);
    [1.0, cxy, cyy, cy]
}

pub(crate) fn check_inputs(f: &PeriodicProfile, grid: &Grid, domain: Domain) -> Result<()> {
    if grid.domain != domain {
        return Err(Error::Shape(format!("expected a {domain:?} grid, got {:?}", grid.domain)));
    }
    if f.n() != grid.nx {
        return Err(Error::Shape(format!(
            "interface has {} nodes, grid has {}",
            f.n(),
            grid.nx
        )));
    }
    if f.sup_norm() >= ADMISSIBLE_RADIUS {
        return Err(Error::Domain(format!(
            "interface leaves the admissible set: sup|f| = {}",
            f.sup_norm()
        )));
    }
    Ok(())
}

/// Evaluates `c_xx v_xx + c_xy v_xy + c_yy v_yy + c_y v_y` from precomputed
/// derivative fields.
pub(crate) fn combine(
    grid: &Arc<Grid>,
    v: &Field2D,
    mut coeff: impl FnMut(usize, usize) -> [f64; 4],
) -> Field2D {
    let (vxx, vxy, vyy, vy) = (v.dxx(), v.dxy(), v.dyy(), v.dy());
    let mut out = Field2D::zeros(grid);
    for i in 0..grid.nx {
        for j in 0..grid.ny {
            let k = grid.index(i, j);
            let c = coeff(i, j);
            out.values[k] = c[0] * vxx.values[k] + c[1] * vxy.values[k] + c[2] * vyy.values[k] + c[3] * vy.values[k];
        }
    }
    out
}

/// Writes the collocation row of a second-order operator into a row-major buffer.
pub(crate) fn operator_row(grid: &Grid, i: usize, j: usize, c: [f64; 4], row: &mut [f64]) {
    let ny = grid.ny;
    for ip in 0..grid.nx {
        row[ip * ny + j] += c[0] * grid.dxx[(i, ip)];
        let dx = grid.dx[(i, ip)];
        if dx != 0.0 && c[1] != 0.0 {
            for jp in 0..ny {
                row[ip * ny + jp] += c[1] * dx * grid.dy[(j, jp)];
            }
        }
    }
    for jp in 0..ny {
        row[i * ny + jp] += c[2] * grid.dyy[(j, jp)] + c[3] * grid.dy[(j, jp)];
    }
}

/// `A_w(f) v`.
pub fn apply_aw(f: &PeriodicProfile, v: &Field2D) -> Result<Field2D> {
    check_inputs(f, &v.grid, Domain::Water)?;
    let m = MapMetrics::new(f)?;
    let grid = v.grid.clone();
    Ok(combine(&grid, v, |i, j| water_coefficients(&m, i, grid.y[j])))
}

/// `B_w(f) v = μ_w⁻¹ [(1 + f'²) v_y - f' v_x]` on `y = 0`.
pub fn boundary_bw(f: &PeriodicProfile, v: &Field2D, mu_w: f64) -> Result<PeriodicProfile> {
    check_inputs(f, &v.grid, Domain::Water)?;
    let m = MapMetrics::new(f)?;
    let vx = v.dx().trace(Edge::Interface)?;
    let vy = v.dy().trace(Edge::Interface)?;
    let out = (0..f.n())
        .map(|i| {
            let df = m.df[i];
            ((1.0 + df * df) * vy.nodal()[i] - df * vx.nodal()[i]) / mu_w
        })
        .collect();
    PeriodicProfile::from_nodal(out)
}

#[derive(Debug, Clone)]
pub struct WaterSolve {
    pub v: Field2D,
    /// `max |A_w(f) v|` over interior nodes.
    pub residual_inf: f64,
    pub bc_residual_inf: f64,
}

/// Solver for the water problem, caching the factorization of the last `f`.
#[derive(Debug, Clone)]
pub struct WaterSolver {
    pub grid: Arc<Grid>,
    pub mu_w: f64,
    cache: Option<(Vec<f64>, DenseLu)>,
}

impl WaterSolver {
    pub fn new(grid: Arc<Grid>, mu_w: f64) -> Result<Self> {
        if grid.domain != Domain::Water {
            return Err(Error::Shape("water solver needs a water grid".into()));
        }
        if !(mu_w > 0.0) {
            return Err(Error::Domain(format!("mu_w must be positive, got {mu_w}")));
        }
        Ok(Self {
            grid,
            mu_w,
            cache: None,
        })
    }

    fn assemble(&self, f: &PeriodicProfile) -> Result<DMatrix<f64>> {
        let g = &self.grid;
        let n = g.len();
        let m = MapMetrics::new(f)?;
        let mut rows = vec![0.0; n * n];
        let top = g.edge_row(Edge::Top)?;
        let iface = g.interface_row();
        for i in 0..g.nx {
            for j in 0..g.ny {
                let r = g.index(i, j);
                let row = &mut rows[r * n..(r + 1) * n];
                if j == top {
                    row[r] = 1.0;
                } else if j == iface {
                    let df = m.df[i];
                    for jp in 0..g.ny {
                        row[g.index(i, jp)] += (1.0 + df * df) * g.dy[(j, jp)] / self.mu_w;
                    }
                    for ip in 0..g.nx {
                        row[g.index(ip, j)] -= df * g.dx[(i, ip)] / self.mu_w;
                    }
                } else {
                    operator_row(g, i, j, water_coefficients(&m, i, g.y[j]), row);
                }
            }
        }
        Ok(DMatrix::from_row_slice(n, n, &rows))
    }

    fn factor(&mut self, f: &PeriodicProfile) -> Result<&DenseLu> {
        let fresh = !matches!(&self.cache, Some((key, _)) if key.as_slice() == f.nodal());
        if fresh {
            let lu = DenseLu::factor(self.assemble(f)?, "water solve")?;
            self.cache = Some((f.nodal().to_vec(), lu));
        }
        Ok(&self.cache.as_ref().expect("just filled").1)
    }

    /// Solves `A_w(f) v = 0`, `B_w(f) v = flux`, `v = h` on the lid.
    pub fn solve(
        &mut self,
        f: &PeriodicProfile,
        flux: &PeriodicProfile,
        h: &PeriodicProfile,
    ) -> Result<WaterSolve> {
        check_inputs(f, &self.grid, Domain::Water)?;
        if flux.n() != self.grid.nx || h.n() != self.grid.nx {
            return Err(Error::Shape("boundary data length differs from Nx".into()));
        }
        let g = self.grid.clone();
        let mut rhs = vec![0.0; g.len()];
        let top = g.edge_row(Edge::Top)?;
        let iface = g.interface_row();
        for i in 0..g.nx {
            rhs[g.index(i, top)] = h.nodal()[i];
            rhs[g.index(i, iface)] = flux.nodal()[i];
        }
        let values = self.factor(f)?.solve(&rhs);
        let v = Field2D::from_values(&g, values)?;
        if !v.is_finite() {
            return Err(Error::Singular {
                what: "water solve",
                condition: self.cache.as_ref().map_or(f64::NAN, |c| c.1.condition_estimate),
            });
        }

        let interior = apply_aw(f, &v)?;
        let residual_inf = (0..g.nx)
            .flat_map(|i| (1..g.ny - 1).map(move |j| (i, j)))
            .map(|(i, j)| interior.at(i, j).abs())
            .fold(0.0, f64::max);
        let bw = boundary_bw(f, &v, self.mu_w)?;
        let lid = v.trace(Edge::Top)?;
        let bc_residual_inf = (&bw - flux).sup_norm().max((&lid - h).sup_norm());
        Ok(WaterSolve {
            v,
            residual_inf,
            bc_residual_inf,
        })
    }
}

/// One-shot convenience wrapper around [`WaterSolver`].
pub fn solve_t(
    grid: &Arc<Grid>,
    mu_w: f64,
    f: &PeriodicProfile,
    flux: &PeriodicProfile,
    h: &PeriodicProfile,
) -> Result<WaterSolve> {
    WaterSolver::new(grid.clone(), mu_w)?.solve(f, flux, h)
}
