//! Fourier x Chebyshev collocation on the reference strips.
//!
//! The water strip is `S¹ x [0, 1]`, the mud strip `S¹ x [-1, 0]`. In `x` we
//! collocate at `x_i = 2π i / Nx`, in `y` at Chebyshev–Gauss–Lobatto points
//! mapped to the strip, listed in increasing order so both endpoints are nodes.
//! Fields are stored nodally, x-major: value `(i, j)` sits at `i * Ny + j`.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::sync::Arc;

use nalgebra::DMatrix;
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::PeriodicProfile;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Domain {
    /// `y ∈ [0, 1]`, interface at the bottom row, Dirichlet lid on top.
    Water,
    /// `y ∈ [-1, 0]`, impermeable bed at the bottom row, interface on top.
    Mud,
}

impl Domain {
    pub fn bounds(self) -> (f64, f64) {
        match self {
            Domain::Water => (0.0, 1.0),
            Domain::Mud => (-1.0, 0.0),
        }
    }
}

/// Boundary rows of a strip.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Edge {
    /// `y = 1`, water only.
    Top,
    /// `y = -1`, mud only.
    Bottom,
    /// `y = 0`, present on both strips.
    Interface,
}

#[derive(Debug, Clone)]
pub struct Grid {
    pub nx: usize,
    pub ny: usize,
    pub domain: Domain,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub dx: DMatrix<f64>,
    pub dxx: DMatrix<f64>,
    pub dy: DMatrix<f64>,
    pub dyy: DMatrix<f64>,
}

impl Grid {
    pub fn new(nx: usize, ny: usize, domain: Domain) -> Result<Arc<Grid>> {
        if nx < 8 || !nx.is_multiple_of(2) {
            return Err(Error::Domain(format!("Nx must be even and >= 8, got {nx}")));
        }
        if ny < 5 {
            return Err(Error::Domain(format!("Ny must be >= 5, got {ny}")));
        }
        let x = (0..nx).map(|i| 2.0 * PI * i as f64 / nx as f64).collect();
        let (dx, dxx) = fourier_matrices(nx);
        let (a, b) = domain.bounds();
        let (xi, d) = chebyshev_lobatto(ny);
        let y = xi.iter().map(|s| a + 0.5 * (s + 1.0) * (b - a)).collect();
        let dy = d * (2.0 / (b - a));
        let dyy = &dy * &dy;
        Ok(Arc::new(Grid {
            nx,
            ny,
            domain,
            x,
            y,
            dx,
            dxx,
            dy,
            dyy,
        }))
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.ny + j
    }

    /// Row index `j` of a boundary edge.
    pub fn edge_row(&self, edge: Edge) -> Result<usize> {
        match (self.domain, edge) {
            (Domain::Water, Edge::Interface) | (Domain::Mud, Edge::Bottom) => Ok(0),
            (Domain::Water, Edge::Top) | (Domain::Mud, Edge::Interface) => Ok(self.ny - 1),
            (d, e) => Err(Error::Shape(format!("{d:?} strip has no {e:?} edge"))),
        }
    }

    pub fn interface_row(&self) -> usize {
        self.edge_row(Edge::Interface).expect("both strips touch the interface")
    }

    pub fn is_boundary_row(&self, j: usize) -> bool {
        j == 0 || j == self.ny - 1
    }
}

/// First and second Fourier collocation derivative matrices for even `n`.
///
/// The first derivative drops the Nyquist mode, the second keeps it with
/// symbol `-(n/2)²`, matching spectral multiplication by `(ik)^order`.
fn fourier_matrices(n: usize) -> (DMatrix<f64>, DMatrix<f64>) {
    let h = 2.0 * PI / n as f64;
    let mut d1 = DMatrix::zeros(n, n);
    let mut d2 = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            if i == j {
                d2[(i, j)] = -PI * PI / (3.0 * h * h) - 1.0 / 6.0;
                continue;
            }
            let m = i as isize - j as isize;
            let sign = if m.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            let half = 0.5 * m as f64 * h;
            d1[(i, j)] = 0.5 * sign / half.tan();
            d2[(i, j)] = -0.5 * sign / (half.sin() * half.sin());
        }
    }
    (d1, d2)
}

/// Increasing Chebyshev–Gauss–Lobatto nodes on `[-1, 1]` and the barycentric
/// differentiation matrix, diagonal fixed by the negative-sum trick.
fn chebyshev_lobatto(n: usize) -> (Vec<f64>, DMatrix<f64>) {
    let m = n - 1;
    let nodes: Vec<f64> = (0..n).map(|j| -(PI * j as f64 / m as f64).cos()).collect();
    let weights: Vec<f64> = (0..n)
        .map(|j| {
            let s = if j % 2 == 0 { 1.0 } else { -1.0 };
            if j == 0 || j == m {
                0.5 * s
            } else {
                s
            }
        })
        .collect();
    let mut d = DMatrix::zeros(n, n);
    for i in 0..n {
        let mut diag = 0.0;
        for j in 0..n {
            if i != j {
                let v = weights[j] / weights[i] / (nodes[i] - nodes[j]);
                d[(i, j)] = v;
                diag -= v;
            }
        }
        d[(i, i)] = diag;
    }
    (nodes, d)
}

/// Signed wavenumber of FFT slot `idx`; the Nyquist slot maps to `+n/2`.
#[inline]
pub fn wavenumber(idx: usize, n: usize) -> i64 {
    if idx <= n / 2 {
        idx as i64
    } else {
        idx as i64 - n as i64
    }
}

/// FFT slot of wavenumber `k`, if it is resolved on `n` points.
pub fn slot(k: i64, n: usize) -> Option<usize> {
    let half = (n / 2) as i64;
    if k > half || k <= -half {
        return None;
    }
    Some(k.rem_euclid(n as i64) as usize)
}

/// Coefficients `a_k` with `v(x_j) = Σ a_k e^{i k x_j}`, in FFT order.
pub fn analyze(values: &[f64]) -> Vec<Complex64> {
    let n = values.len();
    let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let scale = 1.0 / n as f64;
    buf.iter_mut().for_each(|c| *c *= scale);
    buf
}

/// Inverse of [`analyze`]; the imaginary part of the synthesis is dropped.
pub fn synthesize(coeffs: &[Complex64]) -> Vec<f64> {
    let n = coeffs.len();
    let mut buf = coeffs.to_vec();
    FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
    buf.iter().map(|c| c.re).collect()
}

/// A nodal field on one strip.
#[derive(Debug, Clone)]
pub struct Field2D {
    pub grid: Arc<Grid>,
    pub values: Vec<f64>,
}

impl Field2D {
    pub fn zeros(grid: &Arc<Grid>) -> Self {
        Self {
            grid: grid.clone(),
            values: vec![0.0; grid.len()],
        }
    }

    pub fn constant(grid: &Arc<Grid>, c: f64) -> Self {
        Self {
            grid: grid.clone(),
            values: vec![c; grid.len()],
        }
    }

    pub fn from_fn(grid: &Arc<Grid>, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(grid.len());
        for &x in &grid.x {
            for &y in &grid.y {
                values.push(f(x, y));
            }
        }
        Self {
            grid: grid.clone(),
            values,
        }
    }

    pub fn from_values(grid: &Arc<Grid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Shape(format!(
                "field needs {} values, got {}",
                grid.len(),
                values.len()
            )));
        }
        Ok(Self {
            grid: grid.clone(),
            values,
        })
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.grid.ny + j]
    }

    fn map_values(&self, values: Vec<f64>) -> Self {
        Self {
            grid: self.grid.clone(),
            values,
        }
    }

    /// Applies an `Nx x Nx` matrix along `x` for every `y` row.
    fn along_x(&self, m: &DMatrix<f64>) -> Self {
        let (nx, ny) = (self.grid.nx, self.grid.ny);
        let mut out = vec![0.0; nx * ny];
        for i in 0..nx {
            for k in 0..nx {
                let c = m[(i, k)];
                if c == 0.0 {
                    continue;
                }
                let src = &self.values[k * ny..(k + 1) * ny];
                let dst = &mut out[i * ny..(i + 1) * ny];
                dst.iter_mut().zip(src).for_each(|(d, s)| *d += c * s);
            }
        }
        self.map_values(out)
    }

    /// Applies an `Ny x Ny` matrix along `y` for every `x` column.
    fn along_y(&self, m: &DMatrix<f64>) -> Self {
        let (nx, ny) = (self.grid.nx, self.grid.ny);
        let mut out = vec![0.0; nx * ny];
        for i in 0..nx {
            let src = &self.values[i * ny..(i + 1) * ny];
            for j in 0..ny {
                out[i * ny + j] = (0..ny).map(|k| m[(j, k)] * src[k]).sum();
            }
        }
        self.map_values(out)
    }

    pub fn dx(&self) -> Self {
        self.along_x(&self.grid.dx)
    }

    pub fn dxx(&self) -> Self {
        self.along_x(&self.grid.dxx)
    }

    pub fn dy(&self) -> Self {
        self.along_y(&self.grid.dy)
    }

    pub fn dyy(&self) -> Self {
        self.along_y(&self.grid.dyy)
    }

    pub fn dxy(&self) -> Self {
        self.dy().dx()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Restriction to a boundary row as a periodic profile.
    pub fn trace(&self, edge: Edge) -> Result<PeriodicProfile> {
        let j = self.grid.edge_row(edge)?;
        self.row(j)
    }

    pub fn row(&self, j: usize) -> Result<PeriodicProfile> {
        let row = (0..self.grid.nx).map(|i| self.at(i, j)).collect();
        PeriodicProfile::from_nodal(row)
    }

    /// Fourier coefficients in `x` of every `y` row: `out[j][slot]`.
    pub fn modal_rows(&self) -> Vec<Vec<Complex64>> {
        (0..self.grid.ny)
            .map(|j| {
                let row: Vec<f64> = (0..self.grid.nx).map(|i| self.at(i, j)).collect();
                analyze(&row)
            })
            .collect()
    }

    /// Inverse of [`Field2D::modal_rows`].
    pub fn from_modal_rows(grid: &Arc<Grid>, rows: &[Vec<Complex64>]) -> Result<Self> {
        if rows.len() != grid.ny || rows.iter().any(|r| r.len() != grid.nx) {
            return Err(Error::Shape("modal rows do not match the grid".into()));
        }
        let synth: Vec<Vec<f64>> = rows.iter().map(|r| synthesize(r)).collect();
        Ok(Self::from_fn_indexed(grid, |i, j| synth[j][i]))
    }

    pub fn from_fn_indexed(grid: &Arc<Grid>, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut values = Vec::with_capacity(grid.len());
        for i in 0..grid.nx {
            for j in 0..grid.ny {
                values.push(f(i, j));
            }
        }
        Self {
            grid: grid.clone(),
            values,
        }
    }

    /// `x,y,value` lines with 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("x,y,value\n");
        for (i, &x) in self.grid.x.iter().enumerate() {
            for (j, &y) in self.grid.y.iter().enumerate() {
                let _ = writeln!(s, "{x:.16e},{y:.16e},{:.16e}", self.at(i, j));
            }
        }
        s
    }

    /// Nested arrays `values[i][j]`.
    pub fn to_json(&self) -> serde_json::Value {
        let rows: Vec<Vec<f64>> = (0..self.grid.nx)
            .map(|i| (0..self.grid.ny).map(|j| self.at(i, j)).collect())
            .collect();
        serde_json::json!({
            "domain": self.grid.domain,
            "x": self.grid.x,
            "y": self.grid.y,
            "values": rows,
        })
    }
}
