//! Periodic interface profiles and the flattening diffeomorphism.
//!
//! A profile is a real `2π`-periodic function sampled at `x_j = 2π j / N`.
//! The interface `y = f(x)` is pulled back to the flat line `y = 0` by
//! `φ_f(x, y) = (x, y + (1 - y²) f(x))`, which fixes `y = ±1`.

use std::collections::BTreeMap;
use std::ops::{Add, Mul, Sub};
use std::sync::OnceLock;

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::discretization::{analyze, slot, synthesize, wavenumber, Field2D};
use crate::error::{Error, Result};

/// Sup-norm radius of the admissible set of interfaces.
pub const ADMISSIBLE_RADIUS: f64 = 0.5;

/// Serialized as the array of nodal values.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct PeriodicProfile {
    nodal: Vec<f64>,
    modes: OnceLock<Vec<Complex64>>,
}

impl From<PeriodicProfile> for Vec<f64> {
    fn from(p: PeriodicProfile) -> Self {
        p.nodal
    }
}

impl TryFrom<Vec<f64>> for PeriodicProfile {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::from_nodal(v)
    }
}

impl PartialEq for PeriodicProfile {
    fn eq(&self, other: &Self) -> bool {
        self.nodal == other.nodal
    }
}

impl PeriodicProfile {
    pub fn from_nodal(nodal: Vec<f64>) -> Result<Self> {
        let n = nodal.len();
        if n < 4 || !n.is_multiple_of(2) {
            return Err(Error::Shape(format!("profile length must be even and >= 4, got {n}")));
        }
        Ok(Self {
            nodal,
            modes: OnceLock::new(),
        })
    }

    pub fn zeros(n: usize) -> Result<Self> {
        Self::from_nodal(vec![0.0; n])
    }

    pub fn constant(n: usize, c: f64) -> Result<Self> {
        Self::from_nodal(vec![c; n])
    }

    pub fn from_fn(n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::from_nodal(
            (0..n)
                .map(|j| f(2.0 * std::f64::consts::PI * j as f64 / n as f64))
                .collect(),
        )
    }

    /// Real profile `Σ (a_k e^{ikx} + conj)` over the given `(k, a_k)` with `k > 0`,
    /// plus the `k = 0` entry taken as the mean.
    pub fn from_modes(n: usize, modes: &[(i64, Complex64)]) -> Result<Self> {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); n];
        for &(k, a) in modes {
            let k = k.abs();
            let idx = slot(k, n)
                .filter(|_| k < (n / 2) as i64)
                .ok_or_else(|| Error::Domain(format!("mode {k} not resolved on {n} points")))?;
            if k == 0 {
                coeffs[0] += Complex64::new(a.re, 0.0);
            } else {
                coeffs[idx] += a;
                coeffs[n - idx] += a.conj();
            }
        }
        Self::from_nodal(synthesize(&coeffs))
    }

    pub fn from_coefficients(coeffs: &[Complex64]) -> Result<Self> {
        Self::from_nodal(synthesize(coeffs))
    }

    pub fn n(&self) -> usize {
        self.nodal.len()
    }

    pub fn nodal(&self) -> &[f64] {
        &self.nodal
    }

    pub fn into_nodal(self) -> Vec<f64> {
        self.nodal
    }

    /// Coefficients `a_k` in FFT order, computed once.
    pub fn modes(&self) -> &[Complex64] {
        self.modes.get_or_init(|| analyze(&self.nodal))
    }

    /// `a_k` for a signed wavenumber; zero when unresolved.
    pub fn mode(&self, k: i64) -> Complex64 {
        slot(k, self.n())
            .map(|s| self.modes()[s])
            .unwrap_or_default()
    }

    pub fn mean(&self) -> f64 {
        self.nodal.iter().sum::<f64>() / self.n() as f64
    }

    pub fn sup_norm(&self) -> f64 {
        self.nodal.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn x(&self, j: usize) -> f64 {
        2.0 * std::f64::consts::PI * j as f64 / self.n() as f64
    }

    /// Trigonometric interpolant at an arbitrary `x`.
    pub fn eval_at(&self, x: f64) -> f64 {
        let n = self.n();
        let modes = self.modes();
        let mut sum = modes[0].re;
        for (idx, a) in modes.iter().enumerate().take(n / 2).skip(1) {
            let k = idx as f64;
            sum += 2.0 * (a.re * (k * x).cos() - a.im * (k * x).sin());
        }
        sum + modes[n / 2].re * (0.5 * n as f64 * x).cos()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self::from_nodal(self.nodal.iter().map(|&v| f(v)).collect()).expect("same length")
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        assert_eq!(self.n(), other.n(), "profile lengths differ");
        Self::from_nodal(
            self.nodal
                .iter()
                .zip(&other.nodal)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        )
        .expect("same length")
    }

    /// Subtracts the mean.
    pub fn project_mean_zero(&self) -> Self {
        let m = self.mean();
        self.map(|v| v - m)
    }

    /// Cyclic shift by `shift` grid points: `g(x_j) = f(x_{j - shift})`.
    pub fn shifted(&self, shift: usize) -> Self {
        let n = self.n();
        Self::from_nodal((0..n).map(|j| self.nodal[(j + n - shift % n) % n]).collect())
            .expect("same length")
    }

    /// Applies a real, even Fourier multiplier `symbol(k)`.
    pub fn apply_multiplier(&self, symbol: impl Fn(i64) -> f64) -> Self {
        let n = self.n();
        let coeffs: Vec<Complex64> = self
            .modes()
            .iter()
            .enumerate()
            .map(|(idx, a)| a * symbol(wavenumber(idx, n)))
            .collect();
        Self::from_coefficients(&coeffs).expect("same length")
    }

    pub fn dot(&self, other: &Self) -> f64 {
        self.nodal.iter().zip(&other.nodal).map(|(a, b)| a * b).sum()
    }
}

impl Add for &PeriodicProfile {
    type Output = PeriodicProfile;
    fn add(self, rhs: Self) -> PeriodicProfile {
        self.zip_map(rhs, |a, b| a + b)
    }
}

impl Sub for &PeriodicProfile {
    type Output = PeriodicProfile;
    fn sub(self, rhs: Self) -> PeriodicProfile {
        self.zip_map(rhs, |a, b| a - b)
    }
}

impl Mul<f64> for &PeriodicProfile {
    type Output = PeriodicProfile;
    fn mul(self, rhs: f64) -> PeriodicProfile {
        self.map(|a| a * rhs)
    }
}

/// Profile input accepted in configuration files: nodal values, or a modal map
/// `{"k": [re, im]}` listing nonnegative wavenumbers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ProfileInput {
    Nodal(Vec<f64>),
    Modal(BTreeMap<String, [f64; 2]>),
}

impl ProfileInput {
    pub fn to_profile(&self, n: usize) -> Result<PeriodicProfile> {
        match self {
            ProfileInput::Nodal(v) if v.len() == n => PeriodicProfile::from_nodal(v.clone()),
            ProfileInput::Nodal(v) => Err(Error::Shape(format!(
                "nodal profile has {} values, grid has {n}",
                v.len()
            ))),
            ProfileInput::Modal(map) => {
                let mut modes = Vec::with_capacity(map.len());
                for (key, [re, im]) in map {
                    let k: i64 = key
                        .trim()
                        .parse()
                        .map_err(|_| Error::Domain(format!("mode key {key:?} is not an integer")))?;
                    if k < 0 {
                        return Err(Error::Domain(format!("mode key {k} must be >= 0")));
                    }
                    modes.push((k, Complex64::new(*re, *im)));
                }
                PeriodicProfile::from_modes(n, &modes)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AdmissibilityReport {
    pub sup_norm: f64,
    /// `sup |f| < 1/2`.
    pub in_u: bool,
    pub mean_zero: bool,
    pub margin: f64,
    /// `in_u`, and `mean_zero` when it was required.
    pub admissible: bool,
}

pub const MEAN_ZERO_TOL: f64 = 1e-12;

pub fn validate_profile(f: &PeriodicProfile, require_mean_zero: bool) -> AdmissibilityReport {
    let sup_norm = f.sup_norm();
    let mean_zero = f.mean().abs() <= MEAN_ZERO_TOL;
    let in_u = sup_norm < ADMISSIBLE_RADIUS;
    AdmissibilityReport {
        sup_norm,
        in_u,
        mean_zero,
        margin: ADMISSIBLE_RADIUS - sup_norm,
        admissible: in_u && (mean_zero || !require_mean_zero),
    }
}

/// Spectral derivative of order 1 to 4.
pub fn diff_profile(f: &PeriodicProfile, order: u32) -> Result<PeriodicProfile> {
    if !(1..=4).contains(&order) {
        return Err(Error::Domain(format!("derivative order must be 1..=4, got {order}")));
    }
    let n = f.n();
    let coeffs: Vec<Complex64> = f
        .modes()
        .iter()
        .enumerate()
        .map(|(idx, a)| {
            let k = wavenumber(idx, n);
            if k == 0 || (order % 2 == 1 && idx == n / 2) {
                return Complex64::new(0.0, 0.0);
            }
            a * Complex64::new(0.0, k as f64).powu(order)
        })
        .collect();
    PeriodicProfile::from_coefficients(&coeffs)
}

/// Evaluates a pointwise nonlinear combination of profiles on a `3N/2` padded
/// grid and truncates back to `N` modes.
pub fn dealiased(inputs: &[&PeriodicProfile], op: impl Fn(&[f64]) -> f64) -> PeriodicProfile {
    let n = inputs[0].n();
    let m = 3 * n / 2;
    let padded: Vec<Vec<f64>> = inputs
        .iter()
        .map(|p| {
            let mut c = vec![Complex64::new(0.0, 0.0); m];
            for (idx, a) in p.modes().iter().enumerate() {
                let k = wavenumber(idx, n);
                if idx == n / 2 {
                    // split the Nyquist mode symmetrically
                    c[n / 2] += 0.5 * a;
                    c[m - n / 2] += 0.5 * a;
                } else {
                    c[k.rem_euclid(m as i64) as usize] += a;
                }
            }
            synthesize(&c)
        })
        .collect();
    let mut args = vec![0.0; inputs.len()];
    let values: Vec<f64> = (0..m)
        .map(|j| {
            for (a, col) in args.iter_mut().zip(&padded) {
                *a = col[j];
            }
            op(&args)
        })
        .collect();
    let fine = analyze(&values);
    let mut coarse = vec![Complex64::new(0.0, 0.0); n];
    for (idx, c) in coarse.iter_mut().enumerate() {
        let k = wavenumber(idx, n);
        if idx == n / 2 {
            *c = Complex64::new(2.0 * fine[n / 2].re, 0.0);
        } else {
            *c = fine[k.rem_euclid(m as i64) as usize];
        }
    }
    PeriodicProfile::from_coefficients(&coarse).expect("same length")
}

/// Curvature `κ(f) = f'' / (1 + f'²)^{3/2}`, dealiased.
pub fn curvature(f: &PeriodicProfile) -> Result<PeriodicProfile> {
    let d1 = diff_profile(f, 1)?;
    let d2 = diff_profile(f, 2)?;
    Ok(dealiased(&[&d1, &d2], |a| a[1] / (1.0 + a[0] * a[0]).powf(1.5)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MapDirection {
    Forward,
    Inverse,
}

/// `φ_f` or its inverse at a single point.
pub fn transform_point(
    f: &PeriodicProfile,
    x: f64,
    y: f64,
    direction: MapDirection,
) -> Result<(f64, f64)> {
    if !(-1.0..=1.0).contains(&y) {
        return Err(Error::Domain(format!("y = {y} outside [-1, 1]")));
    }
    let fx = f.eval_at(x);
    match direction {
        MapDirection::Forward => Ok((x, y + (1.0 - y * y) * fx)),
        MapDirection::Inverse => {
            if f.sup_norm() >= ADMISSIBLE_RADIUS || fx.abs() >= ADMISSIBLE_RADIUS {
                return Err(Error::Domain(format!(
                    "inverse map needs sup|f| < 1/2, got {}",
                    f.sup_norm()
                )));
            }
            Ok((x, inverse_height(fx, y)?))
        }
    }
}

/// Solves `ỹ + (1 - ỹ²) f = y` for `ỹ ∈ [-1, 1]` in the conjugate form,
/// which stays regular as `f → 0`.
pub fn inverse_height(f: f64, y: f64) -> Result<f64> {
    let disc = 1.0 - 4.0 * f * y + 4.0 * f * f;
    if !(disc >= 0.0) {
        return Err(Error::Domain(format!("inverse map undefined at f = {f}, y = {y}")));
    }
    Ok(2.0 * (y - f) / (1.0 + disc.sqrt()))
}

/// Pointwise metric terms of `φ_f` on a strip: `s = f'(y² - 1)/(1 - 2yf)` and
/// `t = 1/(1 - 2yf)`, so that `∇u ∘ φ_f = (v_x + s v_y, t v_y)`.
#[derive(Debug, Clone)]
pub(crate) struct MapMetrics {
    pub f: Vec<f64>,
    pub df: Vec<f64>,
    pub ddf: Vec<f64>,
}

impl MapMetrics {
    pub fn new(f: &PeriodicProfile) -> Result<Self> {
        Ok(Self {
            f: f.nodal().to_vec(),
            df: diff_profile(f, 1)?.into_nodal(),
            ddf: diff_profile(f, 2)?.into_nodal(),
        })
    }

    /// `1 - 2 y f(x_i)`, asserted positive.
    #[inline]
    pub fn denom(&self, i: usize, y: f64) -> f64 {
        let d = 1.0 - 2.0 * y * self.f[i];
        assert!(d > 0.0, "flattening map degenerate: 1 - 2yf = {d}");
        d
    }
}

/// `∇_f v = (v_x + f'(y²-1)/(1-2yf) v_y, v_y/(1-2yf))`.
pub fn transformed_gradient(f: &PeriodicProfile, v: &Field2D) -> Result<(Field2D, Field2D)> {
    let grid = &v.grid;
    if f.n() != grid.nx {
        return Err(Error::Shape(format!("profile has {} nodes, grid {}", f.n(), grid.nx)));
    }
    if f.sup_norm() >= ADMISSIBLE_RADIUS {
        return Err(Error::Domain("interface is not admissible".into()));
    }
    let m = MapMetrics::new(f)?;
    let vx = v.dx();
    let vy = v.dy();
    let mut g1 = Field2D::zeros(grid);
    let mut g2 = Field2D::zeros(grid);
    for i in 0..grid.nx {
        for (j, &y) in grid.y.iter().enumerate() {
            let d = m.denom(i, y);
            let k = grid.index(i, j);
            g1.values[k] = vx.values[k] + m.df[i] * (y * y - 1.0) / d * vy.values[k];
            g2.values[k] = vy.values[k] / d;
        }
    }
    Ok((g1, g2))
}

/// Unit normal into the water, `(-f', 1)/√(1+f'²)`, and normal speed
/// `V = F/√(1+f'²)` of an interface moving with vertical velocity `F`.
pub fn normal_and_velocity(
    f: &PeriodicProfile,
    velocity: &PeriodicProfile,
) -> Result<(PeriodicProfile, PeriodicProfile, PeriodicProfile)> {
    if f.n() != velocity.n() {
        return Err(Error::Shape("profiles differ in length".into()));
    }
    let df = diff_profile(f, 1)?;
    let norm = df.map(|d| (1.0 + d * d).sqrt());
    let nx = df.zip_map(&norm, |d, s| -d / s);
    let ny = norm.map(|s| 1.0 / s);
    let speed = velocity.zip_map(&norm, |v, s| v / s);
    Ok((nx, ny, speed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::{Domain, Grid};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn cosine(n: usize, amp: f64, k: f64) -> PeriodicProfile {
        PeriodicProfile::from_fn(n, |x| amp * (k * x).cos()).unwrap()
    }

    #[test]
    fn admissibility() {
        let r = validate_profile(&PeriodicProfile::zeros(16).unwrap(), true);
        assert!(r.in_u && r.mean_zero);
        assert_eq!(r.margin, 0.5);
        assert!(!validate_profile(&cosine(16, 0.6, 1.0), true).in_u);
        let shifted = PeriodicProfile::from_fn(16, |x| 0.1 * x.cos() + 0.05).unwrap();
        let r = validate_profile(&shifted, true);
        assert!(r.in_u && !r.mean_zero && !r.admissible);
        assert!(validate_profile(&shifted, false).admissible);
        assert_abs_diff_eq!(r.sup_norm, 0.15, epsilon = 1e-15);
    }

    #[test]
    fn derivatives_of_modes() {
        let n = 32;
        let d = diff_profile(&cosine(n, 1.0, 1.0), 1).unwrap();
        let d2 = diff_profile(&cosine(n, 1.0, 2.0), 2).unwrap();
        for j in 0..n {
            let x = d.x(j);
            assert_abs_diff_eq!(d.nodal()[j], -x.sin(), epsilon = 1e-14);
            assert_abs_diff_eq!(d2.nodal()[j], -4.0 * (2.0 * x).cos(), epsilon = 1e-13);
        }
        let s = PeriodicProfile::from_fn(n, |x| (5.0 * x).sin()).unwrap();
        let d4 = diff_profile(&s, 4).unwrap();
        for j in 0..n {
            assert_abs_diff_eq!(d4.nodal()[j], 625.0 * (5.0 * s.x(j)).sin(), epsilon = 1e-10);
        }
        assert_abs_diff_eq!(d4.mean(), 0.0, epsilon = 1e-14);
        assert!(diff_profile(&s, 5).is_err());
    }

    #[test]
    fn curvature_cases() {
        let z = curvature(&PeriodicProfile::zeros(32).unwrap()).unwrap();
        assert!(z.sup_norm() == 0.0);
        let k = curvature(&cosine(64, 0.1, 1.0)).unwrap();
        assert_abs_diff_eq!(k.nodal()[0], -0.1, epsilon = 1e-14);
        for eps in [1e-4, 1e-6, 1e-8] {
            let k = curvature(&cosine(32, eps, 1.0)).unwrap();
            for j in 0..32 {
                let x = k.x(j);
                assert_abs_diff_eq!(k.nodal()[j], -eps * x.cos(), epsilon = 2.0 * eps.powi(3) + 1e-18);
            }
        }
    }

    #[test]
    fn map_fixes_walls_and_maps_interface() {
        let f = cosine(32, 0.2, 1.0);
        for x in [0.0, 1.3, 4.0] {
            let (_, y) = transform_point(&f, x, 0.0, MapDirection::Forward).unwrap();
            assert_abs_diff_eq!(y, f.eval_at(x), epsilon = 1e-15);
            for wall in [-1.0, 1.0] {
                let (_, y) = transform_point(&f, x, wall, MapDirection::Forward).unwrap();
                assert_eq!(y, wall);
                let (_, y) = transform_point(&f, x, wall, MapDirection::Inverse).unwrap();
                assert_abs_diff_eq!(y, wall, epsilon = 1e-15);
            }
        }
        let z = PeriodicProfile::zeros(16).unwrap();
        let (_, y) = transform_point(&z, 0.3, -0.4, MapDirection::Inverse).unwrap();
        assert_eq!(y, -0.4);
        assert!(transform_point(&cosine(16, 0.6, 1.0), 0.0, 0.2, MapDirection::Inverse).is_err());
    }

    #[test]
    fn transformed_gradient_of_height() {
        let g = Grid::new(16, 9, Domain::Mud).unwrap();
        let f = PeriodicProfile::from_fn(16, |x| 0.1 * x.sin()).unwrap();
        let v = Field2D::from_fn(&g, |_, y| y);
        let (g1, g2) = transformed_gradient(&f, &v).unwrap();
        for i in 0..16 {
            let x = g.x[i];
            let (fx, dfx) = (0.1 * x.sin(), 0.1 * x.cos());
            for (j, &y) in g.y.iter().enumerate() {
                let d = 1.0 - 2.0 * y * fx;
                assert_abs_diff_eq!(g1.at(i, j), dfx * (y * y - 1.0) / d, epsilon = 1e-12);
                assert_abs_diff_eq!(g2.at(i, j), 1.0 / d, epsilon = 1e-12);
            }
            // trace at y = 0 is (-f', 1)
            assert_abs_diff_eq!(g1.at(i, g.ny - 1), -dfx, epsilon = 1e-12);
        }
        let flat = PeriodicProfile::zeros(16).unwrap();
        let w = Field2D::from_fn(&g, |x, y| x.sin() * y);
        let (a, b) = transformed_gradient(&flat, &w).unwrap();
        assert!(a.values.iter().zip(&w.dx().values).all(|(p, q)| (p - q).abs() < 1e-14));
        assert!(b.values.iter().zip(&w.dy().values).all(|(p, q)| (p - q).abs() < 1e-14));
    }

    #[test]
    fn normals() {
        let z = PeriodicProfile::zeros(16).unwrap();
        let c = cosine(16, 1.0, 1.0);
        let (nx, ny, v) = normal_and_velocity(&z, &c).unwrap();
        assert!(nx.sup_norm() == 0.0 && ny.nodal().iter().all(|&q| q == 1.0));
        assert_eq!(v, c);
        let f = PeriodicProfile::from_fn(16, |x| 0.1 * x.sin()).unwrap();
        let (nx, ny, v) = normal_and_velocity(&f, &PeriodicProfile::zeros(16).unwrap()).unwrap();
        let s = 1.01f64.sqrt();
        assert_abs_diff_eq!(nx.nodal()[0], -0.1 / s, epsilon = 1e-14);
        assert_abs_diff_eq!(ny.nodal()[0], 1.0 / s, epsilon = 1e-14);
        assert_eq!(v.sup_norm(), 0.0);
    }

    #[test]
    fn modal_input_forms() {
        let mut map = BTreeMap::new();
        map.insert("2".to_string(), [0.5, 0.0]);
        let p = ProfileInput::Modal(map).to_profile(16).unwrap();
        for j in 0..16 {
            assert_abs_diff_eq!(p.nodal()[j], (2.0 * p.x(j)).cos(), epsilon = 1e-14);
        }
        let json: ProfileInput = serde_json::from_str("[0,1,0,-1]").unwrap();
        assert_eq!(json.to_profile(4).unwrap().nodal(), &[0.0, 1.0, 0.0, -1.0]);
        assert!(json.to_profile(8).is_err());
    }

    #[test]
    fn interpolation_matches_nodes() {
        let f = PeriodicProfile::from_fn(16, |x| 0.2 * x.cos() - 0.1 * (3.0 * x).sin()).unwrap();
        for j in 0..16 {
            assert_abs_diff_eq!(f.eval_at(f.x(j)), f.nodal()[j], epsilon = 1e-14);
        }
        assert_abs_diff_eq!(f.eval_at(0.37), 0.2 * 0.37f64.cos() - 0.1 * 1.11f64.sin(), epsilon = 1e-14);
    }

    fn small_profile() -> impl Strategy<Value = PeriodicProfile> {
        prop::collection::vec(-1.0f64..1.0, 6).prop_map(|c| {
            let raw = PeriodicProfile::from_fn(16, |x| {
                c.iter()
                    .enumerate()
                    .map(|(k, a)| a * ((k / 2 + 1) as f64 * x + (k % 2) as f64).cos())
                    .sum()
            })
            .unwrap();
            let s = raw.sup_norm().max(1e-12);
            &raw * (0.45 / s)
        })
    }

    proptest! {
        #[test]
        fn map_roundtrip(f in small_profile(), x in 0.0f64..std::f64::consts::TAU, y in -1.0f64..1.0) {
            let (_, fy) = transform_point(&f, x, y, MapDirection::Forward).unwrap();
            let (_, back) = transform_point(&f, x, fy, MapDirection::Inverse).unwrap();
            prop_assert!((back - y).abs() <= 1e-12);
        }

        #[test]
        fn curvature_is_odd(f in small_profile()) {
            let a = curvature(&f).unwrap();
            let b = curvature(&(&f * -1.0)).unwrap();
            for (p, q) in a.nodal().iter().zip(b.nodal()) {
                prop_assert!((p + q).abs() <= 1e-12);
            }
        }

        #[test]
        fn derivative_exact_on_modes(k in 1i64..8, phase in 0.0f64..std::f64::consts::TAU) {
            let f = PeriodicProfile::from_fn(16, |x| (k as f64 * x + phase).sin()).unwrap();
            let d = diff_profile(&f, 1).unwrap();
            for j in 0..16 {
                let x = f.x(j);
                prop_assert!((d.nodal()[j] - k as f64 * (k as f64 * x + phase).cos()).abs() < 1e-13);
            }
        }
    }
}
