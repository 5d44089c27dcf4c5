//! The JSON run configuration.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::{BoundaryData, ModelParams, SimOptions, Stepper};
use crate::geometry::{PeriodicProfile, ProfileInput, ADMISSIBLE_RADIUS, MEAN_ZERO_TOL};
use crate::mud::MudScheme;
use crate::rheology::{EffectiveViscosity, ViscosityModel, DEFAULT_GAP_CONSTANT, DEFAULT_QUADRATURE_ORDER};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParamsConfig {
    pub mu_w: f64,
    pub rho_w: f64,
    pub rho_m: f64,
    pub g: f64,
    pub gamma: f64,
    pub gap_constant: f64,
    pub quadrature_order: usize,
    pub inversion_tol: f64,
    pub viscosity: ViscosityModel,
}

impl Default for ParamsConfig {
    fn default() -> Self {
        Self {
            mu_w: 1.0,
            rho_w: 1.0,
            rho_m: 1.2,
            g: 1.0,
            gamma: 0.1,
            gap_constant: DEFAULT_GAP_CONSTANT,
            quadrature_order: DEFAULT_QUADRATURE_ORDER,
            inversion_tol: 1e-12,
            viscosity: ViscosityModel::Newtonian { mu0: 1.0 },
        }
    }
}

impl ParamsConfig {
    pub fn effective_viscosity(&self) -> EffectiveViscosity {
        EffectiveViscosity::with_options(
            self.viscosity,
            self.gap_constant,
            self.quadrature_order,
            self.inversion_tol,
        )
    }

    pub fn model_params(&self) -> ModelParams {
        ModelParams {
            mu_w: self.mu_w,
            rho_w: self.rho_w,
            rho_m: self.rho_m,
            g: self.g,
            gamma: self.gamma,
            ev: self.effective_viscosity(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub nx: usize,
    pub ny_w: usize,
    pub ny_m: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            nx: 16,
            ny_w: 17,
            ny_m: 17,
        }
    }
}

/// Closed-form initial interfaces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialShape {
    Flat,
    Cosine { k: u32, amplitude: f64 },
    Sine { k: u32, amplitude: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InitialData {
    Shape(InitialShape),
    Profile(ProfileInput),
}

impl Default for InitialData {
    fn default() -> Self {
        InitialData::Shape(InitialShape::Flat)
    }
}

impl InitialData {
    pub fn to_profile(&self, n: usize) -> Result<PeriodicProfile> {
        match self {
            InitialData::Shape(InitialShape::Flat) => PeriodicProfile::zeros(n),
            InitialData::Shape(InitialShape::Cosine { k, amplitude }) => {
                check_mode(*k, n)?;
                PeriodicProfile::from_fn(n, |x| amplitude * (*k as f64 * x).cos())
            }
            InitialData::Shape(InitialShape::Sine { k, amplitude }) => {
                check_mode(*k, n)?;
                PeriodicProfile::from_fn(n, |x| amplitude * (*k as f64 * x).sin())
            }
            InitialData::Profile(p) => p.to_profile(n),
        }
    }
}

fn check_mode(k: u32, n: usize) -> Result<()> {
    if k == 0 || k as usize >= n / 2 {
        return Err(Error::Domain(format!("initial wavenumber {k} outside 1..{}", n / 2)));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MudConfig {
    pub scheme: MudScheme,
    pub tol: f64,
}

impl Default for MudConfig {
    fn default() -> Self {
        Self {
            scheme: MudScheme::Picard,
            tol: 1e-11,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub svg: bool,
    /// Number of interface snapshots drawn in the SVG.
    pub svg_snapshots: usize,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("mudflow-out"),
            svg: true,
            svg_snapshots: 6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub params: ParamsConfig,
    pub grid: GridConfig,
    pub initial: InitialData,
    pub boundary: BoundaryData,
    pub run: SimOptions,
    pub mud: MudConfig,
    pub output: OutputConfig,
}

impl RunConfig {
    pub fn from_json_str(text: &str, origin: &Path) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| Error::Parse {
            path: origin.to_path_buf(),
            message: format!("line {}, column {}: {e}", e.line(), e.column()),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Every violation, not just the first.
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        if let Err(Error::Config(list)) = self.params.model_params().validate() {
            v.extend(list);
        }
        if !(self.params.inversion_tol > 0.0) {
            v.push("params.inversion_tol must be positive".into());
        }
        if self.params.quadrature_order < 2 {
            v.push("params.quadrature_order must be at least 2".into());
        }
        let g = self.grid;
        if g.nx < 8 || !g.nx.is_multiple_of(2) {
            v.push(format!("grid.nx must be even and >= 8, got {}", g.nx));
        }
        if g.ny_w < 5 || g.ny_m < 5 {
            v.push(format!("grid.ny_w and grid.ny_m must be >= 5, got {} and {}", g.ny_w, g.ny_m));
        }
        let r = &self.run;
        for (name, val) in [
            ("run.t_end", r.t_end),
            ("run.dt", r.dt),
            ("run.dt_max", r.dt_max),
            ("run.guard_velocity", r.guard_velocity),
            ("run.probe_radius", r.probe_radius),
            ("run.phi.tol", r.phi.tol),
            ("run.phi.gmres_rtol", r.phi.gmres_rtol),
            ("run.phi.fd_eps", r.phi.fd_eps),
            ("mud.tol", self.mud.tol),
        ] {
            if !(val > 0.0 && val.is_finite()) {
                v.push(format!("{name} must be positive, got {val}"));
            }
        }
        if r.dt_max < r.dt {
            v.push(format!("run.dt_max ({}) is below run.dt ({})", r.dt_max, r.dt));
        }
        if !(r.guard_f > 0.0 && r.guard_f <= ADMISSIBLE_RADIUS) {
            v.push(format!("run.guard_f must lie in (0, 0.5], got {}", r.guard_f));
        }
        if r.phi.max_newton == 0 || r.phi.gmres_max == 0 {
            v.push("run.phi.max_newton and run.phi.gmres_max must be positive".into());
        }
        if g.nx >= 8 && g.nx.is_multiple_of(2) {
            match self.initial.to_profile(g.nx) {
                Ok(f0) => {
                    if f0.sup_norm() >= ADMISSIBLE_RADIUS.min(r.guard_f) {
                        v.push(format!(
                            "initial interface has sup|f| = {} (must stay below {})",
                            f0.sup_norm(),
                            ADMISSIBLE_RADIUS.min(r.guard_f)
                        ));
                    }
                    if f0.mean().abs() > MEAN_ZERO_TOL {
                        v.push(format!("initial interface must have mean zero, got {:e}", f0.mean()));
                    }
                }
                Err(e) => v.push(format!("initial: {e}")),
            }
            v.extend(self.boundary.problems(g.nx));
        }
        v
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(v))
        }
    }

    pub fn initial_profile(&self) -> Result<PeriodicProfile> {
        self.initial.to_profile(self.grid.nx)
    }

    pub fn stepper(&self) -> Result<Stepper> {
        self.validate()?;
        let g = self.grid;
        let mut s = Stepper::new(
            self.params.model_params(),
            g.nx,
            g.ny_w,
            g.ny_m,
            self.boundary.clone(),
            self.run.clone(),
        )?;
        s.op.set_mud_scheme(self.mud.scheme);
        s.op.set_mud_tolerance(self.mud.tol);
        Ok(s)
    }
}

pub fn load_config(path: impl AsRef<Path>) -> Result<RunConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    RunConfig::from_json_str(&text, path)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<RunConfig> {
        RunConfig::from_json_str(text, Path::new("test.json"))
    }

    #[test]
    fn minimal_config_fills_defaults() {
        let c = parse("{}").unwrap();
        assert_eq!(c, RunConfig::default());
        let c = parse(r#"{"initial": {"shape": "cosine", "k": 2, "amplitude": 1e-3}, "grid": {"nx": 32}}"#).unwrap();
        assert_eq!(c.grid.ny_w, 17);
        assert!((c.initial_profile().unwrap().sup_norm() - 1e-3).abs() < 1e-15);
    }

    #[test]
    fn profile_inputs() {
        let c = parse(r#"{"initial": {"1": [1e-3, 0.0], "3": [0.0, 2e-4]}}"#).unwrap();
        let f = c.initial_profile().unwrap();
        assert!((f.mode(1).re - 1e-3).abs() < 1e-15);
        assert!((f.mode(3).im - 2e-4).abs() < 1e-15);
        let nodal: Vec<f64> = (0..16).map(|j| if j % 2 == 0 { 0.01 } else { -0.01 }).collect();
        let text = format!(r#"{{"initial": {}}}"#, serde_json::to_string(&nodal).unwrap());
        assert_eq!(parse(&text).unwrap().initial_profile().unwrap().nodal(), &nodal[..]);
    }

    #[test]
    fn viscosity_and_boundary_forms() {
        let c = parse(
            r#"{"params": {"viscosity": {"model": "hectorite", "mu_inf": 1, "tau0": 1, "beta": 1}},
                "boundary": {"kind": "sinusoids", "mean": 1, "terms": [{"k": 1, "a": 0.1, "omega": 2}]},
                "mud": {"scheme": "newton"}, "run": {"scheme": "rk4"}}"#,
        )
        .unwrap();
        assert!(matches!(c.params.viscosity, ViscosityModel::Hectorite { .. }));
        assert_eq!(c.mud.scheme, MudScheme::Newton);
    }

    #[test]
    fn unknown_keys_are_rejected_with_location() {
        match parse("{\n  \"grid\": {\"nx\": 16, \"nz\": 3}\n}") {
            Err(Error::Parse { message, .. }) => {
                assert!(message.contains("nz") && message.contains("line 2"), "{message}");
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse("{\"gama\": 1}"), Err(Error::Parse { .. })));
    }

    #[test]
    fn validation_collects_all_violations() {
        let c = parse(r#"{"params": {"gamma": -1}}"#);
        assert!(matches!(c, Err(Error::Config(ref v)) if v.len() == 1));
        let c = parse(r#"{"initial": {"shape": "cosine", "k": 1, "amplitude": 0.6}}"#);
        assert!(matches!(c, Err(Error::Config(_))));
        let c = parse(
            r#"{"params": {"gamma": -1, "mu_w": 0}, "grid": {"nx": 7},
                "run": {"dt": -1}, "initial": {"0": [0.1, 0]}}"#,
        );
        match c {
            Err(Error::Config(v)) => assert!(v.len() >= 4, "{v:?}"),
            other => panic!("{other:?}"),
        }
        let c = parse(r#"{"initial": {"0": [0.1, 0]}}"#);
        assert!(matches!(c, Err(Error::Config(ref v)) if v[0].contains("mean zero")));
    }
}
