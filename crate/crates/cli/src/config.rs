//! TOML run configuration.
//!
//! ```toml
//! a = 0.0
//!
//! [map]
//! kind = "conjugated"
//!
//! [map.base]
//! kind = "twist"
//! g = [0.0, 0.0, 0.3]        # g(r) = 0.3 r^2
//!
//! [map.psi]
//! kind = "hamiltonian"
//! terms = [{ coef = 0.3, k = 1, m = 1, trig = "cos" }]
//!
//! [numerics]
//! grid_r = 64
//! ```

use std::path::Path;

use calabi_core::action::ActionOptions;
use calabi_core::orbits::{SearchOptions, VerifyOptions};
use calabi_core::{DiscMap, GeneratingFunction, Hamiltonian, RadialPolynomial, Scheme, TrigTerm};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub map: MapConfig,
    /// Normalisation level of the action.
    #[serde(default)]
    pub a: f64,
    #[serde(default)]
    pub numerics: Numerics,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BumpConfig {
    pub center: [f64; 2],
    pub radius: f64,
    pub amplitude: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MapConfig {
    Rigid {
        theta0: f64,
    },
    /// `g` lists the coefficients of `g(r)` in powers of `r`.
    Twist {
        g: Vec<f64>,
    },
    /// `H` is the sum of the trigonometric terms and the bumps.
    Hamiltonian {
        #[serde(default)]
        terms: Vec<TrigTerm>,
        #[serde(default)]
        bumps: Vec<BumpConfig>,
        #[serde(default = "default_steps")]
        steps: usize,
        #[serde(default = "default_scheme")]
        scheme: Scheme,
    },
    /// Map of the annulus `r_lo <= r <= r_hi` generated by a polynomial `W`.
    Generating {
        terms: Vec<TrigTerm>,
        r_lo: f64,
        r_hi: f64,
    },
    /// `psi^-1 base psi`.
    Conjugated {
        base: Box<MapConfig>,
        psi: Box<MapConfig>,
    },
}

fn default_steps() -> usize {
    calabi_core::disc_map::DEFAULT_STEPS
}

fn default_scheme() -> Scheme {
    Scheme::TripleJump
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Numerics {
    pub grid_r: usize,
    pub grid_theta: usize,
    pub calabi_tol: f64,
    pub path_tol: f64,
    /// Boundary orbit length / trapezoid nodes for the boundary mean.
    pub boundary_samples: usize,
    pub d_max: usize,
    pub seed_grid: [usize; 2],
    pub orbit_tol: f64,
    pub dedup_eps: f64,
    pub max_iter: usize,
    pub identity_tol: f64,
    pub rotation_samples: usize,
    pub rotation_tol: f64,
    pub eps: f64,
    pub stage_n: usize,
    pub cert_k: Option<u64>,
    /// Radii and angles of the sampled CSV grids.
    pub csv_radii: usize,
    pub csv_theta: usize,
}

impl Default for Numerics {
    fn default() -> Self {
        let search = SearchOptions::default();
        let verify = VerifyOptions::default();
        Self {
            grid_r: calabi_core::calabi::DEFAULT_GRID,
            grid_theta: calabi_core::calabi::DEFAULT_GRID,
            calabi_tol: 1e-6,
            path_tol: verify.action.path_tol,
            boundary_samples: verify.action.boundary_samples,
            d_max: search.d_max,
            seed_grid: [search.seed_grid.0, search.seed_grid.1],
            orbit_tol: search.orbit_tol,
            dedup_eps: search.dedup_eps,
            max_iter: search.max_iter,
            identity_tol: verify.identity_tol,
            rotation_samples: verify.rotation_samples,
            rotation_tol: verify.rotation_tol,
            eps: calabi_core::extension::DEFAULT_EPS,
            stage_n: 4,
            cert_k: None,
            csv_radii: 33,
            csv_theta: 64,
        }
    }
}

impl Numerics {
    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |field: &str, why: &str| Err(CliError::Config(format!("numerics.{field}: {why}")));
        for (name, v) in [("grid_r", self.grid_r), ("grid_theta", self.grid_theta)] {
            if v < 8 {
                return bad(name, "grids must be at least 8");
            }
        }
        for (name, v) in [
            ("calabi_tol", self.calabi_tol),
            ("path_tol", self.path_tol),
            ("orbit_tol", self.orbit_tol),
            ("dedup_eps", self.dedup_eps),
            ("identity_tol", self.identity_tol),
            ("rotation_tol", self.rotation_tol),
        ] {
            if !(v > 0.0) {
                return bad(name, "tolerances must be positive");
            }
        }
        if self.d_max == 0 {
            return bad("d_max", "must be at least 1");
        }
        if self.seed_grid.contains(&0) {
            return bad("seed_grid", "both counts must be positive");
        }
        if self.boundary_samples < 100 {
            return bad("boundary_samples", "must be at least 100");
        }
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return bad("eps", "must lie in (0, 1)");
        }
        if self.stage_n == 0 {
            return bad("stage_n", "must be at least 1");
        }
        if self.cert_k == Some(0) {
            return bad("cert_k", "must be at least 1");
        }
        if self.csv_radii < 2 || self.csv_theta == 0 {
            return bad("csv_radii", "CSV grids need at least 2 radii and 1 angle");
        }
        Ok(())
    }

    pub fn action(&self) -> ActionOptions {
        ActionOptions {
            path_tol: self.path_tol,
            boundary_samples: self.boundary_samples,
        }
    }

    pub fn search(&self) -> SearchOptions {
        SearchOptions {
            d_max: self.d_max,
            seed_grid: (self.seed_grid[0], self.seed_grid[1]),
            orbit_tol: self.orbit_tol,
            dedup_eps: self.dedup_eps,
            max_iter: self.max_iter,
        }
    }

    pub fn verify(&self) -> VerifyOptions {
        VerifyOptions {
            search: self.search(),
            grid: (self.grid_r, self.grid_theta),
            action: self.action(),
            identity_tol: self.identity_tol,
            rotation_samples: self.rotation_samples,
            rotation_tol: self.rotation_tol,
        }
    }
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }
}

impl MapConfig {
    pub fn build(&self) -> calabi_core::Result<DiscMap> {
        match self {
            MapConfig::Rigid { theta0 } => Ok(DiscMap::rigid(*theta0)),
            MapConfig::Twist { g } => Ok(DiscMap::twist(RadialPolynomial::new(g.clone()))),
            MapConfig::Hamiltonian {
                terms,
                bumps,
                steps,
                scheme,
            } => {
                let mut parts = Vec::new();
                if !terms.is_empty() {
                    parts.push(Hamiltonian::TrigPoly { terms: terms.clone() });
                }
                parts.extend(bumps.iter().map(|b| Hamiltonian::Bump {
                    center: b.center,
                    radius: b.radius,
                    amplitude: b.amplitude,
                }));
                let h = match parts.len() {
                    0 => Hamiltonian::zero(),
                    1 => parts.pop().expect("one part"),
                    _ => Hamiltonian::Sum { parts },
                };
                DiscMap::hamiltonian_with(h, *steps, *scheme, 1.0)
            }
            MapConfig::Generating { terms, r_lo, r_hi } => Ok(calabi_core::generating::map_from_generating(
                &GeneratingFunction::polynomial(terms.clone(), *r_lo, *r_hi)?,
            )),
            MapConfig::Conjugated { base, psi } => base.build()?.conjugate(&psi.build()?),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nested_conjugation_parses() {
        let c = Config::parse(
            r#"
            [map]
            kind = "conjugated"
            [map.base]
            kind = "rigid"
            theta0 = 0.25
            [map.psi]
            kind = "hamiltonian"
            terms = [{ coef = 0.1, k = 1, m = 1, trig = "sin" }]
            steps = 20
            "#,
        )
        .unwrap();
        assert!(matches!(c.map, MapConfig::Conjugated { .. }));
        assert_eq!(c.numerics, Numerics::default());
    }

    #[test]
    fn missing_kind_names_the_field() {
        let err = Config::parse("[map]\ntheta0 = 0.25\n").unwrap_err().to_string();
        assert!(err.contains("kind"), "{err}");
    }

    #[test]
    fn unknown_numeric_field_is_rejected() {
        let err = Config::parse("[map]\nkind = \"rigid\"\ntheta0 = 0.1\n[numerics]\ngrid = 3\n")
            .unwrap_err()
            .to_string();
        assert!(err.contains("grid"), "{err}");
    }

    #[test]
    fn validation_catches_small_grids() {
        let n = Numerics {
            grid_r: 4,
            ..Default::default()
        };
        assert!(n.validate().is_err());
        assert!(Numerics::default().validate().is_ok());
    }
}
