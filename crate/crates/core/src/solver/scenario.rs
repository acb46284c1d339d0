//! Named initial-data presets.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::state::InitialData;
use crate::error::{BmlError, Result};
use crate::measures::AtomicMeasure;
use crate::spectral::{Grid, RealField};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    /// Unit atom at the origin, fluid and temperature at rest.
    SingleAtom,
    /// Unit atoms at `(+-1, 0)` over a Gaussian temperature; the data is
    /// even in `x1` and buoyancy acts along `x2`, so the solution keeps
    /// `theta` even and `omega` odd in `x1`.
    TwoAtom,
    /// Gaussian vortex (mean removed) carrying a light atom at `(0.5, 0)`.
    RotationTest,
}

impl Scenario {
    pub const ALL: [Scenario; 3] = [Scenario::SingleAtom, Scenario::TwoAtom, Scenario::RotationTest];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::SingleAtom => "single_atom",
            Scenario::TwoAtom => "two_atom",
            Scenario::RotationTest => "rotation_test",
        }
    }

    pub fn atoms(self) -> AtomicMeasure {
        let pairs: &[([f64; 2], f64)] = match self {
            Scenario::SingleAtom => &[([0.0, 0.0], 1.0)],
            Scenario::TwoAtom => &[([-1.0, 0.0], 1.0), ([1.0, 0.0], 1.0)],
            Scenario::RotationTest => &[([0.5, 0.0], 0.1)],
        };
        AtomicMeasure::from_pairs(pairs).expect("preset atoms are valid")
    }

    pub fn initial_data(self, grid: Grid) -> Result<InitialData> {
        let (theta, omega) = match self {
            Scenario::SingleAtom => (RealField::zeros(grid, "theta"), RealField::zeros(grid, "omega")),
            Scenario::TwoAtom => (
                RealField::from_fn(grid, "theta", |x, y| 0.5 * (-(x * x + y * y)).exp()),
                RealField::zeros(grid, "omega"),
            ),
            Scenario::RotationTest => {
                let vortex = RealField::from_fn(grid, "omega", |x, y| (-(x * x + y * y) / 2.0).exp());
                let mean = vortex.mean();
                (RealField::zeros(grid, "theta"), vortex.map(|w| w - mean))
            }
        };
        let data = InitialData {
            theta,
            omega,
            atoms: self.atoms(),
        };
        data.validate()?;
        Ok(data)
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = BmlError;

    fn from_str(s: &str) -> Result<Self> {
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.name() == s)
            .ok_or_else(|| BmlError::param("scenario", format!("unknown preset `{s}`")))
    }
}

/// Settings of the reference run: `256^2` grid on `[-8, 8)^2`, unit atom,
/// `n = 4`, `sigma = 0.5`, `T = 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StandardSetup {
    pub n: usize,
    pub half_length: f64,
    pub n_mollify: u32,
    pub sigma: f64,
    pub t_final: f64,
    pub dt: f64,
}

pub const STANDARD: StandardSetup = StandardSetup {
    n: 256,
    half_length: 8.0,
    n_mollify: 4,
    sigma: 0.5,
    t_final: 1.0,
    dt: 1e-2,
};
