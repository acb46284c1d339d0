use serde::{Deserialize, Serialize};

use crate::error::{BmlError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub position: [f64; 2],
    pub weight: f64,
}

/// Finite sum of nonnegative Dirac masses. Zero-weight atoms are kept so
/// indices stay stable; the empty measure is valid.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AtomicMeasure {
    atoms: Vec<Atom>,
}

impl AtomicMeasure {
    pub fn new(atoms: Vec<Atom>) -> Result<Self> {
        for (i, a) in atoms.iter().enumerate() {
            if !(a.position[0].is_finite() && a.position[1].is_finite()) {
                return Err(BmlError::NonFinite(format!("position of atom {i}")));
            }
            if !(a.weight.is_finite() && a.weight >= 0.0) {
                return Err(BmlError::InvalidInput(format!(
                    "atom {i} has weight {}; weights must be finite and nonnegative",
                    a.weight
                )));
            }
        }
        Ok(AtomicMeasure { atoms })
    }

    pub fn empty() -> Self {
        AtomicMeasure::default()
    }

    pub fn dirac(position: [f64; 2], weight: f64) -> Result<Self> {
        Self::new(vec![Atom { position, weight }])
    }

    pub fn from_pairs(pairs: &[([f64; 2], f64)]) -> Result<Self> {
        Self::new(pairs.iter().map(|&(position, weight)| Atom { position, weight }).collect())
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn positions(&self) -> Vec<[f64; 2]> {
        self.atoms.iter().map(|a| a.position).collect()
    }

    pub fn weights(&self) -> Vec<f64> {
        self.atoms.iter().map(|a| a.weight).collect()
    }

    /// Same weights at new positions.
    pub fn with_positions(&self, positions: &[[f64; 2]]) -> Result<Self> {
        if positions.len() != self.atoms.len() {
            return Err(BmlError::InvalidInput(format!(
                "expected {} positions, got {}",
                self.atoms.len(),
                positions.len()
            )));
        }
        Self::new(
            self.atoms
                .iter()
                .zip(positions)
                .map(|(a, &position)| Atom {
                    position,
                    weight: a.weight,
                })
                .collect(),
        )
    }

    pub fn total_variation(&self) -> f64 {
        self.atoms.iter().map(|a| a.weight).sum()
    }

    /// `max |x|` over atoms (zero-weight atoms included), 0 when empty.
    pub fn support_radius(&self) -> f64 {
        self.atoms
            .iter()
            .map(|a| a.position[0].hypot(a.position[1]))
            .fold(0.0, f64::max)
    }
}

pub fn total_variation(mu: &AtomicMeasure) -> f64 {
    mu.total_variation()
}

pub fn support_radius(mu: &AtomicMeasure) -> f64 {
    mu.support_radius()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_quantities() {
        let mu = AtomicMeasure::dirac([0.0, 0.0], 1.0).unwrap();
        assert_eq!((mu.total_variation(), mu.support_radius()), (1.0, 0.0));
        let nu = AtomicMeasure::from_pairs(&[([1.0, 0.0], 0.5), ([0.0, 2.0], 0.25)]).unwrap();
        assert_eq!((nu.total_variation(), nu.support_radius()), (0.75, 2.0));
        let e = AtomicMeasure::empty();
        assert_eq!((e.total_variation(), e.support_radius()), (0.0, 0.0));
    }

    #[test]
    fn rejects_negative_weight() {
        assert!(AtomicMeasure::dirac([0.0, 0.0], -1e-300).is_err());
        assert!(AtomicMeasure::dirac([f64::NAN, 0.0], 1.0).is_err());
        assert!(AtomicMeasure::dirac([0.0, 0.0], 0.0).is_ok());
    }
}
