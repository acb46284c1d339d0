//! Bounded-Lipschitz distance between atomic measures.
//!
//! `d(mu, nu) = sup { int f d(mu - nu) : |f| <= 1, Lip(f) <= 1 }`. Only the
//! values of `f` on the atom locations enter the objective, and any
//! assignment with `|f_i| <= 1`, `|f_i - f_j| <= |x_i - x_j|` extends to the
//! whole plane (McShane extension `min_j (f_j + |x - x_j|)`, clipped to
//! `[-1, 1]`, keeps both constraints). The supremum is therefore the optimum
//! of a finite linear program over the merged atom set. Pairs at distance
//! `>= 2` need no constraint since the bounds already imply it.
//!
//! The merged locations are sorted and the net weights given a canonical
//! sign, so `d(mu, nu)` and `d(nu, mu)` solve the identical program.

use minilp::{ComparisonOp, OptimizationDirection, Problem};

use super::atomic::AtomicMeasure;
use crate::error::{BmlError, Result};
use crate::spectral::RealField;

fn merge(mu: &AtomicMeasure, nu: &AtomicMeasure) -> (Vec<[f64; 2]>, Vec<f64>) {
    let mut entries: Vec<([f64; 2], f64, f64)> = mu
        .atoms()
        .iter()
        .map(|a| (a.position, a.weight, 0.0))
        .chain(nu.atoms().iter().map(|a| (a.position, 0.0, a.weight)))
        .collect();
    entries.sort_by(|a, b| {
        a.0[0]
            .total_cmp(&b.0[0])
            .then(a.0[1].total_cmp(&b.0[1]))
            .then(b.1.total_cmp(&a.1).then(b.2.total_cmp(&a.2)))
    });
    let mut points: Vec<[f64; 2]> = Vec::new();
    let mut plus: Vec<f64> = Vec::new();
    let mut minus: Vec<f64> = Vec::new();
    for (p, a, b) in entries {
        if points.last() == Some(&p) {
            *plus.last_mut().unwrap() += a;
            *minus.last_mut().unwrap() += b;
        } else {
            points.push(p);
            plus.push(a);
            minus.push(b);
        }
    }
    let net = plus.iter().zip(&minus).map(|(a, b)| a - b).collect();
    (points, net)
}

/// Optimum of the dual program for arbitrary signed weights on distinct points.
pub fn bl_dual(points: &[[f64; 2]], net: &[f64]) -> Result<f64> {
    if points.len() != net.len() {
        return Err(BmlError::InvalidInput("points and weights differ in length".into()));
    }
    let mut weights = net.to_vec();
    let Some(first) = weights.iter().position(|&w| w != 0.0) else {
        return Ok(0.0);
    };
    // f -> -f maps the program for -w onto the one for w
    if weights[first] < 0.0 {
        for w in &mut weights {
            *w = -*w;
        }
    }
    let mut problem = Problem::new(OptimizationDirection::Maximize);
    let vars: Vec<_> = weights.iter().map(|&w| problem.add_var(w, (-1.0, 1.0))).collect();
    for i in 0..points.len() {
        for j in (i + 1)..points.len() {
            let d = (points[i][0] - points[j][0]).hypot(points[i][1] - points[j][1]);
            if d < 2.0 {
                problem.add_constraint(&[(vars[i], 1.0), (vars[j], -1.0)], ComparisonOp::Le, d);
                problem.add_constraint(&[(vars[j], 1.0), (vars[i], -1.0)], ComparisonOp::Le, d);
            }
        }
    }
    let solution = problem
        .solve()
        .map_err(|e| BmlError::LinearProgram(format!("bounded-Lipschitz program: {e}")))?;
    Ok(solution.objective().max(0.0))
}

pub fn bl_distance(mu: &AtomicMeasure, nu: &AtomicMeasure) -> Result<f64> {
    let (points, net) = merge(mu, nu);
    bl_dual(&points, &net)
}

/// Distance between two grid densities, each read as atoms of mass
/// `value * cell_area` at the nodes. Nodes where both densities are below
/// `threshold` are dropped.
pub fn bl_distance_densities(a: &RealField, b: &RealField, threshold: f64) -> Result<f64> {
    a.grid().ensure_same(b.grid())?;
    let g = a.grid();
    let n = g.n();
    let cell = g.cell_area();
    let mut points = Vec::new();
    let mut net = Vec::new();
    for i1 in 0..n {
        for i2 in 0..n {
            let (x, y) = (a.at(i1, i2), b.at(i1, i2));
            if x.abs() > threshold || y.abs() > threshold {
                points.push([g.node(i1), g.node(i2)]);
                net.push((x - y) * cell);
            }
        }
    }
    bl_dual(&points, &net)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_measures_are_at_distance_zero() {
        let mu = AtomicMeasure::from_pairs(&[([0.0, 0.0], 1.0), ([0.3, 0.1], 0.5)]).unwrap();
        assert_eq!(bl_distance(&mu, &mu).unwrap(), 0.0);
        assert_eq!(bl_distance(&AtomicMeasure::empty(), &AtomicMeasure::empty()).unwrap(), 0.0);
    }

    #[test]
    fn two_diracs() {
        let a = AtomicMeasure::dirac([0.0, 0.0], 1.0).unwrap();
        for (x, expected) in [(0.5, 0.5), (1.9, 1.9), (3.0, 2.0)] {
            let b = AtomicMeasure::dirac([x, 0.0], 1.0).unwrap();
            assert!((bl_distance(&a, &b).unwrap() - expected).abs() < 1e-9);
        }
    }

    #[test]
    fn mass_difference_at_a_point() {
        let a = AtomicMeasure::dirac([1.0, 1.0], 0.75).unwrap();
        let b = AtomicMeasure::dirac([1.0, 1.0], 0.25).unwrap();
        assert!((bl_distance(&a, &b).unwrap() - 0.5).abs() < 1e-12);
        assert_eq!(bl_distance(&a, &b).unwrap().to_bits(), bl_distance(&b, &a).unwrap().to_bits());
    }
}
