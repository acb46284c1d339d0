use std::f64::consts::PI;

use bml::corpus::{random_divergence_free, random_measure, rng};
use bml::measures::{
    bl_distance, eulerian_advect_density, mollify, read_measure, transport_atoms, transport_atoms_traced,
    write_measure, AtomicMeasure, Atom, MOLLIFIER_MASS,
};
use bml::spectral::{Grid, RealField};
use bml::velocity::{RigidRotation, SpectralVelocity};
use bml::BmlError;
use proptest::prelude::*;
use rand::Rng;

/// `W1` on the line via cumulative distribution functions; equals the
/// bounded-Lipschitz distance for equal masses supported on a segment
/// shorter than 2.
fn w1_on_line(a: &[(f64, f64)], b: &[(f64, f64)]) -> f64 {
    let mut events: Vec<(f64, f64)> = a.iter().copied().chain(b.iter().map(|&(x, w)| (x, -w))).collect();
    events.sort_by(|p, q| p.0.total_cmp(&q.0));
    let mut cdf = 0.0;
    let mut total = 0.0;
    for w in events.windows(2) {
        cdf += w[0].1;
        total += cdf.abs() * (w[1].0 - w[0].0);
    }
    total
}

fn line_measure(pairs: &[(f64, f64)]) -> AtomicMeasure {
    AtomicMeasure::new(
        pairs
            .iter()
            .map(|&(x, w)| Atom {
                position: [x, 0.0],
                weight: w,
            })
            .collect(),
    )
    .unwrap()
}

#[test]
fn mollifier_mass_by_quadrature() {
    // 2 pi int_0^1 exp(-1 / (1 - r^2)) r dr, composite Simpson
    let m = 200_000;
    let f = |r: f64| if r < 1.0 { (-1.0 / (1.0 - r * r)).exp() * r } else { 0.0 };
    let h = 1.0 / m as f64;
    let mut s = f(0.0) + f(1.0);
    for i in 1..m {
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(i as f64 * h);
    }
    let mass = 2.0 * PI * s * h / 3.0;
    assert!((mass - MOLLIFIER_MASS).abs() < 1e-12);
}

#[test]
fn mollified_density_keeps_mass_and_support() {
    let g = Grid::new(128, 2.0).unwrap();
    let mu = AtomicMeasure::from_pairs(&[([0.1, -0.3], 1.5), ([-1.0, 0.7], 0.25), ([1.97, 0.0], 1.0)]).unwrap();
    let n = 8;
    let rho = mollify(&mu, n, &g).unwrap().field;
    assert!((rho.integral() - mu.total_variation()).abs() < 1e-13);
    assert!(rho.min() >= 0.0);
    for i1 in 0..g.n() {
        for i2 in 0..g.n() {
            if rho.at(i1, i2) > 0.0 {
                let p = [g.node(i1), g.node(i2)];
                let near = mu.atoms().iter().any(|a| {
                    let d1 = g.wrap(p[0] - a.position[0]);
                    let d2 = g.wrap(p[1] - a.position[1]);
                    d1.hypot(d2) < 1.0 / n as f64
                });
                assert!(near, "density outside the mollifier support at {p:?}");
            }
        }
    }
    let err = mollify(&mu, 200, &g).unwrap_err();
    assert!(matches!(err, BmlError::UnderResolvedMollifier { .. }));
}

#[test]
fn bl_matches_w1_on_short_segments() {
    let mut gen = rng(20);
    for _ in 0..50 {
        let k = gen.gen_range(1..6);
        let a: Vec<(f64, f64)> = (0..k).map(|_| (gen.gen_range(-0.9..0.9), gen.gen_range(0.1..1.0))).collect();
        let total: f64 = a.iter().map(|x| x.1).sum();
        let m = gen.gen_range(1..6);
        let raw: Vec<(f64, f64)> = (0..m).map(|_| (gen.gen_range(-0.9..0.9), gen.gen_range(0.1..1.0))).collect();
        let raw_total: f64 = raw.iter().map(|x| x.1).sum();
        let b: Vec<(f64, f64)> = raw.iter().map(|&(x, w)| (x, w * total / raw_total)).collect();
        let d = bl_distance(&line_measure(&a), &line_measure(&b)).unwrap();
        assert!((d - w1_on_line(&a, &b)).abs() < 1e-9, "{d} vs {}", w1_on_line(&a, &b));
    }
}

#[test]
fn bl_of_diracs() {
    let mut gen = rng(21);
    for _ in 0..100 {
        let x = [gen.gen_range(-3.0..3.0), gen.gen_range(-3.0..3.0)];
        let y = [gen.gen_range(-3.0..3.0), gen.gen_range(-3.0..3.0)];
        let d = bl_distance(&AtomicMeasure::dirac(x, 1.0).unwrap(), &AtomicMeasure::dirac(y, 1.0).unwrap()).unwrap();
        let exact = (x[0] - y[0]).hypot(x[1] - y[1]).min(2.0);
        assert!((d - exact).abs() < 1e-9);
    }
    // pure mass difference is the total variation of the difference
    let a = AtomicMeasure::dirac([0.0, 0.0], 3.0).unwrap();
    assert!((bl_distance(&a, &AtomicMeasure::empty()).unwrap() - 3.0).abs() < 1e-12);
}

#[test]
fn rotation_transport_matches_exact_orbit() {
    let mu = AtomicMeasure::from_pairs(&[([1.0, 0.0], 1.0), ([0.0, -0.5], 2.0), ([0.3, 0.4], 0.5)]).unwrap();
    let t = 2.0;
    let (out, trace) = transport_atoms_traced(&mu, &RigidRotation { rate: 1.0 }, 0.0, t, 0.01).unwrap();
    for (a, b) in out.atoms().iter().zip(mu.atoms()) {
        let (c, s) = (t.cos(), t.sin());
        let exact = [c * b.position[0] - s * b.position[1], s * b.position[0] + c * b.position[1]];
        assert!((a.position[0] - exact[0]).abs() < 1e-9 && (a.position[1] - exact[1]).abs() < 1e-9);
        assert_eq!(a.weight.to_bits(), b.weight.to_bits());
    }
    let tv = mu.total_variation().to_bits();
    for s in &trace {
        assert_eq!(s.total_variation.to_bits(), tv);
        assert!(s.support_radius <= s.support_bound + 1e-8);
    }
}

#[test]
fn atoms_leaving_the_box_are_rejected() {
    let g = Grid::new(32, 2.0).unwrap();
    let v1 = RealField::constant(g, 1.0, "v1");
    let v2 = RealField::zeros(g, "v2");
    let v = SpectralVelocity::from_fields(&v1, &v2).unwrap();
    let mu = AtomicMeasure::dirac([1.5, 0.0], 1.0).unwrap();
    let err = transport_atoms(&mu, &v, 0.0, 1.0, 0.05).unwrap_err();
    assert!(matches!(err, BmlError::OutsideBox { .. }));
}

#[test]
fn eulerian_density_follows_the_rotation() {
    let l = 4.0;
    let g = Grid::new(64, l).unwrap();
    let w = 0.6;
    let center = [0.8, 0.0];
    let bump = |x: f64, y: f64| (-((x - center[0]).powi(2) + (y - center[1]).powi(2)) / (2.0 * w * w)).exp();
    let rho0 = RealField::from_fn(g, "rho", bump);
    let t = 1.0;
    let rho = eulerian_advect_density(&rho0, &RigidRotation { rate: 1.0 }, t, 0.005).unwrap();
    let (c, s) = (t.cos(), t.sin());
    let exact = RealField::from_fn(g, "e", |x, y| bump(c * x + s * y, -s * x + c * y));
    assert!(rho.sub(&exact).unwrap().max_abs() < 1e-5);
    assert!((rho.integral() - rho0.integral()).abs() < 1e-10 * rho0.integral());
}

#[test]
fn measure_file_rejects_bad_header() {
    let err = read_measure("x,y,weight\n1,2,3\n".as_bytes()).unwrap_err();
    assert!(matches!(err, BmlError::Format { .. }));
    assert!(read_measure("# atomic-measure v1\n1,2,-1\n".as_bytes()).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn bl_is_a_metric(seed in any::<u64>()) {
        let mut gen = rng(seed);
        let draw = |gen: &mut rand_chacha::ChaCha8Rng| {
            let k = gen.gen_range(1..5);
            random_measure(k, 1.5, gen)
        };
        let (a, b, c) = (draw(&mut gen), draw(&mut gen), draw(&mut gen));
        let ab = bl_distance(&a, &b).unwrap();
        prop_assert_eq!(ab.to_bits(), bl_distance(&b, &a).unwrap().to_bits());
        prop_assert_eq!(bl_distance(&a, &a).unwrap(), 0.0);
        prop_assert!(ab >= 0.0);
        let (ac, bc) = (bl_distance(&a, &c).unwrap(), bl_distance(&b, &c).unwrap());
        prop_assert!(ac <= ab + bc + 1e-9);
        // bounded by the total variation of the difference
        prop_assert!(ab <= a.total_variation() + b.total_variation() + 1e-12);
    }

    #[test]
    fn transport_keeps_weights_bitwise(seed in any::<u64>()) {
        let mut gen = rng(seed);
        let g = Grid::new(32, 4.0).unwrap();
        let (v1, v2) = random_divergence_free(g, 4, &mut gen);
        let v = SpectralVelocity::from_fields(&v1, &v2.scale(0.5)).unwrap();
        let mu = random_measure(5, 1.0, &mut gen);
        let (out, trace) = transport_atoms_traced(&mu, &v, 0.0, 0.5, 0.05).unwrap();
        prop_assert_eq!(out.weights(), mu.weights());
        for s in trace {
            prop_assert_eq!(s.total_variation.to_bits(), mu.total_variation().to_bits());
            prop_assert!(s.support_radius <= s.support_bound + 1e-8);
        }
    }

    #[test]
    fn measure_file_round_trip_is_bitwise(seed in any::<u64>(), count in 0usize..8) {
        let mu = random_measure(count, 5.0, &mut rng(seed));
        let mut buf = Vec::new();
        write_measure(&mut buf, &mu).unwrap();
        let back = read_measure(buf.as_slice()).unwrap();
        prop_assert_eq!(back, mu);
    }
}
