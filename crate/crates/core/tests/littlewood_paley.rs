use std::f64::consts::PI;

use bml::corpus::{gaussian_family, random_field, random_pairs, rng};
use bml::littlewood_paley::partition::shell_profile;
use bml::littlewood_paley::{
    besov_norm, bony_terms, bony_terms_all, decompose_default, direct_block, heat_smoothing_check, heat_step,
    interpolation_index, log_interp_check, product_estimate, verify_product_estimate, BesovParams, BonyFault,
    CorpusPair, DyadicPartition, ForcingTimeline, ProductVariant,
};
use bml::spectral::{Grid, RealField};
use proptest::prelude::*;

// Independent transcription of the cutoff: exp(-1/x) blend between 3/4 and 4/3.
fn step_oracle(x: f64) -> f64 {
    let e = |x: f64| if x > 0.0 { (-1.0 / x).exp() } else { 0.0 };
    if x <= 0.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        e(x) / (e(x) + e(1.0 - x))
    }
}

fn chi_oracle(r: f64) -> f64 {
    1.0 - step_oracle((r - 0.75) / (4.0 / 3.0 - 0.75))
}

fn profile_oracle(j: i32, r: f64) -> f64 {
    if j < 0 {
        chi_oracle(r)
    } else {
        let x = r / 2f64.powi(j);
        chi_oracle(x / 2.0) - chi_oracle(x)
    }
}

fn rel_err(a: &RealField, b: &RealField) -> f64 {
    let d = a.sub(b).unwrap().to_spectral().unwrap().l2_norm();
    d / b.to_spectral().unwrap().l2_norm()
}

#[test]
fn profiles_match_the_cutoff_construction() {
    let mut gen = rng(10);
    for _ in 0..2000 {
        let r: f64 = rand::Rng::gen_range(&mut gen, 0.0..600.0);
        let mut total = 0.0;
        for j in -1..12 {
            let p = shell_profile(j, r);
            assert!((p - profile_oracle(j, r)).abs() < 1e-15);
            assert!((0.0..=1.0).contains(&p));
            total += p;
        }
        assert!((total - 1.0).abs() < 1e-14, "r = {r}");
    }
}

#[test]
fn partition_covers_every_lattice_mode() {
    for n in [16, 64, 256] {
        for l in [1.0, PI, 8.0] {
            let g = Grid::new(n, l).unwrap();
            assert!(DyadicPartition::for_grid(&g).unwrap().partition_defect() < 1e-12);
        }
    }
}

#[test]
fn reconstruction_over_random_fields() {
    let mut gen = rng(11);
    for n in [64, 128] {
        let g = Grid::new(n, 8.0).unwrap();
        for _ in 0..10 {
            let f = random_field(g, n as i64 / 2, 0.3, &mut gen);
            assert!(rel_err(&decompose_default(&f).unwrap().reconstruct(), &f) < 1e-10);
        }
    }
}

#[test]
fn single_mode_lands_in_its_shells() {
    let l = PI;
    let g = Grid::new(64, l).unwrap();
    for m in [1usize, 3, 5, 11, 20] {
        let f = RealField::from_fn(g, "f", |x, _| (m as f64 * x).cos());
        let d = decompose_default(&f).unwrap();
        for (j, shell) in d.shells() {
            let expected = f.scale(profile_oracle(*j, m as f64));
            let err = shell.sub(&expected).unwrap().max_abs();
            assert!(err < 1e-12, "m = {m}, j = {j}");
        }
    }
}

#[test]
fn besov_norm_of_a_mode_inside_one_shell() {
    // |k| = 11 on the box [-pi, pi): 11 / 8 lies where shell 3 equals one
    let g = Grid::new(64, PI).unwrap();
    assert_eq!(profile_oracle(3, 11.0), 1.0);
    let f = RealField::from_fn(g, "f", |x, _| (11.0 * x).cos());
    let l2 = (2.0 * PI) / 2f64.sqrt();
    for s in [-0.5, 0.5, 1.5] {
        let got = besov_norm(&f, BesovParams::new(s, 2.0, f64::INFINITY).unwrap()).unwrap();
        assert!((got - 2f64.powf(3.0 * s) * l2).abs() < 1e-11 * got);
        let sup = besov_norm(&f, BesovParams::new(s, f64::INFINITY, f64::INFINITY).unwrap()).unwrap();
        assert!((sup - 2f64.powf(3.0 * s)).abs() < 1e-11 * sup);
    }
    // a finite summability index sees the same single shell
    let one = besov_norm(&f, BesovParams::new(0.5, 2.0, 1.0).unwrap()).unwrap();
    assert!((one - 2f64.powf(1.5) * l2).abs() < 1e-11 * one);
}

#[test]
fn bony_identity_on_a_corpus() {
    let g = Grid::new(64, 8.0).unwrap();
    for pair in random_pairs(g, 8, 16, 12) {
        let v = (&pair.v1, &pair.v2);
        for terms in bony_terms_all(v, &pair.theta, BonyFault::None).unwrap() {
            let direct = direct_block(v, &pair.theta, terms.q).unwrap();
            let scale = direct.max_abs().max(1e-300);
            let err = terms.sum().sub(&direct).unwrap().max_abs();
            // blocks can be tiny; compare against the full product scale
            assert!(err < 1e-9 * scale.max(1.0), "q = {}", terms.q);
        }
    }
}

#[test]
fn flipped_remainder_breaks_the_identity() {
    let g = Grid::new(64, 8.0).unwrap();
    let pair = &random_pairs(g, 1, 16, 13)[0];
    let v = (&pair.v1, &pair.v2);
    let worst = bony_terms_all(v, &pair.theta, BonyFault::FlipRemainder)
        .unwrap()
        .iter()
        .map(|t| t.sum().sub(&direct_block(v, &pair.theta, t.q).unwrap()).unwrap().max_abs())
        .fold(0.0, f64::max);
    assert!(worst > 1e-6);
}

#[test]
fn low_frequency_velocity_only_feeds_the_first_paraproduct() {
    // v = (sin x2 / 2, 0) sits in the low-pass block, theta far above it
    let g = Grid::new(128, PI).unwrap();
    let v1 = RealField::from_fn(g, "v1", |_, y| 0.5 * y.sin());
    let v2 = RealField::zeros(g, "v2");
    let theta = RealField::from_fn(g, "t", |x, y| (24.0 * x).cos() * (3.0 * y).sin());
    for q in 2..6 {
        let t = bony_terms((&v1, &v2), &theta, q).unwrap();
        let direct = direct_block((&v1, &v2), &theta, q).unwrap();
        assert!(t.paraproduct_low_theta.max_abs() < 1e-12);
        assert!(t.remainder.max_abs() < 1e-12);
        assert!(t.paraproduct_low_v.sub(&direct).unwrap().max_abs() < 1e-12);
    }
}

fn index_oracle(l1: f64, b: f64, s: f64, p: f64) -> u32 {
    if b <= 2.0 * l1 {
        return 2;
    }
    let a = 4.0 - s - 2.0 / p;
    // smallest N >= 1 with b / l1 < 2^{N a}
    let mut n = 1;
    while b / l1 >= 2f64.powf(n as f64 * a) {
        n += 1;
    }
    n
}

#[test]
fn interpolation_index_branches() {
    let (s, p) = (0.5, 8.0 / 7.0);
    let a = 4.0 - s - 2.0 / p;
    assert_eq!(interpolation_index(1.0, 2.0, s, p, 2.0), 2);
    assert_eq!(interpolation_index(3.0, 0.5, s, p, 2.0), 2);
    // exactly 2^{a}: log2 ratio / a = 1
    assert_eq!(interpolation_index(1.0, 2f64.powf(a), s, p, 2.0), 2);
    assert_eq!(interpolation_index(1.0, 2f64.powf(2.0 * a), s, p, 2.0), 3);
    assert_eq!(interpolation_index(1.0, 2f64.powf(2.0 * a) * 0.99, s, p, 2.0), 2);
}

#[test]
fn log_interp_on_gaussians_is_bounded() {
    let g = Grid::new(128, 8.0).unwrap();
    for f in gaussian_family(g, 10, 0.4, 2.0, 14) {
        let rep = log_interp_check(&f, 0.5, 8.0 / 7.0).unwrap();
        assert!(rep.ratio().is_finite() && rep.ratio() > 0.0);
        assert_eq!(rep.n, index_oracle(rep.l1, rep.besov, 0.5, 8.0 / 7.0));
    }
}

#[test]
fn heat_step_closed_form() {
    let l = 2.0;
    let g = Grid::new(32, l).unwrap();
    let k = 2.0 * PI / l;
    let u0 = RealField::from_fn(g, "u", |x, y| (k * x).sin() * (k * y).cos());
    let f = RealField::from_fn(g, "f", |x, _| (k * x).cos() + 0.5);
    let h = 0.05;
    let u = heat_step(&u0.to_spectral().unwrap(), &f.to_spectral().unwrap(), h)
        .unwrap()
        .to_real("u");
    let decay2 = (-2.0 * k * k * h).exp();
    let gain = (1.0 - (-k * k * h).exp()) / (k * k);
    let exact = RealField::from_fn(g, "e", |x, y| {
        decay2 * (k * x).sin() * (k * y).cos() + gain * (k * x).cos() + 0.5 * h
    });
    assert!(u.sub(&exact).unwrap().max_abs() < 1e-14);
}

#[test]
fn heat_smoothing_free_mode() {
    let l = 4.0;
    let g = Grid::new(64, l).unwrap();
    let k = 3.0 * PI / l;
    let mode = RealField::from_fn(g, "u0", |x, _| (k * x).cos());
    let zero = RealField::zeros(g, "f");
    let rep = heat_smoothing_check(&mode, &ForcingTimeline { pieces: vec![zero] }, 0.5, 8.0 / 7.0, 1.0, 10).unwrap();
    let b0 = rep.samples[0].1;
    for &(t, b) in &rep.samples {
        assert!((b - b0 * (-k * k * t).exp()).abs() < 1e-8 * b0);
    }
    assert!((rep.lhs - b0).abs() < 1e-12 * b0);
}

#[test]
fn product_corpus_has_finite_constants() {
    let g = Grid::new(64, 8.0).unwrap();
    let corpus = random_pairs(g, 6, 10, 15);
    for variant in [ProductVariant::Negative, ProductVariant::Positive, ProductVariant::SelfAdvection] {
        let rep = verify_product_estimate(&corpus, variant, 0.5, 8.0 / 7.0).unwrap();
        assert_eq!(rep.rows.len(), 6);
        assert!(rep.fitted_constant.is_finite() && rep.fitted_constant > 0.0);
        assert!(rep.rows.iter().all(|r| r.grid_n == 64 && r.variant == variant.number()));
    }
    let pair = &corpus[0];
    let still = CorpusPair {
        v1: RealField::zeros(g, "v1"),
        v2: RealField::zeros(g, "v2"),
        theta: pair.theta.clone(),
    };
    assert_eq!(product_estimate(&still, ProductVariant::Negative, 0.5, 8.0 / 7.0).unwrap().0, 0.0);
    assert!(product_estimate(pair, ProductVariant::Positive, 0.5, 3.0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn reconstruction_holds(seed in any::<u64>(), decay in 0.0f64..1.5) {
        let g = Grid::new(32, 2.0).unwrap();
        let f = random_field(g, 15, decay, &mut rng(seed));
        prop_assert!(rel_err(&decompose_default(&f).unwrap().reconstruct(), &f) < 1e-12);
    }

    #[test]
    fn besov_norm_is_a_norm(seed in any::<u64>(), c in -4.0f64..4.0, s in -1.0f64..2.0, p in 1.0f64..6.0) {
        let g = Grid::new(32, 2.0).unwrap();
        let mut gen = rng(seed);
        let (a, b) = (random_field(g, 12, 0.5, &mut gen), random_field(g, 12, 0.5, &mut gen));
        let bp = BesovParams::new(s, p, f64::INFINITY).unwrap();
        let na = besov_norm(&a, bp).unwrap();
        let nb = besov_norm(&b, bp).unwrap();
        prop_assert!((besov_norm(&a.scale(c), bp).unwrap() - c.abs() * na).abs() <= 1e-12 * na.max(1e-300) * (1.0 + c.abs()));
        prop_assert!(besov_norm(&a.add(&b).unwrap(), bp).unwrap() <= (na + nb) * (1.0 + 1e-12));
    }

    #[test]
    fn interpolation_index_matches_search(l1 in 1e-3f64..1e3, log_ratio in -3.0f64..40.0) {
        let b = l1 * 2f64.powf(log_ratio);
        let (s, p) = (0.5, 8.0 / 7.0);
        let a = 4.0 - s - 2.0 / p;
        // keep clear of the snapping window at exact branch points
        let frac = (log_ratio / a).fract();
        prop_assume!(frac > 1e-9 && frac < 1.0 - 1e-9);
        prop_assert_eq!(interpolation_index(l1, b, s, p, 2.0), index_oracle(l1, b, s, p));
    }
}
