use proptest::prelude::*;
use pucci_lab::expr::{builtin_pair, example_params, GradientPair, Params, REGISTRY};
use pucci_lab::transform::{
    classify_growth, compute_big_g, compute_phi, invert_phi, transformed_h, GrowthClass, GrowthOptions, TransformTable,
};

fn params(kv: &[(&str, f64)]) -> Params {
    kv.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

type Closed = (&'static str, &'static [(&'static str, f64)], fn(f64) -> f64, fn(f64) -> f64);

/// Hand-integrated `G` and `φ` for pairs with elementary antiderivatives.
fn closed_forms() -> Vec<Closed> {
    vec![
        ("exp-one", &[("a", 1.0), ("p", 2.0)], |t| t, |t| t.exp() - 1.0),
        ("two-t-rational", &[("p", 2.0)], |t| (1.0 + t * t).ln(), |t| t + t.powi(3) / 3.0),
        (
            "mu-over-1+t",
            &[("a", 1.0), ("mu", 1.5), ("p", 2.0)],
            |t| 1.5 * (1.0 + t).ln(),
            |t| ((1.0 + t).powf(2.5) - 1.0) / 2.5,
        ),
        (
            "regular-log",
            &[("p", 1.5)],
            |t| (t + std::f64::consts::E).ln().ln(),
            |t| {
                let x = t + std::f64::consts::E;
                x * (x.ln() - 1.0)
            },
        ),
        (
            "sinh-cosh",
            &[("a", 1.0), ("gamma", 0.0), ("p", 2.0)],
            |t| ((t.cosh() + 1.0) / 2.0).ln(),
            |t| (t.sinh() + t) / 2.0,
        ),
        ("tanh-psi", &[("gamma", 1.0), ("mu", 0.5), ("p", 2.0)], |t| t.cosh().ln(), |t| t.sinh()),
        (
            "texp",
            &[("a", 1.0), ("gamma", 0.0), ("mu", 20.0)],
            |t| (t * t.exp() + 1.0).ln(),
            |t| (t - 1.0) * t.exp() + 1.0 + t,
        ),
    ]
}

#[test]
fn big_g_and_phi_match_antiderivatives() {
    for (name, kv, big_g, phi) in closed_forms() {
        let pair = builtin_pair(name, &params(kv)).unwrap();
        for i in 0..=20 {
            let t = 0.4 * i as f64;
            let g = compute_big_g(&pair, t, 1e-12).unwrap();
            let p = compute_phi(&pair, t, 1e-12).unwrap();
            assert!(rel(g, big_g(t)) <= 1e-9, "{name}: G({t}) = {g} vs {}", big_g(t));
            assert!(rel(p, phi(t)) <= 1e-9, "{name}: phi({t}) = {p} vs {}", phi(t));
        }
    }
}

#[test]
fn transformed_sources_match_hand_simplifications() {
    let cases: Vec<(&str, Params, Box<dyn Fn(f64) -> f64>)> = vec![
        ("exp-one", params(&[("a", 3.0), ("p", 2.5)]), Box::new(|s: f64| 3.0 * s.powf(2.5))),
        ("two-t-rational", params(&[("p", 2.0)]), Box::new(|s: f64| s * s)),
        ("mu-over-1+t", params(&[("a", 2.0), ("mu", 1.0), ("p", 3.0)]), Box::new(|s: f64| 2.0 * s.powi(3))),
        ("regular-log", params(&[("p", 1.5)]), Box::new(|s: f64| s.powf(1.5))),
        (
            "sinh-cosh",
            params(&[("a", 1.0), ("gamma", 0.5), ("p", 2.0)]),
            Box::new(|s: f64| 0.5 * ((2.0 * s).powi(2) - 2.0 * 0.5 * s)),
        ),
        (
            "tanh-psi",
            params(&[("gamma", 1.0), ("mu", 0.5), ("p", 3.0)]),
            Box::new(|s: f64| -s + 0.5 * s + s.powi(3)),
        ),
        (
            "texp",
            params(&[("a", 1.0), ("gamma", 0.1), ("mu", 20.0)]),
            Box::new(|s: f64| 20.0 * (1.0 + s).ln() - 0.1 * s),
        ),
        ("proto-uniq", params(&[("p", 3.0)]), Box::new(|s: f64| -s + s.powi(3))),
    ];
    for (name, p, h) in cases {
        let pair = builtin_pair(name, &p).unwrap();
        let table = TransformTable::covering(&pair, 50.0, 1e-12).unwrap();
        for i in 1..=20 {
            let s = 0.05 * 1.3f64.powi(i);
            let got = table.h(s).unwrap();
            assert!(rel(got, h(s)) <= 1e-7, "{name}: h({s}) = {got} vs {}", h(s));
        }
    }
}

#[test]
fn single_point_examples() {
    let exp_one = builtin_pair("exp-one", &params(&[("a", 1.0), ("p", 2.0)])).unwrap();
    assert!((transformed_h(&exp_one, 3.0, 1e-12).unwrap() - 9.0).abs() <= 1e-8);
    assert!((invert_phi(&exp_one, std::f64::consts::E - 1.0, 1e-12).unwrap() - 1.0).abs() <= 1e-10);
    let proto = builtin_pair("proto-uniq", &params(&[("p", 3.0)])).unwrap();
    assert!((transformed_h(&proto, 2.0, 1e-12).unwrap() - 6.0).abs() <= 1e-7);
    let rational = builtin_pair("two-t-rational", &params(&[("p", 2.0)])).unwrap();
    assert!((compute_big_g(&rational, 1.0, 1e-12).unwrap() - 2f64.ln()).abs() <= 1e-12);
    assert!((compute_phi(&rational, 1.0, 1e-12).unwrap() - 4.0 / 3.0).abs() <= 1e-12);
}

#[test]
fn table_is_monotone_and_convex_for_every_builtin() {
    for name in REGISTRY {
        let pair = builtin_pair(name, &example_params(name).unwrap()).unwrap();
        let table = TransformTable::build(&pair, 5.0, 1e-10).unwrap();
        let grid = table.grid();
        assert_eq!(grid[0].1, 0.0);
        assert_eq!(grid[0].2, 0.0);
        for w in grid.windows(2) {
            assert!(w[1].1 >= w[0].1, "{name}: G decreasing");
            assert!(w[1].2 > w[0].2, "{name}: phi not increasing");
        }
        // Convexity of φ: slopes between consecutive nodes never decrease.
        let slopes: Vec<f64> = grid.windows(2).map(|w| (w[1].2 - w[0].2) / (w[1].0 - w[0].0)).collect();
        for s in slopes.windows(2) {
            assert!(s[1] >= s[0] * (1.0 - 1e-9), "{name}: phi not convex");
        }
    }
}

#[test]
fn growth_of_power_pairs() {
    let mu1 = 10.0;
    for m in [0.5, 1.0, 2.0] {
        let f1 = builtin_pair("power-m", &params(&[("m", m), ("p", 0.5)])).unwrap();
        let r1 = classify_growth(&f1, mu1, &GrowthOptions::default()).unwrap();
        assert_eq!(r1.class, GrowthClass::Sublinear, "m = {m}: {r1:?}");
        let f2 = builtin_pair("power-m", &params(&[("m", m), ("q", 2.0 * m), ("nu", 0.5 * mu1)])).unwrap();
        let r2 = classify_growth(&f2, mu1, &GrowthOptions::default()).unwrap();
        assert_eq!(r2.class, GrowthClass::Superlinear, "m = {m}: {r2:?}");
    }
    let lin = GradientPair::new("0", "20*t", Params::new(), "linear").unwrap();
    assert_eq!(classify_growth(&lin, mu1, &GrowthOptions::default()).unwrap().class, GrowthClass::Neither);
}

proptest! {
    #[test]
    fn phi_roundtrip_exp_one(s in 0.0f64..10.0) {
        let pair = builtin_pair("exp-one", &params(&[("a", 1.0), ("p", 2.0)])).unwrap();
        let back = invert_phi(&pair, compute_phi(&pair, s, 1e-12).unwrap(), 1e-12).unwrap();
        prop_assert!((back - s).abs() <= 1e-8);
    }

    #[test]
    fn phi_roundtrip_rational(s in 0.0f64..10.0) {
        let pair = builtin_pair("two-t-rational", &params(&[("p", 2.0)])).unwrap();
        let back = invert_phi(&pair, compute_phi(&pair, s, 1e-12).unwrap(), 1e-12).unwrap();
        prop_assert!((back - s).abs() <= 1e-8);
    }
}
