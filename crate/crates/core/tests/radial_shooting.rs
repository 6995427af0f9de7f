use proptest::prelude::*;
use pucci_lab::pucci::{Ellipticity, OperatorSign};
use pucci_lab::radial::{
    classify_decay, critical_constants, find_critical_p, first_eigenvalue_ball, integrate_shoot, CriticalOptions,
    DecayVariant, ShootConfig, Source, Terminal,
};
use pucci_lab::Error;

fn pucci5() -> Ellipticity {
    Ellipticity::new(1.0, 2.0, 5).unwrap()
}

#[test]
fn aubin_talenti_profile() {
    let lap = Ellipticity::laplacian(3).unwrap();
    let cfg = ShootConfig::new(Source::PurePower { p: 5.0 }, lap, OperatorSign::Plus, 1.0).with_r_max(1e4);
    let tr = integrate_shoot(&cfg).unwrap();
    assert!(tr.is_positive_to_rmax());
    let worst = tr
        .samples
        .iter()
        .filter(|s| s.r <= 10.0)
        .map(|s| (s.v - (1.0 + s.r * s.r / 3.0).powf(-0.5)).abs())
        .fold(0.0, f64::max);
    assert!(worst <= 1e-6, "{worst:e}");
    let consts = critical_constants(&lap);
    let class = classify_decay(&tr, 5.0, &consts, None).unwrap();
    match class.variant {
        DecayVariant::FastDecay { c } => assert!((c - 3f64.sqrt()).abs() < 1e-3, "c = {c}"),
        other => panic!("expected fast decay, got {other:?}"),
    }
}

#[test]
fn sinc_profile_and_zero() {
    let lap = Ellipticity::laplacian(3).unwrap();
    let cfg = ShootConfig::new(Source::Linear { mu: 1.0 }, lap, OperatorSign::Plus, 1.0).with_r_max(10.0);
    let tr = integrate_shoot(&cfg).unwrap();
    let r0 = tr.crossing().unwrap();
    assert!((r0 - std::f64::consts::PI).abs() <= 1e-8);
    for i in 1..=300 {
        let r = 0.01 * i as f64;
        let v = tr.eval_at(r).unwrap().0;
        assert!((v - r.sin() / r).abs() <= 1e-8, "r={r}");
    }
}

/// `v_κ(r) = κ^α v(κr)` with `α = 2/(p−1)` solves the same equation.
#[test]
fn power_source_rescaling() {
    let (p, kappa) = (3.0, 2.0f64);
    let alpha = 2.0 / (p - 1.0);
    let ell = pucci5();
    let base = integrate_shoot(&ShootConfig::new(Source::PurePower { p }, ell, OperatorSign::Plus, 1.0).with_r_max(20.0))
        .unwrap();
    let scaled_amp = kappa.powf(alpha);
    let scaled =
        integrate_shoot(&ShootConfig::new(Source::PurePower { p }, ell, OperatorSign::Plus, scaled_amp).with_r_max(10.0))
            .unwrap();
    let end = scaled.r_end().min(base.r_end() / kappa);
    for i in 0..=200 {
        let r = end * i as f64 / 200.0;
        let want = kappa.powf(alpha) * base.eval_at(kappa * r).unwrap().0;
        let got = scaled.eval_at(r).unwrap().0;
        assert!((got - want).abs() <= 1e-6, "r={r}: {got} vs {want}");
    }
    let (c1, c2) = (base.crossing().unwrap(), scaled.crossing().unwrap());
    assert!((c1 / kappa - c2).abs() <= 1e-6);
}

#[test]
fn samples_satisfy_the_equation() {
    for sign in [OperatorSign::Plus, OperatorSign::Minus] {
        let src = Source::PurePower { p: 2.0 };
        let cfg = ShootConfig::new(src.clone(), pucci5(), sign, 1.0).with_r_max(50.0);
        let tr = integrate_shoot(&cfg).unwrap();
        let res = tr.equation_residual(&src).unwrap();
        assert!(res <= 10.0 * (cfg.atol + cfg.rtol), "{sign:?}: {res:e}");
        for w in tr.samples.windows(2) {
            assert!(w[1].r > w[0].r);
            let jump = (w[1].v - w[0].v).abs();
            let bound = 2.0 * (w[1].r - w[0].r) * w[0].dv.abs().max(w[1].dv.abs()) + 1e-12;
            assert!(jump <= bound, "jump {jump} at r = {}", w[0].r);
        }
    }
}

#[test]
fn crossing_reported_by_classifier() {
    let ell = pucci5();
    let cfg = ShootConfig::new(Source::PurePower { p: 2.0 }, ell, OperatorSign::Plus, 1.0);
    let tr = integrate_shoot(&cfg).unwrap();
    let r = tr.crossing().unwrap();
    let class = classify_decay(&tr, 2.0, &critical_constants(&ell), None).unwrap();
    assert_eq!(class.variant, DecayVariant::Crossing { r });
}

#[test]
fn eigenvalue_examples() {
    let lap = Ellipticity::laplacian(3).unwrap();
    let pi2 = std::f64::consts::PI.powi(2);
    let mu1 = first_eigenvalue_ball(&lap, OperatorSign::Plus, 1.0).unwrap();
    assert!((mu1 - pi2).abs() <= 1e-3);
    let mu2 = first_eigenvalue_ball(&lap, OperatorSign::Plus, 2.0).unwrap();
    assert!((mu2 - mu1 / 4.0).abs() <= 1e-6 * mu2);
    let pucci3 = Ellipticity::new(1.0, 2.0, 3).unwrap();
    let mu_plus = first_eigenvalue_ball(&pucci3, OperatorSign::Plus, 1.0).unwrap();
    assert!(mu_plus > pi2 / 2.0 && mu_plus < pi2, "{mu_plus}");
}

#[test]
fn laplacian_critical_exponents() {
    let opts = CriticalOptions::default();
    for (n, want) in [(3usize, 5.0), (4, 3.0)] {
        let s = find_critical_p(&Ellipticity::laplacian(n).unwrap(), OperatorSign::Plus, None, 1e-3, &opts).unwrap();
        assert!((s.p_star - want).abs() <= 0.05, "n={n}: {}", s.p_star);
        assert!(s.width <= 1e-3);
    }
}

#[test]
fn plus_exponent_lies_between_references() {
    let s = find_critical_p(&pucci5(), OperatorSign::Plus, None, 0.01, &CriticalOptions::default()).unwrap();
    assert!(s.lo > 3.0 && s.hi < 5.0, "({}, {})", s.lo, s.hi);
}

#[test]
fn subcritical_powers_cross() {
    let ell = pucci5();
    for p in [1.2, 1.6, 2.0, 2.5, 3.0] {
        let tr = integrate_shoot(&ShootConfig::new(Source::PurePower { p }, ell, OperatorSign::Plus, 1.0)).unwrap();
        assert!(matches!(tr.terminal, Terminal::CrossedZero { .. }), "p = {p}");
    }
}

#[test]
fn invalid_shots_rejected() {
    let ell = pucci5();
    let bad_p = ShootConfig::new(Source::PurePower { p: 0.5 }, ell, OperatorSign::Plus, 1.0);
    assert!(matches!(integrate_shoot(&bad_p), Err(Error::InvalidInput(_))));
    let bad_amp = ShootConfig::new(Source::PurePower { p: 2.0 }, ell, OperatorSign::Plus, -1.0);
    assert!(integrate_shoot(&bad_amp).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    /// Linear sources scale: the zero of `h = μv` sits at `r₁/√μ`.
    #[test]
    fn linear_zero_scales_with_mu(mu in 0.5f64..20.0, amp in 0.1f64..10.0) {
        let ell = pucci5();
        let shoot = |m: f64, a: f64| {
            integrate_shoot(&ShootConfig::new(Source::Linear { mu: m }, ell, OperatorSign::Minus, a).with_r_max(100.0))
                .unwrap()
                .crossing()
                .unwrap()
        };
        let r1 = shoot(1.0, 1.0);
        prop_assert!((shoot(mu, amp) - r1 / mu.sqrt()).abs() <= 1e-7 * r1);
    }
}
